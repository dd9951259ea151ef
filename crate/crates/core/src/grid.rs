//! Vector fields sampled at cell centers of a periodic box, spectral
//! derivatives, mollification and the concentrating test families.

use crate::error::{invalid, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// An `m`-component field on the `n`-dimensional box `[0, L)^n`, sampled at
/// the centers of `side^n` cells. Values are stored component-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GriddedField {
    n: usize,
    side: usize,
    box_length: f64,
    components: usize,
    data: Vec<f64>,
}

impl GriddedField {
    pub fn new(n: usize, side: usize, box_length: f64, components: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(n, side, box_length)?;
        if components == 0 {
            return invalid("a field needs at least one component");
        }
        let cells = side.pow(n as u32);
        if data.len() != cells * components {
            return Err(Error::GridMismatch(format!("expected {} values, got {}", cells * components, data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("field values must be finite");
        }
        Ok(Self { n, side, box_length, components, data })
    }

    pub fn zeros(n: usize, side: usize, box_length: f64, components: usize) -> Result<Self> {
        let cells = side.pow(n as u32);
        Self::new(n, side, box_length, components, vec![0.0; cells * components])
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn side(&self) -> usize {
        self.side
    }
    pub fn box_length(&self) -> f64 {
        self.box_length
    }
    pub fn components(&self) -> usize {
        self.components
    }
    pub fn cells(&self) -> usize {
        self.side.pow(self.n as u32)
    }
    pub fn spacing(&self) -> f64 {
        self.box_length / self.side as f64
    }
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }
    /// Measure of the whole box, `box_length^n`.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.n as i32)
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn component(&self, c: usize) -> &[f64] {
        let m = self.cells();
        &self.data[c * m..(c + 1) * m]
    }
    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let m = self.cells();
        &mut self.data[c * m..(c + 1) * m]
    }

    /// Integer coordinates of a flat cell index (axis 0 slowest).
    pub fn index_of(&self, flat: usize) -> [usize; 3] {
        unflatten(flat, self.n, self.side)
    }

    /// Physical coordinates of the center of cell `flat`.
    pub fn center_of(&self, flat: usize) -> [f64; 3] {
        let idx = self.index_of(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for d in 0..self.n {
            x[d] = (idx[d] as f64 + 0.5) * h;
        }
        x
    }

    /// Euclidean norm of the components, cell by cell.
    pub fn magnitude(&self) -> Vec<f64> {
        let m = self.cells();
        (0..m).map(|i| (0..self.components).map(|c| self.data[c * m + i].powi(2)).sum::<f64>().sqrt()).collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.magnitude().iter().sum::<f64>() * self.cell_measure()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.cell_measure()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute entry over all components.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self, c: usize) -> f64 {
        self.component(c).iter().sum::<f64>() / self.cells() as f64
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n == other.n && self.side == other.side && self.box_length == other.box_length
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !self.same_grid(other) || self.components != other.components {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { data, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { data, ..self.clone() })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { data: self.data.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    /// Sup over cells of the Euclidean norm of `self - other`.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    /// Grid inner product `sum_i F_i . G_i * cell_measure`.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.cell_measure())
    }

    pub(crate) fn with_data(&self, components: usize, data: Vec<f64>) -> Self {
        Self { n: self.n, side: self.side, box_length: self.box_length, components, data }
    }
}

fn check_dims(n: usize, side: usize, box_length: f64) -> Result<()> {
    if !(n == 2 || n == 3) {
        return invalid(format!("dimension must be 2 or 3, got {n}"));
    }
    if side < 2 {
        return invalid("grid side must be at least 2");
    }
    if !(box_length > 0.0 && box_length.is_finite()) {
        return invalid("box length must be positive");
    }
    Ok(())
}

pub(crate) fn unflatten(flat: usize, n: usize, side: usize) -> [usize; 3] {
    let mut idx = [0; 3];
    let mut r = flat;
    for d in (0..n).rev() {
        idx[d] = r % side;
        r /= side;
    }
    idx
}

/// In-place n-dimensional FFT of a cube of `side^n` values.
pub(crate) fn fft_nd(buf: &mut [Complex64], n: usize, side: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(side) } else { planner.plan_fft_forward(side) };
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    let total = side.pow(n as u32);
    for axis in 0..n {
        let stride = side.pow((n - 1 - axis) as u32);
        for start in 0..total {
            // lines start where the axis coordinate is zero
            if (start / stride) % side != 0 {
                continue;
            }
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = buf[start + k * stride];
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                buf[start + k * stride] = *v;
            }
        }
    }
    if inverse {
        let s = 1.0 / total as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }
}

/// Signed integer frequency of FFT bin `i`.
pub(crate) fn signed_freq(i: usize, side: usize) -> i64 {
    if i <= side / 2 {
        i as i64
    } else {
        i as i64 - side as i64
    }
}

/// Wavevector of bin `flat`, with the Nyquist coordinate set to zero so that
/// every odd multiplier maps real fields to real fields.
pub(crate) fn wavevector(flat: usize, n: usize, side: usize, box_length: f64) -> [f64; 3] {
    let idx = unflatten(flat, n, side);
    let mut xi = [0.0; 3];
    for d in 0..n {
        let k = signed_freq(idx[d], side);
        if side % 2 == 0 && k == (side / 2) as i64 {
            continue;
        }
        xi[d] = 2.0 * PI * k as f64 / box_length;
    }
    xi
}

pub(crate) fn forward(values: &[f64], n: usize, side: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, n, side, false);
    buf
}

pub(crate) fn backward(mut spec: Vec<Complex64>, n: usize, side: usize) -> Vec<f64> {
    fft_nd(&mut spec, n, side, true);
    spec.into_iter().map(|c| c.re).collect()
}

/// Applies a per-frequency linear map to the spectra of all components.
/// `symbol(xi, input, output)` receives the component spectra at one bin.
pub(crate) fn apply_multiplier<S>(f: &GriddedField, out_components: usize, symbol: S) -> GriddedField
where
    S: Fn(&[f64; 3], &[Complex64], &mut [Complex64]),
{
    let (n, side, m) = (f.n, f.side, f.cells());
    let spectra: Vec<Vec<Complex64>> = (0..f.components).map(|c| forward(f.component(c), n, side)).collect();
    let mut outs = vec![vec![Complex64::new(0.0, 0.0); m]; out_components];
    let mut inp = vec![Complex64::new(0.0, 0.0); f.components];
    let mut res = vec![Complex64::new(0.0, 0.0); out_components];
    for bin in 0..m {
        let xi = wavevector(bin, n, side, f.box_length);
        for c in 0..f.components {
            inp[c] = spectra[c][bin];
        }
        res.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        symbol(&xi, &inp, &mut res);
        for c in 0..out_components {
            outs[c][bin] = res[c];
        }
    }
    let mut data = Vec::with_capacity(m * out_components);
    for spec in outs {
        data.extend(backward(spec, n, side));
    }
    f.with_data(out_components, data)
}

pub(crate) fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

pub(crate) fn monomial(xi: &[f64; 3], beta: &[usize]) -> f64 {
    beta.iter().enumerate().map(|(d, &b)| xi[d].powi(b as i32)).product()
}

/// Spectral partial derivative `d^beta` of a scalar field.
pub fn derivative(f: &GriddedField, beta: &[usize]) -> Result<GriddedField> {
    if f.components != 1 || beta.len() != f.n {
        return invalid("derivative needs a scalar field and a multi-index of length n");
    }
    let order: usize = beta.iter().sum();
    let ik = i_pow(order);
    Ok(apply_multiplier(f, 1, |xi, inp, out| {
        out[0] = inp[0] * ik * monomial(xi, beta);
    }))
}

/// Spectral gradient of a scalar field.
pub fn gradient(phi: &GriddedField) -> Result<GriddedField> {
    if phi.components != 1 {
        return invalid("gradient needs a scalar field");
    }
    let n = phi.n;
    Ok(apply_multiplier(phi, n, |xi, inp, out| {
        for d in 0..n {
            out[d] = inp[0] * Complex64::new(0.0, xi[d]);
        }
    }))
}

/// Spectral curl of a stream function: `(-d2 psi, d1 psi)` in 2-d and
/// `curl(psi e3) = (d2 psi, -d1 psi, 0)` in 3-d.
pub fn curl_of_stream(psi: &GriddedField) -> Result<GriddedField> {
    if psi.components != 1 {
        return invalid("stream function must be scalar");
    }
    let n = psi.n;
    Ok(apply_multiplier(psi, n, |xi, inp, out| {
        let d1 = inp[0] * Complex64::new(0.0, xi[0]);
        let d2 = inp[0] * Complex64::new(0.0, xi[1]);
        if n == 2 {
            out[0] = -d2;
            out[1] = d1;
        } else {
            out[0] = d2;
            out[1] = -d1;
        }
    }))
}

/// Multi-indices `beta` in N^n with `|beta| = k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorIndexSet {
    pub n: usize,
    pub k: usize,
    pub multi_indices: Vec<Vec<usize>>,
}

impl TensorIndexSet {
    pub fn new(n: usize, k: usize) -> Self {
        let mut out = Vec::new();
        let mut cur = vec![0; n];
        fill_indices(0, k, &mut cur, &mut out);
        Self { n, k, multi_indices: out }
    }

    /// `C(n + k - 1, k)`.
    pub fn len(&self) -> usize {
        self.multi_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multi_indices.is_empty()
    }
}

fn fill_indices(d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let n = cur.len();
    if d == n - 1 {
        cur[d] = left;
        out.push(cur.clone());
        return;
    }
    for b in (0..=left).rev() {
        cur[d] = b;
        fill_indices(d + 1, left - b, cur, out);
    }
}

pub fn binomial(a: usize, b: usize) -> usize {
    let mut r: u128 = 1;
    for i in 0..b {
        r = r * (a - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

/// `sum_{|beta| = k} d^beta F_beta`, spectrally. Components follow the order
/// of [`TensorIndexSet::new`].
pub fn div_k(f: &GriddedField, k: usize) -> Result<GriddedField> {
    let set = TensorIndexSet::new(f.n, k);
    if f.components != set.len() {
        return Err(Error::Invalid(format!(
            "div_k of order {k} in dimension {} needs {} components, got {}",
            f.n,
            set.len(),
            f.components
        )));
    }
    let ik = i_pow(k);
    Ok(apply_multiplier(f, 1, |xi, inp, out| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, beta) in set.multi_indices.iter().enumerate() {
            acc += inp[c] * monomial(xi, beta);
        }
        out[0] = acc * ik;
    }))
}

/// Divergence, i.e. `div_k` with `k = 1`.
pub fn divergence(f: &GriddedField) -> Result<GriddedField> {
    div_k(f, 1)
}

/// Smooth compactly supported profile on [0, 1): exp(1 - 1/(1 - r^2)).
pub fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// Polynomial profile `(1 - r^2)^8` on [0, 1); its spectrum decays fast
/// enough that spectral derivatives stay localized at a few cells per radius.
pub fn poly_bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - r * r).powi(8)
    }
}

fn default_center(center: &Option<Vec<f64>>, n: usize, box_length: f64) -> Result<[f64; 3]> {
    let mut c = [0.0; 3];
    match center {
        None => {
            for v in c.iter_mut().take(n) {
                *v = 0.5 * box_length;
            }
        }
        Some(v) => {
            if v.len() != n {
                return invalid("center must have n coordinates");
            }
            c[..n].copy_from_slice(v);
        }
    }
    Ok(c)
}

fn dist(x: &[f64; 3], c: &[f64; 3], n: usize) -> f64 {
    (0..n).map(|d| (x[d] - c[d]).powi(2)).sum::<f64>().sqrt()
}

fn default_one() -> f64 {
    1.0
}
fn default_components() -> usize {
    1
}

/// Analytic field families understood by [`make_field`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldDescriptor {
    Zero {
        #[serde(default = "default_components")]
        components: usize,
    },
    /// `amplitude * exp(-|x - c|^2 / (2 sigma^2))`.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "default_one")]
        amplitude: f64,
    },
    /// `lambda^n g(lambda (x - c))` with `g` the smooth bump of the given radius.
    ScaledBump {
        lambda: f64,
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Curl of the stream function `lambda^(n-1) g(lambda (x - c))`.
    Curl {
        lambda: f64,
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Gradient of the potential `lambda^(n-1) g(lambda (x - c))`.
    Gradient {
        lambda: f64,
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `|x - c|^power (1 + log(radius / |x - c|))^log_power` inside the ball.
    RadialPowerLog {
        power: f64,
        log_power: f64,
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Band-limited random field with Fourier modes `1 <= |k|_inf <= modes`.
    RandomModes {
        seed: u64,
        modes: usize,
        #[serde(default = "default_components")]
        components: usize,
    },
    /// Independent uniform(-1, 1) values per cell.
    RandomCells {
        seed: u64,
        #[serde(default = "default_components")]
        components: usize,
    },
}

fn sample_scalar<F: Fn(&[f64; 3]) -> f64>(n: usize, side: usize, box_length: f64, g: F) -> Result<GriddedField> {
    let mut f = GriddedField::zeros(n, side, box_length, 1)?;
    for i in 0..f.cells() {
        let x = f.center_of(i);
        f.data[i] = g(&x);
    }
    Ok(f)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return invalid(format!("{name} must be positive"));
    }
    Ok(())
}

/// Samples a descriptor at the cell centers of an `side^n` grid.
pub fn make_field(desc: &FieldDescriptor, n: usize, side: usize, box_length: f64) -> Result<GriddedField> {
    check_dims(n, side, box_length)?;
    match desc {
        FieldDescriptor::Zero { components } => GriddedField::zeros(n, side, box_length, *components),
        FieldDescriptor::Gaussian { sigma, center, amplitude } => {
            positive("sigma", *sigma)?;
            let c = default_center(center, n, box_length)?;
            sample_scalar(n, side, box_length, |x| amplitude * (-dist(x, &c, n).powi(2) / (2.0 * sigma * sigma)).exp())
        }
        FieldDescriptor::ScaledBump { lambda, radius, center } => {
            positive("lambda", *lambda)?;
            positive("radius", *radius)?;
            let c = default_center(center, n, box_length)?;
            let scale = lambda.powi(n as i32);
            sample_scalar(n, side, box_length, |x| scale * poly_bump(lambda * dist(x, &c, n) / radius))
        }
        FieldDescriptor::Curl { lambda, radius, center } | FieldDescriptor::Gradient { lambda, radius, center } => {
            positive("lambda", *lambda)?;
            positive("radius", *radius)?;
            let c = default_center(center, n, box_length)?;
            let scale = lambda.powi(n as i32 - 1);
            let pot = sample_scalar(n, side, box_length, |x| scale * poly_bump(lambda * dist(x, &c, n) / radius))?;
            if matches!(desc, FieldDescriptor::Curl { .. }) {
                curl_of_stream(&pot)
            } else {
                gradient(&pot)
            }
        }
        FieldDescriptor::RadialPowerLog { power, log_power, radius, center } => {
            positive("radius", *radius)?;
            let c = default_center(center, n, box_length)?;
            let floor = 0.25 * box_length / side as f64;
            sample_scalar(n, side, box_length, |x| {
                let r = dist(x, &c, n).max(floor);
                if r >= *radius {
                    0.0
                } else {
                    r.powf(*power) * (1.0 + (radius / r).ln()).powf(*log_power)
                }
            })
        }
        FieldDescriptor::RandomModes { seed, modes, components } => {
            if *modes == 0 || 2 * modes >= side {
                return invalid("modes must satisfy 1 <= modes < side / 2");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut f = GriddedField::zeros(n, side, box_length, *components)?;
            let span = 2 * modes + 1;
            let count = span.pow(n as u32);
            for comp in 0..*components {
                let mut waves = Vec::new();
                for w in 0..count {
                    let idx = unflatten(w, n, span);
                    let k: Vec<f64> = (0..n).map(|d| idx[d] as f64 - *modes as f64).collect();
                    if k.iter().all(|&v| v == 0.0) {
                        continue;
                    }
                    let a: f64 = rng.gen_range(-1.0..1.0);
                    let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                    waves.push((k, a, phase));
                }
                let dst = f.component_mut(comp);
                for (i, v) in dst.iter_mut().enumerate() {
                    let idx = unflatten(i, n, side);
                    let mut s = 0.0;
                    for (k, a, ph) in &waves {
                        let mut arg = *ph;
                        for d in 0..n {
                            arg += 2.0 * PI * k[d] * (idx[d] as f64 + 0.5) / side as f64;
                        }
                        s += a * arg.cos();
                    }
                    *v = s;
                }
            }
            // remove the rounding residue of the zero mode
            for comp in 0..*components {
                let m = f.mean(comp);
                f.component_mut(comp).iter_mut().for_each(|v| *v -= m);
            }
            Ok(f)
        }
        FieldDescriptor::RandomCells { seed, components } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let cells = side.pow(n as u32);
            let data = (0..cells * components).map(|_| rng.gen_range(-1.0..1.0)).collect();
            GriddedField::new(n, side, box_length, *components, data)
        }
    }
}

/// A nonnegative unit-mass kernel supported in the ball of radius `L / h`,
/// stored on lattice offsets (index 0 is the zero offset).
#[derive(Clone, Debug)]
pub struct Mollifier {
    pub h: usize,
    pub kernel: GriddedField,
}

impl Mollifier {
    pub fn new(h: usize, n: usize, side: usize, box_length: f64) -> Result<Self> {
        if h == 0 {
            return invalid("mollifier index h must be positive");
        }
        let radius = box_length / h as f64;
        let mut kernel = GriddedField::zeros(n, side, box_length, 1)?;
        let spacing = kernel.spacing();
        for i in 0..kernel.cells() {
            let idx = unflatten(i, n, side);
            let r = (0..n).map(|d| (signed_freq(idx[d], side) as f64 * spacing).powi(2)).sum::<f64>().sqrt();
            kernel.data[i] = bump(r / radius);
        }
        let mass = kernel.data.iter().sum::<f64>() * kernel.cell_measure();
        let s = 1.0 / mass;
        kernel.data.iter_mut().for_each(|v| *v *= s);
        Ok(Self { h, kernel })
    }
}

/// Circular convolution `F * rho` on the common grid.
pub fn mollify(f: &GriddedField, rho: &Mollifier) -> Result<GriddedField> {
    if !f.same_grid(&rho.kernel) {
        return Err(Error::GridMismatch("mollifier and field grids differ".into()));
    }
    let ks = forward(rho.kernel.component(0), f.n, f.side);
    let cm = f.cell_measure();
    let mut data = Vec::with_capacity(f.data.len());
    for c in 0..f.components {
        let mut s = forward(f.component(c), f.n, f.side);
        for (a, b) in s.iter_mut().zip(&ks) {
            *a *= b * cm;
        }
        data.extend(backward(s, f.n, f.side));
    }
    Ok(f.with_data(f.components, data))
}

/// Geometry shared by the concentrating families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub n: usize,
    pub side: usize,
    #[serde(default = "default_one")]
    pub box_length: f64,
    /// Support radius of the unscaled member; defaults to `box_length / 5`,
    /// wide enough that the finest level stays resolved on 256 cells.
    #[serde(default)]
    pub radius: Option<f64>,
}

impl FamilyConfig {
    pub fn new(n: usize, side: usize) -> Self {
        Self { n, side, box_length: 1.0, radius: None }
    }

    fn radius(&self) -> f64 {
        self.radius.unwrap_or(self.box_length / 5.0)
    }
}

fn family(levels: &[f64], cfg: &FamilyConfig, curl: bool) -> Result<Vec<GriddedField>> {
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("scale levels must be strictly increasing");
    }
    let radius = cfg.radius();
    let desc = |lambda: f64| {
        if curl {
            FieldDescriptor::Curl { lambda, radius, center: None }
        } else {
            FieldDescriptor::ScaledBump { lambda, radius, center: None }
        }
    };
    // normalization fixed by the unit-scale member; the scaling keeps L1 invariant
    let base = make_field(&desc(1.0), cfg.n, cfg.side, cfg.box_length)?;
    let s = 1.0 / base.l1_norm();
    levels.iter().map(|&l| make_field(&desc(l), cfg.n, cfg.side, cfg.box_length).map(|f| f.scale(s))).collect()
}

/// Curls of L1-normalized concentrating stream functions, one per level.
pub fn make_divfree_family(levels: &[f64], cfg: &FamilyConfig) -> Result<Vec<GriddedField>> {
    family(levels, cfg, true)
}

/// L1-normalized bumps `lambda^n g(lambda x)`, one per level.
pub fn make_unconstrained_family(levels: &[f64], cfg: &FamilyConfig) -> Result<Vec<GriddedField>> {
    family(levels, cfg, false)
}
