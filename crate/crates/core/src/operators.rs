//! Riesz potentials on the box, one-dimensional Hardy operators on profiles,
//! the Helmholtz projection and the co-canceling symbol test.

use crate::error::{invalid, Error, Result};
use crate::grid::{apply_multiplier, fft_nd, monomial, unflatten, GriddedField, TensorIndexSet};
use crate::quad;
use crate::rearrange::{integral_of, Piece, PiecewiseFn, Profile, Shape};
use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RieszMode {
    #[default]
    Spectral,
    Direct,
}

fn yes() -> bool {
    true
}

/// Kernel `|x|^(alpha - n) / gamma(alpha)` with the normalization that makes
/// the Fourier symbol `|xi|^(-alpha)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszKernelSpec {
    pub alpha: f64,
    #[serde(default)]
    pub mode: RieszMode,
    /// Reject inputs whose mass leaves the central quarter of the box.
    #[serde(default = "yes")]
    pub enforce_support: bool,
}

impl RieszKernelSpec {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, mode: RieszMode::Spectral, enforce_support: true }
    }

    pub fn direct(mut self) -> Self {
        self.mode = RieszMode::Direct;
        self
    }

    /// `pi^(n/2) 2^alpha Gamma(alpha/2) / Gamma((n - alpha)/2)`.
    pub fn gamma(&self, n: usize) -> f64 {
        use statrs::function::gamma::gamma;
        let nf = n as f64;
        PI.powf(nf / 2.0) * 2f64.powf(self.alpha) * gamma(self.alpha / 2.0) / gamma((nf - self.alpha) / 2.0)
    }
}

/// Fraction of the L1 mass allowed outside the central region.
const SUPPORT_TOL: f64 = 1e-3;

/// Checks that the mass of `f` outside the central cube of side `L/2` is
/// below `SUPPORT_TOL` of the total.
pub fn check_support(f: &GriddedField) -> Result<()> {
    let mag = f.magnitude();
    let (lo, hi) = (0.25 * f.box_length(), 0.75 * f.box_length());
    let mut total = 0.0;
    let mut outside = 0.0;
    for (i, v) in mag.iter().enumerate() {
        total += v;
        let x = f.center_of(i);
        if x[..f.n()].iter().any(|&c| c < lo || c > hi) {
            outside += v;
        }
    }
    if outside > SUPPORT_TOL * total {
        return Err(Error::Support(format!("{:.3e} of the mass lies outside the central quarter of the box", outside / total)));
    }
    Ok(())
}

/// `int |x|^s` over the face `x_axis = c` of the cell centered at `d h`.
fn face_integral(d: &[i64], axis: usize, c: f64, h: f64, s: f64) -> f64 {
    let (x, w) = quad::gl16();
    let sub = 4;
    let others: Vec<usize> = (0..d.len()).filter(|&j| j != axis).collect();
    let ranges: Vec<(f64, f64)> = others.iter().map(|&j| ((d[j] as f64 - 0.5) * h, (d[j] as f64 + 0.5) * h)).collect();
    let nodes = |(a, b): (f64, f64)| {
        let mut out = Vec::with_capacity(16 * sub);
        let hs = (b - a) / sub as f64;
        for p in 0..sub {
            let mid = a + (p as f64 + 0.5) * hs;
            for (xi, wi) in x.iter().zip(w) {
                out.push((mid + 0.5 * hs * xi, 0.5 * hs * wi));
            }
        }
        out
    };
    let c2 = c * c;
    match ranges.len() {
        1 => nodes(ranges[0]).iter().map(|&(y, wy)| wy * (c2 + y * y).powf(s / 2.0)).sum(),
        _ => {
            let (ny, nz) = (nodes(ranges[0]), nodes(ranges[1]));
            let mut acc = 0.0;
            for &(y, wy) in &ny {
                for &(z, wz) in &nz {
                    acc += wy * wz * (c2 + y * y + z * z).powf(s / 2.0);
                }
            }
            acc
        }
    }
}

/// `int |x|^(alpha - n)` over the cell centered at `d h`; near cells by the
/// divergence theorem (`div(x |x|^s) = (n + s) |x|^s`), far cells by 3-point
/// Gauss-Legendre.
fn cell_weight(d: &[i64], h: f64, alpha: f64) -> f64 {
    let n = d.len();
    let s = alpha - n as f64;
    if d.iter().all(|v| v.abs() <= 2) {
        let mut acc = 0.0;
        for axis in 0..n {
            for sign in [-1.0, 1.0] {
                let c = (d[axis] as f64 + 0.5 * sign) * h;
                acc += sign * c * face_integral(d, axis, c, h, s);
            }
        }
        return acc / alpha;
    }
    let g = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
    let mut acc = 0.0;
    let count = 3usize.pow(n as u32);
    for k in 0..count {
        let mut r2 = 0.0;
        let mut wt = 1.0;
        let mut rest = k;
        for dv in d {
            let (x, w) = g[rest % 3];
            rest /= 3;
            let y = (*dv as f64 + 0.5 * x) * h;
            r2 += y * y;
            wt *= 0.5 * w;
        }
        acc += wt * r2.powf(s / 2.0);
    }
    acc * h.powi(n as i32)
}

/// Weights `w(d) / gamma` on the doubled grid, offsets `d` in `[-M, M)`.
fn kernel_table(n: usize, side: usize, h: f64, spec: &RieszKernelSpec) -> Vec<f64> {
    use rayon::prelude::*;
    let p = 2 * side;
    let g = spec.gamma(n);
    (0..p.pow(n as u32))
        .into_par_iter()
        .map(|i| {
            let idx = unflatten(i, n, p);
            let d: Vec<i64> = (0..n).map(|j| if idx[j] < side { idx[j] as i64 } else { idx[j] as i64 - p as i64 }).collect();
            cell_weight(&d, h, spec.alpha) / g
        })
        .collect()
}

fn padded_index(i: usize, n: usize, side: usize) -> usize {
    let idx = unflatten(i, n, side);
    let p = 2 * side;
    (0..n).fold(0, |acc, j| acc * p + idx[j])
}

/// `I_alpha F` componentwise: free-space convolution with the cell-averaged
/// kernel, via the zero-padded doubled grid or by direct summation.
pub fn riesz(f: &GriddedField, spec: &RieszKernelSpec) -> Result<GriddedField> {
    let n = f.n();
    if !(spec.alpha > 0.0 && spec.alpha < n as f64) {
        return Err(Error::Admissibility(format!("alpha = {} must lie in (0, {n})", spec.alpha)));
    }
    if spec.enforce_support {
        check_support(f)?;
    }
    let side = f.side();
    let h = f.spacing();
    let table = kernel_table(n, side, h, spec);
    let cells = f.cells();
    let p = 2 * side;
    let mut data = Vec::with_capacity(cells * f.components());
    match spec.mode {
        RieszMode::Spectral => {
            let mut kspec: Vec<Complex64> = table.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft_nd(&mut kspec, n, p, false);
            for c in 0..f.components() {
                let mut buf = vec![Complex64::new(0.0, 0.0); p.pow(n as u32)];
                for (i, &v) in f.component(c).iter().enumerate() {
                    buf[padded_index(i, n, side)] = Complex64::new(v, 0.0);
                }
                fft_nd(&mut buf, n, p, false);
                for (a, b) in buf.iter_mut().zip(&kspec) {
                    *a *= b;
                }
                fft_nd(&mut buf, n, p, true);
                data.extend((0..cells).map(|i| buf[padded_index(i, n, side)].re));
            }
        }
        RieszMode::Direct => {
            use rayon::prelude::*;
            let coords: Vec<[usize; 3]> = (0..cells).map(|i| unflatten(i, n, side)).collect();
            for c in 0..f.components() {
                let src = f.component(c);
                let out: Vec<f64> = (0..cells)
                    .into_par_iter()
                    .map(|i| {
                        let xi = coords[i];
                        let mut acc = 0.0;
                        for (j, v) in src.iter().enumerate() {
                            if *v == 0.0 {
                                continue;
                            }
                            let xj = coords[j];
                            let k = (0..n).fold(0, |a, d| a * p + (xi[d] + p - xj[d]) % p);
                            acc += table[k] * v;
                        }
                        acc
                    })
                    .collect();
                data.extend(out);
            }
        }
    }
    GriddedField::new(n, side, f.box_length(), f.components(), data)
}

fn theta(n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < n as f64) {
        return Err(Error::Admissibility(format!("alpha = {alpha} must lie in (0, {n})")));
    }
    Ok(alpha / n as f64)
}

/// `s -> int_s^L r^(-1 + alpha/n) f(r) dr`; all-infinite when the tail
/// integral diverges.
pub fn hardy(f: &Profile, n: usize, alpha: f64) -> Result<PiecewiseFn> {
    let th = theta(n, alpha)?;
    let g = f.to_fn();
    let length = g.domain_length;
    let weighted = g.times_power(th - 1.0);
    let mut pieces = Vec::with_capacity(weighted.pieces.len());
    let mut suffix = 0.0;
    for p in weighted.pieces.iter().rev() {
        let total = p.integral(p.lo, p.hi);
        let shape = match &p.shape {
            Shape::Powers(terms)
                if terms.iter().all(|t| t.1 != -1.0) && !(p.hi.is_infinite() && terms.iter().any(|t| t.0 != 0.0 && t.1 > -1.0)) =>
            {
                let mut out = Vec::with_capacity(terms.len() + 1);
                let mut c0 = suffix;
                for &(c, e) in terms {
                    let k = e + 1.0;
                    if p.hi.is_finite() {
                        c0 += c * p.hi.powf(k) / k;
                    }
                    out.push((-c / k, k));
                }
                out.push((c0, 0.0));
                Shape::Powers(out)
            }
            _ => {
                let piece = p.clone();
                let base = suffix;
                Shape::Func(Arc::new(move |s| base + piece.integral(s, piece.hi)))
            }
        };
        suffix += total;
        if suffix.is_infinite() || suffix.is_nan() {
            return Ok(PiecewiseFn {
                pieces: vec![Piece { lo: 0.0, hi: length, shape: Shape::Powers(vec![(f64::INFINITY, 0.0)]) }],
                domain_length: length,
            });
        }
        pieces.push(Piece { lo: p.lo, hi: p.hi, shape });
    }
    pieces.reverse();
    Ok(PiecewiseFn { pieces, domain_length: length })
}

/// `s -> s^(-1 + alpha/n) int_0^s f`, on the domain of `f`.
pub fn hardy_dual(f: &Profile, n: usize, alpha: f64) -> Result<PiecewiseFn> {
    let th = theta(n, alpha)?;
    let length = f.domain_length();
    let mut out = f.to_fn().double_star().times_power(th);
    if length.is_finite() {
        out.pieces.retain(|p| p.lo < length);
        if let Some(last) = out.pieces.last_mut() {
            last.hi = last.hi.min(length);
        }
        out.domain_length = length;
    }
    Ok(out)
}

/// `int_0^L g h`, for the duality of the Hardy pair.
pub fn pairing_fn(g: &PiecewiseFn, h: &PiecewiseFn) -> f64 {
    let mut knots = g.knots();
    knots.extend(h.knots());
    knots.push(0.0);
    let end = g.domain_length.min(h.domain_length);
    knots.push(end);
    knots.retain(|&k| k <= end);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots.windows(2).map(|w| integral_of(&|s| g.eval(s) * h.eval(s), w[0], w[1])).sum()
}

fn check_mean(f: &GriddedField) -> Result<()> {
    for c in 0..f.components() {
        let m = f.mean(c);
        if m.abs() > 1e-10 {
            return Err(Error::NonzeroMean(m));
        }
    }
    Ok(())
}

/// `H F = grad div (-Delta)^(-1) F`, symbol `-(xi/|xi|)(xi/|xi|) . F-hat`.
pub fn helmholtz(f: &GriddedField) -> Result<GriddedField> {
    let n = f.n();
    if f.components() != n {
        return invalid(format!("helmholtz needs {n} components, got {}", f.components()));
    }
    check_mean(f)?;
    Ok(apply_multiplier(f, n, |xi, inp, out| {
        let r2: f64 = xi[..n].iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            return;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for d in 0..n {
            dot += inp[d] * xi[d];
        }
        for d in 0..n {
            out[d] = -dot * (xi[d] / r2);
        }
    }))
}

/// `P F = F + H F`, the projection onto divergence-free fields.
pub fn project(f: &GriddedField) -> Result<GriddedField> {
    f.add(&helmholtz(f)?)
}

/// Order-`k` analog of `P`: removes the component along `(xi^beta)_beta`, the
/// symbol of `div_k`, so that `div_k(P_k F) = 0`.
pub fn project_k(f: &GriddedField, k: usize) -> Result<GriddedField> {
    let set = TensorIndexSet::new(f.n(), k);
    if k == 0 || f.components() != set.len() {
        return invalid(format!("project_k of order {k} needs {} components", set.len()));
    }
    check_mean(f)?;
    let m = set.len();
    Ok(apply_multiplier(f, m, |xi, inp, out| {
        let v: Vec<f64> = set.multi_indices.iter().map(|b| monomial(xi, b)).collect();
        let v2: f64 = v.iter().map(|x| x * x).sum();
        let mut dot = Complex64::new(0.0, 0.0);
        for c in 0..m {
            dot += inp[c] * v[c];
        }
        for c in 0..m {
            out[c] = if v2 == 0.0 { inp[c] } else { inp[c] - dot * (v[c] / v2) };
        }
    }))
}

/// One coefficient map `L_beta`, an `l x m` matrix, of a symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub beta: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
}

/// `L(xi) = sum_beta xi^beta L_beta`, homogeneous of degree `k >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolMap {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub terms: Vec<SymbolTerm>,
}

impl SymbolMap {
    pub fn new(n: usize, m: usize, l: usize, terms: Vec<SymbolTerm>) -> Result<Self> {
        let s = Self { n, m, l, terms };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() || self.m == 0 || self.l == 0 {
            return invalid("symbol needs at least one term and positive dimensions");
        }
        let k = self.order();
        for t in &self.terms {
            if t.beta.len() != self.n {
                return invalid("multi-index length must equal n");
            }
            if t.beta.iter().sum::<usize>() != k {
                return Err(Error::Admissibility("symbol is not homogeneous: orders of terms differ".into()));
            }
            if t.matrix.len() != self.l || t.matrix.iter().any(|r| r.len() != self.m) {
                return invalid("coefficient matrices must be l x m");
            }
        }
        if k == 0 {
            return Err(Error::Admissibility("symbol must be homogeneous of degree k >= 1".into()));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.terms.first().map(|t| t.beta.iter().sum()).unwrap_or(0)
    }

    pub fn eval(&self, xi: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.l, self.m);
        let mut x = [0.0; 3];
        x[..self.n].copy_from_slice(&xi[..self.n]);
        for t in &self.terms {
            let c = monomial(&x, &t.beta);
            for i in 0..self.l {
                for j in 0..self.m {
                    out[(i, j)] += c * t.matrix[i][j];
                }
            }
        }
        out
    }

    /// `L(xi) eta = xi . eta`.
    pub fn divergence(n: usize) -> Self {
        let terms = (0..n)
            .map(|d| {
                let mut beta = vec![0; n];
                beta[d] = 1;
                let mut row = vec![0.0; n];
                row[d] = 1.0;
                SymbolTerm { beta, matrix: vec![row] }
            })
            .collect();
        Self { n, m: n, l: 1, terms }
    }

    /// Scalar curl `xi1 eta2 - xi2 eta1` in 2-d, `xi x eta` in 3-d.
    pub fn curl(n: usize) -> Self {
        let unit = |d: usize| {
            let mut b = vec![0; n];
            b[d] = 1;
            b
        };
        if n == 2 {
            return Self {
                n,
                m: 2,
                l: 1,
                terms: vec![
                    SymbolTerm { beta: unit(0), matrix: vec![vec![0.0, 1.0]] },
                    SymbolTerm { beta: unit(1), matrix: vec![vec![-1.0, 0.0]] },
                ],
            };
        }
        // (xi x eta)_i = eps_ijk xi_j eta_k
        let terms = (0..3)
            .map(|j| {
                let mut mat = vec![vec![0.0; 3]; 3];
                for i in 0..3 {
                    for k in 0..3 {
                        mat[i][k] = levi_civita(i, j, k);
                    }
                }
                SymbolTerm { beta: unit(j), matrix: mat }
            })
            .collect();
        Self { n: 3, m: 3, l: 3, terms }
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Quasi-random unit vectors from a Halton sequence.
pub fn quasi_random_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let bases = [2, 3, 5, 7];
    let mut out = Vec::with_capacity(count);
    let mut i = 1;
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|d| 2.0 * radical_inverse(i, bases[d]) - 1.0).collect();
        i += 1;
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 0.1 {
            out.push(v.iter().map(|x| x / r).collect());
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CoCanceling,
    NotCoCanceling,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct CoCancelingReport {
    pub verdict: Verdict,
    /// A nonzero vector in every sampled kernel.
    pub witness: Option<Vec<f64>>,
    /// `(T* T)^(-1) T*` of the stacked map when it is injective.
    pub left_inverse: Option<DMatrix<f64>>,
    pub smallest_singular_value: f64,
}

const RANK_TOL: f64 = 1e-8;
const ZERO_TOL: f64 = 1e-12;

/// Intersects `ker L(xi_i)` over sampled directions by successive SVDs of
/// the restricted maps.
pub fn cocanceling_check(symbol: &SymbolMap, samples: usize) -> Result<CoCancelingReport> {
    symbol.validate()?;
    if samples < 2 * symbol.n {
        return invalid(format!("need at least {} samples", 2 * symbol.n));
    }
    let dirs = quasi_random_directions(symbol.n, samples);
    let m = symbol.m;
    let mut basis = DMatrix::<f64>::identity(m, m);
    let mut ambiguous = false;
    for xi in &dirs {
        if basis.ncols() == 0 {
            break;
        }
        let restricted = symbol.eval(xi) * &basis;
        let svd = nalgebra::linalg::SVD::new(restricted.clone(), false, true);
        let v_t = svd.v_t.expect("v_t requested");
        let d = basis.ncols();
        let mut sv = vec![0.0; d];
        for (i, s) in svd.singular_values.iter().enumerate() {
            sv[i] = *s;
        }
        let scale = symbol.eval(xi).norm().max(1.0);
        let mut keep = Vec::new();
        for j in 0..d {
            // rows of v_t beyond the rank of `restricted` carry zero singular values
            let s = if j < sv.len() { sv[j] } else { 0.0 };
            if s < ZERO_TOL * scale {
                keep.push(j);
            } else if s < RANK_TOL * scale {
                ambiguous = true;
            }
        }
        let rows = v_t.nrows();
        let cols: Vec<nalgebra::DVector<f64>> = keep
            .into_iter()
            .map(|j| {
                if j < rows {
                    v_t.row(j).transpose()
                } else {
                    // complete the basis when v_t is thin
                    let mut c = nalgebra::DVector::zeros(d);
                    c[j] = 1.0;
                    c
                }
            })
            .collect();
        let null = if cols.is_empty() { DMatrix::zeros(d, 0) } else { DMatrix::from_columns(&cols) };
        basis = &basis * null;
    }
    // stacked map and its singular values
    let mut stacked = DMatrix::zeros(symbol.l * dirs.len(), m);
    for (i, xi) in dirs.iter().enumerate() {
        let l = symbol.eval(xi);
        stacked.view_mut((i * symbol.l, 0), (symbol.l, m)).copy_from(&l);
    }
    let svals = stacked.clone().svd(false, false).singular_values;
    let smallest = svals.iter().copied().fold(f64::INFINITY, f64::min);
    if ambiguous {
        return Ok(CoCancelingReport {
            verdict: Verdict::Inconclusive,
            witness: None,
            left_inverse: None,
            smallest_singular_value: smallest,
        });
    }
    if basis.ncols() > 0 {
        let w = basis.column(0).normalize();
        return Ok(CoCancelingReport {
            verdict: Verdict::NotCoCanceling,
            witness: Some(w.iter().copied().collect()),
            left_inverse: None,
            smallest_singular_value: smallest,
        });
    }
    let gram = stacked.transpose() * &stacked;
    let left_inverse = gram.try_inverse().map(|g| g * stacked.transpose());
    Ok(CoCancelingReport { verdict: Verdict::CoCanceling, witness: None, left_inverse, smallest_singular_value: smallest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{divergence, make_field, FieldDescriptor};
    use crate::spaces::{norm_fn, SpaceSpec};

    #[test]
    fn riesz_of_zero() {
        let f = GriddedField::zeros(2, 8, 1.0, 1).unwrap();
        let out = riesz(&f, &RieszKernelSpec::new(1.0)).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn riesz_spectral_matches_direct() {
        let mut f = GriddedField::zeros(2, 16, 1.0, 1).unwrap();
        let i = 7 * 16 + 8;
        f.component_mut(0)[i] = 1.0;
        let a = riesz(&f, &RieszKernelSpec::new(1.0)).unwrap();
        let b = riesz(&f, &RieszKernelSpec::new(1.0).direct()).unwrap();
        let scale = b.max_abs();
        assert!(a.max_diff(&b).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn riesz_gaussian_center() {
        let side = 128;
        let h = 1.0 / side as f64;
        let sigma = 1.0 / 16.0;
        let c = (side / 2) as f64 * h + 0.5 * h;
        let desc = FieldDescriptor::Gaussian { sigma, center: Some(vec![c, c]), amplitude: 1.0 };
        let f = make_field(&desc, 2, side, 1.0).unwrap();
        let out = riesz(&f, &RieszKernelSpec::new(1.0)).unwrap();
        let mid = side / 2 * side + side / 2;
        // (1/2pi) int |x|^-1 exp(-|x|^2 / 2 sigma^2) dx, by radial quadrature
        let radial = quad::integrate(|r| (-r * r / (2.0 * sigma * sigma)).exp(), 0.0, 40.0 * sigma, 64);
        let v = out.component(0)[mid];
        assert!((v / radial - 1.0).abs() < 1e-3, "{v} {radial}");
        let row = &out.component(0)[mid..mid + side / 2];
        assert!(row.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn riesz_dilation() {
        let spec = RieszKernelSpec::new(1.0);
        let peak = |lambda: f64| {
            let c = 64.5 / 128.0;
            let desc = FieldDescriptor::ScaledBump { lambda, radius: 0.2, center: Some(vec![c, c]) };
            let f = make_field(&desc, 2, 128, 1.0).unwrap();
            riesz(&f, &spec).unwrap().max_abs()
        };
        // lambda^n g(lambda x) maps to lambda^(n - alpha) (I g)(lambda x)
        let r = peak(2.0) / peak(1.0);
        assert!((r / 2.0 - 1.0).abs() < 1e-2, "{r}");
    }

    #[test]
    fn singular_cell_weight() {
        // int over [-1/2, 1/2]^2 of 1/|x| = 4 ln(1 + sqrt 2)
        let w = cell_weight(&[0, 0], 1.0, 1.0);
        assert!((w - 4.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-12, "{w}");
        // far and near rules agree on a cell at distance 3
        let far = cell_weight(&[3, 0], 1.0, 1.0);
        let s = -1.0;
        let mut near = 0.0;
        for axis in 0..2 {
            for sign in [-1.0, 1.0] {
                let c = ([3.0, 0.0][axis] + 0.5 * sign) * 1.0;
                near += sign * c * face_integral(&[3, 0], axis, c, 1.0, s);
            }
        }
        assert!((far / near - 1.0).abs() < 1e-4);
    }

    #[test]
    fn riesz_gamma_two_d() {
        assert!((RieszKernelSpec::new(1.0).gamma(2) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn riesz_is_linear() {
        let f = make_field(&FieldDescriptor::ScaledBump { lambda: 1.0, radius: 0.1, center: None }, 2, 32, 1.0).unwrap();
        let spec = RieszKernelSpec::new(1.0);
        let a = riesz(&f.scale(2.0), &spec).unwrap();
        let b = riesz(&f, &spec).unwrap().scale(2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn riesz_rejects_wide_support() {
        let f = make_field(&FieldDescriptor::RandomCells { seed: 1, components: 1 }, 2, 16, 1.0).unwrap();
        assert!(matches!(riesz(&f, &RieszKernelSpec::new(1.0)), Err(Error::Support(_))));
        assert!(matches!(riesz(&f, &RieszKernelSpec::new(2.5)), Err(Error::Admissibility(_))));
    }

    #[test]
    fn hardy_indicator() {
        let f = Profile::indicator(1.0, 1.0, f64::INFINITY).unwrap();
        let h = hardy(&f, 2, 1.0).unwrap();
        for s in [0.01, 0.25, 0.5, 0.99] {
            assert!((h.eval(s) - 2.0 * (1.0 - s.sqrt())).abs() < 1e-14);
        }
        assert_eq!(h.eval(1.5), 0.0);
    }

    #[test]
    fn hardy_constant_is_exact() {
        let f = Profile::new(vec![0.3, 1.0, 2.5], vec![5.0, 2.0, 0.5], f64::INFINITY).unwrap();
        let h = hardy(&f, 2, 1.0).unwrap();
        let lhs = norm_fn(&SpaceSpec::lorentz_star(2.0, 1.0), &h).unwrap();
        let l1 = f.integral_to(f64::INFINITY);
        assert!((lhs / l1 - 2.0).abs() < 1e-12, "{}", lhs / l1);
    }

    #[test]
    fn hardy_zero_and_divergent() {
        let z = hardy(&Profile::zero(f64::INFINITY), 2, 1.0).unwrap();
        assert_eq!(z.eval(0.3), 0.0);
        let tail = crate::rearrange::PowerLog::new(1.0, -0.2, 0.0);
        let f = Profile::with_parts(vec![1.0], vec![1.0], f64::INFINITY, None, Some(tail)).unwrap();
        assert!(hardy(&f, 2, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn hardy_duality() {
        let f = Profile::new(vec![0.5, 2.0], vec![3.0, 1.0], f64::INFINITY).unwrap();
        let g = Profile::new(vec![0.2, 1.0, 4.0], vec![2.0, 1.5, 0.25], f64::INFINITY).unwrap();
        let lhs = pairing_fn(&hardy(&f, 2, 1.0).unwrap(), &g.to_fn());
        let rhs = pairing_fn(&f.to_fn(), &hardy_dual(&g, 2, 1.0).unwrap());
        assert!((lhs / rhs - 1.0).abs() < 1e-9, "{lhs} {rhs}");
    }

    #[test]
    fn projection_laws() {
        let psi = make_field(&FieldDescriptor::RandomModes { seed: 5, modes: 4, components: 1 }, 2, 32, 1.0).unwrap();
        let curl = crate::grid::curl_of_stream(&psi).unwrap();
        assert!(project(&curl).unwrap().max_diff(&curl).unwrap() < 1e-10);
        let grad = crate::grid::gradient(&psi).unwrap();
        assert!(project(&grad).unwrap().max_abs() < 1e-10);
        assert!(helmholtz(&grad).unwrap().max_diff(&grad.scale(-1.0)).unwrap() < 1e-10);
        let r = make_field(&FieldDescriptor::RandomModes { seed: 9, modes: 5, components: 2 }, 2, 32, 1.0).unwrap();
        let p = project(&r).unwrap();
        assert!(project(&p).unwrap().max_diff(&p).unwrap() < 1e-10);
        assert!(divergence(&p).unwrap().max_abs() < 1e-10);
        // self-adjoint on the grid inner product
        let q = make_field(&FieldDescriptor::RandomModes { seed: 10, modes: 5, components: 2 }, 2, 32, 1.0).unwrap();
        let a = project(&r).unwrap().dot(&q).unwrap();
        let b = r.dot(&project(&q).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn projection_rejects_mean() {
        let f = GriddedField::new(2, 4, 1.0, 2, vec![1.0; 32]).unwrap();
        assert!(matches!(helmholtz(&f), Err(Error::NonzeroMean(_))));
    }

    #[test]
    fn project_k_second_order() {
        let r = make_field(&FieldDescriptor::RandomModes { seed: 2, modes: 4, components: 3 }, 2, 32, 1.0).unwrap();
        let p = project_k(&r, 2).unwrap();
        assert!(crate::grid::div_k(&p, 2).unwrap().max_abs() < 1e-9);
        assert!(project_k(&p, 2).unwrap().max_diff(&p).unwrap() < 1e-10);
    }

    #[test]
    fn cocanceling_examples() {
        for n in [2, 3] {
            let r = cocanceling_check(&SymbolMap::divergence(n), 16).unwrap();
            assert_eq!(r.verdict, Verdict::CoCanceling);
            assert!(r.left_inverse.is_some());
            assert_eq!(cocanceling_check(&SymbolMap::curl(n), 16).unwrap().verdict, Verdict::CoCanceling);
        }
        let bad = SymbolMap::new(
            2,
            2,
            2,
            vec![
                SymbolTerm { beta: vec![1, 0], matrix: vec![vec![1.0, 0.0], vec![0.0, 0.0]] },
                SymbolTerm { beta: vec![0, 1], matrix: vec![vec![0.0, 0.0], vec![1.0, 0.0]] },
            ],
        )
        .unwrap();
        let r = cocanceling_check(&bad, 16).unwrap();
        assert_eq!(r.verdict, Verdict::NotCoCanceling);
        let w = r.witness.unwrap();
        assert!(w[0].abs() < 1e-12 && (w[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn order_zero_rejected() {
        let id = SymbolMap::new(2, 2, 2, vec![SymbolTerm { beta: vec![0, 0], matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]] }]);
        assert!(matches!(id, Err(Error::Admissibility(_))));
    }
}
