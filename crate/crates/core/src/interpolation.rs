//! K-functionals of interpolation couples: truncation search, the closed
//! form for `(L1, L^{p,q})`, and the Calderon-Zygmund splitting of fields.

use crate::error::{invalid, Error, Result};
use crate::grid::{divergence, unflatten, GriddedField};
use crate::operators::project;
use crate::rearrange::{decreasing_rearrangement, integral_of, PiecewiseFn, Profile, Shape};
use crate::spaces::{conjugate_exponent, norm, SpaceSpec};
use serde::{Deserialize, Serialize};

/// Supported couples `(Z0, Z1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "couple", rename_all = "snake_case")]
pub enum Couple {
    /// `(L1, L^inf)`.
    L1Linf,
    /// `(L1, L^{p,q})`.
    L1Lorentz { p: f64, q: f64 },
    /// `(L^{p,1}, L^inf)`, with `p = n/(n - alpha)` in the potential setting.
    LorentzLinf { p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KQuery {
    #[serde(flatten)]
    pub couple: Couple,
    pub t: f64,
}

impl KQuery {
    pub fn new(couple: Couple, t: f64) -> Result<Self> {
        let q = Self { couple, t };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return invalid("t must be positive and finite");
        }
        match self.couple {
            Couple::L1Linf => Ok(()),
            Couple::L1Lorentz { p, q } if p > 1.0 && p.is_finite() && q >= 1.0 => Ok(()),
            Couple::LorentzLinf { p } if p > 1.0 && p.is_finite() => Ok(()),
            _ => invalid("unsupported couple parameters"),
        }
    }
}

fn sup(f: &Profile) -> f64 {
    f.values().first().copied().unwrap_or(0.0)
}

fn l1(f: &Profile) -> f64 {
    f.integral_to(f64::INFINITY)
}

/// `norm(Z0, (f - lambda)_+) + t norm(Z1, min(f, lambda))`.
fn truncation_cost(f: &Profile, q: &KQuery, lambda: f64) -> Result<f64> {
    let (big, small) = (f.excess(lambda)?, f.truncate(lambda)?);
    Ok(match q.couple {
        Couple::L1Linf => l1(&big) + q.t * sup(&small),
        Couple::L1Lorentz { p, q: r } => l1(&big) + q.t * norm(&SpaceSpec::lorentz_star(p, r), &small)?,
        Couple::LorentzLinf { p } => norm(&SpaceSpec::lorentz_star(p, 1.0), &big)? + q.t * sup(&small),
    })
}

/// Minimum of the truncation cost over levels `lambda`: every value of `f`,
/// `f(t)`, a geometric refinement between values, then golden-section
/// polishing around the best candidate. Exact for `(L1, L^inf)`, an upper
/// bound for the other couples.
pub fn k_functional_bruteforce(f: &Profile, q: &KQuery) -> Result<f64> {
    q.validate()?;
    if !f.is_step() {
        return invalid("brute-force K needs a step profile");
    }
    let mut levels: Vec<f64> = f.values().to_vec();
    levels.push(0.0);
    levels.push(f.eval(q.t));
    let mut sorted = levels.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    for w in sorted.windows(2) {
        let (a, b) = (w[0].max(w[1] * 1e-6), w[1]);
        for k in 1..8 {
            levels.push(a * (b / a).powf(k as f64 / 8.0));
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let cost = |l: f64| truncation_cost(f, q, l);
    let mut best = (f64::INFINITY, 0);
    for (i, &l) in levels.iter().enumerate() {
        let c = cost(l)?;
        if c < best.0 {
            best = (c, i);
        }
    }
    if q.couple == Couple::L1Linf {
        return Ok(best.0);
    }
    let i = best.1;
    let (mut a, mut b) = (levels[i.saturating_sub(1)], levels[(i + 1).min(levels.len() - 1)]);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut value = best.0;
    for _ in 0..60 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        let (fc, fd) = (cost(c)?, cost(d)?);
        value = value.min(fc).min(fd);
        if fc < fd {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(value)
}

/// `int_T^inf s^(q/p - 1) f(s)^q ds` over the pieces of `g`.
fn weighted_tail(g: &PiecewiseFn, from: f64, p: f64, q: f64) -> f64 {
    let e = q / p;
    let mut acc = 0.0;
    for piece in &g.pieces {
        let (a, b) = (piece.lo.max(from), piece.hi);
        if b <= a {
            continue;
        }
        acc += match &piece.shape {
            Shape::Powers(t) if t.len() == 1 && t[0].1 == 0.0 => {
                let v = t[0].0;
                if v == 0.0 {
                    0.0
                } else if b.is_infinite() {
                    f64::INFINITY
                } else {
                    v.powf(q) * (b.powf(e) - a.powf(e)) / e
                }
            }
            shape => integral_of(&|s| s.powf(e - 1.0) * shape.eval(s).powf(q), a, b),
        };
    }
    acc
}

/// `int_0^T f* + t (int_T^inf s^(q/p - 1) f*^q)^(1/q)` with `T = t^p'`;
/// `q = inf` takes the supremum of `s^(1/p) f*(s)` over `s > T`.
pub fn holmstedt(f: &Profile, p: f64, q: f64, t: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite() && q >= 1.0) {
        return invalid("holmstedt needs p in (1, inf) and q in [1, inf]");
    }
    if !(t > 0.0 && t.is_finite()) {
        return invalid("t must be positive and finite");
    }
    let big_t = t.powf(conjugate_exponent(p));
    let head = f.integral_to(big_t);
    let g = f.to_fn();
    let tail = if q.is_infinite() {
        g.sup_with(&|s, v| if s > big_t { s.powf(1.0 / p) * v } else { 0.0 })
    } else {
        weighted_tail(&g, big_t, p, q).powf(1.0 / q)
    };
    Ok(head + t * tail)
}

/// One stopping cube: its lower corner, side in cells, and `F - mean_Q F`
/// on the cube, component-major in the cube's own lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct BadPart {
    pub origin: [usize; 3],
    pub size: usize,
    pub values: Vec<f64>,
    /// Measure of the cube.
    pub measure: f64,
}

impl BadPart {
    pub fn cells(&self, n: usize) -> usize {
        self.size.pow(n as u32)
    }

    pub fn component(&self, n: usize, c: usize) -> &[f64] {
        let m = self.cells(n);
        &self.values[c * m..(c + 1) * m]
    }
}

#[derive(Clone, Debug)]
pub struct CZDecomposition {
    pub level: f64,
    pub good: GriddedField,
    pub bad: Vec<BadPart>,
    pub total_bad_measure: f64,
    /// `|good| <= c_cz * level` everywhere; `2^n` for dyadic stopping.
    pub c_cz: f64,
}

impl CZDecomposition {
    /// `good + sum of bad parts`, on the original grid.
    pub fn reassemble(&self) -> GriddedField {
        let mut out = self.good.clone();
        for b in &self.bad {
            scatter_add(&mut out, b);
        }
        out
    }

    /// Sum of the bad parts on the original grid.
    pub fn bad_field(&self) -> GriddedField {
        let mut out = self.good.scale(0.0);
        for b in &self.bad {
            scatter_add(&mut out, b);
        }
        out
    }
}

fn cube_cells(origin: [usize; 3], size: usize, n: usize, side: usize) -> Vec<usize> {
    (0..size.pow(n as u32))
        .map(|i| {
            let local = unflatten(i, n, size);
            (0..n).fold(0, |acc, d| acc * side + origin[d] + local[d])
        })
        .collect()
}

fn scatter_add(out: &mut GriddedField, b: &BadPart) {
    let cells = cube_cells(b.origin, b.size, out.n(), out.side());
    for c in 0..out.components() {
        let src = b.component(out.n(), c);
        let dst = out.component_mut(c);
        for (k, &i) in cells.iter().enumerate() {
            dst[i] += src[k];
        }
    }
}

/// Dyadic stopping-time splitting at `level`: maximal cubes with mean `|F|`
/// above the level are bad, everything else is good.
pub fn cz_decompose(f: &GriddedField, level: f64) -> Result<CZDecomposition> {
    if !(level > 0.0 && level.is_finite()) {
        return invalid("level must be positive");
    }
    let (n, side) = (f.n(), f.side());
    if !side.is_power_of_two() {
        return invalid("the dyadic tree needs a power-of-two grid side");
    }
    let mag = f.magnitude();
    let mut stops = Vec::new();
    let mut stack = vec![([0usize; 3], side)];
    while let Some((origin, size)) = stack.pop() {
        let cells = cube_cells(origin, size, n, side);
        let mean = cells.iter().map(|&i| mag[i]).sum::<f64>() / cells.len() as f64;
        if mean > level {
            stops.push((origin, size, cells));
            continue;
        }
        if size == 1 {
            continue;
        }
        let half = size / 2;
        // children in reverse so that the traversal order is lexicographic
        for k in (0..1usize << n).rev() {
            let mut o = origin;
            for d in 0..n {
                if k >> (n - 1 - d) & 1 == 1 {
                    o[d] += half;
                }
            }
            stack.push((o, half));
        }
    }
    let mut good = f.clone();
    let h = f.spacing();
    let mut bad = Vec::with_capacity(stops.len());
    for (origin, size, cells) in stops {
        let mut data = Vec::with_capacity(cells.len() * f.components());
        for c in 0..f.components() {
            let src = f.component(c);
            let mean = cells.iter().map(|&i| src[i]).sum::<f64>() / cells.len() as f64;
            let dst = good.component_mut(c);
            for &i in &cells {
                let r = src[i] - mean;
                data.push(r);
                dst[i] = src[i] - r;
            }
        }
        let measure = (size as f64 * h).powi(n as i32);
        bad.push(BadPart { origin, size, values: data, measure });
    }
    let total_bad_measure = bad.iter().map(|b| b.measure).sum();
    Ok(CZDecomposition { level, good, bad, total_bad_measure, c_cz: (1u32 << n) as f64 })
}

/// `F = F0 + F1` with both parts divergence-free, for the couple
/// `(L1, L^{p,q})`, together with its cost and the closed-form K of `F*`.
#[derive(Clone, Debug)]
pub struct DivFreeSplit {
    pub f0: GriddedField,
    pub f1: GriddedField,
    pub level: f64,
    pub cost: f64,
    pub holmstedt: f64,
    /// `cost / holmstedt`.
    pub constant: f64,
}

/// Round-off floor of a spectral divergence: `eps |xi|_max max|F|`.
pub fn divergence_tolerance(f: &GriddedField) -> f64 {
    let nyquist = std::f64::consts::PI * f.side() as f64 / f.box_length();
    1e-10_f64.max(1e-15 * nyquist * f.max_abs())
}

/// Splits at the level `|F|_1 t^(-p')` and projects both parts with `P`.
pub fn divfree_decompose(f: &GriddedField, t: f64, p: f64, q: f64) -> Result<DivFreeSplit> {
    if f.components() != f.n() {
        return invalid("divfree_decompose needs a vector field");
    }
    if !(t > 0.0 && p > 1.0 && p.is_finite() && q >= 1.0) {
        return invalid("need t > 0, p in (1, inf), q >= 1");
    }
    let d = divergence(f)?.max_abs();
    if d > divergence_tolerance(f) {
        return Err(Error::Invalid(format!("field is not divergence-free: |div F| = {d:.3e}")));
    }
    let total = f.l1_norm();
    let profile = decreasing_rearrangement(f);
    let k = holmstedt(&profile, p, q, t)?;
    if total == 0.0 {
        let z = f.scale(0.0);
        return Ok(DivFreeSplit { f0: z.clone(), f1: z, level: 0.0, cost: 0.0, holmstedt: k, constant: 1.0 });
    }
    let level = total * t.powf(-conjugate_exponent(p));
    let cz = cz_decompose(f, level)?;
    let f0 = project(&cz.bad_field())?;
    let f1 = f.sub(&f0)?;
    let cost = f0.l1_norm() + t * norm(&SpaceSpec::lorentz_star(p, q), &decreasing_rearrangement(&f1))?;
    Ok(DivFreeSplit { f0, f1, level, cost, holmstedt: k, constant: cost / k })
}

/// Direction-preserving truncation `F = F (|F| - l)_+/|F| + F min(|F|, l)/|F|`
/// at `l = |F|*(t)`; returns its `(L1, L^inf)` cost.
pub fn vector_truncation_cost(f: &GriddedField, t: f64) -> Result<f64> {
    let profile = decreasing_rearrangement(f);
    let l = profile.eval(t);
    let mag = f.magnitude();
    let m = f.cell_measure();
    let mut big = 0.0;
    let mut top = 0.0_f64;
    for (i, &a) in mag.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let (s0, s1) = ((a - l).max(0.0) / a, a.min(l) / a);
        let (mut n0, mut n1) = (0.0, 0.0);
        for c in 0..f.components() {
            let v = f.component(c)[i];
            n0 += (v * s0).powi(2);
            n1 += (v * s1).powi(2);
        }
        big += n0.sqrt() * m;
        top = top.max(n1.sqrt());
    }
    Ok(big + t * top)
}
