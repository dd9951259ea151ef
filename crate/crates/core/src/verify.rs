//! Inequality sweeps over profile and field families, with trend
//! classification and JSON/CSV reports.

use crate::error::{invalid, Error, Result};
use crate::grid::{make_divfree_family, make_unconstrained_family, FamilyConfig, GriddedField};
use crate::interpolation::divergence_tolerance;
use crate::operators::{hardy, hardy_dual, riesz, RieszKernelSpec};
use crate::quad;
use crate::rearrange::{decreasing_rearrangement, PiecewiseFn, Profile};
use crate::spaces::{norm, norm_fn, SpaceSpec};
use crate::young::{conv0_holds, convinf_holds, hat_construction, sobolev_conjugate, TableOptions, YoungFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Bounded,
    Divergent,
    Inconclusive,
}

/// Minimum number of levels and log-log slope for a divergent verdict.
pub const DIVERGENT_LEVELS: usize = 3;
pub const DIVERGENT_SLOPE: f64 = 0.2;
/// Window and max/min factor for a bounded verdict.
pub const BOUNDED_WINDOW: usize = 3;
pub const BOUNDED_FACTOR: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub level: f64,
    #[serde(with = "crate::spaces::ext_real")]
    pub norm_x: f64,
    #[serde(with = "crate::spaces::ext_real")]
    pub norm_y: f64,
    #[serde(with = "crate::spaces::ext_real")]
    pub ratio: f64,
}

impl Row {
    pub fn new(label: impl Into<String>, level: f64, norm_x: f64, norm_y: f64) -> Self {
        let ratio = if norm_y == 0.0 { 0.0 } else { norm_y / norm_x };
        Self { label: label.into(), level, norm_x, norm_y, ratio }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub rows: Vec<Row>,
    pub trend: Trend,
    /// Least-squares slope of `ln ratio` against `ln level`.
    pub slope: f64,
    /// `max ratio`.
    #[serde(with = "crate::spaces::ext_real")]
    pub constant: f64,
    #[serde(default)]
    pub expected: Option<Trend>,
}

fn fit_slope(rows: &[Row]) -> f64 {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.level > 0.0 && r.ratio > 0.0 && r.ratio.is_finite()).map(|r| (r.level.ln(), r.ratio.ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx
}

/// `max/min` of the ratios over the last `window` rows.
pub fn window_factor(rows: &[Row], window: usize) -> f64 {
    let tail = &rows[rows.len().saturating_sub(window)..];
    let max = tail.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let min = tail.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else {
        max / min
    }
}

/// Divergent: strictly increasing over at least 3 levels with slope above
/// 0.2; bounded: `max/min <= 3` over the last 3 levels.
pub fn classify(rows: &[Row]) -> (Trend, f64) {
    let slope = fit_slope(rows);
    let increasing = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    if rows.len() >= DIVERGENT_LEVELS && increasing && (slope > DIVERGENT_SLOPE || rows.last().is_some_and(|r| r.ratio.is_infinite())) {
        return (Trend::Divergent, slope);
    }
    if !rows.is_empty() && rows.iter().all(|r| r.ratio.is_finite()) && window_factor(rows, BOUNDED_WINDOW) <= BOUNDED_FACTOR {
        return (Trend::Bounded, slope);
    }
    (Trend::Inconclusive, slope)
}

impl InequalityReport {
    pub fn new(id: impl Into<String>, rows: Vec<Row>, expected: Option<Trend>) -> Self {
        let (trend, slope) = classify(&rows);
        let constant = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        Self { id: id.into(), rows, trend, slope, constant, expected }
    }

    pub fn matches_expected(&self) -> bool {
        self.expected.is_none_or(|e| e == self.trend)
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,norm_X,norm_Y,ratio\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.level, r.norm_x, r.norm_y, r.ratio);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyOp {
    #[default]
    Forward,
    Dual,
}

/// One labelled profile of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub label: String,
    pub level: f64,
    pub profile: Profile,
}

/// `||H f||_Y / ||f||_X` over a profile family, for the Hardy operator or
/// its dual. The dual output is not monotone; its norm is taken on the
/// running average, a lower bound for the rearranged one.
pub fn check_hardy_pair(x: &SpaceSpec, y: &SpaceSpec, family: &[Member], n: usize, alpha: f64, op: HardyOp) -> Result<InequalityReport> {
    let rows = family
        .par_iter()
        .map(|m| {
            let nx = norm(x, &m.profile)?;
            let out = match op {
                HardyOp::Forward => hardy(&m.profile, n, alpha)?,
                HardyOp::Dual => hardy_dual(&m.profile, n, alpha)?,
            };
            let ny = if out.is_infinite() { f64::INFINITY } else { norm_fn(y, &out)? };
            Ok(Row::new(m.label.clone(), m.level, nx, ny))
        })
        .collect::<Result<Vec<_>>>()?;
    let id = match op {
        HardyOp::Forward => "hardy",
        HardyOp::Dual => "hardy_dual",
    };
    Ok(InequalityReport::new(id, rows, None))
}

/// `||I_alpha F||_Y / ||F||_X` over the concentrating family, divergence-free
/// or not.
pub fn check_constrained_riesz(
    x: &SpaceSpec,
    y: &SpaceSpec,
    constrained: bool,
    alpha: f64,
    levels: &[f64],
    cfg: &FamilyConfig,
) -> Result<InequalityReport> {
    let family = if constrained { make_divfree_family(levels, cfg)? } else { make_unconstrained_family(levels, cfg)? };
    let (id, expected) = if constrained { ("riesz_divfree", Trend::Bounded) } else { ("riesz_unconstrained", Trend::Divergent) };
    check_riesz_fields(x, y, &family, levels, alpha, id, Some(expected))
}

/// `||I_alpha F||_Y / ||F||_X` over explicit fields, one level each.
pub fn check_riesz_fields(
    x: &SpaceSpec,
    y: &SpaceSpec,
    fields: &[GriddedField],
    levels: &[f64],
    alpha: f64,
    id: &str,
    expected: Option<Trend>,
) -> Result<InequalityReport> {
    if fields.len() != levels.len() {
        return invalid("one level per field");
    }
    let spec = RieszKernelSpec::new(alpha);
    let rows = fields
        .par_iter()
        .zip(levels.par_iter())
        .map(|(f, &l)| {
            let g = riesz(f, &spec)?;
            let nx = norm(x, &decreasing_rearrangement(f))?;
            let ny = norm(y, &decreasing_rearrangement(&g))?;
            Ok(Row::new(format!("lambda={l}"), l, nx, ny))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::new(id, rows, expected))
}

/// `int_0^t s^(-theta) g`, exactly on power pieces.
fn weighted_primitive(g: &PiecewiseFn, theta: f64, t: f64) -> f64 {
    g.times_power(-theta).integral_to(t)
}

/// Both sides of the rearrangement estimate at each `t`.
pub fn rearrangement_sides(f: &GriddedField, alpha: f64, t_grid: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let n = f.n();
    let d = crate::grid::divergence(f)?.max_abs();
    if d > divergence_tolerance(f) {
        return Err(Error::Invalid(format!("field is not divergence-free: |div F| = {d:.3e}")));
    }
    let theta = alpha / n as f64;
    let fs = decreasing_rearrangement(f);
    let g = riesz(f, &RieszKernelSpec::new(alpha))?;
    let gs = decreasing_rearrangement(&g).to_fn();
    let h = hardy(&fs, n, alpha)?;
    Ok(t_grid.iter().map(|&t| (t, weighted_primitive(&gs, theta, t), weighted_primitive(&h, theta, t))).collect())
}

/// Geometric `t` grid from one cell to the whole box.
pub fn default_t_grid(f: &GriddedField, points: usize) -> Vec<f64> {
    let (lo, hi) = (f.cell_measure(), f.volume());
    (0..points).map(|k| lo * (hi / lo).powf(k as f64 / (points - 1).max(1) as f64)).collect()
}

/// Max over `t` of LHS/RHS of the rearrangement estimate, one row per member.
pub fn check_rearrangement_estimate(family: &[GriddedField], levels: &[f64], alpha: f64, t_points: usize) -> Result<InequalityReport> {
    if family.len() != levels.len() {
        return invalid("one level per family member");
    }
    let rows = family
        .par_iter()
        .zip(levels.par_iter())
        .map(|(f, &l)| {
            let sides = rearrangement_sides(f, alpha, &default_t_grid(f, t_points))?;
            let mut best = Row::new(format!("lambda={l}"), l, 0.0, 0.0);
            for (_, lhs, rhs) in sides {
                if rhs > 0.0 && lhs / rhs > best.ratio {
                    best = Row::new(format!("lambda={l}"), l, rhs, lhs);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::new("rearrangement_estimate", rows, Some(Trend::Bounded)))
}

/// The blow-up profile `f(s) = s^-1 (log 1/s)^-gamma`, kept on
/// `(0, e^-u0)` where it and `s^(theta-1) int_0^s f` are decreasing.
#[derive(Clone, Copy, Debug)]
pub struct LzProfile {
    pub gamma: f64,
    pub theta: f64,
    pub u0: f64,
}

impl LzProfile {
    pub fn new(gamma: f64, n: usize, alpha: f64) -> Self {
        let theta = alpha / n as f64;
        Self { gamma, theta, u0: gamma.max((gamma - 1.0) / (1.0 - theta)) }
    }

    pub fn f(&self, u: f64) -> f64 {
        if u < self.u0 {
            0.0
        } else {
            u.exp() * u.powf(-self.gamma)
        }
    }

    /// `int_0^s f` at `s = e^-u`.
    pub fn primitive(&self, u: f64) -> f64 {
        u.max(self.u0).powf(1.0 - self.gamma) / (self.gamma - 1.0)
    }

    /// `int_0^s sigma^(theta-1) int_0^sigma f` at `s = e^-u`.
    pub fn dual_primitive(&self, u: f64) -> f64 {
        let tail = |v: f64| quad::ln_exp_power_tail(self.theta, 1.0 - self.gamma, v).map_or(f64::INFINITY, f64::exp) / (self.gamma - 1.0);
        if u >= self.u0 {
            tail(u)
        } else {
            let f0 = self.primitive(self.u0);
            tail(self.u0) + f0 * ((-self.theta * u).exp() - (-self.theta * self.u0).exp()) / self.theta
        }
    }

    /// Staircase of `min(f, f(eps))` on `(0, 1)`, `per_unit` steps per unit of `log 1/s`.
    pub fn truncated(&self, eps: f64, per_unit: usize) -> Result<Profile> {
        let big_u = (1.0 / eps).ln();
        if big_u <= self.u0 {
            return invalid("eps must lie below the support end of the profile");
        }
        let steps = ((big_u - self.u0) * per_unit as f64).ceil() as usize;
        let du = (big_u - self.u0) / steps as f64;
        let mut bps = vec![eps];
        let mut vals = vec![self.f(big_u)];
        for k in 0..steps {
            let (hi, lo) = (big_u - k as f64 * du, big_u - (k + 1) as f64 * du);
            bps.push((-lo).exp());
            vals.push(self.f(0.5 * (hi + lo)).min(self.f(big_u)));
        }
        vals.iter_mut().fold(f64::INFINITY, |m, v| {
            *v = v.min(m);
            *v
        });
        Profile::new(bps, vals, 1.0)
    }
}

/// Both sides of the Lorentz-Zygmund blow-up on `(eps, 1)`, integrated in
/// `u = log 1/s` with `per_unit` Gauss panels per unit of `u`.
pub fn lz_sides(p: &LzProfile, q: f64, r: f64, eps: f64, per_unit: usize) -> (f64, f64) {
    let big_u = (1.0 / eps).ln();
    let l2 = 2f64.ln();
    let lhs = |u: f64| (p.dual_primitive(u) * (p.theta * u).exp() * (l2 + u).powf(r + 1.0)).powf(q);
    let rhs = |u: f64| (p.primitive(u) * (l2 + u).powf(r)).powf(q);
    let mut cuts = vec![0.0];
    if p.u0 < big_u {
        cuts.push(p.u0);
    }
    cuts.push(big_u);
    let mut out = (0.0, 0.0);
    for w in cuts.windows(2) {
        let panels = (((w[1] - w[0]) * per_unit as f64).ceil() as usize).max(1);
        out.0 += quad::integrate(lhs, w[0], w[1], panels);
        out.1 += quad::integrate(rhs, w[0], w[1], panels);
    }
    out
}

/// Admissible range `1 + r + 1/q < gamma < 2 + r + 1/q`.
pub fn lz_gamma_range(q: f64, r: f64) -> (f64, f64) {
    (1.0 + r + 1.0 / q, 2.0 + r + 1.0 / q)
}

/// Truncated sides of the Lorentz-Zygmund counterexample, one row per `eps`
/// with level `log 1/eps`, `norm_x` the right side and `norm_y` the left.
pub fn run_counterexample_lz(
    n: usize,
    alpha: f64,
    q: f64,
    r: f64,
    gamma: f64,
    eps_list: &[f64],
    per_unit: usize,
) -> Result<InequalityReport> {
    if !(alpha > 0.0 && alpha < n as f64) {
        return Err(Error::Admissibility(format!("alpha = {alpha} must lie in (0, {n})")));
    }
    if !(q >= 1.0 && q.is_finite() && r > -1.0 / q) {
        return invalid("need q in [1, inf) and r > -1/q");
    }
    let (lo, hi) = lz_gamma_range(q, r);
    if !(gamma > lo && gamma < hi) {
        return Err(Error::Admissibility(format!(
            "gamma = {gamma} must satisfy 1 + r + 1/q < gamma < 2 + r + 1/q, i.e. lie in ({lo}, {hi})"
        )));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) || eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return invalid("eps values must lie in (0, 1) and decrease");
    }
    let p = LzProfile::new(gamma, n, alpha);
    let rows = eps_list
        .iter()
        .map(|&e| {
            let (lhs, rhs) = lz_sides(&p, q, r, e, per_unit);
            Row::new(format!("eps={e:e}"), (1.0 / e).ln(), rhs, lhs)
        })
        .collect();
    Ok(InequalityReport::new("counterexample_lz", rows, Some(Trend::Divergent)))
}

/// Orlicz potential estimates over the divergence-free family: into
/// `L^{A_{n/alpha}}`, into `L(A-hat, n/alpha)`, and into `L^inf` when the
/// tail condition holds. On a finite measure the head of `A` is made linear.
pub fn check_orlicz_theorem(
    a: &YoungFunction,
    alpha: f64,
    finite_measure: bool,
    levels: &[f64],
    cfg: &FamilyConfig,
) -> Result<Vec<InequalityReport>> {
    let n = cfg.n;
    a.validate()?;
    let base = if conv0_holds(a, n, alpha) {
        a.clone()
    } else if finite_measure {
        a.clone().linear_head(1.0)
    } else {
        return Err(Error::Gate("A violates the integrability condition near zero; use a finite measure".into()));
    };
    let opts = TableOptions::default();
    let conj = sobolev_conjugate(&base, n, alpha, &opts)?;
    let hat = hat_construction(&base, n, alpha, &opts)?;
    let x = SpaceSpec::orlicz(a.clone());
    let mut targets = vec![("orlicz", SpaceSpec::orlicz(conj)), ("orlicz_lorentz", SpaceSpec::orlicz_lorentz(hat, n as f64 / alpha))];
    if convinf_holds(&base, n, alpha) {
        targets.push(("linf", SpaceSpec::lebesgue(f64::INFINITY)));
    }
    let family = make_divfree_family(levels, cfg)?;
    let spec = RieszKernelSpec::new(alpha);
    let pairs = family
        .par_iter()
        .map(|f| Ok((decreasing_rearrangement(f), decreasing_rearrangement(&riesz(f, &spec)?))))
        .collect::<Result<Vec<_>>>()?;
    targets
        .into_iter()
        .map(|(id, y)| {
            let rows = pairs
                .par_iter()
                .zip(levels.par_iter())
                .map(|((fs, gs), &l)| Ok(Row::new(format!("lambda={l}"), l, norm(&x, fs)?, norm(&y, gs)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(InequalityReport::new(id, rows, Some(Trend::Bounded)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Variant;

    fn row(level: f64, ratio: f64) -> Row {
        Row::new("", level, 1.0, ratio)
    }

    #[test]
    fn trend_rules() {
        let up: Vec<Row> = [1.0, 2.0, 4.0, 8.0].iter().map(|&l| row(l, l)).collect();
        assert_eq!(classify(&up).0, Trend::Divergent);
        let flat: Vec<Row> = [1.0, 2.0, 4.0, 8.0].iter().map(|&l| row(l, 1.0 + 0.01 * l)).collect();
        assert_eq!(classify(&flat).0, Trend::Bounded);
        let wild = vec![row(1.0, 1.0), row(2.0, 10.0), row(4.0, 0.5)];
        assert_eq!(classify(&wild).0, Trend::Inconclusive);
    }

    #[test]
    fn csv_and_json() {
        let r = InequalityReport::new("x", vec![row(1.0, 2.0), Row::new("", 2.0, 1.0, f64::INFINITY)], None);
        assert_eq!(r.to_csv(), "level,norm_X,norm_Y,ratio\n1,1,2,2\n2,1,inf,inf\n");
        let back: InequalityReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn hardy_pair_constant() {
        let fam: Vec<Member> = (1..6)
            .map(|k| {
                let p = Profile::new(vec![0.5, k as f64], vec![2.0, 1.0 / k as f64], f64::INFINITY).unwrap();
                Member { label: format!("{k}"), level: k as f64, profile: p }
            })
            .collect();
        let r = check_hardy_pair(&SpaceSpec::lebesgue(1.0), &SpaceSpec::lorentz_star(2.0, 1.0), &fam, 2, 1.0, HardyOp::Forward).unwrap();
        assert!(r.rows.iter().all(|x| (x.ratio - 2.0).abs() < 1e-9));
        assert_eq!(r.trend, Trend::Bounded);
    }

    #[test]
    fn lz_hardy_pairs() {
        let g = LzProfile::new(2.5, 2, 1.0);
        let fam: Vec<Member> = [1e-2f64, 1e-4, 1e-8, 1e-16]
            .iter()
            .map(|&e| Member { label: format!("{e:e}"), level: (1.0 / e).ln(), profile: g.truncated(e, 8).unwrap() })
            .collect();
        let x = SpaceSpec::lorentz_zygmund(1.0, 1.0, 1.0, Variant::Star).on(1.0);
        let y = SpaceSpec::lorentz_zygmund(2.0, 1.0, 1.0, Variant::Star).on(1.0);
        let ym = SpaceSpec::lorentz_zygmund(2.0, 1.0, 1.0, Variant::Maximal).on(1.0);
        let fwd = check_hardy_pair(&x, &y, &fam, 2, 1.0, HardyOp::Forward).unwrap();
        assert_eq!(fwd.trend, Trend::Bounded, "{:?}", fwd.ratios());
        let dual = check_hardy_pair(&x, &ym, &fam, 2, 1.0, HardyOp::Dual).unwrap();
        assert_eq!(dual.trend, Trend::Divergent, "{:?}", dual.ratios());
    }

    #[test]
    fn lz_counterexample() {
        let eps = [1e-2, 1e-4, 1e-8];
        let r = run_counterexample_lz(2, 1.0, 1.0, 0.0, 2.5, &eps, 4).unwrap();
        assert_eq!(r.trend, Trend::Divergent);
        let fine = run_counterexample_lz(2, 1.0, 1.0, 0.0, 2.5, &eps, 8).unwrap();
        for (a, b) in r.rows.iter().zip(&fine.rows) {
            assert!((a.norm_y / b.norm_y - 1.0).abs() < 1e-2 && (a.norm_x / b.norm_x - 1.0).abs() < 1e-2);
        }
        assert_eq!(fine.trend, r.trend);
        assert!(matches!(run_counterexample_lz(2, 1.0, 1.0, 0.0, 1.5, &eps, 4), Err(Error::Admissibility(_))));
    }

    #[test]
    fn lz_maximal_function_closed_form() {
        let g = LzProfile::new(2.5, 2, 1.0);
        let s: f64 = 1e-4;
        let u = (1.0 / s).ln();
        // int_0^s f = int_u^inf v^-gamma dv, by quadrature in log v
        let numeric = quad::improper(&|w: f64| -2.5 * (u + w).ln(), 0.0);
        let closed = u.powf(1.0 - 2.5) / 1.5;
        assert!((numeric / closed - 1.0).abs() < 1e-2);
        assert!((g.primitive(u) / s / (closed / s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rearrangement_estimate_zero() {
        let f = GriddedField::zeros(2, 16, 1.0, 2).unwrap();
        let sides = rearrangement_sides(&f, 1.0, &[0.1, 0.5]).unwrap();
        assert!(sides.iter().all(|s| s.1 == 0.0 && s.2 == 0.0));
    }
}
