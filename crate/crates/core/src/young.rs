//! Young functions in log coordinates: evaluation, density, inversion, the
//! Sobolev conjugate `A_{n/alpha}`, the hat construction and equivalence
//! tests near zero and near infinity.
//!
//! Every form is evaluated as `ln A` as a function of `u = ln t`, which keeps
//! tables spanning hundreds of decades (and conjugates that are exponentially
//! small near zero) representable.

use crate::error::{invalid, Error, Result};
use crate::quad::{self, ln_add};
use serde::{Deserialize, Serialize};

/// Asymptotic law `t^p |ln t|^r` at one end of a table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asym {
    pub p: f64,
    #[serde(default)]
    pub r: f64,
}

/// `ln A` sampled on increasing `ln t` nodes with exact log-log slopes,
/// interpolated by cubic Hermite and continued by the `head`/`tail` laws.
/// When `jump` is set, `A = inf` for `ln t > jump`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub ln_t: Vec<f64>,
    pub ln_a: Vec<f64>,
    pub slope: Vec<f64>,
    pub head: Asym,
    pub tail: Asym,
    #[serde(default)]
    pub jump: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Map {
    /// `A(c t)`.
    Dilate { c: f64 },
    /// `c A(t)`.
    Multiply { c: f64 },
    /// `A(t0) t / t0` below `t0`, `A` above.
    LinearHead { t0: f64 },
}

fn default_b() -> f64 {
    3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum YoungFunction {
    /// `t^p (ln(b + t))^r (ln ln(b + t))^rho`.
    PowerLogLoglog {
        p: f64,
        #[serde(default)]
        r: f64,
        #[serde(default)]
        rho: f64,
        #[serde(default = "default_b")]
        b: f64,
    },
    Tabulated(Table),
    Composed {
        base: Box<YoungFunction>,
        map: Map,
    },
}

/// `ln(b + e^u)` without overflow.
fn ln_shift(b: f64, u: f64) -> f64 {
    let lb = b.ln();
    if u > lb {
        u + (b * (-u).exp()).ln_1p()
    } else {
        lb + (u - lb).exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * d1
}

fn hermite_slope(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    ((6.0 * s2 - 6.0 * s) * y0 + (6.0 * s - 6.0 * s2) * y1) / h + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (3.0 * s2 - 2.0 * s) * d1
}

impl Table {
    fn locate(&self, u: f64) -> usize {
        self.ln_t.partition_point(|&x| x <= u).clamp(1, self.ln_t.len() - 1) - 1
    }

    /// `ln A(u) - p u`, cancellation-free outside the tabulated range.
    fn ln_eval_minus(&self, u: f64, p: f64) -> f64 {
        let last = self.ln_t.len() - 1;
        let (u0, ul) = (self.ln_t[0], self.ln_t[last]);
        if u < u0 {
            let mut v = self.ln_a[0] - p * u0 + (self.head.p - p) * (u - u0);
            if self.head.r != 0.0 && u0 < 0.0 {
                v += self.head.r * ((-u).ln() - (-u0).ln());
            }
            return v;
        }
        if u > ul {
            if self.jump.is_some() {
                return f64::INFINITY;
            }
            let mut v = self.ln_a[last] - p * ul + (self.tail.p - p) * (u - ul);
            if self.tail.r != 0.0 && ul > 0.0 {
                v += self.tail.r * (u.ln() - ul.ln());
            }
            return v;
        }
        let i = self.locate(u);
        hermite(self.ln_t[i], self.ln_t[i + 1], self.ln_a[i], self.ln_a[i + 1], self.slope[i], self.slope[i + 1], u) - p * u
    }

    fn ln_slope(&self, u: f64) -> f64 {
        let last = self.ln_t.len() - 1;
        if u < self.ln_t[0] {
            return self.head.p + if self.head.r != 0.0 && self.ln_t[0] < 0.0 { self.head.r / u } else { 0.0 };
        }
        if u > self.ln_t[last] {
            if self.jump.is_some() {
                return f64::INFINITY;
            }
            return self.tail.p + if self.tail.r != 0.0 && u > 0.0 { self.tail.r / u } else { 0.0 };
        }
        let i = self.locate(u);
        hermite_slope(self.ln_t[i], self.ln_t[i + 1], self.ln_a[i], self.ln_a[i + 1], self.slope[i], self.slope[i + 1], u)
    }
}

impl YoungFunction {
    pub fn power(p: f64) -> Self {
        YoungFunction::PowerLogLoglog { p, r: 0.0, rho: 0.0, b: default_b() }
    }

    pub fn power_log(p: f64, r: f64, b: f64) -> Self {
        YoungFunction::PowerLogLoglog { p, r, rho: 0.0, b }
    }

    pub fn power_log_loglog(p: f64, r: f64, rho: f64, b: f64) -> Self {
        YoungFunction::PowerLogLoglog { p, r, rho, b }
    }

    pub fn dilate(self, c: f64) -> Self {
        YoungFunction::Composed { base: Box::new(self), map: Map::Dilate { c } }
    }

    pub fn multiply(self, c: f64) -> Self {
        YoungFunction::Composed { base: Box::new(self), map: Map::Multiply { c } }
    }

    pub fn linear_head(self, t0: f64) -> Self {
        YoungFunction::Composed { base: Box::new(self), map: Map::LinearHead { t0 } }
    }

    /// Tabulates `u -> (ln A, d ln A / d u)` on `[ln lo, ln hi]`.
    pub fn tabulate<F: Fn(f64) -> (f64, f64)>(f: F, lo: f64, hi: f64, per_decade: usize, head: Asym, tail: Asym) -> Self {
        let (a, b) = (lo.ln(), hi.ln());
        let count = (((b - a) / std::f64::consts::LN_10) * per_decade as f64).ceil() as usize + 1;
        let du = (b - a) / (count - 1) as f64;
        let mut t = Table { ln_t: vec![], ln_a: vec![], slope: vec![], head, tail, jump: None };
        for k in 0..count {
            let u = a + k as f64 * du;
            let (la, s) = f(u);
            t.ln_t.push(u);
            t.ln_a.push(la);
            t.slope.push(s);
        }
        YoungFunction::Tabulated(t)
    }

    /// `ln A(e^u)`; `-inf` for `A = 0`, `+inf` for `A = inf`.
    pub fn ln_eval(&self, u: f64) -> f64 {
        self.ln_eval_minus(u, 0.0)
    }

    /// `ln A(e^u) - p u`, evaluated without cancellation for huge `|u|`.
    pub fn ln_eval_minus(&self, u: f64, p: f64) -> f64 {
        match self {
            YoungFunction::PowerLogLoglog { p: q, r, rho, b } => {
                if u == f64::NEG_INFINITY {
                    return if *q > p { f64::NEG_INFINITY } else { 0.0 };
                }
                let mut v = (q - p) * u;
                if *r != 0.0 || *rho != 0.0 {
                    let l1 = ln_shift(*b, u);
                    if *r != 0.0 {
                        v += r * l1.ln();
                    }
                    if *rho != 0.0 {
                        v += rho * l1.ln().ln();
                    }
                }
                v
            }
            YoungFunction::Tabulated(t) => t.ln_eval_minus(u, p),
            YoungFunction::Composed { base, map } => match map {
                Map::Dilate { c } => base.ln_eval_minus(u + c.ln(), p) + p * c.ln(),
                Map::Multiply { c } => c.ln() + base.ln_eval_minus(u, p),
                Map::LinearHead { t0 } => {
                    let l0 = t0.ln();
                    if u < l0 {
                        base.ln_eval(l0) - l0 + (1.0 - p) * u
                    } else {
                        base.ln_eval_minus(u, p)
                    }
                }
            },
        }
    }

    /// Elasticity `d ln A / d ln t`, i.e. `t a(t) / A(t)`.
    pub fn ln_slope(&self, u: f64) -> f64 {
        match self {
            YoungFunction::PowerLogLoglog { p, r, rho, b } => {
                let mut s = *p;
                if *r != 0.0 || *rho != 0.0 {
                    let l1 = ln_shift(*b, u);
                    let q = sigmoid(u - b.ln());
                    s += r * q / l1;
                    if *rho != 0.0 {
                        s += rho * q / (l1 * l1.ln());
                    }
                }
                s
            }
            YoungFunction::Tabulated(t) => t.ln_slope(u),
            YoungFunction::Composed { base, map } => match map {
                Map::Dilate { c } => base.ln_slope(u + c.ln()),
                Map::Multiply { .. } => base.ln_slope(u),
                Map::LinearHead { t0 } => {
                    if u < t0.ln() {
                        1.0
                    } else {
                        base.ln_slope(u)
                    }
                }
            },
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.ln_eval(t.ln()).exp()
    }

    /// Right density `a(t)`; the sampled derivative of `A`.
    pub fn density(&self, t: f64) -> f64 {
        let t = t.max(f64::MIN_POSITIVE);
        let u = t.ln();
        (self.ln_eval(u) - u).exp() * self.ln_slope(u)
    }

    /// Smallest `t` with `A(t) >= y`, by bisection in `ln t`; for `y` above
    /// the finite range of `A` this is the jump point.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let ly = y.ln();
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        while self.ln_eval(lo) >= ly && lo > -1e6 {
            lo *= 2.0;
        }
        while self.ln_eval(hi) < ly && hi < 1e6 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.ln_eval(mid) < ly {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        (0.5 * (lo + hi)).exp()
    }

    /// Exponents `(p0, r0)` with `A ~ t^p0 (ln 1/t)^r0` as t -> 0.
    pub fn head_exponents(&self) -> Asym {
        match self {
            YoungFunction::PowerLogLoglog { p, .. } => Asym { p: *p, r: 0.0 },
            YoungFunction::Tabulated(t) => t.head,
            YoungFunction::Composed { base, map } => match map {
                Map::LinearHead { .. } => Asym { p: 1.0, r: 0.0 },
                _ => base.head_exponents(),
            },
        }
    }

    /// Exponents `(p, r)` with `A ~ t^p (ln t)^r` as t -> inf; `p = inf`
    /// when `A` jumps to infinity.
    pub fn tail_exponents(&self) -> Asym {
        match self {
            YoungFunction::PowerLogLoglog { p, r, .. } => Asym { p: *p, r: *r },
            YoungFunction::Tabulated(t) => {
                if t.jump.is_some() {
                    Asym { p: f64::INFINITY, r: 0.0 }
                } else {
                    t.tail
                }
            }
            YoungFunction::Composed { base, .. } => base.tail_exponents(),
        }
    }

    /// `ln t` locations where the density jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            YoungFunction::Composed { base, map } => {
                let mut k = base.kinks();
                match map {
                    Map::Dilate { c } => k.iter_mut().for_each(|x| *x -= c.ln()),
                    Map::LinearHead { t0 } => {
                        k.retain(|&x| x > t0.ln());
                        k.push(t0.ln());
                    }
                    Map::Multiply { .. } => {}
                }
                k
            }
            _ => vec![],
        }
    }

    /// The jump point `ln t` beyond which `A = inf`, if any.
    pub fn jump(&self) -> Option<f64> {
        match self {
            YoungFunction::Tabulated(t) => t.jump,
            YoungFunction::Composed { base, map: Map::Dilate { c } } => base.jump().map(|j| j - c.ln()),
            YoungFunction::Composed { base, .. } => base.jump(),
            _ => None,
        }
    }

    /// Checks that sampled difference quotients of `A` are non-decreasing
    /// within the relative slack on `[lo, hi]`.
    pub fn check_convex(&self, lo: f64, hi: f64, per_decade: usize, slack: f64) -> Result<()> {
        let (a, b) = (lo.ln(), hi.ln());
        let count = (((b - a) / std::f64::consts::LN_10) * per_decade as f64).ceil() as usize + 1;
        let du = (b - a) / (count - 1) as f64;
        let mut prev = f64::NEG_INFINITY;
        let mut last = self.ln_eval(a);
        for k in 1..count {
            let u = a + k as f64 * du;
            let cur = self.ln_eval(u);
            if cur.is_infinite() {
                break;
            }
            // ln of (A(t_k) - A(t_{k-1})) / (t_k - t_{k-1})
            let diff = cur + (-(last - cur).exp()).ln_1p();
            let dt = u + (-(-du).exp()).ln_1p();
            let q = diff - dt;
            if q < prev + (1.0 - slack).ln() {
                return Err(Error::Invalid(format!("difference quotient decreases near t = {:.3e}", u.exp())));
            }
            prev = q;
            last = cur;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            YoungFunction::PowerLogLoglog { p, r, rho, b } => {
                if !(*p >= 1.0) {
                    return invalid("power_log_loglog needs p >= 1");
                }
                if *r != 0.0 && !(*b > 1.0) {
                    return invalid("log factor needs b > 1");
                }
                if *rho != 0.0 && !(*b > std::f64::consts::E) {
                    return invalid("log-log factor needs b > e");
                }
            }
            YoungFunction::Tabulated(t) => {
                let m = t.ln_t.len();
                if m < 2 || t.ln_a.len() != m || t.slope.len() != m {
                    return invalid("table columns must have equal length >= 2");
                }
                if t.ln_t.windows(2).any(|w| w[1] <= w[0]) {
                    return invalid("table nodes must increase");
                }
            }
            YoungFunction::Composed { base, map } => {
                let c = match map {
                    Map::Dilate { c } | Map::Multiply { c } => *c,
                    Map::LinearHead { t0 } => *t0,
                };
                if !(c > 0.0 && c.is_finite()) {
                    return invalid("composition parameter must be positive");
                }
                base.validate()?;
            }
        }
        self.check_convex(1e-8, 1e8, 20, 1e-10)
    }
}

/// Range and density of generated tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { t_min: 1e-8, t_max: 1e8, per_decade: 200 }
    }
}

const UNIFORM: f64 = 1600.0;
const CAP: f64 = 1e18;

fn next_step(v: f64) -> f64 {
    if v.abs() < UNIFORM {
        0.05
    } else {
        0.01 * v.abs()
    }
}

/// Cumulative `ln G` on nodes for `G(v) = int_{-inf}^v e^{lf}`.
struct Cumulative {
    v: Vec<f64>,
    lng: Vec<f64>,
    lf_at: Vec<f64>,
    converged: bool,
}

impl Cumulative {
    fn deriv(&self, i: usize) -> f64 {
        (self.lf_at[i] - self.lng[i]).exp()
    }

    fn eval(&self, v: f64) -> f64 {
        let i = self.v.partition_point(|&x| x <= v).clamp(1, self.v.len() - 1) - 1;
        hermite(self.v[i], self.v[i + 1], self.lng[i], self.lng[i + 1], self.deriv(i), self.deriv(i + 1), v)
    }
}

/// `(t / A(t))^beta` integrated from 0, with the left end resolved either to
/// negligible remainder or to `|v| = 1e18` plus a local power tail.
fn cumulative(lf: &dyn Fn(f64) -> f64, left_need: f64, right_need: &dyn Fn(f64) -> bool) -> Result<Cumulative> {
    let mut left = vec![0.0];
    let mut panels = vec![];
    let mut top = f64::NEG_INFINITY;
    let mut v = 0.0_f64;
    loop {
        let nv = v - next_step(v);
        let pnl = quad::ln_integrate(lf, nv, v, 1);
        top = top.max(pnl);
        left.push(nv);
        panels.push(pnl);
        v = nv;
        if -v >= CAP || (-v >= left_need && pnl < top - 60.0) {
            break;
        }
    }
    let w = -v;
    let dl = 1e-3;
    let kappa = -(lf(-w * (1.0 + dl)) - lf(-w * (1.0 - dl))) / ((1.0 + dl).ln() - (1.0 - dl).ln());
    if !(kappa > 1.0) {
        return Err(Error::Gate(format!("(t/A(t))^beta is not integrable near 0: local decay exponent {kappa:.4} at ln t = {v:.3e}")));
    }
    let tail = lf(v) + w.ln() - (kappa - 1.0).ln();
    // cumulate from the far left
    let mut vs: Vec<f64> = left.iter().rev().copied().collect();
    let mut lng = vec![tail];
    for pnl in panels.iter().rev() {
        let prev = *lng.last().unwrap();
        lng.push(ln_add(prev, *pnl));
    }
    let mut converged = false;
    let mut v = 0.0_f64;
    loop {
        let nv = v + next_step(v);
        let pnl = quad::ln_integrate(lf, v, nv, 1);
        let prev = *lng.last().unwrap();
        let cur = ln_add(prev, pnl);
        vs.push(nv);
        lng.push(cur);
        v = nv;
        if right_need(cur) {
            break;
        }
        if v > 50.0 && pnl < cur - 60.0 {
            let s = next_step(v);
            if lf(v + s) < lf(v) {
                converged = true;
                break;
            }
        }
        if v >= CAP {
            let dl = 1e-3;
            let kappa = -(lf(v * (1.0 + dl)) - lf(v * (1.0 - dl))) / ((1.0 + dl).ln() - (1.0 - dl).ln());
            if kappa > 1.0 {
                let t = lf(v) + v.ln() - (kappa - 1.0).ln();
                *lng.last_mut().unwrap() = ln_add(cur, t);
                converged = true;
            }
            break;
        }
    }
    let lf_at = vs.iter().map(|&x| lf(x)).collect();
    Ok(Cumulative { v: vs, lng, lf_at, converged })
}

fn gate_integrable(k: f64, b: f64) -> bool {
    k > 1e-12 || (k.abs() <= 1e-12 && b < -1.0)
}

/// Checks `int_0 (t / A(t))^(alpha/(n-alpha)) dt < inf` from the head law.
pub fn conv0_holds(a: &YoungFunction, n: usize, alpha: f64) -> bool {
    let beta = alpha / (n as f64 - alpha);
    let h = a.head_exponents();
    gate_integrable(1.0 + beta - beta * h.p, -beta * h.r)
}

/// Checks `int^inf (t / A(t))^(alpha/(n-alpha)) dt < inf` from the tail law.
pub fn convinf_holds(a: &YoungFunction, n: usize, alpha: f64) -> bool {
    let beta = alpha / (n as f64 - alpha);
    let t = a.tail_exponents();
    if t.p.is_infinite() {
        return true;
    }
    gate_integrable(-(1.0 + beta - beta * t.p), -beta * t.r)
}

fn check_alpha(n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return invalid("alpha must lie in (0, n)");
    }
    Ok(nf)
}

/// `A_{n/alpha} = A o H^{-1}` with `H(t) = (int_0^t (s/A(s))^beta ds)^((n-alpha)/n)`.
pub fn sobolev_conjugate(a: &YoungFunction, n: usize, alpha: f64, opts: &TableOptions) -> Result<YoungFunction> {
    let nf = check_alpha(n, alpha)?;
    let beta = alpha / (nf - alpha);
    let head = a.head_exponents();
    let k0 = 1.0 + beta - beta * head.p;
    if !gate_integrable(k0, -beta * head.r) {
        return Err(Error::Gate(format!(
            "int_0 (t/A)^beta diverges: head exponents p0 = {}, r0 = {} give exponent {} (modify A near 0)",
            head.p, head.r, k0
        )));
    }
    let tail = a.tail_exponents();
    let p_inf = if tail.p.is_finite() { tail.p } else { head.p };
    let lf = |v: f64| {
        if v < 0.0 {
            k0 * v - beta * a.ln_eval_minus(v, head.p)
        } else {
            (1.0 + beta - beta * p_inf) * v - beta * a.ln_eval_minus(v, p_inf)
        }
    };
    let g = (nf - alpha) / nf;
    let (umin, umax) = (opts.t_min.ln(), opts.t_max.ln());
    let mut need = 2.0 * umin.abs() + 60.0;
    let cum = loop {
        let c = cumulative(&lf, need, &|lng| g * lng > umax + 1.0)?;
        if g * c.lng[0] <= umin || -c.v[0] >= CAP {
            break c;
        }
        need *= 4.0;
    };
    let du = std::f64::consts::LN_10 / opts.per_decade as f64;
    let steps = ((umax - umin) / du).round() as usize;
    let mut t =
        Table { ln_t: vec![], ln_a: vec![], slope: vec![], head: Asym { p: 1.0, r: 0.0 }, tail: Asym { p: 1.0, r: 0.0 }, jump: None };
    let lnh_first = g * cum.lng[0];
    let last = cum.v.len() - 1;
    let lnh_last = g * cum.lng[last];
    for j in 0..=steps {
        let u = umin + j as f64 * du;
        if u < lnh_first {
            continue;
        }
        if u >= lnh_last {
            break;
        }
        let y = u / g;
        let i = cum.lng.partition_point(|&x| x <= y).clamp(1, last) - 1;
        let (mut lo, mut hi) = (cum.v[i], cum.v[i + 1]);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if cum.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * mid.abs().max(1.0) {
                break;
            }
        }
        let v = 0.5 * (lo + hi);
        let dlng = (lf(v) - cum.eval(v)).exp();
        t.ln_t.push(u);
        t.ln_a.push(a.ln_eval(v));
        t.slope.push(a.ln_slope(v) / (g * dlng));
    }
    if t.ln_t.len() < 2 {
        return Err(Error::Invalid("conjugate table is empty on the requested range".into()));
    }
    t.head = Asym { p: t.slope[0], r: 0.0 };
    t.tail = Asym { p: *t.slope.last().unwrap(), r: 0.0 };
    if cum.converged {
        t.jump = Some(lnh_last);
    }
    Ok(YoungFunction::Tabulated(t))
}

/// Closed form of the conjugate of `t^p` for `p < n/alpha`:
/// `exp(p/e) t^(np/(n - alpha p))` with `e = (n - alpha p)/(n - alpha)` entering as `e^(p/e)`.
pub fn power_conjugate_closed_form(p: f64, n: usize, alpha: f64, t: f64) -> f64 {
    let nf = n as f64;
    let e = (nf - alpha * p) / (nf - alpha);
    e.powf(p / e) * t.powf(nf * p / (nf - alpha * p))
}

/// `A-hat` with `a-hat^{-1}(a(w)) = O(w)^(-beta)`, where
/// `O(w) = int_w^inf I(t)^(-n/alpha) a(t)^(-n/(n-alpha)) dt` and
/// `I(t) = int_0^t a^(-beta)`; `a^{-1}` is the left-continuous inverse.
pub fn hat_construction(a: &YoungFunction, n: usize, alpha: f64, opts: &TableOptions) -> Result<YoungFunction> {
    let nf = check_alpha(n, alpha)?;
    let beta = alpha / (nf - alpha);
    let head = a.head_exponents();
    if !(1.0 - beta * (head.p - 1.0) > 1e-12) {
        return Err(Error::Gate(format!("int_0 a^(-beta) diverges for head exponent p0 = {} >= n/alpha (modify A near 0)", head.p)));
    }
    let la = |y: f64| a.ln_eval(y) - y + a.ln_slope(y).ln();
    let ii = |y: f64| y - beta * la(y);
    let (umin, umax) = (opts.t_min.ln(), opts.t_max.ln());
    let (mut ylo, mut yhi) = (umin - 40.0, umax + 40.0);
    let h = 0.05;
    let kink = a.kinks().first().copied();
    for _attempt in 0..6 {
        // put a density jump on a node so no panel straddles it
        if let Some(k) = kink {
            ylo = k - ((k - ylo) / h).ceil() * h;
        }
        let m = ((yhi - ylo) / h).ceil() as usize;
        let ys: Vec<f64> = (0..=m).map(|k| ylo + k as f64 * h).collect();
        // inner integral, local power head at ylo
        let kappa_i = (ii(ylo + 1e-4) - ii(ylo - 1e-4)) / 2e-4;
        if !(kappa_i > 0.0) {
            return Err(Error::Gate(format!("inner integral diverges at 0: local exponent {kappa_i:.4}")));
        }
        let mut lni = vec![ii(ylo) - kappa_i.ln()];
        for k in 0..m {
            let pnl = quad::ln_integrate(&ii, ys[k], ys[k + 1], 1);
            lni.push(ln_add(lni[k], pnl));
        }
        let ii_at: Vec<f64> = ys.iter().map(|&y| ii(y)).collect();
        let lni_eval = |y: f64| {
            let k = (((y - ylo) / h).floor() as usize).min(m - 1);
            let d0 = (ii_at[k] - lni[k]).exp();
            let d1 = (ii_at[k + 1] - lni[k + 1]).exp();
            hermite(ys[k], ys[k + 1], lni[k], lni[k + 1], d0, d1, y)
        };
        let oo = |y: f64| y - (nf / alpha) * lni_eval(y) - (nf / (nf - alpha)) * la(y);
        let oo_at: Vec<f64> = ys.iter().map(|&y| oo(y)).collect();
        let kappa_o = -(oo(yhi - 1e-4) - oo(yhi - 3e-4)) / 2e-4;
        if !(kappa_o > 0.0) {
            return Err(Error::Divergent(format!(
                "outer integral diverges at infinity: integrand grows like t^{:.4} near t = {:.3e}",
                -kappa_o - 1.0,
                yhi.exp()
            )));
        }
        let mut lno = vec![0.0; m + 1];
        lno[m] = oo_at[m] - kappa_o.ln();
        for k in (0..m).rev() {
            let pnl = quad::ln_integrate(&oo, ys[k], ys[k + 1], 1);
            lno[k] = ln_add(lno[k + 1], pnl);
        }
        let lno_eval = |y: f64| {
            let k = (((y - ylo) / h).floor() as usize).min(m - 1);
            let d0 = -(oo_at[k] - lno[k]).exp();
            let d1 = -(oo_at[k + 1] - lno[k + 1]).exp();
            hermite(ys[k], ys[k + 1], lno[k], lno[k + 1], d0, d1, y)
        };
        let ln_s: Vec<f64> = lno.iter().map(|o| -beta * o).collect();
        if ln_s[0] > umin || ln_s[m] < umax {
            let grow = 0.5 * (yhi - ylo);
            if ln_s[0] > umin {
                ylo -= grow;
            }
            if ln_s[m] < umax {
                yhi += grow;
            }
            continue;
        }
        // A-hat(s) = s a-hat(s) - J(s) with J = int s da; J vanishes where a is
        // constant, so linear stretches of A stay exactly linear
        let dla = |y: f64| ((la(y + 1e-6) - la(y - 1e-6)) / 2e-6).max(0.0);
        let dj = |y: f64| -beta * lno_eval(y) + la(y) + dla(y).ln();
        let dlns = beta * (oo_at[0] - lno[0]).exp();
        let kap = dla(ylo) / dlns;
        let mut lnj = vec![ln_s[0] + la(ylo) + (kap / (kap + 1.0)).ln()];
        let kink_node = kink.map(|k| ((k - ylo) / h).round() as usize);
        for k in 0..m {
            let mut pnl = quad::ln_integrate(&dj, ys[k], ys[k + 1], 1);
            if kink_node == Some(k + 1) {
                let y = ys[k + 1];
                let (hi, lo) = (la(y + 1e-9), la(y - 1e-9));
                if hi > lo {
                    pnl = ln_add(pnl, ln_s[k + 1] + hi + (-(lo - hi).exp()).ln_1p());
                }
            }
            lnj.push(ln_add(lnj[k], pnl));
        }
        let lnah: Vec<f64> = (0..=m)
            .map(|k| {
                let top = ln_s[k] + la(ys[k] + if kink_node == Some(k) { 1e-9 } else { 0.0 });
                top + (-(lnj[k] - top).exp()).ln_1p()
            })
            .collect();
        let slope: Vec<f64> = (0..=m).map(|k| (ln_s[k] + la(ys[k]) - lnah[k]).exp()).collect();
        // left limits differ from `slope` only at a density jump
        let slope_left: Vec<f64> = (0..=m).map(|k| (ln_s[k] + la(ys[k] - 1e-9) - lnah[k]).exp()).collect();
        // resample onto the uniform ln s grid
        let du = std::f64::consts::LN_10 / opts.per_decade as f64;
        let steps = ((umax - umin) / du).round() as usize;
        let mut t =
            Table { ln_t: vec![], ln_a: vec![], slope: vec![], head: Asym { p: 1.0, r: 0.0 }, tail: Asym { p: 1.0, r: 0.0 }, jump: None };
        for j in 0..=steps {
            let u = umin + j as f64 * du;
            let k = ln_s.partition_point(|&x| x <= u).clamp(1, m) - 1;
            let (x0, x1) = (ln_s[k], ln_s[k + 1]);
            t.ln_t.push(u);
            t.ln_a.push(hermite(x0, x1, lnah[k], lnah[k + 1], slope[k], slope_left[k + 1], u));
            t.slope.push(hermite_slope(x0, x1, lnah[k], lnah[k + 1], slope[k], slope_left[k + 1], u));
        }
        t.head = Asym { p: t.slope[0], r: 0.0 };
        t.tail = Asym { p: *t.slope.last().unwrap(), r: 0.0 };
        return Ok(YoungFunction::Tabulated(t));
    }
    Err(Error::Invalid("hat construction could not cover the requested range".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NearZero,
    NearInfinity,
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub constant: Option<f64>,
}

/// Smallest `c = 2^(k/16)`, `k <= 320`, with `A(t/c) <= B(t) <= A(c t)` on
/// the regime's sample grid: split point t = 1, sampled out to `1e-40` and
/// `1e40` so that growth gaps wider than the largest `c` are resolved.
pub fn equivalent(a: &YoungFunction, b: &YoungFunction, regime: Regime) -> Equivalence {
    let (lo, hi) = match regime {
        Regime::NearZero => (-40.0, 0.0),
        Regime::NearInfinity => (0.0, 40.0),
        Regime::Global => (-40.0, 40.0),
    };
    let per_decade = 20;
    let count = ((hi - lo) * per_decade as f64) as usize;
    let us: Vec<f64> = (0..=count).map(|k| (lo + (hi - lo) * k as f64 / count as f64) * std::f64::consts::LN_10).collect();
    let lb: Vec<f64> = us.iter().map(|&u| b.ln_eval(u)).collect();
    let le = |x: f64, y: f64| x <= y + 1e-12 * (1.0 + y.abs()) || y == f64::INFINITY;
    for k in 0..=320 {
        let lc = k as f64 / 16.0 * std::f64::consts::LN_2;
        let ok = us.iter().zip(&lb).all(|(&u, &bv)| le(a.ln_eval(u - lc), bv) && le(bv, a.ln_eval(u + lc)));
        if ok {
            return Equivalence { equivalent: true, constant: Some(2f64.powf(k as f64 / 16.0)) };
        }
    }
    Equivalence { equivalent: false, constant: None }
}

/// Least-squares fit of `ln A = P L + R ln L + C + D ln L / L + E / L` with
/// `L = |ln t|` over `L in [l_lo, l_hi]`, on the side of `regime`. Returns
/// `(P, R)` with `A ~ t^P |ln t|^R`.
pub fn fit_power_log(a: &YoungFunction, regime: Regime, l_lo: f64, l_hi: f64) -> (f64, f64) {
    let sign = if regime == Regime::NearZero { -1.0 } else { 1.0 };
    let m = 400;
    let mut cols = vec![Vec::with_capacity(m); 5];
    let mut y = Vec::with_capacity(m);
    for k in 0..m {
        let l = l_lo * (l_hi / l_lo).powf(k as f64 / (m - 1) as f64);
        let ll = l.ln();
        cols[0].push(l);
        cols[1].push(ll);
        cols[2].push(1.0);
        cols[3].push(ll / l);
        cols[4].push(1.0 / l);
        y.push(a.ln_eval(sign * l));
    }
    let c = quad::least_squares(&cols, &y);
    (sign * c[0], c[1])
}

/// Slope of `ln(-ln A)` against `ln t` on `[t_lo, t_hi]` (exponential regime).
pub fn fit_exponential_regime(a: &YoungFunction, t_lo: f64, t_hi: f64) -> f64 {
    let m = 200;
    let mut x = Vec::with_capacity(m);
    let mut y = Vec::with_capacity(m);
    for k in 0..m {
        let u = t_lo.ln() + (t_hi / t_lo).ln() * k as f64 / (m - 1) as f64;
        x.push(u);
        y.push((-a.ln_eval(u)).ln());
    }
    let c = quad::least_squares(&[x, vec![1.0; m]], &y);
    c[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_inverse() {
        let a = YoungFunction::power(2.0);
        assert!((a.inverse(4.0) - 2.0).abs() < 1e-12);
        assert!((a.eval(3.0) - 9.0).abs() < 1e-12);
        let a = YoungFunction::power(1.0);
        for t in [1e-3, 0.5, 7.0] {
            assert!((a.density(t) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn density_matches_finite_difference() {
        let a = YoungFunction::power_log(1.0, 1.0, 3.0);
        for t in [0.01, 0.3, 1.0, 5.0, 200.0] {
            let direct = t * (3.0 + t as f64).ln();
            assert!((a.eval(t) / direct - 1.0).abs() < 1e-13);
            let h = 1e-6 * t;
            let fd = (a.eval(t + h) - a.eval(t - h)) / (2.0 * h);
            assert!((a.density(t) / fd - 1.0).abs() < 1e-6, "{t}");
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let a = YoungFunction::power_log_loglog(1.5, 1.0, 0.5, 20.0);
        for t in [1e-5, 0.1, 3.0, 1e4] {
            assert!((a.inverse(a.eval(t)) / t - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn validate_rejects_nonconvex() {
        assert!(YoungFunction::power(0.5).validate().is_err());
        assert!(YoungFunction::power_log(1.0, -1.0, 3.0).validate().is_err());
        assert!(YoungFunction::power_log(1.0, 1.0, 3.0).validate().is_ok());
    }

    #[test]
    fn conjugate_of_power_closed_form() {
        let a = YoungFunction::power(1.0);
        let c = sobolev_conjugate(&a, 2, 1.0, &TableOptions::default()).unwrap();
        for k in -12..=12 {
            let t = 10f64.powf(k as f64 * 0.5);
            let want = power_conjugate_closed_form(1.0, 2, 1.0, t);
            assert!((c.eval(t) / want - 1.0).abs() < 1e-6, "{t} {} {want}", c.eval(t));
        }
    }

    #[test]
    fn conjugate_gate() {
        // t^2 with n = 2, alpha = 1: (t/A)^1 = 1/t is not integrable at 0
        assert!(matches!(sobolev_conjugate(&YoungFunction::power(2.0), 2, 1.0, &TableOptions::default()), Err(Error::Gate(_))));
        assert!(conv0_holds(&YoungFunction::power(2.0).linear_head(1.0), 2, 1.0));
        assert!(convinf_holds(&YoungFunction::power(3.0), 2, 1.0));
        assert!(!convinf_holds(&YoungFunction::power_log(1.0, 1.0, 3.0), 2, 1.0));
    }

    #[test]
    fn hat_of_power() {
        let a = YoungFunction::power(1.5);
        let h = hat_construction(&a, 2, 1.0, &TableOptions { t_min: 1e-4, t_max: 1e4, per_decade: 50 }).unwrap();
        let (p, _) = fit_power_log(&h, Regime::NearInfinity, 2.0, 9.0);
        assert!((p - 1.5).abs() < 0.015, "{p}");
        let eq = equivalent(&a, &h, Regime::Global);
        assert!(eq.equivalent, "{eq:?}");
    }

    #[test]
    fn equivalence_examples() {
        let a = YoungFunction::power(2.0);
        assert_eq!(equivalent(&a, &a, Regime::Global), Equivalence { equivalent: true, constant: Some(1.0) });
        let b = YoungFunction::power(2.0).multiply(3.0);
        let e = equivalent(&a, &b, Regime::Global);
        assert_eq!(e.constant, Some(2f64.powf(13.0 / 16.0)));
        let c = YoungFunction::power(3.0);
        assert!(!equivalent(&a, &c, Regime::NearInfinity).equivalent);
    }

    #[test]
    fn convexity_of_conjugate() {
        let a = YoungFunction::power_log(1.0, 1.0, 3.0);
        let c = sobolev_conjugate(&a, 2, 1.0, &TableOptions::default()).unwrap();
        c.check_convex(1e-6, 1e6, 20, 1e-8).unwrap();
    }

    #[test]
    fn json_form() {
        let a: YoungFunction = serde_json::from_str(r#"{"form":"power_log_loglog","p":1,"r":1,"rho":0,"b":3}"#).unwrap();
        assert_eq!(a, YoungFunction::power_log(1.0, 1.0, 3.0));
    }
}
