//! Decreasing rearrangements and the one-dimensional function algebra used by
//! every norm: step profiles with analytic power-log heads and tails, and
//! piecewise functions built from them (maximal function, Hardy operators).

use crate::error::{invalid, Result};
use crate::grid::GriddedField;
use crate::quad;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// `coeff * s^power * |ln s|^log_power`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLog {
    pub coeff: f64,
    pub power: f64,
    #[serde(default)]
    pub log_power: f64,
}

impl PowerLog {
    pub fn new(coeff: f64, power: f64, log_power: f64) -> Self {
        Self { coeff, power, log_power }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if self.coeff == 0.0 {
            return 0.0;
        }
        let l = if self.log_power == 0.0 { 1.0 } else { s.ln().abs().powf(self.log_power) };
        self.coeff * s.powf(self.power) * l
    }

    /// Integral over (0, s) for s < 1.
    fn integral_from_zero(&self, s: f64) -> f64 {
        if self.coeff == 0.0 {
            return 0.0;
        }
        match quad::ln_exp_power_tail(self.power + 1.0, self.log_power, -s.ln()) {
            Some(l) => self.coeff * l.exp(),
            None => f64::INFINITY,
        }
    }

    /// Integral over (s, inf) for s > 1.
    fn integral_to_infinity(&self, s: f64) -> f64 {
        if self.coeff == 0.0 {
            return 0.0;
        }
        match quad::ln_exp_power_tail(-(self.power + 1.0), self.log_power, s.ln()) {
            Some(l) => self.coeff * l.exp(),
            None => f64::INFINITY,
        }
    }
}

/// Analytic head of a profile on `(0, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub law: PowerLog,
    pub end: f64,
}

/// Shape of a function on one piece.
#[derive(Clone)]
pub enum Shape {
    /// `sum c s^e` over `(c, e)` pairs.
    Powers(Vec<(f64, f64)>),
    Law(PowerLog),
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Powers(t) => write!(f, "Powers({t:?})"),
            Shape::Law(l) => write!(f, "Law({l:?})"),
            Shape::Func(_) => write!(f, "Func"),
        }
    }
}

impl Shape {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Shape::Powers(t) => t
                .iter()
                .map(|&(c, e)| {
                    if c == 0.0 {
                        0.0
                    } else if e == 0.0 {
                        c
                    } else {
                        c * s.powf(e)
                    }
                })
                .sum(),
            Shape::Law(l) => l.eval(s),
            Shape::Func(g) => g(s),
        }
    }

    pub fn constant(v: f64) -> Self {
        Shape::Powers(vec![(v, 0.0)])
    }
}

#[derive(Clone, Debug)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub shape: Shape,
}

impl Piece {
    /// Integral of the piece's function over `[a, b]`, a subinterval.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match &self.shape {
            Shape::Powers(terms) => terms.iter().map(|&(c, e)| power_integral(c, e, a, b)).sum(),
            Shape::Law(l) => {
                if a == 0.0 {
                    l.integral_from_zero(b)
                } else if b.is_infinite() {
                    l.integral_to_infinity(a)
                } else {
                    ln_grid_integral(&|s| l.eval(s), a, b)
                }
            }
            Shape::Func(g) => integral_of(&|s| g(s), a, b),
        }
    }
}

fn power_integral(c: f64, e: f64, a: f64, b: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let k = e + 1.0;
    if k == 0.0 {
        return c * (b / a).ln();
    }
    if (a == 0.0 && k < 0.0) || (b.is_infinite() && k > 0.0) {
        return c.signum() * f64::INFINITY;
    }
    c * (b.powf(k) - a.powf(k)) / k
}

/// GL in `ln s` on a bounded interval with `0 < a < b < inf`.
pub(crate) fn ln_grid_integral(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (la, lb) = (a.ln(), b.ln());
    let integrand = |v: f64| {
        let s = v.exp();
        g(s) * s
    };
    if lb - la < 0.05 {
        // narrow cells of grid profiles: 4 nodes already reach round-off
        return quad::integrate_rule(quad::gl4(), integrand, la, lb);
    }
    let panels = (((lb - la) / 0.5).ceil() as usize).clamp(1, 4000);
    quad::integrate(integrand, la, lb, panels)
}

/// Integral of a nonnegative function over `[a, b]`, where `a` may be 0 and
/// `b` may be infinite.
pub(crate) fn integral_of(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a == 0.0 && b.is_infinite() {
        return integral_of(g, 0.0, 1.0) + integral_of(g, 1.0, b);
    }
    if a == 0.0 {
        let lnh = |u: f64| {
            let s = b * (-u).exp();
            (g(s) * s).ln()
        };
        return quad::improper(&lnh, 0.0);
    }
    if b.is_infinite() {
        let lnh = |u: f64| {
            let s = a * u.exp();
            (g(s) * s).ln()
        };
        return quad::improper(&lnh, 0.0);
    }
    ln_grid_integral(g, a, b)
}

/// A function on `(0, L)` given piece by piece; pieces are ordered and cover
/// the domain. Used for `f*`, `f**` and Hardy-operator outputs.
#[derive(Clone, Debug)]
pub struct PiecewiseFn {
    pub pieces: Vec<Piece>,
    pub domain_length: f64,
}

impl PiecewiseFn {
    pub fn zero(domain_length: f64) -> Self {
        Self { pieces: vec![Piece { lo: 0.0, hi: domain_length, shape: Shape::constant(0.0) }], domain_length }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s >= self.domain_length || s < 0.0 {
            return 0.0;
        }
        let k = self.pieces.partition_point(|p| p.hi <= s);
        match self.pieces.get(k) {
            Some(p) => p.shape.eval(s),
            None => 0.0,
        }
    }

    /// `int_0^s g`, for every `s` given in increasing order.
    pub fn primitive(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.pieces.len() + 1);
        out.push(0.0);
        for p in &self.pieces {
            acc += p.integral(p.lo, p.hi);
            out.push(acc);
        }
        out
    }

    pub fn integral_to(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for p in &self.pieces {
            if p.lo >= s {
                break;
            }
            acc += p.integral(p.lo, p.hi.min(s));
        }
        acc
    }

    pub fn total_integral(&self) -> f64 {
        self.integral_to(f64::INFINITY)
    }

    /// The maximal function `s -> (1/s) int_0^s g`.
    pub fn double_star(&self) -> PiecewiseFn {
        let prefix = self.primitive();
        let mut pieces = Vec::with_capacity(self.pieces.len() + 1);
        for (k, p) in self.pieces.iter().enumerate() {
            let base = prefix[k];
            let shape = match &p.shape {
                _ if base.is_infinite() => Shape::constant(f64::INFINITY),
                Shape::Powers(terms) if terms.iter().all(|t| t.1 != -1.0) && (p.lo > 0.0 || terms.iter().all(|t| t.1 > -1.0)) => {
                    let mut out = Vec::with_capacity(terms.len() + 1);
                    let mut c0 = base;
                    for &(c, e) in terms {
                        let k1 = e + 1.0;
                        c0 -= if p.lo == 0.0 { 0.0 } else { c * p.lo.powf(k1) / k1 };
                        out.push((c / k1, e));
                    }
                    out.push((c0, -1.0));
                    Shape::Powers(out)
                }
                _ => {
                    let piece = p.clone();
                    Shape::Func(Arc::new(move |s| (base + piece.integral(piece.lo, s)) / s))
                }
            };
            pieces.push(Piece { lo: p.lo, hi: p.hi, shape });
        }
        if self.domain_length.is_finite() {
            // beyond L the average keeps decaying like 1/s
            let total = *prefix.last().unwrap_or(&0.0);
            pieces.push(Piece { lo: self.domain_length, hi: f64::INFINITY, shape: Shape::Powers(vec![(total, -1.0)]) });
        }
        PiecewiseFn { pieces, domain_length: f64::INFINITY }
    }

    /// `int_0^L h(s, g(s)) ds` for a nonnegative integrand `h`.
    pub fn integrate_with(&self, h: &dyn Fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for p in &self.pieces {
            let f = |s: f64| h(s, p.shape.eval(s));
            total += integral_of(&f, p.lo, p.hi);
            if total.is_infinite() {
                return total;
            }
        }
        total
    }

    /// Supremum over `(0, L)` of `h(s, g(s))`, by dense log sampling and a
    /// golden-section refinement around the best sample.
    pub fn sup_with(&self, h: &dyn Fn(f64, f64) -> f64) -> f64 {
        let mut best = 0.0_f64;
        for p in &self.pieces {
            let lo = if p.lo == 0.0 { (p.hi.min(1.0) * 1e-300).max(1e-300) } else { p.lo };
            let hi = if p.hi.is_infinite() { p.lo.max(1.0) * 1e300 } else { p.hi };
            let f = |v: f64| {
                let s = v.exp();
                let r = h(s, p.shape.eval(s));
                if r.is_nan() {
                    0.0
                } else {
                    r
                }
            };
            let (la, lb) = (lo.ln(), hi.ln());
            let samples = (((lb - la) / 0.05).ceil() as usize).clamp(8, 20000);
            let step = (lb - la) / samples as f64;
            let mut arg = la;
            let mut top = f64::NEG_INFINITY;
            for i in 0..=samples {
                // stay strictly inside the half-open piece at the right end
                let v = if i == samples { lb - 1e-12 * lb.abs().max(1.0) } else { la + i as f64 * step };
                let val = f(v);
                if val > top {
                    top = val;
                    arg = v;
                }
            }
            let (mut a, mut b) = ((arg - step).max(la), (arg + step).min(lb - 1e-12 * lb.abs().max(1.0)));
            let gr = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let c = b - gr * (b - a);
                let d = a + gr * (b - a);
                if f(c) > f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            best = best.max(top).max(f(0.5 * (a + b)));
            if best.is_infinite() {
                return best;
            }
        }
        best
    }

    /// Multiplies by `s^e`.
    pub fn times_power(&self, e: f64) -> PiecewiseFn {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let shape = match &p.shape {
                    Shape::Powers(t) => Shape::Powers(t.iter().map(|&(c, x)| (c, x + e)).collect()),
                    Shape::Law(l) => Shape::Law(PowerLog::new(l.coeff, l.power + e, l.log_power)),
                    Shape::Func(g) => {
                        let g = Arc::clone(g);
                        Shape::Func(Arc::new(move |s| g(s) * s.powf(e)))
                    }
                };
                Piece { lo: p.lo, hi: p.hi, shape }
            })
            .collect();
        PiecewiseFn { pieces, domain_length: self.domain_length }
    }

    pub fn is_infinite(&self) -> bool {
        self.pieces.iter().any(|p| matches!(&p.shape, Shape::Powers(t) if t.iter().any(|x| x.0.is_infinite())))
    }

    /// Interior and end points of every piece, for sampling.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.pieces.iter().flat_map(|p| [p.lo, p.hi]).filter(|s| s.is_finite() && *s > 0.0).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }
}

/// A non-increasing right-continuous function on `(0, L)`: an optional
/// analytic head on `(0, start)`, steps `values[j]` on
/// `[breakpoints[j-1], breakpoints[j])`, and an optional analytic tail after
/// the last breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(with = "crate::spaces::ext_real")]
    domain_length: f64,
    #[serde(default)]
    head: Option<Head>,
    #[serde(default)]
    tail: Option<PowerLog>,
}

impl Profile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, domain_length: f64) -> Result<Self> {
        Self::with_parts(breakpoints, values, domain_length, None, None)
    }

    pub fn with_parts(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        domain_length: f64,
        head: Option<Head>,
        tail: Option<PowerLog>,
    ) -> Result<Self> {
        let p = Self { breakpoints, values, domain_length, head, tail };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.domain_length > 0.0) {
            return invalid("domain length must be positive");
        }
        if self.breakpoints.len() != self.values.len() {
            return invalid("breakpoints and values differ in length");
        }
        let start = self.start();
        let mut prev = start;
        for &s in &self.breakpoints {
            if !(s > prev) || !s.is_finite() {
                return invalid("breakpoints must be finite and strictly increasing");
            }
            prev = s;
        }
        if prev > self.domain_length {
            return invalid("breakpoints exceed the domain length");
        }
        for w in self.values.windows(2) {
            if w[1] > w[0] {
                return invalid("values must be non-increasing");
            }
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid("values must be finite and nonnegative");
        }
        if let Some(h) = &self.head {
            let l = h.law;
            if !(h.end > 0.0) || l.coeff < 0.0 {
                return invalid("head needs a positive end and a nonnegative coefficient");
            }
            if l.log_power != 0.0 && h.end >= 1.0 {
                return invalid("a head with a log factor must end below 1");
            }
            let limit = if l.log_power < 0.0 { l.log_power / (-h.end.ln()) } else { 0.0 };
            if l.coeff > 0.0 && l.power > limit + 1e-12 {
                return invalid("head is not non-increasing on its interval");
            }
            if let Some(&v1) = self.values.first() {
                if l.eval(h.end) < v1 * (1.0 - 1e-12) {
                    return invalid("head ends below the first step");
                }
            }
        }
        if let Some(t) = &self.tail {
            if self.domain_length.is_finite() {
                return invalid("tails are only allowed on infinite domains");
            }
            let s0 = prev;
            if t.coeff < 0.0 || (t.log_power != 0.0 && s0 <= 1.0) {
                return invalid("a tail with a log factor must start above 1");
            }
            let limit = if t.log_power > 0.0 { -t.log_power / s0.ln() } else { 0.0 };
            if t.coeff > 0.0 && t.power > limit + 1e-12 {
                return invalid("tail is not non-increasing");
            }
            let last = self.values.last().copied().unwrap_or(f64::INFINITY);
            if t.eval(s0) > last * (1.0 + 1e-12) {
                return invalid("tail starts above the last step");
            }
        }
        Ok(())
    }

    /// Step profile from values and positive widths (sorted by the caller).
    pub fn from_widths(values: &[f64], widths: &[f64], domain_length: f64) -> Result<Self> {
        if values.len() != widths.len() {
            return invalid("values and widths differ in length");
        }
        let mut acc = 0.0;
        let bps = widths
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self::new(bps, values.to_vec(), domain_length)
    }

    /// `height * chi_(0, length)`.
    pub fn indicator(height: f64, length: f64, domain_length: f64) -> Result<Self> {
        Self::new(vec![length], vec![height], domain_length)
    }

    pub fn zero(domain_length: f64) -> Self {
        Self { breakpoints: vec![], values: vec![], domain_length, head: None, tail: None }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }
    pub fn head(&self) -> Option<&Head> {
        self.head.as_ref()
    }
    pub fn tail(&self) -> Option<&PowerLog> {
        self.tail.as_ref()
    }

    fn start(&self) -> f64 {
        self.head.map(|h| h.end).unwrap_or(0.0)
    }

    /// End of the stepped part (0 or the head end when there are no steps).
    pub fn support_end(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or_else(|| self.start())
    }

    pub fn is_step(&self) -> bool {
        self.head.is_none() && self.tail.is_none()
    }

    /// `f*(s)`, right-continuous.
    pub fn eval(&self, s: f64) -> f64 {
        if s < 0.0 || s >= self.domain_length {
            return 0.0;
        }
        if let Some(h) = &self.head {
            if s < h.end {
                return h.law.eval(s);
            }
        }
        let k = self.breakpoints.partition_point(|&b| b <= s);
        if k < self.values.len() {
            return self.values[k];
        }
        match &self.tail {
            Some(t) => t.eval(s),
            None => 0.0,
        }
    }

    pub fn to_fn(&self) -> PiecewiseFn {
        let mut pieces = Vec::new();
        let mut lo = 0.0;
        if let Some(h) = &self.head {
            pieces.push(Piece { lo: 0.0, hi: h.end, shape: Shape::Law(h.law) });
            lo = h.end;
        }
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            pieces.push(Piece { lo, hi: b, shape: Shape::constant(v) });
            lo = b;
        }
        if lo < self.domain_length {
            let shape = match &self.tail {
                Some(t) => Shape::Law(*t),
                None => Shape::constant(0.0),
            };
            pieces.push(Piece { lo, hi: self.domain_length, shape });
        }
        PiecewiseFn { pieces, domain_length: self.domain_length }
    }

    pub fn integral_to(&self, s: f64) -> f64 {
        self.to_fn().integral_to(s)
    }

    /// `f**` as a piecewise function on `(0, inf)`.
    pub fn double_star(&self) -> PiecewiseFn {
        self.to_fn().double_star()
    }

    /// `f**(s)` at one point.
    pub fn double_star_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.eval(0.0);
        }
        self.integral_to(s) / s
    }

    /// `|{f* > t}|`.
    pub fn measure_above(&self, t: f64) -> f64 {
        if let Some(h) = &self.head {
            if h.law.eval(h.end) <= t {
                return bisect_level(&|s| h.law.eval(s), t, 1e-300, h.end);
            }
        }
        let k = self.values.partition_point(|&v| v > t);
        if k < self.values.len() {
            return if k == 0 { self.start() } else { self.breakpoints[k - 1] };
        }
        let end = self.support_end();
        match &self.tail {
            Some(tl) if tl.eval(end) > t => bisect_level(&|s| tl.eval(s), t, end, 1e300),
            _ => end,
        }
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return invalid("profiles scale by nonnegative factors only");
        }
        let mut p = self.clone();
        p.values.iter_mut().for_each(|v| *v *= c);
        if let Some(h) = &mut p.head {
            h.law.coeff *= c;
        }
        if let Some(t) = &mut p.tail {
            t.coeff *= c;
        }
        Ok(p)
    }

    /// Pointwise sum of two step profiles.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.is_step() || !other.is_step() || self.domain_length != other.domain_length {
            return invalid("only step profiles on a common domain can be added");
        }
        let bps = merged_breakpoints(&[self, other]);
        let values = bps
            .iter()
            .scan(0.0, |lo, &b| {
                let mid = 0.5 * (*lo + b);
                *lo = b;
                Some(self.eval(mid) + other.eval(mid))
            })
            .collect();
        Self::new(bps, values, self.domain_length)
    }

    /// Pointwise minimum `min(f, lambda)`.
    pub fn truncate(&self, lambda: f64) -> Result<Self> {
        if !self.is_step() {
            return invalid("truncation is defined for step profiles");
        }
        let values = self.values.iter().map(|v| v.min(lambda)).collect();
        Self::new(self.breakpoints.clone(), values, self.domain_length).map(|p| p.merged())
    }

    /// `(f - lambda)_+`.
    pub fn excess(&self, lambda: f64) -> Result<Self> {
        if !self.is_step() {
            return invalid("truncation is defined for step profiles");
        }
        let values = self.values.iter().map(|v| (v - lambda).max(0.0)).collect();
        Self::new(self.breakpoints.clone(), values, self.domain_length).map(|p| p.merged())
    }

    /// Merges consecutive steps with equal values.
    pub fn merged(mut self) -> Self {
        let mut b = Vec::with_capacity(self.breakpoints.len());
        let mut v: Vec<f64> = Vec::with_capacity(self.values.len());
        for (&s, &x) in self.breakpoints.iter().zip(&self.values) {
            if v.last() == Some(&x) {
                *b.last_mut().unwrap() = s;
            } else {
                b.push(s);
                v.push(x);
            }
        }
        self.breakpoints = b;
        self.values = v;
        self
    }
}

fn bisect_level(g: &dyn Fn(f64) -> f64, t: f64, mut lo: f64, mut hi: f64) -> f64 {
    // g non-increasing on (lo, hi); returns sup{s : g(s) > t}
    if g(lo) <= t {
        return 0.0_f64.max(lo.min(1e-300));
    }
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if g(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

/// Sorted union of the breakpoints of several step profiles.
pub fn merged_breakpoints(ps: &[&Profile]) -> Vec<f64> {
    let mut all: Vec<f64> = ps.iter().flat_map(|p| p.breakpoints.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// `F*` of the cell magnitudes, one step per distinct value; widths are
/// multiples of the cell measure and the zero step is kept.
pub fn decreasing_rearrangement(f: &GriddedField) -> Profile {
    let mut mags = f.magnitude();
    mags.sort_by(|a, b| b.total_cmp(a));
    let cm = f.cell_measure();
    let volume = f.volume();
    let mut bps = Vec::new();
    let mut vals: Vec<f64> = Vec::new();
    let total = mags.len();
    for (i, &m) in mags.iter().enumerate() {
        let right = if i + 1 == total { volume } else { (i + 1) as f64 * cm };
        if vals.last() == Some(&m) {
            *bps.last_mut().unwrap() = right;
        } else {
            bps.push(right);
            vals.push(m);
        }
    }
    Profile { breakpoints: bps, values: vals, domain_length: volume, head: None, tail: None }
}

/// True iff `f**(s) <= g**(s) (1 + 1e-12)` at `0+` and at every merged
/// breakpoint (plus log samples inside analytic heads and tails).
pub fn hardy_majorization_check(f: &Profile, g: &Profile) -> bool {
    let mut pts = merged_breakpoints(&[f, g]);
    for p in [f, g] {
        if let Some(h) = p.head() {
            pts.extend((0..60).map(|k| h.end * 10f64.powf(-(k as f64) * 0.25)));
        }
        if p.tail().is_some() {
            let s0 = p.support_end().max(1.0);
            pts.extend((1..60).map(|k| s0 * 10f64.powf(k as f64 * 0.25)));
        }
    }
    let head0 = |p: &Profile| match p.head() {
        Some(h) if h.law.coeff > 0.0 && h.law.power < 0.0 => f64::INFINITY,
        Some(h) => h.law.eval(h.end * 1e-300_f64.max(1e-12)),
        None => p.values.first().copied().unwrap_or(0.0),
    };
    let tol = 1.0 + 1e-12;
    if head0(f) > head0(g) * tol && head0(f).is_finite() {
        return false;
    }
    pts.into_iter().all(|s| f.double_star_at(s) <= g.double_star_at(s) * tol + 1e-300)
}
