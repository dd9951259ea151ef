//! Rearrangement-invariant norms of profiles: Lebesgue, Lorentz,
//! Lorentz-Zygmund, Orlicz and Orlicz-Lorentz families, associate norms,
//! intersections and sums, and the optimal target built by duality.

use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::rearrange::{integral_of, PiecewiseFn, PowerLog, Profile, Shape};
use crate::young::YoungFunction;
use serde::{Deserialize, Serialize};

/// Serde helpers for reals that may be `+inf`, written as the string "inf".
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => match t.as_str() {
                "inf" | "infinity" | "Infinity" => Ok(f64::INFINITY),
                other => other.parse().map_err(serde::de::Error::custom),
            },
        }
    }
}

fn infinite() -> f64 {
    f64::INFINITY
}

/// Whether a Lorentz-type norm reads `f*` or `f**`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Star,
    Maximal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Lebesgue {
        #[serde(with = "ext_real")]
        p: f64,
    },
    /// `|| s^(1/p - 1/q) f* ||_q`.
    LorentzStar {
        #[serde(with = "ext_real")]
        p: f64,
        #[serde(with = "ext_real")]
        q: f64,
    },
    /// `|| s^(1/p - 1/q) f** ||_q`.
    LorentzMaximal {
        #[serde(with = "ext_real")]
        p: f64,
        #[serde(with = "ext_real")]
        q: f64,
    },
    /// Lorentz norm with the weight `(1 + log+(1/s))^r`.
    LorentzZygmund {
        #[serde(with = "ext_real")]
        p: f64,
        #[serde(with = "ext_real")]
        q: f64,
        r: f64,
        #[serde(default)]
        variant: Variant,
    },
    /// Adds `(1 + log+(1 + log+(1/s)))^rho`.
    #[serde(rename = "generalized_lz")]
    GeneralizedLz {
        #[serde(with = "ext_real")]
        p: f64,
        #[serde(with = "ext_real")]
        q: f64,
        r: f64,
        rho: f64,
        #[serde(default)]
        variant: Variant,
    },
    Orlicz {
        young: YoungFunction,
    },
    /// Luxemburg norm of `s^(-1/q) f*(s)`.
    OrliczLorentz {
        young: YoungFunction,
        q: f64,
    },
    Intersection {
        members: Vec<SpaceSpec>,
    },
    /// `int_0^1 f*`.
    #[serde(rename = "sum_L1_Linf")]
    SumL1Linf,
    /// Optimal target `X_alpha` of a base space, evaluated by duality.
    Target {
        base: Box<SpaceSpec>,
        n: usize,
        alpha: f64,
        #[serde(default = "yes")]
        closed_form: bool,
    },
}

fn yes() -> bool {
    true
}

/// A rearrangement-invariant norm on `(0, L)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(rename = "L", default = "infinite", with = "ext_real")]
    pub interval_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub associate: Option<Box<SpaceSpec>>,
}

/// Lorentz-type weight data shared by the Lebesgue and Lorentz families.
#[derive(Clone, Copy, Debug)]
struct Weighted {
    p: f64,
    q: f64,
    r: f64,
    rho: f64,
    maximal: bool,
}

pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

impl SpaceSpec {
    pub fn new(family: Family) -> Self {
        Self { family, interval_length: f64::INFINITY, associate: None }
    }

    pub fn on(mut self, length: f64) -> Self {
        self.interval_length = length;
        if let Family::Intersection { members } = &mut self.family {
            for m in members {
                m.interval_length = length;
            }
        }
        self
    }

    pub fn lebesgue(p: f64) -> Self {
        Self::new(Family::Lebesgue { p })
    }
    pub fn lorentz_star(p: f64, q: f64) -> Self {
        Self::new(Family::LorentzStar { p, q })
    }
    pub fn lorentz_maximal(p: f64, q: f64) -> Self {
        Self::new(Family::LorentzMaximal { p, q })
    }
    pub fn lorentz_zygmund(p: f64, q: f64, r: f64, variant: Variant) -> Self {
        Self::new(Family::LorentzZygmund { p, q, r, variant })
    }
    pub fn generalized_lz(p: f64, q: f64, r: f64, rho: f64) -> Self {
        Self::new(Family::GeneralizedLz { p, q, r, rho, variant: Variant::Star })
    }
    pub fn orlicz(young: YoungFunction) -> Self {
        Self::new(Family::Orlicz { young })
    }
    pub fn orlicz_lorentz(young: YoungFunction, q: f64) -> Self {
        Self::new(Family::OrliczLorentz { young, q })
    }
    pub fn intersection(members: Vec<SpaceSpec>) -> Self {
        Self::new(Family::Intersection { members })
    }
    pub fn sum_l1_linf() -> Self {
        Self::new(Family::SumL1Linf)
    }

    fn weighted(&self) -> Option<Weighted> {
        let w = |p, q, r, rho, maximal| Some(Weighted { p, q, r, rho, maximal });
        match &self.family {
            Family::Lebesgue { p } => w(*p, *p, 0.0, 0.0, false),
            Family::LorentzStar { p, q } => w(*p, *q, 0.0, 0.0, false),
            Family::LorentzMaximal { p, q } => w(*p, *q, 0.0, 0.0, true),
            Family::LorentzZygmund { p, q, r, variant } => w(*p, *q, *r, 0.0, *variant == Variant::Maximal),
            Family::GeneralizedLz { p, q, r, rho, variant } => w(*p, *q, *r, *rho, *variant == Variant::Maximal),
            _ => None,
        }
    }

    /// Checks parameter ranges; Orlicz-Lorentz also checks that
    /// `int^inf A(t) t^(-1-q) dt` converges.
    pub fn validate(&self) -> Result<()> {
        if !(self.interval_length > 0.0) {
            return Err(Error::Admissibility("interval length must be positive".into()));
        }
        if let Some(w) = self.weighted() {
            if !(w.p >= 1.0) || !(w.q >= 1.0) {
                return Err(Error::Admissibility(format!("need p, q >= 1, got p = {}, q = {}", w.p, w.q)));
            }
            if !w.r.is_finite() || !w.rho.is_finite() {
                return Err(Error::Admissibility("log exponents must be finite".into()));
            }
            return Ok(());
        }
        match &self.family {
            Family::OrliczLorentz { young, q } => {
                if !(*q > 1.0) {
                    return Err(Error::Admissibility(format!("orlicz_lorentz needs q > 1, got {q}")));
                }
                let q = *q;
                let lnh = |u: f64| young.ln_eval(u) - q * u;
                if quad::improper(&lnh, 0.0).is_infinite() {
                    return Err(Error::Admissibility("int^inf A(t)/t^(1+q) dt diverges".into()));
                }
                Ok(())
            }
            Family::Intersection { members } => {
                if members.is_empty() {
                    return Err(Error::Admissibility("empty intersection".into()));
                }
                members.iter().try_for_each(|m| m.validate())
            }
            Family::Target { base, n, alpha, .. } => {
                if !(*alpha > 0.0 && *alpha < *n as f64) {
                    return Err(Error::Admissibility("alpha must lie in (0, n)".into()));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// Known associate norm, if any.
    pub fn analytic_associate(&self) -> Option<SpaceSpec> {
        if let Some(a) = &self.associate {
            return Some((**a).clone());
        }
        let l = self.interval_length;
        match &self.family {
            Family::Lebesgue { p } => Some(SpaceSpec::lebesgue(conjugate_exponent(*p)).on(l)),
            _ => None,
        }
    }
}

/// Collects pieces of `g` restricted to `(0, length)`.
fn clipped(g: &PiecewiseFn, length: f64) -> PiecewiseFn {
    let pieces = g
        .pieces
        .iter()
        .filter(|p| p.lo < length)
        .map(|p| {
            let mut p = p.clone();
            p.hi = p.hi.min(length);
            p
        })
        .collect();
    PiecewiseFn { pieces, domain_length: length }
}

fn ln_weight(s: f64, w: &Weighted, q_exp: f64) -> f64 {
    // ln of s^(1/p - 1/q) (1 + log+(1/s))^r (1 + log+(1 + log+(1/s)))^rho
    let ip = if w.p.is_infinite() { 0.0 } else { 1.0 / w.p };
    let lp = (-s.ln()).max(0.0);
    let mut v = (ip - q_exp) * s.ln();
    if w.r != 0.0 {
        v += w.r * (1.0 + lp).ln();
    }
    if w.rho != 0.0 {
        v += w.rho * (1.0 + (1.0 + lp).ln().max(0.0)).ln();
    }
    v
}

fn weighted_norm(w: &Weighted, g: &PiecewiseFn, length: f64) -> f64 {
    let g = clipped(g, length);
    let plain = w.r == 0.0 && w.rho == 0.0;
    if w.q.is_infinite() {
        if w.p.is_infinite() && plain {
            return g.sup_with(&|_, v| v);
        }
        if plain && g.pieces.iter().all(|p| matches!(&p.shape, Shape::Powers(t) if t.len() == 1 && t[0].1 == 0.0)) {
            // steps: the sup on each step is approached at its right end
            let ip = 1.0 / w.p;
            return g
                .pieces
                .iter()
                .map(|p| {
                    let v = p.shape.eval(p.lo.max(1e-300));
                    if v == 0.0 {
                        0.0
                    } else {
                        v * p.hi.powf(ip)
                    }
                })
                .fold(0.0, f64::max);
        }
        return g.sup_with(&|s, v| if v == 0.0 { 0.0 } else { (ln_weight(s, w, 0.0)).exp() * v });
    }
    let q = w.q;
    let ip = if w.p.is_infinite() { 0.0 } else { 1.0 / w.p };
    let mut total = 0.0;
    for piece in &g.pieces {
        let part = match &piece.shape {
            Shape::Powers(t) if plain && (q == 1.0 || (t.len() == 1 && t[0].1 == 0.0)) => {
                // closed form: int s^(q/p - 1) (sum c s^e)^q over the piece
                if q == 1.0 {
                    t.iter().map(|&(c, e)| power_piece(c, ip - 1.0 + e, piece.lo, piece.hi)).sum()
                } else {
                    let v = t[0].0;
                    if v == 0.0 {
                        0.0
                    } else {
                        power_piece(v.powf(q), q * ip - 1.0, piece.lo, piece.hi)
                    }
                }
            }
            _ => {
                let sh = &piece.shape;
                let f = |s: f64| {
                    let v = sh.eval(s);
                    if v == 0.0 {
                        return 0.0;
                    }
                    (q * (ln_weight(s, w, 1.0 / q) + v.ln())).exp()
                };
                integral_of(&f, piece.lo, piece.hi)
            }
        };
        total += part;
        if total.is_infinite() {
            return f64::INFINITY;
        }
    }
    total.powf(1.0 / q)
}

fn power_piece(c: f64, e: f64, a: f64, b: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let k = e + 1.0;
    if k == 0.0 {
        return if a == 0.0 || b.is_infinite() { c.signum() * f64::INFINITY } else { c * (b / a).ln() };
    }
    if (a == 0.0 && k < 0.0) || (b.is_infinite() && k > 0.0) {
        return c.signum() * f64::INFINITY;
    }
    c * (b.powf(k) - a.powf(k)) / k
}

/// Luxemburg norm of `g(s) s^(-1/q)` (plain Orlicz when `q` is None).
fn luxemburg(a: &YoungFunction, g: &PiecewiseFn, length: f64, q: Option<f64>) -> f64 {
    let g = clipped(g, length);
    let only_steps = q.is_none() && g.pieces.iter().all(|p| matches!(&p.shape, Shape::Powers(t) if t.len() == 1 && t[0].1 == 0.0));
    let modular = |lambda: f64| -> f64 {
        let ll = lambda.ln();
        let mut total = 0.0;
        for piece in &g.pieces {
            if only_steps {
                let v = piece.shape.eval(piece.lo.max(1e-300));
                if v > 0.0 {
                    total += a.ln_eval(v.ln() - ll).exp() * (piece.hi - piece.lo);
                }
            } else {
                let sh = &piece.shape;
                let f = |s: f64| {
                    let v = sh.eval(s);
                    if v == 0.0 {
                        return 0.0;
                    }
                    let lv = v.ln() - q.map_or(0.0, |q| s.ln() / q);
                    a.ln_eval(lv - ll).exp()
                };
                total += integral_of(&f, piece.lo, piece.hi);
            }
            if total.is_infinite() || total.is_nan() {
                return f64::INFINITY;
            }
        }
        total
    };
    if g.pieces.iter().all(|p| p.shape.eval(0.5 * (p.lo + p.hi.min(p.lo * 2.0 + 1.0))) == 0.0) && modular(1e-300) == 0.0 {
        return 0.0;
    }
    let mut hi = 1.0_f64;
    let mut guard = 0;
    while modular(hi) > 1.0 {
        hi *= 4.0;
        guard += 1;
        if guard > 520 {
            return f64::INFINITY;
        }
    }
    let mut lo = hi;
    guard = 0;
    while modular(lo) <= 1.0 {
        lo /= 4.0;
        guard += 1;
        if guard > 520 {
            return 0.0;
        }
    }
    let (mut a_, mut b_) = (lo.ln(), hi.ln());
    while b_ - a_ > 1e-12 {
        let m = 0.5 * (a_ + b_);
        if modular(m.exp()) <= 1.0 {
            b_ = m;
        } else {
            a_ = m;
        }
    }
    b_.exp()
}

/// Norm of a non-increasing function on `(0, L)`.
pub fn norm_fn(x: &SpaceSpec, f: &PiecewiseFn) -> Result<f64> {
    let l = x.interval_length;
    if let Some(w) = x.weighted() {
        x.validate()?;
        let g = if w.maximal { f.double_star() } else { f.clone() };
        return Ok(weighted_norm(&w, &g, l));
    }
    match &x.family {
        Family::Orlicz { young } => Ok(luxemburg(young, f, l, None)),
        Family::OrliczLorentz { young, q } => {
            x.validate()?;
            Ok(luxemburg(young, f, l, Some(*q)))
        }
        Family::Intersection { members } => {
            let mut best = 0.0_f64;
            for m in members {
                best = best.max(norm_fn(m, f)?);
            }
            Ok(best)
        }
        Family::SumL1Linf => Ok(f.integral_to(l.min(1.0))),
        Family::Target { .. } => invalid("target norms are evaluated on step profiles"),
        _ => unreachable!("weighted families handled above"),
    }
}

/// `||f||_X` for a profile `f = F*`.
pub fn norm(x: &SpaceSpec, f: &Profile) -> Result<f64> {
    if f.domain_length() < x.interval_length && x.interval_length.is_finite() {
        // profile defined on a shorter interval: extend by zero
    } else if f.domain_length() > x.interval_length && f.support_end() > x.interval_length {
        return invalid("profile extends beyond the interval of the space");
    }
    match &x.family {
        Family::Lebesgue { p } if p.is_finite() && f.is_step() => {
            let mut acc = 0.0;
            let mut lo = 0.0;
            for (&b, &v) in f.breakpoints().iter().zip(f.values()) {
                acc += v.powf(*p) * (b - lo);
                lo = b;
            }
            Ok(acc.powf(1.0 / p))
        }
        Family::Target { base, n, alpha, closed_form } => target_norm(base, *n, *alpha, *closed_form, x.interval_length, f),
        _ => norm_fn(x, &f.to_fn()),
    }
}

/// Maximizes `int f g / N(g)` over non-increasing steps `g` placed on the
/// breakpoints of `f`, by coordinate ascent on the step increments. The
/// result is a lower bound for the dual norm.
pub fn dual_lower_bound(f: &Profile, gnorm: &dyn Fn(&Profile) -> Result<f64>) -> Result<f64> {
    let mut pts: Vec<f64> = f.breakpoints().to_vec();
    if let Some(h) = f.head() {
        pts.extend((1..24).map(|k| h.end * 10f64.powf(-(k as f64) * 0.5)));
    }
    pts.retain(|&s| s < f64::INFINITY);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() > 48 {
        let m = pts.len();
        let mut keep: Vec<f64> = (0..48).map(|k| pts[((k + 1) * m / 48) - 1]).collect();
        keep.dedup();
        pts = keep;
    }
    let big: Vec<f64> = pts.iter().map(|&s| f.integral_to(s)).collect();
    if big.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let length = f.domain_length();
    let profile = |d: &[f64]| -> Result<Profile> {
        // g = sum_j d_j chi_(0, s_j)
        let mut vals = vec![0.0; d.len()];
        let mut acc = 0.0;
        for j in (0..d.len()).rev() {
            acc += d[j];
            vals[j] = acc;
        }
        Ok(Profile::new(pts.clone(), vals, length)?.merged())
    };
    let ratio = |d: &[f64]| -> Result<f64> {
        let num: f64 = d.iter().zip(&big).map(|(a, b)| a * b).sum();
        if num == 0.0 {
            return Ok(0.0);
        }
        let den = gnorm(&profile(d)?)?;
        Ok(if den > 0.0 { num / den } else { 0.0 })
    };
    let k = pts.len();
    let mut d = vec![0.0; k];
    let mut best = 0.0;
    let mut arg = 0;
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let r = ratio(&e)?;
        if r > best {
            best = r;
            arg = j;
        }
    }
    d[arg] = 1.0;
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _sweep in 0..40 {
        let before = best;
        for j in 0..k {
            let scale = d.iter().fold(0.0_f64, |m, v| m.max(*v));
            let eval_at = |x: f64, d: &mut Vec<f64>| -> Result<f64> {
                let old = d[j];
                d[j] = x;
                let r = ratio(d);
                d[j] = old;
                r
            };
            let mut cand = (d[j], best);
            let zero = eval_at(0.0, &mut d)?;
            if zero > cand.1 {
                cand = (0.0, zero);
            }
            let (mut a, mut b) = ((scale * 1e-6).ln(), (scale * 1e3).ln());
            for _ in 0..50 {
                let c = b - gr * (b - a);
                let e = a + gr * (b - a);
                if eval_at(c.exp(), &mut d)? > eval_at(e.exp(), &mut d)? {
                    b = e;
                } else {
                    a = c;
                }
            }
            let x = (0.5 * (a + b)).exp();
            let r = eval_at(x, &mut d)?;
            if r > cand.1 {
                cand = (x, r);
            }
            d[j] = cand.0;
            best = cand.1;
        }
        if best <= before * (1.0 + 1e-10) {
            break;
        }
    }
    Ok(best)
}

/// Associate norm: the analytic associate when known, otherwise the numeric
/// lower bound of [`dual_lower_bound`] when `fallback` is set.
pub fn associate_norm(x: &SpaceSpec, f: &Profile, fallback: bool) -> Result<f64> {
    if let Some(a) = x.analytic_associate() {
        return norm(&a, f);
    }
    if !fallback {
        return invalid("no analytic associate and the numeric fallback is disabled");
    }
    numeric_associate(x, f)
}

/// Numeric associate norm regardless of analytic knowledge.
pub fn numeric_associate(x: &SpaceSpec, f: &Profile) -> Result<f64> {
    dual_lower_bound(f, &|g| norm(x, g))
}

/// Norm of a function that need not be monotone, in a Lebesgue space.
fn lebesgue_of_function(p: f64, h: &PiecewiseFn, length: f64) -> f64 {
    let h = clipped(h, length);
    if p.is_infinite() {
        return h.sup_with(&|_, v| v.abs());
    }
    h.integrate_with(&|_, v| v.abs().powf(p)).powf(1.0 / p)
}

fn lebesgue_exponent(x: &SpaceSpec) -> Option<f64> {
    match &x.family {
        Family::Lebesgue { p } => Some(*p),
        Family::LorentzStar { p, q } | Family::LorentzMaximal { p, q } if p == q && *p == 1.0 => Some(1.0),
        _ => None,
    }
}

/// `||s^(alpha/n) g**(s)||_{X'}` for a Lebesgue base `X`.
pub fn target_associate_norm(base: &SpaceSpec, n: usize, alpha: f64, g: &Profile) -> Result<f64> {
    let p = lebesgue_exponent(base).ok_or_else(|| Error::Invalid("target spaces need a Lebesgue base".into()))?;
    let h = g.double_star().times_power(alpha / n as f64);
    Ok(lebesgue_of_function(conjugate_exponent(p), &h, base.interval_length))
}

fn target_norm(base: &SpaceSpec, n: usize, alpha: f64, closed_form: bool, length: f64, f: &Profile) -> Result<f64> {
    let p = lebesgue_exponent(base).ok_or_else(|| Error::Invalid("target spaces need a Lebesgue base".into()))?;
    let nf = n as f64;
    if closed_form && p == 1.0 {
        let l = SpaceSpec::lorentz_star(nf / (nf - alpha), 1.0).on(length);
        return Ok((nf - alpha) / nf * norm(&l, f)?);
    }
    let b = base.clone().on(length);
    dual_lower_bound(f, &|g| target_associate_norm(&b, n, alpha, g))
}

/// Builds `X_alpha` after checking that `(1 + r)^(-1 + alpha/n)` has finite
/// `X'` norm on `(0, L)`.
pub fn target_space(x: &SpaceSpec, n: usize, alpha: f64) -> Result<SpaceSpec> {
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return Err(Error::Admissibility("alpha must lie in (0, n)".into()));
    }
    let p = lebesgue_exponent(x).ok_or_else(|| Error::Invalid("target spaces need a Lebesgue base".into()))?;
    let dual = SpaceSpec::lebesgue(conjugate_exponent(p)).on(x.interval_length);
    if !gate_norm(&dual, alpha / nf)?.is_finite() {
        return Err(Error::Gate("no rearrangement-invariant target exists: (1+r)^(-1+alpha/n) is not in X'".into()));
    }
    let spec = SpaceSpec {
        family: Family::Target { base: Box::new(x.clone()), n, alpha, closed_form: true },
        interval_length: x.interval_length,
        associate: None,
    };
    Ok(spec)
}

/// `X'` norm of a minorant of `(1 + r)^(-1 + theta)` with the exact power tail.
fn gate_norm(dual: &SpaceSpec, theta: f64) -> Result<f64> {
    let length = dual.interval_length;
    let end = if length.is_finite() { length } else { 1e3 };
    let k = 400;
    let bps: Vec<f64> = (1..=k).map(|j| end * 10f64.powf(-6.0 * (1.0 - j as f64 / k as f64))).collect();
    let vals: Vec<f64> = bps.iter().map(|b| (1.0 + b).powf(theta - 1.0)).collect();
    // tail c r^(theta-1) matched below the last step so the profile stays non-increasing
    let c = ((1.0 + end) / end).powf(theta - 1.0) * (1.0 - 1e-12);
    let tail = if length.is_finite() { None } else { Some(PowerLog::new(c, theta - 1.0, 0.0)) };
    let prof = Profile::with_parts(bps, vals, length, None, tail)?;
    norm(dual, &prof)
}

/// Hardy-Littlewood pairing `int_0^L f g` of two non-increasing profiles.
pub fn pairing(f: &Profile, g: &Profile) -> f64 {
    if f.is_step() && g.is_step() {
        let bps = crate::rearrange::merged_breakpoints(&[f, g]);
        let mut lo = 0.0;
        let mut acc = 0.0;
        for b in bps {
            let mid = 0.5 * (lo + b);
            acc += f.eval(mid) * g.eval(mid) * (b - lo);
            lo = b;
        }
        return acc;
    }
    let mut knots = f.to_fn().knots();
    knots.extend(g.to_fn().knots());
    knots.push(0.0);
    knots.push(f.domain_length().min(g.domain_length()));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots.windows(2).map(|w| integral_of(&|s| f.eval(s) * g.eval(s), w[0], w[1])).sum()
}

/// Hölder check `int f g <= ||f||_X ||g||_X'`.
pub fn holder_check(x: &SpaceSpec, f: &Profile, g: &Profile) -> Result<(f64, f64, bool)> {
    let a = x.analytic_associate().ok_or_else(|| Error::Invalid("holder_check needs an analytic associate".into()))?;
    let lhs = pairing(f, g);
    let rhs = norm(x, f)? * norm(&a, g)?;
    Ok((lhs, rhs, lhs <= rhs * (1.0 + 1e-9)))
}
