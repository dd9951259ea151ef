//! Gauss-Legendre rules, log-space accumulation and improper integrals of
//! power-log integrands.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

pub(crate) fn gl4() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(4))
}

/// Single-panel rule with the given nodes and weights on [a, b].
pub(crate) fn integrate_rule<F: Fn(f64) -> f64>(rule: &(Vec<f64>, Vec<f64>), f: F, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Composite 16-point Gauss-Legendre on `panels` equal panels of [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = gl16();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(mid + 0.5 * h * xi);
        }
        total += 0.5 * h * s;
    }
    total
}

/// ln(e^a + e^b) without overflow.
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln of the integral of exp(g) over [a, b] on `panels` panels.
pub fn ln_integrate<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return f64::NEG_INFINITY;
    }
    let (x, w) = gl16();
    let h = (b - a) / panels as f64;
    let mut acc = f64::NEG_INFINITY;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            acc = ln_add(acc, (0.5 * h * wi).ln() + g(mid + 0.5 * h * xi));
        }
    }
    acc
}

/// ln of the integral over [u0, inf) of exp(-k u) u^b, for u0 >= 0.
///
/// Returns `None` when the integral diverges (k < 0, k = 0 with b >= -1, or
/// u0 = 0 with b <= -1).
pub fn ln_exp_power_tail(k: f64, b: f64, u0: f64) -> Option<f64> {
    assert!(u0 >= 0.0, "tail start must be nonnegative");
    if u0 == 0.0 {
        if k > 0.0 && b > -1.0 {
            return Some(statrs::function::gamma::ln_gamma(b + 1.0) - (b + 1.0) * k.ln());
        }
        return None;
    }
    if k.abs() <= 1e-13 * (1.0 + b.abs()) {
        if b < -1.0 {
            return Some((b + 1.0) * u0.ln() - (-b - 1.0).ln());
        }
        return None;
    }
    if k < 0.0 {
        return None;
    }
    // exp(-k u0) u0^b * (1/k) * int_0^inf exp(-z) (1 + z/m)^b dz, m = k u0
    let m = k * u0;
    let zmax = 60.0 + 4.0 * b.max(0.0) * (1.0 + (1.0 + 60.0 / m).ln());
    let mut cuts = vec![0.0];
    let mut c = (m / 64.0).min(1.0);
    while c < zmax {
        cuts.push(c);
        c *= 2.0;
    }
    cuts.push(zmax);
    let mut j = 0.0;
    for win in cuts.windows(2) {
        j += integrate(|z| (-z).exp() * (1.0 + z / m).powf(b), win[0], win[1], 2);
    }
    Some(-m + b * u0.ln() - k.ln() + j.ln())
}

/// Integral over [u0, inf) of a nonnegative integrand given in log form,
/// `lnh(u) = ln h(u)`. Returns +inf when the tail does not decay faster
/// than u^{-1}.
pub fn improper(lnh: &dyn Fn(f64) -> f64, u0: f64) -> f64 {
    let mut lo = u0;
    let mut width = 0.5_f64.max(u0.abs() * 0.05);
    let mut acc = f64::NEG_INFINITY;
    let cap = 1e9_f64.max(10.0 * u0.abs());
    loop {
        let hi = lo + width;
        let part = ln_integrate(lnh, lo, hi, 1);
        acc = ln_add(acc, part);
        lo = hi;
        width *= 1.25;
        let h_end = lnh(lo);
        if h_end == f64::NEG_INFINITY {
            return acc.exp();
        }
        // local decay exponent kappa in h ~ u^{-kappa}
        let du = 1e-3 * lo.abs().max(1.0);
        let slope = (lnh(lo + du) - lnh(lo - du)) / ((lo + du).ln() - (lo - du).ln());
        let kappa = -slope;
        if lo > 0.0 && kappa > 1.0 {
            let tail = h_end + lo.ln() - (kappa - 1.0).ln();
            if tail < acc - 37.0 {
                return ln_add(acc, tail).exp();
            }
        }
        if lo >= cap {
            if lo > 0.0 && kappa > 1.0 + 1e-6 {
                let tail = h_end + lo.ln() - (kappa - 1.0).ln();
                return ln_add(acc, tail).exp();
            }
            return f64::INFINITY;
        }
    }
}

/// Least-squares solution of the overdetermined system with columns `cols`.
pub fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let rows = y.len();
    let k = cols.len();
    let scale: Vec<f64> = cols.iter().map(|c| c.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300)).collect();
    let a = nalgebra::DMatrix::from_fn(rows, k, |i, j| cols[j][i] / scale[j]);
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-14).expect("svd solve");
    (0..k).map(|j| sol[j] / scale[j]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        let v = integrate(|x| x.powi(7) + 3.0 * x * x, 0.0, 2.0, 1);
        assert!((v - (32.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn exp_power_tail_matches_gamma() {
        // int_1^inf e^{-u} du = e^{-1}
        let v = ln_exp_power_tail(1.0, 0.0, 1.0).unwrap().exp();
        assert!((v - (-1.0f64).exp()).abs() < 1e-13);
        // int_2^inf u^{-3} du = 1/8
        let v = ln_exp_power_tail(0.0, -3.0, 2.0).unwrap().exp();
        assert!((v - 0.125).abs() < 1e-14);
        // int_1^inf e^{-2u} u du = e^{-2} (1/2 + 1/4)
        let v = ln_exp_power_tail(2.0, 1.0, 1.0).unwrap().exp();
        assert!((v - (-2.0f64).exp() * 0.75).abs() < 1e-13);
        assert!(ln_exp_power_tail(0.0, -1.0, 1.0).is_none());
        assert!(ln_exp_power_tail(-1.0, 0.0, 1.0).is_none());
        let v = ln_exp_power_tail(2.0, 1.0, 0.0).unwrap().exp();
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn improper_power_tails() {
        let v = improper(&|u: f64| -1.5 * u.ln(), 1.0);
        assert!((v - 2.0).abs() < 1e-6, "{v}");
        assert!(improper(&|u: f64| -u.ln(), 1.0).is_infinite());
        let v = improper(&|u: f64| -u, 0.0);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ln_add_is_stable() {
        assert!((ln_add(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(ln_add(f64::NEG_INFINITY, 3.0), 3.0);
    }
}
