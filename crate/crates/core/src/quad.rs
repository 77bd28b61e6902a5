//! Adaptive Gauss-Kronrod quadrature for the bath integrals.
//!
//! All spectral integrals in this crate are one-dimensional, smooth away
//! from at most one removable point, and exponentially cut off in the
//! ultraviolet, so a 7-15 Gauss-Kronrod pair with interval bisection is all
//! that is needed. The Kronrod nodes are open (no endpoint evaluation),
//! which lets integrands with a finite omega -> 0 limit be integrated from
//! zero without special-casing.

use serde::{Deserialize, Serialize};

/// Kronrod abscissae for the 7-15 pair on [-1, 1] (positive half).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Weights of the embedded 7-point Gauss rule (at XGK[1], XGK[3], XGK[5], XGK[7]).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadSettings {
    /// Relative tolerance goal for adaptive integration.
    pub rel_tol: f64,
    /// Maximum number of interval bisections.
    pub max_splits: usize,
    /// Upper integration limit for semi-infinite integrals, in units of the
    /// spectral cutoff frequency.
    pub uv_factor: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            rel_tol: 1e-11,
            max_splits: 4000,
            uv_factor: 40.0,
        }
    }
}

/// One Gauss-Kronrod 7-15 panel. Returns (integral, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = WGK[7] * f(c);
    let mut gauss = WG[3] * f(c);
    for i in 0..7 {
        let x = h * XGK[i];
        let fsum = f(c - x) + f(c + x);
        kron += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    let integral = kron * h;
    let err = ((kron - gauss) * h).abs();
    (integral, err)
}

/// Adaptive bisection on [a, b]. Returns (integral, error estimate).
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, settings: &QuadSettings) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    // worklist of (a, b, integral, err); refine the worst interval first
    let (i0, e0) = gk15(f, a, b);
    let mut intervals = vec![(a, b, i0, e0)];
    let mut splits = 0;
    loop {
        let total: f64 = intervals.iter().map(|x| x.2).sum();
        let err: f64 = intervals.iter().map(|x| x.3).sum();
        let goal = settings.rel_tol * total.abs().max(1e-300);
        if err <= goal || splits >= settings.max_splits {
            return (total, err);
        }
        // split the interval with the largest error estimate
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (ia, ib, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (ia + ib);
        if mid <= ia || mid >= ib {
            // interval at floating-point resolution; give up refining it
            let (i, e) = gk15(f, ia, ib);
            intervals.push((ia, ib, i, 0.0 * e));
            splits += 1;
            continue;
        }
        let (l, le) = gk15(f, ia, mid);
        let (r, re) = gk15(f, mid, ib);
        intervals.push((ia, mid, l, le));
        intervals.push((mid, ib, r, re));
        splits += 1;
    }
}

/// Fixed-panel composite GK15 rule; used by self-convergence tests.
pub fn panelled<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> (f64, f64) {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for k in 0..n {
        let (i, e) = gk15(f, a + k as f64 * h, a + (k + 1) as f64 * h);
        total += i;
        err += e;
    }
    (total, err)
}

/// Integral over [a, uv_factor * omega_c] of an exponentially cut-off
/// integrand, with a crude bound on the discarded tail folded into the error
/// estimate. The tail bound assumes |f| decays at least like exp(-omega/omega_c)
/// beyond the truncation point.
pub fn semi_infinite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    omega_c: f64,
    settings: &QuadSettings,
) -> (f64, f64) {
    let top = settings.uv_factor * omega_c;
    if a >= top {
        return (0.0, 0.0);
    }
    let (integral, mut err) = adaptive(f, a, top, settings);
    let tail = f(top).abs() * omega_c * 2.0;
    err += tail;
    (integral, err)
}

/// Integral of an integrand oscillating with angular frequency about `t`,
/// using panels no wider than a quarter period so the GK15 pair resolves the
/// oscillation.
pub fn oscillatory<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    t: f64,
    settings: &QuadSettings,
) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let quarter_period = if t.abs() > 1e-12 {
        std::f64::consts::PI / (2.0 * t.abs())
    } else {
        b - a
    };
    let panels = (((b - a) / quarter_period).ceil() as usize).clamp(1, 200_000);
    let (i, e) = panelled(f, a, b, panels);
    if e > settings.rel_tol * i.abs().max(1e-300) && panels < 200_000 {
        return panelled(f, a, b, 2 * panels);
    }
    (i, e)
}

/// Principal value of  integral_lo^hi  g(w) / (w - pole) dw  for smooth g,
/// with lo < pole < hi. The pole is removed by symmetric subtraction on a
/// window [pole - w, pole + w]: on the window the integrand is replaced by
/// (g(w) - g(pole)) / (w - pole), whose principal-value complement vanishes
/// by symmetry; outside the window the raw kernel is integrated adaptively.
pub fn principal_value<F: Fn(f64) -> f64>(
    g: &F,
    lo: f64,
    hi: f64,
    pole: f64,
    window: f64,
    settings: &QuadSettings,
) -> (f64, f64) {
    assert!(lo < pole && pole < hi, "pole must lie inside the interval");
    let w = window.min(pole - lo).min(hi - pole);
    let g_pole = g(pole);
    // derivative scale for evaluating the difference quotient at the pole
    let h = w * 1e-6;
    let dg = (g(pole + h) - g(pole - h)) / (2.0 * h);
    let reg = |x: f64| -> f64 {
        let d = x - pole;
        if d.abs() < 1e-9 * w {
            dg
        } else {
            (g(x) - g_pole) / d
        }
    };
    let (iw, ew) = adaptive(&reg, pole - w, pole + w, settings);
    let kernel = |x: f64| g(x) / (x - pole);
    let (il, el) = adaptive(&kernel, lo, pole - w, settings);
    let (ir, er) = adaptive(&kernel, pole + w, hi, settings);
    (iw + il + ir, ew + el + er)
}

/// coth(x) with a series branch near zero and saturation for large arguments.
pub fn coth(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-4 {
        // 1/x + x/3 - x^3/45
        1.0 / x + x / 3.0 - x * x * x / 45.0
    } else if ax > 20.0 {
        x.signum()
    } else {
        let e = (2.0 * x).exp();
        (e + 1.0) / (e - 1.0)
    }
}
