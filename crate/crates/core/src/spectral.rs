//! Reservoir spectral densities and the bath integrals feeding the
//! resonance energies.
//!
//! The decay rates only probe J at omega = 0 and at the two-level splitting,
//! but the second-order Lamb shifts need principal-value integrals of
//! J(omega) coth(beta omega / 2), and the mu integral entering every real
//! shift is logarithmically infrared-divergent for an ohmic bath at positive
//! temperature. Divergent integrals are regularized by an explicit infrared
//! cutoff; callers are told when a result depends on it.

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::quad::{self, QuadSettings};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SpectralFamily {
    /// J(omega) = eta * omega * exp(-omega/omega_c)
    Ohmic,
    /// J(omega) = eta * omega^s * omega_c^(1-s) * exp(-omega/omega_c), s > 1
    SuperOhmic { s: f64 },
    /// Monotone-cubic interpolation of tabulated (omega, J) samples.
    Tabulated { omega: Vec<f64>, j: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralModel {
    pub family: SpectralFamily,
    /// Dimensionless strength (ignored for tabulated input).
    pub eta: f64,
    /// Cutoff frequency; for tabulated input, the scale used for truncation
    /// (defaults to a third of the last grid point).
    pub omega_c: f64,
    /// Infrared cutoff omega_min for divergent Lamb-shift integrals.
    pub ir_cutoff: Option<f64>,
    pub quad: QuadSettings,
    #[serde(skip)]
    pchip: OnceLock<Pchip>,
}

impl SpectralModel {
    pub fn ohmic(eta: f64, omega_c: f64) -> Self {
        SpectralModel {
            family: SpectralFamily::Ohmic,
            eta,
            omega_c,
            ir_cutoff: None,
            quad: QuadSettings::default(),
            pchip: OnceLock::new(),
        }
    }

    pub fn super_ohmic(eta: f64, omega_c: f64, s: f64) -> Self {
        SpectralModel {
            family: SpectralFamily::SuperOhmic { s },
            eta,
            omega_c,
            ir_cutoff: None,
            quad: QuadSettings::default(),
            pchip: OnceLock::new(),
        }
    }

    /// Tabulated spectral density. Requires strictly increasing frequencies
    /// starting at omega = 0, with J(0) = 0.
    pub fn tabulated(omega: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if omega.len() != j.len() || omega.len() < 3 {
            return Err(Error::InvalidParams(
                "tabulated J needs at least 3 (omega, J) samples".into(),
            ));
        }
        if omega[0] != 0.0 {
            return Err(Error::InvalidParams(
                "tabulated J must start at omega = 0".into(),
            ));
        }
        if j[0] != 0.0 {
            return Err(Error::InvalidParams(
                "tabulated J must satisfy J(0) = 0".into(),
            ));
        }
        for w in omega.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParams(
                    "tabulated frequencies must be strictly increasing".into(),
                ));
            }
        }
        if j.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidParams(
                "tabulated J must be nonnegative".into(),
            ));
        }
        let omega_c = omega.last().unwrap() / 3.0;
        Ok(SpectralModel {
            family: SpectralFamily::Tabulated { omega, j },
            eta: 1.0,
            omega_c,
            ir_cutoff: None,
            quad: QuadSettings::default(),
            pchip: OnceLock::new(),
        })
    }

    pub fn with_ir_cutoff(mut self, omega_min: f64) -> Self {
        self.ir_cutoff = Some(omega_min);
        self
    }

    /// J(omega) >= 0 for omega >= 0.
    pub fn eval_j(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::NegativeFrequency(omega));
        }
        Ok(self.eval_j_unchecked(omega))
    }

    fn eval_j_unchecked(&self, omega: f64) -> f64 {
        match &self.family {
            SpectralFamily::Ohmic => self.eta * omega * (-omega / self.omega_c).exp(),
            SpectralFamily::SuperOhmic { s } => {
                self.eta
                    * omega.powf(*s)
                    * self.omega_c.powf(1.0 - s)
                    * (-omega / self.omega_c).exp()
            }
            SpectralFamily::Tabulated { omega: xs, j } => {
                if omega >= *xs.last().unwrap() {
                    0.0
                } else {
                    self.pchip.get_or_init(|| Pchip::new(xs, j)).eval(omega)
                }
            }
        }
    }

    /// Slope of J at zero frequency, lim_{omega -> 0} J(omega)/omega.
    pub fn j_tilde_zero(&self) -> Result<f64> {
        match &self.family {
            SpectralFamily::Ohmic => Ok(self.eta),
            SpectralFamily::SuperOhmic { s } => {
                if *s > 1.0 {
                    Ok(0.0)
                } else {
                    Ok(self.eta)
                }
            }
            SpectralFamily::Tabulated { omega, .. } => {
                // Richardson-extrapolated finite difference of J(w)/w
                let h0 = omega[1] * 0.5;
                let v = |h: f64| self.eval_j_unchecked(h) / h;
                let (v1, v2, v4) = (v(h0), v(h0 / 2.0), v(h0 / 4.0));
                let growing = v2 > 2.0 * v1.abs().max(1e-12) && v4 > 2.0 * v2;
                if growing {
                    return Err(Error::DivergentLimit);
                }
                Ok(2.0 * v4 - v2)
            }
        }
    }

    /// Leading power p of J(omega) ~ omega^p at low frequency.
    fn low_frequency_power(&self) -> f64 {
        match &self.family {
            SpectralFamily::Ohmic => 1.0,
            SpectralFamily::SuperOhmic { s } => *s,
            SpectralFamily::Tabulated { omega, .. } => {
                let h = omega[1] * 0.5;
                let j1 = self.eval_j_unchecked(h).max(1e-300);
                let j2 = self.eval_j_unchecked(h / 2.0).max(1e-300);
                (j1 / j2).ln() / 2f64.ln()
            }
        }
    }

    /// True when (J/omega) coth(beta omega/2) is infrared-divergent, i.e.
    /// whenever the low-frequency power is below 2 at finite temperature.
    fn mu_needs_cutoff(&self, beta: f64) -> bool {
        beta.is_finite() && self.low_frequency_power() < 2.0 - 1e-9
    }

    fn lower_limit(&self, beta: f64, what: &'static str) -> Result<f64> {
        if self.mu_needs_cutoff(beta) {
            match self.ir_cutoff {
                Some(a) if a > 0.0 => Ok(a),
                _ => Err(Error::InfraredDivergent(what)),
            }
        } else {
            Ok(self.ir_cutoff.unwrap_or(0.0))
        }
    }

    /// mu = (2/pi) int_0^inf (J(w)/w) coth(beta w / 2) dw, over
    /// [ir_cutoff, inf) when the integrand is infrared-divergent.
    /// `beta = f64::INFINITY` gives the zero-temperature value.
    pub fn mu_integral(&self, beta: f64) -> Result<f64> {
        let a = self.lower_limit(beta, "mu integral")?;
        let f = |w: f64| self.eval_j_unchecked(w) / w * thermal_coth(beta, w);
        let (val, _) = quad::semi_infinite(&f, a, self.omega_c, &self.quad);
        Ok(val * 2.0 / std::f64::consts::PI)
    }

    /// (2/pi) int (J/w) e^{-beta w} coth(beta w/2) dw, the exponentially
    /// weighted companion of mu entering the coherence Lamb shift. Same
    /// infrared behavior as mu.
    pub fn mu_exp_weighted(&self, beta: f64) -> Result<f64> {
        let a = self.lower_limit(beta, "exp-weighted mu integral")?;
        let f = |w: f64| self.eval_j_unchecked(w) / w * (-beta * w).exp() * thermal_coth(beta, w);
        let (val, _) = quad::semi_infinite(&f, a, self.omega_c, &self.quad);
        Ok(val * 2.0 / std::f64::consts::PI)
    }

    /// P.V. int_0^inf J(w) coth(beta w/2) [ 1/(w - de) - 1/(w + de) ] dw.
    ///
    /// The integrand is finite at w = 0 (J coth is bounded there), so no
    /// infrared cutoff is required; a configured cutoff still restricts the
    /// domain for consistency with the other regularized integrals.
    pub fn pv_lamb_shift(&self, beta: f64, delta_e: f64) -> Result<f64> {
        if delta_e <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "pv_lamb_shift requires delta_e > 0, got {delta_e}"
            )));
        }
        let a = self.ir_cutoff.unwrap_or(0.0);
        let top = self.quad.uv_factor * self.omega_c;
        let g = |w: f64| self.eval_j_unchecked(w) * thermal_coth(beta, w);
        let minus = |w: f64| g(w) / (w + delta_e);
        let (i_minus, _) = quad::adaptive(&minus, a, top, &self.quad);
        let i_plus = if delta_e > a && delta_e < top {
            let window = (delta_e / 2.0).min(self.omega_c / 10.0);
            let (v, _) = quad::principal_value(&g, a, top, delta_e, window, &self.quad);
            v
        } else {
            let kernel = |w: f64| g(w) / (w - delta_e);
            quad::adaptive(&kernel, a, top, &self.quad).0
        };
        Ok(i_plus - i_minus)
    }

    /// Overlap weight of the dressed bath vacuum,
    /// w1 = exp( -lambda^2 E_D^2 (4/pi) int_0^inf tanh(beta w/4) J(w)/w dw ).
    pub fn weight_w1(&self, params: &SystemParams) -> Result<f64> {
        params.validate()?;
        if params.lambda == 0.0 || params.e_d == 0.0 {
            return Ok(1.0);
        }
        let beta = params.beta;
        let f = |w: f64| (beta * w / 4.0).tanh() * self.eval_j_unchecked(w) / w;
        let (i, _) = quad::semi_infinite(&f, 0.0, self.omega_c, &self.quad);
        let exponent = params.lambda * params.lambda * params.e_d * params.e_d * 4.0
            / std::f64::consts::PI
            * i;
        Ok((-exponent).exp())
    }
}

/// coth(beta w / 2) with the zero-temperature limit built in.
pub fn thermal_coth(beta: f64, w: f64) -> f64 {
    if beta.is_finite() {
        quad::coth(beta * w / 2.0)
    } else {
        1.0
    }
}

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut h = vec![0.0; n - 1];
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            h[i] = x[i + 1] - x[i];
            delta[i] = (y[i + 1] - y[i]) / h[i];
        }
        let mut d = vec![0.0; n];
        d[0] = pchip_end_slope(
            h[0],
            h.get(1).copied().unwrap_or(h[0]),
            delta[0],
            delta.get(1).copied().unwrap_or(delta[0]),
        );
        d[n - 1] = pchip_end_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Pchip {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        }
    }

    fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if xq <= self.x[0] {
            return self.y[0];
        }
        if xq >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x[mid] <= xq {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.x[lo + 1] - self.x[lo];
        let t = (xq - self.x[lo]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[lo] + h10 * h * self.d[lo] + h01 * self.y[lo + 1] + h11 * h * self.d[lo + 1]
    }
}

fn pchip_end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    // one-sided three-point slope, clipped for shape preservation
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
