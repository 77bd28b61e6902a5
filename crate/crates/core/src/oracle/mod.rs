//! Independent reference computations.
//!
//! Everything in this module is built without touching the resonance or
//! propagator code paths, so agreement between the two is a genuine
//! cross-check: exact unitary propagation for the uncoupled system, the
//! exactly solvable dephasing sector, a Redfield generator for the
//! effective two-level system, and brute-force propagation of a truncated
//! discrete-mode bath.

mod redfield;
mod truncated;

pub use redfield::{redfield_generator, redfield_reference, redfield_stationary};
pub use truncated::{
    stationarity_check, truncated_bath_evolution, truncated_bath_reduced_states, PopulationSample,
    TruncatedBath,
};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::model::{DAState, SystemParams};
use crate::quad;
use crate::spectral::{thermal_coth, SpectralModel};

/// Dimension cap for dense eigendecomposition-based propagation.
pub const UNITARY_DIM_CAP: usize = 64;

/// Exact propagation rho(t) = e^{-i t H} rho0 e^{i t H} by dense
/// eigendecomposition of the (Hermitian) Hamiltonian.
pub fn unitary_reference(h_s: &CMat, rho0: &DAState, t: f64) -> Result<DAState> {
    let n = h_s.nrows();
    if n > UNITARY_DIM_CAP {
        return Err(Error::DimensionTooLarge {
            dim: n,
            cap: UNITARY_DIM_CAP,
        });
    }
    if rho0.dim() != n {
        return Err(Error::InvalidState(format!(
            "state dimension {} does not match Hamiltonian dimension {n}",
            rho0.dim()
        )));
    }
    let u = linalg::unitary_exp(h_s, t);
    let out = u.dot(&rho0.matrix).dot(&linalg::dagger(&u));
    Ok(DAState::unchecked(rho0.n_d, rho0.n_a, out))
}

/// Phase integral of the exactly solvable dephasing sector:
/// (2/pi) int_0^inf J(w) (w t - sin w t) / w^2 dw.
pub fn ibm_phase_integral(model: &SpectralModel, t: f64) -> f64 {
    let top = model.quad.uv_factor * model.omega_c;
    let f = |w: f64| {
        let j = model.eval_j(w).unwrap_or(0.0);
        j * (w * t - (w * t).sin()) / (w * w)
    };
    let (i, _) = quad::oscillatory(&f, 0.0, top, t, &model.quad);
    i * 2.0 / std::f64::consts::PI
}

/// Decoherence integral of the dephasing sector:
/// (2/pi) int_0^inf J(w) coth(beta w/2) (1 - cos w t) / w^2 dw.
pub fn ibm_decoherence_integral(model: &SpectralModel, beta: f64, t: f64) -> f64 {
    let top = model.quad.uv_factor * model.omega_c;
    let f = |w: f64| {
        let j = model.eval_j(w).unwrap_or(0.0);
        j * thermal_coth(beta, w) * (1.0 - (w * t).cos()) / (w * w)
    };
    let (i, _) = quad::oscillatory(&f, 0.0, top, t, &model.quad);
    i * 2.0 / std::f64::consts::PI
}

/// Long-time decoherence exponent (2/pi) int J coth(beta w/2) / w^2 dw,
/// finite for spectral densities vanishing faster than w^2 at the origin.
pub fn ibm_plateau_exponent(model: &SpectralModel, beta: f64) -> f64 {
    let top = model.quad.uv_factor * model.omega_c;
    let f = |w: f64| {
        let j = model.eval_j(w).unwrap_or(0.0);
        j * thermal_coth(beta, w) / (w * w)
    };
    let (i, _) = quad::adaptive(&f, 0.0, top, &model.quad);
    i * 2.0 / std::f64::consts::PI
}

/// Exact coherence factor of the donor-acceptor complement sector, which is
/// a pure dephasing problem solvable by a bath displacement for any
/// coupling strength:
///
/// C(t) = e^{i (E_D - E_A) t}
///        e^{-i lambda^2 (E_D^2 - E_A^2) Phi(t)}
///        e^{-lambda^2 (E_D - E_A)^2 Gamma(t)},
///
/// with Phi and Gamma the phase and decoherence integrals above. The
/// second-order frequency shift is negative for E_D^2 > E_A^2, matching the
/// sign of the corresponding resonance shift.
pub fn independent_boson_coherence(
    params: &SystemParams,
    model: &SpectralModel,
    t: f64,
) -> Result<C64> {
    params.validate()?;
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let lam2 = params.lambda * params.lambda;
    let de = params.e_d - params.e_a;
    let de2 = params.e_d * params.e_d - params.e_a * params.e_a;
    if de == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let phi = ibm_phase_integral(model, t);
    let gamma = ibm_decoherence_integral(model, params.beta, t);
    let phase = de * t - lam2 * de2 * phi;
    let damp = (-lam2 * de * de * gamma).exp();
    Ok(C64::from_polar(damp, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    fn simple_params(lambda: f64) -> SystemParams {
        SystemParams {
            e_d: 1.0,
            e_a: -0.5,
            n_d: 2,
            n_a: 2,
            v: 0.4,
            g_d: 1.0,
            g_a: -1.0,
            lambda,
            beta: 1.0,
        }
    }

    #[test]
    fn unitary_reference_identity_and_commuting_cases() {
        let n = 3;
        let mut h: CMat = Array2::zeros((n, n));
        h[[0, 0]] = C64::new(1.0, 0.0);
        h[[1, 1]] = C64::new(2.0, 0.0);
        h[[2, 2]] = C64::new(-1.0, 0.0);
        let mut m: CMat = Array2::zeros((n, n));
        m[[0, 0]] = C64::new(0.2, 0.0);
        m[[1, 1]] = C64::new(0.5, 0.0);
        m[[2, 2]] = C64::new(0.3, 0.0);
        let rho0 = DAState::unchecked(2, 1, m);
        let out = unitary_reference(&h, &rho0, 0.0).unwrap();
        assert!(linalg::fro_norm(&(&out.matrix - &rho0.matrix)) < 1e-15);
        // diagonal rho commutes with diagonal H: frozen for all t
        let out = unitary_reference(&h, &rho0, 7.3).unwrap();
        assert!(linalg::fro_norm(&(&out.matrix - &rho0.matrix)) < 1e-13);
    }

    #[test]
    fn unitary_reference_conserves_trace_and_spectrum() {
        let mut h: CMat = Array2::zeros((2, 2));
        h[[0, 0]] = C64::new(0.7, 0.0);
        h[[0, 1]] = C64::new(0.3, 0.0);
        h[[1, 0]] = C64::new(0.3, 0.0);
        h[[1, 1]] = C64::new(-0.7, 0.0);
        let mut m: CMat = Array2::zeros((2, 2));
        m[[0, 0]] = C64::new(0.9, 0.0);
        m[[1, 1]] = C64::new(0.1, 0.0);
        let rho0 = DAState::unchecked(1, 1, m);
        let out = unitary_reference(&h, &rho0, 3.1).unwrap();
        assert_abs_diff_eq!(out.trace().re, 1.0, epsilon = 1e-13);
        let (lam, _) = linalg::hermitian_eigen(&out.matrix);
        assert_abs_diff_eq!(lam[0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(lam[1], 0.9, epsilon = 1e-12);
    }

    #[test]
    fn unitary_reference_rejects_large_dimensions() {
        let n = 65;
        let h: CMat = Array2::zeros((n, n));
        let rho0 = DAState::unchecked(60, 5, Array2::zeros((n, n)));
        assert!(matches!(
            unitary_reference(&h, &rho0, 1.0),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn coherence_starts_at_one() {
        let p = simple_params(0.3);
        let m = SpectralModel::super_ohmic(0.7, 2.0, 3.0);
        let c = independent_boson_coherence(&p, &m, 0.0).unwrap();
        assert!((c - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_levels_give_pure_phase_free_evolution() {
        let mut p = simple_params(0.5);
        p.e_a = p.e_d;
        let m = SpectralModel::ohmic(1.0, 3.0);
        for &t in &[0.5, 3.0, 20.0] {
            let c = independent_boson_coherence(&p, &m, t).unwrap();
            assert!((c.norm() - 1.0).abs() < 1e-12);
            assert!((c - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn super_ohmic_plateau_matches_independent_quadrature() {
        let p = simple_params(0.4);
        let m = SpectralModel::super_ohmic(0.8, 1.5, 3.0);
        // the decoherence integral saturates; compare its large-t value with
        // the plateau exponent computed by a separate quadrature
        let g_inf = ibm_plateau_exponent(&m, p.beta);
        let t_large = 400.0 / m.omega_c;
        let g_t = ibm_decoherence_integral(&m, p.beta, t_large);
        assert!(
            (g_t - g_inf).abs() <= 1e-4 * g_inf.abs().max(1e-12),
            "plateau mismatch: {g_t} vs {g_inf}"
        );
        let c = independent_boson_coherence(&p, &m, t_large).unwrap();
        let expect = (-p.lambda * p.lambda * (p.e_d - p.e_a).powi(2) * g_inf).exp();
        assert!((c.norm() - expect).abs() < 1e-4 * expect);
    }

    #[test]
    fn frequency_shift_sign_is_negative_for_positive_energy_difference() {
        // E_D^2 > E_A^2 and mu > 0: the dressed oscillation frequency sits
        // below the bare splitting
        let p = simple_params(0.3);
        let m = SpectralModel::super_ohmic(0.8, 1.5, 3.0);
        let (t1, t2) = (60.0, 61.0);
        let c1 = independent_boson_coherence(&p, &m, t1).unwrap();
        let c2 = independent_boson_coherence(&p, &m, t2).unwrap();
        let dphase = (c2 * c1.conj()).arg();
        let bare = (p.e_d - p.e_a) * (t2 - t1);
        assert!(dphase < bare, "shift {dphase} not below bare {bare}");
    }
}
