//! Complex resonance energies of the four invariant density-matrix sectors.
//!
//! Sector labels follow the block decomposition of the doubled (left/right)
//! DA space: sector 1 acts inside the two-level span, sectors 2 and 3 mix
//! the span with the donor/acceptor complements, sector 4 acts inside the
//! complements. For each sector there are four resonances; the imaginary
//! part is a decay rate proportional to lambda^2, the real part an
//! oscillation frequency including second-order Lamb shifts.
//!
//! Decay rates probe only J~(0) and J(e1 - e2) with thermal occupation
//! factors. Real shifts additionally need the mu integral, which is
//! infrared-divergent for ohmic baths at positive temperature: in that case
//! the rates are still produced, with the shifts flagged unavailable unless
//! an infrared cutoff regularizes them.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::{EffectiveSystem, SystemParams};
use crate::spectral::{thermal_coth, SpectralModel};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceSet {
    /// eps[j-1][s-1] for sector j = 1..4, index s = 1..4.
    eps: [[(f64, f64); 4]; 4],
    pub multiplicities: [[usize; 4]; 4],
    /// Whether the real part of each entry depends on the mu-family
    /// integrals.
    pub mu_dependent: [[bool; 4]; 4],
    /// False when the mu-family integrals diverge and no infrared cutoff was
    /// configured; decay rates are still valid, real Lamb shifts are not.
    pub lamb_shifts_available: bool,
    /// True when an infrared cutoff was applied to the mu-family integrals.
    pub regularized: bool,
    /// Level splitting e1 - e2 of the effective system.
    pub gap: f64,
}

/// One row of the machine-readable resonance report.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceEntry {
    pub sector: usize,
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub regularized: bool,
}

impl ResonanceSet {
    /// Resonance energy for sector `j` and index `s`, both 1-based.
    pub fn eps(&self, j: usize, s: usize) -> C64 {
        assert!((1..=4).contains(&j) && (1..=4).contains(&s));
        let (re, im) = self.eps[j - 1][s - 1];
        C64::new(re, im)
    }

    /// Smallest strictly positive decay rate across all sectors.
    pub fn min_positive_decay(&self) -> f64 {
        let mut min = f64::INFINITY;
        for row in &self.eps {
            for &(_, im) in row {
                if im > 0.0 && im < min {
                    min = im;
                }
            }
        }
        min
    }

    pub fn entries(&self) -> Vec<ResonanceEntry> {
        let mut out = Vec::with_capacity(16);
        for j in 1..=4 {
            for s in 1..=4 {
                let (re, im) = self.eps[j - 1][s - 1];
                out.push(ResonanceEntry {
                    sector: j,
                    index: s,
                    re,
                    im,
                    multiplicity: self.multiplicities[j - 1][s - 1],
                    regularized: self.regularized && self.mu_dependent[j - 1][s - 1],
                });
            }
        }
        out
    }
}

/// Relaxation coefficient of the population sector written as a single
/// rate,
///
/// ```text
/// gamma0 = (8/beta)(G11^2 + G22^2) J~(0)
///          + 4 G12^2 coth(beta|e1-e2|/2) J(|e1-e2|),
/// ```
///
/// with G the coupling matrix in the dressed basis. The identity
/// `Im eps_1^(2) = lambda^2 gamma0` holds exactly; the redundant assembly
/// is kept as a consistency check on the rate formulas.
pub fn gamma0(eff: &EffectiveSystem, model: &SpectralModel, beta: f64) -> Result<f64> {
    let a = eff.gbar;
    let gap = eff.gap();
    let jt0 = model.j_tilde_zero()?;
    let jde = model.eval_j(gap)?;
    Ok(8.0 / beta * (a[0][0] * a[0][0] + a[1][1] * a[1][1]) * jt0
        + 4.0 * a[0][1] * a[0][1] * thermal_coth(beta, gap) * jde)
}

/// Computes all sixteen resonance energies.
pub fn compute_resonances(
    params: &SystemParams,
    eff: &EffectiveSystem,
    model: &SpectralModel,
) -> Result<ResonanceSet> {
    params.validate()?;
    let beta = params.beta;
    let lam2 = params.lambda * params.lambda;
    let a = eff.gbar;
    let (a11, a22, a12) = (a[0][0], a[1][1], a[0][1]);
    let gap = eff.gap();

    let jt0 = model.j_tilde_zero()?;
    let jde = model.eval_j(gap)?;
    let cth = thermal_coth(beta, gap);
    // occupation factors 1/|1 - e^{-beta gap}| and 1/|1 - e^{+beta gap}|
    let x = (-beta * gap).exp();
    let occ_down = 1.0 / (1.0 - x);
    let occ_up = x / (1.0 - x);

    // Lamb-shift ingredients; skipped entirely at lambda = 0 where every
    // shift carries a factor lambda^2 anyway.
    let (mu, mu_exp, pv, shifts_available) = if lam2 == 0.0 {
        (0.0, 0.0, 0.0, true)
    } else {
        match model.mu_integral(beta) {
            Ok(mu) => {
                let mu_exp = model.mu_exp_weighted(beta)?;
                let pv = model.pv_lamb_shift(beta, gap)?;
                (mu, mu_exp, pv, true)
            }
            Err(Error::InfraredDivergent(_)) => (0.0, 0.0, 0.0, false),
            Err(e) => return Err(e),
        }
    };

    let rate_pop =
        4.0 * lam2 * (2.0 / beta * (a11 * a11 + a22 * a22) * jt0 + a12 * a12 * cth * jde);
    let y12 =
        2.0 / beta * (a11 * a11 + a22 * a22 + 2.0 * a12 * a12) * jt0 + 2.0 * a12 * a12 * cth * jde;
    let x12 = (a22 * a22 - a11 * a11) * mu
        - a12 * a12 * mu_exp
        - 2.0 / std::f64::consts::PI * a12 * a12 * pv;

    // sector-2 rates; the same imaginary parts serve s=1/3 and s=2/4
    let im_upper = 2.0 * lam2 * (1.0 / beta * a11 * a11 * jt0 + a12 * a12 * jde * occ_down);
    let im_lower = 2.0 * lam2 * (1.0 / beta * a22 * a22 * jt0 + a12 * a12 * jde * occ_up);
    let shift = |g: f64, adiag: f64| lam2 * (g * g - adiag * adiag) * mu;

    let eps2 = [
        (eff.e1 - params.e_d + shift(params.g_d, a11), im_upper),
        (eff.e2 - params.e_d + shift(params.g_d, a22), im_lower),
        (eff.e1 - params.e_a + shift(params.g_a, a11), im_upper),
        (eff.e2 - params.e_a + shift(params.g_a, a22), im_lower),
    ];
    let eps3 = eps2.map(|(re, im)| (-re, im));

    let eps4_3 =
        params.e_d - params.e_a - lam2 * (params.e_d * params.e_d - params.e_a * params.e_a) * mu;

    let eps = [
        [
            (0.0, 0.0),
            (0.0, rate_pop),
            (gap + lam2 * x12, lam2 * y12),
            (-gap - lam2 * x12, lam2 * y12),
        ],
        eps2,
        eps3,
        [(0.0, 0.0), (0.0, 0.0), (eps4_3, 0.0), (-eps4_3, 0.0)],
    ];

    let (nd, na) = (params.n_d, params.n_a);
    let multiplicities = [
        [1, 1, 1, 1],
        [nd - 1, nd - 1, na - 1, na - 1],
        [nd - 1, nd - 1, na - 1, na - 1],
        [
            (nd - 1) * (nd - 1),
            (na - 1) * (na - 1),
            (nd - 1) * (na - 1),
            (nd - 1) * (na - 1),
        ],
    ];
    let mu_dependent = [
        [false, false, true, true],
        [true, true, true, true],
        [true, true, true, true],
        [false, false, true, true],
    ];

    Ok(ResonanceSet {
        eps,
        multiplicities,
        mu_dependent,
        lamb_shifts_available: shifts_available,
        regularized: shifts_available && lam2 > 0.0 && model.ir_cutoff.is_some(),
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::effective_reduction;
    use approx::assert_abs_diff_eq;

    fn params() -> SystemParams {
        SystemParams {
            e_d: 1.0,
            e_a: -1.0,
            n_d: 2,
            n_a: 3,
            v: 0.5,
            g_d: 1.0,
            g_a: -1.0,
            lambda: 0.1,
            beta: 1.0,
        }
    }

    fn model() -> SpectralModel {
        SpectralModel::ohmic(0.5, 10.0).with_ir_cutoff(1e-6)
    }

    #[test]
    fn free_limit_at_zero_coupling() {
        let mut p = params();
        p.lambda = 0.0;
        let eff = effective_reduction(&p).unwrap();
        // no infrared cutoff needed at lambda = 0
        let m = SpectralModel::ohmic(0.5, 10.0);
        let r = compute_resonances(&p, &eff, &m).unwrap();
        assert_eq!(r.eps(1, 2), C64::new(0.0, 0.0));
        assert_abs_diff_eq!(r.eps(1, 3).re, eff.gap(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.eps(2, 1).re, eff.e1 - p.e_d, epsilon = 1e-14);
        assert_abs_diff_eq!(r.eps(4, 3).re, p.e_d - p.e_a, epsilon = 1e-14);
        for j in 1..=4 {
            for s in 1..=4 {
                assert_eq!(r.eps(j, s).im, 0.0);
            }
        }
        assert!(r.lamb_shifts_available);
    }

    #[test]
    fn equal_weights_give_pure_dephasing_coherence_rate() {
        let mut p = params();
        p.g_a = p.g_d;
        let eff = effective_reduction(&p).unwrap();
        assert_abs_diff_eq!(eff.gbar[0][1], 0.0, epsilon = 1e-15);
        let m = model();
        let r = compute_resonances(&p, &eff, &m).unwrap();
        let lam2 = p.lambda * p.lambda;
        let jt0 = m.j_tilde_zero().unwrap();
        let expect =
            lam2 * (2.0 / p.beta) * (eff.gbar[0][0].powi(2) + eff.gbar[1][1].powi(2)) * jt0;
        assert_abs_diff_eq!(r.eps(1, 3).im, expect, epsilon = 1e-15);
    }

    #[test]
    fn conjugation_and_reality_structure() {
        let p = params();
        let eff = effective_reduction(&p).unwrap();
        let r = compute_resonances(&p, &eff, &model()).unwrap();
        assert_eq!(r.eps(1, 1), C64::new(0.0, 0.0));
        assert_eq!(r.eps(4, 1), C64::new(0.0, 0.0));
        assert_eq!(r.eps(4, 2), C64::new(0.0, 0.0));
        for s in 1..=4 {
            let e2 = r.eps(2, s);
            let e3 = r.eps(3, s);
            assert_eq!(e3, -e2.conj());
        }
        assert_eq!(r.eps(4, 4), -r.eps(4, 3).conj());
        assert_eq!(r.eps(1, 4), -r.eps(1, 3).conj());
        assert_eq!(r.eps(4, 3).im, 0.0);
        for j in 1..=4 {
            for s in 1..=4 {
                assert!(r.eps(j, s).im >= 0.0);
            }
        }
    }

    #[test]
    fn population_rate_matches_gamma0_identity() {
        let p = params();
        let eff = effective_reduction(&p).unwrap();
        let m = model();
        let r = compute_resonances(&p, &eff, &m).unwrap();
        let g0 = gamma0(&eff, &m, p.beta).unwrap();
        let lhs = r.eps(1, 2).im;
        let rhs = p.lambda * p.lambda * g0;
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-30));
    }

    #[test]
    fn rates_scale_exactly_as_lambda_squared() {
        let p = params();
        let eff = effective_reduction(&p).unwrap();
        let m = model();
        let r1 = compute_resonances(&p, &eff, &m).unwrap();
        let mut p2 = p;
        p2.lambda = 2.0 * p.lambda;
        let r2 = compute_resonances(&p2, &eff, &m).unwrap();
        for j in 1..=4 {
            for s in 1..=4 {
                assert_eq!(r2.eps(j, s).im, 4.0 * r1.eps(j, s).im);
            }
        }
    }

    #[test]
    fn depends_on_site_counts_only_through_v_eff() {
        let mut p1 = params();
        p1.n_d = 2;
        p1.n_a = 2;
        p1.v = 0.5;
        let mut p2 = params();
        p2.n_d = 8;
        p2.n_a = 2;
        p2.v = 0.25; // same v_eff = 1.0
        assert_abs_diff_eq!(p1.v_eff(), p2.v_eff(), epsilon = 1e-15);
        let m = model();
        let r1 = compute_resonances(&p1, &effective_reduction(&p1).unwrap(), &m).unwrap();
        let r2 = compute_resonances(&p2, &effective_reduction(&p2).unwrap(), &m).unwrap();
        for j in 1..=4 {
            for s in 1..=4 {
                let d = (r1.eps(j, s) - r2.eps(j, s)).norm();
                assert!(
                    d <= 1e-14 * r1.eps(j, s).norm().max(1.0),
                    "sector {j} index {s}"
                );
            }
        }
    }

    #[test]
    fn occupation_factors_obey_detailed_balance_identity() {
        let p = params();
        let eff = effective_reduction(&p).unwrap();
        let gap = eff.gap();
        let x = (-p.beta * gap).exp();
        let occ_down = 1.0 / (1.0 - x);
        let occ_up = x / (1.0 - x);
        assert_abs_diff_eq!(
            occ_down + occ_up,
            thermal_coth(p.beta, gap),
            epsilon = 1e-12
        );
    }

    #[test]
    fn divergent_mu_keeps_rates_and_drops_shifts() {
        let mut p = params();
        p.e_a = -0.4; // asymmetric so E_D^2 - E_A^2 does not vanish
        let eff = effective_reduction(&p).unwrap();
        let m = SpectralModel::ohmic(0.5, 10.0); // no cutoff
        let r = compute_resonances(&p, &eff, &m).unwrap();
        assert!(!r.lamb_shifts_available);
        assert!(!r.regularized);
        assert!(r.eps(1, 2).im > 0.0);
        assert_abs_diff_eq!(r.eps(4, 3).re, p.e_d - p.e_a, epsilon = 1e-15);
        // with a cutoff the shifts appear and entries are flagged
        let r2 = compute_resonances(&p, &eff, &model()).unwrap();
        assert!(r2.lamb_shifts_available && r2.regularized);
        assert!((r2.eps(4, 3).re - (p.e_d - p.e_a)).abs() > 0.0);
        let entries = r2.entries();
        assert_eq!(entries.len(), 16);
        assert!(entries.iter().any(|e| e.regularized));
        assert!(entries
            .iter()
            .filter(|e| e.sector == 1 && e.index <= 2)
            .all(|e| !e.regularized));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn structure_holds_across_random_parameters(
            e_d in -1.5f64..1.5,
            detune in 0.05f64..2.5,
            v in 0.1f64..0.9,
            g_d in -1.2f64..1.2,
            g_a in -1.2f64..1.2,
            lambda in 0.0f64..0.3,
            beta in 0.05f64..20.0,
        ) {
            let p = SystemParams {
                e_d,
                e_a: e_d - detune,
                n_d: 2,
                n_a: 3,
                v,
                g_d,
                g_a,
                lambda,
                beta,
            };
            let eff = effective_reduction(&p).unwrap();
            let m = SpectralModel::ohmic(0.5, 10.0).with_ir_cutoff(1e-6);
            let r = compute_resonances(&p, &eff, &m).unwrap();
            for j in 1..=4 {
                for s in 1..=4 {
                    proptest::prop_assert!(r.eps(j, s).im >= 0.0);
                }
            }
            for s in 1..=4 {
                proptest::prop_assert_eq!(r.eps(3, s), -r.eps(2, s).conj());
            }
            proptest::prop_assert_eq!(r.eps(1, 4), -r.eps(1, 3).conj());
            proptest::prop_assert_eq!(r.eps(4, 4), -r.eps(4, 3).conj());
            proptest::prop_assert_eq!(r.eps(1, 1), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn multiplicities_match_block_dimensions() {
        let p = params(); // N_D = 2, N_A = 3
        let eff = effective_reduction(&p).unwrap();
        let r = compute_resonances(&p, &eff, &model()).unwrap();
        assert_eq!(r.multiplicities[1], [1, 1, 2, 2]);
        assert_eq!(r.multiplicities[3], [1, 4, 2, 2]);
    }
}
