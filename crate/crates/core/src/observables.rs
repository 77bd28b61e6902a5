//! Transfer efficiency, initial donor states, and population fluctuations.

use crate::dynamics::PropagatorContext;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::model::{DAState, EffectiveSystem};
use ndarray::Array2;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DistributionKind {
    Incoherent,
    Coherent,
}

/// A probability distribution over the donor sites together with the kind
/// of superposition it seeds.
#[derive(Debug, Clone, Serialize)]
pub struct InitialDistribution {
    pub p: Vec<f64>,
    pub kind: DistributionKind,
}

impl InitialDistribution {
    pub fn new(p: Vec<f64>, kind: DistributionKind) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::DistributionInvalid("empty distribution".into()));
        }
        if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::DistributionInvalid(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::DistributionInvalid(format!(
                "probabilities sum to {s}, not 1"
            )));
        }
        Ok(InitialDistribution { p, kind })
    }

    pub fn uniform(n_d: usize, kind: DistributionKind) -> Self {
        InitialDistribution {
            p: vec![1.0 / n_d as f64; n_d],
            kind,
        }
    }

    /// Shannon entropy of the distribution, in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .p
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x * x.ln())
            .sum::<f64>()
    }
}

/// High/low-temperature regime tags for the efficiency report. The
/// crossover thresholds are beta * (e1 - e2) < 0.1 (high) and > 10 (low).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TemperatureRegime {
    High,
    Intermediate,
    Low,
}

impl TemperatureRegime {
    pub fn classify(beta: f64, gap: f64) -> Self {
        let x = beta * gap;
        if x < 0.1 {
            TemperatureRegime::High
        } else if x > 10.0 {
            TemperatureRegime::Low
        } else {
            TemperatureRegime::Intermediate
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyReport {
    /// Final donor population.
    pub p_d_inf: f64,
    /// Final acceptor population, 1 - p_d_inf.
    pub p_a_inf: f64,
    pub regime: TemperatureRegime,
    /// Entropy of the seeding distribution in nats (ln N_D for uniform).
    pub entropy: f64,
}

/// Builds the initial DA state from a donor distribution: a diagonal
/// mixture for the incoherent kind, the pure state sum_j sqrt(p_j) |D_j>
/// for the coherent kind. The acceptor block is empty.
pub fn make_initial_state(dist: &InitialDistribution, n_d: usize, n_a: usize) -> Result<DAState> {
    if dist.p.len() != n_d {
        return Err(Error::DistributionInvalid(format!(
            "distribution has {} entries for {} donor sites",
            dist.p.len(),
            n_d
        )));
    }
    // re-validate: constructors can be bypassed via struct literal
    InitialDistribution::new(dist.p.clone(), dist.kind)?;
    let n = n_d + n_a;
    let mut m: CMat = Array2::zeros((n, n));
    match dist.kind {
        DistributionKind::Incoherent => {
            for j in 0..n_d {
                m[[j, j]] = C64::new(dist.p[j], 0.0);
            }
        }
        DistributionKind::Coherent => {
            for j in 0..n_d {
                for k in 0..n_d {
                    m[[j, k]] = C64::new((dist.p[j] * dist.p[k]).sqrt(), 0.0);
                }
            }
        }
    }
    Ok(DAState::unchecked(n_d, n_a, m))
}

/// Thermal transfer factor F = (e^{-beta e1} alpha^2 + e^{-beta e2})
/// / ((1 + alpha^2)(e^{-beta e1} + e^{-beta e2})), evaluated stably for any
/// beta > 0. Ranges over (0, 1]; F -> 1/2 at high temperature and
/// F -> 1/(1 + alpha^2) at low temperature.
pub fn transfer_factor(eff: &EffectiveSystem, beta: f64) -> f64 {
    let a2 = eff.alpha * eff.alpha;
    let x = (-beta * (eff.e1 - eff.e2)).exp(); // e^{-beta(e1-e2)} <= 1
    (a2 * x + 1.0) / ((1.0 + a2) * (1.0 + x))
}

/// Final donor population for an incoherent initial donor state. It does
/// not depend on the distribution itself, only on N_D.
pub fn efficiency_incoherent(
    eff: &EffectiveSystem,
    beta: f64,
    n_d: usize,
) -> Result<EfficiencyReport> {
    if n_d < 1 {
        return Err(Error::InvalidParams("N_D must be >= 1".into()));
    }
    let f = transfer_factor(eff, beta);
    let p_d_inf = 1.0 - f / n_d as f64;
    Ok(EfficiencyReport {
        p_d_inf,
        p_a_inf: 1.0 - p_d_inf,
        regime: TemperatureRegime::classify(beta, eff.gap()),
        entropy: 0.0,
    })
}

/// Final donor population for a coherent superposition seeded by `p`:
/// the incoherent value improved by the delocalization factor
/// (sum_k sqrt(p_k))^2 <= N_D, with equality exactly for the uniform
/// distribution.
pub fn efficiency_coherent(
    eff: &EffectiveSystem,
    beta: f64,
    n_d: usize,
    p: &[f64],
) -> Result<EfficiencyReport> {
    let dist = InitialDistribution::new(p.to_vec(), DistributionKind::Coherent)?;
    if p.len() != n_d {
        return Err(Error::DistributionInvalid(format!(
            "distribution has {} entries for {} donor sites",
            p.len(),
            n_d
        )));
    }
    let coherence_weight: f64 = p.iter().map(|&x| x.sqrt()).sum::<f64>().powi(2);
    let f = transfer_factor(eff, beta);
    let p_d_inf = 1.0 - coherence_weight * f / n_d as f64;
    Ok(EfficiencyReport {
        p_d_inf,
        p_a_inf: 1.0 - p_d_inf,
        regime: TemperatureRegime::classify(beta, eff.gap()),
        entropy: dist.entropy(),
    })
}

/// Maximal final acceptor probability over all coherent seedings; attained
/// uniquely by the uniform distribution.
pub fn max_acceptor_probability(eff: &EffectiveSystem, beta: f64) -> f64 {
    transfer_factor(eff, beta)
}

/// alpha as a function of the reduced detuning eta = (E_D - E_A)/(2v):
/// alpha = -eta + sqrt(eta^2 + 1), strictly decreasing, with alpha(0) = 1.
pub fn alpha_of_eta(eta: f64) -> f64 {
    // equivalent form avoiding cancellation at large eta
    1.0 / (eta + (eta * eta + 1.0).sqrt())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PopulationPoint {
    pub t: f64,
    /// Donor population from the propagated density matrix.
    pub p_d: f64,
    /// Acceptor population from the propagated density matrix.
    pub p_a: f64,
    /// Donor population from the closed-form expression.
    pub p_d_closed: f64,
    /// Variance of the averaged single-site donor fluctuation.
    pub var_f: f64,
}

/// Populations along a time grid, via both the full propagator and the
/// closed form.
pub fn population_timeseries(
    ctx: &PropagatorContext,
    rho0: &DAState,
    grid: &[f64],
) -> Result<Vec<PopulationPoint>> {
    let n_d = ctx.params.n_d;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let rho = ctx.propagate(rho0, t)?;
        let p_d = rho.donor_population();
        let p_a = rho.acceptor_population();
        let p_d_closed = ctx.donor_population_closed(rho0, t)?;
        out.push(PopulationPoint {
            t,
            p_d,
            p_a,
            p_d_closed,
            var_f: fluctuation_variance(p_d, n_d)?,
        });
    }
    Ok(out)
}

/// Variance of the site-averaged donor population fluctuation,
/// Var(F) = p_D (1 - p_D) / N_D^2.
pub fn fluctuation_variance(p_d: f64, n_d: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::InvalidParams(format!("p_D = {p_d} outside [0, 1]")));
    }
    if n_d < 1 {
        return Err(Error::InvalidParams("N_D must be >= 1".into()));
    }
    Ok(p_d * (1.0 - p_d) / (n_d * n_d) as f64)
}

/// Closed-form single-site donor occupation mu(t) * N_D for the uniformly
/// coherent initial state |D><D|; every site carries mu(t)/N_D.
pub fn uniform_site_occupation(ctx: &PropagatorContext, t: f64) -> f64 {
    let alpha = ctx.eff.alpha;
    let a2 = alpha * alpha;
    let (w1, _w2) = ctx.gibbs;
    let e12 = ctx.res.eps(1, 2);
    let e13 = ctx.res.eps(1, 3);
    let f12 = 1.0 - (-t * e12.im).exp();
    let osc = 1.0 - (-t * e13.im).exp() * (t * e13.re).cos();
    1.0 - f12 * (1.0 - a2) / (1.0 + a2) * (1.0 / (1.0 + a2) - w1)
        - 2.0 * a2 / ((1.0 + a2) * (1.0 + a2)) * osc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{effective_reduction, SystemParams};
    use crate::spectral::SpectralModel;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(n_d: usize, n_a: usize) -> SystemParams {
        SystemParams {
            e_d: 1.0,
            e_a: -1.0,
            n_d,
            n_a,
            v: 0.5,
            g_d: 1.0,
            g_a: -1.0,
            lambda: 0.1,
            beta: 1.0,
        }
    }

    #[test]
    fn initial_states_by_kind() {
        // uniform coherent state is |D><D|
        let d = InitialDistribution::uniform(3, DistributionKind::Coherent);
        let rho = make_initial_state(&d, 3, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(rho.matrix[[i, j]].re, 1.0 / 3.0, epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(rho.acceptor_population(), 0.0, epsilon = 1e-15);
        // point mass: coherent and incoherent coincide
        let pm = vec![0.0, 1.0, 0.0];
        let a = make_initial_state(
            &InitialDistribution::new(pm.clone(), DistributionKind::Coherent).unwrap(),
            3,
            2,
        )
        .unwrap();
        let b = make_initial_state(
            &InitialDistribution::new(pm, DistributionKind::Incoherent).unwrap(),
            3,
            2,
        )
        .unwrap();
        assert!(crate::linalg::fro_norm(&(&a.matrix - &b.matrix)) < 1e-15);
        // two-site coherent off-diagonal is 1/2
        let c = make_initial_state(
            &InitialDistribution::new(vec![0.5, 0.5], DistributionKind::Coherent).unwrap(),
            2,
            1,
        )
        .unwrap();
        assert_abs_diff_eq!(c.matrix[[0, 1]].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn distribution_validation() {
        assert!(InitialDistribution::new(vec![0.5, 0.6], DistributionKind::Coherent).is_err());
        assert!(InitialDistribution::new(vec![-0.1, 1.1], DistributionKind::Coherent).is_err());
        assert!(InitialDistribution::new(vec![], DistributionKind::Coherent).is_err());
        let d = InitialDistribution::uniform(4, DistributionKind::Coherent);
        assert_abs_diff_eq!(d.entropy(), 4.0f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn incoherent_efficiency_limits() {
        let p = params(3, 2);
        let eff = effective_reduction(&p).unwrap();
        // high temperature: p_D -> 1 - 1/(2 N_D)
        let hot = efficiency_incoherent(&eff, 1e-9, 3).unwrap();
        assert_abs_diff_eq!(hot.p_d_inf, 1.0 - 1.0 / 6.0, epsilon = 1e-8);
        assert_eq!(hot.regime, TemperatureRegime::High);
        // low temperature: p_D -> 1 - 1/(N_D (1 + alpha^2))
        let cold = efficiency_incoherent(&eff, 1e9, 3).unwrap();
        let a2 = eff.alpha * eff.alpha;
        assert_abs_diff_eq!(
            cold.p_d_inf,
            1.0 - 1.0 / (3.0 * (1.0 + a2)),
            epsilon = 1e-12
        );
        assert_eq!(cold.regime, TemperatureRegime::Low);
        // N_D = 1 at high temperature gives 1/2
        let single = efficiency_incoherent(&eff, 1e-9, 1).unwrap();
        assert_abs_diff_eq!(single.p_d_inf, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn coherent_uniform_attains_the_maximum() {
        let p = params(4, 2);
        let eff = effective_reduction(&p).unwrap();
        let uni = efficiency_coherent(&eff, 2.0, 4, &[0.25; 4]).unwrap();
        assert_abs_diff_eq!(
            uni.p_a_inf,
            max_acceptor_probability(&eff, 2.0),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(uni.entropy, 4.0f64.ln(), epsilon = 1e-14);
        // point mass reduces to the incoherent value
        let pm = efficiency_coherent(&eff, 2.0, 4, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let inc = efficiency_incoherent(&eff, 2.0, 4).unwrap();
        assert_abs_diff_eq!(pm.p_d_inf, inc.p_d_inf, epsilon = 1e-14);
    }

    #[test]
    fn deep_detuning_low_temperature_depletes_the_donor() {
        // v << Delta and T << Delta: coherent uniform transfer ~ complete
        let mut p = params(4, 4);
        p.e_d = 10.0;
        p.e_a = -10.0;
        p.v = 0.25; // v_eff = 1, eta = 10
        p.beta = 1e3;
        let eff = effective_reduction(&p).unwrap();
        let uni = efficiency_coherent(&eff, p.beta, 4, &[0.25; 4]).unwrap();
        let a2 = eff.alpha * eff.alpha;
        assert_abs_diff_eq!(uni.p_d_inf, a2 / (1.0 + a2), epsilon = 1e-10);
        assert!(uni.p_d_inf < 3e-3);
    }

    #[test]
    fn alpha_of_eta_values_and_monotonicity() {
        assert_abs_diff_eq!(alpha_of_eta(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(alpha_of_eta(0.75), 0.5, epsilon = 1e-15);
        let mut prev = alpha_of_eta(0.0);
        for i in 1..=1000 {
            let a = alpha_of_eta(0.1 * i as f64);
            assert!(a < prev && a > 0.0);
            prev = a;
        }
        // agrees with the effective reduction
        let p = params(2, 3);
        let eff = effective_reduction(&p).unwrap();
        let eta = (p.e_d - p.e_a) / (2.0 * eff.v);
        assert_abs_diff_eq!(eff.alpha, alpha_of_eta(eta), epsilon = 1e-14);
    }

    #[test]
    fn fluctuation_variance_values() {
        assert_eq!(fluctuation_variance(1.0, 5).unwrap(), 0.0);
        assert_abs_diff_eq!(
            fluctuation_variance(0.5, 10).unwrap(),
            1.0 / 400.0,
            epsilon = 1e-18
        );
        assert!(fluctuation_variance(1.2, 3).is_err());
    }

    #[test]
    fn timeseries_consistency_with_closed_forms() {
        let p = params(3, 2);
        let model = SpectralModel::ohmic(0.5, 10.0).with_ir_cutoff(1e-6);
        let ctx = crate::dynamics::PropagatorContext::new(p, &model).unwrap();
        let dist = InitialDistribution::uniform(3, DistributionKind::Coherent);
        let rho0 = make_initial_state(&dist, 3, 2).unwrap();
        // donor-only start
        let series = population_timeseries(&ctx, &rho0, &[0.0, 1.0, 5.0]).unwrap();
        assert_abs_diff_eq!(series[0].p_d, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(series[0].p_a, 0.0, epsilon = 1e-13);
        for pt in &series {
            assert_abs_diff_eq!(pt.p_d, pt.p_d_closed, epsilon = 1e-10);
            assert_abs_diff_eq!(pt.p_d + pt.p_a, 1.0, epsilon = 1e-12);
        }
        // long-time value matches the coherent closed form
        let gamma = ctx.res.min_positive_decay();
        let t_inf = 30.0 / gamma;
        let series = population_timeseries(&ctx, &rho0, &[t_inf]).unwrap();
        let expect = efficiency_coherent(&ctx.eff, ctx.params.beta, 3, &[1.0 / 3.0; 3]).unwrap();
        assert_abs_diff_eq!(series[0].p_d, expect.p_d_inf, epsilon = 1e-10);
        // single-site occupation tracks the uniform closed form
        for &t in &[0.0, 0.7, 4.0] {
            let mu = uniform_site_occupation(&ctx, t);
            let rho = ctx.propagate(&rho0, t).unwrap();
            assert_abs_diff_eq!(rho.matrix[[0, 0]].re * 3.0, mu, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_site_variance_identity_for_uniform_start() {
        // for the uniformly coherent start every site carries mu(t)/N_D, so
        // the single-site variance is (mu/N)(1 - mu/N), an O(1/N_D) quantity
        let model = SpectralModel::ohmic(0.5, 10.0).with_ir_cutoff(1e-6);
        let v_eff = 0.7;
        for n_d in [4usize, 8, 16] {
            let mut p = params(n_d, 2);
            p.v = v_eff / ((n_d * 2) as f64).sqrt();
            let ctx = crate::dynamics::PropagatorContext::new(p, &model).unwrap();
            let dist = InitialDistribution::uniform(n_d, DistributionKind::Coherent);
            let rho0 = make_initial_state(&dist, n_d, 2).unwrap();
            let t = 1.3;
            let rho = ctx.propagate(&rho0, t).unwrap();
            let mu = uniform_site_occupation(&ctx, t);
            for k in 0..n_d {
                let occ = rho.matrix[[k, k]].re;
                assert_abs_diff_eq!(occ, mu / n_d as f64, epsilon = 1e-10);
                let site_var = occ * (1.0 - occ);
                assert_abs_diff_eq!(
                    site_var * n_d as f64,
                    mu * (1.0 - mu / n_d as f64),
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn rabi_limit_at_zero_coupling() {
        // lambda = 0, N_D = N_A = 1, rho0 = |D><D|: exact two-site Rabi
        let mut p = params(1, 1);
        p.lambda = 0.0;
        let model = SpectralModel::ohmic(0.5, 10.0);
        let ctx = crate::dynamics::PropagatorContext::new(p, &model).unwrap();
        let dist = InitialDistribution::uniform(1, DistributionKind::Coherent);
        let rho0 = make_initial_state(&dist, 1, 1).unwrap();
        let omega = ctx.eff.gap();
        let v = ctx.eff.v;
        for &t in &[0.3, 1.7, 9.2] {
            let series = population_timeseries(&ctx, &rho0, &[t]).unwrap();
            // p_D(t) = 1 - (4 v^2 / Omega^2) sin^2(Omega t / 2)
            let expect = 1.0 - 4.0 * v * v / (omega * omega) * (omega * t / 2.0).sin().powi(2);
            assert_abs_diff_eq!(series[0].p_d, expect, epsilon = 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn coherent_never_loses_to_incoherent(
            raw in proptest::collection::vec(1e-6f64..1.0, 2..6),
            beta in 0.01f64..50.0,
        ) {
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let n_d = p.len();
            let sp = params(n_d, 2);
            let eff = effective_reduction(&sp).unwrap();
            let coh = efficiency_coherent(&eff, beta, n_d, &p).unwrap();
            let inc = efficiency_incoherent(&eff, beta, n_d).unwrap();
            prop_assert!(coh.p_d_inf <= inc.p_d_inf + 1e-12);
            // interior distributions are strictly better
            let spread = p.iter().filter(|&&x| x > 1e-9).count();
            if spread > 1 {
                prop_assert!(coh.p_d_inf < inc.p_d_inf);
            }
        }

        #[test]
        fn incoherent_efficiency_ignores_distribution_shape(
            beta in 0.01f64..100.0,
            n_d in 1usize..30,
        ) {
            let sp = params(n_d, 2);
            let eff = effective_reduction(&sp).unwrap();
            let a = efficiency_incoherent(&eff, beta, n_d).unwrap();
            prop_assert!(a.p_d_inf >= 0.0 && a.p_d_inf <= 1.0);
            // variance scale: Var(F) = p(1-p)/N^2
            let var = fluctuation_variance(a.p_d_inf, n_d).unwrap();
            prop_assert!((var * (n_d * n_d) as f64
                - a.p_d_inf * (1.0 - a.p_d_inf)).abs() < 1e-15);
        }
    }
}
