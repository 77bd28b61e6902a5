//! Browser bindings: population dynamics, the efficiency landscape, and
//! the resonance table, driven from plain slider values.

use datrans_core::observables::{
    self, alpha_of_eta, efficiency_coherent, efficiency_incoherent, max_acceptor_probability,
    DistributionKind, InitialDistribution,
};
use datrans_core::{PropagatorContext, SpectralModel, SystemParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[allow(clippy::too_many_arguments)]
fn build_params(
    e_d: f64,
    e_a: f64,
    n_d: u32,
    n_a: u32,
    v: f64,
    g_d: f64,
    g_a: f64,
    lambda: f64,
    beta: f64,
) -> SystemParams {
    SystemParams {
        e_d,
        e_a,
        n_d: n_d as usize,
        n_a: n_a as usize,
        v,
        g_d,
        g_a,
        lambda,
        beta,
    }
}

fn build_model(bath_eta: f64, omega_c: f64) -> SpectralModel {
    // the infrared cutoff keeps the (log-divergent) Lamb shifts finite
    SpectralModel::ohmic(bath_eta, omega_c).with_ir_cutoff(1e-6 * omega_c)
}

/// Population dynamics on a uniform time grid. Returns rows of
/// [t, p_D, p_A, |<phi1|rho|phi2>|] flattened into one Float64Array.
/// `initial_kind`: 0 = coherent uniform donor, 1 = incoherent uniform
/// donor, 2 = single donor site.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn evolve_populations(
    e_d: f64,
    e_a: f64,
    n_d: u32,
    n_a: u32,
    v: f64,
    g_d: f64,
    g_a: f64,
    lambda: f64,
    beta: f64,
    bath_eta: f64,
    omega_c: f64,
    initial_kind: u32,
    t_max: f64,
    points: u32,
) -> Result<Vec<f64>, JsError> {
    let params = build_params(e_d, e_a, n_d, n_a, v, g_d, g_a, lambda, beta);
    let model = build_model(bath_eta, omega_c);
    let ctx = PropagatorContext::new(params, &model).map_err(|e| JsError::new(&e.to_string()))?;

    let dist = match initial_kind {
        0 => InitialDistribution::uniform(params.n_d, DistributionKind::Coherent),
        1 => InitialDistribution::uniform(params.n_d, DistributionKind::Incoherent),
        _ => {
            let mut p = vec![0.0; params.n_d];
            p[0] = 1.0;
            InitialDistribution::new(p, DistributionKind::Coherent)
                .map_err(|e| JsError::new(&e.to_string()))?
        }
    };
    let rho0 = observables::make_initial_state(&dist, params.n_d, params.n_a)
        .map_err(|e| JsError::new(&e.to_string()))?;

    let n = points.max(2) as usize;
    let mut out = Vec::with_capacity(4 * n);
    for i in 0..n {
        let t = t_max * i as f64 / (n - 1) as f64;
        let rho = ctx
            .propagate(&rho0, t)
            .map_err(|e| JsError::new(&e.to_string()))?;
        let r = ctx.rho_phi_elements(&rho);
        out.push(t);
        out.push(rho.donor_population());
        out.push(rho.acceptor_population());
        out.push(r[0][1].norm());
    }
    Ok(out)
}

/// Transfer efficiency against the reduced detuning eta at fixed effective
/// coupling. Returns rows of [eta, alpha, p_D_inc(inf), p_D_coh(inf),
/// p_A_max] flattened.
#[wasm_bindgen]
pub fn efficiency_landscape(
    v_eff: f64,
    n_d: u32,
    beta: f64,
    eta_max: f64,
    points: u32,
) -> Result<Vec<f64>, JsError> {
    if !(v_eff != 0.0 && beta > 0.0 && eta_max > 0.0) {
        return Err(JsError::new("need v_eff != 0, beta > 0, eta_max > 0"));
    }
    let n_d = n_d.max(1) as usize;
    let n = points.max(2) as usize;
    let mut out = Vec::with_capacity(5 * n);
    for i in 0..n {
        let eta = eta_max * i as f64 / (n - 1) as f64;
        let params = SystemParams {
            e_d: v_eff * eta,
            e_a: -v_eff * eta,
            n_d,
            n_a: 1,
            v: v_eff / (n_d as f64).sqrt(),
            g_d: 1.0,
            g_a: -1.0,
            lambda: 0.0,
            beta,
        };
        let eff = datrans_core::model::effective_reduction(&params)
            .map_err(|e| JsError::new(&e.to_string()))?;
        let inc =
            efficiency_incoherent(&eff, beta, n_d).map_err(|e| JsError::new(&e.to_string()))?;
        let coh = efficiency_coherent(&eff, beta, n_d, &vec![1.0 / n_d as f64; n_d])
            .map_err(|e| JsError::new(&e.to_string()))?;
        out.push(eta);
        out.push(alpha_of_eta(eta));
        out.push(inc.p_d_inf);
        out.push(coh.p_d_inf);
        out.push(max_acceptor_probability(&eff, beta));
    }
    Ok(out)
}

#[derive(Serialize)]
struct ResonanceReport {
    e1: f64,
    e2: f64,
    alpha: f64,
    v_eff: f64,
    gap: f64,
    lamb_shifts_available: bool,
    min_positive_decay: f64,
    entries: Vec<datrans_core::resonances::ResonanceEntry>,
    regime_warning: Option<String>,
}

/// Full resonance table as a JSON string.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn resonance_report(
    e_d: f64,
    e_a: f64,
    n_d: u32,
    n_a: u32,
    v: f64,
    g_d: f64,
    g_a: f64,
    lambda: f64,
    beta: f64,
    bath_eta: f64,
    omega_c: f64,
) -> Result<String, JsError> {
    let params = build_params(e_d, e_a, n_d, n_a, v, g_d, g_a, lambda, beta);
    let model = build_model(bath_eta, omega_c);
    let ctx = PropagatorContext::new(params, &model).map_err(|e| JsError::new(&e.to_string()))?;
    let report = ResonanceReport {
        e1: ctx.eff.e1,
        e2: ctx.eff.e2,
        alpha: ctx.eff.alpha,
        v_eff: ctx.eff.v,
        gap: ctx.eff.gap(),
        lamb_shifts_available: ctx.res.lamb_shifts_available,
        min_positive_decay: ctx.res.min_positive_decay(),
        entries: ctx.res.entries(),
        regime_warning: ctx.params.regime_warning(),
    };
    serde_json::to_string(&report).map_err(|e| JsError::new(&e.to_string()))
}
