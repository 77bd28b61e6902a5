//! The evolve, sweep and resonances verbs.

use crate::config::{ElementSelector, InitialSpec, Scenario};
use crate::report::{fmt_float, write_csv, Manifest};
use datrans_core::linalg::outer;
use datrans_core::observables::{
    self, alpha_of_eta, efficiency_coherent, efficiency_incoherent, fluctuation_variance,
    max_acceptor_probability, DistributionKind, InitialDistribution,
};
use datrans_core::{DAState, Error as CoreError, PropagatorContext, SystemParams};
use num_complex::Complex64 as C64;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

type SweepSlots = Mutex<Vec<Option<Result<Vec<f64>, RunError>>>>;

pub enum RunError {
    Numerical(String),
    Io(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        RunError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

fn initial_state(scenario: &Scenario) -> Result<DAState, RunError> {
    let p = &scenario.params;
    Ok(match &scenario.initial {
        InitialSpec::UniformDonor => observables::make_initial_state(
            &InitialDistribution::uniform(p.n_d, DistributionKind::Coherent),
            p.n_d,
            p.n_a,
        )?,
        InitialSpec::Distribution(dist) => observables::make_initial_state(dist, p.n_d, p.n_a)?,
        InitialSpec::Explicit(state) => state.clone(),
    })
}

fn pick_element(ctx: &PropagatorContext, rho: &DAState, sel: &ElementSelector) -> C64 {
    match sel {
        ElementSelector::Donor(k, l) => rho.matrix[[k - 1, l - 1]],
        ElementSelector::Acceptor(k, l) => {
            rho.matrix[[ctx.params.n_d + k - 1, ctx.params.n_d + l - 1]]
        }
        ElementSelector::Phi(k, l) => {
            let r = ctx.rho_phi_elements(rho);
            r[k - 1][l - 1]
        }
    }
}

pub fn run_evolve(scenario: &Scenario, out_dir: &Path) -> Result<(), RunError> {
    let ctx = PropagatorContext::new(scenario.params, &scenario.model)?;
    let rho0 = initial_state(scenario)?;

    let mut header = vec![
        "t".to_string(),
        "p_d".to_string(),
        "p_a".to_string(),
        "p_d_closed".to_string(),
    ];
    for el in &scenario.elements {
        header.push(format!("re_{}", el.label()));
        header.push(format!("im_{}", el.label()));
    }
    header.push("var_f".to_string());

    let mut rows = Vec::with_capacity(scenario.grid.len());
    for &t in &scenario.grid {
        let rho = ctx.propagate(&rho0, t)?;
        let p_d = rho.donor_population();
        let mut row = vec![
            t,
            p_d,
            rho.acceptor_population(),
            ctx.donor_population_closed(&rho0, t)?,
        ];
        for el in &scenario.elements {
            let z = pick_element(&ctx, &rho, el);
            row.push(z.re);
            row.push(z.im);
        }
        row.push(fluctuation_variance(p_d.clamp(0.0, 1.0), ctx.params.n_d)?);
        rows.push(row);
    }

    if scenario.wants("timeseries") {
        write_csv(&out_dir.join("timeseries.csv"), &header, &rows)?;
    }
    if scenario.wants("manifest") {
        Manifest::new("evolve", &ctx).write(&out_dir.join("manifest.json"))?;
    }
    Ok(())
}

pub fn run_resonances(scenario: &Scenario, out_dir: &Path) -> Result<(), RunError> {
    let ctx = PropagatorContext::new(scenario.params, &scenario.model)?;
    if scenario.wants("resonances") {
        let entries = ctx.res.entries();
        let json = serde_json::to_string_pretty(&entries).expect("entries serialize");
        std::fs::write(out_dir.join("resonances.json"), json)?;
    }
    if scenario.wants("manifest") {
        Manifest::new("resonances", &ctx).write(&out_dir.join("manifest.json"))?;
    }
    Ok(())
}

/// One sweep point: the derived parameter set and the efficiency columns.
fn sweep_point(
    base: &SystemParams,
    axis: &str,
    x: f64,
) -> Result<(SystemParams, Vec<f64>), RunError> {
    let mut p = *base;
    let mut coherent_p: Option<Vec<f64>> = None;
    match axis {
        "eta" => {
            // reduced detuning eta = (E_D - E_A)/(2 v_eff) at fixed center
            // and fixed effective coupling
            let v_eff = base.v_eff();
            let center = 0.5 * (base.e_d + base.e_a);
            p.e_d = center + v_eff * x;
            p.e_a = center - v_eff * x;
        }
        "beta" => p.beta = x,
        "lambda" => p.lambda = x,
        "n_d" => {
            // integer site count with V rescaled to keep v_eff fixed
            let n_d = x.round().max(1.0) as usize;
            let v_eff = base.v_eff();
            p.n_d = n_d;
            p.v = v_eff / ((n_d * base.n_a) as f64).sqrt();
        }
        "p_interp" => {
            // interpolate the coherent seeding from a point mass (x = 0)
            // to the uniform distribution (x = 1)
            let s = x.clamp(0.0, 1.0);
            let n = base.n_d as f64;
            let mut q = vec![s / n; base.n_d];
            q[0] += 1.0 - s;
            coherent_p = Some(q);
        }
        other => return Err(RunError::Numerical(format!("unknown sweep axis {other}"))),
    }
    let eff = datrans_core::model::effective_reduction(&p)?;
    let inc = efficiency_incoherent(&eff, p.beta, p.n_d)?;
    let coh = match &coherent_p {
        Some(q) => efficiency_coherent(&eff, p.beta, p.n_d, q)?,
        None => efficiency_coherent(&eff, p.beta, p.n_d, &vec![1.0 / p.n_d as f64; p.n_d])?,
    };
    let eta_now = (p.e_d - p.e_a) / (2.0 * eff.v);
    let row = vec![
        x,
        inc.p_d_inf,
        coh.p_d_inf,
        max_acceptor_probability(&eff, p.beta),
        alpha_of_eta(eta_now),
    ];
    Ok((p, row))
}

pub fn run_sweep(scenario: &Scenario, out_dir: &Path, workers: usize) -> Result<(), RunError> {
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::Numerical("scenario has no [sweep] section".into()))?;
    let n = sweep.points;
    let xs: Vec<f64> = (0..n)
        .map(|i| sweep.min + (sweep.max - sweep.min) * i as f64 / (n - 1) as f64)
        .collect();

    // worker pool over the axis points; results land in axis order
    let results: SweepSlots = Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let base = scenario.params;
    let axis = sweep.axis.clone();
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let out = sweep_point(&base, &axis, xs[i]).map(|(_, row)| row);
                results.lock().unwrap()[i] = Some(out);
            });
        }
    });

    let mut rows = Vec::with_capacity(n);
    for slot in results.into_inner().unwrap() {
        rows.push(slot.expect("every sweep point is computed")?);
    }
    let header = vec![
        sweep.axis.clone(),
        "p_d_inc_inf".to_string(),
        "p_d_coh_inf".to_string(),
        "p_a_max".to_string(),
        "alpha".to_string(),
    ];
    if scenario.wants("sweep") {
        write_csv(&out_dir.join("sweep.csv"), &header, &rows)?;
    }
    if scenario.wants("manifest") {
        let ctx = PropagatorContext::new(scenario.params, &scenario.model)?;
        Manifest::new("sweep", &ctx).write(&out_dir.join("manifest.json"))?;
    }
    Ok(())
}

/// Convenience used by the validate verb: the uniform donor state embedded
/// in the full site space.
pub fn uniform_donor_state(ctx: &PropagatorContext) -> DAState {
    DAState::unchecked(
        ctx.params.n_d,
        ctx.params.n_a,
        outer(&ctx.proj.d_state, &ctx.proj.d_state),
    )
}

/// Report row shared by validate checks.
#[derive(serde::Serialize)]
pub struct CheckRow {
    pub check_name: String,
    pub predicted: f64,
    pub reference: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(name: &str, predicted: f64, reference: f64, tol: f64) -> Self {
        let abs_err = (predicted - reference).abs();
        let rel_err = abs_err / reference.abs().max(1e-300);
        CheckRow {
            check_name: name.into(),
            predicted,
            reference,
            abs_err,
            rel_err,
            tolerance: tol,
            pass: abs_err <= tol,
        }
    }

    /// For checks where the measured quantity is itself an error bound.
    pub fn residual(name: &str, residual: f64, tol: f64) -> Self {
        CheckRow {
            check_name: name.into(),
            predicted: residual,
            reference: 0.0,
            abs_err: residual,
            rel_err: residual,
            tolerance: tol,
            pass: residual <= tol,
        }
    }

    pub fn print(&self) {
        println!(
            "{:32} {} (value {}, tolerance {})",
            self.check_name,
            if self.pass { "PASS" } else { "FAIL" },
            fmt_float(self.abs_err),
            fmt_float(self.tolerance),
        );
    }
}
