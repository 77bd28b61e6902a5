//! Output files: deterministic CSV data and a JSON run manifest.
//!
//! Floats are printed with 17 significant digits in scientific notation so
//! every value round-trips exactly; data files carry no timestamps, the
//! manifest keeps its timestamp in a dedicated field.

use datrans_core::resonances::ResonanceEntry;
use datrans_core::{PropagatorContext, SystemParams};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        // avoid the -0 wart so equal runs stay byte-identical
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())
}

#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Wall-clock seconds since the Unix epoch; isolated here so the data
    /// files stay reproducible byte for byte.
    pub timestamp_s: u64,
    pub params: SystemParams,
    pub derived: Derived,
    pub resonances: Vec<ResonanceEntry>,
    pub lamb_shifts_available: bool,
    pub regularized: bool,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
pub struct Derived {
    pub v_eff: f64,
    pub e1: f64,
    pub e2: f64,
    pub alpha: f64,
    pub gap: f64,
    pub gibbs_weights: (f64, f64),
}

impl Manifest {
    pub fn new(command: &str, ctx: &PropagatorContext) -> Self {
        let mut warnings = Vec::new();
        if let Some(w) = ctx.params.regime_warning() {
            warnings.push(w);
        }
        if !ctx.res.lamb_shifts_available {
            warnings.push(
                "mu integral is infrared-divergent and no ir_cutoff is set: \
                 resonance real parts omit the second-order Lamb shifts"
                    .into(),
            );
        }
        Manifest {
            tool: "datrans",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            timestamp_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            params: ctx.params,
            derived: Derived {
                v_eff: ctx.eff.v,
                e1: ctx.eff.e1,
                e2: ctx.eff.e2,
                alpha: ctx.eff.alpha,
                gap: ctx.eff.gap(),
                gibbs_weights: ctx.gibbs,
            },
            resonances: ctx.res.entries(),
            lamb_shifts_available: ctx.res.lamb_shifts_available,
            regularized: ctx.res.regularized,
            warnings,
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json)
    }
}
