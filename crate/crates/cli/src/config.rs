//! Scenario files: TOML with nested sections. Unknown keys are hard errors
//! so typos cannot silently fall back to defaults.

use datrans_core::observables::{DistributionKind, InitialDistribution};
use datrans_core::{DAState, SpectralModel, SystemParams};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: SystemSection,
    pub spectral: SpectralSection,
    #[serde(default)]
    pub initial: Option<InitialSection>,
    #[serde(default)]
    pub time_grid: Option<TimeGridSection>,
    #[serde(default)]
    pub evolve: Option<EvolveSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub validate: Option<ValidateSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Artifact names to write; omit the section to write everything.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub e_d: f64,
    pub e_a: f64,
    pub n_d: usize,
    pub n_a: usize,
    pub v: f64,
    pub g_d: f64,
    pub g_a: f64,
    pub lambda: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    /// "ohmic", "super_ohmic" or "tabulated".
    pub family: String,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default)]
    pub omega_c: Option<f64>,
    /// Power for the super-ohmic family (s > 1).
    #[serde(default)]
    pub s: Option<f64>,
    /// Two-column (omega, J) text file for the tabulated family.
    #[serde(default)]
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub ir_cutoff: Option<f64>,
    #[serde(default)]
    pub quad_rel_tol: Option<f64>,
    #[serde(default)]
    pub quad_uv_factor: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// "uniform_d", "incoherent", "coherent" or "file".
    pub kind: String,
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSection {
    pub t_max: f64,
    pub points: usize,
    #[serde(default = "linear")]
    pub spacing: String,
    #[serde(default)]
    pub t_min: Option<f64>,
}

fn linear() -> String {
    "linear".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    /// Density-matrix elements to trace, e.g. "D:1,1", "A:2,1", "phi:1,2".
    #[serde(default)]
    pub elements: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// "eta", "beta", "n_d", "lambda" or "p_interp".
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    #[serde(default = "default_unitary_tol")]
    pub unitary_tol: f64,
    #[serde(default = "default_redfield_tol")]
    pub redfield_tol: f64,
    #[serde(default = "default_identity_tol")]
    pub identity_tol: f64,
    #[serde(default = "default_structure_tol")]
    pub structure_tol: f64,
    #[serde(default = "default_efficiency_tol")]
    pub efficiency_tol: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection {
            unitary_tol: default_unitary_tol(),
            redfield_tol: default_redfield_tol(),
            identity_tol: default_identity_tol(),
            structure_tol: default_structure_tol(),
            efficiency_tol: default_efficiency_tol(),
        }
    }
}

fn default_unitary_tol() -> f64 {
    1e-9
}
fn default_redfield_tol() -> f64 {
    0.05
}
fn default_identity_tol() -> f64 {
    1e-12
}
fn default_structure_tol() -> f64 {
    1e-10
}
fn default_efficiency_tol() -> f64 {
    1e-8
}

/// A fully validated scenario ready to run.
pub struct Scenario {
    pub params: SystemParams,
    pub model: SpectralModel,
    pub initial: InitialSpec,
    pub grid: Vec<f64>,
    pub elements: Vec<ElementSelector>,
    pub sweep: Option<SweepSection>,
    pub validate: ValidateSection,
    /// Requested artifacts; `None` writes everything a verb produces.
    pub artifacts: Option<Vec<String>>,
}

impl Scenario {
    pub fn wants(&self, artifact: &str) -> bool {
        match &self.artifacts {
            None => true,
            Some(list) => list.iter().any(|a| a == artifact),
        }
    }
}

pub enum InitialSpec {
    UniformDonor,
    Distribution(InitialDistribution),
    Explicit(DAState),
}

#[derive(Debug, Clone, Copy)]
pub enum ElementSelector {
    /// Donor site element (1-based row, col).
    Donor(usize, usize),
    /// Acceptor site element (1-based row, col).
    Acceptor(usize, usize),
    /// Dressed-basis element (1-based, phi_k row, phi_l col).
    Phi(usize, usize),
}

impl ElementSelector {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| ConfigError(format!("element '{s}' is not of the form KIND:row,col")))?;
        let (a, b) = rest
            .split_once(',')
            .ok_or_else(|| ConfigError(format!("element '{s}' needs row,col indices")))?;
        let row: usize = a
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("bad row index in '{s}'")))?;
        let col: usize = b
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("bad col index in '{s}'")))?;
        if row == 0 || col == 0 {
            return err(format!("element indices in '{s}' are 1-based"));
        }
        match kind {
            "D" => Ok(ElementSelector::Donor(row, col)),
            "A" => Ok(ElementSelector::Acceptor(row, col)),
            "phi" => {
                if row > 2 || col > 2 {
                    err(format!("phi indices in '{s}' must be 1 or 2"))
                } else {
                    Ok(ElementSelector::Phi(row, col))
                }
            }
            _ => err(format!("unknown element kind '{kind}' (use D, A or phi)")),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ElementSelector::Donor(k, l) => format!("rho_D{k}_D{l}"),
            ElementSelector::Acceptor(k, l) => format!("rho_A{k}_A{l}"),
            ElementSelector::Phi(k, l) => format!("rho_phi{k}_phi{l}"),
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile =
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    build_scenario(file, base)
}

fn build_scenario(file: ScenarioFile, base: &Path) -> Result<Scenario, ConfigError> {
    let s = &file.system;
    let params = SystemParams {
        e_d: s.e_d,
        e_a: s.e_a,
        n_d: s.n_d,
        n_a: s.n_a,
        v: s.v,
        g_d: s.g_d,
        g_a: s.g_a,
        lambda: s.lambda,
        beta: s.beta,
    };
    params
        .validate()
        .map_err(|e| ConfigError(format!("[system] {e}")))?;

    let model = build_spectral(&file.spectral, base)?;
    let initial = build_initial(file.initial.as_ref(), &params, base)?;
    let grid = build_grid(file.time_grid.as_ref())?;

    let elements = match file.evolve.as_ref().and_then(|e| e.elements.as_ref()) {
        Some(list) => list
            .iter()
            .map(|s| ElementSelector::parse(s))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![ElementSelector::Donor(1, 1), ElementSelector::Phi(1, 2)],
    };
    for el in &elements {
        let ok = match el {
            ElementSelector::Donor(k, l) => *k <= params.n_d && *l <= params.n_d,
            ElementSelector::Acceptor(k, l) => *k <= params.n_a && *l <= params.n_a,
            ElementSelector::Phi(_, _) => true,
        };
        if !ok {
            return err(format!("element {} exceeds the site counts", el.label()));
        }
    }

    if let Some(sw) = &file.sweep {
        if sw.points < 2 {
            return err("[sweep] points must be >= 2");
        }
        if sw.max <= sw.min || sw.max.is_nan() || sw.min.is_nan() {
            return err("[sweep] max must exceed min");
        }
        match sw.axis.as_str() {
            "eta" | "beta" | "n_d" | "lambda" | "p_interp" => {}
            other => return err(format!("[sweep] unknown axis '{other}'")),
        }
    }

    let artifacts = match file.output {
        None => None,
        Some(out) => {
            const KNOWN: [&str; 5] = [
                "timeseries",
                "manifest",
                "resonances",
                "sweep",
                "validation",
            ];
            for a in &out.artifacts {
                if !KNOWN.contains(&a.as_str()) {
                    return err(format!(
                        "[output] unknown artifact '{a}' (known: {})",
                        KNOWN.join(", ")
                    ));
                }
            }
            Some(out.artifacts)
        }
    };

    Ok(Scenario {
        params,
        model,
        initial,
        grid,
        elements,
        sweep: file.sweep,
        validate: file.validate.unwrap_or_default(),
        artifacts,
    })
}

fn build_spectral(sec: &SpectralSection, base: &Path) -> Result<SpectralModel, ConfigError> {
    let mut model = match sec.family.as_str() {
        "ohmic" => {
            let wc = sec
                .omega_c
                .ok_or_else(|| ConfigError("[spectral] ohmic family needs omega_c".into()))?;
            SpectralModel::ohmic(sec.eta, wc)
        }
        "super_ohmic" => {
            let wc = sec
                .omega_c
                .ok_or_else(|| ConfigError("[spectral] super_ohmic family needs omega_c".into()))?;
            let s = sec
                .s
                .ok_or_else(|| ConfigError("[spectral] super_ohmic family needs s".into()))?;
            if s <= 1.0 {
                return err("[spectral] super_ohmic power s must be > 1");
            }
            SpectralModel::super_ohmic(sec.eta, wc, s)
        }
        "tabulated" => {
            let rel = sec
                .table
                .as_ref()
                .ok_or_else(|| ConfigError("[spectral] tabulated family needs table".into()))?;
            let path = if rel.is_absolute() {
                rel.clone()
            } else {
                base.join(rel)
            };
            let (omega, j) = read_table(&path)?;
            SpectralModel::tabulated(omega, j)
                .map_err(|e| ConfigError(format!("[spectral] {e}")))?
        }
        other => return err(format!("[spectral] unknown family '{other}'")),
    };
    model.ir_cutoff = sec.ir_cutoff;
    if let Some(tol) = sec.quad_rel_tol {
        model.quad.rel_tol = tol;
    }
    if let Some(uv) = sec.quad_uv_factor {
        model.quad.uv_factor = uv;
    }
    Ok(model)
}

/// Two-column whitespace-separated (omega, J) samples; '#' starts a comment.
fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut omega = Vec::new();
    let mut j = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let w: f64 = it
            .next()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| ConfigError(format!("{}:{}: bad omega", path.display(), lineno + 1)))?;
        let val: f64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| {
            ConfigError(format!("{}:{}: bad J value", path.display(), lineno + 1))
        })?;
        if it.next().is_some() {
            return err(format!(
                "{}:{}: expected exactly two columns",
                path.display(),
                lineno + 1
            ));
        }
        omega.push(w);
        j.push(val);
    }
    Ok((omega, j))
}

fn build_initial(
    sec: Option<&InitialSection>,
    params: &SystemParams,
    base: &Path,
) -> Result<InitialSpec, ConfigError> {
    let Some(sec) = sec else {
        return Ok(InitialSpec::UniformDonor);
    };
    match sec.kind.as_str() {
        "uniform_d" => Ok(InitialSpec::UniformDonor),
        "incoherent" | "coherent" => {
            let p = sec
                .p
                .clone()
                .ok_or_else(|| ConfigError(format!("[initial] kind {} needs p", sec.kind)))?;
            if p.len() != params.n_d {
                return err(format!(
                    "[initial] p has {} entries for {} donor sites",
                    p.len(),
                    params.n_d
                ));
            }
            let kind = if sec.kind == "incoherent" {
                DistributionKind::Incoherent
            } else {
                DistributionKind::Coherent
            };
            let dist = InitialDistribution::new(p, kind)
                .map_err(|e| ConfigError(format!("[initial] {e}")))?;
            Ok(InitialSpec::Distribution(dist))
        }
        "file" => {
            let rel = sec
                .path
                .as_ref()
                .ok_or_else(|| ConfigError("[initial] kind file needs path".into()))?;
            let path = if rel.is_absolute() {
                rel.clone()
            } else {
                base.join(rel)
            };
            let state = read_state(&path, params)?;
            Ok(InitialSpec::Explicit(state))
        }
        other => err(format!("[initial] unknown kind '{other}'")),
    }
}

/// Explicit state file: first line "N_D N_A", then (N_D+N_A)^2 lines
/// "row col re im" with 1-based indices.
fn read_state(path: &Path, params: &SystemParams) -> Result<DAState, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| ConfigError(format!("{}: empty state file", path.display())))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|x| {
            x.parse()
                .map_err(|_| ConfigError(format!("{}: bad header", path.display())))
        })
        .collect::<Result<_, _>>()?;
    if dims.len() != 2 {
        return err(format!("{}: header must be 'N_D N_A'", path.display()));
    }
    let (n_d, n_a) = (dims[0], dims[1]);
    if n_d != params.n_d || n_a != params.n_a {
        return err(format!(
            "{}: state is for {}+{} sites but the scenario has {}+{}",
            path.display(),
            n_d,
            n_a,
            params.n_d,
            params.n_a
        ));
    }
    let n = n_d + n_a;
    let mut m: Array2<C64> = Array2::zeros((n, n));
    let mut seen = vec![false; n * n];
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return err(format!(
                "{}: expected 'row col re im', got '{line}'",
                path.display()
            ));
        }
        let row: usize = parts[0]
            .parse()
            .map_err(|_| ConfigError(format!("{}: bad row in '{line}'", path.display())))?;
        let col: usize = parts[1]
            .parse()
            .map_err(|_| ConfigError(format!("{}: bad col in '{line}'", path.display())))?;
        let re: f64 = parts[2]
            .parse()
            .map_err(|_| ConfigError(format!("{}: bad re in '{line}'", path.display())))?;
        let im: f64 = parts[3]
            .parse()
            .map_err(|_| ConfigError(format!("{}: bad im in '{line}'", path.display())))?;
        if row == 0 || row > n || col == 0 || col > n {
            return err(format!(
                "{}: index out of range in '{line}'",
                path.display()
            ));
        }
        m[[row - 1, col - 1]] = C64::new(re, im);
        seen[(row - 1) * n + col - 1] = true;
    }
    if seen.iter().any(|s| !s) {
        return err(format!(
            "{}: state file must list all {} matrix entries",
            path.display(),
            n * n
        ));
    }
    DAState::new(n_d, n_a, m).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

fn build_grid(sec: Option<&TimeGridSection>) -> Result<Vec<f64>, ConfigError> {
    let Some(sec) = sec else {
        return Ok((0..200).map(|i| 0.5 * i as f64).collect());
    };
    if sec.points == 0 {
        return err("[time_grid] points must be > 0");
    }
    if sec.t_max.is_nan() || sec.t_max <= 0.0 {
        return err("[time_grid] t_max must be > 0");
    }
    let grid: Vec<f64> = match sec.spacing.as_str() {
        "linear" => (0..sec.points)
            .map(|i| sec.t_max * i as f64 / (sec.points.max(2) - 1) as f64)
            .collect(),
        "log" => {
            let t_min = sec.t_min.unwrap_or(sec.t_max * 1e-3);
            if !(t_min > 0.0 && t_min < sec.t_max) {
                return err("[time_grid] log spacing needs 0 < t_min < t_max");
            }
            let ratio = (sec.t_max / t_min).ln();
            (0..sec.points)
                .map(|i| t_min * (ratio * i as f64 / (sec.points.max(2) - 1) as f64).exp())
                .collect()
        }
        other => return err(format!("[time_grid] unknown spacing '{other}'")),
    };
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return err("[time_grid] grid must be strictly increasing");
        }
    }
    Ok(grid)
}
