//! Donor-acceptor model assembly and the effective two-level reduction.
//!
//! Basis order throughout the crate: donor sites `D_1 .. D_{N_D}` first,
//! then acceptor sites `A_1 .. A_{N_A}`. The uniform states
//! `|D> = sum_j |D_j> / sqrt(N_D)` and `|A> = sum_k |A_k> / sqrt(N_A)` span
//! the symmetry-protected two-level subspace in which all transfer dynamics
//! takes place.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};
use ndarray::{Array1, Array2};
use serde::Serialize;

/// Threshold for the weak-coupling admissibility flag:
/// `lambda^2 < WEAK_COUPLING_FACTOR * |e1 - e2|`.
pub const WEAK_COUPLING_FACTOR: f64 = 0.1;

/// Absolute tolerance on the minimum eigenvalue when validating input states.
pub const TOL_PSD: f64 = 1e-9;

/// Absolute tolerance on the trace of a density matrix.
pub const TOL_TRACE: f64 = 1e-10;

/// All model constants. Units: hbar = k_B = 1, all energies in one common
/// arbitrary unit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SystemParams {
    /// Donor site energy.
    pub e_d: f64,
    /// Acceptor site energy.
    pub e_a: f64,
    /// Number of degenerate donor sites.
    pub n_d: usize,
    /// Number of degenerate acceptor sites.
    pub n_a: usize,
    /// Direct matrix element between any donor and any acceptor site.
    pub v: f64,
    /// Dimensionless donor coupling weight in the interaction operator.
    pub g_d: f64,
    /// Dimensionless acceptor coupling weight.
    pub g_a: f64,
    /// System-bath coupling strength.
    pub lambda: f64,
    /// Inverse temperature.
    pub beta: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_d < 1 || self.n_a < 1 {
            return Err(Error::InvalidParams("N_D and N_A must be >= 1".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        for (name, x) in [
            ("E_D", self.e_d),
            ("E_A", self.e_a),
            ("V", self.v),
            ("g_D", self.g_d),
            ("g_A", self.g_a),
            ("lambda", self.lambda),
        ] {
            if !x.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_d + self.n_a
    }

    /// Effective direct coupling v = V sqrt(N_D N_A).
    pub fn v_eff(&self) -> f64 {
        self.v * ((self.n_d * self.n_a) as f64).sqrt()
    }

    /// Splitting e1 - e2 of the effective two-level system.
    pub fn gap(&self) -> f64 {
        let d = self.e_d - self.e_a;
        let v = self.v_eff();
        (d * d + 4.0 * v * v).sqrt()
    }

    /// Weak-coupling admissibility: lambda^2 < threshold * |e1 - e2|.
    pub fn weak_coupling_ok(&self, threshold: f64) -> bool {
        self.lambda * self.lambda < threshold * self.gap()
    }

    /// Human-readable regime warning, if the weak-coupling condition fails.
    pub fn regime_warning(&self) -> Option<String> {
        if self.weak_coupling_ok(WEAK_COUPLING_FACTOR) {
            None
        } else {
            Some(format!(
                "lambda^2 = {:.3e} is not small against the level splitting e1 - e2 = {:.3e}; \
                 second-order resonance data is unreliable here",
                self.lambda * self.lambda,
                self.gap()
            ))
        }
    }
}

/// Data of the effective two-level system on span{|D>, |A>}.
///
/// `phi1`/`phi2` are the dressed eigenvectors expressed in the (|D>, |A>)
/// basis, normalized, with positive |D> component.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EffectiveSystem {
    /// Effective coupling v = V sqrt(N_D N_A).
    pub v: f64,
    /// Upper eigenvalue (the + root).
    pub e1: f64,
    /// Lower eigenvalue.
    pub e2: f64,
    /// alpha = (e1 - E_D) / v.
    pub alpha: f64,
    pub phi1: [f64; 2],
    pub phi2: [f64; 2],
    /// Matrix elements `[G]_ij` of the coupling operator in the phi basis.
    pub gbar: [[f64; 2]; 2],
}

impl EffectiveSystem {
    pub fn gap(&self) -> f64 {
        self.e1 - self.e2
    }

    /// Gibbs weights (w1, w2) on (phi1, phi2), normalized to w1 + w2 = 1.
    /// Evaluated with a max-shift so arbitrarily large beta is safe.
    pub fn gibbs_weights(&self, beta: f64) -> (f64, f64) {
        let x = (-beta * (self.e1 - self.e2)).exp(); // <= 1
        (x / (1.0 + x), 1.0 / (1.0 + x))
    }
}

/// Builds the site-basis Hamiltonian H_S and the interaction operator G.
///
/// H_S carries E_D on the first N_D diagonal entries, E_A on the last N_A,
/// and V on every donor-acceptor pair; G is diagonal with the g_D / g_A
/// blocks.
pub fn build_hamiltonian(params: &SystemParams) -> Result<(CMat, CMat)> {
    params.validate()?;
    let (nd, na) = (params.n_d, params.n_a);
    let n = nd + na;
    let mut h: CMat = Array2::zeros((n, n));
    let mut g: CMat = Array2::zeros((n, n));
    for j in 0..nd {
        h[[j, j]] = C64::new(params.e_d, 0.0);
        g[[j, j]] = C64::new(params.g_d, 0.0);
    }
    for k in 0..na {
        h[[nd + k, nd + k]] = C64::new(params.e_a, 0.0);
        g[[nd + k, nd + k]] = C64::new(params.g_a, 0.0);
    }
    let v = C64::new(params.v, 0.0);
    for j in 0..nd {
        for k in 0..na {
            h[[j, nd + k]] = v;
            h[[nd + k, j]] = v;
        }
    }
    Ok((h, g))
}

/// Two-level reduction: eigenvalues, dressed eigenvectors, alpha, and the
/// coupling matrix in the dressed basis.
pub fn effective_reduction(params: &SystemParams) -> Result<EffectiveSystem> {
    params.validate()?;
    let v = params.v_eff();
    if v == 0.0 {
        return Err(Error::DegenerateEffectiveSystem);
    }
    let sum = params.e_d + params.e_a;
    let gap = params.gap();
    let e1 = 0.5 * (sum + gap);
    let e2 = 0.5 * (sum - gap);
    let alpha = (e1 - params.e_d) / v;

    let normalize = |e: f64| -> [f64; 2] {
        let raw = [v, e - params.e_d];
        let n = (raw[0] * raw[0] + raw[1] * raw[1]).sqrt();
        let mut out = [raw[0] / n, raw[1] / n];
        if out[0] < 0.0 {
            // fix the sign convention: positive |D> component
            out[0] = -out[0];
            out[1] = -out[1];
        }
        out
    };
    let phi1 = normalize(e1);
    let phi2 = normalize(e2);

    let gbar_fn = |a: f64, b: f64| -> f64 {
        let num = params.g_d * v * v + params.g_a * (a - params.e_d) * (b - params.e_d);
        let den = ((v * v + (a - params.e_d) * (a - params.e_d))
            * (v * v + (b - params.e_d) * (b - params.e_d)))
            .sqrt();
        num / den
    };
    let gbar = [
        [gbar_fn(e1, e1), gbar_fn(e1, e2)],
        [gbar_fn(e2, e1), gbar_fn(e2, e2)],
    ];

    Ok(EffectiveSystem {
        v,
        e1,
        e2,
        alpha,
        phi1,
        phi2,
        gbar,
    })
}

/// Effective two-level Gibbs state diag(e^{-beta e1}, e^{-beta e2}) / Z in
/// the phi basis, overflow-guarded.
pub fn gibbs_effective(eff: &EffectiveSystem, beta: f64) -> Result<[[f64; 2]; 2]> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParams("beta must be > 0".into()));
    }
    let (w1, w2) = eff.gibbs_weights(beta);
    Ok([[w1, 0.0], [0.0, w2]])
}

/// The projector family used by the propagator.
pub struct ProjectionSet {
    pub n_d: usize,
    pub n_a: usize,
    /// Uniform donor state embedded in the full site basis.
    pub d_state: CVec,
    /// Uniform acceptor state embedded in the full site basis.
    pub a_state: CVec,
    /// Dressed eigenvectors embedded in the full site basis.
    pub phi_full: [CVec; 2],
    /// Rank-2 projector onto span{|D>, |A>}.
    pub p_bar_s: CMat,
    /// Projector onto the donor complement (rank N_D - 1).
    pub p_dperp: CMat,
    /// Projector onto the acceptor complement (rank N_A - 1).
    pub p_aperp: CMat,
    /// P_kl = |phi_k><phi_l|, indices 0/1 for phi1/phi2.
    pub p_kl: [[CMat; 2]; 2],
    /// Orthonormal basis of the donor complement.
    pub xi_d: Vec<CVec>,
    /// Orthonormal basis of the acceptor complement.
    pub xi_a: Vec<CVec>,
}

fn uniform_state(n: usize, offset: usize, count: usize) -> CVec {
    let mut v: CVec = Array1::zeros(n);
    let amp = C64::new(1.0 / (count as f64).sqrt(), 0.0);
    for i in 0..count {
        v[offset + i] = amp;
    }
    v
}

/// Gram-Schmidt over the deterministic family {|X_1> - |X_{j+1}>} restricted
/// to a block, producing a reproducible orthonormal complement basis.
fn complement_basis(n: usize, offset: usize, count: usize) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::with_capacity(count.saturating_sub(1));
    for j in 1..count {
        let mut v: CVec = Array1::zeros(n);
        v[offset] = C64::new(1.0, 0.0);
        v[offset + j] = C64::new(-1.0, 0.0);
        for b in &basis {
            let overlap: C64 = b.iter().zip(v.iter()).map(|(bi, vi)| bi.conj() * vi).sum();
            for i in 0..n {
                let bi = b[i];
                v[i] -= overlap * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            v[i] /= norm;
        }
        basis.push(v);
    }
    basis
}

/// Assembles all projectors entering the propagator.
pub fn build_projections(params: &SystemParams, eff: &EffectiveSystem) -> Result<ProjectionSet> {
    params.validate()?;
    let (nd, na) = (params.n_d, params.n_a);
    let n = nd + na;
    let d_state = uniform_state(n, 0, nd);
    let a_state = uniform_state(n, nd, na);

    let embed = |phi: &[f64; 2]| -> CVec {
        let mut v: CVec = Array1::zeros(n);
        for i in 0..n {
            v[i] = d_state[i] * phi[0] + a_state[i] * phi[1];
        }
        v
    };
    let phi_full = [embed(&eff.phi1), embed(&eff.phi2)];

    let p_bar_s = linalg::outer(&d_state, &d_state) + linalg::outer(&a_state, &a_state);

    // block identity minus the uniform-state projector
    let mut p_dperp: CMat = Array2::zeros((n, n));
    for j in 0..nd {
        p_dperp[[j, j]] = C64::new(1.0, 0.0);
    }
    p_dperp = p_dperp - linalg::outer(&d_state, &d_state);
    let mut p_aperp: CMat = Array2::zeros((n, n));
    for k in 0..na {
        p_aperp[[nd + k, nd + k]] = C64::new(1.0, 0.0);
    }
    p_aperp = p_aperp - linalg::outer(&a_state, &a_state);

    let p_kl = [
        [
            linalg::outer(&phi_full[0], &phi_full[0]),
            linalg::outer(&phi_full[0], &phi_full[1]),
        ],
        [
            linalg::outer(&phi_full[1], &phi_full[0]),
            linalg::outer(&phi_full[1], &phi_full[1]),
        ],
    ];

    Ok(ProjectionSet {
        n_d: nd,
        n_a: na,
        d_state,
        a_state,
        phi_full,
        p_bar_s,
        p_dperp,
        p_aperp,
        p_kl,
        xi_d: complement_basis(n, 0, nd),
        xi_a: complement_basis(n, nd, na),
    })
}

/// Complex Hermitian density matrix on the N_D + N_A site space.
#[derive(Debug, Clone)]
pub struct DAState {
    pub n_d: usize,
    pub n_a: usize,
    pub matrix: CMat,
}

impl DAState {
    /// Validating constructor for externally supplied states: Hermitian,
    /// unit trace, and positive semidefinite within `TOL_PSD`.
    pub fn new(n_d: usize, n_a: usize, matrix: CMat) -> Result<Self> {
        let n = n_d + n_a;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                n,
                n
            )));
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_ev = linalg::min_eigenvalue_hermitian(&matrix);
        if min_ev < -TOL_PSD {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_ev:.3e})"
            )));
        }
        Ok(DAState { n_d, n_a, matrix })
    }

    /// Non-validating constructor for internally produced states. Propagator
    /// outputs are accurate only to second order in the coupling and may
    /// carry a correspondingly small negative eigenvalue; callers can check
    /// with [`DAState::psd_defect`].
    pub fn unchecked(n_d: usize, n_a: usize, matrix: CMat) -> Self {
        DAState { n_d, n_a, matrix }
    }

    pub fn dim(&self) -> usize {
        self.n_d + self.n_a
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    /// max(0, -min eigenvalue): how far the state is from positive
    /// semidefiniteness.
    pub fn psd_defect(&self) -> f64 {
        (-linalg::min_eigenvalue_hermitian(&self.matrix)).max(0.0)
    }

    /// Total donor population: sum of the first N_D diagonal entries.
    pub fn donor_population(&self) -> f64 {
        (0..self.n_d).map(|j| self.matrix[[j, j]].re).sum()
    }

    /// Total acceptor population.
    pub fn acceptor_population(&self) -> f64 {
        (0..self.n_a)
            .map(|k| self.matrix[[self.n_d + k, self.n_d + k]].re)
            .sum()
    }
}
