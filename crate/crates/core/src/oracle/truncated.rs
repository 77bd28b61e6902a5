//! Brute-force propagation of the DA complex coupled to a truncated
//! discrete-mode bath.
//!
//! The continuous bath is discretized into equal-weight frequency bins on
//! [0, 10 omega_c]: bin edges split the integral of J evenly, each mode
//! sits at the J-weighted centroid of its bin, and the mode coupling
//! kappa_m obeys kappa_m^2 = (2/pi) int_bin J, which reproduces the
//! free-bath correlation function of the continuous model. The Hamiltonian
//!
//!   H = H_S + sum_m omega_m a_m^dag a_m
//!         + lambda G sum_m kappa_m (a_m + a_m^dag)
//!
//! is propagated exactly (up to the mode and occupation truncation) with a
//! Lanczos short-time integrator.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};
use crate::model::{DAState, SystemParams};
use crate::quad;
use crate::spectral::SpectralModel;
use ndarray::{Array1, Array2};
use serde::Serialize;

/// Hard cap on the truncated Hilbert space dimension.
pub const TRUNCATED_DIM_CAP: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct TruncatedBath {
    /// Mode frequencies omega_m.
    pub frequencies: Vec<f64>,
    /// Mode couplings kappa_m with kappa_m^2 = (2/pi) int_bin J.
    pub couplings: Vec<f64>,
    /// Per-mode occupation cap.
    pub n_max: usize,
}

impl TruncatedBath {
    /// Discretizes `model` into `modes` equal-weight bins on
    /// [0, 10 omega_c].
    pub fn from_spectral(model: &SpectralModel, modes: usize, n_max: usize) -> Result<Self> {
        if modes == 0 {
            return Ok(TruncatedBath {
                frequencies: vec![],
                couplings: vec![],
                n_max,
            });
        }
        let top = 10.0 * model.omega_c;
        let j = |w: f64| model.eval_j(w).unwrap_or(0.0);
        let total = quad::adaptive(&j, 0.0, top, &model.quad).0;
        if total <= 0.0 {
            return Err(Error::InvalidParams(
                "spectral density integrates to zero; nothing to discretize".into(),
            ));
        }
        let cum = |w: f64| quad::adaptive(&j, 0.0, w, &model.quad).0;
        let mut edges = vec![0.0];
        for k in 1..modes {
            let target = total * k as f64 / modes as f64;
            let (mut lo, mut hi) = (0.0, top);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if cum(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            edges.push(0.5 * (lo + hi));
        }
        edges.push(top);

        let mut frequencies = Vec::with_capacity(modes);
        let mut couplings = Vec::with_capacity(modes);
        for k in 0..modes {
            let (a, b) = (edges[k], edges[k + 1]);
            let weight = quad::adaptive(&j, a, b, &model.quad).0;
            let first_moment = quad::adaptive(&|w: f64| w * j(w), a, b, &model.quad).0;
            frequencies.push(first_moment / weight);
            couplings.push((2.0 / std::f64::consts::PI * weight).sqrt());
        }
        Ok(TruncatedBath {
            frequencies,
            couplings,
            n_max,
        })
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    fn levels(&self) -> usize {
        self.n_max + 1
    }

    fn bath_dim(&self) -> usize {
        self.levels().pow(self.modes() as u32)
    }
}

/// One point of an exact population series.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PopulationSample {
    pub t: f64,
    pub p_d: f64,
    pub p_a: f64,
    /// Total norm of the propagated state; deviation from 1 measures
    /// integrator error.
    pub norm: f64,
}

/// Full Hamiltonian data for the truncated problem, applied matrix-free.
struct TruncatedHamiltonian {
    n_d: usize,
    n_a: usize,
    e_d: f64,
    e_a: f64,
    v: f64,
    /// lambda * g(site) for each system site.
    site_g: Vec<f64>,
    frequencies: Vec<f64>,
    couplings: Vec<f64>,
    levels: usize,
    dim: usize,
}

impl TruncatedHamiltonian {
    fn new(params: &SystemParams, bath: &TruncatedBath) -> Result<Self> {
        params.validate()?;
        let ns = params.dim();
        let dim = ns
            .checked_mul(bath.bath_dim())
            .filter(|&d| d <= TRUNCATED_DIM_CAP)
            .ok_or(Error::DimensionTooLarge {
                dim: ns.saturating_mul(bath.bath_dim()),
                cap: TRUNCATED_DIM_CAP,
            })?;
        let mut site_g = vec![params.lambda * params.g_d; params.n_d];
        site_g.extend(vec![params.lambda * params.g_a; params.n_a]);
        Ok(TruncatedHamiltonian {
            n_d: params.n_d,
            n_a: params.n_a,
            e_d: params.e_d,
            e_a: params.e_a,
            v: params.v,
            site_g,
            frequencies: bath.frequencies.clone(),
            couplings: bath.couplings.clone(),
            levels: bath.levels(),
            dim,
        })
    }

    fn ns(&self) -> usize {
        self.n_d + self.n_a
    }

    /// y = H x. The system index is fastest; mode m advances with stride
    /// ns * levels^m.
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let ns = self.ns();
        let nblocks = self.dim / ns;
        // system part: site energies plus all-to-all donor-acceptor hopping
        for b in 0..nblocks {
            let base = b * ns;
            let mut sum_d = C64::new(0.0, 0.0);
            let mut sum_a = C64::new(0.0, 0.0);
            for j in 0..self.n_d {
                sum_d += x[base + j];
            }
            for k in 0..self.n_a {
                sum_a += x[base + self.n_d + k];
            }
            for j in 0..self.n_d {
                y[base + j] = self.e_d * x[base + j] + self.v * sum_a;
            }
            for k in 0..self.n_a {
                y[base + self.n_d + k] = self.e_a * x[base + self.n_d + k] + self.v * sum_d;
            }
        }
        // bath energies: sum_m omega_m n_m on the diagonal
        let levels = self.levels;
        for (i, yi) in y.iter_mut().enumerate() {
            let mut cfg = i / ns;
            let mut e_bath = 0.0;
            for m in 0..self.frequencies.len() {
                let n_m = cfg % levels;
                e_bath += self.frequencies[m] * n_m as f64;
                cfg /= levels;
            }
            *yi += e_bath * x[i];
        }
        // coupling: lambda g(site) kappa_m (a_m + a_m^dag)
        let mut stride = ns;
        for m in 0..self.frequencies.len() {
            let kap = self.couplings[m];
            for i in 0..self.dim {
                let n_m = (i / stride) % levels;
                let s = i % ns;
                let gfac = self.site_g[s] * kap;
                if n_m + 1 < levels {
                    // a^dag: |n> -> sqrt(n+1)|n+1>
                    let amp = gfac * ((n_m + 1) as f64).sqrt();
                    y[i + stride] += amp * x[i];
                }
                if n_m > 0 {
                    // a: |n> -> sqrt(n)|n-1>
                    let amp = gfac * (n_m as f64).sqrt();
                    y[i - stride] += amp * x[i];
                }
            }
            stride *= levels;
        }
    }

    /// Crude upper bound on the spectral radius, used to pick the Lanczos
    /// substep.
    fn norm_bound(&self) -> f64 {
        let sys = self.e_d.abs().max(self.e_a.abs()) + self.v.abs() * self.ns() as f64;
        let bath: f64 = self
            .frequencies
            .iter()
            .map(|w| w * self.n_max_eff() as f64)
            .sum();
        let gmax = self.site_g.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let coupling: f64 = self
            .couplings
            .iter()
            .map(|k| 2.0 * gmax * k * (self.levels as f64).sqrt())
            .sum();
        sys + bath + coupling
    }

    fn n_max_eff(&self) -> usize {
        self.levels - 1
    }
}

/// One Lanczos step psi <- exp(-i dt H) psi. Krylov dimension grows until
/// the subspace converges or `max_krylov` is reached.
fn lanczos_step(h: &TruncatedHamiltonian, psi: &mut [C64], dt: f64, max_krylov: usize) {
    let dim = psi.len();
    let norm0 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return;
    }
    let mut v: Vec<Vec<C64>> = Vec::with_capacity(max_krylov);
    v.push(psi.iter().map(|z| z / norm0).collect());
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); dim];
    for j in 0..max_krylov {
        for x in w.iter_mut() {
            *x = C64::new(0.0, 0.0);
        }
        h.apply(&v[j], &mut w);
        if j > 0 {
            let b = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(v[j - 1].iter()) {
                *wi -= b * vi;
            }
        }
        let a: f64 = w
            .iter()
            .zip(v[j].iter())
            .map(|(wi, vi)| (vi.conj() * wi).re)
            .sum();
        alpha.push(a);
        for (wi, vi) in w.iter_mut().zip(v[j].iter()) {
            *wi -= a * vi;
        }
        // full reorthogonalization keeps the basis clean at these sizes
        for vk in v.iter() {
            let overlap: C64 = vk.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
            for (wi, vi) in w.iter_mut().zip(vk.iter()) {
                *wi -= overlap * vi;
            }
        }
        let b: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if b < 1e-12 || j + 1 == max_krylov {
            break;
        }
        beta.push(b);
        v.push(w.iter().map(|z| z / b).collect());
    }

    let m = alpha.len();
    let mut t: CMat = Array2::zeros((m, m));
    for j in 0..m {
        t[[j, j]] = C64::new(alpha[j], 0.0);
        if j + 1 < m {
            t[[j, j + 1]] = C64::new(beta[j], 0.0);
            t[[j + 1, j]] = C64::new(beta[j], 0.0);
        }
    }
    let (theta, s) = linalg::hermitian_eigen(&t);
    // coeff = S exp(-i dt Theta) S^T e_1
    let mut coeff = vec![C64::new(0.0, 0.0); m];
    for k in 0..m {
        let phase = C64::from_polar(1.0, -dt * theta[k]);
        for j in 0..m {
            coeff[j] += s[[j, k]] * phase * s[[0, k]].conj();
        }
    }
    for x in psi.iter_mut() {
        *x = C64::new(0.0, 0.0);
    }
    for (j, vj) in v.iter().enumerate() {
        let c = coeff[j] * norm0;
        for (pi, vi) in psi.iter_mut().zip(vj.iter()) {
            *pi += c * vi;
        }
    }
}

fn propagate_to(h: &TruncatedHamiltonian, psi: &mut [C64], dt_total: f64) {
    if dt_total == 0.0 {
        return;
    }
    let hnorm = h.norm_bound().max(1.0);
    let steps = ((dt_total * hnorm / 10.0).ceil() as usize).max(1);
    let dt = dt_total / steps as f64;
    for _ in 0..steps {
        lanczos_step(h, psi, dt, 40);
    }
}

fn reduced_state(psi: &[C64], ns: usize) -> CMat {
    let mut rho: CMat = Array2::zeros((ns, ns));
    let nblocks = psi.len() / ns;
    for b in 0..nblocks {
        let base = b * ns;
        for i in 0..ns {
            for j in 0..ns {
                rho[[i, j]] += psi[base + i] * psi[base + j].conj();
            }
        }
    }
    rho
}

fn vacuum_amplitudes(levels: usize) -> Vec<C64> {
    let mut a = vec![C64::new(0.0, 0.0); levels];
    a[0] = C64::new(1.0, 0.0);
    a
}

/// Truncated coherent-state amplitudes, renormalized after the occupation
/// cut.
fn coherent_amplitudes(alpha: f64, levels: usize) -> Vec<C64> {
    let mut a = vec![C64::new(0.0, 0.0); levels];
    let mut amp = 1.0f64;
    a[0] = C64::new(1.0, 0.0);
    for (n, slot) in a.iter_mut().enumerate().skip(1) {
        amp *= alpha / (n as f64).sqrt();
        *slot = C64::new(amp, 0.0);
    }
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for x in a.iter_mut() {
        *x /= norm;
    }
    a
}

/// psi_sys (x) product of per-mode amplitude vectors, system index fastest.
fn product_state(psi_sys: &CVec, mode_amps: &[Vec<C64>], ns: usize) -> Vec<C64> {
    let bath_dim: usize = mode_amps.iter().map(|a| a.len()).product::<usize>().max(1);
    let levels = mode_amps.first().map(|a| a.len()).unwrap_or(1);
    let mut psi = vec![C64::new(0.0, 0.0); ns * bath_dim];
    for cfg in 0..bath_dim {
        let mut weight = C64::new(1.0, 0.0);
        let mut c = cfg;
        for amp in mode_amps {
            weight *= amp[c % levels];
            c /= levels;
        }
        for s in 0..ns {
            psi[cfg * ns + s] = psi_sys[s] * weight;
        }
    }
    psi
}

/// Exact reduced DA density matrices along a nondecreasing time grid, for
/// an initial DA state with the bath in its vacuum. Mixed initial states
/// are handled by propagating each eigenvector of rho0 separately.
pub fn truncated_bath_reduced_states(
    params: &SystemParams,
    bath: &TruncatedBath,
    rho0: &DAState,
    grid: &[f64],
) -> Result<Vec<(f64, CMat)>> {
    let h = TruncatedHamiltonian::new(params, bath)?;
    let ns = h.ns();
    if rho0.dim() != ns {
        return Err(Error::InvalidState(format!(
            "state dimension {} does not match system dimension {ns}",
            rho0.dim()
        )));
    }
    let (evals, evecs) = linalg::hermitian_eigen(&rho0.matrix);
    let mode_amps: Vec<Vec<C64>> = (0..bath.modes())
        .map(|_| vacuum_amplitudes(bath.levels()))
        .collect();

    let mut states: Vec<(f64, CMat)> = grid.iter().map(|&t| (t, Array2::zeros((ns, ns)))).collect();
    for k in 0..ns {
        let w = evals[k];
        if w < 1e-12 {
            continue;
        }
        let psi_sys: CVec = Array1::from_iter((0..ns).map(|i| evecs[[i, k]]));
        let mut psi = product_state(&psi_sys, &mode_amps, ns);
        let mut t_now = 0.0;
        for (idx, &t) in grid.iter().enumerate() {
            if t < t_now {
                return Err(Error::InvalidParams(
                    "time grid must be nondecreasing".into(),
                ));
            }
            propagate_to(&h, &mut psi, t - t_now);
            t_now = t;
            let rho = reduced_state(&psi, ns);
            states[idx].1 = &states[idx].1 + &rho.mapv(|z| z * w);
        }
    }
    Ok(states)
}

/// Exact donor/acceptor population series with the bath in its vacuum.
pub fn truncated_bath_evolution(
    params: &SystemParams,
    bath: &TruncatedBath,
    rho0: &DAState,
    grid: &[f64],
) -> Result<Vec<PopulationSample>> {
    let states = truncated_bath_reduced_states(params, bath, rho0, grid)?;
    Ok(states
        .into_iter()
        .map(|(t, rho)| {
            let p_d: f64 = (0..params.n_d).map(|j| rho[[j, j]].re).sum();
            let p_a: f64 = (0..params.n_a)
                .map(|j| rho[[params.n_d + j, params.n_d + j]].re)
                .sum();
            PopulationSample {
                t,
                p_d,
                p_a,
                norm: linalg::trace(&rho).re.max(0.0).sqrt(),
            }
        })
        .collect())
}

/// Evolves `psi_sys` (supported on a single site block and orthogonal to
/// the block's uniform state, or not, for negative controls) against the
/// polaron-displaced bath vacuum and returns the largest Frobenius
/// deviation of the reduced DA state from |psi><psi| over the grid.
pub fn stationarity_check(
    params: &SystemParams,
    bath: &TruncatedBath,
    psi_sys: &CVec,
    grid: &[f64],
) -> Result<f64> {
    let h = TruncatedHamiltonian::new(params, bath)?;
    let ns = h.ns();
    if psi_sys.len() != ns {
        return Err(Error::InvalidState(format!(
            "vector dimension {} does not match system dimension {ns}",
            psi_sys.len()
        )));
    }
    let donor_w: f64 = (0..params.n_d).map(|j| psi_sys[j].norm_sqr()).sum();
    let acceptor_w: f64 = (0..params.n_a)
        .map(|k| psi_sys[params.n_d + k].norm_sqr())
        .sum();
    let total = donor_w + acceptor_w;
    if total < 1e-14 {
        return Err(Error::InvalidState("zero vector".into()));
    }
    let g_block = if donor_w / total > 1.0 - 1e-12 {
        params.g_d
    } else if acceptor_w / total > 1.0 - 1e-12 {
        params.g_a
    } else {
        return Err(Error::InvalidState(
            "vector must be supported on a single site block".into(),
        ));
    };
    let norm = total.sqrt();
    let psi_sys: CVec = psi_sys.mapv(|z| z / norm);

    // polaron displacement alpha_m = -lambda g kappa_m / omega_m
    let mode_amps: Vec<Vec<C64>> = (0..bath.modes())
        .map(|m| {
            let alpha = -params.lambda * g_block * bath.couplings[m] / bath.frequencies[m];
            coherent_amplitudes(alpha, bath.levels())
        })
        .collect();
    let mut psi = product_state(&psi_sys, &mode_amps, ns);
    let target = linalg::outer(&psi_sys, &psi_sys);

    let mut worst = 0.0f64;
    let mut t_now = 0.0;
    for &t in grid {
        propagate_to(&h, &mut psi, t - t_now);
        t_now = t;
        let rho = reduced_state(&psi, ns);
        worst = worst.max(linalg::fro_norm(&(&rho - &target)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hamiltonian;
    use crate::oracle::unitary_reference;
    use approx::assert_abs_diff_eq;

    fn params(lambda: f64) -> SystemParams {
        SystemParams {
            e_d: 1.0,
            e_a: -1.0,
            n_d: 1,
            n_a: 1,
            v: 1.0,
            g_d: 1.0,
            g_a: -1.0,
            lambda,
            beta: 1.0,
        }
    }

    fn donor_state(n_d: usize, n_a: usize) -> DAState {
        let n = n_d + n_a;
        let mut m: CMat = Array2::zeros((n, n));
        let amp = 1.0 / n_d as f64;
        for i in 0..n_d {
            for j in 0..n_d {
                m[[i, j]] = C64::new(amp, 0.0);
            }
        }
        DAState::unchecked(n_d, n_a, m)
    }

    #[test]
    fn bath_discretization_reproduces_bin_weights() {
        let model = SpectralModel::ohmic(0.3, 1.0);
        let bath = TruncatedBath::from_spectral(&model, 6, 2).unwrap();
        assert_eq!(bath.modes(), 6);
        // equal-weight bins: kappa_m^2 all equal
        let k2: Vec<f64> = bath.couplings.iter().map(|k| k * k).collect();
        for w in k2.windows(2) {
            assert_abs_diff_eq!(w[0], w[1], epsilon = 1e-6 * k2[0]);
        }
        // total weight matches (2/pi) int_0^10wc J
        let total: f64 = k2.iter().sum();
        let expect = 2.0 / std::f64::consts::PI
            * quad::adaptive(&|w: f64| model.eval_j(w).unwrap(), 0.0, 10.0, &model.quad).0;
        assert_abs_diff_eq!(total, expect, epsilon = 1e-8);
        // frequencies sit inside increasing bins
        for w in bath.frequencies.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn zero_modes_reduce_to_unitary_reference() {
        let p = params(0.7); // coupling irrelevant with no modes
        let bath = TruncatedBath {
            frequencies: vec![],
            couplings: vec![],
            n_max: 2,
        };
        let rho0 = donor_state(1, 1);
        let grid = [0.0, 0.4, 1.1, 2.7];
        let series = truncated_bath_evolution(&p, &bath, &rho0, &grid).unwrap();
        let (h, _) = build_hamiltonian(&p).unwrap();
        for (s, &t) in series.iter().zip(grid.iter()) {
            let exact = unitary_reference(&h, &rho0, t).unwrap();
            assert_abs_diff_eq!(s.p_d, exact.donor_population(), epsilon = 1e-10);
            assert_abs_diff_eq!(s.norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_coupling_matches_unitary_reference_with_modes() {
        let p = params(0.0);
        let model = SpectralModel::ohmic(0.3, 1.0);
        let bath = TruncatedBath::from_spectral(&model, 3, 1).unwrap();
        let rho0 = donor_state(1, 1);
        let grid = [0.5, 1.5];
        let series = truncated_bath_evolution(&p, &bath, &rho0, &grid).unwrap();
        let (h, _) = build_hamiltonian(&p).unwrap();
        for (s, &t) in series.iter().zip(grid.iter()) {
            let exact = unitary_reference(&h, &rho0, t).unwrap();
            assert_abs_diff_eq!(s.p_d, exact.donor_population(), epsilon = 1e-9);
        }
    }

    #[test]
    fn norm_is_conserved_with_coupling() {
        let p = params(0.25);
        let model = SpectralModel::ohmic(0.3, 1.0);
        let bath = TruncatedBath::from_spectral(&model, 4, 2).unwrap();
        let rho0 = donor_state(1, 1);
        let grid = [1.0, 5.0, 10.0];
        let series = truncated_bath_evolution(&p, &bath, &rho0, &grid).unwrap();
        for s in &series {
            assert_abs_diff_eq!(s.norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let p = params(0.1);
        let bath = TruncatedBath {
            frequencies: vec![1.0; 12],
            couplings: vec![0.1; 12],
            n_max: 3,
        };
        let rho0 = donor_state(1, 1);
        assert!(matches!(
            truncated_bath_evolution(&p, &bath, &rho0, &[1.0]),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn complement_states_stay_put_and_uniform_donor_moves() {
        let mut p = params(0.2);
        p.n_d = 2;
        p.n_a = 1;
        let model = SpectralModel::ohmic(0.3, 1.0);
        let bath = TruncatedBath::from_spectral(&model, 4, 2).unwrap();
        // psi in the donor complement: (|D_1> - |D_2>)/sqrt(2)
        let mut xi: CVec = Array1::zeros(3);
        xi[0] = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        xi[1] = C64::new(-1.0 / 2.0f64.sqrt(), 0.0);
        let grid = [0.5, 2.0, 6.0];
        let resid = stationarity_check(&p, &bath, &xi, &grid).unwrap();
        assert!(resid < 1e-8, "complement residual {resid}");
        // negative control: |D> transfers population
        let mut d: CVec = Array1::zeros(3);
        d[0] = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        d[1] = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        let resid = stationarity_check(&p, &bath, &d, &grid).unwrap();
        assert!(
            resid > 1e-3,
            "uniform donor residual {resid} unexpectedly small"
        );
    }

    #[test]
    fn lambda_zero_complement_residual_is_machine_level() {
        let mut p = params(0.0);
        p.n_d = 2;
        p.n_a = 1;
        let model = SpectralModel::ohmic(0.3, 1.0);
        let bath = TruncatedBath::from_spectral(&model, 3, 2).unwrap();
        let mut xi: CVec = Array1::zeros(3);
        xi[0] = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        xi[1] = C64::new(-1.0 / 2.0f64.sqrt(), 0.0);
        let resid = stationarity_check(&p, &bath, &xi, &[0.7, 3.0]).unwrap();
        assert!(resid < 1e-10, "residual {resid}");
    }
}
