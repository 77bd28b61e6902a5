//! Redfield generator for the effective two-level system.
//!
//! The generator is assembled from the golden-rule bath spectrum
//! gamma(nu) = 4 J(|nu|) x thermal occupation, without the secular
//! approximation and without Lamb-shift terms: the spectrum of the
//! resulting 4x4 superoperator provides an independent reference for the
//! decay rates of the population and coherence sectors.

use crate::error::Result;
use crate::linalg::{self, CMat, CVec, C64};
use crate::model::EffectiveSystem;
use crate::spectral::SpectralModel;
use ndarray::{Array1, Array2};

/// One-sided golden-rule rate density at frequency `nu` (positive `nu` =
/// downward transition releasing energy into the bath).
fn gamma_rate(model: &SpectralModel, beta: f64, nu: f64) -> Result<f64> {
    let tiny = 1e-12;
    if nu.abs() < tiny {
        Ok(4.0 * model.j_tilde_zero()? / beta)
    } else if nu > 0.0 {
        let x = (-beta * nu).exp();
        Ok(4.0 * model.eval_j(nu)? / (1.0 - x))
    } else {
        let x = (beta * nu).exp(); // < 1
        Ok(4.0 * model.eval_j(-nu)? * x / (1.0 - x))
    }
}

/// The 4x4 generator acting on vectorized 2x2 density matrices in the
/// dressed basis, row-major index 2*i + j for rho_{ij}.
pub fn redfield_generator(
    eff: &EffectiveSystem,
    model: &SpectralModel,
    beta: f64,
    lambda: f64,
) -> Result<CMat> {
    let e = [eff.e1, eff.e2];
    let a = eff.gbar;
    // filtered coupling: Lam_{mn} = A_{mn} * gamma(e_n - e_m) / 2
    let mut lam = [[0.0f64; 2]; 2];
    for m in 0..2 {
        for n in 0..2 {
            lam[m][n] = a[m][n] * 0.5 * gamma_rate(model, beta, e[n] - e[m])?;
        }
    }

    let lam2 = lambda * lambda;
    let apply = |rho: &[[C64; 2]; 2]| -> [[C64; 2]; 2] {
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                // -i [H, rho]
                out[i][j] += C64::new(0.0, -(e[i] - e[j])) * rho[i][j];
                // lambda^2 (Lam rho A - A Lam rho + A rho Lam^T - rho Lam^T A)
                let mut d = C64::new(0.0, 0.0);
                for k in 0..2 {
                    for l in 0..2 {
                        d += lam[i][k] * rho[k][l] * a[l][j];
                        d += a[i][k] * rho[k][l] * lam[j][l];
                    }
                }
                for k in 0..2 {
                    for l in 0..2 {
                        d -= a[i][k] * lam[k][l] * rho[l][j];
                        d -= rho[i][k] * lam[l][k] * a[l][j];
                    }
                }
                out[i][j] += d * lam2;
            }
        }
        out
    };

    let mut gen: CMat = Array2::zeros((4, 4));
    for col in 0..4 {
        let mut basis = [[C64::new(0.0, 0.0); 2]; 2];
        basis[col / 2][col % 2] = C64::new(1.0, 0.0);
        let image = apply(&basis);
        for row in 0..4 {
            gen[[row, col]] = image[row / 2][row % 2];
        }
    }
    Ok(gen)
}

/// Eigenvalues of the Redfield generator. For modes evolving as e^{nu t},
/// the correspondence with resonance energies eps is nu = i eps, i.e. the
/// decay rate Im(eps) equals -Re(nu).
pub fn redfield_reference(
    eff: &EffectiveSystem,
    model: &SpectralModel,
    beta: f64,
    lambda: f64,
) -> Result<[C64; 4]> {
    let gen = redfield_generator(eff, model, beta, lambda)?;
    let eigs = linalg::small_complex_eigenvalues(&gen);
    Ok([eigs[0], eigs[1], eigs[2], eigs[3]])
}

/// Stationary 2x2 density matrix of the generator, from the linear system
/// L rho = 0 with unit trace enforced through normal equations.
pub fn redfield_stationary(
    eff: &EffectiveSystem,
    model: &SpectralModel,
    beta: f64,
    lambda: f64,
) -> Result<CMat> {
    let gen = redfield_generator(eff, model, beta, lambda)?;
    // stack the trace constraint as a fifth row, solve M^H M x = M^H b
    let mut m: CMat = Array2::zeros((5, 4));
    for i in 0..4 {
        for j in 0..4 {
            m[[i, j]] = gen[[i, j]];
        }
    }
    m[[4, 0]] = C64::new(1.0, 0.0);
    m[[4, 3]] = C64::new(1.0, 0.0);
    let mh = linalg::dagger(&m);
    let mhm = mh.dot(&m);
    let mut rhs: CVec = Array1::zeros(4);
    for j in 0..4 {
        rhs[j] = mh[[j, 4]];
    }
    let x = linalg::solve_complex(&mhm, &rhs);
    let mut rho: CMat = Array2::zeros((2, 2));
    for i in 0..2 {
        for j in 0..2 {
            rho[[i, j]] = x[2 * i + j];
        }
    }
    Ok(rho)
}
