//! Small dense complex linear algebra.
//!
//! Everything in this crate works on matrices of dimension at most a few
//! hundred, so a cyclic Jacobi eigensolver and characteristic-polynomial
//! root finding are entirely adequate and keep the crate dependency-free.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub fn identity(n: usize) -> CMat {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

/// |a><b|
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    let n = a.len();
    let m = b.len();
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            out[[i, j]] = a[i] * b[j].conj();
        }
    }
    out
}

pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius distance to the adjoint.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    fro_norm(&(a - &dagger(a)))
}

fn off_diagonal_norm(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[[i, j]].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the unitary of eigenvectors as
/// columns, so `a * v_k = lambda_k * v_k`.
pub fn hermitian_eigen(a: &CMat) -> (Array1<f64>, CMat) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigen requires a square matrix");
    let mut m = a.clone();
    let mut v = identity(n);
    let scale = fro_norm(&m).max(1.0);
    let tol = 1e-15 * scale;

    for _sweep in 0..100 {
        if off_diagonal_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let phase = apq / r;
                // tan of the rotation angle, smaller-root formula
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p' = c*col_p - s*conj(phase)*col_q
                //          col_q' = s*phase*col_p + c*col_q
                let cs = C64::new(c, 0.0);
                let sp = phase * s;
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = cs * mip - sp.conj() * miq;
                    m[[i, q]] = sp * mip + cs * miq;
                }
                for j in 0..n {
                    let mpj = m[[p, j]];
                    let mqj = m[[q, j]];
                    m[[p, j]] = cs * mpj - sp * mqj;
                    m[[q, j]] = sp.conj() * mpj + cs * mqj;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = cs * vip - sp.conj() * viq;
                    v[[i, q]] = sp * vip + cs * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());

    let mut lam = Array1::zeros(n);
    let mut vecs = Array2::zeros((n, n));
    for (k, &i) in order.iter().enumerate() {
        lam[k] = evals[i];
        for r in 0..n {
            vecs[[r, k]] = v[[r, i]];
        }
    }
    (lam, vecs)
}

pub fn min_eigenvalue_hermitian(a: &CMat) -> f64 {
    let (lam, _) = hermitian_eigen(a);
    lam[0]
}

/// exp(-i t H) for Hermitian H via eigendecomposition.
pub fn unitary_exp(h: &CMat, t: f64) -> CMat {
    let (lam, v) = hermitian_eigen(h);
    let n = h.nrows();
    let mut d = Array2::zeros((n, n));
    for k in 0..n {
        d[[k, k]] = C64::from_polar(1.0, -t * lam[k]);
    }
    v.dot(&d).dot(&dagger(&v))
}

/// Monic characteristic polynomial coefficients by the Faddeev-LeVerrier
/// recursion: `p(z) = z^n + c[n-1] z^(n-1) + ... + c[0]`.
pub fn char_poly(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut m = a.clone();
    for k in 1..=n {
        let ck = -trace(&m) / (k as f64);
        c[n - k] = ck;
        if k < n {
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[[i, i]] += ck;
            }
            m = a.dot(&shifted);
        }
    }
    c
}

/// All roots of a monic polynomial by Durand-Kerner iteration.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len();
    if n == 0 {
        return vec![];
    }
    let eval = |z: C64| -> C64 {
        let mut p = C64::new(1.0, 0.0);
        for &c in coeffs.iter().rev() {
            p = p * z + c;
        }
        p
    };
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..n).map(|k| seed.powu(k as u32 + 1) * radius).collect();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-15 * radius {
            break;
        }
    }
    z
}

/// Eigenvalues of a small general complex matrix.
pub fn small_complex_eigenvalues(a: &CMat) -> Vec<C64> {
    poly_roots(&char_poly(a))
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn solve_complex(a: &CMat, b: &CVec) -> CVec {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[[col, col]].norm();
        for r in (col + 1)..n {
            if m[[r, col]].norm() > best {
                best = m[[r, col]].norm();
                piv = r;
            }
        }
        if piv != col {
            for j in 0..n {
                let tmp = m[[col, j]];
                m[[col, j]] = m[[piv, j]];
                m[[piv, j]] = tmp;
            }
            let tmp = rhs[col];
            rhs[col] = rhs[piv];
            rhs[piv] = tmp;
        }
        let d = m[[col, col]];
        for r in (col + 1)..n {
            let factor = m[[r, col]] / d;
            for j in col..n {
                let v = m[[col, j]];
                m[[r, j]] -= factor * v;
            }
            let v = rhs[col];
            rhs[r] -= factor * v;
        }
    }
    let mut x: CVec = Array1::zeros(n);
    for col in (0..n).rev() {
        let mut s = rhs[col];
        for j in (col + 1)..n {
            s -= m[[col, j]] * x[j];
        }
        x[col] = s / m[[col, col]];
    }
    x
}
