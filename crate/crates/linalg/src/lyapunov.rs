use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{max_abs, max_real_eigenvalue, LinalgError, HURWITZ_MARGIN};

/// Residual bound promised for `AᵀX + XA + I`.
pub const LYAPUNOV_RESIDUAL_BOUND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessValue {
    /// `1 / λ_max(X)`.
    pub value: f64,
    pub lyapunov_solution: DMatrix<f64>,
    /// Max-abs entry of `AᵀX + XA + I`.
    pub residual: f64,
}

/// Solves `AᵀX + XA = −I` for Hurwitz `A`.
///
/// The equation is vectorized as `(I⊗Aᵀ + Aᵀ⊗I) vec(X) = −vec(I)` and solved
/// densely, which is adequate up to n ≈ 30.
pub fn solve_lyapunov(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let (n, cols) = a.shape();
    if n != cols {
        return Err(LinalgError::NotSquare { rows: n, cols });
    }
    let max_real = max_real_eigenvalue(a)?;
    if max_real >= -HURWITZ_MARGIN {
        return Err(LinalgError::NotHurwitz { max_real });
    }
    let nn = n * n;
    let mut k = DMatrix::<f64>::zeros(nn, nn);
    // Column-major vec: X_ij sits at i + n*j.
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for q in 0..n {
                // (I ⊗ Aᵀ): couples X_qj with weight A_qi.
                k[(row, q + n * j)] += a[(q, i)];
                // (Aᵀ ⊗ I): couples X_iq with weight A_qj.
                k[(row, i + n * q)] += a[(q, j)];
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(nn);
    for i in 0..n {
        rhs[i + n * i] = -1.0;
    }
    let sol = k.lu().solve(&rhs).ok_or(LinalgError::Singular)?;
    let x = DMatrix::from_column_slice(n, n, sol.as_slice());
    Ok((&x + x.transpose()) * 0.5)
}

fn residual(a: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    max_abs(&(a.transpose() * x + x * a + DMatrix::<f64>::identity(n, n)))
}

/// Robustness measure `R(A) = 1/λ_max(X)` with `X` the Lyapunov solution.
pub fn robustness(a: &DMatrix<f64>) -> Result<RobustnessValue, LinalgError> {
    let x = solve_lyapunov(a)?;
    let eig = SymmetricEigen::new(x.clone());
    let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lambda_max > 0.0) {
        return Err(LinalgError::NotHurwitz { max_real: 0.0 });
    }
    Ok(RobustnessValue {
        value: 1.0 / lambda_max,
        residual: residual(a, &x),
        lyapunov_solution: x,
    })
}
