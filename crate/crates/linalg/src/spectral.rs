use nalgebra::{Complex, DMatrix, Schur};

use crate::LinalgError;

/// A matrix is Hurwitz when every eigenvalue has real part below `-HURWITZ_MARGIN`.
pub const HURWITZ_MARGIN: f64 = 1e-12;

fn ensure_square(m: &DMatrix<f64>) -> Result<usize, LinalgError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    Ok(rows)
}

/// Eigenvalues of a real square matrix via the real Schur form.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, LinalgError> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or(LinalgError::NoConvergence("Schur decomposition"))?;
    Ok(schur.complex_eigenvalues().iter().cloned().collect())
}

/// Largest real part over the spectrum; `-inf` for an empty matrix.
pub fn max_real_eigenvalue(a: &DMatrix<f64>) -> Result<f64, LinalgError> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    matches!(max_real_eigenvalue(a), Ok(m) if m < -HURWITZ_MARGIN)
}

/// Determinants of the leading k×k submatrices, k = 1..n.
pub fn leading_principal_minors(s: &DMatrix<f64>) -> Result<Vec<f64>, LinalgError> {
    let n = ensure_square(s)?;
    Ok((1..=n)
        .map(|k| s.view((0, 0), (k, k)).clone_owned().determinant())
        .collect())
}

/// Off-diagonal entries nonpositive and every leading principal minor positive.
pub fn is_m_matrix(s: &DMatrix<f64>) -> bool {
    let Ok(n) = ensure_square(s) else {
        return false;
    };
    for i in 0..n {
        for j in 0..n {
            if i != j && s[(i, j)] > 0.0 {
                return false;
            }
        }
    }
    leading_principal_minors(s)
        .map(|m| m.iter().all(|&d| d > 0.0))
        .unwrap_or(false)
}
