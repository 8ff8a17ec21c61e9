use nalgebra::DMatrix;

/// Singular values below this fraction of the largest one are treated as zero.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// Moore-Penrose pseudo-inverse through the singular value decomposition.
///
/// Empty inputs are allowed and produce the transposed empty shape.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return DMatrix::zeros(cols, rows);
    }
    let cutoff = PINV_RELATIVE_CUTOFF * sigma_max;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            continue;
        }
        let inv = 1.0 / s;
        for i in 0..cols {
            let vik = v_t[(k, i)] * inv;
            if vik == 0.0 {
                continue;
            }
            for j in 0..rows {
                out[(i, j)] += vik * u[(j, k)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penrose_conditions_on_rank_deficient_matrix() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, -1.0, -2.0]);
        let p = pseudo_inverse(&a);
        let apa = &a * &p * &a;
        let pap = &p * &a * &p;
        assert!((apa - &a).abs().max() < 1e-12);
        assert!((pap - &p).abs().max() < 1e-12);
        let ap = &a * &p;
        assert!((ap.transpose() - &ap).abs().max() < 1e-12);
    }

    #[test]
    fn empty_shapes() {
        let a = DMatrix::<f64>::zeros(4, 0);
        assert_eq!(pseudo_inverse(&a).shape(), (0, 4));
    }

    #[test]
    fn invertible_matches_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let inv = a.clone().try_inverse().unwrap();
        assert!((pseudo_inverse(&a) - inv).abs().max() < 1e-13);
    }
}
