//! Small dense linear solves for the surrogate regressions.

use nalgebra::{DMatrix, DVector};

use crate::matrix::Matrix;

/// Solves `A x = b` for symmetric positive (semi)definite `A`. Tries Cholesky
/// first, then LU with a residual check; `None` means the system is singular
/// at working precision.
pub(crate) fn solve_spd(a: DMatrix<f64>, b: DVector<f64>) -> Option<Vec<f64>> {
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.solve(&b).iter().copied().collect());
    }
    let lu = a.clone().lu();
    let x = lu.solve(&b)?;
    let residual = (&a * &x - &b).norm();
    if !residual.is_finite() || residual > 1e-6 * (b.norm() + 1.0) {
        return None;
    }
    Some(x.iter().copied().collect())
}

/// Weighted ridge regression of `y` on the rows of `z` with an unpenalized
/// intercept, solved by weighted centering. Returns the coefficient vector
/// (the intercept is implied and not returned).
///
/// With all-zero weights the data term vanishes; a positive `lambda` then
/// yields the zero vector, which is the correct fully-penalized limit.
pub(crate) fn weighted_ridge(
    z: &Matrix,
    y: &[f64],
    weights: &[f64],
    lambda: f64,
) -> Option<Vec<f64>> {
    let n = z.n_rows();
    let d = z.n_cols();
    debug_assert_eq!(y.len(), n);
    debug_assert_eq!(weights.len(), n);

    let weight_sum: f64 = weights.iter().sum();
    let mut z_mean = vec![0.0; d];
    let mut y_mean = 0.0;
    if weight_sum > 0.0 {
        for (j, w) in weights.iter().enumerate() {
            y_mean += w * y[j];
            for (m, v) in z_mean.iter_mut().zip(z.row(j)) {
                *m += w * v;
            }
        }
        y_mean /= weight_sum;
        for m in &mut z_mean {
            *m /= weight_sum;
        }
    }

    let mut a = DMatrix::<f64>::zeros(d, d);
    let mut b = DVector::<f64>::zeros(d);
    for (j, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let row = z.row(j);
        let dy = y[j] - y_mean;
        for i in 0..d {
            let di = row[i] - z_mean[i];
            b[i] += w * di * dy;
            for k in i..d {
                a[(i, k)] += w * di * (row[k] - z_mean[k]);
            }
        }
    }
    for i in 0..d {
        for k in 0..i {
            a[(i, k)] = a[(k, i)];
        }
        a[(i, i)] += lambda;
    }
    solve_spd(a, b)
}

/// Plain weighted least squares, `min Σ w_j (x_j·beta - y_j)^2`, no intercept.
pub(crate) fn weighted_least_squares(
    design: &Matrix,
    y: &[f64],
    weights: &[f64],
) -> Option<Vec<f64>> {
    let n = design.n_rows();
    let d = design.n_cols();
    let mut a = DMatrix::<f64>::zeros(d, d);
    let mut b = DVector::<f64>::zeros(d);
    for j in 0..n {
        let w = weights[j];
        let row = design.row(j);
        for i in 0..d {
            b[i] += w * row[i] * y[j];
            for k in i..d {
                a[(i, k)] += w * row[i] * row[k];
            }
        }
    }
    for i in 0..d {
        for k in 0..i {
            a[(i, k)] = a[(k, i)];
        }
    }
    solve_spd(a, b)
}
