//! Small numerical utilities shared across modules: quadrature, cubic
//! interpolation, finite-difference stencils, convergence-order fits, and a
//! tiny dense linear solver.

/// Trapezoidal quadrature on a (possibly non-uniform) grid.
pub fn trapezoid(ts: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(ts.len(), ys.len());
    let mut acc = 0.0;
    for k in 1..ts.len() {
        acc += 0.5 * (ts[k] - ts[k - 1]) * (ys[k] + ys[k - 1]);
    }
    acc
}

/// Second derivative from three samples on a non-uniform grid.
///
/// Reduces to the centered stencil for equal spacing; first-order accurate
/// otherwise, second-order on uniform grids.
pub fn second_derivative_3pt(t0: f64, t1: f64, t2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    2.0 * ((y2 - y1) / h2 - (y1 - y0) / h1) / (h1 + h2)
}

/// Cubic Lagrange interpolation of sampled data at `t`.
///
/// Uses the four samples bracketing `t` (clamped near the ends). The grid
/// must be strictly increasing; `t` must lie inside [ts[0], ts[n-1]].
pub fn cubic_interp(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    let n = ts.len();
    assert!(n >= 4, "cubic interpolation needs at least 4 samples");
    // index of the interval containing t
    let mut lo = match ts.binary_search_by(|a| a.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    lo = lo.min(n - 2);
    // window [i0, i0+3] around the interval
    let i0 = lo.saturating_sub(1).min(n - 4);
    let (mut num, mut _den) = (0.0, 0.0);
    for j in 0..4 {
        let tj = ts[i0 + j];
        let mut lj = 1.0;
        for k in 0..4 {
            if k != j {
                lj *= (t - ts[i0 + k]) / (tj - ts[i0 + k]);
            }
        }
        num += lj * ys[i0 + j];
    }
    num
}

/// Least-squares slope of log(err) against log(h): the measured order of a
/// method from a refinement study.
pub fn convergence_order(hs: &[f64], errs: &[f64]) -> f64 {
    assert_eq!(hs.len(), errs.len());
    assert!(hs.len() >= 2);
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Solve a small dense linear system A x = b by Gaussian elimination with
/// partial pivoting. Returns `None` when the pivot underflows `tol`.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < tol {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Relative deviation |a - b| / (1 + |b|), the drift metric used by the
/// conservation checks.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Max relative deviation across two equal-length slices.
pub fn rel_dev_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel_dev(*x, *y)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_linear_exact() {
        let ts: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * t + 1.0).collect();
        assert!((trapezoid(&ts, &ys) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn stencil_quadratic_exact() {
        // y = t^2 has second derivative 2 reproduced exactly, even off-uniform.
        let d = second_derivative_3pt(0.0, 0.3, 1.0, 0.0, 0.09, 1.0);
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_interp_reproduces_cubics() {
        let ts: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
        let f = |t: f64| 2.0 - t + 0.5 * t * t - 0.25 * t * t * t;
        let ys: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
        for &t in &[0.05, 0.333, 1.0, 1.87] {
            assert!((cubic_interp(&ts, &ys, t) - f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn order_fit_recovers_slope() {
        let hs = [0.1f64, 0.05, 0.025];
        let errs: Vec<f64> = hs.iter().map(|h| 3.0 * h.powi(4)).collect();
        assert!((convergence_order(&hs, &errs) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn dense_solve_3x3() {
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ];
        let b = [3.0, 5.0, 5.0];
        let x = solve_dense(&a, &b, 1e-14).unwrap();
        for (row, bi) in a.iter().zip(&b) {
            let lhs: f64 = row.iter().zip(&x).map(|(m, xi)| m * xi).sum();
            assert!((lhs - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_solve_rejected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(&a, &[1.0, 2.0], 1e-12).is_none());
    }
}
