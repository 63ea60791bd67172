//! Central-difference gradient checking.

/// Central differences `(f(p + h·e_i) − f(p − h·e_i)) / 2h` for every coordinate.
pub fn numeric_gradient(mut f: impl FnMut(&[f64]) -> f64, params: &[f64], h: f64) -> Vec<f64> {
    assert!(h > 0.0, "step must be positive");
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖₂ / ‖b‖₂`, or `‖a − b‖₂` when `b` vanishes.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if norm > 0.0 {
        diff / norm
    } else {
        diff
    }
}

/// Compares `analytic` against central differences of `f` around `params`,
/// returning the norm-wise [`relative_error`]. A norm-wise measure avoids
/// dividing round-off by coordinates whose true derivative is zero.
pub fn finite_diff_check(f: impl FnMut(&[f64]) -> f64, params: &[f64], analytic: &[f64], h: f64) -> f64 {
    assert_eq!(params.len(), analytic.len());
    relative_error(analytic, &numeric_gradient(f, params, h))
}
