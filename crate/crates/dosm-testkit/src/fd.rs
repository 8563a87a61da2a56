//! Central finite differences for gradient checking.

/// Numerically differentiate `f` at `params` by central differences.
/// `epsilon` is clamped into `[1e-7, 1e-3]`, the window where truncation
/// and rounding error are both acceptable for f64.
pub fn finite_diff_grad(
    f: &mut dyn FnMut(&[f64]) -> f64,
    params: &[f64],
    epsilon: f64,
) -> Vec<f64> {
    let eps = epsilon.clamp(1e-7, 1e-3);
    let mut work = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        let orig = work[k];
        work[k] = orig + eps;
        let up = f(&work);
        work[k] = orig - eps;
        let down = f(&work);
        work[k] = orig;
        grad.push((up - down) / (2.0 * eps));
    }
    grad
}
