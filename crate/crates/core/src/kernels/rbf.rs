use super::KernelError;

/// Isotropic squared-exponential kernel hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfHypers {
    pub variance: f64,
    pub lengthscale: f64,
}

/// `σ_f² exp(−‖x1−x2‖² / 2ℓ²)` with its derivatives with respect to σ_f² and ℓ.
pub fn rbf_with_grads(x1: &[f64], x2: &[f64], h: RbfHypers) -> Result<(f64, f64, f64), KernelError> {
    if x1.len() != x2.len() {
        return Err(KernelError::DimensionMismatch { expected: x1.len(), got: x2.len() });
    }
    let r2: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    let l2 = h.lengthscale * h.lengthscale;
    let e = (-0.5 * r2 / l2).exp();
    let value = h.variance * e;
    Ok((value, e, value * r2 / (l2 * h.lengthscale)))
}
