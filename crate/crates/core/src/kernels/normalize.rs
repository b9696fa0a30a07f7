use super::KernelError;

/// Normalized kernel `k12 / sqrt(k11 k22)` and its gradient
///
/// ```text
/// ∂k̂12 = ∂k12 / sqrt(k11 k22) − k̂12 (∂k11 k22 + k11 ∂k22) / (2 k11 k22)
/// ```
pub fn normalize_with_grads(
    k12: f64,
    k11: f64,
    k22: f64,
    dk12: &[f64],
    dk11: &[f64],
    dk22: &[f64],
) -> Result<(f64, Vec<f64>), KernelError> {
    if !(k11 > 0.0) || !(k22 > 0.0) {
        return Err(KernelError::DegenerateSelfKernel { k11, k22 });
    }
    let prod = k11 * k22;
    let root = prod.sqrt();
    let value = k12 / root;
    let grad = dk12
        .iter()
        .zip(dk11)
        .zip(dk22)
        .map(|((d12, d11), d22)| d12 / root - value * (d11 * k22 + k11 * d22) / (2.0 * prod))
        .collect();
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_normalization_is_constant() {
        let (v, g) = normalize_with_grads(3.0, 3.0, 3.0, &[0.7, -1.0], &[0.7, -1.0], &[0.7, -1.0]).unwrap();
        assert_eq!(v, 1.0);
        assert!(g.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn zero_cross_term_keeps_only_first_part() {
        let (v, g) = normalize_with_grads(0.0, 4.0, 9.0, &[1.2], &[5.0], &[-3.0]).unwrap();
        assert_eq!(v, 0.0);
        assert!((g[0] - 1.2 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn matches_finite_differences() {
        // k_ij(θ) = base_ij + slope_ij θ at θ = 0 gives k11=4, k22=9, k12=3.
        let (b12, b11, b22) = (3.0, 4.0, 9.0);
        let (s12, s11, s22) = (0.8, -0.5, 1.5);
        let (v, g) = normalize_with_grads(b12, b11, b22, &[s12], &[s11], &[s22]).unwrap();
        assert_eq!(v, 0.5);
        let f = |t: f64| (b12 + s12 * t) / ((b11 + s11 * t) * (b22 + s22 * t)).sqrt();
        let h = 1e-6;
        let fd = (f(h) - f(-h)) / (2.0 * h);
        assert!((g[0] - fd).abs() / fd.abs() < 1e-8);
    }

    #[test]
    fn rejects_degenerate_self_kernels() {
        assert!(matches!(
            normalize_with_grads(1.0, 0.0, 1.0, &[], &[], &[]),
            Err(KernelError::DegenerateSelfKernel { .. })
        ));
        assert!(normalize_with_grads(1.0, 1.0, -2.0, &[], &[], &[]).is_err());
    }
}
