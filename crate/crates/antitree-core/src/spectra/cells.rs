//! Single-interval blocks with closed-form spectra.

use std::f64::consts::PI;

use super::prufer::{Chain, LeftEnd};
use super::BoundaryCondition;

/// `π² k² / ℓ²` for `k = 1..=k_max`: Dirichlet–Dirichlet on one interval.
pub fn cell_eigenvalues(length: f64, k_max: usize) -> Vec<f64> {
    assert!(length > 0.0, "cell length must be positive");
    (1..=k_max).map(|k| (PI * k as f64 / length).powi(2)).collect()
}

/// Dirichlet–Dirichlet eigenvalues `≤ lambda_max`.
pub fn cell_eigenvalues_up_to(length: f64, lambda_max: f64) -> Vec<f64> {
    if lambda_max <= 0.0 {
        return Vec::new();
    }
    let k = (length * lambda_max.sqrt() / PI).floor() as usize;
    let mut out = cell_eigenvalues(length, k + 1);
    out.retain(|&x| x <= lambda_max);
    out
}

/// Spectrum of the outermost interval `I_N` on functions that vanish at
/// the inner sphere and sum to zero over the outer sphere.
///
/// Dirichlet at `t_N`; the truncation condition at `t_{N+1}` acts on the
/// right end with weight `μ_N`. Dirichlet gives `π²k²/ℓ²`, Neumann gives
/// `π²(k − ½)²/ℓ²`, Robin goes through the oscillation count.
pub fn boundary_cell_eigenvalues_up_to(length: f64, weight: f64, bc: BoundaryCondition, lambda_max: f64) -> Vec<f64> {
    match bc {
        BoundaryCondition::Dirichlet => cell_eigenvalues_up_to(length, lambda_max),
        BoundaryCondition::Neumann => {
            if lambda_max <= 0.0 {
                return Vec::new();
            }
            let k = (length * lambda_max.sqrt() / PI + 0.5).floor() as usize;
            (1..=k + 1)
                .map(|k| (PI * (k as f64 - 0.5) / length).powi(2))
                .filter(|&x| x <= lambda_max)
                .collect()
        }
        BoundaryCondition::Robin { .. } => {
            Chain::new(vec![weight], vec![length], LeftEnd::Dirichlet, bc).eigenvalues_up_to(lambda_max)
        }
    }
}
