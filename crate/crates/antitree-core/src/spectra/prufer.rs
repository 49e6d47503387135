//! Prüfer-angle oscillation counting for piecewise-constant weights.
//!
//! With `f = ρ sin φ` and `μ f′ = ρ cos φ` the angle obeys
//! `φ′ = cos²φ / μ + λ μ sin²φ`, is strictly increasing in `λ` for `x > 0`,
//! and on a constant-weight interval has a closed-form advance: for `λ > 0`
//! the auxiliary angle `ψ` with `tan ψ = ω μ tan φ` moves by exactly `ω h`.
//! Eigenvalues are the `λ` where `φ(L) + θ` hits a positive multiple of `π`.

use std::f64::consts::{FRAC_PI_2, PI};

use super::transfer::{sym_transfer, Transfer};
use super::{BoundaryCondition, SpectraError};
use crate::model::MetricProfile;

/// Condition at the left end of a chain of intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftEnd {
    /// `μ f′ = 0`, start angle `π/2`.
    Neumann,
    /// `f = 0`, start angle `0`.
    Dirichlet,
}

/// Regular Sturm–Liouville problem `−(μ f′)′ = λ μ f` on consecutive
/// intervals with constant weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    weights: Vec<f64>,
    lengths: Vec<f64>,
    left: LeftEnd,
    right: BoundaryCondition,
}

/// Splits `φ = mπ + r` with `r ∈ [−π/2, π/2)`.
fn branch(phi: f64) -> (f64, f64) {
    let m = ((phi + FRAC_PI_2) / PI).floor();
    (m, phi - m * PI)
}

impl Chain {
    pub fn new(weights: Vec<f64>, lengths: Vec<f64>, left: LeftEnd, right: BoundaryCondition) -> Self {
        assert_eq!(weights.len(), lengths.len());
        assert!(!weights.is_empty());
        Chain {
            weights,
            lengths,
            left,
            right,
        }
    }

    /// Symmetric block of a truncated profile: Neumann at the root.
    pub fn symmetric(profile: &MetricProfile, right: BoundaryCondition) -> Self {
        let weights = (0..=profile.depth()).map(|n| profile.weight(n)).collect();
        Chain::new(weights, profile.lengths().to_vec(), LeftEnd::Neumann, right)
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    fn start_angle(&self) -> f64 {
        match self.left {
            LeftEnd::Neumann => FRAC_PI_2,
            LeftEnd::Dirichlet => 0.0,
        }
    }

    /// Prüfer angle at the right end as `(m, r)` with `φ = mπ + r`,
    /// `r ∈ [−π/2, π/2)`. Heavy intervals push `r` to `O(1/(√λ μ))`, far
    /// below the spacing of floats near `mπ`, so the branch index is never
    /// folded into the residue.
    pub fn angle_parts(&self, lambda: f64) -> (f64, f64) {
        if lambda == 0.0 {
            // Exact linear solutions: g is constant and f grows by h/μ · g.
            return match self.left {
                LeftEnd::Neumann => branch(FRAC_PI_2),
                LeftEnd::Dirichlet => {
                    let f: f64 = self.weights.iter().zip(&self.lengths).map(|(m, h)| h / m).sum();
                    branch(f.atan2(1.0))
                }
            };
        }
        let (mut m, mut r) = branch(self.start_angle());
        if lambda > 0.0 {
            let omega = lambda.sqrt();
            for (&mu, &h) in self.weights.iter().zip(&self.lengths) {
                let c = omega * mu;
                let (k, rpsi) = branch((c * r.sin()).atan2(r.cos()) + omega * h);
                m += k;
                r = rpsi.sin().atan2(c * rpsi.cos());
                if r >= FRAC_PI_2 {
                    r -= PI;
                    m += 1.0;
                }
            }
        } else {
            // The angle is trapped in (0, π/2]; propagate the normalized state.
            let kappa = (-lambda).sqrt();
            let mut phi = m * PI + r;
            for (&mu, &h) in self.weights.iter().zip(&self.lengths) {
                let (f, g) = (phi.sin(), phi.cos());
                let q = (-2.0 * kappa * h).exp();
                let (ch, sh) = (0.5 * (1.0 + q), 0.5 * (1.0 - q));
                let f2 = ch * f + sh / (kappa * mu) * g;
                let g2 = kappa * mu * sh * f + ch * g;
                phi = f2.atan2(g2).clamp(0.0, FRAC_PI_2);
            }
            (m, r) = branch(phi);
        }
        (m, r)
    }

    /// Prüfer angle at the right end.
    pub fn angle(&self, lambda: f64) -> f64 {
        let (m, r) = self.angle_parts(lambda);
        m * PI + r
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count(&self, lambda: f64) -> usize {
        let (m, r) = self.angle_parts(lambda);
        // φ + θ = (m + x)π with x ∈ [−1/2, 3/2)
        let x = (r + self.right.theta()) / PI;
        (m + x.ceil() - 1.0).max(0.0) as usize
    }

    /// `φ(L) + θ − jπ`: increasing in `λ`, zero at the `j`-th eigenvalue.
    pub fn residual(&self, lambda: f64, j: usize) -> f64 {
        let (m, r) = self.angle_parts(lambda);
        (m - j as f64) * PI + r + self.right.theta()
    }

    fn zero_is_eigenvalue(&self) -> bool {
        self.left == LeftEnd::Neumann && self.right.theta() == FRAC_PI_2
    }

    /// Bracket `[lo, hi]` with `count(lo) < k ≤ count(hi)`.
    fn bracket(&self, k: usize) -> (f64, f64) {
        let mut lo = 0.0;
        if self.count(lo) >= k {
            lo = -1.0;
            while self.count(lo) >= k {
                lo *= 2.0;
            }
        }
        let l = self.total_length();
        let mut hi = (PI * k as f64 / l).powi(2).max(1.0);
        while self.count(hi) < k {
            hi *= 2.0;
        }
        (lo, hi)
    }

    /// Isolates the `k`-th eigenvalue (1-based) by bisection on the count
    /// to relative width `rel_tol`. Returns the bracket.
    pub fn isolate(&self, k: usize, rel_tol: f64) -> (f64, f64) {
        let (mut lo, mut hi) = self.bracket(k);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= rel_tol * lo.abs().max(hi.abs()) {
                return (lo, hi);
            }
            if self.count(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// `k`-th eigenvalue, polished by bisection on the angle residual.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        if k == 1 && self.zero_is_eigenvalue() {
            return 0.0;
        }
        let (lo, hi) = self.isolate(k, 1e-10);
        bisect_sign(|x| self.residual(x, k), lo, hi)
    }

    /// Lowest `k_max` eigenvalues.
    pub fn eigenvalues(&self, k_max: usize) -> Vec<f64> {
        (1..=k_max).map(|k| self.eigenvalue(k)).collect()
    }

    /// All eigenvalues `≤ lambda_max`.
    pub fn eigenvalues_up_to(&self, lambda_max: f64) -> Vec<f64> {
        let k = self.count(lambda_max);
        let mut out = self.eigenvalues(k + 1);
        out.retain(|&x| x <= lambda_max);
        out
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]` down to adjacent floats.
/// Without a sign change (a root sitting on an endpoint, seen through
/// rounding) the endpoint with the smaller residual is returned.
pub(crate) fn bisect_sign(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() {
        return if flo.abs() <= fhi.abs() { lo } else { hi };
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Number of eigenvalues `< lambda` of the symmetric block with Neumann at
/// the root and `right_bc` at `t_{N+1}`.
pub fn sym_count(profile: &MetricProfile, lambda: f64, right_bc: BoundaryCondition) -> usize {
    Chain::symmetric(profile, right_bc).count(lambda)
}

/// `cos θ f(L) + sin θ μ f′(L)` for the solution with `f(0) = 1`,
/// `μ f′(0) = 0`, up to a positive factor.
pub fn boundary_functional(profile: &MetricProfile, lambda: f64, right_bc: BoundaryCondition) -> f64 {
    let m: Transfer = sym_transfer(profile, lambda, 0, profile.depth());
    let (f, g) = m.neumann_direction();
    let (s, c) = right_bc.theta().sin_cos();
    c * f + s * g
}

/// Lowest `k_max` eigenvalues of the symmetric block: count bisection to
/// `10⁻¹⁰` relative, then bisection on the boundary functional.
pub fn sym_eigenvalues(
    profile: &MetricProfile,
    right_bc: BoundaryCondition,
    k_max: usize,
) -> Result<Vec<f64>, SpectraError> {
    right_bc.validate()?;
    if k_max == 0 {
        return Err(SpectraError::InvalidInput("k_max must be at least 1".into()));
    }
    let chain = Chain::symmetric(profile, right_bc);
    Ok((1..=k_max)
        .map(|k| {
            if k == 1 && chain.zero_is_eigenvalue() {
                return 0.0;
            }
            let (lo, hi) = chain.isolate(k, 1e-10);
            bisect_sign(|x| boundary_functional(profile, x, right_bc), lo, hi)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(mu: u64, len: f64) -> MetricProfile {
        // μ_0 = 1·mu
        MetricProfile::from_sequences(vec![1, mu], vec![len]).unwrap()
    }

    #[test]
    fn textbook_neumann_dirichlet_count() {
        let p = unit(1, 2.0);
        for &lambda in &[0.0_f64, 0.3, 1.0, 5.0, 37.0, 1000.0] {
            let want = (lambda.sqrt() * 2.0 / PI - 0.5).ceil().max(0.0) as usize;
            assert_eq!(sym_count(&p, lambda, BoundaryCondition::Dirichlet), want, "λ={lambda}");
        }
    }

    #[test]
    fn textbook_neumann_dirichlet_eigenvalues() {
        let p = unit(3, 1.0);
        let ev = sym_eigenvalues(&p, BoundaryCondition::Dirichlet, 5).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let want = (PI * (k as f64 + 0.5)).powi(2);
            assert!((v - want).abs() <= 1e-12 * want, "{v} vs {want}");
        }
    }

    #[test]
    fn neumann_neumann_has_zero_mode() {
        let p = unit(2, 1.0);
        let ev = sym_eigenvalues(&p, BoundaryCondition::Neumann, 3).unwrap();
        assert_eq!(ev[0], 0.0);
        assert!((ev[1] - PI * PI).abs() < 1e-11 * PI * PI);
        assert_eq!(sym_count(&p, 0.0, BoundaryCondition::Neumann), 0);
        assert_eq!(sym_count(&p, 1e-3, BoundaryCondition::Neumann), 1);
    }

    #[test]
    fn negative_robin_eigenvalue() {
        // θ slightly above π/2: μ f′ = −cot θ f with −cot θ > 0 gives a
        // negative eigenvalue −κ² with κ tanh κ = −cot θ / μ on [0, 1].
        let theta = 2.0;
        let p = unit(1, 1.0);
        let ev = sym_eigenvalues(&p, BoundaryCondition::Robin { theta }, 1).unwrap();
        let kappa = (-ev[0]).sqrt();
        assert!(ev[0] < 0.0);
        assert!((kappa * kappa.tanh() + 1.0 / theta.tan()).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_chain_matches_equal_weights() {
        let chain = Chain::new(
            vec![3.0, 3.0],
            vec![1.0, 2.0],
            LeftEnd::Dirichlet,
            BoundaryCondition::Dirichlet,
        );
        let ev = chain.eigenvalues(4);
        for (k, v) in ev.iter().enumerate() {
            let want = (PI * (k as f64 + 1.0) / 3.0).powi(2);
            assert!((v - want).abs() < 1e-12 * want);
        }
    }
}
