//! Fixtures shared by the benchmarks.

use antitree_core::model::{build_profile, AntitreeSpec, LengthGen, MetricProfile, SphereGen};

/// Polynomial spheres `(n+1)^q` with lengths `(n+1)^{-s}`.
pub fn polynomial(q: u32, s: f64) -> AntitreeSpec {
    AntitreeSpec::new(SphereGen::Polynomial { q }, LengthGen::Power { s }).expect("valid family")
}

/// Doubling spheres on unit edges.
pub fn doubling() -> AntitreeSpec {
    AntitreeSpec::new(SphereGen::Exponential { beta: 2 }, LengthGen::Constant { length: 1.0 }).expect("valid family")
}

/// The small tree with spheres 1, 2, 3, 2 on unit edges.
pub fn small_tree() -> MetricProfile {
    MetricProfile::from_sequences(vec![1, 2, 3, 2], vec![1.0; 3]).expect("valid profile")
}

pub fn profile(spec: &AntitreeSpec, depth: usize) -> MetricProfile {
    build_profile(spec, depth).expect("profile builds")
}
