//! Applicability flags for the singular-spectrum results. The flags say
//! whether the hypotheses of each result are met; the results themselves
//! rest on external theory and are not re-derived here.

use serde::Serialize;

use crate::model::{AntitreeSpec, LengthGen, MetricProfile, SphereGen};

/// Where the finite-value and periodicity flags come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagBasis {
    /// Decided from the generators for every index.
    Symbolic,
    /// Detected on the realized prefix only.
    RealizedPrefix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularFlags {
    pub basis: FlagBasis,
    /// `inf ℓ_n > 0`.
    pub lengths_bounded_below: Option<bool>,
    /// `liminf s_{n+2}/s_n > 1`.
    pub ratio_liminf_above_one: Option<bool>,
    /// Both of the above: the standing hypothesis of every flag below.
    pub hypothesis: Option<bool>,
    /// Hypothesis plus `sup ℓ_n = ∞`: `σ = [0, ∞)` and `σ_ac = ∅`.
    pub unbounded_lengths: Option<bool>,
    /// Hypothesis plus `sup s_{n+2}/s_n = ∞`: `σ_ac = ∅`.
    pub unbounded_ratios: Option<bool>,
    /// `{ℓ_n}` and `{s_{n+2}/s_n}` are finite sets.
    pub finite_value_sets: Option<bool>,
    /// `(ℓ_n, s_{n+2}/s_n)` is eventually periodic.
    pub eventually_periodic: Option<bool>,
    pub period: Option<usize>,
    /// Hypothesis and finite value sets hold, so `σ_ac ≠ ∅` exactly when
    /// the pair sequence is eventually periodic.
    pub periodicity_decides_ac: Option<bool>,
}

impl SingularFlags {
    /// `Some(true)` when a result forces `σ_ac = ∅`, `Some(false)` when the
    /// periodicity result forces `σ_ac ≠ ∅`.
    pub fn ac_empty(&self) -> Option<bool> {
        if self.unbounded_lengths == Some(true) || self.unbounded_ratios == Some(true) {
            return Some(true);
        }
        match (self.periodicity_decides_ac, self.eventually_periodic) {
            (Some(true), Some(p)) => Some(!p),
            _ => None,
        }
    }
}

fn and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

/// One entry `(ℓ_n, s_{n+2}, s_n)` of the pair sequence.
#[derive(Debug, Clone, Copy)]
struct Pair {
    length: f64,
    num: u64,
    den: u64,
}

impl Pair {
    fn same(&self, other: &Pair) -> bool {
        let ratio_eq = u128::from(self.num) * u128::from(other.den) == u128::from(other.num) * u128::from(self.den);
        let scale = self.length.abs().max(other.length.abs());
        ratio_eq && (self.length - other.length).abs() <= 1e-12 * scale
    }
}

fn pairs(profile: &MetricProfile) -> Vec<Pair> {
    let s = profile.spheres();
    (0..profile.depth())
        .map(|n| Pair {
            length: profile.lengths()[n],
            num: s[n + 2],
            den: s[n],
        })
        .collect()
}

/// No value first appears in the second half of the sequence.
fn no_new_values(xs: &[Pair]) -> bool {
    let half = xs.len() / 2;
    xs[half..].iter().all(|x| xs[..half].iter().any(|y| y.same(x)))
}

/// Smallest period `p ≤ len/3` holding over the last two thirds.
fn detect_period(xs: &[Pair]) -> Option<usize> {
    let len = xs.len();
    let start = len / 3;
    (1..=len / 3).find(|&p| (start..len - p).all(|n| xs[n].same(&xs[n + p])))
}

pub fn singular_flags(spec: &AntitreeSpec, profile: &MetricProfile) -> SingularFlags {
    let lengths_class = spec.tail().lengths();
    let lengths_bounded_below = lengths_class.map(|g| g.bounded_below());
    let lengths_unbounded = lengths_class.map(|g| !g.bounded());
    let (ratio_liminf_above_one, ratio_unbounded) = match spec.spheres() {
        SphereGen::Exponential { .. } => (Some(true), Some(false)),
        SphereGen::Polynomial { .. } => (Some(false), Some(false)),
        // the ratios over one period multiply to 1, so some ratio is ≤ 1
        SphereGen::AlternatingPeriodic { .. } => (Some(false), Some(false)),
        SphereGen::Explicit { .. } => (None, None),
    };
    let hypothesis = and(lengths_bounded_below, ratio_liminf_above_one);

    let seq = pairs(profile);
    let (basis, finite_value_sets, eventually_periodic, period) = if spec.is_builtin() {
        let lengths_finite = match spec.lengths() {
            LengthGen::Constant { .. } => true,
            LengthGen::Power { s } => *s == 0.0,
            _ => unreachable!("built-in lengths"),
        };
        let ratios_finite = !matches!(spec.spheres(), SphereGen::Polynomial { .. });
        let finite = lengths_finite && ratios_finite;
        // strictly monotone lengths or ratios rule out periodicity; otherwise
        // both sequences are periodic from n = 1 on and the prefix is exact
        let period = if finite { detect_period(&seq) } else { None };
        (FlagBasis::Symbolic, Some(finite), Some(finite), period)
    } else if seq.len() >= 3 {
        let period = detect_period(&seq);
        (
            FlagBasis::RealizedPrefix,
            Some(no_new_values(&seq)),
            Some(period.is_some()),
            period,
        )
    } else {
        (FlagBasis::RealizedPrefix, None, None, None)
    };

    SingularFlags {
        basis,
        lengths_bounded_below,
        ratio_liminf_above_one,
        hypothesis,
        unbounded_lengths: and(hypothesis, lengths_unbounded),
        unbounded_ratios: and(hypothesis, ratio_unbounded),
        finite_value_sets,
        eventually_periodic,
        period,
        periodicity_decides_ac: and(hypothesis, finite_value_sets),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_profile, CustomLength, Growth, TailDescriptor};

    #[test]
    fn exponential_constant_is_periodic() {
        let spec = AntitreeSpec::new(SphereGen::Exponential { beta: 3 }, LengthGen::Constant { length: 1.5 }).unwrap();
        let f = singular_flags(&spec, &build_profile(&spec, 20).unwrap());
        assert_eq!(f.hypothesis, Some(true));
        assert_eq!(f.period, Some(1));
        assert_eq!(f.ac_empty(), Some(false));
    }

    #[test]
    fn exponential_with_unbounded_lengths() {
        let spec = AntitreeSpec::new(
            SphereGen::Exponential { beta: 2 },
            LengthGen::Custom(CustomLength::new("linear", |n| 1.0 + n as f64)),
        )
        .unwrap()
        .with_tail(TailDescriptor::Known {
            spheres: Growth::geometric(2.0),
            lengths: Growth::power(1.0),
        })
        .unwrap();
        let f = singular_flags(&spec, &build_profile(&spec, 20).unwrap());
        assert_eq!(f.unbounded_lengths, Some(true));
        assert_eq!(f.ac_empty(), Some(true));
        assert_eq!(f.basis, FlagBasis::RealizedPrefix);
        assert_eq!(f.eventually_periodic, Some(false));
    }

    #[test]
    fn polynomial_fails_hypothesis() {
        let spec = AntitreeSpec::new(SphereGen::Polynomial { q: 2 }, LengthGen::Constant { length: 1.0 }).unwrap();
        let f = singular_flags(&spec, &build_profile(&spec, 20).unwrap());
        assert_eq!(f.hypothesis, Some(false));
        assert_eq!(f.unbounded_lengths, Some(false));
        assert_eq!(f.ac_empty(), None);
    }

    #[test]
    fn explicit_periodic_pairs_are_detected() {
        let s: Vec<u64> = std::iter::once(1).chain((0..30).map(|i| [2u64, 6, 3][i % 3])).collect();
        let l: Vec<f64> = (0..30).map(|i| [1.0, 0.5][i % 2]).collect();
        let spec = AntitreeSpec::new(SphereGen::Explicit { values: s }, LengthGen::Explicit { values: l }).unwrap();
        let f = singular_flags(&spec, &build_profile(&spec, 29).unwrap());
        assert_eq!(f.basis, FlagBasis::RealizedPrefix);
        assert_eq!(f.finite_value_sets, Some(true));
        assert_eq!(f.eventually_periodic, Some(true));
        assert_eq!(f.period, Some(6));
        assert_eq!(f.hypothesis, None);
    }
}
