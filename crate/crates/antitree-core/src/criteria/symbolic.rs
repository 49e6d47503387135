//! Decisions from asymptotic classes.
//!
//! With `V_n = μ_n ℓ_n`, `D_n = ℓ_n / μ_n`, partial sums `P_n = Σ_{k≤n} V_k`
//! and tails `T_n = Σ_{k≥n} D_k`, discreteness, positivity and the trace
//! class all reduce to the behaviour of `P_n T_n` and two more series.

use crate::model::{AntitreeSpec, Growth};

use super::Verdict;

pub(crate) struct Classes {
    pub weight: Growth,
    pub length: Growth,
    pub volume: Growth,
    pub dual: Growth,
}

pub(crate) fn classes(spec: &AntitreeSpec) -> Option<Classes> {
    let t = spec.tail();
    Some(Classes {
        weight: t.weight()?,
        length: t.lengths()?,
        volume: t.volume_term()?,
        dual: t.dual_term()?,
    })
}

/// Asymptotic class of `P_n T_n`.
pub(crate) enum StringProduct {
    /// `L_μ = ∞`: every `T_n` is infinite.
    Infinite,
    Class(Growth),
    Unknown,
}

pub(crate) fn string_product(spec: &AntitreeSpec) -> StringProduct {
    let Some(c) = classes(spec) else {
        return StringProduct::Unknown;
    };
    let Some(tail) = c.dual.tail_sum() else {
        return StringProduct::Infinite;
    };
    match c.volume.partial_sum() {
        Some(p) => StringProduct::Class(p * tail),
        None => StringProduct::Unknown,
    }
}

/// `P_n T_n → 0`, the discreteness condition under infinite volume.
pub(crate) fn discrete_given_infinite_volume(spec: &AntitreeSpec) -> Verdict {
    match string_product(spec) {
        StringProduct::Infinite => Verdict::Fails,
        StringProduct::Class(g) => Verdict::from_bool(g.tends_to_zero()),
        StringProduct::Unknown => Verdict::Inconclusive,
    }
}

/// `sup_n P_n T_n < ∞`.
pub(crate) fn bounded_string_product(spec: &AntitreeSpec) -> Verdict {
    match string_product(spec) {
        StringProduct::Infinite => Verdict::Fails,
        StringProduct::Class(g) => Verdict::from_bool(g.bounded()),
        StringProduct::Unknown => Verdict::Inconclusive,
    }
}

/// Both trace-class series: `Σ μ_n ℓ_n²` and `Σ D_n P_{n−1}`.
pub(crate) fn trace_series(spec: &AntitreeSpec) -> Verdict {
    let Some(c) = classes(spec) else {
        return Verdict::Inconclusive;
    };
    let squares = (c.weight * c.length.squared()).summable();
    match c.volume.partial_sum() {
        Some(p) => Verdict::from_bool(squares && (c.dual * p).summable()),
        None if !squares => Verdict::Fails,
        None => Verdict::Inconclusive,
    }
}

/// `μ_n / P_n → 0`, which forces the isoperimetric constant to vanish.
pub(crate) fn isoperimetric_ratio_vanishes(spec: &AntitreeSpec) -> Option<bool> {
    let c = classes(spec)?;
    Some((c.weight / c.volume.partial_sum()?).tends_to_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LengthGen, SphereGen};

    #[test]
    fn polynomial_boundaries() {
        let v = |q, s| {
            let spec = AntitreeSpec::new(SphereGen::Polynomial { q }, LengthGen::Power { s }).unwrap();
            (
                discrete_given_infinite_volume(&spec),
                bounded_string_product(&spec),
                trace_series(&spec),
            )
        };
        assert_eq!(v(1, 1.0), (Verdict::Fails, Verdict::Holds, Verdict::Fails));
        assert_eq!(v(1, 1.5), (Verdict::Holds, Verdict::Holds, Verdict::Fails));
        assert_eq!(v(1, 1.6), (Verdict::Holds, Verdict::Holds, Verdict::Holds));
        assert_eq!(v(2, 0.5), (Verdict::Fails, Verdict::Fails, Verdict::Fails));
    }

    #[test]
    fn periodic_constant_lengths_have_infinite_dual_length() {
        let spec = AntitreeSpec::new(
            SphereGen::AlternatingPeriodic { pattern: vec![2, 3] },
            LengthGen::Constant { length: 1.0 },
        )
        .unwrap();
        assert!(matches!(string_product(&spec), StringProduct::Infinite));
    }
}
