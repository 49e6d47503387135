//! Isoperimetric constant and volume growth.

use serde::Serialize;

use crate::model::{AntitreeSpec, LengthGen, MetricProfile, SeriesStatus, SphereGen};

use super::symbolic::isoperimetric_ratio_vanishes;
use super::Verdict;

/// How the reported `alpha` relates to the infimum over all generations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AlphaCertificate {
    /// Ratios decrease strictly to a known limit, which is the infimum.
    ClosedFormLimit { limit: f64 },
    /// Ratios tend to zero, so the infimum is zero.
    TendsToZero,
    /// Only the realized ratios are known; `alpha` is an upper bound.
    PrefixOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Isoperimetric {
    pub alpha: f64,
    /// `alpha² / 4`, a lower bound on the bottom of the spectrum.
    pub cheeger_lower: f64,
    /// `μ_n / Σ_{k≤n} μ_k ℓ_k` for `n ≤ N`.
    pub ratios: Vec<f64>,
    pub prefix_min: f64,
    pub certificate: AlphaCertificate,
}

pub fn isoperimetric_constant(profile: &MetricProfile, spec: &AntitreeSpec) -> Isoperimetric {
    let ratios: Vec<f64> = (0..=profile.depth())
        .map(|n| profile.weight(n) / profile.volume_through(n).expect("in range"))
        .collect();
    let prefix_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let certificate = match (spec.spheres(), spec.lengths()) {
        // μ_n / P_n = β^{2n+1}(β² − 1) / (ℓ β (β^{2n+2} − 1)) decreases to (1 − β^{-2})/ℓ
        (SphereGen::Exponential { beta }, LengthGen::Constant { length }) => AlphaCertificate::ClosedFormLimit {
            limit: (1.0 - (*beta as f64).powi(-2)) / length,
        },
        _ if isoperimetric_ratio_vanishes(spec) == Some(true) => AlphaCertificate::TendsToZero,
        _ => AlphaCertificate::PrefixOnly,
    };
    let alpha = match certificate {
        AlphaCertificate::ClosedFormLimit { limit } => limit,
        AlphaCertificate::TendsToZero => 0.0,
        AlphaCertificate::PrefixOnly => prefix_min,
    };
    Isoperimetric {
        alpha,
        cheeger_lower: 0.25 * alpha * alpha,
        ratios,
        prefix_min,
        certificate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeGrowth {
    /// The estimate needs infinite total length.
    pub applicable: Verdict,
    /// `min_{N/2 ≤ n ≤ N} ln(Σ_{k≤n} μ_k ℓ_k) / t_{n+1}`.
    pub partial_liminf: f64,
    /// Exact `liminf` for families where it is known in closed form.
    #[serde(serialize_with = "serialize_limit")]
    pub limit: Option<f64>,
    /// `v² / 4` with `v` the limit when known, else the partial value.
    #[serde(with = "crate::numeric::extended_float")]
    pub lambda0_upper: f64,
}

fn serialize_limit<S: serde::Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => crate::numeric::extended_float::serialize(v, s),
        None => s.serialize_none(),
    }
}

pub fn volume_growth(profile: &MetricProfile, spec: &AntitreeSpec) -> VolumeGrowth {
    let applicable = match crate::model::classify_series(spec).total_length.status {
        SeriesStatus::Diverges => Verdict::Holds,
        SeriesStatus::Converges => Verdict::Fails,
        SeriesStatus::Inconclusive => Verdict::Inconclusive,
    };
    let n_max = profile.depth();
    let t = profile.breakpoints();
    let partial_liminf = (n_max / 2..=n_max)
        .map(|n| profile.volume_through(n).expect("in range").ln() / t[n + 1])
        .fold(f64::INFINITY, f64::min);
    let limit = if applicable != Verdict::Holds {
        None
    } else {
        match (spec.spheres(), spec.lengths()) {
            (SphereGen::Exponential { beta }, LengthGen::Constant { length }) => {
                Some(2.0 * (*beta as f64).ln() / length)
            }
            // ln P_n grows linearly in n while t_n grows sublinearly
            (SphereGen::Exponential { .. }, LengthGen::Power { .. }) => Some(f64::INFINITY),
            // P_n is polynomial in t_n
            (SphereGen::Polynomial { .. } | SphereGen::AlternatingPeriodic { .. }, LengthGen::Constant { .. })
            | (SphereGen::Polynomial { .. } | SphereGen::AlternatingPeriodic { .. }, LengthGen::Power { .. }) => {
                Some(0.0)
            }
            _ => None,
        }
    };
    let v = limit.unwrap_or(partial_liminf);
    VolumeGrowth {
        applicable,
        partial_liminf,
        limit,
        lambda0_upper: 0.25 * v * v,
    }
}
