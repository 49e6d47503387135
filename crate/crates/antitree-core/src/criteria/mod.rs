//! Closed-form spectral criteria and the diagnostics report.
//!
//! Every criterion is a statement about an infinite series or a limit, so
//! verdicts are three-valued. Built-in families are decided from their
//! asymptotic classes; finite data alone only ever yields `Inconclusive`
//! together with the realized partial quantities.

mod ac;
mod gap;
mod iso;
mod singular;
mod symbolic;
mod tails;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_profile, classify_series, AntitreeSpec, ModelError, SeriesClassification, SeriesStatus};

pub use ac::{
    ac_sphere_ratio_sum, ac_string_deviation, ac_window_sum, m_of_n, window_term, RatioVariant, SphereRatioSum,
    StringDeviation, WindowScheme, WindowSum,
};
pub use gap::{
    discreteness_witness, essential_gap_constant, gap_constant, interval_sup, Discreteness, EssentialGap, GapConstant,
};
pub use iso::{isoperimetric_constant, volume_growth, AlphaCertificate, Isoperimetric, VolumeGrowth};
pub use singular::{singular_flags, FlagBasis, SingularFlags};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("window ({0}, {1}) is not inside the realized profile")]
    WindowOutOfRange(f64, f64),
    #[error("implication violated: {0}")]
    Implication(String),
}

/// Three-valued outcome of a criterion, plus "the criterion's hypotheses
/// are not met".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn from_option(b: Option<bool>) -> Self {
        b.map_or(Verdict::Inconclusive, Verdict::from_bool)
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    /// Kleene conjunction; `NotApplicable` counts as unknown.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Inconclusive,
        }
    }
}

/// Closed interval `[lo, hi]`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    #[serde(with = "crate::numeric::extended_float")]
    pub lo: f64,
    #[serde(with = "crate::numeric::extended_float")]
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        Bracket { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Bracket { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeficiencyIndex {
    Zero,
    One,
    Unknown,
}

/// Self-adjointness from the volume series: essentially self-adjoint iff
/// the total volume is infinite, deficiency one otherwise.
pub fn self_adjointness(spec: &AntitreeSpec) -> (Verdict, DeficiencyIndex) {
    match classify_series(spec).volume.status {
        SeriesStatus::Diverges => (Verdict::Holds, DeficiencyIndex::Zero),
        SeriesStatus::Converges => (Verdict::Fails, DeficiencyIndex::One),
        SeriesStatus::Inconclusive => (Verdict::Inconclusive, DeficiencyIndex::Unknown),
    }
}

/// Trace-class resolvent: `Σ μ_n ℓ_n²` and `Σ (ℓ_n/μ_n) Σ_{k<n} μ_k ℓ_k`
/// must both converge, on top of discreteness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceClass {
    pub verdict: Verdict,
    /// Realized partial sum of `μ_n ℓ_n²`.
    pub weighted_square_sum: f64,
    /// Realized partial sum of `(ℓ_n/μ_n) Σ_{k<n} μ_k ℓ_k`.
    pub string_sum: f64,
}

pub fn trace_class(spec: &AntitreeSpec, profile: &crate::model::MetricProfile) -> TraceClass {
    let (sa, _) = self_adjointness(spec);
    let discrete = symbolic::discrete_given_infinite_volume(spec);
    let gate = gate_on_self_adjoint(sa, discrete);
    let verdict = match gate {
        Verdict::Holds => symbolic::trace_series(spec),
        other => other,
    };
    let mu = profile.weights();
    let len = profile.lengths();
    let weighted_square_sum = crate::numeric::compensated_sum((0..len.len()).map(|n| mu[n] as f64 * len[n] * len[n]));
    let string_sum = crate::numeric::compensated_sum((0..len.len()).map(|n| {
        let before = if n == 0 {
            0.0
        } else {
            profile.volume_through(n - 1).unwrap_or(0.0)
        };
        len[n] / mu[n] as f64 * before
    }));
    TraceClass {
        verdict,
        weighted_square_sum,
        string_sum,
    }
}

/// Applies a criterion that presumes infinite volume.
fn gate_on_self_adjoint(sa: Verdict, criterion: Verdict) -> Verdict {
    match sa {
        Verdict::Holds => criterion,
        Verdict::Fails => Verdict::NotApplicable,
        _ => Verdict::Inconclusive,
    }
}

/// `λ₀(H) > 0`, decided by boundedness of `(Σ_{k≤n} μ_k ℓ_k)(Σ_{k≥n} ℓ_k/μ_k)`.
pub fn positive_definite(spec: &AntitreeSpec) -> Verdict {
    gate_on_self_adjoint(self_adjointness(spec).0, symbolic::bounded_string_product(spec))
}

/// Absolutely continuous spectrum tests and their combined conclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcTests {
    pub window: WindowSum,
    pub sphere_ratio: SphereRatioSum,
    pub sphere_ratio_m_of_n: SphereRatioSum,
    /// `σ_ac(H) = [0, ∞)`.
    pub half_line: Verdict,
}

/// Full classification of one spec at truncation depth `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub depth: usize,
    pub series: SeriesClassification,
    pub self_adjoint: Verdict,
    pub deficiency_index: DeficiencyIndex,
    pub discrete: Discreteness,
    /// Deficiency-one branch: every self-adjoint extension has purely
    /// discrete spectrum.
    pub extensions_discrete: Verdict,
    pub trace_class: TraceClass,
    pub positive_definite: Verdict,
    pub gap: GapConstant,
    pub essential_gap: EssentialGap,
    pub isoperimetric: Isoperimetric,
    pub volume_growth: VolumeGrowth,
    pub ac_tests: AcTests,
    /// Absence of singular continuous spectrum; open wherever the
    /// absolutely continuous tests leave room for it.
    pub singular_continuous_empty: Verdict,
    pub singular_flags: SingularFlags,
}

/// Runs every criterion and checks the implication chain
/// trace class ⇒ discrete ⇒ infinite volume.
pub fn classify(spec: &AntitreeSpec, depth: usize) -> Result<DiagnosticsReport, CriteriaError> {
    let profile = build_profile(spec, depth)?;
    let series = classify_series(spec);
    let (self_adjoint, deficiency_index) = self_adjointness(spec);

    let ((discrete, trace), (gap, essential_gap)) = rayon::join(
        || (discreteness_witness(&profile, spec), trace_class(spec, &profile)),
        || {
            (
                gap_constant(&profile, spec),
                essential_gap_constant(&profile, spec, depth),
            )
        },
    );
    let isoperimetric = isoperimetric_constant(&profile, spec);
    let volume_growth = volume_growth(&profile, spec);
    let positive_definite = positive_definite(spec);
    let extensions_discrete = match deficiency_index {
        DeficiencyIndex::One => Verdict::Holds,
        DeficiencyIndex::Zero => Verdict::NotApplicable,
        DeficiencyIndex::Unknown => Verdict::Inconclusive,
    };

    let window = ac_window_sum(&profile, spec, &WindowScheme::default())?;
    let sphere_ratio = ac_sphere_ratio_sum(spec, depth, RatioVariant::Plain)?;
    let sphere_ratio_m_of_n = ac_sphere_ratio_sum(spec, depth, RatioVariant::MOfN)?;
    let singular_flags = singular_flags(spec, &profile);

    let point_spectrum_only = discrete.verdict.holds() || extensions_discrete.holds();
    let half_line = if point_spectrum_only || singular_flags.ac_empty() == Some(true) {
        Verdict::Fails
    } else if window.verdict.holds() || sphere_ratio.ac_conclusion.holds() || sphere_ratio_m_of_n.ac_conclusion.holds()
    {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    let singular_continuous_empty = if point_spectrum_only {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };

    let report = DiagnosticsReport {
        depth,
        series,
        self_adjoint,
        deficiency_index,
        discrete,
        extensions_discrete,
        trace_class: trace,
        positive_definite,
        gap,
        essential_gap,
        isoperimetric,
        volume_growth,
        ac_tests: AcTests {
            window,
            sphere_ratio,
            sphere_ratio_m_of_n,
            half_line,
        },
        singular_continuous_empty,
        singular_flags,
    };
    check_implications(&report)?;
    Ok(report)
}

fn check_implications(r: &DiagnosticsReport) -> Result<(), CriteriaError> {
    let fail = |m: &str| Err(CriteriaError::Implication(m.to_string()));
    if r.trace_class.verdict.holds() && !r.discrete.verdict.holds() {
        return fail("trace class without discreteness");
    }
    if r.discrete.verdict.holds() && !r.self_adjoint.holds() {
        return fail("discreteness asserted outside the infinite-volume branch");
    }
    if r.positive_definite.holds() && !r.self_adjoint.holds() {
        return fail("positivity asserted outside the infinite-volume branch");
    }
    if r.discrete.verdict.holds() && r.ac_tests.half_line.holds() {
        return fail("discrete spectrum with absolutely continuous part");
    }
    if !(r.gap.c_lo <= r.gap.c_hi) {
        return fail("gap constant bracket is empty");
    }
    if (r.isoperimetric.cheeger_lower - 0.25 * r.isoperimetric.alpha * r.isoperimetric.alpha).abs()
        > 1e-15 * r.isoperimetric.cheeger_lower.max(1.0)
    {
        return fail("Cheeger bound is not alpha²/4");
    }
    Ok(())
}

/// Expected verdicts for the polynomial family `s_n = (n+1)^q`,
/// `ℓ_n = (n+1)^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoldenRow {
    pub self_adjoint: bool,
    pub discrete: bool,
    pub trace_class: bool,
    pub positive_definite: bool,
    /// `None` where the answer is open.
    pub ac_half_line: Option<bool>,
}

/// Verdict table of the `(q, s)` family.
pub fn golden_row(q: u32, s: f64) -> GoldenRow {
    let top = 2.0 * f64::from(q) + 1.0;
    let sa = s <= top;
    GoldenRow {
        self_adjoint: sa,
        discrete: sa && s > 1.0,
        trace_class: sa && s > f64::from(q) + 0.5,
        positive_definite: sa && s >= 1.0,
        ac_half_line: if s == 1.0 { None } else { Some(s < 1.0) },
    }
}
