//! Radially symmetric antitrees and their piecewise-constant weight profile.
//!
//! An antitree is fixed by its sphere numbers `s_n` (vertices at
//! combinatorial distance `n` from the root, `s_0 = 1`) and by the common
//! length `ℓ_n` of all edges between spheres `n` and `n + 1`. Everything the
//! rest of the crate needs is carried by the weight `μ = s_n s_{n+1}` on the
//! interval `[t_n, t_{n+1})`, where `t_n = ℓ_0 + ... + ℓ_{n-1}`.

mod tail;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::prefix_sums;

pub use tail::{Growth, TailDescriptor};

/// Number of leading terms used when a verdict is reported together with
/// a partial sum and no depth is supplied.
pub const DEFAULT_PARTIAL_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid antitree spec: {0}")]
    InvalidSpec(String),
    #[error("{what} list has {len} entries but index {index} was requested")]
    ExplicitTooShort {
        what: &'static str,
        len: usize,
        index: usize,
    },
    #[error("sphere number at generation {0} overflows u64")]
    Overflow(usize),
    #[error("generator produced invalid {what} {value} at index {index}")]
    BadValue {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("truncation depth must be at least 1")]
    DepthTooSmall,
    #[error("index {index} outside 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
}

/// Generator for the sphere numbers `s_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SphereGen {
    /// Explicit finite list `s_0, s_1, ...` starting with the root `s_0 = 1`.
    Explicit { values: Vec<u64> },
    /// `s_n = beta^n`.
    Exponential { beta: u64 },
    /// `s_n = (n + 1)^q`.
    Polynomial { q: u32 },
    /// `s_0 = 1`, then the pattern repeated: `s_n = pattern[(n - 1) mod len]`.
    AlternatingPeriodic { pattern: Vec<u64> },
}

/// Length callback for [`LengthGen::Custom`].
#[derive(Clone)]
pub struct CustomLength {
    name: String,
    f: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl CustomLength {
    pub fn new(name: impl Into<String>, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        CustomLength {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, n: usize) -> f64 {
        (self.f)(n)
    }
}

impl fmt::Debug for CustomLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomLength({})", self.name)
    }
}

impl PartialEq for CustomLength {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

/// Generator for the edge lengths `ℓ_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LengthGen {
    Explicit {
        values: Vec<f64>,
    },
    Constant {
        length: f64,
    },
    /// `ℓ_n = (n + 1)^(-s)`.
    Power {
        s: f64,
    },
    /// Index to positive length. Not serializable.
    #[serde(skip)]
    Custom(CustomLength),
}

/// Sphere and length generators plus the symbolic tail used for verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct AntitreeSpec {
    spheres: SphereGen,
    lengths: LengthGen,
    tail: TailDescriptor,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    spheres: SphereGen,
    lengths: LengthGen,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailDescriptor>,
}

impl TryFrom<SpecRepr> for AntitreeSpec {
    type Error = ModelError;

    fn try_from(r: SpecRepr) -> Result<Self, ModelError> {
        let spec = AntitreeSpec::new(r.spheres, r.lengths)?;
        match r.tail {
            Some(t) => spec.with_tail(t),
            None => Ok(spec),
        }
    }
}

impl From<AntitreeSpec> for SpecRepr {
    fn from(s: AntitreeSpec) -> Self {
        let builtin = s.is_builtin();
        SpecRepr {
            spheres: s.spheres,
            lengths: s.lengths,
            tail: if builtin { None } else { Some(s.tail) },
        }
    }
}

fn sphere_growth(g: &SphereGen) -> Option<Growth> {
    match g {
        SphereGen::Exponential { beta } => Some(Growth::geometric(*beta as f64)),
        SphereGen::Polynomial { q } => Some(Growth::power(f64::from(*q))),
        SphereGen::AlternatingPeriodic { .. } => Some(Growth::ONE),
        SphereGen::Explicit { .. } => None,
    }
}

fn length_growth(g: &LengthGen) -> Option<Growth> {
    match g {
        LengthGen::Constant { .. } => Some(Growth::ONE),
        LengthGen::Power { s } => Some(Growth::power(-s)),
        LengthGen::Explicit { .. } | LengthGen::Custom(_) => None,
    }
}

impl AntitreeSpec {
    /// Validates the generators and derives the tail for built-in families.
    pub fn new(spheres: SphereGen, lengths: LengthGen) -> Result<Self, ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidSpec(m.to_string()));
        match &spheres {
            SphereGen::Explicit { values } => {
                if values.first() != Some(&1) {
                    return bad("explicit sphere list must start with the root s_0 = 1");
                }
                if values.iter().any(|&v| v < 1) {
                    return bad("sphere numbers must be at least 1");
                }
            }
            SphereGen::Exponential { beta } if *beta < 2 => return bad("exponential base must be >= 2"),
            SphereGen::Polynomial { q } if *q < 1 => return bad("polynomial degree must be >= 1"),
            SphereGen::AlternatingPeriodic { pattern } if pattern.is_empty() || pattern.iter().any(|&v| v < 1) => {
                return bad("periodic pattern must be non-empty with entries >= 1");
            }
            _ => {}
        }
        match &lengths {
            LengthGen::Explicit { values } => {
                if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return bad("explicit lengths must be non-empty, finite and positive");
                }
            }
            LengthGen::Constant { length } if !(length.is_finite() && *length > 0.0) => {
                return bad("constant length must be finite and positive")
            }
            LengthGen::Power { s } if !(s.is_finite() && *s >= 0.0) => {
                return bad("power-law exponent must be finite and >= 0")
            }
            _ => {}
        }
        let tail = match (sphere_growth(&spheres), length_growth(&lengths)) {
            (Some(s), Some(l)) => TailDescriptor::Known { spheres: s, lengths: l },
            _ => TailDescriptor::Unknown,
        };
        Ok(AntitreeSpec { spheres, lengths, tail })
    }

    /// Attaches caller-supplied tail information to a spec whose generators
    /// are not a built-in family.
    pub fn with_tail(mut self, tail: TailDescriptor) -> Result<Self, ModelError> {
        if self.is_builtin() {
            if tail != self.tail {
                return Err(ModelError::InvalidSpec(
                    "built-in families derive their own tail descriptor".into(),
                ));
            }
            return Ok(self);
        }
        self.tail = tail;
        Ok(self)
    }

    pub fn is_builtin(&self) -> bool {
        sphere_growth(&self.spheres).is_some() && length_growth(&self.lengths).is_some()
    }

    pub fn spheres(&self) -> &SphereGen {
        &self.spheres
    }

    pub fn lengths(&self) -> &LengthGen {
        &self.lengths
    }

    pub fn tail(&self) -> &TailDescriptor {
        &self.tail
    }

    /// `s_n`.
    pub fn sphere(&self, n: usize) -> Result<u64, ModelError> {
        match &self.spheres {
            SphereGen::Explicit { values } => values.get(n).copied().ok_or(ModelError::ExplicitTooShort {
                what: "sphere",
                len: values.len(),
                index: n,
            }),
            SphereGen::Exponential { beta } => {
                let e = u32::try_from(n).map_err(|_| ModelError::Overflow(n))?;
                beta.checked_pow(e).ok_or(ModelError::Overflow(n))
            }
            SphereGen::Polynomial { q } => (n as u64 + 1).checked_pow(*q).ok_or(ModelError::Overflow(n)),
            SphereGen::AlternatingPeriodic { pattern } => Ok(if n == 0 { 1 } else { pattern[(n - 1) % pattern.len()] }),
        }
    }

    /// `ℓ_n`.
    pub fn length(&self, n: usize) -> Result<f64, ModelError> {
        let v = match &self.lengths {
            LengthGen::Explicit { values } => values.get(n).copied().ok_or(ModelError::ExplicitTooShort {
                what: "length",
                len: values.len(),
                index: n,
            })?,
            LengthGen::Constant { length } => *length,
            LengthGen::Power { s } => ((n + 1) as f64).powf(-s),
            LengthGen::Custom(c) => c.eval(n),
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(ModelError::BadValue {
                what: "length",
                index: n,
                value: v,
            })
        }
    }
}

/// Truncated realization of an antitree up to depth `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricProfile {
    spheres: Vec<u64>,
    lengths: Vec<f64>,
    breakpoints: Vec<f64>,
    weights: Vec<u128>,
    volume_sums: Vec<f64>,
    dual_sums: Vec<f64>,
}

impl MetricProfile {
    /// Builds a profile from `s_0..s_{N+1}` and `ℓ_0..ℓ_N`.
    pub fn from_sequences(spheres: Vec<u64>, lengths: Vec<f64>) -> Result<Self, ModelError> {
        if lengths.is_empty() {
            return Err(ModelError::DepthTooSmall);
        }
        if spheres.len() != lengths.len() + 1 {
            return Err(ModelError::InvalidSpec(format!(
                "need {} sphere numbers for {} lengths, got {}",
                lengths.len() + 1,
                lengths.len(),
                spheres.len()
            )));
        }
        if spheres[0] != 1 {
            return Err(ModelError::InvalidSpec("s_0 must be 1".into()));
        }
        if let Some(i) = spheres.iter().position(|&s| s < 1) {
            return Err(ModelError::BadValue {
                what: "sphere number",
                index: i,
                value: 0.0,
            });
        }
        if let Some(i) = lengths.iter().position(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(ModelError::BadValue {
                what: "length",
                index: i,
                value: lengths[i],
            });
        }
        let weights: Vec<u128> = spheres
            .windows(2)
            .map(|w| u128::from(w[0]) * u128::from(w[1]))
            .collect();
        let mut breakpoints = Vec::with_capacity(spheres.len());
        breakpoints.push(0.0);
        breakpoints.extend(prefix_sums(&lengths));
        let vol: Vec<f64> = weights.iter().zip(&lengths).map(|(&m, &l)| m as f64 * l).collect();
        let dual: Vec<f64> = weights.iter().zip(&lengths).map(|(&m, &l)| l / m as f64).collect();
        Ok(MetricProfile {
            volume_sums: prefix_sums(&vol),
            dual_sums: prefix_sums(&dual),
            spheres,
            lengths,
            breakpoints,
            weights,
        })
    }

    /// Truncation depth `N`: generations `0..=N` are realized.
    pub fn depth(&self) -> usize {
        self.lengths.len() - 1
    }

    /// `s_0..s_{N+1}`.
    pub fn spheres(&self) -> &[u64] {
        &self.spheres
    }

    /// `ℓ_0..ℓ_N`.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// `t_0 = 0 < t_1 < ... < t_{N+1}`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Exact integer weights `μ_n = s_n s_{n+1}`.
    pub fn weights(&self) -> &[u128] {
        &self.weights
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights[n] as f64
    }

    /// `t_{N+1}`, the realized radial length.
    pub fn total_length(&self) -> f64 {
        *self.breakpoints.last().expect("profile has breakpoints")
    }

    fn check(&self, n: usize) -> Result<(), ModelError> {
        if n > self.depth() {
            Err(ModelError::IndexOutOfRange {
                index: n,
                max: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    /// Realized volume of generations `0..=n`.
    pub fn volume_through(&self, n: usize) -> Result<f64, ModelError> {
        self.check(n)?;
        Ok(self.volume_sums[n])
    }

    pub fn dual_length_through(&self, n: usize) -> Result<f64, ModelError> {
        self.check(n)?;
        Ok(self.dual_sums[n])
    }

    /// Same profile with the sphere numbers `s_1..s_{N+1}` kept but only
    /// generations `0..=n` realized.
    pub fn truncated(&self, n: usize) -> Result<MetricProfile, ModelError> {
        self.check(n)?;
        MetricProfile::from_sequences(self.spheres[..n + 2].to_vec(), self.lengths[..n + 1].to_vec())
    }
}

/// Realizes `s_0..s_{N+1}`, `t_0..t_{N+1}` and `μ_0..μ_N`.
pub fn build_profile(spec: &AntitreeSpec, depth: usize) -> Result<MetricProfile, ModelError> {
    if depth < 1 {
        return Err(ModelError::DepthTooSmall);
    }
    let spheres = (0..=depth + 1).map(|n| spec.sphere(n)).collect::<Result<Vec<_>, _>>()?;
    let lengths = (0..=depth).map(|n| spec.length(n)).collect::<Result<Vec<_>, _>>()?;
    MetricProfile::from_sequences(spheres, lengths)
}

/// `Σ_{k≤n} s_k s_{k+1} ℓ_k`.
pub fn partial_volume(profile: &MetricProfile, n: usize) -> Result<f64, ModelError> {
    profile.volume_through(n)
}

/// `Σ_{k≤n} ℓ_k / (s_k s_{k+1})`.
pub fn partial_dual_length(profile: &MetricProfile, n: usize) -> Result<f64, ModelError> {
    profile.dual_length_through(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStatus {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rationale {
    SymbolicTail,
    PartialSumOnly,
}

/// Convergence judgment for one infinite series, with the evidence used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub status: SeriesStatus,
    pub partial_sum: f64,
    pub terms_used: usize,
    pub rationale: Rationale,
}

impl SeriesVerdict {
    fn from_class(class: Option<Growth>, partial_sum: f64, terms_used: usize) -> Self {
        match class {
            Some(g) => SeriesVerdict {
                status: if g.summable() {
                    SeriesStatus::Converges
                } else {
                    SeriesStatus::Diverges
                },
                partial_sum,
                terms_used,
                rationale: Rationale::SymbolicTail,
            },
            None => SeriesVerdict {
                status: SeriesStatus::Inconclusive,
                partial_sum,
                terms_used,
                rationale: Rationale::PartialSumOnly,
            },
        }
    }

    pub fn converges(&self) -> bool {
        self.status == SeriesStatus::Converges
    }

    pub fn diverges(&self) -> bool {
        self.status == SeriesStatus::Diverges
    }
}

/// Verdicts for the total volume, the dual length `L_μ` and the total length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesClassification {
    pub volume: SeriesVerdict,
    pub dual_length: SeriesVerdict,
    pub total_length: SeriesVerdict,
}

/// Leading `(μ_n, ℓ_n)` pairs, stopping early where an explicit list ends
/// or a sphere number overflows.
pub(crate) fn leading_terms(spec: &AntitreeSpec, max_terms: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let Ok(mut prev) = spec.sphere(0) else {
        return out;
    };
    for n in 0..max_terms {
        let (Ok(next), Ok(len)) = (spec.sphere(n + 1), spec.length(n)) else {
            break;
        };
        out.push(((u128::from(prev) * u128::from(next)) as f64, len));
        prev = next;
    }
    out
}

/// Symbolic verdicts for built-in families, partial sums otherwise.
pub fn classify_series(spec: &AntitreeSpec) -> SeriesClassification {
    let terms = leading_terms(spec, DEFAULT_PARTIAL_TERMS);
    let used = terms.len();
    let sum = |f: fn(f64, f64) -> f64| crate::numeric::compensated_sum(terms.iter().map(|&(m, l)| f(m, l)));
    let tail = spec.tail();
    SeriesClassification {
        volume: SeriesVerdict::from_class(tail.volume_term(), sum(|m, l| m * l), used),
        dual_length: SeriesVerdict::from_class(tail.dual_term(), sum(|m, l| l / m), used),
        total_length: SeriesVerdict::from_class(tail.lengths(), sum(|_, l| l), used),
    }
}
