//! Eigenvalues of the decomposed operator.
//!
//! The Laplacian on a truncated antitree splits into an orthogonal sum of
//! one-dimensional problems: the symmetric block on `[0, t_{N+1}]` with
//! weight `μ`, Dirichlet cells on single intervals, two-interval bridges
//! around each inner sphere, and one extra cell on the outermost interval
//! that exists only because of the truncation.

mod bridge;
mod cells;
mod prufer;
mod transfer;

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_profile, AntitreeSpec, LengthGen, MetricProfile, ModelError, SphereGen};
use crate::numeric::{binomial, zeta};

pub use bridge::{bridge_eigenvalues, bridge_lowest, bridge_secular, BridgeParams};
pub use cells::{boundary_cell_eigenvalues_up_to, cell_eigenvalues, cell_eigenvalues_up_to};
pub use prufer::{boundary_functional, sym_count, sym_eigenvalues, Chain, LeftEnd};
pub use transfer::{interval_matrix, sym_transfer, Transfer};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("spectrum assembled up to {assembled}, but {requested} was requested")]
    SpectrumTooShort { requested: f64, assembled: f64 },
    #[error("total volume diverges; the Weyl ratio has no finite target")]
    VolumeDiverges,
    #[error("no closed-form total volume for this family")]
    NoClosedFormVolume,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Condition at the right end `t_{N+1}`: `cos θ f + sin θ μ f′ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
    Robin { theta: f64 },
}

impl BoundaryCondition {
    pub fn theta(&self) -> f64 {
        match *self {
            BoundaryCondition::Neumann => FRAC_PI_2,
            BoundaryCondition::Dirichlet => 0.0,
            BoundaryCondition::Robin { theta } => theta,
        }
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        let t = self.theta();
        if (0.0..PI).contains(&t) {
            Ok(())
        } else {
            Err(SpectraError::InvalidInput(format!("Robin angle {t} outside [0, π)")))
        }
    }
}

/// Which block of the decomposition an eigenvalue came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "block", content = "generation", rename_all = "snake_case")]
pub enum BlockKind {
    Sym,
    /// Dirichlet–Dirichlet on `I_n`.
    Cell(usize),
    /// Secular-function block on `I_{n−1} ∪ I_n`.
    Bridge(usize),
    /// Outermost interval `I_N` under the truncation condition.
    BoundaryCell(usize),
}

impl BlockKind {
    pub fn label(&self) -> &'static str {
        match self {
            BlockKind::Sym => "sym",
            BlockKind::Cell(_) => "cell",
            BlockKind::Bridge(_) => "bridge",
            BlockKind::BoundaryCell(_) => "boundary_cell",
        }
    }

    pub fn generation(&self) -> Option<usize> {
        match *self {
            BlockKind::Sym => None,
            BlockKind::Cell(n) | BlockKind::Bridge(n) | BlockKind::BoundaryCell(n) => Some(n),
        }
    }
}

/// A block together with the number of copies it appears with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralBlock {
    pub kind: BlockKind,
    pub multiplicity: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub multiplicity: u128,
    pub block: BlockKind,
}

/// Sorted eigenvalues with multiplicities and provenance, complete up to
/// `lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub lambda_max: f64,
}

/// Blocks with nonzero multiplicity for a truncated profile.
///
/// Per generation `n` the edge space of dimension `s_n s_{n+1}` splits as
/// `1 + (s_n − 1) + (s_{n+1} − 1) + (s_n − 1)(s_{n+1} − 1)`; this identity is
/// asserted for every generation.
pub fn blocks(profile: &MetricProfile) -> Result<Vec<SpectralBlock>, SpectraError> {
    let s = profile.spheres();
    let n_max = profile.depth();
    let m = |x: u64| u128::from(x - 1);
    for n in 0..=n_max {
        let dim = 1 + m(s[n]) + m(s[n + 1]) + m(s[n]) * m(s[n + 1]);
        if dim != profile.weights()[n] {
            return Err(SpectraError::InternalConsistency(format!(
                "generation {n}: block dimensions sum to {dim}, weight is {}",
                profile.weights()[n]
            )));
        }
    }
    let mut out = vec![SpectralBlock {
        kind: BlockKind::Sym,
        multiplicity: 1,
    }];
    for n in 1..=n_max {
        out.push(SpectralBlock {
            kind: BlockKind::Cell(n),
            multiplicity: m(s[n]) * m(s[n + 1]),
        });
        out.push(SpectralBlock {
            kind: BlockKind::Bridge(n),
            multiplicity: m(s[n]),
        });
    }
    out.push(SpectralBlock {
        kind: BlockKind::BoundaryCell(n_max),
        multiplicity: m(s[n_max + 1]),
    });
    out.retain(|b| b.multiplicity > 0);
    Ok(out)
}

fn block_eigenvalues(
    profile: &MetricProfile,
    kind: BlockKind,
    right_bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Vec<f64>, SpectraError> {
    let s = profile.spheres();
    let l = profile.lengths();
    match kind {
        BlockKind::Sym => {
            let k = sym_count(profile, lambda_max, right_bc) + 1;
            let mut ev = sym_eigenvalues(profile, right_bc, k)?;
            ev.retain(|&x| x <= lambda_max);
            Ok(ev)
        }
        BlockKind::Cell(n) => Ok(cell_eigenvalues_up_to(l[n], lambda_max)),
        BlockKind::Bridge(n) => {
            if lambda_max <= 0.0 {
                return Ok(Vec::new());
            }
            bridge_eigenvalues(s[n - 1], s[n + 1], l[n - 1], l[n], lambda_max)
        }
        BlockKind::BoundaryCell(n) => Ok(boundary_cell_eigenvalues_up_to(
            l[n],
            profile.weight(n),
            right_bc,
            lambda_max,
        )),
    }
}

/// All eigenvalues `≤ lambda_max` of the truncated operator, merged from
/// the blocks with their multiplicities. Blocks are solved in parallel;
/// the merge is a stable sort, so the result is deterministic.
pub fn decomposed_spectrum(
    profile: &MetricProfile,
    right_bc: BoundaryCondition,
    lambda_max: f64,
) -> Result<Spectrum, SpectraError> {
    right_bc.validate()?;
    if !lambda_max.is_finite() {
        return Err(SpectraError::InvalidInput("lambda_max must be finite".into()));
    }
    let blocks = blocks(profile)?;
    let per_block: Vec<Vec<SpectrumEntry>> = blocks
        .par_iter()
        .map(|b| {
            block_eigenvalues(profile, b.kind, right_bc, lambda_max).map(|ev| {
                ev.into_iter()
                    .map(|lambda| SpectrumEntry {
                        lambda,
                        multiplicity: b.multiplicity,
                        block: b.kind,
                    })
                    .collect()
            })
        })
        .collect::<Result<_, _>>()?;
    let mut entries: Vec<SpectrumEntry> = per_block.into_iter().flatten().collect();
    entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.block.cmp(&b.block)));
    Ok(Spectrum { entries, lambda_max })
}

impl Spectrum {
    /// `N(λ)`: total multiplicity of eigenvalues `≤ λ`.
    pub fn counting_function(&self, lambda: f64) -> Result<u128, SpectraError> {
        counting_function(self, lambda)
    }

    /// Eigenvalues repeated according to multiplicity, lowest first.
    pub fn expanded(&self, limit: usize) -> Vec<(f64, BlockKind)> {
        let mut out = Vec::new();
        for e in &self.entries {
            for _ in 0..e.multiplicity {
                if out.len() == limit {
                    return out;
                }
                out.push((e.lambda, e.block));
            }
        }
        out
    }
}

/// `N(λ) = Σ multiplicity` over eigenvalues `≤ λ`.
pub fn counting_function(spectrum: &Spectrum, lambda: f64) -> Result<u128, SpectraError> {
    if lambda > spectrum.lambda_max {
        return Err(SpectraError::SpectrumTooShort {
            requested: lambda,
            assembled: spectrum.lambda_max,
        });
    }
    Ok(spectrum
        .entries
        .iter()
        .take_while(|e| e.lambda <= lambda)
        .map(|e| e.multiplicity)
        .sum())
}

/// Weyl quotient `N(λ)/√λ` and its limit `vol/π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylRatio {
    pub count: u128,
    pub ratio: f64,
    pub target: f64,
}

/// `vol/π` in closed form. Available for polynomial spheres with power-law
/// lengths, where `vol = Σ_k C(q, k) ζ(s − 2q + k)`.
pub fn weyl_target(spec: &AntitreeSpec) -> Result<f64, SpectraError> {
    let vol = crate::model::classify_series(spec).volume;
    if vol.diverges() {
        return Err(SpectraError::VolumeDiverges);
    }
    match (spec.spheres(), spec.lengths()) {
        (SphereGen::Polynomial { q }, LengthGen::Power { s }) if vol.converges() => {
            let q = *q;
            let mut total = 0.0;
            for k in 0..=q {
                let z = zeta(s - 2.0 * f64::from(q) + f64::from(k)).ok_or(SpectraError::VolumeDiverges)?;
                total += binomial(q, k) * z.value;
            }
            Ok(total / PI)
        }
        _ => Err(SpectraError::NoClosedFormVolume),
    }
}

pub fn weyl_ratio(spectrum: &Spectrum, lambda: f64, spec: &AntitreeSpec) -> Result<WeylRatio, SpectraError> {
    if !(lambda > 0.0) {
        return Err(SpectraError::InvalidInput("Weyl ratio needs λ > 0".into()));
    }
    let target = weyl_target(spec)?;
    let count = counting_function(spectrum, lambda)?;
    Ok(WeylRatio {
        count,
        ratio: count as f64 / lambda.sqrt(),
        target,
    })
}

/// Lowest eigenvalue of the Dirichlet-truncated operator of depth `N`.
pub fn lowest_eigenvalue(profile: &MetricProfile) -> Result<f64, SpectraError> {
    let bc = BoundaryCondition::Dirichlet;
    let s = profile.spheres();
    let l = profile.lengths();
    let mut best = sym_eigenvalues(profile, bc, 1)?[0];
    for b in blocks(profile)? {
        let v = match b.kind {
            BlockKind::Sym => continue,
            BlockKind::Cell(n) | BlockKind::BoundaryCell(n) => (PI / l[n]).powi(2),
            BlockKind::Bridge(n) => bridge_lowest(s[n - 1], s[n + 1], l[n - 1], l[n], 1)?[0],
        };
        best = best.min(v);
    }
    Ok(best)
}

/// Upper bounds on the bottom of the spectrum from Dirichlet truncations
/// at each depth in `depths`. The truncated form domains are nested, so the
/// sequence is nonincreasing in the depth.
pub fn lambda0_estimate(spec: &AntitreeSpec, depths: &[usize]) -> Result<Vec<f64>, SpectraError> {
    depths
        .par_iter()
        .map(|&n| lowest_eigenvalue(&build_profile(spec, n)?))
        .collect()
}
