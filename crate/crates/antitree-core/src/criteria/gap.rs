//! Kac–Krein quantities: the discreteness witness, the gap constant
//! `C = sup_x ∫_0^x μ · ∫_x^L 1/μ` and its essential counterpart.

use serde::Serialize;

use crate::model::{AntitreeSpec, MetricProfile};
use crate::numeric::CompensatedSum;

use super::symbolic::discrete_given_infinite_volume;
use super::tails::{dual_remainder, product_beyond, DualRemainder};
use super::{gate_on_self_adjoint, positive_definite, self_adjointness, Bracket, Verdict};

/// Realized partial volumes and two-sided dual tails `T_n` for `n ≤ N + 1`.
struct Sums {
    volume: Vec<f64>,
    tail: Vec<Bracket>,
    remainder: DualRemainder,
}

impl Sums {
    fn new(profile: &MetricProfile, spec: &AntitreeSpec) -> Sums {
        let n = profile.depth();
        let volume: Vec<f64> = (0..=n).map(|k| profile.volume_through(k).expect("in range")).collect();
        let remainder = dual_remainder(spec, profile);
        let rest = match &remainder {
            DualRemainder::Certified(b) => *b,
            DualRemainder::Infinite => Bracket::point(f64::INFINITY),
            DualRemainder::Unknown => Bracket::new(0.0, f64::INFINITY),
        };
        let mut tail = vec![rest; n + 2];
        let mut acc = CompensatedSum::new();
        for k in (0..=n).rev() {
            acc.add(profile.lengths()[k] / profile.weight(k));
            let head = acc.value();
            tail[k] = Bracket::new(head + rest.lo, head + rest.hi);
        }
        Sums {
            volume,
            tail,
            remainder,
        }
    }

    fn volume_before(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.volume[n - 1]
        }
    }
}

/// Maximum over `u ∈ [0, len]` of `(before + μ u)(after + (len − u)/μ)`,
/// the Kac–Krein product on one interval of constant weight.
pub fn interval_sup(before: f64, mu: f64, len: f64, after: f64) -> f64 {
    let phi = |u: f64| (before + mu * u) * (after + (len - u) / mu);
    if after.is_infinite() {
        return f64::INFINITY;
    }
    // concave quadratic; stationary point of the product
    let u = (0.5 * (mu * after + len - before / mu)).clamp(0.0, len);
    phi(u).max(phi(0.0)).max(phi(len))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discreteness {
    pub verdict: Verdict,
    /// `Φ_n = (Σ_{k≤n} μ_k ℓ_k)(Σ_{k≥n} ℓ_k/μ_k)` for `n ≤ N`.
    pub witness: Vec<Bracket>,
}

pub fn discreteness_witness(profile: &MetricProfile, spec: &AntitreeSpec) -> Discreteness {
    let sums = Sums::new(profile, spec);
    let witness = (0..=profile.depth())
        .map(|n| {
            let p = sums.volume[n];
            Bracket::new(p * sums.tail[n].lo, p * sums.tail[n].hi)
        })
        .collect();
    let verdict = gate_on_self_adjoint(self_adjointness(spec).0, discrete_given_infinite_volume(spec));
    Discreteness { verdict, witness }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapConstant {
    /// `sup_n P_n T_{n+1}` over the realized profile.
    #[serde(with = "crate::numeric::extended_float")]
    pub c_lo: f64,
    /// `sup_n P_n T_n` over all `n`, using the certified bound beyond `N`.
    #[serde(with = "crate::numeric::extended_float")]
    pub c_hi: f64,
    /// Exact supremum of the Kac–Krein product over `[0, t_{N+1})`, with the
    /// dual tail at its lower and upper bound.
    pub exact_partial_sup: Bracket,
    /// `[1/(4 C_hi), 1/C_lo]`.
    pub lambda0_bounds: Bracket,
    /// `Holds` when `C_hi` is certified; `Inconclusive` when `C_lo` and the
    /// partial supremum are only lower bounds on `C`.
    pub status: Verdict,
}

/// Sandwich of the gap constant, together with the resulting bounds on
/// the bottom of the spectrum.
pub fn gap_constant(profile: &MetricProfile, spec: &AntitreeSpec) -> GapConstant {
    let sums = Sums::new(profile, spec);
    let (lo, hi) = windowed_sup(&sums, 0);
    let beyond = beyond(&sums, spec, profile);
    let c_hi = match beyond {
        Some(b) => hi.max(b),
        None => f64::INFINITY,
    };
    let exact = |pick: fn(&Bracket) -> f64| {
        (0..=profile.depth())
            .map(|n| {
                interval_sup(
                    sums.volume_before(n),
                    profile.weight(n),
                    profile.lengths()[n],
                    pick(&sums.tail[n + 1]),
                )
            })
            .fold(0.0, f64::max)
    };
    let status = if beyond.is_some() {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    GapConstant {
        c_lo: lo,
        c_hi,
        exact_partial_sup: Bracket::new(exact(|b| b.lo), exact(|b| b.hi)),
        lambda0_bounds: Bracket::new(1.0 / (4.0 * c_hi), 1.0 / lo),
        status,
    }
}

fn beyond(sums: &Sums, spec: &AntitreeSpec, profile: &MetricProfile) -> Option<f64> {
    match sums.remainder {
        DualRemainder::Infinite => Some(f64::INFINITY),
        _ => product_beyond(spec, profile, sums.tail[profile.depth() + 1].hi),
    }
}

/// Realized `(sup_{n≥m} W_{m,n} T_{n+1}, sup_{n≥m} W_{m,n} T_n)` with the
/// window volume `W_{m,n} = Σ_{k=m}^n μ_k ℓ_k`.
fn windowed_sup(sums: &Sums, m: usize) -> (f64, f64) {
    let n_max = sums.volume.len() - 1;
    let base = sums.volume_before(m);
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 0.0;
    for n in m..=n_max {
        let w = sums.volume[n] - base;
        lo = lo.max(w * sums.tail[n + 1].lo);
        hi = hi.max(w * sums.tail[n].hi);
    }
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssentialGap {
    /// `λ₀^ess > 0`.
    pub verdict: Verdict,
    /// Entry `m` brackets `sup_{n≥m} (Σ_{k=m}^n μ_k ℓ_k)(tail from n)`;
    /// nonincreasing in `m`, the limit brackets `C_ess`.
    pub windows: Vec<Bracket>,
}

pub fn essential_gap_constant(profile: &MetricProfile, spec: &AntitreeSpec, m_max: usize) -> EssentialGap {
    let sums = Sums::new(profile, spec);
    let beyond = beyond(&sums, spec, profile).unwrap_or(f64::INFINITY);
    let windows = (0..=m_max.min(profile.depth()))
        .map(|m| {
            let (lo, hi) = windowed_sup(&sums, m);
            Bracket::new(lo, hi.max(beyond))
        })
        .collect();
    EssentialGap {
        verdict: positive_definite(spec),
        windows,
    }
}
