//! Certified numeric bounds on the parts of infinite sums beyond the
//! realized profile, for the built-in families.
//!
//! Lengths of every built-in generator are `ℓ_k = c (k+1)^{-s}` with
//! `s ≥ 0` (constant lengths are `s = 0`), hence nonincreasing.

use crate::model::{AntitreeSpec, LengthGen, MetricProfile, SphereGen};
use crate::numeric::CompensatedSum;

use super::symbolic::{string_product, StringProduct};
use super::Bracket;

/// Terms summed explicitly before switching to the analytic remainder.
const EXPLICIT_TERMS: usize = 20_000;

#[derive(Debug, Clone, Copy)]
enum Spheres {
    Exponential(f64),
    Polynomial(u32),
    /// Periodic weights bounded by `[min, max]` from generation 1 on.
    Periodic {
        min: f64,
        max: f64,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Family {
    spheres: Spheres,
    pattern: Vec<u64>,
    scale: f64,
    decay: f64,
}

impl Family {
    pub fn of(spec: &AntitreeSpec) -> Option<Family> {
        let (scale, decay) = match spec.lengths() {
            LengthGen::Constant { length } => (*length, 0.0),
            LengthGen::Power { s } => (1.0, *s),
            _ => return None,
        };
        let (spheres, pattern) = match spec.spheres() {
            SphereGen::Exponential { beta } => (Spheres::Exponential(*beta as f64), Vec::new()),
            SphereGen::Polynomial { q } => (Spheres::Polynomial(*q), Vec::new()),
            SphereGen::AlternatingPeriodic { pattern } => {
                let n = pattern.len();
                let w: Vec<f64> = (0..n).map(|i| (pattern[i] * pattern[(i + 1) % n]) as f64).collect();
                let min = w.iter().copied().fold(f64::INFINITY, f64::min);
                let max = w.iter().copied().fold(0.0, f64::max);
                (Spheres::Periodic { min, max }, pattern.clone())
            }
            SphereGen::Explicit { .. } => return None,
        };
        Some(Family {
            spheres,
            pattern,
            scale,
            decay,
        })
    }

    fn sphere(&self, k: usize) -> f64 {
        match self.spheres {
            Spheres::Exponential(b) => b.powi(k as i32),
            Spheres::Polynomial(q) => ((k + 1) as f64).powi(q as i32),
            Spheres::Periodic { .. } => {
                if k == 0 {
                    1.0
                } else {
                    self.pattern[(k - 1) % self.pattern.len()] as f64
                }
            }
        }
    }

    fn length(&self, k: usize) -> f64 {
        self.scale * ((k + 1) as f64).powf(-self.decay)
    }

    fn dual_term(&self, k: usize) -> f64 {
        self.length(k) / (self.sphere(k) * self.sphere(k + 1))
    }

    /// Bounds on `Σ_{k≥from} (k+1)^{-p}` for `p > 1`.
    fn zeta_tail(from: usize, p: f64) -> Bracket {
        let a = (from + 1) as f64;
        let hi = a.powf(-p) + a.powf(1.0 - p) / (p - 1.0);
        let lo = a.powf(1.0 - p) / (p - 1.0);
        Bracket::new(lo, hi)
    }

    /// Bounds on `Σ_{k≥from} ℓ_k / μ_k`, or `None` if the series diverges.
    pub fn dual_tail(&self, from: usize) -> Option<Bracket> {
        let end = from + EXPLICIT_TERMS;
        let rest = match self.spheres {
            Spheres::Exponential(b) => {
                // consecutive terms shrink at least by b^{-2}
                let first = self.dual_term(end);
                Bracket::new(first, first / (1.0 - b.powi(-2)) + f64::MIN_POSITIVE)
            }
            Spheres::Polynomial(q) => {
                // (k+2)^{-p} ≤ D_k / c ≤ (k+1)^{-p}
                let p = 2.0 * f64::from(q) + self.decay;
                let upper = Self::zeta_tail(end, p).hi;
                let lower = Self::zeta_tail(end + 1, p).lo;
                Bracket::new(self.scale * lower, self.scale * upper)
            }
            Spheres::Periodic { min, max } => {
                if self.decay <= 1.0 {
                    return None;
                }
                let z = Self::zeta_tail(end, self.decay);
                Bracket::new(self.scale * z.lo / max, self.scale * z.hi / min)
            }
        };
        let head: CompensatedSum = (from..end).map(|k| self.dual_term(k)).collect();
        let h = head.value();
        Some(Bracket::new(h + rest.lo, (h + rest.hi) * (1.0 + 4.0 * f64::EPSILON)))
    }

    /// Upper bound on `sup_{n>N} P_n T_n` for the profile of depth `N`,
    /// given `T_{N+1} ≤ tail_hi`.
    fn product_beyond(&self, profile: &MetricProfile, tail_hi: f64) -> f64 {
        let n_real = profile.depth();
        let p_n = profile.volume_through(n_real).expect("depth is in range");
        let c = self.scale;
        let s = self.decay;
        match self.spheres {
            Spheres::Exponential(b) => {
                // P_n T_n < ℓ* sup_{k≥n} ℓ_k / (1 − b^{-2})²
                self.length(0) * self.length(n_real + 1) / (1.0 - b.powi(-2)).powi(2)
            }
            Spheres::Polynomial(q) => {
                let q = f64::from(q);
                let a = 2.0 * q - s;
                let p = 2.0 * q + s;
                let m = (n_real + 1) as f64;
                // (k+1)^{-s} ≤ rho (k+2)^{-s} for k > N
                let rho = ((m + 2.0) / (m + 1.0)).powf(s);
                if a < -1.0 {
                    let vol_rest = c * rho * (m + 1.0).powf(a + 1.0) / (-a - 1.0);
                    (p_n + vol_rest) * tail_hi
                } else if a == -1.0 {
                    let h = (m + 3.0).ln() * (m + 1.0).powf(-4.0 * q) * (1.0 / (4.0 * q) + 1.0 / (m + 1.0));
                    p_n * tail_hi + c * c * rho * h
                } else {
                    let g = ((m + 3.0) / (m + 1.0)).powf(a + 1.0)
                        * (m + 1.0).powf(2.0 - 2.0 * s)
                        * (1.0 / (p - 1.0) + 1.0 / (m + 1.0));
                    p_n * tail_hi + c * c * rho * g / (a + 1.0)
                }
            }
            Spheres::Periodic { max, .. } => {
                let m = (n_real + 1) as f64;
                let vol_rest = max * c * m.powf(1.0 - s) / (s - 1.0);
                (p_n + vol_rest) * tail_hi
            }
        }
    }
}

/// Remainder `Σ_{k>N} ℓ_k/μ_k` beyond the realized profile.
pub(crate) enum DualRemainder {
    Certified(Bracket),
    /// The dual length diverges.
    Infinite,
    /// No certificate: only the realized part is known.
    Unknown,
}

pub(crate) fn dual_remainder(spec: &AntitreeSpec, profile: &MetricProfile) -> DualRemainder {
    if matches!(string_product(spec), StringProduct::Infinite) {
        return DualRemainder::Infinite;
    }
    match Family::of(spec) {
        Some(f) => f
            .dual_tail(profile.depth() + 1)
            .map_or(DualRemainder::Infinite, DualRemainder::Certified),
        None => DualRemainder::Unknown,
    }
}

/// Upper bound on `sup_{n>N} P_n T_n`: infinite when the class of the
/// product is unbounded, `None` without a certificate.
pub(crate) fn product_beyond(spec: &AntitreeSpec, profile: &MetricProfile, tail_hi: f64) -> Option<f64> {
    match string_product(spec) {
        StringProduct::Infinite => return Some(f64::INFINITY),
        StringProduct::Class(g) if !g.bounded() => return Some(f64::INFINITY),
        StringProduct::Unknown => return None,
        StringProduct::Class(_) => {}
    }
    Family::of(spec).map(|f| f.product_beyond(profile, tail_hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_profile;

    #[test]
    fn exponential_dual_tail_is_geometric() {
        let spec = AntitreeSpec::new(SphereGen::Exponential { beta: 2 }, LengthGen::Constant { length: 1.0 }).unwrap();
        let f = Family::of(&spec).unwrap();
        // Σ_{k≥3} 2^{-2k-1} = 2^{-7} / (1 − 1/4)
        let t = f.dual_tail(3).unwrap();
        let want = 2f64.powi(-7) / 0.75;
        assert!(t.contains(want) || (t.lo - want).abs() < 1e-16, "{t:?}");
        assert!(t.hi - t.lo < 1e-15);
    }

    #[test]
    fn polynomial_dual_tail_brackets_brute_force() {
        let spec = AntitreeSpec::new(SphereGen::Polynomial { q: 1 }, LengthGen::Power { s: 0.5 }).unwrap();
        let f = Family::of(&spec).unwrap();
        let t = f.dual_tail(10).unwrap();
        // Brute force to 4e6 terms plus the integral of the last term's decay.
        let mut acc = CompensatedSum::new();
        for k in 10..4_000_000usize {
            let x = (k + 1) as f64;
            acc.add(x.powf(-0.5) / (x * (x + 1.0)));
        }
        let rest = 4_000_001f64.powf(-1.5) / 1.5;
        let want = acc.value() + rest;
        assert!(
            t.lo <= want * (1.0 + 1e-9) && want <= t.hi * (1.0 + 1e-9),
            "{t:?} vs {want}"
        );
        assert!((t.hi - t.lo) / t.lo < 1e-6);
    }

    #[test]
    fn product_bound_exceeds_realized_products() {
        let spec = AntitreeSpec::new(SphereGen::Polynomial { q: 1 }, LengthGen::Power { s: 1.0 }).unwrap();
        let short = build_profile(&spec, 20).unwrap();
        let long = build_profile(&spec, 400).unwrap();
        let f = Family::of(&spec).unwrap();
        let tail = f.dual_tail(21).unwrap();
        let bound = product_beyond(&spec, &short, tail.hi).unwrap();
        let full_tail = f.dual_tail(401).unwrap().hi;
        let duals: Vec<f64> = (0..=400).map(|k| f.dual_term(k)).collect();
        for n in 21..=400 {
            let t_n: f64 = duals[n..].iter().sum::<f64>() + full_tail;
            let pt = long.volume_through(n).unwrap() * t_n;
            assert!(pt <= bound, "n={n}: {pt} > {bound}");
        }
    }
}
