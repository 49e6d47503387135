//! Symbolic tail classes for positive sequences.
//!
//! Convergence of the series behind every criterion cannot be decided from
//! finitely many terms, so built-in families carry their asymptotic class
//! and verdicts are derived from exponent comparisons.

use serde::{Deserialize, Serialize};

/// Two-sided asymptotic class `a_n = Θ(ratio^n · n^power · (ln n)^log_power)`.
///
/// Only the class matters: summability, boundedness and decay to zero are
/// all invariant under multiplication by constants bounded away from 0
/// and infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Growth {
    pub ratio: f64,
    #[serde(default)]
    pub power: f64,
    #[serde(default)]
    pub log_power: i32,
}

impl std::ops::Mul for Growth {
    type Output = Growth;

    fn mul(self, other: Growth) -> Growth {
        Growth {
            ratio: self.ratio * other.ratio,
            power: self.power + other.power,
            log_power: self.log_power + other.log_power,
        }
    }
}

impl std::ops::Div for Growth {
    type Output = Growth;

    fn div(self, other: Growth) -> Growth {
        Growth {
            ratio: self.ratio / other.ratio,
            power: self.power - other.power,
            log_power: self.log_power - other.log_power,
        }
    }
}

impl Growth {
    pub const ONE: Growth = Growth {
        ratio: 1.0,
        power: 0.0,
        log_power: 0,
    };

    pub fn geometric(ratio: f64) -> Self {
        Growth {
            ratio,
            power: 0.0,
            log_power: 0,
        }
    }

    pub fn power(power: f64) -> Self {
        Growth {
            ratio: 1.0,
            power,
            log_power: 0,
        }
    }

    pub fn squared(self) -> Growth {
        self * self
    }

    /// Whether `Σ a_n` converges.
    pub fn summable(self) -> bool {
        self.ratio < 1.0 || (self.ratio == 1.0 && (self.power < -1.0 || (self.power == -1.0 && self.log_power < -1)))
    }

    pub fn tends_to_zero(self) -> bool {
        self.ratio < 1.0 || (self.ratio == 1.0 && (self.power < 0.0 || (self.power == 0.0 && self.log_power < 0)))
    }

    pub fn bounded(self) -> bool {
        self.ratio < 1.0 || (self.ratio == 1.0 && (self.power < 0.0 || (self.power == 0.0 && self.log_power <= 0)))
    }

    /// Eventually bounded below by a positive constant.
    pub fn bounded_below(self) -> bool {
        self.ratio > 1.0 || (self.ratio == 1.0 && (self.power > 0.0 || (self.power == 0.0 && self.log_power >= 0)))
    }

    /// Class of the partial sums `Σ_{k≤n} a_k`, or `None` when it falls
    /// outside the representable family (`ln ln n`).
    pub fn partial_sum(self) -> Option<Growth> {
        if self.ratio > 1.0 {
            return Some(self);
        }
        if self.summable() {
            return Some(Growth::ONE);
        }
        // ratio == 1 and not summable
        if self.power > -1.0 {
            Some(Growth {
                ratio: 1.0,
                power: self.power + 1.0,
                log_power: self.log_power,
            })
        } else if self.log_power > -1 {
            Some(Growth {
                ratio: 1.0,
                power: 0.0,
                log_power: self.log_power + 1,
            })
        } else {
            None
        }
    }

    /// Class of the tails `Σ_{k≥n} a_k`; `None` if the series diverges.
    pub fn tail_sum(self) -> Option<Growth> {
        if !self.summable() {
            return None;
        }
        if self.ratio < 1.0 {
            return Some(self);
        }
        if self.power < -1.0 {
            Some(Growth {
                ratio: 1.0,
                power: self.power + 1.0,
                log_power: self.log_power,
            })
        } else {
            Some(Growth {
                ratio: 1.0,
                power: 0.0,
                log_power: self.log_power + 1,
            })
        }
    }
}

/// Tail information attached to an [`AntitreeSpec`](super::AntitreeSpec).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TailDescriptor {
    /// Asymptotic classes of the sphere numbers and of the lengths.
    Known {
        spheres: Growth,
        lengths: Growth,
    },
    Unknown,
}

impl TailDescriptor {
    pub fn is_known(&self) -> bool {
        matches!(self, TailDescriptor::Known { .. })
    }

    pub fn lengths(&self) -> Option<Growth> {
        match *self {
            TailDescriptor::Known { lengths, .. } => Some(lengths),
            TailDescriptor::Unknown => None,
        }
    }

    /// Class of `s_n s_{n+1}`; consecutive sphere numbers of every
    /// representable class differ by a bounded factor.
    pub fn weight(&self) -> Option<Growth> {
        match *self {
            TailDescriptor::Known { spheres, .. } => Some(spheres.squared()),
            TailDescriptor::Unknown => None,
        }
    }

    /// Class of the volume terms `s_n s_{n+1} ℓ_n`.
    pub fn volume_term(&self) -> Option<Growth> {
        Some(self.weight()? * self.lengths()?)
    }

    /// Class of the dual-length terms `ℓ_n / (s_n s_{n+1})`.
    pub fn dual_term(&self) -> Option<Growth> {
        Some(self.lengths()? / self.weight()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_boundary() {
        assert!(!Growth::power(-1.0).summable());
        assert!(Growth::power(-1.0001).summable());
        assert!(Growth {
            ratio: 1.0,
            power: -1.0,
            log_power: -2
        }
        .summable());
        assert_eq!(
            Growth::power(-1.0).partial_sum(),
            Some(Growth {
                ratio: 1.0,
                power: 0.0,
                log_power: 1
            })
        );
    }

    #[test]
    fn geometric_sums() {
        let g = Growth::geometric(4.0);
        assert_eq!(g.partial_sum(), Some(g));
        assert_eq!(g.tail_sum(), None);
        let d = Growth::geometric(0.25);
        assert_eq!(d.tail_sum(), Some(d));
        assert_eq!(d.partial_sum(), Some(Growth::ONE));
    }

    #[test]
    fn power_tail() {
        let t = Growth::power(-3.0).tail_sum().unwrap();
        assert_eq!(t.power, -2.0);
        assert!(t.tends_to_zero());
    }
}
