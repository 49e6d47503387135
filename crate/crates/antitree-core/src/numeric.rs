//! Small numerical helpers shared by the analysis modules.

/// Neumaier-compensated running sum.
///
/// Weights of exponential families grow like `beta^(2n)`, so naive
/// accumulation of partial volumes drops the small early terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Running compensated prefix sums: `out[n] = x_0 + ... + x_n`.
pub fn prefix_sums(xs: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    xs.iter()
        .map(|&x| {
            acc.add(x);
            acc.value()
        })
        .collect()
}

/// Value of the Riemann zeta function together with a bound on the
/// truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub value: f64,
    pub error_bound: f64,
}

const ZETA_TARGET: f64 = 1e-10;

/// Riemann zeta for real `x > 1`.
///
/// Direct summation of the first `m - 1` terms, then the integral
/// remainder `m^(1-x)/(x-1)` with Euler-Maclaurin endpoint corrections.
/// The cutoff `m` is doubled until the first omitted correction drops
/// below `1e-10`. Returns `None` for `x <= 1`, where the series diverges.
pub fn zeta(x: f64) -> Option<ZetaValue> {
    if !(x > 1.0) || !x.is_finite() {
        return None;
    }
    let mut m: u64 = 16;
    loop {
        let mf = m as f64;
        let next = x * (x + 1.0) * (x + 2.0) * (x + 3.0) * (x + 4.0) * mf.powf(-x - 5.0) / 30240.0;
        if next <= ZETA_TARGET * 1e-2 || m >= 1 << 20 {
            let mut acc: CompensatedSum = (1..m).map(|n| (n as f64).powf(-x)).collect();
            acc.add(mf.powf(1.0 - x) / (x - 1.0));
            acc.add(0.5 * mf.powf(-x));
            acc.add(x * mf.powf(-x - 1.0) / 12.0);
            acc.add(-x * (x + 1.0) * (x + 2.0) * mf.powf(-x - 3.0) / 720.0);
            return Some(ZetaValue {
                value: acc.value(),
                error_bound: next + 4.0 * f64::EPSILON * acc.value(),
            });
        }
        m *= 2;
    }
}

/// Binomial coefficient as a float (small arguments only).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Relative difference with an absolute floor, used by tolerance checks.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Serializes floats that may be infinite: finite values as numbers,
/// the rest as the strings `"inf"`, `"-inf"` and `"nan"` (JSON has no
/// literal for them).
pub mod extended_float {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}
