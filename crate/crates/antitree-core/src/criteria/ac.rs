//! Sufficient conditions for `σ_ac(H) = [0, ∞)`: Szegő-type window sums,
//! sphere-ratio sums and the string deviation integral.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{
    build_profile, classify_series, AntitreeSpec, Growth, LengthGen, MetricProfile, SeriesStatus, SphereGen,
};
use crate::numeric::CompensatedSum;

use super::{CriteriaError, Verdict};

/// How the windows of the window sum are laid out along the radial axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WindowScheme {
    /// `[k·step, k·step + width]` for `k = 0, 1, ...` inside the profile.
    Uniform {
        step: f64,
        width: f64,
    },
    /// `[t_{m(n)}, t_{m(n+2)+1}]` for integer `n`.
    MOfN,
    Explicit {
        windows: Vec<(f64, f64)>,
    },
}

impl Default for WindowScheme {
    fn default() -> Self {
        WindowScheme::Uniform { step: 1.0, width: 2.0 }
    }
}

/// The generation containing position `x`: `t_m ≤ x < t_{m+1}`, or `None`
/// past the realized profile.
pub fn m_of_n(profile: &MetricProfile, x: f64) -> Option<usize> {
    let t = profile.breakpoints();
    if !(x >= 0.0 && x < profile.total_length()) {
        return None;
    }
    Some(t.partition_point(|&b| b <= x) - 1)
}

/// `∫μ · ∫1/μ − (end − start)²` over one window, computed as the pairwise
/// sum `Σ_{j<k} o_j o_k (μ_j − μ_k)² / (μ_j μ_k)` over the distinct weight
/// values `μ_j` with overlaps `o_j`. Zero exactly when μ is constant on
/// the window.
pub fn window_term(profile: &MetricProfile, start: f64, end: f64) -> Result<f64, CriteriaError> {
    let total = profile.total_length();
    if !(0.0 <= start && start <= end && end <= total) {
        return Err(CriteriaError::WindowOutOfRange(start, end));
    }
    let t = profile.breakpoints();
    let mut overlap: BTreeMap<u128, CompensatedSum> = BTreeMap::new();
    let first = t.partition_point(|&b| b <= start).saturating_sub(1);
    for k in first..=profile.depth() {
        if t[k] >= end {
            break;
        }
        let o = t[k + 1].min(end) - t[k].max(start);
        if o > 0.0 {
            overlap.entry(profile.weights()[k]).or_default().add(o);
        }
    }
    let groups: Vec<(u128, f64)> = overlap.into_iter().map(|(m, o)| (m, o.value())).collect();
    let mut acc = CompensatedSum::new();
    for (j, &(mj, oj)) in groups.iter().enumerate() {
        for &(mk, ok) in &groups[j + 1..] {
            let d = mk.abs_diff(mj) as f64;
            acc.add(oj * ok * (d * d / (mj as f64 * mk as f64)));
        }
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSum {
    pub windows: Vec<(f64, f64)>,
    pub terms: Vec<f64>,
    pub total: f64,
    /// Convergence of the full window series.
    pub series: SeriesStatus,
    /// `σ_ac = [0, ∞)` by the window criterion; needs infinite total length.
    pub verdict: Verdict,
}

fn windows_for(profile: &MetricProfile, scheme: &WindowScheme) -> Result<Vec<(f64, f64)>, CriteriaError> {
    let total = profile.total_length();
    let t = profile.breakpoints();
    match scheme {
        WindowScheme::Uniform { step, width } => {
            if !(step.is_finite() && *step > 0.0 && width.is_finite() && *width > 0.0) {
                return Err(CriteriaError::InvalidInput(
                    "window step and width must be positive".into(),
                ));
            }
            let mut out = Vec::new();
            let mut k = 0usize;
            loop {
                let a = k as f64 * step;
                if a + width > total {
                    break;
                }
                out.push((a, a + width));
                k += 1;
            }
            Ok(out)
        }
        WindowScheme::MOfN => {
            let mut out = Vec::new();
            let mut n = 0usize;
            while let (Some(lo), Some(hi)) = (m_of_n(profile, n as f64), m_of_n(profile, (n + 2) as f64)) {
                out.push((t[lo], t[hi + 1]));
                n += 1;
            }
            Ok(out)
        }
        WindowScheme::Explicit { windows } => {
            for &(a, b) in windows {
                if !(0.0 <= a && a <= b && b <= total) {
                    return Err(CriteriaError::WindowOutOfRange(a, b));
                }
            }
            Ok(windows.clone())
        }
    }
}

/// Whether all weights `μ_n`, `n ≥ 1`, of a periodic pattern coincide.
fn periodic_weight_constant(pattern: &[u64]) -> bool {
    let n = pattern.len();
    (0..n).all(|i| pattern[i] * pattern[(i + 1) % n] == pattern[0] * pattern[1 % n])
}

fn total_length_status(spec: &AntitreeSpec) -> SeriesStatus {
    classify_series(spec).total_length.status
}

/// Decay exponent `s` of built-in lengths `c (n+1)^{-s}`.
fn length_decay(spec: &AntitreeSpec) -> Option<f64> {
    match spec.lengths() {
        LengthGen::Constant { .. } => Some(0.0),
        LengthGen::Power { s } => Some(*s),
        _ => None,
    }
}

fn window_series(spec: &AntitreeSpec, scheme: &WindowScheme) -> SeriesStatus {
    if total_length_status(spec) == SeriesStatus::Converges {
        return SeriesStatus::Converges;
    }
    if *scheme != WindowScheme::default() {
        return SeriesStatus::Inconclusive;
    }
    let Some(s) = length_decay(spec) else {
        return SeriesStatus::Inconclusive;
    };
    match spec.spheres() {
        SphereGen::AlternatingPeriodic { pattern } if periodic_weight_constant(pattern) => SeriesStatus::Converges,
        SphereGen::AlternatingPeriodic { .. } => SeriesStatus::Diverges,
        // window terms decay like the squared relative change of μ across a window
        SphereGen::Polynomial { .. } if s < 1.0 => SeriesStatus::Converges,
        SphereGen::Polynomial { .. } => SeriesStatus::Diverges,
        SphereGen::Exponential { .. } => SeriesStatus::Diverges,
        SphereGen::Explicit { .. } => SeriesStatus::Inconclusive,
    }
}

/// Window terms over the realized profile, with the symbolic verdict on
/// the infinite window series.
pub fn ac_window_sum(
    profile: &MetricProfile,
    spec: &AntitreeSpec,
    scheme: &WindowScheme,
) -> Result<WindowSum, CriteriaError> {
    let windows = windows_for(profile, scheme)?;
    let terms = windows
        .iter()
        .map(|&(a, b)| window_term(profile, a, b))
        .collect::<Result<Vec<_>, _>>()?;
    let total = crate::numeric::compensated_sum(terms.iter().copied());
    let series = window_series(spec, scheme);
    let verdict = match total_length_status(spec) {
        SeriesStatus::Converges => Verdict::NotApplicable,
        SeriesStatus::Inconclusive => Verdict::Inconclusive,
        SeriesStatus::Diverges if series == SeriesStatus::Converges => Verdict::Holds,
        SeriesStatus::Diverges => Verdict::Inconclusive,
    };
    Ok(WindowSum {
        windows,
        terms,
        total,
        series,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioVariant {
    /// `Σ (s_{n+2}/s_n − 1)²`, paired with `inf ℓ_n > 0`.
    Plain,
    /// `Σ (s_{m(n+2)}/s_{m(n)} − 1)²`, paired with `ℓ_n ≤ 1`, `ℓ_n → 0`,
    /// infinite total length and nondecreasing `s_n`.
    MOfN,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereRatioSum {
    pub variant: RatioVariant,
    pub terms: Vec<f64>,
    pub partial_sum: f64,
    pub series: SeriesStatus,
    /// Whether the length hypotheses accompanying the variant hold.
    pub length_hypotheses: Verdict,
    /// `σ_ac = [0, ∞)`: the series converges and the hypotheses hold.
    /// A divergent series is `Inconclusive`; it says nothing about σ_ac.
    pub ac_conclusion: Verdict,
}

fn ratio_term(num: u64, den: u64) -> f64 {
    let r = num as f64 / den as f64 - 1.0;
    r * r
}

fn ratio_series(spec: &AntitreeSpec, variant: RatioVariant) -> SeriesStatus {
    let pattern_shift_two = |p: &[u64]| (0..p.len()).all(|i| p[i] == p[(i + 2) % p.len()]);
    match variant {
        RatioVariant::Plain => match spec.spheres() {
            SphereGen::Polynomial { .. } => SeriesStatus::Converges,
            SphereGen::Exponential { .. } => SeriesStatus::Diverges,
            SphereGen::AlternatingPeriodic { pattern } if pattern_shift_two(pattern) => SeriesStatus::Converges,
            SphereGen::AlternatingPeriodic { .. } => SeriesStatus::Diverges,
            SphereGen::Explicit { .. } => SeriesStatus::Inconclusive,
        },
        RatioVariant::MOfN => {
            match total_length_status(spec) {
                // finitely many integer positions lie below the total length
                SeriesStatus::Converges => return SeriesStatus::Converges,
                SeriesStatus::Inconclusive => return SeriesStatus::Inconclusive,
                SeriesStatus::Diverges => {}
            }
            let Some(s) = length_decay(spec) else {
                return SeriesStatus::Inconclusive;
            };
            match spec.spheres() {
                // m(n) grows polynomially for s < 1 and exponentially for s = 1
                SphereGen::Polynomial { .. } if s < 1.0 => SeriesStatus::Converges,
                SphereGen::Polynomial { .. } => SeriesStatus::Diverges,
                SphereGen::Exponential { .. } => SeriesStatus::Diverges,
                SphereGen::AlternatingPeriodic { pattern } if pattern.iter().all(|&v| v == pattern[0]) => {
                    SeriesStatus::Converges
                }
                SphereGen::AlternatingPeriodic { pattern }
                    if *spec.lengths() == (LengthGen::Constant { length: 1.0 }) =>
                {
                    if pattern_shift_two(pattern) {
                        SeriesStatus::Converges
                    } else {
                        SeriesStatus::Diverges
                    }
                }
                _ => SeriesStatus::Inconclusive,
            }
        }
    }
}

fn length_hypotheses(spec: &AntitreeSpec, variant: RatioVariant) -> Verdict {
    let Some(lengths) = spec.tail().lengths() else {
        return Verdict::Inconclusive;
    };
    match variant {
        RatioVariant::Plain => Verdict::from_bool(lengths.bounded_below()),
        RatioVariant::MOfN => {
            let Some(s) = length_decay(spec) else {
                return Verdict::Inconclusive;
            };
            let at_most_one = match spec.lengths() {
                LengthGen::Constant { length } => *length <= 1.0,
                _ => true,
            };
            let nondecreasing = match spec.spheres() {
                SphereGen::Exponential { .. } | SphereGen::Polynomial { .. } => Some(true),
                SphereGen::AlternatingPeriodic { pattern } => Some(pattern.iter().all(|&v| v == pattern[0])),
                SphereGen::Explicit { .. } => None,
            };
            let infinite = total_length_status(spec) == SeriesStatus::Diverges;
            let vanishing = Growth::power(-s).tends_to_zero();
            match nondecreasing {
                Some(nd) => Verdict::from_bool(at_most_one && vanishing && infinite && nd),
                None if !(at_most_one && vanishing && infinite) => Verdict::Fails,
                None => Verdict::Inconclusive,
            }
        }
    }
}

/// Sphere-ratio sum over `N` generations (plain) or over the integer
/// positions inside the depth-`N` profile (m-of-n).
pub fn ac_sphere_ratio_sum(
    spec: &AntitreeSpec,
    depth: usize,
    variant: RatioVariant,
) -> Result<SphereRatioSum, CriteriaError> {
    let profile = build_profile(spec, depth)?;
    let s = profile.spheres();
    let terms: Vec<f64> = match variant {
        RatioVariant::Plain => (0..depth).map(|n| ratio_term(s[n + 2], s[n])).collect(),
        RatioVariant::MOfN => {
            let mut out = Vec::new();
            let mut n = 0usize;
            while let (Some(lo), Some(hi)) = (m_of_n(&profile, n as f64), m_of_n(&profile, (n + 2) as f64)) {
                out.push(ratio_term(s[hi], s[lo]));
                n += 1;
            }
            out
        }
    };
    let partial_sum = crate::numeric::compensated_sum(terms.iter().copied());
    let series = ratio_series(spec, variant);
    let hyp = length_hypotheses(spec, variant);
    let ac_conclusion = match (series, hyp) {
        (SeriesStatus::Converges, Verdict::Holds) => Verdict::Holds,
        (SeriesStatus::Converges, Verdict::Fails) => Verdict::NotApplicable,
        _ => Verdict::Inconclusive,
    };
    Ok(SphereRatioSum {
        variant,
        terms,
        partial_sum,
        series,
        length_hypotheses: hyp,
        ac_conclusion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StringDeviation {
    /// `∫_0^{t_{N+1}} (1/μ) |∫_0^x (μ − b/μ) − a|² dx`.
    pub total: f64,
    /// Contribution of each generation interval.
    pub increments: Vec<f64>,
    /// Infinite volume and infinite dual length, as the criterion requires.
    pub applicable: Verdict,
}

/// String deviation integral, exact for piecewise constant μ: on each
/// interval the inner antiderivative is linear, so its square integrates
/// in closed form.
pub fn ac_string_deviation(
    profile: &MetricProfile,
    spec: &AntitreeSpec,
    a: f64,
    b: f64,
) -> Result<StringDeviation, CriteriaError> {
    if !(b.is_finite() && b > 0.0 && a.is_finite()) {
        return Err(CriteriaError::InvalidInput(format!(
            "need finite a and b > 0, got a = {a}, b = {b}"
        )));
    }
    let mut offset = CompensatedSum::new();
    offset.add(-a);
    let mut increments = Vec::with_capacity(profile.depth() + 1);
    for (k, &len) in profile.lengths().iter().enumerate() {
        let mu = profile.weight(k);
        let slope = mu - b / mu;
        let g0 = offset.value();
        increments.push((g0 * g0 * len + g0 * slope * len * len + slope * slope * len * len * len / 3.0) / mu);
        offset.add(slope * len);
    }
    let series = classify_series(spec);
    let infinite = |v: SeriesStatus| match v {
        SeriesStatus::Diverges => Verdict::Holds,
        SeriesStatus::Converges => Verdict::Fails,
        SeriesStatus::Inconclusive => Verdict::Inconclusive,
    };
    let applicable = infinite(series.volume.status).and(infinite(series.dual_length.status));
    Ok(StringDeviation {
        total: crate::numeric::compensated_sum(increments.iter().copied()),
        increments,
        applicable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic(pattern: Vec<u64>, lengths: LengthGen) -> AntitreeSpec {
        AntitreeSpec::new(SphereGen::AlternatingPeriodic { pattern }, lengths).unwrap()
    }

    #[test]
    fn m_of_n_locates_generation() {
        let p = MetricProfile::from_sequences(vec![1, 2, 2, 2], vec![1.0, 0.5, 2.0]).unwrap();
        assert_eq!(m_of_n(&p, 0.0), Some(0));
        assert_eq!(m_of_n(&p, 1.0), Some(1));
        assert_eq!(m_of_n(&p, 1.49), Some(1));
        assert_eq!(m_of_n(&p, 1.5), Some(2));
        assert_eq!(m_of_n(&p, 3.5), None);
    }

    #[test]
    fn equilateral_window_term() {
        // s = 1, 2, 5, 7, 3; ℓ ≡ 0.7, windows (ℓn, ℓ(n+2))
        let s = vec![1u64, 2, 5, 7, 3];
        let ell = 0.7;
        let p = MetricProfile::from_sequences(s.clone(), vec![ell; 4]).unwrap();
        for n in 0..3 {
            let got = window_term(&p, ell * n as f64, ell * (n + 2) as f64).unwrap();
            let d = s[n + 2] as f64 - s[n] as f64;
            let want = ell * ell * d * d / (s[n] as f64 * s[n + 2] as f64);
            assert!((got - want).abs() <= 1e-14 * want.max(1.0), "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn window_term_matches_direct_integrals() {
        let p = MetricProfile::from_sequences(vec![1, 3, 2, 4, 1], vec![0.3, 1.1, 0.4, 0.9]).unwrap();
        let (a, b) = (0.2, 2.2);
        let t = p.breakpoints();
        let (mut int_mu, mut int_inv) = (0.0, 0.0);
        for k in 0..4 {
            let o = (t[k + 1].min(b) - t[k].max(a)).max(0.0);
            int_mu += o * p.weight(k);
            int_inv += o / p.weight(k);
        }
        let want = int_mu * int_inv - (b - a) * (b - a);
        let got = window_term(&p, a, b).unwrap();
        assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        assert!(matches!(
            window_term(&p, 1.0, 10.0),
            Err(CriteriaError::WindowOutOfRange(..))
        ));
    }

    #[test]
    fn alternating_pair_terms_vanish_beyond_first_generation() {
        let spec = periodic(vec![3, 2], LengthGen::Power { s: 0.5 });
        let p = build_profile(&spec, 400).unwrap();
        let w = ac_window_sum(&p, &spec, &WindowScheme::default()).unwrap();
        let t1 = p.breakpoints()[1];
        for (&(a, _), &term) in w.windows.iter().zip(&w.terms) {
            if a >= t1 {
                assert_eq!(term, 0.0);
            }
        }
        assert_eq!(w.verdict, Verdict::Holds);
    }

    #[test]
    fn exponential_sphere_ratios_diverge() {
        let spec = AntitreeSpec::new(SphereGen::Exponential { beta: 2 }, LengthGen::Constant { length: 1.0 }).unwrap();
        let r = ac_sphere_ratio_sum(&spec, 10, RatioVariant::Plain).unwrap();
        assert!(r.terms.iter().all(|&x| x == 9.0));
        assert_eq!(r.series, SeriesStatus::Diverges);
        assert_eq!(r.ac_conclusion, Verdict::Inconclusive);
    }

    #[test]
    fn polynomial_ratios() {
        let spec = AntitreeSpec::new(SphereGen::Polynomial { q: 1 }, LengthGen::Constant { length: 1.0 }).unwrap();
        let r = ac_sphere_ratio_sum(&spec, 50, RatioVariant::Plain).unwrap();
        assert_eq!(r.terms[0], 4.0);
        assert_eq!(r.ac_conclusion, Verdict::Holds);
        let spec = AntitreeSpec::new(SphereGen::Polynomial { q: 1 }, LengthGen::Power { s: 0.5 }).unwrap();
        assert_eq!(
            ac_sphere_ratio_sum(&spec, 50, RatioVariant::Plain)
                .unwrap()
                .ac_conclusion,
            Verdict::NotApplicable
        );
        let r = ac_sphere_ratio_sum(&spec, 400, RatioVariant::MOfN).unwrap();
        assert_eq!(r.ac_conclusion, Verdict::Holds);
        assert!(r.terms.len() > 10);
        let spec = AntitreeSpec::new(SphereGen::Polynomial { q: 1 }, LengthGen::Power { s: 1.0 }).unwrap();
        let r = ac_sphere_ratio_sum(&spec, 400, RatioVariant::MOfN).unwrap();
        assert_eq!(r.series, SeriesStatus::Diverges);
        assert_eq!(r.ac_conclusion, Verdict::Inconclusive);
    }

    #[test]
    fn eventually_constant_spheres_give_zero_terms() {
        let spec = AntitreeSpec::new(
            SphereGen::Explicit {
                values: vec![1, 3, 4, 4, 4, 4, 4],
            },
            LengthGen::Constant { length: 1.0 },
        )
        .unwrap();
        let r = ac_sphere_ratio_sum(&spec, 5, RatioVariant::Plain).unwrap();
        assert!(r.terms[2..].iter().all(|&x| x == 0.0));
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn mismatched_constant_weight() {
        let spec = periodic(vec![1], LengthGen::Constant { length: 1.0 });
        let p = MetricProfile::from_sequences(vec![1; 5], vec![0.5, 1.0, 0.25, 1.25]).unwrap();
        let d = ac_string_deviation(&p, &spec, 0.0, 4.0).unwrap();
        let t = p.total_length();
        assert!((d.total - 3.0 * t.powi(3)).abs() < 1e-12);
        let quad = simpson(|x| 9.0 * x * x, 0.0, t, 1000);
        assert!((d.total - quad).abs() < 1e-10);
        let zero = ac_string_deviation(&p, &spec, 0.0, 1.0).unwrap();
        assert_eq!(zero.total, 0.0);
    }

    #[test]
    fn three_periodic_increment() {
        let (p, r, q) = (2u64, 3u64, 5u64);
        let (pf, rf, qf) = (p as f64, r as f64, q as f64);
        let a1 = qf / rf * (rf * rf - pf * pf);
        let a2 = pf / rf * (rf * rf - qf * qf);
        let delta = |k: usize| 0.8f64.powi(k as i32);
        let periods = 6;
        let mut s = vec![1u64];
        let mut len = Vec::new();
        for k in 0..periods {
            s.extend([q, r, p]);
            len.extend([1.0, delta(k), a1 / a2.abs() * delta(k)]);
        }
        let prof = MetricProfile::from_sequences(s, len).unwrap();
        let spec = periodic(vec![q, r, p], LengthGen::Constant { length: 1.0 });
        let a = 1.0 * qf * (1.0 - pf * pf);
        let d = ac_string_deviation(&prof, &spec, a, (pf * qf).powi(2)).unwrap();
        for k in 1..periods {
            let got: f64 = d.increments[3 * k..3 * k + 3].iter().sum();
            let want = (a1 * a1 / (3.0 * qf * rf) + a1.powi(3) / (3.0 * pf * rf * a2.abs())) * delta(k).powi(3);
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "k={k}: {got} vs {want}");
        }
    }
}
