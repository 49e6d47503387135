//! Two-interval blocks coupling neighbouring generations.
//!
//! On `I_{n−1} ∪ I_n` with Dirichlet ends and the interface condition
//! `s_{n−1} f′(t_n−) = s_{n+1} f′(t_n+)`, the eigenvalues are the positive
//! zeros of the secular function
//!
//! ```text
//! d(λ) = s_next cos(z ℓ_next) sin(z ℓ_prev) + s_prev cos(z ℓ_prev) sin(z ℓ_next),  z = √λ.
//! ```
//!
//! The same problem is a weighted chain (`s_prev` on the first interval,
//! `s_next` on the second), whose oscillation count detects roots the sign
//! scan misses.

use std::f64::consts::PI;

use super::prufer::{bisect_sign, Chain, LeftEnd};
use super::{BoundaryCondition, SpectraError};

/// Parameters of one bridge block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeParams {
    pub s_prev: u64,
    pub s_next: u64,
    pub len_prev: f64,
    pub len_next: f64,
}

impl BridgeParams {
    pub fn new(s_prev: u64, s_next: u64, len_prev: f64, len_next: f64) -> Self {
        BridgeParams {
            s_prev,
            s_next,
            len_prev,
            len_next,
        }
    }

    fn secular_z(&self, z: f64) -> f64 {
        let (sp, sn) = (self.s_prev as f64, self.s_next as f64);
        sn * (z * self.len_next).cos() * (z * self.len_prev).sin()
            + sp * (z * self.len_prev).cos() * (z * self.len_next).sin()
    }

    fn chain(&self) -> Chain {
        Chain::new(
            vec![self.s_prev as f64, self.s_next as f64],
            vec![self.len_prev, self.len_next],
            LeftEnd::Dirichlet,
            BoundaryCondition::Dirichlet,
        )
    }

    /// `ℓ* = max(ℓ_prev, ℓ_next)`.
    pub fn longest(&self) -> f64 {
        self.len_prev.max(self.len_next)
    }

    /// `[(π/(2ℓ*))², (π/ℓ*)²]`, which always contains the lowest zero.
    pub fn lowest_bounds(&self) -> (f64, f64) {
        let l = self.longest();
        ((PI / (2.0 * l)).powi(2), (PI / l).powi(2))
    }

    /// Whether the sign conditions for the sharper upper bound
    /// `λ₁ < π²/(ℓ_prev + ℓ_next)²` hold.
    pub fn sharper_bound_applies(&self) -> bool {
        (self.s_next > self.s_prev && self.len_next > self.len_prev)
            || (self.s_next < self.s_prev && self.len_next < self.len_prev)
    }

    /// `k`-th eigenvalues (1-based) of the two problems decoupled at the
    /// interface with Neumann and with Dirichlet conditions there.
    pub fn decoupled_bounds(&self, k: usize) -> (f64, f64) {
        let kth = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[k - 1]
        };
        let fam = |shift: f64| {
            let mut v = Vec::with_capacity(2 * k);
            for l in [self.len_prev, self.len_next] {
                v.extend((1..=k).map(|j| (PI * (j as f64 - shift) / l).powi(2)));
            }
            v
        };
        (kth(fam(0.5)), kth(fam(0.0)))
    }
}

/// Secular function at `λ ≥ 0`.
pub fn bridge_secular(s_prev: u64, s_next: u64, len_prev: f64, len_next: f64, lambda: f64) -> f64 {
    BridgeParams::new(s_prev, s_next, len_prev, len_next).secular_z(lambda.max(0.0).sqrt())
}

fn closed_form(p: &BridgeParams, lambda_max: f64) -> Option<Vec<f64>> {
    let period = if p.len_prev == p.len_next {
        2.0 * p.len_prev
    } else if p.s_prev == p.s_next {
        p.len_prev + p.len_next
    } else {
        return None;
    };
    let zmax = lambda_max.sqrt();
    let kmax = (zmax * period / PI).floor() as usize + 1;
    Some(
        (1..=kmax)
            .map(|k| (PI * k as f64 / period).powi(2))
            .filter(|&x| x <= lambda_max)
            .collect(),
    )
}

/// Roots in `z` of the secular function inside `(a, b)` isolated by the
/// oscillation count, for cells the sign scan could not resolve.
fn isolate_by_count(p: &BridgeParams, chain: &Chain, a: f64, b: f64, out: &mut Vec<f64>) {
    let (ca, cb) = (chain.count(a * a), chain.count(b * b));
    if cb <= ca {
        return;
    }
    if cb - ca == 1 {
        // One simple root; the secular function changes sign unless the
        // root sits on an endpoint.
        let z = bisect_sign(|z| p.secular_z(z), a, b);
        out.push(z);
        return;
    }
    let mid = 0.5 * (a + b);
    if mid <= a || mid >= b {
        out.push(mid);
        return;
    }
    isolate_by_count(p, chain, a, mid, out);
    isolate_by_count(p, chain, mid, b, out);
}

/// All positive zeros of the secular function up to `lambda_max`.
///
/// Sign-change scan in `z` with step `π/(8(ℓ_prev + ℓ_next))`, bisection
/// on each change, then a cross-check of the root count against the
/// oscillation count of the equivalent weighted chain. Cells whose count
/// disagrees are re-isolated. The lowest zero is checked against
/// [`BridgeParams::lowest_bounds`].
pub fn bridge_eigenvalues(
    s_prev: u64,
    s_next: u64,
    len_prev: f64,
    len_next: f64,
    lambda_max: f64,
) -> Result<Vec<f64>, SpectraError> {
    if !(len_prev > 0.0 && len_next > 0.0) || s_prev < 1 || s_next < 1 {
        return Err(SpectraError::InvalidInput(
            "bridge needs positive lengths and sphere numbers".into(),
        ));
    }
    if !(lambda_max > 0.0) {
        return Err(SpectraError::InvalidInput("lambda_max must be positive".into()));
    }
    let p = BridgeParams::new(s_prev, s_next, len_prev, len_next);
    let roots = match closed_form(&p, lambda_max) {
        Some(r) => r,
        None => scan(&p, lambda_max)?,
    };
    if let Some(&first) = roots.first() {
        let (lo, hi) = p.lowest_bounds();
        let slack = 1e-12 * hi;
        if first < lo - slack || first > hi + slack {
            return Err(SpectraError::InternalConsistency(format!(
                "bridge {p:?}: lowest zero {first} outside [{lo}, {hi}]"
            )));
        }
    }
    Ok(roots)
}

fn scan(p: &BridgeParams, lambda_max: f64) -> Result<Vec<f64>, SpectraError> {
    let chain = p.chain();
    let zmax = lambda_max.sqrt();
    let dz = PI / (8.0 * (p.len_prev + p.len_next));
    let cells = (zmax / dz).ceil() as usize;
    let mut zs: Vec<f64> = Vec::new();
    // No zero lies below π/(2ℓ*) > dz, so the scan starts at dz.
    let mut a = dz.min(zmax);
    let mut fa = p.secular_z(a);
    for i in 2..=cells.max(1) {
        let b = (i as f64 * dz).min(zmax);
        if b <= a {
            break;
        }
        let fb = p.secular_z(b);
        let before = zs.len();
        if fa == 0.0 {
            zs.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            zs.push(bisect_sign(|z| p.secular_z(z), a, b));
        }
        // A cell can hold two close roots without a sign change, or a
        // tangential pair; the count decides.
        let expected = chain.count(b * b) - chain.count(a * a);
        if zs.len() - before != expected {
            zs.truncate(before);
            if fa == 0.0 {
                zs.push(a);
            }
            isolate_by_count(p, &chain, a, b, &mut zs);
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 && a <= zmax {
        zs.push(a);
    }
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    let roots: Vec<f64> = zs
        .into_iter()
        .map(|z| z * z)
        .filter(|&l| l > 0.0 && l <= lambda_max)
        .collect();
    let total = chain.count(lambda_max) + usize::from(p.secular_z(zmax) == 0.0);
    if roots.len() != total {
        return Err(SpectraError::InternalConsistency(format!(
            "bridge {p:?}: found {} zeros below {lambda_max}, oscillation count says {total}",
            roots.len()
        )));
    }
    Ok(roots)
}

/// Lowest `k` zeros of the secular function.
pub fn bridge_lowest(
    s_prev: u64,
    s_next: u64,
    len_prev: f64,
    len_next: f64,
    k: usize,
) -> Result<Vec<f64>, SpectraError> {
    let p = BridgeParams::new(s_prev, s_next, len_prev, len_next);
    let (_, upper) = p.decoupled_bounds(k);
    let mut roots = bridge_eigenvalues(s_prev, s_next, len_prev, len_next, upper * (1.0 + 1e-9))?;
    if roots.len() < k {
        return Err(SpectraError::InternalConsistency(format!(
            "bridge {p:?}: only {} zeros below the decoupled bound {upper}",
            roots.len()
        )));
    }
    roots.truncate(k);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secular_closed_forms() {
        let l = 0.7;
        let lam: f64 = 1.9;
        let z = lam.sqrt();
        let d = bridge_secular(2, 5, l, l, lam);
        assert!((d - 3.5 * (2.0 * z * l).sin()).abs() < 1e-14);
        let d = bridge_secular(4, 4, 1.0, 2.0, lam);
        assert!((d - 4.0 * (3.0 * z).sin()).abs() < 1e-14);
        assert_eq!(bridge_secular(3, 7, 1.0, 2.0, 0.0), 0.0);
    }

    #[test]
    fn special_cases() {
        let r = bridge_eigenvalues(2, 9, 1.0, 1.0, 20.0).unwrap();
        assert!((r[0] - PI * PI / 4.0).abs() < 1e-13);
        let r = bridge_eigenvalues(3, 3, 1.0, 2.0, 20.0).unwrap();
        assert!((r[0] - PI * PI / 9.0).abs() < 1e-13);
    }

    #[test]
    fn scan_reproduces_closed_form_when_forced() {
        // Same problem through the generic path.
        let p = BridgeParams::new(2, 9, 1.0, 1.0);
        let r = scan(&p, 400.0).unwrap();
        for (k, v) in r.iter().enumerate() {
            let want = (PI * (k + 1) as f64 / 2.0).powi(2);
            assert!((v - want).abs() < 1e-11 * want, "{v} vs {want}");
        }
    }

    #[test]
    fn nearly_decoupled_pairs_are_found() {
        // Large contrast splits near-coincident decoupled roots by very
        // little; the count cross-check must recover both.
        let r = bridge_eigenvalues(1_000_000, 1, 1.0, 2.0 / 3.0 * 1.0000001, 3000.0).unwrap();
        let chain = BridgeParams::new(1_000_000, 1, 1.0, 2.0 / 3.0 * 1.0000001).chain();
        assert_eq!(r.len(), chain.count(3000.0));
    }
}
