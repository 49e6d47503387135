//! Independent oracles and property predicates shared by the acceptance
//! harness and the property suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use antitree_core::criteria::{interval_sup, window_term};
use antitree_core::graph_oracle::{build_mesh, build_mesh_permuted, oracle_eigenvalues, OracleSolver, Truncation};
use antitree_core::model::MetricProfile;
use antitree_core::spectra::{interval_matrix, sym_count, sym_eigenvalues, sym_transfer, BoundaryCondition};
use nalgebra::Matrix2;
use rand::seq::SliceRandom;
use rand::Rng;

pub type Check = Result<String, String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random small profile: depth `1..=max_depth`, spheres `1..=max_sphere`,
/// lengths in `[0.3, 2]`.
pub fn random_profile<R: Rng>(rng: &mut R, max_depth: usize, max_sphere: u64) -> MetricProfile {
    let depth = rng.random_range(1..=max_depth);
    let mut spheres = vec![1u64];
    spheres.extend((0..=depth).map(|_| rng.random_range(1..=max_sphere)));
    let lengths = (0..=depth).map(|_| rng.random_range(0.3..2.0)).collect();
    MetricProfile::from_sequences(spheres, lengths).unwrap()
}

/// ζ(x) for x > 1 by direct summation with the integral remainder bracket
/// `∫_{K+1}^∞ t^{-x} dt ≤ tail ≤ ∫_K^∞ t^{-x} dt`; the midpoint is returned
/// once the bracket is narrower than `tol`.
pub fn zeta_by_summation(x: f64, tol: f64) -> f64 {
    let mut k: u64 = 1;
    let mut sum = 0.0;
    let mut comp = 0.0;
    loop {
        let term = (k as f64).powf(-x);
        // Kahan summation
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let kf = k as f64;
        let lo = (kf + 1.0).powf(1.0 - x) / (x - 1.0);
        let hi = kf.powf(1.0 - x) / (x - 1.0);
        if hi - lo < tol {
            return sum + 0.5 * (lo + hi);
        }
        k += 1;
    }
}

/// `k`-th eigenvalue (from 1) of the symmetric block by P1 elements on the
/// weighted line and Sturm counting of the tridiagonal pencil.
pub fn sym_fem_eigenvalue(profile: &MetricProfile, per_unit: usize, neumann_right: bool, k: usize) -> f64 {
    // element list: (weight, size)
    let mut elems = Vec::new();
    for n in 0..=profile.depth() {
        let len = profile.lengths()[n];
        let k = ((len * per_unit as f64).ceil() as usize).max(8);
        elems.extend(std::iter::repeat((profile.weight(n), len / k as f64)).take(k));
    }
    let count = |sigma: f64| {
        // nodes 0..=E; the last is dropped under Dirichlet
        let nodes = if neumann_right { elems.len() + 1 } else { elems.len() };
        let mut neg = 0;
        let mut prev: Option<(f64, f64)> = None; // (pivot, offdiag to next)
        for i in 0..nodes {
            let mut diag = 0.0;
            if i > 0 {
                let (mu, h) = elems[i - 1];
                diag += mu / h - sigma * mu * h / 3.0;
            }
            if i < elems.len() {
                let (mu, h) = elems[i];
                diag += mu / h - sigma * mu * h / 3.0;
            }
            let d = match prev {
                Some((p, b)) => diag - b * b / p,
                None => diag,
            };
            if d < 0.0 {
                neg += 1;
            }
            let off = if i < elems.len() {
                let (mu, h) = elems[i];
                -mu / h - sigma * mu * h / 6.0
            } else {
                0.0
            };
            prev = Some((if d == 0.0 { f64::MIN_POSITIVE } else { d }, off));
        }
        neg
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while count(hi) < k {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Transfer determinant on a random profile and parameter.
pub fn transfer_determinant<R: Rng>(rng: &mut R) -> Result<(), String> {
    let p = random_profile(rng, 6, 6);
    let lambda = rng.random_range(-5.0..200.0);
    let t = sym_transfer(&p, lambda, 0, p.depth());
    ensure((t.determinant() - 1.0).abs() <= 1e-12, || {
        format!("factored det {}", t.determinant())
    })?;
    // dense product as the oracle
    let mut dense = Matrix2::identity();
    for n in 0..=p.depth() {
        dense = interval_matrix(lambda, p.weight(n), p.lengths()[n]) * dense;
    }
    let scale = dense.abs().max().max(1.0);
    ensure((dense.determinant() - 1.0).abs() <= 1e-12 * scale * scale, || {
        format!("dense det {} at λ = {lambda}", dense.determinant())
    })?;
    let m = t.matrix();
    ensure((m - dense).abs().max() <= 1e-9 * scale, || {
        format!("factored {m} vs dense {dense}")
    })
}

/// `sym_count(λ)` equals the number of computed eigenvalues below `λ`.
pub fn sym_count_consistency<R: Rng>(rng: &mut R, samples: usize) -> Result<(), String> {
    let p = random_profile(rng, 5, 5);
    let bc = match rng.random_range(0..3) {
        0 => BoundaryCondition::Dirichlet,
        1 => BoundaryCondition::Neumann,
        _ => BoundaryCondition::Robin {
            theta: rng.random_range(0.0..PI),
        },
    };
    let top = 400.0;
    let k = sym_count(&p, top, bc) + 1;
    let ev = sym_eigenvalues(&p, bc, k).map_err(|e| e.to_string())?;
    for _ in 0..samples {
        let lambda: f64 = rng.random_range(-1.0..top);
        if ev.iter().any(|&e| (e - lambda).abs() <= 1e-8 * e.abs().max(1.0)) {
            continue;
        }
        let want = ev.iter().filter(|&&e| e < lambda).count();
        let got = sym_count(&p, lambda, bc);
        ensure(got == want, || {
            format!("{p:?} {bc:?}: count({lambda}) = {got}, eigenvalues give {want}")
        })?;
    }
    Ok(())
}

/// Every window term is nonnegative; checked against direct integrals.
pub fn window_nonnegative<R: Rng>(rng: &mut R) -> Result<(), String> {
    let p = random_profile(rng, 6, 8);
    let total = p.total_length();
    let a = rng.random_range(0.0..total);
    let b = rng.random_range(a..=total);
    let term = window_term(&p, a, b).map_err(|e| e.to_string())?;
    // direct ∫μ ∫1/μ − (b − a)² with interval clipping
    let t = p.breakpoints();
    let (mut im, mut iv) = (0.0, 0.0);
    for n in 0..=p.depth() {
        let overlap = (b.min(t[n + 1]) - a.max(t[n])).max(0.0);
        im += p.weight(n) * overlap;
        iv += overlap / p.weight(n);
    }
    let direct = im * iv - (b - a) * (b - a);
    let scale = im * iv;
    ensure(term >= -1e-12 * scale.max(1.0), || {
        format!("negative window term {term} on [{a}, {b}]")
    })?;
    ensure((term - direct).abs() <= 1e-10 * scale.max(1.0), || {
        format!("term {term} vs direct {direct}")
    })
}

/// Closed-form interval maximization against dense sampling refined by
/// ternary search on the best grid cell (the product is concave in `u`).
pub fn gap_interval_matches_sampling<R: Rng>(rng: &mut R) -> Result<(), String> {
    let before = rng.random_range(0.0..10.0);
    let mu = rng.random_range(0.1..50.0);
    let len = rng.random_range(0.05..5.0);
    let after = rng.random_range(0.0..10.0);
    let phi = |u: f64| (before + mu * u) * (after + (len - u) / mu);
    let closed = interval_sup(before, mu, len, after);
    let grid: Vec<f64> = (0..1000).map(|i| len * i as f64 / 999.0).collect();
    let best = (0..1000)
        .max_by(|&i, &j| phi(grid[i]).total_cmp(&phi(grid[j])))
        .unwrap();
    let sampled = phi(grid[best]);
    ensure(sampled <= closed * (1.0 + 1e-12), || {
        format!("sample {sampled} exceeds closed form {closed}")
    })?;
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(999)]);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if phi(m1) < phi(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let refined = phi(0.5 * (lo + hi)).max(sampled);
    ensure((refined - closed).abs() <= 1e-10 * closed.max(1e-300), || {
        format!("closed form {closed} vs refined sampling {refined}")
    })
}

/// Reference eigenvalues do not depend on the labelling inside spheres.
pub fn oracle_permutation_invariant<R: Rng>(rng: &mut R) -> Result<(), String> {
    let p = random_profile(rng, 2, 3);
    let h = p.lengths().iter().copied().fold(f64::INFINITY, f64::min) / 6.0;
    let trunc = if rng.random_bool(0.5) {
        Truncation::Dirichlet
    } else {
        Truncation::Neumann
    };
    let base = build_mesh(&p, h, trunc).map_err(|e| e.to_string())?;
    let m = base.dim().min(12);
    let want = oracle_eigenvalues(&base, m, OracleSolver::Dense).map_err(|e| e.to_string())?;
    let perms: Vec<Vec<usize>> = p
        .spheres()
        .iter()
        .map(|&s| {
            let mut v: Vec<usize> = (0..s as usize).collect();
            v.shuffle(rng);
            v
        })
        .collect();
    let mesh = build_mesh_permuted(&p, h, trunc, &perms).map_err(|e| e.to_string())?;
    let got = oracle_eigenvalues(&mesh, m, OracleSolver::Dense).map_err(|e| e.to_string())?;
    for (a, b) in want.iter().zip(&got) {
        ensure((a - b).abs() <= 1e-9 * a.abs().max(1.0), || {
            format!("{p:?}: {a} vs {b} after {perms:?}")
        })?;
    }
    Ok(())
}

/// For `θ₁ < θ₂`: `λ_k(θ₂) ≤ λ_k(θ₁) ≤ λ_{k+1}(θ₂)`.
pub fn robin_interlacing<R: Rng>(rng: &mut R) -> Result<(), String> {
    let p = random_profile(rng, 4, 5);
    let mut th = [rng.random_range(0.0..PI), rng.random_range(0.0..PI)];
    th.sort_by(f64::total_cmp);
    let k = 8;
    let a = sym_eigenvalues(&p, BoundaryCondition::Robin { theta: th[0] }, k).map_err(|e| e.to_string())?;
    let b = sym_eigenvalues(&p, BoundaryCondition::Robin { theta: th[1] }, k + 1).map_err(|e| e.to_string())?;
    let slack = |x: f64| 1e-9 * x.abs().max(1.0);
    for i in 0..k {
        ensure(b[i] <= a[i] + slack(a[i]) && a[i] <= b[i + 1] + slack(a[i]), || {
            format!("{p:?} θ = {th:?}: λ_{i}: {} / {} / {}", b[i], a[i], b[i + 1])
        })?;
    }
    Ok(())
}
