mod common;

use antitree_core::graph_oracle::{build_mesh, oracle_count, oracle_eigenvalues, OracleSolver, Truncation};
use antitree_core::model::{build_profile, AntitreeSpec, LengthGen, SphereGen};
use antitree_core::spectra::{decomposed_spectrum, sym_eigenvalues, BoundaryCondition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn binary_tree_like() -> AntitreeSpec {
    AntitreeSpec::new(SphereGen::Exponential { beta: 2 }, LengthGen::Constant { length: 1.0 }).unwrap()
}

#[test]
fn sym_lowest_matches_weighted_line_elements() {
    let p = build_profile(&binary_tree_like(), 30).unwrap();
    for (bc, neumann) in [
        (BoundaryCondition::Dirichlet, false),
        (BoundaryCondition::Neumann, true),
    ] {
        let exact = sym_eigenvalues(&p, bc, 3).unwrap();
        if neumann {
            assert_eq!(exact[0], 0.0);
        }
        for (k, &e) in exact.iter().enumerate().filter(|&(_, &e)| e > 0.0) {
            let fem = common::sym_fem_eigenvalue(&p, 400, neumann, k + 1);
            assert!(fem >= e * (1.0 - 1e-12), "{bc:?}: elements {fem} below {e}");
            assert!((fem - e).abs() <= 1e-4 * e, "{bc:?} λ_{}: {fem} vs {e}", k + 1);
        }
    }
}

#[test]
fn sym_lowest_matches_on_polynomial_lengths() {
    let spec = AntitreeSpec::new(SphereGen::Polynomial { q: 1 }, LengthGen::Power { s: 2.0 }).unwrap();
    let p = build_profile(&spec, 40).unwrap();
    let exact = sym_eigenvalues(&p, BoundaryCondition::Dirichlet, 1).unwrap()[0];
    let fem = common::sym_fem_eigenvalue(&p, 4000, false, 1);
    assert!((fem - exact).abs() <= 1e-4 * exact, "{fem} vs {exact}");
}

#[test]
fn graph_counts_match_decomposition_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = common::random_profile(&mut rng, 3, 4);
        let h = p.lengths().iter().copied().fold(f64::INFINITY, f64::min) / 40.0;
        let mesh = build_mesh(&p, h, Truncation::Dirichlet).unwrap();
        let s = decomposed_spectrum(&p, BoundaryCondition::Dirichlet, 60.0).unwrap();
        // FEM eigenvalues sit above the exact ones, so probe midway between
        // consecutive exact values where the count is unambiguous
        let exact: Vec<f64> = s.expanded(10_000).into_iter().map(|(x, _)| x).collect();
        for w in exact.windows(2) {
            if w[1] - w[0] < 0.05 * w[1] {
                continue;
            }
            let probe = 0.5 * (w[0] + w[1]);
            let want = s.counting_function(probe).unwrap();
            let got = oracle_count(&mesh, probe).unwrap() as u128;
            assert_eq!(got, want, "{p:?} at {probe}");
        }
    }
}

#[test]
fn neumann_truncation_reference_matches_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = common::random_profile(&mut rng, 2, 3);
        let h = p.lengths().iter().copied().fold(f64::INFINITY, f64::min) / 60.0;
        let mesh = build_mesh(&p, h, Truncation::Neumann).unwrap();
        let s = decomposed_spectrum(&p, BoundaryCondition::Neumann, 40.0).unwrap();
        let exact: Vec<f64> = s.expanded(8).into_iter().map(|(x, _)| x).collect();
        let fem = oracle_eigenvalues(&mesh, exact.len(), OracleSolver::Condensed).unwrap();
        for (a, b) in exact.iter().zip(&fem) {
            assert!((a - b).abs() <= 2e-3 * a.max(1.0), "{p:?}: {a} vs {b}");
        }
    }
}
