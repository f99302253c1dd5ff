use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use lnt_core::ode::Tolerances;
use lnt_core::params::ProblemParams;
use lnt_core::singular::{solve_singular, SingularOptions, SingularSolution};
use lnt_core::spectral::hardy::{hardy_test_function, support};
use lnt_core::spectral::{
    assemble_on_nodes, assemble_operator, grid, potential_threshold_check, GridKind, Pencil,
    Profile, SymTridiag,
};

fn singular(n: u32, p: f64) -> SingularSolution {
    let params = ProblemParams::new(n, p).unwrap();
    solve_singular(
        &params,
        2.0,
        &SingularOptions::with_tol(Tolerances::uniform(1e-9)),
    )
    .unwrap()
}

fn n12_p3() -> &'static SingularSolution {
    static SOL: OnceLock<SingularSolution> = OnceLock::new();
    SOL.get_or_init(|| singular(12, 3.0))
}

fn tridiagonal(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(-3.0f64..3.0, n),
            prop::collection::vec(-1.5f64..1.5, n - 1),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inertia_matches_dense_eigenvalues((diag, off) in tridiagonal(200), shift in -2.0f64..2.0) {
        let n = diag.len();
        let dense = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => diag[i],
            1 => off[i.min(j)],
            _ => 0.0,
        });
        let eig = SymmetricEigen::new(dense).eigenvalues;
        let gap = eig.iter().map(|e| (e - shift).abs()).fold(f64::INFINITY, f64::min);
        prop_assume!(gap > 1e-9);
        let expected = eig.iter().filter(|&&e| e < shift).count();
        let pencil = Pencil::standard(SymTridiag::new(diag, off).unwrap());
        prop_assert_eq!(pencil.count_below(shift).unwrap(), expected);
    }

    #[test]
    fn generalized_counts_match_dense(
        (diag, off) in tridiagonal(60),
        seed_mass in prop::collection::vec(0.1f64..10.0, 60),
    ) {
        let n = diag.len();
        let mass = seed_mass[..n].to_vec();
        // M^{-1/2} A M^{-1/2}
        let dense = DMatrix::from_fn(n, n, |i, j| {
            let a = match i.abs_diff(j) {
                0 => diag[i],
                1 => off[i.min(j)],
                _ => 0.0,
            };
            a / (mass[i] * mass[j]).sqrt()
        });
        let eig = SymmetricEigen::new(dense).eigenvalues;
        prop_assume!(eig.iter().all(|e| e.abs() > 1e-9));
        let expected = eig.iter().filter(|&&e| e < 0.0).count();
        let pencil = Pencil::new(SymTridiag::new(diag, off).unwrap(), mass).unwrap();
        prop_assert_eq!(pencil.negative_count().unwrap(), expected);
    }

    #[test]
    fn enlarging_the_domain_never_loses_negative_modes(drop in 1usize..300) {
        // the operator on a suffix of the nodes is a principal submatrix
        let sol = n12_p3();
        let nodes = grid(1e-5, 1.0, 512, GridKind::Geometric);
        let profile = Profile::Singular(sol);
        let full = assemble_on_nodes(profile, 12, &nodes).unwrap();
        let part = assemble_on_nodes(profile, 12, &nodes[drop..]).unwrap();
        prop_assert!(full.negative_count().unwrap() >= part.negative_count().unwrap());
    }
}

#[test]
fn hardy_supports_are_disjoint_and_vanish_at_ends() {
    let eps = 0.35;
    for j in 1..=5 {
        let (lo, hi) = support(j, eps);
        let (next_lo, next_hi) = support(j + 1, eps);
        assert!(next_hi <= lo && next_lo < next_hi);
        let f = hardy_test_function(j, eps, 5, 512).unwrap();
        // relative to the envelope r^{-(N-2)/2} at each end
        assert!(f.value(lo).abs() < 1e-12 * lo.powf(-1.5));
        assert!(f.value(hi).abs() < 1e-12 * hi.powf(-1.5));
        assert!(f.value((lo * hi).sqrt()).abs() > 0.0);
    }
}

#[test]
fn negative_forms_stay_negative_after_projection() {
    let sol = singular(5, 10.0);
    let profile = Profile::Singular(&sol);
    let cutoff = 0.5 * support(3, 0.35).0;
    let op = assemble_operator(profile, 5, 1.0, cutoff, 4096, GridKind::Geometric).unwrap();
    for j in 1..=3 {
        let f = hardy_test_function(j, 0.35, 5, 2048).unwrap();
        let (form, _) = f.form(profile).unwrap();
        assert!(form < 0.0);
        assert!(f.discrete_quotient(&op).unwrap() < 0.0, "j = {j}");
    }
}

#[test]
fn threshold_limit_matches_closed_form() {
    for (n, p) in [(5u32, 10.0), (12, 3.0), (12, 5.0), (11, 8.0), (20, 2.0)] {
        let t = potential_threshold_check(&singular(n, p)).unwrap();
        assert!(t.relative_gap < 1e-3, "{t:?}");
        let below_jl = lnt_core::params::joseph_lundgren(n).unwrap().is_above(p);
        assert_eq!(t.above_hardy, below_jl, "N={n} p={p}");
    }
}
