use approx::assert_relative_eq;

use lnt_core::exponent::{find_exponent, find_istar};
use lnt_core::ode::Tolerances;
use lnt_core::params::ProblemParams;
use lnt_core::shooting::{linearized_first_critical_radius, shoot_to_critical};
use lnt_core::singular::{solve_to_critical, SingularOptions};

fn tol() -> Tolerances {
    Tolerances::uniform(1e-10)
}

#[test]
fn large_shots_track_the_singular_critical_radius() {
    let params = ProblemParams::new(5, 20.0).unwrap();
    let sol = solve_to_critical(&params, 2, 1.0, &SingularOptions::with_tol(tol())).unwrap();
    let shot = shoot_to_critical(1e3, &params, 2, 8.0, tol()).unwrap();
    for i in 1..=2 {
        assert_relative_eq!(
            shot.critical_radius(i).unwrap(),
            sol.critical_radius(i).unwrap(),
            max_relative = 1e-8
        );
    }
}

#[test]
fn small_shots_follow_the_linearization() {
    for (n, p) in [(3u32, 6.0), (5, 4.0)] {
        let params = ProblemParams::new(n, p).unwrap();
        let shot = shoot_to_critical(1.0 + 1e-6, &params, 1, 50.0, tol()).unwrap();
        let expected = linearized_first_critical_radius(n, p).unwrap();
        assert_relative_eq!(
            shot.critical_radius(1).unwrap(),
            expected,
            max_relative = 1e-4
        );
    }
}

#[test]
fn istar_never_decreases_with_radius() {
    let params = ProblemParams::new(5, 6.0).unwrap();
    let stars: Vec<usize> = [0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&r| find_istar(&params, r, tol()).unwrap())
        .collect();
    assert!(stars.windows(2).all(|w| w[1] >= w[0]), "{stars:?}");
}

#[test]
fn exponent_bracket_has_opposite_signs() {
    let sol = find_exponent(2, 1.0, 5, 6.0, 1e4, tol()).unwrap();
    let (lo, hi) = sol.bracket;
    let radius = |p: f64| {
        let params = ProblemParams::new(5, p).unwrap();
        solve_to_critical(&params, 2, 1.0, &SingularOptions::with_tol(tol()))
            .unwrap()
            .critical_radius(2)
            .unwrap()
    };
    assert!(radius(lo) > 1.0 && radius(hi) < 1.0);
    assert!(lo <= sol.p_i && sol.p_i <= hi);
    assert!(sol.du_at_radius.abs() < 1e-6);
}
