use proptest::prelude::*;

use lnt_core::ode::{energy, Tolerances};
use lnt_core::params::{critical_exponent, ProblemParams};
use lnt_core::shooting::shoot;
use lnt_core::singular::{solve_singular, SingularOptions};

const TOL: f64 = 1e-9;

fn supercritical() -> impl Strategy<Value = ProblemParams> {
    (3u32..=14, 0.05f64..3.0).prop_map(|(n, excess)| {
        let ps = critical_exponent(n).unwrap();
        ProblemParams::new(n, ps * (1.0 + excess)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shots_dissipate_energy(params in supercritical(), gamma in 1.1f64..50.0) {
        let shot = shoot(gamma, &params, 6.0, Tolerances::uniform(TOL)).unwrap();
        let tr = &shot.trajectory;
        prop_assert!(tr.max_energy_increase() <= 10.0 * TOL);
        let (mismatch, _) = tr.energy_dissipation_mismatch(1e-6);
        prop_assert!(mismatch <= 1e-4, "mismatch {mismatch}");
        // critical points alternate between minima and maxima
        prop_assert!(tr.critical.alternates());
    }

    #[test]
    fn singular_solution_dissipates_energy(params in supercritical()) {
        let sol = solve_singular(&params, 3.0, &SingularOptions::with_tol(Tolerances::uniform(TOL))).unwrap();
        let tr = &sol.trajectory;
        prop_assert!(tr.max_energy_increase() <= 10.0 * TOL);
        let e0 = energy(tr.samples[0], params.p);
        let e1 = energy(*tr.samples.last().unwrap(), params.p);
        prop_assert!(e1 <= e0);
    }

    #[test]
    fn critical_radii_interlace_with_crossings(params in supercritical()) {
        // between consecutive critical points u - 1 changes sign exactly once
        let sol = solve_singular(&params, 8.0, &SingularOptions::with_tol(Tolerances::uniform(TOL))).unwrap();
        let radii = &sol.critical_radii.radii;
        let tr = &sol.trajectory;
        for w in radii.windows(2) {
            let between = tr.unit_crossings_up_to(w[1]) - tr.unit_crossings_up_to(w[0]);
            prop_assert_eq!(between, 1);
        }
        if let (Some(rp), Some(&r1)) = (sol.r_p, radii.first()) {
            prop_assert!(rp < r1);
        }
    }
}
