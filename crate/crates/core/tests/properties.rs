mod support;

use altxy::measures::{discord, log_negativity, mutual_information};
use altxy::observables::ObservableSet;
use altxy::two_site::{assemble_rho, fermionic_image, Source};
use altxy::SystemParams;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams> {
    (0.05f64..1.5, any::<bool>(), -2.5f64..2.5, -2.5f64..2.5)
        .prop_map(|(g, neg, l1, l2)| SystemParams::unit(if neg { -g } else { g }, l1, l2).unwrap())
}

fn phi() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn block_spectra_are_symmetric(p in params(), phi in phi()) {
        support::spectral_symmetry(&p, phi).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn block_spectra_match_closed_forms(p in params(), phi in phi()) {
        support::closed_forms(&p, phi).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn evolution_is_unitary_and_conserves_energy(p in params(), beta in 0.05f64..20.0, phi in phi(), t in 0.0f64..50.0) {
        support::unitary_dynamics(&p, beta, phi, t).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn separable_energy_bounds_the_bond(p in params()) {
        support::separable_bound(&p).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn separable_energy_touches_the_bound_on_the_line(g in 0.1f64..1.0, l2 in -2.0f64..2.0, positive in any::<bool>()) {
        let excess = support::separable_bound(&support::line_point(g, l2, positive)).map_err(TestCaseError::fail)?;
        prop_assert!(excess.abs() < 1e-9);
    }

    #[test]
    fn assembled_state_round_trips(raw in prop::array::uniform7(-1.0f64..1.0)) {
        // Σ|c| ≤ 1 keeps ¼(I + Σ c P) positive
        let total: f64 = raw.iter().map(|c| c.abs()).sum();
        let obs = ObservableSet::from_array(raw.map(|c| c / total.max(1.0)));
        let state = assemble_rho(&obs, Source::Tes).unwrap();
        prop_assert!(state.observables().max_abs_diff(&obs) < 1e-12);
        let image = fermionic_image(&state);
        prop_assert!((log_negativity(&state).unwrap() - log_negativity(&image).unwrap()).abs() < 1e-9);
        prop_assert!((discord(&state).unwrap() - discord(&image).unwrap()).abs() < 1e-6);
        prop_assert!(discord(&state).unwrap() <= mutual_information(&state).unwrap() + 1e-10);
    }
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = "task = \"thermal-map\"\n[grid]\nlambda1 = \"-1.5:1.5:7\"\nlambda2 = \"-1:1:3\"";
    let lines = support::sweep_determinism(dir.path(), config, &[1, 2, 4]).unwrap();
    assert!(lines > 21);
}
