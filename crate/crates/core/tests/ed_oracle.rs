use altxy::ed::{build_spin_hamiltonian, quenched_two_site, thermal_two_site, Boundary};
use altxy::finite_chain::exact_observables;
use altxy::observables::{ObservableSet, Protocol, Quench};
use altxy::two_site::{assemble_rho, Source};
use altxy::{SystemParams, Temperature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn draw(rng: &mut ChaCha8Rng) -> SystemParams {
    let g = rng.gen_range(0.2..1.0) * if rng.gen_bool(0.2) { -1.0 } else { 1.0 };
    SystemParams::unit(g, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)).unwrap()
}

fn momentum_rho(p: &SystemParams, protocol: &Protocol, n: usize) -> altxy::linalg::CMatrix {
    let obs = ObservableSet::from_array(exact_observables(p, protocol, n).unwrap());
    assemble_rho(&obs, Source::Ces).unwrap().rho
}

#[test]
fn thermal_states_match_spin_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [4, 8] {
        for _ in 0..5 {
            let p = draw(&mut rng);
            let h = build_spin_hamiltonian(&p, n, Boundary::Periodic).unwrap();
            for beta in [0.5, 2.0, 10.0] {
                let ed = thermal_two_site(&h, beta, &[(0, 1)]).unwrap();
                let mom = momentum_rho(&p, &Protocol::equilibrium(Temperature::Beta(beta)), n);
                let d = ed[0].rho.max_abs_diff(&mom);
                assert!(d < 1e-8, "N={n} {p:?} beta={beta}: {d:e}");
            }
        }
    }
}

#[test]
fn quenched_states_match_spin_chain() {
    let p = SystemParams::unit(0.8, 0.5, 0.3).unwrap();
    let post = p.fields_off();
    let n = 8;
    let pre_h = build_spin_hamiltonian(&p, n, Boundary::Periodic).unwrap();
    let post_h = build_spin_hamiltonian(&post, n, Boundary::Periodic).unwrap();
    for t in [0.7, 1.7, 3.1] {
        let ed = quenched_two_site(&pre_h, &post_h, 2.0, t, &[(0, 1)]).unwrap();
        let protocol = Protocol { temp: Temperature::Beta(2.0), quench: Some(Quench { post, t }) };
        let d = ed[0].rho.max_abs_diff(&momentum_rho(&p, &protocol, n));
        assert!(d < 1e-8, "t={t}: {d:e}");
    }
}

#[test]
fn twelve_sites_and_ground_state() {
    let p = SystemParams::unit(0.7, 0.4, -0.9).unwrap();
    let h = build_spin_hamiltonian(&p, 12, Boundary::Periodic).unwrap();
    let ed = thermal_two_site(&h, 2.0, &[(0, 1)]).unwrap();
    let d = ed[0].rho.max_abs_diff(&momentum_rho(&p, &Protocol::equilibrium(Temperature::Beta(2.0)), 12));
    assert!(d < 1e-8, "{d:e}");
    let gs = altxy::ed::lanczos_ground_state(&h).unwrap();
    let ed0 = altxy::ed::ground_two_site(&h, &gs, &[(0, 1)]).unwrap();
    let d = ed0[0].rho.max_abs_diff(&momentum_rho(&p, &Protocol::equilibrium(Temperature::Zero), 12));
    assert!(d < 1e-8);
}
