mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::{enumerate_records, Dense, Lcg};
use proptest::prelude::*;
use qtm_core::accounting::{
    flip_energy, misfire_energy, selective_cycle_average, selective_trace_analytic, selective_trace_simulated,
    success_energy, unselective_cycle_average, unselective_terms, unselective_terms_simulated, CycleParams,
    FlipConvention,
};
use qtm_core::engine::{orbit_energy, run_unit_protocol, BlockState, ThermalQubit, Thermalization};
use qtm_core::spin_algebra::{Branch, MachineSpec, Spin};

fn spec(two_l: u32) -> MachineSpec {
    MachineSpec::spin(Spin::from_twice(two_l).unwrap())
}

fn gibbs_p1(two_l: u32, t: f64, beta: f64) -> f64 {
    let delta = two_l as f64 / 2.0 * t.sin();
    1.0 / (1.0 + (beta * delta).exp())
}

#[test]
fn success_and_misfire_energies_match_dense_measurement() {
    let mut rng = Lcg(77);
    for _ in 0..60 {
        let two_l = 1 + rng.below(6);
        let (s, dense) = (spec(two_l), Dense::spin(two_l));
        let d = s.dim();
        let t = rng.range(FRAC_PI_2, PI);
        let dt = rng.range(0.01, 0.5);
        let beta = rng.range(0.2, 5.0);
        let p1 = gibbs_p1(two_l, t, beta);
        let (pre, outs) = dense.unit_protocol(&dense.pure_on_orbit(d, t), t, dt, beta);
        for (m, p, post) in &outs {
            // A dense state conditioned on a rare outcome carries round-off of
            // order eps/p, so rare branches are compared with weight p.
            let close = |a: f64, b: f64| (a - b).abs() * if *p >= 1e-4 { 1.0 } else { *p } < 1e-10;
            let oracle = dense.energy(&pre) - dense.energy(post);
            if *m == d {
                assert!(close(success_energy(&s, t, dt, p1), oracle));
            } else {
                let e = misfire_energy(&s, t, dt, p1, *m, FlipConvention::EnergyBalance).unwrap();
                assert!(close(e.measurement, oracle), "m={m} p={p:e}: {} vs {oracle}", e.measurement);
                // The physical flip of the misfire post-state, measured on the dense state.
                let flipped = dense.flip(post);
                assert!(close(e.flip, dense.energy(post) - dense.energy(&flipped)));
                let nominal = misfire_energy(&s, t, dt, p1, *m, FlipConvention::Nominal).unwrap();
                assert_eq!(nominal.measurement, e.measurement);
                assert!(close(nominal.flip, -dense.energy(post)));
            }
        }
    }
}

#[test]
fn flip_energy_conventions_differ_by_free_energy() {
    let s = spec(4);
    for m in 1..s.dim() {
        let t = 2.0;
        let nominal = flip_energy(&s, m, t, FlipConvention::Nominal);
        let balance = flip_energy(&s, m, t, FlipConvention::EnergyBalance);
        let diff = orbit_energy(&s, m, t, Branch::Plus) * 2.0 - orbit_energy(&s, m, t, Branch::Minus);
        assert!((balance - nominal - diff).abs() < 1e-12);
    }
}

#[test]
fn closed_form_trace_matches_block_stepping() {
    for two_l in [1, 3, 6] {
        let s = spec(two_l);
        for flip in [FlipConvention::Nominal, FlipConvention::EnergyBalance] {
            let p = CycleParams::new(1.3, 0.07).with_flip(flip);
            let a = selective_trace_analytic(&s, &p).unwrap();
            let b = selective_trace_simulated(&s, &p).unwrap();
            assert!((a.average_work() - b.average_work()).abs() < 1e-10);
            assert!((a.w_ideal() - b.w_ideal()).abs() < 1e-10);
            let (la, lb) = (a.ledger(), b.ledger());
            assert!((la.heat_in - lb.heat_in).abs() < 1e-10);
            assert!((la.reset_cost - lb.reset_cost).abs() < 1e-10);
        }
    }
}

#[test]
fn three_term_form_equals_telescoped_average() {
    let mut rng = Lcg(3);
    for _ in 0..40 {
        let s = spec(1 + rng.below(10));
        let p = CycleParams::new(rng.range(0.1, 5.0), rng.range(0.02, 0.3));
        let trace = selective_trace_analytic(&s, &p).unwrap();
        let (a, b, c) = trace.average_work_three_terms();
        assert!((a + b + c - trace.average_work()).abs() < 1e-10);
    }
}

#[test]
fn unselective_dp_equals_exhaustive_enumeration() {
    for &(two_l, steps, dt, beta) in &[(1u32, 4usize, 0.2, 1.0), (1, 4, 0.35, 0.4), (2, 3, 0.25, 2.0)] {
        let dense = Dense::spin(two_l);
        let s = spec(two_l);
        let p = CycleParams::new(beta, dt).with_window(FRAC_PI_2, FRAC_PI_2 + steps as f64 * dt);
        assert_eq!(p.grid().unwrap().n, steps);
        let mut acc = (0.0, 0.0, 0.0);
        enumerate_records(&dense, &dense.pure_on_orbit(s.dim(), FRAC_PI_2), FRAC_PI_2, dt, beta, steps, 1.0, &mut acc);
        for terms in [unselective_terms(&s, &p).unwrap(), unselective_terms_simulated(&s, &p).unwrap()] {
            assert!((terms.energy - acc.0).abs() < 1e-10, "{} vs {}", terms.energy, acc.0);
            assert!((terms.entropy - acc.1).abs() < 1e-10, "{} vs {}", terms.entropy, acc.1);
            assert!((terms.heat - acc.2).abs() < 1e-10, "{} vs {}", terms.heat, acc.2);
        }
    }
}

#[test]
fn bookkeeping_identity_on_random_steps() {
    let mut rng = Lcg(1000);
    for _ in 0..1000 {
        let two_l = 1 + rng.below(8);
        let (s, dense) = (spec(two_l), Dense::spin(two_l));
        let d = s.dim();
        let t = rng.range(FRAC_PI_2, PI);
        let dt = rng.range(1e-3, 0.3);
        let beta = rng.range(0.1, 10.0);
        // Entry state of an ideal-branch UP: qubit populations left by the previous measurement.
        let p1_in = rng.next_f64();
        let clock = s.reference_state(t);
        let input = BlockState::product(1.0 - p1_in, p1_in, &clock);
        let out = run_unit_protocol(&s, &input, t, dt, beta, &Thermalization::Instant).unwrap();
        let p1 = ThermalQubit::gibbs(two_l as f64 / 2.0 * t.sin(), beta).p1;
        let de = success_energy(&s, t, dt, p1);

        let v = dense.orbit(d, t);
        let rho = dense.product(1.0 - p1_in, &(&v * v.adjoint()));
        let (_, outs) = dense.unit_protocol(&rho, t, dt, beta);
        let post = &outs.iter().find(|o| o.0 == d).unwrap().2;
        let joint_change = dense.energy(post) - dense.energy(&rho);
        assert!((joint_change - (out.heat_in - de)).abs() < 1e-10, "{joint_change} vs {}", out.heat_in - de);
    }
}

#[test]
fn unselective_ideal_work_is_the_selective_one() {
    let s = spec(3);
    let p = CycleParams::new(1.0, 0.1);
    let sel = selective_cycle_average(&s, &p).unwrap();
    let uns = unselective_cycle_average(&s, &p).unwrap();
    assert_eq!(sel.w_ideal, uns.w_ideal);
    assert_eq!(uns.completion_probability, 1.0);
}

#[test]
fn selective_and_unselective_meet_at_small_dt() {
    let s = spec(4);
    let p = CycleParams::new(1.0, 0.005);
    let sel = selective_cycle_average(&s, &p).unwrap().net_work;
    let uns = unselective_cycle_average(&s, &p).unwrap().net_work;
    assert!(((sel - uns) / sel).abs() < 0.01, "{sel} vs {uns}");
}

/// Regression property over the spin-clock grid. The per-point results are
/// printed so that a failure shows where the ordering breaks.
#[test]
fn selective_outperforms_unselective_on_grid() {
    let mut violations = Vec::new();
    for two_l in 1..=10 {
        for dt in [0.02, 0.1] {
            let s = spec(two_l);
            let p = CycleParams::new(1.0, dt);
            let sel = selective_cycle_average(&s, &p).unwrap().net_work;
            let uns = unselective_cycle_average(&s, &p).unwrap().net_work;
            if sel < uns {
                violations.push(format!("l={} dt={dt}: {sel:.6} < {uns:.6}", two_l as f64 / 2.0));
            }
        }
    }
    assert!(violations.is_empty(), "selective below unselective at {} points:\n{}", violations.len(), violations.join("\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn average_never_exceeds_ideal(two_l in 1u32..=20, dt in 0.01f64..0.4, beta in 0.2f64..5.0) {
        let ledger = selective_cycle_average(&spec(two_l), &CycleParams::new(beta, dt)).unwrap();
        prop_assert!(ledger.net_work <= ledger.w_ideal + 1e-12);
        prop_assert!(ledger.completion_probability > 0.0 && ledger.completion_probability <= 1.0);
    }

    #[test]
    fn reset_cost_is_non_negative(two_l in 1u32..=12, dt in 0.01f64..0.4) {
        let p = CycleParams::new(1.0, dt);
        let s = spec(two_l);
        prop_assert!(selective_cycle_average(&s, &p).unwrap().reset_cost >= 0.0);
        prop_assert!(unselective_cycle_average(&s, &p).unwrap().reset_cost >= 0.0);
    }
}
