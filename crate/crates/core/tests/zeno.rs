mod common;

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use common::{integrate, Lcg};
use proptest::prelude::*;
use qtm_core::accounting::{selective_cycle_average, CycleParams};
use qtm_core::spin_algebra::{MachineSpec, Spin};
use qtm_core::zeno::{free_energy, spin_zeno_work, zeno_power, zeno_report, zeno_total_work, zeno_work_window};

fn spec(l: f64) -> MachineSpec {
    MachineSpec::spin(Spin::new(l).unwrap())
}

/// Free energy of a qubit with splitting `l sin t`, written out directly.
fn free_energy_oracle(l: f64, t: f64, beta: f64) -> f64 {
    -(1.0 + (-beta * l * t.sin()).exp()).ln() / beta
}

#[test]
fn closed_form_at_l5() {
    let w = zeno_total_work(&spec(5.0), 1.0);
    assert!((w - (LN_2 - (1.0 + (-5f64).exp()).ln())).abs() < 1e-12);
}

#[test]
fn power_is_minus_free_energy_rate() {
    let mut rng = Lcg(9);
    let h = 1e-6;
    for _ in 0..40 {
        let l = (1 + rng.below(16)) as f64 / 2.0;
        let beta = rng.range(0.2, 4.0);
        let s = spec(l);
        let t = rng.range(FRAC_PI_2 + 1e-3, PI - 1e-3);
        let df = (free_energy_oracle(l, t + h, beta) - free_energy_oracle(l, t - h, beta)) / (2.0 * h);
        assert!((zeno_power(&s, t, beta) + df).abs() < 1e-8, "l={l} t={t}");
        assert!((free_energy(&s, t, beta) - free_energy_oracle(l, t, beta)).abs() < 1e-12);
    }
}

#[test]
fn integrated_power_equals_free_energy_drop() {
    for l in [0.5, 2.0, 7.5] {
        for beta in [0.3, 1.0, 3.0] {
            let s = spec(l);
            let q = integrate(&|t| zeno_power(&s, t, beta), FRAC_PI_2, PI, 1e-12);
            assert!((q - zeno_total_work(&s, beta)).abs() < 1e-9, "l={l} beta={beta}");
        }
    }
}

#[test]
fn window_work_is_additive() {
    let s = spec(3.0);
    let whole = zeno_work_window(&s, 1.0, 1.8, 2.9);
    let split = zeno_work_window(&s, 1.0, 1.8, 2.2) + zeno_work_window(&s, 1.0, 2.2, 2.9);
    assert!((whole - split).abs() < 1e-14);
}

#[test]
fn report_samples_span_window() {
    let r = zeno_report(&spec(1.0), 1.0, FRAC_PI_2, PI, 5);
    assert_eq!(r.work_rate_samples.len(), 5);
    assert_eq!(r.work_rate_samples[0].0, FRAC_PI_2);
    assert_eq!(r.free_energy_samples[4].0, PI);
}

#[test]
fn finite_step_work_converges_to_zeno_value() {
    for l in [1.0, 5.0] {
        let s = spec(l);
        let target = zeno_total_work(&s, 1.0);
        let errs: Vec<f64> = [0.2, 0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&dt| (selective_cycle_average(&s, &CycleParams::new(1.0, dt)).unwrap().w_ideal - target).abs() / target)
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "l={l}: {errs:?}");
        assert!(errs[4] < 0.02, "l={l}: {errs:?}");
    }
}

proptest! {
    #[test]
    fn spin_formula_matches_machine(two_l in 1u32..=30, beta in 0.05f64..10.0) {
        let l = two_l as f64 / 2.0;
        let a = spin_zeno_work(l, beta).unwrap();
        let b = zeno_total_work(&spec(l), beta);
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        prop_assert!(a > 0.0 && a <= LN_2 / beta);
    }
}
