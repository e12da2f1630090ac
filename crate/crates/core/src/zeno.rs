//! Continuous-stabilisation (`dt -> 0`) limit of the engine.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::engine::{reference_splitting, ThermalQubit};
use crate::error::{Error, Result};
use crate::linalg::vector_expectation;
use crate::spin_algebra::MachineSpec;

/// `ln(1 + e^{-x})` without overflow.
pub fn softplus_neg(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// `dW/dt = -p1(t) tr[χ(t) C]`, the work rate on the reference orbit.
pub fn zeno_power(spec: &MachineSpec, t: f64, beta: f64) -> f64 {
    let d = spec.reference_label();
    let state = spec.clock_basis_state(d, t).expect("reference label");
    let drift = vector_expectation(&state, spec.generator());
    -ThermalQubit::gibbs(reference_splitting(spec, t), beta).p1 * drift
}

/// `F(t) = -β⁻¹ ln(1 + e^{-βΔ(t)})`.
pub fn free_energy(spec: &MachineSpec, t: f64, beta: f64) -> f64 {
    free_energy_of_splitting(reference_splitting(spec, t), beta)
}

pub fn free_energy_of_splitting(delta: f64, beta: f64) -> f64 {
    -softplus_neg(beta * delta) / beta
}

/// `F(τ̃) - F(τ')` over the default window `(π/2, π)`.
pub fn zeno_total_work(spec: &MachineSpec, beta: f64) -> f64 {
    zeno_work_window(spec, beta, FRAC_PI_2, PI)
}

pub fn zeno_work_window(spec: &MachineSpec, beta: f64, tau_tilde: f64, tau_prime: f64) -> f64 {
    free_energy(spec, tau_tilde, beta) - free_energy(spec, tau_prime, beta)
}

/// `kT (ln 2 - ln(1 + e^{-βl}))`; `l = 0` is allowed and gives 0.
pub fn spin_zeno_work(l: f64, beta: f64) -> Result<f64> {
    if !(l >= 0.0) || !(beta > 0.0) {
        return Err(Error::param("l", format!("need l >= 0 and beta > 0, got l = {l}, beta = {beta}")));
    }
    Ok((LN_2 - softplus_neg(beta * l)) / beta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZenoReport {
    pub w_zeno: f64,
    pub work_rate_samples: Vec<(f64, f64)>,
    pub free_energy_samples: Vec<(f64, f64)>,
}

/// Total Zeno work plus `samples` evenly spaced evaluations of the rate and free energy.
pub fn zeno_report(spec: &MachineSpec, beta: f64, tau_tilde: f64, tau_prime: f64, samples: usize) -> ZenoReport {
    let times: Vec<f64> = match samples {
        0 => Vec::new(),
        1 => vec![tau_tilde],
        n => (0..n)
            .map(|i| tau_tilde + (tau_prime - tau_tilde) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    ZenoReport {
        w_zeno: zeno_work_window(spec, beta, tau_tilde, tau_prime),
        work_rate_samples: times.iter().map(|&t| (t, zeno_power(spec, t, beta))).collect(),
        free_energy_samples: times.iter().map(|&t| (t, free_energy(spec, t, beta))).collect(),
    }
}
