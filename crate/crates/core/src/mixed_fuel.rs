//! Running the engine on mixed inputs `q·1/2 + (1-q)|ψ><ψ|`.

use std::f64::consts::LN_2;

use crate::accounting::{flip_energy, landauer_reset, selective_trace, CycleParams};
use crate::engine::{clock_measurement, conditional_evolve, transition_column, BlockState};
use crate::error::{Error, Result};
use crate::spin_algebra::MachineSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct MixedFuelReport {
    pub q: f64,
    pub p_fail_first: f64,
    pub p_fail_rest: f64,
    pub p_out_pure: f64,
    pub p_out_mixed: f64,
    pub q_star: f64,
    pub energy_to_apparatus: f64,
    pub reset_cost: f64,
    pub net_work: f64,
    /// True when `reset_cost` is a lower bound, making `net_work` an upper bound.
    pub net_work_is_upper_bound: bool,
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param("q", format!("must lie in [0, 1], got {q}")));
    }
    Ok(())
}

/// `-p ln p - (1-p) ln(1-p)` in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `Γ_dd(0, τ̃)`: survival of the reference orbit over the initialisation phase
/// when the qubit starts in `|ψ̄>`.
pub fn initial_survival(spec: &MachineSpec, tau_tilde: f64) -> f64 {
    let d = spec.reference_label();
    transition_column(spec, 0.0, tau_tilde, d).expect("reference label")[d - 1]
}

/// `P⁽¹⁾ = (q/2)(1 - Γ_dd(0, τ̃))`.
pub fn first_measurement_failure(spec: &MachineSpec, tau_tilde: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(0.5 * q * (1.0 - initial_survival(spec, tau_tilde)))
}

/// Solution of `q = (1 - (α/2) q) P`.
pub fn fixed_point_mixedness(completion: f64, alpha: f64) -> f64 {
    completion / (1.0 + 0.5 * alpha * completion)
}

pub fn stationary_mixedness(spec: &MachineSpec, params: &CycleParams) -> Result<f64> {
    let completion = selective_trace(spec, params)?.completion_probability();
    Ok(fixed_point_mixedness(completion, 1.0 - initial_survival(spec, params.tau_tilde)))
}

/// Stationary mixedness for `d -> ∞` and the Zeno limit (`α = 1`, `P = 1`).
pub fn classical_stationary_mixedness() -> f64 {
    fixed_point_mixedness(1.0, 1.0)
}

fn breakeven_residual(q: f64) -> f64 {
    (1.0 - 0.5 * q) * LN_2 - binary_entropy(0.5 * q)
}

/// Root in `(0, 1)` of `(1 - q/2) ln 2 = S(q/2)`, by bisection to 1e-8.
pub fn breakeven_mixedness() -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    // residual is positive at 0 and negative at 1
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if breakeven_residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Classical-limit statistics: every success yields `kT ln 2` and no misfires
/// occur after the initial measurement.
pub fn mixed_cycle_stats_classical(beta: f64, q: f64) -> Result<MixedFuelReport> {
    check_q(q)?;
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    let p_fail_first = 0.5 * q;
    let energy = (1.0 - p_fail_first) * LN_2 / beta;
    let reset = binary_entropy(p_fail_first) / beta;
    let p_out_mixed = 1.0 - p_fail_first;
    Ok(MixedFuelReport {
        q,
        p_fail_first,
        p_fail_rest: 0.0,
        p_out_pure: p_fail_first,
        p_out_mixed,
        q_star: classical_stationary_mixedness(),
        energy_to_apparatus: energy,
        reset_cost: reset,
        net_work: energy - reset,
        net_work_is_upper_bound: true,
    })
}

/// Finite machine: the initial measurement at `τ̃` is simulated explicitly and
/// the surviving branch runs the pure-input selective cycle.
pub fn mixed_cycle_stats(spec: &MachineSpec, params: &CycleParams, q: f64) -> Result<MixedFuelReport> {
    check_q(q)?;
    let tau = params.tau_tilde;
    let d = spec.reference_label();
    let clock = spec.reference_state(0.0);
    let start = BlockState::product(1.0 - 0.5 * q, 0.5 * q, &clock);
    let evolved = conditional_evolve(spec, &start, tau);
    let records = clock_measurement(spec, &evolved, tau);
    let probs: Vec<f64> = records.iter().map(|r| r.probability).collect();
    let mut energy = 0.0;
    for r in &records {
        let flip = if r.is_misfire { flip_energy(spec, r.m, tau, params.flip) } else { 0.0 };
        energy += r.probability * (r.energy_to_apparatus + flip);
    }
    let mut reset = landauer_reset(&probs, params.beta)?;
    let p_fail_first = records.iter().filter(|r| r.m != d).map(|r| r.probability).sum::<f64>();

    let trace = selective_trace(spec, params)?;
    let ledger = trace.ledger();
    let completion = ledger.completion_probability;
    energy += (1.0 - p_fail_first) * ledger.energy_to_apparatus;
    reset += (1.0 - p_fail_first) * ledger.reset_cost;
    let p_out_pure = p_fail_first + (1.0 - p_fail_first) * (1.0 - completion);
    Ok(MixedFuelReport {
        q,
        p_fail_first,
        p_fail_rest: 1.0 - completion,
        p_out_pure,
        p_out_mixed: 1.0 - p_out_pure,
        q_star: fixed_point_mixedness(completion, 1.0 - initial_survival(spec, tau)),
        energy_to_apparatus: energy,
        reset_cost: reset,
        net_work: energy - reset,
        net_work_is_upper_bound: false,
    })
}
