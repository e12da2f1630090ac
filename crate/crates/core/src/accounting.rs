//! Energy bookkeeping: per-outcome work, feedback flips, Landauer reset, heat,
//! and cycle averages for the selective and unselective engines.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::engine::{
    orbit_energy, reference_splitting, run_unit_protocol, transition_column, transition_matrix, BlockState,
    ThermalQubit, Thermalization, PROBABILITY_FLOOR,
};
use crate::error::{Error, Result};
use crate::spin_algebra::{Branch, MachineSpec};

/// How the energy of the feedback flip `|ψ̄> -> |ψ>` after a misfire is charged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FlipConvention {
    /// The apparatus pays `<m|H+|m>`: the flip contributes `-<m(t+dt)|H+|m(t+dt)>`.
    #[default]
    Nominal,
    /// The flip releases `tr[H_SM(ρ_flip_before - ρ_flip_after)] = <m|H+|m> - <m|H-|m>`.
    EnergyBalance,
}

impl FlipConvention {
    pub fn label(self) -> &'static str {
        match self {
            FlipConvention::Nominal => "nominal",
            FlipConvention::EnergyBalance => "energy-balance",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Selective,
    Unselective,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Selective => "selective",
            Mode::Unselective => "unselective",
        })
    }
}

/// Time grid of one cycle: `n` unit protocols of length `dt` from `tau_tilde` to `tau_prime`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleGrid {
    pub tau_tilde: f64,
    pub tau_prime: f64,
    pub n: usize,
    pub dt: f64,
}

impl CycleGrid {
    /// `n = round((τ' - τ̃)/dt)`, then `dt` is re-derived so the grid lands on `τ'`.
    pub fn new(tau_tilde: f64, tau_prime: f64, dt: f64) -> Result<Self> {
        if !(tau_tilde >= 0.0 && tau_tilde < tau_prime && tau_prime <= 2.0 * PI + 1e-12) {
            return Err(Error::param(
                "tau_tilde",
                format!("need 0 <= tau_tilde < tau_prime <= 2π, got ({tau_tilde}, {tau_prime})"),
            ));
        }
        let span = tau_prime - tau_tilde;
        if !(dt > 0.0 && dt <= span + 1e-12) {
            return Err(Error::param("dt", format!("must lie in (0, {span}], got {dt}")));
        }
        let n = ((span / dt).round() as usize).max(1);
        Ok(Self { tau_tilde, tau_prime, n, dt: span / n as f64 })
    }

    /// Start time of unit protocol `k` (1-based).
    pub fn start(&self, k: usize) -> f64 {
        self.tau_tilde + (k - 1) as f64 * self.dt
    }
}

/// Everything that defines one engine cycle apart from the machine itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleParams {
    pub beta: f64,
    pub dt: f64,
    pub tau_tilde: f64,
    pub tau_prime: f64,
    pub therm: Thermalization,
    pub flip: FlipConvention,
}

impl CycleParams {
    pub fn new(beta: f64, dt: f64) -> Self {
        Self {
            beta,
            dt,
            tau_tilde: FRAC_PI_2,
            tau_prime: PI,
            therm: Thermalization::Instant,
            flip: FlipConvention::Nominal,
        }
    }

    pub fn with_therm(mut self, therm: Thermalization) -> Self {
        self.therm = therm;
        self
    }

    pub fn with_flip(mut self, flip: FlipConvention) -> Self {
        self.flip = flip;
        self
    }

    pub fn with_window(mut self, tau_tilde: f64, tau_prime: f64) -> Self {
        self.tau_tilde = tau_tilde;
        self.tau_prime = tau_prime;
        self
    }

    pub fn grid(&self) -> Result<CycleGrid> {
        if !(self.beta > 0.0) {
            return Err(Error::param("beta", format!("must be positive, got {}", self.beta)));
        }
        self.therm.validate()?;
        CycleGrid::new(self.tau_tilde, self.tau_prime, self.dt)
    }
}

/// Cycle-averaged energy flows.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleLedger {
    pub energy_to_apparatus: f64,
    pub reset_cost: f64,
    pub heat_in: f64,
    pub net_work: f64,
    /// Energy delivered by a cycle in which every measurement succeeds.
    pub w_ideal: f64,
    /// `w_ideal` minus the per-UP reset charges along that trajectory.
    pub w_ideal_net: f64,
    pub mode: Mode,
    /// Probability that the cycle reaches `τ'` without a misfire (1 in unselective mode).
    pub completion_probability: f64,
    pub n_steps: usize,
    pub dt: f64,
}

impl CycleLedger {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        mode: Mode,
        energy: f64,
        reset: f64,
        heat: f64,
        ideal: (f64, f64),
        completion: f64,
        grid: &CycleGrid,
    ) -> Self {
        Self {
            energy_to_apparatus: energy,
            reset_cost: reset,
            heat_in: heat,
            net_work: energy - reset,
            w_ideal: ideal.0,
            w_ideal_net: ideal.1,
            mode,
            completion_probability: completion,
            n_steps: grid.n,
            dt: grid.dt,
        }
    }
}

fn gibbs_excited(spec: &MachineSpec, t: f64, beta: f64) -> f64 {
    ThermalQubit::gibbs(reference_splitting(spec, t), beta).p1
}

/// Energy to the apparatus on a successful measurement starting from
/// `|d(t)>` with qubit excited weight `p1`:
/// `p1 <d(t)|H+ - (Γ_dd/p_d) U-† H+ U-|d(t)>`.
pub fn success_energy(spec: &MachineSpec, t: f64, dt: f64, p1: f64) -> f64 {
    if p1 == 0.0 {
        return 0.0;
    }
    let d = spec.reference_label();
    let gamma_dd = transition_column(spec, t, dt, d).expect("reference label")[d - 1];
    let p_d = (1.0 - p1) + p1 * gamma_dd;
    p1 * (reference_splitting(spec, t) - gamma_dd / p_d * reference_splitting(spec, t + dt))
}

/// Energy flow of a misfire, split into the measurement back-action and the flip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MisfireEnergy {
    pub measurement: f64,
    pub flip: f64,
    pub total: f64,
}

/// Energy the flip `|ψ̄> -> |ψ>` hands to the apparatus with the clock on `|m(t)>`.
pub fn flip_energy(spec: &MachineSpec, m: usize, t: f64, convention: FlipConvention) -> f64 {
    let e_plus = orbit_energy(spec, m, t, Branch::Plus);
    match convention {
        FlipConvention::Nominal => -e_plus,
        FlipConvention::EnergyBalance => e_plus - orbit_energy(spec, m, t, Branch::Minus),
    }
}

pub fn misfire_energy(
    spec: &MachineSpec,
    t: f64,
    dt: f64,
    p1: f64,
    m: usize,
    convention: FlipConvention,
) -> Result<MisfireEnergy> {
    spec.check_label(m)?;
    if m == spec.reference_label() {
        return Err(Error::NotAMisfire(m));
    }
    let d = spec.reference_label();
    let pre = (1.0 - p1) * orbit_energy(spec, d, t, Branch::Minus) + p1 * reference_splitting(spec, t);
    let measurement = pre - orbit_energy(spec, m, t + dt, Branch::Plus);
    let flip = flip_energy(spec, m, t + dt, convention);
    Ok(MisfireEnergy { measurement, flip, total: measurement + flip })
}

/// Shannon entropy in nats; entries below the probability floor count as zero.
pub fn shannon_entropy(probabilities: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    let mut s = 0.0;
    for &p in probabilities {
        if !(p >= -1e-15) || !p.is_finite() {
            return Err(Error::InvalidDistribution(format!("entry {p} is negative or not finite")));
        }
        total += p;
        if p > PROBABILITY_FLOOR {
            s -= p * p.ln();
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(s.max(0.0))
}

/// Minimal erasure cost `β⁻¹ S(p)` of a measurement record.
pub fn landauer_reset(probabilities: &[f64], beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    Ok(shannon_entropy(probabilities)? / beta)
}

/// Heat drawn at the thermalisation at `t + dt` after a successful UP `(t, dt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatFlow {
    pub quantum: f64,
    /// Same expression without the `Γ_dd/p_d` back-action ratio.
    pub classical: f64,
    pub ratio: f64,
}

pub fn heat_flow(spec: &MachineSpec, t: f64, dt: f64, beta: f64) -> HeatFlow {
    let d = spec.reference_label();
    let p1 = gibbs_excited(spec, t, beta);
    let p1_next = gibbs_excited(spec, t + dt, beta);
    let gamma_dd = transition_column(spec, t, dt, d).expect("reference label")[d - 1];
    let ratio = gamma_dd / ((1.0 - p1) + p1 * gamma_dd);
    let delta_next = reference_splitting(spec, t + dt);
    HeatFlow {
        quantum: (p1_next - p1 * ratio) * delta_next,
        classical: (p1_next - p1) * delta_next,
        ratio,
    }
}

/// Statistics of one unit protocol on the success branch of a selective cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct UpStep {
    pub t: f64,
    /// `(m, p_m, dE_m)` for every outcome above the probability floor; `dE_m`
    /// includes the flip for misfires.
    pub outcomes: Vec<(usize, f64, f64)>,
    pub p_success: f64,
    pub success_energy: f64,
    pub reset: f64,
    pub heat_in: f64,
}

impl UpStep {
    /// `Σ_m p_m dW_m` with `dW_m = dE_m - reset`.
    pub fn expected_work(&self) -> f64 {
        self.outcomes.iter().map(|&(_, p, e)| p * e).sum::<f64>() - self.reset
    }

    pub fn ideal_work(&self) -> f64 {
        self.success_energy - self.reset
    }

    pub fn misfire_work(&self, d: usize) -> f64 {
        self.outcomes
            .iter()
            .filter(|&&(m, _, _)| m != d)
            .map(|&(_, p, e)| p * (e - self.reset))
            .sum()
    }
}

/// Per-UP data of a selective cycle along its success branch.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectiveTrace {
    pub grid: CycleGrid,
    pub dim: usize,
    pub steps: Vec<UpStep>,
}

impl SelectiveTrace {
    /// `P_k = Π_{j<=k} p_d(j)`, starting with `P_0 = 1`.
    pub fn survival(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut acc = 1.0;
        out.push(acc);
        for s in &self.steps {
            acc *= s.p_success;
            out.push(acc);
        }
        out
    }

    pub fn completion_probability(&self) -> f64 {
        *self.survival().last().unwrap()
    }

    /// `Σ_k dE_d(k)` along the all-success trajectory.
    pub fn w_ideal(&self) -> f64 {
        self.steps.iter().map(|s| s.success_energy).sum()
    }

    /// `Σ_k dW_d(k)`, i.e. [`Self::w_ideal`] minus the per-UP reset charges.
    pub fn w_ideal_net(&self) -> f64 {
        self.steps.iter().map(UpStep::ideal_work).sum()
    }

    /// `Σ_k P_{k-1} Σ_m p_m dW_m`.
    pub fn average_work(&self) -> f64 {
        let surv = self.survival();
        self.steps.iter().zip(&surv).map(|(s, &p)| p * s.expected_work()).sum()
    }

    /// The same average split into completed cycles, cycles aborted after
    /// partial success, and the misfire steps themselves.
    pub fn average_work_three_terms(&self) -> (f64, f64, f64) {
        let surv = self.survival();
        let n = self.steps.len();
        let all_success = surv[n] * self.w_ideal_net();
        let mut partial = 0.0;
        let mut misfire = 0.0;
        let mut banked = 0.0;
        for (k, s) in self.steps.iter().enumerate() {
            partial += surv[k] * (1.0 - s.p_success) * banked;
            misfire += surv[k] * s.misfire_work(self.dim);
            banked += s.ideal_work();
        }
        (all_success, partial, misfire)
    }

    pub fn ledger(&self) -> CycleLedger {
        let surv = self.survival();
        let mut energy = 0.0;
        let mut reset = 0.0;
        let mut heat = 0.0;
        for (s, &p) in self.steps.iter().zip(&surv) {
            energy += p * s.outcomes.iter().map(|&(_, q, e)| q * e).sum::<f64>();
            reset += p * s.reset;
            heat += p * s.heat_in;
        }
        CycleLedger::assemble(
            Mode::Selective,
            energy,
            reset,
            heat,
            (self.w_ideal(), self.w_ideal_net()),
            surv[self.steps.len()],
            &self.grid,
        )
    }
}

/// Selective trace from the closed forms (instant thermalisation only).
pub fn selective_trace_analytic(spec: &MachineSpec, params: &CycleParams) -> Result<SelectiveTrace> {
    let grid = params.grid()?;
    if params.therm != Thermalization::Instant {
        return Err(Error::Unsupported("closed-form selective cycle needs instant thermalisation".into()));
    }
    let d = spec.reference_label();
    let beta = params.beta;
    let mut steps = Vec::with_capacity(grid.n);
    let mut energy_before = orbit_energy(spec, d, grid.tau_tilde, Branch::Minus);
    for k in 1..=grid.n {
        let t = grid.start(k);
        let t_next = t + grid.dt;
        let h_minus = orbit_energy(spec, d, t, Branch::Minus);
        let q = ThermalQubit::gibbs(reference_splitting(spec, t), beta);
        let pre = q.p0 * h_minus + q.p1 * q.delta;
        let column = transition_column(spec, t, grid.dt, d)?;
        let p_d = q.p0 + q.p1 * column[d - 1];
        let post_d = (q.p0 * h_minus + q.p1 * column[d - 1] * reference_splitting(spec, t_next)) / p_d;
        let success = pre - post_d;

        let mut outcomes = Vec::new();
        let mut probs = Vec::with_capacity(d);
        for (idx, &g) in column.iter().enumerate() {
            let m = idx + 1;
            let p = if m == d { p_d } else { q.p1 * g };
            if p < PROBABILITY_FLOOR {
                continue;
            }
            probs.push(p);
            let e = if m == d {
                success
            } else {
                pre - orbit_energy(spec, m, t_next, Branch::Plus) + flip_energy(spec, m, t_next, params.flip)
            };
            outcomes.push((m, p, e));
        }
        let total: f64 = probs.iter().sum();
        let reset = landauer_reset(&probs.iter().map(|p| p / total).collect::<Vec<_>>(), beta)?;
        steps.push(UpStep {
            t,
            outcomes,
            p_success: p_d,
            success_energy: success,
            reset,
            heat_in: pre - energy_before,
        });
        energy_before = post_d;
    }
    Ok(SelectiveTrace { grid, dim: d, steps })
}

/// Selective trace by stepping the block state along the success branch.
pub fn selective_trace_simulated(spec: &MachineSpec, params: &CycleParams) -> Result<SelectiveTrace> {
    let grid = params.grid()?;
    let d = spec.reference_label();
    let mut state = BlockState::reference(spec, grid.tau_tilde);
    let mut steps = Vec::with_capacity(grid.n);
    for k in 1..=grid.n {
        let t = grid.start(k);
        let out = run_unit_protocol(spec, &state, t, grid.dt, params.beta, &params.therm)?;
        let probs = out.probabilities();
        let reset = landauer_reset(&probs, params.beta)?;
        let outcomes = out
            .records
            .iter()
            .map(|r| {
                let flip = if r.is_misfire { flip_energy(spec, r.m, t + grid.dt, params.flip) } else { 0.0 };
                (r.m, r.probability, r.energy_to_apparatus + flip)
            })
            .collect();
        let Some(success) = out.outcome(d) else {
            return Err(Error::Unsupported(format!("reference outcome has zero probability at t = {t}")));
        };
        steps.push(UpStep {
            t,
            outcomes,
            p_success: success.probability,
            success_energy: success.energy_to_apparatus,
            reset,
            heat_in: out.heat_in,
        });
        state = success.post_state.clone();
    }
    Ok(SelectiveTrace { grid, dim: d, steps })
}

/// Closed forms for instant thermalisation, block-state stepping otherwise.
pub fn selective_trace(spec: &MachineSpec, params: &CycleParams) -> Result<SelectiveTrace> {
    match params.therm {
        Thermalization::Instant => selective_trace_analytic(spec, params),
        _ => selective_trace_simulated(spec, params),
    }
}

pub fn selective_cycle_average(spec: &MachineSpec, params: &CycleParams) -> Result<CycleLedger> {
    Ok(selective_trace(spec, params)?.ledger())
}

/// Kernel row of the unselective chain from orbit `m` at time `t`.
#[derive(Clone, Debug)]
struct KernelRow {
    /// `(m', K(m'|m), dE(m'|m))`.
    next: Vec<(usize, f64, f64)>,
    /// Expected energy after the measurement.
    post_energy: f64,
    /// Energy of the state right after the (first) thermalisation, minus the
    /// energy of the protocol input, so that heat is linear in the orbit weights.
    heat_offset: f64,
    /// Energy of the state fed into the protocol.
    input_energy: f64,
}

fn kernel_rows_analytic(spec: &MachineSpec, t: f64, dt: f64, beta: f64, active: &[bool]) -> Vec<Option<KernelRow>> {
    let d = spec.dim();
    let gamma = transition_matrix(spec, t, dt);
    let e_now = spec.orbit_splittings(t);
    let e_next = spec.orbit_splittings(t + dt);
    (0..d)
        .map(|i| {
            if !active[i] {
                return None;
            }
            let m = i + 1;
            let h_minus = orbit_energy(spec, m, t, Branch::Minus);
            let q = ThermalQubit::gibbs(e_now[i], beta);
            let pre = q.p0 * h_minus + q.p1 * e_now[i];
            let mut next = Vec::with_capacity(d);
            let mut post_energy = 0.0;
            for (j, &e_to) in e_next.iter().enumerate() {
                let g = gamma.entries[(j, i)];
                let (k, post) = if j == i {
                    let k = q.p0 + q.p1 * g;
                    (k, (q.p0 * h_minus + q.p1 * g * e_to) / k)
                } else {
                    (q.p1 * g, e_to)
                };
                if k < PROBABILITY_FLOOR {
                    continue;
                }
                post_energy += k * post;
                next.push((j + 1, k, pre - post));
            }
            Some(KernelRow { next, post_energy, heat_offset: pre - h_minus, input_energy: h_minus })
        })
        .collect()
}

fn kernel_rows_simulated(
    spec: &MachineSpec,
    t: f64,
    dt: f64,
    beta: f64,
    therm: &Thermalization,
    active: &[bool],
) -> Result<Vec<Option<KernelRow>>> {
    let mut rows = Vec::with_capacity(active.len());
    for (i, &on) in active.iter().enumerate() {
        if !on {
            rows.push(None);
            continue;
        }
        let input = BlockState::product(1.0, 0.0, &spec.orbit_state(i + 1, t)?);
        let input_energy = input.energy(spec);
        let out = run_unit_protocol(spec, &input, t, dt, beta, therm)?;
        let post_energy = out.records.iter().map(|r| r.probability * r.post_state.energy(spec)).sum();
        rows.push(Some(KernelRow {
            next: out.records.iter().map(|r| (r.m, r.probability, r.energy_to_apparatus)).collect(),
            post_energy,
            heat_offset: out.heat_in,
            input_energy,
        }));
    }
    Ok(rows)
}

/// Terms of the unselective average: expected energy, trajectory entropy (nats) and heat.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnselectiveTerms {
    pub energy: f64,
    pub entropy: f64,
    pub heat: f64,
}

fn unselective_terms_with(
    spec: &MachineSpec,
    params: &CycleParams,
    force_simulation: bool,
) -> Result<(UnselectiveTerms, CycleGrid)> {
    let grid = params.grid()?;
    if !params.therm.resets_qubit() {
        return Err(Error::Unsupported(
            "unselective averaging needs a thermalisation that fully resets the qubit".into(),
        ));
    }
    let d = spec.dim();
    let mut pi = vec![0.0; d];
    pi[d - 1] = 1.0;
    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut heat = 0.0;
    let mut expected_energy = orbit_energy(spec, d, grid.tau_tilde, Branch::Minus);
    for k in 1..=grid.n {
        let t = grid.start(k);
        let active: Vec<bool> = pi.iter().map(|&w| w > 0.0).collect();
        let rows = if params.therm == Thermalization::Instant && !force_simulation {
            kernel_rows_analytic(spec, t, grid.dt, params.beta, &active)
        } else {
            kernel_rows_simulated(spec, t, grid.dt, params.beta, &params.therm, &active)?
        };
        let mut next_pi = vec![0.0; d];
        let mut next_energy = 0.0;
        let mut thermalised = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let Some(row) = row else { continue };
            let w = pi[i];
            thermalised += w * (row.input_energy + row.heat_offset);
            next_energy += w * row.post_energy;
            let mut h = 0.0;
            for &(m, kp, de) in &row.next {
                next_pi[m - 1] += w * kp;
                energy += w * kp * de;
                h -= kp * kp.ln();
            }
            entropy += w * h;
        }
        heat += thermalised - expected_energy;
        expected_energy = next_energy;
        pi = next_pi;
    }
    Ok((UnselectiveTerms { energy, entropy, heat }, grid))
}

/// Forward dynamic programme over the orbit distribution.
pub fn unselective_terms(spec: &MachineSpec, params: &CycleParams) -> Result<UnselectiveTerms> {
    Ok(unselective_terms_with(spec, params, false)?.0)
}

/// Same as [`unselective_terms`] but every kernel row comes from block-state stepping.
pub fn unselective_terms_simulated(spec: &MachineSpec, params: &CycleParams) -> Result<UnselectiveTerms> {
    Ok(unselective_terms_with(spec, params, true)?.0)
}

pub fn unselective_cycle_average(spec: &MachineSpec, params: &CycleParams) -> Result<CycleLedger> {
    let (terms, grid) = unselective_terms_with(spec, params, false)?;
    let ideal = selective_trace(spec, params)?;
    Ok(CycleLedger::assemble(
        Mode::Unselective,
        terms.energy,
        terms.entropy / params.beta,
        terms.heat,
        (ideal.w_ideal(), ideal.w_ideal_net()),
        1.0,
        &grid,
    ))
}

pub fn cycle_average(spec: &MachineSpec, params: &CycleParams, mode: Mode) -> Result<CycleLedger> {
    match mode {
        Mode::Selective => selective_cycle_average(spec, params),
        Mode::Unselective => unselective_cycle_average(spec, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::Spin;

    fn spin(l: f64) -> MachineSpec {
        MachineSpec::spin(Spin::new(l).unwrap())
    }

    #[test]
    fn grid_rederives_step() {
        let g = CycleGrid::new(FRAC_PI_2, PI, 0.1).unwrap();
        assert_eq!(g.n, 16);
        assert!((g.start(g.n) + g.dt - PI).abs() < 1e-12);
        assert!(CycleGrid::new(PI, FRAC_PI_2, 0.1).is_err());
        assert!(CycleGrid::new(FRAC_PI_2, PI, 2.0).is_err());
        assert!(CycleGrid::new(FRAC_PI_2, PI, 0.0).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(landauer_reset(&[1.0, 0.0], 1.0).unwrap(), 0.0);
        assert!((landauer_reset(&[0.5, 0.5], 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let v = landauer_reset(&[0.5, 0.25, 0.25], 2.0).unwrap();
        assert!((v - 0.75 * 2f64.ln()).abs() < 1e-15);
        assert!(landauer_reset(&[1.2, -0.2], 1.0).is_err());
        assert!(landauer_reset(&[0.5, 0.4], 1.0).is_err());
    }

    #[test]
    fn success_energy_vanishes_without_excitation() {
        assert_eq!(success_energy(&spin(1.0), 2.0, 0.05, 0.0), 0.0);
    }

    #[test]
    fn misfire_rejects_reference() {
        let s = spin(1.0);
        assert!(matches!(
            misfire_energy(&s, 2.0, 0.05, 0.5, 3, FlipConvention::Nominal),
            Err(Error::NotAMisfire(3))
        ));
        assert!(misfire_energy(&s, 2.0, 0.05, 0.5, 4, FlipConvention::Nominal).is_err());
    }

    #[test]
    fn heat_flow_quantum_exceeds_classical() {
        let h = heat_flow(&spin(1.0), 2.0, 0.05, 1.0);
        assert!(h.quantum >= h.classical);
        assert!(h.ratio < 1.0);
    }

    #[test]
    fn three_term_form_matches_telescoped() {
        let s = spin(2.0);
        let tr = selective_trace(&s, &CycleParams::new(1.0, 0.1)).unwrap();
        let (a, b, c) = tr.average_work_three_terms();
        assert!((a + b + c - tr.average_work()).abs() < 1e-12);
        let ledger = tr.ledger();
        assert_eq!(ledger.net_work, ledger.energy_to_apparatus - ledger.reset_cost);
        assert!((ledger.net_work - tr.average_work()).abs() < 1e-12);
    }

    #[test]
    fn analytic_and_simulated_selective_agree() {
        let s = spin(1.5);
        for flip in [FlipConvention::Nominal, FlipConvention::EnergyBalance] {
            let p = CycleParams::new(1.0, 0.1).with_flip(flip);
            let a = selective_trace_analytic(&s, &p).unwrap().ledger();
            let b = selective_trace_simulated(&s, &p).unwrap().ledger();
            for (x, y) in [
                (a.energy_to_apparatus, b.energy_to_apparatus),
                (a.reset_cost, b.reset_cost),
                (a.heat_in, b.heat_in),
                (a.w_ideal, b.w_ideal),
                (a.completion_probability, b.completion_probability),
            ] {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn unselective_routes_agree() {
        let s = spin(1.0);
        let p = CycleParams::new(1.0, 0.2);
        let a = unselective_terms(&s, &p).unwrap();
        let b = unselective_terms_simulated(&s, &p).unwrap();
        assert!((a.energy - b.energy).abs() < 1e-10);
        assert!((a.entropy - b.entropy).abs() < 1e-10);
        assert!((a.heat - b.heat).abs() < 1e-10);
    }

    #[test]
    fn unselective_rejects_bosonic() {
        let s = spin(1.0);
        let therm = Thermalization::Bosonic {
            n_beta: 2,
            tau_beta: 1.0,
            form: crate::therm::BosonicForm::TracePreserving,
        };
        let p = CycleParams::new(1.0, 0.2).with_therm(therm);
        assert!(matches!(unselective_cycle_average(&s, &p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cold_limit_is_ideal() {
        let s = spin(2.0);
        let l = selective_cycle_average(&s, &CycleParams::new(1e6, 0.1)).unwrap();
        assert!((l.net_work - l.w_ideal).abs() < 1e-12);
        assert!((l.w_ideal_net - l.w_ideal).abs() < 1e-12);
        assert!((l.completion_probability - 1.0).abs() < 1e-12);
        let u = unselective_terms(&s, &CycleParams::new(1e6, 0.1)).unwrap();
        assert!(u.entropy.abs() < 1e-12);
    }
}
