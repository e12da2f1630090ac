//! Finite thermalisation: sub-unit interleaving and equilibration with a
//! resonant bosonic bath.

use crate::accounting::{selective_trace, CycleLedger, CycleParams};
use crate::engine::{marginal_splitting, BlockState, Thermalization};
use crate::error::{Error, Result};
use crate::spin_algebra::MachineSpec;

/// Below this value of `βΔ` the coefficients use their `n̄ -> ∞` limits.
pub const DEGENERACY_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BosonicForm {
    /// Column-normalised two-level relaxation.
    #[default]
    TracePreserving,
    /// `C_{ψ->ψ̄} = -e^{-(2n̄+1)τ}(n̄-1)/(2n̄+1)` as printed, with the output renormalised.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BosonicCoefficients {
    pub n_bar: f64,
    pub tau_beta: f64,
    pub c_psi_stay: f64,
    pub c_bar_to_psi: f64,
    pub c_psi_to_bar: f64,
    pub c_bar_stay: f64,
}

pub fn bosonic_coefficients(delta: f64, beta: f64, tau_beta: f64) -> Result<BosonicCoefficients> {
    bosonic_coefficients_with(delta, beta, tau_beta, BosonicForm::TracePreserving)
}

pub fn bosonic_coefficients_with(delta: f64, beta: f64, tau_beta: f64, form: BosonicForm) -> Result<BosonicCoefficients> {
    if !(tau_beta >= 0.0) {
        return Err(Error::param("tau_beta", format!("must be non-negative, got {tau_beta}")));
    }
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    let x = beta * delta.abs();
    // `down` weights relaxation into the lower level, `up` excitation out of it.
    let (n_bar, decay, up, down) = if x < DEGENERACY_EPS {
        let rate_time = if tau_beta == 0.0 {
            0.0
        } else if x == 0.0 {
            f64::INFINITY
        } else {
            (2.0 / x + 1.0) * tau_beta
        };
        (f64::INFINITY, (-rate_time).exp(), 0.5, 0.5)
    } else {
        let n = 1.0 / x.exp_m1();
        let decay = if tau_beta == 0.0 { 1.0 } else { (-(2.0 * n + 1.0) * tau_beta).exp() };
        (n, decay, n / (2.0 * n + 1.0), (n + 1.0) / (2.0 * n + 1.0))
    };
    let to_upper = up * (1.0 - decay);
    let to_lower = down * (1.0 - decay);
    let (mut c_psi_to_bar, c_bar_to_psi) = if delta >= 0.0 { (to_upper, to_lower) } else { (to_lower, to_upper) };
    let c_psi_stay = 1.0 - c_psi_to_bar;
    if form == BosonicForm::Printed && delta >= 0.0 && n_bar.is_finite() {
        c_psi_to_bar = -decay * (n_bar - 1.0) / (2.0 * n_bar + 1.0);
    }
    Ok(BosonicCoefficients {
        n_bar,
        tau_beta,
        c_psi_stay,
        c_bar_to_psi,
        c_psi_to_bar,
        c_bar_stay: 1.0 - c_bar_to_psi,
    })
}

/// One equilibration of duration `tau_beta`; `Δ` comes from the total clock marginal.
pub fn bosonic_equilibrate(
    spec: &MachineSpec,
    state: &BlockState,
    beta: f64,
    tau_beta: f64,
    form: BosonicForm,
) -> Result<BlockState> {
    let k = bosonic_coefficients_with(marginal_splitting(spec, state), beta, tau_beta, form)?;
    let psi = state.psi.scale(k.c_psi_stay) + state.psibar.scale(k.c_bar_to_psi);
    let psibar = state.psi.scale(k.c_psi_to_bar) + state.psibar.scale(k.c_bar_stay);
    let mut out = BlockState { psi, psibar };
    if form == BosonicForm::Printed {
        let (a, b) = out.weights();
        let total = a + b;
        out.psi /= num_complex::Complex64::new(total, 0.0);
        out.psibar /= num_complex::Complex64::new(total, 0.0);
    }
    Ok(out)
}

/// Selective cycle with each UP split into `n_beta` (thermalise, evolve) sub-steps.
/// `tau_beta = None` means instant Gibbs resets; `Some(τ)` uses the bosonic map.
pub fn run_subunit_cycle(
    spec: &MachineSpec,
    beta: f64,
    dt: f64,
    n_beta: usize,
    tau_beta: Option<f64>,
) -> Result<CycleLedger> {
    let therm = match tau_beta {
        None => Thermalization::SubUnit { n_beta },
        Some(tau_beta) => Thermalization::Bosonic { n_beta, tau_beta, form: BosonicForm::TracePreserving },
    };
    Ok(selective_trace(spec, &CycleParams::new(beta, dt).with_therm(therm))?.ledger())
}
