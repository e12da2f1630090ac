//! Joint qubit–clock state in block form and the three-step unit protocol:
//! thermalise, evolve under the controlled unitary, measure the clock.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    c, expectation, min_eigenvalue, projector, real_trace, validate_density, CMatrix, CVector,
};
use crate::spin_algebra::{wigner_small_d, Branch, MachineSpec, Spin};
use crate::therm::{bosonic_equilibrate, BosonicForm};

/// Outcomes with probability below this are dropped (`0 log 0 = 0`).
pub const PROBABILITY_FLOOR: f64 = 1e-15;

/// Joint state `|ψ><ψ| ⊗ ρ_ψ + |ψ̄><ψ̄| ⊗ ρ_ψ̄`. Each block carries its qubit
/// weight as its trace. Every map in the protocol preserves this form, so
/// qubit–clock cross-coherence never has to be stored.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockState {
    pub psi: CMatrix,
    pub psibar: CMatrix,
}

impl BlockState {
    pub fn new(psi: CMatrix, psibar: CMatrix) -> Result<Self> {
        let s = Self { psi, psibar };
        s.validate()?;
        Ok(s)
    }

    /// `|ψ><ψ| ⊗ χ(t)`: the pure input on the reference orbit.
    pub fn reference(spec: &MachineSpec, t: f64) -> Self {
        let d = spec.dim();
        Self {
            psi: spec.reference_state(t),
            psibar: CMatrix::zeros(d, d),
        }
    }

    /// Product state with qubit populations `(p0, p1)` and a clock state.
    pub fn product(p0: f64, p1: f64, clock: &CMatrix) -> Self {
        Self {
            psi: clock.scale(p0),
            psibar: clock.scale(p1),
        }
    }

    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }

    /// `tr_S ρ`.
    pub fn clock_marginal(&self) -> CMatrix {
        &self.psi + &self.psibar
    }

    /// Qubit populations `(w_ψ, w_ψ̄)`.
    pub fn weights(&self) -> (f64, f64) {
        (real_trace(&self.psi), real_trace(&self.psibar))
    }

    /// `tr[H_SM ρ] = tr[H- ρ_ψ] + tr[H+ ρ_ψ̄]`.
    pub fn energy(&self, spec: &MachineSpec) -> f64 {
        expectation(&self.psi, spec.h_minus()) + expectation(&self.psibar, spec.h_plus())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.psi.nrows();
        if self.psibar.nrows() != d || self.psibar.ncols() != d || self.psi.ncols() != d {
            return Err(Error::Dimension { expected: d, got: self.psibar.nrows() });
        }
        let (a, b) = self.weights();
        if (a + b - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("block weights sum to {}", a + b)));
        }
        for block in [&self.psi, &self.psibar] {
            if min_eigenvalue(block) < -1e-12 {
                return Err(Error::InvalidDensity("block is not positive semidefinite".into()));
            }
        }
        Ok(())
    }

    /// Swaps the blocks, i.e. applies the qubit flip `|ψ> <-> |ψ̄>`.
    pub fn flipped(&self) -> Self {
        Self {
            psi: self.psibar.clone(),
            psibar: self.psi.clone(),
        }
    }
}

/// Gibbs state of the qubit for splitting `Δ` with `|ψ>` at zero energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalQubit {
    pub delta: f64,
    pub p0: f64,
    pub p1: f64,
    pub partition: f64,
}

impl ThermalQubit {
    pub fn gibbs(delta: f64, beta: f64) -> Self {
        let x = beta * delta;
        let p1 = if delta == 0.0 || x == 0.0 {
            0.5
        } else if x > 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + x.exp())
        };
        Self {
            delta,
            p0: 1.0 - p1,
            p1,
            partition: 1.0 + (-x).exp(),
        }
    }
}

/// Orbit transition probabilities `Γ_{m'm}(t, dt) = |<m'(t+dt)|U+(dt)|m(t)>|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub entries: DMatrix<f64>,
    pub t: f64,
    pub dt: f64,
}

impl TransitionMatrix {
    /// `Γ_{m'm}` for 1-based labels.
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.entries[(to - 1, from - 1)]
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn stochastic_deviation(&self) -> f64 {
        let rows = self.entries.row_iter().map(|r| (r.sum() - 1.0).abs());
        let cols = self.entries.column_iter().map(|c| (c.sum() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

/// One measurement outcome of a unit protocol.
#[derive(Clone, Debug)]
pub struct UnitOutcomeRecord {
    /// 1-based orbit label.
    pub m: usize,
    pub probability: f64,
    /// `tr[H_SM (ρ' - ρ_m)]`: energy handed to the apparatus by the measurement.
    pub energy_to_apparatus: f64,
    pub post_state: BlockState,
    pub is_misfire: bool,
}

/// How the qubit is coupled to the bath within one unit protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Thermalization {
    /// Gibbs reset once at the start of the unit protocol.
    Instant,
    /// `n_beta` rounds of (Gibbs reset, evolve `dt/n_beta`) before the measurement.
    SubUnit { n_beta: usize },
    /// `n_beta` rounds of (bosonic equilibration for `tau_beta`, evolve `dt/n_beta`).
    Bosonic {
        n_beta: usize,
        tau_beta: f64,
        form: BosonicForm,
    },
}

impl Thermalization {
    pub fn sub_units(&self) -> usize {
        match *self {
            Thermalization::Instant => 1,
            Thermalization::SubUnit { n_beta } | Thermalization::Bosonic { n_beta, .. } => n_beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sub_units() == 0 {
            return Err(Error::param("n_beta", "must be at least 1"));
        }
        if let Thermalization::Bosonic { tau_beta, .. } = *self {
            if !(tau_beta >= 0.0) {
                return Err(Error::param("tau_beta", format!("must be non-negative, got {tau_beta}")));
            }
        }
        Ok(())
    }

    /// True when the first step of every unit protocol fully resets the qubit.
    pub fn resets_qubit(&self) -> bool {
        !matches!(self, Thermalization::Bosonic { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Thermalization::Instant => "instant",
            Thermalization::SubUnit { .. } => "subunit",
            Thermalization::Bosonic { .. } => "bosonic",
        }
    }
}

/// `Δ = tr[ρ_M H+]` for a validated clock density matrix.
pub fn level_splitting(spec: &MachineSpec, clock_state: &CMatrix) -> Result<f64> {
    if clock_state.nrows() != spec.dim() {
        return Err(Error::Dimension { expected: spec.dim(), got: clock_state.nrows() });
    }
    validate_density(clock_state)?;
    Ok(expectation(clock_state, spec.h_plus()))
}

/// Splitting of the mean-field qubit Hamiltonian induced by the clock marginal.
pub(crate) fn marginal_splitting(spec: &MachineSpec, state: &BlockState) -> f64 {
    expectation(&state.clock_marginal(), spec.h_plus())
}

/// Mean-field Gibbs reset: the qubit is replaced by the Gibbs state of the
/// splitting induced by the total clock marginal.
pub fn gibbs_thermalize(spec: &MachineSpec, state: &BlockState, beta: f64) -> BlockState {
    let marginal = state.clock_marginal();
    let q = ThermalQubit::gibbs(expectation(&marginal, spec.h_plus()), beta);
    BlockState::product(q.p0, q.p1, &marginal)
}

/// Controlled unitary: `ρ_ψ -> U- ρ_ψ U-†`, `ρ_ψ̄ -> U+ ρ_ψ̄ U+†`.
pub fn conditional_evolve(spec: &MachineSpec, state: &BlockState, dt: f64) -> BlockState {
    let um = spec.propagator(Branch::Minus, dt);
    let up = spec.propagator(Branch::Plus, dt);
    BlockState {
        psi: &um * &state.psi * um.adjoint(),
        psibar: &up * &state.psibar * up.adjoint(),
    }
}

/// `Γ(t, dt)` from the cached propagators and the clock basis.
pub fn transition_matrix(spec: &MachineSpec, t: f64, dt: f64) -> TransitionMatrix {
    let start = spec.rotated_basis(t);
    let end = spec.rotated_basis(t + dt);
    let amp = end.adjoint() * spec.propagator(Branch::Plus, dt) * start;
    TransitionMatrix {
        entries: amp.map(|z| z.norm_sqr()),
        t,
        dt,
    }
}

/// Column `Γ_{·m}(t, dt)` in O(d²), indexed by label-1.
pub fn transition_column(spec: &MachineSpec, t: f64, dt: f64, m: usize) -> Result<Vec<f64>> {
    let start = spec.clock_basis_state(m, t)?;
    let kicked = spec.eigen(Branch::Plus).apply(dt, &start);
    let back = spec.eigen(Branch::Minus).apply(-(t + dt), &kicked);
    Ok(spec.c_basis().vectors.ad_mul(&back).iter().map(|z| z.norm_sqr()).collect())
}

/// `Δ(t) = <d(t)|H+|d(t)>`, the splitting induced by the reference orbit.
pub fn reference_splitting(spec: &MachineSpec, t: f64) -> f64 {
    orbit_energy(spec, spec.reference_label(), t, Branch::Plus)
}

/// `<m(t)|H±|m(t)>`.
pub fn orbit_energy(spec: &MachineSpec, m: usize, t: f64, branch: Branch) -> f64 {
    let v = spec.clock_basis_state(m, t).expect("valid orbit label");
    crate::linalg::vector_expectation(&v, spec.hamiltonian(branch))
}

/// `Γ(t, dt)` for the spin clock through Wigner d-blocks only:
/// `Γ_{m'm} = |Σ_{k,k'} e^{-i(kt - k'(t+dt))} d_{k'k}(dt) d_{m'k'}(-π/2) d_{km}(π/2)|²`.
pub fn transition_matrix_wigner(spec: &MachineSpec, t: f64, dt: f64) -> Result<TransitionMatrix> {
    let spin = spec.spin_number().ok_or(Error::NotSpinMachine)?;
    Ok(transition_matrix_for_spin(spin, t, dt))
}

pub fn transition_matrix_for_spin(spin: Spin, t: f64, dt: f64) -> TransitionMatrix {
    use std::f64::consts::FRAC_PI_2;
    let d = spin.dim();
    // Wigner blocks come in descending m; labels run ascending.
    let flip = |w: DMatrix<f64>| DMatrix::from_fn(d, d, |i, j| w[(d - 1 - i, d - 1 - j)]);
    let quarter = flip(wigner_small_d(spin, FRAC_PI_2).entries);
    let back = flip(wigner_small_d(spin, -FRAC_PI_2).entries);
    let step = flip(wigner_small_d(spin, dt).entries);
    let l = spin.value();

    let to_c = |m: &DMatrix<f64>| m.map(|x| c(x, 0.0));
    let phase = |s: f64| {
        CMatrix::from_diagonal(&CVector::from_iterator(
            d,
            (0..d).map(|k| num_complex::Complex64::from_polar(1.0, s * (k as f64 - l))),
        ))
    };
    let amp = to_c(&back) * phase(t + dt) * to_c(&step) * phase(-t) * to_c(&quarter);
    TransitionMatrix {
        entries: amp.map(|z| z.norm_sqr()),
        t,
        dt,
    }
}

/// Projective clock measurement in the rotated basis `{|m(t_meas)>}`.
pub fn clock_measurement(spec: &MachineSpec, state: &BlockState, t_meas: f64) -> Vec<UnitOutcomeRecord> {
    let basis = spec.rotated_basis(t_meas);
    let d = spec.dim();
    let pre_energy = state.energy(spec);
    let mut records = Vec::with_capacity(d);
    for k in 0..d {
        let v: CVector = basis.column(k).into_owned();
        let w_psi = v.dotc(&(&state.psi * &v)).re.max(0.0);
        let w_bar = v.dotc(&(&state.psibar * &v)).re.max(0.0);
        let probability = w_psi + w_bar;
        if probability < PROBABILITY_FLOOR {
            continue;
        }
        let proj = projector(&v);
        let post_state = BlockState {
            psi: proj.scale(w_psi / probability),
            psibar: proj.scale(w_bar / probability),
        };
        let m = k + 1;
        records.push(UnitOutcomeRecord {
            m,
            probability,
            energy_to_apparatus: pre_energy - post_state.energy(spec),
            post_state,
            is_misfire: m != d,
        });
    }
    records
}

/// Result of one unit protocol.
#[derive(Clone, Debug)]
pub struct UnitProtocolOutcome {
    pub records: Vec<UnitOutcomeRecord>,
    pub pre_measurement: BlockState,
    /// Total energy drawn from the bath by the thermalisation steps.
    pub heat_in: f64,
}

impl UnitProtocolOutcome {
    pub fn outcome(&self, m: usize) -> Option<&UnitOutcomeRecord> {
        self.records.iter().find(|r| r.m == m)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.probability).collect()
    }
}

/// Thermalise, evolve for `dt` and measure at `t + dt`.
pub fn run_unit_protocol(
    spec: &MachineSpec,
    state: &BlockState,
    t: f64,
    dt: f64,
    beta: f64,
    therm: &Thermalization,
) -> Result<UnitProtocolOutcome> {
    therm.validate()?;
    if !(dt >= 0.0) {
        return Err(Error::param("dt", format!("must be non-negative, got {dt}")));
    }
    let n = therm.sub_units();
    let sub_dt = dt / n as f64;
    let um = spec.propagator(Branch::Minus, sub_dt);
    let up = spec.propagator(Branch::Plus, sub_dt);
    let mut current = state.clone();
    let mut heat_in = 0.0;
    for _ in 0..n {
        let before = current.energy(spec);
        current = match *therm {
            Thermalization::Instant | Thermalization::SubUnit { .. } => gibbs_thermalize(spec, &current, beta),
            Thermalization::Bosonic { tau_beta, form, .. } => {
                bosonic_equilibrate(spec, &current, beta, tau_beta, form)?
            }
        };
        heat_in += current.energy(spec) - before;
        current = BlockState {
            psi: &um * &current.psi * um.adjoint(),
            psibar: &up * &current.psibar * up.adjoint(),
        };
    }
    let records = clock_measurement(spec, &current, t + dt);
    Ok(UnitProtocolOutcome {
        records,
        pre_measurement: current,
        heat_in,
    })
}
