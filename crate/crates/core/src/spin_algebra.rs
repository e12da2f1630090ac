//! Machine construction: angular-momentum operators, the SU(2) spin clock,
//! propagators, Wigner small-d blocks and the clock design conditions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    c, commutator, expectation, hermitian_deviation, projector, validate_density, vector_expectation,
    CMatrix, CVector, HermitianEigen, HERMITIAN_TOL,
};

/// Tolerance below which conditions (i) and (ii) count as satisfied.
pub const DESIGN_TOL: f64 = 1e-9;

/// A spin quantum number `l`, stored as the integer `2l`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    two_l: u32,
}

impl Spin {
    pub fn from_twice(two_l: u32) -> Result<Self> {
        if two_l == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Self { two_l })
    }

    /// Accepts `l` as a float; it must be a positive multiple of one half.
    pub fn new(l: f64) -> Result<Self> {
        let twice = 2.0 * l;
        if !twice.is_finite() || twice < 0.5 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidSpin(l));
        }
        Self::from_twice(twice.round() as u32)
    }

    pub fn twice(self) -> u32 {
        self.two_l
    }

    pub fn value(self) -> f64 {
        self.two_l as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.two_l as usize + 1
    }

    /// Magnetic quantum numbers `2m` in descending order, `2l, 2l-2, ..., -2l`.
    pub fn twice_m_descending(self) -> impl Iterator<Item = i64> {
        let two_l = self.two_l as i64;
        (0..=self.two_l as i64).map(move |i| two_l - 2 * i)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_l.is_multiple_of(2) {
            write!(f, "{}", self.two_l / 2)
        } else {
            write!(f, "{}/2", self.two_l)
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Spin-`l` angular momentum component in the `|l, m_z>` basis ordered
/// `m_z = l, l-1, ..., -l`.
pub fn angular_momentum(spin: Spin, axis: Axis) -> CMatrix {
    let d = spin.dim();
    let l = spin.value();
    let ms: Vec<f64> = spin.twice_m_descending().map(|tm| tm as f64 / 2.0).collect();
    let mut out = CMatrix::zeros(d, d);
    match axis {
        Axis::Z => {
            for (i, &m) in ms.iter().enumerate() {
                out[(i, i)] = c(m, 0.0);
            }
        }
        Axis::X | Axis::Y => {
            // L+ |m> = sqrt(l(l+1) - m(m+1)) |m+1>; index i-1 holds m+1.
            for i in 1..d {
                let m = ms[i];
                let amp = (l * (l + 1.0) - m * (m + 1.0)).max(0.0).sqrt();
                let (upper, lower) = match axis {
                    Axis::X => (c(0.5 * amp, 0.0), c(0.5 * amp, 0.0)),
                    _ => (c(0.0, -0.5 * amp), c(0.0, 0.5 * amp)),
                };
                out[(i - 1, i)] = upper;
                out[(i, i - 1)] = lower;
            }
        }
    }
    out
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Evolution conditioned on the qubit's `|psi>` state.
    Minus,
    /// Evolution conditioned on `|psi_bar>`.
    Plus,
}

/// The hardware of the machine: the two conditional clock Hamiltonians, the
/// generator `C = i[H-, H+]` and cached spectral data.
#[derive(Clone, Debug)]
pub struct MachineSpec {
    spin: Option<Spin>,
    h_minus: CMatrix,
    h_plus: CMatrix,
    h_interaction: CMatrix,
    h_free: CMatrix,
    generator: CMatrix,
    c_basis: HermitianEigen,
    eig_minus: HermitianEigen,
    eig_plus: HermitianEigen,
}

impl MachineSpec {
    /// Builds a machine from arbitrary Hermitian `H-` and `H+`.
    pub fn from_hamiltonians(h_minus: CMatrix, h_plus: CMatrix) -> Result<Self> {
        Self::assemble(None, h_minus, h_plus)
    }

    /// The spin-`l` clock with `H± = (L_y ± L_z)/√2`.
    pub fn spin(spin: Spin) -> Self {
        let ly = angular_momentum(spin, Axis::Y);
        let lz = angular_momentum(spin, Axis::Z);
        let h_minus = (&ly - &lz).scale(FRAC_1_SQRT_2);
        let h_plus = (&ly + &lz).scale(FRAC_1_SQRT_2);
        Self::assemble(Some(spin), h_minus, h_plus).expect("spin generators are Hermitian")
    }

    fn assemble(spin: Option<Spin>, h_minus: CMatrix, h_plus: CMatrix) -> Result<Self> {
        let d = h_minus.nrows();
        if h_minus.ncols() != d || d == 0 {
            return Err(Error::Dimension { expected: d, got: h_minus.ncols() });
        }
        if h_plus.nrows() != d || h_plus.ncols() != d {
            return Err(Error::Dimension { expected: d, got: h_plus.nrows() });
        }
        for h in [&h_minus, &h_plus] {
            let dev = hermitian_deviation(h);
            if dev > HERMITIAN_TOL {
                return Err(Error::NotHermitian { deviation: dev });
            }
        }
        let generator = commutator(&h_minus, &h_plus) * c(0.0, 1.0);
        let h_interaction = (&h_plus - &h_minus).scale(0.5);
        let h_free = (&h_plus + &h_minus).scale(0.5);
        let c_basis = HermitianEigen::new(&generator)?;
        let eig_minus = HermitianEigen::new(&h_minus)?;
        let eig_plus = HermitianEigen::new(&h_plus)?;
        Ok(Self {
            spin,
            h_minus,
            h_plus,
            h_interaction,
            h_free,
            generator,
            c_basis,
            eig_minus,
            eig_plus,
        })
    }

    pub fn dim(&self) -> usize {
        self.h_minus.nrows()
    }

    /// Spin quantum number for spin clocks, `(d-1)/2` nominally otherwise.
    pub fn l(&self) -> f64 {
        self.spin.map(Spin::value).unwrap_or((self.dim() as f64 - 1.0) / 2.0)
    }

    pub fn spin_number(&self) -> Option<Spin> {
        self.spin
    }

    pub fn h_minus(&self) -> &CMatrix {
        &self.h_minus
    }

    pub fn h_plus(&self) -> &CMatrix {
        &self.h_plus
    }

    pub fn h_interaction(&self) -> &CMatrix {
        &self.h_interaction
    }

    pub fn h_free(&self) -> &CMatrix {
        &self.h_free
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn hamiltonian(&self, branch: Branch) -> &CMatrix {
        match branch {
            Branch::Minus => &self.h_minus,
            Branch::Plus => &self.h_plus,
        }
    }

    pub fn eigen(&self, branch: Branch) -> &HermitianEigen {
        match branch {
            Branch::Minus => &self.eig_minus,
            Branch::Plus => &self.eig_plus,
        }
    }

    /// Eigenbasis of `C`, ascending; column `m-1` is the label `|m>`.
    pub fn c_basis(&self) -> &HermitianEigen {
        &self.c_basis
    }

    /// Clock period; the orbits of `U-` close after `2π` in the spin units used here.
    pub fn period(&self) -> f64 {
        2.0 * PI
    }

    /// Label of the reference orbit, i.e. `d`.
    pub fn reference_label(&self) -> usize {
        self.dim()
    }

    pub fn max_coherence(&self) -> f64 {
        *self.c_basis.values.last().expect("non-empty spectrum")
    }

    /// `U±(t) = exp(-i H± t)`.
    pub fn propagator(&self, branch: Branch, t: f64) -> CMatrix {
        self.eigen(branch).propagator(t)
    }

    /// `|m(t)> = U-(t)|m>` for a 1-based orbit label.
    pub fn clock_basis_state(&self, m: usize, t: f64) -> Result<CVector> {
        self.check_label(m)?;
        Ok(self.eig_minus.apply(t, &self.c_basis.column(m - 1)))
    }

    /// All rotated basis vectors as the columns of one matrix.
    pub fn rotated_basis(&self, t: f64) -> CMatrix {
        self.propagator(Branch::Minus, t) * &self.c_basis.vectors
    }

    /// `χ(t) = |d(t)><d(t)|`, the reference clock state.
    pub fn reference_state(&self, t: f64) -> CMatrix {
        projector(&self.clock_basis_state(self.dim(), t).expect("d is a valid label"))
    }

    pub fn orbit_state(&self, m: usize, t: f64) -> Result<CMatrix> {
        Ok(projector(&self.clock_basis_state(m, t)?))
    }

    /// `<m(t)|H+|m(t)>` for every orbit, indexed by label-1.
    pub fn orbit_splittings(&self, t: f64) -> Vec<f64> {
        let basis = self.rotated_basis(t);
        (0..self.dim())
            .map(|k| vector_expectation(&basis.column(k).into_owned(), &self.h_plus))
            .collect()
    }

    pub(crate) fn check_label(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.dim() {
            return Err(Error::OrbitIndex { index: m, dim: self.dim() });
        }
        Ok(())
    }
}

/// Real orthogonal matrix `d^l_{m'm}(β)`, indexed in descending `m` order.
#[derive(Clone, Debug)]
pub struct WignerBlock {
    pub spin: Spin,
    pub beta_angle: f64,
    pub entries: DMatrix<f64>,
}

impl WignerBlock {
    /// Element `d_{m'm}` addressed by `2m'` and `2m`.
    pub fn element(&self, two_mp: i64, two_m: i64) -> f64 {
        let idx = |tm: i64| ((self.spin.twice() as i64 - tm) / 2) as usize;
        self.entries[(idx(two_mp), idx(two_m))]
    }
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Wigner small-d matrix from the factorial sum
/// `sqrt((l+m)!(l-m)!/((l+m')!(l-m')!)) Σ_s C(l+m', l+m-s) C(l-m', s) (-1)^(m'-m+s)
///  cos^(2l+m-m'-2s)(β/2) sin^(m'-m+2s)(β/2)`,
/// with binomial coefficients in log space.
pub fn wigner_small_d(spin: Spin, beta_angle: f64) -> WignerBlock {
    let d = spin.dim();
    let two_l = spin.twice() as i64;
    let lf = log_factorials(two_l as usize);
    let ln_binom = |n: i64, k: i64| lf[n as usize] - lf[k as usize] - lf[(n - k) as usize];
    let (sin_h, cos_h) = (0.5 * beta_angle).sin_cos();
    let twice_ms: Vec<i64> = spin.twice_m_descending().collect();

    let mut entries = DMatrix::<f64>::zeros(d, d);
    for (row, &two_mp) in twice_ms.iter().enumerate() {
        for (col, &two_m) in twice_ms.iter().enumerate() {
            let lpm = (two_l + two_m) / 2;
            let lmm = (two_l - two_m) / 2;
            let lpmp = (two_l + two_mp) / 2;
            let lmmp = (two_l - two_mp) / 2;
            let diff = (two_mp - two_m) / 2;
            let ln_pref = 0.5 * ((lf[lpm as usize] - lf[lpmp as usize]) + (lf[lmm as usize] - lf[lmmp as usize]));

            let s_lo = 0.max(-diff);
            let s_hi = lpm.min(lmmp);
            let mut sum = 0.0;
            for s in s_lo..=s_hi {
                let cos_pow = two_l - diff - 2 * s;
                let sin_pow = diff + 2 * s;
                let mag = (ln_pref + ln_binom(lpmp, lpm - s) + ln_binom(lmmp, s)).exp();
                let sign = if (diff + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                sum += sign * mag * int_pow(cos_h, cos_pow) * int_pow(sin_h, sin_pow);
            }
            entries[(row, col)] = sum;
        }
    }
    WignerBlock { spin, beta_angle, entries }
}

fn int_pow(x: f64, n: i64) -> f64 {
    if n == 0 {
        1.0
    } else {
        x.powi(n as i32)
    }
}

/// Values of the three design conditions for a given initial clock state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignReport {
    /// `tr[ρ H_I]`, condition (i).
    pub interaction_energy: f64,
    /// `tr[ρ H-]`, condition (ii).
    pub ground_energy: f64,
    /// `tr[ρ C] / λ_max(C)`; condition (iii) asks for this to be large.
    pub coherence_score: f64,
    pub degenerate_ok: bool,
    pub ground_ok: bool,
}

pub fn verify_design_conditions(spec: &MachineSpec, rho: &CMatrix) -> Result<DesignReport> {
    if rho.nrows() != spec.dim() {
        return Err(Error::Dimension { expected: spec.dim(), got: rho.nrows() });
    }
    validate_density(rho)?;
    let interaction_energy = expectation(rho, spec.h_interaction());
    let ground_energy = expectation(rho, spec.h_minus());
    let cmax = spec.max_coherence();
    let coherence_score = if cmax.abs() > 0.0 {
        expectation(rho, spec.generator()) / cmax
    } else {
        0.0
    };
    Ok(DesignReport {
        interaction_energy,
        ground_energy,
        coherence_score,
        degenerate_ok: interaction_energy.abs() < DESIGN_TOL,
        ground_ok: ground_energy.abs() < DESIGN_TOL,
    })
}
