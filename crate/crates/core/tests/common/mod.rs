//! Independent reference implementations used by the integration tests.
//! Nothing here reuses the library's propagators, block states or closed forms.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use qtm_core::engine::{run_unit_protocol, BlockState, Thermalization};
use qtm_core::spin_algebra::MachineSpec;

pub type M = DMatrix<C>;

pub fn cz(re: f64) -> C {
    C::new(re, 0.0)
}

/// Spin matrices in the `|l, m>` basis with `m` descending, built from the
/// textbook matrix elements.
pub fn spin_matrices(two_l: u32) -> (M, M, M) {
    let d = two_l as usize + 1;
    let l = two_l as f64 / 2.0;
    let m_of = |i: usize| l - i as f64;
    let mut lx = M::zeros(d, d);
    let mut ly = M::zeros(d, d);
    let mut lz = M::zeros(d, d);
    for i in 0..d {
        lz[(i, i)] = cz(m_of(i));
    }
    for i in 1..d {
        // <m+1| L+ |m> with m = m_of(i)
        let m = m_of(i);
        let a = (l * (l + 1.0) - m * (m + 1.0)).sqrt();
        lx[(i - 1, i)] = cz(0.5 * a);
        lx[(i, i - 1)] = cz(0.5 * a);
        ly[(i - 1, i)] = C::new(0.0, -0.5 * a);
        ly[(i, i - 1)] = C::new(0.0, 0.5 * a);
    }
    (lx, ly, lz)
}

/// `(H-, H+)` of the spin clock.
pub fn spin_hamiltonians(two_l: u32) -> (M, M) {
    let (_, ly, lz) = spin_matrices(two_l);
    let s = 0.5f64.sqrt();
    ((&ly - &lz).scale(s), (&ly + &lz).scale(s))
}

fn norm1(a: &M) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor series.
pub fn expm(a: &M) -> M {
    let n = a.nrows();
    let norm = norm1(a);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(0.5f64.powi(s));
    let mut result = M::identity(n, n);
    let mut term = M::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled / cz(k as f64);
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// `exp(-i h t)`.
pub fn propagate(h: &M, t: f64) -> M {
    expm(&h.map(|z| z * C::new(0.0, -t)))
}

pub fn mat_max_diff(a: &M, b: &M) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Orthonormal eigenvectors of the Hermitian generator `C = i[H-, H+]`,
/// sorted by ascending eigenvalue.
pub fn clock_basis(hm: &M, hp: &M) -> (Vec<f64>, M) {
    let c = (hm * hp - hp * hm).map(|z| z * C::new(0.0, 1.0));
    let eig = ((&c + c.adjoint()) * cz(0.5)).symmetric_eigen();
    let mut idx: Vec<usize> = (0..c.nrows()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let d = c.nrows();
    let mut v = M::zeros(d, d);
    for (col, &i) in idx.iter().enumerate() {
        v.set_column(col, &eig.eigenvectors.column(i));
    }
    (idx.iter().map(|&i| eig.eigenvalues[i]).collect(), v)
}

/// Full joint qubit-clock density matrix of size `2d`, qubit index major:
/// rows `0..d` belong to `|ψ>`, rows `d..2d` to `|ψ̄>`.
pub struct Dense {
    pub d: usize,
    pub hm: M,
    pub hp: M,
    pub h_joint: M,
    pub basis: M,
}

impl Dense {
    pub fn spin(two_l: u32) -> Self {
        let (hm, hp) = spin_hamiltonians(two_l);
        Self::new(hm, hp)
    }

    pub fn new(hm: M, hp: M) -> Self {
        let d = hm.nrows();
        let mut h_joint = M::zeros(2 * d, 2 * d);
        h_joint.view_mut((0, 0), (d, d)).copy_from(&hm);
        h_joint.view_mut((d, d), (d, d)).copy_from(&hp);
        let (_, basis) = clock_basis(&hm, &hp);
        Self { d, hm, hp, h_joint, basis }
    }

    /// `U-(t)|m>` for a 1-based label.
    pub fn orbit(&self, m: usize, t: f64) -> nalgebra::DVector<C> {
        propagate(&self.hm, t) * self.basis.column(m - 1)
    }

    pub fn clock_marginal(&self, rho: &M) -> M {
        let d = self.d;
        rho.view((0, 0), (d, d)) + rho.view((d, d), (d, d))
    }

    pub fn energy(&self, rho: &M) -> f64 {
        (&self.h_joint * rho).trace().re
    }

    /// `|ψ><ψ| ⊗ |m(t)><m(t)|`.
    pub fn pure_on_orbit(&self, m: usize, t: f64) -> M {
        let v = self.orbit(m, t);
        let clock = &v * v.adjoint();
        self.product(1.0, &clock)
    }

    /// `diag(p0, 1-p0) ⊗ clock`.
    pub fn product(&self, p0: f64, clock: &M) -> M {
        let d = self.d;
        let mut rho = M::zeros(2 * d, 2 * d);
        rho.view_mut((0, 0), (d, d)).copy_from(&clock.scale(p0));
        rho.view_mut((d, d), (d, d)).copy_from(&clock.scale(1.0 - p0));
        rho
    }

    pub fn gibbs_p0(&self, delta: f64, beta: f64) -> f64 {
        1.0 / (1.0 + (-beta * delta).exp())
    }

    /// Replaces the qubit by the Gibbs state of `tr[ρ_M H+]`.
    pub fn thermalize(&self, rho: &M, beta: f64) -> M {
        let marginal = self.clock_marginal(rho);
        let delta = (&marginal * &self.hp).trace().re;
        self.product(self.gibbs_p0(delta, beta), &marginal)
    }

    pub fn evolve(&self, rho: &M, dt: f64) -> M {
        let u = propagate(&self.h_joint, dt);
        &u * rho * u.adjoint()
    }

    /// `(probability, post state)` of every outcome of the clock measurement at `t`.
    pub fn measure(&self, rho: &M, t: f64) -> Vec<(usize, f64, M)> {
        let d = self.d;
        let mut out = Vec::new();
        for m in 1..=d {
            let v = self.orbit(m, t);
            let clock_proj = &v * v.adjoint();
            let mut proj = M::zeros(2 * d, 2 * d);
            proj.view_mut((0, 0), (d, d)).copy_from(&clock_proj);
            proj.view_mut((d, d), (d, d)).copy_from(&clock_proj);
            let post = &proj * rho * &proj;
            let p = post.trace().re;
            if p > 1e-15 {
                out.push((m, p, post / cz(p)));
            }
        }
        out
    }

    /// One unit protocol from `rho`: thermalise, evolve `dt`, measure at `t + dt`.
    pub fn unit_protocol(&self, rho: &M, t: f64, dt: f64, beta: f64) -> (M, Vec<(usize, f64, M)>) {
        let therm = self.thermalize(rho, beta);
        let pre = self.evolve(&therm, dt);
        let outs = self.measure(&pre, t + dt);
        (pre, outs)
    }

    /// Qubit flip `|ψ> <-> |ψ̄>`.
    pub fn flip(&self, rho: &M) -> M {
        let d = self.d;
        let mut x = M::zeros(2 * d, 2 * d);
        x.view_mut((0, d), (d, d)).copy_from(&M::identity(d, d));
        x.view_mut((d, 0), (d, d)).copy_from(&M::identity(d, d));
        &x * rho * &x
    }
}

/// RK4 integration of `dp1/dτ = n̄ p0 - (n̄+1) p1` for the upper level.
pub fn relax_oracle(p1: f64, n_bar: f64, tau: f64) -> f64 {
    let f = |p: f64| n_bar * (1.0 - p) - (n_bar + 1.0) * p;
    let steps = 20_000;
    let h = tau / steps as f64;
    let mut p = p1;
    for _ in 0..steps {
        let k1 = f(p);
        let k2 = f(p + 0.5 * h * k1);
        let k3 = f(p + 0.5 * h * k2);
        let k4 = f(p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    p
}

/// Largest deviation between a block state and a dense joint matrix,
/// including the qubit coherences the block form must not carry.
pub fn block_vs_dense(b: &BlockState, rho: &M) -> f64 {
    let d = b.dim();
    let psi = rho.view((0, 0), (d, d)).into_owned();
    let bar = rho.view((d, d), (d, d)).into_owned();
    let off = rho.view((0, d), (d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    mat_max_diff(&b.psi, &psi).max(mat_max_diff(&b.psibar, &bar)).max(off)
}

fn note(worst: &mut f64, err: f64, weight: f64) {
    *worst = worst.max(weight * err);
    if weight >= 1e-4 {
        *worst = worst.max(err);
    }
}

/// Walks every outcome branch for `depth` unit protocols. Deviations are
/// weighted by the probability of the path that leads to them, so that they
/// are errors in the unnormalised trajectory state `Π…ρ…Π`; a state
/// conditioned on a 1e-7 outcome amplifies round-off by 1e7 in any
/// implementation. Paths above `1e-4` are also compared unweighted.
#[allow(clippy::too_many_arguments)]
pub fn compare_tree(
    s: &MachineSpec,
    dense: &Dense,
    block: &BlockState,
    rho: &M,
    t: f64,
    dt: f64,
    beta: f64,
    depth: usize,
    path: f64,
    worst: &mut f64,
) {
    if depth == 0 {
        return;
    }
    let ours = run_unit_protocol(s, block, t, dt, beta, &Thermalization::Instant).unwrap();
    let (pre, outs) = dense.unit_protocol(rho, t, dt, beta);
    note(worst, block_vs_dense(&ours.pre_measurement, &pre), path);
    assert_eq!(ours.records.len(), outs.len());
    for (r, (m, p, post)) in ours.records.iter().zip(&outs) {
        assert_eq!(r.m, *m);
        note(worst, (r.probability - p).abs(), path);
        let de = dense.energy(&pre) - dense.energy(post);
        note(worst, (r.energy_to_apparatus - de).abs(), path * p);
        note(worst, block_vs_dense(&r.post_state, post), path * p);
        compare_tree(s, dense, &r.post_state, post, t + dt, dt, beta, depth - 1, path * p, worst);
    }
}

/// Exhaustive enumeration of all `d^N` measurement records on the dense joint
/// state: `(Σ_r P(r) E(r), -Σ_r P(r) ln P(r), Σ_r P(r) Q(r))`.
#[allow(clippy::too_many_arguments)]
pub fn enumerate_records(dense: &Dense, rho: &M, t: f64, dt: f64, beta: f64, steps: usize, prob: f64, acc: &mut (f64, f64, f64)) {
    if steps == 0 {
        acc.1 -= prob * prob.ln();
        return;
    }
    let therm = dense.thermalize(rho, beta);
    acc.2 += prob * (dense.energy(&therm) - dense.energy(rho));
    let pre = dense.evolve(&therm, dt);
    for (_, p, post) in dense.measure(&pre, t + dt) {
        acc.0 += prob * p * (dense.energy(&pre) - dense.energy(&post));
        enumerate_records(dense, &post, t + dt, dt, beta, steps - 1, prob * p, acc);
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Small deterministic generator so the oracles need no extra dependency.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.next_f64()
    }

    pub fn below(&mut self, n: u32) -> u32 {
        (self.next_f64() * n as f64) as u32 % n
    }
}
