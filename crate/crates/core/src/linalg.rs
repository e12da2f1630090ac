//! Small dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const DENSITY_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `tr[a b]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Real part of `tr[rho h]` for Hermitian arguments.
pub fn expectation(rho: &CMatrix, h: &CMatrix) -> f64 {
    trace_product(rho, h).re
}

/// `<v| h |v>`, real part.
pub fn vector_expectation(v: &CVector, h: &CMatrix) -> f64 {
    v.dotc(&(h * v)).re
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn real_trace(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
///
/// Eigenvector phases are fixed so that the largest-modulus component of each
/// column is real and positive; this makes the basis reproducible across runs.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Result<Self> {
        let dev = hermitian_deviation(m);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let sym = (m + m.adjoint()).scale(0.5);
        let eig = sym.symmetric_eigen();
        let d = m.nrows();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let mut vectors = CMatrix::zeros(d, d);
        let mut values = Vec::with_capacity(d);
        for (col, &src) in order.iter().enumerate() {
            values.push(eig.eigenvalues[src]);
            let v = eig.eigenvectors.column(src);
            let pivot = v
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap_or(C64::new(1.0, 0.0));
            let phase = pivot.conj() / pivot.norm();
            let norm = v.norm();
            for row in 0..d {
                vectors[(row, col)] = v[row] * phase / norm;
            }
        }
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i H t)` from the cached spectral decomposition.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (col, &lambda) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lambda * t);
            for row in 0..d {
                scaled[(row, col)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t) v` in O(d²).
    pub fn apply(&self, t: f64, v: &CVector) -> CVector {
        let mut coeffs = self.vectors.ad_mul(v);
        for (k, &lambda) in self.values.iter().enumerate() {
            coeffs[k] *= C64::from_polar(1.0, -lambda * t);
        }
        &self.vectors * coeffs
    }

    pub fn column(&self, idx: usize) -> CVector {
        self.vectors.column(idx).into_owned()
    }
}

/// Checks Hermiticity, unit trace and positivity of a candidate density matrix.
pub fn validate_density(rho: &CMatrix) -> Result<()> {
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        return Err(Error::InvalidDensity("matrix is not square".into()));
    }
    let dev = hermitian_deviation(rho);
    if dev > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!(
            "not Hermitian (deviation {dev:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
    }
    let min = min_eigenvalue(rho);
    if min < -DENSITY_TOL {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let sym = (m + m.adjoint()).scale(0.5);
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
