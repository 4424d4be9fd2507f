//! Small dense operators: Pauli matrices, truncated ladder operators and
//! Kronecker products.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `|i⟩⟨j|` in dimension `dim`.
pub fn projector(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

/// Boson annihilation operator truncated to `dim` Fock levels.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    m
}

pub fn number(dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = Complex64::new(n as f64, 0.0);
    }
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Embeds `op` acting on site `site` into the product space with the given
/// local dimensions (site 0 is the most significant index).
pub fn embed(op: &CMatrix, site: usize, dims: &[usize]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for (s, &d) in dims.iter().enumerate() {
        let factor = if s == site {
            op.clone()
        } else {
            CMatrix::identity(d, d)
        };
        out = kron(&out, &factor);
    }
    out
}

/// Largest entry of `m − m†`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

pub fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| *z == ZERO)
}
