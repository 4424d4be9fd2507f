#![allow(dead_code)]

use bathchain::chainmap::ChainMapping;
use bathchain::spectral::{DiscretizedBath, Interval, Lorentzian, SpectralDensity};
use nalgebra::{DMatrix, DVector, SymmetricTridiagonal};
use rand::Rng;

pub fn orthogonality_residual(t: &DMatrix<f64>) -> f64 {
    let n = t.ncols();
    (t.transpose() * t - DMatrix::<f64>::identity(n, n)).amax()
}

/// Largest entry of `Tᵀ diag(ω) T` outside the mapping's bandwidth, formed densely.
pub fn off_band_residual(m: &ChainMapping) -> f64 {
    let t = m.transform();
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(m.source_frequencies()));
    let a = t.transpose() * w * t;
    let bw = m.kind().bandwidth();
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i.abs_diff(j) > bw {
                worst = worst.max(a[(i, j)].abs());
            }
        }
    }
    worst
}

/// Householder tridiagonalization of `diag(ω)` in a basis whose first vector is `q0`.
///
/// Returns the diagonal and the absolute first off-diagonal.
pub fn householder_tridiagonal(frequencies: &[f64], q0: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = frequencies.len();
    let norm = q0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v = DVector::from_iterator(n, q0.iter().map(|x| -x / norm));
    v[0] += 1.0;
    let vv = v.dot(&v);
    let mut h = DMatrix::<f64>::identity(n, n);
    if vv > 1e-30 {
        h -= (&v * v.transpose()) * (2.0 / vv);
    }
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(frequencies));
    let a = &h * w * &h;
    let tri = SymmetricTridiagonal::new(a);
    let diag = tri.diagonal().iter().copied().collect();
    let off = tri.off_diagonal().iter().map(|x| x.abs()).collect();
    (diag, off)
}

pub fn random_bath<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..50.0)).collect();
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 1..n {
        if w[i] <= w[i - 1] + 1e-3 {
            w[i] = w[i - 1] + 1e-3;
        }
    }
    let a = (0..n).map(|_| rng.gen_range(0.01..2.0)).collect();
    let b = (0..n).map(|_| rng.gen_range(0.01..2.0)).collect();
    (w, a, b)
}

pub fn fig2_bath(modes: usize) -> DiscretizedBath {
    let support = Interval::new(0.0, 20.0).unwrap();
    let jz = SpectralDensity::lorentzian_sum(
        [2.0, 5.0, 10.0]
            .iter()
            .map(|&center| Lorentzian {
                center,
                width: 1.5,
                strength: 1.0,
            })
            .collect(),
        support,
    )
    .unwrap();
    let jx = SpectralDensity::ohmic_exponential(2.0, 5.0, support).unwrap();
    bathchain::spectral::discretize_shared(&[("z", &jz), ("x", &jx)], modes, support).unwrap()
}

/// Checks that the 99% front is nondecreasing up to `jitter`, until it reaches the chain end.
/// The end counts as reached within the last 2.5% of the chain, where the wave reflects.
/// Returns the first violation as `(time index, running max, front)`.
pub fn front_violation(fronts: &[usize], modes: usize, jitter: usize) -> Option<(usize, usize, usize)> {
    let margin = jitter.max(modes / 40);
    let mut running = 0;
    for (i, &k) in fronts.iter().enumerate() {
        if running + 1 + margin >= modes {
            break;
        }
        if k + jitter < running {
            return Some((i, running, k));
        }
        running = running.max(k);
    }
    None
}
