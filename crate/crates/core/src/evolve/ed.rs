//! Dense Schrödinger-picture reference propagator in the star basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::model::OpenSystemModel;

/// Largest Hilbert-space dimension accepted by [`ed_reference`].
pub const ED_DIMENSION_CAP: usize = 1 << 14;

/// Propagates `|system_state⟩ ⊗ |vacuum⟩` under the full star Hamiltonian
/// (no chain mapping, no interaction picture) by diagonalizing it once.
/// Records system populations at every time in `times` (internal units).
pub fn ed_reference(
    model: &OpenSystemModel,
    times: &[f64],
    d_bath: usize,
    system_state: usize,
) -> Result<Trajectory> {
    let sys = model.system_dim();
    let modes = model.bath().modes();
    if system_state >= sys {
        return Err(Error::InvalidParameter(format!(
            "initial system state {system_state} out of range"
        )));
    }
    if d_bath < 1 {
        return Err(Error::InvalidParameter("d_bath must be >= 1".into()));
    }
    let bath_dim = (0..modes).try_fold(1usize, |acc, _| acc.checked_mul(d_bath));
    let dim = bath_dim
        .and_then(|b| b.checked_mul(sys))
        .filter(|&d| d <= ED_DIMENSION_CAP)
        .ok_or(Error::DimensionCap {
            dim: bath_dim.map(|b| b.saturating_mul(sys)).unwrap_or(usize::MAX),
            cap: ED_DIMENSION_CAP,
        })?;
    let bath_dim = dim / sys;

    let real = model.system_hamiltonian().iter().all(|z| z.im == 0.0)
        && model
            .channels()
            .iter()
            .all(|c| c.operator.iter().all(|z| z.im == 0.0));
    let h = star_hamiltonian(model, d_bath, bath_dim);
    let start = system_state * bath_dim;

    let mut traj = Trajectory::default();
    if real {
        let eig = h.map(|z| z.re).symmetric_eigen();
        let v = eig.eigenvectors;
        let coeff: DVector<f64> = v.row(start).transpose();
        for &t in times {
            let c: DVector<f64> = coeff.zip_map(&eig.eigenvalues, |a, e| a * (e * t).cos());
            let s: DVector<f64> = coeff.zip_map(&eig.eigenvalues, |a, e| a * (e * t).sin());
            let re = &v * c;
            let im = &v * s;
            let pops = (0..sys)
                .map(|k| {
                    (k * bath_dim..(k + 1) * bath_dim)
                        .map(|i| re[i] * re[i] + im[i] * im[i])
                        .sum()
                })
                .collect();
            push(&mut traj, t, pops);
        }
    } else {
        let eig = h.symmetric_eigen();
        let v = eig.eigenvectors;
        let coeff: Vec<Complex64> = (0..dim).map(|j| v[(start, j)].conj()).collect();
        for &t in times {
            let phased = DVector::from_iterator(
                dim,
                coeff
                    .iter()
                    .zip(eig.eigenvalues.iter())
                    .map(|(a, e)| a * Complex64::from_polar(1.0, -e * t)),
            );
            let psi = &v * phased;
            let pops = (0..sys)
                .map(|k| {
                    (k * bath_dim..(k + 1) * bath_dim)
                        .map(|i| psi[i].norm_sqr())
                        .sum()
                })
                .collect();
            push(&mut traj, t, pops);
        }
    }
    Ok(traj)
}

fn push(traj: &mut Trajectory, t: f64, pops: Vec<f64>) {
    traj.times.push(t);
    traj.populations.push(pops);
    traj.discarded_weight.push(0.0);
}

/// `H_sys + Σ_c A_c ⊗ Σ_j c_j (a_j + a_j†) + Σ_j ω_j n_j` with the system
/// index most significant and mode 0 next.
fn star_hamiltonian(model: &OpenSystemModel, d: usize, bath_dim: usize) -> DMatrix<Complex64> {
    let sys = model.system_dim();
    let modes = model.bath().modes();
    let dim = sys * bath_dim;
    let w = model.bath().frequencies();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    // stride of mode j inside the bath index
    let strides: Vec<usize> = (0..modes).map(|j| d.pow((modes - 1 - j) as u32)).collect();
    let couplings: Vec<(&crate::ops::CMatrix, &[f64])> = model
        .channels()
        .iter()
        .map(|c| (&c.operator, model.couplings(&c.label).expect("validated channel")))
        .collect();

    for b in 0..bath_dim {
        let occ: Vec<usize> = strides.iter().map(|s| (b / s) % d).collect();
        let energy: f64 = occ.iter().zip(w).map(|(&n, w)| n as f64 * w).sum();
        for s in 0..sys {
            h[(s * bath_dim + b, s * bath_dim + b)] += Complex64::new(energy, 0.0);
            for sp in 0..sys {
                let v = model.system_hamiltonian()[(sp, s)];
                if v != Complex64::new(0.0, 0.0) {
                    h[(sp * bath_dim + b, s * bath_dim + b)] += v;
                }
            }
        }
        for (j, &n) in occ.iter().enumerate() {
            if n + 1 >= d {
                continue;
            }
            // raising a_j†: b -> b + stride, amplitude sqrt(n+1)
            let up = b + strides[j];
            let amp = ((n + 1) as f64).sqrt();
            for (op, c) in &couplings {
                let g = c[j] * amp;
                if g == 0.0 {
                    continue;
                }
                for s in 0..sys {
                    for sp in 0..sys {
                        let a = op[(sp, s)];
                        if a == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        h[(sp * bath_dim + up, s * bath_dim + b)] += a * g;
                        h[(s * bath_dim + b, sp * bath_dim + up)] += a.conj() * g;
                    }
                }
            }
        }
    }
    h
}
