//! Chain mappings of a star bath.
//!
//! An orthogonal matrix `T` (columns indexed by new modes) rotates the bath
//! operators, `b_k = Σ_j T_jk a_j`, so that `Tᵀ diag(ω) T` is banded:
//! tridiagonal for the single-seed Lanczos recursion, pentadiagonal for the
//! two-seed block recursion. In the interaction picture the system then sees
//! time-dependent couplings `c_k(t) = Σ_j T_jk c_j e^{−iω_j t}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::DiscretizedBath;

/// Relative residual below which a Lanczos vector is considered lost.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// Minimum sine of the angle between block-Lanczos seeds.
pub const SEED_ANGLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingKind {
    Lanczos,
    BlockLanczos,
}

impl MappingKind {
    pub fn bandwidth(self) -> usize {
        match self {
            MappingKind::Lanczos => 1,
            MappingKind::BlockLanczos => 2,
        }
    }
}

/// Which channel(s) seed the mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MappingSeed {
    Lanczos { seed: String },
    BlockLanczos { first: String, second: String },
}

/// Band entries of `Tᵀ diag(ω) T`.
///
/// `alpha[k]` is entry `(k, k)`, `beta[k]` is `(k−1, k)` and `kappa[k]` is
/// `(k−2, k)`; entries that do not exist are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub kappa: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ChainMapping {
    kind: MappingKind,
    transform: DMatrix<f64>,
    band: Band,
    frequencies: Vec<f64>,
}

impl ChainMapping {
    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    /// The orthogonal matrix; column `k` is chain mode `k` in the star basis.
    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    pub fn band(&self) -> &Band {
        &self.band
    }

    pub fn source_frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    /// The identity mapping (no chain transform, star geometry).
    pub fn identity(frequencies: &[f64]) -> Self {
        let n = frequencies.len();
        let transform = DMatrix::identity(n, n);
        let band = band_of(&transform, frequencies);
        ChainMapping {
            kind: MappingKind::Lanczos,
            transform,
            band,
            frequencies: frequencies.to_vec(),
        }
    }

    /// `Tᵀ diag(ω) T` as a dense matrix.
    pub fn transformed_bath_matrix(&self) -> DMatrix<f64> {
        congruence(&self.transform, &self.frequencies)
    }
}

/// Builds the mapping named by `seed` from the channels of `bath`.
pub fn build_mapping(bath: &DiscretizedBath, seed: &MappingSeed) -> Result<ChainMapping> {
    match seed {
        MappingSeed::Lanczos { seed } => lanczos_map(bath.frequencies(), bath.channel(seed)?),
        MappingSeed::BlockLanczos { first, second } => block_lanczos_map(
            bath.frequencies(),
            bath.channel(first)?,
            bath.channel(second)?,
        ),
    }
}

/// Lanczos tridiagonalization of `diag(frequencies)` started from `seed`,
/// with full reorthogonalization.
pub fn lanczos_map(frequencies: &[f64], seed: &[f64]) -> Result<ChainMapping> {
    check_lengths(frequencies, &[seed])?;
    let n = frequencies.len();
    let scale = max_abs(frequencies);
    let norm = norm2(seed);
    if norm == 0.0 {
        return Err(Error::ZeroSeed);
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    basis.push(seed.iter().map(|c| c / norm).collect());
    while basis.len() < n {
        let last = basis.last().unwrap();
        let mut w: Vec<f64> = last.iter().zip(frequencies).map(|(v, w)| v * w).collect();
        orthogonalize(&mut w, &basis);
        let beta = norm2(&w);
        if beta < BREAKDOWN_TOL * scale {
            return Err(Error::Breakdown {
                step: basis.len(),
                residual: beta,
            });
        }
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(w);
    }
    Ok(finish(MappingKind::Lanczos, basis, frequencies))
}

/// Block-Lanczos reduction of `diag(frequencies)` to bandwidth 2, seeded by
/// the span of two coupling vectors. Column 0 is `seed_a` normalized,
/// column 1 the normalized part of `seed_b` orthogonal to it.
pub fn block_lanczos_map(
    frequencies: &[f64],
    seed_a: &[f64],
    seed_b: &[f64],
) -> Result<ChainMapping> {
    check_lengths(frequencies, &[seed_a, seed_b])?;
    let n = frequencies.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "block-Lanczos needs at least two bath modes".into(),
        ));
    }
    let scale = max_abs(frequencies);
    let na = norm2(seed_a);
    if na == 0.0 {
        return Err(Error::ZeroSeed);
    }
    let nb = norm2(seed_b);
    if nb == 0.0 {
        return Err(Error::DegenerateSeeds { sine: 0.0 });
    }
    let q0: Vec<f64> = seed_a.iter().map(|c| c / na).collect();
    let mut q1 = seed_b.to_vec();
    orthogonalize(&mut q1, std::slice::from_ref(&q0));
    let sine = norm2(&q1) / nb;
    if sine < SEED_ANGLE_TOL {
        return Err(Error::DegenerateSeeds { sine });
    }
    let r = norm2(&q1);
    q1.iter_mut().for_each(|x| *x /= r);

    let mut basis = vec![q0, q1];
    let mut block_start = 0;
    while basis.len() < n {
        let block_end = basis.len();
        let block_size = (n - block_end).min(2);
        for col in (block_start..block_end).take(block_size) {
            let mut w: Vec<f64> = basis[col]
                .iter()
                .zip(frequencies)
                .map(|(v, w)| v * w)
                .collect();
            orthogonalize(&mut w, &basis);
            let r = norm2(&w);
            if r < BREAKDOWN_TOL * scale {
                return Err(Error::Breakdown {
                    step: basis.len(),
                    residual: r,
                });
            }
            w.iter_mut().for_each(|x| *x /= r);
            basis.push(w);
        }
        block_start = block_end;
    }
    Ok(finish(MappingKind::BlockLanczos, basis, frequencies))
}

fn finish(kind: MappingKind, basis: Vec<Vec<f64>>, frequencies: &[f64]) -> ChainMapping {
    let n = frequencies.len();
    let transform = DMatrix::from_fn(n, n, |i, k| basis[k][i]);
    let band = band_of(&transform, frequencies);
    ChainMapping {
        kind,
        transform,
        band,
        frequencies: frequencies.to_vec(),
    }
}

fn band_of(transform: &DMatrix<f64>, frequencies: &[f64]) -> Band {
    let n = frequencies.len();
    let entry = |i: usize, k: usize| -> f64 {
        let a = transform.column(i);
        let b = transform.column(k);
        (0..n).map(|m| a[m] * frequencies[m] * b[m]).sum()
    };
    let alpha = (0..n).map(|k| entry(k, k)).collect();
    let beta = (0..n)
        .map(|k| if k >= 1 { entry(k - 1, k) } else { 0.0 })
        .collect();
    let kappa = (0..n)
        .map(|k| if k >= 2 { entry(k - 2, k) } else { 0.0 })
        .collect();
    Band { alpha, beta, kappa }
}

fn congruence(transform: &DMatrix<f64>, frequencies: &[f64]) -> DMatrix<f64> {
    let n = frequencies.len();
    let mut scaled = transform.clone();
    for (i, w) in frequencies.iter().enumerate() {
        scaled.row_mut(i).scale_mut(*w);
    }
    let out = transform.transpose() * scaled;
    debug_assert_eq!(out.nrows(), n);
    out
}

/// Two passes of classical Gram–Schmidt against every vector in `basis`.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let h: f64 = q.iter().zip(w.iter()).map(|(q, w)| q * w).sum();
            w.iter_mut().zip(q).for_each(|(w, q)| *w -= h * q);
        }
    }
}

fn check_lengths(frequencies: &[f64], seeds: &[&[f64]]) -> Result<()> {
    if frequencies.is_empty() {
        return Err(Error::InvalidParameter("no bath modes".into()));
    }
    for s in seeds {
        if s.len() != frequencies.len() {
            return Err(Error::DimensionMismatch(format!(
                "seed of length {} for {} modes",
                s.len(),
                frequencies.len()
            )));
        }
    }
    for pair in frequencies.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::InvalidParameter(
                "bath frequencies must be distinct".into(),
            ));
        }
    }
    Ok(())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Interaction-picture couplings of every bath channel in a chain basis.
#[derive(Debug, Clone)]
pub struct TimeDependentCouplings {
    mapping: Arc<ChainMapping>,
    channels: Vec<(String, Vec<f64>)>,
    /// Per channel, `T_jk c_j` stored row `j`, column `k`.
    weighted: Vec<DMatrix<f64>>,
}

impl TimeDependentCouplings {
    pub fn new(mapping: Arc<ChainMapping>, bath: &DiscretizedBath) -> Result<Self> {
        if bath.frequencies() != mapping.source_frequencies() {
            return Err(Error::DimensionMismatch(
                "mapping was built for a different set of bath frequencies".into(),
            ));
        }
        let channels: Vec<(String, Vec<f64>)> = bath
            .channels()
            .iter()
            .map(|c| (c.label.clone(), c.couplings.clone()))
            .collect();
        let weighted = channels
            .iter()
            .map(|(_, c)| {
                let mut m = mapping.transform().clone();
                for (j, cj) in c.iter().enumerate() {
                    m.row_mut(j).scale_mut(*cj);
                }
                m
            })
            .collect();
        Ok(TimeDependentCouplings {
            mapping,
            channels,
            weighted,
        })
    }

    pub fn mapping(&self) -> &ChainMapping {
        &self.mapping
    }

    pub fn channel_labels(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(l, _)| l.as_str())
    }

    pub fn source_couplings(&self, channel: &str) -> Result<&[f64]> {
        Ok(&self.channels[self.index_of(channel)?].1)
    }

    pub fn index_of(&self, channel: &str) -> Result<usize> {
        self.channels
            .iter()
            .position(|(l, _)| l == channel)
            .ok_or_else(|| Error::UnknownChannel(channel.to_string()))
    }

    /// `c_k(t) = Σ_j T_jk c_j e^{−iω_j t}` for every chain mode `k`.
    pub fn couplings_at(&self, channel: &str, t: f64) -> Result<Vec<Complex64>> {
        let idx = self.index_of(channel)?;
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite time {t}")));
        }
        Ok(self.couplings_by_index(idx, t))
    }

    pub(crate) fn couplings_by_index(&self, idx: usize, t: f64) -> Vec<Complex64> {
        let phases: Vec<Complex64> = self
            .mapping
            .source_frequencies()
            .iter()
            .map(|w| Complex64::from_polar(1.0, -w * t))
            .collect();
        let m = &self.weighted[idx];
        (0..m.ncols())
            .map(|k| {
                m.column(k)
                    .iter()
                    .zip(&phases)
                    .map(|(a, p)| p * *a)
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// `|c_k(t)|` on a time grid, one row per time.
    pub fn coupling_wave_grid(&self, channel: &str, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        if times.is_empty() {
            return Err(Error::InvalidParameter("empty time grid".into()));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::InvalidParameter(
                "time grid must be finite and ascending".into(),
            ));
        }
        let idx = self.index_of(channel)?;
        Ok(times
            .iter()
            .map(|&t| self.couplings_by_index(idx, t).iter().map(|c| c.norm()).collect())
            .collect())
    }
}

/// Smallest `k` such that `Σ_{m ≤ k} |c_m|²` reaches `fraction` of the total.
pub fn front_index(abs_values: &[f64], fraction: f64) -> usize {
    let total: f64 = abs_values.iter().map(|a| a * a).sum();
    let mut acc = 0.0;
    for (k, a) in abs_values.iter().enumerate() {
        acc += a * a;
        if acc >= fraction * total {
            return k;
        }
    }
    abs_values.len().saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::BathChannel;

    fn toy_bath(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let w: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.37 + (i as f64).sin() * 0.05).collect();
        let a: Vec<f64> = (0..n).map(|i| 0.2 + ((i * 7) % 5) as f64 * 0.1).collect();
        let b: Vec<f64> = (0..n).map(|i| 0.1 + ((i * 3) % 7) as f64 * 0.05).collect();
        (w, a, b)
    }

    fn orth_residual(t: &DMatrix<f64>) -> f64 {
        let g = t.transpose() * t;
        let n = g.nrows();
        (g - DMatrix::<f64>::identity(n, n)).amax()
    }

    fn off_band(m: &ChainMapping) -> f64 {
        let t = m.transformed_bath_matrix();
        let bw = m.kind().bandwidth();
        let mut worst = 0.0f64;
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                if i.abs_diff(j) > bw {
                    worst = worst.max(t[(i, j)].abs());
                }
            }
        }
        worst
    }

    #[test]
    fn single_mode() {
        let m = lanczos_map(&[3.5], &[0.7]).unwrap();
        assert_eq!(m.transform()[(0, 0)], 1.0);
        assert_eq!(m.band().alpha, vec![3.5]);
    }

    #[test]
    fn lanczos_is_orthogonal_and_tridiagonal() {
        let (w, a, _) = toy_bath(20);
        let m = lanczos_map(&w, &a).unwrap();
        assert!(orth_residual(m.transform()) < 1e-12);
        assert!(off_band(&m) < 1e-10);
        let na = norm2(&a);
        for i in 0..20 {
            assert!((m.transform()[(i, 0)] - a[i] / na).abs() < 1e-15);
        }
        assert!(m.band().beta[1..].iter().all(|&b| b > 0.0));
    }

    #[test]
    fn block_lanczos_banded() {
        let (w, a, b) = toy_bath(21);
        let m = block_lanczos_map(&w, &a, &b).unwrap();
        assert!(orth_residual(m.transform()) < 1e-12);
        assert!(off_band(&m) < 1e-10);
        assert!(m.band().kappa.iter().skip(2).any(|k| k.abs() > 1e-6));
    }

    #[test]
    fn errors() {
        let (w, a, _) = toy_bath(6);
        assert!(matches!(lanczos_map(&w, &[0.0; 6]), Err(Error::ZeroSeed)));
        let twice: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        assert!(matches!(
            block_lanczos_map(&w, &a, &twice),
            Err(Error::DegenerateSeeds { .. })
        ));
        // a seed with a zero entry only reaches a 5-dimensional Krylov space
        let mut holey = a.clone();
        holey[3] = 0.0;
        assert!(matches!(
            lanczos_map(&w, &holey),
            Err(Error::Breakdown { step: 5, .. })
        ));
        assert!(lanczos_map(&w[..5], &a).is_err());
    }

    #[test]
    fn self_channel_localized_at_zero() {
        let (w, a, b) = toy_bath(12);
        let bath = DiscretizedBath::from_parts(
            w.clone(),
            vec![
                BathChannel { label: "x".into(), couplings: a.clone() },
                BathChannel { label: "z".into(), couplings: b.clone() },
            ],
        )
        .unwrap();
        let m = Arc::new(lanczos_map(&w, &a).unwrap());
        let tc = TimeDependentCouplings::new(m, &bath).unwrap();
        let c = tc.couplings_at("x", 0.0).unwrap();
        assert!((c[0].re - norm2(&a)).abs() < 1e-12);
        assert!(c[1..].iter().all(|c| c.norm() < 1e-10));
        assert!(matches!(tc.couplings_at("y", 0.0), Err(Error::UnknownChannel(_))));

        let grid = tc.coupling_wave_grid("x", &[0.0]).unwrap();
        assert_eq!(front_index(&grid[0], 0.99), 0);
        assert!(tc.coupling_wave_grid("x", &[]).is_err());
        assert!(tc.coupling_wave_grid("x", &[1.0, 0.5]).is_err());
    }
}
