use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ops::CMatrix;

pub(crate) fn from_row_major(rows: usize, cols: usize, data: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, data)
}

pub(crate) fn row_major(m: &CMatrix) -> Vec<Complex64> {
    m.transpose().as_slice().to_vec()
}

pub(crate) struct Svd {
    pub u: CMatrix,
    pub values: Vec<f64>,
    pub vt: CMatrix,
}

impl Svd {
    /// `diag(s[..k]) · vt[..k, :] · factor`
    pub fn scaled_vt(&self, k: usize, factor: f64) -> CMatrix {
        let mut m = self.vt.rows(0, k).into_owned();
        for i in 0..k {
            m.row_mut(i).scale_mut(self.values[i] * factor);
        }
        m
    }

    /// `u[:, ..k] · diag(s[..k]) · factor`
    pub fn scaled_u(&self, k: usize, factor: f64) -> CMatrix {
        let mut m = self.u.columns(0, k).into_owned();
        for i in 0..k {
            m.column_mut(i).scale_mut(self.values[i] * factor);
        }
        m
    }
}

/// Thin SVD with singular values in descending order.
pub(crate) fn svd_sorted(m: CMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(svd_failure(rows, cols, "non-finite input"));
    }
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| svd_failure(rows, cols, "missing U"))?;
    let vt = svd.v_t.ok_or_else(|| svd_failure(rows, cols, "missing V"))?;
    let s = svd.singular_values;
    if s.iter().any(|x| !x.is_finite()) {
        return Err(svd_failure(rows, cols, "did not converge"));
    }
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    if order.iter().enumerate().all(|(i, &j)| i == j) {
        return Ok(Svd {
            u,
            values: s.iter().copied().collect(),
            vt,
        });
    }
    let u_sorted = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt_sorted = CMatrix::from_fn(order.len(), vt.ncols(), |r, c| vt[(order[r], c)]);
    Ok(Svd {
        u: u_sorted,
        values: order.iter().map(|&i| s[i]).collect(),
        vt: vt_sorted,
    })
}

fn svd_failure(rows: usize, cols: usize, what: &str) -> Error {
    Error::NumericalFailure {
        step: 0,
        time: 0.0,
        detail: format!("SVD of {rows}x{cols} matrix failed: {what}"),
    }
}

/// Outcome of choosing how many singular values to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub kept: usize,
    /// Discarded weight relative to the total weight of the spectrum.
    pub discarded: f64,
    /// Sum of kept squared singular values (unnormalized).
    pub kept_weight: f64,
}

impl Truncation {
    pub(crate) fn kept_norm(&self) -> f64 {
        if self.kept_weight > 0.0 {
            self.kept_weight.sqrt()
        } else {
            1.0
        }
    }
}

/// Keeps the smallest rank whose discarded tail weight is at most
/// `cutoff · Σλ²`, then caps it at `max_bond`. `values` must be sorted in
/// descending order. At least one value is always kept.
pub fn truncation_rank(values: &[f64], cutoff: f64, max_bond: usize) -> Truncation {
    let weights: Vec<f64> = values.iter().map(|s| s * s).collect();
    let total: f64 = weights.iter().sum();
    let mut keep = weights.len().max(1);
    let mut tail = 0.0;
    while keep > 1 && tail + weights[keep - 1] <= cutoff * total {
        tail += weights[keep - 1];
        keep -= 1;
    }
    keep = keep.min(max_bond.max(1)).min(weights.len().max(1));
    let kept_weight: f64 = weights.iter().take(keep).sum();
    let discarded = if total > 0.0 {
        ((total - kept_weight) / total).max(0.0)
    } else {
        0.0
    };
    Truncation {
        kept: keep,
        discarded,
        kept_weight,
    }
}

/// `−Σ p ln p` over strictly positive weights.
pub fn entropy_of(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}
