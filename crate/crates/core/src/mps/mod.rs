//! Matrix-product states.
//!
//! Site 0 holds the system, sites `1..` the chain modes in order. Every site
//! tensor is stored as `(left bond, physical, right bond)` in row-major order,
//! so it can be read without copies either as a `(left·phys) × right` or as a
//! `left × (phys·right)` matrix.
//!
//! The state keeps track of its orthogonality center: tensors left of it are
//! left-isometries, tensors right of it right-isometries. Bond `b` sits
//! between sites `b` and `b + 1`.

mod checkpoint;
mod linalg;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use linalg::{entropy_of, truncation_rank, Truncation};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ops::CMatrix;
use linalg::{from_row_major, row_major, svd_sorted};

/// Largest dense dimension handled by [`MpsState::to_dense`] and
/// [`MpsState::from_dense`].
pub const DENSE_CAP: usize = 1 << 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<Complex64>,
}

impl SiteTensor {
    pub fn new(left: usize, phys: usize, right: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != left * phys * right || left == 0 || phys == 0 || right == 0 {
            return Err(Error::DimensionMismatch(format!(
                "site tensor {left}x{phys}x{right} with {} entries",
                data.len()
            )));
        }
        Ok(SiteTensor {
            left,
            phys,
            right,
            data,
        })
    }

    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        SiteTensor {
            left,
            phys,
            right,
            data: vec![ZERO; left * phys * right],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.left, self.phys, self.right)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, l: usize, s: usize, r: usize) -> Complex64 {
        self.data[(l * self.phys + s) * self.right + r]
    }

    fn left_matrix(&self) -> CMatrix {
        from_row_major(self.left * self.phys, self.right, &self.data)
    }

    fn right_matrix(&self) -> CMatrix {
        from_row_major(self.left, self.phys * self.right, &self.data)
    }

    fn from_left_matrix(m: &CMatrix, left: usize, phys: usize) -> Self {
        debug_assert_eq!(m.nrows(), left * phys);
        SiteTensor {
            left,
            phys,
            right: m.ncols(),
            data: row_major(m),
        }
    }

    fn from_right_matrix(m: &CMatrix, phys: usize, right: usize) -> Self {
        debug_assert_eq!(m.ncols(), phys * right);
        SiteTensor {
            left: m.nrows(),
            phys,
            right,
            data: row_major(m),
        }
    }

    /// Physical slice `s` as a `left × right` matrix.
    fn slice(&self, s: usize) -> CMatrix {
        CMatrix::from_fn(self.left, self.right, |l, r| self.get(l, s, r))
    }

    fn has_non_finite(&self) -> bool {
        self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
    }
}

/// Which way the orthogonality center moves after a two-site update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Right,
    Left,
}

#[derive(Debug, Clone)]
pub struct MpsState {
    tensors: Vec<SiteTensor>,
    center: usize,
    discarded: f64,
}

impl MpsState {
    /// Wraps raw tensors. The result is brought into canonical form with
    /// its center at site 0; the norm is left untouched.
    pub fn from_tensors(tensors: Vec<SiteTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::DimensionMismatch("empty MPS".into()));
        }
        if tensors[0].left != 1 || tensors.last().unwrap().right != 1 {
            return Err(Error::DimensionMismatch(
                "outer bonds of an MPS must have dimension 1".into(),
            ));
        }
        for (i, pair) in tensors.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::DimensionMismatch(format!(
                    "bond {i}: {} vs {}",
                    pair[0].right, pair[1].left
                )));
            }
        }
        let mut state = MpsState {
            tensors,
            center: 0,
            discarded: 0.0,
        };
        state.canonicalize(0)?;
        Ok(state)
    }

    /// Product of basis states `|occupations[i]⟩` on sites with `local_dims`.
    pub fn product_state(local_dims: &[usize], occupations: &[usize]) -> Result<Self> {
        if local_dims.len() != occupations.len() || local_dims.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} local dimensions for {} occupations",
                local_dims.len(),
                occupations.len()
            )));
        }
        let mut tensors = Vec::with_capacity(local_dims.len());
        for (i, (&d, &n)) in local_dims.iter().zip(occupations).enumerate() {
            if d == 0 || n >= d {
                return Err(Error::InvalidParameter(format!(
                    "site {i}: occupation {n} out of range for dimension {d}"
                )));
            }
            let mut t = SiteTensor::zeros(1, d, 1);
            t.data[n] = Complex64::new(1.0, 0.0);
            tensors.push(t);
        }
        Ok(MpsState {
            tensors,
            center: 0,
            discarded: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.phys).collect()
    }

    /// Dimension of bond `b`, between sites `b` and `b + 1`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.right).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Cumulative discarded weight of all truncations so far.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded
    }

    /// Brings the state into mixed-canonical form around `center` by QR
    /// sweeps from both ends. The state vector is unchanged.
    pub fn canonicalize(&mut self, center: usize) -> Result<()> {
        self.check_site(center)?;
        for i in 0..center {
            self.left_orthogonalize(i);
        }
        for i in (center + 1..self.len()).rev() {
            self.right_orthogonalize(i);
        }
        self.center = center;
        Ok(())
    }

    /// Moves the center assuming the state is already canonical.
    pub fn move_center(&mut self, to: usize) -> Result<()> {
        self.check_site(to)?;
        while self.center < to {
            self.left_orthogonalize(self.center);
            self.center += 1;
        }
        while self.center > to {
            self.right_orthogonalize(self.center);
            self.center -= 1;
        }
        Ok(())
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "site {site} out of range for {} sites",
                self.len()
            )));
        }
        Ok(())
    }

    fn check_bond(&self, bond: usize) -> Result<()> {
        if bond + 1 >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "bond {bond} out of range for {} sites",
                self.len()
            )));
        }
        Ok(())
    }

    fn left_orthogonalize(&mut self, i: usize) {
        let t = &self.tensors[i];
        let (left, phys) = (t.left, t.phys);
        let qr = t.left_matrix().qr();
        let (q, r) = (qr.q(), qr.r());
        self.tensors[i] = SiteTensor::from_left_matrix(&q, left, phys);
        if i + 1 < self.len() {
            let next = &self.tensors[i + 1];
            let (p, rr) = (next.phys, next.right);
            let m = r * next.right_matrix();
            self.tensors[i + 1] = SiteTensor::from_right_matrix(&m, p, rr);
        }
    }

    fn right_orthogonalize(&mut self, i: usize) {
        let t = &self.tensors[i];
        let (phys, right) = (t.phys, t.right);
        let qr = t.right_matrix().adjoint().qr();
        let (q, r) = (qr.q(), qr.r());
        self.tensors[i] = SiteTensor::from_right_matrix(&q.adjoint(), phys, right);
        if i > 0 {
            let prev = &self.tensors[i - 1];
            let (l, p) = (prev.left, prev.phys);
            let m = prev.left_matrix() * r.adjoint();
            self.tensors[i - 1] = SiteTensor::from_left_matrix(&m, l, p);
        }
    }

    /// Largest deviation from the isometry conditions implied by the
    /// current center.
    pub fn isometry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, t) in self.tensors.iter().enumerate() {
            let g = if i < self.center {
                let m = t.left_matrix();
                m.adjoint() * m
            } else if i > self.center {
                let m = t.right_matrix();
                &m * m.adjoint()
            } else {
                continue;
            };
            let n = g.nrows();
            let dev = (g - CMatrix::identity(n, n))
                .iter()
                .fold(0.0f64, |a, z| a.max(z.norm()));
            worst = worst.max(dev);
        }
        worst
    }

    /// `⟨ψ|ψ⟩`, computed from the center tensor.
    pub fn norm_squared(&self) -> f64 {
        self.tensors[self.center]
            .data
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Rescales the center tensor to unit norm.
    pub fn normalize(&mut self) {
        let n = self.norm_squared().sqrt();
        if n > 0.0 {
            self.tensors[self.center]
                .data
                .iter_mut()
                .for_each(|z| *z /= n);
        }
    }

    /// SVD-truncates `bond`; the center must sit on one of its two sites
    /// and moves to the other one. Singular values are dropped from the
    /// tail while their summed weight stays within `cutoff` of the total,
    /// and beyond `max_bond`. The kept spectrum is renormalized and the
    /// dropped relative weight added to the discarded-weight counter.
    pub fn truncate_bond(&mut self, bond: usize, cutoff: f64, max_bond: usize) -> Result<Truncation> {
        self.check_bond(bond)?;
        if self.center == bond {
            let t = &self.tensors[bond];
            let (l, p) = (t.left, t.phys);
            let svd = svd_sorted(t.left_matrix())?;
            let tr = truncation_rank(&svd.values, cutoff, max_bond);
            let k = tr.kept;
            let u = svd.u.columns(0, k).into_owned();
            let sv = svd.scaled_vt(k, 1.0 / tr.kept_norm());
            self.tensors[bond] = SiteTensor::from_left_matrix(&u, l, p);
            let next = &self.tensors[bond + 1];
            let (np, nr) = (next.phys, next.right);
            let m = sv * next.right_matrix();
            self.tensors[bond + 1] = SiteTensor::from_right_matrix(&m, np, nr);
            self.center = bond + 1;
            self.discarded += tr.discarded;
            Ok(tr)
        } else if self.center == bond + 1 {
            let t = &self.tensors[bond + 1];
            let (p, r) = (t.phys, t.right);
            let svd = svd_sorted(t.right_matrix())?;
            let tr = truncation_rank(&svd.values, cutoff, max_bond);
            let k = tr.kept;
            let vt = svd.vt.rows(0, k).into_owned();
            let us = svd.scaled_u(k, 1.0 / tr.kept_norm());
            self.tensors[bond + 1] = SiteTensor::from_right_matrix(&vt, p, r);
            let prev = &self.tensors[bond];
            let (pl, pp) = (prev.left, prev.phys);
            let m = prev.left_matrix() * us;
            self.tensors[bond] = SiteTensor::from_left_matrix(&m, pl, pp);
            self.center = bond;
            self.discarded += tr.discarded;
            Ok(tr)
        } else {
            Err(Error::InvalidParameter(format!(
                "truncating bond {bond} needs the center on site {bond} or {}, it is on {}",
                bond + 1,
                self.center
            )))
        }
    }

    /// Normalized squared singular values (Schmidt weights) across `bond`.
    /// Moves the center to `bond`.
    pub fn schmidt_weights(&mut self, bond: usize) -> Result<Vec<f64>> {
        self.check_bond(bond)?;
        self.move_center(bond)?;
        let svd = svd_sorted(self.tensors[bond].left_matrix())?;
        let total: f64 = svd.values.iter().map(|s| s * s).sum();
        Ok(svd.values.iter().map(|s| s * s / total).collect())
    }

    /// Von Neumann entropy (natural log) across `bond`. Moves the center.
    pub fn bond_entropy(&mut self, bond: usize) -> Result<f64> {
        Ok(entropy_of(&self.schmidt_weights(bond)?))
    }

    /// Schmidt weights across every bond, computed on a copy.
    pub fn all_schmidt_weights(&self) -> Result<Vec<Vec<f64>>> {
        let mut work = self.clone();
        work.move_center(0)?;
        let mut out = Vec::with_capacity(self.len().saturating_sub(1));
        for bond in 0..self.len().saturating_sub(1) {
            let t = &work.tensors[bond];
            let (l, p) = (t.left, t.phys);
            let svd = svd_sorted(t.left_matrix())?;
            let total: f64 = svd.values.iter().map(|s| s * s).sum();
            out.push(svd.values.iter().map(|s| s * s / total).collect());
            let k = svd.values.len();
            work.tensors[bond] = SiteTensor::from_left_matrix(&svd.u.columns(0, k).into_owned(), l, p);
            let next = &work.tensors[bond + 1];
            let (np, nr) = (next.phys, next.right);
            let m = svd.scaled_vt(k, 1.0) * next.right_matrix();
            work.tensors[bond + 1] = SiteTensor::from_right_matrix(&m, np, nr);
            work.center = bond + 1;
        }
        Ok(out)
    }

    /// `⟨ψ| ⊗_i O_i |ψ⟩` with identities on sites not listed.
    pub fn expectation(&self, site_ops: &[(usize, CMatrix)]) -> Result<Complex64> {
        for (site, op) in site_ops {
            self.check_site(*site)?;
            let d = self.tensors[*site].phys;
            if op.nrows() != d || op.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "operator {}x{} on site {site} of dimension {d}",
                    op.nrows(),
                    op.ncols()
                )));
            }
        }
        let mut env = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for (i, t) in self.tensors.iter().enumerate() {
            let slices: Vec<CMatrix> = (0..t.phys).map(|s| t.slice(s)).collect();
            let mut next = CMatrix::zeros(t.right, t.right);
            let ops: Vec<&CMatrix> = site_ops.iter().filter(|(s, _)| *s == i).map(|(_, o)| o).collect();
            if ops.is_empty() {
                for a in &slices {
                    next += a.adjoint() * &env * a;
                }
            } else {
                let mut op = ops[0].clone();
                for extra in &ops[1..] {
                    op = &op * *extra;
                }
                for (s, bra) in slices.iter().enumerate() {
                    let mut acc = CMatrix::zeros(t.left, t.right);
                    for (sp, ket) in slices.iter().enumerate() {
                        let o = op[(s, sp)];
                        if o != ZERO {
                            acc += ket * o;
                        }
                    }
                    next += bra.adjoint() * &env * acc;
                }
            }
            env = next;
        }
        Ok(env[(0, 0)])
    }

    /// Reduced density matrix of one site; moves the center there.
    pub fn site_density_matrix(&mut self, site: usize) -> Result<CMatrix> {
        self.move_center(site)?;
        let t = &self.tensors[site];
        let mut rho = CMatrix::zeros(t.phys, t.phys);
        for l in 0..t.left {
            for r in 0..t.right {
                for s in 0..t.phys {
                    let a = t.get(l, s, r);
                    if a == ZERO {
                        continue;
                    }
                    for sp in 0..t.phys {
                        rho[(s, sp)] += a * t.get(l, sp, r).conj();
                    }
                }
            }
        }
        Ok(rho)
    }

    /// Applies a one-site operator to the center site in place.
    pub fn apply_center_operator(&mut self, op: &CMatrix) -> Result<()> {
        let t = &mut self.tensors[self.center];
        if op.nrows() != t.phys || op.ncols() != t.phys {
            return Err(Error::DimensionMismatch("one-site operator".into()));
        }
        let mut out = vec![ZERO; t.data.len()];
        for l in 0..t.left {
            for sp in 0..t.phys {
                for s in 0..t.phys {
                    let o = op[(sp, s)];
                    if o == ZERO {
                        continue;
                    }
                    for r in 0..t.right {
                        out[(l * t.phys + sp) * t.right + r] += o * t.data[(l * t.phys + s) * t.right + r];
                    }
                }
            }
        }
        t.data = out;
        Ok(())
    }

    /// Applies `gate` to sites `(site, site + 1)`, optionally exchanging the
    /// two sites afterwards, and splits the result by a truncated SVD. The
    /// center must be on one of the two sites; it ends on `site + 1` for
    /// [`Sweep::Right`] and on `site` for [`Sweep::Left`].
    ///
    /// `gate` acts on `d_site ⊗ d_{site+1}` with the first factor most
    /// significant. Pass `None` for a pure swap or a plain re-split.
    pub fn apply_two_site(
        &mut self,
        site: usize,
        gate: Option<&CMatrix>,
        swap: bool,
        sweep: Sweep,
        cutoff: f64,
        max_bond: usize,
    ) -> Result<Truncation> {
        self.check_bond(site)?;
        if self.center != site && self.center != site + 1 {
            return Err(Error::InvalidParameter(format!(
                "two-site update on ({site}, {}) with center on {}",
                site + 1,
                self.center
            )));
        }
        let a = &self.tensors[site];
        let b = &self.tensors[site + 1];
        let (l, d1, d2, r) = (a.left, a.phys, b.phys, b.right);
        let theta = a.left_matrix() * b.right_matrix(); // (l d1) x (d2 r)
        let theta = row_major(&theta);
        let dd = d1 * d2;

        let mut out = vec![ZERO; theta.len()];
        let (o1, o2) = if swap { (d2, d1) } else { (d1, d2) };
        let mut buf = vec![ZERO; dd];
        for li in 0..l {
            for ri in 0..r {
                for s1 in 0..d1 {
                    for s2 in 0..d2 {
                        buf[s1 * d2 + s2] = theta[((li * d1 + s1) * d2 + s2) * r + ri];
                    }
                }
                for s1 in 0..d1 {
                    for s2 in 0..d2 {
                        let v = match gate {
                            Some(g) => {
                                let row = s1 * d2 + s2;
                                let mut acc = ZERO;
                                for (c, x) in buf.iter().enumerate() {
                                    acc += g[(row, c)] * x;
                                }
                                acc
                            }
                            None => buf[s1 * d2 + s2],
                        };
                        let (p, q) = if swap { (s2, s1) } else { (s1, s2) };
                        out[((li * o1 + p) * o2 + q) * r + ri] = v;
                    }
                }
            }
        }
        let m = from_row_major(l * o1, o2 * r, &out);
        let svd = svd_sorted(m)?;
        let tr = truncation_rank(&svd.values, cutoff, max_bond);
        let k = tr.kept;
        let inv = 1.0 / tr.kept_norm();
        match sweep {
            Sweep::Right => {
                let u = svd.u.columns(0, k).into_owned();
                let sv = svd.scaled_vt(k, inv);
                self.tensors[site] = SiteTensor::from_left_matrix(&u, l, o1);
                self.tensors[site + 1] = SiteTensor::from_right_matrix(&sv, o2, r);
                self.center = site + 1;
            }
            Sweep::Left => {
                let us = svd.scaled_u(k, inv);
                let vt = svd.vt.rows(0, k).into_owned();
                self.tensors[site] = SiteTensor::from_left_matrix(&us, l, o1);
                self.tensors[site + 1] = SiteTensor::from_right_matrix(&vt, o2, r);
                self.center = site;
            }
        }
        self.discarded += tr.discarded;
        Ok(tr)
    }

    pub fn has_non_finite(&self) -> bool {
        self.tensors.iter().any(|t| t.has_non_finite())
    }

    /// Full state vector, site 0 most significant.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let dim: usize = self.local_dims().iter().product();
        if dim > DENSE_CAP {
            return Err(Error::DimensionCap { dim, cap: DENSE_CAP });
        }
        let mut acc = self.tensors[0].left_matrix(); // (1·d0) x r0
        for t in &self.tensors[1..] {
            let rows = acc.nrows();
            let prod = acc * t.right_matrix(); // rows x (d r)
            acc = from_row_major(rows * t.phys, t.right, &row_major(&prod));
        }
        Ok(acc.column(0).iter().copied().collect())
    }

    /// Exact MPS of a dense vector (no truncation), center on site 0.
    pub fn from_dense(vector: &[Complex64], local_dims: &[usize]) -> Result<Self> {
        let dim: usize = local_dims.iter().product();
        if dim != vector.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for product dimension {dim}",
                vector.len()
            )));
        }
        if dim > DENSE_CAP {
            return Err(Error::DimensionCap { dim, cap: DENSE_CAP });
        }
        let mut tensors = Vec::with_capacity(local_dims.len());
        let mut rest = vector.to_vec();
        let mut left = 1;
        for (i, &d) in local_dims.iter().enumerate() {
            if i + 1 == local_dims.len() {
                tensors.push(SiteTensor::new(left, d, 1, rest.clone())?);
                break;
            }
            let cols = rest.len() / (left * d);
            let m = from_row_major(left * d, cols, &rest);
            let svd = svd_sorted(m)?;
            let keep = svd.values.iter().filter(|&&s| s > 1e-15 * svd.values[0].max(1e-300)).count().max(1);
            let u = svd.u.columns(0, keep).into_owned();
            tensors.push(SiteTensor::from_left_matrix(&u, left, d));
            rest = row_major(&svd.scaled_vt(keep, 1.0));
            left = keep;
        }
        let mut state = MpsState {
            tensors,
            center: local_dims.len() - 1,
            discarded: 0.0,
        };
        state.move_center(0)?;
        Ok(state)
    }
}

/// `⟨a|b⟩` of two MPS with matching local dimensions.
pub fn overlap(a: &MpsState, b: &MpsState) -> Result<Complex64> {
    if a.local_dims() != b.local_dims() {
        return Err(Error::DimensionMismatch("overlap of MPS with different sites".into()));
    }
    let mut env = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for (ta, tb) in a.tensors.iter().zip(&b.tensors) {
        let mut next = CMatrix::zeros(ta.right, tb.right);
        for s in 0..ta.phys {
            next += ta.slice(s).adjoint() * &env * tb.slice(s);
        }
        env = next;
    }
    Ok(env[(0, 0)])
}

#[cfg(test)]
mod tests;
