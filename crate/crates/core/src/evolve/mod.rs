//! Time evolution of an MPS under the chain-mapped interaction-picture
//! Hamiltonian, plus a dense exact-diagonalization reference.
//!
//! One step of length `dt` freezes every coupling at the midpoint
//! `t + dt/2` and applies the symmetric product
//!
//! ```text
//! U_sys(dt/2) · G_0(dt/2) ⋯ G_{K−1}(dt/2) · G_K(dt) · G_{K−1}(dt/2) ⋯ G_0(dt/2) · U_sys(dt/2)
//! ```
//!
//! where `G_k` is the exponential of all system–mode-`k` terms and `K` the
//! last mode that carries a term. The system site is carried along the chain
//! by swap gates during the forward sweep and back during the reverse sweep,
//! so every gate acts on nearest neighbours and the step ends with the system
//! on site 0 and the orthogonality center there.

mod ed;

pub use ed::{ed_reference, ED_DIMENSION_CAP};

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use crate::chainmap::ChainMapping;
use crate::error::{Error, Result};
use crate::model::{InteractionHamiltonian, OpenSystemModel};
use crate::mps::{entropy_of, MpsState, Sweep};
use crate::ops::CMatrix;
use crate::units::{ps_to_internal, HBAR_MEV_PS};

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    /// Time step in internal units (ħ/meV).
    pub dt: f64,
    /// Final time in internal units.
    pub t_final: f64,
    pub svd_cutoff: f64,
    pub max_bond: usize,
    /// Fock levels kept per chain mode.
    pub d_bath: usize,
    /// Record observables every this many steps.
    pub measure_every: usize,
    /// Record bond entropies (costs one SVD sweep per measurement).
    pub measure_entropy: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: ps_to_internal(0.25e-3),
            t_final: ps_to_internal(1.0),
            svd_cutoff: 1e-4,
            max_bond: 64,
            d_bath: 12,
            measure_every: 4,
            measure_entropy: true,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0 (got {})", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be >= 0 (got {})",
                self.t_final
            )));
        }
        if self.d_bath < 2 {
            return Err(Error::InvalidParameter(format!(
                "d_bath must be >= 2 (got {})",
                self.d_bath
            )));
        }
        if !(self.svd_cutoff.is_finite() && self.svd_cutoff >= 0.0) {
            return Err(Error::InvalidParameter("svd_cutoff must be >= 0".into()));
        }
        if self.max_bond == 0 || self.measure_every == 0 {
            return Err(Error::InvalidParameter(
                "max_bond and measure_every must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Recorded observables of one run. Times are internal units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `populations[i][s]`: population of system basis state `s` at `times[i]`.
    pub populations: Vec<Vec<f64>>,
    /// `entropies[i][b]`: von Neumann entropy (nats) of bond `b`.
    pub entropies: Vec<Vec<f64>>,
    pub bond_dims: Vec<Vec<usize>>,
    pub discarded_weight: Vec<f64>,
    /// Mean wall-clock seconds per step since the previous record.
    pub step_seconds: Vec<f64>,
}

impl Trajectory {
    pub fn times_ps(&self) -> Vec<f64> {
        self.times.iter().map(|t| t * HBAR_MEV_PS).collect()
    }

    /// Population of system state `s` over time.
    pub fn population_series(&self, s: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[s]).collect()
    }
}

/// Product state with the system in basis state `system_state` and every
/// chain mode in its vacuum.
pub fn initial_state(model: &OpenSystemModel, system_state: usize, d_bath: usize) -> Result<MpsState> {
    let modes = model.bath().modes();
    let mut dims = vec![d_bath; modes + 1];
    dims[0] = model.system_dim();
    let mut occ = vec![0; modes + 1];
    occ[0] = system_state;
    MpsState::product_state(&dims, &occ)
}

/// `exp(−i τ h)` for Hermitian `h`.
pub fn unitary_exp(h: &CMatrix, tau: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, e) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -e * tau);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    scaled * v.adjoint()
}

/// Reorders a gate on `a ⊗ b` into the same gate on `b ⊗ a`.
fn exchange_factors(g: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da * db, da * db, |row, col| {
        let (rb, ra) = (row / da, row % da);
        let (cb, ca) = (col / da, col % da);
        g[(ra * db + rb, ca * db + cb)]
    })
}

/// Advances `state` from `t` to `t + dt`. The state must have the system on
/// site 0; it leaves with the center on site 0 and unit norm.
pub fn step(
    state: &mut MpsState,
    h: &InteractionHamiltonian,
    t: f64,
    dt: f64,
    cfg: &EvolutionConfig,
) -> Result<()> {
    let sys_dim = h.model().system_dim();
    let terms = h.terms_at(t + 0.5 * dt);
    let d_bath = cfg.d_bath;
    let u_sys = unitary_exp(&terms.system, 0.5 * dt);
    let active = terms.active_modes();

    state.move_center(0)?;
    state.apply_center_operator(&u_sys)?;

    if let Some(&last) = active.last() {
        let mut gates: Vec<Option<CMatrix>> = vec![None; last];
        for &k in active.iter().filter(|&&k| k < last) {
            let hk = terms.mode_interaction(k, d_bath).expect("active mode has terms");
            gates[k] = Some(unitary_exp(&hk, 0.5 * dt));
        }
        for (k, gate) in gates.iter().enumerate() {
            state.apply_two_site(k, gate.as_ref(), true, Sweep::Right, cfg.svd_cutoff, cfg.max_bond)?;
        }
        let h_last = terms.mode_interaction(last, d_bath).expect("active mode has terms");
        let g_last = unitary_exp(&h_last, dt);
        state.apply_two_site(last, Some(&g_last), false, Sweep::Left, cfg.svd_cutoff, cfg.max_bond)?;
        for k in (0..last).rev() {
            let gate = gates[k].as_ref().map(|g| exchange_factors(g, sys_dim, d_bath));
            state.apply_two_site(k, gate.as_ref(), true, Sweep::Left, cfg.svd_cutoff, cfg.max_bond)?;
        }
    }

    state.apply_center_operator(&u_sys)?;
    state.normalize();
    Ok(())
}

/// Propagates `initial` to `cfg.t_final`, recording observables every
/// `cfg.measure_every` steps and at the final time.
pub fn run_trajectory(
    model: Arc<OpenSystemModel>,
    mapping: Arc<ChainMapping>,
    initial: MpsState,
    cfg: &EvolutionConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let modes = model.bath().modes();
    let mut expected = vec![cfg.d_bath; modes + 1];
    expected[0] = model.system_dim();
    if initial.local_dims() != expected {
        return Err(Error::DimensionMismatch(format!(
            "initial state has local dims {:?}, model needs {:?}",
            initial.local_dims(),
            expected
        )));
    }
    let h = InteractionHamiltonian::new(model, mapping)?;
    let mut state = initial;
    state.move_center(0)?;
    state.normalize();

    let steps = cfg.steps();
    let mut traj = Trajectory::default();
    let mut clock = Instant::now();
    let mut since = 0usize;
    record(&mut traj, &mut state, 0.0, 0.0, cfg)?;
    for n in 0..steps {
        let t = n as f64 * cfg.dt;
        step(&mut state, &h, t, cfg.dt, cfg).map_err(|e| at_step(e, n, t))?;
        if state.has_non_finite() || !state.norm_squared().is_finite() {
            return Err(Error::NumericalFailure {
                step: n,
                time: t,
                detail: "non-finite tensor entries".into(),
            });
        }
        since += 1;
        if (n + 1) % cfg.measure_every == 0 || n + 1 == steps {
            let per_step = clock.elapsed().as_secs_f64() / since as f64;
            record(&mut traj, &mut state, (n + 1) as f64 * cfg.dt, per_step, cfg)?;
            clock = Instant::now();
            since = 0;
        }
    }
    Ok(traj)
}

fn at_step(e: Error, step: usize, time: f64) -> Error {
    match e {
        Error::NumericalFailure { detail, .. } => Error::NumericalFailure { step, time, detail },
        other => other,
    }
}

fn record(
    traj: &mut Trajectory,
    state: &mut MpsState,
    t: f64,
    step_seconds: f64,
    cfg: &EvolutionConfig,
) -> Result<()> {
    let rho = state.site_density_matrix(0)?;
    let populations = (0..rho.nrows()).map(|s| rho[(s, s)].re).collect();
    traj.times.push(t);
    traj.populations.push(populations);
    if cfg.measure_entropy {
        let weights = state.all_schmidt_weights()?;
        traj.entropies.push(weights.iter().map(|w| entropy_of(w)).collect());
    }
    traj.bond_dims.push(state.bond_dims());
    traj.discarded_weight.push(state.discarded_weight());
    traj.step_seconds.push(step_seconds);
    Ok(())
}
