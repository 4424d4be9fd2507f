//! C interface to `bathchain`.
//!
//! Objects are opaque handles created by `bc_*_new`-style functions and
//! released by the matching `bc_*_free`. Every fallible call returns a
//! `BcStatus`; on failure `bc_last_error_message` describes the problem for
//! the calling thread. Times cross the boundary in ps and energies in meV.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use bathchain::chainmap::{ChainMapping, MappingSeed};
use bathchain::config;
use bathchain::evolve::{initial_state, run_trajectory, EvolutionConfig, Trajectory};
use bathchain::model::{build_singlet_fission, OpenSystemModel, SingletFissionParams};
use bathchain::runner;
use bathchain::units::{internal_to_ps, ps_to_internal};
use bathchain::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    DegenerateSeeds = 4,
    Breakdown = 5,
    NumericalFailure = 6,
    BufferTooSmall = 7,
    Io = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcMappingKind {
    LanczosX = 0,
    LanczosZ = 1,
    BlockLanczos = 2,
}

/// Evolution settings. Times in ps.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BcEvolutionConfig {
    pub dt_ps: f64,
    pub t_final_ps: f64,
    pub svd_cutoff: f64,
    pub max_bond: usize,
    pub d_bath: usize,
    pub measure_every: usize,
}

/// An open-system model with its discretized bath.
pub struct BcModel(Arc<OpenSystemModel>);

/// A chain mapping of a model's bath.
pub struct BcMapping(Arc<ChainMapping>);

/// Recorded observables of one run.
pub struct BcTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BcStatus {
    match e {
        Error::Config(_) | Error::UnknownUnit(_) | Error::IncompatibleUnits { .. } => {
            BcStatus::ConfigError
        }
        Error::DegenerateSeeds { .. } => BcStatus::DegenerateSeeds,
        Error::Breakdown { .. } => BcStatus::Breakdown,
        Error::NumericalFailure { .. } => BcStatus::NumericalFailure,
        Error::Io(_) | Error::Checkpoint(_) => BcStatus::Io,
        _ => BcStatus::InvalidArgument,
    }
}

fn fail(status: BcStatus, msg: &str) -> BcStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), BcStatus>) -> BcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BcStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(BcStatus::Internal, "internal panic"),
    }
}

fn lib<T>(r: bathchain::Result<T>) -> Result<T, BcStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, BcStatus> {
    p.as_ref()
        .ok_or_else(|| fail(BcStatus::NullPointer, &format!("`{name}` is null")))
}

unsafe fn copy_out(values: &[f64], out: *mut f64, capacity: usize) -> Result<(), BcStatus> {
    if out.is_null() {
        return Err(fail(BcStatus::NullPointer, "output buffer is null"));
    }
    if capacity < values.len() {
        return Err(fail(
            BcStatus::BufferTooSmall,
            &format!("buffer holds {capacity} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Singlet-fission model with reference parameters at the given vibrational
/// centers (meV) and `modes` bath oscillators.
#[no_mangle]
pub unsafe extern "C" fn bc_model_singlet_fission(
    omega_diag: f64,
    omega_od: f64,
    modes: usize,
    out: *mut *mut BcModel,
) -> BcStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(BcStatus::NullPointer, "`out` is null"));
        }
        if modes == 0 || !(omega_diag > 0.0 && omega_od > 0.0) {
            return Err(fail(
                BcStatus::InvalidArgument,
                "modes and vibrational centers must be positive",
            ));
        }
        let mut p = SingletFissionParams::reference(omega_diag, omega_od);
        p.modes = modes;
        let model = lib(p.bath().and_then(|b| build_singlet_fission(&p, b)))?;
        *out = Box::into_raw(Box::new(BcModel(Arc::new(model))));
        Ok(())
    })
}

/// Model described by configuration text (the same format as the CLI).
#[no_mangle]
pub unsafe extern "C" fn bc_model_from_config(text: *const c_char, out: *mut *mut BcModel) -> BcStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(fail(BcStatus::NullPointer, "`text` or `out` is null"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(BcStatus::InvalidArgument, "configuration is not UTF-8"))?;
        let spec = lib(config::parse(text, &[]))?;
        let model = lib(runner::build_model(&spec))?;
        *out = Box::into_raw(Box::new(BcModel(model)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bc_model_free(model: *mut BcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of bath modes, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn bc_model_modes(model: *const BcModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.bath().modes())
}

/// Bath frequencies (meV) into `out`, which must hold `bc_model_modes` values.
#[no_mangle]
pub unsafe extern "C" fn bc_model_frequencies(
    model: *const BcModel,
    out: *mut f64,
    capacity: usize,
) -> BcStatus {
    guard(|| {
        let m = deref(model, "model")?;
        copy_out(m.0.bath().frequencies(), out, capacity)
    })
}

#[no_mangle]
pub unsafe extern "C" fn bc_mapping_new(
    model: *const BcModel,
    kind: BcMappingKind,
    out: *mut *mut BcMapping,
) -> BcStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(fail(BcStatus::NullPointer, "`out` is null"));
        }
        let seed = match kind {
            BcMappingKind::LanczosX => MappingSeed::Lanczos { seed: "x".into() },
            BcMappingKind::LanczosZ => MappingSeed::Lanczos { seed: "z".into() },
            BcMappingKind::BlockLanczos => MappingSeed::BlockLanczos {
                first: "z".into(),
                second: "x".into(),
            },
        };
        let mapping = lib(m.0.mapping(&seed))?;
        *out = Box::into_raw(Box::new(BcMapping(Arc::new(mapping))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bc_mapping_free(mapping: *mut BcMapping) {
    if !mapping.is_null() {
        drop(Box::from_raw(mapping));
    }
}

/// Number of chain modes, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn bc_mapping_modes(mapping: *const BcMapping) -> usize {
    mapping.as_ref().map_or(0, |m| m.0.modes())
}

/// Band coefficients (meV). Each buffer must hold `bc_mapping_modes` values;
/// any of them may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn bc_mapping_band(
    mapping: *const BcMapping,
    alpha: *mut f64,
    beta: *mut f64,
    kappa: *mut f64,
    capacity: usize,
) -> BcStatus {
    guard(|| {
        let m = deref(mapping, "mapping")?;
        let band = m.0.band();
        for (values, out) in [(&band.alpha, alpha), (&band.beta, beta), (&band.kappa, kappa)] {
            if !out.is_null() {
                copy_out(values, out, capacity)?;
            }
        }
        Ok(())
    })
}

/// Default evolution settings.
#[no_mangle]
pub extern "C" fn bc_evolution_config_default() -> BcEvolutionConfig {
    let d = EvolutionConfig::default();
    BcEvolutionConfig {
        dt_ps: internal_to_ps(d.dt),
        t_final_ps: internal_to_ps(d.t_final),
        svd_cutoff: d.svd_cutoff,
        max_bond: d.max_bond,
        d_bath: d.d_bath,
        measure_every: d.measure_every,
    }
}

/// Evolves the model from system basis state `initial_state` with all modes
/// in their vacuum. `mapping` must have been built from `model`.
#[no_mangle]
pub unsafe extern "C" fn bc_evolve(
    model: *const BcModel,
    mapping: *const BcMapping,
    config: *const BcEvolutionConfig,
    initial_state_index: usize,
    out: *mut *mut BcTrajectory,
) -> BcStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let map = deref(mapping, "mapping")?;
        let c = deref(config, "config")?;
        if out.is_null() {
            return Err(fail(BcStatus::NullPointer, "`out` is null"));
        }
        if initial_state_index >= m.0.system_dim() {
            return Err(fail(
                BcStatus::InvalidArgument,
                &format!("initial state {initial_state_index} out of range"),
            ));
        }
        let cfg = EvolutionConfig {
            dt: ps_to_internal(c.dt_ps),
            t_final: ps_to_internal(c.t_final_ps),
            svd_cutoff: c.svd_cutoff,
            max_bond: c.max_bond,
            d_bath: c.d_bath,
            measure_every: c.measure_every,
            measure_entropy: true,
        };
        lib(cfg.validate())?;
        let init = lib(initial_state(&m.0, initial_state_index, cfg.d_bath))?;
        let traj = lib(run_trajectory(m.0.clone(), map.0.clone(), init, &cfg))?;
        *out = Box::into_raw(Box::new(BcTrajectory(traj)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bc_trajectory_free(traj: *mut BcTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of recorded times, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn bc_trajectory_len(traj: *const BcTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.times.len())
}

/// Recorded times in ps.
#[no_mangle]
pub unsafe extern "C" fn bc_trajectory_times(
    traj: *const BcTrajectory,
    out: *mut f64,
    capacity: usize,
) -> BcStatus {
    guard(|| {
        let t = deref(traj, "trajectory")?;
        copy_out(&t.0.times_ps(), out, capacity)
    })
}

/// Population of system basis state `state` at every recorded time.
#[no_mangle]
pub unsafe extern "C" fn bc_trajectory_population(
    traj: *const BcTrajectory,
    state: usize,
    out: *mut f64,
    capacity: usize,
) -> BcStatus {
    guard(|| {
        let t = deref(traj, "trajectory")?;
        if t.0.populations.first().is_some_and(|p| state >= p.len()) {
            return Err(fail(BcStatus::InvalidArgument, &format!("no state {state}")));
        }
        copy_out(&t.0.population_series(state), out, capacity)
    })
}

/// Cumulative discarded weight at every recorded time.
#[no_mangle]
pub unsafe extern "C" fn bc_trajectory_discarded_weight(
    traj: *const BcTrajectory,
    out: *mut f64,
    capacity: usize,
) -> BcStatus {
    guard(|| {
        let t = deref(traj, "trajectory")?;
        copy_out(&t.0.discarded_weight, out, capacity)
    })
}
