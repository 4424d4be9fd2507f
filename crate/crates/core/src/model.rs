//! Open-system models and their interaction-picture Hamiltonians in a chain
//! basis.
//!
//! A model is a system Hamiltonian plus a list of channels, each pairing a
//! Hermitian system operator `A_c` with one coupling vector of the shared
//! bath:
//!
//! ```text
//! H = H_sys + Σ_c A_c ⊗ Σ_j c_j (a_j† + a_j) + Σ_j ω_j a_j† a_j
//! ```
//!
//! In the interaction picture with respect to the bath, and after a chain
//! mapping `T`, the bath term disappears and each channel contributes
//! `A_c ⊗ (c_k(t)* b_k† + c_k(t) b_k)` with `c_k(t) = Σ_j T_jk c_j e^{−iω_j t}`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::chainmap::{build_mapping, ChainMapping, MappingSeed, TimeDependentCouplings};
use crate::error::{Error, Result};
use crate::ops::{hermiticity_residual, is_zero, projector, sigma_x, sigma_z, CMatrix};
use crate::spectral::{
    discretize_shared, DiscretizedBath, Interval, Lorentzian, SpectralDensity,
};
use crate::units::{convert, Unit, HBAR_MEV_PS};

const HERMITIAN_TOL: f64 = 1e-12;

/// Terms whose coupling falls below this fraction of the channel maximum are
/// dropped from the generated Hamiltonian.
pub const TERM_SKIP_RELATIVE: f64 = 1e-10;

/// System-bath channel: a Hermitian system operator plus the label of the
/// bath coupling vector it multiplies.
#[derive(Debug, Clone)]
pub struct SystemChannel {
    pub label: String,
    pub operator: CMatrix,
}

#[derive(Debug, Clone)]
pub struct OpenSystemModel {
    system_dim: usize,
    h_sys: CMatrix,
    channels: Vec<SystemChannel>,
    bath: DiscretizedBath,
    state_labels: Vec<String>,
}

impl OpenSystemModel {
    pub fn new(h_sys: CMatrix, channels: Vec<SystemChannel>, bath: DiscretizedBath) -> Result<Self> {
        let system_dim = h_sys.nrows();
        if system_dim == 0 || h_sys.ncols() != system_dim {
            return Err(Error::DimensionMismatch(
                "system Hamiltonian must be square and non-empty".into(),
            ));
        }
        if hermiticity_residual(&h_sys) > HERMITIAN_TOL {
            return Err(Error::InvalidParameter(
                "system Hamiltonian is not Hermitian".into(),
            ));
        }
        for ch in &channels {
            if ch.operator.nrows() != system_dim || ch.operator.ncols() != system_dim {
                return Err(Error::DimensionMismatch(format!(
                    "channel `{}` operator is {}x{}, system dimension is {system_dim}",
                    ch.label,
                    ch.operator.nrows(),
                    ch.operator.ncols()
                )));
            }
            if hermiticity_residual(&ch.operator) > HERMITIAN_TOL {
                return Err(Error::InvalidParameter(format!(
                    "channel `{}` operator is not Hermitian",
                    ch.label
                )));
            }
            bath.channel(&ch.label)?;
        }
        let state_labels = (0..system_dim).map(|i| format!("state{i}")).collect();
        Ok(OpenSystemModel {
            system_dim,
            h_sys,
            channels,
            bath,
            state_labels,
        })
    }

    pub fn with_state_labels(mut self, labels: &[&str]) -> Self {
        if labels.len() == self.system_dim {
            self.state_labels = labels.iter().map(|s| s.to_string()).collect();
        }
        self
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn system_hamiltonian(&self) -> &CMatrix {
        &self.h_sys
    }

    pub fn channels(&self) -> &[SystemChannel] {
        &self.channels
    }

    pub fn bath(&self) -> &DiscretizedBath {
        &self.bath
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    /// Coupling vector of a channel.
    pub fn couplings(&self, label: &str) -> Result<&[f64]> {
        self.bath.channel(label)
    }

    fn is_active(&self, label: &str) -> bool {
        self.channels
            .iter()
            .any(|c| c.label == label && !is_zero(&c.operator))
    }

    /// Builds a chain mapping from the bath channels of this model.
    ///
    /// A block-Lanczos mapping needs both seeding channels to actually couple
    /// to the system; otherwise the model has a single effective channel and
    /// the request is refused as degenerate.
    pub fn mapping(&self, seed: &MappingSeed) -> Result<ChainMapping> {
        if let MappingSeed::BlockLanczos { first, second } = seed {
            for label in [first, second] {
                self.bath.channel(label)?;
                if !self.is_active(label) {
                    return Err(Error::DegenerateSeeds { sine: 0.0 });
                }
            }
        }
        build_mapping(&self.bath, seed)
    }
}

/// `Δx σ_x + Δz σ_z` coupled through `σ_x` to bath channel `x` and through
/// `σ_z` to channel `z` (whichever of the two the bath provides).
pub fn build_spin_boson(delta_x: f64, delta_z: f64, bath: DiscretizedBath) -> Result<OpenSystemModel> {
    if !(delta_x.is_finite() && delta_z.is_finite()) {
        return Err(Error::InvalidParameter("non-finite spin-boson splitting".into()));
    }
    let h_sys = sigma_x().scale(delta_x) + sigma_z().scale(delta_z);
    let mut channels = Vec::new();
    for ch in bath.channels() {
        let operator = match ch.label.as_str() {
            "x" => sigma_x(),
            "z" => sigma_z(),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "spin-boson bath channel `{other}` must be `x` or `z`"
                )))
            }
        };
        channels.push(SystemChannel {
            label: ch.label.clone(),
            operator,
        });
    }
    OpenSystemModel::new(h_sys, channels, bath)
        .map(|m| m.with_state_labels(&["up", "down"]))
}

/// Parameters of the singlet-fission model, energies in meV.
#[derive(Debug, Clone, PartialEq)]
pub struct SingletFissionParams {
    pub delta_z: f64,
    pub delta_x: f64,
    pub lambda_s1: f64,
    pub lambda_tt: f64,
    pub lambda_od: f64,
    pub omega_diag: f64,
    pub omega_od: f64,
    /// Relaxation rates as energies ħγ.
    pub gamma_diag: f64,
    pub gamma_od: f64,
    pub interval: Interval,
    pub modes: usize,
}

impl SingletFissionParams {
    /// Reference parameter set for given vibrational centers (meV).
    pub fn reference(omega_diag: f64, omega_od: f64) -> Self {
        let gamma = HBAR_MEV_PS; // 1 ps⁻¹
        let hi = convert(800.0, Unit::Wavenumber, Unit::MilliElectronVolt)
            .expect("energy units are compatible");
        SingletFissionParams {
            delta_z: 100.0,
            delta_x: 20.0,
            lambda_s1: 0.7 * omega_diag,
            lambda_tt: 1.4 * omega_diag,
            lambda_od: 0.1 * omega_od,
            omega_diag,
            omega_od,
            gamma_diag: gamma,
            gamma_od: gamma,
            interval: Interval { lo: 0.0, hi },
            modes: 300,
        }
    }

    pub fn diagonal_density(&self) -> Result<SpectralDensity> {
        SpectralDensity::lorentzian_sum(
            vec![Lorentzian::from_relaxation_rate(self.omega_diag, self.gamma_diag)],
            self.interval,
        )
    }

    pub fn off_diagonal_density(&self) -> Result<SpectralDensity> {
        SpectralDensity::lorentzian_sum(
            vec![Lorentzian::from_relaxation_rate(self.omega_od, self.gamma_od)],
            self.interval,
        )
    }

    /// Bath with channel `z` (diagonal, from J_z) and `x` (off-diagonal, from J_x).
    pub fn bath(&self) -> Result<DiscretizedBath> {
        let jz = self.diagonal_density()?;
        let jx = self.off_diagonal_density()?;
        discretize_shared(&[("z", &jz), ("x", &jx)], self.modes, self.interval)
    }
}

/// Two-state singlet-fission model, basis `{|S1⟩, |TT⟩}`.
pub fn build_singlet_fission(
    params: &SingletFissionParams,
    bath: DiscretizedBath,
) -> Result<OpenSystemModel> {
    let lambdas = [
        ("lambda_s1", params.lambda_s1),
        ("lambda_tt", params.lambda_tt),
        ("lambda_od", params.lambda_od),
    ];
    for (name, v) in lambdas {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidParameter(format!("{name} must be >= 0 (got {v})")));
        }
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let flip = projector(2, 0, 1) + projector(2, 1, 0);
    let h_sys = flip.scale(params.delta_x) + projector(2, 0, 0).scale(params.delta_z);
    let diag = projector(2, 0, 0) * c(params.lambda_s1.sqrt())
        + projector(2, 1, 1) * c(params.lambda_tt.sqrt());
    let off = flip * c(params.lambda_od.sqrt());
    let channels = vec![
        SystemChannel {
            label: "z".into(),
            operator: diag,
        },
        SystemChannel {
            label: "x".into(),
            operator: off,
        },
    ];
    OpenSystemModel::new(h_sys, channels, bath).map(|m| m.with_state_labels(&["S1", "TT"]))
}

/// One Hermitian system–mode term `A ⊗ (r b_k† + l b_k)` with `r = l*`.
#[derive(Debug, Clone)]
pub struct CouplingTerm {
    pub channel: usize,
    pub mode: usize,
    /// MPS site of the mode (the system sits on site 0).
    pub site: usize,
    pub raising: Complex64,
    pub lowering: Complex64,
}

/// Hamiltonian terms at one instant.
#[derive(Debug, Clone)]
pub struct Terms {
    pub system: CMatrix,
    /// System operators, indexed by `CouplingTerm::channel`.
    pub operators: Vec<CMatrix>,
    pub couplings: Vec<CouplingTerm>,
}

impl Terms {
    /// Sum of all interaction terms acting on `mode`, as a matrix on
    /// `system ⊗ mode` with the mode truncated to `d` levels.
    pub fn mode_interaction(&self, mode: usize, d: usize) -> Option<CMatrix> {
        let a = crate::ops::annihilation(d);
        let ad = a.adjoint();
        let mut acc: Option<CMatrix> = None;
        for t in self.couplings.iter().filter(|t| t.mode == mode) {
            let ladder = &ad * t.raising + &a * t.lowering;
            let term = self.operators[t.channel].kronecker(&ladder);
            acc = Some(match acc {
                Some(m) => m + term,
                None => term,
            });
        }
        acc
    }

    /// Modes carrying at least one term, ascending.
    pub fn active_modes(&self) -> Vec<usize> {
        let mut modes: Vec<usize> = self.couplings.iter().map(|t| t.mode).collect();
        modes.sort_unstable();
        modes.dedup();
        modes
    }
}

/// Interaction-picture Hamiltonian of a model in a given chain basis.
#[derive(Debug, Clone)]
pub struct InteractionHamiltonian {
    model: Arc<OpenSystemModel>,
    couplings: TimeDependentCouplings,
    /// For each model channel, the index of its coupling vector.
    channel_index: Vec<usize>,
}

impl InteractionHamiltonian {
    pub fn new(model: Arc<OpenSystemModel>, mapping: Arc<ChainMapping>) -> Result<Self> {
        let couplings = TimeDependentCouplings::new(mapping, model.bath())?;
        let channel_index = model
            .channels()
            .iter()
            .map(|c| couplings.index_of(&c.label))
            .collect::<Result<Vec<_>>>()?;
        Ok(InteractionHamiltonian {
            model,
            couplings,
            channel_index,
        })
    }

    pub fn model(&self) -> &OpenSystemModel {
        &self.model
    }

    pub fn couplings(&self) -> &TimeDependentCouplings {
        &self.couplings
    }

    pub fn modes(&self) -> usize {
        self.model.bath().modes()
    }

    /// Terms at time `t` (ħ/meV). Site 0 is the system, mode `k` sits on site
    /// `k + 1`.
    pub fn terms_at(&self, t: f64) -> Terms {
        let mut couplings = Vec::new();
        for (ci, ch) in self.model.channels().iter().enumerate() {
            if is_zero(&ch.operator) {
                continue;
            }
            let c = self.couplings.couplings_by_index(self.channel_index[ci], t);
            let max = c.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if max == 0.0 {
                continue;
            }
            for (k, ck) in c.iter().enumerate() {
                if ck.norm() < TERM_SKIP_RELATIVE * max {
                    continue;
                }
                couplings.push(CouplingTerm {
                    channel: ci,
                    mode: k,
                    site: k + 1,
                    raising: ck.conj(),
                    lowering: *ck,
                });
            }
        }
        Terms {
            system: self.model.system_hamiltonian().clone(),
            operators: self.model.channels().iter().map(|c| c.operator.clone()).collect(),
            couplings,
        }
    }
}
