//! Run configuration.
//!
//! The format is plain text with `[section]` headers and `key = value` lines.
//! `#` starts a comment. Physical quantities carry a unit suffix
//! (`delta_z = 100 meV`, `dt = 0.25 fs`, `omega_max = 800 cm-1`).
//! Reorganization energies of the singlet-fission preset may instead be given
//! as multiples of a vibrational energy, `lambda_s1 = 0.7 hw_diag`.
//!
//! ```text
//! [model]
//! preset = singlet_fission
//! omega_diag = 80 meV
//! omega_od = 30 meV
//!
//! [bath]
//! modes = 48
//!
//! [mapping]
//! kind = block_lanczos
//!
//! [evolution]
//! dt = 2 fs
//! t_final = 0.4 ps
//! d_bath = 10
//! svd_cutoff = 1e-5
//!
//! [sweep]
//! omega_diag = 20, 40, 60, 80 meV
//! omega_od = 30, 60 meV
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::chainmap::MappingSeed;
use crate::error::{ConfigIssue, Error, Result};
use crate::evolve::EvolutionConfig;
use crate::model::SingletFissionParams;
use crate::spectral::{Interval, Lorentzian, SpectralDensity};
use crate::units::{convert, internal_to_ps, ps_to_internal, Dimension, Unit, HBAR_MEV_PS};

/// A reorganization energy, absolute or relative to a vibrational energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaled {
    Absolute(f64),
    OfDiagonal(f64),
    OfOffDiagonal(f64),
}

impl Scaled {
    pub fn resolve(self, omega_diag: f64, omega_od: f64) -> f64 {
        match self {
            Scaled::Absolute(v) => v,
            Scaled::OfDiagonal(f) => f * omega_diag,
            Scaled::OfOffDiagonal(f) => f * omega_od,
        }
    }

    fn describe(self) -> String {
        match self {
            Scaled::Absolute(v) => format!("{v} meV"),
            Scaled::OfDiagonal(f) => format!("{f} hw_diag"),
            Scaled::OfOffDiagonal(f) => format!("{f} hw_od"),
        }
    }
}

/// Singlet-fission parameters, energies in meV.
#[derive(Debug, Clone, PartialEq)]
pub struct SingletFissionSpec {
    pub delta_z: f64,
    pub delta_x: f64,
    pub omega_diag: f64,
    pub omega_od: f64,
    pub lambda_s1: Scaled,
    pub lambda_tt: Scaled,
    pub lambda_od: Scaled,
    pub gamma_diag: f64,
    pub gamma_od: f64,
}

impl Default for SingletFissionSpec {
    fn default() -> Self {
        SingletFissionSpec {
            delta_z: 100.0,
            delta_x: 20.0,
            omega_diag: 80.0,
            omega_od: 60.0,
            lambda_s1: Scaled::OfDiagonal(0.7),
            lambda_tt: Scaled::OfDiagonal(1.4),
            lambda_od: Scaled::OfOffDiagonal(0.1),
            gamma_diag: HBAR_MEV_PS,
            gamma_od: HBAR_MEV_PS,
        }
    }
}

impl SingletFissionSpec {
    /// Same parameters at other vibrational centers; relative λ follow.
    pub fn at(&self, omega_diag: f64, omega_od: f64) -> Self {
        SingletFissionSpec {
            omega_diag,
            omega_od,
            ..self.clone()
        }
    }

    pub fn params(&self, bath: &BathSpec) -> SingletFissionParams {
        let r = |s: Scaled| s.resolve(self.omega_diag, self.omega_od);
        SingletFissionParams {
            delta_z: self.delta_z,
            delta_x: self.delta_x,
            lambda_s1: r(self.lambda_s1),
            lambda_tt: r(self.lambda_tt),
            lambda_od: r(self.lambda_od),
            omega_diag: self.omega_diag,
            omega_od: self.omega_od,
            gamma_diag: self.gamma_diag,
            gamma_od: self.gamma_od,
            interval: bath.interval(),
            modes: bath.modes,
        }
    }
}

/// Spectral density of one spin-boson channel, energies in meV.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelDensity {
    Lorentzian {
        centers: Vec<f64>,
        width: f64,
        strength: f64,
    },
    Ohmic {
        strength: f64,
        cutoff: f64,
    },
}

impl ChannelDensity {
    pub fn density(&self, support: Interval) -> Result<SpectralDensity> {
        match self {
            ChannelDensity::Lorentzian {
                centers,
                width,
                strength,
            } => SpectralDensity::lorentzian_sum(
                centers
                    .iter()
                    .map(|&center| Lorentzian {
                        center,
                        width: *width,
                        strength: *strength,
                    })
                    .collect(),
                support,
            ),
            ChannelDensity::Ohmic { strength, cutoff } => {
                SpectralDensity::ohmic_exponential(*strength, *cutoff, support)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinBosonSpec {
    pub delta_x: f64,
    pub delta_z: f64,
    /// Channel label (`x` or `z`) and its density.
    pub channels: Vec<(String, ChannelDensity)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    SingletFission(SingletFissionSpec),
    SpinBoson(SpinBosonSpec),
}

/// Discretization, energies in meV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub modes: usize,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl BathSpec {
    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.omega_min,
            hi: self.omega_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingChoice {
    LanczosX,
    LanczosZ,
    BlockLanczos,
    /// Lanczos-Z and block-Lanczos side by side.
    Compare,
}

impl MappingChoice {
    pub fn name(self) -> &'static str {
        match self {
            MappingChoice::LanczosX => "lanczos_x",
            MappingChoice::LanczosZ => "lanczos_z",
            MappingChoice::BlockLanczos => "block_lanczos",
            MappingChoice::Compare => "compare",
        }
    }

    /// The seed of a single mapping; `None` for `Compare`.
    pub fn seed(self) -> Option<MappingSeed> {
        match self {
            MappingChoice::LanczosX => Some(MappingSeed::Lanczos { seed: "x".into() }),
            MappingChoice::LanczosZ => Some(MappingSeed::Lanczos { seed: "z".into() }),
            MappingChoice::BlockLanczos => Some(MappingSeed::BlockLanczos {
                first: "z".into(),
                second: "x".into(),
            }),
            MappingChoice::Compare => None,
        }
    }

    /// The single mappings this choice runs.
    pub fn runs(self) -> Vec<MappingChoice> {
        match self {
            MappingChoice::Compare => vec![MappingChoice::LanczosZ, MappingChoice::BlockLanczos],
            other => vec![other],
        }
    }

    fn uses_block(self) -> bool {
        matches!(self, MappingChoice::BlockLanczos | MappingChoice::Compare)
    }
}

impl std::str::FromStr for MappingChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lanczos_x" => Ok(MappingChoice::LanczosX),
            "lanczos_z" => Ok(MappingChoice::LanczosZ),
            "block_lanczos" => Ok(MappingChoice::BlockLanczos),
            "compare" => Ok(MappingChoice::Compare),
            other => Err(format!(
                "unknown mapping `{other}` (expected lanczos_x, lanczos_z, block_lanczos or compare)"
            )),
        }
    }
}

/// Grid of vibrational centers (meV).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub omega_diag: Vec<f64>,
    pub omega_od: Vec<f64>,
}

impl SweepSpec {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.omega_od
            .iter()
            .flat_map(|&od| self.omega_diag.iter().map(move |&d| (d, od)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: ModelSpec,
    pub bath: BathSpec,
    pub mapping: MappingChoice,
    pub evolution: EvolutionConfig,
    /// System basis state occupied at t = 0.
    pub initial_state: usize,
    pub output_dir: PathBuf,
    /// Number of times at which `couplings.csv` samples `|c_k(t)|`.
    pub coupling_samples: usize,
    pub sweep: Option<SweepSpec>,
    pub workers: usize,
    /// Reserved; every pipeline stage is deterministic.
    pub seed: u64,
}

impl RunSpec {
    /// Copy of a singlet-fission spec at one sweep point.
    pub fn at_point(&self, omega_diag: f64, omega_od: f64) -> Result<RunSpec> {
        match &self.model {
            ModelSpec::SingletFission(sf) => Ok(RunSpec {
                model: ModelSpec::SingletFission(sf.at(omega_diag, omega_od)),
                sweep: None,
                ..self.clone()
            }),
            ModelSpec::SpinBoson(_) => Err(Error::InvalidParameter(
                "sweeps are defined for the singlet-fission preset only".into(),
            )),
        }
    }

    /// Every resolved parameter with its unit.
    pub fn manifest(&self) -> Value {
        let model = match &self.model {
            ModelSpec::SingletFission(sf) => {
                let p = sf.params(&self.bath);
                json!({
                    "preset": "singlet_fission",
                    "delta_z_meV": p.delta_z,
                    "delta_x_meV": p.delta_x,
                    "omega_diag_meV": p.omega_diag,
                    "omega_od_meV": p.omega_od,
                    "lambda_s1_meV": p.lambda_s1,
                    "lambda_tt_meV": p.lambda_tt,
                    "lambda_od_meV": p.lambda_od,
                    "lambda_s1_input": sf.lambda_s1.describe(),
                    "lambda_tt_input": sf.lambda_tt.describe(),
                    "lambda_od_input": sf.lambda_od.describe(),
                    "gamma_diag_meV": p.gamma_diag,
                    "gamma_od_meV": p.gamma_od,
                    "state_labels": ["S1", "TT"],
                })
            }
            ModelSpec::SpinBoson(sb) => {
                let channels: Vec<Value> = sb
                    .channels
                    .iter()
                    .map(|(label, d)| match d {
                        ChannelDensity::Lorentzian {
                            centers,
                            width,
                            strength,
                        } => json!({
                            "label": label,
                            "density": "lorentzian",
                            "centers_meV": centers,
                            "width_meV": width,
                            "strength": strength,
                        }),
                        ChannelDensity::Ohmic { strength, cutoff } => json!({
                            "label": label,
                            "density": "ohmic",
                            "strength": strength,
                            "cutoff_meV": cutoff,
                        }),
                    })
                    .collect();
                json!({
                    "preset": "spin_boson",
                    "delta_x_meV": sb.delta_x,
                    "delta_z_meV": sb.delta_z,
                    "channels": channels,
                    "state_labels": ["up", "down"],
                })
            }
        };
        let e = &self.evolution;
        json!({
            "model": model,
            "bath": {
                "modes": self.bath.modes,
                "omega_min_meV": self.bath.omega_min,
                "omega_max_meV": self.bath.omega_max,
            },
            "mapping": self.mapping.name(),
            "evolution": {
                "dt_fs": internal_to_ps(e.dt) * 1e3,
                "t_final_ps": internal_to_ps(e.t_final),
                "steps": e.steps(),
                "svd_cutoff": e.svd_cutoff,
                "max_bond": e.max_bond,
                "d_bath": e.d_bath,
                "measure_every": e.measure_every,
                "initial_state": self.initial_state,
            },
            "coupling_samples": self.coupling_samples,
            "seed": self.seed,
            "units": {"energy": "meV", "time": "ps", "hbar_meV_ps": HBAR_MEV_PS},
        })
    }
}

/// Reads and validates a configuration file, then applies `overrides`
/// (`section.key=value`).
pub fn load(path: &Path, overrides: &[String]) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path)?;
    parse(&text, overrides)
}

/// Parses configuration text. All problems are reported together.
pub fn parse(text: &str, overrides: &[String]) -> Result<RunSpec> {
    let mut issues = Vec::new();
    let mut entries = Entries::default();

    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) if !name.trim().is_empty() => section = name.trim().to_string(),
                _ => issues.push(issue(Some(line), content, "malformed section header")),
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issues.push(issue(Some(line), content, "expected `key = value`"));
            continue;
        };
        if section.is_empty() {
            issues.push(issue(Some(line), key.trim(), "key outside of any section"));
            continue;
        }
        let field = format!("{section}.{}", key.trim());
        if let Some(prev) = entries.insert(field.clone(), value.trim().to_string(), Some(line)) {
            issues.push(issue(
                Some(line),
                &field,
                &format!("duplicate key (first set on line {})", prev.unwrap_or(0)),
            ));
        }
    }
    for o in overrides {
        match o.split_once('=') {
            Some((field, value)) if field.trim().contains('.') => {
                entries.insert(field.trim().to_string(), value.trim().to_string(), None);
            }
            _ => issues.push(issue(None, o, "override must look like `section.key=value`")),
        }
    }

    let spec = build(&mut entries, &mut issues);
    for (field, (_, line)) in entries.unused() {
        issues.push(issue(line, &field, "unknown key"));
    }
    match spec {
        Some(spec) if issues.is_empty() => Ok(spec),
        _ => {
            issues.sort_by_key(|i| (i.line.unwrap_or(usize::MAX), i.field.clone()));
            Err(Error::Config(issues))
        }
    }
}

fn issue(line: Option<usize>, field: &str, message: &str) -> ConfigIssue {
    ConfigIssue {
        line,
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Default)]
struct Entries {
    values: BTreeMap<String, (String, Option<usize>)>,
    used: std::collections::BTreeSet<String>,
}

impl Entries {
    /// Stores a value; returns the previous line when the key was already set in the file.
    fn insert(&mut self, field: String, value: String, line: Option<usize>) -> Option<Option<usize>> {
        let prev = self.values.insert(field, (value, line));
        match (prev, line) {
            (Some((_, prev_line)), Some(_)) => Some(prev_line),
            _ => None,
        }
    }

    fn take(&mut self, field: &str) -> Option<(String, Option<usize>)> {
        self.used.insert(field.to_string());
        self.values.get(field).cloned()
    }

    fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.values.keys().any(|k| k.starts_with(&prefix))
    }

    fn unused(&self) -> Vec<(String, (String, Option<usize>))> {
        self.values
            .iter()
            .filter(|(k, _)| !self.used.contains(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// Typed access to the entries, recording problems instead of failing early.
struct Reader<'a> {
    entries: &'a mut Entries,
    issues: &'a mut Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn get<T>(
        &mut self,
        field: &str,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Option<T> {
        let (value, line) = self.entries.take(field)?;
        match parse(&value) {
            Ok(v) => Some(v),
            Err(message) => {
                self.issues.push(issue(line, field, &message));
                None
            }
        }
    }

    fn or<T>(
        &mut self,
        field: &str,
        default: T,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> T {
        self.get(field, parse).unwrap_or(default)
    }

    fn required<T>(
        &mut self,
        field: &str,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Option<T> {
        if self.entries.values.contains_key(field) {
            self.get(field, parse)
        } else {
            self.issues.push(issue(None, field, "missing required field"));
            None
        }
    }

    fn line_of(&self, field: &str) -> Option<usize> {
        self.entries.values.get(field).and_then(|(_, l)| *l)
    }

    fn fail(&mut self, field: &str, message: &str) {
        let line = self.line_of(field);
        self.issues.push(issue(line, field, message));
    }
}

fn build(entries: &mut Entries, issues: &mut Vec<ConfigIssue>) -> Option<RunSpec> {
    let mut r = Reader { entries, issues };

    let preset = r.required("model.preset", |s| match s.trim_matches('"') {
        "singlet_fission" => Ok(true),
        "spin_boson" => Ok(false),
        other => Err(format!(
            "unknown preset `{other}` (expected singlet_fission or spin_boson)"
        )),
    });

    let sf_default = SingletFissionSpec::default();
    let model = match preset {
        Some(true) => {
            let d = sf_default;
            Some(ModelSpec::SingletFission(SingletFissionSpec {
                delta_z: r.or("model.delta_z", d.delta_z, energy),
                delta_x: r.or("model.delta_x", d.delta_x, energy),
                omega_diag: r.or("model.omega_diag", d.omega_diag, positive_energy),
                omega_od: r.or("model.omega_od", d.omega_od, positive_energy),
                lambda_s1: r.or("model.lambda_s1", d.lambda_s1, scaled),
                lambda_tt: r.or("model.lambda_tt", d.lambda_tt, scaled),
                lambda_od: r.or("model.lambda_od", d.lambda_od, scaled),
                gamma_diag: r.or("model.gamma_diag", d.gamma_diag, positive_energy),
                gamma_od: r.or("model.gamma_od", d.gamma_od, positive_energy),
            }))
        }
        Some(false) => {
            let delta_x = r.required("model.delta_x", energy);
            let delta_z = r.required("model.delta_z", energy);
            let mut channels = Vec::new();
            for label in ["z", "x"] {
                let section = format!("channel.{label}");
                if r.entries.has_section(&section) {
                    if let Some(d) = channel_density(&mut r, &section) {
                        channels.push((label.to_string(), d));
                    }
                }
            }
            if channels.is_empty() {
                r.fail("channel", "spin_boson needs a [channel.z] or [channel.x] section");
            }
            match (delta_x, delta_z) {
                (Some(delta_x), Some(delta_z)) => Some(ModelSpec::SpinBoson(SpinBosonSpec {
                    delta_x,
                    delta_z,
                    channels,
                })),
                _ => None,
            }
        }
        None => None,
    };

    let default_max = convert(800.0, Unit::Wavenumber, Unit::MilliElectronVolt).ok()?;
    let bath = BathSpec {
        modes: r.or("bath.modes", 300, |s| count(s, 1)),
        omega_min: r.or("bath.omega_min", 0.0, nonnegative_energy),
        omega_max: r.or("bath.omega_max", default_max, positive_energy),
    };
    if bath.omega_min >= bath.omega_max {
        r.fail("bath.omega_max", "must exceed bath.omega_min");
    }

    let mapping = r.or("mapping.kind", MappingChoice::LanczosZ, |s| s.parse());
    if let Some(ModelSpec::SpinBoson(sb)) = &model {
        let has = |l: &str| sb.channels.iter().any(|(c, _)| c == l);
        let missing = match mapping {
            MappingChoice::LanczosX if !has("x") => Some("x"),
            MappingChoice::LanczosZ if !has("z") => Some("z"),
            m if m.uses_block() && !(has("x") && has("z")) => Some("x and z"),
            _ => None,
        };
        if let Some(ch) = missing {
            r.fail("mapping.kind", &format!("mapping needs channel {ch}"));
        }
    }

    let d = EvolutionConfig::default();
    let evolution = EvolutionConfig {
        dt: r.or("evolution.dt", d.dt, positive_time),
        t_final: r.or("evolution.t_final", d.t_final, nonnegative_time),
        svd_cutoff: r.or("evolution.svd_cutoff", d.svd_cutoff, |s| {
            let v = number(s)?;
            if (0.0..1.0).contains(&v) {
                Ok(v)
            } else {
                Err(format!("must lie in [0, 1) (got {v})"))
            }
        }),
        max_bond: r.or("evolution.max_bond", d.max_bond, |s| count(s, 1)),
        d_bath: r.or("evolution.d_bath", 160, |s| count(s, 2)),
        measure_every: r.or("evolution.measure_every", d.measure_every, |s| count(s, 1)),
        measure_entropy: r.or("evolution.measure_entropy", true, boolean),
    };
    let initial_state = r.or("evolution.initial_state", 0, |s| count(s, 0));
    if initial_state > 1 {
        r.fail("evolution.initial_state", "must be 0 or 1");
    }

    let output_dir = r.or("output.dir", PathBuf::from("out"), |s| {
        Ok(PathBuf::from(s.trim_matches('"')))
    });
    let coupling_samples = r.or("output.coupling_samples", 41, |s| count(s, 1));

    let sweep = if r.entries.has_section("sweep") {
        let omega_diag = r.required("sweep.omega_diag", energy_list);
        let omega_od = r.required("sweep.omega_od", energy_list);
        if !matches!(model, Some(ModelSpec::SingletFission(_)) | None) {
            r.fail("sweep", "sweeps are defined for the singlet-fission preset only");
        }
        match (omega_diag, omega_od) {
            (Some(omega_diag), Some(omega_od)) => Some(SweepSpec {
                omega_diag,
                omega_od,
            }),
            _ => None,
        }
    } else {
        None
    };
    let workers = r.or("run.workers", 1, |s| count(s, 1));
    let seed = r.or("run.seed", 0, |s| {
        s.parse::<u64>().map_err(|_| format!("expected an unsigned integer, got `{s}`"))
    });

    if let Some(ModelSpec::SingletFission(sf)) = &model {
        if mapping.uses_block() && sf.omega_diag == sf.omega_od {
            let field = if r.line_of("model.omega_od").is_some() {
                "model.omega_od"
            } else {
                "model.omega_diag"
            };
            r.fail(
                field,
                "block_lanczos needs distinct omega_diag and omega_od; equal centers make the \
                 two coupling vectors parallel (use lanczos_z)",
            );
        }
    }

    let model = model?;
    Some(RunSpec {
        model,
        bath,
        mapping,
        evolution,
        initial_state,
        output_dir,
        coupling_samples,
        sweep,
        workers,
        seed,
    })
}

fn channel_density(r: &mut Reader<'_>, section: &str) -> Option<ChannelDensity> {
    let key = |k: &str| format!("{section}.{k}");
    let kind = r.required(&key("density"), |s| match s {
        "lorentzian" | "ohmic" => Ok(s.to_string()),
        other => Err(format!("unknown density `{other}` (expected lorentzian or ohmic)")),
    })?;
    if kind == "lorentzian" {
        let centers = r.required(&key("centers"), energy_list);
        let width = r.required(&key("width"), positive_energy);
        let strength = r.or(&key("strength"), 1.0, nonnegative);
        Some(ChannelDensity::Lorentzian {
            centers: centers?,
            width: width?,
            strength,
        })
    } else {
        let strength = r.required(&key("strength"), nonnegative);
        let cutoff = r.required(&key("cutoff"), positive_energy);
        Some(ChannelDensity::Ohmic {
            strength: strength?,
            cutoff: cutoff?,
        })
    }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a number, got `{s}`")),
    }
}

fn nonnegative(s: &str) -> std::result::Result<f64, String> {
    let v = number(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be >= 0 (got {v})"))
    }
}

fn count(s: &str, min: usize) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(v) if v >= min => Ok(v),
        Ok(v) => Err(format!("must be >= {min} (got {v})")),
        Err(_) => Err(format!("expected an integer, got `{s}`")),
    }
}

fn boolean(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

/// Splits `"<number> <unit>"`.
fn with_unit(s: &str, dim: Dimension) -> std::result::Result<(f64, Unit), String> {
    let s = s.trim();
    let split = s
        .find(|c: char| c.is_whitespace())
        .ok_or_else(|| format!("`{s}` needs a unit suffix"))?;
    let (num, unit) = s.split_at(split);
    let value = number(num)?;
    let unit: Unit = unit.trim().parse().map_err(|_| format!("unknown unit `{}`", unit.trim()))?;
    if unit.dimension() != dim {
        return Err(format!("`{unit}` is not a unit of {dim:?}").to_lowercase());
    }
    Ok((value, unit))
}

fn energy(s: &str) -> std::result::Result<f64, String> {
    let (v, u) = with_unit(s, Dimension::Energy)?;
    convert(v, u, Unit::MilliElectronVolt).map_err(|e| e.to_string())
}

fn positive_energy(s: &str) -> std::result::Result<f64, String> {
    let v = energy(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be > 0 (got {v} meV)"))
    }
}

fn nonnegative_energy(s: &str) -> std::result::Result<f64, String> {
    let v = energy(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be >= 0 (got {v} meV)"))
    }
}

fn time(s: &str) -> std::result::Result<f64, String> {
    let (v, u) = with_unit(s, Dimension::Time)?;
    convert(v, u, Unit::Picosecond)
        .map(ps_to_internal)
        .map_err(|e| e.to_string())
}

fn positive_time(s: &str) -> std::result::Result<f64, String> {
    let v = time(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("must be > 0".into())
    }
}

fn nonnegative_time(s: &str) -> std::result::Result<f64, String> {
    let v = time(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err("must be >= 0".into())
    }
}

fn scaled(s: &str) -> std::result::Result<Scaled, String> {
    let t = s.trim();
    let v = if let Some(f) = t.strip_suffix("hw_diag") {
        Scaled::OfDiagonal(nonnegative(f)?)
    } else if let Some(f) = t.strip_suffix("hw_od") {
        Scaled::OfOffDiagonal(nonnegative(f)?)
    } else {
        Scaled::Absolute(nonnegative_energy(t)?)
    };
    Ok(v)
}

/// `"20, 40, 60 meV"` or `"20 meV, 300 cm-1"`.
fn energy_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err("empty list element".into());
    }
    let trailing = parts
        .last()
        .and_then(|p| p.split_whitespace().nth(1))
        .map(str::to_string);
    let values = parts
        .iter()
        .map(|p| {
            if p.contains(char::is_whitespace) {
                positive_energy(p)
            } else {
                match &trailing {
                    Some(u) => positive_energy(&format!("{p} {u}")),
                    None => Err(format!("`{p}` needs a unit suffix")),
                }
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(values)
}
