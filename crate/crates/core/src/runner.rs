//! Orchestration of single runs, mapping comparisons and parameter sweeps.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::chainmap::{ChainMapping, TimeDependentCouplings};
use crate::config::{MappingChoice, ModelSpec, RunSpec};
use crate::error::{Error, Result};
use crate::evolve::{initial_state, run_trajectory, Trajectory};
use crate::model::{build_singlet_fission, build_spin_boson, OpenSystemModel};
use crate::output::{self, fmt};
use crate::spectral::discretize_shared;
use crate::units::internal_to_ps;

/// Builds the model (bath included) described by a spec.
pub fn build_model(spec: &RunSpec) -> Result<Arc<OpenSystemModel>> {
    let model = match &spec.model {
        ModelSpec::SingletFission(sf) => {
            let params = sf.params(&spec.bath);
            build_singlet_fission(&params, params.bath()?)?
        }
        ModelSpec::SpinBoson(sb) => {
            let support = spec.bath.interval();
            let densities = sb
                .channels
                .iter()
                .map(|(l, d)| Ok((l.as_str(), d.density(support)?)))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<(&str, &_)> = densities.iter().map(|(l, d)| (*l, d)).collect();
            let bath = discretize_shared(&refs, spec.bath.modes, support)?;
            build_spin_boson(sb.delta_x, sb.delta_z, bath)?
        }
    };
    Ok(Arc::new(model))
}

/// Builds the mapping of one (non-compare) choice.
pub fn build_mapping(model: &OpenSystemModel, choice: MappingChoice) -> Result<Arc<ChainMapping>> {
    let seed = choice.seed().ok_or_else(|| {
        Error::InvalidParameter("`compare` names two mappings, pick one".into())
    })?;
    Ok(Arc::new(model.mapping(&seed)?))
}

/// Result of one trajectory written to `dir`.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub mapping: MappingChoice,
    pub dir: PathBuf,
    pub trajectory: Trajectory,
}

impl RunOutcome {
    /// Time average of the summed bond entropies.
    pub fn mean_total_entropy(&self) -> f64 {
        let e = &self.trajectory.entropies;
        if e.is_empty() {
            return 0.0;
        }
        e.iter().map(|row| row.iter().sum::<f64>()).sum::<f64>() / e.len() as f64
    }
}

/// Maximum of `|P_a(t) − P_b(t)|` for system state 0 and the time (ps) where it occurs.
pub fn max_population_difference(a: &Trajectory, b: &Trajectory) -> (f64, f64) {
    a.populations
        .iter()
        .zip(&b.populations)
        .zip(&a.times)
        .map(|((p, q), t)| ((p[0] - q[0]).abs(), internal_to_ps(*t)))
        .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

/// Runs the spec into `out`. A compare spec writes one subdirectory per
/// mapping plus `comparison.csv` and `comparison.json`.
pub fn run(spec: &RunSpec, out: &Path) -> Result<Vec<RunOutcome>> {
    std::fs::create_dir_all(out)?;
    if spec.mapping != MappingChoice::Compare {
        return Ok(vec![run_single(spec, spec.mapping, out)?]);
    }
    let outcomes = MappingChoice::Compare
        .runs()
        .into_iter()
        .map(|m| run_single(spec, m, &out.join(m.name())))
        .collect::<Result<Vec<_>>>()?;
    write_comparison(out, &outcomes[0], &outcomes[1])?;
    Ok(outcomes)
}

fn write_comparison(out: &Path, a: &RunOutcome, b: &RunOutcome) -> Result<()> {
    use std::io::Write;
    let (max_diff, at) = max_population_difference(&a.trajectory, &b.trajectory);
    let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("comparison.csv"))?);
    writeln!(
        w,
        "t_ps,P_state0_{},P_state0_{},abs_diff",
        a.mapping.name(),
        b.mapping.name()
    )?;
    for ((t, p), q) in a
        .trajectory
        .times
        .iter()
        .zip(&a.trajectory.populations)
        .zip(&b.trajectory.populations)
    {
        writeln!(
            w,
            "{},{},{},{}",
            fmt(internal_to_ps(*t)),
            fmt(p[0]),
            fmt(q[0]),
            fmt((p[0] - q[0]).abs())
        )?;
    }
    w.flush()?;
    let (ea, eb) = (a.mean_total_entropy(), b.mean_total_entropy());
    output::write_json(
        &out.join("comparison.json"),
        &json!({
            "mappings": [a.mapping.name(), b.mapping.name()],
            "max_abs_delta_P_state0": max_diff,
            "time_of_max_ps": at,
            "mean_total_entropy": { a.mapping.name(): ea, b.mapping.name(): eb },
            "second_has_higher_entropy": eb >= ea,
        }),
    )
}

/// One mapping, one trajectory, all files.
pub fn run_single(spec: &RunSpec, choice: MappingChoice, dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = Manifest::new(spec, choice);
    let result = (|| {
        let start = Instant::now();
        let model = build_model(spec)?;
        output::write_bath(&dir.join("bath.csv"), model.bath())?;
        manifest.file("bath.csv");
        let mapping = build_mapping(&model, choice)?;
        output::write_bandcoeffs(&dir.join("bandcoeffs.csv"), &mapping)?;
        manifest.file("bandcoeffs.csv");
        let couplings = TimeDependentCouplings::new(mapping.clone(), model.bath())?;
        let times = output::time_grid(spec.evolution.t_final, spec.coupling_samples);
        output::write_couplings(&dir.join("couplings.csv"), &couplings, &times)?;
        manifest.file("couplings.csv");
        manifest.timing("setup_seconds", start.elapsed().as_secs_f64());

        let start = Instant::now();
        let initial = initial_state(&model, spec.initial_state, spec.evolution.d_bath)?;
        let traj = run_trajectory(model, mapping, initial, &spec.evolution)?;
        manifest.timing("evolution_seconds", start.elapsed().as_secs_f64());
        output::write_populations(&dir.join("populations.csv"), &traj)?;
        manifest.file("populations.csv");
        output::write_entropy(&dir.join("entropy.csv"), &traj)?;
        manifest.file("entropy.csv");
        manifest.summary(&traj);
        Ok(traj)
    })();
    manifest.finish(result.as_ref().err());
    output::write_json(&dir.join("run_manifest.json"), &manifest.value)?;
    result.map(|trajectory| RunOutcome {
        mapping: choice,
        dir: dir.to_path_buf(),
        trajectory,
    })
}

struct Manifest {
    value: Value,
    files: Vec<String>,
}

impl Manifest {
    fn new(spec: &RunSpec, choice: MappingChoice) -> Self {
        let mut value = json!({
            "program": "bathchain",
            "version": env!("CARGO_PKG_VERSION"),
            "parameters": spec.manifest(),
            "timings": {},
        });
        value["parameters"]["mapping"] = json!(choice.name());
        Manifest {
            value,
            files: Vec::new(),
        }
    }

    fn file(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    fn timing(&mut self, key: &str, seconds: f64) {
        self.value["timings"][key] = json!(seconds);
    }

    fn summary(&mut self, traj: &Trajectory) {
        let last = traj.populations.len() - 1;
        self.value["result"] = json!({
            "final_time_ps": internal_to_ps(traj.times[last]),
            "final_populations": traj.populations[last],
            "max_bond_dim": traj.bond_dims.iter().flatten().max(),
            "discarded_weight": traj.discarded_weight[last],
            "records": traj.times.len(),
        });
    }

    fn finish(&mut self, error: Option<&Error>) {
        self.value["files"] = json!(self.files);
        match error {
            None => self.value["status"] = json!("complete"),
            Some(e) => {
                self.value["status"] = json!("partial");
                self.value["error"] = json!(e.to_string());
            }
        }
    }
}

/// Writes only the mapping data: bath, band coefficients and the coupling
/// wave grid for every mapping of the spec.
pub fn couplings(spec: &RunSpec, out: &Path) -> Result<()> {
    let model = build_model(spec)?;
    std::fs::create_dir_all(out)?;
    output::write_bath(&out.join("bath.csv"), model.bath())?;
    let times = output::time_grid(spec.evolution.t_final, spec.coupling_samples);
    for choice in spec.mapping.runs() {
        let dir = if spec.mapping == MappingChoice::Compare {
            out.join(choice.name())
        } else {
            out.to_path_buf()
        };
        std::fs::create_dir_all(&dir)?;
        let mapping = build_mapping(&model, choice)?;
        output::write_bandcoeffs(&dir.join("bandcoeffs.csv"), &mapping)?;
        let tc = TimeDependentCouplings::new(mapping, model.bath())?;
        output::write_couplings(&dir.join("couplings.csv"), &tc, &times)?;
    }
    Ok(())
}

/// Writes `bandcoeffs.csv` for every mapping of the spec.
pub fn bandcoeffs(spec: &RunSpec, out: &Path) -> Result<()> {
    let model = build_model(spec)?;
    std::fs::create_dir_all(out)?;
    for choice in spec.mapping.runs() {
        let name = if spec.mapping == MappingChoice::Compare {
            format!("bandcoeffs_{}.csv", choice.name())
        } else {
            "bandcoeffs.csv".to_string()
        };
        let mapping = build_mapping(&model, choice)?;
        output::write_bandcoeffs(&out.join(name), &mapping)?;
    }
    Ok(())
}

/// Outcome of one sweep point.
#[derive(Debug)]
pub struct SweepPoint {
    pub omega_diag: f64,
    pub omega_od: f64,
    pub dir: PathBuf,
    pub result: Result<Vec<f64>>,
}

/// Runs every grid point on a pool of `workers` threads. Failed points are
/// recorded in `summary.csv` and do not stop the others.
pub fn sweep(spec: &RunSpec, out: &Path, workers: usize) -> Result<Vec<SweepPoint>> {
    let axes = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("the spec has no [sweep] section".into()))?;
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let points: Vec<SweepPoint> = pool.install(|| {
        axes.points()
            .into_par_iter()
            .map(|(d, od)| {
                let dir = out.join(format!("omega_diag_{d}meV_omega_od_{od}meV"));
                let result = spec.at_point(d, od).and_then(|s| run(&s, &dir)).map(|o| {
                    o[0].trajectory.populations.last().cloned().unwrap_or_default()
                });
                SweepPoint {
                    omega_diag: d,
                    omega_od: od,
                    dir,
                    result,
                }
            })
            .collect()
    });
    write_sweep_summary(&out.join("summary.csv"), &points, internal_to_ps(spec.evolution.t_final))?;
    Ok(points)
}

fn write_sweep_summary(path: &Path, points: &[SweepPoint], t_final_ps: f64) -> Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "omega_diag_meV,omega_od_meV,status,t_final_ps,P_state0_final,P_state1_final,decay_rank,error"
    )?;
    for p in points {
        match &p.result {
            Ok(pop) => {
                // 1 = lowest final population of state 0 among points sharing omega_od.
                let rank = 1 + points
                    .iter()
                    .filter(|q| q.omega_od == p.omega_od)
                    .filter(|q| matches!(&q.result, Ok(r) if r[0] < pop[0]))
                    .count();
                writeln!(
                    w,
                    "{},{},ok,{},{},{},{rank},",
                    fmt(p.omega_diag),
                    fmt(p.omega_od),
                    fmt(t_final_ps),
                    fmt(pop[0]),
                    fmt(pop[1])
                )?;
            }
            Err(e) => {
                let msg = e.to_string().replace(['\n', ','], " ");
                writeln!(
                    w,
                    "{},{},failed,{},,,,{msg}",
                    fmt(p.omega_diag),
                    fmt(p.omega_od),
                    fmt(t_final_ps)
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
