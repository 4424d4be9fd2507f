//! Plot-ready CSV files (long format, 17 significant digits) and the JSON run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::Value;

use crate::chainmap::{ChainMapping, TimeDependentCouplings};
use crate::error::Result;
use crate::evolve::Trajectory;
use crate::spectral::DiscretizedBath;
use crate::units::internal_to_ps;

/// Formats a float with 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `t_ps, P_state0, P_state1, ...`
pub fn write_populations(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    let states = traj.populations.first().map_or(0, Vec::len);
    let header: Vec<String> = std::iter::once("t_ps".to_string())
        .chain((0..states).map(|s| format!("P_state{s}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, p) in traj.times.iter().zip(&traj.populations) {
        let row: Vec<String> = std::iter::once(fmt(internal_to_ps(*t)))
            .chain(p.iter().map(|x| fmt(*x)))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// `t_ps, bond, S_nats, bond_dim`; bond `b` joins sites `b` and `b + 1`.
pub fn write_entropy(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t_ps,bond,S_nats,bond_dim")?;
    for (i, t) in traj.times.iter().enumerate() {
        let t = fmt(internal_to_ps(*t));
        let dims = &traj.bond_dims[i];
        let entropies = traj.entropies.get(i);
        for (b, dim) in dims.iter().enumerate() {
            let s = entropies.map_or(String::new(), |e| fmt(e[b]));
            writeln!(w, "{t},{b},{s},{dim}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t_ps, mode, channel, abs_coupling` on the given internal times.
pub fn write_couplings(path: &Path, couplings: &TimeDependentCouplings, times: &[f64]) -> Result<()> {
    let labels: Vec<String> = couplings.channel_labels().map(str::to_string).collect();
    let grids = labels
        .iter()
        .map(|l| couplings.coupling_wave_grid(l, times))
        .collect::<Result<Vec<_>>>()?;
    let mut w = create(path)?;
    writeln!(w, "t_ps,mode,channel,abs_coupling")?;
    for (i, t) in times.iter().enumerate() {
        let t = fmt(internal_to_ps(*t));
        for (label, grid) in labels.iter().zip(&grids) {
            for (k, c) in grid[i].iter().enumerate() {
                writeln!(w, "{t},{k},{label},{}", fmt(*c))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `index, alpha_meV, beta_meV, kappa_meV`.
pub fn write_bandcoeffs(path: &Path, mapping: &ChainMapping) -> Result<()> {
    let band = mapping.band();
    let mut w = create(path)?;
    writeln!(w, "index,alpha_meV,beta_meV,kappa_meV")?;
    for k in 0..band.alpha.len() {
        writeln!(
            w,
            "{k},{},{},{}",
            fmt(band.alpha[k]),
            fmt(band.beta[k]),
            fmt(band.kappa[k])
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `index, omega_meV, coupling_channel0_meV, coupling_channel1_meV, ...`
pub fn write_bath(path: &Path, bath: &DiscretizedBath) -> Result<()> {
    let mut w = create(path)?;
    let mut header = vec!["index".to_string(), "omega_meV".to_string()];
    header.extend((0..bath.channels().len()).map(|c| format!("coupling_channel{c}_meV")));
    writeln!(w, "{}", header.join(","))?;
    for (i, omega) in bath.frequencies().iter().enumerate() {
        let mut row = vec![i.to_string(), fmt(*omega)];
        row.extend(bath.channels().iter().map(|c| fmt(c.couplings[i])));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `n` evenly spaced times on `[0, t_final]`.
pub fn time_grid(t_final: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|i| t_final * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt(1.0), "1.0000000000000000e0");
        assert_eq!(fmt(0.1).parse::<f64>().unwrap(), 0.1);
        let x = std::f64::consts::PI;
        assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn grid_endpoints() {
        let g = time_grid(2.0, 5);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(time_grid(2.0, 1), vec![0.0]);
    }

    #[test]
    fn population_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            populations: vec![vec![1.0, 0.0], vec![0.75, 0.25]],
            entropies: vec![vec![0.0], vec![0.5]],
            bond_dims: vec![vec![1], vec![2]],
            discarded_weight: vec![0.0, 0.0],
            step_seconds: vec![0.0, 0.0],
        };
        let p = dir.path().join("populations.csv");
        write_populations(&p, &traj).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t_ps,P_state0,P_state1");
        assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
        let e = dir.path().join("entropy.csv");
        write_entropy(&e, &traj).unwrap();
        let text = std::fs::read_to_string(&e).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().ends_with(",0,5.0000000000000000e-1,2"));
    }
}
