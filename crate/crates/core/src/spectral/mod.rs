//! Spectral densities and their discretization into bath modes.
//!
//! A density `J(ω)` is turned into a star-form bath `{ωᵢ, cᵢ}` with
//! `J(ω) ≈ π Σ cᵢ² δ(ω − ωᵢ)`. All channels of a model share the same set of
//! nodes so that a single orthogonal transform acts on every channel.

mod legendre;

pub use legendre::{gauss_legendre, MAX_NODES};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Closed frequency interval `[lo, hi]` in energy units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "frequency interval [{lo}, {hi}] must satisfy 0 <= lo < hi"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, w: f64) -> bool {
        w >= self.lo && w <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `L(ω) = 2λΩ²ηω / ((ω² − Ω²)² + η²ω²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    /// Ω, the peak position.
    pub center: f64,
    /// η, the damping (full width of the peak near Ω).
    pub width: f64,
    /// λ, dimensionless prefactor.
    pub strength: f64,
}

impl Lorentzian {
    /// The singlet-fission form `4γΩ²ω / ((ω² − Ω²)² + 4γ²ω²)`, i.e. η = 2γ, λ = 1.
    pub fn from_relaxation_rate(center: f64, gamma: f64) -> Self {
        Lorentzian {
            center,
            width: 2.0 * gamma,
            strength: 1.0,
        }
    }

    pub fn eval(&self, w: f64) -> f64 {
        let Lorentzian {
            center,
            width,
            strength,
        } = *self;
        let d = w * w - center * center;
        let den = d * d + width * width * w * w;
        if den == 0.0 {
            return 0.0;
        }
        2.0 * strength * center * center * width * w / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityShape {
    LorentzianSum(Vec<Lorentzian>),
    /// `J(ω) = λ ω exp(−ω/ω_c)`.
    OhmicExponential { strength: f64, cutoff: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    shape: DensityShape,
    support: Interval,
}

impl SpectralDensity {
    pub fn new(shape: DensityShape, support: Interval) -> Result<Self> {
        match &shape {
            DensityShape::LorentzianSum(terms) => {
                for (i, l) in terms.iter().enumerate() {
                    let ok = [l.center, l.width, l.strength].iter().all(|v| v.is_finite())
                        && l.center >= 0.0
                        && l.width > 0.0
                        && l.strength >= 0.0;
                    if !ok {
                        return Err(Error::InvalidParameter(format!(
                            "Lorentzian term {i} needs finite Ω >= 0, η > 0, λ >= 0 (got {l:?})"
                        )));
                    }
                }
            }
            DensityShape::OhmicExponential { strength, cutoff } => {
                if !(strength.is_finite() && cutoff.is_finite()) || *strength < 0.0 || *cutoff <= 0.0
                {
                    return Err(Error::InvalidParameter(format!(
                        "Ohmic density needs finite λ >= 0 and ω_c > 0 (got λ={strength}, ω_c={cutoff})"
                    )));
                }
            }
        }
        Ok(SpectralDensity { shape, support })
    }

    pub fn lorentzian_sum(terms: Vec<Lorentzian>, support: Interval) -> Result<Self> {
        Self::new(DensityShape::LorentzianSum(terms), support)
    }

    pub fn ohmic_exponential(strength: f64, cutoff: f64, support: Interval) -> Result<Self> {
        Self::new(DensityShape::OhmicExponential { strength, cutoff }, support)
    }

    pub fn shape(&self) -> &DensityShape {
        &self.shape
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    /// Evaluates `J(ω)`; zero outside the support.
    pub fn eval(&self, w: f64) -> f64 {
        if !self.support.contains(w) {
            return 0.0;
        }
        let v = match &self.shape {
            DensityShape::LorentzianSum(terms) => terms.iter().map(|l| l.eval(w)).sum(),
            DensityShape::OhmicExponential { strength, cutoff } => {
                strength * w * (-w / cutoff).exp()
            }
        };
        v.max(0.0)
    }
}

/// Star-form bath: shared nodes plus one coupling vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedBath {
    frequencies: Vec<f64>,
    channels: Vec<BathChannel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathChannel {
    pub label: String,
    pub couplings: Vec<f64>,
}

impl DiscretizedBath {
    /// Builds a bath from explicit data. Frequencies must be strictly
    /// increasing and positive and each channel must have matching length.
    pub fn from_parts(frequencies: Vec<f64>, channels: Vec<BathChannel>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::InvalidParameter("bath has no modes".into()));
        }
        if frequencies.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidParameter(
                "bath frequencies must be finite and positive".into(),
            ));
        }
        if frequencies.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidParameter(
                "bath frequencies must be strictly increasing".into(),
            ));
        }
        for ch in &channels {
            if ch.couplings.len() != frequencies.len() {
                return Err(Error::DimensionMismatch(format!(
                    "channel `{}` has {} couplings for {} modes",
                    ch.label,
                    ch.couplings.len(),
                    frequencies.len()
                )));
            }
            if ch.couplings.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "channel `{}` has non-finite couplings",
                    ch.label
                )));
            }
        }
        for (i, a) in channels.iter().enumerate() {
            if channels[..i].iter().any(|b| b.label == a.label) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate channel label `{}`",
                    a.label
                )));
            }
        }
        Ok(DiscretizedBath {
            frequencies,
            channels,
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn channels(&self) -> &[BathChannel] {
        &self.channels
    }

    pub fn channel(&self, label: &str) -> Result<&[f64]> {
        self.channels
            .iter()
            .find(|c| c.label == label)
            .map(|c| c.couplings.as_slice())
            .ok_or_else(|| Error::UnknownChannel(label.to_string()))
    }
}

/// Gauss–Legendre discretization of one density on `interval` with `modes`
/// nodes. Returns `(frequencies, couplings)` with
/// `cᵢ = sqrt(J(ωᵢ) wᵢ (ω_max − ω_min) / (2π))`.
pub fn discretize(
    density: &SpectralDensity,
    modes: usize,
    interval: Interval,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let frequencies = nodes_on(modes, interval)?;
    let couplings = couplings_on(density, modes, interval)?;
    Ok((frequencies, couplings))
}

/// Discretizes several channels on one shared set of nodes.
pub fn discretize_shared(
    channels: &[(&str, &SpectralDensity)],
    modes: usize,
    interval: Interval,
) -> Result<DiscretizedBath> {
    for (label, density) in channels {
        if density.support() != interval {
            return Err(Error::InvalidParameter(format!(
                "channel `{label}` has support [{}, {}] but the shared interval is [{}, {}]",
                density.support().lo,
                density.support().hi,
                interval.lo,
                interval.hi
            )));
        }
    }
    let frequencies = nodes_on(modes, interval)?;
    let channels = channels
        .iter()
        .map(|(label, density)| {
            Ok(BathChannel {
                label: label.to_string(),
                couplings: couplings_on(density, modes, interval)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DiscretizedBath::from_parts(frequencies, channels)
}

fn nodes_on(modes: usize, interval: Interval) -> Result<Vec<f64>> {
    let (x, _) = gauss_legendre(modes)?;
    let half = 0.5 * interval.width();
    let mid = 0.5 * (interval.lo + interval.hi);
    Ok(x.into_iter().map(|x| mid + half * x).collect())
}

fn couplings_on(density: &SpectralDensity, modes: usize, interval: Interval) -> Result<Vec<f64>> {
    let (x, w) = gauss_legendre(modes)?;
    let half = 0.5 * interval.width();
    let mid = 0.5 * (interval.lo + interval.hi);
    Ok(x.iter()
        .zip(&w)
        .map(|(x, w)| {
            let omega = mid + half * x;
            (density.eval(omega) * w * interval.width() / (2.0 * PI)).sqrt()
        })
        .collect())
}
