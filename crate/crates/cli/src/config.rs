//! Experiment configuration files.
//!
//! A config is one JSON document. Unknown fields are rejected everywhere.
//! Potentials are given either as explicit Fourier modes (one half of the
//! spectrum is enough, the partner `c(-n) = conj(c(n))` is filled in) or as a
//! named family that expands to modes once the box is known.

use std::collections::BTreeMap;
use std::path::Path;

use ltlab_core::boxsim::{FourierPotential, Profile, SubBox};
use ltlab_core::PhysicsParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physics: Option<PhysicsSection>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_: Option<BoxSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub d: usize,
    #[serde(default = "one")]
    pub q: u32,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

fn one() -> u32 {
    1
}

impl PhysicsSection {
    pub fn params(&self) -> CliResult<PhysicsParams> {
        let p = PhysicsParams::new(self.d, self.q, self.mu)?;
        match self.temperature {
            Some(t) if !(t.is_finite() && t > 0.0) => {
                Err(CliError::Config(format!("temperature must be > 0, got {t}")))
            }
            _ => Ok(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub l: f64,
    #[serde(default)]
    pub n_max: NMax,
    /// Repeat the run with twice the cutoff and report the change.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_cutoff: Option<bool>,
}

/// Either a fixed cutoff or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NMax {
    Fixed(i64),
    #[default]
    Auto,
}

impl Serialize for NMax {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NMax::Fixed(n) => s.serialize_i64(*n),
            NMax::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for NMax {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) if n >= 1 => Ok(NMax::Fixed(n)),
            Raw::Int(n) => Err(serde::de::Error::custom(format!("n_max must be >= 1, got {n}"))),
            Raw::Str(s) if s == "auto" => Ok(NMax::Auto),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("n_max must be an integer or \"auto\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub n: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Modes { modes: Vec<Mode> },
    Cosine { amplitude: f64, mode: Vec<i64> },
    GaussianBump { amplitude: f64, sigma: f64 },
    PeierlsPacket { amplitude: f64, center: f64, width: f64 },
    Zero {},
}

impl PotentialSpec {
    pub fn expand(&self, l: f64, d: usize) -> CliResult<FourierPotential> {
        let v = match self {
            PotentialSpec::Modes { modes } => {
                for m in modes {
                    if m.n.len() != d {
                        return Err(CliError::Config(format!("mode {:?} in dimension {d}", m.n)));
                    }
                    if !(m.re.is_finite() && m.im.is_finite()) {
                        return Err(CliError::Config(format!("mode {:?} has a non-finite coefficient", m.n)));
                    }
                }
                let half: Vec<(Vec<i64>, Complex64)> =
                    modes.iter().map(|m| (m.n.clone(), Complex64::new(m.re, m.im))).collect();
                FourierPotential::from_half_spectrum(l, d, &half)?
            }
            PotentialSpec::Cosine { amplitude, mode } => FourierPotential::cosine(l, d, *amplitude, mode)?,
            PotentialSpec::GaussianBump { amplitude, sigma } => {
                FourierPotential::gaussian_bump(l, d, *amplitude, *sigma)?
            }
            PotentialSpec::PeierlsPacket { amplitude, center, width } => {
                FourierPotential::peierls_packet(l, d, *amplitude, *center, *width)?
            }
            PotentialSpec::Zero {} => FourierPotential::zero(l, d)?,
        };
        Ok(v)
    }

    /// Box-independent form, needed when one potential is placed in boxes of several sizes.
    pub fn profile(&self) -> CliResult<Profile> {
        match *self {
            PotentialSpec::GaussianBump { amplitude, sigma } => Ok(Profile::GaussianBump { amplitude, sigma }),
            PotentialSpec::PeierlsPacket { amplitude, center, width } => {
                Ok(Profile::PeierlsPacket { amplitude, center, width })
            }
            PotentialSpec::Zero {} => Ok(Profile::Zero),
            _ => Err(CliError::Config(
                "this sweep needs a box-independent potential (gaussian-bump, peierls-packet or zero)".into(),
            )),
        }
    }
}

/// Explicit mode list of a potential, both halves of the spectrum.
pub fn expanded_modes(v: &FourierPotential) -> Value {
    let modes: Vec<Value> = v
        .coeffs
        .iter()
        .map(|(n, c)| json!({ "n": n, "re": c.re, "im": c.im }))
        .collect();
    json!({ "family": "modes", "modes": modes })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Level parameters: box sides, packet widths, dimensions or temperatures
    /// depending on the sweep kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    /// Momentum cutoff used to pick `n_max` per level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_cut: Option<f64>,
    /// Lattice points per packet width (peierls).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    /// Sub-box for the li-yau sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<SubBox>,
    /// Upper momentum of the continuum integral (second-order).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Write the density of the perturbed Fermi sea as CSV (box-run).
    #[serde(default)]
    pub density_csv: bool,
    /// Write two-column plot data files.
    #[serde(default = "yes")]
    pub plots: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { density_csv: false, plots: true }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn physics(&self) -> CliResult<PhysicsSection> {
        self.physics.ok_or_else(|| CliError::Config("missing `physics` section".into()))
    }

    pub fn box_section(&self) -> CliResult<BoxSection> {
        self.box_.ok_or_else(|| CliError::Config("missing `box` section".into()))
    }

    /// The config as JSON, with the potential replaced by `expanded` when given.
    pub fn echo(&self, expanded: Option<&FourierPotential>) -> Value {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let (Some(p), Value::Object(map)) = (expanded, &mut v) {
            map.insert("potential".into(), expanded_modes(p));
        }
        v
    }
}

/// Named tolerances as a map, for reports.
pub fn tolerances(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_modes_and_families() {
        let c = ExperimentConfig::parse(
            r#"{"physics": {"d": 1, "mu": 1.0}, "box": {"l": 10.0, "n_max": 20},
                "potential": {"family": "modes", "modes": [{"n": [1], "re": 0.5}]}}"#,
        )
        .unwrap();
        assert_eq!(c.physics.unwrap().q, 1);
        assert_eq!(c.box_.unwrap().n_max, NMax::Fixed(20));
        let v = c.potential.unwrap().expand(10.0, 1).unwrap();
        assert_eq!(v.coeffs.len(), 2);
        assert_eq!(v.coeffs[&vec![-1]], Complex64::new(0.5, 0.0));

        let c = ExperimentConfig::parse(r#"{"box": {"l": 3.0, "n_max": "auto"}, "potential": {"family": "zero"}}"#)
            .unwrap();
        assert_eq!(c.box_.unwrap().n_max, NMax::Auto);
        let c = ExperimentConfig::parse(r#"{"potential": {"family": "gaussian-bump", "amplitude": 1, "sigma": 2}}"#)
            .unwrap();
        assert!(c.potential.unwrap().profile().is_ok());
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(ExperimentConfig::parse(r#"{"physic": {}}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"physics": {"d": 1, "mu": 1, "extra": 0}}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"potential": {"family": "zero", "amplitude": 1}}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"potential": {"family": "square"}}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"box": {"l": 1, "n_max": "many"}}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"box": {"l": 1, "n_max": 0}}"#).is_err());
    }

    #[test]
    fn inconsistent_halves_rejected() {
        let spec = PotentialSpec::Modes {
            modes: vec![Mode { n: vec![2], re: 1.0, im: 0.5 }, Mode { n: vec![-2], re: 1.0, im: 0.5 }],
        };
        assert!(spec.expand(5.0, 1).is_err());
        let ok = PotentialSpec::Modes {
            modes: vec![Mode { n: vec![2], re: 1.0, im: 0.5 }, Mode { n: vec![-2], re: 1.0, im: -0.5 }],
        };
        assert!(ok.expand(5.0, 1).is_ok());
        let wrong_dim = PotentialSpec::Modes { modes: vec![Mode { n: vec![1, 1], re: 1.0, im: 0.0 }] };
        assert!(wrong_dim.expand(5.0, 1).is_err());
    }

    #[test]
    fn echo_expands_families() {
        let c = ExperimentConfig {
            potential: Some(PotentialSpec::Cosine { amplitude: 2.0, mode: vec![3] }),
            ..Default::default()
        };
        let v = c.potential.as_ref().unwrap().expand(7.0, 1).unwrap();
        let echo = c.echo(Some(&v));
        assert_eq!(echo["potential"]["family"], "modes");
        assert_eq!(echo["potential"]["modes"].as_array().unwrap().len(), 2);
        assert_eq!(echo["potential"]["modes"][0]["n"], json!([-3]));
    }
}
