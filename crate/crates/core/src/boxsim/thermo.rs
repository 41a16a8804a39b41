use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::basis::BoxSpec;
use super::potential::FourierPotential;
use super::spectral::{relative_energy, SpectralOutcome};
use crate::error::Result;
use crate::physcore::PhysicsParams;
use crate::Budget;

/// A physical potential that can be placed in boxes of any size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Profile {
    GaussianBump { amplitude: f64, sigma: f64 },
    PeierlsPacket { amplitude: f64, center: f64, width: f64 },
    Zero,
}

impl Profile {
    pub fn in_box(&self, l: f64, d: usize) -> Result<FourierPotential> {
        match *self {
            Profile::GaussianBump { amplitude, sigma } => FourierPotential::gaussian_bump(l, d, amplitude, sigma),
            Profile::PeierlsPacket { amplitude, center, width } => {
                FourierPotential::peierls_packet(l, d, amplitude, center, width)
            }
            Profile::Zero => FourierPotential::zero(l, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoLevel {
    pub l: f64,
    pub n_max: i64,
    pub relative_energy: f64,
    pub relative_energy_box_density: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoSweep {
    pub levels: Vec<ThermoLevel>,
    /// `|E(L_{j+1}) - E(L_j)|`.
    pub gaps: Vec<f64>,
}

/// `n_max` giving a momentum cutoff of at least `p_cut` in a box of side `l`.
pub fn n_max_for_cutoff(l: f64, p_cut: f64) -> i64 {
    ((p_cut * l / (2.0 * PI)).ceil() as i64).max(1)
}

/// Relative energies of the same physical profile in boxes of side `ls`,
/// all with the momentum cutoff `p_cut`.
pub fn thermo_sweep(profile: &Profile, params: &PhysicsParams, ls: &[f64], p_cut: f64) -> Result<ThermoSweep> {
    let cap = Budget::from_env().basis;
    let levels = ls
        .iter()
        .map(|&l| {
            let n_max = n_max_for_cutoff(l, p_cut);
            let b = BoxSpec::with_cap(params.d, l, n_max, cap)?;
            let v = profile.in_box(l, params.d)?;
            let out: SpectralOutcome = relative_energy(&b, &v, params)?;
            Ok(ThermoLevel {
                l,
                n_max,
                relative_energy: out.relative_energy,
                relative_energy_box_density: out.relative_energy_box_density,
                degenerate: out.degenerate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps = levels.windows(2).map(|w| (w[1].relative_energy - w[0].relative_energy).abs()).collect();
    Ok(ThermoSweep { levels, gaps })
}
