//! Plane-wave spectral engine on the periodic box `[-L/2, L/2)^d`.

mod basis;
mod liyau;
mod perturbation;
mod potential;
mod spectral;
mod temperature;
mod thermo;

pub use basis::{fermi_sea, norm2, BoxSpec};
pub use liyau::{indicator_matrix, li_yau_check, LiYauRecord, SubBox};
pub use perturbation::{
    check_fermi_level, linear_slope, peierls_box_length, peierls_scan, second_order_box,
    second_order_continuum_1d, PeierlsLevel, PeierlsScan,
};
pub use potential::{cube, FourierPotential};
pub use spectral::{
    build_hamiltonian, eigh, hermitian_deviation, neg_riesz_sum, outcome_from_spectrum, potential_on_grid,
    relative_energy, relative_energy_with, relative_kinetic, trace_relation_check, trace_relation_terms,
    DensityGrid, Eigh, RunOptions, SpectralOutcome, Spectrum, TraceRelation, BOUNDARY_WEIGHT_TOL,
    DEGENERACY_TOL,
};
pub use temperature::{
    fermi_f, fermi_f_prime, fermi_f_second, free_energy_from_spectrum, free_energy_t, free_energy_t_both,
    FreeEnergyT,
};
pub use thermo::{n_max_for_cutoff, thermo_sweep, Profile, ThermoLevel, ThermoSweep};
