//! Renormalized tunneling, spectral functions and population dynamics of a
//! two-level system coupled to an Ohmic spin or boson bath.

pub mod correlation;
pub mod dynamics;
pub mod error;
mod guard;
pub mod model;
pub mod niba;
pub mod numerics;
pub mod renorm;
pub mod reproduce;
pub mod spectral;

pub use correlation::{shiba_check, shiba_table, ShibaReport, SpectralWeight, REFERENCE_TABLE};
pub use dynamics::{
    classify_dynamics, coherence_elements, critical_coupling, pole_data, population_boson, population_difference,
    tau_x_expectation, wwa_population, Classification, CoherenceElements, DynamicsResult, Method, PhasePoint, PoleData,
    TauX, TimeSeries,
};
pub use error::{Error, Result};
pub use model::{BathKind, ModelParams};
pub use niba::{niba_boundary, niba_kernel, niba_population, NibaKernel};
pub use renorm::{ground_state_energy, solve, solve_eta_boson, solve_eta_spin, GroundEnergy, RenormalizedSystem};
pub use reproduce::{reproduce_all, ReproduceOptions, ReproduceReport};
pub use spectral::{BosonSelfEnergy, SelfEnergy, SpinSelfEnergy};
