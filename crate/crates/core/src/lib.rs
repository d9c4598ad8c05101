//! Numerical toolkit for ring-shaped multi-peak states of a three-component
//! Hartree (Choquard) system in three dimensions.
//!
//! The crate is organised bottom-up:
//!
//! * [`radial`], [`ground_state`], [`potential`]: the radial ground state of
//!   `-Δw + w = (|x|^{-1} * w²) w` and Newtonian potentials of radial densities.
//! * [`field`], [`convolution`]: cubic 3D grids and the free-space Coulomb
//!   convolution used by the grid energy.
//! * [`profiles`], [`configurations`]: system parameters, the synchronized
//!   bump pair and the two-ring peak geometry.
//! * [`ring_kernel`], [`energy`], [`reduced`], [`landscape`]: ring sums, the
//!   full and pairwise energies, the reduced constants and the reduced
//!   landscape with its maximizer.
//! * [`run`]: run configuration and end-to-end reports.

pub mod configurations;
pub mod convolution;
pub mod energy;
pub mod error;
pub mod field;
pub mod ground_state;
pub mod io;
pub mod landscape;
pub mod nelder_mead;
pub mod potential;
pub mod profiles;
pub mod quad;
pub mod radial;
pub mod reduced;
pub mod ring_kernel;
pub mod run;

pub use configurations::{PeakConfig, SignPattern, SymmetryReport, Variant};
pub use convolution::FreeSpaceConvolver;
pub use energy::{AnsatzFields, BumpKit, EnergyBreakdown, GridSpec, PairwiseEnergy};
pub use error::{Error, Result};
pub use field::Field3D;
pub use ground_state::{GroundStateStats, SolverOptions};
pub use landscape::{CaseVerdict, MaximizerResult, SearchRegion, TheoremCase};
pub use potential::NewtonianPotential;
pub use profiles::{PotentialSpec, SyncCoefficients, SystemParams};
pub use radial::{RadialGrid, RadialProfile, Tail};
pub use reduced::ReducedConstants;
pub use ring_kernel::{RingSumReport, RingTable};
pub use run::{Report, RunConfig};
