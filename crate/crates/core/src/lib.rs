//! Couplings, dynamics and level statistics of one-dimensional transmon
//! arrays with capacitive coupling.
//!
//! The capacitance network and its closed-form inverse are generic over
//! [`Scalar`] (`f32`, `f64` and exact `BigRational`). Everything built on
//! eigendecompositions works in `f64`.

pub mod basis;
pub mod capnet;
pub mod chebinv;
pub mod constants;
pub mod dense;
pub mod dynamics;
pub mod error;
pub mod scalar;
pub mod spectral;
pub mod spinmodel;

pub use capnet::{
    build_capacitance_matrix, chain_energies, invert_numeric, CapacitanceMatrix, CapacitiveEnergies, ChainSpec,
    EdgeConvention, InverseCapacitanceMatrix, JosephsonEnergies, ParasiticLink,
};
pub use chebinv::{closed_form_inverse, ToeplitzInverseQuery};
pub use constants::PhysicalConstants;
pub use dynamics::{evolve_transfer, otoc_series, OtocMethod, OtocSeries, TransferResult};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use spectral::{level_spacing_ratios, sector_eigenvalues, Parity, SectorSpec, SpacingOptions};
pub use spinmodel::{build_hamiltonian, ModelKind, Resonance, SpinHamiltonian, SpinModelParameters};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type Capacitance = CapacitanceMatrix<f64>;
pub type InverseCapacitance = InverseCapacitanceMatrix<f64>;
pub type Capacitance32 = CapacitanceMatrix<f32>;
pub type InverseCapacitance32 = InverseCapacitanceMatrix<f32>;
pub type ExactCapacitance = CapacitanceMatrix<Rational>;
pub type ExactInverseCapacitance = InverseCapacitanceMatrix<Rational>;
pub type InverseQuery = ToeplitzInverseQuery<f64>;
pub type ExactInverseQuery = ToeplitzInverseQuery<Rational>;
