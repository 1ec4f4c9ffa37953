//! Free bispinors, Volkov states and wave-packet propagation through the
//! pulse.

pub mod bispinor;
pub mod packet;
pub mod volkov;

pub use bispinor::{bispinor_u, bispinor_v, energy, SpinLabel};
pub use packet::{
    expansion_coefficients, negative_energy_projection, observables_kinematic, propagate, CoefficientSource,
    CoefficientTable, Geometry, Kinematics, PacketSpec, QuantumOptions, Representation, WaveFunctionSample,
};
pub use volkov::{volkov_phase_integrals, volkov_residual, EnergySign, PhaseIntegrals, VolkovBasis};
