//! Quantum Otto engines whose cold stroke is replaced by heat-bath
//! algorithmic cooling (partner pairing schedule) on a three-spin NMR
//! working fluid.
//!
//! Modules build on one another bottom-up:
//!
//! * [`qmath`]: dense matrices, density matrices, partial trace, fidelity, RK4
//!   Liouville-von Neumann integration;
//! * [`spinsys`]: spin systems, the lab-frame Hamiltonian, thermal states,
//!   polarization and spin temperature;
//! * [`gates`]: SWAP, CNotNot, Toffoli, COMP and the reset channel;
//! * [`hbac`]: the cooling algorithm and its per-round telemetry;
//! * [`adiabatic`]: field ramps and stroke work;
//! * [`engines`]: four-stroke, isochoric-reference and two-stroke cycles and sweeps.

pub mod adiabatic;
pub mod engines;
pub mod error;
pub mod gates;
pub mod hbac;
pub mod qmath;
pub mod spinsys;

pub use error::{Error, Result};
pub use qmath::{ComplexMatrix, DensityMatrix};
pub use spinsys::{PhysicalConstants, QubitSpec, Role, SpinSystem};
