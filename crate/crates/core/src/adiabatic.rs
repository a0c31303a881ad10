//! Finite-time field ramps between `B` and `B/2` and the local work bookkeeping.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qmath::{evolve_lvn, ComplexMatrix, DensityMatrix};
use crate::spinsys::SpinSystem;

/// Default full drive period, seconds.
pub const DEFAULT_TAU: f64 = 0.1;
/// Default number of integration steps per full period.
pub const DEFAULT_STEPS_PER_TAU: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrokeDirection {
    /// `B -> B/2`
    Compression,
    /// `B/2 -> B`
    Expansion,
}

/// Drive period and integration step; a stroke lasts `tau / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrokeTiming {
    pub tau: f64,
    pub dt: f64,
}

impl StrokeTiming {
    pub fn new(tau: f64, dt: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
        }
        if !(dt > 0.0 && dt <= tau / 2.0) {
            return Err(Error::InvalidInput(format!(
                "dt must lie in (0, tau/2], got {dt} for tau = {tau}"
            )));
        }
        Ok(Self { tau, dt })
    }

    /// `dt = tau / 10^4`
    pub fn with_tau(tau: f64) -> Result<Self> {
        Self::new(tau, tau / DEFAULT_STEPS_PER_TAU)
    }
}

impl Default for StrokeTiming {
    fn default() -> Self {
        Self::with_tau(DEFAULT_TAU).expect("valid default")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrokeSpec {
    pub direction: StrokeDirection,
    pub timing: StrokeTiming,
}

impl StrokeSpec {
    pub fn new(direction: StrokeDirection, timing: StrokeTiming) -> Self {
        Self { direction, timing }
    }

    pub fn duration(&self) -> f64 {
        self.timing.tau / 2.0
    }
}

/// `H(t) = H(0) + hbar sum_i (omega_i - omega'_i) I_iz sin(pi t / tau)` for
/// compression; expansion runs the same profile from `H(1)` back to `H(0)`.
///
/// Written per qubit as an instantaneous Zeeman frequency, so the endpoints
/// coincide exactly with the static Hamiltonians at full and half field.
pub fn drive_hamiltonian(sys: &SpinSystem, spec: &StrokeSpec, t: f64) -> Result<ComplexMatrix> {
    let end = spec.duration();
    if !(0.0..=end).contains(&t) {
        return Err(Error::InvalidInput(format!("time {t} outside stroke [0, {end}]")));
    }
    let ramp = (PI * t / spec.timing.tau).sin();
    let full = sys.scaled_omegas(1.0);
    let half = sys.scaled_omegas(0.5);
    let omegas: Vec<f64> = full
        .iter()
        .zip(&half)
        .map(|(&w, &w_half)| match spec.direction {
            StrokeDirection::Compression => w - (w - w_half) * ramp,
            StrokeDirection::Expansion => w_half + (w - w_half) * ramp,
        })
        .collect();
    sys.zeeman_coupling_hamiltonian(&omegas)
}

/// Evolves the full register through one stroke.
pub fn evolve_stroke(rho: &DensityMatrix, sys: &SpinSystem, spec: &StrokeSpec) -> Result<DensityMatrix> {
    if rho.qubits() != sys.labels().as_slice() {
        return Err(Error::RegisterMismatch {
            expected: sys.labels(),
            found: rho.qubits().to_vec(),
        });
    }
    let end = spec.duration();
    // clamp guards the last stage evaluation against rounding past the endpoint
    let h_at = |t: f64| drive_hamiltonian(sys, spec, t.clamp(0.0, end)).expect("time clamped into stroke");
    evolve_lvn(rho, h_at, (0.0, end), spec.timing.dt, sys.constants().hbar)
}

/// `Tr[H_start rho_start] - Tr[H_end rho_end]`, joules per molecule.
pub fn stroke_work(
    h_start: &ComplexMatrix,
    rho_start: &DensityMatrix,
    h_end: &ComplexMatrix,
    rho_end: &DensityMatrix,
) -> Result<f64> {
    if h_start.dim() != h_end.dim() || rho_start.dim() != rho_end.dim() {
        return Err(Error::DimensionMismatch {
            expected: h_start.dim(),
            found: h_end.dim(),
        });
    }
    Ok(rho_start.expectation(h_start)? - rho_end.expectation(h_end)?)
}
