//! Heat-bath algorithmic cooling with the partner pairing schedule.
//!
//! One run is an initial stage (reset the reset qubit, swap it into the
//! target) followed by `n` rounds of: reset, SWAP(compression, reset), reset,
//! COMP. Reset replaces the reset qubit by its thermal state at the bath
//! temperature and the current field, and rebuilds the register as a product
//! of single-qubit marginals.

use std::io::Write;

use crate::error::{Error, Result};
use crate::gates::{apply, comp_unitary, reset_channel, swap_unitary, GateUnitary};
use crate::qmath::{partial_trace, DensityMatrix};
use crate::spinsys::{polarization, Role, SpinSystem};

/// Off-diagonal magnitude above which a state is no longer considered diagonal.
const DIAGONAL_TOL: f64 = 1e-12;

/// Telemetry recorded after the initial stage (round 0) and after each round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round_index: usize,
    pub target_polarization: f64,
    pub reset_polarization: f64,
    /// Spin temperature of the target at the field the cooling runs at, kelvin.
    pub target_effective_temperature: f64,
    pub state_after_round: DensityMatrix,
}

/// Result of a full cooling run.
#[derive(Clone, Debug, PartialEq)]
pub struct PpaTrace {
    pub rounds: Vec<RoundRecord>,
    pub initial_state: DensityMatrix,
    pub final_target: DensityMatrix,
    /// Thermal polarization of the reset qubit (Shannon bound).
    pub bath_polarization: f64,
    pub field_scale: f64,
}

impl PpaTrace {
    pub fn final_round(&self) -> &RoundRecord {
        self.rounds.last().expect("trace always holds round 0")
    }

    pub fn final_state(&self) -> &DensityMatrix {
        &self.final_round().state_after_round
    }

    /// First round whose target polarization exceeds the bath polarization.
    pub fn shannon_crossing_round(&self) -> Option<usize> {
        self.rounds
            .iter()
            .find(|r| r.target_polarization > self.bath_polarization)
            .map(|r| r.round_index)
    }

    /// Writes `round,eps_target,eps_reset,T_eff_K,shannon_bound_eps` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
        w.write_record(["round", "eps_target", "eps_reset", "T_eff_K", "shannon_bound_eps"])
            .map_err(io)?;
        for r in &self.rounds {
            w.write_record([
                r.round_index.to_string(),
                format!("{:.9e}", r.target_polarization),
                format!("{:.9e}", r.reset_polarization),
                format!("{:.9e}", r.target_effective_temperature),
                format!("{:.9e}", self.bath_polarization),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Config(format!("csv output failed: {e}")))
    }
}

/// Gates and thermal reset state for one system at one field.
struct Cooler<'a> {
    sys: &'a SpinSystem,
    field_scale: f64,
    target: String,
    reset: String,
    thermal_reset: DensityMatrix,
    swap_target_reset: GateUnitary,
    swap_compression_reset: GateUnitary,
    comp: GateUnitary,
}

impl<'a> Cooler<'a> {
    fn new(sys: &'a SpinSystem, register: &[String], field_scale: f64) -> Result<Self> {
        if !(field_scale > 0.0 && field_scale.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "field scale must be positive, got {field_scale}"
            )));
        }
        let target = sys.qubit_with_role(Role::Target)?.label.clone();
        let compression = sys.qubit_with_role(Role::Compression)?.label.clone();
        let reset = sys.qubit_with_role(Role::Reset)?.label.clone();
        if register.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "cooling needs a 3-qubit register, got {register:?}"
            )));
        }
        for label in [&target, &compression, &reset] {
            if !register.contains(label) {
                return Err(Error::UnknownLabel(label.clone()));
            }
        }
        Ok(Self {
            sys,
            field_scale,
            thermal_reset: sys.local_thermal_state(&reset, field_scale)?,
            swap_target_reset: swap_unitary(register, &target, &reset)?,
            swap_compression_reset: swap_unitary(register, &compression, &reset)?,
            comp: comp_unitary(register, &target, &compression, &reset)?,
            target,
            reset,
        })
    }

    fn reset(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        reset_channel(rho, &self.reset, &self.thermal_reset)
    }

    fn gate(&self, gate: &GateUnitary, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = apply(gate, rho)?;
        if rho.is_diagonal(DIAGONAL_TOL) && !out.is_diagonal(DIAGONAL_TOL) {
            return Err(Error::Invariant(format!(
                "{} produced coherences from a diagonal state",
                gate.name()
            )));
        }
        out.validate().map_err(|e| Error::Invariant(format!("after {}: {e}", gate.name())))?;
        Ok(out)
    }

    fn initial_stage(&self, rho1: &DensityMatrix) -> Result<DensityMatrix> {
        let reset = self.reset(rho1)?;
        self.gate(&self.swap_target_reset, &reset)
    }

    fn round(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        let s = self.reset(state)?;
        let s = self.gate(&self.swap_compression_reset, &s)?;
        let s = self.reset(&s)?;
        self.gate(&self.comp, &s)
    }

    fn record(&self, round_index: usize, state: DensityMatrix) -> Result<RoundRecord> {
        let target_polarization = polarization(&partial_trace(&state, &[&self.target])?)?;
        let reset_polarization = polarization(&partial_trace(&state, &[&self.reset])?)?;
        let omega = self.field_scale * self.sys.omega(&self.target)?;
        let target_effective_temperature = self
            .sys
            .constants()
            .effective_temperature(target_polarization, omega)?;
        Ok(RoundRecord {
            round_index,
            target_polarization,
            reset_polarization,
            target_effective_temperature,
            state_after_round: state,
        })
    }
}

/// Resets the reset qubit and swaps it into the target (round 0).
pub fn initial_stage(rho1: &DensityMatrix, sys: &SpinSystem, field_scale: f64) -> Result<DensityMatrix> {
    Cooler::new(sys, rho1.qubits(), field_scale)?.initial_stage(rho1)
}

/// One round: reset, SWAP(compression, reset), reset, COMP.
pub fn ppa_round(state: &DensityMatrix, sys: &SpinSystem, field_scale: f64) -> Result<DensityMatrix> {
    Cooler::new(sys, state.qubits(), field_scale)?.round(state)
}

/// Initial stage followed by `n_rounds` rounds, recording every round.
pub fn run_ppa(
    rho1: &DensityMatrix,
    sys: &SpinSystem,
    field_scale: f64,
    n_rounds: usize,
) -> Result<PpaTrace> {
    let cooler = Cooler::new(sys, rho1.qubits(), field_scale)?;
    let mut state = cooler.initial_stage(rho1)?;
    let mut rounds = Vec::with_capacity(n_rounds + 1);
    rounds.push(cooler.record(0, state.clone())?);
    for k in 1..=n_rounds {
        state = cooler.round(&state)?;
        rounds.push(cooler.record(k, state.clone())?);
    }
    Ok(PpaTrace {
        final_target: partial_trace(&state, &[&cooler.target])?,
        bath_polarization: polarization(&cooler.thermal_reset)?,
        initial_state: rho1.clone(),
        rounds,
        field_scale,
    })
}
