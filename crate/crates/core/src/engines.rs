//! Engine cycles built from the strokes and the cooling algorithm.
//!
//! Three engines share one working fluid:
//!
//! * four-stroke HBAC: thermalize at full field, compress the field to `B/2`,
//!   cool the target algorithmically at half field, expand back to `B`;
//! * four-stroke isochoric reference: the same cycle with the cooling stage
//!   replaced by thermal contact with a cold bath;
//! * two-stroke HBAC: a swap-partner qubit thermalized at the bath while the
//!   target is cooled at full field, then one SWAP stroke between them.
//!
//! Heats and works are reported per mole of molecules. Adiabatic and SWAP
//! strokes take no time in the power denominators; the target is assumed to
//! rethermalize in one `T1` and every reset costs one reset-qubit `T1`.

use std::io::Write;

use rayon::prelude::*;

use crate::adiabatic::{evolve_stroke, stroke_work, StrokeDirection, StrokeSpec, StrokeTiming};
use crate::error::{Error, Result};
use crate::gates::{apply, replace_marginal, swap_unitary};
use crate::hbac::{run_ppa, PpaTrace};
use crate::qmath::{partial_trace, ComplexMatrix, DensityMatrix};
use crate::spinsys::{gibbs_state, local_zeeman, polarization, Role, SpinSystem};

/// Tolerance on population changes across an adiabatic stroke.
pub const POPULATION_FREEZE_TOL: f64 = 1e-12;
/// Field scale at which the four-stroke engine cools its target.
pub const COMPRESSED_FIELD_SCALE: f64 = 0.5;
/// Label given to the swap partner when the system does not define one.
pub const DEFAULT_SWAP_PARTNER: &str = "S";

const HBAC_ROLES: [Role; 3] = [Role::Target, Role::Compression, Role::Reset];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    FourStrokeHbac,
    FourStrokeIsochoricRef,
    TwoStrokeHbac,
}

/// A named intermediate state of a cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct StageSnapshot {
    pub name: &'static str,
    pub state: DensityMatrix,
}

/// Energetics of one engine cycle. Energies in J/mol, power in W/mol.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleReport {
    pub engine_kind: EngineKind,
    /// Cooling rounds; `None` for the isochoric reference.
    pub n_rounds: Option<usize>,
    /// Compression-stroke work (four-stroke engines only).
    pub w1: Option<f64>,
    /// Expansion-stroke work (four-stroke engines only).
    pub w2: Option<f64>,
    pub q_in: f64,
    pub q_out: f64,
    pub net_work: f64,
    pub efficiency: f64,
    pub power: f64,
    pub cycle_time: f64,
    /// Spin temperature of the cooled target, kelvin.
    pub cooled_target_temperature: f64,
    /// Swap-partner frequency, rad/s (two-stroke only).
    pub omega_s: Option<f64>,
    pub stages: Vec<StageSnapshot>,
}

impl CycleReport {
    pub fn is_positive_work(&self) -> bool {
        self.net_work > 0.0
    }

    pub fn stage(&self, name: &str) -> Option<&DensityMatrix> {
        self.stages.iter().find(|s| s.name == name).map(|s| &s.state)
    }
}

fn check_stage(name: &'static str, state: DensityMatrix) -> Result<StageSnapshot> {
    state
        .validate()
        .map_err(|e| Error::Invariant(format!("stage `{name}`: {e}")))?;
    Ok(StageSnapshot { name, state })
}

fn check_frozen(before: &DensityMatrix, after: &DensityMatrix, stroke: &str) -> Result<()> {
    let drift = before
        .populations()
        .iter()
        .zip(after.populations())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if drift > POPULATION_FREEZE_TOL {
        return Err(Error::Invariant(format!(
            "{stroke} changed populations by {drift:e}"
        )));
    }
    Ok(())
}

/// Local bookkeeping shared by both four-stroke engines.
struct FourStrokeFluid {
    sys: SpinSystem,
    target: String,
    h_full: ComplexMatrix,
    h_half: ComplexMatrix,
    omega_t: f64,
}

impl FourStrokeFluid {
    fn new(sys: &SpinSystem) -> Result<Self> {
        let sys = sys.restricted_to_roles(&HBAC_ROLES)?;
        let target = sys.qubit_with_role(Role::Target)?.label.clone();
        let omega_t = sys.omega(&target)?;
        let c = *sys.constants();
        Ok(Self {
            h_full: local_zeeman(omega_t, &c),
            h_half: local_zeeman(COMPRESSED_FIELD_SCALE * omega_t, &c),
            sys,
            target,
            omega_t,
        })
    }

    fn marginal(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        partial_trace(rho, &[&self.target])
    }

    /// Heating and compression: returns (rho^(0), rho^(1)).
    fn hot_half(&self, timing: StrokeTiming) -> Result<(DensityMatrix, DensityMatrix)> {
        let rho0 = self.sys.thermal_state(1.0)?;
        let spec = StrokeSpec::new(StrokeDirection::Compression, timing);
        let rho1 = evolve_stroke(&rho0, &self.sys, &spec)?;
        check_frozen(&rho0, &rho1, "compression stroke")?;
        Ok((rho0, rho1))
    }

    fn expand(&self, rho2: &DensityMatrix, timing: StrokeTiming) -> Result<DensityMatrix> {
        let spec = StrokeSpec::new(StrokeDirection::Expansion, timing);
        let rho3 = evolve_stroke(rho2, &self.sys, &spec)?;
        check_frozen(rho2, &rho3, "expansion stroke")?;
        Ok(rho3)
    }

    /// Assembles the report from the four corner states of the cycle.
    fn report(
        &self,
        kind: EngineKind,
        n_rounds: Option<usize>,
        states: [DensityMatrix; 4],
        cycle_time: f64,
    ) -> Result<CycleReport> {
        let na = self.sys.constants().avogadro;
        let [rho0, rho1, rho2, rho3] = states;
        let [t0, t1, t2, t3] = [&rho0, &rho1, &rho2, &rho3].map(|r| self.marginal(r));
        let (t0, t1, t2, t3) = (t0?, t1?, t2?, t3?);

        let w1 = stroke_work(&self.h_full, &t0, &self.h_half, &t1)?;
        let w2 = stroke_work(&self.h_half, &t2, &self.h_full, &t3)?;
        // absorbed while rethermalizing at full field, released while cooling at half field
        let q_in = t0.expectation(&self.h_full)? - t3.expectation(&self.h_full)?;
        let q_out = t1.expectation(&self.h_half)? - t2.expectation(&self.h_half)?;
        let net_work = q_in - q_out;

        let eps_cold = polarization(&t2)?;
        let cooled_target_temperature = self
            .sys
            .constants()
            .effective_temperature(eps_cold, COMPRESSED_FIELD_SCALE * self.omega_t)?;

        let stages = vec![
            check_stage("thermal", rho0)?,
            check_stage("compressed", rho1)?,
            check_stage("cooled", rho2)?,
            check_stage("expanded", rho3)?,
        ];
        Ok(CycleReport {
            engine_kind: kind,
            n_rounds,
            w1: Some(w1 * na),
            w2: Some(w2 * na),
            q_in: q_in * na,
            q_out: q_out * na,
            net_work: net_work * na,
            efficiency: 1.0 - COMPRESSED_FIELD_SCALE,
            power: net_work * na / cycle_time,
            cycle_time,
            cooled_target_temperature,
            omega_s: None,
            stages,
        })
    }
}

/// Four-stroke engine with the cold stroke replaced by `n_rounds` of cooling.
pub fn run_four_stroke(sys: &SpinSystem, n_rounds: usize, timing: StrokeTiming) -> Result<CycleReport> {
    let fluid = FourStrokeFluid::new(sys)?;
    let (rho0, rho1) = fluid.hot_half(timing)?;
    let trace = run_ppa(&rho1, &fluid.sys, COMPRESSED_FIELD_SCALE, n_rounds)?;
    let rho2 = trace.final_state().clone();
    let rho3 = fluid.expand(&rho2, timing)?;
    let t1_target = fluid.sys.qubit_with_role(Role::Target)?.t1;
    let t1_reset = fluid.sys.qubit_with_role(Role::Reset)?.t1;
    let cycle_time = t1_target + t1_reset * (2 * n_rounds + 1) as f64;
    fluid.report(
        EngineKind::FourStrokeHbac,
        Some(n_rounds),
        [rho0, rho1, rho2, rho3],
        cycle_time,
    )
}

/// Four-stroke engine whose target is cooled by a bath at `cold_temperature`
/// under the half-field Hamiltonian.
pub fn run_isochoric_reference(
    sys: &SpinSystem,
    cold_temperature: f64,
    timing: StrokeTiming,
) -> Result<CycleReport> {
    if !(cold_temperature > 0.0 && cold_temperature <= sys.bath_temperature()) {
        return Err(Error::InvalidInput(format!(
            "cold temperature {cold_temperature} K must lie in (0, {}] K",
            sys.bath_temperature()
        )));
    }
    let fluid = FourStrokeFluid::new(sys)?;
    let (rho0, rho1) = fluid.hot_half(timing)?;
    let cold_target = gibbs_state(
        &fluid.h_half,
        cold_temperature,
        vec![fluid.target.clone()],
        fluid.sys.constants(),
    )?;
    let rho2 = replace_marginal(&rho1, &fluid.target, &cold_target)?;
    let rho3 = fluid.expand(&rho2, timing)?;
    let cycle_time = 2.0 * fluid.sys.qubit_with_role(Role::Target)?.t1;
    fluid.report(
        EngineKind::FourStrokeIsochoricRef,
        None,
        [rho0, rho1, rho2, rho3],
        cycle_time,
    )
}

/// `(omega_t, omega_t * T / T_cold)`: the swap-partner frequencies giving
/// positive two-stroke work.
pub fn positive_work_window(omega_t: f64, bath_t: f64, cooled_t: f64) -> Result<(f64, f64)> {
    if !(omega_t.is_finite() && omega_t > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive, got {omega_t}")));
    }
    if !(cooled_t > 0.0 && cooled_t < bath_t) {
        return Err(Error::InvalidInput(format!(
            "cooled temperature {cooled_t} K must lie strictly below the bath at {bath_t} K"
        )));
    }
    Ok((omega_t, omega_t * bath_t / cooled_t))
}

/// Target cooled at full field, ready to be swapped with partners of any frequency.
#[derive(Clone, Debug)]
pub struct TwoStrokeEngine {
    sys: SpinSystem,
    n_rounds: usize,
    partner: String,
    target: String,
    omega_t: f64,
    cooled_target: DensityMatrix,
    cooled_target_temperature: f64,
    trace: PpaTrace,
}

impl TwoStrokeEngine {
    /// Runs the cooling half of the cycle.
    pub fn prepare(sys: &SpinSystem, n_rounds: usize) -> Result<Self> {
        let partner = sys
            .qubit_with_role(Role::SwapPartner)
            .map(|q| q.label.clone())
            .unwrap_or_else(|_| DEFAULT_SWAP_PARTNER.to_string());
        let hbac = sys.restricted_to_roles(&HBAC_ROLES)?;
        let target = hbac.qubit_with_role(Role::Target)?.label.clone();
        if hbac.labels().contains(&partner) {
            return Err(Error::DuplicateLabel(partner));
        }
        let omega_t = hbac.omega(&target)?;
        let rho1 = hbac.thermal_state(1.0)?;
        let trace = run_ppa(&rho1, &hbac, 1.0, n_rounds)?;
        let cooled_target = trace.final_target.clone();
        let cooled_target_temperature = hbac
            .constants()
            .effective_temperature(polarization(&cooled_target)?, omega_t)?;
        Ok(Self {
            sys: hbac,
            n_rounds,
            partner,
            target,
            omega_t,
            cooled_target,
            cooled_target_temperature,
            trace,
        })
    }

    pub fn trace(&self) -> &PpaTrace {
        &self.trace
    }

    pub fn omega_t(&self) -> f64 {
        self.omega_t
    }

    pub fn cooled_target_temperature(&self) -> f64 {
        self.cooled_target_temperature
    }

    /// Swap-partner frequencies for which the cycle produces work.
    pub fn window(&self) -> Result<(f64, f64)> {
        positive_work_window(
            self.omega_t,
            self.sys.bath_temperature(),
            self.cooled_target_temperature,
        )
    }

    pub fn in_window(&self, omega_s: f64) -> bool {
        self.window()
            .map(|(lo, hi)| omega_s > lo && omega_s < hi)
            .unwrap_or(false)
    }

    /// Completes the cycle with a partner of frequency `omega_s` (rad/s).
    pub fn cycle(&self, omega_s: f64) -> Result<CycleReport> {
        if !(omega_s > 0.0 && omega_s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "swap-partner frequency must be positive, got {omega_s}"
            )));
        }
        let c = self.sys.constants();
        let h_s = local_zeeman(omega_s, c);
        let h_t = local_zeeman(self.omega_t, c);
        let s0 = gibbs_state(&h_s, self.sys.bath_temperature(), vec![self.partner.clone()], c)?;
        let t0 = self.cooled_target.clone();
        let joint0 = s0.tensor(&t0)?;
        let swap = swap_unitary(joint0.qubits(), &self.partner, &self.target)?;
        let joint1 = apply(&swap, &joint0)?;
        let s1 = partial_trace(&joint1, &[&self.partner])?;
        let t1 = partial_trace(&joint1, &[&self.target])?;

        let na = c.avogadro;
        let q_in = s0.expectation(&h_s)? - s1.expectation(&h_s)?;
        let q_out = t1.expectation(&h_t)? - t0.expectation(&h_t)?;
        let net_work = q_in - q_out;
        let t1_reset = self.sys.qubit_with_role(Role::Reset)?.t1;
        let cycle_time = t1_reset * (2 * self.n_rounds + 1) as f64;
        let stages = vec![
            check_stage("partner_thermal", s0)?,
            check_stage("target_cooled", t0)?,
            check_stage("joint_before_swap", joint0)?,
            check_stage("joint_after_swap", joint1)?,
        ];
        Ok(CycleReport {
            engine_kind: EngineKind::TwoStrokeHbac,
            n_rounds: Some(self.n_rounds),
            w1: None,
            w2: None,
            q_in: q_in * na,
            q_out: q_out * na,
            net_work: net_work * na,
            efficiency: 1.0 - self.omega_t / omega_s,
            power: net_work * na / cycle_time,
            cycle_time,
            cooled_target_temperature: self.cooled_target_temperature,
            omega_s: Some(omega_s),
            stages,
        })
    }
}

/// Two-stroke engine: partner thermalized at `omega_s` while the target is
/// cooled by `n_rounds`, then one SWAP.
pub fn run_two_stroke(sys: &SpinSystem, omega_s: f64, n_rounds: usize) -> Result<CycleReport> {
    TwoStrokeEngine::prepare(sys, n_rounds)?.cycle(omega_s)
}

fn check_increasing<T: PartialOrd + Copy + std::fmt::Debug>(grid: &[T], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput(format!("{what} grid is empty")));
    }
    if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::InvalidInput(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

fn argmax_by(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
        .0
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("csv output failed: {e}"))
}

/// One four-stroke HBAC cycle and its isochoric twin cooled to the same temperature.
#[derive(Clone, Debug)]
pub struct FourStrokeRow {
    pub n: usize,
    pub hbac: CycleReport,
    pub isochoric: CycleReport,
}

#[derive(Clone, Debug)]
pub struct FourStrokeSweep {
    pub rows: Vec<FourStrokeRow>,
}

impl FourStrokeSweep {
    /// Round count with the largest HBAC power.
    pub fn argmax_power(&self) -> usize {
        self.rows[argmax_by(self.rows.iter().map(|r| r.hbac.power))].n
    }

    /// Round count with the largest HBAC work.
    pub fn argmax_work(&self) -> usize {
        self.rows[argmax_by(self.rows.iter().map(|r| r.hbac.net_work))].n
    }

    /// First round count at which the isochoric reference outpowers HBAC.
    pub fn crossover_round(&self) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.isochoric.power > r.hbac.power)
            .map(|r| r.n)
    }

    pub fn row(&self, n: usize) -> Option<&FourStrokeRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "Qin_J_per_mol",
            "Qout_J_per_mol",
            "W_J_per_mol",
            "P_W_per_mol",
            "P_iso_W_per_mol",
            "T_cold_K",
        ])
        .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                format!("{:.9e}", r.hbac.q_in),
                format!("{:.9e}", r.hbac.q_out),
                format!("{:.9e}", r.hbac.net_work),
                format!("{:.9e}", r.hbac.power),
                format!("{:.9e}", r.isochoric.power),
                format!("{:.9e}", r.hbac.cooled_target_temperature),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(csv_err)
    }
}

/// HBAC cycle and isochoric reference for every round count in `n_list`.
pub fn sweep_four_stroke(sys: &SpinSystem, n_list: &[usize], timing: StrokeTiming) -> Result<FourStrokeSweep> {
    check_increasing(n_list, "round")?;
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let hbac = run_four_stroke(sys, n, timing)?;
            let isochoric = run_isochoric_reference(sys, hbac.cooled_target_temperature, timing)?;
            Ok(FourStrokeRow { n, hbac, isochoric })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FourStrokeSweep { rows })
}

#[derive(Clone, Debug)]
pub struct TwoStrokeRow {
    pub n: usize,
    pub omega_s: f64,
    pub in_window: bool,
    pub report: CycleReport,
}

/// Positive-work window for one round count, rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkWindow {
    pub n: usize,
    pub cooled_target_temperature: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug)]
pub struct TwoStrokeSweep {
    pub omega_s_grid: Vec<f64>,
    pub n_list: Vec<usize>,
    /// Ordered by `n`, then by `omega_s`.
    pub rows: Vec<TwoStrokeRow>,
    pub windows: Vec<WorkWindow>,
}

impl TwoStrokeSweep {
    pub fn argmax_power(&self) -> &TwoStrokeRow {
        &self.rows[argmax_by(self.rows.iter().map(|r| r.report.power))]
    }

    pub fn argmax_work(&self) -> &TwoStrokeRow {
        &self.rows[argmax_by(self.rows.iter().map(|r| r.report.net_work))]
    }

    pub fn rows_for(&self, n: usize) -> impl Iterator<Item = &TwoStrokeRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega_s_MHz", "n", "W_J_per_mol", "P_W_per_mol", "eta", "in_window"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                format!("{:.6}", r.omega_s / (2.0 * std::f64::consts::PI * 1e6)),
                r.n.to_string(),
                format!("{:.9e}", r.report.net_work),
                format!("{:.9e}", r.report.power),
                format!("{:.9e}", r.report.efficiency),
                r.in_window.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(csv_err)
    }
}

/// Two-stroke cycles over every `(n, omega_s)` grid point.
pub fn sweep_two_stroke(sys: &SpinSystem, omega_s_grid: &[f64], n_list: &[usize]) -> Result<TwoStrokeSweep> {
    check_increasing(omega_s_grid, "swap-partner frequency")?;
    check_increasing(n_list, "round")?;
    let engines = n_list
        .par_iter()
        .map(|&n| TwoStrokeEngine::prepare(sys, n))
        .collect::<Result<Vec<_>>>()?;
    let mut windows = Vec::with_capacity(engines.len());
    for e in &engines {
        let (lower, upper) = e.window()?;
        windows.push(WorkWindow {
            n: e.n_rounds,
            cooled_target_temperature: e.cooled_target_temperature,
            lower,
            upper,
        });
    }
    let points: Vec<(&TwoStrokeEngine, f64)> = engines
        .iter()
        .flat_map(|e| omega_s_grid.iter().map(move |&w| (e, w)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(engine, omega_s)| {
            Ok(TwoStrokeRow {
                n: engine.n_rounds,
                omega_s,
                in_window: engine.in_window(omega_s),
                report: engine.cycle(omega_s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TwoStrokeSweep {
        omega_s_grid: omega_s_grid.to_vec(),
        n_list: n_list.to_vec(),
        rows,
        windows,
    })
}
