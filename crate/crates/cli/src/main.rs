mod args;
mod output;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::process::ExitCode;

use clap::Parser;
use hbac_otto::adiabatic::StrokeTiming;
use hbac_otto::engines::{sweep_four_stroke, sweep_two_stroke};
use hbac_otto::hbac::run_ppa;
use hbac_otto::{Role, SpinSystem};

use args::{Cli, Command, Common, Format, FourStrokeArgs, PpaArgs, TwoStrokeArgs};

const EXIT_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Model(#[from] hbac_otto::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if e.is_invariant_violation() => EXIT_INVARIANT,
            _ => EXIT_CONFIG,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn mhz_to_rad(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

fn rad_to_mhz(w: f64) -> f64 {
    w / (2.0 * PI * 1e6)
}

fn load_system(spec: &str) -> CliResult<SpinSystem> {
    if spec == "tce" {
        return Ok(SpinSystem::tce());
    }
    Ok(SpinSystem::from_path(spec)?)
}

/// CSV body behind the metadata header, or the summary alone.
fn finish(common: &Common, sys: &SpinSystem, command: &str, csv: Vec<u8>, summary: &str) -> CliResult<()> {
    match common.format {
        Format::Csv => {
            let mut bytes = output::metadata_header(sys, command).into_bytes();
            bytes.extend(csv);
            output::emit(common.out.as_deref(), &bytes)?;
            if common.out.is_some() {
                print!("{summary}");
            }
        }
        Format::Summary => output::emit(common.out.as_deref(), summary.as_bytes())?,
    }
    Ok(())
}

fn cmd_ppa(a: &PpaArgs) -> CliResult<()> {
    let sys = load_system(&a.common.system)?.restricted_to_roles(&[Role::Target, Role::Compression, Role::Reset])?;
    let rho = sys.thermal_state(a.field_scale)?;
    let mut trace = run_ppa(&rho, &sys, a.field_scale, a.rounds.end)?;
    let crossing = trace.shannon_crossing_round();
    let first = a.rounds.first_reported();
    trace.rounds.retain(|r| r.round_index >= first);
    let last = trace.final_round();
    let summary = format!(
        "final round {}: eps_target = {:.4e}, T_eff = {:.2} K, bath eps = {:.4e}, bound exceeded from round {}\n",
        last.round_index,
        last.target_polarization,
        last.target_effective_temperature,
        trace.bath_polarization,
        crossing.map_or("never".to_string(), |k| k.to_string()),
    );
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    let command = format!(
        "ppa --system {} --rounds {} --field-scale {}",
        a.common.system, a.rounds, a.field_scale
    );
    finish(&a.common, &sys, &command, csv, &summary)
}

fn cmd_four_stroke(a: &FourStrokeArgs) -> CliResult<()> {
    let sys = load_system(&a.common.system)?;
    let timing = match a.dt {
        Some(dt) => StrokeTiming::new(a.tau, dt)?,
        None => StrokeTiming::with_tau(a.tau)?,
    };
    let sweep = sweep_four_stroke(&sys, &a.rounds.to_vec(), timing)?;
    let mut summary = String::new();
    if let [row] = sweep.rows.as_slice() {
        let r = &row.hbac;
        let _ = writeln!(
            summary,
            "n = {}: Q_in = {:.4e} J/mol, Q_out = {:.4e} J/mol, W = {:.4e} J/mol, P = {:.4e} W/mol, eta = {}, T_cold = {:.2} K",
            row.n, r.q_in, r.q_out, r.net_work, r.power, r.efficiency, r.cooled_target_temperature
        );
        let _ = writeln!(summary, "isochoric reference P = {:.4e} W/mol", row.isochoric.power);
    } else {
        let best = sweep.argmax_power();
        let p = sweep.row(best).map_or(f64::NAN, |r| r.hbac.power);
        let _ = writeln!(summary, "max power at n = {best}: P = {p:.4e} W/mol");
        let _ = match sweep.crossover_round() {
            Some(n) => writeln!(summary, "isochoric reference outpowers HBAC from n = {n}"),
            None => writeln!(summary, "isochoric reference never outpowers HBAC in this range"),
        };
    }
    let mut csv = Vec::new();
    sweep.write_csv(&mut csv)?;
    let command = format!(
        "four-stroke --system {} --rounds {} --tau {} --dt {}",
        a.common.system, a.rounds, timing.tau, timing.dt
    );
    finish(&a.common, &sys, &command, csv, &summary)
}

fn cmd_two_stroke(a: &TwoStrokeArgs) -> CliResult<()> {
    let sys = load_system(&a.common.system)?;
    let grid: Vec<f64> = a.omega_s.points().into_iter().map(mhz_to_rad).collect();
    let sweep = sweep_two_stroke(&sys, &grid, &a.rounds.to_vec())?;
    let best = sweep.argmax_power();
    let mut summary = format!(
        "max power at omega_s = {:.1} MHz, n = {}: P = {:.4e} W/mol, W = {:.4e} J/mol, eta = {:.4}\n",
        rad_to_mhz(best.omega_s),
        best.n,
        best.report.power,
        best.report.net_work,
        best.report.efficiency,
    );
    for w in &sweep.windows {
        let _ = writeln!(
            summary,
            "n = {}: T_cold = {:.2} K, positive work for {:.2} < omega_s < {:.2} MHz",
            w.n,
            w.cooled_target_temperature,
            rad_to_mhz(w.lower),
            rad_to_mhz(w.upper)
        );
    }
    let mut csv = Vec::new();
    sweep.write_csv(&mut csv)?;
    let command = format!(
        "two-stroke --system {} --rounds {} --omega-s {}",
        a.common.system, a.rounds, a.omega_s
    );
    finish(&a.common, &sys, &command, csv, &summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ppa(a) => cmd_ppa(a),
        Command::FourStroke(a) => cmd_four_stroke(a),
        Command::TwoStroke(a) => cmd_two_stroke(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
