use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hbac-otto", version, about = "HBAC-cooled quantum Otto engine simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cooling curve of the target qubit, one row per round.
    Ppa(PpaArgs),
    /// Four-stroke engine and its isochoric reference, one row per round count.
    FourStroke(FourStrokeArgs),
    /// Two-stroke engine swept over the partner frequency.
    TwoStroke(TwoStrokeArgs),
}

#[derive(Args, Debug)]
pub struct Common {
    /// Preset name (`tce`) or path to a TOML system file.
    #[arg(long, default_value = "tce")]
    pub system: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct PpaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Last round `n` (rows 0..n), or `a..b` to keep rounds a through b.
    #[arg(short = 'n', long, default_value = "7")]
    pub rounds: RoundRange,
    /// Field during cooling as a fraction of the full field.
    #[arg(long, default_value_t = 0.5)]
    pub field_scale: f64,
}

#[derive(Args, Debug)]
pub struct FourStrokeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Round counts, `n` or inclusive `a..b`.
    #[arg(short = 'n', long, default_value = "0..10")]
    pub rounds: RoundRange,
    /// Adiabatic stroke period in seconds; each stroke lasts tau/2.
    #[arg(long, default_value_t = hbac_otto::adiabatic::DEFAULT_TAU)]
    pub tau: f64,
    /// Integration step in seconds; tau/1e4 when absent.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TwoStrokeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Round counts, `n` or inclusive `a..b`.
    #[arg(short = 'n', long, default_value = "1..8")]
    pub rounds: RoundRange,
    /// Partner frequency grid in MHz, `start:stop:step`, stop inclusive.
    #[arg(long, default_value = "150:1000:1")]
    pub omega_s: MhzGrid,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Summary,
}

/// Inclusive round range; `single` marks a bare `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundRange {
    pub start: usize,
    pub end: usize,
    pub single: bool,
}

impl RoundRange {
    pub fn to_vec(self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }

    /// First round to report when a run always starts from round 0:
    /// a bare `n` keeps the whole history.
    pub fn first_reported(self) -> usize {
        if self.single {
            0
        } else {
            self.start
        }
    }
}

impl FromStr for RoundRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{t}` is not a non-negative integer"))
        };
        let (start, end, single) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?, false),
            None => {
                let n = parse(s)?;
                (n, n, true)
            }
        };
        if start > end {
            return Err(format!("empty round range {start}..{end}"));
        }
        Ok(Self { start, end, single })
    }
}

impl fmt::Display for RoundRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.single {
            write!(f, "{}", self.end)
        } else {
            write!(f, "{}..{}", self.start, self.end)
        }
    }
}

/// Frequency grid in MHz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MhzGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl MhzGrid {
    pub fn points(&self) -> Vec<f64> {
        // tolerate rounding in (stop - start) / step so the stop point is kept
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for MhzGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
            .collect::<Result<Vec<_>, _>>()?;
        let (start, stop, step) = match nums.as_slice() {
            [x] => (*x, *x, 1.0),
            [a, b, c] => (*a, *b, *c),
            _ => return Err(format!("expected start:stop:step, got `{s}`")),
        };
        if !(start > 0.0 && start.is_finite() && stop.is_finite()) {
            return Err(format!("frequencies must be positive, got `{s}`"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(format!("step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("stop {stop} lies below start {start}"));
        }
        Ok(Self { start, stop, step })
    }
}

impl fmt::Display for MhzGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}
