//! Run configuration: an optional TOML file, overridden field by field by
//! command-line flags, resolved into a fully explicit [`RunConfig`] whose
//! JSON form is hashed into the manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use replab_core::fss::Case;
use replab_core::noise::{CircuitNoiseParams, CouplingOptions, EffectiveRates, Normalization};
use replab_core::spin_glass::McSchedule;

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_OUT: &str = "replab-out";

/// Contents of `--config PATH`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub rates: Option<RatesSection>,
    pub sample: Option<SampleSection>,
    pub decode_sweep: Option<DecodeSweepSection>,
    pub mc_run: Option<McRunSection>,
    pub fss: Option<FssSection>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
    }

    /// Parse errors carry the line, column and field path.
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::user(format!("invalid config: {e}")))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub circuit: Option<CircuitNoiseParams>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub normalization: Option<Normalization>,
    pub floor: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub d: Option<usize>,
    pub rounds: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
}

/// A family of rates `(p, q_over_p * p, r_over_p * p)`: a preset case or
/// explicit ratios.
#[derive(Debug, Clone, Copy, Default)]
pub struct FamilySection {
    pub case: Option<Case>,
    pub q_over_p: Option<f64>,
    pub r_over_p: Option<f64>,
}

/// Either an explicit list or `{ start, stop, steps }` with both ends
/// included.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
}

impl Grid {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        match *self {
            Grid::List(ref v) => Ok(v.clone()),
            Grid::Range { start, stop, steps } => match steps {
                0 => Ok(Vec::new()),
                1 => Ok(vec![start]),
                n => Ok((0..n)
                    .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                    .collect()),
            },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeSweepSection {
    pub case: Option<Case>,
    pub q_over_p: Option<f64>,
    pub r_over_p: Option<f64>,
    pub p: Option<Grid>,
    pub d: Option<Vec<usize>>,
    /// Rounds per experiment; defaults to `d`.
    pub rounds: Option<usize>,
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McRunSection {
    pub case: Option<Case>,
    pub q_over_p: Option<f64>,
    pub r_over_p: Option<f64>,
    pub p: Option<Grid>,
    pub l: Option<Vec<usize>>,
    pub samples: Option<usize>,
    /// Explicit `[J1, J2, J3]` for disorder-free runs.
    pub magnitudes: Option<[f64; 3]>,
    pub normalization: Option<Normalization>,
    pub temperatures: Option<Grid>,
    pub n_met: Option<usize>,
    pub swap_rounds: Option<usize>,
    pub discard_fraction: Option<f64>,
    pub measure_every: Option<usize>,
    pub bins: Option<usize>,
}

impl DecodeSweepSection {
    pub fn family(&self) -> FamilySection {
        FamilySection {
            case: self.case,
            q_over_p: self.q_over_p,
            r_over_p: self.r_over_p,
        }
    }
}

impl McRunSection {
    pub fn family(&self) -> FamilySection {
        FamilySection {
            case: self.case,
            q_over_p: self.q_over_p,
            r_over_p: self.r_over_p,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FssSection {
    pub inputs: Option<Vec<PathBuf>>,
}

/// Rate family after resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub label: String,
    pub q_over_p: f64,
    pub r_over_p: f64,
}

impl Family {
    pub fn resolve(sec: &FamilySection) -> CliResult<Self> {
        match (sec.case, sec.q_over_p, sec.r_over_p) {
            (Some(case), None, None) => Ok(Self::preset(case)),
            (None, q, r) => {
                let q_over_p = q.unwrap_or(1.0);
                let r_over_p = r.ok_or_else(|| CliError::user("give `case` or `r_over_p`"))?;
                if !(q_over_p >= 0.0 && r_over_p >= 0.0) {
                    return Err(CliError::user("rate ratios must be non-negative"));
                }
                Ok(Self {
                    label: format!("q={q_over_p}p,r={r_over_p}p"),
                    q_over_p,
                    r_over_p,
                })
            }
            (Some(_), _, _) => Err(CliError::user("`case` excludes `q_over_p` / `r_over_p`")),
        }
    }

    pub fn preset(case: Case) -> Self {
        Self {
            label: case.name().to_owned(),
            q_over_p: 1.0,
            r_over_p: case.r_over_p(),
        }
    }

    pub fn rates(&self, p: f64) -> CliResult<EffectiveRates> {
        Ok(EffectiveRates::new(p, self.q_over_p * p, self.r_over_p * p)?)
    }

    /// Magnitudes in the `p -> 0` limit, where every logarithm is dominated
    /// by `ln(1/p)`.
    pub fn clean_magnitudes(&self) -> [f64; 3] {
        [1.0, 1.0, if self.r_over_p > 0.0 { 1.0 } else { 0.0 }]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesConfig {
    pub circuit: Option<CircuitNoiseParams>,
    pub rates: Option<EffectiveRates>,
    pub couplings: CouplingOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub d: usize,
    pub rounds: usize,
    pub rates: EffectiveRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeSweepConfig {
    pub family: Family,
    pub p: Vec<f64>,
    pub d: Vec<usize>,
    pub rounds: Option<usize>,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRunConfig {
    pub family: Family,
    pub p: Vec<f64>,
    pub l: Vec<usize>,
    pub samples: usize,
    pub magnitudes: Option<[f64; 3]>,
    pub couplings: CouplingOptions,
    /// Fixed ladder; `None` selects one per `p` around the clean critical
    /// temperature of that point's magnitudes.
    pub temperatures: Option<Vec<f64>>,
    /// Schedule with an empty ladder.
    pub schedule: McSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FssConfig {
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "command")]
pub enum Command {
    Rates(RatesConfig),
    Sample(SampleConfig),
    DecodeSweep(DecodeSweepConfig),
    McRun(McRunConfig),
    Fss(FssConfig),
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rates(_) => "rates",
            Command::Sample(_) => "sample",
            Command::DecodeSweep(_) => "decode-sweep",
            Command::McRun(_) => "mc-run",
            Command::Fss(_) => "fss",
            Command::Report => "report",
        }
    }
}

/// Everything that determines the data a run produces. Worker count and
/// output directory are deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(flatten)]
    pub command: Command,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Worker count: explicit flag, then `REPLAB_WORKERS`, then the config
/// file, then all cores.
pub fn resolve_workers(flag: Option<usize>, file: Option<usize>) -> CliResult<usize> {
    let env = match std::env::var("REPLAB_WORKERS") {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::user(format!("REPLAB_WORKERS={v} is not a count")))?,
        ),
        _ => None,
    };
    let n = flag
        .or(env)
        .or(file)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(CliError::user("workers must be >= 1"));
    }
    Ok(n)
}

pub fn default_mc_schedule() -> McSchedule {
    McSchedule::production(Vec::new())
}
