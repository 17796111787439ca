//! Command-line surface and its merge with the config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use replab_core::fss::Case;
use replab_core::noise::{CouplingOptions, EffectiveRates, Normalization};
use replab_core::spin_glass::McSchedule;

use crate::config::*;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "replab",
    version,
    about = "Repetition-code noise mapping, MWPM decoding and random-bond Ising Monte Carlo"
)]
pub struct Cli {
    /// TOML config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (fallback: REPLAB_WORKERS, then the config, then all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Effective rates, cell probabilities and couplings.
    Rates(RatesArgs),
    /// One sampled error chain and its syndrome.
    Sample(SampleArgs),
    /// Logical failure rates of the matching decoder over a grid.
    DecodeSweep(DecodeSweepArgs),
    /// Parallel-tempering Monte Carlo of the random-bond model.
    McRun(McRunArgs),
    /// Crossing analysis of mc-run output.
    Fss(FssArgs),
    /// Bundle manifests and results of the output directory.
    Report,
}

#[derive(Debug, Args, Default)]
pub struct RatesArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub p_sp: Option<f64>,
    #[arg(long)]
    pub p_id: Option<f64>,
    #[arg(long = "p-1")]
    pub p_1: Option<f64>,
    #[arg(long)]
    pub p_m: Option<f64>,
    #[arg(long = "p-2")]
    pub p_2: Option<f64>,
    #[arg(long, value_parser = parse_normalization)]
    pub normalization: Option<Normalization>,
    /// Floor for vanishing cell probabilities.
    #[arg(long)]
    pub floor: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SampleArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct FamilyArgs {
    /// Preset family I, II, III or IV.
    #[arg(long, value_parser = parse_case)]
    pub case: Option<Case>,
    #[arg(long)]
    pub q_over_p: Option<f64>,
    #[arg(long)]
    pub r_over_p: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct DecodeSweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Comma-separated data-flip rates.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub p: Option<Vec<f64>>,
    /// Comma-separated distances.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub d: Option<Vec<usize>>,
    /// Rounds per experiment (default: d).
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct McRunArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub l: Option<Vec<usize>>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// `J1,J2,J3` for p = 0 runs.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub magnitudes: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_normalization)]
    pub normalization: Option<Normalization>,
    /// Fixed temperature ladder.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub temperatures: Option<Vec<f64>>,
    #[arg(long)]
    pub n_met: Option<usize>,
    #[arg(long)]
    pub swap_rounds: Option<usize>,
    #[arg(long = "discard")]
    pub discard_fraction: Option<f64>,
    #[arg(long)]
    pub measure_every: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct FssArgs {
    /// mc-run CSV files (default: mc_run.csv in the output directory).
    #[arg(long = "in", value_delimiter = ',', num_args = 1..)]
    pub inputs: Option<Vec<PathBuf>>,
}

fn parse_case(s: &str) -> Result<Case, String> {
    s.parse().map_err(|e: replab_core::Error| e.to_string())
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    match s {
        "kappa1" => Ok(Normalization::Kappa1),
        "max_kappa" | "max-kappa" => Ok(Normalization::MaxKappa),
        _ => Err(format!("unknown normalization `{s}` (kappa1 | max_kappa)")),
    }
}

/// Fully resolved invocation.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: RunConfig,
    pub out: PathBuf,
    pub workers: usize,
}

impl Cli {
    pub fn resolve(self) -> CliResult<Invocation> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let workers = resolve_workers(self.workers, file.workers)?;
        let out = self
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let seed = self.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
        let command = match self.command {
            Sub::Rates(a) => Command::Rates(resolve_rates(a, file.rates.unwrap_or_default())?),
            Sub::Sample(a) => Command::Sample(resolve_sample(a, file.sample.unwrap_or_default())?),
            Sub::DecodeSweep(a) => Command::DecodeSweep(resolve_decode(a, file.decode_sweep.unwrap_or_default())?),
            Sub::McRun(a) => Command::McRun(resolve_mc(a, file.mc_run.unwrap_or_default())?),
            Sub::Fss(a) => {
                let inputs = a
                    .inputs
                    .or(file.fss.and_then(|f| f.inputs))
                    .unwrap_or_else(|| vec![out.join(crate::output::MC_RUN_CSV)]);
                Command::Fss(FssConfig { inputs })
            }
            Sub::Report => Command::Report,
        };
        Ok(Invocation {
            config: RunConfig { seed, command },
            out,
            workers,
        })
    }
}

fn resolve_rates(a: RatesArgs, f: RatesSection) -> CliResult<RatesConfig> {
    let circuit_flags = [a.p_sp, a.p_id, a.p_1, a.p_m, a.p_2];
    let circuit = if circuit_flags.iter().any(Option::is_some) || f.circuit.is_some() {
        let mut c = f.circuit.unwrap_or_default();
        for (slot, flag) in [&mut c.p_sp, &mut c.p_id, &mut c.p_1, &mut c.p_m, &mut c.p_2]
            .into_iter()
            .zip(circuit_flags)
        {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        Some(c)
    } else {
        None
    };
    let (p, q, r) = (a.p.or(f.p), a.q.or(f.q), a.r.or(f.r));
    let rates = match circuit {
        Some(c) => {
            if p.is_some() || q.is_some() || r.is_some() {
                return Err(CliError::user("give circuit parameters or p, q, r, not both"));
            }
            c.validate()?;
            None
        }
        None => Some(EffectiveRates::new(
            p.unwrap_or(0.0),
            q.unwrap_or(0.0),
            r.unwrap_or(0.0),
        )?),
    };
    Ok(RatesConfig {
        circuit,
        rates,
        couplings: CouplingOptions {
            normalization: a.normalization.or(f.normalization).unwrap_or_default(),
            floor: a.floor.or(f.floor),
        },
    })
}

fn resolve_sample(a: SampleArgs, f: SampleSection) -> CliResult<SampleConfig> {
    let d = a.d.or(f.d).unwrap_or(5);
    Ok(SampleConfig {
        d,
        rounds: a.rounds.or(f.rounds).unwrap_or(d),
        rates: EffectiveRates::new(
            a.p.or(f.p).unwrap_or(0.0),
            a.q.or(f.q).unwrap_or(0.0),
            a.r.or(f.r).unwrap_or(0.0),
        )?,
    })
}

fn merge_family(a: FamilyArgs, f: FamilySection) -> CliResult<Family> {
    // Flags replace the file's family as a whole, so that `--case` on the
    // command line is not rejected for clashing with file ratios.
    let from_flags = a.case.is_some() || a.q_over_p.is_some() || a.r_over_p.is_some();
    let sec = if from_flags {
        FamilySection {
            case: a.case,
            q_over_p: a.q_over_p,
            r_over_p: a.r_over_p,
        }
    } else {
        f
    };
    Family::resolve(&sec)
}

fn check_grid(name: &str, values: &[f64]) -> CliResult<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::user(format!("{name} grid has non-finite values")));
    }
    Ok(())
}

fn resolve_decode(a: DecodeSweepArgs, f: DecodeSweepSection) -> CliResult<DecodeSweepConfig> {
    let family = merge_family(a.family, f.family())?;
    let p = match a.p {
        Some(v) => v,
        None => {
            f.p.as_ref()
                .ok_or_else(|| CliError::user("decode-sweep needs a p grid (--p)"))?
                .values()?
        }
    };
    check_grid("p", &p)?;
    let d =
        a.d.or(f.d)
            .ok_or_else(|| CliError::user("decode-sweep needs distances (--d)"))?;
    let trials = a.trials.or(f.trials).unwrap_or(10_000);
    if trials == 0 {
        return Err(CliError::user("trials must be >= 1"));
    }
    Ok(DecodeSweepConfig {
        family,
        p,
        d,
        rounds: a.rounds.or(f.rounds),
        trials,
    })
}

fn resolve_mc(a: McRunArgs, f: McRunSection) -> CliResult<McRunConfig> {
    let family = merge_family(a.family, f.family())?;
    let p = match a.p {
        Some(v) => v,
        None => {
            f.p.as_ref()
                .ok_or_else(|| CliError::user("mc-run needs a p grid (--p)"))?
                .values()?
        }
    };
    check_grid("p", &p)?;
    let l =
        a.l.or(f.l)
            .ok_or_else(|| CliError::user("mc-run needs lattice sizes (--l)"))?;
    let clean = p.iter().all(|&x| x == 0.0);
    let samples = a.samples.or(f.samples).unwrap_or(if clean { 1 } else { 16 });
    if samples == 0 {
        return Err(CliError::user("samples must be >= 1"));
    }
    let magnitudes = match a.magnitudes {
        Some(v) => Some(<[f64; 3]>::try_from(v).map_err(|_| CliError::user("--magnitudes takes three values"))?),
        None => f.magnitudes,
    };
    let temperatures = match a.temperatures {
        Some(v) => Some(v),
        None => f.temperatures.as_ref().map(Grid::values).transpose()?,
    };
    let base = default_mc_schedule();
    let schedule = McSchedule {
        temperatures: Vec::new(),
        n_met: a.n_met.or(f.n_met).unwrap_or(base.n_met),
        swap_rounds: a.swap_rounds.or(f.swap_rounds).unwrap_or(base.swap_rounds),
        discard_fraction: a
            .discard_fraction
            .or(f.discard_fraction)
            .unwrap_or(base.discard_fraction),
        measure_every: a.measure_every.or(f.measure_every).unwrap_or(base.measure_every),
        bins: a.bins.or(f.bins).unwrap_or(base.bins),
    };
    // Validate everything but the ladder now, so a bad schedule fails
    // before any job runs.
    McSchedule {
        temperatures: vec![1.0],
        ..schedule.clone()
    }
    .validate()?;
    if let Some(t) = &temperatures {
        McSchedule {
            temperatures: t.clone(),
            ..schedule.clone()
        }
        .validate()?;
    }
    Ok(McRunConfig {
        family,
        p,
        l,
        samples,
        magnitudes,
        couplings: CouplingOptions {
            normalization: a.normalization.or(f.normalization).unwrap_or_default(),
            floor: None,
        },
        temperatures,
        schedule,
    })
}
