//! Subcommand execution.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use replab_core::decoder::{logical_error_rate_with, DecoderOptions};
use replab_core::fss::{
    exact_triangular_tc, find_crossing, threshold_bracket, xi_curve, BracketOutcome, Case, CrossingOutcome, CurveFamily,
};
use replab_core::lattice::{chain_from_disorder, sample_disorder, syndrome_volume, Defect, LatticeDims, Sign};
use replab_core::noise::{
    effective_rates_from_circuit, fundamental_probs, nishimori_couplings, CircuitNoiseParams, CouplingOptions,
    EffectiveRates, Normalization,
};
use replab_core::rng::derive_seed;
use replab_core::spin_glass::{run_disorder_sample, BondLattice, McSchedule, ObservableSeries};
use replab_core::Error;

use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::manifest::{read_manifest, GridPoint, JobRecord, Manifest, ManifestWriter, Status};
use crate::output::*;
use crate::sched;

/// Relative drift of the cached replica energies above which a run is
/// considered corrupt.
const MAX_ENERGY_DRIFT: f64 = 1e-8;

/// Runs `config`, writing artifacts and a manifest under `out`.
pub fn execute(config: &RunConfig, out: &Path, workers: usize) -> CliResult<Manifest> {
    let mut mw = ManifestWriter::begin(out, config, workers)?;
    let result = sched::pool(workers).and_then(|pool| {
        let seed = config.seed;
        match &config.command {
            Command::Rates(c) => rates(c, out, &mut mw),
            Command::Sample(c) => sample(c, seed, out, &mut mw),
            Command::DecodeSweep(c) => decode_sweep(c, seed, out, &pool, &mut mw),
            Command::McRun(c) => mc_run(c, seed, out, &pool, &mut mw),
            Command::Fss(c) => fss(c, out, &mut mw),
            Command::Report => report(out, &mut mw),
        }
    });
    match result {
        Ok(()) => mw.finish(Status::Complete),
        Err(e) => {
            mw.manifest.notes.push(format!("aborted: {e}"));
            mw.finish(Status::Failed)?;
            Err(e)
        }
    }
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct RatesOutput {
    pub circuit: Option<CircuitNoiseParams>,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub pi: [f64; 4],
    /// `None` when some cell probability vanishes and no floor is set.
    pub kappa: Option<[f64; 4]>,
    #[serde(rename = "J")]
    pub j: Option<[f64; 3]>,
    pub kappa_norm: Option<f64>,
    #[serde(rename = "T_N")]
    pub t_n: Option<f64>,
    pub normalization: Normalization,
    pub floored: bool,
    pub note: Option<String>,
}

pub fn rates_output(c: &RatesConfig) -> CliResult<RatesOutput> {
    let rates = match (&c.circuit, &c.rates) {
        (Some(circuit), _) => effective_rates_from_circuit(circuit)?,
        (None, Some(r)) => *r,
        (None, None) => EffectiveRates::default(),
    };
    let probs = fundamental_probs(&rates);
    let couplings = match nishimori_couplings(&probs, &c.couplings) {
        Ok(nc) => Ok(Some(nc)),
        Err(e @ (Error::InfiniteCoupling { .. } | Error::InvalidArgument(_))) => Err(e.to_string()),
        Err(e) => return Err(e.into()),
    };
    let nc = couplings.as_ref().ok().copied().flatten();
    Ok(RatesOutput {
        circuit: c.circuit,
        p: rates.p,
        q: rates.q,
        r: rates.r,
        pi: probs.pi,
        kappa: nc.map(|n| n.kappa),
        j: nc.map(|n| n.j),
        kappa_norm: nc.map(|n| n.kappa_norm),
        t_n: nc.map(|n| n.nishimori_temperature()),
        normalization: c.couplings.normalization,
        floored: nc.is_some_and(|n| n.floored),
        note: couplings.err(),
    })
}

fn rates(c: &RatesConfig, out: &Path, mw: &mut ManifestWriter) -> CliResult<()> {
    let o = rates_output(c)?;
    mw.manifest.grid.push(GridPoint {
        p: o.p,
        q: o.q,
        r: o.r,
        magnitudes: o.j.unwrap_or([f64::NAN; 3]),
        kappa_norm: o.kappa_norm,
        nishimori_temperature: o.t_n,
        temperatures: Vec::new(),
    });
    if let Some(n) = &o.note {
        mw.manifest.notes.push(n.clone());
    }
    write_json(&out.join(RATES_JSON), &o)?;
    mw.manifest.outputs.insert(RATES_JSON.into(), 1);
    Ok(())
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct SampleOutput {
    pub d: usize,
    pub rounds: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub seed: u64,
    /// `[round][cell]` flip indicators `(z_p, z_q, z_r)`, `-1` = flipped.
    pub disorder: Vec<Vec<[Sign; 3]>>,
    /// `[round][qubit]` data-link signs.
    pub data: Vec<Vec<Sign>>,
    /// `[round][ancilla]` measurement-link signs.
    pub measurement: Vec<Vec<Sign>>,
    /// `[round][ancilla]`, `-1` marks a defect.
    pub syndrome: Vec<Vec<Sign>>,
    pub defects: Vec<Defect>,
}

pub fn sample_output(c: &SampleConfig, seed: u64) -> CliResult<SampleOutput> {
    let dims = LatticeDims::new(c.d, c.rounds)?;
    let job_seed = derive_seed(seed, "sample");
    let s = sample_disorder(&dims, &c.rates, job_seed);
    let chain = chain_from_disorder(&s)?;
    let syn = syndrome_volume(&chain, &dims)?;
    let rows = |t: usize| (t - 1) * c.d..t * c.d;
    Ok(SampleOutput {
        d: c.d,
        rounds: c.rounds,
        p: c.rates.p,
        q: c.rates.q,
        r: c.rates.r,
        seed: job_seed,
        disorder: (1..=c.rounds).map(|t| s.z[rows(t)].to_vec()).collect(),
        data: (1..=c.rounds).map(|t| chain.v[rows(t)].to_vec()).collect(),
        measurement: (1..=c.rounds).map(|t| chain.h[rows(t)][..c.d - 1].to_vec()).collect(),
        syndrome: (1..=c.rounds)
            .map(|t| (0..c.d - 1).map(|x| if syn.get(x, t) { -1 } else { 1 }).collect())
            .collect(),
        defects: syn.defects(),
    })
}

fn sample(c: &SampleConfig, seed: u64, out: &Path, mw: &mut ManifestWriter) -> CliResult<()> {
    let o = sample_output(c, seed)?;
    mw.manifest.jobs.push(JobRecord {
        path: "sample".into(),
        seed: o.seed,
        attempts: 1,
    });
    write_json(&out.join(SAMPLE_JSON), &o)?;
    mw.manifest.outputs.insert(SAMPLE_JSON.into(), 1);
    Ok(())
}

// ---------------------------------------------------------------------------
// decode-sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct DecodeCrossing {
    pub family: Family,
    pub rounds: Option<usize>,
    /// `None` with fewer than two distances or three rates.
    pub outcome: Option<CrossingOutcome>,
}

/// Rows in job order: distances outer, rates inner, both as given.
pub fn decode_sweep_rows(
    c: &DecodeSweepConfig,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> CliResult<(Vec<DecodeRow>, Vec<JobRecord>)> {
    let jobs: Vec<(usize, f64, String)> =
        c.d.iter()
            .flat_map(|&d| {
                let rounds = c.rounds.unwrap_or(d);
                c.p.iter()
                    .map(move |&p| (d, p, format!("decode/d={d}/T={rounds}/p={p}")))
            })
            .collect();
    let opts = DecoderOptions::default();
    let results = sched::run_jobs(pool, &jobs, |(d, p, path)| {
        let rates = c.family.rates(*p)?;
        let dims = LatticeDims::new(*d, c.rounds.unwrap_or(*d))?;
        let est = logical_error_rate_with(&dims, &rates, c.trials, derive_seed(seed, path), &opts)?;
        Ok(DecodeRow {
            d: *d,
            p: rates.p,
            q: rates.q,
            r: rates.r,
            trials: est.trials,
            failures: est.failures,
            rate: est.rate,
            stderr: est.stderr,
        })
    })?;
    let records = jobs
        .iter()
        .zip(&results)
        .map(|((_, _, path), r)| JobRecord {
            path: path.clone(),
            seed: derive_seed(seed, path),
            attempts: r.attempts,
        })
        .collect();
    Ok((results.into_iter().map(|r| r.value).collect(), records))
}

/// Crossing of the failure-rate curves, located as the crossing of the
/// negated rates: larger codes sit lower below threshold.
pub fn decode_crossing(rows: &[DecodeRow]) -> CliResult<Option<CrossingOutcome>> {
    let mut ds: Vec<usize> = rows.iter().map(|r| r.d).collect();
    ds.sort_unstable();
    ds.dedup();
    let mut ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    if ds.len() < 2 || ps.len() < 3 {
        return Ok(None);
    }
    let mut values = vec![vec![f64::NAN; ps.len()]; ds.len()];
    let mut errors = vec![vec![f64::NAN; ps.len()]; ds.len()];
    for r in rows {
        let i = ds.binary_search(&r.d).unwrap();
        let k = ps.binary_search_by(|p| p.total_cmp(&r.p)).unwrap();
        values[i][k] = -r.rate;
        errors[i][k] = r.stderr;
    }
    if values.iter().flatten().any(|v| v.is_nan()) {
        return Err(CliError::user("decode-sweep grid is not rectangular"));
    }
    Ok(Some(find_crossing(&CurveFamily::new(ds, ps, values, errors)?)?))
}

fn decode_sweep(
    c: &DecodeSweepConfig,
    seed: u64,
    out: &Path,
    pool: &rayon::ThreadPool,
    mw: &mut ManifestWriter,
) -> CliResult<()> {
    for &p in &c.p {
        let rates = c.family.rates(p)?;
        mw.manifest.grid.push(grid_point(&rates, None, Vec::new()));
    }
    mw.write()?;
    let (rows, jobs) = decode_sweep_rows(c, seed, pool)?;
    mw.manifest.jobs = jobs;
    let n = write_csv(&out.join(DECODE_SWEEP_CSV), &DECODE_HEADER, &rows)?;
    mw.manifest.outputs.insert(DECODE_SWEEP_CSV.into(), n);
    let mut outcome = decode_crossing(&rows)?;
    if let Some(CrossingOutcome::Crossing(e)) = &mut outcome {
        e.provenance.case = Some(c.family.label.clone());
    }
    let crossing = DecodeCrossing {
        family: c.family.clone(),
        rounds: c.rounds,
        outcome,
    };
    write_json(&out.join(DECODE_CROSSING_JSON), &crossing)?;
    mw.manifest.outputs.insert(DECODE_CROSSING_JSON.into(), 1);
    Ok(())
}

fn grid_point(rates: &EffectiveRates, magnitudes: Option<[f64; 3]>, temperatures: Vec<f64>) -> GridPoint {
    let nc = nishimori_couplings(&fundamental_probs(rates), &CouplingOptions::default()).ok();
    GridPoint {
        p: rates.p,
        q: rates.q,
        r: rates.r,
        magnitudes: magnitudes.or(nc.map(|n| n.j)).unwrap_or([f64::NAN; 3]),
        kappa_norm: nc.map(|n| n.kappa_norm),
        nishimori_temperature: nc.map(|n| n.nishimori_temperature()),
        temperatures,
    }
}

// ---------------------------------------------------------------------------
// mc-run
// ---------------------------------------------------------------------------

/// Lattice recipe of one `p` grid point.
#[derive(Debug, Clone)]
struct McPoint {
    rates: EffectiveRates,
    /// Disorder-free run with these magnitudes, or `None` for disorder.
    clean: Option<[f64; 3]>,
    grid: GridPoint,
}

fn mc_points(c: &McRunConfig) -> CliResult<Vec<McPoint>> {
    c.p.iter()
        .map(|&p| {
            let rates = c.family.rates(p)?;
            let (magnitudes, clean, kappa_norm, t_n) = if p == 0.0 {
                let m = c.magnitudes.unwrap_or_else(|| c.family.clean_magnitudes());
                (m, Some(m), None, None)
            } else {
                if c.magnitudes.is_some() {
                    return Err(CliError::user("magnitudes apply only to p = 0"));
                }
                let nc = nishimori_couplings(&fundamental_probs(&rates), &c.couplings)?;
                (nc.j, None, Some(nc.kappa_norm), Some(nc.nishimori_temperature()))
            };
            let temperatures = match &c.temperatures {
                Some(t) => t.clone(),
                None => McSchedule::default_ladder(exact_triangular_tc(magnitudes[0], magnitudes[1], magnitudes[2])?),
            };
            Ok(McPoint {
                rates,
                clean,
                grid: GridPoint {
                    p: rates.p,
                    q: rates.q,
                    r: rates.r,
                    magnitudes,
                    kappa_norm,
                    nishimori_temperature: t_n,
                    temperatures,
                },
            })
        })
        .collect()
}

/// Rows ordered by `p`, then `L`, then temperature.
pub fn mc_run_rows(
    c: &McRunConfig,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> CliResult<(Vec<McRow>, Vec<JobRecord>, Vec<GridPoint>)> {
    let points = mc_points(c)?;
    let label = &c.family.label;
    let jobs: Vec<(usize, usize, String)> = points
        .iter()
        .enumerate()
        .flat_map(|(k, pt)| {
            c.l.iter().flat_map(move |&l| {
                (0..c.samples).map(move |i| (k, l, format!("mc/{label}/p={}/L={l}/sample={i}", pt.rates.p)))
            })
        })
        .collect();
    let results = sched::run_jobs(pool, &jobs, |(k, l, path)| {
        let pt = &points[*k];
        let job_seed = derive_seed(seed, path);
        let lattice = match pt.clean {
            Some(m) => BondLattice::uniform(*l, m)?,
            None => BondLattice::from_rates(*l, &pt.rates, &c.couplings, derive_seed(job_seed, "disorder"))?,
        };
        let schedule = McSchedule {
            temperatures: pt.grid.temperatures.clone(),
            ..c.schedule.clone()
        };
        let series = run_disorder_sample(&lattice, &schedule, derive_seed(job_seed, "thermal"))?;
        if !(series.max_energy_drift <= MAX_ENERGY_DRIFT) {
            return Err(CliError::Internal(format!(
                "{path}: cached energy drifted by {:e}",
                series.max_energy_drift
            )));
        }
        Ok(series)
    })?;
    let records = jobs
        .iter()
        .zip(&results)
        .map(|((_, _, path), r)| JobRecord {
            path: path.clone(),
            seed: derive_seed(seed, path),
            attempts: r.attempts,
        })
        .collect();
    let series: Vec<ObservableSeries> = results.into_iter().map(|r| r.value).collect();
    let mut rows = Vec::new();
    if c.samples > 0 {
        for (chunk, (k, l, _)) in series.chunks(c.samples).zip(jobs.iter().step_by(c.samples)) {
            rows.extend(aggregate(label, &points[*k].rates, *l, chunk)?);
        }
    }
    Ok((rows, records, points.into_iter().map(|p| p.grid).collect()))
}

fn aggregate(label: &str, rates: &EffectiveRates, l: usize, series: &[ObservableSeries]) -> CliResult<Vec<McRow>> {
    let curve = xi_curve(series)?;
    let n = series.len() as f64;
    let nt = curve.len();
    Ok(curve
        .iter()
        .enumerate()
        .map(|(k, pt)| McRow {
            case: label.to_owned(),
            p: rates.p,
            q: rates.q,
            r: rates.r,
            l,
            temperature: pt.temperature,
            xi_over_l: pt.xi_over_l,
            xi_err: pt.error,
            g0: series.iter().map(|s| s.g0_mean(k)).sum::<f64>() / n,
            gq: series.iter().map(|s| s.gq_mean(k)).sum::<f64>() / n,
            metropolis_acceptance: series.iter().map(|s| s.metropolis_acceptance[k]).sum::<f64>() / n,
            swap_acceptance: (k + 1 < nt).then(|| series.iter().map(|s| s.swap_acceptance[k]).sum::<f64>() / n),
            samples: series.len(),
            invalid_samples: pt.invalid_samples,
        })
        .collect())
}

fn mc_run(c: &McRunConfig, seed: u64, out: &Path, pool: &rayon::ThreadPool, mw: &mut ManifestWriter) -> CliResult<()> {
    mw.manifest.grid = mc_points(c)?.into_iter().map(|p| p.grid).collect();
    mw.write()?;
    let (rows, jobs, _) = mc_run_rows(c, seed, pool)?;
    mw.manifest.jobs = jobs;
    let n = write_csv(&out.join(MC_RUN_CSV), &MC_HEADER, &rows)?;
    mw.manifest.outputs.insert(MC_RUN_CSV.into(), n);
    Ok(())
}

// ---------------------------------------------------------------------------
// fss
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct FssPoint {
    pub case: String,
    pub p: f64,
    pub sizes: Vec<usize>,
    pub outcome: Option<CrossingOutcome>,
    /// Why no analysis was possible.
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct FssThreshold {
    pub case: String,
    pub outcome: BracketOutcome,
}

#[derive(Debug, Serialize)]
pub struct FssOutput {
    pub points: Vec<FssPoint>,
    pub thresholds: Vec<FssThreshold>,
}

/// Groups mc-run rows into one curve family per `(case, p)`.
pub fn curve_families(rows: &[McRow]) -> Vec<(String, f64, CliResult<CurveFamily>)> {
    let mut groups: BTreeMap<(String, u64), BTreeMap<usize, Vec<&McRow>>> = BTreeMap::new();
    for r in rows {
        // Non-negative floats order like their bit patterns.
        groups
            .entry((r.case.clone(), r.p.to_bits()))
            .or_default()
            .entry(r.l)
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((case, pbits), by_l)| {
            let fam = (|| {
                let mut sizes = Vec::new();
                let mut values = Vec::new();
                let mut errors = Vec::new();
                let mut grid: Option<Vec<f64>> = None;
                for (l, mut pts) in by_l {
                    pts.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
                    let temps: Vec<f64> = pts.iter().map(|r| r.temperature).collect();
                    if grid.as_ref().is_some_and(|g| *g != temps) {
                        return Err(CliError::user(format!(
                            "{case} p={}: sizes use different temperature grids",
                            f64::from_bits(pbits)
                        )));
                    }
                    grid = Some(temps);
                    sizes.push(l);
                    values.push(pts.iter().map(|r| r.xi_over_l).collect());
                    errors.push(pts.iter().map(|r| r.xi_err).collect());
                }
                // Saturated columns (infinite xi in the ordered limit) carry
                // no crossing information.
                let grid = grid.unwrap_or_default();
                let keep: Vec<usize> = (0..grid.len())
                    .filter(|&k| values.iter().chain(&errors).all(|row: &Vec<f64>| row[k].is_finite()))
                    .collect();
                let pick = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                    rows.into_iter().map(|r| keep.iter().map(|&k| r[k]).collect()).collect()
                };
                let temps = keep.iter().map(|&k| grid[k]).collect();
                Ok(CurveFamily::new(sizes, temps, pick(values), pick(errors))?)
            })();
            (case, f64::from_bits(pbits), fam)
        })
        .collect()
}

pub fn fss_output(rows: &[McRow]) -> CliResult<FssOutput> {
    let families = curve_families(rows);
    let mut points = Vec::new();
    let mut by_case: BTreeMap<String, Vec<(f64, CurveFamily)>> = BTreeMap::new();
    for (case, p, fam) in families {
        match fam {
            Ok(fam) => {
                let mut outcome = find_crossing(&fam)?;
                if let CrossingOutcome::Crossing(e) = &mut outcome {
                    e.provenance.case = Some(case.clone());
                }
                points.push(FssPoint {
                    case: case.clone(),
                    p,
                    sizes: fam.sizes.clone(),
                    outcome: Some(outcome),
                    error: None,
                });
                by_case.entry(case).or_default().push((p, fam));
            }
            Err(e) => points.push(FssPoint {
                case,
                p,
                sizes: Vec::new(),
                outcome: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let mut thresholds = Vec::new();
    for (case, fams) in by_case {
        let grid: Vec<f64> = fams.iter().map(|f| f.0).collect();
        let outcome = threshold_bracket(Some(&case), &grid, |p| {
            Ok(fams.iter().find(|f| f.0 == p).expect("grid point present").1.clone())
        })?;
        thresholds.push(FssThreshold { case, outcome });
    }
    Ok(FssOutput { points, thresholds })
}

pub fn phase_rows(o: &FssOutput) -> Vec<PhaseRow> {
    o.points
        .iter()
        .filter_map(|pt| {
            let e = pt.outcome.as_ref()?.estimate()?;
            Some(PhaseRow {
                case: pt.case.clone(),
                p: pt.p,
                t_c: e.value,
                err: e.uncertainty,
            })
        })
        .collect()
}

fn fss(c: &FssConfig, out: &Path, mw: &mut ManifestWriter) -> CliResult<()> {
    if c.inputs.is_empty() {
        return Err(CliError::user("fss needs at least one input CSV"));
    }
    let mut rows: Vec<McRow> = Vec::new();
    for path in &c.inputs {
        rows.extend(read_csv::<McRow>(path, &MC_HEADER)?);
    }
    let o = fss_output(&rows)?;
    let phase = phase_rows(&o);
    write_json(&out.join(FSS_JSON), &o)?;
    mw.manifest.outputs.insert(FSS_JSON.into(), o.points.len());
    let n = write_csv(&out.join(PHASE_DIAGRAM_CSV), &PHASE_HEADER, &phase)?;
    mw.manifest.outputs.insert(PHASE_DIAGRAM_CSV.into(), n);
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct CleanReference {
    pub case: Case,
    /// Magnitudes at a small reference disorder.
    pub p: f64,
    pub magnitudes: [f64; 3],
    /// Exact critical temperature of the disorder-free model with these
    /// magnitudes.
    pub t_c: f64,
    /// The same for the `p -> 0` limit of the magnitudes.
    pub t_c_limit: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub manifests: Vec<Manifest>,
    pub fss: Option<serde_json::Value>,
    pub phase_diagram: Vec<PhaseRow>,
    pub clean_reference: Vec<CleanReference>,
    pub notes: Vec<String>,
}

pub fn clean_reference() -> CliResult<Vec<CleanReference>> {
    const P: f64 = 1e-3;
    Case::ALL
        .iter()
        .map(|&case| {
            let nc = nishimori_couplings(&fundamental_probs(&case.rates(P)?), &CouplingOptions::default())?;
            let [a, b, c] = nc.j;
            Ok(CleanReference {
                case,
                p: P,
                magnitudes: nc.j,
                t_c: exact_triangular_tc(a, b, c)?,
                t_c_limit: case.clean_tc(),
            })
        })
        .collect()
}

fn report(out: &Path, mw: &mut ManifestWriter) -> CliResult<()> {
    let mut names: Vec<_> = std::fs::read_dir(out)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("manifest_") && n.ends_with(".json") && n != "manifest_report.json")
        .collect();
    names.sort();
    let mut notes = Vec::new();
    let mut manifests = Vec::new();
    for n in &names {
        let m = read_manifest(&out.join(n))?;
        if m.status != Status::Complete {
            notes.push(format!("{n}: status {:?}", m.status).to_lowercase());
        }
        manifests.push(m);
    }
    let fss_path = out.join(FSS_JSON);
    let fss = if fss_path.exists() {
        Some(
            serde_json::from_slice(&std::fs::read(&fss_path)?)
                .map_err(|e| CliError::user(format!("{FSS_JSON}: {e}")))?,
        )
    } else {
        None
    };
    let phase_path = out.join(PHASE_DIAGRAM_CSV);
    let phase_diagram = if phase_path.exists() {
        read_csv(&phase_path, &PHASE_HEADER)?
    } else {
        Vec::new()
    };
    let r = Report {
        manifests,
        fss,
        phase_diagram,
        clean_reference: clean_reference()?,
        notes,
    };
    write_json(&out.join(REPORT_JSON), &r)?;
    mw.manifest.outputs.insert(REPORT_JSON.into(), r.manifests.len());
    Ok(())
}
