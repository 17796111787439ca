//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Numeric arguments select criteria, e.g.
//! `cargo test -p replab-cli --test acceptance -- 1 2 5`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::time::Instant;

use rand::Rng;

use replab_cli::commands::{decode_crossing, decode_sweep_rows, execute, fss_output, mc_run_rows};
use replab_cli::config::{Command, DecodeSweepConfig, Family, McRunConfig, RunConfig};
use replab_cli::sched;
use replab_core::decoder::{
    boundary_distance, decode, defect_distance, defect_distance_in, logical_error_rate, WeightMetric,
};
use replab_core::fss::{
    exact_triangular_tc, find_crossing, jackknife, threshold_bracket, BracketHint, BracketOutcome, Case,
    CrossingOutcome, CurveFamily, Method,
};
use replab_core::lattice::{Defect, LatticeDims, SyndromeVolume};
use replab_core::matching::{quantize, solve_mwpm, MatchingGraph, Weight};
use replab_core::noise::{
    effective_rates_from_circuit, fundamental_probs, nishimori_couplings, verify_factorization, CircuitNoiseParams,
    CouplingOptions, EffectiveRates, TWO_QUBIT_CAP,
};
use replab_core::rng::{derive_seed, stream};
use replab_core::spin_glass::{exhaustive_observables, run_disorder_sample, BondLattice, McSchedule};

const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pool() -> rayon::ThreadPool {
    sched::pool(std::thread::available_parallelism().map_or(1, |n| n.get())).unwrap()
}

// 1 -------------------------------------------------------------------------

fn channel_factorization() -> Outcome {
    let worst = (0..20)
        .map(|k| verify_factorization(TWO_QUBIT_CAP * k as f64 / 19.0).unwrap())
        .fold(0.0, f64::max);
    let rates = effective_rates_from_circuit(&CircuitNoiseParams::uniform(1e-4)).unwrap();
    let ratio = rates.r / rates.p;
    check(
        worst <= 1e-12 && (ratio - 1.0 / 6.0).abs() <= 1e-3,
        format!("max PTM deviation {worst:.2e} (<= 1e-12); r/p = {ratio:.5} at lambda = 1e-4 (1/6 +- 1e-3)"),
    )
}

// 2 -------------------------------------------------------------------------

fn probability_algebra() -> Outcome {
    let mut rng = stream(SEED, "acceptance/probabilities");
    let (mut sum_err, mut rec_err) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let rates = EffectiveRates::new(
            rng.random_range(1e-6..0.49),
            rng.random_range(1e-6..0.49),
            rng.random_range(1e-6..0.49),
        )
        .unwrap();
        let probs = fundamental_probs(&rates);
        sum_err = sum_err.max((probs.pi.iter().sum::<f64>() - 1.0).abs());
        let [k0, k1, k2, k3] = nishimori_couplings(&probs, &CouplingOptions::default()).unwrap().kappa;
        for (i, (v, h)) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)]
            .into_iter()
            .enumerate()
        {
            let log_pi = probs.pi[i].ln();
            let rebuilt = k0 + k1 * h + k2 * v + k3 * v * h;
            rec_err = rec_err.max((rebuilt - log_pi).abs() / log_pi.abs().max(1.0));
        }
    }
    let mut nonzero_k3 = 0;
    for _ in 0..1000 {
        let rates = EffectiveRates::new(rng.random_range(1e-6..0.49), rng.random_range(1e-6..0.49), 0.0).unwrap();
        let c = nishimori_couplings(&fundamental_probs(&rates), &CouplingOptions::default()).unwrap();
        nonzero_k3 += usize::from(c.kappa[3] != 0.0);
    }
    check(
        sum_err <= 1e-12 && rec_err <= 1e-12 && nonzero_k3 == 0,
        format!("max |sum pi - 1| = {sum_err:.1e}; max log-reconstruction error {rec_err:.1e}; kappa3 != 0 at r = 0 in {nonzero_k3}/1000"),
    )
}

// 3 -------------------------------------------------------------------------

/// Minimum over every assignment of each defect to another defect or to
/// the boundary.
fn brute_force(pair: &[Vec<Weight>], boundary: &[Weight]) -> Weight {
    fn rec(rest: &mut Vec<usize>, pair: &[Vec<Weight>], boundary: &[Weight]) -> Weight {
        let Some(a) = rest.pop() else { return 0 };
        let mut best = boundary[a] + rec(rest, pair, boundary);
        for idx in 0..rest.len() {
            let b = rest.remove(idx);
            best = best.min(pair[a][b] + rec(rest, pair, boundary));
            rest.insert(idx, b);
        }
        rest.push(a);
        best
    }
    rec(&mut (0..boundary.len()).collect(), pair, boundary)
}

fn matching_exactness() -> Outcome {
    let mut rng = stream(SEED, "acceptance/matching");
    let mut mismatches = Vec::new();
    for trial in 0..1000 {
        let dims = LatticeDims::new(rng.random_range(3..=10), rng.random_range(1..=8)).unwrap();
        // Dyadic weights quantize exactly, so every route cost is exact in
        // solver units.
        let mut w = || rng.random_range(4..=32) as f64 / 8.0;
        let metric = WeightMetric {
            w_p: w(),
            w_q: w(),
            w_r: w(),
        };
        let sites = dims.ancillas() * dims.rounds;
        let n = rng.random_range(1..=8.min(sites));
        let mut syn = SyndromeVolume::empty(dims);
        while syn.count() < n {
            let (x, t) = (rng.random_range(0..dims.ancillas()), rng.random_range(1..=dims.rounds));
            if !syn.get(x, t) {
                syn.toggle(x, t);
            }
        }
        let defects: Vec<Defect> = syn.defects();
        let pair: Vec<Vec<Weight>> = defects
            .iter()
            .map(|&a| {
                defects
                    .iter()
                    .map(|&b| quantize(defect_distance_in(a, b, &metric, &dims)))
                    .collect()
            })
            .collect();
        let boundary: Vec<Weight> = defects
            .iter()
            .map(|&a| quantize(boundary_distance(a, &metric, &dims)))
            .collect();
        let want = brute_force(&pair, &boundary);
        let graph = MatchingGraph::with_boundary(n, |i, j| Some(pair[i][j]), |i| Some(boundary[i]));
        let solver = solve_mwpm(&graph).unwrap().total_weight;
        let decoder = decode(&syn, &metric, &dims).unwrap().matched_weight;
        if solver != want || decoder != want {
            mismatches.push(format!("#{trial}: brute {want} solver {solver} decoder {decoder}"));
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "1000 instances with <= 8 defects; exact weight mismatches: {}{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first {m})")).unwrap_or_default()
        ),
    )
}

// 4 -------------------------------------------------------------------------

fn metric_correctness() -> Outcome {
    let mut rng = stream(SEED, "acceptance/metric");
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
    let (mut checked, mut bad) = (0usize, Vec::new());
    for k in 0..100 {
        let wp = rng.random_range(0.05..4.0);
        let wr = rng.random_range(0.05..4.0);
        let wq = if k % 4 == 0 {
            wp + wr
        } else {
            rng.random_range(0.05..4.0)
        };
        let w = [wp, wq, wr];
        let m = WeightMetric {
            w_p: wp,
            w_q: wq,
            w_r: wr,
        };
        let dist = support::free_distances(w, 6);
        let a = Defect { x: 10, t: 10 };
        for dx in -6i64..=6 {
            for dt in -6i64..=6 {
                let b = Defect {
                    x: (10 + dx) as usize,
                    t: (10 + dt) as usize,
                };
                let (got, want) = (defect_distance(a, b, &m), dist[&(dx, dt)]);
                checked += 1;
                if !close(got, want) {
                    bad.push(format!("w={w:?} ({dx},{dt}): {got} vs {want}"));
                }
            }
        }
        // The code-lattice metric, boundaries included.
        let dims = LatticeDims::new(2 + k % 6, 1 + k % 5).unwrap();
        for x in 0..dims.ancillas() {
            for t in 1..=dims.rounds {
                let src = (x as i64, t as i64);
                let a = Defect { x, t };
                let inside = support::bounded_distances(&dims, src, w);
                for y in 0..dims.ancillas() {
                    for u in 1..=dims.rounds {
                        let got = defect_distance_in(a, Defect { x: y, t: u }, &m, &dims);
                        checked += 1;
                        if !close(got, inside[&(y as i64, u as i64)]) {
                            bad.push(format!("{dims:?} w={w:?} {a:?}->({y},{u})"));
                        }
                    }
                }
                checked += 1;
                if !close(
                    boundary_distance(a, &m, &dims),
                    support::bounded_boundary_distance(&dims, src, w),
                ) {
                    bad.push(format!("{dims:?} w={w:?} {a:?}->boundary"));
                }
            }
        }
    }
    check(
        bad.is_empty(),
        format!(
            "{checked} distances vs Dijkstra over 100 weight triples (25 with w_q = w_p + w_r); mismatches {}{}",
            bad.len(),
            bad.first().map(|b| format!(" (first {b})")).unwrap_or_default()
        ),
    )
}

// 5 -------------------------------------------------------------------------

fn decoder_oracle() -> Outcome {
    let dims = LatticeDims::new(3, 3).unwrap();
    let rates = EffectiveRates::new(0.05, 0.05, 0.02).unwrap();
    let exact = support::exact_failure_probability(&dims, &rates);
    let est = logical_error_rate(&dims, &rates, 100_000, derive_seed(SEED, "acceptance/oracle")).unwrap();
    let sigma = (exact * (1.0 - exact) / est.trials as f64).sqrt();
    let z = (est.rate - exact) / sigma;
    check(
        z.abs() <= 3.0,
        format!(
            "d=3 T=3: sampled {:.5} vs exact {exact:.5} over 1e5 trials, z = {z:+.2} (|z| <= 3)",
            est.rate
        ),
    )
}

// 6 -------------------------------------------------------------------------

fn decoder_thresholds() -> Outcome {
    let grids = [
        (Case::I, vec![0.065, 0.07, 0.075, 0.08, 0.085]),
        (Case::II, vec![0.052, 0.057, 0.062, 0.067, 0.072]),
        (Case::III, vec![0.04, 0.044, 0.048, 0.052, 0.056]),
        (Case::IV, vec![0.085, 0.0925, 0.1, 0.1075, 0.115]),
    ];
    let pool = pool();
    let mut found = Vec::new();
    for (case, p) in grids {
        let cfg = DecodeSweepConfig {
            family: Family::preset(case),
            p,
            d: vec![7, 11, 15],
            rounds: None,
            trials: 100_000,
        };
        let (rows, _) = decode_sweep_rows(&cfg, SEED, &pool).map_err(|e| e.to_string())?;
        let est = match decode_crossing(&rows).map_err(|e| e.to_string())? {
            Some(CrossingOutcome::Crossing(e)) => Some((e.value, e.uncertainty)),
            other => {
                eprintln!("  case {case}: {other:?}");
                None
            }
        };
        found.push((case, est));
    }
    let get = |c: Case| found.iter().find(|f| f.0 == c).and_then(|f| f.1);
    let fmt = |c: Case| get(c).map_or("none".into(), |(v, e)| format!("{v:.4}+-{e:.4}"));
    let within = |c: Case, target: f64, tol: f64| get(c).is_some_and(|(v, _)| (v - target).abs() <= tol);
    let ordered = match (get(Case::I), get(Case::II), get(Case::III)) {
        (Some(a), Some(b), Some(c)) => a.0 > b.0 && b.0 > c.0,
        _ => false,
    };
    check(
        within(Case::II, 0.064, 0.006) && within(Case::IV, 0.10, 0.01) && ordered,
        format!(
            "d = 7, 11, 15, 1e5 trials: I {}, II {} (0.064 +- 0.006), III {}, IV {} (0.10 +- 0.01); I > II > III {}",
            fmt(Case::I),
            fmt(Case::II),
            fmt(Case::III),
            fmt(Case::IV),
            if ordered { "holds" } else { "fails" }
        ),
    )
}

// 7, 8 ----------------------------------------------------------------------

fn mc_crossing(case: Case, p: f64, samples: usize) -> Result<(f64, f64), String> {
    let cfg = McRunConfig {
        family: Family::preset(case),
        p: vec![p],
        l: vec![8, 12, 16],
        samples,
        magnitudes: None,
        couplings: CouplingOptions::default(),
        temperatures: None,
        schedule: McSchedule::desk(Vec::new()),
    };
    let (rows, _, _) = mc_run_rows(&cfg, SEED, &pool()).map_err(|e| e.to_string())?;
    let out = fss_output(&rows).map_err(|e| e.to_string())?;
    match out.points.first().and_then(|pt| pt.outcome.as_ref()) {
        Some(CrossingOutcome::Crossing(e)) => Ok((e.value, e.uncertainty)),
        other => Err(format!("no crossing: {other:?}")),
    }
}

fn clean_lattice_mc() -> Outcome {
    let square = mc_crossing(Case::IV, 0.0, 1)?;
    let triangular = mc_crossing(Case::II, 0.0, 1)?;
    let (ex_sq, ex_tri) = (
        exact_triangular_tc(1.0, 1.0, 0.0).unwrap(),
        exact_triangular_tc(1.0, 1.0, 1.0).unwrap(),
    );
    check(
        (square.0 - 2.269).abs() <= 0.05 && (triangular.0 - 3.641).abs() <= 0.07,
        format!(
            "L = 8, 12, 16: J3 = 0 gives {:.3}+-{:.3} (2.269 +- 0.05, exact {ex_sq:.4}); J = (1,1,1) gives {:.3}+-{:.3} (3.641 +- 0.07, exact {ex_tri:.4})",
            square.0, square.1, triangular.0, triangular.1
        ),
    )
}

fn disordered_mc() -> Outcome {
    let (v, e) = mc_crossing(Case::IV, 0.06, 64)?;
    check(
        (v - 1.76).abs() <= 0.08,
        format!("r = 0, p = 0.06, L = 8, 12, 16, 64 samples: T_c = {v:.3}+-{e:.3} (1.76 +- 0.08)"),
    )
}

// 9 -------------------------------------------------------------------------

fn tiny_lattice_equivalence() -> Outcome {
    let rates = Case::II.rates(0.1).unwrap();
    let temps = vec![1.0, 1.8, 3.0];
    let schedule = McSchedule {
        temperatures: temps.clone(),
        n_met: 1,
        swap_rounds: 600_000,
        discard_fraction: 0.5,
        measure_every: 1,
        bins: 30,
    };
    let mut zs = Vec::new();
    for i in 0..10 {
        let lat = BondLattice::from_rates(
            4,
            &rates,
            &CouplingOptions::default(),
            derive_seed(SEED, &format!("tiny/disorder/{i}")),
        )
        .map_err(|e| e.to_string())?;
        let series = run_disorder_sample(&lat, &schedule, derive_seed(SEED, &format!("tiny/thermal/{i}")))
            .map_err(|e| e.to_string())?;
        for (k, &t) in temps.iter().enumerate() {
            let exact = exhaustive_observables(&lat, t).map_err(|e| e.to_string())?;
            for (bins, want) in [(&series.g0_bins[k], exact.g0), (&series.gq_bins[k], exact.gq)] {
                let (mean, err) = jackknife(bins).map_err(|e| e.to_string())?;
                zs.push((mean - want) / err);
            }
        }
    }
    let worst = zs.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    let rms = (zs.iter().map(|z| z * z).sum::<f64>() / zs.len() as f64).sqrt();
    check(
        worst <= 3.0,
        format!("L = 4, 10 samples x 3 temperatures x (G0, Gq): max |z| = {worst:.2} (<= 3), rms z = {rms:.2}"),
    )
}

// 10 ------------------------------------------------------------------------

fn planted_family(t_star: Option<f64>) -> CurveFamily {
    let sizes = vec![8, 12, 16];
    let temps: Vec<f64> = (0..9).map(|k| 1.4 + 0.1 * k as f64).collect();
    let values = sizes
        .iter()
        .map(|&l| {
            temps
                .iter()
                .map(|t| match t_star {
                    Some(ts) => 0.6 - 0.02 * l as f64 * (t - ts),
                    // Ordered by size at every temperature: no crossing.
                    None => 0.1 + 0.01 * l as f64 - 0.05 * t,
                })
                .collect()
        })
        .collect();
    CurveFamily::new(sizes, temps, values, vec![vec![0.005; 9]; 3]).unwrap()
}

fn threshold_bracketing() -> Outcome {
    let mut rng = stream(SEED, "acceptance/bracket");
    let mut failures = Vec::new();
    for trial in 0..200 {
        let n = rng.random_range(2..=8);
        let start = rng.random_range(0.01..0.05);
        let step = rng.random_range(0.002..0.01);
        let grid: Vec<f64> = (0..n).map(|k| start + step * k as f64).collect();
        // Crossings persist on grid[..cut]; cut = 0 or n is inconclusive.
        let cut = rng.random_range(0..=n);
        let t_of = |p: f64| 2.2 - 4.0 * p;
        let limit = if cut == n { f64::INFINITY } else { grid[cut] };
        let mut crossing_ok = true;
        let out = threshold_bracket(Some("planted"), &grid, |p| {
            let fam = planted_family((p < limit).then(|| t_of(p)));
            if p < limit {
                if let Some(e) = find_crossing(&fam)?.estimate() {
                    crossing_ok &= (e.value - t_of(p)).abs() <= 1e-9;
                } else {
                    crossing_ok = false;
                }
            }
            Ok(fam)
        })
        .map_err(|e| e.to_string())?;
        let good = match (&out, cut) {
            (
                BracketOutcome::Inconclusive {
                    hint: BracketHint::ExtendDown,
                    ..
                },
                0,
            ) => true,
            (
                BracketOutcome::Inconclusive {
                    hint: BracketHint::ExtendUp,
                    ..
                },
                c,
            ) if c == n => true,
            (BracketOutcome::Estimate(e), c) if c > 0 && c < n => {
                let (lo, hi) = (grid[c - 1], grid[c]);
                e.method == Method::Bracket
                    && e.bracket == Some((lo, hi))
                    && e.value == 0.5 * (lo + hi)
                    && e.uncertainty == 0.5 * (hi - lo)
            }
            _ => false,
        };
        if !(good && crossing_ok) {
            failures.push(format!("trial {trial}: cut {cut} of {n}: {out:?}"));
        }
    }
    check(
        failures.is_empty(),
        format!(
            "200 planted grids: midpoint and half-gap recovered, inconclusive grids flagged; failures {}{}",
            failures.len(),
            failures.first().map(|f| format!(" (first {f})")).unwrap_or_default()
        ),
    )
}

// 11 ------------------------------------------------------------------------

fn determinism() -> Outcome {
    let sweep = RunConfig {
        seed: SEED,
        command: Command::DecodeSweep(DecodeSweepConfig {
            family: Family::preset(Case::II),
            p: vec![0.05, 0.06, 0.07],
            d: vec![5, 7],
            rounds: None,
            trials: 3000,
        }),
    };
    let mc = RunConfig {
        seed: SEED,
        command: Command::McRun(McRunConfig {
            family: Family::preset(Case::I),
            p: vec![0.0, 0.05],
            l: vec![4, 6],
            samples: 6,
            magnitudes: None,
            couplings: CouplingOptions::default(),
            temperatures: None,
            schedule: McSchedule {
                swap_rounds: 400,
                ..McSchedule::desk(Vec::new())
            },
        }),
    };
    let many = std::thread::available_parallelism().map_or(1, |n| n.get()).max(4);
    let mut outputs = Vec::new();
    for workers in [1, many, 1] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        execute(&sweep, dir.path(), workers).map_err(|e| e.to_string())?;
        execute(&mc, dir.path(), workers).map_err(|e| e.to_string())?;
        let read = |f: &str| std::fs::read(dir.path().join(f)).map_err(|e| e.to_string());
        outputs.push((read("decode_sweep.csv")?, read("mc_run.csv")?));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    check(
        same,
        format!(
            "decode-sweep and mc-run CSVs at 1, {many}, 1 workers: {}",
            if same { "byte-identical" } else { "differ" }
        ),
    )
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "channel factorization", channel_factorization),
        (2, "probability algebra", probability_algebra),
        (3, "matching exactness", matching_exactness),
        (4, "metric correctness", metric_correctness),
        (5, "decoder oracle", decoder_oracle),
        (6, "decoder thresholds", decoder_thresholds),
        (7, "clean-lattice Monte Carlo", clean_lattice_mc),
        (8, "disordered Monte Carlo", disordered_mc),
        (9, "tiny-lattice equivalence", tiny_lattice_equivalence),
        (10, "threshold bracketing", threshold_bracketing),
        (11, "determinism", determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id:>2}] {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id:>2}] {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
