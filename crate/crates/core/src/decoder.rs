//! Minimum-weight perfect-matching decoder on the space-time defect graph.
//!
//! Defects live on the ancilla lattice `(x, t)`. Elementary error events
//! connect them by three step types: a data flip moves one step in space
//! (`p`), a measurement flip one step in time (`q`), and a correlated flip
//! one step along the `(+1, +1)` diagonal (`r`). Pair weights are the
//! minimum over the three two-type Manhattan metrics; a path that mixes all
//! three types can always be shortened by eliminating one of them.
//!
//! Weights are quantized to integers before matching so that the solver is
//! exact and triangle inequalities hold without rounding slack.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    chain_from_disorder, residual_logical_class, syndrome_volume, Defect, DisorderSample, ErrorChain, LatticeDims,
    LogicalClass, SyndromeVolume,
};
use crate::matching::{self, quantize, solve_mwpm, MatchingGraph, Weight, WEIGHT_SCALE};
use crate::noise::EffectiveRates;
use crate::rng;

/// Log-likelihood weight per step type; `+inf` marks an impossible step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightMetric {
    pub w_p: f64,
    pub w_q: f64,
    pub w_r: f64,
}

impl WeightMetric {
    pub fn uniform(w: f64) -> Self {
        Self { w_p: w, w_q: w, w_r: w }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.w_p, self.w_q, self.w_r]
    }
}

/// `-ln(x / (1 - x))`, infinite at `x = 0`.
pub fn log_odds_weight(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        -(x / (1.0 - x)).ln()
    }
}

pub fn weight_metric(rates: &EffectiveRates) -> Result<WeightMetric> {
    for (field, x) in [("p", rates.p), ("q", rates.q), ("r", rates.r)] {
        if !(0.0..0.5).contains(&x) {
            return Err(Error::domain(field, x, 0.0, 0.5));
        }
    }
    Ok(WeightMetric {
        w_p: log_odds_weight(rates.p),
        w_q: log_odds_weight(rates.q),
        w_r: log_odds_weight(rates.r),
    })
}

/// Step counts `[n_p, n_q, n_r]` of the three candidate metrics for a
/// displacement `(dx, dt)`, in the order pq, pr, qr.
fn metric_counts(dx: i64, dt: i64) -> [[u64; 3]; 3] {
    [
        [dx.unsigned_abs(), dt.unsigned_abs(), 0],
        [(dx - dt).unsigned_abs(), 0, dt.unsigned_abs()],
        [0, (dt - dx).unsigned_abs(), dx.unsigned_abs()],
    ]
}

fn cost_f64(w: [f64; 3], n: [u64; 3]) -> f64 {
    (0..3).map(|k| if n[k] == 0 { 0.0 } else { w[k] * n[k] as f64 }).sum()
}

/// Sentinel for an impossible step in quantized units.
pub const INFINITE_WEIGHT: Weight = 1 << 50;

fn cost_int(w: [Weight; 3], n: [u64; 3]) -> Weight {
    let mut total: Weight = 0;
    for k in 0..3 {
        if n[k] == 0 {
            continue;
        }
        if w[k] >= INFINITE_WEIGHT {
            return INFINITE_WEIGHT;
        }
        total += w[k] * n[k] as Weight;
    }
    total.min(INFINITE_WEIGHT)
}

/// Pair weight on the unbounded lattice.
pub fn defect_distance(a: Defect, b: Defect, metric: &WeightMetric) -> f64 {
    let dx = b.x as i64 - a.x as i64;
    let dt = b.t as i64 - a.t as i64;
    metric_counts(dx, dt)
        .iter()
        .map(|&n| cost_f64(metric.as_array(), n))
        .fold(f64::INFINITY, f64::min)
}

/// Whether metric `m` (index into [`metric_counts`]) has a realization
/// inside the code lattice. Zigzags with no net displacement along one axis
/// need a second column (`pr`) or a second round (`qr`).
fn metric_fits(m: usize, dx: i64, dt: i64, dims: &LatticeDims) -> bool {
    match m {
        1 => !(dx == 0 && dt != 0 && dims.ancillas() < 2),
        2 => !(dt == 0 && dx != 0 && dims.rounds < 2),
        _ => true,
    }
}

/// Pair weight restricted to paths inside the code lattice.
pub fn defect_distance_in(a: Defect, b: Defect, metric: &WeightMetric, dims: &LatticeDims) -> f64 {
    let dx = b.x as i64 - a.x as i64;
    let dt = b.t as i64 - a.t as i64;
    metric_counts(dx, dt)
        .iter()
        .enumerate()
        .filter(|(m, _)| metric_fits(*m, dx, dt, dims))
        .map(|(_, &n)| cost_f64(metric.as_array(), n))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Step counts of every feasible route from `a` to one code boundary.
///
/// Leaving through the left boundary takes `x + 1` space steps, each a data
/// flip `(-1, 0)` or a correlated flip `(-1, -1)`; the right boundary takes
/// `d - 1 - x` steps of `(+1, 0)` or `(+1, +1)`. Diagonal steps that would
/// leave the time window are compensated by measurement steps in the other
/// direction, interleaved as a zigzag, which needs at least two rounds.
fn boundary_routes(a: Defect, dims: &LatticeDims) -> impl Iterator<Item = (Side, [u64; 3])> {
    let rounds = dims.rounds as u64;
    let t = a.t as u64;
    let sides = [
        (Side::Left, a.x as u64 + 1, t - 1),
        (Side::Right, (dims.d - 1 - a.x) as u64, rounds - t),
    ];
    sides.into_iter().flat_map(move |(side, s, free)| {
        (0..=s).filter_map(move |k| {
            let extra = k.saturating_sub(free);
            (extra == 0 || rounds >= 2).then_some((side, [s - k, extra, k]))
        })
    })
}

/// Weight of matching `a` to the nearer code boundary.
pub fn boundary_distance(a: Defect, metric: &WeightMetric, dims: &LatticeDims) -> f64 {
    boundary_routes(a, dims)
        .map(|(_, n)| cost_f64(metric.as_array(), n))
        .fold(f64::INFINITY, f64::min)
}

/// Metric in solver units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizedMetric {
    pub w: [Weight; 3],
}

impl QuantizedMetric {
    pub fn new(metric: &WeightMetric) -> Self {
        let q = |w: f64| {
            if w.is_finite() && w * WEIGHT_SCALE < INFINITE_WEIGHT as f64 {
                quantize(w.max(0.0))
            } else {
                INFINITE_WEIGHT
            }
        };
        Self {
            w: [q(metric.w_p), q(metric.w_q), q(metric.w_r)],
        }
    }

    /// Best in-lattice pair metric: `(weight, metric index)`.
    fn pair(&self, a: Defect, b: Defect, dims: &LatticeDims) -> (Weight, usize) {
        let dx = b.x as i64 - a.x as i64;
        let dt = b.t as i64 - a.t as i64;
        let mut best = (INFINITE_WEIGHT, 0);
        for (m, n) in metric_counts(dx, dt).into_iter().enumerate() {
            if metric_fits(m, dx, dt, dims) {
                let c = cost_int(self.w, n);
                if c < best.0 {
                    best = (c, m);
                }
            }
        }
        best
    }

    fn boundary(&self, a: Defect, dims: &LatticeDims) -> (Weight, Side, [u64; 3]) {
        let mut best = (INFINITE_WEIGHT, Side::Left, [0; 3]);
        for (side, n) in boundary_routes(a, dims) {
            let c = cost_int(self.w, n);
            if c < best.0 {
                best = (c, side, n);
            }
        }
        best
    }
}

/// How the boundary enters the matching problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// One virtual partner per defect, virtual nodes pairwise joined at
    /// zero weight; minimum-weight perfect matching on the doubled graph.
    BoundaryCopies,
    /// Equivalent maximum-weight matching on the defects alone with edge
    /// gain `b(u) + b(v) - w(u, v)`; unmatched defects go to the boundary.
    #[default]
    Gain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderOptions {
    pub formulation: Formulation,
    /// For [`Formulation::Gain`]: first solve with each defect's `k` nearest
    /// partners, then add any edge the dual certificate rejects and solve
    /// again. The result is optimal on the complete graph either way.
    pub candidate_neighbours: Option<usize>,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        Self {
            formulation: Formulation::Gain,
            candidate_neighbours: Some(6),
        }
    }
}

/// Partner of a defect in the decoded matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partner {
    Defect(usize),
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub defects: Vec<Defect>,
    /// `(defect index, partner)`; each defect appears once as the first entry
    /// or as a [`Partner::Defect`].
    pub pairs: Vec<(usize, Partner)>,
    /// Total matched weight in solver units.
    pub matched_weight: Weight,
    /// Summed weight of the realized correction paths, solver units.
    pub path_weight: Weight,
    pub correction: ErrorChain,
}

impl Decoding {
    pub fn weight(&self) -> f64 {
        matching::dequantize(self.matched_weight)
    }
}

pub fn decode(syndrome: &SyndromeVolume, metric: &WeightMetric, dims: &LatticeDims) -> Result<Decoding> {
    decode_with(syndrome, metric, dims, &DecoderOptions::default())
}

pub fn decode_with(
    syndrome: &SyndromeVolume,
    metric: &WeightMetric,
    dims: &LatticeDims,
    opts: &DecoderOptions,
) -> Result<Decoding> {
    if syndrome.dims != *dims {
        return Err(Error::DimensionMismatch(format!(
            "syndrome {:?} vs lattice {:?}",
            syndrome.dims, dims
        )));
    }
    let qm = QuantizedMetric::new(metric);
    let defects = syndrome.defects();
    let n = defects.len();
    let boundary: Vec<_> = defects.iter().map(|&a| qm.boundary(a, dims)).collect();
    let mut pair_w = vec![0; n * n];
    let mut pair_m = vec![0u8; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (w, m) = qm.pair(defects[i], defects[j], dims);
            pair_w[i * n + j] = w;
            pair_w[j * n + i] = w;
            pair_m[i * n + j] = m as u8;
            pair_m[j * n + i] = m as u8;
        }
    }

    let mate = match opts.formulation {
        Formulation::Gain => {
            let bd: Vec<Weight> = boundary.iter().map(|b| b.0).collect();
            match_by_gain(n, &pair_w, &bd, opts.candidate_neighbours)
        }
        Formulation::BoundaryCopies => {
            let graph = MatchingGraph::with_boundary(n, |i, j| Some(pair_w[i * n + j]), |i| Some(boundary[i].0));
            let m = solve_mwpm(&graph)?;
            let mut mate = vec![None; n];
            for (u, v) in m.pairs {
                if u < n && v < n {
                    mate[u] = Some(v);
                    mate[v] = Some(u);
                }
            }
            mate
        }
    };

    let mut walker = Walker::new(*dims, qm);
    let mut pairs = Vec::with_capacity(n);
    let mut matched_weight: Weight = 0;
    for i in 0..n {
        match mate[i] {
            Some(j) if j < i => continue,
            Some(j) => {
                let w = pair_w[i * n + j];
                let (a, b) = (defects[i], defects[j]);
                let dx = b.x as i64 - a.x as i64;
                let dt = b.t as i64 - a.t as i64;
                let moves = pair_moves(pair_m[i * n + j] as usize, dx, dt);
                walker.walk(a, &moves, false)?;
                matched_weight += w;
                pairs.push((i, Partner::Defect(j)));
            }
            None => {
                let (w, side, counts) = boundary[i];
                if w >= INFINITE_WEIGHT {
                    return Err(Error::Contract(format!(
                        "defect {:?} has no finite-weight partner",
                        defects[i]
                    )));
                }
                walker.walk(defects[i], &boundary_moves(side, counts), true)?;
                matched_weight += w;
                pairs.push((i, Partner::Boundary));
            }
        }
    }
    if walker.weight != matched_weight {
        return Err(Error::Contract(format!(
            "correction weight {} differs from matching weight {}",
            walker.weight, matched_weight
        )));
    }
    Ok(Decoding {
        defects,
        pairs,
        matched_weight,
        path_weight: walker.weight,
        correction: walker.chain,
    })
}

/// Maximum-gain matching; `None` means matched to the boundary.
fn match_by_gain(n: usize, pair_w: &[Weight], bd: &[Weight], neighbours: Option<usize>) -> Vec<Option<usize>> {
    let gain = |i: usize, j: usize| bd[i] + bd[j] - pair_w[i * n + j];
    let mut positive = Vec::with_capacity(n * n / 2);
    for i in 0..n {
        for j in i + 1..n {
            let g = gain(i, j);
            if g > 0 {
                positive.push((i, j, g));
            }
        }
    }
    let mut chosen = vec![neighbours.is_none(); n * n];
    if let Some(k) = neighbours {
        let mut list = Vec::with_capacity(n);
        for i in 0..n {
            list.clear();
            list.extend((0..n).filter(|&j| j != i && gain(i, j) > 0));
            if list.len() > k {
                list.select_nth_unstable_by_key(k, |&j| (pair_w[i * n + j], j));
                list.truncate(k);
            }
            for &j in &list {
                chosen[i * n + j] = true;
                chosen[j * n + i] = true;
            }
        }
    }
    let mut edges = Vec::with_capacity(positive.len());
    loop {
        edges.clear();
        edges.extend(positive.iter().copied().filter(|&(i, j, _)| chosen[i * n + j]));
        let sol = matching::solve_with_duals(n, &edges, false);
        let mut repaired = false;
        for &(i, j, g) in &positive {
            if !chosen[i * n + j] && !sol.admits(i, j, g) {
                chosen[i * n + j] = true;
                chosen[j * n + i] = true;
                repaired = true;
            }
        }
        if !repaired {
            return sol.mate;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    P = 0,
    Q = 1,
    R = 2,
}

/// Steps of one kind in one direction.
#[derive(Debug, Clone, Copy)]
struct Moves {
    kind: Kind,
    dir: i64,
    count: u64,
}

fn signed(kind: Kind, delta: i64) -> Moves {
    Moves {
        kind,
        dir: delta.signum(),
        count: delta.unsigned_abs(),
    }
}

fn pair_moves(metric: usize, dx: i64, dt: i64) -> Vec<Moves> {
    match metric {
        0 => vec![signed(Kind::P, dx), signed(Kind::Q, dt)],
        1 => vec![signed(Kind::P, dx - dt), signed(Kind::R, dt)],
        _ => vec![signed(Kind::R, dx), signed(Kind::Q, dt - dx)],
    }
}

fn boundary_moves(side: Side, [np, nq, nr]: [u64; 3]) -> Vec<Moves> {
    let dir = match side {
        Side::Left => -1,
        Side::Right => 1,
    };
    vec![
        Moves {
            kind: Kind::P,
            dir,
            count: np,
        },
        Moves {
            kind: Kind::R,
            dir,
            count: nr,
        },
        Moves {
            kind: Kind::Q,
            dir: -dir,
            count: nq,
        },
    ]
}

/// Applies step sequences to a correction chain, tracking position so that
/// every intermediate defect position stays on the lattice.
struct Walker {
    dims: LatticeDims,
    qm: QuantizedMetric,
    chain: ErrorChain,
    weight: Weight,
}

impl Walker {
    fn new(dims: LatticeDims, qm: QuantizedMetric) -> Self {
        Self {
            dims,
            qm,
            chain: ErrorChain::empty(dims),
            weight: 0,
        }
    }

    fn target(kind: Kind, dir: i64, (x, t): (i64, i64)) -> (i64, i64) {
        match kind {
            Kind::P => (x + dir, t),
            Kind::Q => (x, t + dir),
            Kind::R => (x + dir, t + dir),
        }
    }

    fn inside(&self, (x, t): (i64, i64), exit: bool) -> bool {
        let a = self.dims.ancillas() as i64;
        let x_ok = if exit { x == -1 || x == a } else { (0..a).contains(&x) };
        x_ok && t >= 1 && t <= self.dims.rounds as i64
    }

    /// Orders the steps greedily, space steps first, so that only the final
    /// step (when `exit`) leaves the ancilla columns.
    fn plan(&self, start: (i64, i64), moves: &[Moves], exit: bool) -> Option<Vec<(Kind, i64)>> {
        let mut left: Vec<Moves> = moves.iter().copied().filter(|m| m.count > 0).collect();
        let total: u64 = left.iter().map(|m| m.count).sum();
        let mut pos = start;
        let mut steps = Vec::with_capacity(total as usize);
        for done in 0..total {
            let last = done + 1 == total;
            let pick = left
                .iter()
                .position(|m| m.count > 0 && self.inside(Self::target(m.kind, m.dir, pos), exit && last))?;
            let m = &mut left[pick];
            m.count -= 1;
            steps.push((m.kind, m.dir));
            pos = Self::target(m.kind, m.dir, pos);
        }
        Some(steps)
    }

    fn walk(&mut self, from: Defect, moves: &[Moves], exit: bool) -> Result<()> {
        let start = (from.x as i64, from.t as i64);
        let mut order = moves.to_vec();
        order.sort_by_key(|m| m.kind as u8);
        let steps = self
            .plan(start, &order, exit)
            .or_else(|| {
                order.reverse();
                self.plan(start, &order, exit)
            })
            .ok_or_else(|| Error::Contract(format!("no in-lattice path from {from:?} for {moves:?}")))?;
        let mut pos = start;
        for (kind, dir) in steps {
            let next = Self::target(kind, dir, pos);
            self.apply(kind, pos, next);
            self.weight += self.qm.w[kind as usize];
            pos = next;
        }
        Ok(())
    }

    fn apply(&mut self, kind: Kind, (x0, t0): (i64, i64), (x1, t1): (i64, i64)) {
        let i = x0.max(x1) as usize;
        let tau = t0.min(t1) as usize;
        match kind {
            Kind::P => self.chain.toggle_data(i, t0 as usize),
            Kind::Q => self.chain.toggle_measurement(x0 as usize, tau),
            Kind::R => {
                self.chain.toggle_data(i, tau);
                if self.dims.has_measurement_link(i, tau) {
                    self.chain.toggle_measurement(i, tau);
                }
            }
        }
    }
}

/// Result of one sampled memory experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    pub defects: usize,
    pub matched_weight: f64,
}

/// Decodes one error chain and classifies the residual.
pub fn evaluate_chain(chain: &ErrorChain, metric: &WeightMetric, opts: &DecoderOptions) -> Result<TrialOutcome> {
    let dims = chain.dims;
    let syndrome = syndrome_volume(chain, &dims)?;
    let decoding = decode_with(&syndrome, metric, &dims, opts)?;
    let class = residual_logical_class(chain, &decoding.correction)?;
    Ok(TrialOutcome {
        success: class == LogicalClass::Trivial,
        defects: decoding.defects.len(),
        matched_weight: decoding.weight(),
    })
}

/// Trial `index` of a run with master `seed`; its randomness depends on
/// nothing else.
pub fn run_trial(
    dims: &LatticeDims,
    rates: &EffectiveRates,
    metric: &WeightMetric,
    opts: &DecoderOptions,
    seed: u64,
    index: u64,
) -> Result<TrialOutcome> {
    let mut rng = rng::stream(seed, &format!("trial/{index}"));
    let sample = DisorderSample::draw_with(dims.d, dims.rounds, rates, seed, &mut rng);
    evaluate_chain(&chain_from_disorder(&sample)?, metric, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalErrorEstimate {
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    /// Binomial standard error.
    pub stderr: f64,
}

impl LogicalErrorEstimate {
    pub fn from_counts(trials: u64, failures: u64) -> Self {
        let rate = failures as f64 / trials as f64;
        Self {
            trials,
            failures,
            rate,
            stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
        }
    }
}

pub fn logical_error_rate(
    dims: &LatticeDims,
    rates: &EffectiveRates,
    trials: u64,
    seed: u64,
) -> Result<LogicalErrorEstimate> {
    logical_error_rate_with(dims, rates, trials, seed, &DecoderOptions::default())
}

/// Monte Carlo failure rate; trials run in parallel and the result does not
/// depend on the thread count.
pub fn logical_error_rate_with(
    dims: &LatticeDims,
    rates: &EffectiveRates,
    trials: u64,
    seed: u64,
    opts: &DecoderOptions,
) -> Result<LogicalErrorEstimate> {
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, 1.0, f64::INFINITY));
    }
    let metric = weight_metric(rates)?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(dims, rates, &metric, opts, seed, i).map(|o| u64::from(!o.success)))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(LogicalErrorEstimate::from_counts(trials, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeDims;
    use rand::{Rng, SeedableRng};

    fn dims(d: usize, t: usize) -> LatticeDims {
        LatticeDims::new(d, t).unwrap()
    }

    fn at(x: usize, t: usize) -> Defect {
        Defect { x, t }
    }

    #[test]
    fn weight_examples() {
        let e = std::f64::consts::E;
        let m = weight_metric(&EffectiveRates::new(1.0 / (1.0 + e), 0.1, 0.0).unwrap()).unwrap();
        assert!((m.w_p - 1.0).abs() < 1e-12);
        assert!((m.w_q - 9f64.ln()).abs() < 1e-12);
        assert!(m.w_r.is_infinite());
        assert!(weight_metric(&EffectiveRates::new(0.5, 0.1, 0.1).unwrap()).is_err());
    }

    #[test]
    fn distance_examples() {
        let m = WeightMetric::uniform(1.0);
        assert_eq!(defect_distance(at(3, 3), at(3, 3), &m), 0.0);
        assert_eq!(defect_distance(at(0, 1), at(2, 2), &m), 2.0);
        assert_eq!(defect_distance(at(2, 2), at(0, 1), &m), 2.0);
        // Against the diagonal the r-steps do not help.
        assert_eq!(defect_distance(at(0, 2), at(2, 1), &m), 3.0);
        let costly_r = WeightMetric {
            w_p: 1.0,
            w_q: 1.5,
            w_r: 3.0,
        };
        for (dx, dt) in [(2, 1), (3, 3), (1, 4)] {
            let d = defect_distance(at(0, 1), at(dx, 1 + dt), &costly_r);
            assert_eq!(d, dx as f64 + 1.5 * dt as f64);
        }
    }

    #[test]
    fn zero_rate_makes_step_unusable() {
        let m = WeightMetric {
            w_p: 1.0,
            w_q: 1.0,
            w_r: f64::INFINITY,
        };
        assert_eq!(defect_distance(at(0, 1), at(1, 2), &m), 2.0);
        assert_eq!(defect_distance(at(0, 1), at(3, 1), &m), 3.0);
    }

    #[test]
    fn boundary_examples() {
        let d5 = dims(5, 5);
        let w = WeightMetric::uniform(1.0);
        assert_eq!(boundary_distance(at(2, 3), &w, &d5), 2.0);
        assert_eq!(boundary_distance(at(0, 3), &w, &d5), 1.0);
        let cheap_r = WeightMetric {
            w_p: 2.0,
            w_q: 2.0,
            w_r: 0.5,
        };
        // Interior: every step may be diagonal.
        assert_eq!(boundary_distance(at(1, 4), &cheap_r, &d5), 1.0);
        // First round: diagonals to the left are blocked, to the right free.
        assert_eq!(boundary_distance(at(1, 1), &cheap_r, &d5), 1.5);
        // Last round, rightmost column: the diagonal needs a backward
        // measurement step first.
        let slow_p = WeightMetric {
            w_p: 3.0,
            w_q: 1.0,
            w_r: 0.5,
        };
        assert_eq!(boundary_distance(at(3, 5), &slow_p, &d5), 1.5);
    }

    fn random_syndrome(dims: LatticeDims, rates: &EffectiveRates, seed: u64) -> (ErrorChain, SyndromeVolume) {
        let s = DisorderSample::draw(dims.d, dims.rounds, rates, seed);
        let chain = chain_from_disorder(&s).unwrap();
        let syn = syndrome_volume(&chain, &dims).unwrap();
        (chain, syn)
    }

    #[test]
    fn empty_syndrome_empty_correction() {
        let dm = dims(5, 5);
        let m = WeightMetric::uniform(2.0);
        let dec = decode(&SyndromeVolume::empty(dm), &m, &dm).unwrap();
        assert!(dec.correction.is_empty());
        assert_eq!(dec.matched_weight, 0);
    }

    #[test]
    fn single_flip_recovered_exactly() {
        let dm = dims(5, 5);
        let m = WeightMetric::uniform(2.0);
        let mut chain = ErrorChain::empty(dm);
        chain.toggle_data(2, 3);
        let syn = syndrome_volume(&chain, &dm).unwrap();
        let dec = decode(&syn, &m, &dm).unwrap();
        assert_eq!(dec.correction, chain);
    }

    #[test]
    fn corrections_clear_the_syndrome_and_match_weight() {
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(3);
        for trial in 0..300 {
            let d = rng.random_range(2..=9);
            let t = rng.random_range(1..=9);
            let dm = dims(d, t);
            let rates = EffectiveRates::new(
                rng.random_range(0.0..0.2),
                rng.random_range(0.0..0.2),
                rng.random_range(0.0..0.2),
            )
            .unwrap();
            let (chain, syn) = random_syndrome(dm, &rates, trial);
            let metric = weight_metric(&rates).unwrap();
            let dec = decode(&syn, &metric, &dm).unwrap();
            let after = syndrome_volume(&chain.compose(&dec.correction).unwrap(), &dm).unwrap();
            assert!(after.is_empty(), "trial {trial}");
            assert_eq!(dec.path_weight, dec.matched_weight);
        }
    }

    #[test]
    fn formulations_agree_on_weight() {
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(11);
        let variants = [
            DecoderOptions {
                formulation: Formulation::BoundaryCopies,
                candidate_neighbours: None,
            },
            DecoderOptions {
                formulation: Formulation::Gain,
                candidate_neighbours: None,
            },
            DecoderOptions {
                formulation: Formulation::Gain,
                candidate_neighbours: Some(1),
            },
            DecoderOptions::default(),
        ];
        for trial in 0..200 {
            let d = rng.random_range(2..=8);
            let dm = dims(d, d);
            let rates = EffectiveRates::new(
                rng.random_range(0.01..0.15),
                rng.random_range(0.01..0.15),
                rng.random_range(0.0..0.15),
            )
            .unwrap();
            let (_, syn) = random_syndrome(dm, &rates, 1000 + trial);
            let metric = weight_metric(&rates).unwrap();
            let weights: Vec<_> = variants
                .iter()
                .map(|o| decode_with(&syn, &metric, &dm, o).unwrap().matched_weight)
                .collect();
            assert!(weights.windows(2).all(|w| w[0] == w[1]), "trial {trial}: {weights:?}");
        }
    }

    #[test]
    fn zero_rates_never_fail() {
        let dm = dims(5, 5);
        let rates = EffectiveRates::new(0.0, 0.0, 0.0).unwrap();
        let est = logical_error_rate(&dm, &rates, 200, 1).unwrap();
        assert_eq!(est.failures, 0);
        assert!(logical_error_rate(&dm, &rates, 0, 1).is_err());
    }

    #[test]
    fn estimate_is_seed_deterministic() {
        let dm = dims(5, 5);
        let rates = EffectiveRates::new(0.08, 0.08, 0.04).unwrap();
        let a = logical_error_rate(&dm, &rates, 500, 9).unwrap();
        let b = logical_error_rate(&dm, &rates, 500, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.failures > 0);
    }
}
