//! Random-bond Ising model on the triangular lattice with correlated
//! disorder, sampled by Metropolis sweeps and replica exchange.
//!
//! Geometry: periodic `L x L` sites `(x, y)`, site index `y * L + x`. Every
//! cell `(x, y)` owns one bond of each family, forming a triangle:
//!
//! * horizontal `(x, y) - (x + 1, y)`, magnitude `J2`, sign `v`;
//! * vertical `(x + 1, y) - (x + 1, y + 1)`, magnitude `J1`, sign `h`;
//! * diagonal `(x, y) - (x + 1, y + 1)`, magnitude `J3`, sign `v h`.
//!
//! With `x` along time and `y` along the code, the spin at `(x, y)` is the
//! equivalence that flips data qubit `y` in two consecutive rounds, and the
//! three signs of a cell are those of one space-time cell of the code.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{link_signs, DisorderSample, Sign};
use crate::noise::{fundamental_probs, nishimori_couplings, CouplingOptions, EffectiveRates};
use crate::rng::{self, SimRng};

/// Bond family order used for magnitudes and signs.
pub const VERTICAL: usize = 0;
pub const HORIZONTAL: usize = 1;
pub const DIAGONAL: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondLattice {
    pub l: usize,
    /// `[J1, J2, J3]` for the vertical, horizontal and diagonal families.
    pub magnitudes: [f64; 3],
    /// Per cell `[h, v, v h]`, row-major in `(x, y)`.
    pub signs: Vec<[Sign; 3]>,
    pub seed: u64,
    /// Nishimori temperature of the disorder, when drawn from rates.
    pub nishimori_temperature: Option<f64>,
    #[serde(skip)]
    neighbours: Vec<[(u32, Sign); 6]>,
}

impl BondLattice {
    /// Disordered lattice: signs from sampled flip indicators, magnitudes
    /// from the Nishimori conditions of `rates`.
    pub fn from_rates(l: usize, rates: &EffectiveRates, opts: &CouplingOptions, seed: u64) -> Result<Self> {
        check_size(l)?;
        let couplings = nishimori_couplings(&fundamental_probs(rates), opts)?;
        let sample = DisorderSample::draw(l, l, rates, seed);
        let signs = sample
            .z
            .iter()
            .map(|&z| {
                let (v, h) = link_signs(z);
                [h, v, v * h]
            })
            .collect();
        let mut lat = Self {
            l,
            magnitudes: couplings.j,
            signs,
            seed,
            nishimori_temperature: Some(couplings.nishimori_temperature()),
            neighbours: Vec::new(),
        };
        lat.build_neighbours();
        Ok(lat)
    }

    /// Disorder-free lattice with the given magnitudes.
    pub fn uniform(l: usize, magnitudes: [f64; 3]) -> Result<Self> {
        Self::with_signs(l, magnitudes, vec![[1; 3]; l * l])
    }

    pub fn with_signs(l: usize, magnitudes: [f64; 3], signs: Vec<[Sign; 3]>) -> Result<Self> {
        check_size(l)?;
        if signs.len() != l * l {
            return Err(Error::DimensionMismatch(format!("{} cells for L = {l}", signs.len())));
        }
        if signs.iter().flatten().any(|s| s.abs() != 1) {
            return Err(Error::InvalidArgument("bond signs must be +1 or -1".into()));
        }
        let mut lat = Self {
            l,
            magnitudes,
            signs,
            seed: 0,
            nishimori_temperature: None,
            neighbours: Vec::new(),
        };
        lat.build_neighbours();
        Ok(lat)
    }

    pub fn sites(&self) -> usize {
        self.l * self.l
    }

    #[inline]
    pub fn site(&self, x: usize, y: usize) -> usize {
        (y % self.l) * self.l + (x % self.l)
    }

    /// Every bond as `(site a, site b, family, sign)`.
    pub fn bonds(&self) -> Vec<(usize, usize, usize, Sign)> {
        let l = self.l;
        let mut out = Vec::with_capacity(3 * l * l);
        for y in 0..l {
            for x in 0..l {
                let s = self.signs[y * l + x];
                out.push((self.site(x, y), self.site(x + 1, y), HORIZONTAL, s[HORIZONTAL]));
                out.push((self.site(x + 1, y), self.site(x + 1, y + 1), VERTICAL, s[VERTICAL]));
                out.push((self.site(x, y), self.site(x + 1, y + 1), DIAGONAL, s[DIAGONAL]));
            }
        }
        out
    }

    fn build_neighbours(&mut self) {
        let n = self.sites();
        let mut nb = vec![[(0u32, 0 as Sign); 6]; n];
        let mut fill = vec![[0usize; 3]; n];
        for (a, b, f, s) in self.bonds() {
            for (u, w) in [(a, b), (b, a)] {
                let slot = 2 * f + fill[u][f];
                nb[u][slot] = (w as u32, s);
                fill[u][f] += 1;
            }
        }
        debug_assert!(fill.iter().all(|c| *c == [2, 2, 2]));
        self.neighbours = nb;
    }

    /// Neighbour list of `site`: two bonds per family, families in the order
    /// vertical, horizontal, diagonal.
    pub fn neighbours(&mut self, site: usize) -> [(u32, Sign); 6] {
        if self.neighbours.is_empty() {
            self.build_neighbours();
        }
        self.neighbours[site]
    }

    fn ensure_neighbours(&mut self) {
        if self.neighbours.is_empty() {
            self.build_neighbours();
        }
    }

    /// `H = -sum_b J_b s_b sigma_i sigma_j`.
    pub fn energy(&self, spins: &[Sign]) -> f64 {
        self.bonds()
            .iter()
            .map(|&(a, b, f, s)| -self.magnitudes[f] * f64::from(s * spins[a] * spins[b]))
            .sum()
    }

    /// Fraction of bonds of `family` with negative sign.
    pub fn antiferromagnetic_fraction(&self, family: usize) -> f64 {
        self.signs.iter().filter(|s| s[family] < 0).count() as f64 / self.signs.len() as f64
    }
}

fn check_size(l: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("lattice size L = {l} < 2")));
    }
    if l * l > u32::MAX as usize {
        return Err(Error::InvalidArgument(format!("lattice size L = {l} too large")));
    }
    Ok(())
}

/// Acceptance and energy-change tables for one temperature, indexed by
/// `sum_f 3^f (k_f / 2 + 1)` with `k_f = sigma_i sum_{b in f} s_b sigma_j`.
#[derive(Debug, Clone)]
struct FlipTable {
    accept: [f64; 27],
    delta: [f64; 27],
}

impl FlipTable {
    fn new(magnitudes: [f64; 3], temperature: f64) -> Self {
        let mut accept = [0.0; 27];
        let mut delta = [0.0; 27];
        for idx in 0..27 {
            let mut de = 0.0;
            let mut rest = idx;
            for j in magnitudes {
                let k = 2.0 * (rest % 3) as f64 - 2.0;
                de += 2.0 * j * k;
                rest /= 3;
            }
            delta[idx] = de;
            accept[idx] = if de <= 0.0 { 1.0 } else { (-de / temperature).exp() };
        }
        Self { accept, delta }
    }
}

#[inline]
fn flip_index(spins: &[Sign], site: usize, nb: &[(u32, Sign); 6]) -> usize {
    let s = spins[site];
    let mut idx = 0;
    let mut scale = 1;
    for f in 0..3 {
        let (a, sa) = nb[2 * f];
        let (b, sb) = nb[2 * f + 1];
        let k = s * (sa * spins[a as usize] + sb * spins[b as usize]);
        idx += scale * ((k + 2) / 2) as usize;
        scale *= 3;
    }
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaState {
    pub spins: Vec<Sign>,
    /// Cached energy, updated incrementally.
    pub energy: f64,
}

impl ReplicaState {
    pub fn new(lattice: &BondLattice, spins: Vec<Sign>) -> Self {
        let energy = lattice.energy(&spins);
        Self { spins, energy }
    }

    pub fn random<R: Rng + ?Sized>(lattice: &BondLattice, rng: &mut R) -> Self {
        let spins = (0..lattice.sites())
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        Self::new(lattice, spins)
    }

    /// Relative mismatch between the cached and the recomputed energy.
    pub fn energy_drift(&self, lattice: &BondLattice) -> f64 {
        let exact = lattice.energy(&self.spins);
        (self.energy - exact).abs() / exact.abs().max(1.0)
    }
}

/// One sequential Metropolis sweep at temperature `t`; returns the number
/// of accepted flips.
pub fn metropolis_sweep<R: Rng + ?Sized>(
    state: &mut ReplicaState,
    lattice: &mut BondLattice,
    t: f64,
    rng: &mut R,
) -> usize {
    lattice.ensure_neighbours();
    let table = FlipTable::new(lattice.magnitudes, t);
    sweep_with(state, lattice, &table, rng)
}

fn sweep_with<R: Rng + ?Sized>(
    state: &mut ReplicaState,
    lattice: &BondLattice,
    table: &FlipTable,
    rng: &mut R,
) -> usize {
    let mut accepted = 0;
    for site in 0..state.spins.len() {
        let idx = flip_index(&state.spins, site, &lattice.neighbours[site]);
        let a = table.accept[idx];
        if a >= 1.0 || rng.random::<f64>() < a {
            state.spins[site] = -state.spins[site];
            state.energy += table.delta[idx];
            accepted += 1;
        }
    }
    accepted
}

/// Replicas on a shared lattice, one per temperature. `slot[k]` is the
/// replica currently held at `temperatures[k]`; exchanges permute `slot`
/// and never touch spins.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub temperatures: Vec<f64>,
    pub replicas: Vec<ReplicaState>,
    pub slot: Vec<usize>,
    tables: Vec<FlipTable>,
}

impl Ensemble {
    pub fn new(lattice: &BondLattice, temperatures: Vec<f64>, replicas: Vec<ReplicaState>) -> Result<Self> {
        if temperatures.is_empty() || replicas.len() != temperatures.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} replicas for {} temperatures",
                replicas.len(),
                temperatures.len()
            )));
        }
        if temperatures.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidArgument("temperatures must be positive".into()));
        }
        let tables = temperatures
            .iter()
            .map(|&t| FlipTable::new(lattice.magnitudes, t))
            .collect();
        Ok(Self {
            slot: (0..temperatures.len()).collect(),
            temperatures,
            replicas,
            tables,
        })
    }

    pub fn random<R: Rng + ?Sized>(lattice: &BondLattice, temperatures: Vec<f64>, rng: &mut R) -> Result<Self> {
        let replicas = temperatures
            .iter()
            .map(|_| ReplicaState::random(lattice, rng))
            .collect();
        Self::new(lattice, temperatures, replicas)
    }

    pub fn at(&self, k: usize) -> &ReplicaState {
        &self.replicas[self.slot[k]]
    }

    /// One Metropolis sweep of every replica; accepted flips per temperature.
    pub fn sweep<R: Rng + ?Sized>(&mut self, lattice: &mut BondLattice, rng: &mut R) -> Vec<usize> {
        lattice.ensure_neighbours();
        (0..self.temperatures.len())
            .map(|k| sweep_with(&mut self.replicas[self.slot[k]], lattice, &self.tables[k], rng))
            .collect()
    }
}

/// Attempts exchanges between temperature pairs `(k, k + 1)` with `k` of
/// the given parity, accepting with `min(1, exp(d_beta d_E))`. Returns the
/// accepted pairs.
pub fn parallel_tempering_step<R: Rng + ?Sized>(ensemble: &mut Ensemble, parity: usize, rng: &mut R) -> Vec<usize> {
    let mut accepted = Vec::new();
    let n = ensemble.temperatures.len();
    let mut k = parity % 2;
    while k + 1 < n {
        let d_beta = 1.0 / ensemble.temperatures[k] - 1.0 / ensemble.temperatures[k + 1];
        let d_e = ensemble.at(k).energy - ensemble.at(k + 1).energy;
        let arg = d_beta * d_e;
        if arg >= 0.0 || rng.random::<f64>() < arg.exp() {
            ensemble.slot.swap(k, k + 1);
            accepted.push(k);
        }
        k += 2;
    }
    accepted
}

/// `G(k) = |sum_x sigma_x e^{i k . x}|^2 / L^2` at `k = 0` and
/// `k = (2 pi / L, 0)`.
pub fn measure_g(spins: &[Sign], l: usize) -> (f64, f64) {
    let phases = phase_table(l);
    measure_with(spins, l, &phases)
}

fn phase_table(l: usize) -> Vec<Complex64> {
    (0..l)
        .map(|x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x as f64 / l as f64))
        .collect()
}

fn measure_with(spins: &[Sign], l: usize, phases: &[Complex64]) -> (f64, f64) {
    let mut m0 = 0i64;
    let mut col = vec![0i64; l];
    for y in 0..l {
        for x in 0..l {
            let s = i64::from(spins[y * l + x]);
            m0 += s;
            col[x] += s;
        }
    }
    let mq: Complex64 = col.iter().zip(phases).map(|(&c, &ph)| ph * c as f64).sum();
    let n = (l * l) as f64;
    ((m0 * m0) as f64 / n, mq.norm_sqr() / n)
}

/// Second-moment correlation length from averaged correlators.
pub fn correlation_length(g0: f64, gq: f64, l: usize) -> Result<f64> {
    if !(gq > 0.0) || !(g0 >= gq) {
        return Err(Error::InvalidArgument(format!(
            "invalid correlator pair G(0) = {g0}, G(q) = {gq}"
        )));
    }
    let s = (std::f64::consts::PI / l as f64).sin();
    Ok((g0 / gq - 1.0).sqrt() / (2.0 * s))
}

/// Monte Carlo protocol for one disorder sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSchedule {
    /// Strictly increasing.
    pub temperatures: Vec<f64>,
    /// Metropolis sweeps between exchange attempts.
    pub n_met: usize,
    /// Sweep/exchange repetitions.
    pub swap_rounds: usize,
    /// Leading fraction of rounds discarded for thermalization.
    pub discard_fraction: f64,
    /// Measure every this many rounds after thermalization.
    pub measure_every: usize,
    /// Time bins for error estimates on a single sample.
    pub bins: usize,
}

impl McSchedule {
    /// `n` temperatures evenly spaced in `log T` on `[t_lo, t_hi]`.
    pub fn geometric_ladder(t_lo: f64, t_hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![t_lo];
        }
        let r = (t_hi / t_lo).ln() / (n - 1) as f64;
        (0..n).map(|k| t_lo * (r * k as f64).exp()).collect()
    }

    /// 24 temperatures on `[0.5, 1.5] * t_guess`.
    pub fn default_ladder(t_guess: f64) -> Vec<f64> {
        Self::geometric_ladder(0.5 * t_guess, 1.5 * t_guess, 24)
    }

    /// Production protocol: 800 sweeps between exchanges, 10000 rounds.
    pub fn production(temperatures: Vec<f64>) -> Self {
        Self {
            temperatures,
            n_met: 800,
            swap_rounds: 10_000,
            discard_fraction: 0.5,
            measure_every: 1,
            bins: 20,
        }
    }

    /// Reduced protocol for desk-scale runs.
    pub fn desk(temperatures: Vec<f64>) -> Self {
        Self {
            temperatures,
            n_met: 2,
            swap_rounds: 4000,
            discard_fraction: 0.5,
            measure_every: 1,
            bins: 20,
        }
    }

    pub fn thermalization_rounds(&self) -> usize {
        (self.swap_rounds as f64 * self.discard_fraction).floor() as usize
    }

    pub fn measurement_rounds(&self) -> usize {
        let rest = self.swap_rounds - self.thermalization_rounds().min(self.swap_rounds);
        rest / self.measure_every.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.is_empty() {
            return Err(Error::InvalidArgument("empty temperature ladder".into()));
        }
        if self.temperatures.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidArgument("temperatures must be positive".into()));
        }
        if self.temperatures.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("ladder must be strictly increasing".into()));
        }
        if self.n_met == 0 || self.measure_every == 0 {
            return Err(Error::InvalidArgument("n_met and measure_every must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.discard_fraction) {
            return Err(Error::domain("discard_fraction", self.discard_fraction, 0.0, 1.0));
        }
        let m = self.measurement_rounds();
        if m == 0 {
            return Err(Error::InvalidArgument("schedule has no measurement rounds".into()));
        }
        if self.bins < 2 || self.bins > m {
            return Err(Error::InvalidArgument(format!(
                "need 2 <= bins <= measurements, got {} bins for {m} measurements",
                self.bins
            )));
        }
        Ok(())
    }
}

/// Thermal measurements of one disorder sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub l: usize,
    pub temperatures: Vec<f64>,
    /// `[temperature][bin]` bin means.
    pub g0_bins: Vec<Vec<f64>>,
    pub gq_bins: Vec<Vec<f64>>,
    pub energy_bins: Vec<Vec<f64>>,
    /// Accepted fraction of Metropolis proposals per temperature.
    pub metropolis_acceptance: Vec<f64>,
    /// Accepted fraction of exchanges per adjacent pair `(k, k + 1)`.
    pub swap_acceptance: Vec<f64>,
    pub measurements: usize,
    /// Largest relative energy-cache drift seen at checkpoints.
    pub max_energy_drift: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

impl ObservableSeries {
    pub fn g0_mean(&self, k: usize) -> f64 {
        mean(&self.g0_bins[k])
    }

    pub fn gq_mean(&self, k: usize) -> f64 {
        mean(&self.gq_bins[k])
    }

    pub fn energy_mean(&self, k: usize) -> f64 {
        mean(&self.energy_bins[k])
    }
}

pub fn run_disorder_sample(lattice: &BondLattice, schedule: &McSchedule, seed: u64) -> Result<ObservableSeries> {
    schedule.validate()?;
    let mut lattice = lattice.clone();
    lattice.ensure_neighbours();
    let l = lattice.l;
    let nt = schedule.temperatures.len();
    let mut rng: SimRng = rng::stream(seed, "mc");
    let mut ens = Ensemble::random(&lattice, schedule.temperatures.clone(), &mut rng)?;
    let phases = phase_table(l);

    let therm = schedule.thermalization_rounds();
    let m_total = schedule.measurement_rounds();
    let per_bin = m_total / schedule.bins;
    let used = per_bin * schedule.bins;
    let mut g0 = vec![vec![0.0; schedule.bins]; nt];
    let mut gq = vec![vec![0.0; schedule.bins]; nt];
    let mut en = vec![vec![0.0; schedule.bins]; nt];
    let mut flips = vec![0usize; nt];
    let mut swaps = vec![0usize; nt.saturating_sub(1)];
    let mut swap_tries = vec![0usize; nt.saturating_sub(1)];
    let mut measured = 0;
    let mut drift: f64 = 0.0;
    let checkpoint = (schedule.swap_rounds / 4).max(1);

    for round in 0..schedule.swap_rounds {
        for _ in 0..schedule.n_met {
            for (k, a) in ens.sweep(&mut lattice, &mut rng).into_iter().enumerate() {
                flips[k] += a;
            }
        }
        let parity = round % 2;
        for k in (parity..nt.saturating_sub(1)).step_by(2) {
            swap_tries[k] += 1;
        }
        for k in parallel_tempering_step(&mut ens, parity, &mut rng) {
            swaps[k] += 1;
        }
        if round >= therm && (round - therm) % schedule.measure_every == 0 && measured < used {
            let bin = measured / per_bin;
            for k in 0..nt {
                let state = ens.at(k);
                let (a, b) = measure_with(&state.spins, l, &phases);
                g0[k][bin] += a;
                gq[k][bin] += b;
                en[k][bin] += state.energy;
            }
            measured += 1;
        }
        if (round + 1) % checkpoint == 0 {
            for r in &ens.replicas {
                drift = drift.max(r.energy_drift(&lattice));
            }
        }
    }
    for series in [&mut g0, &mut gq, &mut en] {
        for row in series.iter_mut() {
            for v in row.iter_mut() {
                *v /= per_bin as f64;
            }
        }
    }
    let proposals = (schedule.swap_rounds * schedule.n_met * lattice.sites()) as f64;
    Ok(ObservableSeries {
        l,
        temperatures: schedule.temperatures.clone(),
        g0_bins: g0,
        gq_bins: gq,
        energy_bins: en,
        metropolis_acceptance: flips.iter().map(|&f| f as f64 / proposals).collect(),
        swap_acceptance: swaps
            .iter()
            .zip(&swap_tries)
            .map(|(&s, &t)| if t == 0 { 0.0 } else { s as f64 / t as f64 })
            .collect(),
        measurements: used,
        max_energy_drift: drift,
    })
}

/// Independent disorder samples `0..samples`, run in parallel. Sample `i`
/// uses disorder seed `derive(seed, "disorder/i")` and thermal seed
/// `derive(seed, "thermal/i")`.
pub fn run_disorder_ensemble(
    l: usize,
    rates: &EffectiveRates,
    opts: &CouplingOptions,
    schedule: &McSchedule,
    samples: usize,
    seed: u64,
) -> Result<Vec<ObservableSeries>> {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let lat = BondLattice::from_rates(l, rates, opts, rng::derive_seed(seed, &format!("disorder/{i}")))?;
            run_disorder_sample(&lat, schedule, rng::derive_seed(seed, &format!("thermal/{i}")))
        })
        .collect()
}

/// Exact Boltzmann averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactObservables {
    pub g0: f64,
    pub gq: f64,
    pub energy: f64,
}

/// Largest lattice accepted by [`exhaustive_observables`].
pub const EXHAUSTIVE_MAX_L: usize = 4;

/// Enumerates all `2^(L^2)` states in Gray-code order.
pub fn exhaustive_observables(lattice: &BondLattice, t: f64) -> Result<ExactObservables> {
    let l = lattice.l;
    if l > EXHAUSTIVE_MAX_L {
        return Err(Error::TooLarge(l));
    }
    if !(t > 0.0) {
        return Err(Error::domain("temperature", t, 0.0, f64::INFINITY));
    }
    let mut lattice = lattice.clone();
    lattice.ensure_neighbours();
    let n = lattice.sites();
    let phases = phase_table(l);
    let states = 1usize << n;

    let walk = |visit: &mut dyn FnMut(f64, i64, Complex64)| {
        let mut spins = vec![1 as Sign; n];
        let mut e = lattice.energy(&spins);
        let mut m0 = n as i64;
        let mut mq: Complex64 = (0..n).map(|s| phases[s % l]).sum();
        visit(e, m0, mq);
        for step in 1..states {
            let site = step.trailing_zeros() as usize;
            let nb = &lattice.neighbours[site];
            let s = spins[site];
            let mut field = 0.0;
            for (f, pair) in nb.chunks(2).enumerate() {
                for &(j, sj) in pair {
                    field += lattice.magnitudes[f] * f64::from(sj * spins[j as usize]);
                }
            }
            e += 2.0 * f64::from(s) * field;
            spins[site] = -s;
            m0 -= 2 * i64::from(s);
            mq -= phases[site % l] * (2.0 * f64::from(s));
            visit(e, m0, mq);
        }
    };

    let mut e_min = f64::INFINITY;
    walk(&mut |e, _, _| e_min = e_min.min(e));
    let (mut z, mut g0, mut gq, mut en) = (0.0, 0.0, 0.0, 0.0);
    let nf = n as f64;
    walk(&mut |e, m0, mq| {
        let w = (-(e - e_min) / t).exp();
        z += w;
        g0 += w * (m0 * m0) as f64 / nf;
        gq += w * mq.norm_sqr() / nf;
        en += w * e;
    });
    Ok(ExactObservables {
        g0: g0 / z,
        gq: gq / z,
        energy: en / z,
    })
}
