//! The (1+1)D space-time lattice of the repetition code.
//!
//! Coordinates: data qubit `i in 0..d`, ancilla `x in 0..d-1` sitting
//! between data qubits `x` and `x + 1`, measurement round `t in 1..=T`.
//! Storage is 0-based in the round index.
//!
//! A lattice cell `(i, t)` carries two links: the vertical link `v` (data
//! qubit `i` flipped before measurement round `t`) and the horizontal link
//! `h` (the outcome of ancilla `i` flipped in round `t`). A correlated
//! `r`-event flips both links of the same cell, which pairs the defect at
//! `(i - 1, t)` with the one at `(i, t + 1)`. Ancilla `d - 1` does not exist
//! and round `T` is read out perfectly, so those horizontal links are always
//! `+1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::EffectiveRates;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeDims {
    /// Number of data qubits (code distance).
    pub d: usize,
    /// Number of measurement rounds, the last one perfect.
    pub rounds: usize,
}

impl LatticeDims {
    pub fn new(d: usize, rounds: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("distance d = {d} < 2")));
        }
        if rounds < 1 {
            return Err(Error::InvalidArgument("need at least one round".into()));
        }
        Ok(Self { d, rounds })
    }

    pub fn ancillas(&self) -> usize {
        self.d - 1
    }

    pub fn cells(&self) -> usize {
        self.d * self.rounds
    }

    /// Index of cell `(i, t)` with `t` 1-based.
    #[inline]
    pub fn cell(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.d && t >= 1 && t <= self.rounds);
        (t - 1) * self.d + i
    }

    /// Index of defect `(x, t)` with `t` 1-based.
    #[inline]
    pub fn defect_index(&self, x: usize, t: usize) -> usize {
        debug_assert!(x < self.ancillas() && t >= 1 && t <= self.rounds);
        (t - 1) * self.ancillas() + x
    }

    /// Whether cell `(i, t)` has a physical horizontal link.
    #[inline]
    pub fn has_measurement_link(&self, i: usize, t: usize) -> bool {
        i + 1 < self.d && t < self.rounds
    }
}

/// `+1` / `-1` sign; `-1` marks a flip.
pub type Sign = i8;

/// Three independent flip indicators `(z_p, z_q, z_r)` per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSample {
    pub width: usize,
    pub height: usize,
    pub z: Vec<[Sign; 3]>,
    pub seed: u64,
    pub rates: EffectiveRates,
}

impl DisorderSample {
    /// Draws i.i.d. triples on a `width x height` grid of cells, row-major.
    pub fn draw(width: usize, height: usize, rates: &EffectiveRates, seed: u64) -> Self {
        let mut rng = rng::stream(seed, "disorder");
        Self::draw_with(width, height, rates, seed, &mut rng)
    }

    pub fn draw_with<R: Rng + ?Sized>(
        width: usize,
        height: usize,
        rates: &EffectiveRates,
        seed: u64,
        rng: &mut R,
    ) -> Self {
        let flip = |rng: &mut R, prob: f64| -> Sign {
            if rng.random::<f64>() < prob {
                -1
            } else {
                1
            }
        };
        let z = (0..width * height)
            .map(|_| [flip(rng, rates.p), flip(rng, rates.q), flip(rng, rates.r)])
            .collect();
        Self {
            width,
            height,
            z,
            seed,
            rates: *rates,
        }
    }
}

pub fn sample_disorder(dims: &LatticeDims, rates: &EffectiveRates, seed: u64) -> DisorderSample {
    DisorderSample::draw(dims.d, dims.rounds, rates, seed)
}

/// Link signs `(v, h)` fixed by one cell's flip indicators: the
/// correlated flip toggles both links.
#[inline]
pub fn link_signs(z: [Sign; 3]) -> (Sign, Sign) {
    let [zp, zq, zr] = z;
    (zp * zr, zq * zr)
}

/// Error configuration on the code lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorChain {
    pub dims: LatticeDims,
    /// Vertical (data) links, indexed by [`LatticeDims::cell`].
    pub v: Vec<Sign>,
    /// Horizontal (measurement) links, same indexing.
    pub h: Vec<Sign>,
}

impl ErrorChain {
    pub fn empty(dims: LatticeDims) -> Self {
        Self {
            dims,
            v: vec![1; dims.cells()],
            h: vec![1; dims.cells()],
        }
    }

    #[inline]
    pub fn toggle_data(&mut self, i: usize, t: usize) {
        let c = self.dims.cell(i, t);
        self.v[c] = -self.v[c];
    }

    #[inline]
    pub fn toggle_measurement(&mut self, x: usize, t: usize) {
        debug_assert!(self.dims.has_measurement_link(x, t));
        let c = self.dims.cell(x, t);
        self.h[c] = -self.h[c];
    }

    /// Elementwise product: the chain obtained by applying `other` on top.
    pub fn compose(&self, other: &ErrorChain) -> Result<ErrorChain> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(ErrorChain {
            dims: self.dims,
            v: self.v.iter().zip(&other.v).map(|(a, b)| a * b).collect(),
            h: self.h.iter().zip(&other.h).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.v.iter().chain(&self.h).all(|&s| s == 1)
    }

    /// Net flip parity of each data qubit after all rounds.
    pub fn data_flip_pattern(&self) -> Vec<bool> {
        let mut out = vec![false; self.dims.d];
        for t in 1..=self.dims.rounds {
            for (i, flip) in out.iter_mut().enumerate() {
                if self.v[self.dims.cell(i, t)] < 0 {
                    *flip = !*flip;
                }
            }
        }
        out
    }
}

/// Maps flip indicators to link signs, masking the links that do not exist
/// on the code lattice (no ancilla right of the last qubit; no `q`/`r`
/// flips in the perfect final round).
pub fn chain_from_disorder(sample: &DisorderSample) -> Result<ErrorChain> {
    let dims = LatticeDims::new(sample.width, sample.height)?;
    let mut chain = ErrorChain::empty(dims);
    for t in 1..=dims.rounds {
        for i in 0..dims.d {
            let c = dims.cell(i, t);
            let [zp, mut zq, mut zr] = sample.z[c];
            if t == dims.rounds {
                zq = 1;
                zr = 1;
            }
            if i + 1 == dims.d {
                zq = 1;
            }
            let (v, h) = link_signs([zp, zq, zr]);
            chain.v[c] = v;
            chain.h[c] = if dims.has_measurement_link(i, t) { h } else { 1 };
        }
    }
    Ok(chain)
}

/// Defect coordinate: ancilla `x`, round `t` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Defect {
    pub x: usize,
    pub t: usize,
}

/// Time differences of consecutive stabilizer outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeVolume {
    pub dims: LatticeDims,
    /// Indexed by [`LatticeDims::defect_index`].
    pub bits: Vec<bool>,
}

impl SyndromeVolume {
    pub fn empty(dims: LatticeDims) -> Self {
        Self {
            dims,
            bits: vec![false; dims.ancillas() * dims.rounds],
        }
    }

    pub fn toggle(&mut self, x: usize, t: usize) {
        let k = self.dims.defect_index(x, t);
        self.bits[k] = !self.bits[k];
    }

    pub fn get(&self, x: usize, t: usize) -> bool {
        self.bits[self.dims.defect_index(x, t)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Defects in lexicographic `(t, x)` reading order.
    pub fn defects(&self) -> Vec<Defect> {
        let a = self.dims.ancillas();
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| Defect { x: k % a, t: k / a + 1 })
            .collect()
    }
}

pub fn syndrome_volume(chain: &ErrorChain, dims: &LatticeDims) -> Result<SyndromeVolume> {
    if chain.dims != *dims || chain.v.len() != dims.cells() || chain.h.len() != dims.cells() {
        return Err(Error::DimensionMismatch(format!(
            "chain {:?} vs lattice {:?}",
            chain.dims, dims
        )));
    }
    let mut s = SyndromeVolume::empty(*dims);
    for t in 1..=dims.rounds {
        for i in 0..dims.d {
            let c = dims.cell(i, t);
            if chain.v[c] < 0 {
                if i > 0 {
                    s.toggle(i - 1, t);
                }
                if i + 1 < dims.d {
                    s.toggle(i, t);
                }
            }
            if chain.h[c] < 0 {
                if !dims.has_measurement_link(i, t) {
                    return Err(Error::Contract(format!(
                        "measurement flip at nonexistent link ({i}, {t})"
                    )));
                }
                s.toggle(i, t);
                s.toggle(i, t + 1);
            }
        }
    }
    Ok(s)
}

/// One Ising spin per space-time equivalence. Spin `(i, t)`, `t in 1..T`,
/// flips data qubit `i` in rounds `t` and `t + 1` and the outcomes of both
/// neighbouring ancillas in round `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinConfig {
    pub dims: LatticeDims,
    /// Row-major `(t - 1) * d + i`, `t in 1..T`.
    pub spins: Vec<Sign>,
}

impl SpinConfig {
    pub fn all_up(dims: LatticeDims) -> Self {
        Self {
            dims,
            spins: vec![1; dims.d * dims.rounds.saturating_sub(1)],
        }
    }

    /// Spin at `(i, t)`; outside `t in 1..T` the spin is pinned to `+1`.
    #[inline]
    pub fn get(&self, i: usize, t: usize) -> Sign {
        if t == 0 || t >= self.dims.rounds {
            1
        } else {
            self.spins[(t - 1) * self.dims.d + i]
        }
    }

    pub fn set(&mut self, i: usize, t: usize, s: Sign) {
        self.spins[(t - 1) * self.dims.d + i] = s;
    }
}

/// Deformed chain `E' = E sigma`: each data link picks up the product of the
/// two spins it separates in time, each measurement link the product of the
/// two spins it separates in space.
pub fn apply_equivalence(chain: &ErrorChain, spins: &SpinConfig) -> Result<ErrorChain> {
    let dims = chain.dims;
    if spins.dims != dims || spins.spins.len() != dims.d * dims.rounds.saturating_sub(1) {
        return Err(Error::DimensionMismatch("spin configuration".into()));
    }
    let mut out = chain.clone();
    for t in 1..=dims.rounds {
        for i in 0..dims.d {
            let c = dims.cell(i, t);
            out.v[c] *= spins.get(i, t - 1) * spins.get(i, t);
            if dims.has_measurement_link(i, t) {
                out.h[c] *= spins.get(i, t) * spins.get(i + 1, t);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogicalClass {
    Trivial,
    Logical,
}

/// Logical class of `chain` followed by `correction`. The residual must
/// have an empty syndrome; on the open chain the only nontrivial such data
/// pattern flips every qubit.
pub fn residual_logical_class(chain: &ErrorChain, correction: &ErrorChain) -> Result<LogicalClass> {
    let residual = chain.compose(correction)?;
    let syndrome = syndrome_volume(&residual, &residual.dims)?;
    if !syndrome.is_empty() {
        return Err(Error::Contract(format!(
            "residual error leaves {} defects",
            syndrome.count()
        )));
    }
    let pattern = residual.data_flip_pattern();
    if pattern.iter().all(|&f| f) {
        Ok(LogicalClass::Logical)
    } else {
        debug_assert!(pattern.iter().all(|&f| !f));
        Ok(LogicalClass::Trivial)
    }
}
