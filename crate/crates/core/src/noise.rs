//! Circuit-level noise algebra.
//!
//! Maps the five depolarizing rates of the repetition-code readout circuit
//! onto the effective flip rates `(p, q, r)`, the probabilities of the four
//! fundamental error events on a lattice cell, and the Nishimori couplings of
//! the associated random-bond Ising model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Complete depolarization of a single-qubit channel.
pub const SINGLE_QUBIT_CAP: f64 = 0.75;
/// Complete depolarization of the two-qubit channel.
pub const TWO_QUBIT_CAP: f64 = 15.0 / 16.0;

/// Depolarizing probabilities of every circuit component.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CircuitNoiseParams {
    /// State preparation.
    pub p_sp: f64,
    /// Idling.
    pub p_id: f64,
    /// Single-qubit rotation.
    pub p_1: f64,
    /// Measurement.
    pub p_m: f64,
    /// CNOT.
    pub p_2: f64,
}

impl CircuitNoiseParams {
    /// Standard circuit-level noise: every location fails at rate `lambda`.
    pub fn uniform(lambda: f64) -> Self {
        Self {
            p_sp: lambda,
            p_id: lambda,
            p_1: lambda,
            p_m: lambda,
            p_2: lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_range("p_sp", self.p_sp, 0.0, SINGLE_QUBIT_CAP)?;
        check_range("p_id", self.p_id, 0.0, SINGLE_QUBIT_CAP)?;
        check_range("p_1", self.p_1, 0.0, SINGLE_QUBIT_CAP)?;
        check_range("p_m", self.p_m, 0.0, SINGLE_QUBIT_CAP)?;
        check_range("p_2", self.p_2, 0.0, TWO_QUBIT_CAP)?;
        Ok(())
    }
}

/// Effective data-flip (`p`), measurement-flip (`q`) and correlated
/// data+measurement flip (`r`) rates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EffectiveRates {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl EffectiveRates {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        check_range("p", p, 0.0, 0.5)?;
        check_range("q", q, 0.0, 0.5)?;
        check_range("r", r, 0.0, 0.5)?;
        Ok(Self { p, q, r })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p, self.q, self.r]
    }
}

/// Rate of the bit-flip channel equivalent to the composition of `rates`:
/// `1 - 2 g = prod_i (1 - 2 g_i)`.
pub fn compose_flip_channels(rates: &[f64]) -> f64 {
    let contraction: f64 = rates.iter().map(|g| 1.0 - 2.0 * g).product();
    0.5 * (1.0 - contraction)
}

/// Rates of the three independent channels `P`, `Q`, `R` whose product equals
/// two consecutive applications of the CNOT depolarizing channel.
pub fn factorize_two_qubit_channel(p_2: f64) -> Result<[f64; 3]> {
    check_range("p_2", p_2, 0.0, TWO_QUBIT_CAP)?;
    let lambda = 8.0 * p_2 / 15.0;
    Ok([lambda; 3])
}

/// Single-qubit depolarizing rate seen as a flip channel on the relevant
/// Pauli frame (two of the three Paulis flip the outcome).
fn depolarizing_as_flip(lambda: f64) -> f64 {
    2.0 * lambda / 3.0
}

/// Exact effective rates for arbitrary circuit parameters.
pub fn effective_rates_from_circuit(params: &CircuitNoiseParams) -> Result<EffectiveRates> {
    params.validate()?;
    let [lp, lq, lr] = factorize_two_qubit_channel(params.p_2)?;
    let idle = depolarizing_as_flip(params.p_id);
    let p = compose_flip_channels(&[lp, idle, idle, idle, idle]);
    let q = compose_flip_channels(&[
        lq,
        depolarizing_as_flip(params.p_1),
        depolarizing_as_flip(params.p_1),
        depolarizing_as_flip(params.p_sp),
        depolarizing_as_flip(params.p_m),
    ]);
    // Rounding can push a fully depolarized product a hair past 1/2.
    let clamp = |x: f64| x.clamp(0.0, 0.5);
    Ok(EffectiveRates {
        p: clamp(p),
        q: clamp(q),
        r: clamp(lr),
    })
}

/// Probabilities of the events `e0..e3` on one lattice cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalProbs {
    pub pi: [f64; 4],
}

pub fn fundamental_probs(rates: &EffectiveRates) -> FundamentalProbs {
    let EffectiveRates { p, q, r } = *rates;
    let (np, nq, nr) = (1.0 - p, 1.0 - q, 1.0 - r);
    FundamentalProbs {
        pi: [
            np * nq * nr + p * q * r,
            p * nq * nr + r * q * np,
            q * np * nr + r * p * nq,
            p * q * nr + r * np * nq,
        ],
    }
}

/// Which dimensionless coupling sets the energy scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by `kappa1` (so `J1 = 1`), falling back to the largest of
    /// `kappa1..kappa3` when `kappa1 = 0`.
    #[default]
    Kappa1,
    /// Always divide by `max(kappa1, kappa2, kappa3)`.
    MaxKappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CouplingOptions {
    pub normalization: Normalization,
    /// Opt-in floor applied to vanishing probabilities. `None` turns a zero
    /// probability into [`Error::InfiniteCoupling`].
    pub floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NishimoriCouplings {
    /// `beta * J_i` for `i = 0..3`.
    pub kappa: [f64; 4],
    /// Normalized magnitudes `J1, J2, J3`.
    pub j: [f64; 3],
    pub kappa_norm: f64,
    pub normalization: Normalization,
    /// True when at least one probability was raised to the floor.
    pub floored: bool,
}

impl NishimoriCouplings {
    /// Temperature at which the normalized model sits on the Nishimori line.
    pub fn nishimori_temperature(&self) -> f64 {
        1.0 / self.kappa_norm
    }
}

pub fn nishimori_couplings(probs: &FundamentalProbs, options: &CouplingOptions) -> Result<NishimoriCouplings> {
    let mut pi = probs.pi;
    let mut floored = false;
    for (index, value) in pi.iter_mut().enumerate() {
        if *value <= 0.0 {
            match options.floor {
                Some(eps) if eps > 0.0 => {
                    *value = eps;
                    floored = true;
                }
                _ => return Err(Error::InfiniteCoupling { index }),
            }
        }
    }
    let l = pi.map(f64::ln);
    // A coupling within rounding of zero means the distribution factorizes
    // along that axis (r = 0 makes v and h independent); it is exactly zero.
    let coupling = |a: usize, b: usize, c: usize, d: usize| {
        let x = (l[a] + l[b]) - (l[c] + l[d]);
        let scale = l[a].abs() + l[b].abs() + l[c].abs() + l[d].abs();
        if x.abs() <= 8.0 * f64::EPSILON * scale {
            0.0
        } else {
            0.25 * x
        }
    };
    let kappa = [
        0.25 * (l[0] + l[1] + l[2] + l[3]),
        coupling(0, 1, 2, 3),
        coupling(0, 2, 1, 3),
        coupling(0, 3, 1, 2),
    ];
    let largest = kappa[1].max(kappa[2]).max(kappa[3]);
    let kappa_norm = match options.normalization {
        Normalization::Kappa1 if kappa[1] != 0.0 => kappa[1],
        _ => largest,
    };
    if !(kappa_norm > 0.0) {
        return Err(Error::InvalidArgument(
            "couplings have no positive scale (rates at or above 1/2?)".into(),
        ));
    }
    Ok(NishimoriCouplings {
        kappa,
        j: [kappa[1] / kappa_norm, kappa[2] / kappa_norm, kappa[3] / kappa_norm],
        kappa_norm,
        normalization: options.normalization,
        floored,
    })
}

// ---------------------------------------------------------------------------
// Pauli transfer matrices
// ---------------------------------------------------------------------------

/// Real matrix `R_ij = tr(P_i E(P_j)) / d` in the Pauli basis ordered
/// `(I, X, Y, Z)`; two-qubit indices are `4 * data + ancilla`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTransferMatrix {
    dim: usize,
    entries: Vec<f64>,
}

fn pauli_matrix(index: usize) -> [Complex64; 4] {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match index {
        0 => [one, o, o, one],
        1 => [o, one, one, o],
        2 => [o, -i, i, o],
        3 => [one, o, o, -one],
        _ => unreachable!("Pauli index out of range"),
    }
}

/// Dense `n x n` complex matrix stored row-major.
#[derive(Clone)]
struct CMat {
    n: usize,
    a: Vec<Complex64>,
}

impl CMat {
    fn from_pauli(index: usize) -> Self {
        Self {
            n: 2,
            a: pauli_matrix(index).to_vec(),
        }
    }

    fn kron(&self, other: &CMat) -> CMat {
        let n = self.n * other.n;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..other.n {
                    for l in 0..other.n {
                        a[(i * other.n + k) * n + j * other.n + l] = self.a[i * self.n + j] * other.a[k * other.n + l];
                    }
                }
            }
        }
        CMat { n, a }
    }

    fn mul(&self, other: &CMat) -> CMat {
        let n = self.n;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                for j in 0..n {
                    a[i * n + j] += x * other.a[k * n + j];
                }
            }
        }
        CMat { n, a }
    }

    fn adjoint(&self) -> CMat {
        let n = self.n;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                a[j * n + i] = self.a[i * n + j].conj();
            }
        }
        CMat { n, a }
    }

    fn scaled_add(&mut self, c: f64, other: &CMat) {
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            *x += y * c;
        }
    }

    fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }
}

fn pauli_string(qubits: usize, index: usize) -> CMat {
    let mut m = CMat::from_pauli((index >> (2 * (qubits - 1))) & 3);
    for q in 1..qubits {
        m = m.kron(&CMat::from_pauli((index >> (2 * (qubits - 1 - q))) & 3));
    }
    m
}

impl PauliTransferMatrix {
    pub fn identity(qubits: usize) -> Self {
        let dim = 1 << (2 * qubits);
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    /// PTM of `rho -> sum_k c_k P_k rho P_k` where each term is
    /// `(c_k, pauli index)`. Built from the defining trace formula.
    pub fn pauli_channel(qubits: usize, terms: &[(f64, usize)]) -> Self {
        let dim = 1 << (2 * qubits);
        let d = (1usize << qubits) as f64;
        let basis: Vec<CMat> = (0..dim).map(|i| pauli_string(qubits, i)).collect();
        let kraus: Vec<(f64, CMat, CMat)> = terms
            .iter()
            .map(|&(c, k)| (c, basis[k].clone(), basis[k].adjoint()))
            .collect();
        let mut entries = vec![0.0; dim * dim];
        for j in 0..dim {
            let mut image = CMat {
                n: basis[j].n,
                a: vec![Complex64::new(0.0, 0.0); basis[j].a.len()],
            };
            for (c, k, kd) in &kraus {
                image.scaled_add(*c, &k.mul(&basis[j]).mul(kd));
            }
            for i in 0..dim {
                entries[i * dim + j] = basis[i].mul(&image).trace().re / d;
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Channel `self` followed by `next`.
    pub fn then(&self, next: &Self) -> Self {
        assert_eq!(self.dim, next.dim, "PTM dimension mismatch");
        let n = self.dim;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = next.entries[i * n + k];
                if x == 0.0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += x * self.entries[k * n + j];
                }
            }
        }
        Self { dim: n, entries }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j).abs() <= tol))
    }
}

/// `P = 1 (x) Z`, `Q = X (x) 1`, `R = X (x) Z` in the `4 * data + ancilla`
/// indexing.
pub const PAULI_P: usize = 3;
pub const PAULI_Q: usize = 4;
pub const PAULI_R: usize = 7;

/// The CNOT channel reduced to the three syndrome-relevant error terms.
pub fn two_qubit_channel_ptm(p_2: f64) -> PauliTransferMatrix {
    let c = 4.0 * p_2 / 15.0;
    PauliTransferMatrix::pauli_channel(2, &[(1.0 - 3.0 * c, 0), (c, PAULI_P), (c, PAULI_Q), (c, PAULI_R)])
}

/// Largest elementwise deviation between two applications of the CNOT
/// channel and the product of the three factored flip channels.
pub fn verify_factorization(p_2: f64) -> Result<f64> {
    let [lp, lq, lr] = factorize_two_qubit_channel(p_2)?;
    let twice = two_qubit_channel_ptm(p_2).then(&two_qubit_channel_ptm(p_2));
    let flip = |lambda: f64, pauli: usize| PauliTransferMatrix::pauli_channel(2, &[(1.0 - lambda, 0), (lambda, pauli)]);
    let product = flip(lp, PAULI_P).then(&flip(lq, PAULI_Q)).then(&flip(lr, PAULI_R));
    Ok(twice.max_abs_diff(&product))
}
