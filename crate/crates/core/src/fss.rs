//! Finite-size scaling: jackknife errors, disorder averages of `xi_L / L`,
//! curve crossings, threshold brackets and exact clean-lattice critical
//! temperatures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{fundamental_probs, nishimori_couplings, CouplingOptions, EffectiveRates};
use crate::spin_glass::{correlation_length, ObservableSeries};

/// Leave-one-out jackknife `(mean, stderr)` of the sample mean.
pub fn jackknife(bins: &[f64]) -> Result<(f64, f64)> {
    jackknife_with(bins.len(), |skip| {
        let (s, n) = bins
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != skip)
            .fold((0.0, 0), |(s, n), (_, &b)| (s + b, n + 1));
        Ok(s / n as f64)
    })
}

/// Jackknife of an arbitrary estimator. `estimate(None)` is the full-sample
/// value, `estimate(Some(i))` the value with unit `i` left out.
pub fn jackknife_with(n: usize, estimate: impl Fn(Option<usize>) -> Result<f64>) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("jackknife needs >= 2 bins, got {n}")));
    }
    let full = estimate(None)?;
    let loo = (0..n).map(|i| estimate(Some(i))).collect::<Result<Vec<_>>>()?;
    let m = loo.iter().sum::<f64>() / n as f64;
    let var = loo.iter().map(|x| (x - m).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    Ok((full, var.sqrt()))
}

/// One point of a `xi_L / L` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiPoint {
    pub temperature: f64,
    pub xi_over_l: f64,
    pub error: f64,
    /// Samples whose own `G(0) / G(q)` ratio was below one or whose
    /// `G(q)` vanished. They stay in the averages; see [`xi_curve`].
    pub invalid_samples: usize,
}

/// Disorder-averaged `xi_L / L` per temperature.
///
/// `G(0)` and `G(q)` are averaged separately before forming the ratio.
/// Errors come from a jackknife over disorder samples, or over time bins
/// when there is a single sample. Samples with a noisy per-sample ratio
/// below one are counted but kept, since dropping them biases the
/// high-temperature average upwards.
pub fn xi_curve(series: &[ObservableSeries]) -> Result<Vec<XiPoint>> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidArgument("no disorder samples".into()))?;
    let l = first.l;
    for s in series {
        if s.l != l || s.temperatures != first.temperatures {
            return Err(Error::DimensionMismatch("samples disagree on L or temperatures".into()));
        }
    }
    let nt = first.temperatures.len();
    (0..nt)
        .map(|k| {
            let (g0, gq): (Vec<f64>, Vec<f64>) = if series.len() == 1 {
                (first.g0_bins[k].clone(), first.gq_bins[k].clone())
            } else {
                series.iter().map(|s| (s.g0_mean(k), s.gq_mean(k))).unzip()
            };
            let invalid = g0.iter().zip(&gq).filter(|(a, b)| !(**b > 0.0) || a < b).count();
            let (xi, err) = jackknife_ratio(&g0, &gq, l)?;
            Ok(XiPoint {
                temperature: first.temperatures[k],
                xi_over_l: xi,
                error: err,
                invalid_samples: if series.len() == 1 { 0 } else { invalid },
            })
        })
        .collect()
}

/// Jackknife of `xi(mean G0, mean Gq) / L`.
///
/// A vanishing `G(q)` average with nonzero `G(0)` is the fully ordered
/// limit and gives `xi / L = inf`; an infinite leave-one-out value makes
/// the error infinite. Both correlators vanishing is an error.
pub fn jackknife_ratio(g0: &[f64], gq: &[f64], l: usize) -> Result<(f64, f64)> {
    if g0.len() != gq.len() {
        return Err(Error::DimensionMismatch("G(0) and G(q) lengths differ".into()));
    }
    let n = g0.len();
    let (s0, sq): (f64, f64) = (g0.iter().sum(), gq.iter().sum());
    let estimate = |skip: Option<usize>| -> Result<f64> {
        let (a, b, m) = match skip {
            None => (s0, sq, n),
            Some(i) => (s0 - g0[i], sq - gq[i], n - 1),
        };
        let (a, b) = (a / m as f64, b / m as f64);
        // Noise-dominated points sit below the estimator's domain; clamp
        // them to its boundary.
        if b > 0.0 && a >= b {
            Ok(correlation_length(a, b, l)? / l as f64)
        } else if b > 0.0 {
            Ok(0.0)
        } else if a > 0.0 {
            Ok(f64::INFINITY)
        } else {
            Err(Error::InvalidArgument("G(0) and G(q) averages both vanish".into()))
        }
    };
    let full = estimate(None)?;
    if full.is_infinite() {
        return Ok((full, f64::INFINITY));
    }
    if n >= 2 && (0..n).any(|i| estimate(Some(i)).is_ok_and(f64::is_infinite)) {
        return Ok((full, f64::INFINITY));
    }
    jackknife_with(n, estimate)
}

/// `xi_L / L` curves for several sizes on a shared temperature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    /// Strictly increasing sizes.
    pub sizes: Vec<usize>,
    /// Strictly increasing temperatures.
    pub temperatures: Vec<f64>,
    /// `values[i][k]` for size `i` at temperature `k`.
    pub values: Vec<Vec<f64>>,
    pub errors: Vec<Vec<f64>>,
}

impl CurveFamily {
    pub fn new(
        sizes: Vec<usize>,
        temperatures: Vec<f64>,
        values: Vec<Vec<f64>>,
        errors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let fam = Self {
            sizes,
            temperatures,
            values,
            errors,
        };
        fam.validate()?;
        Ok(fam)
    }

    /// Builds a family from per-size curves, which must share one grid.
    pub fn from_curves(curves: &[(usize, Vec<XiPoint>)]) -> Result<Self> {
        let mut curves: Vec<_> = curves.to_vec();
        curves.sort_by_key(|c| c.0);
        let grid: Vec<f64> = curves
            .first()
            .map(|c| c.1.iter().map(|p| p.temperature).collect())
            .unwrap_or_default();
        for (_, pts) in &curves {
            if pts.len() != grid.len() || pts.iter().zip(&grid).any(|(p, t)| p.temperature != *t) {
                return Err(Error::DimensionMismatch(
                    "curves use different temperature grids".into(),
                ));
            }
        }
        Self::new(
            curves.iter().map(|c| c.0).collect(),
            grid,
            curves
                .iter()
                .map(|c| c.1.iter().map(|p| p.xi_over_l).collect())
                .collect(),
            curves.iter().map(|c| c.1.iter().map(|p| p.error).collect()).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("need >= 2 distinct increasing sizes".into()));
        }
        if self.temperatures.len() < 3 || self.temperatures.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("need >= 3 increasing temperatures".into()));
        }
        let nt = self.temperatures.len();
        if self.values.len() != self.sizes.len()
            || self.errors.len() != self.sizes.len()
            || self.values.iter().chain(&self.errors).any(|row| row.len() != nt)
        {
            return Err(Error::DimensionMismatch("curve values do not match the grid".into()));
        }
        if self.values.iter().flatten().any(|v| !v.is_finite())
            || self.errors.iter().flatten().any(|e| !(e.is_finite() && *e >= 0.0))
        {
            return Err(Error::InvalidArgument("non-finite value or negative error".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Crossing,
    Bracket,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub case: Option<String>,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub value: f64,
    pub uncertainty: f64,
    pub method: Method,
    /// `(last crossing p, first non-crossing p)` for brackets.
    pub bracket: Option<(f64, f64)>,
    /// Pairwise crossing temperatures for crossings.
    pub pairwise: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoCrossingReason {
    /// Some pair of curves never changes order inside the grid.
    NoIntersection,
    /// The two largest sizes agree within errors over the coldest quarter
    /// of the grid.
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingOutcome {
    Crossing(ThresholdEstimate),
    NoCrossing(NoCrossingReason),
}

impl CrossingOutcome {
    pub fn estimate(&self) -> Option<&ThresholdEstimate> {
        match self {
            CrossingOutcome::Crossing(e) => Some(e),
            CrossingOutcome::NoCrossing(_) => None,
        }
    }
}

/// Crossing of the pair `(a, b)` with `a` the smaller size: the larger
/// system must lie above on the cold side and below on the hot side.
/// Among several such sign changes the one best separating the ordering
/// is kept. Returns `(T, sigma_T)`.
fn pair_crossing(fam: &CurveFamily, a: usize, b: usize) -> Option<(f64, f64)> {
    let t = &fam.temperatures;
    let n = t.len();
    let delta: Vec<f64> = (0..n).map(|k| fam.values[b][k] - fam.values[a][k]).collect();
    let sigma: Vec<f64> = (0..n).map(|k| fam.errors[a][k].hypot(fam.errors[b][k])).collect();
    let mut best: Option<(usize, f64, f64)> = None;
    for k in 0..n - 1 {
        let (d0, d1) = (delta[k], delta[k + 1]);
        if !(d0 >= 0.0 && d1 < 0.0) {
            continue;
        }
        let score =
            delta[..=k].iter().filter(|d| **d >= 0.0).count() + delta[k + 1..].iter().filter(|d| **d < 0.0).count();
        let w = d0 / (d0 - d1);
        let x = t[k] + w * (t[k + 1] - t[k]);
        let slope = (d1 - d0) / (t[k + 1] - t[k]);
        let s = ((1.0 - w) * sigma[k] + w * sigma[k + 1]) / slope.abs();
        if best.is_none_or(|(sc, _, _)| score > sc) {
            best = Some((score, x, s));
        }
    }
    best.map(|(_, x, s)| (x, s))
}

/// Locates the common crossing of the `xi_L / L` curves.
pub fn find_crossing(fam: &CurveFamily) -> Result<CrossingOutcome> {
    fam.validate()?;
    let m = fam.sizes.len();
    let n = fam.temperatures.len();
    let (a, b) = (m - 2, m - 1);
    let quarter = n.div_ceil(4);
    let separated = (0..quarter).any(|k| {
        let d = (fam.values[b][k] - fam.values[a][k]).abs();
        d > fam.errors[a][k].hypot(fam.errors[b][k])
    });
    if !separated {
        return Ok(CrossingOutcome::NoCrossing(NoCrossingReason::Overlap));
    }
    let mut pts = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            match pair_crossing(fam, i, j) {
                Some(p) => pts.push(p),
                None => return Ok(CrossingOutcome::NoCrossing(NoCrossingReason::NoIntersection)),
            }
        }
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let weighted = pts.iter().all(|p| p.1 > 0.0);
    let (value, propagated) = if weighted {
        // Pairs share curves, so their errors are not combined as if
        // independent: the propagated error is the weighted mean sigma.
        let wsum: f64 = pts.iter().map(|p| p.1.powi(-2)).sum();
        let v = pts.iter().map(|p| p.0 * p.1.powi(-2)).sum::<f64>() / wsum;
        let s = pts.iter().map(|p| p.1.recip()).sum::<f64>() / wsum;
        (v, s)
    } else {
        (xs.iter().sum::<f64>() / xs.len() as f64, 0.0)
    };
    let spread = if xs.len() > 1 {
        let mu = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let uncertainty = propagated.hypot(spread).max(1e-12 * value.abs().max(1.0));
    Ok(CrossingOutcome::Crossing(ThresholdEstimate {
        value,
        uncertainty,
        method: Method::Crossing,
        bracket: None,
        pairwise: xs,
        provenance: Provenance {
            sizes: fam.sizes.clone(),
            ..Provenance::default()
        },
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketHint {
    /// Every grid point crosses: extend the grid to larger `p`.
    ExtendUp,
    /// No grid point crosses: extend to smaller `p`.
    ExtendDown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketOutcome {
    Estimate(ThresholdEstimate),
    Inconclusive {
        hint: BracketHint,
        crossings: Vec<(f64, bool)>,
    },
}

/// Runs `runner` at each `p` and brackets the largest `p` that still
/// shows a crossing: `p_c` is the midpoint of the last crossing `p` and
/// the first non-crossing one, with half the gap as uncertainty.
pub fn threshold_bracket(
    case: Option<&str>,
    p_grid: &[f64],
    mut runner: impl FnMut(f64) -> Result<CurveFamily>,
) -> Result<BracketOutcome> {
    if p_grid.is_empty() || p_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("p grid must be non-empty and increasing".into()));
    }
    let mut crossings = Vec::with_capacity(p_grid.len());
    let mut sizes = Vec::new();
    for &p in p_grid {
        let fam = runner(p)?;
        sizes = fam.sizes.clone();
        let crosses = matches!(find_crossing(&fam)?, CrossingOutcome::Crossing(_));
        crossings.push((p, crosses));
    }
    let first_none = crossings.iter().position(|c| !c.1);
    match first_none {
        None => Ok(BracketOutcome::Inconclusive {
            hint: BracketHint::ExtendUp,
            crossings,
        }),
        Some(0) => Ok(BracketOutcome::Inconclusive {
            hint: BracketHint::ExtendDown,
            crossings,
        }),
        Some(k) => {
            let (lo, hi) = (crossings[k - 1].0, crossings[k].0);
            Ok(BracketOutcome::Estimate(ThresholdEstimate {
                value: 0.5 * (lo + hi),
                uncertainty: 0.5 * (hi - lo),
                method: Method::Bracket,
                bracket: Some((lo, hi)),
                pairwise: Vec::new(),
                provenance: Provenance {
                    case: case.map(str::to_owned),
                    sizes,
                    seeds: Vec::new(),
                },
            }))
        }
    }
}

/// Critical temperature of the clean anisotropic triangular ferromagnet,
/// the root of `s1 s2 + s2 s3 + s3 s1 = 1` with `s_i = sinh(2 J_i / T)`.
pub fn exact_triangular_tc(j1: f64, j2: f64, j3: f64) -> Result<f64> {
    if !(j1 > 0.0 && j1.is_finite()) {
        return Err(Error::domain("J1", j1, f64::MIN_POSITIVE, f64::MAX));
    }
    if !(j2 > 0.0 && j2.is_finite()) {
        return Err(Error::domain("J2", j2, f64::MIN_POSITIVE, f64::MAX));
    }
    if !(j3 >= 0.0 && j3.is_finite()) {
        return Err(Error::domain("J3", j3, 0.0, f64::MAX));
    }
    let f = |t: f64| {
        let (s1, s2, s3) = ((2.0 * j1 / t).sinh(), (2.0 * j2 / t).sinh(), (2.0 * j3 / t).sinh());
        s1 * s2 + s2 * s3 + s3 * s1 - 1.0
    };
    // f decreases monotonically from +inf to -1.
    let scale = j1 + j2 + j3;
    let (mut lo, mut hi) = (1e-3 * scale, scale);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The four disorder families with `p = q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `r = p / 2`
    I,
    /// `r = p`
    II,
    /// `r = 2 p`
    III,
    /// `r = 0`
    IV,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::I, Case::II, Case::III, Case::IV];

    pub fn r_over_p(self) -> f64 {
        match self {
            Case::I => 0.5,
            Case::II => 1.0,
            Case::III => 2.0,
            Case::IV => 0.0,
        }
    }

    pub fn rates(self, p: f64) -> Result<EffectiveRates> {
        EffectiveRates::new(p, p, self.r_over_p() * p)
    }

    /// Coupling magnitudes in the `p -> 0` limit, where every correlated
    /// family becomes isotropic.
    pub fn clean_magnitudes(self) -> [f64; 3] {
        match self {
            Case::IV => [1.0, 1.0, 0.0],
            _ => [1.0, 1.0, 1.0],
        }
    }

    pub fn clean_tc(self) -> f64 {
        let [a, b, c] = self.clean_magnitudes();
        exact_triangular_tc(a, b, c).expect("clean magnitudes are valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
            Case::IV => "IV",
        }
    }
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Case::I),
            "II" | "2" => Ok(Case::II),
            "III" | "3" => Ok(Case::III),
            "IV" | "4" => Ok(Case::IV),
            _ => Err(Error::InvalidArgument(format!("unknown case `{s}`"))),
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Nishimori temperature of `case` at `p`.
pub fn nishimori_line(case: Case, p: f64, opts: &CouplingOptions) -> Result<f64> {
    let rates = case.rates(p)?;
    Ok(nishimori_couplings(&fundamental_probs(&rates), opts)?.nishimori_temperature())
}
