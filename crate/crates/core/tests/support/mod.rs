//! Independent oracles shared by the core integration tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use replab_core::decoder::{evaluate_chain, weight_metric, DecoderOptions};
use replab_core::lattice::{chain_from_disorder, DisorderSample, LatticeDims};
use replab_core::noise::EffectiveRates;

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, (i64, i64));

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.partial_cmp(&self.0).unwrap().then(self.1.cmp(&o.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Moves of the triangular syndrome lattice with their weight index.
pub const MOVES: [((i64, i64), usize); 6] = [
    ((1, 0), 0),
    ((-1, 0), 0),
    ((0, 1), 1),
    ((0, -1), 1),
    ((1, 1), 2),
    ((-1, -1), 2),
];

/// Plain Dijkstra over an implicit graph.
pub fn dijkstra(src: (i64, i64), w: [f64; 3], inside: impl Fn((i64, i64)) -> bool) -> HashMap<(i64, i64), f64> {
    let mut dist = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(src, 0.0);
    heap.push(Item(0.0, src));
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[&u] {
            continue;
        }
        for ((dx, dt), f) in MOVES {
            let v = (u.0 + dx, u.1 + dt);
            if !inside(v) || !w[f].is_finite() {
                continue;
            }
            let nd = d + w[f];
            if dist.get(&v).is_none_or(|&old| nd < old) {
                dist.insert(v, nd);
                heap.push(Item(nd, v));
            }
        }
    }
    dist
}

/// Distance on the unbounded lattice, from a box large enough to hold
/// every shortest path between points `radius` apart.
pub fn free_distances(w: [f64; 3], radius: i64) -> HashMap<(i64, i64), f64> {
    let b = 4 * radius + 4;
    dijkstra((0, 0), w, |(x, t)| x.abs() <= b && t.abs() <= b)
}

/// Pair distances inside the code lattice `x in [0, d-2]`, `t in [1, T]`.
pub fn bounded_distances(dims: &LatticeDims, src: (i64, i64), w: [f64; 3]) -> HashMap<(i64, i64), f64> {
    let (a, r) = (dims.ancillas() as i64, dims.rounds as i64);
    dijkstra(src, w, |(x, t)| (0..a).contains(&x) && (1..=r).contains(&t))
}

/// Distance to either boundary column `x = -1` or `x = d - 1`.
pub fn bounded_boundary_distance(dims: &LatticeDims, src: (i64, i64), w: [f64; 3]) -> f64 {
    let (a, r) = (dims.ancillas() as i64, dims.rounds as i64);
    // Boundary columns are absorbing: paths may end there but not continue.
    let dist = dijkstra(src, w, |(x, t)| (-1..=a).contains(&x) && (1..=r).contains(&t));
    dist.iter()
        .filter(|((x, _), _)| *x == -1 || *x == a)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min)
}

/// Flip indicators that survive masking on a `d x T` memory experiment,
/// as `(cell, channel)`.
pub fn live_faults(dims: &LatticeDims) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for t in 1..=dims.rounds {
        for i in 0..dims.d {
            let c = dims.cell(i, t);
            out.push((c, 0));
            if dims.has_measurement_link(i, t) {
                out.push((c, 1));
            }
            if t < dims.rounds {
                out.push((c, 2));
            }
        }
    }
    out
}

/// Exact failure probability of the decoder by enumerating every fault
/// pattern.
pub fn exact_failure_probability(dims: &LatticeDims, rates: &EffectiveRates) -> f64 {
    let faults = live_faults(dims);
    assert!(faults.len() <= 24, "too many fault locations");
    let metric = weight_metric(rates).unwrap();
    let opts = DecoderOptions::default();
    let prob = [rates.p, rates.q, rates.r];
    let mut total = 0.0;
    for mask in 0u32..(1 << faults.len()) {
        let mut z = vec![[1i8; 3]; dims.cells()];
        let mut pr = 1.0;
        for (b, &(c, ch)) in faults.iter().enumerate() {
            if mask >> b & 1 == 1 {
                z[c][ch] = -1;
                pr *= prob[ch];
            } else {
                pr *= 1.0 - prob[ch];
            }
        }
        let sample = DisorderSample {
            width: dims.d,
            height: dims.rounds,
            z,
            seed: 0,
            rates: *rates,
        };
        let chain = chain_from_disorder(&sample).unwrap();
        if !evaluate_chain(&chain, &metric, &opts).unwrap().success {
            total += pr;
        }
    }
    total
}
