//! Exact weighted matching on general graphs.
//!
//! Edmonds' blossom algorithm in the primal-dual form of Galil (1986),
//! O(n^3), following the structure of Joris van Rantwijk's reference
//! implementation. Weights are integers so that every dual update is exact;
//! callers with real weights quantize first (see [`quantize`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Weight = i64;

const NONE: usize = usize::MAX;

/// Fixed-point scale used by [`quantize`].
pub const WEIGHT_SCALE: f64 = (1u64 << 24) as f64;

/// Converts a nonnegative real weight to the solver's fixed-point units.
pub fn quantize(w: f64) -> Weight {
    debug_assert!(w.is_finite() && w >= 0.0);
    (w * WEIGHT_SCALE).round() as Weight
}

pub fn dequantize(w: Weight) -> f64 {
    w as f64 / WEIGHT_SCALE
}

/// Maximum-weight matching of the graph on vertices `0..n`.
///
/// With `max_cardinality`, only maximum-cardinality matchings are
/// considered. Returns `mate[v]`, the partner of `v`, if any.
pub fn max_weight_matching(n: usize, edges: &[(usize, usize, Weight)], max_cardinality: bool) -> Vec<Option<usize>> {
    solve_with_duals(n, edges, max_cardinality).mate
}

/// Optimal matching together with the final dual solution, which certifies
/// optimality against edges that were not part of the input.
#[derive(Debug, Clone)]
pub struct CertifiedMatching {
    pub mate: Vec<Option<usize>>,
    /// Twice the vertex duals, then the blossom duals.
    dual: Vec<Weight>,
    parent: Vec<usize>,
}

impl CertifiedMatching {
    fn ancestors(&self, v: usize) -> Vec<usize> {
        let mut chain = vec![v];
        let mut b = v;
        while self.parent[b] != NONE {
            b = self.parent[b];
            chain.push(b);
        }
        chain
    }

    /// Whether an extra edge `(i, j, w)` satisfies the dual constraint. If
    /// every omitted edge does, the matching is optimal on the larger graph.
    pub fn admits(&self, i: usize, j: usize, w: Weight) -> bool {
        let mut s = self.dual[i] + self.dual[j] - 2 * w;
        if s >= 0 {
            return true;
        }
        if self.parent[i] == NONE || self.parent[j] == NONE {
            return false;
        }
        let ci = self.ancestors(i);
        let cj = self.ancestors(j);
        for (bi, bj) in ci.iter().rev().zip(cj.iter().rev()) {
            if bi != bj {
                break;
            }
            s += 2 * self.dual[*bi];
        }
        s >= 0
    }
}

/// As [`max_weight_matching`], keeping the dual certificate.
pub fn solve_with_duals(n: usize, edges: &[(usize, usize, Weight)], max_cardinality: bool) -> CertifiedMatching {
    if edges.is_empty() || n == 0 {
        return CertifiedMatching {
            mate: vec![None; n],
            dual: vec![0; 2 * n],
            parent: vec![NONE; 2 * n],
        };
    }
    for &(i, j, _) in edges {
        assert!(i < n && j < n && i != j, "invalid edge ({i}, {j})");
    }
    let mut solver = Solver::new(n, edges, max_cardinality);
    solver.run();
    let mate = solver
        .mate
        .iter()
        .map(|&p| if p == NONE { None } else { Some(solver.endpoint[p]) })
        .collect();
    CertifiedMatching {
        mate,
        dual: solver.dualvar,
        parent: solver.blossomparent,
    }
}

struct Solver {
    n: usize,
    /// Edge endpoints and weights, `edge_u[k]`, `edge_v[k]`, `edge_w[k]`.
    edge_u: Vec<usize>,
    edge_v: Vec<usize>,
    edge_w: Vec<Weight>,
    max_cardinality: bool,
    endpoint: Vec<usize>,
    /// Incident endpoints of vertex `v`: `nb_list[nb_start[v]..nb_start[v + 1]]`.
    nb_start: Vec<usize>,
    nb_list: Vec<usize>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<Weight>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl Solver {
    fn new(n: usize, edges: &[(usize, usize, Weight)], max_cardinality: bool) -> Self {
        let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * edges.len());
        let mut nb_start = vec![0; n + 1];
        for &(i, j, _) in edges {
            nb_start[i + 1] += 1;
            nb_start[j + 1] += 1;
        }
        for v in 0..n {
            nb_start[v + 1] += nb_start[v];
        }
        let mut fill = nb_start.clone();
        let mut nb_list = vec![0; 2 * edges.len()];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            endpoint.push(i);
            endpoint.push(j);
            nb_list[fill[i]] = 2 * k + 1;
            fill[i] += 1;
            nb_list[fill[j]] = 2 * k;
            fill[j] += 1;
        }
        let mut dualvar = vec![maxweight; n];
        dualvar.extend(std::iter::repeat(0).take(n));
        let mut blossombase: Vec<usize> = (0..n).collect();
        blossombase.extend(std::iter::repeat(NONE).take(n));
        Self {
            n,
            edge_u: edges.iter().map(|e| e.0).collect(),
            edge_v: edges.iter().map(|e| e.1).collect(),
            edge_w: edges.iter().map(|e| e.2).collect(),
            max_cardinality,
            endpoint,
            nb_start,
            nb_list,
            mate: vec![NONE; n],
            label: vec![0; 2 * n],
            labelend: vec![NONE; 2 * n],
            inblossom: (0..n).collect(),
            blossomparent: vec![NONE; 2 * n],
            blossomchilds: vec![Vec::new(); 2 * n],
            blossombase,
            blossomendps: vec![Vec::new(); 2 * n],
            bestedge: vec![NONE; 2 * n],
            blossombestedges: vec![None; 2 * n],
            unusedblossoms: (n..2 * n).collect(),
            dualvar,
            allowedge: vec![false; edges.len()],
            queue: Vec::new(),
        }
    }

    #[inline]
    fn slack(&self, k: usize) -> Weight {
        self.dualvar[self.edge_u[k]] + self.dualvar[self.edge_v[k]] - 2 * self.edge_w[k]
    }

    fn neighbours(&self, v: usize) -> &[usize] {
        &self.nb_list[self.nb_start[v]..self.nb_start[v + 1]]
    }

    #[inline]
    fn edge(&self, k: usize) -> (usize, usize) {
        (self.edge_u[k], self.edge_v[k])
    }

    fn queue_leaves(&mut self, b: usize) {
        if b < self.n {
            self.queue.push(b);
        } else {
            for idx in 0..self.blossomchilds[b].len() {
                self.queue_leaves(self.blossomchilds[b][idx]);
            }
        }
    }

    fn leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.n {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                self.leaves(t, out);
            }
        }
    }

    fn leaves_of(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.leaves(b, &mut out);
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            self.queue_leaves(b);
        } else if t == 2 {
            let base = self.blossombase[b];
            debug_assert!(self.mate[base] != NONE);
            let mb = self.mate[base];
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Traces back from `v` and `w` to find a new blossom base, or `NONE`
    /// when the two paths reach distinct exposed vertices (augmenting path).
    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert_eq!(self.label[b], 1);
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert_eq!(self.label[b], 2);
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w) = self.edge(k);
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom pool exhausted");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        debug_assert_eq!(self.label[bb], 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        self.blossomchilds[b] = path.clone();
        self.blossomendps[b] = endps;
        for v in self.leaves_of(b) {
            if self.label[self.inblossom[v]] == 2 {
                self.queue.push(v);
            }
            self.inblossom[v] = b;
        }
        // Best edge from the new blossom to every neighbouring S-blossom.
        let mut bestedgeto = vec![NONE; 2 * self.n];
        for &bv in &path {
            let nblists: Vec<Vec<usize>> = match self.blossombestedges[bv].take() {
                Some(list) => vec![list],
                None => self
                    .leaves_of(bv)
                    .into_iter()
                    .map(|v| self.neighbours(v).iter().map(|p| p / 2).collect())
                    .collect(),
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j) = self.edge(k);
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.bestedge[bv] = NONE;
        }
        let list: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        let mut best = NONE;
        for &k in &list {
            if best == NONE || self.slack(k) < self.slack(best) {
                best = k;
            }
        }
        self.blossombestedges[b] = Some(list);
        self.bestedge[b] = best;
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NONE;
            if s < self.n {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.leaves_of(s) {
                    self.inblossom[v] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            let len = childs.len() as isize;
            let at = |j: isize| -> usize { j.rem_euclid(len) as usize };
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = childs.iter().position(|&c| c == entrychild).unwrap() as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 != 0 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let endps = self.blossomendps[b].clone();
            let mut p = self.labelend[b];
            while j != 0 {
                let q = endps[at(j - endptrick as isize)];
                self.label[self.endpoint[p ^ 1]] = 0;
                self.label[self.endpoint[q ^ endptrick ^ 1]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[q / 2] = true;
                j += jstep;
                p = endps[at(j - endptrick as isize)] ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = childs[at(j)];
            let ep = self.endpoint[p ^ 1];
            self.label[ep] = 2;
            self.label[bv] = 2;
            self.labelend[ep] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while childs[at(j)] != entrychild {
                let bv = childs[at(j)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let labelled = self.leaves_of(bv).into_iter().find(|&v| self.label[v] != 0);
                if let Some(v) = labelled {
                    debug_assert_eq!(self.label[v], 2);
                    debug_assert_eq!(self.inblossom[v], bv);
                    self.label[v] = 0;
                    let m = self.mate[self.blossombase[bv]];
                    self.label[self.endpoint[m]] = 0;
                    self.assign_label(v, 2, self.labelend[v]);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.n {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len() as isize;
        let at = |j: isize| -> usize { j.rem_euclid(len) as usize };
        let i = self.blossomchilds[b].iter().position(|&c| c == t).unwrap();
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 != 0 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][at(j)];
            let p = self.blossomendps[b][at(j - endptrick as isize)] ^ endptrick;
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][at(j)];
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w) = self.edge(k);
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                if bs >= self.n {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert_eq!(self.blossombase[bt], t);
                if bt >= self.n {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn run(&mut self) {
        let n = self.n;
        for _stage in 0..n {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = NONE);
            for b in n..2 * n {
                self.blossombestedges[b] = None;
            }
            self.allowedge.fill(false);
            self.queue.clear();
            for v in 0..n {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                while let Some(v) = self.queue.pop() {
                    if augmented {
                        break;
                    }
                    debug_assert_eq!(self.label[self.inblossom[v]], 1);
                    for idx in self.nb_start[v]..self.nb_start[v + 1] {
                        let p = self.nb_list[idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            let bw = self.inblossom[w];
                            if self.label[bw] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[bw] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert_eq!(self.label[bw], 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                    if augmented {
                        break;
                    }
                }
                if augmented {
                    break;
                }

                // No augmenting path under the current duals: pick the
                // largest dual step that keeps them feasible.
                let mut deltatype = 0u8;
                let mut delta: Weight = 0;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                if !self.max_cardinality {
                    deltatype = 1;
                    delta = *self.dualvar[..n].iter().min().unwrap();
                }
                for v in 0..n {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * n {
                    if self.blossomparent[b] == NONE && self.label[b] == 1 && self.bestedge[b] != NONE {
                        let kslack = self.slack(self.bestedge[b]);
                        debug_assert_eq!(kslack % 2, 0);
                        let d = kslack / 2;
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == 0 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == 0 {
                    // Only reachable with max_cardinality: no further
                    // augmenting path exists.
                    deltatype = 1;
                    delta = (*self.dualvar[..n].iter().min().unwrap()).max(0);
                }

                for v in 0..n {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, j) = self.edge(deltaedge);
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _) = self.edge(deltaedge);
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }
            if !augmented {
                break;
            }
            for b in n..2 * n {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
    }
}

/// Graph for minimum-weight perfect matching: `real` defect nodes followed
/// by one virtual boundary partner per real node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingGraph {
    pub real: usize,
    pub nodes: usize,
    /// `(u, v, weight)` with `u < v`; absent pairs cannot be matched.
    pub edges: Vec<(usize, usize, Weight)>,
}

impl MatchingGraph {
    /// Plain graph with no boundary structure.
    pub fn new(nodes: usize, edges: Vec<(usize, usize, Weight)>) -> Self {
        Self {
            real: nodes,
            nodes,
            edges,
        }
    }

    /// Builds the boundary-augmented graph: all real pairs from `pair`,
    /// real node `i` to its virtual copy `real + i` with `boundary(i)`, and
    /// zero-weight edges between all virtual copies. `None` weights are
    /// omitted.
    pub fn with_boundary(
        real: usize,
        mut pair: impl FnMut(usize, usize) -> Option<Weight>,
        mut boundary: impl FnMut(usize) -> Option<Weight>,
    ) -> Self {
        let mut edges = Vec::with_capacity(real * real + real);
        for i in 0..real {
            for j in i + 1..real {
                if let Some(w) = pair(i, j) {
                    edges.push((i, j, w));
                }
            }
        }
        for i in 0..real {
            if let Some(w) = boundary(i) {
                edges.push((i, real + i, w));
            }
        }
        for i in 0..real {
            for j in i + 1..real {
                edges.push((real + i, real + j, 0));
            }
        }
        Self {
            real,
            nodes: 2 * real,
            edges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// Matched pairs `(u, v)` with `u < v`, sorted.
    pub pairs: Vec<(usize, usize)>,
    pub total_weight: Weight,
}

impl Matching {
    pub fn mate_of(&self, v: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }
}

/// Exact minimum-weight perfect matching.
pub fn solve_mwpm(graph: &MatchingGraph) -> Result<Matching> {
    if graph.nodes == 0 {
        return Ok(Matching {
            pairs: Vec::new(),
            total_weight: 0,
        });
    }
    if graph.nodes % 2 == 1 {
        return Err(Error::InvalidArgument(format!("odd node count {}", graph.nodes)));
    }
    let max_w = graph.edges.iter().map(|e| e.2).max().unwrap_or(0);
    if graph.edges.iter().any(|e| e.2 < 0) {
        return Err(Error::InvalidArgument("negative edge weight".into()));
    }
    // Maximizing (C - w) over maximum-cardinality matchings minimizes w
    // over perfect ones.
    let c = max_w + 1;
    let flipped: Vec<_> = graph.edges.iter().map(|&(u, v, w)| (u, v, c - w)).collect();
    let mate = max_weight_matching(graph.nodes, &flipped, true);
    let mut weight_of = std::collections::HashMap::with_capacity(graph.edges.len());
    for &(u, v, w) in &graph.edges {
        let key = (u.min(v), u.max(v));
        let entry = weight_of.entry(key).or_insert(w);
        *entry = (*entry).min(w);
    }
    let mut pairs = Vec::with_capacity(graph.nodes / 2);
    let mut total_weight = 0;
    for (u, m) in mate.iter().enumerate() {
        match m {
            Some(v) if u < *v => {
                pairs.push((u, *v));
                total_weight += weight_of[&(u, *v)];
            }
            Some(_) => {}
            None => {
                return Err(Error::Contract(format!(
                    "graph has no perfect matching (node {u} exposed)"
                )))
            }
        }
    }
    Ok(Matching { pairs, total_weight })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Minimum over all perfect matchings by recursive enumeration.
    fn brute_force_min(n: usize, w: &[Vec<Option<Weight>>]) -> Option<Weight> {
        fn rec(rest: &mut Vec<usize>, w: &[Vec<Option<Weight>>]) -> Option<Weight> {
            if rest.is_empty() {
                return Some(0);
            }
            let a = rest.remove(0);
            let mut best: Option<Weight> = None;
            for idx in 0..rest.len() {
                let b = rest.remove(idx);
                if let Some(wab) = w[a][b] {
                    if let Some(sub) = rec(rest, w) {
                        let tot = wab + sub;
                        best = Some(best.map_or(tot, |x| x.min(tot)));
                    }
                }
                rest.insert(idx, b);
            }
            rest.insert(0, a);
            best
        }
        rec(&mut (0..n).collect(), w)
    }

    /// Maximum-weight (not necessarily perfect) matching by enumeration.
    fn brute_force_max(n: usize, w: &[Vec<Option<Weight>>]) -> Weight {
        fn rec(rest: &mut Vec<usize>, w: &[Vec<Option<Weight>>]) -> Weight {
            if rest.is_empty() {
                return 0;
            }
            let a = rest.remove(0);
            let mut best = rec(rest, w);
            for idx in 0..rest.len() {
                let b = rest.remove(idx);
                if let Some(wab) = w[a][b] {
                    best = best.max(wab + rec(rest, w));
                }
                rest.insert(idx, b);
            }
            rest.insert(0, a);
            best
        }
        rec(&mut (0..n).collect(), w)
    }

    #[test]
    fn empty_and_single_edge() {
        assert_eq!(solve_mwpm(&MatchingGraph::new(0, vec![])).unwrap().total_weight, 0);
        let m = solve_mwpm(&MatchingGraph::new(2, vec![(0, 1, 7)])).unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.total_weight, 7);
    }

    #[test]
    fn odd_graph_is_rejected() {
        assert!(solve_mwpm(&MatchingGraph::new(3, vec![(0, 1, 1)])).is_err());
    }

    #[test]
    fn classic_blossom_cases() {
        // Small cases from the reference implementation's test suite
        // (maximum weight, no cardinality constraint).
        let m = max_weight_matching(3, &[(0, 1, 10), (1, 2, 11)], false);
        assert_eq!(m, vec![None, Some(2), Some(1)]);
        // S-blossom and use it for augmentation.
        let m = max_weight_matching(4, &[(0, 1, 8), (0, 2, 9), (1, 2, 10), (2, 3, 7)], false);
        assert_eq!(m, vec![Some(1), Some(0), Some(3), Some(2)]);
        // Create nested S-blossom, relabel as T, expand.
        let edges = [
            (0, 1, 19),
            (0, 2, 20),
            (0, 7, 8),
            (1, 2, 25),
            (1, 3, 18),
            (2, 4, 18),
            (3, 4, 13),
            (3, 6, 7),
            (4, 5, 7),
        ];
        let m = max_weight_matching(8, &edges, false);
        assert_eq!(
            m,
            vec![Some(7), Some(2), Some(1), Some(6), Some(5), Some(4), Some(3), Some(0)]
        );
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(42);
        for trial in 0..400 {
            let n = 2 * rng.random_range(1..=4);
            let density = if trial % 3 == 0 { 0.6 } else { 1.0 };
            let mut w = vec![vec![None; n]; n];
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < density {
                        let x = rng.random_range(0..20);
                        w[i][j] = Some(x);
                        w[j][i] = Some(x);
                        edges.push((i, j, x));
                    }
                }
            }
            let expected = brute_force_min(n, &w);
            let got = solve_mwpm(&MatchingGraph::new(n, edges.clone()));
            match expected {
                Some(e) => assert_eq!(got.unwrap().total_weight, e, "trial {trial}"),
                None => assert!(got.is_err()),
            }
            let best = brute_force_max(n, &w);
            let mate = max_weight_matching(n, &edges, false);
            let total: Weight = mate
                .iter()
                .enumerate()
                .filter_map(|(u, m)| m.filter(|&v| u < v).map(|v| w[u][v].unwrap()))
                .sum();
            assert_eq!(total, best, "max-weight trial {trial}");
        }
    }

    #[test]
    fn certificate_detects_missing_edges() {
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.random_range(2..=8);
            let mut all = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    all.push((i, j, rng.random_range(1..30)));
                }
            }
            let keep: Vec<_> = all.iter().copied().filter(|_| rng.random::<f64>() < 0.5).collect();
            let sol = solve_with_duals(n, &keep, false);
            let sub_total: Weight = total(&sol.mate, &all);
            let full = max_weight_matching(n, &all, false);
            let certified = all.iter().all(|&(i, j, w)| sol.admits(i, j, w));
            if certified {
                assert_eq!(sub_total, total(&full, &all));
            }
            assert!(keep.iter().all(|&(i, j, w)| sol.admits(i, j, w)));
        }
    }

    fn total(mate: &[Option<usize>], edges: &[(usize, usize, Weight)]) -> Weight {
        edges.iter().filter(|&&(i, j, _)| mate[i] == Some(j)).map(|e| e.2).sum()
    }

    #[test]
    fn boundary_graph_shape() {
        let g = MatchingGraph::with_boundary(3, |i, j| Some((i + j) as Weight), |_| Some(5));
        assert_eq!(g.nodes, 6);
        assert_eq!(g.edges.len(), 3 + 3 + 3);
        assert!(g.edges.iter().filter(|e| e.0 >= 3 && e.1 >= 3).all(|e| e.2 == 0));
        let m = solve_mwpm(&g).unwrap();
        // Pair (0,1) costs 1 and node 2 goes to the boundary for 5.
        assert_eq!(m.total_weight, 6);
    }

    #[test]
    fn quantization_round_trip() {
        assert_eq!(dequantize(quantize(1.5)), 1.5);
        assert!((dequantize(quantize(9f64.ln())) - 9f64.ln()).abs() < 1e-7);
    }
}
