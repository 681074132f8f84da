//! Convolutional iterated (2k+1)-majority networks.
//!
//! Layers are numbered bottom-up: layer 0 is the input, layer `depth` the top.
//! Positions are 0-based. On a line, node `p` of layer `t` reads nodes
//! `s·p + j` (j = 0..=2k) of layer `t − 1`; on a cycle of width `w` it reads
//! `(s·p + j − k) mod w`.

use std::collections::BTreeSet;
use std::ops::Range;

use crate::bits::BitVector;
use crate::error::{check_len, invalid, Error, Result};
use crate::functions::sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Line,
    /// Cyclic layers; `n` is the input width.
    Cycle {
        n: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConvGraphSpec {
    pub k: usize,
    pub s: usize,
    pub depth: usize,
    pub topology: Topology,
}

impl ConvGraphSpec {
    pub fn line(k: usize, s: usize, depth: usize) -> Self {
        Self { k, s, depth, topology: Topology::Line }
    }

    pub fn cycle(k: usize, n: usize, depth: usize) -> Self {
        Self { k, s: 1, depth, topology: Topology::Cycle { n } }
    }

    pub fn filter_len(&self) -> usize {
        2 * self.k + 1
    }

    /// Windows of neighbouring nodes do not overlap, giving disjoint trees.
    pub fn is_disjoint(&self) -> bool {
        self.s > 2 * self.k + 1
    }
}

/// Width of the line layer `levels` below a single root node.
pub fn line_width(k: usize, s: usize, levels: usize) -> usize {
    let mut w = 1;
    for _ in 0..levels {
        w = s * (w - 1) + 2 * k + 1;
    }
    w
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvGraph {
    spec: ConvGraphSpec,
    widths: Vec<usize>,
}

pub fn build_graph(spec: ConvGraphSpec) -> Result<ConvGraph> {
    if spec.k == 0 || spec.s == 0 {
        return Err(invalid("need k >= 1 and s >= 1"));
    }
    let widths = match spec.topology {
        Topology::Line => (0..=spec.depth).map(|t| line_width(spec.k, spec.s, spec.depth - t)).collect(),
        Topology::Cycle { n } => {
            if n == 0 || n % 2 == 0 {
                return Err(invalid(format!("cycle width must be odd, got {n}")));
            }
            if n < spec.filter_len() {
                return Err(invalid("cycle narrower than the filter"));
            }
            let mut w = vec![n];
            for _ in 0..spec.depth {
                let last = *w.last().unwrap();
                if last % spec.s != 0 {
                    return Err(invalid(format!("cycle width {last} not divisible by stride {}", spec.s)));
                }
                w.push(last / spec.s);
            }
            if w.last().unwrap() % 2 == 0 {
                return Err(invalid("top cycle layer must have odd width"));
            }
            w
        }
    };
    Ok(ConvGraph { spec, widths })
}

impl ConvGraph {
    pub fn spec(&self) -> ConvGraphSpec {
        self.spec
    }

    pub fn depth(&self) -> usize {
        self.spec.depth
    }

    pub fn width(&self, layer: usize) -> usize {
        self.widths[layer]
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    /// Child `j` (0..=2k) of node `p` in layer `t ≥ 1`, as a position in layer `t − 1`.
    #[inline]
    pub fn child(&self, t: usize, p: usize, j: usize) -> usize {
        let base = self.spec.s * p + j;
        match self.spec.topology {
            Topology::Line => base,
            Topology::Cycle { .. } => {
                let w = self.widths[t - 1];
                (base + w - self.spec.k % w) % w
            }
        }
    }

    pub fn children(&self, t: usize, p: usize) -> Vec<usize> {
        (0..self.spec.filter_len()).map(|j| self.child(t, p, j)).collect()
    }

    /// Nodes of layer `t + 1` reading node `p` of layer `t`.
    pub fn parents(&self, t: usize, p: usize) -> Vec<usize> {
        if t >= self.depth() {
            return Vec::new();
        }
        match self.spec.topology {
            Topology::Line => {
                let (s, k2) = (self.spec.s, 2 * self.spec.k);
                let lo = p.saturating_sub(k2).div_ceil(s);
                let hi = (p / s).min(self.widths[t + 1] - 1);
                (lo..=hi).collect()
            }
            Topology::Cycle { .. } => {
                (0..self.widths[t + 1]).filter(|&q| self.children(t + 1, q).contains(&p)).collect()
            }
        }
    }

    fn check_node(&self, t: usize, p: usize) -> Result<()> {
        if t > self.depth() || p >= self.widths[t] {
            return Err(invalid(format!("node ({t}, {p}) does not exist")));
        }
        Ok(())
    }
}

/// One (2k+1)-input filter.
#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    Majority,
    AntiMajority,
    /// Copies child `q` (0-based within the window).
    Dictator(usize),
    AntiDictator(usize),
    /// sign(w·x), with sign(0) = +1.
    Weighted(Vec<f64>),
}

impl Filter {
    #[inline]
    pub fn apply(&self, x: &[i8]) -> i8 {
        match self {
            Self::Majority => majority_of(x),
            Self::AntiMajority => -majority_of(x),
            Self::Dictator(q) => x[*q],
            Self::AntiDictator(q) => -x[*q],
            Self::Weighted(w) => sign(w.iter().zip(x).map(|(a, &b)| a * b as f64).sum()),
        }
    }

    pub fn kind(&self) -> Result<FilterKind> {
        Ok(match self {
            Self::Majority => FilterKind::Majority,
            Self::AntiMajority => FilterKind::AntiMajority,
            Self::Dictator(q) => FilterKind::Dictator(*q),
            Self::AntiDictator(q) => FilterKind::AntiDictator(*q),
            Self::Weighted(w) => classify_filter(w)?,
        })
    }

    /// The filter's canonical form if it is one of the four named kinds.
    pub fn canonical(&self) -> Result<Filter> {
        Ok(match self.kind()? {
            FilterKind::Majority => Filter::Majority,
            FilterKind::AntiMajority => Filter::AntiMajority,
            FilterKind::Dictator(q) => Filter::Dictator(q),
            FilterKind::AntiDictator(q) => Filter::AntiDictator(q),
            FilterKind::Other => self.clone(),
        })
    }
}

#[inline]
fn majority_of(x: &[i8]) -> i8 {
    if x.iter().map(|&b| b as i32).sum::<i32>() > 0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Majority,
    AntiMajority,
    Dictator(usize),
    AntiDictator(usize),
    Other,
}

/// Identify sign(w·x) by its truth table. A zero sum on any input is an error.
pub fn classify_filter(weights: &[f64]) -> Result<FilterKind> {
    let m = weights.len();
    if m == 0 || m.is_multiple_of(2) || m > 20 {
        return Err(invalid(format!("filter length {m} must be odd and at most 19")));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numeric("non-finite filter weight".into()));
    }
    let mut table = Vec::with_capacity(1 << m);
    for x in BitVector::enumerate(m) {
        let s: f64 = weights.iter().zip(x.iter()).map(|(w, b)| w * b as f64).sum();
        if s == 0.0 {
            return Err(Error::AmbiguousFilter { input: x.into_inner() });
        }
        table.push((x, if s > 0.0 { 1i8 } else { -1 }));
    }
    let matches = |f: &dyn Fn(&[i8]) -> i8| table.iter().all(|(x, v)| f(x.as_slice()) == *v);
    if matches(&majority_of) {
        return Ok(FilterKind::Majority);
    }
    if matches(&|x| -majority_of(x)) {
        return Ok(FilterKind::AntiMajority);
    }
    for q in 0..m {
        if matches(&|x| x[q]) {
            return Ok(FilterKind::Dictator(q));
        }
        if matches(&|x| -x[q]) {
            return Ok(FilterKind::AntiDictator(q));
        }
    }
    Ok(FilterKind::Other)
}

fn check_filters(graph: &ConvGraph, filters: &[Filter]) -> Result<()> {
    check_len(graph.depth(), filters.len())?;
    let m = graph.spec.filter_len();
    for f in filters {
        let ok = match f {
            Filter::Dictator(q) | Filter::AntiDictator(q) => *q < m,
            Filter::Weighted(w) => w.len() == m,
            _ => true,
        };
        if !ok {
            return Err(invalid(format!("filter {f:?} does not fit window length {m}")));
        }
    }
    Ok(())
}

/// All layer values, bottom (the input) to top.
pub fn evaluate_layers(graph: &ConvGraph, filters: &[Filter], omega: &BitVector) -> Result<Vec<Vec<i8>>> {
    check_filters(graph, filters)?;
    check_len(graph.input_width(), omega.len())?;
    let m = graph.spec.filter_len();
    let mut layers = vec![omega.as_slice().to_vec()];
    let mut buf = vec![0i8; m];
    for t in 1..=graph.depth() {
        let prev = &layers[t - 1];
        let f = &filters[t - 1];
        let next: Vec<i8> = (0..graph.width(t))
            .map(|p| {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = prev[graph.child(t, p, j)];
                }
                f.apply(&buf)
            })
            .collect();
        layers.push(next);
    }
    Ok(layers)
}

/// Output of the network: the root on a line, the majority of the top layer on a cycle.
pub fn evaluate_direct(graph: &ConvGraph, filters: &[Filter], omega: &BitVector) -> Result<i8> {
    check_filters(graph, filters)?;
    check_len(graph.input_width(), omega.len())?;
    let s = graph.spec;
    // Fast path: stride-1 line with majority filters, evaluated in place.
    if s.topology == Topology::Line && s.s == 1 && filters.iter().all(|f| *f == Filter::Majority) {
        let mut x = omega.as_slice().to_vec();
        let k2 = 2 * s.k;
        for _ in 0..s.depth {
            let w = x.len() - k2;
            for p in 0..w {
                x[p] = majority_of(&x[p..=p + k2]);
            }
            x.truncate(w);
        }
        return Ok(x[0]);
    }
    let layers = evaluate_layers(graph, filters, omega)?;
    Ok(head(graph, layers.last().unwrap()))
}

fn head(graph: &ConvGraph, top: &[i8]) -> i8 {
    match graph.spec.topology {
        Topology::Line => top[0],
        Topology::Cycle { .. } => majority_of(top),
    }
}

pub fn all_majority(depth: usize) -> Vec<Filter> {
    vec![Filter::Majority; depth]
}

/// Stride-1, k = 1 line output via the nearest equal adjacent pair to the centre.
///
/// Returns the output and the distance K of that pair from the centre
/// (`None` for a fully alternating input, whose output is its last bit).
pub fn closest_pair(omega: &BitVector) -> Result<(i8, Option<usize>)> {
    let len = omega.len();
    if len.is_multiple_of(2) {
        return Err(invalid(format!("closest pair needs odd length, got {len}")));
    }
    let x = omega.as_slice();
    let c = len / 2;
    for k in 1..=c {
        if x[c - k] == x[c - k + 1] {
            return Ok((x[c - k], Some(k)));
        }
        if x[c + k - 1] == x[c + k] {
            return Ok((x[c + k], Some(k)));
        }
    }
    Ok((x[len - 1], None))
}

pub fn closest_pair_evaluate(omega: &BitVector) -> Result<i8> {
    closest_pair(omega).map(|(v, _)| v)
}

/// P(K = k) for the closest-pair distance on i.i.d. fair bits (k below the truncation).
pub fn closest_pair_distance_pmf(k: usize) -> f64 {
    3.0 * 0.25f64.powi(k as i32)
}

/// Closed-form flip-probability bound 3·[4/3 − 4(1−ε)⁴/(4−(1−ε)²)] for the stride-1 line.
pub fn stride1_flip_bound(eps: f64) -> f64 {
    let q = 1.0 - eps;
    3.0 * (4.0 / 3.0 - 4.0 * q.powi(4) / (4.0 - q * q))
}

/// Σ_k P(K = k)·(1 − (1−ε)^{2k+1}) = 1 − 3(1−ε)³/(4 − (1−ε)²).
///
/// Summed over the untruncated law of K: the chance that one of the 2K + 1
/// bits determining the output is flipped. Never exceeds [`stride1_flip_bound`].
pub fn stride1_flip_series(eps: f64) -> f64 {
    let q = 1.0 - eps;
    1.0 - 3.0 * q.powi(3) / (4.0 - q * q)
}

/// Result of removing dictator layers from a k = 1, stride-1 network.
#[derive(Debug, Clone, PartialEq)]
pub struct Collapsed {
    /// Remaining layers, all plain majorities.
    pub filters: Vec<Filter>,
    pub spec: ConvGraphSpec,
    /// Input positions the output depends on (the collapsed network's input).
    pub support: Range<usize>,
    /// Global sign from anti-majority and anti-dictator layers.
    pub sign: i8,
}

impl Collapsed {
    /// Evaluate the original function through the collapsed network.
    pub fn evaluate(&self, omega: &BitVector) -> Result<i8> {
        let sub = BitVector::new(omega.as_slice()[self.support.clone()].to_vec())?;
        if self.spec.depth == 0 {
            let g = build_graph(self.spec)?;
            return Ok(self.sign * head(&g, sub.as_slice()));
        }
        Ok(self.sign * evaluate_direct(&build_graph(self.spec)?, &self.filters, &sub)?)
    }
}

/// Drop dictator layers, tracking the position shift they induce and the sign
/// of anti-filters.
///
/// A dictator layer copies a shifted version of the layer below; shifts commute
/// with translation-invariant majority layers and add up, so the network equals
/// a shorter all-majority network on a window of the input. On a cycle the shift
/// is a rotation, which the top-layer majority ignores.
pub fn collapse_dictators(filters: &[Filter], spec: ConvGraphSpec) -> Result<Collapsed> {
    if spec.k != 1 || spec.s != 1 {
        return Err(Error::Unsupported("dictator collapse is defined for k = 1, stride 1".into()));
    }
    let graph = build_graph(spec)?;
    check_filters(&graph, filters)?;
    let mut sign = 1i8;
    let mut shift = 0usize;
    let mut kept = Vec::new();
    for f in filters {
        match f.kind()? {
            FilterKind::Majority => kept.push(Filter::Majority),
            FilterKind::AntiMajority => {
                sign = -sign;
                kept.push(Filter::Majority);
            }
            FilterKind::Dictator(q) => shift += q,
            FilterKind::AntiDictator(q) => {
                sign = -sign;
                shift += q;
            }
            FilterKind::Other => {
                return Err(Error::Unsupported("filter is not a (anti-)majority or (anti-)dictator".into()));
            }
        }
    }
    let m = kept.len();
    let (spec, support) = match spec.topology {
        Topology::Line => (ConvGraphSpec::line(1, 1, m), shift..shift + 2 * m + 1),
        Topology::Cycle { n } => (ConvGraphSpec::cycle(1, n, m), 0..n),
    };
    Ok(Collapsed { filters: kept, spec, support, sign })
}

/// One synchronous step of cyclic (2k+1)-majority.
pub fn cycle_step(omega: &BitVector, k: usize) -> Result<BitVector> {
    let n = omega.len();
    if n.is_multiple_of(2) {
        return Err(invalid(format!("cycle length must be odd, got {n}")));
    }
    if k == 0 || 2 * k + 1 > n {
        return Err(invalid("need 1 <= k and 2k + 1 <= n"));
    }
    let x = omega.as_slice();
    let out = (0..n)
        .map(|i| {
            let s: i32 = (0..=2 * k).map(|j| x[(i + n + j - k) % n] as i32).sum();
            if s > 0 {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(BitVector::from_vec_unchecked(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreezeResult {
    /// First t with ω_{t+1} = ω_t; `None` if not reached within `t_max`.
    pub frozen_at: Option<usize>,
    pub frozen_state: BitVector,
    /// Run-length prediction of the freezing time (k = 1 only).
    pub d_bar: Option<usize>,
}

/// Freezing-time prediction for 3-majority on an odd cycle.
///
/// A position with an equal neighbour never changes. Every maximal cyclic run
/// of the remaining (alternating) positions loses one position at each end per
/// step, so the dynamics stop after max ⌈L/2⌉ steps over runs of length L.
pub fn freeze_bound(omega: &BitVector) -> usize {
    let x = omega.as_slice();
    let n = x.len();
    let stable: Vec<bool> = (0..n).map(|i| x[i] == x[(i + n - 1) % n] || x[i] == x[(i + 1) % n]).collect();
    let Some(start) = stable.iter().position(|&s| s) else {
        // No stable positions (impossible on an odd cycle).
        return n.div_ceil(2);
    };
    let mut best = 0;
    let mut run = 0usize;
    for off in 1..=n {
        let i = (start + off) % n;
        if stable[i] {
            best = best.max(run.div_ceil(2));
            run = 0;
        } else {
            run += 1;
        }
    }
    best
}

pub fn freeze_analysis(omega: &BitVector, k: usize, t_max: usize) -> Result<FreezeResult> {
    let mut cur = omega.clone();
    let d_bar = (k == 1).then(|| freeze_bound(omega));
    for t in 0..=t_max {
        let next = cycle_step(&cur, k)?;
        if next == cur {
            // A fixed point stays fixed.
            debug_assert_eq!(cycle_step(&next, k)?, next);
            if let Some(d) = d_bar {
                if t > d {
                    return Err(Error::Numeric(format!("froze at {t}, after the bound {d}")));
                }
            }
            return Ok(FreezeResult { frozen_at: Some(t), frozen_state: cur, d_bar });
        }
        cur = next;
    }
    Ok(FreezeResult { frozen_at: None, frozen_state: cur, d_bar })
}

/// Descendant and ancestor sets of one node, indexed by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Ancestry {
    /// `descendants[t]` for t below the node's layer (empty elsewhere).
    pub descendants: Vec<BTreeSet<usize>>,
    /// `ancestors[t]` for t above the node's layer (empty elsewhere).
    pub ancestors: Vec<BTreeSet<usize>>,
    /// Ancestors together with the nodes next to them in the same layer.
    pub ancestors_plus: Vec<BTreeSet<usize>>,
}

pub fn ancestor_descendant(graph: &ConvGraph, layer: usize, node: usize) -> Result<Ancestry> {
    graph.check_node(layer, node)?;
    let layers = graph.depth() + 1;
    let mut descendants = vec![BTreeSet::new(); layers];
    let mut cur: BTreeSet<usize> = [node].into();
    for t in (1..=layer).rev() {
        cur = cur.iter().flat_map(|&p| graph.children(t, p)).collect();
        descendants[t - 1] = cur.clone();
    }
    let ancestors = run_ancestors(graph, layer, node..node + 1)?;
    let ancestors_plus = ancestors
        .iter()
        .enumerate()
        .map(|(t, set)| {
            let w = graph.width(t);
            let mut out = set.clone();
            for &p in set {
                match graph.spec.topology {
                    Topology::Line => {
                        if p > 0 {
                            out.insert(p - 1);
                        }
                        if p + 1 < w {
                            out.insert(p + 1);
                        }
                    }
                    Topology::Cycle { .. } => {
                        out.insert((p + w - 1) % w);
                        out.insert((p + 1) % w);
                    }
                }
            }
            out
        })
        .collect();
    Ok(Ancestry { descendants, ancestors, ancestors_plus })
}

/// A_{t,S}: the nodes of each layer t above `layer` having a descendant in the run S.
pub fn run_ancestors(graph: &ConvGraph, layer: usize, run: Range<usize>) -> Result<Vec<BTreeSet<usize>>> {
    if run.is_empty() {
        return Err(invalid("empty run"));
    }
    graph.check_node(layer, run.end - 1)?;
    let mut out = vec![BTreeSet::new(); graph.depth() + 1];
    let mut cur: BTreeSet<usize> = run.collect();
    for t in layer..graph.depth() {
        cur = cur.iter().flat_map(|&p| graph.parents(t, p)).collect();
        out[t + 1] = cur.clone();
    }
    Ok(out)
}
