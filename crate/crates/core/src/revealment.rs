//! A forgetful randomized query algorithm for stride-2 iterated 3-majority
//! and Monte Carlo estimates of its revealment.
//!
//! The graph is cut into blocks of three layers. The top node of a block reads
//! 15 nodes three layers down. To evaluate a block's top node the algorithm
//! visits those 15 nodes in a uniformly random order and evaluates a node
//! (recursively, starting from scratch) only if its value can still change the
//! block's output given what this evaluation has learned so far. Layers below
//! the lowest full block (depth mod 3 of them) form the base: a base node is
//! evaluated by reading every input bit under it.

use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::bits::{sample_uniform_with, BitVector};
use crate::conv::{build_graph, classify_filter, line_width, ConvGraph, ConvGraphSpec, Filter, FilterKind, Topology};
use crate::error::{check_len, invalid, Error, Result};
use crate::seed::{SeedStream, StreamRng};
use crate::stats::{binomial_se, EstimateRecord};

const LEAVES: usize = 15;
const STATES: usize = 14_348_907; // 3^15

/// The proven per-block decay constant 1 − 1/(36·C(15,4)²·2^18).
pub fn decay_constant() -> f64 {
    let c15_4 = 1365.0f64;
    1.0 - 1.0 / (36.0 * c15_4 * c15_4 * 2f64.powi(18))
}

/// Output of a 3-layer block of k = 1, stride-2 filters as a function of its 15 leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct BlockTable {
    /// Bit `mask` is set iff the block outputs +1 when leaf j is +1 exactly for bits j of `mask`.
    bits: Vec<u64>,
}

impl BlockTable {
    fn new(filters: &[Filter]) -> Self {
        let mut bits = vec![0u64; (1 << LEAVES) / 64];
        let mut x = [0i8; LEAVES];
        for mask in 0..1usize << LEAVES {
            for (j, b) in x.iter_mut().enumerate() {
                *b = if mask >> j & 1 == 1 { 1 } else { -1 };
            }
            let l1: Vec<i8> = (0..7).map(|q| filters[0].apply(&x[2 * q..2 * q + 3])).collect();
            let l2: Vec<i8> = (0..3).map(|q| filters[1].apply(&l1[2 * q..2 * q + 3])).collect();
            if filters[2].apply(&l2) == 1 {
                bits[mask / 64] |= 1 << (mask % 64);
            }
        }
        Self { bits }
    }

    #[inline]
    fn eval(&self, mask: usize) -> i8 {
        if self.bits[mask / 64] >> (mask % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }
}

/// For every partial assignment of the 15 leaves (base-3 digits: 0 → −1,
/// 1 → +1, 2 → unknown), the set of unknown leaves that can still change
/// the output under some completion of the other unknowns.
struct RelevanceTable {
    truth: BlockTable,
    rel: Vec<u16>,
}

const POW3: [usize; LEAVES] = {
    let mut p = [1usize; LEAVES];
    let mut i = 1;
    while i < LEAVES {
        p[i] = p[i - 1] * 3;
        i += 1;
    }
    p
};

impl RelevanceTable {
    fn build(truth: BlockTable) -> Self {
        let mut rel = vec![0u16; STATES];
        let mut digits = [0u8; LEAVES];
        for s in 0..STATES {
            let mut first = usize::MAX;
            let mut second = usize::MAX;
            for (j, &d) in digits.iter().enumerate() {
                if d == 2 {
                    if first == usize::MAX {
                        first = j;
                    } else {
                        second = j;
                        break;
                    }
                }
            }
            rel[s] = if first == usize::MAX {
                0
            } else if second == usize::MAX {
                let mask: usize = digits.iter().enumerate().filter(|(_, &d)| d == 1).map(|(j, _)| 1 << j).sum();
                if truth.eval(mask) != truth.eval(mask | 1 << first) {
                    1 << first
                } else {
                    0
                }
            } else {
                // Split on the first unknown for the others, on the second for the first.
                // Both substates have smaller indices, so they are already filled in.
                let b1 = 1u16 << first;
                let others = (rel[s - 2 * POW3[first]] | rel[s - POW3[first]]) & !b1;
                let own = (rel[s - 2 * POW3[second]] | rel[s - POW3[second]]) & b1;
                others | own
            };
            for d in digits.iter_mut() {
                if *d == 2 {
                    *d = 0;
                } else {
                    *d += 1;
                    break;
                }
            }
        }
        Self { truth, rel }
    }
}

fn relevance_table(filters: &[Filter]) -> Arc<RelevanceTable> {
    static CACHE: OnceLock<Mutex<Vec<Arc<RelevanceTable>>>> = OnceLock::new();
    const KEEP: usize = 6;
    let truth = BlockTable::new(filters);
    // Relevance is unchanged by negating the output; share tables across that.
    let negated = BlockTable { bits: truth.bits.iter().map(|w| !w).collect() };
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    {
        let guard = cache.lock().unwrap();
        if let Some(t) = guard.iter().find(|t| t.truth == truth) {
            return t.clone();
        }
        if let Some(t) = guard.iter().find(|t| t.truth == negated) {
            // Same relevance, opposite truth table.
            return Arc::new(RelevanceTable { truth, rel: t.rel.clone() });
        }
    }
    let table = Arc::new(RelevanceTable::build(truth));
    let mut guard = cache.lock().unwrap();
    if guard.len() >= KEEP {
        guard.remove(0);
    }
    guard.push(table.clone());
    table
}

/// Bottom-layer bits read by one run, in first-read order, without repeats.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryLog {
    pub queried: Vec<usize>,
}

impl QueryLog {
    pub fn len(&self) -> usize {
        self.queried.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queried.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRun {
    pub output: i8,
    pub log: QueryLog,
    pub randomness: SeedStream,
}

/// The algorithm prepared for one graph and filter stack.
pub struct QueryAlgorithm {
    graph: ConvGraph,
    filters: Vec<Filter>,
    base: usize,
    blocks: Vec<Arc<RelevanceTable>>,
}

impl std::fmt::Debug for QueryAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QueryAlgorithm")
            .field("spec", &self.graph.spec())
            .field("base", &self.base)
            .field("blocks", &self.blocks.len())
            .finish()
    }
}

struct RunState<'a> {
    omega: &'a [i8],
    seen: Vec<bool>,
    log: Vec<usize>,
    rng: StreamRng,
}

impl RunState<'_> {
    #[inline]
    fn read(&mut self, i: usize) -> i8 {
        if !self.seen[i] {
            self.seen[i] = true;
            self.log.push(i);
        }
        self.omega[i]
    }
}

impl QueryAlgorithm {
    pub fn new(graph: &ConvGraph, filters: &[Filter]) -> Result<Self> {
        let spec = graph.spec();
        if spec.k != 1 || spec.s != 2 || spec.topology != Topology::Line {
            return Err(Error::Unsupported("query algorithm needs a k = 1, stride-2 line graph".into()));
        }
        check_len(spec.depth, filters.len())?;
        for f in filters {
            if let Filter::Weighted(w) = f {
                check_len(3, w.len())?;
            }
            if let Filter::Dictator(q) | Filter::AntiDictator(q) = f {
                if *q >= 3 {
                    return Err(invalid("dictator position outside the window"));
                }
            }
        }
        let base = spec.depth % 3;
        let blocks = (0..spec.depth / 3).map(|b| relevance_table(&filters[base + 3 * b..base + 3 * b + 3])).collect();
        Ok(Self { graph: graph.clone(), filters: filters.to_vec(), base, blocks })
    }

    /// All-majority stack.
    pub fn majority(depth: usize) -> Result<Self> {
        let g = build_graph(ConvGraphSpec::line(1, 2, depth))?;
        Self::new(&g, &vec![Filter::Majority; depth])
    }

    pub fn graph(&self) -> &ConvGraph {
        &self.graph
    }

    pub fn run(&self, omega: &BitVector, seed: &SeedStream) -> Result<AlgorithmRun> {
        check_len(self.graph.input_width(), omega.len())?;
        let mut st =
            RunState { omega: omega.as_slice(), seen: vec![false; omega.len()], log: Vec::new(), rng: seed.rng() };
        let output = self.eval(self.blocks.len(), 0, &mut st);
        Ok(AlgorithmRun { output, log: QueryLog { queried: st.log }, randomness: seed.clone() })
    }

    /// Evaluate node `p` of layer `base + 3·level`.
    fn eval(&self, level: usize, p: usize, st: &mut RunState<'_>) -> i8 {
        if level == 0 {
            return self.eval_base(p, st);
        }
        let table = &self.blocks[level - 1];
        let mut order: [usize; LEAVES] = std::array::from_fn(|j| j);
        order.shuffle(&mut st.rng);
        let mut state = STATES - 1;
        let mut mask = 0usize;
        for &j in &order {
            let rel = table.rel[state];
            if rel == 0 {
                break;
            }
            if rel >> j & 1 == 1 {
                if self.eval(level - 1, 8 * p + j, st) == 1 {
                    state -= POW3[j];
                    mask |= 1 << j;
                } else {
                    state -= 2 * POW3[j];
                }
            }
        }
        debug_assert_eq!(table.rel[state], 0);
        table.truth.eval(mask)
    }

    /// A base node reads all input bits below it.
    fn eval_base(&self, p: usize, st: &mut RunState<'_>) -> i8 {
        let r = self.base;
        let width = line_width(1, 2, r);
        let start = p << r;
        let mut x: Vec<i8> = (start..start + width).map(|i| st.read(i)).collect();
        for f in &self.filters[..r] {
            x = (0..(x.len() - 1) / 2).map(|q| f.apply(&x[2 * q..2 * q + 3])).collect();
        }
        x[0]
    }

    /// Number of blocks whose three filters are all (anti-)majorities.
    pub fn majority_blocks(&self) -> usize {
        (0..self.blocks.len())
            .filter(|&b| {
                self.filters[self.base + 3 * b..self.base + 3 * b + 3]
                    .iter()
                    .all(|f| matches!(f.kind(), Ok(FilterKind::Majority | FilterKind::AntiMajority)))
            })
            .count()
    }
}

pub fn run_query_algorithm(graph: &ConvGraph, omega: &BitVector, seed: &SeedStream) -> Result<AlgorithmRun> {
    QueryAlgorithm::new(graph, &vec![Filter::Majority; graph.depth()])?.run(omega, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevealmentEstimate {
    /// Largest per-bit query frequency.
    pub delta_hat: EstimateRecord,
    pub argmax: usize,
    pub frequencies: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub mean_queries: f64,
}

/// Per-bit query counts over `replicas` runs on uniform inputs.
pub fn query_counts(alg: &QueryAlgorithm, replicas: u64, seed: &SeedStream) -> Vec<u64> {
    const CHUNK: u64 = 256;
    let w = alg.graph.input_width();
    let parts: Vec<Vec<u64>> = (0..replicas.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; w];
            for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
                let s = seed.child(r);
                let omega = sample_uniform_with(w, &mut s.child(0).rng());
                let run = alg.run(&omega, &s.child(1)).expect("input width matches");
                for i in run.log.queried {
                    counts[i] += 1;
                }
            }
            counts
        })
        .collect();
    let mut total = vec![0u64; w];
    for p in parts {
        for (t, c) in total.iter_mut().zip(p) {
            *t += c;
        }
    }
    total
}

pub fn estimate_with(alg: &QueryAlgorithm, replicas: u64, seed: &SeedStream) -> Result<RevealmentEstimate> {
    if replicas == 0 {
        return Err(invalid("replicas must be at least 1"));
    }
    let counts = query_counts(alg, replicas, seed);
    let reps = replicas as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / reps).collect();
    let stderrs: Vec<f64> = frequencies.iter().map(|&p| binomial_se(p, replicas)).collect();
    let argmax = frequencies
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mean_queries = counts.iter().sum::<u64>() as f64 / reps;
    Ok(RevealmentEstimate {
        delta_hat: EstimateRecord::new(frequencies[argmax], stderrs[argmax], replicas, seed.clone()),
        argmax,
        frequencies,
        stderrs,
        mean_queries,
    })
}

/// δ̂ for the all-majority stack on `graph`.
pub fn estimate_revealment(graph: &ConvGraph, replicas: u64, seed: &SeedStream) -> Result<RevealmentEstimate> {
    estimate_with(&QueryAlgorithm::new(graph, &vec![Filter::Majority; graph.depth()])?, replicas, seed)
}

/// Law of a random layer filter.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterDistribution {
    /// Draw one of the listed filters with the given (unnormalized) weights.
    Categorical(Vec<(Filter, f64)>),
    /// i.i.d. standard normal weights, reduced to their named kind when they have one.
    Gaussian,
}

impl FilterDistribution {
    /// Majority with probability `p`, otherwise a uniformly chosen dictator.
    pub fn majority_or_dictator(p: f64) -> Self {
        let q = (1.0 - p) / 3.0;
        Self::Categorical(vec![
            (Filter::Majority, p),
            (Filter::Dictator(0), q),
            (Filter::Dictator(1), q),
            (Filter::Dictator(2), q),
        ])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Filter> {
        match self {
            Self::Categorical(items) => {
                let total: f64 = items.iter().map(|(_, w)| *w).sum();
                if items.is_empty() || items.iter().any(|(_, w)| *w < 0.0) || total <= 0.0 {
                    return Err(invalid("categorical filter weights must be non-negative with positive sum"));
                }
                let mut u = rng.random::<f64>() * total;
                for (f, w) in items {
                    if u < *w {
                        return Ok(f.clone());
                    }
                    u -= w;
                }
                Ok(items.last().unwrap().0.clone())
            }
            Self::Gaussian => loop {
                let w: Vec<f64> = (0..3).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
                if let Ok(kind) = classify_filter(&w) {
                    return Ok(match kind {
                        FilterKind::Majority => Filter::Majority,
                        FilterKind::AntiMajority => Filter::AntiMajority,
                        FilterKind::Dictator(q) => Filter::Dictator(q),
                        FilterKind::AntiDictator(q) => Filter::AntiDictator(q),
                        FilterKind::Other => Filter::Weighted(w),
                    });
                }
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomFilterRevealment {
    pub filters: Vec<Filter>,
    /// Blocks of three consecutive (anti-)majority layers.
    pub majority_blocks: usize,
    pub estimate: RevealmentEstimate,
}

/// Draw one filter stack (seed child 0), then estimate δ̂ for it (seed child 1).
pub fn revealment_for_random_filters(
    depth: usize,
    dist: &FilterDistribution,
    replicas: u64,
    seed: &SeedStream,
) -> Result<RandomFilterRevealment> {
    let mut rng = seed.child(0).rng();
    let filters: Vec<Filter> = (0..depth).map(|_| dist.sample(&mut rng)).collect::<Result<_>>()?;
    let graph = build_graph(ConvGraphSpec::line(1, 2, depth))?;
    let alg = QueryAlgorithm::new(&graph, &filters)?;
    let estimate = estimate_with(&alg, replicas, &seed.child(1))?;
    Ok(RandomFilterRevealment { majority_blocks: alg.majority_blocks(), filters, estimate })
}

/// P(every node of `run` in `layer` evaluates to +1) on uniform input.
pub fn run_all_plus_probability(
    graph: &ConvGraph,
    filters: &[Filter],
    layer: usize,
    run: std::ops::Range<usize>,
    samples: u64,
    seed: &SeedStream,
) -> Result<EstimateRecord> {
    if layer > graph.depth() || run.is_empty() || run.end > graph.width(layer) || samples == 0 {
        return Err(invalid("run must be a non-empty range of existing nodes"));
    }
    let w = graph.input_width();
    let mut rng = seed.rng();
    let mut hits = 0u64;
    for _ in 0..samples {
        let omega = sample_uniform_with(w, &mut rng);
        let layers = crate::conv::evaluate_layers(graph, filters, &omega)?;
        if layers[layer][run.clone()].iter().all(|&b| b == 1) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(EstimateRecord::new(p, binomial_se(p, samples), samples, seed.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::{all_majority, evaluate_direct};

    #[test]
    fn decay_constant_value() {
        let c = decay_constant();
        assert!(((1.0 - c) - 5.687e-14).abs() < 0.01e-14, "{}", 1.0 - c);
    }

    #[test]
    fn relevance_of_plain_majority_block() {
        let alg = QueryAlgorithm::majority(3).unwrap();
        let t = &alg.blocks[0];
        // With nothing known every leaf matters.
        assert_eq!(t.rel[STATES - 1], 0x7fff);
        // Known leaves drop out; leaf 2 still feeds the second bottom majority.
        let s = STATES - 1 - POW3[0] - POW3[1];
        assert_eq!(t.rel[s], 0x7ffc);
        // Leaves 0..=4 all +1 decide two bottom majorities but not the root.
        let s = STATES - 1 - POW3[0] - POW3[1] - POW3[2] - POW3[3] - POW3[4];
        assert_eq!(t.rel[s] & 0b11111, 0);
        assert_ne!(t.rel[s], 0);
        // Every leaf +1 but the last few: once the root is decided nothing is relevant.
        let s: usize = (0..11).fold(STATES - 1, |s, j| s - POW3[j]);
        assert_eq!(t.rel[s], 0);
    }

    #[test]
    fn relevance_matches_brute_force() {
        // Leaf j matters iff some completion of the other unknowns makes the output depend on it.
        let filters = [Filter::Majority, Filter::Dictator(2), Filter::Weighted(vec![1.0, -1.0, 1.0])];
        let t = relevance_table(&filters);
        let mut rng = SeedStream::new(12).rng();
        for _ in 0..3000 {
            let unknown_p = rng.random_range(0.2..0.8);
            let mut state = 0usize;
            let mut known = 0usize;
            let mut unknown = Vec::new();
            for j in 0..LEAVES {
                if rng.random::<f64>() < unknown_p {
                    state += 2 * POW3[j];
                    unknown.push(j);
                } else if rng.random::<bool>() {
                    state += POW3[j];
                    known |= 1 << j;
                }
            }
            let mut expect = 0u16;
            for &j in &unknown {
                let others: Vec<usize> = unknown.iter().copied().filter(|&u| u != j).collect();
                let sensitive = (0..1usize << others.len()).any(|c| {
                    let mut m = known;
                    for (b, &u) in others.iter().enumerate() {
                        if c >> b & 1 == 1 {
                            m |= 1 << u;
                        }
                    }
                    t.truth.eval(m) != t.truth.eval(m | 1 << j)
                });
                if sensitive {
                    expect |= 1 << j;
                }
            }
            assert_eq!(t.rel[state], expect, "state {state}");
        }
    }

    #[test]
    fn permutation_independence() {
        // Per-bit query frequencies agree across disjoint seed groups.
        let alg = QueryAlgorithm::majority(3).unwrap();
        let a = estimate_with(&alg, 20_000, &SeedStream::new(13).named("a")).unwrap();
        let b = estimate_with(&alg, 20_000, &SeedStream::new(13).named("b")).unwrap();
        for j in 0..15 {
            let se = a.stderrs[j].hypot(b.stderrs[j]).max(1e-9);
            assert!((a.frequencies[j] - b.frequencies[j]).abs() <= 4.0 * se, "bit {j}");
        }
    }

    #[test]
    fn depth_three_matches_direct_exhaustively() {
        let g = build_graph(ConvGraphSpec::line(1, 2, 3)).unwrap();
        let f = all_majority(3);
        let alg = QueryAlgorithm::new(&g, &f).unwrap();
        let s = SeedStream::new(1);
        for mask in 0..1u64 << 15 {
            let x = BitVector::from_mask(15, mask);
            let run = alg.run(&x, &s.child(mask)).unwrap();
            assert_eq!(run.output, evaluate_direct(&g, &f, &x).unwrap());
            let mut q = run.log.queried.clone();
            q.sort_unstable();
            q.dedup();
            assert_eq!(q.len(), run.log.len());
        }
    }

    #[test]
    fn degenerate_and_constant_inputs() {
        let g0 = build_graph(ConvGraphSpec::line(1, 2, 0)).unwrap();
        let r = run_query_algorithm(&g0, &BitVector::constant(1, -1).unwrap(), &SeedStream::new(2)).unwrap();
        assert_eq!((r.output, r.log.queried.clone()), (-1, vec![0]));
        let e = estimate_revealment(&g0, 10, &SeedStream::new(2)).unwrap();
        assert_eq!(e.delta_hat.value, 1.0);

        let g3 = build_graph(ConvGraphSpec::line(1, 2, 3)).unwrap();
        for s in 0..50 {
            let r = run_query_algorithm(&g3, &BitVector::constant(15, 1).unwrap(), &SeedStream::new(s)).unwrap();
            assert_eq!(r.output, 1);
            assert!(r.log.len() < 15);
        }
    }

    #[test]
    fn residual_depths_are_correct() {
        for depth in [1, 2, 4, 5] {
            let g = build_graph(ConvGraphSpec::line(1, 2, depth)).unwrap();
            let f = all_majority(depth);
            let alg = QueryAlgorithm::new(&g, &f).unwrap();
            let mut rng = SeedStream::new(3).rng();
            for i in 0..2000 {
                let x = sample_uniform_with(g.input_width(), &mut rng);
                let run = alg.run(&x, &SeedStream::new(4).child(i)).unwrap();
                assert_eq!(run.output, evaluate_direct(&g, &f, &x).unwrap());
            }
        }
    }

    #[test]
    fn mixed_filters_are_correct() {
        let dist = FilterDistribution::majority_or_dictator(0.9);
        let mut rng = SeedStream::new(5).rng();
        let f: Vec<Filter> = (0..6).map(|_| dist.sample(&mut rng).unwrap()).collect();
        let g = build_graph(ConvGraphSpec::line(1, 2, 6)).unwrap();
        let alg = QueryAlgorithm::new(&g, &f).unwrap();
        for i in 0..2000 {
            let x = sample_uniform_with(g.input_width(), &mut rng);
            assert_eq!(alg.run(&x, &SeedStream::new(6).child(i)).unwrap().output, evaluate_direct(&g, &f, &x).unwrap());
        }
    }

    #[test]
    fn all_dictator_stack_reads_one_bit() {
        let dist = FilterDistribution::Categorical(vec![(Filter::Dictator(1), 1.0)]);
        let r = revealment_for_random_filters(6, &dist, 200, &SeedStream::new(7)).unwrap();
        assert_eq!(r.majority_blocks, 0);
        assert_eq!(r.estimate.delta_hat.value, 1.0);
        assert_eq!(r.estimate.mean_queries, 1.0);

        let all_maj = FilterDistribution::Categorical(vec![(Filter::Majority, 1.0)]);
        let r = revealment_for_random_filters(6, &all_maj, 500, &SeedStream::new(8)).unwrap();
        assert_eq!(r.majority_blocks, 2);
        let direct =
            estimate_revealment(&build_graph(ConvGraphSpec::line(1, 2, 6)).unwrap(), 500, &SeedStream::new(8).child(1))
                .unwrap();
        assert_eq!(r.estimate.frequencies, direct.frequencies);
    }

    #[test]
    fn gaussian_filters_are_handled() {
        let r = revealment_for_random_filters(3, &FilterDistribution::Gaussian, 300, &SeedStream::new(9)).unwrap();
        assert!(r.estimate.delta_hat.value > 0.0 && r.estimate.delta_hat.value <= 1.0);
    }

    #[test]
    fn rejects_other_shapes() {
        let g = build_graph(ConvGraphSpec::line(1, 1, 3)).unwrap();
        assert!(QueryAlgorithm::new(&g, &all_majority(3)).is_err());
    }
}
