//! Label-order optimization: exhaustive search for small graphs and
//! multi-start simulated annealing with incremental evaluation.

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{objective, Aggregator, CostComponents};
use crate::error::{Error, Result};
use crate::graphs::{EdgeAttrs, HamiltonianGraph, Ordering};

/// Largest vertex count accepted by [`brute_force`].
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Objective value with the number of contributions attaining it. Under the
/// total aggregator `ties` is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Score {
    pub value: u32,
    pub ties: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Neighborhood {
    PairSwap,
    PairSwapAndReversal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Lowest value, then lowest restart index.
    RestartIndex,
    /// Lowest value, then lexicographically smallest position vector.
    Lexicographic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    pub seed: u64,
    pub restarts: usize,
    /// Wall-clock budget per restart, in seconds.
    pub time_limit: Option<f64>,
    /// Annealing proposals per restart; `None` scales with the vertex count.
    pub iterations: Option<u64>,
    /// `None` calibrates from sampled uphill moves.
    pub initial_temperature: Option<f64>,
    pub cooling_rate: f64,
    pub neighborhood: Neighborhood,
    pub tie_break: TieBreak,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 8,
            time_limit: None,
            iterations: None,
            initial_temperature: None,
            cooling_rate: 0.95,
            neighborhood: Neighborhood::PairSwapAndReversal,
            tie_break: TieBreak::RestartIndex,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cooling rate must lie in (0, 1), got {}",
                self.cooling_rate
            )));
        }
        if let Some(t) = self.time_limit {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidArgument(format!("bad time limit {t}")));
            }
        }
        if let Some(t) = self.initial_temperature {
            if !t.is_finite() || t <= 0.0 {
                return Err(Error::InvalidArgument(format!("bad initial temperature {t}")));
            }
        }
        Ok(())
    }

    pub(crate) fn iterations_for(&self, n: usize) -> u64 {
        self.iterations.unwrap_or(4000 * n as u64 + 20_000)
    }

    pub(crate) fn budget(&self) -> Option<Duration> {
        self.time_limit.map(Duration::from_secs_f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderResult {
    pub order: Ordering,
    pub value: u32,
    pub proven_optimal: bool,
    /// Proposals evaluated, summed over restarts.
    pub iterations: u64,
    pub elapsed: Duration,
    pub timed_out: bool,
    /// `(iteration, best value so far)` of the winning restart.
    pub trace: Vec<(u64, u32)>,
}

/// Cost data laid out for fast incremental evaluation.
#[derive(Debug, Clone)]
pub struct OrderInstance {
    n: usize,
    aggregator: Aggregator,
    /// One flattened `n x n` edge-cost table per distinct edge attribute set.
    tables: Vec<Vec<u32>>,
    edges: Vec<(usize, usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
    num: Vec<u32>,
    number: Vec<bool>,
    max_value: u32,
    contributions: u32,
    bfs: Ordering,
}

impl OrderInstance {
    pub fn new(cc: &CostComponents, graph: &HamiltonianGraph) -> Result<Self> {
        let n = graph.n();
        if cc.n() != n {
            return Err(Error::DimensionMismatch {
                context: "cost matrices vs graph vertices",
                expected: n,
                found: cc.n(),
            });
        }
        let mut classes: HashMap<EdgeAttrs, usize> = HashMap::new();
        let mut tables = Vec::new();
        let mut edges = Vec::with_capacity(graph.edge_count());
        let mut adjacency = vec![Vec::new(); n];
        for e in graph.edges() {
            let class = match classes.get(&e.attrs) {
                Some(&c) => c,
                None => {
                    let mut table = vec![0; n * n];
                    for i in 0..n {
                        for j in 0..n {
                            if i != j {
                                table[i * n + j] = cc.edge_cost(i, j, &e.attrs)?;
                            }
                        }
                    }
                    tables.push(table);
                    classes.insert(e.attrs, tables.len() - 1);
                    tables.len() - 1
                }
            };
            edges.push((e.u, e.v, class));
            adjacency[e.u].push((e.v, class));
            adjacency[e.v].push((e.u, class));
        }
        let num: Vec<u32> = (0..n).map(|i| cc.num(i)).collect();
        let number = graph.number_terms().to_vec();
        let max_value = tables
            .iter()
            .flat_map(|t| t.iter().copied())
            .chain(num.iter().copied())
            .max()
            .unwrap_or(0);
        let contributions = (edges.len() + number.iter().filter(|&&b| b).count()) as u32;
        Ok(Self {
            n,
            aggregator: cc.aggregator(),
            tables,
            edges,
            adjacency,
            num,
            number,
            max_value,
            contributions,
            bfs: bfs_order(graph),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn edge_value(&self, class: usize, i: usize, j: usize) -> u32 {
        self.tables[class][i * self.n + j]
    }

    /// Full evaluation of a position vector (`positions[v]` = mode of `v`).
    pub fn evaluate(&self, positions: &[usize]) -> Score {
        let edge_values = self
            .edges
            .iter()
            .map(|&(u, v, c)| self.edge_value(c, positions[u], positions[v]));
        let num_values = (0..self.n).filter(|&v| self.number[v]).map(|v| self.num[positions[v]]);
        let values = edge_values.chain(num_values);
        match self.aggregator {
            Aggregator::Sum => Score {
                value: values.sum(),
                ties: 0,
            },
            Aggregator::Max => values.fold(Score { value: 0, ties: 0 }, |s, x| {
                if x > s.value {
                    Score { value: x, ties: 1 }
                } else if x == s.value {
                    Score { ties: s.ties + 1, ..s }
                } else {
                    s
                }
            }),
        }
    }

    /// Scalar energy with ties folded in below one unit of value.
    fn energy(&self, s: Score) -> f64 {
        s.value as f64 + s.ties as f64 / (self.contributions as f64 + 1.0)
    }
}

/// A mutable ordering with incremental score maintenance.
#[derive(Debug, Clone)]
pub struct OrderState<'a> {
    inst: &'a OrderInstance,
    pos: Vec<usize>,
    at: Vec<usize>,
    total: i64,
    histogram: Vec<u32>,
    // Scratch buffers reused by move evaluation.
    old_values: Vec<u32>,
    new_values: Vec<u32>,
    in_segment: Vec<bool>,
}

impl<'a> OrderState<'a> {
    pub fn new(inst: &'a OrderInstance, order: &Ordering) -> Result<Self> {
        if order.len() != inst.n {
            return Err(Error::NonBijectiveOrder {
                n: inst.n,
                reason: format!("ordering has length {}", order.len()),
            });
        }
        let pos = order.positions().to_vec();
        let at = order.sequence().to_vec();
        let mut state = Self {
            inst,
            pos,
            at,
            total: 0,
            histogram: Vec::new(),
            old_values: Vec::new(),
            new_values: Vec::new(),
            in_segment: vec![false; inst.n],
        };
        state.rebuild();
        Ok(state)
    }

    fn rebuild(&mut self) {
        let inst = self.inst;
        self.total = 0;
        if inst.aggregator == Aggregator::Max {
            self.histogram = vec![0; inst.max_value as usize + 1];
        }
        for &(u, v, c) in &inst.edges {
            let x = inst.edge_value(c, self.pos[u], self.pos[v]);
            self.record(x, 1);
        }
        for v in 0..inst.n {
            if inst.number[v] {
                let x = inst.num[self.pos[v]];
                self.record(x, 1);
            }
        }
    }

    #[inline]
    fn record(&mut self, x: u32, sign: i64) {
        self.total += sign * x as i64;
        if let Some(h) = self.histogram.get_mut(x as usize) {
            if sign > 0 {
                *h += 1;
            } else {
                *h -= 1;
            }
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.pos
    }

    pub fn order(&self) -> Ordering {
        Ordering::new(self.pos.clone()).expect("state keeps a bijection")
    }

    pub fn score(&self) -> Score {
        match self.inst.aggregator {
            Aggregator::Sum => Score {
                value: self.total as u32,
                ties: 0,
            },
            Aggregator::Max => self
                .histogram
                .iter()
                .enumerate()
                .rev()
                .find(|(_, &c)| c > 0)
                .map(|(v, &c)| Score {
                    value: v as u32,
                    ties: c,
                })
                .unwrap_or(Score { value: 0, ties: 0 }),
        }
    }

    /// Fills the scratch buffers with the contributions that change when the
    /// vertices at positions `p` and `q` trade places.
    fn collect_swap(&mut self, p: usize, q: usize) {
        let inst = self.inst;
        self.old_values.clear();
        self.new_values.clear();
        let (a, b) = (self.at[p], self.at[q]);
        let moved = |v: usize, pos: &[usize]| {
            if v == a {
                q
            } else if v == b {
                p
            } else {
                pos[v]
            }
        };
        for (v, other) in [(a, b), (b, a)] {
            for &(w, c) in &inst.adjacency[v] {
                if w == other {
                    continue;
                }
                self.old_values.push(inst.edge_value(c, self.pos[v], self.pos[w]));
                self.new_values
                    .push(inst.edge_value(c, moved(v, &self.pos), moved(w, &self.pos)));
            }
        }
        if inst.number[a] != inst.number[b] {
            let (flagged_old, flagged_new) = if inst.number[a] { (p, q) } else { (q, p) };
            self.old_values.push(inst.num[flagged_old]);
            self.new_values.push(inst.num[flagged_new]);
        }
    }

    /// Same as [`Self::collect_swap`] for reversing positions `p..=q`.
    fn collect_reversal(&mut self, p: usize, q: usize) {
        let inst = self.inst;
        self.old_values.clear();
        self.new_values.clear();
        for k in p..=q {
            self.in_segment[self.at[k]] = true;
        }
        let new_pos = |v: usize, pos: &[usize], seg: &[bool]| {
            if seg[v] {
                p + q - pos[v]
            } else {
                pos[v]
            }
        };
        for k in p..=q {
            let v = self.at[k];
            for &(w, c) in &inst.adjacency[v] {
                if self.in_segment[w] && w < v {
                    continue;
                }
                self.old_values.push(inst.edge_value(c, self.pos[v], self.pos[w]));
                self.new_values.push(inst.edge_value(
                    c,
                    new_pos(v, &self.pos, &self.in_segment),
                    new_pos(w, &self.pos, &self.in_segment),
                ));
            }
            if inst.number[v] {
                self.old_values.push(inst.num[k]);
                self.new_values.push(inst.num[p + q - k]);
            }
        }
        for k in p..=q {
            self.in_segment[self.at[k]] = false;
        }
    }

    fn pending_score(&mut self) -> Score {
        match self.inst.aggregator {
            Aggregator::Sum => {
                let delta: i64 = self.new_values.iter().map(|&x| x as i64).sum::<i64>()
                    - self.old_values.iter().map(|&x| x as i64).sum::<i64>();
                Score {
                    value: (self.total + delta) as u32,
                    ties: 0,
                }
            }
            Aggregator::Max => {
                let (old, new) = (
                    std::mem::take(&mut self.old_values),
                    std::mem::take(&mut self.new_values),
                );
                for &x in &old {
                    self.histogram[x as usize] -= 1;
                }
                for &x in &new {
                    self.histogram[x as usize] += 1;
                }
                let s = self.score();
                for &x in &new {
                    self.histogram[x as usize] -= 1;
                }
                for &x in &old {
                    self.histogram[x as usize] += 1;
                }
                self.old_values = old;
                self.new_values = new;
                s
            }
        }
    }

    fn commit_pending(&mut self) {
        let (old, new) = (
            std::mem::take(&mut self.old_values),
            std::mem::take(&mut self.new_values),
        );
        for &x in &old {
            self.record(x, -1);
        }
        for &x in &new {
            self.record(x, 1);
        }
        self.old_values = old;
        self.new_values = new;
    }

    /// Change in the total objective if positions `p` and `q` are swapped.
    /// Only meaningful under the total aggregator.
    pub fn swap_delta(&mut self, p: usize, q: usize) -> i64 {
        self.collect_swap(p, q);
        self.new_values.iter().map(|&x| x as i64).sum::<i64>() - self.old_values.iter().map(|&x| x as i64).sum::<i64>()
    }

    /// Score after swapping positions `p` and `q`, without applying it.
    pub fn swap_score(&mut self, p: usize, q: usize) -> Score {
        self.collect_swap(p, q);
        self.pending_score()
    }

    /// Score after reversing positions `p..=q`, without applying it.
    pub fn reversal_score(&mut self, p: usize, q: usize) -> Score {
        self.collect_reversal(p.min(q), p.max(q));
        self.pending_score()
    }

    pub fn apply_swap(&mut self, p: usize, q: usize) {
        self.collect_swap(p, q);
        self.commit_pending();
        let (a, b) = (self.at[p], self.at[q]);
        self.at.swap(p, q);
        self.pos[a] = q;
        self.pos[b] = p;
    }

    pub fn apply_reversal(&mut self, p: usize, q: usize) {
        let (p, q) = (p.min(q), p.max(q));
        self.collect_reversal(p, q);
        self.commit_pending();
        self.at[p..=q].reverse();
        for k in p..=q {
            self.pos[self.at[k]] = k;
        }
    }
}

fn check_size(graph: &HamiltonianGraph, cc: &CostComponents) -> Result<()> {
    if cc.n() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "cost matrices vs graph vertices",
            expected: graph.n(),
            found: cc.n(),
        });
    }
    Ok(())
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = a.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = a.iter().rposition(|&x| x > a[i]).expect("pivot has a successor");
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

/// Exact minimizer over all `n!` orderings; ties go to the lexicographically
/// smallest position vector.
pub fn brute_force(cc: &CostComponents, graph: &HamiltonianGraph) -> Result<OrderResult> {
    check_size(graph, cc)?;
    let n = graph.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::ProblemTooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let start = Instant::now();
    let inst = OrderInstance::new(cc, graph)?;
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut best = (inst.evaluate(&sigma).value, sigma.clone());
    let mut count = 1;
    while next_permutation(&mut sigma) {
        count += 1;
        let v = inst.evaluate(&sigma).value;
        if v < best.0 {
            best = (v, sigma.clone());
        }
    }
    let order = Ordering::new(best.1)?;
    Ok(OrderResult {
        value: objective(cc, graph, &order)?,
        order,
        proven_optimal: true,
        iterations: count,
        elapsed: start.elapsed(),
        timed_out: false,
        trace: Vec::new(),
    })
}

/// Breadth-first order from a pseudo-peripheral vertex, visiting neighbours
/// by increasing degree, one component at a time.
pub fn bfs_order(graph: &HamiltonianGraph) -> Ordering {
    let n = graph.n();
    let adj = graph.adjacency();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let bfs = |root: usize, seen: &mut Vec<bool>| -> Vec<usize> {
        let mut out = vec![root];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                seen[w] = true;
                out.push(w);
                queue.push_back(w);
            }
        }
        out
    };
    let mut placed = vec![false; n];
    let mut sequence = Vec::with_capacity(n);
    for start in 0..n {
        if placed[start] {
            continue;
        }
        // Walk to a pseudo-peripheral vertex of this component.
        let mut root = start;
        let mut ecc = 0;
        loop {
            let mut seen = placed.clone();
            let level_order = bfs(root, &mut seen);
            let dist = distances(&adj, root);
            let far = dist[*level_order.last().expect("root is visited")];
            let candidate = level_order
                .iter()
                .copied()
                .filter(|&v| dist[v] == far)
                .min_by_key(|&v| (degree[v], v))
                .expect("non-empty level");
            if far <= ecc || candidate == root {
                break;
            }
            ecc = far;
            root = candidate;
        }
        sequence.extend(bfs(root, &mut placed));
    }
    Ordering::from_sequence(sequence).expect("BFS visits every vertex once")
}

fn distances(adj: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

fn random_order(n: usize, rng: &mut ChaCha8Rng) -> Ordering {
    use rand::seq::SliceRandom;
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    Ordering::new(sigma).expect("shuffle is a permutation")
}

struct RestartOutcome {
    score: Score,
    positions: Vec<usize>,
    iterations: u64,
    timed_out: bool,
    trace: Vec<(u64, u32)>,
}

/// Mean uphill energy change over a sample of random swaps.
fn calibrate_temperature(state: &mut OrderState, rng: &mut ChaCha8Rng) -> f64 {
    let n = state.inst.n;
    let base = state.inst.energy(state.score());
    let (mut sum, mut count) = (0.0, 0);
    for _ in 0..200 {
        let p = rng.gen_range(0..n);
        let q = rng.gen_range(0..n);
        if p == q {
            continue;
        }
        let d = state.inst.energy(state.swap_score(p, q)) - base;
        if d > 0.0 {
            sum += d;
            count += 1;
        }
    }
    if count == 0 {
        1.0
    } else {
        sum / count as f64
    }
}

fn run_restart(inst: &OrderInstance, params: &SearchParams, index: usize, deadline: Option<Instant>) -> RestartOutcome {
    let n = inst.n;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(index as u64));
    let start = match index {
        0 => Ordering::identity(n),
        1 => greedy_start(inst),
        _ => random_order(n, &mut rng),
    };
    let mut state = OrderState::new(inst, &start).expect("restart order has the right length");
    let mut best = state.score();
    let mut best_pos = state.positions().to_vec();
    let mut trace = vec![(0, best.value)];
    let mut iterations = 0u64;
    let mut timed_out = false;

    if n >= 2 {
        let total = params.iterations_for(n);
        let t0 = params
            .initial_temperature
            .unwrap_or_else(|| calibrate_temperature(&mut state, &mut rng));
        // Cool geometrically from t0 down to t0 / 1000 over the budget.
        let levels = ((1e-3f64).ln() / params.cooling_rate.ln()).ceil().max(1.0) as u64;
        let per_level = (total / levels).max(1);
        let mut temperature = t0;
        let mut energy = inst.energy(state.score());
        while iterations < total {
            if iterations.is_multiple_of(1024) && deadline.is_some_and(|d| Instant::now() >= d) {
                timed_out = true;
                break;
            }
            iterations += 1;
            if iterations.is_multiple_of(per_level) {
                temperature *= params.cooling_rate;
            }
            let p = rng.gen_range(0..n);
            let mut q = rng.gen_range(0..n - 1);
            if q >= p {
                q += 1;
            }
            let reversal = params.neighborhood == Neighborhood::PairSwapAndReversal && rng.gen_bool(0.5);
            let proposed = if reversal {
                state.reversal_score(p, q)
            } else {
                state.swap_score(p, q)
            };
            let e = inst.energy(proposed);
            let accept = e <= energy || rng.gen::<f64>() < ((energy - e) / temperature).exp();
            if !accept {
                continue;
            }
            if reversal {
                state.apply_reversal(p, q);
            } else {
                state.apply_swap(p, q);
            }
            energy = e;
            if proposed < best {
                best = proposed;
                best_pos.copy_from_slice(state.positions());
                if trace.last().is_some_and(|&(_, v)| v > best.value) {
                    trace.push((iterations, best.value));
                }
            }
        }
        // Polish the best state with first-improvement swap descent.
        let best_order = Ordering::new(best_pos.clone()).expect("stored best is a bijection");
        state = OrderState::new(inst, &best_order).expect("same length");
        let mut improved = true;
        while improved && !timed_out {
            improved = false;
            for p in 0..n {
                for q in p + 1..n {
                    if state.swap_score(p, q) < best {
                        state.apply_swap(p, q);
                        best = state.score();
                        improved = true;
                    }
                }
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                timed_out = true;
            }
        }
        best_pos.copy_from_slice(state.positions());
        if trace.last().is_some_and(|&(_, v)| v > best.value) {
            trace.push((iterations, best.value));
        }
    }
    RestartOutcome {
        score: best,
        positions: best_pos,
        iterations,
        timed_out,
        trace,
    }
}

/// The better of the identity and BFS orders.
fn greedy_start(inst: &OrderInstance) -> Ordering {
    greedy_candidates(inst)
        .into_iter()
        .min_by_key(|(s, _)| *s)
        .map(|(_, o)| o)
        .expect("two candidates")
}

fn greedy_candidates(inst: &OrderInstance) -> Vec<(Score, Ordering)> {
    [Ordering::identity(inst.n), inst.bfs.clone()]
        .into_iter()
        .map(|o| (inst.evaluate(o.positions()), o))
        .collect()
}

/// Multi-start annealing over label orders.
pub fn optimize_order(cc: &CostComponents, graph: &HamiltonianGraph, params: &SearchParams) -> Result<OrderResult> {
    check_size(graph, cc)?;
    params.validate()?;
    let start = Instant::now();
    let inst = OrderInstance::new(cc, graph)?;
    let n = graph.n();

    if params.time_limit == Some(0.0) {
        let order = greedy_start(&inst);
        return Ok(OrderResult {
            value: objective(cc, graph, &order)?,
            order,
            proven_optimal: n == 1,
            iterations: 0,
            elapsed: start.elapsed(),
            timed_out: true,
            trace: Vec::new(),
        });
    }

    let deadline = params.budget().map(|b| start + b);
    let outcomes: Vec<RestartOutcome> = (0..params.restarts)
        .into_par_iter()
        .map(|r| run_restart(&inst, params, r, deadline))
        .collect();
    let winner = outcomes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.score.value.cmp(&b.score.value).then_with(|| match params.tie_break {
                TieBreak::RestartIndex => i.cmp(j),
                TieBreak::Lexicographic => a.positions.cmp(&b.positions),
            })
        })
        .map(|(_, o)| o)
        .expect("at least one restart");
    let order = Ordering::new(winner.positions.clone())?;
    let value = objective(cc, graph, &order)?;
    debug_assert_eq!(value, winner.score.value, "incremental score drifted");
    Ok(OrderResult {
        order,
        value,
        proven_optimal: n == 1,
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        elapsed: start.elapsed(),
        timed_out: outcomes.iter().any(|o| o.timed_out),
        trace: winner.trace.clone(),
    })
}

/// Minimum-linear-arrangement band order for a `rows x cols` grid with vertex
/// `r * cols + c`: the top `k1` rows are numbered column by column, the middle
/// rows row by row and the bottom `k2` rows column by column. Returns the best
/// `(k1, k2)` by total edge span.
pub fn mitchison_durbin_order(rows: usize, cols: usize) -> Result<Ordering> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid dimensions must be positive, got {rows}x{cols}"
        )));
    }
    let span = |seq: &[usize]| -> usize {
        let mut pos = vec![0; seq.len()];
        for (p, &v) in seq.iter().enumerate() {
            pos[v] = p;
        }
        let mut total = 0;
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    total += pos[v].abs_diff(pos[v + 1]);
                }
                if r + 1 < rows {
                    total += pos[v].abs_diff(pos[v + cols]);
                }
            }
        }
        total
    };
    let mut best: Option<(usize, Vec<usize>)> = None;
    for top in 0..=rows {
        for bottom in 0..=rows - top {
            let mut seq = Vec::with_capacity(rows * cols);
            for c in 0..cols {
                seq.extend((0..top).map(|r| r * cols + c));
            }
            for r in top..rows - bottom {
                seq.extend((0..cols).map(|c| r * cols + c));
            }
            for c in 0..cols {
                seq.extend((rows - bottom..rows).map(|r| r * cols + c));
            }
            let s = span(&seq);
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                best = Some((s, seq));
            }
        }
    }
    Ordering::from_sequence(best.expect("at least one band split").1)
}
