//! Ancilla qubits that cancel `Z` strings of Jordan-Wigner hopping terms.
//!
//! Ancilla `k` owns a subset `I_k` of data qubits. Each hopping term on modes
//! `(i, j)` is multiplied by a per-term operator `kappa` that either applies
//! `Z_{I_k}` with a `Y`/`Z` on the ancilla (option 1) or acts on the ancilla
//! alone (option 2). The subsets are pairwise disjoint.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmat::BitVec;
use crate::encodings::EncodingKind;
use crate::error::{Error, Result};
use crate::graphs::{EdgeAttrs, HamiltonianGraph, Ordering};
use crate::pauli::{HamiltonianTerm, PauliString, QubitHamiltonian, TermOrigin};
use crate::qap::SearchParams;

/// Largest labelling space `(p + 1)^n` accepted by [`brute_force_plan`].
pub const BRUTE_FORCE_MAX_LABELLINGS: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PlanFile", into = "PlanFile")]
pub struct AncillaPlan {
    n: usize,
    subsets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    n: usize,
    subsets: Vec<Vec<usize>>,
}

impl TryFrom<PlanFile> for AncillaPlan {
    type Error = Error;

    fn try_from(f: PlanFile) -> Result<Self> {
        AncillaPlan::new(f.n, f.subsets)
    }
}

impl From<AncillaPlan> for PlanFile {
    fn from(p: AncillaPlan) -> Self {
        PlanFile {
            n: p.n,
            subsets: p.subsets,
        }
    }
}

impl AncillaPlan {
    /// Validates ranges and disjointness, sorts each subset and drops empty
    /// ones.
    pub fn new(n: usize, subsets: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        let mut stored = Vec::with_capacity(subsets.len());
        for (k, mut subset) in subsets.into_iter().enumerate() {
            subset.sort_unstable();
            subset.dedup();
            for &q in &subset {
                if q >= n {
                    return Err(Error::IndexOutOfRange { index: q, bound: n });
                }
                if owner[q] != usize::MAX {
                    return Err(Error::DisjointnessViolation {
                        qubit: q,
                        first: owner[q],
                        second: k,
                    });
                }
                owner[q] = k;
            }
            if !subset.is_empty() {
                stored.push(subset);
            }
        }
        Ok(Self { n, subsets: stored })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, subsets: Vec::new() }
    }

    /// Plan from per-qubit labels, `0` meaning unassigned and `k >= 1`
    /// meaning subset `k - 1`.
    fn from_labels(labels: &[usize], p: usize) -> Self {
        let mut subsets = vec![Vec::new(); p];
        for (q, &l) in labels.iter().enumerate() {
            if l > 0 {
                subsets[l - 1].push(q);
            }
        }
        subsets.retain(|s| !s.is_empty());
        Self {
            n: labels.len(),
            subsets,
        }
    }

    fn labels(&self, p: usize) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (k, s) in self.subsets.iter().enumerate().take(p) {
            for &q in s {
                labels[q] = k + 1;
            }
        }
        labels
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Number of ancilla qubits.
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AncillaOption {
    /// `Z_I` on the data qubits with `Y` or `Z` on the ancilla.
    Option1,
    /// Ancilla-only action: `X` when one endpoint lies in `I`, else identity.
    Option2,
}

/// Option 1 only when it is strictly cheaper.
pub fn choose_option(parity: i64, d: i64) -> AncillaOption {
    if d < parity {
        AncillaOption::Option1
    } else {
        AncillaOption::Option2
    }
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<()> {
    if i >= j {
        return Err(Error::InvalidArgument(format!("expected i < j, got ({i}, {j})")));
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, bound: n });
    }
    Ok(())
}

fn parity(i: usize, j: usize, subset: &[usize]) -> i64 {
    subset.iter().filter(|&&q| q == i || q == j).count() as i64 % 2
}

/// Weight change of one `(i, j)` hopping string under option 1: qubits of
/// `subset` outside `[i, j]` add a `Z`, those strictly inside cancel one, the
/// ancilla adds one and endpoints are unchanged.
pub fn delta(i: usize, j: usize, subset: &[usize], n: usize) -> Result<i64> {
    check_pair(i, j, n)?;
    let mut d = 1;
    for &q in subset {
        if q >= n {
            return Err(Error::IndexOutOfRange { index: q, bound: n });
        }
        if q < i || q > j {
            d += 1;
        } else if q > i && q < j {
            d -= 1;
        }
    }
    Ok(d)
}

/// `alpha * min(parity, delta)` for one edge and one subset.
pub fn edge_increase(i: usize, j: usize, subset: &[usize], n: usize, alpha: u32) -> Result<i64> {
    if !matches!(alpha, 0 | 2 | 4) {
        return Err(Error::InvalidArgument(format!("alpha must be 0, 2 or 4, got {alpha}")));
    }
    let d = delta(i, j, subset, n)?;
    Ok(alpha as i64 * parity(i, j, subset).min(d))
}

/// Number of Pauli strings in the hopping image of an edge.
pub fn alpha(attrs: &EdgeAttrs) -> u32 {
    match (attrs.hopping, attrs.coeff.has_real(), attrs.coeff.has_imag()) {
        (false, _, _) => 0,
        (true, true, true) => 4,
        _ => 2,
    }
}

/// A hopping edge placed on mode positions `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoppingEdge {
    pub i: usize,
    pub j: usize,
    pub alpha: u32,
}

pub fn hopping_edges(graph: &HamiltonianGraph, order: &Ordering) -> Result<Vec<HoppingEdge>> {
    if order.len() != graph.n() {
        return Err(Error::NonBijectiveOrder {
            n: graph.n(),
            reason: format!("ordering has length {}", order.len()),
        });
    }
    Ok(graph
        .edges()
        .iter()
        .filter(|e| alpha(&e.attrs) > 0)
        .map(|e| {
            let (a, b) = (order.position(e.u), order.position(e.v));
            HoppingEdge {
                i: a.min(b),
                j: a.max(b),
                alpha: alpha(&e.attrs),
            }
        })
        .collect())
}

/// Total Jordan-Wigner hopping weight before any ancilla: each string on
/// `(i, j)` has weight `j - i + 1`.
pub fn base_hopping_weight(graph: &HamiltonianGraph, order: &Ordering) -> Result<u64> {
    Ok(hopping_edges(graph, order)?
        .iter()
        .map(|e| e.alpha as u64 * (e.j - e.i + 1) as u64)
        .sum())
}

/// Summed weight change of all hopping strings under `plan`.
pub fn plan_objective(graph: &HamiltonianGraph, order: &Ordering, plan: &AncillaPlan) -> Result<i64> {
    let n = graph.n();
    if plan.n() != n {
        return Err(Error::DimensionMismatch {
            context: "plan qubits vs graph vertices",
            expected: n,
            found: plan.n(),
        });
    }
    // Re-validate in case the plan was assembled by hand.
    let plan = AncillaPlan::new(n, plan.subsets().to_vec())?;
    let edges = hopping_edges(graph, order)?;
    let mut total = 0;
    for subset in plan.subsets() {
        for e in &edges {
            total += edge_increase(e.i, e.j, subset, n, e.alpha)?;
        }
    }
    Ok(total)
}

/// Option chosen for one hopping edge against every subset of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeChoice {
    pub i: usize,
    pub j: usize,
    pub options: Vec<AncillaOption>,
}

pub fn edge_choices(graph: &HamiltonianGraph, order: &Ordering, plan: &AncillaPlan) -> Result<Vec<EdgeChoice>> {
    let n = graph.n();
    hopping_edges(graph, order)?
        .into_iter()
        .map(|e| {
            let options = plan
                .subsets()
                .iter()
                .map(|s| Ok(choose_option(parity(e.i, e.j, s), delta(e.i, e.j, s, n)?)))
                .collect::<Result<_>>()?;
            Ok(EdgeChoice {
                i: e.i,
                j: e.j,
                options,
            })
        })
        .collect()
}

/// Position of qubit `q` relative to an edge.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Outside,
    Inside,
    Endpoint,
}

struct Problem {
    n: usize,
    alphas: Vec<i64>,
    /// `roles[q * m + e]` for `m` edges.
    roles: Vec<Role>,
}

impl Problem {
    fn new(n: usize, edges: &[HoppingEdge]) -> Self {
        let mut roles = Vec::with_capacity(n * edges.len());
        for q in 0..n {
            for e in edges {
                roles.push(if q == e.i || q == e.j {
                    Role::Endpoint
                } else if q > e.i && q < e.j {
                    Role::Inside
                } else {
                    Role::Outside
                });
            }
        }
        Self {
            n,
            alphas: edges.iter().map(|e| e.alpha as i64).collect(),
            roles,
        }
    }

    fn m(&self) -> usize {
        self.alphas.len()
    }

    fn roles_of(&self, q: usize) -> &[Role] {
        &self.roles[q * self.m()..(q + 1) * self.m()]
    }
}

#[inline]
fn edge_value(alpha: i64, size: i64, inside: i32, ends: u8) -> i64 {
    let d = size - 2 * inside as i64 - ends as i64 + 1;
    alpha * ((ends & 1) as i64).min(d)
}

/// Per-edge counts for one subset.
#[derive(Clone)]
struct SubsetState {
    size: i64,
    inside: Vec<i32>,
    ends: Vec<u8>,
    value: i64,
}

impl SubsetState {
    fn empty(m: usize) -> Self {
        Self {
            size: 0,
            inside: vec![0; m],
            ends: vec![0; m],
            value: 0,
        }
    }

    /// Value after adding (`sign = 1`) or removing (`sign = -1`) qubit `q`.
    fn value_with(&self, prob: &Problem, q: usize, sign: i32) -> i64 {
        let size = self.size + sign as i64;
        let mut total = 0;
        for (e, role) in prob.roles_of(q).iter().enumerate() {
            let (mut inside, mut ends) = (self.inside[e], self.ends[e]);
            match role {
                Role::Inside => inside += sign,
                Role::Endpoint => ends = (ends as i32 + sign) as u8,
                Role::Outside => {}
            }
            total += edge_value(prob.alphas[e], size, inside, ends);
        }
        total
    }

    /// Value after replacing member `out` by non-member `inn`.
    fn value_replacing(&self, prob: &Problem, out: usize, inn: usize) -> i64 {
        let mut total = 0;
        let (ro, ri) = (prob.roles_of(out), prob.roles_of(inn));
        for e in 0..prob.m() {
            let (mut inside, mut ends) = (self.inside[e], self.ends[e] as i32);
            match ro[e] {
                Role::Inside => inside -= 1,
                Role::Endpoint => ends -= 1,
                Role::Outside => {}
            }
            match ri[e] {
                Role::Inside => inside += 1,
                Role::Endpoint => ends += 1,
                Role::Outside => {}
            }
            total += edge_value(prob.alphas[e], self.size, inside, ends as u8);
        }
        total
    }

    fn update(&mut self, prob: &Problem, q: usize, sign: i32) {
        self.size += sign as i64;
        for (e, role) in prob.roles_of(q).iter().enumerate() {
            match role {
                Role::Inside => self.inside[e] += sign,
                Role::Endpoint => self.ends[e] = (self.ends[e] as i32 + sign) as u8,
                Role::Outside => {}
            }
        }
        self.value = (0..prob.m())
            .map(|e| edge_value(prob.alphas[e], self.size, self.inside[e], self.ends[e]))
            .sum();
    }
}

/// Labelled assignment of qubits to `p` subsets.
#[derive(Clone)]
struct Assignment {
    labels: Vec<usize>,
    sets: Vec<SubsetState>,
    value: i64,
}

impl Assignment {
    fn new(prob: &Problem, labels: Vec<usize>, p: usize) -> Self {
        let mut sets = vec![SubsetState::empty(prob.m()); p];
        for (q, &l) in labels.iter().enumerate() {
            if l > 0 {
                sets[l - 1].update(prob, q, 1);
            }
        }
        let value = sets.iter().map(|s| s.value).sum();
        Self { labels, sets, value }
    }

    fn relabel_delta(&self, prob: &Problem, q: usize, to: usize) -> i64 {
        let from = self.labels[q];
        let mut d = 0;
        if from > 0 {
            let s = &self.sets[from - 1];
            d += s.value_with(prob, q, -1) - s.value;
        }
        if to > 0 {
            let s = &self.sets[to - 1];
            d += s.value_with(prob, q, 1) - s.value;
        }
        d
    }

    fn relabel(&mut self, prob: &Problem, q: usize, to: usize) {
        let from = self.labels[q];
        if from > 0 {
            self.sets[from - 1].update(prob, q, -1);
        }
        if to > 0 {
            self.sets[to - 1].update(prob, q, 1);
        }
        self.labels[q] = to;
        self.value = self.sets.iter().map(|s| s.value).sum();
    }

    /// Delta of exchanging the labels of `a` and `b` (which differ).
    fn exchange_delta(&self, prob: &Problem, a: usize, b: usize) -> i64 {
        let (la, lb) = (self.labels[a], self.labels[b]);
        let mut d = 0;
        if la > 0 {
            let s = &self.sets[la - 1];
            d += s.value_replacing(prob, a, b) - s.value;
        }
        if lb > 0 {
            let s = &self.sets[lb - 1];
            d += s.value_replacing(prob, b, a) - s.value;
        }
        d
    }

    fn exchange(&mut self, prob: &Problem, a: usize, b: usize) {
        let (la, lb) = (self.labels[a], self.labels[b]);
        self.relabel(prob, a, 0);
        self.relabel(prob, b, la);
        self.relabel(prob, a, lb);
    }
}

/// Best interval of free qubits for a new subset `k`, then single-qubit
/// toggles until no toggle helps.
fn grow_subset(prob: &Problem, asg: &mut Assignment, k: usize) {
    let n = prob.n;
    let mut best: Option<(i64, usize, usize)> = None;
    for a in 0..n {
        let mut state = SubsetState::empty(prob.m());
        for b in a..n {
            if asg.labels[b] == 0 {
                state.update(prob, b, 1);
                if best.map_or(state.value < 0, |(v, _, _)| state.value < v) {
                    best = Some((state.value, a, b));
                }
            }
        }
    }
    if let Some((_, a, b)) = best {
        for q in a..=b {
            if asg.labels[q] == 0 {
                asg.relabel(prob, q, k);
            }
        }
    }
    let mut improved = true;
    while improved {
        improved = false;
        for q in 0..n {
            let target = match asg.labels[q] {
                0 => k,
                l if l == k => 0,
                _ => continue,
            };
            if asg.relabel_delta(prob, q, target) < 0 {
                asg.relabel(prob, q, target);
                improved = true;
            }
        }
    }
}

/// Exact best plan made of at most `p` disjoint intervals of positions, for
/// every budget up to `p`. Subset values are independent, so this is a
/// shortest-path style recursion over interval end points.
fn interval_plans(prob: &Problem, p: usize) -> Vec<Vec<usize>> {
    let n = prob.n;
    // cost[a * n + b] for the interval a..=b.
    let mut cost = vec![0i64; n * n];
    for a in 0..n {
        let mut state = SubsetState::empty(prob.m());
        for b in a..n {
            state.update(prob, b, 1);
            cost[a * n + b] = state.value;
        }
    }
    // best[k][t]: positions 0..t with at most k intervals; choice[k][t] is
    // the start of the interval ending at t - 1, if any.
    let mut best = vec![vec![0i64; n + 1]; p + 1];
    let mut choice = vec![vec![None; n + 1]; p + 1];
    for k in 1..=p {
        for t in 1..=n {
            let mut v = best[k][t - 1];
            let mut c = None;
            for a in 0..t {
                let cand = best[k - 1][a] + cost[a * n + t - 1];
                if cand < v {
                    v = cand;
                    c = Some(a);
                }
            }
            best[k][t] = v;
            choice[k][t] = c;
        }
    }
    (0..=p)
        .map(|budget| {
            let mut labels = vec![0; n];
            let (mut k, mut t, mut next) = (budget, n, 1);
            while k > 0 && t > 0 {
                match choice[k][t] {
                    Some(a) => {
                        labels[a..t].iter_mut().for_each(|l| *l = next);
                        next += 1;
                        k -= 1;
                        t = a;
                    }
                    None => t -= 1,
                }
            }
            labels
        })
        .collect()
}

/// First-improvement descent over relabels and label exchanges.
fn descend(prob: &Problem, asg: &mut Assignment, p: usize, deadline: Option<Instant>) {
    let n = prob.n;
    let mut improved = true;
    while improved {
        improved = false;
        for q in 0..n {
            for to in 0..=p {
                if to != asg.labels[q] && asg.relabel_delta(prob, q, to) < 0 {
                    asg.relabel(prob, q, to);
                    improved = true;
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if asg.labels[a] != asg.labels[b] && asg.exchange_delta(prob, a, b) < 0 {
                    asg.exchange(prob, a, b);
                    improved = true;
                }
            }
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
    }
}

/// Drops members whose removal leaves the value unchanged.
fn prune(prob: &Problem, asg: &mut Assignment) {
    for q in 0..prob.n {
        if asg.labels[q] > 0 && asg.relabel_delta(prob, q, 0) <= 0 {
            asg.relabel(prob, q, 0);
        }
    }
}

fn anneal(prob: &Problem, start: &Assignment, p: usize, params: &SearchParams, index: usize) -> Assignment {
    let n = prob.n;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(index as u64).wrapping_mul(0x9E37_79B9));
    let deadline = params.budget().map(|b| Instant::now() + b);
    let mut cur = start.clone();
    let mut best = start.clone();
    if n < 2 || p == 0 {
        return best;
    }
    let propose = |cur: &Assignment, rng: &mut ChaCha8Rng| -> (bool, usize, usize, i64) {
        let q = rng.gen_range(0..n);
        if rng.gen_bool(0.5) {
            let mut to = rng.gen_range(0..p);
            if to >= cur.labels[q] {
                to += 1;
            }
            (false, q, to, cur.relabel_delta(prob, q, to))
        } else {
            let mut r = rng.gen_range(0..n - 1);
            if r >= q {
                r += 1;
            }
            let d = if cur.labels[q] == cur.labels[r] {
                0
            } else {
                cur.exchange_delta(prob, q, r)
            };
            (true, q, r, d)
        }
    };
    let t0 = params.initial_temperature.unwrap_or_else(|| {
        let ups: Vec<i64> = (0..300).map(|_| propose(&cur, &mut rng).3).filter(|&d| d > 0).collect();
        if ups.is_empty() {
            1.0
        } else {
            ups.iter().sum::<i64>() as f64 / ups.len() as f64
        }
    });
    let total = params.iterations.unwrap_or(30_000 * n as u64);
    let levels = ((1e-3f64).ln() / params.cooling_rate.ln()).ceil().max(1.0) as u64;
    let per_level = (total / levels).max(1);
    let mut temperature = t0;
    for it in 1..=total {
        if it % 1024 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        if it % per_level == 0 {
            temperature *= params.cooling_rate;
        }
        let (exchange, a, b, d) = propose(&cur, &mut rng);
        if d > 0 && rng.gen::<f64>() >= (-(d as f64) / temperature).exp() {
            continue;
        }
        if exchange {
            if cur.labels[a] == cur.labels[b] {
                continue;
            }
            cur.exchange(prob, a, b);
        } else {
            cur.relabel(prob, a, b);
        }
        if cur.value < best.value {
            best = cur.clone();
        }
    }
    descend(prob, &mut best, p, deadline);
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub plan: AncillaPlan,
    /// Summed weight change of all hopping strings (non-positive).
    pub value: i64,
    /// Hopping weight without ancillas.
    pub base_weight: u64,
}

impl PlanResult {
    pub fn hopping_weight(&self) -> u64 {
        (self.base_weight as i64 + self.value) as u64
    }

    /// Fractional reduction relative to the base weight.
    pub fn reduction(&self) -> f64 {
        if self.base_weight == 0 {
            0.0
        } else {
            -(self.value as f64) / self.base_weight as f64
        }
    }
}

/// Plans for every budget `0..=max_p`. Each budget starts from the previous
/// plan plus one grown subset, so values never increase with the budget.
pub fn optimize_plan_sweep(
    graph: &HamiltonianGraph,
    order: &Ordering,
    max_p: usize,
    params: &SearchParams,
) -> Result<Vec<PlanResult>> {
    params.validate()?;
    let n = graph.n();
    let edges = hopping_edges(graph, order)?;
    let base_weight = base_hopping_weight(graph, order)?;
    let prob = Problem::new(n, &edges);
    let mut results = vec![PlanResult {
        plan: AncillaPlan::empty(n),
        value: 0,
        base_weight,
    }];
    let intervals = interval_plans(&prob, max_p);
    let mut labels = vec![0; n];
    for (p, interval_labels) in intervals.into_iter().enumerate().skip(1) {
        let mut start = Assignment::new(&prob, labels.clone(), p);
        grow_subset(&prob, &mut start, p);
        let exact = Assignment::new(&prob, interval_labels, p);
        if exact.value < start.value {
            start = exact;
        }
        let outcomes: Vec<Assignment> = (0..params.restarts)
            .into_par_iter()
            .map(|r| anneal(&prob, &start, p, params, p * 1000 + r))
            .collect();
        let best = outcomes
            .into_iter()
            .chain(std::iter::once(start))
            .min_by_key(|a| a.value)
            .expect("at least one candidate");
        let mut best = best;
        prune(&prob, &mut best);
        // Keep subsets in a canonical order so the next budget extends them.
        let plan = canonical_plan(AncillaPlan::from_labels(&best.labels, p));
        labels = plan.labels(p);
        let value = plan_objective(graph, order, &plan)?;
        debug_assert_eq!(value, best.value, "incremental plan value drifted");
        results.push(PlanResult {
            plan,
            value,
            base_weight,
        });
    }
    Ok(results)
}

fn canonical_plan(mut plan: AncillaPlan) -> AncillaPlan {
    plan.subsets.sort();
    plan
}

/// Best plan with at most `p` subsets.
pub fn optimize_plan(
    graph: &HamiltonianGraph,
    order: &Ordering,
    p: usize,
    params: &SearchParams,
) -> Result<PlanResult> {
    Ok(optimize_plan_sweep(graph, order, p, params)?
        .pop()
        .expect("sweep includes budget zero"))
}

/// Exhaustive search over all labellings with at most `p` subsets.
pub fn brute_force_plan(graph: &HamiltonianGraph, order: &Ordering, p: usize) -> Result<PlanResult> {
    let n = graph.n();
    let space = (p as u64 + 1).checked_pow(n as u32).unwrap_or(u64::MAX);
    if space > BRUTE_FORCE_MAX_LABELLINGS {
        return Err(Error::ProblemTooLarge { n, max: 16 });
    }
    let edges = hopping_edges(graph, order)?;
    let prob = Problem::new(n, &edges);
    let mut asg = Assignment::new(&prob, vec![0; n], p);
    let mut best = (0i64, vec![0; n]);

    fn recurse(prob: &Problem, asg: &mut Assignment, q: usize, used: usize, p: usize, best: &mut (i64, Vec<usize>)) {
        if q == prob.n {
            if asg.value < best.0 {
                *best = (asg.value, asg.labels.clone());
            }
            return;
        }
        // Labels are used in increasing order of first appearance, which
        // skips relabelled duplicates.
        for l in 0..=(used + 1).min(p) {
            if l > 0 {
                asg.relabel(prob, q, l);
            }
            recurse(prob, asg, q + 1, used.max(l), p, best);
            if l > 0 {
                asg.relabel(prob, q, 0);
            }
        }
    }
    recurse(&prob, &mut asg, 0, 0, p, &mut best);
    let plan = AncillaPlan::from_labels(&best.1, p);
    Ok(PlanResult {
        value: plan_objective(graph, order, &plan)?,
        plan,
        base_weight: base_hopping_weight(graph, order)?,
    })
}

/// The operator multiplying an `(i, j)` hopping string for subset `k`.
fn kappa(i: usize, j: usize, subset: &[usize], n: usize, ancilla: usize, width: usize) -> Result<PauliString> {
    let par = parity(i, j, subset);
    let d = delta(i, j, subset, n)?;
    let mut x = BitVec::zeros(width);
    let mut z = BitVec::zeros(width);
    match (choose_option(par, d), par) {
        (AncillaOption::Option1, 1) => {
            subset.iter().for_each(|&q| z.set(q, true));
            x.set(ancilla, true);
            z.set(ancilla, true);
        }
        (AncillaOption::Option1, _) => {
            subset.iter().for_each(|&q| z.set(q, true));
            z.set(ancilla, true);
        }
        (AncillaOption::Option2, 1) => x.set(ancilla, true),
        (AncillaOption::Option2, _) => {}
    }
    PauliString::from_masks(x, z, 0)
}

/// Extends a Jordan-Wigner Hamiltonian by one ancilla per subset, multiplying
/// every hopping string by the cheaper `kappa` for each ancilla.
pub fn apply_plan(hamiltonian: &QubitHamiltonian, plan: &AncillaPlan) -> Result<QubitHamiltonian> {
    if hamiltonian.encoding != EncodingKind::JordanWigner {
        return Err(Error::UnsupportedEncoding(hamiltonian.encoding.to_string()));
    }
    let n = hamiltonian.modes;
    if hamiltonian.width != n {
        return Err(Error::InvalidArgument("Hamiltonian already carries ancillas".into()));
    }
    if plan.n() != n {
        return Err(Error::DimensionMismatch {
            context: "plan qubits vs Hamiltonian modes",
            expected: n,
            found: plan.n(),
        });
    }
    let width = n + plan.len();
    let terms = hamiltonian
        .terms
        .iter()
        .map(|t| {
            let mut op = t.term.op.extended(width);
            if let TermOrigin::Hopping { i, j } = t.origin {
                for (k, subset) in plan.subsets().iter().enumerate() {
                    op = op.mul(&kappa(i, j, subset, n, n + k, width)?)?;
                }
                if !op.is_hermitian() {
                    let phase = op.phase() + 1;
                    op = op.with_phase(phase);
                }
            }
            let mut term = t.term.clone();
            term.op = op;
            Ok(HamiltonianTerm { origin: t.origin, term })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QubitHamiltonian {
        encoding: hamiltonian.encoding,
        modes: n,
        width,
        terms,
    })
}

/// `Z_{I_k} Z_{n + k}` for every subset.
pub fn stabilizer_generators(plan: &AncillaPlan) -> Vec<PauliString> {
    let width = plan.n() + plan.len();
    plan.subsets()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let support = BitVec::from_indices(width, s.iter().copied().chain([plan.n() + k]));
            PauliString::z_on(&support)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Counterexample {
    NonHermitian {
        term: usize,
    },
    Commutation {
        a: usize,
        b: usize,
        original: bool,
        modified: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub passed: bool,
    pub terms: usize,
    pub counterexample: Option<Counterexample>,
}

/// Checks that the modified terms keep Hermiticity and pairwise commutation
/// of the original terms.
pub fn verify_equivalence(original: &QubitHamiltonian, modified: &QubitHamiltonian) -> Result<EquivalenceReport> {
    let (a, b) = (&original.terms, &modified.terms);
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "term lists",
            expected: a.len(),
            found: b.len(),
        });
    }
    if let Some(k) = (0..a.len()).find(|&k| a[k].origin != b[k].origin) {
        return Err(Error::InvalidArgument(format!(
            "term {k} comes from different fermionic terms"
        )));
    }
    let report = |counterexample: Option<Counterexample>| EquivalenceReport {
        passed: counterexample.is_none(),
        terms: a.len(),
        counterexample,
    };
    if let Some(term) = b.iter().position(|t| !t.term.op.is_hermitian()) {
        return Ok(report(Some(Counterexample::NonHermitian { term })));
    }
    let found = (0..a.len())
        .into_par_iter()
        .map(|x| -> Result<Option<Counterexample>> {
            for y in x + 1..a.len() {
                let original = a[x].term.op.commutes(&a[y].term.op)?;
                let modified = b[x].term.op.commutes(&b[y].term.op)?;
                if original != modified {
                    return Ok(Some(Counterexample::Commutation {
                        a: x,
                        b: y,
                        original,
                        modified,
                    }));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report(found.into_iter().flatten().next()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::LinearEncoding;
    use crate::graphs::{self, CoeffClass, ModelPreset};
    use crate::pauli::assemble_hamiltonian;

    fn single_edge(n: usize, i: usize, j: usize, coeff: CoeffClass) -> HamiltonianGraph {
        HamiltonianGraph::new(n, vec![(i, j, EdgeAttrs::hopping(coeff))], vec![false; n]).unwrap()
    }

    fn quick(seed: u64) -> SearchParams {
        SearchParams {
            seed,
            restarts: 2,
            iterations: Some(20_000),
            ..SearchParams::default()
        }
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(2, 7, &[], 10).unwrap(), 1);
        assert_eq!(delta(2, 7, &[3, 4, 5], 10).unwrap(), -2);
        assert_eq!(delta(2, 7, &[2, 3, 4], 10).unwrap(), -1);
        assert!(delta(7, 2, &[], 10).is_err());
        assert!(delta(2, 7, &[11], 10).is_err());
    }

    #[test]
    fn edge_increase_examples() {
        assert_eq!(edge_increase(2, 7, &[3, 4, 5], 10, 4).unwrap(), -8);
        assert_eq!(edge_increase(2, 7, &[0, 8, 9], 10, 2).unwrap(), 0);
        assert_eq!(edge_increase(2, 7, &[2, 3, 4], 10, 2).unwrap(), -2);
        assert!(edge_increase(2, 7, &[], 10, 3).is_err());
    }

    #[test]
    fn option_tie_goes_to_option_two() {
        assert_eq!(choose_option(1, 1), AncillaOption::Option2);
        assert_eq!(choose_option(0, 0), AncillaOption::Option2);
        assert_eq!(choose_option(1, 0), AncillaOption::Option1);
        assert_eq!(choose_option(0, -1), AncillaOption::Option1);
    }

    #[test]
    fn plan_validation() {
        assert!(matches!(
            AncillaPlan::new(4, vec![vec![0, 1], vec![1, 2]]),
            Err(Error::DisjointnessViolation {
                qubit: 1,
                first: 0,
                second: 1
            })
        ));
        let p = AncillaPlan::new(4, vec![vec![2, 1], vec![]]).unwrap();
        assert_eq!(p.subsets(), &[vec![1, 2]]);
        assert!(AncillaPlan::new(4, vec![vec![4]]).is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"n":4,"subsets":[[1,2]]}"#);
        assert!(serde_json::from_str::<AncillaPlan>(r#"{"n":4,"subsets":[[1],[1]]}"#).is_err());
    }

    #[test]
    fn plan_objective_examples() {
        let g = single_edge(4, 0, 3, CoeffClass::Real);
        let id = Ordering::identity(4);
        assert_eq!(plan_objective(&g, &id, &AncillaPlan::empty(4)).unwrap(), 0);
        let plan = AncillaPlan::new(4, vec![vec![1, 2]]).unwrap();
        assert_eq!(plan_objective(&g, &id, &plan).unwrap(), -2);

        let long = single_edge(10, 0, 9, CoeffClass::Complex);
        let id = Ordering::identity(10);
        let a = AncillaPlan::new(10, vec![vec![1, 2, 3]]).unwrap();
        let b = AncillaPlan::new(10, vec![vec![5, 6]]).unwrap();
        let both = AncillaPlan::new(10, vec![vec![1, 2, 3], vec![5, 6]]).unwrap();
        assert_eq!(
            plan_objective(&long, &id, &both).unwrap(),
            plan_objective(&long, &id, &a).unwrap() + plan_objective(&long, &id, &b).unwrap()
        );
    }

    #[test]
    fn optimize_plan_examples() {
        let g = single_edge(4, 0, 3, CoeffClass::Real);
        let id = Ordering::identity(4);
        let none = optimize_plan(&g, &id, 0, &quick(0)).unwrap();
        assert_eq!((none.value, none.plan.len()), (0, 0));
        let one = optimize_plan(&g, &id, 1, &quick(0)).unwrap();
        assert_eq!(one.plan.subsets(), &[vec![1, 2]]);
        assert_eq!(one.value, -2);
        assert_eq!(brute_force_plan(&g, &id, 1).unwrap().value, -2);
    }

    #[test]
    fn sweep_matches_brute_force_on_small_grid() {
        let g = graphs::grid(2, 5, false).unwrap().with_model(ModelPreset::Hopping);
        let order = Ordering::identity(10);
        let sweep = optimize_plan_sweep(&g, &order, 2, &quick(4)).unwrap();
        assert!(sweep.windows(2).all(|w| w[1].value <= w[0].value));
        for (p, found) in sweep.iter().enumerate().skip(1) {
            let exact = brute_force_plan(&g, &order, p).unwrap();
            assert_eq!(found.value, exact.value, "p = {p}");
        }
    }

    #[test]
    fn apply_plan_example() {
        let g = single_edge(4, 0, 3, CoeffClass::Real);
        let enc = LinearEncoding::build(EncodingKind::JordanWigner, 4).unwrap();
        let h = assemble_hamiltonian(&g, &enc, &Ordering::identity(4)).unwrap();
        let plan = AncillaPlan::new(4, vec![vec![1, 2]]).unwrap();
        let h2 = apply_plan(&h, &plan).unwrap();
        assert_eq!(h2.width, 5);
        let mut strings: Vec<_> = h2.terms.iter().map(|t| t.term.op.to_string()).collect();
        strings.sort();
        assert_eq!(strings, ["X0 X3 Z4", "Y0 Y3 Z4"]);
        assert_eq!(stabilizer_generators(&plan)[0].to_string(), "Z1 Z2 Z4");
        assert!(verify_equivalence(&h, &h2).unwrap().passed);
    }

    #[test]
    fn option_two_parity_one_adds_ancilla_x() {
        let g = single_edge(4, 0, 3, CoeffClass::Real);
        let enc = LinearEncoding::build(EncodingKind::JordanWigner, 4).unwrap();
        let h = assemble_hamiltonian(&g, &enc, &Ordering::identity(4)).unwrap();
        // d = 1 outside + 1 = 2 > parity 1.
        let plan = AncillaPlan::new(4, vec![vec![3]]).unwrap();
        let h2 = apply_plan(&h, &plan).unwrap();
        for (a, b) in h.terms.iter().zip(&h2.terms) {
            assert_eq!(b.term.weight(), a.term.weight() + 1);
            assert_eq!(b.term.op.letter(4), crate::pauli::Pauli::X);
        }
    }

    #[test]
    fn empty_plan_only_widens() {
        let g = graphs::grid(2, 3, false).unwrap();
        let enc = LinearEncoding::build(EncodingKind::JordanWigner, 6).unwrap();
        let h = assemble_hamiltonian(&g, &enc, &Ordering::identity(6)).unwrap();
        let h2 = apply_plan(&h, &AncillaPlan::empty(6)).unwrap();
        assert_eq!(h, h2);
        assert!(verify_equivalence(&h, &h2).unwrap().passed);
        assert!(stabilizer_generators(&AncillaPlan::empty(6)).is_empty());
    }

    #[test]
    fn non_jw_base_rejected() {
        let g = graphs::grid(2, 2, false).unwrap();
        let enc = LinearEncoding::build(EncodingKind::BravyiKitaev, 4).unwrap();
        let h = assemble_hamiltonian(&g, &enc, &Ordering::identity(4)).unwrap();
        assert!(matches!(
            apply_plan(&h, &AncillaPlan::empty(4)),
            Err(Error::UnsupportedEncoding(_))
        ));
    }

    #[test]
    fn corrupted_kappa_is_detected() {
        let g = graphs::grid(3, 3, false).unwrap().with_model(ModelPreset::Hopping);
        let enc = LinearEncoding::build(EncodingKind::JordanWigner, 9).unwrap();
        let h = assemble_hamiltonian(&g, &enc, &Ordering::identity(9)).unwrap();
        let plan = AncillaPlan::new(9, vec![vec![1, 2, 3, 4]]).unwrap();
        let mut h2 = apply_plan(&h, &plan).unwrap();
        assert!(verify_equivalence(&h, &h2).unwrap().passed);
        // Turn an ancilla Y (odd parity, option 1) into Z.
        let victim = h2
            .terms
            .iter()
            .position(|t| t.term.op.letter(9) == crate::pauli::Pauli::Y)
            .expect("plan yields an option-1 parity-1 term");
        let op = &h2.terms[victim].term.op;
        let mut x = op.x_mask().clone();
        x.set(9, false);
        h2.terms[victim].term.op = PauliString::from_masks(x, op.z_mask().clone(), op.phase()).unwrap();
        let report = verify_equivalence(&h, &h2).unwrap();
        assert!(!report.passed);
        assert!(matches!(
            report.counterexample,
            Some(Counterexample::Commutation { .. })
        ));
    }

    #[test]
    fn misaligned_terms_rejected() {
        let g = graphs::grid(2, 2, false).unwrap();
        let enc = LinearEncoding::build(EncodingKind::JordanWigner, 4).unwrap();
        let h = assemble_hamiltonian(&g, &enc, &Ordering::identity(4)).unwrap();
        let mut short = h.clone();
        short.terms.pop();
        assert!(verify_equivalence(&h, &short).is_err());
    }

    #[test]
    fn plan_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plan.json");
        let plan = AncillaPlan::new(6, vec![vec![1, 2], vec![4]]).unwrap();
        plan.write(&path).unwrap();
        assert_eq!(AncillaPlan::read(&path).unwrap(), plan);
    }
}
