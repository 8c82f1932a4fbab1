//! Backtracking search for designs and large sets at desk scale.
//!
//! Design search repeatedly takes the first t-set (colex) that is still
//! short of lambda and branches on the unused blocks through it that keep
//! every count at most lambda. Large-set search assigns blocks to bins one
//! at a time in a fixed order, keeping a coverage counter per bin and t-set
//! and refusing any assignment that would push a counter past lambda. Since
//! every t-set lies in exactly `l * lambda` blocks, a complete assignment is
//! automatically a large set.

use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::setsys::{
    binom_u64, check_design_divisibility, check_largeset_divisibility, for_each_subset, lambda_of,
    validate_nkt, InstanceParams, KSetIndexer,
};
use crate::verify::{Design, LargeSetPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Strategy {
    Exhaustive,
    /// Reshuffle the block order and restart after `nodes_per_restart` nodes.
    RandomizedRestart { restarts: u32, nodes_per_restart: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum BlockOrder {
    Colex,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub node_budget: u64,
    /// Wall-clock limit; the node budget still applies.
    pub time_budget: Option<Duration>,
    pub seed: u64,
    pub order: BlockOrder,
    /// Large sets only: bins are opened in index order, which removes the
    /// `l!` relabelings of each solution.
    pub symmetry_breaking: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Exhaustive,
            node_budget: 100_000_000,
            time_budget: None,
            seed: 0,
            order: BlockOrder::Colex,
            symmetry_breaking: true,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        if self.node_budget == 0 || self.time_budget.is_some_and(|d| d.is_zero()) {
            return Err(Error::params("budgets must be positive"));
        }
        if let Strategy::RandomizedRestart { restarts, nodes_per_restart } = self.strategy {
            if restarts == 0 || nodes_per_restart == 0 {
                return Err(Error::params("restart counts must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum SearchOutcome<T> {
    Found {
        nodes: u64,
        #[serde(rename = "result")]
        object: T,
    },
    /// The whole search space was explored without a solution.
    Exhausted { nodes: u64, reason: String },
    BudgetExceeded { nodes: u64 },
}

impl<T> SearchOutcome<T> {
    pub fn found(&self) -> Option<&T> {
        match self {
            SearchOutcome::Found { object, .. } => Some(object),
            _ => None,
        }
    }

    pub fn nodes(&self) -> u64 {
        match self {
            SearchOutcome::Found { nodes, .. }
            | SearchOutcome::Exhausted { nodes, .. }
            | SearchOutcome::BudgetExceeded { nodes } => *nodes,
        }
    }
}

/// Node and clock accounting shared by all searches.
struct Budget {
    nodes: u64,
    limit: u64,
    deadline: Option<Instant>,
}

impl Budget {
    fn new(limit: u64, time: Option<Duration>) -> Self {
        Self { nodes: 0, limit, deadline: time.map(|d| Instant::now() + d) }
    }

    /// Counts a node; false once a budget is spent.
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            return false;
        }
        !(self.nodes % 1024 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d))
    }
}

/// Blocks in search order with the t-set ranks each one contains.
struct Layout {
    blocks: Vec<Vec<u32>>,
    tsets_of: Vec<Vec<u32>>,
    n_tsets: usize,
}

fn layout(n: u32, k: u32, t: u32, order: &[usize]) -> Result<Layout> {
    let all: Vec<Vec<u32>> = KSetIndexer::new(n, k)?.iter().collect();
    let tidx = KSetIndexer::new(n, t)?;
    let blocks: Vec<Vec<u32>> = order.iter().map(|&i| all[i].clone()).collect();
    let tsets_of = blocks
        .iter()
        .map(|b| {
            let mut v = Vec::new();
            for_each_subset(b, t as usize, |a| v.push(tidx.rank_unchecked(a) as u32));
            v
        })
        .collect();
    Ok(Layout { blocks, tsets_of, n_tsets: tidx.count() as usize })
}

fn block_count(n: u32, k: u32) -> Result<usize> {
    let c = binom_u64(n.into(), k.into()).ok_or_else(|| Error::params("C(n, k) overflows"))?;
    if c > 10_000_000 {
        return Err(Error::CapExceeded { what: "C(n, k)", size: c.to_string(), cap: "10000000".into() });
    }
    Ok(c as usize)
}

fn orders(count: usize, cfg: &SearchConfig) -> Vec<(Vec<usize>, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let base: Vec<usize> = (0..count).collect();
    let shuffled = |rng: &mut ChaCha8Rng| {
        let mut v = base.clone();
        v.shuffle(rng);
        v
    };
    match cfg.strategy {
        Strategy::Exhaustive => {
            let o = match cfg.order {
                BlockOrder::Colex => base.clone(),
                BlockOrder::Random => shuffled(&mut rng),
            };
            vec![(o, cfg.node_budget)]
        }
        Strategy::RandomizedRestart { restarts, nodes_per_restart } => (0..restarts)
            .map(|i| {
                let o = if i == 0 && cfg.order == BlockOrder::Colex { base.clone() } else { shuffled(&mut rng) };
                (o, nodes_per_restart)
            })
            .collect(),
    }
}

enum Step {
    Found(Vec<usize>),
    Exhausted,
    Budget,
}

// ---------------------------------------------------------------- designs

struct DesignSearch<'a> {
    lay: &'a Layout,
    lambda: u32,
    /// Blocks through each t-set, as indices into `lay.blocks`, ascending.
    through: Vec<Vec<usize>>,
    counts: Vec<u32>,
    used: Vec<bool>,
    chosen: Vec<usize>,
}

impl<'a> DesignSearch<'a> {
    fn new(lay: &'a Layout, lambda: u32) -> Self {
        let mut through = vec![Vec::new(); lay.n_tsets];
        for (b, ts) in lay.tsets_of.iter().enumerate() {
            for &a in ts {
                through[a as usize].push(b);
            }
        }
        Self {
            lay,
            lambda,
            through,
            counts: vec![0; lay.n_tsets],
            used: vec![false; lay.blocks.len()],
            chosen: Vec::new(),
        }
    }

    fn fits(&self, b: usize) -> bool {
        !self.used[b] && self.lay.tsets_of[b].iter().all(|&a| self.counts[a as usize] < self.lambda)
    }

    fn toggle(&mut self, b: usize, on: bool) {
        self.used[b] = on;
        for &a in &self.lay.tsets_of[b] {
            if on {
                self.counts[a as usize] += 1;
            } else {
                self.counts[a as usize] -= 1;
            }
        }
        if on {
            self.chosen.push(b);
        } else {
            self.chosen.pop();
        }
    }

    /// Depth-first search from the current state. `floor` is the least
    /// position in `through[a]` allowed when `a` is still the branching t-set.
    fn run(&mut self, budget: &mut Budget, floor: (usize, usize), visit: &mut dyn FnMut(&[usize]) -> bool) -> Option<Step> {
        let Some(a) = self.counts.iter().position(|&c| c < self.lambda) else {
            return (!visit(&self.chosen)).then(|| Step::Found(self.chosen.clone()));
        };
        let need = (self.lambda - self.counts[a]) as usize;
        let start = if floor.0 == a { floor.1 } else { 0 };
        let cands: Vec<usize> = (start..self.through[a].len()).filter(|&p| self.fits(self.through[a][p])).collect();
        if cands.len() < need {
            return None;
        }
        for p in cands {
            let b = self.through[a][p];
            if !self.fits(b) {
                continue;
            }
            if !budget.tick() {
                return Some(Step::Budget);
            }
            self.toggle(b, true);
            let r = self.run(budget, (a, p + 1), visit);
            self.toggle(b, false);
            if r.is_some() {
                return r;
            }
        }
        None
    }
}

fn design_precheck(n: u32, k: u32, t: u32, lambda: u64) -> Result<Option<String>> {
    validate_nkt(n, k, t)?;
    if lambda == 0 {
        return Err(Error::params("lambda must be at least 1"));
    }
    let rep = check_design_divisibility(n, k, t, &num_bigint::BigUint::from(lambda))?;
    if let Some(f) = rep.first_failure() {
        return Ok(Some(format!("divisibility fails at s={}: {} does not divide {}", f.s, f.divisor, f.dividend)));
    }
    let full = binom_u64((n - t).into(), (k - t).into()).unwrap_or(u64::MAX);
    if lambda > full {
        return Ok(Some(format!("lambda exceeds C(n-t, k-t) = {full}")));
    }
    Ok(None)
}

fn to_design(n: u32, k: u32, t: u32, lambda: u64, lay: &Layout, chosen: &[usize]) -> Design {
    let mut blocks: Vec<Vec<u32>> = chosen.iter().map(|&b| lay.blocks[b].clone()).collect();
    blocks.sort_by_key(|b| b.iter().rev().copied().collect::<Vec<_>>());
    Design { n, k, t, lambda, blocks }
}

/// Finds a t-(n, k, lambda) design. Budget exhaustion is never reported as
/// nonexistence.
pub fn search_design(n: u32, k: u32, t: u32, lambda: u64, cfg: &SearchConfig) -> Result<SearchOutcome<Design>> {
    cfg.validate()?;
    if let Some(reason) = design_precheck(n, k, t, lambda)? {
        return Ok(SearchOutcome::Exhausted { nodes: 0, reason });
    }
    let lam = u32::try_from(lambda).map_err(|_| Error::params("lambda too large"))?;
    let count = block_count(n, k)?;
    let mut total = 0;
    let mut budget_hit = false;
    for (order, limit) in orders(count, cfg) {
        let lay = layout(n, k, t, &order)?;
        let mut s = DesignSearch::new(&lay, lam);
        let mut budget = Budget::new(limit.min(cfg.node_budget.saturating_sub(total)).max(1), cfg.time_budget);
        let step = s.run(&mut budget, (usize::MAX, 0), &mut |_| false);
        total += budget.nodes.min(limit);
        match step {
            Some(Step::Found(chosen)) => {
                return Ok(SearchOutcome::Found { nodes: total, object: to_design(n, k, t, lambda, &lay, &chosen) })
            }
            None | Some(Step::Exhausted) => {
                return Ok(SearchOutcome::Exhausted { nodes: total, reason: "search space exhausted".into() })
            }
            Some(Step::Budget) => budget_hit = true,
        }
        if total >= cfg.node_budget {
            break;
        }
    }
    debug_assert!(budget_hit);
    Ok(SearchOutcome::BudgetExceeded { nodes: total })
}

/// Every t-(n, k, lambda) design on the labeled point set, up to `cap`.
pub fn enumerate_designs(n: u32, k: u32, t: u32, lambda: u64, cap: usize, cfg: &SearchConfig) -> Result<(Vec<Design>, u64)> {
    cfg.validate()?;
    if design_precheck(n, k, t, lambda)?.is_some() {
        return Ok((Vec::new(), 0));
    }
    let lam = u32::try_from(lambda).map_err(|_| Error::params("lambda too large"))?;
    let count = block_count(n, k)?;
    let order: Vec<usize> = (0..count).collect();
    let lay = layout(n, k, t, &order)?;
    let mut s = DesignSearch::new(&lay, lam);
    let mut budget = Budget::new(cfg.node_budget, cfg.time_budget);
    let mut found = Vec::new();
    let mut over = false;
    let step = s.run(&mut budget, (usize::MAX, 0), &mut |chosen| {
        if found.len() == cap {
            over = true;
            return false;
        }
        found.push(to_design(n, k, t, lambda, &lay, chosen));
        true
    });
    if over {
        return Err(Error::CapExceeded { what: "number of designs", size: format!("more than {cap}"), cap: cap.to_string() });
    }
    if matches!(step, Some(Step::Budget)) {
        return Err(Error::BudgetExceeded { nodes: budget.nodes });
    }
    Ok((found, budget.nodes))
}

// ------------------------------------------------------------- large sets

struct LargeSetSearch<'a> {
    lay: &'a Layout,
    l: usize,
    lambda: u32,
    counts: Vec<u32>,
    bins: Vec<u32>,
    symmetry_breaking: bool,
}

impl<'a> LargeSetSearch<'a> {
    fn new(lay: &'a Layout, l: usize, lambda: u32, symmetry_breaking: bool) -> Self {
        Self {
            lay,
            l,
            lambda,
            counts: vec![0; l * lay.n_tsets],
            bins: Vec::with_capacity(lay.blocks.len()),
            symmetry_breaking,
        }
    }

    fn fits(&self, b: usize, j: usize) -> bool {
        let base = j * self.lay.n_tsets;
        self.lay.tsets_of[b].iter().all(|&a| self.counts[base + a as usize] < self.lambda)
    }

    fn apply(&mut self, b: usize, j: usize, delta: i32) {
        let base = j * self.lay.n_tsets;
        for &a in &self.lay.tsets_of[b] {
            let c = &mut self.counts[base + a as usize];
            *c = c.wrapping_add_signed(delta);
        }
    }

    /// Iterative depth-first search; `visit` sees every complete assignment
    /// and returns true to keep going.
    fn run(&mut self, budget: &mut Budget, visit: &mut dyn FnMut(&[u32]) -> bool) -> Step {
        let nb = self.lay.blocks.len();
        // next bin to try at each depth, and the number of open bins before it
        let mut next = vec![0usize; nb + 1];
        let mut open = vec![0usize; nb + 1];
        let mut i = 0;
        loop {
            if i == nb {
                if !visit(&self.bins) {
                    return Step::Found(self.bins.iter().map(|&j| j as usize).collect());
                }
                if !self.backtrack(&mut i) {
                    return Step::Exhausted;
                }
                continue;
            }
            let limit = if self.symmetry_breaking { self.l.min(open[i] + 1) } else { self.l };
            let mut placed = false;
            while next[i] < limit {
                let j = next[i];
                next[i] += 1;
                if self.fits(i, j) {
                    if !budget.tick() {
                        return Step::Budget;
                    }
                    self.apply(i, j, 1);
                    self.bins.push(j as u32);
                    open[i + 1] = open[i].max(j + 1);
                    next[i + 1] = 0;
                    i += 1;
                    placed = true;
                    break;
                }
            }
            if !placed && !self.backtrack(&mut i) {
                return Step::Exhausted;
            }
        }
    }

    /// Undoes the assignment at depth `i - 1`; false at the root.
    fn backtrack(&mut self, i: &mut usize) -> bool {
        if *i == 0 {
            return false;
        }
        *i -= 1;
        let j = self.bins.pop().expect("depth matches stack") as usize;
        self.apply(*i, j, -1);
        true
    }
}

fn largeset_lambda(params: &InstanceParams) -> Result<std::result::Result<u32, String>> {
    let rep = check_largeset_divisibility(params)?;
    if let Some(f) = rep.first_failure() {
        return Ok(Err(format!("divisibility fails at s={}: {} does not divide {}", f.s, f.divisor, f.dividend)));
    }
    let lambda = lambda_of(params)?;
    Ok(Ok(lambda.to_u32().ok_or_else(|| Error::params("lambda too large"))?))
}

fn to_partition(params: InstanceParams, lay: &Layout, bins: &[usize]) -> Result<LargeSetPartition> {
    let mut parts = vec![Vec::new(); params.l as usize];
    for (b, &j) in bins.iter().enumerate() {
        parts[j].push(lay.blocks[b].clone());
    }
    for p in &mut parts {
        p.sort_by_key(|b: &Vec<u32>| b.iter().rev().copied().collect::<Vec<_>>());
    }
    LargeSetPartition::new(params, parts)
}

/// Finds a large set LS(l; t, k, n).
pub fn search_large_set(params: InstanceParams, cfg: &SearchConfig) -> Result<SearchOutcome<LargeSetPartition>> {
    cfg.validate()?;
    let lambda = match largeset_lambda(&params)? {
        Ok(v) => v,
        Err(reason) => return Ok(SearchOutcome::Exhausted { nodes: 0, reason }),
    };
    let l = usize::try_from(params.l).map_err(|_| Error::params("l too large"))?;
    let count = block_count(params.n, params.k)?;
    let mut total = 0;
    for (order, limit) in orders(count, cfg) {
        let lay = layout(params.n, params.k, params.t, &order)?;
        let mut s = LargeSetSearch::new(&lay, l, lambda, cfg.symmetry_breaking);
        let mut budget = Budget::new(limit.min(cfg.node_budget.saturating_sub(total)).max(1), cfg.time_budget);
        let step = s.run(&mut budget, &mut |_| false);
        total += budget.nodes.min(limit);
        match step {
            Step::Found(bins) => {
                return Ok(SearchOutcome::Found { nodes: total, object: to_partition(params, &lay, &bins)? })
            }
            Step::Exhausted => {
                return Ok(SearchOutcome::Exhausted { nodes: total, reason: "search space exhausted".into() })
            }
            Step::Budget => {}
        }
        if total >= cfg.node_budget {
            break;
        }
    }
    Ok(SearchOutcome::BudgetExceeded { nodes: total })
}

/// Number of ordered large sets: complete assignments of blocks to labeled
/// bins, with symmetry breaking off.
pub fn count_large_set_assignments(params: InstanceParams, cfg: &SearchConfig) -> Result<u64> {
    cfg.validate()?;
    let Ok(lambda) = largeset_lambda(&params)? else { return Ok(0) };
    let l = usize::try_from(params.l).map_err(|_| Error::params("l too large"))?;
    let count = block_count(params.n, params.k)?;
    let order: Vec<usize> = (0..count).collect();
    let lay = layout(params.n, params.k, params.t, &order)?;
    let mut s = LargeSetSearch::new(&lay, l, lambda, false);
    let mut budget = Budget::new(cfg.node_budget, cfg.time_budget);
    let mut found = 0u64;
    match s.run(&mut budget, &mut |_| {
        found += 1;
        true
    }) {
        Step::Budget => Err(Error::BudgetExceeded { nodes: budget.nodes }),
        _ => Ok(found),
    }
}

// --------------------------------------------------------- disjoint designs

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MaxDisjointReport {
    pub count: usize,
    pub designs_enumerated: usize,
    pub upper_bound: u64,
    pub nodes: u64,
    pub witness: Vec<Design>,
}

fn clique(adj: &[Vec<u64>], cand: Vec<usize>, cur: &mut Vec<usize>, best: &mut Vec<usize>, bound: usize, budget: &mut Budget) -> bool {
    if cur.len() > best.len() {
        *best = cur.clone();
    }
    if best.len() == bound {
        return true;
    }
    for (pos, &v) in cand.iter().enumerate() {
        if cur.len() + cand.len() - pos <= best.len() {
            return true;
        }
        if !budget.tick() {
            return false;
        }
        let next: Vec<usize> = cand[pos + 1..].iter().copied().filter(|&u| adj[v][u / 64] >> (u % 64) & 1 == 1).collect();
        cur.push(v);
        let ok = clique(adj, next, cur, best, bound, budget);
        cur.pop();
        if !ok || best.len() == bound {
            return ok;
        }
    }
    true
}

/// Maximum number of pairwise block-disjoint t-(n, k, lambda) designs, by
/// enumerating every design and solving maximum clique on the disjointness
/// graph. `cap` limits the number of designs enumerated.
pub fn max_disjoint_designs(n: u32, k: u32, t: u32, lambda: u64, cap: usize, cfg: &SearchConfig) -> Result<MaxDisjointReport> {
    let (designs, enum_nodes) = enumerate_designs(n, k, t, lambda, cap, cfg)?;
    let full = binom_u64((n - t).into(), (k - t).into()).unwrap_or(u64::MAX);
    let upper_bound = full / lambda.max(1);
    let idx = KSetIndexer::new(n, k)?;
    let words = (idx.count() as usize).div_ceil(64);
    let masks: Vec<Vec<u64>> = designs
        .iter()
        .map(|d| {
            let mut m = vec![0u64; words];
            for b in &d.blocks {
                let r = idx.rank_unchecked(b) as usize;
                m[r / 64] |= 1 << (r % 64);
            }
            m
        })
        .collect();
    let nd = designs.len();
    let dwords = nd.div_ceil(64);
    let mut adj = vec![vec![0u64; dwords]; nd];
    for i in 0..nd {
        for j in i + 1..nd {
            if masks[i].iter().zip(&masks[j]).all(|(x, y)| x & y == 0) {
                adj[i][j / 64] |= 1 << (j % 64);
                adj[j][i / 64] |= 1 << (i % 64);
            }
        }
    }
    let mut budget = Budget::new(cfg.node_budget, cfg.time_budget);
    let mut best = Vec::new();
    let bound = usize::try_from(upper_bound).unwrap_or(usize::MAX);
    if !clique(&adj, (0..nd).collect(), &mut Vec::new(), &mut best, bound, &mut budget) {
        return Err(Error::BudgetExceeded { nodes: enum_nodes + budget.nodes });
    }
    Ok(MaxDisjointReport {
        count: best.len(),
        designs_enumerated: nd,
        upper_bound,
        nodes: enum_nodes + budget.nodes,
        witness: best.into_iter().map(|i| designs[i].clone()).collect(),
    })
}
