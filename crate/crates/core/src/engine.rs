//! The gluing linear program and exact scl.
//!
//! Variables, per factor: a residual `w_t >= 0` on every turn and a
//! multiplier `s_j >= 0` per disk vector `d_j`, with `v = w + Σ s_j d_j`.
//! Rows: `∂w = 0`; `v_A(t) = v_B(partner(t))` for every non-self-loop
//! A-turn; out-flow of every non-self-loop A-arc equals its word's
//! coefficient; every self-loop diagonal equals its word's coefficient.
//! The objective `Σ_f (Σ s − |v_f|/2)` is the orbifold Euler characteristic,
//! and `scl = −max/2`.
//!
//! By default disk columns are generated lazily. At an optimum of the
//! restricted master, `g_t = −(reduced cost of w_t)` is non-negative and a
//! disk `d` prices out at `1 − Σ d(t) g_t`, so the most improving disk is a
//! cheapest closed walk in the turn graph whose winding is divisible by the
//! order. That walk is found exactly by Dijkstra on (arc, partial winding)
//! states. When no walk costs less than one, the master's dual is feasible
//! for the program with every disk, which certifies the optimum.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arcs::{build_arc_system, ArcSystem, TurnVector};
use crate::chain::{homological_check, normalize_with_warnings, Chain, Factor, Homology};
use crate::disks::{enumerate_disk_generators, DiskError, Limits};
use crate::lp::{check_certificate, LpOutcome, LpProblem, LpStatus, Simplex};
use crate::par::{self, Execution};
use crate::rational::{q, qi, Fraction, Q};

const MAX_ROUNDS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Disk(#[from] DiskError),
    #[error("linear program ended with unexpected status {0:?}")]
    Solver(LpStatus),
}

impl EngineError {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, EngineError::Disk(DiskError::ResourceLimit { .. }))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Price disk columns on demand (default).
    #[default]
    Lazy,
    /// Enumerate and prune every vertex disk up front.
    Enumerate,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EngineOptions {
    pub strategy: Strategy,
    pub limits: Limits,
    pub exec: Execution,
}

impl EngineOptions {
    pub fn from_env() -> Self {
        EngineOptions {
            limits: Limits::from_env(),
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Residual { factor: Factor, turn: usize },
    Disk { factor: Factor, index: usize },
}

/// The assembled program with enough bookkeeping to add disk columns and
/// read vectors back out.
#[derive(Clone, Debug)]
pub struct GluingProgram {
    pub problem: LpProblem,
    pub columns: Vec<Column>,
    pub disks: [Vec<Vec<i64>>; 2],
    residual_col: [Vec<usize>; 2],
    boundary_row: [Vec<Option<usize>>; 2],
    gluing_row: Vec<Option<usize>>,
    flow_row: Vec<Option<usize>>,
    diagonal_row: [Vec<Option<usize>>; 2],
}

impl GluingProgram {
    /// Gluing and normalization entries of a unit vector on turn `t`.
    fn turn_entries(&self, sys: &ArcSystem, f: Factor, t: usize) -> Vec<(usize, Q)> {
        let turn = sys.turns(f)[t];
        if sys.is_self_loop_turn(f, t) {
            let row = self.diagonal_row[f.index()][turn.from].expect("diagonal row");
            return vec![(row, qi(1))];
        }
        match f {
            Factor::A => vec![
                (self.gluing_row[t].expect("gluing row"), qi(1)),
                (self.flow_row[turn.from].expect("flow row"), qi(1)),
            ],
            Factor::B => {
                let p = sys.partner(f, t).expect("partner");
                vec![(self.gluing_row[p].expect("gluing row"), qi(-1))]
            }
        }
    }

    fn disk_column(&self, sys: &ArcSystem, f: Factor, d: &[i64]) -> (Q, Vec<(usize, Q)>) {
        let mut entries = Vec::new();
        for (t, &x) in d.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (r, a) in self.turn_entries(sys, f, t) {
                entries.push((r, a * qi(x)));
            }
        }
        let cost = qi(1) - q(sys.norm_int(f, d), 2);
        (cost, entries)
    }

    /// Registers a disk and returns its column data.
    fn push_disk(&mut self, sys: &ArcSystem, f: Factor, d: Vec<i64>) -> (Q, Vec<(usize, Q)>) {
        let col = self.disk_column(sys, f, &d);
        self.columns.push(Column::Disk {
            factor: f,
            index: self.disks[f.index()].len(),
        });
        self.disks[f.index()].push(d);
        col
    }

    pub fn residual_column(&self, f: Factor, t: usize) -> usize {
        self.residual_col[f.index()][t]
    }

    /// `(w, s)` split into the glued pair `v = w + Σ s_j d_j`.
    pub fn vectors(&self, sys: &ArcSystem, x: &[Q]) -> [TurnVector; 2] {
        let mut out = [TurnVector::zero(sys, Factor::A), TurnVector::zero(sys, Factor::B)];
        for (c, xv) in self.columns.iter().zip(x) {
            if xv.is_zero() {
                continue;
            }
            match *c {
                Column::Residual { factor, turn } => out[factor.index()].coords[turn] += xv,
                Column::Disk { factor, index } => {
                    for (t, &m) in self.disks[factor.index()][index].iter().enumerate() {
                        if m != 0 {
                            out[factor.index()].coords[t] += xv * qi(m);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Builds the program over the given disk vectors (possibly none).
pub fn build_program(sys: &ArcSystem, gens: [&[Vec<i64>]; 2]) -> GluingProgram {
    let mut rows = 0usize;
    let mut next_row = || {
        rows += 1;
        rows - 1
    };
    let mut boundary_row: [Vec<Option<usize>>; 2] = [Vec::new(), Vec::new()];
    let mut diagonal_row: [Vec<Option<usize>>; 2] = [Vec::new(), Vec::new()];
    for f in Factor::BOTH {
        for a in sys.arcs(f) {
            boundary_row[f.index()].push((!a.self_loop).then(&mut next_row));
        }
    }
    let gluing_row: Vec<Option<usize>> = (0..sys.turns(Factor::A).len())
        .map(|t| (!sys.is_self_loop_turn(Factor::A, t)).then(&mut next_row))
        .collect();
    let flow_row: Vec<Option<usize>> = sys
        .arcs(Factor::A)
        .iter()
        .map(|a| (!a.self_loop).then(&mut next_row))
        .collect();
    for f in Factor::BOTH {
        for a in sys.arcs(f) {
            diagonal_row[f.index()].push(a.self_loop.then(&mut next_row));
        }
    }

    let mut problem = LpProblem::new(rows);
    for f in Factor::BOTH {
        for (i, a) in sys.arcs(f).iter().enumerate() {
            let coef = sys.coefficient(a.word).clone();
            if let Some(r) = diagonal_row[f.index()][i] {
                problem.set_rhs(r, coef);
            } else if f == Factor::A {
                problem.set_rhs(flow_row[i].unwrap(), coef);
            }
        }
    }

    let mut prog = GluingProgram {
        problem,
        columns: Vec::new(),
        disks: [Vec::new(), Vec::new()],
        residual_col: [Vec::new(), Vec::new()],
        boundary_row,
        gluing_row,
        flow_row,
        diagonal_row,
    };
    for f in Factor::BOTH {
        for (t, turn) in sys.turns(f).iter().enumerate() {
            let mut entries = prog.turn_entries(sys, f, t);
            if turn.from != turn.to {
                entries.push((prog.boundary_row[f.index()][turn.from].unwrap(), qi(1)));
                entries.push((prog.boundary_row[f.index()][turn.to].unwrap(), qi(-1)));
            }
            let cost = q(-sys.turn_weight(f, t), 2);
            let j = prog.problem.add_variable(cost, entries);
            prog.residual_col[f.index()].push(j);
            prog.columns.push(Column::Residual { factor: f, turn: t });
        }
    }
    for f in Factor::BOTH {
        for d in gens[f.index()] {
            let (cost, entries) = prog.push_disk(sys, f, d.clone());
            prog.problem.add_variable(cost, entries);
        }
    }
    prog
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SclStatus {
    Finite,
    Infinite,
    Empty,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LpStats {
    pub vars: usize,
    pub constraints: usize,
    pub pivots: usize,
    /// pricing rounds (lazy strategy)
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SclResult {
    /// normalized chain
    pub chain: String,
    pub orders: (u64, u64),
    pub status: SclStatus,
    /// exact value; `None` when infinite
    pub value: Option<Q>,
    /// optimal glued pair `(v_A, v_B)`
    pub primal: Option<[TurnVector; 2]>,
    /// optimal dual of the final program
    pub dual: Vec<Q>,
    /// disk vectors in the final program, with their optimal multipliers
    pub disks: [Vec<(Vec<i64>, Q)>; 2],
    pub strategy: Strategy,
    /// search bound per factor: the order, or the winding window for ℤ
    pub bound: [u64; 2],
    pub lp: LpStats,
    pub certificate_ok: bool,
    pub warnings: Vec<String>,
    pub elapsed: Duration,
}

impl SclResult {
    fn trivial(chain: String, orders: (u64, u64), status: SclStatus, warnings: Vec<String>) -> Self {
        SclResult {
            chain,
            orders,
            status,
            value: (status == SclStatus::Empty).then(Q::zero),
            primal: None,
            dual: Vec::new(),
            disks: [Vec::new(), Vec::new()],
            strategy: Strategy::default(),
            bound: [0, 0],
            lp: LpStats::default(),
            certificate_ok: true,
            warnings,
            elapsed: Duration::ZERO,
        }
    }

    /// `1/2`, `0`, or `infinite`.
    pub fn display_value(&self) -> String {
        match &self.value {
            Some(v) => crate::rational::fmt_q(v),
            None => "infinite".to_string(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let count = |f: Factor| self.disks[f.index()].len();
        serde_json::json!({
            "chain": self.chain,
            "orders": [self.orders.0, self.orders.1],
            "status": self.status,
            "scl": self.value.as_ref().map(Fraction::from),
            "generators": {
                "count": { "a": count(Factor::A), "b": count(Factor::B) },
                "bound": { "a": self.bound[0], "b": self.bound[1] },
                "strategy": self.strategy,
            },
            "lp": self.lp,
            "certificate_ok": self.certificate_ok,
        })
    }
}

pub fn compute_scl(chain: &Chain) -> Result<SclResult, EngineError> {
    compute_scl_with(chain, &EngineOptions::from_env())
}

pub fn compute_scl_with(chain: &Chain, opts: &EngineOptions) -> Result<SclResult, EngineError> {
    let start = Instant::now();
    let (norm, warnings) = normalize_with_warnings(chain);
    let warnings: Vec<String> = warnings.iter().map(|w| w.to_string()).collect();
    let rendered = norm.render();
    let orders = norm.factors.orders();
    if norm.is_empty() {
        return Ok(SclResult::trivial(rendered, orders, SclStatus::Empty, warnings));
    }
    if homological_check(&norm) == Homology::Nontrivial {
        return Ok(SclResult::trivial(rendered, orders, SclStatus::Infinite, warnings));
    }
    let sys = build_arc_system(&norm);
    let (prog, simplex, rounds, bound) = match opts.strategy {
        Strategy::Enumerate => {
            let mut gens: [Vec<Vec<i64>>; 2] = [Vec::new(), Vec::new()];
            let mut bound = [0u64; 2];
            for f in Factor::BOTH {
                let set = enumerate_disk_generators(&sys, f, sys.order(f), &opts.limits, opts.exec)?;
                bound[f.index()] = set.bound;
                gens[f.index()] = set.generators;
            }
            let prog = build_program(&sys, [&gens[0], &gens[1]]);
            let mut simplex = Simplex::new(prog.problem.clone());
            simplex.solve();
            (prog, simplex, 0, bound)
        }
        Strategy::Lazy => solve_lazy(&sys, opts)?,
    };

    let outcome: LpOutcome = simplex.outcome();
    if outcome.status != LpStatus::Optimal {
        return Err(EngineError::Solver(outcome.status));
    }
    let certificate_ok = check_certificate(simplex.problem(), &outcome);
    let value = -outcome.objective.clone() / qi(2);
    let primal = prog.vectors(&sys, &outcome.primal);
    let mut disks: [Vec<(Vec<i64>, Q)>; 2] = [Vec::new(), Vec::new()];
    for (c, x) in prog.columns.iter().zip(&outcome.primal) {
        if let Column::Disk { factor, index } = *c {
            disks[factor.index()].push((prog.disks[factor.index()][index].clone(), x.clone()));
        }
    }
    Ok(SclResult {
        chain: rendered,
        orders,
        status: SclStatus::Finite,
        value: Some(value),
        primal: Some(primal),
        dual: outcome.dual.clone(),
        disks,
        strategy: opts.strategy,
        bound,
        lp: LpStats {
            vars: simplex.problem().vars(),
            constraints: simplex.problem().rows(),
            pivots: outcome.pivots,
            rounds,
        },
        certificate_ok,
        warnings,
        elapsed: start.elapsed(),
    })
}

fn solve_lazy(
    sys: &ArcSystem,
    opts: &EngineOptions,
) -> Result<(GluingProgram, Simplex, usize, [u64; 2]), EngineError> {
    let mut prog = build_program(sys, [&[], &[]]);
    let mut simplex = Simplex::new(prog.problem.clone());
    let windows = [
        pricing_window(sys, Factor::A, &opts.limits)?,
        pricing_window(sys, Factor::B, &opts.limits)?,
    ];
    let mut known: [BTreeSet<Vec<i64>>; 2] = [BTreeSet::new(), BTreeSet::new()];
    let mut rounds = 0;
    loop {
        let status = simplex.solve();
        if status != LpStatus::Optimal {
            return Err(EngineError::Solver(status));
        }
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return Err(DiskError::ResourceLimit { limit: MAX_ROUNDS }.into());
        }
        let reduced = simplex.reduced();
        let mut tasks = Vec::new();
        for f in Factor::BOTH {
            let g: Vec<Q> = (0..sys.turns(f).len())
                .map(|t| -reduced[prog.residual_column(f, t)].clone())
                .collect();
            debug_assert!(g.iter().all(|x| !x.is_negative()));
            for b in 0..sys.arcs(f).len() {
                tasks.push((f, b, g.clone()));
            }
        }
        let found = par::map(opts.exec, &tasks, |(f, b, g)| {
            cheapest_disk_through(sys, *f, *b, g, windows[f.index()], &opts.limits)
                .map(|r| r.map(|(cost, d)| (*f, cost, d)))
        });
        let mut added = false;
        for r in found {
            let Some((f, cost, d)) = r? else { continue };
            if cost < qi(1) && known[f.index()].insert(d.clone()) {
                let (c, entries) = prog.push_disk(sys, f, d);
                simplex.add_column(c, entries);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    Ok((prog, simplex, rounds, windows))
}

/// Number of partial-winding layers searched by pricing: the order for a
/// finite factor; for ℤ, one more than the largest prefix sum a vertex disk
/// can need (see [`zero_winding_window`]).
fn pricing_window(sys: &ArcSystem, f: Factor, limits: &Limits) -> Result<u64, DiskError> {
    let k = sys.order(f);
    let layers = if k > 0 { k } else { zero_winding_window(sys, f) + 1 };
    let states = (sys.arcs(f).len() as u128) * layers as u128;
    if states > limits.max_nodes as u128 {
        return Err(DiskError::ResourceLimit {
            limit: limits.max_nodes,
        });
    }
    Ok(layers)
}

/// Prefix-sum bound `H` for ℤ factors.
///
/// A vertex disk is a sum of simple loops in which zero-winding loops occur
/// at most once, and for a positive loop `ℓ₊` and negative loop `ℓ₋` either
/// `m₊ <= |w₋|` or `m₋ <= w₊` (otherwise `|w₋|ℓ₊ + w₊ℓ₋` can be split off).
/// With `N` simple loops, `n` arcs and `W = n·T` bounding loop windings,
/// this bounds the total multiplicity by `N(1 + W + W²)`, the length by
/// `n` times that, and (rotating the walk to keep prefix sums non-negative)
/// every prefix sum by half the length times `T`.
pub fn zero_winding_window(sys: &ArcSystem, f: Factor) -> u64 {
    let arcs = sys.arcs(f);
    let regular = arcs.iter().filter(|a| !a.self_loop).count() as u128;
    if regular == 0 {
        return 0;
    }
    let t = arcs
        .iter()
        .filter(|a| !a.self_loop)
        .map(|a| a.exponent.unsigned_abs() as u128)
        .max()
        .unwrap();
    let mut loops: u128 = 0;
    let mut binom: u128 = 1;
    let mut fact: u128 = 1;
    for j in 1..=regular {
        binom = binom * (regular - j + 1) / j;
        if j > 1 {
            fact = fact.saturating_mul(j - 1);
        }
        loops = loops.saturating_add(binom.saturating_mul(fact));
    }
    let w = regular * t;
    let mult = loops.saturating_mul(1 + w + w.saturating_mul(w));
    let len = regular.saturating_mul(mult);
    let h = len.saturating_mul(t) / 2;
    u64::try_from(h).unwrap_or(u64::MAX)
}

/// Cheapest closed walk through arc `b` whose winding is divisible by the
/// order (zero for ℤ), under non-negative turn costs `g`. Returns the walk's
/// cost and turn vector, or `None` if no such walk exists.
pub fn cheapest_disk_through(
    sys: &ArcSystem,
    f: Factor,
    b: usize,
    g: &[Q],
    layers: u64,
    limits: &Limits,
) -> Result<Option<(Q, Vec<i64>)>, DiskError> {
    let arcs = sys.arcs(f);
    let k = sys.order(f);
    let layers = layers as usize;
    let n = arcs.len();
    let layer_of = |s: i64| -> Option<usize> {
        if k > 0 {
            Some(s.rem_euclid(k as i64) as usize)
        } else if s >= 0 && (s as usize) < layers {
            Some(s as usize)
        } else {
            None
        }
    };
    if k == 0 && arcs[b].exponent <= 0 {
        return Ok(None);
    }
    let Some(l0) = layer_of(arcs[b].exponent) else {
        return Ok(None);
    };
    let mut out_turns: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (t, turn) in sys.turns(f).iter().enumerate() {
        out_turns[turn.from].push((turn.to, t));
    }
    let close = |a: usize| sys.turn_id(f, a, b);

    let idx = |a: usize, l: usize| a * layers + l;
    let mut dist: Vec<Option<Q>> = vec![None; n * layers];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n * layers];
    let mut done = vec![false; n * layers];
    let mut heap = BinaryHeap::new();
    dist[idx(b, l0)] = Some(Q::zero());
    heap.push(Reverse((Q::zero(), b, l0)));
    let mut best: Option<(Q, usize, usize)> = None;
    let mut pops = 0usize;
    while let Some(Reverse((d, a, l))) = heap.pop() {
        if done[idx(a, l)] {
            continue;
        }
        if let Some((bc, _, _)) = &best {
            if &d >= bc {
                break;
            }
        }
        done[idx(a, l)] = true;
        pops += 1;
        if pops > limits.max_nodes {
            return Err(DiskError::ResourceLimit {
                limit: limits.max_nodes,
            });
        }
        if l == 0 {
            if let Some(t) = close(a) {
                let c = &d + &g[t];
                if best.as_ref().is_none_or(|(bc, _, _)| &c < bc) {
                    best = Some((c, a, t));
                }
            }
        }
        let s = l as i64;
        for &(to, t) in &out_turns[a] {
            let Some(l2) = layer_of(s + arcs[to].exponent) else {
                continue;
            };
            let nd = &d + &g[t];
            let slot = &mut dist[idx(to, l2)];
            if slot.as_ref().is_none_or(|old| &nd < old) {
                *slot = Some(nd.clone());
                pred[idx(to, l2)] = Some((idx(a, l), t));
                heap.push(Reverse((nd, to, l2)));
            }
        }
    }
    let Some((cost, last, closing)) = best else {
        return Ok(None);
    };
    let mut v = vec![0i64; g.len()];
    v[closing] += 1;
    let mut cur = idx(last, 0);
    while let Some((p, t)) = pred[cur] {
        v[t] += 1;
        cur = p;
    }
    debug_assert_eq!(cur, idx(b, l0));
    Ok(Some((cost, v)))
}
