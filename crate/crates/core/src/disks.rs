//! Disk vectors: enumeration of a finite generating set, pruning to the
//! vertices of `conv(D) + V`, a brute-force oracle, κ and integer hulls.
//!
//! All vectors here are integer turn vectors of one factor, stored as
//! `Vec<i64>` indexed by turn id.

use std::collections::{BTreeSet, HashSet};

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arcs::{ArcError, ArcSystem, TurnVector};
use crate::chain::Factor;
use crate::lp::{solve, LpProblem, LpStatus};
use crate::par::{self, Execution};
use crate::rational::{qi, Q};

pub const DEFAULT_MAX_NODES: usize = 5_000_000;
pub const MAX_NODES_ENV: &str = "SCLCONE_MAX_NODES";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Cap on search states visited by enumeration and pricing.
    pub max_nodes: usize,
    pub max_hull_dim: usize,
    pub max_hull_points: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: DEFAULT_MAX_NODES,
            max_hull_dim: 6,
            max_hull_points: 200_000,
        }
    }
}

impl Limits {
    /// Defaults, with `max_nodes` taken from `SCLCONE_MAX_NODES` when set.
    pub fn from_env() -> Self {
        let mut l = Limits::default();
        if let Some(n) = std::env::var(MAX_NODES_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            l.max_nodes = n;
        }
        l
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiskError {
    #[error("disk vectors must have integer coordinates")]
    NonInteger,
    #[error(transparent)]
    Arc(#[from] ArcError),
    #[error("search exceeded the cap of {limit} nodes")]
    ResourceLimit { limit: usize },
    #[error("vector is not in the cone (negative or unbalanced)")]
    OutsideCone,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("points have inconsistent dimensions")]
    Ragged,
}

/// A directed simple cycle in the turn graph of one factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimpleLoop {
    pub factor: Factor,
    /// arcs in cycle order, starting from the smallest id
    pub arcs: Vec<usize>,
    /// `turns[i]` goes from `arcs[i]` to `arcs[i + 1]` (cyclically)
    pub turns: Vec<usize>,
}

impl SimpleLoop {
    pub fn vector(&self, sys: &ArcSystem) -> Vec<i64> {
        let mut v = vec![0; sys.turns(self.factor).len()];
        for &t in &self.turns {
            v[t] += 1;
        }
        v
    }

    /// Total exponent: each arc is visited once.
    pub fn winding(&self, sys: &ArcSystem) -> i64 {
        let arcs = sys.arcs(self.factor);
        self.arcs.iter().map(|&a| arcs[a].exponent).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiskGeneratorSet {
    pub factor: Factor,
    pub order: u64,
    pub generators: Vec<Vec<i64>>,
    /// largest loop multiplicity allowed during the search
    pub bound: u64,
    pub minimal: bool,
}

fn adjacency(sys: &ArcSystem, f: Factor) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); sys.arcs(f).len()];
    for (id, t) in sys.turns(f).iter().enumerate() {
        adj[t.from].push((t.to, id));
    }
    adj
}

pub fn simple_loops(sys: &ArcSystem, f: Factor) -> Vec<SimpleLoop> {
    fn extend(
        start: usize,
        adj: &[Vec<(usize, usize)>],
        arcs: &mut Vec<usize>,
        turns: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<(Vec<usize>, Vec<usize>)>,
    ) {
        let last = *arcs.last().unwrap();
        for &(to, t) in &adj[last] {
            if to == start {
                turns.push(t);
                out.push((arcs.clone(), turns.clone()));
                turns.pop();
            } else if to > start && !on_path[to] {
                on_path[to] = true;
                arcs.push(to);
                turns.push(t);
                extend(start, adj, arcs, turns, on_path, out);
                turns.pop();
                arcs.pop();
                on_path[to] = false;
            }
        }
    }

    let adj = adjacency(sys, f);
    let mut found = Vec::new();
    let mut on_path = vec![false; adj.len()];
    for s in 0..adj.len() {
        on_path[s] = true;
        extend(s, &adj, &mut vec![s], &mut Vec::new(), &mut on_path, &mut found);
        on_path[s] = false;
    }
    found
        .into_iter()
        .map(|(arcs, turns)| SimpleLoop {
            factor: f,
            arcs,
            turns,
        })
        .collect()
}

fn connected_support(sys: &ArcSystem, f: Factor, v: &[i64]) -> bool {
    let n = sys.arcs(f).len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut touched = vec![false; n];
    for (t, &x) in sys.turns(f).iter().zip(v) {
        if x == 0 {
            continue;
        }
        touched[t.from] = true;
        touched[t.to] = true;
        let (a, b) = (find(&mut parent, t.from), find(&mut parent, t.to));
        parent[a] = b;
    }
    let mut root = None;
    for a in 0..n {
        if touched[a] {
            let r = find(&mut parent, a);
            match root {
                None => root = Some(r),
                Some(r0) if r0 != r => return false,
                _ => {}
            }
        }
    }
    true
}

fn winding_ok(winding: i64, order: u64) -> bool {
    if order == 0 {
        winding == 0
    } else {
        winding.rem_euclid(order as i64) == 0
    }
}

/// Disk test on an integer vector assumed non-negative.
pub fn is_disk(sys: &ArcSystem, f: Factor, v: &[i64], order: u64) -> bool {
    v.iter().any(|&x| x != 0)
        && sys.is_balanced_int(f, v)
        && winding_ok(sys.winding_twice_int(f, v) / 2, order)
        && connected_support(sys, f, v)
}

/// Nonzero, balanced, connected support, winding divisible by `order`
/// (exactly zero when `order` is 0).
pub fn disk_membership(sys: &ArcSystem, v: &TurnVector, order: u64) -> Result<bool, DiskError> {
    sys.check_dim(v)?;
    if v.coords.iter().any(|x| x.is_negative()) {
        return Err(ArcError::Negative.into());
    }
    let ints = v.to_ints().ok_or(DiskError::NonInteger)?;
    Ok(is_disk(sys, v.factor, &ints, order))
}

/// Loop multiplicity beyond which a disk cannot be a vertex.
fn multiplicity_bounds(loops: &[i64], order: u64) -> (Vec<u64>, u64) {
    if order > 0 {
        let b: Vec<u64> = loops
            .iter()
            .map(|&w| order / (w.rem_euclid(order as i64) as u64).gcd(&order))
            .collect();
        let max = b.iter().copied().max().unwrap_or(0);
        return (b, max);
    }
    let w_max = loops.iter().map(|w| w.unsigned_abs()).max().unwrap_or(0);
    let m = w_max.max(loops.len() as u64 * w_max * w_max).max(1);
    let b = loops.iter().map(|&w| if w == 0 { 1 } else { m }).collect();
    (b, m)
}

/// Finite generating set for `conv(D) + V` of factor `f`, pruned to its
/// vertices.
///
/// Every vertex disk is a sum of simple loops in which a loop of winding `w`
/// appears at most `ord(w)` times (the additive order of `w` mod `order`):
/// with more copies, removing `ord(w)` of them leaves a disk with the same
/// support that the original dominates. Partial sums that are already disks
/// are not extended for the same reason.
pub fn enumerate_disk_generators(
    sys: &ArcSystem,
    f: Factor,
    order: u64,
    limits: &Limits,
    exec: Execution,
) -> Result<DiskGeneratorSet, DiskError> {
    let loops = simple_loops(sys, f);
    let windings: Vec<i64> = loops.iter().map(|l| l.winding(sys)).collect();
    let (mult, bound) = multiplicity_bounds(&windings, order);
    let dim = sys.turns(f).len();

    let zero = vec![0i64; dim];
    let mut seen: HashSet<Vec<i64>> = HashSet::from([zero.clone()]);
    let mut states = vec![zero];
    let mut disks: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut nodes = 0usize;
    for (l, &m) in loops.iter().zip(&mult) {
        let lv = l.vector(sys);
        let mut fresh = Vec::new();
        for s in &states {
            let mut cur = s.clone();
            for _ in 0..m {
                for (c, x) in cur.iter_mut().zip(&lv) {
                    *c += x;
                }
                nodes += 1;
                if nodes > limits.max_nodes {
                    return Err(DiskError::ResourceLimit {
                        limit: limits.max_nodes,
                    });
                }
                if is_disk(sys, f, &cur, order) {
                    disks.insert(cur.clone());
                    break;
                }
                if seen.insert(cur.clone()) {
                    fresh.push(cur.clone());
                }
            }
        }
        states.extend(fresh);
    }

    let generators = prune_generators(disks.into_iter().collect(), exec);
    Ok(DiskGeneratorSet {
        factor: f,
        order,
        generators,
        bound,
        minimal: true,
    })
}

fn dominates(d: &[i64], e: &[i64]) -> bool {
    d.iter().zip(e).all(|(x, y)| x >= y)
}

/// Whether `d ∈ conv(others) + {w >= 0}`. For balanced inputs the slack is
/// automatically balanced, so this is membership in `conv(others) + V`.
pub fn in_hull_plus_cone(d: &[i64], others: &[&Vec<i64>]) -> bool {
    if others.is_empty() {
        return false;
    }
    let dim = d.len();
    let mut p = LpProblem::new(dim + 1);
    for (i, &x) in d.iter().enumerate() {
        p.set_rhs(i, qi(x));
    }
    p.set_rhs(dim, qi(1));
    for e in others {
        let mut col: Vec<(usize, Q)> = e
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, &x)| (i, qi(x)))
            .collect();
        col.push((dim, qi(1)));
        p.add_variable(Q::zero(), col);
    }
    for i in 0..dim {
        p.add_variable(Q::zero(), vec![(i, qi(1))]);
    }
    solve(&p).status == LpStatus::Optimal
}

/// Keeps exactly the vertices of `conv(gens) + V`. Inputs must be balanced.
/// The result is sorted.
pub fn prune_generators(gens: Vec<Vec<i64>>, exec: Execution) -> Vec<Vec<i64>> {
    let set: BTreeSet<Vec<i64>> = gens.into_iter().collect();
    let mut by_size: Vec<Vec<i64>> = set.into_iter().collect();
    by_size.sort_by_key(|v| (v.iter().sum::<i64>(), v.clone()));
    let mut kept: Vec<Vec<i64>> = Vec::new();
    for d in by_size {
        if !kept.iter().any(|e| dominates(&d, e)) {
            kept.push(d);
        }
    }
    let keep = par::map(exec, &(0..kept.len()).collect::<Vec<_>>(), |&i| {
        let others: Vec<&Vec<i64>> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, e)| e)
            .collect();
        !in_hull_plus_cone(&kept[i], &others)
    });
    let mut out: Vec<Vec<i64>> = kept
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(d, _)| d)
        .collect();
    out.sort();
    out
}

/// Oracle: every disk vector with coordinate sum at most `bound`, pruned.
///
/// For finite `order` the vertices all have coordinate sum at most
/// `arcs × order`: an Eulerian circuit of a vertex disk visits each
/// (arc, partial winding mod order) state at most once, since a repeated
/// state splits off a smaller disk.
pub fn brute_force_generators(
    sys: &ArcSystem,
    f: Factor,
    order: u64,
    bound: u64,
    exec: Execution,
) -> Vec<Vec<i64>> {
    fn rec(
        sys: &ArcSystem,
        f: Factor,
        order: u64,
        t: usize,
        left: i64,
        v: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if t == v.len() {
            if is_disk(sys, f, v, order) {
                out.push(v.clone());
            }
            return;
        }
        for x in 0..=left {
            v[t] = x;
            rec(sys, f, order, t + 1, left - x, v, out);
        }
        v[t] = 0;
    }
    let mut out = Vec::new();
    let mut v = vec![0; sys.turns(f).len()];
    rec(sys, f, order, 0, bound as i64, &mut v, &mut out);
    prune_generators(out, exec)
}

/// Splits a balanced non-negative integer vector into simple loops with
/// multiplicities. Returns `None` if the vector is not balanced or negative.
pub fn decompose_into_loops(
    sys: &ArcSystem,
    f: Factor,
    v: &[i64],
) -> Option<Vec<(SimpleLoop, i64)>> {
    if v.iter().any(|&x| x < 0) || !sys.is_balanced_int(f, v) {
        return None;
    }
    let turns = sys.turns(f);
    let mut rest = v.to_vec();
    let mut out = Vec::new();
    while let Some(t0) = rest.iter().position(|&x| x > 0) {
        let mut path_arcs = vec![turns[t0].from];
        let mut path_turns = vec![t0];
        let mut cur = turns[t0].to;
        let start = loop {
            if let Some(p) = path_arcs.iter().position(|&a| a == cur) {
                break p;
            }
            path_arcs.push(cur);
            let t = (0..turns.len())
                .find(|&t| rest[t] > 0 && turns[t].from == cur)
                .expect("balanced support has an outgoing turn");
            path_turns.push(t);
            cur = turns[t].to;
        };
        let mut arcs = path_arcs[start..].to_vec();
        let mut cyc = path_turns[start..].to_vec();
        let m = cyc.iter().map(|&t| rest[t]).min().unwrap();
        for &t in &cyc {
            rest[t] -= m;
        }
        let r = (0..arcs.len()).min_by_key(|&i| arcs[i]).unwrap();
        arcs.rotate_left(r);
        cyc.rotate_left(r);
        out.push((
            SimpleLoop {
                factor: f,
                arcs,
                turns: cyc,
            },
            m,
        ));
    }
    Some(out)
}

/// `κ(v) = max Σ t_j` with `v − Σ t_j d_j` in the cone, `t >= 0`.
pub fn kappa(sys: &ArcSystem, v: &TurnVector, gens: &[Vec<i64>]) -> Result<Q, DiskError> {
    sys.check_dim(v)?;
    if v.coords.iter().any(|x| x.is_negative())
        || sys.boundary_map(v).iter().any(|x| !x.is_zero())
    {
        return Err(DiskError::OutsideCone);
    }
    let dim = v.coords.len();
    let mut p = LpProblem::new(dim);
    for (i, x) in v.coords.iter().enumerate() {
        p.set_rhs(i, x.clone());
    }
    for d in gens {
        let col = d
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, &x)| (i, qi(x)))
            .collect();
        p.add_variable(qi(1), col);
    }
    for i in 0..dim {
        p.add_variable(Q::zero(), vec![(i, qi(1))]);
    }
    let o = solve(&p);
    debug_assert_eq!(o.status, LpStatus::Optimal);
    Ok(o.objective)
}

/// Whether `point` is a convex combination of `points`.
pub fn in_convex_hull(point: &[Q], points: &[Vec<Q>]) -> bool {
    if points.is_empty() {
        return false;
    }
    let dim = point.len();
    let mut p = LpProblem::new(dim + 1);
    for (i, x) in point.iter().enumerate() {
        p.set_rhs(i, x.clone());
    }
    p.set_rhs(dim, qi(1));
    for v in points {
        let mut col: Vec<(usize, Q)> = v
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i, x.clone()))
            .collect();
        col.push((dim, qi(1)));
        p.add_variable(Q::zero(), col);
    }
    solve(&p).status == LpStatus::Optimal
}

/// Vertices of the convex hull of the integer points in the polytope
/// `conv(vertices) + cone(rays)`, which must be bounded. Sorted.
pub fn integer_hull(
    vertices: &[Vec<Q>],
    rays: &[Vec<Q>],
    limits: &Limits,
) -> Result<Vec<Vec<i64>>, DiskError> {
    if rays.iter().any(|r| r.iter().any(|x| !x.is_zero())) {
        return Err(DiskError::Unbounded);
    }
    let Some(first) = vertices.first() else {
        return Ok(Vec::new());
    };
    let dim = first.len();
    if vertices.iter().any(|v| v.len() != dim) {
        return Err(DiskError::Ragged);
    }
    if dim > limits.max_hull_dim {
        return Err(DiskError::DimensionCap {
            dim,
            cap: limits.max_hull_dim,
        });
    }
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    let mut count: usize = 1;
    for i in 0..dim {
        let min = vertices.iter().map(|v| &v[i]).min().unwrap().ceil();
        let max = vertices.iter().map(|v| &v[i]).max().unwrap().floor();
        let (a, b) = (
            min.to_integer().to_i64().ok_or(DiskError::ResourceLimit {
                limit: limits.max_hull_points,
            })?,
            max.to_integer().to_i64().ok_or(DiskError::ResourceLimit {
                limit: limits.max_hull_points,
            })?,
        );
        if a > b {
            return Ok(Vec::new());
        }
        count = count.saturating_mul((b - a + 1) as usize);
        lo.push(a);
        hi.push(b);
    }
    if count > limits.max_hull_points {
        return Err(DiskError::ResourceLimit {
            limit: limits.max_hull_points,
        });
    }
    let mut inside: Vec<Vec<i64>> = Vec::new();
    let mut p = lo.clone();
    loop {
        let pq: Vec<Q> = p.iter().map(|&x| qi(x)).collect();
        if in_convex_hull(&pq, vertices) {
            inside.push(p.clone());
        }
        let mut i = 0;
        while i < dim {
            if p[i] < hi[i] {
                p[i] += 1;
                break;
            }
            p[i] = lo[i];
            i += 1;
        }
        if i == dim {
            break;
        }
    }
    let as_q: Vec<Vec<Q>> = inside
        .iter()
        .map(|v| v.iter().map(|&x| qi(x)).collect())
        .collect();
    let mut hull: Vec<Vec<i64>> = (0..inside.len())
        .filter(|&i| {
            let others: Vec<Vec<Q>> = (0..inside.len())
                .filter(|&j| j != i)
                .map(|j| as_q[j].clone())
                .collect();
            !in_convex_hull(&as_q[i], &others)
        })
        .map(|i| inside[i].clone())
        .collect();
    hull.sort();
    Ok(hull)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcs::build_arc_system;
    use crate::chain::{normalize, parse_chain, Factors};
    use crate::rational::q;

    fn system(text: &str, oa: u64, ob: u64) -> ArcSystem {
        let f = Factors::ab(oa, ob).unwrap();
        build_arc_system(&normalize(&parse_chain(text, &f).unwrap()))
    }

    fn sys_named(text: &str, names: [char; 2], orders: (u64, u64)) -> ArcSystem {
        let f = Factors::named(names, orders).unwrap();
        build_arc_system(&normalize(&parse_chain(text, &f).unwrap()))
    }

    fn gens(sys: &ArcSystem, f: Factor, k: u64) -> Vec<Vec<i64>> {
        enumerate_disk_generators(sys, f, k, &Limits::default(), Execution::Sequential)
            .unwrap()
            .generators
    }

    fn vec_of(sys: &ArcSystem, f: Factor, entries: &[(i64, i64, i64)]) -> Vec<i64> {
        let exp = |e: i64| sys.arcs(f).iter().position(|a| a.exponent == e).unwrap();
        let mut v = vec![0; sys.turns(f).len()];
        for &(x, y, c) in entries {
            v[sys.turn_id(f, exp(x), exp(y)).unwrap()] += c;
        }
        v
    }

    #[test]
    fn loops_single_arc() {
        let sys = system("ab", 0, 0);
        let l = simple_loops(&sys, Factor::A);
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].vector(&sys), vec![1]);
    }

    #[test]
    fn loops_two_arcs() {
        let sys = system("aba^-2b^-1", 0, 0);
        let l = simple_loops(&sys, Factor::A);
        assert_eq!(l.len(), 3);
        let mut lens: Vec<usize> = l.iter().map(|x| x.turns.len()).collect();
        lens.sort();
        assert_eq!(lens, vec![1, 1, 2]);
    }

    #[test]
    fn loops_self_loop_factor() {
        let sys = system("a^2 + a^3", 0, 0);
        assert_eq!(simple_loops(&sys, Factor::A).len(), 2);
    }

    #[test]
    fn loop_counts_complete_digraph() {
        // n arcs, every ordered pair: sum over j of C(n,j)(j-1)!
        let sys = system("abab^2a^-1b^3", 0, 0);
        assert_eq!(sys.arcs(Factor::A).len(), 3);
        assert_eq!(simple_loops(&sys, Factor::A).len(), 3 + 3 + 2);
    }

    #[test]
    fn membership() {
        let sys = system("[a,b]", 0, 0);
        let f = Factor::A;
        let two_cycle = vec_of(&sys, f, &[(1, -1, 1), (-1, 1, 1)]);
        for k in [0, 2, 3, 7] {
            assert!(is_disk(&sys, f, &two_cycle, k));
        }
        let sys1 = system("ab", 0, 0);
        assert!(is_disk(&sys1, f, &[3], 3));
        assert!(!is_disk(&sys1, f, &[1], 0));
        let sys2 = system("aba^-2b^-1", 0, 0);
        let v = vec_of(&sys2, f, &[(1, 1, 1), (-2, -2, 1)]);
        for k in [0, 2, 3, 5] {
            assert!(!is_disk(&sys2, f, &v, k));
        }
        let rational = TurnVector {
            factor: f,
            coords: vec![q(1, 2)],
        };
        assert_eq!(
            disk_membership(&sys1, &rational, 2),
            Err(DiskError::NonInteger)
        );
    }

    #[test]
    fn generators_single_arc() {
        let sys = system("ab", 0, 0);
        assert_eq!(gens(&sys, Factor::A, 2), vec![vec![2]]);
        assert_eq!(gens(&sys, Factor::A, 5), vec![vec![5]]);
    }

    #[test]
    fn generators_infinite_commutator() {
        let sys = sys_named("ata^-1t^-1", ['a', 't'], (0, 0));
        let f = Factor::B;
        assert_eq!(gens(&sys, f, 0), vec![vec_of(&sys, f, &[(1, -1, 1), (-1, 1, 1)])]);
    }

    #[test]
    fn prune_examples() {
        assert_eq!(
            prune_generators(vec![vec![2], vec![4]], Execution::Sequential),
            vec![vec![2]]
        );
        assert_eq!(
            prune_generators(vec![vec![1, 2, 3]], Execution::Sequential),
            vec![vec![1, 2, 3]]
        );
        // e dominates the midpoint of d1 and d2 (balanced: diagonal-only vectors)
        let d1 = vec![4, 0];
        let d2 = vec![0, 4];
        let e = vec![2, 2];
        assert_eq!(
            prune_generators(vec![d1.clone(), d2.clone(), e], Execution::Parallel),
            vec![d2, d1]
        );
    }

    #[test]
    fn brute_force_examples() {
        let sys = system("ab", 0, 0);
        assert_eq!(
            brute_force_generators(&sys, Factor::A, 2, 6, Execution::Sequential),
            vec![vec![2]]
        );
        let sys = system("[a,b]", 0, 0);
        let f = Factor::A;
        assert_eq!(
            brute_force_generators(&sys, f, 0, 2, Execution::Sequential),
            vec![vec_of(&sys, f, &[(1, -1, 1), (-1, 1, 1)])]
        );
        assert!(brute_force_generators(&sys, f, 3, 0, Execution::Sequential).is_empty());
    }

    #[test]
    fn enumeration_matches_brute_force_small() {
        for text in ["[a,b]", "aba^-2b^-1", "abab^-1"] {
            let sys = system(text, 0, 0);
            for f in Factor::BOTH {
                let n = sys.arcs(f).len() as u64;
                for k in 2..=5 {
                    assert_eq!(
                        gens(&sys, f, k),
                        brute_force_generators(&sys, f, k, n * k, Execution::Parallel),
                        "{text} {f:?} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn decomposition_reconstructs() {
        let sys = system("aba^-2b^-1a^3b^2", 0, 0);
        let f = Factor::A;
        for g in gens(&sys, f, 4) {
            let parts = decompose_into_loops(&sys, f, &g).unwrap();
            let loops = simple_loops(&sys, f);
            let mut sum = vec![0; g.len()];
            for (l, m) in parts {
                assert!(loops.contains(&l));
                for (s, x) in sum.iter_mut().zip(l.vector(&sys)) {
                    *s += m * x;
                }
            }
            assert_eq!(sum, g);
        }
    }

    #[test]
    fn kappa_examples() {
        let sys = system("[a,b]", 3, 0);
        let f = Factor::A;
        let g = gens(&sys, f, 3);
        let half = |v: Vec<i64>| TurnVector {
            factor: f,
            coords: v.iter().map(|&x| q(x, 2)).collect(),
        };
        let u = half(vec_of(&sys, f, &[(1, -1, 1), (-1, 1, 1), (1, 1, 1), (-1, -1, 1)]));
        assert_eq!(kappa(&sys, &u, &g).unwrap(), q(5, 6));
        assert_eq!(kappa(&sys, &TurnVector::zero(&sys, f), &g).unwrap(), qi(0));
        let sys = system("ab", 2, 0);
        let g = gens(&sys, f, 2);
        let v = TurnVector::from_ints(f, &[2]);
        assert_eq!(kappa(&sys, &v, &g).unwrap(), qi(1));
        let sys = system("[a,b]", 3, 0);
        let bad = TurnVector::from_ints(f, &vec_of(&sys, f, &[(1, -1, 1)]));
        assert_eq!(kappa(&sys, &bad, &g), Err(DiskError::OutsideCone));
    }

    #[test]
    fn hull_examples() {
        let l = Limits::default();
        let pts = |v: &[(i64, i64, i64, i64)]| -> Vec<Vec<Q>> {
            v.iter().map(|&(a, b, c, d)| vec![q(a, b), q(c, d)]).collect()
        };
        let square = pts(&[(0, 1, 0, 1), (3, 2, 0, 1), (0, 1, 3, 2), (3, 2, 3, 2)]);
        assert_eq!(
            integer_hull(&square, &[], &l).unwrap(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        let tri = pts(&[(0, 1, 0, 1), (5, 2, 0, 1), (0, 1, 5, 2)]);
        assert_eq!(
            integer_hull(&tri, &[], &l).unwrap(),
            vec![vec![0, 0], vec![0, 2], vec![2, 0]]
        );
        let empty = pts(&[(1, 3, 1, 3), (2, 3, 1, 3), (1, 3, 2, 3)]);
        assert!(integer_hull(&empty, &[], &l).unwrap().is_empty());
        assert_eq!(
            integer_hull(&tri, &[vec![qi(1), qi(0)]], &l),
            Err(DiskError::Unbounded)
        );
        let big = vec![vec![qi(0); 7]];
        assert!(matches!(
            integer_hull(&big, &[], &l),
            Err(DiskError::DimensionCap { .. })
        ));
    }

    #[test]
    fn node_cap_reported() {
        let sys = system("aba^-2b^-1a^3b^2", 0, 0);
        let tiny = Limits {
            max_nodes: 3,
            ..Limits::default()
        };
        assert!(matches!(
            enumerate_disk_generators(&sys, Factor::A, 6, &tiny, Execution::Sequential),
            Err(DiskError::ResourceLimit { limit: 3 })
        ));
    }
}
