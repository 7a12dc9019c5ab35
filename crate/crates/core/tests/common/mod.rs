#![allow(dead_code)]

use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::Rng;

use sclcone::arcs::{build_arc_system, ArcSystem};
use sclcone::chain::{normalize, parse_chain_auto, Chain, Factor};
use sclcone::disks::brute_force_generators;
use sclcone::engine::{build_program, compute_scl_with, EngineOptions, SclResult, Strategy};
use sclcone::par::Execution;
use sclcone::rational::{dot, qi, Q};

pub fn value(chain: &str, orders: (u64, u64)) -> Option<Q> {
    value_with(chain, orders, Strategy::Lazy)
}

pub fn value_with(chain: &str, orders: (u64, u64), strategy: Strategy) -> Option<Q> {
    let c = parse_chain_auto(chain, orders).expect("chain parses");
    let opts = EngineOptions {
        strategy,
        ..EngineOptions::default()
    };
    compute_scl_with(&c, &opts).expect("engine succeeds").value
}

/// All vertex disk vectors of a finite factor, by exhaustive search up to
/// the `arcs × order` coordinate sum.
pub fn all_generators(sys: &ArcSystem, f: Factor) -> Vec<Vec<i64>> {
    let order = sys.order(f);
    assert!(order > 0, "exhaustive generators need a finite factor");
    let bound = sys.arcs(f).len() as u64 * order;
    brute_force_generators(sys, f, order, bound, Execution::Sequential)
}

/// Solves the square system `m x = b` exactly; `None` if singular.
fn solve_square(mut m: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let k = &m[r][c] / &m[c][c];
                for j in c..n {
                    let t = &k * &m[c][j];
                    m[r][j] -= t;
                }
                let t = &k * &b[c];
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &m[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// `max Σ s_j` subject to `Σ s_j visits(d_j) ≤ 1` per arc, computed as the
/// dual `min Σ u` over `visits(d)·u ≥ 1, u ≥ 0` by vertex enumeration.
pub fn disk_packing(sys: &ArcSystem, f: Factor) -> Q {
    let n = sys.arcs(f).len();
    let turns = sys.turns(f);
    let mut cons: Vec<(Vec<Q>, Q)> = all_generators(sys, f)
        .iter()
        .map(|g| {
            let mut visits = vec![Q::zero(); n];
            for (t, &x) in g.iter().enumerate() {
                visits[turns[t].from] += qi(x);
            }
            (visits, Q::one())
        })
        .collect();
    for i in 0..n {
        let mut e = vec![Q::zero(); n];
        e[i] = Q::one();
        cons.push((e, Q::zero()));
    }
    let mut best: Option<Q> = None;
    for s in subsets(cons.len(), n) {
        let m = s.iter().map(|&i| cons[i].0.clone()).collect();
        let b = s.iter().map(|&i| cons[i].1.clone()).collect();
        let Some(u) = solve_square(m, b) else { continue };
        if cons.iter().all(|(a, rhs)| dot(a, &u) >= *rhs) {
            let obj: Q = u.iter().sum();
            if best.as_ref().is_none_or(|b| obj < *b) {
                best = Some(obj);
            }
        }
    }
    best.expect("packing dual is bounded and feasible")
}

/// Lower bound for a single cyclic word from packing disks on each side
/// independently, ignoring how the two sides glue.
pub fn packing_lower_bound(word: &str, orders: (u64, u64)) -> Q {
    let c = normalize(&parse_chain_auto(word, orders).unwrap());
    assert_eq!(c.terms.len(), 1, "single word expected");
    assert!(c.terms[0].1.is_one());
    let sys = build_arc_system(&c);
    let m = sys.arcs(Factor::A).len() as i64;
    (qi(m) - disk_packing(&sys, Factor::A) - disk_packing(&sys, Factor::B)) / qi(2)
}

/// Checks a finite result against the full program over every vertex disk:
/// the reported glued pair is feasible with objective `-2 scl`, and the
/// reported dual prices every column of the full program non-positively.
pub fn full_certificate(chain: &Chain, r: &SclResult) -> bool {
    let norm = normalize(chain);
    let sys = build_arc_system(&norm);
    let gens = [all_generators(&sys, Factor::A), all_generators(&sys, Factor::B)];
    let full = build_program(&sys, [&gens[0], &gens[1]]);
    let p = &full.problem;
    if r.dual.len() != p.rows() {
        return false;
    }
    let dual_ok = (0..p.vars()).all(|j| p.column_dot(j, &r.dual) >= p.objective()[j]);
    let scl = r.value.clone().unwrap();
    let strong = dot(p.rhs(), &r.dual) == -qi(2) * &scl;

    // primal: residual w = v - Σ s d, placed in the reported program's layout
    let used = [&r.disks[0], &r.disks[1]];
    let vecs: [Vec<Vec<i64>>; 2] = [
        used[0].iter().map(|(d, _)| d.clone()).collect(),
        used[1].iter().map(|(d, _)| d.clone()).collect(),
    ];
    let prog = build_program(&sys, [&vecs[0], &vecs[1]]);
    let pair = r.primal.as_ref().unwrap();
    let mut x = vec![Q::zero(); prog.problem.vars()];
    for f in Factor::BOTH {
        let mut w = pair[f.index()].coords.clone();
        for (d, s) in used[f.index()] {
            for (t, &m) in d.iter().enumerate() {
                w[t] -= s * qi(m);
            }
        }
        if w.iter().any(Signed::is_negative) {
            return false;
        }
        for (t, wt) in w.into_iter().enumerate() {
            x[prog.residual_column(f, t)] = wt;
        }
    }
    let first_disk = prog.problem.vars() - used[0].len() - used[1].len();
    for (k, (_, s)) in used[0].iter().chain(used[1].iter()).enumerate() {
        x[first_disk + k] = s.clone();
    }
    let feasible = x.iter().all(|v| !v.is_negative()) && prog.problem.apply(&x) == prog.problem.rhs();
    let primal_obj = dot(prog.problem.objective(), &x) == -qi(2) * &scl;
    dual_ok && strong && feasible && primal_obj
}

/// Random cyclic word alternating between `a` and `b` syllables, with every
/// exponent nontrivial at the given orders (|e| <= 3 in ℤ factors).
pub fn random_word(rng: &mut StdRng, syllable_pairs: usize, orders: (u64, u64)) -> String {
    let mut s = String::new();
    for _ in 0..syllable_pairs {
        for (g, o) in [('a', orders.0), ('b', orders.1)] {
            let max = if o == 0 { 3 } else { (o as i64 - 1).min(3) };
            let mut e: i64 = 0;
            while e == 0 || (o > 0 && e.rem_euclid(o as i64) == 0) {
                e = rng.gen_range(-max..=max);
            }
            s.push_str(&format!("{g}^{e}"));
        }
    }
    s
}

/// Random null-homologous chain at the given orders: a word plus, if
/// needed, a balancing word so the exponent sums vanish in ℤ factors.
pub fn random_chain(rng: &mut StdRng, orders: (u64, u64)) -> String {
    let pairs = rng.gen_range(1..=2);
    let w = random_word(rng, pairs, orders);
    let c = parse_chain_auto(&w, (0, 0)).unwrap();
    let (ea, eb) = (
        c.terms[0].0.exponent_sum(Factor::A),
        c.terms[0].0.exponent_sum(Factor::B),
    );
    let needs = |e: i64, o: u64| e != 0 && o == 0;
    if !needs(ea, orders.0) && !needs(eb, orders.1) {
        return w;
    }
    let mut fix = String::new();
    if ea != 0 {
        fix.push_str(&format!("a^{}", -ea));
    }
    if eb != 0 {
        fix.push_str(&format!("b^{}", -eb));
    }
    format!("{w} + {fix}")
}
