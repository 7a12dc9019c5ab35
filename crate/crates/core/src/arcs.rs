//! Arcs and turns of a normalized chain.
//!
//! Each syllable of each word is an arc in its factor. A turn is an ordered
//! pair of arcs in the same factor; arcs of single-syllable words (self-loops)
//! only carry their diagonal turn, whose coordinate is a covering degree
//! rather than a count of cut arcs.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::chain::{Chain, Factor, Factors};
use crate::rational::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArcError {
    #[error("turn vector has a negative coordinate")]
    Negative,
    #[error("turn vector has {got} coordinates, factor has {want} turns")]
    Dimension { got: usize, want: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub factor: Factor,
    pub exponent: i64,
    pub word: usize,
    pub position: usize,
    pub self_loop: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Turn {
    pub from: usize,
    pub to: usize,
}

/// A rational vector on the turns of one factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnVector {
    pub factor: Factor,
    pub coords: Vec<Q>,
}

impl TurnVector {
    pub fn zero(sys: &ArcSystem, factor: Factor) -> Self {
        TurnVector {
            factor,
            coords: vec![Q::zero(); sys.turns(factor).len()],
        }
    }

    pub fn from_ints(factor: Factor, v: &[i64]) -> Self {
        TurnVector {
            factor,
            coords: v.iter().map(|&x| Q::from_integer(x.into())).collect(),
        }
    }

    /// Integer coordinates, if every coordinate is an integer.
    pub fn to_ints(&self) -> Option<Vec<i64>> {
        self.coords
            .iter()
            .map(|x| {
                if x.is_integer() {
                    i64::try_from(x.to_integer()).ok()
                } else {
                    None
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ArcSystem {
    factors: Factors,
    arcs: [Vec<Arc>; 2],
    turns: [Vec<Turn>; 2],
    turn_ids: [HashMap<(usize, usize), usize>; 2],
    next: [Vec<Option<usize>>; 2],
    prev: [Vec<Option<usize>>; 2],
    coefficients: Vec<Q>,
    /// arcs of each word in cyclic order, as (factor, arc id)
    word_arcs: Vec<Vec<(Factor, usize)>>,
}

pub fn build_arc_system(chain: &Chain) -> ArcSystem {
    let mut arcs: [Vec<Arc>; 2] = [Vec::new(), Vec::new()];
    let mut word_arcs = Vec::with_capacity(chain.terms.len());
    let mut coefficients = Vec::with_capacity(chain.terms.len());
    for (wi, (word, coef)) in chain.terms.iter().enumerate() {
        let self_loop = word.is_self_loop();
        let mut ids = Vec::with_capacity(word.len());
        for (pos, syl) in word.syllables().iter().enumerate() {
            let list = &mut arcs[syl.factor.index()];
            ids.push((syl.factor, list.len()));
            list.push(Arc {
                factor: syl.factor,
                exponent: syl.exp,
                word: wi,
                position: pos,
                self_loop,
            });
        }
        word_arcs.push(ids);
        coefficients.push(coef.clone());
    }

    let mut next: [Vec<Option<usize>>; 2] = [vec![None; arcs[0].len()], vec![None; arcs[1].len()]];
    let mut prev = next.clone();
    for ids in &word_arcs {
        if ids.len() < 2 {
            continue;
        }
        for i in 0..ids.len() {
            let (f, a) = ids[i];
            let (g, b) = ids[(i + 1) % ids.len()];
            debug_assert_ne!(f, g, "normalized words alternate factors");
            next[f.index()][a] = Some(b);
            prev[g.index()][b] = Some(a);
        }
    }

    let mut turns: [Vec<Turn>; 2] = [Vec::new(), Vec::new()];
    let mut turn_ids: [HashMap<(usize, usize), usize>; 2] = [HashMap::new(), HashMap::new()];
    for f in Factor::BOTH {
        let list = &arcs[f.index()];
        for (i, a) in list.iter().enumerate() {
            let targets: Vec<usize> = if a.self_loop {
                vec![i]
            } else {
                (0..list.len()).filter(|&j| !list[j].self_loop).collect()
            };
            for j in targets {
                turn_ids[f.index()].insert((i, j), turns[f.index()].len());
                turns[f.index()].push(Turn { from: i, to: j });
            }
        }
    }

    ArcSystem {
        factors: chain.factors,
        arcs,
        turns,
        turn_ids,
        next,
        prev,
        coefficients,
        word_arcs,
    }
}

impl ArcSystem {
    pub fn factors(&self) -> &Factors {
        &self.factors
    }

    pub fn order(&self, f: Factor) -> u64 {
        self.factors.order(f)
    }

    pub fn arcs(&self, f: Factor) -> &[Arc] {
        &self.arcs[f.index()]
    }

    pub fn turns(&self, f: Factor) -> &[Turn] {
        &self.turns[f.index()]
    }

    pub fn turn_id(&self, f: Factor, from: usize, to: usize) -> Option<usize> {
        self.turn_ids[f.index()].get(&(from, to)).copied()
    }

    pub fn next(&self, f: Factor, arc: usize) -> Option<usize> {
        self.next[f.index()][arc]
    }

    pub fn prev(&self, f: Factor, arc: usize) -> Option<usize> {
        self.prev[f.index()][arc]
    }

    pub fn coefficient(&self, word: usize) -> &Q {
        &self.coefficients[word]
    }

    pub fn word_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn word_arcs(&self, word: usize) -> &[(Factor, usize)] {
        &self.word_arcs[word]
    }

    pub fn is_self_loop_turn(&self, f: Factor, t: usize) -> bool {
        let turn = self.turns(f)[t];
        self.arcs(f)[turn.from].self_loop
    }

    /// Exponents of the two endpoints of a turn.
    pub fn turn_exponents(&self, f: Factor, t: usize) -> (i64, i64) {
        let turn = self.turns(f)[t];
        let arcs = self.arcs(f);
        (arcs[turn.from].exponent, arcs[turn.to].exponent)
    }

    /// Gluing partner: the A-turn `(x, y)` cut out between the end of `x`
    /// and the start of `y` is the B-turn `(prev(y), next(x))`, and
    /// symmetrically. `None` for self-loop diagonals.
    pub fn partner(&self, f: Factor, t: usize) -> Option<usize> {
        let turn = self.turns(f)[t];
        let from = self.prev(f, turn.to)?;
        let to = self.next(f, turn.from)?;
        self.turn_id(f.other(), from, to)
    }

    /// `∂(x, y) = x - y`, as a vector on the arcs of the factor.
    pub fn boundary_map(&self, v: &TurnVector) -> Vec<Q> {
        let f = v.factor;
        let mut out = vec![Q::zero(); self.arcs(f).len()];
        for (t, x) in self.turns(f).iter().zip(&v.coords) {
            if x.is_zero() || t.from == t.to {
                continue;
            }
            out[t.from] += x;
            out[t.to] -= x;
        }
        out
    }

    /// `Σ v(x,y) (t_x + t_y) / 2`: total exponent of the encoded boundary.
    pub fn winding(&self, v: &TurnVector) -> Q {
        let f = v.factor;
        let twice = (0..self.turns(f).len())
            .filter(|&t| !v.coords[t].is_zero())
            .fold(Q::zero(), |acc, t| {
                let (a, b) = self.turn_exponents(f, t);
                acc + &v.coords[t] * Q::from_integer((a + b).into())
            });
        twice / Q::from_integer(2.into())
    }

    /// Number of cut arcs: all coordinates except self-loop diagonals.
    pub fn turn_norm(&self, v: &TurnVector) -> Result<Q, ArcError> {
        let f = v.factor;
        self.check_dim(v)?;
        if v.coords.iter().any(|x| x.is_negative()) {
            return Err(ArcError::Negative);
        }
        Ok((0..v.coords.len())
            .filter(|&t| !self.is_self_loop_turn(f, t))
            .fold(Q::zero(), |acc, t| acc + &v.coords[t]))
    }

    pub fn check_dim(&self, v: &TurnVector) -> Result<(), ArcError> {
        let want = self.turns(v.factor).len();
        if v.coords.len() != want {
            return Err(ArcError::Dimension {
                got: v.coords.len(),
                want,
            });
        }
        Ok(())
    }

    /// Norm weight of a single turn (0 or 1).
    pub fn turn_weight(&self, f: Factor, t: usize) -> i64 {
        if self.is_self_loop_turn(f, t) {
            0
        } else {
            1
        }
    }

    /// `2 · winding` of an integer vector.
    pub fn winding_twice_int(&self, f: Factor, v: &[i64]) -> i64 {
        v.iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(t, &x)| {
                let (a, b) = self.turn_exponents(f, t);
                x * (a + b)
            })
            .sum()
    }

    pub fn is_balanced_int(&self, f: Factor, v: &[i64]) -> bool {
        let mut bal = vec![0i64; self.arcs(f).len()];
        for (t, &x) in self.turns(f).iter().zip(v) {
            bal[t.from] += x;
            bal[t.to] -= x;
        }
        bal.iter().all(|&b| b == 0)
    }

    pub fn norm_int(&self, f: Factor, v: &[i64]) -> i64 {
        v.iter()
            .enumerate()
            .map(|(t, &x)| x * self.turn_weight(f, t))
            .sum()
    }

    pub fn arc_label(&self, f: Factor, arc: usize) -> String {
        let a = &self.arcs(f)[arc];
        let name = self.factors.spec(f).name;
        if a.exponent == 1 {
            format!("{name}#{arc}")
        } else {
            format!("{name}^{}#{arc}", a.exponent)
        }
    }

    pub fn turn_label(&self, f: Factor, t: usize) -> String {
        let turn = self.turns(f)[t];
        format!(
            "({},{})",
            self.arc_label(f, turn.from),
            self.arc_label(f, turn.to)
        )
    }

    pub fn dump(&self) -> ArcSystemDump {
        let side = |f: Factor| FactorDump {
            name: self.factors.spec(f).name,
            order: self.factors.order(f),
            arcs: self.arcs(f).to_vec(),
            turns: self.turns(f).iter().map(|t| [t.from, t.to]).collect(),
            labels: (0..self.turns(f).len())
                .map(|t| self.turn_label(f, t))
                .collect(),
        };
        let partners = (0..self.turns(Factor::A).len())
            .filter_map(|t| self.partner(Factor::A, t).map(|p| [t, p]))
            .collect();
        ArcSystemDump {
            a: side(Factor::A),
            b: side(Factor::B),
            partners,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorDump {
    pub name: char,
    pub order: u64,
    pub arcs: Vec<Arc>,
    pub turns: Vec<[usize; 2]>,
    pub labels: Vec<String>,
}

/// JSON view of an arc system.
#[derive(Clone, Debug, Serialize)]
pub struct ArcSystemDump {
    pub a: FactorDump,
    pub b: FactorDump,
    /// `[A-turn, B-turn]` gluing pairs
    pub partners: Vec<[usize; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{normalize, parse_chain};
    use crate::rational::{q, qi};

    fn system(text: &str, oa: u64, ob: u64) -> ArcSystem {
        let f = Factors::ab(oa, ob).unwrap();
        build_arc_system(&normalize(&parse_chain(text, &f).unwrap()))
    }

    fn tv(sys: &ArcSystem, f: Factor, entries: &[((usize, usize), Q)]) -> TurnVector {
        let mut v = TurnVector::zero(sys, f);
        for ((x, y), c) in entries {
            v.coords[sys.turn_id(f, *x, *y).unwrap()] += c;
        }
        v
    }

    fn arc_with_exp(sys: &ArcSystem, f: Factor, e: i64) -> usize {
        sys.arcs(f).iter().position(|a| a.exponent == e).unwrap()
    }

    #[test]
    fn four_syllable_word() {
        let sys = system("abab^-1", 0, 0);
        let a_exps: Vec<i64> = sys.arcs(Factor::A).iter().map(|a| a.exponent).collect();
        let mut b_exps: Vec<i64> = sys.arcs(Factor::B).iter().map(|a| a.exponent).collect();
        b_exps.sort();
        assert_eq!(a_exps, vec![1, 1]);
        assert_eq!(b_exps, vec![-1, 1]);
        assert_eq!(sys.turns(Factor::A).len(), 4);
    }

    #[test]
    fn commutator_turns() {
        let sys = system("[a,b]", 0, 0);
        assert_eq!(sys.arcs(Factor::A).len(), 2);
        assert_eq!(sys.turns(Factor::A).len(), 4);
        for f in Factor::BOTH {
            for (i, a) in sys.arcs(f).iter().enumerate() {
                let n = sys.next(f, i).unwrap();
                assert_eq!(sys.prev(f.other(), n), Some(i));
                assert!(!a.self_loop);
            }
        }
    }

    #[test]
    fn self_loops_only_diagonal() {
        let sys = system("a^2 + a^3", 0, 0);
        assert_eq!(sys.arcs(Factor::A).len(), 2);
        assert!(sys.arcs(Factor::A).iter().all(|a| a.self_loop));
        assert_eq!(sys.turns(Factor::A).len(), 2);
        assert!(sys.turns(Factor::A).iter().all(|t| t.from == t.to));
        assert!(sys.arcs(Factor::B).is_empty());
    }

    #[test]
    fn partner_is_involution() {
        for text in ["[a,b]", "aba^-2b^-2 + ab", "a^2ba^-1b^-1a^-2bab^-1", "ab + a^2 + b"] {
            let sys = system(text, 0, 0);
            for f in Factor::BOTH {
                for t in 0..sys.turns(f).len() {
                    match sys.partner(f, t) {
                        Some(p) => assert_eq!(sys.partner(f.other(), p), Some(t)),
                        None => assert!(sys.is_self_loop_turn(f, t)),
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_and_winding() {
        let sys = system("[a,b]", 0, 0);
        let f = Factor::A;
        let a = arc_with_exp(&sys, f, 1);
        let ai = arc_with_exp(&sys, f, -1);
        let v = tv(&sys, f, &[((a, ai), qi(1))]);
        let d = sys.boundary_map(&v);
        assert_eq!(d[a], qi(1));
        assert_eq!(d[ai], qi(-1));
        let v = tv(&sys, f, &[((a, ai), qi(1)), ((ai, a), qi(1))]);
        assert!(sys.boundary_map(&v).iter().all(|x| x.is_zero()));
        assert_eq!(sys.winding(&v), qi(0));
        assert_eq!(sys.turn_norm(&v).unwrap(), qi(2));
        let v = tv(&sys, f, &[((a, a), qi(2))]);
        assert!(sys.boundary_map(&v).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn winding_half_integer_on_open_turn() {
        let sys = system("a^2 b a^-1 b^-1", 0, 0);
        let f = Factor::A;
        let a2 = arc_with_exp(&sys, f, 2);
        let ai = arc_with_exp(&sys, f, -1);
        let v = tv(&sys, f, &[((a2, ai), qi(1))]);
        assert_eq!(sys.winding(&v), q(1, 2));
    }

    #[test]
    fn winding_diagonal() {
        let sys = system("ab", 0, 0);
        let v = tv(&sys, Factor::A, &[((0, 0), qi(3))]);
        assert_eq!(sys.winding(&v), qi(3));
        assert_eq!(sys.turn_norm(&v).unwrap(), qi(3));
    }

    #[test]
    fn norm_skips_self_loop_diagonal() {
        let sys = system("a^2 + ab", 0, 0);
        let f = Factor::A;
        let sl = sys.arcs(f).iter().position(|a| a.self_loop).unwrap();
        let v = tv(&sys, f, &[((sl, sl), qi(5))]);
        assert_eq!(sys.turn_norm(&v).unwrap(), qi(0));
        let mut neg = TurnVector::zero(&sys, f);
        neg.coords[0] = qi(-1);
        assert_eq!(sys.turn_norm(&neg), Err(ArcError::Negative));
    }

    #[test]
    fn dump_serializes() {
        let sys = system("[a,b]", 3, 0);
        let json = serde_json::to_value(sys.dump()).unwrap();
        assert_eq!(json["a"]["turns"].as_array().unwrap().len(), 4);
        assert_eq!(json["partners"].as_array().unwrap().len(), 4);
    }
}
