//! Rational chains over `<a> * <b>` with cyclic factors.
//!
//! Grammar accepted by [`parse_chain`]:
//!
//! ```text
//! chain  := [sign] term { ('+' | '-') term }
//! term   := [coef '*'] word
//! coef   := int [ '/' int ]
//! word   := atom { atom }
//! atom   := gen [ '^' int ] | '[' word ',' word ']' [ '^' int ]
//! ```
//!
//! A lowercase letter is a generator, the matching uppercase letter its
//! inverse. Whitespace is ignored.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{fmt_q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("unknown generator '{0}'")]
    UnknownGenerator(char),
    #[error("more than two distinct generators ({0}); only two-factor free products are supported")]
    TooManyGenerators(String),
    #[error("zero exponent at position {0}")]
    ZeroExponent(usize),
    #[error("malformed rational coefficient '{0}'")]
    MalformedRational(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid order {0}: must be 0 (infinite cyclic) or at least 2")]
    InvalidOrder(u64),
    #[error("factor names must be distinct lowercase letters")]
    BadFactorNames,
}

/// Which of the two free factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Factor {
    A,
    B,
}

impl Factor {
    pub const BOTH: [Factor; 2] = [Factor::A, Factor::B];

    pub fn index(self) -> usize {
        match self {
            Factor::A => 0,
            Factor::B => 1,
        }
    }

    pub fn other(self) -> Factor {
        match self {
            Factor::A => Factor::B,
            Factor::B => Factor::A,
        }
    }
}

/// A cyclic factor: generator symbol and order (0 means infinite cyclic).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FactorSpec {
    pub name: char,
    pub order: u64,
}

impl FactorSpec {
    pub fn new(name: char, order: u64) -> Result<Self, ChainError> {
        if order == 1 {
            return Err(ChainError::InvalidOrder(order));
        }
        if !name.is_ascii_lowercase() {
            return Err(ChainError::BadFactorNames);
        }
        Ok(FactorSpec { name, order })
    }

    pub fn is_finite(&self) -> bool {
        self.order != 0
    }

    /// Reduces an exponent to the representative of least absolute value,
    /// ties going to the positive one.
    pub fn reduce(&self, exp: i64) -> i64 {
        if self.order == 0 {
            return exp;
        }
        let k = self.order as i64;
        let r = exp.rem_euclid(k);
        if r <= k - r {
            r
        } else {
            r - k
        }
    }

    /// Order of `g^exp`, or `None` when it is infinite.
    pub fn power_order(&self, exp: i64) -> Option<u64> {
        if self.order == 0 {
            return None;
        }
        let g = (exp.unsigned_abs()).gcd(&self.order);
        Some(self.order / g)
    }
}

/// The two factors of the free product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Factors(pub [FactorSpec; 2]);

impl Factors {
    pub fn new(a: FactorSpec, b: FactorSpec) -> Result<Self, ChainError> {
        if a.name == b.name {
            return Err(ChainError::BadFactorNames);
        }
        Ok(Factors([a, b]))
    }

    /// Factors named `names` with the given orders.
    pub fn named(names: [char; 2], orders: (u64, u64)) -> Result<Self, ChainError> {
        Factors::new(
            FactorSpec::new(names[0], orders.0)?,
            FactorSpec::new(names[1], orders.1)?,
        )
    }

    /// Factors `a` and `b`.
    pub fn ab(order_a: u64, order_b: u64) -> Result<Self, ChainError> {
        Factors::named(['a', 'b'], (order_a, order_b))
    }

    pub fn spec(&self, f: Factor) -> &FactorSpec {
        &self.0[f.index()]
    }

    pub fn order(&self, f: Factor) -> u64 {
        self.0[f.index()].order
    }

    pub fn orders(&self) -> (u64, u64) {
        (self.0[0].order, self.0[1].order)
    }

    pub fn names(&self) -> [char; 2] {
        [self.0[0].name, self.0[1].name]
    }

    pub fn lookup(&self, c: char) -> Option<(Factor, i64)> {
        let lower = c.to_ascii_lowercase();
        let sign = if c.is_ascii_uppercase() { -1 } else { 1 };
        Factor::BOTH
            .into_iter()
            .find(|f| self.spec(*f).name == lower)
            .map(|f| (f, sign))
    }

    pub fn with_orders(&self, order_a: u64, order_b: u64) -> Result<Self, ChainError> {
        Factors::named(self.names(), (order_a, order_b))
    }
}

/// Generator names for a chain string: the distinct letters in alphabetical
/// order, padded with the next unused letter when fewer than two appear.
pub fn infer_generators(text: &str) -> Result<[char; 2], ChainError> {
    let mut seen: Vec<char> = Vec::new();
    for c in text.chars().filter(|c| c.is_ascii_alphabetic()) {
        let l = c.to_ascii_lowercase();
        if !seen.contains(&l) {
            seen.push(l);
        }
    }
    if seen.len() > 2 {
        return Err(ChainError::TooManyGenerators(seen.iter().collect()));
    }
    seen.sort_unstable();
    let pad = |taken: &[char]| ('a'..='z').find(|c| !taken.contains(c)).unwrap();
    while seen.len() < 2 {
        let c = pad(&seen);
        seen.push(c);
    }
    seen.sort_unstable();
    Ok([seen[0], seen[1]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Syllable {
    pub factor: Factor,
    pub exp: i64,
}

/// A cyclic word. After normalization consecutive syllables (cyclically)
/// alternate between the factors, unless the word has a single syllable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Word(pub Vec<Syllable>);

impl Word {
    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_self_loop(&self) -> bool {
        self.0.len() == 1
    }

    pub fn inverse(&self) -> Word {
        Word(
            self.0
                .iter()
                .rev()
                .map(|s| Syllable {
                    factor: s.factor,
                    exp: -s.exp,
                })
                .collect(),
        )
    }

    pub fn rotate(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        Word(v)
    }

    /// Total exponent of the syllables lying in factor `f`.
    pub fn exponent_sum(&self, f: Factor) -> i64 {
        self.0.iter().filter(|s| s.factor == f).map(|s| s.exp).sum()
    }

    /// Reduces exponents, merges cyclically adjacent syllables of the same
    /// factor and picks the lexicographically least rotation.
    pub fn reduced(&self, factors: &Factors) -> Word {
        let reduce = |s: Syllable| Syllable {
            factor: s.factor,
            exp: factors.spec(s.factor).reduce(s.exp),
        };
        let mut stack: Vec<Syllable> = Vec::with_capacity(self.0.len());
        for &s in &self.0 {
            let s = reduce(s);
            if s.exp == 0 {
                continue;
            }
            stack.push(s);
            while stack.len() >= 2 {
                let n = stack.len();
                if stack[n - 1].factor != stack[n - 2].factor {
                    break;
                }
                let top = stack.pop().unwrap();
                let prev = stack.pop().unwrap();
                let merged = reduce(Syllable {
                    factor: top.factor,
                    exp: prev.exp + top.exp,
                });
                if merged.exp != 0 {
                    stack.push(merged);
                }
            }
        }
        // cyclic wrap-around
        while stack.len() >= 2 && stack[0].factor == stack[stack.len() - 1].factor {
            let last = stack.pop().unwrap();
            let merged = reduce(Syllable {
                factor: last.factor,
                exp: stack[0].exp + last.exp,
            });
            if merged.exp == 0 {
                stack.remove(0);
            } else {
                stack[0] = merged;
            }
        }
        Word(stack).canonical_rotation()
    }

    fn canonical_rotation(&self) -> Word {
        let n = self.0.len();
        if n <= 1 {
            return self.clone();
        }
        (0..n)
            .map(|k| self.rotate(k))
            .min()
            .expect("nonempty word")
    }

    pub fn render(&self, factors: &Factors) -> String {
        let mut out = String::new();
        for s in &self.0 {
            out.push(factors.spec(s.factor).name);
            if s.exp != 1 {
                out.push('^');
                out.push_str(&s.exp.to_string());
            }
        }
        out
    }
}

/// A finite rational combination of cyclic words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub factors: Factors,
    pub terms: Vec<(Word, Q)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalizeWarning {
    /// A single-syllable word in a finite factor; it vanishes in `B_1^H`.
    DroppedTorsion(String),
}

impl fmt::Display for NormalizeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizeWarning::DroppedTorsion(w) => {
                write!(f, "dropped torsion term '{w}' (zero in B1H)")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Homology {
    Trivial,
    Nontrivial,
}

impl Chain {
    pub fn empty(factors: Factors) -> Chain {
        Chain {
            factors,
            terms: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same words and coefficients over different factor orders.
    pub fn with_orders(&self, order_a: u64, order_b: u64) -> Result<Chain, ChainError> {
        Ok(Chain {
            factors: self.factors.with_orders(order_a, order_b)?,
            terms: self.terms.clone(),
        })
    }

    pub fn scaled(&self, by: &Q) -> Chain {
        Chain {
            factors: self.factors,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c * by))
                .collect(),
        }
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return String::new();
        }
        self.terms
            .iter()
            .map(|(w, c)| {
                let word = w.render(&self.factors);
                if c.is_one() {
                    word
                } else {
                    format!("{}*{}", fmt_q(c), word)
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn normalize(chain: &Chain) -> Chain {
    normalize_with_warnings(chain).0
}

pub fn normalize_with_warnings(chain: &Chain) -> (Chain, Vec<NormalizeWarning>) {
    let factors = &chain.factors;
    let mut warnings = Vec::new();
    let mut signed: BTreeMap<Word, Q> = BTreeMap::new();
    for (word, coef) in &chain.terms {
        if coef.is_zero() {
            continue;
        }
        // w and -w^-1 are the same class; one conjugate to its inverse is zero
        let w = word.reduced(factors);
        if w.is_empty() {
            continue;
        }
        if w.is_self_loop() && factors.spec(w.0[0].factor).is_finite() {
            warnings.push(NormalizeWarning::DroppedTorsion(w.render(factors)));
            continue;
        }
        let inv = w.inverse().reduced(factors);
        match w.cmp(&inv) {
            Ordering::Equal => continue,
            Ordering::Less => *signed.entry(w).or_insert_with(Q::zero) += coef,
            Ordering::Greater => *signed.entry(inv).or_insert_with(Q::zero) -= coef,
        }
    }
    let mut acc: BTreeMap<Word, Q> = BTreeMap::new();
    for (mut w, mut c) in signed {
        if c.is_zero() || w.is_empty() {
            continue;
        }
        if c.is_negative() {
            w = w.inverse().reduced(factors);
            c = -c;
        }
        *acc.entry(w).or_insert_with(Q::zero) += c;
    }
    let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    (
        Chain {
            factors: *factors,
            terms,
        },
        warnings,
    )
}

/// Real-homology triviality: every infinite-order factor has weighted
/// exponent sum zero. Finite factors impose nothing.
pub fn homological_check(chain: &Chain) -> Homology {
    for f in Factor::BOTH {
        if chain.factors.spec(f).is_finite() {
            continue;
        }
        let total = chain.terms.iter().fold(Q::zero(), |acc, (w, c)| {
            acc + c * Q::from_integer(w.exponent_sum(f).into())
        });
        if !total.is_zero() {
            return Homology::Nontrivial;
        }
    }
    Homology::Trivial
}

pub fn parse_chain(text: &str, factors: &Factors) -> Result<Chain, ChainError> {
    let mut p = Parser {
        chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
        factors,
    };
    let terms = p.chain()?;
    Ok(Chain {
        factors: *factors,
        terms,
    })
}

/// Parses with generator names inferred from the text.
pub fn parse_chain_auto(text: &str, orders: (u64, u64)) -> Result<Chain, ChainError> {
    let names = infer_generators(text)?;
    parse_chain(text, &Factors::named(names, orders)?)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    factors: &'a Factors,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn syntax<T>(&self, msg: &str) -> Result<T, ChainError> {
        Err(ChainError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn chain(&mut self) -> Result<Vec<(Word, Q)>, ChainError> {
        let mut terms = Vec::new();
        if self.chars.is_empty() {
            return Ok(terms);
        }
        let mut sign = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -1
            }
            Some('+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let (word, coef) = self.term()?;
            terms.push((word, if sign < 0 { -coef } else { coef }));
            match self.peek() {
                None => break,
                Some('+') => sign = 1,
                Some('-') => sign = -1,
                Some(_) => return self.syntax("expected '+' or '-'"),
            }
            self.pos += 1;
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<(Word, Q), ChainError> {
        let coef = if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let start = self.pos;
            while self
                .peek()
                .is_some_and(|c| c.is_ascii_digit() || c == '/')
            {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            if self.peek() != Some('*') {
                return self.syntax("expected '*' after coefficient");
            }
            self.pos += 1;
            crate::rational::parse_q(&text).ok_or(ChainError::MalformedRational(text))?
        } else {
            Q::one()
        };
        let word = self.word()?;
        if word.is_empty() {
            return self.syntax("expected a word");
        }
        Ok((Word(word), coef))
    }

    fn word(&mut self) -> Result<Vec<Syllable>, ChainError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() {
                self.pos += 1;
                let (factor, sign) = self
                    .factors
                    .lookup(c)
                    .ok_or(ChainError::UnknownGenerator(c))?;
                let exp = self.exponent()?;
                out.push(Syllable {
                    factor,
                    exp: sign * exp,
                });
            } else if c == '[' {
                self.pos += 1;
                let x = self.word()?;
                if self.peek() != Some(',') || x.is_empty() {
                    return self.syntax("expected '[word,word]'");
                }
                self.pos += 1;
                let y = self.word()?;
                if self.peek() != Some(']') || y.is_empty() {
                    return self.syntax("expected ']'");
                }
                self.pos += 1;
                let (x, y) = (Word(x), Word(y));
                let mut comm = x.0.clone();
                comm.extend_from_slice(&y.0);
                comm.extend_from_slice(&x.inverse().0);
                comm.extend_from_slice(&y.inverse().0);
                let power = self.exponent()?;
                let base = if power < 0 { Word(comm).inverse().0 } else { comm };
                for _ in 0..power.unsigned_abs() {
                    out.extend_from_slice(&base);
                }
            } else {
                break;
            }
        }
        Ok(out)
    }

    /// Optional `^k`; returns 1 when absent.
    fn exponent(&mut self) -> Result<i64, ChainError> {
        if self.peek() != Some('^') {
            return Ok(1);
        }
        self.pos += 1;
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let k: i64 = match text.parse() {
            Ok(k) => k,
            Err(_) => return self.syntax("expected an integer exponent"),
        };
        if k == 0 {
            return Err(ChainError::ZeroExponent(start));
        }
        Ok(k)
    }
}
