//! Integral Heisenberg group and the cyclic-word exponent sets `S_{u,v}`.
//!
//! Words are over `{a,b,c}` with `a=(1,0,0)`, `b=(0,1,0)`, `c=(-1,-1,0)`, so
//! every word with equal letter counts multiplies out to a central element
//! `(0,0,f(w))`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Mul;

use thiserror::Error;

use crate::par::{self, Execution};

pub const DEFAULT_MAX_UV: u32 = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeisenbergError {
    #[error("u + v = {0} exceeds the enumeration cap {1}")]
    TooLarge(u32, u32),
    #[error("unequal letter counts in {0:?}")]
    Unbalanced(String),
    #[error("letter {0:?} is not one of a, b, c")]
    Letter(char),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct HeisenbergElement {
    pub p: i64,
    pub q: i64,
    pub r: i64,
}

impl HeisenbergElement {
    pub const IDENTITY: HeisenbergElement = HeisenbergElement { p: 0, q: 0, r: 0 };

    pub fn new(p: i64, q: i64, r: i64) -> Self {
        HeisenbergElement { p, q, r }
    }

    pub fn inverse(self) -> Self {
        HeisenbergElement::new(-self.p, -self.q, -self.r + self.p * self.q)
    }

    pub fn is_central(self) -> bool {
        self.p == 0 && self.q == 0
    }

    pub fn letter(c: char) -> Result<Self, HeisenbergError> {
        match c {
            'a' => Ok(HeisenbergElement::new(1, 0, 0)),
            'b' => Ok(HeisenbergElement::new(0, 1, 0)),
            'c' => Ok(HeisenbergElement::new(-1, -1, 0)),
            _ => Err(HeisenbergError::Letter(c)),
        }
    }
}

impl Mul for HeisenbergElement {
    type Output = HeisenbergElement;

    fn mul(self, o: HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement::new(self.p + o.p, self.q + o.q, self.r + o.r + self.p * o.q)
    }
}

/// A cyclic word stored in its lexicographically minimal rotation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicWord(String);

impl CyclicWord {
    pub fn new(s: &str) -> Self {
        CyclicWord(min_rotation(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Transition counts `(ab, bc, ca, ac, cb, ba)` read cyclically.
    pub fn transitions(&self) -> [u32; 6] {
        let bytes = self.0.as_bytes();
        let mut t = [0; 6];
        for i in 0..bytes.len() {
            let pair = (bytes[i], bytes[(i + 1) % bytes.len()]);
            let k = match pair {
                (b'a', b'b') => 0,
                (b'b', b'c') => 1,
                (b'c', b'a') => 2,
                (b'a', b'c') => 3,
                (b'c', b'b') => 4,
                (b'b', b'a') => 5,
                _ => continue,
            };
            t[k] += 1;
        }
        t
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn min_rotation(s: &str) -> String {
    let n = s.len();
    (0..n.max(1))
        .map(|k| format!("{}{}", &s[k.min(n)..], &s[..k.min(n)]))
        .min()
        .unwrap_or_default()
}

/// Letter index 0,1,2 for a,b,c. The "u" successor is `x+1`, the "v" one `x+2`.
const LETTERS: [char; 3] = ['a', 'b', 'c'];

fn extend(
    word: &mut Vec<usize>,
    left: &mut [[u32; 2]; 3],
    remaining: usize,
    out: &mut Vec<String>,
) {
    let last = *word.last().unwrap();
    if remaining == 0 {
        // the only unused transition must close the cycle back to `a`
        let close = (3 - 1 - last) % 3;
        if last != 0 && left[last][close] == 1 && left.iter().flatten().sum::<u32>() == 1 {
            out.push(word.iter().map(|&i| LETTERS[i]).collect());
        }
        return;
    }
    for kind in 0..2 {
        if left[last][kind] == 0 {
            continue;
        }
        left[last][kind] -= 1;
        word.push((last + 1 + kind) % 3);
        extend(word, left, remaining - 1, out);
        word.pop();
        left[last][kind] += 1;
    }
}

/// All Eulerian circuits with `u` copies of each of `ab, bc, ca` and `v` of
/// each of `ac, cb, ba`, up to rotation, sorted.
pub fn enumerate_words(u: u32, v: u32) -> Result<Vec<CyclicWord>, HeisenbergError> {
    enumerate_words_with(u, v, DEFAULT_MAX_UV, Execution::default())
}

pub fn enumerate_words_with(
    u: u32,
    v: u32,
    cap: u32,
    exec: Execution,
) -> Result<Vec<CyclicWord>, HeisenbergError> {
    if u + v > cap {
        return Err(HeisenbergError::TooLarge(u + v, cap));
    }
    if u + v == 0 {
        return Ok(Vec::new());
    }
    let len = 3 * (u + v) as usize;
    // split the search on the first transition out of `a`
    let starts: Vec<usize> = (0..2).collect();
    let parts = par::map(exec, &starts, |&kind| {
        let mut left = [[u, v]; 3];
        let mut out = Vec::new();
        if left[0][kind] == 0 {
            return out;
        }
        left[0][kind] -= 1;
        let mut word = vec![0, 1 + kind];
        extend(&mut word, &mut left, len - 2, &mut out);
        out
    });
    let set: BTreeSet<CyclicWord> = parts
        .into_iter()
        .flatten()
        .map(|s| CyclicWord::new(&s))
        .collect();
    Ok(set.into_iter().collect())
}

/// `f(w)`: central exponent of the product of the letters of `w`.
pub fn word_exponent(w: &str) -> Result<i64, HeisenbergError> {
    let mut acc = HeisenbergElement::IDENTITY;
    for c in w.chars() {
        acc = acc * HeisenbergElement::letter(c)?;
    }
    if !acc.is_central() {
        return Err(HeisenbergError::Unbalanced(w.to_string()));
    }
    Ok(acc.r)
}

pub fn suv_bruteforce(u: u32, v: u32) -> Result<BTreeSet<i64>, HeisenbergError> {
    enumerate_words(u, v)?
        .iter()
        .map(|w| word_exponent(w.as_str()))
        .collect()
}

/// Closed-form interval `[lo, hi]` for `S_{u,v}`.
pub fn suv_formula(u: u32, v: u32) -> (i64, i64) {
    let (u, v) = (u as i64, v as i64);
    if u == v {
        (-v * (v + 1) / 2, v * (v - 3) / 2)
    } else if u > v {
        (-v * (v + 1) / 2, v * (v - 1) / 2)
    } else {
        (-u * (u + 1) / 2 - v, u * (u - 1) / 2 - v)
    }
}

/// Whether `m(u+v) + n r = 0` for some integer `r` in `suv_formula(u, v)`.
pub fn disk_region(m: i64, n: i64, u: u32, v: u32) -> bool {
    if u + v == 0 {
        return false;
    }
    let (lo, hi) = suv_formula(u, v);
    let lhs = m * (u + v) as i64;
    if n == 0 {
        return lhs == 0;
    }
    lhs % n == 0 && (lo..=hi).contains(&(-lhs / n))
}

/// The `m/n = 1/2` region described as `1≤v≤u≤v²` or `u<v≤u²`, with `u≡v mod 2`.
pub fn half_region_description(u: u32, v: u32) -> bool {
    let shape = (1 <= v && v <= u && u <= v * v) || (u < v && v <= u * u);
    shape && u % 2 == v % 2
}
