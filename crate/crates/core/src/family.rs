//! Order-grid scans and exact congruence-class fitting of the results.

use std::fmt;
use std::io::{Read, Write};
use std::time::Instant;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::Chain;
use crate::engine::{compute_scl_with, EngineOptions, SclStatus};
use crate::par::{self, Execution};
use crate::rational::{fmt_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Finite,
    Infinite,
    Empty,
    ResourceLimit,
    Error,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RowStatus::Finite => "finite",
            RowStatus::Infinite => "infinite",
            RowStatus::Empty => "empty",
            RowStatus::ResourceLimit => "resource_limit",
            RowStatus::Error => "error",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanRow {
    pub order_a: u64,
    pub order_b: u64,
    pub status: RowStatus,
    pub value: Option<Q>,
    pub millis: Option<u128>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    order_a: u64,
    order_b: u64,
    status: RowStatus,
    scl_num: String,
    scl_den: String,
    millis: String,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: bad value {num:?}/{den:?}")]
    Value { row: usize, num: String, den: String },
}

impl ScanTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), TableError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            let (num, den) = match &r.value {
                Some(v) => (v.numer().to_string(), v.denom().to_string()),
                None => (String::new(), String::new()),
            };
            out.serialize(CsvRow {
                order_a: r.order_a,
                order_b: r.order_b,
                status: r.status,
                scl_num: num,
                scl_den: den,
                millis: r.millis.map(|m| m.to_string()).unwrap_or_default(),
            })?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<ScanTable, TableError> {
        let mut rows = Vec::new();
        for (i, rec) in csv::Reader::from_reader(r).deserialize::<CsvRow>().enumerate() {
            let rec = rec?;
            let value = if rec.scl_num.is_empty() && rec.scl_den.is_empty() {
                None
            } else {
                let bad = || TableError::Value {
                    row: i + 1,
                    num: rec.scl_num.clone(),
                    den: rec.scl_den.clone(),
                };
                let n = rec.scl_num.parse().map_err(|_| bad())?;
                let d: num_bigint::BigInt = rec.scl_den.parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Some(Q::new(n, d))
            };
            rows.push(ScanRow {
                order_a: rec.order_a,
                order_b: rec.order_b,
                status: rec.status,
                value,
                millis: rec.millis.parse().ok(),
            });
        }
        Ok(ScanTable { rows })
    }
}

#[derive(Clone, Debug, Default)]
pub struct ScanOptions {
    pub engine: EngineOptions,
    pub exec: Execution,
    pub timings: bool,
}

/// Computes scl of `template` at every point of `orders_a × orders_b`.
/// Rows come back sorted by `(order_a, order_b)` whatever the scheduling.
pub fn scan(template: &Chain, orders_a: &[u64], orders_b: &[u64], opts: &ScanOptions) -> ScanTable {
    let mut grid: Vec<(u64, u64)> = orders_a
        .iter()
        .flat_map(|&a| orders_b.iter().map(move |&b| (a, b)))
        .collect();
    grid.sort_unstable();
    grid.dedup();
    let rows = par::map(opts.exec, &grid, |&(a, b)| {
        let start = Instant::now();
        let (status, value) = match template.with_orders(a, b) {
            Err(_) => (RowStatus::Error, None),
            Ok(chain) => match compute_scl_with(&chain, &opts.engine) {
                Ok(r) => match r.status {
                    SclStatus::Finite => (RowStatus::Finite, r.value),
                    SclStatus::Empty => (RowStatus::Empty, r.value),
                    SclStatus::Infinite => (RowStatus::Infinite, None),
                },
                Err(e) if e.is_resource_limit() => (RowStatus::ResourceLimit, None),
                Err(_) => (RowStatus::Error, None),
            },
        };
        ScanRow {
            order_a: a,
            order_b: b,
            status,
            value,
            millis: opts.timings.then(|| start.elapsed().as_millis()),
        }
    });
    ScanTable { rows }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    A,
    B,
}

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<Q>);

impl Poly {
    fn trimmed(mut c: Vec<Q>) -> Poly {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly(c)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    fn render(&self, var: &str) -> String {
        let mut s = String::new();
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            if k == 0 || !a.is_one() {
                s.push_str(&fmt_q(&a));
            }
            s.push_str(&mono);
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

/// An exact rational function reproducing one congruence class of a table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceFit {
    pub period: u64,
    pub residue: u64,
    pub numerator: Poly,
    pub denominator: Poly,
    /// first and last order of the class covered by this piece
    pub range: (u64, u64),
    pub points: usize,
}

impl CongruenceFit {
    pub fn eval(&self, o: u64) -> Q {
        let x = Q::from_integer(o.into());
        self.numerator.eval(&x) / self.denominator.eval(&x)
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.numerator.degree(), self.denominator.degree())
    }
}

impl fmt::Display for CongruenceFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "o = {} mod {}, o in [{}, {}] ({} points): ({}) / ({})",
            self.residue,
            self.period,
            self.range.0,
            self.range.1,
            self.points,
            self.numerator.render("o"),
            self.denominator.render("o"),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FitCaps {
    pub max_period: u64,
    pub max_degree: usize,
    pub max_pieces: usize,
}

impl Default for FitCaps {
    fn default() -> Self {
        FitCaps {
            max_period: 6,
            max_degree: 2,
            max_pieces: 3,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FitError {
    #[error("the other order is not fixed (saw {0} and {1})")]
    NotOneDimensional(u64, u64),
    #[error("no finite rows with a finite varying order")]
    Empty,
    #[error("no exact fit with period <= {max_period}, degree <= {max_degree}, pieces <= {max_pieces}")]
    NoFit {
        max_period: u64,
        max_degree: usize,
        max_pieces: usize,
    },
}

/// Splits the table's finite rows by residue class of the varying order and
/// fits each class piecewise by exact rational functions. Returns the fits
/// of the smallest period for which every class succeeds.
pub fn detect_congruence_pattern(
    table: &ScanTable,
    axis: Axis,
    caps: FitCaps,
) -> Result<Vec<CongruenceFit>, FitError> {
    let mut fixed = None;
    let mut pts: Vec<(u64, Q)> = Vec::new();
    for r in &table.rows {
        let (var, other) = match axis {
            Axis::A => (r.order_a, r.order_b),
            Axis::B => (r.order_b, r.order_a),
        };
        match fixed {
            None => fixed = Some(other),
            Some(o) if o != other => return Err(FitError::NotOneDimensional(o, other)),
            _ => {}
        }
        if var == 0 {
            continue;
        }
        if let (RowStatus::Finite | RowStatus::Empty, Some(v)) = (r.status, &r.value) {
            pts.push((var, v.clone()));
        }
    }
    if pts.is_empty() {
        return Err(FitError::Empty);
    }
    pts.sort_by_key(|p| p.0);
    pts.dedup_by_key(|p| p.0);

    'period: for p in 1..=caps.max_period.max(1) {
        let mut fits = Vec::new();
        for res in 0..p {
            let class: Vec<(u64, Q)> = pts.iter().filter(|(o, _)| o % p == res).cloned().collect();
            if class.is_empty() {
                continue;
            }
            match fit_class(&class, caps) {
                Some(pieces) => fits.extend(pieces.into_iter().map(|(num, den, lo, hi, n)| {
                    CongruenceFit {
                        period: p,
                        residue: res,
                        numerator: num,
                        denominator: den,
                        range: (lo, hi),
                        points: n,
                    }
                })),
                None => continue 'period,
            }
        }
        return Ok(fits);
    }
    Err(FitError::NoFit {
        max_period: caps.max_period,
        max_degree: caps.max_degree,
        max_pieces: caps.max_pieces,
    })
}

type Piece = (Poly, Poly, u64, u64, usize);

fn fit_class(class: &[(u64, Q)], caps: FitCaps) -> Option<Vec<Piece>> {
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < class.len() {
        if pieces.len() == caps.max_pieces {
            return None;
        }
        // longest verified extension wins; ties go to the lower degree
        let mut best: Option<(usize, Poly, Poly)> = None;
        for d in 0..=caps.max_degree {
            let need = 2 * d + 1;
            if start + need >= class.len() {
                break;
            }
            for (num, den) in candidates(&class[start..start + need], d) {
                let len = class[start..]
                    .iter()
                    .take_while(|(o, v)| {
                        let x = Q::from_integer((*o).into());
                        let dv = den.eval(&x);
                        !dv.is_zero() && num.eval(&x) / dv == *v
                    })
                    .count();
                if len > need && best.as_ref().is_none_or(|b| len > b.0) {
                    best = Some((len, num, den));
                }
            }
        }
        let (len, num, den) = best?;
        pieces.push((num, den, class[start].0, class[start + len - 1].0, len));
        start += len;
    }
    Some(pieces)
}

/// Null vectors of `N(o) - f(o) D(o) = 0` over the given points, each
/// returned as a normalized `(N, D)` pair with integral coprime coefficients.
fn candidates(pts: &[(u64, Q)], d: usize) -> Vec<(Poly, Poly)> {
    let cols = 2 * d + 2;
    let rows: Vec<Vec<Q>> = pts
        .iter()
        .map(|(o, f)| {
            let x = Q::from_integer((*o).into());
            let mut row = Vec::with_capacity(cols);
            let mut pw = Q::one();
            let mut powers = Vec::with_capacity(d + 1);
            for _ in 0..=d {
                powers.push(pw.clone());
                pw *= &x;
            }
            row.extend(powers.iter().cloned());
            row.extend(powers.iter().map(|p| -(p * f)));
            row
        })
        .collect();
    nullspace(rows, cols)
        .into_iter()
        .filter_map(|v| {
            let den = Poly::trimmed(v[d + 1..].to_vec());
            if den.0.is_empty() {
                return None;
            }
            let num = Poly::trimmed(v[..=d].to_vec());
            Some(normalize(num, den))
        })
        .collect()
}

fn normalize(num: Poly, den: Poly) -> (Poly, Poly) {
    let all = num.0.iter().chain(den.0.iter());
    let lcm = all
        .clone()
        .fold(num_bigint::BigInt::one(), |l, c| l.lcm(c.denom()));
    let gcd = all.fold(num_bigint::BigInt::zero(), |g, c| g.gcd(&(c * Q::from_integer(lcm.clone())).to_integer()));
    let mut scale = Q::new(lcm, gcd);
    if den.0.last().is_some_and(Signed::is_negative) {
        scale = -scale;
    }
    let sc = |p: Poly| Poly(p.0.into_iter().map(|c| c * &scale).collect());
    (sc(num), sc(den))
}

/// Basis of the right null space of a dense rational matrix.
fn nullspace(mut m: Vec<Vec<Q>>, cols: usize) -> Vec<Vec<Q>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let k = m[i][c].clone();
                let (top, rest) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (x, y) in rest.iter_mut().zip(top.iter()) {
                    *x -= &k * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); cols];
            v[free] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}
