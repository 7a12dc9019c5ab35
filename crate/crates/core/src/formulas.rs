//! Closed-form scl values used as reference oracles.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::rational::{fmt_q, q, qi, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SclValue {
    Finite(Q),
    Infinite,
}

impl fmt::Display for SclValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SclValue::Finite(x) => f.write_str(&fmt_q(x)),
            SclValue::Infinite => f.write_str("infinite"),
        }
    }
}

/// Order of `g^e` in a cyclic group of order `order` (0 for ℤ, giving `None`).
fn power_order(e: i64, order: u64) -> Option<u64> {
    if order == 0 {
        None
    } else {
        Some(order / e.unsigned_abs().gcd(&order))
    }
}

/// `scl(a^i b^j) = ½(1 − 1/n_{a^i} − 1/n_{b^j})`, infinite if either power
/// has infinite order. `None` if an exponent is zero or a power is trivial.
pub fn formula_product(i: i64, j: i64, orders: (u64, u64)) -> Option<SclValue> {
    if i == 0 || j == 0 {
        return None;
    }
    let (na, nb) = (power_order(i, orders.0), power_order(j, orders.1));
    match (na, nb) {
        (Some(1), _) | (_, Some(1)) => None,
        (Some(na), Some(nb)) => Some(SclValue::Finite(
            (qi(1) - q(1, na as i64) - q(1, nb as i64)) / qi(2),
        )),
        _ => Some(SclValue::Infinite),
    }
}

/// `scl([a,b]) = 1/2 − 1/k`, `k` the smallest finite order (1/2 if none).
pub fn formula_commutator(orders: (u64, u64)) -> Q {
    let k = [orders.0, orders.1].into_iter().filter(|&o| o > 0).min();
    match k {
        Some(k) => q(1, 2) - q(1, k as i64),
        None => q(1, 2),
    }
}

/// `scl(a^p t a^q t^-1)` in `ℤ * ℤ`: 1/2 when `q = −p`, else infinite.
pub fn formula_self_product(p: i64, q_: i64) -> SclValue {
    if p != 0 && q_ == -p {
        SclValue::Finite(q(1, 2))
    } else {
        SclValue::Infinite
    }
}

/// Experimentally observed order families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderFamily {
    F1,
    F2,
    F3,
    F4,
    Counterexample,
}

impl OrderFamily {
    pub const ALL: [OrderFamily; 5] = [
        OrderFamily::F1,
        OrderFamily::F2,
        OrderFamily::F3,
        OrderFamily::F4,
        OrderFamily::Counterexample,
    ];

    pub fn chain(self) -> &'static str {
        match self {
            OrderFamily::F1 => "aba^-2b^-2 + ab",
            OrderFamily::F2 => "aba^-3b^-3",
            OrderFamily::F3 => "a^2ba^-1b^-1a^-2bab^-1",
            OrderFamily::F4 => "aba^2b^2a^3b^3a^-5b^-5",
            OrderFamily::Counterexample => "aba^-2b^-2a^2b^2a^-1b^-1",
        }
    }

    /// Whether the formula is claimed at these orders.
    pub fn in_range(self, (o1, o2): (u64, u64)) -> bool {
        let m = o1.min(o2);
        match self {
            OrderFamily::F1 => m >= 2,
            OrderFamily::F2 => m >= 7,
            OrderFamily::F3 => m >= 3,
            OrderFamily::F4 => m >= 6,
            OrderFamily::Counterexample => o1 > 10 && 2 * o1 < o2,
        }
    }
}

impl FromStr for OrderFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(OrderFamily::F1),
            "f2" => Ok(OrderFamily::F2),
            "f3" => Ok(OrderFamily::F3),
            "f4" => Ok(OrderFamily::F4),
            "counterexample" | "cx" => Ok(OrderFamily::Counterexample),
            _ => Err(format!("unknown family {s:?}")),
        }
    }
}

/// Reference value of a family at the given orders, or `None` outside the
/// range where the formula is claimed.
pub fn family_reference(family: OrderFamily, orders: (u64, u64)) -> Option<Q> {
    if !family.in_range(orders) {
        return None;
    }
    let (o1, o2) = (orders.0 as i64, orders.1 as i64);
    let m = o1.min(o2);
    Some(match family {
        OrderFamily::F1 => {
            let c = if m % 2 == 0 { q(2, 3) } else { q(1, 2) };
            q(2, 3) - c / qi(m)
        }
        OrderFamily::F2 => q(3, 4) - q(1, o1) - q(1, o2),
        OrderFamily::F3 => q(1, 2) - q(if o1 % 2 == 0 { 2 } else { 1 }, o1),
        OrderFamily::F4 => qi(1) - q(1, 2 * o1) - q(1, 2 * o2),
        OrderFamily::Counterexample => match o1 % 6 {
            1 | 3 | 5 => qi(1) - q(3 * (o1 - 1), o1 * (o1 + 1)),
            0 => qi(1) - q(3, o1),
            2 => qi(1) - q(15, 5 * o1 + 8),
            _ => qi(1) - q(3, o1 + 2),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product() {
        assert_eq!(formula_product(1, 1, (2, 3)), Some(SclValue::Finite(q(1, 12))));
        assert_eq!(formula_product(1, 1, (0, 3)), Some(SclValue::Infinite));
        assert_eq!(formula_product(2, 1, (4, 3)), Some(SclValue::Finite(q(1, 12))));
        assert_eq!(formula_product(2, 1, (2, 3)), None);
    }

    #[test]
    fn commutator() {
        assert_eq!(formula_commutator((0, 0)), q(1, 2));
        assert_eq!(formula_commutator((2, 3)), qi(0));
        assert_eq!(formula_commutator((3, 5)), q(1, 6));
        assert_eq!(formula_commutator((0, 4)), q(1, 4));
    }

    #[test]
    fn self_product() {
        assert_eq!(formula_self_product(1, -1), SclValue::Finite(q(1, 2)));
        assert_eq!(formula_self_product(2, -2), SclValue::Finite(q(1, 2)));
        assert_eq!(formula_self_product(1, 2), SclValue::Infinite);
    }

    #[test]
    fn families() {
        use OrderFamily::*;
        assert_eq!(family_reference(F2, (7, 7)), Some(q(13, 28)));
        assert_eq!(family_reference(F2, (6, 7)), None);
        assert_eq!(family_reference(F1, (2, 3)), Some(q(1, 3)));
        assert_eq!(family_reference(F1, (5, 5)), Some(q(17, 30)));
        assert_eq!(family_reference(Counterexample, (13, 100)), Some(q(73, 91)));
        assert_eq!(family_reference(Counterexample, (12, 100)), Some(q(3, 4)));
        assert_eq!(family_reference(Counterexample, (10, 100)), None);
        assert_eq!(family_reference(Counterexample, (13, 20)), None);
        assert_eq!("cx".parse::<OrderFamily>(), Ok(Counterexample));
    }
}
