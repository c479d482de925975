//! Exact rational helpers.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::{Error, Result};

pub type Q = Ratio<i64>;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Formats as `p` or `p/q`.
pub fn fmt(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("not a rational number: `{s}`"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(Q::new(a, b))
        }
        None => s.parse::<i64>().map(q).map_err(|_| bad()),
    }
}

/// Reduces `x` modulo `m` into `[0, m)`.
pub fn modulo(x: &Q, m: &Q) -> Q {
    let k = (x / m).floor();
    x - m * k
}

/// True when `x` is an integer.
pub fn is_int(x: &Q) -> bool {
    x.is_integer()
}

/// True when `a - b` is an even integer.
pub fn same_even_coset(a: &Q, b: &Q) -> bool {
    let d = a - b;
    d.is_integer() && d.numer().is_even()
}

pub fn floor_i64(x: &Q) -> i64 {
    x.floor().to_integer()
}

pub fn ceil_div(a: i64, b: i64) -> i64 {
    Integer::div_ceil(&a, &b)
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}

pub fn serialize<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt(x))
}

pub fn serialize_vec<S: serde::Serializer>(
    xs: &[Q],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&fmt(x))?;
    }
    seq.end()
}
