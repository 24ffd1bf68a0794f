//! Validates every number in a document against binary64 round-tripping.
//!
//! Planted bug: raises `PrecisionLoss` on a number with 17 or more
//! significant digits. Significant digits are the mantissa digits after
//! stripping leading zeros; trailing zeros count.

use crate::harness::probe::{br, func, raise, Raise};
use crate::harness::value::{read, Value};

pub(crate) const SOURCE: &str = include_str!("numbers.rs");
pub(crate) const BRANCHES: u32 = 43;
pub(crate) const FUNCTIONS: u32 = 6;

pub(crate) fn run(input: &str) -> Result<(), Raise> {
    func!(0);
    br!(0);
    let Some(doc) = read(input) else {
        raise!("InvalidJson", 1);
    };
    let mut count = 0usize;
    walk(&doc, &mut count)?;
    match count {
        0 => br!(2),
        1 => br!(3),
        2..=5 => br!(4),
        _ => br!(5),
    }
    Ok(())
}

fn walk(v: &Value, count: &mut usize) -> Result<(), Raise> {
    func!(1);
    match v {
        Value::Number(n) => {
            *count += 1;
            validate(n)
        }
        Value::String(s) => {
            if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
                // Numeric-looking strings are reported but not validated.
                br!(6);
            }
            Ok(())
        }
        Value::Array(items) => {
            for item in items {
                walk(item, count)?;
            }
            Ok(())
        }
        Value::Object(members) => {
            for (_, item) in members {
                walk(item, count)?;
            }
            Ok(())
        }
        Value::Bool(_) | Value::Null => Ok(()),
    }
}

struct Parts<'a> {
    negative: bool,
    integer: &'a str,
    fraction: Option<&'a str>,
    exponent: Option<&'a str>,
}

fn split(n: &str) -> Parts<'_> {
    func!(2);
    let (negative, rest) = match n.strip_prefix('-') {
        Some(r) => {
            br!(7);
            (true, r)
        }
        None => {
            br!(8);
            (false, n)
        }
    };
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => {
            if rest.as_bytes()[i] == b'E' {
                br!(9);
            } else {
                br!(10);
            }
            (&rest[..i], Some(&rest[i + 1..]))
        }
        None => (rest, None),
    };
    let (integer, fraction) = match mantissa.split_once('.') {
        Some((i, f)) => {
            br!(11);
            (i, Some(f))
        }
        None => (mantissa, None),
    };
    Parts {
        negative,
        integer,
        fraction,
        exponent,
    }
}

fn validate(n: &str) -> Result<(), Raise> {
    func!(3);
    let parts = split(n);
    if parts.integer == "0" {
        br!(12);
        if parts.negative {
            br!(13);
        }
    } else {
        br!(14);
    }
    if let Some(f) = parts.fraction {
        if f.ends_with('0') {
            br!(15);
        }
        if f.bytes().all(|b| b == b'0') {
            br!(16);
        }
    }
    let digits = significant_digits(&parts);
    match digits {
        0 => br!(17),
        1 => br!(18),
        2..=6 => br!(19),
        7..=9 => br!(20),
        10..=15 => br!(21),
        16 => br!(22),
        _ => raise!("PrecisionLoss", 23),
    }
    let scale = exponent_value(parts.exponent)?;
    let value: f64 = n.parse().unwrap_or(f64::NAN);
    if value.is_infinite() {
        br!(24);
    } else if value == 0.0 && digits > 0 {
        // Underflow: nonzero digits that round to zero.
        br!(25);
    } else if value != 0.0 && value.abs() < f64::MIN_POSITIVE {
        br!(26);
    } else {
        br!(27);
    }
    if parts.fraction.is_none() && scale >= 0 {
        if value.abs() <= i64::MAX as f64 {
            br!(28);
        } else if !parts.negative && value <= u64::MAX as f64 {
            br!(29);
        } else {
            br!(30);
        }
    } else if value.fract() == 0.0 && value.is_finite() {
        // Written with a fraction or exponent but integral.
        br!(31);
    }
    Ok(())
}

fn significant_digits(parts: &Parts<'_>) -> usize {
    func!(4);
    let all = parts
        .integer
        .bytes()
        .chain(parts.fraction.unwrap_or("").bytes());
    let mut started = false;
    let mut count = 0;
    for b in all {
        if b != b'0' {
            started = true;
        }
        if started {
            count += 1;
        }
    }
    if !started {
        br!(32);
    }
    count
}

fn exponent_value(exponent: Option<&str>) -> Result<i64, Raise> {
    func!(5);
    let Some(e) = exponent else {
        return Ok(0);
    };
    let (sign, digits) = match e.as_bytes().first() {
        Some(b'+') => {
            br!(33);
            (1, &e[1..])
        }
        Some(b'-') => {
            br!(34);
            (-1, &e[1..])
        }
        _ => {
            br!(35);
            (1, e)
        }
    };
    if digits.len() > 1 && digits.starts_with('0') {
        br!(36);
    }
    let magnitude = digits.trim_start_matches('0');
    if magnitude.len() > 6 {
        raise!("ExponentOverflow", 37);
    }
    let m: i64 = magnitude.parse().unwrap_or(0);
    match m {
        0 => br!(38),
        1..=9 => br!(39),
        10..=99 => br!(40),
        100..=308 => br!(41),
        _ => br!(42),
    }
    Ok(sign * m)
}
