//! Parses a document and pretty-prints it with two-space indentation.
//!
//! Planted bug: raises `EmptyKeyInArray` on a member with key `""` inside an
//! object that is itself an element of an array.

use crate::harness::probe::{br, func, raise, Raise};
use crate::harness::value::{read, Value};

pub(crate) const SOURCE: &str = include_str!("serializer.rs");
pub(crate) const BRANCHES: u32 = 45;
pub(crate) const FUNCTIONS: u32 = 6;

pub(crate) fn run(input: &str) -> Result<(), Raise> {
    func!(0);
    br!(0);
    let Some(doc) = read(input) else {
        raise!("InvalidJson", 1);
    };
    let mut p = Printer::default();
    p.value(&doc, false)?;
    p.out.push('\n');
    if p.out.len() > 4096 {
        br!(2);
    } else {
        br!(3);
    }
    Ok(())
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
    }

    fn value(&mut self, v: &Value, in_array: bool) -> Result<(), Raise> {
        func!(1);
        match v {
            Value::Null => {
                br!(4);
                self.out.push_str("null");
            }
            Value::Bool(true) => {
                br!(5);
                self.out.push_str("true");
            }
            Value::Bool(false) => {
                br!(6);
                self.out.push_str("false");
            }
            Value::Number(n) => {
                br!(7);
                self.number(n);
            }
            Value::String(s) => {
                br!(8);
                self.string(s);
            }
            Value::Array(items) => {
                br!(9);
                self.array(items)?;
            }
            Value::Object(members) => {
                if in_array {
                    br!(10);
                } else {
                    br!(11);
                }
                self.object(members, in_array)?;
            }
        }
        Ok(())
    }

    fn array(&mut self, items: &[Value]) -> Result<(), Raise> {
        func!(2);
        if items.is_empty() {
            br!(12);
            self.out.push_str("[]");
            return Ok(());
        }
        if items.iter().all(|v| !matches!(v, Value::Array(_) | Value::Object(_))) {
            // Scalars only: keep on one line.
            br!(13);
            self.out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    self.out.push_str(", ");
                }
                self.value(item, true)?;
            }
            self.out.push(']');
            return Ok(());
        }
        br!(14);
        self.out.push('[');
        self.indent += 1;
        for (i, item) in items.iter().enumerate() {
            if i > 0 {
                br!(15);
                self.out.push(',');
            }
            self.newline();
            self.value(item, true)?;
        }
        self.indent -= 1;
        self.newline();
        self.out.push(']');
        Ok(())
    }

    fn object(&mut self, members: &[(String, Value)], in_array: bool) -> Result<(), Raise> {
        func!(3);
        if members.is_empty() {
            br!(16);
            self.out.push_str("{}");
            return Ok(());
        }
        self.out.push('{');
        self.indent += 1;
        match self.indent {
            1 => br!(17),
            2 => br!(18),
            3..=5 => br!(19),
            _ => br!(20),
        }
        for (i, (key, v)) in members.iter().enumerate() {
            if i > 0 {
                br!(21);
                self.out.push(',');
            }
            if key.is_empty() {
                if in_array {
                    raise!("EmptyKeyInArray", 22);
                }
                br!(23);
            }
            if members[..i].iter().any(|(k, _)| k == key) {
                br!(24);
            }
            self.newline();
            self.string(key);
            self.out.push_str(": ");
            self.value(v, false)?;
        }
        self.indent -= 1;
        self.newline();
        self.out.push('}');
        Ok(())
    }

    fn string(&mut self, s: &str) {
        func!(4);
        self.out.push('"');
        for c in s.chars() {
            match c {
                '"' => {
                    br!(25);
                    self.out.push_str("\\\"");
                }
                '\\' => {
                    br!(26);
                    self.out.push_str("\\\\");
                }
                '\n' => {
                    br!(27);
                    self.out.push_str("\\n");
                }
                '\r' => {
                    br!(28);
                    self.out.push_str("\\r");
                }
                '\t' => {
                    br!(29);
                    self.out.push_str("\\t");
                }
                '\u{8}' => {
                    br!(30);
                    self.out.push_str("\\b");
                }
                '\u{c}' => {
                    br!(31);
                    self.out.push_str("\\f");
                }
                '\u{0}'..='\u{1f}' => {
                    br!(32);
                    self.out.push_str(&format!("\\u{:04x}", c as u32));
                }
                '\u{7f}'..='\u{9f}' => {
                    br!(33);
                    self.out.push_str(&format!("\\u{:04x}", c as u32));
                }
                '\u{10000}'.. => {
                    br!(34);
                    self.out.push(c);
                }
                c if !c.is_ascii() => {
                    br!(35);
                    self.out.push(c);
                }
                _ => self.out.push(c),
            }
        }
        self.out.push('"');
    }

    /// Normalizes exponent markers to lowercase and drops a `+` sign.
    fn number(&mut self, n: &str) {
        func!(5);
        let (mantissa, exponent) = match n.find(['e', 'E']) {
            Some(i) => {
                br!(36);
                (&n[..i], Some(&n[i + 1..]))
            }
            None => {
                br!(37);
                (n, None)
            }
        };
        if mantissa.contains('.') {
            br!(38);
            let trimmed = mantissa.trim_end_matches('0');
            if let Some(whole) = trimmed.strip_suffix('.') {
                br!(39);
                self.out.push_str(whole);
            } else {
                br!(40);
                self.out.push_str(trimmed);
            }
        } else {
            br!(41);
            self.out.push_str(mantissa);
        }
        if let Some(e) = exponent {
            self.out.push('e');
            match e.as_bytes().first() {
                Some(b'+') => {
                    br!(42);
                    self.out.push_str(&e[1..]);
                }
                Some(b'-') => {
                    br!(43);
                    self.out.push_str(e);
                }
                _ => {
                    br!(44);
                    self.out.push_str(e);
                }
            }
        }
    }
}
