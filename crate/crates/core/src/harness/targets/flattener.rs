//! Flattens a JSON document into dotted-path/value pairs.
//!
//! Planted bug: raises `DepthLimitExceeded` when a container sits at nesting
//! depth 9 or more (the outermost container is depth 1).

use std::collections::HashSet;

use crate::harness::probe::{br, func, raise, Raise};
use crate::harness::value::{read, Value};

pub(crate) const SOURCE: &str = include_str!("flattener.rs");
pub(crate) const BRANCHES: u32 = 48;
pub(crate) const FUNCTIONS: u32 = 7;

pub(crate) fn run(input: &str) -> Result<(), Raise> {
    func!(0);
    br!(0);
    let Some(doc) = read(input) else {
        raise!("InvalidJson", 1);
    };
    let mut f = Flattener::default();
    f.visit(&doc, "", 0)?;
    f.finish()
}

#[derive(Default)]
struct Flattener {
    pairs: Vec<(String, String)>,
    seen: HashSet<String>,
}

impl Flattener {
    fn visit(&mut self, v: &Value, path: &str, depth: usize) -> Result<(), Raise> {
        func!(1);
        match v {
            Value::Object(members) => {
                br!(2);
                self.enter(depth + 1)?;
                if members.is_empty() {
                    br!(3);
                    return self.emit(path, "{}".into());
                }
                for (key, child) in members {
                    let segment = self.segment(key)?;
                    let child_path = if path.is_empty() {
                        br!(4);
                        segment
                    } else {
                        br!(5);
                        format!("{path}.{segment}")
                    };
                    self.visit(child, &child_path, depth + 1)?;
                }
                Ok(())
            }
            Value::Array(items) => {
                br!(6);
                self.enter(depth + 1)?;
                if items.is_empty() {
                    br!(7);
                    return self.emit(path, "[]".into());
                }
                match items.len() {
                    1 => br!(8),
                    2..=9 => br!(9),
                    _ => br!(10),
                }
                for (i, child) in items.iter().enumerate() {
                    self.visit(child, &format!("{path}[{i}]"), depth + 1)?;
                }
                Ok(())
            }
            Value::String(s) => {
                br!(11);
                let rendered = self.render_string(s);
                self.emit(path, rendered)
            }
            Value::Number(n) => {
                if n.starts_with('-') {
                    br!(12);
                } else {
                    br!(13);
                }
                self.emit(path, n.clone())
            }
            Value::Bool(b) => {
                if *b {
                    br!(14);
                } else {
                    br!(15);
                }
                self.emit(path, b.to_string())
            }
            Value::Null => {
                br!(16);
                self.emit(path, "null".into())
            }
        }
    }

    fn enter(&mut self, depth: usize) -> Result<(), Raise> {
        func!(2);
        match depth {
            1 => br!(17),
            2 => br!(18),
            3 => br!(19),
            4 => br!(20),
            5 => br!(21),
            6 => br!(22),
            7 => br!(23),
            8 => br!(24),
            _ => raise!("DepthLimitExceeded", 25),
        }
        Ok(())
    }

    /// Path segment for an object key; keys that would be ambiguous in a
    /// dotted path are bracket-quoted.
    fn segment(&mut self, key: &str) -> Result<String, Raise> {
        func!(3);
        if key.is_empty() {
            br!(26);
            return Ok("[\"\"]".into());
        }
        if key.contains('.') {
            br!(27);
            return Ok(format!("[{key:?}]"));
        }
        if key.contains('[') || key.contains(']') {
            br!(28);
            return Ok(format!("[{key:?}]"));
        }
        if key.chars().all(|c| c.is_ascii_digit()) {
            br!(29);
            return Ok(format!("[{key:?}]"));
        }
        if key.chars().any(char::is_whitespace) {
            br!(30);
        } else if !key.is_ascii() {
            br!(31);
        } else {
            br!(32);
        }
        Ok(key.to_string())
    }

    fn render_string(&mut self, s: &str) -> String {
        func!(4);
        if s.is_empty() {
            br!(33);
            return "\"\"".into();
        }
        if s.len() > 32 {
            br!(34);
        } else {
            br!(35);
        }
        let mut out = String::with_capacity(s.len() + 2);
        out.push('"');
        for c in s.chars() {
            match c {
                '"' | '\\' => {
                    br!(36);
                    out.push('\\');
                    out.push(c);
                }
                '\u{0}'..='\u{1f}' => {
                    br!(37);
                    out.push_str(&format!("\\u{:04x}", c as u32));
                }
                '\u{FFFD}' => {
                    br!(38);
                    out.push(c);
                }
                c if !c.is_ascii() => {
                    br!(39);
                    out.push(c);
                }
                _ => out.push(c),
            }
        }
        out.push('"');
        out
    }

    fn emit(&mut self, path: &str, value: String) -> Result<(), Raise> {
        func!(5);
        let path = if path.is_empty() {
            br!(40);
            "$".to_string()
        } else {
            br!(41);
            path.to_string()
        };
        if !self.seen.insert(path.clone()) {
            // Duplicate object keys flatten to the same path.
            br!(42);
        }
        self.pairs.push((path, value));
        Ok(())
    }

    fn finish(&mut self) -> Result<(), Raise> {
        func!(6);
        match self.pairs.len() {
            1 => br!(43),
            2..=4 => br!(44),
            5..=16 => br!(45),
            _ => br!(46),
        }
        if self.seen.len() < self.pairs.len() {
            br!(47);
        }
        Ok(())
    }
}
