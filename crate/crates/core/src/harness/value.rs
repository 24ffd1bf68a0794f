//! Uninstrumented JSON reader shared by the post-processing targets.
//!
//! Keeps object members in order (duplicates included) and numbers as their
//! source text so targets can inspect the digits.

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Value {
    Null,
    Bool(bool),
    Number(String),
    String(String),
    Array(Vec<Value>),
    Object(Vec<(String, Value)>),
}

const MAX_NESTING: usize = 512;

pub(crate) fn read(text: &str) -> Option<Value> {
    let mut r = Reader {
        text,
        s: text.as_bytes(),
        pos: 0,
        depth: 0,
    };
    r.ws();
    let v = r.value()?;
    r.ws();
    (r.pos == r.s.len()).then_some(v)
}

struct Reader<'a> {
    text: &'a str,
    s: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Reader<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn value(&mut self) -> Option<Value> {
        match self.peek()? {
            b'{' => self.nested(Self::object),
            b'[' => self.nested(Self::array),
            b'"' => self.string().map(Value::String),
            b't' => self.word("true", Value::Bool(true)),
            b'f' => self.word("false", Value::Bool(false)),
            b'n' => self.word("null", Value::Null),
            b'-' | b'0'..=b'9' => self.number(),
            _ => None,
        }
    }

    fn nested(&mut self, f: fn(&mut Self) -> Option<Value>) -> Option<Value> {
        if self.depth >= MAX_NESTING {
            return None;
        }
        self.depth += 1;
        let v = f(self);
        self.depth -= 1;
        v
    }

    fn word(&mut self, w: &str, v: Value) -> Option<Value> {
        if self.s[self.pos..].starts_with(w.as_bytes()) {
            self.pos += w.len();
            Some(v)
        } else {
            None
        }
    }

    fn object(&mut self) -> Option<Value> {
        self.pos += 1;
        let mut members = Vec::new();
        self.ws();
        if self.eat(b'}') {
            return Some(Value::Object(members));
        }
        loop {
            self.ws();
            let key = self.string()?;
            self.ws();
            if !self.eat(b':') {
                return None;
            }
            self.ws();
            let v = self.value()?;
            members.push((key, v));
            self.ws();
            if self.eat(b',') {
                continue;
            }
            return self.eat(b'}').then_some(Value::Object(members));
        }
    }

    fn array(&mut self) -> Option<Value> {
        self.pos += 1;
        let mut items = Vec::new();
        self.ws();
        if self.eat(b']') {
            return Some(Value::Array(items));
        }
        loop {
            self.ws();
            items.push(self.value()?);
            self.ws();
            if self.eat(b',') {
                continue;
            }
            return self.eat(b']').then_some(Value::Array(items));
        }
    }

    fn string(&mut self) -> Option<String> {
        if !self.eat(b'"') {
            return None;
        }
        let mut out = String::new();
        let mut pending_high: Option<u16> = None;
        loop {
            let start = self.pos;
            let c = self.peek()?;
            match c {
                b'"' => {
                    self.pos += 1;
                    if pending_high.is_some() {
                        out.push('\u{FFFD}');
                    }
                    return Some(out);
                }
                b'\\' => {
                    self.pos += 1;
                    let e = self.peek()?;
                    self.pos += 1;
                    let simple = match e {
                        b'"' => Some('"'),
                        b'\\' => Some('\\'),
                        b'/' => Some('/'),
                        b'b' => Some('\u{8}'),
                        b'f' => Some('\u{c}'),
                        b'n' => Some('\n'),
                        b'r' => Some('\r'),
                        b't' => Some('\t'),
                        b'u' => None,
                        _ => return None,
                    };
                    if let Some(ch) = simple {
                        if pending_high.take().is_some() {
                            out.push('\u{FFFD}');
                        }
                        out.push(ch);
                        continue;
                    }
                    let hex = std::str::from_utf8(self.s.get(self.pos..self.pos + 4)?).ok()?;
                    let unit = u16::from_str_radix(hex, 16).ok()?;
                    self.pos += 4;
                    match (pending_high.take(), unit) {
                        (Some(hi), 0xDC00..=0xDFFF) => {
                            let code =
                                0x10000 + (((hi as u32) - 0xD800) << 10) + (unit as u32 - 0xDC00);
                            out.push(char::from_u32(code).unwrap_or('\u{FFFD}'));
                        }
                        (prev, 0xD800..=0xDBFF) => {
                            if prev.is_some() {
                                out.push('\u{FFFD}');
                            }
                            pending_high = Some(unit);
                        }
                        (prev, _) => {
                            if prev.is_some() {
                                out.push('\u{FFFD}');
                            }
                            out.push(char::from_u32(unit as u32).unwrap_or('\u{FFFD}'));
                        }
                    }
                }
                0x00..=0x1F => return None,
                _ => {
                    let ch = self.text[start..].chars().next()?;
                    if pending_high.take().is_some() {
                        out.push('\u{FFFD}');
                    }
                    out.push(ch);
                    self.pos += ch.len_utf8();
                }
            }
        }
    }

    fn number(&mut self) -> Option<Value> {
        let start = self.pos;
        self.eat(b'-');
        match self.peek()? {
            b'0' => self.pos += 1,
            b'1'..=b'9' => self.digits(),
            _ => return None,
        }
        if self.eat(b'.') {
            if !matches!(self.peek(), Some(b'0'..=b'9')) {
                return None;
            }
            self.digits();
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !matches!(self.peek(), Some(b'0'..=b'9')) {
                return None;
            }
            self.digits();
        }
        Some(Value::Number(self.text[start..self.pos].to_string()))
    }

    fn digits(&mut self) {
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
    }
}
