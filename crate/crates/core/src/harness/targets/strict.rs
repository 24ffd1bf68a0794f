//! Strict recursive-descent JSON parser (RFC 8259, no extensions).

use crate::harness::probe::{br, func, raise, Raise};

pub(crate) const SOURCE: &str = include_str!("strict.rs");
pub(crate) const BRANCHES: u32 = 84;
pub(crate) const FUNCTIONS: u32 = 10;

const MAX_DEPTH: usize = 128;

pub(crate) fn run(input: &str) -> Result<(), Raise> {
    func!(0);
    br!(0);
    let mut p = Parser {
        s: input.as_bytes(),
        pos: 0,
        depth: 0,
    };
    p.ws();
    if p.peek().is_none() {
        raise!("UnexpectedEnd", 1);
    }
    p.value()?;
    p.ws();
    if p.pos < p.s.len() {
        raise!("TrailingCharacters", 2);
    }
    br!(3);
    Ok(())
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn ws(&mut self) {
        func!(1);
        while let Some(c) = self.peek() {
            match c {
                b' ' => br!(4),
                b'\t' => br!(5),
                b'\n' => br!(6),
                b'\r' => br!(7),
                _ => break,
            }
            self.pos += 1;
        }
    }

    fn value(&mut self) -> Result<(), Raise> {
        func!(2);
        match self.peek() {
            None => raise!("UnexpectedEnd", 8),
            Some(b'{') => {
                br!(9);
                self.object()
            }
            Some(b'[') => {
                br!(10);
                self.array()
            }
            Some(b'"') => {
                br!(11);
                self.string().map(drop)
            }
            Some(b't') => {
                br!(12);
                self.literal(b"true")
            }
            Some(b'f') => {
                br!(13);
                self.literal(b"false")
            }
            Some(b'n') => {
                br!(14);
                self.literal(b"null")
            }
            Some(b'-' | b'0'..=b'9') => {
                br!(15);
                self.number()
            }
            Some(_) => raise!("UnexpectedCharacter", 16),
        }
    }

    fn enter(&mut self) -> Result<(), Raise> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            raise!("NestingTooDeep", 17);
        }
        br!(18);
        Ok(())
    }

    fn object(&mut self) -> Result<(), Raise> {
        func!(3);
        self.enter()?;
        self.pos += 1;
        self.ws();
        if self.peek() == Some(b'}') {
            br!(19);
            self.pos += 1;
            self.depth -= 1;
            return Ok(());
        }
        let mut members = 0usize;
        loop {
            self.ws();
            match self.peek() {
                Some(b'"') => br!(20),
                None => raise!("UnexpectedEnd", 21),
                Some(_) => raise!("ExpectedKey", 22),
            }
            let key = self.string()?;
            if key.is_empty() {
                br!(23);
            } else {
                br!(24);
            }
            self.ws();
            match self.peek() {
                Some(b':') => br!(25),
                None => raise!("UnexpectedEnd", 26),
                Some(_) => raise!("ExpectedColon", 27),
            }
            self.pos += 1;
            self.ws();
            self.value()?;
            members += 1;
            self.ws();
            match self.peek() {
                Some(b',') => {
                    br!(28);
                    self.pos += 1;
                }
                Some(b'}') => {
                    br!(29);
                    self.pos += 1;
                    break;
                }
                None => raise!("UnexpectedEnd", 30),
                Some(_) => raise!("ExpectedCommaOrBrace", 31),
            }
        }
        if members > 1 {
            br!(32);
        } else {
            br!(33);
        }
        self.depth -= 1;
        Ok(())
    }

    fn array(&mut self) -> Result<(), Raise> {
        func!(4);
        self.enter()?;
        self.pos += 1;
        self.ws();
        if self.peek() == Some(b']') {
            br!(34);
            self.pos += 1;
            self.depth -= 1;
            return Ok(());
        }
        loop {
            self.ws();
            self.value()?;
            self.ws();
            match self.peek() {
                Some(b',') => {
                    br!(35);
                    self.pos += 1;
                }
                Some(b']') => {
                    br!(36);
                    self.pos += 1;
                    break;
                }
                None => raise!("UnexpectedEnd", 37),
                Some(_) => raise!("ExpectedCommaOrBracket", 38),
            }
        }
        self.depth -= 1;
        Ok(())
    }

    /// Returns the decoded length in bytes.
    fn string(&mut self) -> Result<Vec<u8>, Raise> {
        func!(5);
        self.pos += 1;
        let mut out = Vec::new();
        loop {
            let Some(c) = self.peek() else {
                raise!("UnexpectedEnd", 39);
            };
            self.pos += 1;
            match c {
                b'"' => {
                    br!(40);
                    return Ok(out);
                }
                b'\\' => {
                    br!(41);
                    self.escape(&mut out)?;
                }
                0x00..=0x1F => raise!("ControlCharacter", 42),
                0x80..=0xFF => {
                    br!(43);
                    out.push(c);
                }
                _ => {
                    br!(44);
                    out.push(c);
                }
            }
        }
    }

    fn escape(&mut self, out: &mut Vec<u8>) -> Result<(), Raise> {
        func!(6);
        let Some(e) = self.peek() else {
            raise!("UnexpectedEnd", 45);
        };
        self.pos += 1;
        match e {
            b'"' => br!(46),
            b'\\' => br!(47),
            b'/' => br!(48),
            b'b' => br!(49),
            b'f' => br!(50),
            b'n' => br!(51),
            b'r' => br!(52),
            b't' => br!(53),
            b'u' => {
                br!(54);
                let unit = self.hex4()?;
                if (0xD800..=0xDBFF).contains(&unit) {
                    br!(55);
                    if self.s[self.pos..].starts_with(b"\\u") {
                        self.pos += 2;
                        let low = self.hex4()?;
                        if !(0xDC00..=0xDFFF).contains(&low) {
                            raise!("InvalidSurrogate", 56);
                        }
                        br!(57);
                    } else {
                        raise!("UnpairedSurrogate", 58);
                    }
                } else if (0xDC00..=0xDFFF).contains(&unit) {
                    raise!("LoneLowSurrogate", 59);
                } else if unit < 0x20 {
                    br!(60);
                } else {
                    br!(61);
                }
            }
            _ => raise!("InvalidEscape", 62),
        }
        out.push(e);
        Ok(())
    }

    fn hex4(&mut self) -> Result<u16, Raise> {
        func!(7);
        let mut unit = 0u16;
        for _ in 0..4 {
            let Some(c) = self.peek() else {
                raise!("UnexpectedEnd", 63);
            };
            let d = match c {
                b'0'..=b'9' => {
                    br!(64);
                    c - b'0'
                }
                b'a'..=b'f' => {
                    br!(65);
                    c - b'a' + 10
                }
                b'A'..=b'F' => {
                    br!(66);
                    c - b'A' + 10
                }
                _ => raise!("InvalidHexDigit", 67),
            };
            unit = unit * 16 + d as u16;
            self.pos += 1;
        }
        Ok(unit)
    }

    fn literal(&mut self, word: &[u8]) -> Result<(), Raise> {
        func!(8);
        let rest = &self.s[self.pos..];
        if rest.starts_with(word) {
            br!(68);
            self.pos += word.len();
            Ok(())
        } else if word.starts_with(rest) {
            raise!("UnexpectedEnd", 69)
        } else {
            raise!("InvalidLiteral", 70)
        }
    }

    fn number(&mut self) -> Result<(), Raise> {
        func!(9);
        if self.peek() == Some(b'-') {
            br!(71);
            self.pos += 1;
        }
        match self.peek() {
            Some(b'0') => {
                br!(72);
                self.pos += 1;
                if matches!(self.peek(), Some(b'0'..=b'9')) {
                    raise!("LeadingZero", 73);
                }
            }
            Some(b'1'..=b'9') => {
                br!(74);
                self.digits();
            }
            None => raise!("UnexpectedEnd", 75),
            Some(_) => raise!("InvalidNumber", 76),
        }
        if self.peek() == Some(b'.') {
            br!(77);
            self.pos += 1;
            if self.digits() == 0 {
                raise!("InvalidNumber", 78);
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            br!(79);
            self.pos += 1;
            match self.peek() {
                Some(b'+') => {
                    br!(80);
                    self.pos += 1;
                }
                Some(b'-') => {
                    br!(81);
                    self.pos += 1;
                }
                _ => br!(82),
            }
            if self.digits() == 0 {
                raise!("InvalidNumber", 83);
            }
        }
        Ok(())
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        self.pos - start
    }
}
