//! Lenient JSON reader: tokenizer plus an explicit-stack parser.
//!
//! Accepts trailing commas, single-quoted strings, `//` line comments and
//! bare identifiers as object keys.

use crate::harness::probe::{br, func, raise, Raise};

pub(crate) const SOURCE: &str = include_str!("lenient.rs");
pub(crate) const BRANCHES: u32 = 71;
pub(crate) const FUNCTIONS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Open(u8),
    Close(u8),
    Colon,
    Comma,
    Str { quote: u8, len: usize },
    Ident,
    Num,
    True,
    False,
    Null,
}

pub(crate) fn run(input: &str) -> Result<(), Raise> {
    func!(0);
    br!(0);
    let toks = tokenize(input.as_bytes())?;
    if toks.is_empty() {
        raise!("EmptyDocument", 1);
    }
    parse(&toks)
}

fn tokenize(s: &[u8]) -> Result<Vec<Tok>, Raise> {
    func!(1);
    let mut toks = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let c = s[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                br!(2);
                i += 1;
            }
            b'/' if s.get(i + 1) == Some(&b'/') => {
                br!(3);
                while i < s.len() && s[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' | b'[' => {
                br!(4);
                toks.push(Tok::Open(c));
                i += 1;
            }
            b'}' | b']' => {
                br!(5);
                toks.push(Tok::Close(c));
                i += 1;
            }
            b':' => {
                br!(6);
                toks.push(Tok::Colon);
                i += 1;
            }
            b',' => {
                br!(7);
                toks.push(Tok::Comma);
                i += 1;
            }
            b'"' | b'\'' => {
                if c == b'\'' {
                    br!(8);
                } else {
                    br!(9);
                }
                let (len, next) = quoted(s, i)?;
                toks.push(Tok::Str { quote: c, len });
                i = next;
            }
            b'-' | b'+' | b'.' | b'0'..=b'9' => {
                br!(10);
                i = numeric(s, i)?;
                toks.push(Tok::Num);
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' | b'$' => {
                let start = i;
                while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_' || s[i] == b'$')
                {
                    i += 1;
                }
                toks.push(match &s[start..i] {
                    b"true" => {
                        br!(11);
                        Tok::True
                    }
                    b"false" => {
                        br!(12);
                        Tok::False
                    }
                    b"null" => {
                        br!(13);
                        Tok::Null
                    }
                    _ => {
                        br!(14);
                        Tok::Ident
                    }
                });
            }
            _ => raise!("UnexpectedCharacter", 15),
        }
    }
    Ok(toks)
}

/// Scans a quoted string starting at `start`; returns (decoded length, next index).
fn quoted(s: &[u8], start: usize) -> Result<(usize, usize), Raise> {
    func!(2);
    let quote = s[start];
    let mut i = start + 1;
    let mut len = 0;
    loop {
        let Some(&c) = s.get(i) else {
            raise!("UnterminatedString", 16);
        };
        if c == quote {
            br!(17);
            return Ok((len, i + 1));
        }
        if c == b'\\' {
            match s.get(i + 1) {
                Some(b'u') => {
                    let hex = s.get(i + 2..i + 6).unwrap_or(&[]);
                    if hex.len() == 4 && hex.iter().all(u8::is_ascii_hexdigit) {
                        br!(18);
                        i += 6;
                    } else {
                        raise!("BadUnicodeEscape", 19);
                    }
                }
                Some(b'\'') => {
                    br!(20);
                    i += 2;
                }
                Some(b'"' | b'\\' | b'/') => {
                    br!(21);
                    i += 2;
                }
                Some(b'b' | b'f' | b'n' | b'r' | b't') => {
                    br!(22);
                    i += 2;
                }
                Some(_) => raise!("BadEscape", 23),
                None => raise!("UnterminatedString", 24),
            }
        } else if c == b'\n' {
            raise!("NewlineInString", 25);
        } else if c >= 0x80 {
            br!(26);
            i += 1;
        } else if c == b'"' || c == b'\'' {
            br!(27);
            i += 1;
        } else {
            br!(28);
            i += 1;
        }
        len += 1;
    }
}

fn numeric(s: &[u8], start: usize) -> Result<usize, Raise> {
    func!(3);
    let mut i = start;
    let mut digits = 0;
    let mut dots = 0;
    let mut exp = false;
    while let Some(&c) = s.get(i) {
        match c {
            b'0'..=b'9' => digits += 1,
            b'.' => {
                br!(29);
                dots += 1;
            }
            b'e' | b'E' => {
                if exp {
                    raise!("MalformedNumber", 30);
                }
                br!(31);
                exp = true;
                if matches!(s.get(i + 1), Some(b'+' | b'-')) {
                    br!(32);
                    i += 1;
                }
            }
            b'-' | b'+' if i == start => br!(33),
            _ => break,
        }
        i += 1;
    }
    if digits == 0 || dots > 1 {
        raise!("MalformedNumber", 34);
    }
    if digits > 8 {
        br!(35);
    } else {
        br!(36);
    }
    Ok(i)
}

#[derive(Clone, Copy, PartialEq)]
enum Expect {
    Value,
    KeyOrClose,
    Colon,
    CommaOrClose,
}

fn parse(toks: &[Tok]) -> Result<(), Raise> {
    func!(4);
    // Each frame holds the container's opening byte and its element count.
    let mut stack: Vec<(u8, usize)> = Vec::new();
    let mut expect = Expect::Value;
    let mut done = false;
    let mut max_depth = 0;
    for (n, tok) in toks.iter().enumerate() {
        if done {
            raise!("TrailingTokens", 37);
        }
        let in_object = matches!(stack.last(), Some((b'{', _)));
        expect = match (expect, *tok) {
            (Expect::Value, Tok::Open(c)) => {
                br!(38);
                stack.push((c, 0));
                max_depth = max_depth.max(stack.len());
                if c == b'{' {
                    br!(39);
                    Expect::KeyOrClose
                } else {
                    br!(40);
                    Expect::Value
                }
            }
            (Expect::Value, Tok::Close(b']')) if stack.last().is_some_and(|f| f.0 == b'[') => {
                let (_, count) = stack.pop().unwrap_or_default();
                if count > 0 {
                    // `[1,]`: the comma before this bracket was trailing.
                    br!(41);
                } else {
                    br!(42);
                }
                done = stack.is_empty();
                Expect::CommaOrClose
            }
            (Expect::Value, Tok::Str { quote, .. }) => {
                if quote == b'\'' {
                    br!(43);
                } else {
                    br!(44);
                }
                done = stack.is_empty();
                Expect::CommaOrClose
            }
            (Expect::Value, Tok::Num | Tok::True | Tok::False | Tok::Null) => {
                br!(45);
                done = stack.is_empty();
                Expect::CommaOrClose
            }
            (Expect::Value, Tok::Ident) => raise!("BareWordValue", 46),
            (Expect::Value, _) => raise!("ExpectedValue", 47),
            (Expect::KeyOrClose, Tok::Str { len, .. }) => {
                if len == 0 {
                    br!(48);
                } else {
                    br!(49);
                }
                Expect::Colon
            }
            (Expect::KeyOrClose, Tok::Ident) => {
                br!(50);
                Expect::Colon
            }
            (Expect::KeyOrClose, Tok::Close(b'}')) => {
                let (_, count) = stack.pop().unwrap_or_default();
                if count > 0 {
                    br!(51);
                } else {
                    br!(52);
                }
                done = stack.is_empty();
                Expect::CommaOrClose
            }
            (Expect::KeyOrClose, _) => raise!("ExpectedKey", 53),
            (Expect::Colon, Tok::Colon) => {
                br!(54);
                Expect::Value
            }
            (Expect::Colon, _) => raise!("ExpectedColon", 55),
            (Expect::CommaOrClose, Tok::Comma) => {
                let Some(frame) = stack.last_mut() else {
                    raise!("StrayComma", 56);
                };
                frame.1 += 1;
                if in_object {
                    br!(57);
                    Expect::KeyOrClose
                } else {
                    br!(58);
                    Expect::Value
                }
            }
            (Expect::CommaOrClose, Tok::Close(c)) => {
                let Some((open, _)) = stack.pop() else {
                    raise!("UnbalancedClose", 59);
                };
                if (open, c) == (b'{', b'}') {
                    br!(60);
                } else if (open, c) == (b'[', b']') {
                    br!(61);
                } else {
                    raise!("MismatchedClose", 62);
                }
                if n + 1 == toks.len() {
                    br!(63);
                }
                done = stack.is_empty();
                Expect::CommaOrClose
            }
            (Expect::CommaOrClose, _) => raise!("ExpectedCommaOrClose", 64),
        };
    }
    if !stack.is_empty() {
        raise!("UnexpectedEnd", 65);
    }
    if expect != Expect::CommaOrClose {
        raise!("UnexpectedEnd", 66);
    }
    match max_depth {
        0 => br!(67),
        1 => br!(68),
        2..=4 => br!(69),
        _ => br!(70),
    }
    Ok(())
}
