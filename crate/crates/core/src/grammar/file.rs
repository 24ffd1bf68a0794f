//! Reader for the grammar file format.
//!
//! ```text
//! # comment
//! json    ::= "{" members "}" | "{" "}" ;
//! members ::= member | member "," members ;
//! ```
//!
//! Terminals are double-quoted (escapes `\"`, `\\`, `\n`, `\t`, `\uXXXX`),
//! bare identifiers are nonterminals, `""` is the empty terminal.

use std::collections::HashSet;

use super::{Grammar, GrammarError, RawSymbol};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Literal(String),
    Define,
    Bar,
    Semi,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> GrammarError {
        GrammarError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// Next token together with the position where it starts.
    fn next_token(&mut self) -> Result<Option<(Token, usize, usize)>, GrammarError> {
        loop {
            match self.chars.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
            }
        }

        let (line, column) = (self.line, self.column);
        let c = self.bump().expect("peeked");
        let tok = match c {
            '|' => Token::Bar,
            ';' => Token::Semi,
            ':' => {
                if self.bump() == Some(':') && self.bump() == Some('=') {
                    Token::Define
                } else {
                    return Err(self.error(line, column, "expected `::=`"));
                }
            }
            '"' => Token::Literal(self.literal(line, column)?),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::from(c);
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                        name.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Token::Ident(name)
            }
            other => {
                return Err(self.error(line, column, format!("unexpected character `{other}`")))
            }
        };
        Ok(Some((tok, line, column)))
    }

    fn literal(&mut self, line: usize, column: usize) -> Result<String, GrammarError> {
        let mut out = String::new();
        loop {
            let (el, ec) = (self.line, self.column);
            match self.bump() {
                None | Some('\n') => return Err(self.error(line, column, "unterminated terminal")),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('u') => {
                        let mut code = 0u32;
                        for _ in 0..4 {
                            let d = self
                                .bump()
                                .and_then(|c| c.to_digit(16))
                                .ok_or_else(|| self.error(el, ec, "bad \\u escape"))?;
                            code = code * 16 + d;
                        }
                        let c = char::from_u32(code)
                            .ok_or_else(|| self.error(el, ec, "\\u escape is not a scalar value"))?;
                        out.push(c);
                    }
                    _ => return Err(self.error(el, ec, "unknown escape")),
                },
                Some(c) => out.push(c),
            }
        }
    }
}

/// Parses grammar-file text into a [`Grammar`]. The first rule's left-hand
/// side becomes the start symbol; repeated left-hand sides merge in file
/// order.
pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut lexer = Lexer::new(text);
    let mut rules: Vec<(String, Vec<Vec<RawSymbol>>)> = Vec::new();
    let mut references: Vec<(String, usize, usize)> = Vec::new();

    while let Some((tok, line, column)) = lexer.next_token()? {
        let Token::Ident(lhs) = tok else {
            return Err(lexer.error(line, column, "expected rule name"));
        };
        match lexer.next_token()? {
            Some((Token::Define, ..)) => {}
            Some((_, l, c)) => return Err(lexer.error(l, c, "expected `::=`")),
            None => return Err(lexer.error(lexer.line, lexer.column, "expected `::=`")),
        }

        let mut alts = vec![Vec::new()];
        loop {
            match lexer.next_token()? {
                Some((Token::Ident(name), l, c)) => {
                    references.push((name.clone(), l, c));
                    alts.last_mut().unwrap().push(RawSymbol::Nonterminal(name));
                }
                Some((Token::Literal(t), ..)) => {
                    alts.last_mut().unwrap().push(RawSymbol::Terminal(t));
                }
                Some((Token::Bar, ..)) => alts.push(Vec::new()),
                Some((Token::Semi, ..)) => break,
                Some((Token::Define, l, c)) => {
                    return Err(lexer.error(l, c, "unexpected `::=` (missing `;`?)"))
                }
                None => {
                    return Err(lexer.error(lexer.line, lexer.column, "expected `;` at end of rule"))
                }
            }
        }
        rules.push((lhs, alts));
    }

    let defined: HashSet<&str> = rules.iter().map(|(n, _)| n.as_str()).collect();
    if let Some((name, line, column)) = references
        .iter()
        .find(|(n, ..)| !defined.contains(n.as_str()))
    {
        return Err(GrammarError::UndefinedAt {
            name: name.clone(),
            line: *line,
            column: *column,
        });
    }

    Grammar::new(rules)
}
