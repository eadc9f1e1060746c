//! Tokenizer shared by the program, automaton and scheduler formats.

use std::fmt;

use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    /// Punctuation and operators, spelled as in the source.
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

// Longest first, so that `-->` wins over `--` and `->`.
const SYMBOLS: &[&str] = &[
    "-->", ":=", "->", "--", "..", "&&", "||", "==", "!=", "<=", ">=", "{", "}", "(", ")", ";",
    ",", ":", "=", "!", "<", ">", "+", "-", "*", "%", "/",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line,
                col: start,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            let n = s.parse().map_err(|_| {
                SyntaxError::new(line, start, format!("integer `{s}` is too large"))
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                line,
                col: start,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    line,
                    col: start,
                });
                i += s.len();
                col += s.len();
            }
            None => {
                return Err(SyntaxError::new(
                    line,
                    col,
                    format!("unexpected character `{c}`"),
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Cursor over a token list with the usual expect/accept helpers.
pub struct Cursor {
    toks: Vec<Token>,
    pub pos: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Cursor {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        let (line, col) = self.here();
        SyntaxError::new(line, col, message)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    pub fn accept_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.advance();
        }
        hit
    }

    pub fn accept_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.advance();
        }
        hit
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.accept_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.peek())))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.accept_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`, found {}", self.peek())))
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            t => Err(self.error(format!("expected a name, found {t}"))),
        }
    }

    pub fn int(&mut self) -> Result<u64, SyntaxError> {
        match *self.peek() {
            Tok::Int(n) => {
                self.advance();
                Ok(n)
            }
            ref t => Err(self.error(format!("expected an integer, found {t}"))),
        }
    }

    /// Optionally negated integer.
    pub fn signed(&mut self) -> Result<i64, SyntaxError> {
        let neg = self.accept_sym("-");
        let (line, col) = self.here();
        let n = self.int()?;
        let v =
            i64::try_from(n).map_err(|_| SyntaxError::new(line, col, "integer out of range"))?;
        Ok(if neg { -v } else { v })
    }

    /// `n`, `-n` or `n/d` as an exact rational.
    pub fn rational(&mut self) -> Result<qsynth_core::Q, SyntaxError> {
        use num_bigint::BigInt;
        let (line, col) = self.here();
        let num = BigInt::from(self.signed()?);
        let den = if self.accept_sym("/") {
            BigInt::from(self.int()?)
        } else {
            BigInt::from(1)
        };
        if den == BigInt::from(0) {
            return Err(SyntaxError::new(line, col, "zero denominator"));
        }
        Ok(qsynth_core::Q::new(num, den))
    }

    /// Comma-separated names up to (not including) a terminator.
    pub fn names(&mut self, close: &str) -> Result<Vec<String>, SyntaxError> {
        let mut out = Vec::new();
        if self.is_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if !self.accept_sym(",") {
                return Ok(out);
            }
        }
    }
}
