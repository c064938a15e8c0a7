//! Parser for element strings: `term (+ term)*` with
//! `term = coeff? gen(^exp)? (* gen(^exp)?)*`.
//!
//! The grammar is whitespace-tolerant and never panics on malformed input;
//! this is the entry point for untrusted descriptor data (and a fuzz target).

use crate::algebra::{AlgebraElement, AlgebraPresentation, Monomial};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty term at offset {0}")]
    EmptyTerm(usize),
    #[error("unexpected character `{0}` at offset {1}")]
    UnexpectedChar(char, usize),
    #[error("number too large at offset {0}")]
    NumberTooLarge(usize),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("exponent expected after `^` at offset {0}")]
    MissingExponent(usize),
    #[error("generator or coefficient expected at offset {0}")]
    ExpectedFactor(usize),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Plus,
    Star,
    Caret,
    Minus,
    Int(i64),
    Ident(String),
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Result<(Token, usize), ParseError> {
        let save = self.pos;
        let (tok, start) = self.next()?;
        self.pos = save;
        Ok((tok, start))
    }

    fn next(&mut self) -> Result<(Token, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Token::End, start));
        }
        let c = self.src[self.pos];
        match c {
            b'+' => {
                self.pos += 1;
                Ok((Token::Plus, start))
            }
            b'*' => {
                self.pos += 1;
                Ok((Token::Star, start))
            }
            b'^' => {
                self.pos += 1;
                Ok((Token::Caret, start))
            }
            b'-' => {
                self.pos += 1;
                Ok((Token::Minus, start))
            }
            b'0'..=b'9' => {
                let mut val: i64 = 0;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    val = val
                        .checked_mul(10)
                        .and_then(|v| v.checked_add((self.src[self.pos] - b'0') as i64))
                        .ok_or(ParseError::NumberTooLarge(start))?;
                    self.pos += 1;
                }
                Ok((Token::Int(val), start))
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end])
                    .map_err(|_| ParseError::UnexpectedChar('?', start))?
                    .to_string();
                self.pos = end;
                Ok((Token::Ident(name), start))
            }
            _ => Err(ParseError::UnexpectedChar(c as char, start)),
        }
    }
}

/// Parse an element string over `pres`.
pub fn parse_element(src: &str, pres: &AlgebraPresentation) -> Result<AlgebraElement, ParseError> {
    let mut lex = Lexer::new(src);
    let mut terms: Vec<(Monomial, i64)> = Vec::new();
    loop {
        let (coeff, monomial) = parse_term(&mut lex, pres)?;
        terms.push((monomial, coeff));
        let (tok, at) = lex.next()?;
        match tok {
            Token::Plus => continue,
            Token::End => break,
            Token::Int(_) | Token::Ident(_) | Token::Star | Token::Caret | Token::Minus => {
                return Err(ParseError::UnexpectedChar(src.as_bytes().get(at).map(|&b| b as char).unwrap_or('?'), at));
            }
        }
    }
    Ok(AlgebraElement::from_terms(pres, terms))
}

fn parse_term(
    lex: &mut Lexer,
    pres: &AlgebraPresentation,
) -> Result<(i64, Monomial), ParseError> {
    let mut coeff: i64 = 1;
    let mut exps = vec![0u32; pres.generators().len()];
    let mut saw_factor = false;

    // optional sign / leading coefficient
    let (tok, at) = lex.peek()?;
    match tok {
        Token::Minus => {
            lex.next()?;
            coeff = -1;
            let (tok2, at2) = lex.peek()?;
            if let Token::Int(v) = tok2 {
                lex.next()?;
                coeff *= v;
                saw_factor = true;
            } else if matches!(tok2, Token::Ident(_)) {
                // -gen...
            } else {
                return Err(ParseError::ExpectedFactor(at2));
            }
        }
        Token::Int(v) => {
            lex.next()?;
            coeff = v;
            saw_factor = true;
        }
        Token::Ident(_) => {}
        _ => return Err(ParseError::EmptyTerm(at)),
    }

    loop {
        let (tok, at) = lex.peek()?;
        match tok {
            Token::Ident(name) => {
                lex.next()?;
                let idx = pres
                    .generator_index(&name)
                    .ok_or(ParseError::UnknownGenerator(name))?;
                let mut exp = 1u32;
                let (tok2, _) = lex.peek()?;
                if tok2 == Token::Caret {
                    lex.next()?;
                    let (tok3, at3) = lex.next()?;
                    match tok3 {
                        Token::Int(v) if v >= 0 && v <= u32::MAX as i64 => exp = v as u32,
                        _ => return Err(ParseError::MissingExponent(at3)),
                    }
                }
                exps[idx] = exps[idx].saturating_add(exp);
                saw_factor = true;
            }
            Token::Star => {
                lex.next()?;
                let (tok2, at2) = lex.peek()?;
                if !matches!(tok2, Token::Ident(_) | Token::Int(_)) {
                    return Err(ParseError::ExpectedFactor(at2));
                }
                if let Token::Int(v) = tok2 {
                    lex.next()?;
                    coeff = coeff.saturating_mul(v);
                    saw_factor = true;
                }
            }
            _ => {
                if !saw_factor {
                    return Err(ParseError::EmptyTerm(at));
                }
                return Ok((coeff, Monomial { exps }));
            }
        }
    }
}
