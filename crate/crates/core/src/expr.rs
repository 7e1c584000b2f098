//! Inline polynomial expressions: a convenience input form for series.
//!
//! Grammar, tightest first: `^` (integer exponent), unary `-`, `*`, binary
//! `+ -`, with parentheses. Atoms are rational literals `p/q`, the imaginary
//! unit `i`, and variable names as the target space spells them (`z1`, `w2`,
//! `~z1`, `x1`, ...). `/` only forms rational literals; there is no series
//! division. The term-list document format stays the primary (exact)
//! interchange; expressions are for humans.

use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;

use crate::coeff::{CoeffMode, Coefficient};
use crate::error::ExprError;
use crate::series::{MultiIndex, TruncatedSeries};
use crate::space::VariableSpace;

#[derive(Debug, Clone, PartialEq)]
pub enum ExpressionAst {
    Rational(BigRational),
    ImaginaryUnit,
    Variable { name: String, pos: usize },
    Neg(Box<ExpressionAst>),
    Sum(Box<ExpressionAst>, Box<ExpressionAst>),
    Difference(Box<ExpressionAst>, Box<ExpressionAst>),
    Product(Box<ExpressionAst>, Box<ExpressionAst>),
    Power(Box<ExpressionAst>, u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Integer(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

/// Byte-positioned tokens; the position of end-of-input is text.len().
fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                tokens.push((Token::Plus, start));
                i += 1;
            }
            b'-' => {
                tokens.push((Token::Minus, start));
                i += 1;
            }
            b'*' => {
                tokens.push((Token::Star, start));
                i += 1;
            }
            b'/' => {
                tokens.push((Token::Slash, start));
                i += 1;
            }
            b'^' => {
                tokens.push((Token::Caret, start));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, start));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, start));
                i += 1;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: BigInt = text[start..i].parse().expect("digits parse");
                tokens.push((Token::Integer(lit), start));
            }
            b'~' | b'a'..=b'z' | b'A'..=b'Z' => {
                i += 1;
                if b == b'~' {
                    if i >= bytes.len() || !bytes[i].is_ascii_alphabetic() {
                        return Err(ExprError::Syntax {
                            pos: start,
                            msg: "`~` must prefix a variable name".into(),
                        });
                    }
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                tokens.push((Token::Name(text[start..i].to_string()), start));
            }
            _ => {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", &text[start..start + 1]),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn eat(&mut self, want: &Token) -> bool {
        if self.peek() == Some(want) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expression(&mut self) -> Result<ExpressionAst, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Token::Plus) {
                lhs = ExpressionAst::Sum(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Token::Minus) {
                lhs = ExpressionAst::Difference(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ExpressionAst, ExprError> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::Star) {
            lhs = ExpressionAst::Product(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExpressionAst, ExprError> {
        if self.eat(&Token::Minus) {
            return Ok(ExpressionAst::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExpressionAst, ExprError> {
        let mut base = self.atom()?;
        while self.eat(&Token::Caret) {
            let pos = self.pos();
            match self.bump() {
                Some((Token::Integer(e), _)) => {
                    let e = u32::try_from(e).map_err(|_| ExprError::BadExponent { pos })?;
                    base = ExpressionAst::Power(Box::new(base), e);
                }
                _ => return Err(ExprError::BadExponent { pos }),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExpressionAst, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Some((Token::Integer(n), _)) => {
                if self.eat(&Token::Slash) {
                    let dpos = self.pos();
                    match self.bump() {
                        Some((Token::Integer(d), _)) => {
                            if d == BigInt::from(0) {
                                return Err(ExprError::Syntax {
                                    pos: dpos,
                                    msg: "zero denominator".into(),
                                });
                            }
                            Ok(ExpressionAst::Rational(BigRational::new(n, d)))
                        }
                        _ => Err(ExprError::Syntax {
                            pos: dpos,
                            msg: "expected an integer denominator".into(),
                        }),
                    }
                } else {
                    Ok(ExpressionAst::Rational(BigRational::from_integer(n)))
                }
            }
            Some((Token::Name(name), npos)) => {
                if name == "i" {
                    Ok(ExpressionAst::ImaginaryUnit)
                } else {
                    Ok(ExpressionAst::Variable { name, pos: npos })
                }
            }
            Some((Token::LParen, _)) => {
                let inner = self.expression()?;
                if !self.eat(&Token::RParen) {
                    return Err(ExprError::Syntax {
                        pos: self.pos(),
                        msg: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            _ => Err(ExprError::Syntax {
                pos,
                msg: "expected a literal, a variable, or `(`".into(),
            }),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<ExpressionAst, ExprError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        at: 0,
        end: text.len(),
    };
    let ast = parser.expression()?;
    if parser.at != parser.tokens.len() {
        return Err(ExprError::Syntax {
            pos: parser.pos(),
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(ast)
}

impl ExpressionAst {
    /// Evaluate in the truncated exact ring over the given space.
    pub fn evaluate(
        &self,
        space: &Arc<VariableSpace>,
        order: u32,
    ) -> Result<TruncatedSeries, ExprError> {
        match self {
            ExpressionAst::Rational(q) => Ok(TruncatedSeries::from_terms(
                space,
                order,
                CoeffMode::Exact,
                vec![(
                    MultiIndex::zero(space.len()),
                    Coefficient::from_rationals(q.clone(), BigRational::from_integer(0.into())),
                )],
            )?),
            ExpressionAst::ImaginaryUnit => Ok(TruncatedSeries::from_terms(
                space,
                order,
                CoeffMode::Exact,
                vec![(MultiIndex::zero(space.len()), Coefficient::i())],
            )?),
            ExpressionAst::Variable { name, pos } => {
                let idx = space
                    .index_of(name)
                    .ok_or_else(|| ExprError::UnknownVariable {
                        name: name.clone(),
                        pos: *pos,
                    })?;
                Ok(TruncatedSeries::variable(space, idx, order, CoeffMode::Exact)?)
            }
            ExpressionAst::Neg(a) => {
                Ok(a.evaluate(space, order)?.scale(&Coefficient::from_integer(-1))?)
            }
            ExpressionAst::Sum(a, b) => {
                Ok(a.evaluate(space, order)?.add(&b.evaluate(space, order)?)?)
            }
            ExpressionAst::Difference(a, b) => {
                Ok(a.evaluate(space, order)?.sub(&b.evaluate(space, order)?)?)
            }
            ExpressionAst::Product(a, b) => {
                Ok(a.evaluate(space, order)?.mul(&b.evaluate(space, order)?)?)
            }
            ExpressionAst::Power(a, e) => {
                let base = a.evaluate(space, order)?;
                let mut acc = TruncatedSeries::one(space, order, CoeffMode::Exact)?;
                for _ in 0..*e {
                    acc = acc.mul(&base)?;
                }
                Ok(acc)
            }
        }
    }
}

/// Parse and evaluate in one step.
pub fn series_from_expression(
    text: &str,
    space: &Arc<VariableSpace>,
    order: u32,
) -> Result<TruncatedSeries, ExprError> {
    parse_expression(text)?.evaluate(space, order)
}
