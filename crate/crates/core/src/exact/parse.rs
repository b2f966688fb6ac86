//! Text grammar for polynomials and rational functions in `z`.
//!
//! Expressions use `+ - * / ^` with the usual precedence, parentheses,
//! rational literals and implicit multiplication (`2z`, `3(z - 1)`).
//! Exponents are integers, possibly negative: `z^-2`. Division binds like
//! multiplication, so `1/2*z` is `z/2` and `1/z + z^2` is a sum of two terms.

use crate::error::{KnError, Result};
use crate::exact::poly::Polynomial;
use crate::exact::ratfunc::RationalFunction;
use crate::scalar::Scalar;

fn parse_err(msg: impl Into<String>) -> KnError {
    KnError::Parse(msg.into())
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(String),
    Z,
    Op(char),
    Open,
    Close,
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_digit() {
            let mut n = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                n.push(d);
                chars.next();
            }
            out.push(Token::Num(n));
        } else {
            chars.next();
            out.push(match c {
                'z' => Token::Z,
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::Open,
                ')' => Token::Close,
                _ => return Err(parse_err(format!("unexpected `{c}` in `{input}`"))),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    input: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, what: &str) -> KnError {
        parse_err(format!("{what} at token {} in `{}`", self.pos + 1, self.input))
    }

    fn expr<T: Scalar>(&mut self) -> Result<RationalFunction<T>> {
        let mut acc = self.term()?;
        loop {
            if self.eat_op('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat_op('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<T: Scalar>(&mut self) -> Result<RationalFunction<T>> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_op('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat_op('/') {
                acc = acc.div(&self.unary()?)?;
            } else if matches!(self.peek(), Some(Token::Z | Token::Open | Token::Num(_))) {
                acc = acc.mul(&self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary<T: Scalar>(&mut self) -> Result<RationalFunction<T>> {
        if self.eat_op('-') {
            Ok(self.unary()?.neg())
        } else if self.eat_op('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power<T: Scalar>(&mut self) -> Result<RationalFunction<T>> {
        let base = self.primary()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let neg = self.eat_op('-');
        let Some(Token::Num(n)) = self.peek().cloned() else {
            return Err(self.err("expected an integer exponent"));
        };
        self.pos += 1;
        let e: i64 = n.parse().map_err(|_| self.err("exponent out of range"))?;
        base.pow(if neg { -e } else { e })
    }

    fn primary<T: Scalar>(&mut self) -> Result<RationalFunction<T>> {
        match self.peek().cloned() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                let c = T::parse_rational(&n).ok_or_else(|| self.err("bad number"))?;
                Ok(RationalFunction::constant(c))
            }
            Some(Token::Z) => {
                self.pos += 1;
                Ok(RationalFunction::z())
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.err("expected a number, `z` or `(`")),
        }
    }
}

pub fn parse_ratfunc<T: Scalar>(input: &str) -> Result<RationalFunction<T>> {
    let tokens = tokenize(input)?;
    if tokens.is_empty() {
        return Err(parse_err("empty expression"));
    }
    let mut p = Parser { tokens, pos: 0, input };
    let f = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err("trailing input"));
    }
    Ok(f)
}

pub fn parse_poly<T: Scalar>(input: &str) -> Result<Polynomial<T>> {
    let f = parse_ratfunc::<T>(input)?;
    if !f.is_polynomial() {
        return Err(parse_err(format!("`{input}` is not a polynomial")));
    }
    Ok(f.num().clone())
}
