//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := ('-' | '+') term | product
//! product := power (('*' | '/') factor)*
//! factor  := ('-' | '+') factor | power
//! power   := atom ('^' exponent)?
//! exponent:= INT | '-' INT | '(' ['-' | '+'] INT ')'
//! atom    := INT | '(' expr ')' | FUNC '(' expr ')' | opaque | IDENT
//! opaque  := IDENT '\''* '(' 't' ')' | IDENT '^(' INT ')' '(' 't' ')'
//! ```
//!
//! A leading sign applies to the whole product (`-2*x` is `-(2*x)`), which
//! is what makes printing a normalized tree and parsing it back the
//! identity.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::SymError;
use crate::expr::{Expr, Node};
use crate::kernel::Func;

pub fn parse(src: &str) -> Result<Expr, SymError> {
    let mut p = Parser { s: src.as_bytes(), pos: 0 };
    p.ws();
    if p.pos >= p.s.len() {
        return Err(p.err("empty expression"));
    }
    let e = p.expr()?;
    p.ws();
    if p.pos < p.s.len() {
        return Err(p.err(&format!("unexpected `{}`", p.s[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> SymError {
        SymError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), SymError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, SymError> {
        let first = self.term()?;
        let mut terms = vec![first];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    terms.push(Expr::new(Node::Neg(t)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::new(Node::Add(terms))
        })
    }

    fn term(&mut self) -> Result<Expr, SymError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::new(Node::Neg(self.term()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()
            }
            _ => self.product(),
        }
    }

    fn product(&mut self) -> Result<Expr, SymError> {
        let mut factors = vec![self.power()?];
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                Some(b'/') => {
                    let at = self.pos;
                    self.pos += 1;
                    let d = self.factor()?;
                    let n = collapse(std::mem::take(&mut factors));
                    let q = match (n.node(), d.node()) {
                        (Node::Num(a), Node::Num(b)) if a.is_integer() && b.is_integer() => {
                            if b.is_zero() {
                                return Err(SymError::Syntax {
                                    pos: at,
                                    msg: "division by the literal 0".into(),
                                });
                            }
                            Expr::rational(a / b)
                        }
                        _ => Expr::new(Node::Div(n, d)),
                    };
                    factors.push(q);
                }
                _ => break,
            }
        }
        Ok(collapse(factors))
    }

    fn factor(&mut self) -> Result<Expr, SymError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::new(Node::Neg(self.factor()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, SymError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.exponent()?;
            return Ok(Expr::new(Node::Pow(base, e)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, SymError> {
        let paren = self.eat(b'(');
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let start = self.pos;
        let n = self.integer()?.ok_or_else(|| self.err("exponents must be integer literals"))?;
        let n: i64 = i64::try_from(n).map_err(|_| SymError::Syntax {
            pos: start,
            msg: "exponent too large".into(),
        })?;
        if paren {
            self.expect(b')')?;
        }
        Ok(if neg { -n } else { n })
    }

    fn integer(&mut self) -> Result<Option<BigInt>, SymError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        if self.pos < self.s.len() && (self.s[self.pos] == b'.' || self.s[self.pos].is_ascii_alphabetic()) {
            return Err(self.err("only integer literals are allowed (write rationals as p/q)"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(Some(txt.parse().unwrap()))
    }

    fn ident(&mut self) -> Option<(usize, String)> {
        self.ws();
        let start = self.pos;
        if self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphabetic() || self.s[self.pos] == b'_') {
            self.pos += 1;
            while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                self.pos += 1;
            }
            Some((start, std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string()))
        } else {
            None
        }
    }

    /// Consume `( t )`; used after an opaque symbol name.
    fn time_arg(&mut self) -> bool {
        let save = self.pos;
        if self.eat(b'(') {
            if let Some((_, n)) = self.ident() {
                if n == "t" && self.eat(b')') {
                    return true;
                }
            }
        }
        self.pos = save;
        false
    }

    fn atom(&mut self) -> Result<Expr, SymError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?.unwrap();
                Ok(Expr::rational(BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let (start, name) = self.ident().unwrap();
                // Primes: f'(t), f''(t), ...
                if self.s.get(self.pos) == Some(&b'\'') {
                    let mut order = 0;
                    while self.s.get(self.pos) == Some(&b'\'') {
                        self.pos += 1;
                        order += 1;
                    }
                    if Func::from_name(&name).is_some() {
                        return Err(SymError::MalformedDerivative {
                            pos: start,
                            msg: format!("`{name}` is a built-in function, not an opaque symbol"),
                        });
                    }
                    if !self.time_arg() {
                        return Err(SymError::MalformedDerivative {
                            pos: self.pos,
                            msg: format!("`{name}{}` must be applied to (t)", "'".repeat(order)),
                        });
                    }
                    return Ok(Expr::opaque(&name, order as u32));
                }
                // Explicit order: f^(k)(t).
                if self.s.get(self.pos) == Some(&b'^') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.eat(b'(') {
                        let neg = self.eat(b'-');
                        let num_at = self.pos;
                        if let Ok(Some(k)) = self.integer() {
                            if self.eat(b')') && self.peek() == Some(b'(') {
                                let ok_order = !neg && u32::try_from(&k).is_ok();
                                if !ok_order || Func::from_name(&name).is_some() {
                                    return Err(SymError::MalformedDerivative {
                                        pos: num_at,
                                        msg: "derivative order must be a nonnegative integer on an opaque symbol".into(),
                                    });
                                }
                                if !self.time_arg() {
                                    return Err(SymError::MalformedDerivative {
                                        pos: self.pos,
                                        msg: format!("`{name}^({k})` must be applied to (t)"),
                                    });
                                }
                                return Ok(Expr::opaque(&name, u32::try_from(&k).unwrap()));
                            }
                        }
                    }
                    self.pos = save;
                }
                if let Some(func) = Func::from_name(&name) {
                    if !self.eat(b'(') {
                        return Err(SymError::Syntax {
                            pos: self.pos,
                            msg: format!("`{name}` needs a parenthesized argument"),
                        });
                    }
                    let a = self.expr()?;
                    self.expect(b')')?;
                    return Ok(Expr::func(func, a));
                }
                if self.peek() == Some(b'(') {
                    if self.time_arg() {
                        return Ok(Expr::opaque(&name, 0));
                    }
                    return Err(SymError::UnknownFunction { pos: start, name });
                }
                Ok(Expr::var(&name))
            }
            Some(c) => Err(self.err(&format!("unexpected `{}`", c as char))),
        }
    }
}

fn collapse(mut factors: Vec<Expr>) -> Expr {
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::new(Node::Mul(factors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_signs() {
        let e = parse("-2*x^2 + y/3").unwrap();
        assert_eq!(e.to_string(), "-2*x^2 + y/3");
        assert!(matches!(e.node(), Node::Add(_)));
    }

    #[test]
    fn opaque_forms() {
        assert_eq!(parse("f(t)").unwrap(), Expr::opaque("f", 0));
        assert_eq!(parse("f''(t)").unwrap(), Expr::opaque("f", 2));
        assert_eq!(parse("f^(5)(t)").unwrap(), Expr::opaque("f", 5));
        assert!(matches!(parse("f^(2)").unwrap().node(), Node::Pow(..)));
    }

    #[test]
    fn error_positions() {
        let e = parse("x + foo(y)").unwrap_err();
        assert_eq!(e, SymError::UnknownFunction { pos: 4, name: "foo".into() });
        assert!(matches!(parse("f'(x)"), Err(SymError::MalformedDerivative { .. })));
        assert!(matches!(parse("f^(-1)(t)"), Err(SymError::MalformedDerivative { .. })));
        assert_eq!(parse("x + ").unwrap_err().position(), Some(4));
        assert!(matches!(parse("(x"), Err(SymError::Syntax { pos: 2, .. })));
    }
}
