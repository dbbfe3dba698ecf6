//! A small complex arithmetic grammar for user-supplied φ(z) or tail μ̄(y).
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | var | 'pi' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func  := exp | log | sqrt | pow | gamma | lgamma | gammaratio
//! ```
//! `gammaratio(a, b)` is Γ(a)/Γ(b) evaluated through log-gamma.

use crate::error::{Error, Result};
use crate::lgamma::ln_gamma;
use num_complex::Complex64 as C;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Pow,
    Gamma,
    LnGamma,
    GammaRatio,
}

impl Func {
    fn arity(self) -> usize {
        match self {
            Func::Pow | Func::GammaRatio => 2,
            _ => 1,
        }
    }
}

impl Expr {
    /// Parses `src`, treating `var` as the single free variable.
    pub fn parse(src: &str, var: &str) -> Result<Expr> {
        let mut p = Parser { s: src.as_bytes(), i: 0, var };
        let e = p.expr()?;
        p.ws();
        if p.i != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: C) -> C {
        match self {
            Expr::Num(v) => C::new(*v, 0.0),
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => cpow(a.eval(x), b.eval(x)),
            Expr::Call(f, args) => {
                let v: Vec<C> = args.iter().map(|a| a.eval(x)).collect();
                match f {
                    Func::Exp => v[0].exp(),
                    Func::Log => v[0].ln(),
                    Func::Sqrt => v[0].sqrt(),
                    Func::Pow => cpow(v[0], v[1]),
                    Func::Gamma => ln_gamma(v[0]).exp(),
                    Func::LnGamma => ln_gamma(v[0]),
                    Func::GammaRatio => (ln_gamma(v[0]) - ln_gamma(v[1])).exp(),
                }
            }
        }
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(C::new(x, 0.0)).re
    }
}

fn cpow(a: C, b: C) -> C {
    if b.im == 0.0 && b.re == b.re.round() && b.re.abs() <= 64.0 {
        return a.powi(b.re as i32);
    }
    if a.re == 0.0 && a.im == 0.0 {
        return if b.re > 0.0 { C::new(0.0, 0.0) } else { C::new(f64::INFINITY, 0.0) };
    }
    (b * a.ln()).exp()
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.i))
    }
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }
    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }
    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }
    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end")),
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.i;
                while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
                    self.i += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.i]).unwrap_or("");
                if name == self.var {
                    return Ok(Expr::Var);
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                let f = match name {
                    "exp" => Func::Exp,
                    "log" | "ln" => Func::Log,
                    "sqrt" => Func::Sqrt,
                    "pow" => Func::Pow,
                    "gamma" => Func::Gamma,
                    "lgamma" => Func::LnGamma,
                    "gammaratio" => Func::GammaRatio,
                    _ => return Err(Error::Parse(format!("unknown identifier '{name}'"))),
                };
                if !self.eat(b'(') {
                    return Err(self.err("expected '(' after function name"));
                }
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                if args.len() != f.arity() {
                    return Err(Error::Parse(format!("'{name}' takes {} argument(s)", f.arity())));
                }
                Ok(Expr::Call(f, args))
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }
    fn number(&mut self) -> Result<Expr> {
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
            self.i += 1;
        }
        if self.i < self.s.len() && (self.s[self.i] == b'e' || self.s[self.i] == b'E') {
            let save = self.i;
            self.i += 1;
            if self.i < self.s.len() && (self.s[self.i] == b'+' || self.s[self.i] == b'-') {
                self.i += 1;
            }
            if self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                    self.i += 1;
                }
            } else {
                self.i = save;
            }
        }
        let txt = std::str::from_utf8(&self.s[start..self.i]).unwrap_or("");
        txt.parse::<f64>().map(Expr::Num).map_err(|_| self.err("bad number"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let e = Expr::parse("2*z^2 - 3/(z+1) + exp(0)", "z").unwrap();
        let v = e.eval(C::new(2.0, 0.0));
        assert!((v.re - (8.0 - 1.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn gamma_ratio_primitive() {
        let e = Expr::parse("gammaratio(z+1.5, z+1)", "z").unwrap();
        let v = e.eval(C::new(1.0, 0.0)).re;
        let exact = crate::lgamma::gamma(2.5) / crate::lgamma::gamma(2.0);
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn scientific_notation_and_errors() {
        assert_eq!(Expr::parse("1e-3", "y").unwrap(), Expr::Num(1e-3));
        assert!(Expr::parse("sin(y)", "y").is_err());
        assert!(Expr::parse("(y", "y").is_err());
        assert!(Expr::parse("pow(y)", "y").is_err());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = Expr::parse("-y^2", "y").unwrap();
        assert_eq!(e.eval_real(3.0), -9.0);
    }
}
