//! Small arithmetic expression language for analytic forcing terms.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, the variables `x`, `y`,
//! the constants `pi`, `e`, and the functions `sin`, `cos`, `exp`.
//! `^` is right associative and binds tighter than unary minus, so
//! `-x^2 = -(x^2)`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(Error::Expr(format!("unexpected {t} in {src:?}"))),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x, y), b.eval(x, y));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(x, y);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    Op::Add => "+",
                    Op::Sub => "-",
                    Op::Mul => "*",
                    Op::Div => "/",
                    Op::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| Error::Expr(format!("bad number {text:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Expr(format!("unexpected character {c:?} in {src:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.peek().cloned().ok_or_else(|| Error::Expr("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Expr("missing ')'".into()));
                }
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "e" => Ok(Expr::Num(std::f64::consts::E)),
                "sin" | "cos" | "exp" => {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Exp,
                    };
                    if !self.eat('(') {
                        return Err(Error::Expr(format!("expected '(' after {name}")));
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(Error::Expr("missing ')'".into()));
                    }
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                _ => Err(Error::Expr(format!("unknown identifier '{name}'"))),
            },
            t => Err(Error::Expr(format!("unexpected {t}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn ev(s: &str, x: f64, y: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x, y)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-2 ^ 2", 0.0, 0.0), -4.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(ev("1 - 2 - 3", 0.0, 0.0), -4.0);
        assert_eq!(ev("2 * -x", 3.0, 0.0), -6.0);
        assert_eq!(ev("1.5e2 + 2E-1", 0.0, 0.0), 150.2);
    }

    #[test]
    fn functions_and_constants() {
        assert!((ev("sin(pi * x) * cos(pi * y)", 0.5, 0.0) - 1.0).abs() < 1e-15);
        assert!((ev("exp(1) - e", 0.0, 0.0)).abs() < 1e-15);
        assert!((ev("y - 0.5", 0.0, 0.25) + 0.25).abs() < 1e-15);
        assert_eq!(ev("pi", 0.0, 0.0), PI);
        assert_eq!(ev("e", 0.0, 0.0), E);
        // `e` as a constant next to an exponent literal
        assert_eq!(ev("2e1 * e", 0.0, 0.0), 20.0 * E);
    }

    #[test]
    fn errors() {
        for bad in ["", "1 +", "(1", "sin 1", "foo", "1 $ 2", "2 3", "cos()"] {
            assert!(matches!(Expr::parse(bad), Err(Error::Expr(_))), "{bad:?}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(-10.0f64..10.0).prop_map(Expr::Num), Just(Expr::X), Just(Expr::Y)];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), inner.clone(), prop_oneof![Just(Op::Add), Just(Op::Sub), Just(Op::Mul), Just(Op::Div)])
                    .prop_map(|(a, b, op)| Expr::Bin(op, Box::new(a), Box::new(b))),
                (inner, prop_oneof![Just(Func::Sin), Just(Func::Cos)]).prop_map(|(a, f)| Expr::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_reparses_to_same_value(e in arb_expr(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let back = Expr::parse(&e.to_string()).unwrap();
            let (a, b) = (e.eval(x, y), back.eval(x, y));
            prop_assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }
}
