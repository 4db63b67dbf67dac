//! Recursive-descent parser.
//!
//! ```text
//! expr    := term { ("+" | "-") term }
//! term    := unary { ("*" | "/") unary }
//! unary   := ("-" | "+") unary | power
//! power   := primary [ "^" exponent ]
//! exponent:= ["-" | "+"] integer | "(" ["-" | "+"] integer ")"
//! primary := number | symbol | func "(" expr ")" | "(" expr ")"
//! ```
//!
//! Numbers are exact: `0.25` parses to `1/4`. The returned tree is not
//! simplified.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Chart, Expr, ExprError, Func, Node, Symbol};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let mut frac_part = String::new();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = chars[fs..i].iter().collect();
            }
            if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_' || chars[i] == '.') {
                return Err(ExprError::Syntax {
                    column: i + 1,
                    message: format!("unexpected `{}` after number", chars[i]),
                });
            }
            let digits = format!("{int_part}{frac_part}");
            let n: BigInt = if digits.is_empty() {
                BigInt::zero()
            } else {
                digits.parse().map_err(|_| ExprError::Syntax {
                    column: col,
                    message: "malformed number".into(),
                })?
            };
            let d = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push((Tok::Num(BigRational::new(n, d)), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    chart: &'a Chart,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            column: self.col(),
            message: message.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.eat(op) {
            Ok(())
        } else {
            self.err(format!("expected `{op}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                let t = self.term()?;
                terms.push(Expr::from_node(Node::Mul(vec![Expr::int(-1), t])));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::from_node(Node::Add(terms))
        })
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let r = self.unary()?;
                acc = Expr::from_node(Node::Mul(vec![acc, r]));
            } else if self.eat('/') {
                let r = self.unary()?;
                acc = Expr::from_node(Node::Div(acc, r));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            let inner = self.unary()?;
            if let Node::Num(r) = inner.node() {
                return Ok(Expr::rational(-r.clone()));
            }
            return Ok(Expr::from_node(Node::Mul(vec![Expr::int(-1), inner])));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn signed_int(&mut self) -> Result<i64, ExprError> {
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        match self.peek().cloned() {
            Some(Tok::Num(r)) if r.is_integer() => {
                let v: i64 = r.numer().try_into().map_err(|_| ExprError::Syntax {
                    column: self.col(),
                    message: "exponent out of range".into(),
                })?;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.err("exponent must be an integer"),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.eat('^') {
            let n = if self.eat('(') {
                let n = self.signed_int()?;
                self.expect(')')?;
                n
            } else {
                self.signed_int()?
            };
            return Ok(Expr::from_node(Node::Pow(base, n)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(Expr::rational(r))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Op('(')) {
                    let Some(f) = Func::from_name(&name) else {
                        return Err(ExprError::Syntax {
                            column: col,
                            message: format!("unknown function `{name}`"),
                        });
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::from_node(Node::Func(f, arg)));
                }
                let s = Symbol::new(&name);
                if !self.chart.contains(&s) {
                    return Err(ExprError::UndeclaredSymbol { name, column: col });
                }
                Ok(Expr::var(&s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses `src` against `chart`. Every symbol must be declared in the chart.
pub fn parse_expr(src: &str, chart: &Chart) -> Result<Expr, ExprError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: src.chars().count() + 1,
        chart,
    };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::states(&["x1", "x2", "x3"]).unwrap()
    }

    #[test]
    fn rational_literal() {
        let e = parse_expr("-1/2", &chart()).unwrap().simplify();
        assert_eq!(e, Expr::frac(-1, 2));
        let d = parse_expr("0.25", &chart()).unwrap();
        assert_eq!(d, Expr::frac(1, 4));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("-x1^2 + 2*x2/4", &chart()).unwrap().simplify();
        let x1 = Expr::sym("x1");
        let x2 = Expr::sym("x2");
        assert_eq!(e, -x1.pow(2) + Expr::frac(1, 2) * x2);
        let p = parse_expr("x1^(-2)", &chart()).unwrap().simplify();
        assert_eq!(p, Expr::sym("x1").pow(-2));
    }

    #[test]
    fn errors_carry_columns() {
        match parse_expr("x1 + x9", &chart()) {
            Err(ExprError::UndeclaredSymbol { name, column }) => {
                assert_eq!(name, "x9");
                assert_eq!(column, 6);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_expr("x1 +", &chart()),
            Err(ExprError::Syntax { column: 5, .. })
        ));
        assert!(matches!(
            parse_expr("foo(x1)", &chart()),
            Err(ExprError::Syntax { column: 1, .. })
        ));
        assert!(parse_expr("x1^x2", &chart()).is_err());
        assert!(parse_expr("(x1", &chart()).is_err());
        assert!(parse_expr("", &chart()).is_err());
    }

    #[test]
    fn functions() {
        let e = parse_expr("cos(x3) + sqrt(x1*x1)", &chart()).unwrap();
        assert!(e.free_symbols().len() == 2);
    }
}
