//! Text format for user profiles.
//!
//! ```text
//! # Korányi sphere of radius R
//! param R = 1.5
//! f = R * sqrt(-cos(s))
//! g = R^2 * sin(s)
//! domain = (pi/2, 3*pi/2)
//! ```
//!
//! Statements are separated by newlines or `;`. Expressions support
//! `+ - * / ^`, unary minus, parentheses, the functions
//! `sin cos tan sqrt exp log abs atan`, the constant `pi`, the parameter `s`
//! and declared parameters. `^` is right-associative and its exponent must
//! not depend on `s`.

use std::sync::Arc;

use crate::dual::Dual2;
use crate::error::{Error, Result};

use super::{Evaluator, Parametrisation, ProfileCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Log,
    Abs,
    Atan,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    fn apply(self, x: Dual2) -> Dual2 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sqrt => x.sqrt(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Abs => x.abs(),
            Func::Atan => x.atan(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

/// Parsed expression; identifiers are resolved after the whole file is read.
#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Num(f64),
    Var,
    Ident(String, Pos),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>, Pos),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn resolve(self, params: &[(String, f64)]) -> Result<Expr> {
        Ok(match self {
            Expr::Ident(name, pos) => match name.as_str() {
                "s" => Expr::Var,
                "pi" => Expr::Num(std::f64::consts::PI),
                _ => match params.iter().find(|(k, _)| *k == name) {
                    Some((_, v)) => Expr::Num(*v),
                    None => {
                        return Err(Error::UnknownIdentifier {
                            name,
                            line: pos.line,
                            column: pos.column,
                        })
                    }
                },
            },
            Expr::Neg(a) => Expr::Neg(Box::new(a.resolve(params)?)),
            Expr::Bin(op, a, b) => Expr::Bin(op, Box::new(a.resolve(params)?), Box::new(b.resolve(params)?)),
            Expr::Pow(a, b, pos) => {
                let b = b.resolve(params)?;
                if b.depends_on_s() {
                    return Err(Error::Syntax {
                        line: pos.line,
                        column: pos.column,
                        message: "exponent must not depend on s".into(),
                    });
                }
                Expr::Pow(Box::new(a.resolve(params)?), Box::new(b), pos)
            }
            Expr::Call(func, a) => Expr::Call(func, Box::new(a.resolve(params)?)),
            e @ (Expr::Num(_) | Expr::Var) => e,
        })
    }

    fn depends_on_s(&self) -> bool {
        match self {
            Expr::Var | Expr::Ident(..) => true,
            Expr::Num(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_s(),
            Expr::Bin(_, a, b) | Expr::Pow(a, b, _) => a.depends_on_s() || b.depends_on_s(),
        }
    }

    fn eval(&self, s: Dual2) -> Dual2 {
        match self {
            Expr::Num(c) => Dual2::constant(*c),
            Expr::Var => s,
            Expr::Ident(..) => unreachable!("identifiers are resolved before evaluation"),
            Expr::Neg(a) => -a.eval(s),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(s), b.eval(s));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                }
            }
            Expr::Pow(a, b, _) => a.eval(s).powf(b.eval(s).v),
            Expr::Call(func, a) => func.apply(a.eval(s)),
        }
    }

    fn constant(&self) -> f64 {
        self.eval(Dual2::constant(f64::NAN)).v
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    Sep,
    End,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            line_start: 0,
        }
    }

    fn pos(&self, at: usize) -> Pos {
        Pos {
            line: self.line,
            column: self.src[self.line_start..at].chars().count() + 1,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>> {
        let mut out = Vec::new();
        while let Some(&(i, c)) = self.chars.peek() {
            let pos = self.pos(i);
            match c {
                '\n' => {
                    self.chars.next();
                    out.push((Tok::Sep, pos));
                    self.line += 1;
                    self.line_start = i + 1;
                }
                ';' => {
                    self.chars.next();
                    out.push((Tok::Sep, pos));
                }
                '#' => {
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                c if c.is_whitespace() => {
                    self.chars.next();
                }
                c if c.is_ascii_digit() || c == '.' => out.push((self.number(i)?, pos)),
                c if c.is_alphabetic() || c == '_' => {
                    let mut end = i;
                    while let Some(&(j, c)) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            end = j + c.len_utf8();
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push((Tok::Ident(self.src[i..end].to_string()), pos));
                }
                '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' | '=' => {
                    self.chars.next();
                    out.push((Tok::Sym(c), pos));
                }
                other => {
                    return Err(Error::Syntax {
                        line: pos.line,
                        column: pos.column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        let end = self.pos(self.src.len());
        out.push((Tok::End, end));
        Ok(out)
    }

    fn number(&mut self, start: usize) -> Result<Tok> {
        let mut end = start;
        let mut prev = ' ';
        while let Some(&(j, c)) = self.chars.peek() {
            let exp_sign = (c == '+' || c == '-') && (prev == 'e' || prev == 'E');
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                end = j + 1;
                prev = c;
                self.chars.next();
            } else {
                break;
            }
        }
        let text = &self.src[start..end];
        text.parse::<f64>().map(Tok::Num).map_err(|_| {
            let p = self.pos(start);
            Error::Syntax {
                line: p.line,
                column: p.column,
                message: format!("malformed number `{text}`"),
            }
        })
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let p = self.pos();
        Err(Error::Syntax {
            line: p.line,
            column: p.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{c}`, found {}", describe(self.peek())))
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // power := atom ('^' unary)?
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            let (_, pos) = self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp), pos));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                let (_, pos) = self.bump();
                if let Some(func) = Func::lookup(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if *self.peek() == Tok::Sym('(') {
                    return Err(Error::UnknownIdentifier {
                        name,
                        line: pos.line,
                        column: pos.column,
                    });
                }
                Ok(Expr::Ident(name, pos))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            other => self.error(format!("expected an expression, found {}", describe(&other))),
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        match self.peek() {
            Tok::Sep => {
                self.bump();
                Ok(())
            }
            Tok::End => Ok(()),
            other => self.error(format!("expected end of statement, found {}", describe(other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Sep => "end of statement".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses a profile definition into a curve with automatically
/// differentiated evaluators.
pub fn parse_profile(text: &str) -> Result<ProfileCurve> {
    let mut p = Parser {
        toks: Lexer::new(text).tokens()?,
        at: 0,
    };
    let mut f: Option<Expr> = None;
    let mut g: Option<Expr> = None;
    let mut domain: Option<(Expr, Expr, Pos)> = None;
    let mut params: Vec<(String, f64)> = Vec::new();

    loop {
        let (tok, pos) = p.bump();
        match tok {
            Tok::End => break,
            Tok::Sep => continue,
            Tok::Ident(kw) => match kw.as_str() {
                "f" | "g" => {
                    let slot = if kw == "f" { &mut f } else { &mut g };
                    if slot.is_some() {
                        return Err(Error::Syntax {
                            line: pos.line,
                            column: pos.column,
                            message: format!("`{kw}` defined twice"),
                        });
                    }
                    p.expect('=')?;
                    *slot = Some(p.expr()?);
                }
                "domain" => {
                    if domain.is_some() {
                        return Err(Error::Syntax {
                            line: pos.line,
                            column: pos.column,
                            message: "`domain` defined twice".into(),
                        });
                    }
                    p.expect('=')?;
                    p.expect('(')?;
                    let lo = p.expr()?;
                    p.expect(',')?;
                    let hi = p.expr()?;
                    p.expect(')')?;
                    domain = Some((lo, hi, pos));
                }
                "param" => {
                    let (name, npos) = match p.bump() {
                        (Tok::Ident(n), np) => (n, np),
                        (other, np) => {
                            return Err(Error::Syntax {
                                line: np.line,
                                column: np.column,
                                message: format!("expected a parameter name, found {}", describe(&other)),
                            })
                        }
                    };
                    if matches!(name.as_str(), "s" | "pi" | "f" | "g" | "domain" | "param") || Func::lookup(&name).is_some() {
                        return Err(Error::Syntax {
                            line: npos.line,
                            column: npos.column,
                            message: format!("`{name}` is reserved"),
                        });
                    }
                    if params.iter().any(|(k, _)| *k == name) {
                        return Err(Error::Syntax {
                            line: npos.line,
                            column: npos.column,
                            message: format!("parameter `{name}` declared twice"),
                        });
                    }
                    p.expect('=')?;
                    let negative = if *p.peek() == Tok::Sym('-') {
                        p.bump();
                        true
                    } else {
                        false
                    };
                    let value = match p.peek() {
                        Tok::Num(v) => *v,
                        other => return p.error(format!("expected a number, found {}", describe(other))),
                    };
                    p.bump();
                    params.push((name, if negative { -value } else { value }));
                }
                _ => {
                    return Err(Error::Syntax {
                        line: pos.line,
                        column: pos.column,
                        message: format!("expected `f`, `g`, `domain` or `param`, found `{kw}`"),
                    })
                }
            },
            other => {
                return Err(Error::Syntax {
                    line: pos.line,
                    column: pos.column,
                    message: format!("expected a statement, found {}", describe(&other)),
                })
            }
        }
        p.end_of_statement()?;
    }

    let end = p.pos();
    let missing = |what: &str| Error::Syntax {
        line: end.line,
        column: end.column,
        message: format!("missing `{what}` statement"),
    };
    let f = f.ok_or_else(|| missing("f"))?.resolve(&params)?;
    let g = g.ok_or_else(|| missing("g"))?.resolve(&params)?;
    let (lo, hi, dpos) = domain.ok_or_else(|| missing("domain"))?;
    let (lo, hi) = (lo.resolve(&params)?, hi.resolve(&params)?);
    if lo.depends_on_s() || hi.depends_on_s() {
        return Err(Error::Syntax {
            line: dpos.line,
            column: dpos.column,
            message: "domain bounds must not depend on s".into(),
        });
    }
    let (lo, hi) = (lo.constant(), hi.constant());
    let (f, g) = (Arc::new(f), Arc::new(g));
    let eval: Evaluator = Arc::new(move |s: Dual2| Ok((f.eval(s), g.eval(s))));
    ProfileCurve::new("custom", params.clone(), (lo, hi), Parametrisation::Native, eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{catalog, CatalogName};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_koranyi_catalog() {
        let c = parse_profile("f = sqrt(-cos(s)); g = sin(s); domain = (pi/2, 3*pi/2)").unwrap();
        let k = catalog(CatalogName::KoranyiSphere, 1.0).unwrap();
        assert_eq!(c.domain(), k.domain());
        for b in [1.6, 2.5, PI, 4.0, 4.7] {
            let (a, e) = (c.jet(b).unwrap(), k.jet(b).unwrap());
            for (x, y) in [(a.f, e.f), (a.g, e.g), (a.df, e.df), (a.dg, e.dg), (a.ddf, e.ddf), (a.ddg, e.ddg)] {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn params_comments_and_newlines() {
        let text = "# sphere\nparam R = 2.0\nf = R * sqrt(-cos(s))  # radius\ng = R^2 * sin(s)\ndomain = (pi/2, 3*pi/2)\n";
        let c = parse_profile(text).unwrap();
        assert_eq!(c.param("R"), Some(2.0));
        let j = c.jet(PI).unwrap();
        assert!((j.f - 2.0).abs() < 1e-15);
        assert!((j.dg + 4.0).abs() < 1e-14);
    }

    #[test]
    fn precedence_and_associativity() {
        let c = parse_profile("f = -s^2 + 2^3^2/8 - 1e-1*10; g = 2-3-4; domain = (0, 1)").unwrap();
        let j = c.jet(0.5).unwrap();
        assert!((j.f - (-0.25 + 512.0 / 8.0 - 1.0)).abs() < 1e-12);
        assert!((j.g + 5.0).abs() < 1e-15);
        assert!((j.ddf + 2.0).abs() < 1e-15);
    }

    #[test]
    fn missing_g_is_a_syntax_error() {
        assert!(matches!(parse_profile("f = s"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn error_positions() {
        match parse_profile("f = s\ng = s * $\ndomain=(0,1)") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 9)),
            other => panic!("{other:?}"),
        }
        match parse_profile("f = s\ng = cosh(s)\ndomain=(0,1)") {
            Err(Error::UnknownIdentifier { name, line, column }) => {
                assert_eq!((name.as_str(), line, column), ("cosh", 2, 5))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_profile("f = s^s; g = s; domain=(0,1)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_profile("f = (s; g = s; domain=(0,1)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn empty_domain() {
        assert!(matches!(parse_profile("f = s; g = s; domain = (1, 1)"), Err(Error::EmptyDomain { .. })));
        assert!(matches!(parse_profile("f = s; g = s; domain = (2, 1)"), Err(Error::EmptyDomain { .. })));
    }

    #[test]
    fn pole_is_detected_on_evaluation() {
        let c = parse_profile("f = 1/(s-1); g = -s; domain=(0,2)").unwrap();
        assert!(c.jet(0.5).is_ok());
        assert!(matches!(c.jet(1.0), Err(Error::NonFinite { .. })));
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(s in 0.2f64..1.8) {
            let c = parse_profile("param a = 0.7\nf = exp(-a*s) * atan(s^3) + log(1 + s)/sqrt(s)\ng = tan(s/3) * abs(cos(2*s)) - s^(-1.5)\ndomain = (0.1, 2)").unwrap();
            let h = 1e-4;
            let j = c.jet(s).unwrap();
            let (jp, jm) = (c.jet(s + h).unwrap(), c.jet(s - h).unwrap());
            let df = (jp.f - jm.f) / (2.0 * h);
            let ddf = (jp.f - 2.0 * j.f + jm.f) / (h * h);
            let dg = (jp.g - jm.g) / (2.0 * h);
            prop_assert!((df - j.df).abs() <= 1e-6 * j.df.abs().max(1.0));
            prop_assert!((ddf - j.ddf).abs() <= 1e-6 * j.ddf.abs().max(1.0));
            // |cos 2s| has a kink at π/4; stay away from it for g
            if (s - PI / 4.0).abs() > 2.0 * h {
                prop_assert!((dg - j.dg).abs() <= 1e-6 * j.dg.abs().max(1.0));
            }
        }
    }
}
