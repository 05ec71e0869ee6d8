//! Text form of scalar fields. The grammar is documented in `docs/expression-grammar.md`.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | variable | '$' name | call | '(' expr ')'
//! call  := ('exp' | 'log' | 'sin' | 'cos') '(' expr ')' | 'diff' '(' expr ',' variable ')'
//! ```

use std::collections::BTreeMap;
use std::fmt;

use super::expr::{Func, Node, ScalarField};
use crate::chart::DarbouxChart;
use crate::error::ParseError;

/// How variables are named in text.
#[derive(Debug, Clone, PartialEq)]
pub enum VarNames {
    /// Darboux coordinates `x1..xn, y1..yn, z`.
    Chart(DarbouxChart),
    /// Parameters `s1..sk` of a parametrized submanifold.
    Parameters(usize),
    /// `v0, v1, …` (printing only).
    Generic,
}

impl VarNames {
    pub fn name(&self, idx: usize) -> String {
        match self {
            VarNames::Chart(c) => c.coordinate_name(idx),
            VarNames::Parameters(_) => format!("s{}", idx + 1),
            VarNames::Generic => format!("v{idx}"),
        }
    }

    fn resolve(&self, ident: &str) -> Option<usize> {
        let index_after = |prefix: &str, count: usize| -> Option<usize> {
            let rest = ident.strip_prefix(prefix)?;
            if rest.is_empty() || rest.starts_with('0') || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let k: usize = rest.parse().ok()?;
            (1..=count).contains(&k).then_some(k - 1)
        };
        match self {
            VarNames::Chart(c) => {
                if ident == "z" {
                    return Some(c.z());
                }
                index_after("x", c.n())
                    .map(|i| c.x(i))
                    .or_else(|| index_after("y", c.n()).map(|i| c.y(i)))
            }
            VarNames::Parameters(k) => index_after("s", *k),
            VarNames::Generic => {
                let rest = ident.strip_prefix('v')?;
                if rest.is_empty() || (rest.len() > 1 && rest.starts_with('0')) {
                    return None;
                }
                rest.bytes().all(|b| b.is_ascii_digit()).then(|| rest.parse().ok())?
            }
        }
    }
}

pub type Params = BTreeMap<String, f64>;

/// Parses a field over chart coordinates; `$name` parameters are bound from `params`.
pub fn parse_field(source: &str, chart: &DarbouxChart, params: &Params) -> Result<ScalarField, ParseError> {
    parse_with(source, &VarNames::Chart(*chart), params)
}

pub fn parse_with(source: &str, names: &VarNames, params: &Params) -> Result<ScalarField, ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        names,
        params,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(ParseError::Syntax {
            pos: p.at(),
            msg: format!("unexpected {}", t.describe()),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Param(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Param(s) => format!("parameter `${s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' => {
                out.push((Tok::Op(c), start));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, start));
                i += 1;
            }
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push((Tok::Num(v), start));
            }
            '$' => {
                i += 1;
                let s = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                if s == i {
                    return Err(ParseError::Syntax {
                        pos: start,
                        msg: "expected parameter name after `$`".into(),
                    });
                }
                out.push((Tok::Param(src[s..i].to_string()), start));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a VarNames,
    params: &'a Params,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn at(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.at(),
                msg: format!("expected {}, found {}", want.describe(), self.peek().describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<ScalarField, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            lhs = if c == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ScalarField, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            lhs = if c == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ScalarField, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ScalarField, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(base.pow(&exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ScalarField, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(ScalarField::constant(v)),
            Tok::Param(name) => self
                .params
                .get(&name)
                .map(|&v| ScalarField::constant(v))
                .ok_or(ParseError::UnknownIdentifier {
                    pos,
                    name: format!("${name}"),
                }),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.call(name, pos)
                } else if let Some(i) = self.names.resolve(&name) {
                    Ok(ScalarField::var(i))
                } else {
                    Err(ParseError::UnknownIdentifier { pos, name })
                }
            }
            t => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected {}", t.describe()),
            }),
        }
    }

    fn call(&mut self, name: String, pos: usize) -> Result<ScalarField, ParseError> {
        let expected = match name.as_str() {
            "diff" => 2,
            n if Func::from_name(n).is_some() => 1,
            _ => return Err(ParseError::UnknownIdentifier { pos, name }),
        };
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        let mut var_arg = None;
        if *self.peek() != Tok::RParen {
            loop {
                // The second argument of diff is a variable name, kept for resolution.
                if name == "diff" && args.len() == 1 {
                    if let Tok::Ident(v) = self.peek().clone() {
                        var_arg = Some((v, self.at()));
                    }
                }
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        if args.len() != expected {
            return Err(ParseError::Arity {
                pos,
                name,
                expected,
                got: args.len(),
            });
        }
        if name == "diff" {
            let (v, vpos) = var_arg.ok_or(ParseError::Syntax {
                pos,
                msg: "second argument of diff must be a variable".into(),
            })?;
            let k = self
                .names
                .resolve(&v)
                .ok_or(ParseError::UnknownIdentifier { pos: vpos, name: v })?;
            // Keep the node even for trivially differentiable arguments so printing round-trips.
            return Ok(args.swap_remove(0).partial(k));
        }
        let f = Func::from_name(&name).expect("checked above");
        Ok(ScalarField::func(f, args.swap_remove(0)))
    }
}

/// Pretty printer with minimal parentheses; output parses back to the same tree shape.
pub struct Printer<'a> {
    field: &'a ScalarField,
    names: &'a VarNames,
}

impl<'a> Printer<'a> {
    pub fn new(field: &'a ScalarField, names: &'a VarNames) -> Self {
        Printer { field, names }
    }
}

const P_SUM: u8 = 1;
const P_PRODUCT: u8 = 2;
const P_UNARY: u8 = 3;
const P_POWER: u8 = 4;
const P_ATOM: u8 = 5;

fn precedence(f: &ScalarField) -> u8 {
    match f.inner() {
        Node::Const(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => P_UNARY,
        Node::Const(_) | Node::Var(_) | Node::Func(..) | Node::Partial(..) | Node::Native(_) => P_ATOM,
        Node::Neg(_) => P_UNARY,
        Node::Add(..) | Node::Sub(..) => P_SUM,
        Node::Mul(..) | Node::Div(..) => P_PRODUCT,
        Node::Pow(..) => P_POWER,
    }
}

fn write_number(out: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // Debug formatting is the shortest representation that round-trips.
    let s = format!("{v:?}");
    out.write_str(&s)
}

fn write_at(out: &mut fmt::Formatter<'_>, f: &ScalarField, names: &VarNames, min: u8) -> fmt::Result {
    if precedence(f) < min {
        out.write_str("(")?;
        write_node(out, f, names)?;
        out.write_str(")")
    } else {
        write_node(out, f, names)
    }
}

fn write_node(out: &mut fmt::Formatter<'_>, f: &ScalarField, names: &VarNames) -> fmt::Result {
    match f.inner() {
        Node::Const(v) => write_number(out, *v),
        Node::Var(i) => out.write_str(&names.name(*i)),
        Node::Neg(a) => {
            out.write_str("-")?;
            write_at(out, a, names, P_UNARY)
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_at(out, a, names, P_SUM)?;
            out.write_str(if matches!(f.inner(), Node::Add(..)) { " + " } else { " - " })?;
            write_at(out, b, names, P_PRODUCT)
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write_at(out, a, names, P_PRODUCT)?;
            out.write_str(if matches!(f.inner(), Node::Mul(..)) { "*" } else { "/" })?;
            write_at(out, b, names, P_UNARY)
        }
        Node::Pow(a, b) => {
            write_at(out, a, names, P_ATOM)?;
            out.write_str("^")?;
            write_at(out, b, names, P_UNARY)
        }
        Node::Func(func, a) => {
            write!(out, "{}(", func.name())?;
            write_node(out, a, names)?;
            out.write_str(")")
        }
        Node::Partial(a, k) => {
            out.write_str("diff(")?;
            write_node(out, a, names)?;
            write!(out, ", {})", names.name(*k))
        }
        Node::Native(_) => write!(out, "<native:{}>", f.native_name().unwrap_or("?")),
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(out, self.field, self.names)
    }
}

/// Convenience: the text form of a field over chart coordinates.
pub fn to_source(field: &ScalarField, chart: &DarbouxChart) -> String {
    Printer::new(field, &VarNames::Chart(*chart)).to_string()
}
