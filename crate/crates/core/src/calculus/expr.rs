use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::dual::Dual;
use crate::error::{Error, EvalError, Result};

/// A differentiable real function of the coordinates, stored as an expression tree.
///
/// Variables are referred to by index (`Var(0)` is the first coordinate). The
/// tree is immutable and cheap to clone; subtrees are shared.
#[derive(Clone)]
pub struct ScalarField(Arc<Node>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

type NativeEval = dyn Fn(&[Dual]) -> std::result::Result<Dual, EvalError> + Send + Sync;

/// A field implemented in code. The closure receives the point as dual numbers
/// and must use [`Dual`] arithmetic so derivatives propagate.
#[derive(Clone)]
pub struct NativeFn {
    name: String,
    f: Arc<NativeEval>,
}

pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Neg(ScalarField),
    Add(ScalarField, ScalarField),
    Sub(ScalarField, ScalarField),
    Mul(ScalarField, ScalarField),
    Div(ScalarField, ScalarField),
    Pow(ScalarField, ScalarField),
    Func(Func, ScalarField),
    /// Partial derivative with respect to a variable, evaluated by forward mode.
    Partial(ScalarField, usize),
    Native(NativeFn),
}

impl ScalarField {
    fn node(n: Node) -> Self {
        ScalarField(Arc::new(n))
    }

    pub(crate) fn inner(&self) -> &Node {
        &self.0
    }

    pub fn constant(v: f64) -> Self {
        Self::node(Node::Const(v))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(index: usize) -> Self {
        Self::node(Node::Var(index))
    }

    pub fn native(
        name: impl Into<String>,
        f: impl Fn(&[Dual]) -> std::result::Result<Dual, EvalError> + Send + Sync + 'static,
    ) -> Self {
        Self::node(Node::Native(NativeFn {
            name: name.into(),
            f: Arc::new(f),
        }))
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.inner() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn func(f: Func, arg: ScalarField) -> Self {
        if let Some(v) = arg.as_constant() {
            let folded = match f {
                Func::Exp => Some(v.exp()),
                Func::Sin => Some(v.sin()),
                Func::Cos => Some(v.cos()),
                Func::Log if v > 0.0 => Some(v.ln()),
                Func::Log => None,
            };
            if let Some(c) = folded {
                return Self::constant(c);
            }
        }
        Self::node(Node::Func(f, arg))
    }

    pub fn exp(&self) -> Self {
        Self::func(Func::Exp, self.clone())
    }

    pub fn ln(&self) -> Self {
        Self::func(Func::Log, self.clone())
    }

    pub fn sin(&self) -> Self {
        Self::func(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Self {
        Self::func(Func::Cos, self.clone())
    }

    pub fn pow(&self, exponent: &ScalarField) -> Self {
        match (self.as_constant(), exponent.as_constant()) {
            (_, Some(0.0)) => Self::one(),
            (_, Some(1.0)) => self.clone(),
            (Some(b), Some(e)) if b > 0.0 || e.fract() == 0.0 => Self::constant(b.powf(e)),
            _ => Self::node(Node::Pow(self.clone(), exponent.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        self.pow(&Self::constant(n as f64))
    }

    pub fn powf(&self, r: f64) -> Self {
        self.pow(&Self::constant(r))
    }

    /// `∂f/∂(variable k)` as a new field.
    pub fn partial(&self, k: usize) -> Self {
        match self.inner() {
            Node::Const(_) => Self::zero(),
            Node::Var(i) => Self::constant(if *i == k { 1.0 } else { 0.0 }),
            _ => Self::node(Node::Partial(self.clone(), k)),
        }
    }

    /// Largest variable index referenced (including differentiation variables).
    pub fn max_var(&self) -> Option<usize> {
        match self.inner() {
            Node::Const(_) | Node::Native(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Func(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
            Node::Partial(a, k) => a.max_var().max(Some(*k)),
        }
    }

    /// Whether variable `k` appears syntactically.
    pub fn mentions(&self, k: usize) -> bool {
        match self.inner() {
            Node::Const(_) | Node::Native(_) => false,
            Node::Var(i) => *i == k,
            Node::Neg(a) | Node::Func(_, a) => a.mentions(k),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.mentions(k) || b.mentions(k)
            }
            Node::Partial(a, j) => *j == k || a.mentions(k),
        }
    }

    pub fn contains_native(&self) -> bool {
        match self.inner() {
            Node::Native(_) => true,
            Node::Const(_) | Node::Var(_) => false,
            Node::Neg(a) | Node::Func(_, a) | Node::Partial(a, _) => a.contains_native(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.contains_native() || b.contains_native()
            }
        }
    }

    /// Replaces every variable by a field. Derivative and native nodes are rejected:
    /// a derivative of a composed field is not the composition of the derivative.
    pub fn substitute(&self, map: &dyn Fn(usize) -> ScalarField) -> Result<ScalarField> {
        Ok(match self.inner() {
            Node::Const(v) => Self::constant(*v),
            Node::Var(i) => map(*i),
            Node::Neg(a) => -a.substitute(map)?,
            Node::Add(a, b) => a.substitute(map)? + b.substitute(map)?,
            Node::Sub(a, b) => a.substitute(map)? - b.substitute(map)?,
            Node::Mul(a, b) => a.substitute(map)? * b.substitute(map)?,
            Node::Div(a, b) => a.substitute(map)? / b.substitute(map)?,
            Node::Pow(a, b) => a.substitute(map)?.pow(&b.substitute(map)?),
            Node::Func(f, a) => Self::func(*f, a.substitute(map)?),
            Node::Partial(..) => {
                return Err(Error::Invalid(
                    "cannot substitute variables inside a derivative node".into(),
                ))
            }
            Node::Native(n) => {
                return Err(Error::Invalid(format!(
                    "cannot substitute variables inside native field `{}`",
                    n.name
                )))
            }
        })
    }

    /// Evaluates over dual numbers. Each derivative node draws a perturbation tag
    /// above every tag already present in `point`.
    pub fn eval(&self, point: &[Dual]) -> std::result::Result<Dual, EvalError> {
        let out = match self.inner() {
            Node::Const(v) => Dual::constant(*v),
            Node::Var(i) => point
                .get(*i)
                .cloned()
                .ok_or(EvalError::VariableOutOfRange {
                    index: *i,
                    dim: point.len(),
                })?,
            Node::Neg(a) => -a.eval(point)?,
            Node::Add(a, b) => &a.eval(point)? + &b.eval(point)?,
            Node::Sub(a, b) => &a.eval(point)? - &b.eval(point)?,
            Node::Mul(a, b) => &a.eval(point)? * &b.eval(point)?,
            Node::Div(a, b) => a.eval(point)?.checked_div(&b.eval(point)?)?,
            Node::Pow(a, b) => {
                let base = a.eval(point)?;
                match b.as_constant() {
                    Some(e) => base.powf(e)?,
                    None => {
                        let e = b.eval(point)?;
                        (&e * &base.ln()?).exp()
                    }
                }
            }
            Node::Func(f, a) => {
                let x = a.eval(point)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Log => x.ln()?,
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                }
            }
            Node::Partial(a, k) => {
                if *k >= point.len() {
                    return Err(EvalError::VariableOutOfRange {
                        index: *k,
                        dim: point.len(),
                    });
                }
                let tag = point.iter().map(Dual::depth).max().unwrap_or(0);
                let mut lifted = point.to_vec();
                lifted[*k] = &lifted[*k] + &Dual::epsilon(tag);
                a.eval(&lifted)?.tangent(tag)
            }
            Node::Native(n) => (n.f)(point)?,
        };
        if !out.is_finite() {
            return Err(EvalError::NonFinite(self.describe()));
        }
        Ok(out)
    }

    /// Plain value at a real point.
    pub fn value(&self, p: &[f64]) -> std::result::Result<f64, EvalError> {
        let pt: Vec<Dual> = p.iter().map(|&v| Dual::constant(v)).collect();
        Ok(self.eval(&pt)?.re())
    }

    fn describe(&self) -> String {
        let s = self.to_string();
        if s.len() > 60 {
            format!("{}…", &s[..s.char_indices().nth(60).map(|(i, _)| i).unwrap_or(s.len())])
        } else {
            s
        }
    }

    pub(crate) fn native_name(&self) -> Option<&str> {
        match self.inner() {
            Node::Native(n) => Some(&n.name),
            _ => None,
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({self})")
    }
}

/// Generic printing with variables named `v0, v1, …`. Use
/// [`super::parse::Printer`] for chart-specific names.
impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = super::parse::VarNames::Generic;
        write!(f, "{}", super::parse::Printer::new(self, &names))
    }
}

impl Add for ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(a + b),
            (Some(0.0), _) => rhs,
            (_, Some(0.0)) => self,
            _ => ScalarField::node(Node::Add(self, rhs)),
        }
    }
}

impl Sub for ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(a - b),
            (Some(0.0), _) => -rhs,
            (_, Some(0.0)) => self,
            _ => ScalarField::node(Node::Sub(self, rhs)),
        }
    }
}

impl Mul for ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(a * b),
            (Some(0.0), _) | (_, Some(0.0)) => ScalarField::zero(),
            (Some(1.0), _) => rhs,
            (_, Some(1.0)) => self,
            _ => ScalarField::node(Node::Mul(self, rhs)),
        }
    }
}

impl Div for ScalarField {
    type Output = ScalarField;
    fn div(self, rhs: ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) if b != 0.0 => ScalarField::constant(a / b),
            (_, Some(1.0)) => self,
            _ => ScalarField::node(Node::Div(self, rhs)),
        }
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        match self.inner() {
            Node::Const(v) => ScalarField::constant(-v),
            _ => ScalarField::node(Node::Neg(self)),
        }
    }
}

macro_rules! ref_and_scalar_ops {
    ($tr:ident, $method:ident) => {
        impl $tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.clone().$method(rhs.clone())
            }
        }
        impl $tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.$method(rhs.clone())
            }
        }
        impl $tr<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                self.clone().$method(rhs)
            }
        }
        impl $tr<f64> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                self.$method(ScalarField::constant(rhs))
            }
        }
        impl $tr<f64> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                self.clone().$method(ScalarField::constant(rhs))
            }
        }
        impl $tr<ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                ScalarField::constant(self).$method(rhs)
            }
        }
        impl $tr<&ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::constant(self).$method(rhs.clone())
            }
        }
    };
}

ref_and_scalar_ops!(Add, add);
ref_and_scalar_ops!(Sub, sub);
ref_and_scalar_ops!(Mul, mul);
ref_and_scalar_ops!(Div, div);

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -self.clone()
    }
}

impl std::iter::Sum for ScalarField {
    fn sum<I: Iterator<Item = ScalarField>>(iter: I) -> ScalarField {
        iter.fold(ScalarField::zero(), |acc, x| acc + x)
    }
}

impl From<f64> for ScalarField {
    fn from(v: f64) -> Self {
        ScalarField::constant(v)
    }
}
