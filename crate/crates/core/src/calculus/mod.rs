//! Fields as expression trees, exact forward-mode derivatives, Lie brackets
//! and Lie derivatives of 1-forms.

pub mod dual;
pub mod expr;
pub mod parse;

use nalgebra::{DMatrix, DVector};

pub use dual::Dual;
pub use expr::{Func, ScalarField};
pub use parse::{parse_field, parse_with, to_source, Params, Printer, VarNames};

use crate::chart::{CotangentVec, DarbouxChart, Point, TangentVec};
use crate::error::{Error, Result};

fn lift(p: &[f64]) -> Vec<Dual> {
    p.iter().map(|&v| Dual::constant(v)).collect()
}

pub(crate) fn seeded(p: &[f64], k: usize) -> Vec<Dual> {
    let mut pt = lift(p);
    pt[k] = &pt[k] + &Dual::epsilon(0);
    pt
}

/// Gradient components `∂f/∂q^k` at a raw point.
pub fn gradient_at(f: &ScalarField, p: &[f64]) -> Result<DVector<f64>> {
    let mut g = DVector::zeros(p.len());
    for k in 0..p.len() {
        g[k] = f.eval(&seeded(p, k))?.coeff(1);
    }
    Ok(g)
}

/// Symmetric Hessian at a raw point; each entry uses two independent perturbations.
pub fn hessian_at(f: &ScalarField, p: &[f64]) -> Result<DMatrix<f64>> {
    let d = p.len();
    let mut h = DMatrix::zeros(d, d);
    for k in 0..d {
        for l in k..d {
            let mut pt = lift(p);
            pt[k] = &pt[k] + &Dual::epsilon(0);
            pt[l] = &pt[l] + &Dual::epsilon(1);
            let v = f.eval(&pt)?.coeff(0b11);
            h[(k, l)] = v;
            h[(l, k)] = v;
        }
    }
    Ok(h)
}

pub fn grad(f: &ScalarField, p: &Point) -> Result<CotangentVec> {
    CotangentVec::new(p, gradient_at(f, p.as_slice())?)
}

pub fn hessian(f: &ScalarField, p: &Point) -> Result<DMatrix<f64>> {
    hessian_at(f, p.as_slice())
}

/// `df(v)` at a raw point, one forward pass.
pub fn directional(f: &ScalarField, p: &[f64], v: &DVector<f64>) -> Result<f64> {
    let pt: Vec<Dual> = p
        .iter()
        .zip(v.iter())
        .map(|(&x, &dx)| Dual::from_coeffs(&[x, dx]))
        .collect();
    Ok(f.eval(&pt)?.coeff(1))
}

/// A vector field given by one expression per coordinate.
#[derive(Debug, Clone)]
pub struct VectorFieldExpr {
    components: Vec<ScalarField>,
}

impl VectorFieldExpr {
    pub fn new(components: Vec<ScalarField>) -> Self {
        VectorFieldExpr { components }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![ScalarField::zero(); dim])
    }

    /// The coordinate field `∂/∂q^k`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        Self::constant(&DVector::from_fn(dim, |i, _| if i == k { 1.0 } else { 0.0 }))
    }

    pub fn constant(v: &DVector<f64>) -> Self {
        Self::new(v.iter().map(|&c| ScalarField::constant(c)).collect())
    }

    /// Parses one expression per component over chart coordinates.
    pub fn parse(sources: &[impl AsRef<str>], chart: &DarbouxChart, params: &Params) -> Result<Self> {
        if sources.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                got: sources.len(),
            });
        }
        let components = sources
            .iter()
            .map(|s| parse_field(s.as_ref(), chart, params))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self::new(components))
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    fn check(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    pub fn eval(&self, p: &[f64]) -> Result<DVector<f64>> {
        self.check(p.len())?;
        let pt = lift(p);
        let mut out = DVector::zeros(self.dim());
        for (i, c) in self.components.iter().enumerate() {
            out[i] = c.eval(&pt)?.re();
        }
        Ok(out)
    }

    pub fn at(&self, p: &Point) -> Result<TangentVec> {
        TangentVec::new(p, self.eval(p.as_slice())?)
    }

    pub fn eval_dual(&self, p: &[Dual]) -> Result<Vec<Dual>> {
        self.check(p.len())?;
        Ok(self
            .components
            .iter()
            .map(|c| c.eval(p))
            .collect::<std::result::Result<_, _>>()?)
    }

    /// `J[i][k] = ∂X^i/∂q^k`.
    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check(p.len())?;
        let d = self.dim();
        let mut j = DMatrix::zeros(d, d);
        for k in 0..d {
            let pt = seeded(p, k);
            for (i, c) in self.components.iter().enumerate() {
                j[(i, k)] = c.eval(&pt)?.coeff(1);
            }
        }
        Ok(j)
    }

    /// Coordinate divergence `Σ ∂X^i/∂q^i`.
    pub fn divergence(&self, p: &[f64]) -> Result<f64> {
        self.check(p.len())?;
        let mut s = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            s += c.eval(&seeded(p, i))?.coeff(1);
        }
        Ok(s)
    }

    /// `X(f) = X^i ∂f/∂q^i` as an expression.
    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| c * &f.partial(i))
            .sum()
    }

    pub fn scale(&self, f: &ScalarField) -> Self {
        Self::new(self.components.iter().map(|c| c * f).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect())
    }
}

/// `[X, Y]` as an expression, componentwise `X(Y^i) − Y(X^i)`.
pub fn lie_bracket_field(x: &VectorFieldExpr, y: &VectorFieldExpr) -> VectorFieldExpr {
    VectorFieldExpr::new(
        x.components
            .iter()
            .zip(&y.components)
            .map(|(xi, yi)| x.apply(yi) - y.apply(xi))
            .collect(),
    )
}

/// `[X, Y](p) = J_Y X − J_X Y`.
pub fn lie_bracket_at(x: &VectorFieldExpr, y: &VectorFieldExpr, p: &[f64]) -> Result<DVector<f64>> {
    let xv = x.eval(p)?;
    let yv = y.eval(p)?;
    Ok(y.jacobian(p)? * xv - x.jacobian(p)? * yv)
}

pub fn lie_bracket(x: &VectorFieldExpr, y: &VectorFieldExpr, p: &Point) -> Result<TangentVec> {
    TangentVec::new(p, lie_bracket_at(x, y, p.as_slice())?)
}

/// A 1-form given by its coordinate components.
#[derive(Debug, Clone)]
pub struct OneFormExpr {
    components: Vec<ScalarField>,
}

impl OneFormExpr {
    pub fn new(components: Vec<ScalarField>) -> Self {
        OneFormExpr { components }
    }

    /// The contact form `dz − y_i dx^i`.
    pub fn eta(chart: &DarbouxChart) -> Self {
        let mut c = vec![ScalarField::zero(); chart.dim()];
        for i in 0..chart.n() {
            c[chart.x(i)] = -ScalarField::var(chart.y(i));
        }
        c[chart.z()] = ScalarField::one();
        Self::new(c)
    }

    /// `df`.
    pub fn exact(f: &ScalarField, dim: usize) -> Self {
        Self::new((0..dim).map(|k| f.partial(k)).collect())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn eval(&self, p: &[f64]) -> Result<DVector<f64>> {
        let pt = lift(p);
        let mut out = DVector::zeros(self.dim());
        for (i, c) in self.components.iter().enumerate() {
            out[i] = c.eval(&pt)?.re();
        }
        Ok(out)
    }

    /// `α(X)` as an expression.
    pub fn contract(&self, x: &VectorFieldExpr) -> ScalarField {
        self.components
            .iter()
            .zip(x.components())
            .filter(|(a, v)| !a.is_zero() && !v.is_zero())
            .map(|(a, v)| a * v)
            .sum()
    }

    /// Matrix `D` of `dα` with `dα(u, v) = uᵀ D v`, `D_jk = ∂_j α_k − ∂_k α_j`.
    pub fn exterior_derivative(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let mut jac = DMatrix::zeros(d, d);
        for j in 0..d {
            let pt = seeded(p, j);
            for (k, c) in self.components.iter().enumerate() {
                jac[(j, k)] = c.eval(&pt)?.coeff(1);
            }
        }
        Ok(&jac - jac.transpose())
    }
}

/// `ℒ_X α = ι_X dα + d(α(X))` at a raw point.
pub fn lie_derivative_at(x: &VectorFieldExpr, alpha: &OneFormExpr, p: &[f64]) -> Result<DVector<f64>> {
    let d = alpha.exterior_derivative(p)?;
    let xv = x.eval(p)?;
    let contracted = d.transpose() * xv;
    Ok(contracted + gradient_at(&alpha.contract(x), p)?)
}

/// `ℒ_X η` on a Darboux chart.
pub fn lie_derivative_form(chart: &DarbouxChart, x: &VectorFieldExpr, p: &Point) -> Result<CotangentVec> {
    chart.check_dim(p.dim())?;
    CotangentVec::new(p, lie_derivative_at(x, &OneFormExpr::eta(chart), p.as_slice())?)
}
