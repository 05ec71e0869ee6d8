//! The Darboux model contact manifold `(R^{2n+1}, η = dz − y_i dx^i)`.
//!
//! Coordinates are ordered `(x^1..x^n, y_1..y_n, z)`. Covectors are always
//! stored in the coordinate coframe `(dx, dy, dz)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DarbouxChart {
    n: usize,
}

/// A point of the chart. All coordinates are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: DVector<f64>,
}

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords: Vec<f64> = coords.into();
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        Ok(Point {
            coords: DVector::from_vec(coords),
        })
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl TryFrom<&[f64]> for Point {
    type Error = Error;
    fn try_from(v: &[f64]) -> Result<Self> {
        Point::new(v.to_vec())
    }
}

/// A tangent vector at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVec {
    base: Point,
    components: DVector<f64>,
}

/// A covector at a base point, in the basis `(dx^i, dy_i, dz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentVec {
    base: Point,
    components: DVector<f64>,
}

macro_rules! vec_accessors {
    ($ty:ident) => {
        impl $ty {
            /// Components must match the base point's dimension.
            pub fn new(base: &Point, components: DVector<f64>) -> Result<Self> {
                if components.len() != base.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: base.dim(),
                        got: components.len(),
                    });
                }
                Ok($ty {
                    base: base.clone(),
                    components,
                })
            }
            pub fn base(&self) -> &Point {
                &self.base
            }
            pub fn components(&self) -> &DVector<f64> {
                &self.components
            }
            pub fn into_components(self) -> DVector<f64> {
                self.components
            }
        }
    };
}
vec_accessors!(TangentVec);
vec_accessors!(CotangentVec);

impl CotangentVec {
    /// Pairing `α(v)`.
    pub fn apply(&self, v: &DVector<f64>) -> f64 {
        self.components.dot(v)
    }
}

/// The adapted frame `{A_i, B^i, R}` and its dual coframe `{dx^i, dy_i, η}`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub a: Vec<TangentVec>,
    pub b: Vec<TangentVec>,
    pub reeb: TangentVec,
    /// `dx^1..dx^n, dy_1..dy_n, η`.
    pub coframe: Vec<CotangentVec>,
}

impl Frame {
    /// Frame vectors in the order `A_1..A_n, B^1..B^n, R`.
    pub fn vectors(&self) -> Vec<&TangentVec> {
        self.a.iter().chain(self.b.iter()).chain(std::iter::once(&self.reeb)).collect()
    }

    /// Matrix of `coframe_i(frame_j)`; the identity for a dual pair.
    pub fn pairing_matrix(&self) -> DMatrix<f64> {
        let vs = self.vectors();
        DMatrix::from_fn(self.coframe.len(), vs.len(), |i, j| {
            self.coframe[i].apply(vs[j].components())
        })
    }
}

impl DarbouxChart {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidChart("n must be at least 1".into()));
        }
        Ok(DarbouxChart { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Index of `x^{i+1}` (zero-based `i`).
    pub fn x(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        i
    }

    /// Index of `y_{i+1}` (zero-based `i`).
    pub fn y(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        self.n + i
    }

    pub fn z(&self) -> usize {
        2 * self.n
    }

    pub fn coordinate_name(&self, idx: usize) -> String {
        if idx < self.n {
            format!("x{}", idx + 1)
        } else if idx < 2 * self.n {
            format!("y{}", idx - self.n + 1)
        } else {
            "z".to_string()
        }
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    pub fn point(&self, coords: impl Into<Vec<f64>>) -> Result<Point> {
        let p = Point::new(coords)?;
        self.check_dim(p.dim())?;
        Ok(p)
    }

    pub fn origin(&self) -> Point {
        Point {
            coords: DVector::zeros(self.dim()),
        }
    }

    pub fn tangent(&self, base: &Point, components: impl Into<Vec<f64>>) -> Result<TangentVec> {
        self.check_dim(base.dim())?;
        let components = DVector::from_vec(components.into());
        self.check_dim(components.len())?;
        Ok(TangentVec {
            base: base.clone(),
            components,
        })
    }

    pub fn cotangent(&self, base: &Point, components: impl Into<Vec<f64>>) -> Result<CotangentVec> {
        self.check_dim(base.dim())?;
        let components = DVector::from_vec(components.into());
        self.check_dim(components.len())?;
        Ok(CotangentVec {
            base: base.clone(),
            components,
        })
    }

    pub(crate) fn tangent_unchecked(&self, base: &Point, components: DVector<f64>) -> TangentVec {
        TangentVec {
            base: base.clone(),
            components,
        }
    }

    pub(crate) fn cotangent_unchecked(&self, base: &Point, components: DVector<f64>) -> CotangentVec {
        CotangentVec {
            base: base.clone(),
            components,
        }
    }

    /// Components of `η = dz − y_i dx^i` at raw coordinates (no validation).
    pub fn eta_components(&self, coords: &[f64]) -> DVector<f64> {
        let mut eta = DVector::zeros(self.dim());
        for i in 0..self.n {
            eta[self.x(i)] = -coords[self.y(i)];
        }
        eta[self.z()] = 1.0;
        eta
    }

    pub fn eta_at(&self, p: &Point) -> Result<CotangentVec> {
        self.check_dim(p.dim())?;
        Ok(self.cotangent_unchecked(p, self.eta_components(p.as_slice())))
    }

    /// Matrix of `dη = dx^i ∧ dy_i` with `dη(u, v) = uᵀ M v`.
    pub fn deta_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.n {
            m[(self.x(i), self.y(i))] = 1.0;
            m[(self.y(i), self.x(i))] = -1.0;
        }
        m
    }

    pub fn deta(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (0..self.n)
            .map(|i| u[self.x(i)] * v[self.y(i)] - u[self.y(i)] * v[self.x(i)])
            .sum()
    }

    /// Matrix of `♭(v) = ι_v dη + η(v) η` acting on component vectors.
    pub fn flat_matrix(&self, p: &Point) -> Result<DMatrix<f64>> {
        self.check_dim(p.dim())?;
        let eta = self.eta_components(p.as_slice());
        Ok(flat_matrix_from(&eta, &self.deta_matrix()))
    }

    pub fn flat(&self, v: &TangentVec) -> Result<CotangentVec> {
        self.check_dim(v.components.len())?;
        let eta = self.eta_components(v.base.as_slice());
        // ι_v dη has components (Mᵀ v)_k = Σ_j v_j M_jk.
        let mut out = DVector::zeros(self.dim());
        for i in 0..self.n {
            out[self.y(i)] += v.components[self.x(i)];
            out[self.x(i)] -= v.components[self.y(i)];
        }
        let eta_v = eta.dot(&v.components);
        out += &eta * eta_v;
        Ok(self.cotangent_unchecked(&v.base, out))
    }

    /// Inverse of [`flat`](Self::flat) by a dense linear solve.
    pub fn sharp(&self, alpha: &CotangentVec) -> Result<TangentVec> {
        self.check_dim(alpha.components.len())?;
        let m = self.flat_matrix(&alpha.base)?;
        let v = m
            .lu()
            .solve(&alpha.components)
            .ok_or(Error::Singular("flat matrix of a Darboux chart"))?;
        Ok(self.tangent_unchecked(&alpha.base, v))
    }

    pub fn reeb(&self, p: &Point) -> Result<TangentVec> {
        self.check_dim(p.dim())?;
        let mut r = DVector::zeros(self.dim());
        r[self.z()] = 1.0;
        Ok(self.tangent_unchecked(p, r))
    }

    /// Horizontal frame `A_i = ∂/∂x^i + y_i ∂/∂z`, `B^i = ∂/∂y_i` and the Reeb field,
    /// together with the dual coframe `(dx^i, dy_i, η)`.
    pub fn frame(&self, p: &Point) -> Result<Frame> {
        self.check_dim(p.dim())?;
        let d = self.dim();
        let unit = |k: usize| DVector::from_fn(d, |j, _| if j == k { 1.0 } else { 0.0 });
        let a = (0..self.n)
            .map(|i| {
                let mut v = unit(self.x(i));
                v[self.z()] = p.as_slice()[self.y(i)];
                self.tangent_unchecked(p, v)
            })
            .collect();
        let b = (0..self.n)
            .map(|i| self.tangent_unchecked(p, unit(self.y(i))))
            .collect();
        let mut coframe: Vec<CotangentVec> = (0..2 * self.n)
            .map(|k| self.cotangent_unchecked(p, unit(k)))
            .collect();
        coframe.push(self.eta_at(p)?);
        Ok(Frame {
            a,
            b,
            reeb: self.reeb(p)?,
            coframe,
        })
    }

    /// Components of the horizontal projection of `v` (drop the Reeb part `η(v) R`).
    pub fn horizontal_part(&self, p: &Point, v: &DVector<f64>) -> DVector<f64> {
        let eta = self.eta_components(p.as_slice());
        let mut h = v.clone();
        h[self.z()] -= eta.dot(v);
        h
    }

    /// `|det ♭|` at a point; nonzero exactly when η is contact there.
    pub fn flat_determinant(&self, p: &Point) -> Result<f64> {
        Ok(linalg::determinant(&self.flat_matrix(p)?))
    }
}

/// `♭(v) = ι_v dθ + θ(v) θ` for a 1-form `θ` with exterior derivative matrix `d`
/// (`dθ(u, v) = uᵀ d v`), as a matrix acting on components.
pub fn flat_matrix_from(theta: &DVector<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    d.transpose() + theta * theta.transpose()
}
