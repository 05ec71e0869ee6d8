//! The extended contact manifold `TM × R` with `η̄ = η^c + t η^v`, in induced
//! coordinates `(q, v, t)`, and the Legendrian test for vector fields.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::calculus::{seeded, OneFormExpr, ScalarField, VectorFieldExpr};
use crate::chart::{flat_matrix_from, DarbouxChart, Point};
use crate::dynamics::conformal_factor;
use crate::error::{Error, Result};
use crate::linalg;
use crate::tolerances;

/// A point `(p, v, t)` of `TM × R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPoint {
    pub base: Point,
    pub fiber: DVector<f64>,
    pub t: f64,
}

impl ExtendedPoint {
    pub fn new(base: Point, fiber: DVector<f64>, t: f64) -> Result<Self> {
        if fiber.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: fiber.len(),
            });
        }
        if !t.is_finite() || fiber.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        Ok(ExtendedPoint { base, fiber, t })
    }

    /// Flat coordinates `(q, v, t)`.
    pub fn from_slice(m: usize, coords: &[f64]) -> Result<Self> {
        if coords.len() != 2 * m + 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * m + 1,
                got: coords.len(),
            });
        }
        Self::new(
            Point::new(coords[..m].to_vec())?,
            DVector::from_column_slice(&coords[m..2 * m]),
            coords[2 * m],
        )
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.base.as_slice().to_vec();
        c.extend(self.fiber.iter());
        c.push(self.t);
        c
    }

    pub fn dim(&self) -> usize {
        2 * self.base.dim() + 1
    }
}

fn form_jacobian(alpha: &OneFormExpr, p: &[f64]) -> Result<DMatrix<f64>> {
    let m = alpha.dim();
    if p.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: p.len() });
    }
    // j[(a, b)] = ∂α_a/∂q^b
    let mut j = DMatrix::zeros(m, m);
    for b in 0..m {
        let pt = seeded(p, b);
        for (a, c) in alpha.components().iter().enumerate() {
            j[(a, b)] = c.eval(&pt)?.coeff(1);
        }
    }
    Ok(j)
}

/// `α^v`: `α_a` on base slots, zero elsewhere.
pub fn vertical_lift_form(alpha: &OneFormExpr, ep: &ExtendedPoint) -> Result<DVector<f64>> {
    let m = ep.base.dim();
    if alpha.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: alpha.dim() });
    }
    let mut out = DVector::zeros(2 * m + 1);
    out.rows_mut(0, m).copy_from(&alpha.eval(ep.base.as_slice())?);
    Ok(out)
}

/// `α^c`: `(∂_b α_a) v^b` on base slots and `α_a` on fiber slots.
pub fn complete_lift_form(alpha: &OneFormExpr, ep: &ExtendedPoint) -> Result<DVector<f64>> {
    let m = ep.base.dim();
    let j = form_jacobian(alpha, ep.base.as_slice())?;
    let mut out = DVector::zeros(2 * m + 1);
    out.rows_mut(0, m).copy_from(&(j * &ep.fiber));
    out.rows_mut(m, m).copy_from(&alpha.eval(ep.base.as_slice())?);
    Ok(out)
}

/// `X^v = X^a ∂/∂v^a`.
pub fn vertical_lift_vector(x: &VectorFieldExpr, ep: &ExtendedPoint) -> Result<DVector<f64>> {
    let m = ep.base.dim();
    let mut out = DVector::zeros(2 * m + 1);
    out.rows_mut(m, m).copy_from(&x.eval(ep.base.as_slice())?);
    Ok(out)
}

/// `X^c = X^a ∂/∂q^a + (∂_b X^a) v^b ∂/∂v^a`.
pub fn complete_lift_vector(x: &VectorFieldExpr, ep: &ExtendedPoint) -> Result<DVector<f64>> {
    let m = ep.base.dim();
    let mut out = DVector::zeros(2 * m + 1);
    out.rows_mut(0, m).copy_from(&x.eval(ep.base.as_slice())?);
    out.rows_mut(m, m).copy_from(&(x.jacobian(ep.base.as_slice())? * &ep.fiber));
    Ok(out)
}

/// `(TM × R, η̄)` over a Darboux chart, with `η̄` held symbolically in `(q, v, t)`.
#[derive(Debug, Clone)]
pub struct ExtendedChart {
    chart: DarbouxChart,
    eta_bar: OneFormExpr,
}

impl ExtendedChart {
    pub fn new(chart: DarbouxChart) -> Self {
        let m = chart.dim();
        let eta = OneFormExpr::eta(&chart);
        let t = ScalarField::var(2 * m);
        let mut c = Vec::with_capacity(2 * m + 1);
        for a in 0..m {
            let alpha = &eta.components()[a];
            let mut comp = &t * alpha;
            for b in 0..m {
                let d = alpha.partial(b);
                if !d.is_zero() {
                    comp = comp + d * ScalarField::var(m + b);
                }
            }
            c.push(comp);
        }
        c.extend(eta.components().iter().cloned());
        c.push(ScalarField::zero());
        ExtendedChart {
            chart,
            eta_bar: OneFormExpr::new(c),
        }
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        2 * self.chart.dim() + 1
    }

    pub fn t_index(&self) -> usize {
        2 * self.chart.dim()
    }

    fn check(&self, ep: &ExtendedPoint) -> Result<Vec<f64>> {
        self.chart.check_dim(ep.base.dim())?;
        Ok(ep.coords())
    }

    pub fn eta_bar_form(&self) -> &OneFormExpr {
        &self.eta_bar
    }

    pub fn contact_form(&self, ep: &ExtendedPoint) -> Result<DVector<f64>> {
        self.eta_bar.eval(&self.check(ep)?)
    }

    /// `dη̄` by differentiating the components of `η̄`.
    pub fn deta_bar(&self, ep: &ExtendedPoint) -> Result<DMatrix<f64>> {
        self.eta_bar.exterior_derivative(&self.check(ep)?)
    }

    /// Matrix of `v ↦ ι_v dη̄ + η̄(v) η̄`.
    pub fn flat_matrix(&self, ep: &ExtendedPoint) -> Result<DMatrix<f64>> {
        Ok(flat_matrix_from(&self.contact_form(ep)?, &self.deta_bar(ep)?))
    }

    pub fn flat(&self, ep: &ExtendedPoint, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.flat_matrix(ep)? * v)
    }

    /// `R̄ = R^v`, the unit vector on the fiber `z` slot.
    pub fn reeb(&self) -> DVector<f64> {
        let mut r = DVector::zeros(self.dim());
        r[self.chart.dim() + self.chart.z()] = 1.0;
        r
    }

    /// `R^c`, which for the constant `R = ∂z` is `∂z` on the base.
    pub fn reeb_complete(&self) -> DVector<f64> {
        let mut r = DVector::zeros(self.dim());
        r[self.chart.z()] = 1.0;
        r
    }

    pub fn dt(&self) -> DVector<f64> {
        let mut r = DVector::zeros(self.dim());
        r[self.t_index()] = 1.0;
        r
    }

    pub fn identities(&self, ep: &ExtendedPoint) -> Result<LiftIdentities> {
        let eta_bar = self.contact_form(ep)?;
        let f = self.flat_matrix(ep)?;
        let d = self.deta_bar(ep)?;
        let r = self.reeb();
        let eta_v = vertical_lift_form(&OneFormExpr::eta(&self.chart), ep)?;
        let expect_rc = &eta_bar * ep.t - self.dt();
        Ok(LiftIdentities {
            flat_det: linalg::determinant(&f),
            reeb_normalization: (eta_bar.dot(&r) - 1.0).abs(),
            reeb_kernel: (d.transpose() * &r).amax(),
            flat_reeb_vertical: (&f * &r - &eta_bar).amax(),
            flat_reeb_complete: (&f * self.reeb_complete() - expect_rc).amax(),
            flat_dt: (&f * self.dt() - eta_v).amax(),
        })
    }
}

/// Residuals of the `♭̄` table and the Reeb conditions at one point.
#[derive(Debug, Clone, Serialize)]
pub struct LiftIdentities {
    pub flat_det: f64,
    /// `|η̄(R̄) − 1|`
    pub reeb_normalization: f64,
    /// `|ι_{R̄} dη̄|`
    pub reeb_kernel: f64,
    /// `|♭̄(R^v) − η̄|`
    pub flat_reeb_vertical: f64,
    /// `|♭̄(R^c) − (−dt + t η̄)|`
    pub flat_reeb_complete: f64,
    /// `|♭̄(∂t) − η^v|`
    pub flat_dt: f64,
}

impl LiftIdentities {
    pub fn worst_residual(&self) -> f64 {
        self.reeb_normalization
            .max(self.reeb_kernel)
            .max(self.flat_reeb_vertical)
            .max(self.flat_reeb_complete)
            .max(self.flat_dt)
    }

    pub fn passed(&self) -> bool {
        self.flat_det.abs() > tolerances::NONDEGENERATE_DET && self.worst_residual() <= tolerances::COMPOSED
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendrianImageReport {
    /// Max `|η̄(∂_k ep)|` over samples and tangent columns.
    pub max_residual: f64,
    /// Smallest rank of the image tangent space seen.
    pub min_rank: usize,
    pub expected_dim: usize,
    pub samples: usize,
}

impl LegendrianImageReport {
    pub fn is_legendrian(&self) -> bool {
        self.max_residual <= tolerances::COMPOSED && self.min_rank == self.expected_dim
    }
}

/// `−R(η(X))`, the `t` component of `X̄`.
pub fn extension_function(chart: &DarbouxChart, x: &VectorFieldExpr) -> ScalarField {
    -OneFormExpr::eta(chart).contract(x).partial(chart.z())
}

/// Image of `p ↦ (p, X(p), τ(p))` tested against `η̄`.
pub fn extension_image_residual(
    chart: &DarbouxChart,
    x: &VectorFieldExpr,
    tau: &ScalarField,
    samples: &[Point],
) -> Result<LegendrianImageReport> {
    chart.check_dim(x.dim())?;
    let m = chart.dim();
    let ext = ExtendedChart::new(*chart);
    let mut comps: Vec<ScalarField> = (0..m).map(ScalarField::var).collect();
    comps.extend(x.components().iter().cloned());
    comps.push(tau.clone());
    let mut max_residual = 0.0f64;
    let mut min_rank = m;
    for p in samples {
        chart.check_dim(p.dim())?;
        let q = p.as_slice();
        let mut tangent = DMatrix::zeros(2 * m + 1, m);
        let mut value = vec![0.0; 2 * m + 1];
        for k in 0..m {
            let pt = seeded(q, k);
            for (i, c) in comps.iter().enumerate() {
                let d = c.eval(&pt)?;
                value[i] = d.re();
                tangent[(i, k)] = d.coeff(1);
            }
        }
        let ep = ExtendedPoint::from_slice(m, &value)?;
        let eta_bar = ext.contact_form(&ep)?;
        max_residual = max_residual.max((tangent.transpose() * eta_bar).amax());
        min_rank = min_rank.min(linalg::rank(&tangent, tolerances::RANK));
    }
    Ok(LegendrianImageReport {
        max_residual,
        min_rank,
        expected_dim: m,
        samples: samples.len(),
    })
}

/// `im(X̄)` with `X̄ = X × (−R(η(X)))`; Legendrian exactly when `X` is Hamiltonian.
pub fn legendrian_image_residual(
    chart: &DarbouxChart,
    x: &VectorFieldExpr,
    samples: &[Point],
) -> Result<LegendrianImageReport> {
    extension_image_residual(chart, x, &extension_function(chart, x), samples)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformalJacobiReport {
    /// `η̄` on `im(X × (−f))`.
    pub image_residual: f64,
    /// Max `|ℒ_X η − f η|` from the conformal fit.
    pub conformal_residual: f64,
    /// Max `|g − f|` with `g` the fitted factor.
    pub factor_mismatch: f64,
}

impl ConformalJacobiReport {
    pub fn image_vanishes(&self) -> bool {
        self.image_residual <= tolerances::COMPOSED
    }

    pub fn is_conformal_with_factor(&self) -> bool {
        self.conformal_residual <= tolerances::COMPOSED && self.factor_mismatch <= tolerances::COMPOSED
    }

    pub fn consistent(&self) -> bool {
        self.image_vanishes() == self.is_conformal_with_factor()
    }
}

/// Tests `(X, f)`: `η̄` vanishes on `im(X × (−f))` against `ℒ_X η = f η`.
pub fn conformal_jacobi_check(
    chart: &DarbouxChart,
    x: &VectorFieldExpr,
    f: &ScalarField,
    samples: &[Point],
) -> Result<ConformalJacobiReport> {
    let image = extension_image_residual(chart, x, &-f, samples)?;
    let mut conformal_residual = 0.0f64;
    let mut factor_mismatch = 0.0f64;
    for p in samples {
        let (g, r) = conformal_factor(chart, x, p.as_slice())?;
        conformal_residual = conformal_residual.max(r);
        factor_mismatch = factor_mismatch.max((g - f.value(p.as_slice())?).abs());
    }
    Ok(ConformalJacobiReport {
        image_residual: image.max_residual,
        conformal_residual,
        factor_mismatch,
    })
}
