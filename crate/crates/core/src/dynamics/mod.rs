//! Contact Hamiltonian vector fields, trajectories and the dissipation monitors.

pub mod integrate;

use nalgebra::DVector;
use rayon::prelude::*;

pub use integrate::{IntegratorSpec, Method, Solution};

use crate::calculus::{directional, gradient_at, lie_derivative_at, OneFormExpr, ScalarField, VectorFieldExpr};
use crate::chart::{DarbouxChart, Point};
use crate::error::{Error, Result};

/// `X_H = H_{y_i} ∂_{x^i} − (H_{x^i} + y_i H_z) ∂_{y_i} + (y_i H_{y_i} − H) ∂_z`.
pub fn hamiltonian_vector_field(chart: &DarbouxChart, h: &ScalarField) -> VectorFieldExpr {
    let n = chart.n();
    let hz = h.partial(chart.z());
    let mut c = vec![ScalarField::zero(); chart.dim()];
    let mut zc = -h;
    for i in 0..n {
        let y = ScalarField::var(chart.y(i));
        let hy = h.partial(chart.y(i));
        let hx = h.partial(chart.x(i));
        c[chart.x(i)] = hy.clone();
        c[chart.y(i)] = -(hx + &y * &hz);
        zc = &y * &hy + zc;
    }
    c[chart.z()] = zc;
    VectorFieldExpr::new(c)
}

/// Coordinate values of `X_H` from one gradient evaluation.
fn hamiltonian_vector(chart: &DarbouxChart, h: f64, dh: &DVector<f64>, p: &[f64]) -> DVector<f64> {
    let mut v = DVector::zeros(chart.dim());
    let hz = dh[chart.z()];
    let mut z = -h;
    for i in 0..chart.n() {
        let (x, y) = (chart.x(i), chart.y(i));
        v[x] = dh[y];
        v[y] = -(dh[x] + p[y] * hz);
        z += p[y] * dh[y];
    }
    v[chart.z()] = z;
    v
}

/// A contact Hamiltonian system `(R^{2n+1}, η, H)`.
#[derive(Debug, Clone)]
pub struct ContactSystem {
    chart: DarbouxChart,
    h: ScalarField,
}

/// Diagnostics recorded at every accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitor {
    pub h: f64,
    /// `R(H) = ∂H/∂z`.
    pub rh: f64,
    pub energy_defect: f64,
    pub div_defect: f64,
    pub conformal_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub monitors: Vec<Monitor>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&Point> {
        self.points.last()
    }
}

impl ContactSystem {
    pub fn new(chart: DarbouxChart, h: ScalarField) -> Result<Self> {
        if let Some(k) = h.max_var() {
            if k >= chart.dim() {
                return Err(Error::DimensionMismatch {
                    expected: chart.dim(),
                    got: k + 1,
                });
            }
        }
        Ok(ContactSystem { chart, h })
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    pub fn hamiltonian(&self) -> &ScalarField {
        &self.h
    }

    pub fn hamiltonian_field(&self) -> VectorFieldExpr {
        hamiltonian_vector_field(&self.chart, &self.h)
    }

    pub fn vector_at(&self, p: &[f64]) -> Result<DVector<f64>> {
        self.chart.check_dim(p.len())?;
        let dh = gradient_at(&self.h, p)?;
        Ok(hamiltonian_vector(&self.chart, self.h.value(p)?, &dh, p))
    }

    /// `R(H)(p)`.
    pub fn reeb_derivative(&self, p: &[f64]) -> Result<f64> {
        Ok(gradient_at(&self.h, p)?[self.chart.z()])
    }

    pub fn monitor(&self, p: &[f64]) -> Result<Monitor> {
        let h = self.h.value(p)?;
        let dh = gradient_at(&self.h, p)?;
        let rh = dh[self.chart.z()];
        let x = hamiltonian_vector(&self.chart, h, &dh, p);
        Ok(Monitor {
            h,
            rh,
            energy_defect: (dh.dot(&x) + rh * h).abs(),
            div_defect: divergence_defect(self, p)?,
            conformal_residual: conformal_factor(&self.chart, &self.hamiltonian_field(), p)?.1,
        })
    }

    pub fn integrate(&self, x0: &Point, spec: &IntegratorSpec) -> Result<Trajectory> {
        self.chart.check_dim(x0.dim())?;
        let f = |y: &DVector<f64>| self.vector_at(y.as_slice());
        let sol = integrate::solve(&f, x0.coords(), spec)?;
        let field = self.hamiltonian_field();
        let mut points = Vec::with_capacity(sol.states.len());
        let mut monitors = Vec::with_capacity(sol.states.len());
        for y in &sol.states {
            let p = y.as_slice();
            let h = self.h.value(p)?;
            let dh = gradient_at(&self.h, p)?;
            let rh = dh[self.chart.z()];
            let x = hamiltonian_vector(&self.chart, h, &dh, p);
            monitors.push(Monitor {
                h,
                rh,
                energy_defect: (dh.dot(&x) + rh * h).abs(),
                div_defect: (field.divergence(p)? + (self.chart.n() as f64 + 1.0) * rh).abs(),
                conformal_residual: conformal_fit(&self.chart, &field, p)?.1,
            });
            points.push(Point::new(p.to_vec())?);
        }
        Ok(Trajectory {
            times: sol.times,
            points,
            monitors,
        })
    }

    /// Integrates several initial conditions in parallel; results keep input order.
    pub fn integrate_many(&self, x0s: &[Point], spec: &IntegratorSpec) -> Vec<Result<Trajectory>> {
        x0s.par_iter().map(|x0| self.integrate(x0, spec)).collect()
    }
}

/// `|dH(X_H) + R(H) H|` at `p`.
pub fn energy_rate_defect(system: &ContactSystem, p: &[f64]) -> Result<f64> {
    let x = system.hamiltonian_field().eval(p)?;
    let dh = gradient_at(&system.h, p)?;
    Ok((dh.dot(&x) + dh[system.chart.z()] * system.h.value(p)?).abs())
}

/// `|div X_H + (n+1) R(H)|`. In Darboux coordinates `η ∧ (dη)^n` is a constant
/// multiple of the coordinate volume, so the coordinate divergence suffices.
pub fn divergence_defect(system: &ContactSystem, p: &[f64]) -> Result<f64> {
    let div = system.hamiltonian_field().divergence(p)?;
    let rh = system.reeb_derivative(p)?;
    Ok((div + (system.chart.n() as f64 + 1.0) * rh).abs())
}

/// Density coefficient of `ℒ_{X_H}(H^{−(n+1)} Ω)` against `Ω`.
pub fn invariant_measure_defect(system: &ContactSystem, p: &[f64]) -> Result<f64> {
    invariant_measure_defect_with_exponent(system, p, -(system.chart.n() as i32 + 1))
}

/// Same as [`invariant_measure_defect`] with density `H^k`.
pub fn invariant_measure_defect_with_exponent(system: &ContactSystem, p: &[f64], k: i32) -> Result<f64> {
    let h = system.h.value(p)?;
    if h == 0.0 {
        return Err(Error::UndefinedMeasure(h));
    }
    let field = system.hamiltonian_field();
    let density = system.h.powi(k);
    let x = field.eval(p)?;
    let transport = directional(&density, p, &x)?;
    Ok((transport + density.value(p)? * field.divergence(p)?).abs())
}

fn conformal_fit(chart: &DarbouxChart, x: &VectorFieldExpr, p: &[f64]) -> Result<(f64, f64)> {
    let l = lie_derivative_at(x, &OneFormExpr::eta(chart), p)?;
    let eta = chart.eta_components(p);
    let g = l.dot(&eta) / eta.dot(&eta);
    Ok((g, (l - eta * g).norm()))
}

/// Least-squares `g` in `ℒ_X η = g η` at `p`, and the norm of the remainder.
pub fn conformal_factor(chart: &DarbouxChart, x: &VectorFieldExpr, p: &[f64]) -> Result<(f64, f64)> {
    chart.check_dim(p.len())?;
    conformal_fit(chart, x, p)
}

#[derive(Debug, Clone)]
pub struct HamiltonianReport {
    /// Candidate `H = −η(X)`.
    pub hamiltonian: ScalarField,
    pub max_defect: f64,
    pub samples: usize,
}

/// Compares `X` with `X_{−η(X)}` over the samples.
pub fn is_hamiltonian(chart: &DarbouxChart, x: &VectorFieldExpr, samples: &[Point]) -> Result<HamiltonianReport> {
    if x.dim() != chart.dim() {
        return Err(Error::DimensionMismatch {
            expected: chart.dim(),
            got: x.dim(),
        });
    }
    let h = -OneFormExpr::eta(chart).contract(x);
    let xh = hamiltonian_vector_field(chart, &h);
    let mut max_defect = 0.0f64;
    for p in samples {
        chart.check_dim(p.dim())?;
        let d = (x.eval(p.as_slice())? - xh.eval(p.as_slice())?).norm();
        max_defect = max_defect.max(d);
    }
    Ok(HamiltonianReport {
        hamiltonian: h,
        max_defect,
        samples: samples.len(),
    })
}
