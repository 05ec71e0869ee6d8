//! Jacobi structures `(Λ, E)` and their brackets
//! `{f, g} = Λ(df, dg) + f E(g) − g E(f)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::calculus::{gradient_at, Dual, ScalarField};
use crate::chart::{DarbouxChart, Point, TangentVec};
use crate::error::{Error, EvalError, Result};

/// A bivector `Λ` and vector field `E`, both given by expression components.
///
/// `Λ(α, β) = α_j Λ^{jk} β_k` and `♯_Λ(α) = Λ(α, ·)`.
pub trait JacobiStructure: Send + Sync {
    fn dim(&self) -> usize;

    /// `Λ^{jk}` as fields; row-major, antisymmetric.
    fn lambda_fields(&self) -> &[Vec<ScalarField>];

    fn e_fields(&self) -> &[ScalarField];

    fn lambda_matrix(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dim();
        check_len(d, p.len())?;
        let f = self.lambda_fields();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                if !f[j][k].is_zero() {
                    m[(j, k)] = f[j][k].value(p)?;
                }
            }
        }
        Ok(m)
    }

    fn lambda(&self, p: &[f64], alpha: &DVector<f64>, beta: &DVector<f64>) -> Result<f64> {
        Ok(alpha.dot(&(self.lambda_matrix(p)? * beta)))
    }

    fn e_at(&self, p: &[f64]) -> Result<DVector<f64>> {
        check_len(self.dim(), p.len())?;
        let mut e = DVector::zeros(self.dim());
        for (k, c) in self.e_fields().iter().enumerate() {
            e[k] = c.value(p)?;
        }
        Ok(e)
    }

    fn sharp_lambda(&self, p: &[f64], alpha: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim(), alpha.len())?;
        Ok(self.lambda_matrix(p)?.transpose() * alpha)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// The structure induced by the contact form: `Λ(α, β) = −dη(♯α, ♯β)`, `E = −R`.
#[derive(Debug, Clone)]
pub struct ContactJacobi {
    chart: DarbouxChart,
    lambda: Vec<Vec<ScalarField>>,
    e: Vec<ScalarField>,
}

impl ContactJacobi {
    pub fn new(chart: DarbouxChart) -> Self {
        let d = chart.dim();
        let mut lambda = vec![vec![ScalarField::zero(); d]; d];
        for i in 0..chart.n() {
            let (x, y, z) = (chart.x(i), chart.y(i), chart.z());
            let yv = ScalarField::var(y);
            lambda[x][y] = ScalarField::constant(-1.0);
            lambda[y][x] = ScalarField::one();
            lambda[y][z] = yv.clone();
            lambda[z][y] = -yv;
        }
        let mut e = vec![ScalarField::zero(); d];
        e[chart.z()] = ScalarField::constant(-1.0);
        ContactJacobi { chart, lambda, e }
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    /// `♯(α) − α(R) R` through the ♭ solve of the chart.
    pub fn sharp_lambda_at(&self, p: &Point, alpha: &DVector<f64>) -> Result<TangentVec> {
        let cov = self.chart.cotangent(p, alpha.as_slice().to_vec())?;
        let mut v = self.chart.sharp(&cov)?.into_components();
        v[self.chart.z()] -= alpha[self.chart.z()];
        TangentVec::new(p, v)
    }

    /// `Λ(α, β) = β(♯_Λ α)`.
    pub fn lambda_via_sharp(&self, p: &Point, alpha: &DVector<f64>, beta: &DVector<f64>) -> Result<f64> {
        Ok(beta.dot(self.sharp_lambda_at(p, alpha)?.components()))
    }

    /// `Λ(α, β) = −dη(♯α, ♯β)`.
    pub fn lambda_via_deta(&self, p: &Point, alpha: &DVector<f64>, beta: &DVector<f64>) -> Result<f64> {
        let a = self.chart.sharp(&self.chart.cotangent(p, alpha.as_slice().to_vec())?)?;
        let b = self.chart.sharp(&self.chart.cotangent(p, beta.as_slice().to_vec())?)?;
        Ok(-self.chart.deta(a.components(), b.components()))
    }
}

impl JacobiStructure for ContactJacobi {
    fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn lambda_fields(&self) -> &[Vec<ScalarField>] {
        &self.lambda
    }

    fn e_fields(&self) -> &[ScalarField] {
        &self.e
    }

    fn sharp_lambda(&self, p: &[f64], alpha: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.chart.point(p.to_vec())?;
        Ok(self.sharp_lambda_at(&p, alpha)?.into_components())
    }
}

/// Cosymplectic structure `Ω = dx^i ∧ dy_i`, `η = dz` on a Darboux chart: `Λ(dx^i, dy_i) = 1`, `E = 0`.
#[derive(Debug, Clone)]
pub struct CosymplecticJacobi {
    dim: usize,
    lambda: Vec<Vec<ScalarField>>,
    e: Vec<ScalarField>,
}

impl CosymplecticJacobi {
    pub fn new(chart: DarbouxChart) -> Self {
        let d = chart.dim();
        let mut lambda = vec![vec![ScalarField::zero(); d]; d];
        for i in 0..chart.n() {
            lambda[chart.x(i)][chart.y(i)] = ScalarField::one();
            lambda[chart.y(i)][chart.x(i)] = ScalarField::constant(-1.0);
        }
        CosymplecticJacobi {
            dim: d,
            lambda,
            e: vec![ScalarField::zero(); d],
        }
    }
}

impl JacobiStructure for CosymplecticJacobi {
    fn dim(&self) -> usize {
        self.dim
    }

    fn lambda_fields(&self) -> &[Vec<ScalarField>] {
        &self.lambda
    }

    fn e_fields(&self) -> &[ScalarField] {
        &self.e
    }
}

/// Locally conformally symplectic structure from a nondegenerate 2-form `Ω`
/// (`Ω(u, v) = uᵀ Ω v`) and its Lee form `γ` with `dΩ = γ ∧ Ω`.
///
/// `Λ = −Ω⁻¹` and `E^k = Λ^{kj} γ_j`, i.e. `E = −♯_Λ(γ)`. The inverse is computed pointwise over dual
/// numbers so derivatives of `Λ` stay exact.
#[derive(Clone)]
pub struct LcsJacobi {
    dim: usize,
    lambda: Vec<Vec<ScalarField>>,
    e: Vec<ScalarField>,
}

impl LcsJacobi {
    pub fn new(omega: Vec<Vec<ScalarField>>, gamma: Vec<ScalarField>) -> Result<Self> {
        let d = omega.len();
        if d == 0 || !d.is_multiple_of(2) {
            return Err(Error::Invalid(format!("LCS structure needs even dimension, got {d}")));
        }
        if omega.iter().any(|row| row.len() != d) {
            return Err(Error::Invalid("Ω must be square".into()));
        }
        check_len(d, gamma.len())?;
        let omega = Arc::new(omega);
        let gamma = Arc::new(gamma);
        let mut lambda = vec![vec![ScalarField::zero(); d]; d];
        for (j, row) in lambda.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let om = Arc::clone(&omega);
                *entry = ScalarField::native(format!("lcs_lambda_{j}{k}"), move |p| {
                    let inv = dual_inverse(eval_matrix(&om, p)?)?;
                    Ok(-&inv[j][k])
                });
            }
        }
        let e = (0..d)
            .map(|k| {
                let om = Arc::clone(&omega);
                let ga = Arc::clone(&gamma);
                ScalarField::native(format!("lcs_e_{k}"), move |p| {
                    let inv = dual_inverse(eval_matrix(&om, p)?)?;
                    let mut acc = Dual::constant(0.0);
                    for (j, g) in ga.iter().enumerate() {
                        if !g.is_zero() {
                            acc = &acc - &(&g.eval(p)? * &inv[k][j]);
                        }
                    }
                    Ok(acc)
                })
            })
            .collect();
        Ok(LcsJacobi { dim: d, lambda, e })
    }

    /// `Ω = e^{−x¹}(dx¹∧dy₁ + dx²∧dy₂)`, `γ = −dx¹` on `R⁴` with coordinates `(x¹, x², y₁, y₂)`.
    pub fn conformal_example() -> Self {
        let w = (-ScalarField::var(0)).exp();
        let mut omega = vec![vec![ScalarField::zero(); 4]; 4];
        for i in 0..2 {
            omega[i][i + 2] = w.clone();
            omega[i + 2][i] = -&w;
        }
        let mut gamma = vec![ScalarField::zero(); 4];
        gamma[0] = ScalarField::constant(-1.0);
        Self::new(omega, gamma).expect("well-formed example")
    }
}

impl JacobiStructure for LcsJacobi {
    fn dim(&self) -> usize {
        self.dim
    }

    fn lambda_fields(&self) -> &[Vec<ScalarField>] {
        &self.lambda
    }

    fn e_fields(&self) -> &[ScalarField] {
        &self.e
    }
}

fn eval_matrix(m: &[Vec<ScalarField>], p: &[Dual]) -> std::result::Result<Vec<Vec<Dual>>, EvalError> {
    m.iter()
        .map(|row| row.iter().map(|f| f.eval(p)).collect())
        .collect()
}

/// Gauss–Jordan inverse with partial pivoting on the real parts.
fn dual_inverse(mut a: Vec<Vec<Dual>>) -> std::result::Result<Vec<Vec<Dual>>, EvalError> {
    let n = a.len();
    let mut inv: Vec<Vec<Dual>> = (0..n)
        .map(|i| (0..n).map(|j| Dual::constant(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].re().abs().total_cmp(&a[s][col].re().abs()))
            .expect("non-empty range");
        if a[pivot][col].re().abs() < 1e-300 {
            return Err(EvalError::Domain("singular 2-form".into()));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let r = a[col][col].recip()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for row in 0..n {
            if row == col || a[row][col].coeffs().iter().all(|&c| c == 0.0) {
                continue;
            }
            let factor = a[row][col].clone();
            for j in 0..n {
                a[row][j] = &a[row][j] - &(&factor * &a[col][j]);
                inv[row][j] = &inv[row][j] - &(&factor * &inv[col][j]);
            }
        }
    }
    Ok(inv)
}

/// `{f, g}(p)` from gradients at the point.
pub fn jacobi_bracket(s: &dyn JacobiStructure, f: &ScalarField, g: &ScalarField, p: &[f64]) -> Result<f64> {
    let df = gradient_at(f, p)?;
    let dg = gradient_at(g, p)?;
    let e = s.e_at(p)?;
    Ok(s.lambda(p, &df, &dg)? + f.value(p)? * e.dot(&dg) - g.value(p)? * e.dot(&df))
}

/// `{f, g}` as a new field, so it can be bracketed again.
pub fn bracket_field(s: &dyn JacobiStructure, f: &ScalarField, g: &ScalarField) -> ScalarField {
    let d = s.dim();
    let lam = s.lambda_fields();
    let df: Vec<ScalarField> = (0..d).map(|k| f.partial(k)).collect();
    let dg: Vec<ScalarField> = (0..d).map(|k| g.partial(k)).collect();
    let mut terms = Vec::new();
    for j in 0..d {
        for k in 0..d {
            if !lam[j][k].is_zero() && !df[j].is_zero() && !dg[k].is_zero() {
                terms.push(&lam[j][k] * &(&df[j] * &dg[k]));
            }
        }
    }
    let e_of = |h: &[ScalarField]| -> ScalarField {
        s.e_fields()
            .iter()
            .zip(h)
            .filter(|(e, dh)| !e.is_zero() && !dh.is_zero())
            .map(|(e, dh)| e * dh)
            .sum()
    };
    terms.push(f * &e_of(&dg));
    terms.push(-(g * &e_of(&df)));
    terms.into_iter().sum()
}

/// `{fg, h} − f{g, h} − g{f, h}`; identically `−f g E(h)`.
pub fn leibniz_defect(
    s: &dyn JacobiStructure,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    p: &[f64],
) -> Result<f64> {
    let fg = f * g;
    Ok(jacobi_bracket(s, &fg, h, p)?
        - f.value(p)? * jacobi_bracket(s, g, h, p)?
        - g.value(p)? * jacobi_bracket(s, f, h, p)?)
}

/// `|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|` with inner brackets built as fields.
pub fn jacobi_identity_residual(
    s: &dyn JacobiStructure,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    p: &[f64],
) -> Result<f64> {
    let a = jacobi_bracket(s, f, &bracket_field(s, g, h), p)?;
    let b = jacobi_bracket(s, g, &bracket_field(s, h, f), p)?;
    let c = jacobi_bracket(s, h, &bracket_field(s, f, g), p)?;
    Ok((a + b + c).abs())
}
