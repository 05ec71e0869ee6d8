//! Distributions and submanifolds of a Darboux chart: contact complements,
//! point classification, isotropy and coisotropy tests, characteristic
//! distributions and checks of coisotropic reduction through a declared projection.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::calculus::{gradient_at, lie_bracket_at, parse_with, Params, ScalarField, VarNames, VectorFieldExpr};
use crate::chart::{DarbouxChart, Point};
use crate::error::{Error, Result};
use crate::jacobi::{ContactJacobi, JacobiStructure};
use crate::linalg;
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointClass {
    Horizontal,
    Vertical,
    Oblique,
}

fn check_basis(chart: &DarbouxChart, basis: &[DVector<f64>]) -> Result<()> {
    for b in basis {
        chart.check_dim(b.len())?;
    }
    let r = linalg::rank(&linalg::stack_columns(chart.dim(), basis), tolerances::RANK);
    if r < basis.len() {
        return Err(Error::DependentBasis {
            rank: r,
            expected: basis.len(),
        });
    }
    Ok(())
}

/// `⊥Λ Δ = ♯_Λ(ann Δ)` as an orthonormal basis.
pub fn contact_complement(chart: &DarbouxChart, p: &Point, basis: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    chart.check_dim(p.dim())?;
    check_basis(chart, basis)?;
    let ann = linalg::nullspace(&linalg::stack_rows(chart.dim(), basis), tolerances::RANK);
    let jac = ContactJacobi::new(*chart);
    let images = ann
        .iter()
        .map(|a| Ok(jac.sharp_lambda_at(p, a)?.into_components()))
        .collect::<Result<Vec<_>>>()?;
    Ok(linalg::orthonormal_span(chart.dim(), &images, tolerances::RANK))
}

/// `⊥dη Δ ∩ H`: vectors `dη`-orthogonal to `Δ` and annihilated by `η`.
pub fn deta_complement_horizontal(
    chart: &DarbouxChart,
    p: &Point,
    basis: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    chart.check_dim(p.dim())?;
    check_basis(chart, basis)?;
    let m = chart.deta_matrix();
    let mut rows: Vec<DVector<f64>> = basis.iter().map(|b| m.transpose() * b).collect();
    rows.push(chart.eta_components(p.as_slice()));
    Ok(linalg::nullspace(&linalg::stack_rows(chart.dim(), &rows), tolerances::RANK))
}

/// Horizontal if `η` vanishes on `Δ`, vertical if `R ∈ Δ`, oblique otherwise.
pub fn classify_point(chart: &DarbouxChart, p: &Point, basis: &[DVector<f64>]) -> Result<PointClass> {
    chart.check_dim(p.dim())?;
    check_basis(chart, basis)?;
    let eta = chart.eta_components(p.as_slice());
    if basis.iter().all(|b| eta.dot(b).abs() <= tolerances::RANK * b.norm().max(1.0)) {
        return Ok(PointClass::Horizontal);
    }
    let span = linalg::orthonormal_span(chart.dim(), basis, tolerances::RANK);
    let r = chart.reeb(p)?.into_components();
    if linalg::distance_to_span(&r, &span) <= tolerances::RANK {
        Ok(PointClass::Vertical)
    } else {
        Ok(PointClass::Oblique)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IsotropyReport {
    /// Max of `|η(∂ψ/∂s_j)|` over samples and parameter directions.
    pub max_eta: f64,
    pub isotropic: bool,
    pub legendrian: bool,
    pub dimension: usize,
    pub samples: usize,
}

/// `ψ: R^k → R^{2n+1}` given componentwise by fields of `s1..sk`.
#[derive(Debug, Clone)]
pub struct ParamSubmanifold {
    chart: DarbouxChart,
    k: usize,
    psi: Vec<ScalarField>,
}

impl ParamSubmanifold {
    pub fn new(chart: DarbouxChart, k: usize, psi: Vec<ScalarField>) -> Result<Self> {
        chart.check_dim(psi.len())?;
        if k == 0 {
            return Err(Error::Invalid("parametrization needs at least one parameter".into()));
        }
        if let Some(m) = psi.iter().filter_map(ScalarField::max_var).max() {
            if m >= k {
                return Err(Error::DimensionMismatch { expected: k, got: m + 1 });
            }
        }
        Ok(ParamSubmanifold { chart, k, psi })
    }

    /// Components as text in the parameters `s1..sk`.
    pub fn parse(chart: DarbouxChart, k: usize, sources: &[impl AsRef<str>], params: &Params) -> Result<Self> {
        let names = VarNames::Parameters(k);
        let psi = sources
            .iter()
            .map(|s| parse_with(s.as_ref(), &names, params))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(chart, k, psi)
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.psi
    }

    pub fn point(&self, s: &[f64]) -> Result<Point> {
        self.check_params(s)?;
        let coords = self.psi.iter().map(|f| f.value(s)).collect::<std::result::Result<Vec<_>, _>>()?;
        Point::new(coords)
    }

    fn check_params(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: s.len(),
            });
        }
        Ok(())
    }

    /// Columns `∂ψ/∂s_j`; errors when they are dependent.
    pub fn tangent_basis(&self, s: &[f64]) -> Result<Vec<DVector<f64>>> {
        self.check_params(s)?;
        let d = self.chart.dim();
        let mut jac = DMatrix::zeros(d, self.k);
        for (i, f) in self.psi.iter().enumerate() {
            jac.set_row(i, &gradient_at(f, s)?.transpose());
        }
        let r = linalg::rank(&jac, tolerances::RANK);
        if r < self.k {
            return Err(Error::RankDeficient { rank: r, expected: self.k });
        }
        Ok(linalg::columns(&jac))
    }

    /// Keeps the listed ambient coordinates, giving a parametrization in a smaller chart.
    pub fn project(&self, kept: &[usize], quotient: DarbouxChart) -> Result<Self> {
        quotient.check_dim(kept.len())?;
        let psi = kept
            .iter()
            .map(|&i| {
                self.psi.get(i).cloned().ok_or(Error::DimensionMismatch {
                    expected: self.chart.dim(),
                    got: i + 1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(quotient, self.k, psi)
    }

    pub fn is_isotropic(&self, samples: &[Vec<f64>]) -> Result<IsotropyReport> {
        let mut max_eta = 0.0f64;
        for s in samples {
            let p = self.point(s)?;
            let eta = self.chart.eta_components(p.as_slice());
            for t in self.tangent_basis(s)? {
                max_eta = max_eta.max(eta.dot(&t).abs());
            }
        }
        let isotropic = max_eta <= tolerances::COMPOSED;
        Ok(IsotropyReport {
            max_eta,
            isotropic,
            legendrian: isotropic && self.k == self.chart.n(),
            dimension: self.k,
            samples: samples.len(),
        })
    }

    pub fn is_legendrian(&self, samples: &[Vec<f64>]) -> Result<IsotropyReport> {
        self.is_isotropic(samples)
    }
}

/// `N = {φ_1 = … = φ_k = 0}`.
#[derive(Debug, Clone)]
pub struct LevelSetSubmanifold {
    chart: DarbouxChart,
    constraints: Vec<ScalarField>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoisotropyReport {
    /// Max of `|Z_a(φ_b)|` with `Z_a = ♯_Λ(dφ_a)`.
    pub max_residual: f64,
    /// Max disagreement with the frame formula `A_i(φ_a)B^i(φ_b) − B^i(φ_a)A_i(φ_b)`,
    /// which equals `−Z_a(φ_b)`.
    pub frame_residual: f64,
    /// Max of `|dφ_b(Z_a)|` relative to `span{Z_a} ⊆ TN` (same numbers, other route).
    pub tangency_residual: f64,
    pub coisotropic: bool,
    pub samples: usize,
}

impl LevelSetSubmanifold {
    pub fn new(chart: DarbouxChart, constraints: Vec<ScalarField>) -> Result<Self> {
        if let Some(m) = constraints.iter().filter_map(ScalarField::max_var).max() {
            if m >= chart.dim() {
                return Err(Error::DimensionMismatch {
                    expected: chart.dim(),
                    got: m + 1,
                });
            }
        }
        Ok(LevelSetSubmanifold { chart, constraints })
    }

    pub fn parse(chart: DarbouxChart, sources: &[impl AsRef<str>], params: &Params) -> Result<Self> {
        let names = VarNames::Chart(chart);
        let c = sources
            .iter()
            .map(|s| parse_with(s.as_ref(), &names, params))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(chart, c)
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    pub fn constraints(&self) -> &[ScalarField] {
        &self.constraints
    }

    pub fn codim(&self) -> usize {
        self.constraints.len()
    }

    pub fn values(&self, p: &[f64]) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(self.codim());
        for (a, c) in self.constraints.iter().enumerate() {
            v[a] = c.value(p)?;
        }
        Ok(v)
    }

    /// Rows `dφ_a`.
    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.codim(), self.chart.dim());
        for (a, c) in self.constraints.iter().enumerate() {
            j.set_row(a, &gradient_at(c, p)?.transpose());
        }
        Ok(j)
    }

    /// Constraint Jacobian after checking full row rank.
    pub fn regular_jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let j = self.jacobian(p)?;
        let r = linalg::rank(&j, tolerances::RANK);
        if r < self.codim() {
            return Err(Error::Irregular {
                rank: r,
                expected: self.codim(),
            });
        }
        Ok(j)
    }

    /// Minimum-norm Newton steps onto `N`.
    pub fn project(&self, p0: &Point) -> Result<Point> {
        self.chart.check_dim(p0.dim())?;
        let mut x = p0.coords().clone();
        let mut residual = f64::INFINITY;
        for _ in 0..=tolerances::PROJECTION_MAX_ITER {
            let phi = self.values(x.as_slice())?;
            residual = phi.amax();
            if residual <= tolerances::PROJECTION {
                return Point::new(x.as_slice().to_vec());
            }
            let j = self.jacobian(x.as_slice())?;
            let jjt = &j * j.transpose();
            let Some(w) = jjt.lu().solve(&phi) else {
                break;
            };
            x -= j.transpose() * w;
            if x.iter().any(|v| !v.is_finite()) {
                break;
            }
        }
        Err(Error::ProjectionFailure { residual })
    }

    /// Uniform draws in `[-radius, radius]^{2n+1}` projected onto `N`; failed projections are skipped.
    pub fn sample<R: Rng>(&self, rng: &mut R, count: usize, radius: f64) -> Vec<Point> {
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 20 * count.max(1) {
            attempts += 1;
            let draw: Vec<f64> = (0..self.chart.dim()).map(|_| rng.random_range(-radius..=radius)).collect();
            let Ok(p0) = Point::new(draw) else { continue };
            if let Ok(p) = self.project(&p0) {
                if self.regular_jacobian(p.as_slice()).is_ok() {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn tangent_basis(&self, p: &Point) -> Result<Vec<DVector<f64>>> {
        Ok(linalg::nullspace(&self.regular_jacobian(p.as_slice())?, tolerances::RANK))
    }

    fn check_on(&self, p: &Point) -> Result<()> {
        self.chart.check_dim(p.dim())?;
        let r = self.values(p.as_slice())?.amax();
        if r > tolerances::ON_LEVEL_SET {
            return Err(Error::ProjectionFailure { residual: r });
        }
        Ok(())
    }

    /// `Z_a = ♯_Λ(dφ_a)` at `p`.
    pub fn z_vectors(&self, p: &Point) -> Result<Vec<DVector<f64>>> {
        let jac = ContactJacobi::new(self.chart);
        let j = self.regular_jacobian(p.as_slice())?;
        (0..self.codim())
            .map(|a| Ok(jac.sharp_lambda_at(p, &j.row(a).transpose())?.into_components()))
            .collect()
    }

    /// `Z_a` as expression fields.
    pub fn z_fields(&self) -> Vec<VectorFieldExpr> {
        let jac = ContactJacobi::new(self.chart);
        let lam = jac.lambda_fields();
        let d = self.chart.dim();
        self.constraints
            .iter()
            .map(|phi| {
                VectorFieldExpr::new(
                    (0..d)
                        .map(|k| {
                            (0..d)
                                .filter(|&j| !lam[j][k].is_zero())
                                .map(|j| &lam[j][k] * &phi.partial(j))
                                .sum()
                        })
                        .collect(),
                )
            })
            .collect()
    }

    /// Samples are projected onto `N` first.
    pub fn is_coisotropic(&self, samples: &[Point]) -> Result<CoisotropyReport> {
        let n = self.chart.n();
        let mut max_residual = 0.0f64;
        let mut frame_residual = 0.0f64;
        let mut tangency_residual = 0.0f64;
        for p0 in samples {
            let p = self.project(p0)?;
            let j = self.regular_jacobian(p.as_slice())?;
            let z = self.z_vectors(&p)?;
            let frame = self.chart.frame(&p)?;
            let on = |v: &DVector<f64>, b: usize| j.row(b).transpose().dot(v);
            for (a, za) in z.iter().enumerate() {
                let dz = &j * za;
                tangency_residual = tangency_residual.max(dz.amax());
                for b in 0..self.codim() {
                    let zab = on(za, b);
                    max_residual = max_residual.max(zab.abs());
                    let formula: f64 = (0..n)
                        .map(|i| {
                            let (ai, bi) = (frame.a[i].components(), frame.b[i].components());
                            on(ai, a) * on(bi, b) - on(bi, a) * on(ai, b)
                        })
                        .sum();
                    frame_residual = frame_residual.max((zab + formula).abs());
                }
            }
        }
        Ok(CoisotropyReport {
            max_residual,
            frame_residual,
            tangency_residual,
            coisotropic: max_residual <= tolerances::ON_LEVEL_SET,
            samples: samples.len(),
        })
    }

    /// Basis of `{v ∈ T_pN : η(v) = 0, dη(v, T_pN) = 0}`.
    pub fn characteristic_distribution(&self, p: &Point) -> Result<Vec<DVector<f64>>> {
        self.check_on(p)?;
        let t = linalg::stack_columns(self.chart.dim(), &self.tangent_basis(p)?);
        let m = self.chart.deta_matrix();
        let eta = self.chart.eta_components(p.as_slice());
        let mut rows = DMatrix::zeros(t.ncols() + 1, t.ncols());
        rows.set_row(0, &(eta.transpose() * &t));
        rows.view_mut((1, 0), (t.ncols(), t.ncols()))
            .copy_from(&(t.transpose() * m.transpose() * &t));
        let coeffs = linalg::nullspace(&rows, tolerances::RANK);
        let vs: Vec<DVector<f64>> = coeffs.iter().map(|c| &t * c).collect();
        Ok(linalg::orthonormal_span(self.chart.dim(), &vs, tolerances::RANK))
    }

    /// Principal-angle distance between `span{Z_a}` and the characteristic distribution.
    pub fn characteristic_matches_z(&self, p: &Point) -> Result<f64> {
        let chr = self.characteristic_distribution(p)?;
        let z = linalg::orthonormal_span(self.chart.dim(), &self.z_vectors(p)?, tolerances::RANK);
        Ok(linalg::subspace_distance(&chr, &z))
    }

    /// Max distance of `[Z_a, Z_b](p)` from the characteristic distribution.
    pub fn involutivity_residual(&self, p: &Point) -> Result<f64> {
        let chr = self.characteristic_distribution(p)?;
        let z = self.z_fields();
        let mut worst = 0.0f64;
        for a in 0..z.len() {
            for b in a + 1..z.len() {
                let br = lie_bracket_at(&z[a], &z[b], p.as_slice())?;
                worst = worst.max(linalg::distance_to_span(&br, &chr));
            }
        }
        Ok(worst)
    }
}

/// A declared projection onto a quotient Darboux chart: the listed ambient
/// coordinates become, in order, `(x'^1..x'^m, y'_1..y'_m, z')`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientProjection {
    pub kept: Vec<usize>,
    pub quotient: DarbouxChart,
}

impl QuotientProjection {
    pub fn new(ambient: &DarbouxChart, kept: Vec<usize>) -> Result<Self> {
        if kept.len().is_multiple_of(2) || kept.len() < 3 {
            return Err(Error::Invalid(format!(
                "a quotient chart needs an odd number (at least 3) of kept coordinates, got {}",
                kept.len()
            )));
        }
        let mut seen = vec![false; ambient.dim()];
        for &k in &kept {
            if k >= ambient.dim() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Invalid(format!("bad or repeated coordinate index {k}")));
            }
        }
        let quotient = DarbouxChart::new((kept.len() - 1) / 2)?;
        Ok(QuotientProjection { kept, quotient })
    }

    /// Keeps `(x^a, y_a)` for every `a` not listed, plus `z`.
    pub fn dropping_pairs(ambient: &DarbouxChart, dropped: &[usize]) -> Result<Self> {
        let mut kept: Vec<usize> = (0..ambient.n()).filter(|i| !dropped.contains(i)).map(|i| ambient.x(i)).collect();
        kept.extend((0..ambient.n()).filter(|i| !dropped.contains(i)).map(|i| ambient.y(i)));
        kept.push(ambient.z());
        Self::new(ambient, kept)
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&k| p[k]).collect()
    }

    /// `Dπ v`.
    pub fn push(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.kept.len(), self.kept.iter().map(|&k| v[k]))
    }

    pub fn dropped(&self, ambient: &DarbouxChart) -> Vec<usize> {
        (0..ambient.dim()).filter(|k| !self.kept.contains(k)).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    /// Max `|η(v) − η̃(Dπ v)|` over tangent vectors of `N`.
    pub pullback_residual: f64,
    /// Min `|det ♭̃|` over samples.
    pub min_flat_det: f64,
    /// Max `|Dπ R − R̃|` over samples where `R` is tangent to `N`.
    pub reeb_residual: f64,
    pub vertical_samples: usize,
    /// Max `|Dπ v|` over characteristic vectors.
    pub leaf_residual: f64,
    /// Max disagreement of `η̃` built from two different sections.
    pub section_residual: f64,
    /// Max distance of `η̃` from `dz' − y'_i dx'^i`.
    pub darboux_residual: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Lifts quotient coordinates to `N`, holding the free dropped coordinates near `reference`.
fn section(n: &LevelSetSubmanifold, proj: &QuotientProjection, q: &[f64], reference: &[f64]) -> Result<Point> {
    let dim = n.chart.dim();
    let dropped = proj.dropped(&n.chart);
    let mut x = DVector::zeros(dim);
    for (i, &k) in proj.kept.iter().enumerate() {
        x[k] = q[i];
    }
    for &k in &dropped {
        x[k] = reference[k];
    }
    let mut residual = f64::INFINITY;
    for _ in 0..=tolerances::PROJECTION_MAX_ITER {
        let phi = n.values(x.as_slice())?;
        residual = phi.amax();
        if residual <= tolerances::PROJECTION {
            return Point::new(x.as_slice().to_vec());
        }
        let j = n.jacobian(x.as_slice())?;
        let jd = j.select_columns(&dropped);
        let Some(w) = (&jd * jd.transpose()).lu().solve(&phi) else {
            break;
        };
        let step = jd.transpose() * w;
        for (i, &k) in dropped.iter().enumerate() {
            x[k] -= step[i];
        }
    }
    Err(Error::ProjectionFailure { residual })
}

/// `Dσ` at a section point: kept directions plus the minimum-norm implicit correction.
fn section_derivative(n: &LevelSetSubmanifold, proj: &QuotientProjection, x: &Point) -> Result<DMatrix<f64>> {
    let dim = n.chart.dim();
    let dropped = proj.dropped(&n.chart);
    let j = n.jacobian(x.as_slice())?;
    let jd = j.select_columns(&dropped);
    let jk = j.select_columns(&proj.kept);
    let gram = &jd * jd.transpose();
    let correction = match gram.clone().lu().solve(&jk) {
        Some(w) => -(jd.transpose() * w),
        None => {
            return Err(Error::Irregular {
                rank: linalg::rank(&jd, tolerances::RANK),
                expected: n.codim(),
            })
        }
    };
    let mut ds = DMatrix::zeros(dim, proj.kept.len());
    for (c, &k) in proj.kept.iter().enumerate() {
        ds[(k, c)] = 1.0;
        for (i, &d) in dropped.iter().enumerate() {
            ds[(d, c)] = correction[(i, c)];
        }
    }
    Ok(ds)
}

/// `η̃ = σ*η` and `dη̃ = σ*dη` at quotient coordinates `q`.
fn reduced_form(
    n: &LevelSetSubmanifold,
    proj: &QuotientProjection,
    q: &[f64],
    reference: &[f64],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let x = section(n, proj, q, reference)?;
    let ds = section_derivative(n, proj, &x)?;
    let eta = n.chart.eta_components(x.as_slice());
    let m = n.chart.deta_matrix();
    Ok((ds.transpose() * eta, ds.transpose() * m * &ds))
}

/// Checks `π*η̃ = ι*η` through the declared projection at the given samples of `N`.
pub fn verify_coisotropic_reduction(
    n: &LevelSetSubmanifold,
    proj: &QuotientProjection,
    samples: &[Point],
) -> Result<ReductionReport> {
    let chart = n.chart;
    if proj.kept.iter().any(|&k| k >= chart.dim()) {
        return Err(Error::Invalid("projection index outside the chart".into()));
    }
    let qc = proj.quotient;
    let mut rep = ReductionReport {
        pullback_residual: 0.0,
        min_flat_det: f64::INFINITY,
        reeb_residual: 0.0,
        vertical_samples: 0,
        leaf_residual: 0.0,
        section_residual: 0.0,
        darboux_residual: 0.0,
        samples: samples.len(),
        passed: false,
    };
    let dropped = proj.dropped(&chart);
    for p0 in samples {
        let p = n.project(p0)?;
        let tangent = n.tangent_basis(&p)?;
        let eta = chart.eta_components(p.as_slice());
        if tangent.iter().all(|v| eta.dot(v).abs() <= tolerances::RANK) {
            return Err(Error::HorizontalPoint);
        }
        for v in n.characteristic_distribution(&p)? {
            rep.leaf_residual = rep.leaf_residual.max(proj.push(&v).norm());
        }
        if rep.leaf_residual > tolerances::SUBSPACE {
            return Err(Error::NotLeafConstant(rep.leaf_residual));
        }
        let q = proj.apply(p.as_slice());
        let (eta_q, deta_q) = reduced_form(n, proj, &q, p.as_slice())?;
        // A second section through shifted free coordinates.
        let mut shifted = p.as_slice().to_vec();
        for &k in &dropped {
            shifted[k] += 0.5;
        }
        let (eta_q2, _) = reduced_form(n, proj, &q, &shifted)?;
        rep.section_residual = rep.section_residual.max((&eta_q - &eta_q2).amax());
        if rep.section_residual > tolerances::COMPOSED {
            return Err(Error::NotLeafConstant(rep.section_residual));
        }
        for v in &tangent {
            let d = (eta.dot(v) - eta_q.dot(&proj.push(v))).abs();
            rep.pullback_residual = rep.pullback_residual.max(d);
        }
        let flat = crate::chart::flat_matrix_from(&eta_q, &deta_q);
        rep.min_flat_det = rep.min_flat_det.min(linalg::determinant(&flat).abs());
        let darboux = qc.eta_components(&q);
        rep.darboux_residual = rep.darboux_residual.max((&eta_q - darboux).amax());
        let r = chart.reeb(&p)?.into_components();
        let basis = linalg::orthonormal_span(chart.dim(), &tangent, tolerances::RANK);
        if linalg::distance_to_span(&r, &basis) <= tolerances::RANK {
            rep.vertical_samples += 1;
            let reduced_reeb = flat
                .lu()
                .solve(&eta_q)
                .ok_or(Error::Singular("reduced flat matrix"))?;
            rep.reeb_residual = rep.reeb_residual.max((proj.push(&r) - reduced_reeb).amax());
        }
    }
    rep.passed = rep.pullback_residual <= tolerances::SECOND_ORDER
        && rep.min_flat_det > tolerances::NONDEGENERATE_DET
        && rep.reeb_residual <= tolerances::SECOND_ORDER;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, k: usize) -> DVector<f64> {
        DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 })
    }

    #[test]
    fn complement_of_reeb_is_horizontal() {
        let c = DarbouxChart::new(1).unwrap();
        let p = c.point(vec![0.5, 2.0, -1.0]).unwrap();
        let comp = contact_complement(&c, &p, &[unit(3, 2)]).unwrap();
        assert_eq!(comp.len(), 2);
        let want = linalg::orthonormal_span(3, &[DVector::from_vec(vec![1.0, 0.0, 2.0]), unit(3, 1)], 1e-12);
        assert!(linalg::subspace_distance(&comp, &want) < 1e-12);
    }

    #[test]
    fn complement_of_whole_space_is_zero() {
        let c = DarbouxChart::new(1).unwrap();
        let p = c.origin();
        assert!(contact_complement(&c, &p, &[unit(3, 0), unit(3, 1), unit(3, 2)]).unwrap().is_empty());
    }

    #[test]
    fn dependent_basis_rejected() {
        let c = DarbouxChart::new(1).unwrap();
        let e = contact_complement(&c, &c.origin(), &[unit(3, 0), unit(3, 0) * 2.0]).unwrap_err();
        assert!(matches!(e, Error::DependentBasis { rank: 1, expected: 2 }));
    }

    #[test]
    fn classification_examples() {
        let c = DarbouxChart::new(1).unwrap();
        let o = c.origin();
        assert_eq!(classify_point(&c, &o, &[unit(3, 1)]).unwrap(), PointClass::Horizontal);
        assert_eq!(classify_point(&c, &o, &[unit(3, 2)]).unwrap(), PointClass::Vertical);
        let diag = DVector::from_vec(vec![1.0, 0.0, 1.0]);
        assert_eq!(classify_point(&c, &o, &[diag]).unwrap(), PointClass::Oblique);
    }

    #[test]
    fn legendrian_lines() {
        let c = DarbouxChart::new(1).unwrap();
        let p = Params::new();
        let samples: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 - 2.0]).collect();
        let l = ParamSubmanifold::parse(c, 1, &["s1", "0.7", "0.7*s1"], &p).unwrap();
        assert!(l.is_legendrian(&samples).unwrap().legendrian);
        let l = ParamSubmanifold::parse(c, 1, &["0", "s1", "0"], &p).unwrap();
        assert!(l.is_legendrian(&samples).unwrap().legendrian);
        let l = ParamSubmanifold::parse(c, 1, &["s1", "1", "0"], &p).unwrap();
        let r = l.is_isotropic(&samples).unwrap();
        assert!(!r.isotropic);
        assert!((r.max_eta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coisotropy_examples() {
        let c = DarbouxChart::new(2).unwrap();
        let p = Params::new();
        let samples = vec![c.point(vec![0.3, -0.2, 0.1, 0.4, 1.0]).unwrap()];
        let n = LevelSetSubmanifold::parse(c, &["y1", "y2"], &p).unwrap();
        let r = n.is_coisotropic(&samples).unwrap();
        assert!(r.coisotropic && r.frame_residual < 1e-12);
        let n = LevelSetSubmanifold::parse(c, &["x1", "y1"], &p).unwrap();
        let r = n.is_coisotropic(&samples).unwrap();
        assert!(!r.coisotropic);
        assert!((r.max_residual - 1.0).abs() < 1e-12 && r.frame_residual < 1e-12);
    }

    #[test]
    fn characteristic_of_y_zero() {
        let c = DarbouxChart::new(2).unwrap();
        let n = LevelSetSubmanifold::parse(c, &["y1", "y2"], &Params::new()).unwrap();
        let p = c.point(vec![1.0, 2.0, 0.0, 0.0, 3.0]).unwrap();
        let chr = n.characteristic_distribution(&p).unwrap();
        let want = vec![unit(5, 0), unit(5, 1)];
        assert!(linalg::subspace_distance(&chr, &want) < 1e-12);
        assert!(n.characteristic_matches_z(&p).unwrap() < 1e-12);
        assert!(n.involutivity_residual(&p).unwrap() < 1e-12);
    }

    #[test]
    fn reduction_of_y1_zero() {
        let c = DarbouxChart::new(2).unwrap();
        let n = LevelSetSubmanifold::parse(c, &["y1"], &Params::new()).unwrap();
        let proj = QuotientProjection::dropping_pairs(&c, &[0]).unwrap();
        assert_eq!(proj.kept, vec![1, 3, 4]);
        let samples = vec![c.point(vec![0.3, -0.2, 0.0, 0.4, 1.0]).unwrap()];
        let r = verify_coisotropic_reduction(&n, &proj, &samples).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.darboux_residual < 1e-12);
        // Keeping x1 instead of x2 is not constant along the ∂x1 leaves.
        let bad = QuotientProjection::new(&c, vec![0, 2, 4]).unwrap();
        assert!(matches!(
            verify_coisotropic_reduction(&n, &bad, &samples).unwrap_err(),
            Error::NotLeafConstant(_)
        ));
    }
}
