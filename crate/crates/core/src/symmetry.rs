//! Actions by contactomorphisms, moment maps and reduction at zero momentum
//! for abelian actions by coordinate translations.

use nalgebra::{DVector, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{gradient_at, lie_bracket_at, lie_derivative_at, OneFormExpr, ScalarField, VectorFieldExpr};
use crate::chart::{DarbouxChart, Point};
use crate::dynamics::{self, hamiltonian_vector_field, ContactSystem, IntegratorSpec, Trajectory};
use crate::error::{Error, Result};
use crate::linalg;
use crate::submanifolds::{
    contact_complement, verify_coisotropic_reduction, LevelSetSubmanifold, QuotientProjection, ReductionReport,
};
use crate::tolerances;

/// Infinitesimal generators `(ξ_a)_M` of a group action.
#[derive(Debug, Clone)]
pub struct GroupAction {
    chart: DarbouxChart,
    generators: Vec<VectorFieldExpr>,
    abelian: bool,
    /// `Some(a)` when generator `a` is declared to be `∂/∂x^a`.
    translated: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentValue(pub Vec<f64>);

impl GroupAction {
    pub fn new(chart: DarbouxChart, generators: Vec<VectorFieldExpr>, abelian: bool) -> Result<Self> {
        for g in &generators {
            chart.check_dim(g.dim())?;
        }
        Ok(GroupAction {
            chart,
            generators,
            abelian,
            translated: None,
        })
    }

    /// The abelian action translating `x^a` for each listed zero-based `a`.
    pub fn translations(chart: DarbouxChart, axes: &[usize]) -> Result<Self> {
        if let Some(&a) = axes.iter().find(|&&a| a >= chart.n()) {
            return Err(Error::NonAdapted(format!("no coordinate x{}", a + 1)));
        }
        let gens = axes
            .iter()
            .map(|&a| VectorFieldExpr::coordinate(chart.dim(), chart.x(a)))
            .collect();
        let mut act = Self::new(chart, gens, true)?;
        act.translated = Some(axes.to_vec());
        Ok(act)
    }

    /// Declares generator `a` to translate `x^{axes[a]}`; checked by [`reduce`].
    pub fn with_adapted(mut self, axes: Vec<usize>) -> Self {
        self.translated = Some(axes);
        self
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    pub fn generators(&self) -> &[VectorFieldExpr] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Max `|ℒ_{ξ_a} η|` per generator over the samples.
    pub fn contact_residuals(&self, samples: &[Point]) -> Result<Vec<f64>> {
        let eta = OneFormExpr::eta(&self.chart);
        self.generators
            .iter()
            .map(|g| {
                samples.iter().try_fold(0.0f64, |m, p| {
                    Ok(m.max(lie_derivative_at(g, &eta, p.as_slice())?.norm()))
                })
            })
            .collect()
    }

    /// Errors unless every generator preserves `η` on the samples.
    pub fn check_contact(&self, samples: &[Point]) -> Result<()> {
        for (index, residual) in self.contact_residuals(samples)?.into_iter().enumerate() {
            if residual > tolerances::INVARIANCE {
                return Err(Error::NotContactomorphism { index, residual });
            }
        }
        Ok(())
    }

    pub fn commutator_residual(&self, samples: &[Point]) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in samples {
            for a in 0..self.len() {
                for b in a + 1..self.len() {
                    let br = lie_bracket_at(&self.generators[a], &self.generators[b], p.as_slice())?;
                    worst = worst.max(br.norm());
                }
            }
        }
        Ok(worst)
    }

    pub fn check_abelian(&self, samples: &[Point]) -> Result<()> {
        if !self.abelian || self.commutator_residual(samples)? > tolerances::INVARIANCE {
            return Err(Error::NonAbelian);
        }
        Ok(())
    }

    /// `Ĵ_a = −η(ξ_a)` as fields.
    pub fn moment_fields(&self) -> Vec<ScalarField> {
        let eta = OneFormExpr::eta(&self.chart);
        self.generators.iter().map(|g| -eta.contract(g)).collect()
    }

    pub fn moment_map(&self, p: &Point) -> Result<MomentValue> {
        self.chart.check_dim(p.dim())?;
        let eta = self.chart.eta_components(p.as_slice());
        let vals = self
            .generators
            .iter()
            .map(|g| Ok(-eta.dot(&g.eval(p.as_slice())?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MomentValue(vals))
    }

    /// `|dĴ_a − ι_{ξ_a} dη|` at `p`.
    pub fn moment_condition_residual(&self, a: usize, p: &Point) -> Result<f64> {
        let g = self.generator(a)?;
        let dj = gradient_at(&self.moment_fields()[a], p.as_slice())?;
        let xi = g.eval(p.as_slice())?;
        let contraction = self.chart.deta_matrix().transpose() * xi;
        Ok((dj - contraction).norm())
    }

    /// `|X_{Ĵ_a} − ξ_a|` at `p`.
    pub fn generator_hamiltonian_defect(&self, a: usize, p: &Point) -> Result<f64> {
        let g = self.generator(a)?;
        let xj = hamiltonian_vector_field(&self.chart, &self.moment_fields()[a]);
        Ok((xj.eval(p.as_slice())? - g.eval(p.as_slice())?).norm())
    }

    fn generator(&self, a: usize) -> Result<&VectorFieldExpr> {
        self.generators
            .get(a)
            .ok_or(Error::Invalid(format!("no generator {a} (action has {})", self.len())))
    }

    /// `J^{−1}(μ)` as constraints `Ĵ_a − μ_a`.
    pub fn level_set(&self, mu: &[f64]) -> Result<LevelSetSubmanifold> {
        if mu.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: mu.len(),
            });
        }
        let c = self
            .moment_fields()
            .into_iter()
            .zip(mu)
            .map(|(j, &m)| j - m)
            .collect();
        LevelSetSubmanifold::new(self.chart, c)
    }

    /// Projects random draws onto `J^{−1}(μ)` and checks the rank of `dJ` there.
    pub fn level_set_regularity(&self, mu: &[f64], seed: u64, count: usize) -> Result<RegularityReport> {
        let n = self.level_set(mu)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = n.sample(&mut rng, count, 2.0);
        let mut min_rank = self.len();
        for p in &samples {
            min_rank = min_rank.min(linalg::rank(&n.jacobian(p.as_slice())?, tolerances::RANK));
        }
        if samples.is_empty() {
            // Nothing projected: report the rank at the origin instead.
            min_rank = linalg::rank(&n.jacobian(self.chart.origin().as_slice())?, tolerances::RANK);
        }
        Ok(RegularityReport {
            regular: !samples.is_empty() && min_rank == self.len(),
            projected: samples.len(),
            attempted: count,
            min_rank,
        })
    }

    /// Compares `ker dJ` with the `dη`-orthogonal of the orbit and `⊥Λ T J^{−1}(μ)` with the orbit tangent.
    pub fn verify_orbit_orthogonality(&self, mu: &[f64], p: &Point) -> Result<OrthogonalityReport> {
        let n = self.level_set(mu)?;
        let off = n.values(p.as_slice())?.amax();
        if off > tolerances::ON_LEVEL_SET {
            return Err(Error::ProjectionFailure { residual: off });
        }
        let dim = self.chart.dim();
        let ker_dj = n.tangent_basis(p)?;
        let orbit: Vec<DVector<f64>> = self
            .generators
            .iter()
            .map(|g| g.eval(p.as_slice()))
            .collect::<Result<_>>()?;
        let m = self.chart.deta_matrix();
        let rows: Vec<DVector<f64>> = orbit.iter().map(|xi| m.transpose() * xi).collect();
        let orth = linalg::nullspace(&linalg::stack_rows(dim, &rows), tolerances::RANK);
        let kernel_residual = linalg::subspace_distance(
            &linalg::orthonormal_span(dim, &ker_dj, tolerances::RANK),
            &orth,
        );
        let complement = contact_complement(&self.chart, p, &ker_dj)?;
        let orbit_span = linalg::orthonormal_span(dim, &orbit, tolerances::RANK);
        let orbit_deviation = linalg::subspace_distance(&complement, &orbit_span);
        let at_zero = mu.iter().all(|&m| m == 0.0);
        Ok(OrthogonalityReport {
            kernel_residual,
            orbit_deviation,
            complement: complement.iter().map(|v| v.as_slice().to_vec()).collect(),
            mu_is_zero: at_zero,
            passed: kernel_residual <= tolerances::SECOND_ORDER
                && (!at_zero || orbit_deviation <= tolerances::SECOND_ORDER),
        })
    }

    /// Max `|J(φ_a^t x) − J(x)|` along the flow of each generator for `t ∈ [0, t1]`.
    pub fn equivariance_drift(&self, x0: &Point, t1: f64) -> Result<f64> {
        let j0 = self.moment_map(x0)?.0;
        let spec = IntegratorSpec::rk4(0.0, t1, tolerances::DEFAULT_STEP)?;
        let mut worst = 0.0f64;
        for g in &self.generators {
            let f = |y: &DVector<f64>| g.eval(y.as_slice());
            let sol = dynamics::integrate::solve(&f, x0.coords(), &spec)?;
            for y in &sol.states {
                let j = self.moment_map(&Point::new(y.as_slice().to_vec())?)?.0;
                for (a, b) in j.iter().zip(&j0) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub projected: usize,
    pub attempted: usize,
    pub min_rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityReport {
    /// Distance between `ker dJ(p)` and `{v : dη(ξ_a, v) = 0}`.
    pub kernel_residual: f64,
    /// Distance between `⊥Λ T_p J^{−1}(μ)` and the orbit tangent.
    pub orbit_deviation: f64,
    /// Basis of the computed `⊥Λ T_p J^{−1}(μ)`.
    pub complement: Vec<Vec<f64>>,
    pub mu_is_zero: bool,
    /// Kernel check, plus the orbit check when `μ = 0`.
    pub passed: bool,
}

/// A reduced system together with the maps relating it to the original.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub system: ContactSystem,
    pub projection: QuotientProjection,
    pub level_set: LevelSetSubmanifold,
    /// Zero-based indices `a` of the translated `x^a`.
    pub axes: Vec<usize>,
    pub invariance_residual: f64,
    pub report: Option<ReductionReport>,
}

impl Reduction {
    pub fn project(&self, p: &[f64]) -> Result<Point> {
        Point::new(self.projection.apply(p))
    }

    /// Embeds reduced coordinates with the dropped `x^a` taken from `x_frozen` and `y_a = 0`.
    pub fn embed(&self, q: &[f64], x_frozen: &[f64]) -> Vec<f64> {
        let mut out = x_frozen.to_vec();
        for (i, &k) in self.projection.kept.iter().enumerate() {
            out[k] = q[i];
        }
        let chart = self.system_chart_ambient();
        for &a in &self.axes {
            out[chart.y(a)] = 0.0;
        }
        out
    }

    fn system_chart_ambient(&self) -> DarbouxChart {
        *self.level_set.chart()
    }
}

fn is_translation(g: &VectorFieldExpr, k: usize) -> bool {
    g.components()
        .iter()
        .enumerate()
        .all(|(i, c)| c.as_constant() == Some(if i == k { 1.0 } else { 0.0 }))
}

/// Reduction at `μ = 0` by an abelian action of coordinate translations.
///
/// Invariance of `H` is checked on `samples` points of `J^{−1}(0)` drawn from `seed`.
pub fn reduce(system: &ContactSystem, action: &GroupAction, mu: &[f64], seed: u64, samples: usize) -> Result<Reduction> {
    let chart = *system.chart();
    if action.chart() != &chart {
        return Err(Error::InvalidChart("action and system live on different charts".into()));
    }
    if mu.len() != action.len() {
        return Err(Error::DimensionMismatch {
            expected: action.len(),
            got: mu.len(),
        });
    }
    if mu.iter().any(|&m| m != 0.0) {
        return Err(Error::NonzeroMomentum(mu.to_vec()));
    }
    let level_set = action.level_set(mu)?;
    if action.is_empty() {
        return Ok(Reduction {
            system: system.clone(),
            projection: QuotientProjection::dropping_pairs(&chart, &[])?,
            level_set,
            axes: Vec::new(),
            invariance_residual: 0.0,
            report: None,
        });
    }
    if !action.abelian {
        return Err(Error::NonAbelian);
    }
    let axes = action
        .translated
        .clone()
        .ok_or(Error::NonAdapted("no translated coordinates declared".into()))?;
    if axes.len() != action.len() {
        return Err(Error::NonAdapted("one translated coordinate per generator is required".into()));
    }
    for (g, &a) in action.generators.iter().zip(&axes) {
        if a >= chart.n() || !is_translation(g, chart.x(a)) {
            return Err(Error::NonAdapted(format!("generator is not the translation d/dx{}", a + 1)));
        }
    }
    if axes.len() >= chart.n() {
        return Err(Error::NonAdapted("reduction would leave no (x, y) pair".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = level_set.sample(&mut rng, samples, 2.0);
    if points.len() < samples {
        return Err(Error::ProjectionFailure { residual: f64::NAN });
    }
    let h = system.hamiltonian();
    let mut invariance_residual = 0.0f64;
    for p in &points {
        for g in &action.generators {
            let v = g.eval(p.as_slice())?;
            invariance_residual = invariance_residual.max(gradient_at(h, p.as_slice())?.dot(&v).abs());
        }
    }
    if invariance_residual > tolerances::INVARIANCE {
        return Err(Error::NonInvariant(invariance_residual));
    }
    let projection = QuotientProjection::dropping_pairs(&chart, &axes)?;
    let mut new_index = vec![None; chart.dim()];
    for (i, &k) in projection.kept.iter().enumerate() {
        new_index[k] = Some(i);
    }
    let reduced_h = h.substitute(&|k| match new_index[k] {
        Some(i) => ScalarField::var(i),
        // Dropped: y_a = 0 on the level set; x^a is absent up to invariance.
        None => ScalarField::zero(),
    })?;
    let reduced = ContactSystem::new(projection.quotient, reduced_h)?;
    let report = verify_coisotropic_reduction(&level_set, &projection, &points)?;
    Ok(Reduction {
        system: reduced,
        projection,
        level_set,
        axes,
        invariance_residual,
        report: Some(report),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectedDynamicsReport {
    /// Max `|π(x(t)) − x̃(t)|` over common output times.
    pub max_mismatch: f64,
    /// Max `|J(x(t))|`.
    pub max_level_drift: f64,
    /// Max `|J(x(t)) − J(x0)|`.
    pub moment_variation: f64,
    pub on_level_set: bool,
    pub compared_times: usize,
    /// Per compared time: `(t, |π(x(t)) − x̃(t)|)`.
    pub mismatch: Vec<(f64, f64)>,
}

/// Integrates the full and the reduced system and compares them through the projection.
pub fn verify_projected_dynamics(
    system: &ContactSystem,
    action: &GroupAction,
    reduction: &Reduction,
    x0: &Point,
    spec: &IntegratorSpec,
) -> Result<ProjectedDynamicsReport> {
    let x0_reduced = reduction.project(x0.as_slice())?;
    let (full, reduced) = rayon::join(
        || system.integrate(x0, spec),
        || reduction.system.integrate(&x0_reduced, spec),
    );
    let (full, reduced) = (full?, reduced?);
    let j0 = action.moment_map(x0)?.0;
    let mut rep = ProjectedDynamicsReport {
        max_mismatch: 0.0,
        max_level_drift: 0.0,
        moment_variation: 0.0,
        on_level_set: j0.iter().all(|j| j.abs() <= tolerances::ON_LEVEL_SET),
        compared_times: 0,
        mismatch: Vec::new(),
    };
    for p in &full.points {
        for (j, j_start) in action.moment_map(p)?.0.iter().zip(&j0) {
            rep.max_level_drift = rep.max_level_drift.max(j.abs());
            rep.moment_variation = rep.moment_variation.max((j - j_start).abs());
        }
    }
    let mut r = 0;
    for (i, &t) in full.times.iter().enumerate() {
        while r < reduced.times.len() && reduced.times[r] < t {
            r += 1;
        }
        if r < reduced.times.len() && reduced.times[r] == t {
            let projected = DVector::from_vec(reduction.projection.apply(full.points[i].as_slice()));
            let d = (projected - reduced.points[r].coords()).amax();
            rep.max_mismatch = rep.max_mismatch.max(d);
            rep.mismatch.push((t, d));
        }
    }
    rep.compared_times = rep.mismatch.len();
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    Trapezoid,
    Simpson,
}

/// `∫_{t_0}^{t_i} f` at every node.
pub fn cumulative_integral(t: &[f64], f: &[f64], rule: Quadrature) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    for i in 0..t.len().saturating_sub(1) {
        let piece = match rule {
            Quadrature::Simpson if t.len() >= 3 => {
                let base = if i + 2 < t.len() && i % 2 == 0 { i } else { i.min(t.len() - 2) - 1 };
                let base = base.min(t.len() - 3);
                quadratic_piece(&t[base..base + 3], &f[base..base + 3], t[i], t[i + 1])
            }
            _ => 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]),
        };
        out[i + 1] = out[i] + piece;
    }
    out
}

/// Integral over `[a, b]` of the quadratic through three nodes.
fn quadratic_piece(t: &[f64], f: &[f64], a: f64, b: f64) -> f64 {
    let s = |x: f64| x - a;
    let m = Matrix3::new(
        1.0,
        s(t[0]),
        s(t[0]).powi(2),
        1.0,
        s(t[1]),
        s(t[1]).powi(2),
        1.0,
        s(t[2]),
        s(t[2]).powi(2),
    );
    let c = m
        .lu()
        .solve(&Vector3::new(f[0], f[1], f[2]))
        .unwrap_or_else(Vector3::zeros);
    let h = b - a;
    c[0] * h + c[1] * h * h / 2.0 + c[2] * h * h * h / 3.0
}

/// Lifts a reduced trajectory to `J^{−1}(0)` by quadrature of the group velocity.
pub fn reconstruct(
    system: &ContactSystem,
    reduction: &Reduction,
    reduced: &Trajectory,
    x0: &Point,
    rule: Quadrature,
) -> Result<Trajectory> {
    let chart = *system.chart();
    chart.check_dim(x0.dim())?;
    let start = reduced.points.first().ok_or(Error::Invalid("empty reduced trajectory".into()))?;
    let projected = DVector::from_vec(reduction.projection.apply(x0.as_slice()));
    let mismatch = (projected - start.coords()).amax();
    let off_level = reduction.level_set.values(x0.as_slice())?.amax();
    if mismatch > tolerances::ON_LEVEL_SET || off_level > tolerances::ON_LEVEL_SET {
        return Err(Error::StartMismatch(mismatch.max(off_level)));
    }
    let field = system.hamiltonian_field();
    let d: Vec<Vec<f64>> = reduced
        .points
        .iter()
        .map(|q| reduction.embed(q.as_slice(), x0.as_slice()))
        .collect();
    let mut xi = vec![Vec::with_capacity(d.len()); reduction.axes.len()];
    for di in &d {
        let v = field.eval(di)?;
        for (a, &axis) in reduction.axes.iter().enumerate() {
            // d(t) holds x^a fixed, so d'(t) has no x^a component.
            xi[a].push(v[chart.x(axis)]);
        }
    }
    let mut coords = d;
    for (a, &axis) in reduction.axes.iter().enumerate() {
        let acc = cumulative_integral(&reduced.times, &xi[a], rule);
        for (c, s) in coords.iter_mut().zip(acc) {
            c[chart.x(axis)] = x0.as_slice()[chart.x(axis)] + s;
        }
    }
    let mut points = Vec::with_capacity(coords.len());
    let mut monitors = Vec::with_capacity(coords.len());
    for c in coords {
        monitors.push(system.monitor(&c)?);
        points.push(Point::new(c)?);
    }
    Ok(Trajectory {
        times: reduced.times.clone(),
        points,
        monitors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{parse_field, Params};

    fn chart2() -> DarbouxChart {
        DarbouxChart::new(2).unwrap()
    }

    #[test]
    fn moment_map_examples() {
        let c = chart2();
        let act = GroupAction::translations(c, &[0]).unwrap();
        let p = c.point(vec![1.0, 2.0, 0.7, -0.3, 5.0]).unwrap();
        assert_eq!(act.moment_map(&p).unwrap().0, vec![0.7]);
        assert!(act.moment_condition_residual(0, &p).unwrap() < 1e-14);
        assert!(act.generator_hamiltonian_defect(0, &p).unwrap() < 1e-14);

        let c1 = DarbouxChart::new(1).unwrap();
        let rot = VectorFieldExpr::parse(&["-y1", "x1", "0"], &c1, &Params::new()).unwrap();
        let act = GroupAction::new(c1, vec![rot], true).unwrap();
        let q = c1.point(vec![0.4, 1.5, 0.0]).unwrap();
        assert!((act.moment_map(&q).unwrap().0[0] + 1.5 * 1.5).abs() < 1e-14);
        assert!(matches!(act.check_contact(&[q]).unwrap_err(), Error::NotContactomorphism { .. }));
    }

    #[test]
    fn reeb_generator_is_irregular() {
        let c = chart2();
        let act = GroupAction::new(c, vec![VectorFieldExpr::coordinate(5, 4)], true).unwrap();
        let p = c.point(vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert_eq!(act.moment_map(&p).unwrap().0, vec![-1.0]);
        assert!(act.generator_hamiltonian_defect(0, &p).unwrap() < 1e-15);
        assert!(!act.level_set_regularity(&[0.0], 1, 10).unwrap().regular);
    }

    #[test]
    fn orthogonality_at_zero_and_nonzero_momentum() {
        let c = chart2();
        let act = GroupAction::translations(c, &[0]).unwrap();
        let p = c.point(vec![1.0, 0.0, 0.0, 2.0, 3.0]).unwrap();
        let r = act.verify_orbit_orthogonality(&[0.0], &p).unwrap();
        assert!(r.passed && r.orbit_deviation < 1e-12);
        let q = c.point(vec![1.0, 0.0, 0.5, 2.0, 3.0]).unwrap();
        let r = act.verify_orbit_orthogonality(&[0.5], &q).unwrap();
        assert!(r.kernel_residual < 1e-12);
        assert!(r.orbit_deviation > 0.1);
    }

    #[test]
    fn reduce_rejects_bad_inputs() {
        let c = chart2();
        let act = GroupAction::translations(c, &[0]).unwrap();
        let h = parse_field("x1 + z", &c, &Params::new()).unwrap();
        let s = ContactSystem::new(c, h).unwrap();
        assert!(matches!(reduce(&s, &act, &[0.0], 0, 20).unwrap_err(), Error::NonInvariant(v) if (v - 1.0).abs() < 1e-12));
        assert!(matches!(reduce(&s, &act, &[0.5], 0, 20).unwrap_err(), Error::NonzeroMomentum(_)));
        let none = GroupAction::new(c, vec![], true).unwrap();
        let r = reduce(&s, &none, &[], 0, 20).unwrap();
        assert_eq!(r.system.chart().n(), 2);
    }

    #[test]
    fn cumulative_rules_on_quadratic() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let f: Vec<f64> = t.iter().map(|x| x * x).collect();
        let s = cumulative_integral(&t, &f, Quadrature::Simpson);
        for (x, v) in t.iter().zip(&s) {
            assert!((v - x * x * x / 3.0).abs() < 1e-14);
        }
        let tr = cumulative_integral(&t, &f, Quadrature::Trapezoid);
        assert!((tr[10] - 1.0 / 3.0).abs() < 2e-3);
    }

    #[test]
    fn worked_example_reduces_and_reconstructs() {
        let c = chart2();
        let mut params = Params::new();
        params.insert("gamma".into(), 0.1);
        let h = parse_field("(y1^2 + y2^2)/2 + y1 + cos(x2) + $gamma*z", &c, &params).unwrap();
        let s = ContactSystem::new(c, h).unwrap();
        let act = GroupAction::translations(c, &[0]).unwrap();
        let red = reduce(&s, &act, &[0.0], 7, 100).unwrap();
        let rep = red.report.as_ref().unwrap();
        assert!(rep.passed && rep.pullback_residual <= 1e-9, "{rep:?}");
        let expect = parse_field("y1^2/2 + cos(x1) + 0.1*z", &red.system.chart().clone(), &Params::new()).unwrap();
        let q = [0.3, -0.7, 1.1];
        assert!((red.system.hamiltonian().value(&q).unwrap() - expect.value(&q).unwrap()).abs() < 1e-14);

        let x0 = c.point(vec![0.2, 0.5, 0.0, 0.3, 0.1]).unwrap();
        let spec = IntegratorSpec::rk4(0.0, 5.0, 1e-3).unwrap();
        let pd = verify_projected_dynamics(&s, &act, &red, &x0, &spec).unwrap();
        assert!(pd.on_level_set && pd.max_mismatch <= 1e-6 && pd.max_level_drift <= 1e-8, "{pd:?}");

        let reduced = red.system.integrate(&red.project(x0.as_slice()).unwrap(), &spec).unwrap();
        let direct = s.integrate(&x0, &spec).unwrap();
        let rec = reconstruct(&s, &red, &reduced, &x0, Quadrature::Simpson).unwrap();
        let worst = rec
            .points
            .iter()
            .zip(&direct.points)
            .map(|(a, b)| (a.coords() - b.coords()).amax())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{worst}");
    }
}
