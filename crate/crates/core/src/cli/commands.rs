use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::calculus::{lie_bracket_at, to_source, ScalarField, VectorFieldExpr};
use crate::chart::{DarbouxChart, Point};
use crate::dynamics::{hamiltonian_vector_field, is_hamiltonian, Trajectory};
use crate::error::Result;
use crate::jacobi::{
    bracket_field, jacobi_bracket, jacobi_identity_residual, leibniz_defect, ContactJacobi, CosymplecticJacobi,
    JacobiStructure,
};
use crate::lifts::{legendrian_image_residual, ExtendedChart, ExtendedPoint};
use crate::submanifolds::ParamSubmanifold;
use crate::symmetry::{reconstruct, reduce, verify_projected_dynamics};
use crate::tolerances;

use super::config::{Scenario, StructureName, SubmanifoldSpec};
use super::CliError;

/// Files to write, in order, and the overall verdict.
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub passed: bool,
    pub summary: String,
}

fn envelope(scenario: &Scenario, command: &str, passed: bool, result: Value) -> Vec<u8> {
    let v = json!({
        "tool": "contact",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config_sha256": scenario.sha256,
        "seed": scenario.seed,
        "passed": passed,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn e(v: f64) -> String {
    format!("{v:.16e}")
}

fn uniform_points(chart: &DarbouxChart, seed: u64, count: usize, radius: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..chart.dim()).map(|_| rng.random_range(-radius..radius)).collect();
            Point::new(c).expect("finite draws")
        })
        .collect()
}

fn coordinate_header(chart: &DarbouxChart) -> String {
    (0..chart.dim())
        .map(|k| chart.coordinate_name(k))
        .collect::<Vec<_>>()
        .join(",")
}

fn trajectory_csv(chart: &DarbouxChart, traj: &Trajectory) -> String {
    let mut s = format!("t,{},H,RH,energy_defect,div_defect\n", coordinate_header(chart));
    for ((t, p), m) in traj.times.iter().zip(&traj.points).zip(&traj.monitors) {
        s.push_str(&e(*t));
        for c in p.as_slice() {
            s.push(',');
            s.push_str(&e(*c));
        }
        let _ = writeln!(s, ",{},{},{},{}", e(m.h), e(m.rh), e(m.energy_defect), e(m.div_defect));
    }
    s
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

pub fn integrate(s: &Scenario) -> Result<Outputs, CliError> {
    let system = s.require_system()?;
    let initial = s.require_initial()?;
    let trajs = system
        .integrate_many(initial, &s.integrator)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for (i, traj) in trajs.iter().enumerate() {
        let name = if trajs.len() == 1 {
            "trajectory.csv".to_string()
        } else {
            format!("trajectory_{i}.csv")
        };
        files.push((name.clone(), trajectory_csv(&s.chart, traj).into_bytes()));
        let first = &traj.monitors[0];
        let last = traj.monitors.last().expect("trajectories hold the initial state");
        summaries.push(json!({
            "file": name,
            "steps": traj.len() - 1,
            "t_end": traj.times.last(),
            "end_state": traj.last().map(|p| p.as_slice().to_vec()),
            "h_start": first.h,
            "h_end": last.h,
            "max_energy_defect": max_of(traj.monitors.iter().map(|m| m.energy_defect)),
            "max_div_defect": max_of(traj.monitors.iter().map(|m| m.div_defect)),
        }));
    }
    files.push((
        "integrate.json".into(),
        envelope(s, "integrate", true, json!({ "trajectories": summaries })),
    ));
    Ok(Outputs {
        files,
        passed: true,
        summary: format!("integrated {} trajectories", trajs.len()),
    })
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
struct BracketResiduals {
    antisymmetry: f64,
    jacobi_identity: f64,
    leibniz: f64,
    canonical_pair: f64,
    unit_bracket: f64,
    hamiltonian_morphism: f64,
}

impl BracketResiduals {
    fn max(self, o: Self) -> Self {
        BracketResiduals {
            antisymmetry: self.antisymmetry.max(o.antisymmetry),
            jacobi_identity: self.jacobi_identity.max(o.jacobi_identity),
            leibniz: self.leibniz.max(o.leibniz),
            canonical_pair: self.canonical_pair.max(o.canonical_pair),
            unit_bracket: self.unit_bracket.max(o.unit_bracket),
            hamiltonian_morphism: self.hamiltonian_morphism.max(o.hamiltonian_morphism),
        }
    }

    fn worst(&self) -> f64 {
        [
            self.antisymmetry,
            self.jacobi_identity,
            self.leibniz,
            self.canonical_pair,
            self.unit_bracket,
            self.hamiltonian_morphism,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn default_functions(chart: &DarbouxChart) -> Vec<ScalarField> {
    let x = ScalarField::var(chart.x(0));
    let y = ScalarField::var(chart.y(0));
    let z = ScalarField::var(chart.z());
    vec![&x * &y + z.clone(), (&y * &z).sin(), &x * &x - &z * &y + 1.0]
}

fn bracket_point(
    structure: &dyn JacobiStructure,
    chart: &DarbouxChart,
    contact: bool,
    fs: &[ScalarField],
    ham: &[(VectorFieldExpr, Vec<VectorFieldExpr>)],
    p: &[f64],
) -> Result<BracketResiduals> {
    let mut r = BracketResiduals::default();
    let e = structure.e_at(p)?;
    for i in 0..fs.len() {
        for j in 0..fs.len() {
            if i == j {
                continue;
            }
            let a = jacobi_bracket(structure, &fs[i], &fs[j], p)?;
            let b = jacobi_bracket(structure, &fs[j], &fs[i], p)?;
            r.antisymmetry = r.antisymmetry.max((a + b).abs());
            for (k, h) in fs.iter().enumerate() {
                if k == i || k == j {
                    continue;
                }
                if i < j && j < k {
                    r.jacobi_identity = r.jacobi_identity.max(jacobi_identity_residual(structure, &fs[i], &fs[j], h, p)?);
                }
                let expected = -fs[i].value(p)? * fs[j].value(p)? * e.dot(&crate::calculus::gradient_at(h, p)?);
                r.leibniz = r.leibniz.max((leibniz_defect(structure, &fs[i], &fs[j], h, p)? - expected).abs());
            }
        }
    }
    if contact {
        let x = ScalarField::var(chart.x(0));
        let y = ScalarField::var(chart.y(0));
        let z = ScalarField::var(chart.z());
        r.canonical_pair = (jacobi_bracket(structure, &x, &y, p)? + 1.0).abs();
        r.unit_bracket = (jacobi_bracket(structure, &ScalarField::one(), &z, p)? + 1.0).abs();
        for (i, (xf, rest)) in ham.iter().enumerate() {
            for (j, xfg) in rest.iter().enumerate() {
                let xg = &ham[i + 1 + j].0;
                let d = (lie_bracket_at(xf, xg, p)? - xfg.eval(p)?).amax();
                r.hamiltonian_morphism = r.hamiltonian_morphism.max(d);
            }
        }
    }
    Ok(r)
}

fn check_brackets(s: &Scenario) -> Result<(bool, Value), CliError> {
    let chart = s.chart;
    let fs = if s.functions.is_empty() {
        default_functions(&chart)
    } else {
        s.functions.clone()
    };
    if fs.len() < 3 {
        return Err(CliError::Config("check.functions needs at least three functions".into()));
    }
    let contact = s.raw.check.structure == StructureName::Contact;
    let structure: Box<dyn JacobiStructure> = if contact {
        Box::new(ContactJacobi::new(chart))
    } else {
        Box::new(CosymplecticJacobi::new(chart))
    };
    // For each f: X_f and the fields X_{{f,g}} for the later g.
    let ham: Vec<(VectorFieldExpr, Vec<VectorFieldExpr>)> = if contact {
        (0..fs.len())
            .map(|i| {
                let rest = (i + 1..fs.len())
                    .map(|j| hamiltonian_vector_field(&chart, &bracket_field(structure.as_ref(), &fs[i], &fs[j])))
                    .collect();
                (hamiltonian_vector_field(&chart, &fs[i]), rest)
            })
            .collect()
    } else {
        Vec::new()
    };
    let points = uniform_points(&chart, s.seed, s.raw.check.samples, s.raw.check.radius);
    let per_point = points
        .par_iter()
        .map(|p| bracket_point(structure.as_ref(), &chart, contact, &fs, &ham, p.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let r = per_point.into_iter().fold(BracketResiduals::default(), BracketResiduals::max);
    let passed = r.worst() <= tolerances::COMPOSED;
    Ok((
        passed,
        json!({
            "structure": if contact { "contact" } else { "cosymplectic" },
            "functions": fs.iter().map(|f| to_source(f, &chart)).collect::<Vec<_>>(),
            "residuals": to_value(&r),
            "tolerance": tolerances::COMPOSED,
            "samples": points.len(),
        }),
    ))
}

fn param_samples(m: &ParamSubmanifold, seed: u64, count: usize, radius: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..m.dim()).map(|_| rng.random_range(-radius..radius)).collect())
        .collect()
}

fn check_submanifold(s: &Scenario) -> Result<(bool, Value), CliError> {
    let spec = s
        .submanifold
        .as_ref()
        .ok_or_else(|| CliError::Config("check submanifold needs a [submanifold] section".into()))?;
    let count = s.raw.check.samples;
    match spec {
        SubmanifoldSpec::LevelSet(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            let points = n.sample(&mut rng, count, s.raw.check.radius);
            if points.is_empty() {
                return Err(crate::error::Error::ProjectionFailure { residual: f64::NAN }.into());
            }
            let report = n.is_coisotropic(&points)?;
            Ok((
                report.coisotropic,
                json!({
                    "kind": "level_set",
                    "property": "coisotropic",
                    "codimension": n.codim(),
                    "report": to_value(&report),
                    "tolerance": tolerances::SECOND_ORDER,
                    "requested_samples": count,
                }),
            ))
        }
        SubmanifoldSpec::Param(m) => {
            let samples = param_samples(m, s.seed, count, s.raw.check.radius);
            let report = m.is_isotropic(&samples)?;
            Ok((
                report.isotropic,
                json!({
                    "kind": "embedding",
                    "property": "isotropic",
                    "report": to_value(&report),
                    "tolerance": tolerances::SECOND_ORDER,
                }),
            ))
        }
    }
}

fn lift_field(s: &Scenario) -> Result<VectorFieldExpr, CliError> {
    match (&s.lift_field, &s.system) {
        (Some(f), _) => Ok(f.clone()),
        (None, Some(sys)) => Ok(sys.hamiltonian_field()),
        (None, None) => Err(CliError::Config("give [lift] field or a [hamiltonian]".into())),
    }
}

fn check_lift(s: &Scenario) -> Result<(bool, Value), CliError> {
    let chart = s.chart;
    let x = lift_field(s)?;
    let ext = ExtendedChart::new(chart);
    let m = chart.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let r = s.raw.check.radius;
    let eps: Vec<ExtendedPoint> = (0..s.raw.check.samples)
        .map(|_| {
            let c: Vec<f64> = (0..2 * m + 1).map(|_| rng.random_range(-r..r)).collect();
            ExtendedPoint::from_slice(m, &c).expect("finite draws")
        })
        .collect();
    let ids = eps.par_iter().map(|ep| ext.identities(ep)).collect::<Result<Vec<_>>>()?;
    let min_det = ids.iter().map(|i| i.flat_det.abs()).fold(f64::INFINITY, f64::min);
    let worst = max_of(ids.iter().map(|i| i.worst_residual()));
    let structure_ok = ids.iter().all(|i| i.passed());
    let points = uniform_points(&chart, s.seed.wrapping_add(1), s.raw.check.samples, r);
    let image = legendrian_image_residual(&chart, &x, &points)?;
    let passed = structure_ok && image.is_legendrian();
    Ok((
        passed,
        json!({
            "extended_structure": {
                "min_abs_flat_det": min_det,
                "max_identity_residual": worst,
                "passed": structure_ok,
                "samples": eps.len(),
            },
            "legendrian_image": to_value(&image),
            "tolerance": tolerances::COMPOSED,
        }),
    ))
}

fn check_frame(s: &Scenario) -> Result<(bool, Value), CliError> {
    let chart = s.chart;
    let d = chart.dim();
    let n = chart.n();
    let unit = |k: usize| VectorFieldExpr::coordinate(d, k);
    let a: Vec<VectorFieldExpr> = (0..n)
        .map(|i| {
            let mut c = unit(chart.x(i)).components().to_vec();
            c[chart.z()] = ScalarField::var(chart.y(i));
            VectorFieldExpr::new(c)
        })
        .collect();
    let b: Vec<VectorFieldExpr> = (0..n).map(|i| unit(chart.y(i))).collect();
    let points = uniform_points(&chart, s.seed, s.raw.check.samples, s.raw.check.radius);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_add(1));
    let covectors: Vec<DVector<f64>> = points
        .iter()
        .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)))
        .collect();
    let mut pairing = 0.0f64;
    let mut brackets = 0.0f64;
    let mut round_trip = 0.0f64;
    let mut reeb = 0.0f64;
    let mut min_det = f64::INFINITY;
    for (p, alpha) in points.iter().zip(&covectors) {
        let frame = chart.frame(p)?;
        pairing = pairing.max((frame.pairing_matrix() - nalgebra::DMatrix::identity(d, d)).amax());
        let r = chart.reeb(p)?.into_components();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { -&r } else { DVector::zeros(d) };
                brackets = brackets.max((lie_bracket_at(&a[i], &b[j], p.as_slice())? - expect).amax());
                brackets = brackets.max(lie_bracket_at(&a[i], &a[j], p.as_slice())?.amax());
                brackets = brackets.max(lie_bracket_at(&b[i], &b[j], p.as_slice())?.amax());
            }
        }
        let cov = chart.cotangent(p, alpha.as_slice().to_vec())?;
        let back = chart.flat(&chart.sharp(&cov)?)?;
        round_trip = round_trip.max((back.components() - alpha).amax());
        let eta = chart.eta_components(p.as_slice());
        reeb = reeb.max((eta.dot(&r) - 1.0).abs()).max((chart.deta_matrix().transpose() * &r).amax());
        min_det = min_det.min(chart.flat_determinant(p)?.abs());
    }
    let passed = pairing <= tolerances::IDENTITY
        && brackets <= tolerances::SECOND_ORDER
        && round_trip <= tolerances::IDENTITY
        && reeb <= tolerances::IDENTITY
        && min_det > tolerances::NONDEGENERATE_DET;
    Ok((
        passed,
        json!({
            "pairing_residual": pairing,
            "bracket_residual": brackets,
            "sharp_flat_round_trip": round_trip,
            "reeb_residual": reeb,
            "min_abs_flat_det": min_det,
            "samples": points.len(),
        }),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckKind {
    Brackets,
    Submanifold,
    Lift,
    Frame,
}

impl CheckKind {
    fn name(self) -> &'static str {
        match self {
            CheckKind::Brackets => "brackets",
            CheckKind::Submanifold => "submanifold",
            CheckKind::Lift => "lift",
            CheckKind::Frame => "frame",
        }
    }
}

pub fn check(s: &Scenario, what: CheckKind) -> Result<Outputs, CliError> {
    let (passed, result) = match what {
        CheckKind::Brackets => check_brackets(s)?,
        CheckKind::Submanifold => check_submanifold(s)?,
        CheckKind::Lift => check_lift(s)?,
        CheckKind::Frame => check_frame(s)?,
    };
    let name = format!("check_{}.json", what.name());
    Ok(Outputs {
        files: vec![(name, envelope(s, &format!("check {}", what.name()), passed, result))],
        passed,
        summary: format!("check {}: {}", what.name(), if passed { "pass" } else { "FAIL" }),
    })
}

pub fn lift_check(s: &Scenario) -> Result<Outputs, CliError> {
    let chart = s.chart;
    let x = lift_field(s)?;
    let points = uniform_points(&chart, s.seed, s.raw.check.samples, s.raw.check.radius);
    let image = legendrian_image_residual(&chart, &x, &points)?;
    let ham = is_hamiltonian(&chart, &x, &points)?;
    let hamiltonian = ham.max_defect <= tolerances::COMPOSED;
    let passed = image.is_legendrian();
    let result = json!({
        "field": x.components().iter().map(|c| to_source(c, &chart)).collect::<Vec<_>>(),
        "legendrian_image": to_value(&image),
        "hamiltonian_defect": ham.max_defect,
        "candidate_hamiltonian": to_source(&ham.hamiltonian, &chart),
        "is_hamiltonian": hamiltonian,
        "classifications_agree": hamiltonian == passed,
        "tolerance": tolerances::COMPOSED,
    });
    Ok(Outputs {
        files: vec![("lift_check.json".into(), envelope(s, "lift-check", passed, result))],
        passed,
        summary: format!("lift-check: image {}Legendrian", if passed { "" } else { "not " }),
    })
}

pub fn reduce_cmd(s: &Scenario) -> Result<Outputs, CliError> {
    let system = s.require_system()?;
    let spec = s
        .action
        .as_ref()
        .ok_or_else(|| CliError::Config("reduce needs an [action] section".into()))?;
    let initial = s.require_initial()?;
    let red = match reduce(system, &spec.action, &spec.mu, s.seed, s.raw.check.samples) {
        Err(e @ crate::error::Error::NonInvariant(_)) => return Err(CliError::Failed(e.to_string())),
        other => other?,
    };
    let qchart = *red.system.chart();
    let mapping: Vec<String> = red
        .projection
        .kept
        .iter()
        .enumerate()
        .map(|(i, &k)| format!("{} <- {}", qchart.coordinate_name(i), s.chart.coordinate_name(k)))
        .collect();
    let mut reduced_toml = format!("# coordinates: {}\n", mapping.join(", "));
    let _ = writeln!(reduced_toml, "[chart]\nn = {}\n", qchart.n());
    let _ = writeln!(
        reduced_toml,
        "[hamiltonian]\nexpr = {}",
        toml::Value::String(to_source(red.system.hamiltonian(), &qchart))
    );
    let kept_names: Vec<String> = red.projection.kept.iter().map(|&k| s.chart.coordinate_name(k)).collect();

    let mut mismatch_csv = String::from("ic,t,mismatch\n");
    let mut recon_csv = format!("ic,t,{},error\n", coordinate_header(&s.chart));
    let mut runs = Vec::new();
    let mut passed = red.report.as_ref().is_none_or(|r| r.passed);
    for (i, x0) in initial.iter().enumerate() {
        let pd = verify_projected_dynamics(system, &spec.action, &red, x0, &s.integrator)?;
        for (t, d) in &pd.mismatch {
            let _ = writeln!(mismatch_csv, "{i},{},{}", e(*t), e(*d));
        }
        let mut run = json!({
            "initial": x0.as_slice(),
            "projected": to_value(&pd),
        });
        let ok = pd.on_level_set && pd.max_mismatch <= tolerances::TRAJECTORY && pd.max_level_drift <= tolerances::CONSERVATION;
        passed &= ok;
        if spec.reconstruct && pd.on_level_set {
            let x0r = red.project(x0.as_slice())?;
            let (reduced, direct) = rayon::join(
                || red.system.integrate(&x0r, &s.integrator),
                || system.integrate(x0, &s.integrator),
            );
            let (reduced, direct) = (reduced?, direct?);
            let rec = reconstruct(system, &red, &reduced, x0, spec.quadrature)?;
            let mut worst = 0.0f64;
            let mut compared = 0usize;
            let mut di = 0;
            for (t, p) in rec.times.iter().zip(&rec.points) {
                while di < direct.times.len() && direct.times[di] < *t {
                    di += 1;
                }
                let err = if di < direct.times.len() && direct.times[di] == *t {
                    compared += 1;
                    (p.coords() - direct.points[di].coords()).amax()
                } else {
                    f64::NAN
                };
                if err.is_finite() {
                    worst = worst.max(err);
                }
                let _ = write!(recon_csv, "{i},{}", e(*t));
                for c in p.as_slice() {
                    let _ = write!(recon_csv, ",{}", e(*c));
                }
                let _ = writeln!(recon_csv, ",{}", e(err));
            }
            passed &= worst <= tolerances::TRAJECTORY;
            run["reconstruction"] = json!({ "max_error": worst, "compared_times": compared });
        }
        runs.push(run);
    }
    let result = json!({
        "reduced_chart_n": qchart.n(),
        "reduced_hamiltonian": to_source(red.system.hamiltonian(), &qchart),
        "kept_coordinates": kept_names,
        "invariance_residual": red.invariance_residual,
        "reduction": red.report.as_ref().map(to_value),
        "runs": runs,
        "tolerances": { "trajectory": tolerances::TRAJECTORY, "level_set": tolerances::CONSERVATION },
    });
    let mut files = vec![
        ("reduced.toml".to_string(), reduced_toml.into_bytes()),
        ("reduce_mismatch.csv".to_string(), mismatch_csv.into_bytes()),
    ];
    if spec.reconstruct {
        files.push(("reconstruction.csv".into(), recon_csv.into_bytes()));
    }
    files.push(("reduce.json".into(), envelope(s, "reduce", passed, result)));
    Ok(Outputs {
        files,
        passed,
        summary: format!("reduce: n = {} -> {}: {}", s.chart.n(), qchart.n(), if passed { "pass" } else { "FAIL" }),
    })
}
