//! Reduction by x1-translations at zero momentum, then reconstruction.

use contact_core::calculus::{parse_field, to_source, Params};
use contact_core::dynamics::{ContactSystem, IntegratorSpec};
use contact_core::symmetry::{reconstruct, reduce, verify_projected_dynamics, GroupAction, Quadrature};
use contact_core::DarbouxChart;

fn main() -> contact_core::Result<()> {
    let chart = DarbouxChart::new(2)?;
    let h = parse_field("(y1^2 + y2^2)/2 + y1 + cos(x2) + 0.1*z", &chart, &Params::new())?;
    let system = ContactSystem::new(chart, h)?;
    let action = GroupAction::translations(chart, &[0])?;
    let red = reduce(&system, &action, &[0.0], 0, 100)?;
    println!("reduced H = {}", to_source(red.system.hamiltonian(), red.system.chart()));
    println!("{:?}", red.report);

    let x0 = chart.point(vec![0.2, 0.5, 0.0, 0.3, 0.1])?;
    let spec = IntegratorSpec::rk4(0.0, 5.0, 1e-3)?;
    let pd = verify_projected_dynamics(&system, &action, &red, &x0, &spec)?;
    println!("projected mismatch {:e}, level drift {:e}", pd.max_mismatch, pd.max_level_drift);

    let reduced = red.system.integrate(&red.project(x0.as_slice())?, &spec)?;
    let lifted = reconstruct(&system, &red, &reduced, &x0, Quadrature::Simpson)?;
    let end = lifted.last().unwrap();
    println!("reconstructed end state {:?}", end.as_slice());
    println!("x1(5) - x1(0) = {:.12} (closed form 5)", end.as_slice()[0] - 0.2);
    Ok(())
}
