//! Integrates a damped oscillator and compares H(t) with H(0) e^{-0.1 t}.

use contact_core::calculus::{parse_field, Params};
use contact_core::dynamics::{ContactSystem, IntegratorSpec};
use contact_core::DarbouxChart;

fn main() -> contact_core::Result<()> {
    let chart = DarbouxChart::new(1)?;
    let h = parse_field("(x1^2 + y1^2)/2 + 0.1*z", &chart, &Params::new())?;
    let system = ContactSystem::new(chart, h)?;
    let x0 = chart.point(vec![1.0, 0.0, 0.0])?;
    let traj = system.integrate(&x0, &IntegratorSpec::rk4(0.0, 10.0, 1e-3)?)?;

    let h0 = traj.monitors[0].h;
    let worst = traj
        .times
        .iter()
        .zip(&traj.monitors)
        .map(|(t, m)| (m.h - h0 * (-0.1 * t).exp()).abs())
        .fold(0.0, f64::max);
    println!("steps: {}", traj.len() - 1);
    println!("H(10) = {:.12}", traj.monitors.last().unwrap().h);
    println!("max |H(t) - H0 exp(-0.1 t)| = {worst:e}");
    for k in (0..=10_000).step_by(2_000) {
        println!("t = {:5.2}  H = {:.10}", traj.times[k], traj.monitors[k].h);
    }
    Ok(())
}
