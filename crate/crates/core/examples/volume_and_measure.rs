//! Divergence law and the invariant measure H^{-(n+1)} Ω at a few points.

use contact_core::calculus::{parse_field, Params};
use contact_core::dynamics::{
    divergence_defect, invariant_measure_defect, invariant_measure_defect_with_exponent, ContactSystem,
};
use contact_core::DarbouxChart;

fn main() -> contact_core::Result<()> {
    let chart = DarbouxChart::new(2)?;
    let h = parse_field("2 + x1*y2 + z^2/3 + sin(y1)", &chart, &Params::new())?;
    let system = ContactSystem::new(chart, h)?;
    for p in [[0.1, 0.2, -0.3, 0.4, 0.5], [-0.7, 0.0, 0.9, 0.2, -0.1]] {
        println!(
            "p = {p:?}\n  div defect {:e}\n  measure defect {:e}\n  wrong exponent {:e}",
            divergence_defect(&system, &p)?,
            invariant_measure_defect(&system, &p)?,
            invariant_measure_defect_with_exponent(&system, &p, -2)?,
        );
    }
    Ok(())
}
