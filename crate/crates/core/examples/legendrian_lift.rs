//! The extended contact form on TM x R and the Legendrian test for vector fields.

use contact_core::calculus::{parse_field, Params, VectorFieldExpr};
use contact_core::dynamics::hamiltonian_vector_field;
use contact_core::lifts::{legendrian_image_residual, ExtendedChart, ExtendedPoint};
use contact_core::{DarbouxChart, Point};
use nalgebra::DVector;

fn main() -> contact_core::Result<()> {
    let chart = DarbouxChart::new(1)?;
    let ext = ExtendedChart::new(chart);
    let ep = ExtendedPoint::new(Point::new(vec![0.0, 1.0, 0.0])?, DVector::from_vec(vec![1.0, 0.0, 0.0]), 2.0)?;
    println!("eta_bar = {:?}", ext.contact_form(&ep)?.as_slice());
    println!("identities: {:?}", ext.identities(&ep)?);

    let samples: Vec<Point> = (0..50)
        .map(|i| {
            let s = i as f64 * 0.2;
            Point::new(vec![s.sin(), s.cos(), 0.1 * s]).unwrap()
        })
        .collect();
    let h = parse_field("(x1^2 + y1^2)/2 + 0.1*z", &chart, &Params::new())?;
    let r = legendrian_image_residual(&chart, &hamiltonian_vector_field(&chart, &h), &samples)?;
    println!("X_H: residual {:e}, legendrian = {}", r.max_residual, r.is_legendrian());
    let dy = VectorFieldExpr::coordinate(3, chart.y(0));
    let r = legendrian_image_residual(&chart, &dy, &samples)?;
    println!("d/dy: residual {:e}, legendrian = {}", r.max_residual, r.is_legendrian());
    Ok(())
}
