//! The adapted frame, flat/sharp and the Reeb field on a Darboux chart.

use contact_core::calculus::{lie_bracket_at, ScalarField, VectorFieldExpr};
use contact_core::DarbouxChart;

fn main() -> contact_core::Result<()> {
    let chart = DarbouxChart::new(1)?;
    let p = chart.point(vec![0.0, 3.0, 0.0])?;
    let frame = chart.frame(&p)?;
    println!("A = {:?}", frame.a[0].components().as_slice());
    println!("B = {:?}", frame.b[0].components().as_slice());
    println!("R = {:?}", frame.reeb.components().as_slice());
    println!("pairing matrix = {}", frame.pairing_matrix());

    let a = VectorFieldExpr::new(vec![ScalarField::one(), ScalarField::zero(), ScalarField::var(1)]);
    let b = VectorFieldExpr::coordinate(3, 1);
    println!("[A, B] = {:?}", lie_bracket_at(&a, &b, p.as_slice())?.as_slice());

    let v = chart.tangent(&p, vec![1.0, 2.0, -1.0])?;
    let flat = chart.flat(&v)?;
    println!("flat(v) = {:?}", flat.components().as_slice());
    println!("sharp(flat(v)) = {:?}", chart.sharp(&flat)?.components().as_slice());
    Ok(())
}
