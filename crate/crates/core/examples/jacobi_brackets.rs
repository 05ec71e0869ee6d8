//! Jacobi brackets on a contact chart and on a locally conformally symplectic example.

use contact_core::calculus::{parse_field, Params, ScalarField};
use contact_core::jacobi::{jacobi_bracket, jacobi_identity_residual, leibniz_defect, ContactJacobi, LcsJacobi};
use contact_core::DarbouxChart;

fn main() -> contact_core::Result<()> {
    let chart = DarbouxChart::new(1)?;
    let s = ContactJacobi::new(chart);
    let f = |src: &str| parse_field(src, &chart, &Params::new());
    let p = [0.3, -0.5, 1.2];
    println!("{{x, y}} = {}", jacobi_bracket(&s, &f("x1")?, &f("y1")?, &p)?);
    println!("{{1, z}} = {}", jacobi_bracket(&s, &ScalarField::one(), &f("z")?, &p)?);
    let (a, b, c) = (f("x1*z")?, f("sin(y1)")?, f("z^2 + x1")?);
    println!("Jacobi identity residual: {:e}", jacobi_identity_residual(&s, &a, &b, &c, &p)?);
    println!("Leibniz defect {{fg,h}} - f{{g,h}} - g{{f,h}}: {}", leibniz_defect(&s, &a, &b, &c, &p)?);

    let lcs = LcsJacobi::conformal_example();
    let q = [0.2, -0.1, 0.4, 0.7];
    let v = |i| ScalarField::var(i);
    let r = jacobi_identity_residual(&lcs, &(v(0) * v(2)), &v(1).sin(), &(v(3) * v(3)), &q)?;
    println!("LCS Jacobi identity residual: {r:e}");
    Ok(())
}
