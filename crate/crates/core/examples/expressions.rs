//! Parsing, printing and differentiating scalar fields.

use contact_core::calculus::{gradient_at, hessian_at, parse_field, to_source, Params};
use contact_core::DarbouxChart;

fn main() -> contact_core::Result<()> {
    let chart = DarbouxChart::new(1)?;
    let mut params = Params::new();
    params.insert("k".into(), 2.0);
    let f = parse_field("$k*x1^2*y1 - exp(-z)*sin(x1) + diff(y1^3, y1)", &chart, &params)?;
    println!("f = {}", to_source(&f, &chart));
    let p = [0.5, -1.0, 0.25];
    println!("f(p) = {}", f.value(&p)?);
    println!("grad f(p) = {:?}", gradient_at(&f, &p)?.as_slice());
    println!("hess f(p) = {}", hessian_at(&f, &p)?);
    match parse_field("x1 + * y1", &chart, &params) {
        Err(e) => println!("parse error: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
