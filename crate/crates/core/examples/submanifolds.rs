//! Coisotropic level sets, a Legendrian curve and point classification.

use contact_core::calculus::Params;
use contact_core::submanifolds::{classify_point, LevelSetSubmanifold, ParamSubmanifold};
use contact_core::DarbouxChart;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> contact_core::Result<()> {
    let chart = DarbouxChart::new(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for constraints in [["y1", "y2"], ["x1", "y1"]] {
        let n = LevelSetSubmanifold::parse(chart, &constraints, &Params::new())?;
        let samples = n.sample(&mut rng, 20, 1.0);
        let r = n.is_coisotropic(&samples)?;
        println!("{constraints:?}: coisotropic = {}, max |Z_a(phi_b)| = {}", r.coisotropic, r.max_residual);
    }

    let c1 = DarbouxChart::new(1)?;
    let mut params = Params::new();
    params.insert("c".into(), 0.7);
    let curve = ParamSubmanifold::parse(c1, 1, &["s1", "$c", "$c*s1"], &params)?;
    let r = curve.is_legendrian(&[vec![-1.0], vec![0.0], vec![2.5]])?;
    println!("psi(s) = (s, c, c s): legendrian = {}, max |eta| = {}", r.legendrian, r.max_eta);

    let p = c1.point(vec![0.0, 1.0, 0.0])?;
    let e = |v: [f64; 3]| DVector::from_row_slice(&v);
    println!("span(dx + y dz): {:?}", classify_point(&c1, &p, &[e([1.0, 0.0, 1.0])])?);
    println!("span(dz): {:?}", classify_point(&c1, &p, &[e([0.0, 0.0, 1.0])])?);
    println!("span(dx): {:?}", classify_point(&c1, &p, &[e([1.0, 0.0, 0.0])])?);
    Ok(())
}
