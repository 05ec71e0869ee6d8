#![allow(dead_code)]

use contact_core::calculus::ScalarField;
use contact_core::{DarbouxChart, Point};
use rand::Rng;

/// Random polynomial of total degree ≤ `degree` in `dim` variables, every monomial present.
pub fn random_polynomial<R: Rng>(rng: &mut R, dim: usize, degree: u32) -> ScalarField {
    let mut out = ScalarField::zero();
    for exps in monomials(dim, degree) {
        let c: f64 = rng.random_range(-1.0..1.0);
        let mut term = ScalarField::constant(c);
        for (k, &e) in exps.iter().enumerate() {
            if e > 0 {
                term = term * ScalarField::var(k).powi(e as i32);
            }
        }
        out = out + term;
    }
    out
}

fn monomials(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    if dim == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for e in 0..=degree {
        for mut rest in monomials(dim - 1, degree - e) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

pub fn random_point<R: Rng>(rng: &mut R, chart: &DarbouxChart, radius: f64) -> Point {
    let c: Vec<f64> = (0..chart.dim()).map(|_| rng.random_range(-radius..radius)).collect();
    chart.point(c).unwrap()
}

pub fn random_points<R: Rng>(rng: &mut R, chart: &DarbouxChart, count: usize, radius: f64) -> Vec<Point> {
    (0..count).map(|_| random_point(rng, chart, radius)).collect()
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: &ScalarField, p: &[f64], h: f64) -> Vec<f64> {
    (0..p.len())
        .map(|k| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[k] += h;
            b[k] -= h;
            (f.value(&a).unwrap() - f.value(&b).unwrap()) / (2.0 * h)
        })
        .collect()
}
