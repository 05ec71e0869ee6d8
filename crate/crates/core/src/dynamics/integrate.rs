//! Explicit Runge–Kutta integrators: classical RK4 with a fixed step and the
//! Fehlberg 4(5) pair with error control.

use nalgebra::DVector;

use crate::error::{Error, EvalError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rk4 { step: f64 },
    Rkf45 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSpec {
    pub method: Method,
    pub t0: f64,
    pub t1: f64,
}

impl IntegratorSpec {
    pub fn rk4(t0: f64, t1: f64, step: f64) -> Result<Self> {
        let s = IntegratorSpec {
            method: Method::Rk4 { step },
            t0,
            t1,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn rkf45(t0: f64, t1: f64, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let s = IntegratorSpec {
            method: Method::Rkf45 { abs_tol, rel_tol },
            t0,
            t1,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidIntegrator(m.to_string()));
        if !(self.t0.is_finite() && self.t1.is_finite()) || self.t1 <= self.t0 {
            return bad("time span must be finite with t1 > t0");
        }
        match self.method {
            Method::Rk4 { step } if !(step > 0.0 && step.is_finite()) => bad("step must be positive"),
            Method::Rkf45 { abs_tol, rel_tol }
                if !(abs_tol > 0.0 && rel_tol >= 0.0 && abs_tol.is_finite() && rel_tol.is_finite()) =>
            {
                bad("tolerances must be positive")
            }
            _ => Ok(()),
        }
    }
}

/// Accepted steps of an ODE solve, starting with the initial state.
#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

type Rhs<'a> = dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + 'a;

fn guard(t: f64, f: &Rhs<'_>, y: &DVector<f64>, last_t: f64, last: &DVector<f64>) -> Result<DVector<f64>> {
    let abort = || Error::NonFiniteState {
        t,
        last_t,
        last: last.as_slice().to_vec(),
    };
    if y.iter().any(|v| !v.is_finite()) {
        return Err(abort());
    }
    match f(y) {
        Ok(k) if k.iter().all(|v| v.is_finite()) => Ok(k),
        Ok(_) | Err(Error::Eval(EvalError::NonFinite(_))) => Err(abort()),
        Err(e) => Err(e),
    }
}

pub fn solve(f: &Rhs<'_>, y0: &DVector<f64>, spec: &IntegratorSpec) -> Result<Solution> {
    spec.validate()?;
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinitePoint);
    }
    match spec.method {
        Method::Rk4 { step } => rk4(f, y0, spec.t0, spec.t1, step),
        Method::Rkf45 { abs_tol, rel_tol } => rkf45(f, y0, spec.t0, spec.t1, abs_tol, rel_tol),
    }
}

fn rk4(f: &Rhs<'_>, y0: &DVector<f64>, t0: f64, t1: f64, h: f64) -> Result<Solution> {
    let span = t1 - t0;
    let steps = ((span / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(t0);
    states.push(y0.clone());
    let mut y = y0.clone();
    let mut t = t0;
    for i in 1..=steps {
        let t_next = if i == steps { t1 } else { t0 + i as f64 * h };
        let dt = t_next - t;
        let k1 = guard(t, f, &y, t, &y)?;
        let k2 = guard(t, f, &(&y + &k1 * (dt / 2.0)), t, &y)?;
        let k3 = guard(t, f, &(&y + &k2 * (dt / 2.0)), t, &y)?;
        let k4 = guard(t, f, &(&y + &k3 * dt), t, &y)?;
        let next = &y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                t: t_next,
                last_t: t,
                last: y.as_slice().to_vec(),
            });
        }
        y = next;
        t = t_next;
        times.push(t);
        states.push(y.clone());
    }
    Ok(Solution { times, states })
}

// Fehlberg 4(5) tableau.
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];

fn rkf45(f: &Rhs<'_>, y0: &DVector<f64>, t0: f64, t1: f64, abs_tol: f64, rel_tol: f64) -> Result<Solution> {
    let mut times = vec![t0];
    let mut states = vec![y0.clone()];
    let mut y = y0.clone();
    let mut t = t0;
    let mut h = ((t1 - t0) * 1e-3).min(1e-2);
    while t < t1 {
        let min_h = 1e-14 * t.abs().max(1.0);
        if h < min_h {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t1 - t <= h;
        let dt = if last { t1 - t } else { h };
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(6);
        for row in A.iter() {
            let mut stage = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if row[j] != 0.0 {
                    stage += kj * (row[j] * dt);
                }
            }
            k.push(guard(t, f, &stage, t, &y)?);
        }
        let mut y5 = y.clone();
        let mut err = 0.0f64;
        for i in 0..y.len() {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for (j, kj) in k.iter().enumerate() {
                s5 += B5[j] * kj[i];
                s4 += B4[j] * kj[i];
            }
            y5[i] += dt * s5;
            let scale = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
            err = err.max((dt * (s5 - s4)).abs() / scale);
        }
        if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                t: t + dt,
                last_t: t,
                last: y.as_slice().to_vec(),
            });
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + dt };
            y = y5;
            times.push(t);
            states.push(y.clone());
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = dt * factor;
    }
    Ok(Solution { times, states })
}
