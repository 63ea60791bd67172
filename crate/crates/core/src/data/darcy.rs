//! Steady Darcy flow `−∇·(a∇u) = f` on the unit square with `u = 0` on the
//! boundary.
//!
//! The grid has `n × n` nodes including the boundary, spacing `h = 1/(n−1)`.
//! Interior nodes use the conservative 5-point finite-volume stencil with the
//! harmonic mean of `a` on each face; the SPD system is solved with
//! Jacobi-preconditioned conjugate gradients.

use crate::error::{arg_err, Error, Result};
use crate::tensor::RealTensor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DarcySolver {
    /// Stop once `‖f − A u‖ / ‖f‖` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DarcySolver {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 100_000 }
    }
}

/// Face coefficients of the interior operator, stored per interior node.
struct Operator {
    m: usize,
    inv_h2: f64,
    east: Vec<f64>,
    west: Vec<f64>,
    north: Vec<f64>,
    south: Vec<f64>,
    diag: Vec<f64>,
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

impl Operator {
    fn new(a: &RealTensor) -> Self {
        let n = a.shape()[0];
        let m = n - 2;
        let h = 1.0 / (n - 1) as f64;
        let at = |i: usize, j: usize| a.data()[i * n + j];
        let mut op = Operator {
            m,
            inv_h2: 1.0 / (h * h),
            east: Vec::with_capacity(m * m),
            west: Vec::with_capacity(m * m),
            north: Vec::with_capacity(m * m),
            south: Vec::with_capacity(m * m),
            diag: Vec::with_capacity(m * m),
        };
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let p = at(i, j);
                let (e, w, no, s) = (
                    harmonic(p, at(i, j + 1)),
                    harmonic(p, at(i, j - 1)),
                    harmonic(p, at(i + 1, j)),
                    harmonic(p, at(i - 1, j)),
                );
                op.east.push(e);
                op.west.push(w);
                op.north.push(no);
                op.south.push(s);
                op.diag.push((e + w + no + s) * op.inv_h2);
            }
        }
        op
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                let mut off = 0.0;
                if j + 1 < m {
                    off += self.east[k] * x[k + 1];
                }
                if j > 0 {
                    off += self.west[k] * x[k - 1];
                }
                if i + 1 < m {
                    off += self.north[k] * x[k + m];
                }
                if i > 0 {
                    off += self.south[k] * x[k - m];
                }
                y[k] = self.diag[k] * x[k] - off * self.inv_h2;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_coefficient(a: &RealTensor) -> Result<usize> {
    let s = a.shape();
    if s.len() != 2 || s[0] != s[1] || s[0] < 3 {
        return arg_err(format!("Darcy coefficient must be square n×n with n ≥ 3, got {s:?}"));
    }
    if let Some(x) = a.data().iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return arg_err(format!("Darcy coefficient must be positive and finite, found {x}"));
    }
    Ok(s[0])
}

impl DarcySolver {
    pub fn solve(&self, a: &RealTensor, forcing: f64) -> Result<RealTensor> {
        let n = check_coefficient(a)?;
        let op = Operator::new(a);
        let len = op.m * op.m;
        let f = vec![forcing; len];
        let f_norm = dot(&f, &f).sqrt();
        let mut u = vec![0.0; len];
        if f_norm > 0.0 {
            let mut r = f.clone();
            let mut z: Vec<f64> = r.iter().zip(&op.diag).map(|(r, d)| r / d).collect();
            let mut p = z.clone();
            let mut q = vec![0.0; len];
            let mut rz = dot(&r, &z);
            let mut converged = false;
            let mut res = 1.0;
            for _ in 0..self.max_iterations {
                op.apply(&p, &mut q);
                let alpha = rz / dot(&p, &q);
                for k in 0..len {
                    u[k] += alpha * p[k];
                    r[k] -= alpha * q[k];
                }
                res = dot(&r, &r).sqrt() / f_norm;
                if !res.is_finite() {
                    break;
                }
                if res < self.tolerance {
                    converged = true;
                    break;
                }
                for k in 0..len {
                    z[k] = r[k] / op.diag[k];
                }
                let rz_new = dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                for k in 0..len {
                    p[k] = z[k] + beta * p[k];
                }
            }
            if !converged {
                return Err(Error::Convergence { iterations: self.max_iterations, residual: res });
            }
        }
        let mut out = RealTensor::zeros(&[n, n]);
        for i in 0..op.m {
            let row = &u[i * op.m..(i + 1) * op.m];
            out.data_mut()[(i + 1) * n + 1..(i + 1) * n + 1 + op.m].copy_from_slice(row);
        }
        Ok(out)
    }
}

/// Solves with the default tolerance.
pub fn solve_darcy(a: &RealTensor, forcing: f64) -> Result<RealTensor> {
    DarcySolver::default().solve(a, forcing)
}

/// `‖f − A u‖ / ‖f‖` over the interior nodes.
pub fn darcy_residual(a: &RealTensor, u: &RealTensor, forcing: f64) -> Result<f64> {
    let n = check_coefficient(a)?;
    if u.shape() != [n, n] {
        return arg_err("solution shape does not match the coefficient");
    }
    let op = Operator::new(a);
    let m = op.m;
    let interior: Vec<f64> = (0..m * m).map(|k| u.data()[(k / m + 1) * n + k % m + 1]).collect();
    let mut au = vec![0.0; m * m];
    op.apply(&interior, &mut au);
    let num: f64 = au.iter().map(|x| (forcing - x).powi(2)).sum::<f64>().sqrt();
    Ok(num / (forcing.abs() * m as f64))
}

/// Two-valued coefficient: `hi` where the field is non-negative, `lo` elsewhere.
pub fn make_darcy_coefficient(grf: &RealTensor, hi: f64, lo: f64) -> Result<RealTensor> {
    if !(hi > lo && lo > 0.0) {
        return arg_err(format!("need hi > lo > 0, got hi={hi}, lo={lo}"));
    }
    RealTensor::new(grf.shape().to_vec(), grf.data().iter().map(|&g| if g >= 0.0 { hi } else { lo }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_coefficient_matches_series() {
        let n = 64;
        let a = RealTensor::from_fn(&[n, n], |_| 1.0);
        let u = solve_darcy(&a, 1.0).unwrap();
        let h = 1.0 / (n - 1) as f64;
        let series = |x: f64, y: f64| {
            let mut s = 0.0;
            for m in (1..=200).step_by(2) {
                for k in (1..=200).step_by(2) {
                    let (m, k) = (m as f64, k as f64);
                    s += 16.0 / (PI.powi(4) * m * k * (m * m + k * k)) * (m * PI * x).sin() * (k * PI * y).sin();
                }
            }
            s
        };
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let e = series(i as f64 * h, j as f64 * h);
                num += (u.get(&[i, j]) - e).powi(2);
                den += e * e;
            }
        }
        assert!((num / den).sqrt() < 1e-3);
    }

    #[test]
    fn residual_and_positivity() {
        let n = 20;
        let a = RealTensor::from_fn(&[n, n], |k| if (k * 7919) % 13 < 6 { 12.0 } else { 3.0 });
        let u = solve_darcy(&a, 1.0).unwrap();
        assert!(darcy_residual(&a, &u, 1.0).unwrap() < 1e-8);
        assert!(u.data().iter().all(|&x| x >= 0.0));
        for i in 0..n {
            assert_eq!(u.get(&[0, i]), 0.0);
            assert_eq!(u.get(&[n - 1, i]), 0.0);
            assert_eq!(u.get(&[i, 0]), 0.0);
            assert_eq!(u.get(&[i, n - 1]), 0.0);
        }
    }

    #[test]
    fn scaling_coefficient_scales_solution() {
        let n = 16;
        let a = RealTensor::from_fn(&[n, n], |k| 1.0 + (k % 5) as f64);
        let a4 = RealTensor::new(vec![n, n], a.data().iter().map(|x| 4.0 * x).collect()).unwrap();
        let u = solve_darcy(&a, 1.0).unwrap();
        let u4 = solve_darcy(&a4, 1.0).unwrap();
        for (x, y) in u.data().iter().zip(u4.data()) {
            assert_eq!(*x, 4.0 * y);
        }
    }

    #[test]
    fn rejects_nonpositive_coefficient() {
        let mut a = RealTensor::from_fn(&[8, 8], |_| 1.0);
        a.data_mut()[10] = 0.0;
        assert!(matches!(solve_darcy(&a, 1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn reports_non_convergence() {
        let a = RealTensor::from_fn(&[32, 32], |_| 1.0);
        let solver = DarcySolver { tolerance: 1e-12, max_iterations: 2 };
        assert!(matches!(solver.solve(&a, 1.0), Err(Error::Convergence { .. })));
    }

    #[test]
    fn threshold_coefficient() {
        let g = RealTensor::new(vec![2, 2], vec![0.5, -0.1, 0.0, -3.0]).unwrap();
        let a = make_darcy_coefficient(&g, 12.0, 3.0).unwrap();
        assert_eq!(a.data(), &[12.0, 3.0, 12.0, 3.0]);
        assert!(make_darcy_coefficient(&g, 3.0, 12.0).is_err());
        assert!(make_darcy_coefficient(&g, 3.0, 0.0).is_err());
    }
}
