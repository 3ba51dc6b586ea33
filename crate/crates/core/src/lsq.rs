//! Damped Gauss–Newton (Levenberg–Marquardt) least squares with central
//! finite-difference Jacobians and linearized parameter covariance.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct LeastSquares {
    pub max_iterations: usize,
    /// Stop when an accepted step reduces `‖r‖` by less than this fraction.
    pub rel_tol: f64,
    /// Stop when every Jacobian column is this close to orthogonal to `r`.
    pub grad_tol: f64,
    /// Relative central-difference step.
    pub fd_step: f64,
    pub initial_damping: f64,
    pub max_damping: f64,
}

impl Default for LeastSquares {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            rel_tol: 1e-9,
            grad_tol: 1e-12,
            fd_step: 1e-6,
            initial_damping: 1e-3,
            max_damping: 1e16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub params: Vec<f64>,
    /// `σ²(JᵀJ)⁻¹` with `σ² = ‖r‖²/(m − p)`.
    pub covariance: DMatrix<f64>,
    /// `‖r‖` at the solution.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖r‖` after each accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

impl Solution {
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.params.len())
            .map(|i| self.covariance[(i, i)].max(0.0).sqrt())
            .collect()
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    let s: f64 = r.iter().map(|x| x * x).sum();
    if s.is_finite() {
        s
    } else {
        f64::INFINITY
    }
}

impl LeastSquares {
    /// Minimizes `‖residuals(x)‖²` from `x0`.
    ///
    /// `typical` gives a magnitude for each parameter; the difference step for
    /// parameter `j` is `fd_step · max(|x_j|, typical_j)`.
    pub fn minimize<F>(&self, residuals: F, x0: &[f64], typical: &[f64]) -> Result<Solution>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let p = x0.len();
        assert_eq!(typical.len(), p, "one typical scale per parameter");
        let mut x = x0.to_vec();
        let mut r = residuals(&x);
        let m = r.len();
        if m < p {
            return Err(Error::IllPosed(format!(
                "{p} free parameters but only {m} residuals"
            )));
        }
        let mut cost = sum_sq(&r);
        if !cost.is_finite() {
            return Err(Error::Numeric(
                "residuals are not finite at the initial point".into(),
            ));
        }
        let mut history = vec![cost.sqrt()];
        let mut lambda = self.initial_damping;
        let mut converged = false;
        let mut iterations = 0;

        while iterations < self.max_iterations {
            iterations += 1;
            let jac = self.jacobian(&residuals, &x, typical, m);
            let rv = DVector::from_column_slice(&r);
            let grad = jac.tr_mul(&rv);
            if self.gradient_small(&jac, &grad, cost) {
                converged = true;
                break;
            }
            let jtj = jac.tr_mul(&jac);
            let max_diag = (0..p)
                .map(|i| jtj[(i, i)])
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            let mut accepted = None;
            while lambda <= self.max_damping {
                let mut a = jtj.clone();
                for i in 0..p {
                    a[(i, i)] += lambda * jtj[(i, i)].max(1e-30 * max_diag);
                }
                if let Some(step) = solve_spd(a, -&grad) {
                    let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                    let r_trial = residuals(&trial);
                    let c_trial = sum_sq(&r_trial);
                    if c_trial < cost {
                        accepted = Some((trial, r_trial, c_trial));
                        lambda = (lambda / 10.0).max(1e-12);
                        break;
                    }
                }
                lambda *= 10.0;
            }
            match accepted {
                Some((trial, r_trial, c_trial)) => {
                    let rel = (cost.sqrt() - c_trial.sqrt()) / cost.sqrt().max(f64::MIN_POSITIVE);
                    x = trial;
                    r = r_trial;
                    cost = c_trial;
                    history.push(cost.sqrt());
                    if rel < self.rel_tol {
                        converged = true;
                        break;
                    }
                }
                None => {
                    // no descent direction survives any damping: stationary point
                    converged = true;
                    break;
                }
            }
        }

        let jac = self.jacobian(&residuals, &x, typical, m);
        let dof = m.saturating_sub(p).max(1) as f64;
        let covariance = scaled_inverse(&jac) * (cost / dof);
        Ok(Solution {
            params: x,
            covariance,
            residual_norm: cost.sqrt(),
            iterations,
            converged,
            history,
        })
    }

    fn jacobian<F>(&self, residuals: &F, x: &[f64], typical: &[f64], m: usize) -> DMatrix<f64>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let p = x.len();
        let mut jac = DMatrix::zeros(m, p);
        let mut probe = x.to_vec();
        for j in 0..p {
            let h = self.fd_step * x[j].abs().max(typical[j].abs()).max(f64::MIN_POSITIVE);
            probe[j] = x[j] + h;
            let up = residuals(&probe);
            probe[j] = x[j] - h;
            let down = residuals(&probe);
            probe[j] = x[j];
            for i in 0..m {
                jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        jac
    }

    fn gradient_small(&self, jac: &DMatrix<f64>, grad: &DVector<f64>, cost: f64) -> bool {
        let rnorm = cost.sqrt();
        if rnorm == 0.0 {
            return true;
        }
        (0..jac.ncols()).all(|j| {
            let cn = jac.column(j).norm();
            cn == 0.0 || grad[j].abs() / (cn * rnorm) < self.grad_tol
        })
    }
}

fn solve_spd(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        let x = ch.solve(&b);
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    a.lu().solve(&b).filter(|x| x.iter().all(|v| v.is_finite()))
}

/// `(JᵀJ)⁻¹` computed on column-normalized `J` to keep mixed-unit
/// parameters well conditioned; singular directions get zero weight.
fn scaled_inverse(jac: &DMatrix<f64>) -> DMatrix<f64> {
    let p = jac.ncols();
    let norms: Vec<f64> = (0..p).map(|j| jac.column(j).norm()).collect();
    let mut js = jac.clone();
    for (j, &n) in norms.iter().enumerate() {
        if n > 0.0 {
            js.column_mut(j).unscale_mut(n);
        }
    }
    let jtj = js.tr_mul(&js);
    let inv = jtj
        .clone()
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| {
            jtj.pseudo_inverse(1e-12)
                .unwrap_or_else(|_| DMatrix::zeros(p, p))
        });
    let mut out = DMatrix::zeros(p, p);
    for i in 0..p {
        for k in 0..p {
            if norms[i] > 0.0 && norms[k] > 0.0 {
                out[(i, k)] = inv[(i, k)] / (norms[i] * norms[k]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential_exactly() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let data: Vec<f64> = xs.iter().map(|x| 2.5 * (-1.3 * x).exp() + 0.4).collect();
        let model = |p: &[f64]| -> Vec<f64> {
            xs.iter()
                .zip(&data)
                .map(|(x, y)| p[0] * (-p[1] * x).exp() + p[2] - y)
                .collect()
        };
        let sol = LeastSquares::default()
            .minimize(model, &[1.0, 0.5, 0.0], &[1.0, 1.0, 1.0])
            .unwrap();
        assert!(sol.converged);
        assert!((sol.params[0] - 2.5).abs() < 1e-7);
        assert!((sol.params[1] - 1.3).abs() < 1e-7);
        assert!((sol.params[2] - 0.4).abs() < 1e-7);
        assert!(sol.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rosenbrock_monotone() {
        let f = |p: &[f64]| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]];
        let sol = LeastSquares::default()
            .minimize(f, &[-1.2, 1.0], &[1.0, 1.0])
            .unwrap();
        assert!((sol.params[0] - 1.0).abs() < 1e-6, "{:?}", sol.params);
        assert!(sol.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn linear_covariance_matches_ols() {
        // y = a + b x with known residual pattern; compare with textbook OLS errors
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let noise = [0.1, -0.2, 0.05, 0.15, -0.1, 0.0];
        let ys: Vec<f64> = xs
            .iter()
            .zip(noise)
            .map(|(x, e)| 1.0 + 2.0 * x + e)
            .collect();
        let f = |p: &[f64]| -> Vec<f64> {
            xs.iter()
                .zip(&ys)
                .map(|(x, y)| p[0] + p[1] * x - y)
                .collect()
        };
        let sol = LeastSquares::default()
            .minimize(f, &[0.0, 0.0], &[1.0, 1.0])
            .unwrap();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let s2 = sol.residual_norm.powi(2) / (n - 2.0);
        let se_b = (s2 / sxx).sqrt();
        let se_a = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
        let se = sol.std_errors();
        assert!((se[0] - se_a).abs() < 1e-8 * se_a.max(1.0));
        assert!((se[1] - se_b).abs() < 1e-8 * se_b.max(1.0));
    }

    #[test]
    fn too_many_parameters() {
        let f = |p: &[f64]| vec![p[0] - 1.0];
        assert!(matches!(
            LeastSquares::default().minimize(f, &[0.0, 0.0], &[1.0, 1.0]),
            Err(Error::IllPosed(_))
        ));
    }
}
