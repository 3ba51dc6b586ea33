//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection, eigenvectors
//! by inverse iteration.

use crate::{Error, Result};

const MAX_BISECTIONS: usize = 400;
const MAX_INVERSE_ITERATIONS: usize = 8;

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    /// `off.len()` must be `diag.len() - 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty() && off.len() + 1 == diag.len());
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let prev = if q == 0.0 {
                f64::EPSILON * self.norm_bound()
            } else {
                q
            };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// The `k`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::Domain(format!(
                "eigenvalue index {k} out of range for dimension {}",
                self.dim()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let scale = self.norm_bound();
        let pad = 2.0 * f64::EPSILON * scale;
        lo -= pad;
        hi += pad;
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        if hi - lo > 4.0 * f64::EPSILON * scale {
            return Err(Error::Numeric(format!(
                "bisection for eigenvalue {k} did not converge, bracket [{lo:e}, {hi:e}]"
            )));
        }
        Ok(0.5 * (lo + hi))
    }

    /// Unit eigenvector for an eigenvalue `mu` previously obtained from
    /// [`SymTridiagonal::eigenvalue`].
    pub fn eigenvector(&self, mu: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let scale = self.norm_bound();
        // nudge the shift off the eigenvalue so the factorisation is regular
        let shift = mu + 64.0 * f64::EPSILON * scale;
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.25 * ((i as f64 * 0.618_033_988_7).fract() - 0.5))
            .collect();
        normalize(&mut v);
        for _ in 0..MAX_INVERSE_ITERATIONS {
            let mut w = self.solve_shifted(shift, &v)?;
            normalize(&mut w);
            v = w;
            if self.residual(mu, &v) <= 1e-9 * scale {
                return Ok(v);
            }
        }
        Err(Error::Numeric(format!(
            "inverse iteration at eigenvalue {mu:e} did not converge (residual {:e})",
            self.residual(mu, &v)
        )))
    }

    fn residual(&self, mu: f64, v: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut av = (self.diag[i] - mu) * v[i];
            if i > 0 {
                av += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                av += self.off[i] * v[i + 1];
            }
            acc += av * av;
        }
        acc.sqrt()
    }

    /// Solves `(T - shift I) x = b` by Gaussian elimination with partial
    /// pivoting.
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let tiny = f64::EPSILON * self.norm_bound();
        // rows hold up to three entries in columns i, i+1, i+2 after pivoting
        let mut a0: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let mut a1: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { self.off[i] } else { 0.0 })
            .collect();
        let mut a2 = vec![0.0; n];
        let mut sub: Vec<f64> = self.off.clone();
        let mut rhs = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if sub[i].abs() > a0[i].abs() {
                // swap rows i and i+1
                let (r0, r1, r2) = (
                    sub[i],
                    a0[i + 1],
                    if i + 2 < n { self.off[i + 1] } else { 0.0 },
                );
                let (s0, s1, s2) = (a0[i], a1[i], a2[i]);
                a0[i] = r0;
                a1[i] = r1;
                a2[i] = r2;
                rhs.swap(i, i + 1);
                let m = s0 / r0;
                a0[i + 1] = s1 - m * r1;
                a1[i + 1] = s2 - m * r2;
                rhs[i + 1] -= m * rhs[i];
            } else {
                let p = if a0[i] == 0.0 { tiny } else { a0[i] };
                a0[i] = p;
                let m = sub[i] / p;
                a0[i + 1] -= m * a1[i];
                a1[i + 1] -= m * a2[i];
                rhs[i + 1] -= m * rhs[i];
            }
            sub[i] = 0.0;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= a1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= a2[i] * x[i + 2];
            }
            let p = if a0[i] == 0.0 { tiny } else { a0[i] };
            x[i] = s / p;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(
                "shifted tridiagonal solve overflowed".into(),
            ));
        }
        Ok(x)
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirichlet(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn dirichlet_laplacian_eigenvalues() {
        let n = 40;
        let t = dirichlet(n);
        for k in 0..n {
            let exact = 4.0
                * ((k + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64))
                    .sin()
                    .powi(2);
            assert!((t.eigenvalue(k).unwrap() - exact).abs() < 1e-13);
        }
        assert!(t.eigenvalue(n).is_err());
    }

    #[test]
    fn eigenvector_satisfies_equation() {
        let t = SymTridiagonal::new(vec![1.0, 3.0, -2.0, 0.5, 4.0], vec![0.3, -1.2, 0.7, 2.0]);
        for k in 0..5 {
            let mu = t.eigenvalue(k).unwrap();
            let v = t.eigenvector(mu).unwrap();
            assert!(t.residual(mu, &v) < 1e-10, "k={k}");
        }
    }
}
