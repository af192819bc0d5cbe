//! Symmetric tridiagonal eigenpairs by Sturm-sequence bisection and inverse
//! iteration; enough for the smallest few eigenvalues of large discretized
//! Sturm-Liouville pencils without pulling in a dense eigensolver.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag` of length `n`, `off` of length `n-1`.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Config(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn pivmin(&self) -> f64 {
        let bmax = self.off.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        f64::MIN_POSITIVE * (bmax * bmax).max(1.0)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the signs of
    /// the LDL^T pivots of `T - x I`).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0usize;
        let mut d = self.diag[0] - x;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let b = self.off[i - 1];
            let mut next = self.diag[i] - x - b * b / d;
            if next.abs() < pivmin {
                next = -pivmin;
            }
            if next < 0.0 {
                count += 1;
            }
            d = next;
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// The `q` smallest eigenvalues, ascending, each located by bisection.
    pub fn smallest_eigenvalues(&self, q: usize) -> Result<Vec<f64>> {
        if q == 0 || q > self.len() {
            return Err(Error::Config(format!(
                "requested {q} eigenvalues from a matrix of size {}",
                self.len()
            )));
        }
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(1.0);
        let mut out = Vec::with_capacity(q);
        for k in 1..=q {
            let (mut lo, mut hi) = (glo, ghi);
            // invariant: count(lo) < k <= count(hi)
            for _ in 0..140 {
                let mid = 0.5 * (lo + hi);
                if self.count_below(mid) >= k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= f64::EPSILON * scale * 4.0 {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        Ok(out)
    }

    /// Solve `(T - shift I) x = b` by Gaussian elimination with partial
    /// pivoting (fill-in limited to a second superdiagonal).
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut du: Vec<f64> = self.off.clone(); // superdiagonal
        let mut du2 = vec![0.0; n.saturating_sub(2)]; // fill-in
        let mut dl: Vec<f64> = self.off.clone(); // subdiagonal
        let mut x = b.to_vec();
        let tiny = f64::MIN_POSITIVE * 1e4;

        for i in 0..n - 1 {
            if dl[i].abs() <= d[i].abs() {
                // no swap
                let piv = if d[i].abs() < tiny { tiny.copysign(d[i]) } else { d[i] };
                let mult = dl[i] / piv;
                d[i + 1] -= mult * du[i];
                x[i + 1] -= mult * x[i];
                if i + 2 < n {
                    // du2 stays zero on this path
                }
                dl[i] = 0.0;
            } else {
                // swap rows i and i+1
                let mult = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - mult * tmp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -mult * du[i + 1];
                }
                du[i] = tmp;
                x.swap(i, i + 1);
                x[i + 1] -= mult * x[i];
                dl[i] = 0.0;
            }
        }
        // back substitution
        let piv = if d[n - 1].abs() < tiny { tiny.copysign(d[n - 1]) } else { d[n - 1] };
        x[n - 1] /= piv;
        if n >= 2 {
            let piv = if d[n - 2].abs() < tiny { tiny.copysign(d[n - 2]) } else { d[n - 2] };
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / piv;
        }
        for i in (0..n.saturating_sub(2)).rev() {
            let piv = if d[i].abs() < tiny { tiny.copysign(d[i]) } else { d[i] };
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / piv;
        }
        x
    }

    /// Eigenvector for an eigenvalue estimate by inverse iteration,
    /// orthogonalized against `previous` when the spacing is tight.
    pub fn eigenvector(&self, eigenvalue: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        // deterministic start vector
        let mut state = 0x2545f4914f6cdd1du64;
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        for _ in 0..4 {
            let mut w = self.solve_shifted(eigenvalue, &v);
            for prev in previous {
                let dot: f64 = w.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (wi, pi) in w.iter_mut().zip(prev) {
                    *wi -= dot * pi;
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::Convergence {
                    what: "inverse iteration".into(),
                    iterations: 4,
                    residual: f64::NAN,
                });
            }
            for x in &mut w {
                *x /= norm;
            }
            v = w;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dirichlet second-difference matrix: eigenvalues 2 - 2 cos(k pi / (n+1)).
    fn laplace_1d(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn second_difference_spectrum() {
        let n = 500;
        let t = laplace_1d(n);
        let got = t.smallest_eigenvalues(4).unwrap();
        for (k, val) in got.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((val - exact).abs() < 1e-12, "k={k}: {val} vs {exact}");
        }
    }

    #[test]
    fn count_below_matches_bisection_targets() {
        let t = laplace_1d(100);
        let eigs = t.smallest_eigenvalues(3).unwrap();
        assert_eq!(t.count_below(eigs[0] - 1e-9), 0);
        assert_eq!(t.count_below(eigs[0] + 1e-9), 1);
        assert_eq!(t.count_below(eigs[2] + 1e-9), 3);
    }

    #[test]
    fn eigenvector_residual_small() {
        let n = 300;
        let t = laplace_1d(n);
        let eigs = t.smallest_eigenvalues(2).unwrap();
        let v0 = t.eigenvector(eigs[0], &[]).unwrap();
        let v1 = t.eigenvector(eigs[1], &[v0.clone()]).unwrap();
        for (lambda, v) in [(eigs[0], &v0), (eigs[1], &v1)] {
            let mut worst = 0.0f64;
            for i in 0..n {
                let mut r = t.diag[i] * v[i] - lambda * v[i];
                if i > 0 {
                    r += t.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    r += t.off[i] * v[i + 1];
                }
                worst = worst.max(r.abs());
            }
            assert!(worst < 1e-10, "residual {worst}");
        }
        let dot: f64 = v0.iter().zip(&v1).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-8);
    }
}
