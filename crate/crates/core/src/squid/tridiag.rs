// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with a partially pivoted tridiagonal LU. Only a handful of the
//! smallest eigenpairs of a matrix with thousands of rows are ever needed,
//! which is exactly where this pairing is cheap and robust.

#[derive(Debug, Clone)]
pub(crate) struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub(crate) fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(
            off.len() + 1,
            diag.len(),
            "off-diagonal must be one shorter than the diagonal"
        );
        SymTridiagonal { diag, off }
    }

    pub(crate) fn len(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = (self.diag[i] - x) - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th smallest eigenvalue (k = 0 is the ground state).
    pub(crate) fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let pivmin = f64::MIN_POSITIVE.max(scale * f64::EPSILON * f64::EPSILON);
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid, pivmin) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for `lambda`, orthogonalized against `previous`.
    pub(crate) fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
        let n = self.len();
        let lu = ShiftedLu::factor(self, lambda);
        let mut x: Vec<f64> = (0..n).map(|k| 1.0 + 0.25 * ((k as f64) * 0.618_033_988_7).sin()).collect();
        for _ in 0..4 {
            orthogonalize(&mut x, previous);
            normalize(&mut x);
            x = lu.solve(&x);
        }
        orthogonalize(&mut x, previous);
        normalize(&mut x);
        x
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

fn orthogonalize(x: &mut [f64], previous: &[Vec<f64>]) {
    for p in previous {
        let dot: f64 = x.iter().zip(p).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(p).for_each(|(a, b)| *a -= dot * b);
    }
}

/// LU factors of (T − λI) with row interchanges (LAPACK gttrf layout).
struct ShiftedLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, lambda: f64) -> Self {
        let n = t.len();
        let tiny = {
            let (lo, hi) = t.bounds();
            f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
        };
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - lambda).collect();
        let mut du = t.off.clone();
        let mut dl = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        ShiftedLu { d, du, du2, dl, swapped }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            if i + 1 < n {
                acc -= self.du[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= self.du2[i] * x[i + 2];
            }
            x[i] = acc / self.d[i];
        }
        // Rescale so repeated solves near a singular shift stay finite.
        let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m > 0.0 && m.is_finite() {
            x.iter_mut().for_each(|v| *v /= m);
        }
        x
    }
}
