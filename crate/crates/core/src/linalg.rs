//! Small dense linear algebra: a square matrix type and a symmetric
//! indefinite `P A Pᵀ = L D Lᵀ` factorization with Bunch–Kaufman pivoting.

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Real> DenseMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] += v;
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |m, x| m.max(x.abs()))
    }

    fn swap_symmetric(&mut self, p: usize, q: usize) {
        if p == q {
            return;
        }
        let n = self.n;
        for j in 0..n {
            self.data.swap(p * n + j, q * n + j);
        }
        for i in 0..n {
            self.data.swap(i * n + p, i * n + q);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Block {
    One(usize),
    Two(usize),
}

/// Factorization of a symmetric (possibly indefinite) matrix.
#[derive(Clone, Debug)]
pub struct SymmetricIndefinite<S> {
    factors: DenseMatrix<S>,
    perm: Vec<usize>,
    blocks: Vec<Block>,
}

impl<S: Real> SymmetricIndefinite<S> {
    /// Factor `a` (only symmetric input is meaningful). Returns `None` when a
    /// pivot is numerically zero relative to the largest entry.
    pub fn factor(a: &DenseMatrix<S>) -> Option<Self> {
        let n = a.dim();
        let mut m = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut blocks = Vec::new();
        let alpha = (S::one() + S::lit(17.0).sqrt()) / S::lit(8.0);
        let tol = a.max_abs() * S::epsilon() * S::from_count(n.max(1)) * S::lit(64.0);
        if !(a.max_abs() > S::zero()) {
            return None;
        }
        let mut k = 0;
        while k < n {
            let (lambda, r) = ((k + 1)..n)
                .map(|i| (m.get(i, k).abs(), i))
                .fold((S::zero(), k), |best, c| if c.0 > best.0 { c } else { best });
            let akk = m.get(k, k).abs();
            if akk.max(lambda) <= tol {
                return None;
            }
            let two_by_two = if akk >= alpha * lambda {
                false
            } else {
                let sigma = (k..n)
                    .filter(|&j| j != r)
                    .map(|j| m.get(r, j).abs())
                    .fold(S::zero(), S::max);
                if akk * sigma >= alpha * lambda * lambda {
                    false
                } else if m.get(r, r).abs() >= alpha * sigma {
                    m.swap_symmetric(k, r);
                    perm.swap(k, r);
                    false
                } else {
                    m.swap_symmetric(k + 1, r);
                    perm.swap(k + 1, r);
                    true
                }
            };
            if two_by_two {
                let (e11, e21, e22) = (m.get(k, k), m.get(k + 1, k), m.get(k + 1, k + 1));
                let det = e11 * e22 - e21 * e21;
                if det.abs() <= tol * (e11.abs() + e21.abs() + e22.abs()) {
                    return None;
                }
                let rest = (k + 2)..n;
                let ls: Vec<(S, S)> = rest
                    .clone()
                    .map(|i| {
                        let (c1, c2) = (m.get(i, k), m.get(i, k + 1));
                        ((c1 * e22 - c2 * e21) / det, (c2 * e11 - c1 * e21) / det)
                    })
                    .collect();
                for (ii, i) in rest.clone().enumerate() {
                    for j in rest.clone() {
                        let upd = ls[ii].0 * m.get(j, k) + ls[ii].1 * m.get(j, k + 1);
                        m.add_to(i, j, -upd);
                    }
                }
                for (ii, i) in rest.enumerate() {
                    m.set(i, k, ls[ii].0);
                    m.set(i, k + 1, ls[ii].1);
                    m.set(k, i, S::zero());
                    m.set(k + 1, i, S::zero());
                }
                blocks.push(Block::Two(k));
                k += 2;
            } else {
                let d = m.get(k, k);
                if d.abs() <= tol {
                    return None;
                }
                let ls: Vec<S> = ((k + 1)..n).map(|i| m.get(i, k) / d).collect();
                for (ii, i) in ((k + 1)..n).enumerate() {
                    for j in (k + 1)..n {
                        let upd = ls[ii] * m.get(j, k);
                        m.add_to(i, j, -upd);
                    }
                }
                for (ii, i) in ((k + 1)..n).enumerate() {
                    m.set(i, k, ls[ii]);
                    m.set(k, i, S::zero());
                }
                blocks.push(Block::One(k));
                k += 1;
            }
        }
        Some(SymmetricIndefinite {
            factors: m,
            perm,
            blocks,
        })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.factors.dim();
        let l = &self.factors;
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for blk in &self.blocks {
            let (k, width) = match *blk {
                Block::One(k) => (k, 1),
                Block::Two(k) => (k, 2),
            };
            for i in (k + width)..n {
                let mut s = l.get(i, k) * y[k];
                if width == 2 {
                    s += l.get(i, k + 1) * y[k + 1];
                }
                y[i] -= s;
            }
        }
        for blk in &self.blocks {
            match *blk {
                Block::One(k) => y[k] /= l.get(k, k),
                Block::Two(k) => {
                    let (e11, e21, e22) = (l.get(k, k), l.get(k + 1, k), l.get(k + 1, k + 1));
                    let det = e11 * e22 - e21 * e21;
                    let (r1, r2) = (y[k], y[k + 1]);
                    y[k] = (e22 * r1 - e21 * r2) / det;
                    y[k + 1] = (e11 * r2 - e21 * r1) / det;
                }
            }
        }
        for blk in self.blocks.iter().rev() {
            let (k, width) = match *blk {
                Block::One(k) => (k, 1),
                Block::Two(k) => (k, 2),
            };
            for c in k..(k + width) {
                let s: S = ((k + width)..n).map(|i| l.get(i, c) * y[i]).sum();
                y[c] -= s;
            }
        }
        let mut x = vec![S::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(a: &DenseMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x)
            .iter()
            .zip(b)
            .map(|(ax, bb)| (ax - bb).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_diagonal_needs_two_by_two() {
        // [[0, 1], [1, 0]] has no usable 1x1 pivot.
        let a = DenseMatrix::from_fn(2, |i, j| if i == j { 0.0f64 } else { 1.0 });
        let f = SymmetricIndefinite::factor(&a).unwrap();
        let x = f.solve(&[3.0, 5.0]);
        assert!((x[0] - 5.0).abs() < 1e-15 && (x[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn saddle_point_system() {
        // [[H, Aᵀ], [A, 0]] with H singular but positive definite on null(A)
        let h = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]];
        let c = [1.0, 1.0, 1.0];
        let a = DenseMatrix::from_fn(4, |i, j| match (i, j) {
            (3, 3) => 0.0,
            (3, j) => c[j],
            (i, 3) => c[i],
            (i, j) => h[i][j],
        });
        let f = SymmetricIndefinite::factor(&a).unwrap();
        let b = [1.0, 2.0, 3.0, 4.0];
        let x = f.solve(&b);
        assert!(residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = DenseMatrix::from_fn(3, |_, _| 1.0);
        assert!(SymmetricIndefinite::factor(&a).is_none());
        assert!(SymmetricIndefinite::factor(&DenseMatrix::<f64>::zeros(2)).is_none());
    }

    proptest! {
        #[test]
        fn random_symmetric_systems(
            vals in prop::collection::vec(-5.0f64..5.0, 36),
            b in prop::collection::vec(-5.0f64..5.0, 8),
            n in 1usize..=8,
        ) {
            let a = DenseMatrix::from_fn(n, |i, j| {
                let (i, j) = (i.max(j), i.min(j));
                vals[(i * (i + 1) / 2 + j) % vals.len()]
            });
            if let Some(f) = SymmetricIndefinite::factor(&a) {
                let x = f.solve(&b[..n]);
                let xnorm = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                prop_assert!(residual(&a, &x, &b[..n]) < 1e-9 * xnorm * a.max_abs().max(1.0));
            }
        }
    }
}
