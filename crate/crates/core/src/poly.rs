//! Dense univariate polynomials with real coefficients.
//!
//! Coefficients are stored in ascending order (`c[0] + c[1] t + ...`). The
//! representation is kept trimmed: the last stored coefficient is non-zero
//! unless the polynomial is identically zero, in which case no coefficients
//! are stored at all.

use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Real;

type Coeffs<S> = SmallVec<[S; 12]>;

/// Leading coefficients smaller than this fraction of the largest one are
/// dropped before root finding.
const LEADING_STRIP_RATIO: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly<S> {
    coeffs: Coeffs<S>,
}

impl<S: Real> Poly<S> {
    pub fn new<I: IntoIterator<Item = S>>(coeffs: I) -> Self {
        let mut p = Poly {
            coeffs: coeffs.into_iter().collect(),
        };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly {
            coeffs: Coeffs::new(),
        }
    }

    pub fn constant(c: S) -> Self {
        Self::new([c])
    }

    /// `t - root`
    pub fn linear_factor(root: S) -> Self {
        Self::new([-root, S::one()])
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `t^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).copied().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, &c| acc * t + c)
    }

    /// Value and first derivative in a single Horner pass.
    pub fn eval_with_derivative(&self, t: S) -> (S, S) {
        let mut p = S::zero();
        let mut dp = S::zero();
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * S::from_count(k)),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self::new(
            std::iter::once(S::zero()).chain(
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| c / S::from_count(k + 1)),
            ),
        )
    }

    pub fn scale(&self, s: S) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s))
    }

    /// `q(t) = p(t + tau)`.
    pub fn shift(&self, tau: S) -> Self {
        let mut out: Coeffs<S> = SmallVec::from_elem(S::zero(), self.coeffs.len());
        // Horner with polynomial accumulator: q <- q * (t + tau) + c_k
        for &c in self.coeffs.iter().rev() {
            for j in (1..out.len()).rev() {
                out[j] = out[j - 1] + out[j] * tau;
            }
            if !out.is_empty() {
                out[0] = out[0] * tau + c;
            }
        }
        Self::new(out)
    }

    /// `q(s) = p(h s)`.
    pub fn scale_argument(&self, h: S) -> Self {
        let mut hk = S::one();
        Self::new(self.coeffs.iter().map(|&c| {
            let v = c * hk;
            hk *= h;
            v
        }))
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Closed-form `∫_0^T p(t)^2 dt`.
    pub fn integral_of_square(&self, duration: S) -> S {
        let n = self.coeffs.len();
        let mut total = S::zero();
        for i in 0..n {
            for j in 0..n {
                let k = i + j + 1;
                total += self.coeffs[i] * self.coeffs[j] * duration.powi(k as i32)
                    / S::from_count(k);
            }
        }
        total.max(S::zero())
    }

    /// Conservative `[min, max]` enclosure of `p` over `[lo, hi]` from the
    /// convex hull of its Bernstein coefficients.
    pub fn range_bound(&self, lo: S, hi: S) -> (S, S) {
        if self.is_zero() {
            return (S::zero(), S::zero());
        }
        let q = self.shift(lo).scale_argument(hi - lo);
        let n = self.degree();
        let mut min = S::infinity();
        let mut max = S::neg_infinity();
        for j in 0..=n {
            let mut b = S::zero();
            for k in 0..=j {
                b += q.coeff(k) * S::from_count(binomial(j, k)) / S::from_count(binomial(n, k));
            }
            min = min.min(b);
            max = max.max(b);
        }
        (min, max)
    }

    /// All real roots, unordered duplicates removed.
    ///
    /// Coefficients are normalized by the largest magnitude and numerically
    /// vanishing leading terms are stripped before isolation.
    pub fn real_roots(&self) -> Result<Vec<S>> {
        let max_abs = self
            .coeffs
            .iter()
            .fold(S::zero(), |m, &c| m.max(c.abs()));
        if !(max_abs > S::min_positive_value()) {
            return Err(Error::DegenerateInput);
        }
        let strip = S::lit(LEADING_STRIP_RATIO);
        let mut c: Vec<S> = self.coeffs.iter().map(|&c| c / max_abs).collect();
        while c.len() > 1 && c.last().is_some_and(|l| l.abs() < strip) {
            c.pop();
        }
        let mut roots = Vec::new();
        let zeros = c.iter().take_while(|x| x.is_zero()).count();
        if zeros > 0 {
            roots.push(S::zero());
            c.drain(..zeros);
        }
        let reduced = Poly::new(c);
        if reduced.degree() == 0 {
            return Ok(roots);
        }
        let lead = reduced.coeff(reduced.degree()).abs();
        let bound = S::one()
            + reduced.coeffs[..reduced.degree()]
                .iter()
                .fold(S::zero(), |m, &c| m.max(c.abs() / lead));
        roots.extend(reduced.real_roots_in(-bound, bound));
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(dedup_close(roots))
    }

    /// Sorted real roots inside the closed interval `[lo, hi]`.
    ///
    /// Roots are isolated by recursion on the derivative: between two
    /// consecutive critical points the polynomial is monotone, so each sign
    /// change brackets exactly one root. Critical points at which the value is
    /// within rounding noise of zero are reported as (even-multiplicity) roots.
    pub fn real_roots_in(&self, lo: S, hi: S) -> Vec<S> {
        if self.is_zero() || !(lo <= hi) {
            return Vec::new();
        }
        let roots = isolate(self, lo, hi);
        dedup_close(roots)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn dedup_close<S: Real>(mut roots: Vec<S>) -> Vec<S> {
    let tol = S::epsilon().sqrt() * S::lit(0.1);
    roots.dedup_by(|b, a| (*b - *a).abs() <= tol * S::one().max(a.abs()));
    roots
}

/// Bound on the rounding error of Horner evaluation at `t`.
fn eval_noise<S: Real>(p: &Poly<S>, t: S) -> S {
    let at = t.abs();
    let mag = p
        .coeffs
        .iter()
        .rev()
        .fold(S::zero(), |acc, &c| acc * at + c.abs());
    mag * S::epsilon() * S::lit(32.0)
}

fn isolate<S: Real>(p: &Poly<S>, lo: S, hi: S) -> Vec<S> {
    match p.degree() {
        0 => Vec::new(),
        1 => {
            let r = -p.coeffs[0] / p.coeffs[1];
            if r >= lo && r <= hi {
                vec![r]
            } else {
                Vec::new()
            }
        }
        2 => quadratic_roots(p.coeffs[0], p.coeffs[1], p.coeffs[2])
            .into_iter()
            .filter(|r| *r >= lo && *r <= hi)
            .collect(),
        _ => {
            let dp = p.derivative();
            let crit = isolate(&dp, lo, hi);
            let mut nodes: Vec<S> = Vec::with_capacity(crit.len() + 2);
            nodes.push(lo);
            nodes.extend(crit.iter().copied().filter(|&c| c > lo && c < hi));
            nodes.push(hi);
            let values: Vec<S> = nodes.iter().map(|&x| p.eval(x)).collect();
            let mut roots = Vec::new();
            for k in 0..nodes.len() {
                let (x, f) = (nodes[k], values[k]);
                let interior = k > 0 && k + 1 < nodes.len();
                if f.is_zero() || (interior && f.abs() <= eval_noise(p, x)) {
                    roots.push(x);
                    continue;
                }
                if k + 1 < nodes.len() {
                    let fn_ = values[k + 1];
                    if !fn_.is_zero() && (f < S::zero()) != (fn_ < S::zero()) {
                        roots.push(bracketed_root(p, &dp, x, nodes[k + 1], f));
                    }
                }
            }
            roots
        }
    }
}

fn quadratic_roots<S: Real>(c: S, b: S, a: S) -> Vec<S> {
    let two = S::lit(2.0);
    let disc = b * b - S::lit(4.0) * a * c;
    let noise = S::epsilon() * S::lit(16.0) * (b * b + (S::lit(4.0) * a * c).abs());
    if disc < -noise {
        return Vec::new();
    }
    if disc <= noise {
        return vec![-b / (two * a)];
    }
    let sq = disc.sqrt();
    // Citardauq form avoids cancellation in the smaller root.
    let q = -(b + b.signum() * sq) / two;
    let mut r = vec![q / a, c / q];
    if q.is_zero() {
        r = vec![sq / (two * a), -sq / (two * a)];
    }
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

/// Safeguarded Newton iteration on a sign-change bracket.
fn bracketed_root<S: Real>(p: &Poly<S>, dp: &Poly<S>, a: S, b: S, fa: S) -> S {
    let half = S::lit(0.5);
    let (mut xl, mut xh) = if fa < S::zero() { (a, b) } else { (b, a) };
    let mut x = half * (a + b);
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let mut f = p.eval(x);
    let mut df = dp.eval(x);
    if f.is_zero() {
        return x;
    }
    if f < S::zero() {
        xl = x;
    } else {
        xh = x;
    }
    for _ in 0..200 {
        let newton_escapes = ((x - xh) * df - f) * ((x - xl) * df - f) > S::zero();
        let slow = (f * S::lit(2.0)).abs() > (dx_old * df).abs();
        if newton_escapes || slow || df.is_zero() {
            dx_old = dx;
            dx = half * (xh - xl);
            let prev = x;
            x = xl + dx;
            if x == prev || x == xl {
                break;
            }
        } else {
            dx_old = dx;
            dx = f / df;
            let prev = x;
            x -= dx;
            if x == prev {
                break;
            }
        }
        if dx.abs() <= S::epsilon() * S::lit(2.0) * S::one().max(x.abs()) {
            break;
        }
        f = p.eval(x);
        if f.is_zero() {
            break;
        }
        df = dp.eval(x);
        if f < S::zero() {
            xl = x;
        } else {
            xh = x;
        }
    }
    x
}

impl<S: Real> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, rhs: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)))
    }
}

impl<S: Real> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, rhs: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)))
    }
}

impl<S: Real> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, rhs: &Poly<S>) -> Poly<S> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out: Coeffs<S> =
            SmallVec::from_elem(S::zero(), self.coeffs.len() + rhs.coeffs.len() - 1);
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl<S: Real> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        self.scale(-S::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<S: Real> $tr for Poly<S> {
            type Output = Poly<S>;
            fn $m(self, rhs: Poly<S>) -> Poly<S> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
