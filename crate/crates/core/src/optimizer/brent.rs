//! Bounded scalar minimization: Brent's method (parabolic interpolation with
//! golden-section safeguarding) on a closed interval.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum<S> {
    pub x: S,
    pub value: S,
    pub evaluations: usize,
}

/// Local minimizer of `f` on `[a, b]` to absolute tolerance `xtol`.
///
/// Deterministic: the sequence of evaluation points depends only on `f`'s
/// values. Non-finite values are treated as `+∞`.
pub fn minimize_bounded<S: Real>(
    mut f: impl FnMut(S) -> S,
    mut a: S,
    mut b: S,
    xtol: S,
    max_evaluations: usize,
) -> Minimum<S> {
    let mut eval = |x: S| {
        let v = f(x);
        if v.is_nan() {
            S::infinity()
        } else {
            v
        }
    };
    let half = S::lit(0.5);
    let two = S::lit(2.0);
    let third = S::one() / S::lit(3.0);
    let golden = half * (S::lit(3.0) - S::lit(5.0).sqrt());
    let sqrt_eps = S::epsilon().sqrt();

    let mut fulc = a + golden * (b - a);
    let (mut nfc, mut xf) = (fulc, fulc);
    let (mut rat, mut e) = (S::zero(), S::zero());
    let mut fx = eval(xf);
    let mut evaluations = 1;
    let (mut ffulc, mut fnfc) = (fx, fx);
    let mut xm = half * (a + b);
    let mut tol1 = sqrt_eps * xf.abs() + xtol * third;
    let mut tol2 = two * tol1;
    let sign = |v: S| if v < S::zero() { -S::one() } else { S::one() };

    while (xf - xm).abs() > tol2 - half * (b - a) && evaluations < max_evaluations {
        let mut use_golden = true;
        if e.abs() > tol1 {
            let mut r = (xf - nfc) * (fx - ffulc);
            let mut q = (xf - fulc) * (fx - fnfc);
            let mut p = (xf - fulc) * q - (xf - nfc) * r;
            q = two * (q - r);
            if q > S::zero() {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = rat;
            if p.abs() < (half * q * r).abs() && p > q * (a - xf) && p < q * (b - xf) {
                rat = p / q;
                let x = xf + rat;
                use_golden = false;
                if (x - a) < tol2 || (b - x) < tol2 {
                    rat = tol1 * sign(xm - xf);
                }
            }
        }
        if use_golden {
            e = if xf >= xm { a - xf } else { b - xf };
            rat = golden * e;
        }
        let x = xf + sign(rat) * rat.abs().max(tol1);
        let fu = eval(x);
        evaluations += 1;
        if fu <= fx {
            if x >= xf {
                a = xf;
            } else {
                b = xf;
            }
            fulc = nfc;
            ffulc = fnfc;
            nfc = xf;
            fnfc = fx;
            xf = x;
            fx = fu;
        } else {
            if x < xf {
                a = x;
            } else {
                b = x;
            }
            if fu <= fnfc || nfc == xf {
                fulc = nfc;
                ffulc = fnfc;
                nfc = x;
                fnfc = fu;
            } else if fu <= ffulc || fulc == xf || fulc == nfc {
                fulc = x;
                ffulc = fu;
            }
        }
        xm = half * (a + b);
        tol1 = sqrt_eps * xf.abs() + xtol * third;
        tol2 = two * tol1;
    }
    Minimum {
        x: xf,
        value: fx,
        evaluations,
    }
}
