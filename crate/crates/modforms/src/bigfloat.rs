//! Arbitrary-precision real/complex helpers on top of MPFR/MPC (`rug`),
//! plus the two special functions the analytic layer needs that MPC lacks:
//! the Gamma function of a complex argument (Stirling series with argument
//! shift) and the upper incomplete Gamma function Gamma(s, x) for complex s
//! and real x > 0 (Legendre continued fraction for large x, lower series
//! otherwise).

use crate::arith;
use num_rational::BigRational;
use rug::float::Constant;
use rug::{Complex, Float, Integer};
use std::str::FromStr;

/// Exact conversion of a big rational to a float at `prec` bits.
pub fn rat_to_float(r: &BigRational, prec: u32) -> Float {
    let n = Integer::from_str(&r.numer().to_string()).unwrap();
    let d = Integer::from_str(&r.denom().to_string()).unwrap();
    Float::with_val(prec, n) / Float::with_val(prec, d)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn cplx(prec: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

/// |z| as a Float.
pub fn cabs(z: &Complex) -> Float {
    z.clone().abs().into_real_imag().0
}

/// exp(2 pi i x) for real x.
pub fn exp_2pi_i(x: &Float, prec: u32) -> Complex {
    let ang = Float::with_val(prec, 2 * x.clone() * pi(prec));
    Complex::with_val(prec, (ang.clone().cos(), ang.sin()))
}

/// Arithmetic-geometric mean of positive reals.
pub fn agm(a: &Float, b: &Float, prec: u32) -> Float {
    let mut x = Float::with_val(prec, a);
    let mut y = Float::with_val(prec, b);
    loop {
        let xn = Float::with_val(prec, &x + &y) / 2u32;
        let yn = Float::with_val(prec, &x * &y).sqrt();
        let close = {
            let d = Float::with_val(prec, &xn - &yn).abs();
            let scale = Float::with_val(prec, xn.clone().abs());
            d <= scale >> (prec - 8)
        };
        x = xn;
        y = yn;
        if close {
            return x;
        }
    }
}

/// Gamma(z) for complex z (not a pole), via the Stirling asymptotic series
/// after shifting z to have large real part.
pub fn gamma(z: &Complex, prec: u32) -> Complex {
    let wp = prec + 32;
    // shift until Re(w) >= r; the Stirling remainder then drops below 2^-wp
    // once terms are taken to j ~ pi*r (terms decay geometrically before that)
    let r = (wp as f64) * 0.125 + 16.0;
    let re = z.real().to_f64();
    let shift = if re < r { (r - re).ceil() as u32 } else { 0 };
    let w = Complex::with_val(wp, z) + shift;

    // ln Gamma(w) = (w - 1/2) ln w - w + ln(2 pi)/2 + sum B_2j / (2j(2j-1) w^(2j-1))
    let ln_w = w.clone().ln();
    let mut acc = (w.clone() - 0.5f64) * &ln_w - &w;
    let two_pi = pi(wp) * 2u32;
    acc += two_pi.ln() / 2u32;

    let winv2 = (w.clone() * &w).recip();
    let mut wpow = w.clone().recip(); // w^-(2j-1)
    let eps = Float::with_val(wp, 1) >> wp;
    let mut last = Float::with_val(wp, f64::INFINITY);
    for j in 1..400u32 {
        let b = rat_to_float(&arith::bernoulli(2 * j as usize), wp);
        let coeff = b / Float::with_val(wp, 2 * j * (2 * j - 1));
        let term = Complex::with_val(wp, &wpow) * coeff;
        let mag = cabs(&term);
        acc += &term;
        if mag < eps {
            break;
        }
        assert!(mag <= last, "Stirling series diverging: |z| too small for precision");
        last = mag;
        wpow *= &winv2;
    }
    let mut g = acc.exp();
    // undo the shift: Gamma(z) = Gamma(z + n) / (z (z+1) ... (z+n-1))
    if shift > 0 {
        let mut den = Complex::with_val(wp, 1);
        for j in 0..shift {
            den *= Complex::with_val(wp, z) + j;
        }
        g /= den;
    }
    Complex::with_val(prec, g)
}

/// Upper incomplete Gamma(s, x) = int_x^infty t^(s-1) e^-t dt for complex s and
/// real x > 0, continued analytically in s.
pub fn upper_gamma(s: &Complex, x: &Float, prec: u32) -> Complex {
    let sx = cabs(s).to_f64();
    let xf = x.to_f64();
    if xf > sx + 4.0 {
        upper_gamma_cf(s, x, prec)
    } else {
        // Gamma(s) - lower series
        let wp = prec + 32 + (2.0 * xf) as u32;
        let g = gamma(&Complex::with_val(wp, s), wp);
        let lower = lower_gamma_series(&Complex::with_val(wp, s), &Float::with_val(wp, x), wp);
        Complex::with_val(prec, g - lower)
    }
}

/// gamma(s, x) = x^s e^-x sum_{n>=0} x^n / (s (s+1) ... (s+n)).
fn lower_gamma_series(s: &Complex, x: &Float, wp: u32) -> Complex {
    let mut den = s.clone(); // s (s+1) ... (s+n)
    let mut term = den.clone().recip();
    let mut acc = term.clone();
    let eps = Float::with_val(wp, 1) >> (wp - 8);
    for _ in 1..100_000u32 {
        den += 1u32;
        term *= x;
        term /= &den;
        acc += &term;
        if cabs(&term) < cabs(&acc) * &eps {
            break;
        }
    }
    // x^s = exp(s ln x), real x > 0
    let xs = (Complex::with_val(wp, s) * x.clone().ln()).exp();
    let emx = Float::with_val(wp, -x.clone()).exp();
    acc * xs * emx
}

/// Legendre continued fraction, evaluated by the modified Lentz algorithm:
/// Gamma(s,x) = e^-x x^s / (x + 1 - s - 1(1-s)/(x + 3 - s - 2(2-s)/(x + 5 - s - ...)))
fn upper_gamma_cf(s: &Complex, x: &Float, prec: u32) -> Complex {
    let wp = prec + 32;
    let tiny = Float::with_val(wp, 1) >> (wp * 2);
    let eps = Float::with_val(wp, 1) >> (wp - 4);
    let b0 = Complex::with_val(wp, x) + 1u32 - s;
    let mut f = if cabs(&b0).is_zero() { Complex::with_val(wp, &tiny) } else { b0 };
    let mut c = f.clone();
    let mut d = Complex::with_val(wp, 0);
    for n in 1..100_000u32 {
        let an = (Complex::with_val(wp, s) - n) * n; // a_n = n (s - n)
        let bn = Complex::with_val(wp, x) + (2 * n + 1) - s;
        d = &bn + &an * d;
        if cabs(&d).is_zero() {
            d = Complex::with_val(wp, &tiny);
        }
        c = &bn + &an * c.recip();
        if cabs(&c).is_zero() {
            c = Complex::with_val(wp, &tiny);
        }
        d = d.recip();
        let delta = Complex::with_val(wp, &c * &d);
        f *= &delta;
        if cabs(&(delta - 1u32)) < eps {
            break;
        }
    }
    let xs = (Complex::with_val(wp, s) * x.clone().ln()).exp();
    let emx = Float::with_val(wp, -x.clone()).exp();
    Complex::with_val(prec, xs * emx / f)
}

/// Relative closeness |a - b| <= 10^-digits * max(1, |a|), for tests and
/// verification passes.
pub fn close(a: &Complex, b: &Complex, digits: u32) -> bool {
    use rug::ops::Pow;
    let prec = a.prec().0.max(b.prec().0);
    let diff = cabs(&Complex::with_val(prec, a - b));
    let scale = cabs(a).max(&Float::with_val(prec, 1));
    let tol = Float::with_val(prec, 10).pow(-(digits as i32)) * scale;
    diff <= tol
}
