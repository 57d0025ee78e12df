//! Elementary number theory shared by every layer above: factorization and
//! divisors, the multiplicative functions phi/psi/moebius, Kronecker symbols,
//! modular arithmetic and CRT, Bernoulli numbers and polynomials, and class
//! numbers h(D) of primitive positive-definite binary quadratic forms.
//!
//! Levels, discriminants and indices fit comfortably in machine integers, so the
//! functions here work on u64/i64; only Bernoulli data (which grows like k!) is
//! returned as arbitrary-precision rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::Mutex;

/// Factor `n > 0` by trial division, returning `(p, e)` pairs with increasing `p`.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "factor(0) is undefined");
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    // remaining factors are coprime to 30; step through 6k +- 1
    let mut p = 7u64;
    let mut step = 4u64; // alternates 4, 2: 7, 11, 13, 17, 19, 23, ...
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += step;
        step = 6 - step;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors of `n`, sorted increasingly.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n) {
        let base = ds.clone();
        let mut pe = 1u64;
        for _ in 0..e {
            pe *= p;
            ds.extend(base.iter().map(|d| d * pe));
        }
    }
    ds.sort_unstable();
    ds
}

/// Euler's totient.
pub fn phi(n: u64) -> u64 {
    factor(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// psi(N) = N * prod_{p | N} (1 + 1/p), the index [SL2(Z) : Gamma_0(N)].
pub fn psi(n: u64) -> u64 {
    factor(n).iter().fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

/// Moebius function, in {-1, 0, 1}.
pub fn moebius(n: u64) -> i64 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Product of the distinct primes dividing `n` (radical), with radical(1) = 1.
pub fn radical(n: u64) -> u64 {
    factor(n).iter().map(|&(p, _)| p).product()
}

/// Product of the primes dividing `n` exactly once.
pub fn exact_prime_part(n: u64) -> u64 {
    factor(n).iter().filter(|&&(_, e)| e == 1).map(|&(p, _)| p).product()
}

/// p-adic valuation of `n > 0`.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Integer square root of `n` if `n` is a perfect square.
pub fn sqrt_exact(n: u64) -> Option<u64> {
    let r = n.isqrt();
    (r * r == n).then_some(r)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    num_integer::lcm(a, b)
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g = gcd(a, b), g >= 0.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut x0, mut x1) = (1i128, 0i128);
    let (mut y0, mut y1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (r0, x0, y0) = (-r0, -x0, -y0);
    }
    (r0 as i64, x0 as i64, y0 as i64)
}

/// Inverse of `a` modulo `m > 0`, when gcd(a, m) = 1.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// a^e mod m (m > 0), via square-and-multiply in u128.
pub fn pow_mod(a: u64, mut e: u64, m: u64) -> u64 {
    assert!(m > 0);
    let m128 = m as u128;
    let mut base = (a % m) as u128;
    let mut acc = 1u128 % m128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    acc as u64
}

/// Solve x = r1 (mod m1), x = r2 (mod m2); returns (x, lcm) reduced, or None if
/// the congruences are incompatible.
pub fn crt(r1: i64, m1: i64, r2: i64, m2: i64) -> Option<(i64, i64)> {
    assert!(m1 > 0 && m2 > 0);
    let (g, p, _) = ext_gcd(m1, m2);
    if (r2 - r1).rem_euclid(g) != 0 {
        return None;
    }
    let l = m1 / g * m2;
    let diff = ((r2 - r1) / g) as i128;
    let x = (r1 as i128 + (diff * p as i128).rem_euclid((m2 / g) as i128) * m1 as i128)
        .rem_euclid(l as i128);
    Some((x as i64, l))
}

/// Multiplicative order of `a` modulo `m`, with gcd(a, m) = 1.
pub fn mult_order(a: u64, m: u64) -> u64 {
    assert_eq!(gcd(a % m, m), 1, "order of a non-unit");
    // the order divides phi(m); strip each prime of phi(m) while possible
    let mut o = phi(m);
    for (p, _) in factor(phi(m)) {
        while o % p == 0 && pow_mod(a, o / p, m) == 1 {
            o /= p;
        }
    }
    o
}

/// Primes up to and including `n`, by sieve.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return vec![];
    }
    let n = n as usize;
    let mut is_comp = vec![false; n + 1];
    let mut ps = Vec::new();
    for i in 2..=n {
        if !is_comp[i] {
            ps.push(i as u64);
            let mut j = i * i;
            while j <= n {
                is_comp[j] = true;
                j += i;
            }
        }
    }
    ps
}

/// Iterator of primes in increasing order, unbounded (trial-division test).
pub fn primes() -> impl Iterator<Item = u64> {
    (2u64..).filter(|&n| factor(n).len() == 1 && factor(n)[0].1 == 1)
}

/// Kronecker symbol (a / n), extended to all integers.
pub fn kronecker(mut a: i64, mut n: i64) -> i64 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut sign = 1i64;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    // (a/2^v) factor: (a/2) = (2/a) = (-1)^((a^2-1)/8) for odd a
    let v = n.trailing_zeros();
    n >>= v;
    if v % 2 == 1 {
        let am8 = a.rem_euclid(8);
        if am8 == 3 || am8 == 5 {
            sign = -sign;
        }
    }
    a = a.rem_euclid(n);
    // now n odd positive, 0 <= a < n: standard Jacobi loop
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            let nm8 = n % 8;
            if nm8 == 3 || nm8 == 5 {
                sign = -sign;
            }
        }
        // quadratic reciprocity for odd positive a, n
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Binomial coefficient C(n, k) as a bigint.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn big_rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

static BERNOULLI: Mutex<Vec<BigRational>> = Mutex::new(Vec::new());

/// Bernoulli number B_k with the convention B_1 = -1/2.
pub fn bernoulli(k: usize) -> BigRational {
    let mut cache = BERNOULLI.lock().unwrap();
    if cache.is_empty() {
        cache.push(BigRational::one());
    }
    while cache.len() <= k {
        let m = cache.len(); // computing B_m from sum_{j<m} C(m+1, j) B_j = 0
        let mut s = BigRational::zero();
        for (j, b) in cache.iter().enumerate() {
            s += BigRational::from(binomial(m as u64 + 1, j as u64)) * b;
        }
        let bm = -s / BigRational::from(BigInt::from(m as u64 + 1));
        cache.push(bm);
    }
    cache[k].clone()
}

/// Bernoulli polynomial value B_k(x) = sum_j C(k, j) B_j x^(k-j).
pub fn bernoulli_poly(k: usize, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut xpow = BigRational::one();
    // accumulate from j = k down to 0 so xpow tracks x^(k-j)
    for j in (0..=k).rev() {
        acc += BigRational::from(binomial(k as u64, j as u64)) * bernoulli(j) * &xpow;
        xpow *= x;
    }
    acc
}

/// Number of units of the imaginary quadratic order of discriminant d < 0:
/// 6 for d = -3, 4 for d = -4, otherwise 2.
pub fn unit_count(d: i64) -> u64 {
    match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

static CLASS_CACHE: Mutex<Option<HashMap<i64, u64>>> = Mutex::new(None);

/// Class number h(d) of primitive reduced forms a x^2 + b x y + c y^2 of
/// discriminant d = b^2 - 4ac < 0 (d = 0 or 1 mod 4).
///
/// A form is reduced when |b| <= a <= c, with b >= 0 if |b| = a or a = c; it is
/// primitive when gcd(a, b, c) = 1.  Enumeration runs over b = d mod 2 with
/// b^2 <= |d|/3 and factors (b^2 - d)/4 = a c.
pub fn class_number(d: i64) -> u64 {
    assert!(d < 0 && (d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1), "bad discriminant {d}");
    if let Some(cache) = CLASS_CACHE.lock().unwrap().as_ref() {
        if let Some(&h) = cache.get(&d) {
            return h;
        }
    }
    let mut h = 0u64;
    let mut b = if d.rem_euclid(2) == 0 { 0i64 } else { 1i64 };
    while 3 * b * b <= -d {
        let m = (b * b - d) / 4; // = a*c, a >= max(b, 1)
        for a in divisors(m as u64) {
            let a = a as i64;
            if a * a > m {
                break;
            }
            if a < b.max(1) {
                continue;
            }
            let c = m / a;
            if gcd(gcd(a as u64, b as u64), c as u64) != 1 {
                continue;
            }
            // (a, b, c) with 0 <= b <= a <= c; the mirror (a, -b, c) is a distinct
            // reduced form unless b = 0, b = a or a = c.
            h += if b == 0 || b == a || a == c { 1 } else { 2 };
        }
        b += 2;
    }
    let mut guard = CLASS_CACHE.lock().unwrap();
    guard.get_or_insert_with(HashMap::new).insert(d, h);
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_small() {
        assert!(factor(1).is_empty());
        assert_eq!(factor(96), vec![(2, 5), (3, 1)]);
        assert_eq!(factor(633), vec![(3, 1), (211, 1)]);
        assert_eq!(factor(148), vec![(2, 2), (37, 1)]);
        assert_eq!(factor(10_000_019), vec![(10_000_019, 1)]);
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(28), vec![1, 2, 4, 7, 14, 28]);
        assert_eq!(divisors(96).len(), 12);
    }

    #[test]
    fn multiplicative_functions() {
        assert_eq!(phi(1), 1);
        assert_eq!(phi(148), 72);
        assert_eq!(psi(1), 1);
        assert_eq!(psi(96), 192);
        assert_eq!(psi(11), 12);
        assert_eq!(moebius(1), 1);
        assert_eq!(moebius(30), -1);
        assert_eq!(moebius(12), 0);
        assert_eq!(exact_prime_part(96), 3);
        assert_eq!(exact_prime_part(60), 15);
    }

    #[test]
    fn modular_arithmetic() {
        assert_eq!(pow_mod(2, 10, 1000), 24);
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
        assert_eq!(crt(1, 3, 2, 5), Some((7, 15)));
        assert_eq!(crt(1, 4, 3, 6), Some((9, 12)));
        assert_eq!(crt(1, 4, 2, 6), None);
        assert_eq!(crt(3, 4, 3, 6), Some((3, 12)));
        assert_eq!(mult_order(2, 7), 3);
        assert_eq!(mult_order(5, 32), 8);
    }

    #[test]
    fn kronecker_agrees_with_euler_criterion() {
        for p in primes_up_to(200).into_iter().skip(1) {
            for a in -30i64..30 {
                let e = pow_mod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
                let want = if e == 0 {
                    0
                } else if e == 1 {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(a, p as i64), want, "({a}/{p})");
            }
        }
    }

    #[test]
    fn kronecker_edge_cases() {
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(2, 0), 0);
        assert_eq!(kronecker(0, 1), 1);
        assert_eq!(kronecker(-4, 7), kronecker(3, 7));
        // (-4/.) is the character of conductor 4: period 4, values 0,1,0,-1
        for n in [1i64, 5, 13] {
            assert_eq!(kronecker(-4, n), 1);
        }
        for n in [3i64, 7, 11] {
            assert_eq!(kronecker(-4, n), -1);
        }
        // (12/.) = (3/.) character mod 12
        assert_eq!(kronecker(12, 1), 1);
        assert_eq!(kronecker(12, 5), -1);
        assert_eq!(kronecker(12, 7), -1);
        assert_eq!(kronecker(12, 11), 1);
    }

    #[test]
    fn kronecker_multiplicative_in_both_arguments() {
        for a in -20i64..=20 {
            for b in -20i64..=20 {
                for n in 1i64..=20 {
                    assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
                }
            }
        }
    }

    #[test]
    fn bernoulli_numbers() {
        assert_eq!(bernoulli(0), big_rat(1, 1));
        assert_eq!(bernoulli(1), big_rat(-1, 2));
        assert_eq!(bernoulli(2), big_rat(1, 6));
        assert_eq!(bernoulli(3), big_rat(0, 1));
        assert_eq!(bernoulli(12), big_rat(-691, 2730));
        // B_k(1) - B_k(0) = 0 for k >= 2, and B_k(1/2) = (2^(1-k) - 1) B_k
        for k in 2..=10 {
            let at0 = bernoulli_poly(k, &big_rat(0, 1));
            let at1 = bernoulli_poly(k, &big_rat(1, 1));
            assert_eq!(at0, at1);
            let half = bernoulli_poly(k, &big_rat(1, 2));
            let scale = big_rat(2, 1).pow(1 - k as i32) - big_rat(1, 1);
            assert_eq!(half, scale * bernoulli(k));
        }
    }

    #[test]
    fn class_numbers_small() {
        let table = [
            (-3, 1),
            (-4, 1),
            (-7, 1),
            (-8, 1),
            (-11, 1),
            (-12, 1), // primitive count: (1,0,3) only; 2*(x^2+xy+y^2) is imprimitive
            (-15, 2),
            (-16, 1),
            (-19, 1),
            (-20, 2),
            (-23, 3),
            (-24, 2),
            (-27, 1),
            (-28, 1),
            (-31, 3),
            (-32, 2),
            (-40, 2),
            (-47, 5),
            (-71, 7),
            (-163, 1),
            (-9999, 88),
            (-10000, 20),
        ];
        for (d, h) in table {
            assert_eq!(class_number(d), h, "h({d})");
        }
    }

    #[test]
    fn hurwitz_weights_from_primitive_class_numbers() {
        // H(|d|) = 2 * sum over f^2 | d with d/f^2 = 0, 1 mod 4 of h(d/f^2)/w(d/f^2)
        // reproduces the Hurwitz class numbers 1/3, 1/2, 1, 1, 1, 4/3, 2, 3/2, ...
        let hurwitz = |n: i64| -> BigRational {
            let mut acc = BigRational::zero();
            for f in 1..=n {
                if f * f > n {
                    break;
                }
                if n % (f * f) != 0 {
                    continue;
                }
                let d = -(n / (f * f));
                if d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1 {
                    acc += big_rat(class_number(d) as i64, unit_count(d) as i64);
                }
            }
            acc * big_rat(2, 1)
        };
        let table = [
            (3, big_rat(1, 3)),
            (4, big_rat(1, 2)),
            (7, big_rat(1, 1)),
            (8, big_rat(1, 1)),
            (11, big_rat(1, 1)),
            (12, big_rat(4, 3)),
            (15, big_rat(2, 1)),
            (16, big_rat(3, 2)),
            (19, big_rat(1, 1)),
            (20, big_rat(2, 1)),
            (23, big_rat(3, 1)),
            (24, big_rat(2, 1)),
        ];
        for (n, h) in table {
            assert_eq!(hurwitz(n), h, "H({n})");
        }
    }
}
