//! Traces of Hecke operators on spaces of cusp forms.
//!
//! The trace of T(n) on S_k(Gamma_0(N), chi) is computed by the classical
//! four-term formula
//!
//!     Tr T(n) = A1 - A2 - A3 + A4
//!
//! where A1 is the identity contribution (square n only), A2 runs over
//! elliptic conjugacy classes (t^2 < 4n) weighted by class numbers of
//! imaginary quadratic orders, A3 runs over hyperbolic classes d | n with
//! d^2 <= n, and A4 is the weight-2 correction for the trivial character.
//! Values are exact cyclotomic numbers in Q(zeta_ord(chi)).
//!
//! Traces on the new subspace are obtained from the full traces by Moebius-like
//! inversion across levels M with cond(chi) | M | N, with a divisor sum over
//! d^2 | n twisting by chi(d) d^(k-1).
//!
//! Everything here is memoized: the same (N, k, chi, n) is requested over and
//! over while building spaces and Hecke matrices.

use crate::arith::{
    class_number, divisors, factor, gcd, phi, psi, sqrt_exact, unit_count,
};
use crate::cyclotomic::Cyc;
use crate::dirichlet::DirichletCharacter;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

type Key = (u64, u32, u64, u64, bool);
static MEMO: std::sync::OnceLock<Mutex<HashMap<Key, Cyc>>> = std::sync::OnceLock::new();

fn memo() -> &'static Mutex<HashMap<Key, Cyc>> {
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Trace of T(n) on the full cusp space S_k(Gamma_0(N), chi), for k >= 2.
/// The character must have modulus N.  Returns 0 whenever chi(-1) != (-1)^k.
pub fn trace_cusp(level: u64, weight: u32, chi: &DirichletCharacter, n: u64) -> Cyc {
    assert!(weight >= 2, "trace formula needs weight >= 2");
    assert_eq!(chi.modulus(), level, "character modulus must equal the level");
    assert!(n >= 1);
    let key = (level, weight, chi.conrey_index(), n, false);
    if let Some(v) = memo().lock().unwrap().get(&key) {
        return v.clone();
    }
    let v = trace_cusp_uncached(level, weight, chi, n);
    memo().lock().unwrap().insert(key, v.clone());
    v
}

fn trace_cusp_uncached(level: u64, weight: u32, chi: &DirichletCharacter, n: u64) -> Cyc {
    let (nn, k) = (level as i64, weight);
    // parity: the space is zero unless chi(-1) = (-1)^k
    let even_k = k % 2 == 0;
    if chi.is_even() != even_k {
        return Cyc::zero();
    }

    // A1: identity class, present only for square n
    let mut a1 = Cyc::zero();
    if let Some(s) = sqrt_exact(n) {
        let val = chi.value(s as i64);
        if !val.is_zero() {
            let fac = BigRational::from(BigInt::from(s).pow(k - 2))
                * crate::arith::big_rat((k - 1) as i64, 12)
                * BigRational::from(BigInt::from(psi(level)));
            a1 = val.scale(&fac);
        }
    }

    // A2: elliptic classes
    let mut a2 = Cyc::zero();
    let mut t: i64 = 0;
    while t * t < 4 * n as i64 {
        let signs: &[i64] = if t == 0 { &[0] } else { &[1, -1] };
        for &sg in signs {
            let tt = sg * t;
            if t == 0 && sg != 0 {
                continue;
            }
            let disc = tt * tt - 4 * n as i64; // negative
            let p_k = gegenbauer(k, tt, n as i64);
            let mut inner = Cyc::zero();
            let mut f: i64 = 1;
            while f * f <= -disc {
                if disc % (f * f) == 0 {
                    let d2 = disc / (f * f);
                    if d2.rem_euclid(4) <= 1 {
                        let g = gcd(level, f as u64);
                        let mut mu = BigRational::from(BigInt::from(g));
                        for (p, _) in factor(level) {
                            if (level / g) % p != 0 {
                                mu *= crate::arith::big_rat((p + 1) as i64, p as i64);
                            }
                        }
                        let hw = crate::arith::big_rat(
                            class_number(d2) as i64,
                            unit_count(d2) as i64,
                        );
                        // distinct x mod N admitting a lift to a root mod N*g
                        let xs: HashSet<u64> = solve_quadratic_mod(tt, n as i64, level * g)
                            .into_iter()
                            .map(|x| x % level.max(1))
                            .collect();
                        let sx = char_sum(chi, xs.iter().copied());
                        inner = inner.add(&sx.scale(&(hw * mu)));
                    }
                }
                f += 1;
            }
            a2 = a2.add(&inner.scale(&p_k));
        }
        t += 1;
    }

    // A3: hyperbolic classes
    let mut a3 = Cyc::zero();
    let fchi = chi.conductor();
    for d in divisors(n) {
        if d * d > n {
            continue;
        }
        let half = if d * d == n {
            crate::arith::big_rat(1, 2)
        } else {
            BigRational::one()
        };
        let mut inner = Cyc::zero();
        for c in divisors(level) {
            let g1 = gcd(c, level / c);
            let diff = (n / d) as i64 - d as i64;
            let cond = gcd(level / fchi, diff.unsigned_abs());
            if g1 != 0 && cond % g1 != 0 {
                continue;
            }
            // x1 mod N/g1: x1 = d (mod c), x1 = n/d (mod N/c)
            let m = level / g1;
            let (x1, _) = crate::arith::crt(
                (d % c.max(1)) as i64,
                c as i64,
                ((n / d) % (level / c).max(1)) as i64,
                (level / c) as i64,
            )
            .expect("crt consistency guaranteed by the g1 divisibility test");
            let x1 = x1.rem_euclid(m as i64) as u64;
            let cv = if gcd(x1, m) > 1 {
                Cyc::zero()
            } else {
                // lift x1 to a residue coprime to N; the character value does
                // not depend on the chosen lift since cond(chi) | m
                let mut xl = x1;
                while gcd(xl, level) > 1 {
                    xl += m;
                }
                chi.value(xl as i64)
            };
            inner = inner.add(&cv.scale(&BigRational::from(BigInt::from(phi(g1)))));
        }
        let fac = half * BigRational::from(BigInt::from(d).pow(k - 1));
        a3 = a3.add(&inner.scale(&fac));
    }

    // A4: weight-2 main-term correction (trivial character only)
    let mut a4 = Cyc::zero();
    if k == 2 && chi.order() == 1 {
        let s: u64 = divisors(n).into_iter().filter(|t4| gcd(n / t4, level) == 1).sum();
        a4 = Cyc::from_rat(BigRational::from(BigInt::from(s)));
    }

    let _ = nn;
    a1.sub(&a2).sub(&a3).add(&a4)
}

/// Trace of T(n) on the new subspace of S_k(Gamma_0(N), chi).
pub fn trace_new(level: u64, weight: u32, chi: &DirichletCharacter, n: u64) -> Cyc {
    let key = (level, weight, chi.conrey_index(), n, true);
    if let Some(v) = memo().lock().unwrap().get(&key) {
        return v.clone();
    }
    let f = chi.conductor();
    // product of the primes dividing N exactly once
    let mut n1 = 1u64;
    for (p, e) in factor(level) {
        if e == 1 {
            n1 *= p;
        }
    }
    let prim = chi.to_primitive();
    let mut tot = Cyc::zero();
    for m_lev in divisors(level) {
        if m_lev % f != 0 {
            continue;
        }
        for d in divisors(gcd(m_lev / f, n1)) {
            if n % (d * d) != 0 {
                continue;
            }
            let cd = prim.value(d as i64);
            if cd.is_zero() {
                continue;
            }
            let b = beta_m(n / (d * d), level / m_lev);
            if b == 0 {
                continue;
            }
            let lev = m_lev / d;
            let chil = prim.lift_to(lev);
            let sub = trace_cusp(lev, weight, &chil, n / (d * d));
            let fac = BigRational::from(BigInt::from(d).pow(weight - 1))
                * crate::arith::big_rat(b, 1);
            tot = tot.add(&sub.mul(&cd).scale(&fac));
        }
    }
    memo().lock().unwrap().insert(key, tot.clone());
    tot
}

/// dim S_k(Gamma_0(N), chi) (full cusp space), from the trace of T(1).
pub fn dim_cusp(level: u64, weight: u32, chi: &DirichletCharacter) -> u64 {
    cyc_to_dim(trace_cusp(level, weight, chi, 1))
}

/// dim of the new subspace of S_k(Gamma_0(N), chi).
pub fn dim_new(level: u64, weight: u32, chi: &DirichletCharacter) -> u64 {
    cyc_to_dim(trace_new(level, weight, chi, 1))
}

fn cyc_to_dim(c: Cyc) -> u64 {
    let r = c.try_rational().expect("dimension must be rational");
    assert!(r.is_integer() && !r.is_negative(), "dimension must be a non-negative integer");
    use num_traits::ToPrimitive;
    r.to_integer().to_u64().expect("dimension overflow")
}

/// Multiplicative beta_m weights used by the new-space inversion:
/// beta(p) = -2, beta(p^2) = 1, beta(p^a) = 0 for a >= 3, replaced by the
/// Moebius function at primes dividing m.
fn beta_m(m: u64, nn: u64) -> i64 {
    let mut r = 1i64;
    for (p, a) in factor(nn) {
        let term = if m % p == 0 {
            match a {
                1 => -1,
                _ => 0,
            }
        } else {
            match a {
                1 => -2,
                2 => 1,
                _ => 0,
            }
        };
        if term == 0 {
            return 0;
        }
        r *= term;
    }
    r
}

/// Gegenbauer-type polynomial P_k(t, n): with rho + rhobar = t, rho rhobar = n,
/// P_k = (rho^(k-1) - rhobar^(k-1)) / (rho - rhobar).  Chebyshev-like
/// recurrence U_1 = 1, U_2 = t, U_j = t U_(j-1) - n U_(j-2).
fn gegenbauer(k: u32, t: i64, n: i64) -> BigRational {
    let mut u_prev = BigInt::zero(); // U_0
    let mut u = BigInt::one(); // U_1
    for _ in 0..k.saturating_sub(2) {
        let next = BigInt::from(t) * &u - BigInt::from(n) * &u_prev;
        u_prev = u;
        u = next;
    }
    BigRational::from(u)
}

/// Sum of chi over a set of residues, assembled exactly in Q(zeta_ord(chi)).
fn char_sum(chi: &DirichletCharacter, xs: impl Iterator<Item = u64>) -> Cyc {
    let ord = chi.order();
    let mut counts = vec![BigRational::zero(); ord as usize];
    for x in xs {
        if let Some(e) = chi.angle_index(x as i64) {
            counts[(e % ord) as usize] += BigRational::one();
        }
    }
    Cyc::from_root_counts(ord, &counts)
}

/// All x mod m with x^2 - t x + n = 0 (mod m): solutions per prime power by
/// lifting from the residue field, then CRT.
pub fn solve_quadratic_mod(t: i64, n: i64, m: u64) -> Vec<u64> {
    if m == 1 {
        return vec![0];
    }
    let eval = |x: i64, modulus: i64| -> bool {
        let x = x as i128;
        ((x * x - (t as i128) * x + n as i128).rem_euclid(modulus as i128)) == 0
    };
    let mut sols: Vec<u64> = vec![0];
    let mut modulus: u64 = 1;
    for (p, e) in factor(m) {
        // roots mod p by scanning the residue field
        let mut roots: Vec<u64> = (0..p).filter(|&x| eval(x as i64, p as i64)).collect();
        let mut pe = p;
        for _ in 1..e {
            let next_pe = pe * p;
            let mut lifted = Vec::new();
            for &r in &roots {
                for i in 0..p {
                    let cand = r + i * pe;
                    if eval(cand as i64, next_pe as i64) {
                        lifted.push(cand);
                    }
                }
            }
            roots = lifted;
            pe = next_pe;
            if roots.is_empty() {
                break;
            }
        }
        if roots.is_empty() {
            return Vec::new();
        }
        // CRT combine with accumulated solutions
        let mut merged = Vec::with_capacity(sols.len() * roots.len());
        for &s in &sols {
            for &r in &roots {
                let (x, _) = crate::arith::crt(s as i64, modulus as i64, r as i64, pe as i64)
                    .expect("coprime moduli");
                merged.push(x.rem_euclid((modulus * pe) as i64) as u64);
            }
        }
        sols = merged;
        modulus *= pe;
    }
    sols.sort_unstable();
    sols
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::big_rat;

    fn triv(n: u64) -> DirichletCharacter {
        DirichletCharacter::trivial(n)
    }

    fn rat_trace(level: u64, weight: u32, chi: &DirichletCharacter, n: u64) -> BigRational {
        trace_cusp(level, weight, chi, n).try_rational().unwrap()
    }

    #[test]
    fn quadratic_solver() {
        // against brute force
        for &(t, n, m) in &[(1i64, 1i64, 12u64), (0, -4, 36), (3, 2, 30), (5, 6, 64), (2, 5, 49)] {
            let mut brute: Vec<u64> = (0..m)
                .filter(|&x| {
                    let x = x as i128;
                    (x * x - t as i128 * x + n as i128).rem_euclid(m as i128) == 0
                })
                .collect();
            brute.sort_unstable();
            assert_eq!(solve_quadratic_mod(t, n, m), brute, "t={} n={} m={}", t, n, m);
        }
    }

    #[test]
    fn level_one_dimensions() {
        assert_eq!(dim_cusp(1, 12, &triv(1)), 1);
        assert_eq!(dim_cusp(1, 16, &triv(1)), 1);
        assert_eq!(dim_cusp(1, 24, &triv(1)), 2);
        assert_eq!(dim_cusp(1, 2, &triv(1)), 0);
        assert_eq!(dim_cusp(1, 4, &triv(1)), 0);
        assert_eq!(dim_cusp(1, 26, &triv(1)), 1);
    }

    #[test]
    fn genus_table() {
        // dim S_2(Gamma_0(N)) = genus of X_0(N), classical values for N <= 24
        let genus = [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 2, 2, 1];
        for (i, &g) in genus.iter().enumerate() {
            let n = (i + 1) as u64;
            assert_eq!(dim_cusp(n, 2, &triv(n)), g, "genus X_0({})", n);
        }
    }

    #[test]
    fn discriminant_coefficients() {
        // S_12(1) is one-dimensional: traces are the tau coefficients
        let tau = [
            1i64, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920,
            534612, -370944, -577738, 401856, 1217160, 987136, -6905934, 2727432,
            10661420, -7109760,
        ];
        for (i, &v) in tau.iter().enumerate() {
            let n = (i + 1) as u64;
            assert_eq!(rat_trace(1, 12, &triv(1), n), big_rat(v, 1), "tau({})", n);
        }
    }

    #[test]
    fn eta_square_level_eleven() {
        // S_2(11) is spanned by (eta(t) eta(11t))^2; coefficients 1, -2, -1, 2, 1, ...
        let a = [1i64, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4, 4, -1];
        for (i, &v) in a.iter().enumerate() {
            let n = (i + 1) as u64;
            assert_eq!(rat_trace(11, 2, &triv(11), n), big_rat(v, 1), "a({})", n);
        }
    }

    #[test]
    fn quadratic_character_level_seven() {
        // S_3(7, (-7|.)) is spanned by (eta(t) eta(7t))^3
        let chi = DirichletCharacter::from_discriminant(-7).unwrap();
        assert_eq!(chi.modulus(), 7);
        assert_eq!(dim_cusp(7, 3, &chi), 1);
        let a = [1i64, -3, 0, 5, 0, 0, -7, -3, 9, 0];
        for (i, &v) in a.iter().enumerate() {
            let n = (i + 1) as u64;
            assert_eq!(rat_trace(7, 3, &chi, n), big_rat(v, 1), "a({})", n);
        }
    }

    #[test]
    fn hurwitz_cross_check_level_one() {
        // independent level-1 evaluation: Tr T(n) on S_k(1) equals
        // -1/2 sum_{t^2<=4n} P_k(t,n) H(4n-t^2) - 1/2 sum_{dd'=n} min(d,d')^(k-1)
        // with H(0) = -1/12 and P_k(t,n) extended at t^2 = 4n by
        // P_k(2s, s^2) = (k-1) s^(k-2).
        use num_bigint::BigInt;
        for k in [12u32, 16, 20] {
            for n in 1..=20u64 {
                let mut total = BigRational::zero();
                let bound = 2 * (n as f64).sqrt() as i64 + 2;
                for t in -bound..=bound {
                    let disc = 4 * n as i64 - t * t;
                    if disc >= 0 {
                        let h = if disc == 0 {
                            big_rat(-1, 12)
                        } else {
                            hurwitz(-disc)
                        };
                        let p = if t * t == 4 * n as i64 {
                            let s = t.unsigned_abs() as i64 / 2 * t.signum();
                            // P_k(2s, s^2) = (k-1) s^(k-2)
                            BigRational::from(
                                BigInt::from(k - 1) * BigInt::from(s).pow(k - 2),
                            )
                        } else {
                            gegenbauer(k, t, n as i64)
                        };
                        total += p * h;
                    }
                }
                let mut hyper = BigRational::zero();
                for d in divisors(n) {
                    let dp = n / d;
                    let m = d.min(dp);
                    hyper += BigRational::from(BigInt::from(m).pow(k - 1));
                }
                let expect = total * big_rat(-1, 2) - hyper * big_rat(1, 2);
                assert_eq!(rat_trace(1, k, &triv(1), n), expect, "k={} n={}", k, n);
            }
        }
    }

    fn hurwitz(d: i64) -> BigRational {
        // H(|d|) = sum over f^2 | d, d/f^2 = 0,1 mod 4 of h(d/f^2)/w(d/f^2) * 2
        let mut tot = BigRational::zero();
        let mut f = 1i64;
        while f * f <= -d {
            if d % (f * f) == 0 {
                let d2 = d / (f * f);
                if d2.rem_euclid(4) <= 1 {
                    tot += big_rat(2 * class_number(d2) as i64, unit_count(d2) as i64);
                }
            }
            f += 1;
        }
        tot
    }

    #[test]
    fn new_space_dimensions() {
        assert_eq!(dim_new(23, 2, &triv(23)), 2);
        assert_eq!(dim_new(22, 2, &triv(22)), 0);
        assert_eq!(dim_new(96, 4, &triv(96)), 6);
        assert_eq!(dim_cusp(96, 4, &triv(96)), 40);
        assert_eq!(dim_cusp(37, 2, &triv(37)), 2);
    }

    #[test]
    fn new_space_traces() {
        // level 23: both newforms conjugate over y^2 + y - 1
        let tr: Vec<BigRational> = (1..=10)
            .map(|n| trace_new(23, 2, &triv(23), n).try_rational().unwrap())
            .collect();
        let expect = [2i64, -1, 0, -1, -2, -5, 2, 0, 4, 6];
        for (i, &v) in expect.iter().enumerate() {
            assert_eq!(tr[i], big_rat(v, 1), "n={}", i + 1);
        }
        // level 96 weight 4: all newforms have a(2) = 0
        let tr96: Vec<BigRational> = (1..=7)
            .map(|n| trace_new(96, 4, &triv(96), n).try_rational().unwrap())
            .collect();
        let expect96 = [6i64, 0, 0, 0, -4, 0, 0];
        for (i, &v) in expect96.iter().enumerate() {
            assert_eq!(tr96[i], big_rat(v, 1), "96 n={}", i + 1);
        }
    }

    #[test]
    fn complex_character_traces() {
        // S_3(15, chi) for the order-4 character with Conrey index 7:
        // dimension 2, Tr T(2) = -2 - 2i, Tr T(5) = -2 + 6i
        let chi = DirichletCharacter::new(15, 7).unwrap();
        assert_eq!(chi.order(), 4);
        assert!(!chi.is_even());
        assert_eq!(dim_cusp(15, 3, &chi), 2);
        let i = Cyc::root_of_unity(4, 1);
        let t2 = trace_cusp(15, 3, &chi, 2);
        let expect = Cyc::from_i64(-2).add(&i.scale(&big_rat(-2, 1)));
        assert_eq!(t2, expect);
        let t5 = trace_cusp(15, 3, &chi, 5);
        let expect5 = Cyc::from_i64(-2).add(&i.scale(&big_rat(6, 1)));
        assert_eq!(t5, expect5);
        let t3 = trace_cusp(15, 3, &chi, 3);
        assert!(t3.is_zero());
    }

    #[test]
    fn parity_vanishing() {
        // odd weight with trivial character: zero space
        assert!(trace_cusp(11, 3, &triv(11), 1).is_zero());
        // even weight with odd character: zero space
        let chi = DirichletCharacter::from_discriminant(-4).unwrap();
        assert!(trace_cusp(4, 2, &chi, 1).is_zero());
    }
}
