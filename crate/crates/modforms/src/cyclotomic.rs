//! Exact arithmetic in cyclotomic fields Q(zeta_n).
//!
//! Elements are stored in the power basis 1, t, ..., t^(phi(n)-1) with t = zeta_n
//! a fixed primitive n-th root of unity and rational coordinates; the modulus is
//! the n-th cyclotomic polynomial Phi_n.  Orders are normalized to never be
//! 2 mod 4 (Q(zeta_2m) = Q(zeta_m) for odd m), so each field has one canonical
//! presentation: Q(zeta_18) is always handled as Q(zeta_9), with modulus
//! t^6 + t^3 + 1.
//!
//! Mixed-order arithmetic promotes both operands to the compositum Q(zeta_lcm);
//! `downcast` moves an element to a subfield when it actually lies there, which
//! is how traces to smaller fields and recognition of rational values work.

use crate::arith;
use crate::linalg::Mat;
use crate::poly::Poly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Normalize a cyclotomic order: 2m with m odd becomes m.
pub fn normalize_order(n: u64) -> u64 {
    assert!(n > 0);
    if n % 4 == 2 {
        n / 2
    } else {
        n
    }
}

/// The n-th cyclotomic polynomial, monic over Q.
pub fn cyclotomic_poly(n: u64) -> Poly<BigRational> {
    fn compute(n: u64, cache: &mut HashMap<u64, Poly<BigRational>>) -> Poly<BigRational> {
        if let Some(p) = cache.get(&n) {
            return p.clone();
        }
        let p = if n == 1 {
            Poly::new(vec![-rat1(), rat1()])
        } else {
            // (x^n - 1) / prod_{d | n, d < n} Phi_d
            let mut num = vec![BigRational::zero(); n as usize + 1];
            num[0] = -rat1();
            num[n as usize] = rat1();
            let mut num = Poly::new(num);
            for d in arith::divisors(n) {
                if d < n {
                    let phid = compute(d, cache);
                    let (q, r) = num.divrem(&phid);
                    debug_assert!(r.is_zero());
                    num = q;
                }
            }
            num
        };
        cache.insert(n, p.clone());
        p
    }
    static CACHE: OnceLock<Mutex<HashMap<u64, Poly<BigRational>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap();
    compute(n, &mut cache)
}

fn rat1() -> BigRational {
    BigRational::one()
}

/// Cached data for one field order: modulus and the coordinates of every
/// power zeta^j, j = 0..n-1.
struct OrderData {
    phi: usize,
    modulus: Poly<BigRational>,
    zeta_pow: Vec<Vec<BigRational>>,
}

fn order_data(n: u64) -> Arc<OrderData> {
    assert_eq!(n, normalize_order(n), "unnormalized cyclotomic order {n}");
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<OrderData>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap();
    if let Some(d) = cache.get(&n) {
        return d.clone();
    }
    let modulus = cyclotomic_poly(n);
    let phi = modulus.deg().unwrap();
    let mut zeta_pow = Vec::with_capacity(n as usize);
    let mut cur = vec![BigRational::zero(); phi];
    cur[0] = rat1();
    for _ in 0..n {
        zeta_pow.push(cur.clone());
        // multiply by zeta: shift up, reduce the overflow with the monic modulus
        let top = cur.pop().unwrap();
        cur.insert(0, BigRational::zero());
        if !top.is_zero() {
            for (j, m) in modulus.c.iter().take(phi).enumerate() {
                if !Zero::is_zero(m) {
                    let t = &top * m;
                    cur[j] -= t;
                }
            }
        }
    }
    let data = Arc::new(OrderData { phi, modulus, zeta_pow });
    cache.insert(n, data.clone());
    data
}

/// An element of Q(zeta_order), coordinates in the power basis.
#[derive(Clone, Debug)]
pub struct Cyc {
    order: u64,
    c: Vec<BigRational>,
}

impl Cyc {
    pub fn zero() -> Self {
        Cyc { order: 1, c: vec![BigRational::zero()] }
    }

    pub fn one() -> Self {
        Cyc { order: 1, c: vec![rat1()] }
    }

    pub fn from_rat(r: BigRational) -> Self {
        Cyc { order: 1, c: vec![r] }
    }

    pub fn from_i64(n: i64) -> Self {
        Cyc::from_rat(BigRational::from(BigInt::from(n)))
    }

    /// zeta_n^j, stored in the smallest cyclotomic field containing it.
    pub fn root_of_unity(n: u64, j: i64) -> Self {
        assert!(n > 0);
        let jj = j.rem_euclid(n as i64) as u64;
        let g = arith::gcd(jj, n);
        let (mut n, mut jj) = (n / g, if g == n { 0 } else { jj / g });
        let mut sign = false;
        if n % 4 == 2 {
            // zeta_{2m}^j = (-1)^j zeta_m^{j (m+1)/2} for odd m = n/2
            let m = n / 2;
            sign = jj % 2 == 1;
            jj = (jj * ((m + 1) / 2)) % m;
            n = m;
        }
        let data = order_data(n);
        let v = Cyc { order: n, c: data.zeta_pow[jj as usize].clone() };
        if sign {
            v.neg()
        } else {
            v
        }
    }

    /// Sum over j of counts[j] * zeta_order^j; the workhorse for character sums.
    pub fn from_root_counts(order: u64, counts: &[BigRational]) -> Self {
        let n = normalize_order(order);
        let data = order_data(n);
        let mut c = vec![BigRational::zero(); data.phi];
        for (j, w) in counts.iter().enumerate() {
            if Zero::is_zero(w) {
                continue;
            }
            // zeta_order^j in the normalized field
            let r = Cyc::root_of_unity(order, j as i64).embed_to(n);
            for (x, y) in c.iter_mut().zip(&r.c) {
                *x += w * y;
            }
        }
        Cyc { order: n, c }
    }

    /// Reassemble an element from power-basis coordinates (inverse of
    /// `order` + `coords`); the order must already be in normalized form.
    pub fn from_coords(order: u64, c: Vec<BigRational>) -> Self {
        let n = normalize_order(order);
        assert_eq!(n, order, "order must be normalized (not 2 mod 4)");
        let data = order_data(n);
        assert_eq!(c.len(), data.phi, "need phi(order) coordinates");
        Cyc { order: n, c }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.c[1..].iter().all(Zero::is_zero)
    }

    pub fn try_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.c[0].clone())
    }

    /// Move to the (normalized) order m, which must be a multiple of self.order.
    pub fn embed_to(&self, m: u64) -> Self {
        assert_eq!(m, normalize_order(m));
        if m == self.order {
            return self.clone();
        }
        assert_eq!(m % self.order, 0, "no embedding Q(zeta_{}) -> Q(zeta_{m})", self.order);
        let data = order_data(m);
        let step = (m / self.order) as usize;
        let mut c = vec![BigRational::zero(); data.phi];
        for (j, x) in self.c.iter().enumerate() {
            if Zero::is_zero(x) {
                continue;
            }
            for (t, y) in c.iter_mut().zip(&data.zeta_pow[(j * step) % m as usize]) {
                *t += x * y;
            }
        }
        Cyc { order: m, c }
    }

    fn unify(&self, o: &Cyc) -> (Cyc, Cyc) {
        if self.order == o.order {
            return (self.clone(), o.clone());
        }
        let m = normalize_order(arith::lcm(self.order, o.order));
        (self.embed_to(m), o.embed_to(m))
    }

    pub fn add(&self, o: &Cyc) -> Cyc {
        let (mut a, b) = self.unify(o);
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, o: &Cyc) -> Cyc {
        let (mut a, b) = self.unify(o);
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> Cyc {
        Cyc { order: self.order, c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn scale(&self, s: &BigRational) -> Cyc {
        Cyc { order: self.order, c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn mul(&self, o: &Cyc) -> Cyc {
        let (a, b) = self.unify(o);
        if a.order == 1 {
            return Cyc { order: 1, c: vec![&a.c[0] * &b.c[0]] };
        }
        let data = order_data(a.order);
        let pa = Poly::new(a.c);
        let pb = Poly::new(b.c);
        let mut r = pa.mul(&pb).rem(&data.modulus).c;
        r.resize(data.phi, BigRational::zero());
        Cyc { order: a.order, c: r }
    }

    pub fn inv(&self) -> Cyc {
        assert!(!self.is_zero(), "inverse of zero");
        if self.order == 1 {
            return Cyc { order: 1, c: vec![self.c[0].recip()] };
        }
        let data = order_data(self.order);
        let p = Poly::new(self.c.clone());
        let (g, u, _) = p.ext_gcd(&data.modulus);
        assert_eq!(g.deg(), Some(0), "non-invertible element");
        let mut r = u.scale(&g.c[0].recip()).c;
        r.resize(data.phi, BigRational::zero());
        Cyc { order: self.order, c: r }
    }

    pub fn div(&self, o: &Cyc) -> Cyc {
        self.mul(&o.inv())
    }

    pub fn pow(&self, e: i64) -> Cyc {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Cyc::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    /// Galois action zeta -> zeta^t, for gcd(t, order) = 1.
    pub fn galois(&self, t: u64) -> Cyc {
        if self.order == 1 {
            return self.clone();
        }
        assert_eq!(arith::gcd(t, self.order), 1, "galois exponent not coprime to order");
        let data = order_data(self.order);
        let mut c = vec![BigRational::zero(); data.phi];
        for (j, x) in self.c.iter().enumerate() {
            if Zero::is_zero(x) {
                continue;
            }
            let e = (j as u64 * t) % self.order;
            for (a, y) in c.iter_mut().zip(&data.zeta_pow[e as usize]) {
                *a += x * y;
            }
        }
        Cyc { order: self.order, c }
    }

    /// Complex conjugation.
    pub fn conj(&self) -> Cyc {
        if self.order == 1 {
            return self.clone();
        }
        self.galois(self.order - 1)
    }

    /// Express the element in Q(zeta_m) for m | order, if it lies there.
    pub fn downcast(&self, m: u64) -> Option<Cyc> {
        let m = normalize_order(m);
        if m == self.order {
            return Some(self.clone());
        }
        assert_eq!(self.order % m, 0, "Q(zeta_{m}) is not a subfield here");
        let sub = order_data(m);
        let cols: Vec<Cyc> =
            (0..sub.phi).map(|j| Cyc::root_of_unity(m, j as i64).embed_to(self.order)).collect();
        let big = order_data(self.order);
        let a = Mat::from_fn(big.phi, sub.phi, |i, j| cols[j].c[i].clone());
        let x = a.solve(&self.c)?;
        Some(Cyc { order: m, c: x })
    }

    /// Shrink to the smallest cyclotomic subfield actually containing the value
    /// (only divisor orders of the current one are candidates).
    pub fn reduce(&self) -> Cyc {
        if self.order == 1 {
            return self.clone();
        }
        if self.is_rational() {
            return Cyc { order: 1, c: vec![self.c[0].clone()] };
        }
        let mut cur = self.clone();
        loop {
            let mut shrunk = false;
            for (p, _) in arith::factor(cur.order) {
                let m = normalize_order(cur.order / p);
                if m == cur.order {
                    continue;
                }
                if let Some(d) = cur.downcast(m) {
                    cur = d;
                    shrunk = true;
                    break;
                }
            }
            if !shrunk {
                return cur;
            }
        }
    }

    /// Trace to Q(zeta_m) for m | order: the sum of galois(t) over the t fixing
    /// zeta_m, i.e. t = 1 mod m up to the 2-mod-4 normalization.  The result is
    /// returned already downcast into Q(zeta_m).
    pub fn trace_to(&self, m: u64) -> Cyc {
        let n = self.order;
        let mn = normalize_order(m);
        if n == mn {
            return self.clone();
        }
        assert_eq!(n % mn, 0);
        let mut acc = Cyc { order: n, c: vec![BigRational::zero(); self.c.len()] };
        for t in 1..=n {
            if arith::gcd(t, n) == 1 && t % mn == 1 % mn {
                acc = acc.add(&self.galois(t));
            }
        }
        acc.downcast(mn).expect("trace must land in the subfield")
    }

    /// Numeric image under zeta_order -> exp(2 pi i / order), at `prec` bits.
    pub fn embed_complex(&self, prec: u32) -> rug::Complex {
        let pi = rug::Float::with_val(prec, rug::float::Constant::Pi);
        let mut acc = rug::Complex::with_val(prec, (0, 0));
        for (j, x) in self.c.iter().enumerate() {
            if Zero::is_zero(x) {
                continue;
            }
            let ang = rug::Float::with_val(prec, 2 * j as u32) * &pi / self.order as u32;
            let mut term = rug::Complex::with_val(prec, (ang.clone().cos(), ang.sin()));
            term *= crate::bigfloat::rat_to_float(x, prec);
            acc += term;
        }
        acc
    }

    /// Pretty-print as a polynomial in `var` (rationals print bare).
    pub fn poly_string(&self, var: &str) -> String {
        if self.is_rational() {
            return self.c[0].to_string();
        }
        crate::poly::rat_poly_string(&Poly::new(self.c.clone()), var)
    }

    /// The modulus of the field the element lives in, as a polynomial string,
    /// e.g. "t^2 + 1" for order 4.
    pub fn modulus_string(&self, var: &str) -> String {
        crate::poly::rat_poly_string(&cyclotomic_poly(self.order), var)
    }
}

impl PartialEq for Cyc {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.c == other.c;
        }
        let (a, b) = self.unify(other);
        a.c == b.c
    }
}

impl crate::poly::Ring for Cyc {
    fn zero() -> Self {
        Cyc::zero()
    }
    fn one() -> Self {
        Cyc::one()
    }
    fn add(&self, other: &Self) -> Self {
        Cyc::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Cyc::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Cyc::mul(self, other)
    }
    fn neg(&self) -> Self {
        Cyc::neg(self)
    }
    fn is_zero(&self) -> bool {
        Cyc::is_zero(self)
    }
    fn from_i64(n: i64) -> Self {
        Cyc::from_i64(n)
    }
}

impl crate::poly::Field for Cyc {
    fn inv(&self) -> Self {
        Cyc::inv(self)
    }
}

impl std::fmt::Display for Cyc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.poly_string("t"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::big_rat;

    #[test]
    fn cyclotomic_polys() {
        let s = |n| crate::poly::rat_poly_string(&cyclotomic_poly(n), "x");
        assert_eq!(s(1), "x - 1");
        assert_eq!(s(2), "x + 1");
        assert_eq!(s(4), "x^2 + 1");
        assert_eq!(s(8), "x^4 + 1");
        assert_eq!(s(9), "x^6 + x^3 + 1");
        assert_eq!(s(12), "x^4 - x^2 + 1");
        // Phi_105: the smallest index with a coefficient of absolute value 2
        assert_eq!(cyclotomic_poly(105).deg(), Some(48));
        assert_eq!(cyclotomic_poly(105).coeff(7), big_rat(-2, 1));
    }

    #[test]
    fn order_normalization() {
        // zeta_6 = -zeta_3^2 lives in Q(zeta_3)
        let z6 = Cyc::root_of_unity(6, 1);
        assert_eq!(z6.order(), 3);
        assert_eq!(z6.pow(6), Cyc::one());
        assert_eq!(z6.pow(3), Cyc::from_i64(-1));
        // and 1 + zeta_3 = -zeta_3^2 = zeta_6
        let z3 = Cyc::root_of_unity(3, 1);
        assert_eq!(Cyc::one().add(&z3), z6);
        // zeta_2 is rational
        assert_eq!(Cyc::root_of_unity(2, 1), Cyc::from_i64(-1));
        assert_eq!(Cyc::root_of_unity(18, 1).order(), 9);
    }

    #[test]
    fn field_operations() {
        let z8 = Cyc::root_of_unity(8, 1);
        let x = z8.add(&Cyc::from_i64(2)); // 2 + zeta_8
        let y = x.inv();
        assert_eq!(x.mul(&y), Cyc::one());
        // (zeta_8 + zeta_8^-1)^2 = 2
        let r = z8.add(&z8.pow(-1));
        assert_eq!(r.mul(&r), Cyc::from_i64(2));
        // mixed orders: zeta_3 * zeta_4 = zeta_12^7
        let p = Cyc::root_of_unity(3, 1).mul(&Cyc::root_of_unity(4, 1));
        assert_eq!(p, Cyc::root_of_unity(12, 7));
        assert_eq!(p.order(), 12);
    }

    #[test]
    fn galois_and_conj() {
        let z5 = Cyc::root_of_unity(5, 1);
        let x = z5.add(&z5.pow(2).scale(&big_rat(3, 1)));
        // galois is a field automorphism
        let y = z5.pow(3).add(&Cyc::from_i64(1));
        for t in [2u64, 3, 4] {
            assert_eq!(x.mul(&y).galois(t), x.galois(t).mul(&y.galois(t)));
            assert_eq!(x.add(&y).galois(t), x.galois(t).add(&y.galois(t)));
        }
        // conj(zeta) * zeta = 1
        assert_eq!(z5.conj().mul(&z5), Cyc::one());
        // |1 + zeta_5|^2 = (1+z)(1+z^-1) is real: fixed by conjugation
        let a = Cyc::one().add(&z5);
        let n = a.mul(&a.conj());
        assert_eq!(n.conj(), n);
    }

    #[test]
    fn downcast_and_reduce() {
        // zeta_12^3 = i lives in Q(zeta_4)
        let x = Cyc::root_of_unity(12, 3);
        assert_eq!(x.order(), 4); // already reduced at construction
        let y = Cyc::root_of_unity(12, 1).pow(3); // computed in Q(zeta_12)
        assert_eq!(y.order(), 12);
        let d = y.downcast(4).unwrap();
        assert_eq!(d.order(), 4);
        assert_eq!(d, Cyc::root_of_unity(4, 1));
        assert_eq!(y.reduce().order(), 4);
        // sqrt5 = 1 + 2(zeta_5 + zeta_5^4) is not rational, not in any proper subfield
        let z5 = Cyc::root_of_unity(5, 1);
        let s5 = Cyc::one().add(&z5.add(&z5.pow(4)).scale(&big_rat(2, 1)));
        assert_eq!(s5.mul(&s5), Cyc::from_i64(5));
        assert!(s5.downcast(1).is_none());
        assert_eq!(s5.reduce().order(), 5);
    }

    #[test]
    fn traces() {
        // Tr_{Q(zeta_5)/Q}(zeta_5) = -1
        let z5 = Cyc::root_of_unity(5, 1);
        assert_eq!(z5.trace_to(1), Cyc::from_i64(-1));
        // Tr_{Q(zeta_15)/Q(zeta_5)}(zeta_3) = -1 (zeta_3 has trace -1 over the
        // degree-2 step since its conjugates zeta_3, zeta_3^2 both appear)
        let z3 = Cyc::root_of_unity(3, 1).embed_to(15);
        assert_eq!(z3.trace_to(5), Cyc::from_i64(-1));
        // trace of 1 is the field degree
        assert_eq!(Cyc::one().embed_to(15).trace_to(5), Cyc::from_i64(2));
    }

    #[test]
    fn complex_embedding() {
        let z8 = Cyc::root_of_unity(8, 1);
        let v = z8.embed_complex(100);
        let sqrt_half = rug::Float::with_val(100, 0.5f64).sqrt();
        let re = v.real().clone() - &sqrt_half;
        let im = v.imag().clone() - &sqrt_half;
        assert!(re.abs() < 1e-25 && im.abs() < 1e-25);
    }

    #[test]
    fn rendering() {
        let z4 = Cyc::root_of_unity(4, 1);
        assert_eq!(z4.poly_string("t"), "t");
        assert_eq!(z4.modulus_string("t"), "t^2 + 1");
        let x = z4.scale(&big_rat(-1, 4)).add(&Cyc::from_rat(big_rat(1, 2)));
        assert_eq!(x.poly_string("t"), "-1/4*t + 1/2");
        assert_eq!(Cyc::from_rat(big_rat(-3, 7)).poly_string("t"), "-3/7");
    }
}
