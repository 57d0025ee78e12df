//! Dense univariate polynomials over an exact field, together with the small
//! `Ring`/`Field` traits the exact layers of the crate are generic over.
//!
//! Coefficients are stored low degree first with no trailing zeros (the zero
//! polynomial is the empty vector).  Division, gcd/extended gcd, resultants,
//! composition and variable shifts are all exact; these are the primitives the
//! cyclotomic field arithmetic, the characteristic-polynomial work and the
//! factorization routines are built from.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact commutative ring with unit.  (Arithmetic by reference: the elements —
/// big rationals, cyclotomic numbers — are expensive to clone.)
pub trait Ring: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
}

/// Ring in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self) -> Self;
    fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }
}

impl Ring for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from(BigInt::from(n))
    }
}

impl Field for BigRational {
    fn inv(&self) -> Self {
        assert!(!Zero::is_zero(self), "division by zero");
        self.recip()
    }
}

/// Dense univariate polynomial over `F`.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<F: Field> {
    pub c: Vec<F>,
}

impl<F: Field> Poly<F> {
    pub fn new(mut c: Vec<F>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }

    pub fn one() -> Self {
        Poly { c: vec![F::one()] }
    }

    pub fn constant(a: F) -> Self {
        Poly::new(vec![a])
    }

    /// The monomial a x^d.
    pub fn monomial(a: F, d: usize) -> Self {
        let mut c = vec![F::zero(); d + 1];
        c[d] = a;
        Poly::new(c)
    }

    pub fn x() -> Self {
        Poly::monomial(F::one(), 1)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with deg 0 = None.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> &F {
        self.c.last().expect("leading coefficient of zero polynomial")
    }

    pub fn coeff(&self, i: usize) -> F {
        self.c.get(i).cloned().unwrap_or_else(F::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Poly { c: self.c.iter().map(|a| a.neg()).collect() }
    }

    pub fn scale(&self, a: &F) -> Self {
        if a.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.c.iter().map(|x| x.mul(a)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![F::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].add(&a.mul(b));
            }
        }
        Poly::new(c)
    }

    /// Euclidean division: self = q * d + r with deg r < deg d.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.deg().unwrap();
        let linv = d.lead().inv();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![F::zero(); r.len() - dd];
        for i in (dd..r.len()).rev() {
            if r[i].is_zero() {
                continue;
            }
            let f = r[i].mul(&linv);
            for (j, dc) in d.c.iter().enumerate() {
                r[i - dd + j] = r[i - dd + j].sub(&f.mul(dc));
            }
            q[i - dd] = f;
        }
        (Poly::new(q), Poly::new(r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.lead().inv())
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: (g, u, v) with u*self + v*o = g, g monic (or zero).
    pub fn ext_gcd(&self, o: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut u0, mut u1) = (Poly::one(), Poly::zero());
        let (mut v0, mut v1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            (r0, r1) = (r1, r);
            (u0, u1) = (u1.clone(), u0.sub(&q.mul(&u1)));
            (v0, v1) = (v1.clone(), v0.sub(&q.mul(&v1)));
        }
        if r0.is_zero() {
            return (r0, u0, v0);
        }
        let s = r0.lead().inv();
        (r0.scale(&s), u0.scale(&s), v0.scale(&s))
    }

    pub fn eval(&self, x: &F) -> F {
        let mut acc = F::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(x).add(a);
        }
        acc
    }

    /// Evaluate with a polynomial argument (composition self(q)).
    pub fn compose(&self, q: &Self) -> Self {
        let mut acc = Poly::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(q).add(&Poly::constant(a.clone()));
        }
        acc
    }

    /// self(x + a).
    pub fn shift_var(&self, a: &F) -> Self {
        self.compose(&Poly::new(vec![a.clone(), F::one()]))
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.c[1..]
                .iter()
                .enumerate()
                .map(|(i, a)| a.mul(&F::from_i64(i as i64 + 1)))
                .collect(),
        )
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Resultant Res(self, o), via the Euclidean remainder sequence.
    pub fn resultant(&self, o: &Self) -> F {
        let (mut a, mut b) = (self.clone(), o.clone());
        if a.is_zero() || b.is_zero() {
            return F::zero();
        }
        let mut acc = F::one();
        let mut sign = false;
        while let Some(db) = b.deg() {
            if db == 0 {
                // Res(a, const) = const^deg(a)
                let mut p = F::one();
                for _ in 0..a.deg().unwrap_or(0) {
                    p = p.mul(b.lead());
                }
                acc = acc.mul(&p);
                return if sign { acc.neg() } else { acc };
            }
            let da = a.deg().unwrap();
            if da < db {
                std::mem::swap(&mut a, &mut b);
                if da % 2 == 1 && db % 2 == 1 {
                    sign = !sign;
                }
                continue;
            }
            let r = a.rem(&b);
            if r.is_zero() {
                return F::zero();
            }
            let dr = r.deg().unwrap();
            // Res(a,b) = lc(b)^(da - dr) * (-1)^(da*db) * Res(b, r)
            let mut p = F::one();
            for _ in 0..(da - dr) {
                p = p.mul(b.lead());
            }
            acc = acc.mul(&p);
            if da % 2 == 1 && db % 2 == 1 {
                sign = !sign;
            }
            a = b;
            b = r;
        }
        F::zero()
    }

    /// self / gcd(self, self'), dropping repeated roots.
    pub fn squarefree_part(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(&self.derivative());
        if g.deg() == Some(0) {
            return self.monic();
        }
        self.divrem(&g).0.monic()
    }
}

// ---------------------------------------------------------------------------
// Factorization over Q: Zassenhaus (factor mod p, Hensel lift, recombine).
// Inputs are the characteristic polynomials of Hecke operators, so degrees are
// small; the classical algorithm with subset recombination is entirely adequate.
// ---------------------------------------------------------------------------

/// Monic irreducible factors of f over Q with multiplicities, lexicographically
/// sorted for determinism.  The input need not be monic or squarefree.
pub fn factor_q(f: &Poly<BigRational>) -> Vec<(Poly<BigRational>, u32)> {
    assert!(!f.is_zero(), "factoring the zero polynomial");
    let mut out: Vec<(Poly<BigRational>, u32)> = Vec::new();
    // Yun's squarefree decomposition, then factor each squarefree part
    let mut fm = f.monic();
    let mut mult = 1u32;
    while fm.deg().unwrap_or(0) > 0 {
        let g = fm.gcd(&fm.derivative());
        let part = fm.divrem(&g).0; // product of primes dividing fm exactly once... per pass
        // primes in `part` but not in g have multiplicity exactly `mult`
        let exact = part.divrem(&part.gcd(&g)).0;
        if exact.deg().unwrap_or(0) > 0 {
            for irr in factor_squarefree_q(&exact) {
                out.push((irr, mult));
            }
        }
        fm = g;
        mult += 1;
    }
    out.sort_by(|a, b| cmp_poly(&a.0, &b.0));
    out
}

fn cmp_poly(a: &Poly<BigRational>, b: &Poly<BigRational>) -> std::cmp::Ordering {
    a.c.len().cmp(&b.c.len()).then_with(|| {
        for (x, y) in a.c.iter().rev().zip(b.c.iter().rev()) {
            let o = x.cmp(y);
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    })
}

/// Monic squarefree input -> monic irreducible factors.
fn factor_squarefree_q(f: &Poly<BigRational>) -> Vec<Poly<BigRational>> {
    let n = f.deg().unwrap();
    if n <= 1 {
        return vec![f.clone()];
    }
    // make an integer monic model: g(y) = c^n f(y/c) with c = lcm of denominators
    let mut c = BigInt::one();
    for a in &f.c {
        c = num_integer::lcm(c, a.denom().clone());
    }
    let g: Vec<BigInt> = f
        .c
        .iter()
        .enumerate()
        .map(|(i, a)| {
            // coefficient of y^i: a * c^(n-i)
            let scaled = a * BigRational::from(c.pow((n - i) as u32));
            debug_assert!(scaled.is_integer());
            scaled.to_integer()
        })
        .collect();
    let factors = factor_monic_z(&g);
    // map h(y) back to h(c x) / c^deg
    factors
        .into_iter()
        .map(|h| {
            let d = h.len() - 1;
            Poly::new(
                h.into_iter()
                    .enumerate()
                    .map(|(i, a)| {
                        BigRational::new(a * c.pow(i as u32), c.pow(d as u32))
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Factor a monic integer polynomial (given low-to-high, trimmed, lc = 1),
/// returning monic integer factors.
fn factor_monic_z(g: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = g.len() - 1;
    debug_assert!(g[n].is_one());
    if n == 1 {
        return vec![g.to_vec()];
    }
    // pick a prime keeping g squarefree mod p, preferring few modular factors
    let mut best: Option<(u64, Vec<Vec<u64>>)> = None;
    let mut tried = 0;
    for p in crate::arith::primes_up_to(10_000).into_iter().skip(1) {
        let gp = reduce_mod(g, p);
        if gp.len() != g.len() {
            continue; // lc vanished (cannot happen for monic) — keep guard
        }
        if !modp::is_squarefree(&gp, p) {
            continue;
        }
        let fac = modp::factor(&gp, p);
        let better = best.as_ref().map_or(true, |(_, b)| fac.len() < b.len());
        if better {
            best = Some((p, fac));
        }
        tried += 1;
        if tried >= 5 || best.as_ref().unwrap().1.len() == 1 {
            break;
        }
    }
    let (p, modular) = best.expect("no usable prime found (discriminant too smooth?)");
    if modular.len() == 1 {
        return vec![g.to_vec()]; // irreducible mod p => irreducible over Z
    }

    // Hensel-lift the modular factors to p^k beyond the Mignotte bound
    let bound = mignotte_bound(g);
    let mut pk = BigInt::from(p);
    let mut k = 1u32;
    while pk <= &bound * 2 {
        pk *= BigInt::from(p);
        k += 1;
    }
    let lifted = hensel_tree(g, &modular, p, k);

    // subset recombination
    let mut rem = g.to_vec();
    let mut pool: Vec<Vec<BigInt>> = lifted;
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    let mut size = 1usize;
    while 2 * size <= pool.len() {
        let mut found = true;
        while found {
            found = false;
            for combo in combinations(pool.len(), size) {
                let mut cand = vec![BigInt::one()];
                for &i in &combo {
                    cand = zmul(&cand, &pool[i]);
                    sym_reduce(&mut cand, &pk);
                }
                if let Some(q) = zdiv_exact(&rem, &cand) {
                    out.push(cand);
                    rem = q;
                    let keep: Vec<Vec<BigInt>> = pool
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !combo.contains(i))
                        .map(|(_, v)| v.clone())
                        .collect();
                    pool = keep;
                    found = true;
                    break;
                }
            }
            if 2 * size > pool.len() {
                break;
            }
        }
        size += 1;
    }
    if rem.len() > 1 {
        out.push(rem);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| {
        for (x, y) in a.iter().rev().zip(b.iter().rev()) {
            let o = x.cmp(y);
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    }));
    out
}

fn reduce_mod(g: &[BigInt], p: u64) -> Vec<u64> {
    use num_traits::ToPrimitive;
    let pp = BigInt::from(p);
    g.iter().map(|a| num_integer::Integer::mod_floor(a, &pp).to_u64().unwrap()).collect()
}

/// 2^n * sqrt(sum a_i^2): every factor of g has coefficients below this.
fn mignotte_bound(g: &[BigInt]) -> BigInt {
    let n = g.len() - 1;
    let norm2: BigInt = g.iter().map(|a| a * a).sum();
    (num_integer::Roots::sqrt(&norm2) + 1) << (n as u32 + 1)
}

fn zmul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

fn sym_reduce(a: &mut [BigInt], m: &BigInt) {
    let half = m / 2;
    for x in a.iter_mut() {
        *x = num_integer::Integer::mod_floor(&*x, m);
        if *x > half {
            *x -= m;
        }
    }
}

/// Exact division of monic-by-monic integer polynomials; None if not exact.
fn zdiv_exact(num: &[BigInt], den: &[BigInt]) -> Option<Vec<BigInt>> {
    if den.len() > num.len() {
        return None;
    }
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![BigInt::zero(); num.len() - dd];
    for i in (dd..r.len()).rev() {
        let f = r[i].clone();
        if f.is_zero() {
            continue;
        }
        q[i - dd] = f.clone();
        for (j, d) in den.iter().enumerate() {
            let t = &f * d;
            r[i - dd + j] -= t;
        }
    }
    r.iter().all(|x| x.is_zero()).then_some(q)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Recursive two-way Hensel lifting of the modular factor list to p^k.
fn hensel_tree(f: &[BigInt], factors: &[Vec<u64>], p: u64, k: u32) -> Vec<Vec<BigInt>> {
    if factors.len() == 1 {
        return vec![f.to_vec()];
    }
    let mid = factors.len() / 2;
    let (left, right) = factors.split_at(mid);
    let gl = modp::prod(left, p);
    let gr = modp::prod(right, p);
    let (gl_lift, gr_lift) = hensel_pair(f, &gl, &gr, p, k);
    let mut out = hensel_tree(&gl_lift, left, p, k);
    out.extend(hensel_tree(&gr_lift, right, p, k));
    out
}

/// Lift f = g*h (mod p), gcd(g,h) = 1 mod p, to f = G*H (mod p^k).
fn hensel_pair(f: &[BigInt], g0: &[u64], h0: &[u64], p: u64, k: u32) -> (Vec<BigInt>, Vec<BigInt>) {
    // Bezout: s g + t h = 1 mod p
    let (s0, t0) = modp::bezout(g0, h0, p);
    let to_big = |v: &[u64]| -> Vec<BigInt> { v.iter().map(|&x| BigInt::from(x)).collect() };
    let mut g = to_big(g0);
    let mut h = to_big(h0);
    let mut s = to_big(&s0);
    let mut t = to_big(&t0);
    let mut m = BigInt::from(p);
    let mut reached = 1u32;
    while reached < k {
        let m2 = &m * &m;
        // e = f - g h (mod m^2)
        let mut e = sub_vec(f, &zmul(&g, &h));
        modv(&mut e, &m2);
        // q, r: s e = q h + r
        let (q, r) = zpoly_divrem_mod(&zmul(&s, &e), &h, &m2);
        // g' = g + t e + q g ; h' = h + r
        let mut g1 = add_vec(&g, &add_vec(&zmul(&t, &e), &zmul(&q, &g)));
        modv(&mut g1, &m2);
        let mut h1 = add_vec(&h, &r);
        modv(&mut h1, &m2);
        trim_to_deg(&mut g1, g.len() - 1);
        trim_to_deg(&mut h1, h.len() - 1);
        // Bezout update: b = s g1 + t h1 - 1; s' = s - s b mod ...
        let mut b = add_vec(&zmul(&s, &g1), &zmul(&t, &h1));
        b[0] -= BigInt::one();
        modv(&mut b, &m2);
        let (c, d) = zpoly_divrem_mod(&zmul(&s, &b), &h1, &m2);
        let mut s1 = sub_vec(&s, &d);
        modv(&mut s1, &m2);
        let mut t1 = sub_vec(&t, &add_vec(&zmul(&t, &b), &zmul(&c, &g1)));
        modv(&mut t1, &m2);
        g = g1;
        h = h1;
        s = s1;
        t = t1;
        m = m2;
        reached *= 2;
    }
    sym_reduce(&mut g, &m);
    sym_reduce(&mut h, &m);
    (g, h)
}

fn add_vec(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            let y = b.get(i).cloned().unwrap_or_default();
            x + y
        })
        .collect()
}

fn sub_vec(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            let y = b.get(i).cloned().unwrap_or_default();
            x - y
        })
        .collect()
}

fn modv(a: &mut Vec<BigInt>, m: &BigInt) {
    for x in a.iter_mut() {
        *x = num_integer::Integer::mod_floor(&*x, m);
    }
    while a.len() > 1 && a.last().unwrap().is_zero() {
        a.pop();
    }
}

fn trim_to_deg(a: &mut Vec<BigInt>, d: usize) {
    a.truncate(d + 1);
    while a.len() > 1 && a.last().unwrap().is_zero() {
        a.pop();
    }
}

/// Division with remainder mod m, divisor monic.
fn zpoly_divrem_mod(num: &[BigInt], den: &[BigInt], m: &BigInt) -> (Vec<BigInt>, Vec<BigInt>) {
    let dd = den.len() - 1;
    debug_assert!(den[dd].is_one());
    let mut r = num.to_vec();
    modv(&mut r, m);
    if r.len() <= dd {
        return (vec![BigInt::zero()], r);
    }
    let mut q = vec![BigInt::zero(); r.len() - dd];
    for i in (dd..r.len()).rev() {
        if i >= r.len() {
            continue;
        }
        let f = num_integer::Integer::mod_floor(&r[i], m);
        if f.is_zero() {
            continue;
        }
        q[i - dd] = f.clone();
        for (j, d) in den.iter().enumerate() {
            let t = num_integer::Integer::mod_floor(&(&f * d), m);
            r[i - dd + j] = num_integer::Integer::mod_floor(&(&r[i - dd + j] - t), m);
        }
    }
    while r.len() > 1 && r.last().unwrap().is_zero() {
        r.pop();
    }
    while q.len() > 1 && q.last().unwrap().is_zero() {
        q.pop();
    }
    (q, r)
}

/// Dense polynomial arithmetic over F_p (p a small odd prime), used only as the
/// modular engine inside factor_q.
mod modp {
    use crate::arith::ext_gcd;
    use num_bigint::BigUint;
    use num_traits::One;

    pub fn trim(a: &mut Vec<u64>) {
        while a.len() > 1 && *a.last().unwrap() == 0 {
            a.pop();
        }
        if a.is_empty() {
            a.push(0);
        }
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a == [0] || b == [0] {
            return vec![0];
        }
        let mut c = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                c[i + j] = (c[i + j] + (x as u128 * y as u128 % p as u128) as u64) % p;
            }
        }
        let mut c = c;
        trim(&mut c);
        c
    }

    pub fn prod(fs: &[Vec<u64>], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        for f in fs {
            acc = mul(&acc, f, p);
        }
        acc
    }

    pub fn divrem(num: &[u64], den: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let dd = den.len() - 1;
        let linv = inv(den[dd], p);
        let mut r = num.to_vec();
        if r.len() <= dd {
            return (vec![0], r);
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let f = r[i] as u128 * linv as u128 % p as u128;
            if f == 0 {
                continue;
            }
            q[i - dd] = f as u64;
            for (j, &d) in den.iter().enumerate() {
                let t = f * d as u128 % p as u128;
                r[i - dd + j] = ((r[i - dd + j] as u128 + p as u128 - t) % p as u128) as u64;
            }
        }
        trim(&mut r);
        trim(&mut q);
        (q, r)
    }

    pub fn inv(a: u64, p: u64) -> u64 {
        let (_, x, _) = ext_gcd(a as i64, p as i64);
        x.rem_euclid(p as i64) as u64
    }

    pub fn monic(a: &[u64], p: u64) -> Vec<u64> {
        let l = *a.last().unwrap();
        if l == 1 {
            return a.to_vec();
        }
        let li = inv(l, p);
        a.iter().map(|&x| (x as u128 * li as u128 % p as u128) as u64).collect()
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut x, mut y) = (a.to_vec(), b.to_vec());
        trim(&mut x);
        trim(&mut y);
        while y != [0] {
            let (_, r) = divrem(&x, &y, p);
            x = y;
            y = r;
        }
        if x != [0] {
            x = monic(&x, p);
        }
        x
    }

    /// Bezout s a + t b = 1 for coprime monic a, b.
    pub fn bezout(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
        let (mut s0, mut s1) = (vec![1u64], vec![0u64]);
        let (mut t0, mut t1) = (vec![0u64], vec![1u64]);
        while r1 != [0] {
            let (q, r) = divrem(&r0, &r1, p);
            let news = subp(&s0, &mul(&q, &s1, p), p);
            let newt = subp(&t0, &mul(&q, &t1, p), p);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = news;
            t0 = t1;
            t1 = newt;
        }
        // r0 is a nonzero constant
        let c = inv(r0[0], p);
        let scale = |v: &[u64]| -> Vec<u64> {
            v.iter().map(|&x| (x as u128 * c as u128 % p as u128) as u64).collect()
        };
        (scale(&s0), scale(&t0))
    }

    fn subp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut c: Vec<u64> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut c);
        c
    }

    pub fn pow_mod_poly(base: &[u64], e: &BigUint, f: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = divrem(base, f, p).1;
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                acc = divrem(&mul(&acc, &b, p), f, p).1;
            }
            if i + 1 < bits {
                b = divrem(&mul(&b, &b, p), f, p).1;
            }
        }
        acc
    }

    pub fn is_squarefree(f: &[u64], p: u64) -> bool {
        let d: Vec<u64> = f
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| (a as u128 * (i as u64 % p) as u128 % p as u128) as u64)
            .collect();
        let mut d = d;
        trim(&mut d);
        if d == [0] {
            return false;
        }
        gcd(f, &d, p).len() == 1
    }

    /// Full factorization of a squarefree monic polynomial mod p:
    /// distinct-degree then Cantor–Zassenhaus equal-degree splitting.
    pub fn factor(f: &[u64], p: u64) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        let mut rem = monic(f, p);
        let mut h = vec![0, 1]; // x
        let mut d = 0u32;
        while rem.len() > 1 {
            d += 1;
            if (rem.len() - 1) < 2 * d as usize {
                out.push(rem.clone());
                break;
            }
            h = pow_mod_poly(&h, &BigUint::from(p), &rem, p);
            let mut hx = subp(&h, &[0, 1], p);
            trim(&mut hx);
            let g = gcd(&rem, &hx, p);
            if g.len() > 1 {
                for irr in equal_degree(&g, d as usize, p) {
                    out.push(irr);
                }
                rem = divrem(&rem, &g, p).0;
                let (_, hr) = divrem(&h, &rem, p);
                h = hr;
            }
        }
        out.sort();
        out
    }

    fn equal_degree(f: &[u64], d: usize, p: u64) -> Vec<Vec<u64>> {
        let n = f.len() - 1;
        if n == d {
            return vec![f.to_vec()];
        }
        // deterministic pseudo-random splitting elements
        let mut state = 0x9E3779B97F4A7C15u64 ^ (p << 8) ^ (d as u64);
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let e = (BigUint::from(p).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
        loop {
            let a: Vec<u64> = (0..n).map(|_| rand() % p).collect();
            let mut a = a;
            trim(&mut a);
            if a == [0] {
                continue;
            }
            let g = gcd(f, &a, p);
            if g.len() > 1 && g.len() < f.len() {
                let mut out = equal_degree(&g, d, p);
                out.extend(equal_degree(&divrem(f, &g, p).0, d, p));
                return out;
            }
            let b = pow_mod_poly(&a, &e, f, p);
            let mut b1 = b.clone();
            b1[0] = (b1[0] + p - 1) % p;
            trim(&mut b1);
            if b1 == [0] {
                continue;
            }
            let g = gcd(f, &b1, p);
            if g.len() > 1 && g.len() < f.len() {
                let mut out = equal_degree(&g, d, p);
                out.extend(equal_degree(&divrem(f, &g, p).0, d, p));
                return out;
            }
        }
    }
}

/// Render a polynomial over Q in the conventional human form, highest degree
/// first, e.g. "y^2 + 2*y - 1" or "t^6 + t^3 + 1".
pub fn rat_poly_string(p: &Poly<BigRational>, var: &str) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, a) in p.c.iter().enumerate().rev() {
        if Zero::is_zero(a) {
            continue;
        }
        let neg = a.is_negative();
        let abs = a.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let show_coeff = !One::is_one(&abs) || i == 0;
        if show_coeff {
            out.push_str(&format_rat(&abs));
        }
        if i > 0 {
            if show_coeff {
                out.push('*');
            }
            out.push_str(var);
            if i > 1 {
                out.push_str(&format!("^{i}"));
            }
        }
    }
    out
}

/// "3", "-1/2", ... (num-rational's own Display already does this; thin alias
/// kept so the formatting choice has one home).
pub fn format_rat(a: &BigRational) -> String {
    a.to_string()
}
