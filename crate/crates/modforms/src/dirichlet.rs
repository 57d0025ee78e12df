//! Dirichlet characters in the Conrey parametrization.
//!
//! A character mod N is addressed by a unit a mod N ("Mod(a, N)").  Writing
//! N = prod p^e, the unit group splits into cyclic pieces: for odd p the group
//! mod p^e is generated by the least primitive root g mod p^2 (which generates
//! for every exponent e >= 1); for p = 2 and e >= 3 it is <-1> x <5>.  The
//! character attached to a sends a generator pairing to a root of unity whose
//! angle is bilinear in the discrete logs of a and of the argument:
//!
//!     chi_a(n) = exp(2 pi i * sum_p alpha_p nu_p / phi(p^e))        (odd p)
//!                * (-1)^(a0 n0) * exp(2 pi i * a1 n1 / 2^(e-2))     (p = 2)
//!
//! with a = g^alpha, n = g^nu (resp. a = (-1)^a0 5^a1, n = (-1)^n0 5^n1).
//! Values are exact roots of unity (`Cyc`); angles are exact rationals mod 1.
//!
//! The labelling is multiplicative in the label: chi_a * chi_b = chi_{ab},
//! which makes powers, conjugates and Galois orbits index arithmetic.

use crate::arith;
use crate::cyclotomic::Cyc;
use num_rational::Rational64;
use num_traits::Zero;
use std::sync::Arc;

#[derive(Clone, Debug)]
enum CompKind {
    /// p = 2, e = 1: trivial group.
    Trivial,
    /// p = 2, e = 2: chi(-1)^(alpha nu).
    Four { alpha: u64 },
    /// p = 2, e >= 3: <-1> x <5> with dlog table residue -> (n0, n1).
    TwoPow { a0: u64, a1: u64, dlog: Arc<Vec<(u8, u32)>> },
    /// odd p: cyclic, generated by g (least primitive root mod p^2).
    Odd { g: u64, alpha: u64, dlog: Arc<Vec<u32>> },
}

#[derive(Clone, Debug)]
struct Comp {
    p: u64,
    e: u32,
    pe: u64,
    /// This component's own Conrey index (a unit mod pe).
    a_pe: u64,
    kind: CompKind,
}

const NO_DLOG: u32 = u32::MAX;

impl Comp {
    fn build(p: u64, e: u32, a: u64) -> Comp {
        let pe = p.pow(e);
        let a_pe = a % pe;
        let kind = if p == 2 {
            match e {
                1 => CompKind::Trivial,
                2 => CompKind::Four { alpha: if a_pe == 1 { 0 } else { 1 } },
                _ => {
                    let mut dlog = vec![(0u8, NO_DLOG); pe as usize];
                    for s in 0..2u8 {
                        let mut x = if s == 0 { 1 } else { pe - 1 };
                        for i in 0..pe / 4 {
                            dlog[x as usize] = (s, i as u32);
                            x = x * 5 % pe;
                        }
                    }
                    let (a0, a1) = dlog[a_pe as usize];
                    CompKind::TwoPow { a0: a0 as u64, a1: a1 as u64, dlog: Arc::new(dlog) }
                }
            }
        } else {
            let g = least_primitive_root_sq(p);
            let phi = pe / p * (p - 1);
            let mut dlog = vec![NO_DLOG; pe as usize];
            let mut x = 1u64;
            for i in 0..phi {
                dlog[x as usize] = i as u32;
                x = x * (g % pe) % pe;
            }
            CompKind::Odd { g, alpha: dlog[a_pe as usize] as u64, dlog: Arc::new(dlog) }
        };
        Comp { p, e, pe, a_pe, kind }
    }

    /// Angle of chi evaluated at n (a unit mod pe), as an exact rational in [0,1).
    fn angle(&self, n: u64) -> Rational64 {
        let n = n % self.pe;
        match &self.kind {
            CompKind::Trivial => Rational64::zero(),
            CompKind::Four { alpha } => {
                if n == 1 {
                    Rational64::zero()
                } else {
                    Rational64::new((*alpha) as i64, 2)
                }
            }
            CompKind::TwoPow { a0, a1, dlog } => {
                let (n0, n1) = dlog[n as usize];
                debug_assert!(n1 != NO_DLOG);
                let q = self.pe / 4; // 2^(e-2)
                let x = Rational64::new((a0 * n0 as u64) as i64, 2)
                    + Rational64::new((a1 % q) as i64 * n1 as i64 % q as i64, q as i64);
                frac_mod1(x)
            }
            CompKind::Odd { alpha, dlog, .. } => {
                let nu = dlog[n as usize];
                debug_assert!(nu != NO_DLOG);
                let phi = self.pe / self.p * (self.p - 1);
                frac_mod1(Rational64::new(
                    (alpha % phi) as i64 * (nu as u64 % phi) as i64 % phi as i64,
                    phi as i64,
                ))
            }
        }
    }

    fn order(&self) -> u64 {
        match &self.kind {
            CompKind::Trivial => 1,
            CompKind::Four { alpha } => {
                if *alpha == 0 {
                    1
                } else {
                    2
                }
            }
            CompKind::TwoPow { a0, a1, .. } => {
                let q = self.pe / 4;
                let o5 = q / arith::gcd(*a1, q);
                o5.max(if *a0 == 1 { 2 } else { 1 })
            }
            CompKind::Odd { alpha, .. } => {
                let phi = self.pe / self.p * (self.p - 1);
                phi / arith::gcd(*alpha, phi)
            }
        }
    }

    fn conductor(&self) -> u64 {
        match &self.kind {
            CompKind::Trivial => 1,
            CompKind::Four { alpha } => {
                if *alpha == 0 {
                    1
                } else {
                    4
                }
            }
            CompKind::TwoPow { a0, a1, .. } => {
                let q = self.pe / 4;
                let o5 = q / arith::gcd(*a1, q);
                if o5 > 1 {
                    4 * o5
                } else if *a0 == 1 {
                    4
                } else {
                    1
                }
            }
            CompKind::Odd { alpha, .. } => {
                if *alpha == 0 {
                    1
                } else {
                    self.p.pow(arith::valuation(self.order(), self.p) + 1)
                }
            }
        }
    }

    /// Conrey index mod p^et of the lift of this (primitive) component.
    fn lift_index(&self, et: u32) -> u64 {
        let pet = self.p.pow(et);
        match &self.kind {
            CompKind::Trivial => 1,
            CompKind::Four { alpha } => {
                if *alpha == 0 {
                    1
                } else {
                    pet - 1
                }
            }
            CompKind::TwoPow { a0, a1, .. } => {
                let shift = et - self.e;
                let a1t = a1 << shift;
                let v = arith::pow_mod(5, a1t, pet);
                if *a0 == 1 {
                    (pet - 1) * v % pet
                } else {
                    v
                }
            }
            CompKind::Odd { g, alpha, .. } => {
                let scale = self.p.pow(et - self.e);
                arith::pow_mod(*g, alpha * scale, pet)
            }
        }
    }

    /// Conrey index (mod the component conductor) of the primitive character
    /// this component comes from; None when the component is trivial.
    fn primitive_index(&self) -> Option<(u64, u32)> {
        let f = self.conductor();
        if f == 1 {
            return None;
        }
        match &self.kind {
            CompKind::Trivial => None,
            CompKind::Four { .. } => Some((3, 2)),
            CompKind::TwoPow { a0, a1, .. } => {
                let fe = f.trailing_zeros();
                if f == 4 {
                    return Some((3, 2));
                }
                let a1p = a1 >> (self.e - fe);
                let v = arith::pow_mod(5, a1p, f);
                let idx = if *a0 == 1 { (f - 1) * v % f } else { v };
                Some((idx, fe))
            }
            CompKind::Odd { g, alpha, .. } => {
                let fe = arith::valuation(f, self.p);
                let ap = alpha / self.p.pow(self.e - fe);
                Some((arith::pow_mod(*g, ap, f), fe))
            }
        }
    }
}

fn frac_mod1(x: Rational64) -> Rational64 {
    let f = x.floor();
    x - f
}

/// Least g >= 2 generating (Z/p^2)^* (such g generates (Z/p^e)^* for all e).
fn least_primitive_root_sq(p: u64) -> u64 {
    let p2 = p * p;
    let phi = p * (p - 1);
    (2..).find(|&g| arith::gcd(g, p) == 1 && arith::mult_order(g, p2) == phi).unwrap()
}

/// A Dirichlet character mod N, identified by its Conrey index.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    modulus: u64,
    conrey: u64,
    comps: Vec<Comp>,
    order: u64,
    conductor: u64,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.conrey == other.conrey
    }
}
impl Eq for DirichletCharacter {}

impl std::hash::Hash for DirichletCharacter {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.modulus, self.conrey).hash(state);
    }
}

impl DirichletCharacter {
    /// The character Mod(a, n); None unless gcd(a, n) = 1.
    pub fn new(n: u64, a: u64) -> Option<Self> {
        assert!(n > 0, "modulus must be positive");
        let a = if n == 1 { 1 } else { a % n };
        if a == 0 || arith::gcd(a, n) != 1 {
            return None;
        }
        let comps: Vec<Comp> = arith::factor(n).into_iter().map(|(p, e)| Comp::build(p, e, a)).collect();
        let order = comps.iter().fold(1, |acc, c| arith::lcm(acc, c.order()));
        let conductor = comps.iter().map(|c| c.conductor()).product();
        Some(DirichletCharacter { modulus: n, conrey: a, comps, order, conductor })
    }

    pub fn trivial(n: u64) -> Self {
        DirichletCharacter::new(n, 1).unwrap()
    }

    /// The quadratic character n -> kronecker(d, n), as a character mod |d|.
    /// `d` must be a (not necessarily fundamental) discriminant, d = 0, 1 mod 4.
    pub fn from_discriminant(d: i64) -> Option<Self> {
        if d == 0 || d.rem_euclid(4) > 1 {
            return None;
        }
        let n = d.unsigned_abs();
        if n == 1 {
            return Some(Self::trivial(1));
        }
        // the character is quadratic: its index squares to 1 mod n
        let mut cands: Vec<u64> = (1..n)
            .filter(|&a| arith::gcd(a, n) == 1 && a * a % n == 1)
            .collect();
        cands.retain(|&a| {
            let chi = DirichletCharacter::new(n, a).unwrap();
            (1..n).all(|m| {
                let kr = arith::kronecker(d, m as i64);
                match chi.angle(m as i64) {
                    None => kr == 0,
                    Some(r) => {
                        let v = if r.is_zero() { 1 } else { -1 };
                        kr == v
                    }
                }
            })
        });
        cands.first().map(|&a| DirichletCharacter::new(n, a).unwrap())
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn conrey_index(&self) -> u64 {
        self.conrey
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_trivial(&self) -> bool {
        self.conrey == 1 || self.modulus == 1
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    /// chi(-1) = +1 (even) or -1 (odd).
    pub fn parity(&self) -> i64 {
        match self.angle(-1) {
            Some(r) if r.is_zero() => 1,
            Some(_) => -1,
            None => unreachable!("-1 is always a unit"),
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == 1
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == -1
    }

    /// Angle theta in [0, 1) with chi(n) = exp(2 pi i theta); None when the
    /// value is 0 (n not coprime to the modulus).
    pub fn angle(&self, n: i64) -> Option<Rational64> {
        let n = n.rem_euclid(self.modulus as i64) as u64;
        if self.modulus > 1 && arith::gcd(n, self.modulus) != 1 {
            return None;
        }
        let mut acc = Rational64::zero();
        for c in &self.comps {
            acc += c.angle(n);
        }
        Some(frac_mod1(acc))
    }

    /// Exponent j with chi(n) = zeta_order^j; None when chi(n) = 0.
    pub fn angle_index(&self, n: i64) -> Option<u64> {
        let r = self.angle(n)?;
        let den = *r.denom() as u64;
        let num = *r.numer() as u64;
        debug_assert_eq!(self.order % den, 0);
        Some(num * (self.order / den) % self.order)
    }

    /// chi(n) as an exact cyclotomic number (zero included).
    pub fn value(&self, n: i64) -> Cyc {
        match self.angle(n) {
            None => Cyc::zero(),
            Some(r) => Cyc::root_of_unity(*r.denom() as u64, *r.numer()),
        }
    }

    /// chi(n) as a complex number at `prec` bits.
    pub fn value_complex(&self, n: i64, prec: u32) -> rug::Complex {
        match self.angle(n) {
            None => rug::Complex::with_val(prec, (0, 0)),
            Some(r) => {
                let x = crate::bigfloat::rat_to_float(
                    &num_rational::BigRational::new((*r.numer()).into(), (*r.denom()).into()),
                    prec,
                );
                crate::bigfloat::exp_2pi_i(&x, prec)
            }
        }
    }

    /// Product of two characters with the same modulus.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.modulus, other.modulus, "character product needs equal moduli");
        DirichletCharacter::new(self.modulus, self.conrey * other.conrey % self.modulus.max(2))
            .unwrap()
    }

    /// chi^t (t may be negative: chi^-1 = conjugate).
    pub fn pow(&self, t: i64) -> Self {
        let o = self.order as i64;
        let t = t.rem_euclid(o) as u64;
        let idx = arith::pow_mod(self.conrey, t, self.modulus.max(2));
        DirichletCharacter::new(self.modulus, idx.max(1)).unwrap()
    }

    pub fn conj(&self) -> Self {
        self.pow(-1)
    }

    /// The primitive character inducing chi, of modulus = conductor.
    pub fn to_primitive(&self) -> Self {
        if self.is_primitive() {
            return self.clone();
        }
        let (mut r, mut m) = (1i64, 1i64);
        for c in &self.comps {
            if let Some((idx, _)) = c.primitive_index() {
                let f = c.conductor() as i64;
                (r, m) = arith::crt(r, m, idx as i64, f).expect("comp conductors are coprime");
            }
        }
        DirichletCharacter::new(m as u64, r as u64).expect("primitive index is a unit")
    }

    /// Lift to modulus m (the conductor must divide m).
    pub fn lift_to(&self, m: u64) -> Self {
        if m == self.modulus {
            return self.clone();
        }
        let prim = self.to_primitive();
        assert_eq!(m % prim.modulus, 0, "cannot lift: conductor does not divide {m}");
        let (mut r, mut mm) = (1i64, 1i64);
        for (p, e) in arith::factor(m) {
            let idx = match prim.comps.iter().find(|c| c.p == p) {
                Some(c) => c.lift_index(e),
                None => 1,
            };
            (r, mm) = arith::crt(r, mm, idx as i64, p.pow(e) as i64).unwrap();
        }
        DirichletCharacter::new(m, r as u64).unwrap()
    }

    /// Restriction to the component modulus q, where q || modulus (q is a
    /// product of full prime-power components); the complementary character
    /// mod modulus/q completes the factorization chi = chi_q * chi_{N/q}.
    pub fn restrict(&self, q: u64) -> Self {
        assert_eq!(self.modulus % q, 0);
        assert_eq!(arith::gcd(q, self.modulus / q), 1, "restriction needs a unitary divisor");
        let (mut r, mut m) = (1i64, 1i64);
        for c in &self.comps {
            if q % c.pe == 0 {
                (r, m) = arith::crt(r, m, c.a_pe as i64, c.pe as i64).unwrap();
            }
        }
        debug_assert_eq!(m as u64, q.max(1));
        DirichletCharacter::new(q, r as u64).unwrap()
    }

    /// Gauss sum g(chi) = sum_v chi(v) zeta_N^v, exact.
    pub fn gauss_sum(&self) -> Cyc {
        let n = self.modulus;
        let mut acc = Cyc::zero();
        for v in 1..=n {
            let x = self.value(v as i64);
            if !x.is_zero() {
                acc = acc.add(&x.mul(&Cyc::root_of_unity(n, v as i64)));
            }
        }
        if n == 1 {
            acc = Cyc::one();
        }
        acc
    }

    /// Generalized Bernoulli number B_{k,chi} = f^(k-1) sum_a chi(a) B_k(a/f),
    /// with f the modulus chi is presented at.
    pub fn bernoulli(&self, k: usize) -> Cyc {
        let f = self.modulus;
        let mut acc = Cyc::zero();
        for a in 1..=f {
            let x = self.value(a as i64);
            if x.is_zero() {
                continue;
            }
            let b = arith::bernoulli_poly(k, &arith::big_rat(a as i64, f as i64));
            acc = acc.add(&x.scale(&b));
        }
        let fpow = arith::big_rat(f as i64, 1).pow(k as i32 - 1);
        acc.scale(&fpow)
    }

    /// Galois orbit of chi: the characters chi^t for t coprime to the order,
    /// sorted by Conrey index.
    pub fn galois_orbit(&self) -> Vec<u64> {
        let mut idxs: Vec<u64> = (1..=self.order)
            .filter(|&t| arith::gcd(t, self.order) == 1)
            .map(|t| arith::pow_mod(self.conrey, t, self.modulus.max(2)).max(1))
            .collect();
        idxs.sort_unstable();
        idxs.dedup();
        idxs
    }

    /// Smallest Conrey index in the Galois orbit (canonical representative).
    pub fn orbit_min(&self) -> u64 {
        self.galois_orbit()[0]
    }

    /// All characters mod n, by increasing Conrey index.
    pub fn all(n: u64) -> Vec<Self> {
        if n == 1 {
            return vec![Self::trivial(1)];
        }
        (1..=n).filter_map(|a| DirichletCharacter::new(n, a)).collect()
    }

    /// One representative per Galois orbit, by increasing Conrey index.
    pub fn orbit_representatives(n: u64) -> Vec<Self> {
        Self::all(n).into_iter().filter(|c| c.orbit_min() == c.conrey).collect()
    }
}

impl std::fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Mod({}, {})", self.conrey, self.modulus)
    }
}
