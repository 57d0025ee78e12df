//! q-expansions and the symbolic form calculus.
//!
//! A modular form is represented as an expression tree (`FormExpr`): leaves
//! know how to produce their own q-expansion (Eisenstein series, eta
//! quotients, theta series, trace forms), inner nodes combine children
//! (linear combinations, products, quotients, V and Hecke operators,
//! derivatives, Rankin–Cohen brackets, twists).  Every node memoizes the
//! coefficient prefix it has produced so far, so repeated queries cost
//! nothing and extending a prefix reuses children's caches.
//!
//! Coefficients live in the smallest exact domain that can hold them:
//! rationals, then cyclotomics Q(zeta_o), then relative extensions
//! Q(zeta_o)[y]/(g).  All arithmetic promotes automatically.
//!
//! The central access protocol is `coeffs(L, d)`, returning the vector
//! [a(0), a(d), a(2d), ..., a(Ld)]: entry j is the coefficient of q^(j*d).
//! Expansions at other cusps may live on a fractional grid q^(alpha + m/w);
//! those are produced by the slash-expansion machinery as explicit
//! `QExpansion` values carrying (alpha, w) metadata.

use crate::arith::{self, big_rat, gcd, lcm};
use crate::cyclotomic::Cyc;
use crate::dirichlet::DirichletCharacter;
use crate::linalg::Mat;
use crate::poly::Ring;
use crate::relext::RelElem;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::sync::{Arc, Mutex};

// ---------------------------------------------------------------------------
// coefficient domain
// ---------------------------------------------------------------------------

/// Exact coefficient: rational, cyclotomic, or an element of a relative
/// extension of a cyclotomic field.  Mixed arithmetic promotes leftward.
#[derive(Clone, Debug)]
pub enum Coef {
    Rat(BigRational),
    Cyc(Cyc),
    Rel(RelElem),
}

impl Coef {
    pub fn from_i64(n: i64) -> Self {
        Coef::Rat(big_rat(n, 1))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coef::Rat(r) => num_traits::Zero::is_zero(r),
            Coef::Cyc(c) => c.is_zero(),
            Coef::Rel(r) => r.is_zero(),
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Coef::Rat(r) => Some(r.clone()),
            Coef::Cyc(c) => c.try_rational(),
            Coef::Rel(r) => r.as_cyc().and_then(|c| c.try_rational()),
        }
    }

    pub fn as_cyc(&self) -> Option<Cyc> {
        match self {
            Coef::Rat(r) => Some(Cyc::from_rat(r.clone())),
            Coef::Cyc(c) => Some(c.clone()),
            Coef::Rel(r) => r.as_cyc(),
        }
    }

    /// Numerical value; relative-extension elements need the embedding root.
    pub fn embed_complex(&self, prec: u32, root: Option<&rug::Complex>) -> rug::Complex {
        match self {
            Coef::Rat(r) => {
                let re = crate::bigfloat::rat_to_float(r, prec);
                rug::Complex::with_val(prec, (re, rug::Float::new(prec)))
            }
            Coef::Cyc(c) => c.embed_complex(prec),
            Coef::Rel(r) => r.embed_at(root.expect("embedding root required"), prec),
        }
    }

    fn binop(
        &self,
        other: &Self,
        frat: impl Fn(&BigRational, &BigRational) -> BigRational,
        fcyc: impl Fn(&Cyc, &Cyc) -> Cyc,
        frel: impl Fn(&RelElem, &RelElem) -> RelElem,
    ) -> Self {
        use Coef::*;
        match (self, other) {
            (Rat(a), Rat(b)) => Rat(frat(a, b)),
            (Cyc(a), Cyc(b)) => Cyc(fcyc(a, b)),
            (Rat(a), Cyc(b)) => Cyc(fcyc(&crate::cyclotomic::Cyc::from_rat(a.clone()), b)),
            (Cyc(a), Rat(b)) => Cyc(fcyc(a, &crate::cyclotomic::Cyc::from_rat(b.clone()))),
            (Rel(a), Rel(b)) => Rel(frel(a, b)),
            (Rel(a), Rat(b)) => Rel(frel(a, &a.ext.from_rat(b.clone()))),
            (Rat(a), Rel(b)) => Rel(frel(&b.ext.from_rat(a.clone()), b)),
            (Rel(a), Cyc(b)) => Rel(frel(a, &a.ext.from_cyc(b.clone()))),
            (Cyc(a), Rel(b)) => Rel(frel(&b.ext.from_cyc(a.clone()), b)),
        }
    }

    pub fn inv(&self) -> Self {
        match self {
            Coef::Rat(r) => Coef::Rat(big_rat(1, 1) / r),
            Coef::Cyc(c) => Coef::Cyc(c.inv()),
            Coef::Rel(r) => Coef::Rel(r.inv()),
        }
    }
}

impl PartialEq for Coef {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl Ring for Coef {
    fn zero() -> Self {
        Coef::Rat(big_rat(0, 1))
    }
    fn one() -> Self {
        Coef::Rat(big_rat(1, 1))
    }
    fn add(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a + b, |a, b| a.add(b), |a, b| a.add(b))
    }
    fn sub(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a - b, |a, b| a.sub(b), |a, b| a.sub(b))
    }
    fn mul(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a * b, |a, b| a.mul(b), |a, b| a.mul(b))
    }
    fn neg(&self) -> Self {
        Coef::zero().sub(self)
    }
    fn is_zero(&self) -> bool {
        Coef::is_zero(self)
    }
    fn from_i64(n: i64) -> Self {
        Coef::from_i64(n)
    }
}

impl crate::poly::Field for Coef {
    fn inv(&self) -> Self {
        Coef::inv(self)
    }
}

impl std::fmt::Display for Coef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coef::Rat(r) => write!(f, "{}", r),
            Coef::Cyc(c) => {
                if let Some(r) = c.try_rational() {
                    write!(f, "{}", r)
                } else {
                    write!(f, "{}", c.poly_string("t"))
                }
            }
            Coef::Rel(r) => write!(f, "{}", r),
        }
    }
}

// ---------------------------------------------------------------------------
// truncated power-series helpers (over any exact coefficient ring)
// ---------------------------------------------------------------------------

pub(crate) fn ser_mul<F: Ring>(a: &[F], b: &[F], upto: usize) -> Vec<F> {
    let mut out = vec![F::zero(); upto + 1];
    for (i, x) in a.iter().enumerate().take(upto + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j > upto {
                break;
            }
            if !y.is_zero() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    out
}

pub(crate) fn ser_pow<F: Ring>(a: &[F], e: u32, upto: usize) -> Vec<F> {
    let mut acc = vec![F::zero(); upto + 1];
    acc[0] = F::one();
    let mut base = a.to_vec();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = ser_mul(&acc, &base, upto);
        }
        e >>= 1;
        if e > 0 {
            base = ser_mul(&base, &base, upto);
        }
    }
    acc
}

/// Inverse of a series with invertible constant term.
pub(crate) fn ser_inv<F: crate::poly::Field>(a: &[F], upto: usize) -> Vec<F> {
    assert!(!a[0].is_zero(), "series has zero constant term");
    let a0 = a[0].inv();
    let mut out = vec![F::zero(); upto + 1];
    out[0] = a0.clone();
    for n in 1..=upto {
        let mut s = F::zero();
        for j in 1..=n {
            if let Some(aj) = a.get(j) {
                if !aj.is_zero() && !out[n - j].is_zero() {
                    s = s.add(&aj.mul(&out[n - j]));
                }
            }
        }
        out[n] = s.mul(&a0).neg();
    }
    out
}

// ---------------------------------------------------------------------------
// the expression tree
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum Kind {
    /// constant multiple of 1 (weight 0, level 1)
    Const(Coef),
    /// level-one Eisenstein series E_k normalized with a(0) = 1; E_2 is the
    /// quasi-modular one
    Ek(u32),
    /// eta quotient prod_i eta(d_i tau)^(r_i); sum d_i r_i must be 0 mod 24
    Eta(Vec<(u64, i64)>),
    /// unary theta series sum_n psi(n) n^eps q^(n^2) over all integers n
    ThetaChar(DirichletCharacter),
    /// theta series of a positive definite integral Gram matrix (even dim)
    ThetaQf(Vec<Vec<i64>>),
    /// Eisenstein series G_k(chi1, chi2) evaluated at m*tau (chi_i primitive)
    EisG { k: u32, chi1: DirichletCharacter, chi2: DirichletCharacter, m: u64 },
    /// trace form of the full cusp space or of the new subspace
    TraceForm { level: u64, weight: u32, chi: DirichletCharacter, new: bool },
    Linear(Vec<(Coef, FormExpr)>),
    Mul(FormExpr, FormExpr),
    Pow(FormExpr, u32),
    Div(FormExpr, FormExpr),
    /// expansion operator B(d): a(n) -> a(n/d)
    Bd(FormExpr, u64),
    /// Hecke operator T(n) in weight k with the child's level and character
    Hecke(FormExpr, u64, u64),
    /// q d/dq
    DerivQ(FormExpr),
    /// Serre derivative f' - k/12 E_2 f
    Serre(FormExpr),
    /// Rankin–Cohen bracket [f, g]_n
    RankinCohen(FormExpr, FormExpr, u32),
    /// twist: a(n) -> psi(n) a(n)
    Twist(FormExpr, DirichletCharacter),
}

struct Node {
    kind: Kind,
    weight: Option<BigRational>,
    level: u64,
    character: Option<DirichletCharacter>,
    quasi: bool,
    memo: Mutex<Vec<Coef>>,
}

impl std::fmt::Debug for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Node")
            .field("kind", &self.kind)
            .field("weight", &self.weight)
            .field("level", &self.level)
            .finish()
    }
}

/// A modular-form expression.  Cheap to clone (shared reference); coefficient
/// queries are memoized per node.
#[derive(Clone, Debug)]
pub struct FormExpr(Arc<Node>);

fn trivial1() -> DirichletCharacter {
    DirichletCharacter::trivial(1)
}

impl FormExpr {
    fn build(
        kind: Kind,
        weight: Option<BigRational>,
        level: u64,
        character: Option<DirichletCharacter>,
        quasi: bool,
    ) -> Self {
        FormExpr(Arc::new(Node {
            kind,
            weight,
            level,
            character,
            quasi,
            memo: Mutex::new(Vec::new()),
        }))
    }

    // -- leaf constructors --------------------------------------------------

    /// The constant form c.
    pub fn constant(c: Coef) -> Self {
        Self::build(Kind::Const(c), Some(big_rat(0, 1)), 1, Some(trivial1()), false)
    }

    pub fn one() -> Self {
        Self::constant(Coef::one())
    }

    /// Normalized level-one Eisenstein series E_k (k even >= 2; E_0 = 1).
    /// E_2 is quasi-modular.
    pub fn e_k(k: u32) -> Self {
        assert!(k % 2 == 0, "E_k needs even k");
        if k == 0 {
            return Self::one();
        }
        Self::build(
            Kind::Ek(k),
            Some(big_rat(k as i64, 1)),
            1,
            Some(trivial1()),
            k == 2,
        )
    }

    /// The discriminant form of weight 12.
    pub fn delta() -> Self {
        Self::eta_quotient(&[(1, 24)])
    }

    /// prod_i eta(d_i tau)^(r_i).  The total eta shift sum(d_i r_i)/24 must be
    /// a non-negative integer (holomorphic at infinity on the integral grid).
    pub fn eta_quotient(pairs: &[(u64, i64)]) -> Self {
        let mut pairs = pairs.to_vec();
        pairs.sort();
        let shift: i64 = pairs.iter().map(|&(d, r)| d as i64 * r).sum();
        assert!(shift % 24 == 0, "eta quotient exponent sum {} not divisible by 24", shift);
        assert!(shift >= 0, "eta quotient has a pole at infinity");
        let two_weight: i64 = pairs.iter().map(|&(_, r)| r).sum();
        let weight = big_rat(two_weight, 2);
        // level: smallest multiple L of lcm(d_i) with L * sum(r_i / d_i) = 0 mod 24
        let mut base = 1;
        for &(d, _) in &pairs {
            base = lcm(base, d);
        }
        let mut level = base;
        loop {
            let s: i64 = pairs.iter().map(|&(d, r)| (level / d) as i64 * r).sum();
            if s % 24 == 0 {
                break;
            }
            level += base;
        }
        // character: quadratic character attached to (-1)^k prod d^r for
        // integral weight k
        let (character, level) = if two_weight % 2 == 0 {
            let k = two_weight / 2;
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            for &(d, r) in &pairs {
                if r >= 0 {
                    num *= BigInt::from(d).pow(r as u32);
                } else {
                    den *= BigInt::from(d).pow((-r) as u32);
                }
            }
            let mut d_val = num * den; // same squarefree core as num/den
            if k % 2 != 0 {
                d_val = -d_val;
            }
            let chi = quadratic_char_from_core(&d_val);
            let level = lcm(level, chi.conductor());
            (Some(chi.lift_to(level)), level)
        } else {
            (None, level)
        };
        Self::build(Kind::Eta(pairs), Some(weight), level, character, false)
    }

    /// Unary theta series of a (not necessarily primitive) character psi:
    /// sum over all integers n of psi(n) n^eps q^(n^2), eps = 0 or 1 for even
    /// or odd psi.
    pub fn theta_char(psi: &DirichletCharacter) -> Self {
        let psi = psi.to_primitive();
        let eps: u32 = if psi.is_even() { 0 } else { 1 };
        let f = psi.conductor();
        let level = 4 * f * f;
        let chi = if eps == 0 {
            psi.lift_to(level)
        } else {
            let chi4 = DirichletCharacter::from_discriminant(-4).unwrap();
            psi.lift_to(level).mul(&chi4.lift_to(level))
        };
        Self::build(
            Kind::ThetaChar(psi),
            Some(big_rat(1 + 2 * eps as i64, 2)),
            level,
            Some(chi),
            false,
        )
    }

    /// Theta series of a positive definite even-dimensional integral Gram
    /// matrix G: sum over lattice vectors x of q^(x^T G x).
    pub fn theta_qf(gram: Vec<Vec<i64>>) -> Self {
        let r = gram.len();
        assert!(r >= 2 && r % 2 == 0, "Gram matrix must have even dimension");
        for row in &gram {
            assert_eq!(row.len(), r, "Gram matrix must be square");
        }
        for i in 0..r {
            for j in 0..r {
                assert_eq!(gram[i][j], gram[j][i], "Gram matrix must be symmetric");
            }
        }
        // level: least N with N * (2G)^(-1) integral with even diagonal
        let two_g = Mat::<BigRational>::from_fn(r, r, |i, j| big_rat(2 * gram[i][j], 1));
        let inv = two_g.inverse().expect("Gram matrix must be nondegenerate");
        let mut level = BigInt::one();
        for i in 0..r {
            for j in 0..r {
                level = num_integer::lcm(level, inv.a[i][j].denom().clone());
            }
        }
        // even diagonal of N * inv
        loop {
            let ok = (0..r).all(|i| {
                let v = &inv.a[i][i] * BigRational::from(level.clone());
                v.is_integer() && (v.to_integer() % 2u32).is_zero()
            });
            if ok {
                break;
            }
            level *= 2u32;
        }
        let level = level.to_u64().expect("level overflow");
        // character: quadratic character of (-1)^(r/2) det(2G)
        let mut det = two_g_det(&gram);
        if (r / 2) % 2 != 0 {
            det = -det;
        }
        let chi = quadratic_char_from_core(&det);
        let level = lcm(level, chi.conductor());
        Self::build(
            Kind::ThetaQf(gram),
            Some(big_rat(r as i64 / 2, 1)),
            level,
            Some(chi.lift_to(level)),
            false,
        )
    }

    /// Eisenstein series G_k(chi1, chi2)(m tau) with both characters taken
    /// primitive; the coefficient of q^(mn) for n >= 1 is
    /// sum_(d | n) chi1(n/d) chi2(d) d^(k-1).
    pub fn eisenstein(k: u32, chi1: &DirichletCharacter, chi2: &DirichletCharacter, m: u64) -> Self {
        let chi1 = chi1.to_primitive();
        let chi2 = chi2.to_primitive();
        let n1 = chi1.modulus();
        let n2 = chi2.modulus();
        let parity_prod = chi1.is_even() == chi2.is_even();
        assert_eq!(
            parity_prod,
            k % 2 == 0,
            "character parity must match the weight"
        );
        let level = n1 * n2 * m;
        let chi = chi1.lift_to(level).mul(&chi2.lift_to(level));
        let quasi = k == 2 && n1 == 1 && n2 == 1;
        Self::build(
            Kind::EisG { k, chi1, chi2, m },
            Some(big_rat(k as i64, 1)),
            level,
            Some(chi),
            quasi,
        )
    }

    /// Same expression with the quasi-modular flag forced; used when a
    /// combination of quasi-modular pieces is known to be modular (for
    /// example G_2(m tau) - G_2(tau)/m).
    pub(crate) fn with_quasi(&self, quasi: bool) -> Self {
        Self::build(
            Kind::Linear(vec![(Coef::one(), self.clone())]),
            self.weight(),
            self.level(),
            self.0.character.clone(),
            quasi,
        )
    }

    /// Trace form of S_k(Gamma_0(N), chi) (new=false) or of the new subspace
    /// (new=true): coefficients are the traces of the Hecke operators.
    pub fn trace_form(level: u64, weight: u32, chi: &DirichletCharacter, new: bool) -> Self {
        assert_eq!(chi.modulus(), level);
        Self::build(
            Kind::TraceForm { level, weight, chi: chi.clone(), new },
            Some(big_rat(weight as i64, 1)),
            level,
            Some(chi.clone()),
            false,
        )
    }

    // -- operations ----------------------------------------------------------

    /// Linear combination sum_i c_i f_i.
    pub fn linear(terms: Vec<(Coef, FormExpr)>) -> Self {
        assert!(!terms.is_empty(), "empty linear combination");
        let mut weight = terms[0].1.weight();
        let mut level = 1;
        for (_, f) in &terms {
            if f.weight() != weight {
                weight = None;
            }
            level = lcm(level, f.level());
        }
        let mut character = terms[0].1 .0.character.clone().map(|c| c.lift_to(level));
        for (_, f) in &terms[1..] {
            let fc = f.0.character.clone().map(|c| c.lift_to(level));
            if fc != character {
                character = None;
            }
        }
        let quasi = terms.iter().any(|(_, f)| f.0.quasi);
        Self::build(Kind::Linear(terms), weight, level, character, quasi)
    }

    pub fn add(&self, other: &FormExpr) -> Self {
        Self::linear(vec![(Coef::one(), self.clone()), (Coef::one(), other.clone())])
    }

    pub fn sub_form(&self, other: &FormExpr) -> Self {
        Self::linear(vec![
            (Coef::one(), self.clone()),
            (Coef::from_i64(-1), other.clone()),
        ])
    }

    pub fn scale(&self, c: Coef) -> Self {
        Self::linear(vec![(c, self.clone())])
    }

    pub fn mul(&self, other: &FormExpr) -> Self {
        let weight = match (self.weight(), other.weight()) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let level = lcm(self.level(), other.level());
        let character = match (&self.0.character, &other.0.character) {
            (Some(a), Some(b)) => Some(a.lift_to(level).mul(&b.lift_to(level))),
            _ => None,
        };
        let quasi = self.0.quasi || other.0.quasi;
        Self::build(Kind::Mul(self.clone(), other.clone()), weight, level, character, quasi)
    }

    pub fn pow(&self, e: u32) -> Self {
        let weight = self.weight().map(|w| w * big_rat(e as i64, 1));
        let character = self.0.character.as_ref().map(|c| c.pow(e as i64));
        Self::build(
            Kind::Pow(self.clone(), e),
            weight,
            self.level(),
            character,
            self.0.quasi,
        )
    }

    /// Quotient of two expansions; the numerator's q-adic valuation must be at
    /// least the denominator's (checked when coefficients are produced).
    pub fn div(&self, other: &FormExpr) -> Self {
        let weight = match (self.weight(), other.weight()) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        let level = lcm(self.level(), other.level());
        let character = match (&self.0.character, &other.0.character) {
            (Some(a), Some(b)) => Some(a.lift_to(level).mul(&b.lift_to(level).conj())),
            _ => None,
        };
        let quasi = self.0.quasi || other.0.quasi;
        Self::build(Kind::Div(self.clone(), other.clone()), weight, level, character, quasi)
    }

    /// Expansion operator B(d): (B(d) f)(tau) = f(d tau), i.e. a(n) -> a(n/d).
    pub fn expand_bd(&self, d: u64) -> Self {
        assert!(d >= 1);
        let level = self.level() * d;
        let character = self.0.character.as_ref().map(|c| c.lift_to(level));
        Self::build(
            Kind::Bd(self.clone(), d),
            self.weight(),
            level,
            character,
            self.0.quasi,
        )
    }

    /// Hecke operator T(n) acting in the child's weight, level and character.
    pub fn hecke(&self, n: u64) -> Self {
        let level = self.level();
        self.hecke_at(n, level)
    }

    /// Hecke operator T(n) of the ambient level `level` (a multiple of the
    /// child's level).  Divisors sharing a factor with `level` drop out of the
    /// defining sum, so for p | level this is the U_p operator even when the
    /// form itself has smaller level.
    pub fn hecke_at(&self, n: u64, level: u64) -> Self {
        assert!(n >= 1);
        assert!(level % self.level() == 0, "ambient level must be a multiple of the form's");
        assert!(
            self.weight().map_or(false, |w| w.is_integer()),
            "Hecke operator needs integral weight"
        );
        assert!(self.0.character.is_some(), "Hecke operator needs a definite character");
        let character = self.0.character.as_ref().map(|c| c.lift_to(level));
        Self::build(
            Kind::Hecke(self.clone(), n, level),
            self.weight(),
            level,
            character,
            self.0.quasi,
        )
    }

    /// q d/dq (adds 2 to the weight, quasi-modular).
    pub fn derivative(&self) -> Self {
        let weight = self.weight().map(|w| w + big_rat(2, 1));
        Self::build(
            Kind::DerivQ(self.clone()),
            weight,
            self.level(),
            self.0.character.clone(),
            true,
        )
    }

    /// Serre derivative f' - (k/12) E_2 f, modular of weight k + 2.
    pub fn serre_derivative(&self) -> Self {
        let weight = self.weight().map(|w| w + big_rat(2, 1));
        Self::build(
            Kind::Serre(self.clone()),
            weight,
            self.level(),
            self.0.character.clone(),
            self.0.quasi,
        )
    }

    /// Rankin–Cohen bracket [f, g]_n of weight k + l + 2n.
    pub fn rankin_cohen(&self, other: &FormExpr, n: u32) -> Self {
        let weight = match (self.weight(), other.weight()) {
            (Some(a), Some(b)) => Some(a + b + big_rat(2 * n as i64, 1)),
            _ => None,
        };
        let level = lcm(self.level(), other.level());
        let character = match (&self.0.character, &other.0.character) {
            (Some(a), Some(b)) => Some(a.lift_to(level).mul(&b.lift_to(level))),
            _ => None,
        };
        Self::build(
            Kind::RankinCohen(self.clone(), other.clone(), n),
            weight,
            level,
            character,
            self.0.quasi || other.0.quasi,
        )
    }

    /// Twist by psi: a(n) -> psi(n) a(n).  The level grows to
    /// lcm(N, cond(chi) cond(psi), cond(psi)^2).
    pub fn twist(&self, psi: &DirichletCharacter) -> Self {
        let psi = psi.to_primitive();
        let f = psi.conductor();
        let fchi = self.0.character.as_ref().map_or(1, |c| c.conductor());
        let level = lcm(self.level(), lcm(f * fchi, f * f));
        let character = self
            .0
            .character
            .as_ref()
            .map(|c| c.lift_to(level).mul(&psi.lift_to(level).pow(2)));
        Self::build(
            Kind::Twist(self.clone(), psi),
            self.weight(),
            level,
            character,
            self.0.quasi,
        )
    }

    // -- metadata ------------------------------------------------------------

    pub fn weight(&self) -> Option<BigRational> {
        self.0.weight.clone()
    }

    pub fn level(&self) -> u64 {
        self.0.level
    }

    pub fn character(&self) -> Option<DirichletCharacter> {
        self.0.character.clone()
    }

    pub fn is_quasi(&self) -> bool {
        self.0.quasi
    }

    // -- coefficients ----------------------------------------------------------

    /// The single coefficient a(n).
    pub fn coef(&self, n: u64) -> Coef {
        self.prefix(n as usize)[n as usize].clone()
    }

    /// [a(0), a(d), a(2d), ..., a(Ld)]: entry j is the coefficient of q^(jd).
    pub fn coeffs(&self, l: u64, d: u64) -> Vec<Coef> {
        assert!(d >= 1);
        let pre = self.prefix((l * d) as usize);
        (0..=l as usize).map(|j| pre[j * d as usize].clone()).collect()
    }

    /// Coefficients a(0..=upto), memoized.
    pub fn prefix(&self, upto: usize) -> Vec<Coef> {
        {
            let memo = self.0.memo.lock().unwrap();
            if memo.len() > upto {
                return memo[..=upto].to_vec();
            }
        }
        let computed = self.compute_prefix(upto);
        let mut memo = self.0.memo.lock().unwrap();
        if computed.len() > memo.len() {
            *memo = computed.clone();
        }
        computed
    }

    fn compute_prefix(&self, upto: usize) -> Vec<Coef> {
        let n = upto;
        match &self.0.kind {
            Kind::Const(c) => {
                let mut out = vec![Coef::zero(); n + 1];
                out[0] = c.clone();
                out
            }
            Kind::Ek(k) => eisenstein_level_one(*k, n),
            Kind::Eta(pairs) => eta_prefix(pairs, n),
            Kind::ThetaChar(psi) => {
                let eps = if psi.is_even() { 0u32 } else { 1 };
                let mut out = vec![Coef::zero(); n + 1];
                if psi.modulus() == 1 {
                    out[0] = Coef::one();
                }
                let mut m = 1u64;
                while (m * m) as usize <= n {
                    let v = psi.value(m as i64);
                    if !v.is_zero() {
                        let w = v.scale(&big_rat(2 * (m as i64).pow(eps), 1));
                        out[(m * m) as usize] = Coef::Cyc(w);
                    }
                    m += 1;
                }
                out
            }
            Kind::ThetaQf(gram) => theta_qf_prefix(gram, n),
            Kind::EisG { k, chi1, chi2, m } => eis_g_prefix(*k, chi1, chi2, *m, n),
            Kind::TraceForm { level, weight, chi, new } => {
                let mut out = vec![Coef::zero(); n + 1];
                for j in 1..=n {
                    let t = if *new {
                        crate::trace::trace_new(*level, *weight, chi, j as u64)
                    } else {
                        crate::trace::trace_cusp(*level, *weight, chi, j as u64)
                    };
                    if !t.is_zero() {
                        out[j] = Coef::Cyc(t);
                    }
                }
                out
            }
            Kind::Linear(terms) => {
                let mut out = vec![Coef::zero(); n + 1];
                for (c, f) in terms {
                    if c.is_zero() {
                        continue;
                    }
                    let pre = f.prefix(n);
                    for (j, a) in pre.iter().enumerate() {
                        if !a.is_zero() {
                            out[j] = out[j].add(&c.mul(a));
                        }
                    }
                }
                out
            }
            Kind::Mul(f, g) => ser_mul(&f.prefix(n), &g.prefix(n), n),
            Kind::Pow(f, e) => ser_pow(&f.prefix(n), *e, n),
            Kind::Div(f, g) => {
                // find denominator valuation
                let mut probe = n + 1;
                let v = loop {
                    let gp = g.prefix(probe);
                    if let Some(v) = gp.iter().position(|c| !c.is_zero()) {
                        break v;
                    }
                    assert!(probe < 4 * (n + 1) + 64, "division by zero series");
                    probe = 2 * probe + 16;
                };
                let gp = g.prefix(n + v);
                let fp = f.prefix(n + v);
                for j in 0..v {
                    assert!(
                        fp[j].is_zero(),
                        "quotient is not holomorphic: numerator valuation below denominator"
                    );
                }
                let fs: Vec<Coef> = fp[v..].to_vec();
                let gs: Vec<Coef> = gp[v..].to_vec();
                ser_mul(&fs, &ser_inv(&gs, n), n)
            }
            Kind::Bd(f, d) => {
                let d = *d as usize;
                let pre = f.prefix(n / d);
                let mut out = vec![Coef::zero(); n + 1];
                for j in 0..=n {
                    if j % d == 0 {
                        out[j] = pre[j / d].clone();
                    }
                }
                out
            }
            Kind::Hecke(f, hn, lvl) => {
                let hn = *hn;
                let k = f
                    .weight()
                    .and_then(|w| w.to_integer().to_u32())
                    .expect("integral weight");
                let chi = f.0.character.clone().expect("character").lift_to(*lvl);
                let pre = f.prefix(n * hn as usize);
                let mut out = vec![Coef::zero(); n + 1];
                for (m, slot) in out.iter_mut().enumerate() {
                    let mut s = Coef::zero();
                    for d in arith::divisors(gcd(m as u64, hn).max(1)) {
                        let cv = chi.value(d as i64);
                        if cv.is_zero() {
                            continue;
                        }
                        let idx = (m as u64 / d) * (hn / d);
                        let a = &pre[idx as usize];
                        if a.is_zero() {
                            continue;
                        }
                        let w = cv.scale(&BigRational::from(BigInt::from(d).pow(k - 1)));
                        s = s.add(&Coef::Cyc(w).mul(a));
                    }
                    *slot = s;
                }
                out
            }
            Kind::DerivQ(f) => {
                let pre = f.prefix(n);
                pre.iter()
                    .enumerate()
                    .map(|(j, a)| a.mul(&Coef::from_i64(j as i64)))
                    .collect()
            }
            Kind::Serre(f) => {
                let k = f.weight().expect("Serre derivative needs a weight");
                let fp = f.prefix(n);
                let e2 = FormExpr::e_k(2).prefix(n);
                let prod = ser_mul(&e2, &fp, n);
                (0..=n)
                    .map(|j| {
                        let d = fp[j].mul(&Coef::from_i64(j as i64));
                        let c = Coef::Rat(k.clone() * big_rat(1, 12)).mul(&prod[j]);
                        d.sub(&c)
                    })
                    .collect()
            }
            Kind::RankinCohen(f, g, rc_n) => {
                let rc_n = *rc_n;
                let k = f
                    .weight()
                    .and_then(|w| w.to_integer().to_i64())
                    .expect("integral weight");
                let l = g
                    .weight()
                    .and_then(|w| w.to_integer().to_i64())
                    .expect("integral weight");
                let fp = f.prefix(n);
                let gp = g.prefix(n);
                let mut out = vec![Coef::zero(); n + 1];
                assert!(k + rc_n as i64 >= 1 && l + rc_n as i64 >= 1);
                for r in 0..=rc_n {
                    let s = rc_n - r;
                    // (-1)^r C(k+n-1, s) C(l+n-1, r) D^r f * D^s g
                    let c1 = arith::binomial((k + rc_n as i64 - 1) as u64, s as u64);
                    let c2 = arith::binomial((l + rc_n as i64 - 1) as u64, r as u64);
                    let mut c = BigRational::from(c1 * c2);
                    if r % 2 == 1 {
                        c = -c;
                    }
                    let df: Vec<Coef> = fp
                        .iter()
                        .enumerate()
                        .map(|(j, a)| a.mul(&Coef::Rat(BigRational::from(BigInt::from(j).pow(r)))))
                        .collect();
                    let dg: Vec<Coef> = gp
                        .iter()
                        .enumerate()
                        .map(|(j, a)| a.mul(&Coef::Rat(BigRational::from(BigInt::from(j).pow(s)))))
                        .collect();
                    let prod = ser_mul(&df, &dg, n);
                    for j in 0..=n {
                        if !prod[j].is_zero() {
                            out[j] = out[j].add(&prod[j].mul(&Coef::Rat(c.clone())));
                        }
                    }
                }
                out
            }
            Kind::Twist(f, psi) => {
                let pre = f.prefix(n);
                pre.iter()
                    .enumerate()
                    .map(|(j, a)| {
                        let v = psi.value(j as i64);
                        if v.is_zero() || a.is_zero() {
                            Coef::zero()
                        } else {
                            Coef::Cyc(v).mul(a)
                        }
                    })
                    .collect()
            }
        }
    }

    // -- serialization -------------------------------------------------------

    /// Prefix-notation serialization; `parse` round-trips it.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_text(&mut s);
        s
    }

    fn write_text(&self, s: &mut String) {
        use std::fmt::Write;
        match &self.0.kind {
            Kind::Const(c) => {
                write!(s, "(const {})", coef_text(c)).unwrap();
            }
            Kind::Ek(k) => {
                write!(s, "(E {})", k).unwrap();
            }
            Kind::Eta(pairs) => {
                write!(s, "(eta").unwrap();
                for (d, r) in pairs {
                    write!(s, " {}:{}", d, r).unwrap();
                }
                s.push(')');
            }
            Kind::ThetaChar(psi) => {
                write!(s, "(thetachar {}:{})", psi.modulus(), psi.conrey_index()).unwrap();
            }
            Kind::ThetaQf(g) => {
                write!(s, "(thetaqf {}", g.len()).unwrap();
                for row in g {
                    for v in row {
                        write!(s, " {}", v).unwrap();
                    }
                }
                s.push(')');
            }
            Kind::EisG { k, chi1, chi2, m } => {
                write!(
                    s,
                    "(eisenstein {} {}:{} {}:{} {})",
                    k,
                    chi1.modulus(),
                    chi1.conrey_index(),
                    chi2.modulus(),
                    chi2.conrey_index(),
                    m
                )
                .unwrap();
            }
            Kind::TraceForm { level, weight, chi, new } => {
                write!(
                    s,
                    "(traceform {} {} {}:{} {})",
                    level,
                    weight,
                    chi.modulus(),
                    chi.conrey_index(),
                    if *new { "new" } else { "full" }
                )
                .unwrap();
            }
            Kind::Linear(terms) => {
                write!(s, "(linear").unwrap();
                for (c, f) in terms {
                    write!(s, " {} ", coef_text(c)).unwrap();
                    f.write_text(s);
                }
                s.push(')');
            }
            Kind::Mul(f, g) => {
                s.push_str("(mul ");
                f.write_text(s);
                s.push(' ');
                g.write_text(s);
                s.push(')');
            }
            Kind::Pow(f, e) => {
                s.push_str("(pow ");
                f.write_text(s);
                write!(s, " {})", e).unwrap();
            }
            Kind::Div(f, g) => {
                s.push_str("(div ");
                f.write_text(s);
                s.push(' ');
                g.write_text(s);
                s.push(')');
            }
            Kind::Bd(f, d) => {
                s.push_str("(bd ");
                f.write_text(s);
                write!(s, " {})", d).unwrap();
            }
            Kind::Hecke(f, n, lvl) => {
                s.push_str("(hecke ");
                f.write_text(s);
                write!(s, " {} {})", n, lvl).unwrap();
            }
            Kind::DerivQ(f) => {
                s.push_str("(deriv ");
                f.write_text(s);
                s.push(')');
            }
            Kind::Serre(f) => {
                s.push_str("(serre ");
                f.write_text(s);
                s.push(')');
            }
            Kind::RankinCohen(f, g, n) => {
                s.push_str("(rc ");
                f.write_text(s);
                s.push(' ');
                g.write_text(s);
                write!(s, " {})", n).unwrap();
            }
            Kind::Twist(f, psi) => {
                s.push_str("(twist ");
                f.write_text(s);
                write!(s, " {}:{})", psi.modulus(), psi.conrey_index()).unwrap();
            }
        }
    }

    /// Parse the prefix serialization produced by `to_text`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let expr = parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(format!("trailing tokens at position {}", pos));
        }
        Ok(expr)
    }
}

fn coef_text(c: &Coef) -> String {
    match c {
        Coef::Rat(r) => format!("{}", r),
        Coef::Cyc(cy) => {
            let o = cy.order();
            let parts: Vec<String> = cy.coords().iter().map(|x| format!("{}", x)).collect();
            format!("C{{{}:{}}}", o, parts.join(","))
        }
        Coef::Rel(_) => panic!("relative-extension coefficients are not serialized"),
    }
}

fn parse_coef(tok: &str) -> Result<Coef, String> {
    if let Some(body) = tok.strip_prefix("C{").and_then(|t| t.strip_suffix('}')) {
        let (o, list) = body.split_once(':').ok_or("bad cyclotomic literal")?;
        let order: u64 = o.parse().map_err(|_| "bad order")?;
        let coords: Result<Vec<BigRational>, String> =
            list.split(',').map(parse_rational).collect();
        return Ok(Coef::Cyc(crate::cyclotomic::Cyc::from_coords(order, coords?)));
    }
    Ok(Coef::Rat(parse_rational(tok)?))
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().map_err(|_| format!("bad rational {}", s))?;
        let d: BigInt = d.parse().map_err(|_| format!("bad rational {}", s))?;
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| format!("bad integer {}", s))?;
        Ok(BigRational::from(n))
    }
}

fn parse_char(tok: &str) -> Result<DirichletCharacter, String> {
    let (m, a) = tok.split_once(':').ok_or("bad character token")?;
    let m: u64 = m.parse().map_err(|_| "bad modulus")?;
    let a: u64 = a.parse().map_err(|_| "bad index")?;
    DirichletCharacter::new(m, a).ok_or_else(|| format!("invalid character {}:{}", m, a))
}

fn tokenize(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    if out.is_empty() {
        return Err("empty input".into());
    }
    Ok(out)
}

fn parse_expr(tokens: &[String], pos: &mut usize) -> Result<FormExpr, String> {
    let expect = |pos: &mut usize, what: &str| -> Result<String, String> {
        let t = tokens.get(*pos).ok_or(format!("unexpected end, wanted {}", what))?;
        *pos += 1;
        Ok(t.clone())
    };
    let open = expect(pos, "(")?;
    if open != "(" {
        return Err(format!("expected '(' found {}", open));
    }
    let head = expect(pos, "operator")?;
    let result = match head.as_str() {
        "const" => {
            let c = parse_coef(&expect(pos, "coefficient")?)?;
            FormExpr::constant(c)
        }
        "E" => {
            let k: u32 = expect(pos, "weight")?.parse().map_err(|_| "bad weight")?;
            FormExpr::e_k(k)
        }
        "eta" => {
            let mut pairs = Vec::new();
            while tokens.get(*pos).map_or(false, |t| t != ")") {
                let t = expect(pos, "d:r")?;
                let (d, r) = t.split_once(':').ok_or("bad eta pair")?;
                pairs.push((
                    d.parse().map_err(|_| "bad eta d")?,
                    r.parse().map_err(|_| "bad eta r")?,
                ));
            }
            FormExpr::eta_quotient(&pairs)
        }
        "thetachar" => FormExpr::theta_char(&parse_char(&expect(pos, "character")?)?),
        "thetaqf" => {
            let r: usize = expect(pos, "dimension")?.parse().map_err(|_| "bad dim")?;
            let mut g = vec![vec![0i64; r]; r];
            for i in 0..r {
                for j in 0..r {
                    g[i][j] = expect(pos, "entry")?.parse().map_err(|_| "bad entry")?;
                }
            }
            FormExpr::theta_qf(g)
        }
        "eisenstein" => {
            let k: u32 = expect(pos, "weight")?.parse().map_err(|_| "bad weight")?;
            let c1 = parse_char(&expect(pos, "chi1")?)?;
            let c2 = parse_char(&expect(pos, "chi2")?)?;
            let m: u64 = expect(pos, "m")?.parse().map_err(|_| "bad m")?;
            FormExpr::eisenstein(k, &c1, &c2, m)
        }
        "traceform" => {
            let level: u64 = expect(pos, "level")?.parse().map_err(|_| "bad level")?;
            let weight: u32 = expect(pos, "weight")?.parse().map_err(|_| "bad weight")?;
            let chi = parse_char(&expect(pos, "character")?)?;
            let tag = expect(pos, "new|full")?;
            FormExpr::trace_form(level, weight, &chi, tag == "new")
        }
        "linear" => {
            let mut terms = Vec::new();
            while tokens.get(*pos).map_or(false, |t| t != ")") {
                let c = parse_coef(&expect(pos, "coefficient")?)?;
                let f = parse_expr(tokens, pos)?;
                terms.push((c, f));
            }
            FormExpr::linear(terms)
        }
        "mul" => {
            let f = parse_expr(tokens, pos)?;
            let g = parse_expr(tokens, pos)?;
            f.mul(&g)
        }
        "pow" => {
            let f = parse_expr(tokens, pos)?;
            let e: u32 = expect(pos, "exponent")?.parse().map_err(|_| "bad exponent")?;
            f.pow(e)
        }
        "div" => {
            let f = parse_expr(tokens, pos)?;
            let g = parse_expr(tokens, pos)?;
            f.div(&g)
        }
        "bd" => {
            let f = parse_expr(tokens, pos)?;
            let d: u64 = expect(pos, "d")?.parse().map_err(|_| "bad d")?;
            f.expand_bd(d)
        }
        "hecke" => {
            let f = parse_expr(tokens, pos)?;
            let n: u64 = expect(pos, "n")?.parse().map_err(|_| "bad n")?;
            let lvl: u64 = expect(pos, "level")?.parse().map_err(|_| "bad level")?;
            f.hecke_at(n, lvl)
        }
        "deriv" => parse_expr(tokens, pos)?.derivative(),
        "serre" => parse_expr(tokens, pos)?.serre_derivative(),
        "rc" => {
            let f = parse_expr(tokens, pos)?;
            let g = parse_expr(tokens, pos)?;
            let n: u32 = expect(pos, "n")?.parse().map_err(|_| "bad n")?;
            f.rankin_cohen(&g, n)
        }
        "twist" => {
            let f = parse_expr(tokens, pos)?;
            let psi = parse_char(&expect(pos, "character")?)?;
            f.twist(&psi)
        }
        other => return Err(format!("unknown operator {}", other)),
    };
    let close = expect(pos, ")")?;
    if close != ")" {
        return Err(format!("expected ')' found {}", close));
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// leaf expansions
// ---------------------------------------------------------------------------

/// E_k = 1 - (2k / B_k) sum sigma_(k-1)(n) q^n.
fn eisenstein_level_one(k: u32, upto: usize) -> Vec<Coef> {
    let bk = arith::bernoulli(k as usize);
    let scale = -big_rat(2 * k as i64, 1) / bk;
    let mut out = vec![Coef::zero(); upto + 1];
    out[0] = Coef::one();
    for n in 1..=upto {
        let mut s = BigInt::zero();
        for d in arith::divisors(n as u64) {
            s += BigInt::from(d).pow(k - 1);
        }
        out[n] = Coef::Rat(scale.clone() * BigRational::from(s));
    }
    out
}

/// Dedekind eta without the q^(1/24): prod (1 - q^n), by the pentagonal
/// number theorem.
fn euler_product(upto: usize) -> Vec<i64> {
    let mut e = vec![0i64; upto + 1];
    e[0] = 1;
    let mut j = 1i64;
    loop {
        let g1 = j * (3 * j - 1) / 2;
        let g2 = j * (3 * j + 1) / 2;
        if g1 as usize > upto && g2 as usize > upto {
            break;
        }
        let s = if j % 2 == 1 { -1 } else { 1 };
        if (g1 as usize) <= upto {
            e[g1 as usize] += s;
        }
        if (g2 as usize) <= upto {
            e[g2 as usize] += s;
        }
        j += 1;
    }
    e
}

fn eta_prefix(pairs: &[(u64, i64)], upto: usize) -> Vec<Coef> {
    let shift: i64 = pairs.iter().map(|&(d, r)| d as i64 * r).sum::<i64>() / 24;
    let shift = shift as usize;
    let mut num = vec![Coef::zero(); upto + 1];
    num[0] = Coef::one();
    let mut den = num.clone();
    for &(d, r) in pairs {
        let e = euler_product(upto / d as usize);
        let mut base = vec![Coef::zero(); upto + 1];
        for (i, &c) in e.iter().enumerate() {
            if i * d as usize <= upto && c != 0 {
                base[i * d as usize] = Coef::from_i64(c);
            }
        }
        let p = ser_pow(&base, r.unsigned_abs() as u32, upto);
        if r >= 0 {
            num = ser_mul(&num, &p, upto);
        } else {
            den = ser_mul(&den, &p, upto);
        }
    }
    let ratio = ser_mul(&num, &ser_inv(&den, upto), upto);
    let mut out = vec![Coef::zero(); upto + 1];
    if shift <= upto {
        for j in 0..=upto - shift {
            out[j + shift] = ratio[j].clone();
        }
    }
    out
}

/// Exact lattice-point counting for x^T G x <= upto via a rational LDL^T
/// decomposition and depth-first enumeration.
fn theta_qf_prefix(gram: &[Vec<i64>], upto: usize) -> Vec<Coef> {
    let r = gram.len();
    let g = Mat::<BigRational>::from_fn(r, r, |i, j| big_rat(gram[i][j], 1));
    // G = L D L^T with L unit lower triangular
    let mut l = Mat::<BigRational>::identity(r);
    let mut d = vec![big_rat(0, 1); r];
    let mut a = g.a.clone();
    for k in 0..r {
        d[k] = a[k][k].clone();
        assert!(d[k].is_positive(), "Gram matrix must be positive definite");
        for i in k + 1..r {
            l.a[i][k] = &a[i][k] / &d[k];
        }
        for i in k + 1..r {
            for j in k + 1..r {
                let t = &l.a[i][k] * &d[k] * &l.a[j][k];
                a[i][j] = &a[i][j] - &t;
            }
        }
    }
    // Q(x) = sum_k d_k (x_k + sum_(j>k) L[j][k] x_j)^2; enumerate from the last
    // coordinate inward
    let mut counts = vec![0u64; upto + 1];
    let bound = BigRational::from(BigInt::from(upto as u64));
    let mut x = vec![0i64; r];
    enumerate_lattice(&l, &d, &mut x, r, &bound, &mut counts, upto);
    counts.into_iter().map(|c| Coef::Rat(big_rat(c as i64, 1))).collect()
}

fn enumerate_lattice(
    l: &Mat<BigRational>,
    d: &[BigRational],
    x: &mut Vec<i64>,
    k: usize,
    remaining: &BigRational,
    counts: &mut [u64],
    upto: usize,
) {
    if k == 0 {
        // full vector chosen: accumulated norm is (bound - remaining)
        let used = BigRational::from(BigInt::from(upto as u64)) - remaining;
        debug_assert!(used.is_integer());
        let norm = used.to_integer().to_u64().unwrap() as usize;
        counts[norm] += 1;
        return;
    }
    let k = k - 1;
    // center c = sum_(j>k) L[j][k] x_j
    let mut c = big_rat(0, 1);
    for j in k + 1..l.rows {
        if x[j] != 0 {
            c += &l.a[j][k] * big_rat(x[j], 1);
        }
    }
    // d_k (x_k + c)^2 <= remaining
    let lim = remaining / &d[k];
    let lim_f = lim.to_f64().unwrap_or(0.0).max(0.0).sqrt();
    let c_f = c.to_f64().unwrap_or(0.0);
    let lo = (-c_f - lim_f).floor() as i64 - 1;
    let hi = (-c_f + lim_f).ceil() as i64 + 1;
    for v in lo..=hi {
        let t = big_rat(v, 1) + &c;
        let used = &d[k] * &t * &t;
        if &used <= remaining {
            x[k] = v;
            let rem = remaining - used;
            enumerate_lattice(l, d, x, k, &rem, counts, upto);
            x[k] = 0;
        }
    }
}

/// Coefficients of G_k(chi1, chi2)(m tau).
fn eis_g_prefix(
    k: u32,
    chi1: &DirichletCharacter,
    chi2: &DirichletCharacter,
    m: u64,
    upto: usize,
) -> Vec<Coef> {
    let n1 = chi1.modulus();
    let n2 = chi2.modulus();
    let mut out = vec![Coef::zero(); upto + 1];
    // constant term
    if n1 == 1 {
        let b = chi2.bernoulli(k as usize);
        let c = b.scale(&big_rat(-1, 2 * k as i64));
        if !c.is_zero() {
            out[0] = Coef::Cyc(c);
        }
    } else if k == 1 && n2 == 1 {
        let b = chi1.bernoulli(1);
        let c = b.scale(&big_rat(-1, 2));
        if !c.is_zero() {
            out[0] = Coef::Cyc(c);
        }
    }
    let ord = lcm(chi1.order(), chi2.order());
    for j in 1..=upto {
        if j % m as usize != 0 {
            continue;
        }
        let nn = j / m as usize;
        let mut counts = vec![big_rat(0, 1); ord as usize];
        for dd in arith::divisors(nn as u64) {
            let q = nn as u64 / dd;
            let (a1, a2) = (chi1.angle_index(q as i64), chi2.angle_index(dd as i64));
            if let (Some(a1), Some(a2)) = (a1, a2) {
                // angle as exponent of zeta_ord
                let e = (a1 * (ord / chi1.order()) + a2 * (ord / chi2.order())) % ord;
                counts[e as usize] += BigRational::from(BigInt::from(dd).pow(k - 1));
            }
        }
        let v = Cyc::from_root_counts(ord, &counts);
        if !v.is_zero() {
            out[j] = Coef::Cyc(v);
        }
    }
    out
}

/// Quadratic character attached to a nonzero integer D (via its squarefree
/// core): the Kronecker symbol (D* | .) for the fundamental discriminant D*
/// with the same square class.  D a perfect square gives the trivial
/// character mod 1.
pub fn quadratic_char_from_core(d: &BigInt) -> DirichletCharacter {
    assert!(!d.is_zero());
    let mut core = BigInt::one();
    // factor the absolute value (coefficients stay small in practice)
    let mut v = d.abs().to_u64().expect("discriminant too large");
    let mut p = 2u64;
    while p * p <= v {
        let mut e = 0;
        while v % p == 0 {
            v /= p;
            e += 1;
        }
        if e % 2 == 1 {
            core *= BigInt::from(p);
        }
        p += 1;
    }
    if v > 1 {
        core *= BigInt::from(v);
    }
    if d.is_negative() {
        core = -core;
    }
    let c = core.to_i64().unwrap();
    if c == 1 {
        return DirichletCharacter::trivial(1);
    }
    let fund = if (c - 1) % 4 == 0 { c } else { 4 * c };
    DirichletCharacter::from_discriminant(fund).expect("fundamental discriminant")
}

fn two_g_det(gram: &[Vec<i64>]) -> BigInt {
    let r = gram.len();
    let m = Mat::<BigRational>::from_fn(r, r, |i, j| big_rat(2 * gram[i][j], 1));
    // determinant by elimination over Q
    let mut a = m.a;
    let mut det = big_rat(1, 1);
    for col in 0..r {
        let piv = (col..r).find(|&i| !num_traits::Zero::is_zero(&a[i][col]));
        let piv = match piv {
            Some(p) => p,
            None => return BigInt::zero(),
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col].clone();
        let inv = big_rat(1, 1) / a[col][col].clone();
        for i in col + 1..r {
            let f = &a[i][col] * &inv;
            if num_traits::Zero::is_zero(&f) {
                continue;
            }
            for j in col..r {
                let t = &f * &a[col][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
    }
    assert!(det.is_integer());
    det.to_integer()
}

/// A finished q-expansion on the grid q^(alpha + j/w): coefficient j sits at
/// exponent alpha + j/w.  Integral expansions have alpha = 0, w = 1.
#[derive(Clone, Debug)]
pub struct QExpansion {
    pub alpha: Rational64,
    pub width: u64,
    pub coefs: Vec<Coef>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(c: &Coef) -> BigRational {
        c.as_rational().unwrap()
    }

    fn rats(v: &[Coef]) -> Vec<i64> {
        v.iter().map(|c| rat(c).to_integer().to_i64().unwrap()).collect()
    }

    #[test]
    fn delta_expansions() {
        let d = FormExpr::delta();
        assert_eq!(d.weight(), Some(big_rat(12, 1)));
        assert_eq!(d.level(), 1);
        let c = d.coeffs(8, 1);
        assert_eq!(
            rats(&c),
            vec![0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480]
        );
        // stride-2 grid
        let c2 = d.coeffs(3, 2);
        assert_eq!(rats(&c2), vec![0, -24, -1472, -6048]);
        assert_eq!(rat(&d.coef(7)), big_rat(-16744, 1));
    }

    #[test]
    fn eisenstein_level_one_series() {
        let e4 = FormExpr::e_k(4);
        assert_eq!(rats(&e4.coeffs(3, 1)), vec![1, 240, 2160, 6720]);
        let e6 = FormExpr::e_k(6);
        assert_eq!(rats(&e6.coeffs(3, 1)), vec![1, -504, -16632, -122976]);
        let e2 = FormExpr::e_k(2);
        assert!(e2.is_quasi());
        assert_eq!(rats(&e2.coeffs(3, 1)), vec![1, -24, -72, -96]);
        // E4^3 - E6^2 = 1728 Delta
        let diff = e4.pow(3).sub_form(&e6.pow(2));
        let delta = FormExpr::delta();
        for n in 0..=12u64 {
            assert_eq!(
                rat(&diff.coef(n)),
                rat(&delta.coef(n)) * big_rat(1728, 1),
                "n={}",
                n
            );
        }
    }

    #[test]
    fn jacobi_theta_fourth_power() {
        // theta^4 = theta(trivial)^4 has coefficients r_4(n) = 8 sigma(n) - 32 sigma(n/4)
        let theta = FormExpr::theta_char(&DirichletCharacter::trivial(1));
        assert_eq!(rats(&theta.coeffs(4, 1)), vec![1, 2, 0, 0, 2]);
        assert_eq!(theta.weight(), Some(big_rat(1, 2)));
        assert_eq!(theta.level(), 4);
        let t4 = theta.pow(4);
        assert_eq!(t4.weight(), Some(big_rat(2, 1)));
        let c = t4.coeffs(100, 1);
        for n in 1..=100u64 {
            let sigma = |m: u64| -> i64 {
                if m == 0 {
                    0
                } else {
                    arith::divisors(m).into_iter().sum::<u64>() as i64
                }
            };
            let expect = 8 * sigma(n) - 32 * sigma(n / 4) * if n % 4 == 0 { 1 } else { 0 };
            assert_eq!(rat(&c[n as usize]), big_rat(expect, 1), "r_4({})", n);
        }
    }

    #[test]
    fn lattice_theta_matches_power() {
        // identity 4x4 Gram: same as theta^4
        let id4 = FormExpr::theta_qf(vec![
            vec![1, 0, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ]);
        assert_eq!(rats(&id4.coeffs(4, 1)), vec![1, 8, 24, 32, 24]);
        assert_eq!(id4.weight(), Some(big_rat(2, 1)));
        assert_eq!(id4.level(), 4);
        let theta4 = FormExpr::theta_char(&DirichletCharacter::trivial(1)).pow(4);
        for n in 0..=30u64 {
            assert_eq!(rat(&id4.coef(n)), rat(&theta4.coef(n)), "n={}", n);
        }
    }

    #[test]
    fn serre_derivative_of_e4() {
        // Serre derivative of E4 is -E6/3
        let s = FormExpr::e_k(4).serre_derivative();
        assert_eq!(s.weight(), Some(big_rat(6, 1)));
        let e6 = FormExpr::e_k(6);
        for n in 0..=10u64 {
            assert_eq!(rat(&s.coef(n)), rat(&e6.coef(n)) * big_rat(-1, 3), "n={}", n);
        }
        assert_eq!(rat(&s.coef(1)), big_rat(168, 1));
    }

    #[test]
    fn rankin_cohen_brackets() {
        // [f, g]_0 = f g
        let e4 = FormExpr::e_k(4);
        let e6 = FormExpr::e_k(6);
        let rc0 = e4.rankin_cohen(&e6, 0);
        let prod = e4.mul(&e6);
        for n in 0..=10u64 {
            assert_eq!(rat(&rc0.coef(n)), rat(&prod.coef(n)));
        }
        // [E4, E6]_1 is a cusp form of weight 12: must be a multiple of Delta
        let rc1 = e4.rankin_cohen(&e6, 1);
        assert_eq!(rc1.weight(), Some(big_rat(12, 1)));
        assert_eq!(rat(&rc1.coef(0)), big_rat(0, 1));
        let delta = FormExpr::delta();
        let ratio = rat(&rc1.coef(1));
        for n in 1..=12u64 {
            assert_eq!(rat(&rc1.coef(n)), rat(&delta.coef(n)) * ratio.clone(), "n={}", n);
        }
        assert_eq!(ratio, big_rat(-3456, 1));
    }

    #[test]
    fn hecke_operator_on_delta() {
        // T(2) Delta = -24 Delta (tau is an eigenvalue system)
        let d = FormExpr::delta();
        let t2 = d.hecke(2);
        for n in 1..=10u64 {
            assert_eq!(rat(&t2.coef(n)), rat(&d.coef(n)) * big_rat(-24, 1), "n={}", n);
        }
        // multiplicativity: T(6) = T(2) T(3)
        let t6 = d.hecke(6);
        let t2t3 = d.hecke(3).hecke(2);
        for n in 1..=8u64 {
            assert_eq!(rat(&t6.coef(n)), rat(&t2t3.coef(n)), "n={}", n);
        }
    }

    #[test]
    fn bd_and_derivative() {
        let d = FormExpr::delta();
        let b2 = d.expand_bd(2);
        assert_eq!(b2.level(), 2);
        assert_eq!(rats(&b2.coeffs(6, 1)), vec![0, 0, 1, 0, -24, 0, 252]);
        let dd = d.derivative();
        assert_eq!(rats(&dd.coeffs(4, 1)), vec![0, 1, -48, 756, -5888]);
        assert!(dd.is_quasi());
    }

    #[test]
    fn division_and_valuation() {
        // Delta^2 / Delta = Delta
        let d = FormExpr::delta();
        let q = d.pow(2).div(&d);
        for n in 0..=10u64 {
            assert_eq!(rat(&q.coef(n)), rat(&d.coef(n)), "n={}", n);
        }
        // E4 * Delta / Delta = E4
        let e4 = FormExpr::e_k(4);
        let q2 = e4.mul(&d).div(&d);
        for n in 0..=10u64 {
            assert_eq!(rat(&q2.coef(n)), rat(&e4.coef(n)));
        }
    }

    #[test]
    fn twist_of_delta() {
        // twisting Delta by the quadratic character mod 3
        let chi3 = DirichletCharacter::from_discriminant(-3).unwrap();
        let d = FormExpr::delta();
        let tw = d.twist(&chi3);
        assert_eq!(tw.level(), 9);
        assert_eq!(rat(&tw.coef(1)), big_rat(1, 1));
        assert_eq!(rat(&tw.coef(2)), big_rat(24, 1)); // chi(2) = -1
        assert!(tw.coef(3).is_zero());
        assert_eq!(rat(&tw.coef(4)), big_rat(-1472, 1)); // chi(4) = 1
    }

    #[test]
    fn eisenstein_pair_series() {
        // G_3(1, chi_{-4}): a(0) = -B_{3,chi}/(6) = -1/4, a(n) = sum chi(d) d^2
        let triv = DirichletCharacter::trivial(1);
        let chi4 = DirichletCharacter::from_discriminant(-4).unwrap();
        let g = FormExpr::eisenstein(3, &triv, &chi4, 1);
        assert_eq!(g.level(), 4);
        assert_eq!(rat(&g.coef(0)), big_rat(-1, 4));
        assert_eq!(rat(&g.coef(1)), big_rat(1, 1));
        assert_eq!(rat(&g.coef(3)), big_rat(-8, 1));
        assert_eq!(rat(&g.coef(5)), big_rat(26, 1));
        // expansion at 2*tau shifts the grid
        let g2 = FormExpr::eisenstein(3, &triv, &chi4, 2);
        assert_eq!(g2.level(), 8);
        assert!(g2.coef(1).is_zero());
        assert_eq!(rat(&g2.coef(2)), big_rat(1, 1));
        assert_eq!(rat(&g2.coef(6)), big_rat(-8, 1));
    }

    #[test]
    fn trace_form_leaf() {
        let triv = DirichletCharacter::trivial(11);
        let t = FormExpr::trace_form(11, 2, &triv, false);
        assert_eq!(rats(&t.coeffs(5, 1)), vec![0, 1, -2, -1, 2, 1]);
        // Hecke image of the trace form stays in the space
        let t3 = t.hecke(3);
        // a(1) of T(3) tr = tr(T(3)) = -1
        assert_eq!(rat(&t3.coef(1)), big_rat(-1, 1));
    }

    #[test]
    fn serialization_round_trip() {
        let chi4 = DirichletCharacter::from_discriminant(-4).unwrap();
        let triv = DirichletCharacter::trivial(1);
        let exprs = vec![
            FormExpr::delta(),
            FormExpr::e_k(4).pow(3).sub_form(&FormExpr::e_k(6).pow(2)),
            FormExpr::eisenstein(3, &triv, &chi4, 2).hecke(3),
            FormExpr::theta_char(&chi4).mul(&FormExpr::eta_quotient(&[(1, 8), (2, 8)])),
            FormExpr::delta().twist(&DirichletCharacter::from_discriminant(-3).unwrap()),
            FormExpr::trace_form(23, 2, &DirichletCharacter::trivial(23), true),
            FormExpr::e_k(4).rankin_cohen(&FormExpr::e_k(6), 2),
            FormExpr::theta_qf(vec![vec![2, 1], vec![1, 2]]),
            FormExpr::delta()
                .scale(Coef::Cyc(Cyc::root_of_unity(4, 1)))
                .add(&FormExpr::e_k(12)),
        ];
        for f in exprs {
            let text = f.to_text();
            let g = FormExpr::parse(&text).unwrap_or_else(|e| panic!("parse {}: {}", text, e));
            assert_eq!(g.to_text(), text);
            let a = f.coeffs(10, 1);
            let b = g.coeffs(10, 1);
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x, y, "mismatch after round trip of {}", text);
            }
            assert_eq!(f.weight(), g.weight());
            assert_eq!(f.level(), g.level());
        }
    }

    #[test]
    fn grid_consistency() {
        // coeffs(f, L, d)[j] == coeffs(f, L*d, 1)[j*d] on a few structured trees
        let chi4 = DirichletCharacter::from_discriminant(-4).unwrap();
        let trees = vec![
            FormExpr::delta(),
            FormExpr::e_k(4).mul(&FormExpr::delta()),
            FormExpr::eisenstein(3, &DirichletCharacter::trivial(1), &chi4, 2),
            FormExpr::delta().expand_bd(3),
            FormExpr::theta_char(&DirichletCharacter::trivial(1)).pow(4),
        ];
        for f in trees {
            for d in [1u64, 2, 3] {
                let l = 6;
                let grid = f.coeffs(l, d);
                let flat = f.coeffs(l * d, 1);
                for j in 0..=l as usize {
                    assert_eq!(grid[j], flat[j * d as usize]);
                }
            }
        }
    }

    #[test]
    fn eta_level_and_character() {
        // eta(4t)^6: weight 3, level 16? level: base 4, L*6/4 = 0 mod 24 -> L=16
        let f = FormExpr::eta_quotient(&[(4, 6)]);
        assert_eq!(f.weight(), Some(big_rat(3, 1)));
        assert_eq!(f.level(), 16);
        let chi = f.character().unwrap();
        // character of discriminant (-1)^3 * 4^6: core -1 -> chi_{-4}
        assert_eq!(chi.conductor(), 4);
        // eta(t)^2 eta(11t)^2: level 11 trivial character
        let g = FormExpr::eta_quotient(&[(1, 2), (11, 2)]);
        assert_eq!(g.level(), 11);
        assert_eq!(g.character().unwrap().conductor(), 1);
        // negative exponents: h = eta(t)^48/eta(2t)^24 satisfies
        // h * eta(2t)^24 = eta(t)^48
        let h = FormExpr::eta_quotient(&[(1, 48), (2, -24)]);
        assert_eq!(h.weight(), Some(big_rat(12, 1)));
        assert_eq!(rat(&h.coef(0)), big_rat(1, 1));
        let lhs = h.mul(&FormExpr::eta_quotient(&[(2, 24)]));
        let rhs = FormExpr::eta_quotient(&[(1, 48)]);
        for n in 0..=15u64 {
            assert_eq!(rat(&lhs.coef(n)), rat(&rhs.coef(n)), "n={}", n);
        }
    }

    #[test]
    fn linear_weight_tracking() {
        let e4 = FormExpr::e_k(4);
        let d = FormExpr::delta();
        let mixed = FormExpr::linear(vec![(Coef::one(), e4.clone()), (Coef::one(), d.clone())]);
        assert_eq!(mixed.weight(), None);
        let same = FormExpr::linear(vec![
            (Coef::from_i64(2), d.clone()),
            (Coef::from_i64(-1), d.clone()),
        ]);
        assert_eq!(same.weight(), Some(big_rat(12, 1)));
        for n in 0..=6u64 {
            assert_eq!(rat(&same.coef(n)), rat(&d.coef(n)));
        }
    }
}
