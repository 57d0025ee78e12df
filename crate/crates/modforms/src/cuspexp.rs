//! Fourier expansions of f |_k gamma at arbitrary cusps.
//!
//! The engine rests on the Eisenstein series attached to a row vector v in
//! (Z/NZ)^2,
//!
//!     G_k^(v)(tau) = sum' (m tau + n)^-k   over (m, n) = v (mod N),
//!
//! absolutely convergent for k >= 3, on which the weight-k action of
//! SL_2(Z) is a pure permutation of indices: G_k^(v) |_k gamma =
//! G_k^(v gamma).  Normalized by N^k (k-1)! / (-2 pi i)^k, the Fourier
//! coefficients on the q^(1/N) grid lie in Q(zeta_N): the coefficient of
//! q^(j/N) for j >= 1 is
//!
//!     sum_{r m = j, m = v1 (N)} r^(k-1) zeta_N^(r v2)
//!       + (-1)^k sum_{r m = j, m = -v1 (N)} r^(k-1) zeta_N^(-r v2),
//!
//! and the constant term (nonzero only for v1 = 0 (N)) comes from the
//! classical evaluation sum_{n = v2 (N)} n^-k = (-1)^(k-1) pi^k
//! Q_{k-1}(cot(pi v2 / N)) / (N^k (k-1)!) where Q_0 = c and Q_{j+1} =
//! -(1 + c^2) Q_j'.  Since cot(pi a/N) = i (zeta + 1)/(zeta - 1) with
//! zeta = zeta_N^a, the constant is again exact in Q(zeta_N).
//!
//! A series G_k(chi1, chi2; m tau) from the Eisenstein basis expands over
//! these coset series at any multiple N of N1 N2 m:
//!
//!     G_k(chi1, chi2; m tau)
//!       = N2^(k-1) g(chi2) / (2 chi2(-1) N^k)
//!         * sum_v chi1(v1 / (N2 m)) conj(chi2)(v2) G_k^(v),
//!
//! the sum over v1 = 0 (mod N2 m) and all v2 (g(chi2) is the Gauss sum).
//! Writing a basis form as an exact linear combination of products of two
//! such series therefore turns f |_k gamma into elementary operations on
//! q-expansions: permute indices, multiply series, and divide back any
//! weight-lifting factor.  Everything stays in a cyclotomic field; floating
//! point enters only when the caller asks for complex embeddings.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{self, big_rat};
use crate::cyclotomic::{normalize_order, Cyc};
use crate::dirichlet::DirichletCharacter;
use crate::eisenstein::{weisinger_basis, EisKey};
use crate::linalg::Mat;
use crate::qseries::FormExpr;
use crate::spaces::{sturm_bound, ModularSpace};

/// Integer 2x2 matrix [[a, b], [c, d]].
pub type Mat2 = [[i64; 2]; 2];

/// Determinant of a 2x2 integer matrix.
pub fn det2(m: &Mat2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Product of two 2x2 integer matrices.
pub fn mat_mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            return (-a, -1, 0);
        }
        return (a, 1, 0);
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

/// Exact square root of a positive integer inside a cyclotomic field
/// (sqrt(2) = zeta_8 + zeta_8^-1, odd sqrt(p) via quadratic Gauss sums).
pub fn cyc_sqrt(n: u64) -> Cyc {
    assert!(n > 0, "square root of a positive integer only");
    let mut rational = BigInt::from(1);
    let mut root = Cyc::one();
    for (p, e) in arith::factor(n) {
        rational *= BigInt::from(p).pow(e / 2);
        if e % 2 == 1 {
            root = root.mul(&sqrt_prime(p));
        }
    }
    root.scale(&BigRational::from(rational))
}

fn sqrt_prime(p: u64) -> Cyc {
    if p == 2 {
        return Cyc::root_of_unity(8, 1).add(&Cyc::root_of_unity(8, -1));
    }
    if p % 4 == 1 {
        DirichletCharacter::from_discriminant(p as i64)
            .expect("fundamental discriminant")
            .gauss_sum()
    } else {
        // g = i sqrt(p) for the odd quadratic character of conductor p.
        DirichletCharacter::from_discriminant(-(p as i64))
            .expect("fundamental discriminant")
            .gauss_sum()
            .mul(&Cyc::root_of_unity(4, -1))
    }
}

// ---------------------------------------------------------------------------
// Coset Eisenstein series.
// ---------------------------------------------------------------------------

/// The series G_k^(v) for v in (Z/NZ)^2, k >= 3, in the normalization with
/// Fourier coefficients in Q(zeta_N) on the q^(1/N) grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetEisenstein {
    pub level: u64,
    pub weight: u32,
    pub v: (u64, u64),
}

impl CosetEisenstein {
    pub fn new(level: u64, weight: u32, v: (u64, u64)) -> Self {
        assert!(level >= 1);
        assert!(weight >= 3, "the index sum only converges for weight >= 3");
        CosetEisenstein { level, weight, v: (v.0 % level, v.1 % level) }
    }

    /// Right action of an integral matrix of determinant 1: the index is the
    /// row vector v gamma.
    pub fn slashed(&self, gamma: &Mat2) -> Self {
        assert_eq!(det2(gamma), 1, "permutation action needs determinant 1");
        CosetEisenstein {
            level: self.level,
            weight: self.weight,
            v: slash_index(self.level, self.v, gamma),
        }
    }

    /// Coefficients of q^(0/N), ..., q^(upto/N).
    pub fn expansion(&self, upto: usize) -> Vec<Cyc> {
        coset_expansion(self.level, self.weight, self.v, upto)
    }
}

fn slash_index(level: u64, v: (u64, u64), gamma: &Mat2) -> (u64, u64) {
    let n = level as i128;
    let (v1, v2) = (v.0 as i128, v.1 as i128);
    let a = (v1 * gamma[0][0] as i128 + v2 * gamma[1][0] as i128).rem_euclid(n);
    let b = (v1 * gamma[0][1] as i128 + v2 * gamma[1][1] as i128).rem_euclid(n);
    (a as u64, b as u64)
}

type CosetKey = (u64, u32, u64, u64);

fn coset_cache() -> &'static Mutex<HashMap<CosetKey, Vec<Cyc>>> {
    static CACHE: OnceLock<Mutex<HashMap<CosetKey, Vec<Cyc>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn coset_expansion(level: u64, k: u32, v: (u64, u64), upto: usize) -> Vec<Cyc> {
    let key = (level, k, v.0 % level, v.1 % level);
    {
        let cache = coset_cache().lock().unwrap();
        if let Some(known) = cache.get(&key) {
            if known.len() > upto {
                return known[..=upto].to_vec();
            }
        }
    }
    let fresh = coset_expansion_uncached(level, k, key.2, key.3, upto);
    let mut cache = coset_cache().lock().unwrap();
    let slot = cache.entry(key).or_default();
    if fresh.len() > slot.len() {
        *slot = fresh.clone();
    }
    fresh
}

fn coset_expansion_uncached(n: u64, k: u32, v1: u64, v2: u64, upto: usize) -> Vec<Cyc> {
    let mut out = vec![Cyc::zero(); upto + 1];
    if v1 == 0 {
        out[0] = coset_constant(n, k, v2);
    }
    let neg_v1 = (n - v1) % n;
    for j in 1..=upto {
        let mut acc = Cyc::zero();
        for r in arith::divisors(j as u64) {
            let m = j as u64 / r;
            let rpow = BigRational::from(BigInt::from(r).pow(k - 1));
            if m % n == v1 {
                let z = Cyc::root_of_unity(n, (r % n) as i64 * v2 as i64);
                acc = acc.add(&z.scale(&rpow));
            }
            if m % n == neg_v1 {
                let z = Cyc::root_of_unity(n, -((r % n) as i64) * v2 as i64);
                let t = z.scale(&rpow);
                acc = if k % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
        }
        out[j] = acc;
    }
    out
}

/// N^k (k-1)!/(-2 pi i)^k * sum over n = v2 (mod N), n != 0, of n^-k.
fn coset_constant(n: u64, k: u32, v2: u64) -> Cyc {
    assert!(k >= 3 && k < 32);
    if v2 % n == 0 {
        if k % 2 == 1 {
            return Cyc::zero();
        }
        // 2 zeta(k) in this normalization is -B_k/k.
        let b = arith::bernoulli(k as usize);
        return Cyc::one().scale(&(-b / big_rat(k as i64, 1)));
    }
    // Q_{k-1} with Q_0 = c, Q_{j+1} = -(1 + c^2) Q_j', as coefficients in c.
    let mut q: Vec<BigRational> = vec![big_rat(0, 1), big_rat(1, 1)];
    for _ in 1..k {
        let mut deriv = vec![BigRational::zero(); q.len().max(1) - 1];
        for (i, c) in q.iter().enumerate().skip(1) {
            deriv[i - 1] = c * BigRational::from(BigInt::from(i));
        }
        let mut next = vec![BigRational::zero(); deriv.len() + 2];
        for (i, c) in deriv.iter().enumerate() {
            next[i] -= c;
            next[i + 2] -= c;
        }
        q = next;
    }
    // cot(pi v2/N) = i r with r = (zeta + 1)/(zeta - 1); substitute and clear
    // the power of i against 1/(2i)^k, which leaves rational combinations of
    // powers of r because Q_{k-1} only has monomials of the parity of k.
    let one = Cyc::one();
    let zeta = Cyc::root_of_unity(n, v2 as i64);
    let r = zeta.add(&one).div(&zeta.sub(&one));
    let mut acc = Cyc::zero();
    let mut rpow = Cyc::one();
    for (m, coef) in q.iter().enumerate() {
        if !coef.is_zero() {
            debug_assert_eq!(m as u32 % 2, k % 2);
            let mut c = coef.clone();
            if (m as i64 - k as i64).div_euclid(2).rem_euclid(2) == 1 {
                c = -c;
            }
            acc = acc.add(&rpow.scale(&c));
        }
        rpow = rpow.mul(&r);
    }
    acc.scale(&big_rat(-1, 1i64 << k))
}

// ---------------------------------------------------------------------------
// Bridging a basis Eisenstein series onto the coset family.
// ---------------------------------------------------------------------------

/// G_k(chi1, chi2; m tau) as a finite weighted sum of coset series at an
/// ambient level divisible by N1 N2 m.
struct BridgedEis {
    weight: u32,
    level: u64,
    scalar: Cyc,
    terms: Vec<((u64, u64), Cyc)>,
}

fn bridge_key(key: &EisKey, ambient: u64) -> BridgedEis {
    assert!(key.k >= 3, "only absolutely convergent weights bridge to coset series");
    let n1 = key.chi1.modulus();
    let n2 = key.chi2.modulus();
    let m = key.m;
    assert_eq!(ambient % (n1 * n2 * m), 0, "ambient level must absorb the key");
    let chi2c = key.chi2.conj();
    let col: Vec<Cyc> = (0..n2).map(|d| chi2c.value(d as i64)).collect();
    let step = n2 * m;
    let mut terms = Vec::new();
    for t in 0..ambient / step {
        let w1 = key.chi1.value((t % n1) as i64);
        if w1.is_zero() {
            continue;
        }
        let v1 = t * step;
        for v2 in 0..ambient {
            let w2 = &col[(v2 % n2) as usize];
            if w2.is_zero() {
                continue;
            }
            terms.push(((v1, v2), w1.mul(w2)));
        }
    }
    let sign = key.chi2.parity(); // chi2(-1)
    let nk = BigRational::from(BigInt::from(ambient).pow(key.k));
    let n2pow = BigRational::from(BigInt::from(n2).pow(key.k - 1));
    let scalar = key
        .chi2
        .gauss_sum()
        .scale(&(n2pow / (big_rat(2 * sign, 1) * nk)));
    BridgedEis { weight: key.k, level: ambient, scalar, terms }
}

impl BridgedEis {
    /// q^(j/N)-coefficients (j <= upto) of the sum slashed by gamma.
    fn slashed_series(&self, gamma: &Mat2, upto: usize) -> Vec<Cyc> {
        let mut acc = vec![Cyc::zero(); upto + 1];
        for (v, weight) in &self.terms {
            let sv = slash_index(self.level, *v, gamma);
            let exp = coset_expansion(self.level, self.weight, sv, upto);
            for (slot, coef) in acc.iter_mut().zip(exp.iter()) {
                if !coef.is_zero() {
                    *slot = slot.add(&coef.mul(weight));
                }
            }
        }
        for slot in acc.iter_mut() {
            if !slot.is_zero() {
                *slot = slot.mul(&self.scalar);
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Cusp parameters.
// ---------------------------------------------------------------------------

/// For gamma = [a,b;c,d] in SL_2(Z) acting on M_k(Gamma_0(N), chi), the
/// expansion of f |_k gamma is q^alpha sum a(n) q^(n/w).  The width is
/// w = N / gcd(N, c^2) and alpha in [0, 1/w) satisfies
/// chi(1 + a c w) = e^(2 pi i alpha w).
pub fn slash_params(
    level: u64,
    chi: &DirichletCharacter,
    gamma: &Mat2,
) -> (BigRational, u64) {
    assert_eq!(det2(gamma), 1, "cusp parameters are defined for determinant 1");
    let n = level as i128;
    let c = (gamma[1][0] as i128).rem_euclid(n) as u64;
    let c2 = ((c as u128 * c as u128) % level as u128) as u64;
    let w = level / arith::gcd(level, c2);
    let arg = (1 + gamma[0][0] as i128 * c as i128 * w as i128).rem_euclid(n);
    let ang = chi
        .angle(arg as i64)
        .expect("1 + a c w is a unit modulo the level");
    let alpha = BigRational::new(
        BigInt::from(*ang.numer()),
        BigInt::from(*ang.denom()) * BigInt::from(w),
    );
    (alpha, w)
}

/// Coefficient-field bound for f |_k gamma: with gamma = [A,B;C,D] integral,
/// N the level and M the conductor of the character, the coefficients lie in
/// K(zeta_u) for u = lcm(N/gcd(N, C D), M/gcd(M, B C)).
pub fn field_bound(level: u64, conductor: u64, gamma: &Mat2) -> u64 {
    let part = |modulus: u64, x: i128| -> u64 {
        let r = (x.unsigned_abs() % modulus as u128) as u64;
        modulus / arith::gcd(modulus, r)
    };
    let cd = gamma[1][0] as i128 * gamma[1][1] as i128;
    let bc = gamma[0][1] as i128 * gamma[1][0] as i128;
    arith::lcm(part(level, cd), part(conductor.max(1), bc))
}

// ---------------------------------------------------------------------------
// Decomposition into products of two Eisenstein series.
// ---------------------------------------------------------------------------

/// One summand c * F1 * F2 with F1, F2 from the Eisenstein basis enumeration
/// (F1 absent when the summand is a single series).
#[derive(Clone, Debug)]
pub struct EisProduct {
    pub coefficient: Cyc,
    pub left: Option<EisKey>,
    pub right: EisKey,
}

/// An exact expression of every basis element of a space as a linear
/// combination of products of at most two Eisenstein series, possibly after
/// multiplying the space by a level-one form to reach a weight where all
/// factors have weight >= 3.
pub struct ProductDecomposition {
    pub level: u64,
    pub weight: u32,
    pub lifted_weight: u32,
    /// The level-one multiplier (E4, E6, E4^2 or Delta) when the target
    /// weight needed lifting; the decomposition then expresses basis * lift.
    pub lift: Option<FormExpr>,
    pub lift_name: &'static str,
    /// Per basis element of the space, in basis order.
    pub terms: Vec<Vec<EisProduct>>,
}

type DecompKey = (u64, u32, u64, u8);

fn decomp_cache() -> &'static Mutex<HashMap<DecompKey, Arc<ProductDecomposition>>> {
    static CACHE: OnceLock<Mutex<HashMap<DecompKey, Arc<ProductDecomposition>>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Decompose every basis element of the space into products of two
/// Eisenstein series, lifting the weight by a level-one form when the weight
/// is too small for both factors to have weight >= 3.  Results are cached
/// per space.
pub fn product_decomposition(space: &ModularSpace) -> Arc<ProductDecomposition> {
    let key: DecompKey = (
        space.level,
        space.weight,
        space.character.conrey_index(),
        space.code.code(),
    );
    if let Some(hit) = decomp_cache().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let k = space.weight;
    let ladder: Vec<(Option<FormExpr>, u32, &'static str)> = if k >= 6 {
        vec![
            (None, k, ""),
            (Some(FormExpr::e_k(4)), k + 4, "E4"),
            (Some(FormExpr::e_k(6)), k + 6, "E6"),
            (Some(FormExpr::delta()), k + 12, "Delta"),
        ]
    } else {
        vec![
            (Some(FormExpr::e_k(4)), k + 4, "E4"),
            (Some(FormExpr::e_k(6)), k + 6, "E6"),
            (Some(FormExpr::e_k(4).pow(2)), k + 8, "E4^2"),
            (Some(FormExpr::delta()), k + 12, "Delta"),
        ]
    };
    for (lift, lifted_weight, name) in ladder {
        if let Some(terms) = try_decompose(space, lift.as_ref(), lifted_weight) {
            let dec = Arc::new(ProductDecomposition {
                level: space.level,
                weight: k,
                lifted_weight,
                lift,
                lift_name: name,
                terms,
            });
            decomp_cache().lock().unwrap().insert(key, dec.clone());
            return dec;
        }
    }
    panic!(
        "no Eisenstein-product decomposition found for level {} weight {} \
         even after lifting by Delta",
        space.level, space.weight
    );
}

fn coef_row(f: &FormExpr, upto: usize) -> Vec<Cyc> {
    f.prefix(upto)
        .iter()
        .map(|c| c.as_cyc().expect("cyclotomic coefficients"))
        .collect()
}

fn try_decompose(
    space: &ModularSpace,
    lift: Option<&FormExpr>,
    lifted_weight: u32,
) -> Option<Vec<Vec<EisProduct>>> {
    let n = space.level;
    let chi = &space.character;
    let st = sturm_bound(n, lifted_weight) as usize;
    let lift_row = lift.map(|e| coef_row(e, st));
    let targets: Vec<Vec<Cyc>> = space
        .basis
        .iter()
        .map(|b| {
            let row = coef_row(b, st);
            match &lift_row {
                Some(lp) => ser_mul(&row, lp, st),
                None => row,
            }
        })
        .collect();
    if targets.is_empty() {
        return Some(Vec::new());
    }

    // Echelon rows are fully reduced against each other, so reducing a
    // residual against each newly inserted row keeps it reduced.
    let mut echelon: Vec<(usize, Vec<Cyc>)> = Vec::new();
    let mut kept: Vec<(Option<EisKey>, EisKey, Vec<Cyc>)> = Vec::new();
    let mut residuals = targets.clone();

    let reduce = |echelon: &[(usize, Vec<Cyc>)], row: &mut Vec<Cyc>| {
        for (p, r) in echelon {
            if !row[*p].is_zero() {
                let c = row[*p].clone();
                for (x, y) in row.iter_mut().zip(r.iter()) {
                    *x = x.sub(&c.mul(y));
                }
            }
        }
    };
    for r in residuals.iter_mut() {
        reduce(&echelon, r);
    }
    let solved =
        |residuals: &[Vec<Cyc>]| residuals.iter().all(|r| r.iter().all(Cyc::is_zero));

    let mut key_rows: HashMap<(u32, u64, u64, u64, u64, u64), Vec<Cyc>> = HashMap::new();
    let mut row_of = |key: &EisKey, st: usize| -> Vec<Cyc> {
        let id = (
            key.k,
            key.chi1.modulus(),
            key.chi1.conrey_index(),
            key.chi2.modulus(),
            key.chi2.conrey_index(),
            key.m,
        );
        key_rows
            .entry(id)
            .or_insert_with(|| coef_row(&key.form(), st))
            .clone()
    };

    let mut done = solved(&residuals);
    let consider = |left: Option<EisKey>,
                        right: EisKey,
                        row: Vec<Cyc>,
                        echelon: &mut Vec<(usize, Vec<Cyc>)>,
                        kept: &mut Vec<(Option<EisKey>, EisKey, Vec<Cyc>)>,
                        residuals: &mut Vec<Vec<Cyc>>|
     -> bool {
        let mut reduced = row.clone();
        reduce(echelon, &mut reduced);
        let pivot = match reduced.iter().position(|c| !c.is_zero()) {
            Some(p) => p,
            None => return false,
        };
        let inv = reduced[pivot].inv();
        for x in reduced.iter_mut() {
            *x = x.mul(&inv);
        }
        for r in residuals.iter_mut() {
            if !r[pivot].is_zero() {
                let c = r[pivot].clone();
                for (x, y) in r.iter_mut().zip(reduced.iter()) {
                    *x = x.sub(&c.mul(y));
                }
            }
        }
        echelon.push((pivot, reduced));
        kept.push((left, right, row));
        true
    };

    // Single series of the full lifted weight first, then split products.
    if !done {
        for key in weisinger_basis(n, lifted_weight, chi) {
            let row = row_of(&key, st);
            consider(None, key, row, &mut echelon, &mut kept, &mut residuals);
            if solved(&residuals) {
                done = true;
                break;
            }
        }
    }
    if !done {
        'outer: for k1 in 3..=lifted_weight.saturating_sub(3) {
            let k2 = lifted_weight - k1;
            for chi1 in DirichletCharacter::all(n) {
                let keys1 = weisinger_basis(n, k1, &chi1);
                if keys1.is_empty() {
                    continue;
                }
                let chi2 = chi.mul(&chi1.conj());
                let keys2 = weisinger_basis(n, k2, &chi2);
                for key1 in &keys1 {
                    let row1 = row_of(key1, st);
                    for key2 in &keys2 {
                        let row2 = row_of(key2, st);
                        let row = ser_mul(&row1, &row2, st);
                        consider(
                            Some(key1.clone()),
                            key2.clone(),
                            row,
                            &mut echelon,
                            &mut kept,
                            &mut residuals,
                        );
                        if solved(&residuals) {
                            done = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    if !done {
        return None;
    }

    // Solve the targets against the kept product rows in one reduction.
    let cols = kept.len() + targets.len();
    let mut m = Mat::from_fn(st + 1, cols, |i, j| {
        if j < kept.len() {
            kept[j].2[i].clone()
        } else {
            targets[j - kept.len()][i].clone()
        }
    });
    let pivots = m.rref();
    let mut terms = Vec::with_capacity(targets.len());
    for t in 0..targets.len() {
        let tc = kept.len() + t;
        assert!(!pivots.contains(&tc), "target escaped the product span");
        let mut entry = Vec::new();
        for (row, pc) in pivots.iter().enumerate() {
            let c = m.a[row][tc].clone();
            if !c.is_zero() {
                let (left, right, _) = &kept[*pc];
                entry.push(EisProduct {
                    coefficient: c,
                    left: left.clone(),
                    right: right.clone(),
                });
            }
        }
        terms.push(entry);
    }
    Some(terms)
}

// ---------------------------------------------------------------------------
// Truncated series arithmetic on the q^(1/N) grid.
// ---------------------------------------------------------------------------

fn ser_mul(a: &[Cyc], b: &[Cyc], upto: usize) -> Vec<Cyc> {
    let mut out = vec![Cyc::zero(); upto + 1];
    for (i, x) in a.iter().enumerate().take(upto + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(upto + 1 - i) {
            if !y.is_zero() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    out
}

/// num / den truncated after `upto` coefficients, shifting out the valuation
/// of the denominator (the numerator must vanish at least as deeply).
fn ser_div(num: &[Cyc], den: &[Cyc], upto: usize) -> Vec<Cyc> {
    let val = den
        .iter()
        .position(|c| !c.is_zero())
        .expect("division by the zero series");
    for (i, c) in num.iter().enumerate().take(val) {
        assert!(c.is_zero(), "quotient would have a pole (index {i})");
    }
    let lead = den[val].inv();
    let mut out = vec![Cyc::zero(); upto + 1];
    for j in 0..=upto {
        let mut acc = match num.get(val + j) {
            Some(c) => c.clone(),
            None => Cyc::zero(),
        };
        for (i, o) in out.iter().enumerate().take(j) {
            if !o.is_zero() {
                if let Some(d) = den.get(val + j - i) {
                    if !d.is_zero() {
                        acc = acc.sub(&o.mul(d));
                    }
                }
            }
        }
        out[j] = acc.mul(&lead);
    }
    out
}

// ---------------------------------------------------------------------------
// The expansion of f |_k gamma.
// ---------------------------------------------------------------------------

/// Expansion q^alpha sum_{n=0..} a(n) q^(n/width) of f |_k gamma, with
/// exact cyclotomic coefficients.
pub struct SlashExpansion {
    pub alpha: BigRational,
    pub width: u64,
    /// The matrix the form was slashed by (integral, positive determinant).
    pub gamma: Mat2,
    /// a(0), ..., a(terms), reduced to their minimal cyclotomic fields.
    pub coefficients: Vec<Cyc>,
    /// lcm of the orders of the coefficient fields actually needed.
    pub field_order: u64,
}

impl SlashExpansion {
    /// Complex embeddings of the coefficients at `prec` bits.
    pub fn complex_coefficients(&self, prec: u32) -> Vec<rug::Complex> {
        self.coefficients.iter().map(|c| c.embed_complex(prec)).collect()
    }

    /// Numerical value sum a(n) exp(2 pi i (alpha + n/width) tau).
    pub fn eval(&self, tau: &rug::Complex, prec: u32) -> rug::Complex {
        let pi = rug::Float::with_val(prec, rug::float::Constant::Pi);
        let two_pi_i_tau = rug::Complex::with_val(prec, (0, 2)) * &pi * tau;
        let alpha = crate::bigfloat::rat_to_float(&self.alpha, prec);
        let mut term = rug::Complex::with_val(prec, &two_pi_i_tau * &alpha).exp();
        let step = rug::Complex::with_val(prec, &two_pi_i_tau / self.width as f64).exp();
        let mut acc = rug::Complex::with_val(prec, (0, 0));
        for c in &self.coefficients {
            if !c.is_zero() {
                acc += c.embed_complex(prec) * &term;
            }
            term *= &step;
        }
        acc
    }
}

/// Fourier expansion of f |_k gamma for f in the space and gamma an integral
/// matrix of positive determinant, with `terms + 1` coefficients.  The slash
/// is in the unitary normalization det(gamma)^(k/2) (c tau + d)^-k f(gamma
/// tau), so integral scalar matrices act trivially.
pub fn mfslashexpansion(
    space: &ModularSpace,
    f: &FormExpr,
    gamma: &Mat2,
    terms: usize,
) -> Result<SlashExpansion, String> {
    let det = det2(gamma);
    if det <= 0 {
        return Err("gamma must have positive determinant".to_string());
    }
    if space.half {
        return Err("slash expansions need integral weight".to_string());
    }
    let coords = space.mftobasis(f)?;
    // Scalars act trivially: divide out the content.
    let content = gamma
        .iter()
        .flatten()
        .fold(0u64, |g, e| arith::gcd(g, e.unsigned_abs()));
    let reduced: Mat2 = gamma.map(|row| row.map(|e| e / content as i64));
    let (gp, tri) = if det2(&reduced) == 1 {
        (reduced, None)
    } else {
        let (gp, t) = hermite(&reduced);
        (gp, Some(t))
    };

    let (alpha, width) = slash_params(space.level, &space.character, &gp);
    let (pre_terms, assemble) = match &tri {
        None => (terms, None),
        Some(t) => {
            let (u, wt) = (t[0][0] as u64, t[1][1] as u64);
            let g = arith::gcd(u, width * wt);
            let new_width = width * wt / g;
            let step = (u / g) as usize;
            let alpha_raw = &alpha * big_rat(u as i64, wt as i64);
            let m0 = (&alpha_raw * BigRational::from(BigInt::from(new_width)))
                .floor()
                .to_integer()
                .to_usize()
                .expect("offset fits");
            let pre = if m0 > terms { 0 } else { (terms - m0) / step };
            (pre, Some((*t, new_width, step, m0, alpha_raw)))
        }
    };

    let series = slashed_series(space, &coords, &gp, &alpha, width, pre_terms);

    match assemble {
        None => Ok(finish(alpha, width, *gamma, series)),
        Some((t, new_width, step, m0, alpha_raw)) => {
            let (u, v, wt) = (t[0][0] as u64, t[0][1], t[1][1] as u64);
            // det^(k/2) (w)^-k = (u/w)^(k/2), exactly cyclotomic for odd k.
            let k = space.weight;
            let half = big_rat(u as i64, wt as i64).pow((k / 2) as i32);
            let mut scalar = Cyc::one().scale(&half);
            if k % 2 == 1 {
                scalar = scalar
                    .mul(&cyc_sqrt(u * wt))
                    .scale(&big_rat(1, wt as i64));
            }
            let alpha_new = &alpha_raw - big_rat(m0 as i64, new_width as i64);
            let mut coefs = vec![Cyc::zero(); terms + 1];
            for (j, c) in series.into_iter().enumerate() {
                let idx = m0 + j * step;
                if idx > terms || c.is_zero() {
                    continue;
                }
                // Twist by e^(2 pi i x v / w) at exponent x = alpha + j/width.
                let x = &alpha + big_rat(j as i64, width as i64);
                let xv = x * big_rat(v, wt as i64);
                let den = xv.denom().to_u64().expect("small twist order");
                let num = (xv.numer() % BigInt::from(den.max(1)))
                    .to_i64()
                    .expect("small twist numerator");
                let tw = Cyc::root_of_unity(den, num);
                coefs[idx] = c.mul(&scalar).mul(&tw);
            }
            Ok(finish(alpha_new, new_width, *gamma, coefs))
        }
    }
}

fn finish(alpha: BigRational, width: u64, gamma: Mat2, coefs: Vec<Cyc>) -> SlashExpansion {
    let mut order = 1;
    let coefficients: Vec<Cyc> = coefs
        .into_iter()
        .map(|c| {
            let r = c.reduce();
            if !r.is_zero() {
                order = arith::lcm(order, r.order());
            }
            r
        })
        .collect();
    SlashExpansion {
        alpha,
        width,
        gamma,
        coefficients,
        field_order: normalize_order(order),
    }
}

/// The q^(1/N)-grid series of f |_k gamma for gamma in SL_2(Z), already
/// divided by any lifting factor, collected onto the q^alpha q^(1/w) grid.
fn slashed_series(
    space: &ModularSpace,
    coords: &[Cyc],
    gamma: &Mat2,
    alpha: &BigRational,
    width: u64,
    terms: usize,
) -> Vec<Cyc> {
    let n = space.level;
    let dec = product_decomposition(space);
    let base = (alpha * BigRational::from(BigInt::from(n)))
        .to_integer()
        .to_usize()
        .expect("alpha * level is a nonnegative integer");
    debug_assert!((alpha * BigRational::from(BigInt::from(n))).is_integer());
    let stride = (n / width) as usize;
    // Length needed on the q^(1/N) grid, including room for the lift division.
    let lift_val = match dec.lift_name {
        "Delta" => n as usize,
        _ => 0,
    };
    let len = base + stride * terms + lift_val;

    let mut factor_memo: HashMap<(u64, u64, u64, u64, u64, u32), Vec<Cyc>> = HashMap::new();
    let series = |key: &EisKey, memo: &mut HashMap<(u64, u64, u64, u64, u64, u32), Vec<Cyc>>| -> Vec<Cyc> {
        let id = (
            key.chi1.modulus(),
            key.chi1.conrey_index(),
            key.chi2.modulus(),
            key.chi2.conrey_index(),
            key.m,
        );
        let id = (id.0, id.1, id.2, id.3, id.4, key.k);
        if let Some(hit) = memo.get(&id) {
            return hit.clone();
        }
        let out = bridge_key(key, n).slashed_series(gamma, len);
        memo.insert(id, out.clone());
        out
    };

    let mut num = vec![Cyc::zero(); len + 1];
    for (i, entry) in dec.terms.iter().enumerate() {
        if coords[i].is_zero() {
            continue;
        }
        for prod in entry {
            let c = coords[i].mul(&prod.coefficient);
            if c.is_zero() {
                continue;
            }
            let right = series(&prod.right, &mut factor_memo);
            let term = match &prod.left {
                None => right,
                Some(kl) => {
                    let left = series(kl, &mut factor_memo);
                    ser_mul(&left, &right, len)
                }
            };
            for (slot, x) in num.iter_mut().zip(term.iter()) {
                if !x.is_zero() {
                    *slot = slot.add(&c.mul(x));
                }
            }
        }
    }

    // Divide the level-one lifting factor back out; it is fixed by gamma.
    let quotient = match &dec.lift {
        None => num,
        Some(lift) => {
            let small = coef_row(lift, len / n as usize);
            let mut den = vec![Cyc::zero(); len + 1];
            for (j, c) in small.into_iter().enumerate() {
                den[j * n as usize] = c;
            }
            ser_div(&num, &den, len)
        }
    };

    // Collect onto the cusp grid q^alpha * q^(Z/w); everything off the grid
    // must vanish, which doubles as a consistency check on alpha and w.
    let mut out = vec![Cyc::zero(); terms + 1];
    for (idx, c) in quotient.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        assert!(
            idx >= base && (idx - base) % stride == 0,
            "level {n}: coefficient off the cusp grid at q^({idx}/{n})"
        );
        let j = (idx - base) / stride;
        if j <= terms {
            out[j] = c;
        }
    }
    out
}

/// Column-style Hermite form: m = gp * t with gp in SL_2(Z) and t upper
/// triangular with positive diagonal.
fn hermite(m: &Mat2) -> (Mat2, Mat2) {
    let (a, c) = (m[0][0], m[1][0]);
    let (g1, x, y) = ext_gcd(a, c);
    let (a0, c0) = (a / g1, c / g1);
    let gp = [[a0, -y], [c0, x]];
    let t = [
        [x * m[0][0] + y * m[1][0], x * m[0][1] + y * m[1][1]],
        [0, -c0 * m[0][1] + a0 * m[1][1]],
    ];
    debug_assert_eq!(-c0 * m[0][0] + a0 * m[1][0], 0);
    debug_assert_eq!(det2(&gp), 1);
    debug_assert!(t[0][0] > 0 && t[1][1] > 0);
    (gp, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{mfinit, SpaceCode};
    use rug::ops::Pow;

    const ID: Mat2 = [[1, 0], [0, 1]];

    fn rat(n: i64, d: i64) -> Cyc {
        Cyc::one().scale(&big_rat(n, d))
    }

    fn zeta(n: u64, j: i64) -> Cyc {
        Cyc::root_of_unity(n, j)
    }

    #[test]
    fn constant_terms_match_cotangent_values() {
        // cot(pi/4) = 1 feeds the (0,1) coset at level 4, weight 3.
        assert_eq!(
            CosetEisenstein::new(4, 3, (0, 1)).expansion(0)[0],
            zeta(4, 1).scale(&big_rat(-1, 2))
        );
        // v -> -v negates a series of odd weight.
        assert_eq!(
            CosetEisenstein::new(4, 3, (0, 3)).expansion(0)[0],
            zeta(4, 1).scale(&big_rat(1, 2))
        );
        // v2 = 0 falls back to -B_k/k ...
        assert_eq!(CosetEisenstein::new(1, 4, (0, 0)).expansion(0)[0], rat(1, 120));
        assert_eq!(CosetEisenstein::new(8, 6, (0, 0)).expansion(0)[0], rat(-1, 252));
        // ... which vanishes in odd weight, as does everything with v1 != 0.
        assert!(CosetEisenstein::new(4, 3, (0, 0)).expansion(0)[0].is_zero());
        assert!(CosetEisenstein::new(4, 3, (1, 0)).expansion(0)[0].is_zero());

        // fully averaged cosets at level 1 recover twice the divisor sums
        let e4 = CosetEisenstein::new(1, 4, (0, 0)).expansion(3);
        assert_eq!(e4[1], rat(2, 1));
        assert_eq!(e4[2], rat(18, 1));
        assert_eq!(e4[3], rat(56, 1));
    }

    #[derive(Clone, Copy)]
    struct Z {
        re: f64,
        im: f64,
    }

    impl Z {
        fn new(re: f64, im: f64) -> Z {
            Z { re, im }
        }

        fn add(self, o: Z) -> Z {
            Z::new(self.re + o.re, self.im + o.im)
        }

        fn mul(self, o: Z) -> Z {
            Z::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        }

        fn inv(self) -> Z {
            let d = self.re * self.re + self.im * self.im;
            Z::new(self.re / d, -self.im / d)
        }

        fn powi(self, k: u32) -> Z {
            (0..k).fold(Z::new(1.0, 0.0), |acc, _| acc.mul(self))
        }

        fn dist(self, o: Z) -> f64 {
            (self.re - o.re).hypot(self.im - o.im)
        }
    }

    /// Sum of 1/(m*tau + c)^k over (m, c) = v mod n inside a large box.
    fn index_sum(n: u64, k: u32, v: (u64, u64), tau: Z) -> Z {
        const BOX: i64 = 900;
        let n = n as i64;
        let mut total = Z::new(0.0, 0.0);
        let mut m = -BOX + (v.0 as i64 + BOX).rem_euclid(n);
        while m <= BOX {
            let mut c = -BOX + (v.1 as i64 + BOX).rem_euclid(n);
            while c <= BOX {
                if m != 0 || c != 0 {
                    let z = Z::new(tau.re * m as f64 + c as f64, tau.im * m as f64);
                    total = total.add(z.powi(k).inv());
                }
                c += n;
            }
            m += n;
        }
        total
    }

    /// n^k (k-1)! / (-2 pi i)^k as a complex number.
    fn normalizing_scalar(n: u64, k: u32) -> Z {
        let mut s = 1.0f64;
        for j in 1..k {
            s *= j as f64;
        }
        s *= (n as f64 / (2.0 * std::f64::consts::PI)).powi(k as i32);
        match k % 4 {
            0 => Z::new(s, 0.0),
            1 => Z::new(0.0, s),
            2 => Z::new(-s, 0.0),
            _ => Z::new(0.0, -s),
        }
    }

    fn series_value(coefs: &[Cyc], n: u64, tau: Z) -> Z {
        let t = 2.0 * std::f64::consts::PI / n as f64;
        let r = (-t * tau.im).exp();
        let step = Z::new(r * (t * tau.re).cos(), r * (t * tau.re).sin());
        let mut q = Z::new(1.0, 0.0);
        let mut total = Z::new(0.0, 0.0);
        for c in coefs {
            let e = c.embed_complex(64);
            total = total.add(Z::new(e.real().to_f64(), e.imag().to_f64()).mul(q));
            q = q.mul(step);
        }
        total
    }

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn expansions_agree_with_direct_index_sums() {
        let configs: [(u64, u32, (u64, u64)); 4] =
            [(5, 6, (1, 2)), (5, 6, (0, 2)), (4, 6, (2, 3)), (4, 7, (1, 3))];
        let mut state = 0x9e3779b97f4a7c15u64;
        for (n, k, v) in configs {
            let coefs = CosetEisenstein::new(n, k, v).expansion(70);
            for _ in 0..3 {
                let tau = Z::new(lcg(&mut state) - 0.5, 1.0 + lcg(&mut state));
                let direct = index_sum(n, k, v, tau).mul(normalizing_scalar(n, k));
                let from_series = series_value(&coefs, n, tau);
                assert!(
                    direct.dist(from_series) < 1e-9,
                    "series disagrees with the index sum for N={} k={} v={:?}",
                    n,
                    k,
                    v
                );
            }
        }
    }

    fn check_bridge(key: EisKey, ambient: u64, upto: usize) {
        let series = bridge_key(&key, ambient).slashed_series(&ID, ambient as usize * upto);
        let prefix = key.form().prefix(upto);
        for (j, got) in series.iter().enumerate() {
            if j % ambient as usize == 0 {
                let want = prefix[j / ambient as usize].as_cyc().unwrap();
                assert!(
                    got.sub(&want).is_zero(),
                    "coefficient of q^({}/{}) disagrees",
                    j,
                    ambient
                );
            } else {
                assert!(got.is_zero(), "spurious coefficient at q^({}/{})", j, ambient);
            }
        }
    }

    #[test]
    fn coset_combinations_reproduce_character_eisenstein_series() {
        let one = DirichletCharacter::trivial(1);
        let m4 = DirichletCharacter::from_discriminant(-4).unwrap();
        let m3 = DirichletCharacter::from_discriminant(-3).unwrap();
        let quartic = DirichletCharacter::new(5, 2).unwrap();
        let key = |k, chi1: &DirichletCharacter, chi2: &DirichletCharacter, m| EisKey {
            k,
            chi1: chi1.clone(),
            chi2: chi2.clone(),
            m,
        };
        check_bridge(key(3, &one, &m4, 1), 4, 10);
        // the same series on a finer grid, dilated by 2
        check_bridge(key(3, &one, &m4, 2), 8, 8);
        // two nontrivial characters
        check_bridge(key(4, &m3, &m4, 1), 12, 6);
        // character values beyond +-1
        check_bridge(key(3, &one, &quartic, 1), 5, 8);
        // level one, natively and inside ambient level 3
        check_bridge(key(6, &one, &one, 1), 1, 12);
        check_bridge(key(6, &one, &one, 1), 3, 6);
    }

    #[test]
    fn cusp_parameters_follow_the_character_shift() {
        let g = [[1, 0], [2, 1]];
        let (alpha, w) = slash_params(32, &DirichletCharacter::trivial(32), &g);
        assert!(alpha.is_zero());
        assert_eq!(w, 8);

        let chi = DirichletCharacter::from_discriminant(-4).unwrap().lift_to(36);
        let (alpha, w) = slash_params(36, &chi, &g);
        assert_eq!(alpha, big_rat(1, 18));
        assert_eq!(w, 9);

        // lower triangular group elements keep the integral grid
        let (alpha, w) = slash_params(36, &chi, &[[7, 6], [36, 31]]);
        assert!(alpha.is_zero());
        assert_eq!(w, 1);
    }

    #[test]
    fn coefficient_fields_have_bounded_order() {
        assert_eq!(field_bound(32, 1, &ID), 1);
        assert_eq!(field_bound(32, 1, &[[1, 0], [2, 1]]), 16);
        assert_eq!(field_bound(36, 4, &[[1, 0], [2, 1]]), 18);
    }

    fn reconstruct(terms: &[EisProduct], upto: usize) -> Vec<Cyc> {
        let mut sum = vec![Cyc::zero(); upto + 1];
        for prod in terms {
            let mut row = coef_row(&prod.right.form(), upto);
            if let Some(left) = &prod.left {
                row = ser_mul(&coef_row(&left.form(), upto), &row, upto);
            }
            for (s, r) in sum.iter_mut().zip(&row) {
                *s = s.add(&r.mul(&prod.coefficient));
            }
        }
        sum
    }

    #[test]
    fn discriminant_form_decomposes_into_eisenstein_products() {
        let space = mfinit(1, 12, &DirichletCharacter::trivial(1), SpaceCode::Cusp);
        assert_eq!(space.dim(), 1);
        let dec = product_decomposition(&space);
        assert!(dec.lift.is_none());
        assert_eq!(dec.terms.len(), 1);
        // verify well past the window the solver used
        let upto = 20;
        let sum = reconstruct(&dec.terms[0], upto);
        for (s, want) in sum.iter().zip(coef_row(&FormExpr::delta(), upto)) {
            assert!(s.sub(&want).is_zero());
        }
    }

    #[test]
    fn weight_two_spaces_decompose_after_lifting() {
        let space = mfinit(37, 2, &DirichletCharacter::trivial(37), SpaceCode::Cusp);
        assert_eq!(space.dim(), 2);
        let dec = product_decomposition(&space);
        let lift = dec.lift.clone().expect("weight two always needs a lift");
        assert!(dec.lifted_weight > 2);
        let upto = sturm_bound(37, dec.lifted_weight) as usize + 4;
        let lift_row = coef_row(&lift, upto);
        for (f, terms) in space.basis.iter().zip(&dec.terms) {
            let target = ser_mul(&coef_row(f, upto), &lift_row, upto);
            let sum = reconstruct(terms, upto);
            for (s, want) in sum.iter().zip(&target) {
                assert!(s.sub(want).is_zero());
            }
        }
    }

    #[test]
    fn empty_spaces_decompose_trivially() {
        let space = mfinit(1, 4, &DirichletCharacter::trivial(1), SpaceCode::Cusp);
        assert_eq!(space.dim(), 0);
        assert!(product_decomposition(&space).terms.is_empty());
    }

    #[test]
    fn slash_expansion_at_a_width_eight_cusp() {
        let space = mfinit(32, 4, &DirichletCharacter::trivial(32), SpaceCode::New);
        assert_eq!(space.dim(), 3);
        let f = space.basis[0].clone();
        let g = [[1, 0], [2, 1]];
        let exp = mfslashexpansion(&space, &f, &g, 6).unwrap();
        assert!(exp.alpha.is_zero());
        assert_eq!(exp.width, 8);
        assert_eq!(exp.coefficients.len(), 7);
        for (j, c) in exp.coefficients.iter().enumerate() {
            let want = match j {
                1 => zeta(16, 1).scale(&big_rat(-1, 64)),
                3 => zeta(16, 3).scale(&big_rat(-1, 4)),
                5 => zeta(16, 5).scale(&big_rat(-11, 32)),
                _ => Cyc::zero(),
            };
            assert!(c.sub(&want).is_zero(), "coefficient {} is off", j);
        }
        assert_eq!(exp.field_order, 16);

        // certify the vector against a direct evaluation: the expansion at
        // tau must equal (2 tau + 1)^(-4) f(tau / (2 tau + 1))
        let prec = 128;
        let tau = rug::Complex::with_val(prec, (0.3, 3.0));
        let lhs = exp.eval(&tau, prec);
        let mut den = rug::Complex::with_val(prec, &tau * 2i32);
        den += 1;
        let z = rug::Complex::with_val(prec, &tau / &den);
        let scale = rug::Complex::with_val(prec, (&den).pow(-4i32));
        let rhs = eval_q_series(&f, 300, &z, prec) * &scale;
        let diff = rug::Complex::with_val(prec, &lhs - &rhs);
        // seven terms of a q^(1/8) series: accuracy limited by truncation
        assert!(diff.abs().real().to_f64() < 1e-6);
        // the coefficients lie in the predicted cyclotomic field
        let bound = normalize_order(field_bound(32, 1, &g));
        assert_eq!(normalize_order(arith::lcm(exp.field_order, bound)), bound);
    }

    #[test]
    fn slash_expansion_with_fractional_leading_power() {
        let chi = DirichletCharacter::from_discriminant(-4).unwrap().lift_to(36);
        let space = mfinit(36, 3, &chi, SpaceCode::New);
        assert_eq!(space.dim(), 4);
        let f = space.basis[0].clone();
        let g = [[1, 0], [2, 1]];
        let exp = mfslashexpansion(&space, &f, &g, 4).unwrap();
        assert_eq!(exp.alpha, big_rat(1, 18));
        assert_eq!(exp.width, 9);
        let want0 = zeta(9, 4).add(&zeta(9, 1)).scale(&big_rat(-1, 54));
        let want2 = zeta(9, 5).add(&zeta(9, 2)).scale(&big_rat(-1, 3));
        let want3 = zeta(9, 4).scale(&big_rat(-2, 9));
        assert!(exp.coefficients[0].sub(&want0).is_zero());
        assert!(exp.coefficients[2].sub(&want2).is_zero());
        assert!(exp.coefficients[3].sub(&want3).is_zero());
        assert!(exp.coefficients[4].is_zero());

        // floating point embedding of the q^2 coefficient
        let c2 = exp.coefficients[2].embed_complex(96);
        assert!((c2.real().to_f64() - 0.25534814770).abs() < 1e-9);
        assert!((c2.imag().to_f64() + 0.21426253656).abs() < 1e-9);

        // everything lies in Q(zeta_18) = Q(zeta_9)
        let bound = normalize_order(field_bound(36, 4, &g));
        assert_eq!(normalize_order(arith::lcm(exp.field_order, bound)), bound);
    }

    #[test]
    fn group_elements_of_the_level_act_through_the_character() {
        let chi = DirichletCharacter::from_discriminant(-4).unwrap().lift_to(36);
        let space = mfinit(36, 3, &chi, SpaceCode::New);
        let f = space.basis[0].clone();
        // [[31,6],[36,7]] fixes the cusp and multiplies by chi(7) = -1
        let exp = mfslashexpansion(&space, &f, &[[31, 6], [36, 7]], 5).unwrap();
        assert!(exp.alpha.is_zero());
        assert_eq!(exp.width, 1);
        let prefix = f.prefix(5);
        for (j, c) in exp.coefficients.iter().enumerate() {
            let want = prefix[j].as_cyc().unwrap().neg();
            assert!(c.sub(&want).is_zero(), "twisted coefficient {} is off", j);
        }

        // with a trivial character the action is trivial
        let space = mfinit(32, 4, &DirichletCharacter::trivial(32), SpaceCode::New);
        let f = space.basis[0].clone();
        let exp = mfslashexpansion(&space, &f, &[[1, 0], [32, 1]], 6).unwrap();
        let prefix = f.prefix(6);
        for (j, c) in exp.coefficients.iter().enumerate() {
            assert!(c.sub(&prefix[j].as_cyc().unwrap()).is_zero());
        }
    }

    #[test]
    fn slash_expansions_satisfy_the_cocycle_relation() {
        let space = mfinit(8, 6, &DirichletCharacter::trivial(8), SpaceCode::Cusp);
        let f = space.basis[0].clone();
        let g1 = [[1, 0], [2, 1]];
        let s = [[0, -1], [1, 0]];
        let g12 = mat_mul2(&g1, &s);
        assert_eq!(g12, [[0, -1], [1, -2]]);
        let e1 = mfslashexpansion(&space, &f, &g1, 160).unwrap();
        let e12 = mfslashexpansion(&space, &f, &g12, 160).unwrap();
        let prec = 128;
        for (re, im) in [(0.0, 1.0), (0.3, 1.2)] {
            let tau = rug::Complex::with_val(prec, (re, im));
            // (f|g1)|s at tau equals tau^(-k) (f|g1)(-1/tau)
            let lhs = e12.eval(&tau, prec);
            let inv = rug::Complex::with_val(prec, tau.clone().recip());
            let minus_inv = rug::Complex::with_val(prec, -&inv);
            let scale = rug::Complex::with_val(prec, (&tau).pow(-6i32));
            let rhs = e1.eval(&minus_inv, prec) * &scale;
            let diff = rug::Complex::with_val(prec, &lhs - &rhs);
            let err = diff.abs().real().to_f64();
            assert!(err < 1e-25, "cocycle defect {:.3e} at tau = {} + {}i", err, re, im);
        }
    }

    #[test]
    fn triangular_and_scalar_matrices_act_explicitly() {
        let space = mfinit(8, 6, &DirichletCharacter::trivial(8), SpaceCode::Cusp);
        let f = space.basis[0].clone();
        let prefix = f.prefix(8);

        // translation fixes an integral expansion
        let exp = mfslashexpansion(&space, &f, &[[1, 1], [0, 1]], 8).unwrap();
        assert_eq!(exp.width, 1);
        for (j, c) in exp.coefficients.iter().enumerate() {
            assert!(c.sub(&prefix[j].as_cyc().unwrap()).is_zero());
        }

        // scalar matrices act trivially in the unitary normalization
        let exp = mfslashexpansion(&space, &f, &[[2, 0], [0, 2]], 8).unwrap();
        for (j, c) in exp.coefficients.iter().enumerate() {
            assert!(c.sub(&prefix[j].as_cyc().unwrap()).is_zero());
        }

        // tau -> (tau + 1)/2 halves the grid, twists signs and rescales
        let exp = mfslashexpansion(&space, &f, &[[1, 1], [0, 2]], 8).unwrap();
        assert_eq!(exp.width, 2);
        assert!(exp.alpha.is_zero());
        for (j, c) in exp.coefficients.iter().enumerate() {
            let sign = if j % 2 == 1 { -8 } else { 8 };
            let want = prefix[j].as_cyc().unwrap().scale(&big_rat(1, sign));
            assert!(c.sub(&want).is_zero(), "rescaled coefficient {} is off", j);
        }
    }

    fn eval_q_series(f: &FormExpr, len: usize, tau: &rug::Complex, prec: u32) -> rug::Complex {
        let pi = rug::Float::with_val(prec, rug::float::Constant::Pi);
        let mut two_pi = pi;
        two_pi *= 2;
        let two_pi_i = rug::Complex::with_val(prec, (rug::Float::new(prec), two_pi));
        let q = rug::Complex::with_val(prec, &two_pi_i * tau).exp();
        let mut power = rug::Complex::with_val(prec, 1);
        let mut total = rug::Complex::new(prec);
        for c in f.prefix(len) {
            total += c.embed_complex(prec, None) * &power;
            power = rug::Complex::with_val(prec, &power * &q);
        }
        total
    }

    #[test]
    fn integral_matrices_compose_scaling_and_group_action() {
        let space = mfinit(8, 6, &DirichletCharacter::trivial(8), SpaceCode::Cusp);
        let f = space.basis[0].clone();
        let m = [[1, 0], [2, 4]];
        let exp = mfslashexpansion(&space, &f, &m, 160).unwrap();
        let prec = 128;
        let tau = rug::Complex::with_val(prec, (0.0, 1.0));
        let lhs = exp.eval(&tau, prec);
        // det^(k/2) (c tau + d)^(-k) f((a tau + b) / (c tau + d))
        let den = rug::Complex::with_val(prec, (4.0, 2.0));
        let z = rug::Complex::with_val(prec, &tau / &den);
        let scale = rug::Complex::with_val(prec, (&den).pow(-6i32)) * 64i32;
        let rhs = eval_q_series(&f, 160, &z, prec) * &scale;
        let diff = rug::Complex::with_val(prec, &lhs - &rhs);
        let err = diff.abs().real().to_f64();
        assert!(err < 1e-25, "defect {:.3e} against a direct evaluation", err);
    }

    #[test]
    fn integer_square_roots_square_back_and_embed_positively() {
        for n in 1u64..20 {
            let r = cyc_sqrt(n);
            assert!(r.mul(&r).sub(&rat(n as i64, 1)).is_zero());
            let e = r.embed_complex(64);
            assert!((e.real().to_f64() - (n as f64).sqrt()).abs() < 1e-10);
            assert!(e.imag().to_f64().abs() < 1e-10);
        }
    }
}


