//! The Eisenstein subspace: character Eisenstein series and its two bases.
//!
//! E_k(Gamma_0(N), chi) is spanned by the series G_k(chi1, chi2; m tau),
//! where (chi1, chi2) runs over pairs of primitive characters mod (N1, N2)
//! whose product lifts to chi and N1 N2 m | N.  The Fourier expansion is
//!
//!   G_k(chi1, chi2; tau) = a(0) + sum_(n >= 1) [sum_(d | n) chi1(n/d) chi2(d) d^(k-1)] q^n,
//!
//! with a(0) = -B_(k,chi2)/(2k) when N1 = 1 (and the symmetric convention in
//! weight 1), a(0) = 0 otherwise.  Two special rules: in weight 1 only pairs
//! with chi1 even are kept (G_1 is symmetric in its two characters), and in
//! weight 2 the trivial pair needs m > 1 together with the modular
//! combination G_2(m tau) - G_2(tau)/m, since G_2 itself is only
//! quasi-modular.
//!
//! The raw basis has coefficients in Q(zeta_o1, zeta_o2).  Taking traces of
//! alpha^j G down to Q(zeta_o), where o is the order of chi and alpha
//! generates Q(zeta_lcm(o1,o2)), produces a second basis of the same span
//! whose expansions all live in Q(zeta_o) — over Q itself when chi is
//! trivial.

use crate::arith::{self, gcd, lcm};
use crate::cyclotomic::Cyc;
use crate::dirichlet::DirichletCharacter;
use crate::qseries::{Coef, FormExpr, QExpansion};
use num_rational::Rational64;

/// One element of the Eisenstein basis: the series G_k(chi1, chi2; m tau)
/// with both characters primitive, or — for k = 2 and both characters
/// trivial — the combination G_2(m tau) - G_2(tau)/m (m > 1).
#[derive(Clone, Debug, PartialEq)]
pub struct EisKey {
    pub k: u32,
    pub chi1: DirichletCharacter,
    pub chi2: DirichletCharacter,
    pub m: u64,
}

impl EisKey {
    /// True when this key stands for the modified weight-2 combination.
    pub fn is_weight_two_combination(&self) -> bool {
        self.k == 2 && self.chi1.modulus() == 1 && self.chi2.modulus() == 1
    }

    /// The expansion as a form expression.
    pub fn form(&self) -> FormExpr {
        if self.is_weight_two_combination() {
            assert!(self.m > 1, "the trivial weight-2 pair needs m > 1");
            let g2m = FormExpr::eisenstein(2, &self.chi1, &self.chi2, self.m);
            let g21 = FormExpr::eisenstein(2, &self.chi1, &self.chi2, 1);
            FormExpr::linear(vec![
                (Coef::from_i64(1), g2m),
                (Coef::Rat(crate::arith::big_rat(-1, self.m as i64)), g21),
            ])
            .with_quasi(false)
        } else {
            FormExpr::eisenstein(self.k, &self.chi1, &self.chi2, self.m)
        }
    }

    fn sort_key(&self) -> (u64, u64, u64, u64, u64) {
        (
            self.chi1.modulus(),
            self.chi1.conrey_index(),
            self.chi2.modulus(),
            self.chi2.conrey_index(),
            self.m,
        )
    }
}

/// All primitive characters mod n, sorted by Conrey index.
pub fn primitive_characters(n: u64) -> Vec<DirichletCharacter> {
    DirichletCharacter::all(n)
        .into_iter()
        .filter(|c| c.is_primitive())
        .collect()
}

/// Fourier coefficients a(0), ..., a(L) of G_k(chi1, chi2; tau).
pub fn gk_expansion(
    k: u32,
    chi1: &DirichletCharacter,
    chi2: &DirichletCharacter,
    l: u64,
) -> QExpansion {
    assert!(k >= 1);
    assert!(
        !(k == 2 && chi1.conductor() == 1 && chi2.conductor() == 1),
        "G_2 with two trivial characters is only quasi-modular; use the \
         weight-2 combination from the basis enumeration"
    );
    let f = FormExpr::eisenstein(k, chi1, chi2, 1);
    QExpansion { alpha: Rational64::from_integer(0), width: 1, coefs: f.coeffs(l, 1) }
}

/// The Eisenstein basis of E_k(Gamma_0(N), chi) as a list of keys, sorted by
/// (N1, chi1, N2, chi2, m).  Empty when chi(-1) != (-1)^k.
pub fn weisinger_basis(level: u64, k: u32, chi: &DirichletCharacter) -> Vec<EisKey> {
    assert!(k >= 1);
    assert_eq!(chi.modulus(), level);
    let even_k = k % 2 == 0;
    if chi.is_even() != even_k {
        return Vec::new();
    }
    let chi_prim = chi.to_primitive();
    let mut keys = Vec::new();
    for n1 in arith::divisors(level) {
        for n2 in arith::divisors(level / n1) {
            for chi1 in primitive_characters(n1) {
                if k == 1 && !chi1.is_even() {
                    continue;
                }
                for chi2 in primitive_characters(n2) {
                    let l12 = lcm(n1, n2);
                    let prod = chi1.lift_to(l12).mul(&chi2.lift_to(l12)).to_primitive();
                    if prod != chi_prim {
                        continue;
                    }
                    for m in arith::divisors(level / (n1 * n2)) {
                        if k == 2 && n1 == 1 && n2 == 1 && m == 1 {
                            continue;
                        }
                        keys.push(EisKey { k, chi1: chi1.clone(), chi2: chi2.clone(), m });
                    }
                }
            }
        }
    }
    keys.sort_by_key(|e| e.sort_key());
    keys
}

/// dim E_k(Gamma_0(N), chi).
pub fn dim_eisenstein(level: u64, k: u32, chi: &DirichletCharacter) -> u64 {
    weisinger_basis(level, k, chi).len() as u64
}

/// A basis of E_k(Gamma_0(N), chi) whose expansions all have coefficients in
/// Q(zeta_o), o the order of chi: group the keys into Galois orbits under
/// sigma_t for t = 1 mod o, and replace the orbit of G by the traces
/// Tr(alpha^j G) = sum_t alpha^(j t) G(chi1^t, chi2^t; m tau), 0 <= j < orbit
/// size, with alpha = zeta_lcm(o1, o2).
pub fn weisinger_basis_rational(level: u64, k: u32, chi: &DirichletCharacter) -> Vec<FormExpr> {
    let keys = weisinger_basis(level, k, chi);
    let o = chi.order();
    let mut seen: Vec<(u64, u64, u64, u64, u64)> = Vec::new();
    let mut out = Vec::new();
    for key in &keys {
        if seen.contains(&key.sort_key()) {
            continue;
        }
        let o12 = lcm(key.chi1.order(), key.chi2.order());
        // orbit of (chi1, chi2) under t = 1 mod o, gcd(t, o12) = 1
        let mut orbit: Vec<(u64, EisKey)> = Vec::new();
        for t in 1..=o12 {
            if gcd(t, o12) != 1 || t % o != 1 % o {
                continue;
            }
            let kt = EisKey {
                k,
                chi1: key.chi1.pow(t as i64),
                chi2: key.chi2.pow(t as i64),
                m: key.m,
            };
            seen.push(kt.sort_key());
            orbit.push((t, kt));
        }
        // the action is free, so the orbit size is [Q(zeta_o12) : Q(zeta_o)]
        let d = orbit.len() as u64;
        debug_assert_eq!(d, arith::phi(o12) / arith::phi(o));
        for j in 0..d {
            let terms: Vec<(Coef, FormExpr)> = orbit
                .iter()
                .map(|(t, kt)| {
                    let root = Cyc::root_of_unity(o12, (j * t % o12) as i64);
                    (Coef::Cyc(root), kt.form())
                })
                .collect();
            out.push(FormExpr::linear(terms));
        }
    }
    assert_eq!(out.len(), keys.len());
    out
}
