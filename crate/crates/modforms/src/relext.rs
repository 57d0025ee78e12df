//! Relative extensions Q(zeta_o)[y]/(g(y)) and polynomial factorization over
//! cyclotomic fields.
//!
//! Coefficient fields of Hecke eigenforms arrive as a finite extension of the
//! cyclotomic field generated by the character values: an eigenvalue satisfies
//! a monic irreducible polynomial g over Q(zeta_o).  This module provides
//!
//!   * factorization of squarefree polynomials over Q(zeta_o) by the norm map
//!     (push the problem down to Q via N(f(y - s*zeta)), factor there, pull the
//!     factors back with gcds),
//!   * arithmetic in the quotient field K = Q(zeta_o)[y]/(g),
//!   * an absolute model Q[x]/(pabs) found through a primitive element
//!     y + m*zeta with minimal m >= 0,
//!   * the complex embeddings of K extending the canonical embedding
//!     zeta_o -> exp(2*pi*i/o), ordered by (real part, imaginary part) of the
//!     image of the generator.

use crate::bigfloat;
use crate::cyclotomic::{normalize_order, Cyc};
use crate::linalg::Mat;
use crate::poly::{factor_q, Poly};
use num_rational::BigRational;
use rug::{Assign, Complex, Float};
use std::sync::Arc;

/// Factor a squarefree monic polynomial over Q(zeta_o) into monic irreducible
/// factors (the classical norm-map reduction to Q).  `order` is the cyclotomic
/// order o; the coefficients of `f` must all lie in Q(zeta_o).
pub fn factor_squarefree_cyc(f: &Poly<Cyc>, order: u64) -> Vec<Poly<Cyc>> {
    let o = normalize_order(order);
    let f = f.monic();
    if o == 1 {
        let fq = Poly::new(f.c.iter().map(|c| c.try_rational().expect("rational")).collect());
        return factor_q(&fq)
            .into_iter()
            .map(|(g, e)| {
                debug_assert_eq!(e, 1);
                Poly::new(g.c.iter().map(|a| Cyc::from_rat(a.clone())).collect())
            })
            .collect();
    }
    let zeta = Cyc::root_of_unity(o, 1);
    // shift until the norm is squarefree
    for s in 0..64i64 {
        let shift = zeta.scale(&crate::arith::big_rat(s, 1));
        // fs(y) = f(y - s*zeta)
        let fs = compose_linear(&f, &shift.neg());
        let norm = norm_to_q(&fs, o);
        if norm.gcd(&norm.derivative()).deg() == Some(0) {
            let mut out = Vec::new();
            for (gi, _) in factor_q(&norm) {
                let gik: Poly<Cyc> =
                    Poly::new(gi.c.iter().map(|a| Cyc::from_rat(a.clone())).collect());
                // pull back: gcd over K of f(y) and gi(y + s*zeta)
                let gis = compose_linear(&gik, &shift);
                let h = f.gcd(&gis);
                if h.deg().map_or(false, |d| d >= 1) {
                    out.push(h.monic());
                }
            }
            out.sort_by_key(|g| g.c.len());
            debug_assert_eq!(
                out.iter().map(|g| g.deg().unwrap()).sum::<usize>(),
                f.deg().unwrap()
            );
            return out;
        }
    }
    panic!("no squarefree norm found; input may not be squarefree");
}

/// f(y + a) for a in the coefficient field.
fn compose_linear(f: &Poly<Cyc>, a: &Cyc) -> Poly<Cyc> {
    let lin = Poly::new(vec![a.clone(), Cyc::one()]);
    f.compose(&lin)
}

/// Norm from Q(zeta_o)[y] down to Q[y]: product of the Galois conjugates.
fn norm_to_q(f: &Poly<Cyc>, o: u64) -> Poly<BigRational> {
    let mut acc: Poly<Cyc> = Poly::one();
    for t in 1..=o {
        if crate::arith::gcd(t, o) != 1 {
            continue;
        }
        let conj = Poly::new(f.c.iter().map(|c| c.embed_to(o).galois(t)).collect());
        acc = acc.mul(&conj);
    }
    Poly::new(
        acc.c
            .iter()
            .map(|c| c.try_rational().expect("norm must be rational"))
            .collect(),
    )
}

/// A relative extension K = Q(zeta_o)[y] / (g(y)) with g monic irreducible.
#[derive(Debug)]
pub struct RelExt {
    /// cyclotomic order of the base field
    pub base_order: u64,
    /// monic irreducible defining polynomial over the base
    pub modulus: Poly<Cyc>,
}

impl RelExt {
    pub fn new(base_order: u64, modulus: Poly<Cyc>) -> Arc<Self> {
        let m = modulus.monic();
        Arc::new(RelExt { base_order: normalize_order(base_order), modulus: m })
    }

    pub fn degree(&self) -> usize {
        self.modulus.deg().unwrap()
    }

    /// Total degree over Q.
    pub fn absolute_degree(&self) -> usize {
        self.degree() * crate::arith::phi(self.base_order) as usize
    }

    /// The generator y of the extension.
    pub fn gen(self: &Arc<Self>) -> RelElem {
        if self.degree() == 1 {
            return RelElem {
                ext: self.clone(),
                c: Poly::constant(self.modulus.coeff(0).neg()),
            };
        }
        RelElem { ext: self.clone(), c: Poly::x() }
    }

    pub fn from_cyc(self: &Arc<Self>, a: Cyc) -> RelElem {
        let a = a.embed_to(self.base_order);
        RelElem { ext: self.clone(), c: Poly::constant(a) }
    }

    pub fn from_rat(self: &Arc<Self>, a: BigRational) -> RelElem {
        self.from_cyc(Cyc::from_rat(a))
    }

    pub fn zero(self: &Arc<Self>) -> RelElem {
        self.from_rat(crate::arith::big_rat(0, 1))
    }

    pub fn one(self: &Arc<Self>) -> RelElem {
        self.from_rat(crate::arith::big_rat(1, 1))
    }

    /// Q-basis of K: zeta^i * y^j, i < phi(o), j < deg g, j-major ordering.
    fn q_basis_dims(&self) -> (usize, usize) {
        (crate::arith::phi(self.base_order) as usize, self.degree())
    }

    /// Matrix of multiplication by `a` on the Q-basis (columns = images).
    fn mult_matrix_q(self: &Arc<Self>, a: &RelElem) -> Mat<BigRational> {
        let (phi, d) = self.q_basis_dims();
        let o = self.base_order;
        let n = phi * d;
        let mut m = Mat::zero(n, n);
        for j in 0..d {
            for i in 0..phi {
                let b = RelElem {
                    ext: self.clone(),
                    c: Poly::monomial(Cyc::root_of_unity(o, i as i64), j),
                };
                let prod = a.mul(&b);
                for (jj, cy) in prod.c.c.iter().enumerate() {
                    let cy = cy.embed_to(o);
                    for (ii, co) in cy.coords().iter().enumerate() {
                        m.a[jj * phi + ii][j * phi + i] = co.clone();
                    }
                }
            }
        }
        m
    }

    /// Minimal polynomial of `a` over Q (the squarefree part of its
    /// characteristic polynomial; equal to it when a generates K).
    pub fn min_poly_q(self: &Arc<Self>, a: &RelElem) -> Poly<BigRational> {
        let m = self.mult_matrix_q(a);
        let cp = m.charpoly();
        cp.squarefree_part().monic()
    }

    /// Absolute model: the smallest m >= 0 such that y + m*zeta generates the
    /// whole field over Q; returns (m, minimal polynomial of y + m*zeta).
    pub fn absolute_model(self: &Arc<Self>) -> (u64, Poly<BigRational>) {
        let n = self.absolute_degree();
        for m in 0..64u64 {
            let a = if self.base_order == 1 {
                self.gen()
            } else {
                let z = self.from_cyc(Cyc::root_of_unity(self.base_order, 1));
                self.gen().add(&z.scale_i64(m as i64))
            };
            let p = self.min_poly_q(&a);
            if p.deg() == Some(n) {
                return (m, p);
            }
            if self.base_order == 1 {
                return (0, p); // rational base: y itself generates by assumption
            }
        }
        unreachable!("primitive element search exhausted")
    }

    /// Complex embeddings of K at `prec` bits: the base field embeds by
    /// zeta_o -> exp(2*pi*i/o) and each embedding sends y to one root of the
    /// embedded modulus.  Returned roots are sorted by (Re, Im).
    pub fn embeddings(self: &Arc<Self>, prec: u32) -> Vec<Complex> {
        let wp = prec + 32;
        if self.degree() == 1 {
            return vec![self.modulus.coeff(0).neg().embed_complex(prec)];
        }
        let g: Vec<Complex> = self.modulus.c.iter().map(|c| c.embed_complex(wp)).collect();
        let mut roots = complex_roots(&g, wp);
        roots.sort_by(|a, b| {
            a.real()
                .partial_cmp(b.real())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.imag().partial_cmp(b.imag()).unwrap_or(std::cmp::Ordering::Equal))
        });
        roots
            .into_iter()
            .map(|r| {
                let mut z = Complex::new(prec);
                z.assign(&r);
                z
            })
            .collect()
    }
}

impl PartialEq for RelExt {
    fn eq(&self, other: &Self) -> bool {
        self.base_order == other.base_order && self.modulus == other.modulus
    }
}

/// Element of a relative extension: a polynomial in y of degree < deg(g) with
/// cyclotomic coefficients.
#[derive(Clone, Debug)]
pub struct RelElem {
    pub ext: Arc<RelExt>,
    pub c: Poly<Cyc>,
}

impl RelElem {
    fn reduce(mut self) -> Self {
        if self.c.deg().map_or(false, |d| d >= self.ext.degree()) {
            self.c = self.c.rem(&self.ext.modulus);
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        RelElem { ext: self.ext.clone(), c: self.c.add(&other.c) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        RelElem { ext: self.ext.clone(), c: self.c.sub(&other.c) }
    }

    pub fn neg(&self) -> Self {
        RelElem { ext: self.ext.clone(), c: self.c.neg() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        RelElem { ext: self.ext.clone(), c: self.c.mul(&other.c) }.reduce()
    }

    pub fn scale_cyc(&self, a: &Cyc) -> Self {
        let one = Poly::constant(a.clone());
        RelElem { ext: self.ext.clone(), c: self.c.mul(&one) }
    }

    pub fn scale_i64(&self, n: i64) -> Self {
        self.scale_cyc(&Cyc::from_i64(n))
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero in relative extension");
        let (g, s, _) = self.c.ext_gcd(&self.ext.modulus);
        assert_eq!(g.deg(), Some(0), "modulus not irreducible or element not a unit");
        let ginv = g.coeff(0).inv();
        RelElem { ext: self.ext.clone(), c: s.scale(&ginv) }.reduce()
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.ext.one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    /// If the element lies in the base field, return it there.
    pub fn as_cyc(&self) -> Option<Cyc> {
        match self.c.deg() {
            None => Some(Cyc::zero()),
            Some(0) => Some(self.c.coeff(0)),
            _ => None,
        }
    }

    /// Complex image under the embedding sending y to `root` (base field
    /// embedded canonically).
    pub fn embed_at(&self, root: &Complex, prec: u32) -> Complex {
        let mut acc = Complex::with_val(prec, (0, 0));
        for c in self.c.c.iter().rev() {
            acc = acc * root + c.embed_complex(prec);
        }
        acc
    }
}

impl PartialEq for RelElem {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.ext == other.ext
    }
}

impl std::fmt::Display for RelElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", rel_poly_string(&self.c, "y"))
    }
}

/// Render a polynomial with cyclotomic coefficients, e.g. "y^2 + (2*t + 1)*y - t".
pub fn rel_poly_string(p: &Poly<Cyc>, var: &str) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, co) in p.c.iter().enumerate().rev() {
        if co.is_zero() {
            continue;
        }
        let cs = co.poly_string("t");
        let single_term = {
            let body = cs.strip_prefix('-').unwrap_or(&cs);
            !body.contains('+') && !body.contains('-')
        };
        let (neg, mag) = if single_term && cs.starts_with('-') {
            (true, cs[1..].to_string())
        } else {
            (false, cs.clone())
        };
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else if neg {
            s.push_str(" - ");
        } else {
            s.push_str(" + ");
        }
        let body = if single_term { mag } else { format!("({})", cs) };
        if i == 0 {
            s.push_str(&body);
        } else {
            let var_part = if i == 1 { var.to_string() } else { format!("{}^{}", var, i) };
            if body == "1" {
                s.push_str(&var_part);
            } else {
                s.push_str(&body);
                s.push('*');
                s.push_str(&var_part);
            }
        }
    }
    s
}

/// All roots of a complex polynomial (coefficients low-to-high) by the
/// Durand–Kerner simultaneous iteration at working precision `prec`.
pub fn complex_roots(poly: &[Complex], prec: u32) -> Vec<Complex> {
    let n = poly.len() - 1;
    assert!(n >= 1);
    let lead = poly[n].clone();
    let p: Vec<Complex> = poly.iter().map(|c| Complex::with_val(prec, c / &lead)).collect();
    // initial guesses on a slightly irregular circle (avoids symmetric stalls)
    let mut roots: Vec<Complex> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            let r = 1.0 + 0.3 * ((k % 7) as f64) / 7.0;
            Complex::with_val(prec, (r * ang.cos(), r * ang.sin()))
        })
        .collect();
    let eval = |z: &Complex| -> Complex {
        let mut acc = Complex::with_val(prec, (0, 0));
        for c in p.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let tol = Float::with_val(prec, 1u32) >> (prec - prec / 8);
    for _ in 0..400 {
        let mut moved = Float::with_val(prec, 0);
        for i in 0..n {
            let pv = eval(&roots[i]);
            let mut den = Complex::with_val(prec, (1, 0));
            for j in 0..n {
                if j != i {
                    den *= Complex::with_val(prec, &roots[i] - &roots[j]);
                }
            }
            let delta = pv / den;
            let step = bigfloat::cabs(&delta);
            if step > moved {
                moved = step;
            }
            roots[i] -= delta;
        }
        if moved < tol {
            break;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::big_rat;

    fn q(n: i64, d: i64) -> BigRational {
        big_rat(n, d)
    }

    #[test]
    fn trager_over_gaussian() {
        // y^2 + 1 splits over Q(i)
        let f = Poly::new(vec![Cyc::from_i64(1), Cyc::zero(), Cyc::from_i64(1)]);
        let fac = factor_squarefree_cyc(&f, 4);
        assert_eq!(fac.len(), 2);
        for g in &fac {
            assert_eq!(g.deg(), Some(1));
            let r = g.coeff(0).neg();
            assert_eq!(r.mul(&r), Cyc::from_i64(-1));
        }

        // x^4 - x^2 + 1 factors into two quadratics over Q(i)
        let phi12 = crate::cyclotomic::cyclotomic_poly(12);
        let f = Poly::new(phi12.c.iter().map(|a| Cyc::from_rat(a.clone())).collect());
        let fac = factor_squarefree_cyc(&f, 4);
        assert_eq!(fac.len(), 2);
        assert!(fac.iter().all(|g| g.deg() == Some(2)));

        // y^2 - 3i stays irreducible over Q(i)
        let i = Cyc::root_of_unity(4, 1);
        let f = Poly::new(vec![i.scale(&q(-3, 1)), Cyc::zero(), Cyc::from_i64(1)]);
        let fac = factor_squarefree_cyc(&f, 4);
        assert_eq!(fac.len(), 1);
        assert_eq!(fac[0].deg(), Some(2));
    }

    #[test]
    fn trager_rational_base() {
        // base order 1 falls back to factoring over Q: y^2 - 1 = (y-1)(y+1)
        let f = Poly::new(vec![Cyc::from_i64(-1), Cyc::zero(), Cyc::from_i64(1)]);
        let fac = factor_squarefree_cyc(&f, 1);
        assert_eq!(fac.len(), 2);
    }

    #[test]
    fn relative_field_arithmetic() {
        // K = Q(i)[y]/(y^2 - 3i)
        let i = Cyc::root_of_unity(4, 1);
        let g = Poly::new(vec![i.scale(&q(-3, 1)), Cyc::zero(), Cyc::from_i64(1)]);
        let k = RelExt::new(4, g);
        let y = k.gen();
        let y2 = y.mul(&y);
        assert_eq!(y2.as_cyc().unwrap(), i.scale(&q(3, 1)));
        let one = y.mul(&y.inv());
        assert_eq!(one, k.one());
        // (1 + y)^2 = 1 + 2y + 3i
        let e = k.one().add(&y);
        let e2 = e.mul(&e);
        let expect = k
            .from_cyc(i.scale(&q(3, 1)).add(&Cyc::from_i64(1)))
            .add(&y.scale_i64(2));
        assert_eq!(e2, expect);
        assert_eq!(k.absolute_degree(), 4);
    }

    #[test]
    fn absolute_model_and_embeddings() {
        // Q(i)[y]/(y^2 - 3i): y^4 = -9, so the m = 0 primitive element already
        // works and the absolute polynomial is x^4 + 9.
        let i = Cyc::root_of_unity(4, 1);
        let g = Poly::new(vec![i.scale(&q(-3, 1)), Cyc::zero(), Cyc::from_i64(1)]);
        let k = RelExt::new(4, g);
        let (m, p) = k.absolute_model();
        assert_eq!(m, 0);
        assert_eq!(crate::poly::rat_poly_string(&p, "x"), "x^4 + 9");

        let roots = k.embeddings(64);
        assert_eq!(roots.len(), 2);
        for r in &roots {
            let r2 = Complex::with_val(64, r * r);
            let diff = r2 - Complex::with_val(64, (0, 3));
            assert!(bigfloat::cabs(&Complex::with_val(64, diff)).to_f64() < 1e-12);
        }
        assert!(roots[0].real().to_f64() <= roots[1].real().to_f64());
    }

    #[test]
    fn rendering_relative() {
        let i = Cyc::root_of_unity(4, 1);
        let g = Poly::new(vec![i.scale(&q(-3, 1)), Cyc::zero(), Cyc::from_i64(1)]);
        assert_eq!(rel_poly_string(&g, "y"), "y^2 - 3*t");
        let k = RelExt::new(4, g);
        let e = k
            .one()
            .add(&k.gen().scale_cyc(&i.scale(&q(2, 1)).add(&Cyc::from_i64(1))));
        assert_eq!(format!("{}", e), "(2*t + 1)*y + 1");
    }

    #[test]
    fn durand_kerner_roots() {
        // roots of z^3 - 1
        let one = Complex::with_val(96, (1, 0));
        let zero = Complex::with_val(96, (0, 0));
        let p = vec![
            Complex::with_val(96, (-1, 0)),
            zero.clone(),
            zero,
            one,
        ];
        let mut roots = complex_roots(&p, 96);
        roots.sort_by(|a, b| a.real().partial_cmp(b.real()).unwrap());
        assert!((roots[2].real().to_f64() - 1.0).abs() < 1e-20);
        assert!((roots[0].real().to_f64() + 0.5).abs() < 1e-20);
    }
}
