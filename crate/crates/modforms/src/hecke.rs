//! Hecke operators, eigenforms and their coefficient fields.
//!
//! On a space of level N, weight k and character chi the n-th Hecke operator
//! acts on q-expansions by
//!
//!     a_{T(n) f}(m)  =  sum_{d | gcd(m,n), gcd(d,N)=1}  chi(d) d^(k-1) a_f(mn/d^2),
//!
//! so T(p) for p | N is the U_p operator.  The T(n) commute, satisfy
//! T(m)T(n) = T(mn) for coprime m, n, and preserve every subspace cut out in
//! `spaces`.  On a new space they act semisimply, and the space breaks into
//! Galois orbits of common eigenvectors.  Each orbit is stored as one
//! `Eigenform` whose coefficients generate a relative extension
//! Q(zeta_o)[y]/(P) of the field of character values, o being the order of
//! chi.  All of the splitting happens in exact arithmetic; floating point
//! appears only in the complex embeddings.

use std::sync::Arc;

use num_rational::BigRational;
use serde_json::json;

use crate::arith::{self, big_rat};
use crate::cyclotomic::Cyc;
use crate::dirichlet::DirichletCharacter;
use crate::linalg::Mat;
use crate::poly::Poly;
use crate::qseries::{Coef, FormExpr};
use crate::relext::{factor_squarefree_cyc, rel_poly_string, RelElem, RelExt};
use crate::spaces::{mfinit, ModularSpace, SpaceCode};

/// T(n) of the space's level applied to a member form.
pub fn hecke_apply(space: &ModularSpace, f: &FormExpr, n: u64) -> FormExpr {
    f.hecke_at(n, space.level)
}

/// Matrix of T(n) on the basis of `space`: column j holds the coordinates of
/// T(n) applied to the j-th basis form, so matrices compose like the
/// operators they represent.
pub fn mfheckemat(space: &ModularSpace, n: u64) -> Mat<Cyc> {
    let dim = space.dim();
    let mut m = Mat::zero(dim, dim);
    for (j, b) in space.basis.iter().enumerate() {
        let image = b.hecke_at(n, space.level);
        let coords = space
            .mftobasis(&image)
            .expect("Hecke operators preserve the space");
        for (i, c) in coords.into_iter().enumerate() {
            m.a[i][j] = c;
        }
    }
    m
}

/// One Galois orbit of newforms: a normalized eigenform (a(1) = 1) whose
/// coefficients lie in Q(zeta_o)[y]/(P) with o the character order.
pub struct Eigenform {
    pub level: u64,
    pub weight: u32,
    pub character: DirichletCharacter,
    /// Coefficient field as a relative extension of the character field.
    pub field: Arc<RelExt>,
    /// Coordinates on the parent new-space basis.
    pub coords: Vec<RelElem>,
    /// The eigenform as a linear combination of the parent basis.
    pub expr: FormExpr,
}

impl Eigenform {
    /// n-th coefficient as an element of the coefficient field.
    pub fn coef(&self, n: u64) -> RelElem {
        coef_to_rel(&self.expr.coef(n), &self.field)
    }

    /// Degree of the coefficient field over the character field Q(zeta_o).
    pub fn relative_degree(&self) -> usize {
        self.field.degree()
    }

    /// Defining polynomial of the coefficient field over Q(zeta_o), written
    /// in y (with t standing for zeta_o).  Rational orbits print as "y".
    pub fn defining_poly_string(&self) -> String {
        if self.field.degree() == 1 {
            "y".into()
        } else {
            rel_poly_string(&self.field.modulus, "y")
        }
    }

    /// Absolute model over Q: the smallest shift m >= 0 such that y + m t
    /// is a primitive element, together with its minimal polynomial.
    pub fn absolute_model(&self) -> (u64, Poly<BigRational>) {
        self.field.absolute_model()
    }

    /// Complex coefficient lists a(0..=upto), one per embedding of the
    /// coefficient field that fixes the canonical embedding
    /// zeta_o -> exp(2 pi i / o) of the base.  Embeddings are ordered by the
    /// (Re, Im) order of the images of y.
    pub fn embeddings(&self, upto: u64, prec: u32) -> Vec<Vec<rug::Complex>> {
        let roots = self.field.embeddings(prec);
        roots
            .iter()
            .map(|r| (0..=upto).map(|n| self.coef(n).embed_at(r, prec)).collect())
            .collect()
    }

    /// JSON descriptor: space parameters, defining polynomial, and exact
    /// coefficients a(0..=upto) as strings in y and t.
    pub fn describe_json(&self, upto: u64) -> serde_json::Value {
        let coefs: Vec<String> = (0..=upto).map(|n| self.coef(n).to_string()).collect();
        let (shift, abs) = self.absolute_model();
        let abs = crate::poly::rat_poly_string(&abs, "y");
        json!({
            "level": self.level,
            "weight": self.weight,
            "character": {
                "modulus": self.character.modulus(),
                "conrey": self.character.conrey_index(),
                "order": self.character.order(),
            },
            "base_order": self.field.base_order,
            "poly": self.defining_poly_string(),
            "absolute_poly": abs,
            "absolute_generator_shift": shift,
            "coefficients": coefs,
        })
    }
}

fn coef_to_rel(c: &Coef, ext: &Arc<RelExt>) -> RelElem {
    match c {
        Coef::Rat(r) => ext.from_rat(r.clone()),
        Coef::Cyc(z) => ext.from_cyc(z.clone()),
        Coef::Rel(e) => {
            assert!(e.ext == *ext, "coefficient from a foreign extension");
            e.clone()
        }
    }
}

/// Characteristic polynomial squarefree?  Then return its irreducible
/// factors over Q(zeta_order), sorted for reproducibility.
fn try_split(m: &Mat<Cyc>, order: u64) -> Option<Vec<Poly<Cyc>>> {
    let cp = m.charpoly();
    if cp.gcd(&cp.derivative()).deg() != Some(0) {
        return None;
    }
    let mut factors = factor_squarefree_cyc(&cp, order);
    factors.sort_by_key(|g| (g.deg().unwrap(), rel_poly_string(g, "y")));
    Some(factors)
}

/// Find an operator in the Hecke algebra acting with squarefree
/// characteristic polynomial: T(p) for ascending primes p coprime to the
/// level, then small integer combinations a T(p) + b T(q).  Deterministic,
/// so repeated runs present the same orbits.
fn splitting_operator(space: &ModularSpace) -> (String, Mat<Cyc>, Vec<Poly<Cyc>>) {
    let order = space.character.order();
    let mut good_primes = Vec::new();
    for p in arith::primes() {
        if space.level % p != 0 {
            good_primes.push(p);
            if good_primes.len() == 8 {
                break;
            }
        }
    }
    let mut mats = Vec::new();
    for &p in &good_primes {
        let m = mfheckemat(space, p);
        if let Some(f) = try_split(&m, order) {
            return (format!("T({})", p), m, f);
        }
        mats.push((p, m));
    }
    // Spaces with inner twists defeat every single T(p): each coefficient
    // generates only a proper subfield of the orbit.  Mix two, then three,
    // operators from prime classes that break the twists.
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            for a in 1..=3i64 {
                for b in -3..=3i64 {
                    if b == 0 {
                        continue;
                    }
                    let m = mats[i]
                        .1
                        .scale(&Cyc::from_i64(a))
                        .add(&mats[j].1.scale(&Cyc::from_i64(b)));
                    if let Some(f) = try_split(&m, order) {
                        let label = format!(
                            "{}*T({}) + {}*T({})",
                            a, mats[i].0, b, mats[j].0
                        );
                        return (label, m, f);
                    }
                }
            }
        }
    }
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            for k in (j + 1)..mats.len() {
                for a in 1..=2i64 {
                    for b in -2..=2i64 {
                        for c in -2..=2i64 {
                            if b == 0 || c == 0 {
                                continue;
                            }
                            let m = mats[i]
                                .1
                                .scale(&Cyc::from_i64(a))
                                .add(&mats[j].1.scale(&Cyc::from_i64(b)))
                                .add(&mats[k].1.scale(&Cyc::from_i64(c)));
                            if let Some(f) = try_split(&m, order) {
                                let label = format!(
                                    "{}*T({}) + {}*T({}) + {}*T({})",
                                    a, mats[i].0, b, mats[j].0, c, mats[k].0
                                );
                                return (label, m, f);
                            }
                        }
                    }
                }
            }
        }
    }
    panic!(
        "no squarefree Hecke combination found on level {} weight {}",
        space.level, space.weight
    );
}

/// Kernel vector of A - lambda on the coefficient-field extension of the
/// base; the eigenspace is one-dimensional because the characteristic
/// polynomial of A is squarefree.
fn eigenvector(a: &Mat<Cyc>, ext: &Arc<RelExt>, lambda: &RelElem) -> Vec<RelElem> {
    let n = a.rows;
    let mut m: Vec<Vec<RelElem>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = ext.from_cyc(a.a[i][j].clone());
                    if i == j {
                        e.sub(lambda)
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].inv();
        for c in col..n {
            m[row][c] = m[row][c].mul(&inv);
        }
        for r in 0..n {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..n {
                    let t = m[row][c].mul(&f);
                    m[r][c] = m[r][c].sub(&t);
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == n {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    assert_eq!(free.len(), 1, "eigenspace must be one-dimensional");
    let fc = free[0];
    let mut v = vec![ext.zero(); n];
    v[fc] = ext.one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = m[r][fc].neg();
    }
    v
}

/// Decompose a new space into Galois orbits of eigenforms.
///
/// The coefficient field of each orbit is presented by the matching
/// irreducible factor of the splitting operator's characteristic polynomial:
/// kept as found over a rational base, depressed (y -> y - b/deg, killing the
/// subleading term) over a genuinely cyclotomic base.  Orbits are sorted by
/// field degree, then by the printed polynomial.
pub fn mfeigenbasis(space: &ModularSpace) -> Vec<Eigenform> {
    assert_eq!(space.code, SpaceCode::New, "eigenbasis lives on new spaces");
    let dim = space.dim();
    if dim == 0 {
        return Vec::new();
    }
    let order = space.character.order();
    let (_label, amat, factors) = splitting_operator(space);
    let total: usize = factors.iter().map(|g| g.deg().unwrap()).sum();
    assert_eq!(total, dim, "factor degrees must exhaust the space");
    let rational_base = arith::phi(crate::cyclotomic::normalize_order(order)) == 1;
    let mut out = Vec::new();
    for fac in factors {
        let deg = fac.deg().unwrap();
        let (modulus, shift) = if rational_base || deg == 1 {
            (fac.clone(), Cyc::zero())
        } else {
            let s = fac.coeff(deg - 1).scale(&big_rat(1, deg as i64));
            (fac.shift_var(&s.neg()), s)
        };
        let ext = RelExt::new(order, modulus);
        // The eigenvalue of the splitting operator in the canonical variable.
        let lambda = ext.gen().sub(&ext.from_cyc(shift));
        let mut v = eigenvector(&amat, &ext, &lambda);
        let combo = |v: &[RelElem]| {
            FormExpr::linear(
                v.iter()
                    .zip(space.basis.iter())
                    .map(|(c, b)| (rel_coef(c), b.clone()))
                    .collect(),
            )
        };
        let a1 = coef_to_rel(&combo(&v).coef(1), &ext);
        assert!(!a1.is_zero(), "newform with vanishing first coefficient");
        let inv = a1.inv();
        for c in v.iter_mut() {
            *c = c.mul(&inv);
        }
        let expr = combo(&v);
        out.push(Eigenform {
            level: space.level,
            weight: space.weight,
            character: space.character.clone(),
            field: ext,
            coords: v,
            expr,
        });
    }
    out
}

/// Coefficients of degree-one orbits collapse into the base field, which
/// keeps the expression serializable.
fn rel_coef(c: &RelElem) -> Coef {
    match c.as_cyc() {
        Some(z) if c.ext.degree() == 1 => Coef::Cyc(z),
        _ => Coef::Rel(c.clone()),
    }
}

/// Defining polynomials of the coefficient fields of the orbits of a new
/// space, in the order of `mfeigenbasis`.
pub fn mffields(space: &ModularSpace) -> Vec<String> {
    mfeigenbasis(space)
        .iter()
        .map(|f| f.defining_poly_string())
        .collect()
}

/// Real Dirichlet characters mod n (order at most 2) of the given parity.
pub fn real_characters(n: u64, even: bool) -> Vec<DirichletCharacter> {
    DirichletCharacter::all(n)
        .into_iter()
        .filter(|c| c.order() <= 2 && c.is_even() == even)
        .collect()
}

/// Search the given levels for rational eigenforms (trivial or quadratic
/// character of matching parity) whose coefficients honor the constraints
/// a(index) = value.  Levels are scanned in the order given, characters by
/// ascending label.
pub fn mfeigensearch(
    levels: &[u64],
    weight: u32,
    constraints: &[(u64, BigRational)],
) -> Vec<(u64, Eigenform)> {
    assert!(weight >= 2, "searches run at weight >= 2");
    let even = weight % 2 == 0;
    let mut out = Vec::new();
    for &n in levels {
        for chi in real_characters(n, even) {
            let space = mfinit(n, weight, &chi, SpaceCode::New);
            if space.dim() == 0 {
                continue;
            }
            'forms: for f in mfeigenbasis(&space) {
                if f.field.absolute_degree() != 1 {
                    continue;
                }
                for (idx, val) in constraints {
                    let a = f.coef(*idx);
                    match a.as_cyc().and_then(|c| c.try_rational()) {
                        Some(r) if &r == val => {}
                        _ => continue 'forms,
                    }
                }
                out.push((n, f));
            }
        }
    }
    out
}

/// Solve for the unique member of the space with the given initial
/// coefficients a(0), a(1), ...; None when no member matches or several do.
fn solve_prefix(space: &ModularSpace, prefix: &[BigRational]) -> Option<Vec<Cyc>> {
    let dim = space.dim();
    if dim == 0 || prefix.is_empty() {
        return None;
    }
    let mut m = Mat::from_fn(prefix.len(), dim + 1, |i, j| {
        if j < dim {
            space.basis[j]
                .coef(i as u64)
                .as_cyc()
                .expect("basis coefficients are cyclotomic")
        } else {
            Cyc::from_rat(prefix[i].clone())
        }
    });
    let pivots = m.rref();
    if pivots.contains(&dim) || pivots.len() < dim {
        return None;
    }
    let mut x = vec![Cyc::zero(); dim];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m.a[r][dim].clone();
    }
    Some(x)
}

/// Search the given levels and all real characters of matching parity for
/// forms of the requested kind whose q-expansion starts with the given
/// coefficients.  Only uniquely determined matches are reported.
pub fn mfsearch(
    levels: &[u64],
    weight: u32,
    prefix: &[BigRational],
    code: SpaceCode,
) -> Vec<(u64, DirichletCharacter, FormExpr)> {
    assert!(weight >= 2, "searches run at weight >= 2");
    let even = weight % 2 == 0;
    let mut out = Vec::new();
    for &n in levels {
        for chi in real_characters(n, even) {
            let space = mfinit(n, weight, &chi, code);
            if let Some(x) = solve_prefix(&space, prefix) {
                let terms = x
                    .iter()
                    .zip(space.basis.iter())
                    .map(|(c, b)| (Coef::Cyc(c.clone()), b.clone()))
                    .collect();
                out.push((n, chi, FormExpr::linear(terms)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Ring;

    fn rat(n: i64, d: i64) -> BigRational {
        big_rat(n, d)
    }

    fn new_space(level: u64, weight: u32) -> ModularSpace {
        mfinit(level, weight, &DirichletCharacter::trivial(level), SpaceCode::New)
    }

    #[test]
    fn hecke_operator_fixes_eisenstein_eigenform() {
        // T(p) E_4 = (1 + p^3) E_4 at level one.
        let e4 = FormExpr::e_k(4);
        let space = mfinit(1, 4, &DirichletCharacter::trivial(1), SpaceCode::Full);
        for p in [2u64, 3, 5] {
            let image = hecke_apply(&space, &e4, p);
            let scale = Coef::from_i64((1 + p * p * p) as i64);
            for n in 0..20u64 {
                assert_eq!(image.coef(n), e4.coef(n).mul(&scale), "p={} n={}", p, n);
            }
        }
    }

    #[test]
    fn hecke_matrix_on_level_96_weight_4() {
        let space = new_space(96, 4);
        assert_eq!(space.dim(), 6);
        let m = mfheckemat(&space, 5);
        let row0: Vec<BigRational> = m.a[0].iter().map(|c| c.try_rational().unwrap()).collect();
        let row2: Vec<BigRational> = m.a[2].iter().map(|c| c.try_rational().unwrap()).collect();
        assert_eq!(
            row0,
            vec![rat(0, 1), rat(0, 1), rat(64, 1), rat(0, 1), rat(0, 1), rat(-84, 1)]
        );
        assert_eq!(
            row2,
            vec![rat(1, 1), rat(0, 1), rat(-24, 5), rat(0, 1), rat(0, 1), rat(294, 5)]
        );
    }

    #[test]
    fn hecke_matrix_identity_and_trace() {
        let space = new_space(26, 2);
        let one = mfheckemat(&space, 1);
        let id = Mat::<Cyc>::identity(space.dim());
        assert_eq!(one.a, id.a);

        // Trace of T(n) on S_2(11) against the trace formula.
        let cusp = mfinit(11, 2, &DirichletCharacter::trivial(11), SpaceCode::Cusp);
        for n in 1..=10u64 {
            let m = mfheckemat(&cusp, n);
            let mut tr = Cyc::zero();
            for i in 0..cusp.dim() {
                tr = tr.add(&m.a[i][i]);
            }
            let expected =
                crate::trace::trace_cusp(11, 2, &DirichletCharacter::trivial(11), n);
            assert_eq!(tr, expected, "n={}", n);
        }
    }

    #[test]
    fn hecke_matrices_commute_and_compose() {
        let space = new_space(26, 2);
        let m2 = mfheckemat(&space, 2);
        let m3 = mfheckemat(&space, 3);
        let m6 = mfheckemat(&space, 6);
        assert_eq!(m2.mul(&m3).a, m6.a);
        assert_eq!(m3.mul(&m2).a, m6.a);

        let cusp = mfinit(11, 2, &DirichletCharacter::trivial(11), SpaceCode::Cusp);
        let a = mfheckemat(&cusp, 3);
        let b = mfheckemat(&cusp, 4);
        assert_eq!(a.mul(&b).a, mfheckemat(&cusp, 12).a);
    }

    #[test]
    fn eigenbasis_level_23_golden_field() {
        let space = new_space(23, 2);
        let forms = mfeigenbasis(&space);
        assert_eq!(forms.len(), 1);
        let f = &forms[0];
        assert_eq!(f.defining_poly_string(), "y^2 + y - 1");
        assert_eq!(mffields(&space), vec!["y^2 + y - 1".to_string()]);
        // a(1) = 1 and a(2) = y, the root of the defining polynomial.
        assert_eq!(f.coef(1), f.field.one());
        assert_eq!(f.coef(2), f.field.gen());
    }

    #[test]
    fn eigenform_coefficients_are_multiplicative() {
        let space = new_space(23, 2);
        let f = &mfeigenbasis(&space)[0];
        let chi = &space.character;
        let k = space.weight;
        // Hecke recurrences for n <= 100.
        for n in 2..=100u64 {
            let fac = arith::factor(n);
            if fac.len() > 1 {
                let (p, e) = fac[0];
                let m = p.pow(e);
                assert_eq!(
                    f.coef(n),
                    f.coef(m).mul(&f.coef(n / m)),
                    "multiplicativity at {}",
                    n
                );
            } else {
                let (p, e) = fac[0];
                if e >= 2 {
                    let val = chi.value(p as i64);
                    let scale = Cyc::from_rat(BigRational::from(
                        num_bigint::BigInt::from(p).pow(k - 1),
                    ));
                    let tail = f.coef(p.pow(e - 2)).scale_cyc(&val.mul(&scale));
                    assert_eq!(
                        f.coef(p).mul(&f.coef(p.pow(e - 1))),
                        f.coef(n).add(&tail),
                        "recurrence at {}^{}",
                        p,
                        e
                    );
                }
            }
        }
    }

    #[test]
    fn eigenbasis_level_26_splits_rational() {
        let space = new_space(26, 2);
        let forms = mfeigenbasis(&space);
        assert_eq!(forms.len(), 2);
        assert_eq!(mffields(&space), vec!["y".to_string(), "y".to_string()]);
        let mut a2: Vec<BigRational> = forms
            .iter()
            .map(|f| f.coef(2).as_cyc().unwrap().try_rational().unwrap())
            .collect();
        a2.sort();
        assert_eq!(a2, vec![rat(-1, 1), rat(1, 1)]);
        let mut a3: Vec<BigRational> = forms
            .iter()
            .map(|f| f.coef(3).as_cyc().unwrap().try_rational().unwrap())
            .collect();
        a3.sort();
        assert_eq!(a3, vec![rat(-3, 1), rat(1, 1)]);
    }

    #[test]
    fn eigenbasis_complex_character_field() {
        // S_3^new(15) with the order-4 character mod 15 induced from 5.
        let chi = DirichletCharacter::new(15, 7).unwrap();
        assert_eq!(chi.order(), 4);
        assert!(chi.is_odd());
        let space = mfinit(15, 3, &chi, SpaceCode::New);
        assert_eq!(space.dim(), 2);
        let forms = mfeigenbasis(&space);
        assert_eq!(forms.len(), 1);
        let f = &forms[0];
        assert_eq!(f.defining_poly_string(), "y^2 - 3*t");
        let (shift, abs) = f.absolute_model();
        assert_eq!(shift, 0);
        let y = Poly::<BigRational>::x();
        let expected = y.mul(&y).mul(&y).mul(&y).add(&Poly::constant(rat(9, 1)));
        assert_eq!(abs, expected);
        assert_eq!(f.field.embeddings(64).len(), 2);
    }

    #[test]
    fn embeddings_level_23_golden_values() {
        let space = new_space(23, 2);
        let f = &mfeigenbasis(&space)[0];
        let embs = f.embeddings(3, 96);
        assert_eq!(embs.len(), 2);
        let golden = [
            [0.0, 1.0, -1.618033988749895, 2.236067977499790],
            [0.0, 1.0, 0.618033988749895, -2.236067977499790],
        ];
        for (e, g) in embs.iter().zip(golden.iter()) {
            for (z, want) in e.iter().zip(g.iter()) {
                assert!((z.real().to_f64() - want).abs() < 1e-9, "{} vs {}", z, want);
                assert!(z.imag().to_f64().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn embeddings_satisfy_ramanujan_bound() {
        let space = new_space(23, 2);
        let f = &mfeigenbasis(&space)[0];
        let embs = f.embeddings(50, 96);
        for e in &embs {
            for p in arith::primes_up_to(50) {
                let z = &e[p as usize];
                let norm = (z.real().to_f64().powi(2) + z.imag().to_f64().powi(2)).sqrt();
                assert!(
                    norm <= 2.0 * (p as f64).sqrt() + 1e-6,
                    "|a({})| = {} too large",
                    p,
                    norm
                );
            }
        }
    }

    #[test]
    fn eigensearch_finds_two_levels() {
        let levels: Vec<u64> = (1..=60).collect();
        let hits = mfeigensearch(&levels, 2, &[(2, rat(-1, 1)), (3, rat(-3, 1))]);
        let found: Vec<u64> = hits.iter().map(|(n, _)| *n).collect();
        assert_eq!(found, vec![53, 58]);
        let f = &hits[1].1;
        let expansion: Vec<BigRational> = (0..=6)
            .map(|n| f.coef(n).as_cyc().unwrap().try_rational().unwrap())
            .collect();
        assert_eq!(
            expansion,
            vec![rat(0, 1), rat(1, 1), rat(-1, 1), rat(-3, 1), rat(1, 1), rat(-3, 1), rat(3, 1)]
        );
    }

    #[test]
    fn search_matches_prescribed_prefix() {
        let levels: Vec<u64> = (1..=30).collect();
        let prefix: Vec<BigRational> = (0..=8).map(|n| rat(n, 1)).collect();
        let hits = mfsearch(&levels, 3, &prefix, SpaceCode::Cusp);
        assert_eq!(hits.len(), 2);
        let mut a9: Vec<BigRational> = Vec::new();
        let mut a10: Vec<BigRational> = Vec::new();
        for (_, _, f) in &hits {
            for n in 0..=8u64 {
                assert_eq!(f.coef(n).as_rational().unwrap(), rat(n as i64, 1));
            }
            a9.push(f.coef(9).as_rational().unwrap());
            a10.push(f.coef(10).as_rational().unwrap());
        }
        a9.sort();
        a10.sort();
        assert_eq!(a9, vec![rat(-21, 1), rat(-14, 1)]);
        assert_eq!(a10, vec![rat(-50, 1), rat(-30, 1)]);
    }

    #[test]
    fn eigenform_descriptor_round_trips() {
        let space = new_space(23, 2);
        let f = &mfeigenbasis(&space)[0];
        let v = f.describe_json(5);
        assert_eq!(v["poly"], "y^2 + y - 1");
        assert_eq!(v["level"], 23);
        assert_eq!(v["coefficients"].as_array().unwrap().len(), 6);
    }
}
