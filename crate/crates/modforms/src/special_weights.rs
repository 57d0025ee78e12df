//! Spaces outside the integral-weight k >= 2 range: half-integral weights via
//! theta quotients, and weight one via Hecke stability.
//!
//! Half-integral (k in 1/2 + Z, k >= 3/2, 4 | N, chi even): the two series
//!
//!   theta(tau)  = sum_(n in Z) q^(n^2),      theta2(tau) = theta(2 tau)
//!
//! have no common zero on the completed upper half-plane: theta vanishes
//! exactly at the cusps a/b with b = 2 (mod 4), theta2 exactly at b = 4
//! (mod 8).  For f in M_k(Gamma0(N), chi) both f theta and f theta2 live in
//! the integral-weight space M_(k+1/2)(Gamma0(N'), chi') with N' = N or 2N,
//! so the pairs (g1, g2) of that space solving g1 theta2 = g2 theta are
//! exactly (f theta, f theta2), and f is recovered as the quotient g1/theta.
//! Everything reduces to one exact kernel computation.
//!
//! Weight one (chi odd): no trace formula applies, but every f in
//! S_1(Gamma0(N), chi) satisfies f E in S_2(Gamma0(N)) for each Eisenstein
//! series E of E_1(Gamma0(N), conj chi), so
//!
//!   S_1(Gamma0(N), chi)  is contained in  W = cap_E  S_2(Gamma0(N)) / E,
//!
//! and the maximal subspace of W carried into itself by T(n), n the smallest
//! prime not dividing N, is exactly S_1 (Schaeffer's criterion).  W and the
//! stable subspace are computed by exact linear algebra on q-expansions over
//! the cyclotomic field of the character.

use crate::arith::{self, big_rat};
use crate::cyclotomic::Cyc;
use crate::dirichlet::DirichletCharacter;
use crate::eisenstein;
use crate::linalg::Mat;
use crate::poly::Poly;
use crate::qseries::{Coef, FormExpr};
use crate::spaces::{coef_row, mfinit, sturm_bound, ModularSpace, SpaceCode};
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// The coprime pair theta, theta2 underlying the half-integral construction,
/// together with their weight-one squares.
pub struct ThetaPair {
    /// theta(tau) = 1 + 2q + 2q^4 + 2q^9 + ..., weight 1/2 on Gamma0(4).
    pub theta: FormExpr,
    /// theta2(tau) = theta(2 tau), weight 1/2 on Gamma0(8).
    pub theta2: FormExpr,
}

impl ThetaPair {
    pub fn new() -> Self {
        let theta = FormExpr::theta_char(&DirichletCharacter::trivial(1));
        let theta2 = theta.expand_bd(2);
        ThetaPair { theta, theta2 }
    }

    /// The squares theta^2 and theta2^2: honest weight-one forms (theta^2 is
    /// the Eisenstein series counting representations as two squares).
    pub fn squares(&self) -> (FormExpr, FormExpr) {
        (self.theta.pow(2), self.theta2.pow(2))
    }
}

impl Default for ThetaPair {
    fn default() -> Self {
        Self::new()
    }
}

/// Linear combination sum_j c_j forms[j], skipping zero coefficients.
fn linear_combo(coeffs: &[Cyc], forms: &[FormExpr]) -> FormExpr {
    let terms: Vec<(Coef, FormExpr)> = coeffs
        .iter()
        .zip(forms)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, f)| (Coef::Cyc(c.clone()), f.clone()))
        .collect();
    assert!(!terms.is_empty(), "zero vector has no combination");
    FormExpr::linear(terms)
}

/// sum_j c_j rows[j] as a plain coefficient row.
fn combine_rows(coeffs: &[Cyc], rows: &[Vec<Cyc>]) -> Vec<Cyc> {
    let len = rows.first().map_or(0, |r| r.len());
    let mut out = vec![Cyc::zero(); len];
    for (c, r) in coeffs.iter().zip(rows) {
        if c.is_zero() {
            continue;
        }
        for (x, y) in out.iter_mut().zip(r) {
            *x = x.add(&c.mul(y));
        }
    }
    out
}

/// Reduced echelon form of `rows` with bookkeeping: returns (pivot, reduced
/// row, combination over the input rows) sorted by pivot column.  Dependent
/// input rows are dropped.
fn echelon_combos(rows: &[Vec<Cyc>]) -> Vec<(usize, Vec<Cyc>, Vec<Cyc>)> {
    let n = rows.len();
    let mut red: Vec<(usize, Vec<Cyc>, Vec<Cyc>)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut row = r.clone();
        let mut combo = vec![Cyc::zero(); n];
        combo[i] = Cyc::one();
        for (piv, rr, cc) in &red {
            if !row[*piv].is_zero() {
                let f = row[*piv].clone();
                for (x, y) in row.iter_mut().zip(rr) {
                    *x = x.sub(&f.mul(y));
                }
                for (x, y) in combo.iter_mut().zip(cc) {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        let Some(p) = row.iter().position(|c| !c.is_zero()) else {
            continue;
        };
        let inv = row[p].inv();
        for x in row.iter_mut() {
            *x = x.mul(&inv);
        }
        for x in combo.iter_mut() {
            *x = x.mul(&inv);
        }
        for (_, rr, cc) in red.iter_mut() {
            if !rr[p].is_zero() {
                let f = rr[p].clone();
                for (x, y) in rr.iter_mut().zip(&row) {
                    *x = x.sub(&f.mul(y));
                }
                for (x, y) in cc.iter_mut().zip(&combo) {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        red.push((p, row, combo));
    }
    red.sort_by_key(|(p, _, _)| *p);
    red
}

/// M_k or S_k(Gamma0(N), chi) for half-integral k = (2k)/2 >= 3/2.
///
/// The basis is returned in reduced echelon form.  The returned space has
/// `half` set; its `weight` field holds floor(k).
pub fn halfint_space(
    level: u64,
    weight: &BigRational,
    chi: &DirichletCharacter,
    code: SpaceCode,
) -> ModularSpace {
    assert_eq!(chi.modulus(), level, "character modulus must equal the level");
    assert!(level % 4 == 0, "half-integral weight needs 4 | N");
    assert!(chi.is_even(), "half-integral weight needs an even character");
    assert!(
        matches!(code, SpaceCode::Cusp | SpaceCode::Full),
        "half-integral spaces come in cusp and full flavours only"
    );
    let two_k = weight * big_rat(2, 1);
    assert!(two_k.is_integer(), "weight must be rational with denominator 2");
    let two_k = two_k.to_integer().to_i64().expect("weight in range");
    assert!(two_k % 2 != 0, "weight must lie in 1/2 + Z");
    assert!(two_k >= 3, "half-integral weights start at 3/2");
    // ambient integral weight k + 1/2 on Gamma0(N')
    let kk = ((two_k + 1) / 2) as u32;
    let nn = if level % 8 == 0 { level } else { 2 * level };
    let mut chip = chi.lift_to(nn);
    if kk % 2 == 1 {
        let chi4 = DirichletCharacter::from_discriminant(-4).unwrap();
        chip = chip.mul(&chi4.lift_to(nn));
    }
    let ambient = mfinit(nn, kk, &chip, code);
    let pair = ThetaPair::new();
    let d = ambient.dim();
    let sturm = sturm_bound(nn, kk);
    let empty = ModularSpace {
        level,
        weight: kk - 1,
        half: true,
        character: chi.clone(),
        code,
        basis: Vec::new(),
        echelon: Mat::new(Vec::new()),
        sturm,
        provenance: Vec::new(),
    };
    if d == 0 {
        return empty;
    }
    // kernel of sum_i a_i (b_i theta2) - sum_i b_i (b_i theta) = 0; the
    // products have integral weight k + 3/2 <= kk + 1, so that Sturm bound
    // decides equality of both sides
    let rows_len = sturm_bound(nn, kk + 1);
    let mut sys = Mat::zero(rows_len as usize + 1, 2 * d);
    for (j, b) in ambient.basis.iter().enumerate() {
        let t2 = coef_row(&b.mul(&pair.theta2), rows_len);
        let t1 = coef_row(&b.mul(&pair.theta), rows_len);
        for i in 0..=rows_len as usize {
            sys.a[i][j] = t2[i].clone();
            sys.a[i][d + j] = t1[i].neg();
        }
    }
    let sols = sys.kernel();
    if sols.is_empty() {
        return empty;
    }
    // each solution is (f theta, f theta2); recover f = g1/theta
    let members: Vec<FormExpr> = sols
        .iter()
        .map(|v| linear_combo(&v[..d], &ambient.basis).div(&pair.theta))
        .collect();
    let rows: Vec<Vec<Cyc>> = members.iter().map(|f| coef_row(f, sturm)).collect();
    let red = echelon_combos(&rows);
    assert_eq!(red.len(), members.len(), "half-integral solutions must be independent");
    let basis: Vec<FormExpr> = red
        .iter()
        .map(|(_, _, combo)| linear_combo(combo, &members))
        .collect();
    let echelon = Mat::new(red.iter().map(|(_, r, _)| r.clone()).collect());
    ModularSpace { basis, echelon, ..empty }
}

/// The weight-one candidate space W = cap_E S_2(Gamma0(N))/E and its maximal
/// Hecke-stable subspace, which is S_1(Gamma0(N), chi).
pub struct StabilityProblem {
    pub level: u64,
    pub chi: DirichletCharacter,
    /// Basis of E_1(Gamma0(N), conj chi) with coefficients in Q(zeta_o).
    pub eis: Vec<FormExpr>,
    /// Ambient weight-two cusp space S_2(Gamma0(N)).
    pub ambient: ModularSpace,
    /// Row bound for all expansion linear algebra: the weight-two Sturm bound
    /// plus the largest q-adic valuation among the Eisenstein basis.
    pub bound: u64,
    /// Basis of W after intersecting all Eisenstein quotient candidates.
    pub w_basis: Vec<FormExpr>,
    /// Hecke index whose stability pass reached the fixed point.
    pub stabilizer: u64,
    /// Echelonized basis of the maximal stable subspace, i.e. of S_1.
    pub basis: Vec<FormExpr>,
}

impl StabilityProblem {
    /// Compute S_1(Gamma0(N), chi) for an odd character chi.
    pub fn solve(level: u64, chi: &DirichletCharacter) -> Self {
        assert_eq!(chi.modulus(), level, "character modulus must equal the level");
        assert!(chi.is_odd(), "weight one needs an odd character");
        let eis = eisenstein::weisinger_basis_rational(level, 1, &chi.conj());
        assert!(!eis.is_empty(), "the weight-one Eisenstein space is never empty");
        let ambient = mfinit(level, 2, &DirichletCharacter::trivial(level), SpaceCode::Cusp);
        let d2 = ambient.dim();
        let first_prime = arith::primes().find(|p| level % p != 0).unwrap();

        let r2 = sturm_bound(level, 2);
        let eis_rows: Vec<Vec<Cyc>> = eis.iter().map(|e| coef_row(e, r2)).collect();
        let maxval = eis_rows
            .iter()
            .map(|r| {
                r.iter()
                    .position(|c| !c.is_zero())
                    .expect("Eisenstein series vanishing to the Sturm bound")
            })
            .max()
            .unwrap() as u64;
        let bound = r2 + maxval;
        let mut out = StabilityProblem {
            level,
            chi: chi.clone(),
            eis,
            ambient,
            bound,
            w_basis: Vec::new(),
            stabilizer: first_prime,
            basis: Vec::new(),
        };
        if d2 == 0 {
            return out;
        }

        // divide by a series with nonzero constant term so that every
        // candidate quotient is an honest power series; such an element
        // exists because the key (1, conj chi primitive, 1) always
        // contributes a constant term -B_(1,chi)/2 != 0
        let e0 = out
            .eis
            .iter()
            .position(|e| !e.coef(0).is_zero())
            .expect("no weight-one Eisenstein series with nonzero constant term");
        let masters: Vec<FormExpr> =
            out.ambient.basis.iter().map(|s| s.div(&out.eis[e0])).collect();

        // W: impose w E in S_2 for every other E.  Both sides of
        // (h0/E0) E = h are weight-three expansions once multiplied through
        // by E0, so the weight-three Sturm bound (plus valuation slack)
        // decides each condition.
        let r3 = sturm_bound(level, 3) + maxval;
        let s2_rows: Vec<Vec<Cyc>> =
            out.ambient.basis.iter().map(|s| coef_row(s, r3)).collect();
        // rows = W basis in master coordinates
        let mut coords: Vec<Vec<Cyc>> = (0..d2)
            .map(|i| {
                let mut v = vec![Cyc::zero(); d2];
                v[i] = Cyc::one();
                v
            })
            .collect();
        for (idx, e) in out.eis.iter().enumerate() {
            if idx == e0 || coords.is_empty() {
                continue;
            }
            let prod_rows: Vec<Vec<Cyc>> =
                masters.iter().map(|m| coef_row(&m.mul(e), r3)).collect();
            let w = coords.len();
            let mut sys = Mat::zero(r3 as usize + 1, w + d2);
            for (j, c) in coords.iter().enumerate() {
                let row = combine_rows(c, &prod_rows);
                for i in 0..=r3 as usize {
                    sys.a[i][j] = row[i].clone();
                }
            }
            for (j, s) in s2_rows.iter().enumerate() {
                for i in 0..=r3 as usize {
                    sys.a[i][w + j] = s[i].neg();
                }
            }
            // the kernel projects injectively onto the first block because
            // the S_2 rows are independent
            coords = sys
                .kernel()
                .iter()
                .map(|v| combine_rows(&v[..w], &coords))
                .collect();
        }
        out.w_basis = coords.iter().map(|c| linear_combo(c, &masters)).collect();

        // maximal Hecke-stable subspace: iterate V <- {v in V : T(p) v in V}
        // to a fixed point for the smallest prime p not dividing N
        // (Schaeffer's criterion), then sweep two further primes; any shrink
        // under a later prime restarts the sweep so the result is stable
        // under all of them
        let plist: Vec<u64> = arith::primes().filter(|p| level % p != 0).take(3).collect();
        let fixpoint = |coords: &mut Vec<Vec<Cyc>>, p: u64| -> bool {
            let plen = bound * p;
            let mlong: Vec<Vec<Cyc>> = masters.iter().map(|m| coef_row(m, plen)).collect();
            let chip = chi.value(p as i64);
            let pu = p as usize;
            // T(p) in weight one on a coefficient row: a(mp) + chi(p) a(m/p)
            let trow = |row: &[Cyc]| -> Vec<Cyc> {
                (0..=bound as usize)
                    .map(|m| {
                        let mut v = row[m * pu].clone();
                        if m % pu == 0 {
                            v = v.add(&chip.mul(&row[m / pu]));
                        }
                        v
                    })
                    .collect()
            };
            let mut shrank = false;
            loop {
                let w = coords.len();
                if w == 0 {
                    break;
                }
                let mut sys = Mat::zero(bound as usize + 1, 2 * w);
                for (j, c) in coords.iter().enumerate() {
                    let long = combine_rows(c, &mlong);
                    let t = trow(&long);
                    for i in 0..=bound as usize {
                        sys.a[i][j] = t[i].clone();
                        sys.a[i][w + j] = long[i].neg();
                    }
                }
                let ker = sys.kernel();
                if ker.len() == w {
                    break;
                }
                shrank = true;
                *coords = ker.iter().map(|v| combine_rows(&v[..w], coords)).collect();
            }
            shrank
        };
        let mut i = 0;
        while i < plist.len() && !coords.is_empty() {
            if fixpoint(&mut coords, plist[i]) {
                out.stabilizer = plist[i];
                if i > 0 {
                    i = 0; // earlier primes must be re-verified
                    continue;
                }
            }
            i += 1;
        }

        if !coords.is_empty() {
            let master_rows: Vec<Vec<Cyc>> =
                masters.iter().map(|m| coef_row(m, bound)).collect();
            let rows: Vec<Vec<Cyc>> =
                coords.iter().map(|c| combine_rows(c, &master_rows)).collect();
            let red = echelon_combos(&rows);
            assert_eq!(red.len(), coords.len(), "stable basis must be independent");
            let master_coords: Vec<Vec<Cyc>> = red
                .iter()
                .map(|(_, _, combo)| combine_rows(combo, &coords))
                .collect();
            out.basis = master_coords
                .iter()
                .map(|c| linear_combo(c, &masters))
                .collect();
        }
        out
    }

    /// Re-verify, independently of the solve path, that every T(n) for the
    /// given indices maps the computed basis into its own span (decided on
    /// expansions to the problem's row bound).
    pub fn stability_certificate(&self, indices: &[u64]) -> bool {
        if self.basis.is_empty() {
            return true;
        }
        let rows: Vec<Vec<Cyc>> = self.basis.iter().map(|f| coef_row(f, self.bound)).collect();
        let dim = rows.len();
        let mut span = Mat::new(rows);
        let pivots = span.rref();
        assert_eq!(pivots.len(), dim);
        for &n in indices {
            for f in &self.basis {
                let image = coef_row(&f.hecke_at(n, self.level), self.bound);
                let mut row = image;
                for (r, &p) in pivots.iter().enumerate() {
                    if !row[p].is_zero() {
                        let c = row[p].clone();
                        for (x, y) in row.iter_mut().zip(&span.a[r]) {
                            *x = x.sub(&c.mul(y));
                        }
                    }
                }
                if row.iter().any(|c| !c.is_zero()) {
                    return false;
                }
            }
        }
        true
    }
}

/// All B(d)-lifts of lower-level weight-one new spaces into level N.
fn weight1_old_forms(level: u64, chi: &DirichletCharacter) -> Vec<FormExpr> {
    let f = chi.conductor();
    let mut out = Vec::new();
    for m in arith::divisors(level) {
        if m == level || m % f != 0 {
            continue;
        }
        let chim = chi.to_primitive().lift_to(m);
        let new_m = weight1_space(m, &chim, SpaceCode::New);
        for d in arith::divisors(level / m) {
            for b in &new_m.basis {
                out.push(b.expand_bd(d));
            }
        }
    }
    out
}

/// Identity matrix helper.
fn mat_identity(n: usize) -> Mat<Cyc> {
    Mat::from_fn(n, n, |i, j| if i == j { Cyc::one() } else { Cyc::zero() })
}

/// Evaluate g at the square matrix a by Horner's rule.
fn mat_poly_eval(g: &Poly<Cyc>, a: &Mat<Cyc>) -> Mat<Cyc> {
    let n = a.rows;
    let ident = mat_identity(n);
    let mut acc = Mat::zero(n, n);
    let d = g.deg().expect("nonzero polynomial");
    for i in (0..=d).rev() {
        acc = acc.mul(a);
        let c = g.coeff(i);
        if !c.is_zero() {
            acc = acc.add(&ident.scale(&c));
        }
    }
    acc
}

/// Coordinates of the Hecke-invariant complement of the old span inside the
/// cusp space: split the characteristic polynomial of T(p) as (new part) *
/// (old part) and take the kernel of the new factor evaluated at T(p).
fn invariant_complement(
    level: u64,
    basis: &[FormExpr],
    rows: &[Vec<Cyc>],
    bound: u64,
    old_coords: &[Vec<Cyc>],
) -> Vec<Vec<Cyc>> {
    let c = basis.len();
    let o = old_coords.len();
    // columns = basis rows, for coordinate solves
    let span = Mat::from_fn(bound as usize + 1, c, |i, j| rows[j][i].clone());
    let old_mat = Mat::from_fn(c, o, |i, j| old_coords[j][i].clone());
    for p in arith::primes().filter(|p| level % p != 0).take(8) {
        let mut cols = Vec::new();
        for f in basis {
            let image = coef_row(&f.hecke_at(p, level), bound);
            let coords = span
                .solve(&image)
                .expect("Hecke operators preserve the weight-one cusp space");
            cols.push(coords);
        }
        let a = Mat::from_fn(c, c, |i, j| cols[j][i].clone());
        // restriction of T(p) to the old span
        let mut restr_cols = Vec::new();
        let mut stable = true;
        for oc in old_coords {
            let y = a.mul_vec(oc);
            match old_mat.solve(&y) {
                Some(x) => restr_cols.push(x),
                None => {
                    stable = false;
                    break;
                }
            }
        }
        assert!(stable, "the old space must be Hecke stable");
        let b = Mat::from_fn(o, o, |i, j| restr_cols[j][i].clone());
        let h = b.charpoly();
        let cp = a.charpoly();
        let (g, rem) = cp.divrem(&h);
        assert!(rem.is_zero(), "the old part must divide the characteristic polynomial");
        if g.gcd(&h).deg() != Some(0) {
            continue; // eigenvalue collision at this prime; try the next
        }
        let new_coords = mat_poly_eval(&g, &a).kernel();
        assert_eq!(new_coords.len(), c - o, "invariant complement has the wrong dimension");
        let mut all: Vec<Vec<Cyc>> = new_coords.clone();
        all.extend(old_coords.iter().cloned());
        assert_eq!(Mat::new(all).rank(), c, "old and new parts must fill the cusp space");
        return new_coords;
    }
    panic!(
        "no Hecke operator separating old from new systems found at level {}",
        level
    );
}

/// S_1, M_1 or S_1^new (Gamma0(N), chi) for an odd character chi.
pub fn weight1_space(level: u64, chi: &DirichletCharacter, code: SpaceCode) -> ModularSpace {
    assert!(
        matches!(code, SpaceCode::Cusp | SpaceCode::Full | SpaceCode::New),
        "weight-one spaces come in cusp, full and new flavours"
    );
    let prob = StabilityProblem::solve(level, chi);
    let bound = prob.bound;
    let pack = |basis: Vec<FormExpr>, code: SpaceCode| -> ModularSpace {
        let rows: Vec<Vec<Cyc>> = basis.iter().map(|f| coef_row(f, bound)).collect();
        let red = echelon_combos(&rows);
        assert_eq!(red.len(), basis.len(), "weight-one basis must be independent");
        let echelon = Mat::new(red.iter().map(|(_, r, _)| r.clone()).collect());
        ModularSpace {
            level,
            weight: 1,
            half: false,
            character: chi.clone(),
            code,
            basis,
            echelon,
            sturm: bound,
            provenance: Vec::new(),
        }
    };
    match code {
        SpaceCode::Cusp => pack(prob.basis, SpaceCode::Cusp),
        SpaceCode::Full => {
            let mut basis = eisenstein::weisinger_basis_rational(level, 1, chi);
            basis.extend(prob.basis);
            pack(basis, SpaceCode::Full)
        }
        SpaceCode::New => {
            let cusp = prob.basis;
            if cusp.is_empty() {
                return pack(cusp, SpaceCode::New);
            }
            let old = weight1_old_forms(level, chi);
            if old.is_empty() {
                return pack(cusp, SpaceCode::New);
            }
            let rows: Vec<Vec<Cyc>> = cusp.iter().map(|f| coef_row(f, bound)).collect();
            let span = Mat::from_fn(bound as usize + 1, cusp.len(), |i, j| rows[j][i].clone());
            // old forms are cusp forms of the level, so they must lie in the
            // computed space: a genuine cross-check of the stability result
            let old_in_cusp: Vec<Vec<Cyc>> = old
                .iter()
                .map(|f| {
                    span.solve(&coef_row(f, bound))
                        .expect("old lifts must lie in the weight-one cusp space")
                })
                .collect();
            let red = echelon_combos(&old_in_cusp);
            let old_coords: Vec<Vec<Cyc>> =
                red.iter().map(|(_, r, _)| r.clone()).collect();
            if old_coords.len() == cusp.len() {
                return pack(Vec::new(), SpaceCode::New);
            }
            let new_coords = invariant_complement(level, &cusp, &rows, bound, &old_coords);
            let basis = new_coords.iter().map(|v| linear_combo(v, &cusp)).collect();
            pack(basis, SpaceCode::New)
        }
        _ => unreachable!(),
    }
}

/// dim of a weight-one space without keeping the basis around.
pub fn weight1_dim(level: u64, chi: &DirichletCharacter, code: SpaceCode) -> u64 {
    if chi.is_even() {
        return 0;
    }
    match code {
        SpaceCode::Eisenstein => eisenstein::dim_eisenstein(level, 1, chi),
        SpaceCode::Old => {
            let cusp = weight1_space(level, chi, SpaceCode::Cusp).dim() as u64;
            let new = weight1_space(level, chi, SpaceCode::New).dim() as u64;
            cusp - new
        }
        _ => weight1_space(level, chi, code).dim() as u64,
    }
}

/// Weight-one dimension scan over all Galois orbits of characters mod N:
/// (orbit order, smallest Conrey index, dim) for every orbit with a nonzero
/// space, sorted by (order, index).
pub fn weight1_joker(level: u64, code: SpaceCode) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for chi in DirichletCharacter::orbit_representatives(level) {
        if chi.is_even() {
            continue;
        }
        let d = weight1_dim(level, &chi, code);
        if d > 0 {
            out.push((chi.order(), chi.conrey_index(), d));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod scratch {
    use super::*;

    #[test]
    fn probe() {
        // M_{3/2}(4)
        let triv4 = DirichletCharacter::trivial(4);
        let m32 = halfint_space(4, &big_rat(3, 2), &triv4, SpaceCode::Full);
        println!("M_3/2(4) dim = {}", m32.dim());
        if m32.dim() > 0 {
            println!("row0: {:?}", m32.echelon.a[0].iter().take(9).map(|c| format!("{:?}", c.try_rational())).collect::<Vec<_>>());
        }
        // S_{3/2}(4)
        let s32 = halfint_space(4, &big_rat(3, 2), &triv4, SpaceCode::Cusp);
        println!("S_3/2(4) dim = {}", s32.dim());
        // M_{5/2}(12)
        let triv12 = DirichletCharacter::trivial(12);
        let m52 = halfint_space(12, &big_rat(5, 2), &triv12, SpaceCode::Full);
        println!("M_5/2(12) dim = {}", m52.dim());
        for r in &m52.echelon.a {
            println!("  {:?}", r.iter().take(9).map(|c| c.try_rational().map(|q| q.to_string())).collect::<Vec<_>>());
        }
    }

    #[test]
    fn probe_weight1_small() {
        // S_1(23, chi_-23)
        let chi = DirichletCharacter::from_discriminant(-23).unwrap();
        let prob = StabilityProblem::solve(23, &chi);
        println!("eis dim = {}, ambient dim = {}, bound = {}", prob.eis.len(), prob.ambient.dim(), prob.bound);
        println!("W dim = {}, S1 dim = {}, stabilizer = {}", prob.w_basis.len(), prob.basis.len(), prob.stabilizer);
        for f in &prob.basis {
            println!("  {:?}", coef_row(f, 12).iter().map(|c| c.try_rational().map(|q| q.to_string())).collect::<Vec<_>>());
        }
    }
}
