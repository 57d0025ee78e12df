//! Space construction: new, cusp, old, Eisenstein and full spaces of modular
//! forms with their bases, dimensions and membership tests.
//!
//! The cuspidal side is driven entirely by the trace form: the translates
//! T(n) T_new generate the new space, and
//!
//!   S_k(Gamma_0(N), chi) = (+)_(f | M | N) (+)_(d | N/M) B(d) S_k^new(Gamma_0(M), chi_M)
//!
//! assembles cusp and old spaces from lower-level new spaces, where B(d) is
//! the expanding operator a(n) -> a(n/d) and f is the conductor of chi.  The
//! full space adds the rational Eisenstein basis.  Every space carries an
//! exact reduced row echelon form of its basis expansions up to the Sturm
//! bound, which makes membership (`mftobasis`) a finite linear-algebra
//! problem: two forms of the space agreeing to the bound are equal.

use crate::arith::{self, big_rat, lcm};
use crate::cyclotomic::Cyc;
use crate::dirichlet::DirichletCharacter;
use crate::eisenstein;
use crate::linalg::Mat;
use crate::qseries::FormExpr;
use crate::trace;
use num_rational::BigRational;
use serde_json::json;

/// The five space codes: 0 = new, 1 = cusp, 2 = old, 3 = Eisenstein,
/// 4 = full.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceCode {
    New,
    Cusp,
    Old,
    Eisenstein,
    Full,
}

impl SpaceCode {
    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(SpaceCode::New),
            1 => Some(SpaceCode::Cusp),
            2 => Some(SpaceCode::Old),
            3 => Some(SpaceCode::Eisenstein),
            4 => Some(SpaceCode::Full),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            SpaceCode::New => 0,
            SpaceCode::Cusp => 1,
            SpaceCode::Old => 2,
            SpaceCode::Eisenstein => 3,
            SpaceCode::Full => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceCode::New => "new",
            SpaceCode::Cusp => "cusp",
            SpaceCode::Old => "old",
            SpaceCode::Eisenstein => "eisenstein",
            SpaceCode::Full => "full",
        }
    }
}

/// A constructed space of modular forms.
#[derive(Clone, Debug)]
pub struct ModularSpace {
    pub level: u64,
    pub weight: u32,
    /// True for half-integral weight: the actual weight is `weight + 1/2`.
    pub half: bool,
    pub character: DirichletCharacter,
    pub code: SpaceCode,
    /// Basis as form expressions.  For new spaces these are the Hecke
    /// translates T(n) T_new in the order found (not echelonized); for
    /// cusp/old spaces B(d)-images of lower-level new bases; for Eisenstein
    /// the trace-reduced basis; for full, Eisenstein followed by cusp.
    pub basis: Vec<FormExpr>,
    /// Reduced row echelon form of the basis expansions, columns q^0..q^sturm.
    pub echelon: Mat<Cyc>,
    pub sturm: u64,
    /// For cusp/old/full spaces: the blocks (M, chi_M, d) whose B(d)-embedded
    /// new spaces make up the cuspidal part, in basis order.
    pub provenance: Vec<(u64, DirichletCharacter, u64)>,
}

/// Sturm bound ceil(k/12 * [SL_2(Z) : Gamma_0(N)]) + 1: two forms of
/// M_k(Gamma_0(N)) (any character mod N) agreeing up to this bound are equal.
pub fn sturm_bound(level: u64, weight: u32) -> u64 {
    (weight as u64 * arith::psi(level)).div_ceil(12) + 1
}

/// dim of the requested space, from the trace formula and the Eisenstein
/// enumeration, without materializing a basis.  Zero when the parity
/// condition chi(-1) = (-1)^k fails.
pub fn mfdim(level: u64, weight: u32, chi: &DirichletCharacter, code: SpaceCode) -> u64 {
    assert_eq!(chi.modulus(), level);
    assert!(weight >= 2, "dimensions for weight < 2 live in special_weights");
    if chi.is_even() != (weight % 2 == 0) {
        return 0;
    }
    match code {
        SpaceCode::New => trace::dim_new(level, weight, chi),
        SpaceCode::Cusp => trace::dim_cusp(level, weight, chi),
        SpaceCode::Old => trace::dim_cusp(level, weight, chi) - trace::dim_new(level, weight, chi),
        SpaceCode::Eisenstein => eisenstein::dim_eisenstein(level, weight, chi),
        SpaceCode::Full => {
            trace::dim_cusp(level, weight, chi) + eisenstein::dim_eisenstein(level, weight, chi)
        }
    }
}

/// Dimension scan over all Galois orbits of characters mod N (the "character
/// 0" convention): returns (orbit order, smallest Conrey index, dim) for
/// every orbit with a nonzero space, sorted by (order, index).
pub fn mfdim_joker(level: u64, weight: u32, code: SpaceCode) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for chi in DirichletCharacter::orbit_representatives(level) {
        if chi.is_even() != (weight % 2 == 0) {
            continue;
        }
        let d = mfdim(level, weight, &chi, code);
        if d > 0 {
            out.push((chi.order(), chi.conrey_index(), d));
        }
    }
    out.sort();
    out
}

/// Expansion of f as a row of exact cyclotomic coefficients a(0..=upto).
pub(crate) fn coef_row(f: &FormExpr, upto: u64) -> Vec<Cyc> {
    f.coeffs(upto, 1)
        .into_iter()
        .map(|c| c.as_cyc().expect("space basis coefficients must be cyclotomic"))
        .collect()
}

/// Reduce `row` against the reduced rows already collected; returns None when
/// the row is dependent, otherwise the normalized new reduced row.
fn reduce_row(reduced: &[(usize, Vec<Cyc>)], mut row: Vec<Cyc>) -> Option<(usize, Vec<Cyc>)> {
    for (piv, r) in reduced {
        if !row[*piv].is_zero() {
            let f = row[*piv].clone();
            for (x, y) in row.iter_mut().zip(r) {
                *x = x.sub(&f.mul(y));
            }
        }
    }
    let piv = row.iter().position(|c| !c.is_zero())?;
    let inv = row[piv].inv();
    for x in row.iter_mut() {
        *x = x.mul(&inv);
    }
    Some((piv, row))
}

fn new_space(level: u64, weight: u32, chi: &DirichletCharacter) -> (Vec<FormExpr>, u64) {
    let dim = trace::dim_new(level, weight, chi);
    let sturm = sturm_bound(level, weight);
    let mut basis: Vec<FormExpr> = Vec::new();
    if dim == 0 {
        return (basis, sturm);
    }
    let tform = FormExpr::trace_form(level, weight, chi, true);
    let mut reduced: Vec<(usize, Vec<Cyc>)> = Vec::new();
    for n in 1..=sturm {
        if basis.len() as u64 == dim {
            break;
        }
        let f = if n == 1 { tform.clone() } else { tform.hecke(n) };
        let row = coef_row(&f, sturm);
        if let Some(r) = reduce_row(&reduced, row) {
            reduced.push(r);
            basis.push(f);
        }
    }
    assert_eq!(
        basis.len() as u64,
        dim,
        "Hecke translates of the new trace form failed to reach the new dimension \
         within the Sturm bound at ({}, {})",
        level,
        weight
    );
    (basis, sturm)
}

/// Assemble the cuspidal blocks B(d) S^new(M, chi_M); `include_top` keeps the
/// (M = N, d = 1) new block (cusp space) or drops it (old space).
fn cusp_blocks(
    level: u64,
    weight: u32,
    chi: &DirichletCharacter,
    include_top: bool,
) -> (Vec<FormExpr>, Vec<(u64, DirichletCharacter, u64)>) {
    let fchi = chi.conductor();
    let chi_prim = chi.to_primitive();
    let mut basis = Vec::new();
    let mut provenance = Vec::new();
    for m in arith::divisors(level) {
        if m % fchi != 0 {
            continue;
        }
        if !include_top && m == level {
            continue;
        }
        let chi_m = chi_prim.lift_to(m);
        let (sub, _) = new_space(m, weight, &chi_m);
        if sub.is_empty() {
            continue;
        }
        for d in arith::divisors(level / m) {
            provenance.push((m, chi_m.clone(), d));
            for f in &sub {
                basis.push(if d == 1 { f.clone() } else { f.expand_bd(d) });
            }
        }
    }
    (basis, provenance)
}

/// Construct the requested space with its basis and echelonized expansions.
pub fn mfinit(level: u64, weight: u32, chi: &DirichletCharacter, code: SpaceCode) -> ModularSpace {
    assert_eq!(chi.modulus(), level, "character modulus must equal the level");
    assert!(weight >= 2, "weights below 2 are constructed in special_weights");
    assert_eq!(
        chi.is_even(),
        weight % 2 == 0,
        "parity violation: chi(-1) != (-1)^k leaves only the zero space"
    );
    let sturm = sturm_bound(level, weight);
    let (basis, provenance) = match code {
        SpaceCode::New => (new_space(level, weight, chi).0, Vec::new()),
        SpaceCode::Cusp => cusp_blocks(level, weight, chi, true),
        SpaceCode::Old => cusp_blocks(level, weight, chi, false),
        SpaceCode::Eisenstein => {
            (eisenstein::weisinger_basis_rational(level, weight, chi), Vec::new())
        }
        SpaceCode::Full => {
            let mut b = eisenstein::weisinger_basis_rational(level, weight, chi);
            let (cusp, prov) = cusp_blocks(level, weight, chi, true);
            b.extend(cusp);
            (b, prov)
        }
    };
    let claimed = mfdim(level, weight, chi, code);
    assert_eq!(basis.len() as u64, claimed, "basis count disagrees with the dimension");
    // exact echelon form of the expansions
    let rows: Vec<Vec<Cyc>> = basis.iter().map(|f| coef_row(f, sturm)).collect();
    let mut echelon = Mat::new(if rows.is_empty() {
        vec![Vec::new()]
    } else {
        rows
    });
    if !basis.is_empty() {
        let pivots = echelon.rref();
        assert_eq!(pivots.len() as u64, claimed, "echelon rank below the claimed dimension");
        echelon.a.truncate(pivots.len());
    } else {
        echelon = Mat::new(Vec::new());
    }
    ModularSpace {
        level,
        weight,
        half: false,
        character: chi.clone(),
        code,
        basis,
        echelon,
        sturm,
        provenance,
    }
}

impl ModularSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The weight as an exact rational (integral or half-integral).
    pub fn weight_rational(&self) -> BigRational {
        if self.half {
            big_rat(2 * self.weight as i64 + 1, 2)
        } else {
            big_rat(self.weight as i64, 1)
        }
    }

    /// Exact coordinates of f on the space's basis, decided by coefficients
    /// up to the Sturm bound of the composite level.  Errors when f is not in
    /// the space.
    pub fn mftobasis(&self, f: &FormExpr) -> Result<Vec<Cyc>, String> {
        if let Some(w) = f.weight() {
            if w != self.weight_rational() {
                return Err(format!(
                    "not in space: form has weight {} but the space has weight {}",
                    w,
                    self.weight_rational()
                ));
            }
        }
        // sound bound for forms living on the composite level (the bound is
        // monotone in the weight, so rounding a half-integral weight up keeps
        // it valid)
        let bound = sturm_bound(
            lcm(self.level, f.level()),
            self.weight + if self.half { 1 } else { 0 },
        );
        let target: Vec<Cyc> = coef_row(f, bound);
        if self.basis.is_empty() {
            if target.iter().all(|c| c.is_zero()) {
                return Ok(Vec::new());
            }
            return Err("not in space: the space is zero".into());
        }
        let cols: Vec<Vec<Cyc>> = self.basis.iter().map(|g| coef_row(g, bound)).collect();
        // solve sum_j x_j cols[j] = target by row reduction of the augmented system
        let dim = cols.len();
        let mut aug: Vec<Vec<Cyc>> = (0..=bound as usize)
            .map(|i| {
                let mut row: Vec<Cyc> = cols.iter().map(|c| c[i].clone()).collect();
                row.push(target[i].clone());
                row
            })
            .collect();
        let mut m = Mat::new(std::mem::take(&mut aug));
        let pivots = m.rref();
        if pivots.contains(&dim) {
            return Err("not in space: expansion is outside the basis span".into());
        }
        // basis rows are independent, so every unknown is pivotal
        let mut x = vec![Cyc::zero(); dim];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = m.a[r][dim].clone();
        }
        Ok(x)
    }

    /// Serializable descriptor: parameters, dimension and basis expansions to
    /// the Sturm bound.
    pub fn describe_json(&self) -> serde_json::Value {
        let expansions: Vec<Vec<String>> = self
            .basis
            .iter()
            .map(|f| {
                f.coeffs(self.sturm, 1)
                    .iter()
                    .map(|c| format!("{}", c))
                    .collect()
            })
            .collect();
        let weight = if self.half {
            json!(format!("{}/2", 2 * self.weight + 1))
        } else {
            json!(self.weight)
        };
        json!({
            "level": self.level,
            "weight": weight,
            "character": [self.character.modulus(), self.character.conrey_index()],
            "space": self.code.name(),
            "dimension": self.dim(),
            "sturm": self.sturm,
            "basis": self.basis.iter().map(|f| f.to_text()).collect::<Vec<_>>(),
            "expansions": expansions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::big_rat;
    use num_rational::BigRational;

    fn triv(n: u64) -> DirichletCharacter {
        DirichletCharacter::trivial(n)
    }

    fn as_rat(c: &Cyc) -> BigRational {
        c.try_rational().unwrap()
    }

    #[test]
    fn sturm_bound_values() {
        assert_eq!(sturm_bound(1, 12), 2);
        assert_eq!(sturm_bound(4, 2), 2);
        // monotone in the weight, and in the level along divisibility
        // (M_k(N) embeds in M_k(N m), so the bound must not shrink)
        for n in 1..=20u64 {
            for k in 2..=10u32 {
                assert!(sturm_bound(n, k) <= sturm_bound(n, k + 1));
                for m in 2..=6u64 {
                    assert!(sturm_bound(n, k) <= sturm_bound(n * m, k));
                }
            }
        }
    }

    #[test]
    fn full_space_level_one_weight_four() {
        let sp = mfinit(1, 4, &triv(1), SpaceCode::Full);
        assert_eq!(sp.dim(), 1);
        // the single basis element spans E_4: a(1)/a(0) = 240
        let f = &sp.basis[0];
        let ratio = f.coef(1).as_rational().unwrap() / f.coef(0).as_rational().unwrap();
        assert_eq!(ratio, big_rat(240, 1));
    }

    #[test]
    fn new_space_dimensions_and_echelon() {
        let sp = mfinit(96, 4, &triv(96), SpaceCode::New);
        assert_eq!(sp.dim(), 6);
        assert_eq!(sp.echelon.rows, 6);
        let sp26 = mfinit(26, 2, &triv(26), SpaceCode::New);
        assert_eq!(sp26.dim(), 2);
        // echelonized expansions have pivots at q^1 and q^2
        assert!(sp26.echelon.a[0][1].try_rational().unwrap() == big_rat(1, 1));
        assert!(sp26.echelon.a[1][2].try_rational().unwrap() == big_rat(1, 1));
        assert!(sp26.echelon.a[0][0].is_zero());
    }

    #[test]
    fn decomposition_dimensions() {
        // dim cusp = dim old + dim new and dim full = dim eis + dim cusp,
        // with the materialized bases agreeing with the computed dimensions
        for n in 1..=24u64 {
            for k in [2u32, 4] {
                let chi = triv(n);
                let d_new = mfdim(n, k, &chi, SpaceCode::New);
                let d_old = mfdim(n, k, &chi, SpaceCode::Old);
                let d_cusp = mfdim(n, k, &chi, SpaceCode::Cusp);
                let d_eis = mfdim(n, k, &chi, SpaceCode::Eisenstein);
                let d_full = mfdim(n, k, &chi, SpaceCode::Full);
                assert_eq!(d_cusp, d_old + d_new, "N={} k={}", n, k);
                assert_eq!(d_full, d_eis + d_cusp, "N={} k={}", n, k);
                let sp = mfinit(n, k, &chi, SpaceCode::Cusp);
                assert_eq!(sp.dim() as u64, d_cusp);
                assert_eq!(sp.echelon.rows as u64, d_cusp);
            }
        }
        // a character case: level 15, weight 3, odd quadratic character mod 15
        let chi15 = DirichletCharacter::from_discriminant(-15).unwrap();
        assert_eq!(chi15.modulus(), 15);
        let d_cusp = mfdim(15, 3, &chi15, SpaceCode::Cusp);
        let d_new = mfdim(15, 3, &chi15, SpaceCode::New);
        let d_old = mfdim(15, 3, &chi15, SpaceCode::Old);
        assert_eq!(d_cusp, d_new + d_old);
        let sp = mfinit(15, 3, &chi15, SpaceCode::Full);
        assert_eq!(sp.dim() as u64, mfdim(15, 3, &chi15, SpaceCode::Full));
    }

    #[test]
    fn old_space_of_level_22() {
        // S_2(22) = S_2^new(11) + B(2) S_2^new(11): all old
        let sp = mfinit(22, 2, &triv(22), SpaceCode::Old);
        assert_eq!(sp.dim(), 2);
        assert_eq!(mfdim(22, 2, &triv(22), SpaceCode::New), 0);
        assert_eq!(sp.provenance.len(), 2);
        assert_eq!(sp.provenance[0], (11, triv(11), 1));
        assert_eq!(sp.provenance[1], (11, triv(11), 2));
    }

    #[test]
    fn tobasis_one_dimensional() {
        let sp = mfinit(1, 12, &triv(1), SpaceCode::Cusp);
        assert_eq!(sp.dim(), 1);
        let delta = FormExpr::delta();
        let coords = sp.mftobasis(&delta).unwrap();
        assert_eq!(coords.len(), 1);
        assert_eq!(as_rat(&coords[0]), big_rat(1, 1));
    }

    #[test]
    fn tobasis_theta_in_level_four() {
        // theta^4 lies in M_2(Gamma_0(4)); the coordinates reproduce r_4(n)
        let sp = mfinit(4, 2, &triv(4), SpaceCode::Full);
        assert_eq!(sp.dim(), 2);
        let theta4 = FormExpr::theta_char(&triv(1)).pow(4);
        let coords = sp.mftobasis(&theta4).unwrap();
        // rebuild the expansion from the coordinates and compare past the bound
        for n in 0..=30u64 {
            let mut acc = Cyc::zero();
            for (x, f) in coords.iter().zip(&sp.basis) {
                acc = acc.add(&x.mul(&f.coef(n).as_cyc().unwrap()));
            }
            assert_eq!(as_rat(&acc), theta4.coef(n).as_rational().unwrap(), "n={}", n);
        }
    }

    #[test]
    fn tobasis_rejections() {
        let sp = mfinit(4, 2, &triv(4), SpaceCode::Full);
        // weight mismatch
        assert!(sp.mftobasis(&FormExpr::delta()).is_err());
        // right weight, wrong space: a weight-2 form of level 3 is not in M_2(4)
        let e3 = FormExpr::eisenstein(
            2,
            &DirichletCharacter::from_discriminant(-3).unwrap(),
            &DirichletCharacter::from_discriminant(-3).unwrap(),
            1,
        );
        assert_eq!(e3.weight(), Some(big_rat(2, 1)));
        assert!(sp.mftobasis(&e3).is_err());
    }

    #[test]
    fn bd_embedding_commutes_with_hecke() {
        // T(p) B(d) f = B(d) T(p) f for p coprime to the composite level, and
        // on an eigenform the eigenvalue is preserved
        let sp11 = mfinit(11, 2, &triv(11), SpaceCode::New);
        let f = &sp11.basis[0];
        let bf = f.expand_bd(3);
        for p in [5u64, 7, 13] {
            let lhs = bf.hecke(p);
            let rhs = f.hecke(p).expand_bd(3);
            for n in 0..=30u64 {
                assert_eq!(
                    lhs.coef(n).as_rational().unwrap(),
                    rhs.coef(n).as_rational().unwrap(),
                    "p={} n={}",
                    p,
                    n
                );
            }
            // S_2(11) is one-dimensional, so f is an eigenform: a(p) f = T(p) f
            let ap = f.coef(p).as_rational().unwrap();
            for n in 1..=20u64 {
                assert_eq!(
                    lhs.coef(n).as_rational().unwrap(),
                    ap.clone() * bf.coef(n).as_rational().unwrap(),
                    "p={} n={}",
                    p,
                    n
                );
            }
        }
    }

    #[test]
    fn full_echelon_contains_cusp_rows() {
        let full = mfinit(8, 4, &triv(8), SpaceCode::Full);
        let cusp = mfinit(8, 4, &triv(8), SpaceCode::Cusp);
        assert_eq!(cusp.dim(), 1);
        let mut rows = full.echelon.a.clone();
        let base_rank = full.echelon.rows;
        rows.extend(cusp.echelon.a.clone());
        let mut m = Mat::new(rows);
        assert_eq!(m.rref().len(), base_rank);
    }

    #[test]
    fn joker_dimension_scan() {
        // every reported orbit matches a direct dimension computation, and
        // parity-violating orbits are absent
        let scan = mfdim_joker(26, 2, SpaceCode::New);
        assert!(!scan.is_empty());
        for (order, idx, d) in &scan {
            let chi = DirichletCharacter::new(26, *idx).unwrap();
            assert_eq!(chi.order(), *order);
            assert!(chi.is_even());
            assert_eq!(mfdim(26, 2, &chi, SpaceCode::New), *d);
        }
        // the trivial orbit leads with dimension 2
        assert_eq!(scan[0], (1, 1, 2));
        // weight 3 scan at level 15 contains the odd quadratic character
        let scan15 = mfdim_joker(15, 3, SpaceCode::Cusp);
        assert!(scan15.iter().all(|(_, idx, _)| {
            DirichletCharacter::new(15, *idx).unwrap().is_odd()
        }));
    }

    #[test]
    fn space_descriptor_serializes() {
        let sp = mfinit(11, 2, &triv(11), SpaceCode::Cusp);
        let j = sp.describe_json();
        assert_eq!(j["dimension"], 1);
        assert_eq!(j["space"], "cusp");
        assert_eq!(j["level"], 11);
        let basis_text = j["basis"][0].as_str().unwrap();
        let parsed = FormExpr::parse(basis_text).unwrap();
        assert_eq!(
            parsed.coef(5).as_rational().unwrap(),
            sp.basis[0].coef(5).as_rational().unwrap()
        );
    }
}
