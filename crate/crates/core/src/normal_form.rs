//! Sparse exact-coefficient Poisson-bracket engine.
//!
//! Polynomials in the amplitudes z_j carry coefficients from the exact
//! algebra Q[π^{±1}, i, δ_j] with the relations i² = −1 and
//! δ_j² = |j|/(1+j²): every coefficient is a merged sum of atoms
//! (rational × π^k × i^ε × Π δ_j over modes with an odd δ-exponent), so
//! equality and zero tests are structural, not numeric. The sextic part
//!
//! ```text
//! G = (1/120π²) Σ_{j₁+⋯+j₆=0} δ_{j₁}⋯δ_{j₆} z_{j₁}⋯z_{j₆}
//! ```
//!
//! splits relative to S into the pairing part Ḡ ((Δ₀∪Δ₁∪Δ₂)∩N), the
//! removable part G̃ ((Δ₀∪Δ₁∪Δ₂)∖N), and the far part Ĝ (Δ₃). The
//! order-6 generator F solves the homological equation G̃ + {Λ, F} = 0
//! exactly; the surviving order-10 and order-14 normal-form data are
//! the action-monomial projections
//!
//! ```text
//! R̄ = Π_{Δ′₀∩N′} {Ḡ + Ĝ + ½G̃, F},
//! T̄ = Π_{Δ″₀∩N″} {{½(Ḡ+Ĝ) + ⅓G̃, F}, F}.
//! ```
//!
//! The bracket convention is pinned by the homological identity: on a
//! monomial m, {Λ, m} = −i·(Σ λ_{jᵢ})·m, which corresponds to
//! {A, B} = i Σ_{j∈Z̄} sgn(j) (∂A/∂z_j)(∂B/∂z_{−j}).
//!
//! Full order-10/14 polynomials are never materialized. Projections are
//! accumulated during contraction, and the pair classes that can reach a
//! monomial with ≤ k non-S components are enumerated by stratum buckets:
//! a factor with n non-S components loses at most one of them per
//! bracket, so (for instance) Ĝ, with ≥ 3, can never reach an all-S
//! monomial through {·, F} or {{·, F}, F} — it is dropped structurally,
//! and the drop is validated against a blind contraction oracle at small
//! scale.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use smallvec::SmallVec;

use crate::divisor_analysis::divisor;
use crate::index_sets::{enumerate_admissible, IndexTuple, TangentialSet, TupleClass};
use crate::spectral_core::{delta_sq, lambda, Mode, SpectralState};
use crate::{Error, Result};

// ---------------------------------------------------------------------
// Coefficient algebra
// ---------------------------------------------------------------------

type DeltaSet = SmallVec<[Mode; 6]>;

/// One atom: rat · π^pi_pow · i^i_par · Π_{v ∈ delta_odd} δ_v, with
/// delta_odd a sorted set of positive modes carrying an odd δ-exponent
/// (even powers are folded into `rat` via δ_v² = v/(1+v²); i² = −1 is
/// folded into the sign, so i_par ∈ {0, 1}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffAtom {
    pub rat: BigRational,
    pub pi_pow: i32,
    pub i_par: u8,
    pub delta_odd: DeltaSet,
}

impl CoeffAtom {
    pub fn rational(r: BigRational) -> Self {
        CoeffAtom { rat: r, pi_pow: 0, i_par: 0, delta_odd: DeltaSet::new() }
    }

    pub fn imaginary(r: BigRational) -> Self {
        CoeffAtom { rat: r, pi_pow: 0, i_par: 1, delta_odd: DeltaSet::new() }
    }

    fn key(&self) -> (i32, u8, &[Mode]) {
        (self.pi_pow, self.i_par, &self.delta_odd)
    }

    pub fn mul(&self, other: &CoeffAtom) -> CoeffAtom {
        let mut rat = &self.rat * &other.rat;
        // i^a · i^b: fold i² = −1
        let i_par = (self.i_par + other.i_par) % 2;
        if self.i_par == 1 && other.i_par == 1 {
            rat = -rat;
        }
        // merge the two sorted δ-sets; common modes fold as δ²
        let mut delta_odd = DeltaSet::new();
        let (mut i, mut j) = (0, 0);
        while i < self.delta_odd.len() && j < other.delta_odd.len() {
            let (a, b) = (self.delta_odd[i], other.delta_odd[j]);
            if a == b {
                rat *= delta_sq(a);
                i += 1;
                j += 1;
            } else if a < b {
                delta_odd.push(a);
                i += 1;
            } else {
                delta_odd.push(b);
                j += 1;
            }
        }
        delta_odd.extend_from_slice(&self.delta_odd[i..]);
        delta_odd.extend_from_slice(&other.delta_odd[j..]);
        CoeffAtom { rat, pi_pow: self.pi_pow + other.pi_pow, i_par, delta_odd }
    }

    pub fn conj(&self) -> CoeffAtom {
        let mut out = self.clone();
        if out.i_par == 1 {
            out.rat = -out.rat;
        }
        out
    }

    /// Numeric value (π and δ evaluated in f64).
    pub fn to_complex(&self) -> Complex64 {
        let mut v = self.rat.to_f64().unwrap_or(f64::NAN)
            * std::f64::consts::PI.powi(self.pi_pow);
        for &m in &self.delta_odd {
            v *= crate::spectral_core::delta_f64(m);
        }
        if self.i_par == 1 {
            Complex64::new(0.0, v)
        } else {
            Complex64::new(v, 0.0)
        }
    }
}

/// Merged sum of atoms; the zero coefficient is the empty sum.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolicCoefficient {
    atoms: SmallVec<[CoeffAtom; 1]>,
}

impl SymbolicCoefficient {
    pub fn zero() -> Self {
        SymbolicCoefficient::default()
    }

    pub fn from_atom(a: CoeffAtom) -> Self {
        let mut c = SymbolicCoefficient::zero();
        c.add_atom(a);
        c
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[CoeffAtom] {
        &self.atoms
    }

    pub fn add_atom(&mut self, a: CoeffAtom) {
        if a.rat.is_zero() {
            return;
        }
        match self.atoms.binary_search_by(|x| x.key().cmp(&a.key())) {
            Ok(i) => {
                self.atoms[i].rat += &a.rat;
                if self.atoms[i].rat.is_zero() {
                    self.atoms.remove(i);
                }
            }
            Err(i) => self.atoms.insert(i, a),
        }
    }

    pub fn add(&mut self, other: &SymbolicCoefficient) {
        for a in &other.atoms {
            self.add_atom(a.clone());
        }
    }

    pub fn mul_atom(&self, a: &CoeffAtom) -> SymbolicCoefficient {
        let mut out = SymbolicCoefficient::zero();
        for x in &self.atoms {
            out.add_atom(x.mul(a));
        }
        out
    }

    pub fn mul(&self, other: &SymbolicCoefficient) -> SymbolicCoefficient {
        let mut out = SymbolicCoefficient::zero();
        for x in &self.atoms {
            for y in &other.atoms {
                out.add_atom(x.mul(y));
            }
        }
        out
    }

    pub fn scale(&self, r: &BigRational) -> SymbolicCoefficient {
        if r.is_zero() {
            return SymbolicCoefficient::zero();
        }
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.rat *= r;
        }
        out
    }

    pub fn conj(&self) -> SymbolicCoefficient {
        let mut out = SymbolicCoefficient::zero();
        for a in &self.atoms {
            out.add_atom(a.conj());
        }
        out
    }

    pub fn to_complex(&self) -> Complex64 {
        self.atoms.iter().map(CoeffAtom::to_complex).sum()
    }

    /// Interpret as a real number rat·π^k: requires every atom's
    /// δ-exponents even (empty delta_odd) and no imaginary part.
    pub fn as_real_pi(&self) -> Result<(BigRational, i32)> {
        match self.atoms.len() {
            0 => Ok((BigRational::zero(), 0)),
            1 => {
                let a = &self.atoms[0];
                if a.i_par != 0 || !a.delta_odd.is_empty() {
                    Err(Error::Verification(format!(
                        "coefficient does not reduce to a real π-rational: {a:?}"
                    )))
                } else {
                    Ok((a.rat.clone(), a.pi_pow))
                }
            }
            _ => Err(Error::Verification(format!(
                "coefficient has mixed π-powers: {:?}",
                self.atoms
            ))),
        }
    }
}

// ---------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------

/// Monomial Π z_j^{e_j}, stored as (mode, exponent) pairs sorted by
/// mode with exponents ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    exps: SmallVec<[(Mode, u8); 6]>,
}

impl Monomial {
    pub fn from_pairs(pairs: &[(Mode, u8)]) -> Monomial {
        let mut map: SmallVec<[(Mode, u8); 6]> = SmallVec::new();
        for &(m, e) in pairs {
            if e == 0 {
                continue;
            }
            debug_assert!(m != 0);
            match map.binary_search_by_key(&m, |&(x, _)| x) {
                Ok(i) => map[i].1 += e,
                Err(i) => map.insert(i, (m, e)),
            }
        }
        Monomial { exps: map }
    }

    pub fn from_tuple(t: &IndexTuple) -> Monomial {
        let pairs: Vec<(Mode, u8)> = t.entries().iter().map(|&j| (j, 1)).collect();
        Monomial::from_pairs(&pairs)
    }

    /// The action monomial |z_{n₁}|^{2p} |z_{n₂}|^{2q}.
    pub fn action(s: &TangentialSet, p: u8, q: u8) -> Monomial {
        Monomial::from_pairs(&[(s.n1(), p), (-s.n1(), p), (s.n2(), q), (-s.n2(), q)])
    }

    pub fn pairs(&self) -> &[(Mode, u8)] {
        &self.exps
    }

    pub fn degree(&self) -> usize {
        self.exps.iter().map(|&(_, e)| e as usize).sum()
    }

    pub fn momentum(&self) -> i64 {
        self.exps.iter().map(|&(m, e)| m * e as i64).sum()
    }

    pub fn exp(&self, j: Mode) -> u8 {
        match self.exps.binary_search_by_key(&j, |&(x, _)| x) {
            Ok(i) => self.exps[i].1,
            Err(_) => 0,
        }
    }

    /// Non-S component count with multiplicity.
    pub fn non_s_count(&self, s: &TangentialSet) -> usize {
        self.exps
            .iter()
            .filter(|&&(m, _)| !s.contains(m))
            .map(|&(_, e)| e as usize)
            .sum()
    }

    /// True iff e_j = e_{−j} for every mode (action/pairing monomial).
    pub fn is_action(&self) -> bool {
        self.exps.iter().all(|&(m, e)| self.exp(-m) == e)
    }

    /// Sign-flip j → −j of every mode.
    pub fn flip(&self) -> Monomial {
        let pairs: Vec<(Mode, u8)> = self.exps.iter().map(|&(m, e)| (-m, e)).collect();
        Monomial::from_pairs(&pairs)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut pairs: Vec<(Mode, u8)> = self.exps.to_vec();
        pairs.extend_from_slice(&other.exps);
        Monomial::from_pairs(&pairs)
    }

    /// (self · other) / (z_j z_{−j}) for a bracket contraction at mode j.
    /// Requires e_j(self) ≥ 1 and e_{−j}(other) ≥ 1.
    fn contract(&self, other: &Monomial, j: Mode) -> Monomial {
        debug_assert!(self.exp(j) >= 1 && other.exp(-j) >= 1);
        let mut prod = self.mul(other);
        for target in [j, -j] {
            let i = prod
                .exps
                .binary_search_by_key(&target, |&(x, _)| x)
                .expect("contracted mode present");
            if prod.exps[i].1 == 1 {
                prod.exps.remove(i);
            } else {
                prod.exps[i].1 -= 1;
            }
        }
        prod
    }

    pub fn to_entries(&self) -> Vec<Mode> {
        let mut v = Vec::with_capacity(self.degree());
        for &(m, e) in &self.exps {
            for _ in 0..e {
                v.push(m);
            }
        }
        v
    }
}

// ---------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------

/// Sparse polynomial Σ c_m · m with exact coefficients, tagged with the
/// tangential set and band limit it was built for.
#[derive(Debug, Clone)]
pub struct HamiltonianPoly {
    pub s: TangentialSet,
    pub j_max: usize,
    terms: HashMap<Monomial, SymbolicCoefficient>,
}

impl HamiltonianPoly {
    pub fn new(s: TangentialSet, j_max: usize) -> Self {
        HamiltonianPoly { s, j_max, terms: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff every coefficient cancelled exactly.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, m: &Monomial) -> Option<&SymbolicCoefficient> {
        self.terms.get(m)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &SymbolicCoefficient)> {
        self.terms.iter()
    }

    pub fn add_atom_term(&mut self, m: Monomial, a: CoeffAtom) {
        if a.rat.is_zero() {
            return;
        }
        let slot = self.terms.entry(m);
        let key = match slot {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                o.get_mut().add_atom(a);
                if o.get().is_zero() {
                    o.remove();
                }
                return;
            }
            std::collections::hash_map::Entry::Vacant(v) => v,
        };
        key.insert(SymbolicCoefficient::from_atom(a));
    }

    pub fn add_coeff_term(&mut self, m: Monomial, c: &SymbolicCoefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                o.get_mut().add(c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
        }
    }

    pub fn add_poly(&mut self, other: &HamiltonianPoly) {
        for (m, c) in &other.terms {
            self.add_coeff_term(m.clone(), c);
        }
    }

    pub fn scaled(&self, r: &BigRational) -> HamiltonianPoly {
        let mut out = HamiltonianPoly::new(self.s, self.j_max);
        for (m, c) in &self.terms {
            out.add_coeff_term(m.clone(), &c.scale(r));
        }
        out
    }

    /// Every monomial conserves momentum.
    pub fn check_momentum(&self) -> Result<()> {
        for (m, _) in &self.terms {
            if m.momentum() != 0 {
                return Err(Error::Verification(format!(
                    "monomial violates momentum conservation: {m:?}"
                )));
            }
        }
        Ok(())
    }

    /// Coefficients of m and of its sign-flip are exact conjugates
    /// (the polynomial is real on the constraint z_{−j} = conj z_j).
    pub fn check_reality(&self) -> Result<()> {
        for (m, c) in &self.terms {
            let flipped = m.flip();
            let other = self.terms.get(&flipped).cloned().unwrap_or_default();
            if other.conj() != *c {
                return Err(Error::Verification(format!(
                    "reality violated at {m:?}: {c:?} vs flip {other:?}"
                )));
            }
        }
        Ok(())
    }

    /// Numeric evaluation at a spectral state.
    pub fn eval(&self, state: &SpectralState) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = c.to_complex();
            for &(mode, e) in m.pairs() {
                v *= state.get(mode).powi(e as i32);
            }
            total += v;
        }
        total
    }

    fn meta_matches(&self, other: &HamiltonianPoly) -> Result<()> {
        if self.s != other.s || self.j_max != other.j_max {
            return Err(Error::Config(format!(
                "polynomial metadata mismatch: ({:?}, {}) vs ({:?}, {})",
                self.s, self.j_max, other.s, other.j_max
            )));
        }
        Ok(())
    }
}

/// Product polynomial (used by algebra-identity tests; quadratic sizes).
pub fn poly_mul(a: &HamiltonianPoly, b: &HamiltonianPoly) -> Result<HamiltonianPoly> {
    a.meta_matches(b)?;
    let mut out = HamiltonianPoly::new(a.s, a.j_max);
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            out.add_coeff_term(ma.mul(mb), &ca.mul(cb));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------

/// Λ = Σ_{1 ≤ j ≤ j_max} λ_j z_j z_{−j}.
pub fn lambda_poly(s: TangentialSet, j_max: usize) -> HamiltonianPoly {
    let mut p = HamiltonianPoly::new(s, j_max);
    for j in 1..=j_max as Mode {
        p.add_atom_term(
            Monomial::from_pairs(&[(j, 1), (-j, 1)]),
            CoeffAtom::rational(lambda(j)),
        );
    }
    p
}

/// The sextic part split by stratum. `g_hat` is only materialized on
/// request (its Δ₃ enumeration is combinatorially infeasible at large
/// j_max and is never needed for the normal-form projections).
#[derive(Debug, Clone)]
pub struct GParts {
    pub g_bar: HamiltonianPoly,
    pub g_tilde: HamiltonianPoly,
    pub g_hat: Option<HamiltonianPoly>,
}

impl GParts {
    /// G = Ḡ + G̃ + Ĝ (requires g_hat to have been built).
    pub fn total(&self) -> Result<HamiltonianPoly> {
        let hat = self.g_hat.as_ref().ok_or_else(|| {
            Error::Config("total sextic requested but Ĝ was not materialized".into())
        })?;
        let mut g = self.g_bar.clone();
        g.add_poly(&self.g_tilde);
        g.add_poly(hat);
        Ok(g)
    }
}

/// Coefficient atom of G on one canonical tuple: multiplicity/120 · π⁻²
/// times the δ-product (even δ-powers folded to rationals).
fn g_atom(t: &IndexTuple, multiplicity: u64) -> CoeffAtom {
    let mut rat = BigRational::new(BigInt::from(multiplicity), BigInt::from(120u32));
    let mut delta_odd = DeltaSet::new();
    let mut abs: SmallVec<[Mode; 14]> = t.entries().iter().map(|&j| j.abs()).collect();
    abs.sort_unstable();
    let mut i = 0;
    while i < abs.len() {
        let v = abs[i];
        let mut count = 0usize;
        while i < abs.len() && abs[i] == v {
            count += 1;
            i += 1;
        }
        rat *= delta_sq(v).pow((count / 2) as i32);
        if count % 2 == 1 {
            delta_odd.push(v); // abs-sorted traversal keeps the set sorted
        }
    }
    CoeffAtom { rat, pi_pow: -2, i_par: 0, delta_odd }
}

/// Build the sextic part restricted to |j| ≤ j_max, split by stratum:
/// Ḡ ← (Δ₀∪Δ₁∪Δ₂)∩N, G̃ ← (Δ₀∪Δ₁∪Δ₂)∖N, Ĝ ← Δ₃ (optional).
pub fn build_g_parts(
    s: TangentialSet,
    j_max: usize,
    ceiling: Option<u64>,
    with_g_hat: bool,
) -> Result<GParts> {
    if j_max < s.n2() as usize {
        return Err(Error::Config(format!(
            "sextic band limit j_max = {j_max} must cover n2 = {}",
            s.n2()
        )));
    }
    let mut g_bar = HamiltonianPoly::new(s, j_max);
    let mut g_tilde = HamiltonianPoly::new(s, j_max);
    let near = enumerate_admissible(
        6,
        &s,
        j_max,
        &[TupleClass::Delta0, TupleClass::Delta1, TupleClass::Delta2],
        ceiling,
    )?;
    for e in &near {
        let atom = g_atom(&e.tuple, e.multiplicity);
        let mono = Monomial::from_tuple(&e.tuple);
        if e.tuple.is_normal_pairing() {
            g_bar.add_atom_term(mono, atom);
        } else {
            g_tilde.add_atom_term(mono, atom);
        }
    }
    let g_hat = if with_g_hat {
        let mut hat = HamiltonianPoly::new(s, j_max);
        let far = enumerate_admissible(6, &s, j_max, &[TupleClass::Delta3], ceiling)?;
        for e in &far {
            hat.add_atom_term(Monomial::from_tuple(&e.tuple), g_atom(&e.tuple, e.multiplicity));
        }
        Some(hat)
    } else {
        None
    };
    Ok(GParts { g_bar, g_tilde, g_hat })
}

// ---------------------------------------------------------------------
// Poisson bracket
// ---------------------------------------------------------------------

/// The contraction factor i·sgn(j)·e·f as a coefficient atom.
fn contraction_atom(j: Mode, e: u8, f: u8) -> CoeffAtom {
    let mag = BigInt::from(j.signum() * e as i64 * f as i64);
    CoeffAtom::imaginary(BigRational::from_integer(mag))
}

/// {A, B} = i Σ_{j∈Z̄} sgn(j) (∂A/∂z_j)(∂B/∂z_{−j}), computed with a
/// mode index on A. Work is proportional to the number of contracting
/// term pairs, so {Λ, F} is linear in |F|; for two dense high-degree
/// polynomials prefer [`bracket_project`].
pub fn poisson_bracket(a: &HamiltonianPoly, b: &HamiltonianPoly) -> Result<HamiltonianPoly> {
    a.meta_matches(b)?;
    let a_terms: Vec<(&Monomial, &SymbolicCoefficient)> = a.terms().collect();
    // mode → list of (term index, exponent) with e ≥ 1 at that mode
    let mut index: HashMap<Mode, Vec<(u32, u8)>> = HashMap::new();
    for (i, (m, _)) in a_terms.iter().enumerate() {
        for &(mode, e) in m.pairs() {
            index.entry(mode).or_default().push((i as u32, e));
        }
    }
    let b_terms: Vec<(&Monomial, &SymbolicCoefficient)> = b.terms().collect();
    let locals: Vec<HamiltonianPoly> = b_terms
        .par_chunks(2048)
        .map(|chunk| {
            let mut out = HamiltonianPoly::new(a.s, a.j_max);
            for (m2, c2) in chunk {
                for &(l, f) in m2.pairs() {
                    let Some(partners) = index.get(&-l) else { continue };
                    for &(ia, e) in partners {
                        let (m1, c1) = a_terms[ia as usize];
                        let j = -l;
                        let mono = m1.contract(m2, j);
                        let coeff = c1.mul(c2).mul_atom(&contraction_atom(j, e, f));
                        out.add_coeff_term(mono, &coeff);
                    }
                }
            }
            out
        })
        .collect();
    let mut out = HamiltonianPoly::new(a.s, a.j_max);
    for l in locals {
        out.add_poly(&l);
    }
    Ok(out)
}

/// G̃ + {Λ, F}: exactly the zero polynomial when F solves the
/// homological equation.
pub fn homological_residual(
    lam: &HamiltonianPoly,
    g_tilde: &HamiltonianPoly,
    f: &HamiltonianPoly,
) -> Result<HamiltonianPoly> {
    let mut r = g_tilde.clone();
    r.add_poly(&poisson_bracket(lam, f)?);
    Ok(r)
}

/// F with coefficient G̃_m / (i · Σλ) on every monomial of G̃.
pub fn build_f6(g_tilde: &HamiltonianPoly) -> Result<HamiltonianPoly> {
    let mut f = HamiltonianPoly::new(g_tilde.s, g_tilde.j_max);
    for (m, c) in g_tilde.terms() {
        let t = IndexTuple::new(m.to_entries())
            .expect("monomials never contain mode 0");
        let d = divisor(&t);
        if d.is_zero() {
            return Err(Error::Verification(format!(
                "zero divisor on generator support at {:?}; the stratum \
                 survey must exclude this configuration",
                t.entries()
            )));
        }
        // 1/(i·d) = −i/d
        let atom = CoeffAtom::imaginary(-d.recip());
        f.add_coeff_term(m.clone(), &c.mul_atom(&atom));
    }
    Ok(f)
}

// ---------------------------------------------------------------------
// Projected brackets
// ---------------------------------------------------------------------

/// One side of a projected bracket: polynomials with exact scalar
/// prefactors, e.g. Ḡ + ½·G̃.
pub type ScaledParts<'p> = [(&'p HamiltonianPoly, BigRational)];

struct Snapshot<'p> {
    mono: &'p Monomial,
    coeff: &'p SymbolicCoefficient,
    scale: &'p BigRational,
}

struct Partition<'p> {
    terms: Vec<Snapshot<'p>>,
    k0: Vec<u32>,
    // single non-S mode (exponent 1) → term indices
    k1: HashMap<Mode, Vec<u32>>,
    // each distinct non-S mode of a two-non-S term → term indices
    k2: HashMap<Mode, Vec<u32>>,
}

fn partition<'p>(parts: &'p ScaledParts<'p>, s: &TangentialSet, with_k2: bool) -> Partition<'p> {
    let mut p = Partition { terms: Vec::new(), k0: Vec::new(), k1: HashMap::new(), k2: HashMap::new() };
    for (poly, scale) in parts {
        if scale.is_zero() {
            continue;
        }
        for (mono, coeff) in poly.terms() {
            let k = mono.non_s_count(s);
            if k > 2 || (k == 2 && !with_k2) {
                // a factor loses at most one non-S component per
                // contraction, so k > max + 1 can never reach the window
                continue;
            }
            let idx = p.terms.len() as u32;
            p.terms.push(Snapshot { mono, coeff, scale });
            match k {
                0 => p.k0.push(idx),
                1 => {
                    let v = mono
                        .pairs()
                        .iter()
                        .find(|&&(m, _)| !s.contains(m))
                        .map(|&(m, _)| m)
                        .expect("k = 1 term has a non-S mode");
                    p.k1.entry(v).or_default().push(idx);
                }
                _ => {
                    for &(m, _) in mono.pairs() {
                        if !s.contains(m) {
                            p.k2.entry(m).or_default().push(idx);
                        }
                    }
                }
            }
        }
    }
    p
}

/// Projection of {Σ cᵢAᵢ, Σ dᵢBᵢ} onto monomials with at most
/// `max_non_s` ∈ {0, 1} non-S components. The pair classes that can
/// produce such monomials are enumerated through stratum buckets:
///
/// - S-mode contractions of (k₁, k₂) = (0,0), and for max = 1 also
///   (0,1)/(1,0);
/// - matched contractions at a non-S mode j (z_j from one factor,
///   z_{−j} from the other): (1,1) → 0 non-S, and for max = 1 also
///   (1,2)/(2,1) → 1 non-S.
///
/// Everything else loses too few non-S components; in particular any
/// factor with ≥ 3 non-S components (Ĝ-type) is structurally excluded,
/// which this function exploits by skipping those terms.
pub fn bracket_project(
    a_parts: &ScaledParts<'_>,
    b_parts: &ScaledParts<'_>,
    max_non_s: usize,
) -> Result<HamiltonianPoly> {
    if max_non_s > 1 {
        return Err(Error::Config(
            "projected bracket supports max_non_s ∈ {0, 1}".into(),
        ));
    }
    let (s, j_max) = match a_parts.first().or_else(|| b_parts.first()) {
        Some((p, _)) => (p.s, p.j_max),
        None => return Err(Error::Config("projected bracket needs at least one part".into())),
    };
    for (p, _) in a_parts.iter().chain(b_parts.iter()) {
        if p.s != s || p.j_max != j_max {
            return Err(Error::Config("projected bracket metadata mismatch".into()));
        }
    }
    let pa = partition(a_parts, &s, max_non_s >= 1);
    let pb = partition(b_parts, &s, max_non_s >= 1);
    let mut out = HamiltonianPoly::new(s, j_max);
    let s_modes = s.members();

    let emit = |out: &mut HamiltonianPoly, t1: &Snapshot, t2: &Snapshot, j: Mode| {
        let e = t1.mono.exp(j);
        let f = t2.mono.exp(-j);
        if e == 0 || f == 0 {
            return;
        }
        let mono = t1.mono.contract(t2.mono, j);
        if mono.non_s_count(&s) > max_non_s {
            return;
        }
        let scale = t1.scale * t2.scale;
        let coeff = t1
            .coeff
            .mul(t2.coeff)
            .mul_atom(&contraction_atom(j, e, f))
            .scale(&scale);
        out.add_coeff_term(mono, &coeff);
    };

    // S-mode contractions: (0,0), and (0,1)/(1,0) when max = 1.
    let b_k1_flat: Vec<u32> = pb.k1.values().flatten().copied().collect();
    let a_k1_flat: Vec<u32> = pa.k1.values().flatten().copied().collect();
    for &ia in &pa.k0 {
        for &ib in &pb.k0 {
            for &j in &s_modes {
                emit(&mut out, &pa.terms[ia as usize], &pb.terms[ib as usize], j);
            }
        }
        if max_non_s >= 1 {
            for &ib in &b_k1_flat {
                for &j in &s_modes {
                    emit(&mut out, &pa.terms[ia as usize], &pb.terms[ib as usize], j);
                }
            }
        }
    }
    if max_non_s >= 1 {
        for &ia in &a_k1_flat {
            for &ib in &pb.k0 {
                for &j in &s_modes {
                    emit(&mut out, &pa.terms[ia as usize], &pb.terms[ib as usize], j);
                }
            }
        }
    }

    // Matched contractions at a non-S mode v of the A factor.
    for (&v, a_list) in &pa.k1 {
        // (1,1) → all-S
        if let Some(b_list) = pb.k1.get(&-v) {
            for &ia in a_list {
                for &ib in b_list {
                    emit(&mut out, &pa.terms[ia as usize], &pb.terms[ib as usize], v);
                }
            }
        }
        // (1,2) → one non-S survivor
        if max_non_s >= 1 {
            if let Some(b_list) = pb.k2.get(&-v) {
                for &ia in a_list {
                    for &ib in b_list {
                        emit(&mut out, &pa.terms[ia as usize], &pb.terms[ib as usize], v);
                    }
                }
            }
        }
    }
    if max_non_s >= 1 {
        // (2,1): the B factor's single non-S mode u matches a non-S
        // mode −u of a two-non-S A factor; contraction at j = −u.
        for (&u, b_list) in &pb.k1 {
            if let Some(a_list) = pa.k2.get(&-u) {
                for &ia in a_list {
                    for &ib in b_list {
                        emit(&mut out, &pa.terms[ia as usize], &pb.terms[ib as usize], -u);
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Normal-form coefficients
// ---------------------------------------------------------------------

/// A real normal-form coefficient rat·π^pi_pow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormCoeff {
    pub rat: BigRational,
    pub pi_pow: i32,
}

impl NormalFormCoeff {
    pub fn value(&self) -> f64 {
        self.rat.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(self.pi_pow)
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero()
    }
}

/// An action-monomial projection together with its coefficient ladder
/// c_m on |z_{n₁}|^{2(h−m)}|z_{n₂}|^{2m}, m = 0…h.
#[derive(Debug, Clone)]
pub struct NormalFormProjection {
    pub poly: HamiltonianPoly,
    pub coeffs: Vec<NormalFormCoeff>,
}

fn read_action_ladder(
    proj: &HamiltonianPoly,
    half_degree: u8,
    expected_pi: i32,
) -> Result<Vec<NormalFormCoeff>> {
    let mut out = Vec::new();
    for m in 0..=half_degree {
        let mono = Monomial::action(&proj.s, half_degree - m, m);
        let (rat, pi) = match proj.get(&mono) {
            None => (BigRational::zero(), expected_pi),
            Some(c) => {
                let (rat, pi) = c.as_real_pi()?;
                if !rat.is_zero() && pi != expected_pi {
                    return Err(Error::Verification(format!(
                        "unexpected π-power {pi} (expected {expected_pi}) at ladder index {m}"
                    )));
                }
                (rat, expected_pi)
            }
        };
        out.push(NormalFormCoeff { rat, pi_pow: pi });
    }
    Ok(out)
}

fn action_projection(all_s: HamiltonianPoly) -> HamiltonianPoly {
    let mut out = HamiltonianPoly::new(all_s.s, all_s.j_max);
    for (m, c) in all_s.terms() {
        if m.is_action() {
            out.add_coeff_term(m.clone(), c);
        }
    }
    out
}

/// R̄: the action part of the all-S projection of {Ḡ + Ĝ + ½G̃, F},
/// returned as the ladder R₀…R₅ on |z_{n₁}|^{2(5−m)}|z_{n₂}|^{2m}.
/// Ĝ is dropped structurally (≥ 3 non-S components cannot reach an
/// all-S monomial in one contraction); [`bracket_project`] documents and
/// enforces the skip.
pub fn compute_rbar(
    g_bar: &HamiltonianPoly,
    g_tilde: &HamiltonianPoly,
    f: &HamiltonianPoly,
) -> Result<NormalFormProjection> {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let one = BigRational::from_integer(BigInt::from(1));
    let all_s = bracket_project(
        &[(g_bar, one.clone()), (g_tilde, half)],
        &[(f, one)],
        0,
    )?;
    let poly = action_projection(all_s);
    poly.check_momentum()?;
    poly.check_reality()?;
    let coeffs = read_action_ladder(&poly, 5, -4)?;
    Ok(NormalFormProjection { poly, coeffs })
}

/// T̄: the action part of the all-S projection of
/// {{½(Ḡ+Ĝ) + ⅓G̃, F}, F}, as the ladder T₀…T₇ on
/// |z_{n₁}|^{2(7−m)}|z_{n₂}|^{2m}. The inner bracket is projected onto
/// monomials with ≤ 1 non-S component — the only ones the outer
/// contraction can bring to all-S — and Ĝ again drops structurally.
pub fn compute_tbar(
    g_bar: &HamiltonianPoly,
    g_tilde: &HamiltonianPoly,
    f: &HamiltonianPoly,
) -> Result<NormalFormProjection> {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    let one = BigRational::from_integer(BigInt::from(1));
    let inner = bracket_project(
        &[(g_bar, half), (g_tilde, third)],
        &[(f, one.clone())],
        1,
    )?;
    let all_s = bracket_project(&[(&inner, one.clone())], &[(f, one)], 0)?;
    let poly = action_projection(all_s);
    poly.check_momentum()?;
    poly.check_reality()?;
    let coeffs = read_action_ladder(&poly, 7, -6)?;
    Ok(NormalFormProjection { poly, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use num_traits::One;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn atom_algebra_folds_relations() {
        // i · i = −1
        let i1 = CoeffAtom::imaginary(BigRational::one());
        let m = i1.mul(&i1);
        assert_eq!(m.i_par, 0);
        assert_eq!(m.rat, rat(-1, 1));
        // δ_a · δ_a = a/(1+a²)
        let da = CoeffAtom {
            rat: BigRational::one(),
            pi_pow: 0,
            i_par: 0,
            delta_odd: smallvec::smallvec![3],
        };
        let dd = da.mul(&da);
        assert!(dd.delta_odd.is_empty());
        assert_eq!(dd.rat, rat(3, 10));
        // structural zero
        let mut c = SymbolicCoefficient::from_atom(da.clone());
        let mut neg = da;
        neg.rat = -neg.rat;
        c.add_atom(neg);
        assert!(c.is_zero());
    }

    #[test]
    fn monomial_basics() {
        let m = Monomial::from_pairs(&[(3, 1), (-3, 2), (7, 1)]);
        assert_eq!(m.degree(), 4);
        assert_eq!(m.momentum(), 3 - 6 + 7);
        assert_eq!(m.exp(-3), 2);
        assert_eq!(m.flip().exp(3), 2);
        let s = TangentialSet::new(3, 7).unwrap();
        assert_eq!(m.non_s_count(&s), 0);
        let act = Monomial::action(&s, 2, 1);
        assert!(act.is_action());
        assert_eq!(act.degree(), 6);
        assert!(!m.is_action());
    }

    fn singleton(s: TangentialSet, j_max: usize, m: Monomial) -> HamiltonianPoly {
        let mut p = HamiltonianPoly::new(s, j_max);
        p.add_atom_term(m, CoeffAtom::rational(BigRational::one()));
        p
    }

    #[test]
    fn lambda_bracket_examples() {
        let s = TangentialSet::new(50, 2500).unwrap();
        let lam = lambda_poly(s, 12_500);
        // {Λ, Λ} = 0
        assert!(poisson_bracket(&lam, &lam).unwrap().is_zero());
        // {Λ, |z_a|²} = 0
        let act = singleton(s, 12_500, Monomial::from_pairs(&[(17, 1), (-17, 1)]));
        assert!(poisson_bracket(&lam, &act).unwrap().is_zero());
        // {Λ, m} = −i · (Σλ) · m on an explicit non-normal monomial
        let t = IndexTuple::new(vec![50, 50, 50, 50, -2500, 2300]).unwrap();
        let mono = Monomial::from_tuple(&t);
        let p = singleton(s, 12_500, mono.clone());
        let br = poisson_bracket(&lam, &p).unwrap();
        assert_eq!(br.len(), 1);
        let c = br.get(&mono).unwrap();
        let d = divisor(&t);
        assert!(!d.is_zero());
        let expected = SymbolicCoefficient::from_atom(CoeffAtom::imaginary(-d));
        assert_eq!(*c, expected);
    }

    fn random_poly(
        rng: &mut rand_chacha::ChaCha8Rng,
        s: TangentialSet,
        j_max: usize,
        terms: usize,
        degree: usize,
    ) -> HamiltonianPoly {
        let mut p = HamiltonianPoly::new(s, j_max);
        for _ in 0..terms {
            let pairs: Vec<(Mode, u8)> = (0..degree)
                .map(|_| {
                    let v = rng.gen_range(1..=j_max as i64);
                    (if rng.gen_bool(0.5) { v } else { -v }, 1)
                })
                .collect();
            let atom = CoeffAtom {
                rat: rat(rng.gen_range(-6..=6), rng.gen_range(1..=4)),
                pi_pow: rng.gen_range(-2..=2),
                i_par: rng.gen_range(0..=1),
                delta_odd: if rng.gen_bool(0.5) {
                    smallvec::smallvec![rng.gen_range(1..=5)]
                } else {
                    DeltaSet::new()
                },
            };
            p.add_atom_term(Monomial::from_pairs(&pairs), atom);
        }
        p
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_leibniz() {
        let s = TangentialSet::new(2, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let a = random_poly(&mut rng, s, 6, 4, 2);
            let b = random_poly(&mut rng, s, 6, 4, 2);
            let c = random_poly(&mut rng, s, 6, 3, 2);
            // antisymmetry
            let mut anti = poisson_bracket(&a, &b).unwrap();
            anti.add_poly(&poisson_bracket(&b, &a).unwrap());
            assert!(anti.is_zero(), "{{A,B}} + {{B,A}} ≠ 0");
            // Leibniz: {A, BC} = {A,B}C + B{A,C}
            let bc = poly_mul(&b, &c).unwrap();
            let lhs = poisson_bracket(&a, &bc).unwrap();
            let mut rhs = poly_mul(&poisson_bracket(&a, &b).unwrap(), &c).unwrap();
            rhs.add_poly(&poly_mul(&b, &poisson_bracket(&a, &c).unwrap()).unwrap());
            let mut diff = lhs;
            diff.add_poly(&rhs.scaled(&rat(-1, 1)));
            assert!(diff.is_zero(), "Leibniz violated");
        }
    }

    #[test]
    fn bracket_grading() {
        let s = TangentialSet::new(2, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = random_poly(&mut rng, s, 6, 5, 4);
        let b = random_poly(&mut rng, s, 6, 5, 2);
        let br = poisson_bracket(&a, &b).unwrap();
        for (m, _) in br.terms() {
            assert_eq!(m.degree(), 4 + 2 - 2);
        }
    }

    #[test]
    fn g_bar_closed_forms_at_headline_config() {
        let s = TangentialSet::new(50, 2500).unwrap();
        let parts = build_g_parts(s, 12_500, None, false).unwrap();
        let gb = &parts.g_bar;
        let n1 = 50i64;
        let n2 = 2500i64;
        // 1/(6π²) · n³/(1+n²)³ |z_n|⁶ for n = n₁, n₂
        for n in [n1, n2] {
            let mono = Monomial::from_pairs(&[(n, 3), (-n, 3)]);
            let (r, pi) = gb.get(&mono).unwrap().as_real_pi().unwrap();
            assert_eq!(pi, -2);
            let expected = rat(1, 6) * rat(n, 1 + n * n).pow(3);
            assert_eq!(r, expected);
        }
        // 3/(2π²) · n₁²n₂/((1+n₁²)²(1+n₂²)) |z_{n₁}|⁴|z_{n₂}|² and swap
        let mono = Monomial::from_pairs(&[(n1, 2), (-n1, 2), (n2, 1), (-n2, 1)]);
        let (r, _) = gb.get(&mono).unwrap().as_real_pi().unwrap();
        assert_eq!(r, rat(3, 2) * rat(n1, 1 + n1 * n1).pow(2) * rat(n2, 1 + n2 * n2));
        let mono = Monomial::from_pairs(&[(n1, 1), (-n1, 1), (n2, 2), (-n2, 2)]);
        let (r, _) = gb.get(&mono).unwrap().as_real_pi().unwrap();
        assert_eq!(r, rat(3, 2) * rat(n1, 1 + n1 * n1) * rat(n2, 1 + n2 * n2).pow(2));
        // j-families for 20 values of j
        let js: Vec<i64> = vec![1, 2, 3, 5, 10, 49, 51, 100, 500, 1000, 2000, 2499, 2501, 3000,
            5000, 8000, 10_000, 12_000, 12_499, 12_500];
        for &j in &js {
            assert!(j != n1 && j != n2);
            // 3/(2π²) · λ_j · n²/(1+n²)² |z_n|⁴|z_j|²
            for n in [n1, n2] {
                let mono = Monomial::from_pairs(&[(n, 2), (-n, 2), (j, 1), (-j, 1)]);
                let (r, pi) = gb.get(&mono).unwrap().as_real_pi().unwrap();
                assert_eq!(pi, -2);
                assert_eq!(r, rat(3, 2) * rat(j, 1 + j * j) * rat(n, 1 + n * n).pow(2));
            }
            // 6/π² · n₁n₂j/((1+n₁²)(1+n₂²)(1+j²)) |z_{n₁}|²|z_{n₂}|²|z_j|²
            let mono =
                Monomial::from_pairs(&[(n1, 1), (-n1, 1), (n2, 1), (-n2, 1), (j, 1), (-j, 1)]);
            let (r, _) = gb.get(&mono).unwrap().as_real_pi().unwrap();
            assert_eq!(
                r,
                rat(6, 1) * rat(n1, 1 + n1 * n1) * rat(n2, 1 + n2 * n2) * rat(j, 1 + j * j)
            );
        }
        gb.check_reality().unwrap();
        gb.check_momentum().unwrap();
    }

    #[test]
    fn g_total_matches_spectral_sextic_energy() {
        // The full sextic polynomial evaluated at a band-limited real
        // state equals the quadrature sextic energy (1/30)∫u⁶.
        let s = TangentialSet::new(2, 5).unwrap();
        let parts = build_g_parts(s, 8, None, true).unwrap();
        let g = parts.total().unwrap();
        g.check_reality().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let mut st = SpectralState::zeros(8);
            for j in 1..=8i64 {
                let v = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                st.set(j, v);
                st.set(-j, v.conj());
            }
            let via_poly = g.eval(&st);
            let via_grid = crate::spectral_core::energy(&st).sextic;
            assert_abs_diff_eq!(via_poly.re, via_grid, epsilon = 1e-12);
            assert_abs_diff_eq!(via_poly.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lambda_poly_matches_quadratic_energy() {
        let s = TangentialSet::new(2, 5).unwrap();
        let lam = lambda_poly(s, 8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut st = SpectralState::zeros(8);
        for j in 1..=8i64 {
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            st.set(j, v);
            st.set(-j, v.conj());
        }
        let via_poly = lam.eval(&st);
        let via_sum = crate::spectral_core::energy(&st).quadratic;
        assert_abs_diff_eq!(via_poly.re, via_sum, epsilon = 1e-12);
        assert_abs_diff_eq!(via_poly.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn homological_identity_small_configs() {
        // (2,5) is not usable here: λ₁ − 2λ₂ + λ₃ = 0 exactly, and the
        // resonant tuple (1,−2,−2,3,5,−5) has only two non-S components
        // relative to {±2,±5}, so it sits on G̃'s support and build_f6
        // correctly refuses. (3,7) pushes that pattern into Δ₃.
        for (n1, n2, jm) in [(3i64, 7i64, 8usize), (3, 7, 35)] {
            let s = TangentialSet::new(n1, n2).unwrap();
            let parts = build_g_parts(s, jm, None, false).unwrap();
            let f = build_f6(&parts.g_tilde).unwrap();
            f.check_reality().unwrap();
            let lam = lambda_poly(s, jm);
            let r = homological_residual(&lam, &parts.g_tilde, &f).unwrap();
            assert!(r.is_zero(), "residual has {} terms at ({n1},{n2})", r.len());
        }
    }

    #[test]
    fn homological_identity_single_and_empty() {
        let s = TangentialSet::new(3, 7).unwrap();
        let lam = lambda_poly(s, 35);
        // single monomial
        let t = IndexTuple::new(vec![3, 3, -7, 9, -3, -5]).unwrap();
        assert_eq!(t.momentum(), 0);
        let mut g1 = HamiltonianPoly::new(s, 35);
        g1.add_atom_term(Monomial::from_tuple(&t), g_atom(&t, t.multiplicity()));
        let f1 = build_f6(&g1).unwrap();
        assert!(homological_residual(&lam, &g1, &f1).unwrap().is_zero());
        // empty
        let g0 = HamiltonianPoly::new(s, 35);
        let f0 = build_f6(&g0).unwrap();
        assert!(homological_residual(&lam, &g0, &f0).unwrap().is_zero());
    }

    #[test]
    fn f6_aborts_on_zero_divisor() {
        let s = TangentialSet::new(50, 2500).unwrap();
        let t = IndexTuple::new(vec![1, -2, -2, 3, 7, -7]).unwrap();
        let mut g = HamiltonianPoly::new(s, 2500);
        g.add_atom_term(Monomial::from_tuple(&t), g_atom(&t, t.multiplicity()));
        assert!(matches!(build_f6(&g), Err(Error::Verification(_))));
    }

    #[test]
    fn rbar_tbar_zero_for_empty_g_tilde() {
        let s = TangentialSet::new(50, 2500).unwrap();
        let parts = build_g_parts(s, 2500, None, false).unwrap();
        let empty = HamiltonianPoly::new(s, 2500);
        let f = build_f6(&empty).unwrap();
        let r = compute_rbar(&parts.g_bar, &empty, &f).unwrap();
        assert!(r.coeffs.iter().all(|c| c.is_zero()));
        let t = compute_tbar(&parts.g_bar, &empty, &f).unwrap();
        assert!(t.coeffs.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn ghat_cannot_reach_projections() {
        // Including Ĝ in the projected brackets changes nothing: each
        // factor loses at most one non-S component per contraction.
        let s = TangentialSet::new(3, 7).unwrap();
        let parts = build_g_parts(s, 8, None, true).unwrap();
        let f = build_f6(&parts.g_tilde).unwrap();
        let hat = parts.g_hat.as_ref().unwrap();
        assert!(hat.len() > 0);
        let one = BigRational::one();
        let half = rat(1, 2);
        let with_hat = bracket_project(
            &[(&parts.g_bar, one.clone()), (hat, one.clone()), (&parts.g_tilde, half.clone())],
            &[(&f, one.clone())],
            0,
        )
        .unwrap();
        let without = bracket_project(
            &[(&parts.g_bar, one.clone()), (&parts.g_tilde, half)],
            &[(&f, one)],
            0,
        )
        .unwrap();
        let mut diff = with_hat;
        diff.add_poly(&without.scaled(&rat(-1, 1)));
        assert!(diff.is_zero());
    }

    #[test]
    fn projected_bracket_agrees_with_generic_bracket() {
        // Exhaustive cross-check of the bucketed pair-class enumeration
        // against the plain bracket, at a scale where the full
        // polynomial fits comfortably.
        let s = TangentialSet::new(3, 7).unwrap();
        let parts = build_g_parts(s, 8, None, true).unwrap();
        let f = build_f6(&parts.g_tilde).unwrap();
        let one = BigRational::one();
        let half = rat(1, 2);
        // A = Ḡ + Ĝ + ½ G̃ materialized
        let mut a = parts.g_bar.clone();
        a.add_poly(parts.g_hat.as_ref().unwrap());
        a.add_poly(&parts.g_tilde.scaled(&half));
        let full = poisson_bracket(&a, &f).unwrap();
        for max in [0usize, 1] {
            let fast = bracket_project(
                &[
                    (&parts.g_bar, one.clone()),
                    (parts.g_hat.as_ref().unwrap(), one.clone()),
                    (&parts.g_tilde, half.clone()),
                ],
                &[(&f, one.clone())],
                max,
            )
            .unwrap();
            let mut slow = HamiltonianPoly::new(s, 8);
            for (m, c) in full.terms() {
                if m.non_s_count(&s) <= max {
                    slow.add_coeff_term(m.clone(), c);
                }
            }
            let mut diff = fast.clone();
            diff.add_poly(&slow.scaled(&rat(-1, 1)));
            assert!(diff.is_zero(), "projection mismatch at max = {max}");
        }
    }

    #[test]
    fn rbar_tbar_real_at_small_config() {
        let s = TangentialSet::new(3, 7).unwrap();
        let parts = build_g_parts(s, 35, None, false).unwrap();
        let f = build_f6(&parts.g_tilde).unwrap();
        let r = compute_rbar(&parts.g_bar, &parts.g_tilde, &f).unwrap();
        assert_eq!(r.coeffs.len(), 6);
        for c in &r.coeffs {
            assert_eq!(c.pi_pow, -4);
        }
        assert!(r.coeffs.iter().any(|c| !c.is_zero()));
        let t = compute_tbar(&parts.g_bar, &parts.g_tilde, &f).unwrap();
        assert_eq!(t.coeffs.len(), 8);
        for c in &t.coeffs {
            assert_eq!(c.pi_pow, -6);
        }
        assert!(t.coeffs.iter().any(|c| !c.is_zero()));
    }
}
