//! The end-to-end verification suite: ten numbered criteria covering
//! resonance structure, divisor positivity, the exact normal-form
//! identities, frequency-map nondegeneracy, integrator physics, and the
//! frequency-shift experiment.
//!
//! Each criterion is a self-contained check returning a
//! [`CriterionOutcome`] with a pass flag and a human-readable detail
//! line; internal errors are reported as failures rather than panics so
//! a broken build surfaces as an explicit FAIL. The expensive shared
//! inputs (the full-scale normal form at S = (50, 2500) and the reduced
//! one at S = (3, 7)) are built once per process and reused.

use std::collections::HashMap;
use std::fmt::Write as FmtWrite;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::divisor_analysis::{divisor, survey_min_divisor, tail_certificate, DivisorReport};
use crate::dynamics::{
    evolve, frequency_experiment, initial_torus_state, integrate, IntegratorKind, SimConfig,
};
use crate::index_sets::{enumerate_admissible, IndexTuple, TangentialSet, TupleClass};
use crate::kam_check::{
    derive_frequency_model, det_leading_closed_form, grid_points, jacobian_det, omega0,
    verify_assumptions, FrequencyModel,
};
use crate::normal_form::{
    build_f6, build_g_parts, compute_rbar, compute_tbar, homological_residual, lambda_poly,
    CoeffAtom, GParts, HamiltonianPoly, Monomial, NormalFormProjection, SymbolicCoefficient,
};
use crate::spectral_core::{lambda_f64, Mode, SpectralState};
use crate::{Error, Result};

/// Result of one verification criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// The full verification document emitted by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyAllDoc {
    pub criteria: Vec<CriterionOutcome>,
    pub all_pass: bool,
}

fn outcome(id: u8, name: &str, r: Result<(bool, String)>) -> CriterionOutcome {
    match r {
        Ok((pass, detail)) => CriterionOutcome { id, name: name.to_string(), pass, detail },
        Err(e) => CriterionOutcome {
            id,
            name: name.to_string(),
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

// ---------------------------------------------------------------------
// Shared normal-form bundles
// ---------------------------------------------------------------------

/// Everything the frequency-map criteria consume, built once.
pub struct NormalFormBundle {
    pub s: TangentialSet,
    pub j_max: usize,
    pub parts: GParts,
    pub f6: HamiltonianPoly,
    pub rbar: NormalFormProjection,
    pub tbar: NormalFormProjection,
    pub model: FrequencyModel,
}

fn build_bundle(n1: Mode, n2: Mode) -> Result<NormalFormBundle> {
    let s = TangentialSet::new(n1, n2)?;
    let j_max = 5 * n2 as usize;
    let parts = build_g_parts(s, j_max, None, false)?;
    let f6 = build_f6(&parts.g_tilde)?;
    let rbar = compute_rbar(&parts.g_bar, &parts.g_tilde, &f6)?;
    let tbar = compute_tbar(&parts.g_bar, &parts.g_tilde, &f6)?;
    let model = derive_frequency_model(&parts.g_bar, &rbar, &tbar)?;
    Ok(NormalFormBundle { s, j_max, parts, f6, rbar, tbar, model })
}

/// The full-scale configuration S = (50, 2500), J_max = 12500.
pub fn headline_bundle() -> Result<&'static NormalFormBundle> {
    static CELL: OnceLock<std::result::Result<NormalFormBundle, String>> = OnceLock::new();
    CELL.get_or_init(|| build_bundle(50, 2500).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Verification(format!("full-scale normal form failed to build: {e}")))
}

/// The reduced configuration S = (3, 7), J_max = 35 used by the oracle
/// comparison.
pub fn reduced_bundle() -> Result<&'static NormalFormBundle> {
    static CELL: OnceLock<std::result::Result<NormalFormBundle, String>> = OnceLock::new();
    CELL.get_or_init(|| build_bundle(3, 7).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Verification(format!("reduced normal form failed to build: {e}")))
}

// ---------------------------------------------------------------------
// Criterion 1: exact resonance family
// ---------------------------------------------------------------------

/// The divisor of (1, −2, −2, 3, n, −n) vanishes identically for every
/// n — the exact resonance that forces the order-6 normal form to keep
/// its Δ₂ pairing terms at S-configurations containing modes 1..3.
pub fn criterion_1() -> CriterionOutcome {
    outcome(1, "exact resonance family", (|| {
        for n in 4..=100i64 {
            let t = IndexTuple::new(vec![1, -2, -2, 3, n, -n])?;
            let d = divisor(&t);
            if !d.is_zero() {
                return Ok((false, format!("divisor nonzero at n = {n}: {d}")));
            }
        }
        Ok((
            true,
            "divisor(1,−2,−2,3,n,−n) is the exact rational zero for all n ∈ {4,…,100}".into(),
        ))
    })())
}

// ---------------------------------------------------------------------
// Criterion 2: order-6 divisor positivity + tail certificate
// ---------------------------------------------------------------------

fn min_divisor_value(rep: &DivisorReport) -> f64 {
    rep.min_abs_divisor
        .as_ref()
        .map(|r| crate::normal_form::NormalFormCoeff { rat: r.clone(), pi_pow: 0 }.value())
        .unwrap_or(f64::NAN)
}

/// Exhaustive order-6 survey over (Δ₀∪Δ₁∪Δ₂)∖N at S = (50, 2500) with
/// non-S entries |j| ≤ 12500: no exact zeros, a positive minimum, and
/// the analytic tail certificate extends positivity to all larger |j|
/// (every certified margin exceeds the 1/J_tail comparison scale).
pub fn criterion_2() -> CriterionOutcome {
    outcome(2, "order-6 divisor positivity with tail certificate", (|| {
        let s = TangentialSet::new(50, 2500)?;
        let j_max = 12_500usize;
        let labels = [TupleClass::Delta0, TupleClass::Delta1, TupleClass::Delta2];
        let rep = survey_min_divisor(6, &labels, &s, j_max, None)?;
        let zero_free = rep.zero_divisor_tuples.is_empty();
        let min = rep
            .min_abs_divisor
            .clone()
            .ok_or_else(|| Error::Verification("order-6 survey found no tuples".into()))?;
        let min_pos = min > BigRational::zero();
        let tail = tail_certificate(6, &s, j_max)?;
        let min_margin = tail
            .checks
            .iter()
            .map(|c| c.margin.clone())
            .min()
            .ok_or_else(|| Error::Verification("tail certificate has no checks".into()))?;
        let one_over_jtail = BigRational::new(BigInt::from(1), BigInt::from(j_max as i64));
        let tail_scale_ok = one_over_jtail < min_margin;
        let pass = zero_free && min_pos && tail.all_hold && tail_scale_ok;
        let mut d = String::new();
        let _ = write!(
            d,
            "{} tuples checked, zero divisors: {}, min |divisor| = {:.6e} at {:?}; \
             tail checks: {} all holding, min margin {:.6e} vs 1/J_tail = {:.6e}; \
             case-(i1) pattern matched {} times with {} bound violations",
            rep.tuples_checked,
            rep.zero_divisor_tuples.len(),
            min_divisor_value(&rep),
            rep.witness.as_ref().map(|w| w.entries().to_vec()).unwrap_or_default(),
            tail.checks.len(),
            crate::normal_form::NormalFormCoeff { rat: min_margin, pi_pow: 0 }.value(),
            1.0 / j_max as f64,
            rep.case_i1_matched,
            rep.case_i1_violations.len(),
        );
        Ok((pass, d))
    })())
}

// ---------------------------------------------------------------------
// Criterion 3: order-10/14 divisor positivity and all-S emptiness
// ---------------------------------------------------------------------

/// Orders 10 and 14 at S = (50, 2500): the (Δ′₀∪Δ′₁)∖N′ and Δ″₀∖N″
/// searches find no exact zeros, and the all-S strata contain nothing
/// but normal pairings (the removable all-S sets are empty).
pub fn criterion_3() -> CriterionOutcome {
    outcome(3, "order-10/14 divisor positivity and all-S emptiness", (|| {
        let s = TangentialSet::new(50, 2500)?;
        // The single non-S entry of a Δ′₁ tuple is determined by
        // momentum, hence |j| ≤ 9·n₂; this window is exhaustive.
        let rep10 = survey_min_divisor(
            10,
            &[TupleClass::Delta0Prime, TupleClass::Delta1Prime],
            &s,
            9 * 2500,
            None,
        )?;
        let rep14 =
            survey_min_divisor(14, &[TupleClass::Delta0DoublePrime], &s, 2500, None)?;
        let all_s_10 = enumerate_admissible(10, &s, 2500, &[TupleClass::Delta0Prime], None)?;
        let all_s_14 =
            enumerate_admissible(14, &s, 2500, &[TupleClass::Delta0DoublePrime], None)?;
        let nonpairing_10 = all_s_10.iter().filter(|e| !e.tuple.is_normal_pairing()).count();
        let nonpairing_14 = all_s_14.iter().filter(|e| !e.tuple.is_normal_pairing()).count();
        let pass = rep10.zero_divisor_tuples.is_empty()
            && rep14.zero_divisor_tuples.is_empty()
            && nonpairing_10 == 0
            && nonpairing_14 == 0;
        let d = format!(
            "order 10: {} tuples, {} zero divisors, min {:.6e}; order 14: {} tuples, {} zero \
             divisors; all-S strata: {} order-10 and {} order-14 tuples enumerated, all normal \
             pairings ({} + {} non-pairing)",
            rep10.tuples_checked,
            rep10.zero_divisor_tuples.len(),
            min_divisor_value(&rep10),
            rep14.tuples_checked,
            rep14.zero_divisor_tuples.len(),
            all_s_10.len(),
            all_s_14.len(),
            nonpairing_10,
            nonpairing_14,
        );
        Ok((pass, d))
    })())
}

// ---------------------------------------------------------------------
// Criterion 4: exact homological cancellation
// ---------------------------------------------------------------------

/// G̃ + {Λ, F₆} is the exact zero polynomial at full scale — every
/// coefficient cancels structurally in the π-rational algebra.
pub fn criterion_4() -> CriterionOutcome {
    outcome(4, "exact homological cancellation", (|| {
        let b = headline_bundle()?;
        let lam = lambda_poly(b.s, b.j_max);
        let resid = homological_residual(&lam, &b.parts.g_tilde, &b.f6)?;
        let pass = resid.is_zero();
        let d = format!(
            "G̃ has {} monomials, F has {}, residual G̃ + {{Λ, F}} has {} (exact zero: {})",
            b.parts.g_tilde.len(),
            b.f6.len(),
            resid.len(),
            pass,
        );
        Ok((pass, d))
    })())
}

// ---------------------------------------------------------------------
// Criterion 5: pairing sextic closed-form families
// ---------------------------------------------------------------------

fn birat(n: i128, d: i128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact coefficient of an action monomial of Ḡ as (rational, π-power).
fn gbar_coeff(g: &HamiltonianPoly, pairs: &[(Mode, u8)]) -> Result<(BigRational, i32)> {
    let mono = Monomial::from_pairs(pairs);
    match g.get(&mono) {
        None => Err(Error::Verification(format!("Ḡ is missing the family member {pairs:?}"))),
        Some(c) => c.as_real_pi(),
    }
}

fn expect_exact(
    got: (BigRational, i32),
    want: BigRational,
    what: &str,
) -> std::result::Result<(), String> {
    if got.0 == want && got.1 == -2 {
        Ok(())
    } else {
        Err(format!("{what}: engine {:?}·π^{}, closed form {:?}·π⁻²", got.0, got.1, want))
    }
}

/// The four displayed coefficient families of Ḡ at S = (50, 2500) match
/// their closed forms exactly: a_l |z_{n_l}|⁶ with a_l = n_l³/(6π²(1+n_l²)³),
/// the mixed tangential families b₁/b₂, and the two j-dependent normal
/// families (checked at 20 normal modes j).
pub fn criterion_5() -> CriterionOutcome {
    outcome(5, "pairing sextic closed-form families", (|| {
        let b = headline_bundle()?;
        let g = &b.parts.g_bar;
        let (n1, n2) = (50i128, 2500i128);
        let (q1, q2) = (1 + n1 * n1, 1 + n2 * n2);
        let (m1, m2) = (b.s.n1(), b.s.n2());
        let mut checks = 0usize;

        // |z_{n_l}|⁶ family: n_l³/(6(1+n_l²)³)·π⁻²
        expect_exact(
            gbar_coeff(g, &[(m1, 3), (-m1, 3)])?,
            birat(n1.pow(3), 6 * q1.pow(3)),
            "a1 = coeff(|z_n1|^6)",
        )
        .map_err(Error::Verification)?;
        expect_exact(
            gbar_coeff(g, &[(m2, 3), (-m2, 3)])?,
            birat(n2.pow(3), 6 * q2.pow(3)),
            "a2 = coeff(|z_n2|^6)",
        )
        .map_err(Error::Verification)?;
        checks += 2;

        // |z_{n₁}|⁴|z_{n₂}|² family: 3n₁²n₂/(2(1+n₁²)²(1+n₂²))·π⁻², and mirror
        expect_exact(
            gbar_coeff(g, &[(m1, 2), (-m1, 2), (m2, 1), (-m2, 1)])?,
            birat(3 * n1 * n1 * n2, 2 * q1 * q1 * q2),
            "b1 = coeff(|z_n1|^4 |z_n2|^2)",
        )
        .map_err(Error::Verification)?;
        expect_exact(
            gbar_coeff(g, &[(m1, 1), (-m1, 1), (m2, 2), (-m2, 2)])?,
            birat(3 * n1 * n2 * n2, 2 * q1 * q2 * q2),
            "b2 = coeff(|z_n1|^2 |z_n2|^4)",
        )
        .map_err(Error::Verification)?;
        checks += 2;

        // j-dependent families at 20 normal modes.
        let js: Vec<Mode> =
            (1..=17).chain([100, 1000, 12_500]).filter(|&j| !b.s.contains(j)).collect();
        if js.len() != 20 {
            return Err(Error::Verification(format!("expected 20 probe modes, got {}", js.len())));
        }
        for &j in &js {
            let jq = 1 + (j as i128) * (j as i128);
            // |z_{n_l}|⁴|z_j|²: 3n_l²j/(2(1+n_l²)²(1+j²))·π⁻²
            expect_exact(
                gbar_coeff(g, &[(m1, 2), (-m1, 2), (j, 1), (-j, 1)])?,
                birat(3 * n1 * n1 * j as i128, 2 * q1 * q1 * jq),
                &format!("coeff(|z_n1|^4 |z_{j}|^2)"),
            )
            .map_err(Error::Verification)?;
            expect_exact(
                gbar_coeff(g, &[(m2, 2), (-m2, 2), (j, 1), (-j, 1)])?,
                birat(3 * n2 * n2 * j as i128, 2 * q2 * q2 * jq),
                &format!("coeff(|z_n2|^4 |z_{j}|^2)"),
            )
            .map_err(Error::Verification)?;
            // |z_{n₁}|²|z_{n₂}|²|z_j|²: 6n₁n₂j/((1+n₁²)(1+n₂²)(1+j²))·π⁻²
            expect_exact(
                gbar_coeff(g, &[(m1, 1), (-m1, 1), (m2, 1), (-m2, 1), (j, 1), (-j, 1)])?,
                birat(6 * n1 * n2 * j as i128, q1 * q2 * jq),
                &format!("coeff(|z_n1|^2 |z_n2|^2 |z_{j}|^2)"),
            )
            .map_err(Error::Verification)?;
            checks += 3;
        }
        Ok((
            true,
            format!(
                "{checks} exact coefficient identities verified across the four families \
                 (a₁/a₂, b₁/b₂, and both j-dependent families at {} normal modes)",
                js.len()
            ),
        ))
    })())
}

// ---------------------------------------------------------------------
// Criterion 6: ladder reality and the blind contraction oracle
// ---------------------------------------------------------------------

/// (m1 · m2) / (z_j z_{−j}), computed through the flat entry lists —
/// deliberately independent of the engine's contraction routine.
fn oracle_contract(ma: &Monomial, mb: &Monomial, j: Mode) -> Monomial {
    let mut entries = ma.to_entries();
    entries.extend(mb.to_entries());
    let pos = entries.iter().position(|&x| x == j).expect("contracted mode present");
    entries.swap_remove(pos);
    let pos = entries.iter().position(|&x| x == -j).expect("conjugate mode present");
    entries.swap_remove(pos);
    let pairs: Vec<(Mode, u8)> = entries.iter().map(|&m| (m, 1)).collect();
    Monomial::from_pairs(&pairs)
}

/// Brute-force bracket {A, B} = i Σ_j sgn(j)(∂A/∂z_j)(∂B/∂z_{−j}),
/// enumerated pair by pair with no stratum bucketing; only monomials
/// accepted by `keep` are accumulated. This is the oracle the projected
/// production bracket is validated against.
fn brute_bracket<F>(
    a: &HamiltonianPoly,
    b: &HamiltonianPoly,
    keep: F,
) -> HashMap<Monomial, SymbolicCoefficient>
where
    F: Fn(&Monomial) -> bool + Sync,
{
    let a_terms: Vec<(&Monomial, &SymbolicCoefficient)> = a.terms().collect();
    let b_terms: Vec<(&Monomial, &SymbolicCoefficient)> = b.terms().collect();
    a_terms
        .par_chunks(64)
        .map(|chunk| {
            let mut out: HashMap<Monomial, SymbolicCoefficient> = HashMap::new();
            for (ma, ca) in chunk {
                for (mb, cb) in &b_terms {
                    for &(j, e) in ma.pairs() {
                        let f = mb.exp(-j);
                        if f == 0 {
                            continue;
                        }
                        let mono = oracle_contract(ma, mb, j);
                        if !keep(&mono) {
                            continue;
                        }
                        let w = BigRational::from_integer(BigInt::from(
                            j.signum() * e as i64 * f as i64,
                        ));
                        let coeff = ca.mul(cb).mul_atom(&CoeffAtom::imaginary(w));
                        let slot = out.entry(mono).or_default();
                        slot.add(&coeff);
                        if slot.is_zero() {
                            // keep the map free of cancelled keys
                            let key = oracle_contract(ma, mb, j);
                            out.remove(&key);
                        }
                    }
                }
            }
            out
        })
        .reduce(HashMap::new, |mut acc, local| {
            for (m, c) in local {
                let slot = acc.entry(m.clone()).or_default();
                slot.add(&c);
                if slot.is_zero() {
                    acc.remove(&m);
                }
            }
            acc
        })
}

/// Σ wᵢ·Pᵢ as one polynomial.
fn weighted_sum(parts: &[(&HamiltonianPoly, BigRational)]) -> HamiltonianPoly {
    let (first, _) = parts[0];
    let mut out = HamiltonianPoly::new(first.s, first.j_max);
    for (p, w) in parts {
        out.add_poly(&p.scaled(w));
    }
    out
}

fn map_to_poly(
    map: &HashMap<Monomial, SymbolicCoefficient>,
    like: &HamiltonianPoly,
) -> HamiltonianPoly {
    let mut out = HamiltonianPoly::new(like.s, like.j_max);
    for (m, c) in map {
        out.add_coeff_term(m.clone(), c);
    }
    out
}

/// Read the ladder coefficients of the target action monomials from an
/// oracle accumulation.
fn oracle_ladder(
    map: &HashMap<Monomial, SymbolicCoefficient>,
    s: &TangentialSet,
    half_degree: u8,
) -> Result<Vec<(BigRational, i32)>> {
    (0..=half_degree)
        .map(|m| {
            let mono = Monomial::action(s, half_degree - m, m);
            match map.get(&mono) {
                None => Ok((BigRational::zero(), 0)),
                Some(c) => c.as_real_pi(),
            }
        })
        .collect()
}

fn ladders_agree(
    production: &NormalFormProjection,
    oracle: &[(BigRational, i32)],
    expected_pi: i32,
    what: &str,
) -> std::result::Result<(), String> {
    if production.coeffs.len() != oracle.len() {
        return Err(format!(
            "{what}: ladder lengths differ ({} vs {})",
            production.coeffs.len(),
            oracle.len()
        ));
    }
    for (k, (p, o)) in production.coeffs.iter().zip(oracle).enumerate() {
        if p.rat != o.0 || (!o.0.is_zero() && (p.pi_pow != o.1 || o.1 != expected_pi)) {
            return Err(format!(
                "{what}[{k}]: production {:?}·π^{} vs oracle {:?}·π^{}",
                p.rat, p.pi_pow, o.0, o.1
            ));
        }
    }
    Ok(())
}

fn rbar_tbar_oracle(
    parts: &GParts,
    f6: &HamiltonianPoly,
    inner_cap: Option<usize>,
) -> Result<(Vec<(BigRational, i32)>, Vec<(BigRational, i32)>)> {
    let s = parts.g_bar.s;
    let half = birat(1, 2);
    let third = birat(1, 3);
    let one = BigRational::from_integer(BigInt::from(1));

    // R̄ combo: Ḡ (+ Ĝ when materialized) + ½G̃.
    let mut r_parts: Vec<(&HamiltonianPoly, BigRational)> =
        vec![(&parts.g_bar, one.clone()), (&parts.g_tilde, half.clone())];
    if let Some(hat) = &parts.g_hat {
        r_parts.push((hat, one.clone()));
    }
    let a_r = weighted_sum(&r_parts);
    let r_targets: Vec<Monomial> = (0..=5u8).map(|m| Monomial::action(&s, 5 - m, m)).collect();
    let r_map = brute_bracket(&a_r, f6, |mono| r_targets.contains(mono));
    let r_oracle = oracle_ladder(&r_map, &s, 5)?;

    // T̄ combo: ½(Ḡ (+ Ĝ)) + ⅓G̃, bracketed twice.
    let mut t_parts: Vec<(&HamiltonianPoly, BigRational)> =
        vec![(&parts.g_bar, half.clone()), (&parts.g_tilde, third)];
    if let Some(hat) = &parts.g_hat {
        t_parts.push((hat, half));
    }
    let a_t = weighted_sum(&t_parts);
    let inner_map = match inner_cap {
        // A factor loses at most one non-S component per contraction, so
        // inner monomials with more than `cap` non-S components cannot
        // reach the all-S window; the no-cap variant checks this claim.
        Some(cap) => brute_bracket(&a_t, f6, |mono| mono.non_s_count(&s) <= cap),
        None => brute_bracket(&a_t, f6, |_| true),
    };
    let inner = map_to_poly(&inner_map, f6);
    let t_targets: Vec<Monomial> = (0..=7u8).map(|m| Monomial::action(&s, 7 - m, m)).collect();
    let t_map = brute_bracket(&inner, f6, |mono| t_targets.contains(mono));
    let t_oracle = oracle_ladder(&t_map, &s, 7)?;
    Ok((r_oracle, t_oracle))
}

/// R₀…R₅ and T₀…T₇ at the reduced configuration S = (3, 7), J_max = 35
/// are exactly real π-rationals and agree exactly with a brute-force
/// contraction oracle that re-enumerates every term pair and contraction
/// mode from scratch. The frozen anchor R₀ = 171/8000000·π⁻⁴ is
/// asserted as well.
pub fn criterion_6() -> CriterionOutcome {
    outcome(6, "ladder reality and blind contraction oracle", (|| {
        let b = reduced_bundle()?;
        // Reality: every ladder coefficient is a single real π-rational
        // atom (as_real_pi re-verifies the invariant the production
        // ladder extraction enforced).
        for set in [&b.rbar, &b.tbar] {
            for mono_coeff in set.poly.terms() {
                mono_coeff.1.as_real_pi().map_err(|e| {
                    Error::Verification(format!("ladder coefficient not exactly real: {e}"))
                })?;
            }
        }
        let (r_oracle, t_oracle) = rbar_tbar_oracle(&b.parts, &b.f6, Some(1))?;
        ladders_agree(&b.rbar, &r_oracle, -4, "R ladder").map_err(Error::Verification)?;
        ladders_agree(&b.tbar, &t_oracle, -6, "T ladder").map_err(Error::Verification)?;
        let frozen_r0 = birat(171, 8_000_000);
        if b.rbar.coeffs[0].rat != frozen_r0 || b.rbar.coeffs[0].pi_pow != -4 {
            return Ok((
                false,
                format!(
                    "R₀ deviates from the frozen anchor: {:?}·π^{}",
                    b.rbar.coeffs[0].rat, b.rbar.coeffs[0].pi_pow
                ),
            ));
        }
        let d = format!(
            "6 R and 8 T coefficients exactly real and equal to the contraction oracle; \
             R₀ = {:.6e}, R₅ = {:.6e}, T₀ = {:.6e}, T₇ = {:.6e}",
            b.rbar.coeffs[0].value(),
            b.rbar.coeffs[5].value(),
            b.tbar.coeffs[0].value(),
            b.tbar.coeffs[7].value(),
        );
        Ok((true, d))
    })())
}

// ---------------------------------------------------------------------
// Criterion 7: frequency-map determinant
// ---------------------------------------------------------------------

/// ω⁰(0) = (λ_{n₁}, λ_{n₂}) exactly in floating point; the Jacobian
/// determinant is strictly negative on a 64×64 grid over O* at
/// ε = 10⁻⁶; and after suppressing the o(√ε) corrections (ε = 10⁻¹⁰)
/// the determinant matches the leading closed form within 10⁻³
/// relative.
pub fn criterion_7() -> CriterionOutcome {
    outcome(7, "frequency-map determinant", (|| {
        let b = headline_bundle()?;
        let w0 = omega0(&b.model, [0.0, 0.0]);
        let exact_origin = w0[0] == lambda_f64(50) && w0[1] == lambda_f64(2500);

        let mut max_det = f64::NEG_INFINITY;
        let mut all_negative = true;
        for xi in grid_points(1e-6, 64) {
            let det = jacobian_det(&b.model, xi)?;
            all_negative &= det < 0.0;
            max_det = max_det.max(det);
        }

        let mut max_rel = 0.0f64;
        for xi in grid_points(1e-10, 9) {
            let det = jacobian_det(&b.model, xi)?;
            let lead = det_leading_closed_form(50, 2500, xi);
            max_rel = max_rel.max((det - lead).abs() / lead.abs());
        }
        let leading_ok = max_rel <= 1e-3;

        let pass = exact_origin && all_negative && leading_ok;
        let d = format!(
            "ω⁰(0) = (λ₅₀, λ₂₅₀₀) exactly: {exact_origin}; det < 0 on all 4096 grid points at \
             ε = 10⁻⁶ (max det = {max_det:.6e}); leading closed-form deviation {max_rel:.3e} \
             (≤ 10⁻³) with o(√ε) suppressed at ε = 10⁻¹⁰",
        );
        Ok((pass, d))
    })())
}

// ---------------------------------------------------------------------
// Criterion 8: nondegeneracy assumption suite
// ---------------------------------------------------------------------

/// The full assumption suite at ε = 10⁻⁶: A's determinant bounded away
/// from zero (and negative) on grid + random samples, B's scaled
/// derivative bound below c₁₃ = 15n₁²/(2π²(1+n₁²)²), E vacuous, and the
/// C scaling slopes within ±0.15 of their predicted exponents.
pub fn criterion_8() -> CriterionOutcome {
    outcome(8, "nondegeneracy assumption suite", (|| {
        let b = headline_bundle()?;
        let rep = verify_assumptions(&b.model, 1e-6, 3 * 2500)?;
        let c_ok = rep.c.iter().all(|r| r.pass);
        let pass = rep.a.pass
            && rep.a.inf_abs_det > 0.0
            && rep.b.structural_bounds_hold
            && rep.b.deriv_bound_holds
            && rep.e_vacuous
            && c_ok
            && rep.pass;
        let slopes: Vec<String> =
            rep.c.iter().map(|r| format!("{} {:.3}", r.label, r.slope)).collect();
        let d = format!(
            "A: inf|det| = {:.6e} > 0, negative throughout: {}; B: Ω_j·j ∈ [{:.4}, {:.4}] over \
             j ≤ {}, sup|∂Ω|·scale = {:.6e} ≤ c₁₃ = {:.6e}; E vacuous: {}; C slopes: {}",
            rep.a.inf_abs_det,
            rep.a.det_negative_throughout,
            rep.b.min_scaled,
            rep.b.max_scaled,
            rep.b.j_checked,
            rep.b.deriv_sup_scaled,
            rep.b.c13,
            rep.e_vacuous,
            slopes.join(", "),
        );
        Ok((pass, d))
    })())
}

// ---------------------------------------------------------------------
// Criterion 9: integrator physics
// ---------------------------------------------------------------------

/// Linear-flow phase error below 10⁻⁸ over T = 10³ (splitting integrator,
/// whose linear substeps are exact rotations); E₁ relative drift below
/// 10⁻¹⁰ and H relative drift below 10⁻⁸ over a nonlinear T = 10⁴ run at
/// amplitude 10⁻¹ (implicit midpoint); and time-reversal residual below
/// 10⁻⁸ for both integrators.
pub fn criterion_9() -> CriterionOutcome {
    outcome(9, "integrator physics", (|| {
        // (a) exact linear flow
        let mut st = SpectralState::zeros(40);
        for &(j, re, im) in &[(1i64, 0.3, 0.1), (5, -0.2, 0.25), (13, 0.15, -0.3), (40, 0.05, 0.02)]
        {
            st.set(j, num_complex::Complex64::new(re, im));
            st.set(-j, num_complex::Complex64::new(re, -im));
        }
        let (dt, n_steps) = (0.01, 100_000usize); // T = 10³
        let out = evolve(&st, n_steps, dt, IntegratorKind::Splitting, false)?;
        let t = dt * n_steps as f64;
        let mut phase_err = 0.0f64;
        for j in st.modes() {
            let expect = st.get(j) * num_complex::Complex64::new(0.0, -lambda_f64(j) * t).exp();
            phase_err = phase_err.max((out.get(j) - expect).norm());
        }
        let linear_ok = phase_err < 1e-8;

        // (b) conserved-quantity drift over T = 10⁴ at amplitude 10⁻¹
        let s = TangentialSet::new(5, 13)?;
        let mut cfg = SimConfig::for_tangential(s, [1e-4, 1e-4]);
        cfg.horizon = 1e4;
        cfg.integrator = IntegratorKind::ImplicitMidpoint;
        let tr = integrate(&cfg)?;
        let drift_ok = tr.e1_drift < 1e-10 && tr.h_drift < 1e-8;

        // (c) time reversal, 2·10⁴ steps each way at the experiment point
        let z0 = initial_torus_state([0.05, 0.05], [0.4, -1.1], s, 65)?;
        let mut reversal = 0.0f64;
        for kind in [IntegratorKind::ImplicitMidpoint, IntegratorKind::Splitting] {
            let fwd = evolve(&z0, 20_000, 0.05, kind, true)?;
            let back = evolve(&fwd, 20_000, -0.05, kind, true)?;
            let res = z0
                .modes()
                .into_iter()
                .map(|j| (back.get(j) - z0.get(j)).norm())
                .fold(0.0f64, f64::max);
            reversal = reversal.max(res);
        }
        let reversal_ok = reversal < 1e-8;

        let pass = linear_ok && drift_ok && reversal_ok;
        let d = format!(
            "linear phase error {phase_err:.3e} (< 10⁻⁸) over T = 10³; relative drifts over \
             T = 10⁴: E₁ {:.3e} (< 10⁻¹⁰), H {:.3e} (< 10⁻⁸), reality defect {:.3e}; \
             time-reversal residual {reversal:.3e} (< 10⁻⁸, both integrators)",
            tr.e1_drift, tr.h_drift, tr.max_reality_defect,
        );
        Ok((pass, d))
    })())
}

// ---------------------------------------------------------------------
// Criterion 10: frequency-shift experiment
// ---------------------------------------------------------------------

/// At S = (5, 13), ξ = (0.05, 0.05): the order-6 divisor survey is
/// re-run for this tangential set (no zeros on the sets the normal form
/// needs), then the measured tangential frequencies must match the
/// quadratic-bracket prediction within 10% relative shift error and the
/// shift-vs-ξ log-log slope over the 3-point sweep must be 1.0 ± 0.1.
pub fn criterion_10() -> CriterionOutcome {
    outcome(10, "frequency-shift experiment", (|| {
        let s = TangentialSet::new(5, 13)?;
        let j_max = 65usize;
        let labels = [TupleClass::Delta0, TupleClass::Delta1, TupleClass::Delta2];
        let survey = survey_min_divisor(6, &labels, &s, j_max, None)?;
        let survey_ok = survey.zero_divisor_tuples.is_empty()
            && survey.min_abs_divisor.as_ref().map(|m| m > &BigRational::zero()).unwrap_or(false);
        if !survey_ok {
            return Ok((
                false,
                format!(
                    "divisor re-run at (5, 13) failed: {} zero divisors over {} tuples",
                    survey.zero_divisor_tuples.len(),
                    survey.tuples_checked
                ),
            ));
        }
        let parts = build_g_parts(s, j_max, None, false)?;
        let f6 = build_f6(&parts.g_tilde)?;
        let rbar = compute_rbar(&parts.g_bar, &parts.g_tilde, &f6)?;
        let tbar = compute_tbar(&parts.g_bar, &parts.g_tilde, &f6)?;
        let model = derive_frequency_model(&parts.g_bar, &rbar, &tbar)?;
        let cfg = SimConfig::for_tangential(s, [0.05, 0.05]);
        let exp = frequency_experiment(&cfg, &model)?;
        let shift_ok = exp.tones.iter().all(|t| t.rel_shift_error_quad <= 0.10);
        let slopes_ok = exp.slopes.iter().all(|&sl| (sl - 1.0).abs() <= 0.1);
        let normal_ok = exp.max_normal_to_s_energy_ratio < 1e-2;
        let pass = shift_ok && slopes_ok && normal_ok;
        let tones: Vec<String> = exp
            .tones
            .iter()
            .map(|t| {
                format!(
                    "mode {}: shift {:.4e} vs predicted {:.4e} (rel err {:.4})",
                    t.mode, t.shift_measured, t.shift_quad, t.rel_shift_error_quad
                )
            })
            .collect();
        let d = format!(
            "divisor re-run clean ({} tuples, min {:.4e}); {}; sweep slopes ({:.4}, {:.4}) \
             ∈ 1.0 ± 0.1; normal/tangential energy ratio {:.3e}",
            survey.tuples_checked,
            min_divisor_value(&survey),
            tones.join("; "),
            exp.slopes[0],
            exp.slopes[1],
            exp.max_normal_to_s_energy_ratio,
        );
        Ok((pass, d))
    })())
}

// ---------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------

/// Run one criterion by id (1–10).
pub fn run_criterion(id: u8) -> Result<CriterionOutcome> {
    Ok(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        other => return Err(Error::Config(format!("criterion id must be 1..=10, got {other}"))),
    })
}

/// Run a subset of criteria (all ten when `ids` is empty), in order.
pub fn run_all(ids: &[u8]) -> Result<VerifyAllDoc> {
    let ids: Vec<u8> = if ids.is_empty() { (1..=10).collect() } else { ids.to_vec() };
    let mut criteria = Vec::with_capacity(ids.len());
    for id in ids {
        criteria.push(run_criterion(id)?);
    }
    let all_pass = criteria.iter().all(|c| c.pass);
    Ok(VerifyAllDoc { criteria, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The structural-exclusion claims the production projections rely
    /// on (Ĝ dropped, inner bracket capped at one non-S component) are
    /// validated here with none of them applied: a minimal configuration
    /// small enough to include Ĝ and run the double bracket with no
    /// filter at all must reproduce the production ladders exactly.
    #[test]
    fn tiny_full_blind_oracle_with_ghat_and_no_filters() {
        let s = TangentialSet::new(3, 7).unwrap();
        let j_max = 7usize;
        let parts = build_g_parts(s, j_max, None, true).unwrap();
        assert!(
            parts.g_hat.as_ref().map(|h| h.len() > 0).unwrap_or(false),
            "the far stratum must be non-empty for this check to have force"
        );
        let f6 = build_f6(&parts.g_tilde).unwrap();
        let rbar = compute_rbar(&parts.g_bar, &parts.g_tilde, &f6).unwrap();
        let tbar = compute_tbar(&parts.g_bar, &parts.g_tilde, &f6).unwrap();
        let (r_oracle, t_oracle) = rbar_tbar_oracle(&parts, &f6, None).unwrap();
        ladders_agree(&rbar, &r_oracle, -4, "R ladder (full blind)").unwrap();
        ladders_agree(&tbar, &t_oracle, -6, "T ladder (full blind)").unwrap();
        // the reduced-scale ladders must not be trivially zero
        assert!(rbar.coeffs.iter().any(|c| !c.is_zero()));
        assert!(tbar.coeffs.iter().any(|c| !c.is_zero()));
    }

    #[test]
    fn criterion_1_passes_and_run_all_subset_works() {
        let c = criterion_1();
        assert!(c.pass, "{}", c.detail);
        let doc = run_all(&[1]).unwrap();
        assert_eq!(doc.criteria.len(), 1);
        assert_eq!(doc.criteria[0].id, 1);
        assert!(doc.all_pass);
        assert!(run_criterion(0).is_err());
        assert!(run_criterion(11).is_err());
    }

    #[test]
    fn criterion_outcomes_serialize_with_stable_fields() {
        let c = CriterionOutcome { id: 3, name: "x".into(), pass: true, detail: "d".into() };
        let json = crate::report::to_canonical_json(&c).unwrap();
        assert!(json.contains("\"id\": 3"));
        assert!(json.contains("\"pass\": true"));
    }
}
