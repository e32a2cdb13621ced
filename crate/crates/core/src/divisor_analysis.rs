//! Exact small-divisor analysis.
//!
//! The order-6 normal-form transformation divides each non-normal
//! monomial coefficient by its divisor Σᵢ λ_{jᵢ}. This module certifies,
//! by exhaustive exact-rational search over the enumerable strata, that
//! those divisors never vanish on the admissible sets
//!
//! ```text
//! order 6:  (Δ₀ ∪ Δ₁ ∪ Δ₂) ∖ N,
//! order 10: (Δ′₀ ∪ Δ′₁) ∖ N′,
//! order 14: Δ″₀ ∖ N″,
//! ```
//!
//! reporting the exact minimum of |Σλ| and every exact zero found. All
//! arithmetic is rational — a reported zero is a true resonance, not an
//! underflow, and positivity of the minimum is a zero-test on integers.
//!
//! The searched window bounds non-S entries by |j| ≤ j_max; a separate
//! analytic tail certificate extends positivity to all |j| > j_max using
//! the monotonicity of λ_t = t/(1+t²): each Δ₁/Δ₂-shaped stratum is
//! indexed by its S-multiset σ, and for out-of-window free entries the λ
//! contribution is bounded by λ evaluated at the window edge, so
//! |Σλ| ≥ |Σλ_σ| − (edge bounds) > 0 can be checked exactly per σ.
//! (A naive comparison of 1/j_max against the in-window minimum would
//! not do: the in-window minimum sits at second-difference tuples and is
//! orders of magnitude below 1/j_max.)
//!
//! Two supporting number-theoretic facts are checked with exact integer
//! square roots: the discriminants (n₁²−27)² − 720 and
//! (n₁²−(2r²−1))² − (2r²−1)² + 1 are never perfect squares in the
//! regimes where the degenerate quadratics would need integer roots.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::index_sets::{
    enumerate_admissible, s_multiset_counts, IndexTuple, TangentialSet, TupleClass,
};
use crate::spectral_core::{lambda, Mode};
use crate::Result;

/// Exact small divisor Σᵢ λ_{jᵢ} of a tuple (signed; callers usually
/// take the absolute value). λ is odd, so any pairing tuple maps to an
/// exact zero.
pub fn divisor(t: &IndexTuple) -> BigRational {
    divisor_of_entries(t.entries())
}

fn divisor_of_entries(entries: &[Mode]) -> BigRational {
    if let Some((n, d)) = divisor_i128(entries) {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    } else {
        entries.iter().map(|&j| lambda(j)).sum()
    }
}

/// Fast exact path over a common i128 denominator D = Π_distinct (1+v²).
/// Returns the reduced fraction, or None when the bound analysis cannot
/// guarantee overflow-freedom (caller falls back to big rationals).
fn divisor_i128(entries: &[Mode]) -> Option<(i128, i128)> {
    if entries.len() > 14 {
        return None;
    }
    let mut dens: [i128; 14] = [0; 14];
    let mut n_dens = 0usize;
    for &j in entries {
        let a = j.unsigned_abs() as i128;
        let d = 1 + a * a;
        if !dens[..n_dens].contains(&d) {
            dens[n_dens] = d;
            n_dens += 1;
        }
    }
    // Keep D ≤ i128::MAX/16: numerator accumulates ≤ 14 terms each of
    // magnitude ≤ D/2, so |N| ≤ 7·D stays far from overflow.
    let mut big_d: i128 = 1;
    for &d in &dens[..n_dens] {
        big_d = big_d.checked_mul(d)?;
        if big_d > i128::MAX / 16 {
            return None;
        }
    }
    let mut num: i128 = 0;
    for &j in entries {
        let a = j.unsigned_abs() as i128;
        let d = 1 + a * a;
        let term = (j.signum() as i128) * a * (big_d / d);
        num += term;
    }
    if num == 0 {
        return Some((0, 1));
    }
    let g = num.gcd(&big_d);
    Some((num / g, big_d / g))
}

/// Convenience f64 view of the divisor (exact computation, then rounded).
pub fn divisor_f64(t: &IndexTuple) -> f64 {
    ratio_to_f64(&divisor(t))
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Result of an exhaustive divisor survey over enumerated strata.
///
/// `min_abs_divisor`/`witness` are None exactly when the searched set is
/// empty (after removing pairing tuples). When zeros exist the minimum
/// is the exact zero and the witness is a zero tuple. `case_i1_matched`
/// counts order-6 tuples matching the cancelling-S-pair pattern (one
/// sign singleton among the remaining four); each such tuple must obey
/// the closed-form bound |Σλ| ≥ 2n₂/(1+n₂²), and violations are listed.
#[derive(Debug, Clone)]
pub struct DivisorReport {
    pub order: usize,
    pub labels: Vec<TupleClass>,
    pub s: TangentialSet,
    pub j_max: usize,
    pub min_abs_divisor: Option<BigRational>,
    pub witness: Option<IndexTuple>,
    pub tuples_checked: u64,
    pub zero_divisor_tuples: Vec<IndexTuple>,
    pub case_i1_matched: u64,
    pub case_i1_violations: Vec<IndexTuple>,
}

/// True iff the order-6 tuple contains a cancelling ± pair from S whose
/// removal leaves four entries with exactly one positive (or, mirror,
/// exactly one negative) component.
pub fn case_i1_matches(t: &IndexTuple, s: &TangentialSet) -> bool {
    if t.order() != 6 {
        return false;
    }
    let e = t.entries();
    for v in [s.n1(), s.n2()] {
        if e.contains(&v) && e.contains(&(-v)) {
            let mut removed_pos = false;
            let mut removed_neg = false;
            let mut pos = 0usize;
            for &j in e {
                if j == v && !removed_pos {
                    removed_pos = true;
                    continue;
                }
                if j == -v && !removed_neg {
                    removed_neg = true;
                    continue;
                }
                if j > 0 {
                    pos += 1;
                }
            }
            if pos == 1 || pos == 3 {
                return true;
            }
        }
    }
    false
}

struct SurveyLocal {
    checked: u64,
    zeros: Vec<IndexTuple>,
    champ: Option<(BigRational, f64, IndexTuple)>,
    i1_matched: u64,
    i1_violations: Vec<IndexTuple>,
}

impl SurveyLocal {
    fn new() -> Self {
        SurveyLocal {
            checked: 0,
            zeros: Vec::new(),
            champ: None,
            i1_matched: 0,
            i1_violations: Vec::new(),
        }
    }

    fn consider(&mut self, tuple: &IndexTuple, order: usize, s: &TangentialSet, i1_bound: &BigRational) {
        self.checked += 1;
        let d = divisor(tuple);
        if d.is_zero() {
            self.zeros.push(tuple.clone());
        }
        let abs = d.abs();
        if order == 6 && case_i1_matches(tuple, s) {
            self.i1_matched += 1;
            if abs < *i1_bound {
                self.i1_violations.push(tuple.clone());
            }
        }
        let abs_f = ratio_to_f64(&abs);
        match &self.champ {
            None => self.champ = Some((abs, abs_f, tuple.clone())),
            Some((best, best_f, best_t)) => {
                // Cheap float screen; exact comparison near ties. The
                // relative guard band is far wider than f64 round-off.
                if abs_f <= best_f * (1.0 + 1e-9) {
                    let better = abs < *best
                        || (abs == *best && tuple.entries() < best_t.entries());
                    if better {
                        self.champ = Some((abs, abs_f, tuple.clone()));
                    }
                }
            }
        }
    }

    fn merge(mut self, other: SurveyLocal) -> SurveyLocal {
        self.checked += other.checked;
        self.zeros.extend(other.zeros);
        self.i1_matched += other.i1_matched;
        self.i1_violations.extend(other.i1_violations);
        self.champ = match (self.champ, other.champ) {
            (None, c) | (c, None) => c,
            (Some(a), Some(b)) => {
                if b.0 < a.0 || (b.0 == a.0 && b.2.entries() < a.2.entries()) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        };
        self
    }
}

/// Exhaustive exact-rational survey of |Σλ| over the requested strata
/// minus the pairing set, with non-S entries bounded by |j| ≤ j_max.
/// Parallelized over canonical-tuple chunks; the merge is deterministic
/// (exact minimum, lexicographic witness tie-break).
pub fn survey_min_divisor(
    order: usize,
    labels: &[TupleClass],
    s: &TangentialSet,
    j_max: usize,
    ceiling: Option<u64>,
) -> Result<DivisorReport> {
    let enumerated = enumerate_admissible(order, s, j_max, labels, ceiling)?;
    let i1_bound = BigRational::new(
        BigInt::from(2 * s.n2()),
        BigInt::from(1 + s.n2() * s.n2()),
    );
    let local = enumerated
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = SurveyLocal::new();
            for e in chunk {
                if e.tuple.is_normal_pairing() {
                    continue;
                }
                acc.consider(&e.tuple, order, s, &i1_bound);
            }
            acc
        })
        .reduce(SurveyLocal::new, SurveyLocal::merge);
    let mut zeros = local.zeros;
    zeros.sort_by(|a, b| a.entries().cmp(b.entries()));
    let mut i1_violations = local.i1_violations;
    i1_violations.sort_by(|a, b| a.entries().cmp(b.entries()));
    let (min_abs_divisor, witness) = match local.champ {
        None => (None, None),
        Some((abs, _, t)) => (Some(abs), Some(t)),
    };
    Ok(DivisorReport {
        order,
        labels: labels.to_vec(),
        s: *s,
        j_max,
        min_abs_divisor,
        witness,
        tuples_checked: local.checked,
        zero_divisor_tuples: zeros,
        case_i1_matched: local.i1_matched,
        case_i1_violations: i1_violations,
    })
}

/// Which analytic bound certifies a tail pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailCase {
    /// The single free entry is determined by momentum and falls outside
    /// the window; the full divisor is computed exactly.
    DeterminedEntry,
    /// Exactly one of the two free entries is outside the window:
    /// |Σλ| ≥ |Σλ_σ| − λ(j_max+1−|s|) − λ(j_max+1).
    OneFreeOut,
    /// Both free entries are outside: |Σλ| ≥ |Σλ_σ| − 2·λ(j_max+1).
    BothFreeOut,
    /// Σσ = 0 with σ not a pairing: the two free entries cancel each
    /// other's λ exactly, so the divisor equals Σλ_σ for every choice.
    ConstantDivisor,
}

/// One per-S-multiset tail check: `margin` is the exact certified lower
/// bound on |Σλ| over the whole (infinite) tail pattern.
#[derive(Debug, Clone)]
pub struct TailCheck {
    pub sigma: Vec<Mode>,
    pub case: TailCase,
    pub margin: BigRational,
    pub holds: bool,
}

/// Outcome of the analytic tail extension for one order.
#[derive(Debug, Clone)]
pub struct TailCertificate {
    pub order: usize,
    pub j_max: usize,
    pub checks: Vec<TailCheck>,
    pub all_hold: bool,
}

fn sigma_entries(counts: &[usize; 4], members: &[Mode; 4]) -> Vec<Mode> {
    let mut v = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            v.push(members[i]);
        }
    }
    v
}

fn sigma_is_pairing(counts: &[usize; 4]) -> bool {
    // member order is [−n₂, −n₁, n₁, n₂]
    counts[0] == counts[3] && counts[1] == counts[2]
}

/// Certify |Σλ| > 0 for every admissible non-pairing tuple with some
/// non-S entry outside the search window |j| ≤ j_max, by exact per-σ
/// bounds. Order 14's admissible stratum has no free entries, so its
/// certificate is vacuous.
pub fn tail_certificate(order: usize, s: &TangentialSet, j_max: usize) -> Result<TailCertificate> {
    if !(order == 6 || order == 10 || order == 14) {
        return Err(crate::Error::Config(format!(
            "tail certificate supports orders 6/10/14, got {order}"
        )));
    }
    let members = s.members();
    let jm = j_max as Mode;
    let edge = lambda(jm + 1);
    let mut checks = Vec::new();

    // Single-free strata: Δ₁ (order 6, |σ| = 5) and Δ′₁ (order 10,
    // |σ| = 9). The free entry a = −Σσ is determined; when it lies
    // outside the window the divisor is computed exactly.
    if order == 6 || order == 10 {
        let size = order - 1;
        for counts in s_multiset_counts(size) {
            let sig = sigma_entries(&counts, &members);
            let sum: i64 = sig.iter().sum();
            let a = -sum;
            if a.unsigned_abs() as usize <= j_max || a == 0 || s.contains(a) {
                continue; // in-window (covered by the survey) or not in the stratum
            }
            let mut full = sig.clone();
            full.push(a);
            let margin = divisor_of_entries(&full).abs();
            let holds = margin.is_positive();
            checks.push(TailCheck { sigma: sig, case: TailCase::DeterminedEntry, margin, holds });
        }
    }

    // Two-free stratum: Δ₂ (order 6, |σ| = 4) with a + b = −Σσ.
    if order == 6 {
        for counts in s_multiset_counts(4) {
            let sig = sigma_entries(&counts, &members);
            let sum: i64 = sig.iter().sum();
            let l: BigRational = sig.iter().map(|&j| lambda(j)).sum();
            if sum == 0 {
                if sigma_is_pairing(&counts) {
                    // b = −a makes every completion a pairing tuple,
                    // which is outside the claim set: nothing to certify.
                    continue;
                }
                let margin = l.abs();
                let holds = margin.is_positive();
                checks.push(TailCheck {
                    sigma: sig,
                    case: TailCase::ConstantDivisor,
                    margin,
                    holds,
                });
                continue;
            }
            // One free entry out of window: the other satisfies
            // |a| ≥ j_max+1−|Σσ|, and λ decreases on [1, ∞).
            let inner = jm + 1 - sum.abs();
            let inner_bound = lambda(inner.max(1));
            let margin_one = l.abs() - &inner_bound - &edge;
            checks.push(TailCheck {
                sigma: sig.clone(),
                case: TailCase::OneFreeOut,
                holds: margin_one.is_positive(),
                margin: margin_one,
            });
            // Both free entries out of window.
            let margin_both = l.abs() - &edge - &edge;
            checks.push(TailCheck {
                sigma: sig,
                case: TailCase::BothFreeOut,
                holds: margin_both.is_positive(),
                margin: margin_both,
            });
        }
    }

    let all_hold = checks.iter().all(|c| c.holds);
    Ok(TailCertificate { order, j_max, checks, all_hold })
}

/// Floor integer square root of a non-negative i128.
fn isqrt_i128(n: i128) -> i128 {
    debug_assert!(n >= 0);
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128 + 1;
    // Newton correction to the exact floor.
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn is_square_i128(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt_i128(n);
    r * r == n
}

/// Whether (n₁² − 27)² − 720 is a perfect square. The degenerate
/// quadratic behind one resonance subcase would need this to be a
/// square; it never is once n₁² − 27 exceeds the largest factor-pair
/// mean of 720.
pub fn first_discriminant_is_square(n1: i64) -> bool {
    let a = n1 as i128 * n1 as i128 - 27;
    is_square_i128(a * a - 720)
}

/// Whether (n₁² − (2r² − 1))² − (2r² − 1)² + 1 is a perfect square
/// (relevant for r ∈ {2, 3}).
pub fn second_discriminant_is_square(n1: i64, r: i64) -> bool {
    let b = 2 * r as i128 * r as i128 - 1;
    let a = n1 as i128 * n1 as i128 - b;
    is_square_i128(a * a - b * b + 1)
}

/// Combined check: true iff either discriminant form is a perfect
/// square (the resonance analysis requires both to be non-squares, so
/// the expected value is false for n₁ ≥ 20, r ∈ {2, 3}).
pub fn discriminant_square_checks(n1: i64, r: i64) -> bool {
    first_discriminant_is_square(n1) || second_discriminant_is_square(n1, r)
}

/// The enumerated strata for the admissible set at each order.
pub fn admissible_labels(order: usize) -> Result<&'static [TupleClass]> {
    match order {
        6 => Ok(&[TupleClass::Delta0, TupleClass::Delta1, TupleClass::Delta2]),
        10 => Ok(&[TupleClass::Delta0Prime, TupleClass::Delta1Prime]),
        14 => Ok(&[TupleClass::Delta0DoublePrime]),
        n => Err(crate::Error::Config(format!("no admissible strata for order {n}"))),
    }
}

/// Convenience wrapper: survey the full admissible set for an order.
pub fn survey_admissible(
    order: usize,
    s: &TangentialSet,
    j_max: usize,
    ceiling: Option<u64>,
) -> Result<DivisorReport> {
    survey_min_divisor(order, admissible_labels(order)?, s, j_max, ceiling)
}
