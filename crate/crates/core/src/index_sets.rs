//! Index-set bookkeeping relative to a two-mode tangential set
//! S = {±n₁, ±n₂}.
//!
//! The sextic part of the Hamiltonian couples 6-tuples (j₁,…,j₆) with
//! j₁+⋯+j₆ = 0. Relative to S the tuples are stratified by how many
//! components lie outside S: Δ₀/Δ₁/Δ₂ (exactly 0/1/2) and Δ₃ (at least
//! 3). The corresponding order-10 strata are Δ′₀ (all in S), Δ′₁
//! (exactly one outside) and Δ′₂ (at least two); order 14 distinguishes
//! only Δ″₀ (all in S) from Δ″₁ (at least one outside). The normal-form
//! set N (resp. N′, N″) consists of pairing tuples — permutations of
//! (a,−a,b,−b,c,−c,…) — whose monomials depend on actions only.
//!
//! Tuples are stored as canonical non-decreasing multisets; the number of
//! ordered tuples a canonical representative stands for is its
//! multinomial multiplicity. Enumeration exploits momentum conservation
//! to solve for the last free entry, so the searched candidate space is
//! polynomial in j_max rather than (2·j_max)^order; a configurable
//! candidate ceiling guards the combinatorially explosive strata.

use smallvec::SmallVec;

use crate::spectral_core::Mode;
use crate::{Error, Result};

/// The tangential set S = {±n₁, ±n₂}, 1 ≤ n₁ < n₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TangentialSet {
    n1: Mode,
    n2: Mode,
}

impl TangentialSet {
    pub fn new(n1: Mode, n2: Mode) -> Result<Self> {
        if n1 < 1 || n2 <= n1 {
            return Err(Error::Config(format!(
                "tangential set requires 1 ≤ n1 < n2, got ({n1}, {n2})"
            )));
        }
        Ok(TangentialSet { n1, n2 })
    }

    pub fn n1(&self) -> Mode {
        self.n1
    }

    pub fn n2(&self) -> Mode {
        self.n2
    }

    /// Members in ascending order: [−n₂, −n₁, n₁, n₂].
    pub fn members(&self) -> [Mode; 4] {
        [-self.n2, -self.n1, self.n1, self.n2]
    }

    pub fn contains(&self, j: Mode) -> bool {
        j.abs() == self.n1 || j.abs() == self.n2
    }
}

/// Canonical (non-decreasing) multiset of nonzero modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexTuple {
    entries: SmallVec<[Mode; 14]>,
}

impl IndexTuple {
    /// Canonicalizes by sorting. Zero entries are rejected.
    pub fn new(mut entries: Vec<Mode>) -> Result<Self> {
        if entries.iter().any(|&j| j == 0) {
            return Err(Error::Config("index tuples cannot contain mode 0".into()));
        }
        entries.sort_unstable();
        Ok(IndexTuple { entries: SmallVec::from_vec(entries) })
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Mode] {
        &self.entries
    }

    pub fn momentum(&self) -> i64 {
        self.entries.iter().sum()
    }

    /// Number of components (with multiplicity) outside S.
    pub fn non_s_count(&self, s: &TangentialSet) -> usize {
        self.entries.iter().filter(|&&j| !s.contains(j)).count()
    }

    /// True iff the tuple is a permutation of (a,−a,b,−b,…): every value
    /// appears as often as its negative. Pairing forces momentum 0.
    pub fn is_normal_pairing(&self) -> bool {
        let mut i = 0;
        let n = self.entries.len();
        // entries sorted ascending: count occurrences of each value and
        // compare with occurrences of its negation via binary search.
        while i < n {
            let v = self.entries[i];
            let mut run = 1;
            while i + run < n && self.entries[i + run] == v {
                run += 1;
            }
            let neg = count_of(&self.entries, -v);
            if neg != run {
                return false;
            }
            i += run;
        }
        true
    }

    /// Number of distinct ordered tuples this multiset represents:
    /// order! / Π_v (count_v)!.
    pub fn multiplicity(&self) -> u64 {
        let mut mult = factorial(self.entries.len());
        let mut i = 0;
        while i < self.entries.len() {
            let v = self.entries[i];
            let mut run = 1;
            while i + run < self.entries.len() && self.entries[i + run] == v {
                run += 1;
            }
            mult /= factorial(run);
            i += run;
        }
        mult
    }
}

fn count_of(sorted: &[Mode], v: Mode) -> usize {
    let lo = sorted.partition_point(|&x| x < v);
    let hi = sorted.partition_point(|&x| x <= v);
    hi - lo
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product::<u64>().max(1)
}

/// Stratum of an index tuple relative to S, by order and non-S count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TupleClass {
    /// Order 6, all components in S.
    Delta0,
    /// Order 6, exactly one component outside S.
    Delta1,
    /// Order 6, exactly two components outside S.
    Delta2,
    /// Order 6, at least three components outside S.
    Delta3,
    /// Order 10, all components in S.
    Delta0Prime,
    /// Order 10, exactly one component outside S.
    Delta1Prime,
    /// Order 10, at least two components outside S.
    Delta2Prime,
    /// Order 14, all components in S.
    Delta0DoublePrime,
    /// Order 14, at least one component outside S.
    Delta1DoublePrime,
}

impl TupleClass {
    pub fn order(&self) -> usize {
        use TupleClass::*;
        match self {
            Delta0 | Delta1 | Delta2 | Delta3 => 6,
            Delta0Prime | Delta1Prime | Delta2Prime => 10,
            Delta0DoublePrime | Delta1DoublePrime => 14,
        }
    }
}

/// Stratify a tuple of order 6, 10 or 14.
pub fn classify(t: &IndexTuple, s: &TangentialSet) -> Result<TupleClass> {
    let out = t.non_s_count(s);
    use TupleClass::*;
    Ok(match (t.order(), out) {
        (6, 0) => Delta0,
        (6, 1) => Delta1,
        (6, 2) => Delta2,
        (6, _) => Delta3,
        (10, 0) => Delta0Prime,
        (10, 1) => Delta1Prime,
        (10, _) => Delta2Prime,
        (14, 0) => Delta0DoublePrime,
        (14, _) => Delta1DoublePrime,
        (n, _) => {
            return Err(Error::Config(format!("classify supports orders 6/10/14, got {n}")))
        }
    })
}

/// An enumerated canonical tuple with its stratum and ordered-tuple count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumeratedTuple {
    pub tuple: IndexTuple,
    pub class: TupleClass,
    pub multiplicity: u64,
}

/// Default candidate ceiling for enumeration (number of candidate tuples
/// visited, before momentum filtering).
pub const DEFAULT_CEILING: u64 = 1_000_000_000;

/// Enumerate all canonical momentum-zero tuples of the requested strata
/// with every non-S entry bounded by |j| ≤ j_max. Strata with a free
/// non-S entry solve the last entry from momentum conservation, so Δ₁-
/// and Δ′₁-type strata are finite families indexed by S-multisets, and
/// Δ₂ costs O(#S-multisets · j_max). Δ₃ enumeration (needed only to
/// materialize Ĝ at small scale) is guarded by `ceiling`.
///
/// Enumeration of Δ′₂ and Δ″₁ is not supported — those strata are only
/// ever classified, never listed; requesting them is a configuration
/// error.
pub fn enumerate_admissible(
    order: usize,
    s: &TangentialSet,
    j_max: usize,
    labels: &[TupleClass],
    ceiling: Option<u64>,
) -> Result<Vec<EnumeratedTuple>> {
    let ceiling = ceiling.unwrap_or(DEFAULT_CEILING);
    if !(order == 6 || order == 10 || order == 14) {
        return Err(Error::Config(format!("enumeration supports orders 6/10/14, got {order}")));
    }
    if j_max == 0 {
        return Err(Error::Config("j_max must be positive".into()));
    }
    for label in labels {
        if label.order() != order {
            return Err(Error::Config(format!("label {label:?} does not belong to order {order}")));
        }
        if matches!(label, TupleClass::Delta2Prime | TupleClass::Delta1DoublePrime) {
            return Err(Error::Config(format!("stratum {label:?} supports classification only")));
        }
    }
    let mut out = Vec::new();
    for &label in labels {
        let non_s = match label {
            TupleClass::Delta0 | TupleClass::Delta0Prime | TupleClass::Delta0DoublePrime => {
                enumerate_with_free(order, 0, s, j_max, ceiling, &mut out, label)?;
                continue;
            }
            TupleClass::Delta1 | TupleClass::Delta1Prime => 1,
            TupleClass::Delta2 => 2,
            TupleClass::Delta3 => {
                for k in 3..=6usize {
                    enumerate_with_free(order, k, s, j_max, ceiling, &mut out, label)?;
                }
                continue;
            }
            _ => unreachable!("rejected above"),
        };
        enumerate_with_free(order, non_s, s, j_max, ceiling, &mut out, label)?;
    }
    // Deterministic order: by stratum then canonical tuple.
    out.sort_by(|a, b| a.class.cmp(&b.class).then_with(|| a.tuple.entries.cmp(&b.tuple.entries)));
    Ok(out)
}

/// Core enumerator: `free` components outside S (exactly), order−free in
/// S. The final non-S entry is solved from momentum; the remaining
/// free−1 run over a canonical non-decreasing window.
fn enumerate_with_free(
    order: usize,
    free: usize,
    s: &TangentialSet,
    j_max: usize,
    ceiling: u64,
    out: &mut Vec<EnumeratedTuple>,
    expected: TupleClass,
) -> Result<()> {
    let members = s.members();
    let s_size = order - free;
    let jm = j_max as Mode;

    // Candidate-count guard: S-multisets × free-entry window^(free−1).
    let s_multiset_count = multiset_count(4, s_size);
    let window = (2 * j_max + 1) as u128;
    let candidates = s_multiset_count as u128 * window.pow(free.saturating_sub(1) as u32);
    if candidates > ceiling as u128 {
        return Err(Error::ResourceCeiling(format!(
            "stratum {expected:?} at j_max = {j_max} needs ~{candidates} candidates \
             (ceiling {ceiling})"
        )));
    }

    // Iterate multisets of S-members by counts (c_{-n2}, c_{-n1}, c_{n1}, c_{n2}).
    let mut counts = [0usize; 4];
    iterate_counts(&mut counts, 0, s_size, &mut |counts| {
        let s_sum: i64 = counts
            .iter()
            .zip(&members)
            .map(|(&c, &v)| c as i64 * v)
            .sum();
        let mut base: SmallVec<[Mode; 14]> = SmallVec::new();
        for (idx, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                base.push(members[idx]);
            }
        }
        if free == 0 {
            if s_sum == 0 {
                push_tuple(out, base.to_vec(), s, expected);
            }
            return;
        }
        // free ≥ 1: choose free−1 non-decreasing non-S entries, solve the
        // last one from momentum and keep the window canonical.
        let mut chosen: SmallVec<[Mode; 6]> = SmallVec::new();
        choose_free(&mut chosen, free, -jm, s_sum, s, jm, &mut |full_free| {
            let mut entries = base.to_vec();
            entries.extend_from_slice(full_free);
            push_tuple(out, entries, s, expected);
        });
    });
    Ok(())
}

/// Recursive choice of `free` non-S entries in non-decreasing order with
/// total −s_sum; the last entry is solved, not scanned.
fn choose_free(
    chosen: &mut SmallVec<[Mode; 6]>,
    free: usize,
    min_allowed: Mode,
    s_sum: i64,
    s: &TangentialSet,
    jm: Mode,
    emit: &mut impl FnMut(&[Mode]),
) {
    if chosen.len() == free - 1 {
        let partial: i64 = chosen.iter().sum();
        let last = -s_sum - partial;
        if last == 0 || last.abs() > jm || s.contains(last) {
            return;
        }
        if let Some(&prev) = chosen.last() {
            if last < prev {
                return;
            }
        } else if last < min_allowed {
            return;
        }
        chosen.push(last);
        emit(chosen);
        chosen.pop();
        return;
    }
    let start = chosen.last().copied().unwrap_or(min_allowed);
    for v in start..=jm {
        if v == 0 || s.contains(v) {
            continue;
        }
        chosen.push(v);
        choose_free(chosen, free, min_allowed, s_sum, s, jm, emit);
        chosen.pop();
    }
}

fn push_tuple(out: &mut Vec<EnumeratedTuple>, entries: Vec<Mode>, s: &TangentialSet, expected: TupleClass) {
    let tuple = IndexTuple::new(entries).expect("enumerator never emits zero modes");
    debug_assert_eq!(tuple.momentum(), 0);
    let class = classify(&tuple, s).expect("enumerator orders are valid");
    debug_assert_eq!(class, expected);
    let multiplicity = tuple.multiplicity();
    out.push(EnumeratedTuple { tuple, class, multiplicity });
}

fn iterate_counts(counts: &mut [usize; 4], pos: usize, remaining: usize, f: &mut impl FnMut(&[usize; 4])) {
    if pos == 3 {
        counts[3] = remaining;
        f(counts);
        counts[3] = 0;
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        iterate_counts(counts, pos + 1, remaining - c, f);
        counts[pos] = 0;
    }
}

/// All count vectors (c₁,c₂,c₃,c₄) with Σcᵢ = size, aligned with the
/// member order of [`TangentialSet::members`]. Used wherever a stratum
/// is indexed by its S-multiset (divisor tail certificates, normal-form
/// bucket construction).
pub fn s_multiset_counts(size: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    let mut counts = [0usize; 4];
    iterate_counts(&mut counts, 0, size, &mut |c| out.push(*c));
    out
}

/// Number of multisets of size k from n symbols: C(n+k−1, k).
fn multiset_count(n: usize, k: usize) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k as u64 {
        num *= (n as u64) + i;
        den *= i + 1;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn s25() -> TangentialSet {
        TangentialSet::new(2, 5).unwrap()
    }

    #[test]
    fn tangential_set_validation() {
        assert!(TangentialSet::new(0, 5).is_err());
        assert!(TangentialSet::new(5, 5).is_err());
        assert!(TangentialSet::new(5, 2).is_err());
        let s = TangentialSet::new(50, 2500).unwrap();
        assert!(s.contains(-2500) && s.contains(50));
        assert!(!s.contains(49) && !s.contains(0));
    }

    #[test]
    fn pairing_detection() {
        let t = IndexTuple::new(vec![1, -2, -2, 3, 7, -7]).unwrap();
        assert!(!t.is_normal_pairing());
        let n = IndexTuple::new(vec![4, -4, 4, -4, 9, -9]).unwrap();
        assert!(n.is_normal_pairing());
        assert_eq!(n.momentum(), 0);
        // Pairing forces momentum zero on random pair assemblies.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let mut e = Vec::new();
            for _ in 0..3 {
                let a: i64 = {
                    let v = rng.gen_range(1..=12i64);
                    if rng.gen_bool(0.5) { v } else { -v }
                };
                e.push(a);
                e.push(-a);
            }
            let t = IndexTuple::new(e).unwrap();
            assert!(t.is_normal_pairing());
            assert_eq!(t.momentum(), 0);
        }
    }

    #[test]
    fn multiplicity_is_multinomial() {
        let t = IndexTuple::new(vec![1, 1, 1, -1, -1, -1]).unwrap();
        assert_eq!(t.multiplicity(), 20); // 6!/(3!3!)
        let t = IndexTuple::new(vec![2, 2, -2, -2, 5, -5]).unwrap();
        assert_eq!(t.multiplicity(), 180); // 6!/(2!2!1!1!)
        let t = IndexTuple::new(vec![1, -1, 2, -2, 3, -3]).unwrap();
        assert_eq!(t.multiplicity(), 720);
    }

    #[test]
    fn classify_by_non_s_count() {
        let s = s25();
        let t = IndexTuple::new(vec![2, 2, -2, -2, 5, -5]).unwrap();
        assert_eq!(classify(&t, &s).unwrap(), TupleClass::Delta0);
        let t = IndexTuple::new(vec![2, 2, 2, -2, 5, -9]).unwrap();
        assert_eq!(classify(&t, &s).unwrap(), TupleClass::Delta1);
        let t = IndexTuple::new(vec![2, -2, 5, -5, 7, -7]).unwrap();
        assert_eq!(classify(&t, &s).unwrap(), TupleClass::Delta2);
        let t = IndexTuple::new(vec![1, -1, 3, -3, 5, -5]).unwrap();
        assert_eq!(classify(&t, &s).unwrap(), TupleClass::Delta3);
        let t = IndexTuple::new(vec![2; 5].into_iter().chain(vec![-2; 5]).collect::<Vec<_>>()).unwrap();
        assert_eq!(classify(&t, &s).unwrap(), TupleClass::Delta0Prime);
        let t = IndexTuple::new(vec![2, 2, 2, 2, -2, -2, -2, -2, 5, -5, 3, -3, 9, -9]).unwrap();
        assert_eq!(classify(&t, &s).unwrap(), TupleClass::Delta1DoublePrime);
        let t = IndexTuple::new(vec![1, 1, 1, 1]).unwrap();
        assert!(classify(&t, &s).is_err());
    }

    #[test]
    fn delta1_never_pairs() {
        // S is symmetric, so pairing tuples have an even number of non-S
        // components; the Δ₁ stratum is disjoint from N.
        let s = s25();
        let tuples = enumerate_admissible(6, &s, 30, &[TupleClass::Delta1], None).unwrap();
        assert!(!tuples.is_empty());
        for e in &tuples {
            assert!(!e.tuple.is_normal_pairing());
        }
    }

    #[test]
    fn enumerate_rejects_classification_only_strata() {
        let s = s25();
        assert!(matches!(
            enumerate_admissible(10, &s, 30, &[TupleClass::Delta2Prime], None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            enumerate_admissible(14, &s, 30, &[TupleClass::Delta1DoublePrime], None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn resource_ceiling_trips() {
        let s = s25();
        let r = enumerate_admissible(6, &s, 100_000, &[TupleClass::Delta3], Some(1000));
        assert!(matches!(r, Err(Error::ResourceCeiling(_))));
    }

    /// Brute-force census of ordered momentum-zero tuples over the full
    /// Cartesian product, grouped by canonical multiset. Prunes on the
    /// reachable-sum bound to stay fast.
    fn cartesian_census(order: usize, jm: Mode) -> HashMap<Vec<Mode>, u64> {
        let values: Vec<Mode> = (1..=jm).chain((1..=jm).map(|v| -v)).collect();
        let mut map = HashMap::new();
        let mut stack: Vec<Mode> = Vec::with_capacity(order);
        fn rec(
            values: &[Mode],
            order: usize,
            jm: Mode,
            sum: i64,
            stack: &mut Vec<Mode>,
            map: &mut HashMap<Vec<Mode>, u64>,
        ) {
            let depth = stack.len();
            if depth == order {
                if sum == 0 {
                    let mut key = stack.clone();
                    key.sort_unstable();
                    *map.entry(key).or_insert(0) += 1;
                }
                return;
            }
            let remaining = (order - depth) as i64;
            if sum.abs() > remaining * jm {
                return; // momentum can no longer cancel
            }
            for &v in values {
                stack.push(v);
                rec(values, order, jm, sum + v, stack, map);
                stack.pop();
            }
        }
        rec(&values, order, jm, 0, &mut stack, &mut map);
        map
    }

    #[test]
    fn order6_enumeration_matches_cartesian_product() {
        let s = s25();
        let jm = 8usize;
        let census = cartesian_census(6, jm as Mode);
        let enumerated = enumerate_admissible(
            6,
            &s,
            jm,
            &[TupleClass::Delta0, TupleClass::Delta1, TupleClass::Delta2, TupleClass::Delta3],
            None,
        )
        .unwrap();
        let mut got: HashMap<Vec<Mode>, u64> = HashMap::new();
        for e in &enumerated {
            let prev = got.insert(e.tuple.entries().to_vec(), e.multiplicity);
            assert!(prev.is_none(), "duplicate canonical tuple {:?}", e.tuple);
        }
        assert_eq!(got.len(), census.len());
        for (key, count) in &census {
            assert_eq!(got.get(key), Some(count), "tuple {key:?}");
        }
    }

    #[test]
    fn order10_enumeration_matches_cartesian_product_low_band() {
        // Order 10 with j_max = 3 keeps the ordered product at 6^10; the
        // enumerable strata (≤ 1 non-S component) must match the census
        // restricted to those strata. S = (2,3) makes S-heavy tuples
        // plentiful at this tiny band.
        let s = TangentialSet::new(2, 3).unwrap();
        let jm = 3usize;
        let census = cartesian_census(10, jm as Mode);
        let enumerated = enumerate_admissible(
            10,
            &s,
            jm,
            &[TupleClass::Delta0Prime, TupleClass::Delta1Prime],
            None,
        )
        .unwrap();
        let mut got: HashMap<Vec<Mode>, u64> = HashMap::new();
        for e in &enumerated {
            got.insert(e.tuple.entries().to_vec(), e.multiplicity);
        }
        let mut expected = 0usize;
        for (key, count) in &census {
            let t = IndexTuple::new(key.clone()).unwrap();
            if t.non_s_count(&s) <= 1 {
                expected += 1;
                assert_eq!(got.get(key), Some(count), "tuple {key:?}");
            }
        }
        assert_eq!(got.len(), expected);
        assert!(expected > 0);
    }

    #[test]
    fn s_multiset_counts_have_binomial_cardinality() {
        // C(4+k−1, k) multisets of size k from 4 symbols.
        assert_eq!(s_multiset_counts(4).len(), 35);
        assert_eq!(s_multiset_counts(5).len(), 56);
        assert_eq!(s_multiset_counts(9).len(), 220);
        for c in s_multiset_counts(5) {
            assert_eq!(c.iter().sum::<usize>(), 5);
        }
    }

    #[test]
    fn enumeration_allows_window_below_tangential_modes() {
        // j_max bounds only the non-S entries; S-entries may exceed it.
        let s = TangentialSet::new(50, 2500).unwrap();
        let tuples = enumerate_admissible(6, &s, 10, &[TupleClass::Delta1], None).unwrap();
        for e in &tuples {
            assert!(e
                .tuple
                .entries()
                .iter()
                .all(|&j| s.contains(j) || j.unsigned_abs() <= 10));
        }
    }

    #[test]
    fn enumerated_tuples_classify_to_their_label() {
        let s = TangentialSet::new(3, 7).unwrap();
        for label in [TupleClass::Delta0, TupleClass::Delta1, TupleClass::Delta2] {
            for e in enumerate_admissible(6, &s, 35, &[label], None).unwrap() {
                assert_eq!(classify(&e.tuple, &s).unwrap(), label);
                assert_eq!(e.tuple.momentum(), 0);
            }
        }
    }
}
