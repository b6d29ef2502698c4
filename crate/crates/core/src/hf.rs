//! Hereditarily finite sets and the finite stages `V_n`.
//!
//! At finite index the constructible stages coincide with the cumulative
//! hierarchy, so `L_n` is realized here as `V_n`: the sets of rank `< n`.
//! Sets are stored canonically (elements sorted by Ackermann code and
//! deduplicated), which makes extensional equality the same thing as
//! structural equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest stage index that may be enumerated in full (`|V_5| = 65536`).
pub const MAX_ENUMERABLE_STAGE: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HfError {
    #[error("stage {0} exceeds the enumeration budget (max {MAX_ENUMERABLE_STAGE})")]
    StageBudget(u32),
    #[error("ackermann code does not fit in 64 bits")]
    CodeOverflow,
    #[error("malformed set literal at offset {0}")]
    Malformed(usize),
    #[error("definability search exceeded its budget: {0}")]
    DefinabilityBudget(String),
}

/// A hereditarily finite set in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct HFSet(Arc<[HFSet]>);

impl Ord for HFSet {
    /// Ackermann-code order, computed without materializing codes: compare
    /// the largest elements first, like comparing binary numerals from the
    /// top bit down.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        while i > 0 && j > 0 {
            i -= 1;
            j -= 1;
            match a[i].cmp(&b[j]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        i.cmp(&j)
    }
}

impl PartialOrd for HFSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl HFSet {
    pub fn empty() -> Self {
        HFSet(Arc::from(Vec::new()))
    }

    pub fn from_elements<I: IntoIterator<Item = HFSet>>(elements: I) -> Self {
        let mut v: Vec<HFSet> = elements.into_iter().collect();
        v.sort();
        v.dedup();
        HFSet(Arc::from(v))
    }

    pub fn singleton(x: HFSet) -> Self {
        HFSet(Arc::from(vec![x]))
    }

    pub fn pair(x: HFSet, y: HFSet) -> Self {
        HFSet::from_elements([x, y])
    }

    /// Elements in ascending Ackermann order.
    pub fn elements(&self) -> &[HFSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &HFSet) -> bool {
        self.0.binary_search(x).is_ok()
    }

    pub fn is_subset(&self, other: &HFSet) -> bool {
        self.0.iter().all(|x| other.contains(x))
    }

    pub fn union(&self) -> HFSet {
        HFSet::from_elements(self.0.iter().flat_map(|y| y.0.iter().cloned()))
    }

    /// `rank(∅) = 0`, `rank(x) = 1 + max rank of elements`. Rank is monotone
    /// in the canonical order, so the last element carries the maximum.
    pub fn rank(&self) -> u32 {
        match self.0.last() {
            None => 0,
            Some(top) => 1 + top.rank(),
        }
    }

    /// Membership in `V_n`.
    pub fn in_stage(&self, n: u32) -> bool {
        self.rank() < n
    }

    /// The von Neumann ordinal `k = {0, …, k-1}`.
    pub fn ordinal(k: u32) -> HFSet {
        let mut elems: Vec<HFSet> = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let next = HFSet(Arc::from(elems.clone()));
            elems.push(next);
        }
        HFSet(Arc::from(elems))
    }

    /// Returns `k` if this set is the von Neumann ordinal `k`.
    pub fn as_ordinal(&self) -> Option<u32> {
        // The ordinals below k are exactly 0..k, in this order.
        for (i, e) in self.0.iter().enumerate() {
            if e.len() != i || e.as_ordinal() != Some(i as u32) {
                return None;
            }
        }
        Some(self.0.len() as u32)
    }

    /// Ackermann code `Σ_{y∈x} 2^code(y)`.
    pub fn code(&self) -> Result<u64, HfError> {
        let mut acc = 0u64;
        for e in self.0.iter() {
            let c = e.code()?;
            if c >= 64 {
                return Err(HfError::CodeOverflow);
            }
            acc |= 1u64 << c;
        }
        Ok(acc)
    }

    pub fn decode(code: u64) -> HFSet {
        let elems: Vec<HFSet> = (0..64)
            .filter(|bit| code >> bit & 1 == 1)
            .map(HFSet::decode)
            .collect();
        // Bits are visited in increasing order, which is already canonical.
        HFSet(Arc::from(elems))
    }

    /// All subsets, in canonical order.
    pub fn powerset(&self) -> Vec<HFSet> {
        let n = self.len();
        assert!(n < 32, "powerset of a set with {n} elements");
        let mut out: Vec<HFSet> = (0u64..1 << n)
            .map(|mask| {
                HFSet(Arc::from(
                    (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| self.0[i].clone())
                        .collect::<Vec<_>>(),
                ))
            })
            .collect();
        out.sort();
        out
    }
}

/// `|V_n|` for enumerable `n`.
pub fn stage_size(n: u32) -> Result<usize, HfError> {
    match n {
        0 => Ok(0),
        1 => Ok(1),
        2 => Ok(2),
        3 => Ok(4),
        4 => Ok(16),
        5 => Ok(65536),
        _ => Err(HfError::StageBudget(n)),
    }
}

/// The elements of `V_n`, ascending. `V_n` is exactly the sets with code
/// `< |V_n|`, so enumeration is decoding `0..|V_n|`.
pub fn stage_elements(n: u32) -> Result<&'static [HFSet], HfError> {
    static STAGES: OnceLock<Vec<Vec<HFSet>>> = OnceLock::new();
    let size = stage_size(n)?;
    let stages = STAGES.get_or_init(|| {
        (0..=MAX_ENUMERABLE_STAGE)
            .map(|k| {
                let size = stage_size(k).expect("enumerable");
                (0..size as u64).map(HFSet::decode).collect()
            })
            .collect()
    });
    let v = &stages[n as usize];
    debug_assert_eq!(v.len(), size);
    Ok(v)
}

/// `V_n` as a single set (an element of `V_{n+1}`).
pub fn stage_set(n: u32) -> Result<HFSet, HfError> {
    static STAGE_SETS: OnceLock<Vec<HFSet>> = OnceLock::new();
    if n > MAX_ENUMERABLE_STAGE {
        return Err(HfError::StageBudget(n));
    }
    let sets = STAGE_SETS.get_or_init(|| {
        (0..=MAX_ENUMERABLE_STAGE)
            .map(|k| HFSet(Arc::from(stage_elements(k).expect("enumerable").to_vec())))
            .collect()
    });
    Ok(sets[n as usize].clone())
}

/// Largest stage accepted by [`definable_subsets`].
pub const MAX_DEFINABILITY_STAGE: u32 = 3;

/// The subsets of `V_n` of the form `{y ∈ V_n : P(y, p̄)}` for Δ0 formulas
/// `P` with at most `max_size` constructors and parameter tuples `p̄` of
/// length `arity` drawn from `V_n`. Sorted ascending.
pub fn definable_subsets(n: u32, max_size: usize, arity: usize) -> Result<Vec<HFSet>, HfError> {
    use crate::syntax::st::{enumerate_delta0, holds};
    if n > MAX_DEFINABILITY_STAGE {
        return Err(HfError::DefinabilityBudget(format!("stage {n} > {MAX_DEFINABILITY_STAGE}")));
    }
    if arity > 3 {
        return Err(HfError::DefinabilityBudget(format!("arity {arity} > 3")));
    }
    let model = stage_elements(n)?;
    let params: Vec<String> = (0..arity).map(|i| format!("p{i}")).collect();
    let mut vars = vec!["y"];
    vars.extend(params.iter().map(String::as_str));
    let formulas = enumerate_delta0(&vars, max_size);
    let target = 1usize << model.len();
    let mut found = std::collections::BTreeSet::new();
    // V_0 admits no parameter tuples of positive length.
    if model.is_empty() {
        found.insert(HFSet::empty());
    }
    let tuples = tuples(model, arity);
    'outer: for p in &formulas {
        for tuple in &tuples {
            let mut env: Vec<(String, HFSet)> = params.iter().cloned().zip(tuple.iter().cloned()).collect();
            let members = model.iter().filter(|y| {
                env.push(("y".to_string(), (*y).clone()));
                let r = holds(p, &mut env, model);
                env.pop();
                r
            });
            found.insert(HFSet::from_elements(members.cloned().collect::<Vec<_>>()));
            if found.len() == target {
                break 'outer;
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// All tuples of length `k` over `dom`, lexicographic.
pub fn tuples(dom: &[HFSet], k: usize) -> Vec<Vec<HFSet>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                dom.iter().map(move |d| {
                    let mut t = t.clone();
                    t.push(d.clone());
                    t
                })
            })
            .collect();
    }
    out
}

impl fmt::Display for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for HFSet {
    type Err = HfError;

    /// Parses the brace notation `{}`, `{{},{{}}}`; whitespace is ignored and
    /// element order or duplicates in the input do not matter.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes: Vec<(usize, u8)> = s
            .bytes()
            .enumerate()
            .filter(|(_, b)| !b.is_ascii_whitespace())
            .collect();
        let mut pos = 0;
        let set = parse_braces(&bytes, &mut pos)?;
        if pos != bytes.len() {
            return Err(HfError::Malformed(bytes[pos].0));
        }
        Ok(set)
    }
}

fn parse_braces(bytes: &[(usize, u8)], pos: &mut usize) -> Result<HFSet, HfError> {
    let offset = |p: usize| bytes.get(p).map_or(bytes.last().map_or(0, |b| b.0 + 1), |b| b.0);
    if bytes.get(*pos).map(|b| b.1) != Some(b'{') {
        return Err(HfError::Malformed(offset(*pos)));
    }
    *pos += 1;
    let mut elems = Vec::new();
    if bytes.get(*pos).map(|b| b.1) == Some(b'}') {
        *pos += 1;
        return Ok(HFSet::empty());
    }
    loop {
        elems.push(parse_braces(bytes, pos)?);
        match bytes.get(*pos).map(|b| b.1) {
            Some(b',') => *pos += 1,
            Some(b'}') => {
                *pos += 1;
                return Ok(HFSet::from_elements(elems));
            }
            _ => return Err(HfError::Malformed(offset(*pos))),
        }
    }
}

impl Serialize for HFSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for e in self.0.iter() {
            seq.serialize_element(e)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for HFSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SetVisitor;
        impl<'de> Visitor<'de> for SetVisitor {
            type Value = HFSet;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a nested array")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<HFSet, A::Error> {
                let mut v = Vec::new();
                while let Some(e) = seq.next_element::<HFSet>()? {
                    v.push(e);
                }
                Ok(HFSet::from_elements(v))
            }
        }
        deserializer
            .deserialize_seq(SetVisitor)
            .map_err(|e: D::Error| de::Error::custom(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> HFSet {
        text.parse().unwrap()
    }

    #[test]
    fn stage_sizes() {
        let sizes: Vec<usize> = (0..=5).map(|n| stage_elements(n).unwrap().len()).collect();
        assert_eq!(sizes, vec![0, 1, 2, 4, 16, 65536]);
        assert_eq!(stage_elements(6), Err(HfError::StageBudget(6)));
    }

    #[test]
    fn stage_three_listing() {
        let v3: Vec<String> = stage_elements(3).unwrap().iter().map(|x| x.to_string()).collect();
        assert_eq!(v3, vec!["{}", "{{}}", "{{{}}}", "{{},{{}}}"]);
    }

    #[test]
    fn ordinals() {
        assert_eq!(s("{}").as_ordinal(), Some(0));
        assert_eq!(s("{{},{{}}}").as_ordinal(), Some(2));
        assert_eq!(s("{{{}}}").as_ordinal(), None);
        for k in 0..7 {
            assert_eq!(HFSet::ordinal(k).as_ordinal(), Some(k));
            assert_eq!(HFSet::ordinal(k).rank(), k);
        }
    }

    #[test]
    fn codes() {
        assert_eq!(s("{}").code(), Ok(0));
        assert_eq!(s("{{},{{}}}").code(), Ok(3));
        for x in stage_elements(4).unwrap() {
            assert_eq!(&HFSet::decode(x.code().unwrap()), x);
        }
        assert_eq!(HFSet::ordinal(5).code(), Err(HfError::CodeOverflow));
    }

    #[test]
    fn exactly_n_ordinals_per_stage() {
        for n in 0..=5 {
            let ords: Vec<u32> = stage_elements(n)
                .unwrap()
                .iter()
                .filter_map(HFSet::as_ordinal)
                .collect();
            assert_eq!(ords, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn extensional_identity_on_v4() {
        let v4 = stage_elements(4).unwrap();
        for x in v4 {
            for y in v4 {
                let ext = x.is_subset(y) && y.is_subset(x);
                assert_eq!(ext, x == y);
            }
        }
    }

    #[test]
    fn cumulativity() {
        for n in 0..5 {
            let big = stage_set(n + 1).unwrap();
            assert!(stage_elements(n).unwrap().iter().all(|x| big.contains(x)));
        }
    }

    #[test]
    fn parse_is_order_insensitive() {
        assert_eq!(s("{{{}}, {}}"), s("{{},{{}}}"));
        assert_eq!(s("{{},{}}"), s("{{}}"));
        assert!("{".parse::<HFSet>().is_err());
        assert!("{}}".parse::<HFSet>().is_err());
    }

    #[test]
    fn json_is_nested_arrays() {
        let x = s("{{},{{}}}");
        assert_eq!(serde_json::to_string(&x).unwrap(), "[[],[[]]]");
        let back: HFSet = serde_json::from_str("[[[]],[]]").unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn powerset_of_v_n_is_next_stage() {
        for n in 0..4 {
            let pw = stage_set(n).unwrap().powerset();
            assert_eq!(pw, stage_elements(n + 1).unwrap().to_vec());
        }
    }

    #[test]
    fn definable_subsets_small_stages() {
        assert_eq!(definable_subsets(0, 3, 2).unwrap(), vec![HFSet::empty()]);
        let v2 = stage_set(2).unwrap().powerset();
        assert_eq!(definable_subsets(2, 3, 1).unwrap(), v2);
        assert!(definable_subsets(4, 1, 0).is_err());
    }
}
