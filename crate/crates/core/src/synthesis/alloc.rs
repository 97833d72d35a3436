//! Memoising allocation of `C`-constants for axiom instances.

use std::collections::{BTreeMap, HashMap};

use crate::deduction::{ConstantSpecification, Derivation};
use crate::syntax::{Formula, Sort};

/// Hands out one `C`-constant per axiom, in first-request order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantAllocator {
    memo: HashMap<Formula, u32>,
    table: BTreeMap<u32, Formula>,
    next_index: u32,
}

impl Default for ConstantAllocator {
    fn default() -> Self {
        ConstantAllocator {
            memo: HashMap::new(),
            table: BTreeMap::new(),
            next_index: 1,
        }
    }
}

impl ConstantAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Continues an existing allocator table.
    pub fn from_table(table: &BTreeMap<u32, Formula>) -> Self {
        let mut a = Self::new();
        for (c, f) in table {
            a.adopt(*c, f.clone());
        }
        a
    }

    /// Records `[c]@C a` as already allocated. Later requests for `a` reuse `c`.
    pub fn adopt(&mut self, c: u32, a: Formula) {
        self.memo.entry(a.clone()).or_insert(c);
        self.table.insert(c, a);
        self.next_index = self.next_index.max(c + 1);
    }

    /// Keeps future constants clear of indices already in use.
    pub fn avoid_index(&mut self, used: u32) {
        self.next_index = self.next_index.max(used + 1);
    }

    pub fn avoid_formula(&mut self, a: &Formula) {
        self.avoid_index(a.max_const_index(Sort::C));
    }

    pub fn avoid_derivation(&mut self, d: &Derivation) {
        self.avoid_index(d.max_const_index(Sort::C));
    }

    /// The constant for axiom `a`, allocating the next free index on first use.
    /// The caller guarantees `a` is an axiom instance.
    pub fn constant_for(&mut self, a: &Formula) -> u32 {
        if let Some(&c) = self.memo.get(a) {
            return c;
        }
        let c = self.next_index;
        self.adopt(c, a.clone());
        c
    }

    pub fn next_index(&self) -> u32 {
        self.next_index
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn table(&self) -> &BTreeMap<u32, Formula> {
        &self.table
    }

    /// An independent copy for a parallel shard.
    pub fn snapshot(&self) -> Self {
        self.clone()
    }

    pub fn spec(&self) -> ConstantSpecification {
        ConstantSpecification::Allocated(self.table.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn memoised_and_injective() {
        let mut a = ConstantAllocator::new();
        let x = parse_formula("P1 -> P1", 1).unwrap();
        let y = parse_formula("P2 -> P2", 1).unwrap();
        assert_eq!(a.constant_for(&x), 1);
        assert_eq!(a.constant_for(&y), 2);
        assert_eq!(a.constant_for(&x), 1);
        assert_eq!(a.len(), 2);
        let cs = a.spec();
        assert!(cs.is_c_axiomatically_appropriate());
        assert_eq!(cs.pure_sort(), Some(Sort::C));
    }

    #[test]
    fn avoids_used_indices() {
        let mut a = ConstantAllocator::new();
        a.avoid_formula(&parse_formula("[c5@C]@C P1", 1).unwrap());
        assert_eq!(a.constant_for(&parse_formula("P1 -> P1", 1).unwrap()), 6);
    }

    #[test]
    fn snapshot_is_independent() {
        let mut a = ConstantAllocator::new();
        a.constant_for(&parse_formula("P1 -> P1", 1).unwrap());
        let mut b = a.snapshot();
        b.constant_for(&parse_formula("P2 -> P2", 1).unwrap());
        assert_eq!(a.len(), 1);
        assert_eq!(b.len(), 2);
    }
}
