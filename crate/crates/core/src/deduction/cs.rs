//! Constant specifications.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::Kernel;
use crate::syntax::{Formula, Sort};

/// One member `[c]@s A` of an extensional specification.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CsEntry {
    pub constant: u32,
    pub sort: Sort,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("`[c{constant}@{sort}]@{sort} {formula}` is not an axiom instance")]
pub struct CsError {
    pub constant: u32,
    pub sort: Sort,
    pub formula: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstantSpecification {
    /// A finite set of members.
    Extensional(BTreeSet<CsEntry>),
    /// Every `[c]@C A` with `A` an axiom.
    TotalC,
    /// A table of `C`-constants, one per axiom, as handed out by an allocator.
    Allocated(BTreeMap<u32, Formula>),
}

impl ConstantSpecification {
    pub fn empty() -> Self {
        ConstantSpecification::Extensional(BTreeSet::new())
    }

    /// Builds an extensional specification, rejecting members that are not axioms.
    pub fn extensional(
        entries: impl IntoIterator<Item = CsEntry>,
        kernel: &Kernel,
    ) -> Result<Self, CsError> {
        let set: BTreeSet<CsEntry> = entries.into_iter().collect();
        for e in &set {
            if kernel.match_axiom(&e.formula).is_empty() {
                return Err(CsError {
                    constant: e.constant,
                    sort: e.sort,
                    formula: e.formula.to_string(),
                });
            }
        }
        Ok(ConstantSpecification::Extensional(set))
    }

    /// For sets whose members need not be axioms, such as the image of a
    /// specification under the conservativity translation.
    pub fn extensional_unchecked(entries: impl IntoIterator<Item = CsEntry>) -> Self {
        ConstantSpecification::Extensional(entries.into_iter().collect())
    }

    pub fn contains(&self, kernel: &Kernel, c: u32, s: Sort, a: &Formula) -> bool {
        match self {
            ConstantSpecification::Extensional(set) => set.contains(&CsEntry {
                constant: c,
                sort: s,
                formula: a.clone(),
            }),
            ConstantSpecification::TotalC => s == Sort::C && !kernel.match_axiom(a).is_empty(),
            ConstantSpecification::Allocated(table) => {
                s == Sort::C && table.get(&c).is_some_and(|f| f == a)
            }
        }
    }

    /// Every axiom has some `C`-constant for it. Finite tables qualify when
    /// they are allocator-backed, since the allocator extends them on demand.
    pub fn is_c_axiomatically_appropriate(&self) -> bool {
        !matches!(self, ConstantSpecification::Extensional(_))
    }

    /// The one sort shared by all members, if there is one.
    pub fn pure_sort(&self) -> Option<Sort> {
        match self {
            ConstantSpecification::TotalC | ConstantSpecification::Allocated(_) => Some(Sort::C),
            ConstantSpecification::Extensional(set) => {
                let mut sorts = set.iter().map(|e| e.sort);
                let first = sorts.next()?;
                sorts.all(|s| s == first).then_some(first)
            }
        }
    }

    /// Members as `(constant, sort, formula)` when the set is finite.
    pub fn entries(&self) -> Option<Vec<CsEntry>> {
        match self {
            ConstantSpecification::TotalC => None,
            ConstantSpecification::Extensional(set) => Some(set.iter().cloned().collect()),
            ConstantSpecification::Allocated(table) => Some(
                table
                    .iter()
                    .map(|(c, f)| CsEntry {
                        constant: *c,
                        sort: Sort::C,
                        formula: f.clone(),
                    })
                    .collect(),
            ),
        }
    }

    /// Formulas some constant `c@s` is specified for, or `None` when the
    /// answer is "every axiom".
    pub fn formulas_for(&self, c: u32, s: Sort) -> Option<Vec<Formula>> {
        match self {
            ConstantSpecification::TotalC => None,
            ConstantSpecification::Extensional(set) => Some(
                set.iter()
                    .filter(|e| e.constant == c && e.sort == s)
                    .map(|e| e.formula.clone())
                    .collect(),
            ),
            ConstantSpecification::Allocated(table) => Some(
                table
                    .get(&c)
                    .filter(|_| s == Sort::C)
                    .cloned()
                    .into_iter()
                    .collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn total_c_membership() {
        let k = Kernel::new(2);
        let a = parse_formula("[x1@1]@1 P1 -> P1", 2).unwrap();
        let cs = ConstantSpecification::TotalC;
        assert!(cs.contains(&k, 1, Sort::C, &a));
        assert!(!cs.contains(&k, 1, Sort::agent(1), &a));
        assert!(!cs.contains(&k, 1, Sort::C, &parse_formula("P1", 2).unwrap()));
        assert!(cs.is_c_axiomatically_appropriate());
        assert_eq!(cs.pure_sort(), Some(Sort::C));
    }

    #[test]
    fn extensional_membership() {
        let k = Kernel::new(2);
        let a0 = parse_formula("P1 -> P1", 2).unwrap();
        let entry = CsEntry {
            constant: 2,
            sort: Sort::C,
            formula: a0.clone(),
        };
        let cs = ConstantSpecification::extensional([entry], &k).unwrap();
        assert!(cs.contains(&k, 2, Sort::C, &a0));
        assert!(!cs.contains(&k, 3, Sort::C, &a0));
        assert!(!cs.is_c_axiomatically_appropriate());
        let bad = CsEntry {
            constant: 1,
            sort: Sort::C,
            formula: parse_formula("P1", 2).unwrap(),
        };
        assert!(ConstantSpecification::extensional([bad], &k).is_err());
    }

    #[test]
    fn mixed_sorts_are_impure() {
        let a0 = parse_formula("P1 -> P1", 2).unwrap();
        let cs = ConstantSpecification::extensional_unchecked([
            CsEntry { constant: 1, sort: Sort::C, formula: a0.clone() },
            CsEntry { constant: 1, sort: Sort::agent(1), formula: a0 },
        ]);
        assert_eq!(cs.pure_sort(), None);
    }
}
