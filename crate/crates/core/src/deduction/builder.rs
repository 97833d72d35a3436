//! Incremental construction of derivations with formula-level sharing.

use std::collections::HashMap;

use super::{AxiomSchema, Derivation, Rule, Step};
use crate::syntax::{Formula, Sort, Term};

/// Appends steps, reusing any step that already proves the same formula.
///
/// The builder does not check anything; callers run the kernel on the result.
#[derive(Clone, Debug, Default)]
pub struct DerivationBuilder {
    hypotheses: Vec<Formula>,
    steps: Vec<Step>,
    proven: HashMap<Formula, usize>,
}

impl DerivationBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_hypotheses(hypotheses: Vec<Formula>) -> Self {
        DerivationBuilder {
            hypotheses,
            ..Self::default()
        }
    }

    /// Formula proved at 1-based step `k`.
    pub fn formula(&self, k: usize) -> &Formula {
        &self.steps[k - 1].formula
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn push(&mut self, formula: Formula, rule: Rule) -> usize {
        if let Some(&k) = self.proven.get(&formula) {
            return k;
        }
        self.steps.push(Step {
            formula: formula.clone(),
            rule,
        });
        let k = self.steps.len();
        self.proven.insert(formula, k);
        k
    }

    /// Cites `a` as a hypothesis, adding it to the list when new.
    pub fn hyp(&mut self, a: Formula) -> usize {
        let n = match self.hypotheses.iter().position(|h| *h == a) {
            Some(i) => i + 1,
            None => {
                self.hypotheses.push(a.clone());
                self.hypotheses.len()
            }
        };
        self.push(a, Rule::Hyp(n))
    }

    pub fn axiom(&mut self, a: Formula, schema: AxiomSchema) -> usize {
        self.push(a, Rule::Axiom(schema))
    }

    pub fn taut(&mut self, a: Formula) -> usize {
        self.axiom(a, AxiomSchema::Taut)
    }

    /// `[c]@s body` by axiom necessitation.
    pub fn axnec(&mut self, c: u32, s: Sort, body: Formula) -> usize {
        let a = Formula::just(Term::constant(c, s), body);
        self.push(a, Rule::AxNec(c, s))
    }

    /// Panics if step `major` is not an implication whose antecedent is proved at `minor`.
    pub fn mp(&mut self, major: usize, minor: usize) -> usize {
        let (x, y) = self
            .formula(major)
            .as_imp()
            .unwrap_or_else(|| panic!("step {major} is not an implication"));
        assert!(
            x == self.formula(minor),
            "antecedent of step {major} is not proved at step {minor}"
        );
        let y = y.clone();
        self.push(y, Rule::MP(major, minor))
    }

    /// Proves `concl` from the given steps with one tautology
    /// `p1 -> ... -> pn -> concl` and `n` applications of modus ponens.
    pub fn glue(&mut self, premises: &[usize], concl: Formula) -> usize {
        let ps: Vec<Formula> = premises.iter().map(|k| self.formula(*k).clone()).collect();
        let mut cur = self.taut(Formula::imp_chain(&ps, concl));
        for p in premises {
            cur = self.mp(cur, *p);
        }
        cur
    }

    /// From `A -> B` and `B -> C` derives `A -> C`.
    pub fn chain(&mut self, ab: usize, bc: usize) -> usize {
        let (a, _) = self.formula(ab).as_imp().expect("chain needs implications");
        let (_, c) = self.formula(bc).as_imp().expect("chain needs implications");
        let concl = Formula::imp(a.clone(), c.clone());
        self.glue(&[ab, bc], concl)
    }

    /// Replays `d`, mapping its hypotheses by formula. Returns the step proving its conclusion.
    pub fn include(&mut self, d: &Derivation) -> usize {
        let mut map = Vec::with_capacity(d.steps.len());
        for step in &d.steps {
            let k = match &step.rule {
                Rule::Hyp(n) => self.hyp(d.hypotheses[n - 1].clone()),
                Rule::Axiom(s) => self.axiom(step.formula.clone(), *s),
                Rule::MP(i, j) => self.mp(map[i - 1], map[j - 1]),
                Rule::AxNec(c, s) => self.push(step.formula.clone(), Rule::AxNec(*c, *s)),
            };
            map.push(k);
        }
        *map.last().expect("included derivation is empty")
    }

    /// The steps `target` depends on, renumbered, ending with `target`.
    pub fn finish(self, target: usize) -> Derivation {
        let full = Derivation {
            hypotheses: self.hypotheses,
            steps: self.steps,
        };
        let cone = full.cone(target);
        let mut renumber = vec![0; full.steps.len() + 1];
        let mut steps = Vec::with_capacity(cone.len());
        for &k in &cone {
            let old = &full.steps[k - 1];
            let rule = match old.rule {
                Rule::MP(i, j) => Rule::MP(renumber[i], renumber[j]),
                ref r => r.clone(),
            };
            steps.push(Step {
                formula: old.formula.clone(),
                rule,
            });
            renumber[k] = steps.len();
        }
        Derivation {
            hypotheses: full.hypotheses,
            steps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{check_derivation, ConstantSpecification};
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s, 1).unwrap()
    }

    #[test]
    fn glue_and_trim() {
        let mut b = DerivationBuilder::new();
        let p = b.hyp(f("P1"));
        let _unused = b.taut(f("P3 -> P3"));
        let pq = b.hyp(f("P1 -> P2"));
        let q = b.glue(&[p, pq], f("P2"));
        let d = b.finish(q);
        assert_eq!(d.conclusion(), Some(&f("P2")));
        assert!(d.steps.iter().all(|s| s.formula != f("P3 -> P3")));
        assert!(check_derivation(&d, &ConstantSpecification::empty(), 1).is_accepted());
    }

    #[test]
    fn repeated_formulas_share_a_step() {
        let mut b = DerivationBuilder::new();
        let a = b.taut(f("P1 -> P1"));
        let a2 = b.taut(f("P1 -> P1"));
        assert_eq!(a, a2);
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn chain_composes() {
        let mut b = DerivationBuilder::new();
        let ab = b.hyp(f("P1 -> P2"));
        let bc = b.hyp(f("P2 -> P3"));
        let ac = b.chain(ab, bc);
        let d = b.finish(ac);
        assert_eq!(d.conclusion(), Some(&f("P1 -> P3")));
        assert!(check_derivation(&d, &ConstantSpecification::empty(), 1).is_accepted());
    }
}
