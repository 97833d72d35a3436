//! Hilbert derivations: axiom recognition, constant specifications and the
//! checking kernel every synthesised proof is routed through.

mod axioms;
mod builder;
mod cs;
pub(crate) mod format;
mod theorem;

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{Formula, SortError, Sort, Term};
use crate::ResourceError;

pub use axioms::{instantiates, is_tautology, match_axiom, AxiomSchema, DEFAULT_TAUT_ATOM_CAP};
pub use builder::DerivationBuilder;
pub use cs::{ConstantSpecification, CsEntry, CsError};
pub use format::{
    parse_cs_table, parse_derivation, parse_derivation_with, print_cs_table, print_derivation,
    FormatError, ParsedDerivation,
};
pub use theorem::{deduction_theorem, DeductionError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// 1-based index into the hypothesis list.
    Hyp(usize),
    Axiom(AxiomSchema),
    /// Major premise `X -> Y` at step `i`, minor premise `X` at step `j`; 1-based.
    MP(usize, usize),
    /// `[c]@s A` from the constant specification.
    AxNec(u32, Sort),
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Hyp(n) => write!(f, "hyp {n}"),
            Rule::Axiom(s) => write!(f, "axiom {s}"),
            Rule::MP(i, j) => write!(f, "mp {i} {j}"),
            Rule::AxNec(c, s) => write!(f, "axnec c{c}@{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub formula: Formula,
    pub rule: Rule,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub hypotheses: Vec<Formula>,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn conclusion(&self) -> Option<&Formula> {
        self.steps.last().map(|s| &s.formula)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Largest variable index of sort `s` in any hypothesis or step.
    pub fn max_var_index(&self, s: Sort) -> u32 {
        self.formulas().map(|f| f.max_var_index(s)).max().unwrap_or(0)
    }

    pub fn max_const_index(&self, s: Sort) -> u32 {
        self.formulas()
            .map(|f| f.max_const_index(s))
            .chain(self.steps.iter().filter_map(|st| match st.rule {
                Rule::AxNec(c, cs) if cs == s => Some(c),
                _ => None,
            }))
            .max()
            .unwrap_or(0)
    }

    fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.hypotheses
            .iter()
            .chain(self.steps.iter().map(|s| &s.formula))
    }

    /// Indices (1-based) of the steps the final step depends on.
    pub fn cone(&self, of: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![of];
        while let Some(k) = stack.pop() {
            if k == 0 || k > self.steps.len() || !seen.insert(k) {
                continue;
            }
            if let Rule::MP(i, j) = self.steps[k - 1].rule {
                stack.push(i);
                stack.push(j);
            }
        }
        seen
    }
}

/// Which part of the calculus the kernel admits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Fragment {
    #[default]
    Full,
    /// Agent terms only and the six schemata that do not mention `E` or `C`.
    SingleAgent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    Empty,
    IllFormed(SortError),
    BadHypIndex(usize),
    HypMismatch(usize),
    NotAnAxiom {
        claimed: AxiomSchema,
        matched: BTreeSet<AxiomSchema>,
    },
    BadMP { major: usize, minor: usize },
    NotInCS { constant: u32, sort: Sort },
    ResourceLimit(ResourceError),
    OutsideFragment,
}

impl RejectReason {
    /// Short status tag for reports.
    pub fn status(&self) -> &'static str {
        match self {
            RejectReason::Empty => "Empty",
            RejectReason::IllFormed(_) => "IllFormed",
            RejectReason::BadHypIndex(_) | RejectReason::HypMismatch(_) => "BadHypIndex",
            RejectReason::NotAnAxiom { .. } => "NotAnAxiom",
            RejectReason::BadMP { .. } => "BadMP",
            RejectReason::NotInCS { .. } => "NotInCS",
            RejectReason::ResourceLimit(_) => "ResourceLimit",
            RejectReason::OutsideFragment => "OutsideFragment",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Empty => f.write_str("derivation has no steps"),
            RejectReason::IllFormed(e) => write!(f, "{e}"),
            RejectReason::BadHypIndex(n) => write!(f, "no hypothesis {n}"),
            RejectReason::HypMismatch(n) => write!(f, "formula differs from hypothesis {n}"),
            RejectReason::NotAnAxiom { claimed, matched } => {
                write!(f, "not an instance of {claimed}")?;
                if !matched.is_empty() {
                    let ids: Vec<_> = matched.iter().map(|s| s.id()).collect();
                    write!(f, " (matches {})", ids.join(", "))?;
                }
                Ok(())
            }
            RejectReason::BadMP { major, minor } => {
                write!(f, "steps {major} and {minor} do not combine by modus ponens")
            }
            RejectReason::NotInCS { constant, sort } => {
                write!(f, "c{constant}@{sort} is not specified for this formula")
            }
            RejectReason::ResourceLimit(e) => write!(f, "{e}"),
            RejectReason::OutsideFragment => f.write_str("outside the single-agent fragment"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based; 0 when the derivation as a whole is at fault.
    pub step: usize,
    pub reason: RejectReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub steps: usize,
    pub outcome: Result<Formula, Rejection>,
}

impl CheckReport {
    pub fn is_accepted(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn conclusion(&self) -> Option<&Formula> {
        self.outcome.as_ref().ok()
    }

    pub fn rejection(&self) -> Option<&Rejection> {
        self.outcome.as_ref().err()
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {} ({})", self.step, self.reason.status(), self.reason)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Ok(c) => write!(f, "accepted ({} steps): {c}", self.steps),
            Err(r) => write!(f, "rejected at {r}"),
        }
    }
}

/// Checking context: the agent count, the tautology cap and the fragment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub h: usize,
    pub taut_atom_cap: usize,
    pub fragment: Fragment,
}

impl Kernel {
    pub fn new(h: usize) -> Self {
        Kernel {
            h,
            taut_atom_cap: DEFAULT_TAUT_ATOM_CAP,
            fragment: Fragment::Full,
        }
    }

    pub fn single_agent(h: usize) -> Self {
        Kernel {
            fragment: Fragment::SingleAgent,
            ..Kernel::new(h)
        }
    }

    pub fn with_cap(self, taut_atom_cap: usize) -> Self {
        Kernel {
            taut_atom_cap,
            ..self
        }
    }

    pub fn match_axiom(&self, a: &Formula) -> BTreeSet<AxiomSchema> {
        let all = match_axiom(a, self.h, self.taut_atom_cap);
        match self.fragment {
            Fragment::Full => all,
            Fragment::SingleAgent => all
                .into_iter()
                .filter(|s| AxiomSchema::SINGLE_AGENT.contains(s))
                .collect(),
        }
    }

    pub fn is_tautology(&self, a: &Formula) -> Result<bool, ResourceError> {
        is_tautology(a, self.taut_atom_cap)
    }

    fn admits(&self, a: &Formula) -> bool {
        self.fragment == Fragment::Full || a.is_single_agent_fragment()
    }

    fn check_step(
        &self,
        d: &Derivation,
        k: usize,
        cs: &ConstantSpecification,
    ) -> Result<(), RejectReason> {
        let step = &d.steps[k - 1];
        let a = &step.formula;
        a.check(self.h).map_err(RejectReason::IllFormed)?;
        if !self.admits(a) {
            return Err(RejectReason::OutsideFragment);
        }
        match &step.rule {
            Rule::Hyp(n) => {
                let hyp = n
                    .checked_sub(1)
                    .and_then(|i| d.hypotheses.get(i))
                    .ok_or(RejectReason::BadHypIndex(*n))?;
                if hyp != a {
                    return Err(RejectReason::HypMismatch(*n));
                }
            }
            Rule::Axiom(schema) => {
                if self.fragment == Fragment::SingleAgent
                    && !AxiomSchema::SINGLE_AGENT.contains(schema)
                {
                    return Err(RejectReason::OutsideFragment);
                }
                let ok = instantiates(*schema, a, self.h, self.taut_atom_cap)
                    .map_err(RejectReason::ResourceLimit)?;
                if !ok {
                    return Err(RejectReason::NotAnAxiom {
                        claimed: *schema,
                        matched: self.match_axiom(a),
                    });
                }
            }
            Rule::MP(i, j) => {
                let bad = RejectReason::BadMP {
                    major: *i,
                    minor: *j,
                };
                if *i == 0 || *j == 0 || *i >= k || *j >= k {
                    return Err(bad);
                }
                let major = &d.steps[i - 1].formula;
                let minor = &d.steps[j - 1].formula;
                match major.as_imp() {
                    Some((x, y)) if x == minor && y == a => {}
                    _ => return Err(bad),
                }
            }
            Rule::AxNec(c, s) => {
                let not_in = RejectReason::NotInCS {
                    constant: *c,
                    sort: *s,
                };
                let Some((Term::Const(c2, s2), s3, body)) = a.as_just() else {
                    return Err(not_in);
                };
                if c2 != c || s2 != s || s3 != *s {
                    return Err(not_in);
                }
                if !cs.contains(self, *c, *s, body) {
                    return Err(not_in);
                }
            }
        }
        Ok(())
    }

    /// Checks every step in order and reports the first failure.
    pub fn check(&self, d: &Derivation, cs: &ConstantSpecification) -> CheckReport {
        let reject = |step, reason| CheckReport {
            steps: d.steps.len(),
            outcome: Err(Rejection { step, reason }),
        };
        if d.steps.is_empty() {
            return reject(0, RejectReason::Empty);
        }
        for h in &d.hypotheses {
            if let Err(e) = h.check(self.h) {
                return reject(0, RejectReason::IllFormed(e));
            }
        }
        for k in 1..=d.steps.len() {
            if let Err(reason) = self.check_step(d, k, cs) {
                return reject(k, reason);
            }
        }
        CheckReport {
            steps: d.steps.len(),
            outcome: Ok(d.steps.last().unwrap().formula.clone()),
        }
    }
}

/// `check` with the default kernel for `h` agents.
pub fn check_derivation(d: &Derivation, cs: &ConstantSpecification, h: usize) -> CheckReport {
    Kernel::new(h).check(d, cs)
}

/// `cs.contains` with the default kernel for `h` agents.
pub fn cs_contains(cs: &ConstantSpecification, c: u32, s: Sort, a: &Formula, h: usize) -> bool {
    cs.contains(&Kernel::new(h), c, s, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s, 2).unwrap()
    }

    fn step(s: &str, rule: Rule) -> Step {
        Step {
            formula: f(s),
            rule,
        }
    }

    #[test]
    fn single_axiom_step() {
        let d = Derivation {
            hypotheses: vec![],
            steps: vec![step("[x1@1]@1 P1 -> P1", Rule::Axiom(AxiomSchema::Refl))],
        };
        assert!(check_derivation(&d, &ConstantSpecification::TotalC, 2).is_accepted());
    }

    #[test]
    fn modus_ponens_over_hypotheses() {
        let d = Derivation {
            hypotheses: vec![f("P1"), f("P1 -> P2")],
            steps: vec![
                step("P1", Rule::Hyp(1)),
                step("P1 -> P2", Rule::Hyp(2)),
                step("P2", Rule::MP(2, 1)),
            ],
        };
        let r = check_derivation(&d, &ConstantSpecification::TotalC, 2);
        assert_eq!(r.conclusion(), Some(&f("P2")));
    }

    #[test]
    fn total_c_rejects_agent_constants() {
        let d = Derivation {
            hypotheses: vec![],
            steps: vec![step("[c1@1]@1 (P1 -> P1)", Rule::AxNec(1, Sort::agent(1)))],
        };
        let r = check_derivation(&d, &ConstantSpecification::TotalC, 2);
        let rej = r.rejection().unwrap();
        assert_eq!(rej.step, 1);
        assert_eq!(rej.reason.status(), "NotInCS");
    }

    #[test]
    fn rejection_statuses() {
        let cs = ConstantSpecification::TotalC;
        let bad_mp = Derivation {
            hypotheses: vec![f("P1"), f("P1 -> P2")],
            steps: vec![
                step("P1", Rule::Hyp(1)),
                step("P1 -> P2", Rule::Hyp(2)),
                step("P2", Rule::MP(1, 2)),
            ],
        };
        assert_eq!(
            check_derivation(&bad_mp, &cs, 2).rejection().unwrap().reason.status(),
            "BadMP"
        );
        let forward = Derivation {
            hypotheses: vec![],
            steps: vec![step("P1", Rule::MP(1, 1))],
        };
        assert_eq!(check_derivation(&forward, &cs, 2).rejection().unwrap().reason.status(), "BadMP");
        let not_axiom = Derivation {
            hypotheses: vec![],
            steps: vec![step("[x1@1]@1 P1 -> P1", Rule::Axiom(AxiomSchema::Taut))],
        };
        let r = check_derivation(&not_axiom, &cs, 2);
        assert_eq!(r.rejection().unwrap().reason.status(), "NotAnAxiom");
        assert!(r.to_string().contains("matches refl"));
        let bad_hyp = Derivation {
            hypotheses: vec![f("P1")],
            steps: vec![step("P1", Rule::Hyp(2))],
        };
        assert_eq!(check_derivation(&bad_hyp, &cs, 2).rejection().unwrap().reason.status(), "BadHypIndex");
        assert_eq!(
            check_derivation(&Derivation::default(), &cs, 2).rejection().unwrap().reason,
            RejectReason::Empty
        );
    }

    #[test]
    fn axnec_under_total_c() {
        let d = Derivation {
            hypotheses: vec![],
            steps: vec![step("[c4@C]@C ([x1@1]@1 P1 -> P1)", Rule::AxNec(4, Sort::C))],
        };
        assert!(check_derivation(&d, &ConstantSpecification::TotalC, 2).is_accepted());
        let wrong_constant = Derivation {
            hypotheses: vec![],
            steps: vec![step("[c4@C]@C ([x1@1]@1 P1 -> P1)", Rule::AxNec(5, Sort::C))],
        };
        assert!(!check_derivation(&wrong_constant, &ConstantSpecification::TotalC, 2).is_accepted());
    }

    #[test]
    fn single_agent_fragment() {
        let k = Kernel::single_agent(2);
        let inside = Derivation {
            hypotheses: vec![],
            steps: vec![step("[x1@1]@1 P1 -> P1", Rule::Axiom(AxiomSchema::Refl))],
        };
        assert!(k.check(&inside, &ConstantSpecification::empty()).is_accepted());
        let outside = Derivation {
            hypotheses: vec![],
            steps: vec![step("[x1@C]@C P1 -> [head(x1@C)]@E P1", Rule::Axiom(AxiomSchema::CoClosHead))],
        };
        let r = k.check(&outside, &ConstantSpecification::empty());
        assert_eq!(r.rejection().unwrap().reason, RejectReason::OutsideFragment);
    }
}
