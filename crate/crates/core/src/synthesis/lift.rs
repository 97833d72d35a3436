//! Lifting derivations under evidence, and the operations built on it.

use std::collections::{BTreeMap, BTreeSet};

use super::{Synth, SynthError};
use crate::deduction::{AxiomSchema, Derivation, DerivationBuilder, Rule};
use crate::syntax::{Formula, Sort, Term};

/// How the hypotheses of a derivation are treated by `lift`: boxed ones
/// `[s]@C B` keep their evidence, plain ones get a fresh variable each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftingContext {
    pub c_hypotheses: Vec<(Term, Formula)>,
    pub plain_hypotheses: Vec<Formula>,
    used_vars: BTreeMap<Sort, BTreeSet<u32>>,
}

fn collect_vars(a: &Formula, out: &mut BTreeMap<Sort, BTreeSet<u32>>) {
    for t in a.terms() {
        t.visit(&mut |u| {
            if let Term::Var(k, s) = u {
                out.entry(*s).or_default().insert(*k);
            }
        });
    }
}

impl LiftingContext {
    /// Every hypothesis of the form `[s]@C B` is boxed, the rest are plain.
    pub fn infer(d: &Derivation) -> Self {
        let mut ctx = Self::all_plain(d);
        ctx.plain_hypotheses.clear();
        for h in &d.hypotheses {
            match h.as_just() {
                Some((s, Sort::C, b)) => ctx.c_hypotheses.push((s.clone(), b.clone())),
                _ => ctx.plain_hypotheses.push(h.clone()),
            }
        }
        ctx
    }

    /// Treats every hypothesis as plain.
    pub fn all_plain(d: &Derivation) -> Self {
        let mut used_vars = BTreeMap::new();
        for f in d.hypotheses.iter().chain(d.steps.iter().map(|s| &s.formula)) {
            collect_vars(f, &mut used_vars);
        }
        LiftingContext {
            c_hypotheses: Vec::new(),
            plain_hypotheses: d.hypotheses.clone(),
            used_vars,
        }
    }

    /// The smallest variable index of sort `s` not used so far.
    pub fn fresh(&mut self, s: Sort) -> Term {
        let used = self.used_vars.entry(s).or_default();
        let k = (1..).find(|k| !used.contains(k)).unwrap();
        used.insert(k);
        Term::var(k, s)
    }

    fn boxed(&self) -> BTreeSet<Formula> {
        self.c_hypotheses
            .iter()
            .map(|(s, b)| Formula::just(s.clone(), b.clone()))
            .collect()
    }
}

/// Result of lifting: the term, its derivation, and the fresh variable
/// chosen for each plain hypothesis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lifted {
    pub term: Term,
    pub derivation: Derivation,
    pub fresh: Vec<Term>,
}

impl Synth {
    /// Proves `[!_C s]@C [s]@C B` (or the `target`-sorted variant) from a
    /// step `k` proving `[s]@C B`.
    fn lift_boxed(
        &mut self,
        b: &mut DerivationBuilder,
        k: usize,
        target: Sort,
    ) -> (Term, usize) {
        let x = b.formula(k).clone();
        let (s, _, body) = x.as_just().expect("boxed hypothesis");
        let (s, body) = (s.clone(), body.clone());
        match target {
            Sort::C => {
                let (bang, ins) = self.c_insp_into(b, &s, &body);
                (bang, b.mp(ins, k))
            }
            Sort::Agent(i) => {
                let (bang, ins) = self.c_insp_into(b, &s, &body);
                let lifted = b.mp(ins, k);
                let (d, conv) = self.i_conv_into(b, &bang, i, &x);
                (d, b.mp(conv, lifted))
            }
            Sort::E => {
                let tail = Term::tail(s);
                let ax = b.axiom(
                    Formula::imp(x.clone(), Formula::just(tail.clone(), x)),
                    AxiomSchema::CoClosTail,
                );
                (tail, b.mp(ax, k))
            }
        }
    }

    /// Lifts `d` to a derivation of `[t]@target A` where `A` is its conclusion.
    pub fn lift(
        &mut self,
        d: &Derivation,
        target: Sort,
        ctx: &LiftingContext,
    ) -> Result<Lifted, SynthError> {
        self.accepted(d)?;
        if let Sort::Agent(i) = target {
            if i.index() as usize > self.h() {
                return Err(SynthError::InvalidInput(format!("agent {i} is outside 1..{}", self.h())));
            }
        }
        for (s, b) in &ctx.c_hypotheses {
            self.check_term(s, Sort::C)?;
            self.check_formula(b)?;
        }
        let mut ctx = ctx.clone();
        let boxed = ctx.boxed();
        // Decide each hypothesis' role and pick fresh variables up front.
        let plains = ctx.plain_hypotheses.clone();
        let mut plain_var: BTreeMap<&Formula, Term> = BTreeMap::new();
        let mut fresh = Vec::new();
        for c in &plains {
            let y = ctx.fresh(target);
            fresh.push(y.clone());
            plain_var.entry(c).or_insert(y);
        }
        for h in &d.hypotheses {
            if !boxed.contains(h) && !plain_var.contains_key(h) {
                return Err(SynthError::InvalidInput(format!(
                    "hypothesis `{h}` is neither a declared boxed nor a plain hypothesis"
                )));
            }
        }
        // boxed hypotheses first, then [y_k]@target C_k
        let mut hyps: Vec<Formula> = Vec::new();
        for (s, bf) in &ctx.c_hypotheses {
            let h = Formula::just(s.clone(), bf.clone());
            if !hyps.contains(&h) {
                hyps.push(h);
            }
        }
        for (c, y) in plains.iter().zip(&fresh) {
            hyps.push(Formula::just(y.clone(), c.clone()));
        }
        let mut b = DerivationBuilder::with_hypotheses(hyps);

        let conclusion_at = d.len();
        let cone = d.cone(conclusion_at);
        let mut lifted: BTreeMap<usize, (Term, usize)> = BTreeMap::new();
        for &k in &cone {
            let step = &d.steps[k - 1];
            let a = &step.formula;
            let out = match &step.rule {
                Rule::Axiom(_) => {
                    let (c, nec) = self.necessitate_axiom(&mut b, a);
                    let c_term = Term::constant(c, Sort::C);
                    match target {
                        Sort::C => (c_term, nec),
                        Sort::Agent(i) => {
                            let (dn, conv) = self.i_conv_into(&mut b, &c_term, i, a);
                            (dn, b.mp(conv, nec))
                        }
                        Sort::E => {
                            let hd = Term::head(c_term);
                            let ax = b.axiom(
                                Formula::imp(b.formula(nec).clone(), Formula::just(hd.clone(), a.clone())),
                                AxiomSchema::CoClosHead,
                            );
                            (hd, b.mp(ax, nec))
                        }
                    }
                }
                Rule::Hyp(n) => {
                    let h = &d.hypotheses[n - 1];
                    if boxed.contains(h) {
                        let k = b.hyp(h.clone());
                        self.lift_boxed(&mut b, k, target)
                    } else {
                        let y = plain_var[h].clone();
                        let k = b.hyp(Formula::just(y.clone(), h.clone()));
                        (y, k)
                    }
                }
                Rule::AxNec(c, s) => {
                    if *s != Sort::C {
                        return Err(SynthError::Precondition);
                    }
                    let (_, _, body) = a.as_just().expect("checked AxNec step");
                    let k = b.axnec(*c, Sort::C, body.clone());
                    self.lift_boxed(&mut b, k, target)
                }
                Rule::MP(i, j) => {
                    let (r, ri) = lifted[i].clone();
                    let (s, sj) = lifted[j].clone();
                    let minor = &d.steps[j - 1].formula;
                    match target {
                        Sort::E => {
                            let (u, app) = self.e_app_into(&mut b, &r, &s, minor, a);
                            let half = b.mp(app, ri);
                            (u, b.mp(half, sj))
                        }
                        star => {
                            let u = Term::app(r, s, star);
                            let ax = b.axiom(
                                Formula::imp(
                                    b.formula(ri).clone(),
                                    Formula::imp(b.formula(sj).clone(), Formula::just(u.clone(), a.clone())),
                                ),
                                AxiomSchema::App,
                            );
                            let half = b.mp(ax, ri);
                            (u, b.mp(half, sj))
                        }
                    }
                }
            };
            lifted.insert(k, out);
        }
        let (term, k) = lifted[&conclusion_at].clone();
        let derivation = self.certify(b.finish(k))?;
        Ok(Lifted {
            term,
            derivation,
            fresh,
        })
    }

    /// A ground term `t` with a hypothesis-free derivation of `[t]@target A`.
    pub fn necessitate(&mut self, d: &Derivation, target: Sort) -> Result<(Term, Derivation), SynthError> {
        if !d.hypotheses.is_empty() {
            return Err(SynthError::InvalidInput("necessitation needs a hypothesis-free derivation".into()));
        }
        let ctx = LiftingContext::all_plain(d);
        let l = self.lift(d, target, &ctx)?;
        Ok((l.term, l.derivation))
    }

    /// From `⊢ A -> [s]@E A` derives `⊢ A -> [ind(t, s)]@C A`; returns `t`.
    pub fn internalize_induction_1(&mut self, d: &Derivation) -> Result<(Term, Derivation), SynthError> {
        let (a, s) = induction_premise(d)?;
        let mut b = DerivationBuilder::new();
        let (t, k) = self.induct1_into(&mut b, d, &a, &s)?;
        Ok((t, self.certify(b.finish(k))?))
    }

    fn induct1_into(
        &mut self,
        b: &mut DerivationBuilder,
        d: &Derivation,
        a: &Formula,
        s: &Term,
    ) -> Result<(Term, usize), SynthError> {
        let (t, nd) = self.necessitate(d, Sort::C)?;
        let nec = b.include(&nd);
        let ind = Term::ind(t.clone(), s.clone());
        let target = Formula::just(ind, a.clone());
        let ax = b.axiom(
            Formula::imp(Formula::and(a.clone(), b.formula(nec).clone()), target.clone()),
            AxiomSchema::Induction,
        );
        Ok((t, b.glue(&[nec, ax], Formula::imp(a.clone(), target))))
    }

    /// From `⊢ B -> [s]@E (A & B)` derives `⊢ B -> [c * ind(t, s)]@C A`
    /// where `c` is the constant for `A & B -> A`; returns `(t, c)`.
    pub fn internalize_induction_2(
        &mut self,
        d: &Derivation,
    ) -> Result<(Term, u32, Derivation), SynthError> {
        self.accepted(d)?;
        if !d.hypotheses.is_empty() {
            return Err(SynthError::InvalidInput("induction needs a hypothesis-free derivation".into()));
        }
        let concl = d.conclusion().expect("accepted derivations are nonempty");
        let shape = || SynthError::InvalidInput(format!("`{concl}` is not of the form B -> [s]@E (A & B)"));
        let (bf, boxed) = concl.as_imp().ok_or_else(shape)?;
        let (s, sort, ab) = boxed.as_just().ok_or_else(shape)?;
        let Formula::And(a, b2) = ab else { return Err(shape()) };
        if sort != Sort::E || **b2 != *bf {
            return Err(shape());
        }
        let (a, bf, s) = ((**a).clone(), bf.clone(), s.clone());

        // A & B -> [s]@E (A & B)
        let mut w = DerivationBuilder::new();
        let dk = w.include(d);
        let weak = w.glue(&[dk], Formula::imp(ab.clone(), boxed.clone()));
        let weakened = w.finish(weak);

        let mut b = DerivationBuilder::new();
        let (t, ind_k) = self.induct1_into(&mut b, &weakened, ab, &s)?;
        let ind = Term::ind(t.clone(), s.clone());
        let proj = Formula::imp(ab.clone(), a.clone());
        let (c, nec) = self.necessitate_axiom(&mut b, &proj);
        let u = Term::app(Term::constant(c, Sort::C), ind.clone(), Sort::C);
        let u_a = Formula::just(u, a.clone());
        let app = b.axiom(
            Formula::imp(
                b.formula(nec).clone(),
                Formula::imp(Formula::just(ind, ab.clone()), u_a.clone()),
            ),
            AxiomSchema::App,
        );
        let from_ab = b.glue(&[ind_k, nec, app], Formula::imp(ab.clone(), u_a.clone()));
        let refl = self.e_refl_into(&mut b, &s, ab);
        let dk = b.include(d);
        let b_to_ab = b.chain(dk, refl);
        let last = b.chain(b_to_ab, from_ab);
        debug_assert_eq!(*b.formula(last), Formula::imp(bf, u_a));
        Ok((t, c, self.certify(b.finish(last))?))
    }
}

fn induction_premise(d: &Derivation) -> Result<(Formula, Term), SynthError> {
    let concl = d
        .conclusion()
        .ok_or_else(|| SynthError::InvalidInput("empty derivation".into()))?;
    let shape = || SynthError::InvalidInput(format!("`{concl}` is not of the form A -> [s]@E A"));
    let (a, boxed) = concl.as_imp().ok_or_else(shape)?;
    match boxed.as_just() {
        Some((s, Sort::E, a2)) if a2 == a => Ok((a.clone(), s.clone())),
        _ => Err(shape()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{ConstantSpecification, Kernel, Step};
    use crate::syntax::{parse_formula, Agent};

    fn f(s: &str) -> Formula {
        parse_formula(s, 2).unwrap()
    }

    fn axiom(s: &str, schema: AxiomSchema) -> Derivation {
        Derivation {
            hypotheses: vec![],
            steps: vec![Step { formula: f(s), rule: Rule::Axiom(schema) }],
        }
    }

    #[test]
    fn axiom_case_per_target() {
        let d = axiom("[x1@1]@1 P1 -> P1", AxiomSchema::Refl);
        let mut sy = Synth::new(2);
        let (c, dc) = sy.necessitate(&d, Sort::C).unwrap();
        assert_eq!(c, Term::constant(1, Sort::C));
        assert_eq!(dc.len(), 1);
        assert_eq!(dc.steps[0].rule, Rule::AxNec(1, Sort::C));
        let (e, _) = sy.necessitate(&d, Sort::E).unwrap();
        assert_eq!(e, Term::head(c.clone()));
        let (i, _) = sy.necessitate(&d, Sort::agent(2)).unwrap();
        assert_eq!(i, super::super::down(Agent::new(2), c));
        assert!(e.is_ground() && i.is_ground());
    }

    #[test]
    fn plain_hypothesis_gets_fresh_variable() {
        let d = Derivation {
            hypotheses: vec![f("P1 -> [x1@1]@1 P2")],
            steps: vec![Step { formula: f("P1 -> [x1@1]@1 P2"), rule: Rule::Hyp(1) }],
        };
        let mut sy = Synth::new(2);
        let ctx = LiftingContext::infer(&d);
        let l = sy.lift(&d, Sort::agent(1), &ctx).unwrap();
        assert_eq!(l.term.to_string(), "x2@1");
        assert_eq!(l.derivation.hypotheses, vec![f("[x2@1]@1 (P1 -> [x1@1]@1 P2)")]);
    }

    #[test]
    fn boxed_hypothesis_case() {
        let d = Derivation {
            hypotheses: vec![f("[x1@C]@C P1")],
            steps: vec![Step { formula: f("[x1@C]@C P1"), rule: Rule::Hyp(1) }],
        };
        let ctx = LiftingContext::infer(&d);
        let mut sy = Synth::new(2);
        let l = sy.lift(&d, Sort::E, &ctx).unwrap();
        assert_eq!(l.term.to_string(), "tail(x1@C)");
        let l = sy.lift(&d, Sort::C, &ctx).unwrap();
        assert_eq!(l.term.to_string(), "ind(c1@C, tail(x1@C))");
        let l = sy.lift(&d, Sort::agent(1), &ctx).unwrap();
        assert_eq!(l.term.to_string(), "pi_1(head(ind(c1@C, tail(x1@C))))");
    }

    #[test]
    fn modus_ponens_lift_to_e() {
        // P1 -> P1 by taut, then [x1@1]@1 P1 -> P1 by refl; MP over a weakening
        let mut b = DerivationBuilder::new();
        let r = b.axiom(f("[x1@1]@1 P1 -> P1"), AxiomSchema::Refl);
        let w = b.taut(f("([x1@1]@1 P1 -> P1) -> P2 -> [x1@1]@1 P1 -> P1"));
        let k = b.mp(w, r);
        let d = b.finish(k);
        for target in Sort::all(2) {
            let mut sy = Synth::new(2);
            let (t, out) = sy.necessitate(&d, target).unwrap();
            assert_eq!(sort_of_t(&t), target);
            assert_eq!(*out.conclusion().unwrap(), Formula::just(t, d.conclusion().unwrap().clone()));
        }
    }

    fn sort_of_t(t: &Term) -> Sort {
        crate::syntax::sort_of(t, 2).unwrap()
    }

    #[test]
    fn axnec_case() {
        let d = Derivation {
            hypotheses: vec![],
            steps: vec![Step { formula: f("[c1@C]@C (P1 -> P1)"), rule: Rule::AxNec(1, Sort::C) }],
        };
        let mut sy = Synth::total_c(2);
        let (t, out) = sy.necessitate(&d, Sort::C).unwrap();
        assert!(matches!(t, Term::Ind(..)));
        assert!(Kernel::new(2).check(&out, &ConstantSpecification::TotalC).is_accepted());
        let (t, _) = sy.necessitate(&d, Sort::E).unwrap();
        assert_eq!(t.to_string(), "tail(c1@C)");
    }

    #[test]
    fn rejects_undeclared_hypotheses() {
        let d = Derivation {
            hypotheses: vec![f("P1")],
            steps: vec![Step { formula: f("P1"), rule: Rule::Hyp(1) }],
        };
        let mut ctx = LiftingContext::infer(&d);
        ctx.plain_hypotheses.clear();
        let mut sy = Synth::new(2);
        assert!(matches!(sy.lift(&d, Sort::C, &ctx), Err(SynthError::InvalidInput(_))));
        assert!(matches!(sy.necessitate(&d, Sort::C), Err(SynthError::InvalidInput(_))));
    }

    #[test]
    fn induction_rules() {
        // ⊢ [x1@C]@C P1 -> [tail(x1@C)]@E [x1@C]@C P1, an instance of A -> [s]@E A
        let d = axiom("[x1@C]@C P1 -> [tail(x1@C)]@E [x1@C]@C P1", AxiomSchema::CoClosTail);
        let mut sy = Synth::new(2);
        let (t, out) = sy.internalize_induction_1(&d).unwrap();
        assert!(t.is_ground());
        assert_eq!(
            out.conclusion().unwrap().to_string(),
            format!("[x1@C]@C P1 -> [ind({t}, tail(x1@C))]@C [x1@C]@C P1")
        );

        // the wrong shape is refused
        assert!(matches!(sy.internalize_induction_2(&d), Err(SynthError::InvalidInput(_))));
    }

    #[test]
    fn induction_rule_2() {
        // B := [x1@C]@C P1, A := P2 -> P2.
        // B -> [tail]@E B by co-closure, [head(c)]@E (B -> A & B) by necessitation,
        // then E-application yields B -> [u]@E (A & B).
        let bf = f("[x1@C]@C P1");
        let a = f("P2 -> P2");
        let ab = Formula::and(a.clone(), bf.clone());
        let mut sy = Synth::new(2);
        let mut b = DerivationBuilder::new();
        let weaken = b.taut(Formula::imp(bf.clone(), ab.clone()));
        let (r, nd) = sy.necessitate(&b.clone().finish(weaken), Sort::E).unwrap();
        let nk = b.include(&nd);
        let tail = Term::tail(Term::var(1, Sort::C));
        let tk = b.axiom(
            Formula::imp(bf.clone(), Formula::just(tail.clone(), bf.clone())),
            AxiomSchema::CoClosTail,
        );
        let (u, app) = sy.e_app_into(&mut b, &r, &tail, &bf, &ab);
        let concl = Formula::imp(bf.clone(), Formula::just(u.clone(), ab.clone()));
        let k = b.glue(&[nk, tk, app], concl.clone());
        let d = b.finish(k);
        assert!(sy.kernel.check(&d, &sy.cs()).is_accepted());

        let (t, c, out) = sy.internalize_induction_2(&d).unwrap();
        assert_eq!(
            *out.conclusion().unwrap(),
            Formula::imp(
                bf,
                Formula::just(
                    Term::app(Term::constant(c, Sort::C), Term::ind(t, u), Sort::C),
                    a.clone()
                )
            )
        );
        assert!(sy.cs().contains(&sy.kernel, c, Sort::C, &Formula::imp(ab, a)));
    }
}
