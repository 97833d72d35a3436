//! Evidence-term synthesis. Each operation builds a term together with a
//! derivation of the corresponding internalised statement, and no result
//! leaves this module without passing the kernel.

mod alloc;
mod lift;

use thiserror::Error;

use crate::deduction::{
    AxiomSchema, ConstantSpecification, Derivation, DerivationBuilder, Kernel, Rejection,
};
use crate::syntax::{sort_of, Agent, Formula, Sort, SortError, SortViolation, Term};

pub use alloc::ConstantAllocator;
pub use lift::LiftingContext;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("constant specification must be pure and C-axiomatically appropriate")]
    Precondition,
    /// A construction produced a derivation the kernel rejects. This is a bug.
    #[error("kernel rejected synthesised derivation at step {}: {}", .0.step, .0.reason)]
    Kernel(Rejection),
}

/// Synthesis context: kernel settings plus the constant allocator.
///
/// Under `TotalC` any `C`-constant justifies any axiom, so results are
/// checked against `TotalC`; otherwise against the allocator's table.
#[derive(Clone, Debug)]
pub struct Synth {
    pub kernel: Kernel,
    pub alloc: ConstantAllocator,
    total_c: bool,
}

/// `!_C t`: the inspection term for `C`-evidence.
pub fn c_bang(c: u32, t: Term) -> Term {
    Term::ind(Term::constant(c, Sort::C), Term::tail(t))
}

/// `↓_i t`.
pub fn down(i: Agent, t: Term) -> Term {
    Term::proj(i, Term::head(t))
}

fn expect(t: &Term, want: Sort, h: usize) -> Result<(), SortError> {
    let found = sort_of(t, h)?;
    if found != want {
        return Err(SortError {
            subterm: t.to_string(),
            violation: SortViolation::ExpectedSort {
                expected: want,
                found,
            },
        });
    }
    Ok(())
}

impl Synth {
    /// Allocator-backed specification, starting empty.
    pub fn new(h: usize) -> Self {
        Synth {
            kernel: Kernel::new(h),
            alloc: ConstantAllocator::new(),
            total_c: false,
        }
    }

    pub fn total_c(h: usize) -> Self {
        Synth {
            total_c: true,
            ..Synth::new(h)
        }
    }

    /// Continues from an existing specification, which must be `TotalC` or an allocator table.
    pub fn from_cs(h: usize, cs: &ConstantSpecification) -> Result<Self, SynthError> {
        match cs {
            ConstantSpecification::TotalC => Ok(Synth::total_c(h)),
            ConstantSpecification::Allocated(table) => Ok(Synth {
                alloc: ConstantAllocator::from_table(table),
                ..Synth::new(h)
            }),
            ConstantSpecification::Extensional(_) => Err(SynthError::Precondition),
        }
    }

    pub fn h(&self) -> usize {
        self.kernel.h
    }

    pub fn is_total_c(&self) -> bool {
        self.total_c
    }

    /// The specification outputs are checked against.
    pub fn cs(&self) -> ConstantSpecification {
        if self.total_c {
            ConstantSpecification::TotalC
        } else {
            self.alloc.spec()
        }
    }

    fn certify(&self, d: Derivation) -> Result<Derivation, SynthError> {
        match self.kernel.check(&d, &self.cs()).outcome {
            Ok(_) => Ok(d),
            Err(r) => Err(SynthError::Kernel(r)),
        }
    }

    fn check_formula(&mut self, a: &Formula) -> Result<(), SynthError> {
        a.check(self.h())?;
        self.alloc.avoid_formula(a);
        Ok(())
    }

    fn check_term(&mut self, t: &Term, want: Sort) -> Result<(), SynthError> {
        expect(t, want, self.h())?;
        self.alloc.avoid_index(t.max_const_index(Sort::C));
        Ok(())
    }

    fn accepted(&mut self, d: &Derivation) -> Result<(), SynthError> {
        if let Err(r) = self.kernel.check(d, &self.cs()).outcome {
            return Err(SynthError::InvalidInput(format!(
                "derivation rejected at step {}: {}",
                r.step, r.reason
            )));
        }
        self.alloc.avoid_derivation(d);
        Ok(())
    }

    /// Proves `[c]@C a` for the allocated constant of axiom `a`.
    pub(crate) fn necessitate_axiom(&mut self, b: &mut DerivationBuilder, a: &Formula) -> (u32, usize) {
        debug_assert!(!self.kernel.match_axiom(a).is_empty(), "{a} is not an axiom");
        let c = self.alloc.constant_for(a);
        (c, b.axnec(c, Sort::C, a.clone()))
    }

    // Builders. Each proves its lemma inside `b` and returns the step index.

    pub(crate) fn e_refl_into(&self, b: &mut DerivationBuilder, t: &Term, a: &Formula) -> usize {
        let one = Agent::new(1);
        let boxed = Formula::just(t.clone(), a.clone());
        let pt = Formula::just(Term::proj(one, t.clone()), a.clone());
        let proj = b.axiom(Formula::imp(boxed, pt.clone()), AxiomSchema::Proj);
        let refl = b.axiom(Formula::imp(pt, a.clone()), AxiomSchema::Refl);
        b.chain(proj, refl)
    }

    pub(crate) fn e_app_into(
        &self,
        b: &mut DerivationBuilder,
        t: &Term,
        s: &Term,
        a: &Formula,
        bb: &Formula,
    ) -> (Term, usize) {
        let ab = Formula::imp(a.clone(), bb.clone());
        let t_ab = Formula::just(t.clone(), ab.clone());
        let s_a = Formula::just(s.clone(), a.clone());
        let mut premises = Vec::new();
        let mut comps = Vec::new();
        let mut comp_boxes = Vec::new();
        for i in Agent::all(self.h()) {
            let pt = Term::proj(i, t.clone());
            let ps = Term::proj(i, s.clone());
            let u = Term::app(pt.clone(), ps.clone(), Sort::Agent(i));
            let pt_ab = Formula::just(pt, ab.clone());
            let ps_a = Formula::just(ps, a.clone());
            let u_b = Formula::just(u.clone(), bb.clone());
            premises.push(b.axiom(Formula::imp(t_ab.clone(), pt_ab.clone()), AxiomSchema::Proj));
            premises.push(b.axiom(Formula::imp(s_a.clone(), ps_a.clone()), AxiomSchema::Proj));
            premises.push(b.axiom(
                Formula::imp(pt_ab, Formula::imp(ps_a, u_b.clone())),
                AxiomSchema::App,
            ));
            comps.push(u);
            comp_boxes.push(u_b);
        }
        let tuple = Term::Tuple(comps);
        let target = Formula::just(tuple.clone(), bb.clone());
        premises.push(b.axiom(
            Formula::imp(Formula::conj(comp_boxes), target.clone()),
            AxiomSchema::Tupling,
        ));
        let concl = Formula::imp(t_ab, Formula::imp(s_a, target));
        (tuple, b.glue(&premises, concl))
    }

    /// Proves `[t]@E a -> [u]@E a` where `u` is the componentwise sum, with
    /// `t` on the left (`left = true`) or the right of each component.
    pub(crate) fn e_sum_into(
        &self,
        b: &mut DerivationBuilder,
        t: &Term,
        s: &Term,
        a: &Formula,
        left: bool,
    ) -> (Term, usize) {
        let src = if left { t } else { s };
        let src_a = Formula::just(src.clone(), a.clone());
        let mut premises = Vec::new();
        let mut comps = Vec::new();
        let mut comp_boxes = Vec::new();
        for i in Agent::all(self.h()) {
            let pt = Term::proj(i, t.clone());
            let ps = Term::proj(i, s.clone());
            let p_src = if left { pt.clone() } else { ps.clone() };
            let u = Term::sum(pt, ps, Sort::Agent(i));
            let p_src_a = Formula::just(p_src, a.clone());
            let u_a = Formula::just(u.clone(), a.clone());
            premises.push(b.axiom(Formula::imp(src_a.clone(), p_src_a.clone()), AxiomSchema::Proj));
            let schema = if left { AxiomSchema::SumL } else { AxiomSchema::SumR };
            premises.push(b.axiom(Formula::imp(p_src_a, u_a.clone()), schema));
            comps.push(u);
            comp_boxes.push(u_a);
        }
        let tuple = Term::Tuple(comps);
        let target = Formula::just(tuple.clone(), a.clone());
        premises.push(b.axiom(
            Formula::imp(Formula::conj(comp_boxes), target.clone()),
            AxiomSchema::Tupling,
        ));
        (tuple, b.glue(&premises, Formula::imp(src_a, target)))
    }

    pub(crate) fn i_conv_into(
        &self,
        b: &mut DerivationBuilder,
        t: &Term,
        i: Agent,
        a: &Formula,
    ) -> (Term, usize) {
        let boxed = Formula::just(t.clone(), a.clone());
        let hd = Formula::just(Term::head(t.clone()), a.clone());
        let d = down(i, t.clone());
        let target = Formula::just(d.clone(), a.clone());
        let head = b.axiom(Formula::imp(boxed, hd.clone()), AxiomSchema::CoClosHead);
        let proj = b.axiom(Formula::imp(hd, target), AxiomSchema::Proj);
        (d, b.chain(head, proj))
    }

    pub(crate) fn c_refl_into(&self, b: &mut DerivationBuilder, t: &Term, a: &Formula) -> usize {
        let one = Agent::new(1);
        let (d, conv) = self.i_conv_into(b, t, one, a);
        let refl = b.axiom(
            Formula::imp(Formula::just(d, a.clone()), a.clone()),
            AxiomSchema::Refl,
        );
        b.chain(conv, refl)
    }

    pub(crate) fn c_insp_into(
        &mut self,
        b: &mut DerivationBuilder,
        t: &Term,
        a: &Formula,
    ) -> (Term, usize) {
        let x = Formula::just(t.clone(), a.clone());
        let tail = Term::tail(t.clone());
        let step = Formula::imp(x.clone(), Formula::just(tail.clone(), x.clone()));
        let (c, nec) = self.necessitate_axiom(b, &step);
        let bang = c_bang(c, t.clone());
        let target = Formula::just(bang.clone(), x.clone());
        let nec_f = b.formula(nec).clone();
        let induction = b.axiom(
            Formula::imp(Formula::and(x.clone(), nec_f), target.clone()),
            AxiomSchema::Induction,
        );
        (bang, b.glue(&[nec, induction], Formula::imp(x, target)))
    }

    pub(crate) fn c_shift_into(
        &mut self,
        b: &mut DerivationBuilder,
        t: &Term,
        a: &Formula,
    ) -> (Term, usize) {
        let x = Formula::just(t.clone(), a.clone());
        let (bang, ins) = self.c_insp_into(b, t, a);
        let hd = Formula::just(Term::head(t.clone()), a.clone());
        let head_ax = Formula::imp(x.clone(), hd.clone());
        let (c, nec) = self.necessitate_axiom(b, &head_ax);
        let shifted = Term::app(Term::constant(c, Sort::C), bang.clone(), Sort::C);
        let target = Formula::just(shifted.clone(), hd);
        let app = b.axiom(
            Formula::imp(
                b.formula(nec).clone(),
                Formula::imp(Formula::just(bang, x.clone()), target.clone()),
            ),
            AxiomSchema::App,
        );
        (shifted, b.glue(&[nec, app, ins], Formula::imp(x, target)))
    }

    // Public operations.

    /// `[t]@E a -> a`.
    pub fn e_reflexivity(&mut self, t: &Term, a: &Formula) -> Result<Derivation, SynthError> {
        self.check_term(t, Sort::E)?;
        self.check_formula(a)?;
        let mut b = DerivationBuilder::new();
        let k = self.e_refl_into(&mut b, t, a);
        self.certify(b.finish(k))
    }

    /// `[t]@E (a -> bb) -> [s]@E a -> [t ·E s]@E bb`.
    pub fn e_application(
        &mut self,
        t: &Term,
        s: &Term,
        a: &Formula,
        bb: &Formula,
    ) -> Result<(Term, Derivation), SynthError> {
        self.check_term(t, Sort::E)?;
        self.check_term(s, Sort::E)?;
        self.check_formula(a)?;
        self.check_formula(bb)?;
        let mut b = DerivationBuilder::new();
        let (u, k) = self.e_app_into(&mut b, t, s, a, bb);
        Ok((u, self.certify(b.finish(k))?))
    }

    /// `[t]@E a -> [t +E s]@E a` and `[s]@E a -> [t +E s]@E a`.
    pub fn e_sum(
        &mut self,
        t: &Term,
        s: &Term,
        a: &Formula,
    ) -> Result<(Term, Derivation, Derivation), SynthError> {
        self.check_term(t, Sort::E)?;
        self.check_term(s, Sort::E)?;
        self.check_formula(a)?;
        let mut bl = DerivationBuilder::new();
        let (u, kl) = self.e_sum_into(&mut bl, t, s, a, true);
        let mut br = DerivationBuilder::new();
        let (u2, kr) = self.e_sum_into(&mut br, t, s, a, false);
        debug_assert_eq!(u, u2);
        Ok((u, self.certify(bl.finish(kl))?, self.certify(br.finish(kr))?))
    }

    /// `[t]@C a -> [↓_i t]@i a`.
    pub fn i_conversion(
        &mut self,
        t: &Term,
        i: Agent,
        a: &Formula,
    ) -> Result<(Term, Derivation), SynthError> {
        self.check_term(t, Sort::C)?;
        self.check_formula(a)?;
        if i.index() as usize > self.h() {
            return Err(SynthError::InvalidInput(format!(
                "agent {i} is outside 1..{}",
                self.h()
            )));
        }
        let mut b = DerivationBuilder::new();
        let (d, k) = self.i_conv_into(&mut b, t, i, a);
        Ok((d, self.certify(b.finish(k))?))
    }

    /// `[t]@C a -> a`.
    pub fn c_reflexivity(&mut self, t: &Term, a: &Formula) -> Result<Derivation, SynthError> {
        self.check_term(t, Sort::C)?;
        self.check_formula(a)?;
        let mut b = DerivationBuilder::new();
        let k = self.c_refl_into(&mut b, t, a);
        self.certify(b.finish(k))
    }

    /// `[t]@C a -> [!_C t]@C [t]@C a`.
    pub fn c_inspection(&mut self, t: &Term, a: &Formula) -> Result<(Term, Derivation), SynthError> {
        self.check_term(t, Sort::C)?;
        self.check_formula(a)?;
        let mut b = DerivationBuilder::new();
        let (u, k) = self.c_insp_into(&mut b, t, a);
        Ok((u, self.certify(b.finish(k))?))
    }

    /// `[t]@C a -> [⇐ t]@C [head(t)]@E a`.
    pub fn c_shift(&mut self, t: &Term, a: &Formula) -> Result<(Term, Derivation), SynthError> {
        self.check_term(t, Sort::C)?;
        self.check_formula(a)?;
        let mut b = DerivationBuilder::new();
        let (u, k) = self.c_shift_into(&mut b, t, a);
        Ok((u, self.certify(b.finish(k))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_term};

    fn t(s: &str, h: usize) -> Term {
        parse_term(s, h).unwrap()
    }

    fn f(s: &str, h: usize) -> Formula {
        parse_formula(s, h).unwrap()
    }

    #[test]
    fn e_reflexivity_shape() {
        let mut sy = Synth::new(2);
        let d = sy.e_reflexivity(&t("x1@E", 2), &f("P1", 2)).unwrap();
        assert_eq!(d.conclusion().unwrap().to_string(), "[x1@E]@E P1 -> P1");
        assert_eq!(d.len(), 5);
        let d = sy.e_reflexivity(&t("head(x1@C)", 2), &f("P1", 2)).unwrap();
        assert_eq!(d.conclusion().unwrap().to_string(), "[head(x1@C)]@E P1 -> P1");
        assert!(matches!(
            sy.e_reflexivity(&t("x1@C", 2), &f("P1", 2)),
            Err(SynthError::Sort(_))
        ));
    }

    #[test]
    fn e_application_terms() {
        let mut sy = Synth::new(2);
        let (u, d) = sy
            .e_application(&t("x1@E", 2), &t("x2@E", 2), &f("P1", 2), &f("P2", 2))
            .unwrap();
        assert_eq!(u.to_string(), "<pi_1(x1@E) * pi_1(x2@E), pi_2(x1@E) * pi_2(x2@E)>");
        assert_eq!(
            d.conclusion().unwrap().to_string(),
            format!("[x1@E]@E (P1 -> P2) -> [x2@E]@E P1 -> [{u}]@E P2")
        );
        let mut sy1 = Synth::new(1);
        let (u, _) = sy1
            .e_application(&t("x1@E", 1), &t("x2@E", 1), &f("P1", 1), &f("P2", 1))
            .unwrap();
        assert_eq!(u.to_string(), "<pi_1(x1@E) * pi_1(x2@E)>");
    }

    #[test]
    fn e_sum_terms() {
        let mut sy = Synth::new(2);
        let (u, l, r) = sy.e_sum(&t("x1@E", 2), &t("x2@E", 2), &f("P1", 2)).unwrap();
        assert_eq!(u.to_string(), "<pi_1(x1@E) + pi_1(x2@E), pi_2(x1@E) + pi_2(x2@E)>");
        assert_eq!(l.conclusion().unwrap().to_string(), format!("[x1@E]@E P1 -> [{u}]@E P1"));
        assert_eq!(r.conclusion().unwrap().to_string(), format!("[x2@E]@E P1 -> [{u}]@E P1"));
    }

    #[test]
    fn conversion_and_c_reflexivity() {
        let mut sy = Synth::new(2);
        let (d, der) = sy.i_conversion(&t("x1@C", 2), Agent::new(1), &f("P1", 2)).unwrap();
        assert_eq!(d.to_string(), "pi_1(head(x1@C))");
        assert_eq!(
            der.conclusion().unwrap().to_string(),
            "[x1@C]@C P1 -> [pi_1(head(x1@C))]@1 P1"
        );
        for term in ["x1@C", "ind(x1@C, x1@E)"] {
            let der = sy.c_reflexivity(&t(term, 2), &f("P1", 2)).unwrap();
            assert_eq!(der.conclusion().unwrap().to_string(), format!("[{term}]@C P1 -> P1"));
        }
    }

    #[test]
    fn inspection_and_shift() {
        let mut sy = Synth::new(2);
        let (u, d) = sy.c_inspection(&t("x1@C", 2), &f("P1", 2)).unwrap();
        assert_eq!(u.to_string(), "ind(c1@C, tail(x1@C))");
        assert_eq!(
            d.conclusion().unwrap().to_string(),
            "[x1@C]@C P1 -> [ind(c1@C, tail(x1@C))]@C [x1@C]@C P1"
        );
        let (u2, _) = sy.c_inspection(&t("x1@C", 2), &f("P1", 2)).unwrap();
        assert_eq!(u, u2);
        assert_eq!(sy.alloc.len(), 1);

        let (s, d) = sy.c_shift(&t("x1@C", 2), &f("P1", 2)).unwrap();
        assert_eq!(s.to_string(), "c2@C * ind(c1@C, tail(x1@C))");
        assert_eq!(
            d.conclusion().unwrap().to_string(),
            format!("[x1@C]@C P1 -> [{s}]@C [head(x1@C)]@E P1")
        );
        let cs = sy.cs();
        assert!(crate::deduction::cs_contains(
            &cs,
            2,
            Sort::C,
            &f("[x1@C]@C P1 -> [head(x1@C)]@E P1", 2),
            2
        ));
    }

    #[test]
    fn total_c_outputs_check_under_total_c() {
        let mut sy = Synth::total_c(3);
        let (_, d) = sy.c_shift(&t("c9@C", 3), &f("P1 & P2", 3)).unwrap();
        assert!(sy.kernel.check(&d, &ConstantSpecification::TotalC).is_accepted());
        // constants handed out skip c9
        assert!(sy.alloc.table().keys().all(|c| *c > 9));
    }
}
