//! The `×` translation erasing group evidence, on formulas and derivations.
//!
//! Two axiom images are not single-agent axioms: `(B → C) → ([s]_i B → C)`
//! from application and `[t_1]_1 B ∧ … ∧ [t_h]_h B → B` from tupling. Both
//! are emitted as a reflexivity instance followed by propositional glue, so
//! the output checks under the unmodified single-agent kernel.

use thiserror::Error;

use crate::deduction::{
    AxiomSchema, CheckReport, ConstantSpecification, CsEntry, Derivation, DerivationBuilder,
    Kernel, Rejection, Rule,
};
use crate::syntax::{subformulas, Formula, Sort};
use crate::ResourceError;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("input derivation rejected: {0}")]
    InvalidInput(Rejection),
    #[error("input derivation has hypotheses")]
    HasHypotheses,
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("no single-agent derivation found for `{0}`")]
    Untranslatable(Formula),
    #[error("translated derivation rejected: {0}")]
    Recheck(Rejection),
}

/// Drops every box whose term contains an `E`- or `C`-sorted subterm.
pub fn conservative_projection(a: &Formula) -> Formula {
    match a {
        Formula::Prop(_) => a.clone(),
        Formula::Neg(x) => Formula::neg(conservative_projection(x)),
        Formula::And(x, y) => Formula::and(conservative_projection(x), conservative_projection(y)),
        Formula::Or(x, y) => Formula::or(conservative_projection(x), conservative_projection(y)),
        Formula::Imp(x, y) => Formula::imp(conservative_projection(x), conservative_projection(y)),
        Formula::Just(t, s, x) => {
            let body = conservative_projection(x);
            if t.mentions_group_evidence() {
                body
            } else {
                Formula::Just(t.clone(), *s, Box::new(body))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XTranslation {
    pub derivation: Derivation,
    /// Images of the agent-sorted members of the input specification.
    pub cs_x: ConstantSpecification,
    /// Members of `cs_x` whose formula is not a single-agent axiom.
    pub flagged: Vec<CsEntry>,
    pub report: CheckReport,
}

/// The image of the agent-sorted part of `cs`, and the members that are
/// not single-agent axioms.
pub fn cs_x(cs: &ConstantSpecification, h: usize) -> (ConstantSpecification, Vec<CsEntry>) {
    let target = Kernel::single_agent(h);
    let entries: Vec<CsEntry> = cs
        .entries()
        .unwrap_or_default()
        .into_iter()
        .filter(|e| matches!(e.sort, Sort::Agent(_)))
        .map(|e| CsEntry {
            formula: conservative_projection(&e.formula),
            ..e
        })
        .collect();
    let flagged = entries
        .iter()
        .filter(|e| target.match_axiom(&e.formula).is_empty())
        .cloned()
        .collect();
    (ConstantSpecification::extensional_unchecked(entries), flagged)
}

/// Proves the image of an axiom in the single-agent fragment.
fn axiom_image(b: &mut DerivationBuilder, target: &Kernel, f: &Formula) -> Result<usize, TranslateError> {
    if let Some(schema) = target.match_axiom(f).into_iter().next() {
        return Ok(b.axiom(f.clone(), schema));
    }
    for g in subformulas(f) {
        if let Formula::Just(_, Sort::Agent(_), body) = &g {
            let refl = Formula::imp(g.clone(), (**body).clone());
            if target.is_tautology(&Formula::imp(refl.clone(), f.clone()))? {
                let r = b.axiom(refl, AxiomSchema::Refl);
                return Ok(b.glue(&[r], f.clone()));
            }
        }
    }
    Err(TranslateError::Untranslatable(f.clone()))
}

/// Maps a hypothesis-free derivation step by step to a derivation of the
/// `×`-image of its conclusion under the image specification.
pub fn translate_derivation_x(
    d: &Derivation,
    cs: &ConstantSpecification,
    h: usize,
) -> Result<XTranslation, TranslateError> {
    if !d.hypotheses.is_empty() {
        return Err(TranslateError::HasHypotheses);
    }
    let source = Kernel::new(h);
    if let Some(r) = source.check(d, cs).rejection() {
        return Err(TranslateError::InvalidInput(r.clone()));
    }
    let target = Kernel::single_agent(h);
    let (cs_x, flagged) = cs_x(cs, h);
    let mut b = DerivationBuilder::new();
    let mut map = Vec::with_capacity(d.len());
    for step in &d.steps {
        let image = conservative_projection(&step.formula);
        let k = match &step.rule {
            Rule::Hyp(_) => return Err(TranslateError::HasHypotheses),
            Rule::Axiom(_) => axiom_image(&mut b, &target, &image)?,
            Rule::MP(i, j) => b.mp(map[i - 1], map[j - 1]),
            Rule::AxNec(c, s) => match s {
                Sort::Agent(_) => b.axnec(*c, *s, conservative_projection(step.formula.as_just().unwrap().2)),
                Sort::E | Sort::C => axiom_image(&mut b, &target, &image)?,
            },
        };
        map.push(k);
    }
    let last = *map.last().ok_or(TranslateError::Untranslatable(Formula::prop(1)))?;
    let derivation = b.finish(last);
    let report = target.check(&derivation, &cs_x);
    if let Some(r) = report.rejection() {
        return Err(TranslateError::Recheck(r.clone()));
    }
    Ok(XTranslation {
        derivation,
        cs_x,
        flagged,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s, 2).unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(conservative_projection(&f("[ind(x1@C, x1@E)]@C P1")), f("P1"));
        assert_eq!(conservative_projection(&f("[x1@1]@1 P1 -> P1")), f("[x1@1]@1 P1 -> P1"));
        assert_eq!(conservative_projection(&f("[pi_1(x1@E)]@1 P1")), f("P1"));
    }

    fn single(a: Formula, schema: AxiomSchema) -> Derivation {
        let mut b = DerivationBuilder::new();
        let k = b.axiom(a, schema);
        b.finish(k)
    }

    #[test]
    fn induction_and_coclosure_become_tautologies() {
        let ind = f("P1 & [x1@C]@C (P1 -> [x1@E]@E P1) -> [ind(x1@C, x1@E)]@C P1");
        let x = translate_derivation_x(&single(ind, AxiomSchema::Induction), &ConstantSpecification::TotalC, 2).unwrap();
        assert_eq!(x.derivation.conclusion().unwrap(), &f("P1 & (P1 -> P1) -> P1"));
        assert_eq!(x.derivation.steps[0].rule, Rule::Axiom(AxiomSchema::Taut));

        let cc = f("[x1@C]@C P2 -> [head(x1@C)]@E P2");
        let x = translate_derivation_x(&single(cc, AxiomSchema::CoClosHead), &ConstantSpecification::TotalC, 2).unwrap();
        assert_eq!(x.derivation.conclusion().unwrap(), &f("P2 -> P2"));
    }

    #[test]
    fn derived_patterns_expand() {
        let app = f("[pi_1(x1@E)]@1 (P1 -> P2) -> [x1@1]@1 P1 -> [pi_1(x1@E) * x1@1]@1 P2");
        let x = translate_derivation_x(&single(app, AxiomSchema::App), &ConstantSpecification::TotalC, 2).unwrap();
        assert_eq!(x.derivation.conclusion().unwrap(), &f("(P1 -> P2) -> [x1@1]@1 P1 -> P2"));
        assert!(x.derivation.steps.iter().any(|s| s.rule == Rule::Axiom(AxiomSchema::Refl)));

        let tup = f("[x1@1]@1 P1 & [x1@2]@2 P1 -> [<x1@1, x1@2>]@E P1");
        let x = translate_derivation_x(&single(tup, AxiomSchema::Tupling), &ConstantSpecification::TotalC, 2).unwrap();
        assert_eq!(x.derivation.conclusion().unwrap(), &f("[x1@1]@1 P1 & [x1@2]@2 P1 -> P1"));
    }

    #[test]
    fn agent_constants_carry_over() {
        let ax = f("[x1@E]@E P1 -> [pi_1(x1@E)]@1 P1");
        let cs = ConstantSpecification::extensional_unchecked([CsEntry {
            constant: 1,
            sort: Sort::agent(1),
            formula: ax.clone(),
        }]);
        let mut b = DerivationBuilder::new();
        let k = b.axnec(1, Sort::agent(1), ax);
        let d = b.finish(k);
        let x = translate_derivation_x(&d, &cs, 2).unwrap();
        assert_eq!(x.derivation.conclusion().unwrap(), &f("[c1@1]@1 (P1 -> P1)"));
        assert!(x.flagged.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        let d = single(f("P1"), AxiomSchema::Taut);
        assert!(matches!(
            translate_derivation_x(&d, &ConstantSpecification::TotalC, 2),
            Err(TranslateError::InvalidInput(_))
        ));
    }
}
