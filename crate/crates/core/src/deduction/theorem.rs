//! Discharging a hypothesis.

use thiserror::Error;

use super::{ConstantSpecification, Derivation, DerivationBuilder, Kernel, Rejection, Rule};
use crate::syntax::Formula;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DeductionError {
    #[error("input derivation rejected at step {}: {}", .0.step, .0.reason)]
    InvalidInput(Rejection),
    #[error("no hypothesis {0} to discharge")]
    NoSuchHypothesis(usize),
}

/// Turns a derivation of `B` from `Δ ∪ {A}` into one of `A -> B` from `Δ`,
/// where `A` is the hypothesis at 1-based position `hyp`.
pub fn deduction_theorem(
    kernel: &Kernel,
    d: &Derivation,
    cs: &ConstantSpecification,
    hyp: usize,
) -> Result<Derivation, DeductionError> {
    if let Err(r) = kernel.check(d, cs).outcome {
        return Err(DeductionError::InvalidInput(r));
    }
    let a = hyp
        .checked_sub(1)
        .and_then(|i| d.hypotheses.get(i))
        .ok_or(DeductionError::NoSuchHypothesis(hyp))?
        .clone();
    let delta: Vec<Formula> = d
        .hypotheses
        .iter()
        .enumerate()
        .filter(|(i, _)| i + 1 != hyp)
        .map(|(_, f)| f.clone())
        .collect();
    let mut b = DerivationBuilder::with_hypotheses(delta);
    // m[k] proves A -> F_k
    let mut m: Vec<usize> = Vec::with_capacity(d.steps.len());
    for step in &d.steps {
        let f = &step.formula;
        let target = Formula::imp(a.clone(), f.clone());
        let k = match &step.rule {
            _ if *f == a => b.taut(target),
            Rule::MP(i, j) => b.glue(&[m[i - 1], m[j - 1]], target),
            rule => {
                let s = match rule {
                    Rule::Hyp(_) => b.hyp(f.clone()),
                    Rule::Axiom(schema) => b.axiom(f.clone(), *schema),
                    Rule::AxNec(c, sort) => {
                        let (_, _, body) = f.as_just().expect("checked AxNec step");
                        b.axnec(*c, *sort, body.clone())
                    }
                    Rule::MP(..) => unreachable!(),
                };
                b.glue(&[s], target)
            }
        };
        m.push(k);
    }
    Ok(b.finish(*m.last().expect("checked derivations are nonempty")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{AxiomSchema, Step};
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s, 2).unwrap()
    }

    #[test]
    fn identity() {
        let d = Derivation {
            hypotheses: vec![f("P1")],
            steps: vec![Step { formula: f("P1"), rule: Rule::Hyp(1) }],
        };
        let k = Kernel::new(2);
        let cs = ConstantSpecification::TotalC;
        let out = deduction_theorem(&k, &d, &cs, 1).unwrap();
        assert!(out.hypotheses.is_empty());
        assert_eq!(out.conclusion(), Some(&f("P1 -> P1")));
        assert!(k.check(&out, &cs).is_accepted());
    }

    #[test]
    fn vacuous_discharge() {
        let d = Derivation {
            hypotheses: vec![f("P2")],
            steps: vec![Step {
                formula: f("[x1@1]@1 P1 -> P1"),
                rule: Rule::Axiom(AxiomSchema::Refl),
            }],
        };
        let k = Kernel::new(2);
        let cs = ConstantSpecification::TotalC;
        let out = deduction_theorem(&k, &d, &cs, 1).unwrap();
        let b = f("[x1@1]@1 P1 -> P1");
        let weakening = Formula::imp(b.clone(), Formula::imp(f("P2"), b.clone()));
        assert_eq!(out.steps[0].formula, b);
        assert_eq!(out.steps[1].formula, weakening);
        assert_eq!(out.conclusion(), Some(&Formula::imp(f("P2"), b)));
        assert!(k.check(&out, &cs).is_accepted());
    }

    #[test]
    fn through_modus_ponens() {
        let d = Derivation {
            hypotheses: vec![f("P1"), f("P1 -> P2")],
            steps: vec![
                Step { formula: f("P1"), rule: Rule::Hyp(1) },
                Step { formula: f("P1 -> P2"), rule: Rule::Hyp(2) },
                Step { formula: f("P2"), rule: Rule::MP(2, 1) },
            ],
        };
        let k = Kernel::new(2);
        let cs = ConstantSpecification::TotalC;
        for hyp in [1, 2] {
            let out = deduction_theorem(&k, &d, &cs, hyp).unwrap();
            let a = d.hypotheses[hyp - 1].clone();
            assert_eq!(out.conclusion(), Some(&Formula::imp(a, f("P2"))));
            assert_eq!(out.hypotheses.len(), 1);
            assert!(k.check(&out, &cs).is_accepted(), "{:?}", k.check(&out, &cs));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let d = Derivation {
            hypotheses: vec![f("P1")],
            steps: vec![Step { formula: f("P2"), rule: Rule::Hyp(1) }],
        };
        let k = Kernel::new(2);
        assert!(matches!(
            deduction_theorem(&k, &d, &ConstantSpecification::TotalC, 1),
            Err(DeductionError::InvalidInput(_))
        ));
    }
}
