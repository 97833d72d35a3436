//! Axiom schemata and the tautology decision procedure.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::syntax::{Formula, Sort, Term};
use crate::ResourceError;

/// Default limit on distinct atoms for the exhaustive tautology check.
pub const DEFAULT_TAUT_ATOM_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomSchema {
    Taut,
    App,
    SumL,
    SumR,
    Refl,
    Insp,
    Tupling,
    Proj,
    CoClosHead,
    CoClosTail,
    Induction,
}

impl AxiomSchema {
    pub const ALL: [AxiomSchema; 11] = [
        AxiomSchema::Taut,
        AxiomSchema::App,
        AxiomSchema::SumL,
        AxiomSchema::SumR,
        AxiomSchema::Refl,
        AxiomSchema::Insp,
        AxiomSchema::Tupling,
        AxiomSchema::Proj,
        AxiomSchema::CoClosHead,
        AxiomSchema::CoClosTail,
        AxiomSchema::Induction,
    ];

    /// Schemata of the single-agent fragment (no `E`/`C` machinery).
    pub const SINGLE_AGENT: [AxiomSchema; 6] = [
        AxiomSchema::Taut,
        AxiomSchema::App,
        AxiomSchema::SumL,
        AxiomSchema::SumR,
        AxiomSchema::Refl,
        AxiomSchema::Insp,
    ];

    pub fn id(self) -> &'static str {
        match self {
            AxiomSchema::Taut => "taut",
            AxiomSchema::App => "app",
            AxiomSchema::SumL => "sum-l",
            AxiomSchema::SumR => "sum-r",
            AxiomSchema::Refl => "refl",
            AxiomSchema::Insp => "insp",
            AxiomSchema::Tupling => "tupling",
            AxiomSchema::Proj => "proj",
            AxiomSchema::CoClosHead => "coclos-head",
            AxiomSchema::CoClosTail => "coclos-tail",
            AxiomSchema::Induction => "induction",
        }
    }
}

impl fmt::Display for AxiomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AxiomSchema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        AxiomSchema::ALL
            .into_iter()
            .find(|a| a.id() == norm || a.id().replace('-', "") == norm)
            .ok_or_else(|| format!("unknown axiom schema `{s}`"))
    }
}

/// Collects the propositional atoms of `a`: variables and maximal boxed subformulas.
fn atoms<'a>(a: &'a Formula, out: &mut HashMap<&'a Formula, usize>) {
    match a {
        Formula::Prop(_) | Formula::Just(..) => {
            let n = out.len();
            out.entry(a).or_insert(n);
        }
        Formula::Neg(x) => atoms(x, out),
        Formula::And(x, y) | Formula::Or(x, y) | Formula::Imp(x, y) => {
            atoms(x, out);
            atoms(y, out);
        }
    }
}

fn eval64(a: &Formula, index: &HashMap<&Formula, usize>, lanes: &[u64]) -> u64 {
    match a {
        Formula::Prop(_) | Formula::Just(..) => lanes[index[a]],
        Formula::Neg(x) => !eval64(x, index, lanes),
        Formula::And(x, y) => eval64(x, index, lanes) & eval64(y, index, lanes),
        Formula::Or(x, y) => eval64(x, index, lanes) | eval64(y, index, lanes),
        Formula::Imp(x, y) => !eval64(x, index, lanes) | eval64(y, index, lanes),
    }
}

/// Lane patterns for the six low-order atoms: bit `j` of pattern `k` is bit `k` of `j`.
const LOW_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Decides whether `a` is a propositional tautology, treating each maximal
/// boxed subformula as an opaque atom. Every valuation is tried; 64 of them
/// are evaluated at once as bit lanes.
pub fn is_tautology(a: &Formula, cap: usize) -> Result<bool, ResourceError> {
    let mut index = HashMap::new();
    atoms(a, &mut index);
    let n = index.len();
    if n > cap {
        return Err(ResourceError::TooManyAtoms { atoms: n, cap });
    }
    let valuations: u64 = 1 << n;
    let mask = if n >= 6 { u64::MAX } else { (1u64 << valuations) - 1 };
    let chunks = if n >= 6 { 1u64 << (n - 6) } else { 1 };
    let mut lanes = vec![0u64; n];
    for chunk in 0..chunks {
        for (k, lane) in lanes.iter_mut().enumerate() {
            *lane = if k < 6 {
                LOW_PATTERNS[k]
            } else if chunk >> (k - 6) & 1 == 1 {
                u64::MAX
            } else {
                0
            };
        }
        if !eval64(a, &index, &lanes) & mask != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn just_of(a: &Formula) -> Option<(&Term, Sort, &Formula)> {
    a.as_just()
}

/// Peels a left-nested conjunction into exactly `n` conjuncts.
fn unconj(a: &Formula, n: usize) -> Option<Vec<&Formula>> {
    let mut out = Vec::with_capacity(n);
    let mut cur = a;
    for _ in 1..n {
        match cur {
            Formula::And(l, r) => {
                out.push(r.as_ref());
                cur = l;
            }
            _ => return None,
        }
    }
    out.push(cur);
    out.reverse();
    Some(out)
}

fn app_instance(a: &Formula) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let (t, s1, ab) = just_of(l)?;
    let (x, y) = ab.as_imp()?;
    let (r1, r2) = r.as_imp()?;
    let (s, s2, x2) = just_of(r1)?;
    let (ts, s3, y2) = just_of(r2)?;
    match ts {
        Term::App(t2, sv, s4)
            if s1.is_star()
                && s1 == s2
                && s2 == s3
                && s3 == *s4
                && **t2 == *t
                && **sv == *s
                && x == x2
                && y == y2 =>
        {
            Some(())
        }
        _ => None,
    }
}

fn sum_instance(a: &Formula, left: bool) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let (t, s1, x) = just_of(l)?;
    let (u, s2, y) = just_of(r)?;
    match u {
        Term::Sum(ul, ur, s3) if s1.is_star() && s1 == s2 && s2 == *s3 && x == y => {
            let side = if left { ul } else { ur };
            (**side == *t).then_some(())
        }
        _ => None,
    }
}

fn refl_instance(a: &Formula) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let (_, s, x) = just_of(l)?;
    (matches!(s, Sort::Agent(_)) && x == r).then_some(())
}

fn insp_instance(a: &Formula) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let (t, s, _) = just_of(l)?;
    let Sort::Agent(i) = s else { return None };
    let (b, s2, inner) = just_of(r)?;
    match b {
        Term::Bang(t2, i2) if **t2 == *t && *i2 == i && s2 == s && inner == l => Some(()),
        _ => None,
    }
}

fn tupling_instance(a: &Formula, h: usize) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let (tup, s, body) = just_of(r)?;
    let Term::Tuple(items) = tup else { return None };
    if s != Sort::E || items.len() != h {
        return None;
    }
    let conjuncts = unconj(l, h)?;
    for (k, (c, item)) in conjuncts.iter().zip(items).enumerate() {
        let (t, sk, x) = just_of(c)?;
        if t != item || sk != Sort::agent(k as u32 + 1) || x != body {
            return None;
        }
    }
    Some(())
}

fn proj_instance(a: &Formula) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let (t, s, x) = just_of(l)?;
    let (p, s2, y) = just_of(r)?;
    match p {
        Term::Proj(i, t2) if s == Sort::E && s2 == Sort::Agent(*i) && **t2 == *t && x == y => {
            Some(())
        }
        _ => None,
    }
}

fn coclos_head_instance(a: &Formula) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let (t, s, x) = just_of(l)?;
    let (hd, s2, y) = just_of(r)?;
    match hd {
        Term::Head(t2) if s == Sort::C && s2 == Sort::E && **t2 == *t && x == y => Some(()),
        _ => None,
    }
}

fn coclos_tail_instance(a: &Formula) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let (t, s, _) = just_of(l)?;
    let (tl, s2, y) = just_of(r)?;
    match tl {
        Term::Tail(t2) if s == Sort::C && s2 == Sort::E && **t2 == *t && y == l => Some(()),
        _ => None,
    }
}

fn induction_instance(a: &Formula) -> Option<()> {
    let (l, r) = a.as_imp()?;
    let Formula::And(base, step) = l else { return None };
    let (t, s1, step_body) = just_of(step)?;
    let (a1, boxed) = step_body.as_imp()?;
    let (s, s2, a2) = just_of(boxed)?;
    let (ind, s3, a3) = just_of(r)?;
    match ind {
        Term::Ind(t2, sv)
            if s1 == Sort::C
                && s2 == Sort::E
                && s3 == Sort::C
                && **t2 == *t
                && **sv == *s
                && **base == *a1
                && a1 == a2
                && a2 == a3 =>
        {
            Some(())
        }
        _ => None,
    }
}

/// Whether `a` instantiates `schema`. Only `Taut` can run into the atom cap.
pub fn instantiates(
    schema: AxiomSchema,
    a: &Formula,
    h: usize,
    cap: usize,
) -> Result<bool, ResourceError> {
    let hit = match schema {
        AxiomSchema::Taut => return is_tautology(a, cap),
        AxiomSchema::App => app_instance(a),
        AxiomSchema::SumL => sum_instance(a, true),
        AxiomSchema::SumR => sum_instance(a, false),
        AxiomSchema::Refl => refl_instance(a),
        AxiomSchema::Insp => insp_instance(a),
        AxiomSchema::Tupling => tupling_instance(a, h),
        AxiomSchema::Proj => proj_instance(a),
        AxiomSchema::CoClosHead => coclos_head_instance(a),
        AxiomSchema::CoClosTail => coclos_tail_instance(a),
        AxiomSchema::Induction => induction_instance(a),
    };
    Ok(hit.is_some())
}

/// Every schema `a` instantiates. A tautology check that exceeds the atom
/// cap leaves `Taut` out rather than guessing.
pub fn match_axiom(a: &Formula, h: usize, cap: usize) -> BTreeSet<AxiomSchema> {
    AxiomSchema::ALL
        .into_iter()
        .filter(|s| instantiates(*s, a, h, cap).unwrap_or(false))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s, 2).unwrap()
    }

    fn matches(s: &str) -> BTreeSet<AxiomSchema> {
        match_axiom(&f(s), 2, DEFAULT_TAUT_ATOM_CAP)
    }

    #[test]
    fn schema_examples() {
        assert_eq!(matches("[x1@1]@1 P1 -> P1"), BTreeSet::from([AxiomSchema::Refl]));
        assert_eq!(matches("P1 -> P1"), BTreeSet::from([AxiomSchema::Taut]));
        assert_eq!(
            matches("P1 & [x1@C]@C (P1 -> [x1@E]@E P1) -> [ind(x1@C,x1@E)]@C P1"),
            BTreeSet::from([AxiomSchema::Induction])
        );
    }

    #[test]
    fn each_schema_has_a_positive_instance() {
        let cases = [
            ("[x1@C]@C (P1 -> P2) -> [x2@C]@C P1 -> [x1@C * x2@C]@C P2", AxiomSchema::App),
            ("[x1@1]@1 P1 -> [x1@1 + x2@1]@1 P1", AxiomSchema::SumL),
            ("[x2@1]@1 P1 -> [x1@1 + x2@1]@1 P1", AxiomSchema::SumR),
            ("[x1@2]@2 P1 -> [!2(x1@2)]@2 [x1@2]@2 P1", AxiomSchema::Insp),
            ("[x1@1]@1 P1 & [x1@2]@2 P1 -> [<x1@1, x1@2>]@E P1", AxiomSchema::Tupling),
            ("[x1@E]@E P1 -> [pi_2(x1@E)]@2 P1", AxiomSchema::Proj),
            ("[x1@C]@C P1 -> [head(x1@C)]@E P1", AxiomSchema::CoClosHead),
            ("[x1@C]@C P1 -> [tail(x1@C)]@E [x1@C]@C P1", AxiomSchema::CoClosTail),
        ];
        for (text, schema) in cases {
            assert!(matches(text).contains(&schema), "{text} should be {schema}");
        }
    }

    #[test]
    fn near_misses_are_rejected() {
        // reflexivity only for agent sorts
        assert!(matches("[x1@C]@C P1 -> P1").is_empty());
        // application needs matching bodies
        assert!(matches("[x1@1]@1 (P1 -> P2) -> [x2@1]@1 P3 -> [x1@1 * x2@1]@1 P2").is_empty());
        // tupling needs the components in agent order
        assert!(matches("[x1@1]@1 P1 & [x1@2]@2 P2 -> [<x1@1, x1@2>]@E P1").is_empty());
        // tail must re-box the same term
        assert!(matches("[x1@C]@C P1 -> [tail(x1@C)]@E [x2@C]@C P1").is_empty());
        assert!(matches("P1 -> [x1@1]@1 P1").is_empty());
    }

    #[test]
    fn tupling_arity_follows_h() {
        let one = parse_formula("[x1@1]@1 P1 -> [<x1@1>]@E P1", 1).unwrap();
        assert!(match_axiom(&one, 1, 24).contains(&AxiomSchema::Tupling));
    }

    #[test]
    fn tautology_examples() {
        assert!(is_tautology(&f("[x1@C]@C P1 -> [x1@C]@C P1"), 24).unwrap());
        assert!(!is_tautology(&f("[x1@C]@C P1 -> P1"), 24).unwrap());
        assert!(is_tautology(&f("~(P1 & ~P1)"), 24).unwrap());
        assert!(!is_tautology(&f("P1 | P2"), 24).unwrap());
        assert!(is_tautology(&f("(P1 -> P2) -> (P2 -> P3) -> P1 -> P3"), 24).unwrap());
    }

    #[test]
    fn tautology_many_atoms_uses_all_lanes() {
        // p1 & ... & p8 -> p8 is valid; p1 | ... | p7 -> p8 is not, and the
        // only falsifying valuations sit outside the first 64-lane chunk.
        let ps: Vec<Formula> = (1..=8).map(Formula::prop).collect();
        let valid = Formula::imp(Formula::conj(ps.clone()), Formula::prop(8));
        assert!(is_tautology(&valid, 24).unwrap());
        let big_or = ps[..7].iter().cloned().reduce(Formula::or).unwrap();
        let invalid = Formula::imp(Formula::neg(Formula::prop(8)), Formula::neg(big_or));
        assert!(!is_tautology(&invalid, 24).unwrap());
    }

    #[test]
    fn tautology_cap() {
        let ps: Vec<Formula> = (1..=5).map(Formula::prop).collect();
        let a = Formula::imp(Formula::conj(ps), Formula::prop(1));
        assert_eq!(
            is_tautology(&a, 4),
            Err(ResourceError::TooManyAtoms { atoms: 5, cap: 4 })
        );
        assert!(!match_axiom(&a, 1, 4).contains(&AxiomSchema::Taut));
    }

    #[test]
    fn schema_ids_round_trip() {
        for s in AxiomSchema::ALL {
            assert_eq!(s.id().parse::<AxiomSchema>().unwrap(), s);
        }
        assert_eq!("CoClosHead".parse::<AxiomSchema>().unwrap(), AxiomSchema::CoClosHead);
    }
}
