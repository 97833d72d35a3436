//! The acceptance suite: seven seeded criteria, shared by the `acceptance`
//! test target and `jck selftest`.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deduction::{
    deduction_theorem, AxiomSchema, ConstantSpecification, Derivation, DerivationBuilder, Kernel,
};
use crate::gen::{self, Signature};
use crate::modal::{
    conservative_projection, forgetful, forgetful_soundness_probe, kripke_satisfies, parse_modal,
    probe_formula, realizes, translate_derivation_x, KripkeModel,
};
use crate::oracle::naive_saturate;
use crate::semantics::{
    build_universe, evidence_holds, random_model, restrict_to_world, satisfies, saturate,
    valid_in_model, AFModel, EvidenceMode, Frame, RandomModelParams,
};
use crate::synthesis::{LiftingContext, Synth};
use crate::syntax::{parse_formula, parse_term, Agent, Formula, Sort, Term};

/// Outcome of one criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Counts and the first few failures.
    pub detail: Vec<String>,
    pub millis: u128,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} [{}] {} ({} ms)", self.id, self.name, self.millis)?;
        for line in &self.detail {
            write!(f, "\n    {line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub criteria: Vec<Criterion>,
}

impl AcceptanceReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

impl fmt::Display for AcceptanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "acceptance suite, seed {}", self.seed)?;
        for c in &self.criteria {
            writeln!(f, "{c}")?;
        }
        let n = self.criteria.iter().filter(|c| c.passed).count();
        write!(f, "{n}/{} criteria passed", self.criteria.len())
    }
}

const MAX_FAILURES_SHOWN: usize = 5;

/// Per-operation pass counts.
#[derive(Default)]
struct Tally {
    rows: Vec<(String, usize, usize)>,
    failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, op: &str, ok: bool, why: impl FnOnce() -> String) {
        let row = match self.rows.iter().position(|r| r.0 == op) {
            Some(i) => &mut self.rows[i],
            None => {
                self.rows.push((op.to_string(), 0, 0));
                self.rows.last_mut().unwrap()
            }
        };
        row.1 += 1;
        if ok {
            row.2 += 1;
        } else if self.failures.len() < MAX_FAILURES_SHOWN {
            self.failures.push(format!("{op}: {}", why()));
        }
    }

    fn all_pass(&self, min_per_op: usize) -> bool {
        // `op/case` rows break an aggregate row down and carry no minimum
        self.rows
            .iter()
            .all(|(op, n, ok)| ok == n && (op.contains('/') || *n >= min_per_op))
    }

    fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .rows
            .iter()
            .map(|(op, n, ok)| format!("{op}: {ok}/{n}"))
            .collect();
        out.extend(self.failures.iter().cloned());
        out
    }
}

fn timed(id: u8, name: &'static str, body: impl FnOnce() -> (bool, Vec<String>)) -> Criterion {
    let start = Instant::now();
    let (passed, detail) = body();
    Criterion {
        id,
        name,
        passed,
        detail,
        millis: start.elapsed().as_millis(),
    }
}

fn rng_for(seed: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(id))
}

fn accepted(d: &Derivation, cs: &ConstantSpecification, h: usize) -> Result<(), String> {
    match Kernel::new(h).check(d, cs).rejection() {
        None => Ok(()),
        Some(r) => Err(format!("kernel rejected at {r}")),
    }
}

/// Runs the derivation check and the exact-shape check for one output.
fn verdict(
    d: &Derivation,
    cs: &ConstantSpecification,
    h: usize,
    want: &Formula,
) -> Result<(), String> {
    accepted(d, cs, h)?;
    match d.conclusion() {
        Some(c) if c == want => Ok(()),
        Some(c) => Err(format!("conclusion `{c}`, expected `{want}`")),
        None => Err("empty derivation".into()),
    }
}

fn imp(a: Formula, b: Formula) -> Formula {
    Formula::imp(a, b)
}

fn just(t: &Term, a: &Formula) -> Formula {
    Formula::just(t.clone(), a.clone())
}

fn componentwise(h: usize, f: impl Fn(Agent) -> Term) -> Term {
    Term::Tuple(Agent::all(h).map(f).collect())
}

fn is_c_bang_of(u: &Term, t: &Term) -> bool {
    matches!(u, Term::Ind(c, tl) if matches!(**c, Term::Const(_, Sort::C)) && **tl == Term::tail(t.clone()))
}

/// A hypothesis-free derivation proving `a -> [s]@E a`.
fn induction_premise<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, k: usize) -> Derivation {
    if k.is_multiple_of(2) {
        let t = gen::term(rng, sig, Sort::C, 3);
        let x = just(&t, &gen::formula(rng, sig, 2));
        let mut b = DerivationBuilder::new();
        let s = b.axiom(imp(x.clone(), just(&Term::tail(t), &x)), AxiomSchema::CoClosTail);
        b.finish(s)
    } else {
        let thm = gen::theorem(rng, sig, 2);
        let a = thm.conclusion().unwrap().clone();
        let mut sy = Synth::total_c(sig.h);
        let (s, nd) = sy.necessitate(&thm, Sort::E).unwrap();
        let mut b = DerivationBuilder::new();
        let nk = b.include(&nd);
        let k = b.glue(&[nk], imp(a.clone(), just(&s, &a)));
        b.finish(k)
    }
}

/// A hypothesis-free derivation of `bf -> [u]@E (a & bf)` with `a` a tautology.
fn induction2_premise<R: Rng + ?Sized>(rng: &mut R, sig: &Signature) -> (Derivation, Formula, Formula) {
    let h = sig.h;
    let t = gen::term(rng, sig, Sort::C, 2);
    let bf = just(&t, &gen::formula(rng, sig, 2));
    let a = gen::axiom_instance(rng, sig, AxiomSchema::Taut, 2);
    let ab = Formula::and(a.clone(), bf.clone());
    let mut sy = Synth::total_c(h);
    let mut b = DerivationBuilder::new();
    let weaken = b.taut(imp(bf.clone(), ab.clone()));
    let (r, nd) = sy.necessitate(&b.clone().finish(weaken), Sort::E).unwrap();
    let nk = b.include(&nd);
    let tail = Term::tail(t);
    let tk = b.axiom(imp(bf.clone(), just(&tail, &bf)), AxiomSchema::CoClosTail);
    let (u, app) = sy.e_app_into(&mut b, &r, &tail, &bf, &ab);
    let k = b.glue(&[nk, tk, app], imp(bf.clone(), just(&u, &ab)));
    (b.finish(k), a, bf)
}

/// Lifting inputs; `case` selects which proof case is guaranteed to occur.
fn lift_input<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, case: usize) -> Derivation {
    let mut b = DerivationBuilder::new();
    let schema = *AxiomSchema::ALL.choose(rng).unwrap();
    let ax = gen::axiom_instance(rng, sig, schema, 2);
    match case {
        0 => {
            let k = b.axiom(ax, schema);
            b.finish(k)
        }
        1 => {
            let s = gen::term(rng, sig, Sort::C, 2);
            let k = b.hyp(just(&s, &gen::formula(rng, sig, 2)));
            b.finish(k)
        }
        2 => {
            let k = b.hyp(gen::formula(rng, sig, 2));
            b.finish(k)
        }
        3 => gen::derivation_with_hypotheses(rng, sig, 2),
        _ => {
            let c = rng.random_range(1..=4);
            let n = b.axnec(c, Sort::C, ax);
            b.finish(n)
        }
    }
}

/// Criterion 1: every synthesis operation, at least 50 inputs each.
pub fn synthesis_soundness(seed: u64) -> Criterion {
    timed(1, "kernel soundness of synthesis", || {
        let mut rng = rng_for(seed, 1);
        let mut tally = Tally::default();
        let n = 50;
        for k in 0..n {
            let h = 1 + k % 3;
            let sig = Signature::new(h);
            let r = &mut rng;
            let fm = |r: &mut ChaCha8Rng| gen::formula(r, &sig, 3);
            let te = |r: &mut ChaCha8Rng| gen::term(r, &sig, Sort::E, 3);
            let tc = |r: &mut ChaCha8Rng| gen::term(r, &sig, Sort::C, 3);
            let mut sy = if k % 2 == 0 { Synth::new(h) } else { Synth::total_c(h) };

            let (t, a) = (te(r), fm(r));
            let res = sy.e_reflexivity(&t, &a).map_err(|e| e.to_string());
            let res = res.and_then(|d| verdict(&d, &sy.cs(), h, &imp(just(&t, &a), a.clone())));
            tally.record("e_reflexivity", res.is_ok(), || res.unwrap_err());

            let (t, s, a, bb) = (te(r), te(r), fm(r), fm(r));
            let want_u = componentwise(h, |i| {
                Term::app(Term::proj(i, t.clone()), Term::proj(i, s.clone()), Sort::Agent(i))
            });
            let res = sy.e_application(&t, &s, &a, &bb).map_err(|e| e.to_string()).and_then(|(u, d)| {
                if u != want_u {
                    return Err(format!("term {u}"));
                }
                let want = imp(just(&t, &imp(a.clone(), bb.clone())), imp(just(&s, &a), just(&u, &bb)));
                verdict(&d, &sy.cs(), h, &want)
            });
            tally.record("e_application", res.is_ok(), || res.unwrap_err());

            let (t, s, a) = (te(r), te(r), fm(r));
            let want_u = componentwise(h, |i| {
                Term::sum(Term::proj(i, t.clone()), Term::proj(i, s.clone()), Sort::Agent(i))
            });
            let res = sy.e_sum(&t, &s, &a).map_err(|e| e.to_string()).and_then(|(u, dl, dr)| {
                if u != want_u {
                    return Err(format!("term {u}"));
                }
                verdict(&dl, &sy.cs(), h, &imp(just(&t, &a), just(&u, &a)))?;
                verdict(&dr, &sy.cs(), h, &imp(just(&s, &a), just(&u, &a)))
            });
            tally.record("e_sum", res.is_ok(), || res.unwrap_err());

            let (t, a) = (tc(r), fm(r));
            let i = Agent::new(r.random_range(1..=h as u32));
            let res = sy.i_conversion(&t, i, &a).map_err(|e| e.to_string()).and_then(|(d_, d)| {
                let want_t = Term::proj(i, Term::head(t.clone()));
                if d_ != want_t {
                    return Err(format!("term {d_}"));
                }
                verdict(&d, &sy.cs(), h, &imp(just(&t, &a), just(&d_, &a)))
            });
            tally.record("i_conversion", res.is_ok(), || res.unwrap_err());

            let (t, a) = (tc(r), fm(r));
            let res = sy.c_reflexivity(&t, &a).map_err(|e| e.to_string());
            let res = res.and_then(|d| verdict(&d, &sy.cs(), h, &imp(just(&t, &a), a.clone())));
            tally.record("c_reflexivity", res.is_ok(), || res.unwrap_err());

            let (t, a) = (tc(r), fm(r));
            let res = sy.c_inspection(&t, &a).map_err(|e| e.to_string()).and_then(|(u, d)| {
                if !is_c_bang_of(&u, &t) {
                    return Err(format!("term {u}"));
                }
                let x = just(&t, &a);
                verdict(&d, &sy.cs(), h, &imp(x.clone(), just(&u, &x)))
            });
            tally.record("c_inspection", res.is_ok(), || res.unwrap_err());

            let (t, a) = (tc(r), fm(r));
            let res = sy.c_shift(&t, &a).map_err(|e| e.to_string()).and_then(|(u, d)| {
                let shaped = matches!(&u, Term::App(c, bang, Sort::C)
                    if matches!(**c, Term::Const(_, Sort::C)) && is_c_bang_of(bang, &t));
                if !shaped {
                    return Err(format!("term {u}"));
                }
                let want = imp(just(&t, &a), just(&u, &just(&Term::head(t.clone()), &a)));
                verdict(&d, &sy.cs(), h, &want)
            });
            tally.record("c_shift", res.is_ok(), || res.unwrap_err());

            // lift: five proof cases in rotation, every target sort
            let case = k % 5;
            let d = lift_input(r, &sig, case);
            let mut ly = if case == 4 { Synth::total_c(h) } else { Synth::new(h) };
            let target = *Sort::all(h).choose(r).unwrap();
            let ctx = LiftingContext::infer(&d);
            let res = ly.lift(&d, target, &ctx).map_err(|e| e.to_string()).and_then(|l| {
                if crate::syntax::sort_of(&l.term, h).ok() != Some(target) {
                    return Err(format!("term {} not of sort {target}", l.term));
                }
                let mut allowed: BTreeSet<Formula> =
                    ctx.c_hypotheses.iter().map(|(s, b)| just(s, b)).collect();
                for (y, c) in l.fresh.iter().zip(&ctx.plain_hypotheses) {
                    allowed.insert(just(y, c));
                }
                if let Some(x) = l.derivation.hypotheses.iter().find(|x| !allowed.contains(*x)) {
                    return Err(format!("unexpected hypothesis {x}"));
                }
                let want = just(&l.term, d.conclusion().unwrap());
                verdict(&l.derivation, &ly.cs(), h, &want)
            });
            let op = ["lift/axiom", "lift/boxed-hyp", "lift/plain-hyp", "lift/mp", "lift/axnec"][case];
            tally.record(op, res.is_ok(), || res.clone().unwrap_err());
            // the aggregate row carries the 50-input requirement
            tally.record("lift", res.is_ok(), String::new);

            let thm = gen::theorem(r, &sig, 3);
            let target = *Sort::all(h).choose(r).unwrap();
            let res = sy.necessitate(&thm, target).map_err(|e| e.to_string()).and_then(|(t, d)| {
                if !t.is_ground() {
                    return Err(format!("term {t} is not ground"));
                }
                verdict(&d, &sy.cs(), h, &just(&t, thm.conclusion().unwrap()))
            });
            tally.record("necessitate", res.is_ok(), || res.unwrap_err());

            let premise = induction_premise(r, &sig, k);
            let mut iy = Synth::total_c(h);
            let res = iy.internalize_induction_1(&premise).map_err(|e| e.to_string()).and_then(|(t, d)| {
                let (a, boxed) = premise.conclusion().unwrap().as_imp().unwrap();
                let s = boxed.as_just().unwrap().0;
                let u = Term::ind(t, s.clone());
                verdict(&d, &iy.cs(), h, &imp(a.clone(), just(&u, a)))
            });
            tally.record("internalize_induction_1", res.is_ok(), || res.unwrap_err());

            let (premise, a, bf) = induction2_premise(r, &sig);
            // the premise uses TotalC constants, so the context must accept them
            let mut iy = Synth::total_c(h);
            let s = premise.conclusion().unwrap().as_imp().unwrap().1.as_just().unwrap().0.clone();
            let res = iy.internalize_induction_2(&premise).map_err(|e| e.to_string()).and_then(|(t, c, d)| {
                let u = Term::app(Term::constant(c, Sort::C), Term::ind(t, s), Sort::C);
                verdict(&d, &iy.cs(), h, &imp(bf.clone(), just(&u, &a)))
            });
            tally.record("internalize_induction_2", res.is_ok(), || res.unwrap_err());

            let d = loop {
                let d = gen::derivation_with_hypotheses(r, &sig, 2);
                if !d.hypotheses.is_empty() {
                    break d;
                }
            };
            let which = r.random_range(1..=d.hypotheses.len());
            let kernel = Kernel::new(h);
            let cs = ConstantSpecification::TotalC;
            let res = deduction_theorem(&kernel, &d, &cs, which).map_err(|e| e.to_string()).and_then(|out| {
                let mut rest = d.hypotheses.clone();
                let dropped = rest.remove(which - 1);
                if out.hypotheses.iter().any(|x| !rest.contains(x)) {
                    return Err("unexpected hypotheses".into());
                }
                verdict(&out, &cs, h, &imp(dropped, d.conclusion().unwrap().clone()))
            });
            tally.record("deduction_theorem", res.is_ok(), || res.unwrap_err());

            let thm = if k % 2 == 0 {
                gen::theorem(r, &sig, 3)
            } else {
                let (t, a) = (tc(r), fm(r));
                Synth::total_c(h).c_shift(&t, &a).map(|x| x.1).unwrap()
            };
            let res = translate_derivation_x(&thm, &ConstantSpecification::TotalC, h)
                .map_err(|e| e.to_string())
                .and_then(|x| {
                    let want = conservative_projection(thm.conclusion().unwrap());
                    match Kernel::single_agent(h).check(&x.derivation, &x.cs_x).rejection() {
                        Some(r) => Err(format!("rejected at {r}")),
                        None if x.derivation.conclusion() == Some(&want) => Ok(()),
                        None => Err("conclusion differs from the projection".into()),
                    }
                });
            tally.record("translate_derivation_x", res.is_ok(), || res.unwrap_err());
        }
        (tally.all_pass(n), tally.lines())
    })
}

/// Hypothesis-free synthesized theorems over `h` agents.
pub fn synthesized_theorems<R: Rng + ?Sized>(rng: &mut R, h: usize, n: usize) -> Vec<Derivation> {
    let sig = Signature::new(h);
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while out.len() < n {
        let mut sy = Synth::total_c(h);
        let t = gen::term(rng, &sig, Sort::C, 2);
        let e = gen::term(rng, &sig, Sort::E, 2);
        let a = gen::formula(rng, &sig, 2);
        let bb = gen::formula(rng, &sig, 2);
        let d = match k % 9 {
            0 => sy.e_reflexivity(&e, &a),
            1 => sy.e_application(&e, &gen::term(rng, &sig, Sort::E, 2), &a, &bb).map(|x| x.1),
            2 => sy.e_sum(&e, &gen::term(rng, &sig, Sort::E, 2), &a).map(|x| x.1),
            3 => sy.i_conversion(&t, Agent::new(rng.random_range(1..=h as u32)), &a).map(|x| x.1),
            4 => sy.c_reflexivity(&t, &a),
            5 => sy.c_inspection(&t, &a).map(|x| x.1),
            6 => sy.c_shift(&t, &a).map(|x| x.1),
            7 => {
                let thm = gen::theorem(rng, &sig, 2);
                let target = *Sort::all(h).choose(rng).unwrap();
                sy.necessitate(&thm, target).map(|x| x.1)
            }
            _ => {
                let premise = induction_premise(rng, &sig, k);
                sy.internalize_induction_1(&premise).map(|x| x.1)
            }
        };
        k += 1;
        if let Ok(d) = d {
            out.push(d);
        }
    }
    out
}

/// Criterion 2: synthesized theorems are valid in random everything-evidence models.
pub fn semantic_soundness(seed: u64) -> Criterion {
    timed(2, "semantic soundness probe", || {
        let mut rng = rng_for(seed, 2);
        let theorems: Vec<Vec<Derivation>> = (1..=3).map(|h| synthesized_theorems(&mut rng, h, 25)).collect();
        let mut checks = 0;
        let mut failures = Vec::new();
        for m in 0..100u64 {
            let h = 1 + (m % 3) as usize;
            let params = RandomModelParams {
                density: rng.random_range(0.0..0.7),
                mode: EvidenceMode::Full,
                ..RandomModelParams::new(h, rng.random_range(1..=5), seed ^ (m << 8))
            };
            let model = random_model(&params);
            for d in &theorems[h - 1] {
                checks += 1;
                let a = d.conclusion().unwrap();
                match valid_in_model(&model, a, 0) {
                    Ok(true) => {}
                    other => {
                        if failures.len() < MAX_FAILURES_SHOWN {
                            failures.push(format!("model {m}: {a} gave {other:?}"));
                        }
                    }
                }
            }
        }
        let mut detail = vec![format!("{checks} model/theorem pairs, {} failures", failures.len())];
        let passed = failures.is_empty() && checks == 2500;
        detail.extend(failures);
        (passed, detail)
    })
}

/// Base facts composed so that every closure rule has premises to fire on,
/// and a query mentioning the composite terms.
pub fn saturation_instance<R: Rng + ?Sized>(rng: &mut R, h: usize) -> (AFModel, Formula) {
    let worlds = rng.random_range(1..=4);
    let params = RandomModelParams {
        base_facts: 0,
        density: rng.random_range(0.0..0.6),
        ..RandomModelParams::new(h, worlds, rng.random())
    };
    let mut m = random_model(&params);
    let p = |rng: &mut R| Formula::prop(rng.random_range(1..=2));
    let (a, b) = (p(rng), p(rng));
    let star = gen::star_sort(rng, h);
    let (t1, t2) = (Term::var(1, star), Term::var(2, star));
    let e = Term::var(1, Sort::E);
    let c = Term::var(1, Sort::C);
    let mut w = || rng.random_range(0..worlds);
    let facts = vec![
        (w(), t1.clone(), imp(a.clone(), b.clone())),
        (w(), t2.clone(), a.clone()),
        (w(), e.clone(), a.clone()),
        (w(), c.clone(), imp(a.clone(), just(&e, &a))),
        (w(), c.clone(), b.clone()),
    ];
    let mut comps: Vec<Term> = Agent::all(h).map(|i| Term::var(1, Sort::Agent(i))).collect();
    for (k, i) in Agent::all(h).enumerate() {
        m.add_fact(w(), comps[k].clone(), a.clone());
        let _ = i;
    }
    for (x, t, f) in facts {
        m.add_fact(x, t, f);
    }
    let agent = Agent::new(rng.random_range(1..=h as u32));
    let ai = Term::var(1, Sort::Agent(agent));
    comps.rotate_left(0);
    let composites = [
        Term::app(t1.clone(), t2.clone(), star),
        Term::sum(t2.clone(), t1.clone(), star),
        Term::bang(ai.clone(), agent),
        Term::Tuple(comps),
        Term::proj(agent, e.clone()),
        Term::head(c.clone()),
        Term::tail(c.clone()),
        Term::ind(c.clone(), e.clone()),
    ];
    let mut q = Formula::prop(1);
    for t in composites.iter().filter(|_| rng.random_bool(0.7)) {
        let s = crate::syntax::sort_of(t, h).unwrap();
        let body = if s == Sort::C || s == Sort::E { a.clone() } else { b.clone() };
        q = Formula::and(q, just(t, &body));
    }
    (m, q)
}

/// Criterion 3: the indexed saturator agrees with the naive fixpoint.
pub fn saturation_equivalence(seed: u64) -> Criterion {
    timed(3, "saturation oracle equivalence", || {
        let mut rng = rng_for(seed, 3);
        let mut done = 0;
        let mut skipped = 0;
        let mut facts = 0;
        let mut failures = Vec::new();
        while done < 200 {
            let h = rng.random_range(1..=3);
            let (m, q) = saturation_instance(&mut rng, h);
            let budget = rng.random_range(0..=2);
            let u = match build_universe(&m, &[&q], budget) {
                Ok(u) if u.formulas.len() <= 40 => u,
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            done += 1;
            let fast: BTreeSet<(usize, Term, Formula)> = saturate(&m, &u)
                .facts()
                .into_iter()
                .map(|f| (f.world, f.term, f.formula))
                .collect();
            let slow = naive_saturate(&m, &u);
            facts += slow.len();
            if fast != slow && failures.len() < MAX_FAILURES_SHOWN {
                let extra: Vec<String> = fast.difference(&slow).take(2).map(|f| format!("{f:?}")).collect();
                let missing: Vec<String> = slow.difference(&fast).take(2).map(|f| format!("{f:?}")).collect();
                failures.push(format!("instance {done}: extra {extra:?}, missing {missing:?}"));
            }
        }
        let mut detail = vec![format!(
            "{done} instances ({skipped} resampled for size), {facts} facts, {} mismatches",
            failures.len()
        )];
        let passed = failures.is_empty();
        detail.extend(failures);
        (passed, detail)
    })
}

/// Agent names used in the coordinated-attack fixtures.
pub const ATTACK_G: u32 = 1;
pub const ATTACK_H: u32 = 2;

/// The 4-world coordinated-attack model: `del = P1`, `m1 = c1@2`,
/// `m2 = c2@1`, base facts at world 0 and `TotalC`.
pub fn attack_model() -> AFModel {
    let mut frame = Frame::new(2, 4);
    frame.add_edge(ATTACK_G, 1, 2);
    frame.add_edge(ATTACK_H, 0, 1);
    frame.add_edge(ATTACK_H, 2, 3);
    frame.close();
    for w in 0..3 {
        frame.set_true(1, w);
    }
    let mut m = AFModel::new(frame, ConstantSpecification::TotalC, EvidenceMode::Base);
    m.add_fact(0, attack_m1(), Formula::prop(1));
    m.add_fact(0, attack_m2(), just(&attack_m1(), &Formula::prop(1)));
    m
}

pub fn attack_m1() -> Term {
    Term::constant(1, Sort::agent(ATTACK_H))
}

pub fn attack_m2() -> Term {
    Term::constant(2, Sort::agent(ATTACK_G))
}

/// Leaves of the enumerated term families: both messages and one `C`-constant.
pub fn attack_leaves() -> Vec<Term> {
    vec![attack_m1(), attack_m2(), Term::constant(3, Sort::C)]
}

/// The claims checked by the demonstration, one line each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackReport {
    pub lines: Vec<(bool, String)>,
}

impl AttackReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.0)
    }
}

impl fmt::Display for AttackReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (ok, line)) in self.lines.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{} {line}", if *ok { "ok  " } else { "FAIL" })?;
        }
        Ok(())
    }
}

/// Reproduces the coordinated-attack scenario with term families of depth
/// at most `depth`.
pub fn demo_attack(depth: usize) -> AttackReport {
    let m = attack_model();
    let del = Formula::prop(1);
    let f = |s: &str| parse_formula(s, 2).unwrap();
    let mut lines = Vec::new();
    let mut claim = |ok: bool, text: String| lines.push((ok, text));

    let sat = |a: &Formula, w| satisfies(&m, w, a, depth).unwrap_or(false);
    let m1_del = f("[c1@2]@2 P1");
    let m2_m1_del = f("[c2@1]@1 [c1@2]@2 P1");
    claim(sat(&m1_del, 0), format!("world 0 satisfies {m1_del}"));
    claim(sat(&m2_m1_del, 0), format!("world 0 satisfies {m2_m1_del}"));
    claim(!sat(&del, 3), "world 3 falsifies P1".to_string());

    let leaves = attack_leaves();
    let h_terms = gen::enumerate_terms(&leaves, Sort::agent(ATTACK_H), depth, 2);
    let c_terms = gen::enumerate_terms(&leaves, Sort::C, depth, 2);
    // the falsifications must not depend on the evidence function
    let mut full = m.clone();
    full.mode = EvidenceMode::Full;
    for (label, model) in [("minimal evidence", &m), ("full evidence", &full)] {
        let sat = |a: &Formula| satisfies(model, 0, a, depth).unwrap_or(true);
        let bad = h_terms.iter().filter(|s| sat(&just(s, &m2_m1_del))).count();
        claim(
            bad == 0,
            format!(
                "{label}: world 0 falsifies [s]@2 {m2_m1_del} for all {} enumerated s of depth <= {depth}",
                h_terms.len()
            ),
        );
        let bad = c_terms.iter().filter(|t| sat(&just(t, &del))).count();
        claim(
            bad == 0,
            format!(
                "{label}: world 0 falsifies [t]@C P1 for all {} enumerated t of depth <= {depth}",
                c_terms.len()
            ),
        );
    }

    let k: &KripkeModel = &m.frame;
    let image = parse_modal("#2 P1 & #1 #2 P1 -> #C P1", 2).unwrap();
    claim(!kripke_satisfies(k, 0, &image), format!("Kripke world 0 falsifies {image}"));
    let mut toggled = k.clone();
    toggled.set_true(1, 3);
    claim(
        kripke_satisfies(&toggled, 0, &image),
        "with P1 true everywhere the same implication holds at world 0".to_string(),
    );

    let single = restrict_to_world(&m, 0).unwrap();
    let base_ok = evidence_holds(&single, 0, &attack_m1(), &del, depth).unwrap_or(false);
    claim(base_ok, "singleton model: P1 is evidenced by c1@2 for agent 2".to_string());
    let mut errors = 0;
    let bad: Vec<&Term> = c_terms
        .iter()
        .filter(|t| match evidence_holds(&single, 0, t, &del, depth) {
            Ok(b) => b,
            Err(_) => {
                errors += 1;
                true
            }
        })
        .collect();
    claim(
        bad.is_empty(),
        format!(
            "singleton model: P1 has no C-evidence among {} enumerated terms of depth <= {depth}, \
             saturation budget {depth} (bounded check, not a proof of non-membership; {errors} resource errors)",
            c_terms.len()
        ),
    );
    AttackReport { lines }
}

/// Criterion 4: the coordinated-attack scenario.
pub fn attack_reproduction(_seed: u64) -> Criterion {
    timed(4, "coordinated-attack reproduction", || {
        let r = demo_attack(3);
        (r.passed(), r.to_string().lines().map(String::from).collect())
    })
}

/// Criterion 5: translation contracts.
pub fn translation_contracts(seed: u64) -> Criterion {
    timed(5, "translation contracts", || {
        let mut rng = rng_for(seed, 5);
        let mut tally = Tally::default();
        for k in 0..100 {
            let sig = Signature::new(1 + k % 3);
            let a = gen::lp_h_formula(&mut rng, &sig, 4);
            let ok = conservative_projection(&a) == a;
            tally.record("projection identity on LP_h formulas", ok, || a.to_string());
        }
        for k in 0..55 {
            let h = 1 + k % 3;
            let sig = Signature::new(h);
            let schema = AxiomSchema::ALL[k % AxiomSchema::ALL.len()];
            let ax = gen::axiom_instance(&mut rng, &sig, schema, 3);
            let mut b = DerivationBuilder::new();
            let s = b.axiom(ax.clone(), schema);
            let d = b.finish(s);
            let res = translate_derivation_x(&d, &ConstantSpecification::TotalC, h)
                .map_err(|e| e.to_string())
                .and_then(|x| {
                    let want = conservative_projection(&ax);
                    if x.derivation.conclusion() != Some(&want) {
                        return Err(format!("conclusion differs for {ax}"));
                    }
                    match Kernel::single_agent(h).check(&x.derivation, &x.cs_x).rejection() {
                        Some(r) => Err(format!("{ax}: rejected at {r}")),
                        None => Ok(()),
                    }
                });
            tally.record("axiom instances re-check", res.is_ok(), || res.unwrap_err());
        }
        for k in 0..100 {
            let sig = Signature::new(1 + k % 3);
            let r = gen::formula(&mut rng, &sig, 4);
            tally.record("realizes(R, forgetful(R))", realizes(&r, &forgetful(&r)), || r.to_string());
        }
        (tally.all_pass(50), tally.lines())
    })
}

/// Criterion 6: no Kripke countermodel to forgetful images; the control is refuted.
pub fn forgetful_probe(seed: u64) -> Criterion {
    timed(6, "forgetful probe", || {
        let mut rng = rng_for(seed, 6);
        let mut detail = Vec::new();
        let mut passed = true;
        let mut clean = 0;
        for k in 0..25 {
            let h = 1 + k % 3;
            let d = synthesized_theorems(&mut rng, h, 1).pop().unwrap();
            let report = forgetful_soundness_probe(&d, h, 100, seed ^ k as u64);
            if report.counterexample.is_some() {
                passed = false;
                if detail.len() < MAX_FAILURES_SHOWN {
                    detail.push(report.to_string());
                }
            } else {
                clean += 1;
            }
        }
        detail.insert(0, format!("{clean}/25 theorems without counterexample in 100 trials"));
        let control = parse_modal("#1 P1 -> #C P1", 2).unwrap();
        let refuted = probe_formula(&control, 2, 100, seed).counterexample.is_some();
        passed &= refuted;
        detail.push(format!(
            "control {control}: {}",
            if refuted { "refuted" } else { "not refuted" }
        ));
        (passed, detail)
    })
}

/// Criterion 7: printing then parsing is the identity.
pub fn round_trip(seed: u64) -> Criterion {
    timed(7, "round-trip parsing", || {
        let mut rng = rng_for(seed, 7);
        let mut tally = Tally::default();
        for k in 0..500 {
            let h = 1 + k % 3;
            let sig = Signature::new(h);
            if k % 2 == 0 {
                let s = gen::sort(&mut rng, h);
                let t = gen::term(&mut rng, &sig, s, 4);
                let back = parse_term(&t.to_string(), h);
                tally.record("terms and formulas", back.as_ref() == Ok(&t), || t.to_string());
            } else {
                let a = gen::formula(&mut rng, &sig, 4);
                let back = parse_formula(&a.to_string(), h);
                tally.record("terms and formulas", back.as_ref() == Ok(&a), || a.to_string());
            }
        }
        (tally.all_pass(500), tally.lines())
    })
}

pub fn run_all(seed: u64) -> AcceptanceReport {
    AcceptanceReport {
        seed,
        criteria: vec![
            synthesis_soundness(seed),
            semantic_soundness(seed),
            saturation_equivalence(seed),
            attack_reproduction(seed),
            translation_contracts(seed),
            forgetful_probe(seed),
            round_trip(seed),
        ],
    }
}
