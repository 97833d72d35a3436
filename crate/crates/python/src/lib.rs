//! Python bindings: terms, formulas, derivations, the kernel, synthesis,
//! models and the modal tools. Inputs are taken in the text syntax;
//! parse errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use jck_core::acceptance;
use jck_core::deduction::{
    parse_cs_table, parse_derivation, print_cs_table, print_derivation, ConstantSpecification, Derivation,
    Kernel,
};
use jck_core::modal::{self, parse_modal};
use jck_core::semantics::{self as sem, parse_model, AFModel};
use jck_core::synthesis::{LiftingContext, Synth as CoreSynth};
use jck_core::syntax::{self, Sort};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sort_from(s: &str, h: usize) -> PyResult<Sort> {
    match s.trim_start_matches('@') {
        "E" => Ok(Sort::E),
        "C" => Ok(Sort::C),
        k => match k.parse::<u32>() {
            Ok(i) if i >= 1 && i as usize <= h => Ok(Sort::agent(i)),
            _ => Err(value_err(format!("bad sort `{s}`"))),
        },
    }
}

fn cs_from(table: Option<&str>, h: usize) -> PyResult<ConstantSpecification> {
    match table {
        None => Ok(ConstantSpecification::TotalC),
        Some(t) => parse_cs_table(t, &Kernel::new(h), &syntax::Names::new()).map_err(value_err),
    }
}

#[pyclass(frozen, eq, hash, skip_from_py_object, module = "jck")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct Term {
    inner: syntax::Term,
    h: usize,
}

#[pymethods]
impl Term {
    #[new]
    #[pyo3(signature = (text, h = 2))]
    fn new(text: &str, h: usize) -> PyResult<Self> {
        let inner = syntax::parse_term(text, h).map_err(value_err)?;
        Ok(Term { inner, h })
    }

    /// `"1"`..`"h"`, `"E"` or `"C"`.
    #[getter]
    fn sort(&self) -> String {
        self.inner.sort().to_string()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Term('{}')", self.inner)
    }
}

#[pyclass(frozen, eq, hash, skip_from_py_object, module = "jck")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct Formula {
    inner: syntax::Formula,
    h: usize,
}

#[pymethods]
impl Formula {
    #[new]
    #[pyo3(signature = (text, h = 2))]
    fn new(text: &str, h: usize) -> PyResult<Self> {
        let inner = syntax::parse_formula(text, h).map_err(value_err)?;
        Ok(Formula { inner, h })
    }

    /// The modal formula obtained by forgetting evidence terms.
    fn forgetful(&self) -> String {
        modal::forgetful(&self.inner).to_string()
    }

    /// The image with every group-evidence box dropped.
    fn projection(&self) -> Formula {
        Formula {
            inner: modal::conservative_projection(&self.inner),
            h: self.h,
        }
    }

    fn realizes(&self, modal_text: &str) -> PyResult<bool> {
        let a = parse_modal(modal_text, self.h).map_err(value_err)?;
        Ok(modal::realizes(&self.inner, &a))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula('{}')", self.inner)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "jck")]
#[derive(Clone)]
struct CheckReport {
    #[pyo3(get)]
    accepted: bool,
    #[pyo3(get)]
    message: String,
}

#[pymethods]
impl CheckReport {
    fn __bool__(&self) -> bool {
        self.accepted
    }

    fn __str__(&self) -> String {
        self.message.clone()
    }
}

#[pyclass(frozen, skip_from_py_object, module = "jck")]
#[derive(Clone)]
struct Proof {
    inner: Derivation,
    h: usize,
    /// Table text for a non-`TotalC` specification.
    #[pyo3(get)]
    cs_table: Option<String>,
}

impl Proof {
    fn cs(&self) -> PyResult<ConstantSpecification> {
        cs_from(self.cs_table.as_deref(), self.h)
    }
}

#[pymethods]
impl Proof {
    /// Parses the derivation file format; `cs_table` holds `c<k>@<s> := A` lines.
    #[new]
    #[pyo3(signature = (text, h = 2, cs_table = None))]
    fn new(text: &str, h: usize, cs_table: Option<String>) -> PyResult<Self> {
        let p = parse_derivation(text, h).map_err(value_err)?;
        let h = p.h.unwrap_or(h);
        let embedded = text.contains(":=").then(|| text.to_string());
        Ok(Proof {
            inner: p.derivation,
            h,
            cs_table: cs_table.or(embedded),
        })
    }

    #[getter]
    fn conclusion(&self) -> Option<Formula> {
        self.inner.conclusion().map(|a| Formula { inner: a.clone(), h: self.h })
    }

    #[getter]
    fn hypotheses(&self) -> Vec<Formula> {
        self.inner
            .hypotheses
            .iter()
            .map(|a| Formula { inner: a.clone(), h: self.h })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn check(&self) -> PyResult<CheckReport> {
        let report = Kernel::new(self.h).check(&self.inner, &self.cs()?);
        Ok(CheckReport {
            accepted: report.is_accepted(),
            message: report.to_string(),
        })
    }

    /// Translation into the fragment without group evidence.
    fn translate_x(&self) -> PyResult<Proof> {
        let x = modal::translate_derivation_x(&self.inner, &self.cs()?, self.h).map_err(value_err)?;
        Ok(Proof {
            inner: x.derivation,
            h: self.h,
            cs_table: Some(print_cs_table(&x.cs_x)),
        })
    }

    /// A falsifying Kripke model of the forgetful image, if one is found.
    #[pyo3(signature = (trials = 100, seed = 0))]
    fn probe(&self, trials: usize, seed: u64) -> Option<String> {
        let r = modal::forgetful_soundness_probe(&self.inner, self.h, trials, seed);
        r.counterexample.is_some().then(|| r.to_string())
    }

    fn __str__(&self) -> String {
        print_derivation(&self.inner, Some(self.h))
    }
}

/// A synthesis context. With `total_c` every `C`-constant justifies every
/// axiom; otherwise constants are allocated and recorded in a table.
#[pyclass(module = "jck")]
struct Synth {
    inner: CoreSynth,
}

impl Synth {
    fn out(&self, d: Derivation) -> Proof {
        let cs = self.inner.cs();
        Proof {
            inner: d,
            h: self.inner.h(),
            cs_table: (!matches!(cs, ConstantSpecification::TotalC)).then(|| print_cs_table(&cs)),
        }
    }

    fn term(&self, t: syntax::Term) -> Term {
        Term { inner: t, h: self.inner.h() }
    }
}

#[pymethods]
impl Synth {
    #[new]
    #[pyo3(signature = (h = 2, total_c = true))]
    fn new(h: usize, total_c: bool) -> PyResult<Self> {
        if h == 0 {
            return Err(value_err("h must be at least 1"));
        }
        let inner = if total_c { CoreSynth::total_c(h) } else { CoreSynth::new(h) };
        Ok(Synth { inner })
    }

    fn lift(&mut self, proof: &Proof, sort: &str) -> PyResult<(Term, Proof)> {
        let target = sort_from(sort, self.inner.h())?;
        let ctx = LiftingContext::infer(&proof.inner);
        let l = self.inner.lift(&proof.inner, target, &ctx).map_err(value_err)?;
        Ok((self.term(l.term), self.out(l.derivation)))
    }

    fn necessitate(&mut self, proof: &Proof, sort: &str) -> PyResult<(Term, Proof)> {
        let target = sort_from(sort, self.inner.h())?;
        let (t, d) = self.inner.necessitate(&proof.inner, target).map_err(value_err)?;
        Ok((self.term(t), self.out(d)))
    }

    fn internalize_induction_1(&mut self, proof: &Proof) -> PyResult<(Term, Proof)> {
        let (t, d) = self.inner.internalize_induction_1(&proof.inner).map_err(value_err)?;
        Ok((self.term(t), self.out(d)))
    }

    fn internalize_induction_2(&mut self, proof: &Proof) -> PyResult<(Term, u32, Proof)> {
        let (t, c, d) = self.inner.internalize_induction_2(&proof.inner).map_err(value_err)?;
        Ok((self.term(t), c, self.out(d)))
    }

    fn e_reflexivity(&mut self, t: &Term, a: &Formula) -> PyResult<Proof> {
        let d = self.inner.e_reflexivity(&t.inner, &a.inner).map_err(value_err)?;
        Ok(self.out(d))
    }

    fn c_reflexivity(&mut self, t: &Term, a: &Formula) -> PyResult<Proof> {
        let d = self.inner.c_reflexivity(&t.inner, &a.inner).map_err(value_err)?;
        Ok(self.out(d))
    }

    fn c_inspection(&mut self, t: &Term, a: &Formula) -> PyResult<(Term, Proof)> {
        let (u, d) = self.inner.c_inspection(&t.inner, &a.inner).map_err(value_err)?;
        Ok((self.term(u), self.out(d)))
    }

    fn c_shift(&mut self, t: &Term, a: &Formula) -> PyResult<(Term, Proof)> {
        let (u, d) = self.inner.c_shift(&t.inner, &a.inner).map_err(value_err)?;
        Ok((self.term(u), self.out(d)))
    }

    fn cs_table(&self) -> String {
        print_cs_table(&self.inner.cs())
    }
}

#[pyclass(frozen, module = "jck")]
struct Model {
    inner: AFModel,
    names: syntax::Names,
    #[pyo3(get)]
    warnings: Vec<String>,
}

impl Model {
    fn formula(&self, text: &str) -> PyResult<syntax::Formula> {
        syntax::parse_formula_with(text, self.inner.h(), &self.names).map_err(value_err)
    }

    fn world(&self, w: &Bound<'_, PyAny>) -> PyResult<usize> {
        if let Ok(k) = w.extract::<usize>() {
            if k < self.inner.frame.len() {
                return Ok(k);
            }
        } else if let Ok(name) = w.extract::<String>() {
            if let Some(k) = self.inner.frame.world(&name) {
                return Ok(k);
            }
        }
        Err(value_err(format!("unknown world {w}")))
    }
}

#[pymethods]
impl Model {
    /// Parses the model file format; `cs: file` lines are not allowed here.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let p = parse_model(text, None).map_err(value_err)?;
        Ok(Model {
            inner: p.model,
            names: p.names,
            warnings: p.warnings,
        })
    }

    #[pyo3(signature = (formula, world, depth = 3))]
    fn satisfies(&self, formula: &str, world: &Bound<'_, PyAny>, depth: usize) -> PyResult<bool> {
        let a = self.formula(formula)?;
        sem::satisfies(&self.inner, self.world(world)?, &a, depth).map_err(value_err)
    }

    #[pyo3(signature = (formula, depth = 3))]
    fn valid(&self, formula: &str, depth: usize) -> PyResult<bool> {
        let a = self.formula(formula)?;
        sem::valid_in_model(&self.inner, &a, depth).map_err(value_err)
    }

    /// Kripke evaluation of a modal formula, ignoring evidence.
    fn kripke(&self, modal_text: &str, world: &Bound<'_, PyAny>) -> PyResult<bool> {
        let a = parse_modal(modal_text, self.inner.h()).map_err(value_err)?;
        Ok(modal::kripke_satisfies(&self.inner.frame, self.world(world)?, &a))
    }

    /// Violated model conditions, empty when the model is well formed.
    fn validate(&self) -> Vec<String> {
        sem::validate_model(&self.inner)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    fn __str__(&self) -> String {
        sem::print_model(&self.inner)
    }
}

/// A Kripke countermodel to a modal formula, if one is found.
#[pyfunction]
#[pyo3(signature = (modal_text, h = 2, trials = 100, seed = 0))]
fn probe(modal_text: &str, h: usize, trials: usize, seed: u64) -> PyResult<Option<String>> {
    let a = parse_modal(modal_text, h).map_err(value_err)?;
    let r = modal::probe_formula(&a, h, trials, seed);
    Ok(r.counterexample.is_some().then(|| r.to_string()))
}

/// `(passed, report)` for the coordinated-attack demonstration.
#[pyfunction]
#[pyo3(signature = (depth = 3))]
fn demo_attack(depth: usize) -> (bool, String) {
    let r = acceptance::demo_attack(depth);
    (r.passed(), r.to_string())
}

/// `(passed, report)` for the acceptance suite.
#[pyfunction]
#[pyo3(signature = (seed = 20_240_601))]
fn selftest(py: Python<'_>, seed: u64) -> (bool, String) {
    let r = py.detach(|| acceptance::run_all(seed));
    (r.passed(), r.to_string())
}

#[pymodule]
fn jck(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Term>()?;
    m.add_class::<Formula>()?;
    m.add_class::<Proof>()?;
    m.add_class::<CheckReport>()?;
    m.add_class::<Synth>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(probe, m)?)?;
    m.add_function(wrap_pyfunction!(demo_attack, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
