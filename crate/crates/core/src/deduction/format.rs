//! Text formats for derivations and constant-specification tables.
//!
//! A derivation file holds an optional `h: <n>` line, `alias <name> = P<k>|c<k>`
//! lines, `hyp: <formula>` lines and then numbered steps
//! `k. <formula> ; <rule>`. Lines containing `:=` belong to a CS table and
//! are skipped, so one file can carry a proof together with its table.
//! `//` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use super::{AxiomSchema, ConstantSpecification, CsEntry, Derivation, Kernel, Rule, Step};
use crate::syntax::{parse_formula_with, parse_term_with, Names, Sort, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedDerivation {
    /// The `h:` header, if the file had one.
    pub h: Option<usize>,
    pub derivation: Derivation,
    pub names: Names,
}

fn strip_comment(line: &str) -> &str {
    match line.find("//") {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

/// Reads the `h:` header and alias lines shared by all file formats.
pub(crate) fn read_header(
    text: &str,
    names: &mut Names,
) -> Result<Option<usize>, FormatError> {
    let mut h = None;
    for (n, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if let Some(rest) = line.strip_prefix("h:") {
            let v: usize = rest
                .trim()
                .parse()
                .map_err(|_| err(n + 1, format!("bad agent count `{}`", rest.trim())))?;
            if v == 0 {
                return Err(err(n + 1, "h must be at least 1"));
            }
            h = Some(v);
        } else if let Some(rest) = line.strip_prefix("alias ") {
            let (name, target) = rest
                .split_once('=')
                .ok_or_else(|| err(n + 1, "expected `alias <name> = <target>`"))?;
            names
                .bind(name.trim(), target.trim())
                .map_err(|m| err(n + 1, m))?;
        }
    }
    Ok(h)
}

fn parse_constant(
    text: &str,
    h: usize,
    names: &Names,
    line: usize,
) -> Result<(u32, Sort), FormatError> {
    match parse_term_with(text, h, names) {
        Ok(Term::Const(k, s)) => Ok((k, s)),
        Ok(t) => Err(err(line, format!("`{t}` is not a constant"))),
        Err(e) => Err(err(line, e.to_string())),
    }
}

fn parse_rule(text: &str, h: usize, names: &Names, line: usize) -> Result<Rule, FormatError> {
    let mut words = text.split_whitespace();
    let kind = words.next().ok_or_else(|| err(line, "missing rule"))?;
    let rest: Vec<&str> = words.collect();
    let index = |s: &str| -> Result<usize, FormatError> {
        s.parse::<usize>()
            .map_err(|_| err(line, format!("bad step index `{s}`")))
    };
    match (kind, rest.as_slice()) {
        ("hyp", [n]) => Ok(Rule::Hyp(index(n)?)),
        ("axiom", [id]) => id
            .parse::<AxiomSchema>()
            .map(Rule::Axiom)
            .map_err(|m| err(line, m)),
        ("mp", [i, j]) => Ok(Rule::MP(index(i)?, index(j)?)),
        ("axnec", [c]) => {
            let (k, s) = parse_constant(c, h, names, line)?;
            Ok(Rule::AxNec(k, s))
        }
        _ => Err(err(line, format!("cannot read rule `{text}`"))),
    }
}

/// Parses a derivation file; `h` is used when the file has no `h:` header.
pub fn parse_derivation(text: &str, h: usize) -> Result<ParsedDerivation, FormatError> {
    parse_derivation_with(text, h, &Names::new())
}

pub fn parse_derivation_with(
    text: &str,
    h: usize,
    names: &Names,
) -> Result<ParsedDerivation, FormatError> {
    let mut names = names.clone();
    let h_decl = read_header(text, &mut names)?;
    let h = h_decl.unwrap_or(h);
    let mut d = Derivation::default();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = strip_comment(raw);
        if line.is_empty()
            || line.contains(":=")
            || line.starts_with("h:")
            || line.starts_with("alias ")
        {
            continue;
        }
        if let Some(rest) = line.strip_prefix("hyp:") {
            if !d.steps.is_empty() {
                return Err(err(line_no, "hypotheses must precede the steps"));
            }
            let f = parse_formula_with(rest.trim(), h, &names)
                .map_err(|e| err(line_no, e.to_string()))?;
            d.hypotheses.push(f);
            continue;
        }
        let (num, rest) = line
            .split_once('.')
            .ok_or_else(|| err(line_no, "expected `k. <formula> ; <rule>`"))?;
        let k: usize = num
            .trim()
            .parse()
            .map_err(|_| err(line_no, format!("bad step number `{}`", num.trim())))?;
        if k != d.steps.len() + 1 {
            return Err(err(
                line_no,
                format!("step {k} out of order, expected {}", d.steps.len() + 1),
            ));
        }
        let (formula, rule) = rest
            .rsplit_once(';')
            .ok_or_else(|| err(line_no, "missing `; <rule>`"))?;
        let formula = parse_formula_with(formula.trim(), h, &names)
            .map_err(|e| err(line_no, e.to_string()))?;
        let rule = parse_rule(rule.trim(), h, &names, line_no)?;
        d.steps.push(Step { formula, rule });
    }
    Ok(ParsedDerivation {
        h: h_decl,
        derivation: d,
        names,
    })
}

pub fn print_derivation(d: &Derivation, h: Option<usize>) -> String {
    let mut out = String::new();
    if let Some(h) = h {
        writeln!(out, "h: {h}").unwrap();
    }
    for hyp in &d.hypotheses {
        writeln!(out, "hyp: {hyp}").unwrap();
    }
    for (k, s) in d.steps.iter().enumerate() {
        writeln!(out, "{}. {} ; {}", k + 1, s.formula, s.rule).unwrap();
    }
    out
}

/// Reads the `c<k>@<s> := <axiom>` lines of `text`, ignoring everything else.
///
/// A table of `C`-constants with no constant repeated is read as an
/// allocator table, so synthesis can keep extending it; anything else
/// becomes an extensional specification. Every member must be an axiom.
pub fn parse_cs_table(
    text: &str,
    kernel: &Kernel,
    names: &Names,
) -> Result<ConstantSpecification, FormatError> {
    let mut names = names.clone();
    read_header(text, &mut names)?;
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let Some((lhs, rhs)) = line.split_once(":=") else {
            continue;
        };
        let (c, s) = parse_constant(lhs.trim(), kernel.h, &names, n + 1)?;
        let formula = parse_formula_with(rhs.trim(), kernel.h, &names)
            .map_err(|e| err(n + 1, e.to_string()))?;
        if kernel.match_axiom(&formula).is_empty() {
            return Err(err(n + 1, format!("`{formula}` is not an axiom instance")));
        }
        entries.push((n + 1, CsEntry { constant: c, sort: s, formula }));
    }
    let mut table = BTreeMap::new();
    let allocated = entries
        .iter()
        .all(|(_, e)| e.sort == Sort::C && table.insert(e.constant, e.formula.clone()).is_none());
    if allocated {
        Ok(ConstantSpecification::Allocated(table))
    } else {
        Ok(ConstantSpecification::Extensional(
            entries.into_iter().map(|(_, e)| e).collect(),
        ))
    }
}

/// One `c<k>@<s> := <formula>` line per member; `TotalC` prints as a comment.
pub fn print_cs_table(cs: &ConstantSpecification) -> String {
    match cs.entries() {
        None => "// totalC\n".to_string(),
        Some(entries) => entries
            .iter()
            .map(|e| format!("c{}@{} := {}\n", e.constant, e.sort, e.formula))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    const MP_FILE: &str = "\
// one modus ponens
h: 2
hyp: P1
hyp: P1 -> P2
1. P1 ; hyp 1
2. P1 -> P2 ; hyp 2
3. P2 ; mp 2 1
";

    #[test]
    fn round_trip() {
        let p = parse_derivation(MP_FILE, 1).unwrap();
        assert_eq!(p.h, Some(2));
        assert_eq!(p.derivation.steps.len(), 3);
        let printed = print_derivation(&p.derivation, p.h);
        let again = parse_derivation(&printed, 1).unwrap();
        assert_eq!(again.derivation, p.derivation);
        assert!(printed.contains("3. P2 ; mp 2 1"));
    }

    #[test]
    fn axnec_and_aliases() {
        let text = "alias m = c7\nalias del = P1\n1. [m@C]@C (del -> del) ; axnec m@C\n";
        let p = parse_derivation(text, 2).unwrap();
        assert_eq!(p.derivation.steps[0].rule, Rule::AxNec(7, Sort::C));
        assert_eq!(
            p.derivation.steps[0].formula,
            parse_formula("[c7@C]@C (P1 -> P1)", 2).unwrap()
        );
    }

    #[test]
    fn format_errors_carry_lines() {
        let e = parse_derivation("1. P1 ; hyp 1\n3. P1 ; hyp 1\n", 1).unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_derivation("1. P1 ; frobnicate\n", 1).unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_derivation("1. P1 -> ; hyp 1\n", 1).unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn cs_tables() {
        let k = Kernel::new(2);
        let text = "c1@C := P1 -> P1\nc2@C := [x1@1]@1 P1 -> P1\n1. P1 -> P1 ; axiom taut\n";
        let cs = parse_cs_table(text, &k, &Names::new()).unwrap();
        assert!(matches!(cs, ConstantSpecification::Allocated(ref t) if t.len() == 2));
        let printed = print_cs_table(&cs);
        assert_eq!(parse_cs_table(&printed, &k, &Names::new()).unwrap(), cs);

        let mixed = "c1@1 := P1 -> P1\nc1@C := P1 -> P1\n";
        let cs = parse_cs_table(mixed, &k, &Names::new()).unwrap();
        assert!(matches!(cs, ConstantSpecification::Extensional(ref s) if s.len() == 2));

        assert!(parse_cs_table("c1@C := P1\n", &k, &Names::new()).is_err());
        assert_eq!(print_cs_table(&ConstantSpecification::TotalC), "// totalC\n");
    }
}
