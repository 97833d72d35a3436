//! Model files.
//!
//! ```text
//! h: 2
//! worlds: 0 1 2 3
//! alias del = P1
//! rel 1: (1,2)
//! rel 2: (0,1) (2,3)
//! val del: 0 1 2
//! evidence: (0, c1@2, del)
//! mode: base
//! cs: totalC
//! ```
//!
//! Relations are closed reflexively and transitively on load; a warning is
//! recorded when that adds pairs. `cs:` takes `totalC`, `empty` or
//! `file <path>`, the path being relative to the model file. Without a
//! `cs:` line the specification is `totalC`.

use std::fmt::Write;
use std::path::Path;

use thiserror::Error;

use super::{AFModel, EvidenceMode, Frame};
use crate::deduction::format::read_header;
use crate::deduction::FormatError;
use crate::deduction::{parse_cs_table, print_cs_table, ConstantSpecification, Kernel};
use crate::syntax::{Names, Parser, Tok};

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("cannot read CS file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn err(line: usize, message: impl Into<String>) -> ModelFileError {
    ModelFileError::Format(FormatError {
        line,
        message: message.into(),
    })
}

/// A model together with the names its file bound and load-time warnings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedModel {
    pub model: AFModel,
    pub names: Names,
    pub warnings: Vec<String>,
}

fn strip_comment(line: &str) -> &str {
    line.find("//").map_or(line, |i| &line[..i]).trim()
}

fn world(frame: &Frame, name: &str, line: usize) -> Result<usize, ModelFileError> {
    frame
        .world(name)
        .ok_or_else(|| err(line, format!("unknown world `{name}`")))
}

fn parse_pairs(rest: &str, frame: &Frame, line: usize) -> Result<Vec<(usize, usize)>, ModelFileError> {
    let mut out = Vec::new();
    let mut s = rest.trim();
    while !s.is_empty() {
        let inner = s
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| err(line, "expected `(w,v)` pairs"))?;
        let (pair, tail) = inner;
        let (a, b) = pair
            .split_once(',')
            .ok_or_else(|| err(line, format!("expected `(w,v)`, found `({pair})`")))?;
        out.push((world(frame, a.trim(), line)?, world(frame, b.trim(), line)?));
        s = tail.trim_start();
    }
    Ok(out)
}

fn parse_evidence(
    rest: &str,
    frame: &Frame,
    names: &Names,
    line: usize,
) -> Result<(usize, crate::syntax::Term, crate::syntax::Formula), ModelFileError> {
    let fail = |e: String| err(line, e);
    let mut p = Parser::new(rest, frame.h, names).map_err(|e| fail(e.to_string()))?;
    p.expect(Tok::LParen).map_err(|e| fail(e.to_string()))?;
    let w = match p.bump() {
        Tok::Ident(s) => world(frame, &s, line)?,
        Tok::Num(k) => world(frame, &k.to_string(), line)?,
        other => return Err(fail(format!("expected a world, found {other:?}"))),
    };
    p.expect(Tok::Comma).map_err(|e| fail(e.to_string()))?;
    let t = p.term().map_err(|e| fail(e.to_string()))?;
    p.expect(Tok::Comma).map_err(|e| fail(e.to_string()))?;
    let a = p.formula().map_err(|e| fail(e.to_string()))?;
    p.expect(Tok::RParen).map_err(|e| fail(e.to_string()))?;
    p.expect_end().map_err(|e| fail(e.to_string()))?;
    Ok((w, t, a))
}

/// Reads a model file. `dir` resolves `cs: file` paths.
pub fn parse_model(text: &str, dir: Option<&Path>) -> Result<ParsedModel, ModelFileError> {
    let mut names = Names::new();
    let h = read_header(text, &mut names)?.ok_or_else(|| err(1, "missing `h:` line"))?;
    let mut frame: Option<Frame> = None;
    let mut model_lines = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if let Some(rest) = line.strip_prefix("worlds:") {
            if frame.is_some() {
                return Err(err(n + 1, "duplicate `worlds:` line"));
            }
            frame = Some(Frame::named(h, rest.split_whitespace().map(String::from).collect()));
        } else if !line.is_empty() && !line.starts_with("h:") && !line.starts_with("alias ") {
            model_lines.push((n + 1, line));
        }
    }
    let mut frame = frame.ok_or_else(|| err(1, "missing `worlds:` line"))?;
    let mut evidence = Vec::new();
    let mut mode = EvidenceMode::Base;
    let mut cs = ConstantSpecification::TotalC;
    for (n, line) in model_lines {
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| err(n, format!("unrecognised line `{line}`")))?;
        let key = key.trim();
        if let Some(agent) = key.strip_prefix("rel") {
            let i: u32 = agent
                .trim()
                .parse()
                .ok()
                .filter(|i| (1..=h as u32).contains(i))
                .ok_or_else(|| err(n, format!("bad agent `{}`", agent.trim())))?;
            for (w, v) in parse_pairs(rest, &frame, n)? {
                frame.add_edge(i, w, v);
            }
        } else if let Some(p) = key.strip_prefix("val") {
            let p = p.trim();
            let k = Parser::new("", h, &names)
                .ok()
                .and_then(|parser| parser.prop_index(p))
                .ok_or_else(|| err(n, format!("`{p}` is not a proposition")))?;
            frame.val.entry(k).or_default();
            for w in rest.split_whitespace() {
                let w = world(&frame, w, n)?;
                frame.set_true(k, w);
            }
        } else if key == "evidence" {
            evidence.push(parse_evidence(rest, &frame, &names, n)?);
        } else if key == "mode" {
            mode = match rest.trim() {
                "base" => EvidenceMode::Base,
                "full" => EvidenceMode::Full,
                other => return Err(err(n, format!("mode must be base or full, found `{other}`"))),
            };
        } else if key == "cs" {
            let rest = rest.trim();
            cs = match rest {
                "totalC" => ConstantSpecification::TotalC,
                "empty" => ConstantSpecification::empty(),
                _ => {
                    let path = rest
                        .strip_prefix("file")
                        .map(str::trim)
                        .filter(|p| !p.is_empty())
                        .ok_or_else(|| err(n, "cs must be totalC, empty or file <path>"))?;
                    let full = dir.map_or_else(|| Path::new(path).to_path_buf(), |d| d.join(path));
                    let table = std::fs::read_to_string(&full).map_err(|source| ModelFileError::Io {
                        path: full.display().to_string(),
                        source,
                    })?;
                    parse_cs_table(&table, &Kernel::new(h), &names)?
                }
            };
        } else {
            return Err(err(n, format!("unrecognised key `{key}`")));
        }
    }
    let mut warnings = Vec::new();
    let before = frame.rel.clone();
    frame.close();
    for (i, (old, new)) in before.iter().zip(&frame.rel).enumerate() {
        let added: usize = old
            .iter()
            .flatten()
            .zip(new.iter().flatten())
            .filter(|(a, b)| !**a && **b)
            .count();
        if added > 0 {
            warnings.push(format!(
                "relation of agent {} closed reflexively and transitively ({added} pairs added)",
                i + 1
            ));
        }
    }
    let mut model = AFModel::new(frame, cs, mode);
    for (w, t, a) in evidence {
        model.add_fact(w, t, a);
    }
    Ok(ParsedModel {
        model,
        names,
        warnings,
    })
}

/// Canonical text of a model. A finite specification is printed inline as
/// a comment block, since `cs: file` needs a separate file.
pub fn print_model(m: &AFModel) -> String {
    let f = &m.frame;
    let mut out = String::new();
    let _ = writeln!(out, "h: {}", f.h);
    let _ = writeln!(out, "worlds: {}", f.worlds.join(" "));
    for (i, r) in f.rel.iter().enumerate() {
        let pairs: Vec<String> = (0..f.len())
            .flat_map(|w| (0..f.len()).map(move |v| (w, v)))
            .filter(|&(w, v)| w != v && r[w][v])
            .map(|(w, v)| format!("({},{})", f.worlds[w], f.worlds[v]))
            .collect();
        let _ = writeln!(out, "rel {}: {}", i + 1, pairs.join(" ")).map(|_| ());
    }
    for (p, ws) in &f.val {
        let ws: Vec<&str> = ws.iter().map(|w| f.worlds[*w].as_str()).collect();
        let _ = writeln!(out, "val P{p}: {}", ws.join(" "));
    }
    for e in &m.base {
        let _ = writeln!(out, "evidence: ({}, {}, {})", f.worlds[e.world], e.term, e.formula);
    }
    let mode = match m.mode {
        EvidenceMode::Base => "base",
        EvidenceMode::Full => "full",
    };
    let _ = writeln!(out, "mode: {mode}");
    match &m.cs {
        ConstantSpecification::TotalC => out.push_str("cs: totalC\n"),
        cs if cs.entries().is_some_and(|e| e.is_empty()) => out.push_str("cs: empty\n"),
        cs => {
            out.push_str("cs: empty\n");
            for line in print_cs_table(cs).lines() {
                let _ = writeln!(out, "// {line}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_term};

    pub(crate) const ATTACK: &str = "\
h: 2
worlds: 0 1 2 3
alias del = P1
alias m1 = c1
alias m2 = c2
rel 1: (1,2)
rel 2: (0,1) (2,3)
val del: 0 1 2
evidence: (0, m1@2, del)
evidence: (0, m2@1, [m1@2]@2 del)
mode: base
cs: totalC
";

    #[test]
    fn attack_file() {
        let p = parse_model(ATTACK, None).unwrap();
        assert!(p.warnings.is_empty());
        let m = &p.model;
        assert_eq!(m.frame.len(), 4);
        assert!(m.frame.rel[1][0][1] && !m.frame.rel[1][0][2]);
        assert!(m.frame.holds_prop(1, 2) && !m.frame.holds_prop(1, 3));
        assert!(m.base.iter().any(|e| e.term == parse_term("c2@1", 2).unwrap()
            && e.formula == parse_formula("[c1@2]@2 P1", 2).unwrap()));
        let again = parse_model(&print_model(m), None).unwrap().model;
        assert_eq!(&again, m);
    }

    #[test]
    fn closure_warns() {
        let text = "h: 1\nworlds: a b c\nrel 1: (a,b) (b,c)\n";
        let p = parse_model(text, None).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert!(p.model.frame.rel[0][0][2]);
    }

    #[test]
    fn errors_name_lines() {
        let e = parse_model("h: 1\nworlds: 0\nrel 1: (0,5)\n", None).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(parse_model("worlds: 0\n", None).is_err());
        let e = parse_model("h: 1\nworlds: 0\nevidence: (0, x1@1)\n", None).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn cs_file_is_relative() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("cs.txt"), "c1@C := P1 -> P1\n").unwrap();
        let text = "h: 1\nworlds: 0\ncs: file cs.txt\n";
        let m = parse_model(text, Some(dir.path())).unwrap().model;
        assert!(matches!(m.cs, ConstantSpecification::Allocated(_)));
    }
}
