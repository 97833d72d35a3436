//! Concrete ASCII syntax with minimal parenthesisation.
//!
//! Binding strength, loosest first: `->` (right associative), `|`, `&`
//! (both left associative), then the prefix operators `~` and `[t]@s`.
//! In terms `+` binds looser than `*`, both left associative.

use std::fmt::{self, Write};

use super::{Formula, Term};

const SUM: u8 = 1;
const PROD: u8 = 2;
const PRIMARY: u8 = 3;

fn write_term(out: &mut impl Write, t: &Term, ctx: u8) -> fmt::Result {
    match t {
        Term::Const(k, s) => write!(out, "c{k}@{s}"),
        Term::Var(k, s) => write!(out, "x{k}@{s}"),
        Term::Bang(a, i) => {
            write!(out, "!{i}(")?;
            write_term(out, a, SUM)?;
            out.write_char(')')
        }
        Term::Sum(a, b, _) => {
            let paren = ctx > SUM;
            if paren {
                out.write_char('(')?;
            }
            write_term(out, a, SUM)?;
            out.write_str(" + ")?;
            write_term(out, b, PROD)?;
            if paren {
                out.write_char(')')?;
            }
            Ok(())
        }
        Term::App(a, b, _) => {
            let paren = ctx > PROD;
            if paren {
                out.write_char('(')?;
            }
            write_term(out, a, PROD)?;
            out.write_str(" * ")?;
            write_term(out, b, PRIMARY)?;
            if paren {
                out.write_char(')')?;
            }
            Ok(())
        }
        Term::Tuple(items) => {
            out.write_char('<')?;
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.write_str(", ")?;
                }
                write_term(out, item, SUM)?;
            }
            out.write_char('>')
        }
        Term::Proj(i, a) => {
            write!(out, "pi_{i}(")?;
            write_term(out, a, SUM)?;
            out.write_char(')')
        }
        Term::Head(a) => {
            out.write_str("head(")?;
            write_term(out, a, SUM)?;
            out.write_char(')')
        }
        Term::Tail(a) => {
            out.write_str("tail(")?;
            write_term(out, a, SUM)?;
            out.write_char(')')
        }
        Term::Ind(a, b) => {
            out.write_str("ind(")?;
            write_term(out, a, SUM)?;
            out.write_str(", ")?;
            write_term(out, b, SUM)?;
            out.write_char(')')
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, SUM)
    }
}

pub(crate) const IMP: u8 = 1;
pub(crate) const OR: u8 = 2;
pub(crate) const AND: u8 = 3;
pub(crate) const UNARY: u8 = 4;

/// Shared by the modal printer so both languages parenthesise identically.
pub(crate) fn binary(
    out: &mut (impl Write + ?Sized),
    ctx: u8,
    level: u8,
    op: &str,
    left: impl FnOnce(&mut dyn Write, u8) -> fmt::Result,
    right: impl FnOnce(&mut dyn Write, u8) -> fmt::Result,
) -> fmt::Result {
    let (lctx, rctx) = if level == IMP {
        (level + 1, level)
    } else {
        (level, level + 1)
    };
    let paren = ctx > level;
    let mut buf = String::new();
    if paren {
        buf.push('(');
    }
    left(&mut buf, lctx)?;
    buf.push_str(op);
    right(&mut buf, rctx)?;
    if paren {
        buf.push(')');
    }
    out.write_str(&buf)
}

fn write_formula(out: &mut dyn Write, a: &Formula, ctx: u8) -> fmt::Result {
    match a {
        Formula::Prop(k) => write!(out, "P{k}"),
        Formula::Neg(x) => {
            out.write_char('~')?;
            write_formula(out, x, UNARY)
        }
        Formula::Just(t, s, x) => {
            out.write_char('[')?;
            write!(out, "{t}")?;
            write!(out, "]@{s} ")?;
            write_formula(out, x, UNARY)
        }
        Formula::And(x, y) => binary(
            out,
            ctx,
            AND,
            " & ",
            |o, c| write_formula(o, x, c),
            |o, c| write_formula(o, y, c),
        ),
        Formula::Or(x, y) => binary(
            out,
            ctx,
            OR,
            " | ",
            |o, c| write_formula(o, x, c),
            |o, c| write_formula(o, y, c),
        ),
        Formula::Imp(x, y) => binary(
            out,
            ctx,
            IMP,
            " -> ",
            |o, c| write_formula(o, x, c),
            |o, c| write_formula(o, y, c),
        ),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}

/// Alias kept for symmetry with the parse functions.
pub fn print_term(t: &Term) -> String {
    t.to_string()
}

pub fn print_formula(a: &Formula) -> String {
    a.to_string()
}
