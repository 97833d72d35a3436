//! Recursive-descent parser for the ASCII term and formula grammar.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{sort_of, Agent, Formula, Sort, SortError, SortViolation, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at {pos}: {message}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Sort(#[from] SortError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LAngle,
    RAngle,
    Comma,
    At,
    Bang,
    Plus,
    Star,
    Tilde,
    Amp,
    Bar,
    Arrow,
    Hash,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::Comma => ",",
            Tok::At => "@",
            Tok::Bang => "!",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::Tilde => "~",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::Hash => "#",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBrack,
            b']' => Tok::RBrack,
            b'<' => Tok::LAngle,
            b'>' => Tok::RAngle,
            b',' => Tok::Comma,
            b'@' => Tok::At,
            b'!' => Tok::Bang,
            b'+' => Tok::Plus,
            b'*' => Tok::Star,
            b'~' => Tok::Tilde,
            b'&' => Tok::Amp,
            b'|' => Tok::Bar,
            b'#' => Tok::Hash,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..=i].parse().map_err(|_| ParseError {
                    pos: start,
                    message: "number too large".into(),
                })?;
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                return Err(ParseError {
                    pos: start,
                    message: format!("unexpected character `{}`", text[start..].chars().next().unwrap()),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

/// Named aliases for propositions and constants, e.g. `del = P1`, `m1 = c1`.
///
/// Aliases only affect parsing; printing always uses the canonical names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Names {
    props: BTreeMap<String, u32>,
    consts: BTreeMap<String, u32>,
}

fn split_indexed<'a>(name: &'a str, prefix: &str) -> Option<u32> {
    let rest: &'a str = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn is_reserved(name: &str) -> bool {
    ["x", "c", "P", "pi_"]
        .iter()
        .any(|p| split_indexed(name, p).is_some())
        || matches!(name, "head" | "tail" | "ind" | "E" | "C")
}

impl Names {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty() && self.consts.is_empty()
    }

    /// Binds `name` to `P<index>`. Repeating an identical binding is a no-op,
    /// so one file can be read by several format readers.
    pub fn prop(&mut self, name: &str, index: u32) -> Result<(), String> {
        if self.props.get(name) == Some(&index) {
            return Ok(());
        }
        self.check_free(name)?;
        self.props.insert(name.to_string(), index);
        Ok(())
    }

    /// Binds `name` to the constant index `index`; the sort is written at use sites.
    pub fn constant(&mut self, name: &str, index: u32) -> Result<(), String> {
        if self.consts.get(name) == Some(&index) {
            return Ok(());
        }
        self.check_free(name)?;
        self.consts.insert(name.to_string(), index);
        Ok(())
    }

    /// Parses an `alias` right-hand side of the form `P<k>` or `c<k>`.
    pub fn bind(&mut self, name: &str, target: &str) -> Result<(), String> {
        if let Some(k) = split_indexed(target, "P") {
            self.prop(name, k)
        } else if let Some(k) = split_indexed(target, "c") {
            self.constant(name, k)
        } else {
            Err(format!("alias target `{target}` must be P<k> or c<k>"))
        }
    }

    fn check_free(&self, name: &str) -> Result<(), String> {
        let valid = name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(format!("`{name}` is not an identifier"));
        }
        if is_reserved(name) {
            return Err(format!("`{name}` is a reserved name"));
        }
        if self.props.contains_key(name) || self.consts.contains_key(name) {
            return Err(format!("`{name}` is already bound"));
        }
        Ok(())
    }
}

/// Token-stream parser shared by the file-format readers.
pub(crate) struct Parser<'n> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    h: usize,
    names: &'n Names,
}

impl<'n> Parser<'n> {
    pub(crate) fn new(text: &str, h: usize, names: &'n Names) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            h,
            names,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.offset(),
            message: message.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", tok.symbol())))
        }
    }

    pub(crate) fn expect_end(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub(crate) fn h(&self) -> usize {
        self.h
    }

    /// Resolves `P<k>` or a proposition alias.
    pub(crate) fn prop_index(&self, name: &str) -> Option<u32> {
        split_indexed(name, "P").or_else(|| self.names.props.get(name).copied())
    }

    fn agent(&self, index: u32) -> Result<Agent, ParseError> {
        if index == 0 || index as usize > self.h {
            return Err(self.error(format!("agent {index} is outside 1..{}", self.h)));
        }
        Ok(Agent::new(index))
    }

    /// A sort written after `@` or `#`: an agent number, `E` or `C`.
    pub(crate) fn sort(&mut self) -> Result<Sort, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                let a = self.agent(n)?;
                self.bump();
                Ok(Sort::Agent(a))
            }
            Tok::Ident(s) if s == "E" => {
                self.bump();
                Ok(Sort::E)
            }
            Tok::Ident(s) if s == "C" => {
                self.bump();
                Ok(Sort::C)
            }
            _ => Err(self.unexpected("a sort (agent number, E or C)")),
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.product()?;
        while self.eat(&Tok::Plus) {
            let right = self.product()?;
            let sort = self.operand_sort(&left, &right)?;
            left = Term::sum(left, right, sort);
        }
        Ok(left)
    }

    fn product(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.primary()?;
        while self.eat(&Tok::Star) {
            let right = self.primary()?;
            let sort = self.operand_sort(&left, &right)?;
            left = Term::app(left, right, sort);
        }
        Ok(left)
    }

    fn operand_sort(&self, l: &Term, r: &Term) -> Result<Sort, SyntaxError> {
        let ls = sort_of(l, self.h)?;
        let rs = sort_of(r, self.h)?;
        if !ls.is_star() {
            return Err(SortError {
                subterm: l.to_string(),
                violation: SortViolation::NotStar(ls),
            }
            .into());
        }
        if ls != rs {
            return Err(SortError {
                subterm: r.to_string(),
                violation: SortViolation::OperandMismatch {
                    expected: ls,
                    found: rs,
                },
            }
            .into());
        }
        Ok(ls)
    }

    fn parenthesised(&mut self) -> Result<Term, SyntaxError> {
        self.expect(Tok::LParen)?;
        let t = self.term()?;
        self.expect(Tok::RParen)?;
        Ok(t)
    }

    fn primary(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => self.parenthesised(),
            Tok::LAngle => {
                let start = self.offset();
                self.bump();
                let mut items = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.term()?);
                }
                self.expect(Tok::RAngle)?;
                if items.len() != self.h {
                    return Err(ParseError {
                        pos: start,
                        message: format!(
                            "tuple has {} components but there are {} agents",
                            items.len(),
                            self.h
                        ),
                    }
                    .into());
                }
                let t = Term::Tuple(items);
                sort_of(&t, self.h)?;
                Ok(t)
            }
            Tok::Bang => {
                self.bump();
                let a = match self.bump() {
                    Tok::Num(n) => self.agent(n)?,
                    _ => return Err(self.unexpected("an agent number after `!`").into()),
                };
                let t = Term::bang(self.parenthesised()?, a);
                sort_of(&t, self.h)?;
                Ok(t)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(i) = split_indexed(&name, "pi_") {
                    let a = self.agent(i)?;
                    let t = Term::proj(a, self.parenthesised()?);
                    sort_of(&t, self.h)?;
                    return Ok(t);
                }
                match name.as_str() {
                    "head" | "tail" => {
                        let inner = self.parenthesised()?;
                        let t = if name == "head" {
                            Term::head(inner)
                        } else {
                            Term::tail(inner)
                        };
                        sort_of(&t, self.h)?;
                        return Ok(t);
                    }
                    "ind" => {
                        self.expect(Tok::LParen)?;
                        let l = self.term()?;
                        self.expect(Tok::Comma)?;
                        let r = self.term()?;
                        self.expect(Tok::RParen)?;
                        let t = Term::ind(l, r);
                        sort_of(&t, self.h)?;
                        return Ok(t);
                    }
                    _ => {}
                }
                let (index, leaf): (u32, fn(u32, Sort) -> Term) =
                    if let Some(k) = split_indexed(&name, "x") {
                        (k, Term::Var)
                    } else if let Some(k) = split_indexed(&name, "c")
                        .or_else(|| self.names.consts.get(&name).copied())
                    {
                        (k, Term::Const)
                    } else {
                        return Err(ParseError {
                            pos: self.toks[self.pos - 1].1,
                            message: format!("unknown term symbol `{name}`"),
                        }
                        .into());
                    };
                if index == 0 {
                    return Err(self.error("indices start at 1").into());
                }
                self.expect(Tok::At)?;
                let sort = self.sort()?;
                Ok(leaf(index, sort))
            }
            _ => Err(self.unexpected("a term").into()),
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let left = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let right = self.formula()?;
            return Ok(Formula::imp(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut left = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            left = Formula::or(left, self.conjunction()?);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut left = self.unary()?;
        while self.eat(&Tok::Amp) {
            left = Formula::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::neg(self.unary()?))
            }
            Tok::LBrack => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RBrack)?;
                self.expect(Tok::At)?;
                let boxed = self.sort()?;
                let body = self.unary()?;
                let found = sort_of(&t, self.h)?;
                let a = Formula::Just(t, boxed, Box::new(body));
                if found != boxed {
                    return Err(SortError {
                        subterm: a.to_string(),
                        violation: SortViolation::BoxMismatch { term: found, boxed },
                    }
                    .into());
                }
                Ok(a)
            }
            Tok::LParen => {
                self.bump();
                let a = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(a)
            }
            Tok::Ident(name) => {
                let k = self.prop_index(&name);
                match k {
                    Some(0) => Err(self.error("indices start at 1").into()),
                    Some(k) => {
                        self.bump();
                        Ok(Formula::prop(k))
                    }
                    None => Err(self.error(format!("unknown proposition `{name}`")).into()),
                }
            }
            _ => Err(self.unexpected("a formula").into()),
        }
    }
}

pub fn parse_term_with(text: &str, h: usize, names: &Names) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text, h, names)?;
    let t = p.term()?;
    p.expect_end()?;
    sort_of(&t, h)?;
    Ok(t)
}

pub fn parse_formula_with(text: &str, h: usize, names: &Names) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(text, h, names)?;
    let a = p.formula()?;
    p.expect_end()?;
    a.check(h)?;
    Ok(a)
}

pub fn parse_term(text: &str, h: usize) -> Result<Term, SyntaxError> {
    parse_term_with(text, h, &Names::default())
}

pub fn parse_formula(text: &str, h: usize) -> Result<Formula, SyntaxError> {
    parse_formula_with(text, h, &Names::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_examples() {
        assert_eq!(
            parse_term("ind(x1@C, x1@E)", 2).unwrap(),
            Term::ind(Term::var(1, Sort::C), Term::var(1, Sort::E))
        );
        assert_eq!(
            parse_term("pi_2(tail(c3@C))", 2).unwrap(),
            Term::proj(Agent::new(2), Term::tail(Term::constant(3, Sort::C)))
        );
        assert!(matches!(
            parse_term("<x1@1, x1@2>", 3),
            Err(SyntaxError::Parse(_))
        ));
    }

    #[test]
    fn formula_examples() {
        let a = parse_formula("[x1@1]@1 P1 -> P1", 2).unwrap();
        let expected = Formula::imp(
            Formula::just(Term::var(1, Sort::agent(1)), Formula::prop(1)),
            Formula::prop(1),
        );
        assert_eq!(a, expected);
        assert_eq!(a.to_string(), "[x1@1]@1 P1 -> P1");
        assert!(matches!(
            parse_formula("[x1@E]@C P1", 2),
            Err(SyntaxError::Sort(_))
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        let a = parse_formula("~P1 & P2 | P3 -> P4 -> P5", 1).unwrap();
        let expected = Formula::imp(
            Formula::or(
                Formula::and(Formula::neg(Formula::prop(1)), Formula::prop(2)),
                Formula::prop(3),
            ),
            Formula::imp(Formula::prop(4), Formula::prop(5)),
        );
        assert_eq!(a, expected);
        assert_eq!(a.to_string(), "~P1 & P2 | P3 -> P4 -> P5");

        let b = parse_formula("(P1 -> P2) -> P3", 1).unwrap();
        assert_eq!(b.to_string(), "(P1 -> P2) -> P3");
        let c = parse_formula("P1 & (P2 & P3)", 1).unwrap();
        assert_eq!(c.to_string(), "P1 & (P2 & P3)");

        let t = parse_term("x1@C + x2@C * x3@C", 1).unwrap();
        assert!(matches!(t, Term::Sum(..)));
        let u = parse_term("(x1@C + x2@C) * x3@C", 1).unwrap();
        assert_eq!(u.to_string(), "(x1@C + x2@C) * x3@C");
        let w = parse_term("x1@C * (x2@C * x3@C)", 1).unwrap();
        assert_eq!(w.to_string(), "x1@C * (x2@C * x3@C)");
    }

    #[test]
    fn induction_axiom_text() {
        let a = parse_formula(
            "P1 & [x1@C]@C (P1 -> [x1@E]@E P1) -> [ind(x1@C,x1@E)]@C P1",
            2,
        )
        .unwrap();
        assert!(matches!(a, Formula::Imp(..)));
    }

    #[test]
    fn sum_operands_must_agree() {
        assert!(parse_term("x1@1 + x1@C", 2).is_err());
        assert!(parse_term("x1@E + x2@E", 2).is_err());
        assert!(parse_term("!1(x1@2)", 2).is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_formula("P1 -> ", 1).unwrap_err();
        match err {
            SyntaxError::Parse(p) => assert_eq!(p.pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("P1 $ P2", 1).is_err());
        assert!(parse_formula("Q1", 1).is_err());
        assert!(parse_term("x0@1", 1).is_err());
        assert!(parse_term("x1@3", 2).is_err());
    }

    #[test]
    fn rebinding_the_same_target_is_allowed() {
        let mut n = Names::new();
        n.bind("del", "P1").unwrap();
        n.bind("del", "P1").unwrap();
        n.bind("m1", "c1").unwrap();
        n.bind("m1", "c1").unwrap();
        assert!(n.bind("del", "P2").is_err());
        assert!(n.bind("m1", "P1").is_err());
    }

    #[test]
    fn aliases() {
        let mut names = Names::new();
        names.bind("del", "P1").unwrap();
        names.bind("m1", "c1").unwrap();
        let a = parse_formula_with("[m1@2]@2 del", 2, &names).unwrap();
        assert_eq!(a.to_string(), "[c1@2]@2 P1");
        assert!(names.bind("x3", "P2").is_err());
        assert!(names.bind("del", "P2").is_err());
        assert!(names.bind("foo", "x1").is_err());
    }
}
