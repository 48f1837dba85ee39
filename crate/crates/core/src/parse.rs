//! Concrete text syntax for task formulas.
//!
//! ```text
//! formula := seq { "++" seq }
//! seq     := unit { ";" unit }
//! unit    := lit "U" lit | "<>" lit | "[]" lit | "(" formula ")"
//! lit     := "true" | part { "|" part }
//! part    := ("+" | "-") IDENT | "(" lit ")"
//! ```
//!
//! `<> l` is `true U l` and `[] l` is `l U +end`. A parenthesis at the start of a
//! unit may open either a literal or a nested formula; the literal reading is
//! tried first.

use std::fmt;

use crate::error::SyntaxError;
use crate::syntax::{is_ident_byte, Atom, AtomicTask, Literal, Sign, SignedAtom, TemporalFormula, END, TRUE_KW};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Plus,
    Minus,
    Bar,
    Semi,
    LParen,
    RParen,
    Until,
    Choice,
    Diamond,
    Boxed,
    True,
    Ident(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Plus => "\"+\"".into(),
            Tok::Minus => "\"-\"".into(),
            Tok::Bar => "\"|\"".into(),
            Tok::Semi => "\";\"".into(),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::Until => "\"U\"".into(),
            Tok::Choice => "\"++\"".into(),
            Tok::Diamond => "\"<>\"".into(),
            Tok::Boxed => "\"[]\"".into(),
            Tok::True => "\"true\"".into(),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' if bytes.get(i + 1) == Some(&b'+') => {
                i += 2;
                Tok::Choice
            }
            b'+' => {
                i += 1;
                Tok::Plus
            }
            b'-' => {
                i += 1;
                Tok::Minus
            }
            b'|' => {
                i += 1;
                Tok::Bar
            }
            b';' => {
                i += 1;
                Tok::Semi
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'U' => {
                i += 1;
                Tok::Until
            }
            b'<' if bytes.get(i + 1) == Some(&b'>') => {
                i += 2;
                Tok::Diamond
            }
            b'[' if bytes.get(i + 1) == Some(&b']') => {
                i += 2;
                Tok::Boxed
            }
            _ if is_ident_byte(b) => {
                while i < bytes.len() && is_ident_byte(bytes[i]) {
                    i += 1;
                }
                let word = &text[start..i];
                if word == TRUE_KW {
                    Tok::True
                } else {
                    Tok::Ident(word.to_string())
                }
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(SyntaxError::Unexpected {
                    offset: start,
                    expected: vec!["a token".into()],
                    found: format!("character {ch:?}"),
                });
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError::Unexpected {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&tok.describe()]))
        }
    }

    fn formula(&mut self) -> PResult<TemporalFormula> {
        let mut lhs = self.seq()?;
        while *self.peek() == Tok::Choice {
            self.bump();
            let rhs = self.seq()?;
            lhs = TemporalFormula::choice(lhs, rhs);
        }
        Ok(lhs)
    }

    fn seq(&mut self) -> PResult<TemporalFormula> {
        let mut lhs = self.unit()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let rhs = self.unit()?;
            lhs = TemporalFormula::seq(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unit(&mut self) -> PResult<TemporalFormula> {
        match self.peek() {
            Tok::Diamond => {
                self.bump();
                let goal = self.literal()?;
                Ok(AtomicTask::eventually(goal).into())
            }
            Tok::Boxed => {
                self.bump();
                let cond = self.literal()?;
                Ok(AtomicTask::always(cond).into())
            }
            Tok::LParen => {
                let save = self.pos;
                let as_task = self.until_task();
                match as_task {
                    Ok(t) => Ok(t.into()),
                    Err(e1) => {
                        self.pos = save;
                        self.bump();
                        let inner = self.formula().and_then(|f| {
                            self.expect(Tok::RParen)?;
                            Ok(f)
                        });
                        inner.map_err(|e2| furthest(e1, e2))
                    }
                }
            }
            _ => Ok(self.until_task()?.into()),
        }
    }

    fn until_task(&mut self) -> PResult<AtomicTask> {
        let cond = self.literal()?;
        self.expect(Tok::Until)?;
        let goal = self.literal()?;
        Ok(AtomicTask::new(cond, goal))
    }

    fn literal(&mut self) -> PResult<Literal> {
        if *self.peek() == Tok::True {
            self.bump();
            return Ok(Literal::True);
        }
        let mut entries = Vec::new();
        self.literal_part(&mut entries)?;
        while *self.peek() == Tok::Bar {
            self.bump();
            self.literal_part(&mut entries)?;
        }
        Literal::any(entries)
    }

    fn literal_part(&mut self, out: &mut Vec<SignedAtom>) -> PResult<()> {
        match self.peek().clone() {
            Tok::Plus | Tok::Minus => {
                let sign = if self.bump() == Tok::Plus { Sign::Positive } else { Sign::Negative };
                let offset = self.offset();
                match self.peek().clone() {
                    Tok::Ident(name) => {
                        if name == END && sign == Sign::Negative {
                            return Err(SyntaxError::ReservedSigned { offset, sign: '-', name });
                        }
                        self.bump();
                        out.push(SignedAtom { sign, atom: Atom::new(name)? });
                        Ok(())
                    }
                    Tok::True => Err(SyntaxError::ReservedSigned {
                        offset,
                        sign: sign.symbol(),
                        name: TRUE_KW.into(),
                    }),
                    _ => Err(self.unexpected(&["identifier"])),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner_offset = self.offset();
                let inner = self.literal()?;
                self.expect(Tok::RParen)?;
                match inner {
                    // `true` stands alone, unparenthesised.
                    Literal::True => Err(SyntaxError::Unexpected {
                        offset: inner_offset,
                        expected: vec!["\"+\"".into(), "\"-\"".into()],
                        found: Tok::True.describe(),
                    }),
                    Literal::Any(v) => {
                        out.extend(v);
                        Ok(())
                    }
                }
            }
            _ => Err(self.unexpected(&["\"+\"", "\"-\"", "\"(\"", "\"true\""])),
        }
    }
}

fn furthest(a: SyntaxError, b: SyntaxError) -> SyntaxError {
    match (a.offset(), b.offset()) {
        (Some(x), Some(y)) if x > y => a,
        _ => b,
    }
}

/// Parse formula text into its syntax tree.
pub fn parse_formula(text: &str) -> Result<TemporalFormula, SyntaxError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        let expected: &[&str] = &["\"++\"", "\";\"", "end of input"];
        return Err(p.unexpected(expected));
    }
    Ok(f)
}

/// Parse text that must denote a single atomic task.
pub fn parse_task(text: &str) -> Result<AtomicTask, SyntaxError> {
    match parse_formula(text)? {
        TemporalFormula::Atomic(t) => Ok(t),
        _ => Err(SyntaxError::Unexpected {
            offset: 0,
            expected: vec!["an atomic task".into()],
            found: "a composite formula".into(),
        }),
    }
}

/// Canonical text. `parse_formula(&format_formula(f)) == Ok(f)`.
pub fn format_formula(f: &TemporalFormula) -> String {
    f.to_string()
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::True => f.write_str(TRUE_KW),
            Literal::Any(v) if v.len() == 1 => write!(f, "{}", v[0]),
            Literal::Any(v) => {
                f.write_str("(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for AtomicTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} U {}", self.cond, self.goal)
    }
}

impl fmt::Display for TemporalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalFormula::Atomic(t) => write!(f, "{t}"),
            TemporalFormula::Seq(a, b) => write!(f, "({a}) ; ({b})"),
            TemporalFormula::Choice(a, b) => write!(f, "({a}) ++ ({b})"),
        }
    }
}

impl std::str::FromStr for TemporalFormula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Atom {
        Atom::new(s).unwrap()
    }

    fn atomic(c: Literal, g: Literal) -> TemporalFormula {
        AtomicTask::new(c, g).into()
    }

    #[test]
    fn avoid_grass_until_axe_or_sword() {
        let f = parse_formula("- grass U (+ axe | + sword)").unwrap();
        let goal = Literal::any(vec![SignedAtom::pos(a("axe")), SignedAtom::pos(a("sword"))]).unwrap();
        assert_eq!(f, atomic(Literal::neg(a("grass")), goal));
    }

    #[test]
    fn eventually_axe() {
        let f = parse_formula("true U + axe").unwrap();
        assert_eq!(f, atomic(Literal::True, Literal::pos(a("axe"))));
        assert_eq!(parse_formula("<> + axe").unwrap(), f);
    }

    #[test]
    fn always_desugars_to_until_end() {
        let f = parse_formula("[] - lava").unwrap();
        assert_eq!(f, atomic(Literal::neg(a("lava")), Literal::pos(Atom::end())));
    }

    #[test]
    fn seq_and_choice_nesting() {
        let f = parse_formula("(+a U +b) ; ((+c U +d) ++ (+e U +f))").unwrap();
        let t = |x: &str, y: &str| atomic(Literal::pos(a(x)), Literal::pos(a(y)));
        assert_eq!(
            f,
            TemporalFormula::seq(t("a", "b"), TemporalFormula::choice(t("c", "d"), t("e", "f")))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let t = |x: &str| atomic(Literal::True, Literal::pos(a(x)));
        // `;` binds tighter than `++`, both associate to the left.
        let f = parse_formula("<> +a ; <> +b ++ <> +c ; <> +d ++ <> +e").unwrap();
        let left = TemporalFormula::choice(
            TemporalFormula::seq(t("a"), t("b")),
            TemporalFormula::seq(t("c"), t("d")),
        );
        assert_eq!(f, TemporalFormula::choice(left, t("e")));
    }

    #[test]
    fn parenthesised_literal_as_cond() {
        let f = parse_formula("(+ soil | + mud) U + axe").unwrap();
        let cond = Literal::any(vec![SignedAtom::pos(a("soil")), SignedAtom::pos(a("mud"))]).unwrap();
        assert_eq!(f, atomic(cond, Literal::pos(a("axe"))));
    }

    #[test]
    fn duplicate_disjuncts_removed() {
        let f = parse_formula("true U (+a | +a | -b)").unwrap();
        let g = Literal::any(vec![SignedAtom::pos(a("a")), SignedAtom::neg(a("b"))]).unwrap();
        assert_eq!(f, atomic(Literal::True, g));
    }

    #[test]
    fn format_canonical() {
        let f = parse_formula("true U +axe").unwrap();
        assert_eq!(format_formula(&f), "true U + axe");
        let f = parse_formula("(+a U +b);(-c U (+d|+e))").unwrap();
        assert_eq!(format_formula(&f), "(+ a U + b) ; (- c U (+ d | + e))");
        assert_eq!(parse_formula(&format_formula(&f)).unwrap(), f);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_formula("+a U").unwrap_err();
        assert_eq!(err.offset(), Some(4));
        let err = parse_formula("+a +b").unwrap_err();
        match err {
            SyntaxError::Unexpected { offset, expected, .. } => {
                assert_eq!(offset, 3);
                assert!(expected.iter().any(|e| e.contains('U')));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_formula("").is_err());
        assert!(parse_formula("+a U +b ;").is_err());
        assert!(parse_formula("(+a U +b").is_err());
        assert!(parse_formula("+A U +b").is_err());
        assert!(parse_formula("+a U +b extra").is_err());
    }

    #[test]
    fn reserved_names() {
        assert!(matches!(
            parse_formula("-true U +a"),
            Err(SyntaxError::ReservedSigned { sign: '-', .. })
        ));
        assert!(matches!(
            parse_formula("+true U +a"),
            Err(SyntaxError::ReservedSigned { sign: '+', .. })
        ));
        assert!(matches!(
            parse_formula("+a U -end"),
            Err(SyntaxError::ReservedSigned { sign: '-', .. })
        ));
        assert!(parse_formula("+a U +end").is_ok());
        assert!(parse_formula("true U (true | +a)").is_err());
    }
}
