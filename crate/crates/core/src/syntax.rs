//! Abstract syntax of task formulas: atoms, literals, atomic tasks and
//! sequential/choice composition.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SyntaxError;

/// Name of the atom the environment emits at the final instant of an episode.
pub const END: &str = "end";
/// Reserved keyword for the constant-true literal.
pub const TRUE_KW: &str = "true";

/// A propositional atom. Names are non-empty and drawn from `[a-z0-9_]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Atom(String);

impl Atom {
    pub fn new(name: impl Into<String>) -> Result<Self, SyntaxError> {
        let name = name.into();
        if name.is_empty() || !name.bytes().all(is_ident_byte) {
            return Err(SyntaxError::InvalidAtom(name));
        }
        if name == TRUE_KW {
            return Err(SyntaxError::ReservedName(name));
        }
        Ok(Atom(name))
    }

    /// The end-of-episode atom.
    pub fn end() -> Self {
        Atom(END.to_string())
    }

    pub fn is_end(&self) -> bool {
        self.0 == END
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_'
}

impl TryFrom<String> for Atom {
    type Error = SyntaxError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Atom::new(value)
    }
}

impl From<Atom> for String {
    fn from(a: Atom) -> String {
        a.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignedAtom {
    pub sign: Sign,
    pub atom: Atom,
}

impl SignedAtom {
    pub fn pos(atom: Atom) -> Self {
        SignedAtom { sign: Sign::Positive, atom }
    }

    pub fn neg(atom: Atom) -> Self {
        SignedAtom { sign: Sign::Negative, atom }
    }
}

impl fmt::Display for SignedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.sign.symbol(), self.atom)
    }
}

/// A literal: the constant `true`, or a disjunction of signed atoms.
///
/// Disjunctions are never empty and carry no duplicate entries; the
/// first occurrence of each entry keeps its position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Literal {
    True,
    Any(Vec<SignedAtom>),
}

impl Literal {
    pub fn any(entries: impl IntoIterator<Item = SignedAtom>) -> Result<Self, SyntaxError> {
        let mut out: Vec<SignedAtom> = Vec::new();
        for e in entries {
            if !out.contains(&e) {
                out.push(e);
            }
        }
        if out.is_empty() {
            return Err(SyntaxError::EmptyDisjunction);
        }
        Ok(Literal::Any(out))
    }

    pub fn pos(atom: Atom) -> Self {
        Literal::Any(vec![SignedAtom::pos(atom)])
    }

    pub fn neg(atom: Atom) -> Self {
        Literal::Any(vec![SignedAtom::neg(atom)])
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Literal::True)
    }

    pub fn entries(&self) -> &[SignedAtom] {
        match self {
            Literal::True => &[],
            Literal::Any(v) => v,
        }
    }

    /// The same literal with every sign flipped. `true` is a fixed point.
    pub fn flip_signs(&self) -> Literal {
        match self {
            Literal::True => Literal::True,
            Literal::Any(v) => Literal::Any(
                v.iter()
                    .map(|e| SignedAtom { sign: e.sign.flip(), atom: e.atom.clone() })
                    .collect(),
            ),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.entries().iter().map(|e| &e.atom)
    }
}

/// `cond U goal`: keep `cond` true until `goal` holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AtomicTask {
    pub cond: Literal,
    pub goal: Literal,
}

impl AtomicTask {
    pub fn new(cond: Literal, goal: Literal) -> Self {
        AtomicTask { cond, goal }
    }

    /// `true U goal`, i.e. eventually `goal`.
    pub fn eventually(goal: Literal) -> Self {
        AtomicTask { cond: Literal::True, goal }
    }

    /// `l U +end`, i.e. `l` for the whole episode.
    pub fn always(cond: Literal) -> Self {
        AtomicTask { cond, goal: Literal::pos(Atom::end()) }
    }

    /// A goal of `true` is satisfied at the first instant of any trace.
    pub fn is_degenerate(&self) -> bool {
        self.goal.is_true()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.cond.atoms().chain(self.goal.atoms())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemporalFormula {
    Atomic(AtomicTask),
    Seq(Box<TemporalFormula>, Box<TemporalFormula>),
    Choice(Box<TemporalFormula>, Box<TemporalFormula>),
}

impl TemporalFormula {
    pub fn seq(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: TemporalFormula, b: TemporalFormula) -> Self {
        TemporalFormula::Choice(Box::new(a), Box::new(b))
    }

    /// Operator nesting depth; an atomic task has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            TemporalFormula::Atomic(_) => 0,
            TemporalFormula::Seq(a, b) | TemporalFormula::Choice(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TemporalFormula::Atomic(_) => 1,
            TemporalFormula::Seq(a, b) | TemporalFormula::Choice(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// Right-nested sequence of the given tasks. `None` for an empty slice.
    pub fn sequence_of(tasks: &[AtomicTask]) -> Option<TemporalFormula> {
        let (last, init) = tasks.split_last()?;
        let mut f = TemporalFormula::Atomic(last.clone());
        for t in init.iter().rev() {
            f = TemporalFormula::seq(TemporalFormula::Atomic(t.clone()), f);
        }
        Some(f)
    }
}

impl From<AtomicTask> for TemporalFormula {
    fn from(t: AtomicTask) -> Self {
        TemporalFormula::Atomic(t)
    }
}
