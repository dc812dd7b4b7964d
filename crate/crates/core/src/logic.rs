//! Propositional sentences and the reasoner behind conflict detection.
//!
//! Formulas are parsed from a small infix grammar, translated to clauses with
//! a definitional (auxiliary-atom) encoding and decided by a plain DPLL
//! procedure with unit propagation. The solver branches on the lowest
//! unassigned variable and tries `false` first, so every run is reproducible.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// A propositional sentence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Evaluates the formula under `value`, which must cover every atom.
    pub fn eval(&self, value: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => value(a),
            Formula::Not(f) => !f.eval(value),
            Formula::And(a, b) => a.eval(value) && b.eval(value),
            Formula::Or(a, b) => a.eval(value) || b.eval(value),
            Formula::Implies(a, b) => !a.eval(value) || b.eval(value),
            Formula::Iff(a, b) => a.eval(value) == b.eval(value),
        }
    }

    /// Atom names in order of first occurrence.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                if !out.iter().any(|x| x == a) {
                    out.push(a.clone());
                }
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(..) => 5,
            _ => 6,
        }
    }

    /// Constant folding; the result is `True`, `False` or constant-free.
    fn simplify(&self) -> Formula {
        use Formula::*;
        match self {
            True | False | Atom(_) => self.clone(),
            Not(f) => match f.simplify() {
                True => False,
                False => True,
                g => Formula::not(g),
            },
            And(a, b) => match (a.simplify(), b.simplify()) {
                (False, _) | (_, False) => False,
                (True, g) | (g, True) => g,
                (x, y) => Formula::and(x, y),
            },
            Or(a, b) => match (a.simplify(), b.simplify()) {
                (True, _) | (_, True) => True,
                (False, g) | (g, False) => g,
                (x, y) => Formula::or(x, y),
            },
            Implies(a, b) => match (a.simplify(), b.simplify()) {
                (False, _) | (_, True) => True,
                (True, g) => g,
                (g, False) => Formula::not(g),
                (x, y) => Formula::implies(x, y),
            },
            Iff(a, b) => match (a.simplify(), b.simplify()) {
                (True, g) | (g, True) => g,
                (False, g) | (g, False) => Formula::not(g).simplify(),
                (x, y) => Formula::iff(x, y),
            },
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(out: &mut fmt::Formatter<'_>, c: &Formula, min: u8) -> fmt::Result {
            if c.precedence() < min {
                write!(out, "({c})")
            } else {
                write!(out, "{c}")
            }
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => {
                write!(f, "!")?;
                child(f, g, 5)
            }
            // & | <-> associate to the left, -> to the right
            Formula::And(a, b) => {
                child(f, a, 4)?;
                write!(f, " & ")?;
                child(f, b, 5)
            }
            Formula::Or(a, b) => {
                child(f, a, 3)?;
                write!(f, " | ")?;
                child(f, b, 4)
            }
            Formula::Implies(a, b) => {
                child(f, a, 3)?;
                write!(f, " -> ")?;
                child(f, b, 2)
            }
            Formula::Iff(a, b) => {
                child(f, a, 1)?;
                write!(f, " <-> ")?;
                child(f, b, 2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Arrow,
    DoubleArrow,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "atom `{s}`"),
            Tok::True => write!(f, "`true`"),
            Tok::False => write!(f, "`false`"),
            Tok::Not => write!(f, "`!`"),
            Tok::And => write!(f, "`&`"),
            Tok::Or => write!(f, "`|`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::DoubleArrow => write!(f, "`<->`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.char_indices().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: String) -> ParseError {
        ParseError { line, column, message }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
                self.bump();
            }
            let (line, column) = (self.line, self.column);
            let Some(&(_, c)) = self.chars.peek() else {
                out.push((Tok::Eof, line, column));
                return Ok(out);
            };
            let tok = match c {
                '!' => {
                    self.bump();
                    Tok::Not
                }
                '&' => {
                    self.bump();
                    Tok::And
                }
                '|' => {
                    self.bump();
                    Tok::Or
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '-' => {
                    self.bump();
                    if self.bump() != Some('>') {
                        return Err(self.error(line, column, "expected `->`".into()));
                    }
                    Tok::Arrow
                }
                '<' => {
                    self.bump();
                    if self.bump() != Some('-') || self.bump() != Some('>') {
                        return Err(self.error(line, column, "expected `<->`".into()));
                    }
                    Tok::DoubleArrow
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut name = String::new();
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match name.as_str() {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        _ => Tok::Ident(name),
                    }
                }
                other => {
                    return Err(self.error(line, column, format!("unknown token `{other}`")));
                }
            };
            out.push((tok, line, column));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let (tok, line, column) = &self.toks[self.pos];
        ParseError { line: *line, column: *column, message: format!("expected {expected}, found {tok}") }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.implication()?;
        while *self.peek() == Tok::DoubleArrow {
            self.next();
            let right = self.implication()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.next();
            let right = self.implication()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.next();
            let right = self.conjunction()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::And {
            self.next();
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.next();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.next();
                let inner = self.iff()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.next();
                Ok(inner)
            }
            Tok::Ident(_) => match self.next() {
                Tok::Ident(name) => Ok(Formula::Atom(name)),
                _ => unreachable!(),
            },
            Tok::True => {
                self.next();
                Ok(Formula::True)
            }
            Tok::False => {
                self.next();
                Ok(Formula::False)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

/// Parses a formula. Precedence, tightest first: `!`, `&`, `|`, `->`, `<->`;
/// `->` is right-associative, the other binary operators left-associative.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut parser = Parser { toks, pos: 0 };
    let f = parser.iff()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.unexpected("end of input"));
    }
    Ok(f)
}

/// A literal: variable index plus sign, packed as `2 * var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn positive(var: u32) -> Self {
        Lit(var << 1)
    }

    pub fn negative(var: u32) -> Self {
        Lit((var << 1) | 1)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negate(self) -> Self {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.var())
        } else {
            write!(f, "-x{}", self.var())
        }
    }
}

pub type Clause = Vec<Lit>;

/// Sorts and dedups the literals; `None` for a tautology.
fn normalize_clause(mut clause: Clause) -> Option<Clause> {
    clause.sort_unstable();
    clause.dedup();
    if clause.windows(2).any(|w| w[0].var() == w[1].var()) {
        return None;
    }
    Some(clause)
}

/// Translates formulas into clauses over one shared variable space.
///
/// Named atoms get the lowest variable indices in order of first sight;
/// auxiliary atoms are allocated after them on demand. Definitions are
/// two-sided, so every model of the input extends to exactly one model of the
/// clauses.
#[derive(Clone, Debug, Default)]
pub struct Encoder {
    atoms: HashMap<String, u32>,
    names: Vec<Option<String>>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> u32 {
        self.names.len() as u32
    }

    /// Name of `var` if it stands for an input atom.
    pub fn atom_name(&self, var: u32) -> Option<&str> {
        self.names.get(var as usize).and_then(|n| n.as_deref())
    }

    pub fn atom_var(&self, name: &str) -> Option<u32> {
        self.atoms.get(name).copied()
    }

    /// Registers the atoms of `f` without emitting clauses.
    pub fn declare(&mut self, f: &Formula) {
        for a in f.atoms() {
            self.var_of(&a);
        }
    }

    fn var_of(&mut self, name: &str) -> u32 {
        if let Some(&v) = self.atoms.get(name) {
            return v;
        }
        let v = self.names.len() as u32;
        self.names.push(Some(name.to_owned()));
        self.atoms.insert(name.to_owned(), v);
        v
    }

    fn fresh(&mut self) -> u32 {
        let v = self.names.len() as u32;
        self.names.push(None);
        v
    }

    /// Clauses asserting `f`. An empty clause in the output means `f` is
    /// unsatisfiable on its own.
    pub fn encode(&mut self, f: &Formula) -> Vec<Clause> {
        let mut out = Vec::new();
        match f.simplify() {
            Formula::True => {}
            Formula::False => out.push(Vec::new()),
            g => self.assert_formula(&g, &mut out),
        }
        out
    }

    fn assert_formula(&mut self, f: &Formula, out: &mut Vec<Clause>) {
        if let Formula::And(a, b) = f {
            self.assert_formula(a, out);
            self.assert_formula(b, out);
            return;
        }
        let mut lits = Vec::new();
        if self.flat_clause(f, &mut lits) {
            if let Some(c) = normalize_clause(lits) {
                out.push(c);
            }
            return;
        }
        let l = self.define(f, out);
        out.push(vec![l]);
    }

    /// Collects `f` as a disjunction of literals if it has that shape.
    fn flat_clause(&mut self, f: &Formula, lits: &mut Vec<Lit>) -> bool {
        match f {
            Formula::Atom(a) => {
                lits.push(Lit::positive(self.var_of(a)));
                true
            }
            Formula::Not(g) => match g.as_ref() {
                Formula::Atom(a) => {
                    lits.push(Lit::negative(self.var_of(a)));
                    true
                }
                _ => false,
            },
            Formula::Or(a, b) => self.flat_clause(a, lits) && self.flat_clause(b, lits),
            Formula::Implies(a, b) => match a.as_ref() {
                Formula::Atom(x) => {
                    lits.push(Lit::negative(self.var_of(x)));
                    self.flat_clause(b, lits)
                }
                Formula::Not(inner) if matches!(inner.as_ref(), Formula::Atom(_)) => {
                    let Formula::Atom(x) = inner.as_ref() else { unreachable!() };
                    lits.push(Lit::positive(self.var_of(x)));
                    self.flat_clause(b, lits)
                }
                _ => false,
            },
            _ => false,
        }
    }

    fn push(out: &mut Vec<Clause>, clause: Clause) {
        if let Some(c) = normalize_clause(clause) {
            out.push(c);
        }
    }

    /// Returns a literal equivalent to the constant-free formula `f`.
    fn define(&mut self, f: &Formula, out: &mut Vec<Clause>) -> Lit {
        match f {
            Formula::Atom(a) => Lit::positive(self.var_of(a)),
            Formula::Not(g) => self.define(g, out).negate(),
            Formula::And(a, b) => {
                let (a, b) = (self.define(a, out), self.define(b, out));
                let x = Lit::positive(self.fresh());
                Self::push(out, vec![x.negate(), a]);
                Self::push(out, vec![x.negate(), b]);
                Self::push(out, vec![x, a.negate(), b.negate()]);
                x
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.define(a, out), self.define(b, out));
                self.define_or(a, b, out)
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.define(a, out), self.define(b, out));
                self.define_or(a.negate(), b, out)
            }
            Formula::Iff(a, b) => {
                let (a, b) = (self.define(a, out), self.define(b, out));
                let x = Lit::positive(self.fresh());
                Self::push(out, vec![x.negate(), a.negate(), b]);
                Self::push(out, vec![x.negate(), a, b.negate()]);
                Self::push(out, vec![x, a, b]);
                Self::push(out, vec![x, a.negate(), b.negate()]);
                x
            }
            Formula::True | Formula::False => unreachable!("constants are folded before definition"),
        }
    }

    fn define_or(&mut self, a: Lit, b: Lit, out: &mut Vec<Clause>) -> Lit {
        let x = Lit::positive(self.fresh());
        Self::push(out, vec![x.negate(), a, b]);
        Self::push(out, vec![x, a.negate()]);
        Self::push(out, vec![x, b.negate()]);
        x
    }
}

/// A set of clauses together with the encoder that produced it.
#[derive(Clone, Debug, Default)]
pub struct ClauseSet {
    pub clauses: Vec<Clause>,
    pub encoder: Encoder,
}

impl ClauseSet {
    pub fn num_vars(&self) -> u32 {
        self.encoder.num_vars()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

pub fn to_clause_set<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> ClauseSet {
    let mut encoder = Encoder::new();
    let mut clauses = Vec::new();
    for f in formulas {
        clauses.extend(encoder.encode(f));
    }
    ClauseSet { clauses, encoder }
}

const UNASSIGNED: i8 = -1;

/// DPLL with unit propagation over borrowed clauses.
pub struct Solver<'a> {
    clauses: Vec<&'a [Lit]>,
    values: Vec<i8>,
    trail: Vec<u32>,
    branch_order: Vec<u32>,
}

impl<'a> Solver<'a> {
    pub fn new(num_vars: u32, clauses: impl IntoIterator<Item = &'a [Lit]>) -> Self {
        let clauses: Vec<&[Lit]> = clauses.into_iter().collect();
        let mut used = vec![false; num_vars as usize];
        for c in &clauses {
            for l in c.iter() {
                used[l.var() as usize] = true;
            }
        }
        let branch_order = (0..num_vars).filter(|&v| used[v as usize]).collect();
        Solver { clauses, values: vec![UNASSIGNED; num_vars as usize], trail: Vec::new(), branch_order }
    }

    fn lit_value(&self, l: Lit) -> i8 {
        match self.values[l.var() as usize] {
            UNASSIGNED => UNASSIGNED,
            v => (v == 1) as i8 ^ (!l.is_positive()) as i8,
        }
    }

    fn assign(&mut self, l: Lit) {
        self.values[l.var() as usize] = l.is_positive() as i8;
        self.trail.push(l.var());
    }

    fn undo(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.values[v as usize] = UNASSIGNED;
        }
    }

    /// Unit propagation to fixpoint. `Err(())` on a falsified clause,
    /// `Ok(true)` if every clause is satisfied.
    fn propagate(&mut self) -> Result<bool, ()> {
        loop {
            let mut changed = false;
            let mut all_sat = true;
            for i in 0..self.clauses.len() {
                let mut open = None;
                let mut open_count = 0;
                let mut sat = false;
                for &l in self.clauses[i] {
                    match self.lit_value(l) {
                        1 => {
                            sat = true;
                            break;
                        }
                        UNASSIGNED => {
                            open_count += 1;
                            open = Some(l);
                        }
                        _ => {}
                    }
                }
                if sat {
                    continue;
                }
                match open_count {
                    0 => return Err(()),
                    1 => {
                        self.assign(open.unwrap());
                        changed = true;
                    }
                    _ => all_sat = false,
                }
            }
            if !changed {
                return Ok(all_sat);
            }
        }
    }

    fn search(&mut self) -> bool {
        match self.propagate() {
            Err(()) => return false,
            Ok(true) => return true,
            Ok(false) => {}
        }
        let Some(var) = self.branch_order.iter().copied().find(|&v| self.values[v as usize] == UNASSIGNED)
        else {
            return true;
        };
        let mark = self.trail.len();
        for lit in [Lit::negative(var), Lit::positive(var)] {
            self.assign(lit);
            if self.search() {
                return true;
            }
            self.undo(mark);
        }
        false
    }

    pub fn solve(&mut self) -> bool {
        if self.clauses.iter().any(|c| c.is_empty()) {
            return false;
        }
        self.search()
    }

    /// Value of `var` in the model found by the last successful `solve`.
    /// Variables left open are reported as `false`.
    pub fn value(&self, var: u32) -> bool {
        self.values[var as usize] == 1
    }
}

pub fn is_satisfiable(cs: &ClauseSet) -> bool {
    Solver::new(cs.num_vars(), cs.clauses.iter().map(Vec::as_slice)).solve()
}

pub fn is_consistent(sentences: &[Formula]) -> bool {
    is_satisfiable(&to_clause_set(sentences))
}

pub fn entails(sentences: &[Formula], goal: &Formula) -> bool {
    let negated = Formula::not(goal.clone());
    !is_satisfiable(&to_clause_set(sentences.iter().chain(std::iter::once(&negated))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn table1() -> Vec<Formula> {
        ["A -> !B", "A -> B", "A -> !C", "B -> C", "A -> B | C"].iter().map(|s| p(s)).collect()
    }

    #[test]
    fn parses_table_axiom() {
        assert_eq!(p("A -> !B"), Formula::implies(Formula::atom("A"), Formula::not(Formula::atom("B"))));
        assert_eq!(p("true"), Formula::True);
    }

    #[test]
    fn implication_is_right_associative() {
        let expected = Formula::implies(
            Formula::atom("A"),
            Formula::implies(Formula::atom("B"), Formula::atom("C")),
        );
        assert_eq!(p("A -> B -> C"), expected);
    }

    #[test]
    fn precedence() {
        let f = p("!A & B | C -> D <-> E");
        let expected = Formula::iff(
            Formula::implies(
                Formula::or(
                    Formula::and(Formula::not(Formula::atom("A")), Formula::atom("B")),
                    Formula::atom("C"),
                ),
                Formula::atom("D"),
            ),
            Formula::atom("E"),
        );
        assert_eq!(f, expected);
        assert_eq!(p("A & B & C"), Formula::and(Formula::and(Formula::atom("A"), Formula::atom("B")), Formula::atom("C")));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_formula("A &\n  # B").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(err.message.contains("unknown token"));

        let err = parse_formula("(A | B").unwrap_err();
        assert_eq!((err.line, err.column), (1, 7));

        let err = parse_formula("A B").unwrap_err();
        assert!(err.message.contains("end of input"));

        assert!(parse_formula("A - B").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn clause_set_shapes() {
        assert!(to_clause_set(&[]).is_empty());

        let cs = to_clause_set(&[p("A & B")]);
        assert_eq!(cs.clauses, vec![vec![Lit::positive(0)], vec![Lit::positive(1)]]);

        let cs = to_clause_set(&[p("A -> B")]);
        assert_eq!(cs.clauses, vec![vec![Lit::negative(0), Lit::positive(1)]]);

        // tautologies vanish, contradictions leave the empty clause
        assert!(to_clause_set(&[p("A | !A")]).is_empty());
        assert_eq!(to_clause_set(&[p("A & false")]).clauses, vec![Vec::<Lit>::new()]);
    }

    #[test]
    fn implication_clauses_match_truth_table() {
        let cs = to_clause_set(&[p("A -> B")]);
        for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
            let unit_a = if a { Lit::positive(0) } else { Lit::negative(0) };
            let unit_b = if b { Lit::positive(1) } else { Lit::negative(1) };
            let mut clauses: Vec<&[Lit]> = cs.clauses.iter().map(Vec::as_slice).collect();
            let ua = [unit_a];
            let ub = [unit_b];
            clauses.push(&ua);
            clauses.push(&ub);
            assert_eq!(Solver::new(cs.num_vars(), clauses).solve(), !a || b);
        }
    }

    #[test]
    fn satisfiability_basics() {
        assert!(is_satisfiable(&ClauseSet::default()));
        assert!(!is_consistent(&[p("A"), p("!A")]));
        assert!(is_consistent(&[]));
        assert!(is_consistent(&table1()));

        let mut with_a = table1();
        with_a.push(p("A"));
        assert!(!is_satisfiable(&to_clause_set(&with_a)));
    }

    #[test]
    fn entailment() {
        assert!(entails(&[p("A -> B"), p("A")], &p("B")));
        assert!(!entails(&[], &p("A")));
        assert!(entails(&table1(), &p("!A")));
        assert!(entails(&table1()[..2], &p("!A")));
        assert!(entails(&[], &p("A | !A")));
        assert!(entails(&[p("false")], &p("A")));
    }

    #[test]
    fn printer_parenthesizes_where_needed() {
        for s in ["(A -> B) -> C", "A -> B -> C", "!(A & B)", "A & (B | C)", "(A <-> B) <-> C", "A <-> (B <-> C)", "A | B & C"] {
            let f = p(s);
            assert_eq!(p(&f.to_string()), f, "{s} printed as {f}");
        }
        assert_eq!(p("A & (B | C)").to_string(), "A & (B | C)");
    }

    #[test]
    fn solver_model_satisfies_formula() {
        let f = p("(A | B) & (!A | C) & (!C | !B) & (B <-> !D)");
        let cs = to_clause_set([&f]);
        let mut solver = Solver::new(cs.num_vars(), cs.clauses.iter().map(Vec::as_slice));
        assert!(solver.solve());
        let value = |a: &str| solver.value(cs.encoder.atom_var(a).unwrap());
        assert!(f.eval(&value));
    }
}
