//! Programs in both rule syntaxes and the structural transformations
//! between them.
//!
//! Old-syntax rules are built from annotated revision atoms `(in(a):α)` and
//! `(out(a):α)`; new-syntax rules from pair-annotated atoms `a:⟨α,β⟩`.
//! Programs are ordered lists with set semantics: duplicate rules are
//! dropped structurally on construction, keeping the first occurrence.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{Elem, Lattice, Pair};
use crate::valuation::PairValuation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("duplicate atom `{0}` in universe")]
    DuplicateAtom(String),
    #[error("undeclared atom `{0}`")]
    UndeclaredAtom(String),
    #[error("atom index {0} lies outside the universe")]
    AtomOutOfRange(u32),
    #[error("annotation does not belong to the program lattice")]
    ForeignAnnotation,
    #[error("operation expects a {expected}-syntax program")]
    WrongSyntax { expected: SyntaxKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    In,
    Out,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::In => Polarity::Out,
            Polarity::Out => Polarity::In,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::In => "in",
            Polarity::Out => "out",
        }
    }
}

/// Index of an atom in its [`Universe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite, lexicographically sorted set of atom names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Universe(Arc<[String]>);

impl Universe {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Universe, SyntaxError> {
        let mut sorted: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(SyntaxError::DuplicateAtom(w[0].clone()));
            }
        }
        Ok(Universe(sorted.into()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<AtomId> {
        self.0.binary_search_by(|n| n.as_str().cmp(name)).ok().map(|i| AtomId(i as u32))
    }

    pub fn lookup(&self, name: &str) -> Result<AtomId, SyntaxError> {
        self.id(name).ok_or_else(|| SyntaxError::UndeclaredAtom(name.to_string()))
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.0[id.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.0.len() as u32).map(AtomId)
    }

    fn check(&self, id: AtomId) -> Result<(), SyntaxError> {
        if id.index() < self.len() {
            Ok(())
        } else {
            Err(SyntaxError::AtomOutOfRange(id.0))
        }
    }
}

/// `in(a)` or `out(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RevisionAtom {
    pub polarity: Polarity,
    pub atom: AtomId,
}

impl RevisionAtom {
    pub fn new(polarity: Polarity, atom: AtomId) -> RevisionAtom {
        RevisionAtom { polarity, atom }
    }

    pub fn pos(atom: AtomId) -> RevisionAtom {
        RevisionAtom::new(Polarity::In, atom)
    }

    pub fn neg(atom: AtomId) -> RevisionAtom {
        RevisionAtom::new(Polarity::Out, atom)
    }

    /// Swaps `in` and `out`.
    pub fn dual(self) -> RevisionAtom {
        RevisionAtom { polarity: self.polarity.flip(), atom: self.atom }
    }
}

/// `(l:α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnnotatedAtom {
    pub lit: RevisionAtom,
    pub ann: Elem,
}

impl AnnotatedAtom {
    pub fn new(lit: RevisionAtom, ann: Elem) -> AnnotatedAtom {
        AnnotatedAtom { lit, ann }
    }
}

/// `a:⟨α,β⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairAtom {
    pub atom: AtomId,
    pub ann: Pair,
}

impl PairAtom {
    pub fn new(atom: AtomId, ann: Pair) -> PairAtom {
        PairAtom { atom, ann }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule<A> {
    pub head: A,
    pub body: Vec<A>,
}

impl<A> Rule<A> {
    pub fn new(head: A, body: Vec<A>) -> Rule<A> {
        Rule { head, body }
    }

    pub fn fact(head: A) -> Rule<A> {
        Rule { head, body: Vec::new() }
    }
}

pub type OldRule = Rule<AnnotatedAtom>;
pub type NewRule = Rule<PairAtom>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntaxKind {
    Old,
    New,
}

impl fmt::Display for SyntaxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntaxKind::Old => "old",
            SyntaxKind::New => "new",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rules {
    Old(Vec<OldRule>),
    New(Vec<NewRule>),
}

impl Rules {
    pub fn len(&self) -> usize {
        match self {
            Rules::Old(r) => r.len(),
            Rules::New(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> SyntaxKind {
        match self {
            Rules::Old(_) => SyntaxKind::Old,
            Rules::New(_) => SyntaxKind::New,
        }
    }
}

/// A ground program over a declared universe and lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    lattice: Lattice,
    universe: Universe,
    rules: Rules,
}

impl Program {
    pub fn old(lattice: Lattice, universe: Universe, rules: Vec<OldRule>) -> Result<Program, SyntaxError> {
        for r in &rules {
            for a in std::iter::once(&r.head).chain(&r.body) {
                universe.check(a.lit.atom)?;
                if !lattice.contains(a.ann) {
                    return Err(SyntaxError::ForeignAnnotation);
                }
            }
        }
        Ok(Program { lattice, universe, rules: Rules::Old(dedupe(rules)) })
    }

    pub fn new_syntax(lattice: Lattice, universe: Universe, rules: Vec<NewRule>) -> Result<Program, SyntaxError> {
        for r in &rules {
            for a in std::iter::once(&r.head).chain(&r.body) {
                universe.check(a.atom)?;
                if lattice.check_pair(a.ann).is_err() {
                    return Err(SyntaxError::ForeignAnnotation);
                }
            }
        }
        Ok(Program { lattice, universe, rules: Rules::New(dedupe(rules)) })
    }

    /// Builds a program without validation or deduplication, keeping rule
    /// positions aligned with a caller-side index.
    pub(crate) fn raw(lattice: Lattice, universe: Universe, rules: Rules) -> Program {
        Program { lattice, universe, rules }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn syntax(&self) -> SyntaxKind {
        self.rules.kind()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn old_rules(&self) -> Option<&[OldRule]> {
        match &self.rules {
            Rules::Old(r) => Some(r),
            Rules::New(_) => None,
        }
    }

    pub fn new_rules(&self) -> Option<&[NewRule]> {
        match &self.rules {
            Rules::New(r) => Some(r),
            Rules::Old(_) => None,
        }
    }

    /// Union with another program of the same syntax, universe and lattice.
    pub fn union(&self, other: &Program) -> Result<Program, SyntaxError> {
        if other.lattice != self.lattice {
            return Err(SyntaxError::ForeignAnnotation);
        }
        match (&self.rules, &other.rules) {
            (Rules::Old(a), Rules::Old(b)) => {
                Program::old(self.lattice.clone(), self.universe.clone(), a.iter().chain(b).cloned().collect())
            }
            (Rules::New(a), Rules::New(b)) => Program::new_syntax(
                self.lattice.clone(),
                self.universe.clone(),
                a.iter().chain(b).cloned().collect(),
            ),
            _ => Err(SyntaxError::WrongSyntax { expected: self.syntax() }),
        }
    }

    /// Every annotation element occurring in the program.
    pub fn constants(&self) -> Vec<Elem> {
        let mut out = Vec::new();
        match &self.rules {
            Rules::Old(rs) => {
                for r in rs {
                    out.extend(std::iter::once(&r.head).chain(&r.body).map(|a| a.ann));
                }
            }
            Rules::New(rs) => {
                for r in rs {
                    for a in std::iter::once(&r.head).chain(&r.body) {
                        out.push(a.ann.pos);
                        out.push(a.ann.neg);
                    }
                }
            }
        }
        out
    }

    fn expect_old(&self) -> Result<&[OldRule], SyntaxError> {
        self.old_rules().ok_or(SyntaxError::WrongSyntax { expected: SyntaxKind::Old })
    }

    fn expect_new(&self) -> Result<&[NewRule], SyntaxError> {
        self.new_rules().ok_or(SyntaxError::WrongSyntax { expected: SyntaxKind::New })
    }
}

fn dedupe<T: Clone + Eq + std::hash::Hash>(rules: Vec<T>) -> Vec<T> {
    let mut seen = std::collections::HashSet::new();
    rules.into_iter().filter(|r| seen.insert(r.clone())).collect()
}

/// Merges body atoms sharing a revision atom into one atom annotated with
/// the join, placed at the first occurrence.
pub fn join_transform(p: &Program) -> Result<Program, SyntaxError> {
    let lat = p.lattice();
    let rules = p
        .expect_old()?
        .iter()
        .map(|r| {
            let mut body: Vec<AnnotatedAtom> = Vec::with_capacity(r.body.len());
            for a in &r.body {
                match body.iter_mut().find(|b| b.lit == a.lit) {
                    Some(b) => b.ann = lat.join_u(b.ann, a.ann),
                    None => body.push(*a),
                }
            }
            Rule::new(r.head, body)
        })
        .collect();
    Program::old(lat.clone(), p.universe().clone(), rules)
}

fn lift(lat: &Lattice, a: AnnotatedAtom) -> PairAtom {
    let ann = match a.lit.polarity {
        Polarity::In => Pair::new(a.ann, lat.bot()),
        Polarity::Out => Pair::new(lat.bot(), a.ann),
    };
    PairAtom::new(a.lit.atom, ann)
}

/// Old syntax to new: `(in(a):α)` becomes `a:⟨α,⊥⟩`, `(out(a):β)` becomes
/// `a:⟨⊥,β⟩`.
pub fn tr1(p: &Program) -> Result<Program, SyntaxError> {
    let lat = p.lattice();
    let rules = p
        .expect_old()?
        .iter()
        .map(|r| Rule::new(lift(lat, r.head), r.body.iter().map(|&a| lift(lat, a)).collect()))
        .collect();
    Program::new_syntax(lat.clone(), p.universe().clone(), rules)
}

/// New syntax to old: each rule yields an in-rule and an out-rule sharing
/// the translated body, where `b:⟨α,β⟩` becomes `(in(b):α), (out(b):β)`.
pub fn tr2(p: &Program) -> Result<Program, SyntaxError> {
    let mut rules = Vec::new();
    for r in p.expect_new()? {
        let body: Vec<AnnotatedAtom> = r
            .body
            .iter()
            .flat_map(|a| {
                [
                    AnnotatedAtom::new(RevisionAtom::pos(a.atom), a.ann.pos),
                    AnnotatedAtom::new(RevisionAtom::neg(a.atom), a.ann.neg),
                ]
            })
            .collect();
        rules.push(Rule::new(AnnotatedAtom::new(RevisionAtom::pos(r.head.atom), r.head.ann.pos), body.clone()));
        rules.push(Rule::new(AnnotatedAtom::new(RevisionAtom::neg(r.head.atom), r.head.ann.neg), body));
    }
    Program::old(p.lattice().clone(), p.universe().clone(), rules)
}

/// An unannotated revision rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassicRule {
    pub head: RevisionAtom,
    pub body: Vec<RevisionAtom>,
}

impl ClassicRule {
    pub fn new(head: RevisionAtom, body: Vec<RevisionAtom>) -> ClassicRule {
        ClassicRule { head, body }
    }
}

/// Encodes a classic revision program over the two-valued lattice, with
/// every literal annotated `t`, and the database as `⟨t,f⟩` for members
/// and `⟨f,t⟩` otherwise.
pub fn encode_classic(
    universe: &Universe,
    rules: &[ClassicRule],
    db: &BTreeSet<AtomId>,
) -> Result<(Program, PairValuation), SyntaxError> {
    let two = Lattice::two();
    let t = two.top();
    let rules = rules
        .iter()
        .map(|r| {
            Rule::new(
                AnnotatedAtom::new(r.head, t),
                r.body.iter().map(|&l| AnnotatedAtom::new(l, t)).collect(),
            )
        })
        .collect();
    for id in db {
        universe.check(*id)?;
    }
    let program = Program::old(two.clone(), universe.clone(), rules)?;
    Ok((program, PairValuation::from_set(&two, universe, db)))
}

/// Inverse of the database encoding; `None` unless every atom is `⟨t,f⟩`
/// or `⟨f,t⟩` over the two-valued lattice.
pub fn decode_classic(v: &PairValuation) -> Option<BTreeSet<AtomId>> {
    let lat = v.lattice();
    if !lat.is_two() {
        return None;
    }
    let (f, t) = (lat.bot(), lat.top());
    let mut out = BTreeSet::new();
    for id in v.universe().ids() {
        let p = v.get(id);
        if p == Pair::new(t, f) {
            out.insert(id);
        } else if p != Pair::new(f, t) {
            return None;
        }
    }
    Some(out)
}
