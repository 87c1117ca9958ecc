//! The `.arp` text format: lattices, programs in either syntax, valuations
//! and isomorphism blocks. See `docs/FORMAT.md` for the grammar.

mod lexer;
mod parser;
pub mod json;
pub mod writer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;

use crate::isomorphism::{PairIso, PairMap, Step};
use crate::lattice::{Elem, Lattice, LatticeError, Pair};
use crate::syntax::{AnnotatedAtom, AtomId, PairAtom, Program, RevisionAtom, Rule, SyntaxKind, Universe};
use crate::valuation::PairValuation;

use parser::{AtomLit, Block, ElemLit, EntryLit, IsoEntry, IsoTarget, LatticeDecl, PairLit, Sp, StepLit};

pub use writer::{to_text, valuation_lines};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Lexical,
    Syntax,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub(crate) fn lexical(pos: Pos, message: String) -> ParseError {
        ParseError { kind: ErrorKind::Lexical, pos, message }
    }

    pub(crate) fn syntax(pos: Pos, message: String) -> ParseError {
        ParseError { kind: ErrorKind::Syntax, pos, message }
    }

    pub(crate) fn semantic(pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError { kind: ErrorKind::Semantic, pos, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Lexical => "lexical",
            ErrorKind::Syntax => "syntax",
            ErrorKind::Semantic => "semantic",
        };
        write!(f, "{}:{}: {kind} error: {}", self.pos.line, self.pos.col, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A fully validated input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub lattice: Lattice,
    pub universe: Universe,
    pub program: Program,
    pub init: Option<PairValuation>,
    pub candidate: Option<PairValuation>,
    pub iso: Option<PairIso>,
}

impl Document {
    pub fn syntax(&self) -> SyntaxKind {
        self.program.syntax()
    }

    /// Same document with a different program, keeping lattice, universe
    /// and valuations.
    pub fn with_program(&self, program: Program) -> Document {
        Document { program, ..self.clone() }
    }
}

pub fn parse(src: &str) -> Result<Document, ParseError> {
    let blocks = parser::parse_blocks(lexer::lex(src)?)?;
    let mut seen: BTreeMap<&'static str, Pos> = BTreeMap::new();
    for b in &blocks {
        if let Some(first) = seen.insert(b.node.keyword(), b.pos) {
            return Err(ParseError::semantic(
                b.pos,
                format!("duplicate `{}` block (first at {}:{})", b.node.keyword(), first.line, first.col),
            ));
        }
    }
    let find = |kw: &str| blocks.iter().find(|b| b.node.keyword() == kw);
    let end = Pos { line: src.lines().count().max(1), col: 1 };

    let lat_block = find("lattice").ok_or_else(|| ParseError::semantic(end, "missing `lattice` declaration"))?;
    let Block::Lattice(decl) = &lat_block.node else { unreachable!() };
    let lattice = build_lattice(decl, lat_block.pos)?;

    let syntax = match find("syntax") {
        Some(Sp { node: Block::Syntax(s), .. }) => *s,
        _ => SyntaxKind::Old,
    };

    let uni_block = find("universe").ok_or_else(|| ParseError::semantic(end, "missing `universe` declaration"))?;
    let Block::Universe(names) = &uni_block.node else { unreachable!() };
    let mut dup = BTreeSet::new();
    for n in names {
        if !dup.insert(n.node.as_str()) {
            return Err(ParseError::semantic(n.pos, format!("atom `{}` declared twice", n.node)));
        }
    }
    let universe = Universe::new(&names.iter().map(|n| n.node.as_str()).collect::<Vec<_>>())
        .map_err(|e| ParseError::semantic(uni_block.pos, e.to_string()))?;

    let ctx = Ctx { lattice: &lattice, universe: &universe };
    let rules = match find("program") {
        Some(Sp { node: Block::Program(r), .. }) => r.as_slice(),
        _ => &[],
    };
    let program = ctx.program(syntax, rules)?;
    let valuation = |kw| match find(kw) {
        Some(Sp { node: Block::Init(e) | Block::Candidate(e), .. }) => ctx.valuation(e).map(Some),
        _ => Ok(None),
    };
    let init = valuation("init")?;
    let candidate = valuation("candidate")?;
    let iso = match find("iso") {
        Some(Sp { node: Block::Iso(entries), .. }) => Some(ctx.iso(entries)?),
        _ => None,
    };
    Ok(Document { lattice, universe, program, init, candidate, iso })
}

/// Parses a stand-alone file holding only an `iso { ... }` block, against
/// the lattice and universe of an already parsed document.
pub fn parse_iso(src: &str, lattice: &Lattice, universe: &Universe) -> Result<PairIso, ParseError> {
    let blocks = parser::parse_blocks(lexer::lex(src)?)?;
    let ctx = Ctx { lattice, universe };
    let mut iso = None;
    for b in &blocks {
        match &b.node {
            Block::Iso(entries) if iso.is_none() => iso = Some(ctx.iso(entries)?),
            Block::Iso(_) => return Err(ParseError::semantic(b.pos, "duplicate `iso` block")),
            other => {
                return Err(ParseError::semantic(
                    b.pos,
                    format!("isomorphism files may only contain an `iso` block, found `{}`", other.keyword()),
                ))
            }
        }
    }
    iso.ok_or_else(|| ParseError::semantic(Pos { line: 1, col: 1 }, "missing `iso` block"))
}

fn build_lattice(decl: &LatticeDecl, pos: Pos) -> Result<Lattice, ParseError> {
    let sem = |p: Pos| move |e: LatticeError| ParseError::semantic(p, e.to_string());
    let names = |v: &[Sp<String>]| v.iter().map(|s| s.node.clone()).collect::<Vec<_>>();
    let lat = match decl {
        LatticeDecl::Two => Lattice::two(),
        LatticeDecl::Unit => Lattice::unit_chain(),
        LatticeDecl::Chain(levels) => Lattice::chain(&names(levels)).map_err(sem(pos))?,
        LatticeDecl::Powerset { labels, complement } => {
            let base = Lattice::powerset(&names(labels)).map_err(sem(pos))?;
            match complement {
                None => base,
                Some(entries) => {
                    let mut pairs = Vec::new();
                    for (from, to) in entries {
                        pairs.push((resolve_elem(&base, from)?, resolve_elem(&base, to)?));
                    }
                    base.with_complement(&pairs).map_err(sem(pos))?
                }
            }
        }
        LatticeDecl::Custom { elements, order, complement } => {
            let pairs = |v: &[(Sp<String>, Sp<String>)]| {
                v.iter().map(|(a, b)| (a.node.clone(), b.node.clone())).collect::<Vec<_>>()
            };
            Lattice::custom(&names(elements), &pairs(order), &pairs(complement)).map_err(sem(pos))?
        }
    };
    lat.validated().map_err(sem(pos))
}

fn parse_rational(text: &str) -> Option<Ratio<i64>> {
    if let Some((n, d)) = text.split_once('/') {
        let (n, d): (i64, i64) = (n.parse().ok()?, d.parse().ok()?);
        return (d != 0).then(|| Ratio::new(n, d));
    }
    match text.split_once('.') {
        None => text.parse().ok().map(Ratio::from_integer),
        Some((int, frac)) => {
            let scale = 10i64.checked_pow(frac.len() as u32)?;
            let int: i64 = int.parse().ok()?;
            let frac: i64 = frac.parse().ok()?;
            Some(Ratio::new(int.checked_mul(scale)?.checked_add(frac)?, scale))
        }
    }
}

fn resolve_elem(lat: &Lattice, e: &Sp<ElemLit>) -> Result<Elem, ParseError> {
    let err = |m: String| ParseError::semantic(e.pos, m);
    let kind = lat.kind_name();
    match &e.node {
        ElemLit::Set(members) => {
            if lat.labels().is_none() {
                return Err(err(format!("set literal used with lattice {kind}")));
            }
            for m in members {
                if !lat.labels().unwrap().contains(&m.node) {
                    return Err(ParseError::semantic(m.pos, format!("label `{}` is not part of lattice {kind}", m.node)));
                }
            }
            let mut names: Vec<&str> = members.iter().map(|m| m.node.as_str()).collect();
            names.sort();
            names.dedup();
            lat.set(&names).map_err(|x| err(x.to_string()))
        }
        ElemLit::Number(text) if lat.is_unit_chain() => {
            let r = parse_rational(text).ok_or_else(|| err(format!("cannot read `{text}` as an exact rational")))?;
            lat.from_rational(r).map_err(|x| err(x.to_string()))
        }
        ElemLit::Name(name) | ElemLit::Number(name) => {
            if lat.names().is_none() {
                return Err(err(format!("`{name}` is not an element of lattice {kind}")));
            }
            lat.named(name).map_err(|_| err(format!("`{name}` is not an element of lattice {kind}")))
        }
    }
}

struct Ctx<'a> {
    lattice: &'a Lattice,
    universe: &'a Universe,
}

impl Ctx<'_> {
    fn atom(&self, name: &Sp<String>) -> Result<AtomId, ParseError> {
        self.universe
            .id(&name.node)
            .ok_or_else(|| ParseError::semantic(name.pos, format!("undeclared atom `{}`", name.node)))
    }

    fn elem(&self, e: &Sp<ElemLit>) -> Result<Elem, ParseError> {
        resolve_elem(self.lattice, e)
    }

    fn pair(&self, p: &PairLit) -> Result<Pair, ParseError> {
        Ok(Pair::new(self.elem(&p.pos)?, self.elem(&p.neg)?))
    }

    fn old_atom(&self, a: &AtomLit) -> Result<AnnotatedAtom, ParseError> {
        match a {
            AtomLit::Old { polarity, atom, ann } => {
                Ok(AnnotatedAtom::new(RevisionAtom::new(*polarity, self.atom(atom)?), self.elem(ann)?))
            }
            AtomLit::New { .. } => Err(ParseError::semantic(
                a.pos(),
                "pair-annotated atom in an old-syntax program (declare `syntax new`)",
            )),
        }
    }

    fn new_atom(&self, a: &AtomLit) -> Result<PairAtom, ParseError> {
        match a {
            AtomLit::New { atom, ann } => Ok(PairAtom::new(self.atom(atom)?, self.pair(&ann.node)?)),
            AtomLit::Old { .. } => Err(ParseError::semantic(
                a.pos(),
                "revision atom in a new-syntax program (declare `syntax old`)",
            )),
        }
    }

    fn program(&self, syntax: SyntaxKind, rules: &[parser::RuleLit]) -> Result<Program, ParseError> {
        let at = Pos { line: 1, col: 1 };
        let wrap = |e: crate::syntax::SyntaxError| ParseError::semantic(at, e.to_string());
        match syntax {
            SyntaxKind::Old => {
                let mut out = Vec::new();
                for r in rules {
                    let body = r.body.iter().map(|a| self.old_atom(a)).collect::<Result<_, _>>()?;
                    out.push(Rule::new(self.old_atom(&r.head)?, body));
                }
                Program::old(self.lattice.clone(), self.universe.clone(), out).map_err(wrap)
            }
            SyntaxKind::New => {
                let mut out = Vec::new();
                for r in rules {
                    let body = r.body.iter().map(|a| self.new_atom(a)).collect::<Result<_, _>>()?;
                    out.push(Rule::new(self.new_atom(&r.head)?, body));
                }
                Program::new_syntax(self.lattice.clone(), self.universe.clone(), out).map_err(wrap)
            }
        }
    }

    fn valuation(&self, entries: &[EntryLit]) -> Result<PairValuation, ParseError> {
        let mut seen = BTreeSet::new();
        let mut values = Vec::new();
        for e in entries {
            let id = self.atom(&e.atom)?;
            if !seen.insert(id) {
                return Err(ParseError::semantic(e.atom.pos, format!("atom `{}` assigned twice", e.atom.node)));
            }
            values.push((id, self.pair(&e.value)?));
        }
        PairValuation::from_entries(self.lattice, self.universe, values)
            .map_err(|e| ParseError::semantic(Pos { line: 1, col: 1 }, e.to_string()))
    }

    fn iso(&self, entries: &[IsoEntry]) -> Result<PairIso, ParseError> {
        let mut per_atom = BTreeMap::new();
        let mut default: Option<PairMap> = None;
        for e in entries {
            let pos = e.steps[0].pos;
            let mut steps = Vec::new();
            for s in &e.steps {
                steps.push(match &s.node {
                    StepLit::Id => Step::Identity,
                    StepLit::Swap => Step::Swap,
                    StepLit::Perm(m) => Step::Perm(m.iter().map(|(a, b)| (a.node.clone(), b.node.clone())).collect()),
                    StepLit::Table(m) => {
                        let mut t = Vec::new();
                        for (a, b) in m {
                            t.push((self.pair(a)?, self.pair(b)?));
                        }
                        Step::Table(t)
                    }
                });
            }
            let map = PairMap::compile(self.lattice, steps).map_err(|x| ParseError::semantic(pos, x.to_string()))?;
            match &e.target {
                IsoTarget::Default(p) => {
                    if default.replace(map).is_some() {
                        return Err(ParseError::semantic(*p, "default map `*` given twice"));
                    }
                }
                IsoTarget::Atom(name) => {
                    if per_atom.insert(self.atom(name)?, map).is_some() {
                        return Err(ParseError::semantic(name.pos, format!("map for `{}` given twice", name.node)));
                    }
                }
            }
        }
        Ok(PairIso::new(
            self.lattice.clone(),
            self.universe.clone(),
            per_atom,
            default.unwrap_or_else(PairMap::identity),
        ))
    }
}
