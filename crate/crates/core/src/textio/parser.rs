//! Tokens to a position-annotated syntax tree. Names are not resolved here.

use super::lexer::{Tok, Token};
use super::{ParseError, Pos};
use crate::syntax::{Polarity, SyntaxKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sp<T> {
    pub node: T,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElemLit {
    Set(Vec<Sp<String>>),
    Name(String),
    Number(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLit {
    pub pos: Sp<ElemLit>,
    pub neg: Sp<ElemLit>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeDecl {
    Two,
    Powerset { labels: Vec<Sp<String>>, complement: Option<Vec<(Sp<ElemLit>, Sp<ElemLit>)>> },
    Unit,
    Chain(Vec<Sp<String>>),
    Custom { elements: Vec<Sp<String>>, order: Vec<(Sp<String>, Sp<String>)>, complement: Vec<(Sp<String>, Sp<String>)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomLit {
    Old { polarity: Polarity, atom: Sp<String>, ann: Sp<ElemLit> },
    New { atom: Sp<String>, ann: Sp<PairLit> },
}

impl AtomLit {
    pub fn pos(&self) -> Pos {
        match self {
            AtomLit::Old { atom, .. } | AtomLit::New { atom, .. } => atom.pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleLit {
    pub head: AtomLit,
    pub body: Vec<AtomLit>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryLit {
    pub atom: Sp<String>,
    pub value: PairLit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoTarget {
    Atom(Sp<String>),
    Default(Pos),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepLit {
    Id,
    Swap,
    Perm(Vec<(Sp<String>, Sp<String>)>),
    Table(Vec<(PairLit, PairLit)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoEntry {
    pub target: IsoTarget,
    pub steps: Vec<Sp<StepLit>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Lattice(LatticeDecl),
    Syntax(SyntaxKind),
    Universe(Vec<Sp<String>>),
    Program(Vec<RuleLit>),
    Init(Vec<EntryLit>),
    Candidate(Vec<EntryLit>),
    Iso(Vec<IsoEntry>),
}

impl Block {
    pub fn keyword(&self) -> &'static str {
        match self {
            Block::Lattice(_) => "lattice",
            Block::Syntax(_) => "syntax",
            Block::Universe(_) => "universe",
            Block::Program(_) => "program",
            Block::Init(_) => "init",
            Block::Candidate(_) => "candidate",
            Block::Iso(_) => "iso",
        }
    }
}

pub fn parse_blocks(tokens: Vec<Token>) -> Result<Vec<Sp<Block>>, ParseError> {
    let mut p = Parser { tokens, i: 0 };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.block()?);
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.i).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.i + k).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        match self.tokens.get(self.i) {
            Some(t) => t.pos,
            None => self.tokens.last().map(|t| Pos { line: t.pos.line, col: t.pos.col + 1 }).unwrap_or(Pos { line: 1, col: 1 }),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = self.peek().map(|t| t.describe()).unwrap_or_else(|| "end of input".to_string());
        ParseError::syntax(self.pos(), format!("expected {wanted}, found {found}"))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, ParseError> {
        let pos = self.pos();
        if self.eat(&tok) {
            Ok(pos)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<Sp<String>, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let node = s.clone();
                self.i += 1;
                Ok(Sp { node, pos })
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    /// Identifier or number used as an element or label name.
    fn name(&mut self, wanted: &str) -> Result<Sp<String>, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) | Some(Tok::Number(s)) => {
                let node = s.clone();
                self.i += 1;
                Ok(Sp { node, pos })
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.i += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    /// `{ item, item, ... }` with an optional trailing comma.
    fn braced_list<T>(&mut self, mut item: impl FnMut(&mut Parser) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            out.push(item(self)?);
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        Ok(out)
    }

    fn block(&mut self) -> Result<Sp<Block>, ParseError> {
        let kw = self.ident("a block keyword")?;
        let node = match kw.node.as_str() {
            "lattice" => Block::Lattice(self.lattice()?),
            "syntax" => {
                let s = self.ident("`old` or `new`")?;
                match s.node.as_str() {
                    "old" => Block::Syntax(SyntaxKind::Old),
                    "new" => Block::Syntax(SyntaxKind::New),
                    other => return Err(ParseError::syntax(s.pos, format!("expected `old` or `new`, found `{other}`"))),
                }
            }
            "universe" => Block::Universe(self.braced_list(|p| p.ident("an atom name"))?),
            "program" => {
                self.expect(Tok::LBrace)?;
                let mut rules = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    rules.push(self.rule()?);
                }
                Block::Program(rules)
            }
            "init" => Block::Init(self.entries()?),
            "candidate" => Block::Candidate(self.entries()?),
            "iso" => Block::Iso(self.iso()?),
            other => {
                return Err(ParseError::syntax(
                    kw.pos,
                    format!("unknown block `{other}` (expected lattice, syntax, universe, program, init, candidate or iso)"),
                ))
            }
        };
        Ok(Sp { node, pos: kw.pos })
    }

    fn lattice(&mut self) -> Result<LatticeDecl, ParseError> {
        let kind = self.ident("a lattice kind")?;
        match kind.node.as_str() {
            "two" => Ok(LatticeDecl::Two),
            "powerset" => {
                let labels = self.braced_list(|p| p.name("a label"))?;
                let complement = if matches!(self.peek(), Some(Tok::Ident(s)) if s == "complement") {
                    self.i += 1;
                    Some(self.braced_list(|p| {
                        let from = p.elem()?;
                        p.expect(Tok::RArrow)?;
                        Ok((from, p.elem()?))
                    })?)
                } else {
                    None
                };
                Ok(LatticeDecl::Powerset { labels, complement })
            }
            "chain" => {
                if self.eat(&Tok::LBracket) {
                    let mut levels = vec![self.name("a level name")?];
                    while self.eat(&Tok::Lt) {
                        levels.push(self.name("a level name")?);
                    }
                    self.expect(Tok::RBracket)?;
                    Ok(LatticeDecl::Chain(levels))
                } else {
                    self.keyword("unit").map_err(|_| self.unexpected("`unit` or `[`"))?;
                    Ok(LatticeDecl::Unit)
                }
            }
            "custom" => {
                self.expect(Tok::LBrace)?;
                self.keyword("elements")?;
                let elements = self.braced_list(|p| p.name("an element name"))?;
                self.keyword("order")?;
                let chains = self.braced_list(|p| {
                    let mut chain = vec![p.name("an element name")?];
                    while p.eat(&Tok::Lt) {
                        chain.push(p.name("an element name")?);
                    }
                    if chain.len() < 2 {
                        return Err(p.unexpected("`<`"));
                    }
                    Ok(chain)
                })?;
                let order = chains
                    .into_iter()
                    .flat_map(|c| c.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect::<Vec<_>>())
                    .collect();
                self.keyword("complement")?;
                let complement = self.braced_list(|p| {
                    let from = p.name("an element name")?;
                    p.expect(Tok::RArrow)?;
                    Ok((from, p.name("an element name")?))
                })?;
                self.expect(Tok::RBrace)?;
                Ok(LatticeDecl::Custom { elements, order, complement })
            }
            other => Err(ParseError::syntax(
                kind.pos,
                format!("unknown lattice kind `{other}` (expected two, powerset, chain or custom)"),
            )),
        }
    }

    fn elem(&mut self) -> Result<Sp<ElemLit>, ParseError> {
        let pos = self.pos();
        let node = match self.peek() {
            Some(Tok::LBrace) => ElemLit::Set(self.braced_list(|p| p.name("a label"))?),
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                ElemLit::Name(s)
            }
            Some(Tok::Number(s)) => {
                let s = s.clone();
                self.i += 1;
                ElemLit::Number(s)
            }
            _ => return Err(self.unexpected("a lattice element")),
        };
        Ok(Sp { node, pos })
    }

    fn pair(&mut self) -> Result<Sp<PairLit>, ParseError> {
        let pos = self.expect(Tok::Lt)?;
        let a = self.elem()?;
        self.expect(Tok::Comma)?;
        let b = self.elem()?;
        self.expect(Tok::Gt)?;
        Ok(Sp { node: PairLit { pos: a, neg: b }, pos })
    }

    fn atom(&mut self) -> Result<AtomLit, ParseError> {
        let first = self.ident("an annotated atom")?;
        let polarity = match first.node.as_str() {
            "in" if self.peek() == Some(&Tok::LParen) => Some(Polarity::In),
            "out" if self.peek() == Some(&Tok::LParen) => Some(Polarity::Out),
            _ => None,
        };
        match polarity {
            Some(polarity) => {
                self.expect(Tok::LParen)?;
                let atom = self.ident("an atom name")?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Colon)?;
                let ann = self.elem()?;
                Ok(AtomLit::Old { polarity, atom, ann })
            }
            None => {
                if self.peek() != Some(&Tok::Colon) {
                    return Err(self.unexpected("`(` after in/out, or `:` before a pair annotation"));
                }
                self.i += 1;
                let ann = self.pair()?;
                Ok(AtomLit::New { atom: first, ann })
            }
        }
    }

    fn rule(&mut self) -> Result<RuleLit, ParseError> {
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.eat(&Tok::LArrow) && self.peek() != Some(&Tok::Dot) {
            body.push(self.atom()?);
            while self.eat(&Tok::Comma) {
                body.push(self.atom()?);
            }
        }
        self.expect(Tok::Dot)?;
        Ok(RuleLit { head, body })
    }

    fn entries(&mut self) -> Result<Vec<EntryLit>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let atom = self.ident("an atom name")?;
            self.expect(Tok::Eq)?;
            let value = self.pair()?.node;
            out.push(EntryLit { atom, value });
            if !self.eat(&Tok::Dot) {
                self.eat(&Tok::Semi);
            }
        }
        Ok(out)
    }

    fn iso(&mut self) -> Result<Vec<IsoEntry>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            let target = if self.eat(&Tok::Star) {
                IsoTarget::Default(pos)
            } else {
                IsoTarget::Atom(self.ident("an atom name or `*`")?)
            };
            self.expect(Tok::Colon)?;
            let mut steps = vec![self.step()?];
            while matches!(self.peek(), Some(Tok::Ident(_))) && self.peek_at(1) != Some(&Tok::Colon) {
                steps.push(self.step()?);
            }
            out.push(IsoEntry { target, steps });
            if !self.eat(&Tok::Semi) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        Ok(out)
    }

    fn step(&mut self) -> Result<Sp<StepLit>, ParseError> {
        let kw = self.ident("`id`, `swap`, `perm` or `table`")?;
        let node = match kw.node.as_str() {
            "id" => StepLit::Id,
            "swap" => StepLit::Swap,
            "perm" => {
                self.expect(Tok::LParen)?;
                let mut map = Vec::new();
                while !self.eat(&Tok::RParen) {
                    let from = self.name("a label or element name")?;
                    self.expect(Tok::RArrow)?;
                    map.push((from, self.name("a label or element name")?));
                    if !self.eat(&Tok::Comma) {
                        self.expect(Tok::RParen)?;
                        break;
                    }
                }
                StepLit::Perm(map)
            }
            "table" => {
                self.expect(Tok::LParen)?;
                let mut map = Vec::new();
                while !self.eat(&Tok::RParen) {
                    let from = self.pair()?.node;
                    self.expect(Tok::RArrow)?;
                    map.push((from, self.pair()?.node));
                    if !self.eat(&Tok::Comma) {
                        self.expect(Tok::RParen)?;
                        break;
                    }
                }
                StepLit::Table(map)
            }
            other => {
                return Err(ParseError::syntax(kw.pos, format!("unknown map `{other}` (expected id, swap, perm or table)")))
            }
        };
        Ok(Sp { node, pos: kw.pos })
    }
}
