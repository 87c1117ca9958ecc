//! Shared test support: a brute-force model of the semantics over small
//! lattices (elements as plain integers), random instance generators, and
//! converters into the library types.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use arp_core::lattice::{Elem, Lattice, Pair};
use arp_core::syntax::{AnnotatedAtom, AtomId, PairAtom, Program, RevisionAtom, Rule, Universe};
use arp_core::textio::{self, Document};
use arp_core::valuation::PairValuation;
use rand::Rng;

pub const LABELS: [&str; 4] = ["p", "q", "r", "s"];
pub const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> Document {
    let path = fixture_path(name);
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    textio::parse(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn all_fixtures() -> Vec<String> {
    let dir = fixture_path("");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .expect("fixtures directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".arp"))
        .collect();
    names.sort();
    names
}

/// A small lattice with elements `0..size()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OLat {
    /// Subsets of the first `n` labels as bitmasks, set complement.
    Pow(u32),
    /// Levels `0 < 1 < ... < k-1`, complement `k-1-i`.
    Chain(u32),
}

impl OLat {
    pub fn size(self) -> u32 {
        match self {
            OLat::Pow(n) => 1 << n,
            OLat::Chain(k) => k,
        }
    }

    pub fn bot(self) -> u32 {
        0
    }

    pub fn top(self) -> u32 {
        self.size() - 1
    }

    pub fn leq(self, x: u32, y: u32) -> bool {
        match self {
            OLat::Pow(_) => x & !y == 0,
            OLat::Chain(_) => x <= y,
        }
    }

    pub fn meet(self, x: u32, y: u32) -> u32 {
        match self {
            OLat::Pow(_) => x & y,
            OLat::Chain(_) => x.min(y),
        }
    }

    pub fn join(self, x: u32, y: u32) -> u32 {
        match self {
            OLat::Pow(_) => x | y,
            OLat::Chain(_) => x.max(y),
        }
    }

    pub fn comp(self, x: u32) -> u32 {
        match self {
            OLat::Pow(_) => self.top() & !x,
            OLat::Chain(k) => k - 1 - x,
        }
    }

    /// Meet of every `g` with `a ∨ g ≥ b`, by scanning.
    pub fn pcomp(self, a: u32, b: u32) -> u32 {
        (0..self.size()).filter(|&g| self.leq(b, self.join(a, g))).fold(self.top(), |acc, g| self.meet(acc, g))
    }

    pub fn build(self) -> Lattice {
        match self {
            OLat::Pow(n) => Lattice::powerset(&LABELS[..n as usize]).unwrap(),
            OLat::Chain(k) => {
                let names: Vec<String> = (0..k).map(|i| format!("e{i}")).collect();
                Lattice::chain(&names).unwrap()
            }
        }
    }

    pub fn elem(self, lat: &Lattice, x: u32) -> Elem {
        match self {
            OLat::Pow(n) => {
                let members: Vec<&str> = (0..n).filter(|i| x >> i & 1 == 1).map(|i| LABELS[i as usize]).collect();
                lat.set(&members).unwrap()
            }
            OLat::Chain(_) => lat.named(&format!("e{x}")).unwrap(),
        }
    }

    pub fn elem_map(self, lat: &Lattice) -> BTreeMap<Elem, u32> {
        (0..self.size()).map(|x| (self.elem(lat, x), x)).collect()
    }

    pub fn leq_k(self, x: OPair, y: OPair) -> bool {
        self.leq(x.0, y.0) && self.leq(x.1, y.1)
    }

    pub fn meet_k(self, x: OPair, y: OPair) -> OPair {
        (self.meet(x.0, y.0), self.meet(x.1, y.1))
    }

    pub fn join_k(self, x: OPair, y: OPair) -> OPair {
        (self.join(x.0, y.0), self.join(x.1, y.1))
    }

    pub fn conflate(self, x: OPair) -> OPair {
        (self.comp(x.1), self.comp(x.0))
    }

    pub fn consistent(self, x: OPair) -> bool {
        self.leq_k(x, self.conflate(x))
    }

    pub fn revise(self, b: OPair, c: OPair) -> OPair {
        self.join_k(self.meet_k(b, self.conflate(c)), c)
    }

    pub fn pairs(self) -> Vec<OPair> {
        let n = self.size();
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect()
    }
}

pub type OPair = (u32, u32);
pub type OVal = Vec<OPair>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct OLit {
    pub pos: bool,
    pub atom: usize,
    pub ann: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ONew {
    pub atom: usize,
    pub ann: OPair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ORules {
    Old(Vec<(OLit, Vec<OLit>)>),
    New(Vec<(ONew, Vec<ONew>)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OProg {
    pub lat: OLat,
    pub atoms: usize,
    pub rules: ORules,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sem {
    Mpt,
    Fitting,
}

fn comp_of(v: &OVal, l: &OLit) -> u32 {
    if l.pos {
        v[l.atom].0
    } else {
        v[l.atom].1
    }
}

impl OProg {
    pub fn bottom(&self) -> OVal {
        vec![(0, 0); self.atoms]
    }

    pub fn len(&self) -> usize {
        match &self.rules {
            ORules::Old(r) => r.len(),
            ORules::New(r) => r.len(),
        }
    }

    fn sat_old(&self, v: &OVal, l: &OLit) -> bool {
        self.lat.leq(l.ann, comp_of(v, l))
    }

    fn sat_new(&self, v: &OVal, a: &ONew) -> bool {
        self.lat.leq_k(a.ann, v[a.atom])
    }

    /// Joins of heads of the rules whose bodies `v` satisfies.
    pub fn t(&self, v: &OVal) -> OVal {
        let lat = self.lat;
        let mut out = self.bottom();
        match &self.rules {
            ORules::Old(rs) => {
                for (h, body) in rs {
                    if body.iter().all(|l| self.sat_old(v, l)) {
                        let slot = &mut out[h.atom];
                        if h.pos {
                            slot.0 = lat.join(slot.0, h.ann);
                        } else {
                            slot.1 = lat.join(slot.1, h.ann);
                        }
                    }
                }
            }
            ORules::New(rs) => {
                for (h, body) in rs {
                    if body.iter().all(|a| self.sat_new(v, a)) {
                        out[h.atom] = lat.join_k(out[h.atom], h.ann);
                    }
                }
            }
        }
        out
    }

    /// Least fixpoint by saturation from the bottom valuation.
    pub fn lfp(&self) -> OVal {
        let mut v = self.bottom();
        loop {
            let next = self.t(&v);
            if next == v {
                return v;
            }
            v = next;
        }
    }

    pub fn is_model(&self, b: &OVal) -> bool {
        leq_kv(self.lat, &self.t(b), b)
    }

    pub fn is_smodel(&self, b: &OVal) -> bool {
        let t = self.t(b);
        let bound: OVal = t.iter().map(|&x| self.lat.join_k(x, self.lat.conflate(x))).collect();
        leq_kv(self.lat, &t, b) && leq_kv(self.lat, b, &bound)
    }

    pub fn reduct(&self, bi: &OVal, br: &OVal, sem: Sem) -> OProg {
        let lat = self.lat;
        let rules = match &self.rules {
            ORules::Old(rs) => ORules::Old(
                rs.iter()
                    .filter(|(_, body)| body.iter().all(|l| self.sat_old(br, l)))
                    .map(|(h, body)| {
                        let body = match sem {
                            Sem::Mpt => {
                                body.iter().map(|l| OLit { ann: lat.pcomp(comp_of(bi, l), l.ann), ..*l }).collect()
                            }
                            Sem::Fitting => body.iter().filter(|l| !self.sat_old(bi, l)).copied().collect(),
                        };
                        (*h, body)
                    })
                    .collect(),
            ),
            ORules::New(rs) => ORules::New(
                rs.iter()
                    .filter(|(_, body)| body.iter().all(|a| self.sat_new(br, a)))
                    .map(|(h, body)| {
                        let body = match sem {
                            Sem::Mpt => body
                                .iter()
                                .map(|a| {
                                    let held = bi[a.atom];
                                    ONew { atom: a.atom, ann: (lat.pcomp(held.0, a.ann.0), lat.pcomp(held.1, a.ann.1)) }
                                })
                                .collect(),
                            // Fitting on pair atoms through the in/out split.
                            Sem::Fitting => self.fitting_new_body(bi, body),
                        };
                        (*h, body)
                    })
                    .collect(),
            ),
        };
        OProg { lat, atoms: self.atoms, rules }
    }

    fn fitting_new_body(&self, bi: &OVal, body: &[ONew]) -> Vec<ONew> {
        let lat = self.lat;
        let mut out = Vec::new();
        for a in body {
            let held = bi[a.atom];
            let pos = if lat.leq(a.ann.0, held.0) { 0 } else { a.ann.0 };
            let neg = if lat.leq(a.ann.1, held.1) { 0 } else { a.ann.1 };
            if (pos, neg) != (0, 0) {
                out.push(ONew { atom: a.atom, ann: (pos, neg) });
            }
        }
        out
    }

    pub fn necessary_change_of_reduct(&self, bi: &OVal, br: &OVal, sem: Sem) -> OVal {
        self.reduct(bi, br, sem).lfp()
    }

    pub fn justified(&self, bi: &OVal, br: &OVal, sem: Sem) -> bool {
        let c = self.necessary_change_of_reduct(bi, br, sem);
        revise_v(self.lat, bi, &c) == *br
    }

    pub fn all_valuations(&self) -> Vec<OVal> {
        all_valuations(self.lat, self.atoms)
    }

    pub fn revisions(&self, bi: &OVal, sem: Sem) -> BTreeSet<OVal> {
        self.all_valuations().into_iter().filter(|br| self.justified(bi, br, sem)).collect()
    }

    pub fn union(&self, other: &OProg) -> OProg {
        let rules = match (&self.rules, &other.rules) {
            (ORules::Old(a), ORules::Old(b)) => ORules::Old(a.iter().chain(b).cloned().collect()),
            (ORules::New(a), ORules::New(b)) => ORules::New(a.iter().chain(b).cloned().collect()),
            _ => panic!("mixed syntax union"),
        };
        OProg { lat: self.lat, atoms: self.atoms, rules }
    }
}

pub fn all_valuations(lat: OLat, atoms: usize) -> Vec<OVal> {
    let pairs = lat.pairs();
    let mut out = vec![Vec::new()];
    for _ in 0..atoms {
        out = out.into_iter().flat_map(|v: OVal| pairs.iter().map(move |&p| [v.clone(), vec![p]].concat())).collect();
    }
    out
}

pub fn leq_kv(lat: OLat, x: &OVal, y: &OVal) -> bool {
    x.iter().zip(y).all(|(&a, &b)| lat.leq_k(a, b))
}

pub fn meet_kv(lat: OLat, x: &OVal, y: &OVal) -> OVal {
    x.iter().zip(y).map(|(&a, &b)| lat.meet_k(a, b)).collect()
}

pub fn join_kv(lat: OLat, x: &OVal, y: &OVal) -> OVal {
    x.iter().zip(y).map(|(&a, &b)| lat.join_k(a, b)).collect()
}

pub fn revise_v(lat: OLat, b: &OVal, c: &OVal) -> OVal {
    b.iter().zip(c).map(|(&x, &y)| lat.revise(x, y)).collect()
}

pub fn consistent_v(lat: OLat, v: &OVal) -> bool {
    v.iter().all(|&x| lat.consistent(x))
}

/// Meet of all `C` with `(B ⊗ −C) ⊕ C = R`, or the top valuation if none.
pub fn diff_oracle(lat: OLat, r: &OVal, b: &OVal) -> OVal {
    let mut out = Vec::new();
    for (&rx, &bx) in r.iter().zip(b) {
        let sols: Vec<OPair> = lat.pairs().into_iter().filter(|&c| lat.revise(bx, c) == rx).collect();
        if sols.is_empty() {
            return vec![(lat.top(), lat.top()); r.len()];
        }
        out.push(sols.into_iter().fold((lat.top(), lat.top()), |acc, c| lat.meet_k(acc, c)));
    }
    out
}

pub struct Ctx {
    pub olat: OLat,
    pub lat: Lattice,
    pub universe: Universe,
    pub back: BTreeMap<Elem, u32>,
}

impl Ctx {
    pub fn new(olat: OLat, atoms: usize) -> Ctx {
        let lat = olat.build();
        let universe = Universe::new(&ATOMS[..atoms]).unwrap();
        let back = olat.elem_map(&lat);
        Ctx { olat, lat, universe, back }
    }

    pub fn e(&self, x: u32) -> Elem {
        self.olat.elem(&self.lat, x)
    }

    pub fn p(&self, x: OPair) -> Pair {
        Pair::new(self.e(x.0), self.e(x.1))
    }

    pub fn unp(&self, p: Pair) -> OPair {
        (self.back[&p.pos], self.back[&p.neg])
    }

    pub fn val(&self, v: &OVal) -> PairValuation {
        PairValuation::new(self.lat.clone(), self.universe.clone(), v.iter().map(|&x| self.p(x)).collect()).unwrap()
    }

    pub fn unval(&self, v: &PairValuation) -> OVal {
        v.values().iter().map(|&p| self.unp(p)).collect()
    }

    fn lit(&self, l: &OLit) -> AnnotatedAtom {
        let id = AtomId(l.atom as u32);
        let lit = if l.pos { RevisionAtom::pos(id) } else { RevisionAtom::neg(id) };
        AnnotatedAtom::new(lit, self.e(l.ann))
    }

    fn new_atom(&self, a: &ONew) -> PairAtom {
        PairAtom::new(AtomId(a.atom as u32), self.p(a.ann))
    }

    pub fn program(&self, p: &OProg) -> Program {
        match &p.rules {
            ORules::Old(rs) => Program::old(
                self.lat.clone(),
                self.universe.clone(),
                rs.iter().map(|(h, b)| Rule::new(self.lit(h), b.iter().map(|l| self.lit(l)).collect())).collect(),
            )
            .unwrap(),
            ORules::New(rs) => Program::new_syntax(
                self.lat.clone(),
                self.universe.clone(),
                rs.iter()
                    .map(|(h, b)| Rule::new(self.new_atom(h), b.iter().map(|a| self.new_atom(a)).collect()))
                    .collect(),
            )
            .unwrap(),
        }
    }

    pub fn unvals<'a, I: IntoIterator<Item = &'a PairValuation>>(&self, vs: I) -> BTreeSet<OVal> {
        vs.into_iter().map(|v| self.unval(v)).collect()
    }
}

/// Random annotation, biased away from `⊥` so bodies are not trivially true.
pub fn gen_elem<R: Rng>(rng: &mut R, lat: OLat) -> u32 {
    if rng.gen_bool(0.15) {
        0
    } else {
        rng.gen_range(1..lat.size())
    }
}

pub fn gen_pair<R: Rng>(rng: &mut R, lat: OLat) -> OPair {
    (rng.gen_range(0..lat.size()), rng.gen_range(0..lat.size()))
}

pub fn gen_val<R: Rng>(rng: &mut R, lat: OLat, atoms: usize) -> OVal {
    (0..atoms).map(|_| gen_pair(rng, lat)).collect()
}

pub fn gen_consistent_val<R: Rng>(rng: &mut R, lat: OLat, atoms: usize) -> OVal {
    let cons: Vec<OPair> = lat.pairs().into_iter().filter(|&x| lat.consistent(x)).collect();
    (0..atoms).map(|_| cons[rng.gen_range(0..cons.len())]).collect()
}

pub fn gen_lit<R: Rng>(rng: &mut R, lat: OLat, atoms: usize) -> OLit {
    OLit { pos: rng.gen_bool(0.5), atom: rng.gen_range(0..atoms), ann: gen_elem(rng, lat) }
}

/// Old-syntax program with `1..=max_rules` rules and bodies of length `0..=2`.
pub fn gen_old<R: Rng>(rng: &mut R, lat: OLat, atoms: usize, max_rules: usize) -> OProg {
    let n = rng.gen_range(1..=max_rules);
    let rules = (0..n)
        .map(|_| {
            let head = gen_lit(rng, lat, atoms);
            let len = rng.gen_range(0..=2);
            (head, (0..len).map(|_| gen_lit(rng, lat, atoms)).collect())
        })
        .collect();
    OProg { lat, atoms, rules: ORules::Old(rules) }
}

pub fn gen_new<R: Rng>(rng: &mut R, lat: OLat, atoms: usize, max_rules: usize) -> OProg {
    let n = rng.gen_range(1..=max_rules);
    let atom = |rng: &mut R| ONew { atom: rng.gen_range(0..atoms), ann: gen_pair(rng, lat) };
    let rules = (0..n)
        .map(|_| {
            let head = atom(rng);
            let len = rng.gen_range(0..=2);
            (head, (0..len).map(|_| atom(rng)).collect())
        })
        .collect();
    OProg { lat, atoms, rules: ORules::New(rules) }
}

/// Raises `b` until it is a model: `b := b ⊕ T(b)` to a fixpoint.
pub fn lift_to_model(p: &OProg, b: &OVal) -> OVal {
    let mut v = b.clone();
    loop {
        let next = join_kv(p.lat, &v, &p.t(&v));
        if next == v {
            return v;
        }
        v = next;
    }
}
