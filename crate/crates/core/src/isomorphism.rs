//! Order isomorphisms of the pair lattice, extended atom by atom to
//! valuations and new-syntax programs.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::lattice::{Lattice, Pair};
use crate::syntax::{AtomId, PairAtom, Program, Rule, SyntaxError, Universe};
use crate::valuation::{PairValuation, ValuationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoError {
    #[error("map is not a bijection on pairs")]
    NotBijective,
    #[error("map does not preserve the knowledge order: {x} ≤ {y} but not their images")]
    NotMonotone { x: String, y: String },
    #[error("map does not reflect the knowledge order: images of {x} and {y} are ordered but they are not")]
    NotReflecting { x: String, y: String },
    #[error("permutation is not a bijection: {0}")]
    BadPermutation(String),
    #[error("unknown label or element `{0}`")]
    Unknown(String),
    #[error("{0} is only available on finite lattices")]
    InfiniteLattice(&'static str),
    #[error("isomorphisms apply to new-syntax programs; translate with tr1 first")]
    OldSyntax,
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// A primitive map from which per-atom isomorphisms are composed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Identity,
    /// `⟨α,β⟩ ↦ ⟨β,α⟩`.
    Swap,
    /// Renaming of powerset labels, or of elements of a named finite
    /// lattice, lifted to both components. Unlisted names are fixed.
    Perm(Vec<(String, String)>),
    /// Explicit images of pairs; unlisted pairs are fixed.
    Table(Vec<(Pair, Pair)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Compiled {
    Identity,
    Swap,
    /// Image of the pair at each canonical pair index.
    Table(Vec<u32>),
}

/// A validated order isomorphism of the pair lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairMap {
    steps: Vec<Step>,
    compiled: Compiled,
}

impl PairMap {
    pub fn identity() -> PairMap {
        PairMap { steps: vec![Step::Identity], compiled: Compiled::Identity }
    }

    pub fn swap() -> PairMap {
        PairMap { steps: vec![Step::Swap], compiled: Compiled::Swap }
    }

    /// Composes `steps` left to right (the first step is applied first) and
    /// checks the result exhaustively on finite lattices.
    pub fn compile(lat: &Lattice, steps: Vec<Step>) -> Result<PairMap, IsoError> {
        let structural = steps.iter().all(|s| matches!(s, Step::Identity | Step::Swap));
        if structural {
            let swaps = steps.iter().filter(|s| matches!(s, Step::Swap)).count();
            let compiled = if swaps % 2 == 1 { Compiled::Swap } else { Compiled::Identity };
            return Ok(PairMap { steps, compiled });
        }
        let pairs = lat.pairs().ok_or(IsoError::InfiniteLattice("perm and table maps"))?;
        let mut image: Vec<u32> = (0..pairs.len() as u32).collect();
        for s in &steps {
            let f = step_table(lat, &pairs, s)?;
            for v in image.iter_mut() {
                *v = f[*v as usize];
            }
        }
        validate_table(lat, &pairs, &image)?;
        Ok(PairMap { steps, compiled: Compiled::Table(image) })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_identity(&self) -> bool {
        match &self.compiled {
            Compiled::Identity => true,
            Compiled::Swap => false,
            Compiled::Table(t) => t.iter().enumerate().all(|(i, &j)| i as u32 == j),
        }
    }

    pub fn apply(&self, lat: &Lattice, x: Pair) -> Pair {
        match &self.compiled {
            Compiled::Identity => x,
            Compiled::Swap => x.swapped(),
            Compiled::Table(t) => {
                let n = lat.size().expect("finite lattice");
                let i = pair_index(lat, x, n);
                let j = t[i] as usize;
                Pair::new(lat.from_index(j / n), lat.from_index(j % n))
            }
        }
    }

    /// `ψ(−δ) = −ψ(δ)` for every pair.
    pub fn preserves_conflation(&self, lat: &Lattice) -> bool {
        match &self.compiled {
            Compiled::Identity | Compiled::Swap => true,
            Compiled::Table(_) => lat
                .pairs()
                .expect("finite lattice")
                .into_iter()
                .all(|d| self.apply(lat, lat.conflate_u(d)) == lat.conflate_u(self.apply(lat, d))),
        }
    }
}

fn pair_index(lat: &Lattice, x: Pair, n: usize) -> usize {
    lat.index_of(x.pos).expect("member") * n + lat.index_of(x.neg).expect("member")
}

fn step_table(lat: &Lattice, pairs: &[Pair], s: &Step) -> Result<Vec<u32>, IsoError> {
    let n = lat.size().expect("finite lattice");
    match s {
        Step::Identity => Ok((0..pairs.len() as u32).collect()),
        Step::Swap => Ok(pairs.iter().map(|p| pair_index(lat, p.swapped(), n) as u32).collect()),
        Step::Perm(map) => {
            let elem = element_permutation(lat, map)?;
            Ok(pairs
                .iter()
                .map(|p| {
                    let i = elem[lat.index_of(p.pos).expect("member")];
                    let j = elem[lat.index_of(p.neg).expect("member")];
                    (i * n + j) as u32
                })
                .collect())
        }
        Step::Table(entries) => {
            let mut t: Vec<u32> = (0..pairs.len() as u32).collect();
            let mut seen = BTreeSet::new();
            for &(from, to) in entries {
                lat.check_pair(from).map_err(|_| IsoError::NotBijective)?;
                lat.check_pair(to).map_err(|_| IsoError::NotBijective)?;
                let i = pair_index(lat, from, n);
                if !seen.insert(i) {
                    return Err(IsoError::NotBijective);
                }
                t[i] = pair_index(lat, to, n) as u32;
            }
            Ok(t)
        }
    }
}

/// Element permutation induced by a renaming.
fn element_permutation(lat: &Lattice, map: &[(String, String)]) -> Result<Vec<usize>, IsoError> {
    let names: Vec<String> = match lat.labels() {
        Some(labels) => labels.to_vec(),
        None => lat.names().ok_or(IsoError::InfiniteLattice("perm maps"))?.to_vec(),
    };
    let pos = |s: &str| names.iter().position(|n| n == s).ok_or_else(|| IsoError::Unknown(s.to_string()));
    let mut perm: Vec<usize> = (0..names.len()).collect();
    let mut sources = BTreeSet::new();
    for (from, to) in map {
        let (f, t) = (pos(from)?, pos(to)?);
        if !sources.insert(f) {
            return Err(IsoError::BadPermutation(format!("`{from}` is mapped twice")));
        }
        perm[f] = t;
    }
    let targets: BTreeSet<usize> = perm.iter().copied().collect();
    if targets.len() != perm.len() {
        return Err(IsoError::BadPermutation("two names share an image".to_string()));
    }
    if lat.labels().is_some() {
        let size = lat.size().expect("finite");
        Ok((0..size)
            .map(|mask| {
                (0..names.len()).filter(|b| mask & (1 << b) != 0).fold(0usize, |acc, b| acc | (1 << perm[b]))
            })
            .collect())
    } else {
        Ok(perm)
    }
}

fn validate_table(lat: &Lattice, pairs: &[Pair], image: &[u32]) -> Result<(), IsoError> {
    let distinct: BTreeSet<u32> = image.iter().copied().collect();
    if distinct.len() != pairs.len() {
        return Err(IsoError::NotBijective);
    }
    for (i, &x) in pairs.iter().enumerate() {
        for (j, &y) in pairs.iter().enumerate() {
            let before = lat.leq_k_u(x, y);
            let after = lat.leq_k_u(pairs[image[i] as usize], pairs[image[j] as usize]);
            if before && !after {
                return Err(IsoError::NotMonotone { x: lat.format_pair(x), y: lat.format_pair(y) });
            }
            if after && !before {
                return Err(IsoError::NotReflecting { x: lat.format_pair(x), y: lat.format_pair(y) });
            }
        }
    }
    Ok(())
}

/// Per-atom isomorphisms with a default for unlisted atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIso {
    lattice: Lattice,
    universe: Universe,
    entries: BTreeMap<AtomId, PairMap>,
    default: PairMap,
}

impl PairIso {
    pub fn new(lattice: Lattice, universe: Universe, entries: BTreeMap<AtomId, PairMap>, default: PairMap) -> PairIso {
        PairIso { lattice, universe, entries, default }
    }

    pub fn uniform(lattice: &Lattice, universe: &Universe, map: PairMap) -> PairIso {
        PairIso::new(lattice.clone(), universe.clone(), BTreeMap::new(), map)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn entries(&self) -> &BTreeMap<AtomId, PairMap> {
        &self.entries
    }

    pub fn default_map(&self) -> &PairMap {
        &self.default
    }

    pub fn map_for(&self, id: AtomId) -> &PairMap {
        self.entries.get(&id).unwrap_or(&self.default)
    }

    pub fn apply_pair(&self, id: AtomId, x: Pair) -> Pair {
        self.map_for(id).apply(&self.lattice, x)
    }

    /// Conflation is preserved on every atom of the universe.
    pub fn preserves_conflation(&self) -> bool {
        self.universe.ids().all(|id| self.map_for(id).preserves_conflation(&self.lattice))
    }

    fn check(&self, lat: &Lattice, uni: &Universe) -> Result<(), IsoError> {
        if lat != &self.lattice {
            return Err(ValuationError::LatticeMismatch.into());
        }
        if uni != &self.universe {
            return Err(ValuationError::UniverseMismatch.into());
        }
        Ok(())
    }

    /// `(ψ(B))(a) = ψ(B(a))`.
    pub fn apply_valuation(&self, b: &PairValuation) -> Result<PairValuation, IsoError> {
        self.check(b.lattice(), b.universe())?;
        let values = b.iter().map(|(id, p)| self.apply_pair(id, p)).collect();
        Ok(PairValuation::new(self.lattice.clone(), self.universe.clone(), values)?)
    }

    /// Maps every annotation of a new-syntax program.
    pub fn apply_program(&self, p: &Program) -> Result<Program, IsoError> {
        self.check(p.lattice(), p.universe())?;
        let rules = p.new_rules().ok_or(IsoError::OldSyntax)?;
        let map = |a: &PairAtom| PairAtom::new(a.atom, self.apply_pair(a.atom, a.ann));
        let rules = rules.iter().map(|r| Rule::new(map(&r.head), r.body.iter().map(map).collect())).collect();
        Ok(Program::new_syntax(self.lattice.clone(), self.universe.clone(), rules)?)
    }
}

pub fn preserves_conflation(iso: &PairIso) -> bool {
    iso.preserves_conflation()
}

/// Two-valued isomorphism swapping exactly the atoms on which the encodings
/// of `b1` and `b2` differ, so that it maps the first onto the second.
pub fn build_shift_iso(universe: &Universe, b1: &BTreeSet<AtomId>, b2: &BTreeSet<AtomId>) -> PairIso {
    let entries = universe
        .ids()
        .filter(|id| b1.contains(id) != b2.contains(id))
        .map(|id| (id, PairMap::swap()))
        .collect();
    PairIso::new(Lattice::two(), universe.clone(), entries, PairMap::identity())
}
