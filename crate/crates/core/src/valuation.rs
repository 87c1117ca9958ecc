//! Total valuations of atoms into pairs, their correspondence with
//! valuations of revision atoms, satisfaction, applying a change, and the
//! difference calculus.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::lattice::{Elem, Lattice, LatticeError, Pair};
use crate::syntax::{AnnotatedAtom, AtomId, PairAtom, Polarity, Program, RevisionAtom, Rule, Rules, Universe};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("valuations are over different lattices")]
    LatticeMismatch,
    #[error("valuations are over different universes")]
    UniverseMismatch,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A mapping from every atom of a universe to a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairValuation {
    lattice: Lattice,
    universe: Universe,
    values: Vec<Pair>,
}

impl PairValuation {
    pub fn new(lattice: Lattice, universe: Universe, values: Vec<Pair>) -> Result<PairValuation, ValuationError> {
        if values.len() != universe.len() {
            return Err(ValuationError::WrongLength { expected: universe.len(), got: values.len() });
        }
        for &v in &values {
            lattice.check_pair(v)?;
        }
        Ok(PairValuation { lattice, universe, values })
    }

    pub(crate) fn raw(lattice: Lattice, universe: Universe, values: Vec<Pair>) -> PairValuation {
        PairValuation { lattice, universe, values }
    }

    pub fn constant(lattice: &Lattice, universe: &Universe, value: Pair) -> Result<PairValuation, ValuationError> {
        lattice.check_pair(value)?;
        Ok(PairValuation::raw(lattice.clone(), universe.clone(), vec![value; universe.len()]))
    }

    /// `V_⊥`.
    pub fn bottom(lattice: &Lattice, universe: &Universe) -> PairValuation {
        PairValuation::raw(lattice.clone(), universe.clone(), vec![lattice.bot_pair(); universe.len()])
    }

    /// `V_⊤`.
    pub fn top(lattice: &Lattice, universe: &Universe) -> PairValuation {
        PairValuation::raw(lattice.clone(), universe.clone(), vec![lattice.top_pair(); universe.len()])
    }

    /// Builds a valuation from explicit entries; unmentioned atoms get
    /// `⟨⊥,⊥⟩`. Later entries for the same atom win.
    pub fn from_entries<I: IntoIterator<Item = (AtomId, Pair)>>(
        lattice: &Lattice,
        universe: &Universe,
        entries: I,
    ) -> Result<PairValuation, ValuationError> {
        let mut v = PairValuation::bottom(lattice, universe);
        for (id, p) in entries {
            v.set(id, p)?;
        }
        Ok(v)
    }

    /// Two-valued encoding of a set: members `⟨⊤,⊥⟩`, others `⟨⊥,⊤⟩`.
    pub fn from_set(lattice: &Lattice, universe: &Universe, set: &BTreeSet<AtomId>) -> PairValuation {
        let values = universe
            .ids()
            .map(|id| {
                if set.contains(&id) {
                    Pair::new(lattice.top(), lattice.bot())
                } else {
                    Pair::new(lattice.bot(), lattice.top())
                }
            })
            .collect();
        PairValuation::raw(lattice.clone(), universe.clone(), values)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn values(&self) -> &[Pair] {
        &self.values
    }

    pub fn get(&self, id: AtomId) -> Pair {
        self.values[id.index()]
    }

    /// Value of `in(a)` or `out(a)`.
    pub fn lit(&self, l: RevisionAtom) -> Elem {
        let p = self.values[l.atom.index()];
        match l.polarity {
            Polarity::In => p.pos,
            Polarity::Out => p.neg,
        }
    }

    pub fn set(&mut self, id: AtomId, value: Pair) -> Result<(), ValuationError> {
        self.lattice.check_pair(value)?;
        if id.index() >= self.values.len() {
            return Err(ValuationError::WrongLength { expected: self.universe.len(), got: id.index() + 1 });
        }
        self.values[id.index()] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, Pair)> + '_ {
        self.values.iter().enumerate().map(|(i, &p)| (AtomId(i as u32), p))
    }

    pub fn compatible(&self, other: &PairValuation) -> Result<(), ValuationError> {
        if self.lattice != other.lattice {
            return Err(ValuationError::LatticeMismatch);
        }
        if self.universe != other.universe {
            return Err(ValuationError::UniverseMismatch);
        }
        Ok(())
    }

    /// Checks that this valuation can be evaluated against `p`.
    pub fn compatible_with(&self, p: &Program) -> Result<(), ValuationError> {
        if &self.lattice != p.lattice() {
            return Err(ValuationError::LatticeMismatch);
        }
        if &self.universe != p.universe() {
            return Err(ValuationError::UniverseMismatch);
        }
        Ok(())
    }

    fn zip(&self, other: &PairValuation, f: impl Fn(Pair, Pair) -> Pair) -> PairValuation {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        PairValuation::raw(self.lattice.clone(), self.universe.clone(), values)
    }

    fn map(&self, f: impl Fn(Pair) -> Pair) -> PairValuation {
        PairValuation::raw(self.lattice.clone(), self.universe.clone(), self.values.iter().map(|&a| f(a)).collect())
    }

    pub fn leq_k(&self, other: &PairValuation) -> Result<bool, ValuationError> {
        self.compatible(other)?;
        Ok(self.leq_k_u(other))
    }

    pub(crate) fn leq_k_u(&self, other: &PairValuation) -> bool {
        self.values.iter().zip(&other.values).all(|(&a, &b)| self.lattice.leq_k_u(a, b))
    }

    pub fn meet_k(&self, other: &PairValuation) -> Result<PairValuation, ValuationError> {
        self.compatible(other)?;
        Ok(self.zip(other, |a, b| self.lattice.meet_k_u(a, b)))
    }

    pub fn join_k(&self, other: &PairValuation) -> Result<PairValuation, ValuationError> {
        self.compatible(other)?;
        Ok(self.join_k_u(other))
    }

    pub(crate) fn join_k_u(&self, other: &PairValuation) -> PairValuation {
        self.zip(other, |a, b| self.lattice.join_k_u(a, b))
    }

    /// Pointwise conflation.
    pub fn conflate(&self) -> PairValuation {
        self.map(|a| self.lattice.conflate_u(a))
    }

    /// Pointwise Boolean negation; only on Boolean lattices.
    pub fn negate(&self) -> Result<PairValuation, ValuationError> {
        let values = self.values.iter().map(|&a| self.lattice.negate(a)).collect::<Result<Vec<_>, _>>()?;
        Ok(PairValuation::raw(self.lattice.clone(), self.universe.clone(), values))
    }

    /// Every atom gets a consistent pair.
    pub fn is_consistent(&self) -> bool {
        self.values.iter().all(|&a| self.lattice.is_consistent_u(a))
    }

    /// `(B ⊗ −C) ⊕ C`.
    pub fn apply_change(&self, change: &PairValuation) -> Result<PairValuation, ValuationError> {
        self.compatible(change)?;
        Ok(self.apply_change_u(change))
    }

    pub(crate) fn apply_change_u(&self, change: &PairValuation) -> PairValuation {
        self.zip(change, |b, c| self.lattice.revise_u(b, c))
    }

    /// `θ⁻¹`.
    pub fn theta_inv(&self) -> TValuation {
        let values = self.values.iter().flat_map(|p| [p.pos, p.neg]).collect();
        TValuation { lattice: self.lattice.clone(), universe: self.universe.clone(), values }
    }

    /// Whether `x` holds in this valuation.
    pub fn satisfies<S: Satisfiable + ?Sized>(&self, x: &S) -> Result<bool, ValuationError> {
        x.check_compatible(self)?;
        Ok(x.holds(self))
    }

    /// Canonical one-line rendering: `a = <X, Y>; b = <X, Y>`, atoms in
    /// lexicographic order.
    pub fn canonical(&self) -> String {
        self.iter()
            .map(|(id, p)| format!("{} = {}", self.universe.name(id), self.lattice.format_pair(p)))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for PairValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// A mapping from every revision atom to a lattice element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TValuation {
    lattice: Lattice,
    universe: Universe,
    values: Vec<Elem>,
}

impl TValuation {
    pub fn new<F: Fn(RevisionAtom) -> Elem>(lattice: &Lattice, universe: &Universe, f: F) -> Result<TValuation, ValuationError> {
        let mut values = Vec::with_capacity(universe.len() * 2);
        for id in universe.ids() {
            for l in [RevisionAtom::pos(id), RevisionAtom::neg(id)] {
                let e = f(l);
                if !lattice.contains(e) {
                    return Err(ValuationError::Lattice(LatticeError::Mismatch));
                }
                values.push(e);
            }
        }
        Ok(TValuation { lattice: lattice.clone(), universe: universe.clone(), values })
    }

    pub fn bottom(lattice: &Lattice, universe: &Universe) -> TValuation {
        TValuation { lattice: lattice.clone(), universe: universe.clone(), values: vec![lattice.bot(); universe.len() * 2] }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn get(&self, l: RevisionAtom) -> Elem {
        self.values[slot(l)]
    }

    pub(crate) fn join_into(&mut self, l: RevisionAtom, e: Elem) {
        let s = slot(l);
        self.values[s] = self.lattice.join_u(self.values[s], e);
    }

    /// `θ`.
    pub fn theta(&self) -> PairValuation {
        let values = self.values.chunks(2).map(|c| Pair::new(c[0], c[1])).collect();
        PairValuation::raw(self.lattice.clone(), self.universe.clone(), values)
    }

    /// `v ⊨ (l:α)` iff `v(l) ≥ α`.
    pub fn satisfies_atom(&self, a: &AnnotatedAtom) -> bool {
        self.lattice.leq_u(a.ann, self.get(a.lit))
    }
}

pub(crate) fn slot(l: RevisionAtom) -> usize {
    l.atom.index() * 2
        + match l.polarity {
            Polarity::In => 0,
            Polarity::Out => 1,
        }
}

/// Things a [`PairValuation`] can satisfy.
pub trait Satisfiable {
    fn check_compatible(&self, v: &PairValuation) -> Result<(), ValuationError>;
    fn holds(&self, v: &PairValuation) -> bool;
}

fn check_atom_id(id: AtomId, v: &PairValuation) -> Result<(), ValuationError> {
    if id.index() < v.universe.len() {
        Ok(())
    } else {
        Err(ValuationError::UniverseMismatch)
    }
}

impl Satisfiable for AnnotatedAtom {
    fn check_compatible(&self, v: &PairValuation) -> Result<(), ValuationError> {
        check_atom_id(self.lit.atom, v)?;
        if !v.lattice.contains(self.ann) {
            return Err(ValuationError::LatticeMismatch);
        }
        Ok(())
    }

    fn holds(&self, v: &PairValuation) -> bool {
        v.lattice.leq_u(self.ann, v.lit(self.lit))
    }
}

impl Satisfiable for PairAtom {
    fn check_compatible(&self, v: &PairValuation) -> Result<(), ValuationError> {
        check_atom_id(self.atom, v)?;
        v.lattice.check_pair(self.ann).map_err(|_| ValuationError::LatticeMismatch)
    }

    fn holds(&self, v: &PairValuation) -> bool {
        v.lattice.leq_k_u(self.ann, v.get(self.atom))
    }
}

impl<A: Satisfiable> Satisfiable for [A] {
    fn check_compatible(&self, v: &PairValuation) -> Result<(), ValuationError> {
        self.iter().try_for_each(|a| a.check_compatible(v))
    }

    fn holds(&self, v: &PairValuation) -> bool {
        self.iter().all(|a| a.holds(v))
    }
}

impl<A: Satisfiable> Satisfiable for Rule<A> {
    fn check_compatible(&self, v: &PairValuation) -> Result<(), ValuationError> {
        self.head.check_compatible(v)?;
        self.body.check_compatible(v)
    }

    fn holds(&self, v: &PairValuation) -> bool {
        !self.body.holds(v) || self.head.holds(v)
    }
}

impl Satisfiable for Program {
    fn check_compatible(&self, v: &PairValuation) -> Result<(), ValuationError> {
        v.compatible_with(self)
    }

    fn holds(&self, v: &PairValuation) -> bool {
        match self.rules() {
            Rules::Old(rs) => rs.iter().all(|r| r.holds(v)),
            Rules::New(rs) => rs.iter().all(|r| r.holds(v)),
        }
    }
}

/// Candidate change values for one atom: every pair on a finite lattice;
/// on the unit chain, pairs over the complement closure of the given
/// constants together with `0` and `1`.
fn change_candidates(lat: &Lattice, seeds: &[Elem]) -> Result<Vec<Pair>, ValuationError> {
    if let Some(all) = lat.pairs() {
        return Ok(all);
    }
    let closure = lat.unit_closure(seeds.iter().copied())?;
    Ok(closure.iter().flat_map(|&p| closure.iter().map(move |&n| Pair::new(p, n))).collect())
}

/// Per-atom solutions `{C(a) : (B(a) ⊗ −C(a)) ⊕ C(a) = R(a)}`.
pub fn change_solutions(target: Pair, base: Pair, lat: &Lattice) -> Result<Vec<Pair>, ValuationError> {
    lat.check_pair(target)?;
    lat.check_pair(base)?;
    let seeds = [target.pos, target.neg, base.pos, base.neg];
    Ok(change_candidates(lat, &seeds)?
        .into_iter()
        .filter(|&c| lat.revise_u(base, c) == target)
        .collect())
}

/// Whether some change transforms `base` into `target`.
pub fn transformable(base: &PairValuation, target: &PairValuation) -> Result<bool, ValuationError> {
    base.compatible(target)?;
    for id in base.universe.ids() {
        if change_solutions(target.get(id), base.get(id), &base.lattice)?.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `diff(R, B)`: the meet of all changes transforming `B` into `R`, or
/// `V_⊤` when there are none.
pub fn diff(target: &PairValuation, base: &PairValuation) -> Result<PairValuation, ValuationError> {
    target.compatible(base)?;
    let lat = &base.lattice;
    let mut values = Vec::with_capacity(base.values.len());
    for id in base.universe.ids() {
        let sols = change_solutions(target.get(id), base.get(id), lat)?;
        if sols.is_empty() {
            return Ok(PairValuation::top(lat, &base.universe));
        }
        values.push(sols.into_iter().fold(lat.top_pair(), |acc, c| lat.meet_k_u(acc, c)));
    }
    Ok(PairValuation::raw(lat.clone(), base.universe.clone(), values))
}
