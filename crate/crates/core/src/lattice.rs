//! Complete distributive lattices carrying a De Morgan complement, and the
//! product lattice of evidence pairs ordered by knowledge.
//!
//! A [`Lattice`] is an immutable, cheaply clonable handle. Elements
//! ([`Elem`]) are small `Copy` values stamped with a fingerprint of the
//! lattice they came from; mixing elements of different lattices is an
//! error on every checked operation.
//!
//! Four shapes are supported:
//!
//! * `two`: the Boolean values `f < t`;
//! * powersets of a finite label set, with set complement or an explicit
//!   complement table;
//! * chains, either a finite list of named levels or the rational unit
//!   interval `[0,1]` with `1 - x` as complement;
//! * custom finite lattices given by an order relation and a complement
//!   table.
//!
//! Finite non-powerset lattices are compiled into meet/join tables at
//! construction time.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::Ratio;
use thiserror::Error;

/// Exact rational used by the unit-interval chain.
pub type Rational = Ratio<i64>;

/// Upper bound on powerset labels; keeps element indices in a `u32` and
/// enumeration spaces sane.
pub const MAX_POWERSET_LABELS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("operands belong to different lattices")]
    Mismatch,
    #[error("lattice has no elements")]
    Empty,
    #[error("duplicate element or label `{0}`")]
    Duplicate(String),
    #[error("unknown element or label `{0}`")]
    Unknown(String),
    #[error("powerset over {0} labels is too large (limit {MAX_POWERSET_LABELS})")]
    TooLarge(usize),
    #[error("order relation is not antisymmetric: {0} and {1} are mutually below each other")]
    NotAntisymmetric(String, String),
    #[error("order is not a lattice: {0} and {1} have no meet")]
    MissingMeet(String, String),
    #[error("order is not a lattice: {0} and {1} have no join")]
    MissingJoin(String, String),
    #[error("complement table gives no image for {0}")]
    IncompleteComplement(String),
    #[error("complement table assigns two images to {0}")]
    ConflictingComplement(String),
    #[error("rational {0} lies outside [0,1]")]
    OutOfRange(String),
    #[error("{0} is not supported on this lattice")]
    Unsupported(&'static str),
    #[error("invalid lattice: {0}")]
    Invalid(AxiomViolation),
}

/// First axiom violation found by [`Lattice::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomViolation {
    #[error("{x} ∧ {y} is not the greatest lower bound")]
    BadMeet { x: String, y: String },
    #[error("{x} ∨ {y} is not the least upper bound")]
    BadJoin { x: String, y: String },
    #[error("distributivity fails for ({x}, {y}, {z})")]
    NotDistributive { x: String, y: String, z: String },
    #[error("complement is not an involution: {x} ↦ {image} ↦ {back}")]
    NotInvolution { x: String, image: String, back: String },
    #[error("complement is not order-reversing on {x} ≤ {y}")]
    NotOrderReversing { x: String, y: String },
    #[error("De Morgan law fails for the join of {x} and {y}")]
    DeMorganJoin { x: String, y: String },
    #[error("De Morgan law fails for the meet of {x} and {y}")]
    DeMorganMeet { x: String, y: String },
}

/// Outcome of [`Lattice::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub kind: String,
    pub size: Option<usize>,
    pub violation: Option<AxiomViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let size = match self.size {
            Some(n) => format!("{n} elements"),
            None => "infinite".to_string(),
        };
        match &self.violation {
            None => write!(
                f,
                "lattice {} ({size}): partial order, meets/joins, distributivity, \
                 involution, order reversal, De Morgan laws hold",
                self.kind
            ),
            Some(v) => write!(f, "lattice {} ({size}): {v}", self.kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Index(u32),
    Rational(Rational),
}

/// An element of some [`Lattice`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    lattice: u64,
    repr: Repr,
}

/// An element of the product lattice: evidence for `in` and for `out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub pos: Elem,
    pub neg: Elem,
}

impl Pair {
    pub fn new(pos: Elem, neg: Elem) -> Pair {
        Pair { pos, neg }
    }

    /// Exchanges the two components.
    pub fn swapped(self) -> Pair {
        Pair { pos: self.neg, neg: self.pos }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Shape {
    Two,
    Chain,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Table {
    shape: Shape,
    names: Vec<String>,
    leq: Vec<bool>,
    meet: Vec<u32>,
    join: Vec<u32>,
    complement: Vec<u32>,
    bot: u32,
    top: u32,
}

impl Table {
    fn n(&self) -> usize {
        self.names.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Kind {
    Powerset {
        labels: Vec<String>,
        complement: Option<Vec<u32>>,
    },
    Table(Table),
    UnitChain,
}

#[derive(Debug)]
struct Inner {
    fingerprint: u64,
    kind: Kind,
    boolean: bool,
    linear: bool,
}

/// Handle to an immutable lattice.
#[derive(Debug, Clone)]
pub struct Lattice(Arc<Inner>);

impl PartialEq for Lattice {
    fn eq(&self, other: &Lattice) -> bool {
        self.0.fingerprint == other.0.fingerprint && self.0.kind == other.0.kind
    }
}

impl Eq for Lattice {}

impl Lattice {
    fn from_kind(kind: Kind) -> Lattice {
        let mut h = DefaultHasher::new();
        kind.hash(&mut h);
        let fingerprint = h.finish();
        let mut inner = Inner { fingerprint, kind, boolean: false, linear: false };
        inner.linear = inner.compute_linear();
        inner.boolean = inner.compute_boolean();
        Lattice(Arc::new(inner))
    }

    /// The two-element Boolean lattice `f < t`.
    pub fn two() -> Lattice {
        let table = chain_table(Shape::Two, vec!["f".into(), "t".into()]);
        Lattice::from_kind(Kind::Table(table))
    }

    /// Subsets of `labels` ordered by inclusion, with set complement.
    /// Labels are sorted; that order fixes the canonical element order.
    pub fn powerset<S: AsRef<str>>(labels: &[S]) -> Result<Lattice, LatticeError> {
        let mut sorted: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(LatticeError::Duplicate(w[0].clone()));
            }
        }
        if sorted.len() > MAX_POWERSET_LABELS {
            return Err(LatticeError::TooLarge(sorted.len()));
        }
        Ok(Lattice::from_kind(Kind::Powerset { labels: sorted, complement: None }))
    }

    /// The rational unit interval with complement `1 - x`.
    pub fn unit_chain() -> Lattice {
        Lattice::from_kind(Kind::UnitChain)
    }

    /// A finite chain of named levels, lowest first. The complement maps
    /// the i-th level to the i-th from the top.
    pub fn chain<S: AsRef<str>>(levels: &[S]) -> Result<Lattice, LatticeError> {
        let names: Vec<String> = levels.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(LatticeError::Empty);
        }
        check_unique(&names)?;
        Ok(Lattice::from_kind(Kind::Table(chain_table(Shape::Chain, names))))
    }

    /// A custom finite lattice. `order` lists pairs `x ≤ y`; its reflexive
    /// transitive closure must be a lattice order. `complement` must give an
    /// image for every element. The De Morgan axioms are not checked here;
    /// see [`Lattice::validate`].
    pub fn custom<S: AsRef<str>>(
        elements: &[S],
        order: &[(S, S)],
        complement: &[(S, S)],
    ) -> Result<Lattice, LatticeError> {
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(LatticeError::Empty);
        }
        check_unique(&names)?;
        let index: HashMap<&str, usize> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let lookup = |s: &str| {
            index.get(s).copied().ok_or_else(|| LatticeError::Unknown(s.to_string()))
        };
        let n = names.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (x, y) in order {
            let (x, y) = (lookup(x.as_ref())?, lookup(y.as_ref())?);
            leq[x * n + y] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i * n + j] && leq[j * n + i] {
                    return Err(LatticeError::NotAntisymmetric(names[i].clone(), names[j].clone()));
                }
            }
        }
        let mut meet = vec![0u32; n * n];
        let mut join = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let glb = (0..n)
                    .filter(|&k| leq[k * n + i] && leq[k * n + j])
                    .find(|&k| (0..n).all(|m| !(leq[m * n + i] && leq[m * n + j]) || leq[m * n + k]))
                    .ok_or_else(|| LatticeError::MissingMeet(names[i].clone(), names[j].clone()))?;
                let lub = (0..n)
                    .filter(|&k| leq[i * n + k] && leq[j * n + k])
                    .find(|&k| (0..n).all(|m| !(leq[i * n + m] && leq[j * n + m]) || leq[k * n + m]))
                    .ok_or_else(|| LatticeError::MissingJoin(names[i].clone(), names[j].clone()))?;
                meet[i * n + j] = glb as u32;
                join[i * n + j] = lub as u32;
            }
        }
        let bot = (0..n).find(|&b| (0..n).all(|j| leq[b * n + j])).expect("finite lattice has a bottom");
        let top = (0..n).find(|&t| (0..n).all(|j| leq[j * n + t])).expect("finite lattice has a top");
        let mut comp: Vec<Option<u32>> = vec![None; n];
        for (x, y) in complement {
            let (x, y) = (lookup(x.as_ref())?, lookup(y.as_ref())?);
            if comp[x].is_some_and(|c| c != y as u32) {
                return Err(LatticeError::ConflictingComplement(names[x].clone()));
            }
            comp[x] = Some(y as u32);
        }
        let complement = comp
            .iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| LatticeError::IncompleteComplement(names[i].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Lattice::from_kind(Kind::Table(Table {
            shape: Shape::Custom,
            names,
            leq,
            meet,
            join,
            complement,
            bot: bot as u32,
            top: top as u32,
        })))
    }

    /// Replaces the set complement of a powerset lattice with an explicit
    /// table. Each pair `x ↦ y` also fixes `y ↦ x` unless the table says
    /// otherwise; every subset must end up with an image. The returned
    /// lattice is distinct from `self`.
    pub fn with_complement(&self, pairs: &[(Elem, Elem)]) -> Result<Lattice, LatticeError> {
        let Kind::Powerset { labels, .. } = &self.0.kind else {
            return Err(LatticeError::Unsupported("a complement override"));
        };
        let n = 1usize << labels.len();
        let mut table: Vec<Option<u32>> = vec![None; n];
        for &(x, y) in pairs {
            let (xi, yi) = (self.index_checked(x)?, self.index_checked(y)?);
            if table[xi].is_some_and(|c| c != yi as u32) {
                return Err(LatticeError::ConflictingComplement(self.format(x)));
            }
            table[xi] = Some(yi as u32);
        }
        for &(x, y) in pairs {
            let (xi, yi) = (self.index_checked(x)?, self.index_checked(y)?);
            if table[yi].is_none() {
                table[yi] = Some(xi as u32);
            }
        }
        let complement = table
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| LatticeError::IncompleteComplement(self.format(self.from_index(i))))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Lattice::from_kind(Kind::Powerset {
            labels: labels.clone(),
            complement: Some(complement),
        }))
    }

    /// Short description of the lattice shape.
    pub fn kind_name(&self) -> String {
        match &self.0.kind {
            Kind::Powerset { labels, complement } => format!(
                "powerset {{{}}}{}",
                labels.join(", "),
                if complement.is_some() { " with custom complement" } else { "" }
            ),
            Kind::Table(t) => match t.shape {
                Shape::Two => "two".to_string(),
                Shape::Chain => format!("chain [{}]", t.names.join(" < ")),
                Shape::Custom => format!("custom ({} elements)", t.n()),
            },
            Kind::UnitChain => "chain unit".to_string(),
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self.0.kind, Kind::UnitChain)
    }

    /// Number of elements, `None` for the unit interval.
    pub fn size(&self) -> Option<usize> {
        match &self.0.kind {
            Kind::Powerset { labels, .. } => Some(1usize << labels.len()),
            Kind::Table(t) => Some(t.n()),
            Kind::UnitChain => None,
        }
    }

    /// All elements in canonical order, `None` for the unit interval.
    pub fn elements(&self) -> Option<Vec<Elem>> {
        self.size().map(|n| (0..n).map(|i| self.from_index(i)).collect())
    }

    /// Every pair of elements, in canonical order.
    pub fn pairs(&self) -> Option<Vec<Pair>> {
        let elems = self.elements()?;
        Some(
            elems
                .iter()
                .flat_map(|&p| elems.iter().map(move |&n| Pair::new(p, n)))
                .collect(),
        )
    }

    /// True when every two elements are comparable.
    pub fn is_linear(&self) -> bool {
        self.0.linear
    }

    /// True when the complement is a Boolean complement
    /// (`x ∧ x̄ = ⊥`, `x ∨ x̄ = ⊤`).
    pub fn is_boolean(&self) -> bool {
        self.0.boolean
    }

    /// Labels of a powerset lattice.
    pub fn labels(&self) -> Option<&[String]> {
        match &self.0.kind {
            Kind::Powerset { labels, .. } => Some(labels),
            _ => None,
        }
    }

    pub fn is_unit_chain(&self) -> bool {
        matches!(self.0.kind, Kind::UnitChain)
    }

    /// A finite chain of named levels.
    pub fn is_level_chain(&self) -> bool {
        matches!(&self.0.kind, Kind::Table(t) if t.shape == Shape::Chain)
    }

    pub fn is_two(&self) -> bool {
        matches!(&self.0.kind, Kind::Table(t) if t.shape == Shape::Two)
    }

    /// Level names of a finite chain, custom element names, or `f`/`t`.
    pub fn names(&self) -> Option<&[String]> {
        match &self.0.kind {
            Kind::Table(t) => Some(&t.names),
            _ => None,
        }
    }

    /// Explicit complement table of a powerset lattice, as element pairs.
    pub fn complement_override(&self) -> Option<Vec<(Elem, Elem)>> {
        match &self.0.kind {
            Kind::Powerset { complement: Some(c), .. } => Some(
                c.iter()
                    .enumerate()
                    .map(|(i, &j)| (self.from_index(i), self.from_index(j as usize)))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Order pairs covering a custom lattice (`x < y` with nothing in between).
    pub fn covers(&self) -> Vec<(Elem, Elem)> {
        let Kind::Table(t) = &self.0.kind else { return Vec::new() };
        let n = t.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j
                    && t.leq[i * n + j]
                    && !(0..n).any(|k| k != i && k != j && t.leq[i * n + k] && t.leq[k * n + j])
                {
                    out.push((self.from_index(i), self.from_index(j)));
                }
            }
        }
        out
    }

    /// Element at canonical position `i` of a finite lattice.
    ///
    /// Panics if the lattice is infinite or `i` is out of range.
    pub fn from_index(&self, i: usize) -> Elem {
        let n = self.size().expect("from_index on an infinite lattice");
        assert!(i < n, "element index {i} out of range");
        self.make(Repr::Index(i as u32))
    }

    /// Canonical position of `e` in a finite lattice.
    pub fn index_of(&self, e: Elem) -> Option<usize> {
        if !self.contains(e) {
            return None;
        }
        match e.repr {
            Repr::Index(i) => Some(i as usize),
            Repr::Rational(_) => None,
        }
    }

    fn index_checked(&self, e: Elem) -> Result<usize, LatticeError> {
        self.check(e)?;
        self.index_of(e).ok_or(LatticeError::Unsupported("indexing"))
    }

    fn make(&self, repr: Repr) -> Elem {
        Elem { lattice: self.0.fingerprint, repr }
    }

    /// Whether `e` is an element of this lattice.
    pub fn contains(&self, e: Elem) -> bool {
        if e.lattice != self.0.fingerprint {
            return false;
        }
        match (e.repr, &self.0.kind) {
            (Repr::Index(i), Kind::Powerset { labels, .. }) => (i as usize) < (1usize << labels.len()),
            (Repr::Index(i), Kind::Table(t)) => (i as usize) < t.n(),
            (Repr::Rational(r), Kind::UnitChain) => in_unit(r),
            _ => false,
        }
    }

    fn check(&self, e: Elem) -> Result<(), LatticeError> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(LatticeError::Mismatch)
        }
    }

    pub fn check_pair(&self, p: Pair) -> Result<(), LatticeError> {
        self.check(p.pos)?;
        self.check(p.neg)
    }

    /// Element named `name` in a two-valued, level-chain or custom lattice.
    pub fn named(&self, name: &str) -> Result<Elem, LatticeError> {
        match &self.0.kind {
            Kind::Table(t) => t
                .names
                .iter()
                .position(|n| n == name)
                .map(|i| self.make(Repr::Index(i as u32)))
                .ok_or_else(|| LatticeError::Unknown(name.to_string())),
            _ => Err(LatticeError::Unsupported("named elements")),
        }
    }

    /// Subset of a powerset lattice.
    pub fn set<S: AsRef<str>>(&self, members: &[S]) -> Result<Elem, LatticeError> {
        let Kind::Powerset { labels, .. } = &self.0.kind else {
            return Err(LatticeError::Unsupported("set literals"));
        };
        let mut mask = 0u32;
        for m in members {
            let m = m.as_ref();
            let bit = labels
                .iter()
                .position(|l| l == m)
                .ok_or_else(|| LatticeError::Unknown(m.to_string()))?;
            mask |= 1 << bit;
        }
        Ok(self.make(Repr::Index(mask)))
    }

    /// Element `numer/denom` of the unit interval.
    pub fn rational(&self, numer: i64, denom: i64) -> Result<Elem, LatticeError> {
        if !self.is_unit_chain() {
            return Err(LatticeError::Unsupported("rational literals"));
        }
        if denom == 0 {
            return Err(LatticeError::OutOfRange(format!("{numer}/0")));
        }
        self.from_rational(Rational::new(numer, denom))
    }

    /// Embeds an exact rational into the unit interval.
    pub fn from_rational(&self, r: Rational) -> Result<Elem, LatticeError> {
        if !self.is_unit_chain() {
            return Err(LatticeError::Unsupported("rational literals"));
        }
        if !in_unit(r) {
            return Err(LatticeError::OutOfRange(r.to_string()));
        }
        Ok(self.make(Repr::Rational(r)))
    }

    /// The rational value of a unit-interval element.
    pub fn as_rational(&self, e: Elem) -> Option<Rational> {
        match e.repr {
            Repr::Rational(r) if self.contains(e) => Some(r),
            _ => None,
        }
    }

    /// Canonical text for an element: `{a,b}` for sets, level or element
    /// names, and `n/d` (or `0`, `1`) for the unit interval.
    pub fn format(&self, e: Elem) -> String {
        match (&self.0.kind, e.repr) {
            (Kind::Powerset { labels, .. }, Repr::Index(m)) => {
                let members: Vec<&str> = labels
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m & (1 << i) != 0)
                    .map(|(_, l)| l.as_str())
                    .collect();
                format!("{{{}}}", members.join(","))
            }
            (Kind::Table(t), Repr::Index(i)) => t.names[i as usize].clone(),
            (Kind::UnitChain, Repr::Rational(r)) => r.to_string(),
            _ => format!("<foreign {:?}>", e.repr),
        }
    }

    pub fn format_pair(&self, p: Pair) -> String {
        format!("<{}, {}>", self.format(p.pos), self.format(p.neg))
    }

    // ---- checked operations ----

    pub fn bot(&self) -> Elem {
        match &self.0.kind {
            Kind::Powerset { .. } => self.make(Repr::Index(0)),
            Kind::Table(t) => self.make(Repr::Index(t.bot)),
            Kind::UnitChain => self.make(Repr::Rational(Rational::from_integer(0))),
        }
    }

    pub fn top(&self) -> Elem {
        match &self.0.kind {
            Kind::Powerset { labels, .. } => self.make(Repr::Index((1u32 << labels.len()) - 1)),
            Kind::Table(t) => self.make(Repr::Index(t.top)),
            Kind::UnitChain => self.make(Repr::Rational(Rational::from_integer(1))),
        }
    }

    pub fn leq(&self, x: Elem, y: Elem) -> Result<bool, LatticeError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.leq_u(x, y))
    }

    pub fn meet(&self, x: Elem, y: Elem) -> Result<Elem, LatticeError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.meet_u(x, y))
    }

    pub fn join(&self, x: Elem, y: Elem) -> Result<Elem, LatticeError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.join_u(x, y))
    }

    pub fn complement(&self, x: Elem) -> Result<Elem, LatticeError> {
        self.check(x)?;
        Ok(self.complement_u(x))
    }

    /// Join of a finite set; `⊥` for the empty set.
    pub fn big_join<I: IntoIterator<Item = Elem>>(&self, xs: I) -> Result<Elem, LatticeError> {
        let mut acc = self.bot();
        for x in xs {
            self.check(x)?;
            acc = self.join_u(acc, x);
        }
        Ok(acc)
    }

    /// Least `γ` with `α ∨ γ ≥ β`.
    pub fn pcomp(&self, alpha: Elem, beta: Elem) -> Result<Elem, LatticeError> {
        self.check(alpha)?;
        self.check(beta)?;
        Ok(self.pcomp_u(alpha, beta))
    }

    // ---- pairs ----

    pub fn pair(&self, pos: Elem, neg: Elem) -> Result<Pair, LatticeError> {
        self.check(pos)?;
        self.check(neg)?;
        Ok(Pair { pos, neg })
    }

    pub fn bot_pair(&self) -> Pair {
        Pair { pos: self.bot(), neg: self.bot() }
    }

    pub fn top_pair(&self) -> Pair {
        Pair { pos: self.top(), neg: self.top() }
    }

    /// `x ≤_k y`.
    pub fn leq_k(&self, x: Pair, y: Pair) -> Result<bool, LatticeError> {
        self.check_pair(x)?;
        self.check_pair(y)?;
        Ok(self.leq_k_u(x, y))
    }

    /// `x ⊗ y`.
    pub fn meet_k(&self, x: Pair, y: Pair) -> Result<Pair, LatticeError> {
        self.check_pair(x)?;
        self.check_pair(y)?;
        Ok(self.meet_k_u(x, y))
    }

    /// `x ⊕ y`.
    pub fn join_k(&self, x: Pair, y: Pair) -> Result<Pair, LatticeError> {
        self.check_pair(x)?;
        self.check_pair(y)?;
        Ok(self.join_k_u(x, y))
    }

    /// Componentwise `pcomp`.
    pub fn pcomp_pair(&self, x: Pair, y: Pair) -> Result<Pair, LatticeError> {
        self.check_pair(x)?;
        self.check_pair(y)?;
        Ok(self.pcomp_pair_u(x, y))
    }

    /// Conflation `−⟨α,β⟩ = ⟨β̄,ᾱ⟩`.
    pub fn conflate(&self, x: Pair) -> Result<Pair, LatticeError> {
        self.check_pair(x)?;
        Ok(self.conflate_u(x))
    }

    /// `x ≤_k −x`.
    pub fn is_consistent(&self, x: Pair) -> Result<bool, LatticeError> {
        self.check_pair(x)?;
        Ok(self.is_consistent_u(x))
    }

    /// Boolean negation `¬⟨α,β⟩ = ⟨ᾱ,β̄⟩`; only on Boolean lattices.
    pub fn negate(&self, x: Pair) -> Result<Pair, LatticeError> {
        self.check_pair(x)?;
        if !self.is_boolean() {
            return Err(LatticeError::Unsupported("Boolean negation"));
        }
        Ok(Pair { pos: self.complement_u(x.pos), neg: self.complement_u(x.neg) })
    }

    // ---- unchecked fast paths; callers guarantee membership ----

    pub(crate) fn leq_u(&self, x: Elem, y: Elem) -> bool {
        match (&self.0.kind, x.repr, y.repr) {
            (Kind::Powerset { .. }, Repr::Index(a), Repr::Index(b)) => a & !b == 0,
            (Kind::Table(t), Repr::Index(a), Repr::Index(b)) => t.leq[a as usize * t.n() + b as usize],
            (Kind::UnitChain, Repr::Rational(a), Repr::Rational(b)) => a <= b,
            _ => unreachable!("foreign element"),
        }
    }

    pub(crate) fn meet_u(&self, x: Elem, y: Elem) -> Elem {
        let r = match (&self.0.kind, x.repr, y.repr) {
            (Kind::Powerset { .. }, Repr::Index(a), Repr::Index(b)) => Repr::Index(a & b),
            (Kind::Table(t), Repr::Index(a), Repr::Index(b)) => {
                Repr::Index(t.meet[a as usize * t.n() + b as usize])
            }
            (Kind::UnitChain, Repr::Rational(a), Repr::Rational(b)) => Repr::Rational(a.min(b)),
            _ => unreachable!("foreign element"),
        };
        self.make(r)
    }

    pub(crate) fn join_u(&self, x: Elem, y: Elem) -> Elem {
        let r = match (&self.0.kind, x.repr, y.repr) {
            (Kind::Powerset { .. }, Repr::Index(a), Repr::Index(b)) => Repr::Index(a | b),
            (Kind::Table(t), Repr::Index(a), Repr::Index(b)) => {
                Repr::Index(t.join[a as usize * t.n() + b as usize])
            }
            (Kind::UnitChain, Repr::Rational(a), Repr::Rational(b)) => Repr::Rational(a.max(b)),
            _ => unreachable!("foreign element"),
        };
        self.make(r)
    }

    pub(crate) fn complement_u(&self, x: Elem) -> Elem {
        let r = match (&self.0.kind, x.repr) {
            (Kind::Powerset { labels, complement: None }, Repr::Index(a)) => {
                Repr::Index(!a & ((1u32 << labels.len()) - 1))
            }
            (Kind::Powerset { complement: Some(c), .. }, Repr::Index(a)) => Repr::Index(c[a as usize]),
            (Kind::Table(t), Repr::Index(a)) => Repr::Index(t.complement[a as usize]),
            (Kind::UnitChain, Repr::Rational(a)) => Repr::Rational(Rational::from_integer(1) - a),
            _ => unreachable!("foreign element"),
        };
        self.make(r)
    }

    pub(crate) fn pcomp_u(&self, alpha: Elem, beta: Elem) -> Elem {
        match (&self.0.kind, alpha.repr, beta.repr) {
            (Kind::Powerset { .. }, Repr::Index(a), Repr::Index(b)) => self.make(Repr::Index(b & !a)),
            (Kind::Table(t), _, _) if t.shape != Shape::Custom => {
                if self.leq_u(beta, alpha) {
                    self.bot()
                } else {
                    beta
                }
            }
            (Kind::Table(t), _, _) => (0..t.n())
                .map(|g| self.make(Repr::Index(g as u32)))
                .filter(|&g| self.leq_u(beta, self.join_u(alpha, g)))
                .fold(self.top(), |acc, g| self.meet_u(acc, g)),
            (Kind::UnitChain, Repr::Rational(a), Repr::Rational(b)) => {
                if b <= a {
                    self.bot()
                } else {
                    beta
                }
            }
            _ => unreachable!("foreign element"),
        }
    }

    pub(crate) fn leq_k_u(&self, x: Pair, y: Pair) -> bool {
        self.leq_u(x.pos, y.pos) && self.leq_u(x.neg, y.neg)
    }

    pub(crate) fn meet_k_u(&self, x: Pair, y: Pair) -> Pair {
        Pair { pos: self.meet_u(x.pos, y.pos), neg: self.meet_u(x.neg, y.neg) }
    }

    pub(crate) fn join_k_u(&self, x: Pair, y: Pair) -> Pair {
        Pair { pos: self.join_u(x.pos, y.pos), neg: self.join_u(x.neg, y.neg) }
    }

    pub(crate) fn pcomp_pair_u(&self, x: Pair, y: Pair) -> Pair {
        Pair { pos: self.pcomp_u(x.pos, y.pos), neg: self.pcomp_u(x.neg, y.neg) }
    }

    pub(crate) fn conflate_u(&self, x: Pair) -> Pair {
        Pair { pos: self.complement_u(x.neg), neg: self.complement_u(x.pos) }
    }

    pub(crate) fn is_consistent_u(&self, x: Pair) -> bool {
        self.leq_k_u(x, self.conflate_u(x))
    }

    /// `(b ⊗ −c) ⊕ c`.
    pub(crate) fn revise_u(&self, b: Pair, c: Pair) -> Pair {
        self.join_k_u(self.meet_k_u(b, self.conflate_u(c)), c)
    }

    /// Closure of `seeds ∪ {0, 1}` under complement; on a chain this is
    /// also closed under meet and join.
    pub fn unit_closure<I: IntoIterator<Item = Elem>>(&self, seeds: I) -> Result<Vec<Elem>, LatticeError> {
        if !self.is_unit_chain() {
            return Err(LatticeError::Unsupported("constant closure"));
        }
        let mut set = BTreeSet::new();
        set.insert(self.bot());
        set.insert(self.top());
        for s in seeds {
            self.check(s)?;
            set.insert(s);
            set.insert(self.complement_u(s));
        }
        Ok(set.into_iter().collect())
    }

    /// Exhaustively checks the lattice and De Morgan axioms on finite
    /// lattices. The unit interval satisfies them by construction.
    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            kind: self.kind_name(),
            size: self.size(),
            violation: self.first_violation(),
        }
    }

    /// Like [`Lattice::validate`] but as a `Result`.
    pub fn validated(self) -> Result<Lattice, LatticeError> {
        match self.first_violation() {
            None => Ok(self),
            Some(v) => Err(LatticeError::Invalid(v)),
        }
    }

    fn first_violation(&self) -> Option<AxiomViolation> {
        let elems = self.elements()?;
        let f = |e: Elem| self.format(e);
        for &x in &elems {
            for &y in &elems {
                let m = self.meet_u(x, y);
                let glb_ok = self.leq_u(m, x)
                    && self.leq_u(m, y)
                    && elems.iter().all(|&z| !(self.leq_u(z, x) && self.leq_u(z, y)) || self.leq_u(z, m));
                if !glb_ok {
                    return Some(AxiomViolation::BadMeet { x: f(x), y: f(y) });
                }
                let j = self.join_u(x, y);
                let lub_ok = self.leq_u(x, j)
                    && self.leq_u(y, j)
                    && elems.iter().all(|&z| !(self.leq_u(x, z) && self.leq_u(y, z)) || self.leq_u(j, z));
                if !lub_ok {
                    return Some(AxiomViolation::BadJoin { x: f(x), y: f(y) });
                }
            }
        }
        for &x in &elems {
            for &y in &elems {
                for &z in &elems {
                    let lhs = self.meet_u(x, self.join_u(y, z));
                    let rhs = self.join_u(self.meet_u(x, y), self.meet_u(x, z));
                    if lhs != rhs {
                        return Some(AxiomViolation::NotDistributive { x: f(x), y: f(y), z: f(z) });
                    }
                }
            }
        }
        for &x in &elems {
            let image = self.complement_u(x);
            let back = self.complement_u(image);
            if back != x {
                return Some(AxiomViolation::NotInvolution { x: f(x), image: f(image), back: f(back) });
            }
        }
        for &x in &elems {
            for &y in &elems {
                if self.leq_u(x, y) && !self.leq_u(self.complement_u(y), self.complement_u(x)) {
                    return Some(AxiomViolation::NotOrderReversing { x: f(x), y: f(y) });
                }
            }
        }
        for &x in &elems {
            for &y in &elems {
                let (cx, cy) = (self.complement_u(x), self.complement_u(y));
                if self.complement_u(self.join_u(x, y)) != self.meet_u(cx, cy) {
                    return Some(AxiomViolation::DeMorganJoin { x: f(x), y: f(y) });
                }
                if self.complement_u(self.meet_u(x, y)) != self.join_u(cx, cy) {
                    return Some(AxiomViolation::DeMorganMeet { x: f(x), y: f(y) });
                }
            }
        }
        None
    }
}

impl Inner {
    fn compute_linear(&self) -> bool {
        match &self.kind {
            Kind::Powerset { labels, .. } => labels.len() <= 1,
            Kind::Table(t) => {
                let n = t.n();
                (0..n).all(|i| (0..n).all(|j| t.leq[i * n + j] || t.leq[j * n + i]))
            }
            Kind::UnitChain => true,
        }
    }

    fn compute_boolean(&self) -> bool {
        match &self.kind {
            Kind::Powerset { complement: None, .. } => true,
            Kind::Powerset { labels, complement: Some(c) } => {
                let full = (1u32 << labels.len()) - 1;
                c.iter().enumerate().all(|(i, &j)| (i as u32) & j == 0 && ((i as u32) | j) == full)
            }
            Kind::Table(t) => {
                let n = t.n();
                (0..n).all(|i| {
                    let c = t.complement[i] as usize;
                    t.meet[i * n + c] == t.bot && t.join[i * n + c] == t.top
                })
            }
            Kind::UnitChain => false,
        }
    }
}

fn in_unit(r: Rational) -> bool {
    r >= Rational::from_integer(0) && r <= Rational::from_integer(1)
}

fn check_unique(names: &[String]) -> Result<(), LatticeError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(LatticeError::Duplicate(n.clone()));
        }
    }
    Ok(())
}

fn chain_table(shape: Shape, names: Vec<String>) -> Table {
    let n = names.len();
    let mut leq = vec![false; n * n];
    let mut meet = vec![0u32; n * n];
    let mut join = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            leq[i * n + j] = i <= j;
            meet[i * n + j] = i.min(j) as u32;
            join[i * n + j] = i.max(j) as u32;
        }
    }
    let complement = (0..n).map(|i| (n - 1 - i) as u32).collect();
    Table { shape, names, leq, meet, join, complement, bot: 0, top: (n - 1) as u32 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tpq() -> Lattice {
        Lattice::powerset(&["p", "q"]).unwrap()
    }

    fn experts() -> Lattice {
        Lattice::powerset(&["Ann", "Bob", "Pete"]).unwrap()
    }

    /// The {p,q,r} powerset with the twisted complement used by the
    /// conflation counterexample.
    fn twisted_pqr() -> Lattice {
        let base = Lattice::powerset(&["p", "q", "r"]).unwrap();
        let s = |m: &[&str]| base.set(m).unwrap();
        base.with_complement(&[
            (s(&[]), s(&["p", "q", "r"])),
            (s(&["p"]), s(&["p", "r"])),
            (s(&["q"]), s(&["q", "r"])),
            (s(&["r"]), s(&["p", "q"])),
        ])
        .unwrap()
    }

    fn diamond(complement: &[(&str, &str)]) -> Result<Lattice, LatticeError> {
        Lattice::custom(
            &["bot", "a", "b", "top"],
            &[("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")],
            complement,
        )
    }

    #[test]
    fn two_is_valid_boolean_chain() {
        let two = Lattice::two();
        assert!(two.validate().is_valid());
        assert!(two.is_boolean());
        assert!(two.is_linear());
        let (f, t) = (two.named("f").unwrap(), two.named("t").unwrap());
        assert_eq!(two.complement(f).unwrap(), t);
        assert_eq!(two.complement(t).unwrap(), f);
    }

    #[test]
    fn twisted_powerset_complement_is_valid() {
        let l = twisted_pqr();
        assert!(l.validate().is_valid(), "{}", l.validate());
        assert!(!l.is_boolean());
        let q = l.set(&["q"]).unwrap();
        assert_eq!(l.format(l.complement(q).unwrap()), "{q,r}");
    }

    #[test]
    fn diamond_with_self_complementary_atoms_passes_brute_force_scan() {
        // bot <-> top, a -> a, b -> b is an order-reversing involution and
        // the exhaustive scan finds no De Morgan violation.
        let l = diamond(&[("bot", "top"), ("top", "bot"), ("a", "a"), ("b", "b")]).unwrap();
        assert!(l.validate().is_valid());
        assert!(!l.is_boolean());
    }

    #[test]
    fn diamond_with_non_involutive_complement_is_rejected() {
        let l = diamond(&[("bot", "top"), ("top", "bot"), ("a", "a"), ("b", "a")]).unwrap();
        let report = l.validate();
        assert!(matches!(report.violation, Some(AxiomViolation::NotInvolution { .. })), "{report}");
    }

    #[test]
    fn identity_complement_is_not_order_reversing() {
        let l = Lattice::custom(
            &["lo", "mid", "hi"],
            &[("lo", "mid"), ("mid", "hi")],
            &[("lo", "lo"), ("mid", "mid"), ("hi", "hi")],
        )
        .unwrap();
        assert!(matches!(l.validate().violation, Some(AxiomViolation::NotOrderReversing { .. })));
    }

    #[test]
    fn pentagon_fails_distributivity() {
        let l = Lattice::custom(
            &["0", "a", "b", "c", "1"],
            &[("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")],
            &[("0", "1"), ("1", "0"), ("a", "c"), ("c", "a"), ("b", "c")],
        );
        assert!(l.is_ok());
        let report = l.unwrap().validate();
        assert!(matches!(report.violation, Some(AxiomViolation::NotDistributive { .. })));
    }

    #[test]
    fn missing_join_is_a_construction_error() {
        let err = Lattice::custom(&["a", "b"], &[], &[("a", "b"), ("b", "a")]).unwrap_err();
        assert!(matches!(err, LatticeError::MissingMeet(..) | LatticeError::MissingJoin(..)));
    }

    #[test]
    fn cyclic_order_is_rejected() {
        let err = Lattice::custom(&["a", "b"], &[("a", "b"), ("b", "a")], &[("a", "b"), ("b", "a")])
            .unwrap_err();
        assert!(matches!(err, LatticeError::NotAntisymmetric(..)));
    }

    #[test]
    fn incomplete_complement_override_is_rejected() {
        let base = tpq();
        let err = base
            .with_complement(&[(base.set(&["p"]).unwrap(), base.set(&["q"]).unwrap())])
            .unwrap_err();
        assert!(matches!(err, LatticeError::IncompleteComplement(_)));
    }

    #[test]
    fn set_join_and_chain_meet() {
        let l = experts();
        let ann = l.set(&["Ann"]).unwrap();
        let bob = l.set(&["Bob"]).unwrap();
        assert_eq!(l.format(l.join(ann, bob).unwrap()), "{Ann,Bob}");
        let u = Lattice::unit_chain();
        let a = u.rational(3, 10).unwrap();
        let b = u.rational(7, 10).unwrap();
        assert_eq!(u.meet(a, b).unwrap(), a);
        assert_eq!(u.big_join([]).unwrap(), u.bot());
        assert_eq!(l.big_join([]).unwrap(), l.bot());
    }

    #[test]
    fn complements() {
        let u = Lattice::unit_chain();
        assert_eq!(u.complement(u.rational(3, 10).unwrap()).unwrap(), u.rational(7, 10).unwrap());
        let l = experts();
        let c = l.complement(l.set(&["Ann", "Bob"]).unwrap()).unwrap();
        assert_eq!(l.format(c), "{Pete}");
    }

    #[test]
    fn pcomp_on_chain_uses_closed_form() {
        let u = Lattice::unit_chain();
        let r = |n| u.rational(n, 10).unwrap();
        assert_eq!(u.pcomp(r(9), r(8)).unwrap(), u.bot());
        assert_eq!(u.pcomp(r(3), r(8)).unwrap(), r(8));
    }

    #[test]
    fn pcomp_on_powerset_matches_brute_force() {
        let l = tpq();
        let elems = l.elements().unwrap();
        for &a in &elems {
            for &b in &elems {
                let sat: Vec<Elem> = elems
                    .iter()
                    .copied()
                    .filter(|&g| l.leq(b, l.join(a, g).unwrap()).unwrap())
                    .collect();
                let least = sat.iter().fold(l.top(), |acc, &g| l.meet(acc, g).unwrap());
                assert_eq!(l.pcomp(a, b).unwrap(), least);
            }
        }
        let p = l.set(&["p"]).unwrap();
        let pq = l.set(&["p", "q"]).unwrap();
        assert_eq!(l.format(l.pcomp(p, pq).unwrap()), "{q}");
    }

    #[test]
    fn pair_operations() {
        let l = experts();
        let s = |m: &[&str]| l.set(m).unwrap();
        let x = Pair::new(s(&["Pete"]), s(&["Bob"]));
        let y = Pair::new(s(&["Ann", "Bob", "Pete"]), s(&["Pete"]));
        assert_eq!(l.meet_k(x, y).unwrap(), Pair::new(s(&["Pete"]), s(&[])));
        assert_eq!(l.join_k(x, l.bot_pair()).unwrap(), x);
        let c = Pair::new(s(&["Ann", "Bob"]), s(&[]));
        assert_eq!(l.conflate(c).unwrap(), y);

        let u = Lattice::unit_chain();
        let r = |n| u.rational(n, 10).unwrap();
        assert_eq!(
            u.pcomp_pair(Pair::new(r(9), r(7)), Pair::new(r(8), r(6))).unwrap(),
            u.bot_pair()
        );
        let c = Pair::new(r(0), r(10));
        assert_eq!(u.conflate(c).unwrap(), c);
    }

    #[test]
    fn consistency() {
        let u = Lattice::unit_chain();
        assert!(u.is_consistent(Pair::new(u.rational(3, 10).unwrap(), u.rational(7, 10).unwrap())).unwrap());
        let l = tpq();
        let q = l.set(&["q"]).unwrap();
        assert!(!l.is_consistent(Pair::new(q, q)).unwrap());
        assert!(l.is_consistent(l.bot_pair()).unwrap());
    }

    #[test]
    fn negation_is_boolean_only() {
        let l = tpq();
        let s = |m: &[&str]| l.set(m).unwrap();
        let n = l.negate(Pair::new(s(&["p"]), s(&[]))).unwrap();
        assert_eq!(n, Pair::new(s(&["q"]), s(&["p", "q"])));
        assert_eq!(l.negate(l.top_pair()).unwrap(), l.bot_pair());
        let u = Lattice::unit_chain();
        assert_eq!(u.negate(u.bot_pair()), Err(LatticeError::Unsupported("Boolean negation")));
    }

    #[test]
    fn cross_lattice_operands_are_errors() {
        let a = tpq();
        let b = Lattice::powerset(&["x"]).unwrap();
        assert_eq!(a.meet(a.top(), b.top()), Err(LatticeError::Mismatch));
        let u = Lattice::unit_chain();
        assert_eq!(a.leq(a.bot(), u.bot()), Err(LatticeError::Mismatch));
        // structurally identical lattices interoperate
        let a2 = tpq();
        assert_eq!(a.join(a.bot(), a2.top()).unwrap(), a.top());
    }

    #[test]
    fn rationals_are_exact_and_bounded() {
        let u = Lattice::unit_chain();
        assert_eq!(u.format(u.rational(6, 20).unwrap()), "3/10");
        assert!(matches!(u.rational(11, 10), Err(LatticeError::OutOfRange(_))));
    }

    #[test]
    fn four_level_chain() {
        let c = Lattice::chain(&["e0", "e1", "e2", "e3"]).unwrap();
        assert!(c.validate().is_valid());
        assert!(c.is_linear());
        assert!(!c.is_boolean());
        let e1 = c.named("e1").unwrap();
        assert_eq!(c.format(c.complement(e1).unwrap()), "e2");
        assert_eq!(c.pcomp(e1, c.named("e3").unwrap()).unwrap(), c.named("e3").unwrap());
    }
}
