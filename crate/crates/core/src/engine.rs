//! Consequence operators, necessary change, model checks, both reducts,
//! and verification and enumeration of justified revisions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::Pair;
use crate::syntax::{AnnotatedAtom, PairAtom, Program, Rule, Rules, SyntaxError, SyntaxKind};
use crate::valuation::{PairValuation, TValuation, ValuationError};

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("internal error: fixpoint iteration reached {cap} applications on a {rules}-rule program")]
    IterationBound { rules: usize, cap: usize },
    #[error("search space of {size} candidate valuations exceeds the cap of {cap}")]
    CapExceeded { size: String, cap: u64 },
    #[error("enumeration over an infinite lattice is not supported (see --experimental-closure)")]
    InfiniteLattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Mpt,
    Fitting,
}

impl Semantics {
    pub fn name(self) -> &'static str {
        match self {
            Semantics::Mpt => "mpt",
            Semantics::Fitting => "fitting",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Semantics, String> {
        match s {
            "mpt" => Ok(Semantics::Mpt),
            "fitting" => Ok(Semantics::Fitting),
            other => Err(format!("unknown semantics `{other}`")),
        }
    }
}

static NC_COMPUTATIONS: AtomicU64 = AtomicU64::new(0);
static NC_BOUND_VIOLATIONS: AtomicU64 = AtomicU64::new(0);
static NC_MAX_APPLICATIONS: AtomicU64 = AtomicU64::new(0);

/// Process-wide counters over every necessary-change computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixpointStats {
    pub computations: u64,
    /// Computations needing more than `#rules + 1` operator applications.
    pub bound_violations: u64,
    pub max_applications: u64,
}

pub fn fixpoint_stats() -> FixpointStats {
    FixpointStats {
        computations: NC_COMPUTATIONS.load(Ordering::Relaxed),
        bound_violations: NC_BOUND_VIOLATIONS.load(Ordering::Relaxed),
        max_applications: NC_MAX_APPLICATIONS.load(Ordering::Relaxed),
    }
}

fn expect_old(p: &Program) -> Result<&[Rule<AnnotatedAtom>], EngineError> {
    p.old_rules().ok_or(EngineError::Syntax(SyntaxError::WrongSyntax { expected: SyntaxKind::Old }))
}

fn check_t(p: &Program, v: &TValuation) -> Result<(), EngineError> {
    if v.lattice() != p.lattice() {
        return Err(ValuationError::LatticeMismatch.into());
    }
    if v.universe() != p.universe() {
        return Err(ValuationError::UniverseMismatch.into());
    }
    Ok(())
}

fn fired_old(rules: &[Rule<AnnotatedAtom>], v: &TValuation) -> Vec<usize> {
    rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.body.iter().all(|a| v.satisfies_atom(a)))
        .map(|(i, _)| i)
        .collect()
}

fn fired_new(p: &Program, rules: &[Rule<PairAtom>], b: &PairValuation) -> Vec<usize> {
    let lat = p.lattice();
    rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.body.iter().all(|a| lat.leq_k_u(a.ann, b.get(a.atom))))
        .map(|(i, _)| i)
        .collect()
}

/// Heads of the old-syntax rules whose bodies `v` satisfies.
pub fn tp_heads(p: &Program, v: &TValuation) -> Result<BTreeSet<AnnotatedAtom>, EngineError> {
    let rules = expect_old(p)?;
    check_t(p, v)?;
    Ok(fired_old(rules, v).into_iter().map(|i| rules[i].head).collect())
}

fn tp_u(p: &Program, rules: &[Rule<AnnotatedAtom>], fired: &[usize]) -> TValuation {
    let mut out = TValuation::bottom(p.lattice(), p.universe());
    for &i in fired {
        out.join_into(rules[i].head.lit, rules[i].head.ann);
    }
    out
}

/// The revision-atom operator: each revision atom gets the join of the
/// annotations of fired heads for it.
pub fn tp(p: &Program, v: &TValuation) -> Result<TValuation, EngineError> {
    let rules = expect_old(p)?;
    check_t(p, v)?;
    let fired = fired_old(rules, v);
    Ok(tp_u(p, rules, &fired))
}

/// One operator application on pair valuations, with the fired rules.
fn step(p: &Program, b: &PairValuation) -> (PairValuation, Vec<usize>) {
    match p.rules() {
        Rules::Old(rules) => {
            let v = b.theta_inv();
            let fired = fired_old(rules, &v);
            (tp_u(p, rules, &fired).theta(), fired)
        }
        Rules::New(rules) => {
            let lat = p.lattice();
            let fired = fired_new(p, rules, b);
            let mut values = vec![lat.bot_pair(); p.universe().len()];
            for &i in &fired {
                let h = rules[i].head;
                let slot = &mut values[h.atom.index()];
                *slot = lat.join_k_u(*slot, h.ann);
            }
            (PairValuation::raw(lat.clone(), p.universe().clone(), values), fired)
        }
    }
}

/// The pair-valuation operator. Old-syntax programs go through `θ⁻¹` and
/// back; new-syntax programs are evaluated directly.
pub fn tpb(p: &Program, b: &PairValuation) -> Result<PairValuation, EngineError> {
    b.compatible_with(p)?;
    Ok(step(p, b).0)
}

/// Least fixpoint of the operator with its iteration history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixpoint {
    pub value: PairValuation,
    /// Indices of the rules fired at each application.
    pub trace: Vec<Vec<usize>>,
    pub applications: usize,
}

/// Kleene iteration from `V_⊥`. The fired-rule set grows with every
/// change, so a fixpoint is confirmed within `#rules + 1` applications.
pub fn necessary_change(p: &Program) -> Result<Fixpoint, EngineError> {
    let n = p.len();
    let cap = n + 2;
    let mut current = PairValuation::bottom(p.lattice(), p.universe());
    let mut trace = Vec::new();
    loop {
        let (next, fired) = step(p, &current);
        trace.push(fired);
        let applications = trace.len();
        if next == current {
            NC_COMPUTATIONS.fetch_add(1, Ordering::Relaxed);
            NC_MAX_APPLICATIONS.fetch_max(applications as u64, Ordering::Relaxed);
            if applications > n + 1 {
                NC_BOUND_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            }
            return Ok(Fixpoint { value: current, trace, applications });
        }
        if applications >= cap {
            NC_COMPUTATIONS.fetch_add(1, Ordering::Relaxed);
            NC_BOUND_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            return Err(EngineError::IterationBound { rules: n, cap });
        }
        current = next;
    }
}

/// `B ≥_k T(B)`.
pub fn is_model(p: &Program, b: &PairValuation) -> Result<bool, EngineError> {
    let t = tpb(p, b)?;
    Ok(t.leq_k_u(b))
}

/// `T(B) ≤_k B ≤_k T(B) ⊕ −T(B)`.
pub fn is_smodel(p: &Program, b: &PairValuation) -> Result<bool, EngineError> {
    let t = tpb(p, b)?;
    Ok(t.leq_k_u(b) && b.leq_k_u(&t.join_k_u(&t.conflate())))
}

/// A reduced program whose `i`-th rule came from source rule `provenance[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduct {
    pub program: Program,
    pub provenance: Vec<usize>,
}

fn reduce(p: &Program, bi: &PairValuation, br: &PairValuation, sem: Semantics) -> Result<Reduct, EngineError> {
    bi.compatible_with(p)?;
    br.compatible_with(p)?;
    let lat = p.lattice();
    let mut provenance = Vec::new();
    let rules = match p.rules() {
        Rules::Old(rules) => {
            let (vr, vi) = (br.theta_inv(), bi.theta_inv());
            let mut out = Vec::new();
            for (i, r) in rules.iter().enumerate() {
                if !r.body.iter().all(|a| vr.satisfies_atom(a)) {
                    continue;
                }
                let body = match sem {
                    Semantics::Mpt => r
                        .body
                        .iter()
                        .map(|a| AnnotatedAtom::new(a.lit, lat.pcomp_u(vi.get(a.lit), a.ann)))
                        .collect(),
                    Semantics::Fitting => r.body.iter().filter(|a| !vi.satisfies_atom(a)).copied().collect(),
                };
                provenance.push(i);
                out.push(Rule::new(r.head, body));
            }
            Rules::Old(out)
        }
        Rules::New(rules) => {
            let mut out = Vec::new();
            for (i, r) in rules.iter().enumerate() {
                if !r.body.iter().all(|a| lat.leq_k_u(a.ann, br.get(a.atom))) {
                    continue;
                }
                let body = match sem {
                    Semantics::Mpt => r
                        .body
                        .iter()
                        .map(|a| PairAtom::new(a.atom, lat.pcomp_pair_u(bi.get(a.atom), a.ann)))
                        .collect(),
                    // Components already held in B_I are deleted one by one;
                    // an atom left with nothing to demand disappears.
                    Semantics::Fitting => r
                        .body
                        .iter()
                        .filter_map(|a| {
                            let held = bi.get(a.atom);
                            let keep = |want, have| if lat.leq_u(want, have) { lat.bot() } else { want };
                            let ann = Pair::new(keep(a.ann.pos, held.pos), keep(a.ann.neg, held.neg));
                            (ann != lat.bot_pair()).then_some(PairAtom::new(a.atom, ann))
                        })
                        .collect(),
                };
                provenance.push(i);
                out.push(Rule::new(r.head, body));
            }
            Rules::New(out)
        }
    };
    Ok(Reduct { program: Program::raw(lat.clone(), p.universe().clone(), rules), provenance })
}

/// Drops rules whose body `B_R` does not satisfy and replaces each body
/// annotation `β` on `l` by `pcomp(B_I(l), β)`.
pub fn reduct(p: &Program, bi: &PairValuation, br: &PairValuation) -> Result<Reduct, EngineError> {
    reduce(p, bi, br, Semantics::Mpt)
}

/// Drops rules whose body `B_R` does not satisfy and deletes body atoms
/// already satisfied in `B_I`.
pub fn f_reduct(p: &Program, bi: &PairValuation, br: &PairValuation) -> Result<Reduct, EngineError> {
    reduce(p, bi, br, Semantics::Fitting)
}

pub fn reduct_for(p: &Program, bi: &PairValuation, br: &PairValuation, sem: Semantics) -> Result<Reduct, EngineError> {
    reduce(p, bi, br, sem)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevisionOutcome {
    pub candidate: PairValuation,
    pub semantics: Semantics,
    pub necessary_change: PairValuation,
    pub verified: bool,
    /// Source-rule indices fired at each fixpoint application on the reduct.
    pub trace: Vec<Vec<usize>>,
}

/// Computes the reduct, its necessary change `C`, and checks
/// `B_R = (B_I ⊗ −C) ⊕ C`.
pub fn is_justified_revision(
    p: &Program,
    bi: &PairValuation,
    br: &PairValuation,
    sem: Semantics,
) -> Result<RevisionOutcome, EngineError> {
    let red = reduce(p, bi, br, sem)?;
    let fix = necessary_change(&red.program)?;
    let verified = bi.apply_change_u(&fix.value) == *br;
    let trace = fix
        .trace
        .iter()
        .map(|step| step.iter().map(|&i| red.provenance[i]).collect())
        .collect();
    Ok(RevisionOutcome { candidate: br.clone(), semantics: sem, necessary_change: fix.value, verified, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumOptions {
    pub cap: u64,
    pub jobs: usize,
    /// Search the unit chain over the complement closure of the constants
    /// in the program and `B_I`. Completeness of this restriction is not
    /// established.
    pub experimental_closure: bool,
}

impl Default for EnumOptions {
    fn default() -> EnumOptions {
        EnumOptions { cap: DEFAULT_CAP, jobs: 1, experimental_closure: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub revisions: Vec<RevisionOutcome>,
    pub space: u64,
    pub domain_size: usize,
}

/// Every justified revision of `bi`, sorted by canonical text.
pub fn enumerate_revisions(
    p: &Program,
    bi: &PairValuation,
    sem: Semantics,
    opts: &EnumOptions,
) -> Result<Enumeration, EngineError> {
    bi.compatible_with(p)?;
    let lat = p.lattice();
    let domain: Vec<Pair> = match lat.pairs() {
        Some(all) => all,
        None if opts.experimental_closure => {
            let seeds = p.constants().into_iter().chain(bi.values().iter().flat_map(|v| [v.pos, v.neg]));
            let closure = lat.unit_closure(seeds).map_err(ValuationError::from)?;
            closure.iter().flat_map(|&x| closure.iter().map(move |&y| Pair::new(x, y))).collect()
        }
        None => return Err(EngineError::InfiniteLattice),
    };
    let atoms = p.universe().len();
    let k = domain.len() as u64;
    let space = k.checked_pow(atoms as u32).filter(|&s| s <= opts.cap).ok_or_else(|| EngineError::CapExceeded {
        size: format!("{}^{} = {}", k, atoms, (k as f64).powi(atoms as i32)),
        cap: opts.cap,
    })?;
    let check = |index: u64| -> Result<Option<RevisionOutcome>, EngineError> {
        let mut rest = index;
        let mut values = Vec::with_capacity(atoms);
        for _ in 0..atoms {
            values.push(domain[(rest % k) as usize]);
            rest /= k;
        }
        let br = PairValuation::raw(lat.clone(), p.universe().clone(), values);
        let out = is_justified_revision(p, bi, &br, sem)?;
        Ok(out.verified.then_some(out))
    };
    let found: Vec<Option<RevisionOutcome>> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("thread pool construction");
        pool.install(|| (0..space).into_par_iter().map(check).collect::<Result<_, _>>())?
    } else {
        (0..space).map(check).collect::<Result<_, _>>()?
    };
    let mut revisions: Vec<(String, RevisionOutcome)> =
        found.into_iter().flatten().map(|o| (o.candidate.canonical(), o)).collect();
    revisions.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Enumeration { revisions: revisions.into_iter().map(|(_, o)| o).collect(), space, domain_size: domain.len() })
}
