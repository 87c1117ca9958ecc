//! JSON renderings of valuations and results.

use serde_json::{json, Map, Value};

use crate::engine::{Enumeration, RevisionOutcome};
use crate::valuation::PairValuation;

/// `{atom: {"in": X, "out": Y}}` with lattice elements in canonical text.
pub fn valuation(v: &PairValuation) -> Value {
    let lat = v.lattice();
    let mut m = Map::new();
    for (id, p) in v.iter() {
        m.insert(v.universe().name(id).to_string(), json!({ "in": lat.format(p.pos), "out": lat.format(p.neg) }));
    }
    Value::Object(m)
}

pub fn outcome(o: &RevisionOutcome) -> Value {
    json!({
        "valuation": valuation(&o.candidate),
        "necessary_change": valuation(&o.necessary_change),
        "trace": o.trace,
        "verified": o.verified,
    })
}

/// `{semantics, revisions, stats}`.
pub fn enumeration(e: &Enumeration, semantics: &str) -> Value {
    json!({
        "semantics": semantics,
        "revisions": e.revisions.iter().map(outcome).collect::<Vec<_>>(),
        "stats": {
            "candidates": e.space,
            "pair_domain": e.domain_size,
            "found": e.revisions.len(),
        },
    })
}
