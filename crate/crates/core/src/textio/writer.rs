//! Canonical text output. Parsing the output of [`to_text`] yields an equal
//! document.

use std::fmt::Write;

use super::Document;
use crate::isomorphism::{PairIso, PairMap, Step};
use crate::lattice::Lattice;
use crate::syntax::{AnnotatedAtom, PairAtom, Program, Rules, Universe};
use crate::valuation::PairValuation;

pub fn lattice_decl(lat: &Lattice) -> String {
    if lat.is_two() {
        return "lattice two".to_string();
    }
    if lat.is_unit_chain() {
        return "lattice chain unit".to_string();
    }
    if let Some(labels) = lat.labels() {
        let mut s = format!("lattice powerset {{{}}}", labels.join(", "));
        if let Some(table) = lat.complement_override() {
            let entries: Vec<String> =
                table.iter().map(|&(x, y)| format!("{} -> {}", lat.format(x), lat.format(y))).collect();
            write!(s, " complement {{{}}}", entries.join(", ")).unwrap();
        }
        return s;
    }
    let names = lat.names().expect("named finite lattice");
    if lat.is_level_chain() {
        return format!("lattice chain [{}]", names.join(" < "));
    }
    let order: Vec<String> =
        lat.covers().iter().map(|&(x, y)| format!("{} < {}", lat.format(x), lat.format(y))).collect();
    let comp: Vec<String> = lat
        .elements()
        .expect("finite")
        .iter()
        .map(|&x| format!("{} -> {}", lat.format(x), lat.format(lat.complement(x).expect("member"))))
        .collect();
    format!(
        "lattice custom {{\n  elements {{{}}}\n  order {{{}}}\n  complement {{{}}}\n}}",
        names.join(", "),
        order.join(", "),
        comp.join(", ")
    )
}

pub fn old_atom(lat: &Lattice, u: &Universe, a: &AnnotatedAtom) -> String {
    format!("{}({}):{}", a.lit.polarity.keyword(), u.name(a.lit.atom), lat.format(a.ann))
}

pub fn new_atom(lat: &Lattice, u: &Universe, a: &PairAtom) -> String {
    format!("{}:{}", u.name(a.atom), lat.format_pair(a.ann))
}

fn rule_line(head: String, body: Vec<String>) -> String {
    if body.is_empty() {
        format!("{head} <- .")
    } else {
        format!("{head} <- {}.", body.join(", "))
    }
}

/// One line per rule, in program order.
pub fn rule_lines(p: &Program) -> Vec<String> {
    let (lat, u) = (p.lattice(), p.universe());
    match p.rules() {
        Rules::Old(rs) => rs
            .iter()
            .map(|r| rule_line(old_atom(lat, u, &r.head), r.body.iter().map(|a| old_atom(lat, u, a)).collect()))
            .collect(),
        Rules::New(rs) => rs
            .iter()
            .map(|r| rule_line(new_atom(lat, u, &r.head), r.body.iter().map(|a| new_atom(lat, u, a)).collect()))
            .collect(),
    }
}

/// `atom = <X, Y>.` per atom, lexicographic.
pub fn valuation_lines(v: &PairValuation) -> Vec<String> {
    v.iter()
        .map(|(id, p)| format!("{} = {}.", v.universe().name(id), v.lattice().format_pair(p)))
        .collect()
}

fn step_text(lat: &Lattice, s: &Step) -> String {
    match s {
        Step::Identity => "id".to_string(),
        Step::Swap => "swap".to_string(),
        Step::Perm(m) => {
            let items: Vec<String> = m.iter().map(|(a, b)| format!("{a}->{b}")).collect();
            format!("perm({})", items.join(", "))
        }
        Step::Table(m) => {
            let items: Vec<String> =
                m.iter().map(|&(a, b)| format!("{} -> {}", lat.format_pair(a), lat.format_pair(b))).collect();
            format!("table({})", items.join(", "))
        }
    }
}

fn map_text(lat: &Lattice, m: &PairMap) -> String {
    m.steps().iter().map(|s| step_text(lat, s)).collect::<Vec<_>>().join(" ")
}

pub fn iso_block(iso: &PairIso) -> String {
    let lat = iso.lattice();
    let mut lines: Vec<String> = iso
        .entries()
        .iter()
        .map(|(id, m)| format!("  {}: {};", iso.universe().name(*id), map_text(lat, m)))
        .collect();
    lines.push(format!("  *: {};", map_text(lat, iso.default_map())));
    format!("iso {{\n{}\n}}", lines.join("\n"))
}

fn block(name: &str, lines: &[String]) -> String {
    if lines.is_empty() {
        format!("{name} {{\n}}")
    } else {
        format!("{name} {{\n  {}\n}}", lines.join("\n  "))
    }
}

pub fn to_text(doc: &Document) -> String {
    let mut parts = vec![
        lattice_decl(&doc.lattice),
        format!("syntax {}", doc.syntax()),
        format!("universe {{{}}}", doc.universe.names().join(", ")),
        block("program", &rule_lines(&doc.program)),
    ];
    if let Some(v) = &doc.init {
        parts.push(block("init", &valuation_lines(v)));
    }
    if let Some(v) = &doc.candidate {
        parts.push(block("candidate", &valuation_lines(v)));
    }
    if let Some(iso) = &doc.iso {
        parts.push(iso_block(iso));
    }
    let mut out = parts.join("\n");
    out.push('\n');
    out
}
