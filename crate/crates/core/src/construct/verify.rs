use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::encode::{inputs_of, parse_inputs, seal};
use super::{assemble, lichtenbaum_check, Certificate};
use crate::arith;
use crate::cert::{self, Node};
use crate::sieve;

/// Failures found while rechecking a certificate; empty means it verifies.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub trace: Vec<String>,
}

impl Verdict {
    pub fn ok(&self) -> bool {
        self.trace.is_empty()
    }
}

pub fn verify_certificate(node: &Node) -> Verdict {
    let mut trace = Vec::new();
    check(node, "", &mut trace);
    Verdict { trace }
}

fn num(node: &Node, path: &str, trace: &mut Vec<String>, prefix: &str) -> Option<u32> {
    match node.parse_at::<u32>(path) {
        Ok(x) => Some(x),
        Err(e) => {
            trace.push(format!("{prefix}{e}"));
            None
        }
    }
}

fn check(node: &Node, prefix: &str, trace: &mut Vec<String>) {
    let kind = match node.str_at("kind") {
        Ok(k) => k.to_string(),
        Err(_) => {
            trace.push(format!("{prefix}kind: missing or not a string"));
            return;
        }
    };
    match kind.as_str() {
        "trivial" => {
            if node.str_at("period/claim").ok() != Some("1") || node.str_at("index/upper").ok() != Some("1") {
                trace.push(format!("{prefix}period/claim: the trivial class has period and index 1"));
            }
            if node.str_at("index/lower").ok() != Some("1") {
                trace.push(format!("{prefix}index/lower: the trivial class has index 1"));
            }
        }
        "single" => check_single(node, prefix, trace),
        "composite" => check_composite(node, prefix, trace),
        other => trace.push(format!("{prefix}kind: unknown certificate kind {other:?}")),
    }
}

fn check_single(node: &Node, prefix: &str, trace: &mut Vec<String>) {
    let inputs = inputs_of(node);
    let fresh = seal(&inputs);
    let stored = node.get("seal").cloned().unwrap_or(Node::s("missing"));
    for d in cert::diff(&stored, &fresh) {
        let (path, rest) = d.split_once(':').unwrap_or((&d, ""));
        trace.push(format!("{prefix}{}: input does not match seal/{path}{rest}", path.replace('.', "/")));
    }

    if let (Ok(ell), Ok(ev)) = (node.parse_at::<u32>("context/ell"), node.list_at("index/lower_evidence")) {
        let need = (1..ell).filter(|d| ell % d == 0).count();
        if ev.len() < need {
            trace.push(format!("{prefix}index/lower_evidence: index lower bound unproven"));
        }
    } else {
        trace.push(format!("{prefix}index/lower_evidence: index lower bound unproven"));
    }

    let (ctx, curve, pair) = match parse_inputs(node) {
        Ok(x) => x,
        Err(e) => {
            trace.push(format!("{prefix}{e}"));
            return;
        }
    };
    if curve.digest() != node.str_at("curve_digest").unwrap_or("") {
        trace.push(format!("{prefix}curve_digest: does not match the curve block"));
    }
    match sieve::recheck_pair(&curve, &pair) {
        Ok(fails) => trace.extend(fails.into_iter().map(|f| format!("{prefix}pair/{f}"))),
        Err(e) => trace.push(format!("{prefix}pair: {e}")),
    }
    if let (Some(p), Some(i)) = (num(node, "period/claim", trace, prefix), num(node, "index/upper", trace, prefix)) {
        if !lichtenbaum_check(p, i) {
            trace.push(format!("{prefix}index/upper: period {p} and index {i} violate P | I | P²"));
        }
    }
    for r in ["report", "class_report"] {
        if node.str_at(&format!("{r}/sum")).map(|s| !s.starts_with("0/")).unwrap_or(true) {
            trace.push(format!("{prefix}{r}/sum: local invariants do not sum to zero"));
        }
    }
    match assemble(&curve, &ctx, &pair) {
        Ok(c) => {
            let again = Certificate::Single(alloc::boxed::Box::new(c)).to_node();
            for d in cert::diff(node, &again) {
                trace.push(format!("{prefix}{d}"));
            }
        }
        Err(e) => trace.push(format!("{prefix}reassembly: {e}")),
    }
}

fn check_composite(node: &Node, prefix: &str, trace: &mut Vec<String>) {
    let parts = match node.list_at("parts") {
        Ok(p) => p,
        Err(e) => {
            trace.push(format!("{prefix}{e}"));
            return;
        }
    };
    if parts.len() < 2 {
        trace.push(format!("{prefix}parts: a composite needs two parts"));
    }
    let mut periods = Vec::new();
    let mut indices = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let sub = format!("{prefix}parts/{i}/");
        check(p, &sub, trace);
        if p.str_at("curve_digest").ok() != node.str_at("curve_digest").ok() {
            trace.push(format!("{sub}curve_digest: parts concern different curves"));
        }
        periods.push(num(p, "period/claim", trace, &sub).unwrap_or(0) as u64);
        indices.push(num(p, "index/upper", trace, &sub).unwrap_or(0) as u64);
    }
    for i in 0..periods.len() {
        for j in i + 1..periods.len() {
            if arith::gcd(periods[i], periods[j]) != 1 {
                trace.push(format!("{prefix}parts/{j}/period/claim: periods are not coprime"));
            }
        }
    }
    let p: u64 = periods.iter().product();
    let i: u64 = indices.iter().product();
    if node.parse_at::<u64>("period/claim").ok() != Some(p) {
        trace.push(format!("{prefix}period/claim: expected the product {p}"));
    }
    if node.parse_at::<u64>("index/upper").ok() != Some(i) {
        trace.push(format!("{prefix}index/upper: expected the product {i}"));
    }
    if node.parse_at::<u64>("index/lower").ok() != Some(i) {
        trace.push(format!("{prefix}index/lower: expected the product {i}"));
    }
    let lic = p <= u32::MAX as u64 && i <= u32::MAX as u64 && lichtenbaum_check(p as u32, i as u32);
    if node.str_at("lichtenbaum").ok() != Some(if lic { "true" } else { "false" }) || !lic {
        trace.push(format!("{prefix}lichtenbaum: check fails for period {p}, index {i}"));
    }
    let expect = ["kind", "curve_digest", "parts", "period", "index", "lichtenbaum"];
    if let Node::Map(m) = node {
        for k in m.keys() {
            if !expect.contains(&k.as_str()) {
                trace.push(format!("{prefix}{k}: unexpected field"));
            }
        }
    }
}
