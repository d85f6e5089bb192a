use alloc::collections::BTreeMap;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use super::{assemble, Certificate, Context, PeriodIndexCertificate, Route};
use crate::cert::{self, Node};
use crate::cyclo::{Cyclo, SplitPlace};
use crate::ecq::{CurveOverL, PointL};
use crate::error::{input, Result};
use crate::localfield::ObstructionReport;
use crate::sieve::{Bounds, DivisionWitness, Mode, PlaceCert, PrimePairCert, SWitness};

fn yes(b: bool) -> Node {
    Node::s(if b { "true" } else { "false" })
}

fn context_node(c: &Context) -> Node {
    Node::map([
        ("n", Node::s(c.n)),
        ("ell", Node::s(c.ell)),
        ("mode", Node::s(c.mode.name())),
        ("route", Node::s(c.route.name())),
        ("seed", Node::s(c.seed)),
        (
            "bounds",
            Node::map([
                ("prime_bound", Node::s(c.bounds.prime_bound)),
                ("coeff_bound", Node::s(c.bounds.coeff_bound)),
                ("unit_window", Node::s(c.bounds.unit_window)),
            ]),
        ),
    ])
}

pub fn curve_node(e: &CurveOverL) -> Node {
    let pts = |v: &[PointL]| Node::list(v.iter().map(cert::point_node));
    Node::map([
        ("level", Node::s(e.level())),
        ("a", Node::list(e.curve.a.iter().map(cert::elem_node))),
        (
            "basis",
            match &e.torsion_basis {
                Some((s, t)) => pts(&[s.clone(), t.clone()]),
                None => Node::s("none"),
            },
        ),
        ("generators", pts(&e.mw_generators)),
        (
            "stable",
            match e.stable_subgroup_order {
                Some(o) => Node::s(o),
                None => Node::s("none"),
            },
        ),
    ])
}

fn place_node(v: &SplitPlace) -> Node {
    Node::map([("p", Node::s(v.p)), ("omega", Node::s(v.omega))])
}

fn witness_node(w: &SWitness) -> Node {
    match w {
        SWitness::Wild { prime, prec, root } => Node::map([
            ("kind", Node::s("wild")),
            ("prime", Node::s(prime)),
            ("prec", Node::s(prec)),
            ("root", Node::list(root.iter().map(Node::s))),
        ]),
        SWitness::Tame { prime } => Node::map([("kind", Node::s("tame")), ("prime", Node::s(prime))]),
        SWitness::Real => Node::map([("kind", Node::s("real"))]),
    }
}

fn place_cert_node(c: &PlaceCert) -> Node {
    Node::map([
        ("place", place_node(&c.place)),
        ("pi", cert::elem_node(&c.pi)),
        ("s_witnesses", Node::list(c.s_witnesses.iter().map(witness_node))),
    ])
}

fn pair_node(c: &PrimePairCert) -> Node {
    Node::map([
        ("n", Node::s(c.n)),
        ("mode", Node::s(c.mode.name())),
        ("v", place_cert_node(&c.v)),
        ("vp", place_cert_node(&c.vp)),
        ("group", Node::list([Node::s(c.group.0), Node::s(c.group.1)])),
        (
            "division",
            Node::list(c.division.iter().map(|d| {
                Node::map([("point", cert::fp_point_node(&d.point)), ("root", cert::fp_point_node(&d.root))])
            })),
        ),
        ("a4", Node::map([("residue", Node::s(c.a4_residue)), ("order", Node::s(c.a4_order))])),
        (
            "b4",
            Node::list(c.b4_residues.iter().map(|(t, r)| Node::list([Node::s(t), Node::s(r)]))),
        ),
    ])
}

fn report_node(r: &ObstructionReport) -> Node {
    let entries: BTreeMap<String, Node> = r
        .entries
        .iter()
        .map(|e| {
            (
                e.place.label(),
                Node::map([("inv", Node::s(e.inv)), ("source", Node::s(e.source.name()))]),
            )
        })
        .collect();
    Node::map([
        ("level", Node::s(r.level)),
        ("entries", Node::Map(entries)),
        ("global_order", Node::s(r.global_order)),
        ("sum", Node::s(r.sum())),
    ])
}

fn pair_of(x: &crate::kummer::KummerPair) -> Node {
    Node::map([
        ("level", Node::s(x.n)),
        ("a", cert::factored_node(&x.a)),
        ("b", cert::factored_node(&x.b)),
    ])
}

fn inputs_node(c: &Context, e: &CurveOverL, p: &PrimePairCert) -> Node {
    Node::map([("context", context_node(c)), ("curve", curve_node(e)), ("pair", pair_node(p))])
}

/// A short hash of every input leaf, keyed by its dotted path.
pub(super) fn seal(inputs: &Node) -> Node {
    Node::map(inputs.leaves().into_iter().map(|(path, value)| {
        let mut h = Sha256::new();
        h.update(path.as_bytes());
        h.update(b"=");
        h.update(value.as_bytes());
        let hex: String = h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect();
        (path.replace('/', "."), Node::s(hex))
    }))
}

fn single_node(c: &PeriodIndexCertificate) -> Node {
    let inputs = inputs_node(&c.context, &c.curve, &c.pair);
    let mut m: BTreeMap<String, Node> = BTreeMap::new();
    m.insert("kind".to_string(), Node::s("single"));
    m.insert("seal".to_string(), seal(&inputs));
    if let Node::Map(inp) = inputs {
        m.extend(inp);
    }
    m.insert("curve_digest".to_string(), Node::s(c.curve.digest()));
    m.insert(
        "pinning".to_string(),
        Node::map([
            ("level", Node::s(c.context.level())),
            ("place", Node::s(format!("{}:{}", c.pair.v.place.p, c.pair.v.place.omega))),
            ("omega", Node::s(c.omega)),
        ]),
    );
    m.insert("xi".to_string(), pair_of(&c.xi));
    if let Some(rep) = &c.rep {
        m.insert(
            "rep".to_string(),
            Node::map(rep.mats.iter().map(|(t, g)| {
                (t.to_string(), Node::list([Node::s(g.i), Node::s(g.j), Node::s(g.k), Node::s(g.l)]))
            })),
        );
    }
    if let Some((f, nm)) = &c.norm {
        m.insert(
            "norm".to_string(),
            Node::map([
                ("c", cert::factored_node(&f.c)),
                ("d", cert::factored_node(&f.d)),
                ("c_prime", cert::factored_node(&f.c_prime)),
                ("d_prime", cert::factored_node(&f.d_prime)),
                ("class", pair_of(nm)),
            ]),
        );
    }
    m.insert("report".to_string(), report_node(&c.report));
    m.insert("ambiguity".to_string(), Node::s(c.ambiguity));
    m.insert(
        "lemmas".to_string(),
        Node::map(c.lemmas.iter().map(|(k, ok)| (k.clone(), yes(*ok)))),
    );
    m.insert("class_report".to_string(), report_node(&c.class_report));
    m.insert(
        "period".to_string(),
        Node::map([
            ("claim", Node::s(c.period)),
            (
                "evidence",
                Node::list(c.period_evidence.iter().map(|(k, val)| {
                    Node::map([("m", Node::s(k)), ("valuation", Node::s(val))])
                })),
            ),
        ]),
    );
    m.insert(
        "index".to_string(),
        Node::map([
            ("upper", Node::s(c.index_upper)),
            ("lower", Node::s(c.index_lower)),
            (
                "lower_evidence",
                Node::list(c.lower_evidence.iter().map(|(d, inv)| {
                    Node::map([("ell_prime", Node::s(d)), ("inv_v", Node::s(inv))])
                })),
            ),
        ]),
    );
    if let Some(t) = &c.even_trace {
        m.insert(
            "even_trace".to_string(),
            Node::map([
                ("level", Node::s(t.level)),
                ("symbol_order", Node::s(t.symbol_order)),
                ("inv_high", Node::s(t.inv_high)),
                ("inv_low", Node::s(t.inv_low)),
            ]),
        );
    }
    m.insert("lichtenbaum".to_string(), yes(c.lichtenbaum_ok));
    Node::Map(m)
}

impl Certificate {
    pub fn to_node(&self) -> Node {
        match self {
            Certificate::Trivial { digest } => Node::map([
                ("kind", Node::s("trivial")),
                ("curve_digest", Node::s(digest)),
                ("period", Node::map([("claim", Node::s(1))])),
                ("index", Node::map([("upper", Node::s(1)), ("lower", Node::s(1))])),
            ]),
            Certificate::Single(c) => single_node(c),
            Certificate::Composite(parts) => Node::map([
                ("kind", Node::s("composite")),
                ("curve_digest", Node::s(self.digest())),
                ("parts", Node::list(parts.iter().map(|p| p.to_node()))),
                ("period", Node::map([("claim", Node::s(self.period()))])),
                ("index", Node::map([("upper", Node::s(self.index())), ("lower", Node::s(self.index()))])),
                ("lichtenbaum", yes(super::lichtenbaum_check(self.period(), self.index()))),
            ]),
        }
    }
}

fn ctx_err<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        crate::Error::Input(m) if !m.starts_with(path) => crate::Error::Input(format!("{path}: {m}")),
        other => other,
    })
}

pub fn parse_context(node: &Node) -> Result<Context> {
    let mode = match node.str_at("context/mode")? {
        "A" => Mode::A,
        "B" => Mode::B,
        s => return input(format!("context/mode: unknown mode {s:?}")),
    };
    let route = match node.str_at("context/route")? {
        "direct" => Route::Direct,
        "doubled" => Route::Doubled,
        s => return input(format!("context/route: unknown route {s:?}")),
    };
    Ok(Context {
        n: node.parse_at("context/n")?,
        ell: node.parse_at("context/ell")?,
        mode,
        route,
        seed: node.parse_at("context/seed")?,
        bounds: Bounds {
            prime_bound: node.parse_at("context/bounds/prime_bound")?,
            coeff_bound: node.parse_at("context/bounds/coeff_bound")?,
            unit_window: node.parse_at("context/bounds/unit_window")?,
        },
    })
}

/// Reads a curve block (as written by `curve_node`).
pub fn parse_curve(node: &Node) -> Result<CurveOverL> {
    let level: u32 = node.parse_at("level")?;
    let k = ctx_err("level", Cyclo::new(level))?;
    let a_nodes = node.list_at("a")?;
    if a_nodes.len() != 5 {
        return input("a: expected five coefficients");
    }
    let mut a = Vec::new();
    for (i, x) in a_nodes.iter().enumerate() {
        a.push(ctx_err(&format!("a/{i}"), cert::parse_elem(&k, x))?);
    }
    let basis = match node.at("basis")? {
        Node::Str(s) if s == "none" => None,
        Node::List(v) if v.len() == 2 => Some((
            ctx_err("basis/0", cert::parse_point(&k, &v[0]))?,
            ctx_err("basis/1", cert::parse_point(&k, &v[1]))?,
        )),
        _ => return input("basis: expected \"none\" or two points"),
    };
    let mut gens = Vec::new();
    for (i, g) in node.list_at("generators")?.iter().enumerate() {
        gens.push(ctx_err(&format!("generators/{i}"), cert::parse_point(&k, g))?);
    }
    let stable = match node.str_at("stable")? {
        "none" => None,
        _ => Some(node.parse_at("stable")?),
    };
    let a: [_; 5] = a.try_into().unwrap();
    CurveOverL::new(a, basis, gens, stable)
}

fn parse_place(node: &Node, path: &str, level: u32) -> Result<SplitPlace> {
    Ok(SplitPlace {
        n: level,
        p: node.parse_at(&format!("{path}/p"))?,
        omega: node.parse_at(&format!("{path}/omega"))?,
    })
}

fn parse_place_cert(node: &Node, path: &str, k: &Cyclo) -> Result<PlaceCert> {
    let place = parse_place(node, &format!("{path}/place"), k.n())?;
    let pi = ctx_err(&format!("{path}/pi"), cert::parse_elem(k, node.at(&format!("{path}/pi"))?))?;
    let mut s_witnesses = Vec::new();
    for (i, w) in node.list_at(&format!("{path}/s_witnesses"))?.iter().enumerate() {
        let wp = format!("{path}/s_witnesses/{i}");
        s_witnesses.push(match w.str_at("kind")? {
            "real" => SWitness::Real,
            "tame" => SWitness::Tame { prime: w.parse_at("prime")? },
            "wild" => SWitness::Wild {
                prime: w.parse_at("prime")?,
                prec: w.parse_at("prec")?,
                root: w
                    .list_at("root")?
                    .iter()
                    .map(|x| x.parse_at::<i64>(""))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|_| crate::Error::Input(format!("{wp}/root: not integers")))?,
            },
            s => return input(format!("{wp}/kind: unknown witness kind {s:?}")),
        });
    }
    Ok(PlaceCert { place, pi, s_witnesses })
}

pub fn parse_pair(node: &Node, level: u32) -> Result<PrimePairCert> {
    let k = Cyclo::new(level)?;
    let mode = match node.str_at("pair/mode")? {
        "A" => Mode::A,
        "B" => Mode::B,
        s => return input(format!("pair/mode: unknown mode {s:?}")),
    };
    let mut division = Vec::new();
    for (i, d) in node.list_at("pair/division")?.iter().enumerate() {
        let p = format!("pair/division/{i}");
        division.push(DivisionWitness {
            point: ctx_err(&p, cert::parse_fp_point(d.at("point")?))?,
            root: ctx_err(&p, cert::parse_fp_point(d.at("root")?))?,
        });
    }
    let mut b4 = Vec::new();
    for (i, x) in node.list_at("pair/b4")?.iter().enumerate() {
        let p = format!("pair/b4/{i}");
        b4.push((
            ctx_err(&p, x.parse_at::<u32>("0"))?,
            ctx_err(&p, x.parse_at::<u64>("1"))?,
        ));
    }
    Ok(PrimePairCert {
        mode,
        n: node.parse_at("pair/n")?,
        v: parse_place_cert(node, "pair/v", &k)?,
        vp: parse_place_cert(node, "pair/vp", &k)?,
        group: (node.parse_at("pair/group/0")?, node.parse_at("pair/group/1")?),
        division,
        a4_residue: node.parse_at("pair/a4/residue")?,
        a4_order: node.parse_at("pair/a4/order")?,
        b4_residues: b4,
    })
}

pub(super) fn parse_inputs(node: &Node) -> Result<(Context, CurveOverL, PrimePairCert)> {
    let ctx = parse_context(node)?;
    let curve = ctx_err("curve", parse_curve(node.at("curve")?))?;
    let pair = parse_pair(node, curve.level())?;
    Ok((ctx, curve, pair))
}

pub(super) fn inputs_of(node: &Node) -> Node {
    let pick = |k: &str| node.get(k).cloned().unwrap_or(Node::s("missing"));
    Node::map([("context", pick("context")), ("curve", pick("curve")), ("pair", pick("pair"))])
}

/// Rebuilds a certificate value from its tree, rederiving everything but the inputs.
pub fn certificate_from_node(node: &Node) -> Result<Certificate> {
    match node.str_at("kind")? {
        "trivial" => Ok(Certificate::Trivial { digest: node.str_at("curve_digest")?.to_string() }),
        "single" => {
            let (ctx, curve, pair) = parse_inputs(node)?;
            Ok(Certificate::Single(Box::new(assemble(&curve, &ctx, &pair)?)))
        }
        "composite" => {
            let parts = node
                .list_at("parts")?
                .iter()
                .map(certificate_from_node)
                .collect::<Result<Vec<_>>>()?;
            if parts.len() < 2 {
                return input("parts: a composite needs two parts");
            }
            Ok(Certificate::Composite(parts))
        }
        s => input(format!("kind: unknown certificate kind {s:?}")),
    }
}
