//! Run configuration in TOML: a curve block, parameters, sieve bounds, output path and seed.

use std::path::PathBuf;

use serde::Deserialize;
use toml::{Spanned, Value};
use torsor_core::cert::Node;
use torsor_core::construct::{parse_curve, Route};
use torsor_core::ecq::CurveOverL;
use torsor_core::sieve::{Bounds, Mode};
use torsor_core::Error;

use crate::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    curve: Spanned<RawCurve>,
    params: Option<RawParams>,
    bounds: Option<RawBounds>,
    output: Option<RawOutput>,
    seed: Option<Spanned<Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    level: Spanned<Value>,
    a: Spanned<Value>,
    basis: Option<Spanned<Value>>,
    generators: Option<Spanned<Value>>,
    stable: Option<Spanned<Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    n: Option<Spanned<Value>>,
    ell: Option<Spanned<Value>>,
    mode: Option<Spanned<String>>,
    route: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    prime_bound: Option<Spanned<Value>>,
    coeff_bound: Option<Spanned<Value>>,
    unit_window: Option<Spanned<Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    certificate: Option<Spanned<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub curve: CurveOverL,
    pub n: Option<u32>,
    pub ell: Option<u32>,
    pub mode: Mode,
    pub route: Route,
    pub bounds: Bounds,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

struct Src<'a> {
    text: &'a str,
}

impl Src<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn err<T>(&self, field: &str, span: std::ops::Range<usize>, msg: impl Into<String>) -> Result<T, CliError> {
        Err(CliError::Config {
            line: self.line(span.start),
            field: field.to_string(),
            msg: msg.into(),
        })
    }

    /// Exact values only: integers and strings, nested in arrays.
    fn node(&self, field: &str, v: &Spanned<Value>) -> Result<Node, CliError> {
        fn go(v: &Value) -> Result<Node, &'static str> {
            match v {
                Value::String(s) => Ok(Node::s(s)),
                Value::Integer(i) => Ok(Node::s(i)),
                Value::Array(a) => a.iter().map(go).collect::<Result<Vec<_>, _>>().map(Node::List),
                Value::Float(_) => Err("floats are not exact; write an integer or a fraction string"),
                _ => Err("expected an integer, a string or an array"),
            }
        }
        match go(v.get_ref()) {
            Ok(n) => Ok(n),
            Err(m) => self.err(field, v.span(), m),
        }
    }

    fn int<T: std::str::FromStr>(&self, field: &str, v: &Spanned<Value>) -> Result<T, CliError> {
        let s = match v.get_ref() {
            Value::Integer(i) => i.to_string(),
            Value::String(s) => s.trim().to_string(),
            Value::Float(_) => return self.err(field, v.span(), "floats are not exact"),
            _ => return self.err(field, v.span(), "expected an integer"),
        };
        match s.parse() {
            Ok(x) => Ok(x),
            Err(_) => self.err(field, v.span(), format!("not a valid integer: {s:?}")),
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let src = Src { text };
    let raw: RawConfig = match toml::from_str(text) {
        Ok(r) => r,
        Err(e) => {
            let line = e.span().map(|s| src.line(s.start)).unwrap_or(0);
            return Err(CliError::Config {
                line,
                field: String::from("-"),
                msg: e.message().to_string(),
            });
        }
    };
    let c = raw.curve.get_ref();
    let mut fields: Vec<(&str, &Spanned<Value>)> = vec![("level", &c.level), ("a", &c.a)];
    if let Some(b) = &c.basis {
        fields.push(("basis", b));
    }
    if let Some(g) = &c.generators {
        fields.push(("generators", g));
    }
    if let Some(s) = &c.stable {
        fields.push(("stable", s));
    }
    let mut block = Vec::new();
    for (k, v) in &fields {
        block.push((k.to_string(), src.node(&format!("curve.{k}"), v)?));
    }
    if c.basis.is_none() {
        block.push((String::from("basis"), Node::s("none")));
    }
    if c.generators.is_none() {
        block.push((String::from("generators"), Node::List(Vec::new())));
    }
    if c.stable.is_none() {
        block.push((String::from("stable"), Node::s("none")));
    }
    let curve = match parse_curve(&Node::map(block)) {
        Ok(e) => e,
        Err(Error::Input(m)) => {
            let head = m.split(['/', ':']).next().unwrap_or("");
            let (field, span) = match fields.iter().find(|(k, _)| *k == head) {
                Some((k, v)) => (format!("curve.{k}"), v.span()),
                None => (String::from("curve"), raw.curve.span()),
            };
            return src.err(&field, span, m);
        }
        Err(e) => return Err(CliError::Core(e)),
    };

    let mut cfg = RunConfig {
        curve,
        n: None,
        ell: None,
        mode: Mode::A,
        route: Route::Direct,
        bounds: Bounds::default(),
        seed: 0,
        out: None,
    };
    if let Some(p) = &raw.params {
        if let Some(v) = &p.n {
            cfg.n = Some(src.int("params.n", v)?);
        }
        if let Some(v) = &p.ell {
            cfg.ell = Some(src.int("params.ell", v)?);
        }
        if let Some(m) = &p.mode {
            cfg.mode = match parse_mode(m.get_ref()) {
                Some(x) => x,
                None => return src.err("params.mode", m.span(), "expected \"A\" or \"B\""),
            };
        }
        if let Some(r) = &p.route {
            cfg.route = match r.get_ref().as_str() {
                "direct" => Route::Direct,
                "doubled" => Route::Doubled,
                _ => return src.err("params.route", r.span(), "expected \"direct\" or \"doubled\""),
            };
        }
    }
    if let Some(b) = &raw.bounds {
        if let Some(v) = &b.prime_bound {
            cfg.bounds.prime_bound = src.int("bounds.prime_bound", v)?;
        }
        if let Some(v) = &b.coeff_bound {
            cfg.bounds.coeff_bound = src.int("bounds.coeff_bound", v)?;
        }
        if let Some(v) = &b.unit_window {
            cfg.bounds.unit_window = src.int("bounds.unit_window", v)?;
        }
    }
    if let Some(v) = &raw.seed {
        cfg.seed = src.int("seed", v)?;
    }
    if let Some(o) = &raw.output {
        cfg.out = o.certificate.as_ref().map(|s| PathBuf::from(s.get_ref()));
    }
    Ok(cfg)
}

pub fn parse_mode(s: &str) -> Option<Mode> {
    match s {
        "A" | "a" => Some(Mode::A),
        "B" | "b" => Some(Mode::B),
        _ => None,
    }
}
