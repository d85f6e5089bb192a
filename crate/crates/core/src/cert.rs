//! A key-value tree for certificates, with canonical ordering and path-level diffs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cyclo::{Cyclo, CycloElem};
use crate::ecq::{Point, PointFp, PointL};
use crate::error::{input, Result};
use crate::localfield::FactoredElem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Str(String),
    List(Vec<Node>),
    Map(BTreeMap<String, Node>),
}

impl Node {
    pub fn s(x: impl ToString) -> Node {
        Node::Str(x.to_string())
    }

    pub fn map<K: ToString>(pairs: impl IntoIterator<Item = (K, Node)>) -> Node {
        Node::Map(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn list(items: impl IntoIterator<Item = Node>) -> Node {
        Node::List(items.into_iter().collect())
    }

    pub fn get(&self, key: &str) -> Option<&Node> {
        match self {
            Node::Map(m) => m.get(key),
            Node::List(v) => key.parse::<usize>().ok().and_then(|i| v.get(i)),
            Node::Str(_) => None,
        }
    }

    /// Follows a slash-separated path.
    pub fn at(&self, path: &str) -> Result<&Node> {
        let mut cur = self;
        for part in path.split('/').filter(|s| !s.is_empty()) {
            match cur.get(part) {
                Some(n) => cur = n,
                None => return input(format!("missing field {path}")),
            }
        }
        Ok(cur)
    }

    pub fn at_mut(&mut self, path: &str) -> Option<&mut Node> {
        let mut cur = self;
        for part in path.split('/').filter(|s| !s.is_empty()) {
            cur = match cur {
                Node::Map(m) => m.get_mut(part)?,
                Node::List(v) => v.get_mut(part.parse::<usize>().ok()?)?,
                Node::Str(_) => return None,
            };
        }
        Some(cur)
    }

    pub fn str_at(&self, path: &str) -> Result<&str> {
        match self.at(path)? {
            Node::Str(s) => Ok(s),
            _ => input(format!("field {path} is not a string")),
        }
    }

    pub fn list_at(&self, path: &str) -> Result<&[Node]> {
        match self.at(path)? {
            Node::List(v) => Ok(v),
            _ => input(format!("field {path} is not a list")),
        }
    }

    pub fn parse_at<T: FromStr>(&self, path: &str) -> Result<T> {
        let s = self.str_at(path)?;
        match s.parse() {
            Ok(v) => Ok(v),
            Err(_) => input(format!("field {path}: cannot parse {s:?}")),
        }
    }

    /// Every leaf as (path, value), in canonical order.
    pub fn leaves(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.walk(String::new(), &mut out);
        out
    }

    fn walk(&self, prefix: String, out: &mut Vec<(String, String)>) {
        let join = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}/{k}")
            }
        };
        match self {
            Node::Str(s) => out.push((prefix, s.clone())),
            Node::List(v) => {
                if v.is_empty() {
                    out.push((prefix.clone(), String::from("[]")));
                }
                for (i, n) in v.iter().enumerate() {
                    n.walk(join(&i.to_string()), out);
                }
            }
            Node::Map(m) => {
                if m.is_empty() {
                    out.push((prefix.clone(), String::from("{}")));
                }
                for (k, n) in m {
                    n.walk(join(k), out);
                }
            }
        }
    }
}

/// Paths whose values differ between the stored and the recomputed tree.
pub fn diff(stored: &Node, recomputed: &Node) -> Vec<String> {
    let a: BTreeMap<String, String> = stored.leaves().into_iter().collect();
    let b: BTreeMap<String, String> = recomputed.leaves().into_iter().collect();
    let mut out = Vec::new();
    for (k, v) in &a {
        match b.get(k) {
            None => out.push(format!("{k}: unexpected field")),
            Some(w) if w != v => out.push(format!("{k}: stored {v}, recomputed {w}")),
            _ => {}
        }
    }
    for k in b.keys() {
        if !a.contains_key(k) {
            out.push(format!("{k}: missing"));
        }
    }
    out
}

pub fn rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || input(format!("not an exact rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let (Ok(a), Ok(b)) = (BigInt::from_str(num), BigInt::from_str(den)) else {
        return bad();
    };
    if b == BigInt::from(0) {
        return bad();
    }
    Ok(BigRational::new(a, b))
}

pub fn elem_node(x: &CycloElem) -> Node {
    Node::list(x.coeffs().iter().map(Node::s))
}

pub fn parse_elem(k: &Cyclo, n: &Node) -> Result<CycloElem> {
    match n {
        Node::Str(s) => Ok(k.from_rational(rational(s)?)),
        Node::List(v) => {
            let c = v
                .iter()
                .map(|x| match x {
                    Node::Str(s) => rational(s),
                    _ => input("coefficient is not a string"),
                })
                .collect::<Result<Vec<_>>>()?;
            if c.len() > k.n() as usize {
                return input(format!("{} coordinates given at level {}", c.len(), k.n()));
            }
            k.from_coeffs(c)
        }
        Node::Map(_) => input("field element must be a string or a list"),
    }
}

pub fn factored_node(x: &FactoredElem) -> Node {
    Node::list(
        x.factors()
            .iter()
            .map(|(b, e)| Node::map([("base", elem_node(b)), ("exp", Node::s(e))])),
    )
}

pub fn parse_factored(k: &Cyclo, n: &Node) -> Result<FactoredElem> {
    let Node::List(v) = n else {
        return input("factored element must be a list");
    };
    let mut f = Vec::new();
    for item in v {
        f.push((parse_elem(k, item.at("base")?)?, item.parse_at::<i64>("exp")?));
    }
    FactoredElem::new(k.n(), f)
}

pub fn point_node(p: &PointL) -> Node {
    match p {
        Point::Inf => Node::s("O"),
        Point::Aff(x, y) => Node::list([elem_node(x), elem_node(y)]),
    }
}

pub fn parse_point(k: &Cyclo, n: &Node) -> Result<PointL> {
    match n {
        Node::Str(s) if s == "O" => Ok(Point::Inf),
        Node::List(v) if v.len() == 2 => Ok(Point::Aff(parse_elem(k, &v[0])?, parse_elem(k, &v[1])?)),
        _ => input("point must be \"O\" or a pair of coordinates"),
    }
}

pub fn fp_point_node(p: &PointFp) -> Node {
    match p {
        Point::Inf => Node::s("O"),
        Point::Aff(x, y) => Node::list([Node::s(x), Node::s(y)]),
    }
}

pub fn parse_fp_point(n: &Node) -> Result<PointFp> {
    match n {
        Node::Str(s) if s == "O" => Ok(Point::Inf),
        Node::List(v) if v.len() == 2 => Ok(Point::Aff(v[0].parse_at("")?, v[1].parse_at("")?)),
        _ => input("point must be \"O\" or a pair of residues"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn paths_and_diffs() {
        let t = Node::map([
            ("b", Node::list([Node::s(1), Node::s(2)])),
            ("a", Node::map([("x", Node::s("q"))])),
        ]);
        assert_eq!(t.str_at("a/x").unwrap(), "q");
        assert_eq!(t.parse_at::<u32>("b/1").unwrap(), 2);
        assert!(t.at("b/5").is_err());
        let leaves: Vec<String> = t.leaves().into_iter().map(|l| l.0).collect();
        assert_eq!(leaves, vec!["a/x", "b/0", "b/1"]);
        let mut u = t.clone();
        *u.at_mut("b/0").unwrap() = Node::s(7);
        let d = diff(&t, &u);
        assert_eq!(d.len(), 1);
        assert!(d[0].starts_with("b/0"));
    }

    #[test]
    fn element_round_trip() {
        let k = Cyclo::new(9).unwrap();
        let x = k.from_coeffs(vec![rational("1/3").unwrap(), rational("-7").unwrap()]).unwrap();
        assert_eq!(parse_elem(&k, &elem_node(&x)).unwrap(), x);
        assert!(rational("1.5").is_err());
        assert!(rational("2/0").is_err());
        let p = Point::Aff(x.clone(), k.zeta());
        assert_eq!(parse_point(&k, &point_node(&p)).unwrap(), p);
        let f = FactoredElem::new(9, vec![(x, 3), (k.zeta(), -1)]).unwrap();
        assert_eq!(parse_factored(&k, &factored_node(&f)).unwrap(), f);
        let q: PointFp = Point::Aff(3, 4);
        assert_eq!(parse_fp_point(&fp_point_node(&q)).unwrap(), q);
    }
}
