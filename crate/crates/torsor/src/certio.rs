//! Certificates as canonical JSON: sorted keys, every leaf a string.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};
use torsor_core::cert::Node;

use crate::CliError;

pub fn to_json(n: &Node) -> Value {
    match n {
        Node::Str(s) => Value::String(s.clone()),
        Node::List(v) => Value::Array(v.iter().map(to_json).collect()),
        Node::Map(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), to_json(v))).collect::<Map<_, _>>()),
    }
}

pub fn from_json(v: &Value) -> Result<Node, CliError> {
    fn go(v: &Value, path: &str) -> Result<Node, CliError> {
        let at = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}/{k}") };
        match v {
            Value::String(s) => Ok(Node::s(s)),
            Value::Array(a) => a
                .iter()
                .enumerate()
                .map(|(i, x)| go(x, &at(&i.to_string())))
                .collect::<Result<Vec<_>, _>>()
                .map(Node::List),
            Value::Object(m) => m
                .iter()
                .map(|(k, x)| Ok((k.clone(), go(x, &at(k))?)))
                .collect::<Result<std::collections::BTreeMap<_, _>, CliError>>()
                .map(Node::Map),
            _ => Err(CliError::Parse(format!("{path}: leaves must be strings"))),
        }
    }
    go(v, "")
}

pub fn render(n: &Node) -> String {
    let mut s = serde_json::to_string_pretty(&to_json(n)).expect("string-only tree");
    s.push('\n');
    s
}

pub fn parse(text: &str) -> Result<Node, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    from_json(&v)
}

pub fn read(path: &Path) -> Result<Node, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}


#[cfg(test)]
mod props {
    use proptest::prelude::*;

    use super::*;

    fn node() -> impl Strategy<Value = Node> {
        let leaf = "[ -~]{0,8}".prop_map(|s| Node::s(s));
        leaf.prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 0..4).prop_map(Node::List),
                prop::collection::btree_map("[a-z_]{1,6}", inner, 0..4).prop_map(Node::Map),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(n in node()) {
            let text = render(&n);
            prop_assert_eq!(parse(&text).unwrap(), n.clone());
            prop_assert_eq!(render(&parse(&text).unwrap()), text);
        }
    }
}
