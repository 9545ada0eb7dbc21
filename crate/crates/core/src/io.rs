//! JSON interchange for tables, canonical forms and networks.
//!
//! Variables and nodes are 0-based. Segments are written `"L:j"` or `"U:j"`.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::{build, CanonicalNcf, LayerEntry};
use crate::error::{domain, Result};
use crate::field::{PrimeModulus, Segment};
use crate::network::{Network, Node};
use crate::table::TruthTable;

#[derive(Debug, Serialize, Deserialize)]
struct TableDoc {
    p: u32,
    n: usize,
    values: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CanonicalDoc {
    p: u32,
    n: usize,
    layers: Vec<Vec<(usize, String)>>,
    constants: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    inputs: Vec<usize>,
    table: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkDoc {
    p: u32,
    nodes: Vec<NodeDoc>,
}

fn to_value<T: Serialize>(doc: &T) -> Value {
    serde_json::to_value(doc).expect("documents serialize")
}

fn from_value<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T> {
    T::deserialize(v).map_err(|e| domain(format!("malformed {what}: {e}")))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| domain(format!("invalid JSON: {e}")))
}

pub fn table_to_json(f: &TruthTable) -> Value {
    to_value(&TableDoc { p: f.modulus().get(), n: f.arity(), values: f.values().to_vec() })
}

pub fn table_from_json(v: &Value) -> Result<TruthTable> {
    let doc: TableDoc = from_value(v, "truth table")?;
    TruthTable::new(PrimeModulus::new(doc.p)?, doc.n, doc.values)
}

pub fn canonical_to_json(c: &CanonicalNcf) -> Value {
    let layers = c
        .layers()
        .iter()
        .map(|layer| layer.iter().map(|e| (e.var, e.segment.to_string())).collect())
        .collect();
    to_value(&CanonicalDoc { p: c.modulus().get(), n: c.arity(), layers, constants: c.constants().to_vec() })
}

pub fn canonical_from_json(v: &Value) -> Result<CanonicalNcf> {
    let doc: CanonicalDoc = from_value(v, "canonical form")?;
    let p = PrimeModulus::new(doc.p)?;
    let layers = doc
        .layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|(var, seg)| Ok(LayerEntry { var: *var, segment: Segment::parse(p, seg)? }))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    CanonicalNcf::new(p, doc.n, layers, doc.constants)
}

/// Reads either a table (`values`) or a canonical form (`layers`).
pub fn function_from_json(v: &Value) -> Result<TruthTable> {
    match v {
        Value::Object(m) if m.contains_key("values") => table_from_json(v),
        Value::Object(m) if m.contains_key("layers") => Ok(build(&canonical_from_json(v)?)),
        _ => Err(domain("expected a truth table (`values`) or a canonical form (`layers`)")),
    }
}

pub fn network_to_json(net: &Network) -> Value {
    let nodes = net
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, node)| NodeDoc { id, inputs: node.inputs.clone(), table: node.table.values().to_vec() })
        .collect();
    to_value(&NetworkDoc { p: net.modulus().get(), nodes })
}

pub fn network_from_json(v: &Value) -> Result<Network> {
    let doc: NetworkDoc = from_value(v, "network")?;
    let p = PrimeModulus::new(doc.p)?;
    let mut docs = doc.nodes;
    docs.sort_by_key(|d| d.id);
    if docs.iter().enumerate().any(|(i, d)| d.id != i) {
        return Err(domain("node ids must be 0..N-1, each once"));
    }
    let nodes = docs
        .into_iter()
        .map(|d| Ok(Node { table: TruthTable::new(p, d.inputs.len(), d.table)?, inputs: d.inputs }))
        .collect::<Result<Vec<_>>>()?;
    Network::new(p, nodes)
}

/// `"num/den"` in lowest terms; integers keep the `/1`.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
