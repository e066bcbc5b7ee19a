//! Reading graph documents and decomposition bundles, and the error type
//! that maps failures to exit codes.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use mso_td::graph_core::{graph_from_doc, Graph, GraphDoc, GraphError};
use mso_td::tree_decomposition::{DecompositionDoc, TreeDecomposition};

/// Failure with its exit code and JSON `kind`.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, kind: "usage", message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, kind: "input", message: message.into() }
    }

    pub fn budget(message: impl Into<String>) -> Failure {
        Failure { code: 3, kind: "budget", message: message.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.message, "kind": self.kind })
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Failure {
        Failure::input(e.to_string())
    }
}

/// Graph plus decomposition, the format `decompose` writes and the
/// decomposition consumers read.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub graph: GraphDoc,
    pub decomposition: DecompositionDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
}

/// Either input shape.
pub enum Input {
    Graph(GraphDoc),
    Bundle(Bundle),
}

pub fn read_text(path: Option<&Path>) -> Result<String, Failure> {
    let mut text = String::new();
    match path {
        Some(p) => text = fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
        None => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::input(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

/// Inline JSON, or `@path` to read it from a file.
pub fn inline_or_file(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(p) => read_text(Some(Path::new(p))),
        None => Ok(arg.to_string()),
    }
}

fn located(e: serde_json::Error, what: &str) -> Failure {
    Failure::input(format!("{what}: {e}"))
}

pub fn parse_input(text: &str) -> Result<Input, Failure> {
    let probe: Value = serde_json::from_str(text).map_err(|e| located(e, "malformed JSON"))?;
    if probe.get("decomposition").is_some() {
        let b: Bundle = serde_json::from_str(text).map_err(|e| located(e, "bad decomposition bundle"))?;
        Ok(Input::Bundle(b))
    } else {
        let d: GraphDoc = serde_json::from_str(text).map_err(|e| located(e, "bad graph document"))?;
        Ok(Input::Graph(d))
    }
}

pub fn read_input(path: Option<&Path>) -> Result<Input, Failure> {
    parse_input(&read_text(path)?)
}

pub fn read_graph_doc(path: Option<&Path>) -> Result<(Graph, GraphDoc), Failure> {
    match read_input(path)? {
        Input::Graph(d) => Ok((graph_from_doc(&d)?, d)),
        Input::Bundle(b) => Ok((graph_from_doc(&b.graph)?, b.graph)),
    }
}

pub fn read_bundle(path: Option<&Path>) -> Result<(Graph, TreeDecomposition, Bundle), Failure> {
    match read_input(path)? {
        Input::Bundle(b) => {
            let g = graph_from_doc(&b.graph)?;
            let td = TreeDecomposition::from_doc(&g, &b.decomposition).map_err(|e| Failure::input(e.to_string()))?;
            Ok((g, td, b))
        }
        Input::Graph(_) => Err(Failure::input("expected a decomposition bundle with `graph` and `decomposition`")),
    }
}

/// Labelled pair list, `[["a","b"], ...]`.
pub fn parse_pairs(text: &str) -> Result<Vec<[String; 2]>, Failure> {
    serde_json::from_str(text).map_err(|e| located(e, "expected a list of label pairs"))
}
