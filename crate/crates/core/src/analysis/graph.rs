use std::collections::{BTreeMap, BTreeSet, VecDeque};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::table::RunTable;
use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Factor,
    Outcome,
}

/// A named factor or outcome. `columns` maps the node onto run-table
/// columns: exact names, or prefixes ending in `*`. When absent the node
/// maps to the column of the same name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct GraphNode {
    pub name: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
}

impl GraphNode {
    fn patterns(&self) -> Vec<&str> {
        match &self.columns {
            Some(c) => c.iter().map(String::as_str).collect(),
            None => vec![self.name.as_str()],
        }
    }

    pub fn matches_column(&self, column: &str) -> bool {
        self.patterns().into_iter().any(|p| match p.strip_suffix('*') {
            Some(prefix) => column.starts_with(prefix),
            None => column == p,
        })
    }
}

/// Declared causal structure over benchmark factors and outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CausalGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<[String; 2]>,
}

const DEFAULT_GRAPH: &str = include_str!("../../data/default_graph.json");

impl CausalGraph {
    /// The shipped default: dataset properties, model family,
    /// hyperparameters, hardware and software each point at accuracy, time
    /// and resource outcomes, and the model family also drives the
    /// hyperparameters.
    pub fn default_graph() -> CausalGraph {
        serde_json::from_str(DEFAULT_GRAPH).expect("bundled graph parses")
    }

    pub fn from_json(text: &str) -> Result<CausalGraph, AnalysisError> {
        let g: CausalGraph =
            serde_json::from_str(text).map_err(|e| AnalysisError::InvalidGraph(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn node(&self, name: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn require_node(&self, name: &str) -> Result<&GraphNode, AnalysisError> {
        self.node(name).ok_or_else(|| AnalysisError::UnknownNode(name.to_string()))
    }

    /// Checks names are unique, edges reference declared nodes, no edge
    /// leaves an outcome for a factor, and the graph is acyclic.
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let mut kinds = BTreeMap::new();
        for n in &self.nodes {
            if kinds.insert(n.name.as_str(), n.kind).is_some() {
                return Err(AnalysisError::InvalidGraph(format!("duplicate node `{}`", n.name)));
            }
        }
        for [from, to] in &self.edges {
            let (Some(fk), Some(tk)) = (kinds.get(from.as_str()), kinds.get(to.as_str())) else {
                return Err(AnalysisError::InvalidGraph(format!("edge {from} -> {to} names an undeclared node")));
            };
            if *fk == NodeKind::Outcome && *tk == NodeKind::Factor {
                return Err(AnalysisError::InvalidGraph(format!("outcome `{from}` points at factor `{to}`")));
            }
        }
        // Kahn's algorithm; leftovers mean a cycle.
        let mut indegree: BTreeMap<&str, usize> = kinds.keys().map(|k| (*k, 0)).collect();
        for [_, to] in &self.edges {
            *indegree.get_mut(to.as_str()).unwrap() += 1;
        }
        let mut queue: VecDeque<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut seen = 0;
        while let Some(n) = queue.pop_front() {
            seen += 1;
            for [from, to] in &self.edges {
                if from == n {
                    let d = indegree.get_mut(to.as_str()).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        queue.push_back(to);
                    }
                }
            }
        }
        if seen != kinds.len() {
            return Err(AnalysisError::InvalidGraph("graph has a cycle".into()));
        }
        Ok(())
    }

    pub fn parents(&self, node: &str) -> BTreeSet<&str> {
        self.edges.iter().filter(|[_, to]| to == node).map(|[from, _]| from.as_str()).collect()
    }

    /// Strict ancestors of `node`.
    pub fn ancestors(&self, node: &str) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&str> = self.parents(node).into_iter().collect();
        while let Some(n) = stack.pop() {
            if out.insert(n) {
                stack.extend(self.parents(n));
            }
        }
        out
    }

    /// Table columns covered by `node`, in table order.
    pub fn columns_of(&self, node: &GraphNode, table: &RunTable) -> Vec<String> {
        table.column_names().filter(|c| node.matches_column(c)).map(str::to_string).collect()
    }

    /// The first node whose column mapping covers `column`.
    pub fn node_for_column(&self, column: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.matches_column(column))
    }

    /// Resolves a name given by the caller: a node name, else a column
    /// belonging to some node.
    pub fn resolve(&self, name: &str) -> Result<&GraphNode, AnalysisError> {
        self.node(name)
            .or_else(|| self.node_for_column(name))
            .ok_or_else(|| AnalysisError::UnknownNode(name.to_string()))
    }
}
