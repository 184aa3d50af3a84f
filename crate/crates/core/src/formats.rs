//! JSON wire formats: marked graphs, topological representatives, subgroup
//! systems and automorphisms. Field order is fixed by the struct layout so
//! emitted documents are diffable.

use crate::markedgraph::{Edge, GraphError, MarkedGraph};
use crate::stallings::{StallingsError, SubgroupSystem};
use crate::trainmap::{edge_map_to_paths, TopRep, TrainMapError};
use crate::words::{BasisAutomorphism, Word, WordError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Train(#[from] TrainMapError),
    #[error(transparent)]
    Stallings(#[from] StallingsError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("validation: {0}")]
    Validation(String),
}

/// `{"rank": 3, "images": ["a", "bc", "b"]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutomorphismDoc {
    pub rank: usize,
    pub images: Vec<String>,
}

impl AutomorphismDoc {
    pub fn to_automorphism(&self) -> Result<BasisAutomorphism, FormatError> {
        let images = self
            .images
            .iter()
            .map(|s| Word::parse(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BasisAutomorphism::new(self.rank, images)?)
    }

    pub fn of(aut: &BasisAutomorphism) -> Self {
        AutomorphismDoc {
            rank: aut.rank(),
            images: aut.images().iter().map(|w| w.to_string().replace('1', "")).collect(),
        }
    }
}

/// `{"components": [["a","b"], ["c"]]}` — generator word lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub components: Vec<Vec<String>>,
}

impl SystemDoc {
    pub fn to_system(&self, default_rank: Option<usize>) -> Result<SubgroupSystem, FormatError> {
        let mut lists = Vec::new();
        let mut max_index = 2;
        for comp in &self.components {
            let words = comp
                .iter()
                .map(|s| Word::parse(s))
                .collect::<Result<Vec<_>, _>>()?;
            for w in &words {
                max_index = max_index.max(w.max_index());
            }
            lists.push(words);
        }
        let rank = self.rank.or(default_rank).unwrap_or(max_index);
        if rank < max_index {
            return Err(FormatError::Validation(format!(
                "system uses generator index {max_index} beyond rank {rank}"
            )));
        }
        if lists.is_empty() {
            return Ok(SubgroupSystem::empty(rank));
        }
        Ok(SubgroupSystem::from_generator_lists(rank, &lists)?)
    }

    pub fn of(system: &SubgroupSystem) -> Self {
        SystemDoc {
            rank: Some(system.rank()),
            components: system
                .generator_lists()
                .iter()
                .map(|gens| gens.iter().map(|w| w.to_string()).collect())
                .collect(),
        }
    }
}

/// Graph section of the wire format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub vertices: usize,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub tree: Vec<String>,
    #[serde(default)]
    pub basis: BTreeMap<String, String>,
}

impl GraphDoc {
    pub fn to_graph(&self) -> Result<MarkedGraph, FormatError> {
        let mut basis = BTreeMap::new();
        let mut max_index = 0usize;
        for (id, word) in &self.basis {
            let idx = self
                .edges
                .iter()
                .position(|e| &e.id == id)
                .ok_or_else(|| FormatError::Graph(GraphError::UnknownEdge(id.clone())))?;
            let w = Word::parse(word)?;
            max_index = max_index.max(w.max_index());
            basis.insert(idx, w);
        }
        let tree = self
            .tree
            .iter()
            .map(|id| {
                self.edges
                    .iter()
                    .position(|e| &e.id == id)
                    .ok_or_else(|| FormatError::Graph(GraphError::UnknownEdge(id.clone())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rank = self.rank.unwrap_or(max_index.max(2));
        Ok(MarkedGraph::new(
            rank,
            self.vertices,
            self.edges.clone(),
            tree,
            basis,
        )?)
    }

    pub fn of(graph: &MarkedGraph) -> Self {
        GraphDoc {
            rank: Some(graph.rank()),
            vertices: graph.vertex_count(),
            edges: graph.edge_list().to_vec(),
            tree: graph
                .tree_edges()
                .iter()
                .map(|&i| graph.edge_list()[i].id.clone())
                .collect(),
            basis: graph
                .basis_assignment()
                .iter()
                .map(|(&i, w)| (graph.edge_list()[i].id.clone(), w.to_string()))
                .collect(),
        }
    }
}

/// Topological representative: graph section plus the edge map (by edge id,
/// images as edge-id strings with capitals for reversals), an optional
/// vertex map, and the recorded rotationlessness assertion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopRepDoc {
    #[serde(flatten)]
    pub graph: GraphDoc,
    pub edge_map: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_map: Option<Vec<usize>>,
    #[serde(default)]
    pub rotationless: bool,
}

impl TopRepDoc {
    pub fn to_toprep(&self) -> Result<TopRep, FormatError> {
        let graph = self.graph.to_graph()?;
        let images = edge_map_to_paths(&graph, &self.edge_map)?;
        let vertex_map = match &self.vertex_map {
            Some(v) => v.clone(),
            None => {
                // Infer: each vertex maps to the origin of the image of any
                // edge leaving it (trivial for roses).
                let mut vm = vec![usize::MAX; graph.vertex_count()];
                for (i, e) in graph.edge_list().iter().enumerate() {
                    if let Some(first) = images[i].edges().first() {
                        if vm[e.from] == usize::MAX {
                            vm[e.from] = graph.origin(*first);
                        }
                        if vm[e.to] == usize::MAX {
                            vm[e.to] = graph.terminus(*images[i].edges().last().unwrap());
                        }
                    }
                }
                vm.into_iter().map(|v| if v == usize::MAX { 0 } else { v }).collect()
            }
        };
        Ok(TopRep::new(graph, vertex_map, images, self.rotationless)?)
    }

    pub fn of(rep: &TopRep) -> Self {
        let graph = rep.graph();
        let edge_map = graph
            .edge_list()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let img = rep.edge_image(crate::markedgraph::OrientedEdge::forward(i));
                (e.id.clone(), graph.describe_path(&img))
            })
            .collect();
        TopRepDoc {
            graph: GraphDoc::of(graph),
            edge_map,
            vertex_map: Some(
                (0..graph.vertex_count())
                    .map(|v| rep.vertex_image(v))
                    .collect(),
            ),
            rotationless: rep.rotationless_asserted(),
        }
    }
}

pub fn toprep_from_json(json: &str) -> Result<TopRep, FormatError> {
    let doc: TopRepDoc = serde_json::from_str(json)?;
    doc.to_toprep()
}

pub fn system_from_json(json: &str, default_rank: Option<usize>) -> Result<SubgroupSystem, FormatError> {
    let doc: SystemDoc = serde_json::from_str(json)?;
    doc.to_system(default_rank)
}

pub fn automorphism_from_json(json: &str) -> Result<BasisAutomorphism, FormatError> {
    let doc: AutomorphismDoc = serde_json::from_str(json)?;
    doc.to_automorphism()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toprep_round_trip() {
        let json = r#"{
            "rank": 3,
            "vertices": 1,
            "edges": [
                {"id": "a", "from": 0, "to": 0, "stratum": 1},
                {"id": "b", "from": 0, "to": 0, "stratum": 2},
                {"id": "c", "from": 0, "to": 0, "stratum": 2}
            ],
            "tree": [],
            "basis": {"a": "a", "b": "b", "c": "c"},
            "edge_map": {"a": "a", "b": "bc", "c": "b"},
            "rotationless": true
        }"#;
        let rep = toprep_from_json(json).unwrap();
        assert!(rep.validate().valid);
        let doc = TopRepDoc::of(&rep);
        let rep2 = doc.to_toprep().unwrap();
        assert_eq!(
            TopRepDoc::of(&rep2).edge_map,
            doc.edge_map
        );
    }

    #[test]
    fn unknown_edge_in_map_is_an_error() {
        let json = r#"{
            "vertices": 1,
            "edges": [
                {"id": "a", "from": 0, "to": 0, "stratum": 1},
                {"id": "b", "from": 0, "to": 0, "stratum": 1}
            ],
            "basis": {"a": "a", "b": "b"},
            "edge_map": {"a": "a", "b": "bq"}
        }"#;
        assert!(toprep_from_json(json).is_err());
    }

    #[test]
    fn system_round_trip() {
        let doc: SystemDoc =
            serde_json::from_str(r#"{"components": [["a", "b"], ["c"]]}"#).unwrap();
        let sys = doc.to_system(Some(3)).unwrap();
        assert_eq!(sys.len(), 2);
        let back = SystemDoc::of(&sys);
        let sys2 = back.to_system(None).unwrap();
        assert_eq!(sys, sys2);
    }

    #[test]
    fn automorphism_docs() {
        let aut = automorphism_from_json(r#"{"rank": 3, "images": ["a", "bc", "b"]}"#).unwrap();
        assert!(aut.is_surjective());
        let doc = AutomorphismDoc::of(&aut);
        assert_eq!(doc.images, vec!["a", "bc", "b"]);
    }
}
