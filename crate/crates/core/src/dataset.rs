//! Experiment triplets `(G, Z, Y)` and their JSON persistence.
//!
//! File layout:
//!
//! ```text
//! {"triplets": [{"n": 4, "edges": [[0,1],[1,2]], "z": [0,1,1,0], "y": [1,-1,1,1]}, ...]}
//! ```
//!
//! Ising responses are written as `-1`/`1` integers, Gaussian responses as
//! decimals. A `y` array made only of the integer literals `-1` and `1` is
//! read back as spins; anything else is read as reals.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::error::{Error, Result};
use crate::graph::{Assignment, Graph};

/// Observed responses for one network.
#[derive(Clone, Debug, PartialEq)]
pub enum Response {
    /// Ising responses in {-1, +1}.
    Spin(Vec<i8>),
    /// Gaussian responses.
    Real(Vec<f64>),
}

impl Response {
    pub fn spins(y: Vec<i8>) -> Result<Self> {
        if let Some(pos) = y.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::Validation(format!("response entry {pos} is {}, expected -1 or +1", y[pos])));
        }
        Ok(Response::Spin(y))
    }

    pub fn reals(y: Vec<f64>) -> Result<Self> {
        if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("response entry {pos} is not finite")));
        }
        Ok(Response::Real(y))
    }

    pub fn len(&self) -> usize {
        match self {
            Response::Spin(y) => y.len(),
            Response::Real(y) => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Response values as reals (spins map to ±1.0).
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Response::Spin(y) => y.iter().map(|&v| f64::from(v)).collect(),
            Response::Real(y) => y.clone(),
        }
    }

    pub fn as_spins(&self) -> Option<&[i8]> {
        match self {
            Response::Spin(y) => Some(y),
            Response::Real(_) => None,
        }
    }

    pub fn as_reals(&self) -> Option<&[f64]> {
        match self {
            Response::Real(y) => Some(y),
            Response::Spin(_) => None,
        }
    }
}

/// One network experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Triplet {
    pub graph: Graph,
    pub assignment: Assignment,
    pub response: Response,
}

impl Triplet {
    pub fn new(graph: Graph, assignment: Assignment, response: Response) -> Result<Self> {
        let t = Triplet { graph, assignment, response };
        t.validate()?;
        Ok(t)
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.num_nodes();
        if self.assignment.len() != n {
            return Err(Error::Validation(format!(
                "assignment has length {}, graph has {n} nodes",
                self.assignment.len()
            )));
        }
        if self.response.len() != n {
            return Err(Error::Validation(format!("response has length {}, graph has {n} nodes", self.response.len())));
        }
        Ok(())
    }
}

/// `K >= 1` triplets; the unit of fitting and bootstrapping.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentDataset {
    pub triplets: Vec<Triplet>,
}

impl ExperimentDataset {
    pub fn new(triplets: Vec<Triplet>) -> Result<Self> {
        let d = ExperimentDataset { triplets };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.triplets.is_empty() {
            return Err(Error::Validation("dataset has no triplets".into()));
        }
        let spin = matches!(self.triplets[0].response, Response::Spin(_));
        for (k, t) in self.triplets.iter().enumerate() {
            t.validate().map_err(|e| prefix(k, e))?;
            if matches!(t.response, Response::Spin(_)) != spin {
                return Err(Error::Validation(format!("triplet {k}: mixes spin and real responses across triplets")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn total_nodes(&self) -> usize {
        self.triplets.iter().map(Triplet::num_nodes).sum()
    }

    pub fn is_spin(&self) -> bool {
        self.triplets.iter().all(|t| matches!(t.response, Response::Spin(_)))
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = RawDataset { triplets: self.triplets.iter().map(RawTriplet::from_triplet).collect::<Result<_>>()? };
        serde_json::to_string(&raw).map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDataset = serde_json::from_str(text).map_err(|e| Error::from_json(e, "dataset"))?;
        let triplets = raw
            .triplets
            .into_iter()
            .enumerate()
            .map(|(k, t)| t.into_triplet().map_err(|e| prefix(k, e)))
            .collect::<Result<Vec<_>>>()?;
        ExperimentDataset::new(triplets)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| with_path(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| with_path(path, e))?)
    }
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn prefix(k: usize, e: Error) -> Error {
    match e {
        Error::Validation(msg) => Error::Validation(format!("triplet {k}: {msg}")),
        other => other,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    triplets: Vec<RawTriplet>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTriplet {
    n: usize,
    edges: Vec<[usize; 2]>,
    z: Vec<u8>,
    y: Vec<Number>,
}

impl RawTriplet {
    fn from_triplet(t: &Triplet) -> Result<Self> {
        let y = match &t.response {
            Response::Spin(y) => y.iter().map(|&v| Number::from(v)).collect(),
            Response::Real(y) => y
                .iter()
                .map(|&v| Number::from_f64(v).ok_or_else(|| Error::Validation("non-finite response".into())))
                .collect::<Result<_>>()?,
        };
        Ok(RawTriplet {
            n: t.graph.num_nodes(),
            edges: t.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
            z: t.assignment.as_slice().to_vec(),
            y,
        })
    }

    fn into_triplet(self) -> Result<Triplet> {
        let graph = Graph::new(self.n, self.edges.into_iter().map(|[u, v]| (u, v)))?;
        let assignment = Assignment::new(self.z)?;
        let is_spin = !self.y.is_empty() && self.y.iter().all(|v| matches!(v.as_i64(), Some(1) | Some(-1)));
        let response = if is_spin {
            Response::Spin(self.y.iter().map(|v| v.as_i64().unwrap_or(0) as i8).collect())
        } else {
            Response::reals(self.y.iter().map(|v| v.as_f64().unwrap_or(f64::NAN)).collect())?
        };
        Triplet::new(graph, assignment, response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentDataset {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let a =
            Triplet::new(g.clone(), Assignment::new(vec![0, 1, 1]).unwrap(), Response::spins(vec![1, -1, 1]).unwrap())
                .unwrap();
        let b = Triplet::new(g, Assignment::new(vec![1, 0, 0]).unwrap(), Response::spins(vec![-1, -1, 1]).unwrap())
            .unwrap();
        ExperimentDataset::new(vec![a, b]).unwrap()
    }

    #[test]
    fn spin_round_trip_through_file() {
        let d = small();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        d.save(&path).unwrap();
        assert_eq!(ExperimentDataset::load(&path).unwrap(), d);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains(r#""y":[1,-1,1]"#), "{text}");
    }

    #[test]
    fn real_responses_keep_decimal_form() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let t = Triplet::new(g, Assignment::new(vec![0, 1]).unwrap(), Response::reals(vec![1.0, -0.1 + 0.2]).unwrap())
            .unwrap();
        let d = ExperimentDataset::new(vec![t]).unwrap();
        let text = d.to_json().unwrap();
        assert!(text.contains("1.0"), "{text}");
        assert_eq!(ExperimentDataset::from_json(&text).unwrap(), d);
    }

    #[test]
    fn self_loop_in_file_is_rejected() {
        let text = r#"{"triplets":[{"n":6,"edges":[[5,5]],"z":[0,0,0,0,0,0],"y":[1,1,1,1,1,1]}]}"#;
        let err = ExperimentDataset::from_json(text).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("self-loop"), "{err}");
    }

    #[test]
    fn assignment_length_mismatch_is_rejected() {
        let text = r#"{"triplets":[{"n":3,"edges":[],"z":[0,1],"y":[1,1,1]}]}"#;
        let err = ExperimentDataset::from_json(text).unwrap_err();
        assert!(err.to_string().contains("triplet 0"), "{err}");
        assert!(err.to_string().contains("assignment"), "{err}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = ExperimentDataset::from_json("{\"triplets\": [\n{\"n\": 3,,}]}").unwrap_err();
        match err {
            Error::Parse { context, .. } => assert!(context.contains("line 2"), "{context}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(ExperimentDataset::from_json(r#"{"triplets":[]}"#).is_err());
    }
}
