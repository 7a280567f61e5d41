//! On-disk formats.
//!
//! **Model file** (TOML, `format = "bbpl-model"`, `version = 1`):
//!
//! ```toml
//! format = "bbpl-model"
//! version = 1
//! manifest = "...optional resolved experiment config..."
//!
//! [graph]
//! n = 2
//! states = [2, 2]
//! edges = [[0, 1]]
//!
//! [potentials]
//! values = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]  # flat layout
//!
//! [features]          # optional
//! k = 1
//! matrix = [[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]]   # K rows of length d
//! labels = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]
//! ```
//!
//! `values` follows the flat layout of [`crate::model::Layout`]. Floats are
//! written in shortest round-trip form, so load → save is byte-identical.
//!
//! **Dataset file**: one assignment per line as comma-separated vertex-order
//! integers. Lines starting with `#` are comments (used for the manifest).

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, FeatureModel, GraphTopology, PotentialVector};

pub const MODEL_FORMAT: &str = "bbpl-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manifest: Option<String>,
    graph: GraphSection,
    potentials: PotentialSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<FeatureSection>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphSection {
    n: usize,
    states: Vec<usize>,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PotentialSection {
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FeatureSection {
    k: usize,
    matrix: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

/// Contents of a model file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub graph: GraphTopology,
    pub potentials: PotentialVector,
    pub features: Option<FeatureModel>,
    pub manifest: Option<String>,
}

impl ModelFile {
    pub fn new(graph: GraphTopology, potentials: PotentialVector) -> Self {
        Self {
            graph,
            potentials,
            features: None,
            manifest: None,
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let doc = ModelDoc {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            manifest: self.manifest.clone(),
            graph: GraphSection {
                n: self.graph.num_vertices(),
                states: self.graph.states().to_vec(),
                edges: self.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
            },
            potentials: PotentialSection {
                values: self.potentials.as_slice().to_vec(),
            },
            features: self.features.as_ref().map(|f| FeatureSection {
                k: f.num_params(),
                matrix: (0..f.num_params()).map(|k| f.row(k).to_vec()).collect(),
                labels: f.labels().to_vec(),
            }),
        };
        toml::to_string(&doc).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: ModelDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Parse(format!(
                "expected format `{MODEL_FORMAT}`, found `{}`",
                doc.format
            )));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::Parse(format!("unsupported model file version {}", doc.version)));
        }
        if doc.graph.n != doc.graph.states.len() {
            return Err(Error::Parse(format!(
                "graph.n = {} but {} state counts given",
                doc.graph.n,
                doc.graph.states.len()
            )));
        }
        let graph = GraphTopology::new(doc.graph.states, doc.graph.edges.into_iter().map(|[u, v]| (u, v)))?;
        let potentials = PotentialVector::from_flat(&graph, doc.potentials.values)?;
        let features = doc
            .features
            .map(|f| {
                if f.matrix.len() != f.k {
                    return Err(Error::Parse(format!(
                        "features.k = {} but {} matrix rows given",
                        f.k,
                        f.matrix.len()
                    )));
                }
                FeatureModel::new(&graph, f.k, f.matrix.concat(), f.labels)
            })
            .transpose()?;
        Ok(Self {
            graph,
            potentials,
            features,
            manifest: doc.manifest,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Writes assignments one per line; `comment` lines are emitted first with a
/// `# ` prefix.
pub fn write_samples<W: Write>(mut out: W, samples: &[Assignment], comment: Option<&str>) -> Result<()> {
    if let Some(text) = comment {
        for line in text.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for x in samples {
        writer.write_record(x.iter().map(|s| s.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_samples<R: BufRead>(input: R) -> Result<Vec<Assignment>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            rec.iter()
                .map(|field| {
                    field
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("record {i}: `{field}` is not a state index")))
                })
                .collect()
        })
        .collect()
}

pub fn save_samples(path: impl AsRef<Path>, samples: &[Assignment], comment: Option<&str>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_samples(std::io::BufWriter::new(file), samples, comment)
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<Assignment>> {
    let file = std::fs::File::open(path)?;
    read_samples(std::io::BufReader::new(file))
}
