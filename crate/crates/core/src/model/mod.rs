//! Format selection model: training-set assembly, the decision tree with its
//! bundled feature scaling, cross-validation and the runtime selection call.
//!
//! # Model file
//!
//! ```text
//! spformat-model v1 max_depth=<d> min_samples_leaf=<m> nodes=<n>
//! scale <feature> <min> <max>                    (8 lines, features 0..8)
//! node <id> split <feature> <threshold> <left> <right>
//! leaf <id> <label> <count_csr> <count_csr5> <count_ell> <count_sell> <count_hyb>
//! ```
//!
//! Node lines appear in id order, starting at the root (id 0). Floats use
//! the shortest representation that parses back to the same bits.

mod cv;
mod tree;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

pub use cv::{cross_validate, CvConfig, CvReport, FoldResult};
pub use tree::{best_split, class_counts, majority, midpoint, ClassCounts, Node, SplitChoice, Tree, NUM_CLASSES};

use crate::bench::{best_format, BenchRecord};
use crate::features::{extract_features, FeatureError, FeatureRecord, FeatureVector, ScalingParams, NUM_FEATURES};
use crate::formats::{convert, FormatError, FormatMatrix, FormatParams, FormatTag};
use crate::matrix::CooMatrix;

pub const DEFAULT_MAX_DEPTH: usize = 8;
pub const DEFAULT_MIN_SAMPLES_LEAF: usize = 3;

const HEADER: &str = "spformat-model v1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("no training samples")]
    EmptyTrainingSet,
    #[error("{k}-fold cross-validation needs at least {k} samples, got {n}")]
    TooFewSamples { k: usize, n: usize },
    #[error("cross-validation needs k >= 2, got {0}")]
    InvalidFolds(usize),
    #[error("model file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// One matrix of the training corpus: raw features, the label and, when
/// known, the measured time of every format (indexed by [`FormatTag::index`],
/// infinite for formats that failed).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    pub matrix_id: String,
    pub features: [f64; NUM_FEATURES],
    pub label: FormatTag,
    pub times: Option<[f64; NUM_CLASSES]>,
}

/// A training sample after scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub matrix_id: String,
    pub features: [f64; NUM_FEATURES],
    pub label: FormatTag,
}

/// Joined training data plus one message per matrix that could not be used.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub records: Vec<TrainingRecord>,
    pub mismatches: Vec<String>,
}

/// Joins benchmark records with feature records by matrix id. Labels are the
/// fastest converted format. Matrices missing from either side, or with no
/// successful measurement, are reported and left out. Output follows the
/// order of the feature records.
pub fn assemble_training_set(bench: &[BenchRecord], features: &[FeatureRecord]) -> TrainingSet {
    let mut by_id: HashMap<&str, Vec<&BenchRecord>> = HashMap::new();
    let mut bench_order = Vec::new();
    for r in bench {
        by_id
            .entry(r.matrix_id.as_str())
            .or_insert_with(|| {
                bench_order.push(r.matrix_id.as_str());
                Vec::new()
            })
            .push(r);
    }
    let mut out = TrainingSet::default();
    let mut used = std::collections::HashSet::new();
    for f in features {
        let Some(recs) = by_id.get(f.matrix_id.as_str()) else {
            out.mismatches.push(format!("{}: features without benchmark records", f.matrix_id));
            continue;
        };
        if !used.insert(f.matrix_id.as_str()) {
            out.mismatches.push(format!("{}: duplicate feature record ignored", f.matrix_id));
            continue;
        }
        let Some(label) = best_format(recs.iter().copied()) else {
            out.mismatches.push(format!("{}: no format converted successfully", f.matrix_id));
            continue;
        };
        let mut times = [f64::INFINITY; NUM_CLASSES];
        for r in recs.iter().filter(|r| r.converted_ok && r.mean_time.is_finite()) {
            times[r.format.index()] = r.mean_time;
        }
        out.records.push(TrainingRecord {
            matrix_id: f.matrix_id.clone(),
            features: f.features.to_array(),
            label,
            times: Some(times),
        });
    }
    for id in bench_order {
        if !used.contains(id) {
            out.mismatches.push(format!("{id}: benchmark records without features"));
        }
    }
    out
}

/// Fits scaling on `records` and returns the scaled samples.
pub fn scale_training_set(records: &[TrainingRecord]) -> Result<(Vec<LabeledSample>, ScalingParams), ModelError> {
    let scaling = ScalingParams::fit_arrays(records.iter().map(|r| &r.features))?;
    let samples = records
        .iter()
        .map(|r| LabeledSample {
            matrix_id: r.matrix_id.clone(),
            features: scaling.apply_array(&r.features),
            label: r.label,
        })
        .collect();
    Ok((samples, scaling))
}

/// A trained tree together with the scaling it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTreeModel {
    pub tree: Tree,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub scaling: ScalingParams,
}

/// Trains on already-scaled samples.
pub fn train_tree(
    samples: &[LabeledSample],
    scaling: ScalingParams,
    max_depth: usize,
    min_samples_leaf: usize,
) -> Result<DecisionTreeModel, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let x: Vec<_> = samples.iter().map(|s| s.features).collect();
    let y: Vec<_> = samples.iter().map(|s| s.label).collect();
    Ok(DecisionTreeModel {
        tree: Tree::fit(&x, &y, max_depth, min_samples_leaf),
        max_depth,
        min_samples_leaf,
        scaling,
    })
}

/// Fits scaling on raw records, then trains.
pub fn fit_model(records: &[TrainingRecord], max_depth: usize, min_samples_leaf: usize) -> Result<DecisionTreeModel, ModelError> {
    if records.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let (samples, scaling) = scale_training_set(records)?;
    train_tree(&samples, scaling, max_depth, min_samples_leaf)
}

impl DecisionTreeModel {
    /// A one-leaf model that always answers `tag`.
    pub fn constant(tag: FormatTag) -> Self {
        let mut counts = [0; NUM_CLASSES];
        counts[tag.index()] = 1;
        DecisionTreeModel {
            tree: Tree {
                nodes: vec![Node::Leaf { label: tag, counts }],
            },
            max_depth: 0,
            min_samples_leaf: 1,
            scaling: ScalingParams {
                min: [0.0; NUM_FEATURES],
                max: [0.0; NUM_FEATURES],
            },
        }
    }

    pub fn is_single_leaf(&self) -> bool {
        self.tree.nodes.len() == 1
    }

    pub fn predict_raw(&self, raw: &[f64; NUM_FEATURES]) -> FormatTag {
        self.tree.predict(&self.scaling.apply_array(raw))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{HEADER} max_depth={} min_samples_leaf={} nodes={}",
            self.max_depth,
            self.min_samples_leaf,
            self.tree.nodes.len()
        );
        for f in 0..NUM_FEATURES {
            let _ = writeln!(s, "scale {f} {} {}", self.scaling.min[f], self.scaling.max[f]);
        }
        for (id, node) in self.tree.nodes.iter().enumerate() {
            let _ = match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => writeln!(s, "node {id} split {feature} {threshold} {left} {right}"),
                Node::Leaf { label, counts } => {
                    let counts: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
                    writeln!(s, "leaf {id} {label} {}", counts.join(" "))
                }
            };
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line: usize, reason: String| ModelError::Parse { line, reason };

        let (hl, header) = lines.next().ok_or_else(|| err(1, "empty model file".into()))?;
        let rest = header
            .strip_prefix(HEADER)
            .ok_or_else(|| err(hl, format!("expected header `{HEADER} ...`")))?;
        let mut max_depth = None;
        let mut min_leaf = None;
        let mut n_nodes = None;
        for kv in rest.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| err(hl, format!("bad header field `{kv}`")))?;
            let v: usize = v.parse().map_err(|_| err(hl, format!("bad value in `{kv}`")))?;
            match k {
                "max_depth" => max_depth = Some(v),
                "min_samples_leaf" => min_leaf = Some(v),
                "nodes" => n_nodes = Some(v),
                _ => return Err(err(hl, format!("unknown header field `{k}`"))),
            }
        }
        let missing = |what: &str| err(hl, format!("header lacks `{what}`"));
        let max_depth = max_depth.ok_or_else(|| missing("max_depth"))?;
        let min_samples_leaf = min_leaf.ok_or_else(|| missing("min_samples_leaf"))?;
        let n_nodes = n_nodes.ok_or_else(|| missing("nodes"))?;

        let mut scaling = ScalingParams {
            min: [0.0; NUM_FEATURES],
            max: [0.0; NUM_FEATURES],
        };
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut last = hl;
        for (ln, line) in lines {
            last = ln;
            let tok: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| -> Result<usize, ModelError> {
                tok.get(i)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(ln, format!("expected an integer in field {}", i + 1)))
            };
            let real = |i: usize| -> Result<f64, ModelError> {
                tok.get(i)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(ln, format!("expected a number in field {}", i + 1)))
            };
            match tok[0] {
                "scale" if tok.len() == 4 => {
                    let f = num(1)?;
                    if f >= NUM_FEATURES {
                        return Err(err(ln, format!("feature {f} out of range")));
                    }
                    scaling.min[f] = real(2)?;
                    scaling.max[f] = real(3)?;
                }
                "node" if tok.len() == 7 && tok[2] == "split" => {
                    if num(1)? != nodes.len() {
                        return Err(err(ln, format!("expected node id {}", nodes.len())));
                    }
                    nodes.push(Node::Split {
                        feature: num(3)?,
                        threshold: real(4)?,
                        left: num(5)?,
                        right: num(6)?,
                    });
                }
                "leaf" if tok.len() == 3 + NUM_CLASSES => {
                    if num(1)? != nodes.len() {
                        return Err(err(ln, format!("expected node id {}", nodes.len())));
                    }
                    let label: FormatTag = tok[2].parse().map_err(|e| err(ln, format!("{e}")))?;
                    let mut counts = [0; NUM_CLASSES];
                    for (c, slot) in counts.iter_mut().enumerate() {
                        *slot = num(3 + c)?;
                    }
                    nodes.push(Node::Leaf { label, counts });
                }
                _ => return Err(err(ln, format!("unrecognized line `{line}`"))),
            }
        }
        if nodes.len() != n_nodes {
            return Err(err(last, format!("header declares {n_nodes} nodes, found {}", nodes.len())));
        }
        let tree = Tree { nodes };
        tree.validate().map_err(|reason| err(last, reason))?;
        Ok(DecisionTreeModel {
            tree,
            max_depth,
            min_samples_leaf,
            scaling,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Scales `f` with the model's stored parameters and walks the tree.
pub fn predict(model: &DecisionTreeModel, f: &FeatureVector) -> FormatTag {
    model.predict_raw(&f.to_array())
}

/// Extracts features, predicts a format and converts `a` to it.
pub fn select_format(
    a: &CooMatrix,
    model: &DecisionTreeModel,
    params: &FormatParams,
) -> Result<(FormatTag, FormatMatrix), ModelError> {
    let tag = predict(model, &extract_features(a)?);
    Ok((tag, convert(a, tag, params)?))
}
