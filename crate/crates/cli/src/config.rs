//! Experiment configuration (TOML). Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vqa_core::bounds::{Axis, SpsaVariant, SurfaceKind};
use vqa_core::noise::DeviceReadout;
use vqa_core::objective::qaoa_circuit;
use vqa_core::{BoundParams, GradEstimator, Graph, NoiseConfig, NoisyObjective, Observable, ReadoutModel, Regime, Shots, StepSchedule};

use crate::error::{CliError, CliResult};
use crate::verify::VerifySpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Used when `--out-dir` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<GradEstimator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<StepSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<HistogramSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    #[serde(default)]
    pub graph: GraphSpec,
    #[serde(default = "one")]
    pub layers: usize,
    #[serde(default = "default_shots")]
    pub shots: Shots,
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
    #[serde(default)]
    pub extra_bias: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutSpec>,
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        ObjectiveSpec {
            graph: GraphSpec::default(),
            layers: 1,
            shots: default_shots(),
            p1: 0.0,
            p2: 0.0,
            extra_bias: 0.0,
            readout: None,
        }
    }
}

fn one() -> usize {
    1
}

fn default_shots() -> Shots {
    Shots::Finite(1024)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Cycle { n: usize },
    Complete { n: usize },
    Regular { n: usize, degree: usize, seed: u64 },
    Edges {
        n: usize,
        edges: Vec<(usize, usize)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// JSON file `{n, edges: [[i, j], …], weights: […]}`.
    File { path: PathBuf },
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec::Cycle { n: 4 }
    }
}

impl GraphSpec {
    pub fn build(&self) -> CliResult<Graph> {
        Ok(match self {
            GraphSpec::Cycle { n } => Graph::cycle(*n)?,
            GraphSpec::Complete { n } => Graph::complete(*n)?,
            GraphSpec::Regular { n, degree, seed } => Graph::regular(*n, *degree, *seed)?,
            GraphSpec::Edges { n, edges, weights: None } => Graph::new(*n, edges.clone())?,
            GraphSpec::Edges { n, edges, weights: Some(w) } => Graph::weighted(*n, edges.clone(), w.clone())?,
            GraphSpec::File { path } => Graph::from_json(&read_text(path)?)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BtildeModel {
    /// `realistic(1 − b̃, 1 − b̃)`.
    #[default]
    Realistic,
    /// The identity with its diagonal lowered by `b̃`.
    Diagonal,
}

impl BtildeModel {
    pub fn model(&self, btilde: f64, n: usize) -> CliResult<ReadoutModel> {
        Ok(match self {
            BtildeModel::Realistic => ReadoutModel::realistic(1.0 - btilde, 1.0 - btilde, n)?,
            BtildeModel::Diagonal => ReadoutModel::identity(n)?.perturb_diagonal(btilde)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReadoutSpec {
    Identity {},
    /// The fixed 16×16 reference random matrix (4 qubits only).
    ReferenceRandom {},
    Random { sparsity: f64, seed: u64 },
    Device { name: String },
    SymmetricFlip { q: f64 },
    Realistic { x: f64, y: f64 },
    Btilde {
        value: f64,
        #[serde(default)]
        model: BtildeModel,
    },
    /// Row-major CSV, `2^n` rows of `2^n` entries.
    Csv { path: PathBuf },
}

impl ReadoutSpec {
    pub fn build(&self, n: usize) -> CliResult<ReadoutModel> {
        let m = match self {
            ReadoutSpec::Identity {} => ReadoutModel::identity(n)?,
            ReadoutSpec::ReferenceRandom {} => ReadoutModel::reference_random(),
            ReadoutSpec::Random { sparsity, seed } => ReadoutModel::random(n, *sparsity, *seed)?,
            ReadoutSpec::Device { name } => DeviceReadout::by_name(name)
                .ok_or_else(|| CliError::Schema(format!("unknown device {name:?}")))?
                .model(n)?,
            ReadoutSpec::SymmetricFlip { q } => ReadoutModel::symmetric_flip(*q, n)?,
            ReadoutSpec::Realistic { x, y } => ReadoutModel::realistic(*x, *y, n)?,
            ReadoutSpec::Btilde { value, model } => model.model(*value, n)?,
            ReadoutSpec::Csv { path } => ReadoutModel::from_csv(&read_text(path)?)?,
        };
        if m.n() != n {
            return Err(CliError::Schema(format!("read-out model acts on {} qubits, graph has {n}", m.n())));
        }
        Ok(m)
    }
}

impl ObjectiveSpec {
    pub fn noise(&self, n: usize) -> CliResult<NoiseConfig> {
        Ok(NoiseConfig {
            p1: self.p1,
            p2: self.p2,
            readout: self.readout.as_ref().map(|r| r.build(n)).transpose()?,
            extra_bias: self.extra_bias,
        })
    }

    /// QAOA MAX-CUT objective with seed stream 0.
    pub fn build(&self) -> CliResult<NoisyObjective> {
        let g = self.graph.build()?;
        let noise = self.noise(g.n())?;
        Ok(NoisyObjective::new(qaoa_circuit(&g, self.layers)?, Observable::maxcut(&g)?, noise, self.shots, 0)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Iterations `K`.
    pub k: usize,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_probe_every")]
    pub probe_every: usize,
    /// Start point shared by all replicates; drawn per replicate
    /// uniformly from `[0, π)^p` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
}

fn default_probe_every() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSpec {
    /// Defaults to the argmin of `f` over a 64-point-per-axis grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Read-out levels to sweep; the objective's own read-out when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub btilde: Vec<f64>,
    #[serde(default)]
    pub btilde_model: BtildeModel,
    #[serde(default = "one")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            theta: None,
            samples: default_samples(),
            btilde: Vec::new(),
            btilde_model: BtildeModel::default(),
            repeats: 1,
            seed: 0,
        }
    }
}

fn default_samples() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SurfaceKind>,
    #[serde(default = "default_regime")]
    pub regime: Regime,
    #[serde(default)]
    pub variant: SpsaVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Axis>,
    /// `c` axis, or `p` for the optimal-c surface.
    #[serde(default, alias = "c", alias = "p", skip_serializing_if = "Option::is_none")]
    pub y: Option<Axis>,
    #[serde(default)]
    pub params: BoundParams,
}

fn default_regime() -> Regime {
    Regime::FixedBudget
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        SurfaceSpec {
            kind: None,
            regime: default_regime(),
            variant: SpsaVariant::default(),
            b: None,
            y: None,
            params: BoundParams::default(),
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    /// Reads a config; relative file paths inside it are resolved against
    /// the config's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut cfg = ExperimentConfig::parse(&read_text(path)?)
            .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let GraphSpec::File { path } = &mut cfg.objective.graph {
            rebase(base, path);
        }
        if let Some(ReadoutSpec::Csv { path }) = &mut cfg.objective.readout {
            rebase(base, path);
        }
        if let Some(p) = cfg.verify.as_mut().and_then(|v| v.readout_csv.as_mut()) {
            rebase(base, p);
        }
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            if let Some(r) = self.run.as_mut() {
                r.seed = s;
            }
            if let Some(h) = self.histogram.as_mut() {
                h.seed = s;
            }
            if let Some(v) = self.verify.as_mut() {
                v.seed = s;
            }
        }
        self
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        crate::manifest::sha256_hex(self.to_json().as_bytes())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

pub(crate) fn require<'a, T>(x: &'a Option<T>, section: &str) -> CliResult<&'a T> {
    x.as_ref().ok_or_else(|| CliError::Schema(format!("missing [{section}] section")))
}
