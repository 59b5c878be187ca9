use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::Serialize;

use simplicial_energy::complex::DeltaComplex;
use simplicial_energy::fixtures::{Instance, InstanceFile};
use simplicial_energy::metric::SimplicialMetric;
use simplicial_energy::smap::{MapFile, SimplicialMap};
use simplicial_energy::targets::{make_target, TargetSpec};

use crate::CliError;

/// Input files: a bundled instance, separate files, or a bundle with some
/// parts replaced by separate files.
#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct Inputs {
    /// Instance file bundling complex, metric, target, map and fixed vertices.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Complex JSON.
    #[arg(long)]
    pub complex: Option<PathBuf>,
    /// Metric JSON (`{"lengths": [...]}`).
    #[arg(long)]
    pub metric: Option<PathBuf>,
    /// Target JSON (`{"type": "hyperbolic", "dim": 2}`, ...).
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Map JSON (`{"vertex_images": [...], "edge_decks": [...]}`).
    #[arg(long)]
    pub map: Option<PathBuf>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// What the loaded inputs provide.
pub struct Loaded {
    pub complex: DeltaComplex,
    pub metric: Option<SimplicialMetric>,
    pub target: Option<TargetSpec>,
    pub map: Option<MapFile>,
    pub fixed: Vec<usize>,
}

impl Inputs {
    /// Paths given on the command line, by role.
    pub fn paths(&self) -> BTreeMap<String, String> {
        [
            ("instance", &self.instance),
            ("complex", &self.complex),
            ("metric", &self.metric),
            ("target", &self.target),
            ("map", &self.map),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|p| (k.to_string(), p.display().to_string())))
        .collect()
    }

    pub fn load(&self) -> Result<Loaded, CliError> {
        let bundle: Option<InstanceFile> = self.instance.as_deref().map(read_json).transpose()?;
        let complex = match (&self.complex, &bundle) {
            (Some(p), _) => read_json(p)?,
            (None, Some(b)) => b.complex.clone(),
            (None, None) => return Err(CliError::usage("no complex given: pass --instance or --complex")),
        };
        let metric = match (&self.metric, &bundle) {
            (Some(p), _) => Some(read_json(p)?),
            (None, Some(b)) => Some(b.metric.clone()),
            (None, None) => None,
        };
        let target = match (&self.target, &bundle) {
            (Some(p), _) => Some(read_json(p)?),
            (None, Some(b)) => Some(b.target.clone()),
            (None, None) => None,
        };
        let map = match (&self.map, &bundle) {
            (Some(p), _) => Some(read_json(p)?),
            (None, Some(b)) => Some(b.map.clone()),
            (None, None) => None,
        };
        let fixed = bundle.map(|b| b.fixed).unwrap_or_default();
        Ok(Loaded {
            complex,
            metric,
            target,
            map,
            fixed,
        })
    }
}

impl Loaded {
    pub fn require_metric(&self) -> Result<&SimplicialMetric, CliError> {
        let l = self
            .metric
            .as_ref()
            .ok_or_else(|| CliError::usage("no metric given: pass --instance or --metric"))?;
        if l.len() != self.complex.num_edges() {
            return Err(CliError::usage(format!(
                "the metric has {} lengths but the complex has {} edges",
                l.len(),
                self.complex.num_edges()
            )));
        }
        Ok(l)
    }

    pub fn build_map(&self, file: &MapFile) -> Result<SimplicialMap, CliError> {
        let spec = self
            .target
            .as_ref()
            .ok_or_else(|| CliError::usage("no target given: pass --instance or --target"))?;
        let t = make_target(spec).map_err(|e| CliError::usage(format!("target: {e}")))?;
        SimplicialMap::from_file(&self.complex, t, file).map_err(|e| CliError::usage(format!("map: {e}")))
    }

    pub fn require_map(&self) -> Result<SimplicialMap, CliError> {
        let file = self
            .map
            .as_ref()
            .ok_or_else(|| CliError::usage("no map given: pass --instance or --map"))?;
        self.build_map(file)
    }

    /// Complex, metric, map and fixed vertices, all required.
    pub fn instance(&self) -> Result<Instance, CliError> {
        Ok(Instance {
            metric: self.require_metric()?.clone(),
            map: self.require_map()?,
            complex: self.complex.clone(),
            fixed: self.fixed.clone(),
        })
    }
}
