//! Run configuration: defaults, an optional TOML file, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fieldscope_core::trends::{GrowthFormula, LogBase, SplitRule};
use fieldscope_core::{FilterConfig, MatcherConfig, Taxonomy, WindowSpec, YjParams};
use serde::{Deserialize, Serialize};

/// Everything a command needs. Serialised verbatim into each run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Taxonomy file; the bundled NLP taxonomy when absent.
    pub taxonomy: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    /// Pre-aggregated per-field counts for `rank`.
    pub counts: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub window: WindowSpec,
    pub matcher: MatcherConfig,
    /// Store ancestor labels in the labeled corpus.
    pub propagate_labels: bool,
    /// Count a record toward every ancestor of its labels when aggregating series.
    pub propagate_counts: bool,
    pub apply_filter: bool,
    pub filter: FilterConfig,
    pub split: SplitRule,
    pub growth: GrowthFormula,
    pub log_base: LogBase,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Number of rows kept by `rank`; all when absent.
    pub top: Option<usize>,
    /// Keep going when some input entries are rejected.
    pub allow_invalid: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let yj = YjParams::default();
        RunConfig {
            taxonomy: None,
            corpus: None,
            predictions: None,
            gold: None,
            counts: None,
            out_dir: PathBuf::from("out"),
            window: WindowSpec::default(),
            matcher: MatcherConfig::default(),
            propagate_labels: false,
            propagate_counts: true,
            apply_filter: true,
            filter: FilterConfig::default(),
            split: SplitRule::Median,
            growth: GrowthFormula::Relative,
            log_base: LogBase::Natural,
            lambda_min: yj.lambda_min,
            lambda_max: yj.lambda_max,
            top: None,
            allow_invalid: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    /// Defaults, or the given config file.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_toml_file(p),
            None => Ok(Self::default()),
        }
    }

    pub fn yj_bounds(&self) -> YjParams {
        YjParams::with_bounds(self.lambda_min, self.lambda_max)
    }

    pub fn load_taxonomy(&self) -> Result<Taxonomy> {
        match &self.taxonomy {
            None => Ok(Taxonomy::default_nlp()),
            Some(p) => {
                let file = fs::File::open(p).with_context(|| format!("cannot open taxonomy {}", p.display()))?;
                Taxonomy::load(file).with_context(|| format!("taxonomy {}", p.display()))
            }
        }
    }

    /// Fails unless every named input is configured and exists.
    pub fn require(&self, inputs: &[(&str, &Option<PathBuf>)]) -> Result<()> {
        for (role, path) in inputs {
            match path {
                None => bail!("missing required input: {role} (set --{role} or `{role}` in the config file)"),
                Some(p) if !p.is_file() => bail!("input file not found: {}", p.display()),
                Some(_) => {}
            }
        }
        if let Some(p) = &self.taxonomy {
            if !p.is_file() {
                bail!("input file not found: {}", p.display());
            }
        }
        Ok(())
    }

    /// Creates the output directory and checks that it accepts files.
    pub fn prepare_out_dir(&self) -> Result<()> {
        let dir = &self.out_dir;
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let probe = dir.join(".fieldscope-write-test");
        fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", dir.display()))?;
        fs::remove_file(&probe).ok();
        Ok(())
    }
}
