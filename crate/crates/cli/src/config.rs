use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use timescale_core::fft_band::BandSpec;
use timescale_core::gam::DEFAULT_BASIS_DIM;
use timescale_core::grouping::{MergeMode, RegroupEdit};
use timescale_core::series::{
    read_panel, read_series, DEFAULT_AVAILABILITY, DEFAULT_IMPUTE_WINDOW, DEFAULT_REMOVE_COUNT,
};
use timescale_core::ssa::max_window;
use timescale_core::synth::SynthScenario;

use crate::error::CliError;

pub const DEFAULT_WINDOW_LENGTH: usize = 60;
pub const DEFAULT_GROUPS: usize = 5;
pub const DEFAULT_BREAKS: [f64; 6] = [1.0, 19.0, 41.0, 83.0, 165.0, 579.0];
pub const DEFAULT_OUTPUT: &str = "timescale-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Preprocess,
    Ssa,
    Fft,
    Fit,
    Compare,
    Simulate,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Preprocess => "preprocess",
            Subcommand::Ssa => "ssa",
            Subcommand::Fft => "fft",
            Subcommand::Fit => "fit",
            Subcommand::Compare => "compare",
            Subcommand::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessConfig {
    #[serde(default = "default_availability")]
    pub availability: f64,
    #[serde(default = "default_impute_window")]
    pub impute_window: usize,
    #[serde(default = "default_remove_count")]
    pub remove_count: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            availability: DEFAULT_AVAILABILITY,
            impute_window: DEFAULT_IMPUTE_WINDOW,
            remove_count: DEFAULT_REMOVE_COUNT,
        }
    }
}

/// One column of a CSV file used as a model covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnRef {
    pub name: String,
    pub path: PathBuf,
    /// Column header; optional when the file has one value column or a
    /// column named like the term.
    #[serde(default)]
    pub column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothConfig {
    pub name: String,
    /// Covariate file; without one the smooth is over time in days.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub column: Option<String>,
    #[serde(default = "default_basis_dim")]
    pub basis_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub counts: PathBuf,
    #[serde(default)]
    pub exposures: Vec<ColumnRef>,
    #[serde(default = "yes")]
    pub weekdays: bool,
    #[serde(default)]
    pub smooths: Vec<SmoothConfig>,
}

impl ModelConfig {
    pub fn label(&self, fallback: &str) -> String {
        self.name.clone().unwrap_or_else(|| fallback.to_string())
    }
}

/// Everything a subcommand needs. Relative paths resolve against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default = "default_window")]
    pub window_length: usize,
    #[serde(default)]
    pub groups: Option<usize>,
    #[serde(default)]
    pub merge: Option<MergeMode>,
    #[serde(default)]
    pub regroup: Vec<RegroupEdit>,
    #[serde(default = "default_breaks")]
    pub breaks: Vec<f64>,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub fits: Vec<ModelConfig>,
    #[serde(default)]
    pub scenario: Option<SynthScenario>,
    /// log10 smoothing-parameter grid.
    #[serde(default)]
    pub smoothing_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_availability() -> f64 {
    DEFAULT_AVAILABILITY
}
fn default_impute_window() -> usize {
    DEFAULT_IMPUTE_WINDOW
}
fn default_remove_count() -> usize {
    DEFAULT_REMOVE_COUNT
}
fn default_basis_dim() -> usize {
    DEFAULT_BASIS_DIM
}
fn default_window() -> usize {
    DEFAULT_WINDOW_LENGTH
}
fn default_breaks() -> Vec<f64> {
    DEFAULT_BREAKS.to_vec()
}
fn yes() -> bool {
    true
}

impl Default for PipelineConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub window_length: Option<usize>,
    pub groups: Option<usize>,
    pub breaks: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(vec![format!("config: {e}")]))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read config {}: {e}", path.display())]))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(l) = o.window_length {
            self.window_length = l;
        }
        if let Some(p) = o.groups {
            self.groups = Some(p);
        }
        if let Some(b) = &o.breaks {
            self.breaks = b.clone();
        }
        if let Some(epsilon) = o.epsilon {
            self.merge = Some(MergeMode::Pearson { epsilon });
        }
        if let Some(s) = o.seed {
            self.seed = Some(s);
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.output {
            Some(p) => self.resolve(p),
            None => PathBuf::from(DEFAULT_OUTPUT),
        }
    }

    pub fn group_count(&self) -> usize {
        self.groups.unwrap_or(DEFAULT_GROUPS)
    }

    /// Scenario with the config seed applied.
    pub fn effective_scenario(&self) -> SynthScenario {
        let mut sc = self.scenario.clone().unwrap_or_default();
        if let Some(s) = self.seed {
            sc.seed = s;
        }
        sc
    }

    pub fn grid(&self) -> Vec<f64> {
        self.smoothing_grid
            .clone()
            .unwrap_or_else(timescale_core::gam::default_grid)
    }

    /// Canonical JSON used for hashing; the output location is left out so
    /// identical runs into different directories hash alike.
    pub fn canonical_json(&self) -> Vec<u8> {
        let mut c = self.clone();
        c.output = None;
        serde_json::to_vec(&c).expect("config serializes")
    }

    /// Checks everything the subcommand will touch and reports every
    /// violated constraint at once.
    pub fn validate(&self, cmd: Subcommand) -> Result<(), CliError> {
        let mut problems = Vec::new();
        match cmd {
            Subcommand::Preprocess => {
                self.check_input(&mut problems, |_| None);
                let p = &self.preprocess;
                if !(p.availability > 0.0 && p.availability <= 1.0) {
                    problems.push(format!("preprocess.availability {} outside (0, 1]", p.availability));
                }
                if p.impute_window == 0 {
                    problems.push("preprocess.impute_window must be positive".into());
                }
            }
            Subcommand::Ssa => {
                let (l, groups) = (self.window_length, self.group_count());
                if l < 2 {
                    problems.push(format!("window_length {l} is below 2"));
                }
                if groups == 0 {
                    problems.push("groups must be at least 1".into());
                }
                if groups > l {
                    problems.push(format!("groups {groups} exceeds window_length {l}"));
                }
                if let Some(MergeMode::Pearson { epsilon }) = self.merge {
                    if !(epsilon > 0.0 && epsilon <= 1.0) {
                        problems.push(format!("epsilon {epsilon} outside (0, 1]"));
                    }
                }
                self.check_input(&mut problems, |n| {
                    (l > max_window(n)).then(|| {
                        format!(
                            "window_length {l} exceeds {} for a series of length {n} (L must not exceed K)",
                            max_window(n)
                        )
                    })
                });
            }
            Subcommand::Fft => {
                if let Err(e) = BandSpec::new(self.breaks.clone()) {
                    problems.push(format!("breaks: {e}"));
                }
                let last = self.breaks.last().copied().unwrap_or(0.0);
                self.check_input(&mut problems, |n| {
                    (last > n as f64).then(|| format!("last break {last} exceeds series length {n}"))
                });
            }
            Subcommand::Fit => match &self.model {
                None => problems.push("fit needs a 'model' section".into()),
                Some(m) => self.check_model(m, "model", &mut problems),
            },
            Subcommand::Compare => {
                if self.fits.len() < 2 {
                    problems.push(format!("compare needs at least two entries in 'fits' (found {})", self.fits.len()));
                }
                let mut names = BTreeSet::new();
                for (i, m) in self.fits.iter().enumerate() {
                    let label = m.label(&format!("fit{}", i + 1));
                    if !names.insert(label.clone()) {
                        problems.push(format!("fit name '{label}' is used twice"));
                    }
                    self.check_model(m, &format!("fits[{i}]"), &mut problems);
                }
            }
            Subcommand::Simulate => {
                let sc = self.effective_scenario();
                if let Err(e) = sc.validate() {
                    problems.push(format!("scenario: {e}"));
                }
                let l = self.window_length;
                if l < 2 || l > max_window(sc.n) {
                    problems.push(format!(
                        "window_length {l} must lie in [2, {}] for n = {}",
                        max_window(sc.n),
                        sc.n
                    ));
                }
            }
        }
        if let Some(grid) = &self.smoothing_grid {
            if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
                problems.push("smoothing_grid must be a nonempty list of finite log10 values".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems))
        }
    }

    fn check_input(&self, problems: &mut Vec<String>, length_check: impl FnOnce(usize) -> Option<String>) {
        match &self.input {
            None => problems.push("'input' is required".into()),
            Some(p) => {
                let path = self.resolve(p);
                if !path.is_file() {
                    problems.push(format!("input {} does not exist", path.display()));
                    return;
                }
                match read_panel::<f64>(&path) {
                    Ok(panel) => {
                        if let Some(msg) = length_check(panel.len()) {
                            problems.push(msg);
                        }
                    }
                    Err(e) => problems.push(format!("input {}: {e}", path.display())),
                }
            }
        }
    }

    fn check_model(&self, m: &ModelConfig, at: &str, problems: &mut Vec<String>) {
        let counts = self.resolve(&m.counts);
        if !counts.is_file() {
            problems.push(format!("{at}.counts {} does not exist", counts.display()));
        } else if let Err(e) = read_series::<f64>(&counts) {
            problems.push(format!("{at}.counts {}: {e}", counts.display()));
        }
        let mut names = BTreeSet::new();
        for e in &m.exposures {
            if !names.insert(e.name.clone()) {
                problems.push(format!("{at}: term '{}' appears twice", e.name));
            }
            let path = self.resolve(&e.path);
            if !path.is_file() {
                problems.push(format!("{at}.exposures '{}': {} does not exist", e.name, path.display()));
            }
        }
        for s in &m.smooths {
            if !names.insert(s.name.clone()) {
                problems.push(format!("{at}: term '{}' appears twice", s.name));
            }
            if s.basis_dim < 3 {
                problems.push(format!("{at}.smooths '{}': basis_dim {} is below 3", s.name, s.basis_dim));
            }
            if let Some(p) = &s.path {
                let path = self.resolve(p);
                if !path.is_file() {
                    problems.push(format!("{at}.smooths '{}': {} does not exist", s.name, path.display()));
                }
            }
        }
    }
}
