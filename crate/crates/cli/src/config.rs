//! Run configuration: file values, flag overrides and the resolved form.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qha_core::{ConvolutionConfig, FockParams};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20240601;
pub const DEFAULT_DEGREE: usize = 40;

/// Tolerance keys with their default values.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("orthonormality", 1e-12),
    ("toeplitz_constant", 1e-12),
    ("toeplitz_norm_squared", 1e-12),
    ("weyl_commutation", 1e-6),
    ("weyl_inverse", 1e-8),
    ("berezin_kernel", 1e-8),
    ("trace_identity", 1e-4),
    ("adjoint_duality", 1e-4),
    ("commutativity", 1e-6),
    ("toeplitz_pipelines", 1e-4),
    ("window_stability", 1e-6),
    ("approx_slack", 0.1),
    ("decrease_slack", 0.1),
    ("quantization_slack", 0.15),
    ("invariance", 1e-6),
];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelFile,
    #[serde(default)]
    pub convolution: ConvolutionFile,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub run: RunFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: Option<usize>,
    pub t: Option<f64>,
    pub d: Option<usize>,
    pub q: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvolutionFile {
    pub window: Option<f64>,
    pub resolution: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Values given on the command line; each one wins over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n: Option<usize>,
    pub t: Option<f64>,
    pub d: Option<usize>,
    pub q: Option<usize>,
    pub window: Option<f64>,
    pub resolution: Option<usize>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub tolerances: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSection {
    pub n: usize,
    pub t: f64,
    pub d: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvolutionSection {
    pub window: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSection {
    pub output: PathBuf,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSection,
    pub convolution: ConvolutionSection,
    pub tolerances: BTreeMap<String, f64>,
    pub run: RunSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: &Overrides) -> Result<Self, CliError> {
        let n = flags.n.or(file.model.n).unwrap_or(1);
        let t = flags.t.or(file.model.t).unwrap_or(1.0);
        let d = flags.d.or(file.model.d).unwrap_or(DEFAULT_DEGREE);
        let q = flags.q.or(file.model.q).unwrap_or(d + 10);
        let params = FockParams::new(n, t, d, q).map_err(|e| CliError::Usage(e.to_string()))?;

        let window = flags.window.or(file.convolution.window).unwrap_or_else(|| params.default_window());
        let resolution = flags.resolution.or(file.convolution.resolution).unwrap_or(qha_core::conv::DEFAULT_RESOLUTION);

        let mut tolerances: BTreeMap<String, f64> =
            DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let given = file.tolerances.into_iter().chain(flags.tolerances.iter().cloned());
        for (key, value) in given {
            match tolerances.get_mut(&key) {
                Some(slot) => *slot = value,
                None => return Err(CliError::Usage(format!("unknown tolerance key {key:?}"))),
            }
        }
        if let Some((key, value)) = tolerances.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(CliError::Usage(format!("tolerance {key} must be a non-negative number, got {value}")));
        }

        let threads = flags.threads.or(file.run.threads);
        if threads == Some(0) {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        let config = Self {
            model: ModelSection { n, t, d, q },
            convolution: ConvolutionSection { window, resolution },
            tolerances,
            run: RunSection {
                output: flags.output.clone().or(file.run.output).unwrap_or_else(|| PathBuf::from("qha-out")),
                seed: flags.seed.or(file.run.seed).unwrap_or(DEFAULT_SEED),
                threads,
            },
        };
        config.convolution().validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }

    pub fn params(&self) -> FockParams {
        let m = &self.model;
        FockParams { n: m.n, t: m.t, d: m.d, q: m.q }
    }

    pub fn convolution(&self) -> ConvolutionConfig {
        ConvolutionConfig {
            window: self.convolution.window,
            resolution: self.convolution.resolution,
            stability_tolerance: self.tolerance("window_stability"),
            ..ConvolutionConfig::for_params(&self.params())
        }
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances[key]
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// The configuration written into output files. The output directory and
    /// thread count are left out because they do not affect any result.
    pub fn embedded(&self, command: &str, args: &BTreeMap<String, String>) -> Embedded {
        Embedded {
            schema_version: qha_core::experiments::SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            args: args.clone(),
            seed: self.run.seed,
            model: self.model.clone(),
            convolution: self.convolution.clone(),
            tolerances: self.tolerances.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Embedded {
    pub schema_version: String,
    pub command: String,
    pub seed: u64,
    pub args: BTreeMap<String, String>,
    pub model: ModelSection,
    pub convolution: ConvolutionSection,
    pub tolerances: BTreeMap<String, f64>,
}

impl Embedded {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("embedded config serializes")
    }

    /// TOML rendering with every line prefixed by `# `.
    pub fn comment_block(&self) -> String {
        let text = toml::to_string(self).expect("embedded config serializes");
        text.lines()
            .map(|l| if l.is_empty() { "#\n".to_string() } else { format!("# {l}\n") })
            .collect()
    }
}
