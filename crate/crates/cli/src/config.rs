//! Fully resolved run configuration and the output header that carries it.

use std::fmt;
use std::path::PathBuf;

use ordloc::model::LossKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const HEADER_PREFIX: &str = "# ordloc";
pub const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LossArg {
    Squared,
    Absolute,
}

impl LossArg {
    pub fn kind(self) -> LossKind {
        match self {
            LossArg::Squared => LossKind::Squared,
            LossArg::Absolute => LossKind::Absolute,
        }
    }
}

impl fmt::Display for LossArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.kind(), f)
    }
}

/// Losses that violate the loss assumptions, for exercising `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BrokenLoss {
    /// `W(t) = t`.
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl LambdaGrid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let LambdaGrid { min, max, step } = *self;
        if !(min >= 0.0 && min.is_finite()) {
            return Err(CliError::Usage(format!(
                "--lambda-min must be finite and nonnegative, got {min}"
            )));
        }
        if !(max >= min && max.is_finite()) {
            return Err(CliError::Usage(format!(
                "--lambda-max must be finite and at least --lambda-min, got {max}"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(CliError::Usage(format!(
                "--lambda-step must be positive, got {step}"
            )));
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(CliError::Usage(format!(
                "lambda grid has {count} points; refusing more than 100000"
            )));
        }
        Ok((0..count).map(|i| min + i as f64 * step).collect())
    }
}

/// Everything a run depends on, with defaults filled in.
///
/// The worker count is not part of it: output does not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub sigma: f64,
    pub rho: f64,
    /// `None` runs both losses where a command supports that.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossArg>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default)]
    pub quick: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_loss: Option<BrokenLoss>,
}

impl RunConfig {
    /// The two header lines that open every text and CSV output.
    pub fn header(&self) -> String {
        format!(
            "{HEADER_PREFIX} {} {}\n{CONFIG_PREFIX}{}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            serde_json::to_string(self).expect("config serializes")
        )
    }

    /// Recovers the config from an output produced by this program: the
    /// `# config:` line of a text or CSV output, or the `config` member of a
    /// JSON output.
    pub fn from_header(output: &str) -> Result<Self, CliError> {
        let trimmed = output.trim_start();
        if trimmed.starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(trimmed)
                .map_err(|e| CliError::Usage(format!("not a JSON output: {e}")))?;
            let cfg = v
                .get("config")
                .ok_or_else(|| CliError::Usage("JSON output lacks a config member".into()))?;
            return serde_json::from_value(cfg.clone())
                .map_err(|e| CliError::Usage(format!("bad config: {e}")));
        }
        for line in output.lines().take_while(|l| l.starts_with('#')) {
            if let Some(json) = line.strip_prefix(CONFIG_PREFIX) {
                return serde_json::from_str(json)
                    .map_err(|e| CliError::Usage(format!("bad config line: {e}")));
            }
        }
        Err(CliError::Usage("no config line in the header".into()))
    }

    /// Command-line arguments (without the program name) that reproduce the run.
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec![
            self.command.clone(),
            "--sigma".into(),
            self.sigma.to_string(),
            "--rho".into(),
            self.rho.to_string(),
        ];
        let mut push = |k: &str, v: String| {
            a.push(k.into());
            a.push(v);
        };
        if let Some(l) = self.loss {
            push("--loss", l.to_string());
        }
        if !self.estimators.is_empty() {
            push("--estimators", self.estimators.join(","));
        }
        if let Some(g) = self.lambda {
            push("--lambda-min", g.min.to_string());
            push("--lambda-max", g.max.to_string());
            push("--lambda-step", g.step.to_string());
        }
        if let Some(n) = self.n {
            push("--n", n.to_string());
        }
        if let Some(s) = self.seed {
            push("--seed", s.to_string());
        }
        if let Some(x) = self.x1 {
            push("--x1", x.to_string());
        }
        if let Some(x) = self.x2 {
            push("--x2", x.to_string());
        }
        if let Some(p) = &self.input {
            push("--input", p.display().to_string());
        }
        if let Some(p) = &self.output {
            push("--output", p.display().to_string());
        }
        push("--format", self.format.to_string());
        if let Some(t) = self.tol {
            push("--tol", t.to_string());
        }
        if let Some(b) = self.inject_loss {
            push("--inject-loss", format!("{b:?}").to_lowercase());
        }
        if self.quick {
            a.push("--quick".into());
        }
        a
    }
}

/// The output with its comment header removed.
pub fn body(output: &str) -> String {
    output
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}
