//! Experiment configuration, read from TOML.
//!
//! Every key is optional; see the README for the full table. Command-line
//! flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use szego_core::heis::GridSpec;
use szego_core::norms::FamilyBox;
use szego_core::szego::SzegoConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Project,
    NormBound,
    Liu,
    Transplant,
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Project => "project",
            CommandKind::NormBound => "norm-bound",
            CommandKind::Liu => "liu",
            CommandKind::Transplant => "transplant",
            CommandKind::Verify => "verify",
        }
    }
}

/// Input field of the `project` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// Seeded random Gaussian packets.
    Random,
    /// `exp(-|z|² - t²)`.
    Bump,
    /// Seeded element of the dense CR class (a fixed point).
    Dense,
}

/// Parameter box `[a_lo, a_hi] × [b_lo, b_hi]` of the extremizer family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Default for BoxSpec {
    fn default() -> Self {
        BoxSpec {
            a: [0.6, 4.0],
            b: [0.6, 4.0],
        }
    }
}

impl BoxSpec {
    pub fn to_box(&self) -> Result<FamilyBox, CliError> {
        FamilyBox::new((self.a[0], self.a[1]), (self.b[0], self.b[1])).map_err(|e| CliError::op("family box", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandKind>,
    /// Heisenberg grid; each command has its own default.
    pub grid: Option<GridSpec>,
    pub szego: SzegoConfig,
    pub family: BoxSpec,
    /// Rayleigh evaluations per exponent in `norm-bound`.
    pub budget: usize,
    pub lambdas: Vec<f64>,
    pub exponents: Vec<f64>,
    /// Dimension for `liu`.
    pub n: usize,
    pub seed: u64,
    pub field: FieldKind,
    /// Localisation exponent of the transplant cutoff.
    pub theta: f64,
    /// Result directory; `szego-out/<command>` when absent.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            grid: None,
            szego: SzegoConfig::default(),
            family: BoxSpec::default(),
            budget: 60,
            lambdas: vec![2.0, 4.0, 8.0, 16.0],
            exponents: vec![4.0],
            n: 1,
            seed: 42,
            field: FieldKind::Random,
            theta: 0.5,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigParse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::ConfigParse(m) => CliError::ConfigParse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn command(&self) -> Result<CommandKind, CliError> {
        self.command
            .ok_or_else(|| CliError::ConfigParse("no command given".into()))
    }

    pub fn output_dir(&self) -> Result<PathBuf, CliError> {
        Ok(match &self.output {
            Some(p) => p.clone(),
            None => Path::new("szego-out").join(self.command()?.name()),
        })
    }

    /// Checks numeric fields against the invariants of the operations they feed.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::ConfigParse(m));
        let cmd = self.command()?;
        if let Some(g) = &self.grid {
            g.validate(GridSpec::DEFAULT_MAX_POINTS)
                .map_err(|e| CliError::ConfigParse(format!("grid: {e}")))?;
        }
        self.szego
            .validate()
            .map_err(|e| CliError::ConfigParse(format!("szego: {e}")))?;
        if self.exponents.is_empty() && matches!(cmd, CommandKind::NormBound | CommandKind::Liu) {
            return bad("exponents: empty list".into());
        }
        for &p in &self.exponents {
            if !(p > 1.0 && p.is_finite()) {
                return bad(format!("exponents: p = {p} must be finite and > 1"));
            }
        }
        if cmd == CommandKind::Transplant {
            if self.lambdas.is_empty() {
                return bad("lambdas: empty list".into());
            }
            for &l in &self.lambdas {
                if !(l >= 1.0 && l.is_finite()) {
                    return bad(format!("lambdas: λ = {l} must be finite and ≥ 1"));
                }
            }
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta = {} must lie in (0, 1)", self.theta));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.budget < 20 {
            return bad(format!("budget = {} is below the minimum of 20", self.budget));
        }
        self.family.to_box().map_err(|e| CliError::ConfigParse(e.to_string()))?;
        Ok(())
    }
}
