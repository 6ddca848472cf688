//! Experiment descriptions shared by the command line and `run --config`.
//!
//! Every subcommand is a variant of [`Command`]; a config file names one of
//! them under `experiment` with the same fields the flags take.

use std::path::{Path, PathBuf};

use clap::{Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Determination,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Local slope of a field at one point.
    Slope {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        field: String,
        /// Point id (finite spaces) or comma-separated coordinates (grids).
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Slope resolution; exact on finite spaces and 4h on grids when absent.
        #[arg(long)]
        #[serde(default)]
        eps: Option<f64>,
    },
    /// Ekeland point from a start, with both inequalities checked.
    Ekeland {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long)]
        lambda: f64,
    },
    /// Descent orbit of the determination map.
    Orbit {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_enum, default_value = "determination")]
        #[serde(default = "default_map")]
        map: MapKind,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        /// The point the orbit should reach (x̄).
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value = "f")]
        #[serde(default = "default_f")]
        f: String,
        #[arg(long, default_value = "g")]
        #[serde(default = "default_g")]
        g: String,
        /// Field holding slopes of f; computed at `--slope-eps` when absent.
        #[arg(long)]
        #[serde(default)]
        slope_f: Option<String>,
        #[arg(long)]
        #[serde(default)]
        slope_g: Option<String>,
        #[arg(long)]
        #[serde(default)]
        slope_eps: Option<f64>,
        /// Sharp-minimum gap of f.
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        #[serde(default)]
        max_iter: Option<usize>,
    },
    /// PLR certificate for a catalog entry.
    PlrCheck {
        #[arg(long)]
        catalog: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        center: Vec<f64>,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        #[serde(default)]
        h: Option<f64>,
        /// Catalog file replacing the shipped one.
        #[arg(long)]
        #[serde(default)]
        catalog_file: Option<PathBuf>,
    },
    /// Series bound for sequences read from `{"a": [...], "b": [...]}`.
    SeriesCheck {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        c: f64,
    },
    /// Sharp-minimum transform of a catalog entry.
    SharpMin {
        #[arg(long)]
        catalog: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        center: Vec<f64>,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        delta: f64,
        /// Subgradient at the center; the min-norm one when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        #[serde(default)]
        p: Option<Vec<f64>>,
        #[arg(long)]
        #[serde(default)]
        h: Option<f64>,
        #[arg(long)]
        #[serde(default)]
        catalog_file: Option<PathBuf>,
    },
    /// Determination run on an instance file or a shipped instance id.
    Determine {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        #[serde(default)]
        report: Option<PathBuf>,
        #[arg(long)]
        #[serde(default)]
        csv: Option<PathBuf>,
        /// Two-column plot data: radius and max deviation, or spacing and
        /// certified deviation with `--refine`.
        #[arg(long)]
        #[serde(default)]
        plot: Option<PathBuf>,
        #[arg(long)]
        #[serde(default)]
        h: Option<f64>,
        /// Number of spacing halvings for a refinement study.
        #[arg(long)]
        #[serde(default)]
        refine: Option<usize>,
    },
    /// Shipped catalog entries.
    CatalogList {
        #[arg(long)]
        #[serde(default)]
        catalog_file: Option<PathBuf>,
    },
}

fn default_map() -> MapKind {
    MapKind::Determination
}

fn default_f() -> String {
    "f".into()
}

fn default_g() -> String {
    "g".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub experiment: Command,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn rebase_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        rebase(base, p);
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Slope { .. } => "slope",
            Command::Ekeland { .. } => "ekeland",
            Command::Orbit { .. } => "orbit",
            Command::PlrCheck { .. } => "plr-check",
            Command::SeriesCheck { .. } => "series-check",
            Command::SharpMin { .. } => "sharp-min",
            Command::Determine { .. } => "determine",
            Command::CatalogList { .. } => "catalog-list",
        }
    }

    /// Resolves relative paths in a config file against its directory.
    /// An instance argument is rebased only when the rebased file exists, so
    /// shipped ids pass through.
    pub fn rebase(&mut self, base: &Path) {
        match self {
            Command::Slope { space, .. } | Command::Ekeland { space, .. } | Command::Orbit { space, .. } => {
                rebase(base, space)
            }
            Command::PlrCheck { catalog_file, .. }
            | Command::SharpMin { catalog_file, .. }
            | Command::CatalogList { catalog_file } => rebase_opt(base, catalog_file),
            Command::SeriesCheck { file, .. } => rebase(base, file),
            Command::Determine { instance, report, csv, plot, .. } => {
                let candidate = base.join(&*instance);
                if Path::new(instance).is_relative() && candidate.is_file() {
                    *instance = candidate.to_string_lossy().into_owned();
                }
                rebase_opt(base, report);
                rebase_opt(base, csv);
                rebase_opt(base, plot);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configs_parse_with_defaults() {
        let cfg = ExperimentConfig::parse(
            r#"{"experiment": {"command": "series-check", "file": "s.json", "c": 1.0}}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.experiment.name(), "series-check");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let inner = r#"{"experiment": {"command": "series-check", "file": "s.json", "c": 1.0, "x": 1}}"#;
        assert!(ExperimentConfig::parse(inner).is_err());
        let outer = r#"{"seeds": 1, "experiment": {"command": "catalog-list"}}"#;
        assert!(ExperimentConfig::parse(outer).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let mut cmd = Command::SeriesCheck { file: "s.json".into(), c: 1.0 };
        cmd.rebase(Path::new("/tmp/exp"));
        assert_eq!(cmd, Command::SeriesCheck { file: "/tmp/exp/s.json".into(), c: 1.0 });
        let mut det = Command::Determine {
            instance: "shift_2p5".into(),
            report: None,
            csv: None,
            plot: None,
            h: None,
            refine: None,
        };
        det.rebase(Path::new("/nonexistent"));
        assert!(matches!(det, Command::Determine { ref instance, .. } if instance == "shift_2p5"));
    }
}
