//! Run configuration: command-line flags merged over an optional TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use roughsq::verify::{Tier, VerifyConfig, DEFAULT_SEED};

/// Keys accepted in a configuration file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<String>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub function: Option<String>,
    pub tier: Option<Tier>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub experiment: Option<String>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub function: Option<String>,
    pub tier: Option<Tier>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: String,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub function: Option<String>,
    pub tier: Tier,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunConfig {
    /// Flags win over the file; the seed defaults to [`DEFAULT_SEED`], the
    /// tier to standard and the output directory to `out/<experiment>`.
    pub fn resolve(flags: Flags, file: FileConfig) -> Result<Self> {
        let experiment = match flags.experiment.or(file.experiment) {
            Some(e) if !e.trim().is_empty() => e.trim().to_string(),
            _ => bail!("no experiment given (pass an id or set `experiment` in the config file)"),
        };
        let out = flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("out").join(&experiment));
        let cfg = RunConfig {
            alpha: flags.alpha.or(file.alpha),
            p: flags.p.or(file.p),
            function: flags.function.or(file.function),
            tier: flags.tier.or(file.tier).unwrap_or_default(),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            experiment,
            out,
        };
        for (name, v) in [("alpha", cfg.alpha), ("p", cfg.p)] {
            if let Some(x) = v {
                if !x.is_finite() {
                    bail!("--{name} must be finite, got {x}");
                }
            }
        }
        Ok(cfg)
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig::default().with_tier(self.tier).with_seed(self.seed)
    }
}

/// Thread count from `ROUGHSQ_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("ROUGHSQ_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("ROUGHSQ_THREADS = `{v}` is not a count"))?;
            if n == 0 {
                bail!("ROUGHSQ_THREADS must be at least 1");
            }
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("ROUGHSQ_THREADS: {e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_the_file() {
        let file = FileConfig::parse("experiment = \"menger-bound\"\nalpha = 0.75\ntier = \"quick\"\nseed = 5\n").unwrap();
        let flags = Flags { alpha: Some(1.25), ..Flags::default() };
        let cfg = RunConfig::resolve(flags, file).unwrap();
        assert_eq!(cfg.experiment, "menger-bound");
        assert_eq!(cfg.alpha, Some(1.25));
        assert_eq!(cfg.tier, Tier::Quick);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.out, PathBuf::from("out/menger-bound"));
    }

    #[test]
    fn defaults_apply() {
        let flags = Flags { experiment: Some("q-equivalence".into()), ..Flags::default() };
        let cfg = RunConfig::resolve(flags, FileConfig::default()).unwrap();
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.tier, Tier::Standard);
    }

    #[test]
    fn unknown_keys_and_missing_experiment_are_rejected() {
        assert!(FileConfig::parse("alpha = 1.0\nresolution = 3\n").is_err());
        assert!(FileConfig::parse("tier = \"fast\"\n").is_err());
        assert!(RunConfig::resolve(Flags::default(), FileConfig::default()).is_err());
        let flags = Flags { experiment: Some("x".into()), alpha: Some(f64::NAN), ..Flags::default() };
        assert!(RunConfig::resolve(flags, FileConfig::default()).is_err());
    }
}
