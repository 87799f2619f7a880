use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use kuhn_mbbr::agent::MbbrConfig;
use kuhn_mbbr::bayes::PriorMode;
use kuhn_mbbr::harness::AgentSpec;
use kuhn_mbbr::strategy::{nash_profile, parse_profile, NashPoint};

/// Settings shared by every subcommand. Any field may also come from a JSON
/// file passed with `--config`; flags win over the file.
#[derive(Args, Debug, Default, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; derived from entropy and printed when omitted
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Hands per match
    #[arg(long, global = true)]
    pub hands: Option<usize>,
    /// Duplicate sets per grouping
    #[arg(long, global = true)]
    pub matches: Option<usize>,
    /// Prior rounding threshold
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Samples per opponent model
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Hands played with the default strategy before exploiting
    #[arg(long = "switch-h", global = true)]
    pub switch_h: Option<usize>,
    /// Dirichlet scaling factor
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// informed or uniform2
    #[arg(long, global = true)]
    pub prior: Option<String>,
    /// Equilibrium point played before the switch: lower, mid or upper
    #[arg(long, global = true)]
    pub default_strategy: Option<String>,
    /// Equilibrium point used as the prior mean: lower, mid or upper
    #[arg(long, global = true)]
    pub prior_mean: Option<String>,
    /// Output file
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Keep every agent in its starting seat for the whole match
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub fixed_seats: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fills every unset field from `file`.
    pub fn or(self, file: RunConfig) -> RunConfig {
        RunConfig {
            seed: self.seed.or(file.seed),
            hands: self.hands.or(file.hands),
            matches: self.matches.or(file.matches),
            epsilon: self.epsilon.or(file.epsilon),
            k: self.k.or(file.k),
            switch_h: self.switch_h.or(file.switch_h),
            eta: self.eta.or(file.eta),
            prior: self.prior.or(file.prior),
            default_strategy: self.default_strategy.or(file.default_strategy),
            prior_mean: self.prior_mean.or(file.prior_mean),
            out: self.out.or(file.out),
            threads: self.threads.or(file.threads),
            fixed_seats: self.fixed_seats.or(file.fixed_seats),
        }
    }

    pub fn hands(&self) -> usize {
        self.hands.unwrap_or(3000)
    }

    pub fn matches(&self) -> usize {
        self.matches.unwrap_or(10)
    }

    pub fn rotate_seats(&self) -> bool {
        !self.fixed_seats.unwrap_or(false)
    }

    pub fn mbbr(&self) -> Result<MbbrConfig> {
        let defaults = MbbrConfig::default();
        let point = |name: &Option<String>, fallback: NashPoint| -> Result<NashPoint> {
            match name {
                Some(n) => Ok(n.parse()?),
                None => Ok(fallback),
            }
        };
        let prior_mode: PriorMode = match &self.prior {
            Some(p) => p.parse()?,
            None => defaults.prior_mode,
        };
        let hands = self.hands();
        let cfg = MbbrConfig {
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            k: self.k.unwrap_or(defaults.k),
            eta: self.eta.unwrap_or(defaults.eta),
            switch_hand: self.switch_h.unwrap_or(defaults.switch_hand.min(hands)),
            total_hands: hands,
            default_profile: nash_profile(point(&self.default_strategy, NashPoint::Lower)?),
            prior_mean: nash_profile(point(&self.prior_mean, NashPoint::Midpoint)?),
            prior_mode,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Resolves an agent name. `MBBR` takes the configured parameters and
/// `file:PATH` loads a fixed profile from a strategy file.
pub fn agent(name: &str, mbbr: &MbbrConfig) -> Result<AgentSpec> {
    let name = name.trim();
    if let Some(path) = name.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let profile = parse_profile(&text).with_context(|| format!("parsing {path}"))?;
        let label = Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.to_string());
        return Ok(AgentSpec::Fixed {
            name: label,
            profile: Box::new(profile),
        });
    }
    if name.eq_ignore_ascii_case("mbbr") {
        return Ok(AgentSpec::mbbr(mbbr.clone()));
    }
    name.parse()
        .with_context(|| format!("unknown agent `{name}`"))
}

pub fn agents(names: &[String], mbbr: &MbbrConfig) -> Result<Vec<AgentSpec>> {
    names.iter().map(|n| agent(n, mbbr)).collect()
}

pub fn triple(agents: Vec<AgentSpec>) -> Result<[AgentSpec; 3]> {
    match <[AgentSpec; 3]>::try_from(agents) {
        Ok(t) => Ok(t),
        Err(v) => bail!("expected exactly 3 agents, got {}", v.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let flags = RunConfig {
            k: Some(5),
            ..RunConfig::default()
        };
        let file = RunConfig {
            k: Some(20),
            eta: Some(2.0),
            ..RunConfig::default()
        };
        let merged = flags.or(file);
        assert_eq!(merged.k, Some(5));
        assert_eq!(merged.eta, Some(2.0));
    }

    #[test]
    fn defaults_match_reference_settings() {
        let cfg = RunConfig::default().mbbr().unwrap();
        assert_eq!(cfg, MbbrConfig::default());
    }

    #[test]
    fn unknown_config_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"kk": 3}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"k": 3, "switch_h": 0}"#).unwrap();
        assert_eq!(c.mbbr().unwrap().switch_hand, 0);
    }

    #[test]
    fn bad_names_rejected() {
        let cfg = MbbrConfig::default();
        assert!(agent("shark", &cfg).is_err());
        assert!(RunConfig {
            prior: Some("flat".into()),
            ..RunConfig::default()
        }
        .mbbr()
        .is_err());
        assert!(triple(agents(&["N1".into(), "N2".into()], &cfg).unwrap()).is_err());
    }
}
