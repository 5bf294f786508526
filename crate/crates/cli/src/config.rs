// SPDX-License-Identifier: Apache-2.0

//! Run configuration: defaults, then a `key = value` file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cmc_spectral::pipeline::{Fixture, FixtureOptions, PERTURBATION_MODE};
use cmc_spectral::spectral::SamplingPlan;
use cmc_spectral::Tolerances;
use num_complex::Complex64;
use serde::Serialize;

pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub fixture: Fixture,
    pub resolution: usize,
    /// Amplitude of the normal bump applied to immersion fixtures.
    pub perturbation: f64,
    pub plan: SamplingPlan,
    pub tolerances: Tolerances,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fixture: Fixture::Clifford,
            resolution: 64,
            perturbation: 0.0,
            plan: SamplingPlan::default(),
            tolerances: Tolerances::default(),
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn fixture_options(&self) -> FixtureOptions {
        FixtureOptions { resolution: self.resolution, perturbation: self.perturbation, mode: PERTURBATION_MODE }
    }

    /// Applies one setting. Keys: `fixture`, `resolution`, `perturbation`,
    /// `seed`, `out`, `plan.<field>`, `tol.<field>` and `tol.all`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        let float = || value.parse::<f64>().with_context(|| format!("{key}: not a number: {value:?}"));
        let int = || value.parse::<usize>().with_context(|| format!("{key}: not a non-negative integer: {value:?}"));
        match key {
            "fixture" => self.fixture = value.parse().map_err(|e: String| anyhow!(e))?,
            "resolution" => self.resolution = int()?,
            "perturbation" => self.perturbation = float()?,
            "seed" => self.seed = value.parse().with_context(|| format!("seed: {value:?}"))?,
            "out" => self.out = PathBuf::from(value),
            "tol.all" => self.tolerances = Tolerances::uniform(float()?),
            "plan.circle" => self.plan.circle = int()?,
            "plan.radial" => self.plan.radial = int()?,
            "plan.angular" => self.plan.angular = int()?,
            "plan.newton_budget" => self.plan.newton_budget = int()?,
            "plan.r_min" => self.plan.r_min = float()?,
            "plan.r_max" => self.plan.r_max = float()?,
            _ => match key.strip_prefix("tol.") {
                Some(name) => {
                    let v = float()?;
                    if !self.tolerances.set(name, v) {
                        bail!("unknown tolerance {name:?}");
                    }
                }
                None => bail!("unknown setting {key:?}"),
            },
        }
        Ok(())
    }

    /// `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), n + 1))?;
            self.set(k, v).with_context(|| format!("{}:{}", path.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            bail!("resolution must be at least {MIN_RESOLUTION}, got {}", self.resolution);
        }
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            bail!("perturbation must be a non-negative number, got {}", self.perturbation);
        }
        self.tolerances.validate().map_err(|e| anyhow!(e))?;
        self.plan.validate().map_err(|e| anyhow!(e))?;
        Ok(())
    }
}

/// `RE[,IM]`, or `cis:THETA` for the unit-circle point at angle θ (radians).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s = s.trim();
    let num = |a: &str| a.trim().parse::<f64>().map_err(|_| format!("not a number: {a:?}"));
    let z = if let Some(theta) = s.strip_prefix("cis:") {
        Complex64::from_polar(1.0, num(theta)?)
    } else {
        match s.split_once(',') {
            Some((re, im)) => Complex64::new(num(re)?, num(im)?),
            None => Complex64::new(num(s)?, 0.0),
        }
    };
    if z.is_finite() {
        Ok(z)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_override_defaults() {
        let mut c = RunConfig::default();
        c.set("fixture", "homogeneous:0.6").unwrap();
        c.set("tol.willmore", "1e-3").unwrap();
        c.set("plan.radial", "20").unwrap();
        assert_eq!(c.fixture, Fixture::Homogeneous { r: 0.6 });
        assert_eq!(c.tolerances.willmore, 1e-3);
        assert_eq!(c.plan.radial, 20);
        assert!(c.set("tol.nonsense", "1").is_err());
        assert!(c.set("colour", "red").is_err());
    }

    #[test]
    fn small_grids_are_rejected() {
        let c = RunConfig { resolution: 8, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn complex_syntax() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("1,-2").unwrap(), Complex64::new(1.0, -2.0));
        assert!((parse_complex("cis:0").unwrap() - 1.0).norm() < 1e-15);
        assert!(parse_complex("x").is_err());
    }
}
