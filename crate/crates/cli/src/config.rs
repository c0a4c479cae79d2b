use anyhow::{bail, Context, Result};
use maxqed::green1d::{Grid1D, LayerStack};
use maxqed::materials::{preset, MaterialModel};
use maxqed::tdsim::Boundary;
use maxqed::verify::{SuiteSettings, Tolerances};
use maxqed::UnitsKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            omega_min: 0.1,
            omega_max: 5.0,
            count: 50,
            spacing: Spacing::Linear,
        }
    }
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_max.is_finite()) {
            bail!("sweep bounds must be positive and finite (omega_min = {}, omega_max = {})", self.omega_min, self.omega_max);
        }
        if self.count == 0 {
            bail!("sweep count must be at least 1");
        }
        if self.count > 1 && !(self.omega_max > self.omega_min) {
            bail!("sweep bounds must be ordered (omega_min = {} >= omega_max = {})", self.omega_min, self.omega_max);
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.omega_min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let s = k as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.omega_min + s * (self.omega_max - self.omega_min),
                    Spacing::Log => self.omega_min * (self.omega_max / self.omega_min).powf(s),
                }
            })
            .collect()
    }
}

/// Either explicit bounds, or the stack extent padded by `margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub h: f64,
    pub margin: f64,
    pub start: Option<f64>,
    pub end: Option<f64>,
    /// Source position of the exported Green-function slices. Defaults to
    /// half the margin left of the first interface.
    pub source: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            h: 0.02,
            margin: 2.0,
            start: None,
            end: None,
            source: None,
        }
    }
}

impl GridSpec {
    pub fn build(&self, stack: &LayerStack) -> Result<Grid1D> {
        if !(self.h > 0.0) {
            bail!("grid step must be positive, got {}", self.h);
        }
        let grid = match (self.start, self.end) {
            (Some(a), Some(b)) => Grid1D::spanning(a, b, self.h)?,
            (None, None) => Grid1D::covering(stack, self.h, self.margin)?,
            _ => bail!("grid needs both start and end, or neither"),
        };
        grid.check_covers(stack).map_err(|e| anyhow::anyhow!("grid mismatch: {e}"))?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub center: f64,
    pub width: f64,
    pub carrier: f64,
    pub amplitude: f64,
    pub direction: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            center: -15.0,
            width: 2.0,
            carrier: 1.0,
            amplitude: 1.0,
            direction: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_omega: usize,
    /// `null` picks half the tighter stability limit.
    pub dt: Option<f64>,
    pub duration: f64,
    /// Record every this many steps.
    pub every: usize,
    pub periodic: bool,
    pub pulse: PulseConfig,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n_omega: 200,
            dt: None,
            duration: 20.0 * std::f64::consts::PI,
            every: 10,
            periodic: false,
            pulse: PulseConfig::default(),
        }
    }
}

impl SimulateConfig {
    pub fn boundary(&self) -> Boundary {
        if self.periodic {
            Boundary::Periodic
        } else {
            Boundary::Closed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Used when no subcommand is given on the command line.
    pub command: Option<String>,
    /// Material descriptor file, or the name of a built-in preset.
    pub material: Option<String>,
    /// Layer-stack descriptor file.
    pub stack: Option<String>,
    pub sweep: Sweep,
    pub grid: GridSpec,
    pub out: Option<PathBuf>,
    pub units: UnitsKind,
    pub tolerances: Tolerances,
    pub suite: SuiteSettings,
    pub simulate: SimulateConfig,
    /// Directory relative paths resolve against; the config file's own.
    #[serde(skip)]
    pub base: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            material: Some("single-lorentz".into()),
            stack: None,
            sweep: Sweep::default(),
            grid: GridSpec::default(),
            out: None,
            units: UnitsKind::Natural,
            tolerances: Tolerances::default(),
            suite: SuiteSettings::default(),
            simulate: SimulateConfig::default(),
            base: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Checks that referenced files exist and the sweep is well formed.
    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        if let Some(m) = &self.material {
            if preset(m).is_none() && !self.resolve(m).is_file() {
                bail!("material '{m}' is neither a preset nor an existing file ({})", self.resolve(m).display());
            }
        }
        if let Some(s) = &self.stack {
            if !self.resolve(s).is_file() {
                bail!("stack file {} does not exist", self.resolve(s).display());
            }
        }
        Ok(())
    }

    pub fn material(&self) -> Result<MaterialModel> {
        let name = self.material.as_deref().context("config names no material")?;
        if let Some(m) = preset(name) {
            return Ok(m);
        }
        let path = self.resolve(name);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading material {}", path.display()))?;
        MaterialModel::from_json(&text).with_context(|| format!("material {}", path.display()))
    }

    pub fn stack(&self) -> Result<LayerStack> {
        let path = self.resolve(self.stack.as_deref().context("config names no stack")?);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading stack {}", path.display()))?;
        LayerStack::from_json(&text).with_context(|| format!("stack {}", path.display()))
    }

    /// SHA-256 of the effective configuration, as compact JSON.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).unwrap_or_default();
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_points_hit_both_ends() {
        let s = Sweep {
            omega_min: 0.5,
            omega_max: 8.0,
            count: 5,
            spacing: Spacing::Log,
        };
        let p = s.points();
        assert_eq!(p.len(), 5);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[4] - 8.0).abs() < 1e-12);
        assert!((p[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_sweeps_are_rejected() {
        for (a, b, n) in [(0.0, 1.0, 5), (2.0, 1.0, 5), (1.0, 2.0, 0), (-1.0, 2.0, 3)] {
            let s = Sweep {
                omega_min: a,
                omega_max: b,
                count: n,
                ..Sweep::default()
            };
            assert!(s.validate().is_err(), "{a} {b} {n}");
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.tolerances.fdt = 2e-6;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn unknown_keys_are_refused() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"swep": {}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"tolerances": {"fdt": 1e-5}}"#).is_ok());
    }
}
