//! Run configuration: TOML with a versioned schema, unknown keys rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gsrep::density::{BuiltinKind, DensityParams, MomentumRule};
use gsrep::estimates::TheoremRules;
use gsrep::fieldrep::ConeRule;
use gsrep::spectral::{BinCaps, SpectralRules, XiGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Builtin {
        name: BuiltinKind,
        #[serde(default)]
        params: DensityParams,
    },
    /// Manifest path, relative to the config file when not absolute.
    Grid { manifest: PathBuf },
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec::Builtin { name: BuiltinKind::Gaussian, params: DensityParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub samples: u64,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection { samples: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitySection {
    pub samples: usize,
    pub s_xi_max: f64,
    pub speed_max: f64,
    pub bessel_r_min: f64,
    pub bessel_r_max: f64,
    pub bessel_step: f64,
    pub filter_j_max: u32,
    pub sigma_min: f64,
    pub filter_samples: usize,
}

impl Default for IdentitySection {
    fn default() -> Self {
        IdentitySection {
            samples: 1000,
            s_xi_max: 100.0,
            speed_max: 0.99,
            bessel_r_min: 10.0,
            bessel_r_max: 1e4,
            bessel_step: 1e-2,
            filter_j_max: 12,
            sigma_min: 1e-6,
            filter_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    /// Snapshot lattice points per axis over the support of `u`.
    pub points_per_axis: usize,
    pub cone: ConeRule,
    pub fourier_time: f64,
    /// Cross-validation lattice: `fourier_points³` nodes, `fourier_stride` cells apart.
    pub fourier_points: usize,
    pub fourier_stride: usize,
    pub fourier_tolerance: f64,
    pub conservation_nodes: usize,
    pub conservation_momentum: MomentumRule,
    pub conservation_tolerance: f64,
}

impl Default for FieldSection {
    fn default() -> Self {
        FieldSection {
            points_per_axis: 9,
            cone: ConeRule::default(),
            fourier_time: 1.0,
            fourier_points: 5,
            fourier_stride: 16,
            fourier_tolerance: 1e-3,
            conservation_nodes: 40,
            conservation_momentum: MomentumRule::Spherical { radius: 8.0, radial_nodes: 16, degree: 7 },
            conservation_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    /// Largest index of the filter bank.
    pub j_max: u32,
    pub rules: SpectralRules,
    pub xi: XiGrid,
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection { j_max: 12, rules: SpectralRules::default(), xi: XiGrid::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundSection {
    pub bernstein_j: Vec<u32>,
    pub block_j: Vec<u32>,
    pub caps: BinCaps,
    pub lemma22_j_max: u32,
    pub arithmetic_j_max: u32,
    /// Repeat the fitted sweeps with every resolution doubled.
    pub refine: bool,
}

impl Default for BoundSection {
    fn default() -> Self {
        BoundSection {
            bernstein_j: (1..=8).collect(),
            block_j: (1..=8).collect(),
            caps: BinCaps::uniform(6),
            lemma22_j_max: 10,
            arithmetic_j_max: 30,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub kernels: KernelSection,
    #[serde(default)]
    pub identity: IdentitySection,
    #[serde(default)]
    pub fields: FieldSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub bounds: BoundSection,
    #[serde(default)]
    pub theorem: TheoremRules,
}

fn default_times() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            density: DensitySpec::default(),
            times: default_times(),
            rng_seed: 0,
            output_dir: None,
            threads: None,
            kernels: KernelSection::default(),
            identity: IdentitySection::default(),
            fields: FieldSection::default(),
            spectral: SpectralSection::default(),
            bounds: BoundSection::default(),
            theorem: TheoremRules::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("config field `{name}` must be positive and finite, got {v}");
    }
    Ok(())
}

fn at_least(name: &str, v: u64, min: u64) -> Result<()> {
    if v < min {
        bail!("config field `{name}` must be at least {min}, got {v}");
    }
    Ok(())
}

impl RunConfig {
    /// Parses and validates a config file; grid manifests are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config = Self::parse(&text)?;
        if let DensitySpec::Grid { manifest } = &mut config.density {
            if manifest.is_relative() {
                if let Some(dir) = path.parent() {
                    *manifest = dir.join(&*manifest);
                }
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {}", e.message()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("config field `schema_version` must be {SCHEMA_VERSION}, got {}", self.schema_version);
        }
        if self.times.is_empty() {
            bail!("config field `times` must list at least one time");
        }
        if let Some(t) = self.times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            bail!("config field `times` must hold finite values ≥ 0, got {t}");
        }
        if self.threads == Some(0) {
            bail!("config field `threads` must be at least 1");
        }
        at_least("kernels.samples", self.kernels.samples, 1)?;
        let id = &self.identity;
        at_least("identity.samples", id.samples as u64, 1)?;
        if !(id.s_xi_max >= 0.0 && id.s_xi_max.is_finite()) {
            bail!("config field `identity.s_xi_max` must be finite and ≥ 0, got {}", id.s_xi_max);
        }
        if !(0.0..1.0).contains(&id.speed_max) {
            bail!("config field `identity.speed_max` must lie in [0, 1), got {}", id.speed_max);
        }
        positive("identity.bessel_r_min", id.bessel_r_min)?;
        positive("identity.bessel_step", id.bessel_step)?;
        if !(id.bessel_r_max > id.bessel_r_min && id.bessel_r_max.is_finite()) {
            bail!("config field `identity.bessel_r_max` must exceed `identity.bessel_r_min`");
        }
        if !(id.sigma_min > 0.0 && id.sigma_min < 1.0) {
            bail!("config field `identity.sigma_min` must lie in (0, 1), got {}", id.sigma_min);
        }
        at_least("identity.filter_samples", id.filter_samples as u64, 2)?;
        let fl = &self.fields;
        at_least("fields.points_per_axis", fl.points_per_axis as u64, 1)?;
        at_least("fields.cone.radial_nodes", fl.cone.radial_nodes as u64, 1)?;
        if !(fl.fourier_time >= 0.0 && fl.fourier_time.is_finite()) {
            bail!("config field `fields.fourier_time` must be finite and ≥ 0");
        }
        at_least("fields.fourier_points", fl.fourier_points as u64, 1)?;
        at_least("fields.fourier_stride", fl.fourier_stride as u64, 1)?;
        positive("fields.fourier_tolerance", fl.fourier_tolerance)?;
        at_least("fields.conservation_nodes", fl.conservation_nodes as u64, 1)?;
        positive("fields.conservation_tolerance", fl.conservation_tolerance)?;
        let sp = &self.spectral;
        at_least("spectral.j_max", sp.j_max as u64, 1)?;
        let r = &sp.rules;
        for (name, v) in [
            ("spectral.rules.panel_nodes", r.panel_nodes),
            ("spectral.rules.momentum_nodes", r.momentum_nodes),
            ("spectral.rules.angle_nodes", r.angle_nodes),
            ("spectral.rules.zonal_nodes", r.zonal_nodes),
        ] {
            at_least(name, v as u64, 2)?;
        }
        if r.fft_size < 8 || r.fft_size % 2 != 0 {
            bail!("config field `spectral.rules.fft_size` must be even and at least 8, got {}", r.fft_size);
        }
        positive("spectral.rules.negligible", r.negligible)?;
        match sp.xi {
            XiGrid::Shell { radial_nodes, .. } => at_least("spectral.xi.radial_nodes", radial_nodes as u64, 1)?,
            XiGrid::Cubic { size, .. } => at_least("spectral.xi.size", size as u64, 2)?,
        }
        let b = &self.bounds;
        for (name, js) in [("bounds.bernstein_j", &b.bernstein_j), ("bounds.block_j", &b.block_j)] {
            if js.is_empty() {
                bail!("config field `{name}` must list at least one index");
            }
            if let Some(j) = js.iter().find(|j| **j > sp.j_max) {
                bail!("config field `{name}` holds {j}, above `spectral.j_max` = {}", sp.j_max);
            }
        }
        if b.lemma22_j_max < 3 || b.lemma22_j_max > sp.j_max {
            bail!("config field `bounds.lemma22_j_max` must lie in [3, spectral.j_max], got {}", b.lemma22_j_max);
        }
        at_least("bounds.arithmetic_j_max", b.arithmetic_j_max as u64, 1)?;
        at_least("theorem.grid_nodes", self.theorem.grid_nodes as u64, 1)?;
        at_least("theorem.cone.radial_nodes", self.theorem.cone.radial_nodes as u64, 1)?;
        positive("theorem.tolerance", self.theorem.tolerance)?;
        Ok(())
    }

    /// Sorted-key JSON of everything that influences results; the output
    /// directory and thread count are left out.
    pub fn canonical_json(&self) -> String {
        let stripped = RunConfig { output_dir: None, threads: None, ..self.clone() };
        serde_json::to_string(&serde_json::to_value(&stripped).expect("config serializes")).expect("value serializes")
    }

    /// SHA-256 of [`RunConfig::canonical_json`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = RunConfig::parse("schema_version = 1\n").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = RunConfig::parse("schema_version = 1\nbogus = 3\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn missing_version_rejected() {
        assert!(RunConfig::parse("times = [1.0]\n").is_err());
    }

    #[test]
    fn bad_field_named() {
        let err = RunConfig::parse("schema_version = 1\n[fields]\npoints_per_axis = 0\n").unwrap_err();
        assert!(err.to_string().contains("fields.points_per_axis"), "{err}");
        let err = RunConfig::parse("schema_version = 1\ntimes = [-1.0]\n").unwrap_err();
        assert!(err.to_string().contains("times"), "{err}");
    }

    #[test]
    fn hash_ignores_runtime_knobs() {
        let a = RunConfig::default();
        let b = RunConfig { threads: Some(3), output_dir: Some("x".into()), ..RunConfig::default() };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { rng_seed: 1, ..RunConfig::default() };
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn grid_density_spec_parses() {
        let c = RunConfig::parse("schema_version = 1\n[density]\nsource = \"grid\"\nmanifest = \"g.toml\"\n").unwrap();
        assert_eq!(c.density, DensitySpec::Grid { manifest: "g.toml".into() });
    }
}
