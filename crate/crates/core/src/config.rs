//! Run configuration: a JSON document with one section per solver stage.
//! Unknown keys are rejected and every omitted key takes its default.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq_solver::FreqConfig;
use crate::mesh::Mesh;
use crate::mfunction::RiccatiConfig;
use crate::potential::Potential;
use crate::rational::FitConfig;
use crate::reference::ReferenceConfig;
use crate::time_solver::TimeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub x_minus: f64,
    pub x_plus: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            x_minus: -5.0,
            x_plus: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub order: usize,
    pub elements: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            order: 4,
            elements: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    /// Any of `"csv"`, `"json"`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: "out".into(),
            formats: vec!["csv".into(), "json".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub potential: Potential,
    pub domain: DomainConfig,
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    pub freq: FreqConfig,
    pub abc: FitConfig,
    pub riccati: RiccatiConfig,
    pub reference: ReferenceConfig,
    pub outputs: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: Potential::free(),
            domain: DomainConfig::default(),
            mesh: MeshConfig::default(),
            time: TimeConfig::default(),
            freq: FreqConfig::default(),
            abc: FitConfig::default(),
            riccati: RiccatiConfig::default(),
            reference: ReferenceConfig::default(),
            outputs: OutputConfig::default(),
        }
    }
}

fn in_section(section: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::Config {
            key: format!("{section}.{name}"),
            reason,
        },
        other => Error::Config {
            key: section.into(),
            reason: other.to_string(),
        },
    })
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        in_section("potential", self.potential.validate())?;
        if !(self.domain.x_minus < self.domain.x_plus) {
            return Err(Error::Config {
                key: "domain.x_minus".into(),
                reason: "must be below x_plus".into(),
            });
        }
        if self.mesh.elements == 0 {
            return Err(Error::Config {
                key: "mesh.elements".into(),
                reason: "must be ≥ 1".into(),
            });
        }
        if self.mesh.order == 0 {
            return Err(Error::Config {
                key: "mesh.order".into(),
                reason: "must be ≥ 1".into(),
            });
        }
        in_section("time", self.time.validate())?;
        in_section("freq", self.freq.validate())?;
        in_section("abc", self.abc.validate())?;
        in_section("riccati", self.riccati.validate())?;
        in_section("reference", self.reference.validate())?;
        for f in &self.outputs.formats {
            if f != "csv" && f != "json" {
                return Err(Error::Config {
                    key: "outputs.formats".into(),
                    reason: format!("unknown format {f:?}"),
                });
            }
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        Mesh::new(self.domain.x_minus, self.domain.x_plus, self.mesh.elements, self.mesh.order)
    }

    /// Frequency settings with `σ = 1/T` filled in when unset.
    pub fn freq_resolved(&self) -> FreqConfig {
        let mut f = self.freq.clone();
        if f.sigma.is_none() {
            f.sigma = Some(1.0 / self.time.t_end);
        }
        f
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Parses and validates a JSON configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        key: unknown_key(&e.to_string()).unwrap_or_else(|| "document".into()),
        reason: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn unknown_key(msg: &str) -> Option<String> {
    let rest = msg.split("unknown field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

pub const PRESET_NAMES: &[&str] = &[
    "free_particle_paper",
    "free_particle_desk",
    "coulomb_like_paper",
    "coulomb_like_desk",
    "gaussian_barrier_paper",
    "gaussian_barrier_desk",
    "free_particle",
    "coulomb_like",
    "gaussian_barrier",
];

/// Named configurations for the three standard experiments. The `_paper`
/// variants use order-8 elements, 1024 elements and `dt = 1e-4`; the
/// `_desk` variants (and the bare names) are sized for a quick run.
pub fn preset(name: &str) -> Result<RunConfig> {
    let (base, full) = match name {
        "free_particle" | "coulomb_like" | "gaussian_barrier" => (name, false),
        _ => match name.rsplit_once('_') {
            Some((b, "paper")) => (b, true),
            Some((b, "desk")) => (b, false),
            _ => ("", false),
        },
    };
    let mut cfg = RunConfig::default();
    match base {
        "free_particle" => {
            cfg.potential = Potential::free();
        }
        "coulomb_like" => {
            cfg.potential = Potential::CoulombLike;
            cfg.abc.eps0 = 1e-8;
        }
        "gaussian_barrier" => {
            cfg.potential = Potential::default_barrier();
            cfg.abc.eps0 = 1e-4;
        }
        _ => {
            return Err(Error::Config {
                key: "preset".into(),
                reason: format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", ")),
            })
        }
    }
    cfg.abc.contour_sigma = 1.0;
    cfg.freq.sigma = Some(1.0);
    cfg.freq.output_times = vec![0.5, 0.6, 0.7, 0.8, 0.9];
    cfg.time.snapshot_times = (1..=10).map(|i| i as f64 / 10.0).collect();
    cfg.time.t_end = 1.0;
    if full {
        cfg.mesh = MeshConfig {
            order: 8,
            elements: 1024,
        };
        cfg.time.dt = 1e-4;
        cfg.freq.f_cutoff = 256.0;
        cfg.freq.n_quad = 8097;
    } else {
        cfg.mesh = MeshConfig {
            order: 4,
            elements: 256,
        };
        cfg.time.dt = 1e-3;
        cfg.freq.f_cutoff = 128.0;
        cfg.freq.n_quad = 2049;
    }
    cfg.validate()?;
    Ok(cfg)
}
