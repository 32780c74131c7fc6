//! TOML pipeline configuration.
//!
//! ```toml
//! [camera]
//! fx = 40.0
//! fy = 40.0
//! cx = 31.5
//! cy = 31.5
//! width = 64
//! height = 64
//!
//! [light]            # optional, defaults to a point light at the camera centre
//! position = [0.0, 0.0, 0.0]
//! direction = [0.0, 0.0, 1.0]
//! mu = 0.0
//!
//! [render]           # optional
//! sigma0 = 1.0
//! gain = 1.0
//! gamma = 2.2
//! mu_r = 0.0
//!
//! [mask]             # optional
//! threshold = 0.98
//!
//! [weights]          # optional, loss weights
//! [refine]           # optional, see RefineConfig
//!
//! [scene]            # needed only by `render`
//! surface = { kind = "tube", radius = 10.0, length = 60.0 }
//! albedo = { kind = "constant", rgb = [0.8, 0.55, 0.45] }
//!
//! [paths]            # optional; relative paths resolve against the file
//! output_dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, LightSpec};
use crate::losses::LossWeights;
use crate::photometrics::{RenderModel, SceneSpec, SPECULAR_THRESHOLD};
use crate::refine::RefineConfig;
use crate::vec3::Vec3;
use crate::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSection {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightSection {
    pub position: [f64; 3],
    pub direction: [f64; 3],
    pub mu: f64,
}

impl Default for LightSection {
    fn default() -> Self {
        Self {
            position: [0.0; 3],
            direction: [0.0, 0.0, 1.0],
            mu: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSection {
    pub sigma0: f64,
    pub gain: f64,
    pub gamma: f64,
    pub mu_r: f64,
}

impl Default for RenderSection {
    fn default() -> Self {
        Self {
            sigma0: 1.0,
            gain: 1.0,
            gamma: 1.0,
            mu_r: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub threshold: f64,
}

impl Default for MaskSection {
    fn default() -> Self {
        Self {
            threshold: SPECULAR_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub image: Option<PathBuf>,
    pub depth: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub camera: CameraSection,
    #[serde(default)]
    pub light: LightSection,
    #[serde(default)]
    pub render: RenderSection,
    #[serde(default)]
    pub mask: MaskSection,
    #[serde(default)]
    pub weights: LossWeights,
    #[serde(default)]
    pub refine: RefineConfig,
    #[serde(default)]
    pub scene: Option<SceneSpec>,
    #[serde(default)]
    pub paths: PathsSection,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses, validates, resolves relative paths against the file's
    /// directory and checks that input paths exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [&mut cfg.paths.image, &mut cfg.paths.depth, &mut cfg.paths.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for p in [&cfg.paths.image, &cfg.paths.depth].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Config(format!("input path {} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.camera::<f64>()?;
        self.light::<f64>()?;
        self.render_model::<f64>()?;
        if !(self.mask.threshold > 0.0 && self.mask.threshold <= 1.0) {
            return Err(Error::Config(format!(
                "mask threshold {} outside (0, 1]",
                self.mask.threshold
            )));
        }
        self.weights.validate()?;
        self.refine.validate()?;
        Ok(())
    }

    pub fn camera<T: Real>(&self) -> Result<CameraIntrinsics<T>> {
        let c = &self.camera;
        CameraIntrinsics::new(T::lit(c.fx), T::lit(c.fy), T::lit(c.cx), T::lit(c.cy), c.width, c.height)
    }

    pub fn light<T: Real>(&self) -> Result<LightSpec<T>> {
        let l = &self.light;
        LightSpec::new(
            Vec3::from(l.position.map(T::lit)),
            Vec3::from(l.direction.map(T::lit)),
            T::lit(l.mu),
        )
    }

    pub fn render_model<T: Real>(&self) -> Result<RenderModel<T>> {
        let r = &self.render;
        RenderModel::new(T::lit(r.sigma0), T::lit(r.gain), T::lit(r.gamma), T::lit(r.mu_r))
    }

    pub fn scene(&self) -> Result<&SceneSpec> {
        self.scene
            .as_ref()
            .ok_or_else(|| Error::Config("config has no [scene] section".into()))
    }
}
