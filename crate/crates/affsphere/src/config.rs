//! Run configuration: a JSON document with a `schema_version` field. Every
//! section is optional and falls back to the documented defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::literal::DifferentialLiteral;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub differential: Option<DifferentialLiteral>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub rays: RaySection,
    #[serde(default)]
    pub holonomy: HolonomySection,
    #[serde(default)]
    pub classify: ClassifySection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Seed for randomized sweeps.
    #[serde(default)]
    pub seed: u64,
}

fn default_resolution() -> usize {
    128
}

/// Where the Wang equation is solved. Grid domains use a square grid with
/// `resolution` nodes across; radial domains use `resolution` radial nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    RadialDisk { radius: f64 },
    RadialAnnulus { inner: f64, outer: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub cg_tol: f64,
    pub max_newton: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { tol: 1e-10, cg_tol: 1e-12, max_newton: 60 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaySection {
    /// Base point `[x, y]` of the developing map.
    pub base: [f64; 2],
    pub step: f64,
    pub tol: f64,
    pub max_flat_time: f64,
    /// Flat offsets of extra rays sampled on each polygon edge.
    pub edge_offsets: Vec<f64>,
    pub collinearity_tol: f64,
    /// Chart radius of the developed sample points drawn in the SVG.
    pub sample_radius: f64,
}

impl Default for RaySection {
    fn default() -> Self {
        RaySection {
            base: [0.0, 0.0],
            step: 1e-2,
            tol: 1e-10,
            max_flat_time: 60.0,
            edge_offsets: Vec::new(),
            collinearity_tol: 1e-6,
            sample_radius: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolonomySection {
    /// Residue `[re, im]` of `R z⁻³ dz³`.
    pub residue: [f64; 2],
    pub loop_radius: f64,
    pub step: f64,
    pub rel_tol: f64,
    pub ray_tol: f64,
    /// Sine tolerance for the boundary line and its eigenvectors.
    pub line_tol: f64,
    pub eigen_gap: f64,
}

impl Default for HolonomySection {
    fn default() -> Self {
        HolonomySection {
            residue: [1.0, 0.0],
            loop_radius: 1.0,
            step: 1e-3,
            rel_tol: 1e-3,
            ray_tol: 1e-8,
            line_tol: 1e-3,
            eigen_gap: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleSpec {
    Zero,
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    pub pole: PoleSpec,
}

impl Default for ClassifySection {
    fn default() -> Self {
        ClassifySection { pole: PoleSpec::Zero }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub k: u32,
    pub radii: Vec<f64>,
    /// Radius of the zero-free disk the fine bound starts from.
    pub r1: f64,
    /// Bulk radial step of the disk solves.
    pub step: f64,
    /// Distance from the rim where the complete solution is cut off.
    pub rim_gap: f64,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection { k: 3, radii: (4..=12).map(f64::from).collect(), r1: 2.0, step: 1e-2, rim_gap: 1e-3 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Command-line values that replace their config fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
}

impl RunConfig {
    /// A config with every section at its default.
    pub fn new() -> RunConfig {
        serde_json::from_str(&format!("{{\"schema_version\": {SCHEMA_VERSION}}}")).expect("minimal config parses")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| AppError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        RunConfig::from_json(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.out {
            self.output.dir = Some(dir.clone());
        }
        if let Some(n) = o.resolution {
            self.resolution = n;
        }
        if let Some(t) = o.tol {
            self.solver.tol = t;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(AppError::field(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.resolution < 32 {
            return Err(AppError::field("resolution", format!("{} is below 32", self.resolution)));
        }
        let positive = [
            ("solver.tol", self.solver.tol),
            ("solver.cg_tol", self.solver.cg_tol),
            ("rays.step", self.rays.step),
            ("rays.tol", self.rays.tol),
            ("rays.max_flat_time", self.rays.max_flat_time),
            ("rays.collinearity_tol", self.rays.collinearity_tol),
            ("rays.sample_radius", self.rays.sample_radius),
            ("holonomy.loop_radius", self.holonomy.loop_radius),
            ("holonomy.step", self.holonomy.step),
            ("holonomy.rel_tol", self.holonomy.rel_tol),
            ("holonomy.ray_tol", self.holonomy.ray_tol),
            ("holonomy.line_tol", self.holonomy.line_tol),
            ("holonomy.eigen_gap", self.holonomy.eigen_gap),
            ("bounds.step", self.bounds.step),
            ("bounds.rim_gap", self.bounds.rim_gap),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(AppError::field(name, format!("must be positive and finite, got {x}")));
            }
        }
        if self.solver.max_newton == 0 {
            return Err(AppError::field("solver.max_newton", "must be at least 1"));
        }
        if self.bounds.k == 0 {
            return Err(AppError::field("bounds.k", "must be at least 1"));
        }
        if !(self.bounds.r1 >= 0.0) {
            return Err(AppError::field("bounds.r1", "must be non-negative"));
        }
        if let Some(r) = self.bounds.radii.iter().find(|r| !(**r > self.bounds.rim_gap && r.is_finite())) {
            return Err(AppError::field("bounds.radii", format!("radius {r} is not above rim_gap")));
        }
        if !self.holonomy.residue.iter().all(|x| x.is_finite()) {
            return Err(AppError::field("holonomy.residue", "must be finite"));
        }
        if let Some(d) = &self.domain {
            d.validate()?;
        }
        if let Some(lit) = &self.differential {
            lit.to_differential()?;
        }
        Ok(())
    }

    /// Output directory, created if missing.
    pub fn output_dir(&self) -> Result<Option<PathBuf>> {
        let Some(dir) = &self.output.dir else { return Ok(None) };
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        let probe = dir.join(".affsphere-write-test");
        std::fs::write(&probe, b"").map_err(|e| AppError::io(&probe, e))?;
        let _ = std::fs::remove_file(&probe);
        Ok(Some(dir.clone()))
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::new()
    }
}

impl DomainSpec {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::Disk { radius } | DomainSpec::RadialDisk { radius } => radius > 0.0 && radius.is_finite(),
            DomainSpec::Annulus { inner, outer } | DomainSpec::RadialAnnulus { inner, outer } => {
                inner > 0.0 && outer > inner && outer.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(AppError::field("domain", format!("degenerate domain {self:?}")))
        }
    }
}
