//! Whole-pipeline configuration, loadable from one TOML file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::behavior::BehaviorConfig;
use crate::emd::EmdConfig;
use crate::error::{Error, Result};
use crate::foe::FoeConfig;
use crate::risk::{Criterion, GammaProfile, RegionGeometry, RiskParams};
use crate::vision::VisionConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub criterion: Criterion,
    /// Largest frame-to-GPS time offset accepted by the report join, seconds.
    pub gps_tolerance: f64,
    pub vision: VisionConfig,
    pub foe: FoeConfig,
    pub risk: RiskParams,
    pub regions: RegionGeometry,
    pub emd: EmdConfig,
    pub behavior: BehaviorConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            criterion: Criterion::Lane,
            gps_tolerance: 0.5,
            vision: VisionConfig::default(),
            foe: FoeConfig::default(),
            risk: RiskParams::default(),
            regions: RegionGeometry::default(),
            emd: EmdConfig::default(),
            behavior: BehaviorConfig::default(),
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            Error::Config(format!("line {}: {}", crate::io::toml_line(text, &e), e.message()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Normalized form: every field written out, fixed key order.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Set one dotted key, e.g. `vision.lk.window = 21`. The value is read
    /// as a TOML literal, falling back to a bare string.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut table = toml::Table::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        let parts: Vec<&str> = key.split('.').collect();
        let (last, path) = parts.split_last().expect("split yields one part");
        let mut cur = &mut table;
        for p in path {
            cur = cur
                .entry(p.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("`{p}` in `{key}` is not a section")))?;
        }
        cur.insert(last.to_string(), parsed);
        let next: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{key}: {}", e.message())))?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.vision;
        check(v.clip_limit > 0.0 && v.clip_limit <= 1.0, || format!("clip_limit {} outside (0, 1]", v.clip_limit))?;
        check(v.clahe_grid.0 >= 1 && v.clahe_grid.1 >= 1, || "clahe_grid needs at least one tile".into())?;
        let c = &v.corners;
        check(c.quality > 0.0 && c.quality < 1.0, || format!("corner quality {} outside (0, 1)", c.quality))?;
        check(c.max_per_cell >= 1, || "max_per_cell must be >= 1".into())?;
        check(c.grid.0 >= 1 && c.grid.1 >= 1, || "corner grid needs at least one cell".into())?;
        check(c.min_distance >= 0.0, || "min_distance must be >= 0".into())?;
        let l = &v.lk;
        check(l.window % 2 == 1 && l.window >= 3, || format!("LK window {} must be odd and >= 3", l.window))?;
        check(l.max_iters >= 1 && l.epsilon > 0.0 && l.min_eigen > 0.0, || {
            "LK iterations, epsilon and min_eigen must be positive".into()
        })?;
        check(v.skip >= 1, || "skip must be >= 1".into())?;

        self.foe.huber.validate()?;
        let r = self.foe.annulus_radii;
        check(r[0] > 0.0 && r[0] < r[1] && r[1] < r[2], || format!("annulus radii {r:?} must increase"))?;
        check(self.foe.smooth_tau >= 0.0, || "smooth_tau must be >= 0".into())?;

        self.risk.validate()?;
        let g = &self.regions;
        check(0.0 < g.red_base && g.red_base < g.yellow_base && g.yellow_base <= 1.0, || {
            "wedge bases need 0 < red_base < yellow_base <= 1".into()
        })?;
        let p = g.proximity_radii;
        check(p[0] > 0.0 && p.windows(2).all(|w| w[0] < w[1]), || format!("proximity radii {p:?} must increase"))?;

        check(self.emd.cross_region_factor > 1.0, || {
            format!("cross_region_factor {} must be > 1", self.emd.cross_region_factor)
        })?;
        check(self.emd.k >= 1, || "k must be >= 1".into())?;

        let b = &self.behavior;
        check(b.c > 0.0 && b.c.is_finite(), || format!("C = {} must be positive", b.c))?;
        check(b.preprocess.trim >= 0.0 && b.preprocess.tolerance > 0.0, || "bad preprocessing parameters".into())?;
        check(b.rfe_top.is_none_or(|m| m >= 1), || "rfe_top must be >= 1".into())?;
        check(b.smo.tol > 0.0, || "SMO tolerance must be > 0".into())?;
        let s = &b.smoother;
        check(s.window >= 1 && s.lambda >= 0.0 && s.sigma.is_none_or(|x| x > 0.0), || {
            "smoother needs window >= 1, lambda >= 0 and sigma > 0".into()
        })?;
        check(self.gps_tolerance >= 0.0, || "gps_tolerance must be >= 0".into())?;
        Ok(())
    }
}

/// Standalone `[base, row]` gamma table in TOML.
pub fn load_gamma_profile(path: &Path) -> Result<GammaProfile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let g: GammaProfile = toml::from_str(&text).map_err(|e| {
        Error::Config(format!("{} line {}: {}", path.display(), crate::io::toml_line(&text, &e), e.message()))
    })?;
    g.validate()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_is_idempotent() {
        let cfg = PipelineConfig::from_toml("criterion = \"proximity\"\n[emd]\nk = 3\n").unwrap();
        assert_eq!(cfg.emd.k, 3);
        assert_eq!(cfg.emd.cross_region_factor, 2.0);
        let canon = cfg.to_canonical();
        let again = PipelineConfig::from_toml(&canon).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_canonical(), canon);
    }

    #[test]
    fn dotted_overrides() {
        let mut cfg = PipelineConfig::default();
        cfg.set("vision.lk.window", "21").unwrap();
        cfg.set("criterion", "proximity").unwrap();
        cfg.set("behavior.rfe_top", "8").unwrap();
        assert_eq!(cfg.vision.lk.window, 21);
        assert_eq!(cfg.criterion, Criterion::Proximity);
        assert_eq!(cfg.behavior.rfe_top, Some(8));
        assert!(cfg.set("vision.lk.window", "20").is_err());
        assert!(cfg.set("vision.nope", "1").is_err());
        assert_eq!(cfg.vision.lk.window, 21);
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            "[emd]\ncross_region_factor = 1.0\n",
            "[vision.lk]\nwindow = 34\n",
            "[behavior]\nC = -1.0\n",
            "[foe.huber]\ndelta = 0.0\n",
            "unknown = 1\n",
        ] {
            assert!(matches!(PipelineConfig::from_toml(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
