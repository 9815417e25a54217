//! Measure constants and evaluation options, loadable from TOML or JSON.
//!
//! Every weight used by the no-reference measures lives in one versioned
//! record so alternates can be tested from a config file without touching
//! code, and so a report can state exactly which constants produced it.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The weight set the measures were defined with. `version` changes whenever
/// a shipped default changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    pub version: String,
    /// UCIQE weights for (sigma_c, con_l, mu_s).
    pub uciqe_weights: [f64; 3],
    /// UIQM weights for (uicm, uism, uiconm).
    pub uiqm_weights: [f64; 3],
    /// UICM combination coefficients for (mean term, variance term).
    pub uicm_coefficients: [f64; 2],
    /// Trim fraction per tail for the UICM opponent statistics.
    pub uicm_trim_alpha: f64,
    /// CCF weights for (colorfulness, contrast, fog_density).
    pub ccf_weights: [f64; 3],
    /// Tile side for the blockwise sharpness and contrast statistics.
    pub block_size: usize,
    /// PLIP parameter for the gated UIConM variant.
    pub plip_gamma: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            version: "1".into(),
            uciqe_weights: [0.4680, 0.2745, 0.2576],
            uiqm_weights: [0.0282, 0.2953, 3.5753],
            uicm_coefficients: [-0.0268, 0.1586],
            uicm_trim_alpha: 0.1,
            ccf_weights: [0.17593, 0.61759, 0.33988],
            block_size: 8,
            plip_gamma: 1026.0,
        }
    }
}

/// Which luminance feeds the UCIQE extreme-percentile contrast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UciqeLuminance {
    /// CIELab L in [0,100] (default).
    LabL,
    /// 8-bit luma in [0,255].
    Luma8,
}

/// How the angular error of a patch is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiMode {
    /// Angle of the mean patch colour (default).
    MeanColor,
    /// Mean of the per-pixel angles.
    PerPixel,
}

/// SSIM parameters: odd window side, stabilizers, peak sample value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsimSettings {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimSettings {
    fn default() -> Self {
        Self { window: 11, sigma: 1.5, k1: 0.01, k2: 0.03, dynamic_range: 255.0 }
    }
}

/// Everything the measures and the checker protocol can be tuned with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub constants: Constants,
    pub ssim: SsimSettings,
    /// Raw Sobel magnitude above which a pixel counts as a visible edge.
    pub edge_threshold: f64,
    pub uciqe_luminance: UciqeLuminance,
    /// Use parameterized-PLIP arithmetic inside UIConM instead of the plain
    /// Michelson log form.
    pub uiconm_plip: bool,
    pub phi_mode: PhiMode,
    /// Score the angular error on every patch instead of only achromatic ones.
    pub phi_all_patches: bool,
    /// Polygon erosion in pixels before patch statistics.
    pub patch_erosion: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            constants: Constants::default(),
            ssim: SsimSettings::default(),
            edge_threshold: 25.0,
            uciqe_luminance: UciqeLuminance::LabL,
            uiconm_plip: false,
            phi_mode: PhiMode::MeanColor,
            phi_all_patches: false,
            patch_erosion: 2.0,
        }
    }
}

impl MetricConfig {
    /// Reads a config from a `.toml` or `.json` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::FileRead {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        let cfg: Self = if is_json {
            serde_json::from_str(&text).map_err(|e| Error::Config {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?
        };
        cfg.validate().map_err(|reason| Error::Config { path: path.to_path_buf(), reason })?;
        Ok(cfg)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.ssim.window < 3 || self.ssim.window % 2 == 0 {
            return Err(format!("ssim window {} must be odd and >= 3", self.ssim.window));
        }
        if self.ssim.k1 <= 0.0 || self.ssim.k2 <= 0.0 {
            return Err("ssim stabilizers must be positive".into());
        }
        if !(0.0..0.5).contains(&self.constants.uicm_trim_alpha) {
            return Err(format!(
                "trim alpha {} must lie in [0, 0.5)",
                self.constants.uicm_trim_alpha
            ));
        }
        if self.constants.block_size == 0 {
            return Err("block size must be positive".into());
        }
        Ok(())
    }

    /// Hash of the effective configuration, for report provenance.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in &digest[..8] {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}
