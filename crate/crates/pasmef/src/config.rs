//! Pipeline tunables.

use crate::error::{FusionError, Result};
use crate::guided::GuidedFilterParams;

/// Pyramid depth policy for fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelCount {
    /// `max(1, floor(log2(min(width, height))) - 1)` levels.
    Auto,
    /// Exactly this many levels; must fit the image size.
    Fixed(usize),
}

/// All fusion tunables. `Default` gives the values the pipeline was tuned
/// with; override fields individually for experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    /// Guided-filter window half-width in pixels.
    pub gf_radius: usize,
    /// Guided-filter regularizer, on [0, 1]-scaled intensities.
    pub gf_eps: f64,
    /// Gaussian sigma smoothing the rescaled component-score maps.
    pub pca_smooth_sigma: f64,
    /// Working width of the saliency branch; images wider than this are
    /// resampled down (aspect preserved) before the signature transform.
    pub saliency_width: usize,
    /// Gaussian sigma applied to the squared signature reconstruction,
    /// at the working size.
    pub saliency_blur_sigma: f64,
    /// Pyramid depth used for blending.
    pub pyramid_levels: LevelCount,
    /// Lower bound for the luminance standard deviation in the
    /// well-exposedness weight, guarding near-constant exposures.
    pub sigma_floor: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            gf_radius: 8,
            gf_eps: 0.01,
            pca_smooth_sigma: 2.0,
            saliency_width: 64,
            saliency_blur_sigma: 3.0,
            pyramid_levels: LevelCount::Auto,
            sigma_floor: 1e-3,
        }
    }
}

/// True unless `v` is a positive, non-NaN number.
pub(crate) fn not_positive(v: f64) -> bool {
    v.is_nan() || v <= 0.0
}

impl FusionConfig {
    /// Check every field against its documented domain.
    pub fn validate(&self) -> Result<()> {
        if self.gf_radius == 0 {
            return Err(FusionError::InvalidConfig(
                "gf-radius must be at least 1".into(),
            ));
        }
        if not_positive(self.gf_eps) {
            return Err(FusionError::InvalidConfig("gf-eps must be positive".into()));
        }
        if not_positive(self.pca_smooth_sigma) {
            return Err(FusionError::InvalidConfig(
                "pca-smooth-sigma must be positive".into(),
            ));
        }
        if self.saliency_width == 0 {
            return Err(FusionError::InvalidConfig(
                "saliency-width must be at least 1".into(),
            ));
        }
        if not_positive(self.saliency_blur_sigma) {
            return Err(FusionError::InvalidConfig(
                "saliency-blur-sigma must be positive".into(),
            ));
        }
        if let LevelCount::Fixed(0) = self.pyramid_levels {
            return Err(FusionError::InvalidConfig(
                "pyramid levels must be at least 1".into(),
            ));
        }
        if not_positive(self.sigma_floor) {
            return Err(FusionError::InvalidConfig(
                "sigma-floor must be positive".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn guided_params(&self) -> GuidedFilterParams {
        GuidedFilterParams {
            radius: self.gf_radius,
            eps: self.gf_eps,
        }
    }
}
