//! Encoded local projection descriptors.
//!
//! Both descriptors share the same machinery: a dense window scan, a
//! homogeneity gate, an anchor angle from the dominant gradient direction and
//! four Radon projections at the anchor plus 45, 90 and 135 degrees. They
//! differ only in how each projection is turned into a histogram bin:
//!
//! - [`Method::Felp`] counts transitions of the ternary derivative code, giving
//!   `n - 1` bins per angle;
//! - [`Method::Elp`] packs the sign of each derivative into an 8-bit code,
//!   giving 256 bins per angle (window size fixed at 9).

mod encoding;
mod extract;
pub mod io;
mod radon;
mod window;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{GradientOperator, GRAYSCALE_CONVENTION};

pub use encoding::{sign_code, ternary_encode, transition_count};
pub use extract::{
    descriptor_counts, elp_descriptor, felp_descriptor, felp_descriptor_counts,
    stained_descriptor, window_codes, ELP_WINDOW,
};
pub use radon::{radon_projection, rotate_quarter_turns};
pub use window::{anchor_angle, homogeneity, is_processable};

/// Number of anchored projection angles per window.
pub const ANGLES: usize = 4;
/// Spacing between the anchored projections, in degrees.
pub const ANGLE_STEP: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "FELP")]
    Felp,
    #[serde(rename = "ELP")]
    Elp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Felp => "FELP",
            Method::Elp => "ELP",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "FELP" => Ok(Method::Felp),
            "ELP" => Ok(Method::Elp),
            _ => Err(Error::Config(format!("unknown method '{s}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StainMode {
    /// Descriptor of the grayscale patch.
    #[serde(rename = "GRAY")]
    Gray,
    /// Concatenated descriptors of the hematoxylin and eosin maps.
    #[serde(rename = "HE")]
    He,
}

impl StainMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StainMode::Gray => "GRAY",
            StainMode::He => "HE",
        }
    }
}

impl std::str::FromStr for StainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GRAY" | "GREY" => Ok(StainMode::Gray),
            "HE" | "H&E" | "SS" => Ok(StainMode::He),
            _ => Err(Error::Config(format!("unknown stain mode '{s}'"))),
        }
    }
}

impl std::fmt::Display for StainMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How window origins are laid out over the image.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanBoundary {
    /// Windows lie fully inside the image.
    #[default]
    Inside,
    /// Every pixel is a window origin and indices wrap around (torus).
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Window side length, odd and at least 3.
    pub n: usize,
    pub stride: usize,
    /// Windows with homogeneity at or above this value are skipped.
    pub homogeneity_threshold: f64,
    /// Ternary threshold on projection differences, in unit-intensity scale.
    pub t: f64,
    #[serde(default)]
    pub gradient: GradientOperator,
    #[serde(default)]
    pub boundary: ScanBoundary,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            n: 9,
            stride: 1,
            homogeneity_threshold: 1.0,
            t: 0.08,
            gradient: GradientOperator::Central,
            boundary: ScanBoundary::Inside,
        }
    }
}

impl WindowSpec {
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.n.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "window size must be odd and >= 3, got {}",
                self.n
            )));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride must be >= 1"));
        }
        if !(self.homogeneity_threshold > 0.0 && self.homogeneity_threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "homogeneity threshold must lie in (0, 1], got {}",
                self.homogeneity_threshold
            )));
        }
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(Error::invalid(format!(
                "ternary threshold must be >= 0, got {}",
                self.t
            )));
        }
        Ok(())
    }
}

/// Parameter echo stored alongside every descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorMeta {
    pub t: f64,
    pub homogeneity_threshold: f64,
    pub stride: usize,
    pub gradient: GradientOperator,
    pub boundary: ScanBoundary,
    pub grayscale: String,
    /// Intensities are divided by `2^n_bits - 1` before projection.
    pub intensity_scale: String,
}

impl DescriptorMeta {
    pub fn from_spec(spec: &WindowSpec) -> Self {
        Self {
            t: spec.t,
            homogeneity_threshold: spec.homogeneity_threshold,
            stride: spec.stride,
            gradient: spec.gradient,
            boundary: spec.boundary,
            grayscale: GRAYSCALE_CONVENTION.to_string(),
            intensity_scale: "unit".to_string(),
        }
    }
}

/// L1-normalized histogram plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub bins: Vec<f64>,
    pub method: Method,
    pub n: usize,
    pub stain_mode: StainMode,
    pub meta: DescriptorMeta,
}

impl Descriptor {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Same method, window size, stain mode and length.
    pub fn is_compatible(&self, other: &Descriptor) -> bool {
        self.method == other.method
            && self.n == other.n
            && self.stain_mode == other.stain_mode
            && self.bins.len() == other.bins.len()
    }
}

/// Histogram length for a configuration.
pub fn descriptor_len(method: Method, n: usize, stain_mode: StainMode) -> usize {
    let per_map = match method {
        Method::Felp => ANGLES * (n - 1),
        Method::Elp => ANGLES << (n - 1),
    };
    match stain_mode {
        StainMode::Gray => per_map,
        StainMode::He => 2 * per_map,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionVector {
    pub values: Vec<f64>,
    pub theta: f64,
}

impl ProjectionVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Divides integer bin counts by their total.
pub(crate) fn normalize_counts(counts: &[u64]) -> Result<Vec<f64>> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyDescriptor);
    }
    let total = total as f64;
    Ok(counts.iter().map(|&c| c as f64 / total).collect())
}
