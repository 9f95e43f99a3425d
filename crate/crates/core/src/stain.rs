//! H&E stain separation.
//!
//! Pixels are moved to optical density (OD) space, where stains mix linearly.
//! The two stain directions are estimated from the OD cloud with the wedge
//! method: project the tissue pixels onto their top-two principal plane and
//! take robust extreme angles. Concentrations are then recovered per pixel
//! by least squares against the two directions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::RasterImage;

pub type OdPixel = [f64; 3];

/// Default artefact threshold on the largest per-channel variance.
pub const DEFAULT_ARTEFACT_TAU: f64 = 10.0;

/// Optical density of one pixel, `-log10(max(I, 1) / I0)` per channel.
#[inline]
pub fn od_of(rgb: [u16; 3], max_value: u16) -> OdPixel {
    let i0 = max_value as f64;
    rgb.map(|v| -((v.max(1) as f64) / i0).log10())
}

/// Per-pixel optical densities of an RGB image.
pub fn optical_density(img: &RasterImage) -> Result<Vec<OdPixel>> {
    if img.channels() != 3 {
        return Err(Error::invalid("optical density needs an RGB image"));
    }
    let max = img.max_value();
    Ok(img.pixels_rgb().map(|p| od_of(p, max)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StainBasis {
    pub v_h: [f64; 3],
    pub v_e: [f64; 3],
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Angle between two vectors in degrees.
pub fn angle_deg(a: [f64; 3], b: [f64; 3]) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0).acos().to_degrees()
}

impl StainBasis {
    /// Normalizes both vectors and orders them so hematoxylin has the larger
    /// blue OD component.
    pub fn new(a: [f64; 3], b: [f64; 3]) -> Result<Self> {
        let unit = |v: [f64; 3]| -> Result<[f64; 3]> {
            if v.iter().any(|&c| c < 0.0 || !c.is_finite()) {
                return Err(Error::InvalidBasis(format!("negative or non-finite component in {v:?}")));
            }
            let n = norm(v);
            if n == 0.0 {
                return Err(Error::InvalidBasis("zero vector".into()));
            }
            Ok(v.map(|c| c / n))
        };
        let (a, b) = (unit(a)?, unit(b)?);
        let a_is_h = (a[2], a[0]) >= (b[2], b[0]);
        let (v_h, v_e) = if a_is_h { (a, b) } else { (b, a) };
        Ok(Self { v_h, v_e })
    }

    /// Widely used reference H&E directions, used when estimation fails.
    pub fn reference() -> Self {
        Self::new([0.65, 0.70, 0.29], [0.07, 0.99, 0.11]).expect("reference basis is valid")
    }

    /// Condition number of the 3x2 matrix `[v_h v_e]`.
    pub fn condition_number(&self) -> f64 {
        let a = dot(self.v_h, self.v_h);
        let b = dot(self.v_h, self.v_e);
        let c = dot(self.v_e, self.v_e);
        let mid = (a + c) / 2.0;
        let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
        let (hi, lo) = (mid + rad, mid - rad);
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            (hi / lo).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisParams {
    /// Pixels whose OD components are all below this are treated as background.
    pub beta: f64,
    /// Percentile (in percent) used for the wedge extremes.
    pub alpha: f64,
    pub min_pixels: u64,
    /// Wedges narrower than this (degrees) are treated as a single stain.
    pub min_wedge_deg: f64,
}

impl Default for BasisParams {
    fn default() -> Self {
        Self {
            beta: 0.15,
            alpha: 1.0,
            min_pixels: 100,
            min_wedge_deg: 3.0,
        }
    }
}

fn cmp_od(a: &OdPixel, b: &OdPixel) -> std::cmp::Ordering {
    a[0].total_cmp(&b[0])
        .then(a[1].total_cmp(&b[1]))
        .then(a[2].total_cmp(&b[2]))
}

/// Multiset of OD samples stored as sorted unique values with counts.
///
/// Every reduction runs over the sorted unique values, so results are
/// independent of pixel order and of duplicating the whole set.
#[derive(Debug, Clone, Default)]
pub struct OdCloud {
    samples: Vec<(OdPixel, u64)>,
}

impl OdCloud {
    pub fn from_pixels(pixels: &[OdPixel]) -> Self {
        let mut sorted = pixels.to_vec();
        sorted.sort_by(cmp_od);
        let mut samples: Vec<(OdPixel, u64)> = Vec::new();
        for p in sorted {
            match samples.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => samples.push((p, 1)),
            }
        }
        Self { samples }
    }

    /// Pools the pixels of several RGB images with the same bit depth.
    pub fn from_images<'a>(images: impl IntoIterator<Item = &'a RasterImage>) -> Result<Self> {
        let mut counts: BTreeMap<[u16; 3], u64> = BTreeMap::new();
        let mut max_value = None;
        for img in images {
            if img.channels() != 3 {
                return Err(Error::invalid("stain estimation needs RGB images"));
            }
            match max_value {
                None => max_value = Some(img.max_value()),
                Some(m) if m != img.max_value() => {
                    return Err(Error::invalid("pooled images differ in bit depth"))
                }
                _ => {}
            }
            for p in img.pixels_rgb() {
                *counts.entry(p).or_insert(0) += 1;
            }
        }
        let max = max_value.unwrap_or(255);
        // Sorting and merging by OD keeps the reduction identical to from_pixels
        // (intensities 0 and 1 share an OD value).
        let mut sorted: Vec<(OdPixel, u64)> =
            counts.into_iter().map(|(p, c)| (od_of(p, max), c)).collect();
        sorted.sort_by(|(a, _), (b, _)| cmp_od(a, b));
        let mut samples: Vec<(OdPixel, u64)> = Vec::with_capacity(sorted.len());
        for (p, c) in sorted {
            match samples.last_mut() {
                Some((q, n)) if *q == p => *n += c,
                _ => samples.push((p, c)),
            }
        }
        Ok(Self { samples })
    }

    pub fn total(&self) -> u64 {
        self.samples.iter().map(|(_, c)| c).sum()
    }

    pub fn unique(&self) -> usize {
        self.samples.len()
    }
}

/// Wedge-method estimate of the two stain directions.
pub fn estimate_basis(od_pixels: &[OdPixel], params: &BasisParams) -> Result<StainBasis> {
    estimate_basis_from_cloud(&OdCloud::from_pixels(od_pixels), params)
}

pub fn estimate_basis_from_cloud(cloud: &OdCloud, params: &BasisParams) -> Result<StainBasis> {
    let tissue: Vec<(OdPixel, u64)> = cloud
        .samples
        .iter()
        .filter(|(p, _)| p.iter().any(|&c| c >= params.beta))
        .copied()
        .collect();
    let weight: u64 = tissue.iter().map(|(_, c)| c).sum();
    if weight < params.min_pixels {
        return Err(Error::BasisEstimationFailed(format!(
            "{weight} tissue pixels above OD {}, need {}",
            params.beta, params.min_pixels
        )));
    }
    let w = weight as f64;

    let mut mean = Vector3::zeros();
    for (p, c) in &tissue {
        mean += Vector3::from(*p) * (*c as f64);
    }
    mean /= w;
    let mut cov = Matrix3::zeros();
    for (p, c) in &tissue {
        let d = Vector3::from(*p) - mean;
        cov += d * d.transpose() * (*c as f64);
    }
    cov /= w;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let (l1, l2) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if l1.is_nan() || l1 <= 0.0 || l2 <= l1 * 1e-10 {
        return Err(Error::BasisEstimationFailed(
            "OD cloud is rank one (single stain)".into(),
        ));
    }
    let mut e1: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned();
    let mut e2: Vector3<f64> = eig.eigenvectors.column(order[1]).into_owned();
    // e1 along the cloud so tissue angles cluster around 0 and never wrap
    if e1.dot(&mean) < 0.0 {
        e1 = -e1;
    }
    let lead = e2.iamax();
    if e2[lead] < 0.0 {
        e2 = -e2;
    }

    let mut angles: Vec<(f64, u64)> = tissue
        .iter()
        .map(|(p, c)| {
            let v = Vector3::from(*p);
            (v.dot(&e2).atan2(v.dot(&e1)), *c)
        })
        .collect();
    angles.sort_by(|a, b| a.0.total_cmp(&b.0));
    let percentile = |pct: f64| -> f64 {
        let target = pct / 100.0 * w;
        let mut cum = 0.0;
        for &(a, c) in &angles {
            cum += c as f64;
            if cum >= target {
                return a;
            }
        }
        angles.last().map(|a| a.0).unwrap_or(0.0)
    };
    let lo = percentile(params.alpha);
    let hi = percentile(100.0 - params.alpha);
    if (hi - lo).to_degrees() < params.min_wedge_deg {
        return Err(Error::BasisEstimationFailed(format!(
            "stain wedge spans only {:.3} degrees",
            (hi - lo).to_degrees()
        )));
    }

    let to_stain = |phi: f64| -> Result<[f64; 3]> {
        let v = e1 * phi.cos() + e2 * phi.sin();
        let mut v = [v[0], v[1], v[2]];
        if v.iter().sum::<f64>() < 0.0 {
            v = v.map(|c| -c);
        }
        let v = v.map(|c| c.max(0.0));
        if norm(v) == 0.0 {
            return Err(Error::BasisEstimationFailed(
                "wedge extreme has no positive OD component".into(),
            ));
        }
        Ok(v)
    };
    StainBasis::new(to_stain(lo)?, to_stain(hi)?)
        .map_err(|e| Error::BasisEstimationFailed(e.to_string()))
}

/// Concentrations of both stains per pixel, clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationMaps {
    pub width: usize,
    pub height: usize,
    pub h: Vec<f64>,
    pub e: Vec<f64>,
}

/// 8-bit exports of the concentration maps and the scales that produced them.
#[derive(Debug, Clone)]
pub struct QuantizedMaps {
    pub h_map: RasterImage,
    pub e_map: RasterImage,
    /// Concentration mapped to 255 (the 99th percentile of the map).
    pub h_scale: f64,
    pub e_scale: f64,
}

/// Maximum accepted condition number of the stain matrix.
pub const MAX_BASIS_CONDITION: f64 = 1e6;

/// Least-squares unmixing of every pixel against the basis.
pub fn unmix(img: &RasterImage, basis: &StainBasis) -> Result<ConcentrationMaps> {
    let cond = basis.condition_number();
    if cond.is_nan() || cond > MAX_BASIS_CONDITION {
        return Err(Error::InvalidBasis(format!(
            "stain vectors are nearly collinear (condition number {cond:.3e})"
        )));
    }
    let od = optical_density(img)?;
    let (vh, ve) = (basis.v_h, basis.v_e);
    let (a, b, c) = (dot(vh, vh), dot(vh, ve), dot(ve, ve));
    let det = a * c - b * b;
    let mut h = Vec::with_capacity(od.len());
    let mut e = Vec::with_capacity(od.len());
    for p in &od {
        let (rh, re) = (dot(vh, *p), dot(ve, *p));
        let ch = (c * rh - b * re) / det;
        let ce = (a * re - b * rh) / det;
        h.push(ch.max(0.0));
        e.push(ce.max(0.0));
    }
    Ok(ConcentrationMaps {
        width: img.width(),
        height: img.height(),
        h,
        e,
    })
}

fn percentile_99(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((0.99 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn quantize_map(values: &[f64], width: usize, height: usize) -> (RasterImage, f64) {
    let mut scale = percentile_99(values);
    if scale <= 0.0 {
        scale = values.iter().copied().fold(0.0, f64::max);
    }
    let data = values
        .iter()
        .map(|&v| {
            if scale > 0.0 {
                ((v / scale).min(1.0) * 255.0).round() as u16
            } else {
                0
            }
        })
        .collect();
    let img = RasterImage::new(width, height, 1, 8, data).expect("quantized map is valid");
    (img, scale)
}

impl ConcentrationMaps {
    /// Scales each map by its 99th-percentile concentration to 8 bits.
    pub fn quantize(&self) -> QuantizedMaps {
        let (h_map, h_scale) = quantize_map(&self.h, self.width, self.height);
        let (e_map, e_scale) = quantize_map(&self.e, self.width, self.height);
        QuantizedMaps {
            h_map,
            e_map,
            h_scale,
            e_scale,
        }
    }
}

/// Population variance of each channel.
pub fn channel_variances(img: &RasterImage) -> Vec<f64> {
    let c = img.channels();
    let count = (img.width() * img.height()) as f64;
    (0..c)
        .map(|k| {
            let vals = img.data().iter().skip(k).step_by(c).map(|&v| v as f64);
            let mean = vals.clone().sum::<f64>() / count;
            vals.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count
        })
        .collect()
}

/// True when every channel varies less than `tau` (flag for removal).
pub fn artefact_flag(img: &RasterImage, tau: f64) -> bool {
    if img.width() == 0 || img.height() == 0 {
        return true;
    }
    channel_variances(img).into_iter().fold(0.0, f64::max) < tau
}

/// One basis estimate for all unflagged patches of a patient.
pub fn pooled_basis_for_patient(
    patches: &[RasterImage],
    tau: f64,
    params: &BasisParams,
) -> Result<StainBasis> {
    let kept: Vec<&RasterImage> = patches.iter().filter(|p| !artefact_flag(p, tau)).collect();
    if kept.is_empty() {
        return Err(Error::BasisEstimationFailed("no unflagged patches".into()));
    }
    estimate_basis_from_cloud(&OdCloud::from_images(kept)?, params)
}

/// Persisted per-patient basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRecord {
    pub patient: String,
    pub basis: StainBasis,
    /// True when estimation failed and the reference basis was substituted.
    pub fallback: bool,
    pub note: String,
}

impl BasisRecord {
    pub fn render(&self, provenance: &[String]) -> String {
        let mut out = String::new();
        for line in provenance {
            let _ = writeln!(out, "# {line}");
        }
        let fmt = |v: [f64; 3]| format!("{} {} {}", v[0], v[1], v[2]);
        let _ = writeln!(out, "patient {}", self.patient);
        let _ = writeln!(out, "v_h {}", fmt(self.basis.v_h));
        let _ = writeln!(out, "v_e {}", fmt(self.basis.v_e));
        let _ = writeln!(out, "fallback {}", self.fallback);
        let _ = writeln!(out, "note {}", self.note.replace('\n', " "));
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let err = |m: String| Error::Parse {
            path: path.to_path_buf(),
            message: m,
        };
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for line in text.lines() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| err(format!("missing '{k}'")));
        let vec3 = |s: &str| -> Result<[f64; 3]> {
            let v: Vec<f64> = s
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number '{t}'"))))
                .collect::<Result<_>>()?;
            <[f64; 3]>::try_from(v).map_err(|_| err("expected 3 components".into()))
        };
        let basis = StainBasis {
            v_h: vec3(get("v_h")?)?,
            v_e: vec3(get("v_e")?)?,
        };
        Ok(Self {
            patient: get("patient")?.to_string(),
            basis,
            fallback: get("fallback")? == "true",
            note: fields.get("note").copied().unwrap_or("").to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{render_two_stain, StainField};

    #[test]
    fn od_examples() {
        assert_eq!(od_of([255, 255, 255], 255), [0.0, 0.0, 0.0]);
        let od = od_of([0, 0, 0], 255);
        assert!((od[0] - 255f64.log10()).abs() < 1e-12);
        assert!((od[0] - 2.4065).abs() < 1e-4);
        // I = I0 / 10 -> OD 1
        let od = od_of([10, 10, 10], 100);
        assert!((od[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_labels_by_blue_component() {
        let b = StainBasis::new([0.07, 0.99, 0.11], [0.65, 0.70, 0.29]).unwrap();
        assert!(b.v_h[2] > b.v_e[2]);
        assert!((norm(b.v_h) - 1.0).abs() < 1e-12);
        assert!(StainBasis::new([-0.1, 1.0, 0.0], [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn unmix_exact_pixel_and_white() {
        let basis = StainBasis::reference();
        let maps = unmix(&RasterImage::rgb_from_fn(1, 1, |_, _| [255, 255, 255]), &basis).unwrap();
        assert_eq!((maps.h[0], maps.e[0]), (0.0, 0.0));

        // OD exactly 2 v_h, bypassing quantization through a direct solve
        let b = StainBasis::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert_eq!(b.condition_number(), 1.0);
    }

    #[test]
    fn collinear_basis_is_rejected() {
        let b = StainBasis {
            v_h: [0.6, 0.8, 0.0],
            v_e: [0.6, 0.8, 0.0],
        };
        let img = RasterImage::rgb_from_fn(2, 2, |_, _| [100, 100, 100]);
        assert!(matches!(unmix(&img, &b), Err(Error::InvalidBasis(_))));
    }

    #[test]
    fn unmix_is_non_negative() {
        let basis = StainBasis::reference();
        let img = RasterImage::rgb_from_fn(16, 16, |x, y| {
            [(x * 16) as u8, (y * 16) as u8, ((x * y) % 256) as u8]
        });
        let maps = unmix(&img, &basis).unwrap();
        assert!(maps.h.iter().chain(&maps.e).all(|&c| c >= 0.0));
    }

    #[test]
    fn white_image_fails_estimation() {
        let img = RasterImage::rgb_from_fn(20, 20, |_, _| [255, 255, 255]);
        let od = optical_density(&img).unwrap();
        assert!(matches!(
            estimate_basis(&od, &BasisParams::default()),
            Err(Error::BasisEstimationFailed(_))
        ));
    }

    #[test]
    fn single_stain_fails_estimation() {
        let basis = StainBasis::reference();
        let img = render_two_stain(&basis, 40, 40, 7, StainField::HematoxylinOnly);
        let od = optical_density(&img).unwrap();
        assert!(matches!(
            estimate_basis(&od, &BasisParams::default()),
            Err(Error::BasisEstimationFailed(_))
        ));
    }

    #[test]
    fn recovers_generating_vectors() {
        let basis = StainBasis::reference();
        let img = render_two_stain(&basis, 64, 64, 3, StainField::Mixed);
        let est = estimate_basis(&optical_density(&img).unwrap(), &BasisParams::default()).unwrap();
        assert!(angle_deg(est.v_h, basis.v_h) < 5.0, "{est:?}");
        assert!(angle_deg(est.v_e, basis.v_e) < 5.0, "{est:?}");
    }

    #[test]
    fn estimate_is_order_and_duplication_invariant() {
        let basis = StainBasis::reference();
        let img = render_two_stain(&basis, 32, 32, 11, StainField::Mixed);
        let od = optical_density(&img).unwrap();
        let params = BasisParams::default();
        let base = estimate_basis(&od, &params).unwrap();
        let mut rev = od.clone();
        rev.reverse();
        assert_eq!(estimate_basis(&rev, &params).unwrap(), base);
        let mut doubled = od.clone();
        doubled.extend_from_slice(&od);
        assert_eq!(estimate_basis(&doubled, &params).unwrap(), base);
    }

    #[test]
    fn pooled_estimate_matches_single_patch_and_ignores_order() {
        let basis = StainBasis::reference();
        let a = render_two_stain(&basis, 32, 32, 1, StainField::Mixed);
        let b = render_two_stain(&basis, 32, 32, 2, StainField::Mixed);
        let params = BasisParams::default();
        let single = estimate_basis(&optical_density(&a).unwrap(), &params).unwrap();
        let same = pooled_basis_for_patient(&[a.clone(), a.clone()], DEFAULT_ARTEFACT_TAU, &params)
            .unwrap();
        assert_eq!(same, single);
        let ab = pooled_basis_for_patient(&[a.clone(), b.clone()], DEFAULT_ARTEFACT_TAU, &params)
            .unwrap();
        let ba = pooled_basis_for_patient(&[b, a], DEFAULT_ARTEFACT_TAU, &params).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn pooling_rescues_single_stain_patches() {
        let basis = StainBasis::reference();
        let h = render_two_stain(&basis, 40, 40, 5, StainField::HematoxylinOnly);
        let e = render_two_stain(&basis, 40, 40, 6, StainField::EosinOnly);
        let params = BasisParams::default();
        for p in [&h, &e] {
            assert!(estimate_basis(&optical_density(p).unwrap(), &params).is_err());
        }
        let pooled = pooled_basis_for_patient(&[h, e], DEFAULT_ARTEFACT_TAU, &params).unwrap();
        assert!(angle_deg(pooled.v_h, basis.v_h) < 5.0);
        assert!(angle_deg(pooled.v_e, basis.v_e) < 5.0);
    }

    #[test]
    fn artefact_examples() {
        let blue = RasterImage::rgb_from_fn(50, 50, |_, _| [20, 30, 120]);
        assert!(artefact_flag(&blue, DEFAULT_ARTEFACT_TAU));
        let he = render_two_stain(&StainBasis::reference(), 50, 50, 9, StainField::Mixed);
        assert!(!artefact_flag(&he, DEFAULT_ARTEFACT_TAU));
        assert!(pooled_basis_for_patient(&[blue], DEFAULT_ARTEFACT_TAU, &BasisParams::default())
            .is_err());
    }

    #[test]
    fn quantization_uses_99th_percentile() {
        let mut h: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        h[99] = 50.0;
        let maps = ConcentrationMaps {
            width: 10,
            height: 10,
            h,
            e: vec![0.0; 100],
        };
        let q = maps.quantize();
        assert_eq!(q.h_scale, 0.99);
        assert_eq!(q.h_map.get(9, 9, 0), 255);
        assert_eq!(q.h_map.get(8, 9, 0), 255);
        assert_eq!(q.h_map.get(0, 0, 0), (0.01f64 / 0.99 * 255.0).round() as u16);
        assert_eq!(q.e_scale, 0.0);
        assert!(q.e_map.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn basis_record_round_trip() {
        let rec = BasisRecord {
            patient: "10253_idx5".into(),
            basis: StainBasis::reference(),
            fallback: true,
            note: "no unflagged patches".into(),
        };
        let text = rec.render(&["felp 0.1.0".into()]);
        assert_eq!(BasisRecord::parse(Path::new("b"), &text).unwrap(), rec);
    }
}
