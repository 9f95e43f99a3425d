//! Synthetic H&E fixtures rendered from a known stain basis.
//!
//! Intensities follow the Beer-Lambert model `I = I0 * 10^-(c_h v_h + c_e v_e)`
//! quantized to 8 bits, so the generating basis and concentrations serve as
//! ground truth for the stain routines.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::RasterImage;
use crate::stain::StainBasis;

/// 8-bit RGB pixel for the given stain concentrations.
pub fn render_pixel(basis: &StainBasis, c_h: f64, c_e: f64) -> [u8; 3] {
    let mut out = [0u8; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let od = c_h * basis.v_h[k] + c_e * basis.v_e[k];
        *o = (255.0 * 10f64.powf(-od)).round().clamp(0.0, 255.0) as u8;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StainField {
    /// Random strength and random H/E mixing fraction per pixel.
    Mixed,
    HematoxylinOnly,
    EosinOnly,
}

/// Concentrations used by [`render_two_stain`] for a given seed, row-major.
pub fn two_stain_concentrations(
    width: usize,
    height: usize,
    seed: u64,
    field: StainField,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..width * height)
        .map(|_| {
            let strength = rng.random_range(0.3..1.0);
            let mix: f64 = rng.random_range(0.0..1.0);
            match field {
                StainField::Mixed => (strength * (1.0 - mix), strength * mix),
                StainField::HematoxylinOnly => (strength, 0.0),
                StainField::EosinOnly => (0.0, strength),
            }
        })
        .collect()
}

/// Image whose pixels are random positive mixtures of the basis vectors.
pub fn render_two_stain(
    basis: &StainBasis,
    width: usize,
    height: usize,
    seed: u64,
    field: StainField,
) -> RasterImage {
    let conc = two_stain_concentrations(width, height, seed, field);
    RasterImage::rgb_from_fn(width, height, |x, y| {
        let (h, e) = conc[y * width + x];
        render_pixel(basis, h, e)
    })
}

/// Texture parameters for [`tissue_patch`].
#[derive(Debug, Clone, Copy)]
pub struct TissueStyle {
    /// Expected nuclei per 100 pixels.
    pub nuclei_density: f64,
    pub nucleus_radius: (f64, f64),
    pub nucleus_stain: (f64, f64),
    pub stroma_stain: (f64, f64),
    /// Period (pixels) of the eosin fibre pattern.
    pub fibre_period: f64,
}

impl TissueStyle {
    /// Sparse small nuclei over fibrous stroma.
    pub fn benign() -> Self {
        Self {
            nuclei_density: 0.6,
            nucleus_radius: (1.5, 2.5),
            nucleus_stain: (0.6, 0.9),
            stroma_stain: (0.25, 0.6),
            fibre_period: 9.0,
        }
    }

    /// Crowded, enlarged nuclei.
    pub fn malignant() -> Self {
        Self {
            nuclei_density: 2.2,
            nucleus_radius: (2.5, 4.0),
            nucleus_stain: (0.7, 1.1),
            stroma_stain: (0.15, 0.4),
            fibre_period: 5.0,
        }
    }
}

/// Square H&E-like patch: hematoxylin disks on an eosin fibre background.
pub fn tissue_patch(basis: &StainBasis, size: usize, seed: u64, style: &TissueStyle) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = vec![0.0f64; size * size];
    let mut e = vec![0.0f64; size * size];

    let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (s, c) = angle.sin_cos();
    let (lo, hi) = style.stroma_stain;
    for y in 0..size {
        for x in 0..size {
            let t = (x as f64 * c + y as f64 * s) * std::f64::consts::TAU / style.fibre_period;
            let wave = 0.5 + 0.5 * t.sin();
            let noise: f64 = rng.random_range(-0.05..0.05);
            e[y * size + x] = (lo + (hi - lo) * wave + noise).max(0.0);
        }
    }

    let expected = style.nuclei_density * (size * size) as f64 / 100.0;
    let count = expected.round() as usize;
    for _ in 0..count {
        let cx: f64 = rng.random_range(0.0..size as f64);
        let cy: f64 = rng.random_range(0.0..size as f64);
        let r: f64 = rng.random_range(style.nucleus_radius.0..style.nucleus_radius.1);
        let strength: f64 = rng.random_range(style.nucleus_stain.0..style.nucleus_stain.1);
        let (x0, x1) = ((cx - r).floor().max(0.0) as usize, ((cx + r).ceil() as usize).min(size));
        let (y0, y1) = ((cy - r).floor().max(0.0) as usize, ((cy + r).ceil() as usize).min(size));
        for y in y0..y1 {
            for x in x0..x1 {
                let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                if d <= r {
                    let i = y * size + x;
                    h[i] = h[i].max(strength * (1.0 - 0.3 * d / r));
                    e[i] *= 0.5;
                }
            }
        }
    }

    RasterImage::rgb_from_fn(size, size, |x, y| {
        let i = y * size + x;
        render_pixel(basis, h[i], e[i])
    })
}

/// Layout of a synthetic patch collection written by [`write_dataset`].
#[derive(Debug, Clone, Copy)]
pub struct DatasetSpec {
    pub patients: usize,
    pub patches_per_class: usize,
    /// Extra flat (artefact) patches per patient.
    pub artefacts_per_patient: usize,
    pub size: usize,
    pub seed: u64,
}

/// Writes `<root>/<patient>/<class>/<patient>_x<X>_y<Y>_class<C>.png`, with
/// benign tissue in class 0 and malignant tissue in class 1. Each patient
/// gets a slightly perturbed stain basis.
pub fn write_dataset(root: &Path, spec: &DatasetSpec) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let reference = StainBasis::reference();
    for p in 0..spec.patients {
        let patient = format!("{}_idx5", 8900 + p);
        let mut jitter = |v: [f64; 3]| v.map(|c| (c + rng.random_range(-0.04..0.04)).max(0.01));
        let basis = StainBasis::new(jitter(reference.v_h), jitter(reference.v_e))?;
        let mut slot = 0usize;
        let mut save = |class: u8, img: &RasterImage| -> Result<()> {
            let dir = root.join(&patient).join(class.to_string());
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let (x, y) = (1 + 50 * (slot % 20), 1 + 50 * (slot / 20));
            slot += 1;
            img.save_png(&dir.join(format!("{patient}_x{x}_y{y}_class{class}.png")))
        };
        for i in 0..spec.patches_per_class {
            for (class, style) in [(0u8, TissueStyle::benign()), (1u8, TissueStyle::malignant())] {
                let seed = spec.seed ^ ((p as u64) << 32) ^ ((i as u64) << 8) ^ u64::from(class);
                save(class, &tissue_patch(&basis, spec.size, seed, &style))?;
            }
        }
        for i in 0..spec.artefacts_per_patient {
            let shade = 200 + (i % 40) as u8;
            save(0, &RasterImage::rgb_from_fn(spec.size, spec.size, |_, _| [shade, shade - 20, shade]))?;
        }
    }
    Ok(())
}
