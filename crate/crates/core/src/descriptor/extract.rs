use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::RasterImage;

use super::encoding::{sign_code, ternary_encode, transition_count};
use super::radon::radon_projection;
use super::window::{anchor_angle, homogeneity};
use super::{
    normalize_counts, Descriptor, DescriptorMeta, Method, ScanBoundary, StainMode, WindowSpec,
    ANGLES, ANGLE_STEP,
};

/// Window size of the ELP baseline.
pub const ELP_WINDOW: usize = 9;

fn bins_per_angle(method: Method, n: usize) -> usize {
    match method {
        Method::Felp => n - 1,
        Method::Elp => 1 << (n - 1),
    }
}

/// Per-angle bin indices of one window, or `None` when the window is skipped.
///
/// `values` holds the raw intensities of an `n x n` window in row-major order.
pub fn window_codes(
    values: &[f64],
    n_bits: u32,
    spec: &WindowSpec,
    method: Method,
) -> Option<[usize; ANGLES]> {
    let n = spec.n;
    let h = homogeneity(values, n, n_bits).ok()?;
    if h >= spec.homogeneity_threshold {
        return None;
    }
    let anchor = anchor_angle(values, n, spec.gradient).ok()?;
    let scale = ((1u64 << n_bits) - 1) as f64;
    let unit: Vec<f64> = values.iter().map(|v| v / scale).collect();

    let mut codes = [0usize; ANGLES];
    for (j, code) in codes.iter_mut().enumerate() {
        let theta = (anchor + ANGLE_STEP * j as f64).rem_euclid(360.0);
        let p = radon_projection(&unit, n, theta);
        *code = match method {
            Method::Felp => transition_count(&ternary_encode(&p.values, spec.t)),
            Method::Elp => sign_code(&p.values),
        };
    }
    Some(codes)
}

fn check_input(gray: &RasterImage, spec: &WindowSpec, method: Method) -> Result<()> {
    spec.validate()?;
    if gray.channels() != 1 {
        return Err(Error::invalid("descriptors are computed on single-channel images"));
    }
    if gray.width() < spec.n || gray.height() < spec.n {
        return Err(Error::invalid(format!(
            "image {}x{} is smaller than the {n}x{n} window",
            gray.width(),
            gray.height(),
            n = spec.n
        )));
    }
    if method == Method::Elp && spec.n != ELP_WINDOW {
        return Err(Error::invalid(format!(
            "ELP baseline is defined for n = {ELP_WINDOW}, got {}",
            spec.n
        )));
    }
    Ok(())
}

/// Integer histogram counts before normalization, angle blocks concatenated.
///
/// Rows of window origins are processed in parallel; counts are integers so
/// the result does not depend on the schedule.
pub fn descriptor_counts(gray: &RasterImage, spec: &WindowSpec, method: Method) -> Result<Vec<u64>> {
    check_input(gray, spec, method)?;
    let n = spec.n;
    let (w, h) = (gray.width(), gray.height());
    let (x_end, y_end) = match spec.boundary {
        ScanBoundary::Inside => (w - n + 1, h - n + 1),
        ScanBoundary::Periodic => (w, h),
    };
    let per_angle = bins_per_angle(method, n);
    let len = ANGLES * per_angle;
    let origins_y: Vec<usize> = (0..y_end).step_by(spec.stride).collect();

    let counts = origins_y
        .par_iter()
        .map(|&oy| {
            let mut row = vec![0u64; len];
            let mut values = vec![0.0; n * n];
            for ox in (0..x_end).step_by(spec.stride) {
                for j in 0..n {
                    let y = (oy + j) % h;
                    for i in 0..n {
                        let x = (ox + i) % w;
                        values[j * n + i] = gray.get(x, y, 0) as f64;
                    }
                }
                if let Some(codes) = window_codes(&values, gray.n_bits(), spec, method) {
                    for (a, &c) in codes.iter().enumerate() {
                        row[a * per_angle + c] += 1;
                    }
                }
            }
            row
        })
        .reduce(
            || vec![0u64; len],
            |mut acc, row| {
                for (a, r) in acc.iter_mut().zip(row) {
                    *a += r;
                }
                acc
            },
        );
    Ok(counts)
}

pub fn felp_descriptor_counts(gray: &RasterImage, spec: &WindowSpec) -> Result<Vec<u64>> {
    descriptor_counts(gray, spec, Method::Felp)
}

fn single_map_descriptor(gray: &RasterImage, spec: &WindowSpec, method: Method) -> Result<Descriptor> {
    let counts = descriptor_counts(gray, spec, method)?;
    Ok(Descriptor {
        bins: normalize_counts(&counts)?,
        method,
        n: spec.n,
        stain_mode: StainMode::Gray,
        meta: DescriptorMeta::from_spec(spec),
    })
}

/// F-ELP histogram: `4 (n - 1)` bins of transition counts.
pub fn felp_descriptor(gray: &RasterImage, spec: &WindowSpec) -> Result<Descriptor> {
    single_map_descriptor(gray, spec, Method::Felp)
}

/// ELP baseline histogram: 4 x 256 bins of derivative sign codes.
pub fn elp_descriptor(gray: &RasterImage, spec: &WindowSpec) -> Result<Descriptor> {
    single_map_descriptor(gray, spec, Method::Elp)
}

/// `[h_H h_E]`, each half computed and normalized on its own map, then the
/// whole vector renormalized to sum 1.
pub fn stained_descriptor(
    h_map: &RasterImage,
    e_map: &RasterImage,
    spec: &WindowSpec,
    method: Method,
) -> Result<Descriptor> {
    if h_map.width() != e_map.width() || h_map.height() != e_map.height() {
        return Err(Error::invalid(format!(
            "stain maps differ in size: {}x{} vs {}x{}",
            h_map.width(),
            h_map.height(),
            e_map.width(),
            e_map.height()
        )));
    }
    let h = single_map_descriptor(h_map, spec, method)?;
    let e = single_map_descriptor(e_map, spec, method)?;
    let bins = h.bins.iter().chain(&e.bins).map(|v| v / 2.0).collect();
    Ok(Descriptor {
        bins,
        method,
        n: spec.n,
        stain_mode: StainMode::He,
        meta: h.meta,
    })
}
