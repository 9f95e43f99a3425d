use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::PatchRecord;
use crate::descriptor::io::{write_descriptors, DescriptorRecord};
use crate::descriptor::{elp_descriptor, felp_descriptor, stained_descriptor, Descriptor, Method, StainMode, WindowSpec};
use crate::error::{Error, Result};
use crate::imaging::{to_grayscale, RasterImage};
use crate::stain::{unmix, BasisRecord, StainBasis};

use super::{basis_path, descriptor_path, prepare, write_preparation, RunConfig};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtractSummary {
    /// Rows written per set, in train, validation, test order.
    pub rows: Vec<(String, usize)>,
    /// Patches without a single processable window.
    pub empty: Vec<String>,
}

/// Descriptor of one RGB patch for the configured variant.
pub fn patch_descriptor(
    img: &RasterImage,
    method: Method,
    stain_mode: StainMode,
    spec: &WindowSpec,
    basis: Option<&StainBasis>,
) -> Result<Descriptor> {
    match stain_mode {
        StainMode::Gray => {
            let gray = to_grayscale(img)?;
            match method {
                Method::Felp => felp_descriptor(&gray, spec),
                Method::Elp => elp_descriptor(&gray, spec),
            }
        }
        StainMode::He => {
            let basis = basis.ok_or_else(|| Error::invalid("stained descriptors need a basis"))?;
            let maps = unmix(img, basis)?.quantize();
            stained_descriptor(&maps.h_map, &maps.e_map, spec, method)
        }
    }
}

/// Writes `descriptors/<variant>_<set>.csv` for each non-empty set.
pub fn cmd_extract(config: &RunConfig) -> Result<ExtractSummary> {
    let prepared = prepare(config)?;
    write_preparation(config, &prepared, "extract")?;
    let total: usize = prepared.sets().iter().map(|(_, s)| s.len()).sum();
    if total == 0 {
        return Err(Error::EmptyResult(
            "no patches left after splitting and artefact filtering".into(),
        ));
    }

    let mut bases: BTreeMap<String, StainBasis> = BTreeMap::new();
    if config.stain_mode == StainMode::He {
        for (_, set) in prepared.sets() {
            for r in set {
                if !bases.contains_key(&r.patient) {
                    let rec = BasisRecord::load(&basis_path(config, &r.patient))?;
                    bases.insert(r.patient.clone(), rec.basis);
                }
            }
        }
    }

    let spec = config.window_spec();
    let prov = config.provenance("extract");
    let mut summary = ExtractSummary::default();
    for (name, set) in prepared.sets() {
        let computed: Vec<(&PatchRecord, Result<Descriptor>)> = set
            .par_iter()
            .map(|r| {
                let d = RasterImage::load_rgb(&r.path).and_then(|img| {
                    patch_descriptor(&img, config.method, config.stain_mode, &spec, bases.get(&r.patient))
                });
                (r, d)
            })
            .collect();
        let mut rows = Vec::with_capacity(computed.len());
        for (r, d) in computed {
            match d {
                Ok(descriptor) => rows.push(DescriptorRecord {
                    patch_id: r.id(),
                    label: r.label,
                    descriptor,
                }),
                Err(Error::EmptyDescriptor) => {
                    log::warn!("{}: no processable windows", r.path.display());
                    summary.empty.push(r.id());
                }
                Err(e) => return Err(e),
            }
        }
        let path = descriptor_path(config, name);
        if rows.is_empty() {
            if path.exists() {
                std::fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
            }
        } else {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            write_descriptors(&path, &prov, &rows)?;
        }
        summary.rows.push((name.to_string(), rows.len()));
    }
    if summary.rows.iter().all(|(_, n)| *n == 0) {
        return Err(Error::EmptyResult("no patch produced a descriptor".into()));
    }
    Ok(summary)
}
