use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::{by_patient, PatchRecord};
use crate::error::{Error, Result};
use crate::imaging::RasterImage;
use crate::stain::{pooled_basis_for_patient, unmix, BasisRecord, StainBasis};

use super::{basis_path, prepare, write_preparation, write_text, RunConfig};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StainsepSummary {
    pub patients: usize,
    /// Patients that received the reference basis.
    pub fallback: Vec<String>,
    /// Per-patient problems that did not stop the run.
    pub failures: Vec<(String, String)>,
}

struct PatientOutcome {
    record: BasisRecord,
    failure: Option<String>,
}

fn estimate_patient(config: &RunConfig, patient: &str, kept: &[PatchRecord]) -> PatientOutcome {
    let images: Result<Vec<RasterImage>> = kept.iter().map(|r| RasterImage::load_rgb(&r.path)).collect();
    let (basis, note, failure) = match images {
        Err(e) => (None, format!("load failed: {e}"), Some(e.to_string())),
        Ok(images) if images.is_empty() => (None, "no unflagged patches".to_string(), None),
        Ok(images) => match pooled_basis_for_patient(&images, config.artefact_tau, &config.basis) {
            Ok(b) => (Some(b), format!("estimated from {} patches", images.len()), None),
            Err(e) => (None, e.to_string(), None),
        },
    };
    PatientOutcome {
        record: BasisRecord {
            patient: patient.to_string(),
            fallback: basis.is_none(),
            basis: basis.unwrap_or_else(StainBasis::reference),
            note,
        },
        failure,
    }
}

fn export_maps(config: &RunConfig, basis: &StainBasis, kept: &[PatchRecord]) -> Result<()> {
    for r in kept {
        let img = RasterImage::load_rgb(&r.path)?;
        let q = unmix(&img, basis)?.quantize();
        let dir = config.output_dir.join("maps").join(&r.patient);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        q.h_map.save_png(&dir.join(format!("{}_H.png", r.id())))?;
        q.e_map.save_png(&dir.join(format!("{}_E.png", r.id())))?;
    }
    Ok(())
}

/// Estimates one pooled basis per patient of the split and writes
/// `bases/<patient>.txt`. Failed estimates fall back to the reference basis.
pub fn cmd_stainsep(config: &RunConfig) -> Result<StainsepSummary> {
    let prepared = prepare(config)?;
    write_preparation(config, &prepared, "stainsep")?;
    let prov = config.provenance("stainsep");

    let kept = by_patient(&prepared.filter.kept);
    let mut patients: BTreeMap<String, &[PatchRecord]> = BTreeMap::new();
    for (r, _) in &prepared.filter.removed {
        patients.insert(r.patient.clone(), &[]);
    }
    for (p, recs) in &kept {
        patients.insert(p.clone(), recs);
    }

    let outcomes: Vec<(String, PatientOutcome, Option<String>)> = patients
        .par_iter()
        .map(|(patient, recs)| {
            let out = estimate_patient(config, patient, recs);
            let mut problem = out.failure.clone();
            if let Err(e) = write_text(&basis_path(config, patient), &out.record.render(&prov)) {
                problem.get_or_insert(e.to_string());
            }
            if config.export_maps && problem.is_none() {
                if let Err(e) = export_maps(config, &out.record.basis, recs) {
                    problem = Some(e.to_string());
                }
            }
            (patient.clone(), out, problem)
        })
        .collect();

    let mut summary = StainsepSummary {
        patients: outcomes.len(),
        ..Default::default()
    };
    for (patient, out, problem) in outcomes {
        if out.record.fallback {
            log::warn!("patient {patient}: reference basis used ({})", out.record.note);
            summary.fallback.push(patient.clone());
        }
        if let Some(p) = problem {
            log::error!("patient {patient}: {p}");
            summary.failures.push((patient, p));
        }
    }
    Ok(summary)
}
