//! End-to-end runs over a patch collection: stain separation, descriptor
//! extraction, retrieval evaluation, SVM classification and reports.
//!
//! Every file written here starts with `#` provenance lines (library version,
//! command and the run configuration), and none of them depends on the number
//! of worker threads.

mod classify;
mod extract;
pub mod reference;
mod report;
mod search;
mod stainsep;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{
    filter_artefacts, make_split, render_removed_log, scan, ArtefactFilter, PatchRecord,
    ScanOptions, ScanReport, Split, SplitManifest, REFERENCE_SPLIT,
};
use crate::descriptor::{Method, ScanBoundary, StainMode, WindowSpec};
use crate::error::{Error, Result};
use crate::imaging::GradientOperator;
use crate::metrics::Metric;
use crate::stain::{BasisParams, DEFAULT_ARTEFACT_TAU};

pub use classify::{cmd_classify, ClassifyOutcome};
pub use extract::{cmd_extract, ExtractSummary};
pub use report::{cmd_report, render_retrieval_table};
pub use search::{cmd_search, SearchRow};
pub use stainsep::{cmd_stainsep, StainsepSummary};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything that determines the outputs of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub n: usize,
    pub stain_mode: StainMode,
    pub t: f64,
    pub homogeneity_threshold: f64,
    pub stride: usize,
    pub gradient: GradientOperator,
    pub metrics: Vec<Metric>,
    pub ks: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub epochs: usize,
    pub seed: u64,
    /// Fraction of the patients of each split that is used.
    pub subset: f64,
    pub artefact_tau: f64,
    pub accept_any_size: bool,
    pub basis: BasisParams,
    /// Write the 8-bit H and E maps of every patch during stain separation.
    pub export_maps: bool,
    pub dataset_root: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub manifest: Option<PathBuf>,
    /// Worker threads; not part of the provenance echo.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Felp,
            n: 9,
            stain_mode: StainMode::He,
            t: 0.08,
            homogeneity_threshold: 1.0,
            stride: 1,
            gradient: GradientOperator::Central,
            metrics: Metric::ALL.to_vec(),
            ks: vec![1, 3, 5],
            lambdas: vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1],
            epochs: 20,
            seed: 0,
            subset: 1.0,
            artefact_tau: DEFAULT_ARTEFACT_TAU,
            accept_any_size: false,
            basis: BasisParams::default(),
            export_maps: false,
            dataset_root: None,
            output_dir: PathBuf::from("felp-out"),
            manifest: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec {
            n: self.n,
            stride: self.stride,
            homogeneity_threshold: self.homogeneity_threshold,
            t: self.t,
            gradient: self.gradient,
            boundary: ScanBoundary::Inside,
        }
    }

    pub fn variant(&self) -> Variant {
        Variant {
            method: self.method,
            n: self.n,
            stain_mode: self.stain_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        self.window_spec()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.method == Method::Elp && self.n != 9 {
            return cfg(format!("ELP is defined for n = 9, got {}", self.n));
        }
        if self.metrics.is_empty() {
            return cfg("at least one metric is required".into());
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return cfg(format!("k values must be positive, got {:?}", self.ks));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return cfg(format!("lambdas must be positive, got {:?}", self.lambdas));
        }
        if self.epochs == 0 {
            return cfg("epochs must be at least 1".into());
        }
        if !(self.subset > 0.0 && self.subset <= 1.0) {
            return cfg(format!("subset must lie in (0, 1], got {}", self.subset));
        }
        if self.artefact_tau.is_nan() || self.artefact_tau < 0.0 {
            return cfg(format!("artefact tau must be non-negative, got {}", self.artefact_tau));
        }
        if self.threads == Some(0) {
            return cfg("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Header lines for output artifacts.
    pub fn provenance(&self, command: &str) -> Vec<String> {
        vec![
            format!("felp {VERSION}"),
            format!("command {command}"),
            format!(
                "config {}",
                serde_json::to_string(self).expect("config serializes")
            ),
        ]
    }

    fn root(&self) -> Result<&Path> {
        self.dataset_root
            .as_deref()
            .ok_or_else(|| Error::Config("dataset root is not set".into()))
    }
}

/// One descriptor configuration, as listed in the result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    pub method: Method,
    pub n: usize,
    pub stain_mode: StainMode,
}

impl Variant {
    /// File name stem, e.g. `felp9_he`.
    pub fn tag(&self) -> String {
        format!(
            "{}{}_{}",
            self.method.as_str().to_ascii_lowercase(),
            self.n,
            self.stain_mode.as_str().to_ascii_lowercase()
        )
    }

    /// Row label, e.g. `F-ELP9 + SS`.
    pub fn label(&self) -> String {
        let name = match self.method {
            Method::Felp => "F-ELP",
            Method::Elp => "ELP",
        };
        let ss = match self.stain_mode {
            StainMode::He => " + SS",
            StainMode::Gray => "",
        };
        format!("{name}{}{ss}", self.n)
    }

    /// Table order: ELP first, then by window size, grayscale before stained.
    pub fn sort_key(&self) -> (bool, usize, bool) {
        (
            self.method == Method::Felp,
            self.n,
            self.stain_mode == StainMode::He,
        )
    }
}

/// Runs `f` on a dedicated pool with the configured number of threads.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Scanned, split and artefact-filtered patch lists.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scan: ScanReport,
    pub manifest: SplitManifest,
    pub filter: ArtefactFilter,
    /// Split of the kept patches.
    pub split: Split,
}

impl Prepared {
    pub fn sets(&self) -> [(&'static str, &[PatchRecord]); 3] {
        [
            ("train", &self.split.train),
            ("validation", &self.split.validation),
            ("test", &self.split.test),
        ]
    }
}

/// Scans the dataset, fixes the patient split and removes artefacts.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let scan = scan(
        config.root()?,
        &ScanOptions {
            accept_any_size: config.accept_any_size,
        },
    )?;
    for (path, why) in &scan.skipped {
        log::warn!("skipped {}: {why}", path.display());
    }
    let mut manifest = match &config.manifest {
        Some(path) => SplitManifest::load(path)?,
        None => SplitManifest::random(&scan.patients(), REFERENCE_SPLIT, config.seed),
    };
    if config.subset < 1.0 {
        manifest = manifest.subsample(config.subset, config.seed);
    }
    let assigned = make_split(&scan.records, &manifest)?;
    for p in &assigned.unknown_patients {
        log::warn!("manifest patient {p} has no patches");
    }
    let in_split: Vec<PatchRecord> = [assigned.train, assigned.validation, assigned.test].concat();
    let filter = filter_artefacts(&in_split, config.artefact_tau);
    let split = make_split(&filter.kept, &manifest)?;
    Ok(Prepared {
        scan,
        manifest,
        filter,
        split,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn commented(provenance: &[String], body: &str) -> String {
    let mut out = String::new();
    for line in provenance {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(body);
    out
}

/// Writes the split manifest and the removed-patch log of a prepared run.
fn write_preparation(config: &RunConfig, prepared: &Prepared, command: &str) -> Result<()> {
    let prov = config.provenance(command);
    let out = &config.output_dir;
    write_text(&out.join("split.txt"), &commented(&prov, &prepared.manifest.render()))?;
    write_text(
        &out.join("removed.csv"),
        &render_removed_log(&prov, &prepared.filter.removed)?,
    )
}

pub fn basis_path(config: &RunConfig, patient: &str) -> PathBuf {
    config.output_dir.join("bases").join(format!("{patient}.txt"))
}

pub fn descriptor_path(config: &RunConfig, set: &str) -> PathBuf {
    config
        .output_dir
        .join("descriptors")
        .join(format!("{}_{set}.csv", config.variant().tag()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names() {
        let v = Variant {
            method: Method::Felp,
            n: 9,
            stain_mode: StainMode::He,
        };
        assert_eq!(v.tag(), "felp9_he");
        assert_eq!(v.label(), "F-ELP9 + SS");
        let e = Variant {
            method: Method::Elp,
            n: 9,
            stain_mode: StainMode::Gray,
        };
        assert_eq!(e.label(), "ELP9");
        assert!(e.sort_key() < v.sort_key());
    }

    #[test]
    fn threads_stay_out_of_the_provenance() {
        let a = RunConfig::default();
        let b = RunConfig {
            threads: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(a.provenance("x"), b.provenance("x"));
        assert!(a.provenance("x")[2].contains("\"t\":0.08"));
    }

    #[test]
    fn validation_rules() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = [
            RunConfig { n: 8, ..Default::default() },
            RunConfig { method: Method::Elp, n: 11, ..Default::default() },
            RunConfig { ks: vec![0], ..Default::default() },
            RunConfig { lambdas: vec![-1.0], ..Default::default() },
            RunConfig { subset: 0.0, ..Default::default() },
            RunConfig { threads: Some(0), ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = RunConfig {
            metrics: vec![Metric::Hutchinson],
            dataset_root: Some("/data".into()),
            ..Default::default()
        };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
