//! IDC patch collections: directory scan, patient splits and artefact removal.
//!
//! The expected layout is `<root>/<patient>/<class>/<patient>_x<X>_y<Y>_class<C>.png`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regex::Regex;
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::imaging::RasterImage;
use crate::stain::channel_variances;

/// Side length of a full-size patch.
pub const PATCH_SIZE: u32 = 50;

static PATCH_NAME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(.+)_x(\d+)_y(\d+)_class([01])\.png$").expect("valid regex"));

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PatchRecord {
    pub patient: String,
    pub x: u32,
    pub y: u32,
    /// 1 when IDC is present.
    pub label: u8,
    pub path: PathBuf,
    pub flagged: bool,
}

impl PatchRecord {
    /// File stem, used as the patch id in descriptor files.
    pub fn id(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    fn sort_key(&self) -> (&str, u32, u32, &Path) {
        (&self.patient, self.x, self.y, &self.path)
    }
}

/// Parses `<patient>_x<X>_y<Y>_class<C>.png`.
pub fn parse_patch_name(name: &str) -> Option<(String, u32, u32, u8)> {
    let caps = PATCH_NAME.captures(name)?;
    Some((
        caps[1].to_string(),
        caps[2].parse().ok()?,
        caps[3].parse().ok()?,
        caps[4].parse().ok()?,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    MalformedName,
    /// The file name and the class directory disagree.
    LabelConflict,
    WrongSize { width: u32, height: u32 },
    Unreadable(String),
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::MalformedName => f.write_str("malformed file name"),
            SkipReason::LabelConflict => f.write_str("class directory does not match file name"),
            SkipReason::WrongSize { width, height } => write!(f, "patch is {width}x{height}"),
            SkipReason::Unreadable(m) => write!(f, "unreadable: {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanOptions {
    /// Keep patches whose size differs from [`PATCH_SIZE`].
    pub accept_any_size: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    /// Sorted by patient, x, y, then path.
    pub records: Vec<PatchRecord>,
    /// PNG files that were not turned into records, sorted by path.
    pub skipped: Vec<(PathBuf, SkipReason)>,
    /// Accepted patches of non-standard size.
    pub odd_size: usize,
}

impl ScanReport {
    pub fn malformed(&self) -> usize {
        self.skipped
            .iter()
            .filter(|(_, r)| matches!(r, SkipReason::MalformedName | SkipReason::LabelConflict))
            .count()
    }

    pub fn patients(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.patient.clone()).collect()
    }
}

enum Scanned {
    Record(PatchRecord, bool),
    Skipped(PathBuf, SkipReason),
}

fn inspect(path: PathBuf, opts: &ScanOptions) -> Scanned {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let Some((patient, x, y, label)) = parse_patch_name(&name) else {
        return Scanned::Skipped(path, SkipReason::MalformedName);
    };
    let class_dir = path
        .parent()
        .and_then(Path::file_name)
        .map(|n| n.to_string_lossy().into_owned());
    if let Some(dir) = class_dir.as_deref() {
        if (dir == "0" || dir == "1") && dir != label.to_string() {
            return Scanned::Skipped(path, SkipReason::LabelConflict);
        }
    }
    let (width, height) = match image::image_dimensions(&path) {
        Ok(d) => d,
        Err(e) => return Scanned::Skipped(path, SkipReason::Unreadable(e.to_string())),
    };
    let full = width == PATCH_SIZE && height == PATCH_SIZE;
    if !full && !opts.accept_any_size {
        return Scanned::Skipped(path, SkipReason::WrongSize { width, height });
    }
    Scanned::Record(
        PatchRecord {
            patient,
            x,
            y,
            label,
            path,
            flagged: false,
        },
        !full,
    )
}

/// Collects every `.png` below `root`. The result does not depend on the
/// directory listing order.
pub fn scan(root: &Path, opts: &ScanOptions) -> Result<ScanReport> {
    let meta = fs::metadata(root).map_err(|e| Error::io(root, e))?;
    if !meta.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        ));
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        let is_png = entry
            .path()
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("png"));
        if entry.file_type().is_file() && is_png {
            files.push(entry.into_path());
        }
    }
    let scanned: Vec<Scanned> = files.into_par_iter().map(|p| inspect(p, opts)).collect();

    let mut report = ScanReport::default();
    for s in scanned {
        match s {
            Scanned::Record(r, odd) => {
                report.odd_size += usize::from(odd);
                report.records.push(r);
            }
            Scanned::Skipped(p, why) => report.skipped.push((p, why)),
        }
    }
    report.records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    report.skipped.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(report)
}

/// Patient-level partition into training, validation and test sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitManifest {
    pub train: BTreeSet<String>,
    pub validation: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

/// Relative sizes of the published patient split (train, validation, test).
pub const REFERENCE_SPLIT: (usize, usize, usize) = (84, 29, 49);

const SECTIONS: [&str; 3] = ["train", "validation", "test"];

impl SplitManifest {
    pub fn sets(&self) -> [&BTreeSet<String>; 3] {
        [&self.train, &self.validation, &self.test]
    }

    pub fn validate(&self) -> Result<()> {
        let sets = self.sets();
        for i in 0..3 {
            for j in i + 1..3 {
                if let Some(p) = sets[i].intersection(sets[j]).next() {
                    return Err(Error::InvalidManifest(format!(
                        "patient {p} is in both {} and {}",
                        SECTIONS[i], SECTIONS[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Seeded random split in the given proportions.
    pub fn random(patients: &BTreeSet<String>, proportions: (usize, usize, usize), seed: u64) -> Self {
        let mut ids: Vec<&String> = patients.iter().collect();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (a, b, c) = proportions;
        let total = (a + b + c).max(1) as f64;
        let n = ids.len();
        let n_train = ((n as f64 * a as f64 / total).round() as usize).min(n);
        let n_val = ((n as f64 * b as f64 / total).round() as usize).min(n - n_train);
        let collect = |s: &[&String]| s.iter().map(|p| p.to_string()).collect();
        Self {
            train: collect(&ids[..n_train]),
            validation: collect(&ids[n_train..n_train + n_val]),
            test: collect(&ids[n_train + n_val..]),
        }
    }

    /// Keeps a seeded random fraction (at least one patient) of each set.
    pub fn subsample(&self, fraction: f64, seed: u64) -> Self {
        let pick = |set: &BTreeSet<String>, salt: u64| -> BTreeSet<String> {
            if set.is_empty() || fraction >= 1.0 {
                return set.clone();
            }
            let mut ids: Vec<&String> = set.iter().collect();
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ salt));
            let keep = ((set.len() as f64 * fraction).round() as usize).clamp(1, set.len());
            ids[..keep].iter().map(|p| p.to_string()).collect()
        };
        Self {
            train: pick(&self.train, 0x7472),
            validation: pick(&self.validation, 0x7661),
            test: pick(&self.test, 0x7465),
        }
    }

    /// One section header per set, then one patient id per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, set) in SECTIONS.iter().zip(self.sets()) {
            let _ = writeln!(out, "[{name}]");
            for p in set {
                let _ = writeln!(out, "{p}");
            }
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut m = SplitManifest::default();
        let mut current: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = Some(SECTIONS.iter().position(|s| *s == name).ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {}: unknown section '{name}'", i + 1),
                })?);
                continue;
            }
            let set = match current {
                Some(0) => &mut m.train,
                Some(1) => &mut m.validation,
                Some(_) => &mut m.test,
                None => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        message: format!("line {}: patient id before any section", i + 1),
                    })
                }
            };
            set.insert(line.to_string());
        }
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Split {
    pub train: Vec<PatchRecord>,
    pub validation: Vec<PatchRecord>,
    pub test: Vec<PatchRecord>,
    /// Records whose patient is not in the manifest.
    pub unassigned: Vec<PatchRecord>,
    /// Manifest patients with no scanned records, sorted.
    pub unknown_patients: Vec<String>,
}

/// Partitions records by patient. Input order is preserved within each list.
pub fn make_split(records: &[PatchRecord], manifest: &SplitManifest) -> Result<Split> {
    manifest.validate()?;
    let mut split = Split::default();
    let seen: BTreeSet<&str> = records.iter().map(|r| r.patient.as_str()).collect();
    for r in records {
        let target = if manifest.train.contains(&r.patient) {
            &mut split.train
        } else if manifest.validation.contains(&r.patient) {
            &mut split.validation
        } else if manifest.test.contains(&r.patient) {
            &mut split.test
        } else {
            &mut split.unassigned
        };
        target.push(r.clone());
    }
    let mut unknown: BTreeSet<String> = BTreeSet::new();
    for set in manifest.sets() {
        unknown.extend(set.iter().filter(|p| !seen.contains(p.as_str())).cloned());
    }
    split.unknown_patients = unknown.into_iter().collect();
    Ok(split)
}

#[derive(Debug, Clone, Default)]
pub struct ArtefactFilter {
    pub kept: Vec<PatchRecord>,
    /// Flagged or unreadable records with the reason, in input order.
    pub removed: Vec<(PatchRecord, String)>,
}

/// Removes patches whose largest per-channel variance is below `tau`.
pub fn filter_artefacts(records: &[PatchRecord], tau: f64) -> ArtefactFilter {
    let checked: Vec<Option<String>> = records
        .par_iter()
        .map(|r| match RasterImage::load_rgb(&r.path) {
            Err(e) => Some(format!("unreadable: {e}")),
            Ok(img) => {
                let top = channel_variances(&img).into_iter().fold(0.0, f64::max);
                (img.width() == 0 || top < tau)
                    .then(|| format!("artefact: max channel variance {top:.3} < {tau}"))
            }
        })
        .collect();
    let mut out = ArtefactFilter::default();
    for (r, why) in records.iter().zip(checked) {
        match why {
            None => out.kept.push(r.clone()),
            Some(reason) => {
                let mut r = r.clone();
                r.flagged = true;
                out.removed.push((r, reason));
            }
        }
    }
    out
}

/// Audit log of removed patches: provenance comment lines, then `path,reason`.
pub fn render_removed_log(provenance: &[String], removed: &[(PatchRecord, String)]) -> Result<String> {
    let mut out = String::new();
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| Error::Csv {
        path: PathBuf::from("<removed log>"),
        source,
    };
    w.write_record(["path", "reason"]).map_err(csv_err)?;
    for (r, reason) in removed {
        w.write_record([r.path.to_string_lossy().as_ref(), reason.as_str()])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    out.push_str(&String::from_utf8_lossy(&bytes));
    Ok(out)
}

/// Groups records by patient, preserving order.
pub fn by_patient(records: &[PatchRecord]) -> BTreeMap<String, Vec<PatchRecord>> {
    let mut map: BTreeMap<String, Vec<PatchRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.patient.clone()).or_default().push(r.clone());
    }
    map
}
