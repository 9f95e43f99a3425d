use std::fs;
use std::path::Path;

use felp_core::dataset::SplitManifest;
use felp_core::descriptor::io::read_descriptors;
use felp_core::descriptor::{Method, StainMode};
use felp_core::pipeline::{
    basis_path, cmd_classify, cmd_extract, cmd_report, cmd_search, cmd_stainsep, descriptor_path,
    RunConfig,
};
use felp_core::stain::{angle_deg, BasisRecord, StainBasis};
use felp_core::synthetic::{write_dataset, DatasetSpec};
use felp_core::Error;

fn dataset(root: &Path, patients: usize) {
    write_dataset(
        root,
        &DatasetSpec {
            patients,
            patches_per_class: 3,
            artefacts_per_patient: 1,
            size: 50,
            seed: 17,
        },
    )
    .unwrap();
}

fn manifest(root: &Path, train: &[usize], val: &[usize], test: &[usize]) -> std::path::PathBuf {
    let ids = |v: &[usize]| v.iter().map(|p| format!("{}_idx5", 8900 + p)).collect();
    let m = SplitManifest {
        train: ids(train),
        validation: ids(val),
        test: ids(test),
    };
    let path = root.join("manifest.txt");
    fs::write(&path, m.render()).unwrap();
    path
}

fn config(data: &Path, out: &Path) -> RunConfig {
    RunConfig {
        dataset_root: Some(data.to_path_buf()),
        output_dir: out.to_path_buf(),
        manifest: Some(manifest(data, &[0, 1, 2], &[3], &[4])),
        epochs: 5,
        lambdas: vec![1e-3, 1e-2],
        ..RunConfig::default()
    }
}

#[test]
fn full_run_on_synthetic_patients() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    dataset(data.path(), 5);
    let cfg = config(data.path(), out.path());

    let s = cmd_stainsep(&cfg).unwrap();
    assert_eq!(s.patients, 5);
    assert!(s.failures.is_empty());
    assert!(s.fallback.is_empty(), "{:?}", s.fallback);
    let rec = BasisRecord::load(&basis_path(&cfg, "8900_idx5")).unwrap();
    let reference = StainBasis::reference();
    // per-patient bases are small perturbations of the reference
    assert!(angle_deg(rec.basis.v_h, reference.v_h) < 10.0);
    assert!(angle_deg(rec.basis.v_e, reference.v_e) < 10.0);

    let removed = fs::read_to_string(out.path().join("removed.csv")).unwrap();
    assert_eq!(removed.lines().filter(|l| l.contains(",artefact:")).count(), 5);

    let e = cmd_extract(&cfg).unwrap();
    assert_eq!(
        e.rows,
        vec![("train".into(), 18), ("validation".into(), 6), ("test".into(), 6)]
    );
    let rows = read_descriptors(&descriptor_path(&cfg, "train")).unwrap();
    assert!(rows.iter().all(|r| r.descriptor.len() == 64));

    let search = cmd_search(&cfg).unwrap();
    assert_eq!(search.len(), 4 * 3);
    assert!(out.path().join("search_felp9_he.md").exists());
    cmd_classify(&cfg).unwrap();
    let md = cmd_report(&cfg).unwrap();
    assert!(md.contains("## Retrieval, k = 5"));
    assert!(md.contains("F-ELP9 + SS"));
    assert!(md.contains("0.6521"));
    assert!(md.contains("## Classification"));
}

#[test]
fn gray_variants_have_expected_lengths() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    dataset(data.path(), 3);
    let mut cfg = config(data.path(), out.path());
    cfg.manifest = Some(manifest(data.path(), &[0], &[1], &[2]));
    cfg.stain_mode = StainMode::Gray;
    cfg.method = Method::Elp;
    cmd_extract(&cfg).unwrap();
    let rows = read_descriptors(&descriptor_path(&cfg, "test")).unwrap();
    assert!(rows.iter().all(|r| r.descriptor.len() == 1024));
    cfg.method = Method::Felp;
    cfg.n = 11;
    cmd_extract(&cfg).unwrap();
    let rows = read_descriptors(&descriptor_path(&cfg, "test")).unwrap();
    assert!(rows.iter().all(|r| r.descriptor.len() == 40));
}

#[test]
fn patients_with_only_artefacts_get_the_fallback_basis() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    write_dataset(
        data.path(),
        &DatasetSpec {
            patients: 2,
            patches_per_class: 0,
            artefacts_per_patient: 2,
            size: 50,
            seed: 1,
        },
    )
    .unwrap();
    let mut cfg = config(data.path(), out.path());
    cfg.manifest = Some(manifest(data.path(), &[0], &[], &[1]));
    let s = cmd_stainsep(&cfg).unwrap();
    assert_eq!(s.fallback.len(), 2);
    let rec = BasisRecord::load(&basis_path(&cfg, "8901_idx5")).unwrap();
    assert!(rec.fallback);
    assert_eq!(rec.basis, StainBasis::reference());
    assert!(matches!(cmd_extract(&cfg), Err(Error::EmptyResult(_))));
}

#[test]
fn stained_extraction_needs_bases() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    dataset(data.path(), 2);
    let mut cfg = config(data.path(), out.path());
    cfg.manifest = Some(manifest(data.path(), &[0], &[], &[1]));
    assert!(matches!(cmd_extract(&cfg), Err(Error::Io { .. })));
}

#[test]
fn duplicated_gallery_is_perfect() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    dataset(data.path(), 2);
    let mut cfg = config(data.path(), out.path());
    cfg.stain_mode = StainMode::Gray;
    cfg.manifest = Some(manifest(data.path(), &[0, 1], &[], &[]));
    cmd_extract(&cfg).unwrap();
    // test set = copy of the training descriptors under new ids
    let train = descriptor_path(&cfg, "train");
    let text = fs::read_to_string(&train).unwrap();
    let dup: String = text
        .lines()
        .map(|l| {
            if l.starts_with('#') || l.starts_with("patch_id") {
                format!("{l}\n")
            } else {
                format!("dup-{l}\n")
            }
        })
        .collect();
    fs::write(descriptor_path(&cfg, "test"), dup).unwrap();
    cfg.ks = vec![1];
    for row in cmd_search(&cfg).unwrap() {
        let s = row.scores();
        assert_eq!((s.f1, s.bac), (1.0, 1.0), "{:?}", row.metric);
    }
}

#[test]
fn missing_root_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        output_dir: out.path().to_path_buf(),
        ..RunConfig::default()
    };
    assert!(matches!(cmd_stainsep(&cfg), Err(Error::Config(_))));
    assert!(matches!(cmd_report(&cfg), Err(Error::EmptyResult(_))));
}
