use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;

use crate::error::{Error, Result};
use crate::metrics::{Metric, Scores};

use super::classify::{parse_classify_csv, ClassifyRow};
use super::search::{parse_search_csv, SearchRow};
use super::{reference, write_text, RunConfig, Variant};

fn cell(s: Option<Scores>, bold: bool) -> (String, String) {
    match s {
        None => ("-".into(), "-".into()),
        Some(s) if bold => (format!("**{:.4}**", s.f1), format!("**{:.4}**", s.bac)),
        Some(s) => (format!("{:.4}", s.f1), format!("{:.4}", s.bac)),
    }
}

/// Index of the best entry: highest F1, then highest BAC, then first.
fn best(row: &[Option<Scores>]) -> Option<usize> {
    let mut best: Option<(usize, Scores)> = None;
    for (i, s) in row.iter().enumerate() {
        if let Some(s) = s {
            let better = match best {
                None => true,
                Some((_, b)) => s.f1 > b.f1 || (s.f1 == b.f1 && s.bac > b.bac),
            };
            if better {
                best = Some((i, *s));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Markdown table with an F1 and a BAC column per metric. The best metric of
/// each row is set in bold.
pub fn render_retrieval_table(metrics: &[Metric], rows: &[(String, Vec<Option<Scores>>)]) -> String {
    let mut out = String::from("| Method |");
    for m in metrics {
        let _ = write!(out, " {0} F1 | {0} BAC |", m.title());
    }
    out.push_str("\n|---|");
    for _ in metrics {
        out.push_str("---:|---:|");
    }
    out.push('\n');
    for (label, scores) in rows {
        let b = best(scores);
        let _ = write!(out, "| {label} |");
        for (i, s) in scores.iter().enumerate() {
            let (f1, bac) = cell(*s, Some(i) == b);
            let _ = write!(out, " {f1} | {bac} |");
        }
        out.push('\n');
    }
    out
}

pub(crate) fn render_classification_table(rows: &[(String, Option<Scores>)]) -> String {
    let mut out = String::from("| Method | F1 | BAC |\n|---|---:|---:|\n");
    let top = best(&rows.iter().map(|(_, s)| *s).collect::<Vec<_>>());
    for (i, (label, s)) in rows.iter().enumerate() {
        let (f1, bac) = cell(*s, Some(i) == top);
        let _ = writeln!(out, "| {label} | {f1} | {bac} |");
    }
    out
}

fn published(v: reference::MetricScores, metrics: &[Metric]) -> Vec<Option<Scores>> {
    metrics
        .iter()
        .map(|m| {
            Metric::ALL.iter().position(|x| x == m).map(|i| Scores {
                f1: v[i].0,
                bac: v[i].1,
                f1_degenerate: false,
                bac_degenerate: false,
            })
        })
        .collect()
}

/// Collects every `search_*.csv` and `classify_*.csv` in the output directory
/// into `report.md` and `report.csv`. Returns the Markdown.
pub fn cmd_report(config: &RunConfig) -> Result<String> {
    let dir = &config.output_dir;
    let listing = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = BTreeSet::new();
    for entry in listing {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        names.insert(entry.file_name().to_string_lossy().into_owned());
    }
    let mut search: Vec<SearchRow> = Vec::new();
    let mut classify: Vec<ClassifyRow> = Vec::new();
    for name in &names {
        let path = dir.join(name);
        let read = || fs::read_to_string(&path).map_err(|e| Error::io(&path, e));
        if name.starts_with("search_") && name.ends_with(".csv") {
            search.extend(parse_search_csv(&path, &read()?)?);
        } else if name.starts_with("classify_") && name.ends_with(".csv") {
            classify.extend(parse_classify_csv(&path, &read()?)?.into_iter().filter(|r| r.set == "test"));
        }
    }
    if search.is_empty() && classify.is_empty() {
        return Err(Error::EmptyResult(format!(
            "no search or classify results in {}",
            dir.display()
        )));
    }

    let mut variants: Vec<Variant> = search
        .iter()
        .map(|r| r.variant)
        .chain(classify.iter().map(|r| r.variant))
        .collect();
    variants.sort_by_key(|v| v.sort_key());
    variants.dedup();
    let metrics: Vec<Metric> = Metric::ALL
        .into_iter()
        .filter(|m| search.iter().any(|r| r.metric == *m))
        .collect();
    let ks: BTreeSet<usize> = search.iter().map(|r| r.k).collect();

    let mut md = String::new();
    for line in config.provenance("report") {
        let _ = writeln!(md, "<!-- {line} -->");
    }
    md.push_str("\n# Results\n");
    let mut csv = String::from("kind,method,n,stain_mode,k,metric,f1,bac\n");

    for &k in &ks {
        let mut measured = Vec::new();
        let mut reference_rows = Vec::new();
        for v in &variants {
            let row: Vec<Option<Scores>> = metrics
                .iter()
                .map(|m| {
                    search
                        .iter()
                        .find(|r| r.variant == *v && r.k == k && r.metric == *m)
                        .map(SearchRow::scores)
                })
                .collect();
            if row.iter().all(Option::is_none) {
                continue;
            }
            for (m, s) in metrics.iter().zip(&row) {
                if let Some(s) = s {
                    let _ = writeln!(
                        csv,
                        "retrieval,{},{},{},{k},{m},{},{}",
                        v.method, v.n, v.stain_mode, s.f1, s.bac
                    );
                }
            }
            measured.push((v.label(), row));
            if let Some(p) = reference::retrieval(k, &v.label()) {
                reference_rows.push((v.label(), published(p, &metrics)));
            }
        }
        let _ = writeln!(md, "\n## Retrieval, k = {k}\n\nMeasured:\n");
        md.push_str(&render_retrieval_table(&metrics, &measured));
        if !reference_rows.is_empty() {
            md.push_str("\nPublished (full protocol):\n\n");
            md.push_str(&render_retrieval_table(&metrics, &reference_rows));
        }
    }

    if ks.len() > 1 {
        md.push_str("\n## Trend in k\n\n");
        for v in &variants {
            let mut rising = 0;
            let mut seen = 0;
            let mut by_metric: BTreeMap<Metric, Vec<f64>> = BTreeMap::new();
            for r in search.iter().filter(|r| r.variant == *v) {
                by_metric.entry(r.metric).or_default().push(r.scores().f1);
            }
            for f1s in by_metric.values() {
                if f1s.len() > 1 {
                    seen += 1;
                    rising += usize::from(f1s.windows(2).all(|w| w[1] >= w[0]));
                }
            }
            if seen > 0 {
                let _ = writeln!(
                    md,
                    "- {}: F1 non-decreasing in k for {rising} of {seen} metrics",
                    v.label()
                );
            }
        }
    }

    if !classify.is_empty() {
        md.push_str("\n## Classification\n\n");
        let mut rows = Vec::new();
        for v in &variants {
            if let Some(r) = classify.iter().find(|r| r.variant == *v) {
                let _ = writeln!(
                    csv,
                    "classification,{},{},{},,,{},{}",
                    v.method, v.n, v.stain_mode, r.scores.f1, r.scores.bac
                );
                rows.push((format!("{} (linear, lambda = {})", v.label(), r.lambda), Some(r.scores)));
                if let Some((f1, bac)) = reference::classification(&v.label()) {
                    rows.push((
                        format!("{} (published, kernel SVM)", v.label()),
                        Some(Scores {
                            f1,
                            bac,
                            f1_degenerate: false,
                            bac_degenerate: false,
                        }),
                    ));
                }
            }
        }
        md.push_str(&render_classification_table(&rows));
    }

    write_text(&dir.join("report.md"), &md)?;
    write_text(
        &dir.join("report.csv"),
        &super::commented(&config.provenance("report"), &csv),
    )?;
    Ok(md)
}
