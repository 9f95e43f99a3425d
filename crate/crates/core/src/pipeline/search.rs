use std::fmt::Write as _;
use std::path::Path;

use crate::descriptor::io::read_descriptors;
use crate::descriptor::{Method, StainMode};
use crate::error::{Error, Result};
use crate::metrics::{scores, ConfusionCounts, Metric, Scores};
use crate::retrieval::{retrieval_counts, DescriptorIndex};

use super::report::render_retrieval_table;
use super::{commented, descriptor_path, reference, write_text, RunConfig, Variant};

/// One (variant, k, metric) retrieval result.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRow {
    pub variant: Variant,
    pub k: usize,
    pub metric: Metric,
    pub counts: ConfusionCounts,
}

impl SearchRow {
    pub fn scores(&self) -> Scores {
        scores(&self.counts)
    }
}

pub(crate) const SEARCH_HEADER: &str = "method,n,stain_mode,k,metric,f1,bac,tp,fp,tn,fn";

pub(crate) fn render_search_csv(rows: &[SearchRow]) -> String {
    let mut out = format!("{SEARCH_HEADER}\n");
    for r in rows {
        let s = r.scores();
        let c = r.counts;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.variant.method, r.variant.n, r.variant.stain_mode, r.k, r.metric, s.f1, s.bac, c.tp, c.fp, c.tn, c.fn_
        );
    }
    out
}

fn parse_err(path: &Path, m: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: m.into(),
    }
}

pub(crate) fn parse_search_csv(path: &Path, text: &str) -> Result<Vec<SearchRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if rec.len() != 11 {
            return Err(parse_err(path, format!("expected 11 columns, found {}", rec.len())));
        }
        let int = |i: usize| -> Result<u64> {
            rec[i]
                .parse()
                .map_err(|_| parse_err(path, format!("bad integer '{}'", &rec[i])))
        };
        rows.push(SearchRow {
            variant: Variant {
                method: rec[0].parse::<Method>()?,
                n: int(1)? as usize,
                stain_mode: rec[2].parse::<StainMode>()?,
            },
            k: int(3)? as usize,
            metric: rec[4].parse()?,
            counts: ConfusionCounts {
                tp: int(7)?,
                fp: int(8)?,
                tn: int(9)?,
                fn_: int(10)?,
            },
        });
    }
    Ok(rows)
}

pub(crate) fn load_index(config: &RunConfig, set: &str) -> Result<DescriptorIndex> {
    let path = descriptor_path(config, set);
    let records = read_descriptors(&path)?;
    DescriptorIndex::new(records, config.metrics[0])
}

/// kNN evaluation of the test descriptors against the training gallery for
/// every configured k and metric. Writes `search_<variant>.csv` and `.md`.
pub fn cmd_search(config: &RunConfig) -> Result<Vec<SearchRow>> {
    config.validate()?;
    let train = load_index(config, "train")?;
    let test = load_index(config, "test")?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyResult("train or test descriptors are empty".into()));
    }
    let variant = config.variant();
    let mut ks = config.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut rows = Vec::new();
    for &metric in &config.metrics {
        let counts = retrieval_counts(&train, &test, &ks, metric)?;
        for (&k, counts) in ks.iter().zip(counts) {
            rows.push(SearchRow {
                variant,
                k,
                metric,
                counts,
            });
        }
    }
    rows.sort_by_key(|r| (r.k, r.metric));

    let prov = config.provenance("search");
    let tag = variant.tag();
    let out = &config.output_dir;
    write_text(
        &out.join(format!("search_{tag}.csv")),
        &commented(&prov, &render_search_csv(&rows)),
    )?;

    let mut md = String::new();
    for line in &prov {
        let _ = writeln!(md, "<!-- {line} -->");
    }
    let _ = writeln!(
        md,
        "\nRetrieval of {} test patches against {} training patches.\n",
        test.len(),
        train.len()
    );
    for &k in &ks {
        let mut table_rows = vec![(
            variant.label(),
            config
                .metrics
                .iter()
                .map(|m| rows.iter().find(|r| r.k == k && r.metric == *m).map(|r| r.scores()))
                .collect::<Vec<_>>(),
        )];
        if let Some(published) = reference::retrieval(k, &variant.label()) {
            table_rows.push((
                format!("{} (published)", variant.label()),
                config
                    .metrics
                    .iter()
                    .map(|m| {
                        Metric::ALL.iter().position(|x| x == m).map(|i| Scores {
                            f1: published[i].0,
                            bac: published[i].1,
                            f1_degenerate: false,
                            bac_degenerate: false,
                        })
                    })
                    .collect(),
            ));
        }
        let _ = writeln!(md, "## k = {k}\n");
        md.push_str(&render_retrieval_table(&config.metrics, &table_rows));
        md.push('\n');
    }
    write_text(&out.join(format!("search_{tag}.md")), &md)?;
    Ok(rows)
}
