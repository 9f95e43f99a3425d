use std::fmt::Write as _;
use std::path::Path;

use crate::classifier::{evaluate_model, grid_search, LinearModel};
use crate::descriptor::{Method, StainMode};
use crate::error::{Error, Result};
use crate::metrics::{scores, ConfusionCounts, Scores};

use super::report::render_classification_table;
use super::search::load_index;
use super::{commented, reference, write_text, RunConfig, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyRow {
    pub variant: Variant,
    /// `validation` for grid trials, `test` for the selected model.
    pub set: String,
    pub lambda: f64,
    pub scores: Scores,
    pub counts: Option<ConfusionCounts>,
}

#[derive(Debug, Clone)]
pub struct ClassifyOutcome {
    pub model: LinearModel,
    pub val_scores: Scores,
    pub test_counts: ConfusionCounts,
    pub test_scores: Scores,
}

pub(crate) const CLASSIFY_HEADER: &str = "method,n,stain_mode,set,lambda,f1,bac,tp,fp,tn,fn";

pub(crate) fn render_classify_csv(rows: &[ClassifyRow]) -> String {
    let mut out = format!("{CLASSIFY_HEADER}\n");
    for r in rows {
        let c = r
            .counts
            .map(|c| format!("{},{},{},{}", c.tp, c.fp, c.tn, c.fn_))
            .unwrap_or_else(|| ",,,".into());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{c}",
            r.variant.method, r.variant.n, r.variant.stain_mode, r.set, r.lambda, r.scores.f1, r.scores.bac
        );
    }
    out
}

pub(crate) fn parse_classify_csv(path: &Path, text: &str) -> Result<Vec<ClassifyRow>> {
    let err = |m: String| Error::Parse {
        path: path.to_path_buf(),
        message: m,
    };
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
            return Err(err(format!("expected 11 columns, found {}", rec.len())));
        }
        let num = |i: usize| -> Result<f64> { rec[i].parse().map_err(|_| err(format!("bad number '{}'", &rec[i]))) };
        let counts = if rec[7].is_empty() {
            None
        } else {
            let int = |i: usize| -> Result<u64> { rec[i].parse().map_err(|_| err(format!("bad count '{}'", &rec[i]))) };
            Some(ConfusionCounts {
                tp: int(7)?,
                fp: int(8)?,
                tn: int(9)?,
                fn_: int(10)?,
            })
        };
        let scores = match counts {
            Some(c) => scores(&c),
            None => Scores {
                f1: num(5)?,
                bac: num(6)?,
                f1_degenerate: false,
                bac_degenerate: false,
            },
        };
        rows.push(ClassifyRow {
            variant: Variant {
                method: rec[0].parse::<Method>()?,
                n: rec[1].parse().map_err(|_| err(format!("bad window size '{}'", &rec[1])))?,
                stain_mode: rec[2].parse::<StainMode>()?,
            },
            set: rec[3].to_string(),
            lambda: num(4)?,
            scores,
            counts,
        });
    }
    Ok(rows)
}

/// Grid search on the validation set, then scores of the selected model on
/// the test set. Writes `model_<variant>.txt`, `classify_<variant>.csv` and `.md`.
pub fn cmd_classify(config: &RunConfig) -> Result<ClassifyOutcome> {
    config.validate()?;
    let train = load_index(config, "train")?;
    let val = load_index(config, "validation")?;
    let test = load_index(config, "test")?;
    if train.is_empty() || val.is_empty() || test.is_empty() {
        return Err(Error::EmptyResult("train, validation or test descriptors are empty".into()));
    }
    let grid = grid_search(&train, &val, &config.lambdas, config.epochs, config.seed)?;
    let test_counts = evaluate_model(&grid.best_model, &test)?;
    let test_scores = scores(&test_counts);

    let variant = config.variant();
    let mut rows: Vec<ClassifyRow> = grid
        .trials
        .iter()
        .map(|(lambda, s)| ClassifyRow {
            variant,
            set: "validation".into(),
            lambda: *lambda,
            scores: *s,
            counts: None,
        })
        .collect();
    rows.push(ClassifyRow {
        variant,
        set: "test".into(),
        lambda: grid.best_lambda,
        scores: test_scores,
        counts: Some(test_counts),
    });

    let prov = config.provenance("classify");
    let tag = variant.tag();
    let out = &config.output_dir;
    write_text(&out.join(format!("model_{tag}.txt")), &grid.best_model.render(&prov))?;
    write_text(
        &out.join(format!("classify_{tag}.csv")),
        &commented(&prov, &render_classify_csv(&rows)),
    )?;

    let mut md = String::new();
    for line in &prov {
        let _ = writeln!(md, "<!-- {line} -->");
    }
    let _ = writeln!(
        md,
        "\nLinear SVM, lambda = {} selected by validation BAC ({:.4}).\n",
        grid.best_lambda, grid.val_scores.bac
    );
    let mut table = vec![(variant.label(), Some(test_scores))];
    if let Some((f1, bac)) = reference::classification(&variant.label()) {
        table.push((
            format!("{} (published, kernel SVM)", variant.label()),
            Some(Scores {
                f1,
                bac,
                f1_degenerate: false,
                bac_degenerate: false,
            }),
        ));
    }
    md.push_str(&render_classification_table(&table));
    md.push_str("\nPublished figures come from a kernel SVM with tuned hyperparameters; this run uses a linear model.\n");
    write_text(&out.join(format!("classify_{tag}.md")), &md)?;

    Ok(ClassifyOutcome {
        model: grid.best_model,
        val_scores: grid.val_scores,
        test_counts,
        test_scores,
    })
}
