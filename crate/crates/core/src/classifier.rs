//! Linear soft-margin SVM trained with Pegasos-style primal SGD.
//!
//! The bias is learned as the weight of a constant extra feature
//! (`bias_term`), so it is regularized together with the other weights.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::metrics::{scores, ConfusionCounts, Scores};
use crate::retrieval::DescriptorIndex;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Visit samples in a fresh seeded random order each epoch.
    pub shuffle: bool,
    /// Value of the constant feature carrying the bias.
    pub bias_term: f64,
}

impl TrainOptions {
    pub fn new(lambda: f64, epochs: usize, seed: u64) -> Self {
        Self {
            lambda,
            epochs,
            seed,
            shuffle: true,
            bias_term: 1.0,
        }
    }
}

/// Model plus the margin `y (w . x)` seen before each update, in visit order.
#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub model: LinearModel,
    pub margins: Vec<f64>,
}

fn sign(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Pegasos on raw feature rows. Labels are 0/1 and map to -1/+1.
pub fn train_traced(features: &[&[f64]], labels: &[u8], opts: &TrainOptions) -> Result<TrainTrace> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if !(opts.lambda > 0.0 && opts.lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {}", opts.lambda)));
    }
    if opts.epochs == 0 {
        return Err(Error::invalid("at least one epoch is required"));
    }
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(Error::invalid("training data must contain both classes"));
    }
    let dim = features[0].len();
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::LengthMismatch {
            left: dim,
            right: bad.len(),
        });
    }

    let lambda = opts.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut w = vec![0.0; dim + 1];
    let mut avg = vec![0.0; dim + 1];
    let mut margins = Vec::with_capacity(features.len() * opts.epochs);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut t = 0u64;

    for epoch in 0..opts.epochs {
        if opts.shuffle {
            order.shuffle(&mut rng);
        }
        let last = epoch + 1 == opts.epochs;
        for &i in &order {
            t += 1;
            let x = features[i];
            let y = sign(labels[i]);
            let eta = 1.0 / (lambda * t as f64);
            let dot: f64 = w[..dim].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[dim] * opts.bias_term;
            let margin = y * dot;
            margins.push(margin);
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                for (v, xi) in w[..dim].iter_mut().zip(x) {
                    *v += eta * y * xi;
                }
                w[dim] += eta * y * opts.bias_term;
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                for v in w.iter_mut() {
                    *v *= s;
                }
            }
            if last {
                for (a, v) in avg.iter_mut().zip(&w) {
                    *a += v;
                }
            }
        }
    }
    let count = features.len() as f64;
    for a in avg.iter_mut() {
        *a /= count;
    }
    let bias = avg[dim] * opts.bias_term;
    avg.truncate(dim);
    Ok(TrainTrace {
        model: LinearModel {
            weights: avg,
            bias,
            lambda,
            epochs: opts.epochs,
            seed: opts.seed,
        },
        margins,
    })
}

fn rows(index: &DescriptorIndex) -> (Vec<&[f64]>, Vec<u8>) {
    index
        .entries()
        .iter()
        .map(|e| (e.descriptor.bins.as_slice(), e.label))
        .unzip()
}

/// Trains on every entry of the index, in index order before shuffling.
pub fn svm_train(train: &DescriptorIndex, lambda: f64, epochs: usize, seed: u64) -> Result<LinearModel> {
    if train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let (x, y) = rows(train);
    Ok(train_traced(&x, &y, &TrainOptions::new(lambda, epochs, seed))?.model)
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                left: self.weights.len(),
                right: x.len(),
            });
        }
        Ok(self.weights.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.bias)
    }

    /// Regularized mean hinge loss on the given samples.
    pub fn objective(&self, features: &[&[f64]], labels: &[u8]) -> Result<f64> {
        let mut hinge = 0.0;
        for (x, &l) in features.iter().zip(labels) {
            hinge += (1.0 - sign(l) * self.decision(x)?).max(0.0);
        }
        let norm2: f64 = self.weights.iter().map(|v| v * v).sum();
        Ok(self.lambda / 2.0 * norm2 + hinge / features.len() as f64)
    }

    pub fn render(&self, provenance: &[String]) -> String {
        let mut out = String::new();
        for line in provenance {
            out.push_str(&format!("# {line}\n"));
        }
        out.push_str(&format!("length {}\n", self.weights.len()));
        out.push_str(&format!("lambda {}\n", self.lambda));
        out.push_str(&format!("epochs {}\n", self.epochs));
        out.push_str(&format!("seed {}\n", self.seed));
        out.push_str(&format!("bias {}\n", self.bias));
        out.push_str("weights");
        for w in &self.weights {
            out.push_str(&format!(" {w}"));
        }
        out.push('\n');
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let err = |m: String| Error::Parse {
            path: path.to_path_buf(),
            message: m,
        };
        let mut fields = std::collections::BTreeMap::new();
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            fields.insert(key.to_string(), rest.trim().to_string());
        }
        let get = |k: &str| fields.get(k).ok_or_else(|| err(format!("missing '{k}'")));
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| err(format!("bad value for '{k}'")))
        };
        let int = |k: &str| -> Result<u64> {
            get(k)?.parse().map_err(|_| err(format!("bad value for '{k}'")))
        };
        let weights = get("weights")?
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| err(format!("bad weight '{v}'"))))
            .collect::<Result<Vec<_>>>()?;
        if weights.len() as u64 != int("length")? {
            return Err(err("weight count does not match length".into()));
        }
        Ok(Self {
            weights,
            bias: num("bias")?,
            lambda: num("lambda")?,
            epochs: int("epochs")? as usize,
            seed: int("seed")?,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }
}

/// 1 when `w . d + b > 0`, otherwise 0 (an exact zero is negative).
pub fn svm_predict(model: &LinearModel, d: &Descriptor) -> Result<u8> {
    Ok(u8::from(model.decision(&d.bins)? > 0.0))
}

/// Confusion counts of the model on every entry of the index.
pub fn evaluate_model(model: &LinearModel, data: &DescriptorIndex) -> Result<ConfusionCounts> {
    data.entries()
        .par_iter()
        .map(|e| {
            let mut c = ConfusionCounts::default();
            c.record(e.label, svm_predict(model, &e.descriptor)?);
            Ok(c)
        })
        .try_reduce(ConfusionCounts::default, |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone)]
pub struct GridSearch {
    pub best_lambda: f64,
    pub best_model: LinearModel,
    pub val_scores: Scores,
    /// Validation scores in the order the lambdas were given.
    pub trials: Vec<(f64, Scores)>,
}

/// Picks the lambda with the best validation BAC; ties go to the smaller
/// lambda, then to the earlier entry.
pub fn grid_search(
    train: &DescriptorIndex,
    val: &DescriptorIndex,
    lambdas: &[f64],
    epochs: usize,
    seed: u64,
) -> Result<GridSearch> {
    if lambdas.is_empty() {
        return Err(Error::invalid("empty lambda grid"));
    }
    if val.is_empty() {
        return Err(Error::invalid("empty validation set"));
    }
    let mut best: Option<(f64, LinearModel, Scores)> = None;
    let mut trials = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let model = svm_train(train, lambda, epochs, seed)?;
        let s = scores(&evaluate_model(&model, val)?);
        trials.push((lambda, s));
        let better = match &best {
            None => true,
            Some((bl, _, bs)) => s.bac > bs.bac || (s.bac == bs.bac && lambda < *bl),
        };
        if better {
            best = Some((lambda, model, s));
        }
    }
    let (best_lambda, best_model, val_scores) = best.expect("grid is not empty");
    Ok(GridSearch {
        best_lambda,
        best_model,
        val_scores,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::io::DescriptorRecord;
    use crate::descriptor::{DescriptorMeta, Method, StainMode, WindowSpec};
    use crate::metrics::Metric;
    use rand::{Rng, SeedableRng};

    fn index(samples: &[(Vec<f64>, u8)]) -> DescriptorIndex {
        let entries = samples
            .iter()
            .enumerate()
            .map(|(i, (x, l))| DescriptorRecord {
                patch_id: format!("s{i:04}"),
                label: *l,
                descriptor: Descriptor {
                    bins: x.clone(),
                    method: Method::Felp,
                    n: 9,
                    stain_mode: StainMode::Gray,
                    meta: DescriptorMeta::from_spec(&WindowSpec::default()),
                },
            })
            .collect();
        DescriptorIndex::new(entries, Metric::L1).unwrap()
    }

    fn accuracy(model: &LinearModel, data: &DescriptorIndex) -> f64 {
        let c = evaluate_model(model, data).unwrap();
        (c.tp + c.tn) as f64 / c.total() as f64
    }

    fn separable(seed: u64, count: usize) -> Vec<(Vec<f64>, u8)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| {
                let label = (i % 2) as u8;
                let offset = if label == 1 { 2.0 } else { -2.0 };
                let x = vec![offset + rng.random_range(-0.5..0.5), rng.random_range(-1.0..1.0)];
                (x, label)
            })
            .collect()
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let data = index(&separable(1, 60));
        let model = svm_train(&data, 0.01, 30, 9).unwrap();
        assert_eq!(accuracy(&model, &data), 1.0);
    }

    #[test]
    fn identical_features_predict_the_majority() {
        let samples: Vec<(Vec<f64>, u8)> =
            (0..10).map(|i| (vec![0.5, 0.5], u8::from(i < 7))).collect();
        let data = index(&samples);
        let model = svm_train(&data, 0.1, 50, 3).unwrap();
        assert!((accuracy(&model, &data) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn single_class_is_rejected() {
        let data = index(&[(vec![1.0], 1), (vec![2.0], 1)]);
        assert!(matches!(svm_train(&data, 0.1, 5, 0), Err(Error::InvalidInput(_))));
        let data = index(&[(vec![1.0], 1), (vec![2.0], 0)]);
        assert!(svm_train(&data, 0.0, 5, 0).is_err());
        assert!(svm_train(&data, 0.1, 0, 0).is_err());
    }

    #[test]
    fn prediction_rule() {
        let m = LinearModel {
            weights: vec![1.0, 0.0],
            bias: 0.0,
            lambda: 1.0,
            epochs: 1,
            seed: 0,
        };
        let d = |x: f64| index(&[(vec![x, 5.0], 0)]).entries()[0].descriptor.clone();
        assert_eq!(svm_predict(&m, &d(2.0)).unwrap(), 1);
        assert_eq!(svm_predict(&m, &d(-2.0)).unwrap(), 0);
        assert_eq!(svm_predict(&m, &d(0.0)).unwrap(), 0);
        let short = index(&[(vec![1.0], 0)]).entries()[0].descriptor.clone();
        assert!(svm_predict(&m, &short).is_err());
    }

    fn hand_fixture() -> (Vec<Vec<f64>>, Vec<u8>) {
        (vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], vec![1, 0, 1])
    }

    #[test]
    fn hand_traced_epoch() {
        // lambda = 0.5, radius sqrt(2), bias feature 1, samples in order:
        // t=1 eta=2:   w = 2*(1,0,1) = (2,0,2), projected to (1,0,1)
        // t=2 eta=1:   margin -1, w = 0.5*(1,0,1) - (0,1,1) = (0.5,-1,-0.5)
        // t=3 eta=2/3: margin -1, w = (2/3)*(0.5,-1,-0.5) + (2/3)*(1,1,1) = (1,0,1/3)
        let (x, y) = hand_fixture();
        let xs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let mut opts = TrainOptions::new(0.5, 1, 0);
        opts.shuffle = false;
        let tr = train_traced(&xs, &y, &opts).unwrap();
        for (got, want) in tr.margins.iter().zip([0.0, -1.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let expected = [2.5 / 3.0, -1.0 / 3.0, (1.0 + 1.0 / 3.0 - 0.5) / 3.0];
        assert!((tr.model.weights[0] - expected[0]).abs() < 1e-12);
        assert!((tr.model.weights[1] - expected[1]).abs() < 1e-12);
        assert!((tr.model.bias - expected[2]).abs() < 1e-12);
    }

    #[test]
    fn feature_scaling_with_matching_lambda_keeps_margins() {
        // x -> c x with lambda -> lambda c^2 and the bias feature scaled by c
        // gives w -> w / c, so every margin is unchanged.
        let (x, y) = hand_fixture();
        let c = 2.0;
        let xs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
        let ss: Vec<&[f64]> = scaled.iter().map(Vec::as_slice).collect();
        for shuffle in [false, true] {
            let mut a = TrainOptions::new(0.5, 4, 7);
            a.shuffle = shuffle;
            let mut b = a;
            b.lambda = a.lambda * c * c;
            b.bias_term = a.bias_term * c;
            let ta = train_traced(&xs, &y, &a).unwrap();
            let tb = train_traced(&ss, &y, &b).unwrap();
            assert_eq!(ta.margins, tb.margins);
            let signs = |m: &[f64]| m.iter().map(|v| *v > 0.0).collect::<Vec<_>>();
            assert_eq!(signs(&ta.margins), signs(&tb.margins));
            for (wa, wb) in ta.model.weights.iter().zip(&tb.model.weights) {
                assert_eq!(*wa, wb * c);
            }
        }
    }

    #[test]
    fn objective_trends_down() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let samples: Vec<(Vec<f64>, u8)> = (0..80)
            .map(|_| {
                let x: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
                let label = u8::from(x[0] + 0.5 * x[1] - x[2] + rng.random_range(-0.3..0.3) > 0.2);
                (x, label)
            })
            .collect();
        let data = index(&samples);
        let (xs, ys) = rows(&data);
        // independent evaluation of the objective for each training length
        let objective = |m: &LinearModel| -> f64 {
            let mut hinge = 0.0;
            for (x, &l) in xs.iter().zip(&ys) {
                let f: f64 = m.weights.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + m.bias;
                let y = if l == 1 { 1.0 } else { -1.0 };
                hinge += f64::max(0.0, 1.0 - y * f);
            }
            let n2: f64 = m.weights.iter().map(|w| w * w).sum();
            0.05 / 2.0 * n2 + hinge / xs.len() as f64
        };
        let curve: Vec<f64> = (1..=20)
            .map(|e| objective(&svm_train(&data, 0.05, e, 5).unwrap()))
            .collect();
        let early: f64 = curve[..5].iter().sum::<f64>() / 5.0;
        let late: f64 = curve[15..].iter().sum::<f64>() / 5.0;
        assert!(late < early, "curve {curve:?}");
        let m = svm_train(&data, 0.05, 20, 5).unwrap();
        assert!((m.objective(&xs, &ys).unwrap() - curve[19]).abs() < 1e-12);
    }

    #[test]
    fn training_is_reproducible() {
        let data = index(&separable(4, 30));
        assert_eq!(
            svm_train(&data, 0.1, 5, 77).unwrap(),
            svm_train(&data, 0.1, 5, 77).unwrap()
        );
    }

    #[test]
    fn grid_rules() {
        let train = index(&separable(5, 40));
        let val = index(&separable(6, 20));
        let g = grid_search(&train, &val, &[0.3], 10, 1).unwrap();
        assert_eq!(g.best_lambda, 0.3);
        let g = grid_search(&train, &val, &[0.01, 0.01], 10, 1).unwrap();
        assert_eq!(g.best_lambda, 0.01);
        assert_eq!(g.trials.len(), 2);
        let g = grid_search(&train, &val, &[10.0, 1.0, 0.1, 0.01, 0.001], 20, 1).unwrap();
        assert_eq!(g.val_scores.bac, 1.0);
        // every lambda that reaches the best BAC is at least the chosen one
        for (l, s) in &g.trials {
            if s.bac == g.val_scores.bac {
                assert!(*l >= g.best_lambda);
            }
        }
        assert!(grid_search(&train, &val, &[], 10, 1).is_err());
    }

    #[test]
    fn model_record_round_trip() {
        let data = index(&separable(2, 20));
        let m = svm_train(&data, 0.1, 3, 5).unwrap();
        let text = m.render(&["felp test".into()]);
        assert_eq!(LinearModel::parse(Path::new("m.txt"), &text).unwrap(), m);
    }
}
