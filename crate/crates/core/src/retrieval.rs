//! Brute-force kNN search and retrieval-as-classification scoring.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::descriptor::io::DescriptorRecord;
use crate::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::metrics::{scores, ConfusionCounts, Metric, Scores};

/// Gallery of labeled descriptors sharing one configuration.
#[derive(Debug, Clone)]
pub struct DescriptorIndex {
    entries: Vec<DescriptorRecord>,
    metric: Metric,
}

impl DescriptorIndex {
    pub fn new(entries: Vec<DescriptorRecord>, metric: Metric) -> Result<Self> {
        if let Some(first) = entries.first() {
            for e in &entries[1..] {
                if !e.descriptor.is_compatible(&first.descriptor) {
                    return Err(Error::invalid(format!(
                        "descriptor of {} is not compatible with {}",
                        e.patch_id, first.patch_id
                    )));
                }
            }
        }
        Ok(Self { entries, metric })
    }

    pub fn entries(&self) -> &[DescriptorRecord] {
        &self.entries
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Descriptor length, or `None` for an empty index.
    pub fn descriptor_len(&self) -> Option<usize> {
        self.entries.first().map(|e| e.descriptor.len())
    }

    fn check_query(&self, q: &Descriptor) -> Result<()> {
        match self.entries.first() {
            Some(first) if !first.descriptor.is_compatible(q) => Err(Error::invalid(format!(
                "query ({} n={} {}, {} bins) does not match the index ({} n={} {}, {} bins)",
                q.method,
                q.n,
                q.stain_mode,
                q.len(),
                first.descriptor.method,
                first.descriptor.n,
                first.descriptor.stain_mode,
                first.descriptor.len()
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub patch_id: String,
    pub distance: f64,
    pub label: u8,
}

fn neighbors(index: &DescriptorIndex, q: &Descriptor, k: usize, metric: Metric) -> Result<Vec<Neighbor>> {
    if k == 0 || k > index.len() {
        return Err(Error::invalid(format!(
            "k = {k} must lie in 1..={}",
            index.len()
        )));
    }
    index.check_query(q)?;
    let mut all = index
        .entries
        .iter()
        .map(|e| {
            Ok(Neighbor {
                patch_id: e.patch_id.clone(),
                distance: metric.distance(&q.bins, &e.descriptor.bins)?,
                label: e.label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let order = |a: &Neighbor, b: &Neighbor| -> Ordering {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.patch_id.cmp(&b.patch_id))
    };
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, order);
        all.truncate(k);
    }
    all.sort_by(order);
    Ok(all)
}

/// The `k` nearest entries in ascending distance; equal distances are ordered
/// by patch id.
pub fn knn_query(index: &DescriptorIndex, q: &Descriptor, k: usize) -> Result<Vec<Neighbor>> {
    neighbors(index, q, k, index.metric)
}

/// Majority label of the neighbours; a tie goes to the nearest one.
pub fn knn_label(neighbors: &[Neighbor]) -> u8 {
    let positives = neighbors.iter().filter(|n| n.label == 1).count();
    let negatives = neighbors.len() - positives;
    match positives.cmp(&negatives) {
        Ordering::Greater => 1,
        Ordering::Less => 0,
        Ordering::Equal => neighbors.first().map_or(0, |n| n.label),
    }
}

fn check_pair(train: &DescriptorIndex, test: &DescriptorIndex) -> Result<()> {
    if let Some(t) = test.entries.first() {
        train.check_query(&t.descriptor)?;
    }
    Ok(())
}

/// Confusion counts of classifying every test entry by its `k` nearest
/// training entries, for each requested `k`.
pub fn retrieval_counts(
    train: &DescriptorIndex,
    test: &DescriptorIndex,
    ks: &[usize],
    metric: Metric,
) -> Result<Vec<ConfusionCounts>> {
    check_pair(train, test)?;
    let k_max = ks.iter().copied().max().unwrap_or(0);
    if ks.is_empty() || ks.contains(&0) || k_max > train.len() {
        return Err(Error::invalid(format!(
            "k values {ks:?} must lie in 1..={}",
            train.len()
        )));
    }
    test.entries
        .par_iter()
        .map(|t| {
            let nn = neighbors(train, &t.descriptor, k_max, metric)?;
            Ok(ks
                .iter()
                .map(|&k| {
                    let mut c = ConfusionCounts::default();
                    c.record(t.label, knn_label(&nn[..k]));
                    c
                })
                .collect::<Vec<_>>())
        })
        .try_reduce(
            || vec![ConfusionCounts::default(); ks.len()],
            |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
        )
}

/// F1 and BAC of kNN classification of `test` against the `train` gallery.
pub fn evaluate_retrieval(
    train: &DescriptorIndex,
    test: &DescriptorIndex,
    k: usize,
    metric: Metric,
) -> Result<Scores> {
    let counts = retrieval_counts(train, test, &[k], metric)?;
    Ok(scores(&counts[0]))
}
