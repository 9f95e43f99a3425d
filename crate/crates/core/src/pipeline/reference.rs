//! Published full-protocol scores, printed next to measured values.

/// `(F1, BAC)` for L1, L2, Cosine and Hutchinson.
pub type MetricScores = [(f64, f64); 4];

/// `(k, row label, scores)`.
pub const RETRIEVAL: [(usize, &str, MetricScores); 18] = [
    (1, "ELP9", [(0.3072, 0.5616), (0.3728, 0.5842), (0.2965, 0.5594), (0.3985, 0.5904)]),
    (1, "ELP9 + SS", [(0.3004, 0.5654), (0.4339, 0.6167), (0.2688, 0.5574), (0.4527, 0.6236)]),
    (1, "F-ELP9", [(0.4177, 0.6008), (0.4179, 0.6015), (0.4200, 0.6022), (0.4189, 0.6025)]),
    (1, "F-ELP9 + SS", [(0.5489, 0.6881), (0.5486, 0.6879), (0.5504, 0.6891), (0.5472, 0.6869)]),
    (1, "F-ELP11", [(0.3969, 0.5865), (0.3947, 0.5855), (0.3954, 0.5863), (0.3792, 0.5774)]),
    (1, "F-ELP11 + SS", [(0.5237, 0.6707), (0.5173, 0.6666), (0.5185, 0.6673), (0.5347, 0.6784)]),
    (3, "ELP9", [(0.4009, 0.6092), (0.4837, 0.6432), (0.3807, 0.6015), (0.5117, 0.6523)]),
    (3, "ELP9 + SS", [(0.3662, 0.5976), (0.5372, 0.6743), (0.3240, 0.5830), (0.5609, 0.6833)]),
    (3, "F-ELP9", [(0.5106, 0.6514), (0.5100, 0.6515), (0.5122, 0.6526), (0.5056, 0.6490)]),
    (3, "F-ELP9 + SS", [(0.6267, 0.7350), (0.6251, 0.7339), (0.6257, 0.7345), (0.6309, 0.7375)]),
    (3, "F-ELP11", [(0.5010, 0.6420), (0.5034, 0.6443), (0.5043, 0.6450), (0.4879, 0.6355)]),
    (3, "F-ELP11 + SS", [(0.6117, 0.7223), (0.6003, 0.7149), (0.6053, 0.7184), (0.6190, 0.7279)]),
    (5, "ELP9", [(0.4138, 0.6159), (0.5057, 0.6559), (0.3904, 0.6064), (0.5405, 0.6699)]),
    (5, "ELP9 + SS", [(0.3599, 0.5948), (0.5563, 0.6861), (0.3142, 0.5786), (0.5897, 0.7016)]),
    (5, "F-ELP9", [(0.5345, 0.6659), (0.5314, 0.6645), (0.5364, 0.6675), (0.5284, 0.6629)]),
    (5, "F-ELP9 + SS", [(0.6492, 0.7505), (0.6485, 0.7498), (0.6474, 0.7494), (0.6521, 0.7519)]),
    (5, "F-ELP11", [(0.5294, 0.6591), (0.5303, 0.6603), (0.5282, 0.6595), (0.5155, 0.6519)]),
    (5, "F-ELP11 + SS", [(0.6381, 0.7398), (0.6306, 0.7349), (0.6309, 0.7351), (0.6427, 0.7437)]),
];

/// `(row label, F1, BAC)` of the kernel SVM with tuned hyperparameters.
pub const CLASSIFICATION: [(&str, f64, f64); 4] = [
    ("F-ELP9", 0.4048, 0.6174),
    ("F-ELP9 + SS", 0.7182, 0.8076),
    ("F-ELP11", 0.3385, 0.5911),
    ("F-ELP11 + SS", 0.6715, 0.7665),
];

pub fn retrieval(k: usize, label: &str) -> Option<MetricScores> {
    RETRIEVAL
        .iter()
        .find(|(kk, l, _)| *kk == k && *l == label)
        .map(|(_, _, v)| *v)
}

pub fn classification(label: &str) -> Option<(f64, f64)> {
    CLASSIFICATION
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|(_, f, b)| (*f, *b))
}
