use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repr::LayerEmbeddings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Minimum top-class probability for an assignment.
    pub threshold: f64,
    pub holdout_fraction: f64,
    pub l2_lambda: f64,
    pub max_iters: usize,
    /// Stop when the objective changes by less than this between iterations.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            threshold: 0.97,
            holdout_fraction: 0.10,
            l2_lambda: 1e-4,
            max_iters: 1000,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(Error::Config(format!("holdout fraction {} outside (0, 1)", self.holdout_fraction)));
        }
        if !self.l2_lambda.is_finite() || self.l2_lambda < 0.0 {
            return Err(Error::Config(format!("invalid l2 lambda {}", self.l2_lambda)));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::Config(format!("invalid tolerance {}", self.tolerance)));
        }
        Ok(())
    }
}

/// Anything that maps an embedding to (cluster id, confidence).
pub trait ConceptPredictor: Sync {
    fn dim(&self) -> usize;
    fn cluster_ids(&self) -> &[usize];
    /// Class probabilities in `cluster_ids` order.
    fn probabilities(&self, x: &[f32]) -> Vec<f64>;

    /// Top class and its probability; ties go to the smaller cluster id.
    fn predict(&self, x: &[f32]) -> (usize, f64) {
        let p = self.probabilities(x);
        let mut best = 0;
        for (i, &v) in p.iter().enumerate().skip(1) {
            if v > p[best] {
                best = i;
            }
        }
        (self.cluster_ids()[best], p[best])
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Softmax regression: `weights` is `C x D` row-major, plus `C` biases.
/// Cluster ids are sorted ascending, so class order equals id order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptClassifier {
    cluster_ids: Vec<usize>,
    dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl ConceptClassifier {
    pub fn new(cluster_ids: Vec<usize>, dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        let c = cluster_ids.len();
        if weights.len() != c * dim || bias.len() != c {
            return Err(Error::Invalid("classifier parameter sizes do not match C x D".into()));
        }
        if !cluster_ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Invalid("classifier cluster ids must be strictly ascending".into()));
        }
        Ok(Self {
            cluster_ids,
            dim,
            weights,
            bias,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.cluster_ids.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn logits(&self, x: &[f32]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.dim)
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(x).map(|(w, &x)| w * f64::from(x)).sum::<f64>())
            .collect()
    }

    /// Header line `{"C":..,"D":..,"cluster_ids":[..],"kind":"softmax"}`
    /// followed by the little-endian f64 weights (row-major) and then the
    /// biases.
    pub fn write(&self, path: &Path) -> Result<()> {
        let values = self.weights.iter().chain(&self.bias).copied();
        write_model(path, &Header::new(KIND_SOFTMAX, &self.cluster_ids, self.dim), values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (header, values) = read_model(path, KIND_SOFTMAX)?;
        let (w, b) = values.split_at(header.c * header.d);
        Self::new(header.cluster_ids, header.d, w.to_vec(), b.to_vec())
    }
}

const KIND_SOFTMAX: &str = "softmax";
const KIND_CENTROID: &str = "centroid";

fn default_kind() -> String {
    KIND_SOFTMAX.to_string()
}

#[derive(Serialize, Deserialize)]
struct Header {
    #[serde(rename = "C")]
    c: usize,
    #[serde(rename = "D")]
    d: usize,
    cluster_ids: Vec<usize>,
    #[serde(default = "default_kind")]
    kind: String,
}

impl Header {
    fn new(kind: &str, cluster_ids: &[usize], d: usize) -> Self {
        Self {
            c: cluster_ids.len(),
            d,
            cluster_ids: cluster_ids.to_vec(),
            kind: kind.to_string(),
        }
    }

    fn payload_len(&self) -> usize {
        match self.kind.as_str() {
            KIND_CENTROID => self.c * self.d,
            _ => self.c * self.d + self.c,
        }
    }
}

fn write_model(path: &Path, header: &Header, values: impl Iterator<Item = f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, header).map_err(|e| Error::parse(path, 1, e))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_header(path: &Path) -> Result<(Header, BufReader<File>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_slice(&line).map_err(|e| Error::parse(path, 1, e))?;
    if header.cluster_ids.len() != header.c {
        return Err(Error::parse(path, 1, "C does not match cluster_ids"));
    }
    if header.kind != KIND_SOFTMAX && header.kind != KIND_CENTROID {
        return Err(Error::parse(path, 1, format!("unknown model kind {:?}", header.kind)));
    }
    Ok((header, r))
}

fn read_model(path: &Path, kind: &str) -> Result<(Header, Vec<f64>)> {
    let (header, mut r) = read_header(path)?;
    if header.kind != kind {
        return Err(Error::parse(path, 1, format!("expected a {kind} model, found {}", header.kind)));
    }
    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(|e| Error::io(path, e))?;
    let expected = header.payload_len() * 8;
    if payload.len() != expected {
        return Err(Error::Invalid(format!(
            "{}: model payload is {} bytes, expected {expected}",
            path.display(),
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, values))
}

impl ConceptPredictor for ConceptClassifier {
    fn dim(&self) -> usize {
        self.dim
    }

    fn cluster_ids(&self) -> &[usize] {
        &self.cluster_ids
    }

    fn probabilities(&self, x: &[f32]) -> Vec<f64> {
        let mut z = self.logits(x);
        softmax_in_place(&mut z);
        z
    }
}

/// Objective `mean_i -log p(y_i | x_i) + lambda/2 * ||W||^2` (bias not
/// regularised) and its gradient.
///
/// `params` holds the `C x D` weights row-major followed by `C` biases; `x`
/// is `n x D` row-major and `labels` are class indices in `0..C`.
pub fn objective_and_gradient(
    params: &[f64],
    x: &[f64],
    labels: &[usize],
    n_classes: usize,
    lambda: f64,
) -> (f64, Vec<f64>) {
    let n = labels.len();
    let d = x.len() / n.max(1);
    let (w, b) = params.split_at(n_classes * d);
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut z = vec![0.0; n_classes];
    for (row, &y) in x.chunks_exact(d.max(1)).zip(labels) {
        for c in 0..n_classes {
            z[c] = b[c] + w[c * d..(c + 1) * d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
        }
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += log_sum - z[y];
        for c in 0..n_classes {
            let p = (z[c] - log_sum).exp();
            let r = p - if c == y { 1.0 } else { 0.0 };
            let gw = &mut grad[c * d..(c + 1) * d];
            for (g, &xv) in gw.iter_mut().zip(row) {
                *g += r * xv;
            }
            grad[n_classes * d + c] += r;
        }
    }
    let inv = 1.0 / n as f64;
    grad.iter_mut().for_each(|g| *g *= inv);
    let mut reg = 0.0;
    for (g, &wv) in grad[..n_classes * d].iter_mut().zip(w) {
        *g += lambda * wv;
        reg += wv * wv;
    }
    (loss * inv + 0.5 * lambda * reg, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    pub train_accuracy: f64,
}

/// Full-batch gradient descent with Armijo backtracking, from zero weights.
///
/// `rows` selects training rows of `embeddings`; `cluster_of_row[i]` is the
/// cluster id of `rows[i]`.
pub fn train_classifier(
    embeddings: &LayerEmbeddings,
    rows: &[usize],
    cluster_of_row: &[usize],
    cfg: &TrainConfig,
) -> Result<(ConceptClassifier, TrainReport)> {
    cfg.validate()?;
    if rows.len() != cluster_of_row.len() {
        return Err(Error::Invalid("rows and labels differ in length".into()));
    }
    let mut cluster_ids: Vec<usize> = cluster_of_row.to_vec();
    cluster_ids.sort_unstable();
    cluster_ids.dedup();
    if cluster_ids.len() < 2 {
        return Err(Error::Training(format!("need at least 2 classes, got {}", cluster_ids.len())));
    }
    let d = embeddings.dim();
    let c = cluster_ids.len();
    let labels: Vec<usize> = cluster_of_row
        .iter()
        .map(|id| cluster_ids.binary_search(id).unwrap())
        .collect();
    let mut x = Vec::with_capacity(rows.len() * d);
    for &r in rows {
        x.extend(embeddings.row(r).iter().map(|&v| f64::from(v)));
    }

    let mut params = vec![0.0; c * d + c];
    let (mut obj, mut grad) = objective_and_gradient(&params, &x, &labels, c, cfg.l2_lambda);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        if !obj.is_finite() {
            return Err(Error::Training(format!("objective became {obj}")));
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2 == 0.0 {
            converged = true;
            break;
        }
        step *= 2.0;
        let (candidate, new_obj, new_grad) = loop {
            let cand: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (o, g) = objective_and_gradient(&cand, &x, &labels, c, cfg.l2_lambda);
            if o.is_finite() && o <= obj - 1e-4 * step * g2 {
                break (cand, o, g);
            }
            step *= 0.5;
            if step < 1e-20 {
                break (params.clone(), obj, grad.clone());
            }
        };
        iterations += 1;
        let change = (obj - new_obj).abs();
        params = candidate;
        obj = new_obj;
        grad = new_grad;
        if change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    if !obj.is_finite() {
        return Err(Error::Training(format!("objective became {obj}")));
    }
    let bias = params.split_off(c * d);
    let clf = ConceptClassifier::new(cluster_ids, d, params, bias)?;
    let correct = rows
        .iter()
        .zip(cluster_of_row)
        .filter(|(&r, &y)| clf.predict(embeddings.row(r)).0 == y)
        .count();
    let report = TrainReport {
        iterations,
        final_objective: obj,
        converged,
        train_accuracy: correct as f64 / rows.len() as f64,
    };
    Ok((clf, report))
}

/// Nearest-centroid assignment. Confidence is a softmax over negative half
/// squared distances.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidAssigner {
    cluster_ids: Vec<usize>,
    dim: usize,
    centroids: Vec<f64>,
}

impl CentroidAssigner {
    pub fn fit(embeddings: &LayerEmbeddings, rows: &[usize], cluster_of_row: &[usize]) -> Result<Self> {
        if rows.len() != cluster_of_row.len() || rows.is_empty() {
            return Err(Error::Invalid("need matching, non-empty rows and labels".into()));
        }
        let mut cluster_ids = cluster_of_row.to_vec();
        cluster_ids.sort_unstable();
        cluster_ids.dedup();
        let d = embeddings.dim();
        let mut sums = vec![0.0; cluster_ids.len() * d];
        let mut counts = vec![0usize; cluster_ids.len()];
        for (&r, id) in rows.iter().zip(cluster_of_row) {
            let c = cluster_ids.binary_search(id).unwrap();
            counts[c] += 1;
            for (s, &v) in sums[c * d..(c + 1) * d].iter_mut().zip(embeddings.row(r)) {
                *s += f64::from(v);
            }
        }
        for (c, &n) in counts.iter().enumerate() {
            sums[c * d..(c + 1) * d].iter_mut().for_each(|s| *s /= n as f64);
        }
        Ok(Self {
            cluster_ids,
            dim: d,
            centroids: sums,
        })
    }
}

impl CentroidAssigner {
    pub fn new(cluster_ids: Vec<usize>, dim: usize, centroids: Vec<f64>) -> Result<Self> {
        if centroids.len() != cluster_ids.len() * dim {
            return Err(Error::Invalid("centroid sizes do not match C x D".into()));
        }
        if !cluster_ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Invalid("centroid cluster ids must be strictly ascending".into()));
        }
        Ok(Self {
            cluster_ids,
            dim,
            centroids,
        })
    }

    /// `C x D` row-major, in cluster id order.
    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    /// Same layout as [`ConceptClassifier::write`] with kind `centroid` and
    /// the centroids as payload.
    pub fn write(&self, path: &Path) -> Result<()> {
        let header = Header::new(KIND_CENTROID, &self.cluster_ids, self.dim);
        write_model(path, &header, self.centroids.iter().copied())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (header, values) = read_model(path, KIND_CENTROID)?;
        Self::new(header.cluster_ids, header.d, values)
    }
}

/// Either predictor, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum ConceptModel {
    Softmax(ConceptClassifier),
    Centroid(CentroidAssigner),
}

impl ConceptModel {
    pub fn load(path: &Path) -> Result<Self> {
        let (header, _) = read_header(path)?;
        if header.kind == KIND_CENTROID {
            CentroidAssigner::load(path).map(ConceptModel::Centroid)
        } else {
            ConceptClassifier::load(path).map(ConceptModel::Softmax)
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        match self {
            ConceptModel::Softmax(m) => m.write(path),
            ConceptModel::Centroid(m) => m.write(path),
        }
    }

    fn inner(&self) -> &dyn ConceptPredictor {
        match self {
            ConceptModel::Softmax(m) => m,
            ConceptModel::Centroid(m) => m,
        }
    }
}

impl ConceptPredictor for ConceptModel {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn cluster_ids(&self) -> &[usize] {
        self.inner().cluster_ids()
    }

    fn probabilities(&self, x: &[f32]) -> Vec<f64> {
        self.inner().probabilities(x)
    }
}

impl ConceptPredictor for CentroidAssigner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn cluster_ids(&self) -> &[usize] {
        &self.cluster_ids
    }

    fn probabilities(&self, x: &[f32]) -> Vec<f64> {
        let mut z: Vec<f64> = self
            .centroids
            .chunks_exact(self.dim)
            .map(|mu| -0.5 * mu.iter().zip(x).map(|(m, &v)| (f64::from(v) - m).powi(2)).sum::<f64>())
            .collect();
        softmax_in_place(&mut z);
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub row: usize,
    pub cluster_id: usize,
    pub confidence: f64,
}

/// Rows whose top probability reaches `threshold` (clamped to [0, 1]).
pub fn predict_assign<P: ConceptPredictor>(
    model: &P,
    embeddings: &LayerEmbeddings,
    threshold: f64,
) -> Result<Vec<Assignment>> {
    if embeddings.dim() != model.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            found: embeddings.dim(),
        });
    }
    let t = threshold.clamp(0.0, 1.0);
    Ok((0..embeddings.n_rows())
        .into_par_iter()
        .filter_map(|row| {
            let (cluster_id, confidence) = model.predict(embeddings.row(row));
            (confidence >= t).then_some(Assignment {
                row,
                cluster_id,
                confidence,
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub threshold: f64,
    pub n: usize,
    pub covered: usize,
    pub correct: usize,
    pub coverage: f64,
    /// Correct among covered; `None` when nothing is covered.
    pub precision: Option<f64>,
}

/// Coverage and precision on held-out rows with known cluster ids.
pub fn evaluate_held_out<P: ConceptPredictor>(
    model: &P,
    embeddings: &LayerEmbeddings,
    rows: &[usize],
    true_cluster: &[usize],
    threshold: f64,
) -> Result<Evaluation> {
    Ok(evaluate_grid(model, embeddings, rows, true_cluster, &[threshold])?.remove(0))
}

/// Like [`evaluate_held_out`] for several thresholds, predicting once.
pub fn evaluate_grid<P: ConceptPredictor>(
    model: &P,
    embeddings: &LayerEmbeddings,
    rows: &[usize],
    true_cluster: &[usize],
    thresholds: &[f64],
) -> Result<Vec<Evaluation>> {
    if rows.is_empty() {
        return Err(Error::Invalid("held-out set is empty".into()));
    }
    if rows.len() != true_cluster.len() {
        return Err(Error::Invalid("rows and labels differ in length".into()));
    }
    if embeddings.dim() != model.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            found: embeddings.dim(),
        });
    }
    let preds: Vec<(usize, f64)> = rows.par_iter().map(|&r| model.predict(embeddings.row(r))).collect();
    Ok(thresholds
        .iter()
        .map(|&raw| {
            let t = raw.clamp(0.0, 1.0);
            let mut covered = 0;
            let mut correct = 0;
            for (&(pred, conf), &truth) in preds.iter().zip(true_cluster) {
                if conf >= t {
                    covered += 1;
                    if pred == truth {
                        correct += 1;
                    }
                }
            }
            Evaluation {
                threshold: t,
                n: rows.len(),
                covered,
                correct,
                coverage: covered as f64 / rows.len() as f64,
                precision: (covered > 0).then(|| correct as f64 / covered as f64),
            }
        })
        .collect())
}
