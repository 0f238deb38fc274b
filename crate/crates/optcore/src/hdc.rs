//! Hyperdimensional encoder and a desk-scale classification harness.
//!
//! The encoder is an N x D random projection executed through the same
//! functional path the array model uses: features are split into 9-wide arm
//! segments, each segment runs [`arm_mac`], and partials meet in
//! [`accumulate`]. The result is exactly the integer matrix-vector product,
//! so the encoder doubles as its own oracle.
//!
//! The optical input path carries non-negative intensities. Signed features
//! are handled by linearity: encode the positive and negative parts in two
//! passes and subtract.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::map_encoder;
use crate::model::OCBGeometry;
use crate::photonics::{accumulate, arm_mac, signed_code_bound};

/// Seeded random projection matrix, row-major N x D.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingMatrix {
    pub n: usize,
    pub d: usize,
    pub values: Vec<i64>,
    pub seed: u64,
    pub value_bits: u32,
}

impl EncodingMatrix {
    pub fn value(&self, row: usize, col: usize) -> i64 {
        self.values[row * self.d + col]
    }
}

/// Entries are bipolar +-1 at 1 bit, otherwise uniform over the symmetric
/// signed code range of `value_bits`. Same arguments, same matrix.
pub fn generate_encoding(n: usize, d: usize, seed: u64, value_bits: u32) -> Result<EncodingMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::Dimension(format!(
            "encoding matrix needs n >= 1 and d >= 1, got {n} x {d}"
        )));
    }
    if value_bits == 0 {
        return Err(Error::InvalidArgument("value_bits must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * d);
    if value_bits == 1 {
        for _ in 0..n * d {
            values.push(if rng.gen_bool(0.5) { 1 } else { -1 });
        }
    } else {
        let bound = signed_code_bound(value_bits);
        let dist = Uniform::new_inclusive(-bound, bound);
        for _ in 0..n * d {
            values.push(dist.sample(&mut rng));
        }
    }
    Ok(EncodingMatrix {
        n,
        d,
        values,
        seed,
        value_bits,
    })
}

/// D raw integer accumulator values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypervector {
    pub values: Vec<i64>,
    pub d: usize,
}

impl Hypervector {
    pub fn new(values: Vec<i64>) -> Self {
        let d = values.len();
        Self { values, d }
    }

    /// Sign-binarized copy (zero maps to +1).
    pub fn binarized(&self) -> Hypervector {
        Hypervector::new(
            self.values
                .iter()
                .map(|&v| if v < 0 { -1 } else { 1 })
                .collect(),
        )
    }
}

fn encode_nonneg(features: &[i64], matrix: &EncodingMatrix, out: &mut [i64]) -> Result<()> {
    let geom = OCBGeometry::default();
    let plan = map_encoder(matrix.n, matrix.d, 0, &geom);
    let segments = plan.accumulation_fanin as usize;
    let weight_bits = matrix.value_bits.max(2);
    let mut arm_weights = [0i64; 16];
    let mut partials = Vec::with_capacity(segments);
    for (col, slot) in out.iter_mut().enumerate() {
        partials.clear();
        for seg in 0..segments {
            let lo = seg * geom.mrs_per_arm;
            let hi = (lo + geom.mrs_per_arm).min(matrix.n);
            for (k, row) in (lo..hi).enumerate() {
                arm_weights[k] = matrix.value(row, col);
            }
            partials.push(arm_mac(
                &arm_weights[..hi - lo],
                &features[lo..hi],
                weight_bits,
                32,
            )?);
        }
        *slot = accumulate(&partials)?;
    }
    Ok(())
}

/// hv[d] = sum_n features[n] * matrix[n][d], computed through the arm path.
pub fn encode(features: &[i64], matrix: &EncodingMatrix) -> Result<Hypervector> {
    if features.len() != matrix.n {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: matrix.n,
        });
    }
    let mut out = vec![0i64; matrix.d];
    if features.iter().all(|&f| f >= 0) {
        encode_nonneg(features, matrix, &mut out)?;
    } else {
        let pos: Vec<i64> = features.iter().map(|&f| f.max(0)).collect();
        let neg: Vec<i64> = features.iter().map(|&f| (-f).max(0)).collect();
        let mut pos_out = vec![0i64; matrix.d];
        let mut neg_out = vec![0i64; matrix.d];
        encode_nonneg(&pos, matrix, &mut pos_out)?;
        encode_nonneg(&neg, matrix, &mut neg_out)?;
        for ((o, p), q) in out.iter_mut().zip(&pos_out).zip(&neg_out) {
            *o = p - q;
        }
    }
    Ok(Hypervector::new(out))
}

/// Plain double-loop reference for `encode`.
pub fn matvec_oracle(features: &[i64], matrix: &EncodingMatrix) -> Result<Vec<i64>> {
    if features.len() != matrix.n {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: matrix.n,
        });
    }
    let mut out = vec![0i64; matrix.d];
    for (row, &f) in features.iter().enumerate() {
        for (col, slot) in out.iter_mut().enumerate() {
            *slot += f * matrix.value(row, col);
        }
    }
    Ok(out)
}

pub fn cosine_similarity(a: &Hypervector, b: &Hypervector) -> Result<f64> {
    if a.d != b.d {
        return Err(Error::LengthMismatch {
            left: a.d,
            right: b.d,
        });
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.values.iter().zip(&b.values) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

fn cosine_f64(a: &[i64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let x = x as f64;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return -1.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Gaussian-cluster classification task standing in for full benchmark
/// datasets at desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTask {
    pub classes: usize,
    pub features: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Within-cluster noise, relative to unit-scale class centroids.
    pub cluster_spread: f64,
}

impl SyntheticTask {
    /// Reference task for the trend suite: hard enough that accuracy keeps
    /// improving with hypervector dimension through D=1024.
    pub fn reference() -> Self {
        Self {
            classes: 16,
            features: 128,
            train_per_class: 30,
            test_per_class: 25,
            cluster_spread: 2.4,
        }
    }

    /// Well-separated two-class task a feature-space nearest-centroid
    /// classifier solves outright.
    pub fn two_class_separable() -> Self {
        Self {
            classes: 2,
            features: 32,
            train_per_class: 40,
            test_per_class: 60,
            cluster_spread: 1.1,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<TaskData> {
        if self.classes < 2 {
            return Err(Error::DegenerateTask(format!(
                "need at least 2 classes, got {}",
                self.classes
            )));
        }
        if self.features == 0 || self.train_per_class == 0 || self.test_per_class == 0 {
            return Err(Error::DegenerateTask(
                "features and per-class sample counts must be positive".into(),
            ));
        }
        if !(self.cluster_spread.is_finite() && self.cluster_spread >= 0.0) {
            return Err(Error::NonFinite("cluster_spread"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centroid_dist = Normal::new(0.0, 1.0).expect("valid normal");
        let noise_dist = Normal::new(0.0, self.cluster_spread).expect("valid normal");
        let centroids: Vec<Vec<f64>> = (0..self.classes)
            .map(|_| (0..self.features).map(|_| centroid_dist.sample(&mut rng)).collect())
            .collect();
        let mut draw = |count: usize, out: &mut Vec<Sample>| {
            for (label, centroid) in centroids.iter().enumerate() {
                for _ in 0..count {
                    let features = centroid
                        .iter()
                        .map(|&c| c + noise_dist.sample(&mut rng))
                        .collect();
                    out.push(Sample { label, features });
                }
            }
        };
        let mut train = Vec::with_capacity(self.classes * self.train_per_class);
        let mut test = Vec::with_capacity(self.classes * self.test_per_class);
        draw(self.train_per_class, &mut train);
        draw(self.test_per_class, &mut test);
        Ok(TaskData {
            classes: self.classes,
            train,
            test,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub label: usize,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TaskData {
    pub classes: usize,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

/// Affine map of raw features onto the unsigned activation code range
/// [0, 2^bits - 1], the same domain the flash quantizer feeds the lasers.
pub fn quantize_features(features: &[f64], bits: u32, lo: f64, hi: f64) -> Vec<i64> {
    let levels = if bits >= 63 {
        u64::MAX as f64
    } else {
        ((1u64 << bits) - 1) as f64
    };
    let span = hi - lo;
    features
        .iter()
        .map(|&f| {
            if span <= 0.0 {
                0
            } else {
                let t = ((f - lo) / span).clamp(0.0, 1.0);
                (t * levels).round() as i64
            }
        })
        .collect()
}

/// Accuracy per (dimension, precision) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracyGrid {
    pub dims: Vec<usize>,
    pub precisions: Vec<u32>,
    /// Row per dim, column per precision.
    pub accuracy: Vec<Vec<f64>>,
    pub seed: u64,
}

impl AccuracyGrid {
    pub fn cell(&self, dim: usize, precision: u32) -> Option<f64> {
        let r = self.dims.iter().position(|&d| d == dim)?;
        let c = self.precisions.iter().position(|&p| p == precision)?;
        Some(self.accuracy[r][c])
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed={}\n", self.seed);
        out.push_str("dim");
        for p in &self.precisions {
            out.push_str(&format!(",precision_{p}"));
        }
        out.push('\n');
        for (row, dim) in self.dims.iter().enumerate() {
            out.push_str(&dim.to_string());
            for acc in &self.accuracy[row] {
                out.push_str(&format!(",{acc:.4}"));
            }
            out.push('\n');
        }
        out
    }
}

const MATRIX_VALUE_BITS: u32 = 4;

fn matrix_seed(seed: u64, dim: usize) -> u64 {
    seed.wrapping_add((dim as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15))
}

/// Runs the task once per (dim, precision) cell: quantize features onto the
/// activation code range, encode train and test sets through the arm path,
/// bundle class centroids, classify by nearest centroid cosine.
pub fn sweep_accuracy(
    task: &SyntheticTask,
    dims: &[usize],
    precisions: &[u32],
    seed: u64,
) -> Result<AccuracyGrid> {
    if dims.is_empty() {
        return Err(Error::Empty("dims"));
    }
    if precisions.is_empty() {
        return Err(Error::Empty("precisions"));
    }
    let data = task.generate(seed)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for sample in data.train.iter().chain(&data.test) {
        for &f in &sample.features {
            lo = lo.min(f);
            hi = hi.max(f);
        }
    }
    let mut accuracy = Vec::with_capacity(dims.len());
    for &dim in dims {
        let matrix = generate_encoding(task.features, dim, matrix_seed(seed, dim), MATRIX_VALUE_BITS)?;
        let mut row = Vec::with_capacity(precisions.len());
        for &bits in precisions {
            row.push(run_cell(&data, &matrix, bits, lo, hi)?);
        }
        accuracy.push(row);
    }
    Ok(AccuracyGrid {
        dims: dims.to_vec(),
        precisions: precisions.to_vec(),
        accuracy,
        seed,
    })
}

fn run_cell(data: &TaskData, matrix: &EncodingMatrix, bits: u32, lo: f64, hi: f64) -> Result<f64> {
    let mut centroids = vec![vec![0.0f64; matrix.d]; data.classes];
    let mut counts = vec![0usize; data.classes];
    for sample in &data.train {
        let q = quantize_features(&sample.features, bits, lo, hi);
        let hv = encode(&q, matrix)?;
        for (acc, &v) in centroids[sample.label].iter_mut().zip(&hv.values) {
            *acc += v as f64;
        }
        counts[sample.label] += 1;
    }
    for (centroid, &count) in centroids.iter_mut().zip(&counts) {
        if count == 0 {
            return Err(Error::DegenerateTask("a class has no training samples".into()));
        }
        for v in centroid.iter_mut() {
            *v /= count as f64;
        }
    }
    let mut correct = 0usize;
    for sample in &data.test {
        let q = quantize_features(&sample.features, bits, lo, hi);
        let hv = encode(&q, matrix)?;
        let mut best = (0usize, f64::NEG_INFINITY);
        for (label, centroid) in centroids.iter().enumerate() {
            let cos = cosine_f64(&hv.values, centroid);
            if cos > best.1 {
                best = (label, cos);
            }
        }
        if best.0 == sample.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.test.len() as f64)
}
