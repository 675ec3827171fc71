//! Seeded synthetic data, labeled/unlabeled/test splitting and CSV I/O.
//!
//! All randomness comes from [`SeededRng`]: xoshiro256++ seeded through
//! SplitMix64 (the reference `seed_from_u64` expansion), with uniforms taken
//! from the top 53 bits of each output and normals from the cosine branch of
//! Box–Muller. Each of these steps is a published algorithm, so streams can
//! be reproduced outside Rust.
//!
//! Generation consumes, for every row in order, `d_features` normals followed
//! by one uniform that decides the label (`y = 1` iff `u < σ(θ*ᵀx)`).

use std::io::{Read, Write};
use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::glm::{Label, LabeledSet, UnlabeledPool};
use crate::scalar::Scalar;

/// Deterministic generator shared by generation and splitting.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Xoshiro256PlusPlus,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller; consumes two uniforms.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform index in `0..bound` (`bound ≥ 1`).
    pub fn index(&mut self, bound: usize) -> usize {
        ((self.uniform() * bound as f64) as usize).min(bound - 1)
    }

    /// Fisher–Yates shuffle of `0..n`, swapping from the back.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.index(i + 1);
            perm.swap(i, j);
        }
        perm
    }
}

/// Intercept-led feature rows with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Vec<T>,
    y: Vec<Label>,
    d: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(rows: Vec<Vec<T>>, y: Vec<Label>) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: y.len(),
            });
        }
        let d = rows.first().map_or(1, Vec::len);
        let mut x = Vec::with_capacity(rows.len() * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            if row[0] != T::one() {
                return Err(Error::InvalidData("rows must start with the intercept 1".into()));
            }
            x.extend_from_slice(row);
        }
        if let Some(bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidData(format!("label {bad} is not binary")));
        }
        Ok(Self { x, y, d })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Row width including the intercept.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.x.chunks(self.d)
    }

    pub fn labels(&self) -> &[Label] {
        &self.y
    }

    pub fn label_mean(&self) -> f64 {
        self.y.iter().map(|&l| l as f64).sum::<f64>() / self.n().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n: usize,
    /// Non-intercept feature count.
    pub d_features: usize,
    /// True coefficients, intercept first.
    pub theta_star: Vec<f64>,
    pub feature_scale: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d_features == 0 {
            return Err(Error::InvalidSpec("n and d_features must be positive".into()));
        }
        if self.theta_star.len() != self.d_features + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.d_features + 1,
                found: self.theta_star.len(),
            });
        }
        if self.theta_star.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSpec("theta_star must be finite".into()));
        }
        if !(self.feature_scale > 0.0 && self.feature_scale.is_finite()) {
            return Err(Error::InvalidSpec("feature_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Draws `spec.n` rows `(1, z₁ … z_d)` and Bernoulli labels from the logistic
/// model with coefficients `theta_star`.
pub fn generate<T: Scalar>(spec: &SyntheticSpec) -> Result<Dataset<T>> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let d = spec.d_features + 1;
    let mut x = Vec::with_capacity(spec.n * d);
    let mut y = Vec::with_capacity(spec.n);
    let mut row = vec![1.0f64; d];
    for _ in 0..spec.n {
        for z in row.iter_mut().skip(1) {
            *z = rng.normal() * spec.feature_scale;
        }
        let eta: f64 = row.iter().zip(&spec.theta_star).map(|(a, b)| a * b).sum();
        let p = 1.0 / (1.0 + (-eta).exp());
        y.push(u8::from(rng.uniform() < p));
        x.extend(row.iter().map(|&v| T::lit(v)));
    }
    Ok(Dataset { x, y, d })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub n_labeled: usize,
    /// May be zero (no self-training happens).
    pub n_unlabeled: usize,
    pub n_test: usize,
    pub seed: u64,
    /// Balance the two classes in the labeled split.
    pub stratified: bool,
}

impl SplitSpec {
    pub fn total(&self) -> usize {
        self.n_labeled + self.n_unlabeled + self.n_test
    }

    /// Non-fatal remarks about the split for a model of width `d`.
    pub fn warnings(&self, d: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_labeled < d {
            out.push(format!(
                "{} labeled rows for {} coefficients: the supervised fit relies on the prior",
                self.n_labeled, d
            ));
        }
        out
    }
}

/// Labeled, unlabeled and test partitions of a [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub labeled: LabeledSet<T>,
    pub unlabeled: UnlabeledPool<T>,
    pub test: LabeledSet<T>,
    /// True labels of the unlabeled rows, for evaluation only.
    pub unlabeled_truth: Vec<Label>,
    /// Source-row indices of each partition.
    pub labeled_rows: Vec<usize>,
    pub unlabeled_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl<T: Scalar> Split<T> {
    /// FNV-1a hash over every value of the three partitions, in order.
    pub fn checksum(&self) -> u64 {
        let mut h = Fnv1a::new();
        for (rows, labels) in [
            (self.labeled.rows().collect::<Vec<_>>(), self.labeled.labels()),
            (self.unlabeled.rows().collect::<Vec<_>>(), &self.unlabeled_truth[..]),
            (self.test.rows().collect::<Vec<_>>(), self.test.labels()),
        ] {
            h.write(&(rows.len() as u64).to_le_bytes());
            for (row, &label) in rows.iter().zip(labels) {
                for v in row.iter() {
                    h.write(&v.as_f64().to_bits().to_le_bytes());
                }
                h.write(&[label]);
            }
        }
        h.finish()
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Seeded permutation followed by contiguous assignment to labeled, unlabeled
/// and test. With `stratified` the labeled rows are taken in permutation
/// order subject to a per-class quota of half the labeled size (class 0 gets
/// the odd row); if a class runs short the other fills the gap.
pub fn split<T: Scalar>(data: &Dataset<T>, spec: &SplitSpec) -> Result<Split<T>> {
    if spec.total() > data.n() {
        return Err(Error::SizeOverflow {
            requested: spec.total(),
            available: data.n(),
        });
    }
    if spec.n_labeled == 0 || spec.n_test == 0 {
        return Err(Error::InvalidSpec("labeled and test splits must be non-empty".into()));
    }
    let perm = SeededRng::new(spec.seed).permutation(data.n());

    let mut taken = vec![false; data.n()];
    let mut labeled_rows = Vec::with_capacity(spec.n_labeled);
    if spec.stratified {
        let quota_one = spec.n_labeled / 2;
        let mut quota = [spec.n_labeled - quota_one, quota_one];
        for &i in &perm {
            let class = data.y[i] as usize;
            if quota[class] > 0 {
                quota[class] -= 1;
                taken[i] = true;
                labeled_rows.push(i);
                if labeled_rows.len() == spec.n_labeled {
                    break;
                }
            }
        }
    }
    for &i in &perm {
        if labeled_rows.len() == spec.n_labeled {
            break;
        }
        if !taken[i] {
            taken[i] = true;
            labeled_rows.push(i);
        }
    }
    let rest: Vec<usize> = perm.iter().copied().filter(|&i| !taken[i]).collect();
    let unlabeled_rows = rest[..spec.n_unlabeled].to_vec();
    let test_rows = rest[spec.n_unlabeled..spec.n_unlabeled + spec.n_test].to_vec();

    let gather = |idx: &[usize]| -> (Vec<Vec<T>>, Vec<Label>) {
        (
            idx.iter().map(|&i| data.row(i).to_vec()).collect(),
            idx.iter().map(|&i| data.y[i]).collect(),
        )
    };
    let (lx, ly) = gather(&labeled_rows);
    let (ux, uy) = gather(&unlabeled_rows);
    let (tx, ty) = gather(&test_rows);
    Ok(Split {
        labeled: LabeledSet::new(lx, ly)?,
        unlabeled: UnlabeledPool::new(ux, data.d())?,
        test: LabeledSet::new(tx, ty)?,
        unlabeled_truth: uy,
        labeled_rows,
        unlabeled_rows,
        test_rows,
    })
}

/// Reads a headed CSV file. Every column except `label_column` must be
/// numeric; the intercept column is prepended. Labels equal to
/// `positive_label` map to 1, everything else to 0. Row numbers in errors are
/// file line numbers (the header is line 1).
pub fn load_csv<T: Scalar>(
    path: impl AsRef<Path>,
    label_column: &str,
    positive_label: &str,
) -> Result<Dataset<T>> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, label_column, positive_label)
}

pub fn read_csv<T: Scalar, R: Read>(reader: R, label_column: &str, positive_label: &str) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect::<Vec<_>>();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::UnknownColumn(label_column.to_string()))?;
    let d = headers.len();

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| csv_error(e, line))?;
        x.push(T::one());
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row: line,
                    column: headers[c].clone(),
                });
            }
            if c == label_idx {
                y.push(u8::from(cell == positive_label));
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: line,
                    column: headers[c].clone(),
                    message: format!("{cell:?} is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: line,
                        column: headers[c].clone(),
                        message: format!("{cell:?} is not finite"),
                    });
                }
                x.push(T::lit(v));
            }
        }
    }
    Ok(Dataset { x, y, d })
}

fn csv_error(err: csv::Error, fallback_line: usize) -> Error {
    let row = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    Error::Parse {
        row,
        column: String::new(),
        message: err.to_string(),
    }
}

/// Writes `data` as CSV with feature columns `x1 … x{d-1}` followed by the
/// label column (`1`/`0`). The intercept is not written.
pub fn write_csv<T: Scalar, W: Write>(data: &Dataset<T>, label_column: &str, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..data.d()).map(|j| format!("x{j}")).collect();
    header.push(label_column.to_string());
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for (row, &label) in data.rows().zip(data.labels()) {
        let mut rec: Vec<String> = row[1..].iter().map(|v| format!("{}", v.as_f64())).collect();
        rec.push(label.to_string());
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
