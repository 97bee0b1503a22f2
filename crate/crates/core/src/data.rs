//! Datasets: LibSVM text ingestion, column normalization and synthetic
//! instances.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sparse::{CscMatrix, DesignMatrix};

/// A design matrix with responses or labels.
///
/// Column `i` of the effective matrix is `col_scale[i] * (orig_i - col_mean[i])`
/// where `orig_i` is the column as loaded. `matrix` stores the scaled but
/// uncentered values `col_scale[i] * orig_i`; centering is applied implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub matrix: CscMatrix,
    pub labels: Vec<f64>,
    pub col_scale: Vec<f64>,
    pub col_mean: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(matrix: CscMatrix, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != matrix.n_rows() {
            return Err(Error::DimensionMismatch { expected: matrix.n_rows(), got: labels.len() });
        }
        let n = matrix.n_cols();
        Ok(Dataset { matrix, labels, col_scale: vec![1.0; n], col_mean: None })
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    /// Per-column shift of the stored values, `col_scale * col_mean`.
    pub fn col_shift(&self) -> Option<Vec<f64>> {
        self.col_mean
            .as_ref()
            .map(|mean| mean.iter().zip(&self.col_scale).map(|(m, s)| m * s).collect())
    }

    /// The effective design matrix (with implicit centering, if any).
    pub fn design(&self) -> DesignMatrix {
        DesignMatrix::new(self.matrix.clone(), self.col_shift())
            .expect("shift length matches column count")
    }

    /// Scales every column to unit Euclidean norm, optionally centering first.
    ///
    /// Without centering a zero column is an error. With centering, constant
    /// columns become zero; they are kept as zero columns (scale unchanged)
    /// and reported through the log.
    pub fn normalize_columns(&self, center: bool) -> Result<Dataset> {
        let m = self.n_rows() as f64;
        let n = self.n_cols();
        let mut out = self.clone();
        let mut shift = self.col_shift().unwrap_or_else(|| vec![0.0; n]);
        let mut mean = self.col_mean.clone().unwrap_or_else(|| vec![0.0; n]);
        if center {
            for c in 0..n {
                let stored_mean = self.matrix.col_sum(c) / m;
                shift[c] = stored_mean;
                mean[c] = stored_mean / self.col_scale[c];
            }
        }
        let design = DesignMatrix::new(self.matrix.clone(), Some(shift.clone()))?;
        let mut zero = Vec::new();
        for c in 0..n {
            let norm = design.col_norm_sq(c).sqrt();
            if norm == 0.0 || (center && norm <= 1e-14 * self.matrix.col_norm_sq(c).sqrt()) {
                zero.push(c);
                continue;
            }
            let s = 1.0 / norm;
            out.matrix.scale_col(c, s);
            out.col_scale[c] *= s;
            shift[c] *= s;
        }
        if !zero.is_empty() {
            if !center {
                return Err(Error::ZeroColumns(zero));
            }
            log::warn!("columns {zero:?} are constant and vanish after centering");
        }
        let any_mean = center || self.col_mean.is_some();
        out.col_mean = any_mean.then_some(mean);
        Ok(out)
    }

    /// Maps `{0, 1}` labels to `{-1, +1}`; `{-1, +1}` labels pass through.
    pub fn with_binary_labels(&self) -> Result<Dataset> {
        let pm = self.labels.iter().all(|&l| l == 1.0 || l == -1.0);
        if pm {
            return Ok(self.clone());
        }
        let zo = self.labels.iter().all(|&l| l == 1.0 || l == 0.0);
        if !zo {
            return Err(Error::invalid("classification labels must be in {-1, +1} or {0, 1}"));
        }
        let mut out = self.clone();
        out.labels.iter_mut().for_each(|l| *l = if *l == 0.0 { -1.0 } else { 1.0 });
        Ok(out)
    }
}

/// Parses a LibSVM file: one `label idx:val idx:val ...` row per line,
/// 1-based strictly increasing indices.
pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_libsvm_reader(BufReader::new(file), path)
}

pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    parse_libsvm_reader(text.as_bytes(), Path::new("<string>"))
}

pub fn parse_libsvm_reader(reader: impl Read, source: &Path) -> Result<Dataset> {
    let err = |line: usize, msg: String| Error::Parse { path: PathBuf::from(source), line, msg };
    let mut labels = Vec::new();
    let mut triplets = Vec::new();
    let mut n_cols = 0usize;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(lineno, format!("invalid label '{label_tok}'")))?;
        if !label.is_finite() {
            return Err(err(lineno, "non-finite label".into()));
        }
        let row = labels.len();
        let mut prev: Option<usize> = None;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(lineno, format!("expected idx:val, found '{tok}'")))?;
            let idx: usize =
                idx.parse().map_err(|_| err(lineno, format!("invalid index '{idx}'")))?;
            if idx == 0 {
                return Err(err(lineno, "indices are 1-based; found 0".into()));
            }
            let val: f64 =
                val.parse().map_err(|_| err(lineno, format!("invalid value '{val}'")))?;
            if !val.is_finite() {
                return Err(err(lineno, format!("non-finite value at index {idx}")));
            }
            if let Some(p) = prev {
                if idx == p {
                    return Err(err(lineno, format!("duplicate index {idx}")));
                }
                if idx < p {
                    return Err(err(lineno, format!("index {idx} follows {p}: not increasing")));
                }
            }
            prev = Some(idx);
            n_cols = n_cols.max(idx);
            if val != 0.0 {
                triplets.push((row, idx - 1, val));
            }
        }
        labels.push(label);
    }
    let matrix = CscMatrix::from_triplets(labels.len(), n_cols, &triplets)?;
    Dataset::new(matrix, labels)
}

/// Writes the stored matrix (without implicit centering) in LibSVM format.
pub fn write_libsvm(dataset: &Dataset, mut out: impl Write) -> Result<()> {
    let a = &dataset.matrix;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); a.n_rows()];
    for c in 0..a.n_cols() {
        let (ri, vals) = a.col(c);
        for (&r, &v) in ri.iter().zip(vals) {
            rows[r].push((c, v));
        }
    }
    let mut line = String::new();
    for (label, row) in dataset.labels.iter().zip(&rows) {
        line.clear();
        write!(line, "{label}").unwrap();
        for &(c, v) in row {
            write!(line, " {}:{v}", c + 1).unwrap();
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_libsvm_file(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::io::BufWriter::new(File::create(path)?);
    write_libsvm(dataset, file)
}

/// Synthetic sparse regression instance with a planted coefficient vector.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub dataset: Dataset,
    pub planted: Vec<f64>,
}

fn synth_design(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    density: f64,
    correlation: f64,
) -> Result<CscMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("synthetic instances need n >= 1 and m >= 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::invalid(format!("density must lie in (0, 1], got {density}")));
    }
    if !(0.0..1.0).contains(&correlation) {
        return Err(Error::invalid(format!("correlation must lie in [0, 1), got {correlation}")));
    }
    let shared: Vec<f64> = if correlation > 0.0 {
        (0..m).map(|_| rng.sample(StandardNormal)).collect()
    } else {
        Vec::new()
    };
    let (own, common) = ((1.0 - correlation).sqrt(), correlation.sqrt());
    let entry = |rng: &mut ChaCha8Rng, r: usize| -> f64 {
        let g: f64 = rng.sample(StandardNormal);
        if shared.is_empty() {
            g
        } else {
            own * g + common * shared[r]
        }
    };
    let mut triplets = Vec::new();
    for c in 0..n {
        let start = triplets.len();
        for r in 0..m {
            if density >= 1.0 || rng.random::<f64>() < density {
                triplets.push((r, c, entry(rng, r)));
            }
        }
        if triplets.len() == start {
            let r = rng.random_range(0..m);
            triplets.push((r, c, entry(rng, r)));
        }
    }
    CscMatrix::from_triplets(m, n, &triplets)
}

fn planted_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let support = (n / 10).max(1);
    let mut x = vec![0.0; n];
    for idx in rand::seq::index::sample(rng, n, support) {
        x[idx] = rng.sample::<f64, _>(StandardNormal);
    }
    x
}

/// Gaussian nonzeros at the given density (each column has at least one),
/// a planted vector with `max(1, n / 10)` Gaussian nonzeros, and
/// `b = A x_planted + noise * gaussian`. Deterministic in `seed`.
pub fn synth_lasso(
    n: usize,
    m: usize,
    density: f64,
    noise: f64,
    seed: u64,
) -> Result<SyntheticInstance> {
    synth_lasso_correlated(n, m, density, noise, 0.0, seed)
}

/// [`synth_lasso`] with equicorrelated features: every nonzero is
/// `sqrt(1 - rho) g + sqrt(rho) h_r` with `h_r` a Gaussian shared by row `r`.
/// Larger `rho` gives a worse conditioned design; `rho = 0` is
/// [`synth_lasso`].
pub fn synth_lasso_correlated(
    n: usize,
    m: usize,
    density: f64,
    noise: f64,
    correlation: f64,
    seed: u64,
) -> Result<SyntheticInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrix = synth_design(&mut rng, n, m, density, correlation)?;
    let planted = planted_vector(&mut rng, n);
    let mut b = matrix.matvec(&planted);
    for bj in &mut b {
        *bj += noise * rng.sample::<f64, _>(StandardNormal);
    }
    Ok(SyntheticInstance { dataset: Dataset::new(matrix, b)?, planted })
}

/// Classification counterpart of [`synth_lasso`]: labels are
/// `sign(a_j^T x_planted + noise * gaussian)` in `{-1, +1}`.
pub fn synth_logistic(
    n: usize,
    m: usize,
    density: f64,
    noise: f64,
    seed: u64,
) -> Result<SyntheticInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrix = synth_design(&mut rng, n, m, density, 0.0)?;
    let planted = planted_vector(&mut rng, n);
    let scores = matrix.matvec(&planted);
    let labels = scores
        .iter()
        .map(|s| {
            let e: f64 = rng.sample(StandardNormal);
            if s + noise * e >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    Ok(SyntheticInstance { dataset: Dataset::new(matrix, labels)?, planted })
}
