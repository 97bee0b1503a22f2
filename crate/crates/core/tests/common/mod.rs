//! Dense reference implementations used as independent oracles. Nothing
//! here touches the solver's cached products or sparse kernels.
#![allow(dead_code)]

use restarted_approx::engine::Sampler;

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Dense { rows, cols, data }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.data[r * self.cols + c] * x[c]).sum())
            .collect()
    }

    pub fn tmul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c] += self.data[r * self.cols + c] * y[r];
            }
        }
        out
    }

    pub fn col_norm_sq(&self, c: usize) -> f64 {
        (0..self.rows).map(|r| self.data[r * self.cols + c].powi(2)).sum()
    }

    /// Largest eigenvalue of `A^T A` by power iteration.
    pub fn gram_norm(&self) -> f64 {
        let mut x = vec![1.0; self.cols];
        let mut lam = 0.0;
        for _ in 0..2000 {
            let y = self.tmul(&self.mul(&x));
            let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 {
                return 0.0;
            }
            lam = nrm / x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = y.iter().map(|v| v / nrm).collect();
        }
        lam
    }
}

/// Smooth part with a dense gradient.
pub trait Smooth {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> Vec<f64>;
}

pub struct DenseLasso {
    pub a: Dense,
    pub b: Vec<f64>,
}

impl Smooth for DenseLasso {
    fn dim(&self) -> usize {
        self.a.cols
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = self.a.mul(x);
        0.5 * r.iter().zip(&self.b).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = self.a.mul(x).iter().zip(&self.b).map(|(a, b)| a - b).collect();
        self.a.tmul(&r)
    }
}

pub struct DenseLogistic {
    pub a: Dense,
    pub b: Vec<f64>,
    pub c: f64,
}

impl Smooth for DenseLogistic {
    fn dim(&self) -> usize {
        self.a.cols
    }

    fn value(&self, x: &[f64]) -> f64 {
        let t = self.a.mul(x);
        self.c * t.iter().zip(&self.b).map(|(t, b)| (1.0 + (b * t).exp()).ln()).sum::<f64>()
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let t = self.a.mul(x);
        let w: Vec<f64> =
            t.iter().zip(&self.b).map(|(t, b)| self.c * b / (1.0 + (-b * t).exp())).collect();
        self.a.tmul(&w)
    }
}

pub struct DenseQuadratic {
    pub q: Dense,
    pub center: Vec<f64>,
}

impl Smooth for DenseQuadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        0.5 * d.iter().zip(self.q.mul(&d)).map(|(a, b)| a * b).sum::<f64>()
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.q.mul(&d)
    }
}

pub fn soft(u: f64, t: f64) -> f64 {
    u.signum() * (u.abs() - t).max(0.0)
}

pub fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Plain APPROX written out literally: `y = (1 - theta) x + theta z`, coordinate
/// prox steps on `z`, `x+ = y + (n / tau) theta (z+ - z)`, and the theta update
/// in its printed form. Returns `x_1, ..., x_K`.
pub fn naive_approx(
    f: &dyn Smooth,
    lambda: f64,
    v: &[f64],
    tau: usize,
    x0: &[f64],
    iterations: usize,
    sampler: &mut Sampler,
) -> Vec<Vec<f64>> {
    let n = f.dim();
    let nf = n as f64;
    let tf = tau as f64;
    let mut theta = tf / nf;
    let mut x = x0.to_vec();
    let mut z = x0.to_vec();
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let y: Vec<f64> = (0..n).map(|i| (1.0 - theta) * x[i] + theta * z[i]).collect();
        let g = f.grad(&y);
        let mut z_new = z.clone();
        for &i in sampler.next_subset() {
            let w = theta * nf * v[i] / tf;
            z_new[i] = soft(z[i] - g[i] / w, lambda / w);
        }
        x = (0..n).map(|i| y[i] + nf / tf * theta * (z_new[i] - z[i])).collect();
        z = z_new;
        theta = ((theta.powi(4) + 4.0 * theta * theta).sqrt() - theta * theta) / 2.0;
        out.push(x.clone());
    }
    out
}

/// Tseng's accelerated proximal gradient with coordinate-wise step sizes `v`.
pub fn apg(f: &dyn Smooth, lambda: f64, v: &[f64], x0: &[f64], iterations: usize) -> Vec<Vec<f64>> {
    let n = f.dim();
    let mut theta = 1.0f64;
    let mut x = x0.to_vec();
    let mut z = x0.to_vec();
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let y: Vec<f64> = (0..n).map(|i| (1.0 - theta) * x[i] + theta * z[i]).collect();
        let g = f.grad(&y);
        for i in 0..n {
            z[i] = soft(z[i] - g[i] / (theta * v[i]), lambda / (theta * v[i]));
        }
        for i in 0..n {
            x[i] = (1.0 - theta) * x[i] + theta * z[i];
        }
        theta = ((theta.powi(4) + 4.0 * theta * theta).sqrt() - theta * theta) / 2.0;
        out.push(x.clone());
    }
    out
}

/// Proximal gradient with step `1 / lipschitz`; returns the final point and
/// the best objective value seen.
pub fn prox_gradient(
    f: &dyn Smooth,
    lambda: f64,
    lipschitz: f64,
    x0: &[f64],
    iterations: usize,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut best = f.value(&x) + lambda * l1(&x);
    for _ in 0..iterations {
        let g = f.grad(&x);
        for i in 0..x.len() {
            x[i] = soft(x[i] - g[i] / lipschitz, lambda / lipschitz);
        }
        best = best.min(f.value(&x) + lambda * l1(&x));
    }
    (x, best)
}

pub fn max_rel_dev(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}
