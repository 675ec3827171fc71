//! Independent reference computations for the integration and acceptance
//! tests. Nothing here calls into the code paths it is used to check.
#![allow(dead_code)]

/// Determinant by Laplace (cofactor) expansion along the first row.
pub fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    match n {
        0 => 1.0,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][j] * cofactor_det(&minor)
            })
            .sum(),
    }
}

/// `B·Bᵀ + shift·I`.
pub fn gram_plus_shift(b: &[Vec<f64>], shift: f64) -> Vec<Vec<f64>> {
    let n = b.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: f64 = b[i].iter().zip(&b[j]).map(|(p, q)| p * q).sum();
                    s + if i == j { shift } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

fn log1pexp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Bernoulli-logit log-likelihood, written from scratch with
/// `log σ(t) = −log(1 + e^{−t})` and the same `1e-12` probability floor.
pub fn log_lik(theta: &[f64], xs: &[Vec<f64>], ys: &[u8]) -> f64 {
    let floor = 1e-12f64.ln();
    xs.iter()
        .zip(ys)
        .map(|(x, &y)| {
            let eta: f64 = theta.iter().zip(x).map(|(a, b)| a * b).sum();
            let t = if y == 1 { eta } else { -eta };
            (-log1pexp(-t)).max(floor).min((1.0 - 1e-12f64).ln())
        })
        .sum()
}

pub fn penalized(theta: &[f64], xs: &[Vec<f64>], ys: &[u8], lambda: f64) -> f64 {
    log_lik(theta, xs, ys) - 0.5 * lambda * theta.iter().map(|t| t * t).sum::<f64>()
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    (0..at.len())
        .map(|j| {
            let mut up = at.to_vec();
            let mut dn = at.to_vec();
            up[j] += h;
            dn[j] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect()
}

/// Central finite-difference Hessian.
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<Vec<f64>> {
    let d = at.len();
    let eval = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut p = at.to_vec();
        p[di] += si * h;
        p[dj] += sj * h;
        f(&p)
    };
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    (eval(i, 1.0, j, 1.0) - eval(i, 1.0, j, -1.0) - eval(i, -1.0, j, 1.0)
                        + eval(i, -1.0, j, -1.0))
                        / (4.0 * h * h)
                })
                .collect()
        })
        .collect()
}

fn log_sum_exp_trapezoid(values: &[f64], step: f64) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = values.len() - 1;
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            w * (v - m).exp()
        })
        .sum();
    m + (s * step).ln()
}

/// `log ∫ p(D|θ) N(θ; 0, λ⁻¹) dθ` for a one-parameter model by the trapezoid
/// rule on `[lo, hi]` with `nodes` points.
pub fn log_marginal_1d(xs: &[Vec<f64>], ys: &[u8], lambda: f64, lo: f64, hi: f64, nodes: usize) -> f64 {
    let step = (hi - lo) / (nodes - 1) as f64;
    let log_norm = 0.5 * (lambda / (2.0 * std::f64::consts::PI)).ln();
    let values: Vec<f64> = (0..nodes)
        .map(|k| {
            let t = lo + step * k as f64;
            log_lik(&[t], xs, ys) - 0.5 * lambda * t * t + log_norm
        })
        .collect();
    log_sum_exp_trapezoid(&values, step)
}

/// Two-parameter version on the square `[lo, hi]²`.
pub fn log_marginal_2d(xs: &[Vec<f64>], ys: &[u8], lambda: f64, lo: f64, hi: f64, nodes: usize) -> f64 {
    let step = (hi - lo) / (nodes - 1) as f64;
    let log_norm = (lambda / (2.0 * std::f64::consts::PI)).ln();
    let inner: Vec<f64> = (0..nodes)
        .map(|a| {
            let t0 = lo + step * a as f64;
            let row: Vec<f64> = (0..nodes)
                .map(|b| {
                    let t1 = lo + step * b as f64;
                    log_lik(&[t0, t1], xs, ys) - 0.5 * lambda * (t0 * t0 + t1 * t1) + log_norm
                })
                .collect();
            log_sum_exp_trapezoid(&row, step)
        })
        .collect();
    log_sum_exp_trapezoid(&inner, step)
}

/// Indices sorted by descending value, ties by ascending index.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    idx
}

/// Number of positions at which two rankings agree.
pub fn positional_agreement(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(p, q)| p == q).count()
}

/// Tiny deterministic generator for test inputs (SplitMix64).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn bernoulli(&mut self, p: f64) -> u8 {
        u8::from(self.uniform() < p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Random logistic data: `n` rows of `d` columns (column 0 the intercept
/// when `intercept`), labels drawn from a random true coefficient vector.
pub fn random_logistic(rng: &mut TestRng, n: usize, d: usize, intercept: bool) -> (Vec<Vec<f64>>, Vec<u8>) {
    let theta: Vec<f64> = (0..d).map(|_| rng.range(-1.5, 1.5)).collect();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..d)
            .map(|j| if intercept && j == 0 { 1.0 } else { rng.normal() })
            .collect();
        let eta: f64 = theta.iter().zip(&x).map(|(a, b)| a * b).sum();
        ys.push(rng.bernoulli(sigmoid(eta)));
        xs.push(x);
    }
    (xs, ys)
}
