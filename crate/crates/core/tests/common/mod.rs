//! Oracles shared by the integration tests. Nothing here calls into the
//! statistics code it is used to check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two-pass sample mean and unbiased variance.
pub fn two_pass_mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    (m, ss / (n - 1.0))
}

/// Composite Simpson over `[a, b]` with `intervals` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Student-t two-sided tail by quadrature of the density: over `[0, |t|]`
/// for small `|t|`, otherwise over the tail mapped onto `(0, 1]` by
/// `x = |t| / s^2`, which keeps the integrand smooth at `s = 0` for `dof >= 1`.
pub fn t_tail_by_quadrature(t: f64, dof: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    const PANELS: usize = 20_000;
    let ln_norm = ln_gamma((dof + 1.0) / 2.0) - ln_gamma(dof / 2.0) - 0.5 * (dof * std::f64::consts::PI).ln();
    let pdf = |x: f64| (ln_norm - (dof + 1.0) / 2.0 * (1.0 + x * x / dof).ln()).exp();
    let t = t.abs();
    if t <= 5.0 {
        return (1.0 - 2.0 * simpson(pdf, 0.0, t, PANELS)).max(0.0);
    }
    let mapped = |s: f64| {
        if s == 0.0 {
            0.0
        } else {
            2.0 * pdf(t / (s * s)) * t / (s * s * s)
        }
    };
    2.0 * simpson(mapped, 0.0, 1.0, PANELS)
}

pub struct WelchOracle {
    pub t: f64,
    pub dof: f64,
    pub p: f64,
}

/// Textbook Welch statistic, Welch-Satterthwaite dof, quadrature p-value.
pub fn welch_oracle(a: &[f64], b: &[f64]) -> WelchOracle {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, v1) = two_pass_mean_var(a);
    let (m2, v2) = two_pass_mean_var(b);
    let t = (m1 - m2) / (v1 / n1 + v2 / n2).sqrt();
    let dof = (v1 / n1 + v2 / n2).powi(2) / ((v1 / n1).powi(2) / (n1 - 1.0) + (v2 / n2).powi(2) / (n2 - 1.0));
    WelchOracle {
        t,
        dof,
        p: t_tail_by_quadrature(t, dof),
    }
}

/// Random sample pair: sizes 2..=40, independent means and log-uniform spreads.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let draw = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(2..=40);
        let mean = rng.random_range(-1.0..1.0);
        let sd = 10f64.powf(rng.random_range(-2.0..0.5));
        let dist = Normal::new(mean, sd).unwrap();
        (0..n).map(|_| dist.sample(rng)).collect::<Vec<f64>>()
    };
    let a = draw(rng);
    let b = draw(rng);
    (a, b)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

use polarity_core::reactor::{DocVector, LrModel, TrainConfig, Vocabulary};

/// Random 5-doc, 10-token, 3-class instance with non-trivial weights.
pub fn small_instance(seed: u64) -> (LrModel<f64>, Vec<DocVector>, Vec<usize>) {
    let mut rng = rng(seed);
    let vocab = Vocabulary::from_tokens((0..10).map(|i| format!("t{i}")).collect(), 1).unwrap();
    let classes: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let weights = (0..3)
        .map(|_| (0..10).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();
    let bias = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
    let config = TrainConfig {
        l2: 0.01,
        ..TrainConfig::default()
    };
    let model = LrModel::from_parts(classes, vocab, weights, bias, config).unwrap();
    let docs = (0..5)
        .map(|_| {
            let pairs: Vec<(usize, u32)> = (0..10)
                .filter_map(|i| {
                    if rng.random_bool(0.6) {
                        Some((i, rng.random_range(1..4)))
                    } else {
                        None
                    }
                })
                .collect();
            DocVector::from_counts(pairs)
        })
        .collect();
    let labels = vec![0, 1, 2, 0, 1];
    (model, docs, labels)
}

/// Largest relative gap between the analytic gradient and central differences.
pub fn max_fd_relative_error(model: &LrModel<f64>, x: &[DocVector], y: &[usize], h: f64) -> f64 {
    let g = model.loss_and_grad(x, y).unwrap();
    let loss_at = |m: &LrModel<f64>| m.loss_and_grad(x, y).unwrap().loss;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
    let mut worst = 0.0f64;
    for c in 0..model.weights.len() {
        for v in 0..model.weights[c].len() {
            let (mut up, mut down) = (model.clone(), model.clone());
            up.weights[c][v] += h;
            down.weights[c][v] -= h;
            let numeric = (loss_at(&up) - loss_at(&down)) / (2.0 * h);
            worst = worst.max(rel(g.grad_weights[c][v], numeric));
        }
        let (mut up, mut down) = (model.clone(), model.clone());
        up.bias[c] += h;
        down.bias[c] -= h;
        let numeric = (loss_at(&up) - loss_at(&down)) / (2.0 * h);
        worst = worst.max(rel(g.grad_bias[c], numeric));
    }
    worst
}
