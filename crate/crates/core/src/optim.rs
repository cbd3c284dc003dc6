//! Adaptive first-order minimizer (Adam) over flat parameter vectors, shared
//! by landmark fitting and the shape-ambiguity search.

/// Configuration for the iterative minimizers.
#[derive(Debug, Clone)]
pub struct OptimConfig {
    pub max_iters: usize,
    pub learning_rate: f64,
    /// Stop when the best objective improves by less than this relative
    /// amount over a 25-iteration window.
    pub rel_tol: f64,
    /// Seed for randomized initialization (multi-start searches).
    pub seed: u64,
    /// Number of independent restarts (used by the ambiguity search).
    pub restarts: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            max_iters: 2000,
            learning_rate: 0.02,
            rel_tol: 1e-8,
            seed: 0,
            restarts: 5,
        }
    }
}

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub params: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const STALL_WINDOW: usize = 25;

/// Minimizes `objective` with Adam using the supplied gradient. Keeps the
/// best-seen parameters, which also makes the exact optimum a fixed point.
pub fn minimize<F, G>(objective: F, gradient: G, x0: Vec<f64>, cfg: &OptimConfig) -> OptimOutcome
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];

    let mut best = objective(&x);
    let mut best_x = x.clone();
    let mut window_best = best;
    let mut iters = 0;

    for t in 1..=cfg.max_iters {
        iters = t;
        gradient(&x, &mut g);
        let b1t = 1.0 - ADAM_BETA1.powi(t as i32);
        let b2t = 1.0 - ADAM_BETA2.powi(t as i32);
        for i in 0..n {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            let m_hat = m[i] / b1t;
            let v_hat = v[i] / b2t;
            x[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
        let f = objective(&x);
        if f < best {
            best = f;
            best_x.copy_from_slice(&x);
        }
        if t % STALL_WINDOW == 0 {
            let improvement = (window_best - best) / window_best.abs().max(1e-12);
            if improvement < cfg.rel_tol {
                break;
            }
            window_best = best;
        }
    }
    OptimOutcome {
        params: best_x,
        objective: best,
        iterations: iters,
    }
}

/// Central finite-difference gradient with per-parameter step sizes.
pub fn numeric_gradient<F>(f: F, x: &[f64], steps: &[f64], out: &mut [f64])
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = steps[i];
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        out[i] = (fp - fm) / (2.0 * h);
    }
}
