//! Shifted Legendre polynomials and the bias-cancelling extrapolation
//! weights.
//!
//! The orthonormal family is `phi_k(z) = sqrt(2k+1) L_k(2z - 1)` on `[0, 1]`.
//! A window of length `q` is fitted by least squares at the nodes `i/q`,
//! `i = 1..q`, and the fit is read off at `z = 0`; the resulting weight
//! vector `v` reproduces every polynomial of the selected degree exactly and
//! has 2-norm close to `1/sqrt(q)`, which is what makes the window widths in
//! the adaptive rule shrink.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::linalg::{cholesky_solve, qr_diagonal, sym_eigenvalues};

/// Standard Legendre polynomial `L_k(x)` by the three-term recurrence.
pub fn legendre_std(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut curr = x;
            for m in 1..k {
                let next = ((2 * m + 1) as f64 * x * curr - m as f64 * prev) / (m + 1) as f64;
                prev = curr;
                curr = next;
            }
            curr
        }
    }
}

/// Derivative `L_k'(x)` via `L'_{m+1} = L'_{m-1} + (2m+1) L_m`, stable on the
/// whole interval including the endpoints.
pub fn legendre_std_derivative(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let mut dprev = 0.0; // L'_0
    let mut dcurr = 1.0; // L'_1
    let mut lprev = 1.0; // L_0
    let mut lcurr = x; // L_1
    for m in 1..k {
        let dnext = dprev + (2 * m + 1) as f64 * lcurr;
        let lnext = ((2 * m + 1) as f64 * x * lcurr - m as f64 * lprev) / (m + 1) as f64;
        dprev = dcurr;
        dcurr = dnext;
        lprev = lcurr;
        lcurr = lnext;
    }
    dcurr
}

/// Orthonormal shifted Legendre polynomial `phi_k(z)` on `[0, 1]`.
pub fn shifted_legendre(k: usize, z: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&z));
    ((2 * k + 1) as f64).sqrt() * legendre_std(k, 2.0 * z - 1.0)
}

/// Derivative of the shifted polynomial.
pub fn shifted_legendre_derivative(k: usize, z: f64) -> f64 {
    2.0 * ((2 * k + 1) as f64).sqrt() * legendre_std_derivative(k, 2.0 * z - 1.0)
}

/// The `q x (p+1)` node matrix with entries `phi_{j-1}(i/q)` for `i = 1..q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    q: usize,
    p: usize,
    /// Row-major `q * (p+1)` entries.
    entries: Vec<f64>,
}

impl DesignMatrix {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    /// Entry at node row `i` (1-based, `1..=q`) and column `j` (1-based,
    /// `1..=p+1`).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i - 1) * (self.p + 1) + (j - 1)]
    }

    fn row(&self, i: usize) -> &[f64] {
        let w = self.p + 1;
        &self.entries[(i - 1) * w..i * w]
    }

    /// The extrapolation target row `(phi_{j-1}(0))_j`.
    pub fn target_row(&self) -> Vec<f64> {
        (0..=self.p).map(|k| shifted_legendre(k, 0.0)).collect()
    }

    /// The Gram matrix `U^T U`, `(p+1) x (p+1)`.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let w = self.p + 1;
        let mut g = vec![vec![0.0f64; w]; w];
        for i in 1..=self.q {
            let row = self.row(i);
            for a in 0..w {
                for b in a..w {
                    g[a][b] += row[a] * row[b];
                }
            }
        }
        for a in 0..w {
            for b in 0..a {
                g[a][b] = g[b][a];
            }
        }
        g
    }
}

/// Evaluate the design matrix for window `q` and degree `p`.
pub fn design_matrix(q: usize, p: usize) -> DesignMatrix {
    assert!(q >= 1, "window length must be at least 1");
    let w = p + 1;
    let mut entries = Vec::with_capacity(q * w);
    for i in 1..=q {
        let z = i as f64 / q as f64;
        for k in 0..w {
            entries.push(shifted_legendre(k, z));
        }
    }
    DesignMatrix { q, p, entries }
}

/// Eigenvalues of the Gram matrix `U(q, p)^T U(q, p)`, ascending.
pub fn gram_eigenvalues(q: usize, p: usize) -> Vec<f64> {
    sym_eigenvalues(&design_matrix(q, p).gram())
}

/// The maximal degree `p` in `{0, ..., beta_bar - 1}` at which the design
/// matrix keeps full column rank. The all-ones column guarantees degree 0.
///
/// Rank is read off the QR diagonal of the node matrix: the prefix of
/// `p + 1` columns is full rank when every pivot clears the scale-aware
/// floor `1e-9 sqrt(q)`.
pub fn p_of_q(q: usize, beta_bar: usize) -> usize {
    assert!(q >= 1, "window length must be at least 1");
    assert!(beta_bar >= 1, "degree cap must be at least 1");
    let p_max = beta_bar - 1;
    let u = design_matrix(q, p_max);
    let columns: Vec<Vec<f64>> = (1..=p_max + 1)
        .map(|j| (1..=q).map(|i| u.entry(i, j)).collect())
        .collect();
    let diag = qr_diagonal(&columns);
    let floor = 1e-9 * (q as f64).sqrt();
    let mut p = 0usize;
    for (k, r) in diag.iter().enumerate() {
        if r.abs() > floor {
            p = k;
        } else {
            break;
        }
    }
    p
}

/// Least-squares extrapolation weights for one window length.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationWeights {
    q: usize,
    p: usize,
    v: Vec<f64>,
    norm2: f64,
}

impl ExtrapolationWeights {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    /// Weight on the observation `i` steps back, `i = 1..=q`.
    pub fn weight(&self, i: usize) -> f64 {
        self.v[i - 1]
    }

    pub fn weights(&self) -> &[f64] {
        &self.v
    }

    pub fn norm2(&self) -> f64 {
        self.norm2
    }
}

/// Build the weight vector `v_i = U_{0,:} (U^T U)^+ U_{i,:}^T` at the
/// selected degree. Degree selection guarantees the Gram matrix is
/// invertible, so the pseudoinverse is realised by a Cholesky solve.
pub fn extrapolation_weights(q: usize, beta_bar: usize) -> ExtrapolationWeights {
    let p = p_of_q(q, beta_bar);
    let u = design_matrix(q, p);
    let gram = u.gram();
    let target = u.target_row();
    let w = cholesky_solve(&gram, &target)
        .expect("Gram matrix is invertible at the selected degree");
    let mut v = Vec::with_capacity(q);
    for i in 1..=q {
        let row = u.row(i);
        v.push(row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>());
    }
    let norm2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    ExtrapolationWeights { q, p, v, norm2 }
}

/// The deviation width `||v||_2 sqrt(2 ln(pi^2 q^2 / delta))` attached to the
/// windowed estimate.
pub fn variance_term(w: &ExtrapolationWeights, delta: f64) -> f64 {
    debug_assert!(delta > 0.0);
    let q = w.q as f64;
    w.norm2 * (2.0 * (std::f64::consts::PI.powi(2) * q * q / delta).ln()).sqrt()
}

/// Memoised weights keyed by `(q, beta_bar)`; the window scan revisits every
/// length at every time step, so sharing one cache across steps matters.
#[derive(Debug, Default)]
pub struct WeightCache {
    inner: RwLock<HashMap<(usize, usize), Arc<ExtrapolationWeights>>>,
}

impl WeightCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, q: usize, beta_bar: usize) -> Arc<ExtrapolationWeights> {
        if let Some(hit) = self.inner.read().expect("cache lock").get(&(q, beta_bar)) {
            return Arc::clone(hit);
        }
        let fresh = Arc::new(extrapolation_weights(q, beta_bar));
        let mut guard = self.inner.write().expect("cache lock");
        Arc::clone(guard.entry((q, beta_bar)).or_insert(fresh))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// polynomial roots. Used by the orthonormality checks.
pub fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let f = legendre_std(n, x);
            let df = legendre_std_derivative(n, x);
            let step = f / df;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let df = legendre_std_derivative(n, x);
        out.push((x, 2.0 / ((1.0 - x * x) * df * df)));
    }
    out
}
