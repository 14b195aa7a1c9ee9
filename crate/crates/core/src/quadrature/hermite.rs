use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Hermite rule for the probability measure `exp(-x^2) dx / sqrt(pi)`.
///
/// Returns `(nodes, weights)` in increasing node order; weights sum to one.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Hermite order must be positive");
    if order == 1 {
        return (vec![0.0], vec![1.0]);
    }
    // Golub-Welsch guesses, polished by Newton on the orthonormal recurrence.
    let jacobi = DMatrix::from_fn(order, order, |i, j| {
        if i + 1 == j || j + 1 == i {
            ((i.max(j)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    guesses.sort_by(f64::total_cmp);

    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for x0 in guesses {
        let mut x = x0;
        for _ in 0..20 {
            let (h_q, h_qm1, _) = orthonormal_hermite(order, x);
            let step = h_q / ((2.0 * order as f64).sqrt() * h_qm1);
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, _, weight) = orthonormal_hermite(order, x);
        nodes.push(x);
        weights.push(weight);
    }
    symmetrize(&mut nodes, &mut weights);
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (nodes, weights)
}

// Returns (h_Q(x), h_{Q-1}(x), 1 / sum_{k<Q} h_k(x)^2), with a running rescale
// so that large nodes neither overflow nor lose the ratio h_Q / h_{Q-1}.
fn orthonormal_hermite(order: usize, x: f64) -> (f64, f64, f64) {
    const BIG: f64 = 1e150;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for k in 0..order {
        let next = if k == 0 {
            std::f64::consts::SQRT_2 * x
        } else {
            (2.0 / (k + 1) as f64).sqrt() * x * cur - (k as f64 / (k + 1) as f64).sqrt() * prev
        };
        prev = cur;
        cur = next;
        if k + 1 < order {
            sum += cur * cur;
        }
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            sum /= BIG * BIG;
            log_scale += 2.0 * BIG.ln();
        }
    }
    let weight = (-(sum.ln() + log_scale)).exp();
    (cur, prev, weight)
}

// The rule is symmetric about zero; enforce it exactly.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let q = nodes.len();
    for i in 0..q / 2 {
        let j = q - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
}
