//! Gauss–Legendre and Gauss–Lobatto rules on `[-1, 1]`.

use std::f64::consts::PI;

/// Returns `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// `n`-point Gauss–Legendre nodes (ascending) and weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        let mut x = -(PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(n, x);
            let dx = p / (nf * (x * p - pm1) / (x * x - 1.0));
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, pm1) = legendre_pair(n, x);
        let dp = nf * (x * p - pm1) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `n`-point Gauss–Lobatto nodes (ascending, including ±1) and weights.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Lobatto rule needs at least two points");
    let p = n - 1;
    let pf = p as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    // interior nodes are the roots of P'_p
    for (i, node) in nodes.iter_mut().enumerate().take(p).skip(1) {
        let mut x = -(PI * i as f64 / pf).cos();
        for _ in 0..100 {
            let (pp, pm1) = legendre_pair(p, x);
            let d1 = pf * (x * pp - pm1) / (x * x - 1.0);
            // (1 - x²) P'' = 2x P' - p(p+1) P
            let d2 = (2.0 * x * d1 - pf * (pf + 1.0) * pp) / (1.0 - x * x);
            let dx = d1 / d2;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        *node = x;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (pp, _) = legendre_pair(p, x);
            2.0 / (pf * (pf + 1.0) * pp * pp)
        })
        .collect();
    (nodes, weights)
}
