use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|t| half * t).collect(),
    )
}

/// Trapezoid weights for an ascending, possibly non-uniform abscissa.
pub fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let d = 0.5 * (t[i + 1] - t[i]);
        w[i] += d;
        w[i + 1] += d;
    }
    w
}

/// Lagrange interpolation weights at `x` for the given nodes.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(1.0, |acc, (_, &xj)| acc * (x - xj) / (xi - xj))
        })
        .collect()
}
