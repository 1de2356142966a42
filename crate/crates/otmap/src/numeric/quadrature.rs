//! Adaptive Gauss-Legendre quadrature in one dimension plus a tensor-grid
//! rule for integrating over boxes in small dimension.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre polynomial.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` by bisecting
/// panels until a 20-point rule agrees with its two-half refinement.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(20);
    let f_ref: &dyn Fn(f64) -> f64 = &f;
    adaptive(f_ref, a, b, tol, &nodes, &weights, 0)
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    nodes: &[f64],
    weights: &[f64],
    depth: usize,
) -> f64 {
    let whole = panel(f, a, b, nodes, weights);
    let mid = 0.5 * (a + b);
    let halves = panel(f, a, mid, nodes, weights) + panel(f, mid, b, nodes, weights);
    if (whole - halves).abs() <= tol || depth >= 24 {
        halves
    } else {
        adaptive(f, a, mid, 0.5 * tol, nodes, weights, depth + 1)
            + adaptive(f, mid, b, 0.5 * tol, nodes, weights, depth + 1)
    }
}

/// Tensor Gauss-Legendre integration of `f` over the box `[lo, hi]`,
/// splitting each axis into `panels` panels with 10 nodes each. Cost grows
/// as `(10 * panels)^d`; intended for d <= 3.
pub fn integrate_box(
    f: impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    panels: usize,
) -> f64 {
    assert_eq!(lo.len(), hi.len());
    let d = lo.len();
    let (nodes, weights) = gauss_legendre(10);
    // Per-axis node/weight lists over all panels.
    let mut axis_nodes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut v = Vec::with_capacity(panels * nodes.len());
        let width = (hi[k] - lo[k]) / panels as f64;
        for p in 0..panels {
            let a = lo[k] + p as f64 * width;
            let mid = a + 0.5 * width;
            for (x, w) in nodes.iter().zip(&weights) {
                v.push((mid + 0.5 * width * x, 0.5 * width * w));
            }
        }
        axis_nodes.push(v);
    }
    let mut total = 0.0;
    let counts: Vec<usize> = axis_nodes.iter().map(|v| v.len()).collect();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for k in 0..d {
            let (x, wk) = axis_nodes[k][idx[k]];
            point[k] = x;
            w *= wk;
        }
        total += w * f(&point);
        // odometer increment
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return total;
            }
        }
    }
}
