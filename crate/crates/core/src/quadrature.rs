//! Cumulative time integration of sampled series.

/// Running integral `∫_{t_0}^{t_i} f` of samples on a (possibly non-uniform)
/// increasing time grid. Each interval is integrated exactly against the cubic
/// through the four nearest samples, so smooth series are integrated to fourth
/// order; with fewer than four samples the rule drops to trapezoid/quadratic.
pub fn cumulative(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len(), "times and values differ in length");
    let n = times.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let stencil = n.min(4);
    for i in 0..n - 1 {
        // stencil start, centred on [t_i, t_{i+1}] where possible
        let start = i.saturating_sub(1).min(n - stencil);
        let nodes = &times[start..start + stencil];
        let vals = &values[start..start + stencil];
        out[i + 1] = out[i] + integrate_interpolant(nodes, vals, times[i], times[i + 1]);
    }
    out
}

/// Total integral, `cumulative(..).last()`.
pub fn integral(times: &[f64], values: &[f64]) -> f64 {
    cumulative(times, values).last().copied().unwrap_or(0.0)
}

/// `∫_a^b p` for the Lagrange interpolant `p` through `(nodes, vals)`, using
/// Gauss–Legendre with enough points to be exact for degree ≤ 3.
fn integrate_interpolant(nodes: &[f64], vals: &[f64], a: f64, b: f64) -> f64 {
    const GAUSS: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS
        .iter()
        .map(|&(x, w)| w * lagrange(nodes, vals, mid + half * x))
        .sum::<f64>()
        * half
}

fn lagrange(nodes: &[f64], vals: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (j, (&tj, &vj)) in nodes.iter().zip(vals).enumerate() {
        let mut basis = 1.0;
        for (m, &tm) in nodes.iter().enumerate() {
            if m != j {
                basis *= (t - tm) / (tj - tm);
            }
        }
        acc += vj * basis;
    }
    acc
}
