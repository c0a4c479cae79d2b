//! Gauss–Legendre rules on `[-1, 1]`.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let degree = NonZeroUsize::new(n).expect("Gauss-Legendre rule needs at least one node");
    let rule = GaussLegendre::new(degree);
    let mut pairs: Vec<(f64, f64)> = rule.nodes().copied().zip(rule.weights().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
