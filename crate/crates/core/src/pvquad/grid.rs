use super::gauss::gauss_legendre;
use super::PvError;

/// A composite quadrature rule on `[lower, upper]` with positive nodes.
///
/// The grid is a sequence of panels, each carrying `order` Gauss–Legendre
/// nodes. The panel structure is kept so that principal-value routines can
/// interpolate inside the panel that contains a pole.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    breakpoints: Vec<f64>,
    order: usize,
}

impl FrequencyGrid {
    /// Composite `order`-point Gauss–Legendre rule on the given panels.
    pub fn composite(breakpoints: &[f64], order: usize) -> Result<Self, PvError> {
        if breakpoints.len() < 2 || order == 0 {
            return Err(PvError::InvalidGrid("need at least one panel and one node per panel".into()));
        }
        if breakpoints[0] < 0.0 || breakpoints.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(PvError::InvalidGrid("breakpoints must be nonnegative and strictly increasing".into()));
        }
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity((breakpoints.len() - 1) * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in breakpoints.windows(2) {
            let mid = 0.5 * (p[0] + p[1]);
            let half = 0.5 * (p[1] - p[0]);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        let grid = Self {
            nodes,
            weights,
            breakpoints: breakpoints.to_vec(),
            order,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `panels` equal panels on `[lower, upper]`.
    pub fn uniform(lower: f64, upper: f64, panels: usize, order: usize) -> Result<Self, PvError> {
        if panels == 0 {
            return Err(PvError::InvalidGrid("zero panels".into()));
        }
        let bp: Vec<f64> = (0..=panels)
            .map(|i| lower + (upper - lower) * i as f64 / panels as f64)
            .collect();
        Self::composite(&bp, order)
    }

    /// Geometrically growing panels on `[lower, upper]`, `lower > 0`.
    pub fn log_spaced(lower: f64, upper: f64, panels: usize, order: usize) -> Result<Self, PvError> {
        Self::composite(&log_breakpoints(lower, upper, panels)?, order)
    }

    /// A linear panel on `[0, lower]` followed by log-spaced panels up to
    /// `upper`. This is the default layout for Kramers–Kronig integrals:
    /// narrow peaks and slow tails are resolved together and nothing is lost
    /// near zero frequency.
    pub fn log_from_zero(lower: f64, upper: f64, panels: usize, order: usize) -> Result<Self, PvError> {
        let mut bp = vec![0.0];
        bp.extend(log_breakpoints(lower, upper, panels)?);
        Self::composite(&bp, order)
    }

    /// Reservoir discretization: an `n`-point Gauss–Legendre rule in `u ∈ [0,1]`
    /// mapped to `ω = ω_cut u²`, so `Δω_n = 2 ω_cut u_n w_n`.
    pub fn reservoir(omega_cut: f64, n: usize) -> Result<Self, PvError> {
        if !(omega_cut > 0.0) || n == 0 {
            return Err(PvError::InvalidGrid("reservoir grid needs omega_cut > 0 and n > 0".into()));
        }
        let (x, w) = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (xi, wi) in x.iter().zip(&w) {
            let u = 0.5 * (xi + 1.0);
            nodes.push(omega_cut * u * u);
            weights.push(2.0 * omega_cut * u * 0.5 * wi);
        }
        let grid = Self {
            nodes,
            weights,
            breakpoints: vec![0.0, omega_cut],
            order: n,
        };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<(), PvError> {
        if self.nodes.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(PvError::InvalidGrid("nodes must be positive and finite".into()));
        }
        if self.nodes.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(PvError::InvalidGrid("nodes must be strictly increasing".into()));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(PvError::InvalidGrid("weights must be positive".into()));
        }
        let span = self.upper() - self.lower();
        let total = compensated_sum(&self.weights);
        if ((total - span) / span).abs() > 1e-12 {
            return Err(PvError::InvalidGrid(format!("weights sum {total} != span {span}")));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn upper(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn panel_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Index of the panel containing `x` (closed on the left).
    pub fn panel_of(&self, x: f64) -> Option<usize> {
        if x < self.lower() || x > self.upper() {
            return None;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        Some(idx.saturating_sub(1).min(self.panel_count() - 1))
    }

    pub fn panel_bounds(&self, panel: usize) -> (f64, f64) {
        (self.breakpoints[panel], self.breakpoints[panel + 1])
    }

    /// Nodes belonging to `panel`.
    pub fn panel_nodes(&self, panel: usize) -> std::ops::Range<usize> {
        panel * self.order..(panel + 1) * self.order
    }

    /// Samples `f` at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Plain quadrature `Σ w_n f_n`.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        self.weights.iter().zip(samples).map(|(w, f)| w * f).sum()
    }

    /// Lagrange interpolation (and its derivative) of panel samples at `x`.
    pub(crate) fn interpolate(&self, samples: &[f64], x: f64) -> Option<(f64, f64)> {
        let panel = self.panel_of(x)?;
        let range = self.panel_nodes(panel);
        let xs = &self.nodes[range.clone()];
        let ys = &samples[range];
        Some(lagrange_value_and_derivative(xs, ys, x))
    }
}

/// Neumaier summation; long grids otherwise lose the 1e-12 weight check to
/// plain accumulation error.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

fn log_breakpoints(lower: f64, upper: f64, panels: usize) -> Result<Vec<f64>, PvError> {
    if !(lower > 0.0) || !(upper > lower) || panels == 0 {
        return Err(PvError::InvalidGrid("log grid needs 0 < lower < upper and panels > 0".into()));
    }
    let ratio = (upper / lower).ln() / panels as f64;
    let mut bp: Vec<f64> = (0..=panels).map(|i| lower * (ratio * i as f64).exp()).collect();
    bp[panels] = upper;
    Ok(bp)
}

fn lagrange_value_and_derivative(xs: &[f64], ys: &[f64], x: f64) -> (f64, f64) {
    let n = xs.len();
    let mut value = 0.0;
    let mut deriv = 0.0;
    for j in 0..n {
        let mut lj = 1.0;
        let mut dlj = 0.0;
        for m in 0..n {
            if m == j {
                continue;
            }
            let denom = xs[j] - xs[m];
            // product rule, accumulated incrementally
            dlj = dlj * (x - xs[m]) / denom + lj / denom;
            lj *= (x - xs[m]) / denom;
        }
        value += ys[j] * lj;
        deriv += ys[j] * dlj;
    }
    (value, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_span() {
        let g = FrequencyGrid::log_from_zero(1e-3, 100.0, 300, 3).unwrap();
        assert!(((g.weights().iter().sum::<f64>() - 100.0) / 100.0).abs() < 1e-12);
        let r = FrequencyGrid::reservoir(8.0, 200).unwrap();
        assert!(((r.weights().iter().sum::<f64>() - 8.0) / 8.0).abs() < 1e-12);
        assert!(r.nodes().iter().all(|&w| w > 0.0 && w < 8.0));
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(FrequencyGrid::composite(&[1.0, 1.0, 2.0], 3).is_err());
        assert!(FrequencyGrid::composite(&[1.0], 3).is_err());
        assert!(FrequencyGrid::log_spaced(0.0, 1.0, 10, 3).is_err());
    }

    #[test]
    fn reservoir_integrates_smooth_functions() {
        let g = FrequencyGrid::reservoir(8.0, 64).unwrap();
        let s = g.integrate(&g.sample(|w| (-w).exp()));
        assert!((s - (1.0 - (-8.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_exact_for_quadratics() {
        let g = FrequencyGrid::uniform(0.0, 3.0, 3, 3).unwrap();
        let samples = g.sample(|x| 2.0 * x * x - x + 1.0);
        let (v, d) = g.interpolate(&samples, 1.7).unwrap();
        assert!((v - (2.0 * 1.7 * 1.7 - 1.7 + 1.0)).abs() < 1e-12);
        assert!((d - (4.0 * 1.7 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn panel_lookup() {
        let g = FrequencyGrid::uniform(0.0, 4.0, 4, 3).unwrap();
        assert_eq!(g.panel_of(0.0), Some(0));
        assert_eq!(g.panel_of(2.5), Some(2));
        assert_eq!(g.panel_of(4.0), Some(3));
        assert_eq!(g.panel_of(4.1), None);
    }
}
