//! Radial grids with quadrature for the planar measure 2πr dr.

use serde::{Deserialize, Serialize};

/// Ordered radial nodes r_0 = 0 < r_1 < ... < r_n together with weights
/// so that `integrate` approximates ∫₀^{r_end} f(r) 2πr dr.
///
/// The weights come from the trapezoidal rule applied to 2πr·f(r); the
/// integrand is linear in r for f ≡ 1, so constants are integrated
/// exactly (π r_end²) on any node distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Builds a grid from strictly increasing nodes starting at exactly 0.
    ///
    /// Panics on unordered input; grids are constructed by the library
    /// itself, so a violation is a programming error.
    pub fn from_nodes(nodes: Vec<f64>) -> Self {
        assert!(nodes.len() >= 2, "need at least two nodes");
        assert_eq!(nodes[0], 0.0, "first node must be exactly 0");
        for i in 1..nodes.len() {
            assert!(nodes[i] > nodes[i - 1], "nodes must be strictly increasing");
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let dr = nodes[i + 1] - nodes[i];
            weights[i] += std::f64::consts::PI * dr * nodes[i];
            weights[i + 1] += std::f64::consts::PI * dr * nodes[i + 1];
        }
        Self { nodes, weights }
    }

    /// Uniform grid on [0, r_end] with n+1 nodes.
    pub fn uniform(r_end: f64, n: usize) -> Self {
        let nodes = (0..=n).map(|i| r_end * i as f64 / n as f64).collect();
        Self::from_nodes(nodes)
    }

    /// Grid with node 0 followed by a geometric progression from r_inner
    /// to r_end (n_log intervals). Used for solutions whose features live
    /// on exponentially small scales near the origin.
    pub fn log_graded(r_inner: f64, r_end: f64, n_log: usize) -> Self {
        assert!(r_inner > 0.0 && r_inner < r_end);
        let l0 = r_inner.ln();
        let l1 = r_end.ln();
        let mut nodes = Vec::with_capacity(n_log + 2);
        nodes.push(0.0);
        for i in 0..=n_log {
            nodes.push((l0 + (l1 - l0) * i as f64 / n_log as f64).exp());
        }
        // guard against roundoff at the right endpoint
        let last = nodes.len() - 1;
        nodes[last] = r_end;
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// ∫ f 2πr dr from node samples.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        assert_eq!(samples.len(), self.nodes.len());
        self.weights
            .iter()
            .zip(samples)
            .map(|(w, f)| w * f)
            .sum()
    }

    /// L² norm under the 2πr dr measure.
    pub fn l2_norm(&self, samples: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(samples)
            .map(|(w, f)| w * f * f)
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_exact_on_uniform() {
        let g = RadialGrid::uniform(2.5, 200);
        let ones = vec![1.0; g.len()];
        let exact = std::f64::consts::PI * 2.5 * 2.5;
        assert!((g.integrate(&ones) - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn constant_exact_on_log_grid() {
        let g = RadialGrid::log_graded(1e-200, 1.0, 4000);
        let ones = vec![1.0; g.len()];
        let exact = std::f64::consts::PI;
        assert!((g.integrate(&ones) - exact).abs() / exact < 1e-12);
    }

    proptest! {
        // quadrature of f == 1 returns pi r_end^2 on arbitrary node sets
        #[test]
        fn constant_exact_on_random_grids(mut incr in prop::collection::vec(1e-6f64..1.0, 3..60)) {
            let mut nodes = vec![0.0];
            let mut acc = 0.0;
            for d in incr.drain(..) {
                acc += d;
                nodes.push(acc);
            }
            let g = RadialGrid::from_nodes(nodes);
            let ones = vec![1.0; g.len()];
            let exact = std::f64::consts::PI * g.r_end() * g.r_end();
            prop_assert!((g.integrate(&ones) - exact).abs() / exact < 1e-12);
        }
    }
}
