//! One-dimensional quadrature rules used by the integrators.

use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().cloned().zip(self.weights.iter().cloned())
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

fn nz(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).unwrap()
}

/// Gauss-Legendre on `[-1, 1]`.
pub fn legendre(n: usize) -> Rule {
    let (nodes, weights) = GaussLegendre::new(nz(n)).as_node_weight_pairs().iter().cloned().unzip();
    Rule { nodes, weights }
}

/// Gauss-Hermite for the weight `e^{-x^2}` on the real line.
pub fn hermite(n: usize) -> Rule {
    let (nodes, weights) = GaussHermite::new(nz(n)).as_node_weight_pairs().iter().cloned().unzip();
    Rule { nodes, weights }
}

/// `panels` equal Gauss-Legendre panels of `per_panel` nodes on `[a, b]`.
pub fn composite_legendre(a: f64, b: f64, panels: usize, per_panel: usize) -> Rule {
    let base = legendre(per_panel);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * base.len());
    let mut weights = Vec::with_capacity(panels * base.len());
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, w) in base.iter() {
            nodes.push(lo + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    Rule { nodes, weights }
}

/// Composite rule on `[a, b]` with at least `min_nodes` nodes and at least `per_period` nodes per
/// period of an oscillation of angular frequency `max_freq`.
pub fn oscillatory_legendre(a: f64, b: f64, max_freq: f64, per_period: f64, min_nodes: usize, per_panel: usize) -> Rule {
    let periods = (b - a) * max_freq.abs() / std::f64::consts::TAU;
    let wanted = (per_period * periods).ceil().max(min_nodes as f64) as usize;
    composite_legendre(a, b, wanted.div_ceil(per_panel), per_panel)
}
