//! Fixed-order Gauss-Legendre rules and composite integration.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        half * sum
    }

    /// Equal-width composite rule with `segments` panels.
    pub fn integrate_composite<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        segments: usize,
    ) -> f64 {
        let width = (b - a) / segments as f64;
        (0..segments)
            .map(|k| {
                let lo = a + width * k as f64;
                let hi = if k + 1 == segments { b } else { lo + width };
                self.integrate(&f, lo, hi)
            })
            .sum()
    }
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Shared 16-point rule.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=20 {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n = {n}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::new(8);
        for deg in 0..16 {
            let got = rule.integrate(|x| x.powi(deg), 0.0, 1.0);
            let want = 1.0 / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-15, "degree {deg}");
        }
    }

    #[test]
    fn composite_sine() {
        let got = gl16().integrate_composite(f64::sin, 0.0, PI, 7);
        assert!((got - 2.0).abs() < 1e-15);
    }
}
