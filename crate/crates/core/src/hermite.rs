//! Weber-Hermite functions and Gauss-Hermite quadrature.
//!
//! `omega(m, y)` is the L2-normalized eigenfunction of the frequency-one
//! harmonic oscillator. It is evaluated with the scaled three-term recurrence
//!
//! ```text
//! h_0 = pi^{-1/4} exp(-y^2/2)
//! h_{m+1} = sqrt(2/(m+1)) y h_m - sqrt(m/(m+1)) h_{m-1}
//! ```
//!
//! so the Gaussian factor is carried through the recursion and Hermite
//! polynomials are never formed.

use std::f64::consts::PI;

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg;

/// `pi^{-1/4}`
pub const PI_QUARTER_INV: f64 = 0.751_125_544_464_942_5;

/// Values `Omega_0(y) ..= Omega_max(y)`.
pub fn omega_all(max: usize, y: f64) -> Vec<f64> {
    let mut out = vec![0.0; max + 1];
    omega_into(y, &mut out);
    out
}

/// Fill `out[m] = Omega_m(y)` for `m < out.len()`.
pub fn omega_into(y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI_QUARTER_INV * (-0.5 * y * y).exp();
    if out.len() == 1 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * y * out[0];
    for m in 1..out.len() - 1 {
        let mf = m as f64;
        out[m + 1] = (2.0 / (mf + 1.0)).sqrt() * y * out[m] - (mf / (mf + 1.0)).sqrt() * out[m - 1];
    }
}

pub fn omega(m: usize, y: f64) -> f64 {
    omega_all(m, y)[m]
}

/// `Omega_m'(y) = sqrt(m/2) Omega_{m-1} - sqrt((m+1)/2) Omega_{m+1}`.
pub fn omega_prime(m: usize, y: f64) -> f64 {
    let w = omega_all(m + 1, y);
    let up = ((m as f64 + 1.0) / 2.0).sqrt() * w[m + 1];
    if m == 0 {
        -up
    } else {
        (m as f64 / 2.0).sqrt() * w[m - 1] - up
    }
}

/// Landau eigenfunction `B_c^{1/4} Omega_m(sqrt(B_c) (y - beta (xi + n)))`
/// with `beta = 2 pi / B_c`; `xi_plus_n` is the combined quasimomentum.
pub fn psi(xi_plus_n: f64, m: usize, y: f64, b_c: f64) -> f64 {
    let beta = 2.0 * PI / b_c;
    b_c.powf(0.25) * omega(m, b_c.sqrt() * (y - beta * xi_plus_n))
}

/// Gauss-Hermite rule for the weight `exp(-u^2)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `weights[i] * exp(nodes[i]^2)`: the rule for integrands that already
    /// contain their Gaussian, e.g. `Omega_l * Omega_m * f`.
    pub scaled_weights: Vec<f64>,
}

impl GaussHermite {
    /// `int exp(-u^2) f(u) du`
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `int g(u) du` for `g` carrying its own Gaussian decay.
    pub fn integrate_scaled<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Golub-Welsch nodes, polished by Newton steps on `Omega_n`.
pub fn gauss_hermite_rule(n_nodes: usize) -> Result<GaussHermite> {
    if n_nodes == 0 {
        return Err(Error::InvalidArgument("Gauss-Hermite rule needs n_nodes >= 1".into()));
    }
    let n = n_nodes;
    let jacobi = Mat::<f64>::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let (mut nodes, _) = linalg::eigh_real(&jacobi)?;

    let mut work = vec![0.0; n + 1];
    let sqrt_2n = (2.0 * n as f64).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            omega_into(*x, &mut work);
            let deriv = sqrt_2n * work[n - 1] - *x * work[n];
            if deriv == 0.0 {
                break;
            }
            let step = work[n] / deriv;
            *x -= step;
            if step.abs() < 1e-16 * (1.0 + x.abs()) {
                break;
            }
        }
    }
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut scaled_weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            omega_into(x, &mut work[..n]);
            1.0 / work[..n].iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    for i in 0..n / 2 {
        let w = 0.5 * (scaled_weights[i] + scaled_weights[n - 1 - i]);
        scaled_weights[i] = w;
        scaled_weights[n - 1 - i] = w;
    }
    let weights = nodes
        .iter()
        .zip(&scaled_weights)
        .map(|(&x, &w)| w * (-x * x).exp())
        .collect();
    Ok(GaussHermite {
        nodes,
        weights,
        scaled_weights,
    })
}

/// Default node count for products of two Hermite functions up to
/// `max_order` times a smooth periodic factor.
pub fn default_node_count(max_order: usize) -> usize {
    4 * max_order + 40
}

/// Hermite functions up to `max_order` at magnetic scale `sqrt(B_c)`,
/// together with the quadrature rule used for every matrix element.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    pub max_order: usize,
    pub scale: f64,
    pub rule: GaussHermite,
}

impl HermiteBasis {
    pub fn new(max_order: usize, b_c: f64, n_nodes: Option<usize>) -> Result<Self> {
        if !(b_c > 0.0) {
            return Err(Error::InvalidArgument(format!("B_c must be positive, got {b_c}")));
        }
        let n = n_nodes.unwrap_or_else(|| default_node_count(max_order));
        if n < 2 * max_order + 2 {
            return Err(Error::InvalidArgument(format!(
                "{n} quadrature nodes cannot resolve Hermite products up to order {max_order}"
            )));
        }
        Ok(Self {
            max_order,
            scale: b_c.sqrt(),
            rule: gauss_hermite_rule(n)?,
        })
    }

    pub fn b_c(&self) -> f64 {
        self.scale * self.scale
    }

    /// Orthonormality defect `max |int Omega_l Omega_m - delta_lm|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let vals: Vec<Vec<f64>> = self
            .rule
            .nodes
            .iter()
            .map(|&x| omega_all(self.max_order, x))
            .collect();
        let mut worst = 0.0f64;
        for l in 0..=self.max_order {
            for m in l..=self.max_order {
                let s: f64 = vals
                    .iter()
                    .zip(&self.rule.scaled_weights)
                    .map(|(v, w)| w * v[l] * v[m])
                    .sum();
                let target = if l == m { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ground_state_at_origin() {
        assert!((omega(0, 0.0) - PI.powf(-0.25)).abs() < 1e-15);
        assert!((omega(0, 0.0) - 0.751_125_544_4).abs() < 1e-10);
        assert_eq!(omega(1, 0.0), 0.0);
    }

    #[test]
    fn omega_three_is_normalized() {
        let rule = gauss_hermite_rule(40).unwrap();
        let s = rule.integrate_scaled(|u| omega(3, u).powi(2));
        assert!((s - 1.0).abs() < 1e-13, "{s}");
    }

    #[test]
    fn small_rules_match_closed_forms() {
        let r1 = gauss_hermite_rule(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - PI.sqrt()).abs() < 1e-15);

        let r2 = gauss_hermite_rule(2).unwrap();
        let h = 0.5f64.sqrt();
        assert!((r2.nodes[0] + h).abs() < 1e-15 && (r2.nodes[1] - h).abs() < 1e-15);
        for w in &r2.weights {
            assert!((w - PI.sqrt() / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn three_node_rule_fourth_moment() {
        let r = gauss_hermite_rule(3).unwrap();
        let exact = 3.0 * PI.sqrt() / 4.0;
        let got = r.integrate(|u| u.powi(4));
        assert!(((got - exact) / exact).abs() < 1e-14);
    }

    #[test]
    fn omega_prime_matches_finite_difference() {
        let h = 1e-5;
        let mut worst = 0.0f64;
        for m in 0..=10 {
            for i in 0..=200 {
                let y = -5.0 + 0.05 * i as f64;
                let fd = (omega(m, y + h) - omega(m, y - h)) / (2.0 * h);
                worst = worst.max((fd - omega_prime(m, y)).abs());
            }
        }
        assert!(worst <= 1e-7, "max deviation {worst}");
        let direct = 0.5f64.sqrt() * omega(0, 0.0) - omega(2, 0.0);
        assert!((omega_prime(1, 0.0) - direct).abs() < 1e-15);
        assert_eq!(omega_prime(0, 0.0), 0.0);
    }

    #[test]
    fn psi_solves_shifted_oscillator() {
        let b = 2.0 * PI;
        let xi = 0.3;
        let h = 1e-3;
        assert!((psi(0.0, 0, 0.0, 1.0) - PI.powf(-0.25)).abs() < 1e-15);
        for m in 0..4 {
            let mut worst = 0.0f64;
            for i in 0..=60 {
                let y = -1.5 + 0.05 * i as f64;
                let f = |y: f64| psi(xi, m, y, b);
                let lap = (-f(y + 2.0 * h) + 16.0 * f(y + h) - 30.0 * f(y) + 16.0 * f(y - h)
                    - f(y - 2.0 * h))
                    / (12.0 * h * h);
                let v = 0.5 * (2.0 * PI * xi - b * y).powi(2);
                let res = -0.5 * lap + v * f(y) - b * (0.5 + m as f64) * f(y);
                worst = worst.max(res.abs());
            }
            assert!(worst <= 1e-7, "m={m} residual {worst}");
        }
    }

    #[test]
    fn psi_orthonormal_under_shift_and_scale() {
        let b = 3.7;
        let basis = HermiteBasis::new(5, b, None).unwrap();
        let xi = 0.41;
        let c = 2.0 * PI / b * xi;
        for l in 0..=5 {
            for m in 0..=5 {
                // y = c + u / sqrt(B)
                let s = basis.rule.integrate_scaled(|u| {
                    let y = c + u / basis.scale;
                    psi(xi, l, y, b) * psi(xi, m, y, b) / basis.scale
                });
                let target = if l == m { 1.0 } else { 0.0 };
                assert!((s - target).abs() < 1e-13, "({l},{m}) {s}");
            }
        }
    }

    #[test]
    fn orthonormality_to_order_twenty() {
        let basis = HermiteBasis::new(20, 1.0, None).unwrap();
        assert!(basis.orthonormality_defect() <= 1e-12);
    }

    #[test]
    fn no_overflow_at_high_order() {
        for m in [40, 60] {
            for y in [-12.0, -7.5, 0.3, 12.0] {
                let v = omega(m, y);
                assert!(v.is_finite() && v.abs() < 1.0);
            }
        }
    }

    proptest! {
        #[test]
        fn parity(m in 0usize..=60, y in 0.0f64..12.0) {
            let a = omega(m, y);
            let b = omega(m, -y);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - sign * b).abs() <= 1e-13);
        }

        #[test]
        fn y_recurrence(m in 0usize..=20, y in -8.0f64..8.0) {
            let w = omega_all(m + 1, y);
            let lower = if m == 0 { 0.0 } else { (m as f64 / 2.0).sqrt() * w[m - 1] };
            let rhs = lower + ((m as f64 + 1.0) / 2.0).sqrt() * w[m + 1];
            prop_assert!((y * w[m] - rhs).abs() <= 1e-10);
        }

        #[test]
        fn rule_is_exact_for_polynomials(n in 1usize..30, coeffs in proptest::collection::vec(-1.0f64..1.0, 1..8)) {
            // degree <= 2n - 1
            let deg = (coeffs.len() - 1).min(2 * n - 1);
            let r = gauss_hermite_rule(n).unwrap();
            let got = r.integrate(|u| coeffs[..=deg].iter().enumerate().map(|(k, c)| c * u.powi(k as i32)).sum());
            // int exp(-u^2) u^k = Gamma((k+1)/2) for even k
            let mut exact = 0.0;
            let mut moment = PI.sqrt();
            for (k, c) in coeffs[..=deg].iter().enumerate() {
                if k % 2 == 0 {
                    if k > 0 {
                        moment *= (k as f64 - 1.0) / 2.0;
                    }
                    exact += c * moment;
                }
            }
            prop_assert!((got - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }
    }
}
