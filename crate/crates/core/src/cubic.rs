//! Real roots of polynomials of degree ≤ 3.
//!
//! Closed form throughout: trigonometric method when the cubic has three real
//! roots, Cardano otherwise. Each root is then polished with Newton steps on
//! the undeflated polynomial, keeping a step only when it lowers the residual.

use std::f64::consts::PI;

/// Relative size below which a leading coefficient is treated as zero.
const DEGENERATE_LEADING: f64 = 1e-13;

/// Evaluates `coeffs[0] + coeffs[1] x + coeffs[2] x² + coeffs[3] x³`.
pub fn eval_cubic(coeffs: [f64; 4], x: f64) -> f64 {
    ((coeffs[3] * x + coeffs[2]) * x + coeffs[1]) * x + coeffs[0]
}

fn eval_cubic_derivative(coeffs: [f64; 4], x: f64) -> f64 {
    (3.0 * coeffs[3] * x + 2.0 * coeffs[2]) * x + coeffs[1]
}

/// All real roots of the polynomial with coefficients in ascending order,
/// sorted ascending. An identically zero polynomial yields no roots.
pub fn real_roots(coeffs: [f64; 4]) -> Vec<f64> {
    let [a0, a1, a2, a3] = coeffs;
    let scale = a0.abs().max(a1.abs()).max(a2.abs());
    let mut roots = if a3 != 0.0 && a3.abs() > DEGENERATE_LEADING * scale {
        cubic_roots(a2 / a3, a1 / a3, a0 / a3)
    } else if a2 != 0.0 && a2.abs() > DEGENERATE_LEADING * a0.abs().max(a1.abs()) {
        quadratic_roots(a2, a1, a0)
    } else if a1 != 0.0 {
        vec![-a0 / a1]
    } else {
        Vec::new()
    };
    for r in roots.iter_mut() {
        *r = polish(coeffs, *r);
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

/// Real roots of `a x² + b x + c` with `a ≠ 0`, cancellation-free.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        // b == 0 and c == 0
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Real roots of the monic cubic `x³ + b x² + c x + d`.
fn cubic_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if p == 0.0 && q == 0.0 {
        return vec![-shift];
    }
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-half_q - half_q.signum() * sq).cbrt();
        let t = if u != 0.0 { u - third_p / u } else { 0.0 };
        vec![t - shift]
    } else {
        // three real roots (two may coincide)
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .collect()
    }
}

fn polish(coeffs: [f64; 4], mut x: f64) -> f64 {
    let mut residual = eval_cubic(coeffs, x).abs();
    for _ in 0..4 {
        let slope = eval_cubic_derivative(coeffs, x);
        if slope == 0.0 || residual == 0.0 {
            break;
        }
        let candidate = x - eval_cubic(coeffs, x) / slope;
        let r = eval_cubic(coeffs, candidate).abs();
        if !(r < residual) {
            break;
        }
        x = candidate;
        residual = r;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_roots(found: &[f64], expected: &[f64]) {
        assert_eq!(found.len(), expected.len(), "{found:?} vs {expected:?}");
        for (f, e) in found.iter().zip(expected) {
            assert!((f - e).abs() < 1e-9, "{found:?} vs {expected:?}");
        }
    }

    #[test]
    fn three_distinct_roots() {
        // (x-1)(x-2)(x+3) = x³ - 7x + 6
        assert_roots(&real_roots([6.0, -7.0, 0.0, 1.0]), &[-3.0, 1.0, 2.0]);
    }

    #[test]
    fn single_real_root() {
        // (x-2)(x²+1) = x³ - 2x² + x - 2
        assert_roots(&real_roots([-2.0, 1.0, -2.0, 1.0]), &[2.0]);
    }

    #[test]
    fn triple_root() {
        // (x-1)³
        let r = real_roots([-1.0, 3.0, -3.0, 1.0]);
        assert!(r.iter().all(|x| (x - 1.0).abs() < 1e-5), "{r:?}");
    }

    #[test]
    fn degenerate_orders() {
        assert_roots(&real_roots([-4.0, 0.0, 1.0, 0.0]), &[-2.0, 2.0]);
        assert_roots(&real_roots([3.0, 2.0, 0.0, 0.0]), &[-1.5]);
        assert!(real_roots([1.0, 0.0, 0.0, 0.0]).is_empty());
        assert_roots(&real_roots([0.0, -2.0, 0.0, 0.0]), &[0.0]);
    }

    #[test]
    fn tiny_leading_coefficient_keeps_small_roots() {
        // 1e-14 x³ + x² - 3x + 2: the bounded roots stay near 1 and 2
        let r = real_roots([2.0, -3.0, 1.0, 1e-14]);
        assert!(r.iter().any(|x| (x - 1.0).abs() < 1e-9));
        assert!(r.iter().any(|x| (x - 2.0).abs() < 1e-9));
    }

    proptest! {
        #[test]
        fn roots_of_constructed_cubics(r1 in -5.0..5.0f64, r2 in -5.0..5.0f64, r3 in -5.0..5.0f64, lead in 0.1..10.0f64) {
            // lead (x-r1)(x-r2)(x-r3)
            let a3 = lead;
            let a2 = -lead * (r1 + r2 + r3);
            let a1 = lead * (r1 * r2 + r1 * r3 + r2 * r3);
            let a0 = -lead * r1 * r2 * r3;
            let coeffs = [a0, a1, a2, a3];
            let found = real_roots(coeffs);
            prop_assert!(!found.is_empty());
            for x in &found {
                prop_assert!(eval_cubic(coeffs, *x).abs() < 1e-8 * lead.max(1.0) * 200.0);
            }
            for r in [r1, r2, r3] {
                let nearest = found.iter().map(|x| (x - r).abs()).fold(f64::INFINITY, f64::min);
                // clustered roots are ill-conditioned; only demand accuracy when well separated
                let sep = [r1, r2, r3].iter().map(|s| (s - r).abs()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
                if sep > 1e-2 {
                    prop_assert!(nearest < 1e-6, "root {} missing from {:?}", r, found);
                }
            }
        }
    }
}
