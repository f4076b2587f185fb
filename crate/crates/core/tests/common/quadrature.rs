//! Upper-tail oracles by double-exponential quadrature, shared by test targets.

use std::f64::consts::PI;

// Double-exponential quadrature; uses only exp/ln/sinh/cosh, so it shares no
// code with the incomplete gamma/beta evaluation under test.
const H: f64 = 1.0 / 256.0;

/// tanh-sinh on [a, b]. `f` receives the distances of the node from `a` and
/// from `b`, both computed without cancellation.
pub fn tanh_sinh(f: impl Fn(f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let half = (b - a) / 2.0;
    let mut sum = 0.0;
    let n = (4.0 / H) as i64;
    for i in -n..=n {
        let t = i as f64 * H;
        let u = PI / 2.0 * t.sinh();
        let comp = 1.0 / (u.abs().exp() * u.cosh()); // 1 - |tanh u|
        let w = PI / 2.0 * t.cosh() / (u.cosh() * u.cosh());
        if comp == 0.0 || w == 0.0 {
            continue;
        }
        let (from_a, from_b) = if u >= 0.0 {
            (half * (2.0 - comp), half * comp)
        } else {
            (half * comp, half * (2.0 - comp))
        };
        sum += w * f(from_a, from_b);
    }
    sum * half * H
}

/// exp-sinh on (0, inf).
pub fn exp_sinh(f: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    let lo = (-5.0 / H) as i64;
    let hi = (4.0 / H) as i64;
    for i in lo..=hi {
        let t = i as f64 * H;
        let x = (PI / 2.0 * t.sinh()).exp();
        let w = PI / 2.0 * t.cosh() * x;
        let v = f(x);
        if v != 0.0 {
            sum += w * v;
        }
    }
    sum * H
}

pub fn normal_oracle(z: f64) -> f64 {
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
    if z >= 0.0 {
        exp_sinh(|u| pdf(z + u))
    } else {
        1.0 - exp_sinh(|u| pdf(-z + u))
    }
}

pub fn chi_square_oracle(x: f64, df: f64) -> f64 {
    // unnormalized density, scaled near the mode to stay in range
    let a = df / 2.0 - 1.0;
    let mode = (df - 2.0).max(1.0);
    let shape = |t: f64| (a * (t / mode).ln() - (t - mode) / 2.0).exp();
    let total = exp_sinh(shape);
    exp_sinh(|u| shape(x + u)) / total
}

pub fn f_oracle(x: f64, d1: f64, d2: f64) -> f64 {
    // T > x  <=>  S = d1 T / (d1 T + d2) > s0, with S ~ Beta(d1/2, d2/2)
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    let s0 = d1 * x / (d1 * x + d2);
    let m = if a + b > 2.0 {
        ((a - 1.0) / (a + b - 2.0)).clamp(0.05, 0.95)
    } else {
        0.5
    };
    let log_norm = (a - 1.0) * m.ln() + (b - 1.0) * (1.0 - m).ln();
    let dens = |s: f64, one_minus_s: f64| ((a - 1.0) * s.ln() + (b - 1.0) * one_minus_s.ln() - log_norm).exp();
    let total = tanh_sinh(dens, 0.0, 1.0);
    let tail = tanh_sinh(|fa, fb| dens(s0 + fa, fb), s0, 1.0);
    tail / total
}
