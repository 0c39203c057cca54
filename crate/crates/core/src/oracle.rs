//! Independent numerical routes used to cross-check the closed-form and
//! direct solvers at runtime (self-check) and in tests.

use nalgebra::Matrix6;

/// Coefficients `c[k]` of `det(λI - m) = Σ c[k] λ^k`, by the Faddeev-LeVerrier
/// recursion. `c[6] = 1`.
pub fn characteristic_polynomial(m: &Matrix6<f64>) -> [f64; 7] {
    let mut c = [0.0; 7];
    c[6] = 1.0;
    let identity = Matrix6::<f64>::identity();
    let mut aux = Matrix6::<f64>::zeros();
    for k in 1..=6 {
        aux = m * aux + identity * c[7 - k];
        c[6 - k] = -(m * aux).trace() / k as f64;
    }
    c
}

/// Evaluates `Σ c[k] x^k` by Horner's rule.
pub fn eval_polynomial(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}
