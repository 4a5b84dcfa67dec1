//! Laguerre polynomials and displaced-oscillator matrix elements.

use num_complex::Complex64 as C64;

/// Generalized Laguerre polynomial `L_n^{(α)}(x)` by the three-term
/// recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `⟨m|D(γ)|n⟩` for the displacement operator `D(γ) = exp(γ a† − γ* a)`.
pub fn displacement_element(m: usize, n: usize, gamma: C64) -> C64 {
    let x = gamma.norm_sqr();
    let (lo, hi, base) = if m >= n { (n, m, gamma) } else { (m, n, -gamma.conj()) };
    let d = hi - lo;
    let mag = if d == 0 {
        1.0
    } else if x == 0.0 {
        return C64::new(0.0, 0.0);
    } else {
        (0.5 * (ln_factorial(lo) - ln_factorial(hi)) + d as f64 * base.norm().ln()).exp()
    };
    let phase = C64::from_polar(1.0, d as f64 * base.arg());
    phase * mag * (-x / 2.0).exp() * laguerre(lo, d as f64, x)
}
