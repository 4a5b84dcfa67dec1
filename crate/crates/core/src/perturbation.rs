//! Closed-form weak- and strong-coupling results, and the intermediate
//! regime where the tunnelling splitting of the displaced doublet is
//! resonant with the l-mode.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{circular_frequencies, ModelParams};
use crate::special::{displacement_element, laguerre};

pub const DEFAULT_MAX_BLOCK: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakPT {
    /// Second-order energy per unit `g²`.
    pub e2: f64,
    /// Coefficient of `g⁴ Σ_{i≠j} cos²(φ_i − φ_j)`.
    pub e4_phase_coeff: f64,
    pub l: f64,
    pub dl: f64,
    pub warnings: Vec<String>,
}

impl WeakPT {
    /// `−NΔ/2 + g²E2`
    pub fn ground_energy(&self, params: &ModelParams) -> f64 {
        let g = params.effective_coupling();
        -(params.n_dimers as f64) * params.delta / 2.0 + g * g * self.e2
    }
}

pub fn weak_corrections(params: &ModelParams) -> WeakPT {
    let d = params.derived();
    let (wr, wl, dp) = (d.omega_r, d.omega_l, d.delta_prime);
    let s = wr + wl;
    let g = params.effective_coupling();
    let n = params.n_dimers as f64;
    let num = 2.0 * wr * wl + dp * s;
    let e2 = dp / 8.0 * num / (s * (wr + dp) * (wl + dp));
    let e4_phase_coeff = -(dp * dp / (64.0 * n * n)) * num / (s * (wr + dp).powi(2) * (wl + dp).powi(2));
    let l = g * g * dp / 8.0 * num / ((wr + dp).powi(2) * (wl + dp).powi(2)) * (wr - wl) / s;
    let dl = g / (8.0 * s).sqrt() * ((wr / (dp + wr)).powi(2) + (wl / (dp + wl)).powi(2)).sqrt();
    let mut warnings = Vec::new();
    if g >= 0.3 * params.delta {
        warnings.push(format!(
            "weak-coupling series used at g = {g} with Δ = {}",
            params.delta
        ));
    }
    WeakPT {
        e2,
        e4_phase_coeff,
        l,
        dl,
        warnings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongPT {
    pub q: f64,
    pub e0: f64,
    pub l1: f64,
    pub dl1: f64,
    pub ln: f64,
    pub warnings: Vec<String>,
}

pub fn strong_corrections(params: &ModelParams) -> StrongPT {
    let d = params.derived();
    let q = d.q;
    let q2 = q * q;
    let (b, delta) = (params.b_field, params.delta);
    let s = d.omega_r + d.omega_l;
    let n = params.n_dimers as f64;
    let mut warnings = Vec::new();
    let g = params.effective_coupling();
    if g < 3.0 * b.abs() {
        warnings.push(format!("strong-coupling result used with g = {g} not ≫ B = {b}"));
    }
    if g < 3.0 * s.sqrt() {
        warnings.push(format!("strong-coupling result used with g = {g} not ≫ √(ω_r+ω_l)"));
    }
    StrongPT {
        q,
        e0: -delta / 2.0 * (-4.0 * q2).exp(),
        l1: 4.0 * b * delta * q2 * (-4.0 * q2).exp(),
        dl1: (2.0 * s * delta).sqrt() * q * (-2.0 * q2).exp(),
        ln: 4.0 * b * delta * q2 * (-4.0 * q2 / n).exp(),
        warnings,
    }
}

fn resonance_for_q(n_dimers: usize, delta: f64, q: f64) -> Result<f64> {
    let q2 = q * q;
    match n_dimers {
        1 => Ok(2.0 * q2 * delta * (-4.0 * q2).exp()),
        2 => Ok(delta * (-2.0 * q2).exp()),
        n => Err(Error::Unsupported(format!(
            "resonance condition known only for N = 1, 2 (got {n})"
        ))),
    }
}

/// Resonant `ω_l` at the `q` implied by `params` (including its field).
pub fn intermediate_resonance(params: &ModelParams) -> Result<f64> {
    resonance_for_q(params.n_dimers, params.delta, params.derived().q)
}

/// Whether the intermediate-regime analysis applies: `q ≥ 1/2` and
/// `Δ ≥ 2e·ω_l`.
pub fn intermediate_feasible(params: &ModelParams) -> bool {
    let d = params.derived();
    d.q >= 0.5 && params.delta >= 2.0 * std::f64::consts::E * d.omega_l
}

/// Smallest `B ≥ 0` at which `ω_l(B)` equals the resonance condition, with
/// `q` evaluated self-consistently at that field. `None` if there is no
/// crossing below `b_max`.
pub fn resonant_field(params: &ModelParams, b_max: f64) -> Result<Option<f64>> {
    let mismatch = |b: f64| -> Result<f64> {
        let p = params.with_b(b);
        Ok(circular_frequencies(b).1 - intermediate_resonance(&p)?)
    };
    let mut lo = 0.0;
    let mut f_lo = mismatch(lo)?;
    if f_lo <= 0.0 {
        return Ok(Some(0.0));
    }
    let steps = 4000;
    for i in 1..=steps {
        let hi = b_max * (i as f64 / steps as f64).powi(2);
        let f_hi = mismatch(hi)?;
        if f_hi <= 0.0 {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if mismatch(m)? > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 * (1.0 + b) {
                    break;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        lo = hi;
        f_lo = f_hi;
    }
    debug_assert!(f_lo > 0.0);
    Ok(None)
}

/// Two-level estimate of `L` at resonance.
pub fn intermediate_l(q: f64) -> f64 {
    2.0 * q * q / (1.0 + (1.0 + 4.0 * q * q).sqrt())
}

/// Ground energy of the resonant two-level problem.
pub fn intermediate_energy(delta: f64, q: f64) -> f64 {
    -delta / 2.0 * (-4.0 * q * q).exp() * (1.0 + 4.0 * q * q).sqrt()
}

#[derive(Debug, Clone)]
pub struct IntermediateBlock {
    /// Ordered `(↑,0), (↓,0), (↑,1), (↓,1), …`, where `(s, j)` is spin `s`
    /// with its displaced r-vacuum and `j` displaced l-quanta.
    pub matrix: DMatrix<C64>,
    pub energy: f64,
    pub c_up: Vec<C64>,
    pub c_down: Vec<C64>,
    pub l: f64,
}

/// Block of the lowest `n` l-mode levels of both displaced doublet branches,
/// coupled by the tunnelling term `−(Δ/2)σ_z`.
pub fn intermediate_block(params: &ModelParams, n: usize) -> Result<IntermediateBlock> {
    intermediate_block_capped(params, n, DEFAULT_MAX_BLOCK)
}

pub fn intermediate_block_capped(params: &ModelParams, n: usize, max: usize) -> Result<IntermediateBlock> {
    if n > max {
        return Err(Error::BlockTooLarge { requested: n, max });
    }
    if n < 2 {
        return Err(crate::error::domain("n", "block needs at least two l-mode levels"));
    }
    if params.n_dimers != 1 {
        return Err(Error::Unsupported(
            "intermediate block is built for a single dimer".into(),
        ));
    }
    let d = params.derived();
    let q = d.q;
    let tunnel = -params.delta / 2.0 * (-2.0 * q * q).exp();
    let gamma = C64::new(0.0, -2.0 * q);
    let mut m = DMatrix::<C64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        m[(2 * j, 2 * j)] = C64::new(d.omega_l * j as f64, 0.0);
        m[(2 * j + 1, 2 * j + 1)] = C64::new(d.omega_l * j as f64, 0.0);
        for jp in 0..n {
            let v = tunnel * displacement_element(j, jp, gamma);
            m[(2 * j, 2 * jp + 1)] = v;
            m[(2 * jp + 1, 2 * j)] = v.conj();
        }
    }
    let eig = m.clone().symmetric_eigen();
    let i0 = (0..2 * n)
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap();
    let v = eig.eigenvectors.column(i0);
    let c_up: Vec<C64> = (0..n).map(|j| v[2 * j]).collect();
    let c_down: Vec<C64> = (0..n).map(|j| v[2 * j + 1]).collect();
    let l = block_angular_momentum(&c_up, &c_down, q);
    Ok(IntermediateBlock {
        matrix: m,
        energy: eig.eigenvalues[i0],
        c_up,
        c_down,
        l,
    })
}

/// `⟨r†r − l†l⟩` for a superposition of displaced states. The r-mode
/// occupation `q²` cancels against the displaced l-mode offset, leaving the
/// l-quanta and the interference between neighbouring levels.
fn block_angular_momentum(up: &[C64], down: &[C64], q: f64) -> f64 {
    let n = up.len();
    let mut l = 0.0;
    for j in 0..n {
        l -= j as f64 * (up[j].norm_sqr() + down[j].norm_sqr());
    }
    let lower = |c: &[C64]| -> C64 {
        (0..n - 1)
            .map(|j| ((j + 1) as f64).sqrt() * c[j].conj() * c[j + 1])
            .sum()
    };
    l - 2.0 * q * lower(up).im + 2.0 * q * lower(down).im
}

/// Vacuum-to-`n` overlap magnitude `(2q)ⁿ e^{−2q²}/√(n!)`.
pub fn displaced_overlap(q: f64, n: usize) -> f64 {
    displacement_element(n, 0, C64::new(0.0, -2.0 * q)).norm()
}

/// Energies `ω_r n + ω_l m ∓ (Δ/2) e^{−4q²} L_n(4q²) L_m(4q²)` of the
/// displaced levels split by first-order tunnelling.
pub fn strong_levels(params: &ModelParams, n: usize, m: usize) -> (f64, f64) {
    let d = params.derived();
    let x = 4.0 * d.q * d.q;
    let base = d.omega_r * n as f64 + d.omega_l * m as f64;
    let split = params.delta / 2.0 * (-x).exp() * laguerre(n, 0.0, x) * laguerre(m, 0.0, x);
    (base - split, base + split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Inertia;

    fn p(g: f64, b: f64) -> ModelParams {
        ModelParams::new(1.0, g, b, Inertia::Frozen, 1)
    }

    #[test]
    fn weak_examples() {
        let w = weak_corrections(&p(0.1, 0.0));
        assert!((w.e2 - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(w.l, 0.0);
        let w = weak_corrections(&p(0.1, 0.1));
        assert!((w.l - 3.10e-5).abs() < 0.01e-5);
        assert!((w.dl - 0.01766).abs() < 1e-5);
        assert!(w.warnings.is_empty());
    }

    #[test]
    fn strong_examples() {
        let s = strong_corrections(&p(4.0, 0.01));
        assert!((s.q - 1.0).abs() < 1e-4);
        assert!((s.l1 - 7.33e-4).abs() < 0.01e-4);
        assert_eq!(strong_corrections(&p(4.0, 0.0)).l1, 0.0);
        let s2 = strong_corrections(&p(4.0, 0.01).with_n_dimers(2));
        assert!((s2.ln - 0.04 * s2.q * s2.q * (-2.0 * s2.q * s2.q).exp()).abs() < 1e-15);
        assert!((s.e0 + 0.5 * (-4.0 * s.q * s.q).exp()).abs() < 1e-15);
    }

    #[test]
    fn resonance_examples() {
        let one = p(4.0, 0.0);
        assert!((intermediate_resonance(&one).unwrap() - 2.0 * (-4.0f64).exp()).abs() < 1e-15);
        assert!((intermediate_resonance(&one.with_n_dimers(2)).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert!(matches!(
            intermediate_resonance(&one.with_n_dimers(3)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn resonant_field_is_self_consistent() {
        let params = p(5.0, 0.0);
        let b = resonant_field(&params, 200.0).unwrap().unwrap();
        let at = params.with_b(b);
        let wl = circular_frequencies(b).1;
        assert!((wl - intermediate_resonance(&at).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn intermediate_l_values() {
        assert!((intermediate_l(1.0) - 0.618_033_988_749_895).abs() < 1e-12);
        assert!((intermediate_l(0.5) - 0.5 / (1.0 + 2f64.sqrt())).abs() < 1e-15);
        let q = 1e-4;
        assert!((intermediate_l(q) / (q * q) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn two_level_block_matches_printed_form() {
        // Δ = 1, field tuned so that ω_l = 2q²Δe^{−4q²}
        let params = p(5.0, 0.0);
        let b = resonant_field(&params, 200.0).unwrap().unwrap();
        let at = params.with_b(b);
        let q = at.derived().q;
        let blk = intermediate_block(&at, 2).unwrap();
        let e = (-4.0 * q * q).exp();
        let m = &blk.matrix;
        assert!((m[(0, 1)] - C64::new(-0.5 * e, 0.0)).norm() < 1e-15);
        assert!((m[(0, 3)].norm() - q * e).abs() < 1e-15);
        assert!((m[(1, 2)].norm() - q * e).abs() < 1e-15);
        assert!((m[(2, 3)] - C64::new(-0.5 * e * (1.0 - 4.0 * q * q), 0.0)).norm() < 1e-15);
        assert!((&blk.matrix - blk.matrix.adjoint()).norm() < 1e-15);
        assert!((blk.energy - intermediate_energy(1.0, q)).abs() < 1e-12 * e);
        assert!((blk.l - intermediate_l(q)).abs() < 1e-9);
    }

    #[test]
    fn block_normalized_and_bounded() {
        let blk = intermediate_block(&p(3.0, 2.0), 9).unwrap();
        let norm: f64 = blk.c_up.iter().chain(&blk.c_down).map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(matches!(
            intermediate_block(&p(3.0, 2.0), 17),
            Err(Error::BlockTooLarge { .. })
        ));
    }

    #[test]
    fn block_decouples_at_small_q() {
        let blk = intermediate_block(&p(1e-4, 0.5), 6).unwrap();
        assert!(blk.l.abs() < 1e-6);
        assert!((blk.energy + 0.5).abs() < 1e-6);
    }

    #[test]
    fn overlap_identity() {
        let q: f64 = 0.8;
        for n in 0..8 {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let expect = (2.0 * q).powi(n as i32) * (-2.0 * q * q).exp() / fact.sqrt();
            assert!((displaced_overlap(q, n) - expect).abs() < 1e-14);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn phase_coefficient_nonpositive(
                delta in 0.01f64..10.0, b in -5f64..5.0, j in 0.01f64..1e6, n in 1usize..8
            ) {
                let params = ModelParams::new(delta, 0.1, b, Inertia::Finite(j), n);
                let w = weak_corrections(&params);
                prop_assert!(w.e4_phase_coeff <= 0.0);
                prop_assert!(w.l * b >= 0.0);
            }

            #[test]
            fn strong_exponential_bounded(g in 0f64..20.0, b in -3f64..3.0) {
                let s = strong_corrections(&p(g, b));
                let e = (-4.0 * s.q * s.q).exp();
                prop_assert!(e > 0.0 && e <= 1.0);
            }
        }
    }
}
