//! Expectation values on ground states: optical angular momentum
//! `L = r†r − l†l`, its spread, the rotor angular momentum and the
//! alignment order parameter.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianBundle;
use crate::hilbert::{build_operator, BasisCatalog, BasisKind, OperatorKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableSet {
    pub l_opt: f64,
    pub dl_opt: f64,
    /// Absent for frozen-angle catalogs, which carry no rotor states.
    pub l_mech: Option<f64>,
    /// Only set when the state belongs to a frozen-angle Hamiltonian.
    #[serde(skip)]
    pub z: Option<C64>,
    pub n_r: f64,
    pub n_l: f64,
}

fn check(state: &[C64], basis: &BasisCatalog) -> Result<()> {
    if state.len() != basis.dimension() {
        return Err(Error::BasisMismatch {
            state: state.len(),
            basis: basis.dimension(),
        });
    }
    Ok(())
}

/// `Σ |c_s|² f(s)` for operators diagonal in the catalog.
fn diagonal_moment(state: &[C64], basis: &BasisCatalog, f: impl Fn(&crate::hilbert::BasisState) -> f64) -> f64 {
    state.iter().zip(basis.states()).map(|(c, s)| c.norm_sqr() * f(s)).sum()
}

/// First and second moment of `L`.
fn l_moments(state: &[C64], basis: &BasisCatalog) -> Result<(f64, f64)> {
    check(state, basis)?;
    if basis.kind() == BasisKind::Linear {
        let l = build_operator(OperatorKind::OpticalL, basis)?;
        let lx = l.apply(state);
        let m1: C64 = state.iter().zip(&lx).map(|(a, b)| a.conj() * b).sum();
        let m2: f64 = lx.iter().map(|z| z.norm_sqr()).sum();
        return Ok((m1.re, m2));
    }
    let m1 = diagonal_moment(state, basis, |s| s.optical_l() as f64);
    let m2 = diagonal_moment(state, basis, |s| (s.optical_l() as f64).powi(2));
    Ok((m1, m2))
}

pub fn optical_l(state: &[C64], basis: &BasisCatalog) -> Result<f64> {
    Ok(l_moments(state, basis)?.0)
}

/// Standard deviation of `L`. Variances down to −1e-12 are rounding and
/// clamp to zero.
pub fn optical_dl(state: &[C64], basis: &BasisCatalog) -> Result<f64> {
    let (m1, m2) = l_moments(state, basis)?;
    let var = m2 - m1 * m1;
    if var < -1e-12 {
        return Err(Error::NegativeVariance(var));
    }
    Ok(var.max(0.0).sqrt())
}

/// `⟨Σ p_φi⟩`; in the co-rotating catalog this is `⟨p − L⟩`.
pub fn mechanical_l(state: &[C64], basis: &BasisCatalog) -> Result<f64> {
    check(state, basis)?;
    match basis.kind() {
        BasisKind::FrozenAngles => Err(Error::Unsupported(
            "frozen-angle catalogs carry no rotor momentum".into(),
        )),
        BasisKind::Corotating => Ok(diagonal_moment(state, basis, |s| {
            (s.k[0] as i64 - s.optical_l()) as f64
        })),
        BasisKind::Circular | BasisKind::Linear => Ok(diagonal_moment(state, basis, |s| s.rotor_sum() as f64)),
    }
}

/// `Z = (1/N) Σ e^{2iφ_j}`; compare by modulus.
pub fn alignment_z(angles: &[f64]) -> C64 {
    let n = angles.len().max(1) as f64;
    angles.iter().map(|&a| C64::from_polar(1.0, 2.0 * a)).sum::<C64>() / n
}

pub fn observables(state: &[C64], basis: &BasisCatalog) -> Result<ObservableSet> {
    let l_opt = optical_l(state, basis)?;
    let dl_opt = optical_dl(state, basis)?;
    let l_mech = match mechanical_l(state, basis) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let (n_r, n_l) = if basis.kind() == BasisKind::Linear {
        let nr = build_operator(OperatorKind::NumberR, basis)?.expectation(state).re;
        let nl = build_operator(OperatorKind::NumberL, basis)?.expectation(state).re;
        (nr, nl)
    } else {
        (
            diagonal_moment(state, basis, |s| s.n_r as f64),
            diagonal_moment(state, basis, |s| s.n_l as f64),
        )
    };
    Ok(ObservableSet {
        l_opt,
        dl_opt,
        l_mech,
        z: None,
        n_r,
        n_l,
    })
}

/// [`observables`] for a state of `h`, with `Z` filled in when the
/// Hamiltonian carries frozen angles.
pub fn measure(h: &HamiltonianBundle, state: &[C64]) -> Result<ObservableSet> {
    let mut set = observables(state, &h.basis)?;
    set.z = h.angles.as_deref().map(alignment_z);
    Ok(set)
}
