//! Large-N correction to the ground energy in the random phase
//! approximation.
//!
//! The dimers enter only through the orientation average
//! `Z = (1/N) Σ e^{2iφ_j}`. The correction is
//! `δE = ½ Σ_l √x_l − ½(ω_r + ω_l) − Δ`, where `x_l` are the zeros of
//!
//! ```text
//! P(x) = (x − Δ²)²(x − ω_r²)(x − ω_l²) − (g²/2) Δ x (x − Δ²)(x − 1)
//!        + (g⁴/16)(1 − |Z|²) Δ² x²
//! ```
//!
//! and equivalently the imaginary-frequency integral of the log-determinant
//! of the dressed photon propagator.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::alignment_z;
use crate::quad::{integrate, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RpaMethod {
    Polynomial,
    ContourIntegral,
    ClosedFormB0,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RpaResult {
    /// Sorted polariton frequencies; absent when the integral route ran
    /// without them.
    pub polariton_freqs: Option<[f64; 4]>,
    pub delta_e: f64,
    #[serde(skip)]
    pub z: C64,
    pub method: RpaMethod,
}

/// Imaginary parts below this (relative) are rounding around a double root.
const DOUBLE_ROOT_IM: f64 = 1e-6;
/// Imaginary parts above this (relative) are reported as complex roots.
const COMPLEX_ROOT_IM: f64 = 1e-8;

fn check_z(z: C64) -> Result<()> {
    if z.norm() > 1.0 + 1e-12 {
        return Err(crate::error::domain("Z", format!("|Z| = {} exceeds 1", z.norm())));
    }
    Ok(())
}

/// Product of polynomials with ascending coefficients.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `P`, highest power first (the leading one is 1).
pub fn rpa_polynomial(params: &ModelParams, z: C64) -> Result<[f64; 5]> {
    let params = params.validate()?;
    check_z(z)?;
    let d = params.derived();
    let (wr2, wl2) = (d.omega_r.powi(2), d.omega_l.powi(2));
    let delta = params.delta;
    let d2 = delta * delta;
    let g2 = params.effective_coupling().powi(2);

    let free = poly_mul(
        &poly_mul(&[-d2, 1.0], &[-d2, 1.0]),
        &poly_mul(&[-wr2, 1.0], &[-wl2, 1.0]),
    );
    let mixed = poly_mul(&poly_mul(&[0.0, 1.0], &[-d2, 1.0]), &[-1.0, 1.0]);
    let mut asc = [0.0; 5];
    for i in 0..5 {
        asc[i] = free[i] - g2 / 2.0 * delta * mixed.get(i).copied().unwrap_or(0.0);
    }
    asc[2] += g2 * g2 / 16.0 * (1.0 - z.norm_sqr()) * d2;
    Ok([asc[4], asc[3], asc[2], asc[1], asc[0]])
}

/// `P`, `P'` and `P''` at a real point.
fn eval3(c: &[f64; 5], x: f64) -> (f64, f64, f64) {
    let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
    for &a in c {
        ddp = ddp * x + 2.0 * dp;
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp, ddp)
}

fn newton_real(c: &[f64; 5], mut x: f64, derivative: bool) -> f64 {
    for _ in 0..50 {
        let (p, dp, ddp) = eval3(c, x);
        let (f, df) = if derivative { (dp, ddp) } else { (p, dp) };
        if df == 0.0 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Real zeros of `P`, ascending.
///
/// Roots closer than `1e-4` are refined together from the local quadratic
/// model around the zero of `P'`. A conjugate pair whose imaginary part is
/// below `1e-6` is rounding around a double root and merges onto the axis.
pub fn rpa_roots(params: &ModelParams, z: C64) -> Result<[f64; 4]> {
    let c = rpa_polynomial(params, z)?;
    let mut companion = DMatrix::<f64>::zeros(4, 4);
    for i in 0..4 {
        companion[(0, i)] = -c[i + 1];
    }
    for i in 1..4 {
        companion[(i, i - 1)] = 1.0;
    }
    let mut raw: Vec<C64> = companion.complex_eigenvalues().iter().copied().collect();
    raw.sort_by(|a, b| a.re.total_cmp(&b.re));

    let mut roots = Vec::with_capacity(4);
    let mut i = 0;
    while i < 4 {
        let r = raw[i];
        let scale = r.re.abs().max(1.0);
        let paired = i + 1 < 4 && (raw[i + 1] - r).norm() < 1e-4 * scale;
        if paired {
            let x0 = newton_real(&c, 0.5 * (r.re + raw[i + 1].re), true);
            let (p, _, ddp) = eval3(&c, x0);
            // rounding floor of the Horner sum
            let floor: f64 = 16.0
                * f64::EPSILON
                * c.iter()
                    .enumerate()
                    .map(|(k, a)| a.abs() * x0.abs().powi(4 - k as i32))
                    .sum::<f64>();
            let half_gap_sq = if p.abs() <= floor { 0.0 } else { -2.0 * p / ddp };
            if half_gap_sq >= 0.0 {
                let h = half_gap_sq.sqrt();
                // Newton is only trusted if it stays on its side of x0
                let lo = newton_real(&c, x0 - h, false);
                let hi = newton_real(&c, x0 + h, false);
                roots.push(if lo <= x0 && lo >= x0 - 2.0 * h { lo } else { x0 - h });
                roots.push(if hi >= x0 && hi <= x0 + 2.0 * h { hi } else { x0 + h });
            } else {
                let im = (-half_gap_sq).sqrt();
                if im > DOUBLE_ROOT_IM * scale {
                    return Err(Error::ComplexRoots { re: x0, im });
                }
                roots.push(x0);
                roots.push(x0);
            }
            i += 2;
            continue;
        }
        if r.im.abs() > COMPLEX_ROOT_IM * scale {
            return Err(Error::ComplexRoots { re: r.re, im: r.im });
        }
        roots.push(newton_real(&c, r.re, false));
        i += 1;
    }
    roots.sort_by(f64::total_cmp);
    Ok([roots[0], roots[1], roots[2], roots[3]])
}

/// Square roots of the zeros of `P`, ascending.
pub fn polariton_frequencies(params: &ModelParams, z: C64) -> Result<[f64; 4]> {
    let roots = rpa_roots(params, z)?;
    let mut out = [0.0; 4];
    for (o, &x) in out.iter_mut().zip(&roots) {
        if x < -1e-10 {
            // negative x is an imaginary frequency
            return Err(Error::ComplexRoots {
                re: 0.0,
                im: (-x).sqrt(),
            });
        }
        *o = x.max(0.0).sqrt();
    }
    Ok(out)
}

/// `δE` through the polariton frequencies.
pub fn rpa_energy(params: &ModelParams, z: C64) -> Result<RpaResult> {
    let freqs = polariton_frequencies(params, z)?;
    let d = params.derived();
    let delta_e = 0.5 * freqs.iter().sum::<f64>() - 0.5 * (d.omega_r + d.omega_l) - params.delta;
    Ok(RpaResult {
        polariton_freqs: Some(freqs),
        delta_e,
        z,
        method: RpaMethod::Polynomial,
    })
}

pub fn rpa_energy_for_angles(params: &ModelParams, angles: &[f64]) -> Result<RpaResult> {
    rpa_energy(params, alignment_z(angles))
}

/// `ln det(1 − D(iν) Π̄(iν))` with the photon propagator
/// `D = diag(−ω²/((ω−ω_r)(ω+ω_l)), −ω²/((ω+ω_r)(ω−ω_l)))`, the averaged
/// polarization `Π̄ = −Δ/(ω²−Δ²) [[1, Z*], [Z, 1]]` and coupling `g²/4`,
/// all at `ω = iν`.
pub fn log_det_integrand(params: &ModelParams, z: C64, nu: f64) -> f64 {
    let d = params.derived();
    let delta = params.delta;
    let kappa = params.effective_coupling().powi(2) / 4.0;
    let w = C64::new(0.0, nu);
    let d1 = -(w * w) / ((w - d.omega_r) * (w + d.omega_l));
    let d2 = -(w * w) / ((w + d.omega_r) * (w - d.omega_l));
    let p = -delta / (w * w - delta * delta);
    let det = (1.0 - kappa * p * d1) * (1.0 - kappa * p * d2) - kappa * kappa * p * p * d1 * d2 * z.norm_sqr();
    det.re.ln()
}

/// `δE = ∫_0^∞ dν/(2π) ln det(ν)` evaluated with `ν = t/(1−t)`.
pub fn rpa_energy_integral(params: &ModelParams, z: C64) -> Result<RpaResult> {
    let params = params.validate()?;
    check_z(z)?;
    let kappa = params.effective_coupling().powi(2) / 4.0;
    // ln det ~ 2κΔ/ν² for large ν
    let tail = 2.0 * kappa * params.delta;
    let f = |t: f64| {
        if t >= 1.0 {
            return tail / (2.0 * PI);
        }
        let nu = t / (1.0 - t);
        log_det_integrand(&params, z, nu) / (2.0 * PI) / (1.0 - t).powi(2)
    };
    let (value, _) = integrate(f, 0.0, 1.0, QuadOptions::default())?;
    Ok(RpaResult {
        polariton_freqs: polariton_frequencies(&params, z).ok(),
        delta_e: value,
        z,
        method: RpaMethod::ContourIntegral,
    })
}

/// Zero-field closed form
/// `((Δ+1)/2)[√(1 + g²Δ(1+Z)/(4(Δ+1)²)) + √(1 + g²Δ(1−Z)/(4(Δ+1)²)) − 2]`.
pub fn rpa_energy_b0_closed(params: &ModelParams, z: f64) -> Result<f64> {
    if params.b_field != 0.0 {
        return Err(Error::NonzeroB(params.b_field));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(crate::error::domain("Z", format!("must lie in [0, 1], got {z}")));
    }
    let delta = params.delta;
    let a = params.effective_coupling().powi(2) * delta / (4.0 * (delta + 1.0).powi(2));
    Ok((delta + 1.0) / 2.0 * ((1.0 + a * (1.0 + z)).sqrt() + (1.0 + a * (1.0 - z)).sqrt() - 2.0))
}

/// Coefficient multiplying `Σ_{i≠j} cos²(φ_i − φ_j)` in the orientation
/// dependent energy.
pub fn angle_coefficient(params: &ModelParams) -> f64 {
    let d = params.derived();
    let (wr, wl) = (d.omega_r, d.omega_l);
    let s = wr + wl;
    let delta = params.delta;
    let g = params.effective_coupling();
    let n = params.n_dimers as f64;
    -(g.powi(4) * delta * delta / (64.0 * n * n)) * (2.0 * wr * wl + delta * s)
        / (s * (wr + delta).powi(2) * (wl + delta).powi(2))
}

pub fn pair_sum_cos2(angles: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, a) in angles.iter().enumerate() {
        for (j, b) in angles.iter().enumerate() {
            if i != j {
                s += (a - b).cos().powi(2);
            }
        }
    }
    s
}

/// Orientation-dependent part of the ground energy at order `g⁴`.
pub fn rpa_angle_correction(params: &ModelParams, angles: &[f64]) -> Result<f64> {
    if angles.len() != params.n_dimers {
        return Err(crate::error::domain(
            "angles",
            format!("need {} angles, got {}", params.n_dimers, angles.len()),
        ));
    }
    if params.n_dimers < 2 {
        return Err(crate::error::domain(
            "n_dimers",
            "angle correction needs at least two dimers",
        ));
    }
    Ok(angle_coefficient(params) * pair_sum_cos2(angles))
}

/// `g⁴` coefficient of the zero-field closed form,
/// `−Δ²(1 + Z²)/(128(Δ+1)³)`.
pub fn closed_form_g4_coefficient(delta: f64, z: f64) -> f64 {
    -delta * delta * (1.0 + z * z) / (128.0 * (delta + 1.0).powi(3))
}
