//! Born-Oppenheimer treatment of the rotors: the ground energy of the Dicke
//! problem at frozen angles, and the rotor Schrödinger (Mathieu) equation in
//! that potential.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{ground_state_with, SolverOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::build_frozen;
use crate::hilbert::{build_frozen_basis, TruncationSpec};
use crate::model::{Inertia, ModelParams};
use crate::observables::optical_dl;
use crate::perturbation::weak_corrections;
use crate::rpa::{pair_sum_cos2, rpa_angle_correction};

/// Energy change above which the plane-wave basis counts as unconverged.
pub const BASIS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSource {
    ExactDicke,
    RpaG4,
    WeakG4,
}

/// Ground energy along a one-dimensional cut: dimer 0 at `θ`, the others at
/// zero. For two dimers `θ` is the relative angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSurface {
    /// `points + 1` samples covering `[0, period]`, endpoint included.
    pub theta: Vec<f64>,
    pub energy: Vec<f64>,
    pub period: f64,
    pub source: SurfaceSource,
}

impl PotentialSurface {
    pub fn points(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn mean(&self) -> f64 {
        let n = self.points();
        self.energy[..n].iter().sum::<f64>() / n as f64
    }

    pub fn centered(&self) -> Vec<f64> {
        let m = self.mean();
        self.energy.iter().map(|e| e - m).collect()
    }

    /// `max − min`
    pub fn amplitude(&self) -> f64 {
        let max = self.energy.iter().copied().fold(f64::MIN, f64::max);
        let min = self.energy.iter().copied().fold(f64::MAX, f64::min);
        max - min
    }

    /// A surface sampled from `f` on `points` intervals of `[0, period]`.
    pub fn from_fn(points: usize, period: f64, source: SurfaceSource, f: impl Fn(f64) -> f64) -> Self {
        let theta: Vec<f64> = (0..=points).map(|j| period * j as f64 / points as f64).collect();
        let mut energy: Vec<f64> = theta.iter().map(|&t| f(t)).collect();
        energy[points] = energy[0];
        Self {
            theta,
            energy,
            period,
            source,
        }
    }

    /// The same surface with the origin of `θ` moved by `shift` grid steps.
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.points();
        let mut out = self.clone();
        for j in 0..=n {
            out.energy[j] = self.energy[(j + shift) % n];
        }
        out
    }
}

fn cut_angles(theta: f64, n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n];
    a[0] = theta;
    a
}

/// `E₀(θ)` on `points` intervals of `[0, π]`. The rotor kinetic term is
/// never included; `trunc` sets the photon cutoff of the exact source.
pub fn potential_surface(
    params: &ModelParams,
    points: usize,
    source: SurfaceSource,
    trunc: &TruncationSpec,
) -> Result<PotentialSurface> {
    let params = params.validate()?;
    if points < 4 {
        return Err(crate::error::domain("points", "need at least 4 grid points"));
    }
    let n = params.n_dimers;
    let theta: Vec<f64> = (0..=points).map(|j| PI * j as f64 / points as f64).collect();
    let mut energy = match source {
        SurfaceSource::ExactDicke => {
            let frozen = params.with_inertia(Inertia::Frozen);
            let basis = Arc::new(build_frozen_basis(trunc, n)?);
            let opts = SolverOptions::default().with_tol(1e-11);
            theta[..points]
                .par_iter()
                .map(|&t| {
                    let h = build_frozen(&frozen, &basis, &cut_angles(t, n))?;
                    Ok(ground_state_with(&h, &opts)?.energy)
                })
                .collect::<Result<Vec<f64>>>()?
        }
        SurfaceSource::RpaG4 => {
            if n < 2 {
                vec![0.0; points]
            } else {
                let frozen = params.with_inertia(Inertia::Frozen);
                theta[..points]
                    .iter()
                    .map(|&t| rpa_angle_correction(&frozen, &cut_angles(t, n)))
                    .collect::<Result<Vec<f64>>>()?
            }
        }
        SurfaceSource::WeakG4 => {
            let c = weak_corrections(&params).e4_phase_coeff * params.effective_coupling().powi(4);
            theta[..points]
                .iter()
                .map(|&t| c * pair_sum_cos2(&cut_angles(t, n)))
                .collect()
        }
    };
    energy.push(energy[0]);
    Ok(PotentialSurface {
        theta,
        energy,
        period: PI,
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MathieuGround {
    pub energy: f64,
    /// `ψ(θ)` on the surface grid, real and nonnegative.
    pub psi: Vec<f64>,
    /// `(P/2π)√(−2 ln|⟨e^{2πiθ/P}⟩|)`; infinite for a uniform state.
    pub angle_dispersion: f64,
    /// `∫|ψ|² dθ` over one period by the trapezoid rule.
    pub norm: f64,
    /// Plane waves kept: `−m_max ..= m_max`.
    pub m_max: usize,
}

/// Fourier coefficients `V_k = (1/n) Σ_j V_j e^{−2πikj/n}` for `|k| <= 2·m_max`.
fn fourier(v: &[f64], kmax: usize) -> Vec<C64> {
    let n = v.len();
    let kmax = kmax as i64;
    (-kmax..=kmax)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(j, &x)| x * C64::from_polar(1.0, -2.0 * PI * (k * j as i64) as f64 / n as f64))
                .sum::<C64>()
                / n as f64
        })
        .collect()
}

fn plane_wave_ground(vk: &[C64], kmax: usize, m_max: usize, period: f64, inertia: f64) -> (f64, Vec<C64>) {
    let dim = 2 * m_max + 1;
    let q = 2.0 * PI / period;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for a in 0..dim {
        let ma = a as i64 - m_max as i64;
        h[(a, a)] += C64::new((q * ma as f64).powi(2) / (2.0 * inertia), 0.0);
        for b in 0..dim {
            let mb = b as i64 - m_max as i64;
            h[(a, b)] += vk[(ma - mb + kmax as i64) as usize];
        }
    }
    let eig = h.symmetric_eigen();
    let (i0, e0) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, e)| (i, *e))
        .unwrap();
    (e0, eig.eigenvectors.column(i0).iter().copied().collect())
}

/// Ground state of `−ψ''/(2I) + V(θ)ψ = Eψ`, periodic on the surface
/// period, in a plane-wave basis that is doubled until the energy settles.
pub fn mathieu_ground(surface: &PotentialSurface, inertia_eff: f64) -> Result<MathieuGround> {
    if !(inertia_eff > 0.0) || !inertia_eff.is_finite() {
        return Err(crate::error::domain("inertia_eff", "must be positive and finite"));
    }
    let n = surface.points();
    let v = &surface.energy[..n];
    let kmax = n / 2;
    let vk = fourier(v, kmax);
    let limit = n / 4;
    let mut m_max = 8.min(limit);
    let mut e = plane_wave_ground(&vk, kmax, m_max, surface.period, inertia_eff).0;
    let mut c;
    loop {
        let next = 2 * m_max;
        if next > limit {
            return Err(Error::GridTooCoarse { change: f64::NAN });
        }
        let (e2, c2) = plane_wave_ground(&vk, kmax, next, surface.period, inertia_eff);
        let change = (e2 - e).abs();
        (e, c, m_max) = (e2, c2, next);
        if change <= BASIS_TOL {
            break;
        }
        if 2 * next > limit {
            return Err(Error::GridTooCoarse { change });
        }
    }

    let q = 2.0 * PI / surface.period;
    let amp = |t: f64| -> C64 {
        c.iter()
            .enumerate()
            .map(|(a, ca)| ca * C64::from_polar(1.0, q * (a as f64 - m_max as f64) * t))
            .sum::<C64>()
            / surface.period.sqrt()
    };
    let raw: Vec<C64> = surface.theta.iter().map(|&t| amp(t)).collect();
    let peak = raw
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let phase = peak.conj() / peak.norm();
    let psi: Vec<f64> = raw.iter().map(|z| (z * phase).re.max(0.0)).collect();
    let h = surface.period / n as f64;
    let norm = psi[..n].iter().map(|x| x * x).sum::<f64>() * h;

    // ⟨e^{iqθ}⟩ shifts the plane-wave index by one
    let shift: C64 = (0..c.len() - 1).map(|a| c[a + 1].conj() * c[a]).sum();
    let modulus = shift.norm();
    let angle_dispersion = if modulus == 0.0 {
        f64::INFINITY
    } else {
        (-2.0 * modulus.ln()).max(0.0).sqrt() / q
    };
    Ok(MathieuGround {
        energy: e,
        psi,
        angle_dispersion,
        norm,
        m_max,
    })
}

/// Ground energy by a fourth-order finite-difference Laplacian on the
/// surface grid, for cross-checking [`mathieu_ground`].
pub fn mathieu_ground_fd(surface: &PotentialSurface, inertia_eff: f64) -> Result<f64> {
    if !(inertia_eff > 0.0) || !inertia_eff.is_finite() {
        return Err(crate::error::domain("inertia_eff", "must be positive and finite"));
    }
    let n = surface.points();
    if n < 5 {
        return Err(crate::error::domain("points", "need at least 5 grid points"));
    }
    let h = surface.period / n as f64;
    let t = 1.0 / (2.0 * inertia_eff) / (12.0 * h * h);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = surface.energy[j] + 30.0 * t;
        for (off, w) in [(1, -16.0), (2, 1.0)] {
            m[(j, (j + off) % n)] += w * t;
            m[(j, (j + n - off) % n)] += w * t;
        }
    }
    Ok(m.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// `σ = (8 V₀ I)^{−1/4}`, the spread of the harmonic ground state in the
/// well `−V₀ cos²θ ≈ −V₀ + V₀θ²`.
pub fn harmonic_dispersion(v0: f64, inertia_eff: f64) -> f64 {
    (8.0 * v0 * inertia_eff).powf(-0.25)
}

/// `ΔL` of the single-dimer Dicke ground state at a frozen angle, the
/// `J → ∞` plateau of the full problem.
pub fn bo_delta_l_limit(params: &ModelParams, trunc: &TruncationSpec) -> Result<f64> {
    let params = params.validate()?;
    if params.n_dimers != 1 {
        return Err(Error::Unsupported("the BO plateau is defined for one dimer".into()));
    }
    let basis = Arc::new(build_frozen_basis(trunc, 1)?);
    let h = build_frozen(&params.with_inertia(Inertia::Frozen), &basis, &[0.0])?;
    let gs = ground_state_with(&h, &SolverOptions::default().with_tol(1e-11))?;
    optical_dl(&gs.state, &basis)
}

/// CSV with columns `theta,V,psi`; `psi` is left empty without a solution.
pub fn write_surface_csv<W: Write>(surface: &PotentialSurface, ground: Option<&MathieuGround>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["theta", "V", "psi"])?;
    for (j, (t, v)) in surface.theta.iter().zip(&surface.energy).enumerate() {
        let psi = ground.map(|g| format!("{:.12e}", g.psi[j])).unwrap_or_default();
        out.write_record([format!("{t:.12e}"), format!("{v:.12e}"), psi])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nematic(points: usize, v0: f64) -> PotentialSurface {
        PotentialSurface::from_fn(points, PI, SurfaceSource::RpaG4, |t| -v0 * t.cos().powi(2))
    }

    #[test]
    fn free_rotor() {
        let s = nematic(128, 0.0);
        let g = mathieu_ground(&s, 3.0).unwrap();
        assert!(g.energy.abs() < 1e-14);
        assert!(g.angle_dispersion.is_infinite());
        let mean = g.psi.iter().sum::<f64>() / g.psi.len() as f64;
        assert!(g.psi.iter().all(|p| (p - mean).abs() < 1e-12));
        assert!((g.norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn harmonic_limit() {
        for vi in [1e4, 1e5, 1e6] {
            let v0 = 1e-3;
            let s = nematic(1024, v0);
            let g = mathieu_ground(&s, vi / v0).unwrap();
            let h = harmonic_dispersion(v0, vi / v0);
            assert!(
                (g.angle_dispersion / h - 1.0).abs() < 0.02,
                "{} vs {h}",
                g.angle_dispersion
            );
            assert!((g.norm - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn wavefunction_shape() {
        let g = mathieu_ground(&nematic(256, 0.5), 20.0).unwrap();
        assert!((g.psi[0] - g.psi[256]).abs() < 1e-12);
        // peaks at the minima θ = 0, π
        let mid = g.psi[128];
        assert!(g.psi[0] > mid);
    }

    #[test]
    fn mathieu_characteristic_value() {
        // V = −V₀/2 − (V₀/2)cos 2θ couples m = 0 to m = ±1 with −V₀/4
        let v0 = 0.02;
        let i = 1.0;
        let g = mathieu_ground(&nematic(128, v0), i).unwrap();
        let expect = -v0 / 2.0 - 2.0 * (v0 / 4.0).powi(2) / (4.0 / (2.0 * i));
        assert!((g.energy - expect).abs() < 1e-7, "{} vs {expect}", g.energy);
    }

    #[test]
    fn finite_difference_agrees() {
        let s = nematic(512, 2.0);
        let pw = mathieu_ground(&s, 5.0).unwrap().energy;
        let fd = mathieu_ground_fd(&s, 5.0).unwrap();
        assert!((pw - fd).abs() < 1e-6, "{pw} vs {fd}");
    }

    #[test]
    fn dispersion_ignores_origin() {
        let s = PotentialSurface::from_fn(256, PI, SurfaceSource::RpaG4, |t| {
            -0.3 * t.cos().powi(2) + 0.05 * (4.0 * t).sin()
        });
        let a = mathieu_ground(&s, 30.0).unwrap();
        for shift in [17, 64, 200] {
            let b = mathieu_ground(&s.rotated(shift), 30.0).unwrap();
            assert!((a.angle_dispersion - b.angle_dispersion).abs() < 1e-10);
            assert!((a.energy - b.energy).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_is_reported() {
        let s = nematic(16, 1e3);
        assert!(matches!(mathieu_ground(&s, 1e3), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn deeper_well_localizes() {
        let mut last = f64::INFINITY;
        for v0 in [1e-4, 1e-3, 1e-2, 1e-1] {
            let d = mathieu_ground(&nematic(256, v0), 1e3).unwrap().angle_dispersion;
            assert!(d < last);
            last = d;
        }
    }

    /// Two rotors on a plane-wave grid `(k₁, k₂)` with `V(φ₁ − φ₂)`.
    fn two_rotor_ground(v: &PotentialSurface, inertia: f64, kmax: i64) -> f64 {
        let n = v.points();
        let vk = fourier(&v.energy[..n], n / 2);
        let side = (2 * kmax + 1) as usize;
        let idx = |k1: i64, k2: i64| ((k1 + kmax) as usize) * side + (k2 + kmax) as usize;
        let mut h = DMatrix::<C64>::zeros(side * side, side * side);
        for k1 in -kmax..=kmax {
            for k2 in -kmax..=kmax {
                let a = idx(k1, k2);
                h[(a, a)] += C64::new(((k1 * k1 + k2 * k2) as f64) / (2.0 * inertia), 0.0);
                // e^{2im(φ₁−φ₂)} moves k₁ by 2m and k₂ by −2m
                for m in -(n as i64 / 2)..=(n as i64 / 2) {
                    let (t1, t2) = (k1 + 2 * m, k2 - 2 * m);
                    if t1.abs() <= kmax && t2.abs() <= kmax {
                        h[(idx(t1, t2), a)] += vk[(m + n as i64 / 2) as usize];
                    }
                }
            }
        }
        h.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn relative_coordinate_separates() {
        let s = PotentialSurface::from_fn(64, PI, SurfaceSource::RpaG4, |t| -0.4 * t.cos().powi(2));
        let j = 2.0;
        let two = two_rotor_ground(&s, j, 12);
        let one = mathieu_ground(&s, j / 2.0).unwrap().energy;
        assert!((two - one).abs() < 1e-8, "{two} vs {one}");
    }

    #[test]
    fn rpa_surface_has_nematic_minima() {
        let p = ModelParams::new(1.0, 0.1, 0.0, Inertia::Frozen, 2);
        let s = potential_surface(&p, 64, SurfaceSource::RpaG4, &TruncationSpec::new(4, 0)).unwrap();
        let min = s.energy.iter().copied().fold(f64::MAX, f64::min);
        assert_eq!(s.energy[0], min);
        assert!(s.energy[32] > min);
        assert!((s.energy[64] - s.energy[0]).abs() < 1e-10);
        let flat = potential_surface(&p.with_g(0.0), 16, SurfaceSource::RpaG4, &TruncationSpec::new(4, 0)).unwrap();
        assert!(flat.amplitude() == 0.0);
    }

    #[test]
    fn weak_surface_matches_rpa_at_frozen_rotors() {
        let p = ModelParams::new(1.0, 0.2, 0.3, Inertia::Frozen, 2);
        let t = TruncationSpec::new(2, 0);
        let a = potential_surface(&p, 32, SurfaceSource::RpaG4, &t).unwrap();
        let b = potential_surface(&p, 32, SurfaceSource::WeakG4, &t).unwrap();
        for (x, y) in a.energy.iter().zip(&b.energy) {
            assert!((x - y).abs() < 1e-18);
        }
    }

    #[test]
    fn exact_surface_is_flat_without_coupling() {
        let p = ModelParams::new(1.0, 0.0, 0.3, Inertia::Frozen, 2);
        let s = potential_surface(&p, 8, SurfaceSource::ExactDicke, &TruncationSpec::new(2, 0)).unwrap();
        assert!(s.amplitude() < 1e-14);
    }

    #[test]
    fn plateau_vanishes_without_coupling() {
        let p = ModelParams::new(1.0, 0.0, 0.1, Inertia::Frozen, 1);
        assert_eq!(bo_delta_l_limit(&p, &TruncationSpec::new(4, 0)).unwrap(), 0.0);
        let p = p.with_g(0.1);
        let w = weak_corrections(&p).dl;
        let bo = bo_delta_l_limit(&p, &TruncationSpec::new(6, 0)).unwrap();
        assert!((bo / w - 1.0).abs() < 0.02, "{bo} vs {w}");
    }

    #[test]
    fn csv_columns() {
        let s = nematic(8, 1.0);
        let g = mathieu_ground(&nematic(64, 1.0), 1.0).ok();
        let mut buf = Vec::new();
        write_surface_csv(&s, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,V,psi\n"));
        assert_eq!(text.lines().count(), 10);
        assert!(g.is_some());
    }
}
