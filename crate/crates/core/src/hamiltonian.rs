//! Hamiltonian assembly in the circular, dipole-gauge, co-rotating and
//! frozen-angle representations.
//!
//! The circular form is the production path:
//!
//! ```text
//! H = (Δ/2) Σ σ_z + ω_r r†r + ω_l l†l + Σ p_i²/(2J)
//!     − i c Σ σ_x,i [ω_r r e^{iφ_i} − ω_l l e^{−iφ_i}] + h.c.
//!     + (g²/8) [1 + (1/N) Σ_{i≠j} σ_x,i σ_x,j cos(φ_i − φ_j)]
//! ```
//!
//! with `c = g / √(8N(ω_r + ω_l))`. Every term conserves
//! `n_r − n_l + Σ k_i`, so sector catalogs are closed under `H`.

use std::sync::Arc;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{BasisCatalog, BasisKind, BasisState, SharedBasis};
use crate::model::{circular_frequencies, ModelParams};
use crate::sparse::OperatorMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    DipoleGauge,
    Circular,
    Corotating,
    FrozenAngles,
}

#[derive(Debug, Clone)]
pub struct HamiltonianBundle {
    pub matrix: OperatorMatrix,
    pub representation: Representation,
    pub params: ModelParams,
    pub basis: SharedBasis,
    /// Angles used as parameters by the frozen-angle representation.
    pub angles: Option<Vec<f64>>,
}

impl HamiltonianBundle {
    pub fn dimension(&self) -> usize {
        self.matrix.dim()
    }

    pub fn sector(&self) -> Option<i64> {
        self.basis.sector()
    }
}

/// Scalar prefactors shared by all representations.
struct Couplings {
    half_delta: f64,
    omega_r: f64,
    omega_l: f64,
    kinetic: f64,
    /// `g / √(8N(ω_r+ω_l))`
    linear: f64,
    /// `g² / (8N)`
    pair: f64,
    /// `g² / 8`
    constant: f64,
}

impl Couplings {
    fn new(p: &ModelParams) -> Self {
        let (omega_r, omega_l) = circular_frequencies(p.b_field);
        let n = p.n_dimers as f64;
        let g = p.effective_coupling();
        Self {
            half_delta: p.delta / 2.0,
            omega_r,
            omega_l,
            kinetic: p.inertia.kinetic_prefactor(),
            linear: g / (8.0 * n * (omega_r + omega_l)).sqrt(),
            pair: g * g / (8.0 * n),
            constant: g * g / 8.0,
        }
    }

    fn spin_energy(&self, s: &BasisState, n_dimers: usize) -> f64 {
        let ups = (s.spins & ((1u64 << n_dimers) - 1)).count_ones() as f64;
        self.half_delta * (2.0 * ups - n_dimers as f64)
    }

    fn rotor_energy(&self, k: &[i32]) -> f64 {
        if self.kinetic == 0.0 {
            return 0.0;
        }
        self.kinetic * k.iter().map(|&k| (k as f64).powi(2)).sum::<f64>()
    }
}

/// Collects matrix elements; `hop` also stores the Hermitian partner.
struct Assembler<'a> {
    basis: &'a BasisCatalog,
    triplets: Vec<(usize, usize, C64)>,
}

impl<'a> Assembler<'a> {
    fn new(basis: &'a BasisCatalog) -> Self {
        Self {
            basis,
            triplets: Vec::with_capacity(basis.dimension() * 8),
        }
    }

    fn check_sector(&self, target: &BasisState) -> Result<()> {
        if let (Some(expected), BasisKind::Circular) = (self.basis.sector(), self.basis.kind()) {
            let found = target.total_l();
            if found != expected {
                return Err(Error::SectorMismatch { expected, found });
            }
        }
        Ok(())
    }

    fn diag(&mut self, col: usize, v: f64) {
        self.triplets.push((col, col, C64::new(v, 0.0)));
    }

    /// `⟨target|H|source⟩ = amp` plus its conjugate partner.
    fn hop(&mut self, col: usize, target: &BasisState, amp: C64) -> Result<()> {
        if let Some(row) = self.basis.index_of(target) {
            self.triplets.push((row, col, amp));
            self.triplets.push((col, row, amp.conj()));
        } else {
            self.check_sector(target)?;
        }
        Ok(())
    }

    /// One-sided element, for terms whose partner is generated from the
    /// other endpoint.
    fn element(&mut self, col: usize, target: &BasisState, amp: C64) {
        if let Some(row) = self.basis.index_of(target) {
            self.triplets.push((row, col, amp));
        }
    }

    fn finish(self) -> OperatorMatrix {
        OperatorMatrix::from_triplets(self.basis.dimension(), self.triplets, true)
    }
}

fn check_basis(params: &ModelParams, basis: &BasisCatalog, kind: BasisKind) -> Result<()> {
    if basis.kind() != kind {
        return Err(Error::Unsupported(format!(
            "expected a {kind:?} catalog, got {:?}",
            basis.kind()
        )));
    }
    if basis.n_dimers() != params.n_dimers {
        return Err(crate::error::domain(
            "n_dimers",
            format!(
                "catalog built for {} dimers, params have {}",
                basis.n_dimers(),
                params.n_dimers
            ),
        ));
    }
    Ok(())
}

fn flipped(s: &BasisState, site: usize) -> BasisState {
    let mut t = s.clone();
    t.spins ^= 1 << site;
    t
}

fn rotor_in_range(t: &BasisState, k_max: i32) -> bool {
    t.k.iter().all(|k| k.abs() <= k_max)
}

/// Photon-spin-rotor coupling `a e^{iφ}`-type hops of the lab-frame circular
/// Hamiltonian, plus the pair term.
fn circular_hops(asm: &mut Assembler<'_>, cp: &Couplings, col: usize, s: &BasisState, n: usize) -> Result<()> {
    let k_max = asm.basis.truncation().k_max;
    let minus_i = C64::new(0.0, -1.0);
    for i in 0..n {
        if s.n_r > 0 {
            // −i c ω_r σ_x r e^{iφ_i}
            let mut t = flipped(s, i);
            t.n_r -= 1;
            t.k[i] += 1;
            if rotor_in_range(&t, k_max) {
                let amp = minus_i * cp.linear * cp.omega_r * (s.n_r as f64).sqrt();
                asm.hop(col, &t, amp)?;
            }
        }
        if s.n_l > 0 {
            // +i c ω_l σ_x l e^{−iφ_i}
            let mut t = flipped(s, i);
            t.n_l -= 1;
            t.k[i] -= 1;
            if rotor_in_range(&t, k_max) {
                let amp = -minus_i * cp.linear * cp.omega_l * (s.n_l as f64).sqrt();
                asm.hop(col, &t, amp)?;
            }
        }
    }
    pair_hops(asm, cp, col, s, n, k_max)
}

/// `(g²/8N) Σ_{i<j} σ_x,i σ_x,j (e^{i(φ_i−φ_j)} + h.c.)` with rotor states.
fn pair_hops(asm: &mut Assembler<'_>, cp: &Couplings, col: usize, s: &BasisState, n: usize, k_max: i32) -> Result<()> {
    if cp.pair == 0.0 {
        return Ok(());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut t = flipped(&flipped(s, i), j);
            t.k[i] += 1;
            t.k[j] -= 1;
            if rotor_in_range(&t, k_max) {
                asm.hop(col, &t, C64::new(cp.pair, 0.0))?;
            }
        }
    }
    Ok(())
}

/// Lab-frame Hamiltonian in circular photon modes.
pub fn build_circular(params: &ModelParams, basis: &SharedBasis) -> Result<HamiltonianBundle> {
    let params = params.validate()?;
    check_basis(&params, basis, BasisKind::Circular)?;
    let cp = Couplings::new(&params);
    let n = params.n_dimers;
    let mut asm = Assembler::new(basis);
    for (col, s) in basis.states().iter().enumerate() {
        let d = cp.spin_energy(s, n)
            + cp.omega_r * s.n_r as f64
            + cp.omega_l * s.n_l as f64
            + cp.rotor_energy(&s.k)
            + cp.constant;
        asm.diag(col, d);
        circular_hops(&mut asm, &cp, col, s, n)?;
    }
    Ok(HamiltonianBundle {
        matrix: asm.finish(),
        representation: Representation::Circular,
        params,
        basis: Arc::clone(basis),
        angles: None,
    })
}

/// Dicke Hamiltonian with the dimer angles treated as fixed parameters
/// (rotor kinetic energy omitted).
pub fn build_frozen(params: &ModelParams, basis: &SharedBasis, angles: &[f64]) -> Result<HamiltonianBundle> {
    let params = params.validate()?;
    check_basis(&params, basis, BasisKind::FrozenAngles)?;
    if angles.len() != params.n_dimers {
        return Err(crate::error::domain(
            "angles",
            format!("need {} angles, got {}", params.n_dimers, angles.len()),
        ));
    }
    let cp = Couplings::new(&params);
    let n = params.n_dimers;
    let phases: Vec<C64> = angles.iter().map(|&a| C64::from_polar(1.0, a)).collect();
    let minus_i = C64::new(0.0, -1.0);
    let mut asm = Assembler::new(basis);
    for (col, s) in basis.states().iter().enumerate() {
        let d = cp.spin_energy(s, n) + cp.omega_r * s.n_r as f64 + cp.omega_l * s.n_l as f64 + cp.constant;
        asm.diag(col, d);
        for (i, phase) in phases.iter().enumerate() {
            if s.n_r > 0 {
                let mut t = flipped(s, i);
                t.n_r -= 1;
                let amp = minus_i * cp.linear * cp.omega_r * (s.n_r as f64).sqrt() * phase;
                asm.hop(col, &t, amp)?;
            }
            if s.n_l > 0 {
                let mut t = flipped(s, i);
                t.n_l -= 1;
                let amp = -minus_i * cp.linear * cp.omega_l * (s.n_l as f64).sqrt() * phase.conj();
                asm.hop(col, &t, amp)?;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let t = flipped(&flipped(s, i), j);
                let amp = 2.0 * cp.pair * (angles[i] - angles[j]).cos();
                asm.element(col, &t, C64::new(amp, 0.0));
            }
        }
    }
    Ok(HamiltonianBundle {
        matrix: asm.finish(),
        representation: Representation::FrozenAngles,
        params,
        basis: Arc::clone(basis),
        angles: Some(angles.to_vec()),
    })
}

/// Dipole-gauge Hamiltonian in the Fock basis of two linearly polarized
/// modes.
///
/// The modes are quantized at the gyrotropic frequency `Ω = √(1+B²)`:
/// `q = (a + a†)/√(2Ω)`, `π = i√(Ω/2)(a† − a)`, so that the cavity part is
/// `Ω(n_x + n_y) + B L_z`. The zero-point energy `Ω` is dropped, which puts
/// the spectrum on the same footing as the normal-ordered circular form.
/// Under a total-photon cap the result is exactly unitarily equivalent to
/// [`build_circular`] on the unrestricted catalog with the same cutoffs.
pub fn build_dipole(params: &ModelParams, basis: &SharedBasis) -> Result<HamiltonianBundle> {
    let params = params.validate()?;
    check_basis(&params, basis, BasisKind::Linear)?;
    let cp = Couplings::new(&params);
    let n = params.n_dimers;
    let b = params.b_field;
    let omega = b.hypot(1.0);
    let k_max = basis.truncation().k_max;
    let trunc = *basis.truncation();
    let in_cutoff = |t: &BasisState| {
        t.n_r <= trunc.n_max && t.n_l <= trunc.n_max && trunc.n_total.is_none_or(|c| t.n_r + t.n_l <= c)
    };

    // Coefficients of P_x = π_x − B q_y and P_y = π_y + B q_x on the ladder
    // operators [a_x, a_x†, a_y, a_y†].
    let i = C64::new(0.0, 1.0);
    let pi_amp = (omega / 2.0).sqrt();
    let q_amp = 1.0 / (2.0 * omega).sqrt();
    let px = [-i * pi_amp, i * pi_amp, C64::from(-b * q_amp), C64::from(-b * q_amp)];
    let py = [C64::from(b * q_amp), C64::from(b * q_amp), -i * pi_amp, i * pi_amp];
    let coupling = -params.effective_coupling() / (2.0 * (n as f64).sqrt());

    let mut asm = Assembler::new(basis);
    for (col, s) in basis.states().iter().enumerate() {
        let d = cp.spin_energy(s, n) + omega * (s.n_r + s.n_l) as f64 + cp.rotor_energy(&s.k) + cp.constant;
        asm.diag(col, d);

        // B L_z = i B a_x a_y† + h.c.
        if s.n_r > 0 && b != 0.0 {
            let mut t = s.clone();
            t.n_r -= 1;
            t.n_l += 1;
            if in_cutoff(&t) {
                let amp = i * b * (s.n_r as f64).sqrt() * (t.n_l as f64).sqrt();
                asm.hop(col, &t, amp)?;
            }
        }

        // −(g/2√N) Σ σ_x,i [P_x cos φ_i + P_y sin φ_i], with
        // cos φ = (R + R†)/2 and sin φ = −i (R − R†)/2.
        for site in 0..n {
            for (ladder, (&cx, &cy)) in px.iter().zip(&py).enumerate() {
                let mut t = flipped(s, site);
                let amp_ladder = match ladder {
                    0 if s.n_r > 0 => {
                        t.n_r -= 1;
                        (s.n_r as f64).sqrt()
                    }
                    1 => {
                        t.n_r += 1;
                        (t.n_r as f64).sqrt()
                    }
                    2 if s.n_l > 0 => {
                        t.n_l -= 1;
                        (s.n_l as f64).sqrt()
                    }
                    3 => {
                        t.n_l += 1;
                        (t.n_l as f64).sqrt()
                    }
                    _ => continue,
                };
                if !in_cutoff(&t) {
                    continue;
                }
                for shift in [1i32, -1] {
                    let mut u = t.clone();
                    u.k[site] += shift;
                    if u.k[site].abs() > k_max {
                        continue;
                    }
                    let angular = cx * 0.5 + cy * (-i * 0.5 * shift as f64);
                    asm.element(col, &u, angular * amp_ladder * coupling);
                }
            }
        }
        pair_hops(&mut asm, &cp, col, s, n, k_max)?;
    }
    Ok(HamiltonianBundle {
        matrix: asm.finish(),
        representation: Representation::DipoleGauge,
        params,
        basis: Arc::clone(basis),
        angles: None,
    })
}

/// Single-dimer Hamiltonian in the frame co-rotating with the field,
///
/// ```text
/// H = (p − L)²/(2J) + (Δ/2)σ_z + ω_r r†r + ω_l l†l
///     − i q σ_x [ω_r (r − r†) − ω_l (l − l†)] + g²/8
/// ```
///
/// on a catalog produced by [`crate::hilbert::corotating_basis`].
pub fn build_corotating(params: &ModelParams, basis: &SharedBasis) -> Result<HamiltonianBundle> {
    let params = params.validate()?;
    if params.n_dimers != 1 {
        return Err(Error::Unsupported(
            "co-rotating representation is implemented for a single dimer".into(),
        ));
    }
    check_basis(&params, basis, BasisKind::Corotating)?;
    let cp = Couplings::new(&params);
    let minus_i = C64::new(0.0, -1.0);
    let mut asm = Assembler::new(basis);
    for (col, s) in basis.states().iter().enumerate() {
        let mech = s.k[0] as f64 - s.optical_l() as f64;
        let d = cp.kinetic * mech * mech
            + cp.spin_energy(s, 1)
            + cp.omega_r * s.n_r as f64
            + cp.omega_l * s.n_l as f64
            + cp.constant;
        asm.diag(col, d);
        if s.n_r > 0 {
            let mut t = flipped(s, 0);
            t.n_r -= 1;
            asm.hop(col, &t, minus_i * cp.linear * cp.omega_r * (s.n_r as f64).sqrt())?;
        }
        if s.n_l > 0 {
            let mut t = flipped(s, 0);
            t.n_l -= 1;
            asm.hop(col, &t, -minus_i * cp.linear * cp.omega_l * (s.n_l as f64).sqrt())?;
        }
    }
    Ok(HamiltonianBundle {
        matrix: asm.finish(),
        representation: Representation::Corotating,
        params,
        basis: Arc::clone(basis),
        angles: None,
    })
}

/// Bogoliubov map from circular to unit-frequency linear ladder operators,
/// `(a_x, a_y, a_x†, a_y†)ᵀ = U (r, l, r†, l†)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMatrix {
    pub matrix: Matrix4<C64>,
    pub u1: f64,
    pub u2: f64,
}

impl BogoliubovMatrix {
    /// `max |U K U† − K|` with `K = diag(1, 1, −1, −1)`; zero when the map
    /// preserves the bosonic commutators.
    pub fn symplectic_residual(&self) -> f64 {
        let k = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0).map(C64::from));
        let lhs = self.matrix * k * self.matrix.adjoint();
        (lhs - k).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn bogoliubov(b: f64) -> BogoliubovMatrix {
    let (wr, wl) = circular_frequencies(b);
    let s = wr + wl;
    let u1 = (2.0 + s) / (4.0 * s.sqrt());
    let u2 = (wr - wl).powi(2) / (4.0 * s.sqrt() * (2.0 + s));
    let r = |x: f64| C64::new(x, 0.0);
    let im = |x: f64| C64::new(0.0, x);
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        r(u1),   r(u1),   r(-u2),  r(-u2),
        im(u1),  im(-u1), im(u2),  im(-u2),
        r(-u2),  r(-u2),  r(u1),   r(u1),
        im(-u2), im(u2),  im(-u1), im(u1),
    );
    BogoliubovMatrix { matrix, u1, u2 }
}
