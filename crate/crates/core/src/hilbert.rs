//! Truncated many-body basis: two bosonic modes, N spins and N planar rotors.
//!
//! Catalogs are usually restricted to one sector of the total angular
//! momentum `𝓛 = n_r − n_l + Σ k_i`. Every operator that conserves `𝓛` then
//! maps the catalog into itself, so the conservation law holds by
//! construction rather than to numerical precision.
//!
//! Spin configurations are stored as bit masks: bit `i` belongs to dimer `i`
//! (site 0 is the least significant bit) and a set bit means spin up.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::OperatorMatrix;

pub const DEFAULT_MAX_DIMENSION: usize = 5_000_000;

fn default_k_scan() -> u32 {
    2
}

fn default_max_dimension() -> usize {
    DEFAULT_MAX_DIMENSION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Fock cutoff per mode.
    pub n_max: u32,
    /// Rotor cutoff, `|k_i| <= k_max`.
    pub k_max: i32,
    /// Restrict enumeration to one total angular momentum sector.
    #[serde(default)]
    pub sector: Option<i64>,
    /// Half-width of the sector range used by ground-sector scans.
    #[serde(default = "default_k_scan")]
    pub k_scan: u32,
    /// Optional cap on the total photon number `n_r + n_l`. Such a cap is
    /// invariant under mode rotations, which makes circular and linear
    /// catalogs span the same space.
    #[serde(default)]
    pub n_total: Option<u32>,
    #[serde(default = "default_max_dimension")]
    pub max_dimension: usize,
}

impl TruncationSpec {
    pub fn new(n_max: u32, k_max: i32) -> Self {
        Self {
            n_max,
            k_max,
            sector: None,
            k_scan: 2,
            n_total: None,
            max_dimension: DEFAULT_MAX_DIMENSION,
        }
    }

    pub fn in_sector(mut self, sector: i64) -> Self {
        self.sector = Some(sector);
        self
    }

    pub fn unrestricted(mut self) -> Self {
        self.sector = None;
        self
    }

    pub fn with_n_total(mut self, cap: u32) -> Self {
        self.n_total = Some(cap);
        self
    }

    pub fn with_k_scan(mut self, k_scan: u32) -> Self {
        self.k_scan = k_scan;
        self
    }

    /// Desk-scale defaults: (8, 6) for one dimer, (6, 4) otherwise.
    pub fn default_for(n_dimers: usize) -> Self {
        if n_dimers <= 1 {
            Self::new(8, 6)
        } else {
            Self::new(6, 4)
        }
    }

    /// Same truncation with both cutoffs enlarged, used by convergence checks.
    pub fn enlarged(mut self, dn: u32, dk: i32) -> Self {
        self.n_max += dn;
        self.k_max += dk;
        if let Some(cap) = self.n_total.as_mut() {
            *cap += dn;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 0 {
            return Err(crate::error::domain("k_max", "must be >= 0"));
        }
        Ok(())
    }

    fn photons_allowed(&self, n_a: u32, n_b: u32) -> bool {
        n_a <= self.n_max && n_b <= self.n_max && self.n_total.is_none_or(|cap| n_a + n_b <= cap)
    }
}

/// Sectors visited by a ground-sector scan: `−k_scan ..= k_scan`.
pub fn sector_scan_range(trunc: &TruncationSpec) -> Vec<i64> {
    let w = trunc.k_scan as i64;
    (-w..=w).collect()
}

/// Which physical degrees of freedom a catalog describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// Circular photon modes `(n_r, n_l)` and lab-frame rotor momenta.
    Circular,
    /// Linear photon modes: the `n_r`/`n_l` slots hold `(n_x, n_y)`.
    Linear,
    /// Circular modes with the rotor angles frozen as parameters; `k` is empty.
    FrozenAngles,
    /// Single dimer in the frame co-rotating with the field; `k = [p]` holds
    /// the canonical momentum conjugate to the rotor angle in that frame.
    Corotating,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub n_r: u32,
    pub n_l: u32,
    pub spins: u64,
    pub k: Vec<i32>,
}

impl BasisState {
    pub fn spin_up(&self, site: usize) -> bool {
        self.spins >> site & 1 == 1
    }

    /// `n_r − n_l`
    pub fn optical_l(&self) -> i64 {
        self.n_r as i64 - self.n_l as i64
    }

    pub fn rotor_sum(&self) -> i64 {
        self.k.iter().map(|&k| k as i64).sum()
    }

    /// Total angular momentum in the circular lab frame.
    pub fn total_l(&self) -> i64 {
        self.optical_l() + self.rotor_sum()
    }
}

#[derive(Debug, Clone)]
pub struct BasisCatalog {
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
    sector: Option<i64>,
    n_dimers: usize,
    kind: BasisKind,
    trunc: TruncationSpec,
}

impl BasisCatalog {
    fn from_states(
        states: Vec<BasisState>,
        sector: Option<i64>,
        n_dimers: usize,
        kind: BasisKind,
        trunc: TruncationSpec,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptySector {
                sector: sector.unwrap_or(0),
            });
        }
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self {
            states,
            index,
            sector,
            n_dimers,
            kind,
            trunc,
        })
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.states[i]
    }

    pub fn index_of(&self, s: &BasisState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Common total angular momentum, `None` for mixed catalogs.
    pub fn sector(&self) -> Option<i64> {
        self.sector
    }

    pub fn n_dimers(&self) -> usize {
        self.n_dimers
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn truncation(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn has_rotors(&self) -> bool {
        matches!(self.kind, BasisKind::Circular | BasisKind::Linear)
    }

    /// Debug dump: `ordinal,n_r,n_l,spins,k_1..k_N`. The spin string is
    /// printed most significant site first.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["ordinal".to_string(), "n_r".into(), "n_l".into(), "spins".into()];
        let n_k = self.states[0].k.len();
        header.extend((1..=n_k).map(|i| format!("k_{i}")));
        wr.write_record(&header)?;
        for (i, s) in self.states.iter().enumerate() {
            let mut rec = vec![
                i.to_string(),
                s.n_r.to_string(),
                s.n_l.to_string(),
                format!("{:0width$b}", s.spins, width = self.n_dimers),
            ];
            rec.extend(s.k.iter().map(|k| k.to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn push_rotor_vectors(k_max: i32, n: usize, target_sum: Option<i64>, prefix: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
    if prefix.len() == n {
        if target_sum.is_none_or(|t| prefix.iter().map(|&k| k as i64).sum::<i64>() == t) {
            out.push(prefix.clone());
        }
        return;
    }
    let remaining = (n - prefix.len() - 1) as i64;
    let partial: i64 = prefix.iter().map(|&k| k as i64).sum();
    for k in -k_max..=k_max {
        if let Some(t) = target_sum {
            let rest = t - partial - k as i64;
            if rest.abs() > remaining * k_max as i64 {
                continue;
            }
        }
        prefix.push(k);
        push_rotor_vectors(k_max, n, target_sum, prefix, out);
        prefix.pop();
    }
}

fn enumerate(trunc: &TruncationSpec, n_dimers: usize, with_rotors: bool) -> Result<Vec<BasisState>> {
    trunc.validate()?;
    if n_dimers == 0 || n_dimers > 63 {
        return Err(crate::error::domain("n_dimers", "must lie in 1..=63"));
    }
    let mut states = Vec::new();
    let mut prefix = Vec::with_capacity(n_dimers);
    let mut rotor_vectors = Vec::new();
    for n_r in 0..=trunc.n_max {
        for n_l in 0..=trunc.n_max {
            if !trunc.photons_allowed(n_r, n_l) {
                continue;
            }
            rotor_vectors.clear();
            if with_rotors {
                let target = trunc.sector.map(|s| s - (n_r as i64 - n_l as i64));
                push_rotor_vectors(trunc.k_max, n_dimers, target, &mut prefix, &mut rotor_vectors);
            } else {
                rotor_vectors.push(Vec::new());
            }
            if rotor_vectors.is_empty() {
                continue;
            }
            for spins in 0..(1u64 << n_dimers) {
                for k in &rotor_vectors {
                    states.push(BasisState {
                        n_r,
                        n_l,
                        spins,
                        k: k.clone(),
                    });
                    if states.len() > trunc.max_dimension {
                        return Err(Error::DimensionOverflow {
                            cap: trunc.max_dimension,
                        });
                    }
                }
            }
        }
    }
    Ok(states)
}

/// Circular-mode catalog with rotors, restricted to `trunc.sector` if set.
pub fn build_basis(trunc: &TruncationSpec, n_dimers: usize) -> Result<BasisCatalog> {
    let states = enumerate(trunc, n_dimers, true)?;
    BasisCatalog::from_states(states, trunc.sector, n_dimers, BasisKind::Circular, *trunc)
}

/// Linear-polarization catalog for the dipole-gauge Hamiltonian. The
/// angular momentum is not diagonal here, so no sector may be requested.
pub fn build_linear_basis(trunc: &TruncationSpec, n_dimers: usize) -> Result<BasisCatalog> {
    if trunc.sector.is_some() {
        return Err(Error::Unsupported(
            "linear-mode catalogs cannot be sector restricted".into(),
        ));
    }
    let states = enumerate(trunc, n_dimers, true)?;
    BasisCatalog::from_states(states, None, n_dimers, BasisKind::Linear, *trunc)
}

/// Photons and spins only, for Hamiltonians with the angles as parameters.
pub fn build_frozen_basis(trunc: &TruncationSpec, n_dimers: usize) -> Result<BasisCatalog> {
    let mut t = *trunc;
    t.sector = None;
    let states = enumerate(&t, n_dimers, false)?;
    BasisCatalog::from_states(states, None, n_dimers, BasisKind::FrozenAngles, t)
}

/// Re-label a single-dimer circular catalog in the co-rotating frame,
/// `p = k + n_r − n_l`. The state set is the same, so both frames carry
/// exactly the same truncation.
pub fn corotating_basis(circular: &BasisCatalog) -> Result<BasisCatalog> {
    if circular.kind != BasisKind::Circular || circular.n_dimers != 1 {
        return Err(Error::Unsupported(
            "co-rotating frame is defined for a single dimer in a circular catalog".into(),
        ));
    }
    let mut states: Vec<BasisState> = circular
        .states
        .iter()
        .map(|s| BasisState {
            n_r: s.n_r,
            n_l: s.n_l,
            spins: s.spins,
            k: vec![s.k[0] + s.optical_l() as i32],
        })
        .collect();
    states.sort();
    BasisCatalog::from_states(states, circular.sector, 1, BasisKind::Corotating, circular.trunc)
}

/// Elementary and collective operators on a catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    AnnihilateR,
    AnnihilateL,
    CreateR,
    CreateL,
    SigmaX(usize),
    SigmaY(usize),
    SigmaZ(usize),
    RotorMomentum(usize),
    /// `e^{iφ_i}`: `k_i → k_i + 1`.
    RotorRaise(usize),
    /// `e^{−iφ_i}`: `k_i → k_i − 1`.
    RotorLower(usize),
    /// `r†r − l†l`
    OpticalL,
    /// `Σ p_φi`
    MechL,
    TotalL,
    NumberR,
    NumberL,
}

type Terms = Vec<(BasisState, C64)>;

fn check_site(site: usize, basis: &BasisCatalog) -> Result<()> {
    if site >= basis.n_dimers {
        return Err(Error::SiteOutOfRange {
            site,
            n_dimers: basis.n_dimers,
        });
    }
    Ok(())
}

fn require_lab_rotors(basis: &BasisCatalog, what: &str) -> Result<()> {
    if !basis.has_rotors() {
        return Err(Error::Unsupported(format!("{what} needs lab-frame rotor states")));
    }
    Ok(())
}

fn ladder(state: &BasisState, mode_a: bool, raise: bool, trunc: &TruncationSpec) -> Option<(BasisState, f64)> {
    ladder_raw(state, mode_a, raise).filter(|(s, _)| trunc.photons_allowed(s.n_r, s.n_l))
}

/// Ladder step without the cutoff check, for intermediate states of
/// products that return inside the catalog.
fn ladder_raw(state: &BasisState, mode_a: bool, raise: bool) -> Option<(BasisState, f64)> {
    let mut s = state.clone();
    let n = if mode_a { &mut s.n_r } else { &mut s.n_l };
    let amp;
    if raise {
        *n += 1;
        amp = (*n as f64).sqrt();
    } else {
        if *n == 0 {
            return None;
        }
        amp = (*n as f64).sqrt();
        *n -= 1;
    }
    Some((s, amp))
}

fn shift_rotor(state: &BasisState, site: usize, dk: i32, k_max: i32) -> Option<BasisState> {
    let mut s = state.clone();
    s.k[site] += dk;
    (s.k[site].abs() <= k_max).then_some(s)
}

fn apply_kind(kind: OperatorKind, input: &BasisState, basis: &BasisCatalog) -> Result<Terms> {
    let trunc = &basis.trunc;
    let one = C64::new(1.0, 0.0);
    let diag = |v: f64| vec![(input.clone(), C64::new(v, 0.0))];
    Ok(match kind {
        OperatorKind::AnnihilateR | OperatorKind::AnnihilateL | OperatorKind::CreateR | OperatorKind::CreateL => {
            let mode_a = matches!(kind, OperatorKind::AnnihilateR | OperatorKind::CreateR);
            let raise = matches!(kind, OperatorKind::CreateR | OperatorKind::CreateL);
            ladder(input, mode_a, raise, trunc)
                .map(|(s, a)| vec![(s, C64::new(a, 0.0))])
                .unwrap_or_default()
        }
        OperatorKind::NumberR => diag(input.n_r as f64),
        OperatorKind::NumberL => diag(input.n_l as f64),
        OperatorKind::SigmaX(i) | OperatorKind::SigmaY(i) | OperatorKind::SigmaZ(i) => {
            check_site(i, basis)?;
            let up = input.spin_up(i);
            match kind {
                OperatorKind::SigmaZ(_) => diag(if up { 1.0 } else { -1.0 }),
                _ => {
                    let mut s = input.clone();
                    s.spins ^= 1 << i;
                    // σ_y|↑⟩ = i|↓⟩, σ_y|↓⟩ = −i|↑⟩
                    let amp = match (kind, up) {
                        (OperatorKind::SigmaX(_), _) => one,
                        (_, true) => C64::new(0.0, 1.0),
                        (_, false) => C64::new(0.0, -1.0),
                    };
                    vec![(s, amp)]
                }
            }
        }
        OperatorKind::RotorMomentum(i) => {
            check_site(i, basis)?;
            match basis.kind {
                BasisKind::Circular | BasisKind::Linear => diag(input.k[i] as f64),
                BasisKind::Corotating => diag((input.k[0] as i64 - input.optical_l()) as f64),
                BasisKind::FrozenAngles => return Err(Error::Unsupported("frozen rotors carry no momentum".into())),
            }
        }
        OperatorKind::RotorRaise(i) | OperatorKind::RotorLower(i) => {
            check_site(i, basis)?;
            require_lab_rotors(basis, "rotor shift")?;
            let dk = if matches!(kind, OperatorKind::RotorRaise(_)) {
                1
            } else {
                -1
            };
            shift_rotor(input, i, dk, trunc.k_max)
                .map(|s| vec![(s, one)])
                .unwrap_or_default()
        }
        OperatorKind::OpticalL => match basis.kind {
            BasisKind::Linear => {
                // L_z = i (a_x a_y† − a_x† a_y)
                let mut out = Vec::new();
                if let Some((s1, a1)) = ladder_raw(input, false, true) {
                    if let Some((s2, a2)) = ladder(&s1, true, false, trunc) {
                        out.push((s2, C64::new(0.0, a1 * a2)));
                    }
                }
                if let Some((s1, a1)) = ladder_raw(input, false, false) {
                    if let Some((s2, a2)) = ladder(&s1, true, true, trunc) {
                        out.push((s2, C64::new(0.0, -a1 * a2)));
                    }
                }
                out
            }
            _ => diag(input.optical_l() as f64),
        },
        OperatorKind::MechL => match basis.kind {
            BasisKind::Circular | BasisKind::Linear => diag(input.rotor_sum() as f64),
            BasisKind::Corotating => diag((input.k[0] as i64 - input.optical_l()) as f64),
            BasisKind::FrozenAngles => return Err(Error::Unsupported("frozen rotors carry no momentum".into())),
        },
        OperatorKind::TotalL => match basis.kind {
            BasisKind::Circular => diag(input.total_l() as f64),
            BasisKind::Corotating => diag(input.k[0] as f64),
            _ => {
                return Err(Error::Unsupported(
                    "total angular momentum is diagonal only in circular catalogs".into(),
                ))
            }
        },
    })
}

/// Matrix of a single operator, projected onto the catalog. Amplitudes that
/// leave the truncated space (cutoffs or sector) are dropped.
pub fn build_operator(kind: OperatorKind, basis: &BasisCatalog) -> Result<OperatorMatrix> {
    build_operator_product(&[kind], basis)
}

/// Matrix of `kinds[0] · kinds[1] · …`, applied right to left on the full
/// truncated space and projected onto the catalog only at the end. This
/// keeps products like `a_r e^{iφ}` non-zero inside a sector even though
/// each factor alone leaves it.
pub fn build_operator_product(kinds: &[OperatorKind], basis: &BasisCatalog) -> Result<OperatorMatrix> {
    let mut triplets = Vec::new();
    for (col, s) in basis.states.iter().enumerate() {
        let mut terms = vec![(s.clone(), C64::new(1.0, 0.0))];
        for &kind in kinds.iter().rev() {
            let mut next = Vec::new();
            for (state, amp) in &terms {
                for (t, a) in apply_kind(kind, state, basis)? {
                    next.push((t, a * amp));
                }
            }
            terms = next;
        }
        for (t, a) in terms {
            if let Some(row) = basis.index_of(&t) {
                triplets.push((row, col, a));
            }
        }
    }
    let hermitian = kinds.len() == 1
        && !matches!(
            kinds[0],
            OperatorKind::AnnihilateR
                | OperatorKind::AnnihilateL
                | OperatorKind::CreateR
                | OperatorKind::CreateL
                | OperatorKind::RotorRaise(_)
                | OperatorKind::RotorLower(_)
        );
    Ok(OperatorMatrix::from_triplets(basis.dimension(), triplets, hermitian))
}

/// Shared-ownership handle used by Hamiltonian bundles and results.
pub type SharedBasis = Arc<BasisCatalog>;

#[cfg(test)]
mod tests {
    use super::*;

    fn st(n_r: u32, n_l: u32, up: bool, k: i32) -> BasisState {
        BasisState {
            n_r,
            n_l,
            spins: up as u64,
            k: vec![k],
        }
    }

    #[test]
    fn sector_zero_single_dimer() {
        // Per-mode cutoff admits the doubly occupied (1, 1, ·, 0) pair too.
        let b = build_basis(&TruncationSpec::new(1, 1).in_sector(0), 1).unwrap();
        assert_eq!(b.dimension(), 8);
        assert!(b.index_of(&st(1, 1, true, 0)).is_some());
        let b = build_basis(&TruncationSpec::new(1, 1).with_n_total(1).in_sector(0), 1).unwrap();
        assert_eq!(b.dimension(), 6);
        let expected = [
            st(0, 0, false, 0),
            st(0, 0, true, 0),
            st(0, 1, false, 1),
            st(0, 1, true, 1),
            st(1, 0, false, -1),
            st(1, 0, true, -1),
        ];
        assert_eq!(b.states(), &expected);
    }

    #[test]
    fn frozen_cutoffs_leave_spin_only() {
        let b = build_basis(&TruncationSpec::new(0, 0).in_sector(0), 1).unwrap();
        assert_eq!(b.dimension(), 2);
    }

    #[test]
    fn unreachable_sector_is_empty() {
        let err = build_basis(&TruncationSpec::new(1, 0).in_sector(2), 1).unwrap_err();
        assert!(matches!(err, Error::EmptySector { sector: 2 }));
    }

    #[test]
    fn dimension_cap() {
        let mut t = TruncationSpec::new(4, 4);
        t.max_dimension = 10;
        assert!(matches!(build_basis(&t, 1), Err(Error::DimensionOverflow { cap: 10 })));
    }

    #[test]
    fn index_is_a_bijection() {
        let b = build_basis(&TruncationSpec::new(3, 2).in_sector(1), 2).unwrap();
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
            assert_eq!(s.total_l(), 1);
        }
        let mut sorted = b.states().to_vec();
        sorted.sort();
        assert_eq!(sorted, b.states());
    }

    #[test]
    fn enumeration_is_stable() {
        let t = TruncationSpec::new(3, 2).in_sector(-1);
        let a = build_basis(&t, 2).unwrap();
        let b = build_basis(&t, 2).unwrap();
        assert_eq!(a.states(), b.states());
    }

    #[test]
    fn optical_l_is_diagonal() {
        let b = build_basis(&TruncationSpec::new(1, 1).in_sector(0), 1).unwrap();
        let op = build_operator(OperatorKind::OpticalL, &b).unwrap();
        let i = b.index_of(&st(1, 0, false, -1)).unwrap();
        assert_eq!(op.get(i, i), C64::new(1.0, 0.0));
        assert_eq!(op.nnz(), 4);
    }

    #[test]
    fn rotor_raise_drops_at_boundary() {
        let b = build_basis(&TruncationSpec::new(1, 1), 1).unwrap();
        let op = build_operator(OperatorKind::RotorRaise(0), &b).unwrap();
        let col = b.index_of(&st(0, 0, true, 1)).unwrap();
        assert!(op.entries().all(|(_, c, _)| c != col));
    }

    #[test]
    fn product_inside_sector() {
        let b = build_basis(&TruncationSpec::new(1, 1).in_sector(0), 1).unwrap();
        let op = build_operator_product(&[OperatorKind::AnnihilateR, OperatorKind::RotorRaise(0)], &b).unwrap();
        let row = b.index_of(&st(0, 0, false, 0)).unwrap();
        let col = b.index_of(&st(1, 0, false, -1)).unwrap();
        assert_eq!(op.get(row, col), C64::new(1.0, 0.0));
        // a_r alone leaves the sector.
        assert_eq!(build_operator(OperatorKind::AnnihilateR, &b).unwrap().nnz(), 0);
    }

    #[test]
    fn site_out_of_range() {
        let b = build_basis(&TruncationSpec::new(1, 1).in_sector(0), 1).unwrap();
        assert!(matches!(
            build_operator(OperatorKind::SigmaX(1), &b),
            Err(Error::SiteOutOfRange { site: 1, n_dimers: 1 })
        ));
    }

    #[test]
    fn total_l_is_scalar_in_sector() {
        for sector in -2..=2 {
            let b = build_basis(&TruncationSpec::new(3, 3).in_sector(sector), 2).unwrap();
            let op = build_operator(OperatorKind::TotalL, &b).unwrap();
            for (r, c, v) in op.entries() {
                assert_eq!(r, c);
                assert_eq!(v, C64::new(sector as f64, 0.0));
            }
            if sector != 0 {
                assert_eq!(op.nnz(), b.dimension());
            }
        }
    }

    #[test]
    fn number_operator_from_ladders() {
        let b = build_basis(&TruncationSpec::new(4, 2), 1).unwrap();
        let n = build_operator_product(&[OperatorKind::CreateR, OperatorKind::AnnihilateR], &b).unwrap();
        for (i, s) in b.states().iter().enumerate() {
            assert!((n.get(i, i).re - s.n_r as f64).abs() < 1e-14);
        }
        assert_eq!(n.nnz(), b.states().iter().filter(|s| s.n_r > 0).count());
    }

    #[test]
    fn raise_lower_is_identity_off_boundary() {
        let b = build_basis(&TruncationSpec::new(1, 2), 2).unwrap();
        let prod = build_operator_product(&[OperatorKind::RotorRaise(1), OperatorKind::RotorLower(1)], &b).unwrap();
        for (i, s) in b.states().iter().enumerate() {
            let expect = if s.k[1] == -2 { 0.0 } else { 1.0 };
            assert_eq!(prod.get(i, i).re, expect);
        }
        assert_eq!(prod.nnz(), b.states().iter().filter(|s| s.k[1] != -2).count());
    }

    #[test]
    fn pauli_algebra() {
        let b = build_basis(&TruncationSpec::new(0, 0), 1).unwrap();
        let x = build_operator(OperatorKind::SigmaX(0), &b).unwrap();
        let y = build_operator(OperatorKind::SigmaY(0), &b).unwrap();
        let z = build_operator(OperatorKind::SigmaZ(0), &b).unwrap();
        // σ_x σ_y = i σ_z
        let lhs = x.mul(&y).to_dense();
        let rhs = z.to_dense() * C64::new(0.0, 1.0);
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn linear_angular_momentum_is_hermitian() {
        let b = build_linear_basis(&TruncationSpec::new(3, 0).with_n_total(3), 1).unwrap();
        let l = build_operator(OperatorKind::OpticalL, &b).unwrap();
        assert!(l.hermiticity_residual() < 1e-14);
        // L_z ranges over −3..=3 on n_x + n_y <= 3.
        let m = l.to_dense();
        let e = m.symmetric_eigenvalues();
        let mut v: Vec<f64> = e.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        assert!((v[0] + 3.0).abs() < 1e-12 && (v[v.len() - 1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn corotating_relabel_preserves_dimension() {
        let b = build_basis(&TruncationSpec::new(3, 3).in_sector(1), 1).unwrap();
        let c = corotating_basis(&b).unwrap();
        assert_eq!(c.dimension(), b.dimension());
        assert!(c.states().iter().all(|s| s.k[0] == 1));
    }

    #[test]
    fn csv_dump() {
        let b = build_basis(&TruncationSpec::new(1, 1).with_n_total(1).in_sector(0), 1).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "ordinal,n_r,n_l,spins,k_1");
        assert_eq!(lines[5], "4,1,0,0,-1");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn scan_range() {
        let t = TruncationSpec::new(4, 4);
        assert_eq!(sector_scan_range(&t), vec![-2, -1, 0, 1, 2]);
        assert_eq!(sector_scan_range(&t.with_k_scan(0)), vec![0]);
        assert_eq!(sector_scan_range(&t.with_k_scan(3)).len(), 7);
    }
}
