//! Ground-state and low-spectrum solvers.
//!
//! Small problems go through a dense Hermitian eigendecomposition; larger
//! ones through a restarted Lanczos iteration with full
//! reorthogonalization. The Lanczos start vector is a fixed quasi-random
//! sequence: results depend on nothing but the input, and the vector has
//! no permutation symmetry that could hide a symmetry class of states.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_circular, HamiltonianBundle};
use crate::hilbert::{build_basis, sector_scan_range, TruncationSpec};
use crate::model::ModelParams;
use crate::sparse::OperatorMatrix;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Gap below which the ground state is flagged as nearly degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: Vec<C64>,
    /// `None` for catalogs that are not restricted to a sector.
    pub sector: Option<i64>,
    pub converged: bool,
    /// `‖H ψ − E ψ‖`
    pub residual: f64,
    /// Distance to the next level, when the solver saw one.
    pub gap: Option<f64>,
    pub near_degenerate: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolverMethod {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub method: SolverMethod,
    pub tol: f64,
    /// Dimension at or below which `Auto` picks the dense path.
    pub dense_threshold: usize,
    pub krylov_dim: usize,
    pub max_restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            tol: DEFAULT_TOL,
            dense_threshold: 96,
            krylov_dim: 60,
            max_restarts: 400,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_method(mut self, method: SolverMethod) -> Self {
        self.method = method;
        self
    }

    fn use_dense(&self, dim: usize) -> bool {
        match self.method {
            SolverMethod::Dense => true,
            SolverMethod::Lanczos => false,
            SolverMethod::Auto => dim <= self.dense_threshold,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub energy: f64,
    pub state: Vec<C64>,
    pub residual: f64,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn residual(h: &OperatorMatrix, e: f64, x: &[C64]) -> f64 {
    let hx = h.apply(x);
    hx.iter()
        .zip(x)
        .map(|(a, b)| (a - b * e).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Fix the global phase so the largest component is real and positive.
fn fix_phase(v: &mut [C64]) {
    if let Some(big) = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
        if big.norm() > 0.0 {
            let phase = big.conj() / big.norm();
            v.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

fn dense_pairs(h: &OperatorMatrix, count: usize) -> Vec<Eigenpair> {
    let eig = h.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(count)
        .map(|i| {
            let mut state: Vec<C64> = eig.eigenvectors.column(i).iter().copied().collect();
            let n = norm(&state);
            state.iter_mut().for_each(|z| *z /= n);
            fix_phase(&mut state);
            let energy = eig.eigenvalues[i];
            Eigenpair {
                energy,
                residual: residual(h, energy, &state),
                state,
            }
        })
        .collect()
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    orthogonalize_all(w, &[basis]);
}

/// Two passes of classical Gram-Schmidt against every set. Both sets go
/// into each pass: the Krylov recursion amplifies any residue along the
/// locked vectors, which lie lower in the spectrum.
fn orthogonalize_all(w: &mut [C64], sets: &[&[Vec<C64>]]) {
    for _ in 0..2 {
        for v in sets.iter().flat_map(|s| s.iter()) {
            let c = dot(v, w);
            w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
        }
    }
}

struct LanczosOutcome {
    energy: f64,
    state: Vec<C64>,
    residual: f64,
    second: Option<f64>,
    iterations: usize,
    converged: bool,
}

fn combine(vs: &[Vec<C64>], coef: impl Iterator<Item = C64>, dim: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (c, v) in coef.zip(vs) {
        out.iter_mut().zip(v).for_each(|(a, b)| *a += b * c);
    }
    out
}

/// Lowest eigenpair of `h` in the orthogonal complement of `locked`.
///
/// `1 + frac(i·α)` with the plastic-number increment `α`.
fn start_vector(dim: usize) -> Vec<C64> {
    const ALPHA: f64 = 0.754_877_666_246_692_7;
    (0..dim)
        .map(|i| C64::new(1.0 + (i as f64 * ALPHA).fract(), 0.0))
        .collect()
}

/// Thick-restarted Lanczos with full reorthogonalization: after each cycle
/// the lowest third of the Ritz vectors and the continuation vector are
/// kept, which matters for the clusters of nearly degenerate levels found
/// near resonances.
fn lanczos(h: &OperatorMatrix, locked: &[Vec<C64>], opts: &SolverOptions) -> LanczosOutcome {
    let dim = h.dim();
    let free = dim - locked.len();
    let m_max = opts.krylov_dim.min(free).max(1);
    let keep = (m_max / 3).max(1);
    let mut x = start_vector(dim);
    orthogonalize(&mut x, locked);
    if norm(&x) < 1e-10 {
        // start vector lies in the locked space; fall back to the first
        // unit vector that does not
        for i in 0..dim {
            x = vec![C64::new(0.0, 0.0); dim];
            x[i] = C64::new(1.0, 0.0);
            orthogonalize(&mut x, locked);
            if norm(&x) > 1e-6 {
                break;
            }
        }
    }
    let n0 = norm(&x);
    x.iter_mut().for_each(|z| *z /= n0);

    let mut iterations = 0;
    let mut best = LanczosOutcome {
        energy: f64::NAN,
        state: x.clone(),
        residual: f64::INFINITY,
        second: None,
        iterations: 0,
        converged: false,
    };
    // vs[i] for i < hvs.len() have their images stored; a trailing vector
    // without an image is the next one to expand
    let mut vs: Vec<Vec<C64>> = vec![x];
    let mut hvs: Vec<Vec<C64>> = Vec::new();
    for _ in 0..opts.max_restarts.max(1) {
        while hvs.len() < vs.len() {
            let mut w = vec![C64::new(0.0, 0.0); dim];
            h.matvec(vs.last().unwrap(), &mut w);
            iterations += 1;
            hvs.push(w.clone());
            if vs.len() == m_max {
                break;
            }
            orthogonalize_all(&mut w, &[locked, &vs]);
            let b = norm(&w);
            if b < 1e-13 {
                break;
            }
            vs.push(w.iter().map(|z| z / b).collect());
        }
        let k = hvs.len();
        let unexpanded = if vs.len() > k { vs.pop() } else { None };
        let t = DMatrix::<C64>::from_fn(k, k, |i, j| 0.5 * (dot(&vs[i], &hvs[j]) + dot(&vs[j], &hvs[i]).conj()));
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta = eig.eigenvalues[order[0]];
        let ritz = |i: usize| combine(&vs[..k], eig.eigenvectors.column(i).iter().copied(), dim);
        let himage = |i: usize| combine(&hvs, eig.eigenvectors.column(i).iter().copied(), dim);

        let mut state = ritz(order[0]);
        orthogonalize(&mut state, locked);
        let n = norm(&state);
        state.iter_mut().for_each(|z| *z /= n);
        let res = residual(h, theta, &state);
        best = LanczosOutcome {
            energy: theta,
            state,
            residual: res,
            second: order.get(1).map(|&i| eig.eigenvalues[i]),
            iterations,
            converged: res < opts.tol,
        };
        if best.converged {
            break;
        }

        // continuation vector: the unexpanded tail, or the residual when the
        // cycle ended on an invariant subspace
        let mut tail = unexpanded.unwrap_or_else(|| {
            himage(order[0])
                .iter()
                .zip(&best.state)
                .map(|(a, b)| a - b * theta)
                .collect()
        });
        let kept: Vec<usize> = order.iter().copied().take(keep.min(k)).collect();
        let new_vs: Vec<Vec<C64>> = kept.iter().map(|&i| ritz(i)).collect();
        let new_hvs: Vec<Vec<C64>> = kept.iter().map(|&i| himage(i)).collect();
        vs = new_vs;
        hvs = new_hvs;
        orthogonalize_all(&mut tail, &[locked, &vs]);
        let nt = norm(&tail);
        if nt < 1e-13 {
            break;
        }
        vs.push(tail.iter().map(|z| z / nt).collect());
    }
    best
}

/// Lowest eigenpair with default options.
pub fn ground_state(h: &HamiltonianBundle, tol: f64) -> Result<GroundStateResult> {
    ground_state_with(h, &SolverOptions::default().with_tol(tol))
}

pub fn ground_state_with(h: &HamiltonianBundle, opts: &SolverOptions) -> Result<GroundStateResult> {
    let dim = h.dimension();
    let sector = h.sector();
    let result = if opts.use_dense(dim) {
        let pairs = dense_pairs(&h.matrix, 2);
        let gap = pairs.get(1).map(|p| p.energy - pairs[0].energy);
        let p = pairs.into_iter().next().expect("non-empty catalog");
        GroundStateResult {
            energy: p.energy,
            converged: p.residual < opts.tol,
            residual: p.residual,
            state: p.state,
            sector,
            gap,
            near_degenerate: gap.is_some_and(|g| g < DEGENERACY_GAP),
            iterations: 1,
        }
    } else {
        let mut out = lanczos(&h.matrix, &[], opts);
        fix_phase(&mut out.state);
        let gap = out.second.map(|s| s - out.energy);
        GroundStateResult {
            energy: out.energy,
            state: out.state,
            sector,
            converged: out.converged,
            residual: out.residual,
            gap,
            near_degenerate: gap.is_some_and(|g| g < DEGENERACY_GAP),
            iterations: out.iterations,
        }
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::NoConvergence {
            iterations: result.iterations,
            residual: result.residual,
            partial: Box::new(result),
        })
    }
}

/// Lowest `count` eigenpairs in nondecreasing order; `count` is clamped to
/// the dimension.
pub fn low_spectrum(h: &HamiltonianBundle, count: usize) -> Result<Vec<Eigenpair>> {
    low_spectrum_with(h, count, &SolverOptions::default())
}

pub fn low_spectrum_with(h: &HamiltonianBundle, count: usize, opts: &SolverOptions) -> Result<Vec<Eigenpair>> {
    if count == 0 {
        return Err(crate::error::domain("count", "must be at least 1"));
    }
    let dim = h.dimension();
    let count = count.min(dim);
    let dense_ok = match opts.method {
        SolverMethod::Dense => true,
        SolverMethod::Lanczos => false,
        SolverMethod::Auto => dim <= 3000,
    };
    if dense_ok {
        return Ok(dense_pairs(&h.matrix, count));
    }
    let mut locked: Vec<Vec<C64>> = Vec::new();
    let mut pairs = Vec::new();
    for _ in 0..count {
        let out = lanczos(&h.matrix, &locked, opts);
        if !out.converged {
            let partial = GroundStateResult {
                energy: out.energy,
                state: out.state,
                sector: h.sector(),
                converged: false,
                residual: out.residual,
                gap: None,
                near_degenerate: false,
                iterations: out.iterations,
            };
            return Err(Error::NoConvergence {
                iterations: out.iterations,
                residual: out.residual,
                partial: Box::new(partial),
            });
        }
        let mut state = out.state;
        fix_phase(&mut state);
        locked.push(state.clone());
        pairs.push(Eigenpair {
            energy: out.energy,
            state,
            residual: out.residual,
        });
    }
    pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(pairs)
}

#[derive(Debug, Clone)]
pub struct SectorScan {
    pub best_sector: i64,
    pub energies: Vec<(i64, f64)>,
}

/// Energies closer than this count as a tie; ties go to the smallest |𝓛|.
pub const SECTOR_TIE: f64 = 1e-10;

/// Ground energy in every sector of the scan range.
///
/// With frozen rotors the untruncated sectors are exactly degenerate, so the
/// tie rule decides; sectors that admit no states are skipped.
pub fn ground_sector_scan(params: &ModelParams, trunc: &TruncationSpec) -> Result<SectorScan> {
    let mut energies = Vec::new();
    for sector in sector_scan_range(trunc) {
        let basis = match build_basis(&trunc.in_sector(sector), params.n_dimers) {
            Ok(b) => Arc::new(b),
            Err(Error::EmptySector { .. }) => continue,
            Err(e) => return Err(e),
        };
        let h = build_circular(params, &basis)?;
        energies.push((sector, ground_state(&h, DEFAULT_TOL)?.energy));
    }
    let e_min = energies.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    let best_sector = energies
        .iter()
        .filter(|&&(_, e)| e - e_min <= SECTOR_TIE)
        .map(|&(s, _)| s)
        .min_by_key(|s| (s.abs(), *s))
        .ok_or(Error::EmptySector { sector: 0 })?;
    Ok(SectorScan { best_sector, energies })
}
