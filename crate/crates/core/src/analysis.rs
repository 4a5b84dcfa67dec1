//! Pipelines shared by the CLI, the examples and the acceptance suite:
//! ground-state observables at one parameter point, cutoff convergence,
//! one-dimensional maximization, least-squares fits and worker-capped
//! parallel sweeps.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{ground_state_with, SolverOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_circular, build_frozen};
use crate::hilbert::{build_basis, build_frozen_basis, TruncationSpec};
use crate::model::ModelParams;
use crate::observables::observables;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundPoint {
    pub energy: f64,
    pub l_opt: f64,
    pub dl_opt: f64,
    pub l_mech: Option<f64>,
    pub sector: Option<i64>,
    pub converged: bool,
    pub residual: f64,
    pub near_degenerate: bool,
    pub dimension: usize,
}

/// Ground state of the full model in `trunc.sector` (sector 0 when unset).
pub fn solve_full(params: &ModelParams, trunc: &TruncationSpec, opts: &SolverOptions) -> Result<GroundPoint> {
    let t = trunc.in_sector(trunc.sector.unwrap_or(0));
    let basis = Arc::new(build_basis(&t, params.n_dimers)?);
    let h = build_circular(params, &basis)?;
    let gs = ground_state_with(&h, opts)?;
    let o = observables(&gs.state, &basis)?;
    Ok(GroundPoint {
        energy: gs.energy,
        l_opt: o.l_opt,
        dl_opt: o.dl_opt,
        l_mech: o.l_mech,
        sector: gs.sector,
        converged: gs.converged,
        residual: gs.residual,
        near_degenerate: gs.near_degenerate,
        dimension: basis.dimension(),
    })
}

/// Ground state of the Dicke problem with the angles held fixed.
pub fn solve_frozen(
    params: &ModelParams,
    trunc: &TruncationSpec,
    angles: &[f64],
    opts: &SolverOptions,
) -> Result<GroundPoint> {
    let basis = Arc::new(build_frozen_basis(trunc, params.n_dimers)?);
    let h = build_frozen(params, &basis, angles)?;
    let gs = ground_state_with(&h, opts)?;
    let o = observables(&gs.state, &basis)?;
    Ok(GroundPoint {
        energy: gs.energy,
        l_opt: o.l_opt,
        dl_opt: o.dl_opt,
        l_mech: None,
        sector: None,
        converged: gs.converged,
        residual: gs.residual,
        near_degenerate: gs.near_degenerate,
        dimension: basis.dimension(),
    })
}

/// Frozen solve with all dimers aligned at angle zero.
pub fn solve_aligned(params: &ModelParams, trunc: &TruncationSpec, opts: &SolverOptions) -> Result<GroundPoint> {
    solve_frozen(params, trunc, &vec![0.0; params.n_dimers], opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    pub value: f64,
    pub refined: f64,
    pub change: f64,
    pub converged: bool,
}

/// Re-evaluates `f` with both cutoffs raised by two and compares.
pub fn check_convergence(
    f: impl Fn(&TruncationSpec) -> Result<f64>,
    trunc: &TruncationSpec,
    tol: f64,
) -> Result<Convergence> {
    let dk = if trunc.k_max > 0 { 2 } else { 0 };
    let value = f(trunc)?;
    let refined = f(&trunc.enlarged(2, dk))?;
    let change = (refined - value).abs();
    Ok(Convergence {
        value,
        refined,
        change,
        converged: change <= tol,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, xtol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while (b - a).abs() > xtol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// Grid scan followed by golden-section refinement around the best point.
pub fn scan_max(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, points: usize, xtol: f64) -> Result<(f64, f64)> {
    if points < 3 {
        return Err(crate::error::domain("points", "need at least 3 scan points"));
    }
    let h = (b - a) / (points - 1) as f64;
    let mut best = (a, f64::NEG_INFINITY, 0);
    for i in 0..points {
        let x = a + h * i as f64;
        let y = f(x)?;
        if y > best.1 {
            best = (x, y, i);
        }
    }
    let lo = a + h * best.2.saturating_sub(1) as f64;
    let hi = (a + h * (best.2 + 1) as f64).min(b);
    golden_max(f, lo, hi, xtol)
}

/// Least-squares polynomial, coefficients in ascending powers.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    if x.len() != y.len() || x.len() <= degree {
        return Err(crate::error::domain("fit", "need more points than the degree"));
    }
    let a = DMatrix::from_fn(x.len(), degree + 1, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| crate::error::domain("fit", e.to_string()))?;
    Ok(sol.iter().copied().collect())
}

/// `(slope, intercept)` of the least-squares line.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let c = polyfit(x, y, 1)?;
    Ok((c[1], c[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

pub fn spaced(start: f64, stop: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(crate::error::domain("count", "must be at least 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let t = |i: usize| i as f64 / (count - 1) as f64;
    match spacing {
        Spacing::Linear => Ok((0..count).map(|i| start + (stop - start) * t(i)).collect()),
        Spacing::Log => {
            if start <= 0.0 || stop <= 0.0 {
                return Err(crate::error::domain("spacing", "log spacing needs positive bounds"));
            }
            let (a, b) = (start.ln(), stop.ln());
            Ok((0..count).map(|i| (a + (b - a) * t(i)).exp()).collect())
        }
    }
}

/// `f` over `items` on at most `workers` threads (0 means all cores),
/// results in input order.
pub fn parallel_map<T, R>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Inertia;

    #[test]
    fn golden_finds_parabola_top() {
        let (x, y) = golden_max(|x| Ok(-(x - 0.3f64).powi(2) + 2.0), -1.0, 2.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!((y - 2.0).abs() < 1e-15);
        let (x, _) = scan_max(|x| Ok((3.0 * x).sin()), 0.0, 3.0, 12, 1e-9).unwrap();
        assert!((x - std::f64::consts::PI / 6.0).abs() < 1e-6);
    }

    #[test]
    fn fits_recover_coefficients() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 - 2.0 * t + 0.5 * t * t * t).collect();
        let c = polyfit(&x, &y, 3).unwrap();
        for (a, b) in c.iter().zip([1.0, -2.0, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-10);
        }
        let (s, i) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
        assert!(polyfit(&[1.0], &[1.0], 1).is_err());
    }

    #[test]
    fn spacing() {
        assert_eq!(spaced(1.0, 3.0, 3, Spacing::Linear).unwrap(), vec![1.0, 2.0, 3.0]);
        let l = spaced(1.0, 100.0, 3, Spacing::Log).unwrap();
        assert!((l[1] - 10.0).abs() < 1e-12);
        assert!(spaced(0.0, 1.0, 3, Spacing::Log).is_err());
        assert_eq!(spaced(2.0, 5.0, 1, Spacing::Linear).unwrap(), vec![2.0]);
    }

    #[test]
    fn parallel_keeps_order() {
        let v: Vec<usize> = (0..100).collect();
        let out = parallel_map(&v, 3, |x| x * 2).unwrap();
        assert_eq!(out, v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn frozen_single_dimer_matches_full_at_large_inertia() {
        let p = ModelParams::new(1.0, 0.6, 0.3, Inertia::Finite(1e8), 1);
        let opts = SolverOptions::default();
        let full = solve_full(&p, &TruncationSpec::new(6, 6), &opts).unwrap();
        let frozen = solve_aligned(&p, &TruncationSpec::new(6, 0), &opts).unwrap();
        assert!((full.l_opt - frozen.l_opt).abs() < 1e-6);
        assert!((full.dl_opt - frozen.dl_opt).abs() < 1e-6);
        assert!(full.l_mech.is_some() && frozen.l_mech.is_none());
    }

    #[test]
    fn convergence_report() {
        let p = ModelParams::new(1.0, 0.3, 0.1, Inertia::Finite(10.0), 1);
        let c = check_convergence(
            |t| Ok(solve_full(&p, t, &SolverOptions::default())?.energy),
            &TruncationSpec::new(4, 3),
            1e-8,
        )
        .unwrap();
        assert!(c.converged, "{c:?}");
        assert!(c.refined <= c.value + 1e-12);
    }
}
