//! Damped Newton search for critical points of the follower potential.

use rayon::prelude::*;

use super::{CanonicalTriangleParams, EquilibriumLabel, EquilibriumRecord};
use crate::geometry::Position;

const MAX_ITERATIONS: usize = 200;
const MAX_HALVINGS: usize = 50;
const POLISH_STEPS: usize = 3;
const GRADIENT_REL_TOL: f64 = 1e-12;
const MERGE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFailure {
    pub seed: Position,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NumericRefinement {
    /// Distinct roots, sorted lexicographically by `(x, y)`.
    pub roots: Vec<EquilibriumRecord>,
    pub failures: Vec<SeedFailure>,
}

/// `n × n` seeds spanning `[x_min, x_max] × [y_min, y_max]`, row-major from
/// the lower-left corner.
pub fn grid_seeds(x_range: (f64, f64), y_range: (f64, f64), n: usize) -> Vec<Position> {
    let axis = |(lo, hi): (f64, f64), i: usize| {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    (0..n)
        .flat_map(|iy| (0..n).map(move |ix| Position::new(axis(x_range, ix), axis(y_range, iy))))
        .collect()
}

/// Gradient-norm threshold `1e-12 · L³ · max(1, K)`; the gradient is cubic in
/// length and the area term scales with `K`.
fn gradient_tolerance(params: &CanonicalTriangleParams) -> f64 {
    GRADIENT_REL_TOL * params.length_scale().powi(3) * params.gain.max(1.0)
}

fn newton(
    params: &CanonicalTriangleParams,
    seed: Position,
    tol: f64,
) -> Result<Position, SeedFailure> {
    let fail = |reason: String| SeedFailure { seed, reason };
    let mut p = seed;
    let mut g = params.gradient(p);
    let mut g_norm = g.norm();
    for _ in 0..MAX_ITERATIONS {
        if !g_norm.is_finite() {
            return Err(fail("non-finite gradient".into()));
        }
        if g_norm < tol {
            return Ok(polish(params, p, g_norm));
        }
        let Some(step) = params.hessian(p).solve(g) else {
            return Err(fail(format!("singular Hessian at {p}")));
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let q = Position::new(p.x - t * step.x, p.y - t * step.y);
            let gq = params.gradient(q);
            if gq.norm() < g_norm {
                p = q;
                g = gq;
                g_norm = gq.norm();
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(fail(format!(
                "line search stalled at {p} with |grad| = {g_norm:e}"
            )));
        }
    }
    Err(fail(format!(
        "no convergence after {MAX_ITERATIONS} iterations (|grad| = {g_norm:e})"
    )))
}

/// A few undamped steps past the stopping threshold, kept only while they
/// reduce the gradient.
fn polish(params: &CanonicalTriangleParams, mut p: Position, mut g_norm: f64) -> Position {
    for _ in 0..POLISH_STEPS {
        let Some(step) = params.hessian(p).solve(params.gradient(p)) else {
            break;
        };
        let q = p - step;
        let gq = params.gradient(q).norm();
        if !(gq < g_norm) {
            break;
        }
        p = q;
        g_norm = gq;
    }
    p
}

/// Runs damped Newton on `∇V = 0` from every seed and returns the distinct
/// roots, each classified by its Hessian.
///
/// A step is halved until the gradient norm decreases (at most 50 times);
/// at most 200 iterations per seed. Roots closer than `1e-8 · L` are merged,
/// keeping the member with the smallest gradient. Seeds run in parallel and
/// the output is deterministic for a given seed list.
pub fn refine_numeric(params: &CanonicalTriangleParams, seeds: &[Position]) -> NumericRefinement {
    let tol = gradient_tolerance(params);
    let results: Vec<Result<Position, SeedFailure>> =
        seeds.par_iter().map(|&s| newton(params, s, tol)).collect();

    let mut found = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(p) => found.push(p),
            Err(f) => failures.push(f),
        }
    }
    found.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));

    let radius = MERGE_REL_TOL * params.length_scale();
    let mut clusters: Vec<(Position, f64)> = Vec::new();
    for p in found {
        let g = params.gradient(p).norm();
        match clusters.iter_mut().find(|(q, _)| q.distance(p) <= radius) {
            Some(entry) if g < entry.1 => *entry = (p, g),
            Some(_) => {}
            None => clusters.push((p, g)),
        }
    }
    let mut roots: Vec<EquilibriumRecord> = clusters
        .into_iter()
        .map(|(p, _)| {
            EquilibriumRecord::from_hessian(p, params.hessian(p), EquilibriumLabel::Numeric)
        })
        .collect();
    roots.sort_by(|r, s| {
        r.position
            .x
            .total_cmp(&s.position.x)
            .then(r.position.y.total_cmp(&s.position.y))
    });
    NumericRefinement { roots, failures }
}
