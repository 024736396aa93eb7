//! Equilibria of a single follower with two pinned leaders.
//!
//! In the canonical frame the leaders sit at `[−c, 0]` and `[c, 0]` and the
//! follower's target is `[a, b]` with `b > 0`, so the desired signed area is
//! `b·c`. With `a = 0` (isosceles target) the equilibria are available in
//! closed form and their stability changes at the gains
//!
//! ```text
//! K_* = b² / (2c²)
//! K_0 = 2h√(h² − 2) − 2(h² − 2),   h = b/c,  defined for h² ≥ 2
//! ```
//!
//! For general `a` only the infinite-gain limit is closed form; finite gains
//! go through the Newton root finder in [`newton`].

mod newton;

use std::fmt;

pub use newton::{grid_seeds, refine_numeric, NumericRefinement, SeedFailure};

use crate::error::{Error, Result};
use crate::export::fmt_sig;
use crate::formation::{Clique, CollectiveState, Edge, FormationSpec};
use crate::geometry::{Position, Sym2};
use crate::potential::{pair_hessian, TriangleTerm};

/// Relative tolerance for treating a Hessian eigenvalue as zero.
pub const DEGENERATE_REL_TOL: f64 = 1e-9;

/// `(a, b, c, K)`: follower target `[a, b]`, half base `c`, area gain `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalTriangleParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gain: f64,
}

impl CanonicalTriangleParams {
    pub fn new(a: f64, b: f64, c: f64, gain: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidParams(format!("a must be finite, got {a}")));
        }
        for (name, v) in [("b", b), ("c", c), ("K", gain)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(CanonicalTriangleParams { a, b, c, gain })
    }

    pub fn isosceles(b: f64, c: f64, gain: f64) -> Result<Self> {
        Self::new(0.0, b, c, gain)
    }

    pub fn leader_i(&self) -> Position {
        Position::new(-self.c, 0.0)
    }

    pub fn leader_j(&self) -> Position {
        Position::new(self.c, 0.0)
    }

    pub fn target(&self) -> Position {
        Position::new(self.a, self.b)
    }

    pub fn d_ij(&self) -> f64 {
        2.0 * self.c
    }

    pub fn d_jk(&self) -> f64 {
        (self.a - self.c).hypot(self.b)
    }

    pub fn d_ki(&self) -> f64 {
        (self.a + self.c).hypot(self.b)
    }

    pub fn signed_area(&self) -> f64 {
        self.b * self.c
    }

    /// Characteristic length `max(|a|, b, c)`.
    pub fn length_scale(&self) -> f64 {
        self.a.abs().max(self.b).max(self.c)
    }

    /// The follower's triangle term, agents numbered `[1, 2, 3]`.
    pub fn term(&self) -> TriangleTerm {
        TriangleTerm::new(
            [1, 2, 3],
            self.d_ij(),
            self.d_jk(),
            self.d_ki(),
            self.signed_area(),
            self.gain,
        )
        .expect("canonical parameters always give a valid term")
    }

    pub fn value(&self, p: Position) -> f64 {
        self.term().value(self.leader_i(), self.leader_j(), p)
    }

    pub fn gradient(&self, p: Position) -> Position {
        self.term().gradient(self.leader_i(), self.leader_j(), p)
    }

    pub fn hessian(&self, p: Position) -> Sym2 {
        self.term().hessian(self.leader_i(), self.leader_j(), p)
    }

    /// The three-agent formation (leaders 1, 2; follower 3) whose layered
    /// dynamics reproduce the pinned-leader problem.
    pub fn formation_spec(&self) -> FormationSpec {
        FormationSpec::new(
            3,
            vec![
                Edge::new(1, 2, self.d_ij()),
                Edge::new(2, 3, self.d_jk()),
                Edge::new(1, 3, self.d_ki()),
            ],
            vec![Clique::new([1, 2, 3], self.signed_area(), self.gain)],
        )
    }

    pub fn state_with_follower(&self, p: Position) -> CollectiveState {
        CollectiveState::new(vec![self.leader_i(), self.leader_j(), p])
    }
}

pub fn k_star(b: f64, c: f64) -> f64 {
    b * b / (2.0 * c * c)
}

/// `None` when `b²/c² < 2`.
pub fn k_zero(b: f64, c: f64) -> Option<f64> {
    let h = b / c;
    let excess = h * h - 2.0;
    if excess < 0.0 {
        return None;
    }
    Some(2.0 * h * excess.sqrt() - 2.0 * excess)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stability {
    Stable,
    Saddle,
    Unstable,
    Degenerate,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "Stable",
            Stability::Saddle => "Saddle",
            Stability::Unstable => "Unstable",
            Stability::Degenerate => "Degenerate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquilibriumLabel {
    Pa,
    Pb,
    Pc,
    Pd,
    Pe,
    Numeric,
}

impl fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquilibriumLabel::Pa => "Pa",
            EquilibriumLabel::Pb => "Pb",
            EquilibriumLabel::Pc => "Pc",
            EquilibriumLabel::Pd => "Pd",
            EquilibriumLabel::Pe => "Pe",
            EquilibriumLabel::Numeric => "Numeric",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumRecord {
    pub position: Position,
    pub hessian: Sym2,
    /// Ascending.
    pub eigenvalues: [f64; 2],
    pub stability: Stability,
    pub label: EquilibriumLabel,
}

impl EquilibriumRecord {
    /// Classifies `position` by the eigenvalues of `hessian`.
    pub fn from_hessian(position: Position, hessian: Sym2, label: EquilibriumLabel) -> Self {
        let eigenvalues = hessian.eigenvalues();
        let stability = classify(eigenvalues, DEGENERATE_REL_TOL * hessian.norm());
        EquilibriumRecord {
            position,
            hessian,
            eigenvalues,
            stability,
            label,
        }
    }
}

/// Both eigenvalues above `tol`: Stable; both below `−tol`: Unstable;
/// opposite signs: Saddle; any within `tol` of zero: Degenerate.
pub fn classify(eigenvalues: [f64; 2], tol: f64) -> Stability {
    let [lo, hi] = eigenvalues;
    if lo.abs() <= tol || hi.abs() <= tol {
        Stability::Degenerate
    } else if lo > 0.0 {
        Stability::Stable
    } else if hi < 0.0 {
        Stability::Unstable
    } else {
        Stability::Saddle
    }
}

/// Coincidence tolerance (relative to `b²`) for double roots.
const ROOT_MERGE_REL_TOL: f64 = 1e-12;

/// All equilibria of the isosceles (`a = 0`) follower problem.
///
/// On the symmetry axis the equilibria solve `(2y² + 2by + Kc²)(y − b) = 0`,
/// giving `Pa = [0, b]` and, when `b² ≥ 2Kc²`, `Pb = [0, α]`, `Pc = [0, β]`
/// with `α, β = (−b ± √(b² − 2Kc²))/2`. Off the axis they lie on the circle
/// `x² + y² = b² − 2c²` at `y = Kb/(K − 4)`, which needs `K < 4` and
/// `K ≤ K_0`; those two are `Pd` (x > 0) and `Pe` (x < 0).
///
/// A double root (`b² = 2Kc²`) is reported once, labelled `Pb`. Off-axis
/// points that coincide with the axis (`K = K_0`) are not reported
/// separately.
pub fn enumerate_isosceles(params: &CanonicalTriangleParams) -> Result<Vec<EquilibriumRecord>> {
    let CanonicalTriangleParams { a, b, c, gain: k } = *params;
    if a != 0.0 {
        return Err(Error::InvalidParams(format!(
            "isosceles enumeration needs a = 0, got {a}"
        )));
    }
    let record = |p: Position, label| EquilibriumRecord::from_hessian(p, params.hessian(p), label);
    let mut out = vec![record(Position::new(0.0, b), EquilibriumLabel::Pa)];

    let merge_tol = ROOT_MERGE_REL_TOL * b * b;
    let disc = b * b - 2.0 * k * c * c;
    if disc.abs() <= merge_tol {
        out.push(record(Position::new(0.0, -0.5 * b), EquilibriumLabel::Pb));
    } else if disc > 0.0 {
        let s = disc.sqrt();
        out.push(record(
            Position::new(0.0, 0.5 * (-b + s)),
            EquilibriumLabel::Pb,
        ));
        out.push(record(
            Position::new(0.0, 0.5 * (-b - s)),
            EquilibriumLabel::Pc,
        ));
    }

    // K = 4 has no off-axis equilibria; the formula for y is never evaluated there.
    if k < 4.0 && b * b > 2.0 * c * c {
        let y = k * b / (k - 4.0);
        let x_sq = b * b - 2.0 * c * c - y * y;
        if x_sq > merge_tol {
            let x = x_sq.sqrt();
            out.push(record(Position::new(x, y), EquilibriumLabel::Pd));
            out.push(record(Position::new(-x, y), EquilibriumLabel::Pe));
        }
    }
    Ok(out)
}

/// Equilibrium set and convergence verdicts for an isosceles follower.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub params: CanonicalTriangleParams,
    pub k_star: f64,
    pub k_zero: Option<f64>,
    pub equilibria: Vec<EquilibriumRecord>,
    /// The only equilibrium is a stable `Pa`.
    pub globally_convergent: bool,
    /// Every equilibrium other than `Pa` is a saddle or unstable.
    pub almost_globally_convergent: bool,
}

pub fn case_table(params: &CanonicalTriangleParams) -> Result<CaseReport> {
    let equilibria = enumerate_isosceles(params)?;
    let is_correct = |r: &EquilibriumRecord| r.label == EquilibriumLabel::Pa;
    let globally_convergent = equilibria.len() == 1
        && is_correct(&equilibria[0])
        && equilibria[0].stability == Stability::Stable;
    let almost_globally_convergent = equilibria
        .iter()
        .filter(|r| !is_correct(r))
        .all(|r| matches!(r.stability, Stability::Saddle | Stability::Unstable));
    Ok(CaseReport {
        params: *params,
        k_star: k_star(params.b, params.c),
        k_zero: k_zero(params.b, params.c),
        equilibria,
        globally_convergent,
        almost_globally_convergent,
    })
}

impl CaseReport {
    pub fn count(&self, stability: Stability) -> usize {
        self.equilibria
            .iter()
            .filter(|r| r.stability == stability)
            .count()
    }

    pub fn get(&self, label: EquilibriumLabel) -> Option<&EquilibriumRecord> {
        self.equilibria.iter().find(|r| r.label == label)
    }
}

impl fmt::Display for CaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(
            f,
            "parameters: a = {}, b = {}, c = {}, K = {}",
            fmt_sig(p.a),
            fmt_sig(p.b),
            fmt_sig(p.c),
            fmt_sig(p.gain)
        )?;
        writeln!(f, "K_* = {}", fmt_sig(self.k_star))?;
        match self.k_zero {
            Some(k0) => writeln!(f, "K_0 = {}", fmt_sig(k0))?,
            None => writeln!(f, "K_0 = absent (b^2/c^2 < 2)")?,
        }
        writeln!(f, "equilibria: {}", self.equilibria.len())?;
        for r in &self.equilibria {
            write_record(f, r)?;
        }
        let cmp = if p.gain > self.k_star {
            ">"
        } else if p.gain == self.k_star {
            "="
        } else {
            "<="
        };
        if self.globally_convergent {
            writeln!(
                f,
                "globally convergent: yes (K {cmp} K_* = {})",
                fmt_sig(self.k_star)
            )?;
        } else {
            writeln!(
                f,
                "globally convergent: no (K {cmp} K_* = {})",
                fmt_sig(self.k_star)
            )?;
        }
        writeln!(
            f,
            "almost globally convergent: {}",
            if self.almost_globally_convergent {
                "yes"
            } else {
                "no"
            }
        )?;
        if let Some(r) = self
            .equilibria
            .iter()
            .find(|r| r.stability == Stability::Degenerate)
        {
            writeln!(
                f,
                "boundary: {} at {} is Degenerate",
                r.label,
                fmt_position(r.position)
            )?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_position(p: Position) -> String {
    format!("[{}, {}]", fmt_sig(p.x), fmt_sig(p.y))
}

pub(crate) fn write_record(f: &mut impl fmt::Write, r: &EquilibriumRecord) -> fmt::Result {
    writeln!(
        f,
        "  {:<7} {:<32} eigenvalues ({}, {})  {}",
        r.label.to_string(),
        fmt_position(r.position),
        fmt_sig(r.eigenvalues[0]),
        fmt_sig(r.eigenvalues[1]),
        r.stability
    )
}

/// Equilibria in the limit `K → ∞`, for arbitrary `a`.
///
/// As `K` grows the follower is pinned to the line `y = b`, and equilibria
/// solve `(x − a)(x² + ax + 2c²) = 0`. The record's `hessian` is the
/// gain-independent (distance-only) part; the `K c²` entry diverges, so the
/// eigenvalues are reported as `[H₁₁, +∞]` and stability follows the sign of
/// `H₁₁`, the limit of the Schur complement `H₁₁ − H₁₂²/H₂₂`.
pub fn enumerate_general_large_k(a: f64, b: f64, c: f64) -> Result<Vec<EquilibriumRecord>> {
    // The gain only enters through the diverging entry, so any valid value works here.
    let params = CanonicalTriangleParams::new(a, b, c, 1.0)?;
    let record = |x: f64, label, force_degenerate: bool| {
        let p = Position::new(x, b);
        let hessian = pair_hessian(params.leader_j(), p, params.d_jk())
            + pair_hessian(params.leader_i(), p, params.d_ki());
        let reduced = hessian.xx;
        let tol = DEGENERATE_REL_TOL * hessian.norm();
        let stability = if force_degenerate {
            Stability::Degenerate
        } else {
            classify([reduced, f64::INFINITY], tol)
        };
        EquilibriumRecord {
            position: p,
            hessian,
            eigenvalues: [reduced, f64::INFINITY],
            stability,
            label,
        }
    };

    let mut out = vec![record(a, EquilibriumLabel::Pa, false)];
    let disc = a * a - 8.0 * c * c;
    if disc.abs() <= ROOT_MERGE_REL_TOL * (a * a).max(c * c) {
        out.push(record(-0.5 * a, EquilibriumLabel::Pb, true));
    } else if disc > 0.0 {
        let s = disc.sqrt();
        out.push(record(0.5 * (-a + s), EquilibriumLabel::Pb, false));
        out.push(record(0.5 * (-a - s), EquilibriumLabel::Pc, false));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
