//! Central finite differences for planar scalar functions.
//!
//! Used as an independent check on the analytic gradients and Hessians.

use crate::geometry::{Position, Sym2};

/// Step `1e-6 · max(1, ‖p‖)`.
pub fn default_step(p: Position) -> f64 {
    1e-6 * p.norm().max(1.0)
}

pub fn gradient(f: impl Fn(Position) -> f64, p: Position) -> Position {
    gradient_with_step(f, p, default_step(p))
}

pub fn gradient_with_step(f: impl Fn(Position) -> f64, p: Position, h: f64) -> Position {
    let dx = Position::new(h, 0.0);
    let dy = Position::new(0.0, h);
    Position::new(
        (f(p + dx) - f(p - dx)) / (2.0 * h),
        (f(p + dy) - f(p - dy)) / (2.0 * h),
    )
}

/// Hessian by central differences of an analytic gradient.
pub fn jacobian_of_gradient(g: impl Fn(Position) -> Position, p: Position) -> Sym2 {
    let h = default_step(p);
    let dx = Position::new(h, 0.0);
    let dy = Position::new(0.0, h);
    let col_x = (1.0 / (2.0 * h)) * (g(p + dx) - g(p - dx));
    let col_y = (1.0 / (2.0 * h)) * (g(p + dy) - g(p - dy));
    Sym2::new(col_x.x, 0.5 * (col_x.y + col_y.x), col_y.y)
}

/// Second-order central differences of the function values alone.
///
/// The step is `1e-4 · max(1, ‖p‖)`; second differences lose half the digits,
/// so the first-derivative step would leave only noise.
pub fn hessian(f: impl Fn(Position) -> f64, p: Position) -> Sym2 {
    let h = 1e-4 * p.norm().max(1.0);
    let dx = Position::new(h, 0.0);
    let dy = Position::new(0.0, h);
    let f0 = f(p);
    let xx = (f(p + dx) - 2.0 * f0 + f(p - dx)) / (h * h);
    let yy = (f(p + dy) - 2.0 * f0 + f(p - dy)) / (h * h);
    let xy = (f(p + dx + dy) - f(p + dx - dy) - f(p - dx + dy) + f(p - dx - dy)) / (4.0 * h * h);
    Sym2::new(xx, xy, yy)
}
