use super::{IntegratorConfig, Method, TerminalReason, Trajectory};
use crate::formation::CollectiveState;
use crate::geometry::Position;

fn stacked_norm(v: &[Position]) -> f64 {
    v.iter().map(|p| p.norm_sq()).sum::<f64>().sqrt()
}

fn stacked_diff(a: &[Position], b: &[Position]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (*p - *q).norm_sq())
        .sum::<f64>()
        .sqrt()
}

/// `out = y + h Σ w_i k_i`.
fn combine(out: &mut CollectiveState, y: &CollectiveState, h: f64, terms: &[(f64, &[Position])]) {
    for (idx, slot) in out.0.iter_mut().enumerate() {
        let mut acc = y.0[idx];
        for &(w, k) in terms {
            if w != 0.0 {
                acc += (h * w) * k[idx];
            }
        }
        *slot = acc;
    }
}

struct Recorder {
    times: Vec<f64>,
    states: Vec<CollectiveState>,
    stride: usize,
    keep_all: bool,
    steps: usize,
}

impl Recorder {
    fn new(cfg: &IntegratorConfig, keep_all: bool, y0: &CollectiveState) -> Self {
        Recorder {
            times: vec![0.0],
            states: vec![y0.clone()],
            stride: cfg.sample_stride,
            keep_all,
            steps: 0,
        }
    }

    fn step(&mut self, t: f64, y: &CollectiveState) {
        self.steps += 1;
        if self.keep_all && self.steps.is_multiple_of(self.stride) {
            self.times.push(t);
            self.states.push(y.clone());
        }
    }

    fn finish(mut self, t: f64, y: CollectiveState, reason: TerminalReason) -> Trajectory {
        if *self.times.last().expect("initial sample") < t {
            self.times.push(t);
            self.states.push(y);
        }
        Trajectory {
            times: self.times,
            states: self.states,
            terminal_reason: reason,
        }
    }
}

/// Integrates `ẏ = f(y)` from `y0`. With `keep_all = false` only the initial
/// and terminal states are kept.
pub(super) fn run<F>(
    f: F,
    y0: CollectiveState,
    cfg: &IntegratorConfig,
    keep_all: bool,
) -> Trajectory
where
    F: Fn(&CollectiveState, &mut [Position]),
{
    match cfg.method {
        Method::FixedRk4 { step } => rk4(f, y0, cfg, step, keep_all),
        Method::AdaptiveRk45 { abs_tol, rel_tol } => dopri5(f, y0, cfg, abs_tol, rel_tol, keep_all),
    }
}

fn rk4<F>(
    f: F,
    mut y: CollectiveState,
    cfg: &IntegratorConfig,
    h: f64,
    keep_all: bool,
) -> Trajectory
where
    F: Fn(&CollectiveState, &mut [Position]),
{
    let n = y.len();
    let mut rec = Recorder::new(cfg, keep_all, &y);
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![Position::ORIGIN; n],
        vec![Position::ORIGIN; n],
        vec![Position::ORIGIN; n],
        vec![Position::ORIGIN; n],
    );
    let mut stage = y.clone();
    let mut next = y.clone();

    // Step count fixed up front so sample times are exact multiples of h.
    let total_steps = (cfg.t_max / h - 1e-9).ceil().max(1.0) as u64;
    let time_at = |i: u64| {
        if i >= total_steps {
            cfg.t_max
        } else {
            i as f64 * h
        }
    };

    let mut i = 0u64;
    f(&y, &mut k1);
    let reason = loop {
        if stacked_norm(&k1) < cfg.gradient_stop {
            break TerminalReason::GradientStop;
        }
        if i >= total_steps {
            break TerminalReason::TimeLimit;
        }
        let dt = time_at(i + 1) - time_at(i);
        combine(&mut stage, &y, 0.5 * dt, &[(1.0, &k1)]);
        f(&stage, &mut k2);
        combine(&mut stage, &y, 0.5 * dt, &[(1.0, &k2)]);
        f(&stage, &mut k3);
        combine(&mut stage, &y, dt, &[(1.0, &k3)]);
        f(&stage, &mut k4);
        combine(
            &mut next,
            &y,
            dt / 6.0,
            &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
        );
        if !next.is_finite() {
            break TerminalReason::NonFinite;
        }
        std::mem::swap(&mut y, &mut next);
        i += 1;
        rec.step(time_at(i), &y);
        f(&y, &mut k1);
    };
    rec.finish(time_at(i), y, reason)
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Real-axis stability boundary of the fifth-order Dormand-Prince step.
const STABILITY_BOUNDARY: f64 = 3.3;
/// Fraction of the estimated stability limit that steps may use.
const STABILITY_SAFETY: f64 = 0.8;

// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dopri5<F>(
    f: F,
    mut y: CollectiveState,
    cfg: &IntegratorConfig,
    atol: f64,
    rtol: f64,
    keep_all: bool,
) -> Trajectory
where
    F: Fn(&CollectiveState, &mut [Position]),
{
    let n = y.len();
    let mut rec = Recorder::new(cfg, keep_all, &y);
    let mut k: Vec<Vec<Position>> = vec![vec![Position::ORIGIN; n]; 7];
    let mut stage = y.clone();
    let mut stage6 = y.clone();
    let mut next = y.clone();
    let mut h_stable = f64::INFINITY;
    let h_min = 1e-12 * cfg.t_max;
    let mut h = 1e-3_f64.min(cfg.t_max);
    let mut t = 0.0;
    debug_assert_eq!(C[0], 0.0);

    f(&y, &mut k[0]);
    let reason = loop {
        if stacked_norm(&k[0]) < cfg.gradient_stop {
            break TerminalReason::GradientStop;
        }
        if t >= cfg.t_max {
            break TerminalReason::TimeLimit;
        }
        let dt = h.min(cfg.t_max - t);
        for s in 1..7 {
            let terms: Vec<(f64, &[Position])> =
                (0..s).map(|j| (A[s][j], k[j].as_slice())).collect();
            combine(&mut stage, &y, dt, &terms);
            let (_, rest) = k.split_at_mut(s);
            f(&stage, &mut rest[0]);
            if s == 5 {
                stage6.0.copy_from_slice(&stage.0);
            }
        }
        // Stage 7 was evaluated at the fifth-order solution (FSAL).
        next.0.copy_from_slice(&stage.0);
        if !next.is_finite() {
            if dt > h_min {
                h = 0.25 * dt;
                continue;
            }
            break TerminalReason::NonFinite;
        }

        let mut sum = 0.0;
        for idx in 0..n {
            let mut e = Position::ORIGIN;
            for (s, &w) in E.iter().enumerate() {
                if w != 0.0 {
                    e += (dt * w) * k[s][idx];
                }
            }
            let (a, b) = (y.0[idx], next.0[idx]);
            let sx = atol + rtol * a.x.abs().max(b.x.abs());
            let sy = atol + rtol * a.y.abs().max(b.y.abs());
            sum += (e.x / sx).powi(2) + (e.y / sy).powi(2);
        }
        let err = (sum / (2 * n) as f64).sqrt();
        if !err.is_finite() {
            if dt > h_min {
                h = 0.25 * dt;
                continue;
            }
            break TerminalReason::NonFinite;
        }

        if err <= 1.0 || dt <= h_min {
            // Stages 6 and 7 share the time t + dt, so their slope difference
            // over their state difference estimates the stiffest rate. Near
            // an equilibrium the error control alone lets the step drift to
            // the stability limit, where the state stops contracting.
            let dy = stacked_diff(&next.0, &stage6.0);
            if dy > 0.0 {
                let rate = stacked_diff(&k[6], &k[5]) / dy;
                if rate > 0.0 {
                    h_stable = STABILITY_SAFETY * STABILITY_BOUNDARY / rate;
                }
            }
            t = if dt == cfg.t_max - t {
                cfg.t_max
            } else {
                t + dt
            };
            std::mem::swap(&mut y, &mut next);
            k.swap(0, 6);
            rec.step(t, &y);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (dt * factor).min(h_stable).max(h_min);
        } else {
            h = (dt * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)).max(h_min);
        }
    };
    rec.finish(t, y, reason)
}
