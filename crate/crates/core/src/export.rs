//! Text formatting and CSV exports.
//!
//! Trajectory export, one row per sample:
//!
//! ```text
//! t,x1,y1,x2,y2,...,xn,yn
//! ```
//!
//! Basin export, one row per grid node in row-major order from the lower-left
//! corner:
//!
//! ```text
//! x0,y0,label,x_end,y_end,terminal
//! ```
//!
//! `label` is the equilibrium label (`Pa`, ..., or `E<index>` for numeric
//! roots), `Unmatched` or `NonConvergent`; `terminal` is the integrator's stop
//! reason. All numbers use [`fmt_sig`].

use std::io::Write;

use crate::error::Result;
use crate::simulator::{BasinMap, Trajectory};

/// Formats with 12 significant digits, like C's `%.12g`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_fraction(mantissa.to_string()), exp)
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        let keep = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(keep);
    }
    s
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let agents = traj.states.first().map_or(0, |s| s.len());
    let mut header = vec!["t".to_string()];
    for a in 1..=agents {
        header.push(format!("x{a}"));
        header.push(format!("y{a}"));
    }
    w.write_record(&header)?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt_sig(*t)];
        for p in state.positions() {
            row.push(fmt_sig(p.x));
            row.push(fmt_sig(p.y));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_basin<W: Write>(map: &BasinMap, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x0", "y0", "label", "x_end", "y_end", "terminal"])?;
    for node in &map.nodes {
        w.write_record([
            fmt_sig(node.start.x),
            fmt_sig(node.start.y),
            map.label_name(node.label),
            fmt_sig(node.terminal.x),
            fmt_sig(node.terminal.y),
            node.reason.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::fmt_sig;

    #[test]
    fn sig12() {
        assert_eq!(fmt_sig(18.0), "18");
        assert_eq!(fmt_sig(-0.5), "-0.5");
        assert_eq!(fmt_sig(12.0 * 34f64.sqrt() - 68.0), "1.97142273814");
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_sig(9.999999999999995), "10");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(-3.0 - 7f64.sqrt()), "-5.64575131106");
    }
}
