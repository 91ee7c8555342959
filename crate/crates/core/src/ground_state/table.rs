//! Plain-text profile table.
//!
//! ```text
//! # p u0 decay_rate tail_amplitude
//! # 5e0 5.22...e0 1e0 ...
//! 0e0 5.22...e0
//! 5e-3 5.22...e0
//! ```
//!
//! The second comment line carries the header values; every other line is an
//! `r u` pair. Floats are written in shortest round-trip form.

use std::io::{BufRead, Write};

use super::RadialProfile;
use crate::error::{Error, Result};

pub const HEADER: &str = "# p u0 decay_rate tail_amplitude";

pub fn write_profile<W: Write>(mut w: W, profile: &RadialProfile) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    writeln!(
        w,
        "# {:e} {:e} {:e} {:e}",
        profile.p(),
        profile.u0(),
        profile.decay_rate(),
        profile.tail_amplitude()
    )?;
    for (r, u) in profile.r_nodes().iter().zip(profile.u_values()) {
        writeln!(w, "{r:e} {u:e}")?;
    }
    Ok(())
}

pub fn read_profile<R: BufRead>(r: R) -> Result<RadialProfile> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty profile".into()))??;
    if header.trim() != HEADER {
        return Err(Error::Format(format!("unexpected header `{header}`")));
    }
    let meta = lines
        .next()
        .ok_or_else(|| Error::Format("missing header values".into()))??;
    let meta: Vec<f64> = parse_floats(meta.trim_start_matches('#'))?;
    let [p, u0, rate, amp] = meta[..] else {
        return Err(Error::Format("header needs four values".into()));
    };

    let mut rs = Vec::new();
    let mut us = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = parse_floats(line)?;
        let [r, u] = v[..] else {
            return Err(Error::Format(format!("bad row `{line}`")));
        };
        rs.push(r);
        us.push(u);
    }
    if rs.len() < 5 || rs[0] != 0.0 {
        return Err(Error::Format("table must start at r = 0 with >= 5 rows".into()));
    }
    let spacing = rs[1];
    for (j, r) in rs.iter().enumerate() {
        if (r - j as f64 * spacing).abs() > 1e-9 * spacing.max(*r) {
            return Err(Error::Format(format!("non-uniform node at row {j}")));
        }
    }
    if us[0] != u0 {
        return Err(Error::Format("first row does not match u0".into()));
    }
    RadialProfile::new(p, spacing, us, rate, amp)
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Format(format!("bad number `{t}`: {e}")))
        })
        .collect()
}
