//! Artifact serialization: profile CSV files (full double precision) and
//! JSON reports.

use crate::kpp::KppWave;
use crate::numerics::{Grid, WaveProfile};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Renders a profile as CSV with header `xi,u,v`, one row per node,
/// 17 significant digits.
pub fn profile_to_csv(profile: &WaveProfile) -> String {
    let mut out = String::with_capacity(profile.grid.len() * 72 + 16);
    out.push_str("xi,u,v\n");
    for (i, x) in profile.grid.nodes().enumerate() {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", x, profile.u[i], profile.v[i]);
    }
    out
}

/// Renders a KPP front as CSV with a comment line recording its data.
pub fn kpp_to_csv(wave: &KppWave) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# d1={:.16e} d2={:.16e} b={:.16e} c={:.16e}",
        wave.spec.d1, wave.spec.d2, wave.spec.b, wave.c
    );
    out.push_str("xi,w\n");
    for (i, x) in wave.profile.grid.nodes().enumerate() {
        let _ = writeln!(out, "{:.16e},{:.16e}", x, wave.profile.values[i]);
    }
    out
}

/// Parses a profile CSV produced by [`profile_to_csv`].
pub fn profile_from_csv(text: &str) -> Result<WaveProfile> {
    let mut xs = Vec::new();
    let mut us = Vec::new();
    let mut vs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("xi") {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing {name}", lineno + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
        };
        xs.push(next("xi")?);
        us.push(next("u")?);
        vs.push(next("v")?);
    }
    if xs.len() < 3 {
        return Err(Error::Parse("profile CSV holds fewer than 3 rows".into()));
    }
    let l = -xs[0];
    if (xs[xs.len() - 1] - l).abs() > 1e-9 * l.max(1.0) {
        return Err(Error::Parse("profile grid is not symmetric".into()));
    }
    let grid = Grid::new(l, xs.len())?;
    WaveProfile::new(grid, us, vs)
}

/// Writes text to a file, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("JSON serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Reads a flat key-value config file: one `key = value` (or `key value`)
/// pair per line, `#` comments.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = if let Some((k, v)) = line.split_once('=') {
            (k, v)
        } else if let Some((k, v)) = line.split_once(char::is_whitespace) {
            (k, v)
        } else {
            return Err(Error::Parse(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn profile_roundtrip_exact() {
        let g = Grid::new(2.0, 5).unwrap();
        let prof = WaveProfile::new(
            g,
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![0.0, 0.1, 0.5, 0.9, 1.0],
        )
        .unwrap();
        let csv = profile_to_csv(&prof);
        let back = profile_from_csv(&csv).unwrap();
        assert_eq!(prof.u, back.u);
        assert_eq!(prof.v, back.v);
        assert_eq!(prof.grid, back.grid);
    }

    #[test]
    fn config_parsing() {
        let cfg = parse_config("a1 = 0.5\n# comment\na2=2\nr 0.5\nc = 2.0\n").unwrap();
        assert_eq!(cfg.len(), 4);
        assert_eq!(cfg[0], ("a1".to_string(), "0.5".to_string()));
        assert_eq!(cfg[2], ("r".to_string(), "0.5".to_string()));
        assert!(parse_config("nonsense").is_err());
    }

    proptest! {
        /// CSV round-trip is bit-exact for arbitrary finite profiles.
        #[test]
        fn csv_roundtrip_bits(vals in prop::collection::vec(0.0f64..1.0, 5)) {
            let g = Grid::new(1.0, 5).unwrap();
            let prof = WaveProfile::new(g, vals.clone(), vals).unwrap();
            let back = profile_from_csv(&profile_to_csv(&prof)).unwrap();
            prop_assert!(prof.u.iter().zip(&back.u).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
