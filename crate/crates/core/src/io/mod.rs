//! Run configuration, result files and the command implementations behind the CLI.

pub mod commands;
pub mod config;
pub mod mtx;
pub mod svg;

use std::path::Path;

use serde::Serialize;

use crate::Result;

pub use commands::{cmd_portrait, cmd_resolvent, cmd_resonances, cmd_validate, CommandOptions};
pub use config::RunConfig;

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Renders rows as CSV with a header.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| crate::Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(!s.contains(','));
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_has_header() {
        let s = to_csv(&["a", "b"], &[vec!["1".into(), "x".into()]]).unwrap();
        assert_eq!(s, "a,b\n1,x\n");
    }
}
