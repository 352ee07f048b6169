//! CSV and JSON writers. Data files carry no wall-clock content, so identical
//! runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::CliError;
use crate::dynamics::Trajectory;

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `t,pop_1..pop_n,norm`, preceded by one `#` metadata line.
pub fn populations_csv(label: &str, traj: &Trajectory) -> String {
    let n = traj.n_states();
    let pops = traj.populations();
    let norms = traj.norms();
    let mut out = String::new();
    let _ = writeln!(out, "# run={label} states={n} points={}", traj.len());
    out.push('t');
    for i in 1..=n {
        let _ = write!(out, ",pop_{i}");
    }
    out.push_str(",norm\n");
    for (j, &t) in traj.times.iter().enumerate() {
        out.push_str(&fmt_f64(t));
        for i in 0..n {
            out.push(',');
            out.push_str(&fmt_f64(pops[(i, j)]));
        }
        out.push(',');
        out.push_str(&fmt_f64(norms[j]));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub exact: f64,
    pub reduced: f64,
    pub sector: &'static str,
}

/// `index,exact,reduced,abs_error,sector`, both spectra sorted ascending.
pub fn spectra_csv(rows: &[SpectrumRow]) -> String {
    let mut out =
        String::from("# spectrum of H against the union of the block-diagonalized sectors\n");
    out.push_str("index,exact,reduced,abs_error,sector\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.index,
            fmt_f64(r.exact),
            fmt_f64(r.reduced),
            fmt_f64((r.exact - r.reduced).abs()),
            r.sector
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMatrix};

    #[test]
    fn csv_layout() {
        let traj = Trajectory {
            times: vec![0.0, 0.5],
            amplitudes: CMatrix::from_row_slice(
                2,
                2,
                &[c(1.0, 0.0), c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.8)],
            ),
        };
        let csv = populations_csv("exact", &traj);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# run=exact states=2 points=2");
        assert_eq!(lines[1], "t,pop_1,pop_2,norm");
        let fields: Vec<f64> = lines[3].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields[0], 0.5);
        assert!((fields[1] - 0.36).abs() < 1e-15 && (fields[2] - 0.64).abs() < 1e-15);
        assert!((fields[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trips_f64() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
