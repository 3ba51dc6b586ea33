//! CSV and JSON file formats.
//!
//! Numbers are written with 9 significant digits in `e` notation and lines
//! end with `\n`, so files are byte-stable and parse → emit reproduces them
//! exactly.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::acoustics::ModeTable;
use crate::fitsuite::FitResult;
use crate::piezo::{PhononLadder, PhononMode};
use crate::spectro::{Spectrogram, Spectrum};
use crate::{Error, Result};

pub const MODE_TABLE_HEADER: &str = "n,f_hz,lambda_m";
pub const LADDER_HEADER: &str = "n,f_hz,g_hz,gamma_hz";
pub const SPECTRUM_HEADER: &str = "f_hz,re_s21,im_s21,abs_s21";
pub const SPECTROGRAM_HEADER: &str = "flux,f_hz,abs_s21";
pub const EIGEN_HEADER: &str = "n,f_fd_hz,f_analytic_hz,rel_err";

/// Formats a float with 9 significant digits, e.g. `4.79150000e9`.
pub fn fmt_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn push_row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

pub fn mode_table_csv(table: &ModeTable) -> String {
    let mut out = format!("{MODE_TABLE_HEADER}\n");
    for e in &table.entries {
        push_row(
            &mut out,
            &[e.n.to_string(), fmt_sig9(e.f_hz), fmt_sig9(e.lambda_m)],
        );
    }
    out
}

pub fn ladder_csv(ladder: &PhononLadder) -> String {
    let mut out = format!("{LADDER_HEADER}\n");
    for m in ladder.modes() {
        push_row(
            &mut out,
            &[
                m.n.to_string(),
                fmt_sig9(m.f_hz),
                fmt_sig9(m.g_hz),
                fmt_sig9(m.gamma_hz),
            ],
        );
    }
    out
}

pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for (f, z) in spectrum.frequencies().iter().zip(spectrum.s21()) {
        let (re, im) = (fmt_sig9(z.re), fmt_sig9(z.im));
        // magnitude of the rounded components, so a re-read file emits the same bytes
        let abs = Complex64::new(re.parse().unwrap_or(z.re), im.parse().unwrap_or(z.im)).norm();
        push_row(&mut out, &[fmt_sig9(*f), re, im, fmt_sig9(abs)]);
    }
    out
}

pub fn spectrogram_csv(sg: &Spectrogram) -> String {
    let mut out = format!("{SPECTROGRAM_HEADER}\n");
    for (flux, row) in sg.flux_axis().iter().zip(sg.rows()) {
        let flux = fmt_sig9(*flux);
        for (f, m) in sg.freq_axis().iter().zip(row) {
            let _ = writeln!(out, "{flux},{},{}", fmt_sig9(*f), fmt_sig9(*m));
        }
    }
    out
}

/// FD-versus-analytic comparison rows `(n, f_fd, f_analytic)`.
pub fn eigen_csv(rows: &[(u64, f64, f64)]) -> String {
    let mut out = format!("{EIGEN_HEADER}\n");
    for &(n, fd, exact) in rows {
        push_row(
            &mut out,
            &[
                n.to_string(),
                fmt_sig9(fd),
                fmt_sig9(exact),
                fmt_sig9((fd - exact) / exact),
            ],
        );
    }
    out
}

pub fn fit_result_json(fit: &FitResult) -> String {
    let mut s = serde_json::to_string_pretty(fit).expect("FitResult serializes");
    s.push('\n');
    s
}

pub fn parse_fit_result(text: &str) -> Result<FitResult> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("fit result JSON: {e}")))
}

/// Splits a CSV body after checking its header; returns numeric rows.
fn numeric_rows(text: &str, header: &str, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?;
    if first.trim_end_matches('\r') != header {
        return Err(Error::Format(format!(
            "expected header `{header}`, found `{first}`"
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns {
            return Err(Error::Format(format!(
                "line {}: expected {columns} fields, found {}",
                i + 2,
                fields.len()
            )));
        }
        let row = fields
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("line {}: `{f}` is not a number", i + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_spectrum_csv(text: &str) -> Result<Spectrum> {
    let rows = numeric_rows(text, SPECTRUM_HEADER, 4)?;
    let freqs = rows.iter().map(|r| r[0]).collect();
    let s21 = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    Spectrum::new(freqs, s21).map_err(|e| Error::Format(e.to_string()))
}

pub fn parse_spectrogram_csv(text: &str) -> Result<Spectrogram> {
    let rows = numeric_rows(text, SPECTROGRAM_HEADER, 3)?;
    let mut flux_axis: Vec<f64> = Vec::new();
    let mut freq_axis: Vec<f64> = Vec::new();
    let mut magnitude: Vec<Vec<f64>> = Vec::new();
    for r in &rows {
        if flux_axis.last() != Some(&r[0]) {
            flux_axis.push(r[0]);
            magnitude.push(Vec::new());
        }
        let row = magnitude.last_mut().expect("row pushed above");
        if flux_axis.len() == 1 {
            freq_axis.push(r[1]);
        } else if freq_axis.get(row.len()) != Some(&r[1]) {
            return Err(Error::Format(format!(
                "spectrogram is not on a regular grid at flux {}",
                r[0]
            )));
        }
        row.push(r[2]);
    }
    Spectrogram::new(flux_axis, freq_axis, magnitude).map_err(|e| Error::Format(e.to_string()))
}

pub fn parse_ladder_csv(text: &str) -> Result<PhononLadder> {
    let rows = numeric_rows(text, LADDER_HEADER, 4)?;
    let modes = rows
        .iter()
        .map(|r| PhononMode {
            n: r[0] as u64,
            f_hz: r[1],
            g_hz: r[2],
            gamma_hz: r[3],
        })
        .collect();
    PhononLadder::new(modes).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    std::fs::write(path.as_ref(), contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::SlabGeometry;
    use proptest::prelude::*;

    #[test]
    fn sig9_format() {
        assert_eq!(fmt_sig9(4.7915e9), "4.79150000e9");
        assert_eq!(fmt_sig9(-1.25e-3), "-1.25000000e-3");
        assert_eq!(fmt_sig9(0.0), "0.00000000e0");
    }

    #[test]
    fn mode_table_layout() {
        let g = SlabGeometry::new(5e-4, 0.0).unwrap();
        let t = ModeTable::first(3578.4, &g, 2).unwrap();
        assert_eq!(
            mode_table_csv(&t),
            "n,f_hz,lambda_m\n1,3.57840000e6,1.00000000e-3\n2,7.15680000e6,5.00000000e-4\n"
        );
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(matches!(
            parse_spectrum_csv("f,re,im,abs\n1,0,0,0\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(parse_spectrogram_csv(""), Err(Error::Format(_))));
        assert!(matches!(
            parse_spectrum_csv("f_hz,re_s21,im_s21,abs_s21\n1,2,x,4\n"),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn ragged_spectrogram_rejected() {
        let text = "flux,f_hz,abs_s21\n0,1,0.5\n0,2,0.5\n1,1,0.5\n1,3,0.5\n";
        assert!(parse_spectrogram_csv(text).is_err());
    }

    proptest! {
        #[test]
        fn spectrum_csv_roundtrip_is_byte_identical(
            start in 1.0e9f64..6.0e9,
            step in 1.0e3f64..1.0e6,
            vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..40),
        ) {
            let freqs: Vec<f64> = (0..vals.len()).map(|i| start + step * i as f64).collect();
            let s21 = vals.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            let spec = Spectrum::new(freqs, s21).unwrap();
            let first = spectrum_csv(&spec);
            let second = spectrum_csv(&parse_spectrum_csv(&first).unwrap());
            prop_assert_eq!(first, second);
        }

        #[test]
        fn spectrogram_csv_roundtrip_is_byte_identical(
            nflux in 1usize..5,
            nf in 3usize..12,
            seed in 0.0f64..1.0,
        ) {
            let flux: Vec<f64> = (0..nflux).map(|i| -0.3 + 0.1 * i as f64).collect();
            let freq: Vec<f64> = (0..nf).map(|i| 4.7e9 + 1.3e5 * i as f64).collect();
            let mag = (0..nflux)
                .map(|i| (0..nf).map(|j| ((i * nf + j) as f64 * 0.37 + seed).fract()).collect())
                .collect();
            let sg = Spectrogram::new(flux, freq, mag).unwrap();
            let first = spectrogram_csv(&sg);
            let second = spectrogram_csv(&parse_spectrogram_csv(&first).unwrap());
            prop_assert_eq!(first, second);
        }
    }

    #[test]
    fn ladder_roundtrip() {
        let ladder = crate::piezo::coupled_mode_ladder(
            4.7915e9,
            20e6,
            3.5784e6,
            2e6,
            1.6e6,
            &crate::piezo::DriveField::aligned(),
        )
        .unwrap();
        let text = ladder_csv(&ladder);
        assert!(text.starts_with("n,f_hz,g_hz,gamma_hz\n1335,"));
        assert_eq!(ladder_csv(&parse_ladder_csv(&text).unwrap()), text);
    }

    #[test]
    fn fit_json_shape() {
        let mut fit = FitResult {
            parameters: Default::default(),
            uncertainties: Default::default(),
            residual_norm: 0.5,
            converged: true,
            iterations: 12,
        };
        fit.parameters.insert("g_hz".into(), 7.3e7);
        fit.uncertainties.insert("g_hz".into(), 1e5);
        let text = fit_result_json(&fit);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["parameters"]["g_hz"], 7.3e7);
        assert_eq!(v["uncertainties"]["g_hz"], 1e5);
        assert_eq!(v["converged"], true);
        assert_eq!(v["iterations"], 12);
        assert_eq!(parse_fit_result(&text).unwrap(), fit);
    }
}
