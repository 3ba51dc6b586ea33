//! Parameter extraction from synthetic or measured transmission data.
//!
//! - [`extract_peaks`] finds prominent extrema of `|S21|`.
//! - [`extract_branches`] reads upper/lower branch frequencies off a
//!   flux-swept spectrogram.
//! - [`fit_avoided_crossing`] fits the two-mode branches for the qubit–cavity
//!   coupling `g`.
//! - [`fit_notches`] fits the high-power notch spectrum for per-mode
//!   `(f_m, g_m, γ_m)` and the ladder spacing.
//! - [`q_factor`] and [`estimate_phonon_q`] turn linewidths into quality
//!   factors.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lsq::{LeastSquares, Solution};
use crate::piezo::{PhononLadder, PhononMode};
use crate::spectro::{abs_cos_pi, avoided_crossing_branches, CavityParams, Spectrogram, Spectrum};
use crate::{Error, Result};

/// Recovered parameters with 1-σ uncertainties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: BTreeMap<String, f64>,
    pub uncertainties: BTreeMap<String, f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.uncertainties.get(name).copied()
    }

    fn insert(&mut self, name: impl Into<String>, value: f64, sigma: f64) {
        let name = name.into();
        self.parameters.insert(name.clone(), value);
        self.uncertainties.insert(name, sigma.abs());
    }

    fn from_solution(names: &[String], sol: &Solution) -> Self {
        let mut out = Self {
            parameters: BTreeMap::new(),
            uncertainties: BTreeMap::new(),
            residual_norm: sol.residual_norm,
            converged: sol.converged,
            iterations: sol.iterations,
        };
        for ((name, v), s) in names.iter().zip(&sol.params).zip(sol.std_errors()) {
            out.insert(name.clone(), *v, s);
        }
        out
    }

    /// Number of phonon modes in a [`fit_notches`] result.
    pub fn notch_count(&self) -> usize {
        (0..)
            .take_while(|i| self.parameters.contains_key(&notch_key("f", *i)))
            .count()
    }

    /// Per-mode `(f_m, g_m, γ_m)` of a [`fit_notches`] result.
    pub fn notch_modes(&self) -> Vec<(f64, f64, f64)> {
        (0..self.notch_count())
            .map(|i| {
                (
                    self.parameters[&notch_key("f", i)],
                    self.parameters[&notch_key("g", i)],
                    self.parameters[&notch_key("gamma", i)],
                )
            })
            .collect()
    }
}

/// Parameter key for mode `i` of a notch fit, e.g. `g_m2_hz`.
pub fn notch_key(quantity: &str, i: usize) -> String {
    format!("{quantity}_m{i}_hz")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Peak,
    Dip,
}

/// A local extremum of `|S21|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    /// Interpolated position (Hz).
    pub f: f64,
    /// Interpolated `|S21|`.
    pub value: f64,
    pub prominence: f64,
}

/// Local extrema of `|S21|` whose prominence exceeds `prominence`, sorted by
/// frequency.
///
/// Prominence is measured against the higher of the two saddles reached by
/// walking outwards until the trace passes the extremum (or the data ends).
/// Positions are refined with a parabola through the extremum and its two
/// neighbours.
pub fn extract_peaks(
    spectrum: &Spectrum,
    kind: ExtremumKind,
    prominence: f64,
) -> Result<Vec<Extremum>> {
    extract_from_values(
        spectrum.frequencies(),
        &spectrum.magnitude(),
        kind,
        prominence,
    )
}

fn extract_from_values(
    freqs: &[f64],
    values: &[f64],
    kind: ExtremumKind,
    prominence: f64,
) -> Result<Vec<Extremum>> {
    if values.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 samples, got {}",
            values.len()
        )));
    }
    if !(prominence > 0.0) {
        return Err(Error::Domain(format!(
            "prominence must be positive, got {prominence}"
        )));
    }
    let sign = match kind {
        ExtremumKind::Peak => 1.0,
        ExtremumKind::Dip => -1.0,
    };
    let y: Vec<f64> = values.iter().map(|v| sign * v).collect();
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if !(y[i] > y[i - 1]) {
            i += 1;
            continue;
        }
        // allow flat tops: find the end of the plateau
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= n || !(y[j + 1] < y[i]) {
            i = j + 1;
            continue;
        }
        let top = y[i];
        let mut left_min = top;
        for k in (0..i).rev() {
            if y[k] > top {
                break;
            }
            left_min = left_min.min(y[k]);
        }
        let mut right_min = top;
        for &v in &y[j + 1..] {
            if v > top {
                break;
            }
            right_min = right_min.min(v);
        }
        let prom = top - left_min.max(right_min);
        if prom > prominence {
            let c = (i + j) / 2;
            let (f, v) = if i == j {
                parabola_vertex(
                    [freqs[c - 1], freqs[c], freqs[c + 1]],
                    [y[c - 1], y[c], y[c + 1]],
                )
            } else {
                (0.5 * (freqs[i] + freqs[j]), top)
            };
            out.push(Extremum {
                f,
                value: sign * v,
                prominence: prom,
            });
        }
        i = j + 1;
    }
    Ok(out)
}

/// Vertex of the parabola through three points; falls back to the middle
/// point when the three are collinear.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (x0, x1, x2) = (x[0] - x[1], 0.0, x[2] - x[1]);
    let d1 = (y[0] - y[1]) / (x0 - x1);
    let d2 = (y[2] - y[1]) / (x2 - x1);
    let a = (d2 - d1) / (x2 - x0);
    if a == 0.0 || !a.is_finite() {
        return (x[1], y[1]);
    }
    // y = y1 + b·u + a·u², with b from the two secants
    let b = d1 - a * x0;
    let u = (-b / (2.0 * a)).clamp(x0, x2);
    (x[1] + u, y[1] + b * u + a * u * u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub flux: f64,
    pub f_peak: f64,
    pub branch: Branch,
}

/// Branch frequencies against flux.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BranchPoints {
    points: Vec<BranchPoint>,
}

impl BranchPoints {
    /// Checks that each flux value carries at most one point per branch and
    /// that the upper point is not below the lower one.
    pub fn new(mut points: Vec<BranchPoint>) -> Result<Self> {
        points.sort_by(|a, b| {
            a.flux
                .total_cmp(&b.flux)
                .then((a.branch as u8).cmp(&(b.branch as u8)))
        });
        for w in points.windows(2) {
            if w[0].flux == w[1].flux {
                if w[0].branch == w[1].branch {
                    return Err(Error::Domain(format!(
                        "two {:?} points at flux {}",
                        w[0].branch, w[0].flux
                    )));
                }
                let (up, lo) = if w[0].branch == Branch::Upper {
                    (w[0], w[1])
                } else {
                    (w[1], w[0])
                };
                if up.f_peak < lo.f_peak {
                    return Err(Error::Domain(format!(
                        "upper branch below lower at flux {}",
                        up.flux
                    )));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[BranchPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(flux, lower, upper)` for each flux where both branches are present.
    pub fn pairs(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            if w[0].flux == w[1].flux {
                let (lo, up) = if w[0].branch == Branch::Lower {
                    (w[0], w[1])
                } else {
                    (w[1], w[0])
                };
                out.push((w[0].flux, lo.f_peak, up.f_peak));
            }
        }
        out
    }

    /// Returns a copy with every frequency shifted by `shift(i)`.
    pub fn map_frequencies(&self, mut shift: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let pts = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| BranchPoint {
                f_peak: shift(i, p.f_peak),
                ..*p
            })
            .collect();
        Self::new(pts)
    }
}

/// Reads branch points from a spectrogram.
///
/// At each flux the two most prominent peaks at least `min_separation` apart,
/// sorted by frequency, become the lower and upper branch; the separation
/// keeps a line split by narrow notches from counting twice. A flux with a
/// single peak gets the label of the closer branch at the nearest flux that
/// shows both.
pub fn extract_branches(
    spectrogram: &Spectrogram,
    prominence: f64,
    min_separation: f64,
) -> Result<BranchPoints> {
    if !(min_separation >= 0.0) {
        return Err(Error::Domain(format!(
            "min_separation must be non-negative, got {min_separation}"
        )));
    }
    let freqs = spectrogram.freq_axis();
    let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
    for (flux, row) in spectrogram.flux_axis().iter().zip(spectrogram.rows()) {
        let mut peaks = extract_from_values(freqs, row, ExtremumKind::Peak, prominence)?;
        peaks.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
        let mut fs: Vec<f64> = Vec::with_capacity(2);
        for p in &peaks {
            if fs.len() == 2 {
                break;
            }
            if fs.iter().all(|f| (f - p.f).abs() >= min_separation) {
                fs.push(p.f);
            }
        }
        fs.sort_by(f64::total_cmp);
        rows.push((*flux, fs));
    }
    let paired: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|(_, fs)| fs.len() == 2)
        .map(|(flux, fs)| (*flux, fs[0], fs[1]))
        .collect();
    let mut points = Vec::new();
    for (flux, fs) in &rows {
        match fs.as_slice() {
            [lo, up] => {
                points.push(BranchPoint {
                    flux: *flux,
                    f_peak: *lo,
                    branch: Branch::Lower,
                });
                points.push(BranchPoint {
                    flux: *flux,
                    f_peak: *up,
                    branch: Branch::Upper,
                });
            }
            [f] => {
                let branch = paired
                    .iter()
                    .min_by(|a, b| (a.0 - flux).abs().total_cmp(&(b.0 - flux).abs()))
                    .map(|&(_, lo, up)| {
                        if (f - lo).abs() < (f - up).abs() {
                            Branch::Lower
                        } else {
                            Branch::Upper
                        }
                    })
                    .unwrap_or(Branch::Upper);
                points.push(BranchPoint {
                    flux: *flux,
                    f_peak: *f,
                    branch,
                });
            }
            _ => {}
        }
    }
    BranchPoints::new(points)
}

/// Qubit dispersion with flux offset and scale, as used by the crossing fit.
pub fn tuned_qubit_frequency(f_max: f64, flux: f64, flux_offset: f64, flux_scale: f64) -> f64 {
    f_max * abs_cos_pi(flux_scale * (flux - flux_offset)).sqrt()
}

const CROSSING_NAMES: [&str; 5] = ["f_c_hz", "f_max_hz", "flux_offset", "flux_scale", "g_hz"];

/// Fits `f_±(Φ) = (f_c + f_q)/2 ± sqrt(g² + (f_q − f_c)²/4)` with
/// `f_q = f_max·sqrt|cos(π·scale·(Φ − offset))|` to branch points.
///
/// Residuals are normalized by the mean branch frequency, so
/// `residual_norm` is dimensionless.
pub fn fit_avoided_crossing(points: &BranchPoints) -> Result<FitResult> {
    fit_avoided_crossing_with(points, &LeastSquares::default())
}

pub fn fit_avoided_crossing_with(
    points: &BranchPoints,
    solver: &LeastSquares,
) -> Result<FitResult> {
    let pts = points.points();
    if pts.len() < 6 {
        return Err(Error::IllPosed(format!(
            "need at least 6 branch points, got {}",
            pts.len()
        )));
    }
    let pairs = points.pairs();
    if pairs.is_empty()
        || pts.iter().all(|p| p.branch == Branch::Upper)
        || pts.iter().all(|p| p.branch == Branch::Lower)
    {
        return Err(Error::IllPosed(
            "all branch points lie on one branch".into(),
        ));
    }
    let f_ref = pts.iter().map(|p| p.f_peak).sum::<f64>() / pts.len() as f64;

    // closest approach gives f_c and g
    let &(_, lo_x, up_x) = pairs
        .iter()
        .min_by(|a, b| (a.2 - a.1).total_cmp(&(b.2 - b.1)))
        .expect("pairs is non-empty");
    let f_c0 = 0.5 * (lo_x + up_x);
    let g0 = 0.5 * (up_x - lo_x);
    // f_+ + f_- = f_c + f_q recovers the bare qubit wherever both branches show
    let fq_est: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(flux, lo, up)| (flux, lo + up - f_c0))
        .collect();
    let &(offset0, fmax0) = fq_est
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("pairs is non-empty");
    let mut scales: Vec<f64> = fq_est
        .iter()
        .filter(|(flux, fq)| (flux - offset0).abs() > 0.0 && *fq > 0.0)
        .filter_map(|&(flux, fq)| {
            let c = (fq / fmax0).powi(2);
            (c < 0.999).then(|| c.acos() / (PI * (flux - offset0).abs()))
        })
        .collect();
    scales.sort_by(f64::total_cmp);
    let scale0 = scales.get(scales.len() / 2).copied().unwrap_or(1.0);

    let x0 = [f_c0, fmax0, offset0, scale0, g0];
    let typical = [
        f_ref,
        f_ref,
        1.0 / scale0.abs().max(1e-6),
        scale0.abs().max(1e-6),
        g0.abs().max(1e-3 * f_ref),
    ];
    let model = |p: &[f64]| -> Vec<f64> {
        pts.iter()
            .map(|pt| {
                let fq = tuned_qubit_frequency(p[1], pt.flux, p[2], p[3]);
                let (lo, up) = avoided_crossing_branches(p[0], fq, p[4]);
                let f = match pt.branch {
                    Branch::Upper => up,
                    Branch::Lower => lo,
                };
                (f - pt.f_peak) / f_ref
            })
            .collect()
    };
    let sol = solver.minimize(model, &x0, &typical)?;
    let names: Vec<String> = CROSSING_NAMES.iter().map(|s| s.to_string()).collect();
    let mut result = FitResult::from_solution(&names, &sol);
    let g = result.parameters["g_hz"].abs();
    result.parameters.insert("g_hz".into(), g);
    let scale = result.parameters["flux_scale"].abs();
    result.parameters.insert("flux_scale".into(), scale);
    Ok(result)
}

/// Fits the high-power notch spectrum.
///
/// Free parameters are `f_c`, `κ_total` and per-mode `(f_m, g_m, γ_m)`. The
/// port couplings keep the ratios `κ_in/κ_total`, `κ_out/κ_total` of
/// `cavity_guess`. Mode frequencies start at the nearest transmission dip
/// (within a quarter of the ladder spacing) or at the ladder value. The
/// result also carries `fsr_hz`, the mean spacing of the fitted modes, with
/// the standard error of the individual spacings as its uncertainty.
pub fn fit_notches(
    spectrum: &Spectrum,
    initial_ladder: &PhononLadder,
    cavity_guess: &CavityParams,
) -> Result<FitResult> {
    fit_notches_with(
        spectrum,
        initial_ladder,
        cavity_guess,
        &LeastSquares::default(),
    )
}

pub fn fit_notches_with(
    spectrum: &Spectrum,
    initial_ladder: &PhononLadder,
    cavity_guess: &CavityParams,
    solver: &LeastSquares,
) -> Result<FitResult> {
    let modes = initial_ladder.modes();
    let n_params = 2 + 3 * modes.len();
    if n_params > spectrum.len() {
        return Err(Error::IllPosed(format!(
            "{n_params} free parameters but only {} spectrum samples",
            spectrum.len()
        )));
    }
    let freqs = spectrum.frequencies();
    let data = spectrum.magnitude();
    let ratio = (cavity_guess.kappa_in * cavity_guess.kappa_out).sqrt() / cavity_guess.kappa_total;

    let spacing = initial_ladder
        .spacings()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let window = if spacing.is_finite() {
        0.25 * spacing
    } else {
        cavity_guess.kappa_total
    };
    let dips = if spectrum.len() >= 3 {
        extract_peaks(spectrum, ExtremumKind::Dip, 1e-4)?
    } else {
        Vec::new()
    };

    // Each mode lives in its own ladder cell: f_m = c_m + (s/2)·tanh(a_m)
    // and γ_m = s·logistic(b_m), so a notch with no support in the data
    // cannot wander off or turn into a broad background term.
    let cell = if spacing.is_finite() {
        spacing
    } else {
        4.0 * cavity_guess.kappa_total
    };
    let centers: Vec<f64> = modes.iter().map(|m| m.f_hz).collect();
    let to_physical = |p: &[f64]| -> Vec<f64> {
        let mut q = p.to_vec();
        for (i, chunk) in q[2..].chunks_exact_mut(3).enumerate() {
            chunk[0] = centers[i] + 0.5 * cell * chunk[0].tanh();
            chunk[2] = cell * logistic(chunk[2]);
        }
        q
    };

    let mut x0 = vec![cavity_guess.f_c, cavity_guess.kappa_total];
    let mut typical = vec![cavity_guess.f_c, cavity_guess.kappa_total];
    for m in modes {
        if m.gamma_hz >= cell {
            return Err(Error::IllPosed(format!(
                "initial linewidth {} Hz is not below the mode spacing {cell} Hz",
                m.gamma_hz
            )));
        }
        let f0 = dips
            .iter()
            .filter(|d| (d.f - m.f_hz).abs() <= window)
            .min_by(|a, b| (a.f - m.f_hz).abs().total_cmp(&(b.f - m.f_hz).abs()))
            .map_or(m.f_hz, |d| d.f);
        let a0 = (2.0 * (f0 - m.f_hz) / cell).atanh();
        let b0 = (m.gamma_hz / (cell - m.gamma_hz)).ln();
        x0.extend([a0, m.g_hz, b0]);
        let g_typ = if m.g_hz.abs() > 0.0 {
            m.g_hz.abs()
        } else {
            m.gamma_hz
        };
        typical.extend([1.0, g_typ, 1.0]);
    }
    let model = |p: &[f64]| -> Vec<f64> {
        let q = to_physical(p);
        freqs
            .iter()
            .zip(&data)
            .map(|(&f, &y)| notch_magnitude(&q, ratio, f) - y)
            .collect()
    };
    let mut sol = solver.minimize(model, &x0, &typical)?;
    // map the covariance through the diagonal Jacobian of the transform
    let mut scale = vec![1.0; n_params];
    for (i, chunk) in sol.params[2..].chunks_exact(3).enumerate() {
        let t = chunk[0].tanh();
        let l = logistic(chunk[2]);
        scale[2 + 3 * i] = 0.5 * cell * (1.0 - t * t);
        scale[4 + 3 * i] = cell * l * (1.0 - l);
    }
    for r in 0..n_params {
        for c in 0..n_params {
            sol.covariance[(r, c)] *= scale[r] * scale[c];
        }
    }
    sol.params = to_physical(&sol.params);

    let mut names = vec!["f_c_hz".to_string(), "kappa_total_hz".to_string()];
    for i in 0..modes.len() {
        names.extend([notch_key("f", i), notch_key("g", i), notch_key("gamma", i)]);
    }
    let mut result = FitResult::from_solution(&names, &sol);
    for i in 0..modes.len() {
        let key = notch_key("g", i);
        let g = result.parameters[&key].abs();
        result.parameters.insert(key, g);
    }
    let mut fm: Vec<f64> = (0..modes.len())
        .map(|i| result.parameters[&notch_key("f", i)])
        .collect();
    fm.sort_by(f64::total_cmp);
    if fm.len() >= 2 {
        let diffs: Vec<f64> = fm.windows(2).map(|w| w[1] - w[0]).collect();
        let k = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / k;
        let se = if diffs.len() >= 2 {
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            let c = &sol.covariance;
            let (a, b) = (2, 2 + 3 * (modes.len() - 1));
            (c[(a, a)] + c[(b, b)] - 2.0 * c[(a, b)]).max(0.0).sqrt()
        };
        result.insert("fsr_hz", mean, se);
    }
    Ok(result)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `|S21|` of cavity plus phonon self-energies for a parameter vector laid
/// out as `[f_c, κ, f_0, g_0, γ_0, f_1, …]`.
fn notch_magnitude(p: &[f64], port_ratio: f64, f: f64) -> f64 {
    use num_complex::Complex64;
    let (fc, kappa) = (p[0], p[1]);
    let mut d = Complex64::new(0.5 * kappa, fc - f);
    for m in p[2..].chunks_exact(3) {
        d += m[1] * m[1] / Complex64::new(0.5 * m[2], m[0] - f);
    }
    (port_ratio * kappa / d).norm()
}

/// Builds the phonon ladder described by a [`fit_notches`] result, keeping
/// the harmonic indices of `template`.
pub fn fitted_ladder(fit: &FitResult, template: &PhononLadder) -> Result<PhononLadder> {
    let modes = fit
        .notch_modes()
        .into_iter()
        .zip(template.modes())
        .map(|((f_hz, g_hz, gamma_hz), t)| PhononMode {
            n: t.n,
            f_hz,
            g_hz,
            gamma_hz,
        })
        .collect();
    PhononLadder::new(modes)
}

/// Lorentzian fit of `|S21|²` giving `Q = f₀ / FWHM`.
///
/// The fitted model is `A / (1 + (2(f − f₀)/w)²) + B`. The result holds
/// `f0_hz`, `fwhm_hz`, `amplitude`, `background` and the derived `q`.
pub fn q_factor(spectrum: &Spectrum) -> Result<FitResult> {
    q_factor_with(spectrum, &LeastSquares::default())
}

pub fn q_factor_with(spectrum: &Spectrum, solver: &LeastSquares) -> Result<FitResult> {
    if spectrum.len() < 5 {
        return Err(Error::Domain(format!(
            "need at least 5 samples, got {}",
            spectrum.len()
        )));
    }
    let freqs = spectrum.frequencies();
    let power: Vec<f64> = spectrum.magnitude().iter().map(|m| m * m).collect();
    let (min, max) = power
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(max > min) {
        return Err(Error::NotFound("flat trace, no resonance".into()));
    }
    let peaks = extract_from_values(freqs, &power, ExtremumKind::Peak, 0.1 * (max - min))?;
    let peak = peaks
        .iter()
        .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
        .ok_or_else(|| Error::NotFound("no resonance peak in trace".into()))?;
    let i = freqs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - peak.f).abs().total_cmp(&(b.1 - peak.f).abs()))
        .map(|(i, _)| i)
        .expect("non-empty");
    let amp0 = peak.value - min;
    let width0 = lorentz_width_guess(freqs, &power, i, amp0, min);

    let x0 = [peak.f, width0, amp0, min];
    let typical = [
        peak.f,
        width0,
        amp0.max(f64::MIN_POSITIVE),
        amp0.max(f64::MIN_POSITIVE),
    ];
    let model = |p: &[f64]| -> Vec<f64> {
        freqs
            .iter()
            .zip(&power)
            .map(|(&f, &y)| {
                let u = 2.0 * (f - p[0]) / p[1];
                p[2] / (1.0 + u * u) + p[3] - y
            })
            .collect()
    };
    let sol = solver.minimize(model, &x0, &typical)?;
    let names: Vec<String> = ["f0_hz", "fwhm_hz", "amplitude", "background"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut result = FitResult::from_solution(&names, &sol);
    let f0 = sol.params[0];
    let w = sol.params[1].abs();
    result.parameters.insert("fwhm_hz".into(), w);
    let q = f0 / w;
    // dQ = [1/w, -f0/w²]·(df0, dw)
    let c = &sol.covariance;
    let (a, b) = (1.0 / w, -f0 / (w * w) * sol.params[1].signum());
    let var = a * a * c[(0, 0)] + b * b * c[(1, 1)] + 2.0 * a * b * c[(0, 1)];
    result.insert("q", q, var.max(0.0).sqrt());
    Ok(result)
}

/// FWHM from the second difference at the maximum, `w = sqrt(−8A/y″)`, or
/// from the half-maximum crossings when the curvature is unusable.
fn lorentz_width_guess(freqs: &[f64], y: &[f64], i: usize, amp: f64, base: f64) -> f64 {
    if i > 0 && i + 1 < y.len() {
        let h1 = freqs[i] - freqs[i - 1];
        let h2 = freqs[i + 1] - freqs[i];
        let curv = 2.0 * (h1 * (y[i + 1] - y[i]) - h2 * (y[i] - y[i - 1])) / (h1 * h2 * (h1 + h2));
        if curv < 0.0 {
            let w = (-8.0 * amp / curv).sqrt();
            if w.is_finite() && w > 0.0 {
                return w;
            }
        }
    }
    let half = base + 0.5 * amp;
    let left = (0..i)
        .rev()
        .find(|&k| y[k] < half)
        .map_or(freqs[0], |k| freqs[k]);
    let right = (i..y.len())
        .find(|&k| y[k] < half)
        .map_or(freqs[y.len() - 1], |k| freqs[k]);
    (right - left).max(freqs[1] - freqs[0])
}

/// Phonon quality factors `f_m / γ_m` from a [`fit_notches`] result.
pub fn estimate_phonon_q(fit: &FitResult) -> Result<Vec<f64>> {
    let modes = fit.notch_modes();
    if modes.is_empty() {
        return Err(Error::Domain("fit result has no phonon modes".into()));
    }
    modes
        .into_iter()
        .enumerate()
        .map(|(i, (f, _, gamma))| {
            if gamma > 0.0 {
                Ok(f / gamma)
            } else {
                Err(Error::Domain(format!(
                    "mode {i} has non-positive linewidth {gamma}"
                )))
            }
        })
        .collect()
}
