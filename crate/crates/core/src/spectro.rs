//! Linear input-output model of a two-port cavity dressed by an optional
//! flux-tunable qubit and a ladder of phonon modes.
//!
//! Transmission is
//!
//! ```text
//! S21(f) = sqrt(κ_in κ_out) / D(f)
//! D(f)   = i(f_c − f) + κ/2 + Σ_q(f) + Σ_m g_m² / (i(f_m − f) + γ_m/2)
//! Σ_q(f) = g² / (i(f_q − f) + γ_q/2)
//! ```
//!
//! with every rate an ordinary frequency in Hz. At high drive power the qubit
//! saturates and its self-energy is dropped.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::piezo::{DriveField, PhononLadder};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub f_c: f64,
    pub kappa_total: f64,
    pub kappa_in: f64,
    pub kappa_out: f64,
}

impl CavityParams {
    pub fn new(f_c: f64, kappa_total: f64, kappa_in: f64, kappa_out: f64) -> Result<Self> {
        if !(f_c > 0.0 && f_c.is_finite()) {
            return Err(Error::Domain(format!(
                "cavity frequency must be positive, got {f_c}"
            )));
        }
        if !(kappa_total > 0.0) {
            return Err(Error::Domain(format!(
                "kappa_total must be positive, got {kappa_total}"
            )));
        }
        if !(kappa_in >= 0.0 && kappa_out >= 0.0) {
            return Err(Error::Domain("port couplings must be non-negative".into()));
        }
        if kappa_in + kappa_out > kappa_total * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "kappa_in + kappa_out = {} exceeds kappa_total = {kappa_total}",
                kappa_in + kappa_out
            )));
        }
        Ok(Self {
            f_c,
            kappa_total,
            kappa_in,
            kappa_out,
        })
    }

    /// Symmetric, critically coupled ports: `κ_in = κ_out = κ/2`.
    pub fn symmetric(f_c: f64, kappa_total: f64) -> Result<Self> {
        Self::new(f_c, kappa_total, kappa_total / 2.0, kappa_total / 2.0)
    }

    pub fn quality_factor(&self) -> f64 {
        self.f_c / self.kappa_total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub f_max: f64,
    /// Applied flux in units of the flux quantum.
    pub flux: f64,
    pub gamma_q: f64,
    pub g: f64,
}

impl QubitParams {
    pub fn new(f_max: f64, flux: f64, gamma_q: f64, g: f64) -> Result<Self> {
        if !(f_max > 0.0 && f_max.is_finite()) {
            return Err(Error::Domain(format!(
                "f_max must be positive, got {f_max}"
            )));
        }
        if !(gamma_q > 0.0) {
            return Err(Error::Domain(format!(
                "gamma_q must be positive, got {gamma_q}"
            )));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::Domain(format!(
                "qubit coupling must be non-negative, got {g}"
            )));
        }
        if !flux.is_finite() {
            return Err(Error::Domain("flux must be finite".into()));
        }
        Ok(Self {
            f_max,
            flux,
            gamma_q,
            g,
        })
    }

    pub fn with_flux(mut self, flux: f64) -> Self {
        self.flux = flux;
        self
    }
}

/// Symmetric-junction transmon: `f_max·sqrt(|cos(π·flux)|)`.
pub fn qubit_frequency(q: &QubitParams) -> f64 {
    q.f_max * abs_cos_pi(q.flux).sqrt()
}

/// `|cos(πx)|` with the period-1 reduction done first, so half-integer flux
/// gives exactly zero.
pub(crate) fn abs_cos_pi(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    (PI * (0.5 - r)).sin().abs()
}

/// Lossless upper and lower branches of two modes coupled by `g`.
pub fn avoided_crossing_branches(f_c: f64, f_q: f64, g: f64) -> (f64, f64) {
    let mean = 0.5 * (f_c + f_q);
    let half = (g * g + 0.25 * (f_q - f_c).powi(2)).sqrt();
    (mean - half, mean + half)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub cavity: CavityParams,
    pub qubit: Option<QubitParams>,
    /// Couplings stored in the ladder already include the drive orientation.
    pub phonons: PhononLadder,
    pub field: DriveField,
}

impl SystemModel {
    pub fn new(
        cavity: CavityParams,
        qubit: Option<QubitParams>,
        phonons: PhononLadder,
        field: DriveField,
    ) -> Self {
        Self {
            cavity,
            qubit,
            phonons,
            field,
        }
    }

    pub fn bare(cavity: CavityParams) -> Self {
        Self::new(cavity, None, PhononLadder::empty(), DriveField::aligned())
    }

    /// The high-power limit: saturated qubit removed, phonons kept.
    pub fn without_qubit(&self) -> Self {
        Self {
            qubit: None,
            ..self.clone()
        }
    }

    pub fn with_flux(&self, flux: f64) -> Self {
        Self {
            qubit: self.qubit.map(|q| q.with_flux(flux)),
            ..self.clone()
        }
    }
}

/// Complex transmission at frequency `f` (Hz).
pub fn transmission(model: &SystemModel, f: f64) -> Complex64 {
    let c = &model.cavity;
    let mut d = Complex64::new(0.5 * c.kappa_total, c.f_c - f);
    if let Some(q) = &model.qubit {
        let fq = qubit_frequency(q);
        d += q.g * q.g / Complex64::new(0.5 * q.gamma_q, fq - f);
    }
    for m in model.phonons.modes() {
        d += m.g_hz * m.g_hz / Complex64::new(0.5 * m.gamma_hz, m.f_hz - f);
    }
    Complex64::new((c.kappa_in * c.kappa_out).sqrt(), 0.0) / d
}

/// Eigenvalues `f − iγ/2` of the coupled-mode matrix, sorted by real part.
///
/// Basis order is cavity, qubit (if present), then phonons. The qubit and
/// the phonons couple only to the cavity.
pub fn dressed_frequencies(model: &SystemModel) -> Result<Vec<Complex64>> {
    let has_q = model.qubit.is_some() as usize;
    let dim = 1 + has_q + model.phonons.len();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let c = &model.cavity;
    m[(0, 0)] = Complex64::new(c.f_c, -0.5 * c.kappa_total);
    if let Some(q) = &model.qubit {
        m[(1, 1)] = Complex64::new(qubit_frequency(q), -0.5 * q.gamma_q);
        m[(0, 1)] = Complex64::new(q.g, 0.0);
        m[(1, 0)] = Complex64::new(q.g, 0.0);
    }
    for (k, p) in model.phonons.modes().iter().enumerate() {
        let j = 1 + has_q + k;
        m[(j, j)] = Complex64::new(p.f_hz, -0.5 * p.gamma_hz);
        m[(0, j)] = Complex64::new(p.g_hz, 0.0);
        m[(j, 0)] = Complex64::new(p.g_hz, 0.0);
    }
    // work relative to the cavity frequency so the Schur iteration sees O(κ, g)
    // entries rather than O(f_c)
    let shift = Complex64::new(c.f_c, 0.0);
    for i in 0..dim {
        m[(i, i)] -= shift;
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let scaled = m.unscale(scale);
    let schur = scaled.try_schur(1e-15, 10_000).ok_or_else(|| {
        Error::Numeric(format!(
            "Schur iteration did not converge for a {dim}x{dim} coupled-mode matrix"
        ))
    })?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numeric("Schur form is not triangular".into()))?;
    let mut out: Vec<Complex64> = eig.iter().map(|z| z * scale + shift).collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(out)
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::Domain(format!("{name} axis is empty")));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

/// Complex transmission on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    frequencies: Vec<f64>,
    s21: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(frequencies: Vec<f64>, s21: Vec<Complex64>) -> Result<Self> {
        check_axis("frequency", &frequencies)?;
        if frequencies.len() != s21.len() {
            return Err(Error::Domain(format!(
                "{} frequencies but {} transmission samples",
                frequencies.len(),
                s21.len()
            )));
        }
        Ok(Self { frequencies, s21 })
    }

    /// Evaluates `model` on `frequencies`.
    pub fn simulate(model: &SystemModel, frequencies: Vec<f64>) -> Result<Self> {
        check_axis("frequency", &frequencies)?;
        let s21 = frequencies
            .iter()
            .map(|&f| transmission(model, f))
            .collect();
        Ok(Self { frequencies, s21 })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn s21(&self) -> &[Complex64] {
        &self.s21
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.s21.iter().map(|z| z.norm()).collect()
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// `|S21|` against flux (rows) and frequency (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    flux_axis: Vec<f64>,
    freq_axis: Vec<f64>,
    magnitude: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn new(flux_axis: Vec<f64>, freq_axis: Vec<f64>, magnitude: Vec<Vec<f64>>) -> Result<Self> {
        check_axis("flux", &flux_axis)?;
        check_axis("frequency", &freq_axis)?;
        if magnitude.len() != flux_axis.len()
            || magnitude.iter().any(|row| row.len() != freq_axis.len())
        {
            return Err(Error::Domain(
                "spectrogram dimensions do not match its axes".into(),
            ));
        }
        Ok(Self {
            flux_axis,
            freq_axis,
            magnitude,
        })
    }

    pub fn flux_axis(&self) -> &[f64] {
        &self.flux_axis
    }

    pub fn freq_axis(&self) -> &[f64] {
        &self.freq_axis
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.magnitude
    }

    /// Row at flux index `i` as a real-valued spectrum.
    pub fn row_spectrum(&self, i: usize) -> Spectrum {
        Spectrum {
            frequencies: self.freq_axis.clone(),
            s21: self.magnitude[i]
                .iter()
                .map(|&m| Complex64::new(m, 0.0))
                .collect(),
        }
    }
}

/// Sweeps the qubit flux and records `|S21|` on `freq_grid` at each step.
/// With `high_power` set the qubit term is omitted entirely.
pub fn sweep_spectrogram(
    model: &SystemModel,
    flux_grid: &[f64],
    freq_grid: &[f64],
    high_power: bool,
) -> Result<Spectrogram> {
    check_axis("flux", flux_grid)?;
    check_axis("frequency", freq_grid)?;
    let base = if high_power {
        model.without_qubit()
    } else {
        model.clone()
    };
    let magnitude: Vec<Vec<f64>> = flux_grid
        .par_iter()
        .map(|&flux| {
            let m = base.with_flux(flux);
            freq_grid
                .iter()
                .map(|&f| transmission(&m, f).norm())
                .collect()
        })
        .collect();
    Ok(Spectrogram {
        flux_axis: flux_grid.to_vec(),
        freq_axis: freq_grid.to_vec(),
        magnitude,
    })
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Seeded additive Gaussian noise.
///
/// Complex data receive independent noise on real and imaginary parts;
/// magnitude data receive noise on the magnitude, clipped at zero. Samples are
/// drawn sequentially in storage order, so a seed fixes the output exactly.
pub trait AddNoise: Sized {
    fn add_noise(&self, sigma: f64, seed: u64) -> Result<Self>;
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!(
            "noise sigma must be non-negative, got {sigma}"
        )));
    }
    Normal::new(0.0, sigma).map_err(|e| Error::Domain(e.to_string()))
}

impl AddNoise for Spectrum {
    fn add_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        let dist = normal(sigma)?;
        if sigma == 0.0 {
            return Ok(self.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s21 = self
            .s21
            .iter()
            .map(|z| {
                let re = z.re + dist.sample(&mut rng);
                let im = z.im + dist.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self {
            frequencies: self.frequencies.clone(),
            s21,
        })
    }
}

impl AddNoise for Spectrogram {
    fn add_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        let dist = normal(sigma)?;
        if sigma == 0.0 {
            return Ok(self.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let magnitude = self
            .magnitude
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&m| (m + dist.sample(&mut rng)).max(0.0))
                    .collect()
            })
            .collect();
        Ok(Self {
            flux_axis: self.flux_axis.clone(),
            freq_axis: self.freq_axis.clone(),
            magnitude,
        })
    }
}
