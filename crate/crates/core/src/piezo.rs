//! Electromechanical coupling of a uniform drive field to transverse strain
//! standing waves.
//!
//! For harmonic `n` the through-thickness strain is `S(y) = S0 sin(nπy/t)`.
//! Integrating against a spatially uniform field gives `2t/(nπ)` for odd `n`
//! and zero for even `n`, so only every other harmonic couples and the
//! coupling falls off as `1/n`. The projection of the field on the device
//! dipole scales everything by `|cos θ|`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::acoustics::{fold_angle, mode_index_near, Parity};
use crate::{Error, Result};

/// Normalized transverse strain standing wave of harmonic `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainProfile {
    pub amplitude: f64,
    pub n: u64,
    pub thickness: f64,
}

impl StrainProfile {
    pub fn new(n: u64, thickness: f64) -> Result<Self> {
        check_index(n as i64)?;
        if !(thickness > 0.0) {
            return Err(Error::Domain(format!(
                "thickness must be positive, got {thickness}"
            )));
        }
        Ok(Self {
            amplitude: 1.0,
            n,
            thickness,
        })
    }

    /// Acoustic wavelength `2t/n`.
    pub fn wavelength(&self) -> f64 {
        2.0 * self.thickness / self.n as f64
    }

    pub fn value(&self, y: f64) -> f64 {
        self.amplitude * (2.0 * PI * y / self.wavelength()).sin()
    }
}

/// Spatially uniform drive field with orientation relative to the dipole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveField {
    pub magnitude: f64,
    /// Angle between field and device dipole (rad).
    pub angle: f64,
}

impl DriveField {
    pub fn new(magnitude: f64, angle: f64) -> Result<Self> {
        if !(magnitude >= 0.0 && magnitude.is_finite()) {
            return Err(Error::Domain(format!(
                "field magnitude must be non-negative, got {magnitude}"
            )));
        }
        if !angle.is_finite() {
            return Err(Error::Domain("field angle must be finite".into()));
        }
        Ok(Self { magnitude, angle })
    }

    /// Unit field along the dipole.
    pub fn aligned() -> Self {
        Self {
            magnitude: 1.0,
            angle: 0.0,
        }
    }

    /// Field component along the dipole axis, `magnitude·|cos θ|`. Exactly
    /// zero at θ = π/2.
    pub fn projection(&self) -> f64 {
        let folded = fold_angle(self.angle);
        if folded >= FRAC_PI_2 {
            0.0
        } else {
            self.magnitude * folded.cos()
        }
    }
}

/// Relative coupling of harmonic `n`; 1 for `n = 1` with a unit aligned field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingWeight {
    pub n: u64,
    pub weight: f64,
}

fn check_index(n: i64) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain(format!(
            "harmonic index must be >= 1, got {n}"
        )));
    }
    Ok(())
}

/// `∫₀ᵗ sin(nπy/t) dy = (t/nπ)(1 − cos nπ)`, exactly zero for even `n`.
pub fn overlap_integral(n: i64, thickness: f64) -> Result<f64> {
    check_index(n)?;
    if !(thickness > 0.0) {
        return Err(Error::Domain(format!(
            "thickness must be positive, got {thickness}"
        )));
    }
    if n % 2 == 0 {
        Ok(0.0)
    } else {
        Ok(2.0 * thickness / (n as f64 * PI))
    }
}

pub fn coupling_weight(n: i64, field: &DriveField) -> Result<CouplingWeight> {
    check_index(n)?;
    // the ratio overlap(n)/overlap(1) is independent of thickness
    let ratio = overlap_integral(n, 1.0)? / overlap_integral(1, 1.0)?;
    Ok(CouplingWeight {
        n: n as u64,
        weight: field.projection() * ratio,
    })
}

/// A bulk phonon mode as seen by the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhononMode {
    pub n: u64,
    pub f_hz: f64,
    /// Cavity coupling (Hz).
    pub g_hz: f64,
    /// Energy decay linewidth (Hz).
    pub gamma_hz: f64,
}

/// Set of phonon modes coupled to the cavity, sorted by frequency.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PhononLadder {
    modes: Vec<PhononMode>,
}

impl PhononLadder {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorts by frequency and checks frequencies are positive and distinct
    /// and linewidths are positive.
    pub fn new(mut modes: Vec<PhononMode>) -> Result<Self> {
        modes.sort_by(|a, b| a.f_hz.total_cmp(&b.f_hz));
        for m in &modes {
            if !(m.f_hz > 0.0 && m.f_hz.is_finite()) {
                return Err(Error::Domain(format!(
                    "phonon frequency must be positive, got {}",
                    m.f_hz
                )));
            }
            if !(m.gamma_hz > 0.0) {
                return Err(Error::Domain(format!(
                    "phonon linewidth must be positive, got {}",
                    m.gamma_hz
                )));
            }
            if !m.g_hz.is_finite() {
                return Err(Error::Domain("phonon coupling must be finite".into()));
            }
        }
        if modes.windows(2).any(|w| w[0].f_hz == w[1].f_hz) {
            return Err(Error::Domain("phonon frequencies must be distinct".into()));
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[PhononMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Overrides the linewidth of mode `index`.
    pub fn set_linewidth(&mut self, index: usize, gamma_hz: f64) -> Result<()> {
        if !(gamma_hz > 0.0) {
            return Err(Error::Domain(format!(
                "phonon linewidth must be positive, got {gamma_hz}"
            )));
        }
        let mode = self
            .modes
            .get_mut(index)
            .ok_or_else(|| Error::Domain(format!("no phonon mode at index {index}")))?;
        mode.gamma_hz = gamma_hz;
        Ok(())
    }

    /// Consecutive frequency differences.
    pub fn spacings(&self) -> Vec<f64> {
        self.modes
            .windows(2)
            .map(|w| w[1].f_hz - w[0].f_hz)
            .collect()
    }
}

/// All odd harmonics within `band_halfwidth` of `band_center`.
///
/// The odd mode nearest the band center gets `g_ref` (for an aligned field);
/// the others follow the `1/n` overlap law. Every mode gets linewidth
/// `gamma_m`.
pub fn coupled_mode_ladder(
    band_center: f64,
    band_halfwidth: f64,
    fundamental: f64,
    g_ref: f64,
    gamma_m: f64,
    field: &DriveField,
) -> Result<PhononLadder> {
    if !(band_halfwidth > 0.0) {
        return Err(Error::Domain(format!(
            "band halfwidth must be positive, got {band_halfwidth}"
        )));
    }
    if !(g_ref > 0.0) {
        return Err(Error::Domain(format!(
            "reference coupling must be positive, got {g_ref}"
        )));
    }
    if !(fundamental > 0.0 && band_center > 0.0) {
        return Err(Error::Domain(
            "band center and fundamental must be positive".into(),
        ));
    }
    let n_ref = mode_index_near(band_center, fundamental, Parity::Odd);
    let lo = ((band_center - band_halfwidth) / fundamental)
        .ceil()
        .max(1.0) as u64;
    let hi = ((band_center + band_halfwidth) / fundamental)
        .floor()
        .max(0.0) as u64;
    let mut modes = Vec::new();
    for n in (lo..=hi).filter(|n| n % 2 == 1) {
        let f_hz = n as f64 * fundamental;
        if (f_hz - band_center).abs() > band_halfwidth {
            continue;
        }
        let w = coupling_weight(n as i64, field)?;
        modes.push(PhononMode {
            n,
            f_hz,
            g_hz: g_ref * n_ref as f64 * w.weight,
            gamma_hz: gamma_m,
        });
    }
    PhononLadder::new(modes)
}
