//! JSON run configuration with unit-suffixed keys.
//!
//! Every physical quantity carries its unit in the key (`_hz`, `_m`, `_pa`,
//! `_kg_m3`, `_rad`); dimensionless values (`flux`, `sigma`, counts) carry
//! none. Unknown keys are rejected, and a key that looks like a known key
//! with a different suffix is reported as a unit mismatch.
//!
//! The shipped default, `configs/linbo3_y.json`, describes a 500 µm Y-cut
//! lithium niobate chip (C44 = 5.95e10 Pa, ρ = 4647 kg/m³) in a cavity near
//! 4.79 GHz with a 73 MHz qubit coupling.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::acoustics::{free_spectral_range, shear_velocity, MaterialSpec, SlabGeometry};
use crate::piezo::{coupled_mode_ladder, DriveField, PhononLadder};
use crate::spectro::{linspace, CavityParams, QubitParams, SystemModel};
use crate::{Error, Result};

const DEFAULT_JSON: &str = include_str!("../configs/linbo3_y.json");

/// `(key, required)` pairs of one section.
type SectionKeys = &'static [(&'static str, bool)];

/// Key names per section: `(section, required, keys)`.
const SCHEMA: &[(&str, bool, SectionKeys)] = &[
    (
        "material",
        true,
        &[("name", true), ("c44_pa", true), ("density_kg_m3", true)],
    ),
    (
        "geometry",
        true,
        &[("thickness_m", true), ("dipole_angle_rad", true)],
    ),
    (
        "cavity",
        true,
        &[
            ("f_c_hz", true),
            ("kappa_total_hz", true),
            ("kappa_in_hz", true),
            ("kappa_out_hz", true),
        ],
    ),
    (
        "qubit",
        false,
        &[
            ("f_max_hz", true),
            ("flux", true),
            ("gamma_q_hz", true),
            ("g_hz", true),
        ],
    ),
    (
        "phonon_band",
        true,
        &[
            ("center_hz", true),
            ("halfwidth_hz", true),
            ("g_ref_hz", true),
            ("gamma_m_hz", true),
            ("fundamental_hz", false),
        ],
    ),
    (
        "sweep",
        true,
        &[
            ("flux_min", true),
            ("flux_max", true),
            ("flux_points", true),
            ("f_min_hz", true),
            ("f_max_hz", true),
            ("f_points", true),
        ],
    ),
    ("noise", true, &[("sigma", true), ("seed", true)]),
    ("eigen", false, &[("grid_points", true), ("count", true)]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononBand {
    pub center: f64,
    pub halfwidth: f64,
    pub g_ref: f64,
    pub gamma_m: f64,
    /// Overrides the fundamental derived from material and thickness.
    pub fundamental: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub flux_min: f64,
    pub flux_max: f64,
    pub flux_points: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub f_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSpec {
    pub grid_points: usize,
    pub count: usize,
}

impl Default for EigenSpec {
    fn default() -> Self {
        Self {
            grid_points: 2001,
            count: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub material: MaterialSpec,
    pub geometry: SlabGeometry,
    pub cavity: CavityParams,
    pub qubit: Option<QubitParams>,
    pub phonon_band: PhononBand,
    pub sweep: SweepSpec,
    pub noise: NoiseSpec,
    pub eigen: EigenSpec,
}

#[derive(Deserialize)]
struct RawConfig {
    material: RawMaterial,
    geometry: RawGeometry,
    cavity: RawCavity,
    qubit: Option<RawQubit>,
    phonon_band: RawBand,
    sweep: RawSweep,
    noise: RawNoise,
    eigen: Option<RawEigen>,
}

#[derive(Deserialize)]
struct RawMaterial {
    name: String,
    c44_pa: f64,
    density_kg_m3: f64,
}

#[derive(Deserialize)]
struct RawGeometry {
    thickness_m: f64,
    dipole_angle_rad: f64,
}

#[derive(Deserialize)]
struct RawCavity {
    f_c_hz: f64,
    kappa_total_hz: f64,
    kappa_in_hz: f64,
    kappa_out_hz: f64,
}

#[derive(Deserialize)]
struct RawQubit {
    f_max_hz: f64,
    flux: f64,
    gamma_q_hz: f64,
    g_hz: f64,
}

#[derive(Deserialize)]
struct RawBand {
    center_hz: f64,
    halfwidth_hz: f64,
    g_ref_hz: f64,
    gamma_m_hz: f64,
    fundamental_hz: Option<f64>,
}

#[derive(Deserialize)]
struct RawSweep {
    flux_min: f64,
    flux_max: f64,
    flux_points: usize,
    f_min_hz: f64,
    f_max_hz: f64,
    f_points: usize,
}

#[derive(Deserialize)]
struct RawNoise {
    sigma: f64,
    seed: u64,
}

#[derive(Deserialize)]
struct RawEigen {
    grid_points: usize,
    count: usize,
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).take_while(|(x, y)| x == y).count()
}

fn check_keys(
    path: &str,
    obj: &serde_json::Map<String, Value>,
    expected: &[(&str, bool)],
) -> Result<()> {
    for key in obj.keys() {
        if expected.iter().any(|(k, _)| k == key) {
            continue;
        }
        let near = expected
            .iter()
            .filter(|(k, _)| !obj.contains_key(*k))
            .map(|(k, _)| (common_prefix(k, key), *k))
            .filter(|(p, _)| key[..*p].contains('_'))
            .max_by_key(|(p, _)| *p);
        let full = format!("{path}{key}");
        return Err(match near {
            Some((_, k)) => {
                Error::config(full, format!("unit-suffix mismatch, expected `{path}{k}`"))
            }
            None => Error::config(full, "unknown key"),
        });
    }
    for (key, required) in expected {
        if *required && !obj.contains_key(*key) {
            return Err(Error::config(format!("{path}{key}"), "missing key"));
        }
    }
    Ok(())
}

fn check_schema(root: &Value) -> Result<()> {
    let obj = root
        .as_object()
        .ok_or_else(|| Error::config("<root>", "configuration must be a JSON object"))?;
    let sections: Vec<(&str, bool)> = SCHEMA.iter().map(|(s, r, _)| (*s, *r)).collect();
    check_keys("", obj, &sections)?;
    for (section, _, keys) in SCHEMA {
        match obj.get(*section) {
            None | Some(Value::Null) => {}
            Some(Value::Object(inner)) => check_keys(&format!("{section}."), inner, keys)?,
            Some(_) => return Err(Error::config(*section, "expected an object")),
        }
    }
    Ok(())
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn tag(key: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Domain(msg) => Error::config(key, msg),
        other => other,
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::config("<root>", format!("invalid JSON: {e}")))?;
        check_schema(&value)?;
        let raw: RawConfig =
            serde_json::from_value(value).map_err(|e| Error::config("<root>", e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json_str(&text)
    }

    /// The shipped lithium niobate configuration.
    pub fn linbo3_default() -> Self {
        Self::from_json_str(DEFAULT_JSON).expect("shipped default config is valid")
    }

    pub fn default_json() -> &'static str {
        DEFAULT_JSON
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let m = raw.material;
        positive("material.c44_pa", m.c44_pa)?;
        positive("material.density_kg_m3", m.density_kg_m3)?;
        let material =
            MaterialSpec::new(m.name, m.c44_pa, m.density_kg_m3).map_err(tag("material"))?;

        positive("geometry.thickness_m", raw.geometry.thickness_m)?;
        let geometry = SlabGeometry::new(raw.geometry.thickness_m, raw.geometry.dipole_angle_rad)
            .map_err(tag("geometry.dipole_angle_rad"))?;

        let c = raw.cavity;
        positive("cavity.f_c_hz", c.f_c_hz)?;
        positive("cavity.kappa_total_hz", c.kappa_total_hz)?;
        for (k, v) in [
            ("cavity.kappa_in_hz", c.kappa_in_hz),
            ("cavity.kappa_out_hz", c.kappa_out_hz),
        ] {
            if !(v >= 0.0) {
                return Err(Error::config(k, format!("must be non-negative, got {v}")));
            }
        }
        if c.kappa_in_hz + c.kappa_out_hz > c.kappa_total_hz {
            return Err(Error::config(
                "cavity.kappa_in_hz",
                format!(
                    "kappa_in_hz + kappa_out_hz = {} exceeds kappa_total_hz = {}",
                    c.kappa_in_hz + c.kappa_out_hz,
                    c.kappa_total_hz
                ),
            ));
        }
        let cavity = CavityParams::new(c.f_c_hz, c.kappa_total_hz, c.kappa_in_hz, c.kappa_out_hz)
            .map_err(tag("cavity"))?;

        let qubit = match raw.qubit {
            None => None,
            Some(q) => {
                positive("qubit.f_max_hz", q.f_max_hz)?;
                positive("qubit.gamma_q_hz", q.gamma_q_hz)?;
                if !(q.g_hz >= 0.0) {
                    return Err(Error::config(
                        "qubit.g_hz",
                        format!("must be non-negative, got {}", q.g_hz),
                    ));
                }
                Some(
                    QubitParams::new(q.f_max_hz, q.flux, q.gamma_q_hz, q.g_hz)
                        .map_err(tag("qubit"))?,
                )
            }
        };

        let b = raw.phonon_band;
        let phonon_band = PhononBand {
            center: positive("phonon_band.center_hz", b.center_hz)?,
            halfwidth: positive("phonon_band.halfwidth_hz", b.halfwidth_hz)?,
            g_ref: positive("phonon_band.g_ref_hz", b.g_ref_hz)?,
            gamma_m: positive("phonon_band.gamma_m_hz", b.gamma_m_hz)?,
            fundamental: b
                .fundamental_hz
                .map(|f| positive("phonon_band.fundamental_hz", f))
                .transpose()?,
        };

        let s = raw.sweep;
        if !(s.flux_min <= s.flux_max) {
            return Err(Error::config(
                "sweep.flux_max",
                "must not be below flux_min",
            ));
        }
        if !(s.f_min_hz > 0.0 && s.f_min_hz < s.f_max_hz) {
            return Err(Error::config(
                "sweep.f_max_hz",
                "frequency range must satisfy 0 < f_min_hz < f_max_hz",
            ));
        }
        if s.flux_points == 0 {
            return Err(Error::config("sweep.flux_points", "must be at least 1"));
        }
        if s.flux_points > 1 && s.flux_min == s.flux_max {
            return Err(Error::config(
                "sweep.flux_max",
                "flux range is empty but flux_points > 1",
            ));
        }
        if s.f_points < 3 {
            return Err(Error::config("sweep.f_points", "must be at least 3"));
        }
        let sweep = SweepSpec {
            flux_min: s.flux_min,
            flux_max: s.flux_max,
            flux_points: s.flux_points,
            f_min: s.f_min_hz,
            f_max: s.f_max_hz,
            f_points: s.f_points,
        };

        if !(raw.noise.sigma >= 0.0) {
            return Err(Error::config("noise.sigma", "must be non-negative"));
        }
        let noise = NoiseSpec {
            sigma: raw.noise.sigma,
            seed: raw.noise.seed,
        };

        let eigen = match raw.eigen {
            None => EigenSpec::default(),
            Some(e) => {
                if e.grid_points < 16 {
                    return Err(Error::config("eigen.grid_points", "must be at least 16"));
                }
                if e.count < 1 || e.count >= e.grid_points / 4 {
                    return Err(Error::config(
                        "eigen.count",
                        "must satisfy 1 <= count < grid_points/4",
                    ));
                }
                EigenSpec {
                    grid_points: e.grid_points,
                    count: e.count,
                }
            }
        };

        Ok(Self {
            material,
            geometry,
            cavity,
            qubit,
            phonon_band,
            sweep,
            noise,
            eigen,
        })
    }

    pub fn shear_velocity(&self) -> f64 {
        shear_velocity(&self.material)
    }

    /// Ladder fundamental: the explicit override if set, otherwise `v_t/2t`.
    pub fn fundamental_hz(&self) -> f64 {
        self.phonon_band
            .fundamental
            .unwrap_or_else(|| free_spectral_range(self.shear_velocity(), &self.geometry))
    }

    pub fn drive_field(&self) -> DriveField {
        DriveField {
            magnitude: 1.0,
            angle: self.geometry.dipole_angle,
        }
    }

    pub fn ladder(&self) -> Result<PhononLadder> {
        let b = &self.phonon_band;
        coupled_mode_ladder(
            b.center,
            b.halfwidth,
            self.fundamental_hz(),
            b.g_ref,
            b.gamma_m,
            &self.drive_field(),
        )
    }

    pub fn system_model(&self) -> Result<SystemModel> {
        Ok(SystemModel::new(
            self.cavity,
            self.qubit,
            self.ladder()?,
            self.drive_field(),
        ))
    }

    pub fn flux_grid(&self, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![self.qubit.map_or(self.sweep.flux_min, |q| q.flux)];
        }
        linspace(self.sweep.flux_min, self.sweep.flux_max, points)
    }

    pub fn freq_grid(&self, points: usize) -> Vec<f64> {
        linspace(self.sweep.f_min, self.sweep.f_max, points)
    }
}
