//! Shear sound velocity, the thickness-mode ladder `f_n = n v_t / 2t`, and a
//! finite-difference eigensolver for the same 1D problem.

mod tridiag;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use tridiag::SymTridiagonal;

/// Elastic constant and density of the piezoelectric slab.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    /// Shear elastic constant C44 (Pa).
    pub c44: f64,
    /// Mass density (kg/m³).
    pub density: f64,
}

impl MaterialSpec {
    pub fn new(name: impl Into<String>, c44: f64, density: f64) -> Result<Self> {
        if !(c44 > 0.0 && c44.is_finite()) {
            return Err(Error::Domain(format!("c44 must be positive, got {c44}")));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::Domain(format!(
                "density must be positive, got {density}"
            )));
        }
        Ok(Self {
            name: name.into(),
            c44,
            density,
        })
    }

    /// Y-cut lithium niobate: C44 = 5.95e10 Pa, ρ = 4647 kg/m³.
    pub fn linbo3_y() -> Self {
        Self {
            name: "LiNbO3 Y-cut".to_string(),
            c44: 5.95e10,
            density: 4647.0,
        }
    }
}

/// Slab thickness and the angle between the device dipole and the cavity field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabGeometry {
    /// Thickness `t` (m).
    pub thickness: f64,
    /// Dipole angle (rad), folded into `[0, π/2]`.
    pub dipole_angle: f64,
}

impl SlabGeometry {
    /// Validates the thickness and folds the angle into `[0, π/2]`; coupling
    /// depends only on `|cos θ|`.
    pub fn new(thickness: f64, dipole_angle: f64) -> Result<Self> {
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(Error::Domain(format!(
                "thickness must be positive, got {thickness}"
            )));
        }
        if !dipole_angle.is_finite() {
            return Err(Error::Domain("dipole angle must be finite".into()));
        }
        Ok(Self {
            thickness,
            dipole_angle: fold_angle(dipole_angle),
        })
    }
}

/// Folds an angle into `[0, π/2]` using θ → −θ and θ → π − θ.
pub fn fold_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r > PI / 2.0 {
        PI - r
    } else {
        r
    }
}

/// Parity restriction for [`mode_index_near`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Any,
    Odd,
}

/// Transverse shear velocity `sqrt(C44 / ρ)` in m/s.
pub fn shear_velocity(material: &MaterialSpec) -> f64 {
    (material.c44 / material.density).sqrt()
}

/// Frequency of harmonic `n` in Hz.
pub fn mode_frequency(n: i64, v_t: f64, geometry: &SlabGeometry) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain(format!(
            "harmonic index must be >= 1, got {n}"
        )));
    }
    Ok(n as f64 * free_spectral_range(v_t, geometry))
}

/// Spacing between adjacent harmonics, `v_t / 2t`.
pub fn free_spectral_range(v_t: f64, geometry: &SlabGeometry) -> f64 {
    v_t / (2.0 * geometry.thickness)
}

/// Harmonic index whose frequency lies closest to `f_target`.
///
/// Ties go to the smaller index. With [`Parity::Odd`] only odd indices are
/// candidates.
pub fn mode_index_near(f_target: f64, fundamental: f64, parity: Parity) -> u64 {
    let x = (f_target / fundamental).max(0.0);
    let (lo, hi) = match parity {
        Parity::Any => {
            let k = x.floor() as u64;
            (k.max(1), k.max(1) + 1)
        }
        Parity::Odd => {
            let k = x.floor() as u64;
            let lo = if k % 2 == 1 { k } else { k.saturating_sub(1) }.max(1);
            (lo, lo + 2)
        }
    };
    let dist = |n: u64| (n as f64 * fundamental - f_target).abs();
    if dist(hi) < dist(lo) {
        hi
    } else {
        lo
    }
}

/// One row of a [`ModeTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub n: u64,
    pub f_hz: f64,
    pub lambda_m: f64,
}

/// Ladder of thickness harmonics with their acoustic wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    pub fundamental_hz: f64,
    pub thickness: f64,
    pub entries: Vec<ModeEntry>,
}

impl ModeTable {
    /// Builds the table for the given harmonic indices, which must be
    /// strictly increasing and positive.
    pub fn new(
        v_t: f64,
        geometry: &SlabGeometry,
        indices: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        let fundamental_hz = free_spectral_range(v_t, geometry);
        let t = geometry.thickness;
        let mut entries: Vec<ModeEntry> = Vec::new();
        for n in indices {
            if n == 0 {
                return Err(Error::Domain("harmonic index 0 in mode table".into()));
            }
            if let Some(last) = entries.last() {
                if n <= last.n {
                    return Err(Error::Domain(format!(
                        "mode indices must be strictly increasing ({} then {n})",
                        last.n
                    )));
                }
            }
            entries.push(ModeEntry {
                n,
                f_hz: n as f64 * fundamental_hz,
                lambda_m: 2.0 * t / n as f64,
            });
        }
        Ok(Self {
            fundamental_hz,
            thickness: t,
            entries,
        })
    }

    /// Harmonics `1..=n_max`.
    pub fn first(v_t: f64, geometry: &SlabGeometry, n_max: u64) -> Result<Self> {
        Self::new(v_t, geometry, 1..=n_max)
    }
}

/// Finite-difference eigenmodes of the free-free slab.
#[derive(Debug, Clone)]
pub struct FdModes {
    /// Grid positions through the thickness (m), both faces included.
    pub positions: Vec<f64>,
    /// Eigenfrequencies (Hz), ascending, rigid mode excluded.
    pub frequencies: Vec<f64>,
    /// Displacement eigenvectors on `positions`, unit 2-norm, one per frequency.
    pub shapes: Vec<Vec<f64>>,
}

/// Lowest `count` nonzero eigenfrequencies of `-v_t² u'' = ω² u` on `[0, t]`
/// with `u'(0) = u'(t) = 0`, discretised with second-order central
/// differences on `grid_points` uniformly spaced nodes.
pub fn fd_eigenfrequencies(
    v_t: f64,
    geometry: &SlabGeometry,
    grid_points: usize,
    count: usize,
) -> Result<Vec<f64>> {
    let problem = FdProblem::new(v_t, geometry, grid_points, count)?;
    Ok(problem
        .solve_values()?
        .into_iter()
        .map(|(_, f)| f)
        .collect())
}

/// Same as [`fd_eigenfrequencies`] but also returns the mode shapes.
pub fn fd_eigenmodes(
    v_t: f64,
    geometry: &SlabGeometry,
    grid_points: usize,
    count: usize,
) -> Result<FdModes> {
    let problem = FdProblem::new(v_t, geometry, grid_points, count)?;
    let values = problem.solve_values()?;
    let mut frequencies = Vec::with_capacity(values.len());
    let mut shapes = Vec::with_capacity(values.len());
    for (mu, f) in values {
        let v = problem
            .matrix
            .eigenvector(mu)
            .map_err(|e| problem.diagnose(e))?;
        // undo the symmetrising similarity: u = W^{-1/2} v
        let mut u: Vec<f64> = v
            .iter()
            .zip(&problem.sqrt_weights)
            .map(|(vi, w)| vi / w)
            .collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sign = if u[0] < 0.0 { -1.0 } else { 1.0 };
        u.iter_mut().for_each(|x| *x *= sign / norm);
        frequencies.push(f);
        shapes.push(u);
    }
    Ok(FdModes {
        positions: problem.positions(),
        frequencies,
        shapes,
    })
}

struct FdProblem {
    matrix: SymTridiagonal,
    sqrt_weights: Vec<f64>,
    h: f64,
    v_t: f64,
    fsr: f64,
    grid_points: usize,
    count: usize,
}

impl FdProblem {
    fn new(v_t: f64, geometry: &SlabGeometry, grid_points: usize, count: usize) -> Result<Self> {
        if grid_points < 16 {
            return Err(Error::Domain(format!(
                "grid_points must be >= 16, got {grid_points}"
            )));
        }
        if count < 1 || count >= grid_points / 4 {
            return Err(Error::Domain(format!(
                "count must satisfy 1 <= count < grid_points/4, got {count} for {grid_points} points"
            )));
        }
        if !(v_t > 0.0 && v_t.is_finite()) {
            return Err(Error::Domain(format!("v_t must be positive, got {v_t}")));
        }
        let intervals = grid_points - 1;
        let h = geometry.thickness / intervals as f64;
        // Ghost nodes u[-1] = u[1], u[N+1] = u[N-1] give boundary rows
        // (2u0 - 2u1)/h². Scaling by trapezoid weights W (1/2 at the faces)
        // makes W^{1/2} A W^{-1/2} symmetric.
        let diag = vec![2.0; grid_points];
        let mut off = vec![-1.0; intervals];
        off[0] = -std::f64::consts::SQRT_2;
        off[intervals - 1] = -std::f64::consts::SQRT_2;
        let mut sqrt_weights = vec![1.0; grid_points];
        sqrt_weights[0] = std::f64::consts::FRAC_1_SQRT_2;
        sqrt_weights[intervals] = std::f64::consts::FRAC_1_SQRT_2;
        Ok(Self {
            matrix: SymTridiagonal::new(diag, off),
            sqrt_weights,
            h,
            v_t,
            fsr: free_spectral_range(v_t, geometry),
            grid_points,
            count,
        })
    }

    fn positions(&self) -> Vec<f64> {
        (0..self.grid_points).map(|j| j as f64 * self.h).collect()
    }

    fn frequency(&self, mu: f64) -> f64 {
        self.v_t * mu.max(0.0).sqrt() / (2.0 * PI * self.h)
    }

    /// Returns `(dimensionless eigenvalue, frequency)` pairs for the lowest
    /// `count` non-rigid modes.
    fn solve_values(&self) -> Result<Vec<(f64, f64)>> {
        let threshold = 1e-6 * self.fsr;
        let mut out = Vec::with_capacity(self.count);
        // index 0 is the rigid translation; examine one extra eigenvalue in
        // case it is not resolved below the threshold
        for k in 0..=self.count {
            let mu = self.matrix.eigenvalue(k).map_err(|e| self.diagnose(e))?;
            let f = self.frequency(mu);
            if f < threshold {
                continue;
            }
            out.push((mu, f));
            if out.len() == self.count {
                break;
            }
        }
        if out.len() < self.count {
            return Err(Error::Numeric(format!(
                "found {} of {} nonzero modes on a {}-point grid",
                out.len(),
                self.count,
                self.grid_points
            )));
        }
        Ok(out)
    }

    fn diagnose(&self, err: Error) -> Error {
        Error::Numeric(format!(
            "{err} (grid_points={}, h={:.6e} m, count={})",
            self.grid_points, self.h, self.count
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> SlabGeometry {
        SlabGeometry::new(500e-6, 0.0).unwrap()
    }

    #[test]
    fn velocity_examples() {
        let v = shear_velocity(&MaterialSpec::linbo3_y());
        assert!((v - 3578.0).abs() <= 1.0, "{v}");
        let unit = MaterialSpec::new("unit", 1.0, 1.0).unwrap();
        assert_eq!(shear_velocity(&unit), 1.0);
        let stiff = MaterialSpec::new("x4", 4.0 * 5.95e10, 4647.0).unwrap();
        assert!((shear_velocity(&stiff) - 2.0 * v).abs() < 1e-9);
        assert!((shear_velocity(&stiff) - 7156.5).abs() < 0.5);
    }

    #[test]
    fn material_rejects_nonpositive() {
        assert!(MaterialSpec::new("bad", 0.0, 1.0).is_err());
        assert!(MaterialSpec::new("bad", 1.0, -1.0).is_err());
        assert!(SlabGeometry::new(0.0, 0.0).is_err());
    }

    #[test]
    fn angle_folding() {
        assert!((fold_angle(PI) - 0.0).abs() < 1e-15);
        assert!((fold_angle(-PI / 3.0) - PI / 3.0).abs() < 1e-15);
        assert!((fold_angle(2.0 * PI / 3.0) - PI / 3.0).abs() < 1e-15);
        assert!((fold_angle(PI / 2.0) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mode_frequency_examples() {
        let g = geom();
        let f1 = mode_frequency(1, 3578.4, &g).unwrap();
        assert!((f1 - 3.5784e6).abs() < 1e-6);
        assert!((mode_frequency(2, 3578.4, &g).unwrap() - 7.1568e6).abs() < 1e-6);
        let f1339 = mode_frequency(1339, 3578.4, &g).unwrap();
        assert!((f1339 - 4.79147e9).abs() < 1e4, "{f1339}");
        assert_eq!(f1339, 1339.0 * f1);
        assert!(mode_frequency(0, 3578.4, &g).is_err());
        assert!(mode_frequency(-3, 3578.4, &g).is_err());
    }

    #[test]
    fn fsr_examples() {
        assert!((free_spectral_range(3578.0, &geom()) - 3.578e6).abs() < 1e-6);
        let half = SlabGeometry::new(0.5, 0.0).unwrap();
        assert_eq!(free_spectral_range(1.0, &half), 1.0);
        assert!((free_spectral_range(7156.0, &geom()) - 7.156e6).abs() < 1e-6);
    }

    #[test]
    fn mode_index_examples() {
        assert_eq!(mode_index_near(4.7915e9, 3.5784e6, Parity::Odd), 1339);
        assert_eq!(mode_index_near(3.5784e6, 3.5784e6, Parity::Any), 1);
        assert_eq!(mode_index_near(7.1568e6, 3.5784e6, Parity::Odd), 1);
        assert_eq!(mode_index_near(7.1568e6, 3.5784e6, Parity::Any), 2);
        // below the fundamental the smallest admissible index wins
        assert_eq!(mode_index_near(1.0, 3.5784e6, Parity::Odd), 1);
        assert_eq!(mode_index_near(1.0, 3.5784e6, Parity::Any), 1);
    }

    #[test]
    fn mode_table_invariants() {
        let table = ModeTable::first(3578.4, &geom(), 50).unwrap();
        for (e, n) in table.entries.iter().zip(1u64..) {
            assert_eq!(e.n, n);
            assert_eq!(e.f_hz, n as f64 * table.fundamental_hz);
            assert!((e.lambda_m * n as f64 - 2.0 * 500e-6).abs() < 1e-18);
        }
        assert!(ModeTable::new(3578.4, &geom(), [3, 3]).is_err());
        assert!(ModeTable::new(3578.4, &geom(), [0, 1]).is_err());
    }

    #[test]
    fn fd_matches_ladder() {
        let f = fd_eigenfrequencies(3578.4, &geom(), 2001, 5).unwrap();
        let expected = [3.5784e6, 7.1568e6, 10.7352e6, 14.3136e6, 17.8920e6];
        for (fd, ex) in f.iter().zip(expected) {
            assert!(((fd - ex) / ex).abs() < 1e-3, "{fd} vs {ex}");
        }
    }

    #[test]
    fn fd_richardson_ratio() {
        let exact = 3.5784e6;
        let e101 = (fd_eigenfrequencies(3578.4, &geom(), 101, 1).unwrap()[0] - exact).abs();
        let e201 = (fd_eigenfrequencies(3578.4, &geom(), 201, 1).unwrap()[0] - exact).abs();
        let ratio = e101 / e201;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn fd_rejects_bad_grid() {
        assert!(fd_eigenfrequencies(3578.4, &geom(), 15, 1).is_err());
        assert!(fd_eigenfrequencies(3578.4, &geom(), 100, 25).is_err());
        assert!(fd_eigenfrequencies(3578.4, &geom(), 100, 0).is_err());
    }

    #[test]
    fn fd_shapes_are_cosines() {
        let t = 500e-6;
        let modes = fd_eigenmodes(3578.4, &geom(), 2001, 6).unwrap();
        for (k, shape) in modes.shapes.iter().enumerate() {
            let k = (k + 1) as f64;
            let reference: Vec<f64> = modes
                .positions
                .iter()
                .map(|y| (k * PI * y / t).cos())
                .collect();
            let dot: f64 = shape.iter().zip(&reference).map(|(a, b)| a * b).sum();
            let norm = reference.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((dot / norm).abs() > 0.999, "mode {k}: {}", dot / norm);
        }
    }
}
