//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use bulkphonon::config::RunConfig;
use bulkphonon::fitsuite::{extract_branches, BranchPoints};
use bulkphonon::piezo::PhononLadder;
use bulkphonon::spectro::{
    linspace, sweep_spectrogram, AddNoise, QubitParams, Spectrum, SystemModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const G_CROSSING: f64 = 73e6;
pub const FSR: f64 = 7.1568e6;

pub fn default_config() -> RunConfig {
    RunConfig::linbo3_default()
}

/// Cavity + qubit without phonons, with the given qubit coupling.
pub fn crossing_model(g: f64) -> SystemModel {
    let cfg = default_config();
    let q = cfg.qubit.expect("default config has a qubit");
    let qubit = QubitParams::new(q.f_max, 0.0, q.gamma_q, g).unwrap();
    SystemModel::new(
        cfg.cavity,
        Some(qubit),
        PhononLadder::empty(),
        cfg.drive_field(),
    )
}

/// Noise-free branch points read off the default-grid spectrogram.
pub fn crossing_points(g: f64) -> BranchPoints {
    let cfg = default_config();
    let flux = cfg.flux_grid(cfg.sweep.flux_points);
    let freq = cfg.freq_grid(cfg.sweep.f_points);
    let sg = sweep_spectrogram(&crossing_model(g), &flux, &freq, false).unwrap();
    let peak = sg.rows().iter().flatten().fold(0.0_f64, |m, v| m.max(*v));
    extract_branches(&sg, 0.05 * peak, 2.0 * cfg.cavity.kappa_total).unwrap()
}

/// Branch points with independent Gaussian frequency noise.
pub fn jitter(points: &BranchPoints, sigma_hz: f64, seed: u64) -> BranchPoints {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma_hz).unwrap();
    points
        .map_frequencies(|_, f| f + normal.sample(&mut rng))
        .unwrap()
}

/// Frequency window holding the default phonon band with margin.
pub fn notch_grid(points: usize) -> Vec<f64> {
    let cfg = default_config();
    linspace(cfg.cavity.f_c - 40e6, cfg.cavity.f_c + 40e6, points)
}

/// High-power (qubit-free) spectrum of the default ladder.
pub fn notch_spectrum(sigma: f64, seed: u64) -> (Spectrum, PhononLadder) {
    let cfg = default_config();
    let model = cfg.system_model().unwrap().without_qubit();
    let spectrum = Spectrum::simulate(&model, notch_grid(8001)).unwrap();
    let spectrum = spectrum.add_noise(sigma, seed).unwrap();
    (spectrum, model.phonons)
}
