//! Forward model → fit round trips against known ground truth.

mod common;

use bulkphonon::fitsuite::{
    estimate_phonon_q, extract_peaks, fit_avoided_crossing, fit_notches, fitted_ladder, notch_key,
    q_factor, Branch, BranchPoint, BranchPoints, ExtremumKind,
};
use bulkphonon::piezo::{PhononLadder, PhononMode};
use bulkphonon::spectro::{
    avoided_crossing_branches, dressed_frequencies, linspace, qubit_frequency, AddNoise,
    CavityParams, QubitParams, Spectrum, SystemModel,
};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn crossing_closed_form_points_recover_g() {
    let fit = fit_avoided_crossing(&analytic_points(G_CROSSING)).unwrap();
    assert!(fit.converged);
    let g = fit.get("g_hz").unwrap();
    assert!((g - G_CROSSING).abs() < 0.01e6, "g = {g}");
    assert!(rel(fit.get("f_c_hz").unwrap(), 4.7915e9) < 1e-9);
    assert!(rel(fit.get("f_max_hz").unwrap(), 5.2e9) < 1e-9);
    assert!(fit.get("flux_offset").unwrap().abs() < 1e-9);
    assert!((fit.get("flux_scale").unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn crossing_spectrogram_points_recover_g() {
    // peak positions on a lossy spectrogram are pulled slightly by the linewidths
    let fit = fit_avoided_crossing(&crossing_points(G_CROSSING)).unwrap();
    assert!(fit.converged);
    let g = fit.get("g_hz").unwrap();
    assert!((g - G_CROSSING).abs() < 0.1e6, "g = {g}");
    assert!(rel(fit.get("f_c_hz").unwrap(), 4.7915e9) < 1e-5);
}

#[test]
fn crossing_min_separation_is_two_g() {
    let pairs = crossing_points(G_CROSSING).pairs();
    let gap = pairs
        .iter()
        .map(|(_, lo, up)| up - lo)
        .fold(f64::INFINITY, f64::min);
    // flux grid is coarse, so the closest sampled pair sits slightly off resonance
    assert!(
        (2.0 * G_CROSSING * 0.999..2.0 * G_CROSSING * 1.02).contains(&gap),
        "gap = {gap}"
    );
}

#[test]
fn crossing_uncertainty_has_correct_coverage() {
    let points = crossing_points(G_CROSSING);
    let truth = fit_avoided_crossing(&points).unwrap().get("g_hz").unwrap();
    let covered = (0..100)
        .filter(|&seed| {
            let fit = fit_avoided_crossing(&jitter(&points, 0.5e6, 1000 + seed)).unwrap();
            (fit.get("g_hz").unwrap() - truth).abs() <= fit.sigma("g_hz").unwrap()
        })
        .count();
    assert!((55..=82).contains(&covered), "1σ coverage {covered}/100");
}

/// Branch points taken straight from the closed-form eigenvalues.
fn analytic_points(g: f64) -> BranchPoints {
    let cfg = default_config();
    let q = cfg.qubit.unwrap();
    let mut pts = Vec::new();
    for flux in linspace(-0.35, 0.35, 71) {
        let f_q = qubit_frequency(&q.with_flux(flux));
        let (lo, up) = avoided_crossing_branches(cfg.cavity.f_c, f_q, g);
        pts.push(BranchPoint {
            flux,
            f_peak: lo,
            branch: Branch::Lower,
        });
        pts.push(BranchPoint {
            flux,
            f_peak: up,
            branch: Branch::Upper,
        });
    }
    BranchPoints::new(pts).unwrap()
}

/// Gaussian frequency noise, re-sorting each flux so the lower branch stays
/// below the upper one (uncoupled lines touch at the crossing).
fn jitter_sorted(points: &BranchPoints, sigma_hz: f64, seed: u64) -> BranchPoints {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma_hz).unwrap();
    let mut pts: Vec<BranchPoint> = points
        .points()
        .iter()
        .map(|p| BranchPoint {
            f_peak: p.f_peak + normal.sample(&mut rng),
            ..*p
        })
        .collect();
    for pair in pts.chunks_mut(2) {
        let (lo, up) = (
            pair[0].f_peak.min(pair[1].f_peak),
            pair[0].f_peak.max(pair[1].f_peak),
        );
        for p in pair.iter_mut() {
            p.f_peak = if p.branch == Branch::Lower { lo } else { up };
        }
    }
    BranchPoints::new(pts).unwrap()
}

#[test]
fn crossing_without_coupling_gives_small_g() {
    // g only enters through g², so at the g ≥ 0 boundary the linearized σ is
    // not Gaussian; require the large majority of replicas to be consistent
    let points = analytic_points(0.0);
    let mut consistent = 0;
    let mut gs = Vec::new();
    for seed in 0..100 {
        let fit = fit_avoided_crossing(&jitter_sorted(&points, 0.5e6, seed)).unwrap();
        let (g, sigma) = (fit.get("g_hz").unwrap(), fit.sigma("g_hz").unwrap());
        assert!(g >= 0.0);
        consistent += usize::from(g < 2.0 * sigma);
        gs.push(g);
    }
    gs.sort_by(f64::total_cmp);
    assert!(consistent >= 80, "{consistent}/100 replicas with g < 2σ_g");
    assert!(gs[50] < 1.5e6, "median g = {}", gs[50]);
}

#[test]
fn crossing_fit_is_scale_equivariant() {
    let points = analytic_points(G_CROSSING);
    let base = fit_avoided_crossing(&points).unwrap();
    for s in [0.5, 2.0] {
        let scaled = fit_avoided_crossing(&points.map_frequencies(|_, f| f * s).unwrap()).unwrap();
        for key in ["g_hz", "f_c_hz", "f_max_hz"] {
            assert!(
                rel(scaled.get(key).unwrap(), s * base.get(key).unwrap()) < 1e-6,
                "{key} at scale {s}"
            );
        }
        assert!((scaled.get("flux_scale").unwrap() - base.get("flux_scale").unwrap()).abs() < 1e-6);
    }
}

#[test]
fn notch_noise_free_round_trip() {
    let cfg = default_config();
    let (spectrum, truth) = notch_spectrum(0.0, 0);
    let fit = fit_notches(&spectrum, &truth, &cfg.cavity).unwrap();
    assert!(fit.converged);
    assert_eq!(fit.notch_count(), truth.len());
    for (i, m) in truth.modes().iter().enumerate() {
        assert!(rel(fit.get(&notch_key("g", i)).unwrap(), m.g_hz) < 0.01);
        assert!(rel(fit.get(&notch_key("f", i)).unwrap(), m.f_hz) < 1e-6);
    }
    assert!(rel(fit.get("fsr_hz").unwrap(), FSR) < 1e-3);
    let recovered = fitted_ladder(&fit, &truth).unwrap();
    assert_eq!(
        recovered.modes().iter().map(|m| m.n).collect::<Vec<_>>(),
        truth.modes().iter().map(|m| m.n).collect::<Vec<_>>()
    );
}

#[test]
fn notch_noisy_round_trip_across_seeds() {
    let cfg = default_config();
    for seed in [1, 2, 3, 4, 5] {
        let (spectrum, truth) = notch_spectrum(0.01, seed);
        let fit = fit_notches(&spectrum, &truth, &cfg.cavity).unwrap();
        let qs = estimate_phonon_q(&fit).unwrap();
        for (i, m) in truth.modes().iter().enumerate() {
            assert!(
                rel(fit.get(&notch_key("g", i)).unwrap(), m.g_hz) < 0.05,
                "seed {seed} mode {i}"
            );
            assert!(
                rel(qs[i], m.f_hz / m.gamma_hz) < 0.05,
                "seed {seed} mode {i}"
            );
        }
    }
}

#[test]
fn notch_fit_with_vanishing_coupling() {
    let cfg = default_config();
    let template = cfg.ladder().unwrap();
    let silent: Vec<PhononMode> = template
        .modes()
        .iter()
        .map(|m| PhononMode { g_hz: 0.0, ..*m })
        .collect();
    let model = SystemModel::new(
        cfg.cavity,
        None,
        PhononLadder::new(silent).unwrap(),
        cfg.drive_field(),
    );
    let spectrum = Spectrum::simulate(&model, notch_grid(8001))
        .unwrap()
        .add_noise(0.01, 3)
        .unwrap();
    let fit = fit_notches(&spectrum, &template, &cfg.cavity).unwrap();
    for i in 0..template.len() {
        let g = fit.get(&notch_key("g", i)).unwrap();
        assert!(g.abs() < 0.25e6, "mode {i}: g = {g}");
    }
    assert!(rel(fit.get("kappa_total_hz").unwrap(), cfg.cavity.kappa_total) < 0.01);
}

#[test]
fn notch_count_matches_ladder() {
    let (spectrum, truth) = notch_spectrum(0.0, 0);
    let cfg = default_config();
    let kappa = cfg.cavity.kappa_total;
    let check = truth
        .modes()
        .iter()
        .all(|m| m.g_hz * m.g_hz / m.gamma_hz >= kappa / 10.0);
    assert!(check, "default ladder satisfies the visibility condition");
    let dips = extract_peaks(&spectrum, ExtremumKind::Dip, 1e-3).unwrap();
    assert_eq!(dips.len(), truth.len());
    // interference with the detuned cavity pulls each dip by up to γ_m/2
    let step = spectrum.frequencies()[1] - spectrum.frequencies()[0];
    for (d, m) in dips.iter().zip(truth.modes()) {
        assert!(
            (d.f - m.f_hz).abs() <= step.max(0.5 * m.gamma_hz),
            "dip {} vs mode {}",
            d.f,
            m.f_hz
        );
    }
}

#[test]
fn q_factor_round_trip_with_noise() {
    let f_c = 4.7915e9;
    for (q_true, seed) in [(1500.0, 1), (400.0, 2), (3000.0, 3)] {
        let cavity = CavityParams::symmetric(f_c, f_c / q_true).unwrap();
        let k = cavity.kappa_total;
        let spectrum = Spectrum::simulate(
            &SystemModel::bare(cavity),
            linspace(f_c - 10.0 * k, f_c + 10.0 * k, 801),
        )
        .unwrap()
        .add_noise(0.005, seed)
        .unwrap();
        let fit = q_factor(&spectrum).unwrap();
        assert!(
            rel(fit.get("q").unwrap(), q_true) < 0.02,
            "Q {q_true}: {}",
            fit.get("q").unwrap()
        );
    }
}

#[test]
fn transmission_peaks_match_dressed_frequencies() {
    // weak loss and weak coupling: |S21| maxima sit at the dressed eigenfrequencies
    let cavity = CavityParams::symmetric(5.0e9, 2e5).unwrap();
    let qubit = QubitParams::new(5.2e9, 0.0, 1e4, 5e6).unwrap();
    let model = SystemModel::new(
        cavity,
        Some(qubit),
        PhononLadder::empty(),
        default_config().drive_field(),
    );
    let dressed = dressed_frequencies(&model).unwrap();
    let freqs = linspace(4.95e9, 5.25e9, 300_001);
    let step = freqs[1] - freqs[0];
    let spectrum = Spectrum::simulate(&model, freqs).unwrap();
    let peaks = extract_peaks(&spectrum, ExtremumKind::Peak, 1e-4).unwrap();
    assert_eq!(peaks.len(), dressed.len());
    for (p, d) in peaks.iter().zip(&dressed) {
        assert!(
            (p.f - d.re).abs() <= step,
            "peak {} vs eigenvalue {}",
            p.f,
            d.re
        );
    }
}
