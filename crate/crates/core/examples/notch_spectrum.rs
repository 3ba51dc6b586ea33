//! High-power transmission with phonon notches, fitted back to couplings and Q_m.

use bulkphonon::config::RunConfig;
use bulkphonon::fitsuite::{estimate_phonon_q, fit_notches};
use bulkphonon::spectro::{linspace, AddNoise, Spectrum};

fn main() -> bulkphonon::Result<()> {
    let cfg = RunConfig::linbo3_default();
    let model = cfg.system_model()?.without_qubit();
    let freqs = linspace(cfg.cavity.f_c - 40e6, cfg.cavity.f_c + 40e6, 8001);
    let spectrum = Spectrum::simulate(&model, freqs)?.add_noise(cfg.noise.sigma, cfg.noise.seed)?;
    let fit = fit_notches(&spectrum, &model.phonons, &cfg.cavity)?;
    let qs = estimate_phonon_q(&fit)?;
    for ((truth, (f, g, gamma)), q) in model.phonons.modes().iter().zip(fit.notch_modes()).zip(qs) {
        println!(
            "n={}: f {:.4} GHz, g {:.3} MHz (true {:.3}), γ {:.3} MHz, Q_m {q:.0}",
            truth.n,
            f / 1e9,
            g / 1e6,
            truth.g_hz / 1e6,
            gamma / 1e6
        );
    }
    println!(
        "FSR = {:.4} ± {:.4} MHz",
        fit.get("fsr_hz").unwrap() / 1e6,
        fit.sigma("fsr_hz").unwrap() / 1e6
    );
    Ok(())
}
