//! Flux-swept spectrogram of the cavity-qubit crossing and its coupled-oscillator fit.

use bulkphonon::config::RunConfig;
use bulkphonon::fitsuite::{extract_branches, fit_avoided_crossing};
use bulkphonon::io::fit_result_json;
use bulkphonon::spectro::sweep_spectrogram;

fn main() -> bulkphonon::Result<()> {
    let cfg = RunConfig::linbo3_default();
    let flux = cfg.flux_grid(cfg.sweep.flux_points);
    let freq = cfg.freq_grid(cfg.sweep.f_points);
    let sg = sweep_spectrogram(&cfg.system_model()?, &flux, &freq, false)?;
    let peak = sg.rows().iter().flatten().fold(0.0_f64, |m, v| m.max(*v));
    let points = extract_branches(&sg, 0.05 * peak, 2.0 * cfg.cavity.kappa_total)?;
    let fit = fit_avoided_crossing(&points)?;
    println!(
        "{} branch points, g = {:.2} ± {:.2} MHz",
        points.len(),
        fit.get("g_hz").unwrap() / 1e6,
        fit.sigma("g_hz").unwrap() / 1e6
    );
    print!("{}", fit_result_json(&fit));
    Ok(())
}
