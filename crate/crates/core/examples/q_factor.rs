//! Loaded cavity quality factors: Q ≈ 1500 against Q ≈ 400.

use bulkphonon::fitsuite::q_factor;
use bulkphonon::spectro::{linspace, CavityParams, Spectrum, SystemModel};

fn main() -> bulkphonon::Result<()> {
    let f_c = 4.8e9;
    let mut qs = Vec::new();
    for fwhm in [3.2e6, 12e6] {
        let cavity = CavityParams::symmetric(f_c, fwhm)?;
        let spectrum = Spectrum::simulate(
            &SystemModel::bare(cavity),
            linspace(f_c - 10.0 * fwhm, f_c + 10.0 * fwhm, 801),
        )?;
        let fit = q_factor(&spectrum)?;
        println!(
            "FWHM {:.1} MHz: Q = {:.1} ± {:.1}",
            fwhm / 1e6,
            fit.get("q").unwrap(),
            fit.sigma("q").unwrap()
        );
        qs.push(fit.get("q").unwrap());
    }
    println!("ratio {:.3}", qs[0] / qs[1]);
    Ok(())
}
