//! Odd-mode selection rule and the |cos θ| orientation law of the coupling.

use std::f64::consts::PI;

use bulkphonon::piezo::{coupling_weight, overlap_integral, DriveField};

fn main() -> bulkphonon::Result<()> {
    let t = 500e-6;
    for n in 1..=6 {
        println!(
            "n={n}: overlap {:.4e} m, weight {:.4}",
            overlap_integral(n, t)?,
            coupling_weight(n, &DriveField::aligned())?.weight
        );
    }
    for deg in [0.0, 30.0, 60.0, 90.0] {
        let field = DriveField::new(1.0, deg * PI / 180.0)?;
        println!(
            "θ={deg:>4}°: n=1339 weight {:.4e}",
            coupling_weight(1339, &field)?.weight
        );
    }
    Ok(())
}
