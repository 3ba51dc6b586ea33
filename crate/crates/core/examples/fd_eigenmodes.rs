//! Finite-difference eigenmodes of the free-free slab against the analytic ladder.

use bulkphonon::acoustics::{
    fd_eigenmodes, mode_frequency, shear_velocity, MaterialSpec, SlabGeometry,
};

fn main() -> bulkphonon::Result<()> {
    let v_t = shear_velocity(&MaterialSpec::linbo3_y());
    let slab = SlabGeometry::new(500e-6, 0.0)?;
    let modes = fd_eigenmodes(v_t, &slab, 2001, 5)?;
    for (k, (f, shape)) in modes.frequencies.iter().zip(&modes.shapes).enumerate() {
        let n = k as i64 + 1;
        let exact = mode_frequency(n, v_t, &slab)?;
        let nodes = shape
            .windows(2)
            .filter(|w| w[0].signum() != w[1].signum())
            .count();
        println!(
            "n={n}: fd {f:.2} Hz, analytic {exact:.2} Hz, rel err {:+.2e}, nodes {nodes}",
            (f - exact) / exact
        );
    }
    Ok(())
}
