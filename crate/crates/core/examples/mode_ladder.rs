//! Shear velocity and the thickness-mode ladder of a 500 µm LiNbO3 slab.

use bulkphonon::acoustics::{
    free_spectral_range, mode_index_near, shear_velocity, MaterialSpec, ModeTable, Parity,
    SlabGeometry,
};
use bulkphonon::io::mode_table_csv;

fn main() -> bulkphonon::Result<()> {
    let v_t = shear_velocity(&MaterialSpec::linbo3_y());
    let slab = SlabGeometry::new(500e-6, 0.0)?;
    let f1 = free_spectral_range(v_t, &slab);
    let n = mode_index_near(4.7915e9, f1, Parity::Odd);
    println!(
        "v_t = {v_t:.1} m/s, f1 = {:.4} MHz, odd mode nearest 4.7915 GHz: n = {n}",
        f1 / 1e6
    );
    print!(
        "{}",
        mode_table_csv(&ModeTable::new(v_t, &slab, (n - 4)..=(n + 4))?)
    );
    Ok(())
}
