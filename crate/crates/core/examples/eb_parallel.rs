//! Electron point source with E parallel to B: the current map in the x-z
//! half plane, printed as |j| on a coarse raster.

use qsource::geom::Grid;
use qsource::observables::{current_density, total_current};
use qsource::scales::{make_scales, Constants, Dimension, PhysicalFields, Quantity};
use qsource::sources::{scatter_wave, SourceSpec};
use qsource::Complex64;

fn main() -> qsource::Result<()> {
    let c = Constants::SI;
    let fields = PhysicalFields {
        force: [0.0, 0.0, 116.0 * c.elementary_charge],
        b_field: 1e-3,
        charge: -c.elementary_charge,
    };
    let units = make_scales(c.hbar, c.electron_mass, &fields, None)?;
    let cfg = units.field_config(c.electron_mass, &fields);
    let e = units.to_dimensionless(Quantity::new(60.8e-6 * c.elementary_charge, Dimension::ENERGY));
    println!("{} with beta = {:.4e} m, E = {e:.4}, omega = {:.5}", units.derivation, units.length_scale, cfg.omega());

    let s = SourceSpec::point([0.0; 3], Complex64::new(1.0, 0.0), e);
    let grid = Grid::spanning([0.4, 0.0, -4.0], [8.0, 0.0, 16.0], [39, 1, 101])?;
    let j = current_density(&scatter_wave(&s, &cfg, &grid)?)?;
    let peak = j.max_norm();
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    for k in (2..grid.shape[2] - 2).step_by(4) {
        let row: String = (2..grid.shape[0] - 2)
            .map(|i| {
                let v = qsource::geom::norm(j.j[grid.index(i, 0, k)]) / peak;
                shades[((v.sqrt() * 9.0).round() as usize).min(9)]
            })
            .collect();
        println!("z = {:>6.2} |{row}|", grid.point([0, 0, k])[2]);
    }
    println!("total current {:.6}", total_current(&s, &cfg, 0.0)?);
    Ok(())
}
