//! Gaussian source in a uniform field: emitted current from the bilinear
//! form, from the flux through spheres, and from the source term, plus the
//! continuity residual on a grid.

use qsource::geom::{dist, Grid};
use qsource::observables::{
    continuity_residual, current_density, flux_through_surface, total_current, volume_source_current, Surface,
};
use qsource::propagators::FieldConfig;
use qsource::sources::{scatter_wave, SourceSpec};
use qsource::Complex64;

fn main() -> qsource::Result<()> {
    let cfg = FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]);
    let s = SourceSpec::gaussian([0.0; 3], Complex64::new(1.0, 0.0), 0.25, 1.0);
    let grid = Grid::spanning([-2.2; 3], [2.2; 3], [45, 45, 45])?;
    let w = scatter_wave(&s, &cfg, &grid)?;
    let j = current_density(&w)?;
    println!("total current  {:.8}", total_current(&s, &cfg, 0.0)?);
    println!("source term    {:.8}", volume_source_current(&s, &cfg, 24)?);
    for radius in [1.5, 1.8] {
        let sphere = Surface::Sphere {
            center: [0.0; 3],
            radius,
        };
        println!("flux r = {radius}  {:.8}", flux_through_surface(&j, &sphere)?.value);
    }
    let res = continuity_residual(&w, &j, &s)?;
    let outside = (0..grid.len())
        .filter(|&i| res.valid[i] && dist(grid.point_at(i), s.position) > 6.0 * s.width)
        .map(|i| res.values[i].abs())
        .fold(0.0, f64::max);
    println!(
        "max |div j| outside 6a: {:.2e} of max|j| / h",
        outside * grid.min_spacing() / j.max_norm()
    );
    Ok(())
}
