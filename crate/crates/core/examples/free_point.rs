//! Point source in free space: the outgoing spherical wave, its current, and
//! the emitted current three ways (Im G at the source, flux, source term).

use qsource::observables::{flux_through_surface, total_current, volume_source_current, PointwiseCurrent, Surface};
use qsource::propagators::FieldConfig;
use qsource::sources::{wave_at, SourceSpec};
use qsource::Complex64;

fn main() -> qsource::Result<()> {
    let cfg = FieldConfig::free(1.0);
    let s = SourceSpec::point([0.0; 3], Complex64::new(1.0, 0.0), 0.5);
    for d in [0.5, 1.0, 2.0, 4.0] {
        let psi = wave_at(&s, &cfg, [d, 0.0, 0.0])?.0;
        println!("d = {d:>4}: psi = {psi:.6}, d |psi| = {:.6}", d * psi.norm());
    }
    let j = total_current(&s, &cfg, 0.0)?;
    let flux = flux_through_surface(
        &PointwiseCurrent { source: s, field: cfg },
        &Surface::Sphere {
            center: [0.0; 3],
            radius: 3.0,
        },
    )?;
    let vol = volume_source_current(&s, &cfg, 0)?;
    println!("total current {j:.10} (1/pi = {:.10})", 1.0 / std::f64::consts::PI);
    println!("sphere flux   {:.10} ({} nodes)", flux.value, flux.nodes);
    println!("source term   {vol:.10}");
    Ok(())
}
