//! Photodetachment-style fringes: an electron point source in a uniform
//! field, seen on a plane 0.5 m down. Exact |G|^2 against the two-path
//! stationary-phase picture.

use qsource::interference::{classical_radius_squared, count_maxima, exact_intensity, semiclassical_field_pattern};
use qsource::scales::{make_scales, Constants, Dimension, PhysicalFields, Quantity};

fn main() -> qsource::Result<()> {
    let c = Constants::SI;
    let fields = PhysicalFields {
        force: [0.0, 0.0, 300.0 * c.elementary_charge],
        ..Default::default()
    };
    let units = make_scales(c.hbar, c.electron_mass, &fields, None)?;
    let cfg = units.field_config(c.electron_mass, &fields);
    let depth = units.to_dimensionless(Quantity::new(0.5, Dimension::LENGTH));
    println!("beta = {:.4e} m, depth = {depth:.4e} beta", units.length_scale);
    for ev in [100e-6, 200e-6] {
        let e = units.to_dimensionless(Quantity::new(ev * c.elementary_charge, Dimension::ENERGY));
        let rho_max = classical_radius_squared(e, cfg.force[2], depth).sqrt();
        let pts: Vec<[f64; 3]> = (0..2001).map(|i| [1.2 * rho_max * i as f64 / 2000.0, 0.0, depth]).collect();
        let exact = exact_intensity(&pts, e, &cfg)?;
        // stationary phase only where the two paths are well separated
        let inside: Vec<[f64; 3]> = pts
            .iter()
            .copied()
            .filter(|p| semiclassical_field_pattern(&[*p], e, &cfg).is_ok())
            .collect();
        let semi = semiclassical_field_pattern(&inside, e, &cfg)?;
        println!(
            "E = {:>3.0} ueV: radius {:.3} mm, maxima exact {}, semiclassical {}",
            ev * 1e6,
            units.to_physical(rho_max, Dimension::LENGTH).value * 1e3,
            count_maxima(&exact),
            semi.fringe_count
        );
    }
    Ok(())
}
