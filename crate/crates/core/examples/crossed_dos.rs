//! Local density of states at B = 0.5 T with a transverse electric force:
//! Landau levels drift apart into bands as the force grows.

use qsource::observables::{dos, find_peaks};
use qsource::propagators::FieldConfig;
use qsource::scales::{make_scales, Constants, Dimension, PhysicalFields, Quantity};

fn main() -> qsource::Result<()> {
    let c = Constants::SI;
    let magnetic = PhysicalFields {
        b_field: 0.5,
        charge: -c.elementary_charge,
        ..Default::default()
    };
    // cyclotron units from B alone, shared by the whole sweep
    let units = make_scales(c.hbar, c.electron_mass, &magnetic, None)?;
    let base = units.field_config(c.electron_mass, &magnetic);
    let energies: Vec<f64> = (0..=600).map(|i| 0.01 * i as f64).collect();
    for ev_per_m in [1.0, 100.0, 400.0] {
        let fy = units.to_dimensionless(Quantity::new(ev_per_m * c.elementary_charge, Dimension::FORCE));
        let cfg = FieldConfig {
            force: [0.0, fy, 0.0],
            ..base
        };
        let spectrum = dos([0.0; 3], &energies, &cfg, 0.05)?;
        let peaks = find_peaks(&spectrum);
        let show: Vec<String> = peaks.iter().take(5).map(|p| format!("{:.3}/{:.3}", p.center, p.width)).collect();
        println!("F_y = {ev_per_m:>5} eV/m: peak/width {}", show.join("  "));
    }
    Ok(())
}
