//! Natural units picked for an electron and a rubidium atom in typical
//! fields, and a round trip through them.

use qsource::scales::{make_scales, Constants, Dimension, PhysicalFields, Quantity};

fn main() -> qsource::Result<()> {
    let c = Constants::SI;
    let cases = [
        ("electron, 300 eV/m", c.electron_mass, [0.0, 0.0, 300.0 * c.elementary_charge], 0.0),
        ("electron, 116 eV/m + 1 mT", c.electron_mass, [0.0, 0.0, 116.0 * c.elementary_charge], 1e-3),
        ("electron, 0.5 T", c.electron_mass, [0.0; 3], 0.5),
        ("Rb-87, gravity", c.rubidium87_mass, [0.0, 0.0, c.rubidium87_mass * 9.81], 0.0),
    ];
    for (name, mass, force, b) in cases {
        let fields = PhysicalFields {
            force,
            b_field: b,
            charge: if mass == c.electron_mass { -c.elementary_charge } else { 0.0 },
        };
        let u = make_scales(c.hbar, mass, &fields, None)?;
        let cfg = u.field_config(mass, &fields);
        println!(
            "{name:<26} {:<15} L = {:.4e} m  eps = {:.4e} J  T = {:.4e} s  m = {:.3}",
            u.derivation.to_string(),
            u.length_scale,
            u.energy_scale,
            u.time_scale,
            cfg.mass
        );
    }
    let u = make_scales(c.hbar, c.rubidium87_mass, &PhysicalFields {
        force: [0.0, 0.0, c.rubidium87_mass * 9.81],
        ..Default::default()
    }, None)?;
    let depth = u.to_dimensionless(Quantity::new(1e-3, Dimension::LENGTH));
    println!("1 mm below a Rb source is z = {depth:.2}, back to {:.6e} m", u.to_physical(depth, Dimension::LENGTH).value);
    Ok(())
}
