use proptest::prelude::*;
use qsource::cli::parse_config;
use qsource::geom::Grid;
use qsource::observables::{
    current_at, current_density, default_step, flux_through_surface, total_current, PointwiseCurrent, Surface,
};
use qsource::propagators::FieldConfig;
use qsource::sources::{scatter_wave, SourceSpec};
use qsource::Complex64;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn concentric_spheres_on_a_gridded_current() {
    let cfg = FieldConfig::free(1.0);
    let s = SourceSpec::gaussian([0.0; 3], one(), 0.25, 1.0);
    let grid = Grid::spanning([-2.2; 3], [2.2; 3], [45, 45, 45]).unwrap();
    let c = current_density(&scatter_wave(&s, &cfg, &grid).unwrap()).unwrap();
    // both spheres beyond 6a, where the source has no weight left
    let flux = |radius: f64| {
        flux_through_surface(
            &c,
            &Surface::Sphere {
                center: [0.0; 3],
                radius,
            },
        )
        .unwrap()
        .value
    };
    let (inner, outer) = (flux(1.5), flux(1.8));
    let j = total_current(&s, &cfg, 0.0).unwrap();
    assert!((inner / outer - 1.0).abs() < 1e-4, "{inner} {outer}");
    assert!((outer / j - 1.0).abs() < 1e-3, "{outer} {j}");
}

#[test]
fn sphere_leaving_the_grid_is_an_error() {
    let cfg = FieldConfig::free(1.0);
    let s = SourceSpec::gaussian([0.0; 3], one(), 0.25, 1.0);
    let grid = Grid::spanning([-1.0; 3], [1.0; 3], [21, 21, 21]).unwrap();
    let c = current_density(&scatter_wave(&s, &cfg, &grid).unwrap()).unwrap();
    let sphere = Surface::Sphere {
        center: [0.0; 3],
        radius: 0.95,
    };
    assert!(flux_through_surface(&c, &sphere).is_err());
}

#[test]
fn parallel_fields_current_is_rotationally_symmetric() {
    let sc = parse_config("scenario = \"eb_parallel\"").unwrap();
    let (cfg, s) = (sc.field, SourceSpec::point(sc.position, one(), sc.energies[0]));
    for (rho, z) in [(1.0, -2.0), (3.0, 3.0), (6.0, 10.0)] {
        // cylindrical components (rho, phi, z) at several azimuths
        let cyl: Vec<[f64; 3]> = [0.0, 0.7, 2.1, 4.0]
            .iter()
            .map(|&phi: &f64| {
                let r = [rho * phi.cos(), rho * phi.sin(), z];
                let j = current_at(&s, &cfg, r, default_step(&s, &cfg, r)).unwrap();
                let (c, sn) = (phi.cos(), phi.sin());
                [c * j[0] + sn * j[1], -sn * j[0] + c * j[1], j[2]]
            })
            .collect();
        let size = cyl[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        for other in &cyl[1..] {
            let gap = (0..3).map(|a| (other[a] - cyl[0][a]).powi(2)).sum::<f64>().sqrt();
            assert!(gap <= 1e-6 * size, "rho {rho} z {z}: {gap:e} vs {size:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn any_enclosing_sphere_carries_the_total_current(
        radius in 0.5f64..4.0,
        energy in 0.2f64..3.0,
        offset in prop::array::uniform3(-0.3f64..0.3),
    ) {
        let cfg = FieldConfig::free(1.0);
        let s = SourceSpec::point([0.0; 3], Complex64::new(0.6, -0.8), energy);
        let f = flux_through_surface(
            &PointwiseCurrent { source: s, field: cfg },
            &Surface::Sphere { center: offset, radius },
        ).unwrap();
        let j = total_current(&s, &cfg, 0.0).unwrap();
        prop_assert!((f.value / j - 1.0).abs() < 1e-3, "{} vs {j}", f.value);
    }

    #[test]
    fn total_current_scales_with_strength_squared(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let cfg = FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]);
        let s = SourceSpec::gaussian([0.0; 3], Complex64::new(re, im), 0.4, 1.0);
        let unit = SourceSpec { strength: one(), ..s };
        let (a, b) = (total_current(&s, &cfg, 0.0).unwrap(), total_current(&unit, &cfg, 0.0).unwrap());
        prop_assert!((a - b * (re * re + im * im)).abs() <= 1e-12 * a.abs());
    }
}
