//! Transmission probability and unwrapped phase through the single Gaussian
//! barrier, checked against the square-barrier closed form.

use tunnelcld::potential::{presets, PhysicalScales};
use tunnelcld::scattering::{phase_curve, transmit};

fn main() -> tunnelcld::Result<()> {
    let scales = PhysicalScales::from_kappa(1.0, 10.0)?;
    let barrier = presets::gaussian('a').expect("known panel");
    // fine enough that adjacent phase increments stay unambiguous
    let grid: Vec<f64> = (10..=150).map(|i| 0.01 * i as f64).collect();
    let curve = phase_curve(&barrier, &scales, &grid)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "E", "T", "Re phi", "Im phi");
    for r in curve.results.iter().step_by(10) {
        println!(
            "{:>6.3} {:>12.4e} {:>12.6} {:>12.6}",
            r.energy,
            r.transmission_probability(),
            r.phi.re,
            r.phi.im
        );
    }

    let square = presets::square_barrier();
    let r = transmit(&square, &PhysicalScales::new(1.0, 1.0)?, 0.5)?;
    println!("square barrier at E = 0.5: T = {:.6e}, unitarity defect {:.1e}", r.transmission_probability(), r.unitarity_defect());
    Ok(())
}
