//! Complex-scaled spectrum of the double barrier and the continuum level
//! density just above the real axis.

use tunnelcld::potential::{presets, PhysicalScales};
use tunnelcld::scaling::{cld_real_axis, spectral_set, ComplexScalingConfig, DEFAULT_MARGIN};

fn main() -> tunnelcld::Result<()> {
    let scales = PhysicalScales::from_kappa(1.0, 10.0)?;
    let spec = presets::gaussian('c').expect("known panel");
    let scaling = ComplexScalingConfig::new(0.3, 20.0, 600);
    let set = spectral_set(&spec, &scales, &scaling, DEFAULT_MARGIN)?;
    println!("{} bound, {} resonances uncovered", set.bound_states.len(), set.resonances.len());
    for r in &set.resonances {
        println!("  resonance E = {:.6}, Gamma = {:.3e}", r.e, r.gamma);
    }

    let grid: Vec<f64> = (0..=20).map(|i| 0.5 + 0.02 * i as f64).collect();
    let density = cld_real_axis(&set, &grid, 1e-3)?;
    for (p, v) in density.points.iter().zip(&density.values) {
        println!("{:>6.3} {:>14.6e} {:>14.6e}", p.e, v.re, v.im);
    }
    Ok(())
}
