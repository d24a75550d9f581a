//! Pole counting by contour integration of the density around rectangles in
//! the (E, Gamma) plane.

use tunnelcld::potential::{presets, PhysicalScales};
use tunnelcld::scaling::{contour_count, count_poles, spectral_set, ComplexScalingConfig, EnergyRectangle, DEFAULT_MARGIN};

fn main() -> tunnelcld::Result<()> {
    let scales = PhysicalScales::from_kappa(1.0, 10.0)?;
    let spec = presets::gaussian('c').expect("known panel");
    let set = spectral_set(&spec, &scales, &ComplexScalingConfig::new(0.3, 20.0, 600), DEFAULT_MARGIN)?;
    for (e_min, e_max) in [(0.05, 0.5), (0.5, 0.7), (0.5, 0.95)] {
        let rect = EnergyRectangle { e_min, e_max, gamma_min: -0.01, gamma_max: 0.01 };
        let integral = contour_count(&set, &rect, 16)?;
        let (full, free) = count_poles(&set, &rect);
        println!(
            "E in [{e_min}, {e_max}]: contour {:.6} (expected {}), {full} full and {free} free poles inside",
            integral.re,
            2 * (full as i64 - free as i64)
        );
    }
    Ok(())
}
