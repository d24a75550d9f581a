//! Semiclassical phase recovered by integrating the smoothed density, set
//! beside the eikonal phase of the exact scattering solution.

use tunnelcld::potential::{interaction_bounds, presets, PhysicalScales, DEFAULT_BOUNDS_TOLERANCE};
use tunnelcld::scattering::eikonal_phase;
use tunnelcld::semiclassics::{reconstruct_phase, singular_energies, smoothed_cld};

fn main() -> tunnelcld::Result<()> {
    let scales = PhysicalScales::from_kappa(1.0, 20.0)?;
    let spec = presets::gaussian('f').expect("known panel");
    let bounds = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE)?;
    let singular = singular_energies(&spec, &bounds)?;
    // keep clear of the stationary energies, where the density is singular
    let grid: Vec<f64> = (0..=600)
        .map(|i| -0.3 + 0.0025 * i as f64 + 1e-4)
        .filter(|e| e.abs() > 1e-3 && singular.iter().all(|s| (e - s).abs() > 1e-3))
        .collect();
    let density: Vec<_> = smoothed_cld(&spec, &scales, &bounds, &grid)?.into_iter().map(|p| p.value).collect();
    let phase = reconstruct_phase(&grid, &density)?;
    println!("Richardson error estimate {:.2e}", phase.error_estimate);
    for (i, (&e, phi)) in phase.energies.iter().zip(&phase.phase).enumerate() {
        if i % 60 == 0 && e > 0.0 {
            println!("{e:>8.4} Re {:>10.5} Im {:>10.5}  eikonal {:>10.5}", phi.re, phi.im, eikonal_phase(&spec, &scales, e)?);
        } else if i % 60 == 0 {
            println!("{e:>8.4} Re {:>10.5} Im {:>10.5}", phi.re, phi.im);
        }
    }
    Ok(())
}
