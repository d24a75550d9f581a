//! Classical traversal times and the smoothed semiclassical density for the
//! asymmetric barrier, including the inverted-potential duality.

use tunnelcld::potential::{interaction_bounds, presets, PhysicalScales, DEFAULT_BOUNDS_TOLERANCE};
use tunnelcld::semiclassics::{classical_times, singular_energies, smoothed_cld};

fn main() -> tunnelcld::Result<()> {
    let scales = PhysicalScales::from_kappa(1.0, 20.0)?;
    let spec = presets::gaussian('d').expect("known panel");
    let bounds = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE)?;
    println!("stationary energies: {:?}", singular_energies(&spec, &bounds)?);

    let grid: Vec<f64> = (0..15).map(|i| 0.05 + 0.1 * i as f64 + 1e-3).collect();
    for p in smoothed_cld(&spec, &scales, &bounds, &grid)? {
        println!(
            "{:>6.3} t+ {:>9.4} t- {:>9.4} t0 {:>9.4}  rho {:>10.4} {:+10.4}i",
            p.energy, p.times.t_plus, p.times.t_minus, p.times.t_zero, p.value.re, p.value.im
        );
    }

    let direct = classical_times(&spec, &scales, &bounds, 0.3)?;
    let inverted = classical_times(&spec.negated(), &scales, &bounds, -0.3)?;
    println!("duality: t+(E) = {:.12}, t-(-E) of -V = {:.12}", direct.t_plus, inverted.t_minus);
    Ok(())
}
