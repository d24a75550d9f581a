//! Complex-time trajectory through the double barrier: real time in allowed
//! regions, negative imaginary time under the barriers.

use tunnelcld::instanton::{accumulated_times, conservation_report, integrate};
use tunnelcld::potential::{interaction_bounds, presets, PhysicalScales, DEFAULT_BOUNDS_TOLERANCE};
use tunnelcld::semiclassics::classical_times;

fn main() -> tunnelcld::Result<()> {
    let scales = PhysicalScales::new(1.0, 1.0)?;
    let spec = presets::gaussian('c').expect("known panel");
    let bounds = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE)?;
    let energy = 0.7;
    let record = integrate(&spec, &scales, &bounds, energy, bounds.a, 1e4, bounds.width() / 20_000.0)?;
    for p in &record.switch_points {
        println!(
            "switch at x = {:+.10} (s = {:.4}), entering {}, |E - V| = {:.1e}",
            p.x,
            p.s,
            p.entering.label(),
            p.residual
        );
    }
    for seg in conservation_report(&spec, &scales, &record) {
        println!("segment {} {}: energy drift {:.1e}", seg.index, seg.segment.label(), seg.max_drift);
    }
    let (t_plus, t_minus) = accumulated_times(&record)?;
    let quad = classical_times(&spec, &scales, &bounds, energy)?;
    println!("trajectory t+ {t_plus:.10}, t- {t_minus:.10}");
    println!("quadrature t+ {:.10}, t- {:.10}", quad.t_plus, quad.t_minus);
    Ok(())
}
