//! Predicted and fitted singular forms of the density at every stationary
//! point of each gallery potential and at the square-barrier edge.

use tunnelcld::potential::{
    find_stationary_points, interaction_bounds, presets, PhysicalScales, DEFAULT_BOUNDS_TOLERANCE,
};
use tunnelcld::semiclassics::{fit_singularity, predict_rectangular, predict_singularity, SingularityFit};

fn report(label: &str, fit: &SingularityFit) {
    let p = &fit.prediction;
    println!(
        "{label}: x0 {:+.4} E0 {:+.4} Re {:<18} Im {:<18} fitted p {:?} step {:?} -> {}",
        p.x0,
        p.e0,
        p.re_form.label(),
        p.im_form.label(),
        fit.re.exponent_above.or(fit.im.exponent_below),
        fit.re.step.or(fit.im.step),
        if fit.pass() { "pass" } else { "fail" }
    );
}

fn main() -> tunnelcld::Result<()> {
    let scales = PhysicalScales::new(1.0, 1.0)?;
    for panel in presets::PANELS {
        let spec = presets::gaussian(panel).expect("known panel");
        let bounds = interaction_bounds(&spec, DEFAULT_BOUNDS_TOLERANCE)?;
        for point in find_stationary_points(&spec, (bounds.a, bounds.b))? {
            let fit = fit_singularity(&spec, &scales, &bounds, &predict_singularity(&point))?;
            report(&format!("({panel})"), &fit);
        }
    }
    let square = presets::square_barrier();
    let bounds = interaction_bounds(&square, DEFAULT_BOUNDS_TOLERANCE)?;
    report("square", &fit_singularity(&square, &scales, &bounds, &predict_rectangular(1.0))?);
    Ok(())
}
