use super::{FrequencyGrid, PvError};

/// Principal value `P∫_a^b f(ω)/(ω−ω0) dω` for a smooth `f`, by
/// subtraction of the singularity on a uniform composite Gauss–Legendre
/// grid with `panels` panels of three nodes each:
///
/// `∫ (f(ω) − f(ω0))/(ω − ω0) dω + f(ω0) ln|(b−ω0)/(a−ω0)|`.
pub fn pv_integral<F: Fn(f64) -> f64>(f: F, pole: f64, a: f64, b: f64, panels: usize) -> Result<f64, PvError> {
    let grid = FrequencyGrid::uniform(a, b, panels, 3)?;
    pv_integral_on_grid(&grid, f, pole)
}

/// Same as [`pv_integral`] on an arbitrary composite grid, with `f`
/// evaluated exactly at the pole.
pub fn pv_integral_on_grid<F: Fn(f64) -> f64>(grid: &FrequencyGrid, f: F, pole: f64) -> Result<f64, PvError> {
    check_pole(grid, pole)?;
    let samples = grid.sample(&f);
    // the derivative is only used if a node lands exactly on the pole
    let (a, b) = grid.panel_bounds(grid.panel_of(pole).unwrap_or(0));
    let h = 1e-6 * (b - a);
    let df0 = (f(pole + h) - f(pole - h)) / (2.0 * h);
    pv_with_pole_value(grid, &samples, pole, f(pole), df0)
}

/// Principal value of `P∫ f(ω)/(ω−ω0) dω` over the whole grid, where `f` is
/// known only through its samples at the grid nodes. `f(ω0)` is taken from
/// the Lagrange interpolant of the panel containing the pole.
pub fn pv_integral_sampled(grid: &FrequencyGrid, samples: &[f64], pole: f64) -> Result<f64, PvError> {
    if samples.len() != grid.len() {
        return Err(PvError::SampleMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    check_pole(grid, pole)?;
    let (f0, df0) = grid.interpolate(samples, pole).ok_or(PvError::PoleOutsideInterval {
        pole,
        lower: grid.lower(),
        upper: grid.upper(),
    })?;
    pv_with_pole_value(grid, samples, pole, f0, df0)
}

fn check_pole(grid: &FrequencyGrid, pole: f64) -> Result<(), PvError> {
    let (a, b) = (grid.lower(), grid.upper());
    if !(pole > a && pole < b) {
        return Err(PvError::PoleOutsideInterval { pole, lower: a, upper: b });
    }
    let first = grid.panel_bounds(0);
    let last = grid.panel_bounds(grid.panel_count() - 1);
    let left_spacing = (first.1 - first.0) / grid.order() as f64;
    let right_spacing = (last.1 - last.0) / grid.order() as f64;
    if pole - a < left_spacing || b - pole < right_spacing {
        return Err(PvError::PoleOnBoundary { pole, lower: a, upper: b });
    }
    Ok(())
}

fn pv_with_pole_value(grid: &FrequencyGrid, samples: &[f64], pole: f64, f0: f64, df0: f64) -> Result<f64, PvError> {
    check_pole(grid, pole)?;
    let (a, b) = (grid.lower(), grid.upper());
    let scale = b - a;
    let regular: f64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(samples)
        .map(|((&x, &w), &f)| {
            let d = x - pole;
            if d.abs() <= 1e-14 * scale {
                w * df0
            } else {
                w * (f - f0) / d
            }
        })
        .sum();
    Ok(regular + f0 * ((b - pole) / (a - pole)).abs().ln())
}
