//! Classical fourth-order Runge-Kutta with a fixed step.

use nalgebra::SVector;

/// Advances `x` from `t` to `t + h`.
///
/// The derivative may fail (for example on a singular inertia matrix); the
/// first error aborts the step.
pub fn rk4_step<const N: usize, E, F>(t: f64, x: &SVector<f64, N>, h: f64, mut f: F) -> Result<SVector<f64, N>, E>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>, E>,
{
    let half = 0.5 * h;
    let k1 = f(t, x)?;
    let k2 = f(t + half, &(x + k1 * half))?;
    let k3 = f(t + half, &(x + k2 * half))?;
    let k4 = f(t + h, &(x + k3 * h))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}
