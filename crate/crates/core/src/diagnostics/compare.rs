use super::Snapshot;
use crate::error::{Error, Result};

/// Spatial domain of a run comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Full,
    /// Axis-aligned box `[lo, hi]` in torus coordinates, `0 ≤ lo < hi ≤ 2π`.
    SubBox { lo: [f64; 3], hi: [f64; 3] },
}

/// `∫₀ᵀ ∫_region |a − b|² dx dt`, trapezoid rule over the snapshot times.
///
/// On the full torus the spatial integral is evaluated from the Fourier
/// coefficients; on a sub-box it is a grid-point sum with cell volume `Δx³`.
pub fn compare_runs(a: &[Snapshot], b: &[Snapshot], region: Region) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::config(format!(
            "compare: runs have {} and {} samples",
            a.len(),
            b.len()
        )));
    }
    if let Region::SubBox { lo, hi } = region {
        if (0..3).any(|i| !(lo[i] < hi[i])) {
            return Err(Error::config("compare: sub-box needs lo < hi on every axis"));
        }
    }
    let mut values = Vec::with_capacity(a.len());
    for (sa, sb) in a.iter().zip(b) {
        if sa.t != sb.t {
            return Err(Error::config(format!("compare: sample times differ ({} vs {})", sa.t, sb.t)));
        }
        sa.u.grid().check_same(&sb.u.grid())?;
        let v = match region {
            Region::Full => sa.u.distance_sq(&sb.u)?,
            Region::SubBox { lo, hi } => subbox_distance_sq(sa, sb, lo, hi),
        };
        values.push((sa.t, v));
    }
    if values.len() == 1 {
        return Ok(0.0);
    }
    Ok(values
        .windows(2)
        .fold(0.0, |acc, w| acc + 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)))
}

fn subbox_distance_sq(a: &Snapshot, b: &Snapshot, lo: [f64; 3], hi: [f64; 3]) -> f64 {
    let grid = a.u.grid();
    let mut diff = a.u.clone();
    diff.axpy(-1.0, &b.u).expect("grids checked");
    let d = diff.to_physical();
    let mut s = 0.0;
    grid.for_each_point(|idx, x| {
        if (0..3).all(|i| x[i] >= lo[i] && x[i] <= hi[i]) {
            s += d[0][idx] * d[0][idx] + d[1][idx] * d[1][idx] + d[2][idx] * d[2][idx];
        }
    });
    s * grid.dx().powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{GridSpec, SpectralVelocity};
    use std::f64::consts::PI;

    fn series(amp: f64) -> Vec<Snapshot> {
        let g = GridSpec::new(16).unwrap();
        (0..=4)
            .map(|i| Snapshot {
                t: 0.25 * i as f64,
                u: SpectralVelocity::from_fn(g, |[_, y, _]| [amp * y.sin(), 0.0, 0.0]),
            })
            .collect()
    }

    #[test]
    fn self_distance_is_zero() {
        let a = series(1.0);
        assert_eq!(compare_runs(&a, &a, Region::Full).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_full_and_subbox() {
        let a = series(1.0);
        let b = series(0.0);
        // ∫ sin²y = 4π³ over the box, for one time unit
        let full = compare_runs(&a, &b, Region::Full).unwrap();
        assert!((full - 4.0 * PI.powi(3)).abs() < 1e-10);
        let whole = Region::SubBox {
            lo: [0.0; 3],
            hi: [2.0 * PI; 3],
        };
        let sub = compare_runs(&a, &b, whole).unwrap();
        assert!((sub - full).abs() < 1e-9 * full);
    }

    #[test]
    fn mismatched_timelines_rejected() {
        let a = series(1.0);
        assert!(compare_runs(&a, &a[..3], Region::Full).is_err());
    }
}
