use super::DiagnosticsSample;
use crate::error::{Error, Result};

/// Worst energy-budget residual over a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetResidual {
    pub value: f64,
    /// Set when `‖u₀‖ = 0` and the residual is absolute rather than relative.
    pub absolute: bool,
}

fn finish(samples: &[DiagnosticsSample], residuals: impl Iterator<Item = f64>) -> BudgetResidual {
    let e0 = samples[0].h0sq;
    let worst = residuals.fold(0.0_f64, |m, r| m.max(r.abs()));
    if e0 > 0.0 {
        BudgetResidual {
            value: worst / e0,
            absolute: false,
        }
    } else {
        BudgetResidual {
            value: worst,
            absolute: true,
        }
    }
}

fn check_len(samples: &[DiagnosticsSample]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::Domain("energy budget needs at least two samples".into()));
    }
    Ok(())
}

/// `max_t |R(t)| / ‖u₀‖²` with
/// `R(t) = ‖u(t)‖² + 2∫₀ᵗ(ν‖∇u‖² + D) − ‖u₀‖² − 2∫₀ᵗ⟨f,u⟩`,
/// using the step-resolution time integrals carried by the samples.
pub fn energy_budget_residual(samples: &[DiagnosticsSample]) -> Result<BudgetResidual> {
    check_len(samples)?;
    let e0 = samples[0].h0sq;
    Ok(finish(
        samples,
        samples
            .iter()
            .map(|s| s.h0sq + 2.0 * s.dissipation_integral - e0 - 2.0 * s.forcing_work),
    ))
}

/// Same residual with the time integrals taken by the trapezoid rule over
/// the sample values only (for series read back from `timeseries.csv`).
pub fn energy_budget_residual_sampled(samples: &[DiagnosticsSample], nu: f64) -> Result<BudgetResidual> {
    check_len(samples)?;
    let e0 = samples[0].h0sq;
    let mut diss = 0.0;
    let mut work = 0.0;
    let mut res = Vec::with_capacity(samples.len());
    res.push(0.0);
    for w in samples.windows(2) {
        let h = w[1].t - w[0].t;
        diss += 0.5 * h * (nu * (w[0].grad_sq + w[1].grad_sq) + w[0].taming_dissipation + w[1].taming_dissipation);
        work += 0.5 * h * (w[0].forcing_power + w[1].forcing_power);
        res.push(w[1].h0sq + 2.0 * diss - e0 - 2.0 * work);
    }
    Ok(finish(samples, res.into_iter()))
}
