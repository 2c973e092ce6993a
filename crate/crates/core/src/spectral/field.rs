use num_complex::Complex64;

use super::fft;
use super::grid::GridSpec;
use crate::error::Result;

/// Physical-space vector field, one real array per component.
pub type PhysicalVector = [Vec<f64>; 3];

/// Fourier coefficients of a real vector field on the torus.
///
/// Coefficients follow `û(k) = (2π)⁻³ ∫ u(x) e^{-ik·x} dx`, hence
/// `∫|u|² dx = (2π)³ Σ_k Σ_j |û_j(k)|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVelocity {
    grid: GridSpec,
    comps: [Vec<Complex64>; 3],
    divfree: bool,
}

impl SpectralVelocity {
    pub fn zeros(grid: GridSpec) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
            divfree: true,
        }
    }

    /// Wrap raw coefficients. The divergence-free flag is left unset.
    pub fn from_coefficients(grid: GridSpec, comps: [Vec<Complex64>; 3]) -> Self {
        assert!(comps.iter().all(|c| c.len() == grid.len()));
        Self {
            grid,
            comps,
            divfree: false,
        }
    }

    /// Transform a physical-space field. Nyquist modes are dropped.
    pub fn from_physical(grid: GridSpec, u: &PhysicalVector) -> Self {
        let (a, b) = fft::forward_real_pair(grid, &u[0], &u[1]);
        let c = fft::forward_real(grid, &u[2]);
        Self::from_coefficients(grid, [a, b, c])
    }

    /// Sample `f(x, y, z)` on the grid and transform.
    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3]>(grid: GridSpec, f: F) -> Self {
        let mut u: PhysicalVector = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
        grid.for_each_point(|idx, x| {
            let v = f(x);
            for j in 0..3 {
                u[j][idx] = v[j];
            }
        });
        Self::from_physical(grid, &u)
    }

    pub fn to_physical(&self) -> PhysicalVector {
        let mut v = fft::inverse_real_many(self.grid, &[&self.comps[0], &self.comps[1], &self.comps[2]]);
        let c = v.pop().unwrap();
        let b = v.pop().unwrap();
        let a = v.pop().unwrap();
        [a, b, c]
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn component(&self, j: usize) -> &[Complex64] {
        &self.comps[j]
    }

    #[inline]
    pub fn component_mut(&mut self, j: usize) -> &mut [Complex64] {
        self.divfree = false;
        &mut self.comps[j]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    pub(crate) fn components_mut_raw(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.comps
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    /// Coefficient of component `j` at signed wavevector `k` (zero if unrepresentable).
    pub fn coeff(&self, j: usize, k: [i64; 3]) -> Complex64 {
        self.grid
            .index_of(k)
            .map(|idx| self.comps[j][idx])
            .unwrap_or_default()
    }

    pub fn set_coeff(&mut self, j: usize, k: [i64; 3], value: Complex64) {
        if let Some(idx) = self.grid.index_of(k) {
            self.comps[j][idx] = value;
            self.divfree = false;
        }
    }

    #[inline]
    pub fn is_divfree(&self) -> bool {
        self.divfree
    }

    pub(crate) fn set_divfree(&mut self, flag: bool) {
        self.divfree = flag;
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// `max_k |k·û(k)| / max_k |û(k)|`, zero for the zero field.
    pub fn divergence_ratio(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        self.grid.for_each_mode(|idx, k, _| {
            let d = self.comps[0][idx] * k[0] as f64
                + self.comps[1][idx] * k[1] as f64
                + self.comps[2][idx] * k[2] as f64;
            worst = worst.max(d.norm());
        });
        worst / scale
    }

    /// Largest `|û(-k) - conj(û(k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for c in &self.comps {
            for idx in 0..c.len() {
                let m = self.grid.mirror_index(idx);
                worst = worst.max((c[m] - c[idx].conj()).norm());
            }
        }
        worst / scale
    }

    /// Replace every coefficient by the Hermitian average and clear Nyquist modes.
    pub fn enforce_hermitian(&mut self) {
        let grid = self.grid;
        for c in self.comps.iter_mut() {
            let old = c.clone();
            grid.for_each_mode(|idx, _, nyq| {
                c[idx] = if nyq {
                    Complex64::default()
                } else {
                    (old[idx] + old[grid.mirror_index(idx)].conj()) * 0.5
                };
            });
        }
    }

    /// `self += a · other`
    pub fn axpy(&mut self, a: f64, other: &SpectralVelocity) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (xi, yi) in x.iter_mut().zip(y) {
                *xi += yi * a;
            }
        }
        self.divfree = self.divfree && other.divfree;
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for x in c.iter_mut() {
                *x *= a;
            }
        }
        out
    }

    /// Multiply every mode by a real per-mode factor (shared by the three components).
    pub(crate) fn apply_multiplier(&mut self, mult: &[f64]) {
        for c in self.comps.iter_mut() {
            for (x, &m) in c.iter_mut().zip(mult) {
                *x *= m;
            }
        }
    }

    /// `⟨a, b⟩_{L²} = (2π)³ Re Σ conj(â)·b̂`.
    pub fn inner_l2(&self, other: &SpectralVelocity) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let mut s = 0.0;
        for (x, y) in self.comps.iter().zip(&other.comps) {
            for (xi, yi) in x.iter().zip(y) {
                s += xi.re * yi.re + xi.im * yi.im;
            }
        }
        Ok(super::ops::box_volume() * s)
    }

    /// `‖a − b‖²_{L²}` over the whole torus.
    pub fn distance_sq(&self, other: &SpectralVelocity) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let mut s = 0.0;
        for (x, y) in self.comps.iter().zip(&other.comps) {
            for (xi, yi) in x.iter().zip(y) {
                s += (xi - yi).norm_sqr();
            }
        }
        Ok(super::ops::box_volume() * s)
    }

    /// Coefficients restricted to the retained (dealiased) cube, in
    /// signed-lexicographic wavevector order.
    pub fn retained_coefficients(&self) -> [Vec<Complex64>; 3] {
        let kmax = self.grid.dealias_bound();
        let mut out: [Vec<Complex64>; 3] = Default::default();
        for (j, c) in self.comps.iter().enumerate() {
            for kx in -kmax..=kmax {
                for ky in -kmax..=kmax {
                    for kz in -kmax..=kmax {
                        let idx = self.grid.index_of([kx, ky, kz]).unwrap();
                        out[j].push(c[idx]);
                    }
                }
            }
        }
        out
    }

    /// Embed coefficients into another grid: modes representable on both
    /// grids are copied, all others are zero.
    pub fn resampled(&self, target: GridSpec) -> Self {
        let mut out = Self::zeros(target);
        self.grid.for_each_mode(|idx, k, nyq| {
            if nyq {
                return;
            }
            if let Some(t) = target.index_of(k) {
                for j in 0..3 {
                    out.comps[j][t] = self.comps[j][idx];
                }
            }
        });
        out.divfree = false;
        out
    }
}

/// Fourier coefficients of a real scalar field (pressure and test quantities).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl ScalarSpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coefficients(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn from_physical(grid: GridSpec, values: &[f64]) -> Self {
        Self {
            grid,
            coeffs: fft::forward_real(grid, values),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.grid.index_of(k).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    pub fn to_physical(&self) -> Vec<f64> {
        fft::inverse_real(self.grid, &self.coeffs)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }
}
