use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[0, 2π)³` with `M` points per axis.
///
/// Fourier index `n ∈ [0, M)` carries wavenumber `n` for `n < M/2` and
/// `n − M` above; the Nyquist index `n = M/2` is never populated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    size: usize,
}

impl GridSpec {
    pub fn new(size: usize) -> Result<Self> {
        if size < 8 || size % 2 != 0 {
            return Err(Error::config(format!(
                "grid.size must be an even integer >= 8, got {size}"
            )));
        }
        Ok(Self { size })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of grid points (and stored Fourier coefficients) per component.
    #[inline]
    pub fn len(&self) -> usize {
        self.size * self.size * self.size
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest retained `|k_i|` under the two-thirds rule.
    ///
    /// Chosen as the largest `K` with `3K < M`, so that every alias of a
    /// quadratic product of retained modes falls outside the retained cube.
    #[inline]
    pub fn dealias_bound(&self) -> i64 {
        ((self.size - 1) / 3) as i64
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * PI / self.size as f64
    }

    /// Physical coordinate of grid index `n` along any axis.
    #[inline]
    pub fn coord(&self, n: usize) -> f64 {
        n as f64 * self.dx()
    }

    #[inline]
    pub fn wavenumber(&self, n: usize) -> i64 {
        let m = self.size;
        if n < m / 2 {
            n as i64
        } else {
            n as i64 - m as i64
        }
    }

    #[inline]
    pub fn is_nyquist(&self, n: usize) -> bool {
        n == self.size / 2
    }

    /// Index of the mirrored wavenumber `-k` along one axis.
    #[inline]
    pub fn mirror(&self, n: usize) -> usize {
        (self.size - n) % self.size
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.size + j) * self.size + l
    }

    /// Storage index of `-k` given the storage index of `k`.
    #[inline]
    pub fn mirror_index(&self, idx: usize) -> usize {
        let m = self.size;
        let (i, j, l) = (idx / (m * m), (idx / m) % m, idx % m);
        self.index(self.mirror(i), self.mirror(j), self.mirror(l))
    }

    /// Storage index for a signed wavevector, `None` if it is outside
    /// `{-M/2+1, …, M/2-1}³`.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let half = (self.size / 2) as i64;
        let m = self.size as i64;
        let mut n = [0usize; 3];
        for (a, &ka) in k.iter().enumerate() {
            if ka <= -half || ka >= half {
                return None;
            }
            n[a] = ka.rem_euclid(m) as usize;
        }
        Some(self.index(n[0], n[1], n[2]))
    }

    /// Per-axis wavenumber table with the Nyquist entry set to zero.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.size)
            .map(|n| {
                if self.is_nyquist(n) {
                    0.0
                } else {
                    self.wavenumber(n) as f64
                }
            })
            .collect()
    }

    /// Visit every Fourier mode in storage order with its signed wavevector
    /// and whether any of its indices is a Nyquist index.
    #[inline]
    pub fn for_each_mode<F: FnMut(usize, [i64; 3], bool)>(&self, mut f: F) {
        let m = self.size;
        let ks: Vec<i64> = (0..m).map(|n| self.wavenumber(n)).collect();
        let mut idx = 0;
        for i in 0..m {
            for j in 0..m {
                for l in 0..m {
                    let nyq = self.is_nyquist(i) || self.is_nyquist(j) || self.is_nyquist(l);
                    f(idx, [ks[i], ks[j], ks[l]], nyq);
                    idx += 1;
                }
            }
        }
    }

    /// Visit every physical grid point with its coordinates.
    #[inline]
    pub fn for_each_point<F: FnMut(usize, [f64; 3])>(&self, mut f: F) {
        let m = self.size;
        let xs: Vec<f64> = (0..m).map(|n| self.coord(n)).collect();
        let mut idx = 0;
        for i in 0..m {
            for j in 0..m {
                for l in 0..m {
                    f(idx, [xs[i], xs[j], xs[l]]);
                    idx += 1;
                }
            }
        }
    }

    /// True if the wavevector survives the two-thirds truncation.
    #[inline]
    pub fn retains(&self, k: [i64; 3]) -> bool {
        let kmax = self.dealias_bound();
        k.iter().all(|c| c.abs() <= kmax)
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_odd_sizes() {
        assert!(GridSpec::new(6).is_err());
        assert!(GridSpec::new(9).is_err());
        assert!(GridSpec::new(8).is_ok());
    }

    #[test]
    fn dealias_bound_matches_two_thirds_rule() {
        assert_eq!(GridSpec::new(16).unwrap().dealias_bound(), 5);
        assert_eq!(GridSpec::new(32).unwrap().dealias_bound(), 10);
        assert_eq!(GridSpec::new(64).unwrap().dealias_bound(), 21);
        // 3 | M: keep strictly below M/3
        assert_eq!(GridSpec::new(24).unwrap().dealias_bound(), 7);
    }

    #[test]
    fn index_of_and_mirror_agree() {
        let g = GridSpec::new(16).unwrap();
        let idx = g.index_of([3, -2, 7]).unwrap();
        let neg = g.index_of([-3, 2, -7]).unwrap();
        assert_eq!(g.mirror_index(idx), neg);
        assert!(g.index_of([8, 0, 0]).is_none());
        assert!(g.index_of([-8, 0, 0]).is_none());
    }
}
