//! Doubled-index bookkeeping and sparse walker states.
//!
//! Spin and site are flattened into a single integer: doubled index `2j` is
//! spin up at site `j`, and `2j + 1` is spin down at site `j`. Sites may be
//! negative; the doubled index uses floor division, so index `-1` is spin
//! down at site `-1`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::{Result, WalkError};

/// Internal spin degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// Doubled index of the basis state with the given site and spin.
pub fn index_of(site: i64, spin: Spin) -> i64 {
    match spin {
        Spin::Up => 2 * site,
        Spin::Down => 2 * site + 1,
    }
}

/// Site of a doubled index (floor division, valid for negative indices).
pub fn site_of(i: i64) -> i64 {
    i.div_euclid(2)
}

/// Spin of a doubled index: up iff the index is even.
pub fn spin_of(i: i64) -> Spin {
    if i.rem_euclid(2) == 0 {
        Spin::Up
    } else {
        Spin::Down
    }
}

/// Value of the position observable at a doubled index: `|site|`, the same
/// for both spin components of a site.
pub fn position_value(i: i64) -> i64 {
    site_of(i).abs()
}

/// Finitely supported complex vector on the doubled lattice.
///
/// Amplitudes that are exactly zero are never stored; everything else is
/// kept, so the support after evolution equals the theoretical support.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WalkerState {
    amps: BTreeMap<i64, Complex64>,
}

impl WalkerState {
    /// The zero vector.
    pub fn zero() -> Self {
        Self::default()
    }

    /// State with a single support point.
    ///
    /// Rejects a zero amplitude: the result would be the zero vector, which
    /// callers almost certainly did not intend.
    pub fn delta(site: i64, spin: Spin, amplitude: Complex64) -> Result<Self> {
        if amplitude.norm() == 0.0 {
            return Err(WalkError::InvalidParameter(
                "delta state amplitude must be nonzero".into(),
            ));
        }
        let mut amps = BTreeMap::new();
        amps.insert(index_of(site, spin), amplitude);
        Ok(Self { amps })
    }

    /// Superposition of several basis states; later entries add to earlier
    /// ones at the same point. With `normalize`, the result is scaled to
    /// unit norm (an all-cancelling input is rejected).
    pub fn superpose(parts: &[(i64, Spin, Complex64)], normalize: bool) -> Result<Self> {
        let mut amps: BTreeMap<i64, Complex64> = BTreeMap::new();
        for &(site, spin, a) in parts {
            let e = amps.entry(index_of(site, spin)).or_insert(Complex64::ZERO);
            *e += a;
        }
        amps.retain(|_, a| a.norm() != 0.0);
        let mut state = Self { amps };
        if normalize {
            let n = state.norm();
            if n == 0.0 {
                return Err(WalkError::InvalidParameter(
                    "cannot normalize the zero state".into(),
                ));
            }
            state.scale(Complex64::new(1.0 / n, 0.0));
        }
        Ok(state)
    }

    /// Build directly from doubled-index amplitudes, dropping exact zeros.
    pub fn from_amplitudes(entries: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut amps: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (i, a) in entries {
            let e = amps.entry(i).or_insert(Complex64::ZERO);
            *e += a;
        }
        amps.retain(|_, a| a.norm() != 0.0);
        Self { amps }
    }

    /// Amplitude at a doubled index (zero off the support).
    pub fn amplitude(&self, i: i64) -> Complex64 {
        self.amps.get(&i).copied().unwrap_or(Complex64::ZERO)
    }

    /// Support entries in increasing doubled-index order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.amps.iter().map(|(&i, &a)| (i, a))
    }

    /// Smallest and largest doubled index of the support, if nonempty.
    pub fn support_bounds(&self) -> Option<(i64, i64)> {
        let lo = self.amps.keys().next()?;
        let hi = self.amps.keys().next_back()?;
        Some((*lo, *hi))
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// In-place scalar multiplication.
    pub fn scale(&mut self, c: Complex64) {
        if c.norm() == 0.0 {
            self.amps.clear();
            return;
        }
        for a in self.amps.values_mut() {
            *a *= c;
        }
    }

    /// Pointwise multiplication by a diagonal operator given as a function
    /// of the doubled index. Used for diagonal fields, which preserve the
    /// support when the factors are unitary phases.
    pub fn apply_diagonal(&mut self, phase: impl Fn(i64) -> Complex64) {
        for (&i, a) in self.amps.iter_mut() {
            *a *= phase(i);
        }
        self.amps.retain(|_, a| a.norm() != 0.0);
    }

    /// Inner product `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (&i, a) in &self.amps {
            if let Some(b) = other.amps.get(&i) {
                acc += a.conj() * b;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for i in -1_000_000..=1_000_000 {
            assert_eq!(index_of(site_of(i), spin_of(i)), i);
        }
    }

    #[test]
    fn basis_ordering_examples() {
        assert_eq!(index_of(0, Spin::Up), 0);
        assert_eq!(index_of(-1, Spin::Down), -1);
        assert_eq!(index_of(3, Spin::Down), 7);
        assert_eq!(site_of(-1), -1);
        assert_eq!(spin_of(-1), Spin::Down);
    }

    #[test]
    fn position_values() {
        assert_eq!(position_value(0), 0);
        assert_eq!(position_value(1), 0);
        assert_eq!(position_value(-1), 1);
        assert_eq!(position_value(7), 3);
        for j in -500..=500 {
            assert_eq!(position_value(2 * j), position_value(2 * j + 1));
        }
    }

    #[test]
    fn delta_state_norm_is_amplitude_modulus() {
        let s = WalkerState::delta(2, Spin::Down, Complex64::new(0.0, 1.0)).unwrap();
        assert_eq!(s.amplitude(5), Complex64::new(0.0, 1.0));
        assert_eq!(s.norm(), 1.0);
        let s = WalkerState::delta(0, Spin::Up, Complex64::new(-0.25, 0.0)).unwrap();
        assert_eq!(s.norm(), 0.25);
    }

    #[test]
    fn delta_rejects_zero_amplitude() {
        assert!(WalkerState::delta(0, Spin::Up, Complex64::ZERO).is_err());
    }

    #[test]
    fn superpose_unit_norm() {
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = WalkerState::superpose(
            &[(0, Spin::Up, inv), (0, Spin::Down, inv)],
            false,
        )
        .unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn superpose_cancellation_drops_support() {
        let one = Complex64::new(1.0, 0.0);
        let s = WalkerState::superpose(&[(0, Spin::Up, one), (0, Spin::Up, -one)], false).unwrap();
        assert_eq!(s.support_len(), 0);
    }
}
