//! Constructors for the walk operators: coin, shift, one-step walk, the
//! periodic diagonal field, the shift decomposition pieces `B` and `C`,
//! their conjugates under the field, the driven step, and the n-step block.
//!
//! Conventions (doubled indices): the coin acts in 2x2 blocks on the pairs
//! `(2j, 2j+1)`, the shift on the pairs `(2j-1, 2j)`. The one-step walk is
//! `U_t = V_t W_t` (coin first), which is five-diagonal. The field is the
//! diagonal `D_n δ_i = α^i δ_i` with `α = exp(2πik/n)`, `gcd(k, n) = 1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_integer::Integer;

use crate::bandop::PeriodicBandedOperator;
use crate::{Result, WalkError};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Parameters of the driven walk.
#[derive(Debug, Clone, Copy)]
pub struct WalkParams {
    /// Transmission parameter in `[0, 1]`.
    pub t: f64,
    /// Reflection parameter `r = sqrt(1 - t^2)`.
    pub r: f64,
    /// Field period (sites and doubled indices alike; the field repeats
    /// with period `n` in the doubled index).
    pub n: usize,
    /// Root selector, coprime to `n`.
    pub k: usize,
    /// Primitive phase `exp(2πik/n)`.
    pub alpha: Complex64,
}

impl WalkParams {
    pub fn new(t: f64, n: usize, k: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(WalkError::InvalidParameter(format!(
                "transmission parameter t = {t} outside [0, 1]"
            )));
        }
        if n < 1 {
            return Err(WalkError::InvalidParameter("period n must be >= 1".into()));
        }
        if k < 1 || k >= n.max(2) {
            return Err(WalkError::InvalidParameter(format!(
                "root selector k = {k} outside [1, {})",
                n.max(2)
            )));
        }
        if k.gcd(&n) != 1 {
            return Err(WalkError::InvalidParameter(format!(
                "root selector k = {k} not coprime to n = {n}"
            )));
        }
        let r = (1.0 - t * t).sqrt();
        let alpha = root_of_unity(n, k, 1);
        Ok(Self { t, r, n, k, alpha })
    }

    /// `α^e`, reduced mod `n` before evaluation so powers stay exact
    /// under the periodicity `α^n = 1`.
    pub fn alpha_pow(&self, e: i64) -> Complex64 {
        root_of_unity(self.n, self.k, e)
    }
}

/// `exp(2πi k e / n)` evaluated at the reduced angle.
fn root_of_unity(n: usize, k: usize, e: i64) -> Complex64 {
    let n_i = n as i64;
    let ke = (k as i64 % n_i) * (e.rem_euclid(n_i)) % n_i;
    let angle = 2.0 * std::f64::consts::PI * ke as f64 / n as f64;
    Complex64::new(angle.cos(), angle.sin())
}

fn check_t(t: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&t) {
        Ok((1.0 - t * t).sqrt())
    } else {
        Err(WalkError::InvalidParameter(format!(
            "transmission parameter t = {t} outside [0, 1]"
        )))
    }
}

/// Coin `W_t`: 2x2 blocks `[[r, t], [-t, r]]` on the pairs `(2j, 2j+1)`.
pub fn build_coin(t: f64) -> Result<PeriodicBandedOperator> {
    let r = check_t(t)?;
    let mut coeffs = BTreeMap::new();
    coeffs.insert(0, vec![Complex64::new(r, 0.0), Complex64::new(r, 0.0)]);
    coeffs.insert(1, vec![Complex64::new(-t, 0.0), Complex64::ZERO]);
    coeffs.insert(-1, vec![Complex64::ZERO, Complex64::new(t, 0.0)]);
    PeriodicBandedOperator::build(2, coeffs)
}

/// Shift `V_t`: the same 2x2 blocks, offset to the pairs `(2j-1, 2j)`.
pub fn build_shift(t: f64) -> Result<PeriodicBandedOperator> {
    let r = check_t(t)?;
    let mut coeffs = BTreeMap::new();
    coeffs.insert(0, vec![Complex64::new(r, 0.0), Complex64::new(r, 0.0)]);
    coeffs.insert(1, vec![Complex64::ZERO, Complex64::new(-t, 0.0)]);
    coeffs.insert(-1, vec![Complex64::new(t, 0.0), Complex64::ZERO]);
    PeriodicBandedOperator::build(2, coeffs)
}

/// One-step walk `U_t = V_t W_t`, the five-diagonal unitary.
pub fn build_walk(t: f64) -> Result<PeriodicBandedOperator> {
    Ok(build_shift(t)?.compose(&build_coin(t)?))
}

/// Periodic diagonal field `D_n δ_i = α^i δ_i` with `α = exp(2πik/n)`.
/// `n = 1` gives the identity (no field).
pub fn build_field(n: usize, k: usize) -> Result<PeriodicBandedOperator> {
    let params = WalkParams::new(0.0, n, k)?;
    let values = (0..n as i64).map(|i| params.alpha_pow(i)).collect();
    Ok(PeriodicBandedOperator::diagonal(values))
}

/// `B = T_{-1} - T_{+1}` on the doubled lattice: antisymmetric sum of the
/// two unit shifts.
pub fn build_b() -> PeriodicBandedOperator {
    PeriodicBandedOperator::linear_combine(&[
        (ONE, &PeriodicBandedOperator::shift(-1)),
        (-ONE, &PeriodicBandedOperator::shift(1)),
    ])
}

/// `C`: the pure conditional shift, `δ_{2j} ↦ δ_{2j+2}` (spin up moves
/// right) and `δ_{2j+1} ↦ δ_{2j-1}` (spin down moves left).
pub fn build_c() -> PeriodicBandedOperator {
    let mut coeffs = BTreeMap::new();
    coeffs.insert(2, vec![ONE, Complex64::ZERO]);
    coeffs.insert(-2, vec![Complex64::ZERO, ONE]);
    PeriodicBandedOperator::build(2, coeffs).expect("static table")
}

/// Which building block to conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    B,
    C,
    Walk,
}

/// Conjugate `A^{(j)} = D_n^j A D_n^{-j}` of a building block.
///
/// Built twice: from the closed form (phase-twisted shifts) and by explicit
/// conjugation with the field. Disagreement beyond 1e-13 is reported as an
/// error; it cannot be triggered by input, only by an implementation bug.
pub fn conjugated(block: Block, j: i64, params: &WalkParams) -> Result<PeriodicBandedOperator> {
    let closed = conjugated_closed_form(block, j, params)?;
    let explicit = conjugated_explicit(block, j, params)?;
    let dev = closed.max_entry_diff(&explicit);
    if dev > 1e-13 {
        return Err(WalkError::ConstructionMismatch {
            what: "conjugated block: closed form vs explicit conjugation",
            max_dev: dev,
        });
    }
    Ok(closed)
}

fn conjugated_closed_form(
    block: Block,
    j: i64,
    params: &WalkParams,
) -> Result<PeriodicBandedOperator> {
    match block {
        // B^{(j)} = α^{-j} T_{-1} - α^{j} T_{+1}
        Block::B => Ok(PeriodicBandedOperator::linear_combine(&[
            (params.alpha_pow(-j), &PeriodicBandedOperator::shift(-1)),
            (-params.alpha_pow(j), &PeriodicBandedOperator::shift(1)),
        ])),
        // C^{(j)}: the up-moving part picks up α^{2j}, the down-moving α^{-2j}
        Block::C => {
            let mut coeffs = BTreeMap::new();
            coeffs.insert(2, vec![params.alpha_pow(2 * j), Complex64::ZERO]);
            coeffs.insert(-2, vec![Complex64::ZERO, params.alpha_pow(-2 * j)]);
            PeriodicBandedOperator::build(2, coeffs)
        }
        // U^{(j)} = r² I + rt B^{(j)} + t² C^{(j)}
        Block::Walk => {
            let b = conjugated_closed_form(Block::B, j, params)?;
            let c = conjugated_closed_form(Block::C, j, params)?;
            let r2 = Complex64::new(params.r * params.r, 0.0);
            let rt = Complex64::new(params.r * params.t, 0.0);
            let t2 = Complex64::new(params.t * params.t, 0.0);
            Ok(PeriodicBandedOperator::linear_combine(&[
                (r2, &PeriodicBandedOperator::identity()),
                (rt, &b),
                (t2, &c),
            ]))
        }
    }
}

fn conjugated_explicit(
    block: Block,
    j: i64,
    params: &WalkParams,
) -> Result<PeriodicBandedOperator> {
    let base = match block {
        Block::B => build_b(),
        Block::C => build_c(),
        Block::Walk => build_walk(params.t)?,
    };
    let d = build_field(params.n, params.k)?;
    let dj = d.pow(j.rem_euclid(params.n as i64) as u32);
    Ok(dj.compose(&base).compose(&dj.adjoint()))
}

/// Driven one-step walk `U_{t,n} = D_n U_t`.
pub fn build_step(params: &WalkParams) -> Result<PeriodicBandedOperator> {
    let d = build_field(params.n, params.k)?;
    Ok(d.compose(&build_walk(params.t)?))
}

/// The n-step block `P = U^{(0)} U^{(1)} ... U^{(n-1)}` (leftmost factor
/// applied last), together with a check of the intertwining relation
/// `U_{t,n}^n = D_n · P · D_n^{n-1}` that ties the block to the physical
/// n-step evolution. Failure of the check is an implementation bug.
pub fn build_block(params: &WalkParams) -> Result<PeriodicBandedOperator> {
    let n = params.n;
    let mut acc = conjugated(Block::Walk, n as i64 - 1, params)?;
    for j in (0..n.saturating_sub(1)).rev() {
        acc = conjugated(Block::Walk, j as i64, params)?.compose(&acc);
    }

    let step = build_step(params)?;
    let d = build_field(params.n, params.k)?;
    let lhs = step.pow(n as u32);
    let rhs = d.compose(&acc).compose(&d.pow(n as u32 - 1));
    let dev = lhs.max_entry_diff(&rhs);
    if dev > 1e-12 {
        return Err(WalkError::ConstructionMismatch {
            what: "n-step block vs intertwined power of the driven step",
            max_dev: dev,
        });
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_validate() {
        assert!(WalkParams::new(-0.1, 1, 1).is_err());
        assert!(WalkParams::new(1.1, 1, 1).is_err());
        assert!(WalkParams::new(0.5, 4, 2).is_err()); // gcd 2
        assert!(WalkParams::new(0.5, 4, 0).is_err());
        assert!(WalkParams::new(0.5, 4, 4).is_err());
        let p = WalkParams::new(0.5, 4, 3).unwrap();
        assert!((p.r * p.r + p.t * p.t - 1.0).abs() < 1e-15);
        assert!((p.alpha_pow(4) - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn n1_is_fieldless() {
        let d = build_field(1, 1).unwrap();
        assert_eq!(d.max_entry_diff(&PeriodicBandedOperator::identity()), 0.0);
    }

    #[test]
    fn field_examples() {
        let d2 = build_field(2, 1).unwrap();
        assert!((d2.entry(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((d2.entry(1, 1) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((d2.entry(-1, -1) - c(-1.0, 0.0)).norm() < 1e-15);
        let d4 = build_field(4, 1).unwrap();
        assert!((d4.entry(2, 2) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(build_field(4, 2).is_err());
    }

    #[test]
    fn coin_and_shift_actions() {
        let t = 0.6;
        let r = 0.8;
        let w = build_coin(t).unwrap();
        // W: up at site j -> r up - t down
        assert!((w.entry(0, 0) - c(r, 0.0)).norm() < 1e-15);
        assert!((w.entry(1, 0) - c(-t, 0.0)).norm() < 1e-15);
        assert!((w.entry(0, 1) - c(t, 0.0)).norm() < 1e-15);
        assert!((w.entry(1, 1) - c(r, 0.0)).norm() < 1e-15);
        // V: down at site j -> r down - t (up at site j+1)
        let v = build_shift(t).unwrap();
        assert!((v.entry(1, 1) - c(r, 0.0)).norm() < 1e-15);
        assert!((v.entry(2, 1) - c(-t, 0.0)).norm() < 1e-15);
        assert!((v.entry(1, 2) - c(t, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn walk_five_diagonal_entries() {
        let t = 0.6;
        let r = 0.8;
        let u = build_walk(t).unwrap();
        // column 2j: rt, r², -rt, t² at offsets -1, 0, +1, +2
        assert!((u.entry(-1, 0) - c(r * t, 0.0)).norm() < 1e-15);
        assert!((u.entry(0, 0) - c(r * r, 0.0)).norm() < 1e-15);
        assert!((u.entry(1, 0) - c(-r * t, 0.0)).norm() < 1e-15);
        assert!((u.entry(2, 0) - c(t * t, 0.0)).norm() < 1e-15);
        // column 2j+1: t², rt, r², -rt at offsets -2, -1, 0, +1
        assert!((u.entry(-1, 1) - c(t * t, 0.0)).norm() < 1e-15);
        assert!((u.entry(0, 1) - c(r * t, 0.0)).norm() < 1e-15);
        assert!((u.entry(1, 1) - c(r * r, 0.0)).norm() < 1e-15);
        assert!((u.entry(2, 1) - c(-r * t, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn walk_extremes() {
        let u0 = build_walk(0.0).unwrap();
        assert_eq!(u0.max_entry_diff(&PeriodicBandedOperator::identity()), 0.0);
        let u1 = build_walk(1.0).unwrap();
        assert!(u1.max_entry_diff(&build_c()) < 1e-15);
    }

    #[test]
    fn b_and_c_structure() {
        let b = build_b();
        assert!(b.adjoint().max_entry_diff(&b.scale(c(-1.0, 0.0))) == 0.0);
        let cc = build_c();
        let prod = cc.adjoint().compose(&cc);
        assert_eq!(prod.max_entry_diff(&PeriodicBandedOperator::identity()), 0.0);
        assert!((cc.entry(2, 0) - c(1.0, 0.0)).norm() == 0.0);
        assert!((cc.entry(-1, 1) - c(1.0, 0.0)).norm() == 0.0);
    }

    #[test]
    fn conjugated_agrees_both_ways_and_is_periodic() {
        for n in [2usize, 3, 5] {
            let params = WalkParams::new(0.7, n, 1).unwrap();
            for j in 0..n as i64 {
                for block in [Block::B, Block::C, Block::Walk] {
                    let a = conjugated(block, j, &params).unwrap();
                    let a_shift = conjugated(block, j + n as i64, &params).unwrap();
                    assert!(a.max_entry_diff(&a_shift) < 1e-13);
                }
            }
            let b0 = conjugated(Block::B, 0, &params).unwrap();
            assert!(b0.max_entry_diff(&build_b()) < 1e-15);
        }
    }

    #[test]
    fn step_is_unitary_on_grid() {
        for &t in &[0.2, 0.5, 0.8] {
            for &n in &[2usize, 3, 5] {
                let params = WalkParams::new(t, n, 1).unwrap();
                let u = build_step(&params).unwrap();
                let prod = u.adjoint().compose(&u);
                assert!(prod.max_entry_diff(&PeriodicBandedOperator::identity()) < 1e-13);
            }
        }
    }

    #[test]
    fn block_satisfies_intertwining() {
        for &(t, n) in &[(0.5, 1usize), (0.5, 2), (0.3, 3), (0.8, 4)] {
            let params = WalkParams::new(t, n, 1).unwrap();
            // build_block errors out if the intertwining check fails
            let block = build_block(&params).unwrap();
            if n == 1 {
                assert!(block.max_entry_diff(&build_walk(t).unwrap()) < 1e-15);
            }
        }
    }
}
