//! Sparse time evolution, site probability distributions, absolute-position
//! moments, velocity series, and peak detection.
//!
//! The position observable is the absolute site, `X δ_i = |site(i)| δ_i`,
//! so moments and velocities measure spread away from the origin rather
//! than drift. Velocity after `N` steps is `⟨X⟩/N`; it can never exceed
//! one site per step.

use std::collections::BTreeMap;

use crate::bandop::PeriodicBandedOperator;
use crate::lattice::{site_of, spin_of, Spin, WalkerState};
use crate::{Result, WalkError};

/// Largest admissible deviation of `‖ψ‖` from one when reading
/// probabilities off a state.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Spin-resolved probability mass at one site.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SiteProbability {
    pub up: f64,
    pub down: f64,
}

impl SiteProbability {
    pub fn total(&self) -> f64 {
        self.up + self.down
    }
}

/// Probability distribution over sites, split by spin.
#[derive(Debug, Clone, Default)]
pub struct SiteDistribution {
    sites: BTreeMap<i64, SiteProbability>,
}

impl SiteDistribution {
    /// Sites in increasing order with their probabilities.
    pub fn iter(&self) -> impl Iterator<Item = (i64, SiteProbability)> + '_ {
        self.sites.iter().map(|(&s, &p)| (s, p))
    }

    pub fn get(&self, site: i64) -> SiteProbability {
        self.sites.get(&site).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.sites.values().map(SiteProbability::total).sum()
    }

    /// The same distribution with every site moved by `offset`.
    pub fn shifted(&self, offset: i64) -> Self {
        Self {
            sites: self
                .sites
                .iter()
                .map(|(&s, &p)| (s + offset, p))
                .collect(),
        }
    }

    /// Largest absolute probability difference against another
    /// distribution, over the union of supports.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&s, p) in &self.sites {
            let q = other.get(s);
            worst = worst
                .max((p.up - q.up).abs())
                .max((p.down - q.down).abs());
        }
        for (&s, q) in &other.sites {
            let p = self.get(s);
            worst = worst
                .max((p.up - q.up).abs())
                .max((p.down - q.down).abs());
        }
        worst
    }
}

/// One entry of a velocity series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityPoint {
    pub steps: usize,
    pub mean_abs_position: f64,
    /// `mean_abs_position / steps`.
    pub velocity: f64,
}

/// Apply `step` to `ψ` a total of `n_steps` times.
pub fn evolve(
    psi: &WalkerState,
    step: &PeriodicBandedOperator,
    n_steps: usize,
) -> WalkerState {
    let mut state = psi.clone();
    for _ in 0..n_steps {
        state = step.apply(&state);
    }
    state
}

/// Per-site squared moduli of a normalized state, split by spin.
pub fn site_distribution(psi: &WalkerState) -> Result<SiteDistribution> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(WalkError::NotNormalized { norm });
    }
    let mut sites: BTreeMap<i64, SiteProbability> = BTreeMap::new();
    for (i, amp) in psi.iter() {
        let p = amp.norm_sqr();
        let slot = sites.entry(site_of(i)).or_default();
        match spin_of(i) {
            Spin::Up => slot.up += p,
            Spin::Down => slot.down += p,
        }
    }
    Ok(SiteDistribution { sites })
}

/// `⟨X^p⟩ = Σ_sites |site|^p · prob_total(site)`.
pub fn moment(dist: &SiteDistribution, p: u32) -> f64 {
    dist.iter()
        .map(|(site, prob)| (site.abs() as f64).powi(p as i32) * prob.total())
        .sum()
}

/// Mean absolute position `⟨X⟩`.
pub fn mean_abs_position(dist: &SiteDistribution) -> f64 {
    moment(dist, 1)
}

/// `⟨X⟩/N` for `N = 1..=n_max` under repeated application of `step`.
pub fn velocity_series(
    step: &PeriodicBandedOperator,
    initial: &WalkerState,
    n_max: usize,
) -> Result<Vec<VelocityPoint>> {
    let mut out = Vec::with_capacity(n_max);
    let mut state = initial.clone();
    for n in 1..=n_max {
        state = step.apply(&state);
        let mean = mean_abs_position(&site_distribution(&state)?);
        out.push(VelocityPoint {
            steps: n,
            mean_abs_position: mean,
            velocity: mean / n as f64,
        });
    }
    Ok(out)
}

/// Site with the largest total probability. Ties go to the larger
/// absolute site, then to the positive one. Empty distributions have no
/// peak.
pub fn peak_site(dist: &SiteDistribution) -> Option<i64> {
    let mut best: Option<(i64, f64)> = None;
    for (site, prob) in dist.iter() {
        let p = prob.total();
        let better = match best {
            None => true,
            Some((bs, bp)) => {
                p > bp
                    || (p == bp
                        && (site.abs() > bs.abs() || (site.abs() == bs.abs() && site > bs)))
            }
        };
        if better {
            best = Some((site, p));
        }
    }
    best.map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::index_of;
    use crate::model::{build_step, WalkParams};
    use num_complex::Complex64;

    fn origin_up() -> WalkerState {
        WalkerState::delta(0, Spin::Up, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn zero_steps_is_identity() {
        let params = WalkParams::new(0.3, 2, 1).unwrap();
        let step = build_step(&params).unwrap();
        let psi = origin_up();
        let out = evolve(&psi, &step, 0);
        assert_eq!(out.support_len(), 1);
        assert!((out.amplitude(0) - psi.amplitude(0)).norm() < 1e-15);
    }

    #[test]
    fn full_transmission_is_ballistic() {
        let params = WalkParams::new(1.0, 3, 1).unwrap();
        let step = build_step(&params).unwrap();
        let out = evolve(&origin_up(), &step, 7);
        assert_eq!(out.support_len(), 1);
        let amp = out.amplitude(index_of(7, Spin::Up));
        assert!((amp.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn support_stays_within_light_cone() {
        let params = WalkParams::new(0.7, 3, 1).unwrap();
        let step = build_step(&params).unwrap();
        let mut state = origin_up();
        for n in 1..=25usize {
            state = step.apply(&state);
            let (lo, hi) = state.support_bounds().unwrap();
            assert!(lo >= -2 * n as i64 && hi <= 2 * n as i64);
        }
    }

    #[test]
    fn one_step_distribution_fieldless() {
        let params = WalkParams::new(0.5, 1, 1).unwrap();
        let step = build_step(&params).unwrap();
        let out = evolve(&origin_up(), &step, 1);
        let dist = site_distribution(&out).unwrap();
        assert!((dist.get(-1).total() - 0.1875).abs() < 1e-15);
        assert!((dist.get(0).total() - 0.75).abs() < 1e-15);
        assert!((dist.get(1).total() - 0.0625).abs() < 1e-15);
        assert!((dist.total_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn distribution_rejects_unnormalized() {
        let psi = WalkerState::delta(0, Spin::Up, Complex64::new(0.5, 0.0)).unwrap();
        match site_distribution(&psi) {
            Err(WalkError::NotNormalized { norm }) => assert!((norm - 0.5).abs() < 1e-15),
            other => panic!("expected normalization error, got {other:?}"),
        }
    }

    #[test]
    fn delta_moments_vanish_at_origin() {
        let dist = site_distribution(&origin_up()).unwrap();
        for p in 1..=4 {
            assert_eq!(moment(&dist, p), 0.0);
        }
    }

    #[test]
    fn ballistic_moments_are_powers_of_n() {
        let params = WalkParams::new(1.0, 2, 1).unwrap();
        let step = build_step(&params).unwrap();
        let out = evolve(&origin_up(), &step, 9);
        let dist = site_distribution(&out).unwrap();
        for p in 1..=3u32 {
            assert!((moment(&dist, p) - 9f64.powi(p as i32)).abs() < 1e-10);
        }
    }

    #[test]
    fn velocities_at_extreme_transmission() {
        let zero = WalkParams::new(0.0, 3, 1).unwrap();
        let step0 = build_step(&zero).unwrap();
        for pt in velocity_series(&step0, &origin_up(), 10).unwrap() {
            assert_eq!(pt.velocity, 0.0);
        }
        let one = WalkParams::new(1.0, 1, 1).unwrap();
        let step1 = build_step(&one).unwrap();
        for pt in velocity_series(&step1, &origin_up(), 10).unwrap() {
            assert!((pt.velocity - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn slow_walk_velocity_stays_under_transmission() {
        let params = WalkParams::new(0.2, 1, 1).unwrap();
        let step = build_step(&params).unwrap();
        let series = velocity_series(&step, &origin_up(), 100).unwrap();
        for pt in &series {
            assert!(pt.velocity <= 0.2 + 1e-10, "N = {}: {}", pt.steps, pt.velocity);
        }
    }

    #[test]
    fn peak_prefers_far_then_positive() {
        let mut sites = BTreeMap::new();
        sites.insert(0, SiteProbability { up: 0.2, down: 0.0 });
        sites.insert(-3, SiteProbability { up: 0.0, down: 0.4 });
        sites.insert(3, SiteProbability { up: 0.4, down: 0.0 });
        let dist = SiteDistribution { sites };
        assert_eq!(peak_site(&dist), Some(3));

        let mut sites = BTreeMap::new();
        sites.insert(-5, SiteProbability { up: 0.5, down: 0.0 });
        sites.insert(2, SiteProbability { up: 0.5, down: 0.0 });
        let dist = SiteDistribution { sites };
        assert_eq!(peak_site(&dist), Some(-5));

        assert_eq!(peak_site(&SiteDistribution::default()), None);
    }

    #[test]
    fn delta_state_peaks_at_its_site() {
        let psi = WalkerState::delta(-4, Spin::Down, Complex64::new(1.0, 0.0)).unwrap();
        let dist = site_distribution(&psi).unwrap();
        assert_eq!(peak_site(&dist), Some(-4));
    }
}
