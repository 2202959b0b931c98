//! Closed sets of boundary points / permitted decisions.
//!
//! A [`MonotoneSet`] is a sorted union of disjoint closed intervals inside a
//! domain `[lo, hi]`. Read as a delegation set it lists the permitted
//! decisions; read as a monotone partition it lists the boundary points:
//! states inside a member interval are separated, states in a gap are pooled
//! with their neighbors into `[gap_lo, gap_hi)`. A set is *balanced* when it
//! contains both domain endpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GEOM_TOL: f64 = 1e-12;

/// Partition element containing a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    /// The state is separated (revealed exactly).
    Point(f64),
    /// The state is pooled over `[lo, hi)`.
    Pool { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSet {
    domain: (f64, f64),
    /// Disjoint closed intervals `[a_i, b_i]` with `a_i <= b_i < a_{i+1}`.
    intervals: Vec<(f64, f64)>,
}

impl MonotoneSet {
    /// Build from intervals; they are sorted, validated, and merged when
    /// they touch. Degenerate intervals (`a == b`) are points.
    pub fn new(domain: (f64, f64), mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        let (lo, hi) = domain;
        if !(hi > lo) {
            return Err(Error::Invalid(format!("empty domain [{lo}, {hi}]")));
        }
        if intervals.is_empty() {
            return Err(Error::Invalid("a monotone set cannot be empty".into()));
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &intervals {
            if b < a {
                return Err(Error::Invalid(format!("interval [{a}, {b}] is reversed")));
            }
            if a < lo - GEOM_TOL || b > hi + GEOM_TOL {
                return Err(Error::OutOfDomain { value: if a < lo { a } else { b }, lo, hi });
            }
        }
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            let a = a.clamp(lo, hi);
            let b = b.clamp(lo, hi);
            match merged.last_mut() {
                Some(last) if a <= last.1 + GEOM_TOL => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { domain, intervals: merged })
    }

    /// A finite set of points.
    pub fn from_points(domain: (f64, f64), points: &[f64]) -> Result<Self> {
        Self::new(domain, points.iter().map(|&p| (p, p)).collect())
    }

    /// The full interval (complete separation / full discretion).
    pub fn full(domain: (f64, f64)) -> Self {
        Self { domain, intervals: vec![domain] }
    }

    /// Just the two endpoints (a single pool / no communication).
    pub fn endpoints_only(domain: (f64, f64)) -> Self {
        Self {
            domain,
            intervals: vec![(domain.0, domain.0), (domain.1, domain.1)],
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Whether both domain endpoints belong to the set.
    pub fn is_balanced(&self) -> bool {
        let (lo, hi) = self.domain;
        self.contains(lo) && self.contains(hi)
    }

    /// Return a copy with both domain endpoints added.
    pub fn balanced(&self) -> MonotoneSet {
        let (lo, hi) = self.domain;
        let mut intervals = self.intervals.clone();
        intervals.push((lo, lo));
        intervals.push((hi, hi));
        MonotoneSet::new(self.domain, intervals).expect("endpoints are in domain")
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(a, b)| x >= a - GEOM_TOL && x <= b + GEOM_TOL)
    }

    /// Largest member `<= x`, if any.
    pub fn floor_point(&self, x: f64) -> Option<f64> {
        let mut best = None;
        for &(a, b) in &self.intervals {
            if a > x + GEOM_TOL {
                break;
            }
            best = Some(b.min(x).max(a));
        }
        best
    }

    /// Smallest member `>= x`, if any.
    pub fn ceil_point(&self, x: f64) -> Option<f64> {
        for &(a, b) in &self.intervals {
            if b >= x - GEOM_TOL {
                return Some(a.max(x).min(b));
            }
        }
        None
    }

    /// The maximal gaps `[g_lo, g_hi)` between consecutive member intervals:
    /// the pooling intervals of the induced partition. Gaps at the domain
    /// edges appear when the set is unbalanced.
    pub fn pools(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = self.domain;
        let mut pools = Vec::new();
        if self.intervals[0].0 > lo + GEOM_TOL {
            pools.push((lo, self.intervals[0].0));
        }
        for w in self.intervals.windows(2) {
            pools.push((w[0].1, w[1].0));
        }
        if self.intervals.last().unwrap().1 < hi - GEOM_TOL {
            pools.push((self.intervals.last().unwrap().1, hi));
        }
        pools
    }

    /// The partition element containing `theta`. The upper domain endpoint
    /// is separated by convention; a member point at the left edge of a gap
    /// is pooled with the gap.
    pub fn element(&self, theta: f64) -> Result<Element> {
        let (lo, hi) = self.domain;
        if theta < lo - GEOM_TOL || theta > hi + GEOM_TOL {
            return Err(Error::OutOfDomain { value: theta, lo, hi });
        }
        let theta = theta.clamp(lo, hi);
        if theta >= hi {
            return Ok(Element::Point(hi));
        }
        if self.separated(theta) {
            return Ok(Element::Point(theta));
        }
        let below = self.floor_point(theta).unwrap_or(lo);
        let above = self.strictly_above(theta).unwrap_or(hi);
        Ok(Element::Pool { lo: below, hi: above })
    }

    // theta lies in a member interval and is not the right endpoint of an
    // interval followed by a gap (such a point pools with the gap).
    fn separated(&self, theta: f64) -> bool {
        for &(a, b) in &self.intervals {
            if theta >= a - GEOM_TOL && theta <= b + GEOM_TOL {
                if (theta - b).abs() <= GEOM_TOL {
                    // adjacent intervals are merged at construction, so a
                    // right endpoint below hi always faces a gap
                    return (b - self.domain.1).abs() <= GEOM_TOL;
                }
                return true;
            }
        }
        false
    }

    // inf of members strictly greater than theta
    fn strictly_above(&self, theta: f64) -> Option<f64> {
        for &(a, b) in &self.intervals {
            if a > theta + GEOM_TOL {
                return Some(a);
            }
            if b > theta + GEOM_TOL {
                return Some(theta); // inside an interval
            }
        }
        None
    }

    /// Breakpoints of the induced decision/partition structure: interval
    /// endpoints, in order.
    pub fn knots(&self) -> Vec<f64> {
        let mut k = Vec::with_capacity(2 * self.intervals.len());
        for &(a, b) in &self.intervals {
            k.push(a);
            if b > a {
                k.push(b);
            }
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uninformative_set_pools_everything() {
        let pi = MonotoneSet::endpoints_only((0.0, 1.0));
        assert!(pi.is_balanced());
        match pi.element(0.42).unwrap() {
            Element::Pool { lo, hi } => {
                assert_eq!(lo, 0.0);
                assert_eq!(hi, 1.0);
            }
            _ => panic!("expected pool"),
        }
        // the upper endpoint is separated by convention
        assert_eq!(pi.element(1.0).unwrap(), Element::Point(1.0));
    }

    #[test]
    fn full_set_separates_everything() {
        let pi = MonotoneSet::full((0.0, 1.0));
        assert_eq!(pi.element(0.42).unwrap(), Element::Point(0.42));
        assert!(pi.pools().is_empty());
    }

    #[test]
    fn three_point_set_element_lookup() {
        let pi = MonotoneSet::from_points((0.0, 1.0), &[0.0, 1.0 / 3.0, 1.0]).unwrap();
        match pi.element(0.2).unwrap() {
            Element::Pool { lo, hi } => {
                assert!((lo - 0.0).abs() < 1e-12);
                assert!((hi - 1.0 / 3.0).abs() < 1e-12);
            }
            _ => panic!("expected pool"),
        }
        // the boundary point itself joins the pool to its right
        match pi.element(1.0 / 3.0).unwrap() {
            Element::Pool { lo, hi } => {
                assert!((lo - 1.0 / 3.0).abs() < 1e-12);
                assert!((hi - 1.0).abs() < 1e-12);
            }
            _ => panic!("expected pool"),
        }
    }

    #[test]
    fn interval_interior_is_separated() {
        let pi = MonotoneSet::new((0.0, 1.0), vec![(0.0, 0.4), (1.0, 1.0)]).unwrap();
        assert_eq!(pi.element(0.2).unwrap(), Element::Point(0.2));
        assert_eq!(pi.element(0.0).unwrap(), Element::Point(0.0));
        // right edge of the interval pools with the gap
        match pi.element(0.4).unwrap() {
            Element::Pool { lo, hi } => {
                assert_eq!(lo, 0.4);
                assert_eq!(hi, 1.0);
            }
            _ => panic!("expected pool"),
        }
    }

    #[test]
    fn pools_partition_the_complement() {
        let pi = MonotoneSet::new((0.0, 1.0), vec![(0.0, 0.2), (0.5, 0.6), (1.0, 1.0)]).unwrap();
        let pools = pi.pools();
        assert_eq!(pools, vec![(0.2, 0.5), (0.6, 1.0)]);
        let total: f64 = pools.iter().map(|(a, b)| b - a).sum();
        let member: f64 = pi.intervals().iter().map(|(a, b)| b - a).sum();
        assert!((total + member - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merging_and_balance() {
        let pi = MonotoneSet::new((0.0, 1.0), vec![(0.3, 0.5), (0.5, 0.7)]).unwrap();
        assert_eq!(pi.intervals(), &[(0.3, 0.7)]);
        assert!(!pi.is_balanced());
        let b = pi.balanced();
        assert!(b.is_balanced());
        assert_eq!(b.pools(), vec![(0.0, 0.3), (0.7, 1.0)]);
    }

    #[test]
    fn membership_matches_intervals() {
        let pi = MonotoneSet::new((0.0, 1.0), vec![(0.0, 0.25), (0.7, 0.7), (1.0, 1.0)]).unwrap();
        assert!(pi.contains(0.1));
        assert!(pi.contains(0.7));
        assert!(!pi.contains(0.5));
        assert_eq!(pi.floor_point(0.5), Some(0.25));
        assert_eq!(pi.ceil_point(0.5), Some(0.7));
    }
}
