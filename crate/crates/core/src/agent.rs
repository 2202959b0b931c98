//! Agent best responses.
//!
//! Delegation: the agent knows the state and picks the best permitted
//! decision. For linear primitives the unconstrained optimum solves
//! `c(x) = b(state)`; between two adjacent candidates the payoff difference
//! is the exact integral of the marginal, so the switch happens where
//! `b(state)` crosses the mean of `c` over the gap. No numeric search is
//! involved.
//!
//! Persuasion: the agent sees the partition element containing the state
//! and best-responds to the posterior. For linear primitives the decision
//! depends on the element only through the posterior mean of the transform
//! `c`, and solves `b(x) = m` clamped to the decision space.
//!
//! Indifference is resolved by an explicit tie-break rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::{Element, MonotoneSet};
use crate::poly::PiecewisePoly;
use crate::primitive::{Orientation, Primitive, PrimitiveKind};

/// Value-difference tolerance below which the agent is treated as
/// indifferent and the tie-break applies.
pub const TIE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Indifferent agents choose the principal's preferred decision.
    #[default]
    PrincipalPreferred,
    /// Indifferent agents choose the principal's least preferred decision.
    PrincipalWorst,
    /// Indifferent agents choose the lowest decision.
    Lowest,
}

/// The partition element of `pi` containing `theta`.
pub fn partition_element(pi: &MonotoneSet, theta: f64) -> Result<Element> {
    pi.element(theta)
}

/// Posterior mean of the weight function over the partition element
/// containing `theta`: the weight at a separated state, its exact integral
/// mean over a pooled one.
pub fn posterior_mean(pi: &MonotoneSet, theta: f64, weight: &PiecewisePoly) -> Result<f64> {
    match pi.element(theta)? {
        Element::Point(t) => Ok(weight.eval(t)),
        Element::Pool { lo, hi } => weight.mean_on(lo, hi),
    }
}

/// Best permitted decision of a fully informed agent.
pub fn best_decision_delegation(
    p: &Primitive,
    pi: &MonotoneSet,
    theta: f64,
    tb: TieBreak,
) -> Result<f64> {
    if p.orientation != Orientation::Delegation {
        return Err(Error::WrongOrientation("delegation"));
    }
    check_pi_space(p, pi)?;
    match &p.kind {
        PrimitiveKind::Linear(parts) => {
            let target = parts.b.eval(theta);
            let (sl, sr) = parts.c.solve_nondecreasing(target);
            // the plateau [sl, sr] carries the unconstrained maximum
            if let (Some(left_in), Some(right_in)) = (pi.ceil_point(sl), pi.floor_point(sr)) {
                if left_in <= right_in + 1e-12 {
                    // permitted decisions inside the plateau all tie
                    return Ok(resolve_plateau_tie(p, pi, theta, sl.max(left_in), right_in, tb));
                }
            }
            let lower = pi.floor_point(sl);
            let upper = pi.ceil_point(sr);
            match (lower, upper) {
                (Some(lo), None) => Ok(lo),
                (None, Some(hi)) => Ok(hi),
                (Some(lo), Some(hi)) => {
                    let du = slice_or_err(p.du_decision_slice(theta))?;
                    let gain = du.definite_integral(lo, hi)?;
                    if gain > TIE_TOL {
                        Ok(hi)
                    } else if gain < -TIE_TOL {
                        Ok(lo)
                    } else {
                        let dv = slice_or_err(p.dv_decision_slice(theta))?;
                        let vgain = dv.definite_integral(lo, hi)?;
                        Ok(apply_pair_tiebreak(lo, hi, vgain, tb))
                    }
                }
                (None, None) => Err(Error::Invalid("empty delegation set".into())),
            }
        }
        PrimitiveKind::Custom { .. } => {
            let du = slice_or_err(p.du_decision_slice(theta))?;
            let dv = slice_or_err(p.dv_decision_slice(theta))?;
            let objective = du.antiderivative();
            let principal = dv.antiderivative();
            Ok(constrained_argmax(&objective, &principal, pi.intervals(), tb))
        }
        PrimitiveKind::Tabulated { du, dv } => {
            let slice_u = du.decision_slice(theta).antiderivative();
            let slice_v = dv.decision_slice(theta).antiderivative();
            Ok(golden_argmax_over_set(&slice_u, &slice_v, pi, tb))
        }
    }
}

/// Best decision of an agent who observes the partition element containing
/// `theta` and best-responds to the posterior.
pub fn best_decision_persuasion(
    p: &Primitive,
    pi: &MonotoneSet,
    theta: f64,
    tb: TieBreak,
) -> Result<f64> {
    if p.orientation != Orientation::Persuasion {
        return Err(Error::WrongOrientation("persuasion"));
    }
    check_pi_space(p, pi)?;
    let element = pi.element(theta)?;
    best_decision_for_element(p, element, tb)
}

/// Best response to a partition element directly (the decision depends on
/// the state only through its element).
pub fn best_decision_for_element(p: &Primitive, element: Element, tb: TieBreak) -> Result<f64> {
    if p.orientation != Orientation::Persuasion {
        return Err(Error::WrongOrientation("persuasion"));
    }
    let (dlo, dhi) = p.decision_space();
    let (du, dv) = match element {
        Element::Point(t) => (p.du_decision_slice(t), p.dv_decision_slice(t)),
        Element::Pool { lo, hi } => (p.du_pooled_slice(lo, hi), p.dv_pooled_slice(lo, hi)),
    };
    match (&p.kind, du, dv) {
        (PrimitiveKind::Linear(parts), Some(du), Some(dv)) => {
            // du(x) = m - b(x): the optimum solves b(x) = m, clamped
            let m = du.eval(dlo) + parts.b.eval(dlo);
            let (xl, xr) = parts.b.solve_nondecreasing(m);
            if xr - xl <= 1e-12 {
                Ok(xl)
            } else {
                let principal = dv.antiderivative();
                Ok(resolve_interval_tie(&principal, xl, xr, tb))
            }
        }
        (_, Some(du), Some(dv)) => {
            let objective = du.antiderivative();
            let principal = dv.antiderivative();
            Ok(constrained_argmax(&objective, &principal, &[(dlo, dhi)], tb))
        }
        (PrimitiveKind::Tabulated { du, dv }, _, _) => {
            let (slice_u, slice_v) = match element {
                Element::Point(t) => (du.decision_slice(t), dv.decision_slice(t)),
                Element::Pool { lo, hi } => (du.pooled_decision_slice(lo, hi), dv.pooled_decision_slice(lo, hi)),
            };
            let obj_u = slice_u.antiderivative();
            let obj_v = slice_v.antiderivative();
            let full = MonotoneSet::full((dlo, dhi));
            Ok(golden_argmax_over_set(&obj_u, &obj_v, &full, tb))
        }
        _ => unreachable!("non-tabulated primitives always produce slices"),
    }
}

fn check_pi_space(p: &Primitive, pi: &MonotoneSet) -> Result<()> {
    let (lo, hi) = p.pi_space();
    let d = pi.domain();
    if (d.0 - lo).abs() > 1e-9 || (d.1 - hi).abs() > 1e-9 {
        return Err(Error::DomainMismatch(format!(
            "set domain [{}, {}] does not match the problem space [{lo}, {hi}]",
            d.0, d.1
        )));
    }
    Ok(())
}

fn slice_or_err(s: Option<PiecewisePoly>) -> Result<PiecewisePoly> {
    s.ok_or_else(|| Error::Invalid("marginal slice unavailable".into()))
}

// All permitted decisions in [lo, hi] are exact maximizers; pick per rule.
fn resolve_plateau_tie(
    p: &Primitive,
    pi: &MonotoneSet,
    theta: f64,
    lo: f64,
    hi: f64,
    tb: TieBreak,
) -> f64 {
    if hi - lo <= 1e-12 {
        return lo;
    }
    let dv = p
        .dv_decision_slice(theta)
        .expect("plateau ties only arise for polynomial kinds");
    let principal = dv.antiderivative();
    // candidates: permitted subintervals of the plateau
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in pi.intervals() {
        let s = a.max(lo);
        let e = b.min(hi);
        if e >= s {
            pieces.push((s, e));
        }
    }
    match tb {
        TieBreak::Lowest => pieces[0].0,
        TieBreak::PrincipalPreferred => {
            let mut best = (f64::NEG_INFINITY, pieces[0].0);
            for (a, b) in pieces {
                let (v, w) = principal.argmax_on(a, b, 0.0);
                if v > best.0 + 1e-13 {
                    best = (v, w[0]);
                }
            }
            best.1
        }
        TieBreak::PrincipalWorst => {
            let mut best = (f64::INFINITY, pieces[0].0);
            for (a, b) in pieces {
                let (v, w) = principal.min_on(a, b);
                if v < best.0 - 1e-13 {
                    best = (v, w);
                }
            }
            best.1
        }
    }
}

fn resolve_interval_tie(principal: &PiecewisePoly, xl: f64, xr: f64, tb: TieBreak) -> f64 {
    match tb {
        TieBreak::Lowest => xl,
        TieBreak::PrincipalPreferred => {
            let (_, w) = principal.argmax_on(xl, xr, 0.0);
            w[0]
        }
        TieBreak::PrincipalWorst => principal.min_on(xl, xr).1,
    }
}

fn apply_pair_tiebreak(lo: f64, hi: f64, principal_gain: f64, tb: TieBreak) -> f64 {
    match tb {
        TieBreak::Lowest => lo,
        TieBreak::PrincipalPreferred => {
            if principal_gain > 1e-13 {
                hi
            } else {
                lo
            }
        }
        TieBreak::PrincipalWorst => {
            if principal_gain < -1e-13 {
                hi
            } else {
                lo
            }
        }
    }
}

/// Exact argmax of a piecewise-polynomial objective over a union of closed
/// intervals, with ties (within [`TIE_TOL`]) resolved against a second
/// piecewise-polynomial objective.
pub(crate) fn constrained_argmax(
    objective: &PiecewisePoly,
    principal: &PiecewisePoly,
    intervals: &[(f64, f64)],
    tb: TieBreak,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for &(a, b) in intervals {
        let (v, _) = if b > a {
            objective.argmax_on(a, b, TIE_TOL)
        } else {
            (objective.eval(a), vec![a])
        };
        best = best.max(v);
    }
    // candidate points achieving the max, including the boundaries of the
    // tie region and the principal's own critical points inside it
    let mut candidates: Vec<f64> = Vec::new();
    let level = objective.add_scalar(-(best - TIE_TOL));
    for &(a, b) in intervals {
        candidates.push(a);
        candidates.push(b);
        if b > a {
            for bp in objective.breakpoints().iter().chain(principal.breakpoints().iter()) {
                if *bp > a && *bp < b {
                    candidates.push(*bp);
                }
            }
            candidates.extend(objective.critical_points(a, b));
            candidates.extend(principal.critical_points(a, b));
            candidates.extend(level.sign_change_roots(a, b));
        }
    }
    candidates.retain(|&x| {
        intervals.iter().any(|&(a, b)| x >= a - 1e-12 && x <= b + 1e-12)
            && objective.eval(x.clamp(objective.lo(), objective.hi())) >= best - TIE_TOL
    });
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    match tb {
        TieBreak::Lowest => candidates[0],
        TieBreak::PrincipalPreferred => {
            let mut bx = candidates[0];
            let mut bv = f64::NEG_INFINITY;
            for &x in &candidates {
                let v = principal.eval(x);
                if v > bv + 1e-13 {
                    bv = v;
                    bx = x;
                }
            }
            bx
        }
        TieBreak::PrincipalWorst => {
            let mut bx = candidates[0];
            let mut bv = f64::INFINITY;
            for &x in &candidates {
                let v = principal.eval(x);
                if v < bv - 1e-13 {
                    bv = v;
                    bx = x;
                }
            }
            bx
        }
    }
}

// Golden-section search per permitted interval (tabulated primitives), with
// endpoints always compared explicitly.
fn golden_argmax_over_set(
    objective: &PiecewisePoly,
    principal: &PiecewisePoly,
    pi: &MonotoneSet,
    tb: TieBreak,
) -> f64 {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let mut cands: Vec<f64> = Vec::new();
    for &(a, b) in pi.intervals() {
        cands.push(a);
        cands.push(b);
        if b - a > 1e-12 {
            let (mut lo, mut hi) = (a, b);
            let mut x1 = hi - PHI * (hi - lo);
            let mut x2 = lo + PHI * (hi - lo);
            let mut f1 = objective.eval(x1);
            let mut f2 = objective.eval(x2);
            while hi - lo > 1e-10 {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + PHI * (hi - lo);
                    f2 = objective.eval(x2);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - PHI * (hi - lo);
                    f1 = objective.eval(x1);
                }
            }
            cands.push(0.5 * (lo + hi));
        }
    }
    let best = cands
        .iter()
        .map(|&x| objective.eval(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<f64> = cands
        .into_iter()
        .filter(|&x| objective.eval(x) >= best - 1e-9)
        .collect();
    match tb {
        TieBreak::Lowest => tied.iter().copied().fold(f64::INFINITY, f64::min),
        TieBreak::PrincipalPreferred => {
            let mut bx = tied[0];
            let mut bv = f64::NEG_INFINITY;
            for &x in &tied {
                let v = principal.eval(x);
                if v > bv {
                    bv = v;
                    bx = x;
                }
            }
            bx
        }
        TieBreak::PrincipalWorst => {
            let mut bx = tied[0];
            let mut bv = f64::INFINITY;
            for &x in &tied {
                let v = principal.eval(x);
                if v < bv {
                    bv = v;
                    bx = x;
                }
            }
            bx
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitive::make_linear_primitive;

    fn unbiased() -> Primitive {
        make_linear_primitive(
            PiecewisePoly::identity(0.0, 1.0),
            PiecewisePoly::identity(0.0, 1.0),
            PiecewisePoly::identity(0.0, 1.0),
            Orientation::Delegation,
        )
        .unwrap()
    }

    fn unbiased_persuasion() -> Primitive {
        make_linear_primitive(
            PiecewisePoly::identity(0.0, 1.0),
            PiecewisePoly::identity(0.0, 1.0),
            PiecewisePoly::identity(0.0, 1.0),
            Orientation::Persuasion,
        )
        .unwrap()
    }

    #[test]
    fn posterior_means_of_two_cell_partition() {
        let pi = MonotoneSet::from_points((0.0, 1.0), &[0.0, 1.0 / 3.0, 1.0]).unwrap();
        let c = PiecewisePoly::identity(0.0, 1.0);
        let m1 = posterior_mean(&pi, 0.2, &c).unwrap();
        assert!((m1 - 1.0 / 6.0).abs() < 1e-12);
        let m2 = posterior_mean(&pi, 0.5, &c).unwrap();
        assert!((m2 - 2.0 / 3.0).abs() < 1e-12);
        // full separation: the weight itself
        let full = MonotoneSet::full((0.0, 1.0));
        assert!((posterior_mean(&full, 0.42, &c).unwrap() - 0.42).abs() < 1e-12);
    }

    #[test]
    fn two_point_delegation_switches_at_the_midpoint() {
        let p = unbiased();
        let pi = MonotoneSet::from_points((0.0, 1.0), &[1.0 / 6.0, 2.0 / 3.0]).unwrap();
        let tb = TieBreak::PrincipalPreferred;
        let x = best_decision_delegation(&p, &pi, 0.3, tb).unwrap();
        assert!((x - 1.0 / 6.0).abs() < 1e-12);
        let x = best_decision_delegation(&p, &pi, 0.5, tb).unwrap();
        assert!((x - 2.0 / 3.0).abs() < 1e-12);
        // just below and above the switch point 5/12
        let x = best_decision_delegation(&p, &pi, 5.0 / 12.0 - 1e-6, tb).unwrap();
        assert!((x - 1.0 / 6.0).abs() < 1e-12);
        let x = best_decision_delegation(&p, &pi, 5.0 / 12.0 + 1e-6, tb).unwrap();
        assert!((x - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn full_discretion_tracks_the_state() {
        let p = unbiased();
        let pi = MonotoneSet::full((0.0, 1.0));
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let x = best_decision_delegation(&p, &pi, t, TieBreak::Lowest).unwrap();
            assert!((x - t).abs() < 1e-10);
        }
    }

    #[test]
    fn persuasion_decision_is_the_posterior_mean_when_unbiased() {
        let p = unbiased_persuasion();
        let pi = MonotoneSet::from_points((0.0, 1.0), &[0.0, 1.0 / 3.0, 1.0]).unwrap();
        let x = best_decision_persuasion(&p, &pi, 0.2, TieBreak::PrincipalPreferred).unwrap();
        assert!((x - 1.0 / 6.0).abs() < 1e-10);
        let x = best_decision_persuasion(&p, &pi, 0.8, TieBreak::PrincipalPreferred).unwrap();
        assert!((x - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn regulation_persuasion_best_response_clamps() {
        // dU_P/dx = 2s - 1 - b(x) with b(x) = 1 + x: optimum solves
        // x = 2m - 1, clamped to 0 for m <= 1/2
        let b = PiecewisePoly::affine(0.0, 1.0, 1.0, 1.0);
        let c = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let d = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let p = Primitive::linear(b, c, d, Orientation::Persuasion, None).unwrap();
        let pi = MonotoneSet::endpoints_only((0.0, 1.0));
        // single pool: posterior mean state 0.5, so m = c-mean = 1.0 and
        // b(x) = 1 gives x = 0
        let x = best_decision_persuasion(&p, &pi, 0.4, TieBreak::PrincipalPreferred).unwrap();
        assert!(x.abs() < 1e-10);
        let full = MonotoneSet::full((0.0, 1.0));
        // separated state s: m = 2s, x = 2s - 1 clamped
        let x = best_decision_persuasion(&p, &full, 0.8, TieBreak::PrincipalPreferred).unwrap();
        assert!((x - 0.6).abs() < 1e-10);
        let x = best_decision_persuasion(&p, &full, 0.3, TieBreak::PrincipalPreferred).unwrap();
        assert!(x.abs() < 1e-10);
    }

    #[test]
    fn delegation_comparative_statics_monotone_in_state() {
        let p = make_linear_primitive(
            PiecewisePoly::identity(0.0, 1.0),
            PiecewisePoly::identity(0.0, 1.0),
            PiecewisePoly::affine(0.0, 1.0, 0.1, 1.0),
            Orientation::Delegation,
        )
        .unwrap();
        let pi = MonotoneSet::new((0.0, 1.0), vec![(0.0, 0.2), (0.55, 0.55), (0.9, 1.0)]).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let x = best_decision_delegation(&p, &pi, t, TieBreak::Lowest).unwrap();
            assert!(x >= prev - 1e-12, "decision dropped at state {t}");
            prev = x;
        }
    }

    #[test]
    fn projection_law_for_linear_delegation() {
        let p = unbiased();
        let pi = MonotoneSet::new((0.0, 1.0), vec![(0.0, 0.1), (0.44, 0.44), (0.8, 1.0)]).unwrap();
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            let x = best_decision_delegation(&p, &pi, t, TieBreak::Lowest).unwrap();
            let dist = (t - x).abs();
            for &probe in &[0.0, 0.05, 0.1, 0.44, 0.8, 0.9, 1.0] {
                assert!(dist <= (t - probe).abs() + 1e-9, "state {t}: {x} vs {probe}");
            }
        }
    }
}
