//! Transforms between delegation and persuasion primitives.
//!
//! The transform equates marginal payoffs and swaps the roles of states and
//! decisions: the persuasion marginal at (state s, decision x) is the
//! negated delegation marginal at (state x, decision s). With normalized
//! payoff levels the two problems then value every monotone set identically,
//! with no affine constants left over.

use serde::Serialize;

use crate::dist::QuantileDistribution;
use crate::error::{Error, Result};
use crate::poly::{poly_add, poly_eval, poly_mul, poly_scale, poly_shift, PiecewisePoly};
use crate::primitive::{Anchors, BilinearGrid, Orientation, Primitive, PrimitiveKind, SeparableField};

/// Worst-case violation of the marginal-duality identity on a grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DualityResidual {
    pub max_abs_u: f64,
    pub max_abs_v: f64,
    pub grid_size: usize,
}

/// Equivalent persuasion primitive of a delegation primitive. The state
/// distribution must already be uniform (reparameterize first otherwise).
pub fn delegation_to_persuasion(p: &Primitive) -> Result<Primitive> {
    if p.orientation != Orientation::Delegation {
        return Err(Error::WrongOrientation("delegation"));
    }
    transform(p)
}

/// Equivalent delegation primitive of a persuasion primitive.
pub fn persuasion_to_delegation(p: &Primitive) -> Result<Primitive> {
    if p.orientation != Orientation::Persuasion {
        return Err(Error::WrongOrientation("persuasion"));
    }
    transform(p)
}

fn transform(p: &Primitive) -> Result<Primitive> {
    if !uniformish(p.state_dist()) {
        return Err(Error::Invalid(
            "transform requires a uniform state; reparameterize first".into(),
        ));
    }
    let orientation = p.orientation.flipped();
    let mut out = match &p.kind {
        // the linear triple is self-dual: the flipped reading of the same
        // (b, c, d) is exactly the transformed primitive
        PrimitiveKind::Linear(parts) => Primitive::linear(
            parts.b.clone(),
            parts.c.clone(),
            parts.d.clone(),
            orientation,
            None,
        )?,
        PrimitiveKind::Custom { du, dv } => Primitive::custom(
            du.transposed_negated(),
            dv.transposed_negated(),
            orientation,
            None,
        )?,
        PrimitiveKind::Tabulated { du, dv } => Primitive::tabulated(
            du.transposed_negated(),
            dv.transposed_negated(),
            orientation,
        )?,
    };
    // anchors are functions of the original state, which becomes the
    // decision space; they do not transport across the swap
    out.warnings.extend(p.warnings.iter().cloned());
    Ok(out)
}

fn uniformish(d: &QuantileDistribution) -> bool {
    let (lo, hi) = d.support();
    (0..=32).all(|k| {
        let u = k as f64 / 32.0;
        (d.quantile().eval(u) - (lo + (hi - lo) * u)).abs() <= 1e-12 * (1.0 + hi.abs())
    })
}

/// Max over an n-by-n grid of the marginal-duality defect
/// `|dU_D/dx(t, s) + dU_P/dx(s, t)|` and the principal analogue.
pub fn duality_residual(p_del: &Primitive, p_per: &Primitive, n: usize) -> Result<DualityResidual> {
    if p_del.orientation != Orientation::Delegation {
        return Err(Error::WrongOrientation("delegation"));
    }
    if p_per.orientation != Orientation::Persuasion {
        return Err(Error::WrongOrientation("persuasion"));
    }
    let (tlo, thi) = p_del.state_space();
    let (slo, shi) = p_del.decision_space();
    let mut max_u = 0.0f64;
    let mut max_v = 0.0f64;
    for i in 0..=n {
        let t = tlo + (thi - tlo) * i as f64 / n as f64;
        for j in 0..=n {
            let s = slo + (shi - slo) * j as f64 / n as f64;
            let ru = p_del.du_dx(t, s) + p_per.du_dx(s, t);
            let rv = p_del.dv_dx(t, s) + p_per.dv_dx(s, t);
            max_u = max_u.max(ru.abs());
            max_v = max_v.max(rv.abs());
        }
    }
    Ok(DualityResidual { max_abs_u: max_u, max_abs_v: max_v, grid_size: n })
}

/// Change the state variable to its quantile so the state becomes uniform on
/// [0, 1]. Atoms of the distribution turn into state intervals where the
/// marginals are constant; zero-density gaps turn into jump points. Values
/// at a jump take the right limit.
pub fn quantile_reparameterize(p: &Primitive) -> Result<Primitive> {
    let dist = p.state_dist().clone();
    if dist.is_unit_uniform() {
        return Ok(p.clone());
    }
    let q = dist.quantile();
    let mut out = match (&p.kind, p.orientation) {
        (PrimitiveKind::Linear(parts), Orientation::Delegation) => Primitive::linear(
            compose_monotone(&parts.b, q)?,
            parts.c.clone(),
            compose_monotone(&parts.d, q)?,
            Orientation::Delegation,
            None,
        )?,
        (PrimitiveKind::Linear(parts), Orientation::Persuasion) => {
            // the state side of a persuasion primitive is c; the composed c
            // is generally only weakly increasing, which Primitive::linear
            // accepts with a warning
            Primitive::linear(
                parts.b.clone(),
                compose_monotone(&parts.c, q)?,
                parts.d.clone(),
                Orientation::Persuasion,
                None,
            )?
        }
        (PrimitiveKind::Custom { du, dv }, orientation) => {
            let comp = |f: &SeparableField| -> Result<SeparableField> {
                SeparableField::new(
                    f.terms
                        .iter()
                        .map(|(g, h)| Ok((compose_monotone(g, q)?, h.clone())))
                        .collect::<Result<Vec<_>>>()?,
                )
            };
            Primitive::custom(comp(du)?, comp(dv)?, orientation, None)?
        }
        (PrimitiveKind::Tabulated { du, dv }, orientation) => {
            let resample = |g: &BilinearGrid| {
                BilinearGrid::from_fn(
                    (0.0, 1.0),
                    g.decision_range,
                    g.n_state,
                    g.n_decision,
                    |theta, x| g.eval(q.eval(theta), x),
                )
            };
            Primitive::tabulated(resample(du), resample(dv), orientation)?
        }
    };
    if let Some(a) = &p.anchors {
        out = out.with_anchors(Anchors {
            agent: compose_monotone(&a.agent, q)?,
            principal: compose_monotone(&a.principal, q)?,
        });
    }
    Ok(out)
}

/// Exact composition `outer(inner(x))` for nondecreasing `inner`. The result
/// is split at inner breakpoints and at preimages of outer breakpoints, so
/// each output piece is a plain polynomial composition.
pub fn compose_monotone(outer: &PiecewisePoly, inner: &PiecewisePoly) -> Result<PiecewisePoly> {
    let (ilo, ihi) = inner.domain();
    let (olo, ohi) = outer.domain();
    let span = 1e-9 * (1.0 + ohi.abs() + olo.abs());
    let (rlo, rhi) = (inner.eval_right(ilo), inner.eval_left(ihi));
    if rlo < olo - span || rhi > ohi + span {
        return Err(Error::DomainMismatch(format!(
            "inner range [{rlo}, {rhi}] escapes outer domain [{olo}, {ohi}]"
        )));
    }
    let mut cuts: Vec<f64> = inner.breakpoints().to_vec();
    for &ob in outer.breakpoints() {
        let (xl, xr) = inner.solve_nondecreasing(ob);
        for x in [xl, xr] {
            if x > ilo && x < ihi {
                // preimages found by bisection land within 1e-13 of exact
                // breakpoints; snap so jump pieces stay on the right side
                let snapped = inner
                    .breakpoints()
                    .iter()
                    .find(|&&b| (b - x).abs() < 1e-12)
                    .copied()
                    .unwrap_or(x);
                cuts.push(snapped);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut breaks = Vec::with_capacity(cuts.len());
    let mut coeffs = Vec::with_capacity(cuts.len());
    breaks.push(cuts[0]);
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b - a < 1e-13 {
            continue;
        }
        // inner restricted to [a, b] is one polynomial in u = x - a
        let ip = inner.piece_index(a);
        let inner_local = poly_shift(inner.piece_coeffs()[ip].as_slice(), a - inner.breakpoints()[ip]);
        // the image midpoint selects the outer piece
        let mid_val = poly_eval(&inner_local, (b - a) / 2.0);
        let op = outer.piece_index(mid_val.clamp(olo, ohi));
        let oc = &outer.piece_coeffs()[op];
        // compose: outer_local(inner_local(u) - outer_left)
        let shifted: Vec<f64> = {
            let mut v = inner_local.clone();
            v[0] -= outer.breakpoints()[op];
            v
        };
        let mut acc = vec![0.0];
        let mut pow = vec![1.0];
        for (k, &co) in oc.iter().enumerate() {
            if k > 0 {
                pow = poly_mul(&pow, &shifted);
            }
            acc = poly_add(&acc, &poly_scale(&pow, co));
        }
        coeffs.push(acc);
        breaks.push(b);
    }
    PiecewisePoly::new(breaks, coeffs)
}
