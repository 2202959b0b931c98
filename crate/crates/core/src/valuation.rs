//! Expected payoffs and the scalar value function for linear problems.
//!
//! Values are integrals of the normalized payoff levels over the state
//! space (Lebesgue, no normalization constant). With levels anchored at the
//! top of the decision space for delegation and at the bottom for
//! persuasion, an equivalent pair of primitives values every monotone set
//! identically.
//!
//! Evaluation strategy: the state space is split at every point where the
//! induced decision function can kink or jump (member-interval images,
//! gap means, clamp corners, breakpoints of every piecewise factor), and
//! each smooth segment is integrated by chunked Gauss-Legendre. On
//! piecewise-polynomial segments (all linear primitives with
//! piecewise-affine transforms) this is exact; on other smooth segments it
//! is accurate far beyond the tolerances used anywhere in the crate.

use serde::Serialize;

use crate::agent::{best_decision_delegation, best_decision_for_element, TieBreak};
use crate::error::{Error, Result};
use crate::monotone::{Element, MonotoneSet};
use crate::poly::{gauss_integrate_pair, integrate_composed, PiecewisePoly};
use crate::primitive::{Orientation, Primitive, PrimitiveKind, SeparableField};

/// Principal and agent expected payoffs (normalized levels unless anchors
/// are declared on the primitive).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Payoffs {
    pub principal: f64,
    pub agent: f64,
}

/// Default quadrature node count for the sampled (tabulated) path.
pub const DEFAULT_QUAD_NODES: usize = 4097;

// ---------------------------------------------------------------------------
// Normalized payoff levels
// ---------------------------------------------------------------------------

// Normalized level as a sum of separable terms g_i(state) * Hbar_i(dec),
// where Hbar_i vanishes at the anchor decision.
struct Level {
    terms: Vec<(PiecewisePoly, PiecewisePoly)>,
}

impl Level {
    fn new(field_terms: &[(PiecewisePoly, PiecewisePoly)], anchor: f64) -> Level {
        let terms = field_terms
            .iter()
            .map(|(g, h)| {
                let anti = h.antiderivative();
                let at_anchor = anti.eval(anchor);
                (g.clone(), anti.add_scalar(-at_anchor))
            })
            .collect();
        Level { terms }
    }

    fn eval(&self, state: f64, dec: f64) -> f64 {
        self.terms.iter().map(|(g, h)| g.eval(state) * h.eval(dec)).sum()
    }

    fn state_breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|(g, _)| g.breakpoints().iter().copied())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }
}

fn marginal_terms(p: &Primitive, principal: bool) -> Option<Vec<(PiecewisePoly, PiecewisePoly)>> {
    match (&p.kind, p.orientation) {
        (PrimitiveKind::Linear(parts), Orientation::Delegation) => {
            let state_side = if principal { &parts.d } else { &parts.b };
            Some(SeparableField::from_difference(state_side, &parts.c).terms)
        }
        (PrimitiveKind::Linear(parts), Orientation::Persuasion) => {
            let dec_side = if principal { &parts.d } else { &parts.b };
            Some(SeparableField::from_difference(&parts.c, dec_side).terms)
        }
        (PrimitiveKind::Custom { du, dv }, _) => {
            Some(if principal { dv.terms.clone() } else { du.terms.clone() })
        }
        (PrimitiveKind::Tabulated { .. }, _) => None,
    }
}

fn payoff_levels(p: &Primitive) -> Option<(Level, Level)> {
    let anchor = match p.orientation {
        Orientation::Delegation => p.decision_space().1,
        Orientation::Persuasion => p.decision_space().0,
    };
    let u = Level::new(&marginal_terms(p, false)?, anchor);
    let v = Level::new(&marginal_terms(p, true)?, anchor);
    Some((u, v))
}

// Tabulated level evaluator: integrate the interpolated slice exactly.
fn tabulated_level(p: &Primitive, principal: bool, state: f64, dec: f64) -> f64 {
    let (dlo, dhi) = p.decision_space();
    let anchor = match p.orientation {
        Orientation::Delegation => dhi,
        Orientation::Persuasion => dlo,
    };
    let slice = match (&p.kind, principal) {
        (PrimitiveKind::Tabulated { dv, .. }, true) => dv.decision_slice(state),
        (PrimitiveKind::Tabulated { du, .. }, false) => du.decision_slice(state),
        _ => unreachable!(),
    };
    let anti = slice.antiderivative();
    anti.eval(dec) - anti.eval(anchor)
}

// ---------------------------------------------------------------------------
// Expected payoffs
// ---------------------------------------------------------------------------

/// Expected principal and agent payoffs of a balanced set.
///
/// `quad_nodes` controls the composite-trapezoid fallback used for
/// tabulated primitives and for custom primitives whose state factors are
/// not piecewise constant; polynomial kinds use the exact split-and-quadrate
/// path and ignore it.
pub fn expected_payoffs(
    p: &Primitive,
    pi: &MonotoneSet,
    tb: TieBreak,
    quad_nodes: Option<usize>,
) -> Result<Payoffs> {
    let (plo, phi) = p.pi_space();
    let d = pi.domain();
    if (d.0 - plo).abs() > 1e-9 || (d.1 - phi).abs() > 1e-9 {
        return Err(Error::DomainMismatch(format!(
            "set domain [{}, {}] does not match the problem space [{plo}, {phi}]",
            d.0, d.1
        )));
    }
    if !pi.is_balanced() {
        return Err(Error::UnbalancedSet(
            "expected payoffs require both extreme points in the set".into(),
        ));
    }
    let n = quad_nodes.unwrap_or(DEFAULT_QUAD_NODES);
    let mut out = match (&p.kind, p.orientation) {
        (PrimitiveKind::Tabulated { .. }, Orientation::Delegation) => {
            trapezoid_delegation(p, pi, tb, n)?
        }
        (PrimitiveKind::Tabulated { .. }, Orientation::Persuasion) => {
            trapezoid_persuasion(p, pi, tb, n)?
        }
        (PrimitiveKind::Custom { du, .. }, Orientation::Delegation)
            if !du.state_factors_constant() =>
        {
            trapezoid_delegation(p, pi, tb, n)?
        }
        (_, Orientation::Delegation) => exact_delegation(p, pi, tb)?,
        (_, Orientation::Persuasion) => exact_persuasion(p, pi, tb)?,
    };
    if let Some(a) = &p.anchors {
        let (slo, shi) = p.state_space();
        out.agent += a.agent.definite_integral(slo, shi)?;
        out.principal += a.principal.definite_integral(slo, shi)?;
    }
    Ok(out)
}

fn exact_delegation(p: &Primitive, pi: &MonotoneSet, tb: TieBreak) -> Result<Payoffs> {
    let (slo, shi) = p.state_space();
    let (u_level, v_level) = payoff_levels(p).expect("polynomial kind");
    let mut cuts: Vec<f64> = vec![slo, shi];
    cuts.extend(u_level.state_breakpoints());
    cuts.extend(v_level.state_breakpoints());
    if let Some(parts) = p.linear_parts() {
        // preimages under b of every m-value where the decision rule kinks:
        // member-interval images, interior c-breakpoint images, gap c-means
        let mut m_events: Vec<f64> = Vec::new();
        for &(a, b) in pi.intervals() {
            m_events.push(parts.c.eval(a));
            m_events.push(parts.c.eval_left(b));
            for &bp in parts.c.breakpoints() {
                if bp > a && bp < b {
                    m_events.push(parts.c.eval(bp));
                    m_events.push(parts.c.eval_left(bp));
                }
            }
        }
        for (g0, g1) in pi.pools() {
            if g1 > g0 {
                m_events.push(parts.c.mean_on(g0, g1)?);
            }
        }
        for m in m_events {
            let (xl, xr) = parts.b.solve_nondecreasing(m);
            for x in [xl, xr] {
                if x > slo && x < shi {
                    cuts.push(x);
                }
            }
        }
        cuts.extend(parts.b.breakpoints().iter().copied());
    }
    cuts.retain(|&x| x >= slo - 1e-12 && x <= shi + 1e-12);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut principal = 0.0;
    let mut agent = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-13 {
            continue;
        }
        // cuts make the branch pure on (a, b): probe two interior points
        let xa = best_decision_delegation(p, pi, a + 0.271 * (b - a), tb)?;
        let xb = best_decision_delegation(p, pi, a + 0.713 * (b - a), tb)?;
        let (dv, du) = if (xa - xb).abs() <= 1e-12 {
            gauss_integrate_pair(a, b, |t| (v_level.eval(t, xa), u_level.eval(t, xa)))
        } else {
            gauss_integrate_pair(a, b, |t| {
                let x = best_decision_delegation(p, pi, t, tb).expect("validated inputs");
                (v_level.eval(t, x), u_level.eval(t, x))
            })
        };
        principal += dv;
        agent += du;
    }
    Ok(Payoffs { principal, agent })
}

fn exact_persuasion(p: &Primitive, pi: &MonotoneSet, tb: TieBreak) -> Result<Payoffs> {
    let (u_level, v_level) = payoff_levels(p).expect("polynomial kind");
    let mut principal = 0.0;
    let mut agent = 0.0;
    // pooled elements: one decision per pool
    for (g0, g1) in pi.pools() {
        if g1 <= g0 {
            continue;
        }
        let x = best_decision_for_element(p, Element::Pool { lo: g0, hi: g1 }, tb)?;
        let mut cuts = vec![g0, g1];
        for bp in u_level.state_breakpoints().iter().chain(v_level.state_breakpoints().iter()) {
            if *bp > g0 && *bp < g1 {
                cuts.push(*bp);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        for w in cuts.windows(2) {
            let (dv, du) =
                gauss_integrate_pair(w[0], w[1], |s| (v_level.eval(s, x), u_level.eval(s, x)));
            principal += dv;
            agent += du;
        }
    }
    // separated stretches: the decision tracks the state
    for &(a, b) in pi.intervals() {
        if b - a < 1e-13 {
            continue;
        }
        let mut cuts = vec![a, b];
        cuts.extend(u_level.state_breakpoints());
        cuts.extend(v_level.state_breakpoints());
        if let Some(parts) = p.linear_parts() {
            cuts.extend(parts.c.breakpoints().iter().copied());
            // clamp corners and b-breakpoint crossings: preimages under c
            let mut targets: Vec<f64> = parts
                .b
                .breakpoints()
                .iter()
                .map(|&x| parts.b.eval(x))
                .collect();
            targets.push(parts.b.eval_right(parts.b.lo()));
            targets.push(parts.b.eval_left(parts.b.hi()));
            for v in targets {
                let (xl, xr) = parts.c.solve_nondecreasing(v);
                cuts.push(xl);
                cuts.push(xr);
            }
        }
        cuts.retain(|&x| x >= a - 1e-12 && x <= b + 1e-12);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        for w in cuts.windows(2) {
            let (c0, c1) = (w[0], w[1]);
            if c1 - c0 < 1e-13 {
                continue;
            }
            let xa = best_decision_for_element(p, Element::Point(c0 + 0.271 * (c1 - c0)), tb)?;
            let xb = best_decision_for_element(p, Element::Point(c0 + 0.713 * (c1 - c0)), tb)?;
            let (dv, du) = if (xa - xb).abs() <= 1e-12 {
                gauss_integrate_pair(c0, c1, |s| (v_level.eval(s, xa), u_level.eval(s, xa)))
            } else {
                gauss_integrate_pair(c0, c1, |s| {
                    let x =
                        best_decision_for_element(p, Element::Point(s), tb).expect("validated");
                    (v_level.eval(s, x), u_level.eval(s, x))
                })
            };
            principal += dv;
            agent += du;
        }
    }
    Ok(Payoffs { principal, agent })
}

fn trapezoid_delegation(p: &Primitive, pi: &MonotoneSet, tb: TieBreak, n: usize) -> Result<Payoffs> {
    let (slo, shi) = p.state_space();
    let levels = payoff_levels(p);
    let h = (shi - slo) / (n - 1) as f64;
    let mut principal = 0.0;
    let mut agent = 0.0;
    for k in 0..n {
        let t = slo + h * k as f64;
        let x = best_decision_delegation(p, pi, t, tb)?;
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let (lv, lu) = level_pair(p, &levels, t, x);
        principal += w * lv;
        agent += w * lu;
    }
    Ok(Payoffs { principal: principal * h, agent: agent * h })
}

fn trapezoid_persuasion(p: &Primitive, pi: &MonotoneSet, tb: TieBreak, n: usize) -> Result<Payoffs> {
    let (slo, shi) = p.state_space();
    let levels = payoff_levels(p);
    let h = (shi - slo) / (n - 1) as f64;
    let mut principal = 0.0;
    let mut agent = 0.0;
    for k in 0..n {
        let t = slo + h * k as f64;
        let x = best_decision_for_element(p, pi.element(t)?, tb)?;
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let (lv, lu) = level_pair(p, &levels, t, x);
        principal += w * lv;
        agent += w * lu;
    }
    Ok(Payoffs { principal: principal * h, agent: agent * h })
}

fn level_pair(p: &Primitive, levels: &Option<(Level, Level)>, state: f64, dec: f64) -> (f64, f64) {
    match levels {
        Some((u, v)) => (v.eval(state, dec), u.eval(state, dec)),
        None => (
            tabulated_level(p, true, state, dec),
            tabulated_level(p, false, state, dec),
        ),
    }
}

// ---------------------------------------------------------------------------
// The scalar value function
// ---------------------------------------------------------------------------

/// How a value function was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NuProvenance {
    /// Price-cap regulation with cost density `f`: the principal's payoff at
    /// posterior mean m is `int_0^{2m-1} (m - g) f(g) dg`, zero left of 1/2.
    Regulation { theta_bar: f64 },
    /// Linear problem in normal form: `int_0^m (m - d(t)) f(t) dt`, zero
    /// left of 0.
    LinearDelegation,
    /// Supplied directly.
    Direct,
}

/// The principal's expected payoff as a function of the induced posterior
/// mean, with its exact derivative.
#[derive(Debug, Clone, Serialize)]
pub struct NuFunction {
    nu: PiecewisePoly,
    dnu: PiecewisePoly,
    pub provenance: NuProvenance,
    /// Supremum of the identically-zero region at the left edge.
    pub zero_edge: f64,
    /// Infimum of the affine region at the right edge.
    pub line_edge: f64,
    /// Slope of that affine region (the total decision span).
    pub line_slope: f64,
}

impl NuFunction {
    pub fn nu(&self) -> &PiecewisePoly {
        &self.nu
    }

    pub fn dnu(&self) -> &PiecewisePoly {
        &self.dnu
    }

    pub fn domain(&self) -> (f64, f64) {
        self.nu.domain()
    }

    pub fn eval(&self, m: f64) -> f64 {
        self.nu.eval(m)
    }

    pub fn slope(&self, m: f64) -> f64 {
        self.dnu.eval(m)
    }

    /// Tangent line at `m0`, as a function of m over the whole domain.
    pub fn tangent_at(&self, m0: f64) -> PiecewisePoly {
        let (lo, hi) = self.nu.domain();
        let v = self.nu.eval(m0);
        let s = self.dnu.eval(m0);
        PiecewisePoly::affine(lo, hi, v + s * (lo - m0), s)
    }
}

/// Build the regulation value function from a cost density on [0, 1] and a
/// pooled-state span `theta_bar >= 1`. Exact coefficient arithmetic:
/// zero on [0, 1/2], `m P(2m-1) - Q(2m-1)` on [1/2, 1] (P, Q the
/// antiderivatives of `f` and `g f`), affine with slope one beyond 1.
pub fn build_nu_regulation(f: &PiecewisePoly, theta_bar: f64) -> Result<NuFunction> {
    crate::dist::validate_density(f)?;
    let (flo, fhi) = f.domain();
    if flo.abs() > 1e-12 || (fhi - 1.0).abs() > 1e-12 {
        return Err(Error::DomainMismatch(format!(
            "regulation cost density must live on [0, 1], got [{flo}, {fhi}]"
        )));
    }
    if theta_bar < 1.0 {
        return Err(Error::Invalid("the pooled-state span must be at least 1".into()));
    }
    let cdf = f.antiderivative();
    let id01 = PiecewisePoly::identity(0.0, 1.0);
    let q = id01.mul(f).antiderivative();
    // middle piece on [1/2, 1]
    let p_of_m = cdf.compose_affine(2.0, -1.0)?;
    let q_of_m = q.compose_affine(2.0, -1.0)?;
    let id_mid = PiecewisePoly::identity(0.5, 1.0);
    let middle = id_mid.mul(&p_of_m).sub(&q_of_m);
    let zero = PiecewisePoly::constant(0.0, 0.5, 0.0);
    let nu_at_one = middle.eval(1.0);
    let nu = if theta_bar > 1.0 {
        let line = PiecewisePoly::affine(1.0, theta_bar, nu_at_one, 1.0);
        zero.concat(&middle)?.concat(&line)?
    } else {
        zero.concat(&middle)?
    };
    let dnu = nu.derivative();
    Ok(NuFunction {
        nu,
        dnu,
        provenance: NuProvenance::Regulation { theta_bar },
        zero_edge: 0.5,
        line_edge: 1.0,
        line_slope: 1.0,
    })
}

/// Build the normal-form linear value function
/// `nu(m) = int_0^m (m - d(t)) f(t) dt` on [0, 1], extended by zero to
/// `m_lo <= 0` and by the slope-one affine continuation to `m_hi >= 1`.
pub fn build_nu_linear_delegation(
    d: &PiecewisePoly,
    f: &PiecewisePoly,
    m_lo: f64,
    m_hi: f64,
) -> Result<NuFunction> {
    crate::dist::validate_density(f)?;
    let (flo, fhi) = f.domain();
    if flo.abs() > 1e-12 || (fhi - 1.0).abs() > 1e-12 {
        return Err(Error::DomainMismatch("the state density must live on [0, 1]".into()));
    }
    if (d.lo() - flo).abs() > 1e-9 || (d.hi() - fhi).abs() > 1e-9 {
        return Err(Error::DomainMismatch("d must share the density's domain".into()));
    }
    if m_lo > 0.0 || m_hi < 1.0 {
        return Err(Error::Invalid("need m_lo <= 0 <= 1 <= m_hi".into()));
    }
    let cdf = f.antiderivative();
    let r = d.mul(f).antiderivative();
    let id01 = PiecewisePoly::identity(0.0, 1.0);
    let core = id01.mul(&cdf).sub(&r);
    let nu_at_one = core.eval(1.0);
    let mut nu = core;
    if m_lo < 0.0 {
        nu = PiecewisePoly::constant(m_lo, 0.0, 0.0).concat(&nu)?;
    }
    if m_hi > 1.0 {
        nu = nu.concat(&PiecewisePoly::affine(1.0, m_hi, nu_at_one, 1.0))?;
    }
    let dnu = nu.derivative();
    Ok(NuFunction {
        nu,
        dnu,
        provenance: NuProvenance::LinearDelegation,
        zero_edge: 0.0,
        line_edge: 1.0,
        line_slope: 1.0,
    })
}

/// Wrap an explicit piecewise polynomial as a value function.
pub fn nu_direct(nu: PiecewisePoly, zero_edge: f64, line_edge: f64, line_slope: f64) -> NuFunction {
    let dnu = nu.derivative();
    NuFunction { nu, dnu, provenance: NuProvenance::Direct, zero_edge, line_edge, line_slope }
}

/// Value function of a linear primitive (either orientation). Requires the
/// non-partition transform `b` to be piecewise affine so the inverse stays
/// piecewise polynomial.
pub fn build_nu(p: &Primitive) -> Result<NuFunction> {
    let parts = p
        .linear_parts()
        .ok_or_else(|| Error::Invalid("the value-function reduction needs a linear primitive".into()))?;
    if parts.b.degree() > 1 {
        return Err(Error::Invalid(
            "the value-function reduction requires piecewise-affine b".into(),
        ));
    }
    let (dlo, dhi) = match p.orientation {
        Orientation::Persuasion => p.decision_space(),
        Orientation::Delegation => p.state_space(),
    };
    let binv = invert_piecewise_affine(&parts.b)?;
    let u0 = parts.b.eval_right(dlo);
    let u1 = parts.b.eval_left(dhi);
    // weight = (b^{-1})': the state density of the normal form
    let w = binv.derivative();
    let dtilde = crate::equivalence::compose_monotone(&parts.d, &binv)?;
    let wsum = w.antiderivative();
    let rw = dtilde.mul(&w).antiderivative();
    let id = PiecewisePoly::identity(u0, u1);
    let core = id.mul(&wsum).sub(&rw);
    let nu_at_u1 = core.eval(u1);
    let total_span = wsum.eval(u1); // = dhi - dlo
    let (clo, chi) = parts.c.domain();
    let m_lo = parts.c.eval_right(clo).min(u0);
    let m_hi = parts.c.eval_left(chi).max(u1);
    let mut nu = core;
    if m_lo < u0 - 1e-12 {
        nu = PiecewisePoly::constant(m_lo, u0, 0.0).concat(&nu)?;
    }
    if m_hi > u1 + 1e-12 {
        nu = nu.concat(&PiecewisePoly::affine(u1, m_hi, nu_at_u1, total_span))?;
    }
    let dnu = nu.derivative();
    Ok(NuFunction {
        nu,
        dnu,
        provenance: NuProvenance::LinearDelegation,
        zero_edge: u0,
        line_edge: u1,
        line_slope: total_span,
    })
}

fn invert_piecewise_affine(b: &PiecewisePoly) -> Result<PiecewisePoly> {
    let mut breaks = Vec::with_capacity(b.breakpoints().len());
    let mut coeffs = Vec::with_capacity(b.num_pieces());
    for (i, w) in b.breakpoints().windows(2).enumerate() {
        let (x0, x1) = (w[0], w[1]);
        let v0 = b.eval_right(x0);
        let v1 = b.eval_left(x1);
        if v1 - v0 <= 1e-12 {
            return Err(Error::NonMonotone(
                "inverting requires strictly increasing pieces".into(),
            ));
        }
        if b.piece_coeffs()[i].len() > 2 {
            let deg: usize = b.piece_coeffs()[i].len() - 1;
            if b.piece_coeffs()[i][2..].iter().any(|c| c.abs() > 0.0) {
                return Err(Error::Invalid(format!(
                    "piece {i} has degree {deg}; inversion needs affine pieces"
                )));
            }
        }
        let slope = (v1 - v0) / (x1 - x0);
        breaks.push(v0);
        coeffs.push(vec![x0, 1.0 / slope]);
        if i + 1 == b.num_pieces() {
            breaks.push(v1);
        }
    }
    PiecewisePoly::new(breaks, coeffs)
}

/// Reduced objective: the integral of `nu` at the induced posterior mean of
/// `c` over the state space, exactly. An optional density reweights states.
pub fn expected_nu(
    pi: &MonotoneSet,
    nu: &NuFunction,
    c: &PiecewisePoly,
    weight: Option<&PiecewisePoly>,
) -> Result<f64> {
    if !pi.is_balanced() {
        return Err(Error::UnbalancedSet("the reduced objective needs a balanced set".into()));
    }
    let d = pi.domain();
    if (c.lo() - d.0).abs() > 1e-9 || (c.hi() - d.1).abs() > 1e-9 {
        return Err(Error::DomainMismatch(
            "the transform c must live on the set's domain".into(),
        ));
    }
    let mut total = 0.0;
    for &(a, b) in pi.intervals() {
        if b - a > 1e-13 {
            total += integrate_composed(nu.nu(), c, weight, a, b);
        }
    }
    for (g0, g1) in pi.pools() {
        if g1 - g0 <= 1e-13 {
            continue;
        }
        let (mass, mean) = match weight {
            None => (g1 - g0, c.mean_on(g0, g1)?),
            Some(w) => {
                let mass = w.definite_integral(g0, g1)?;
                let cm = c.mul(w).definite_integral(g0, g1)?;
                (mass, cm / mass)
            }
        };
        total += mass * nu.eval(mean);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitive::{make_linear_primitive, Anchors};

    fn biased_delegation(delta: f64) -> Primitive {
        // doubled quadratic loss: dU/dx = 2t - 2x, dV/dx = 2(t + delta) - 2x
        let b = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let c = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let d = PiecewisePoly::affine(0.0, 1.0, 2.0 * delta, 2.0);
        make_linear_primitive(b, c, d, Orientation::Delegation).unwrap()
    }

    #[test]
    fn full_delegation_beats_no_communication_under_small_bias() {
        let delta = 0.1;
        let p = biased_delegation(delta);
        let full = MonotoneSet::full((0.0, 1.0));
        let none = MonotoneSet::endpoints_only((0.0, 1.0));
        let tb = TieBreak::PrincipalPreferred;
        let v_full = expected_payoffs(&p, &full, tb, None).unwrap();
        let v_none = expected_payoffs(&p, &none, tb, None).unwrap();
        // closed forms for the un-normalized principal payoff -(t+d-x)^2:
        // full discretion loses delta^2, no communication 1/12 + delta^2.
        // the normalization anchor is E[-(t+d-1)^2] = -((1-d)^3 + d^3)/3.
        let anchor = -(((1.0 - delta) as f64).powi(3) + delta.powi(3)) / 3.0;
        assert!((v_full.principal + anchor - (-delta * delta)).abs() < 1e-12);
        assert!(
            (v_none.principal + anchor - (-(1.0 / 12.0 + delta * delta))).abs() < 1e-12,
            "{}",
            v_none.principal + anchor
        );
        assert!(v_full.principal > v_none.principal);
    }

    #[test]
    fn aligned_full_discretion_attains_the_agent_global_max() {
        // zero bias, with anchors declared so payoffs are un-normalized
        let b = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let c = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let d = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        // anchor(t) = U(t, 1) = -(t-1)^2
        let anchor = PiecewisePoly::from_global_pieces(vec![0.0, 1.0], vec![vec![-1.0, 2.0, -1.0]])
            .unwrap();
        let p = make_linear_primitive(b, c, d, Orientation::Delegation)
            .unwrap()
            .with_anchors(Anchors { agent: anchor.clone(), principal: anchor });
        let full = MonotoneSet::full((0.0, 1.0));
        let v = expected_payoffs(&p, &full, TieBreak::Lowest, None).unwrap();
        assert!(v.agent.abs() < 1e-12, "{}", v.agent);
        assert!(v.principal.abs() < 1e-12);
    }

    #[test]
    fn delegation_and_transformed_persuasion_values_agree() {
        let p = biased_delegation(0.1);
        let q = crate::equivalence::delegation_to_persuasion(&p).unwrap();
        let tb = TieBreak::PrincipalPreferred;
        for set in [
            MonotoneSet::full((0.0, 1.0)),
            MonotoneSet::endpoints_only((0.0, 1.0)),
            MonotoneSet::new((0.0, 1.0), vec![(0.0, 0.3), (0.75, 0.75), (1.0, 1.0)]).unwrap(),
            MonotoneSet::from_points((0.0, 1.0), &[0.0, 0.2, 0.6, 1.0]).unwrap(),
        ] {
            let vd = expected_payoffs(&p, &set, tb, None).unwrap();
            let vp = expected_payoffs(&q, &set, tb, None).unwrap();
            assert!(
                (vd.principal - vp.principal).abs() < 1e-10,
                "principal gap {} on {:?}",
                vd.principal - vp.principal,
                set.intervals()
            );
            assert!(
                (vd.agent - vp.agent).abs() < 1e-10,
                "agent gap {} on {:?}",
                vd.agent - vp.agent,
                set.intervals()
            );
        }
    }

    #[test]
    fn regulation_nu_matches_quadrature_oracle() {
        // triangular density with mode 1/2
        let f = PiecewisePoly::from_global_pieces(
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0, 4.0], vec![4.0, -4.0]],
        )
        .unwrap();
        let nu = build_nu_regulation(&f, 1.0).unwrap();
        assert!(nu.eval(0.5).abs() < 1e-14);
        assert!(nu.eval(0.3).abs() < 1e-14);
        // Riemann-sum oracle for nu(m) = int_0^{2m-1} (m - g) f(g) dg
        for &m in &[0.55, 0.6, 0.7, 0.8, 0.9, 0.97, 1.0] {
            let hi = 2.0 * m - 1.0;
            let n = 200_000;
            let h = hi / n as f64;
            let mut acc = 0.0;
            for k in 0..n {
                let g = (k as f64 + 0.5) * h;
                acc += (m - g) * f.eval(g);
            }
            acc *= h;
            assert!((nu.eval(m) - acc).abs() < 1e-6, "m = {m}: {} vs {acc}", nu.eval(m));
        }
        // derivative identity: nu'(m) = 2(1-m) f(2m-1) + F(2m-1)
        let cdf = f.antiderivative();
        for &m in &[0.55, 0.66, 0.75, 0.88, 0.99] {
            let expect = 2.0 * (1.0 - m) * f.eval(2.0 * m - 1.0) + cdf.eval(2.0 * m - 1.0);
            assert!((nu.slope(m) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_slope_family_nu_is_quadratic() {
        // f = 1 and d(t) = k t gives nu(m) = m^2 (2 - k) / 2
        for &k in &[1.0, 3.0] {
            let d = PiecewisePoly::affine(0.0, 1.0, 0.0, k);
            let f = PiecewisePoly::constant(0.0, 1.0, 1.0);
            let nu = build_nu_linear_delegation(&d, &f, -1.0, 2.0).unwrap();
            for t in [0.1, 0.4, 0.77, 1.0] {
                assert!((nu.eval(t) - t * t * (2.0 - k) / 2.0).abs() < 1e-13);
                assert!((nu.slope(t - 1e-9) - t * (2.0 - k)).abs() < 1e-6);
            }
            assert_eq!(nu.eval(-0.5), 0.0);
            // slope-one continuation past 1
            assert!((nu.eval(1.5) - (nu.eval(1.0) + 0.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn reduced_objective_matches_direct_evaluation() {
        // persuasion primitive in normal form: b = id, c = id, d(t) = t + 0.1
        let b = PiecewisePoly::identity(0.0, 1.0);
        let c = PiecewisePoly::identity(0.0, 1.0);
        let d = PiecewisePoly::affine(0.0, 1.0, 0.1, 1.0);
        let p = make_linear_primitive(b, c, d.clone(), Orientation::Persuasion).unwrap();
        let nu = build_nu(&p).unwrap();
        for set in [
            MonotoneSet::full((0.0, 1.0)),
            MonotoneSet::endpoints_only((0.0, 1.0)),
            MonotoneSet::new((0.0, 1.0), vec![(0.0, 0.55), (1.0, 1.0)]).unwrap(),
            MonotoneSet::from_points((0.0, 1.0), &[0.0, 0.31, 0.62, 1.0]).unwrap(),
        ] {
            let direct = expected_payoffs(&p, &set, TieBreak::PrincipalPreferred, None)
                .unwrap()
                .principal;
            let reduced = expected_nu(&set, &nu, &PiecewisePoly::identity(0.0, 1.0), None).unwrap();
            assert!(
                (direct - reduced).abs() < 1e-10,
                "gap {} on {:?}",
                direct - reduced,
                set.intervals()
            );
        }
    }

    #[test]
    fn single_pool_reduced_objective_is_nu_of_the_prior_mean() {
        let d = PiecewisePoly::affine(0.0, 1.0, 0.1, 1.0);
        let f = PiecewisePoly::constant(0.0, 1.0, 1.0);
        let nu = build_nu_linear_delegation(&d, &f, -1.0, 2.0).unwrap();
        let c = PiecewisePoly::identity(0.0, 1.0);
        let none = MonotoneSet::endpoints_only((0.0, 1.0));
        let v = expected_nu(&none, &nu, &c, None).unwrap();
        assert!((v - nu.eval(0.5)).abs() < 1e-14);
        let full = MonotoneSet::full((0.0, 1.0));
        let v = expected_nu(&full, &nu, &c, None).unwrap();
        let direct = {
            // integral of nu(m) dm over [0,1]
            nu.nu().definite_integral(0.0, 1.0).unwrap()
        };
        assert!((v - direct).abs() < 1e-13);
    }
}
