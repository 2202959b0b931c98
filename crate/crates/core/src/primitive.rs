//! Problem primitives: marginal payoff fields for a principal and an agent.
//!
//! A primitive carries the two marginal fields `dU/dx` and `dV/dx` over
//! state x decision, an orientation, and the state distribution. Payoff
//! *levels* are always the normalized ones: anchored at the top of the
//! decision space for delegation and at the bottom for persuasion, so both
//! problems of an equivalent pair value a set identically with no affine
//! constants to track.
//!
//! Three representations are supported:
//! - `Linear`: shared-transform marginals `b(state) - c(dec)` (agent) and
//!   `d(state) - c(dec)` (principal) in the delegation reading, with the
//!   roles of state and decision swapped in the persuasion reading. This is
//!   the class the analytic solvers consume.
//! - `Custom`: sums of separable terms `g_i(state) * h_i(dec)`, still exact.
//!   Needed for binary-state scenarios after the quantile change of variable
//!   (step marginals) and for step-shaped principal preferences, neither of
//!   which fits the shared-transform form.
//! - `Tabulated`: bilinear interpolation on uniform grids.

use serde::{Deserialize, Serialize};

use crate::dist::QuantileDistribution;
use crate::error::{Error, Result};
use crate::poly::PiecewisePoly;

pub const MAX_POLY_DEGREE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Delegation,
    Persuasion,
}

impl Orientation {
    pub fn flipped(self) -> Orientation {
        match self {
            Orientation::Delegation => Orientation::Persuasion,
            Orientation::Persuasion => Orientation::Delegation,
        }
    }
}

// ---------------------------------------------------------------------------
// Separable fields
// ---------------------------------------------------------------------------

/// A bivariate field `sum_i g_i(state) * h_i(decision)` with piecewise
/// polynomial factors. Exact to evaluate, average over state intervals, and
/// integrate in the decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableField {
    pub terms: Vec<(PiecewisePoly, PiecewisePoly)>,
}

impl SeparableField {
    pub fn new(terms: Vec<(PiecewisePoly, PiecewisePoly)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("a separable field needs at least one term".into()));
        }
        let sd = terms[0].0.domain();
        let dd = terms[0].1.domain();
        for (g, h) in &terms {
            if (g.lo() - sd.0).abs() > 1e-9 || (g.hi() - sd.1).abs() > 1e-9 {
                return Err(Error::DomainMismatch("state factors disagree on domain".into()));
            }
            if (h.lo() - dd.0).abs() > 1e-9 || (h.hi() - dd.1).abs() > 1e-9 {
                return Err(Error::DomainMismatch("decision factors disagree on domain".into()));
            }
        }
        Ok(Self { terms })
    }

    /// Field of the linear form `s(state) - t(dec)`.
    pub fn from_difference(s: &PiecewisePoly, t: &PiecewisePoly) -> Self {
        let (slo, shi) = s.domain();
        let (tlo, thi) = t.domain();
        Self {
            terms: vec![
                (s.clone(), PiecewisePoly::constant(tlo, thi, 1.0)),
                (PiecewisePoly::constant(slo, shi, 1.0), t.scale(-1.0)),
            ],
        }
    }

    pub fn state_domain(&self) -> (f64, f64) {
        self.terms[0].0.domain()
    }

    pub fn decision_domain(&self) -> (f64, f64) {
        self.terms[0].1.domain()
    }

    pub fn eval(&self, state: f64, dec: f64) -> f64 {
        self.terms.iter().map(|(g, h)| g.eval(state) * h.eval(dec)).sum()
    }

    /// The field as a function of the decision at a fixed state.
    pub fn decision_slice(&self, state: f64) -> PiecewisePoly {
        self.weighted_decision_poly(&|g| g.eval(state))
    }

    /// The field as a function of the decision, with the state averaged over
    /// `[a, b]` (exact state-factor means).
    pub fn pooled_decision_slice(&self, a: f64, b: f64) -> PiecewisePoly {
        self.weighted_decision_poly(&|g| {
            g.mean_on(a, b).expect("pool inside state domain")
        })
    }

    fn weighted_decision_poly(&self, weight: &dyn Fn(&PiecewisePoly) -> f64) -> PiecewisePoly {
        let mut acc: Option<PiecewisePoly> = None;
        for (g, h) in &self.terms {
            let piece = h.scale(weight(g));
            acc = Some(match acc {
                Some(sum) => sum.add(&piece),
                None => piece,
            });
        }
        acc.unwrap()
    }

    /// The field as a function of the state at a fixed decision.
    pub fn state_slice(&self, dec: f64) -> PiecewisePoly {
        let mut acc: Option<PiecewisePoly> = None;
        for (g, h) in &self.terms {
            let piece = g.scale(h.eval(dec));
            acc = Some(match acc {
                Some(sum) => sum.add(&piece),
                None => piece,
            });
        }
        acc.unwrap()
    }

    /// Swap the two arguments and negate: the marginal-duality transform.
    pub fn transposed_negated(&self) -> SeparableField {
        SeparableField {
            terms: self
                .terms
                .iter()
                .map(|(g, h)| (h.clone(), g.scale(-1.0)))
                .collect(),
        }
    }

    /// Breakpoints of the state factors (branch boundaries in the state).
    pub fn state_breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|(g, _)| g.breakpoints().iter().copied())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    /// True when every state factor is piecewise constant (the class that
    /// atoms of a state distribution produce).
    pub fn state_factors_constant(&self) -> bool {
        self.terms.iter().all(|(g, _)| g.degree() == 0)
    }
}

// ---------------------------------------------------------------------------
// Bilinear grids
// ---------------------------------------------------------------------------

/// Uniform-grid samples of a field with bilinear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearGrid {
    pub state_range: (f64, f64),
    pub decision_range: (f64, f64),
    pub n_state: usize,
    pub n_decision: usize,
    /// Row-major: `values[i * n_decision + j]` at state node i, decision node j.
    pub values: Vec<f64>,
}

impl BilinearGrid {
    pub fn from_fn(
        state_range: (f64, f64),
        decision_range: (f64, f64),
        n_state: usize,
        n_decision: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(n_state * n_decision);
        for i in 0..n_state {
            let s = lerp(state_range, i, n_state);
            for j in 0..n_decision {
                let d = lerp(decision_range, j, n_decision);
                values.push(f(s, d));
            }
        }
        Self { state_range, decision_range, n_state, n_decision, values }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_state < 2 || self.n_decision < 2 {
            return Err(Error::Invalid("grids need at least 2 nodes per axis".into()));
        }
        if self.values.len() != self.n_state * self.n_decision {
            return Err(Error::Invalid("grid value count mismatch".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite grid value".into()));
        }
        Ok(())
    }

    pub fn eval(&self, state: f64, dec: f64) -> f64 {
        let (iu, fu) = locate(self.state_range, self.n_state, state);
        let (jv, fv) = locate(self.decision_range, self.n_decision, dec);
        let at = |i: usize, j: usize| self.values[i * self.n_decision + j];
        let a = at(iu, jv) * (1.0 - fu) * (1.0 - fv);
        let b = at(iu + 1, jv) * fu * (1.0 - fv);
        let c = at(iu, jv + 1) * (1.0 - fu) * fv;
        let d = at(iu + 1, jv + 1) * fu * fv;
        a + b + c + d
    }

    /// Decision slice at a fixed state: piecewise affine through the
    /// interpolated node values.
    pub fn decision_slice(&self, state: f64) -> PiecewisePoly {
        let mut breaks = Vec::with_capacity(self.n_decision);
        let mut coeffs = Vec::with_capacity(self.n_decision - 1);
        let mut prev = self.eval(state, self.decision_range.0);
        breaks.push(self.decision_range.0);
        for j in 1..self.n_decision {
            let x = lerp(self.decision_range, j, self.n_decision);
            let v = self.eval(state, x);
            let x0 = *breaks.last().unwrap();
            coeffs.push(vec![prev, (v - prev) / (x - x0)]);
            breaks.push(x);
            prev = v;
        }
        PiecewisePoly::new(breaks, coeffs).expect("grid produces valid pieces")
    }

    /// Decision slice with the state averaged over `[a, b]` (exact average
    /// of the bilinear interpolant).
    pub fn pooled_decision_slice(&self, a: f64, b: f64) -> PiecewisePoly {
        // average of a piecewise-affine function of the state: integrate each
        // state cell segment exactly
        let n = self.n_state;
        let mut node_means = vec![0.0; self.n_decision];
        let mut total = 0.0;
        for i in 0..n - 1 {
            let s0 = lerp(self.state_range, i, n);
            let s1 = lerp(self.state_range, i + 1, n);
            let lo = s0.max(a);
            let hi = s1.min(b);
            if hi <= lo {
                continue;
            }
            // mean of the affine weight over [lo, hi] in local cell coords
            let cell = s1 - s0;
            let m0 = ((lo + hi) / 2.0 - s0) / cell; // mean fractional position
            let w = hi - lo;
            total += w;
            for j in 0..self.n_decision {
                let v0 = self.values[i * self.n_decision + j];
                let v1 = self.values[(i + 1) * self.n_decision + j];
                node_means[j] += w * (v0 * (1.0 - m0) + v1 * m0);
            }
        }
        for v in &mut node_means {
            *v /= total;
        }
        let mut breaks = Vec::with_capacity(self.n_decision);
        let mut coeffs = Vec::with_capacity(self.n_decision - 1);
        for j in 0..self.n_decision {
            breaks.push(lerp(self.decision_range, j, self.n_decision));
        }
        for j in 0..self.n_decision - 1 {
            let dx = breaks[j + 1] - breaks[j];
            coeffs.push(vec![node_means[j], (node_means[j + 1] - node_means[j]) / dx]);
        }
        PiecewisePoly::new(breaks, coeffs).expect("grid produces valid pieces")
    }

    pub fn transposed_negated(&self) -> BilinearGrid {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.n_decision {
            for i in 0..self.n_state {
                values.push(-self.values[i * self.n_decision + j]);
            }
        }
        BilinearGrid {
            state_range: self.decision_range,
            decision_range: self.state_range,
            n_state: self.n_decision,
            n_decision: self.n_state,
            values,
        }
    }
}

fn lerp(range: (f64, f64), i: usize, n: usize) -> f64 {
    range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
}

fn locate(range: (f64, f64), n: usize, x: f64) -> (usize, f64) {
    let t = ((x - range.0) / (range.1 - range.0) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
    let i = (t.floor() as usize).min(n - 2);
    (i, t - i as f64)
}

// ---------------------------------------------------------------------------
// Primitive
// ---------------------------------------------------------------------------

/// Shared-transform linear marginals. In the delegation reading
/// `dU/dx = b(state) - c(dec)` and `dV/dx = d(state) - c(dec)`; in the
/// persuasion reading `dU/dx = c(state) - b(dec)` and
/// `dV/dx = c(state) - d(dec)`. `c` always lives on the space partitions and
/// delegation sets are drawn from; `b` and `d` on the other space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParts {
    pub b: PiecewisePoly,
    pub c: PiecewisePoly,
    pub d: PiecewisePoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PrimitiveKind {
    Linear(LinearParts),
    Custom { du: SeparableField, dv: SeparableField },
    Tabulated { du: BilinearGrid, dv: BilinearGrid },
}

/// Optional state functions added back when reporting un-normalized payoff
/// levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchors {
    pub agent: PiecewisePoly,
    pub principal: PiecewisePoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub kind: PrimitiveKind,
    pub orientation: Orientation,
    state_space: (f64, f64),
    decision_space: (f64, f64),
    state_dist: QuantileDistribution,
    pub anchors: Option<Anchors>,
    pub warnings: Vec<String>,
}

impl Primitive {
    /// Validated linear primitive. `b` and `c` must be increasing
    /// (strictly, up to flats which only warn); `d` must be continuous.
    /// The state distribution defaults to uniform on the state space.
    pub fn linear(
        b: PiecewisePoly,
        c: PiecewisePoly,
        d: PiecewisePoly,
        orientation: Orientation,
        state_dist: Option<QuantileDistribution>,
    ) -> Result<Primitive> {
        for (name, p) in [("b", &b), ("c", &c), ("d", &d)] {
            if p.degree() > MAX_POLY_DEGREE {
                return Err(Error::Invalid(format!(
                    "{name} has degree {} > {MAX_POLY_DEGREE}",
                    p.degree()
                )));
            }
        }
        let mut warnings = Vec::new();
        for (name, p) in [("b", &b), ("c", &c)] {
            check_increasing(name, p, &mut warnings)?;
        }
        if !d.continuous(1e-9) {
            return Err(Error::Invalid("d must be continuous".into()));
        }
        if (b.lo() - d.lo()).abs() > 1e-9 || (b.hi() - d.hi()).abs() > 1e-9 {
            return Err(Error::DomainMismatch(format!(
                "b and d must share a domain, got [{}, {}] vs [{}, {}]",
                b.lo(),
                b.hi(),
                d.lo(),
                d.hi()
            )));
        }
        let (state_space, decision_space) = match orientation {
            Orientation::Delegation => (b.domain(), c.domain()),
            Orientation::Persuasion => (c.domain(), b.domain()),
        };
        let state_dist = match state_dist {
            Some(sd) => {
                let sup = sd.support();
                if (sup.0 - state_space.0).abs() > 1e-9 || (sup.1 - state_space.1).abs() > 1e-9 {
                    return Err(Error::DomainMismatch(format!(
                        "state distribution support [{}, {}] must equal the state space [{}, {}]",
                        sup.0, sup.1, state_space.0, state_space.1
                    )));
                }
                sd
            }
            None => QuantileDistribution::uniform(state_space.0, state_space.1),
        };
        let mut prim = Primitive {
            kind: PrimitiveKind::Linear(LinearParts { b, c, d }),
            orientation,
            state_space,
            decision_space,
            state_dist,
            anchors: None,
            warnings,
        };
        prim.check_field_monotonicity();
        Ok(prim)
    }

    /// Primitive from explicit separable marginal fields.
    pub fn custom(
        du: SeparableField,
        dv: SeparableField,
        orientation: Orientation,
        state_dist: Option<QuantileDistribution>,
    ) -> Result<Primitive> {
        if du.state_domain() != dv.state_domain() || du.decision_domain() != dv.decision_domain() {
            return Err(Error::DomainMismatch("du and dv must share domains".into()));
        }
        let state_space = du.state_domain();
        let decision_space = du.decision_domain();
        let state_dist = state_dist
            .unwrap_or_else(|| QuantileDistribution::uniform(state_space.0, state_space.1));
        let mut prim = Primitive {
            kind: PrimitiveKind::Custom { du, dv },
            orientation,
            state_space,
            decision_space,
            state_dist,
            anchors: None,
            warnings: Vec::new(),
        };
        prim.check_field_monotonicity();
        Ok(prim)
    }

    /// Primitive from sampled grids.
    pub fn tabulated(
        du: BilinearGrid,
        dv: BilinearGrid,
        orientation: Orientation,
    ) -> Result<Primitive> {
        du.validate()?;
        dv.validate()?;
        if du.state_range != dv.state_range || du.decision_range != dv.decision_range {
            return Err(Error::DomainMismatch("du and dv must share ranges".into()));
        }
        let state_space = du.state_range;
        let decision_space = du.decision_range;
        let mut prim = Primitive {
            kind: PrimitiveKind::Tabulated { du, dv },
            orientation,
            state_space,
            decision_space,
            state_dist: QuantileDistribution::uniform(state_space.0, state_space.1),
            anchors: None,
            warnings: Vec::new(),
        };
        prim.check_field_monotonicity();
        Ok(prim)
    }

    pub fn with_anchors(mut self, anchors: Anchors) -> Primitive {
        self.anchors = Some(anchors);
        self
    }

    pub fn state_space(&self) -> (f64, f64) {
        self.state_space
    }

    pub fn decision_space(&self) -> (f64, f64) {
        self.decision_space
    }

    pub fn state_dist(&self) -> &QuantileDistribution {
        &self.state_dist
    }

    pub(crate) fn set_state_dist(&mut self, dist: QuantileDistribution) {
        self.state_dist = dist;
    }

    /// The space delegation sets / monotone partitions live on: the decision
    /// space of a delegation primitive, the state space of a persuasion one.
    pub fn pi_space(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::Delegation => self.decision_space,
            Orientation::Persuasion => self.state_space,
        }
    }

    pub fn linear_parts(&self) -> Option<&LinearParts> {
        match &self.kind {
            PrimitiveKind::Linear(parts) => Some(parts),
            _ => None,
        }
    }

    /// Agent marginal `dU/dx` at (state, decision).
    pub fn du_dx(&self, state: f64, dec: f64) -> f64 {
        match (&self.kind, self.orientation) {
            (PrimitiveKind::Linear(p), Orientation::Delegation) => p.b.eval(state) - p.c.eval(dec),
            (PrimitiveKind::Linear(p), Orientation::Persuasion) => p.c.eval(state) - p.b.eval(dec),
            (PrimitiveKind::Custom { du, .. }, _) => du.eval(state, dec),
            (PrimitiveKind::Tabulated { du, .. }, _) => du.eval(state, dec),
        }
    }

    /// Principal marginal `dV/dx` at (state, decision).
    pub fn dv_dx(&self, state: f64, dec: f64) -> f64 {
        match (&self.kind, self.orientation) {
            (PrimitiveKind::Linear(p), Orientation::Delegation) => p.d.eval(state) - p.c.eval(dec),
            (PrimitiveKind::Linear(p), Orientation::Persuasion) => p.c.eval(state) - p.d.eval(dec),
            (PrimitiveKind::Custom { dv, .. }, _) => dv.eval(state, dec),
            (PrimitiveKind::Tabulated { dv, .. }, _) => dv.eval(state, dec),
        }
    }

    /// Agent marginal as a piecewise polynomial in the decision at a fixed
    /// state (None for tabulated primitives, which use their own slices).
    pub fn du_decision_slice(&self, state: f64) -> Option<PiecewisePoly> {
        match (&self.kind, self.orientation) {
            (PrimitiveKind::Linear(p), Orientation::Delegation) => {
                Some(p.c.scale(-1.0).add_scalar(p.b.eval(state)))
            }
            (PrimitiveKind::Linear(p), Orientation::Persuasion) => {
                Some(p.b.scale(-1.0).add_scalar(p.c.eval(state)))
            }
            (PrimitiveKind::Custom { du, .. }, _) => Some(du.decision_slice(state)),
            (PrimitiveKind::Tabulated { .. }, _) => None,
        }
    }

    pub fn dv_decision_slice(&self, state: f64) -> Option<PiecewisePoly> {
        match (&self.kind, self.orientation) {
            (PrimitiveKind::Linear(p), Orientation::Delegation) => {
                Some(p.c.scale(-1.0).add_scalar(p.d.eval(state)))
            }
            (PrimitiveKind::Linear(p), Orientation::Persuasion) => {
                Some(p.d.scale(-1.0).add_scalar(p.c.eval(state)))
            }
            (PrimitiveKind::Custom { dv, .. }, _) => Some(dv.decision_slice(state)),
            (PrimitiveKind::Tabulated { .. }, _) => None,
        }
    }

    /// Agent marginal in the decision with the state averaged over `[a, b]`.
    pub fn du_pooled_slice(&self, a: f64, b: f64) -> Option<PiecewisePoly> {
        match (&self.kind, self.orientation) {
            (PrimitiveKind::Linear(p), Orientation::Persuasion) => {
                let m = p.c.mean_on(a, b).ok()?;
                Some(p.b.scale(-1.0).add_scalar(m))
            }
            (PrimitiveKind::Linear(p), Orientation::Delegation) => {
                let m = p.b.mean_on(a, b).ok()?;
                Some(p.c.scale(-1.0).add_scalar(m))
            }
            (PrimitiveKind::Custom { du, .. }, _) => Some(du.pooled_decision_slice(a, b)),
            (PrimitiveKind::Tabulated { .. }, _) => None,
        }
    }

    pub fn dv_pooled_slice(&self, a: f64, b: f64) -> Option<PiecewisePoly> {
        match (&self.kind, self.orientation) {
            (PrimitiveKind::Linear(p), Orientation::Persuasion) => {
                let m = p.c.mean_on(a, b).ok()?;
                Some(p.d.scale(-1.0).add_scalar(m))
            }
            (PrimitiveKind::Linear(p), Orientation::Delegation) => {
                let m = p.d.mean_on(a, b).ok()?;
                Some(p.c.scale(-1.0).add_scalar(m))
            }
            (PrimitiveKind::Custom { dv, .. }, _) => Some(dv.pooled_decision_slice(a, b)),
            (PrimitiveKind::Tabulated { .. }, _) => None,
        }
    }

    // Supermodularity / concavity of the agent marginal on a 64x64 grid,
    // recorded as warnings: flats are expected for atom-induced primitives.
    fn check_field_monotonicity(&mut self) {
        let n = 64;
        let (slo, shi) = self.state_space;
        let (dlo, dhi) = self.decision_space;
        let mut weak_theta = false;
        let mut bad_theta = false;
        let mut weak_x = false;
        let mut bad_x = false;
        // in both problems the agent marginal must increase in the state and
        // decrease in the decision
        let (sign_theta, sign_x) = (1.0, -1.0);
        for i in 0..=n {
            let s = slo + (shi - slo) * i as f64 / n as f64;
            for j in 0..n {
                let x0 = dlo + (dhi - dlo) * j as f64 / n as f64;
                let x1 = dlo + (dhi - dlo) * (j + 1) as f64 / n as f64;
                let diff = sign_x * (self.du_dx(s, x1) - self.du_dx(s, x0));
                if diff < -1e-9 {
                    bad_x = true;
                } else if diff < 1e-12 {
                    weak_x = true;
                }
            }
        }
        for j in 0..=n {
            let x = dlo + (dhi - dlo) * j as f64 / n as f64;
            for i in 0..n {
                let s0 = slo + (shi - slo) * i as f64 / n as f64;
                let s1 = slo + (shi - slo) * (i + 1) as f64 / n as f64;
                let diff = sign_theta * (self.du_dx(s1, x) - self.du_dx(s0, x));
                if diff < -1e-9 {
                    bad_theta = true;
                } else if diff < 1e-12 {
                    weak_theta = true;
                }
            }
        }
        if bad_theta {
            self.warnings.push("agent marginal decreases in the state on the validation grid".into());
        } else if weak_theta {
            self.warnings.push("agent marginal is only weakly increasing in the state".into());
        }
        if bad_x {
            self.warnings.push("agent marginal increases in the decision on the validation grid".into());
        } else if weak_x {
            self.warnings.push("agent marginal is only weakly decreasing in the decision".into());
        }
    }
}

fn check_increasing(name: &str, p: &PiecewisePoly, warnings: &mut Vec<String>) -> Result<()> {
    let min_slope = p.min_slope_on_grid(64);
    if min_slope < -1e-12 {
        return Err(Error::NonMonotone(format!(
            "{name} must be increasing; slope reaches {min_slope}"
        )));
    }
    for &bp in p.breakpoints() {
        if p.eval_right(bp) < p.eval_left(bp) - 1e-12 {
            return Err(Error::NonMonotone(format!("{name} jumps down at {bp}")));
        }
    }
    if min_slope <= 1e-12 {
        warnings.push(format!("{name} is only weakly increasing (flat somewhere)"));
    }
    Ok(())
}

/// Construct a validated linear primitive (uniform state by default).
pub fn make_linear_primitive(
    b: PiecewisePoly,
    c: PiecewisePoly,
    d: PiecewisePoly,
    orientation: Orientation,
) -> Result<Primitive> {
    Primitive::linear(b, c, d, orientation, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_bias_primitive_is_accepted() {
        // b(t) = t, c(x) = x, d(t) = t + 0.1
        let b = PiecewisePoly::identity(0.0, 1.0);
        let c = PiecewisePoly::identity(0.0, 1.0);
        let d = PiecewisePoly::affine(0.0, 1.0, 0.1, 1.0);
        let p = make_linear_primitive(b, c, d, Orientation::Delegation).unwrap();
        assert!(p.warnings.is_empty(), "{:?}", p.warnings);
        assert_eq!(p.pi_space(), (0.0, 1.0));
        assert!((p.du_dx(0.3, 0.5) - (0.3 - 0.5)).abs() < 1e-15);
        assert!((p.dv_dx(0.3, 0.5) - (0.4 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn decreasing_c_is_rejected() {
        let b = PiecewisePoly::identity(0.0, 1.0);
        let c = PiecewisePoly::affine(0.0, 1.0, 1.0, -1.0);
        let d = PiecewisePoly::identity(0.0, 1.0);
        let err = make_linear_primitive(b, c, d, Orientation::Delegation).unwrap_err();
        assert!(matches!(err, Error::NonMonotone(_)));
    }

    #[test]
    fn regulation_primitive_with_uniform_cost() {
        // dU/dx = 1 + t - 2x, dV/dx = 2t - 2x (principal payoff doubled to
        // share the decision transform)
        let b = PiecewisePoly::affine(0.0, 1.0, 1.0, 1.0);
        let c = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let d = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let p = make_linear_primitive(b, c, d, Orientation::Delegation).unwrap();
        assert!((p.du_dx(0.25, 0.5) - (1.25 - 1.0)).abs() < 1e-15);
        assert!((p.dv_dx(0.25, 0.5) - (0.5 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn flat_b_warns_but_passes() {
        let b = PiecewisePoly::constant(0.0, 1.0, 0.0);
        let c = PiecewisePoly::identity(0.0, 1.0);
        let d = PiecewisePoly::identity(0.0, 1.0);
        let p = make_linear_primitive(b, c, d, Orientation::Delegation).unwrap();
        assert!(p.warnings.iter().any(|w| w.contains("weakly")));
    }

    #[test]
    fn separable_field_slices() {
        // field(s, x) = s * 1 + 1 * (-x) = s - x
        let f = SeparableField::from_difference(
            &PiecewisePoly::identity(0.0, 1.0),
            &PiecewisePoly::identity(0.0, 1.0),
        );
        assert!((f.eval(0.3, 0.8) + 0.5).abs() < 1e-15);
        let slice = f.decision_slice(0.3);
        assert!((slice.eval(0.8) + 0.5).abs() < 1e-15);
        let pooled = f.pooled_decision_slice(0.0, 1.0);
        assert!((pooled.eval(0.25) - 0.25).abs() < 1e-15);
        let t = f.transposed_negated();
        assert!((t.eval(0.8, 0.3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bilinear_grid_reproduces_bilinear_functions() {
        let g = BilinearGrid::from_fn((0.0, 1.0), (0.0, 1.0), 17, 17, |s, x| 2.0 * (s - x));
        assert!((g.eval(0.31, 0.57) - 2.0 * (0.31 - 0.57)).abs() < 1e-12);
        let pooled = g.pooled_decision_slice(0.0, 1.0 / 3.0);
        // mean of 2(s - x) over s in [0, 1/3] is 2(1/6 - x)
        assert!((pooled.eval(0.5) - 2.0 * (1.0 / 6.0 - 0.5)).abs() < 1e-12);
        let t = g.transposed_negated();
        assert!((t.eval(0.57, 0.31) + g.eval(0.31, 0.57)).abs() < 1e-12);
    }
}
