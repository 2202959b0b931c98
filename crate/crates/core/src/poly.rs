//! Piecewise polynomials with exact coefficient-level calculus.
//!
//! A [`PiecewisePoly`] is a list of polynomial pieces over consecutive
//! intervals of a common domain. Coefficients are stored in ascending degree
//! in the *local* coordinate `t - left_break` of each piece, which keeps
//! evaluation well conditioned away from the origin. Evaluation at an
//! interior breakpoint uses the right piece; left limits are available
//! separately, so jump discontinuities (steps, atoms of a quantile) are
//! first-class.
//!
//! Derivatives, antiderivatives, and definite integrals are computed on the
//! coefficients directly, never by quadrature. Integrals of *composed*
//! functions (e.g. `outer(inner(x)) * w(x)`) are computed by splitting the
//! range at every breakpoint and preimage and applying Gauss-Legendre of
//! order 32 per segment, which is exact for polynomial integrands up to
//! degree 63.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Raw polynomial helpers (ascending-degree coefficient vectors).
// ---------------------------------------------------------------------------

pub(crate) fn poly_eval(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

pub(crate) fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs[1..]
        .iter()
        .enumerate()
        .map(|(k, c)| c * (k + 1) as f64)
        .collect()
}

pub(crate) fn poly_antiderivative(coeffs: &[f64], constant: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(constant);
    for (k, c) in coeffs.iter().enumerate() {
        out.push(c / (k + 1) as f64);
    }
    out
}

pub(crate) fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

pub(crate) fn poly_scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|c| c * k).collect()
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Re-anchor `p(t)` to `p(u + shift)`, i.e. coefficients in the coordinate
/// `u = t - shift`.
pub(crate) fn poly_shift(coeffs: &[f64], shift: f64) -> Vec<f64> {
    // Horner-style synthetic shift: repeatedly divide by (u) after substituting.
    let mut out = coeffs.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            out[j] = out[j] + shift * out[j + 1];
        }
    }
    out
}

/// Substitute `t = alpha*u + beta` into `p(t)`, returning coefficients in `u`.
pub(crate) fn poly_affine_substitute(coeffs: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    // p(alpha*u + beta): first shift by beta, then scale powers by alpha^k.
    let shifted = poly_shift(coeffs, beta);
    shifted
        .iter()
        .enumerate()
        .map(|(k, c)| c * alpha.powi(k as i32))
        .collect()
}

fn poly_degree(coeffs: &[f64]) -> usize {
    let mut d = coeffs.len().saturating_sub(1);
    while d > 0 && coeffs[d] == 0.0 {
        d -= 1;
    }
    d
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes (order 32), exact for polynomial degree <= 63.
// ---------------------------------------------------------------------------

fn legendre_value_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre_32() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 32usize;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            // Chebyshev initial guess, then Newton.
            let mut x =
                (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_value_and_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_value_and_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push((x, w));
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    })
}

/// Integrate a smooth function over [a, b] with chunked 32-point Gauss-Legendre.
pub(crate) fn gauss_integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let len = b - a;
    let chunks = (len / 0.25).ceil().max(1.0) as usize;
    let h = len / chunks as f64;
    let table = gauss_legendre_32();
    let mut total = 0.0;
    for k in 0..chunks {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for &(x, w) in table {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

// ---------------------------------------------------------------------------
// PiecewisePoly
// ---------------------------------------------------------------------------

/// Piecewise polynomial on `[lo, hi]`.
///
/// `breaks` is strictly increasing with `coeffs.len() == breaks.len() - 1`;
/// piece `i` covers `[breaks[i], breaks[i+1]]` with coefficients in the local
/// coordinate `t - breaks[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::Invalid("need at least two breakpoints".into()));
        }
        if coeffs.len() + 1 != breaks.len() {
            return Err(Error::Invalid(format!(
                "piece count {} must equal breakpoint count {} minus one",
                coeffs.len(),
                breaks.len()
            )));
        }
        for w in breaks.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Invalid(format!(
                    "breakpoints must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        for c in &coeffs {
            if c.is_empty() {
                return Err(Error::Invalid("empty coefficient list".into()));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("non-finite coefficient".into()));
            }
        }
        Ok(Self { breaks, coeffs })
    }

    /// Constant `v` on `[lo, hi]`.
    pub fn constant(lo: f64, hi: f64, v: f64) -> Self {
        Self { breaks: vec![lo, hi], coeffs: vec![vec![v]] }
    }

    /// Affine `value_at_lo + slope * (t - lo)` on `[lo, hi]`.
    pub fn affine(lo: f64, hi: f64, value_at_lo: f64, slope: f64) -> Self {
        Self { breaks: vec![lo, hi], coeffs: vec![vec![value_at_lo, slope]] }
    }

    /// The identity map on `[lo, hi]`.
    pub fn identity(lo: f64, hi: f64) -> Self {
        Self::affine(lo, hi, lo, 1.0)
    }

    /// Build from pieces given in the *global* coordinate.
    pub fn from_global_pieces(breaks: Vec<f64>, global: Vec<Vec<f64>>) -> Result<Self> {
        let local = global
            .iter()
            .zip(breaks.iter())
            .map(|(c, &a)| poly_shift(c, a))
            .collect();
        Self::new(breaks, local)
    }

    pub fn lo(&self) -> f64 {
        self.breaks[0]
    }

    pub fn hi(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo(), self.hi())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn piece_coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn num_pieces(&self) -> usize {
        self.coeffs.len()
    }

    /// Highest per-piece degree (trailing zero coefficients ignored).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| poly_degree(c)).max().unwrap_or(0)
    }

    /// Index of the piece evaluated at `x`: the right piece at interior
    /// breakpoints, the last piece at the upper endpoint.
    pub fn piece_index(&self, x: f64) -> usize {
        let n = self.coeffs.len();
        match self.breaks.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// Evaluate at `x`. Arguments within `1e-9` outside the domain are
    /// clamped; anything farther out is a programming error.
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(
            x >= self.lo() - 1e-9 && x <= self.hi() + 1e-9,
            "eval at {x} outside [{}, {}]",
            self.lo(),
            self.hi()
        );
        let x = x.clamp(self.lo(), self.hi());
        let i = self.piece_index(x);
        poly_eval(&self.coeffs[i], x - self.breaks[i])
    }

    /// Left limit at `x` (equals `eval` except at breakpoints of a
    /// discontinuous function).
    pub fn eval_left(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo(), self.hi());
        if x <= self.lo() {
            return self.eval(self.lo());
        }
        let i = self.piece_index(x);
        if x == self.breaks[i] && i > 0 {
            let j = i - 1;
            poly_eval(&self.coeffs[j], x - self.breaks[j])
        } else {
            poly_eval(&self.coeffs[i], x - self.breaks[i])
        }
    }

    /// Right limit at `x`; same as `eval` everywhere in the domain.
    pub fn eval_right(&self, x: f64) -> f64 {
        self.eval(x)
    }

    /// One-sided slopes at `x`.
    pub fn right_slope(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo(), self.hi());
        let i = if x >= self.hi() { self.coeffs.len() - 1 } else { self.piece_index(x) };
        poly_eval(&poly_derivative(&self.coeffs[i]), x - self.breaks[i])
    }

    pub fn left_slope(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo(), self.hi());
        let i = self.piece_index(x);
        if x == self.breaks[i] && i > 0 {
            let j = i - 1;
            poly_eval(&poly_derivative(&self.coeffs[j]), x - self.breaks[j])
        } else {
            poly_eval(&poly_derivative(&self.coeffs[i]), x - self.breaks[i])
        }
    }

    /// Whether adjacent pieces agree at every interior breakpoint.
    pub fn continuous(&self, tol: f64) -> bool {
        self.breaks[1..self.breaks.len() - 1]
            .iter()
            .all(|&b| (self.eval_left(b) - self.eval_right(b)).abs() <= tol)
    }

    /// Largest jump across interior breakpoints.
    pub fn max_jump(&self) -> f64 {
        self.breaks[1..self.breaks.len() - 1]
            .iter()
            .map(|&b| (self.eval_left(b) - self.eval_right(b)).abs())
            .fold(0.0, f64::max)
    }

    /// Exact derivative, piece by piece.
    pub fn derivative(&self) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breaks.clone(),
            coeffs: self.coeffs.iter().map(|c| poly_derivative(c)).collect(),
        }
    }

    /// Exact antiderivative vanishing at the lower domain endpoint; the
    /// integration constants are chained so the result is continuous.
    pub fn antiderivative(&self) -> PiecewisePoly {
        let mut acc = 0.0;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let anti = poly_antiderivative(c, acc);
            let len = self.breaks[i + 1] - self.breaks[i];
            acc = poly_eval(&anti, len);
            coeffs.push(anti);
        }
        PiecewisePoly { breaks: self.breaks.clone(), coeffs }
    }

    /// Exact definite integral over `[a, b]` (coefficient arithmetic).
    pub fn definite_integral(&self, a: f64, b: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let tol = 1e-9 * (1.0 + hi.abs() + lo.abs());
        for v in [a, b] {
            if v < lo - tol || v > hi + tol {
                return Err(Error::OutOfDomain { value: v, lo, hi });
            }
        }
        let anti = self.antiderivative();
        Ok(anti.eval(b) - anti.eval(a))
    }

    /// Definite integral with the integrand treated as zero outside the
    /// domain (integration bounds are clamped).
    pub fn integral_clamped(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.domain();
        let a = a.clamp(lo, hi);
        let b = b.clamp(lo, hi);
        if b <= a {
            return 0.0;
        }
        self.definite_integral(a, b).expect("clamped bounds are in domain")
    }

    /// Mean value over `[a, b]`.
    pub fn mean_on(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Err(Error::Invalid(format!("empty interval [{a}, {b}]")));
        }
        Ok(self.definite_integral(a, b)? / (b - a))
    }

    /// Substitution `q(u) = p(alpha*u + beta)` with `alpha != 0`; the domain
    /// maps accordingly (and reverses when `alpha < 0`).
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Result<PiecewisePoly> {
        if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Invalid("compose_affine needs a finite alpha != 0".into()));
        }
        let inv = |t: f64| (t - beta) / alpha;
        if alpha > 0.0 {
            let breaks: Vec<f64> = self.breaks.iter().map(|&t| inv(t)).collect();
            let coeffs = self
                .coeffs
                .iter()
                .map(|c| {
                    // local u-coordinate: t - a = alpha * (u - u_a)
                    poly_affine_substitute(c, alpha, 0.0)
                })
                .collect();
            PiecewisePoly::new(breaks, coeffs)
        } else {
            let breaks: Vec<f64> = self.breaks.iter().rev().map(|&t| inv(t)).collect();
            let mut coeffs = Vec::with_capacity(self.coeffs.len());
            for (i, c) in self.coeffs.iter().enumerate().rev() {
                // piece over [t_i, t_{i+1}] maps to [inv(t_{i+1}), inv(t_i)];
                // local coordinate u - inv(t_{i+1}): t - t_i = alpha*u' + (t_{i+1} - t_i)
                let len = self.breaks[i + 1] - self.breaks[i];
                coeffs.push(poly_affine_substitute(c, alpha, len));
            }
            PiecewisePoly::new(breaks, coeffs)
        }
    }

    /// Pointwise combination on merged breakpoints. Domains must agree.
    fn zip_with(&self, other: &PiecewisePoly, f: impl Fn(&[f64], &[f64]) -> Vec<f64>) -> PiecewisePoly {
        let tol = 1e-9 * (1.0 + self.hi().abs() + self.lo().abs());
        assert!(
            (self.lo() - other.lo()).abs() <= tol && (self.hi() - other.hi()).abs() <= tol,
            "domain mismatch: [{}, {}] vs [{}, {}]",
            self.lo(),
            self.hi(),
            other.lo(),
            other.hi()
        );
        let mut breaks: Vec<f64> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 0.0);
        let mut coeffs = Vec::with_capacity(breaks.len() - 1);
        for i in 0..breaks.len() - 1 {
            let a = breaks[i];
            let pi = self.piece_index_for_segment(a);
            let qi = other.piece_index_for_segment(a);
            let pc = poly_shift(&self.coeffs[pi], a - self.breaks[pi]);
            let qc = poly_shift(&other.coeffs[qi], a - other.breaks[qi]);
            coeffs.push(f(&pc, &qc));
        }
        PiecewisePoly { breaks, coeffs }
    }

    fn piece_index_for_segment(&self, seg_lo: f64) -> usize {
        let n = self.coeffs.len();
        let x = seg_lo.clamp(self.lo(), self.hi());
        match self.breaks.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    pub fn add(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.zip_with(other, poly_add)
    }

    pub fn sub(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.zip_with(other, |a, b| poly_add(a, &poly_scale(b, -1.0)))
    }

    pub fn mul(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.zip_with(other, poly_mul)
    }

    pub fn scale(&self, k: f64) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breaks.clone(),
            coeffs: self.coeffs.iter().map(|c| poly_scale(c, k)).collect(),
        }
    }

    pub fn add_scalar(&self, k: f64) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breaks.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    c[0] += k;
                    c
                })
                .collect(),
        }
    }

    /// Restrict to `[a, b] ⊆ domain`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<PiecewisePoly> {
        let (lo, hi) = self.domain();
        if a < lo - 1e-9 || b > hi + 1e-9 || b <= a {
            return Err(Error::OutOfDomain { value: if a < lo { a } else { b }, lo, hi });
        }
        let a = a.max(lo);
        let b = b.min(hi);
        let mut breaks = vec![a];
        let mut coeffs = Vec::new();
        for i in 0..self.coeffs.len() {
            let (plo, phi) = (self.breaks[i], self.breaks[i + 1]);
            if phi <= a || plo >= b {
                continue;
            }
            let seg_lo = plo.max(a);
            let seg_hi = phi.min(b);
            if seg_hi <= *breaks.last().unwrap() {
                continue;
            }
            coeffs.push(poly_shift(&self.coeffs[i], seg_lo - plo));
            breaks.push(seg_hi);
        }
        PiecewisePoly::new(breaks, coeffs)
    }

    /// Concatenate with `other`, whose domain must start where `self` ends.
    pub fn concat(&self, other: &PiecewisePoly) -> Result<PiecewisePoly> {
        if (self.hi() - other.lo()).abs() > 1e-9 * (1.0 + self.hi().abs()) {
            return Err(Error::DomainMismatch(format!(
                "cannot concatenate [{},{}] with [{},{}]",
                self.lo(),
                self.hi(),
                other.lo(),
                other.hi()
            )));
        }
        let mut breaks = self.breaks.clone();
        breaks.extend_from_slice(&other.breaks[1..]);
        let mut coeffs = self.coeffs.clone();
        coeffs.extend_from_slice(&other.coeffs);
        PiecewisePoly::new(breaks, coeffs)
    }

    /// Minimum of the derivative sampled on an `n`-point grid per piece
    /// (used for monotonicity validation).
    pub fn min_slope_on_grid(&self, n: usize) -> f64 {
        let d = self.derivative();
        let mut m = f64::INFINITY;
        for i in 0..d.coeffs.len() {
            let (a, b) = (d.breaks[i], d.breaks[i + 1]);
            for k in 0..=n {
                let x = a + (b - a) * k as f64 / n as f64;
                let t = x - d.breaks[i];
                m = m.min(poly_eval(&d.coeffs[i], t));
            }
        }
        m
    }

    /// Solve `p(x) = v` for a nondecreasing `p`, returning the maximal
    /// interval `[xl, xr]` of solutions clamped to the domain. For `v`
    /// outside the range this returns the appropriate domain endpoint twice.
    pub fn solve_nondecreasing(&self, v: f64) -> (f64, f64) {
        let (lo, hi) = self.domain();
        let flo = self.eval_right(lo);
        let fhi = self.eval_left(hi);
        if v <= flo {
            return (lo, if v < flo { lo } else { self.upper_solution(v, lo) });
        }
        if v >= fhi {
            return (if v > fhi { hi } else { self.lower_solution(v, hi) }, hi);
        }
        (self.lower_solution(v, lo), self.upper_solution(v, hi))
    }

    // First x with p(x) >= v (p nondecreasing). Affine pieces solve in
    // closed form; higher degrees bisect within the piece.
    fn lower_solution(&self, v: f64, fallback: f64) -> f64 {
        for i in 0..self.coeffs.len() {
            let (a, b) = (self.breaks[i], self.breaks[i + 1]);
            let c = &self.coeffs[i];
            let vl = poly_eval(c, 0.0);
            if vl >= v {
                return a;
            }
            let vr = poly_eval(c, b - a);
            if vr >= v {
                if poly_degree(c) <= 1 {
                    let slope = c.get(1).copied().unwrap_or(0.0);
                    return a + (v - c[0]) / slope;
                }
                return bisect_in_piece(c, 0.0, b - a, v, true) + a;
            }
        }
        fallback
    }

    // Last x with p(x) <= v.
    fn upper_solution(&self, v: f64, fallback: f64) -> f64 {
        for i in (0..self.coeffs.len()).rev() {
            let (a, b) = (self.breaks[i], self.breaks[i + 1]);
            let c = &self.coeffs[i];
            let vr = poly_eval(c, b - a);
            if vr <= v {
                return b;
            }
            let vl = poly_eval(c, 0.0);
            if vl <= v {
                if poly_degree(c) <= 1 {
                    let slope = c.get(1).copied().unwrap_or(0.0);
                    return a + (v - c[0]) / slope;
                }
                return bisect_in_piece(c, 0.0, b - a, v, false) + a;
            }
        }
        fallback
    }

    /// Roots of `p` inside `[a, b]`, located by per-piece sign scanning and
    /// bisection. Tangential (non-crossing) roots may be missed; callers use
    /// this for residual scans where crossings are what matter.
    pub fn sign_change_roots(&self, a: f64, b: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        let samples = 64;
        for i in 0..self.coeffs.len() {
            let plo = self.breaks[i].max(a);
            let phi = self.breaks[i + 1].min(b);
            if phi <= plo {
                continue;
            }
            let mut prev_x = plo;
            let mut prev_v = self.eval_right(plo);
            for k in 1..=samples {
                let x = plo + (phi - plo) * k as f64 / samples as f64;
                let v = if k == samples { self.eval_left(phi) } else { self.eval(x) };
                if prev_v == 0.0 {
                    roots.push(prev_x);
                } else if prev_v * v < 0.0 {
                    let (mut xa, mut xb) = (prev_x, x);
                    let mut va = prev_v;
                    for _ in 0..100 {
                        let xm = 0.5 * (xa + xb);
                        let vm = self.eval(xm);
                        if va * vm <= 0.0 {
                            xb = xm;
                        } else {
                            xa = xm;
                            va = vm;
                        }
                    }
                    roots.push(0.5 * (xa + xb));
                }
                prev_x = x;
                prev_v = v;
            }
        }
        roots.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        roots
    }

    /// Interior critical points (roots of the derivative) inside `[a, b]`.
    pub fn critical_points(&self, a: f64, b: f64) -> Vec<f64> {
        self.derivative().sign_change_roots(a, b)
    }

    /// Maximum value and the points realizing it (within `tie_tol`) on
    /// `[a, b]`. Candidates are interval ends, piece breaks, and critical
    /// points; exact for polynomial pieces.
    pub fn argmax_on(&self, a: f64, b: f64, tie_tol: f64) -> (f64, Vec<f64>) {
        let mut candidates = vec![a, b];
        for &bp in &self.breaks {
            if bp > a && bp < b {
                candidates.push(bp);
            }
        }
        candidates.extend(self.critical_points(a, b));
        let mut best = f64::NEG_INFINITY;
        for &x in &candidates {
            // at interior breakpoints both one-sided values count
            best = best.max(self.eval(x)).max(self.eval_left(x));
        }
        let mut witnesses: Vec<f64> = candidates
            .into_iter()
            .filter(|&x| self.eval(x) >= best - tie_tol || self.eval_left(x) >= best - tie_tol)
            .collect();
        witnesses.sort_by(f64::total_cmp);
        witnesses.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
        (best, witnesses)
    }

    /// Minimum value and its location on `[a, b]` (grid of candidates as in
    /// `argmax_on`).
    pub fn min_on(&self, a: f64, b: f64) -> (f64, f64) {
        let (neg_max, wit) = self.scale(-1.0).argmax_on(a, b, 0.0);
        (-neg_max, wit[0])
    }
}

// bisect a nondecreasing polynomial piece for p(t) = v on [t0, t1];
// `lower` picks the infimum of {p >= v}, otherwise the supremum of {p <= v}
fn bisect_in_piece(coeffs: &[f64], t0: f64, t1: f64, v: f64, lower: bool) -> f64 {
    let (mut a, mut b) = (t0, t1);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        let pm = poly_eval(coeffs, m);
        if (lower && pm >= v) || (!lower && pm > v) {
            b = m;
        } else {
            a = m;
        }
        if b - a <= 1e-15 * (1.0 + b.abs()) {
            break;
        }
    }
    if lower {
        b
    } else {
        a
    }
}

/// Integrate a smooth pair of functions over [a, b] in one pass.
pub(crate) fn gauss_integrate_pair<F: FnMut(f64) -> (f64, f64)>(
    a: f64,
    b: f64,
    mut f: F,
) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let len = b - a;
    let chunks = (len / 0.25).ceil().max(1.0) as usize;
    let h = len / chunks as f64;
    let table = gauss_legendre_32();
    let (mut t1, mut t2) = (0.0, 0.0);
    for k in 0..chunks {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for &(x, w) in table {
            let (v1, v2) = f(mid + half * x);
            t1 += w * v1 * half;
            t2 += w * v2 * half;
        }
    }
    (t1, t2)
}

/// Integral of `outer(inner(x)) * weight(x)` over `[a, b]` for nondecreasing
/// `inner`. The range is split at inner/weight breakpoints and at preimages
/// of outer breakpoints, then each smooth segment is integrated by
/// Gauss-Legendre (exact for polynomial pieces).
pub fn integrate_composed(
    outer: &PiecewisePoly,
    inner: &PiecewisePoly,
    weight: Option<&PiecewisePoly>,
    a: f64,
    b: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts = vec![a, b];
    for &bp in inner.breakpoints() {
        if bp > a && bp < b {
            cuts.push(bp);
        }
    }
    if let Some(w) = weight {
        for &bp in w.breakpoints() {
            if bp > a && bp < b {
                cuts.push(bp);
            }
        }
    }
    for &obp in outer.breakpoints() {
        let (xl, xr) = inner.solve_nondecreasing(obp);
        for x in [xl, xr] {
            if x > a && x < b {
                cuts.push(x);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (sa, sb) = (seg[0], seg[1]);
        if sb - sa < 1e-15 {
            continue;
        }
        total += gauss_integrate(sa, sb, |x| {
            let v = outer.eval(inner.eval(x));
            match weight {
                Some(w) => v * w.eval(x),
                None => v,
            }
        });
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> PiecewisePoly {
        // f(t) = t^2 on [0, 2], split at 1
        PiecewisePoly::from_global_pieces(vec![0.0, 1.0, 2.0], vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]])
            .unwrap()
    }

    #[test]
    fn eval_uses_right_piece_at_breakpoints() {
        let step = PiecewisePoly::new(vec![0.0, 0.7, 1.0], vec![vec![-0.5], vec![0.5]]).unwrap();
        assert_eq!(step.eval(0.7), 0.5);
        assert_eq!(step.eval_left(0.7), -0.5);
        assert_eq!(step.eval(1.0), 0.5);
        assert!(!step.continuous(1e-9));
        assert_eq!(step.max_jump(), 1.0);
    }

    #[test]
    fn antiderivative_of_constant_is_identity_map() {
        let one = PiecewisePoly::constant(0.0, 1.0, 1.0);
        let cdf = one.antiderivative();
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            assert!((cdf.eval(x) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn definite_integral_matches_hand_value() {
        // integral of (m - t) over [0, m] equals m^2/2; check m = 0.8
        let m = 0.8;
        let p = PiecewisePoly::affine(0.0, 1.0, m, -1.0);
        let v = p.definite_integral(0.0, m).unwrap();
        assert!((v - m * m / 2.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_quadratic() {
        // nu(m) = m^2 (2-k)/2 with k = 1 -> nu'(m) = m
        let k = 1.0;
        let nu = PiecewisePoly::from_global_pieces(vec![0.0, 1.0], vec![vec![0.0, 0.0, (2.0 - k) / 2.0]])
            .unwrap();
        let d = nu.derivative();
        for i in 0..10 {
            let m = 0.05 + 0.1 * i as f64;
            assert!((d.eval(m) - m * (2.0 - k)).abs() < 1e-8);
            // central finite difference cross-check
            let h = 1e-6;
            let fd = (nu.eval(m + h) - nu.eval(m - h)) / (2.0 * h);
            assert!((d.eval(m) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_of_antiderivative_roundtrip() {
        let p = quad();
        let round = p.antiderivative().derivative();
        for k in 0..=100 {
            let x = 2.0 * k as f64 / 100.0;
            assert!((p.eval(x) - round.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_affine_forward_and_reversed() {
        let p = quad();
        // q(u) = p(2u - 1): domain [0.5, 1.5], q(1) = p(1) = 1
        let q = p.compose_affine(2.0, -1.0).unwrap();
        assert!((q.lo() - 0.5).abs() < 1e-15);
        assert!((q.hi() - 1.5).abs() < 1e-15);
        for k in 0..=20 {
            let u = 0.5 + k as f64 / 20.0;
            assert!((q.eval(u) - p.eval(2.0 * u - 1.0)).abs() < 1e-12);
        }
        // reversal: r(u) = p(-u) on [-2, 0]
        let r = p.compose_affine(-1.0, 0.0).unwrap();
        for k in 0..=20 {
            let u = -2.0 + 2.0 * k as f64 / 20.0;
            assert!((r.eval(u) - p.eval(-u)).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn algebra_on_mismatched_breaks() {
        let p = quad();
        let q = PiecewisePoly::new(vec![0.0, 0.5, 2.0], vec![vec![1.0], vec![2.0]]).unwrap();
        let s = p.add(&q);
        assert!((s.eval(0.25) - (0.0625 + 1.0)).abs() < 1e-15);
        assert!((s.eval(1.5) - (2.25 + 2.0)).abs() < 1e-15);
        let m = p.mul(&q);
        assert!((m.eval(1.5) - 4.5).abs() < 1e-12);
    }

    #[test]
    fn solve_nondecreasing_handles_flats_and_jumps() {
        // flat at 0.5 on [0.3, 0.6]
        let p = PiecewisePoly::from_global_pieces(
            vec![0.0, 0.3, 0.6, 1.0],
            vec![vec![0.2, 1.0], vec![0.5], vec![-0.1, 1.0]],
        )
        .unwrap();
        let (xl, xr) = p.solve_nondecreasing(0.5);
        assert!((xl - 0.3).abs() < 1e-9);
        assert!((xr - 0.6).abs() < 1e-9);
        let (a, b) = p.solve_nondecreasing(0.25);
        assert!((a - 0.05).abs() < 1e-9 && (b - 0.05).abs() < 1e-9);
        // out of range clamps
        assert_eq!(p.solve_nondecreasing(5.0), (1.0, 1.0));
        assert_eq!(p.solve_nondecreasing(-5.0), (0.0, 0.0));
    }

    #[test]
    fn argmax_finds_interior_peak_and_ties() {
        // tent with peak at 0.7
        let tent = PiecewisePoly::from_global_pieces(
            vec![0.0, 0.7, 1.0],
            vec![vec![0.0, 0.5], vec![0.7, -0.5]],
        )
        .unwrap();
        let (m, w) = tent.argmax_on(0.0, 1.0, 1e-12);
        assert!((m - 0.35).abs() < 1e-12);
        assert!((w[0] - 0.7).abs() < 1e-9);
        // flat objective: every candidate ties
        let flat = PiecewisePoly::constant(0.0, 1.0, 0.0);
        let (m, w) = flat.argmax_on(0.0, 1.0, 1e-12);
        assert_eq!(m, 0.0);
        assert!(w.contains(&0.0) && w.contains(&1.0));
    }

    #[test]
    fn composed_integral_is_exact_for_polynomials() {
        // integral over [0,1] of nu(c(s)) ds with nu(m) = m^2, c(s) = 2s:
        // = integral 4 s^2 = 4/3
        let nu = PiecewisePoly::from_global_pieces(vec![0.0, 2.0], vec![vec![0.0, 0.0, 1.0]]).unwrap();
        let c = PiecewisePoly::affine(0.0, 1.0, 0.0, 2.0);
        let v = integrate_composed(&nu, &c, None, 0.0, 1.0);
        assert!((v - 4.0 / 3.0).abs() < 1e-13);
        // with a weight w(s) = s: integral 4 s^3 = 1
        let w = PiecewisePoly::identity(0.0, 1.0);
        let v = integrate_composed(&nu, &c, Some(&w), 0.0, 1.0);
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn restrict_and_concat() {
        let p = quad();
        let r = p.restrict(0.5, 1.5).unwrap();
        assert!((r.eval(0.75) - 0.5625).abs() < 1e-15);
        assert_eq!(r.domain(), (0.5, 1.5));
        let left = p.restrict(0.0, 1.0).unwrap();
        let right = p.restrict(1.0, 2.0).unwrap();
        let whole = left.concat(&right).unwrap();
        assert!((whole.eval(1.7) - p.eval(1.7)).abs() < 1e-15);
    }

    #[test]
    fn gauss_nodes_integrate_high_degree_exactly() {
        // x^40 over [0,1] = 1/41
        let v = gauss_integrate(0.0, 1.0, |x| x.powi(40));
        assert!((v - 1.0 / 41.0).abs() < 1e-15);
    }
}
