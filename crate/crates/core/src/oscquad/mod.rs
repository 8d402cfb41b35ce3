//! Oscillatory integrals `int a(y) exp(i F(y)/h) dy` with a degenerate critical
//! point at the origin: an adaptive numerical oracle, the closed-form leading
//! term, and the Gaussian pairing used to normalize WKB states.

mod gamma;

pub(crate) use gamma::gamma_ratio;
pub use gamma::gamma_real;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::func::{Bump, Poly1};
use crate::grid::GridFunction;
use crate::quadrature::GaussLegendre;

/// `(e^{i theta} + e^{i (-1)^{m+1} theta}) / 2`: `e^{i theta}` for odd `m`,
/// `cos theta` for even `m`.
pub fn mu_m(m: u32, theta: f64) -> Complex64 {
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    (Complex64::from_polar(1.0, theta) + Complex64::from_polar(1.0, sign * theta)) * 0.5
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub type DerivFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Real phase `F` whose derivative vanishes at 0 to order exactly `m`.
/// `derivs(k, y)` returns `F^{(k)}(y)`, with `k = 0` giving `F` itself.
#[derive(Clone)]
pub struct PhaseSpec {
    derivs: DerivFn,
    m: u32,
}

impl fmt::Debug for PhaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseSpec")
            .field("m", &self.m)
            .field("F^(m+1)(0)", &self.top_derivative())
            .finish()
    }
}

impl PhaseSpec {
    pub fn new(m: u32, derivs: DerivFn) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPhase("m must be at least 1".into()));
        }
        let spec = PhaseSpec { derivs, m };
        let top = spec.top_derivative();
        if !top.is_finite() || top == 0.0 {
            return Err(Error::InvalidPhase(format!(
                "F^({})(0) = {top} must be finite and nonzero",
                m + 1
            )));
        }
        let tol = 1e-10 * top.abs().max(1.0);
        for k in 1..=m as usize {
            let d = spec.deriv(k, 0.0);
            if d.abs() > tol {
                return Err(Error::InvalidPhase(format!(
                    "F^({k})(0) = {d:e} should vanish for m = {m}"
                )));
            }
        }
        Ok(spec)
    }

    /// Phase given by a polynomial; `m` is read off from the vanishing order of `F'`.
    pub fn polynomial(p: Poly1) -> Result<Self> {
        let m = p
            .derivative()
            .vanishing_order()
            .ok_or_else(|| Error::InvalidPhase("constant phase".into()))?;
        if m == 0 {
            return Err(Error::InvalidPhase("F'(0) != 0: no critical point at 0".into()));
        }
        PhaseSpec::new(m as u32, Arc::new(move |k, y| p.deriv_at(k, y)))
    }

    /// `c y^{m+1} / (m+1)`, i.e. `F'(y) = c y^m`.
    pub fn monomial(c: f64, m: u32) -> Result<Self> {
        PhaseSpec::polynomial(Poly1::monomial(c / (m as f64 + 1.0), m as usize + 1))
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn value(&self, y: f64) -> f64 {
        (self.derivs)(0, y)
    }

    pub fn deriv(&self, k: usize, y: f64) -> f64 {
        (self.derivs)(k, y)
    }

    /// `F^{(m+1)}(0)`.
    pub fn top_derivative(&self) -> f64 {
        self.deriv(self.m as usize + 1, 0.0)
    }

    pub fn negated(&self) -> Self {
        let d = self.derivs.clone();
        PhaseSpec {
            derivs: Arc::new(move |k, y| -d(k, y)),
            m: self.m,
        }
    }

    /// Checks that `F'` has no zero other than the origin on `[lo, hi]`.
    pub fn check_interval(&self, lo: f64, hi: f64) -> Result<()> {
        let n = 4000;
        for i in 0..=n {
            let y = lo + (hi - lo) * i as f64 / n as f64;
            if y != 0.0 && self.deriv(1, y) == 0.0 {
                return Err(Error::InvalidPhase(format!("F'({y}) = 0 away from the origin")));
            }
        }
        Ok(())
    }
}

/// Smooth complex amplitude vanishing outside `support`.
#[derive(Clone)]
pub struct AmplitudeSpec {
    pub a: ComplexFn,
    pub da: ComplexFn,
    pub support: (f64, f64),
}

impl fmt::Debug for AmplitudeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmplitudeSpec").field("support", &self.support).finish()
    }
}

impl AmplitudeSpec {
    pub fn new(a: ComplexFn, da: ComplexFn, support: (f64, f64)) -> Result<Self> {
        let amp = AmplitudeSpec { a, da, support };
        amp.validate()?;
        Ok(amp)
    }

    pub fn bump(b: Bump) -> Result<Self> {
        b.validate().map_err(Error::InvalidAmplitude)?;
        AmplitudeSpec::new(
            Arc::new(move |y| Complex64::new(b.eval(y), 0.0)),
            Arc::new(move |y| Complex64::new(b.deriv(y), 0.0)),
            b.support_interval(),
        )
    }

    /// `p(y) * bump(y)`.
    pub fn bump_times_poly(b: Bump, p: Poly1) -> Result<Self> {
        b.validate().map_err(Error::InvalidAmplitude)?;
        let dp = p.derivative();
        let q = p.clone();
        AmplitudeSpec::new(
            Arc::new(move |y| Complex64::new(q.eval(y) * b.eval(y), 0.0)),
            Arc::new(move |y| Complex64::new(dp.eval(y) * b.eval(y) + p.eval(y) * b.deriv(y), 0.0)),
            b.support_interval(),
        )
    }

    pub fn zero() -> Self {
        let z: ComplexFn = Arc::new(|_| Complex64::new(0.0, 0.0));
        AmplitudeSpec {
            a: z.clone(),
            da: z,
            support: (-1.0, 1.0),
        }
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        (self.a)(y)
    }

    pub fn conj(&self) -> Self {
        let (a, da) = (self.a.clone(), self.da.clone());
        AmplitudeSpec {
            a: Arc::new(move |y| a(y).conj()),
            da: Arc::new(move |y| da(y).conj()),
            support: self.support,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidAmplitude(format!("bad support [{lo}, {hi}]")));
        }
        let n = 256;
        for i in 0..=n {
            let y = lo + (hi - lo) * i as f64 / n as f64;
            let (v, d) = (self.eval(y), (self.da)(y));
            if !(v.re.is_finite() && v.im.is_finite() && d.re.is_finite() && d.im.is_finite()) {
                return Err(Error::InvalidAmplitude(format!("non-finite value at {y}")));
            }
        }
        let w = hi - lo;
        for k in 1..=8 {
            for y in [lo - w * k as f64 / 8.0, hi + w * k as f64 / 8.0] {
                if self.eval(y) != Complex64::new(0.0, 0.0) {
                    return Err(Error::InvalidAmplitude(format!("nonzero outside support at {y}")));
                }
            }
        }
        Ok(())
    }

    /// Sampled sup norm over the support.
    pub fn sup_norm(&self) -> f64 {
        let (lo, hi) = self.support;
        let n = 2048;
        (0..=n)
            .map(|i| self.eval(lo + (hi - lo) * i as f64 / n as f64).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Cap on integrand evaluations.
    pub max_points: usize,
    /// Overrides the default absolute tolerance `max(1e-10, 1e-8 |a|_inf |I|)`.
    pub abs_tol: Option<f64>,
    /// Minimum samples per local period `2 pi h / |F'|`.
    pub samples_per_period: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            max_points: 50_000_000,
            abs_tol: None,
            samples_per_period: 16.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscIntegral {
    pub value: Complex64,
    pub error_estimate: f64,
    pub points: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
    halves: (Complex64, Complex64),
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// `int_{interval} a(y) exp(i F(y)/h) dy` by adaptive bisection with
/// 15-point Gauss-Legendre panels and default options.
pub fn osc_integral_numeric(
    phase: &PhaseSpec,
    amp: &AmplitudeSpec,
    h: f64,
    interval: (f64, f64),
) -> Result<OscIntegral> {
    osc_integral_numeric_with(phase, amp, h, interval, &QuadOptions::default())
}

pub fn osc_integral_numeric_with(
    phase: &PhaseSpec,
    amp: &AmplitudeSpec,
    h: f64,
    interval: (f64, f64),
    opts: &QuadOptions,
) -> Result<OscIntegral> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain {
            value: h,
            domain: "h > 0",
        });
    }
    let (x0, x1) = interval;
    if !(x0 < 0.0 && 0.0 < x1) {
        return Err(Error::InvalidPhase(format!(
            "interval [{x0}, {x1}] must contain the critical point 0"
        )));
    }
    let (s0, s1) = amp.support;
    if s0 < x0 || s1 > x1 {
        return Err(Error::InvalidAmplitude(format!(
            "support [{s0}, {s1}] not inside [{x0}, {x1}]"
        )));
    }
    let tol = opts
        .abs_tol
        .unwrap_or_else(|| (1e-8 * amp.sup_norm() * (x1 - x0)).max(1e-10));

    let rule = GaussLegendre::order15();
    let integrand = |y: f64| amp.eval(y) * Complex64::from_polar(1.0, phase.value(y) / h);
    let gl = |lo: f64, hi: f64| rule.integrate_complex(lo, hi, integrand);
    let per_panel = rule.nodes.len();

    // Initial panels: each must hold enough nodes per local period.
    let mut edges = vec![s0];
    let cap = (s1 - s0) / 4.0;
    let mut y = s0;
    while y < s1 {
        let mut len = cap.min(s1 - y);
        loop {
            let fmax = [y, y + 0.5 * len, y + len]
                .iter()
                .map(|&t| phase.deriv(1, t).abs())
                .fold(0.0, f64::max);
            let allowed = per_panel as f64 * 2.0 * PI * h / (opts.samples_per_period * fmax);
            if len <= allowed {
                break;
            }
            len = 0.9 * allowed;
        }
        y = if s1 - (y + len) < 1e-12 * (s1 - s0) {
            s1
        } else {
            y + len
        };
        edges.push(y);
        if edges.len() * 3 * per_panel > opts.max_points {
            return Err(Error::BudgetExceeded {
                max_points: opts.max_points,
                estimate: f64::INFINITY,
                tolerance: tol,
            });
        }
    }

    let make_panel = |lo: f64, hi: f64, whole: Complex64| {
        let mid = 0.5 * (lo + hi);
        let halves = (gl(lo, mid), gl(mid, hi));
        let err = (whole - halves.0 - halves.1).norm();
        Panel { lo, hi, halves, err }
    };
    let mut heap: BinaryHeap<Panel> = edges
        .windows(2)
        .map(|w| make_panel(w[0], w[1], gl(w[0], w[1])))
        .collect();
    let mut points = heap.len() * 3 * per_panel;
    let mut total_err: f64 = heap.iter().map(|p| p.err).sum();

    while total_err > tol {
        let p = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (p.lo + p.hi);
        let left = make_panel(p.lo, mid, p.halves.0);
        let right = make_panel(mid, p.hi, p.halves.1);
        points += 4 * per_panel;
        total_err += left.err + right.err - p.err;
        heap.push(left);
        heap.push(right);
        if total_err <= tol {
            // guard against drift in the running sum
            total_err = heap.iter().map(|p| p.err).sum();
        }
        if points > opts.max_points && total_err > tol {
            return Err(Error::BudgetExceeded {
                max_points: opts.max_points,
                estimate: total_err,
                tolerance: tol,
            });
        }
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let (mut re, mut im) = (
        crate::quadrature::KahanSum::default(),
        crate::quadrature::KahanSum::default(),
    );
    for p in &panels {
        let v = p.halves.0 + p.halves.1;
        re.add(v.re);
        im.add(v.im);
    }
    Ok(OscIntegral {
        value: Complex64::new(re.value(), im.value()),
        error_estimate: total_err,
        points,
    })
}

/// Leading stationary-phase term for an integration range straddling 0:
/// `2 mu_m(sgn(F^{(m+1)}(0)) pi/(2(m+1))) Gamma((m+2)/(m+1))
///  ((m+1)!/|F^{(m+1)}(0)|)^{1/(m+1)} a0 h^{1/(m+1)}`, times `e^{iF(0)/h}`.
pub fn osc_leading_term(phase: &PhaseSpec, a0: Complex64, h: f64) -> Complex64 {
    let m = phase.m();
    let top = phase.top_derivative();
    let k = m as f64 + 1.0;
    let theta = top.signum() * PI / (2.0 * k);
    let magnitude = 2.0 * gamma_ratio(m) * (factorial(m + 1) / top.abs()).powf(1.0 / k) * h.powf(1.0 / k);
    let f0 = phase.value(0.0);
    let offset = if f0 == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, f0 / h)
    };
    mu_m(m, theta) * magnitude * a0 * offset
}

/// `(2 pi h)^{-1/2} int exp(-x^2/(2h)) v(x) dx` over the grid of `v`.
pub fn gaussian_pairing(v: &GridFunction, h: f64) -> Result<Complex64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain {
            value: h,
            domain: "h > 0",
        });
    }
    let reach = 8.0 * h.sqrt();
    if v.x0 > -reach || v.x_end() < reach {
        return Err(Error::GridTooCoarse(format!(
            "grid [{}, {}] does not cover [-8 sqrt(h), 8 sqrt(h)] = [{}, {}]",
            v.x0,
            v.x_end(),
            -reach,
            reach
        )));
    }
    if v.dx > 0.25 * h.sqrt() {
        return Err(Error::GridTooCoarse(format!(
            "spacing {} does not resolve the Gaussian width sqrt(h) = {}",
            v.dx,
            h.sqrt()
        )));
    }
    // Only the window carrying Gaussian mass needs to resolve v's oscillation.
    let (lo, hi) = (v.index_of(-reach), v.index_of(reach));
    let max_jump = 2.0 * PI / 16.0;
    for k in lo..hi {
        let (a, b) = (v.values[k], v.values[k + 1]);
        if a.norm() > 0.0 && b.norm() > 0.0 && (b / a).arg().abs() > max_jump {
            return Err(Error::GridTooCoarse(format!(
                "phase of v jumps by {:.3} rad between x = {} and the next sample",
                (b / a).arg().abs(),
                v.x(k)
            )));
        }
    }
    let weighted = v.map(|x, z| z * (-x * x / (2.0 * h)).exp());
    Ok(weighted.integral() / (2.0 * PI * h).sqrt())
}
