//! Direct integration of the perturbed field: orbits, Poincaré return maps,
//! displacement and limit cycle censuses.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curvegeom::Parameters;
use crate::error::{Error, Result};
use crate::melnikov::Center;

pub const ESCAPE_RADIUS: f64 = 1e3;
/// Perturbations outside this sup-norm ball are rejected by the return map.
pub const PARAMETER_BALL: f64 = 0.1;
const MAX_RETURN_TIME: f64 = 20.0 * PI;
const EVENT_TOL: f64 = 1e-11;

pub fn vector_field(lambda: &Parameters, x: f64, y: f64) -> (f64, f64) {
    let Parameters { l1, l2, l3, l4, l5 } = *lambda;
    let (xx, yy, xy) = (x * x, y * y, x * y);
    let dx = -y - xx + yy + l1 * x + l2 * (xx + yy) + l4 * (xx - yy) + 2.0 * l5 * xy;
    let dy = x - 2.0 * xy + l1 * y + l3 * (xx + yy) + l5 * (xx - yy) - 2.0 * l4 * xy;
    (dx, dy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

type V = [f64; 2];

fn axpy(y: V, terms: &[(f64, V)]) -> V {
    let mut out = y;
    for (c, k) in terms {
        out[0] += c * k[0];
        out[1] += c * k[1];
    }
    out
}

// Dormand-Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    r: [V; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.r;
        let f = |i: usize| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        (f(0), f(1))
    }
}

struct Stepper<'a> {
    lambda: &'a Parameters,
    rtol: f64,
    atol: f64,
}

struct Trial {
    y1: V,
    k7: V,
    err: f64,
    k: [V; 6],
}

impl<'a> Stepper<'a> {
    fn f(&self, y: V) -> V {
        let (a, b) = vector_field(self.lambda, y[0], y[1]);
        [a, b]
    }

    fn trial(&self, y: V, k1: V, h: f64) -> Trial {
        let k2 = self.f(axpy(y, &[(h * A21, k1)]));
        let k3 = self.f(axpy(y, &[(h * A31, k1), (h * A32, k2)]));
        let k4 = self.f(axpy(y, &[(h * A41, k1), (h * A42, k2), (h * A43, k3)]));
        let k5 = self.f(axpy(y, &[(h * A51, k1), (h * A52, k2), (h * A53, k3), (h * A54, k4)]));
        let k6 = self.f(axpy(y, &[(h * A61, k1), (h * A62, k2), (h * A63, k3), (h * A64, k4), (h * A65, k5)]));
        let y1 = axpy(y, &[(h * A71, k1), (h * A73, k3), (h * A74, k4), (h * A75, k5), (h * A76, k6)]);
        let k7 = self.f(y1);
        let mut err = 0.0f64;
        for i in 0..2 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        Trial {
            y1,
            k7,
            err: (err / 2.0).sqrt(),
            k: [k1, k2, k3, k4, k5, k6],
        }
    }

    fn dense(&self, t0: f64, h: f64, y0: V, tr: &Trial) -> DenseStep {
        let [k1, _, k3, k4, k5, k6] = tr.k;
        let k7 = tr.k7;
        let mut r = [[0.0; 2]; 5];
        for i in 0..2 {
            let dy = tr.y1[i] - y0[i];
            let bspl = h * k1[i] - dy;
            r[0][i] = y0[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k7[i] - bspl;
            r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        DenseStep { t0, h, r }
    }
}

/// Adaptive integration driver; `on_step` may stop the integration by returning `false`.
fn drive<F: FnMut(&DenseStep, V, V) -> bool>(
    lambda: &Parameters,
    start: FlowState,
    t_end: f64,
    rel_tol: f64,
    mut on_step: F,
) -> Result<(FlowState, bool)> {
    check_tolerance(rel_tol)?;
    let st = Stepper {
        lambda,
        rtol: rel_tol,
        atol: rel_tol,
    };
    let mut y = [start.x, start.y];
    let mut t = start.t;
    let mut k1 = st.f(y);
    let scale = 1.0 + (y[0] * y[0] + y[1] * y[1]).sqrt();
    let mut h = (0.01 * rel_tol.powf(0.2) / scale).max(1e-6).min(t_end - t);
    let mut last_fac = 1e-4f64;
    while t < t_end {
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let h_step = h.min(t_end - t);
        let tr = st.trial(y, k1, h_step);
        if tr.err <= 1.0 {
            let dense = st.dense(t, h_step, y, &tr);
            let y_prev = y;
            y = tr.y1;
            t += h_step;
            k1 = tr.k7;
            if !(y[0].is_finite() && y[1].is_finite()) || y[0].hypot(y[1]) > ESCAPE_RADIUS {
                return Err(Error::Escape { radius: ESCAPE_RADIUS, t });
            }
            if !on_step(&dense, y_prev, y) {
                return Ok((FlowState { x: y[0], y: y[1], t }, true));
            }
            // PI step size control
            let fac = 0.9 * tr.err.max(1e-10).powf(-0.7 / 5.0) * last_fac.powf(0.4 / 5.0);
            last_fac = tr.err.max(1e-4);
            h = h_step * fac.clamp(0.2, 5.0);
        } else {
            let e = if tr.err.is_finite() { tr.err } else { 1e10 };
            h = h_step * (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok((FlowState { x: y[0], y: y[1], t }, false))
}

fn check_tolerance(rel_tol: f64) -> Result<()> {
    if (1e-13..=1e-6).contains(&rel_tol) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "rel_tol",
            value: rel_tol.to_string(),
            range: "[1e-13, 1e-6]",
        })
    }
}

/// Accepted steps of an integration, with continuous output between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: FlowState,
    pub end: FlowState,
    pub steps: Vec<DenseStep>,
}

impl Trajectory {
    /// State at time `t`, `None` outside the integrated span.
    pub fn at(&self, t: f64) -> Option<(f64, f64)> {
        if t < self.start.t || t > self.end.t {
            return None;
        }
        let k = self.steps.partition_point(|s| s.t1() < t);
        self.steps.get(k).map(|s| s.eval(t))
    }
}

pub fn integrate_orbit(lambda: &Parameters, start: FlowState, t_span: f64, rel_tol: f64) -> Result<Trajectory> {
    let mut steps = Vec::new();
    let (end, _) = drive(lambda, start, start.t + t_span, rel_tol, |d, _, _| {
        steps.push(*d);
        true
    })?;
    Ok(Trajectory { start, end, steps })
}

/// Point of the section `x = 0` at level `h`.
pub fn section_point(center: Center, h: f64) -> Result<f64> {
    center.check_level(h)?;
    let root = (h * h - h).sqrt();
    Ok(match center {
        Center::First => h - root,
        Center::Second => h + root,
    })
}

fn check_ball(lambda: &Parameters) -> Result<()> {
    if lambda.norm_inf() <= PARAMETER_BALL {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "|lambda|_inf",
            value: lambda.norm_inf().to_string(),
            range: "<= 0.1",
        })
    }
}

/// State at the first return to the section through the point of level `h`.
pub fn first_return(lambda: &Parameters, center: Center, h: f64, rel_tol: f64) -> Result<FlowState> {
    check_ball(lambda)?;
    let y0 = section_point(center, h)?;
    let start = FlowState { x: 0.0, y: y0, t: 0.0 };
    let mut was_negative = false;
    let mut hit: Option<(DenseStep, V)> = None;
    let (_, stopped) = drive(lambda, start, MAX_RETURN_TIME, rel_tol, |d, y_prev, y| {
        if y[0] < 0.0 {
            was_negative = true;
            return true;
        }
        if was_negative && y_prev[0] < 0.0 {
            hit = Some((*d, y_prev));
            return false;
        }
        true
    })?;
    let (dense, y_prev) = match (stopped, hit) {
        (true, Some(v)) => v,
        _ => return Err(Error::OpenOrbit { t_max: MAX_RETURN_TIME }),
    };
    // bracket on the continuous extension, then polish with exact re-steps
    let (mut lo, mut hi) = (dense.t0, dense.t1());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dense.eval(mid).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let st = Stepper {
        lambda,
        rtol: rel_tol,
        atol: rel_tol,
    };
    let k1 = st.f(y_prev);
    let mut te = 0.5 * (lo + hi);
    for _ in 0..4 {
        let h_step = te - dense.t0;
        let state = if h_step == 0.0 { y_prev } else { st.trial(y_prev, k1, h_step).y1 };
        let dx = st.f(state)[0];
        let dt = -state[0] / dx;
        te += dt;
        if dt.abs() < EVENT_TOL {
            break;
        }
    }
    let h_step = te - dense.t0;
    let state = if h_step == 0.0 { y_prev } else { st.trial(y_prev, k1, h_step).y1 };
    Ok(FlowState { x: state[0], y: state[1], t: te })
}

/// `H(P(h)) - h` for the return map `P` of the given annulus.
///
/// With the time scale of [`vector_field`] this is `±(2 M1 + 4 M2 + ...)` in the
/// Melnikov functions of the `melnikov` module, `+` on the first annulus and `-` on
/// the second, whose orbits run against the orientation of its vanishing cycle.
pub fn poincare_displacement(lambda: &Parameters, center: Center, h: f64, rel_tol: f64) -> Result<f64> {
    let ret = first_return(lambda, center, h, rel_tol)?;
    let w = 2.0 * ret.y - 1.0;
    Ok((ret.x * ret.x + ret.y * ret.y) / w - h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusOptions {
    pub h_range_first: (f64, f64),
    pub h_range_second: (f64, f64),
    pub grid: usize,
    pub rel_tol: f64,
    /// Displacements of smaller modulus count as zero when bracketing.
    pub zero_floor: f64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            h_range_first: (-0.8, -0.01),
            h_range_second: (1.01, 5.0),
            grid: 256,
            rel_tol: 1e-11,
            zero_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// A sign change seen on one grid is missing on the other.
    Tangency,
    /// Slope at a detected zero below the hyperbolicity threshold.
    NonHyperbolic,
    /// Orbits from these levels escape or fail to return; no cycle is counted across the gap.
    NoReturn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusDiagnostic {
    pub center: Center,
    pub kind: DiagnosticKind,
    pub h: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub i: usize,
    pub j: usize,
    pub first_levels: Vec<f64>,
    pub second_levels: Vec<f64>,
    pub diagnostics: Vec<CensusDiagnostic>,
}

impl Census {
    pub fn counts(&self) -> (usize, usize) {
        (self.i, self.j)
    }
}

fn annulus_census(
    lambda: &Parameters,
    center: Center,
    range: (f64, f64),
    opt: &CensusOptions,
    diagnostics: &mut Vec<CensusDiagnostic>,
) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    center.check_level(lo)?;
    center.check_level(hi)?;
    if !(lo < hi) || opt.grid < 2 {
        return Err(Error::OutOfRange {
            what: "h range",
            value: format!("({lo}, {hi})"),
            range: "lo < hi inside one annulus",
        });
    }
    let d = |h: f64| poincare_displacement(lambda, center, h, opt.rel_tol);
    let sign = |v: f64| if v.abs() < opt.zero_floor { 0 } else if v > 0.0 { 1 } else { -1 };
    let n = 2 * opt.grid;
    let hs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let mut vals: Vec<Option<f64>> = Vec::with_capacity(n + 1);
    for &h in &hs {
        match d(h) {
            Ok(v) => vals.push(Some(v)),
            Err(e @ (Error::Escape { .. } | Error::OpenOrbit { .. })) => {
                if vals.last().is_none_or(Option::is_some) {
                    diagnostics.push(CensusDiagnostic {
                        center,
                        kind: DiagnosticKind::NoReturn,
                        h,
                        detail: e.to_string(),
                    });
                }
                vals.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    // sign changes are only bracketed inside stretches where the return map is defined
    let brackets = |stride: usize| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut last: Option<usize> = None;
        for k in (0..=n).step_by(stride) {
            let Some(v) = vals[k] else {
                last = None;
                continue;
            };
            let s = sign(v);
            if s == 0 {
                continue;
            }
            if let Some(p) = last {
                if sign(vals[p].unwrap_or(0.0)) != s {
                    out.push((p, k));
                }
            }
            last = Some(k);
        }
        out
    };
    let coarse = brackets(2);
    let fine = brackets(1);
    if coarse.len() != fine.len() {
        diagnostics.push(CensusDiagnostic {
            center,
            kind: DiagnosticKind::Tangency,
            h: fine.first().map_or(lo, |b| hs[b.0]),
            detail: format!("{} sign changes on the coarse grid, {} on the doubled grid", coarse.len(), fine.len()),
        });
    }
    let mut levels = Vec::with_capacity(fine.len());
    'bracket: for (a, b) in fine {
        let (mut x0, mut x1) = (hs[a], hs[b]);
        let (mut v0, mut v1) = (vals[a].unwrap_or(0.0), vals[b].unwrap_or(0.0));
        while x1 - x0 > 1e-10 {
            let mid = 0.5 * (x0 + x1);
            let vm = match d(mid) {
                Ok(v) => v,
                // a window of escaping levels between grid points: the sign flips through
                // infinity there, not through zero
                Err(e @ (Error::Escape { .. } | Error::OpenOrbit { .. })) => {
                    diagnostics.push(CensusDiagnostic {
                        center,
                        kind: DiagnosticKind::NoReturn,
                        h: mid,
                        detail: format!("sign change over ({}, {}) straddles it: {e}", hs[a], hs[b]),
                    });
                    continue 'bracket;
                }
                Err(e) => return Err(e),
            };
            if vm == 0.0 {
                x0 = mid;
                x1 = mid;
                break;
            }
            if vm.signum() == v0.signum() {
                x0 = mid;
                v0 = vm;
            } else {
                x1 = mid;
                v1 = vm;
            }
        }
        let root = 0.5 * (x0 + x1);
        let slope = if x1 > x0 { (v1 - v0) / (x1 - x0) } else { 0.0 };
        if slope.abs() <= 1e-12 {
            diagnostics.push(CensusDiagnostic {
                center,
                kind: DiagnosticKind::NonHyperbolic,
                h: root,
                detail: format!("displacement slope {slope:e}"),
            });
        }
        levels.push(root);
    }
    Ok(levels)
}

pub fn limit_cycle_census(lambda: &Parameters, options: &CensusOptions) -> Result<Census> {
    check_tolerance(options.rel_tol)?;
    check_ball(lambda)?;
    let mut diagnostics = Vec::new();
    let first = annulus_census(lambda, Center::First, options.h_range_first, options, &mut diagnostics)?;
    let second = annulus_census(lambda, Center::Second, options.h_range_second, options, &mut diagnostics)?;
    Ok(Census {
        i: first.len(),
        j: second.len(),
        first_levels: first,
        second_levels: second,
        diagnostics,
    })
}

/// Parameter points realizing each admissible census on the default ranges.
pub mod fixtures {
    pub const CENSUS_FIXTURES: [((usize, usize), [f64; 5]); 6] = [
        ((0, 0), [0.002, 0.0, 0.0, 0.0, 0.0]),
        ((1, 0), [0.002, 0.0, -0.006, 0.0, 0.0]),
        ((0, 1), [0.006, 0.0, -0.002, 0.0, 0.006]),
        ((1, 1), [0.002, 0.0, -0.006, 0.0, -0.006]),
        ((2, 0), [-8.83e-5, 0.05, 9.0e-4, 0.0, 0.05]),
        ((0, 2), [-0.00993810338901603, 0.0, 0.01, 0.01, 8.899924919418608e-05]),
    ];
}
