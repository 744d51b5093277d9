//! First and second order Melnikov functions, their numerical oracles and
//! the monodromy bookkeeping of the second order functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bautin::DivisorComponent;
use crate::curvegeom::{
    canonical_loop, loop_anchor, omega_form, perturbation_form, punctures, BasepointPolicy,
    LoopKind, Parameters, RelativeOneForm,
};
use crate::error::{Error, Result};
use crate::pathint::{compose_loops, contour_integral, iterated_sum, PathLoop};
use crate::ratcalc::{residue, residue_sum_integral, PartialFractionForm};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// `M2 = M2_NORMALIZATION * (∫ω2ω5' + ∫ω5ω2')`, where in `∫ab` the form `b`
/// is integrated first along the loop.
pub const M2_NORMALIZATION: f64 = -1.0;

/// Tag written next to numbers that depend on [`M2_NORMALIZATION`].
pub const NORMALIZATION_VERSION: &str = "m2norm-1";

/// Which period annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Center {
    /// Around the origin, levels `h < 0`.
    First,
    /// Around `(0, 1)`, levels `h > 1`.
    Second,
}

impl Center {
    pub fn check_level(self, h: f64) -> Result<()> {
        let ok = match self {
            Center::First => h < 0.0,
            Center::Second => h > 1.0,
        };
        if ok && h.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what: "h",
                value: h.to_string(),
                range: match self {
                    Center::First => "h < 0",
                    Center::Second => "h > 1",
                },
            })
        }
    }

    /// The vanishing cycle of this annulus.
    pub fn cycle(self) -> LoopKind {
        match self {
            Center::First => LoopKind::Delta,
            Center::Second => LoopKind::DeltaTilde,
        }
    }

    pub fn other(self) -> Center {
        match self {
            Center::First => Center::Second,
            Center::Second => Center::First,
        }
    }
}

pub fn m1_closed(center: Center, lambda: &Parameters, h: f64) -> Result<f64> {
    center.check_level(h)?;
    let Parameters { l1, l3, l5, .. } = *lambda;
    Ok(match center {
        Center::First => -2.0 * PI * h * (h * (l1 + l3) - l1),
        Center::Second => 2.0 * PI * (h - 1.0) * ((h - 1.0) * (l1 + l3) + l1 + l3 - 2.0 * l5),
    })
}

/// `-∫ ω` over the counterclockwise vanishing cycle, by residues.
pub fn m1_residues(center: Center, lambda: &Parameters, h: f64) -> Result<f64> {
    center.check_level(h)?;
    let w = perturbation_form(lambda, h)?;
    let cycle = canonical_loop(center.cycle(), h, BasepointPolicy::Canonical)?;
    let v = residue_sum_integral(&w.F, &cycle)?;
    Ok(-v.re)
}

/// `ω' = (F_h - Phi_z) dz`.
pub fn gelfand_leray(form: &RelativeOneForm) -> Result<PartialFractionForm> {
    let fh = form
        .dF_dh
        .as_ref()
        .ok_or(Error::Invariant("no analytic h-derivative; use gelfand_leray_numeric".into()))?;
    Ok(fh.sub(&form.Phi.derivative()))
}

/// Finite-difference fallback: value of `ω'` at `z` for a family of forms given by `family(h)`.
pub fn gelfand_leray_numeric<F>(family: F, h: C, z: C) -> Result<C>
where
    F: Fn(C) -> Result<RelativeOneForm>,
{
    let s = 1e-3 * h.norm().max(1.0);
    let f = |dh: f64| -> Result<C> { Ok(family(h + dh)?.F.eval(z)) };
    let fh = (f(-2.0 * s)? - 8.0 * f(-s)? + 8.0 * f(s)? - f(2.0 * s)?) / (12.0 * s);
    let phi_z = family(h)?.Phi.derivative().eval(z);
    Ok(fh - phi_z)
}

pub fn m2_closed(center: Center, h: f64) -> Result<f64> {
    center.check_level(h)?;
    Ok(match center {
        Center::First => 2.0 * PI * (h + h * h / 2.0 + (1.0 - h).ln()),
        Center::Second => -2.0 * PI * ((h - 1.0) * (h - 4.0) / 2.0 + h.ln()),
    })
}

/// The two forms whose symmetrized iterated integral gives the second order function.
pub fn m2_pair(center: Center, h: f64) -> Result<(RelativeOneForm, RelativeOneForm)> {
    Ok(match center {
        Center::First => (omega_form(2, h)?, omega_form(5, h)?),
        Center::Second => {
            let w1 = omega_form(1, h)?;
            let w3 = omega_form(3, h)?;
            let u = RelativeOneForm::combination(&[(C::new(1.0, 0.0), &w3), (C::new(-1.0, 0.0), &w1)]);
            (u, omega_form(4, h)?)
        }
    })
}

/// `∫u v' + ∫v u'` over the vanishing cycle, for the pair of [`m2_pair`].
pub fn m2_symmetric_integral(center: Center, h: f64, tolerance: f64) -> Result<f64> {
    center.check_level(h)?;
    let (u, v) = m2_pair(center, h)?;
    let gu = gelfand_leray(&u)?;
    let gv = gelfand_leray(&v)?;
    let cycle = canonical_loop(center.cycle(), h, BasepointPolicy::Canonical)?;
    let fu = |z: C| u.F.eval(z);
    let fv = |z: C| v.F.eval(z);
    let fgu = |z: C| gu.eval(z);
    let fgv = |z: C| gv.eval(z);
    let q = iterated_sum(&[(&fu, &fgv), (&fv, &fgu)], &cycle, tolerance)?;
    Ok(q.value.re)
}

pub fn m2_iterated(center: Center, h: f64, tolerance: f64) -> Result<f64> {
    Ok(M2_NORMALIZATION * m2_symmetric_integral(center, h, tolerance)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommutatorMode {
    Determinant,
    Direct,
}

fn periods(lambda: &Parameters, h: C) -> Result<(C, C)> {
    let w = perturbation_form(lambda, h)?;
    let p = punctures(h)?;
    Ok((
        2.0 * PI * I * residue(&w.F, p.a),
        2.0 * PI * I * residue(&w.F, p.b),
    ))
}

/// `∫ ω ω'` over the commutator `α⁻¹β⁻¹αβ` of the small loops around `a` and `b`.
pub fn commutator_integral(lambda: &Parameters, h: C, mode: CommutatorMode, tolerance: f64) -> Result<C> {
    match mode {
        CommutatorMode::Determinant => {
            let (a, b) = periods(lambda, h)?;
            let s = 1e-3 * h.norm().max(1.0);
            let mut da = C::new(0.0, 0.0);
            let mut db = C::new(0.0, 0.0);
            for (k, wgt) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
                let (pa, pb) = periods(lambda, h + k * s)?;
                da += pa * wgt;
                db += pb * wgt;
            }
            da /= 12.0 * s;
            db /= 12.0 * s;
            Ok(da * b - a * db)
        }
        CommutatorMode::Direct => {
            let path = commutator_loop(h)?;
            let w = perturbation_form(lambda, h)?;
            let g = gelfand_leray(&w)?;
            let f = |z: C| w.F.eval(z);
            let gl = |z: C| g.eval(z);
            Ok(iterated_sum(&[(&f, &gl)], &path, tolerance)?.value)
        }
    }
}

/// `α⁻¹β⁻¹αβ` based at `sqrt(h(h-1))`.
pub fn commutator_loop(h: C) -> Result<PathLoop> {
    let alpha = canonical_loop(LoopKind::Alpha, h, BasepointPolicy::Canonical)?;
    let beta = canonical_loop(LoopKind::Beta, h, BasepointPolicy::Canonical)?;
    let anchor = loop_anchor(h)?;
    compose_loops(&[(&alpha, -1), (&beta, -1), (&alpha, 1), (&beta, 1)], Some(&anchor))
}

/// Labels of the forms checked by [`shuffle_defects`]: the five basis forms and two derivatives.
pub const TRACKED_FORMS: [&str; 7] = ["w1", "w2", "w3", "w4", "w5", "w2'", "w5'"];

pub const SHUFFLE_LOOPS: [LoopKind; 4] = [LoopKind::Alpha, LoopKind::Beta, LoopKind::Gamma, LoopKind::Delta];

fn tracked_forms(h: f64) -> Result<Vec<PartialFractionForm>> {
    let mut out = Vec::with_capacity(7);
    for k in 1..=5 {
        out.push(omega_form(k, h)?.F);
    }
    out.push(gelfand_leray(&omega_form(2, h)?)?);
    out.push(gelfand_leray(&omega_form(5, h)?)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleEntry {
    pub a: String,
    pub b: String,
    pub cycle: LoopKind,
    /// `|∫ab + ∫ba - ∫a ∫b|`
    pub defect: f64,
}

/// Shuffle identity defects for every ordered pair of tracked forms on every loop.
pub fn shuffle_defects(h: f64, policy: BasepointPolicy, tolerance: f64) -> Result<Vec<ShuffleEntry>> {
    Center::First.check_level(h)?;
    let forms = tracked_forms(h)?;
    let mut out = Vec::new();
    for kind in SHUFFLE_LOOPS {
        let path = canonical_loop(kind, h, policy)?;
        let singles = forms
            .iter()
            .map(|f| Ok(contour_integral(|z| f.eval(z), &path, tolerance * 1e-2)?.value))
            .collect::<Result<Vec<C>>>()?;
        for (i, fa) in forms.iter().enumerate() {
            for (j, fb) in forms.iter().enumerate() {
                let a = |z: C| fa.eval(z);
                let b = |z: C| fb.eval(z);
                let q = iterated_sum(&[(&a, &b), (&b, &a)], &path, tolerance)?;
                out.push(ShuffleEntry {
                    a: TRACKED_FORMS[i].to_string(),
                    b: TRACKED_FORMS[j].to_string(),
                    cycle: kind,
                    defect: (q.value - singles[i] * singles[j]).norm(),
                });
            }
        }
    }
    Ok(out)
}

/// Coordinates in the basis {vanishing cycle, commutator (α,β)}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MonodromyClass {
    pub k_delta: i64,
    pub k_comm: i64,
}

impl std::ops::Add for MonodromyClass {
    type Output = MonodromyClass;
    fn add(self, o: MonodromyClass) -> MonodromyClass {
        MonodromyClass {
            k_delta: self.k_delta + o.k_delta,
            k_comm: self.k_comm + o.k_comm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalValue {
    H0,
    H1,
}

/// Integer matrix acting on `(k_delta, k_comm)` columns.
pub fn monodromy_matrix(around: CriticalValue, center: Center) -> [[i64; 2]; 2] {
    let nontrivial = matches!(
        (center, around),
        (Center::First, CriticalValue::H1) | (Center::Second, CriticalValue::H0)
    );
    if nontrivial {
        [[1, 0], [1, 1]]
    } else {
        [[1, 0], [0, 1]]
    }
}

pub fn monodromy_action(around: CriticalValue, class: MonodromyClass, center: Center) -> MonodromyClass {
    let m = monodromy_matrix(around, center);
    MonodromyClass {
        k_delta: m[0][0] * class.k_delta + m[0][1] * class.k_comm,
        k_comm: m[1][0] * class.k_delta + m[1][1] * class.k_comm,
    }
}

/// Pair of projective triples parameterizing a pair of bifurcation functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPair {
    pub c1: [f64; 3],
    pub c2: [f64; 3],
    pub component: DivisorComponent,
}

pub fn bifurcation_pair_eval(pair: &BifurcationPair, h: f64, center: Center) -> Result<f64> {
    center.check_level(h)?;
    let m2 = m2_closed(center, h)?;
    Ok(match center {
        Center::First => {
            let c = pair.c1;
            h * (c[0] * (h - 1.0) + c[1] * h + c[2] * m2)
        }
        Center::Second => {
            let c = pair.c2;
            (h - 1.0) * (c[0] * (h - 1.0) - 2.0 * c[1] + c[2] * m2)
        }
    })
}

/// Placement of the sample points used by [`count_zeros`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Uniform,
    /// Geometric in the distance from the given point, which must lie outside the interval.
    LogFrom(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCount {
    pub count: usize,
    pub zeros: Vec<f64>,
    /// The coarse grid and the doubled grid disagree.
    pub tangency_suspected: bool,
}

fn grid_points(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            match spacing {
                Spacing::Uniform => lo + (hi - lo) * s,
                Spacing::LogFrom(x0) => {
                    let (dl, dh) = ((lo - x0).abs(), (hi - x0).abs());
                    let sign = if lo > x0 { 1.0 } else { -1.0 };
                    x0 + sign * (dl.ln() + (dh.ln() - dl.ln()) * s).exp()
                }
            }
        })
        .collect()
}

fn sign_change_zeros<F: Fn(f64) -> f64>(f: &F, xs: &[f64]) -> Vec<f64> {
    let mut zeros: Vec<f64> = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for &x in xs {
        let v = f(x);
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        if let Some((xl, vl)) = last {
            if vl.signum() != v.signum() {
                let z = bisect(f, xl, x, vl);
                if zeros.last().is_none_or(|p| (z - p).abs() > 1e-9) {
                    zeros.push(z);
                }
            }
        }
        last = Some((x, v));
    }
    zeros
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= 1e-12 * mid.abs().max(1.0) || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Counts sign changes of `f` on a grid of `grid` cells and on its refinement.
pub fn count_zeros<F: Fn(f64) -> f64>(f: F, interval: (f64, f64), grid: usize, spacing: Spacing) -> Result<ZeroCount> {
    let (lo, hi) = interval;
    if !(lo < hi) || grid == 0 {
        return Err(Error::OutOfRange {
            what: "interval",
            value: format!("({lo}, {hi})"),
            range: "lo < hi and grid > 0",
        });
    }
    if let Spacing::LogFrom(x0) = spacing {
        if x0 >= lo && x0 <= hi {
            return Err(Error::OutOfRange {
                what: "log anchor",
                value: x0.to_string(),
                range: "outside the interval",
            });
        }
    }
    for x in [lo, hi] {
        if f(x).abs() <= 1e-12 {
            return Err(Error::EndpointZero(x));
        }
    }
    let coarse = sign_change_zeros(&f, &grid_points(lo, hi, grid, spacing));
    let fine = sign_change_zeros(&f, &grid_points(lo, hi, 2 * grid, spacing));
    Ok(ZeroCount {
        count: fine.len(),
        tangency_suspected: coarse.len() != fine.len(),
        zeros: fine,
    })
}
