//! The first integral `H = (x²+y²)/(2y-1)`, its uniformizing chart
//! `z = x + i(y-h)` on the level curve, and the five perturbation forms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathint::{Anchor, PathLoop};
use crate::ratcalc::{partial_fractions, PartialFractionForm, Poly};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// The five real perturbation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Parameters {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
}

impl Parameters {
    pub fn new(l1: f64, l2: f64, l3: f64, l4: f64, l5: f64) -> Self {
        Parameters { l1, l2, l3, l4, l5 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_array(l: [f64; 5]) -> Self {
        Parameters::new(l[0], l[1], l[2], l[3], l[4])
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.l1, self.l2, self.l3, self.l4, self.l5]
    }

    pub fn a(&self) -> C {
        C::new(-1.0, 0.0)
    }

    pub fn b(&self) -> C {
        C::new(self.l2, self.l3)
    }

    pub fn c(&self) -> C {
        C::new(self.l4, self.l5)
    }

    pub fn norm_inf(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Parameters::from_array(self.to_array().map(|v| v * s))
    }
}

/// Punctures of the level curve in the z-chart. `c` is always the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Punctures {
    pub a: C,
    pub b: C,
    pub c: C,
    pub r2: C,
}

/// `F dz + Phi dh` in the (z, h) chart.
#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct RelativeOneForm {
    pub F: PartialFractionForm,
    pub Phi: PartialFractionForm,
    pub dF_dh: Option<PartialFractionForm>,
}

impl RelativeOneForm {
    pub fn combination(terms: &[(C, &RelativeOneForm)]) -> RelativeOneForm {
        let f = PartialFractionForm::combination(
            &terms.iter().map(|(c, w)| (*c, &w.F)).collect::<Vec<_>>(),
        );
        let phi = PartialFractionForm::combination(
            &terms.iter().map(|(c, w)| (*c, &w.Phi)).collect::<Vec<_>>(),
        );
        let dh = if terms.iter().all(|(_, w)| w.dF_dh.is_some()) {
            Some(PartialFractionForm::combination(
                &terms
                    .iter()
                    .map(|(c, w)| (*c, w.dF_dh.as_ref().unwrap()))
                    .collect::<Vec<_>>(),
            ))
        } else {
            None
        };
        RelativeOneForm { F: f, Phi: phi, dF_dh: dh }
    }
}

/// Which loop of the level curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoopKind {
    Alpha,
    Beta,
    Gamma,
    Delta,
    DeltaTilde,
}

/// Where the loops start.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BasepointPolicy {
    /// `z = sqrt(h(h-1))`; small circles start at their point nearest to it.
    #[default]
    Canonical,
    /// Rotate the start of the circle by the given angle.
    Rotated(f64),
}

pub fn hamiltonian(x: f64, y: f64) -> Result<f64> {
    let w = 2.0 * y - 1.0;
    if w == 0.0 {
        return Err(Error::SingularLine);
    }
    Ok((x * x + y * y) / w)
}

pub fn chart_to_zh(x: f64, y: f64) -> Result<(C, f64)> {
    let h = hamiltonian(x, y)?;
    Ok((C::new(x, y - h), h))
}

pub fn chart_from_zh(z: C, h: impl Into<C>) -> Result<(C, C)> {
    if z == C::new(0.0, 0.0) {
        return Err(Error::Puncture);
    }
    let h = h.into();
    let r2 = h * (h - 1.0);
    let x = (z * z + r2) / (2.0 * z);
    let y = h - I * (z * z - r2) / (2.0 * z);
    Ok((x, y))
}

fn check_regular(h: C) -> Result<()> {
    if h.norm() < 1e-12 || (h - 1.0).norm() < 1e-12 {
        return Err(Error::CriticalValue(h.to_string()));
    }
    Ok(())
}

pub fn punctures(h: impl Into<C>) -> Result<Punctures> {
    let h = h.into();
    check_regular(h)?;
    Ok(Punctures {
        a: -I * h,
        b: -I * (h - 1.0),
        c: C::new(0.0, 0.0),
        r2: h * (h - 1.0),
    })
}

/// Common basepoint `sqrt(h(h-1))` of composed loops, with the punctures to avoid.
pub fn loop_anchor(h: impl Into<C>) -> Result<Anchor> {
    let h = h.into();
    let p = punctures(h)?;
    Ok(Anchor {
        basepoint: p.r2.sqrt(),
        avoid: vec![p.c, p.a, p.b],
    })
}

fn expected_winding(kind: LoopKind) -> [i64; 3] {
    match kind {
        LoopKind::Alpha => [0, 1, 0],
        LoopKind::Beta => [0, 0, 1],
        LoopKind::Gamma => [1, 0, 0],
        LoopKind::Delta => [1, 1, 0],
        LoopKind::DeltaTilde => [1, 0, 1],
    }
}

/// Winding numbers of a loop about `(0, a, b)`.
pub fn winding_vector(path: &PathLoop, p: &Punctures) -> Result<[i64; 3]> {
    Ok([
        path.winding_number(p.c)?,
        path.winding_number(p.a)?,
        path.winding_number(p.b)?,
    ])
}

/// Counterclockwise representatives of the loops on the punctured plane.
pub fn canonical_loop(kind: LoopKind, h: impl Into<C>, policy: BasepointPolicy) -> Result<PathLoop> {
    let h = h.into();
    let p = punctures(h)?;
    let shift = match policy {
        BasepointPolicy::Canonical => 0.0,
        BasepointPolicy::Rotated(t) => t,
    };
    let path = match kind {
        LoopKind::Delta | LoopKind::DeltaTilde => {
            let ok = h.im == 0.0
                && match kind {
                    LoopKind::Delta => h.re < 0.0,
                    _ => h.re > 1.0,
                };
            if !ok {
                return Err(Error::OutOfRange {
                    what: "h",
                    value: h.to_string(),
                    range: if kind == LoopKind::Delta { "h < 0" } else { "h > 1" },
                });
            }
            PathLoop::circle(C::new(0.0, 0.0), p.r2.re.sqrt(), shift)
        }
        _ => {
            let center = match kind {
                LoopKind::Alpha => p.a,
                LoopKind::Beta => p.b,
                _ => p.c,
            };
            let dmin = p.a.norm().min(p.b.norm()).min((p.b - p.a).norm());
            let radius = 0.25 * dmin;
            let base = p.r2.sqrt();
            PathLoop::circle(center, radius, (base - center).arg() + shift)
        }
    };
    let w = winding_vector(&path, &p)?;
    if w != expected_winding(kind) {
        return Err(Error::Invariant(format!(
            "loop {kind:?} at h = {h} has winding numbers {w:?}"
        )));
    }
    Ok(path)
}

/// `num(z) z^zpow / ((z-a)^ea (z-b)^eb)`
#[derive(Debug, Clone)]
struct ZRat {
    num: Poly,
    zpow: i32,
    ea: u32,
    eb: u32,
}

struct Chart {
    a: C,
    b: C,
}

impl Chart {
    fn lin(&self, num: Vec<C>, zpow: i32) -> ZRat {
        ZRat { num: Poly(num).trimmed(), zpow, ea: 0, eb: 0 }
    }

    fn mul(&self, u: &ZRat, v: &ZRat) -> ZRat {
        ZRat {
            num: u.num.mul(&v.num),
            zpow: u.zpow + v.zpow,
            ea: u.ea + v.ea,
            eb: u.eb + v.eb,
        }
    }

    fn raise(&self, u: &ZRat, zpow: i32, ea: u32, eb: u32) -> Poly {
        let mut n = u.num.clone();
        n = n.mul(&Poly::monomial(C::new(1.0, 0.0), (u.zpow - zpow) as usize));
        n = n.mul(&Poly::linear(self.a).pow(ea - u.ea));
        n.mul(&Poly::linear(self.b).pow(eb - u.eb))
    }

    fn add(&self, u: &ZRat, v: &ZRat) -> ZRat {
        let zpow = u.zpow.min(v.zpow);
        let ea = u.ea.max(v.ea);
        let eb = u.eb.max(v.eb);
        ZRat {
            num: self.raise(u, zpow, ea, eb).add(&self.raise(v, zpow, ea, eb)),
            zpow,
            ea,
            eb,
        }
    }

    fn scale(&self, u: &ZRat, s: C) -> ZRat {
        ZRat { num: u.num.scale(s), ..u.clone() }
    }

    fn to_pff(&self, u: &ZRat) -> Result<PartialFractionForm> {
        let mut num = u.num.clone();
        let mut den = Vec::new();
        if u.zpow < 0 {
            den.push((C::new(0.0, 0.0), (-u.zpow) as u32));
        } else {
            num = num.mul(&Poly::monomial(C::new(1.0, 0.0), u.zpow as usize));
        }
        if u.ea > 0 {
            den.push((self.a, u.ea));
        }
        if u.eb > 0 {
            den.push((self.b, u.eb));
        }
        partial_fractions(&num, &den)
    }
}

/// Quadratic polynomial in (x, y): coefficients of 1, x, y, x², xy, y².
type XyPoly = [f64; 6];

fn form_pq(index: usize) -> Result<(XyPoly, XyPoly)> {
    Ok(match index {
        1 => ([0., 0., -1., 0., 0., 0.], [0., 1., 0., 0., 0., 0.]),
        2 => ([0.; 6], [0., 0., 0., 1., 0., 1.]),
        3 => ([0., 0., 0., -1., 0., -1.], [0.; 6]),
        4 => ([0., 0., 0., 0., 2., 0.], [0., 0., 0., 1., 0., -1.]),
        5 => ([0., 0., 0., -1., 0., 1.], [0., 0., 0., 0., 2., 0.]),
        _ => return Err(Error::InvalidIndex(index)),
    })
}

fn d_dx(p: &XyPoly) -> XyPoly {
    [p[1], 2.0 * p[3], p[4], 0., 0., 0.]
}

fn d_dy(p: &XyPoly) -> XyPoly {
    [p[2], p[4], 2.0 * p[5], 0., 0., 0.]
}

fn xy_eval(p: &XyPoly, x: C, y: C) -> C {
    p[0] + x * p[1] + y * p[2] + x * x * p[3] + x * y * p[4] + y * y * p[5]
}

fn xy_zrat(ch: &Chart, p: &XyPoly, x: &ZRat, y: &ZRat) -> ZRat {
    let one = ch.lin(vec![C::new(1.0, 0.0)], 0);
    let monos = [
        one,
        x.clone(),
        y.clone(),
        ch.mul(x, x),
        ch.mul(x, y),
        ch.mul(y, y),
    ];
    let mut acc = ch.lin(vec![], 0);
    for (c, m) in p.iter().zip(monos.iter()) {
        if *c != 0.0 {
            acc = ch.add(&acc, &ch.scale(m, C::new(*c, 0.0)));
        }
    }
    acc
}

/// Pullback of `(p dx + q dy)/(2y-1)²` for the form with the given index.
pub fn omega_form(index: usize, h: impl Into<C>) -> Result<RelativeOneForm> {
    let h = h.into();
    let (p, q) = form_pq(index)?;
    let pu = punctures(h)?;
    let ch = Chart { a: pu.a, b: pu.b };
    let r2 = pu.r2;
    let half = 0.5;
    let k = 2.0 * h - 1.0;

    let x = ch.lin(vec![r2 * half, C::new(0.0, 0.0), C::new(half, 0.0)], -1);
    let y = ch.lin(vec![I * r2 * half, h, -I * half], -1);
    let x_z = ch.lin(vec![-r2 * half, C::new(0.0, 0.0), C::new(half, 0.0)], -2);
    let y_z = ch.lin(vec![-I * r2 * half, C::new(0.0, 0.0), -I * half], -2);
    let x_h = ch.lin(vec![k * half], -1);
    let y_h = ch.lin(vec![I * k * half, C::new(1.0, 0.0)], -1);
    let x_zh = ch.lin(vec![-k * half], -2);
    let y_zh = ch.lin(vec![-I * k * half], -2);
    let inv_w2 = ZRat { num: Poly::constant(C::new(-1.0, 0.0)), zpow: 2, ea: 2, eb: 2 };
    let wh_over_w = ZRat { num: Poly(vec![-k, 2.0 * I]), zpow: 0, ea: 1, eb: 1 };

    let pz = xy_zrat(&ch, &p, &x, &y);
    let qz = xy_zrat(&ch, &q, &x, &y);
    let ph = ch.add(
        &ch.mul(&xy_zrat(&ch, &d_dx(&p), &x, &y), &x_h),
        &ch.mul(&xy_zrat(&ch, &d_dy(&p), &x, &y), &y_h),
    );
    let qh = ch.add(
        &ch.mul(&xy_zrat(&ch, &d_dx(&q), &x, &y), &x_h),
        &ch.mul(&xy_zrat(&ch, &d_dy(&q), &x, &y), &y_h),
    );

    let f_num = ch.add(&ch.mul(&pz, &x_z), &ch.mul(&qz, &y_z));
    let f = ch.mul(&f_num, &inv_w2);
    let phi = ch.mul(&ch.add(&ch.mul(&pz, &x_h), &ch.mul(&qz, &y_h)), &inv_w2);
    let fh_num = [
        ch.mul(&ph, &x_z),
        ch.mul(&pz, &x_zh),
        ch.mul(&qh, &y_z),
        ch.mul(&qz, &y_zh),
    ]
    .iter()
    .fold(ch.lin(vec![], 0), |acc, t| ch.add(&acc, t));
    let fh = ch.add(
        &ch.mul(&fh_num, &inv_w2),
        &ch.scale(&ch.mul(&f, &wh_over_w), C::new(-2.0, 0.0)),
    );

    Ok(RelativeOneForm {
        F: ch.to_pff(&f)?,
        Phi: ch.to_pff(&phi)?,
        dF_dh: Some(ch.to_pff(&fh)?),
    })
}

/// `sum_k lambda_k omega_k` at level `h`.
pub fn perturbation_form(lambda: &Parameters, h: impl Into<C>) -> Result<RelativeOneForm> {
    let h = h.into();
    let forms = (1..=5).map(|k| omega_form(k, h)).collect::<Result<Vec<_>>>()?;
    let l = lambda.to_array();
    let terms: Vec<(C, &RelativeOneForm)> = l
        .iter()
        .zip(forms.iter())
        .map(|(c, w)| (C::new(*c, 0.0), w))
        .collect();
    Ok(RelativeOneForm::combination(&terms))
}

/// Direct evaluation of the pulled-back form through the chart Jacobian.
pub fn pullback_oracle(index: usize, h: impl Into<C>, z: C) -> Result<(C, C)> {
    let h = h.into();
    let (p, q) = form_pq(index)?;
    let pu = punctures(h)?;
    if z.norm() < 1e-14 || (z - pu.a).norm() < 1e-14 || (z - pu.b).norm() < 1e-14 {
        return Err(Error::Puncture);
    }
    let (x, y) = chart_from_zh(z, h)?;
    let r2 = pu.r2;
    let x_z = (z * z - r2) / (2.0 * z * z);
    let y_z = -I * (z * z + r2) / (2.0 * z * z);
    let x_h = (2.0 * h - 1.0) / (2.0 * z);
    let y_h = 1.0 + I * (2.0 * h - 1.0) / (2.0 * z);
    let w = 2.0 * y - 1.0;
    let pv = xy_eval(&p, x, y);
    let qv = xy_eval(&q, x, y);
    Ok(((pv * x_z + qv * y_z) / (w * w), (pv * x_h + qv * y_h) / (w * w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratcalc::residue;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn hamiltonian_values() {
        assert_eq!(hamiltonian(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(hamiltonian(0.0, 1.0).unwrap(), 1.0);
        assert!((hamiltonian(0.0, -1.0).unwrap() + 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(hamiltonian(1.0, 0.5), Err(Error::SingularLine));
    }

    #[test]
    fn chart_examples() {
        let (z, h) = chart_to_zh(0.0, -1.0).unwrap();
        assert!(close(z, C::new(0.0, -2.0 / 3.0), 1e-15));
        assert!((z.norm_sqr() - h * (h - 1.0)).abs() < 1e-15);
        let (z, h) = chart_to_zh(0.0, 2.0).unwrap();
        assert!(close(z, C::new(0.0, 2.0 / 3.0), 1e-15));
        assert!((h - 4.0 / 3.0).abs() < 1e-15);
        let (x, y) = chart_from_zh(C::new(0.0, -2.0 / 3.0), -1.0 / 3.0).unwrap();
        assert!(close(x, C::new(0.0, 0.0), 1e-15) && close(y, C::new(-1.0, 0.0), 1e-15));
        assert_eq!(chart_from_zh(C::new(0.0, 0.0), 2.0), Err(Error::Puncture));
        let r = 2f64.sqrt();
        let (x, y) = chart_from_zh(C::new(r, 0.0), -1.0).unwrap();
        assert!((x.re - r).abs() < 1e-15 && y.im.abs() < 1e-15);
        assert!((x.re * x.re + (y.re + 1.0).powi(2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn puncture_examples() {
        let p = punctures(-1.0 / 3.0).unwrap();
        assert!(close(p.a, C::new(0.0, 1.0 / 3.0), 1e-15));
        assert!(close(p.b, C::new(0.0, 4.0 / 3.0), 1e-15));
        assert!(close(p.r2, C::new(4.0 / 9.0, 0.0), 1e-15));
        let p = punctures(2.0).unwrap();
        assert!(close(p.a, C::new(0.0, -2.0), 1e-15));
        assert!(close(p.b, C::new(0.0, -1.0), 1e-15));
        assert!(close(p.r2, C::new(2.0, 0.0), 1e-15));
        assert!(punctures(0.0).is_err() && punctures(1.0).is_err());
    }

    #[test]
    fn loop_windings() {
        let h = -1.0 / 3.0;
        let p = punctures(h).unwrap();
        let d = canonical_loop(LoopKind::Delta, h, BasepointPolicy::Canonical).unwrap();
        assert_eq!(winding_vector(&d, &p).unwrap(), [1, 1, 0]);
        assert!((d.basepoint() - C::new(2.0 / 3.0, 0.0)).norm() < 1e-15);
        let a = canonical_loop(LoopKind::Alpha, h, BasepointPolicy::Canonical).unwrap();
        assert_eq!(winding_vector(&a, &p).unwrap(), [0, 1, 0]);
        let p2 = punctures(2.0).unwrap();
        let dt = canonical_loop(LoopKind::DeltaTilde, 2.0, BasepointPolicy::Canonical).unwrap();
        assert_eq!(winding_vector(&dt, &p2).unwrap(), [1, 0, 1]);
        assert!(canonical_loop(LoopKind::Delta, 2.0, BasepointPolicy::Canonical).is_err());
        assert!(canonical_loop(LoopKind::DeltaTilde, -2.0, BasepointPolicy::Canonical).is_err());
    }

    #[test]
    fn f2_and_phi2_match_closed_forms() {
        let h = C::new(-0.7, 0.0);
        let w = omega_form(2, h).unwrap();
        let p = punctures(h).unwrap();
        assert!(close(residue(&w.F, p.c), -h / 2.0, 1e-13));
        assert!(close(residue(&w.F, p.a), h / 2.0, 1e-13));
        assert!(close(residue(&w.F, p.b), h / 2.0, 1e-13));
        assert!(close(residue(&w.Phi, p.a), I * h / 2.0, 1e-13));
        assert!(close(residue(&w.Phi, p.b), I * h / 2.0, 1e-13));
        assert_eq!(w.F.max_order(), 1);
    }

    #[test]
    fn f5_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let h = C::new(rng.gen_range(-2.0..-0.1), 0.0);
            let w = omega_form(5, h).unwrap();
            let p = punctures(h).unwrap();
            assert!(close(w.F.polynomial_part[0], C::new(0.5, 0.0), 1e-13));
            let z = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let (a, b) = (p.a, p.b);
            let f5 = 0.5 - I * (h - 1.0) * (1.0 / z - 1.0 / (z - a) + 1.0 / (z - b))
                - h * (h - 1.0) / 2.0 * (1.0 / (z * z) + 1.0 / ((z - a) * (z - a)))
                - (h - 1.0) * (h - 1.0) / 2.0 / ((z - b) * (z - b));
            assert!(close(w.F.eval(z), f5, 1e-11));
            let f5h = -I * (1.0 / z - 1.0 / (z - a) + 1.0 / (z - b))
                - (h - 0.5) / (z * z)
                - 0.5 / ((z - a) * (z - a))
                - 2.0 * (h - 1.0) / ((z - b) * (z - b))
                + I * h * (h - 1.0) / (z - a).powu(3)
                + I * (h - 1.0) * (h - 1.0) / (z - b).powu(3);
            assert!(close(w.dF_dh.as_ref().unwrap().eval(z), f5h, 1e-9));
        }
    }

    #[test]
    fn oracle_examples() {
        let r = 2f64.sqrt();
        for (k, h, z) in [
            (2, -1.0, C::new(r, 0.0)),
            (5, -1.0, C::from_polar(r, std::f64::consts::PI / 5.0)),
            (1, 2.0, C::new(0.3, r)),
        ] {
            let w = omega_form(k, h).unwrap();
            let (f, phi) = pullback_oracle(k, h, z).unwrap();
            assert!(close(w.F.eval(z), f, 1e-9));
            assert!(close(w.Phi.eval(z), phi, 1e-9));
        }
        assert_eq!(omega_form(6, -1.0), Err(Error::InvalidIndex(6)));
        assert_eq!(pullback_oracle(1, -1.0, C::new(0.0, 0.0)), Err(Error::Puncture));
    }

    #[test]
    fn dh_derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=5 {
            for _ in 0..10 {
                let h: f64 = if rng.gen_bool(0.5) { rng.gen_range(-2.0..-0.1) } else { rng.gen_range(1.1..3.0) };
                let z = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let step = 1e-5 * h.abs().max(1.0);
                let fp = omega_form(k, h + step).unwrap().F.eval(z);
                let fm = omega_form(k, h - step).unwrap().F.eval(z);
                let fd = (fp - fm) / (2.0 * step);
                let an = omega_form(k, h).unwrap().dF_dh.unwrap().eval(z);
                assert!((an - fd).norm() <= 1e-6 * an.norm().max(1.0), "k={k} h={h} {an} {fd}");
            }
        }
    }

    #[test]
    fn chart_jacobian_matches_finite_difference() {
        let h = C::new(-0.8, 0.0);
        let z = C::new(0.7, 0.4);
        let e = 1e-4;
        let fd = |g: &dyn Fn(C, C) -> C, dz: C, dh: C| (g(z + dz, h + dh) - g(z - dz, h - dh)) / (2.0 * e);
        let x = |z: C, h: C| chart_from_zh(z, h).unwrap().0;
        let r2 = h * (h - 1.0);
        let x_z = (z * z - r2) / (2.0 * z * z);
        assert!((fd(&x, C::new(e, 0.0), C::new(0.0, 0.0)) - x_z).norm() < 1e-7);
        let x_h = (2.0 * h - 1.0) / (2.0 * z);
        assert!((fd(&x, C::new(0.0, 0.0), C::new(e, 0.0)) - x_h).norm() < 1e-7);
    }

    proptest! {
        #[test]
        fn chart_round_trip(x in -5.0..5.0f64, y in -5.0..5.0f64) {
            let h = match hamiltonian(x, y) { Ok(h) => h, Err(_) => return Ok(()) };
            prop_assume!(h.abs() > 0.05 && h.abs() < 10.0 && (h - 1.0).abs() > 0.05);
            prop_assume!(!(0.0..=1.0).contains(&h));
            let (z, h2) = chart_to_zh(x, y).unwrap();
            let (xb, yb) = chart_from_zh(z, h2).unwrap();
            prop_assert!((xb.re - x).abs() < 1e-10 * (1.0 + x.abs()) && xb.im.abs() < 1e-10 * (1.0 + x.abs()));
            prop_assert!((yb.re - y).abs() < 1e-10 * (1.0 + y.abs()) && yb.im.abs() < 1e-10 * (1.0 + y.abs()));
            prop_assert!((z.norm_sqr() - h * (h - 1.0)).abs() < 1e-9 * (1.0 + h * h));
        }

        #[test]
        fn puncture_algebra(hr in -10.0..10.0f64, hi in -3.0..3.0f64) {
            let h = C::new(hr, hi);
            prop_assume!(h.norm() > 1e-6 && (h - 1.0).norm() > 1e-6);
            let p = punctures(h).unwrap();
            prop_assert!((p.b - p.a - I).norm() < 1e-14 * (1.0 + h.norm()));
            prop_assert!((p.r2 + p.a * p.b).norm() < 1e-13 * (1.0 + h.norm_sqr()));
        }

        #[test]
        fn forms_match_oracle(k in 1usize..=5, hr in -3.0..3.0f64, zr in -3.0..3.0f64, zi in -3.0..3.0f64) {
            prop_assume!(hr.abs() > 0.05 && (hr - 1.0).abs() > 0.05);
            let z = C::new(zr, zi);
            let p = punctures(hr).unwrap();
            prop_assume!(z.norm() > 0.05 && (z - p.a).norm() > 0.05 && (z - p.b).norm() > 0.05);
            let w = omega_form(k, hr).unwrap();
            let (f, phi) = pullback_oracle(k, hr, z).unwrap();
            prop_assert!(close(w.F.eval(z), f, 1e-9));
            prop_assert!(close(w.Phi.eval(z), phi, 1e-9));
        }

        #[test]
        fn homology_relations(h in prop_oneof![-5.0..-0.05f64, 1.05..5.0f64]) {
            let p = punctures(h).unwrap();
            let w = |k| winding_vector(&canonical_loop(k, h, BasepointPolicy::Canonical).unwrap(), &p).unwrap();
            let (a, b, g) = (w(LoopKind::Alpha), w(LoopKind::Beta), w(LoopKind::Gamma));
            let sum = |u: [i64; 3], v: [i64; 3]| [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
            if h < 0.0 {
                prop_assert_eq!(w(LoopKind::Delta), sum(a, g));
            } else {
                prop_assert_eq!(w(LoopKind::DeltaTilde), sum(b, g));
            }
        }
    }
}
