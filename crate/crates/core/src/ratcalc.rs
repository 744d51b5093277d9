//! Complex rational functions of one variable in partial-fraction form.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pathint::PathLoop;

type C = Complex64;

/// Two poles closer than this are the same pole.
pub const POLE_TOL: f64 = 1e-12;

const I: C = C::new(0.0, 1.0);

/// Dense complex polynomial, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub Vec<C>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: C) -> Self {
        Poly(vec![c]).trimmed()
    }

    /// `z - r`
    pub fn linear(r: C) -> Self {
        Poly(vec![-r, C::new(1.0, 0.0)])
    }

    pub fn from_real(c: &[f64]) -> Self {
        Poly(c.iter().map(|&v| C::new(v, 0.0)).collect()).trimmed()
    }

    pub fn monomial(c: C, k: usize) -> Self {
        let mut v = vec![C::new(0.0, 0.0); k + 1];
        v[k] = c;
        Poly(v).trimmed()
    }

    pub fn trimmed(mut self) -> Self {
        while matches!(self.0.last(), Some(c) if *c == C::new(0.0, 0.0)) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == C::new(0.0, 0.0))
    }

    /// Degree of the trimmed polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        let t = self.clone().trimmed();
        t.0.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C) -> C {
        self.0.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut v = vec![C::new(0.0, 0.0); n];
        for (k, c) in self.0.iter().enumerate() {
            v[k] += c;
        }
        for (k, c) in other.0.iter().enumerate() {
            v[k] += c;
        }
        Poly(v).trimmed()
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(C::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect()).trimmed()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::zero();
        }
        let mut v = vec![C::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly(v).trimmed()
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::constant(C::new(1.0, 0.0));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
        .trimmed()
    }

    /// Quotient and remainder of long division by a nonzero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let d = divisor.clone().trimmed();
        assert!(!d.0.is_empty(), "division by the zero polynomial");
        let mut rem = self.clone().trimmed().0;
        let dn = d.0.len();
        if rem.len() < dn {
            return (Poly::zero(), Poly(rem));
        }
        let lead = d.0[dn - 1];
        let mut q = vec![C::new(0.0, 0.0); rem.len() - dn + 1];
        for k in (0..q.len()).rev() {
            let c = rem[k + dn - 1] / lead;
            q[k] = c;
            for (j, dj) in d.0.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
        }
        rem.truncate(dn - 1);
        (Poly(q).trimmed(), Poly(rem).trimmed())
    }

    /// Coefficients of `p(z0 + w)` in powers of `w`.
    pub fn taylor_shift(&self, z0: C) -> Poly {
        let mut c = self.0.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = c[j + 1] * z0;
                c[j] += t;
            }
        }
        Poly(c)
    }
}

/// One principal-part term `coefficient / (z - pole)^order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm {
    pub pole: C,
    pub order: u32,
    pub coefficient: C,
}

/// A rational function as polynomial part plus principal parts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialFractionForm {
    pub polynomial_part: Vec<C>,
    pub pole_terms: Vec<PoleTerm>,
}

impl PartialFractionForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_parts(polynomial_part: Vec<C>, pole_terms: Vec<PoleTerm>) -> Self {
        let mut f = PartialFractionForm {
            polynomial_part: Vec::new(),
            pole_terms: Vec::new(),
        };
        f.polynomial_part = Poly(polynomial_part).trimmed().0;
        for t in pole_terms {
            f.push_term(t);
        }
        f.normalize();
        f
    }

    /// Adds `c/(z-p)^k`, merging with an existing pole closer than [`POLE_TOL`].
    fn push_term(&mut self, t: PoleTerm) {
        assert!(t.order >= 1, "pole order must be positive");
        let p = self
            .pole_terms
            .iter()
            .map(|s| s.pole)
            .find(|q| (q - t.pole).norm() < POLE_TOL)
            .unwrap_or(t.pole);
        if let Some(s) = self
            .pole_terms
            .iter_mut()
            .find(|s| s.pole == p && s.order == t.order)
        {
            s.coefficient += t.coefficient;
        } else {
            self.pole_terms.push(PoleTerm { pole: p, ..t });
        }
    }

    fn normalize(&mut self) {
        let scale = self
            .pole_terms
            .iter()
            .map(|t| t.coefficient.norm())
            .chain(self.polynomial_part.iter().map(|c| c.norm()))
            .fold(0.0, f64::max);
        let cut = scale * 1e-15;
        self.pole_terms
            .retain(|t| t.coefficient.norm() > cut && t.coefficient != C::new(0.0, 0.0));
        for c in self.polynomial_part.iter_mut() {
            if c.norm() <= cut {
                *c = C::new(0.0, 0.0);
            }
        }
        self.polynomial_part = Poly(std::mem::take(&mut self.polynomial_part)).trimmed().0;
        self.pole_terms.sort_by(|a, b| {
            (a.pole.re, a.pole.im, a.order)
                .partial_cmp(&(b.pole.re, b.pole.im, b.order))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    pub fn eval(&self, z: C) -> C {
        let mut s = Poly(self.polynomial_part.clone()).eval(z);
        for t in &self.pole_terms {
            s += t.coefficient / (z - t.pole).powu(t.order);
        }
        s
    }

    /// Distinct pole locations.
    pub fn poles(&self) -> Vec<C> {
        let mut out: Vec<C> = Vec::new();
        for t in &self.pole_terms {
            if !out.iter().any(|p| (p - t.pole).norm() < POLE_TOL) {
                out.push(t.pole);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let poly = Poly(self.polynomial_part.clone()).add(&Poly(other.polynomial_part.clone()));
        let mut f = PartialFractionForm {
            polynomial_part: poly.0,
            pole_terms: self.pole_terms.clone(),
        };
        for t in &other.pole_terms {
            f.push_term(*t);
        }
        f.normalize();
        f
    }

    pub fn scale(&self, s: C) -> Self {
        let mut f = PartialFractionForm {
            polynomial_part: self.polynomial_part.iter().map(|c| c * s).collect(),
            pole_terms: self
                .pole_terms
                .iter()
                .map(|t| PoleTerm {
                    coefficient: t.coefficient * s,
                    ..*t
                })
                .collect(),
        };
        f.normalize();
        f
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C::new(-1.0, 0.0)))
    }

    /// Linear combination `sum c_k f_k`.
    pub fn combination(terms: &[(C, &PartialFractionForm)]) -> Self {
        terms
            .iter()
            .fold(Self::zero(), |acc, (c, f)| acc.add(&f.scale(*c)))
    }

    /// z-derivative.
    pub fn derivative(&self) -> Self {
        let poly = Poly(self.polynomial_part.clone()).derivative();
        let terms = self
            .pole_terms
            .iter()
            .map(|t| PoleTerm {
                pole: t.pole,
                order: t.order + 1,
                coefficient: -t.coefficient * t.order as f64,
            })
            .collect();
        PartialFractionForm::from_parts(poly.0, terms)
    }

    /// Highest pole order, zero for a polynomial.
    pub fn max_order(&self) -> u32 {
        self.pole_terms.iter().map(|t| t.order).max().unwrap_or(0)
    }
}

impl fmt::Display for PartialFractionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, c) in self.polynomial_part.iter().enumerate() {
            parts.push(match k {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                _ => format!("({c})z^{k}"),
            });
        }
        for t in &self.pole_terms {
            parts.push(format!("({})/(z-({}))^{}", t.coefficient, t.pole, t.order));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Decomposes `numerator / prod (z - r)^m` by the limit formulas at each root.
pub fn partial_fractions(numerator: &Poly, denominator: &[(C, u32)]) -> Result<PartialFractionForm> {
    for (i, (r, m)) in denominator.iter().enumerate() {
        if *m == 0 {
            return Err(Error::Invariant(format!("root {r} has multiplicity 0")));
        }
        for (s, _) in &denominator[i + 1..] {
            if (r - s).norm() < POLE_TOL {
                return Err(Error::Invariant(format!(
                    "roots {r} and {s} coincide within {POLE_TOL:e}"
                )));
            }
        }
    }
    let full = denominator
        .iter()
        .fold(Poly::constant(C::new(1.0, 0.0)), |acc, (r, m)| {
            acc.mul(&Poly::linear(*r).pow(*m))
        });
    let (quotient, _) = numerator.div_rem(&full);

    let mut terms = Vec::new();
    for (idx, &(p, m)) in denominator.iter().enumerate() {
        let m = m as usize;
        let mut num = numerator.taylor_shift(p).0;
        num.resize(m.max(num.len()), C::new(0.0, 0.0));
        // other factors as a truncated series in w = z - p
        let mut other = vec![C::new(0.0, 0.0); m];
        other[0] = C::new(1.0, 0.0);
        for (jdx, &(q, mq)) in denominator.iter().enumerate() {
            if jdx == idx {
                continue;
            }
            let base = Poly(vec![p - q, C::new(1.0, 0.0)]).pow(mq);
            other = series_mul(&other, &base.0, m);
        }
        let g = series_div(&num[..m], &other, m);
        for (k, gk) in g.iter().enumerate() {
            terms.push(PoleTerm {
                pole: p,
                order: (m - k) as u32,
                coefficient: *gk,
            });
        }
    }
    Ok(PartialFractionForm::from_parts(quotient.0, terms))
}

fn series_mul(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); n];
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate() {
            if i + j < n {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn series_div(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); n];
    for k in 0..n {
        let mut s = a.get(k).copied().unwrap_or_default();
        for j in 1..=k {
            s -= b.get(j).copied().unwrap_or_default() * out[k - j];
        }
        out[k] = s / b[0];
    }
    out
}

/// Coefficient of `(z - p)^-1`, zero when `p` is not a pole.
pub fn residue(f: &PartialFractionForm, p: C) -> C {
    f.pole_terms
        .iter()
        .filter(|t| t.order == 1 && (t.pole - p).norm() < POLE_TOL)
        .map(|t| t.coefficient)
        .sum()
}

/// `2 pi i sum_p wind(loop, p) res(f, p)`.
pub fn residue_sum_integral(f: &PartialFractionForm, path: &PathLoop) -> Result<C> {
    let mut total = C::new(0.0, 0.0);
    for p in f.poles() {
        let d = path.distance_to(p);
        if d <= 1e-9 {
            return Err(Error::PoleOnPath(p.to_string()));
        }
        let w = path.winding_number(p)?;
        if w != 0 {
            total += residue(f, p) * w as f64;
        }
    }
    Ok(total * 2.0 * PI * I)
}
