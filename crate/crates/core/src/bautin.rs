//! Parameter-space algebra: normal form table, focal values, Bautin ideals,
//! center components, the Lotka-Volterra first integral, the involution
//! exchanging the two foci, and classification of arcs on the blow-up.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvegeom::Parameters;
use crate::error::{Error, Result};
use crate::melnikov::{BifurcationPair, Center};

type C = Complex64;

const MEMBERSHIP_TOL: f64 = 1e-12;

/// Coefficients `a_ij`, `b_ij` (indexed `[i][j]` for `x^i y^j`) of
/// `x' = -y - x² + y² + Σ a_ij x^i y^j`, `y' = x - 2xy - Σ b_ij x^i y^j`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadraticCoefficients {
    pub a: [[f64; 3]; 3],
    pub b: [[f64; 3]; 3],
}

impl QuadraticCoefficients {
    pub fn vector_field(&self, x: f64, y: f64) -> (f64, f64) {
        let mut sa = 0.0;
        let mut sb = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let m = x.powi(i as i32) * y.powi(j as i32);
                sa += self.a[i][j] * m;
                sb += self.b[i][j] * m;
            }
        }
        (-y - x * x + y * y + sa, x - 2.0 * x * y - sb)
    }
}

pub fn normal_form_substitution(lambda: &Parameters) -> QuadraticCoefficients {
    let Parameters { l1, l2, l3, l4, l5 } = *lambda;
    let mut q = QuadraticCoefficients::default();
    q.a[1][0] = l1;
    q.b[0][1] = -l1;
    q.a[2][0] = l2 + l4;
    q.a[0][2] = l2 - l4;
    q.a[1][1] = 2.0 * l5;
    q.b[2][0] = -l3 - l5;
    q.b[0][2] = -l3 + l5;
    q.b[1][1] = 2.0 * l4;
    q
}

pub fn focal_values(lambda: &Parameters) -> (f64, f64, f64) {
    let (a, b, c) = (lambda.a(), lambda.b(), lambda.c());
    let bc = b.conj();
    let v3 = 2.0 * PI * (a * b).im;
    let v5 = 2.0 / 3.0 * ((2.0 * a + bc) * (a - 2.0 * bc) * bc * c).im;
    let v7 = 1.25 * (b.norm_sqr() - c.norm_sqr()) * ((2.0 * a + bc) * bc * bc * c).im;
    (v3, v5, v7)
}

pub fn ideal_generators(center: Center, lambda: &Parameters) -> (f64, f64, f64) {
    let Parameters { l1, l2, l3, l4, l5 } = *lambda;
    match center {
        Center::First => (l1, l3, l2 * l5),
        Center::Second => (l1 + l3 + l1 * l2, l5, l3 * l4),
    }
}

/// Irreducible components of the two center sets near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CenterComponent {
    RV1,
    LV1,
    RV2,
    LV2,
}

impl CenterComponent {
    pub fn center(self) -> Center {
        match self {
            CenterComponent::RV1 | CenterComponent::LV1 => Center::First,
            _ => Center::Second,
        }
    }
}

pub fn center_membership(lambda: &Parameters) -> BTreeSet<CenterComponent> {
    let Parameters { l1, l2, l3, l4, l5 } = *lambda;
    let z = |v: f64| v.abs() <= MEMBERSHIP_TOL;
    let mut out = BTreeSet::new();
    if z(l1) && z(l3) && z(l5) {
        out.insert(CenterComponent::RV1);
        out.insert(CenterComponent::RV2);
    }
    if z(l1) && z(l2) && z(l3) {
        out.insert(CenterComponent::LV1);
    }
    if z(l1 + l3 + l1 * l2) && z(l4) && z(l5) {
        out.insert(CenterComponent::LV2);
    }
    out
}

/// Continuously tracked branch of `arg z`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThetaState {
    pub theta: Option<f64>,
}

/// Darboux first integral on the second Lotka-Volterra branch, in the
/// coordinate `z = x + iy`. Returns the value and the updated branch of `arg z`.
pub fn lv_first_integral(lambda: &Parameters, x: f64, y: f64, state: ThetaState) -> Result<(f64, ThetaState)> {
    let Parameters { l1, l2, l3, l4, l5 } = *lambda;
    let z = |v: f64| v.abs() <= MEMBERSHIP_TOL;
    if !(z(l1 + l3 + l1 * l2) && z(l4) && z(l5)) {
        return Err(Error::NotOnBranch("l1 + l3 + l1*l2 = l4 = l5 = 0"));
    }
    let base = 1.0 - 2.0 * (l1 * x + y) / (1.0 + l1 * l1);
    if base.abs() < 1e-6 {
        return Err(Error::InvariantLine(base.abs()));
    }
    let principal = y.atan2(x);
    let theta = match state.theta {
        None => principal,
        Some(prev) => principal + 2.0 * PI * ((prev - principal) / (2.0 * PI)).round(),
    };
    let r2 = x * x + y * y;
    let value = r2 * (-2.0 * l1 * theta).exp() / base.abs().powf(1.0 - l2 + l1 * l3);
    Ok((value, ThetaState { theta: Some(theta) }))
}

/// Affine change `z = z0 + c w + m conj(c) conj(w)` together with the time factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvolutionMap {
    pub z0: C,
    pub c: C,
    pub m: C,
    pub time_factor: f64,
}

impl InvolutionMap {
    pub fn apply(&self, w: C) -> C {
        self.z0 + self.c * w + self.m * self.c.conj() * w.conj()
    }

    /// Pulls a velocity back through the linear part of the map.
    pub fn pull_velocity(&self, dz: C) -> C {
        (dz - self.m * dz.conj()) / (self.c * (1.0 - self.m.norm_sqr()))
    }
}

fn complex_field(lambda: &Parameters, z: C) -> C {
    let e1 = C::new(lambda.l1, 1.0);
    e1 * z + lambda.a() * z * z + lambda.b() * z * z.conj() + lambda.c() * z.conj() * z.conj()
}

/// Parameters of the normal form at the focus other than the origin (near `(0, 1)` for small
/// parameters), and the affine map realizing it.
pub fn involution_map(lambda: &Parameters) -> Result<(Parameters, InvolutionMap)> {
    let (a, b, c) = (lambda.a(), lambda.b(), lambda.c());
    let e1 = C::new(lambda.l1, 1.0);
    // f(z + u) ≈ f + dz u + dzb conj(u)
    let jac = |z: C| (e1 + 2.0 * a * z + b * z.conj(), b * z + 2.0 * c * z.conj());
    let newton = |mut z: C| -> Option<C> {
        for _ in 0..100 {
            let f = complex_field(lambda, z);
            let (dz, dzb) = jac(z);
            let det = dz.norm_sqr() - dzb.norm_sqr();
            if det.abs() < 1e-14 {
                return None;
            }
            let u = (dz.conj() * (-f) - dzb * (-f).conj()) / det;
            z += u;
            if u.norm() < 1e-16 * (1.0 + z.norm()) {
                break;
            }
        }
        Some(z)
    };
    // The origin's basin can swallow i, so try the imaginary axis first and then a polar grid.
    // A quadratic field has at most two foci, so the first hit is the one.
    let axis = [1.0, 0.7, 1.5, 2.0, 0.5, 3.0].map(|t| C::new(0.0, t));
    let polar = (0..18).flat_map(|k| {
        (0..8).map(move |j| C::from_polar(0.3 * 1.6f64.powi(k), PI / 2.0 + j as f64 * PI / 4.0 + 0.1 * k as f64))
    });
    let zf = axis
        .into_iter()
        .chain(polar)
        .filter_map(newton)
        .find(|&z| {
            let (dz, dzb) = jac(z);
            // rotation type: the linear part has non-real eigenvalues
            complex_field(lambda, z).norm() <= 1e-12 * (1.0 + z.norm_sqr())
                && z.norm() > 1e-6
                && dz.im.powi(2) > dzb.norm_sqr()
        })
        .ok_or_else(|| Error::Invariant("no focus other than the origin".into()))?;
    let e1p = e1 + 2.0 * a * zf + b * zf.conj();
    let e2p = b * zf + 2.0 * c * zf.conj();
    let s = if e1p.im < 0.0 { -1.0 } else { 1.0 };
    let p = e1p * s;
    let q = e2p * s;
    let m = if q.norm() == 0.0 {
        C::new(0.0, 0.0)
    } else {
        let disc = p.im * p.im - q.norm_sqr();
        if disc <= 0.0 {
            return Err(Error::Invariant("focus is not of rotation type".into()));
        }
        C::new(0.0, p.im - disc.sqrt()) / q.conj()
    };
    let sigma = p + q * m.conj();
    let mb = m.conj();
    let alpha = (a + b * mb + c * mb * mb) * s;
    let beta = (2.0 * a * m + b * (1.0 + m.norm_sqr()) + 2.0 * c * mb) * s;
    let gamma = (a * m * m + b * m + c) * s;
    let den = 1.0 - m.norm_sqr();
    let tau = 1.0 / sigma.im;
    let r_vv = (alpha - m * gamma.conj()) / den * tau;
    let r_vvb = (beta - m * beta.conj()) / den * tau;
    let r_vbvb = (gamma - m * alpha.conj()) / den * tau;
    let cs = -1.0 / r_vv;
    let b_new = r_vvb * cs.conj();
    let c_new = r_vbvb * cs.conj() * cs.conj() / cs;
    let lp = Parameters::new(sigma.re / sigma.im, b_new.re, b_new.im, c_new.re, c_new.im);
    Ok((
        lp,
        InvolutionMap {
            z0: zf,
            c: cs,
            m,
            time_factor: s * tau,
        },
    ))
}

pub fn involution_parameters(lambda: &Parameters) -> Result<Parameters> {
    Ok(involution_map(lambda)?.0)
}

/// Components of the exceptional divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DivisorComponent {
    E1,
    E2,
    E3,
}

impl fmt::Display for DivisorComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Result tag of [`classify_arc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArcClass {
    E1,
    E2,
    E3,
    #[serde(rename = "inside_center_variety_1")]
    InsideCenterVariety1,
    #[serde(rename = "inside_center_variety_2")]
    InsideCenterVariety2,
}

impl fmt::Display for ArcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArcClass::E1 => write!(f, "E1"),
            ArcClass::E2 => write!(f, "E2"),
            ArcClass::E3 => write!(f, "E3"),
            ArcClass::InsideCenterVariety1 => write!(f, "inside_center_variety_1"),
            ArcClass::InsideCenterVariety2 => write!(f, "inside_center_variety_2"),
        }
    }
}

/// Polynomial in `e` with rational coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RatPoly(pub Vec<BigRational>);

impl RatPoly {
    pub fn zero() -> Self {
        RatPoly(Vec::new())
    }

    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = c;
        RatPoly(v).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while matches!(self.0.last(), Some(c) if c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Order of vanishing at `e = 0`, `None` for the zero polynomial.
    pub fn valuation(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.0.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, o: &RatPoly) -> RatPoly {
        let n = self.0.len().max(o.0.len());
        RatPoly((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect()).trimmed()
    }

    pub fn mul(&self, o: &RatPoly) -> RatPoly {
        if self.0.is_empty() || o.0.is_empty() {
            return RatPoly::zero();
        }
        let mut v = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        RatPoly(v).trimmed()
    }

    pub fn eval_f64(&self, e: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * e + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let coef = if mag.is_integer() { mag.to_integer().to_string() } else { mag.to_string() };
            let power = match k {
                1 => "e".to_string(),
                _ => format!("e^{k}"),
            };
            let term = match (k, coef.as_str()) {
                (0, _) => coef,
                (_, "1") => power,
                _ => format!("{coef}*{power}"),
            };
            write!(f, "{sign}{term}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Polynomial arc `e -> lambda(e)` with `lambda(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcGerm {
    components: [RatPoly; 5],
}

impl ArcGerm {
    pub fn new(components: [RatPoly; 5]) -> Result<Self> {
        if components.iter().any(|p| !p.coeff(0).is_zero()) {
            return Err(Error::Parse("arc components must vanish at e = 0".into()));
        }
        if components.iter().all(RatPoly::is_zero) {
            return Err(Error::ZeroArc);
        }
        Ok(ArcGerm { components })
    }

    pub fn components(&self) -> &[RatPoly; 5] {
        &self.components
    }

    pub fn eval_f64(&self, e: f64) -> Parameters {
        Parameters::from_array(std::array::from_fn(|k| self.components[k].eval_f64(e)))
    }
}

impl fmt::Display for ArcGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .map(|(k, p)| format!("l{}={}", k + 1, p))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl std::str::FromStr for ArcGerm {
    type Err = Error;

    /// `l1=<poly>;l2=<poly>;...;l5=<poly>` with polynomials in `e`.
    fn from_str(s: &str) -> Result<Self> {
        let mut comps: [Option<RatPoly>; 5] = Default::default();
        for item in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (name, poly) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected lK=<poly>, got '{item}'")))?;
            let idx = match name.trim() {
                "l1" => 0,
                "l2" => 1,
                "l3" => 2,
                "l4" => 3,
                "l5" => 4,
                other => return Err(Error::Parse(format!("unknown component '{other}'"))),
            };
            if comps[idx].is_some() {
                return Err(Error::Parse(format!("component l{} given twice", idx + 1)));
            }
            comps[idx] = Some(parse_poly(poly)?);
        }
        let mut out: Vec<RatPoly> = Vec::with_capacity(5);
        for (k, c) in comps.into_iter().enumerate() {
            out.push(c.ok_or_else(|| Error::Parse(format!("missing component l{}", k + 1)))?);
        }
        ArcGerm::new(out.try_into().unwrap())
    }
}

fn parse_poly(src: &str) -> Result<RatPoly> {
    let s: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut pos = 0;
    let mut acc = RatPoly::zero();
    while pos < s.len() {
        let mut sign = BigRational::from_integer(1.into());
        if s[pos] == '+' || s[pos] == '-' {
            if s[pos] == '-' {
                sign = -sign;
            }
            pos += 1;
        } else if pos > 0 {
            return Err(Error::Parse(format!("expected + or - at position {pos} in '{src}'")));
        }
        let (term, next) = parse_term(&s, pos, src)?;
        acc = acc.add(&RatPoly(term.0.into_iter().map(|c| c * sign.clone()).collect()));
        pos = next;
    }
    Ok(acc)
}

fn parse_int(s: &[char], mut pos: usize) -> Option<(BigInt, usize)> {
    let start = pos;
    while pos < s.len() && s[pos].is_ascii_digit() {
        pos += 1;
    }
    if pos == start {
        return None;
    }
    let text: String = s[start..pos].iter().collect();
    text.parse().ok().map(|v| (v, pos))
}

fn parse_term(s: &[char], mut pos: usize, src: &str) -> Result<(RatPoly, usize)> {
    let mut coef = BigRational::from_integer(1.into());
    let mut have_coef = false;
    if let Some((n, p)) = parse_int(s, pos) {
        pos = p;
        let mut c = BigRational::from_integer(n);
        if pos < s.len() && s[pos] == '/' {
            let (d, p2) = parse_int(s, pos + 1)
                .ok_or_else(|| Error::Parse(format!("bad denominator in '{src}'")))?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in '{src}'")));
            }
            c /= BigRational::from_integer(d);
            pos = p2;
        }
        coef = c;
        have_coef = true;
        if pos < s.len() && s[pos] == '*' {
            pos += 1;
            if pos >= s.len() || s[pos] != 'e' {
                return Err(Error::Parse(format!("expected 'e' after '*' in '{src}'")));
            }
        }
    }
    if pos < s.len() && s[pos] == 'e' {
        pos += 1;
        let mut k = 1usize;
        if pos < s.len() && s[pos] == '^' {
            let (n, p) = parse_int(s, pos + 1)
                .ok_or_else(|| Error::Parse(format!("bad exponent in '{src}'")))?;
            k = n.to_usize().ok_or_else(|| Error::Parse("exponent too large".into()))?;
            pos = p;
        }
        return Ok((RatPoly::monomial(coef, k), pos));
    }
    if !have_coef {
        return Err(Error::Parse(format!("unexpected input at position {pos} in '{src}'")));
    }
    Ok((RatPoly::monomial(coef, 0), pos))
}

/// Limit point of an arc in P² x P².
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectivePair {
    /// `None` when the first-center generators vanish identically along the arc.
    pub p1: Option<[BigRational; 3]>,
    pub p2: Option<[BigRational; 3]>,
    pub component: ArcClass,
}

impl ProjectivePair {
    pub fn p1_f64(&self) -> Option<[f64; 3]> {
        self.p1.as_ref().map(|p| p.clone().map(|c| c.to_f64().unwrap_or(f64::NAN)))
    }

    pub fn p2_f64(&self) -> Option<[f64; 3]> {
        self.p2.as_ref().map(|p| p.clone().map(|c| c.to_f64().unwrap_or(f64::NAN)))
    }
}

fn arc_generators(arc: &ArcGerm) -> ([RatPoly; 3], [RatPoly; 3]) {
    let [l1, l2, l3, l4, l5] = arc.components.clone();
    let g1 = [l1.clone(), l3.clone(), l2.mul(&l5)];
    let g2 = [l1.add(&l3).add(&l1.mul(&l2)), l5, l3.mul(&l4)];
    (g1, g2)
}

fn leading_direction(g: &[RatPoly; 3]) -> Option<[BigRational; 3]> {
    let v = g.iter().filter_map(RatPoly::valuation).min()?;
    let lead: [BigRational; 3] = std::array::from_fn(|k| g[k].coeff(v));
    let pivot = lead.iter().find(|c| !c.is_zero())?.clone();
    Some(lead.map(|c| c / pivot.clone()))
}

/// Components whose defining equations the limit point satisfies.
pub fn satisfied_components(p1: &[BigRational; 3], p2: &[BigRational; 3]) -> Vec<DivisorComponent> {
    let mut out = Vec::new();
    if p2[0].is_zero() && p2[2].is_zero() {
        out.push(DivisorComponent::E1);
    }
    if (&p1[0] + &p1[1]).is_zero() && p1[2].is_zero() {
        out.push(DivisorComponent::E2);
    }
    if p1[2].is_zero() && p2[2].is_zero() {
        out.push(DivisorComponent::E3);
    }
    out
}

/// Component predicted by comparing the orders of `l1`, `l3`, `l5` along the arc.
pub fn order_case(arc: &ArcGerm) -> Option<DivisorComponent> {
    let c = &arc.components;
    let ord = |p: &RatPoly| p.valuation().unwrap_or(usize::MAX);
    let (d1, d3, d5) = (ord(&c[0]), ord(&c[2]), ord(&c[4]));
    let m = d1.min(d3).min(d5);
    if m == usize::MAX {
        return None;
    }
    Some(if d1 == m {
        if ord(&c[0].add(&c[2])) > d1 {
            DivisorComponent::E2
        } else {
            DivisorComponent::E3
        }
    } else if d3 == m {
        DivisorComponent::E3
    } else {
        DivisorComponent::E1
    })
}

pub fn classify_arc(arc: &ArcGerm) -> Result<ProjectivePair> {
    let (g1, g2) = arc_generators(arc);
    let p1 = leading_direction(&g1);
    let p2 = leading_direction(&g2);
    let component = match (&p1, &p2) {
        (None, _) => ArcClass::InsideCenterVariety1,
        (_, None) => ArcClass::InsideCenterVariety2,
        (Some(a), Some(b)) => {
            let case = order_case(arc).ok_or(Error::ZeroArc)?;
            let sat = satisfied_components(a, b);
            if !sat.contains(&case) {
                return Err(Error::ComponentMismatch {
                    case: case.to_string(),
                    equations: format!("{sat:?}"),
                });
            }
            match case {
                DivisorComponent::E1 => ArcClass::E1,
                DivisorComponent::E2 => ArcClass::E2,
                DivisorComponent::E3 => ArcClass::E3,
            }
        }
    };
    Ok(ProjectivePair { p1, p2, component })
}

/// `1 - |cos|` between the generator vectors at `lambda(e)` and the classified limit point,
/// maximized over the factors that carry a projective point. The generators are evaluated
/// exactly at the binary value of `e` and only then rounded.
pub fn limit_distance(arc: &ArcGerm, pair: &ProjectivePair, e: f64) -> f64 {
    let Some(er) = BigRational::from_float(e) else { return f64::NAN };
    let (g1, g2) = arc_generators(arc);
    let eval = |g: &[RatPoly; 3]| -> [f64; 3] {
        std::array::from_fn(|k| {
            let v = g[k].0.iter().rev().fold(BigRational::zero(), |acc, c| acc * &er + c);
            v.to_f64().unwrap_or(f64::NAN)
        })
    };
    let dist = |v: [f64; 3], p: Option<[f64; 3]>| -> f64 {
        let Some(p) = p else { return 0.0 };
        let dot: f64 = v.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let np = p.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nv == 0.0 {
            return 1.0;
        }
        1.0 - (dot / (nv * np)).abs()
    };
    dist(eval(&g1), pair.p1_f64()).max(dist(eval(&g2), pair.p2_f64()))
}

fn normalized(mut v: [f64; 3]) -> [f64; 3] {
    if let Some(p) = v.iter().copied().find(|c| c.abs() > 1e-12) {
        for c in v.iter_mut() {
            *c /= p;
        }
    }
    v
}

/// Random projective pair on the given component of the exceptional divisor.
pub fn sample_component(component: DivisorComponent, seed: u64) -> BifurcationPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = || loop {
        let v: f64 = rng.gen_range(-1.0..1.0);
        if v.abs() > 1e-6 {
            return v;
        }
    };
    let (c1, c2) = match component {
        DivisorComponent::E1 => ([r(), r(), r()], [0.0, 1.0, 0.0]),
        DivisorComponent::E2 => ([1.0, -1.0, 0.0], [r(), r(), r()]),
        DivisorComponent::E3 => ([r(), r(), 0.0], [r(), r(), 0.0]),
    };
    BifurcationPair {
        c1: normalized(c1),
        c2: normalized(c2),
        component,
    }
}
