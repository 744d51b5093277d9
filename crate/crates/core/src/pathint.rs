//! Contour integrals and length-two iterated integrals along closed paths.
//!
//! Iterated integrals follow the convention
//! `iterated_integral2(a, b) = ∫_{t1 <= t2} b(t1) a(t2)`: the second form is
//! integrated first along the path.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Maximum number of nodes before giving up.
pub const MAX_NODES: usize = 1 << 20;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_ITERATED_TOL: f64 = 1e-8;

const GAP_TOL: f64 = 1e-12;

/// A smooth piece of a path, parameterized on `t` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Arc {
        center: C,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    Line {
        from: C,
        to: C,
    },
}

impl Segment {
    pub fn point(&self, t: f64) -> C {
        match *self {
            Segment::Arc { center, radius, start_angle, sweep } => {
                center + C::from_polar(radius, start_angle + sweep * t)
            }
            Segment::Line { from, to } => from + (to - from) * t,
        }
    }

    pub fn velocity(&self, t: f64) -> C {
        match *self {
            Segment::Arc { radius, start_angle, sweep, .. } => {
                C::new(0.0, sweep) * C::from_polar(radius, start_angle + sweep * t)
            }
            Segment::Line { from, to } => to - from,
        }
    }

    pub fn start(&self) -> C {
        self.point(0.0)
    }

    pub fn end(&self) -> C {
        self.point(1.0)
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Arc { center, radius, start_angle, sweep } => Segment::Arc {
                center,
                radius,
                start_angle: start_angle + sweep,
                sweep: -sweep,
            },
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
        }
    }

    fn is_full_circle(&self) -> bool {
        matches!(*self, Segment::Arc { sweep, .. } if (sweep.abs() - 2.0 * PI).abs() < 1e-14)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
            Segment::Line { from, to } => (to - from).norm(),
        }
    }

    /// Signed change of `arg(z - p)` along the segment.
    fn angle_change(&self, p: C) -> f64 {
        let pieces = match *self {
            Segment::Arc { sweep, .. } => (sweep.abs() / (PI / 8.0)).ceil().max(1.0) as usize,
            Segment::Line { .. } => 1,
        };
        let mut total = 0.0;
        let mut prev = self.start() - p;
        for k in 1..=pieces {
            let cur = self.point(k as f64 / pieces as f64) - p;
            total += (cur / prev).arg();
            prev = cur;
        }
        total
    }

    pub fn distance_to(&self, p: C) -> f64 {
        match *self {
            Segment::Arc { center, radius, start_angle, sweep } => {
                let d = p - center;
                let rel = d.arg() - start_angle;
                let on_arc = if sweep.abs() >= 2.0 * PI - 1e-14 {
                    true
                } else {
                    let s = if sweep >= 0.0 { rel } else { -rel };
                    s.rem_euclid(2.0 * PI) <= sweep.abs()
                };
                let ends = (self.start() - p).norm().min((self.end() - p).norm());
                if on_arc && d.norm() > 0.0 {
                    (d.norm() - radius).abs().min(ends)
                } else if d.norm() == 0.0 {
                    radius
                } else {
                    ends
                }
            }
            Segment::Line { from, to } => {
                let v = to - from;
                let len2 = v.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                let s = ((p - from) * v.conj()).re / len2;
                (from + v * s.clamp(0.0, 1.0) - p).norm()
            }
        }
    }
}

/// Oriented closed path made of arcs and segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLoop {
    segments: Vec<Segment>,
    basepoint: C,
}

impl PathLoop {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::Invariant("a loop needs at least one segment".into()))?;
        let basepoint = first.start();
        for w in segments.windows(2) {
            if (w[0].end() - w[1].start()).norm() > GAP_TOL * (1.0 + w[1].start().norm()) {
                return Err(Error::Invariant("consecutive segments do not meet".into()));
            }
        }
        let last = segments.last().unwrap().end();
        if (last - basepoint).norm() > GAP_TOL * (1.0 + basepoint.norm()) {
            return Err(Error::Invariant("path is not closed".into()));
        }
        Ok(PathLoop { segments, basepoint })
    }

    /// Counterclockwise circle starting at angle `start_angle`.
    pub fn circle(center: C, radius: f64, start_angle: f64) -> Self {
        let seg = Segment::Arc {
            center,
            radius,
            start_angle,
            sweep: 2.0 * PI,
        };
        PathLoop {
            basepoint: seg.start(),
            segments: vec![seg],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn basepoint(&self) -> C {
        self.basepoint
    }

    pub fn reversed(&self) -> Self {
        PathLoop {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
            basepoint: self.basepoint,
        }
    }

    /// Traverses `self`, then `other`.
    pub fn concat(&self, other: &PathLoop) -> Result<Self> {
        if (self.basepoint - other.basepoint).norm() > GAP_TOL * (1.0 + self.basepoint.norm()) {
            return Err(Error::BasepointMismatch);
        }
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        Ok(PathLoop {
            segments,
            basepoint: self.basepoint,
        })
    }

    pub fn distance_to(&self, p: C) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn winding_number(&self, p: C) -> Result<i64> {
        if self.distance_to(p) <= 1e-9 {
            return Err(Error::PoleOnPath(p.to_string()));
        }
        let total: f64 = self.segments.iter().map(|s| s.angle_change(p)).sum();
        Ok((total / (2.0 * PI)).round() as i64)
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

/// Value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: C,
    pub error: f64,
    pub nodes: usize,
}

const GL_N: usize = 16;

struct GaussTable {
    x: [f64; GL_N],
    w: [f64; GL_N],
    /// `s[i][j] = ∫_{-1}^{x_i} l_j`, with `l_j` the Lagrange basis on the nodes.
    s: [[f64; GL_N]; GL_N],
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gauss_table() -> &'static GaussTable {
    static TABLE: OnceLock<GaussTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut x = [0.0; GL_N];
        let mut w = [0.0; GL_N];
        for i in 0..GL_N {
            let mut r = -(PI * (i as f64 + 0.75) / (GL_N as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(GL_N, r);
                let dr = p / dp;
                r -= dr;
                if dr.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(GL_N, r);
            x[i] = r;
            w[i] = 2.0 / ((1.0 - r * r) * dp * dp);
        }
        let lagrange = |j: usize, y: f64| -> f64 {
            (0..GL_N)
                .filter(|&m| m != j)
                .map(|m| (y - x[m]) / (x[j] - x[m]))
                .product()
        };
        let mut s = [[0.0; GL_N]; GL_N];
        for i in 0..GL_N {
            let half = 0.5 * (x[i] + 1.0);
            for j in 0..GL_N {
                s[i][j] = half
                    * (0..GL_N)
                        .map(|k| w[k] * lagrange(j, -1.0 + half * (x[k] + 1.0)))
                        .sum::<f64>();
            }
        }
        GaussTable { x, w, s }
    })
}

fn trapezoid_circle<F: Fn(C) -> C>(f: &F, seg: &Segment, tol: f64) -> Result<Quadrature> {
    let mut n = 32usize;
    let sample = |t: f64| f(seg.point(t)) * seg.velocity(t);
    let mut sum: C = (0..n).map(|k| sample(k as f64 / n as f64)).sum();
    let mut prev = sum / n as f64;
    loop {
        let mid: C = (0..n).map(|k| sample((k as f64 + 0.5) / n as f64)).sum();
        sum += mid;
        n *= 2;
        let cur = sum / n as f64;
        let err = (cur - prev).norm();
        if err < tol && n >= 64 {
            return Ok(Quadrature { value: cur, error: err, nodes: n });
        }
        if n >= MAX_NODES {
            return Err(Error::NonConvergence {
                what: "trapezoid rule",
                nodes: n,
                estimate: err,
            });
        }
        prev = cur;
    }
}

fn panels<F: Fn(C) -> C>(f: &F, seg: &Segment, count: usize) -> C {
    let g = gauss_table();
    let width = 1.0 / count as f64;
    let mut total = C::new(0.0, 0.0);
    for p in 0..count {
        let t0 = p as f64 * width;
        for k in 0..GL_N {
            let t = t0 + 0.5 * width * (g.x[k] + 1.0);
            total += f(seg.point(t)) * seg.velocity(t) * g.w[k];
        }
    }
    total * 0.5 * width
}

fn gauss_segment<F: Fn(C) -> C>(f: &F, seg: &Segment, tol: f64) -> Result<Quadrature> {
    let mut count = 1usize;
    let mut prev = panels(f, seg, count);
    loop {
        count *= 2;
        let cur = panels(f, seg, count);
        let err = (cur - prev).norm();
        if err < tol {
            return Ok(Quadrature { value: cur, error: err, nodes: count * GL_N });
        }
        if count * GL_N >= MAX_NODES {
            return Err(Error::NonConvergence {
                what: "Gauss-Legendre panels",
                nodes: count * GL_N,
                estimate: err,
            });
        }
        prev = cur;
    }
}

/// `∫ f(z) dz` along the loop.
pub fn contour_integral<F: Fn(C) -> C>(f: F, path: &PathLoop, tolerance: f64) -> Result<Quadrature> {
    let per = tolerance / path.segments.len() as f64;
    let mut out = Quadrature {
        value: C::new(0.0, 0.0),
        error: 0.0,
        nodes: 0,
    };
    for seg in &path.segments {
        let q = if seg.is_full_circle() {
            trapezoid_circle(&f, seg, per)?
        } else {
            gauss_segment(&f, seg, per)?
        };
        out.value += q.value;
        out.error += q.error;
        out.nodes += q.nodes;
    }
    Ok(out)
}

/// Value of an iterated integral with its refinement error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedQuadrature {
    pub value: C,
    pub error: f64,
    pub nodes: usize,
}

/// `sum_k ∫ a_k b_k` on a fixed panel layout.
fn iterated_panels(pairs: &[(&dyn Fn(C) -> C, &dyn Fn(C) -> C)], path: &PathLoop, per_segment: usize) -> C {
    let g = gauss_table();
    let mut inner = vec![C::new(0.0, 0.0); pairs.len()];
    let mut total = C::new(0.0, 0.0);
    let mut bvals = vec![[C::new(0.0, 0.0); GL_N]; pairs.len()];
    let mut avals = vec![[C::new(0.0, 0.0); GL_N]; pairs.len()];
    for seg in &path.segments {
        let width = 1.0 / per_segment as f64;
        for p in 0..per_segment {
            let t0 = p as f64 * width;
            let half = 0.5 * width;
            for k in 0..GL_N {
                let t = t0 + half * (g.x[k] + 1.0);
                let z = seg.point(t);
                let v = seg.velocity(t);
                for (m, (a, b)) in pairs.iter().enumerate() {
                    avals[m][k] = a(z) * v;
                    bvals[m][k] = b(z) * v;
                }
            }
            for m in 0..pairs.len() {
                let mut panel_b = C::new(0.0, 0.0);
                for k in 0..GL_N {
                    let partial: C = (0..GL_N).map(|j| bvals[m][j] * g.s[k][j]).sum::<C>() * half;
                    total += avals[m][k] * (inner[m] + partial) * g.w[k] * half;
                    panel_b += bvals[m][k] * g.w[k];
                }
                inner[m] += panel_b * half;
            }
        }
    }
    total
}

/// `sum_k ∫ a_k b_k`, refining the panels until successive values agree to `tolerance`.
pub fn iterated_sum(
    pairs: &[(&dyn Fn(C) -> C, &dyn Fn(C) -> C)],
    path: &PathLoop,
    tolerance: f64,
) -> Result<IteratedQuadrature> {
    let segs = path.segments.len();
    let mut per = 4usize;
    let mut prev = iterated_panels(pairs, path, per);
    loop {
        per *= 2;
        let cur = iterated_panels(pairs, path, per);
        let err = (cur - prev).norm();
        let nodes = per * segs * GL_N;
        if err < tolerance {
            return Ok(IteratedQuadrature { value: cur, error: err, nodes });
        }
        if nodes >= MAX_NODES {
            return Err(Error::NonConvergence {
                what: "iterated integral",
                nodes,
                estimate: err,
            });
        }
        prev = cur;
    }
}

/// `∫_{t1 <= t2} form_b(t1) form_a(t2)` along the loop from its basepoint.
pub fn iterated_integral2<A, B>(form_a: A, form_b: B, path: &PathLoop, tolerance: f64) -> Result<IteratedQuadrature>
where
    A: Fn(C) -> C,
    B: Fn(C) -> C,
{
    iterated_sum(&[(&form_a, &form_b)], path, tolerance)
}

/// Anchor for automatic connectors: the common basepoint and the points to avoid.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub basepoint: C,
    pub avoid: Vec<C>,
}

/// Concatenates loops raised to `±1`. Loops not based at the anchor are
/// conjugated by a straight connector from the anchor to their basepoint.
pub fn compose_loops(words: &[(&PathLoop, i32)], anchor: Option<&Anchor>) -> Result<PathLoop> {
    if words.is_empty() {
        return Err(Error::Invariant("empty word".into()));
    }
    let base = anchor.map(|a| a.basepoint).unwrap_or(words[0].0.basepoint);
    let mut segments = Vec::new();
    for &(l, e) in words {
        if e != 1 && e != -1 {
            return Err(Error::Invariant(format!("exponent {e} is not ±1")));
        }
        let body = if e == 1 { l.clone() } else { l.reversed() };
        let needs_connector =
            (body.basepoint - base).norm() > GAP_TOL * (1.0 + base.norm());
        if needs_connector {
            let anchor = anchor.ok_or(Error::BasepointMismatch)?;
            let conn = Segment::Line { from: base, to: body.basepoint };
            for p in &anchor.avoid {
                let d = conn.distance_to(*p);
                if d < 1e-3 {
                    return Err(Error::ConnectorTooClose { distance: d });
                }
            }
            segments.push(conn);
            segments.extend_from_slice(&body.segments);
            segments.push(conn.reversed());
        } else {
            segments.extend_from_slice(&body.segments);
        }
    }
    PathLoop::new(segments)
}
