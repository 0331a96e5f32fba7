//! Horizontal curves stored as dense samples with velocities, their lengths
//! and line integrals, and the generators used to probe a revolution ring:
//! quasiradials, seeded random boundary-connecting curves and lifted circles.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::heis::{contact_eval, HPoint, TangentVector};
use crate::modulus::RevolutionRing;
use crate::ode::{integrate_to_nodes, OdeOptions};
use crate::revcoords::{ambient_velocity, horizontal_phi_rate, phi_map, RevPoint};
use crate::rng::CounterRng;

pub const DEFAULT_RESOLUTION: usize = 1024;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Residual above which a curve is not accepted by length and line integrals.
pub const INTEGRATION_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct HorizontalCurve {
    label: String,
    tau: (f64, f64),
    points: Vec<HPoint>,
    velocities: Vec<[f64; 3]>,
    tilde: Option<Vec<(RevPoint, [f64; 3])>>,
    residual: f64,
    tolerance: f64,
}

/// `|ω(γ̇)| / max(1, ‖γ̇_h‖)` at one sample.
pub fn sample_residual(p: HPoint, v: [f64; 3]) -> f64 {
    let w = contact_eval(&TangentVector::new(p, v[0], v[1], v[2]));
    w.abs() / v[0].hypot(v[1]).max(1.0)
}

impl HorizontalCurve {
    /// Builds a curve from samples on the uniform grid over `tau`. The number
    /// of samples must be odd (an even number of intervals).
    pub fn new(
        label: impl Into<String>,
        tau: (f64, f64),
        points: Vec<HPoint>,
        velocities: Vec<[f64; 3]>,
        tilde: Option<Vec<(RevPoint, [f64; 3])>>,
        tolerance: f64,
    ) -> Result<Self> {
        let n = points.len();
        if n < 3 || n % 2 == 0 || velocities.len() != n || tilde.as_ref().is_some_and(|t| t.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "a curve needs an odd number (≥ 3) of matching samples, got {n}"
            )));
        }
        if !(tau.0 <= tau.1) {
            return Err(Error::InvalidArgument(format!("parameter interval ({}, {}) is reversed", tau.0, tau.1)));
        }
        let mut residual = 0.0f64;
        for (p, v) in points.iter().zip(&velocities) {
            let r = sample_residual(*p, *v);
            if !r.is_finite() || !p.is_finite() {
                return Err(Error::NonFinite {
                    what: "curve sample",
                    at: p.t,
                });
            }
            residual = residual.max(r);
        }
        if residual > tolerance {
            return Err(Error::NotHorizontal { residual, tolerance });
        }
        Ok(Self {
            label: label.into(),
            tau,
            points,
            velocities,
            tilde,
            residual,
            tolerance,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tau_range(&self) -> (f64, f64) {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn step(&self) -> f64 {
        (self.tau.1 - self.tau.0) / self.intervals() as f64
    }

    pub fn tau_at(&self, i: usize) -> f64 {
        if i == self.intervals() {
            self.tau.1
        } else {
            self.tau.0 + self.step() * i as f64
        }
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn velocities(&self) -> &[[f64; 3]] {
        &self.velocities
    }

    pub fn tilde(&self) -> Option<&[(RevPoint, [f64; 3])]> {
        self.tilde.as_deref()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn start(&self) -> HPoint {
        self.points[0]
    }

    pub fn end(&self) -> HPoint {
        self.points[self.points.len() - 1]
    }

    pub fn horizontal_speeds(&self) -> Vec<f64> {
        self.velocities.iter().map(|v| v[0].hypot(v[1])).collect()
    }

    /// Samples `i0..=i1`; the slice must span an even number of intervals.
    pub fn slice(&self, i0: usize, i1: usize) -> Result<Self> {
        if i1 <= i0 || i1 >= self.len() || (i1 - i0) % 2 != 0 {
            return Err(Error::InvalidArgument(format!("bad slice {i0}..={i1}")));
        }
        Self::new(
            self.label.clone(),
            (self.tau_at(i0), self.tau_at(i1)),
            self.points[i0..=i1].to_vec(),
            self.velocities[i0..=i1].to_vec(),
            self.tilde.as_ref().map(|t| t[i0..=i1].to_vec()),
            self.tolerance,
        )
    }

    /// Largest distance between `Φ(tilde)` and the ambient samples.
    pub fn tilde_mismatch(&self, ring: &RevolutionRing) -> Result<f64> {
        let Some(tilde) = &self.tilde else {
            return Ok(0.0);
        };
        let mut worst = 0.0f64;
        for ((q, _), p) in tilde.iter().zip(&self.points) {
            let m = phi_map(ring.profile(), *q)?;
            worst = worst.max((m.z - p.z).norm()).max((m.t - p.t).abs());
        }
        Ok(worst)
    }

    /// Writes `tau,x,y,t,xi,beta,phi,residual`; tilde columns are empty when absent.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        writeln!(w, "tau,x,y,t,xi,beta,phi,residual").map_err(io)?;
        for i in 0..self.len() {
            let p = self.points[i];
            let r = sample_residual(p, self.velocities[i]);
            let tilde = match &self.tilde {
                Some(t) => format!("{:.17e},{:.17e},{:.17e}", t[i].0.xi, t[i].0.beta, t[i].0.phi),
                None => ",,".into(),
            };
            writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e},{tilde},{r:.3e}", self.tau_at(i), p.x(), p.y(), p.t).map_err(io)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineIntegral {
    pub value: f64,
    /// Richardson estimate from the half-resolution rule.
    pub error: f64,
}

fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + values[n] + 4.0 * odd + 2.0 * even)
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    h * (0.5 * (values[0] + values[n]) + values[1..n].iter().sum::<f64>())
}

/// `∫_γ ρ ds^h = ∫ ρ(γ(τ)) ‖γ̇_h(τ)‖ dτ` by composite Simpson over the samples.
pub fn line_integral<R>(rho: R, gamma: &HorizontalCurve) -> Result<LineIntegral>
where
    R: Fn(HPoint) -> Result<f64>,
{
    if gamma.residual > INTEGRATION_RESIDUAL {
        return Err(Error::NotHorizontal {
            residual: gamma.residual,
            tolerance: INTEGRATION_RESIDUAL,
        });
    }
    let mut values = Vec::with_capacity(gamma.len());
    for (p, v) in gamma.points.iter().zip(&gamma.velocities) {
        let r = rho(*p)?;
        if !r.is_finite() {
            return Err(Error::NonFinite { what: "density", at: p.t });
        }
        values.push(r * v[0].hypot(v[1]));
    }
    let h = gamma.step();
    let value = simpson(&values, h);
    let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
    let error = if coarse.len() >= 3 && coarse.len() % 2 == 1 {
        (value - simpson(&coarse, 2.0 * h)).abs() / 15.0
    } else {
        (value - trapezoid(&values, h)).abs()
    };
    Ok(LineIntegral { value, error })
}

pub fn horizontal_length(gamma: &HorizontalCurve) -> Result<f64> {
    Ok(line_integral(|_| Ok(1.0), gamma)?.value)
}

pub(crate) fn uniform_nodes(t0: f64, t1: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|i| if i == intervals { t1 } else { t0 + (t1 - t0) * i as f64 / intervals as f64 })
        .collect()
}

pub(crate) fn check_resolution(intervals: usize) -> Result<()> {
    if intervals < 2 || intervals % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be an even number of intervals ≥ 2, got {intervals}"
        )));
    }
    Ok(())
}

/// Assembles a curve from a tilde path in the coordinates of `ring`.
fn from_tilde(
    ring: &RevolutionRing,
    label: String,
    tau: (f64, f64),
    tilde: Vec<(RevPoint, [f64; 3])>,
    tolerance: f64,
) -> Result<HorizontalCurve> {
    let c = ring.profile();
    let mut points = Vec::with_capacity(tilde.len());
    let mut velocities = Vec::with_capacity(tilde.len());
    for (q, dq) in &tilde {
        points.push(phi_map(c, *q)?);
        velocities.push(ambient_velocity(c, *q, *dq)?);
    }
    HorizontalCurve::new(label, tau, points, velocities, Some(tilde), tolerance)
}

/// `ξ ↦ Φ(ξ, β, φ + tan β · ξ)` for `ξ ∈ [log a, log b]`.
pub fn quasiradial(ring: &RevolutionRing, beta: f64, phi: f64, intervals: usize) -> Result<HorizontalCurve> {
    check_resolution(intervals)?;
    if !(FRAC_PI_2 < beta && beta < 1.5 * PI) {
        return Err(Error::OutOfDomain {
            what: "β",
            value: beta,
            domain: "(π/2, 3π/2)".into(),
        });
    }
    let (x0, x1) = (ring.a().ln(), ring.b().ln());
    let tb = beta.tan();
    let tilde = uniform_nodes(x0, x1, intervals)
        .into_iter()
        .map(|xi| (RevPoint::new(xi, beta, phi + tb * xi), [1.0, 0.0, tb]))
        .collect();
    from_tilde(ring, format!("quasiradial β={beta} φ={phi}"), (x0, x1), tilde, 1e-12)
}

/// Quintic smoothstep on `[0, 1]`, clamped outside, with its first derivative.
fn smootherstep(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        let x2 = x * x;
        (x2 * x * (x * (6.0 * x - 15.0) + 10.0), 30.0 * x2 * (x - 1.0) * (x - 1.0))
    }
}

/// Distance kept from the band edges by random curves.
pub const RANDOM_BAND_MARGIN: f64 = 1e-3;
const RAMPS: usize = 4;
const MODES: usize = 4;
const LINEAR_SHARE: f64 = 0.2;
const RANDOM_ODE: OdeOptions = OdeOptions {
    rel_tol: 1e-12,
    abs_tol: 1e-14,
    max_steps: 1_000_000,
};

/// The smooth random functions `ξ(τ)` and `β(τ)`, `τ ∈ [0, 1]`.
#[derive(Debug, Clone)]
struct RandomPath {
    log_a: f64,
    log_ratio: f64,
    ramps: [(f64, f64, f64); RAMPS],
    ramp_norm: f64,
    c0: f64,
    modes: [(f64, f64); MODES],
    phi0: f64,
}

impl RandomPath {
    fn new(ring: &RevolutionRing, seed: u64) -> Self {
        let mut it = CounterRng::new(seed, 0x6375_7276).iter();
        let mut ramps = [(0.0, 0.0, 0.0); RAMPS];
        for r in &mut ramps {
            *r = (it.range(-0.2, 1.2), it.range(0.15, 0.8), it.range(0.2, 1.0));
        }
        let ramp_norm: f64 = ramps
            .iter()
            .map(|&(c, w, k)| k * (smootherstep((1.0 - c) / w + 0.5).0 - smootherstep(-c / w + 0.5).0))
            .sum();
        let c0 = it.range(-1.0, 1.0);
        // overall size of the oscillation, so nearly quasiradial paths occur too
        let wiggle = it.uniform();
        let mut modes = [(0.0, 0.0); MODES];
        for m in &mut modes {
            *m = (wiggle * it.range(-1.5, 1.5), wiggle * it.range(-1.5, 1.5));
        }
        Self {
            log_a: ring.a().ln(),
            log_ratio: ring.log_ratio(),
            ramps,
            ramp_norm,
            c0,
            modes,
            phi0: it.range(0.0, TAU),
        }
    }

    fn xi(&self, tau: f64) -> (f64, f64) {
        let (mut s, mut ds) = (0.0, 0.0);
        if self.ramp_norm > 0.0 {
            for &(c, w, k) in &self.ramps {
                let (v, dv) = smootherstep((tau - c) / w + 0.5);
                let v0 = smootherstep(-c / w + 0.5).0;
                s += k * (v - v0);
                ds += k * dv / w;
            }
            s /= self.ramp_norm;
            ds /= self.ramp_norm;
        } else {
            (s, ds) = (tau, 1.0);
        }
        let e = LINEAR_SHARE;
        let xi = if tau >= 1.0 {
            self.log_a + self.log_ratio
        } else {
            self.log_a + self.log_ratio * (e * tau + (1.0 - e) * s)
        };
        (xi, self.log_ratio * (e + (1.0 - e) * ds))
    }

    fn beta(&self, tau: f64) -> (f64, f64) {
        let mut f = Dual2::constant(self.c0);
        let x = Dual2::var(TAU * tau);
        for (m, &(a, b)) in self.modes.iter().enumerate() {
            let k = (m + 1) as f64;
            f = f + ((x * k).cos() * a + (x * k).sin() * b) / k;
        }
        let amp = FRAC_PI_2 - RANDOM_BAND_MARGIN;
        let th = f.v.tanh();
        (PI + amp * th, amp * (1.0 - th * th) * f.d1 * TAU)
    }
}

/// A smooth horizontal curve from the inner to the outer boundary of `ring`,
/// determined by `seed`. `ξ` is strictly increasing, `β` stays at least
/// `RANDOM_BAND_MARGIN` inside the band and `φ` solves the horizontality ODE.
pub fn random_horizontal_curve(ring: &RevolutionRing, seed: u64, intervals: usize) -> Result<HorizontalCurve> {
    check_resolution(intervals)?;
    let path = RandomPath::new(ring, seed);
    let c = ring.profile();
    let rate = |tau: f64| -> Result<f64> {
        let (_, dxi) = path.xi(tau);
        let (beta, dbeta) = path.beta(tau);
        horizontal_phi_rate(c, beta, dxi, dbeta)
    };
    let nodes = uniform_nodes(0.0, 1.0, intervals);
    let phis = integrate_to_nodes(|tau, _: &[f64; 1]| Ok([rate(tau)?]), &nodes, [path.phi0], &RANDOM_ODE)?;
    let mut tilde = Vec::with_capacity(nodes.len());
    for (&tau, phi) in nodes.iter().zip(&phis) {
        let (xi, dxi) = path.xi(tau);
        let (beta, dbeta) = path.beta(tau);
        tilde.push((RevPoint::new(xi, beta, phi[0]), [dxi, dbeta, rate(tau)?]));
    }
    from_tilde(ring, format!("random seed={seed}"), (0.0, 1.0), tilde, DEFAULT_TOLERANCE)
}

/// The lifted circle `s ↦ (e^{iφ} c_k(s), t_k(s))`, `s ∈ [0, R]`, with
/// `c_k(s) = (1 − e^{iks})/k`, `t_k(s) = (2/k)(sin(ks)/k − s)`; a straight
/// segment when `k = 0`.
pub fn cc_lift(k: f64, r: f64, phi: f64, intervals: usize) -> Result<HorizontalCurve> {
    check_resolution(intervals)?;
    if !k.is_finite() || !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite k and R > 0, got k = {k}, R = {r}")));
    }
    let rot = Complex64::cis(phi);
    let mut points = Vec::with_capacity(intervals + 1);
    let mut velocities = Vec::with_capacity(intervals + 1);
    for s in uniform_nodes(0.0, r, intervals) {
        let x = Dual2::constant(k * s);
        let half = Dual2::constant(0.5 * k * s).sinc().v;
        // c_k(s) = s[(x/2) sinc²(x/2) − i sinc x], t_k(s) = 2s² (sin x − x)/x²
        let c = Complex64::new(s * 0.5 * k * s * half * half, -s * x.sinc().v);
        let t = 2.0 * s * s * x.sin_defect().v;
        let dz = rot * Complex64::new(0.0, -1.0) * Complex64::cis(k * s);
        let dt = -k * s * s * half * half;
        points.push(HPoint::new(rot * c, t));
        velocities.push([dz.re, dz.im, dt]);
    }
    HorizontalCurve::new(format!("cc lift k={k}"), (0.0, r), points, velocities, None, 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FamilyKind {
    QuasiradialGrid { n_beta: usize, n_phi: usize },
    RandomSeeds { first_seed: u64, count: usize },
}

/// A family of curves crossing a ring from its inner to its outer boundary.
#[derive(Debug, Clone)]
pub struct CurveFamily {
    pub kind: FamilyKind,
    pub curves: Vec<HorizontalCurve>,
}

/// Tolerance on the gauge ratio at the curve ends.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

impl CurveFamily {
    pub fn generate(ring: &RevolutionRing, kind: FamilyKind, intervals: usize) -> Result<Self> {
        let curves: Vec<Result<HorizontalCurve>> = match kind {
            FamilyKind::QuasiradialGrid { n_beta, n_phi } => (0..n_beta * n_phi)
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k / n_phi, k % n_phi);
                    let beta = FRAC_PI_2 + PI * (i as f64 + 0.5) / n_beta as f64;
                    let phi = TAU * (j as f64 + 0.5) / n_phi as f64;
                    quasiradial(ring, beta, phi, intervals)
                })
                .collect(),
            FamilyKind::RandomSeeds { first_seed, count } => (0..count as u64)
                .into_par_iter()
                .map(|i| random_horizontal_curve(ring, first_seed.wrapping_add(i), intervals))
                .collect(),
        };
        let curves = curves.into_iter().collect::<Result<Vec<_>>>()?;
        for g in &curves {
            let (r0, r1) = (ring.ratio(g.start())?, ring.ratio(g.end())?);
            if (r0 - ring.a()).abs() > BOUNDARY_TOLERANCE * ring.a() || (r1 - ring.b()).abs() > BOUNDARY_TOLERANCE * ring.b() {
                return Err(Error::InvalidArgument(format!(
                    "{} does not connect the boundary components (ratios {r0}, {r1})",
                    g.label()
                )));
            }
        }
        Ok(Self { kind, curves })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{catalog, CatalogName};

    fn ring(name: CatalogName, a: f64, b: f64) -> RevolutionRing {
        RevolutionRing::new(&catalog(name, 1.0).unwrap(), a, b).unwrap()
    }

    #[test]
    fn quasiradial_examples() {
        let r = ring(CatalogName::KoranyiSphere, 1.0, 1f64.exp());
        let g = quasiradial(&r, PI, 0.3, 64).unwrap();
        assert!(g.residual() <= 1e-12);
        for q in g.tilde().unwrap() {
            assert!((q.0.phi - 0.3).abs() < 1e-15);
        }
        assert!((horizontal_length(&g).unwrap() - (1f64.exp() - 1.0)).abs() < 1e-9);
        assert!((r.ratio(g.start()).unwrap() - 1.0).abs() < 1e-12);
        assert!((r.ratio(g.end()).unwrap() - 1f64.exp()).abs() < 1e-12);
        assert!(quasiradial(&r, FRAC_PI_2, 0.0, 64).is_err());
    }

    #[test]
    fn quasiradial_speed_closed_form() {
        let r = ring(CatalogName::BubbleSet, 0.5, 3.0);
        let beta = 2.3;
        let g = quasiradial(&r, beta, 1.0, 32).unwrap();
        let p = r.profile().p_star(beta).unwrap();
        for (q, v) in g.tilde().unwrap().iter().zip(g.horizontal_speeds()) {
            let want = q.0.xi.exp() * p.norm() / (-p.re).sqrt();
            assert!((v - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn cc_lift_examples() {
        for k in [-2.0, -0.5, 0.0, 1e-9, 1.0, 3.0] {
            let g = cc_lift(k, 1.0, 0.4, 256).unwrap();
            assert!(g.residual() <= 1e-10);
            assert!((horizontal_length(&g).unwrap() - 1.0).abs() < 1e-12);
            for (p, v) in g.points().iter().zip(g.velocities()) {
                let w = Complex64::new(v[0], v[1]);
                assert!((v[2] + 2.0 * (p.z.conj() * w).im).abs() <= 1e-10);
            }
        }
        let seg = cc_lift(0.0, 2.0, 0.0, 8).unwrap();
        assert!(seg.points().iter().all(|p| p.t == 0.0));
        // full circle: length 2π/|k|, closes up in z
        let k = 2.0;
        let full = cc_lift(k, TAU / k, 0.0, 512).unwrap();
        assert!((horizontal_length(&full).unwrap() - TAU / k).abs() < 1e-12);
        assert!(full.end().z.norm() < 1e-14);
    }

    #[test]
    fn cc_lift_endpoint_on_catalog_sphere() {
        let c = catalog(CatalogName::CcSphere, 1.0).unwrap();
        for k in [-5.0, -1.0, 0.5, 4.0] {
            let g = cc_lift(k, 1.0, 0.0, 16).unwrap();
            let j = c.jet(k).unwrap();
            assert!((g.end().z.norm() - j.f).abs() < 1e-14);
            assert!((g.end().t - j.g).abs() < 1e-14);
        }
    }

    #[test]
    fn random_curve_is_deterministic_and_connects() {
        let r = ring(CatalogName::BubbleSet, 1.0, 2.0);
        let g1 = random_horizontal_curve(&r, 0, 128).unwrap();
        let g2 = random_horizontal_curve(&r, 0, 128).unwrap();
        assert_eq!(g1.points(), g2.points());
        assert!(g1.residual() <= 1e-8);
        assert!((r.ratio(g1.start()).unwrap() - 1.0).abs() < 1e-9);
        assert!((r.ratio(g1.end()).unwrap() - 2.0).abs() < 1e-9 * 2.0);
        assert!(g1.tilde_mismatch(&r).unwrap() < 1e-10);
        let t = g1.tilde().unwrap();
        assert!(t.windows(2).all(|w| w[1].0.xi > w[0].0.xi));
        assert!(t.iter().all(|q| q.0.beta >= FRAC_PI_2 + RANDOM_BAND_MARGIN && q.0.beta <= 1.5 * PI - RANDOM_BAND_MARGIN));
    }

    #[test]
    fn random_phi_matches_quadrature() {
        let r = ring(CatalogName::BubbleSet, 1.0, 2.0);
        let g = random_horizontal_curve(&r, 11, 64).unwrap();
        let path = RandomPath::new(&r, 11);
        let t = g.tilde().unwrap();
        for i in [16, 40, 64] {
            let tau = g.tau_at(i);
            let dphi = crate::quad::integrate_fallible(
                |u| {
                    let (_, dxi) = path.xi(u);
                    let (beta, dbeta) = path.beta(u);
                    horizontal_phi_rate(r.profile(), beta, dxi, dbeta)
                },
                0.0,
                tau,
                &crate::quad::QuadOptions::rel(1e-13),
            )
            .unwrap();
            assert!((t[i].0.phi - path.phi0 - dphi.value).abs() < 1e-8, "{} {} {}", t[i].0.phi, path.phi0, dphi.value);
        }
    }

    #[test]
    fn line_integral_additive_and_reparametrisation_invariant() {
        let r = ring(CatalogName::CcSphere, 1.0, 2.0);
        let g = random_horizontal_curve(&r, 5, 512).unwrap();
        let rho = |p: HPoint| r.rho0(p);
        let li = line_integral(rho, &g).unwrap();
        let whole = li.value;
        let a = line_integral(rho, &g.slice(0, 256).unwrap()).unwrap().value;
        let b = line_integral(rho, &g.slice(256, 512).unwrap()).unwrap().value;
        assert!((whole - (a + b)).abs() <= 1e-8 * whole);
        // the same geometric curve sampled twice as densely, within the
        // discretisation error estimate
        let fine = random_horizontal_curve(&r, 5, 1024).unwrap();
        let wf = line_integral(rho, &fine).unwrap().value;
        assert!((whole - wf).abs() <= 2.0 * li.error + 1e-12, "{whole} {wf} {}", li.error);
        assert_eq!(line_integral(|_| Ok(0.0), &g).unwrap().value, 0.0);
        let len = horizontal_length(&g).unwrap();
        assert_eq!(line_integral(|_| Ok(1.0), &g).unwrap().value, len);
    }

    #[test]
    fn rejects_non_horizontal_samples() {
        let p = HPoint::from_xyt(1.0, 0.0, 0.0);
        let r = HorizontalCurve::new("bad", (0.0, 1.0), vec![p; 3], vec![[0.0, 0.0, 1.0]; 3], None, 1e-8);
        assert!(matches!(r, Err(Error::NotHorizontal { .. })));
        let c = HorizontalCurve::new("still", (0.0, 1.0), vec![p; 3], vec![[0.0; 3]; 3], None, 1e-8).unwrap();
        assert_eq!(horizontal_length(&c).unwrap(), 0.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = cc_lift(1.0, 1.0, 0.0, 4).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "tau,x,y,t,xi,beta,phi,residual");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1].split(',').count(), 8);
    }
}
