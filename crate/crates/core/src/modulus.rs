//! Revolution rings `a < |(z,t)|_H / |p*(arg α)|^{1/2} < b`, the density
//! `ρ₀ = (log(b/a))⁻¹ |z| / (|z|⁴ + t²)^{1/2}` on the ring, and the
//! computations around the modulus `π² (log(b/a))⁻³` of the family of
//! horizontal curves joining the two boundary components.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{line_integral, CurveFamily};
use crate::error::{Error, Result};
use crate::heis::{arg_left, gauge, koranyi_map, wrap_pi, HPoint, HorVector};
use crate::profile::{reparam_by_argument, validate, ProfileCurve, ValidationReport};
use crate::quad::{integrate_fallible, QuadOptions, QuadResult};
use crate::revcoords::{ambient_velocity, integrate_over_box, phi_map, profile_jet, RevBox, RevPoint};
use crate::rng::CounterRng;
use crate::surface::SurfacePatch;

/// Grid used to validate a profile before a ring is built on it.
pub const RING_VALIDATION_GRID: usize = 4096;
/// Round-trip tolerance of the argument reparametrisation.
pub const ARGUMENT_TOL: f64 = 1e-13;
/// Relative tolerance on the gauge ratio for boundary classification.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
pub const DEFAULT_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

#[derive(Debug, Clone)]
pub struct RevolutionRing {
    profile: ProfileCurve,
    a: f64,
    b: f64,
    validation: ValidationReport,
}

impl RevolutionRing {
    /// Validates `profile`, reparametrises it by the Korányi argument and
    /// builds the ring between the dilates by `a` and `b`.
    pub fn new(profile: &ProfileCurve, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 < a < b, got a = {a}, b = {b}")));
        }
        let validation = validate(profile, RING_VALIDATION_GRID)?;
        if !validation.ring_ready() {
            let mut failed = Vec::new();
            for (name, chk) in [
                ("regularity", &validation.regular),
                ("(A1)", &validation.a1),
                ("monotone argument", &validation.beta_monotone),
            ] {
                if !chk.pass {
                    failed.push(format!("{name}: {}", chk.detail));
                }
            }
            if !(validation.g_limits[0] > 0.0 && validation.g_limits[1] < 0.0) {
                failed.push(format!("pole heights {:?}", validation.g_limits));
            }
            return Err(Error::Validation {
                profile: profile.name().to_string(),
                condition: failed.join("; "),
            });
        }
        let profile = reparam_by_argument(profile, ARGUMENT_TOL)?;
        Ok(Self {
            profile,
            a,
            b,
            validation,
        })
    }

    /// The argument-parametrised profile.
    pub fn profile(&self) -> &ProfileCurve {
        &self.profile
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }

    pub fn log_ratio(&self) -> f64 {
        (self.b / self.a).ln()
    }

    pub fn coordinate_box(&self) -> RevBox {
        RevBox::ring(self.a, self.b).expect("ring bounds were checked on construction")
    }

    /// `|(z,t)|_H / |p*(arg α(z,t))|^{1/2}`; on the axis the pole values are used.
    pub fn ratio(&self, p: HPoint) -> Result<f64> {
        let alpha = koranyi_map(p);
        if alpha.norm_sqr() == 0.0 {
            return Err(Error::OutOfDomain {
                what: "gauge",
                value: 0.0,
                domain: "H \\ {(0,0)}".into(),
            });
        }
        let r = self.profile.p_star_closed(arg_left(alpha))?.norm();
        Ok(gauge(p) / r.sqrt())
    }

    pub fn membership(&self, p: HPoint) -> Result<Membership> {
        let r = self.ratio(p)?;
        let near = |edge: f64| (r - edge).abs() <= MEMBERSHIP_TOL * edge;
        Ok(if near(self.a) || near(self.b) {
            Membership::Boundary
        } else if self.a < r && r < self.b {
            Membership::Inside
        } else {
            Membership::Outside
        })
    }

    /// `ρ₀` on the closed ring, zero outside.
    pub fn rho0(&self, p: HPoint) -> Result<f64> {
        if self.membership(p)? == Membership::Outside {
            return Ok(0.0);
        }
        let zn = p.z.norm();
        Ok(zn / koranyi_map(p).norm() / self.log_ratio())
    }

    /// `ρ₀ ∘ Φ` in closed form: `(log(b/a))⁻¹ e^{−ξ} |p*(β)|⁻¹ (−Re p*(β))^{1/2}`.
    pub fn rho0_pullback(&self, q: RevPoint) -> Result<f64> {
        let (lo, hi) = (self.a.ln(), self.b.ln());
        if q.xi < lo || q.xi > hi {
            return Ok(0.0);
        }
        let p = self.profile.p_star_closed(q.beta)?;
        Ok((-q.xi).exp() / p.norm() * (-p.re).max(0.0).sqrt() / self.log_ratio())
    }
}

/// A nonnegative density on the Heisenberg group.
#[derive(Clone)]
pub struct Density {
    name: String,
    eval: Arc<dyn Fn(HPoint) -> Result<f64> + Send + Sync>,
}

impl std::fmt::Debug for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Density").field("name", &self.name).finish()
    }
}

impl Density {
    pub fn new(name: impl Into<String>, eval: impl Fn(HPoint) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| Ok(0.0))
    }

    pub fn rho0(ring: &RevolutionRing) -> Self {
        let ring = ring.clone();
        Self::new("rho0", move |p| ring.rho0(p))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, p: HPoint) -> Result<f64> {
        let v = (self.eval)(p)?;
        if v < 0.0 {
            return Err(Error::InvalidArgument(format!("density `{}` is negative ({v})", self.name)));
        }
        Ok(v)
    }
}

/// `π² (log(b/a))⁻³`.
pub fn analytic_modulus(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    Ok(PI * PI / (b / a).ln().powi(3))
}

/// `∭ ρ₀⁴ dm³` in revolution coordinates: `ρ₀` is evaluated at `Φ(q)` and
/// weighted by `J_Φ`.
pub fn numeric_modulus(ring: &RevolutionRing, tol: f64) -> Result<QuadResult> {
    let c = ring.profile();
    integrate_over_box(
        c,
        |q| Ok(ring.rho0(phi_map(c, q)?)?.powi(4)),
        &ring.coordinate_box(),
        tol,
        true,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
    pub hits: usize,
}

const MC_CHUNK: usize = 8192;

/// `∭ ρ₀⁴ dm³` by uniform sampling of a box around the ring in `(x, y, t)`.
pub fn monte_carlo_modulus(ring: &RevolutionRing, samples: usize, seed: u64) -> Result<MonteCarlo> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let c = ring.profile();
    let (mut zmax, mut tmax) = (0.0f64, 0.0f64);
    for i in 0..=2048 {
        let beta = FRAC_PI_2 + PI * i as f64 / 2048.0;
        let p = c.p_star_closed(beta)?;
        zmax = zmax.max((-p.re).max(0.0).sqrt());
        tmax = tmax.max(p.im.abs());
    }
    let (zb, tb) = (1.02 * ring.b() * zmax, 1.02 * ring.b() * ring.b() * tmax);
    let volume = (2.0 * zb) * (2.0 * zb) * (2.0 * tb);
    let rng = CounterRng::new(seed, 0x6d63);
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Result<(f64, f64, usize)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let (mut s1, mut s2, mut hits) = (0.0, 0.0, 0usize);
            for i in k * MC_CHUNK..((k + 1) * MC_CHUNK).min(samples) {
                let j = 3 * i as u64;
                let p = HPoint::from_xyt(rng.range_at(j, -zb, zb), rng.range_at(j + 1, -zb, zb), rng.range_at(j + 2, -tb, tb));
                let v = ring.rho0(p)?.powi(4);
                if v > 0.0 {
                    hits += 1;
                }
                s1 += v;
                s2 += v * v;
            }
            Ok((s1, s2, hits))
        })
        .collect();
    let (mut s1, mut s2, mut hits) = (0.0, 0.0, 0usize);
    for r in partial {
        let (a, b, h) = r?;
        s1 += a;
        s2 += b;
        hits += h;
    }
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(MonteCarlo {
        value: volume * mean,
        std_err: volume * (var / n).sqrt(),
        samples,
        hits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub density: String,
    pub n: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Index of the curve attaining the minimum.
    pub argmin: usize,
    pub slack: f64,
    pub pass: bool,
    pub histogram: Vec<HistogramBin>,
    pub values: Vec<f64>,
}

const HISTOGRAM_BINS: usize = 10;

/// Line integrals of `rho` over every curve of the family; passes iff the
/// minimum is at least `1 − slack`.
pub fn admissibility_report(family: &CurveFamily, rho: &Density, slack: f64) -> Result<AdmissibilityReport> {
    let values = family
        .curves
        .par_iter()
        .map(|g| Ok(line_integral(|p| rho.eval(p), g)?.value))
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty curve family".into()));
    }
    let (mut min, mut max, mut argmin) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for (i, &v) in values.iter().enumerate() {
        if v < min {
            min = v;
            argmin = i;
        }
        max = max.max(v);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let width = (max - min) / HISTOGRAM_BINS as f64;
    let mut histogram: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|k| HistogramBin {
            lo: min + width * k as f64,
            hi: if k + 1 == HISTOGRAM_BINS { max } else { min + width * (k + 1) as f64 },
            count: 0,
        })
        .collect();
    for &v in &values {
        let k = if width > 0.0 { (((v - min) / width) as usize).min(HISTOGRAM_BINS - 1) } else { 0 };
        histogram[k].count += 1;
    }
    Ok(AdmissibilityReport {
        density: rho.name().to_string(),
        n: values.len(),
        min,
        mean,
        max,
        argmin,
        slack,
        pass: min >= 1.0 - slack,
        histogram,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub h: Vec<f64>,
    pub max_dev_from_uniform: f64,
    pub iterations: usize,
    pub stationarity: f64,
}

/// Euclidean projection, in the inner product weighted by `w`, onto
/// `{x ≥ 0, Σ wᵢ xᵢ = 1}`; the solution is `xᵢ = max(0, yᵢ − λ)`.
fn project_weighted_simplex(y: &[f64], w: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&i, &j| y[j].total_cmp(&y[i]));
    // with the k largest entries active, λ = (Σ w y − 1)/Σ w over the active set
    let (mut sw, mut swy) = (0.0, 0.0);
    let mut lambda = 0.0;
    for (k, &i) in order.iter().enumerate() {
        sw += w[i];
        swy += w[i] * y[i];
        let l = (swy - 1.0) / sw;
        let next = order.get(k + 1).map(|&j| y[j]);
        if next.is_none_or(|yn| yn <= l) {
            lambda = l;
            break;
        }
    }
    y.iter().map(|&v| (v - lambda).max(0.0)).collect()
}

const ORACLE_STOP: f64 = 1e-12;
const ORACLE_MAX_ITER: usize = 200_000;
const ORACLE_SMALL_STEP: f64 = 1e-9;

/// Minimises `∭ ρ⁴` over `ρ = h(ξ) e^{−ξ} |p*|⁻¹ (−Re p*)^{1/2}` with `h`
/// piecewise constant on `n_bins` equal bins and `∫ h dξ = 1`, by projected
/// gradient descent from a random positive start.
pub fn restricted_oracle(ring: &RevolutionRing, n_bins: usize, seed: u64) -> Result<OracleResult> {
    if n_bins < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {n_bins}")));
    }
    let c = ring.profile();
    // ρ⁴ J for h ≡ 1 reduces to a function of β alone; integrate it over β and φ
    let angular = TAU
        * integrate_fallible(
            |beta| {
                let p = profile_jet(c, beta)?.p_star();
                Ok(p.re * p.re / p.norm_sqr())
            },
            FRAC_PI_2,
            1.5 * PI,
            &QuadOptions::rel(1e-13),
        )?
        .value;
    let l = ring.log_ratio();
    let w = vec![l / n_bins as f64; n_bins];
    let objective = |h: &[f64]| angular * h.iter().zip(&w).map(|(x, wi)| wi * x.powi(4)).sum::<f64>();
    let grad = |h: &[f64]| h.iter().map(|x| 4.0 * angular * x.powi(3)).collect::<Vec<f64>>();
    let wnorm = |d: &[f64]| d.iter().zip(&w).map(|(x, wi)| wi * x * x).sum::<f64>().sqrt();

    let rng = CounterRng::new(seed, 0x6f72);
    let start: Vec<f64> = (0..n_bins as u64).map(|i| rng.range_at(i, 0.1, 1.0)).collect();
    let mut h = project_weighted_simplex(&start, &w);
    let mut fh = objective(&h);
    // inverse of the largest curvature of the objective at h
    let curvature_step = |h: &[f64]| 1.0 / (12.0 * angular * h.iter().fold(0.0f64, |m, x| m.max(x * x)));
    let mut t = curvature_step(&h);
    let mut stationarity = f64::INFINITY;
    for it in 0..ORACLE_MAX_ITER {
        let g = grad(&h);
        // gradient mapping with unit step, relative to the gradient, as the stationarity measure
        let unit: Vec<f64> = h.iter().zip(&g).map(|(x, gi)| x - gi).collect();
        let pu = project_weighted_simplex(&unit, &w);
        let diff: Vec<f64> = h.iter().zip(&pu).map(|(x, y)| x - y).collect();
        stationarity = wnorm(&diff);
        if stationarity <= ORACLE_STOP * wnorm(&g).max(1.0) {
            let value = objective(&h);
            let max_dev = h.iter().fold(0.0f64, |m, x| m.max((x * l - 1.0).abs()));
            return Ok(OracleResult {
                value,
                h,
                max_dev_from_uniform: max_dev,
                iterations: it,
                stationarity,
            });
        }
        loop {
            let trial: Vec<f64> = h.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
            let hn = project_weighted_simplex(&trial, &w);
            let d: Vec<f64> = hn.iter().zip(&h).map(|(a, b)| a - b).collect();
            let lin: f64 = d.iter().zip(&g).zip(&w).map(|((di, gi), wi)| wi * di * gi).sum();
            let fn_ = objective(&hn);
            let dn = wnorm(&d);
            // below ORACLE_SMALL_STEP objective differences are lost in rounding
            if fn_ <= fh + lin + dn * dn / (2.0 * t) || dn <= ORACLE_SMALL_STEP {
                h = hn;
                fh = fn_;
                t = (2.0 * t).min(curvature_step(&h));
                break;
            }
            t *= 0.5;
            if t < 1e-300 {
                return Err(Error::NotConverged {
                    what: "projected gradient line search",
                    estimate: fh,
                    error: stationarity,
                });
            }
        }
    }
    Err(Error::NotConverged {
        what: "projected gradient",
        estimate: fh,
        error: stationarity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiradialAngle {
    /// Signed angle from `N^h` to the quasiradial velocity, from the frame vectors.
    pub inner_product: f64,
    /// `π/2 − arg ṗ*(β) + β`, wrapped to `(−π, π]`.
    pub closed_form: f64,
    pub cos_inner: f64,
    /// `sin(arg ṗ*(β) − β)`.
    pub sin_gap: f64,
}

/// The angle between the quasiradial through `Φ(q)` and the horizontal
/// normal of the leaf through that point, computed two independent ways.
pub fn quasiradial_angle(ring: &RevolutionRing, q: RevPoint) -> Result<QuasiradialAngle> {
    let c = ring.profile();
    let j = profile_jet(c, q.beta)?;
    let leaf = SurfacePatch::new(c.clone(), q.xi.exp())?;
    let n = leaf.horizontal_normal(q.beta, q.phi)?;
    let v = ambient_velocity(c, q, [1.0, 0.0, q.beta.tan()])?;
    let gh = HorVector::new(n.base, v[0], v[1]);
    let inner_product = n.angle_to(&gh);
    let cos_inner = n.dot(&gh) / (n.norm() * gh.norm());
    let dp = j.dp_star();
    let arg_dp = dp.im.atan2(dp.re);
    Ok(QuasiradialAngle {
        inner_product,
        closed_form: wrap_pi(FRAC_PI_2 - arg_dp + q.beta),
        cos_inner,
        sin_gap: (arg_dp - q.beta).sin(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilitySummary {
    pub n: usize,
    pub min: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub value: f64,
    pub max_dev_from_uniform: f64,
}

/// Machine-readable summary of a modulus run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusReport {
    pub surface: String,
    pub a: f64,
    pub b: f64,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
    pub admissibility: Option<AdmissibilitySummary>,
    pub oracle: Option<OracleSummary>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{quasiradial, FamilyKind};
    use crate::profile::{catalog, CatalogName};
    use proptest::prelude::*;

    fn ring(name: CatalogName, a: f64, b: f64) -> RevolutionRing {
        RevolutionRing::new(&catalog(name, 1.0).unwrap(), a, b).unwrap()
    }

    #[test]
    fn membership_examples() {
        let r = ring(CatalogName::KoranyiSphere, 1.0, 2.0);
        assert_eq!(r.membership(HPoint::from_xyt(1.5, 0.0, 0.0)).unwrap(), Membership::Inside);
        assert_eq!(r.membership(HPoint::from_xyt(1.0, 0.0, 0.0)).unwrap(), Membership::Boundary);
        assert_eq!(r.membership(HPoint::from_xyt(10.0, 0.0, 0.0)).unwrap(), Membership::Outside);
        assert_eq!(r.membership(HPoint::from_xyt(0.0, 0.0, 2.0)).unwrap(), Membership::Inside);
        assert_eq!(r.membership(HPoint::from_xyt(0.0, 0.0, -4.0)).unwrap(), Membership::Boundary);
        assert!(r.membership(HPoint::ORIGIN).is_err());
    }

    #[test]
    fn rho0_examples() {
        let r = ring(CatalogName::KoranyiSphere, 1.0, 1f64.exp());
        let v = r.rho0(HPoint::from_xyt(1.2, 0.0, 0.0)).unwrap();
        assert!((v - 1.2 / 1.44).abs() < 1e-15);
        assert_eq!(r.rho0(HPoint::from_xyt(5.0, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(r.rho0(HPoint::from_xyt(0.0, 0.0, 2.0)).unwrap(), 0.0);
        assert!(r.rho0(HPoint::ORIGIN).is_err());
    }

    #[test]
    fn ring_rejects_bad_input() {
        let k = catalog(CatalogName::KoranyiSphere, 1.0).unwrap();
        assert!(RevolutionRing::new(&k, 2.0, 1.0).is_err());
        assert!(RevolutionRing::new(&k, 0.0, 1.0).is_err());
        let up = crate::profile::parse_profile("f = sin(pi*s); g = s; domain = (0, 1)").unwrap();
        assert!(matches!(RevolutionRing::new(&up, 1.0, 2.0), Err(Error::Validation { .. })));
    }

    #[test]
    fn analytic_values() {
        assert!((analytic_modulus(1.0, 1f64.exp()).unwrap() - PI * PI).abs() < 1e-14);
        assert!((analytic_modulus(1.0, 2.0).unwrap() - 29.6362).abs() < 1e-3);
        let a = analytic_modulus(0.5, 3.0).unwrap();
        assert!((analytic_modulus(1.5, 9.0).unwrap() - a).abs() < 1e-13 * a);
        assert!(analytic_modulus(1.0, 1.0).is_err());
    }

    #[test]
    fn numeric_modulus_koranyi() {
        let r = ring(CatalogName::KoranyiSphere, 1.0, 2.0);
        let n = numeric_modulus(&r, 1e-10).unwrap();
        let a = analytic_modulus(1.0, 2.0).unwrap();
        assert!((n.value - a).abs() <= 1e-6 * a, "{} vs {a}", n.value);
    }

    #[test]
    fn projection_is_feasible_and_idempotent() {
        let w = [0.5, 0.25, 0.25];
        let x = project_weighted_simplex(&[3.0, -1.0, 0.2], &w);
        let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!((s - 1.0).abs() < 1e-15 && x.iter().all(|v| *v >= 0.0));
        let y = project_weighted_simplex(&x, &w);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn oracle_finds_uniform_profile() {
        let r = ring(CatalogName::KoranyiSphere, 1.0, 1f64.exp());
        for n in [2, 64] {
            let o = restricted_oracle(&r, n, 3).unwrap();
            assert!((o.value - PI * PI).abs() <= 1e-9 * PI * PI, "{}", o.value);
            assert!(o.max_dev_from_uniform <= 1e-6);
        }
    }

    #[test]
    fn perturbation_increases_objective() {
        // Σ wᵢ hᵢ⁴ at fixed Σ wᵢ hᵢ is smallest at the uniform profile
        let w = [0.25; 4];
        let f = |h: &[f64]| h.iter().zip(&w).map(|(x, wi)| wi * x.powi(4)).sum::<f64>();
        let u = [1.0; 4];
        let p = [1.1, 0.9, 1.05, 0.95];
        assert!(f(&p) > f(&u));
    }

    #[test]
    fn quasiradial_integrals_are_one() {
        let r = ring(CatalogName::BubbleSet, 0.5, 3.0);
        let fam = CurveFamily::generate(&r, FamilyKind::QuasiradialGrid { n_beta: 6, n_phi: 3 }, 64).unwrap();
        let rep = admissibility_report(&fam, &Density::rho0(&r), DEFAULT_SLACK).unwrap();
        assert!(rep.pass);
        assert!((rep.min - 1.0).abs() < 1e-9 && (rep.max - 1.0).abs() < 1e-9);
        let zero = admissibility_report(&fam, &Density::zero(), DEFAULT_SLACK).unwrap();
        assert!(!zero.pass && zero.min == 0.0);
        assert_eq!(zero.histogram.iter().map(|b| b.count).sum::<usize>(), fam.curves.len());
    }

    #[test]
    fn koranyi_angle_vanishes() {
        let r = ring(CatalogName::KoranyiSphere, 1.0, 2.0);
        for (xi, beta, phi) in [(0.1, 1.7, 0.0), (0.5, PI, 2.0), (0.6, 4.5, 5.5)] {
            let a = quasiradial_angle(&r, RevPoint::new(xi, beta, phi)).unwrap();
            assert!(wrap_pi(a.inner_product).abs() < 1e-10, "{a:?}");
            assert!(a.closed_form.abs() < 1e-10);
        }
    }

    #[test]
    fn pullback_matches_ambient_density() {
        let r = ring(CatalogName::CcSphere, 1.0, 2.0);
        let q = RevPoint::new(0.3, 2.5, 1.0);
        let amb = r.rho0(phi_map(r.profile(), q).unwrap()).unwrap();
        assert!((amb - r.rho0_pullback(q).unwrap()).abs() < 1e-14);
        let g = quasiradial(&r, 2.5, 1.0, 8).unwrap();
        assert!(g.residual() < 1e-12);
    }

    #[test]
    fn cos_squared_band_integral() {
        let r = crate::quad::integrate(|b: f64| b.cos().powi(2), FRAC_PI_2, 1.5 * PI, &QuadOptions::rel(1e-14)).unwrap();
        assert!((r.value - FRAC_PI_2).abs() <= 1e-12);
    }

    #[test]
    fn sin_gap_bounded_away_from_zero() {
        for name in CatalogName::ALL {
            let r = ring(name, 1.0, 2.0);
            let min = (1..256)
                .map(|i| {
                    let beta = FRAC_PI_2 + PI * i as f64 / 256.0;
                    quasiradial_angle(&r, RevPoint::new(0.0, beta, 0.0)).map(|a| a.sin_gap.abs())
                })
                .collect::<Result<Vec<_>>>()
                .unwrap()
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "{name:?}");
        }
    }

    fn stock(r: &RevolutionRing) -> Vec<(Density, bool)> {
        let (ra, rb, l) = (r.clone(), r.clone(), r.log_ratio());
        let (rc, a) = (r.clone(), r.a());
        vec![
            (Density::rho0(r), true),
            (Density::new("1.2 rho0", move |p| Ok(1.2 * ra.rho0(p)?)), true),
            (
                Density::new("radially reweighted rho0", move |p| {
                    let v = rb.rho0(p)?;
                    if v == 0.0 {
                        return Ok(0.0);
                    }
                    let xi = (rb.ratio(p)? / a).ln();
                    Ok(v * (1.0 + 0.5 * (TAU * xi / l).sin()))
                }),
                true,
            ),
            (Density::new("rho0 with angular bump", move |p| Ok(rc.rho0(p)? * (1.0 + 0.5 * (3.0 * p.z.re).sin().powi(2)))), false),
        ]
    }

    #[test]
    fn admissible_stock_respects_lower_bound() {
        let r = ring(CatalogName::BubbleSet, 1.0, 2.0);
        let fam = CurveFamily::generate(&r, FamilyKind::QuasiradialGrid { n_beta: 8, n_phi: 4 }, 256).unwrap();
        let m = analytic_modulus(1.0, 2.0).unwrap();
        for (rho, phi_independent) in stock(&r) {
            let rep = admissibility_report(&fam, &rho, DEFAULT_SLACK).unwrap();
            assert!(rep.pass, "{} min {}", rho.name(), rep.min);
            let c = r.profile();
            let tol = if phi_independent { 1e-9 } else { 1e-7 };
            let v = integrate_over_box(c, |q| Ok(rho.eval(phi_map(c, q)?)?.powi(4)), &r.coordinate_box(), tol, phi_independent).unwrap();
            assert!(v.value >= m - 1e-6 * m, "{}: {} < {m}", rho.name(), v.value);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn angle_paths_agree(xi in -0.5f64..1.0, u in 0.01f64..0.99, phi in 0.0f64..TAU, which in 1usize..3) {
            let r = ring(CatalogName::ALL[which], 1.0, 2.0);
            let q = RevPoint::new(xi, FRAC_PI_2 + u * PI, phi);
            let a = quasiradial_angle(&r, q).unwrap();
            prop_assert!(wrap_pi(a.inner_product - a.closed_form).abs() <= 1e-9);
            prop_assert!((a.cos_inner.abs() - a.sin_gap.abs()).abs() <= 1e-9);
            let a0 = quasiradial_angle(&r, RevPoint::new(0.0, q.beta, 0.0)).unwrap();
            prop_assert!(wrap_pi(a.inner_product - a0.inner_product).abs() <= 1e-9);
        }
    }
}
