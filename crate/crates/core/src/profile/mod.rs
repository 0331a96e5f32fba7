//! Profile curves `s ↦ (f(s), 0, g(s))` in the `xt`-plane, their Korányi
//! images `p* = −f² + ig`, the shape conditions a profile must satisfy,
//! reparametrisation by the Korányi argument, and the built-in catalog.

mod expr;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::heis::arg_left;

pub use expr::parse_profile;

/// Maps a dual parameter to the dual pair `(f, g)`.
pub type Evaluator = Arc<dyn Fn(Dual2) -> Result<(Dual2, Dual2)> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parametrisation {
    Native,
    /// The parameter is `β = arg p*` itself, on `(π/2, 3π/2)`.
    Argument,
}

#[derive(Clone)]
pub struct ProfileCurve {
    name: String,
    params: Vec<(String, f64)>,
    domain: (f64, f64),
    parametrisation: Parametrisation,
    eval: Evaluator,
    poles: Option<[Complex64; 2]>,
}

impl fmt::Debug for ProfileCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProfileCurve")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("parametrisation", &self.parametrisation)
            .field("poles", &self.poles)
            .finish()
    }
}

/// Value and first two derivatives of `f` and `g` at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub s: f64,
    pub f: f64,
    pub g: f64,
    pub df: f64,
    pub dg: f64,
    pub ddf: f64,
    pub ddg: f64,
}

impl ProfileJet {
    pub fn p_star(&self) -> Complex64 {
        Complex64::new(-self.f * self.f, self.g)
    }

    pub fn dp_star(&self) -> Complex64 {
        Complex64::new(-2.0 * self.f * self.df, self.dg)
    }

    pub fn ddp_star(&self) -> Complex64 {
        Complex64::new(-2.0 * (self.df * self.df + self.f * self.ddf), self.ddg)
    }

    pub fn r(&self) -> f64 {
        self.p_star().norm()
    }

    pub fn beta(&self) -> f64 {
        arg_left(self.p_star())
    }

    /// `Im(p̄* ṗ*)/|p*|²`.
    pub fn beta_dot(&self) -> f64 {
        let p = self.p_star();
        (p.conj() * self.dp_star()).im / p.norm_sqr()
    }

    pub fn beta_ddot(&self) -> f64 {
        let q = self.dp_star() / self.p_star();
        (self.ddp_star() / self.p_star() - q * q).im
    }
}

impl ProfileCurve {
    pub fn new(
        name: impl Into<String>,
        params: Vec<(String, f64)>,
        domain: (f64, f64),
        parametrisation: Parametrisation,
        eval: Evaluator,
    ) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::EmptyDomain { lo, hi });
        }
        Ok(Self {
            name: name.into(),
            params,
            domain,
            parametrisation,
            eval,
            poles: None,
        })
    }

    /// Attaches the limits of `p*` at the two ends of the domain.
    pub fn with_poles(mut self, lo: Complex64, hi: Complex64) -> Self {
        self.poles = Some([lo, hi]);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn parametrisation(&self) -> Parametrisation {
        self.parametrisation
    }

    pub fn is_argument_parametrised(&self) -> bool {
        self.parametrisation == Parametrisation::Argument
    }

    pub fn require_argument(&self) -> Result<()> {
        if self.is_argument_parametrised() {
            Ok(())
        } else {
            Err(Error::NotArgumentParametrised(self.name.clone()))
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        self.domain.0 < s && s < self.domain.1
    }

    /// Evaluates `(f, g)` on a dual parameter lying in the open domain.
    pub fn eval_dual(&self, s: Dual2) -> Result<(Dual2, Dual2)> {
        if !self.contains(s.v) {
            return Err(self.out_of_domain(s.v));
        }
        let (f, g) = (self.eval)(s)?;
        if !f.is_finite() || !g.is_finite() {
            return Err(Error::NonFinite {
                what: "profile",
                at: s.v,
            });
        }
        Ok((f, g))
    }

    pub fn jet(&self, s: f64) -> Result<ProfileJet> {
        let (f, g) = self.eval_dual(Dual2::var(s))?;
        Ok(ProfileJet {
            s,
            f: f.v,
            g: g.v,
            df: f.d1,
            dg: g.d1,
            ddf: f.d2,
            ddg: g.d2,
        })
    }

    pub fn p_star(&self, s: f64) -> Result<Complex64> {
        Ok(self.jet(s)?.p_star())
    }

    /// Limits of `p*` at the two ends, extrapolated when not supplied.
    pub fn poles(&self) -> Result<[Complex64; 2]> {
        if let Some(p) = self.poles {
            return Ok(p);
        }
        let lo = extrapolate_end(self, End::Lo, |j| j.p_star())?;
        let hi = extrapolate_end(self, End::Hi, |j| j.p_star())?;
        Ok([lo, hi])
    }

    /// `p*` on the closed domain, using the pole limits at the ends.
    pub fn p_star_closed(&self, s: f64) -> Result<Complex64> {
        let (lo, hi) = self.domain;
        if s == lo {
            return Ok(self.poles()?[0]);
        }
        if s == hi {
            return Ok(self.poles()?[1]);
        }
        self.p_star(s)
    }

    fn out_of_domain(&self, s: f64) -> Error {
        Error::OutOfDomain {
            what: "profile parameter",
            value: s,
            domain: format!("({}, {})", self.domain.0, self.domain.1),
        }
    }
}

/// The six numbers `(f, g, ḟ, ġ, f̈, g̈)` at `s`.
pub fn eval_profile(c: &ProfileCurve, s: f64) -> Result<[f64; 6]> {
    let j = c.jet(s)?;
    Ok([j.f, j.g, j.df, j.dg, j.ddf, j.ddg])
}

/// The Korányi image `s ↦ p*(s)` of a profile.
#[derive(Debug, Clone, Copy)]
pub struct KoranyiImage<'a> {
    curve: &'a ProfileCurve,
}

pub fn koranyi_image(c: &ProfileCurve) -> KoranyiImage<'_> {
    KoranyiImage { curve: c }
}

impl KoranyiImage<'_> {
    pub fn p_star(&self, s: f64) -> Result<Complex64> {
        self.curve.p_star(s)
    }

    pub fn dp_star(&self, s: f64) -> Result<Complex64> {
        Ok(self.curve.jet(s)?.dp_star())
    }

    pub fn r(&self, s: f64) -> Result<f64> {
        Ok(self.p_star(s)?.norm())
    }

    /// `dr/ds = Re(p̄* ṗ*)/|p*|`.
    pub fn r_dot(&self, s: f64) -> Result<f64> {
        let j = self.curve.jet(s)?;
        Ok((j.p_star().conj() * j.dp_star()).re / j.r())
    }

    pub fn beta(&self, s: f64) -> Result<f64> {
        Ok(self.curve.jet(s)?.beta())
    }

    pub fn beta_dot(&self, s: f64) -> Result<f64> {
        Ok(self.curve.jet(s)?.beta_dot())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Lo,
    Hi,
}

const END_OFFSETS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// One-sided limit from samples at the offsets `END_OFFSETS · width`.
///
/// Three samples determine `L + C hᵖ` exactly; `L` is the Aitken value.
fn extrapolate_end<T, F>(c: &ProfileCurve, end: End, q: F) -> Result<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Div<Output = T> + std::ops::Mul<Output = T> + Norm,
    F: Fn(&ProfileJet) -> T,
{
    let (lo, hi) = c.domain;
    let w = hi - lo;
    let mut v = Vec::with_capacity(3);
    for off in END_OFFSETS {
        let s = match end {
            End::Lo => lo + off * w,
            End::Hi => hi - off * w,
        };
        v.push(q(&c.jet(s)?));
    }
    let (d1, d2) = (v[1] - v[0], v[2] - v[1]);
    let den = d2 - d1;
    // geometric convergence is needed for the Aitken step to mean anything
    if den.norm() > 1e-14 * (v[2].norm() + d1.norm()) && d2.norm() < d1.norm() {
        Ok(v[2] - d2 * d2 / den)
    } else {
        Ok(v[2])
    }
}

trait Norm {
    fn norm(&self) -> f64;
}

impl Norm for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl Norm for Complex64 {
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub pass: bool,
    /// A parameter value at which the condition fails.
    pub witness: Option<f64>,
    pub detail: String,
}

impl ConditionCheck {
    fn pass() -> Self {
        Self {
            pass: true,
            witness: None,
            detail: String::new(),
        }
    }

    fn fail(witness: f64, detail: String) -> Self {
        Self {
            pass: false,
            witness: Some(witness),
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub profile: String,
    pub grid_n: usize,
    pub regular: ConditionCheck,
    pub a1: ConditionCheck,
    pub a2: ConditionCheck,
    pub beta_monotone: ConditionCheck,
    pub min_f: f64,
    pub min_neg_dg: f64,
    pub min_beta_dot: f64,
    /// Extrapolated `f` and `g` at the two ends of the domain.
    pub f_limits: [f64; 2],
    pub g_limits: [f64; 2],
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.regular.pass && self.a1.pass && self.a2.pass && self.beta_monotone.pass
    }

    /// The ring conditions: regularity, (A1), monotone argument, and the end
    /// behaviour of (A2). Pointwise descent of `g` is not required.
    pub fn ring_ready(&self) -> bool {
        self.regular.pass && self.a1.pass && self.beta_monotone.pass && self.g_limits[0] > 0.0 && self.g_limits[1] < 0.0
    }
}

/// Checks regularity, (A1), (A2) and monotonicity of `arg p*` on `grid_n`
/// interior points, plus one-sided limits of `f` and `g` at both ends.
pub fn validate(c: &ProfileCurve, grid_n: usize) -> Result<ValidationReport> {
    if grid_n < 16 {
        return Err(Error::InvalidArgument(format!("grid_n must be at least 16, got {grid_n}")));
    }
    let (lo, hi) = c.domain;
    let w = hi - lo;
    let mut regular = ConditionCheck::pass();
    let mut a1 = ConditionCheck::pass();
    let mut a2 = ConditionCheck::pass();
    let mut beta_monotone = ConditionCheck::pass();
    let (mut min_f, mut min_neg_dg, mut min_beta_dot) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut f_scale = 0.0f64;
    let mut g_scale = 0.0f64;

    for i in 1..=grid_n {
        let s = lo + w * i as f64 / (grid_n + 1) as f64;
        let j = match c.jet(s) {
            Ok(j) => j,
            Err(e) => {
                let msg = format!("evaluation failed: {e}");
                for chk in [&mut regular, &mut a1, &mut a2, &mut beta_monotone] {
                    if chk.pass {
                        *chk = ConditionCheck::fail(s, msg.clone());
                    }
                }
                continue;
            }
        };
        f_scale = f_scale.max(j.f.abs());
        g_scale = g_scale.max(j.g.abs());
        min_f = min_f.min(j.f);
        min_neg_dg = min_neg_dg.min(-j.dg);
        let bd = j.beta_dot();
        min_beta_dot = min_beta_dot.min(if bd.is_nan() { f64::NEG_INFINITY } else { bd });
        if regular.pass && !(j.df * j.df + j.dg * j.dg > 0.0 && j.dp_star().norm() > 0.0) {
            regular = ConditionCheck::fail(s, format!("ḟ² + ġ² = {} at s = {s}", j.df * j.df + j.dg * j.dg));
        }
        if a1.pass && !(j.f > 0.0) {
            a1 = ConditionCheck::fail(s, format!("f = {} at s = {s}", j.f));
        }
        if a2.pass && !(j.dg < 0.0) {
            a2 = ConditionCheck::fail(s, format!("ġ = {} at s = {s}", j.dg));
        }
        if beta_monotone.pass && !(bd > 0.0) {
            beta_monotone = ConditionCheck::fail(s, format!("β̇ = {bd} at s = {s}"));
        }
    }

    let f_limits = [
        extrapolate_end(c, End::Lo, |j| j.f).unwrap_or(f64::NAN),
        extrapolate_end(c, End::Hi, |j| j.f).unwrap_or(f64::NAN),
    ];
    let g_limits = [
        extrapolate_end(c, End::Lo, |j| j.g).unwrap_or(f64::NAN),
        extrapolate_end(c, End::Hi, |j| j.g).unwrap_or(f64::NAN),
    ];
    let f_tol = 1e-6 * f_scale.max(1.0);
    for (k, end) in [lo, hi].into_iter().enumerate() {
        if a1.pass && !(f_limits[k].abs() <= f_tol) {
            a1 = ConditionCheck::fail(end, format!("f tends to {} at s = {end}", f_limits[k]));
        }
    }
    let g_tol = 1e-9 * g_scale.max(1.0);
    if a2.pass && !(g_limits[0] > g_tol) {
        a2 = ConditionCheck::fail(lo, format!("g tends to {} at s = {lo}", g_limits[0]));
    }
    if a2.pass && !(g_limits[1] < -g_tol) {
        a2 = ConditionCheck::fail(hi, format!("g tends to {} at s = {hi}", g_limits[1]));
    }

    Ok(ValidationReport {
        profile: c.name.clone(),
        grid_n,
        regular,
        a1,
        a2,
        beta_monotone,
        min_f,
        min_neg_dg,
        min_beta_dot,
        f_limits,
        g_limits,
    })
}

const ARG_TABLE: usize = 4096;

/// Lookup table of `β(s)` used to bracket the inverse.
struct ArgTable {
    s: Vec<f64>,
    beta: Vec<f64>,
}

impl ArgTable {
    fn build(c: &ProfileCurve) -> Result<Self> {
        let (lo, hi) = c.domain;
        let mut s = Vec::with_capacity(ARG_TABLE + 1);
        let mut beta = Vec::with_capacity(ARG_TABLE + 1);
        s.push(lo);
        beta.push(PI / 2.0);
        for i in 1..ARG_TABLE {
            let si = lo + (hi - lo) * i as f64 / ARG_TABLE as f64;
            let b = c.jet(si)?.beta();
            if !(b > beta[beta.len() - 1]) {
                return Err(Error::Validation {
                    profile: c.name.clone(),
                    condition: format!("strictly increasing argument (β = {b} at s = {si})"),
                });
            }
            s.push(si);
            beta.push(b);
        }
        if !(beta[beta.len() - 1] < 1.5 * PI) {
            return Err(Error::Validation {
                profile: c.name.clone(),
                condition: "strictly increasing argument".into(),
            });
        }
        s.push(hi);
        beta.push(1.5 * PI);
        Ok(Self { s, beta })
    }

    fn bracket(&self, b: f64) -> (f64, f64) {
        let k = self.beta.partition_point(|&x| x <= b).clamp(1, self.beta.len() - 1);
        (self.s[k - 1], self.s[k])
    }
}

/// Solves `β(s) = target` inside the bracket by Newton steps guarded by bisection.
fn invert_argument(c: &ProfileCurve, (mut a, mut b): (f64, f64), target: f64, tol: f64) -> Result<(f64, ProfileJet)> {
    let mut s = 0.5 * (a + b);
    for _ in 0..200 {
        let j = c.jet(s)?;
        let r = j.beta() - target;
        if r.abs() <= 0.25 * tol || b - a <= 4.0 * f64::EPSILON * s.abs().max(1.0) {
            if r.abs() <= tol {
                return Ok((s, j));
            }
            break;
        }
        if r < 0.0 {
            a = s;
        } else {
            b = s;
        }
        let newton = s - r / j.beta_dot();
        s = if newton > a && newton < b && newton.is_finite() {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    Err(Error::NotConverged {
        what: "argument inversion",
        estimate: s,
        error: (c.jet(s)?.beta() - target).abs(),
    })
}

/// Reparametrises a profile by `β = arg p*`. Requires `β(s)` strictly increasing.
pub fn reparam_by_argument(c: &ProfileCurve, tol: f64) -> Result<ProfileCurve> {
    if c.is_argument_parametrised() {
        return Ok(c.clone());
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let poles = c.poles()?;
    let table = Arc::new(ArgTable::build(c)?);
    let base = c.clone();
    let eval: Evaluator = Arc::new(move |b: Dual2| {
        let (s0, j) = invert_argument(&base, table.bracket(b.v), b.v, tol)?;
        let bd = j.beta_dot();
        let (ds, dds) = (1.0 / bd, -j.beta_ddot() / (bd * bd * bd));
        let s = Dual2::new(s0, ds * b.d1, dds * b.d1 * b.d1 + ds * b.d2);
        base.eval_dual(s)
    });
    let mut params = c.params.clone();
    params.push(("tol".into(), tol));
    Ok(ProfileCurve::new(c.name.clone(), params, (PI / 2.0, 1.5 * PI), Parametrisation::Argument, eval)?
        .with_poles(poles[0], poles[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogName {
    KoranyiSphere,
    BubbleSet,
    CcSphere,
}

impl CatalogName {
    pub const ALL: [CatalogName; 3] = [CatalogName::KoranyiSphere, CatalogName::BubbleSet, CatalogName::CcSphere];

    pub fn as_str(&self) -> &'static str {
        match self {
            CatalogName::KoranyiSphere => "koranyi_sphere",
            CatalogName::BubbleSet => "bubble_set",
            CatalogName::CcSphere => "cc_sphere",
        }
    }
}

impl std::str::FromStr for CatalogName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "koranyi_sphere" | "koranyi" => Ok(CatalogName::KoranyiSphere),
            "bubble_set" | "bubble" => Ok(CatalogName::BubbleSet),
            "cc_sphere" | "cc" => Ok(CatalogName::CcSphere),
            other => Err(Error::InvalidArgument(format!("unknown catalog surface `{other}`"))),
        }
    }
}

/// The Korányi sphere, the bubble set and the Carnot–Carathéodory sphere of radius `r`.
pub fn catalog(name: CatalogName, r: f64) -> Result<ProfileCurve> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("R must be positive, got {r}")));
    }
    let params = vec![("R".to_string(), r)];
    let i = Complex64::i();
    match name {
        // f = R√(−cos β), g = R² sin β, so p* = R² e^{iβ}
        CatalogName::KoranyiSphere => {
            let eval: Evaluator = Arc::new(move |b: Dual2| Ok(((-b.cos()).sqrt() * r, b.sin() * (r * r))));
            Ok(ProfileCurve::new(name.as_str(), params, (PI / 2.0, 1.5 * PI), Parametrisation::Argument, eval)?
                .with_poles(i * (r * r), -i * (r * r)))
        }
        // f = 2R sin(s/2R), g = 2R(R sin(s/R) − s + πR)
        CatalogName::BubbleSet => {
            let eval: Evaluator = Arc::new(move |s: Dual2| {
                let f = (s / (2.0 * r)).sin() * (2.0 * r);
                let g = ((s / r).sin() * r - s + PI * r) * (2.0 * r);
                Ok((f, g))
            });
            let pole = 2.0 * PI * r * r;
            Ok(ProfileCurve::new(name.as_str(), params, (0.0, 2.0 * PI * r), Parametrisation::Native, eval)?
                .with_poles(i * pole, -i * pole))
        }
        // endpoint of the lifted circle of curvature k: f = |c_k(R)|, g = t_k(R)
        CatalogName::CcSphere => {
            let eval: Evaluator = Arc::new(move |k: Dual2| {
                let f = (k * (0.5 * r)).sinc() * r;
                let g = (k * r).sin_defect() * (2.0 * r * r);
                Ok((f, g))
            });
            let pole = r * r / PI;
            Ok(ProfileCurve::new(name.as_str(), params, (-2.0 * PI / r, 2.0 * PI / r), Parametrisation::Native, eval)?
                .with_poles(i * pole, -i * pole))
        }
    }
}
