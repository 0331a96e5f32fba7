//! Adaptive Gauss–Kronrod quadrature.
//!
//! The 7/15-point Gauss–Kronrod pair never samples interval endpoints, so
//! integrable endpoint singularities (square-root type at the poles of a
//! profile) are handled by subdivision alone. Subdivision is global: the
//! panel with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol·|I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_panels: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
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
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn gk15<F>(f: &mut F, lo: f64, hi: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    if !value.is_finite() {
        return Err(Error::NonFinite {
            what: "quadrature panel",
            at: c,
        });
    }
    Ok(Panel {
        lo,
        hi,
        value,
        error,
    })
}

/// Integrates `f` over `(lo, hi)` with a fallible integrand.
pub fn integrate_fallible<F>(mut f: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    if hi < lo {
        let r = integrate_fallible(f, hi, lo, opts)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&mut f, lo, hi)?;
    let (mut total, mut total_err) = (first.value, first.error);
    heap.push(first);
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::NotConverged {
                what: "adaptive quadrature",
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval exhausted in floating point; keep what we have
            return Err(Error::NotConverged {
                what: "adaptive quadrature",
                estimate: total,
                error: total_err,
            });
        }
        let left = gk15(&mut f, worst.lo, mid)?;
        let right = gk15(&mut f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum in interval order so the result does not depend on heap history
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok(QuadResult {
        value,
        error,
        panels: panels.len(),
    })
}

pub fn integrate<F>(mut f: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_fallible(|x| Ok(f(x)), lo, hi, opts)
}

/// Nested 2-D integral `∫_{x0}^{x1} ∫_{y0}^{y1} f(x, y) dy dx`; the inner
/// integrals are computed to the same relative tolerance.
pub fn integrate_2d<F>(
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    opts: &QuadOptions,
) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let mut inner_rel = 0.0f64;
    let mut r = integrate_fallible(
        |x| {
            let inner = integrate_fallible(|y| f(x, y), y0, y1, opts)?;
            if inner.value != 0.0 {
                inner_rel = inner_rel.max(inner.error / inner.value.abs());
            }
            Ok(inner.value)
        },
        x0,
        x1,
        opts,
    )?;
    r.error += inner_rel * r.value.abs();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        assert_eq!(r.panels, 1);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        // ∫_0^1 √x dx = 2/3
        let r = integrate(|x| x.sqrt(), 0.0, 1.0, &QuadOptions::rel(1e-12)).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
        // ∫_0^1 1/√x dx = 2
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &QuadOptions::rel(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        let o = QuadOptions::default();
        assert_eq!(integrate(|x| x, 1.0, 1.0, &o).unwrap().value, 0.0);
        let r = integrate(|x| x.cos(), PI / 2.0, 0.0, &o).unwrap();
        assert!((r.value + 1.0).abs() < 1e-14);
    }

    #[test]
    fn nonintegrable_reports_non_convergence() {
        let o = QuadOptions {
            max_panels: 200,
            ..QuadOptions::rel(1e-12)
        };
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, &o);
        assert!(matches!(r, Err(Error::NotConverged { .. })));
    }

    #[test]
    fn two_dimensional_separable() {
        let r = integrate_2d(
            |x, y| Ok(x.exp() * y.cos().powi(2)),
            (0.0, 1.0),
            (PI / 2.0, 1.5 * PI),
            &QuadOptions::rel(1e-12),
        )
        .unwrap();
        let exact = (1f64.exp() - 1.0) * PI / 2.0;
        assert!((r.value - exact).abs() < 1e-12 * exact);
    }
}
