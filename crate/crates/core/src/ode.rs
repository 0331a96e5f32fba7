//! Dormand–Prince 5(4) embedded Runge–Kutta integration with step-size
//! control. Output is produced at caller-supplied nodes: the integrator
//! always lands exactly on each node, so dense output carries the full
//! local accuracy of the adaptive steps.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One attempted step; returns the 5th-order solution and the scaled error norm.
fn try_step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    h: f64,
    opts: &OdeOptions,
) -> Result<([f64; N], f64)>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs(t + C[s] * h, &ys)?;
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    for i in 0..N {
        let (mut d5, mut d4) = (0.0, 0.0);
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
        let e = (h * (d5 - d4)).abs() / sc;
        err = if e.is_nan() || !y5[i].is_finite() { f64::INFINITY } else { err.max(e) };
    }
    Ok((y5, err))
}

/// Integrates `y' = rhs(t, y)` from `(nodes[0], y0)` and returns the state at every node.
/// Nodes must be monotone (either direction).
pub fn integrate_to_nodes<const N: usize, F>(
    mut rhs: F,
    nodes: &[f64],
    y0: [f64; N],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut out = Vec::with_capacity(nodes.len());
    if nodes.is_empty() {
        return Ok(out);
    }
    out.push(y0);
    let span = (nodes[nodes.len() - 1] - nodes[0]).abs();
    let mut y = y0;
    let mut h_try = if span > 0.0 { span / 64.0 } else { 0.0 };
    let mut steps = 0usize;
    for w in nodes.windows(2) {
        let (mut t, t_end) = (w[0], w[1]);
        let dir = (t_end - t).signum();
        while (t_end - t) * dir > 0.0 {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NotConverged {
                    what: "Runge-Kutta integration",
                    estimate: t,
                    error: f64::NAN,
                });
            }
            let remaining = (t_end - t).abs();
            let last = h_try >= remaining;
            let h = dir * if last { remaining } else { h_try };
            let (y_new, err) = try_step(&mut rhs, t, &y, h, opts)?;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t_end } else { t + h };
                y = y_new;
                // a step truncated to land on a node says little about the natural step size
                if !last {
                    h_try = h.abs() * factor;
                }
            } else {
                h_try = h.abs() * factor;
                if h_try < 1e-14 * span.max(1e-300) {
                    return Err(Error::NotConverged {
                        what: "Runge-Kutta step size",
                        estimate: t,
                        error: err,
                    });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let nodes: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2).collect();
        let ys = integrate_to_nodes(|_, y: &[f64; 1]| Ok([y[0]]), &nodes, [1.0], &OdeOptions::default()).unwrap();
        for (t, y) in nodes.iter().zip(&ys) {
            assert!((y[0] - t.exp()).abs() <= 1e-9 * t.exp(), "{t}");
        }
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let nodes: Vec<f64> = (0..=20).map(|i| -(i as f64) * 0.5).collect();
        let ys = integrate_to_nodes(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            &nodes,
            [0.0, 1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in nodes.iter().zip(&ys) {
            assert!((y[0] - t.sin()).abs() < 1e-9);
            assert!((y[1] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_quadrature_and_degenerate_span() {
        let ys = integrate_to_nodes(|t, _: &[f64; 1]| Ok([t.cos()]), &[0.0, 1.0, 3.0], [0.0], &OdeOptions::default()).unwrap();
        assert!((ys[2][0] - 3f64.sin()).abs() < 1e-10);
        let ys = integrate_to_nodes(|_, _: &[f64; 1]| Ok([1.0]), &[2.0, 2.0], [5.0], &OdeOptions::default()).unwrap();
        assert_eq!(ys, vec![[5.0], [5.0]]);
    }

    #[test]
    fn blow_up_is_reported() {
        let r = integrate_to_nodes(|_, y: &[f64; 1]| Ok([y[0] * y[0]]), &[0.0, 2.0], [1.0], &OdeOptions::default());
        assert!(r.is_err());
    }
}
