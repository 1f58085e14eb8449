//! Shooting for the normalized radial profile.
//!
//! The initial value problem
//!
//! ```text
//! w'' + w'/ρ + |w|^{p-1} w = 0,   w(0) = a,  w'(0) = 0,
//! ```
//!
//! is integrated in the log-radius coordinate t = ln ρ, where the radial
//! Laplacian collapses to e^{-2t} d²/dt² and the equation becomes
//!
//! ```text
//! w_tt = -sign(w) · exp(2t + (p-1) ln|w|).
//! ```
//!
//! The zeros of w grow like e^{p/4}, so ρ itself overflows f64 long
//! before p reaches the upper end of the default sweep; in t everything
//! stays O(p). The origin singularity is removed by a series start: for
//! ζ = a^{(p-1)/2} ρ below a p-dependent threshold,
//!
//! ```text
//! w = a (1 - ζ²/4 + p ζ⁴/64 - (3p² - 2p) ζ⁶/2304 + O(p³ζ⁸)).
//! ```
//!
//! Accepted steps store (w, w_t, w_tt); evaluation between nodes uses
//! quintic Hermite interpolation, which keeps |w|^{p-1} accurate after
//! the (p-1)-fold amplification of relative error.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};

/// One accepted integration node in t = ln ρ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShotNode {
    pub t: f64,
    pub w: f64,
    pub wt: f64,
    pub wtt: f64,
}

/// Parameters for [`shoot_ivp`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShotParams {
    /// Relative tolerance of the adaptive integrator.
    pub tol: f64,
    /// Abort threshold in log radius (ρ_max = e^{ln_rho_max}).
    pub ln_rho_max: f64,
    /// Maximum step in t; also bounds the Hermite interpolation error.
    pub h_max: f64,
    /// Initial value w(0).
    pub w0: f64,
}

impl Default for ShotParams {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            // The K-th zero sits at ln ρ ≈ c_K p; 5000 covers the
            // default sweep (p ≤ 1000, K ≤ 3) with a wide margin.
            ln_rho_max: 5000.0,
            h_max: 0.03,
            w0: 1.0,
        }
    }
}

/// Series start data: w = a Σ c_{2k} ζ^{2k} with ζ = √A ρ, A = a^{p-1}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesStart {
    pub a: f64,
    pub sqrt_amp: f64,
    pub c2: f64,
    pub c4: f64,
    pub c6: f64,
    /// Series is used for t = ln ρ < t0.
    pub t0: f64,
}

impl SeriesStart {
    fn new(p: f64, a: f64) -> Self {
        let amp = a.abs().powf(p - 1.0);
        let sqrt_amp = amp.sqrt();
        let zeta0 = 0.2 / p.sqrt();
        Self {
            a,
            sqrt_amp,
            c2: -0.25,
            c4: p / 64.0,
            c6: -(3.0 * p * p - 2.0 * p) / 2304.0,
            t0: (zeta0 / sqrt_amp).ln(),
        }
    }

    /// (w, w_t) at t = ln ρ inside the series region.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let zeta = self.sqrt_amp * t.exp();
        let z2 = zeta * zeta;
        let w = self.a * (1.0 + z2 * (self.c2 + z2 * (self.c4 + z2 * self.c6)));
        let wt = self.a * z2 * (2.0 * self.c2 + z2 * (4.0 * self.c4 + z2 * 6.0 * self.c6));
        (w, wt)
    }
}

/// Sampled normalized shooting profile with refined sign-change locations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawShot {
    pub p: f64,
    pub series: SeriesStart,
    pub nodes: Vec<ShotNode>,
    /// Zeros of w in t = ln ρ, strictly increasing.
    pub zeros_t: Vec<f64>,
    /// w_t at each zero (nonzero: zeros are simple).
    pub zero_slopes: Vec<f64>,
}

/// Right-hand side of w_tt = -e^{2t} |w|^{p-1} w, in log scale.
fn rhs(p: f64, t: f64, w: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let ex = 2.0 * t + (p - 1.0) * w.abs().ln();
    if ex < -745.0 {
        0.0
    } else {
        // the physical curvature of w stays O(1); exponents near the
        // overflow threshold indicate a corrupted state
        -w.signum() * (ex + w.abs().ln()).exp()
    }
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 2]; // (w, w_t)

fn dp45_step(p: f64, t: f64, y: State, h: f64) -> (State, f64) {
    let mut k = [[0.0f64; 2]; 7];
    for i in 0..7 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += h * DP_A[i][j] * kj[0];
            yi[1] += h * DP_A[i][j] * kj[1];
        }
        let ti = t + DP_C[i] * h;
        k[i] = [yi[1], rhs(p, ti, yi[0])];
    }
    let mut y5 = y;
    let mut y4 = y;
    for i in 0..7 {
        y5[0] += h * DP_B5[i] * k[i][0];
        y5[1] += h * DP_B5[i] * k[i][1];
        y4[0] += h * DP_B4[i] * k[i][0];
        y4[1] += h * DP_B4[i] * k[i][1];
    }
    let scale0 = 1e-14 + 1e-13 * y5[0].abs().max(y[0].abs());
    let scale1 = 1e-14 + 1e-13 * y5[1].abs().max(y[1].abs());
    let e0 = (y5[0] - y4[0]) / scale0;
    let e1 = (y5[1] - y4[1]) / scale1;
    (y5, (0.5 * (e0 * e0 + e1 * e1)).sqrt())
}

/// Integrates from (t_from, y) to t_to with small adaptive steps.
/// Used for zero refinement; t_to - t_from never exceeds one outer step.
fn integrate_to(p: f64, t_from: f64, y: State, t_to: f64, tol: f64) -> State {
    if t_to == t_from {
        return y;
    }
    let dir = (t_to - t_from).signum();
    let mut t = t_from;
    let mut yy = y;
    let mut h = (t_to - t_from) / 4.0;
    loop {
        if (t_to - t) * dir <= 0.0 {
            return yy;
        }
        if (t + h - t_to) * dir > 0.0 {
            h = t_to - t;
        }
        let (ynew, err) = dp45_step(p, t, yy, h);
        let err = err * (1e-13 / tol);
        if err <= 1.0 || h.abs() < 1e-14 {
            t += h;
            yy = ynew;
        }
        let fac = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= fac;
    }
}

/// Integrates the normalized profile until `zeros_wanted` sign changes of
/// w are bracketed and refined. Returns the sampled shot truncated at the
/// last requested zero.
pub fn shoot_ivp(p: f64, zeros_wanted: usize, params: &ShotParams) -> Result<RawShot> {
    assert!(p > 1.0, "exponent must exceed 1");
    assert!(zeros_wanted >= 1);
    assert!(params.tol > 0.0);

    let series = SeriesStart::new(p, params.w0);
    let mut t = series.t0;
    let (w, wt) = series.eval(t);
    let mut y: State = [w, wt];

    let mut nodes = vec![ShotNode {
        t,
        w: y[0],
        wt: y[1],
        wtt: rhs(p, t, y[0]),
    }];
    let mut zeros_t = Vec::new();
    let mut zero_slopes = Vec::new();
    let mut h: f64 = 1e-3;

    while zeros_t.len() < zeros_wanted {
        if t > params.ln_rho_max {
            return Err(LabError::MaxSpanExceeded {
                wanted: zeros_wanted,
                found: zeros_t.len(),
                ln_rho_max: params.ln_rho_max,
            });
        }
        h = h.min(params.h_max);
        let (ynew, err) = dp45_step(p, t, y, h);
        let err = err * (1e-13 / params.tol);
        if err > 1.0 {
            if h < 1e-12 {
                return Err(LabError::StepFailure { t, dt: h });
            }
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            continue;
        }
        let (t_old, y_old) = (t, y);
        t += h;
        y = ynew;

        if y_old[0] != 0.0 && y[0] != 0.0 && y_old[0].signum() != y[0].signum() {
            let (tz, yz) = refine_zero(p, t_old, y_old, t, params.tol);
            zeros_t.push(tz);
            zero_slopes.push(yz[1]);
            // Store the refined zero as a node: interpolating |w|^{p-1}
            // across a segment straddling a sign change amplifies error,
            // so the crossing itself must be a breakpoint.
            if tz - nodes.last().unwrap().t <= 1e-10 {
                nodes.pop();
            }
            nodes.push(ShotNode {
                t: tz,
                w: yz[0],
                wt: yz[1],
                wtt: rhs(p, tz, yz[0]),
            });
            if zeros_t.len() == zeros_wanted {
                break;
            }
        }

        // Skip the step-end node if it would create a degenerate segment
        // with a just-inserted zero node.
        if t - nodes.last().unwrap().t > 1e-10 {
            nodes.push(ShotNode {
                t,
                w: y[0],
                wt: y[1],
                wtt: rhs(p, t, y[0]),
            });
        }
        if err > 0.0 {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        } else {
            h *= 5.0;
        }
    }

    Ok(RawShot {
        p,
        series,
        nodes,
        zeros_t,
        zero_slopes,
    })
}

/// Bisection bracket narrowing followed by Newton polish; each trial point
/// is reached by re-integrating from the step start, so the refined zero
/// inherits the integrator's accuracy rather than interpolation error.
fn refine_zero(p: f64, t_a: f64, y_a: State, t_b: f64, tol: f64) -> (f64, State) {
    let mut lo = t_a;
    let mut hi = t_b;
    let sign_lo = y_a[0].signum();
    let eval = |tt: f64| integrate_to(p, t_a, y_a, tt, tol.min(1e-13));

    // a few bisections to get a safe Newton starting point
    let mut mid = 0.5 * (lo + hi);
    let mut ym = eval(mid);
    for _ in 0..8 {
        if ym[0] == 0.0 {
            return (mid, ym);
        }
        if ym[0].signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        ym = eval(mid);
    }

    let mut tz = mid;
    let mut yz = ym;
    for _ in 0..12 {
        if yz[1] == 0.0 {
            break;
        }
        let step = yz[0] / yz[1];
        // A proposed step below one ulp of tz means the zero is resolved to
        // machine precision; clamping it into the bracket would instead
        // restart bisection from a worse point.
        if step.abs() < 1e-15 * tz.abs().max(1.0) {
            break;
        }
        let mut t_next = tz - step;
        if t_next <= lo || t_next >= hi {
            t_next = 0.5 * (lo + hi);
        }
        let y_next = eval(t_next);
        if y_next[0] != 0.0 {
            if y_next[0].signum() == sign_lo {
                lo = t_next;
            } else {
                hi = t_next;
            }
        }
        let done = (t_next - tz).abs() < 1e-15 * tz.abs().max(1.0);
        tz = t_next;
        yz = y_next;
        if done || yz[0] == 0.0 {
            break;
        }
    }
    (tz, yz)
}

/// Quintic Hermite basis on [0,1]; returns (value, first, second) weights
/// applied to (f0, h f0', h² f0'', f1, h f1', h² f1'').
fn quintic_weights(tau: f64) -> [f64; 6] {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let t4 = t3 * tau;
    let t5 = t4 * tau;
    [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        tau - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        0.5 * (t3 - 2.0 * t4 + t5),
    ]
}

fn quintic_dweights(tau: f64) -> [f64; 6] {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let t4 = t3 * tau;
    [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        0.5 * (2.0 * tau - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
    ]
}

fn quintic_ddweights(tau: f64) -> [f64; 6] {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    [
        -60.0 * tau + 180.0 * t2 - 120.0 * t3,
        -36.0 * tau + 96.0 * t2 - 60.0 * t3,
        0.5 * (2.0 - 18.0 * tau + 36.0 * t2 - 20.0 * t3),
        60.0 * tau - 180.0 * t2 + 120.0 * t3,
        -24.0 * tau + 84.0 * t2 - 60.0 * t3,
        0.5 * (6.0 * tau - 24.0 * t2 + 20.0 * t3),
    ]
}

impl RawShot {
    /// Log radius of the first stored node (series handoff point).
    pub fn t_start(&self) -> f64 {
        self.nodes[0].t
    }

    /// Log radius of the last stored node (the final refined zero when
    /// the shot was truncated there).
    pub fn t_end(&self) -> f64 {
        self.nodes.last().unwrap().t
    }

    fn segment(&self, t: f64) -> usize {
        // index i with nodes[i].t <= t <= nodes[i+1].t
        match self
            .nodes
            .binary_search_by(|n| n.t.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.nodes.len() - 2),
        }
    }

    /// (w, w_t) at t = ln ρ. Series below the handoff, quintic Hermite on
    /// the stored nodes above it.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if t < self.nodes[0].t {
            return self.series.eval(t);
        }
        let t = t.min(self.t_end());
        let i = self.segment(t);
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = b.t - a.t;
        let tau = (t - a.t) / h;
        let vals = [a.w, h * a.wt, h * h * a.wtt, b.w, h * b.wt, h * h * b.wtt];
        let wq = quintic_weights(tau);
        let dq = quintic_dweights(tau);
        let w: f64 = wq.iter().zip(&vals).map(|(c, v)| c * v).sum();
        let wt: f64 = dq.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / h;
        (w, wt)
    }

    pub fn w(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Scaled ODE defect: the quintic reconstruction is differentiated
    /// twice at segment midpoints and compared against the right-hand
    /// side; each defect is scaled by the local curvature magnitude.
    pub fn defect_sup(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nodes.len() - 1 {
            let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
            let h = b.t - a.t;
            if h <= 0.0 {
                continue;
            }
            let tm = 0.5 * (a.t + b.t);
            let vals = [a.w, h * a.wt, h * h * a.wtt, b.w, h * b.wt, h * h * b.wtt];
            let wq = quintic_weights(0.5);
            let ddq = quintic_ddweights(0.5);
            let wm: f64 = wq.iter().zip(&vals).map(|(c, v)| c * v).sum();
            let wttm: f64 = ddq.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / (h * h);
            let f = rhs(self.p, tm, wm);
            let scale = 1.0 + f.abs().max(wttm.abs());
            worst = worst.max((wttm - f).abs() / scale);
        }
        worst
    }

    /// Interior extrema of w: (t, w) at points where w_t changes sign,
    /// refined by Newton on w_t using the stored curvature.
    pub fn extrema(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for i in 0..self.nodes.len() - 1 {
            let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
            if a.wt == 0.0 || b.wt == 0.0 || a.wt.signum() == b.wt.signum() {
                continue;
            }
            let h = b.t - a.t;
            let vals = [a.w, h * a.wt, h * h * a.wtt, b.w, h * b.wt, h * h * b.wtt];
            // bisection on the quintic derivative
            let dw = |tau: f64| -> f64 {
                quintic_dweights(tau)
                    .iter()
                    .zip(&vals)
                    .map(|(c, v)| c * v)
                    .sum::<f64>()
            };
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let slo = dw(lo).signum();
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if dw(mid).signum() == slo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            let w: f64 = quintic_weights(tau)
                .iter()
                .zip(&vals)
                .map(|(c, v)| c * v)
                .sum();
            out.push((a.t + tau * h, w));
        }
        out
    }
}
