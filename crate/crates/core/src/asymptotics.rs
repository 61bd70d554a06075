//! Empirical decay-rate extraction and comparison against the predicted
//! tail exponents.
//!
//! At the left end the fitted quantity is the component itself; at the
//! right end it is the distance to the (1,1) state. A pure log-linear fit
//! gives the rate; a joint fit with a `log|xi|` regressor detects the
//! linear polynomial factor of critical-speed tails and corrects the rate
//! when present (fitting the two effects jointly avoids the
//! ill-conditioning of detrending with an already-contaminated slope).

use crate::numerics::{Component, Grid, WaveProfile};
use crate::params::{predicted_exponents, ModelParams, SpeedSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which tail of the profile a fit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    MinusInf,
    PlusInf,
}

/// Result of fitting one tail of one component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    pub end: End,
    pub component: Component,
    /// Magnitude of the fitted exponential rate.
    pub rate: f64,
    /// True when the tail carries a linear polynomial factor.
    pub polynomial_detected: bool,
    pub window: (f64, f64),
    /// RMS of the log-residuals of the selected model.
    pub fit_residual: f64,
    /// Fitted preexponential constant.
    pub amplitude: f64,
}

/// One fitted-vs-predicted rate comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateComparison {
    pub end: End,
    pub component: Component,
    pub predicted: f64,
    pub fitted: f64,
    pub relative_error: f64,
    pub verdict: bool,
    pub polynomial_expected: bool,
    pub polynomial_detected: bool,
    pub window: (f64, f64),
}

/// Default fit windows: 5 to 25 units in from either domain end.
pub fn default_window(grid: &Grid, end: End) -> (f64, f64) {
    let l = grid.half_width();
    match end {
        End::MinusInf => (-l + 5.0, -l + 25.0),
        End::PlusInf => (l - 25.0, l - 5.0),
    }
}

fn tail_quantity(profile: &WaveProfile, end: End, component: Component, i: usize) -> f64 {
    let raw = profile.component(component)[i];
    match end {
        End::MinusInf => raw,
        End::PlusInf => 1.0 - raw,
    }
}

struct FitData {
    xs: Vec<f64>,
    logs: Vec<f64>,
}

fn gather(profile: &WaveProfile, end: End, component: Component, window: (f64, f64)) -> Result<FitData> {
    let grid = &profile.grid;
    let mut xs = Vec::new();
    let mut logs = Vec::new();
    for (i, x) in grid.nodes().enumerate() {
        if x < window.0 || x > window.1 {
            continue;
        }
        let q = tail_quantity(profile, end, component, i);
        if q <= 0.0 {
            return Err(Error::FitWindow(format!(
                "window [{}, {}] too close to equilibrium/floor: nonpositive value at xi = {x}",
                window.0, window.1
            )));
        }
        xs.push(x);
        logs.push(q.ln());
    }
    if xs.len() < 8 {
        return Err(Error::FitWindow(format!(
            "window [{}, {}] holds only {} usable nodes",
            window.0,
            window.1,
            xs.len()
        )));
    }
    Ok(FitData { xs, logs })
}

/// Ordinary least squares for `y = a x + b`; returns `(a, b, rms)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let a = sxy / sxx;
    let b = my - a * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (a * x + b);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (a, b, rms)
}

/// Least squares for `y = s x + p log|x| + b` (3-parameter normal
/// equations); returns `(s, p, b, rms)`.
fn joint_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let ls: Vec<f64> = xs.iter().map(|x| x.abs().max(1e-9).ln()).collect();
    // normal equations for regressors [x, log|x|, 1]
    let (mut sxx, mut sxl, mut sll, mut sx, mut sl) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sxy, mut sly, mut sy) = (0.0, 0.0, 0.0);
    for ((x, l), y) in xs.iter().zip(&ls).zip(ys) {
        sxx += x * x;
        sxl += x * l;
        sll += l * l;
        sx += x;
        sl += l;
        sxy += x * y;
        sly += l * y;
        sy += y;
    }
    // solve the 3x3 symmetric system by Cramer's rule
    let m = [[sxx, sxl, sx], [sxl, sll, sl], [sx, sl, n]];
    let rhs = [sxy, sly, sy];
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    let col = |k: usize| {
        let mut mm = m;
        for i in 0..3 {
            mm[i][k] = rhs[i];
        }
        det(&mm) / d
    };
    let (s, p, b) = (col(0), col(1), col(2));
    let rms = (xs
        .iter()
        .zip(&ls)
        .zip(ys)
        .map(|((x, l), y)| {
            let e = y - (s * x + p * l + b);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (s, p, b, rms)
}

/// Fits the decay of one component at one end over the given window.
pub fn fit_decay(
    profile: &WaveProfile,
    end: End,
    component: Component,
    window: (f64, f64),
) -> Result<DecayFit> {
    let data = gather(profile, end, component, window)?;
    let (slope, intercept, rms_line) = line_fit(&data.xs, &data.logs);
    let (s_joint, p_joint, b_joint, rms_joint) = joint_fit(&data.xs, &data.logs);
    let polynomial_detected = (0.7..=1.3).contains(&p_joint);
    let (rate, amplitude, fit_residual) = if polynomial_detected {
        (s_joint.abs(), b_joint.exp(), rms_joint)
    } else {
        (slope.abs(), intercept.exp(), rms_line)
    };
    Ok(DecayFit {
        end,
        component,
        rate,
        polynomial_detected,
        window,
        fit_residual,
        amplitude,
    })
}

/// Grows a usable window for the pair `(end, component)`: starts from the
/// default and slides toward the front (2 units a step) until the fitted
/// model is log-linear to 5e-2 RMS with strictly positive data. Fast
/// decaying components underflow the defaults; sliding inward keeps the
/// fit inside the numerically resolved part of the tail.
pub fn select_window(
    profile: &WaveProfile,
    end: End,
    component: Component,
) -> Result<DecayFit> {
    let mut window = default_window(&profile.grid, end);
    let step = 2.0;
    let guard = 8.0;
    loop {
        let attempt = fit_decay(profile, end, component, window);
        if let Ok(fit) = &attempt {
            if fit.fit_residual <= 0.05 {
                return attempt;
            }
        }
        window = match end {
            End::MinusInf => (window.0 + step, window.1 + step),
            End::PlusInf => (window.0 - step, window.1 - step),
        };
        let exhausted = match end {
            End::MinusInf => window.1 > -guard,
            End::PlusInf => window.0 < guard,
        };
        if exhausted {
            return Err(match attempt {
                Ok(fit) => Error::FitWindow(format!(
                    "fit residual {:.3} still too large in the last window [{}, {}]",
                    fit.fit_residual, fit.window.0, fit.window.1
                )),
                Err(e) => e,
            });
        }
    }
}

/// Fits all four (end, component) pairs of a converged wave and compares
/// them against the predicted exponents at relative tolerance `tol`.
pub fn compare_rates(
    profile: &WaveProfile,
    p: &ModelParams,
    c: f64,
    tol: f64,
) -> Result<Vec<RateComparison>> {
    let spec = SpeedSpec::classify(p, c)?;
    let exps = predicted_exponents(p, &spec)?;
    let cases = [
        (End::MinusInf, Component::U, exps.lambda_minus, exps.critical_polynomial),
        (End::MinusInf, Component::V, exps.lambda_minus, exps.critical_polynomial),
        (End::PlusInf, Component::U, exps.mu_u_plus, false),
        (End::PlusInf, Component::V, exps.mu_v_plus, false),
    ];
    let mut out = Vec::with_capacity(4);
    for (end, component, predicted, poly_expected) in cases {
        let fit = select_window(profile, end, component)?;
        let relative_error = (fit.rate - predicted).abs() / predicted;
        out.push(RateComparison {
            end,
            component,
            predicted,
            fitted: fit.rate,
            relative_error,
            verdict: relative_error <= tol,
            polynomial_expected: poly_expected,
            polynomial_detected: fit.polynomial_detected,
            window: fit.window,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid;

    fn synthetic(f: impl Fn(f64) -> f64) -> WaveProfile {
        let g = Grid::with_spacing(60.0, 0.02).unwrap();
        let u: Vec<f64> = g.nodes().map(&f).collect();
        WaveProfile {
            grid: g,
            u: u.clone(),
            v: u,
        }
    }

    #[test]
    fn pure_exponential_recovered() {
        let lam = 0.2929;
        let prof = synthetic(|x| (lam * x).exp().min(1.0));
        let fit = fit_decay(&prof, End::MinusInf, Component::U, (-50.0, -20.0)).unwrap();
        assert!((fit.rate - lam).abs() / lam < 1e-10, "rate {}", fit.rate);
        assert!(!fit.polynomial_detected);
        assert!((fit.amplitude - 1.0).abs() < 1e-8);
    }

    #[test]
    fn critical_form_recovered_with_polynomial() {
        let lam = 0.7071;
        let prof = synthetic(|x| if x < -1.0 { (-x) * (lam * x).exp() } else { 0.3 });
        let fit = fit_decay(&prof, End::MinusInf, Component::U, (-50.0, -20.0)).unwrap();
        assert!(fit.polynomial_detected);
        assert!((fit.rate - lam).abs() / lam < 1e-8, "rate {}", fit.rate);
    }

    #[test]
    fn constant_profile_errors() {
        let prof = synthetic(|_| 1.0);
        assert!(fit_decay(&prof, End::PlusInf, Component::U, (30.0, 50.0)).is_err());
    }

    #[test]
    fn translation_leaves_rate() {
        let lam = 0.35;
        let a = synthetic(|x| (lam * x).exp().min(1.0));
        let b = synthetic(|x| (lam * (x + 2.0)).exp().min(1.0));
        let fa = fit_decay(&a, End::MinusInf, Component::U, (-50.0, -25.0)).unwrap();
        let fb = fit_decay(&b, End::MinusInf, Component::U, (-50.0, -25.0)).unwrap();
        assert!((fa.rate - fb.rate).abs() < 1e-9);
        // amplitudes differ by the translation factor
        assert!((fb.amplitude / fa.amplitude - (lam * 2.0).exp()).abs() < 1e-6);
    }

    #[test]
    fn window_selection_slides_for_fast_decay() {
        // rate 0.73: the default +inf window underflows into a wiggly
        // roundoff floor, so selection must slide toward the front
        let mu = 0.7320508;
        let g = Grid::with_spacing(60.0, 0.02).unwrap();
        let u: Vec<f64> = g
            .nodes()
            .map(|x| {
                let q: f64 = (-mu * x).exp();
                let floor = 1e-12 * (1.0 + 0.7 * (7.3 * x).sin());
                1.0 - (q + floor).min(1.0)
            })
            .map(|x| x.clamp(0.0, 1.0))
            .collect();
        let prof = WaveProfile {
            grid: g,
            u: u.clone(),
            v: u,
        };
        let fit = select_window(&prof, End::PlusInf, Component::U).unwrap();
        assert!(
            (fit.rate - mu).abs() / mu < 0.01,
            "rate {} window {:?}",
            fit.rate,
            fit.window
        );
        assert!(fit.window.1 < 55.0 - 1.0, "window did not slide: {:?}", fit.window);
    }
}
