//! Numerical integration of network dynamics and trajectory diagnostics.
//!
//! The default integrator is an embedded Dormand–Prince 5(4) pair with
//! standard step control; any accepted step must keep every component
//! strictly positive, otherwise the step is rejected and halved (down to a
//! minimum fraction of the horizon). A fixed-step classical RK4 mode gives
//! byte-reproducible trajectories for regression tests. Dense output onto
//! a sampling grid uses cubic Hermite interpolation of the accepted steps.

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::equilibria::lyapunov_value;
use crate::kinetics::Concentrations;
use crate::linalg;
use crate::network::ReactionNetwork;
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error(
        "step size underflowed at t = {t:.6e} (positivity or accuracy could not \
         be maintained); state min {state_min:.6e}"
    )]
    MinStepUnderflow { t: f64, state_min: f64 },
    #[error("derivative became non-finite at t = {t:.6e}")]
    NonFiniteDerivative { t: f64 },
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("trajectory grids do not overlap")]
    GridsDoNotOverlap,
    #[error("species `{0}` missing from trajectory")]
    UnknownSpecies(String),
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Integration method selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Embedded Dormand–Prince 5(4), adaptive step.
    DormandPrince45 { rtol: f64, atol: f64 },
    /// Classical RK4 with a fixed step (last step shortened to land on
    /// `t_end` exactly).
    FixedRk4 { step: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::DormandPrince45 {
            rtol: tol::DEFAULT_RTOL,
            atol: tol::DEFAULT_ATOL,
        }
    }
}

/// Which time points the returned trajectory holds.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// Every accepted step.
    Steps,
    /// `n` uniform points on `[0, t_end]` (n ≥ 2).
    Uniform(usize),
    /// An explicit increasing grid within `[0, t_end]`.
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub method: Method,
    pub sampling: Sampling,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            method: Method::default(),
            sampling: Sampling::Steps,
        }
    }
}

/// Step-count bookkeeping of one integration.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub field_evaluations: usize,
    pub smallest_step: f64,
}

/// A simulated (or loaded) trajectory with species labels and metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub species: Vec<String>,
    pub method: String,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub fixed_step: Option<f64>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn terminal(&self) -> &DVector<f64> {
        self.states.last().expect("non-empty trajectory")
    }

    pub fn species_column(&self, name: &str) -> Result<Vec<f64>, SimulationError> {
        let idx = self
            .species
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| SimulationError::UnknownSpecies(name.to_string()))?;
        Ok(self.states.iter().map(|x| x[idx]).collect())
    }
}

/// Integrate `ẋ = field(x)` from a positive initial state to `t_end`.
///
/// `species` labels the state components in the returned trajectory.
pub fn integrate<F>(
    field: F,
    x0: &Concentrations,
    t_end: f64,
    species: &[String],
    options: &IntegrateOptions,
) -> Result<Trajectory, SimulationError>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(SimulationError::BadInput(format!(
            "t_end must be positive and finite, got {t_end}"
        )));
    }
    if species.len() != x0.len() {
        return Err(SimulationError::BadInput(format!(
            "{} species labels for a state of dimension {}",
            species.len(),
            x0.len()
        )));
    }
    let grid = match &options.sampling {
        Sampling::Steps => None,
        Sampling::Uniform(n) => {
            if *n < 2 {
                return Err(SimulationError::BadInput(
                    "uniform sampling needs at least 2 points".into(),
                ));
            }
            Some(uniform_grid(t_end, *n))
        }
        Sampling::Grid(g) => {
            let ok = !g.is_empty()
                && g.windows(2).all(|w| w[1] > w[0])
                && g[0] >= 0.0
                && *g.last().unwrap() <= t_end * (1.0 + 1e-12);
            if !ok {
                return Err(SimulationError::BadInput(
                    "sampling grid must be increasing within [0, t_end]".into(),
                ));
            }
            Some(g.clone())
        }
    };

    let run = match options.method {
        Method::DormandPrince45 { rtol, atol } => {
            dormand_prince(&field, x0.as_vector(), t_end, rtol, atol)?
        }
        Method::FixedRk4 { step } => fixed_rk4(&field, x0.as_vector(), t_end, step)?,
    };

    let (times, states) = match &grid {
        None => (run.times.clone(), run.states.clone()),
        Some(g) => (g.clone(), hermite_sample(&run, g)),
    };

    let (method, rtol, atol, fixed_step) = match options.method {
        Method::DormandPrince45 { rtol, atol } => {
            ("dormand-prince-5(4)".to_string(), Some(rtol), Some(atol), None)
        }
        Method::FixedRk4 { step } => ("rk4-fixed".to_string(), None, None, Some(step)),
    };

    Ok(Trajectory {
        times,
        states,
        species: species.to_vec(),
        method,
        rtol,
        atol,
        fixed_step,
        stats: run.stats,
    })
}

fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| t_end * i as f64 / (n - 1) as f64)
        .collect()
}

struct RawRun {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    derivs: Vec<DVector<f64>>,
    stats: StepStats,
}

fn check_finite(v: &DVector<f64>, t: f64) -> Result<(), SimulationError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(SimulationError::NonFiniteDerivative { t })
    }
}

/// Dormand–Prince 5(4) with error-controlled steps and positivity
/// rejection. The FSAL stage is reused as the first stage of the next step.
fn dormand_prince<F>(
    field: &F,
    x0: &DVector<f64>,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<RawRun, SimulationError>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    // 5th-order weights (also the last stage row: FSAL)
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // embedded 4th-order weights
    const E1: f64 = 5179.0 / 57600.0;
    const E3: f64 = 7571.0 / 16695.0;
    const E4: f64 = 393.0 / 640.0;
    const E5: f64 = -92097.0 / 339200.0;
    const E6: f64 = 187.0 / 2100.0;
    const E7: f64 = 1.0 / 40.0;

    let min_step = tol::MIN_STEP_FRACTION * t_end;
    let mut stats = StepStats {
        smallest_step: f64::INFINITY,
        ..Default::default()
    };

    let mut t = 0.0_f64;
    let mut y = x0.clone();
    let mut k1 = field(&y);
    stats.field_evaluations += 1;
    check_finite(&k1, t)?;

    // conservative initial step from the first derivative scale
    let scale0 = atol + rtol * linalg::vec_inf_norm(&y);
    let d0 = linalg::vec_inf_norm(&k1);
    let mut h = if d0 > 0.0 {
        (0.01 * scale0 / d0).min(t_end / 10.0)
    } else {
        t_end / 10.0
    }
    .max(min_step);

    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let mut derivs = vec![k1.clone()];

    while t < t_end {
        if h < min_step {
            return Err(SimulationError::MinStepUnderflow {
                t,
                state_min: y.iter().cloned().fold(f64::INFINITY, f64::min),
            });
        }
        let h_step = h.min(t_end - t);

        let k2 = field(&(&y + &k1 * (A21 * h_step)));
        let k3 = field(&(&y + &k1 * (A31 * h_step) + &k2 * (A32 * h_step)));
        let k4 = field(&(&y + &k1 * (A41 * h_step) + &k2 * (A42 * h_step) + &k3 * (A43 * h_step)));
        let k5 = field(
            &(&y + &k1 * (A51 * h_step)
                + &k2 * (A52 * h_step)
                + &k3 * (A53 * h_step)
                + &k4 * (A54 * h_step)),
        );
        let k6 = field(
            &(&y + &k1 * (A61 * h_step)
                + &k2 * (A62 * h_step)
                + &k3 * (A63 * h_step)
                + &k4 * (A64 * h_step)
                + &k5 * (A65 * h_step)),
        );
        let y_new = &y
            + (&k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * h_step;
        let k7 = field(&y_new);
        stats.field_evaluations += 6;
        for k in [&k2, &k3, &k4, &k5, &k6, &k7] {
            check_finite(k, t)?;
        }

        // positivity: reject the whole trial step
        if y_new.iter().any(|&v| v <= 0.0) {
            stats.rejected += 1;
            h = h_step * 0.5;
            continue;
        }

        let y_low = &y
            + (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h_step;
        let mut err = 0.0_f64;
        for i in 0..y.len() {
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            let e = (y_new[i] - y_low[i]) / sc;
            err += e * e;
        }
        err = (err / y.len() as f64).sqrt();

        if err <= 1.0 {
            t += h_step;
            y = y_new;
            k1 = k7; // FSAL
            stats.accepted += 1;
            stats.smallest_step = stats.smallest_step.min(h_step);
            times.push(t);
            states.push(y.clone());
            derivs.push(k1.clone());
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = h_step * factor;
        } else {
            stats.rejected += 1;
            h = h_step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    Ok(RawRun {
        times,
        states,
        derivs,
        stats,
    })
}

/// Classical fixed-step RK4; positivity violations abort (no adaptivity to
/// fall back on).
fn fixed_rk4<F>(
    field: &F,
    x0: &DVector<f64>,
    t_end: f64,
    step: f64,
) -> Result<RawRun, SimulationError>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(SimulationError::BadInput(format!(
            "fixed step must be positive, got {step}"
        )));
    }
    let mut stats = StepStats {
        smallest_step: step,
        ..Default::default()
    };
    let mut t = 0.0_f64;
    let mut y = x0.clone();
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let mut derivs = vec![field(&y)];
    stats.field_evaluations += 1;

    while t < t_end {
        let h = step.min(t_end - t);
        let k1 = field(&y);
        let k2 = field(&(&y + &k1 * (0.5 * h)));
        let k3 = field(&(&y + &k2 * (0.5 * h)));
        let k4 = field(&(&y + &k3 * h));
        stats.field_evaluations += 4;
        for k in [&k1, &k2, &k3, &k4] {
            check_finite(k, t)?;
        }
        y += (k1 + k2 * 2.0 + k3 * 2.0 + &k4) * (h / 6.0);
        t += h;
        if y.iter().any(|&v| v <= 0.0) {
            return Err(SimulationError::MinStepUnderflow {
                t,
                state_min: y.iter().cloned().fold(f64::INFINITY, f64::min),
            });
        }
        stats.accepted += 1;
        times.push(t);
        states.push(y.clone());
        derivs.push(k4);
    }
    // store true derivatives at stored points for interpolation
    if let Some(last) = derivs.last_mut() {
        *last = field(states.last().unwrap());
        stats.field_evaluations += 1;
    }

    Ok(RawRun {
        times,
        states,
        derivs,
        stats,
    })
}

/// Cubic Hermite interpolation of the accepted steps onto a grid.
fn hermite_sample(run: &RawRun, grid: &[f64]) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(grid.len());
    let times = &run.times;
    let mut seg = 0;
    for &t in grid {
        while seg + 2 < times.len() && times[seg + 1] < t {
            seg += 1;
        }
        let (t0, t1) = (times[seg], times[seg + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (y0, y1) = (&run.states[seg], &run.states[seg + 1]);
        let (f0, f1) = (&run.derivs[seg], &run.derivs[seg + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        out.push(y0 * h00 + f0 * (h10 * h) + y1 * h01 + f1 * (h11 * h));
    }
    out
}

/// Local 4-point cubic (Lagrange) interpolation for trajectories with no
/// stored derivatives (e.g. loaded from CSV). Falls back to the available
/// stencil near the ends.
fn lagrange_sample(times: &[f64], states: &[DVector<f64>], grid: &[f64]) -> Vec<DVector<f64>> {
    let n = times.len();
    let dim = states[0].len();
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut hi = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i,
        };
        hi = hi.clamp(1, n - 1);
        let lo = hi - 1;
        // 4-point window centered on [lo, hi]
        let start = lo.saturating_sub(1).min(n.saturating_sub(4));
        let stop = (start + 4).min(n);
        let idx: Vec<usize> = (start..stop).collect();
        let mut acc = DVector::<f64>::zeros(dim);
        for &i in &idx {
            let mut w = 1.0;
            for &j in &idx {
                if i != j {
                    w *= (t - times[j]) / (times[i] - times[j]);
                }
            }
            acc += &states[i] * w;
        }
        out.push(acc);
    }
    out
}

/// Invariant diagnostics along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct MonitorReport {
    /// Largest increase of G between consecutive samples (0 when
    /// monotonically non-increasing).
    pub max_lyapunov_increase: f64,
    pub lyapunov_initial: f64,
    pub lyapunov_final: f64,
    /// Largest relative drift of any conserved moiety.
    pub max_moiety_drift: f64,
    /// Smallest concentration over the whole trajectory.
    pub min_concentration: f64,
}

/// Evaluate positivity, moiety conservation, and Lyapunov descent along a
/// trajectory of `net` anchored at `x_star`.
pub fn monitor(
    traj: &Trajectory,
    net: &ReactionNetwork,
    x_star: &Concentrations,
    moieties: &[DVector<f64>],
) -> Result<MonitorReport, SimulationError> {
    let m = net.species_count();
    if traj.states.is_empty() || traj.states[0].len() != m {
        return Err(SimulationError::BadInput(
            "trajectory does not match the network".into(),
        ));
    }
    let g: Vec<f64> = traj
        .states
        .iter()
        .map(|x| {
            Concentrations::new(x.clone())
                .map(|c| lyapunov_value(&c, x_star))
                .map_err(|_| SimulationError::BadInput("trajectory leaves the positive orthant".into()))
        })
        .collect::<Result<_, _>>()?;
    let max_lyapunov_increase = g
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0_f64, f64::max);

    let mut max_moiety_drift = 0.0_f64;
    for k in moieties {
        let initial = k.dot(&traj.states[0]);
        let denom = initial.abs().max(f64::MIN_POSITIVE);
        for x in &traj.states {
            max_moiety_drift = max_moiety_drift.max((k.dot(x) - initial).abs() / denom);
        }
    }
    let min_concentration = traj
        .states
        .iter()
        .flat_map(|x| x.iter().cloned())
        .fold(f64::INFINITY, f64::min);

    Ok(MonitorReport {
        max_lyapunov_increase,
        lyapunov_initial: g[0],
        lyapunov_final: *g.last().unwrap(),
        max_moiety_drift,
        min_concentration,
    })
}

/// Per-species discrepancy between two trajectories on a common grid.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub species: Vec<String>,
    /// sup-norm discrepancy over the common grid, per species.
    pub sup_discrepancy: Vec<f64>,
    /// |a − b| at the last common grid point, per species.
    pub terminal_gap: Vec<f64>,
    /// Relative moiety drift of each trajectory (when moieties are given).
    pub moiety_drift_a: Option<f64>,
    pub moiety_drift_b: Option<f64>,
    pub grid_points: usize,
}

/// Compare two trajectories on the named species.
///
/// Identical grids are used as-is; otherwise both trajectories are
/// interpolated (local cubic) onto 201 uniform points of the overlapping
/// time range.
pub fn compare(
    a: &Trajectory,
    b: &Trajectory,
    species: &[String],
    moieties_a: Option<&[DVector<f64>]>,
    moieties_b: Option<&[DVector<f64>]>,
) -> Result<ComparisonReport, SimulationError> {
    if a.times.is_empty() || b.times.is_empty() {
        return Err(SimulationError::BadInput("empty trajectory".into()));
    }
    let same_grid = a.times.len() == b.times.len()
        && a.times
            .iter()
            .zip(&b.times)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()));

    let (grid, cols_a, cols_b) = if same_grid {
        (a.times.clone(), a.states.clone(), b.states.clone())
    } else {
        let t0 = a.times[0].max(b.times[0]);
        let t1 = a.times.last().unwrap().min(*b.times.last().unwrap());
        if t1 <= t0 {
            return Err(SimulationError::GridsDoNotOverlap);
        }
        let grid: Vec<f64> = (0..201)
            .map(|i| t0 + (t1 - t0) * i as f64 / 200.0)
            .collect();
        let ca = lagrange_sample(&a.times, &a.states, &grid);
        let cb = lagrange_sample(&b.times, &b.states, &grid);
        (grid, ca, cb)
    };

    let mut sup = Vec::with_capacity(species.len());
    let mut terminal = Vec::with_capacity(species.len());
    for name in species {
        let ia = a
            .species
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| SimulationError::UnknownSpecies(name.clone()))?;
        let ib = b
            .species
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| SimulationError::UnknownSpecies(name.clone()))?;
        let mut worst = 0.0_f64;
        for (xa, xb) in cols_a.iter().zip(&cols_b) {
            worst = worst.max((xa[ia] - xb[ib]).abs());
        }
        sup.push(worst);
        terminal.push((cols_a.last().unwrap()[ia] - cols_b.last().unwrap()[ib]).abs());
    }

    let drift = |states: &[DVector<f64>], moieties: Option<&[DVector<f64>]>| {
        moieties.map(|ks| {
            let mut worst = 0.0_f64;
            for k in ks {
                let initial = k.dot(&states[0]);
                let denom = initial.abs().max(f64::MIN_POSITIVE);
                for x in states {
                    worst = worst.max((k.dot(x) - initial).abs() / denom);
                }
            }
            worst
        })
    };
    let moiety_drift_a = drift(&a.states, moieties_a);
    let moiety_drift_b = drift(&b.states, moieties_b);

    Ok(ComparisonReport {
        species: species.to_vec(),
        sup_discrepancy: sup,
        terminal_gap: terminal,
        moiety_drift_a,
        moiety_drift_b,
        grid_points: grid.len(),
    })
}

/// Serialize a trajectory as CSV: header `t,<species...>`, one row per
/// sample, 17 significant digits.
pub fn write_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    out.push('t');
    for name in &traj.species {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, x) in traj.times.iter().zip(&traj.states) {
        out.push_str(&format!("{t:.16e}"));
        for v in x.iter() {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// Load a trajectory from CSV text produced by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Trajectory, SimulationError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(SimulationError::Csv {
        line: 1,
        message: "empty file".into(),
    })?;
    let mut fields = header.split(',');
    if fields.next() != Some("t") {
        return Err(SimulationError::Csv {
            line: 1,
            message: "header must start with `t`".into(),
        });
    }
    let species: Vec<String> = fields.map(|s| s.trim().to_string()).collect();
    if species.is_empty() {
        return Err(SimulationError::Csv {
            line: 1,
            message: "no species columns".into(),
        });
    }

    let mut times = Vec::new();
    let mut states = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        if row.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = row
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| SimulationError::Csv {
                    line,
                    message: format!("invalid number `{v}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        if values.len() != species.len() + 1 {
            return Err(SimulationError::Csv {
                line,
                message: format!(
                    "expected {} columns, found {}",
                    species.len() + 1,
                    values.len()
                ),
            });
        }
        times.push(values[0]);
        states.push(DVector::from_row_slice(&values[1..]));
    }
    if times.is_empty() {
        return Err(SimulationError::Csv {
            line: 2,
            message: "no data rows".into(),
        });
    }
    if !times.windows(2).all(|w| w[1] > w[0]) {
        return Err(SimulationError::Csv {
            line: 2,
            message: "times must be strictly increasing".into(),
        });
    }

    Ok(Trajectory {
        times,
        states,
        species,
        method: "csv".into(),
        rtol: None,
        atol: None,
        fixed_step: None,
        stats: StepStats::default(),
    })
}
