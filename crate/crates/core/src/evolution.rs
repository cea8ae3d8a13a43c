//! Time integration of the regularized order-parameter equation coupled to
//! the quasi-static elastic solve.
//!
//! The order parameter obeys
//!
//! ```text
//! S_t = c nu |S_x|_k S_xx + c (T.misfit - well'(S)) (|S_x|_k - k)
//! ```
//!
//! with |q|_k = sqrt(q^2 + k^2), homogeneous Dirichlet data, and T resolved
//! from the elastic subsystem at every step. The default scheme treats the
//! diffusion implicitly with the degenerate coefficient frozen at the old
//! step (one tridiagonal solve), the reaction explicitly; an explicit mode
//! with the usual parabolic step restriction is kept for cross-checks.

use nalgebra::Vector3;

use crate::diagnostics::{DiagnosticsReport, StepRecord};
use crate::elasticity::{solve_correction, solve_elastic, Correction, ElasticSolution};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linalg::thomas_solve;
use crate::material::{smoothed_abs, MaterialParams};
use crate::tensor::{build_projection, ProjectionData};

/// Full unknown triple at one instant.
#[derive(Debug, Clone)]
pub struct State {
    pub time: f64,
    pub s: Vec<f64>,
    pub elastic: ElasticSolution,
}

impl State {
    /// Nodal values of dot(T, misfit), the only trace of the stress the
    /// scalar equation sees.
    pub fn stress_dot_misfit(&self, params: &MaterialParams) -> Vec<f64> {
        self.elastic.stress_dot(&params.misfit)
    }
}

/// Volume force as a function of time and position.
pub enum BodyForce {
    Zero,
    Constant(Vector3<f64>),
    Function(Box<dyn Fn(f64, f64) -> Vector3<f64> + Send + Sync>),
    Sampled(SampledForce),
}

/// Force samples on a uniform time grid, nodal in space; linear in time
/// between samples, clamped outside.
pub struct SampledForce {
    pub t0: f64,
    pub dt: f64,
    pub frames: Vec<Vec<Vector3<f64>>>,
}

impl BodyForce {
    pub fn is_zero(&self) -> bool {
        match self {
            BodyForce::Zero => true,
            BodyForce::Constant(v) => v.amax() == 0.0,
            _ => false,
        }
    }

    /// Nodal samples at time `t`.
    pub fn nodal(&self, t: f64, grid: &Grid1D) -> Vec<Vector3<f64>> {
        match self {
            BodyForce::Zero => vec![Vector3::zeros(); grid.len()],
            BodyForce::Constant(v) => vec![*v; grid.len()],
            BodyForce::Function(f) => grid.nodes().map(|x| f(t, x)).collect(),
            BodyForce::Sampled(s) => s.at(t, grid),
        }
    }
}

impl SampledForce {
    fn at(&self, t: f64, grid: &Grid1D) -> Vec<Vector3<f64>> {
        let last = self.frames.len() - 1;
        let raw = (t - self.t0) / self.dt;
        if raw <= 0.0 {
            return self.frames[0].clone();
        }
        if raw >= last as f64 {
            return self.frames[last].clone();
        }
        let k = raw.floor() as usize;
        let w = raw - k as f64;
        (0..grid.len())
            .map(|i| self.frames[k][i] * (1.0 - w) + self.frames[k + 1][i] * w)
            .collect()
    }
}

/// Compactly supported bump kernel of width `kappa`, unit discrete mass.
#[derive(Debug, Clone)]
pub struct Mollifier {
    kappa: f64,
}

impl Mollifier {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mollifier width must be positive, got {kappa}"
            )));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn bump(y: f64) -> f64 {
        if y.abs() < 1.0 {
            (-1.0 / (1.0 - y * y)).exp()
        } else {
            0.0
        }
    }

    /// Kernel weights on a uniform grid of the given spacing, offsets
    /// -m..=m with support strictly inside (-kappa, kappa), normalized to
    /// unit sum.
    pub fn weights(&self, spacing: f64) -> Vec<f64> {
        let m = ((self.kappa / spacing).ceil() as i64 - 1).max(0);
        let mut w: Vec<f64> = (-m..=m)
            .map(|j| Self::bump(j as f64 * spacing / self.kappa))
            .collect();
        let sum: f64 = w.iter().sum();
        for v in &mut w {
            *v /= sum;
        }
        w
    }
}

/// Discrete convolution of space-time samples with the product bump kernel;
/// samples are extended by constant continuation before convolving.
/// Outer index is time, inner is space.
pub fn mollify_samples(frames: &[Vec<f64>], dt: f64, dx: f64, kappa: f64) -> Vec<Vec<f64>> {
    let kernel = Mollifier { kappa };
    let wt = kernel.weights(dt);
    let wx = kernel.weights(dx);
    let mt = (wt.len() as i64 - 1) / 2;
    let mx = (wx.len() as i64 - 1) / 2;
    let nt = frames.len() as i64;
    let nx = frames[0].len() as i64;
    let fetch = |n: i64, i: i64| {
        let n = n.clamp(0, nt - 1) as usize;
        let i = i.clamp(0, nx - 1) as usize;
        frames[n][i]
    };
    (0..nt)
        .map(|n| {
            (0..nx)
                .map(|i| {
                    let mut acc = 0.0;
                    for (p, wp) in (-mt..=mt).zip(&wt) {
                        let mut row = 0.0;
                        for (q, wq) in (-mx..=mx).zip(&wx) {
                            row += wq * fetch(n - p, i - q);
                        }
                        acc += wp * row;
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Mollify a body force over `[0, t_end]`, returning a sampled force.
/// The time sampling reuses the kernel width (a few samples per kappa).
pub fn mollify_body(
    body: &BodyForce,
    kappa: f64,
    grid: &Grid1D,
    t_end: f64,
) -> Result<BodyForce> {
    let dt = (kappa / 4.0).min(t_end / 8.0);
    let steps = (t_end / dt).ceil() as usize + 1;
    let dt = t_end / (steps - 1) as f64;
    let raw: Vec<Vec<Vector3<f64>>> = (0..steps)
        .map(|n| body.nodal(n as f64 * dt, grid))
        .collect();
    let mut smoothed = vec![vec![Vector3::zeros(); grid.len()]; steps];
    for comp in 0..3 {
        let scalar: Vec<Vec<f64>> = raw
            .iter()
            .map(|frame| frame.iter().map(|v| v[comp]).collect())
            .collect();
        let out = mollify_samples(&scalar, dt, grid.dx(), kappa);
        for (n, frame) in out.into_iter().enumerate() {
            for (i, v) in frame.into_iter().enumerate() {
                smoothed[n][i][comp] = v;
            }
        }
    }
    Ok(BodyForce::Sampled(SampledForce {
        t0: 0.0,
        dt,
        frames: smoothed,
    }))
}

/// Infinitely flat ramp: 0 for s <= 0, 1 for s >= 1, all derivatives vanish
/// at both ends.
fn smooth_ramp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Admissible initial data: multiplies the profile by a smooth cutoff equal
/// to one outside kappa-neighborhoods of the boundary, so the data vanishes
/// together with its first and second derivatives at both endpoints.
pub fn prepare_initial(s0: &[f64], kappa: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    let n = grid.len();
    debug_assert_eq!(s0.len(), n);
    if s0[0] != 0.0 || s0[n - 1] != 0.0 {
        return Err(Error::IncompatibleData(format!(
            "initial data must vanish at the boundary, got S({}) = {}, S({}) = {}",
            grid.a(),
            s0[0],
            grid.d(),
            s0[n - 1]
        )));
    }
    Ok(grid
        .nodes()
        .zip(s0)
        .map(|(x, &v)| {
            v * smooth_ramp((x - grid.a()) / kappa) * smooth_ramp((grid.d() - x) / kappa)
        })
        .collect())
}

/// Right-hand side of the regularized equation at the nodes: central first
/// difference in the degenerate factor, standard second difference in the
/// diffusion, zero at the Dirichlet boundary.
pub fn rhs_regularized(
    s: &[f64],
    t_dot_misfit: &[f64],
    params: &MaterialParams,
    grid: &Grid1D,
) -> Vec<f64> {
    let n = grid.len();
    let dx = grid.dx();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let q = (s[i + 1] - s[i - 1]) / (2.0 * dx);
        let r = (s[i - 1] - 2.0 * s[i] + s[i + 1]) / (dx * dx);
        let qk = smoothed_abs(q, params.kappa);
        out[i] = params.mobility * params.gradient_coeff * qk * r
            + params.mobility
                * (t_dot_misfit[i] - params.well.derivative(s[i]))
                * (qk - params.kappa);
    }
    out
}

/// Time-stepping scheme for the parabolic stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepScheme {
    /// Forward Euler on the full right-hand side; subject to the parabolic
    /// step restriction.
    Explicit,
    /// Diffusion implicit with the degenerate coefficient frozen at the old
    /// step, reaction explicit; unconditionally stable tridiagonal solve.
    SemiImplicit,
}

/// Monotonized slope for the reaction factor: the central slope limited
/// against twice the one-sided slopes, zero at discrete extrema.
///
/// On smooth monotone stretches this equals the central slope, so the
/// second-order consistency of the stage is untouched; at extrema the
/// reaction shuts off exactly, which together with the M-matrix diffusion
/// makes the comparison bounds of the step literal (for steps up to
/// dx / (2 c max|driving|)) instead of holding only up to an O(dx) leak.
fn limited_slope(left: f64, center: f64, right: f64, dx: f64) -> f64 {
    let fwd = (right - center) / dx;
    let bwd = (center - left) / dx;
    if fwd * bwd <= 0.0 {
        return 0.0;
    }
    let central = 0.5 * (fwd + bwd);
    let bound = (2.0 * fwd.abs()).min(2.0 * bwd.abs());
    central.signum() * central.abs().min(bound)
}

/// Largest explicit step admitted by the diffusion term for this state.
pub fn explicit_step_limit(s: &[f64], params: &MaterialParams, grid: &Grid1D) -> f64 {
    let dx = grid.dx();
    let n = grid.len();
    let mut max_qk = params.kappa;
    for i in 1..n - 1 {
        let q = (s[i + 1] - s[i - 1]) / (2.0 * dx);
        max_qk = max_qk.max(smoothed_abs(q, params.kappa));
    }
    dx * dx / (2.0 * params.mobility * params.gradient_coeff * max_qk)
}

/// One parabolic stage with the stress trace regarded as given data; this is
/// the building block both of the production step and of the inner
/// fixed-point iteration.
///
/// The reaction factor uses the monotonized slope (see [`rhs_regularized`]
/// for the plain central-difference evaluation of the same right-hand
/// side); the diffusion coefficient keeps the central slope.
///
/// `forcing`, when present, is added to the right-hand side nodewise
/// (manufactured-solution hook).
pub fn parabolic_step(
    s: &[f64],
    t_dot_misfit: &[f64],
    dt: f64,
    params: &MaterialParams,
    grid: &Grid1D,
    scheme: StepScheme,
    forcing: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = grid.len();
    let dx = grid.dx();
    let reaction_at = |i: usize| -> f64 {
        let q = limited_slope(s[i - 1], s[i], s[i + 1], dx);
        params.mobility
            * (t_dot_misfit[i] - params.well.derivative(s[i]))
            * (smoothed_abs(q, params.kappa) - params.kappa)
    };
    match scheme {
        StepScheme::Explicit => {
            let limit = explicit_step_limit(s, params, grid);
            if dt > limit {
                return Err(Error::CflViolation { dt, limit });
            }
            let mut out = vec![0.0; n];
            for i in 1..n - 1 {
                let q = (s[i + 1] - s[i - 1]) / (2.0 * dx);
                let r = (s[i - 1] - 2.0 * s[i] + s[i + 1]) / (dx * dx);
                let diffusion = params.mobility
                    * params.gradient_coeff
                    * smoothed_abs(q, params.kappa)
                    * r;
                let f = forcing.map_or(0.0, |f| f[i]);
                out[i] = s[i] + dt * (diffusion + reaction_at(i) + f);
            }
            Ok(out)
        }
        StepScheme::SemiImplicit => {
            let dx2 = dx * dx;
            let m = n - 2;
            let mut lower = vec![0.0; m];
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for (k, i) in (1..n - 1).enumerate() {
                let q = (s[i + 1] - s[i - 1]) / (2.0 * dx);
                let qk = smoothed_abs(q, params.kappa);
                let gamma = dt * params.mobility * params.gradient_coeff * qk / dx2;
                lower[k] = -gamma;
                upper[k] = -gamma;
                diag[k] = 1.0 + 2.0 * gamma;
                let f = forcing.map_or(0.0, |f| f[i]);
                rhs[k] = s[i] + dt * (reaction_at(i) + f);
            }
            let interior = thomas_solve(&lower, &diag, &upper, &rhs)?;
            let mut out = vec![0.0; n];
            out[1..n - 1].copy_from_slice(&interior);
            Ok(out)
        }
    }
}

/// Elastic subsystem bound to a body force: projection data plus the force,
/// with the correction problem solved on demand.
pub struct Coupling<'a> {
    pub proj: ProjectionData,
    pub body: &'a BodyForce,
}

impl<'a> Coupling<'a> {
    pub fn new(params: &MaterialParams, body: &'a BodyForce) -> Result<Self> {
        Ok(Self {
            proj: build_projection(&params.elasticity, &params.misfit)?,
            body,
        })
    }

    fn correction_at(
        &self,
        t: f64,
        params: &MaterialParams,
        grid: &Grid1D,
    ) -> Result<Correction> {
        if self.body.is_zero() {
            Ok(Correction::zeros(grid.len()))
        } else {
            let b = self.body.nodal(t, grid);
            solve_correction(&b, grid, &self.proj, params)
        }
    }

    /// Elastic solution for the given order parameter at time `t`.
    pub fn elastic_solution(
        &self,
        s: &[f64],
        t: f64,
        params: &MaterialParams,
        grid: &Grid1D,
    ) -> Result<ElasticSolution> {
        let correction = self.correction_at(t, params, grid)?;
        Ok(solve_elastic(s, &correction, &self.proj, params, grid))
    }

    /// Homotopy-scaled elastic solution: order parameter and body force both
    /// scaled by `lambda`. The subsystem is linear, so this is a plain
    /// rescale of the unscaled solution.
    pub fn elastic_solution_scaled(
        &self,
        s: &[f64],
        t: f64,
        lambda: f64,
        params: &MaterialParams,
        grid: &Grid1D,
    ) -> Result<ElasticSolution> {
        let sol = self.elastic_solution(s, t, params, grid)?;
        Ok(ElasticSolution {
            displacement: sol.displacement.iter().map(|u| u * lambda).collect(),
            stress: sol.stress.iter().map(|t| t.scale(lambda)).collect(),
        })
    }

    /// State at time `t0` with the elastic fields resolved from `s`.
    pub fn initial_state(
        &self,
        s: Vec<f64>,
        t0: f64,
        params: &MaterialParams,
        grid: &Grid1D,
    ) -> Result<State> {
        let elastic = self.elastic_solution(&s, t0, params, grid)?;
        Ok(State {
            time: t0,
            s,
            elastic,
        })
    }
}

/// Advance one step: parabolic stage with the stress frozen at the old
/// state, then re-solve the elastic subsystem from the updated order
/// parameter.
pub fn step(
    state: &State,
    dt: f64,
    coupling: &Coupling,
    params: &MaterialParams,
    grid: &Grid1D,
    scheme: StepScheme,
) -> Result<State> {
    let t_dot = state.stress_dot_misfit(params);
    let s = parabolic_step(&state.s, &t_dot, dt, params, grid, scheme, None)?;
    let time = state.time + dt;
    let elastic = coupling.elastic_solution(&s, time, params, grid)?;
    Ok(State { time, s, elastic })
}

/// Inner fixed-point iteration for one step: alternate elastic solves and
/// semi-implicit parabolic stages until successive iterates agree in the
/// sup norm. `lambda` scales the order-parameter/body-force coupling of the
/// elastic stage (1 in production; smaller values are a continuation
/// fallback for stiff starts).
pub fn fixed_point_step(
    state: &State,
    dt: f64,
    tolerance: f64,
    coupling: &Coupling,
    params: &MaterialParams,
    grid: &Grid1D,
    lambda: f64,
) -> Result<(State, usize)> {
    const MAX_ITERATIONS: usize = 50;
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fixed-point tolerance must be positive, got {tolerance}"
        )));
    }
    let time = state.time + dt;
    let mut iterate = state.s.clone();
    let mut residual = f64::INFINITY;
    for m in 1..=MAX_ITERATIONS {
        let elastic = coupling.elastic_solution_scaled(&iterate, time, lambda, params, grid)?;
        let t_dot = elastic.stress_dot(&params.misfit);
        let next = parabolic_step(
            &state.s,
            &t_dot,
            dt,
            params,
            grid,
            StepScheme::SemiImplicit,
            None,
        )?;
        residual = next
            .iter()
            .zip(&iterate)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        iterate = next;
        if residual < tolerance {
            let elastic =
                coupling.elastic_solution_scaled(&iterate, time, lambda, params, grid)?;
            return Ok((
                State {
                    time,
                    s: iterate,
                    elastic,
                },
                m,
            ));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Fixed or adaptive step selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// Step recomputed every step from the current diffusion coefficient
    /// (explicit-mode stability limit times the safety factor).
    Adaptive,
}

/// Runner configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub cfl_safety: f64,
    pub time_step: TimeStep,
    pub scheme: StepScheme,
    pub output_stride: usize,
    /// Inner fixed-point iteration tolerance; `None` runs the plain step.
    pub fixed_point: Option<f64>,
    pub mollify_body: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "safety factor must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidParameter(
                "output stride must be at least 1".into(),
            ));
        }
        if let TimeStep::Fixed(dt) = self.time_step {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "time step must be positive, got {dt}"
                )));
            }
        }
        if let Some(tol) = self.fixed_point {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "fixed-point tolerance must be positive, got {tol}"
                )));
            }
        }
        Ok(())
    }
}

/// Recorded frames of a run: order parameter and stress trace per frame.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<Vec<f64>>,
    pub stress_dot_frames: Vec<Vec<f64>>,
}

impl Trajectory {
    fn push(&mut self, state: &State, params: &MaterialParams) {
        self.times.push(state.time);
        self.frames.push(state.s.clone());
        self.stress_dot_frames.push(state.stress_dot_misfit(params));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Streaming observer; persistence hangs off this so the runner stays
/// storage-agnostic.
pub trait RunSink {
    fn on_frame(&mut self, _frame_index: usize, _state: &State) {}
    fn on_step(&mut self, _record: &StepRecord) {}
}

/// Sink that ignores everything.
pub struct NullSink;

impl RunSink for NullSink {}

/// Result of a completed run.
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub report: DiagnosticsReport,
    pub final_state: State,
}

/// Advance the coupled system to the final time, recording frames every
/// output stride and diagnostics every step.
pub fn run(
    s0: &[f64],
    body: &BodyForce,
    params: &MaterialParams,
    grid: &Grid1D,
    config: &RunConfig,
    sink: &mut dyn RunSink,
) -> Result<RunOutput> {
    config.validate()?;
    let mollified;
    let body = if config.mollify_body {
        mollified = mollify_body(body, params.kappa, grid, config.t_end)?;
        &mollified
    } else {
        body
    };
    let coupling = Coupling::new(params, body)?;

    let s = prepare_initial(s0, params.kappa, grid)?;
    let mut state = coupling.initial_state(s, 0.0, params, grid)?;

    let mut report = DiagnosticsReport::new(&state, params, grid);
    let mut trajectory = Trajectory::default();
    trajectory.push(&state, params);
    sink.on_frame(0, &state);

    let mut step_index = 0usize;
    while state.time < config.t_end - 1e-14 * config.t_end {
        let dt_raw = match config.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Adaptive => {
                config.cfl_safety * explicit_step_limit(&state.s, params, grid)
            }
        };
        let dt = dt_raw.min(config.t_end - state.time);
        let next = match config.fixed_point {
            Some(tol) => fixed_point_step(&state, dt, tol, &coupling, params, grid, 1.0)?.0,
            None => step(&state, dt, &coupling, params, grid, config.scheme)?,
        };
        step_index += 1;

        let b_nodes = coupling.body.nodal(next.time, grid);
        let record = report.record_step(step_index, &state, &next, dt, &b_nodes, params, grid)?;
        sink.on_step(&record);

        state = next;
        if step_index % config.output_stride == 0
            || state.time >= config.t_end - 1e-14 * config.t_end
        {
            trajectory.push(&state, params);
            sink.on_frame(trajectory.len() - 1, &state);
        }
    }

    Ok(RunOutput {
        trajectory,
        report,
        final_state: state,
    })
}
