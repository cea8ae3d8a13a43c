//! Executable analogues of the model's structural properties: energy and
//! maximum-principle monitors, the dissipation check, a sampled verifier of
//! the viscosity-solution inequalities, and Holder-seminorm bounds.

use nalgebra::Vector3;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::elasticity::vector_derivative;
use crate::error::{Error, Result};
use crate::evolution::{State, Trajectory};
use crate::grid::Grid1D;
use crate::material::{
    free_energy_density, hamiltonian_sharp, psi_s, smoothed_abs, MaterialParams,
};
use crate::tensor::strain_of_gradient;

/// Per-step monitored quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Time after the step.
    pub time: f64,
    pub sup_s: f64,
    /// Discrete L2 norm squared of the gradient of S.
    pub grad_norm_sq: f64,
    /// Running sum of dt * sum_i |dS|_k (d2S)^2 dx, the degenerate
    /// dissipation functional of the gradient estimate.
    pub cumulative_degenerate_dissipation: f64,
    pub energy: f64,
    /// (E(next) - E(prev)) / dt - work input.
    pub dissipation_residual: f64,
    /// Integral of b . u_t over the domain for this step.
    pub work_input: f64,
}

/// Monitored time series plus run-level summary bounds.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub records: Vec<StepRecord>,
    /// Comparison bounds from the initial data: (min(0, min S0), max(0, max S0)).
    pub initial_lower: f64,
    pub initial_upper: f64,
    /// Worst violation of the initial-data bounds over every step (<= 0 when
    /// the maximum principle held exactly).
    pub max_principle_excess: f64,
    /// Largest single-step energy increase observed.
    pub max_energy_step_increase: f64,
    /// Run-level sup of |S| and of the squared gradient norm.
    pub sup_s: f64,
    pub sup_grad_norm_sq: f64,
    pub initial_energy: f64,
    pub viscosity: Option<ViscositySummary>,
    cumulative_dissipation: f64,
}

impl DiagnosticsReport {
    pub fn new(initial: &State, params: &MaterialParams, grid: &Grid1D) -> Self {
        let min0 = initial.s.iter().cloned().fold(0.0f64, f64::min);
        let max0 = initial.s.iter().cloned().fold(0.0f64, f64::max);
        let energy = total_free_energy(initial, params, grid);
        let sup_s = initial.s.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        Self {
            records: Vec::new(),
            initial_lower: min0.min(0.0),
            initial_upper: max0.max(0.0),
            max_principle_excess: f64::NEG_INFINITY,
            max_energy_step_increase: f64::NEG_INFINITY,
            sup_s,
            sup_grad_norm_sq: grad_norm_sq(&initial.s, grid),
            initial_energy: energy,
            viscosity: None,
            cumulative_dissipation: 0.0,
        }
    }

    /// Record one completed step; rejects non-finite values.
    #[allow(clippy::too_many_arguments)]
    pub fn record_step(
        &mut self,
        step: usize,
        prev: &State,
        next: &State,
        dt: f64,
        b: &[Vector3<f64>],
        params: &MaterialParams,
        grid: &Grid1D,
    ) -> Result<StepRecord> {
        let energy_prev = if let Some(last) = self.records.last() {
            last.energy
        } else {
            self.initial_energy
        };
        let energy = total_free_energy(next, params, grid);
        let work = work_input(prev, next, dt, b, grid);
        let residual = (energy - energy_prev) / dt - work;

        let sup_s = next.s.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let gns = grad_norm_sq(&next.s, grid);
        self.cumulative_dissipation += dt * degenerate_dissipation(&next.s, params, grid);

        let record = StepRecord {
            step,
            time: next.time,
            sup_s,
            grad_norm_sq: gns,
            cumulative_degenerate_dissipation: self.cumulative_dissipation,
            energy,
            dissipation_residual: residual,
            work_input: work,
        };
        for (value, context) in [
            (record.sup_s, "sup |S|"),
            (record.grad_norm_sq, "gradient norm"),
            (record.energy, "free energy"),
            (record.dissipation_residual, "dissipation residual"),
            (record.work_input, "work input"),
        ] {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    context,
                    t: next.time,
                });
            }
        }

        let excess = next
            .s
            .iter()
            .map(|&v| (v - self.initial_upper).max(self.initial_lower - v))
            .fold(f64::NEG_INFINITY, f64::max);
        self.max_principle_excess = self.max_principle_excess.max(excess);
        self.max_energy_step_increase = self.max_energy_step_increase.max(energy - energy_prev);
        self.sup_s = self.sup_s.max(sup_s);
        self.sup_grad_norm_sq = self.sup_grad_norm_sq.max(gns);

        self.records.push(record.clone());
        Ok(record)
    }

    /// CSV serialization: header, one row per step with 17-significant-digit
    /// decimals, then a commented summary block.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "step,t,sup_s,grad_norm_sq,cumulative_degenerate_dissipation,energy,dissipation_residual,work_input\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.step,
                r.time,
                r.sup_s,
                r.grad_norm_sq,
                r.cumulative_degenerate_dissipation,
                r.energy,
                r.dissipation_residual,
                r.work_input
            ));
        }
        out.push_str("# summary\n");
        out.push_str(&format!("# initial_lower = {:.16e}\n", self.initial_lower));
        out.push_str(&format!("# initial_upper = {:.16e}\n", self.initial_upper));
        out.push_str(&format!(
            "# max_principle_excess = {:.16e}\n",
            self.max_principle_excess
        ));
        out.push_str(&format!(
            "# max_energy_step_increase = {:.16e}\n",
            self.max_energy_step_increase
        ));
        out.push_str(&format!("# sup_s = {:.16e}\n", self.sup_s));
        out.push_str(&format!(
            "# sup_grad_norm_sq = {:.16e}\n",
            self.sup_grad_norm_sq
        ));
        out.push_str(&format!(
            "# initial_energy = {:.16e}\n",
            self.initial_energy
        ));
        if let Some(v) = &self.viscosity {
            out.push_str(&format!("# viscosity_touchings = {}\n", v.touchings));
            out.push_str(&format!(
                "# viscosity_max_violation = {:.16e}\n",
                v.max_violation
            ));
            out.push_str(&format!("# viscosity_tolerance = {:.16e}\n", v.tolerance));
        }
        out
    }
}

fn grad_norm_sq(s: &[f64], grid: &Grid1D) -> f64 {
    let ds = grid.derivative(s);
    grid.trapezoid(&ds.iter().map(|v| v * v).collect::<Vec<_>>())
}

/// sum_i |dS|_k (d2S)^2 dx over interior nodes.
fn degenerate_dissipation(s: &[f64], params: &MaterialParams, grid: &Grid1D) -> f64 {
    let dx = grid.dx();
    let n = grid.len();
    let mut acc = 0.0;
    for i in 1..n - 1 {
        let q = (s[i + 1] - s[i - 1]) / (2.0 * dx);
        let r = (s[i - 1] - 2.0 * s[i] + s[i + 1]) / (dx * dx);
        acc += smoothed_abs(q, params.kappa) * r * r * dx;
    }
    acc
}

fn work_input(prev: &State, next: &State, dt: f64, b: &[Vector3<f64>], grid: &Grid1D) -> f64 {
    let n = grid.len();
    let integrand: Vec<f64> = (0..n)
        .map(|i| {
            let u_t = (next.elastic.displacement[i] - prev.elastic.displacement[i]) / dt;
            b[i].dot(&u_t)
        })
        .collect();
    grid.trapezoid(&integrand)
}

/// Trapezoid integral of the free energy density over the domain; the strain
/// comes from the stored displacement by second-order differences.
pub fn total_free_energy(state: &State, params: &MaterialParams, grid: &Grid1D) -> f64 {
    let grads = vector_derivative(&state.elastic.displacement, grid);
    let ds = grid.derivative(&state.s);
    let integrand: Vec<f64> = (0..grid.len())
        .map(|i| {
            free_energy_density(&strain_of_gradient(&grads[i]), state.s[i], ds[i], params)
        })
        .collect();
    grid.trapezoid(&integrand)
}

/// Energy-rate residual between two consecutive states:
/// (E(next) - E(prev)) / dt - integral of b . u_t. The boundary flux drops
/// because u and S carry homogeneous Dirichlet data.
pub fn dissipation_check(
    prev: &State,
    next: &State,
    dt: f64,
    b: &[Vector3<f64>],
    params: &MaterialParams,
    grid: &Grid1D,
) -> f64 {
    let e_prev = total_free_energy(prev, params, grid);
    let e_next = total_free_energy(next, params, grid);
    (e_next - e_prev) / dt - work_input(prev, next, dt, b, grid)
}

/// Nodewise products of the dissipation identity for the driving force
/// written in factored form: with w = psi_S - nu d2S and the rate
/// S_t = -c w (|dS|_k - k), the product w S_t equals -c w^2 (|dS|_k - k),
/// which is non-positive because |q|_k >= k.
///
/// Returns (max nodewise product, max nodewise identity mismatch); the first
/// must be <= 0 up to round-off, the second is round-off by construction.
pub fn pointwise_dissipation_sign(
    state: &State,
    params: &MaterialParams,
    grid: &Grid1D,
) -> (f64, f64) {
    let t_dot = state.stress_dot_misfit(params);
    let dx = grid.dx();
    let n = grid.len();
    let mut max_product = f64::NEG_INFINITY;
    let mut max_mismatch = 0.0f64;
    for i in 1..n - 1 {
        let q = (state.s[i + 1] - state.s[i - 1]) / (2.0 * dx);
        let r = (state.s[i - 1] - 2.0 * state.s[i] + state.s[i + 1]) / (dx * dx);
        let w = psi_s(t_dot[i], state.s[i], &params.well) - params.gradient_coeff * r;
        let factor = smoothed_abs(q, params.kappa) - params.kappa;
        let rate = -params.mobility * w * factor;
        let product = w * rate;
        let reference = -params.mobility * w * w * factor;
        max_product = max_product.max(product);
        max_mismatch = max_mismatch.max((product - reference).abs());
    }
    (max_product, max_mismatch)
}

/// Configuration of the randomized viscosity-inequality sampler.
#[derive(Debug, Clone)]
pub struct ViscositySamplerConfig {
    pub test_functions: usize,
    pub seed: u64,
    /// Gaussian bumps added to each random space-time quadratic.
    pub bumps_per_function: usize,
}

impl Default for ViscositySamplerConfig {
    fn default() -> Self {
        Self {
            test_functions: 200,
            seed: 42,
            bumps_per_function: 2,
        }
    }
}

/// Outcome of a sampled viscosity check.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscositySummary {
    /// Touching points tested across all test functions.
    pub touchings: usize,
    /// Worst signed violation of the sub/super inequalities (negative when
    /// every inequality held with slack).
    pub max_violation: f64,
    /// Scale-aware tolerance: 10 (dx + dt) (1 + max |H|).
    pub tolerance: f64,
    /// Largest Hamiltonian magnitude seen at a touching point.
    pub max_hamiltonian: f64,
}

/// Smooth space-time test function: a quadratic in (t, x), Gaussian bumps,
/// and a traveling ripple; derivatives are analytic.
///
/// The ripple seeds many well-separated touching points per function.
/// Coefficients are drawn so first derivatives stay O(10) and second
/// derivatives O(100) on the run window; the scale-aware tolerance of the
/// check absorbs the lattice localization error of such functions.
struct TestFunction {
    quad: [f64; 6],
    bumps: Vec<(f64, f64, f64, f64, f64)>, // (amp, ct, cx, st, sx)
    ripple: (f64, f64, f64, f64, f64),     // (amp, om_x, om_t, ph_x, ph_t)
}

impl TestFunction {
    fn sample(rng: &mut impl Rng, t_span: (f64, f64), x_span: (f64, f64), bumps: usize) -> Self {
        let x_ext = x_span.1 - x_span.0;
        // time scale floored so short windows do not inflate derivatives
        let tau = (t_span.1 - t_span.0).max(0.2);
        let quad = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-2.0..2.0) / tau,
            rng.gen_range(-2.0..2.0) / x_ext,
            rng.gen_range(-2.0..2.0) / (tau * tau),
            rng.gen_range(-2.0..2.0) / (tau * x_ext),
            rng.gen_range(-3.0..3.0) / (x_ext * x_ext),
        ];
        let bumps = (0..bumps)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(t_span.0..t_span.1),
                    rng.gen_range(x_span.0..x_span.1),
                    rng.gen_range(0.4..1.0) * tau,
                    rng.gen_range(0.15..0.4) * x_ext,
                )
            })
            .collect();
        let k = rng.gen_range(2..=3) as f64;
        let ripple = (
            rng.gen_range(0.1..0.25),
            2.0 * std::f64::consts::PI * k / x_ext,
            rng.gen_range(0.5..1.5),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        Self {
            quad,
            bumps,
            ripple,
        }
    }

    fn value(&self, t: f64, x: f64) -> f64 {
        let [a0, a1, a2, a3, a4, a5] = self.quad;
        let mut v = a0 + a1 * t + a2 * x + a3 * t * t + a4 * t * x + a5 * x * x;
        for &(amp, ct, cx, st, sx) in &self.bumps {
            let zt = (t - ct) / st;
            let zx = (x - cx) / sx;
            v += amp * (-0.5 * (zt * zt + zx * zx)).exp();
        }
        let (ra, ox, ot, px, pt) = self.ripple;
        v + ra * (ox * x + px).sin() * (ot * t + pt).cos()
    }

    fn dt(&self, t: f64, x: f64) -> f64 {
        let [_, a1, _, a3, a4, _] = self.quad;
        let mut v = a1 + 2.0 * a3 * t + a4 * x;
        for &(amp, ct, cx, st, sx) in &self.bumps {
            let zt = (t - ct) / st;
            let zx = (x - cx) / sx;
            let g = amp * (-0.5 * (zt * zt + zx * zx)).exp();
            v += g * (-zt / st);
        }
        let (ra, ox, ot, px, pt) = self.ripple;
        v - ra * ot * (ox * x + px).sin() * (ot * t + pt).sin()
    }

    fn dx(&self, t: f64, x: f64) -> f64 {
        let [_, _, a2, _, a4, a5] = self.quad;
        let mut v = a2 + a4 * t + 2.0 * a5 * x;
        for &(amp, ct, cx, st, sx) in &self.bumps {
            let zt = (t - ct) / st;
            let zx = (x - cx) / sx;
            let g = amp * (-0.5 * (zt * zt + zx * zx)).exp();
            v += g * (-zx / sx);
        }
        let (ra, ox, ot, px, pt) = self.ripple;
        v + ra * ox * (ox * x + px).cos() * (ot * t + pt).cos()
    }

    fn dxx(&self, t: f64, x: f64) -> f64 {
        let [_, _, _, _, _, a5] = self.quad;
        let mut v = 2.0 * a5;
        for &(amp, ct, cx, st, sx) in &self.bumps {
            let zt = (t - ct) / st;
            let zx = (x - cx) / sx;
            let g = amp * (-0.5 * (zt * zt + zx * zx)).exp();
            v += g * (zx * zx - 1.0) / (sx * sx);
        }
        let (ra, ox, ot, px, pt) = self.ripple;
        v - ra * ox * ox * (ox * x + px).sin() * (ot * t + pt).cos()
    }
}

/// Sampled check of the sub/super viscosity inequalities against the sharp
/// Hamiltonian evaluated with the run's own stress field.
///
/// For each random test function, every strict local extremum of S - phi
/// over the interior space-time lattice (8-neighborhood) is a touching
/// point: maxima must satisfy phi_t <= H and minima the reverse. Ties are
/// skipped. Violations are data, not errors.
pub fn viscosity_check(
    trajectory: &Trajectory,
    params: &MaterialParams,
    grid: &Grid1D,
    config: &ViscositySamplerConfig,
) -> ViscositySummary {
    let frames = trajectory.len();
    assert!(frames >= 3, "need at least 3 frames for interior extrema");
    let dt = trajectory.times[1] - trajectory.times[0];
    let n = grid.len();
    let t_span = (trajectory.times[0], trajectory.times[frames - 1]);
    let x_span = (grid.a(), grid.d());

    // One generator for the whole family keeps the draw deterministic; the
    // functions are then checked in parallel.
    let functions: Vec<TestFunction> = {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        (0..config.test_functions)
            .map(|_| TestFunction::sample(&mut rng, t_span, x_span, config.bumps_per_function))
            .collect()
    };

    let per_function: Vec<(usize, f64, f64)> = functions
        .par_iter()
        .map(|phi| {
            let mut touchings = 0usize;
            let mut worst = f64::NEG_INFINITY;
            let mut max_h = 0.0f64;
            let w: Vec<Vec<f64>> = (0..frames)
                .map(|k| {
                    (0..n)
                        .map(|i| {
                            trajectory.frames[k][i] - phi.value(trajectory.times[k], grid.x(i))
                        })
                        .collect()
                })
                .collect();
            for k in 1..frames - 1 {
                let t = trajectory.times[k];
                for i in 1..n - 1 {
                    let center = w[k][i];
                    let mut greater = 0;
                    let mut less = 0;
                    let mut tie = false;
                    for (dk, di) in [
                        (-1i64, -1i64),
                        (-1, 0),
                        (-1, 1),
                        (0, -1),
                        (0, 1),
                        (1, -1),
                        (1, 0),
                        (1, 1),
                    ] {
                        let v = w[(k as i64 + dk) as usize][(i as i64 + di) as usize];
                        if v == center {
                            tie = true;
                            break;
                        }
                        if center > v {
                            greater += 1;
                        } else {
                            less += 1;
                        }
                    }
                    if tie || (greater != 8 && less != 8) {
                        continue;
                    }
                    let x = grid.x(i);
                    let h = hamiltonian_sharp(
                        trajectory.stress_dot_frames[k][i],
                        trajectory.frames[k][i],
                        phi.dx(t, x),
                        phi.dxx(t, x),
                        params,
                    );
                    let phi_t = phi.dt(t, x);
                    // strict max of S - phi: sub-inequality phi_t <= H;
                    // strict min: super-inequality phi_t >= H.
                    let violation = if greater == 8 { phi_t - h } else { h - phi_t };
                    touchings += 1;
                    worst = worst.max(violation);
                    max_h = max_h.max(h.abs());
                }
            }
            (touchings, worst, max_h)
        })
        .collect();

    let touchings = per_function.iter().map(|r| r.0).sum();
    let max_violation = per_function
        .iter()
        .map(|r| r.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_hamiltonian = per_function.iter().map(|r| r.2).fold(0.0, f64::max);
    ViscositySummary {
        touchings,
        max_violation,
        tolerance: 10.0 * (grid.dx() + dt) * (1.0 + max_hamiltonian),
        max_hamiltonian,
    }
}

/// Discrete Holder seminorm: max over node pairs of |S(x) - S(y)| / |x - y|^alpha.
pub fn holder_seminorm(s: &[f64], alpha: f64, grid: &Grid1D) -> f64 {
    assert!(alpha > 0.0 && alpha <= 1.0);
    let n = grid.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let gap = (s[i] - s[j]).abs() / (grid.x(j) - grid.x(i)).powf(alpha);
            worst = worst.max(gap);
        }
    }
    worst
}
