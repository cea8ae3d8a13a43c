//! Study drivers: regularization-continuation, grid-refinement and
//! sharp-versus-diffuse comparison runs. Member simulations are independent
//! and run concurrently; aggregation happens after all members finish.

use rayon::prelude::*;

use crate::diagnostics::{holder_seminorm, viscosity_check, ViscositySamplerConfig, ViscositySummary};
use crate::error::{Error, Result};
use crate::evolution::{run, BodyForce, NullSink, RunConfig, RunOutput, TimeStep};
use crate::grid::Grid1D;
use crate::material::MaterialParams;
use crate::presets::tanh_profile;
use crate::sharp::{
    compare_diffuse_sharp, run_sharp, Orientation, SharpState, SharpTrajectory,
};

/// Aggregate results of a regularization-continuation study.
#[derive(Debug, Clone)]
pub struct KappaStudy {
    pub kappas: Vec<f64>,
    /// d_n = max over output frames of the sup-norm gap between runs n and
    /// n-1; length = kappas.len() - 1.
    pub sup_norm_diffs: Vec<f64>,
    /// Run-level monitors per member: sup |S| and sup of the squared
    /// gradient norm.
    pub sup_s: Vec<f64>,
    pub sup_grad_norm_sq: Vec<f64>,
    /// Max over output frames of the Holder-1/2 seminorm, per member.
    pub holder_bounds: Vec<f64>,
    /// Full per-member diagnostics.
    pub reports: Vec<crate::diagnostics::DiagnosticsReport>,
    /// Sampled viscosity check on the smallest-kappa trajectory.
    pub viscosity: ViscositySummary,
}

impl KappaStudy {
    /// Convergence table CSV: one row per kappa with its monitors, the gap
    /// to the previous run, and the final viscosity summary as comments.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kappa,sup_norm_diff,sup_s,sup_grad_norm_sq,holder_half\n");
        for (n, &kappa) in self.kappas.iter().enumerate() {
            let diff = if n == 0 {
                String::from("nan")
            } else {
                format!("{:.16e}", self.sup_norm_diffs[n - 1])
            };
            out.push_str(&format!(
                "{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                kappa, diff, self.sup_s[n], self.sup_grad_norm_sq[n], self.holder_bounds[n]
            ));
        }
        out.push_str(&format!(
            "# viscosity_touchings = {}\n# viscosity_max_violation = {:.16e}\n# viscosity_tolerance = {:.16e}\n",
            self.viscosity.touchings, self.viscosity.max_violation, self.viscosity.tolerance
        ));
        out
    }
}

/// Run the coupled solver once per kappa on a fixed grid and report the
/// successive sup-norm differences, the uniform monitors, and a viscosity
/// check of the smallest-kappa member against its own stress field.
pub fn kappa_study(
    s0: &[f64],
    body: &BodyForce,
    params: &MaterialParams,
    grid: &Grid1D,
    config: &RunConfig,
    kappas: &[f64],
    sampler_seed: u64,
) -> Result<KappaStudy> {
    if kappas.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "continuation study needs at least 3 kappa values, got {}",
            kappas.len()
        )));
    }
    for pair in kappas.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::InvalidParameter(
                "kappa sequence must be strictly decreasing".into(),
            ));
        }
    }

    let outputs: Vec<Result<RunOutput>> = kappas
        .par_iter()
        .map(|&kappa| {
            let member = params.with_kappa(kappa)?;
            run(s0, body, &member, grid, config, &mut NullSink)
        })
        .collect();
    let outputs: Vec<RunOutput> = outputs.into_iter().collect::<Result<_>>()?;

    let mut sup_norm_diffs = Vec::with_capacity(kappas.len() - 1);
    for pair in outputs.windows(2) {
        let (a, b) = (&pair[0].trajectory, &pair[1].trajectory);
        let frames = a.len().min(b.len());
        let mut worst = 0.0f64;
        for k in 0..frames {
            for i in 0..grid.len() {
                worst = worst.max((a.frames[k][i] - b.frames[k][i]).abs());
            }
        }
        sup_norm_diffs.push(worst);
    }

    let holder_bounds = outputs
        .iter()
        .map(|out| {
            out.trajectory
                .frames
                .iter()
                .map(|s| holder_seminorm(s, 0.5, grid))
                .fold(0.0, f64::max)
        })
        .collect();

    // full-resolution rerun of the smallest kappa for the lattice check
    let smallest = params.with_kappa(*kappas.last().unwrap())?;
    let dense_config = RunConfig {
        output_stride: 1,
        ..config.clone()
    };
    let dense = run(s0, body, &smallest, grid, &dense_config, &mut NullSink)?;
    let viscosity = viscosity_check(
        &dense.trajectory,
        &smallest,
        grid,
        &ViscositySamplerConfig {
            seed: sampler_seed,
            ..ViscositySamplerConfig::default()
        },
    );

    Ok(KappaStudy {
        kappas: kappas.to_vec(),
        sup_norm_diffs,
        sup_s: outputs.iter().map(|o| o.report.sup_s).collect(),
        sup_grad_norm_sq: outputs.iter().map(|o| o.report.sup_grad_norm_sq).collect(),
        holder_bounds,
        reports: outputs.into_iter().map(|o| o.report).collect(),
        viscosity,
    })
}

/// Self-convergence table from nested grid refinement.
#[derive(Debug, Clone)]
pub struct GridStudy {
    pub grid_sizes: Vec<usize>,
    /// Sup-norm difference between consecutive levels, restricted to the
    /// coarser level's nodes; length = levels - 1.
    pub diffs: Vec<f64>,
    /// Observed orders log2(d_k / d_{k+1}); length = levels - 2.
    pub orders: Vec<f64>,
}

impl GridStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nodes,diff_to_previous,observed_order\n");
        for (k, &n) in self.grid_sizes.iter().enumerate() {
            let diff = if k == 0 {
                String::from("nan")
            } else {
                format!("{:.16e}", self.diffs[k - 1])
            };
            let order = if k < 2 {
                String::from("nan")
            } else {
                format!("{:.3}", self.orders[k - 2])
            };
            out.push_str(&format!("{n},{diff},{order}\n"));
        }
        out
    }
}

/// Triple-grid (or longer) self-convergence of the final order parameter.
/// Each refinement doubles the resolution and quarters the step so the
/// spatial order dominates the estimate.
pub fn grid_study(
    profile: &(dyn Fn(&Grid1D) -> Vec<f64> + Sync),
    body: &BodyForce,
    params: &MaterialParams,
    base_grid: &Grid1D,
    config: &RunConfig,
    levels: usize,
) -> Result<GridStudy> {
    if levels < 3 {
        return Err(Error::InvalidParameter(format!(
            "refinement study needs at least 3 grids, got {levels}"
        )));
    }
    let base_dt = match config.time_step {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Adaptive => {
            return Err(Error::InvalidParameter(
                "refinement study needs a fixed base step".into(),
            ))
        }
    };

    let mut grids = Vec::with_capacity(levels);
    grids.push(base_grid.clone());
    for _ in 1..levels {
        grids.push(grids.last().unwrap().refined());
    }

    let finals: Vec<Result<Vec<f64>>> = grids
        .par_iter()
        .enumerate()
        .map(|(k, grid)| {
            let member = RunConfig {
                time_step: TimeStep::Fixed(base_dt / 4f64.powi(k as i32)),
                output_stride: usize::MAX,
                ..config.clone()
            };
            Ok(run(&profile(grid), body, params, grid, &member, &mut NullSink)?
                .final_state
                .s)
        })
        .collect();
    let finals: Vec<Vec<f64>> = finals.into_iter().collect::<Result<_>>()?;

    let mut diffs = Vec::with_capacity(levels - 1);
    for k in 0..levels - 1 {
        let coarse = &finals[k];
        let fine = &finals[k + 1];
        let gap = coarse
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - fine[2 * i]).abs())
            .fold(0.0, f64::max);
        diffs.push(gap);
    }
    let orders = diffs
        .windows(2)
        .map(|pair| (pair[0] / pair[1]).log2())
        .collect();

    Ok(GridStudy {
        grid_sizes: grids.iter().map(|g| g.len()).collect(),
        diffs,
        orders,
    })
}

/// One member of a sharp-versus-diffuse comparison.
#[derive(Debug, Clone)]
pub struct SharpCompareMember {
    pub nu: f64,
    /// Position-error series (t, |z_diffuse - z_sharp|).
    pub errors: Vec<(f64, f64)>,
    pub max_error: f64,
}

/// Comparison of the diffuse model against the sharp reference across a
/// sequence of gradient coefficients.
#[derive(Debug, Clone)]
pub struct SharpCompare {
    pub members: Vec<SharpCompareMember>,
    pub sharp: SharpTrajectory,
}

impl SharpCompare {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nu,max_position_error\n");
        for m in &self.members {
            out.push_str(&format!("{:.16e},{:.16e}\n", m.nu, m.max_error));
        }
        out
    }
}

/// Run the sharp reference once per gradient coefficient (the interface law
/// does not depend on it) against diffuse runs with matching parameters and
/// a two-phase initial profile, and report the level-set position errors.
///
/// `shape` is the width constant of the diffuse profile.
pub fn sharp_compare(
    z0: f64,
    orientation: Orientation,
    nus: &[f64],
    shape: f64,
    body: &BodyForce,
    params: &MaterialParams,
    grid: &Grid1D,
    config: &RunConfig,
) -> Result<SharpCompare> {
    let coupling = crate::evolution::Coupling::new(params, body)?;
    let sharp_state = SharpState {
        time: 0.0,
        z: z0,
        orientation,
    };
    let sharp_dt = match config.time_step {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Adaptive => config.t_end / 1000.0,
    };
    let sharp = run_sharp(sharp_state, config.t_end, sharp_dt, &coupling, params, grid)?;

    let members: Vec<Result<SharpCompareMember>> = nus
        .par_iter()
        .map(|&nu| {
            let member_params = MaterialParams::new(
                params.mobility,
                nu,
                params.kappa,
                params.misfit,
                params.elasticity.clone(),
                params.well,
            )?;
            let mut s0 = tanh_profile(grid, z0, nu, shape);
            if orientation == Orientation::HighLow {
                for v in &mut s0[1..grid.len() - 1] {
                    *v = 1.0 - *v;
                }
            }
            let out = run(&s0, body, &member_params, grid, config, &mut NullSink)?;
            let errors = compare_diffuse_sharp(&out.trajectory, &sharp, grid, orientation)?;
            let max_error = errors.iter().map(|e| e.1).fold(0.0, f64::max);
            Ok(SharpCompareMember {
                nu,
                errors,
                max_error,
            })
        })
        .collect();
    let members = members.into_iter().collect::<Result<_>>()?;

    Ok(SharpCompare { members, sharp })
}
