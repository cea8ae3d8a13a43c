//! Flat key-value configuration: `key = value` lines, `#` comments.
//!
//! Every key has a default matching the shipped scenario, so an empty (or
//! absent) file resolves to the default run. Unknown keys are rejected.

use std::collections::BTreeMap;

use configforce::evolution::{BodyForce, RunConfig, StepScheme, TimeStep};
use configforce::material::{DoubleWell, MaterialParams};
use configforce::presets;
use configforce::sharp::Orientation;
use configforce::tensor::{ElasticityTensor, SymMat3};
use configforce::Grid1D;
use nalgebra::Vector3;

/// Initial-profile selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    Bump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    TwoBump {
        amplitude: f64,
        center: f64,
        width: f64,
        amplitude2: f64,
        center2: f64,
        width2: f64,
    },
    Tanh {
        center: f64,
        shape: f64,
    },
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: MaterialParams,
    pub grid: Grid1D,
    pub run: RunConfig,
    pub profile: Profile,
    pub body: Vector3<f64>,
    pub seed: u64,
    // study controls
    pub kappa_base: f64,
    pub kappa_count: usize,
    pub grid_levels: usize,
    pub nus: Vec<f64>,
    pub sharp_z0: f64,
    pub orientation: Orientation,
    // raw echo state
    elasticity_kind: String,
    lambda: f64,
    mu: f64,
    d_upper: Option<[f64; 21]>,
    dt_raw: String,
    scheme_raw: String,
    fixed_point_raw: String,
    mollify_raw: String,
}

impl Resolved {
    /// Initial data sampled on an arbitrary grid.
    pub fn initial(&self, grid: &Grid1D) -> Vec<f64> {
        match &self.profile {
            Profile::Zero => vec![0.0; grid.len()],
            Profile::Bump {
                amplitude,
                center,
                width,
            } => presets::smooth_bump(grid, *amplitude, *center, *width),
            Profile::TwoBump {
                amplitude,
                center,
                width,
                amplitude2,
                center2,
                width2,
            } => {
                let a = presets::smooth_bump(grid, *amplitude, *center, *width);
                let b = presets::smooth_bump(grid, *amplitude2, *center2, *width2);
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            }
            Profile::Tanh { center, shape } => {
                presets::tanh_profile(grid, *center, self.params.gradient_coeff, *shape)
            }
        }
    }

    pub fn body_force(&self) -> BodyForce {
        if self.body.amax() == 0.0 {
            BodyForce::Zero
        } else {
            BodyForce::Constant(self.body)
        }
    }

    /// Kappa sequence of the continuation study.
    pub fn kappas(&self) -> Vec<f64> {
        (0..self.kappa_count)
            .map(|n| self.kappa_base * 0.5f64.powi(n as i32))
            .collect()
    }

    /// Resolved configuration echoed back in the input format.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        push("domain_a", format!("{}", self.grid.a()));
        push("domain_d", format!("{}", self.grid.d()));
        push("grid_n", format!("{}", self.grid.len()));
        push("elasticity", self.elasticity_kind.clone());
        push("lambda", format!("{}", self.lambda));
        push("mu", format!("{}", self.mu));
        if let Some(d) = &self.d_upper {
            push(
                "d_upper",
                d.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        let m = &self.params.misfit;
        push("misfit_11", format!("{}", m.a11));
        push("misfit_22", format!("{}", m.a22));
        push("misfit_33", format!("{}", m.a33));
        push("misfit_12", format!("{}", m.a12));
        push("misfit_13", format!("{}", m.a13));
        push("misfit_23", format!("{}", m.a23));
        push("theta", format!("{}", self.params.well.theta()));
        push("tilt", format!("{}", self.params.well.tilt()));
        push("c", format!("{}", self.params.mobility));
        push("nu", format!("{}", self.params.gradient_coeff));
        push("kappa", format!("{}", self.params.kappa));
        push("b1", format!("{}", self.body[0]));
        push("b2", format!("{}", self.body[1]));
        push("b3", format!("{}", self.body[2]));
        push("t_end", format!("{}", self.run.t_end));
        push("dt", self.dt_raw.clone());
        push("cfl_safety", format!("{}", self.run.cfl_safety));
        push("scheme", self.scheme_raw.clone());
        push("output_stride", format!("{}", self.run.output_stride));
        push("fixed_point", self.fixed_point_raw.clone());
        push("mollify", self.mollify_raw.clone());
        match &self.profile {
            Profile::Zero => push("s0", "zero".into()),
            Profile::Bump {
                amplitude,
                center,
                width,
            } => {
                push("s0", "bump".into());
                push("s0_amplitude", format!("{amplitude}"));
                push("s0_center", format!("{center}"));
                push("s0_width", format!("{width}"));
            }
            Profile::TwoBump {
                amplitude,
                center,
                width,
                amplitude2,
                center2,
                width2,
            } => {
                push("s0", "two-bump".into());
                push("s0_amplitude", format!("{amplitude}"));
                push("s0_center", format!("{center}"));
                push("s0_width", format!("{width}"));
                push("s0_amplitude2", format!("{amplitude2}"));
                push("s0_center2", format!("{center2}"));
                push("s0_width2", format!("{width2}"));
            }
            Profile::Tanh { center, shape } => {
                push("s0", "tanh".into());
                push("s0_center", format!("{center}"));
                push("s0_shape", format!("{shape}"));
            }
        }
        push("kappa_base", format!("{}", self.kappa_base));
        push("kappa_count", format!("{}", self.kappa_count));
        push("grid_levels", format!("{}", self.grid_levels));
        push(
            "nus",
            self.nus
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        push("sharp_z0", format!("{}", self.sharp_z0));
        push(
            "sharp_orientation",
            match self.orientation {
                Orientation::LowHigh => "low-high".into(),
                Orientation::HighLow => "high-low".into(),
            },
        );
        push("seed", format!("{}", self.seed));
        out
    }
}

const KNOWN_KEYS: &[&str] = &[
    "domain_a",
    "domain_d",
    "grid_n",
    "elasticity",
    "lambda",
    "mu",
    "d_upper",
    "misfit_11",
    "misfit_22",
    "misfit_33",
    "misfit_12",
    "misfit_13",
    "misfit_23",
    "theta",
    "tilt",
    "c",
    "nu",
    "kappa",
    "b1",
    "b2",
    "b3",
    "t_end",
    "dt",
    "cfl_safety",
    "scheme",
    "output_stride",
    "fixed_point",
    "mollify",
    "s0",
    "s0_amplitude",
    "s0_center",
    "s0_width",
    "s0_amplitude2",
    "s0_center2",
    "s0_width2",
    "s0_shape",
    "kappa_base",
    "kappa_count",
    "grid_levels",
    "nus",
    "sharp_z0",
    "sharp_orientation",
    "seed",
];

fn parse_map(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key `{key}`", lineno + 1));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn get_f64(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64, String> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| format!("key `{key}`: `{v}` is not a number")),
    }
}

fn get_usize(map: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize, String> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| format!("key `{key}`: `{v}` is not an integer")),
    }
}

/// Parse configuration text into a resolved configuration; defaults mirror
/// the shipped default scenario.
pub fn parse(text: &str) -> Result<Resolved, String> {
    let map = parse_map(text)?;

    let a = get_f64(&map, "domain_a", 0.0)?;
    let d = get_f64(&map, "domain_d", 1.0)?;
    let n = get_usize(&map, "grid_n", 201)?;
    let grid = Grid1D::new(a, d, n).map_err(|e| e.to_string())?;

    let elasticity_kind = map
        .get("elasticity")
        .cloned()
        .unwrap_or_else(|| "isotropic".into());
    let lambda = get_f64(&map, "lambda", 1.0)?;
    let mu = get_f64(&map, "mu", 1.0)?;
    let mut d_upper = None;
    let elasticity = match elasticity_kind.as_str() {
        "isotropic" => ElasticityTensor::isotropic(lambda, mu).map_err(|e| e.to_string())?,
        "matrix" => {
            let raw = map
                .get("d_upper")
                .ok_or("elasticity = matrix requires d_upper")?;
            let entries: Vec<f64> = raw
                .split(',')
                .map(|v| v.trim().parse().map_err(|_| format!("d_upper entry `{v}`")))
                .collect::<Result<_, _>>()?;
            let arr: [f64; 21] = entries
                .try_into()
                .map_err(|v: Vec<f64>| format!("d_upper needs 21 entries, got {}", v.len()))?;
            d_upper = Some(arr);
            ElasticityTensor::from_upper_triangle(&arr).map_err(|e| e.to_string())?
        }
        other => return Err(format!("elasticity must be isotropic or matrix, got `{other}`")),
    };

    let misfit = SymMat3::new(
        get_f64(&map, "misfit_11", 0.1)?,
        get_f64(&map, "misfit_22", 0.0)?,
        get_f64(&map, "misfit_33", 0.0)?,
        get_f64(&map, "misfit_12", 0.0)?,
        get_f64(&map, "misfit_13", 0.0)?,
        get_f64(&map, "misfit_23", 0.0)?,
    );

    let well = DoubleWell::tilted(get_f64(&map, "theta", 1.0)?, get_f64(&map, "tilt", 0.0)?)
        .map_err(|e| e.to_string())?;
    let params = MaterialParams::new(
        get_f64(&map, "c", 1.0)?,
        get_f64(&map, "nu", 1e-3)?,
        get_f64(&map, "kappa", 0.05)?,
        misfit,
        elasticity,
        well,
    )
    .map_err(|e| e.to_string())?;

    let dt_raw = map.get("dt").cloned().unwrap_or_else(|| "1e-3".into());
    let time_step = if dt_raw == "adaptive" {
        TimeStep::Adaptive
    } else {
        TimeStep::Fixed(
            dt_raw
                .parse()
                .map_err(|_| format!("key `dt`: `{dt_raw}` is neither a number nor `adaptive`"))?,
        )
    };
    let scheme_raw = map
        .get("scheme")
        .cloned()
        .unwrap_or_else(|| "semi-implicit".into());
    let scheme = match scheme_raw.as_str() {
        "semi-implicit" => StepScheme::SemiImplicit,
        "explicit" => StepScheme::Explicit,
        other => return Err(format!("scheme must be semi-implicit or explicit, got `{other}`")),
    };
    let fixed_point_raw = map
        .get("fixed_point")
        .cloned()
        .unwrap_or_else(|| "off".into());
    let fixed_point = if fixed_point_raw == "off" {
        None
    } else {
        Some(
            fixed_point_raw
                .parse()
                .map_err(|_| format!("key `fixed_point`: `{fixed_point_raw}`"))?,
        )
    };
    let mollify_raw = map.get("mollify").cloned().unwrap_or_else(|| "off".into());
    let mollify_body = match mollify_raw.as_str() {
        "off" => false,
        "on" => true,
        other => return Err(format!("mollify must be on or off, got `{other}`")),
    };

    let run = RunConfig {
        t_end: get_f64(&map, "t_end", 0.5)?,
        cfl_safety: get_f64(&map, "cfl_safety", 0.5)?,
        time_step,
        scheme,
        output_stride: get_usize(&map, "output_stride", 10)?,
        fixed_point,
        mollify_body,
    };
    run.validate().map_err(|e| e.to_string())?;

    let profile_kind = map.get("s0").cloned().unwrap_or_else(|| "two-bump".into());
    let profile = match profile_kind.as_str() {
        "zero" => Profile::Zero,
        "bump" => Profile::Bump {
            amplitude: get_f64(&map, "s0_amplitude", 0.45)?,
            center: get_f64(&map, "s0_center", 0.503)?,
            width: get_f64(&map, "s0_width", 0.25)?,
        },
        "two-bump" => Profile::TwoBump {
            amplitude: get_f64(&map, "s0_amplitude", 0.45)?,
            center: get_f64(&map, "s0_center", 0.503)?,
            width: get_f64(&map, "s0_width", 0.25)?,
            amplitude2: get_f64(&map, "s0_amplitude2", 0.12)?,
            center2: get_f64(&map, "s0_center2", 0.41)?,
            width2: get_f64(&map, "s0_width2", 0.13)?,
        },
        "tanh" => Profile::Tanh {
            center: get_f64(&map, "s0_center", 0.5)?,
            shape: get_f64(&map, "s0_shape", 1.0)?,
        },
        other => return Err(format!("unknown initial profile `{other}`")),
    };

    let nus = match map.get("nus") {
        None => vec![4e-3, 1e-3, 2.5e-4],
        Some(raw) => raw
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| format!("nus entry `{v}`")))
            .collect::<Result<_, _>>()?,
    };
    let orientation = match map
        .get("sharp_orientation")
        .map(String::as_str)
        .unwrap_or("low-high")
    {
        "low-high" => Orientation::LowHigh,
        "high-low" => Orientation::HighLow,
        other => return Err(format!("sharp_orientation `{other}`")),
    };

    Ok(Resolved {
        params,
        grid,
        run,
        profile,
        body: Vector3::new(
            get_f64(&map, "b1", 0.0)?,
            get_f64(&map, "b2", 0.0)?,
            get_f64(&map, "b3", 0.0)?,
        ),
        seed: get_usize(&map, "seed", presets::DEFAULT_SEED as usize)? as u64,
        kappa_base: get_f64(&map, "kappa_base", 0.2)?,
        kappa_count: get_usize(&map, "kappa_count", 5)?,
        grid_levels: get_usize(&map, "grid_levels", 3)?,
        nus,
        sharp_z0: get_f64(&map, "sharp_z0", 0.5)?,
        orientation,
        elasticity_kind,
        lambda,
        mu,
        d_upper,
        dt_raw,
        scheme_raw,
        fixed_point_raw,
        mollify_raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_resolves_to_default_scenario() {
        let resolved = parse("").unwrap();
        let scenario = configforce::presets::default_scenario().unwrap();
        assert_eq!(resolved.grid, scenario.grid);
        assert_eq!(resolved.run, scenario.config);
        assert_eq!(resolved.initial(&resolved.grid), scenario.initial);
        assert_eq!(resolved.kappas(), vec![0.2, 0.1, 0.05, 0.025, 0.0125]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(parse("not_a_key = 1").is_err());
        assert!(parse("grid_n = many").is_err());
        assert!(parse("t_end = 0").is_err());
        assert!(parse("scheme = magic").is_err());
        assert!(parse("elasticity = matrix").is_err());
    }

    #[test]
    fn comments_and_overrides() {
        let resolved = parse("# a comment\nkappa = 0.1 # trailing\nnu = 2e-3\n").unwrap();
        assert_eq!(resolved.params.kappa, 0.1);
        assert_eq!(resolved.params.gradient_coeff, 2e-3);
    }

    #[test]
    fn echo_round_trips() {
        let resolved = parse("kappa = 0.1\ns0 = tanh\ns0_center = 0.4\n").unwrap();
        let echoed = parse(&resolved.echo()).unwrap();
        assert_eq!(echoed.params.kappa, resolved.params.kappa);
        assert_eq!(echoed.profile, resolved.profile);
        assert_eq!(echoed.run, resolved.run);
    }

    #[test]
    fn matrix_elasticity_parses() {
        // identity map: diagonal ones in the 21-entry upper triangle
        let mut entries = vec!["0".to_string(); 21];
        let mut k = 0;
        for i in 0..6 {
            for j in i..6 {
                if i == j {
                    entries[k] = "1".into();
                }
                k += 1;
            }
        }
        let text = format!("elasticity = matrix\nd_upper = {}\n", entries.join(","));
        let resolved = parse(&text).unwrap();
        assert_eq!(
            resolved.params.elasticity,
            ElasticityTensor::identity()
        );
    }
}
