//! Run configuration: flags override the config file, which overrides the
//! per-command defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use dcf_core::numerics::linspace;
use dcf_core::{FieldConfig, TruncationPolicy, UniformGrid, Valley};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Classical drift orbits: t, x, y and the circle residual.
    Classical,
    /// Landau levels against β.
    Spectrum,
    /// Probability and y-current densities of eigenstates or coherent states.
    Density,
    /// Quadrature variances and their product.
    Hur,
    /// Mean energy over the α plane.
    Energy,
    /// Mean y-velocity over the α plane.
    Velocity,
    /// Full invariant suite; exit status 2 on any failure.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classical => "classical",
            Command::Spectrum => "spectrum",
            Command::Density => "density",
            Command::Hur => "hur",
            Command::Energy => "energy",
            Command::Velocity => "velocity",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    Eigen,
    Coherent,
}

macro_rules! flags {
    ($($field:ident => $key:literal : $help:literal),* $(,)?) => {
        /// Every option accepted on the command line and in the config file.
        #[derive(Debug, Clone, Default, Args)]
        pub struct Flags {
            /// Flat key=value file; keys are the long option names.
            #[arg(long, global = true)]
            pub config: Option<PathBuf>,
            $(
                #[doc = $help]
                #[arg(long = $key, global = true, allow_hyphen_values = true)]
                pub $field: Option<String>,
            )*
        }

        pub const KEYS: &[&str] = &[$($key),*];

        impl Flags {
            fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
                vec![$(($key, &self.$field)),*]
            }
        }
    };
}

flags! {
    b => "b": "Magnetic field strength B (l_B = 1/√B)",
    beta => "beta": "Single β = E/B value",
    betas => "betas": "Comma-separated β list",
    beta_sweep => "beta-sweep": "β sweep a:b:n for the spectrum",
    k => "k": "Momentum along y",
    eta => "eta": "Valley sign, +1 or -1",
    alpha_mod => "alpha-mod": "Coherent-state |α|",
    phase => "phase": "Coherent-state phase φ",
    phase_sweep => "phase-sweep": "Phase sweep a:b:n",
    abs_sweep => "abs-sweep": "|α| sweep a:b:n at fixed phase",
    alpha_grid => "alpha-grid": "Re α and Im α axis a:b:n",
    delta => "delta": "Operator phase δ",
    levels => "levels": "Comma-separated level list",
    n_max => "n-max": "Highest level for the spectrum",
    grid => "grid": "Output grid x_min:x_max:points",
    mode => "mode": "Density mode: eigen or coherent",
    tol => "tol": "Coherent amplitude truncation tolerance",
    vd => "vd": "Comma-separated drift velocities for classical orbits",
    x0 => "x0": "Classical initial x",
    y0 => "y0": "Classical initial y",
    v0x => "v0x": "Classical initial x-velocity",
    v0y => "v0y": "Classical initial y-velocity",
    t_max => "t-max": "Classical end time",
    t_points => "t-points": "Classical time samples",
    out => "out": "Output path (stdout when absent)",
    format => "format": "csv or json",
    inject_fault => "inject-fault": "Verification test hook: perturb the M matrix by this amount",
}

/// Parses a flat key=value file; `#` starts a comment line.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config line {}: expected key=value", i + 1))
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!(
                "config line {}: unknown key `{k}`",
                i + 1
            )));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn merge(flags: &Flags) -> CliResult<BTreeMap<String, String>> {
    let mut map = match &flags.config {
        Some(p) => parse_config_text(&std::fs::read_to_string(p)?)?,
        None => BTreeMap::new(),
    };
    for (k, v) in flags.pairs() {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            vec![self.start]
        } else {
            let mut v = linspace(self.start, self.end, self.points);
            v[self.points - 1] = self.end;
            v
        }
    }
}

fn bad(key: &str, v: &str, what: &str) -> CliError {
    CliError::Config(format!("`{key}` = `{v}`: {what}"))
}

fn parse_f64(key: &str, v: &str) -> CliResult<f64> {
    let x: f64 = v.trim().parse().map_err(|_| bad(key, v, "not a number"))?;
    if !x.is_finite() {
        return Err(bad(key, v, "must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> CliResult<usize> {
    v.trim()
        .parse()
        .map_err(|_| bad(key, v, "not a non-negative integer"))
}

fn parse_list(key: &str, v: &str) -> CliResult<Vec<f64>> {
    let out = v
        .split(',')
        .map(|s| parse_f64(key, s))
        .collect::<CliResult<Vec<_>>>()?;
    if out.is_empty() {
        return Err(bad(key, v, "empty list"));
    }
    Ok(out)
}

fn parse_sweep(key: &str, v: &str) -> CliResult<Sweep> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(key, v, "expected a:b:n"));
    }
    let s = Sweep {
        start: parse_f64(key, parts[0])?,
        end: parse_f64(key, parts[1])?,
        points: parse_usize(key, parts[2])?,
    };
    if s.points == 0 || (s.points > 1 && s.end < s.start) {
        return Err(bad(key, v, "need n ≥ 1 and a ≤ b"));
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub b: f64,
    pub k: f64,
    pub valley: Valley,
    pub betas: Vec<f64>,
    pub alpha_mod: f64,
    pub phases: Vec<f64>,
    pub abs_sweep: Option<Sweep>,
    pub alpha_axis: Vec<f64>,
    pub delta: f64,
    pub levels: Vec<usize>,
    pub n_max: usize,
    pub grid: Option<UniformGrid>,
    pub mode: DensityMode,
    pub policy: TruncationPolicy,
    pub vd: Vec<f64>,
    pub x0: f64,
    pub y0: f64,
    pub v0x: f64,
    pub v0y: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub fault: Option<f64>,
    /// Effective settings, echoed into output metadata.
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_flags(command: Command, flags: &Flags) -> CliResult<Self> {
        Self::from_map(command, &merge(flags)?)
    }

    pub fn from_map(command: Command, map: &BTreeMap<String, String>) -> CliResult<Self> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let f = |k: &str, d: f64| get(k).map_or(Ok(d), |v| parse_f64(k, v));
        let u = |k: &str, d: usize| get(k).map_or(Ok(d), |v| parse_usize(k, v));

        let mode = match get("mode").unwrap_or("eigen") {
            "eigen" => DensityMode::Eigen,
            "coherent" => DensityMode::Coherent,
            other => return Err(bad("mode", other, "expected eigen or coherent")),
        };
        // eigenstate densities default to the k = 1 setting of their figure
        let k_default = if command == Command::Density && mode == DensityMode::Eigen {
            1.0
        } else {
            0.0
        };
        let b = f("b", 0.5)?;
        let k = f("k", k_default)?;
        let eta = get("eta").unwrap_or("1");
        let valley = match eta.trim().trim_start_matches('+') {
            "1" => Valley::K,
            "-1" => Valley::KPrime,
            _ => return Err(bad("eta", eta, "expected +1 or -1")),
        };

        let default_betas: Vec<f64> = match command {
            Command::Spectrum => Sweep {
                start: 0.0,
                end: 0.999,
                points: 201,
            }
            .values(),
            Command::Hur => vec![0.0, 0.25, 0.5, 0.75, 0.9, 0.99],
            Command::Energy => vec![0.0, 0.25, 0.75],
            Command::Velocity => vec![0.25, 0.5, 0.75, 0.9, 0.99],
            Command::Verify => vec![0.0],
            _ => vec![0.0, 0.25, 0.5, 0.75],
        };
        let betas = if let Some(v) = get("betas") {
            parse_list("betas", v)?
        } else if let Some(v) = get("beta-sweep") {
            parse_sweep("beta-sweep", v)?.values()
        } else if let Some(v) = get("beta") {
            vec![parse_f64("beta", v)?]
        } else {
            default_betas
        };
        for &beta in &betas {
            FieldConfig::new(b, beta, k, valley)?;
        }

        let alpha_mod = f("alpha-mod", 4.0)?;
        if alpha_mod < 0.0 {
            return Err(bad(
                "alpha-mod",
                &alpha_mod.to_string(),
                "must be non-negative",
            ));
        }
        let phases = match get("phase-sweep") {
            Some(v) => parse_sweep("phase-sweep", v)?.values(),
            None if command == Command::Density
                && mode == DensityMode::Coherent
                && get("phase").is_none() =>
            {
                Sweep {
                    start: 0.0,
                    end: 2.0 * std::f64::consts::PI,
                    points: 129,
                }
                .values()
            }
            None => vec![f("phase", 0.0)?],
        };
        let abs_sweep = get("abs-sweep")
            .map(|v| parse_sweep("abs-sweep", v))
            .transpose()?;
        if let Some(s) = abs_sweep {
            if s.start < 0.0 {
                return Err(bad(
                    "abs-sweep",
                    get("abs-sweep").unwrap_or(""),
                    "|α| must be non-negative",
                ));
            }
        }
        let alpha_axis =
            parse_sweep("alpha-grid", get("alpha-grid").unwrap_or("-4:4:33"))?.values();

        let levels = match get("levels") {
            Some(v) => v
                .split(',')
                .map(|s| parse_usize("levels", s))
                .collect::<CliResult<Vec<_>>>()?,
            None => vec![0, 1, 2],
        };
        let grid = match get("grid") {
            Some(v) => {
                let s = parse_sweep("grid", v)?;
                Some(UniformGrid::new(s.start, s.end, s.points)?)
            }
            None => None,
        };
        let policy = TruncationPolicy::new(f("tol", 1e-12)?, 200)?;

        let out = get("out").map(PathBuf::from);
        let format = match get("format") {
            Some(v) => {
                Format::from_str(v, true).map_err(|_| bad("format", v, "expected csv or json"))?
            }
            None => match out
                .as_deref()
                .and_then(Path::extension)
                .and_then(|e| e.to_str())
            {
                Some("json") => Format::Json,
                _ => Format::Csv,
            },
        };
        let fault = get("inject-fault")
            .map(|v| parse_f64("inject-fault", v))
            .transpose()?;

        let cfg = Self {
            command,
            b,
            k,
            valley,
            betas,
            alpha_mod,
            phases,
            abs_sweep,
            alpha_axis,
            delta: f("delta", 0.0)?,
            levels,
            n_max: u("n-max", 5)?,
            grid,
            mode,
            policy,
            vd: get("vd").map_or(Ok(vec![0.0, 0.5, 1.5]), |v| parse_list("vd", v))?,
            x0: f("x0", 0.0)?,
            y0: f("y0", 0.0)?,
            v0x: f("v0x", 0.0)?,
            v0y: f("v0y", 1.0)?,
            t_max: f("t-max", 6.0 * std::f64::consts::PI)?,
            t_points: u("t-points", 601)?,
            out,
            format,
            fault,
            echo: map.clone(),
        };
        if cfg.t_points < 2 {
            return Err(CliError::Config("`t-points` must be at least 2".into()));
        }
        Ok(cfg)
    }

    pub fn field(&self, beta: f64) -> CliResult<FieldConfig> {
        Ok(FieldConfig::new(self.b, beta, self.k, self.valley)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text() {
        let m = parse_config_text("# comment\nbeta = 0.5\n\nlevels=0,3\n").unwrap();
        assert_eq!(m["beta"], "0.5");
        assert_eq!(m["levels"], "0,3");
        assert!(matches!(
            parse_config_text("nope=1"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            parse_config_text("beta"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "beta=0.25\nk=2\n").unwrap();
        let flags = Flags {
            config: Some(path),
            beta: Some("0.75".into()),
            ..Default::default()
        };
        let c = RunConfig::from_flags(Command::Hur, &flags).unwrap();
        assert_eq!(c.betas, vec![0.75]);
        assert_eq!(c.k, 2.0);
    }

    #[test]
    fn defaults_follow_command() {
        let empty = BTreeMap::new();
        let d = RunConfig::from_map(Command::Density, &empty).unwrap();
        assert_eq!(d.k, 1.0);
        assert_eq!(d.levels, vec![0, 1, 2]);
        let s = RunConfig::from_map(Command::Spectrum, &empty).unwrap();
        assert_eq!(s.betas.len(), 201);
        assert_eq!(*s.betas.last().unwrap(), 0.999);
        let h = RunConfig::from_map(Command::Hur, &empty).unwrap();
        assert_eq!(h.alpha_axis.len(), 33);
    }

    #[test]
    fn rejects_bad_values() {
        let mut m = BTreeMap::new();
        m.insert("beta".to_string(), "1.2".to_string());
        assert!(matches!(
            RunConfig::from_map(Command::Hur, &m),
            Err(CliError::Config(_))
        ));
        let mut m = BTreeMap::new();
        m.insert("grid".to_string(), "5:1:10".to_string());
        assert!(matches!(
            RunConfig::from_map(Command::Density, &m),
            Err(CliError::Config(_))
        ));
        let mut m = BTreeMap::new();
        m.insert("eta".to_string(), "2".to_string());
        assert!(matches!(
            RunConfig::from_map(Command::Hur, &m),
            Err(CliError::Config(_))
        ));
    }
}
