//! Run configuration: flat key-value sections in plain text, parsed in full
//! precision.  Unknown sections or keys are errors; reproducibility beats
//! flexibility.

use crate::CliError;
use std::collections::BTreeMap;
use std::path::PathBuf;
use vorwave::stream::{Branch, FlowSign};
use vorwave::vorticity::VorticityDescriptor;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub ode: f64,
    pub quad: f64,
    pub root: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode: 1e-12, quad: 1e-11, root: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    pub s_offset_min: f64,
    pub s_span: f64,
    pub s_seeds: usize,
    pub tau_cap_factor: f64,
    pub j_max: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { s_offset_min: 1e-6, s_span: 50.0, s_seeds: 2000, tau_cap_factor: 50.0, j_max: 4 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Params {
    pub s: Option<f64>,
    pub h: Option<f64>,
    pub r: Option<f64>,
    pub tau: Option<f64>,
    pub amplitude: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub n_points: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct Dimensional {
    pub q: f64,
    pub g: f64,
    pub r_head: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub json_file: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub vorticity: VorticityDescriptor,
    pub tolerances: Tolerances,
    pub scan: ScanConfig,
    pub branch: Option<Branch>,
    pub params: Params,
    pub dimensional: Option<Dimensional>,
    pub output: OutputConfig,
    /// Raw sections for the report echo.
    pub echo: BTreeMap<String, BTreeMap<String, String>>,
}

fn config_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config(format!("`{field}`: {}", message.into()))
}

fn parse_f64(field: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse::<f64>()
        .map_err(|e| config_err(field, format!("cannot parse `{v}` as a number: {e}")))
}

fn parse_usize(field: &str, v: &str) -> Result<usize, CliError> {
    v.trim()
        .parse::<usize>()
        .map_err(|e| config_err(field, format!("cannot parse `{v}` as an integer: {e}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if sections.contains_key(&name) {
                    return Err(config_err(&name, "duplicate section"));
                }
                sections.insert(name.clone(), BTreeMap::new());
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let Some(section) = &current else {
                return Err(CliError::Config(format!(
                    "line {}: `{line}` appears before any [section]",
                    lineno + 1
                )));
            };
            let entry = sections.get_mut(section).unwrap();
            let key = key.trim().to_string();
            if entry.contains_key(&key) {
                return Err(config_err(&format!("{section}.{key}"), "duplicate key"));
            }
            entry.insert(key, value.trim().to_string());
        }
        Self::from_sections(sections)
    }

    fn from_sections(
        sections: BTreeMap<String, BTreeMap<String, String>>,
    ) -> Result<Self, CliError> {
        for name in sections.keys() {
            if !matches!(
                name.as_str(),
                "vorticity" | "tolerances" | "scan" | "branch" | "params" | "dimensional" | "output"
            ) {
                return Err(config_err(name, "unknown section"));
            }
        }
        let echo = sections.clone();

        let vort = sections
            .get("vorticity")
            .ok_or_else(|| config_err("vorticity", "section is required"))?;
        let vorticity = parse_vorticity(vort)?;

        let mut tolerances = Tolerances::default();
        if let Some(sec) = sections.get("tolerances") {
            for (k, v) in sec {
                match k.as_str() {
                    "ode" => tolerances.ode = parse_f64("tolerances.ode", v)?,
                    "quad" => tolerances.quad = parse_f64("tolerances.quad", v)?,
                    "root" => tolerances.root = parse_f64("tolerances.root", v)?,
                    _ => return Err(config_err(&format!("tolerances.{k}"), "unknown key")),
                }
            }
        }
        for (name, v) in
            [("ode", tolerances.ode), ("quad", tolerances.quad), ("root", tolerances.root)]
        {
            if v.is_nan() || v <= 0.0 {
                return Err(config_err(
                    &format!("tolerances.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }

        let mut scan = ScanConfig::default();
        if let Some(sec) = sections.get("scan") {
            for (k, v) in sec {
                match k.as_str() {
                    "s_offset_min" => scan.s_offset_min = parse_f64("scan.s_offset_min", v)?,
                    "s_span" => scan.s_span = parse_f64("scan.s_span", v)?,
                    "s_seeds" => scan.s_seeds = parse_usize("scan.s_seeds", v)?,
                    "tau_cap_factor" => scan.tau_cap_factor = parse_f64("scan.tau_cap_factor", v)?,
                    "j_max" => scan.j_max = parse_usize("scan.j_max", v)? as u32,
                    _ => return Err(config_err(&format!("scan.{k}"), "unknown key")),
                }
            }
        }
        let scan_ok = scan.s_offset_min > 0.0 && scan.s_offset_min < scan.s_span;
        if !scan_ok {
            return Err(config_err("scan", "requires 0 < s_offset_min < s_span"));
        }
        if scan.tau_cap_factor.is_nan() || scan.tau_cap_factor <= 0.0 {
            return Err(config_err("scan.tau_cap_factor", "must be positive"));
        }

        let branch = match sections.get("branch") {
            None => None,
            Some(sec) => {
                let mut j = None;
                let mut sign = None;
                for (k, v) in sec {
                    match k.as_str() {
                        "j" => j = Some(parse_usize("branch.j", v)? as u32),
                        "sign" => {
                            sign = Some(match v.trim() {
                                "+" => FlowSign::Plus,
                                "-" => FlowSign::Minus,
                                other => {
                                    return Err(config_err(
                                        "branch.sign",
                                        format!("expected `+` or `-`, got `{other}`"),
                                    ))
                                }
                            })
                        }
                        _ => return Err(config_err(&format!("branch.{k}"), "unknown key")),
                    }
                }
                Some(Branch::new(
                    j.ok_or_else(|| config_err("branch.j", "missing"))?,
                    sign.ok_or_else(|| config_err("branch.sign", "missing"))?,
                ))
            }
        };

        let mut params = Params::default();
        if let Some(sec) = sections.get("params") {
            for (k, v) in sec {
                match k.as_str() {
                    "s" => params.s = Some(parse_f64("params.s", v)?),
                    "h" => params.h = Some(parse_f64("params.h", v)?),
                    "r" => params.r = Some(parse_f64("params.r", v)?),
                    "tau" => params.tau = Some(parse_f64("params.tau", v)?),
                    "amplitude" => params.amplitude = Some(parse_f64("params.amplitude", v)?),
                    "nx" => params.nx = Some(parse_usize("params.nx", v)?),
                    "ny" => params.ny = Some(parse_usize("params.ny", v)?),
                    "s_min" => params.s_min = Some(parse_f64("params.s_min", v)?),
                    "s_max" => params.s_max = Some(parse_f64("params.s_max", v)?),
                    "n_points" => params.n_points = Some(parse_usize("params.n_points", v)?),
                    _ => return Err(config_err(&format!("params.{k}"), "unknown key")),
                }
            }
        }
        if let (Some(lo), Some(hi)) = (params.s_min, params.s_max) {
            if lo >= hi || lo.is_nan() || hi.is_nan() {
                return Err(config_err("params", format!("s_min = {lo} must be below s_max = {hi}")));
            }
        }

        let dimensional = match sections.get("dimensional") {
            None => None,
            Some(sec) => {
                let mut q = None;
                let mut g = None;
                let mut r_head = None;
                for (k, v) in sec {
                    match k.as_str() {
                        "Q" => q = Some(parse_f64("dimensional.Q", v)?),
                        "g" => g = Some(parse_f64("dimensional.g", v)?),
                        "R" => r_head = Some(parse_f64("dimensional.R", v)?),
                        _ => return Err(config_err(&format!("dimensional.{k}"), "unknown key")),
                    }
                }
                let q = q.ok_or_else(|| config_err("dimensional.Q", "missing"))?;
                let g = g.ok_or_else(|| config_err("dimensional.g", "missing"))?;
                if q == 0.0 {
                    return Err(config_err("dimensional.Q", "must be nonzero"));
                }
                if g.is_nan() || g <= 0.0 {
                    return Err(config_err("dimensional.g", "must be positive"));
                }
                Some(Dimensional { q, g, r_head })
            }
        };

        let mut output = OutputConfig::default();
        if let Some(sec) = sections.get("output") {
            for (k, v) in sec {
                match k.as_str() {
                    "dir" => output.dir = Some(PathBuf::from(v.trim())),
                    "formats" => {
                        for fmt in v.split(',') {
                            match fmt.trim() {
                                "csv" => output.csv = true,
                                "json" => output.json_file = true,
                                other => {
                                    return Err(config_err(
                                        "output.formats",
                                        format!("unknown format `{other}`"),
                                    ))
                                }
                            }
                        }
                    }
                    _ => return Err(config_err(&format!("output.{k}"), "unknown key")),
                }
            }
        }
        if (output.csv || output.json_file) && output.dir.is_none() {
            return Err(config_err("output.dir", "required when formats are requested"));
        }

        Ok(Self { vorticity, tolerances, scan, branch, params, dimensional, output, echo })
    }

    /// Applies `VORWAVE_TOL_*` environment overrides, then installs the
    /// effective tolerances process-wide.
    pub fn apply_tolerances(&mut self) -> Result<(), CliError> {
        fn env_override(var: &str, current: f64) -> Result<f64, CliError> {
            match std::env::var(var) {
                Err(_) => Ok(current),
                Ok(v) => {
                    let parsed = parse_f64(var, &v)?;
                    if parsed.is_nan() || parsed <= 0.0 {
                        return Err(config_err(var, "must be positive"));
                    }
                    Ok(parsed)
                }
            }
        }
        self.tolerances.ode = env_override("VORWAVE_TOL_ODE", self.tolerances.ode)?;
        self.tolerances.quad = env_override("VORWAVE_TOL_QUAD", self.tolerances.quad)?;
        self.tolerances.root = env_override("VORWAVE_TOL_ROOT", self.tolerances.root)?;
        vorwave::numerics::tol::set_overrides(
            Some(self.tolerances.ode),
            Some(self.tolerances.quad),
            Some(self.tolerances.root),
        );
        Ok(())
    }
}

fn parse_vorticity(sec: &BTreeMap<String, String>) -> Result<VorticityDescriptor, CliError> {
    let kind = sec
        .get("kind")
        .ok_or_else(|| config_err("vorticity.kind", "missing"))?
        .trim();
    let allowed: &[&str] = match kind {
        "zero" => &["kind"],
        "constant" | "linear" => &["kind", "b"],
        "polynomial" => &["kind", "coeffs"],
        "tabulated" => &["kind", "grid"],
        other => {
            return Err(config_err("vorticity.kind", format!("unknown kind `{other}`")));
        }
    };
    for k in sec.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(config_err(
                &format!("vorticity.{k}"),
                format!("not applicable for kind `{kind}`"),
            ));
        }
    }
    match kind {
        "zero" => Ok(VorticityDescriptor::Zero),
        "constant" => {
            let b = parse_f64(
                "vorticity.b",
                sec.get("b").ok_or_else(|| config_err("vorticity.b", "missing"))?,
            )?;
            Ok(VorticityDescriptor::Constant { b })
        }
        "linear" => {
            let b = parse_f64(
                "vorticity.b",
                sec.get("b").ok_or_else(|| config_err("vorticity.b", "missing"))?,
            )?;
            Ok(VorticityDescriptor::Linear { b })
        }
        "polynomial" => {
            let raw = sec
                .get("coeffs")
                .ok_or_else(|| config_err("vorticity.coeffs", "missing"))?;
            let coeffs = raw
                .split(',')
                .map(|c| parse_f64("vorticity.coeffs", c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(VorticityDescriptor::Polynomial { coeffs })
        }
        "tabulated" => {
            let raw = sec.get("grid").ok_or_else(|| config_err("vorticity.grid", "missing"))?;
            let mut grid = Vec::new();
            for pair in raw.split(',') {
                let (t, w) = pair
                    .split_once(':')
                    .ok_or_else(|| config_err("vorticity.grid", format!("expected `t:w`, got `{pair}`")))?;
                grid.push((parse_f64("vorticity.grid", t)?, parse_f64("vorticity.grid", w)?));
            }
            Ok(VorticityDescriptor::Tabulated { grid })
        }
        _ => unreachable!(),
    }
}
