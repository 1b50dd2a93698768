//! Run configuration: defaults, the `--paper` preset, a flat `key = value`
//! file and command-line flags, applied in that order.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Perturb,
    Dynamics,
    Ramp,
    Symmetry,
    Validate,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Perturb => "perturb",
            Command::Dynamics => "dynamics",
            Command::Ramp => "ramp",
            Command::Symmetry => "symmetry",
            Command::Validate => "validate",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "spectrum" => Command::Spectrum,
            "perturb" => Command::Perturb,
            "dynamics" => Command::Dynamics,
            "ramp" => Command::Ramp,
            "symmetry" => Command::Symmetry,
            "validate" => Command::Validate,
            _ => return Err(CliError::Config(format!("unknown command '{s}'"))),
        })
    }
}

/// Initial state for `dynamics`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initial {
    First,
    Second,
    Ground,
}

impl Initial {
    fn as_str(&self) -> &'static str {
        match self {
            Initial::First => "1",
            Initial::Second => "2",
            Initial::Ground => "ground",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "1" => Initial::First,
            "2" => Initial::Second,
            "ground" => Initial::Ground,
            _ => return Err(CliError::Config(format!("initial state must be 1, 2 or ground, got '{s}'"))),
        })
    }
}

/// Inclusive grid `start, start + step, ...` up to `stop`; `step = 0`
/// means the single value `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn single(x: f64) -> Self {
        Self { start: x, stop: x, step: 0.0 }
    }

    pub fn is_single(&self) -> bool {
        self.step == 0.0
    }

    pub fn values(&self) -> Vec<f64> {
        if self.is_single() {
            return vec![self.start];
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start + k as f64 * self.step).collect()
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let g = match parts.as_slice() {
            [x] => Grid::single(parse_scalar(x)?),
            [a, b, c] => Grid { start: parse_scalar(a)?, stop: parse_scalar(b)?, step: parse_scalar(c)? },
            _ => return Err(CliError::Config(format!("expected a value or start:stop:step, got '{s}'"))),
        };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.is_single() {
            return Ok(());
        }
        let span = self.stop - self.start;
        if span == 0.0 || span.signum() != self.step.signum() {
            return Err(CliError::Config(format!("empty grid {self}")));
        }
        if span / self.step > 1e6 {
            return Err(CliError::Config(format!("grid {self} has too many points")));
        }
        Ok(())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{:?}", self.start)
        } else {
            write!(f, "{:?}:{:?}:{:?}", self.start, self.stop, self.step)
        }
    }
}

/// A number, or a multiple of `pi` such as `-pi`, `3*pi/4`, `pi/64`.
pub fn parse_scalar(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::Config(format!("not a number: '{s}'"));
    let x = if let Ok(x) = s.parse::<f64>() {
        x
    } else {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, s),
        };
        let (num, den) = match body.split_once('/') {
            Some((n, d)) => (n, d.trim().parse::<f64>().map_err(|_| bad())?),
            None => (body, 1.0),
        };
        let k = match num.trim() {
            "pi" => 1.0,
            other => other.strip_suffix("*pi").ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())?,
        };
        sign * k * PI / den
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn parse_bool(s: &str) -> Result<bool, CliError> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Config(format!("expected true or false, got '{s}'"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub v: f64,
    pub chi: f64,
    pub omega: f64,
    pub f: f64,
    pub a_over_omega: Grid,
    pub phi: Grid,
    /// Fixed Fourier cutoff; `None` adapts it.
    pub n: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Integrator step; `None` is one 500th of the period.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub alpha: f64,
    pub t_f: f64,
    pub dt_avg: f64,
    pub init: Initial,
    pub validate: bool,
    pub out: Option<PathBuf>,
    pub json: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            v: 1.0,
            chi: 0.0,
            omega: 10.0,
            f: 0.25,
            a_over_omega: Grid::single(2.4),
            phi: Grid::single(0.0),
            n: None,
            tol: 1e-10,
            max_iter: 200,
            damping: 0.5,
            dt: None,
            t_end: 200.0,
            alpha: 0.01,
            t_f: 2400.0,
            dt_avg: 400.0,
            init: Initial::First,
            validate: false,
            out: None,
            json: false,
        }
    }

    /// Drive and system values used for the figures of the original study.
    pub fn apply_paper(&mut self) {
        self.f = 0.25;
        self.omega = 10.0;
        self.v = 1.0;
        self.chi = 0.4;
        self.alpha = 0.01;
        self.t_f = 2400.0;
        self.dt_avg = 400.0;
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        let num = |v: &str| parse_scalar(v);
        let count = |v: &str| v.parse::<usize>().map_err(|_| CliError::Config(format!("{key}: not a count: '{v}'")));
        match key {
            "command" => self.command = Command::parse(value)?,
            "v" => self.v = num(value)?,
            "chi" => self.chi = num(value)?,
            "omega" => self.omega = num(value)?,
            "f" => self.f = num(value)?,
            "A-over-omega" => self.a_over_omega = Grid::parse(value)?,
            "phi" => self.phi = Grid::parse(value)?,
            "N" => self.n = Some(count(value)?),
            "tol" => self.tol = num(value)?,
            "max-iter" => self.max_iter = count(value)?,
            "damping" => self.damping = num(value)?,
            "dt" => self.dt = Some(num(value)?),
            "t-end" => self.t_end = num(value)?,
            "alpha" => self.alpha = num(value)?,
            "tf" => self.t_f = num(value)?,
            "dt-avg" => self.dt_avg = num(value)?,
            "init" => self.init = Initial::parse(value)?,
            "validate" => self.validate = parse_bool(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "json" => self.json = parse_bool(value)?,
            "paper" => {
                if parse_bool(value)? {
                    self.apply_paper()
                }
            }
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Apply `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Every setting as ordered `(key, value)` pairs.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("command", self.command.as_str().to_string()),
            ("v", format!("{:?}", self.v)),
            ("chi", format!("{:?}", self.chi)),
            ("omega", format!("{:?}", self.omega)),
            ("f", format!("{:?}", self.f)),
            ("A-over-omega", self.a_over_omega.to_string()),
            ("phi", self.phi.to_string()),
        ];
        if let Some(n) = self.n {
            out.push(("N", n.to_string()));
        }
        out.push(("tol", format!("{:?}", self.tol)));
        out.push(("max-iter", self.max_iter.to_string()));
        out.push(("damping", format!("{:?}", self.damping)));
        if let Some(dt) = self.dt {
            out.push(("dt", format!("{dt:?}")));
        }
        out.push(("t-end", format!("{:?}", self.t_end)));
        out.push(("alpha", format!("{:?}", self.alpha)));
        out.push(("tf", format!("{:?}", self.t_f)));
        out.push(("dt-avg", format!("{:?}", self.dt_avg)));
        out.push(("init", self.init.as_str().to_string()));
        out.push(("validate", self.validate.to_string()));
        if let Some(p) = &self.out {
            out.push(("out", p.display().to_string()));
        }
        out.push(("json", self.json.to_string()));
        out
    }

    #[cfg(test)]
    pub fn serialize(&self) -> String {
        self.pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn check(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if !(self.v > 0.0) {
            return err(format!("v must be positive, got {}", self.v));
        }
        if !(self.chi >= 0.0) {
            return err(format!("chi must be non-negative, got {}", self.chi));
        }
        if !(self.omega > 0.0) {
            return err(format!("omega must be positive, got {}", self.omega));
        }
        if !(self.tol > 0.0) {
            return err(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return err(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if self.max_iter == 0 {
            return err("max-iter must be positive".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return err(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.t_end > 0.0 && self.dt_avg > 0.0 && self.t_f >= 0.0 && self.alpha >= 0.0) {
            return err("t-end and dt-avg must be positive, tf and alpha non-negative".into());
        }
        if self.n == Some(0) {
            return err("N must be positive".into());
        }
        self.a_over_omega.check()?;
        self.phi.check()?;
        if self.a_over_omega.values().iter().any(|x| *x < 0.0) {
            return err("A-over-omega must be non-negative".into());
        }
        let single = |g: &Grid, name: &str| -> Result<(), CliError> {
            if g.is_single() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{} takes a single {name}", self.command.as_str())))
            }
        };
        match self.command {
            Command::Spectrum => single(&self.phi, "phi"),
            Command::Dynamics => single(&self.phi, "phi").and(single(&self.a_over_omega, "A-over-omega")),
            Command::Symmetry => single(&self.a_over_omega, "A-over-omega"),
            Command::Perturb | Command::Ramp | Command::Validate => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalars_with_pi() {
        assert_eq!(parse_scalar("-pi").unwrap(), -PI);
        assert_eq!(parse_scalar("3*pi/4").unwrap(), 0.75 * PI);
        assert_eq!(parse_scalar("pi/64").unwrap(), PI / 64.0);
        assert_eq!(parse_scalar("2.5").unwrap(), 2.5);
        assert!(parse_scalar("pie").is_err());
        assert!(parse_scalar("inf").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::parse("2:2.8:0.1").unwrap().values().len(), 9);
        assert_eq!(Grid::parse("-pi:pi:pi/64").unwrap().values().len(), 129);
        assert_eq!(Grid::parse("2.4").unwrap().values(), vec![2.4]);
        assert_eq!(Grid::parse("1:0:-0.25").unwrap().values(), vec![1.0, 0.75, 0.5, 0.25, 0.0]);
        assert!(Grid::parse("2:1:0.1").is_err());
        assert!(Grid::parse("1:1:0.1").is_err());
        assert!(Grid::parse("1:2").is_err());
    }

    #[test]
    fn file_and_preset() {
        let mut c = RunConfig::new(Command::Ramp);
        c.apply_text("# comment\npaper = true\n\nchi = 0.1\n").unwrap();
        assert_eq!(c.chi, 0.1);
        assert_eq!(c.t_f, 2400.0);
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("chi 0.1").is_err());
    }

    #[test]
    fn ranges_only_where_allowed() {
        let mut c = RunConfig::new(Command::Dynamics);
        c.set("phi", "0:1:0.5").unwrap();
        assert!(c.check().is_err());
        c.command = Command::Ramp;
        assert!(c.check().is_ok());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e3..1e3f64, Just(0.0), 1e-12..1e-6f64]
    }

    fn grid() -> impl Strategy<Value = Grid> {
        prop_oneof![
            finite().prop_map(Grid::single),
            (finite(), 1e-3..10.0f64, 1usize..100).prop_map(|(a, s, n)| Grid { start: a, stop: a + s * n as f64, step: s }),
        ]
    }

    fn command() -> impl Strategy<Value = Command> {
        prop_oneof![
            Just(Command::Spectrum),
            Just(Command::Perturb),
            Just(Command::Dynamics),
            Just(Command::Ramp),
            Just(Command::Symmetry),
            Just(Command::Validate),
        ]
    }

    prop_compose! {
        fn config()(
            command in command(), v in finite(), chi in finite(), a in grid(), phi in grid(),
            n in proptest::option::of(1usize..200), tol in finite(), max_iter in 1usize..1000,
            dt in proptest::option::of(finite()), t_end in finite(), alpha in finite(),
            init in prop_oneof![Just(Initial::First), Just(Initial::Second), Just(Initial::Ground)],
            validate in any::<bool>(), json in any::<bool>(), out in proptest::option::of("[a-z]{1,8}\\.csv"),
        ) -> RunConfig {
            RunConfig {
                command, v, chi, omega: 10.0, f: 0.25, a_over_omega: a, phi, n, tol, max_iter, damping: 0.5,
                dt, t_end, alpha, t_f: 2400.0, dt_avg: 400.0, init, validate, out: out.map(PathBuf::from), json,
            }
        }
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(c in config()) {
            let mut back = RunConfig::new(Command::Spectrum);
            back.apply_text(&c.serialize()).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.serialize(), c.serialize());
        }
    }
}
