//! Flat `key = value` run configuration.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::fields::Grid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// 2D density, exactly self-consistent 2D horizontal subsystem.
    Constrained,
    /// 3D density, x3-averaged horizontal pressure gradient.
    Free,
    /// Steady Taylor–Green horizontal flow, only u3 evolves.
    KinematicTg,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constrained" => Ok(Mode::Constrained),
            "free" => Ok(Mode::Free),
            "kinematic_tg" => Ok(Mode::KinematicTg),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Constrained => "constrained",
            Mode::Free => "free",
            Mode::KinematicTg => "kinematic_tg",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Isothermal sound speed, `Π = c² ln ρ`.
    pub c: f64,
    pub nu: f64,
    pub cfl: f64,
    pub t_end: f64,
    /// Time steps between snapshots.
    pub snapshot_stride: usize,
    pub seed: u64,
    pub kmax: i32,
    pub amplitude: f64,
    pub dims: [usize; 3],
    pub length: [f64; 3],
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Constrained,
            c: 1.0,
            nu: 0.0,
            cfl: 0.4,
            t_end: 1.0,
            snapshot_stride: 4,
            seed: 0,
            kmax: 2,
            amplitude: 0.1,
            dims: [32, 32, 32],
            length: [TAU; 3],
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value for `{key}`: `{v}`")))
}

fn parse_triple<T: FromStr + Copy>(key: &str, v: &str) -> Result<[T; 3]> {
    let parts: Vec<T> = v
        .split(',')
        .map(|p| parse_num(key, p))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [x] => Ok([*x; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(Error::Config(format!(
            "`{key}` takes one value or three comma-separated values"
        ))),
    }
}

impl SolverConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults, unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SolverConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mode" => cfg.mode = value.parse()?,
                "c" => cfg.c = parse_num(key, value)?,
                "nu" => cfg.nu = parse_num(key, value)?,
                "cfl" => cfg.cfl = parse_num(key, value)?,
                "t_end" => cfg.t_end = parse_num(key, value)?,
                "snapshot_stride" => cfg.snapshot_stride = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "kmax" => cfg.kmax = parse_num(key, value)?,
                "amplitude" => cfg.amplitude = parse_num(key, value)?,
                "dims" => cfg.dims = parse_triple(key, value)?,
                "length" => cfg.length = parse_triple(key, value)?,
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return fail("c must be positive");
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return fail("nu must be non-negative");
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return fail("cfl must lie in (0, 1)");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return fail("t_end must be non-negative");
        }
        if self.snapshot_stride == 0 {
            return fail("snapshot_stride must be at least 1");
        }
        if self.kmax < 1 {
            return fail("kmax must be at least 1");
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return fail("amplitude must be non-negative");
        }
        self.grid3().map(|_| ())
    }

    pub fn grid3(&self) -> Result<Grid> {
        Grid::new(self.dims.to_vec(), self.length.to_vec())
    }

    /// Canonical text form; parses back to the same config.
    pub fn to_text(&self) -> String {
        let [d0, d1, d2] = self.dims;
        let [l0, l1, l2] = self.length;
        format!(
            "mode = {}\nc = {:?}\nnu = {:?}\ncfl = {:?}\nt_end = {:?}\nsnapshot_stride = {}\nseed = {}\nkmax = {}\namplitude = {:?}\ndims = {d0},{d1},{d2}\nlength = {l0:?},{l1:?},{l2:?}\n",
            self.mode, self.c, self.nu, self.cfl, self.t_end, self.snapshot_stride, self.seed, self.kmax, self.amplitude
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let cfg = SolverConfig::parse(
            "# run\nmode = kinematic_tg\nc=2\ndims = 32, 32, 16\nt_end = 0.5 # short\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::KinematicTg);
        assert_eq!(cfg.c, 2.0);
        assert_eq!(cfg.dims, [32, 32, 16]);
        assert_eq!(cfg.length, [TAU; 3]);
        assert_eq!(SolverConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(SolverConfig::parse("dims = 64").unwrap().dims, [64; 3]);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "speed = 1",
            "c = -1",
            "cfl = 1.5",
            "dims = 4",
            "mode = turbulent",
            "dims = 8,8",
            "nonsense",
        ] {
            assert!(
                matches!(
                    SolverConfig::parse(text),
                    Err(Error::Config(_)) | Err(Error::GridTooSmall { .. })
                ),
                "{text}"
            );
        }
    }
}
