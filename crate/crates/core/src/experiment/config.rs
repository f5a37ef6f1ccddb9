use std::path::{Path, PathBuf};

use ini::Ini;

use crate::bounds::DEFAULT_GRID;
use crate::diff::{Algorithm, DiffState, GainConfig, HollowayParams, LevantParams, SeeberGains};
use crate::error::{Error, Result};
use crate::math::TbgParams;
use crate::signal::{self, SignalSpec};
use crate::sim::{apply_gain_cap, Cap, SimConfig, DEFAULT_DT};

/// One experiment: a signal, a set of algorithms and a list of initial
/// conditions, run as a full grid of cells.
///
/// File format; only `signal`, `ics`, `tc`, `alpha`, `script_m` and `horizon`
/// are required:
///
/// ```text
/// [experiment]
/// name = example1
/// signal = linear
/// algorithms = predefined, holloway
/// ics = 10, 100, 10000
///
/// [signal]
/// beta = 2
/// m = 1
///
/// [gains]
/// t0 = 0
/// tc = 1
/// alpha = 1
/// script_m = 6
/// lambda0 = 1.1
/// lambda1 = 1.5
/// mu0 = 2
/// mu1 = 3
///
/// [baselines]
/// seeber_l = 1
/// holloway_l1 = 1
/// holloway_l2 = 1
/// holloway_m = 1
/// holloway_alpha = 1
///
/// [sim]
/// dt = 2e-4
/// horizon = 3
/// record_stride = 1
/// cap_kappa_max = 10
/// stiffness_guard = true
/// grid = 100000
///
/// [output]
/// dir = out/example1
/// ```
///
/// `signal` is one of `linear`, `sine`, `chirp`; `beta` applies to `chirp`
/// only and `m` overrides the built-in `M`. An ic is either one value used for
/// both `z0` and `z1`, or `z0:z1`. `seeber_l` defaults to `L(0)`. At most one
/// of `cap_kappa_max` and `cap_t_star` may be set. `grid` is the size of the
/// bound-validation grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub signal: String,
    pub algorithms: Vec<Algorithm>,
    pub ics: Vec<DiffState>,
    pub beta: Option<f64>,
    pub m: Option<f64>,
    pub tbg: TbgParams,
    pub script_m: f64,
    pub levant: LevantParams,
    pub seeber_l: Option<f64>,
    pub holloway: HollowayParams,
    pub dt: f64,
    pub horizon: f64,
    pub record_stride: usize,
    pub cap: Option<Cap>,
    pub stiffness_guard: bool,
    pub grid: usize,
    pub out_dir: Option<PathBuf>,
}

struct Section<'a> {
    name: &'static str,
    props: Option<&'a ini::Properties>,
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn bad(&self, key: &str, detail: impl Into<String>) -> Error {
        Error::Parse {
            location: format!("[{}] {key}", self.name),
            detail: detail.into(),
        }
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| v.parse::<f64>().map_err(|_| self.bad(key, format!("'{v}' is not a number"))))
            .transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| self.bad(key, "missing"))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.raw(key)
            .map(|v| v.parse::<usize>().map_err(|_| self.bad(key, format!("'{v}' is not a count"))))
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => Err(self.bad(key, format!("'{v}' is not a boolean"))),
        }
    }
}

fn parse_ic(s: &str) -> Option<DiffState> {
    match s.split_once(':') {
        Some((a, b)) => Some(DiffState::new(a.trim().parse().ok()?, b.trim().parse().ok()?)),
        None => {
            let v = s.trim().parse().ok()?;
            Some(DiffState::new(v, v))
        }
    }
}

fn fmt_ic(ic: &DiffState) -> String {
    if ic.z0.to_bits() == ic.z1.to_bits() {
        format!("{}", ic.z0)
    } else {
        format!("{}:{}", ic.z0, ic.z1)
    }
}

/// Label of an initial condition used in file names and tables.
pub fn ic_label(ic: &DiffState) -> String {
    fmt_ic(ic).replace(':', "_")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Parse {
            location: "config".into(),
            detail: e.to_string(),
        })?;
        let sec = |name: &'static str| Section {
            name,
            props: ini.section(Some(name)),
        };
        let exp = sec("experiment");
        if exp.props.is_none() {
            return Err(exp.bad("", "section missing"));
        }
        let name = exp.raw("name").unwrap_or("experiment").to_string();
        let signal = exp.raw("signal").ok_or_else(|| exp.bad("signal", "missing"))?.to_string();
        let algorithms = exp
            .raw("algorithms")
            .unwrap_or("predefined")
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Algorithm>>>()?;
        let ics = exp
            .raw("ics")
            .ok_or_else(|| exp.bad("ics", "missing"))?
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_ic(s).ok_or_else(|| exp.bad("ics", format!("'{}' is not an initial condition", s.trim()))))
            .collect::<Result<Vec<_>>>()?;

        let sig = sec("signal");
        let g = sec("gains");
        let lp_default = LevantParams::default();
        let base = sec("baselines");
        let hp_default = HollowayParams::default();
        let sim = sec("sim");
        let cap = match (sim.f64("cap_kappa_max")?, sim.f64("cap_t_star")?) {
            (Some(_), Some(_)) => return Err(sim.bad("cap_kappa_max", "cap_kappa_max and cap_t_star are exclusive")),
            (Some(k), None) => Some(Cap::KappaMax(k)),
            (None, Some(ts)) => Some(Cap::TStar(ts)),
            (None, None) => None,
        };
        let cfg = Self {
            name,
            signal,
            algorithms,
            ics,
            beta: sig.f64("beta")?,
            m: sig.f64("m")?,
            tbg: TbgParams {
                t0: g.f64_or("t0", 0.0)?,
                tc: g.f64_req("tc")?,
                alpha: g.f64_req("alpha")?,
            },
            script_m: g.f64_req("script_m")?,
            levant: LevantParams {
                lambda0: g.f64_or("lambda0", lp_default.lambda0)?,
                lambda1: g.f64_or("lambda1", lp_default.lambda1)?,
                mu0: g.f64_or("mu0", lp_default.mu0)?,
                mu1: g.f64_or("mu1", lp_default.mu1)?,
            },
            seeber_l: base.f64("seeber_l")?,
            holloway: HollowayParams {
                l1: base.f64_or("holloway_l1", hp_default.l1)?,
                l2: base.f64_or("holloway_l2", hp_default.l2)?,
                m: base.f64_or("holloway_m", hp_default.m)?,
                alpha: base.f64_or("holloway_alpha", hp_default.alpha)?,
            },
            dt: sim.f64_or("dt", DEFAULT_DT)?,
            horizon: sim.f64_req("horizon")?,
            record_stride: sim.usize_or("record_stride", 1)?,
            cap,
            stiffness_guard: sim.bool_or("stiffness_guard", true)?,
            grid: sim.usize_or("grid", DEFAULT_GRID)?,
            out_dir: sec("output").raw("dir").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Checks ids, the ic list and every parameter group.
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms listed".into()));
        }
        if self.ics.is_empty() {
            return Err(Error::Config("ic list is empty".into()));
        }
        if self.grid < 2 {
            return Err(Error::Config("grid must have at least 2 points".into()));
        }
        if let Some(m) = self.m {
            if !(m >= 0.0) {
                return Err(Error::Config(format!("M = {m} must be >= 0")));
            }
        }
        let gc = self.gain_config()?;
        let sc = self.sim_config(self.ics[0]);
        sc.validate(&gc)?;
        apply_gain_cap(&gc, &sc).map(|_| ())
    }

    /// Canonical text form; `parse(to_ini_string(c)) == c`.
    pub fn to_ini_string(&self) -> String {
        let mut ini = Ini::new();
        ini.with_section(Some("experiment"))
            .set("name", self.name.as_str())
            .set("signal", self.signal.as_str())
            .set(
                "algorithms",
                self.algorithms.iter().map(|a| a.id()).collect::<Vec<_>>().join(", "),
            )
            .set("ics", self.ics.iter().map(fmt_ic).collect::<Vec<_>>().join(", "));
        if self.beta.is_some() || self.m.is_some() {
            let mut s = ini.with_section(Some("signal"));
            if let Some(b) = self.beta {
                s.set("beta", b.to_string());
            }
            if let Some(m) = self.m {
                s.set("m", m.to_string());
            }
        }
        ini.with_section(Some("gains"))
            .set("t0", self.tbg.t0.to_string())
            .set("tc", self.tbg.tc.to_string())
            .set("alpha", self.tbg.alpha.to_string())
            .set("script_m", self.script_m.to_string())
            .set("lambda0", self.levant.lambda0.to_string())
            .set("lambda1", self.levant.lambda1.to_string())
            .set("mu0", self.levant.mu0.to_string())
            .set("mu1", self.levant.mu1.to_string());
        {
            let mut s = ini.with_section(Some("baselines"));
            if let Some(l) = self.seeber_l {
                s.set("seeber_l", l.to_string());
            }
            s.set("holloway_l1", self.holloway.l1.to_string())
                .set("holloway_l2", self.holloway.l2.to_string())
                .set("holloway_m", self.holloway.m.to_string())
                .set("holloway_alpha", self.holloway.alpha.to_string());
        }
        {
            let mut s = ini.with_section(Some("sim"));
            s.set("dt", self.dt.to_string())
                .set("horizon", self.horizon.to_string())
                .set("record_stride", self.record_stride.to_string());
            match self.cap {
                Some(Cap::KappaMax(k)) => {
                    s.set("cap_kappa_max", k.to_string());
                }
                Some(Cap::TStar(ts)) => {
                    s.set("cap_t_star", ts.to_string());
                }
                None => {}
            }
            s.set("stiffness_guard", self.stiffness_guard.to_string())
                .set("grid", self.grid.to_string());
        }
        if let Some(d) = &self.out_dir {
            ini.with_section(Some("output")).set("dir", d.display().to_string());
        }
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ini output is UTF-8")
    }

    /// The built-in signal with any `M` override applied.
    pub fn signal_spec(&self) -> Result<SignalSpec> {
        let s = signal::builtin(&self.signal, self.beta)?;
        Ok(match self.m {
            Some(m) => {
                let b = s.bound.clone().with_m(m);
                s.with_bound(b)
            }
            None => s,
        })
    }

    pub fn gain_config(&self) -> Result<GainConfig> {
        let s = self.signal_spec()?;
        let mut gc = GainConfig::new(self.tbg, self.script_m, s.bound.clone())?
            .with_levant(self.levant)?
            .with_holloway(self.holloway)?;
        if let Some(l) = self.seeber_l {
            gc = gc.with_seeber(SeeberGains::from_bound(l, self.tbg.tc)?);
        }
        Ok(gc)
    }

    pub fn sim_config(&self, ic: DiffState) -> SimConfig {
        SimConfig {
            dt: self.dt,
            horizon: self.horizon,
            ic,
            cap: self.cap,
            record_stride: self.record_stride,
            stiffness_guard: self.stiffness_guard,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = "
[experiment]
name = ex1
signal = linear
algorithms = predefined, holloway
ics = 10, 100, 1e4

[gains]
tc = 1
alpha = 1
script_m = 6

[sim]
horizon = 3
cap_kappa_max = 10
";

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse(EX1).unwrap();
        assert_eq!(c.algorithms, vec![Algorithm::Predefined, Algorithm::Holloway]);
        assert_eq!(c.ics.len(), 3);
        assert_eq!(c.ics[2], DiffState::new(1e4, 1e4));
        assert_eq!(c.dt, DEFAULT_DT);
        assert_eq!(c.cap, Some(Cap::KappaMax(10.0)));
        assert_eq!(c.levant, LevantParams::default());
        assert!(c.stiffness_guard);
        assert_eq!(c.out_dir, None);
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::parse(EX1).unwrap();
        let text = c.to_ini_string();
        let c2 = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(c, c2);
        assert_eq!(text, c2.to_ini_string());
    }

    #[test]
    fn asymmetric_ic() {
        let c = ExperimentConfig::parse(&EX1.replace("ics = 10, 100, 1e4", "ics = 1:-2")).unwrap();
        assert_eq!(c.ics, vec![DiffState::new(1.0, -2.0)]);
        assert_eq!(ic_label(&c.ics[0]), "1_-2");
    }

    #[test]
    fn rejects_bad_input() {
        for (from, to) in [
            ("signal = linear", "signal = square"),
            ("algorithms = predefined, holloway", "algorithms = magic"),
            ("ics = 10, 100, 1e4", "ics = "),
            ("ics = 10, 100, 1e4", "ics = ten"),
            ("tc = 1", "tc = -1"),
            ("script_m = 6", "script_m = x"),
            ("cap_kappa_max = 10", "cap_kappa_max = 10\ncap_t_star = 0.5"),
            ("cap_kappa_max = 10", "cap_kappa_max = 0.5"),
            ("horizon = 3", "horizon = 0"),
        ] {
            let text = EX1.replace(from, to);
            assert!(ExperimentConfig::parse(&text).is_err(), "{to}");
        }
        assert!(ExperimentConfig::parse("[gains]\ntc = 1").is_err());
    }
}
