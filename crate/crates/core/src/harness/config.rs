//! Flat `key = value` configuration files.
//!
//! ```text
//! # Experiment 1 at s = 1/2
//! s = 0.5
//! m = 2
//! cfl = cfl1
//! datum = explicit
//! t0 = 1
//! R = 0.5
//! T = 1
//! ladder = 2^-3, 2^-4, 2^-5
//! reference = analytic
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use super::{Reference, RunConfig};
use crate::analytic::{ExplicitSolution, InitialDatum};
use crate::oplib::DEFAULT_EPS_TAIL;
use crate::scheme::{CflMode, DEFAULT_SAFETY};
use crate::{Error, Result};

/// Parses `0.125`, `1/8` or `2^-3`.
pub fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Some((base, exp)) = t.split_once('^') {
        let b: f64 = base.trim().parse().ok()?;
        let e: f64 = exp.trim().parse().ok()?;
        return Some(b.powf(e));
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: f64 = num.trim().parse().ok()?;
        let d: f64 = den.trim().parse().ok()?;
        return Some(n / d);
    }
    t.parse().ok()
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: n + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = k.trim().to_string();
            if map.insert(key.clone(), (n + 1, v.trim().to_string())).is_some() {
                return Err(Error::Config {
                    line: n + 1,
                    msg: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => parse_real(&v).map(Some).ok_or_else(|| Error::Config {
                line,
                msg: format!("'{key}': cannot parse '{v}' as a number"),
            }),
        }
    }

    fn real_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                if v.is_empty() {
                    return Ok(Some(Vec::new()));
                }
                v.split(',')
                    .map(|item| {
                        parse_real(item).ok_or_else(|| Error::Config {
                            line,
                            msg: format!("'{key}': cannot parse '{item}'"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Some)
            }
        }
    }

    fn pairs(&mut self, key: &str) -> Result<Option<Vec<(f64, f64)>>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|item| {
                    let bad = || Error::Config {
                        line,
                        msg: format!("'{key}': expected 'shift:weight', got '{item}'"),
                    };
                    let (a, b) = item.split_once(':').ok_or_else(bad)?;
                    Ok((parse_real(a).ok_or_else(bad)?, parse_real(b).ok_or_else(bad)?))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }
}

fn parse_datum(e: &mut Entries, prefix: &str, s: f64) -> Result<Option<InitialDatum>> {
    let key = |k: &str| format!("{prefix}{k}");
    let kind_key = if prefix.is_empty() { "datum".to_string() } else { prefix.trim_end_matches('.').to_string() };
    let Some((line, kind)) = e.take(&kind_key) else {
        return Ok(None);
    };
    let err = |msg: String| Error::Config { line, msg };
    let datum = match kind.as_str() {
        "explicit" => {
            let t0 = e.real_or(&key("t0"), 1.0)?;
            let r = e.real_or(&key("R"), 0.5)?;
            InitialDatum::Explicit(ExplicitSolution::new(s, t0, r)?)
        }
        "dirac" | "step" => {
            let mass = e.real(&key("mass"))?.ok_or_else(|| err(format!("{kind} datum needs 'mass'")))?;
            let at = e.real_or(&key("at"), 0.0)?;
            if kind == "dirac" {
                InitialDatum::Dirac { mass, at }
            } else {
                InitialDatum::Step { mass, at }
            }
        }
        "bumps" => InitialDatum::BumpSum,
        "shifted" => {
            let t0 = e.real_or(&key("t0"), 1.0)?;
            let r = e.real_or(&key("R"), 0.5)?;
            let terms = e
                .pairs(&key("shifts"))?
                .ok_or_else(|| err("shifted datum needs 'shifts'".into()))?;
            InitialDatum::Shifted {
                base: ExplicitSolution::new(s, t0, r)?,
                terms,
            }
        }
        "tabulated" => {
            let x = e.list(&key("table_x"))?.ok_or_else(|| err("tabulated datum needs 'table_x'".into()))?;
            let v = e.list(&key("table_v"))?.ok_or_else(|| err("tabulated datum needs 'table_v'".into()))?;
            InitialDatum::Tabulated { x, v }
        }
        other => return Err(err(format!("unknown datum '{other}'"))),
    };
    datum.validate()?;
    Ok(Some(datum))
}

impl RunConfig {
    /// Parses a configuration file. Unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut e = Entries::parse(text)?;
        let name = e.take("name").map(|(_, v)| v).unwrap_or_else(|| "run".into());
        let s = e.real("s")?.ok_or(Error::Config {
            line: 0,
            msg: "missing required key 's'".into(),
        })?;
        let m = e.real_or("m", 2.0)?;
        let cfl_mode = match e.take("cfl") {
            Some((_, v)) => v.parse::<CflMode>()?,
            None => CflMode::Cfl1,
        };
        let safety = e.real_or("safety", DEFAULT_SAFETY)?;
        let datum = parse_datum(&mut e, "", s)?.ok_or(Error::Config {
            line: 0,
            msg: "missing required key 'datum'".into(),
        })?;
        let second_datum = parse_datum(&mut e, "datum2.", s)?;
        let horizon = e.real_or("T", 1.0)?;
        let error_time = e.real_or("error_time", horizon)?;
        let reference = match e.take("reference") {
            None => Reference::None,
            Some((line, v)) => match v.as_str() {
                "none" => Reference::None,
                "analytic" => match &datum {
                    InitialDatum::Explicit(sol) => Reference::Analytic(*sol),
                    _ => {
                        return Err(Error::Config {
                            line,
                            msg: "analytic reference needs an explicit datum".into(),
                        })
                    }
                },
                "finegrid" => Reference::FineGrid {
                    h: e.real("reference_h")?.unwrap_or(2f64.powi(-9)),
                },
                other => {
                    return Err(Error::Config {
                        line,
                        msg: format!("unknown reference '{other}'"),
                    })
                }
            },
        };
        let ladder = e.list("ladder")?.unwrap_or_else(|| vec![0.125, 0.0625]);
        let snapshots = e.list("snapshots")?.unwrap_or_default();
        let out_dir = e.take("out").map(|(_, v)| PathBuf::from(v));
        let eps_tail = e.real_or("eps_tail", DEFAULT_EPS_TAIL)?;
        let seed = e.real_or("seed", 0.0)? as u64;
        let padding = e.real("padding")?;
        let domain = match e.list("domain")? {
            None => None,
            Some(v) if v.len() == 2 => Some((v[0], v[1])),
            Some(_) => {
                return Err(Error::Config {
                    line: 0,
                    msg: "'domain' needs two values 'lo, hi'".into(),
                })
            }
        };
        let boundary_tol = e.real_or("boundary_tol", 1e-10)?;
        let discrete_lipschitz = match e.take("discrete_lipschitz") {
            None => false,
            Some((line, v)) => v.parse::<bool>().map_err(|_| Error::Config {
                line,
                msg: format!("'discrete_lipschitz' must be true or false, got '{v}'"),
            })?,
        };
        if let Some((key, (line, _))) = e.map.into_iter().next() {
            return Err(Error::Config {
                line,
                msg: format!("unknown key '{key}'"),
            });
        }
        let cfg = RunConfig {
            name,
            s,
            m,
            cfl_mode,
            safety,
            datum,
            second_datum,
            reference,
            horizon,
            error_time,
            ladder,
            snapshots,
            out_dir,
            eps_tail,
            seed,
            padding,
            domain,
            boundary_tol,
            discrete_lipschitz,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes back to the flat format; `parse(to_config_string())`
    /// reproduces the configuration.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "s = {}", self.s);
        let _ = writeln!(out, "m = {}", self.m);
        let _ = writeln!(out, "cfl = {}", self.cfl_mode);
        let _ = writeln!(out, "safety = {}", self.safety);
        write_datum(&mut out, "", &self.datum);
        if let Some(d) = &self.second_datum {
            write_datum(&mut out, "datum2.", d);
        }
        let _ = writeln!(out, "T = {}", self.horizon);
        let _ = writeln!(out, "error_time = {}", self.error_time);
        match self.reference {
            Reference::None => {
                let _ = writeln!(out, "reference = none");
            }
            Reference::Analytic(_) => {
                let _ = writeln!(out, "reference = analytic");
            }
            Reference::FineGrid { h } => {
                let _ = writeln!(out, "reference = finegrid");
                let _ = writeln!(out, "reference_h = {h}");
            }
        }
        let _ = writeln!(out, "ladder = {}", list(&self.ladder));
        let _ = writeln!(out, "snapshots = {}", list(&self.snapshots));
        if let Some(dir) = &self.out_dir {
            let _ = writeln!(out, "out = {}", dir.display());
        }
        let _ = writeln!(out, "eps_tail = {}", self.eps_tail);
        let _ = writeln!(out, "seed = {}", self.seed);
        if let Some(p) = self.padding {
            let _ = writeln!(out, "padding = {p}");
        }
        if let Some((lo, hi)) = self.domain {
            let _ = writeln!(out, "domain = {lo}, {hi}");
        }
        let _ = writeln!(out, "boundary_tol = {}", self.boundary_tol);
        let _ = writeln!(out, "discrete_lipschitz = {}", self.discrete_lipschitz);
        out
    }
}

fn write_datum(out: &mut String, prefix: &str, d: &InitialDatum) {
    let kind_key = if prefix.is_empty() { "datum" } else { prefix.trim_end_matches('.') };
    let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
    match d {
        InitialDatum::Explicit(sol) => {
            let _ = writeln!(out, "{kind_key} = explicit");
            let _ = writeln!(out, "{prefix}t0 = {}", sol.t0);
            let _ = writeln!(out, "{prefix}R = {}", sol.r);
        }
        InitialDatum::Dirac { mass, at } | InitialDatum::Step { mass, at } => {
            let kind = if matches!(d, InitialDatum::Dirac { .. }) { "dirac" } else { "step" };
            let _ = writeln!(out, "{kind_key} = {kind}");
            let _ = writeln!(out, "{prefix}mass = {mass}");
            let _ = writeln!(out, "{prefix}at = {at}");
        }
        InitialDatum::BumpSum => {
            let _ = writeln!(out, "{kind_key} = bumps");
        }
        InitialDatum::Shifted { base, terms } => {
            let _ = writeln!(out, "{kind_key} = shifted");
            let _ = writeln!(out, "{prefix}t0 = {}", base.t0);
            let _ = writeln!(out, "{prefix}R = {}", base.r);
            let t = terms.iter().map(|(c, w)| format!("{c}:{w}")).collect::<Vec<_>>().join(", ");
            let _ = writeln!(out, "{prefix}shifts = {t}");
        }
        InitialDatum::Tabulated { x, v } => {
            let _ = writeln!(out, "{kind_key} = tabulated");
            let _ = writeln!(out, "{prefix}table_x = {}", list(x));
            let _ = writeln!(out, "{prefix}table_v = {}", list(v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("2^-3"), Some(0.125));
        assert_eq!(parse_real(" 1/8 "), Some(0.125));
        assert_eq!(parse_real("0.125"), Some(0.125));
        assert_eq!(parse_real("x"), None);
    }

    #[test]
    fn parse_minimal_and_round_trip() {
        let text = "# comment\ns = 0.5\ndatum = explicit\nt0 = 1\nR = 0.5\nreference = analytic\nladder = 2^-3, 2^-4 # trailing\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.ladder, vec![0.125, 0.0625]);
        assert!(matches!(cfg.reference, Reference::Analytic(_)));
        let again = RunConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(again.to_config_string(), cfg.to_config_string());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(
            RunConfig::parse("s = 0.5\ndatum = bumps\nbogus = 1\n"),
            Err(Error::Config { line: 3, .. })
        ));
        assert!(RunConfig::parse("s = 0.5\ns = 0.4\ndatum = bumps\n").is_err());
        assert!(RunConfig::parse("s = 0.5\n").is_err());
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(RunConfig::parse("s = 1.5\ndatum = bumps\n").is_err());
        assert!(RunConfig::parse("s = 0.5\nm = 1.5\ndatum = bumps\n").is_err());
        assert!(RunConfig::parse("s = 0.5\ndatum = bumps\nladder = 2^-4, 2^-3\n").is_err());
        assert!(RunConfig::parse("s = 0.5\ndatum = bumps\nT = 1\nsnapshots = 2\n").is_err());
    }

    #[test]
    fn pair_datum() {
        let text = "s = 0.5\ndatum = shifted\nshifts = 1:1\ndatum2 = shifted\ndatum2.shifts = 1:1, -1:2\n";
        let cfg = RunConfig::parse(text).unwrap();
        match cfg.second_datum {
            Some(InitialDatum::Shifted { ref terms, .. }) => assert_eq!(terms.len(), 2),
            ref other => panic!("unexpected {other:?}"),
        }
    }
}
