//! Run configuration: a flat key-value text format that round-trips
//! bit-exactly. Parameters are stored as exact hex floats internally;
//! decimal input is parsed once to a dyadic value and kept exact from
//! then on.

use unimodal::astro_float::{BigFloat, Radix, RoundingMode, Sign, Word, WORD_BIT_SIZE};
use std::fmt::Write as _;
use unimodal::arith::with_consts;
use unimodal::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Exact parameter, when given directly.
    pub param: Option<BigFloat>,
    /// Preset name, when the parameter is found by bisection.
    pub preset: Option<String>,
    pub ell: f64,
    pub orbit: usize,
    pub n_max: usize,
    pub k_count: usize,
    pub budget_iterate: usize,
    pub budget_transition: usize,
    pub budget_branch: usize,
    pub entry_slack: usize,
    pub z_depth: usize,
    pub precision_start: usize,
    pub precision_max: usize,
    pub bisection_tol: f64,
    pub alpha: Vec<u32>,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            param: None,
            preset: None,
            ell: 2.0,
            orbit: 20_000,
            n_max: 200,
            k_count: 20,
            budget_iterate: 1 << 20,
            budget_transition: 2000,
            budget_branch: 4096,
            entry_slack: 2000,
            z_depth: 16,
            precision_start: 128,
            precision_max: 4096,
            bisection_tol: 1e-12,
            alpha: vec![2, 3],
            out: None,
        }
    }
}

pub fn format_hex(x: &BigFloat) -> String {
    match x.as_raw_parts() {
        Some((words, _, sign, exp, _)) => {
            let mut s = String::new();
            if matches!(sign, Sign::Neg) {
                s.push('-');
            }
            s.push_str("0x");
            let width = WORD_BIT_SIZE / 4;
            for w in words.iter().rev() {
                let _ = write!(s, "{w:0width$x}");
            }
            let _ = write!(s, "p{exp}");
            s
        }
        None => "nan".into(),
    }
}

pub fn parse_param(s: &str) -> Result<BigFloat> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("0x") {
        let (mant, exp) = rest
            .split_once('p')
            .ok_or_else(|| Error::Config(format!("hex float needs a p exponent: {s}")))?;
        let exp: i32 =
            exp.parse().map_err(|_| Error::Config(format!("bad hex exponent in {s}")))?;
        let width = WORD_BIT_SIZE / 4;
        if mant.is_empty() || mant.len() % width != 0 {
            return Err(Error::Config(format!("hex mantissa must be whole words: {s}")));
        }
        let mut words: Vec<Word> = Vec::new();
        let mut chars = mant.chars().collect::<Vec<_>>();
        while !chars.is_empty() {
            let tail: String = chars.split_off(chars.len() - width).into_iter().collect();
            let w = Word::from_str_radix(&tail, 16)
                .map_err(|_| Error::Config(format!("bad hex digits in {s}")))?;
            words.push(w);
        }
        Ok(BigFloat::from_words(&words, Sign::Pos, exp))
    } else {
        let v = with_consts(|cc| {
            BigFloat::parse(s, Radix::Dec, 192, RoundingMode::ToEven, cc)
        });
        if v.is_nan() {
            return Err(Error::Config(format!("cannot parse parameter: {s}")));
        }
        Ok(v)
    }
}

fn parse_alpha(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<u32>().map_err(|_| Error::Config(format!("bad digit modulus: {t}")))
        })
        .collect()
}

impl RunConfig {
    /// Serialize every field in a fixed order; `parse` of the result gives
    /// back an identical configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.param {
            let _ = writeln!(s, "param = {}", format_hex(p));
        }
        if let Some(p) = &self.preset {
            let _ = writeln!(s, "preset = {p}");
        }
        let _ = writeln!(s, "ell = {}", self.ell);
        let _ = writeln!(s, "orbit = {}", self.orbit);
        let _ = writeln!(s, "n_max = {}", self.n_max);
        let _ = writeln!(s, "k_count = {}", self.k_count);
        let _ = writeln!(s, "budget_iterate = {}", self.budget_iterate);
        let _ = writeln!(s, "budget_transition = {}", self.budget_transition);
        let _ = writeln!(s, "budget_branch = {}", self.budget_branch);
        let _ = writeln!(s, "entry_slack = {}", self.entry_slack);
        let _ = writeln!(s, "z_depth = {}", self.z_depth);
        let _ = writeln!(s, "precision_start = {}", self.precision_start);
        let _ = writeln!(s, "precision_max = {}", self.precision_max);
        let _ = writeln!(s, "bisection_tol = {:e}", self.bisection_tol);
        let alpha: Vec<String> = self.alpha.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "alpha = {}", alpha.join(","));
        if let Some(o) = &self.out {
            let _ = writeln!(s, "out = {o}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig { param: None, preset: None, out: None, ..Default::default() };
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", ln + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let badnum = |k: &str| Error::Config(format!("line {}: bad number for {k}", ln + 1));
            match key {
                "param" => cfg.param = Some(parse_param(value)?),
                "preset" => cfg.preset = Some(value.to_string()),
                "ell" => cfg.ell = value.parse().map_err(|_| badnum("ell"))?,
                "orbit" => cfg.orbit = value.parse().map_err(|_| badnum("orbit"))?,
                "n_max" => cfg.n_max = value.parse().map_err(|_| badnum("n_max"))?,
                "k_count" => cfg.k_count = value.parse().map_err(|_| badnum("k_count"))?,
                "budget_iterate" => {
                    cfg.budget_iterate = value.parse().map_err(|_| badnum("budget_iterate"))?
                }
                "budget_transition" => {
                    cfg.budget_transition =
                        value.parse().map_err(|_| badnum("budget_transition"))?
                }
                "budget_branch" => {
                    cfg.budget_branch = value.parse().map_err(|_| badnum("budget_branch"))?
                }
                "entry_slack" => {
                    cfg.entry_slack = value.parse().map_err(|_| badnum("entry_slack"))?
                }
                "z_depth" => cfg.z_depth = value.parse().map_err(|_| badnum("z_depth"))?,
                "precision_start" => {
                    cfg.precision_start = value.parse().map_err(|_| badnum("precision_start"))?
                }
                "precision_max" => {
                    cfg.precision_max = value.parse().map_err(|_| badnum("precision_max"))?
                }
                "bisection_tol" => {
                    cfg.bisection_tol = value.parse().map_err(|_| badnum("bisection_tol"))?
                }
                "alpha" => cfg.alpha = parse_alpha(value)?,
                "out" => cfg.out = Some(value.to_string()),
                other => {
                    return Err(Error::Config(format!("line {}: unknown key {other}", ln + 1)))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("orbit", self.orbit),
            ("n_max", self.n_max),
            ("budget_iterate", self.budget_iterate),
            ("budget_transition", self.budget_transition),
            ("budget_branch", self.budget_branch),
            ("precision_start", self.precision_start),
            ("precision_max", self.precision_max),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.ell <= 1.0 {
            return Err(Error::Config("ell must be greater than 1".into()));
        }
        if self.alpha.iter().any(|&p| p < 2) {
            return Err(Error::Config("every alpha digit modulus must be at least 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let mut cfg = RunConfig::default();
        cfg.param = Some(parse_param("0.957080078125").unwrap());
        cfg.preset = Some("fibonacci".into());
        cfg.out = Some("/tmp/x".into());
        let text = cfg.to_text();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn hex_param_round_trip() {
        let p = parse_param("0.9781017497858734").unwrap();
        let hex = format_hex(&p);
        let q = parse_param(&hex).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(RunConfig::parse("orbit = 0").is_err());
        assert!(RunConfig::parse("nonsense = 3").is_err());
        assert!(RunConfig::parse("alpha = 2,1").is_err());
        assert!(RunConfig::parse("ell = 0.5").is_err());
    }
}
