//! Command-line surface: kneading data, complexity curves, wild-example
//! verification and odometer checks, driven by flags or a key-value config
//! file. Exit codes: 0 ok, 2 precision exhausted, 3 budget/horizon
//! exceeded, 4 hypothesis violation, 5 configuration error.

mod config;
mod presets;
mod wild;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::fs;
use std::process::ExitCode;
use unimodal::arith::{with_escalation, Prec};
use unimodal::complexity::{complexity_curve, growth_classify, sandwich_check, CoverOpts};
use unimodal::kneading::{cutting_times, itinerary, CuttingOpts, Symbol};
use unimodal::nice::{children, seed_nice_interval};
use unimodal::odometer::{check_bijection, orbit_period, OdometerBase};
use unimodal::Error;

#[derive(Parser)]
#[command(name = "unimodal", about = "Certified combinatorics of unimodal interval maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Map parameter a in (0, 1], decimal or exact hex (0x...p<e>)
    #[arg(long)]
    param: Option<String>,
    /// Critical order ell > 1
    #[arg(long)]
    ell: Option<f64>,
    /// Named parameter: fibonacci, feigenbaum, wild, chebyshev
    #[arg(long)]
    preset: Option<String>,
    /// Deepest preimage level for counting
    #[arg(long)]
    n_max: Option<usize>,
    /// Orbit sample size
    #[arg(long)]
    orbit: Option<usize>,
    /// Iterate horizon budget
    #[arg(long)]
    budget_iterate: Option<usize>,
    /// Transition-time scan budget for children
    #[arg(long)]
    budget_transition: Option<usize>,
    /// Branch count cap for monotone decompositions
    #[arg(long)]
    budget_branch: Option<usize>,
    /// Precision cap in bits
    #[arg(long)]
    precision_max: Option<usize>,
    /// Output path prefix (derived files add suffixes); stdout if absent
    #[arg(long)]
    out: Option<String>,
    /// Key-value config file; flags override its fields
    #[arg(long)]
    config: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Cutting times, kneading map and itinerary report
    Kneading {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of cutting times past S_0
        #[arg(long)]
        k: Option<usize>,
    },
    /// Complexity curve CSV with growth and sandwich reports
    Complexity {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Integer checks of the wild-example combinatorics, optionally with a
    /// realized parameter and its principal nest
    WildVerify {
        #[command(flatten)]
        common: CommonOpts,
        /// Also bisect for the wild parameter and compare nest return times
        #[arg(long)]
        nest: bool,
        /// Nest depth for the comparison
        #[arg(long, default_value_t = 6)]
        nest_depth: usize,
    },
    /// Adding-machine period and bijection checks
    Odometer {
        #[command(flatten)]
        common: CommonOpts,
        /// Digit moduli, comma separated (overrides config)
        #[arg(long)]
        alpha: Option<String>,
    },
}

fn exit_code_of(e: &Error) -> u8 {
    match e {
        Error::PrecisionExhausted(_) | Error::Undecided(_) => 2,
        Error::BudgetExceeded { .. }
        | Error::HorizonExceeded(_)
        | Error::BranchBudgetExceeded(_) => 3,
        Error::HypothesisViolation { .. } | Error::RenormalizationDetected { .. } => 4,
        _ => 5,
    }
}

fn load_config(common: &CommonOpts) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = &common.param {
        cfg.param = Some(config::parse_param(p)?);
        cfg.preset = None;
    }
    if let Some(p) = &common.preset {
        cfg.preset = Some(p.clone());
        cfg.param = None;
    }
    if let Some(v) = common.ell {
        cfg.ell = v;
    }
    if let Some(v) = common.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = common.orbit {
        cfg.orbit = v;
    }
    if let Some(v) = common.budget_iterate {
        cfg.budget_iterate = v;
    }
    if let Some(v) = common.budget_transition {
        cfg.budget_transition = v;
    }
    if let Some(v) = common.budget_branch {
        cfg.budget_branch = v;
    }
    if let Some(v) = common.precision_max {
        cfg.precision_max = v;
    }
    if let Some(v) = &common.out {
        cfg.out = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: &Option<String>, name_suffix: &str, content: &str) -> Result<(), Error> {
    match out {
        Some(base) => {
            let path = format!("{base}{name_suffix}");
            fs::write(&path, content)
                .map_err(|e| Error::Config(format!("cannot write {path}: {e}")))?;
            eprintln!("wrote {path}");
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_kneading(cfg: &RunConfig, k: usize) -> Result<(), Error> {
    let p = Prec::new(cfg.precision_start, cfg.precision_max);
    let m = presets::resolve_map(cfg, presets::LockDepth::CuttingCount(k), p)?;
    let opts = CuttingOpts { horizon: cfg.budget_iterate, z_depth: cfg.z_depth };
    match cutting_times(&m, k, p, &opts) {
        Ok(kd) => emit(&cfg.out, ".kneading.txt", &kd.to_text()),
        Err(e @ Error::HorizonExceeded(_)) | Err(e @ Error::NotInDomain(_)) => {
            // non-recurrent case: report the itinerary with a notice
            let sym_len = 200.min(cfg.budget_iterate);
            let word = itinerary(&m, sym_len, p)?;
            let mut text = String::from("sym: ");
            text.extend(word.iter().map(|s| match s {
                Symbol::L => 'L',
                Symbol::C => 'C',
                Symbol::R => 'R',
            }));
            text.push('\n');
            text.push_str(&format!("notice: {e}\n"));
            emit(&cfg.out, ".kneading.txt", &text)?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

fn fmt_fit(name: &str, fit: &unimodal::complexity::GrowthFit) -> String {
    format!(
        "growth {name}: model={:?} C={:.6} rms=[{:.4}, {:.4}, {:.4}] sup/(n log n)={:.6} inf/n={:.6}\n",
        fit.best,
        fit.coefficient,
        fit.rms[0],
        fit.rms[1],
        fit.rms[2],
        fit.sup_over_nlogn,
        fit.inf_over_n
    )
}

fn cmd_complexity(cfg: &RunConfig) -> Result<(), Error> {
    let p = Prec::new(cfg.precision_start, cfg.precision_max);
    let lock = presets::LockDepth::Horizon(cfg.orbit + cfg.n_max + cfg.entry_slack + 64);
    let m = presets::resolve_map(cfg, lock, p)?;
    let opts = CoverOpts { n_orbit: cfg.orbit, n_max: cfg.n_max, entry_slack: cfg.entry_slack };
    let (curve, mut cover) = with_escalation(p, "complexity run", |pp| {
        let base = seed_nice_interval(&m, pp)?;
        complexity_curve(&m, &base, &opts, cfg.budget_transition, pp)
    })?;
    emit(&cfg.out, ".csv", &curve.to_csv())?;
    let sidecar = serde_json::json!({
        "map": {
            "a_decimal": curve.meta.a_decimal,
            "a_exact_hex": curve.meta.a_exact_hex,
            "ell": curve.meta.ell,
        },
        "n_orbit": curve.meta.n_orbit,
        "n_max": curve.meta.n_max,
        "entry_slack": curve.meta.entry_slack,
        "budgets": {
            "iterate": cfg.budget_iterate,
            "transition": cfg.budget_transition,
            "branch": cfg.budget_branch,
        },
        "precision": {
            "start_bits": curve.meta.precision_bits,
            "cap_bits": curve.meta.precision_cap,
        },
        "dropped_points": curve.meta.dropped_points,
        "nu_complete": curve.meta.nu_complete,
        "preset": cfg.preset,
    });
    emit(&cfg.out, ".json", &format!("{}\n", serde_json::to_string_pretty(&sidecar).unwrap()))?;

    // sandwich threshold: the largest transition time of a child of the base
    let base = cover.base.clone();
    let kids = children(&m, &mut cover.orbit, &base, cfg.budget_transition, cover.p)?;
    let max_child = kids.last().map(|c| c.transition_time).unwrap_or(0);
    let sandwich = sandwich_check(&curve, max_child);
    let mut report = String::new();
    report.push_str(&format!(
        "sandwich: {} violations (upper bound checked: {}, from n={})\n",
        sandwich.violations.len(),
        sandwich.upper_checked,
        sandwich.upper_from
    ));
    for v in &sandwich.violations {
        report.push_str(&format!("  violation: {v:?}\n"));
    }
    let q_series: Vec<(usize, f64)> =
        curve.rows.iter().filter(|r| r.n >= 1).filter_map(|r| r.q.map(|q| (r.n, q as f64))).collect();
    let p_series: Vec<(usize, f64)> =
        curve.rows.iter().filter_map(|r| r.p.map(|pv| (r.n, pv as f64))).collect();
    match growth_classify(&q_series) {
        Ok(fit) => report.push_str(&fmt_fit("q", &fit)),
        Err(e) => report.push_str(&format!("growth q: {e}\n")),
    }
    match growth_classify(&p_series) {
        Ok(fit) => report.push_str(&fmt_fit("p", &fit)),
        Err(e) => report.push_str(&format!("growth p: {e}\n")),
    }
    report.push_str(&format!("dropped sample points: {}\n", curve.meta.dropped_points));
    emit(&cfg.out, ".report.txt", &report)?;
    if !sandwich.violations.is_empty() {
        return Err(Error::HypothesisViolation {
            condition: "count sandwich",
            detail: format!("{} violations", sandwich.violations.len()),
        });
    }
    Ok(())
}

fn cmd_wild_verify(cfg: &RunConfig, nest: bool, nest_depth: usize) -> Result<(), Error> {
    let mut report = String::new();
    let mut failed = false;
    let k = cfg.k_count.max(8);
    let w = unimodal::kneading::wild_combinatorics(k);
    for (name, ok, detail) in wild::validate_wild(&w) {
        report.push_str(&format!("check {name}: {} {detail}\n", if ok { "PASS" } else { "FAIL" }));
        failed |= !ok;
    }
    if nest {
        let p = Prec::new(cfg.precision_start, cfg.precision_max);
        match wild::wild_nest_comparison(cfg, nest_depth, p) {
            Ok((rts, expect)) => {
                let ok = rts == expect;
                report.push_str(&format!(
                    "check nest-return-times: {} observed {rts:?} expected {expect:?}\n",
                    if ok { "PASS" } else { "FAIL" }
                ));
                failed |= !ok;
            }
            Err(e) => {
                report.push_str(&format!("check nest-return-times: FAIL ({e})\n"));
                failed = true;
            }
        }
    }
    emit(&cfg.out, ".wild.txt", &report)?;
    if failed {
        Err(Error::HypothesisViolation { condition: "wild combinatorics", detail: "see report".into() })
    } else {
        Ok(())
    }
}

fn cmd_odometer(cfg: &RunConfig, alpha_flag: &Option<String>) -> Result<(), Error> {
    let alpha = match alpha_flag {
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim().parse::<u32>().map_err(|_| Error::Config(format!("bad digit modulus: {t}")))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => cfg.alpha.clone(),
    };
    let base = OdometerBase::new(alpha)?;
    let mut report = String::new();
    report.push_str(&base.to_text());
    report.push('\n');
    let period = orbit_period(&base);
    let expect = base.state_count();
    report.push_str(&format!(
        "check full-period: {} period {period} (state count {expect})\n",
        if period == expect { "PASS" } else { "FAIL" }
    ));
    match check_bijection(&base) {
        Ok(()) => report.push_str("check bijection: PASS\n"),
        Err(e) => {
            report.push_str(&format!("check bijection: FAIL ({e})\n"));
            emit(&cfg.out, ".odometer.txt", &report)?;
            return Err(e);
        }
    }
    emit(&cfg.out, ".odometer.txt", &report)?;
    if period != expect {
        return Err(Error::HypothesisViolation {
            condition: "odometer full period",
            detail: format!("period {period} != {expect}"),
        });
    }
    Ok(())
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Kneading { common, k } => {
            let cfg = load_config(common)?;
            let kk = k.unwrap_or(cfg.k_count);
            cmd_kneading(&cfg, kk)
        }
        Command::Complexity { common } => {
            let cfg = load_config(common)?;
            cmd_complexity(&cfg)
        }
        Command::WildVerify { common, nest, nest_depth } => {
            let cfg = load_config(common)?;
            cmd_wild_verify(&cfg, *nest, *nest_depth)
        }
        Command::Odometer { common, alpha } => {
            let cfg = load_config(common)?;
            cmd_odometer(&cfg, alpha)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}
