//! Command-line driver: `check`, `run-kinetic`, `run-macro`, `ap-sweep`.
//!
//! Exit codes: 0 success, 1 condition or validation failure, 2 usage or
//! configuration error.  Output files are deterministic: fixed iteration
//! order, 17 significant digits, no wall-clock content.

use crate::analysis::ap_study;
use crate::config::{kinetic_config, macro_config, sweep_epsilons, ConfigFile};
use crate::error::Error;
use crate::macroscopic::run_macro;
use crate::report::build_check_report;
use crate::solver::run;

use std::io::Write;
use std::path::{Path, PathBuf};

pub const USAGE: &str = "\
usage: vfp-stab <command> --config PATH [--out PATH] [--strict] [--quiet]

commands:
  check        validate the feedback matrix, field and constants
  run-kinetic  integrate the kinetic equation, write energy records as CSV
  run-macro    integrate the drift-diffusion limit, write (t, x, sigma) CSV
  ap-sweep     compare kinetic runs against the macroscopic reference
               across the [sweep] epsilons
";

#[derive(Debug)]
struct Args {
    command: String,
    config: PathBuf,
    out: Option<PathBuf>,
    strict: bool,
    quiet: bool,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    if argv.is_empty() {
        return Err("missing command".into());
    }
    let command = argv[0].clone();
    if !["check", "run-kinetic", "run-macro", "ap-sweep"].contains(&command.as_str()) {
        return Err(format!("unknown command '{command}'"));
    }
    let mut config = None;
    let mut out = None;
    let mut strict = false;
    let mut quiet = false;
    let mut i = 1;
    while i < argv.len() {
        match argv[i].as_str() {
            "--config" => {
                i += 1;
                config = Some(PathBuf::from(argv.get(i).ok_or("--config needs a path")?));
            }
            "--out" => {
                i += 1;
                out = Some(PathBuf::from(argv.get(i).ok_or("--out needs a path")?));
            }
            "--strict" => strict = true,
            "--quiet" => quiet = true,
            other => return Err(format!("unknown flag '{other}'")),
        }
        i += 1;
    }
    let config = config.ok_or("missing --config PATH")?;
    Ok(Args { command, config, out, strict, quiet })
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Io { .. } | Error::InvalidInput(_) | Error::Grid(_) => 2,
        Error::Validation(_) | Error::Solver(_) => 1,
    }
}

fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn write_file(path: &Path, content: &str) -> crate::error::Result<()> {
    let mut f = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(content.as_bytes()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_check(cfg: &ConfigFile, out: Option<&Path>, strict: bool, quiet: bool) -> crate::error::Result<i32> {
    let sim = kinetic_config(cfg, None, false)?;
    let report = build_check_report(&sim.k, &sim.field, sim.c_s, sim.a, sim.epsilon)?;
    let text = report.render();
    match out {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    if !quiet && out.is_some() {
        println!("condition report: {}", if report.pass { "pass" } else { "fail" });
    }
    let strict_trip = strict && !report.warnings.is_empty();
    Ok(if report.pass && !strict_trip { 0 } else { 1 })
}

fn cmd_run_kinetic(
    cfg: &ConfigFile,
    base: Option<&Path>,
    out: &Path,
    strict: bool,
    quiet: bool,
) -> crate::error::Result<i32> {
    let sim = kinetic_config(cfg, base, strict)?;
    let result = run(&sim)?;
    let mut csv = String::new();
    csv.push_str(&format!(
        "# kinetic run: nx={} nv={} vmax={} epsilon={} a={} t_end={}\n",
        sim.nx, sim.nv, sim.vmax, sim.epsilon, sim.a, sim.t_end
    ));
    csv.push_str("t,l2,v_norm,E_h,cross_term,mass,A,B,A_x,B_x,C_B,I,flux_residual,envelope\n");
    for r in &result.records {
        let cb = r.c_b.map_or("nan".to_string(), fmt_g);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_g(r.t),
            fmt_g(r.l2),
            fmt_g(r.v_norm),
            fmt_g(r.e_h),
            fmt_g(r.cross_term),
            fmt_g(r.mass),
            fmt_g(r.a),
            fmt_g(r.b),
            fmt_g(r.a_x),
            fmt_g(r.b_x),
            cb,
            fmt_g(r.i_term),
            fmt_g(r.flux_residual),
            fmt_g(r.envelope),
        ));
    }
    write_file(out, &csv)?;
    if !quiet {
        println!(
            "kinetic run finished: {} records, final v_norm = {}",
            result.records.len(),
            fmt_g(result.records.last().map(|r| r.v_norm).unwrap_or(0.0))
        );
    }
    Ok(0)
}

fn cmd_run_macro(cfg: &ConfigFile, out: &Path, quiet: bool) -> crate::error::Result<i32> {
    let mc = macro_config(cfg)?;
    let result = run_macro(&mc)?;
    let dx = 1.0 / mc.nx as f64;
    let mut csv = String::new();
    csv.push_str(&format!("# macro run: nx={} t_end={}\n", mc.nx, mc.t_end));
    csv.push_str("t,x,sigma\n");
    for (t, snap) in result.times.iter().zip(result.snapshots.iter()) {
        for (i, s) in snap.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_g(*t),
                fmt_g((i as f64 + 0.5) * dx),
                fmt_g(*s)
            ));
        }
    }
    write_file(out, &csv)?;
    if !quiet {
        println!("macro run finished: {} snapshots", result.snapshots.len());
    }
    Ok(0)
}

fn cmd_ap_sweep(
    cfg: &ConfigFile,
    base: Option<&Path>,
    out: &Path,
    strict: bool,
    quiet: bool,
) -> crate::error::Result<i32> {
    let sim = kinetic_config(cfg, base, strict)?;
    let epsilons = sweep_epsilons(cfg)?;
    let rows = ap_study(&sim, &epsilons)?;
    let mut csv = String::new();
    csv.push_str(&format!("# ap sweep: nx={} nv={} t_end={}\n", sim.nx, sim.nv, sim.t_end));
    csv.push_str("epsilon,l2_diff,layer_indicator\n");
    for row in &rows {
        let layer = match row.layer {
            crate::analysis::LayerIndicator::Ratio(r) => fmt_g(r),
            crate::analysis::LayerIndicator::Saturated => "saturated".to_string(),
        };
        csv.push_str(&format!("{},{},{}\n", fmt_g(row.epsilon), fmt_g(row.l2_diff), layer));
    }
    write_file(out, &csv)?;
    if !quiet {
        println!("ap sweep finished: {} rows", rows.len());
    }
    Ok(0)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_from_args<I: Iterator<Item = String>>(argv: I) -> i32 {
    let argv: Vec<String> = argv.collect();
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            return 2;
        }
    };
    let cfg = match ConfigFile::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let base = args.config.parent().map(Path::to_path_buf);
    let need_out = |cmd: &str| -> Option<i32> {
        if args.out.is_none() {
            eprintln!("error: {cmd} needs --out PATH");
            return Some(2);
        }
        None
    };
    let result = match args.command.as_str() {
        "check" => cmd_check(&cfg, args.out.as_deref(), args.strict, args.quiet),
        "run-kinetic" => {
            if let Some(code) = need_out("run-kinetic") {
                return code;
            }
            cmd_run_kinetic(&cfg, base.as_deref(), args.out.as_deref().unwrap(), args.strict, args.quiet)
        }
        "run-macro" => {
            if let Some(code) = need_out("run-macro") {
                return code;
            }
            cmd_run_macro(&cfg, args.out.as_deref().unwrap(), args.quiet)
        }
        "ap-sweep" => {
            if let Some(code) = need_out("ap-sweep") {
                return code;
            }
            cmd_ap_sweep(&cfg, base.as_deref(), args.out.as_deref().unwrap(), args.strict, args.quiet)
        }
        _ => unreachable!("validated in parse_args"),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
