//! Command-line front door: parse group/shift/cocycle files, run the
//! analyses, and emit deterministic JSON (or text) reports.
//!
//! Exit codes: 0 success or untwisted, 2 input or validation error,
//! 3 inconclusive, 4 obstruction or negative result.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use untwist_core::cocycle::{self, CocycleCaps, LocalCocycle, UntwistConfig, Verdict};
use untwist_core::group::GroupContext;
use untwist_core::jsonio;
use untwist_core::shift::{self, Subshift};
use untwist_core::topology;

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_OBSTRUCTION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "untwist",
    about = "exact cocycle analysis on shift spaces over finitely generated groups",
    version
)]
struct Cli {
    /// Random seed; fixed seeds give byte-identical reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "text"])]
    format: String,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Ball enumeration cap (elements).
    #[arg(long, global = true)]
    cap: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GroupArg {
    /// Group spec file, e.g. {"family":"free_abelian","params":{"d":2}}.
    #[arg(long)]
    group: PathBuf,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long)]
    group: PathBuf,
    /// Subshift file ({"kind":"full","alphabet":...} etc.).
    #[arg(long)]
    shift: PathBuf,
}

#[derive(Args)]
struct CocycleArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Cocycle file (window rules plus target group).
    #[arg(long)]
    cocycle: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the number of ends from annulus component counts.
    Ends {
        #[command(flatten)]
        group: GroupArg,
        /// Annulus schedule "inner:outer,inner:outer,..."; default 1:5,2:6,3:7.
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Run the full untwisting pipeline on a cocycle.
    Untwist {
        #[command(flatten)]
        cocycle: CocycleArgs,
        /// Cylinder radius of the reported transfer table.
        #[arg(long)]
        radius: Option<u32>,
    },
    /// Build a specification witness from two configurations.
    Witness {
        #[command(flatten)]
        system: SystemArgs,
        /// Non-torsion direction element.
        #[arg(long)]
        a: String,
        /// Cone radius.
        #[arg(long)]
        r: u32,
        /// First configuration file.
        #[arg(long)]
        x: PathBuf,
        /// Second configuration file.
        #[arg(long)]
        xp: PathBuf,
    },
    /// Periodize a homoclinic point over (KZ)^d.
    Periodize {
        #[command(flatten)]
        system: SystemArgs,
        /// Configuration to periodize.
        #[arg(long)]
        config: PathBuf,
        /// Period K.
        #[arg(long)]
        period: u32,
        /// Radius of the agreement set Ω (a ball).
        #[arg(long, default_value_t = 1)]
        omega_radius: u32,
    },
    /// Glue two admissible patterns at a given separation (mixing evidence).
    Glue {
        #[command(flatten)]
        system: SystemArgs,
        /// First pattern file ([["site","sym"],...]).
        #[arg(long)]
        p1: PathBuf,
        /// Second pattern file.
        #[arg(long)]
        p2: PathBuf,
        /// Separation element.
        #[arg(long)]
        g: String,
        /// Pattern radius.
        #[arg(long)]
        r: u32,
    },
    /// Emit a bundled counterexample instance (group, shift, cocycle).
    Example {
        /// Which instance: "z" or "free".
        #[arg(long)]
        kind: String,
        /// Rank for the free instance.
        #[arg(long, default_value_t = 2)]
        rank: u32,
    },
    /// Evaluate a cocycle at a group element and configuration.
    Eval {
        #[command(flatten)]
        cocycle: CocycleArgs,
        /// Group element.
        #[arg(long)]
        g: String,
        /// Configuration file.
        #[arg(long)]
        x: PathBuf,
    },
    /// Validate a cocycle file (window rules, inverse law, relators).
    Validate {
        #[command(flatten)]
        cocycle: CocycleArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, code)) => {
            let rendered = if cli.format == "text" {
                render_text(&value)
            } else {
                let mut s = serde_json::to_string_pretty(&value).expect("report serializes");
                s.push('\n');
                s
            };
            let write_result = match &cli.out {
                Some(path) => std::fs::write(path, rendered).map_err(|e| anyhow!(e)),
                None => {
                    print!("{rendered}");
                    Ok(())
                }
            };
            match write_result {
                Ok(()) => ExitCode::from(code),
                Err(err) => {
                    eprintln!("error: {err:#}");
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: &Cli) -> Result<(Value, u8)> {
    match &cli.command {
        Command::Ends { group, schedule } => {
            let g = load_group(&group.group, cli.cap)?;
            let sched = match schedule {
                Some(s) => parse_schedule(s)?,
                None => topology::default_schedule(),
            };
            let report = topology::estimate_ends(&g, &sched)?;
            let code = match report.verdict {
                topology::EndVerdict::Inconclusive => EXIT_INCONCLUSIVE,
                _ => EXIT_OK,
            };
            let mut v = serde_json::to_value(&report)?;
            v["schema_version"] = json!(1);
            v["group"] = jsonio::group_to_json(&g);
            Ok((v, code))
        }
        Command::Untwist { cocycle, radius } => {
            let c = load_cocycle(cocycle, cli)?;
            let mut config = UntwistConfig {
                seed: cli.seed,
                ..UntwistConfig::default()
            };
            if radius.is_some() {
                config.table_radius = *radius;
            }
            let report = cocycle::untwist(&c, &config)?;
            let code = match report.verdict {
                Verdict::Untwisted => EXIT_OK,
                Verdict::ObstructionFound => EXIT_OBSTRUCTION,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            };
            Ok((report.to_json(&c), code))
        }
        Command::Witness {
            system,
            a,
            r,
            x,
            xp,
        } => {
            let shift = load_shift(system, cli.cap)?;
            let dir = shift.group.parse_elem(a)?;
            let x = load_configuration(&shift, x)?;
            let xp = load_configuration(&shift, xp)?;
            let y = match &shift.kind {
                shift::ShiftKind::Full => shift::witness_full_shift(&shift, &dir, *r, &x, &xp)?,
                shift::ShiftKind::GoldenMean { .. } => {
                    shift::witness_golden_mean(&shift, &dir, *r, &x, &xp)?
                }
                shift::ShiftKind::Sft { .. } => {
                    return Err(shift::ShiftError::NoWitnessConstructor.into())
                }
            };
            Ok((
                json!({
                    "schema_version": 1,
                    "direction": shift.group.format_elem(&dir),
                    "r": r,
                    "witness": jsonio::configuration_to_json(&shift.group, &y),
                }),
                EXIT_OK,
            ))
        }
        Command::Periodize {
            system,
            config,
            period,
            omega_radius,
        } => {
            let shift = load_shift(system, cli.cap)?;
            let z = load_configuration(&shift, config)?;
            let omega: Vec<_> = shift.group.ball(*omega_radius)?.elems().cloned().collect();
            match shift::periodize_zd(&shift, &z, &omega, *period) {
                Ok(y) => Ok((
                    json!({
                        "schema_version": 1,
                        "period": period,
                        "omega_radius": omega_radius,
                        "periodic": jsonio::periodic_to_json(&shift, &y),
                    }),
                    EXIT_OK,
                )),
                Err(e @ shift::ShiftError::PeriodTooSmall { .. }) => Ok((
                    json!({
                        "schema_version": 1,
                        "error": "period_too_small",
                        "detail": e.to_string(),
                    }),
                    EXIT_OBSTRUCTION,
                )),
                Err(other) => Err(other.into()),
            }
        }
        Command::Glue {
            system,
            p1,
            p2,
            g,
            r,
        } => {
            let shift = load_shift(system, cli.cap)?;
            let sep = shift.group.parse_elem(g)?;
            let pat1 = jsonio::parse_pattern(&shift.group, &shift.alphabet, &read_json(p1)?)?;
            let pat2 = jsonio::parse_pattern(&shift.group, &shift.alphabet, &read_json(p2)?)?;
            match shift::glue_check(&shift, &pat1, &pat2, &sep, *r) {
                Ok(y) => Ok((
                    json!({
                        "schema_version": 1,
                        "g": shift.group.format_elem(&sep),
                        "glued": jsonio::configuration_to_json(&shift.group, &y),
                    }),
                    EXIT_OK,
                )),
                Err(e @ shift::ShiftError::TooClose { .. }) => Ok((
                    json!({
                        "schema_version": 1,
                        "error": "too_close",
                        "detail": e.to_string(),
                    }),
                    EXIT_OBSTRUCTION,
                )),
                Err(other) => Err(other.into()),
            }
        }
        Command::Example { kind, rank } => {
            let c = match kind.as_str() {
                "z" => cocycle::example_cocycle_z(),
                "free" => cocycle::example_cocycle_free(*rank),
                other => return Err(anyhow!("unknown example kind {other:?} (use z or free)")),
            };
            Ok((
                json!({
                    "schema_version": 1,
                    "group": jsonio::group_to_json(&c.group),
                    "shift": jsonio::subshift_to_json(&c.shift),
                    "cocycle": jsonio::cocycle_to_json(&c),
                }),
                EXIT_OK,
            ))
        }
        Command::Eval { cocycle, g, x } => {
            let c = load_cocycle(cocycle, cli)?;
            let elem = c.group.parse_elem(g)?;
            let x = load_configuration(&c.shift, x)?;
            let value = c.evaluate(&elem, &x);
            Ok((
                json!({
                    "schema_version": 1,
                    "g": c.group.format_elem(&elem),
                    "value": c.target.format_elem(&value),
                }),
                EXIT_OK,
            ))
        }
        Command::Validate { cocycle } => {
            let c = load_cocycle(cocycle, cli)?;
            Ok((
                json!({
                    "schema_version": 1,
                    "valid": true,
                    "relators_checked": c.certificate.relators_checked,
                    "relator_mode": format!("{:?}", c.certificate.relator_mode),
                    "inverse_mode": format!("{:?}", c.certificate.inverse_mode),
                }),
                EXIT_OK,
            ))
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_group(path: &Path, cap: Option<usize>) -> Result<Arc<GroupContext>> {
    let v = read_json(path)?;
    let g = jsonio::parse_group(&v)?;
    match cap {
        Some(cap) => {
            let mut caps = g.caps();
            caps.ball_elems = cap;
            Ok(GroupContext::with_caps(g.spec().clone(), caps)?)
        }
        None => Ok(g),
    }
}

fn load_shift(system: &SystemArgs, cap: Option<usize>) -> Result<Arc<Subshift>> {
    let group = load_group(&system.group, cap)?;
    Ok(jsonio::parse_subshift(group, &read_json(&system.shift)?)?)
}

fn load_cocycle(args: &CocycleArgs, cli: &Cli) -> Result<LocalCocycle> {
    let shift = load_shift(&args.system, cli.cap)?;
    let caps = CocycleCaps {
        seed: cli.seed,
        ..CocycleCaps::default()
    };
    Ok(jsonio::parse_cocycle(
        shift,
        &read_json(&args.cocycle)?,
        caps,
    )?)
}

fn load_configuration(shift: &Subshift, path: &Path) -> Result<untwist_core::shift::Configuration> {
    Ok(jsonio::parse_configuration(
        shift.group.clone(),
        shift.alphabet.clone(),
        &read_json(path)?,
    )?)
}

fn parse_schedule(s: &str) -> Result<Vec<(u32, u32)>> {
    s.split(',')
        .map(|pair| {
            let (l, r) = pair
                .split_once(':')
                .ok_or_else(|| anyhow!("schedule entries are inner:outer"))?;
            Ok((l.trim().parse()?, r.trim().parse()?))
        })
        .collect()
}

/// Text rendering: top-level keys one per line, nested values inline.
fn render_text(v: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = v {
        for (k, val) in map {
            out.push_str(&format!("{k}: {val}\n"));
        }
    } else {
        out.push_str(&format!("{v}\n"));
    }
    out
}
