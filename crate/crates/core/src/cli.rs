//! Command-line front end. Text output prints numbers with 4 decimals; CSV
//! and JSON carry full precision. History labels are one-based.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::game::{histories, load_game, Belief, GameSpec, HistoryIndex, Regret};
use crate::informed::{build_informed_lp, solve_informed};
use crate::sim::simulate;
use crate::uninformed::{build_dual_lp, build_regret_lp, build_uninformed_lp, regret_based_play, regret_trace, solve_uninformed};
use crate::verify::{run_verify_suite, CheckStatus};

#[derive(Debug, Parser)]
#[command(name = "stochgame", version, about = "Security strategies for one-sided stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Player {
    Informed,
    Uninformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TraceMode {
    All,
    Online,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Informed,
    Uninformed,
    Dual,
    Regret,
}

#[derive(Debug, clap::Args)]
struct GameArgs {
    /// Game description file (JSON).
    game: PathBuf,
    /// Override the horizon stored in the file.
    #[arg(long)]
    horizon: Option<usize>,
    /// Override the initial distribution, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    initial: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the history-based LP of one player.
    Solve {
        #[arg(value_enum)]
        player: Player,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Print the game value.
    Value {
        #[command(flatten)]
        game: GameArgs,
    },
    /// Mixes and regrets of the regret-based strategy.
    RegretTrace {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = TraceMode::All)]
        trace: TraceMode,
        /// Stage-1 regret instead of the primal LP's initial regret.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<f64>>,
        /// Informed actions (labels or one-based indices) for online mode.
        #[arg(long, value_delimiter = ',')]
        actions: Option<Vec<String>>,
    },
    /// Monte Carlo play of both security strategies.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the oracle suite.
    Verify {
        #[command(flatten)]
        game: GameArgs,
    },
    /// Print one of the LPs in CPLEX-LP format.
    DumpLp {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum)]
        which: Which,
        /// Regret for the dual and regret LPs (default: zero vector).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<f64>>,
        /// Stages after the current one for the regret LP (default: N - 1).
        #[arg(long)]
        remaining: Option<usize>,
    },
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 on usage or validation errors,
/// 2 on numerical failures or failed oracle checks.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_cli_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e)
}

/// Four decimals without a negative zero.
fn fmt4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn load(args: &GameArgs) -> Result<GameSpec> {
    let mut spec = load_game(&args.game)?;
    if let Some(n) = args.horizon {
        spec = spec.with_horizon(n)?;
    }
    if let Some(p) = &args.initial {
        spec = spec.with_initial(&Belief::new(p.clone())?)?;
    }
    Ok(spec)
}

fn regret_arg(spec: &GameSpec, alpha: &Option<Vec<f64>>) -> Result<Option<Regret>> {
    match alpha {
        None => Ok(None),
        Some(v) if v.len() == spec.num_states() => Ok(Some(Regret::new(v.clone())?)),
        Some(v) => Err(Error::Validation(format!(
            "--alpha has {} entries, game has {} states",
            v.len(),
            spec.num_states()
        ))),
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Solve { player, game } => {
            let spec = load(&game)?;
            match player {
                Player::Informed => print_informed(&spec, game.format, out)?,
                Player::Uninformed => print_uninformed(&spec, game.format, out)?,
            }
            Ok(0)
        }
        Command::Value { game } => {
            let spec = load(&game)?;
            let v = solve_informed(&spec)?.value;
            match game.format {
                Format::Text => writeln!(out, "{}", fmt4(v)),
                Format::Csv => writeln!(out, "value\n{v}"),
                Format::Json => writeln!(out, "{}", json!({ "value": v })),
            }
            .map_err(io)?;
            Ok(0)
        }
        Command::RegretTrace {
            game,
            trace,
            alpha,
            actions,
        } => {
            let spec = load(&game)?;
            let alpha = regret_arg(&spec, &alpha)?;
            match trace {
                TraceMode::All => {
                    if actions.is_some() {
                        return Err(Error::Validation("--actions requires --trace online".into()));
                    }
                    print_trace(&spec, alpha.as_ref(), game.format, out)?;
                }
                TraceMode::Online => {
                    let Some(actions) = actions else {
                        return Err(Error::Validation("--trace online requires --actions".into()));
                    };
                    let acts = parse_actions(&spec, &actions)?;
                    print_online(&spec, alpha.as_ref(), &acts, game.format, out)?;
                }
            }
            Ok(0)
        }
        Command::Simulate { game, runs, seed } => {
            let spec = load(&game)?;
            let sigma = solve_informed(&spec)?.strategy;
            let tau = solve_uninformed(&spec)?.strategy;
            let rep = simulate(&spec, &sigma, &tau, runs, seed)?;
            match game.format {
                Format::Text => writeln!(
                    out,
                    "runs       {}\nseed       {}\nmean       {}\nstd_error  {}\ngame_value {}",
                    rep.runs,
                    rep.seed,
                    fmt4(rep.mean),
                    fmt4(rep.std_error),
                    fmt4(rep.game_value)
                ),
                Format::Csv => writeln!(
                    out,
                    "runs,seed,mean,std_error,game_value\n{},{},{},{},{}",
                    rep.runs, rep.seed, rep.mean, rep.std_error, rep.game_value
                ),
                Format::Json => writeln!(out, "{}", serde_json::to_string(&rep)?),
            }
            .map_err(io)?;
            Ok(0)
        }
        Command::Verify { game } => {
            let spec = load(&game)?;
            let checks = run_verify_suite(&spec)?;
            let failed = checks.iter().any(|c| c.status == CheckStatus::Fail);
            let status = |s: CheckStatus| match s {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "skip",
            };
            match game.format {
                Format::Text => {
                    writeln!(out, "{:<30} {:>10} {:>8}  status  detail", "check", "gap", "tol").map_err(io)?;
                    for c in &checks {
                        writeln!(
                            out,
                            "{:<30} {:>10.2e} {:>8.0e}  {:<6}  {}",
                            c.name,
                            c.gap,
                            c.tolerance,
                            status(c.status),
                            c.detail
                        )
                        .map_err(io)?;
                    }
                }
                Format::Csv => {
                    writeln!(out, "check,gap,tolerance,status").map_err(io)?;
                    for c in &checks {
                        writeln!(out, "{},{},{},{}", c.name, c.gap, c.tolerance, status(c.status)).map_err(io)?;
                    }
                }
                Format::Json => {
                    let rows: Vec<_> = checks
                        .iter()
                        .map(|c| {
                            json!({"check": c.name, "gap": c.gap, "tolerance": c.tolerance,
                                   "status": status(c.status), "detail": c.detail})
                        })
                        .collect();
                    writeln!(out, "{}", serde_json::Value::Array(rows)).map_err(io)?;
                }
            }
            Ok(if failed { 2 } else { 0 })
        }
        Command::DumpLp {
            game,
            which,
            alpha,
            remaining,
        } => {
            let spec = load(&game)?;
            let n = spec.horizon();
            let alpha = regret_arg(&spec, &alpha)?.unwrap_or_else(|| Regret::zeros(spec.num_states()));
            let lp = match which {
                Which::Informed => build_informed_lp(&spec, n, &spec.initial()).lp,
                Which::Uninformed => build_uninformed_lp(&spec, n, &spec.initial()).lp,
                Which::Dual => build_dual_lp(&spec, n, &alpha).lp,
                Which::Regret => build_regret_lp(&spec, remaining.unwrap_or(n - 1), &alpha).lp,
            };
            write!(out, "{}", lp.to_cplex_lp()).map_err(io)?;
            Ok(0)
        }
    }
}

fn parse_actions(spec: &GameSpec, raw: &[String]) -> Result<Vec<usize>> {
    raw.iter()
        .map(|s| {
            if let Some(i) = spec.p1_index(s) {
                return Ok(i);
            }
            match s.parse::<usize>() {
                Ok(i) if (1..=spec.num_actions_p1()).contains(&i) => Ok(i - 1),
                _ => Err(Error::Validation(format!("unknown informed action {s:?}"))),
            }
        })
        .collect()
}

fn all_histories(spec: &GameSpec) -> Vec<HistoryIndex> {
    (1..=spec.horizon())
        .flat_map(|t| histories(spec.num_actions_p1(), t))
        .collect()
}

fn mix_text(mix: &[f64]) -> String {
    mix.iter().map(|&x| fmt4(x)).collect::<Vec<_>>().join(" ")
}

fn mix_csv(mix: &[f64]) -> String {
    mix.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn print_informed(spec: &GameSpec, format: Format, out: &mut dyn Write) -> Result<()> {
    let sol = solve_informed(spec)?;
    let hist = all_histories(spec);
    let nk = spec.num_states();
    // belief p_t(I_t) from the column sums of Z_{I_t}; None if unreachable
    let belief = |h: &HistoryIndex| {
        let sums: Vec<f64> = (0..nk)
            .map(|k| sol.realization.column_sum(h.stage(), h.ordinal(), k).max(0.0))
            .collect();
        let total: f64 = sums.iter().sum();
        (total > crate::informed::ZERO_COLUMN_TOL).then(|| sums.iter().map(|s| s / total).collect::<Vec<f64>>())
    };
    match format {
        Format::Text => {
            writeln!(out, "value {}", fmt4(sol.value)).map_err(io)?;
            let width = 8 * spec.num_actions_p1().max(nk);
            let label_width = spec.state_labels().iter().map(|s| s.len()).max().unwrap_or(0).max(6);
            write!(out, "{:<label_width$}", "").map_err(io)?;
            for h in &hist {
                write!(out, " | {:<width$}", h.label()).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
            for k in 0..nk {
                write!(out, "{:<label_width$}", spec.state_labels()[k]).map_err(io)?;
                for h in &hist {
                    let m = sol.strategy.get(h.stage(), h.ordinal(), k);
                    write!(out, " | {:<width$}", mix_text(m)).map_err(io)?;
                }
                writeln!(out).map_err(io)?;
            }
            write!(out, "{:<label_width$}", "belief").map_err(io)?;
            for h in &hist {
                let cell = belief(h).map(|b| mix_text(&b)).unwrap_or_else(|| "-".into());
                write!(out, " | {:<width$}", cell).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        Format::Csv => {
            writeln!(out, "record,stage,history,state,values").map_err(io)?;
            writeln!(out, "value,,,,{}", sol.value).map_err(io)?;
            for h in &hist {
                for k in 0..nk {
                    let m = sol.strategy.get(h.stage(), h.ordinal(), k);
                    writeln!(out, "sigma,{},{},{},{}", h.stage(), h.label(), spec.state_labels()[k], mix_csv(m))
                        .map_err(io)?;
                }
                if let Some(b) = belief(h) {
                    writeln!(out, "belief,{},{},,{}", h.stage(), h.label(), mix_csv(&b)).map_err(io)?;
                }
            }
        }
        Format::Json => {
            let rows: Vec<_> = hist
                .iter()
                .map(|h| {
                    let sigma: Vec<_> = (0..nk)
                        .map(|k| sol.strategy.get(h.stage(), h.ordinal(), k).to_vec())
                        .collect();
                    json!({"stage": h.stage(), "history": h.label(), "sigma": sigma, "belief": belief(h)})
                })
                .collect();
            writeln!(out, "{}", json!({"value": sol.value, "histories": rows})).map_err(io)?;
        }
    }
    Ok(())
}

fn print_uninformed(spec: &GameSpec, format: Format, out: &mut dyn Write) -> Result<()> {
    let sol = solve_uninformed(spec)?;
    let hist = all_histories(spec);
    let alpha = sol.initial_regret.values();
    match format {
        Format::Text => {
            writeln!(out, "value {}", fmt4(sol.value)).map_err(io)?;
            writeln!(out, "alpha_1 {}", mix_text(alpha)).map_err(io)?;
            let width = 8 * spec.num_actions_p2();
            write!(out, "{:<7}", "").map_err(io)?;
            for h in &hist {
                write!(out, " | {:<width$}", h.label()).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
            write!(out, "{:<7}", "tau").map_err(io)?;
            for h in &hist {
                write!(out, " | {:<width$}", mix_text(sol.strategy.get(h.stage(), h.ordinal()))).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        Format::Csv => {
            writeln!(out, "record,stage,history,values").map_err(io)?;
            writeln!(out, "value,,,{}", sol.value).map_err(io)?;
            writeln!(out, "alpha_1,,,{}", mix_csv(alpha)).map_err(io)?;
            for h in &hist {
                let m = sol.strategy.get(h.stage(), h.ordinal());
                writeln!(out, "tau,{},{},{}", h.stage(), h.label(), mix_csv(m)).map_err(io)?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = hist
                .iter()
                .map(|h| json!({"stage": h.stage(), "history": h.label(), "tau": sol.strategy.get(h.stage(), h.ordinal())}))
                .collect();
            writeln!(out, "{}", json!({"value": sol.value, "alpha_1": alpha, "histories": rows})).map_err(io)?;
        }
    }
    Ok(())
}

fn print_trace(spec: &GameSpec, alpha: Option<&Regret>, format: Format, out: &mut dyn Write) -> Result<()> {
    let trace = regret_trace(spec, alpha)?;
    let hist = all_histories(spec);
    match format {
        Format::Text => {
            let width = 8 * spec.num_actions_p2().max(spec.num_states());
            write!(out, "{:<7}", "history").map_err(io)?;
            for h in &hist {
                write!(out, " | {:<width$}", h.label()).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
            write!(out, "{:<7}", "tau").map_err(io)?;
            for h in &hist {
                write!(out, " | {:<width$}", mix_text(trace.strategy.get(h.stage(), h.ordinal()))).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
            write!(out, "{:<7}", "regret").map_err(io)?;
            for h in &hist {
                let r = trace.regrets[h.stage() - 1][h.ordinal()].values();
                write!(out, " | {:<width$}", mix_text(r)).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        Format::Csv => {
            writeln!(out, "stage,history,tau,regret,dual_value").map_err(io)?;
            for h in &hist {
                let (t, o) = (h.stage(), h.ordinal());
                writeln!(
                    out,
                    "{t},{},{},{},{}",
                    h.label(),
                    mix_csv(trace.strategy.get(t, o)),
                    mix_csv(trace.regrets[t - 1][o].values()),
                    trace.dual_values[t - 1][o]
                )
                .map_err(io)?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = hist
                .iter()
                .map(|h| {
                    let (t, o) = (h.stage(), h.ordinal());
                    json!({"stage": t, "history": h.label(), "tau": trace.strategy.get(t, o),
                           "regret": trace.regrets[t - 1][o].values(), "dual_value": trace.dual_values[t - 1][o]})
                })
                .collect();
            writeln!(out, "{}", serde_json::Value::Array(rows)).map_err(io)?;
        }
    }
    Ok(())
}

fn print_online(
    spec: &GameSpec,
    alpha: Option<&Regret>,
    actions: &[usize],
    format: Format,
    out: &mut dyn Write,
) -> Result<()> {
    if actions.len() + 1 < spec.horizon() {
        return Err(Error::Validation(format!(
            "online trace of {} stages needs at least {} actions",
            spec.horizon(),
            spec.horizon() - 1
        )));
    }
    // the last stage's action does not affect any output
    let play = regret_based_play(spec, alpha, |t, _| actions.get(t - 1).copied().unwrap_or(0))?;
    for (t, (mix, regret)) in play.mixes.iter().zip(&play.regrets).enumerate() {
        let line = match format {
            Format::Text => format!("stage {} mix {} regret {}", t + 1, mix_text(mix), mix_text(regret.values())),
            Format::Csv => format!("{},{},{}", t + 1, mix_csv(mix), mix_csv(regret.values())),
            Format::Json => json!({"stage": t + 1, "mix": mix, "regret": regret.values()}).to_string(),
        };
        if t == 0 && format == Format::Csv {
            writeln!(out, "stage,mix,regret").map_err(io)?;
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}
