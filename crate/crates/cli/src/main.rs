//! `tmis-lab`: run honest sessions, attack scenarios and the attribute matrix.
//!
//! Exit status: 0 when every verdict matches the reference table, 2 when a run
//! completes but contradicts it, 1 on usage errors.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tmis_lab::attack_lab::{
    attribute_matrix_with, run_scenario, victim_id, victim_password, AttackReport, Bench, Leak, Scenario,
    ScenarioOptions, Tamper,
};
use tmis_lab::framework::{Message, SchemeId, SessionOutcome, Transcript, Value};

const EXIT_MISMATCH: u8 = 2;
const EXIT_USAGE: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "tmis-lab", version, about = "Smart-card authentication lab for telecare medical information systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one honest registration and login.
    Run {
        #[arg(long, value_parser = parse_scheme)]
        scheme: SchemeId,
        #[command(flatten)]
        common: Common,
    },
    /// Run an attack scenario and print its report.
    Attack {
        #[arg(long, value_parser = parse_scheme)]
        scheme: SchemeId,
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Tamper for tamper_login; defaults to the scheme's named tamper.
        #[arg(long, value_parser = parse_tamper)]
        tamper: Option<Tamper>,
        /// Restamp the replayed message's timestamp.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        refresh: bool,
        /// Ephemerals handed to the adversary in temp_info_leak.
        #[arg(long, default_value = "nonces", value_parser = parse_leak)]
        leak: Leak,
        /// Include per-trial records and the sample transcript.
        #[arg(long)]
        verbose: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Derive the security-attribute matrix.
    Matrix {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// List schemes and the scenarios that apply to each.
    List {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, env = "TMIS_LAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Freshness window for timestamp checks.
    #[arg(long = "delta-t", default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    delta_t: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
    Markdown,
}

fn parse_scheme(s: &str) -> Result<SchemeId, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = SchemeId::ALL.iter().map(|s| s.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = Scenario::ALL.iter().map(|s| s.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_tamper(s: &str) -> Result<Tamper, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = Tamper::ALL.iter().map(|t| t.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_leak(s: &str) -> Result<Leak, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = Leak::ALL.iter().map(|l| l.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.matches_reference { 0 } else { EXIT_MISMATCH })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

struct Output {
    text: String,
    matches_reference: bool,
}

fn dispatch(command: Command) -> Result<Output, tmis_lab::Error> {
    match command {
        Command::Run { scheme, common } => run(scheme, &common),
        Command::Attack { scheme, scenario, trials, tamper, refresh, leak, verbose, common } => {
            let opts = ScenarioOptions {
                trials: trials as usize,
                seed: common.seed,
                delta_t: common.delta_t,
                tamper,
                refresh_timestamp: refresh,
                leak,
            };
            let report = run_scenario(scheme, scenario, &opts)?;
            let report = if verbose { report } else { report.summary() };
            Ok(Output {
                text: render_report(&report, common.format),
                matches_reference: report.agrees_with_reference(),
            })
        }
        Command::Matrix { trials, common } => {
            let opts = ScenarioOptions {
                trials: trials as usize,
                seed: common.seed,
                delta_t: common.delta_t,
                ..Default::default()
            };
            let m = attribute_matrix_with(&opts)?;
            if let Err(e) = m.check_consistency() {
                return Err(tmis_lab::Error::InvalidInput(format!("matrix inconsistent with its reports: {e}")));
            }
            let text = match common.format {
                Format::Json => json(&m),
                Format::Markdown => m.to_markdown(),
                Format::Text => m.to_text(),
            };
            Ok(Output { text, matches_reference: m.matches_reference() })
        }
        Command::List { common } => Ok(Output { text: list(common.format), matches_reference: true }),
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn run(scheme: SchemeId, common: &Common) -> Result<Output, tmis_lab::Error> {
    let mut bench = Bench::new(scheme, common.seed, common.delta_t)?;
    let (outcome, tr) = bench.login(&victim_id(), &victim_password())?;
    let ok = outcome.is_success() && outcome.keys_match() != Some(false);
    let text = match common.format {
        Format::Json => json(&tr),
        Format::Text => transcript_text(&tr),
        Format::Markdown => transcript_markdown(&tr),
    };
    Ok(Output { text, matches_reference: ok })
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Bytes(b) => hex_string(b),
        Value::Point(p) => serde_json::to_string(&Value::Point(p.clone()))
            .map(|s| s.trim_start_matches("{\"point\":").trim_end_matches('}').to_owned())
            .unwrap_or_default(),
    }
}

fn hex_string(b: &[u8]) -> String {
    b.iter().map(|x| format!("{x:02x}")).collect()
}

fn message_fields(m: &Message) -> String {
    m.payload.iter().map(|(k, v)| format!("{k}={}", value_text(v))).collect::<Vec<_>>().join(" ")
}

fn outcome_lines(o: &SessionOutcome) -> Vec<String> {
    let mut lines = vec![format!("outcome: {o}")];
    if let SessionOutcome::MutualAuthSuccess { user_key, server_key } = o {
        if let Some(k) = user_key {
            lines.push(format!("user key:   {}", hex_string(k)));
        }
        if let Some(k) = server_key {
            lines.push(format!("server key: {}", hex_string(k)));
        }
        if user_key.is_none() && server_key.is_none() {
            lines.push("no session key defined".to_owned());
        }
    }
    lines
}

fn transcript_text(tr: &Transcript) -> String {
    let mut out = format!("{} seed {}\n", tr.scheme, tr.seed);
    for l in outcome_lines(&tr.outcome) {
        out.push_str(&l);
        out.push('\n');
    }
    for m in &tr.messages {
        out.push_str(&format!("t={:<3} {} {} -> {}: {}\n", m.sent_at, m.label, m.from, m.to, message_fields(m)));
    }
    let c = &tr.counters;
    out.push_str(&format!(
        "user ops:   {} hash, {} exp, {} ec, {} sym\n",
        c.user.hash, c.user.exp, c.user.ec_mul, c.user.sym
    ));
    out.push_str(&format!(
        "server ops: {} hash, {} exp, {} ec, {} sym\n",
        c.server.hash, c.server.exp, c.server.ec_mul, c.server.sym
    ));
    out
}

fn transcript_markdown(tr: &Transcript) -> String {
    let mut out = format!("### {} (seed {})\n\n", tr.scheme, tr.seed);
    for l in outcome_lines(&tr.outcome) {
        out.push_str(&format!("- {l}\n"));
    }
    out.push_str("\n| t | message | from | to | fields |\n|---|---|---|---|---|\n");
    for m in &tr.messages {
        out.push_str(&format!("| {} | {} | {} | {} | `{}` |\n", m.sent_at, m.label, m.from, m.to, message_fields(m)));
    }
    out
}

fn render_report(r: &AttackReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Text => r.to_text(),
        Format::Markdown => {
            let mut out = format!("### {} / {}\n\n| field | value |\n|---|---|\n", r.scheme, r.scenario);
            let rows = [
                ("variant", r.variant.clone().unwrap_or_else(|| "-".into())),
                ("vulnerable", r.vulnerable.to_string()),
                ("failure step", r.failure_step.clone().unwrap_or_else(|| "-".into())),
                ("trials", r.trials.to_string()),
                ("messages sent", r.messages_sent.to_string()),
                ("server hash ops", r.server_hash_ops.to_string()),
                ("expected vulnerable", r.expected_vulnerable.map_or("no claim".into(), |v| v.to_string())),
                ("matches reference", r.matches_reference.map_or("n/a".into(), |v| v.to_string())),
            ];
            for (k, v) in rows {
                out.push_str(&format!("| {k} | {v} |\n"));
            }
            for n in &r.notes {
                out.push_str(&format!("\n- {n}"));
            }
            if !r.notes.is_empty() {
                out.push('\n');
            }
            out
        }
    }
}

fn list(format: Format) -> String {
    let rows: Vec<(SchemeId, Vec<Scenario>)> =
        SchemeId::ALL.iter().map(|&s| (s, Scenario::ALL.into_iter().filter(|sc| sc.applies_to(s)).collect())).collect();
    match format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(s, scs)| {
                    serde_json::json!({
                        "scheme": s.as_str(),
                        "authors": s.authors(),
                        "scenarios": scs.iter().map(|sc| sc.as_str()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json(&v)
        }
        Format::Text => {
            let mut out = String::new();
            for (s, scs) in &rows {
                out.push_str(&format!("{:<12} {}\n", s.as_str(), s.authors()));
                for sc in scs {
                    out.push_str(&format!("    {sc}\n"));
                }
            }
            out
        }
        Format::Markdown => {
            let mut out = String::from("| scheme | authors | scenarios |\n|---|---|---|\n");
            for (s, scs) in &rows {
                let names: Vec<_> = scs.iter().map(|sc| sc.as_str()).collect();
                out.push_str(&format!("| {} | {} | {} |\n", s.as_str(), s.authors(), names.join(", ")));
            }
            out
        }
    }
}
