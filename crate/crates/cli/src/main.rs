//! `handover`: run scenarios, benchmarks, traces, audits and key rotation.
//!
//! Exit codes: 0 success, 2 usage, 3 protocol rejection, 4 benchmark infeasible.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use handover_core::actors::{audit_frame_claim, rotate_group_key, Directory, FrameClaim, RsuError};
use handover_core::wire::{ACK_BYTES, REP_BYTES, REQ_BYTES};
use handover_simnet::bench::{bench_latency, bench_loss_series, BenchConfig, Fixture, LatencyConfig};
use handover_simnet::{canned, run_scenario, MsgKind, Scenario, SimError, Transcript, DEFAULT_SEED};

const EXIT_USAGE: u8 = 2;
const EXIT_REJECTED: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "handover", version, about = "Handover authentication simulator and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Seed for every random choice; virtual-time output is a function of it.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write outputs under this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ScenarioSource {
    /// Scenario file.
    #[arg(long, conflicts_with = "canned")]
    scenario: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    canned: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Registration, intra- and cross-domain handover and rotation on two domains.
    Demo {
        /// Run every attack scenario instead and check each is rejected.
        #[arg(long)]
        adversary: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario and emit its transcript.
    #[command(alias = "scenario")]
    Run {
        #[command(flatten)]
        source: ScenarioSource,
        /// Use the seed from the scenario file unless given.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in scenarios, or print one with --canned.
    Scenarios {
        #[arg(long)]
        canned: Option<String>,
    },
    /// Wall-clock latency, batch scaling and loss-ratio benchmarks.
    Bench {
        /// Offered request rate in req/s; repeat for a series.
        #[arg(long = "rate", default_values_t = [100u32, 1000, 2000, 5000])]
        rates: Vec<u32>,
        #[arg(long = "duration-ms", default_value_t = 1000)]
        duration_ms: u64,
        #[arg(long = "interval-ms", default_value_t = 1000)]
        interval_ms: u64,
        /// Worker threads feeding the RSU; defaults to available cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Handovers timed per phase.
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Have the RSU sign a vehicle's request as evidence and trace it to an identity.
    Trace {
        #[command(flatten)]
        source: ScenarioSource,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Audit an LEA attribution, optionally substituting another vehicle's identity.
    Audit {
        /// Claim that the request came from this vehicle instead (e.g. vn-1).
        #[arg(long)]
        substitute: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Rotate the group key, revoking the listed vehicles.
    Rotate {
        #[arg(long, default_value_t = 3)]
        vehicles: usize,
        /// Vehicle index to revoke; repeatable.
        #[arg(long)]
        revoke: Vec<usize>,
        /// Vehicle index whose update is lost; repeatable.
        #[arg(long = "drop-update")]
        drop_update: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

/// Failures mapped to exit codes.
enum Failure {
    Usage(String),
    Rejected(String),
    Infeasible(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::DeadlockDetected { .. } => Self::Rejected(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Demo { adversary: false, common } => cmd_demo(&common),
        Command::Demo { adversary: true, common } => cmd_demo_adversary(&common),
        Command::Run { source, seed, out } => cmd_run(&source, seed, out.as_deref()),
        Command::Scenarios { canned } => cmd_scenarios(canned.as_deref()),
        Command::Bench { rates, duration_ms, interval_ms, workers, samples, common } => {
            cmd_bench(&rates, duration_ms, interval_ms, workers, samples, &common)
        }
        Command::Trace { source, seed } => cmd_trace(&source, seed),
        Command::Audit { substitute, common } => cmd_audit(substitute.as_deref(), &common),
        Command::Rotate { vehicles, revoke, drop_update, common } => cmd_rotate(vehicles, &revoke, &drop_update, &common),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Rejected(m) => (EXIT_REJECTED, m),
                Failure::Infeasible(m) => (EXIT_INFEASIBLE, m),
                Failure::Io(e) => (1, e.to_string()),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load(source: &ScenarioSource, seed: Option<u64>, default: &str) -> Result<Scenario, Failure> {
    let sc = match (&source.scenario, &source.canned) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Scenario::parse(&text)?
        }
        (None, name) => {
            let name = name.as_deref().unwrap_or(default);
            canned::load(name).ok_or_else(|| Failure::Usage(format!("no built-in scenario {name}")))??
        }
    };
    Ok(match seed {
        Some(s) => sc.with_seed(s),
        None => sc,
    })
}

/// Writes to `dir/name` when an output directory is set, else to stdout.
fn emit(out: Option<&Path>, name: &str, body: &str) -> io::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), body)
        }
        None => io::stdout().write_all(body.as_bytes()),
    }
}

fn run_named(name: &str, seed: u64) -> Result<Transcript, Failure> {
    let sc = canned::load(name).expect("built-in scenario exists")?.with_seed(seed);
    Ok(run_scenario(&sc)?)
}

fn wire_summary(t: &Transcript) -> Result<String, Failure> {
    let mut out = String::new();
    let mut total = 0;
    for (kind, want) in [(MsgKind::Req, REQ_BYTES), (MsgKind::Rep, REP_BYTES), (MsgKind::Ack, ACK_BYTES)] {
        let sizes: Vec<usize> = t.messages(kind).map(|(_, b)| b.len()).collect();
        if sizes.is_empty() || sizes.iter().any(|&n| n != want) {
            return Err(Failure::Rejected(format!("{kind} sizes {sizes:?}, expected {want}")));
        }
        out.push_str(&format!("{kind} {want} bytes\n"));
        total += want;
    }
    out.push_str(&format!("total {total} bytes\n"));
    Ok(out)
}

fn cmd_demo(common: &Common) -> Outcome {
    let t = run_named("demo", common.seed)?;
    let mut report = format!("scenario demo seed={}\n", common.seed);
    report.push_str(&wire_summary(&t)?);
    let matched = t.count_any("key_agreement", "Match");
    let confirmed = t.count_any("handle_ack", "Confirmed");
    report.push_str(&format!("handovers confirmed {confirmed}\n"));
    report.push_str(&format!("Ks agreement {matched}/{confirmed} sessions match\n"));
    report.push_str(&format!("pseudonym updates applied {}\n", t.count_any("update", "Applied")));
    let ok = matched == confirmed && confirmed > 0;
    report.push_str(if ok { "verdict OK\n" } else { "verdict FAIL\n" });
    emit(common.out.as_deref(), "demo.txt", &report)?;
    if common.out.is_some() {
        emit(common.out.as_deref(), "demo.transcript", &t.render())?;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Rejected("session keys disagree".into()))
    }
}

fn cmd_demo_adversary(common: &Common) -> Outcome {
    let mut report = String::new();
    let mut failed = Vec::new();
    for name in canned::ATTACKS {
        match run_named(name, common.seed) {
            Ok(t) => {
                let mut rejections = std::collections::BTreeMap::<String, usize>::new();
                for e in t.events().filter(|e| {
                    !matches!(e.outcome.as_str(), "Accepted" | "Confirmed" | "Match" | "Started" | "Registered" | "Posted")
                        && e.actor != handover_simnet::engine::ADVERSARY
                }) {
                    *rejections.entry(format!("{}:{}={}", e.actor, e.event, e.outcome)).or_default() += 1;
                }
                let listed: Vec<String> = rejections.iter().map(|(k, n)| format!("{k} x{n}")).collect();
                report.push_str(&format!("{name} rejected {}\n", listed.join(" ")));
            }
            Err(Failure::Rejected(m)) => {
                report.push_str(&format!("{name} NOT REJECTED {m}\n"));
                failed.push(*name);
            }
            Err(e) => return Err(e),
        }
    }
    report.push_str(if failed.is_empty() { "all attacks rejected\n" } else { "some attacks were not rejected\n" });
    emit(common.out.as_deref(), "adversary.txt", &report)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Rejected(failed.join(", ")))
    }
}

fn cmd_run(source: &ScenarioSource, seed: Option<u64>, out: Option<&Path>) -> Outcome {
    let sc = load(source, seed, "honest")?;
    match run_scenario(&sc) {
        Ok(t) => Ok(emit(out, "transcript.txt", &t.render())?),
        Err(SimError::DeadlockDetected { unmet, transcript }) => {
            emit(out, "transcript.txt", &transcript.render())?;
            Err(Failure::Rejected(format!("unmet expectations: {}", unmet.join("; "))))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_scenarios(name: Option<&str>) -> Outcome {
    match name {
        None => {
            for n in canned::names() {
                println!("{n}");
            }
            Ok(())
        }
        Some(n) => {
            let text = canned::text(n).ok_or_else(|| Failure::Usage(format!("no built-in scenario {n}")))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bench(rates: &[u32], duration_ms: u64, interval_ms: u64, workers: Option<usize>, samples: usize, common: &Common) -> Outcome {
    let workers = workers.unwrap_or_else(|| BenchConfig::default().workers);
    if workers == 0 || samples == 0 || interval_ms == 0 {
        return Err(Failure::Infeasible("workers, samples and interval must be positive".into()));
    }
    if let Some(r) = rates.iter().find(|&&r| u64::from(r) * duration_ms < 1000) {
        return Err(Failure::Infeasible(format!("rate {r} req/s over {duration_ms} ms offers no requests")));
    }
    let lat = bench_latency(&LatencyConfig { samples, seed: common.seed, ..LatencyConfig::default() });
    let base = BenchConfig { duration_ms, interval_ms, workers, seed: common.seed, ..BenchConfig::default() };
    let loss = bench_loss_series(rates, &base);

    let mut lat_csv = Vec::new();
    lat.write_csv(&mut lat_csv).map_err(io::Error::from)?;
    let mut batch_csv = Vec::new();
    lat.write_batch_csv(&mut batch_csv).map_err(io::Error::from)?;
    let mut loss_csv = Vec::new();
    loss.write_csv(&mut loss_csv).map_err(io::Error::from)?;
    let (lat_csv, batch_csv, loss_csv) =
        (String::from_utf8_lossy(&lat_csv), String::from_utf8_lossy(&batch_csv), String::from_utf8_lossy(&loss_csv));

    match (common.out.as_deref(), common.format) {
        (Some(dir), _) => {
            emit(Some(dir), "latency.csv", &lat_csv)?;
            emit(Some(dir), "batch.csv", &batch_csv)?;
            emit(Some(dir), "loss.csv", &loss_csv)?;
        }
        (None, Format::Csv) => {
            emit(None, "", &format!("{lat_csv}\n{batch_csv}\n{loss_csv}"))?;
        }
        (None, Format::Text) => {
            let mut s = String::new();
            for p in &lat.phases {
                s.push_str(&format!(
                    "{:<11} mean {:.4} ms  p50 {:.4} ms  p95 {:.4} ms  (n={})\n",
                    p.phase, p.mean_ms, p.p50_ms, p.p95_ms, p.samples
                ));
            }
            s.push_str(&format!(
                "batch verify: {:.4} ms/request, R^2 {:.5}\n",
                lat.batch_fit.slope, lat.batch_fit.r_squared
            ));
            s.push_str(&format!("measured capacity {:.0} req/s with {} worker(s)\n", loss.capacity_rps, loss.workers));
            for r in &loss.rows {
                s.push_str(&format!(
                    "offered {:>6} req/s: served {} of {}, loss ratio {:.4}\n",
                    r.offered_rps, r.served, r.offered, r.loss_ratio()
                ));
            }
            emit(None, "", &s)?;
        }
    }
    Ok(())
}

fn cmd_trace(source: &ScenarioSource, seed: Option<u64>) -> Outcome {
    let sc = load(source, seed, "trace")?;
    let t = run_scenario(&sc)?;
    let mut any = false;
    for e in t.events().filter(|e| e.event == "trace" || e.event == "audit") {
        println!("{} {} {}", e.actor, e.event, e.outcome);
        any = true;
    }
    if !any {
        return Err(Failure::Usage("scenario has no report step".into()));
    }
    if t.events().any(|e| e.event == "trace" && (e.outcome.starts_with("BadEvidence") || e.outcome.starts_with("UnknownCH"))) {
        return Err(Failure::Rejected("trace failed".into()));
    }
    Ok(())
}

fn cmd_audit(substitute: Option<&str>, common: &Common) -> Outcome {
    let mut fx = Fixture::new(common.seed, 2);
    let mut directory = Directory::default();
    directory.publish(fx.rsu.id(), fx.rsu.verifying_key());
    let now = 2_000_000;
    let pk = *fx.rsu.pk_bytes();
    let (req, _) = fx.vehicles[0].start_handover(&pk, now, &mut fx.rng).map_err(|e| Failure::Rejected(e.to_string()))?;
    let evidence = fx.rsu.report_malicious(&req);
    let traced = fx.lea.trace(&evidence, &directory, now).map_err(|e| Failure::Rejected(e.to_string()))?;
    let mut claim = FrameClaim::from(&traced);
    if let Some(name) = substitute {
        let victim = fx
            .vehicles
            .iter()
            .find(|v| v.id() == name.as_bytes())
            .ok_or_else(|| Failure::Usage(format!("no vehicle {name}; known: vn-0, vn-1")))?;
        claim.id = victim.id().to_vec();
        claim.txid = *victim.credential().expect("registered").txid();
    }
    let verdict = audit_frame_claim(&fx.lea.params().lea_sig_pk, &directory, &evidence, &claim, &fx.ledger)
        .map_err(|e| Failure::Rejected(e.to_string()))?;
    let body = match common.format {
        Format::Text => format!(
            "traced {}\nclaimed {}\nverdict {verdict:?}\n",
            String::from_utf8_lossy(&traced.id),
            String::from_utf8_lossy(&claim.id)
        ),
        Format::Csv => format!(
            "traced_id,claimed_id,verdict\n{},{},{verdict:?}\n",
            String::from_utf8_lossy(&traced.id),
            String::from_utf8_lossy(&claim.id)
        ),
    };
    Ok(emit(common.out.as_deref(), "audit.txt", &body)?)
}

fn cmd_rotate(n: usize, revoke: &[usize], drop_update: &[usize], common: &Common) -> Outcome {
    if n == 0 {
        return Err(Failure::Usage("--vehicles must be positive".into()));
    }
    if let Some(i) = revoke.iter().chain(drop_update).find(|&&i| i >= n) {
        return Err(Failure::Usage(format!("vehicle index {i} out of range 0..{n}")));
    }
    let mut fx = Fixture::new(common.seed, n);
    let pk = *fx.rsu.pk_bytes();
    let mut now = 2_000_000;
    let mut owner = std::collections::BTreeMap::new();
    for (i, vn) in fx.vehicles.iter_mut().enumerate() {
        now += 1;
        let (req, session) = vn.start_handover(&pk, now, &mut fx.rng).map_err(|e| Failure::Rejected(e.to_string()))?;
        let (sid, rep) = fx.rsu.handle_request(&req, now, &mut fx.rng).map_err(|e| Failure::Rejected(e.to_string()))?;
        let out = vn.handle_reply(&session, &rep, now).map_err(|e| Failure::Rejected(e.to_string()))?;
        fx.rsu.handle_ack(sid, &out.ack).map_err(|e| Failure::Rejected(e.to_string()))?;
        owner.insert(sid, i);
    }
    for &i in revoke {
        let ch = *fx.vehicles[i].credential().expect("registered").ch();
        fx.rsm.revoke(ch, now).map_err(|e| Failure::Rejected(e.to_string()))?;
    }
    let outcome = rotate_group_key(&mut fx.lea, &mut [&mut fx.rsm], &mut [&mut fx.rsu], &mut fx.rng);
    let mut applied = vec![false; n];
    for (_, sid, msg) in &outcome.updates {
        let i = owner[sid];
        if !drop_update.contains(&i) {
            fx.vehicles[i].apply_update_from(&pk, msg).map_err(|e| Failure::Rejected(e.to_string()))?;
            applied[i] = true;
        }
    }
    let mut rows = Vec::new();
    let mut unexpected = Vec::new();
    for (i, vn) in fx.vehicles.iter_mut().enumerate() {
        now += 1;
        let (req, _) = vn.start_handover(&pk, now, &mut fx.rng).map_err(|e| Failure::Rejected(e.to_string()))?;
        let res = fx.rsu.handle_request(&req, now, &mut fx.rng);
        let after = match &res {
            Ok(_) => "Accepted".to_string(),
            Err(e) => format!("{e:?}"),
        };
        let should_pass = !revoke.contains(&i) && applied[i];
        if res.is_ok() != should_pass || (res.is_err() && res != Err(RsuError::UnknownCredential)) {
            unexpected.push(i);
        }
        rows.push((String::from_utf8_lossy(vn.id()).into_owned(), revoke.contains(&i), applied[i], after));
    }
    let body = match common.format {
        Format::Text => {
            let mut s = format!("epoch {} updates {}\n", outcome.epoch, outcome.updates.len());
            for (id, revoked, upd, after) in &rows {
                s.push_str(&format!("{id} revoked={revoked} update_applied={upd} next_request={after}\n"));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("vehicle,revoked,update_applied,next_request\n");
            for (id, revoked, upd, after) in &rows {
                s.push_str(&format!("{id},{revoked},{upd},{after}\n"));
            }
            s
        }
    };
    emit(common.out.as_deref(), "rotate.txt", &body)?;
    if unexpected.is_empty() {
        Ok(())
    } else {
        Err(Failure::Rejected(format!("unexpected post-rotation outcome for vehicles {unexpected:?}")))
    }
}
