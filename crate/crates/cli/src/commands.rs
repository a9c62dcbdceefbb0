//! Subcommand bodies. Each maps its failures onto an exit status.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::net::ToSocketAddrs;
use std::path::Path;
use std::time::Duration;

use anyhow::{anyhow, Context as _};
use fogsim_core::calibrate::{apply_knob, calibrate as fit, CalibrationTarget, Knob, Params};
use fogsim_core::config::{parse_config, serialize_config};
use fogsim_core::engine::{run, RunOutput};
use fogsim_core::error::SimError;
use fogsim_core::experiments::{
    calibrate_ab, calibrate_c, run_experiment_ab, run_experiment_c, run_experiment_rescue,
    write_results, ExperimentConfig, ExperimentError, ResultRow,
};
use fogsim_core::model::Role;
use fogsim_core::report::render_report;
use fogsim_core::scenario::Scenario;
use fogsim_probe::{EchoServer, ProbeConfig, ProbeError, Transport};

use crate::{CalibrateArgs, ExperimentKind, Failure, ProbeArgs, Status};

type CmdResult = Result<(), Failure>;

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::new(Status::Runtime, e)
}

fn usage(message: String) -> Failure {
    Failure::new(Status::Usage, anyhow!(message))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Failure::new(Status::Config, e))?;
    parse_config(&text)
        .map_err(|e| Failure::new(Status::Config, anyhow!("{}:\n{e}", path.display())))
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Config(_) => Failure::new(Status::Config, e),
        _ => runtime(e),
    }
}

/// Writes `text` to `path`, or to standard output for `-`.
fn emit(path: &Path, text: &str) -> CmdResult {
    if path == Path::new("-") {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(runtime)
    } else {
        std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(runtime)
    }
}

/// Result rows for a single run: everything, then each workload class when
/// there are several.
fn simulation_rows(s: &Scenario, out: &RunOutput) -> Vec<ResultRow> {
    let fog = s.nodes.iter().filter(|n| n.role.is_fog()).count();
    let robots = s.nodes.iter().filter(|n| n.role == Role::Robot).count();
    let policy = s.policy.name();
    let mut rows = vec![ResultRow::from_run(
        "simulate", policy, fog, robots, None, out, s.seed,
    )];
    if s.workloads.len() > 1 {
        for w in &s.workloads {
            let key = format!("class:{}", w.label);
            let Some(stats) = out.stats.get(&key) else {
                continue;
            };
            let mut row = ResultRow::from_run(
                "simulate",
                &format!("{policy}/{key}"),
                fog,
                robots,
                None,
                out,
                s.seed,
            );
            row.stats = stats.clone();
            row.deadline_met_fraction = class_deadline_fraction(out, &w.label);
            row.resolution_mix = class_mix(out, &w.label);
            rows.push(row);
        }
    }
    rows
}

fn class_deadline_fraction(out: &RunOutput, class: &str) -> Option<f64> {
    let with: Vec<_> = out
        .trace
        .records
        .iter()
        .filter(|r| r.class == class && r.deadline_ms.is_some())
        .collect();
    (!with.is_empty())
        .then(|| with.iter().filter(|r| r.met_deadline()).count() as f64 / with.len() as f64)
}

fn class_mix(out: &RunOutput, class: &str) -> String {
    let mut mix: BTreeMap<&str, usize> = BTreeMap::new();
    for r in out.trace.records.iter().filter(|r| r.class == class) {
        if let Some(res) = r.resolution {
            *mix.entry(res.as_str()).or_default() += 1;
        }
    }
    mix.iter()
        .map(|(k, n)| format!("{k}={n}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn simulate(config: &Path, out_path: &Path, trace: Option<&Path>) -> CmdResult {
    let s = load_scenario(config)?;
    let out = run(&s).map_err(sim_failure)?;
    emit(
        out_path,
        &write_results(&simulation_rows(&s, &out), s.seed, &s.config_hash()),
    )?;
    if let Some(t) = trace {
        emit(t, &out.trace.serialize())?;
    }
    Ok(())
}

fn parse_target(spec: &str, tolerance: f64) -> Result<CalibrationTarget, Failure> {
    let (label, ms) = spec
        .split_once('=')
        .ok_or_else(|| usage(format!("target {spec:?} is not LABEL=MS")))?;
    let ms: f64 = ms
        .trim()
        .parse()
        .map_err(|_| usage(format!("target {spec:?}: {ms:?} is not a number")))?;
    Ok(CalibrationTarget::new(label.trim(), ms, tolerance))
}

fn parse_knob(spec: &str, default_target: &str) -> Result<Knob, Failure> {
    let bad = || usage(format!("knob {spec:?} is not NAME=LO:HI[@LABEL]"));
    let (name, rest) = spec.split_once('=').ok_or_else(bad)?;
    let (range, target) = rest.split_once('@').unwrap_or((rest, default_target));
    let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok(Knob::new(name.trim(), lo, hi, target.trim()))
}

fn apply_params(
    base: &Scenario,
    params: &Params,
) -> Result<Scenario, fogsim_core::error::ConfigError> {
    let mut s = base.clone();
    for (name, value) in params {
        apply_knob(&mut s, name, *value)?;
    }
    Ok(s)
}

pub fn calibrate(a: &CalibrateArgs) -> CmdResult {
    let base = load_scenario(&a.config)?;
    let targets: Vec<CalibrationTarget> = a
        .target
        .iter()
        .map(|t| parse_target(t, a.tolerance))
        .collect::<Result<_, _>>()?;
    let knobs: Vec<Knob> = a
        .knob
        .iter()
        .enumerate()
        .map(|(i, k)| parse_knob(k, &targets[i.min(targets.len() - 1)].label))
        .collect::<Result<_, _>>()?;
    // Reject unknown knob names before any simulation runs.
    for k in &knobs {
        apply_knob(&mut base.clone(), &k.name, k.lo)
            .map_err(|e| Failure::new(Status::Config, e))?;
    }
    let labels: Vec<String> = targets.iter().map(|t| t.label.clone()).collect();
    let result = fit(&targets, &knobs, Params::new(), |p: &Params| {
        let s = apply_params(&base, p).map_err(|e| e.to_string())?;
        let out = run(&s).map_err(|e| e.to_string())?;
        labels
            .iter()
            .map(|l| {
                out.mean_ms(l)
                    .map(|m| (l.clone(), m))
                    .ok_or_else(|| format!("no completed requests for {l}"))
            })
            .collect()
    })
    .map_err(|e| Failure::new(Status::Calibration, e))?;
    for (name, value) in &result.params {
        println!("{name} = {value}");
    }
    for t in &targets {
        println!(
            "{}: {:.4} ms (target {} ms)",
            t.label, result.achieved[&t.label], t.target_ms
        );
    }
    println!("evaluations: {}", result.evaluations);
    if let Some(out) = &a.out {
        let s = apply_params(&base, &result.params).map_err(|e| Failure::new(Status::Config, e))?;
        emit(out, &serialize_config(&s))?;
    }
    Ok(())
}

fn experiment_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::Calibration { .. } => Failure::new(Status::Calibration, e),
        ExperimentError::Sim(SimError::Config(_)) => Failure::new(Status::Config, e),
        _ => runtime(e),
    }
}

pub fn experiment(kind: ExperimentKind, out: &Path, seed: u64, stochastic: bool) -> CmdResult {
    let cfg = ExperimentConfig {
        seed,
        stochastic,
        ..ExperimentConfig::default()
    };
    let (name, rows) = match kind {
        ExperimentKind::Ab => {
            let params = calibrate_ab(&cfg).map_err(experiment_failure)?;
            ("ab", run_experiment_ab(&cfg, &params))
        }
        ExperimentKind::C => {
            let params = calibrate_c(&cfg).map_err(experiment_failure)?;
            ("c", run_experiment_c(&cfg, &params))
        }
        ExperimentKind::Rescue => ("rescue", run_experiment_rescue(&cfg)),
    };
    let rows = rows.map_err(experiment_failure)?;
    emit(out, &write_results(&rows, seed, &cfg.config_hash(name)))
}

fn probe_failure(e: ProbeError) -> Failure {
    match e {
        ProbeError::InvalidConfig(_) => Failure::new(Status::Usage, e),
        _ => runtime(e),
    }
}

pub fn probe(a: &ProbeArgs) -> CmdResult {
    let cfg = ProbeConfig {
        host: a.host.clone(),
        port: a.port,
        transport: if a.stream {
            Transport::Stream
        } else {
            Transport::Datagram
        },
        count: a.count,
        payload_bytes: a.size,
        interval_ms: a.interval,
        timeout_ms: a.timeout,
    };
    let r = fogsim_probe::probe(&cfg).map_err(probe_failure)?;
    println!(
        "{}:{} sent {} received {} lost {}",
        a.host,
        a.port,
        a.count,
        r.raw_rtts_ms.len(),
        r.lost
    );
    match r.stats.summary {
        Some(s) => println!(
            "rtt ms: min {:.3} mean {:.3} median {:.3} p95 {:.3} max {:.3}",
            s.min_ms, s.mean_ms, s.median_ms, s.p95_ms, s.max_ms
        ),
        None => println!("no replies"),
    }
    Ok(())
}

pub fn echo(bind: &str, port: u16, delay_ms: u64, stream: bool) -> CmdResult {
    let addr = (bind, port)
        .to_socket_addrs()
        .map_err(|e| usage(format!("bad bind address {bind}: {e}")))?
        .next()
        .ok_or_else(|| usage(format!("bad bind address {bind}")))?;
    let transport = if stream {
        Transport::Stream
    } else {
        Transport::Datagram
    };
    let server =
        EchoServer::start(addr, transport, Duration::from_millis(delay_ms)).map_err(runtime)?;
    println!(
        "echo listening on {} ({})",
        server.local_addr(),
        if stream { "stream" } else { "datagram" }
    );
    let _ = std::io::stdout().flush();
    server.wait();
    Ok(())
}

pub fn report(input: &Path) -> CmdResult {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("cannot read {}", input.display()))
        .map_err(runtime)?;
    let table = render_report(&text).map_err(|e| runtime(anyhow!("{}: {e}", input.display())))?;
    print!("{table}");
    Ok(())
}
