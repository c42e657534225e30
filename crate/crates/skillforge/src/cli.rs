//! The `skillforge` command line. Exit codes are a stable contract, see the
//! `EXIT_*` constants.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use skillforge_core::bpmn::{generate_bpmn, serialize_bpmn};
use skillforge_core::codegen::{generate_skill_template, StateMachineProfile};
use skillforge_core::engine::{load_process, run_process, InstanceStatus, ProcessInstance};
use skillforge_core::io::parse_model;
use skillforge_core::model::{validate_model, Severity, SystemGroupModel, ValidationReport};
use skillforge_core::runtime::SkillAccess;

use crate::host::{Host, PlantMode};
use crate::remote::RemoteSkills;
use crate::server::{serve, AppState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_OVERWRITE: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "skillforge", version, about = "Validate system group models, generate skill templates and BPMN processes, run them")]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Skills,
    Bpmn,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check a model against all validation rules.
    Validate {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Write skill templates or BPMN processes for a valid model.
    Generate {
        model: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Activity to map (bpmn); all activities when omitted.
        #[arg(long)]
        activity: Option<String>,
        /// Skill interface name or function name to generate (skills); all bindings when omitted.
        #[arg(long)]
        binding: Option<String>,
        #[arg(long, default_value = "generated")]
        out: PathBuf,
        /// Overwrite existing files.
        #[arg(long)]
        force: bool,
        /// Comma separated acting states that get a stub method.
        #[arg(long, value_delimiter = ',')]
        acting_states: Option<Vec<String>>,
    },
    /// Execute a BPMN process to completion and print its trace.
    Run {
        process: PathBuf,
        /// Initial process variable; the value is read as JSON, else as text.
        #[arg(long = "var", value_name = "NAME=VALUE", value_parser = parse_var)]
        vars: Vec<(String, Value)>,
        #[arg(long, value_enum, default_value = "labplant")]
        plant: PlantMode,
        /// Use the skills of a running `skillforge serve` instead of embedded ones.
        #[arg(long)]
        registry_url: Option<String>,
        /// Start the simulated plant with an empty raw material storage.
        #[arg(long)]
        empty_inventory: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Host the skill registry and process engine over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
        port: u16,
        #[arg(long, value_enum, default_value = "labplant")]
        plant: PlantMode,
        #[arg(long)]
        empty_inventory: bool,
    },
}

fn parse_var(text: &str) -> Result<(String, Value), String> {
    let (name, raw) = text.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{text}'"))?;
    if name.is_empty() {
        return Err("variable name is empty".into());
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    Ok((name.to_owned(), value))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_PARSE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match cli.command {
        Cmd::Validate { model, format } => validate(&model, format, out, err),
        Cmd::Generate { model, kind, activity, binding, out: dir, force, acting_states } => {
            let selection = Selection { activity, binding, acting_states };
            generate(&model, kind, &selection, &dir, force, out, err)
        }
        Cmd::Run { process, vars, plant, registry_url, empty_inventory, format } => {
            let host = Host::embedded(plant, empty_inventory);
            execute(&process, vars.into_iter().collect(), &host, registry_url.as_deref(), format, out, err)
        }
        Cmd::Serve { port, plant, empty_inventory } => run_server(port, Host::embedded(plant, empty_inventory), out, err),
    }
}

fn load_model(path: &Path, err: &mut dyn Write) -> Result<SystemGroupModel, i32> {
    let bytes = std::fs::read(path).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })?;
    parse_model(&bytes).map_err(|e| {
        let _ = writeln!(err, "error: {}: {e}", path.display());
        EXIT_PARSE
    })
}

fn print_report(report: &ValidationReport, format: Format, out: &mut dyn Write) {
    match format {
        Format::Json => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(report).expect("report serializes"));
        }
        Format::Text => {
            for f in &report.findings {
                let severity = match f.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                let _ = writeln!(out, "{severity} {:?} {}: {}", f.rule_id, f.location, f.message);
            }
            let errors = report.findings.iter().filter(|f| f.severity == Severity::Error).count();
            let _ = writeln!(out, "{errors} error(s), {} warning(s)", report.findings.len() - errors);
        }
    }
}

fn validate(path: &Path, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let model = match load_model(path, err) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let report = validate_model(&model);
    print_report(&report, format, out);
    if report.has_errors() {
        EXIT_INVALID
    } else {
        EXIT_OK
    }
}

struct Selection {
    activity: Option<String>,
    binding: Option<String>,
    acting_states: Option<Vec<String>>,
}

/// File name for an activity: lower case, runs of other characters as `_`.
pub fn file_stem(name: &str) -> String {
    let mut stem = String::new();
    for c in name.chars() {
        if c.is_alphanumeric() {
            stem.extend(c.to_lowercase());
        } else if !stem.is_empty() && !stem.ends_with('_') {
            stem.push('_');
        }
    }
    let stem = stem.trim_end_matches('_');
    if stem.is_empty() { "process".to_owned() } else { stem.to_owned() }
}

fn generate(
    path: &Path,
    kind: Kind,
    selection: &Selection,
    dir: &Path,
    force: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let model = match load_model(path, err) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let report = validate_model(&model);
    if report.has_errors() {
        print_report(&report, Format::Text, err);
        return EXIT_INVALID;
    }
    let files = match kind {
        Kind::Skills => skill_files(&model, selection),
        Kind::Bpmn => bpmn_files(&model, selection),
    };
    let files = match files {
        Ok(f) => f,
        Err((code, message)) => {
            let _ = writeln!(err, "error: {message}");
            return code;
        }
    };

    let existing: Vec<PathBuf> = files.iter().map(|(p, _)| dir.join(p)).filter(|p| p.exists()).collect();
    if !force && !existing.is_empty() {
        for p in &existing {
            let _ = writeln!(err, "error: {} exists, pass --force to overwrite", p.display());
        }
        return EXIT_OVERWRITE;
    }
    for (rel, text) in &files {
        let target = dir.join(rel);
        let written = target
            .parent()
            .map_or(Ok(()), std::fs::create_dir_all)
            .and_then(|_| std::fs::write(&target, text));
        if let Err(e) = written {
            let _ = writeln!(err, "error: cannot write {}: {e}", target.display());
            return EXIT_FAILED;
        }
        let _ = writeln!(out, "{}", target.display());
    }
    EXIT_OK
}

type Files = Result<Vec<(PathBuf, String)>, (i32, String)>;

fn skill_files(model: &SystemGroupModel, selection: &Selection) -> Files {
    let mut profile = StateMachineProfile::default();
    if let Some(states) = &selection.acting_states {
        profile.acting_states = states.iter().map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect();
    }
    let bindings: Vec<_> = model
        .deployment
        .iter()
        .filter(|b| {
            selection
                .binding
                .as_deref()
                .is_none_or(|sel| b.skill_interface_name == sel || b.function_ref.function == sel)
        })
        .collect();
    if bindings.is_empty() {
        return Err((EXIT_PARSE, format!("no deployment binding matches '{}'", selection.binding.as_deref().unwrap_or(""))));
    }
    let mut files = Vec::new();
    for b in bindings {
        let t = generate_skill_template(model, b, &profile).map_err(|e| (EXIT_INVALID, e.to_string()))?;
        for w in &t.warnings {
            log::warn!("{}: {w}", t.unit_name);
        }
        let path = PathBuf::from(&t.target_path);
        if files.iter().any(|(p, _)| *p == path) {
            return Err((EXIT_INVALID, format!("two bindings generate {}", t.target_path)));
        }
        files.push((path, t.source_text));
    }
    Ok(files)
}

fn bpmn_files(model: &SystemGroupModel, selection: &Selection) -> Files {
    let names: Vec<&str> = match &selection.activity {
        Some(a) => vec![a.as_str()],
        None => model.activities.iter().map(|a| a.name.as_str()).collect(),
    };
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for name in names {
        if model.activity(name).is_none() {
            return Err((EXIT_PARSE, format!("activity '{name}' does not exist")));
        }
        let doc = generate_bpmn(model, name).map_err(|e| (EXIT_INVALID, e.to_string()))?;
        let mut stem = file_stem(name);
        let mut n = 2;
        while files.iter().any(|(p, _)| *p == Path::new(&format!("{stem}.bpmn"))) {
            stem = format!("{}_{n}", file_stem(name));
            n += 1;
        }
        files.push((PathBuf::from(format!("{stem}.bpmn")), serialize_bpmn(&doc)));
    }
    Ok(files)
}

fn execute(
    path: &Path,
    variables: BTreeMap<String, Value>,
    host: &Host,
    registry_url: Option<&str>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let xml = match std::fs::read_to_string(path) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return EXIT_PARSE;
        }
    };
    let definition = match load_process(&xml) {
        Ok(d) => Arc::new(d),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {} {e}", path.display(), e.code());
            return EXIT_PARSE;
        }
    };
    let remote;
    let access: &dyn SkillAccess = match registry_url {
        None => host.registry.as_ref(),
        Some(url) => match RemoteSkills::new(url) {
            Ok(r) => {
                remote = r;
                &remote
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_PARSE;
            }
        },
    };
    let instance = match run_process(definition, variables, access) {
        Ok(i) => i,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILED;
        }
    };
    let plant = if registry_url.is_none() { host.plant_snapshot() } else { None };
    print_run(&instance, plant.map(|p| serde_json::to_value(p).expect("plant serializes")), format, out);
    match instance.status() {
        InstanceStatus::Completed => EXIT_OK,
        _ => EXIT_FAILED,
    }
}

fn print_run(instance: &ProcessInstance, plant: Option<Value>, format: Format, out: &mut dyn Write) {
    let status = instance.status();
    match format {
        Format::Json => {
            let _ = write!(out, "{}", instance.trace_json_lines());
            let summary = json!({
                "status": status.label(),
                "errorCode": status.error_code(),
                "variables": instance.variables(),
                "plant": plant,
            });
            let _ = writeln!(out, "{summary}");
        }
        Format::Text => {
            for e in instance.trace() {
                let kind = serde_json::to_value(e.kind).expect("kind serializes");
                let detail = if e.detail.is_empty() { String::new() } else { serde_json::to_string(&e.detail).expect("detail serializes") };
                let _ = writeln!(out, "{:>4} {:<14} {:<32} {detail}", e.seq, kind.as_str().unwrap_or(""), e.element_id);
            }
            match status.error_code() {
                Some(code) => {
                    let _ = writeln!(out, "status: Failed ({code})");
                }
                None => {
                    let _ = writeln!(out, "status: {}", status.label());
                }
            }
            if let Some(plant) = plant {
                let _ = writeln!(out, "plant: {}", serde_json::to_string_pretty(&plant).expect("plant serializes"));
            }
        }
    }
}

fn run_server(port: u16, host: Host, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILED;
        }
    };
    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
    let result = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        let _ = writeln!(out, "listening on http://{}", listener.local_addr()?);
        let _ = out.flush();
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        };
        serve(listener, AppState::new(host), shutdown).await
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILED
        }
    }
}
