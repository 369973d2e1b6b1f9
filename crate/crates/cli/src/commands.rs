use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use causalbench_core::analysis::RunTable;
use causalbench_core::canonical;
use causalbench_core::compat::{check_scenario, Missing, Suggestion};
use causalbench_core::model::{
    expand_context, instrument, BenchmarkContext, BenchmarkRun, ComponentId, ComponentKind, Descriptor,
    HyperparameterSetting,
};
use causalbench_harness::{resolve_environment, Harness};
use causalbench_registry::archive::{pack_dir, unpack};
use causalbench_registry::{ComponentRecord, Page, PublicationRecord};
use causalbench_server::wire::{RunCreated, SuggestRequest, WhoAmI, ARCHIVE_CONTENT_TYPE};
use serde::Serialize;
use serde_json::{json, Value};

use crate::client::{component_path, with_query, Client, HttpSource};
use crate::config::{default_config_path, load_config, parse_server_url, CliConfig, CACHE_DIR_NAME};
use crate::error::{usage, CliError, Result, EXIT_OK, EXIT_USER};
use crate::{analyze, AnalyzeCommand, Command, ContextCommand, KindArg, ListArgs, Listing, Output, ScopeArg, Target};

const RUNS_DIR_NAME: &str = "runs";

pub fn run(config_path: Option<PathBuf>, command: Command, o: &mut Output) -> Result<i32> {
    let config_path = config_path.unwrap_or_else(default_config_path);
    let config = || load_config(&config_path).map_err(CliError::from);
    match command {
        Command::InitConfig { server_url, api_key, store_cache_dir, force } => {
            init_config(&config_path, &server_url, api_key, store_cache_dir, force, o)
        }
        Command::Upload { kind, dir } => upload(&config()?, kind, &dir, o),
        Command::Download { id, out, archive } => download(&config()?, &parse_id(&id)?, out, archive, o),
        Command::List(args) => list(&config()?, &args, o),
        Command::Context(ContextCommand::New { id, datasets, models, metrics, hyper, out, upload }) => {
            let context = build_context(id, &datasets, &models, &metrics, &hyper)?;
            if upload {
                let client = Client::new(&config()?);
                client.require_key()?;
                client.post_json("/v1/contexts", &context)?;
            }
            let text = canonical::to_string(&context).map_err(|e| usage(e.to_string()))?;
            match out {
                Some(path) => {
                    write_file(&path, text.as_bytes())?;
                    writeln!(o.err, "wrote {} ({} scenarios)", path.display(), context.scenario_count())?;
                }
                None => writeln!(o.out, "{text}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Context(ContextCommand::Validate { file, offline }) => {
            let context = read_context(&file)?;
            let client = if offline { None } else { Some(Client::new(&config()?)) };
            validate_context(&context, client.as_ref(), o)
        }
        Command::Suggest { chosen, candidates } => suggest(&config()?, &chosen, &candidates, o),
        Command::Run { context, upload } => run_context(&config()?, &context, upload, o),
        Command::UploadRun { run } => {
            let config = config()?;
            let run = load_run(&config, &run)?;
            let client = Client::new(&config);
            client.require_key()?;
            let created: RunCreated = client.post_json("/v1/runs", &run)?.json()?;
            print_or_json(o, &created, &created.run_id)
        }
        Command::Publish { what, id } => {
            let client = Client::new(&config()?);
            client.require_key()?;
            let path = match what {
                Target::Run => format!("/v1/runs/{id}/publish"),
                Target::Component => format!("{}/publish", component_path(&parse_id(&id)?)),
            };
            let record: PublicationRecord = client.post_empty(&path)?.json()?;
            print_or_json(o, &record, &record.identifier)
        }
        Command::Delete { what, id } => {
            let client = Client::new(&config()?);
            client.require_key()?;
            let path = match what {
                Target::Run => format!("/v1/runs/{id}"),
                Target::Component => component_path(&parse_id(&id)?),
            };
            client.delete(&path)?;
            writeln!(o.err, "deleted {id}")?;
            Ok(EXIT_OK)
        }
        Command::Analyze(command) => analyze_cmd(&config()?, &command, o),
    }
}

fn parse_id(text: &str) -> Result<ComponentId> {
    text.parse().map_err(|_| usage(format!("invalid component id `{text}`; expected owner/slug@version")))
}

fn parse_ids(texts: &[String]) -> Result<Vec<ComponentId>> {
    texts.iter().map(|t| parse_id(t)).collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn emit_json<T: Serialize + ?Sized>(o: &mut Output, value: &T) -> Result<()> {
    let text = canonical::to_string(value).map_err(|e| CliError::Transport(e.to_string()))?;
    writeln!(o.out, "{text}")?;
    Ok(())
}

fn print_or_json<T: Serialize>(o: &mut Output, value: &T, line: &str) -> Result<i32> {
    if o.json {
        emit_json(o, value)?;
    } else {
        writeln!(o.out, "{line}")?;
    }
    Ok(EXIT_OK)
}

fn init_config(
    path: &Path,
    server_url: &str,
    api_key: String,
    store_cache_dir: Option<PathBuf>,
    force: bool,
    o: &mut Output,
) -> Result<i32> {
    if path.exists() && !force {
        return Err(usage(format!("{} already exists; pass --force to replace it", path.display())));
    }
    let url = parse_server_url(server_url).map_err(usage)?;
    let cache = store_cache_dir.unwrap_or_else(|| path.parent().unwrap_or(Path::new(".")).join(CACHE_DIR_NAME));
    let config = CliConfig::new(url, api_key, cache);
    write_file(path, config.to_file_text().as_bytes())?;
    writeln!(o.err, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn upload(config: &CliConfig, kind: KindArg, dir: &Path, o: &mut Output) -> Result<i32> {
    let (manifest, bytes) = pack_dir(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let expected = match kind {
        KindArg::Dataset => ComponentKind::Dataset,
        KindArg::Model => ComponentKind::Model,
        KindArg::Metric => ComponentKind::Metric,
    };
    if manifest.kind != expected {
        return Err(usage(format!("{} holds a {}, not a {}", dir.display(), manifest.kind.as_str(), expected.as_str())));
    }
    let client = Client::new(config);
    client.require_key()?;
    let reply = match client.post_bytes("/v1/components", &bytes, ARCHIVE_CONTENT_TYPE) {
        Err(CliError::Api { code, .. }) if code == "name_taken" => {
            let name = manifest.descriptor.id().name();
            client.post_bytes(&format!("/v1/components/{name}/versions"), &bytes, ARCHIVE_CONTENT_TYPE)?
        }
        other => other?,
    };
    let record: ComponentRecord = reply.json()?;
    print_or_json(o, &record, &record.id.to_string())
}

fn download(
    config: &CliConfig,
    id: &ComponentId,
    out: Option<PathBuf>,
    archive: Option<PathBuf>,
    o: &mut Output,
) -> Result<i32> {
    let client = Client::new(config);
    let (record, bytes) = client.download(id)?;
    let path = match archive {
        Some(file) => {
            write_file(&file, &bytes)?;
            file
        }
        None => {
            let dir = out.unwrap_or_else(|| PathBuf::from(format!("{}-{}", id.slug(), id.version())));
            let unpacked = unpack(&bytes).map_err(|e| CliError::Transport(e.to_string()))?;
            unpacked.extract_to(&dir).map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
            dir
        }
    };
    let summary = json!({"id": record.id, "path": path.display().to_string(), "payload_hash": record.payload_hash});
    print_or_json(o, &summary, &path.display().to_string())
}

fn scope_str(scope: ScopeArg) -> &'static str {
    match scope {
        ScopeArg::All => "all",
        ScopeArg::Mine => "mine",
        ScopeArg::Public => "public",
    }
}

fn list(config: &CliConfig, args: &ListArgs, o: &mut Output) -> Result<i32> {
    let client = Client::new(config);
    let common = [
        ("scope", args.scope.map(|s| scope_str(s).to_string())),
        ("page", args.page.map(|p| p.to_string())),
        ("page_size", args.page_size.map(|p| p.to_string())),
    ];
    let kind = match args.what {
        Listing::Datasets => ComponentKind::Dataset,
        Listing::Models => ComponentKind::Model,
        Listing::Metrics => ComponentKind::Metric,
        Listing::Runs => {
            if args.task.is_some() || args.text.is_some() {
                return Err(usage("--task and --text apply to components, not runs"));
            }
            let mut pairs = vec![("context_id", args.context_id.clone()), ("executed_by", args.executed_by.clone())];
            pairs.extend(common);
            let page: Page<BenchmarkRun> = client.get_json(&with_query("/v1/runs", &pairs))?;
            if o.json {
                emit_json(o, &page)?;
            } else {
                for r in &page.items {
                    let id = r.minted_identifier.as_deref().unwrap_or("-");
                    writeln!(
                        o.out,
                        "{}\t{}\t{}\t{}\t{}\t{} results",
                        r.run_id,
                        r.context_id,
                        r.executed_by,
                        r.visibility.as_str(),
                        id,
                        r.results.len()
                    )?;
                }
                page_footer(o, &page)?;
            }
            return Ok(EXIT_OK);
        }
    };
    if args.context_id.is_some() || args.executed_by.is_some() {
        return Err(usage("--context-id and --executed-by apply to runs, not components"));
    }
    let mut pairs = vec![("kind", Some(kind.as_str().to_string())), ("task", args.task.clone()), ("text", args.text.clone())];
    pairs.extend(common);
    let page: Page<ComponentRecord> = client.get_json(&with_query("/v1/components", &pairs))?;
    if o.json {
        emit_json(o, &page)?;
    } else {
        for r in &page.items {
            let permanent = if r.permanent { "permanent" } else { "-" };
            writeln!(o.out, "{}\t{}\t{}\t{}", r.id, r.visibility.as_str(), permanent, r.metadata.title)?;
        }
        page_footer(o, &page)?;
    }
    Ok(EXIT_OK)
}

fn page_footer<T>(o: &mut Output, page: &Page<T>) -> Result<()> {
    let pages = page.total.div_ceil(page.page_size.max(1)).max(1);
    writeln!(o.err, "page {} of {}, {} total", page.page, pages, page.total)?;
    Ok(())
}

fn build_context(
    id: String,
    datasets: &[String],
    models: &[String],
    metrics: &[String],
    hyper: &[String],
) -> Result<BenchmarkContext> {
    let mut context = BenchmarkContext::new(id);
    context.datasets = parse_ids(datasets)?.into_iter().collect();
    context.models = parse_ids(models)?.into_iter().collect();
    context.metrics = parse_ids(metrics)?.into_iter().collect();
    for h in hyper {
        let (model, setting) =
            h.split_once('=').ok_or_else(|| usage(format!("invalid --hyper `{h}`; expected MODEL=JSON-OBJECT")))?;
        let model = parse_id(model)?;
        let setting: HyperparameterSetting = serde_json::from_str(setting)
            .map_err(|e| usage(format!("invalid --hyper setting for {model}: {e}")))?;
        context.hyper_family.entry(model).or_default().push(setting);
    }
    context.validate().map_err(|e| usage(e.to_string()))?;
    Ok(context)
}

fn read_context(path: &Path) -> Result<BenchmarkContext> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let context: BenchmarkContext =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    context.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(context)
}

#[derive(Serialize)]
struct Incompatible {
    scenario_key: String,
    missing: Vec<Missing>,
}

fn validate_context(context: &BenchmarkContext, client: Option<&Client>, o: &mut Output) -> Result<i32> {
    let scenarios = expand_context(context).map_err(|e| usage(e.to_string()))?;
    let mut incompatible = Vec::new();
    if let Some(client) = client {
        let mut descriptors: BTreeMap<ComponentId, Descriptor> = BTreeMap::new();
        for id in context.components() {
            let record: ComponentRecord = client.get_json(&component_path(id))?;
            descriptors.insert(id.clone(), record.descriptor);
        }
        let pick = |id: &ComponentId| descriptors.get(id).expect("every component was fetched");
        let kind_error = |id: &ComponentId, want: &str| usage(format!("{id} is not a {want}"));
        for s in &scenarios {
            let dataset = pick(&s.dataset).as_dataset().ok_or_else(|| kind_error(&s.dataset, "dataset"))?;
            let model = pick(&s.model).as_model().ok_or_else(|| kind_error(&s.model, "model"))?;
            let metrics = s
                .metrics
                .iter()
                .map(|m| pick(m).as_metric().ok_or_else(|| kind_error(m, "metric")))
                .collect::<Result<Vec<_>>>()?;
            let report = check_scenario(dataset, model, &metrics);
            if !report.compatible {
                incompatible.push(Incompatible { scenario_key: s.key(), missing: report.missing });
            }
        }
    }
    if o.json {
        let keys: Vec<String> = scenarios.iter().map(|s| s.key()).collect();
        emit_json(
            o,
            &json!({
                "context_id": context.context_id,
                "scenarios": keys,
                "checked": client.is_some(),
                "compatible": incompatible.is_empty(),
                "incompatible": incompatible,
            }),
        )?;
    } else {
        writeln!(o.out, "{}: {} scenarios", context.context_id, scenarios.len())?;
        for i in &incompatible {
            let missing = serde_json::to_string(&i.missing).unwrap_or_default();
            writeln!(o.out, "incompatible {}: {missing}", i.scenario_key)?;
        }
        if client.is_none() {
            writeln!(o.err, "compatibility not checked (--offline)")?;
        }
    }
    Ok(if incompatible.is_empty() { EXIT_OK } else { EXIT_USER })
}

fn suggest(config: &CliConfig, chosen: &[String], candidates: &[String], o: &mut Output) -> Result<i32> {
    let request = SuggestRequest {
        chosen: parse_ids(chosen)?,
        candidates: if candidates.is_empty() { None } else { Some(parse_ids(candidates)?) },
    };
    let client = Client::new(config);
    let suggestion: Suggestion = client.post_json("/v1/compat/suggest", &request)?.json()?;
    if o.json {
        emit_json(o, &suggestion)?;
        return Ok(EXIT_OK);
    }
    let groups = [("datasets", &suggestion.datasets), ("models", &suggestion.models), ("metrics", &suggestion.metrics)];
    for (label, group) in groups {
        writeln!(o.out, "{label}:")?;
        for id in &group.suitable {
            writeln!(o.out, "  suitable      {id}")?;
        }
        for r in &group.incompatible {
            let reasons = serde_json::to_string(&r.reasons).unwrap_or_default();
            writeln!(o.out, "  incompatible  {} {reasons}", r.id)?;
        }
    }
    Ok(EXIT_OK)
}

fn runs_dir(config: &CliConfig) -> PathBuf {
    config.store_cache_dir.join(RUNS_DIR_NAME)
}

fn run_context(config: &CliConfig, path: &Path, upload: bool, o: &mut Output) -> Result<i32> {
    let context = read_context(path)?;
    let client = Client::new(config);
    client.require_key()?;
    let who: WhoAmI = client.get_json("/v1/whoami")?;
    client.post_json("/v1/contexts", &context)?;
    let profile = resolve_environment()?;
    let instrumented = instrument(&context, &profile).map_err(|e| usage(e.to_string()))?;
    let harness = Harness::new(config.default_limits.clone())?;
    let run = harness.execute(&instrumented, &HttpSource(&client), &who.user_name)?;
    let saved = runs_dir(config).join(format!("{}.json", run.run_id));
    write_file(&saved, &canonical::to_vec(&run).map_err(|e| CliError::Transport(e.to_string()))?)?;
    for r in &run.results {
        let accuracy: Vec<String> = r.accuracy.iter().map(|(m, v)| format!("{m}={v}")).collect();
        writeln!(
            o.err,
            "{} {} {:.3}s {}",
            r.scenario.key(),
            r.status.as_str(),
            r.timing.wall_time_s,
            accuracy.join(" ")
        )?;
    }
    writeln!(o.err, "saved {}", saved.display())?;
    if upload {
        client.post_json("/v1/runs", &run)?;
        writeln!(o.err, "uploaded {}", run.run_id)?;
    }
    print_or_json(o, &run, &run.run_id)
}

fn load_run(config: &CliConfig, arg: &str) -> Result<BenchmarkRun> {
    let direct = PathBuf::from(arg);
    let path = if direct.is_file() { direct } else { runs_dir(config).join(format!("{arg}.json")) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage(format!("no run file at {} ({e}); pass a file or the id of a run made by `cb run`", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn analyze_cmd(config: &CliConfig, command: &AnalyzeCommand, o: &mut Output) -> Result<i32> {
    let (name, body) = analyze::request(command)?;
    let client = Client::new(config);
    let response: Value = client.post_json(&format!("/v1/analysis/{name}"), &body)?.json()?;
    if o.json {
        emit_json(o, &response)?;
        return Ok(EXIT_OK);
    }
    let result = &response["result"];
    let table = match name {
        "slice" => Some(result),
        "pareto" => Some(&result["table"]),
        _ => None,
    };
    match table.and_then(|t| serde_json::from_value::<RunTable>(t.clone()).ok()) {
        Some(t) => write!(o.out, "{}", t.to_csv())?,
        None => writeln!(o.out, "{}", serde_json::to_string_pretty(result).unwrap_or_default())?,
    }
    writeln!(o.err, "{} rows analyzed", response["rows"])?;
    if let Some(c) = response.get("coverage") {
        let count = |k: &str| c[k].as_array().map_or(0, Vec::len);
        writeln!(
            o.err,
            "coverage: {} matched, {} unmatched, {} profiles, {} runs",
            count("matched"),
            count("unmatched"),
            count("profiles"),
            count("runs")
        )?;
    }
    Ok(EXIT_OK)
}
