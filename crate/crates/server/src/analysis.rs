use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::State;
use axum::response::IntoResponse;
use causalbench_core::analysis::{
    self, assemble_virtual_run, build_table, filter_rows, pareto_indices, CausalGraph, Coverage, RunTable,
};
use causalbench_core::compat::{self, Selection};
use causalbench_core::model::{ComponentId, Descriptor};
use causalbench_registry::{ComponentQuery, Registry, MAX_PAGE_SIZE};

use crate::auth::Caller;
use crate::error::ApiResult;
use crate::routes::{blocking, json};
use crate::wire::{
    ok, AnalysisResponse, ImpactRequest, ParetoRequest, ParetoResult, PredictRequest, RecommendBody, RunSource,
    SliceRequest, SuggestRequest,
};
use crate::AppState;

struct Loaded {
    table: RunTable,
    coverage: Option<Coverage>,
    graph: CausalGraph,
}

impl Loaded {
    fn respond<T>(self, result: T) -> AnalysisResponse<T> {
        AnalysisResponse { result, rows: self.table.len(), coverage: self.coverage }
    }
}

fn load(registry: &Registry, source: RunSource, principal: Option<&str>) -> ApiResult<Loaded> {
    let datasets = registry.dataset_descriptors(principal)?;
    let context = match (source.context, source.context_id) {
        (Some(c), _) => Some(c),
        (None, Some(id)) => Some(registry.context(&id)?),
        (None, None) => None,
    };
    let runs = match source.run_ids {
        Some(ids) => ids.iter().map(|id| registry.run(id, principal)).collect::<Result<Vec<_>, _>>()?,
        None => registry.accessible_runs(principal)?,
    };
    let (table, coverage) = match context {
        Some(ctx) => {
            let v = assemble_virtual_run(&runs, &datasets, &ctx, principal)?;
            (v.table, Some(v.coverage))
        }
        None => (build_table(&runs, &datasets), None),
    };
    Ok(Loaded { table, coverage, graph: source.graph.unwrap_or_else(CausalGraph::default_graph) })
}

pub async fn slice(State(s): State<AppState>, caller: Caller, b: Result<Bytes, BytesRejection>) -> ApiResult<impl IntoResponse> {
    let req: SliceRequest = json(b)?;
    let out = blocking(move || {
        let l = load(&s.registry, req.source, caller.name())?;
        let t = analysis::slice(&l.table, &req.spec)?;
        Ok(l.respond(t))
    })
    .await?;
    Ok(ok(out))
}

pub async fn impact(State(s): State<AppState>, caller: Caller, b: Result<Bytes, BytesRejection>) -> ApiResult<impl IntoResponse> {
    let req: ImpactRequest = json(b)?;
    let out = blocking(move || {
        let l = load(&s.registry, req.source, caller.name())?;
        let e = analysis::estimate_impact(&l.table, &l.graph, &req.treatment, &req.outcome)?;
        Ok(l.respond(e))
    })
    .await?;
    Ok(ok(out))
}

pub async fn pareto(State(s): State<AppState>, caller: Caller, b: Result<Bytes, BytesRejection>) -> ApiResult<impl IntoResponse> {
    let req: ParetoRequest = json(b)?;
    let out = blocking(move || {
        let l = load(&s.registry, req.source, caller.name())?;
        let filtered = filter_rows(&l.table, &req.filters)?;
        let obj: Vec<usize> =
            req.objectives.iter().map(|o| filtered.require_column(&o.column)).collect::<Result<_, _>>()?;
        let id_idx = req.id_column.as_deref().map(|c| filtered.require_column(c)).transpose()?;

        let mut kept = Vec::new();
        let mut values = Vec::new();
        for (i, row) in filtered.rows.iter().enumerate() {
            let v: Option<Vec<f64>> = obj.iter().map(|&c| row[c].as_f64()).collect();
            if let Some(v) = v {
                kept.push(i);
                values.push(v);
            }
        }
        let directions: Vec<_> = req.objectives.iter().map(|o| o.direction).collect();
        let mut table = RunTable::new(filtered.columns.clone());
        let mut front = Vec::new();
        for k in pareto_indices(&values, &directions) {
            let row = &filtered.rows[kept[k]];
            front.push(id_idx.map_or_else(|| kept[k].to_string(), |c| row[c].to_string()));
            table.rows.push(row.clone());
        }
        let dropped = filtered.len() - kept.len();
        Ok(l.respond(ParetoResult { front, table, dropped }))
    })
    .await?;
    Ok(ok(out))
}

pub async fn predict(State(s): State<AppState>, caller: Caller, b: Result<Bytes, BytesRejection>) -> ApiResult<impl IntoResponse> {
    let req: PredictRequest = json(b)?;
    let out = blocking(move || {
        let l = load(&s.registry, req.source, caller.name())?;
        let p = analysis::predict(&l.table, &l.graph, &req.target, &req.outcomes)?;
        Ok(l.respond(p))
    })
    .await?;
    Ok(ok(out))
}

pub async fn recommend(
    State(s): State<AppState>,
    caller: Caller,
    b: Result<Bytes, BytesRejection>,
) -> ApiResult<impl IntoResponse> {
    let req: RecommendBody = json(b)?;
    let out = blocking(move || {
        let l = load(&s.registry, req.source, caller.name())?;
        let r = analysis::recommend(&l.table, &l.graph, &req.request)?;
        Ok(l.respond(r))
    })
    .await?;
    Ok(ok(out))
}

fn add(selection: &mut Selection, descriptor: Descriptor) {
    match descriptor {
        Descriptor::Dataset(d) => selection.datasets.push(d),
        Descriptor::Model(m) => selection.models.push(m),
        Descriptor::Metric(m) => selection.metrics.push(m),
    }
}

fn resolve(registry: &Registry, ids: &[ComponentId], principal: Option<&str>) -> ApiResult<Selection> {
    let mut out = Selection::default();
    for id in ids {
        add(&mut out, registry.record(id, principal)?.descriptor);
    }
    Ok(out)
}

fn everything_visible(registry: &Registry, principal: Option<&str>) -> ApiResult<Selection> {
    let mut out = Selection::default();
    let mut q = ComponentQuery { page_size: MAX_PAGE_SIZE, ..ComponentQuery::default() };
    loop {
        let page = registry.query(&q, principal)?;
        let n = page.items.len();
        for r in page.items {
            add(&mut out, r.descriptor);
        }
        if n < MAX_PAGE_SIZE || q.page * MAX_PAGE_SIZE >= page.total {
            return Ok(out);
        }
        q.page += 1;
    }
}

pub async fn suggest(State(s): State<AppState>, caller: Caller, b: Result<Bytes, BytesRejection>) -> ApiResult<impl IntoResponse> {
    let req: SuggestRequest = json(b)?;
    let out = blocking(move || {
        let chosen = resolve(&s.registry, &req.chosen, caller.name())?;
        let candidates = match &req.candidates {
            Some(ids) => resolve(&s.registry, ids, caller.name())?,
            None => everything_visible(&s.registry, caller.name())?,
        };
        Ok(compat::suggest(&chosen, &candidates))
    })
    .await?;
    Ok(ok(out))
}
