use std::collections::{BTreeMap, BTreeSet};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::table::{build_table, RunTable};
use super::AnalysisError;
use crate::model::{expand_context, BenchmarkContext, BenchmarkRun, DatasetDescriptor, Visibility};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Coverage {
    pub matched: Vec<String>,
    pub unmatched: Vec<String>,
    /// Distinct profile hashes among the matched results.
    pub profiles: Vec<String>,
    /// Runs that contributed at least one result.
    pub runs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct VirtualRun {
    pub table: RunTable,
    pub coverage: Coverage,
}

/// Whether `principal` may read `run`: public runs, or the principal's own.
pub fn is_accessible(run: &BenchmarkRun, principal: Option<&str>) -> bool {
    run.visibility == Visibility::Public || principal == Some(run.executed_by.as_str())
}

/// Collects every accessible recorded result whose scenario key belongs to
/// `context`, across users and machines.
pub fn assemble_virtual_run(
    runs: &[BenchmarkRun],
    datasets: &[DatasetDescriptor],
    context: &BenchmarkContext,
    principal: Option<&str>,
) -> Result<VirtualRun, AnalysisError> {
    let keys: BTreeSet<String> = expand_context(context)
        .map_err(|e| AnalysisError::InvalidContext(e.to_string()))?
        .iter()
        .map(|s| s.key())
        .collect();

    let mut hits: BTreeMap<&str, usize> = keys.iter().map(|k| (k.as_str(), 0)).collect();
    let mut profiles = BTreeSet::new();
    let mut contributing = Vec::new();
    for run in runs.iter().filter(|r| is_accessible(r, principal)) {
        let results: Vec<_> = run
            .results
            .iter()
            .filter(|r| match hits.get_mut(r.scenario.key().as_str()) {
                Some(n) => {
                    *n += 1;
                    true
                }
                None => false,
            })
            .cloned()
            .collect();
        if !results.is_empty() {
            profiles.insert(run.profile.profile_hash.clone());
            contributing.push(BenchmarkRun { results, ..run.clone() });
        }
    }

    let (matched, unmatched): (Vec<_>, Vec<_>) = hits.into_iter().partition(|(_, n)| *n > 0);
    Ok(VirtualRun {
        table: build_table(&contributing, datasets),
        coverage: Coverage {
            matched: matched.into_iter().map(|(k, _)| k.to_string()).collect(),
            unmatched: unmatched.into_iter().map(|(k, _)| k.to_string()).collect(),
            profiles: profiles.into_iter().collect(),
            runs: contributing.iter().map(|r| r.run_id.clone()).collect(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::table::tests::run;
    use crate::model::HyperparameterSetting;

    #[test]
    fn visibility_and_unmatched() {
        let mut a = run("r-a", 2, false);
        a.visibility = Visibility::Public;
        let mut ctx = BenchmarkContext::new("c");
        for r in &a.results {
            ctx.datasets.insert(r.scenario.dataset.clone());
            ctx.models.insert(r.scenario.model.clone());
            ctx.metrics.extend(r.scenario.metrics.iter().cloned());
            ctx.hyper_family.entry(r.scenario.model.clone()).or_default().push(r.scenario.hyper.clone());
        }
        let extra = HyperparameterSetting::empty().with("never", 1);
        let m = ctx.models.iter().next().unwrap().clone();
        ctx.hyper_family.get_mut(&m).unwrap().push(extra);

        let mut private = run("r-b", 2, false);
        private.visibility = Visibility::Private;
        private.executed_by = "bob".into();

        let vr = assemble_virtual_run(&[a.clone(), private.clone()], &[], &ctx, Some("alice")).unwrap();
        assert_eq!(vr.coverage.runs, vec!["r-a".to_string()]);
        assert!(!vr.coverage.unmatched.is_empty());
        let own = assemble_virtual_run(&[a, private], &[], &ctx, Some("bob")).unwrap();
        assert_eq!(own.coverage.runs.len(), 2);
        assert_eq!(own.table.len(), vr.table.len() * 2);
    }
}
