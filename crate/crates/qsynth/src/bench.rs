//! Parameter sweeps over the built-in example programs.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use qsynth_core::gallery::{cache, optimistic, prodcons, worksharing, Instance};
use qsynth_core::num::parse_rational;
use qsynth_core::synthesis::{describe_strategy, prepare, Options};
use qsynth_core::Q;

use crate::frontend::{emit_performance_automaton, emit_program, emit_scheduler};
use crate::parallel::resolve_parallel;
use crate::report::DECIMAL_PLACES;

pub const GALLERIES: &[&str] = &["prodcons", "optimistic", "worksharing", "cache"];

/// Parameter names each gallery understands.
pub fn parameters(gallery: &str) -> Option<&'static [&'static str]> {
    Some(match gallery {
        "prodcons" => &["producers", "consumers", "cells", "lockcost", "copycost"],
        "optimistic" => &[
            "n", "nmin", "nmax", "workcost", "lockcost", "worklen", "versions", "threads",
            "switch", "trylock",
        ],
        "worksharing" => &[
            "workers",
            "workersmin",
            "workersmax",
            "initcost",
            "workcost",
            "arraylen",
        ],
        "cache" => &[
            "n", "nmin", "nmax", "lines", "cached", "uncached", "lockcost", "threads",
        ],
        _ => return None,
    })
}

/// Builds a gallery instance from `key=value` parameters on top of the
/// gallery's defaults.
pub fn instance(gallery: &str, params: &BTreeMap<String, String>) -> anyhow::Result<Instance> {
    let known = parameters(gallery).ok_or_else(|| {
        anyhow!(
            "unknown gallery `{gallery}` (known: {})",
            GALLERIES.join(", ")
        )
    })?;
    if let Some(k) = params.keys().find(|k| !known.contains(&k.as_str())) {
        bail!(
            "gallery `{gallery}` has no parameter `{k}` (known: {})",
            known.join(", ")
        );
    }
    let int = |k: &str| -> anyhow::Result<Option<i64>> {
        params
            .get(k)
            .map(|v| {
                v.parse()
                    .with_context(|| format!("`{k}` expects an integer, got `{v}`"))
            })
            .transpose()
    };
    let count = |k: &str| -> anyhow::Result<Option<usize>> {
        params
            .get(k)
            .map(|v| {
                v.parse()
                    .with_context(|| format!("`{k}` expects a count, got `{v}`"))
            })
            .transpose()
    };
    let rat = |k: &str| -> anyhow::Result<Option<Q>> {
        params
            .get(k)
            .map(|v| {
                parse_rational(v).ok_or_else(|| anyhow!("`{k}` expects a rational, got `{v}`"))
            })
            .transpose()
    };
    Ok(match gallery {
        "prodcons" => {
            let mut p = prodcons::Params::default();
            set(&mut p.producers, count("producers")?);
            set(&mut p.consumers, count("consumers")?);
            set(&mut p.cells, count("cells")?);
            set(&mut p.lock_cost, rat("lockcost")?);
            set(&mut p.copy_cost, rat("copycost")?);
            if p.producers + p.consumers == 0 || p.cells == 0 {
                bail!("prodcons needs a thread and a cell");
            }
            prodcons::producer_consumer(&p)
        }
        "optimistic" => {
            let mut p = optimistic::Params::default();
            set(&mut p.n_min, int("nmin")?);
            set(&mut p.n_max, int("nmax")?);
            if let Some(n) = int("n")? {
                p = p.fixed(n);
            }
            set(&mut p.work_cost, rat("workcost")?);
            set(&mut p.lock_cost, rat("lockcost")?);
            set(&mut p.work_len, int("worklen")?);
            set(&mut p.versions, int("versions")?);
            set(&mut p.threads, count("threads")?);
            if let Some(s) = params.get("switch") {
                p.switch = match s.as_str() {
                    "uniform" => None,
                    _ => Some(
                        parse_rational(s)
                            .ok_or_else(|| anyhow!("`switch` expects a rational or `uniform`"))?,
                    ),
                };
            }
            if let Some(t) = params.get("trylock") {
                p.try_lock = t
                    .parse()
                    .with_context(|| format!("`trylock` expects true or false, got `{t}`"))?;
            }
            if p.n_min < 1 || p.n_min > p.n_max || p.work_len < 1 || p.versions < 2 || p.threads < 1
            {
                bail!(
                    "optimistic needs 1 <= nmin <= nmax, worklen >= 1, versions >= 2 and a thread"
                );
            }
            optimistic::optimistic(&p)
        }
        "worksharing" => {
            let mut p = worksharing::Params::default();
            set(&mut p.workers_min, count("workersmin")?);
            set(&mut p.workers_max, count("workersmax")?);
            if let Some(k) = count("workers")? {
                p = p.fixed(k);
            }
            set(&mut p.init_cost, rat("initcost")?);
            set(&mut p.work_cost, rat("workcost")?);
            set(&mut p.array_len, int("arraylen")?);
            if p.workers_min < 1 || p.workers_min > p.workers_max || p.array_len < 1 {
                bail!("worksharing needs 1 <= workersmin <= workersmax and arraylen >= 1");
            }
            worksharing::work_sharing(&p)
        }
        "cache" => {
            let mut p = cache::Params::default();
            set(&mut p.n_min, int("nmin")?);
            set(&mut p.n_max, int("nmax")?);
            if let Some(n) = int("n")? {
                p = p.fixed(n);
            }
            set(&mut p.lines, count("lines")?);
            set(&mut p.cached_cost, rat("cached")?);
            set(&mut p.uncached_cost, rat("uncached")?);
            set(&mut p.lock_cost, rat("lockcost")?);
            set(&mut p.threads, count("threads")?);
            if p.n_min < 1 || p.n_min > p.n_max || p.lines < 1 || p.threads < 1 {
                bail!("cache needs 1 <= nmin <= nmax, a line and a thread");
            }
            cache::cache_example(&p)
        }
        _ => unreachable!("checked above"),
    })
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// `k=v`.
pub fn parse_param(text: &str) -> anyhow::Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| anyhow!("expected key=value, got `{text}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// `k=a..b` (inclusive integer range) or `k=v1,v2,...`.
pub fn parse_sweep(text: &str) -> anyhow::Result<(String, Vec<String>)> {
    let (k, v) = parse_param(text)?;
    if let Some((a, b)) = v.split_once("..") {
        let a: i64 = a
            .trim()
            .parse()
            .with_context(|| format!("bad range start in `{text}`"))?;
        let b: i64 = b
            .trim()
            .parse()
            .with_context(|| format!("bad range end in `{text}`"))?;
        if a > b {
            bail!("empty range in `{text}`");
        }
        return Ok((k, (a..=b).map(|x| x.to_string()).collect()));
    }
    let values: Vec<String> = v
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if values.is_empty() {
        bail!("no values in `{text}`");
    }
    Ok((k, values))
}

/// Writes the instance as program, automaton and scheduler files.
pub fn write_instance(inst: &Instance, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let names: Vec<String> = inst
        .program
        .threads
        .iter()
        .map(|t| t.name.clone())
        .collect();
    std::fs::write(dir.join("program.prog"), emit_program(&inst.program))?;
    std::fs::write(dir.join("perf.aut"), emit_performance_automaton(&inst.perf))?;
    std::fs::write(
        dir.join("sched.sch"),
        emit_scheduler(&inst.scheduler, &names),
    )?;
    let checks = match (inst.checks.race, inst.checks.deadlock) {
        (true, true) => "race,deadlock",
        (true, false) => "race",
        (false, true) => "deadlock",
        (false, false) => "none",
    };
    std::fs::write(dir.join("checks.txt"), format!("{checks}\n"))?;
    Ok(())
}

pub struct BenchConfig<'a> {
    pub gallery: &'a str,
    pub params: BTreeMap<String, String>,
    pub sweeps: Vec<(String, Vec<String>)>,
    pub options: Options,
    pub threads: usize,
    pub out: &'a Path,
}

/// Resolves every point of the sweep (the product of all sweeps), writing
/// each point's instance files under `point<i>/` and one summary row per
/// point to `report.csv`. Returns the CSV text.
pub fn run_bench(cfg: &BenchConfig) -> anyhow::Result<String> {
    parameters(cfg.gallery).ok_or_else(|| {
        anyhow!(
            "unknown gallery `{}` (known: {})",
            cfg.gallery,
            GALLERIES.join(", ")
        )
    })?;
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (k, values) in &cfg.sweeps {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((k.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    std::fs::create_dir_all(cfg.out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["point".to_string()];
    header.extend(cfg.sweeps.iter().map(|(k, _)| k.clone()));
    header.extend(
        [
            "value",
            "decimal",
            "safe",
            "strategy",
            "game_states",
            "candidates",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for (i, point) in points.iter().enumerate() {
        let mut params = cfg.params.clone();
        params.extend(point.iter().cloned());
        let inst = instance(cfg.gallery, &params)?;
        write_instance(&inst, &cfg.out.join(format!("point{i}")))?;
        let opts = Options {
            checks: inst.checks,
            ..cfg.options
        };
        let prep = prepare(&inst.program, &inst.scheduler, &inst.perf, &opts)
            .with_context(|| format!("building point {i} of {}", cfg.gallery))?;
        let outcome = resolve_parallel(&prep, Some(&inst.program), cfg.threads)?;
        let r = outcome.report();
        let value = outcome.value();
        let mut row = vec![i.to_string()];
        row.extend(point.iter().map(|(_, v)| v.clone()));
        row.push(value.to_exact_string());
        row.push(value.to_decimal_string(DECIMAL_PLACES));
        row.push(value.is_finite().to_string());
        row.push(
            r.best
                .map(|b| describe_strategy(&prep.game, &r.candidates[b].strategy))
                .unwrap_or_default(),
        );
        row.push(r.game_states.to_string());
        row.push(r.candidates.len().to_string());
        w.write_record(&row)?;
    }
    let text = String::from_utf8(w.into_inner()?)?;
    std::fs::write(cfg.out.join("report.csv"), &text)?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        assert_eq!(
            parse_sweep("n=1..3").unwrap(),
            ("n".into(), vec!["1".into(), "2".into(), "3".into()])
        );
        assert_eq!(
            parse_sweep("lockcost=1,10").unwrap().1,
            vec!["1".to_string(), "10".to_string()]
        );
        assert!(parse_sweep("n=3..1").is_err());
        assert!(parse_sweep("n").is_err());
    }

    #[test]
    fn parameters_are_checked() {
        let mut p = BTreeMap::new();
        assert!(instance("nope", &p).is_err());
        p.insert("bogus".to_string(), "1".to_string());
        assert!(instance("cache", &p).is_err());
        p.clear();
        p.insert("lockcost".to_string(), "1/2".to_string());
        assert!(instance("prodcons", &p).is_ok());
    }
}
