//! The pipeline stages behind each subcommand.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use convene::corpus::{load_corpus, CohortSpec, Corpus, ValidationOptions};
use convene::matching::{build_counterfactual, MatchOptions};
use convene::metrics::{
    author_distribution, author_level_panels, group_publication_set, panel, series_to_delimited, timeseries,
    BaselineTable, Metric, Overlap, PanelComparison, SeriesMetric,
};
use convene::netgraph::{build_network, density, density_series, render_circular, Style};
use convene::profiles::{coauthor_pool, derive_profiles, distribution_export, profiles_to_delimited, AuthorProfile, Covariate, ProfileSet};
use convene::stats::Binning;
use convene::synthlab::{generate, SynthConfig};
use convene::{AuthorId, YearRange};
use serde::Deserialize;

use crate::manifest::StageRun;
use crate::{IngestArgs, InputArgs, MatchArgs, MetricsArgs, MissingArtifact, NetworkArgs, SynthArgs, UsageError, ValidationFailure};

pub const CORPUS: &str = "corpus.jsonl";
pub const COHORT: &str = "cohort.txt";
pub const PROFILES: &str = "profiles.csv";
pub const POOL: &str = "pool.csv";
pub const POOL_PROFILES: &str = "pool_profiles.csv";
pub const MATCHES: &str = "match.csv";
pub const CONTROLS: &str = "controls.txt";
pub const DENSITY: &str = "density.csv";
pub const NETWORK_SUMMARY: &str = "network_summary.csv";
pub const COMPARISON: &str = "comparison.csv";

pub const COHORT_COLOR: &str = "#b03a2e";
pub const CONTROL_COLOR: &str = "#7f7f7f";

/// Citation metrics reported as series and author-level distributions.
pub const CITATION_METRICS: [Metric; 3] = [Metric::CitationCount, Metric::CitationsPerPublication, Metric::Fwci];

/// Fails with the name of the producing subcommand when `path` is absent.
pub fn require(path: PathBuf, producer: &'static str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(MissingArtifact { path, producer }.into())
    }
}

fn validation(e: impl std::fmt::Display) -> anyhow::Error {
    ValidationFailure(e.to_string()).into()
}

struct Inputs {
    corpus: Corpus,
    cohort: CohortSpec,
}

fn load_inputs(a: &InputArgs, run: &mut StageRun) -> Result<Inputs> {
    let corpus_path = match &a.corpus {
        Some(p) => p.clone(),
        None => require(a.out.join(CORPUS), "ingest` or `convene synth")?,
    };
    let cohort_path = match &a.cohort {
        Some(p) => p.clone(),
        None => require(a.out.join(COHORT), "ingest --cohort` or `convene synth")?,
    };
    run.input(&corpus_path)?;
    run.input(&cohort_path)?;
    run.config("lenient", a.lenient);
    let opts = ValidationOptions { lenient: a.lenient, ..Default::default() };
    let (corpus, report) = load_corpus(&corpus_path, &opts).map_err(validation)?;
    if !report.rejected.is_empty() && !a.lenient {
        bail!(ValidationFailure(format!("{} failed validation:\n{report}", corpus_path.display())));
    }
    let cohort = CohortSpec::load(&cohort_path).map_err(validation)?;
    let missing = cohort.check_against(&corpus).map_err(validation)?;
    if !missing.is_empty() {
        bail!(ValidationFailure(format!("cohort members absent from the corpus: {}", join_ids(&missing))));
    }
    Ok(Inputs { corpus, cohort })
}

fn join_ids(ids: &[AuthorId]) -> String {
    ids.iter().map(AuthorId::as_str).collect::<Vec<_>>().join(", ")
}

pub fn ingest(a: &IngestArgs, argv: &[String]) -> Result<()> {
    let mut run = StageRun::start("ingest", &a.out, argv)?;
    run.config("lenient", a.lenient);
    run.input(&a.corpus)?;
    let opts = ValidationOptions { lenient: a.lenient, ..Default::default() };
    let (corpus, report) = load_corpus(&a.corpus, &opts).map_err(validation)?;
    eprint!("{report}");
    if !report.rejected.is_empty() && !a.lenient {
        bail!(ValidationFailure(format!(
            "{} record(s) failed validation; fix them or rerun with --lenient to skip them",
            report.rejected.len()
        )));
    }
    if corpus.is_empty() {
        bail!(ValidationFailure("corpus has no valid records".into()));
    }
    run.write(CORPUS, corpus.to_jsonl())?;
    run.write("ingest_report.txt", report.to_string())?;
    if let Some(path) = &a.cohort {
        run.input(path)?;
        let cohort = CohortSpec::load(path).map_err(validation)?;
        let missing = cohort.check_against(&corpus).map_err(validation)?;
        if !missing.is_empty() {
            bail!(ValidationFailure(format!("cohort members absent from the corpus: {}", join_ids(&missing))));
        }
        run.write(COHORT, cohort.to_text())?;
    }
    run.finish()?;
    Ok(())
}

pub fn synth(a: &SynthArgs, argv: &[String]) -> Result<()> {
    let mut run = StageRun::start("synth", &a.out, argv)?;
    let mut config = match &a.config {
        Some(path) => {
            run.input(path)?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SynthConfig::parse(&text).map_err(validation)?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let text = config.to_text();
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        if let Some((k, v)) = line.split_once('=') {
            run.config(k.trim(), v.trim());
        }
    }
    let out = generate(&config).map_err(validation)?;
    run.write(CORPUS, out.corpus.to_jsonl())?;
    run.write(COHORT, out.cohort.to_text())?;
    run.write("synth.conf", text)?;
    run.write("truth.json", serde_json::to_string_pretty(&out.truth)? + "\n")?;
    run.finish()?;
    log::info!("{} publications, {} cohort members", out.corpus.len(), out.cohort.members.len());
    Ok(())
}

pub fn profile(a: &InputArgs, argv: &[String]) -> Result<()> {
    let mut run = StageRun::start("profile", &a.out, argv)?;
    let inputs = load_inputs(a, &mut run)?;
    let profiles = derive_profiles(&inputs.corpus, &inputs.cohort.members);
    run.write(PROFILES, profiles_to_delimited(&profiles, |_| "cohort"))?;
    run.finish()?;
    Ok(())
}

#[derive(Deserialize)]
struct ProfileRow {
    author: String,
    #[allow(dead_code)]
    group: String,
    first_pub_year: i32,
    scholarly_output: u64,
    coauthor_count: u64,
    citation_total: u64,
}

pub fn read_profiles(path: &Path) -> Result<ProfileSet> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut set = ProfileSet::default();
    for row in reader.deserialize() {
        let r: ProfileRow = row.with_context(|| format!("parsing {}", path.display()))?;
        let author = AuthorId::new(r.author);
        set.profiles.insert(
            author.clone(),
            AuthorProfile {
                author,
                first_pub_year: r.first_pub_year,
                scholarly_output: r.scholarly_output,
                coauthor_count: r.coauthor_count,
                citation_total: r.citation_total,
            },
        );
    }
    Ok(set)
}

pub fn pool(a: &InputArgs, argv: &[String]) -> Result<()> {
    let mut run = StageRun::start("pool", &a.out, argv)?;
    let inputs = load_inputs(a, &mut run)?;
    let cohort_profiles_path = require(a.out.join(PROFILES), "profile")?;
    run.input(&cohort_profiles_path)?;
    let mut profiles = read_profiles(&cohort_profiles_path)?;

    let pool = coauthor_pool(&inputs.corpus, &inputs.cohort).map_err(validation)?;
    let pool_profiles = derive_profiles(&inputs.corpus, &pool.candidates);
    run.write(POOL, pool.to_delimited())?;
    run.write(POOL_PROFILES, profiles_to_delimited(&pool_profiles, |_| "pool"))?;

    profiles.profiles.extend(pool_profiles.profiles);
    let groups = [("cohort".to_owned(), inputs.cohort.members.clone()), ("pool".to_owned(), pool.candidates.clone())];
    for c in Covariate::ALL {
        let hist = distribution_export(&profiles, c, &groups, Binning::default()).map_err(validation)?;
        run.write(&format!("distribution_{}.csv", c.name()), hist.to_delimited())?;
    }
    run.finish()?;
    log::info!("pool of {} candidates", pool.len());
    Ok(())
}

pub fn match_stage(a: &MatchArgs, argv: &[String]) -> Result<()> {
    let mut run = StageRun::start("match", &a.input.out, argv)?;
    let inputs = load_inputs(&a.input, &mut run)?;
    let cohort_path = require(a.input.out.join(PROFILES), "profile")?;
    let pool_path = require(a.input.out.join(POOL_PROFILES), "pool")?;
    run.input(&cohort_path)?;
    run.input(&pool_path)?;
    let mut profiles = read_profiles(&cohort_path)?;
    let pool = read_profiles(&pool_path)?;
    let focal: BTreeSet<AuthorId> = profiles.profiles.keys().cloned().collect();
    let candidates: BTreeSet<AuthorId> = pool.profiles.keys().cloned().collect();
    profiles.profiles.extend(pool.profiles);

    let opts = MatchOptions { strategy: a.strategy, priority: a.priority, caliper: a.caliper, ..Default::default() };
    run.config("strategy", opts.strategy);
    run.config("priority", opts.priority);
    run.config("weights", format!("{:?}", opts.weights));
    run.config("caliper", opts.caliper.map_or("none".to_owned(), |c| c.to_string()));
    run.config("seedless", true);
    let (result, fit) = build_counterfactual(&profiles, &focal, &candidates, &opts).map_err(validation)?;
    if !result.unmatched.is_empty() {
        log::warn!("{} cohort member(s) left unmatched by the caliper", result.unmatched.len());
    }
    let controls = CohortSpec {
        name: "control".to_owned(),
        members: result.controls(),
        program_start_year: inputs.cohort.program_start_year,
    };
    run.write(MATCHES, result.to_delimited())?;
    run.write(CONTROLS, controls.to_text())?;
    let fit_json = serde_json::json!({
        "coefficients": fit.coefficients,
        "iterations": fit.iterations,
        "gradient_norm": fit.gradient_norm,
        "objective_trace": fit.objective_trace,
    });
    run.write("propensity.json", serde_json::to_string_pretty(&fit_json)? + "\n")?;
    run.finish()?;
    Ok(())
}

fn load_controls(out: &Path, run: &mut StageRun) -> Result<CohortSpec> {
    let path = require(out.join(CONTROLS), "match")?;
    run.input(&path)?;
    CohortSpec::load(&path).map_err(validation)
}

fn corpus_years(corpus: &Corpus) -> Result<YearRange> {
    corpus.year_range().ok_or_else(|| ValidationFailure("corpus is empty".into()).into())
}

pub fn network(a: &NetworkArgs, argv: &[String]) -> Result<()> {
    let mut run = StageRun::start("network", &a.input.out, argv)?;
    let inputs = load_inputs(&a.input, &mut run)?;
    let controls = load_controls(&a.input.out, &mut run)?;
    let years = corpus_years(&inputs.corpus)?;
    let start = inputs.cohort.program_start_year;
    let cutoffs = match &a.cutoffs {
        Some(c) => c.clone(),
        None => {
            let mut c = vec![(start - 1).max(years.from), (start + years.to) / 2, years.to];
            c.dedup();
            c
        }
    };
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        bail!(UsageError("--cutoffs must be strictly increasing years".into()));
    }
    let base = match &a.style {
        Some(s) => Style::parse(s).map_err(|e| UsageError(e.to_string()))?,
        None => Style::default(),
    };
    run.config("cutoffs", cutoffs.iter().map(i32::to_string).collect::<Vec<_>>().join(","));
    run.config("style", a.style.as_deref().unwrap_or("default"));

    let groups = [("cohort", &inputs.cohort.members, COHORT_COLOR), ("control", &controls.members, CONTROL_COLOR)];
    let mut summary = String::from("cutoff,group,nodes,edges,total_weight,density\n");
    for &cutoff in &cutoffs {
        for (label, members, color) in groups {
            let net = build_network(&inputs.corpus, members, cutoff).map_err(validation)?;
            let style = Style {
                color: if a.style.as_deref().is_some_and(|s| s.contains("color=")) { base.color.clone() } else { color.to_owned() },
                title: Some(base.title.clone().unwrap_or_else(|| format!("{label} through {cutoff}"))),
                ..base.clone()
            };
            let (_, svg) = render_circular(&net, &style);
            let stem = format!("network_{label}_{cutoff}");
            run.write(&format!("{stem}.adj"), net.to_adjacency_list())?;
            run.write(&format!("{stem}.dot"), net.to_dot(&stem))?;
            run.write(&format!("{stem}.svg"), svg)?;
            summary.push_str(&format!(
                "{cutoff},{label},{},{},{},{}\n",
                net.nodes.len(),
                net.edge_count(),
                net.total_weight(),
                density(&net)
            ));
        }
    }
    run.write(NETWORK_SUMMARY, summary)?;

    let all_years: Vec<i32> = years.years().collect();
    let a_series = density_series(&inputs.corpus, &inputs.cohort.members, &all_years).map_err(validation)?;
    let b_series = density_series(&inputs.corpus, &controls.members, &all_years).map_err(validation)?;
    run.write(DENSITY, series_to_delimited("cohort", &a_series, "control", &b_series))?;
    run.finish()?;
    Ok(())
}

pub fn metrics(a: &MetricsArgs, argv: &[String]) -> Result<()> {
    let mut run = StageRun::start("metrics", &a.input.out, argv)?;
    let inputs = load_inputs(&a.input, &mut run)?;
    let controls = load_controls(&a.input.out, &mut run)?;
    let years = corpus_years(&inputs.corpus)?;
    let window = a.window.unwrap_or(YearRange::new(inputs.cohort.program_start_year.max(years.from), years.to));
    run.config("window", window);
    run.config("baseline_window", years);
    let corpus = &inputs.corpus;
    let baselines = BaselineTable::build(corpus, years);
    run.write("baselines.csv", baselines.to_delimited())?;

    let set_a = group_publication_set(corpus, "cohort", &inputs.cohort.members, Some(window));
    let set_b = group_publication_set(corpus, "control", &controls.members, Some(window));
    let cmp = PanelComparison {
        label_a: "cohort".into(),
        label_b: "control".into(),
        a: panel(&set_a, corpus, &baselines).map_err(validation)?,
        b: panel(&set_b, corpus, &baselines).map_err(validation)?,
    };
    run.write(COMPARISON, cmp.to_machine())?;
    run.write("comparison.txt", cmp.to_human())?;
    run.write("panel_cohort.json", serde_json::to_string_pretty(&cmp.a)? + "\n")?;
    run.write("panel_control.json", serde_json::to_string_pretty(&cmp.b)? + "\n")?;
    run.write("overlap.txt", format!("{}\n", Overlap::of(&set_a, &set_b)))?;

    let window_years: Vec<i32> = window.years().collect();
    for m in CITATION_METRICS {
        let sm = SeriesMetric::try_from(m)?;
        let sa = timeseries(&inputs.cohort.members, corpus, &baselines, sm, &window_years).map_err(validation)?;
        let sb = timeseries(&controls.members, corpus, &baselines, sm, &window_years).map_err(validation)?;
        run.write(&format!("series_{}.csv", m.name()), series_to_delimited("cohort", &sa, "control", &sb))?;
    }

    let everyone: BTreeSet<AuthorId> = inputs.cohort.members.union(&controls.members).cloned().collect();
    let panels = author_level_panels(corpus, &everyone, &baselines).map_err(validation)?;
    run.write("author_panels.csv", author_panels_csv(&panels, &inputs.cohort.members))?;
    let groups = [("cohort".to_owned(), inputs.cohort.members.clone()), ("control".to_owned(), controls.members.clone())];
    for m in CITATION_METRICS {
        let hist = author_distribution(&panels, m, &groups, Binning::default()).map_err(validation)?;
        run.write(&format!("author_{}.csv", m.name()), hist.to_delimited())?;
    }
    run.finish()?;
    Ok(())
}

fn author_panels_csv(panels: &BTreeMap<AuthorId, convene::metrics::MetricsPanel>, cohort: &BTreeSet<AuthorId>) -> String {
    let mut out = String::from("author,group");
    for m in Metric::ALL {
        out.push(',');
        out.push_str(m.name());
    }
    out.push('\n');
    for (a, p) in panels {
        out.push_str(a.as_str());
        out.push_str(if cohort.contains(a) { ",cohort" } else { ",control" });
        for m in Metric::ALL {
            out.push_str(&format!(",{}", p.get(m)));
        }
        out.push('\n');
    }
    out
}
