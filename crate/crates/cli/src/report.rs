//! `report`: the Table 2-style panel comparison plus Figure 1–3-style charts,
//! rendered from the artifacts of earlier stages into `<out>/report`.

use anyhow::{Context, Result};
use convene::metrics::PanelComparison;
use convene::profiles::Covariate;

use crate::manifest::StageRun;
use crate::plot::{density_chart, line_chart, parse_histogram, parse_series, HistGroup, Series};
use crate::stages::{require, CITATION_METRICS, COHORT_COLOR, COMPARISON, CONTROL_COLOR, DENSITY, MATCHES, NETWORK_SUMMARY};
use crate::ReportArgs;

pub const REPORT_DIR: &str = "report";

/// Human-readable panel table from the machine form written by `metrics`.
pub fn render_panel_table(machine: &str) -> Result<String> {
    Ok(PanelComparison::from_machine(machine)?.to_human())
}

fn color_of(label: &str) -> &'static str {
    if label == "cohort" {
        COHORT_COLOR
    } else {
        CONTROL_COLOR
    }
}

fn read(run: &mut StageRun, path: std::path::PathBuf, producer: &'static str) -> Result<String> {
    let path = require(path, producer)?;
    run.input(&path)?;
    std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
}

pub fn report(a: &ReportArgs, argv: &[String]) -> Result<()> {
    let src = &a.out;
    let mut run = StageRun::start("report", &src.join(REPORT_DIR), argv)?;

    // panel table
    let machine = read(&mut run, src.join(COMPARISON), "metrics")?;
    run.write("table2.txt", render_panel_table(&machine)?)?;
    run.write("table2.csv", &machine)?;

    // balance block from the matching step
    let matches = read(&mut run, src.join(MATCHES), "match")?;
    let balance: String = matches.lines().filter(|l| l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    run.write("balance.txt", balance)?;

    // Figure 1: career covariates of the cohort against the whole pool
    for c in Covariate::ALL {
        let name = format!("distribution_{}.csv", c.name());
        let table = read(&mut run, src.join(&name), "pool")?;
        let (edges, groups) = parse_histogram(&table)?;
        let groups: Vec<HistGroup> = groups
            .into_iter()
            .map(|(label, counts)| HistGroup { color: color_of(&label).to_owned(), label, counts })
            .collect();
        let svg = density_chart(&format!("{} by group", c.name()), c.name(), &edges, &groups);
        run.write(&format!("figure1_{}.svg", c.name()), svg)?;
        run.write(&format!("figure1_{}.csv", c.name()), &table)?;
    }

    // Figure 2: density over time and the final-cutoff networks
    let density = read(&mut run, src.join(DENSITY), "network")?;
    let (labels, cols) = parse_series(&density)?;
    let series: Vec<Series> = labels
        .iter()
        .zip(cols)
        .map(|(l, points)| Series { label: l.clone(), color: color_of(l).to_owned(), points })
        .collect();
    run.write("figure2_density.svg", line_chart("co-author network density", "year", "density", &series))?;
    run.write("figure2_density.csv", &density)?;
    let summary = read(&mut run, src.join(NETWORK_SUMMARY), "network")?;
    run.write("figure2_networks.csv", &summary)?;
    let last_cutoff = summary
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').next()?.parse::<i32>().ok())
        .max()
        .context("network summary lists no cutoffs")?;
    for group in ["cohort", "control"] {
        let svg = read(&mut run, src.join(format!("network_{group}_{last_cutoff}.svg")), "network")?;
        run.write(&format!("figure2_network_{group}.svg"), svg)?;
    }

    // Figure 3: group-level series and author-level distributions
    for m in CITATION_METRICS {
        let table = read(&mut run, src.join(format!("series_{}.csv", m.name())), "metrics")?;
        let (labels, cols) = parse_series(&table)?;
        let series: Vec<Series> = labels
            .iter()
            .zip(cols)
            .map(|(l, points)| Series { label: l.clone(), color: color_of(l).to_owned(), points })
            .collect();
        run.write(&format!("figure3_series_{}.svg", m.name()), line_chart(m.label(), "year", m.label(), &series))?;
        run.write(&format!("figure3_series_{}.csv", m.name()), &table)?;

        let table = read(&mut run, src.join(format!("author_{}.csv", m.name())), "metrics")?;
        let (edges, groups) = parse_histogram(&table)?;
        let groups: Vec<HistGroup> = groups
            .into_iter()
            .map(|(label, counts)| HistGroup { color: color_of(&label).to_owned(), label, counts })
            .collect();
        let title = format!("author-level {}", m.label());
        run.write(&format!("figure3_author_{}.svg", m.name()), density_chart(&title, m.label(), &edges, &groups))?;
        run.write(&format!("figure3_author_{}.csv", m.name()), &table)?;
    }
    run.finish()?;
    Ok(())
}
