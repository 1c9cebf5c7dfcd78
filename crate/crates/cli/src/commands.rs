use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bayesrank_core::io::{
    export_graph, parse_encounters, read_draws, subset, write_caterpillar, write_draws,
    write_records, Registry, SearchRecord, StatementReport,
};
use bayesrank_core::model::{lineup_draws, run_chains, EncounterTable, PriorSpec, SamplerConfig};
use bayesrank_core::ranking::{rankings_from_edges, DEFAULT_MAX_CHAINS};
use bayesrank_core::sim::{
    generate_league, run_study, write_metrics, EntityLevel, LeagueConfig, StudyConfig,
};
use bayesrank_core::{
    compute_statement, count_pairwise, derive_rankings, optimize as search, Action, CostTransform,
    PosteriorDraws, RankingGraph, RewardConfig,
};
use log::{info, warn};
use serde::de::DeserializeOwned;

use crate::manifest::Run;
use crate::{
    CostArg, EntityFilter, ExportCommand, GenerateArgs, LevelArg, OptimizeArgs, SampleArgs,
    SimulateArgs, StatementsArgs, UsageError,
};

impl From<CostArg> for CostTransform {
    fn from(h: CostArg) -> Self {
        match h {
            CostArg::Identity => CostTransform::Identity,
            CostArg::Log1p => CostTransform::Log1p,
        }
    }
}

impl From<LevelArg> for EntityLevel {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Players => EntityLevel::Players,
            LevelArg::Lineups => EntityLevel::Lineups,
        }
    }
}

fn parse_toml<T: DeserializeOwned + Default>(text: Option<String>) -> Result<T> {
    match text {
        None => Ok(T::default()),
        Some(text) => toml::from_str(&text).map_err(|e| UsageError(format!("config: {e}")).into()),
    }
}

fn usage_if_invalid(result: bayesrank_core::Result<()>) -> Result<()> {
    result.map_err(|e| UsageError(e.to_string()).into())
}

fn belongs_to(id: &str, team: &str) -> bool {
    let prefix = format!("{team}_");
    id.split('|').all(|p| p.starts_with(&prefix))
}

fn filter_draws(draws: PosteriorDraws, filter: &EntityFilter) -> Result<PosteriorDraws> {
    let mut draws = draws;
    if !filter.entities.is_empty() {
        draws = draws.select_ids(&filter.entities)?;
    }
    if let Some(team) = &filter.team {
        let keep: Vec<usize> = (0..draws.num_entities())
            .filter(|&i| belongs_to(&draws.ids()[i], team))
            .collect();
        if keep.is_empty() {
            bail!("no entity belongs to team {team}");
        }
        draws = draws.select(&keep)?;
    }
    Ok(draws)
}

fn load_draws(run: &mut Run, path: &Path, filter: &EntityFilter) -> Result<PosteriorDraws> {
    let path = run.input(path)?;
    let draws =
        read_draws(File::open(&path)?).with_context(|| format!("reading {}", path.display()))?;
    let draws = filter_draws(draws, filter)?;
    info!(
        "{}: {} draws of {} entities",
        path.display(),
        draws.num_draws(),
        draws.num_entities()
    );
    Ok(draws)
}

fn load_encounters(
    run: &mut Run,
    path: &Path,
    teams: &[String],
) -> Result<(EncounterTable, Registry)> {
    let path = run.input(path)?;
    let (table, registry) = parse_encounters(File::open(&path)?)
        .with_context(|| format!("reading {}", path.display()))?;
    let (table, registry) = if teams.is_empty() {
        (table, registry)
    } else {
        subset(&table, &registry, teams)?
    };
    info!(
        "{}: {} encounters, {} players, {} lineups",
        path.display(),
        table.len(),
        registry.num_players(),
        registry.lineups.len()
    );
    Ok((table, registry))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn write_rankings(run: &mut Run, graph: &RankingGraph, ids: &[String]) -> Result<()> {
    let dot = run.output("graph.dot")?;
    let chains = run.output("rankings.txt")?;
    fs::write(&dot, export_graph(graph, ids))?;
    let mut text = String::new();
    for chain in &graph.chains {
        let names: Vec<&str> = chain.iter().map(|&e| ids[e].as_str()).collect();
        let _ = writeln!(text, "{}", names.join(" < "));
    }
    fs::write(&chains, text)?;
    if graph.chains_truncated {
        warn!("stopped after {} maximal chains", graph.chains.len());
    }
    info!(
        "{} comparisons, {} Hasse edges, {} rankings",
        graph.closure.len(),
        graph.hasse.len(),
        graph.chains.len()
    );
    Ok(())
}

pub fn sample(a: SampleArgs) -> Result<()> {
    let mut run = Run::new("sample", &a.out_dir);
    let mut config: SamplerConfig = parse_toml(run.config(a.config.as_deref())?)?;
    if let Some(v) = a.chains {
        config.chains = v;
    }
    if let Some(v) = a.burn_in {
        config.burn_in = v;
    }
    if let Some(v) = a.thin {
        config.thin = v;
    }
    if let Some(v) = a.draws {
        config.target_draws = v;
    }
    if let Some(v) = a.seed {
        config.seed = v;
    }
    if a.max_iterations.is_some() {
        config.max_iterations = a.max_iterations;
    }
    run.seed(config.seed);
    let (table, registry) = load_encounters(&mut run, &a.encounters, &a.teams)?;
    let players_path = run.output("players.csv")?;
    let hyper_path = run.output("hyper.csv")?;
    let lineups_path = a.lineups.then(|| run.output("lineups.csv")).transpose()?;
    let diagnostics_path = run.output("diagnostics.json")?;

    let prior = PriorSpec::from_index(a.prior)?;
    info!(
        "prior {}, {} chains, burn-in {}, thin {}, {} draws",
        a.prior, config.chains, config.burn_in, config.thin, config.target_draws
    );
    let fit = run_chains(&config, &table, &registry.ids(), prior)?;
    if fit.diagnostics.max_rhat > 1.1 {
        warn!("max split R-hat is {:.3}", fit.diagnostics.max_rhat);
    }

    run.create_out_dir()?;
    write_draws(BufWriter::new(File::create(&players_path)?), &fit.players)?;
    let mut hyper = String::from("mu,sigma2,lambda\n");
    for ((mu, s2), l) in fit.mu.iter().zip(&fit.sigma2).zip(&fit.lambda) {
        let _ = writeln!(hyper, "{mu},{s2},{l}");
    }
    fs::write(&hyper_path, hyper)?;
    if let Some(path) = lineups_path {
        let lineups = lineup_draws(&fit.players, &registry.lineups)?;
        write_draws(BufWriter::new(File::create(&path)?), &lineups)?;
    }
    write_json(
        &diagnostics_path,
        &serde_json::json!({
            "prior": prior,
            "sampler": config,
            "players": registry.num_players(),
            "encounters": table.len(),
            "diagnostics": fit.diagnostics,
        }),
    )?;
    run.finish()?;
    Ok(())
}

pub fn statements(a: StatementsArgs) -> Result<()> {
    let mut run = Run::new("statements", &a.out_dir);
    let draws = load_draws(&mut run, &a.draws, &a.filter)?;
    let report_path = run.output("statement.json")?;
    let config = RewardConfig {
        h: a.h.into(),
        epsilon: a.epsilon,
        ..Default::default()
    };
    let action = Action::new(a.alpha, a.t, a.gamma, a.q);
    let counts = count_pairwise(&draws);
    let statement = compute_statement(&draws, &counts, &action, &config)?;
    info!(
        "{} members, probability {:.4}, reward {}",
        statement.members.len(),
        statement.prob(),
        statement.reward
    );
    run.create_out_dir()?;
    let report = StatementReport::new(&statement, &draws, &counts, config.h, config.epsilon);
    fs::write(&report_path, report.to_json()? + "\n")?;
    if a.t == 0.0 && a.q == 0.0 {
        write_rankings(&mut run, &derive_rankings(&statement)?, draws.ids())?;
    }
    run.finish()?;
    Ok(())
}

pub fn optimize(a: OptimizeArgs) -> Result<()> {
    let mut run = Run::new("optimize", &a.out_dir);
    let mut config: RewardConfig = parse_toml(run.config(a.config.as_deref())?)?;
    if a.epsilon.is_some() {
        config.epsilon = a.epsilon;
    }
    if let Some(h) = a.h {
        config.h = h.into();
    }
    usage_if_invalid(config.validate())?;
    let draws = load_draws(&mut run, &a.draws, &a.filter)?;
    let report_path = run.output("optimal.json")?;
    let counts = count_pairwise(&draws);
    let outcome = search(&draws, &counts, &config)?;
    let best = &outcome.best;
    info!(
        "best action {:?}: {} members, probability {:.4}, reward {}",
        best.action,
        best.statement.members.len(),
        best.statement.prob(),
        best.reward
    );
    run.create_out_dir()?;
    let mut report =
        StatementReport::new(&best.statement, &draws, &counts, config.h, config.epsilon);
    report.search = Some(SearchRecord {
        starts: outcome.runs.len(),
        iterations: best.iterations,
        evaluations: best.evaluations,
        best_start: best.start,
    });
    fs::write(&report_path, report.to_json()? + "\n")?;
    if best.action.t == 0.0 && best.action.q == 0.0 {
        write_rankings(&mut run, &derive_rankings(&best.statement)?, draws.ids())?;
    }
    run.finish()?;
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let mut run = Run::new("simulate", &a.out_dir);
    let mut config: StudyConfig = parse_toml(run.config(a.config.as_deref())?)?;
    if a.paper_scale {
        config = config.paper_scale();
    }
    if !a.ks.is_empty() {
        config.ks = a.ks.clone();
    }
    if !a.ms.is_empty() {
        config.ms = a.ms.clone();
    }
    if !a.ss.is_empty() {
        config.ss = a.ss.iter().map(|&s| s as usize).collect();
    }
    if let Some(v) = a.replicates {
        config.replicates = v;
    }
    if let Some(v) = a.level {
        config.settings.level = v.into();
    }
    if let Some(v) = a.seed {
        config.seed = v;
    }
    for sampler in [&mut config.base_sampler, &mut config.settings.sampler] {
        if let Some(v) = a.chains {
            sampler.chains = v;
        }
        if let Some(v) = a.burn_in {
            sampler.burn_in = v;
        }
        if let Some(v) = a.thin {
            sampler.thin = v;
        }
        if let Some(v) = a.draws {
            sampler.target_draws = v;
        }
    }
    if !a.teams.is_empty() {
        config.d = a.teams.len().to_string();
    }
    usage_if_invalid(config.settings.reward.validate())?;
    usage_if_invalid(config.settings.sampler.validate())?;
    run.seed(config.seed);
    let (table, registry) = load_encounters(&mut run, &a.encounters, &a.teams)?;
    let metrics_path = run.output("metrics.csv")?;
    let cells = config.ks.len() * config.ms.len() * config.ss.len() * config.replicates;
    info!(
        "{cells} cells on {} worker threads",
        rayon::current_num_threads()
    );
    let rows = run_study(&config, &table, &registry.ids())?;
    run.create_out_dir()?;
    write_metrics(BufWriter::new(File::create(&metrics_path)?), &rows)?;
    run.finish()?;
    Ok(())
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let mut run = Run::new("generate", &a.out_dir);
    let mut config: LeagueConfig = parse_toml(run.config(a.config.as_deref())?)?;
    if let Some(v) = a.teams {
        config.teams = v;
    }
    if let Some(v) = a.players_per_team {
        config.players_per_team = v;
    }
    if let Some(v) = a.encounters {
        config.encounters = v;
    }
    if let Some(v) = a.sigma {
        config.sigma = v;
    }
    if let Some(v) = a.seed {
        config.seed = v;
    }
    run.seed(config.seed);
    let league = generate_league(&config).map_err(|e| UsageError(e.to_string()))?;
    let encounters_path = run.output("encounters.csv")?;
    let abilities_path = run.output("abilities.csv")?;
    run.create_out_dir()?;
    write_records(
        BufWriter::new(File::create(&encounters_path)?),
        &league.records,
    )?;
    let mut text = String::from("id,ability\n");
    for (id, xi) in &league.abilities {
        let _ = writeln!(text, "{id},{xi}");
    }
    fs::write(&abilities_path, text)?;
    info!("{} encounters", league.records.len());
    run.finish()?;
    Ok(())
}

pub fn export(command: ExportCommand) -> Result<()> {
    match command {
        ExportCommand::Caterpillar {
            draws,
            out_dir,
            filter,
        } => {
            let mut run = Run::new("caterpillar", &out_dir);
            let draws = load_draws(&mut run, &draws, &filter)?;
            let path = run.output("caterpillar.csv")?;
            run.create_out_dir()?;
            write_caterpillar(BufWriter::new(File::create(&path)?), &draws)?;
            run.finish()?;
        }
        ExportCommand::Lineups {
            draws,
            encounters,
            out_dir,
            team,
        } => {
            let mut run = Run::new("lineups", &out_dir);
            let players = load_draws(
                &mut run,
                &draws,
                &EntityFilter {
                    entities: vec![],
                    team: None,
                },
            )?;
            let (_, registry) = load_encounters(&mut run, &encounters, &[])?;
            let players = players.select_ids(&registry.ids())?;
            let ids = registry.lineup_keys();
            let lineups: Vec<_> = registry
                .lineups
                .iter()
                .zip(&ids)
                .filter(|(_, id)| team.as_ref().is_none_or(|t| belongs_to(id, t)))
                .map(|(l, _)| *l)
                .collect();
            if lineups.is_empty() {
                bail!("no lineup matches the filter");
            }
            let path = run.output("lineups.csv")?;
            run.create_out_dir()?;
            write_draws(
                BufWriter::new(File::create(&path)?),
                &lineup_draws(&players, &lineups)?,
            )?;
            info!("{} lineups", lineups.len());
            run.finish()?;
        }
        ExportCommand::Graph { report, out_dir } => {
            let mut run = Run::new("graph", &out_dir);
            let path = run.input(&report)?;
            let report = StatementReport::from_json(&fs::read_to_string(&path)?)
                .with_context(|| format!("reading {}", path.display()))?;
            if report.action.t != 0.0 || report.action.q != 0.0 {
                return Err(bayesrank_core::Error::NotErrorFree {
                    t: report.action.t,
                    q: report.action.q,
                }
                .into());
            }
            let names: BTreeSet<&String> = report
                .members
                .iter()
                .flat_map(|m| std::iter::once(&m.id).chain(&m.below).chain(&m.above))
                .collect();
            let ids: Vec<String> = names.into_iter().cloned().collect();
            let index: BTreeMap<&str, usize> = ids
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_str(), i))
                .collect();
            let mut edges = BTreeSet::new();
            for m in &report.members {
                let l = index[m.id.as_str()];
                edges.extend(m.below.iter().map(|b| (index[b.as_str()], l)));
                edges.extend(m.above.iter().map(|a| (l, index[a.as_str()])));
            }
            let graph = rankings_from_edges(edges, DEFAULT_MAX_CHAINS)?;
            run.create_out_dir()?;
            write_rankings(&mut run, &graph, &ids)?;
            run.finish()?;
        }
    }
    Ok(())
}
