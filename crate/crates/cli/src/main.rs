mod cache;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use posetrep::aut;
use posetrep::cayley::{cayley_dot, CayleyGraph, Girth};
use posetrep::certificate::{self, neighborhood_tree};
use posetrep::extensions::{
    build_window, check_action_on_window, gap_order_window, gradedness, rank_epimorphism_check, BaseGroup, ExtensionGroupH,
    WindowKind,
};
use posetrep::group::{margulis_generators, split_top_level, Group, GroupAutomorphism, GroupElement, GroupOps, GroupTable};
use posetrep::poset::{build_babai_poset, build_cayley_poset, build_drr_digraph, FinitePoset, PosetJson};
use posetrep::repro::{self, ReproOptions, REPRO_IDS, SCHEMA};
use posetrep::search::{self, SearchOptions};
use posetrep::smallcanc::{check_c_lambda, few_relators_trial, sample_density, sample_few_relators, Presentation};

use cache::{Cache, Entry};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "posetrep", version, about = "Cayley representations of groups by posets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Girth search limit for `girth`, largest prime for the SL₂ scan in `repro main-sl2`.
    #[arg(long, global = true)]
    limit: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Girth of the Cayley graph of a group with the given generators.
    Girth {
        #[arg(long)]
        group: String,
        /// Comma-separated generators, or `margulis` for SL₂(p).
        #[arg(long)]
        gens: String,
    },
    /// Automorphism group of P(G, S), of the Babai poset of a DRR, or of a poset file.
    Aut {
        #[arg(long, required_unless_present = "poset")]
        group: Option<String>,
        #[arg(long, requires = "group")]
        set: Option<String>,
        /// Use the Babai poset of the digraph with connection set S.
        #[arg(long)]
        babai: bool,
        /// JSON poset with `points` and `covers`.
        #[arg(long, conflicts_with = "group")]
        poset: Option<PathBuf>,
    },
    /// Exhaustive search for a Cayley connection set.
    Search {
        #[arg(long)]
        group: String,
        /// Keep going after the first representation.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        no_prune: bool,
    },
    /// Reproduce one result, or `all`.
    Repro {
        id: String,
        #[arg(long, default_value_t = 20)]
        n_max: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        window: i64,
    },
    /// Local certificate for a two-generated group.
    Certify {
        #[arg(long)]
        group: String,
        /// Two comma-separated generators, or `margulis` for SL₂(p).
        #[arg(long)]
        gens: String,
    },
    /// C'(λ) check of a presentation `<x,y | relators>`.
    C16 {
        /// File containing the presentation.
        #[arg(long, required_unless_present = "text")]
        pres: Option<PathBuf>,
        /// The presentation itself.
        #[arg(long, conflicts_with = "pres")]
        text: Option<String>,
        #[arg(long, default_value = "1/6")]
        lambda: String,
    },
    /// Random presentations.
    Sample {
        #[arg(long, value_enum, default_value_t = Model::Few)]
        model: Model,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Relators per presentation (few-relators model).
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Maximum relator length (few) or exact length (density).
        #[arg(long, default_value_t = 60)]
        l: usize,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Density d as a fraction (density model).
        #[arg(long, default_value = "1/10")]
        d: String,
        /// Include the sampled presentations in the report.
        #[arg(long)]
        list: bool,
    },
    /// Windows of the layered posets over G ⋊ ℤ.
    Extend {
        #[arg(long, value_enum)]
        kind: ExtendKind,
        /// Finite group descriptor, or `z` for the integers.
        #[arg(long)]
        group: String,
        /// Connection set (p1) or DRR set (p2).
        #[arg(long)]
        s: String,
        /// `id`, `inv`, `mul:<k>` (g ↦ g^k) or `conj:<a>` (g ↦ a g a⁻¹).
        #[arg(long, default_value = "id")]
        psi: String,
        #[arg(long, default_value_t = 3)]
        window: i64,
        /// Truncation |g| ≤ radius when the base group is ℤ.
        #[arg(long, default_value_t = 30)]
        radius: i64,
        /// Also write the window's Hasse diagram here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// DOT export of Hasse diagrams, Cayley graphs and balls.
    Export {
        #[arg(value_enum)]
        what: ExportKind,
        #[arg(long)]
        group: Option<String>,
        /// Connection set, DRR set or generators, by object.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum Model {
    Few,
    Density,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum ExtendKind {
    P1,
    P2,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum ExportKind {
    /// Hasse diagram of P(G, S).
    Hasse,
    /// Hasse diagram of the Babai poset of a DRR.
    Babai,
    /// Cayley digraph of a finite group.
    Cayley,
    /// Ball of the Cayley graph around e.
    Ball,
    /// Geodesic subtree of S·S⁻¹ in F₂.
    Neighborhood,
    /// The integers 0..6 with a ◁ b iff b − a ≥ 2.
    Nongraded,
}

fn parse_group(text: &str) -> Result<Group> {
    Group::parse(text).with_context(|| format!("--group {text}"))
}

fn parse_elements(group: &Group, text: &str) -> Result<Vec<GroupElement>> {
    split_top_level(text, ',')
        .into_iter()
        .enumerate()
        .map(|(i, part)| group.parse_element(part).with_context(|| format!("element {} (`{part}`)", i + 1)))
        .collect()
}

fn parse_indices(table: &GroupTable, group: &Group, text: &str) -> Result<Vec<usize>> {
    parse_elements(group, text)?
        .iter()
        .map(|g| table.index_of(g).ok_or_else(|| anyhow!("element outside {}", table.descriptor())))
        .collect()
}

fn parse_generators(group: &Group, text: &str) -> Result<Vec<GroupElement>> {
    if text == "margulis" {
        let Group::SpecialLinear2 { p } = group else { bail!("`margulis` generators need sl2:<p>") };
        let (x, y) = margulis_generators(*p)?;
        return Ok(vec![x, y]);
    }
    parse_elements(group, text)
}

fn parse_ratio(text: &str) -> Result<Ratio<u64>> {
    text.trim().parse().map_err(|_| anyhow!("cannot parse fraction `{text}`"))
}

fn parse_psi(group: &Group, table: &GroupTable, text: &str) -> Result<GroupAutomorphism> {
    match text {
        "id" => return Ok(GroupAutomorphism::Identity),
        "inv" => return Ok(GroupAutomorphism::Inversion),
        _ => {}
    }
    let images: Vec<usize> = if let Some(k) = text.strip_prefix("mul:") {
        let k: i64 = k.parse().with_context(|| format!("--psi {text}"))?;
        (0..table.order())
            .map(|g| table.index_of(&group.pow(table.element(g), k)).expect("powers stay in the group"))
            .collect()
    } else if let Some(a) = text.strip_prefix("conj:") {
        let a = parse_indices(table, group, a)?[0];
        (0..table.order()).map(|g| table.mul(table.mul(a, g), table.inv(a))).collect()
    } else {
        bail!("--psi must be id, inv, mul:<k> or conj:<a>");
    };
    Ok(GroupAutomorphism::Table(images))
}

fn report(command: &str, result: Value) -> Value {
    json!({ "schema": SCHEMA, "command": command, "result": result })
}

fn cmd_girth(group: &str, gens: &str, limit: Option<u64>) -> Result<Value> {
    let g = parse_group(group)?;
    let gens = parse_generators(&g, gens)?;
    let limit = limit.unwrap_or(30) as usize;
    let graph = CayleyGraph::new(&g, gens)?;
    let girth = graph.girth(limit)?;
    let result = match &girth {
        Girth::Finite { length, witness } => json!({ "girth": length, "witness": witness.to_string(), "limit": limit }),
        Girth::ExceedsLimit(l) => json!({ "girth": null, "exceeds": l, "limit": limit }),
    };
    Ok(report("girth", result))
}

fn cayley_or_babai(group: &str, set: &str, babai: bool) -> Result<FinitePoset> {
    let g = parse_group(group)?;
    let table = GroupTable::new(&g)?;
    let s = parse_indices(&table, &g, set)?;
    Ok(if babai { build_babai_poset(&build_drr_digraph(&table, &s)?)? } else { build_cayley_poset(&table, &s)? })
}

fn cmd_aut(group: Option<&str>, set: Option<&str>, babai: bool, poset: Option<&PathBuf>) -> Result<Value> {
    let p = match (group, poset) {
        (Some(g), _) => cayley_or_babai(g, set.ok_or_else(|| anyhow!("--set is required with --group"))?, babai)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let json: PosetJson = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            FinitePoset::from_json(&json)?
        }
        (None, None) => bail!("need --group or --poset"),
    };
    let group = aut::automorphism_group(&p)?;
    let verdict = aut::classify_poset(&p)?;
    let orbits: Vec<Vec<&str>> = group.orbits.iter().map(|o| o.iter().map(|&i| p.label(i)).collect()).collect();
    Ok(report(
        "aut",
        json!({ "points": p.len(), "order": group.order.to_string(), "orbits": orbits, "verdict": verdict }),
    ))
}

fn cmd_search(group: &str, all: bool, no_prune: bool) -> Result<Value> {
    let g = parse_group(group)?;
    let r = search::search_cayley(&g, SearchOptions { prune: !no_prune, stop_at_first: !all })?;
    Ok(report("search", serde_json::to_value(r)?))
}

fn cmd_repro(id: &str, options: &ReproOptions) -> Result<(Value, bool)> {
    if id == "all" {
        let reports = REPRO_IDS.iter().map(|id| repro::run(id, options)).collect::<Result<Vec<_>, _>>()?;
        let pass = reports.iter().all(|r| r.pass);
        return Ok((serde_json::to_value(reports)?, pass));
    }
    let r = repro::run(id, options)?;
    Ok((serde_json::to_value(&r)?, r.pass))
}

fn cmd_certify(group: &str, gens: &str) -> Result<Value> {
    let g = parse_group(group)?;
    let gens = parse_generators(&g, gens)?;
    let [x, y] = gens.as_slice() else { bail!("certify needs exactly two generators") };
    Ok(report("certify", serde_json::to_value(certificate::certify(&g, x, y)?)?))
}

fn cmd_c16(text: &str, lambda: &str) -> Result<Value> {
    let p: Presentation = text.parse()?;
    Ok(report("c16", serde_json::to_value(check_c_lambda(&p, parse_ratio(lambda)?)?)?))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(model: Model, n: usize, m: usize, l: usize, count: usize, d: &str, list: bool, seed: u64) -> Result<Value> {
    let result = match model {
        Model::Few => {
            let trial = few_relators_trial(n, m, l, count, seed)?;
            let mut v = json!({ "model": "few", "trial": trial, "fraction": [trial.c16_and_long, count] });
            if list {
                let ps: Vec<String> = sample_few_relators(n, m, l, count, seed)?.iter().map(|p| p.to_string()).collect();
                v["presentations"] = json!(ps);
            }
            v
        }
        Model::Density => {
            let d = parse_ratio(d)?;
            let p = sample_density(n, d, l, seed)?;
            let r = check_c_lambda(&p, Ratio::new(1, 6))?;
            let mut v = json!({
                "model": "density",
                "density": d.to_string(),
                "relators": p.relators().len(),
                "max_piece": r.max_piece,
                "satisfies_c16": r.satisfies_c16,
            });
            if list {
                v["presentation"] = json!(p.to_string());
            }
            v
        }
    };
    Ok(report("sample", result))
}

struct ExtendArgs<'a> {
    kind: ExtendKind,
    group: &'a str,
    s: &'a str,
    psi: &'a str,
    window: i64,
    radius: i64,
    dot: Option<&'a PathBuf>,
}

fn cmd_extend(a: &ExtendArgs) -> Result<Value> {
    let g = parse_group(a.group)?;
    let (h, set) = if matches!(g, Group::Integers) {
        let negate = match a.psi {
            "id" => false,
            "inv" => true,
            _ => bail!("over ℤ, --psi must be id or inv"),
        };
        let h = ExtensionGroupH::new(BaseGroup::integers(negate, a.radius));
        let set = parse_elements(&g, a.s)?
            .iter()
            .map(|e| {
                let k = e.payload()[0];
                h.base().index_of_integer(k).ok_or_else(|| anyhow!("{k} is outside the truncation radius"))
            })
            .collect::<Result<Vec<_>>>()?;
        (h, set)
    } else {
        let table = GroupTable::new(&g)?;
        let psi = parse_psi(&g, &table, a.psi)?;
        let set = parse_indices(&table, &g, a.s)?;
        (ExtensionGroupH::new(BaseGroup::finite(table, &psi)?), set)
    };
    let kind = match a.kind {
        ExtendKind::P1 => WindowKind::Cayley,
        ExtendKind::P2 => WindowKind::Babai,
    };
    let axioms = h.verify_axioms(3);
    let w = build_window(kind, &h, &set, a.window)?;
    if let Some(path) = a.dot {
        fs::write(path, w.poset.to_dot()).with_context(|| format!("writing {}", path.display()))?;
    }
    let grading = gradedness(&w.poset);
    let action = if h.base().is_finite() { Some(check_action_on_window(&h, &w)?) } else { None };
    let epimorphism = match &grading {
        Ok(rank) => Some(rank_epimorphism_check(&h, &w, rank)?),
        Err(_) => None,
    };
    let grading = match grading {
        Ok(rank) => json!({ "graded": true, "rank": rank.rank }),
        Err(witness) => json!({ "graded": false, "witness": witness }),
    };
    Ok(report(
        "extend",
        json!({
            "kind": kind,
            "group": h.base().descriptor(),
            "psi": a.psi,
            "window": a.window,
            "points": w.poset.len(),
            "base_verified": w.base_verified,
            "axioms": axioms,
            "gradedness": grading,
            "action": action,
            "rank_epimorphism": epimorphism,
            "note": format!("necessary conditions verified on window {}", a.window),
        }),
    ))
}

fn cmd_export(what: ExportKind, group: Option<&str>, set: Option<&str>, radius: usize) -> Result<String> {
    let need = |v: Option<&str>, flag: &str| v.map(str::to_string).ok_or_else(|| anyhow!("{flag} is required"));
    Ok(match what {
        ExportKind::Hasse => cayley_or_babai(&need(group, "--group")?, &need(set, "--set")?, false)?.to_dot(),
        ExportKind::Babai => cayley_or_babai(&need(group, "--group")?, &need(set, "--set")?, true)?.to_dot(),
        ExportKind::Cayley => {
            let g = parse_group(&need(group, "--group")?)?;
            let table = GroupTable::new(&g)?;
            cayley_dot(&table, &parse_indices(&table, &g, &need(set, "--set")?)?)
        }
        ExportKind::Ball => {
            let g = parse_group(&need(group, "--group")?)?;
            let gens = parse_generators(&g, &need(set, "--set")?)?;
            CayleyGraph::new(&g, gens)?.ball_dot(radius)?
        }
        ExportKind::Neighborhood => neighborhood_tree().to_dot(),
        ExportKind::Nongraded => gap_order_window(0, 6)?.to_dot(),
    })
}

/// Runs a command; returns the output text and exit code.
fn execute(cli: &Cli) -> Result<(String, u8)> {
    let json_out = |v: Value| serde_json::to_string_pretty(&v).expect("serializes") + "\n";
    Ok(match &cli.command {
        Command::Girth { group, gens } => (json_out(cmd_girth(group, gens, cli.limit)?), 0),
        Command::Aut { group, set, babai, poset } => {
            (json_out(cmd_aut(group.as_deref(), set.as_deref(), *babai, poset.as_ref())?), 0)
        }
        Command::Search { group, all, no_prune } => (json_out(cmd_search(group, *all, *no_prune)?), 0),
        Command::Repro { id, n_max, samples, window } => {
            let options = ReproOptions {
                n_max: *n_max,
                seed: cli.seed,
                samples: *samples,
                window: *window,
                scan_limit: cli.limit.unwrap_or(ReproOptions::default().scan_limit),
            };
            let (v, pass) = cmd_repro(id, &options)?;
            (json_out(v), if pass { 0 } else { EXIT_FAIL })
        }
        Command::Certify { group, gens } => (json_out(cmd_certify(group, gens)?), 0),
        Command::C16 { pres, text, lambda } => {
            let text = match (pres, text) {
                (Some(path), _) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
                (None, Some(t)) => t.clone(),
                (None, None) => bail!("need --pres or --text"),
            };
            (json_out(cmd_c16(&text, lambda)?), 0)
        }
        Command::Sample { model, n, m, l, count, d, list } => {
            (json_out(cmd_sample(*model, *n, *m, *l, *count, d, *list, cli.seed)?), 0)
        }
        Command::Extend { kind, group, s, psi, window, radius, dot } => {
            let args = ExtendArgs { kind: *kind, group, s, psi, window: *window, radius: *radius, dot: dot.as_ref() };
            (json_out(cmd_extend(&args)?), 0)
        }
        Command::Export { what, group, set, radius } => (cmd_export(*what, group.as_deref(), set.as_deref(), *radius)?, 0),
    })
}

/// Canonical description of the command for the cache key; file inputs
/// are included by content.
fn cache_key(cli: &Cli) -> Option<String> {
    let mut desc = json!({ "command": cli.command, "seed": cli.seed, "limit": cli.limit });
    match &cli.command {
        // side-effecting or trivially cheap commands are not cached
        Command::Extend { dot: Some(_), .. } | Command::Export { .. } => return None,
        Command::C16 { pres: Some(path), .. } => desc["input"] = json!(fs::read_to_string(path).ok()?),
        Command::Aut { poset: Some(path), .. } => desc["input"] = json!(fs::read_to_string(path).ok()?),
        _ => {}
    }
    Some(Cache::key(&desc.to_string()))
}

fn error_code(err: &anyhow::Error) -> u8 {
    // every cap error in the library is phrased in terms of a cap or budget
    let text = format!("{err:#}");
    if text.contains(" cap") || text.contains("budget") {
        EXIT_CAP
    } else {
        EXIT_INPUT
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let cache = Cache::from_env().zip(cache_key(&cli));
    let hit = cache.as_ref().and_then(|(c, key)| c.get(key));
    let entry = match hit {
        Some(entry) => entry,
        None => match execute(&cli) {
            Ok((output, code)) => {
                let entry = Entry { code, output };
                if let Some((c, key)) = &cache {
                    if let Err(e) = c.put(key, &entry) {
                        eprintln!("warning: cache write failed: {e}");
                    }
                }
                entry
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(error_code(&e));
            }
        },
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &entry.output) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT);
            }
        }
        None => print!("{}", entry.output),
    }
    ExitCode::from(entry.code)
}
