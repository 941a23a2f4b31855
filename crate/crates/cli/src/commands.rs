use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ipstab_core::export::{bound_report_json, tier_dot, trace_jsonl};
use ipstab_core::oracles::{self, SelectionRule};
use ipstab_core::scenarios::{self, AssembleOptions, RiskReport, Scenario, SupplierGraph};
use ipstab_core::{
    Composition, Configuration, Daemon, Graph, NodeSet, RunOptions, RunOutcome, SchedulerPolicy, State,
    System,
};
use rayon::prelude::*;
use serde_json::json;

use crate::{
    DemoArgs, ExecArgs, ExportArgs, Format, InitMode, OracleArgs, RunArgs, ScenarioArgs, ValidateArgs, Which,
    EXIT_BUDGET, EXIT_STABLE,
};

fn load_scenario(spec: &str) -> Result<Scenario> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return Scenario::parse(&text).with_context(|| format!("parsing {spec}"));
    }
    if let Some(sc) = scenarios::builtin(spec) {
        return Ok(sc);
    }
    if let Some(rest) = spec.strip_prefix("random:") {
        let mut parts = rest.split(':');
        let n: usize = parts
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|_| anyhow!("expected `random:N[:SEED]`, got `{spec}`"))?;
        let seed: u64 = match parts.next() {
            Some(s) => s.parse().map_err(|_| anyhow!("bad scenario seed in `{spec}`"))?,
            None => 0,
        };
        if n == 0 || parts.next().is_some() {
            bail!("expected `random:N[:SEED]` with N > 0, got `{spec}`");
        }
        return Ok(scenarios::random_scenario(n, seed));
    }
    bail!(
        "`{spec}` is neither a readable file nor a built-in scenario ({})",
        scenarios::BUILTIN.join(", ")
    )
}

fn assemble_options(a: &ScenarioArgs) -> AssembleOptions {
    AssembleOptions {
        supplier_graph: if a.full_supplier_graph {
            Some(SupplierGraph::Full)
        } else if a.compacted {
            Some(SupplierGraph::Compacted)
        } else {
            None
        },
        public: a.public_supplier.clone(),
        composition: if a.equal_priority {
            Composition::Shared
        } else {
            Composition::Hierarchical
        },
    }
}

fn build_system(a: &ScenarioArgs) -> Result<System> {
    let sc = load_scenario(&a.scenario)?;
    sc.assemble(&assemble_options(a))
        .with_context(|| format!("assembling {}", a.scenario))
}

/// Initial values from lines of `<algorithm> <node> <state>`; other variables start out.
fn read_init_file(sys: &System, path: &Path) -> Result<Configuration> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut c = sys.all_out();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), k + 1);
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            bail!("{}: expected `<algorithm> <node> <state>`", at());
        }
        let tier = sys.tier_index(t[0]).with_context(at)?;
        let node = sys.tier(tier).topology.resolve(t[1]).with_context(at)?;
        let state: State = t[2].parse().map_err(|e| anyhow!("{}: {e}", at()))?;
        sys.set_value(&mut c, tier, node, state).with_context(at)?;
    }
    Ok(c)
}

fn initial(sys: &System, exec: &ExecArgs, seed: u64) -> Result<Configuration> {
    match (exec.init, &exec.init_file) {
        (InitMode::File, Some(p)) => read_init_file(sys, p),
        (InitMode::File, None) => bail!("--init file needs --init-file <PATH>"),
        (_, Some(_)) => bail!("--init-file is only read with --init file"),
        (InitMode::AllOut, None) => Ok(sys.all_out()),
        (InitMode::Random, None) => Ok(sys.random_configuration(seed)),
    }
}

fn execute(sys: &System, exec: &ExecArgs, seed: u64, init: Configuration) -> RunOutcome {
    let mut daemon = Daemon::new(SchedulerPolicy::new(exec.scheduler, seed));
    let opts = RunOptions {
        max_moves: exec.max_moves.unwrap_or_else(|| sys.default_max_moves()),
        detect_cycles: true,
    };
    sys.run(init, &mut daemon, opts)
}

fn file_name(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_dots(sys: &System, c: &Configuration, dir: &Path) -> Result<()> {
    for k in 0..sys.stack().len() {
        let path = dir.join(format!("{}.dot", file_name(sys.tier(k).label())));
        fs::write(&path, tier_dot(sys, c, k)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn status(outcome: &RunOutcome) -> u8 {
    if outcome.stabilized {
        EXIT_STABLE
    } else {
        EXIT_BUDGET
    }
}

pub fn run(a: RunArgs) -> Result<u8> {
    let sys = build_system(&a.scenario)?;
    if let Some((lo, hi)) = a.exec.seeds {
        return sweep(&sys, &a, lo, hi);
    }
    let init = initial(&sys, &a.exec, a.exec.seed)?;
    let outcome = execute(&sys, &a.exec, a.exec.seed, init);
    let report = RiskReport::new(&sys, &outcome);
    match a.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let files = [
            ("report.txt", report.to_text()),
            ("report.json", report.to_json()),
            ("trace.jsonl", trace_jsonl(&sys, &outcome.trace)),
            ("bounds.json", bound_report_json(&report.bounds)),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        write_dots(&sys, &outcome.final_config, dir)?;
    }
    Ok(status(&outcome))
}

struct SweepLine {
    seed: u64,
    report: RiskReport,
}

fn sweep(sys: &System, a: &RunArgs, lo: u64, hi: u64) -> Result<u8> {
    // the init file is read once and shared by every seed
    let fixed = match a.exec.init {
        InitMode::File => Some(initial(sys, &a.exec, lo)?),
        _ => {
            initial(sys, &a.exec, lo)?;
            None
        }
    };
    log::debug!("sweeping seeds {lo}..={hi} on {} workers", a.workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers as usize)
        .build()
        .context("starting worker pool")?;
    let lines: Vec<SweepLine> = pool.install(|| {
        (lo..=hi)
            .into_par_iter()
            .map(|seed| {
                let init = match &fixed {
                    Some(c) => c.clone(),
                    None if a.exec.init == InitMode::AllOut => sys.all_out(),
                    None => sys.random_configuration(seed),
                };
                let outcome = execute(sys, &a.exec, seed, init);
                SweepLine {
                    seed,
                    report: RiskReport::new(sys, &outcome),
                }
            })
            .collect()
    });
    let tiers = sys.stack().len();
    let mut max_after = vec![0u64; tiers];
    let mut worst_excess = vec![i128::MIN; tiers];
    let (mut stabilized, mut bound_failures) = (0, 0);
    let mut text = String::new();
    for l in &lines {
        let b = &l.report.bounds;
        stabilized += l.report.stabilized as usize;
        bound_failures += !b.all_pass() as usize;
        let mut parts = Vec::new();
        for (k, t) in b.tiers.iter().enumerate() {
            max_after[k] = max_after[k].max(t.moves_after_lower_stable);
            worst_excess[k] = worst_excess[k].max(t.moves_after_lower_stable as i128 - t.bound as i128);
            parts.push(format!("{} {}/{}", t.label, t.moves_after_lower_stable, t.bound));
        }
        let _ = writeln!(
            text,
            "seed {}: {} moves={} {} total {}/{} [{}]",
            l.seed,
            if l.report.stabilized { "stabilized" } else { "budget-exhausted" },
            l.report.total_moves,
            parts.join(" "),
            b.total_moves,
            b.combined_bound,
            if b.all_pass() { "pass" } else { "FAIL" }
        );
    }
    let runs = lines.len();
    let _ = write!(
        text,
        "aggregate: {runs} runs, {stabilized} stabilized, {bound_failures} with a bound failure;"
    );
    for (k, t) in sys.stack().tiers().iter().enumerate() {
        let _ = write!(
            text,
            " {} max {} (worst margin {})",
            t.label(),
            max_after[k],
            -worst_excess[k]
        );
    }
    text.push('\n');
    match a.format {
        Format::Text => print!("{text}"),
        Format::Json => {
            let runs_json: Vec<_> = lines
                .iter()
                .map(|l| json!({"seed": l.seed, "report": l.report}))
                .collect();
            let v = json!({
                "runs": runs_json,
                "aggregate": {
                    "runs": runs,
                    "stabilized": stabilized,
                    "bound_failures": bound_failures,
                    "max_moves_after_lower_stable": max_after,
                },
            });
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
    }
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("sweep.txt"), &text).context("writing sweep.txt")?;
    }
    Ok(if stabilized == runs { EXIT_STABLE } else { EXIT_BUDGET })
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = Graph::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    if !g.is_connected() {
        log::warn!("{} is not connected", path.display());
    }
    Ok(g)
}

fn parse_set(g: &Graph, s: &str) -> Result<NodeSet> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| g.resolve(t).map_err(Into::into))
        .collect()
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn names(g: &Graph, s: &NodeSet) -> Vec<String> {
    s.iter().map(|v| g.display_name(v)).collect()
}

pub fn oracle(a: OracleArgs) -> Result<u8> {
    if a.which == Which::Joint {
        let spec = a
            .scenario
            .as_deref()
            .ok_or_else(|| anyhow!("--which joint needs --scenario"))?;
        let sc = load_scenario(spec)?;
        let flow = sc.flow_graph()?;
        let mut out = Vec::new();
        for rule in SelectionRule::ALL {
            let v = sc.joint_feasibility(&a.public_supplier, rule)?;
            out.push((rule, v));
        }
        match a.format {
            Format::Text => {
                for (rule, v) in &out {
                    match &v.witness {
                        Some(w) => println!(
                            "{}: feasible, witness {{{}}} ({} sets examined)",
                            rule.name(),
                            names(&flow, w).join(", "),
                            v.sets_examined
                        ),
                        None => println!("{}: infeasible ({} sets examined)", rule.name(), v.sets_examined),
                    }
                }
            }
            Format::Json => {
                let v: Vec<_> = out
                    .iter()
                    .map(|(rule, v)| {
                        json!({
                            "convention": rule.name(),
                            "feasible": v.feasible,
                            "witness": v.witness.as_ref().map(|w| names(&flow, w)),
                            "sets_examined": v.sets_examined,
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&v)?);
            }
        }
        return Ok(EXIT_STABLE);
    }
    let path = a
        .graph
        .as_deref()
        .ok_or_else(|| anyhow!("--which {:?} needs --graph", a.which))?;
    let g = read_graph(path)?;
    match a.which {
        Which::Chain => {
            let r = oracles::domination_chain_report(&g, a.cap)?;
            let c = r.chain;
            match a.format {
                Format::Text => {
                    let rows = [
                        ("ir", c.ir, &r.ir),
                        ("gamma", c.gamma, &r.gamma),
                        ("i", c.i_g, &r.i_g),
                        ("beta0", c.beta0, &r.beta0),
                        ("Gamma", c.gamma_upper, &r.gamma_upper),
                        ("IR", c.ir_upper, &r.ir_upper),
                    ];
                    for (name, value, witness) in rows {
                        println!("{name:>5} = {value}  e.g. {}", g.format_set(witness));
                    }
                    println!("ordering ir <= gamma <= i <= beta0 <= Gamma <= IR: {}", yes(c.is_ordered()));
                }
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "chain": c,
                        "ordered": c.is_ordered(),
                        "witnesses": {
                            "ir": names(&g, &r.ir),
                            "gamma": names(&g, &r.gamma),
                            "i_g": names(&g, &r.i_g),
                            "beta0": names(&g, &r.beta0),
                            "gamma_upper": names(&g, &r.gamma_upper),
                            "ir_upper": names(&g, &r.ir_upper),
                        }
                    }))?
                ),
            }
        }
        Which::MisCheck | Which::MdsCheck => {
            let mis = a.which == Which::MisCheck;
            let check = |s: &NodeSet| {
                if mis {
                    oracles::is_maximal_independent(&g, s)
                } else {
                    oracles::is_minimal_dominating(&g, s)
                }
            };
            let property = if mis { "maximal independent" } else { "minimal dominating" };
            let sets = match &a.set {
                Some(s) => vec![parse_set(&g, s)?],
                None if mis => oracles::maximal_independent_sets(&g, a.cap)?,
                None => oracles::minimal_dominating_sets(&g, a.cap)?,
            };
            let rows: Vec<(NodeSet, bool, bool)> = sets
                .into_iter()
                .map(|s| {
                    let ok = check(&s);
                    let dual = if mis {
                        oracles::is_minimal_dominating(&g, &s)
                    } else {
                        oracles::is_maximal_independent(&g, &s)
                    };
                    (s, ok, dual)
                })
                .collect();
            let dual_name = if mis { "minimal dominating" } else { "maximal independent" };
            match a.format {
                Format::Text => {
                    for (s, ok, dual) in &rows {
                        println!("{}: {property} {}, {dual_name} {}", g.format_set(s), yes(*ok), yes(*dual));
                    }
                    if a.set.is_none() {
                        println!("{} {property} sets", rows.len());
                    }
                }
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(s, ok, dual)| json!({"set": names(&g, s), property: ok, dual_name: dual}))
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&v)?);
                }
            }
        }
        Which::Joint => unreachable!("handled above"),
    }
    Ok(EXIT_STABLE)
}

pub fn demo(a: DemoArgs) -> Result<u8> {
    let sc = scenarios::builtin("contention").expect("built-in");
    let exec = |sys: &System| {
        let mut d = Daemon::new(SchedulerPolicy::new(a.scheduler, 0));
        sys.run(
            sys.all_out(),
            &mut d,
            RunOptions {
                max_moves: a.max_moves,
                detect_cycles: true,
            },
        )
    };
    let mut verdict = Vec::new();
    if !a.hierarchical_only {
        let mut feasible = false;
        let mut parts = Vec::new();
        for rule in SelectionRule::ALL {
            let v = sc.joint_feasibility(&a.public_supplier, rule)?;
            feasible |= v.feasible;
            parts.push(match &v.witness {
                Some(w) => format!("{} feasible {}", rule.name(), sc.flow_graph()?.format_set(w)),
                None => format!("{} infeasible", rule.name()),
            });
        }
        println!("(a) joint feasibility: {}", parts.join(", "));
        verdict.push(if feasible { "feasible" } else { "infeasible" });

        let shared = sc.assemble(&AssembleOptions {
            public: a.public_supplier.clone(),
            composition: Composition::Shared,
            ..Default::default()
        })?;
        let out = exec(&shared);
        let line = match (out.stabilized, out.cycle) {
            (true, _) => {
                verdict.push("equal priority stabilized");
                format!("stabilized after {} moves", out.trace.len())
            }
            (false, Some(c)) => {
                verdict.push("livelock detected");
                format!(
                    "livelock detected: configuration repeats every {} steps (first seen again at step {})",
                    c.period, c.detected_at_step
                )
            }
            (false, None) => {
                verdict.push("budget exhausted");
                format!("no stabilization within {} moves", a.max_moves)
            }
        };
        println!("(b) equal priority ({}): {line}", a.scheduler);
    }
    let hier = sc.assemble(&AssembleOptions {
        public: a.public_supplier.clone(),
        ..Default::default()
    })?;
    let out = exec(&hier);
    let report = RiskReport::new(&hier, &out);
    let sets: Vec<String> = report
        .tiers
        .iter()
        .map(|t| format!("{} in {{{}}}", t.label, t.in_set.join(", ")))
        .collect();
    if out.stabilized {
        println!(
            "(c) hierarchical ({}): stabilized after {} moves; {}",
            a.scheduler,
            out.trace.len(),
            sets.join(", ")
        );
        verdict.push("hierarchical stabilized");
    } else {
        println!("(c) hierarchical ({}): did not stabilize", a.scheduler);
        verdict.push("hierarchical did not stabilize");
    }
    println!("verdict: {}", verdict.join(" / "));
    Ok(EXIT_STABLE)
}

pub fn export_dot(a: ExportArgs) -> Result<u8> {
    let sys = build_system(&a.scenario)?;
    if a.exec.seeds.is_some() {
        bail!("export-dot takes a single --seed");
    }
    let init = initial(&sys, &a.exec, a.exec.seed)?;
    let outcome = execute(&sys, &a.exec, a.exec.seed, init);
    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_dots(&sys, &outcome.final_config, dir)?;
        }
        None => {
            for k in 0..sys.stack().len() {
                print!("{}", tier_dot(&sys, &outcome.final_config, k));
            }
        }
    }
    Ok(status(&outcome))
}

pub fn validate(a: ValidateArgs) -> Result<u8> {
    if let Some(path) = &a.graph {
        let g = read_graph(path)?;
        println!(
            "graph: {} nodes, {} edges, connected: {}",
            g.order(),
            g.size(),
            yes(g.is_connected())
        );
    }
    if let Some(spec) = &a.scenario {
        let sc = load_scenario(spec)?;
        let sys = sc.assemble(&AssembleOptions::default())?;
        println!("scenario: {} columns, {} algorithms", sys.graph().order(), sys.stack().len());
        for t in sys.stack().tiers() {
            println!(
                "  priority {} {} {}: {} nodes, {} edges",
                t.id.priority,
                t.kind(),
                t.label(),
                t.topology.order(),
                t.topology.size()
            );
        }
    }
    Ok(EXIT_STABLE)
}
