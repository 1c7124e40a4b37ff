use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use morita_core::envelope::{build_envelope, ks_verify};
use morita_core::expander::{certify_family, graph_stats, random_regular, GirthSchedule};
use morita_core::graph::Graph;
use morita_core::group::{GroupChoice, GroupContext, GroupSpec};
use morita_core::groupoid::{cocycle_from_labels, germ_groupoid, is_saturated, Cocycle};
use morita_core::invmon::io::{monoid_dump, MonoidInput};
use morita_core::invmon::Limits;
use morita_core::pipeline::{canonical_json, pipeline_monster_desk, LimitsConfig, PipelineConfig, RunManifest};
use morita_core::translations::{translation_family, verify_lemma_pts, verify_partition, PointSet};
use morita_core::verdict::{Outcome, Verdict};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "morita", version, about = "Finite-scale verification of partial translations, germ groupoids and envelopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Word-metric balls.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Inverse monoids generated by partial bijections.
    Monoid {
        #[command(subcommand)]
        cmd: MonoidCmd,
    },
    /// Partial translations of a finite subset of a group.
    Translations {
        #[command(subcommand)]
        cmd: TranslationsCmd,
    },
    /// Germ groupoids and their cocycles.
    Groupoid {
        #[command(subcommand)]
        cmd: GroupoidCmd,
    },
    /// Enveloping spaces of cocycles.
    Envelope {
        #[command(subcommand)]
        cmd: EnvelopeCmd,
    },
    /// Girth, spectral gap and random regular graphs.
    Expander {
        #[command(subcommand)]
        cmd: ExpanderCmd,
    },
    /// Run every stage from a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the bundle; printed to stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: LimitArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Free,
    FreeAbelian,
    Cyclic,
}

#[derive(Args)]
struct GroupArgs {
    /// Short group name: `Z`, `Z^k`, `freek`, `Z/n`.
    #[arg(long, conflicts_with_all = ["backend", "group_file"])]
    group: Option<String>,
    #[arg(long, value_enum, requires = "rank")]
    backend: Option<BackendArg>,
    /// Rank, or order for the cyclic backend.
    #[arg(long)]
    rank: Option<usize>,
    /// Text group description.
    #[arg(long, conflicts_with = "backend")]
    group_file: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, env = "MORITA_MAX_ELEMENTS")]
    max_elements: Option<usize>,
    #[arg(long, env = "MORITA_MAX_WORD_LENGTH")]
    max_word_length: Option<usize>,
}

impl LimitArgs {
    fn over(&self, base: Limits) -> Limits {
        Limits {
            max_elements: self.max_elements.unwrap_or(base.max_elements),
            max_word_length: self.max_word_length.unwrap_or(base.max_word_length),
        }
    }

    fn is_set(&self) -> bool {
        self.max_elements.is_some() || self.max_word_length.is_some()
    }
}

#[derive(Subcommand)]
enum GroupCmd {
    Ball {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        center: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MonoidCmd {
    Build {
        /// Generator file: carrier, generators, optional group and labels.
        #[arg(long)]
        gens: PathBuf,
        /// Comma-separated checks: 0EU, 0F, phi.
        #[arg(long, value_delimiter = ',')]
        check: Vec<String>,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TranslationsCmd {
    Build {
        #[arg(long)]
        group: String,
        /// JSON array of points.
        #[arg(long)]
        points: PathBuf,
        /// Comma-separated: lemma, partition.
        #[arg(long, value_delimiter = ',')]
        verify: Vec<String>,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GroupoidCmd {
    Germ {
        /// Monoid generator file or `monoid build` report.
        #[arg(long)]
        monoid: PathBuf,
        #[arg(long)]
        tcf: bool,
        /// JSON array of unit names to reduce to.
        #[arg(long)]
        reduce: Option<PathBuf>,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EnvelopeCmd {
    Build {
        /// Cocycle file or `groupoid germ` report.
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 0)]
        margin: u32,
        #[arg(long)]
        verify: bool,
        /// Extra radii checked for stability.
        #[arg(long, default_value_t = 1)]
        steps: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Edges,
    Json,
}

#[derive(Subcommand)]
enum ExpanderCmd {
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "edges")]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Stats {
        /// Edge-list or JSON graph file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Certify against a constant girth threshold.
        #[arg(long, requires = "epsilon")]
        girth_min: Option<usize>,
        #[arg(long, requires = "girth_min")]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json(bytes: &[u8], path: &Path) -> Result<Value> {
    serde_json::from_slice(bytes).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(mut manifest: RunManifest, outcome: Outcome, body: Value, out: Option<&Path>) -> Result<Outcome> {
    manifest.outcome = outcome;
    emit(&canonical_json(&json!({ "manifest": manifest, "report": body })), out)?;
    Ok(outcome)
}

fn group_context(args: &GroupArgs, manifest: &mut RunManifest) -> Result<GroupContext> {
    let spec = match (&args.group, args.backend, &args.group_file) {
        (Some(name), _, _) => name.parse::<GroupSpec>()?,
        (None, Some(b), _) => {
            let k = args.rank.expect("clap requires rank");
            match b {
                BackendArg::Free => GroupSpec::Free { rank: k },
                BackendArg::FreeAbelian => GroupSpec::FreeAbelian { rank: k },
                BackendArg::Cyclic => GroupSpec::cyclic(k),
            }
        }
        (None, None, Some(path)) => {
            let bytes = read(path)?;
            manifest.inputs.insert("group".into(), morita_core::pipeline::sha256_hex(&bytes));
            GroupSpec::parse_description(std::str::from_utf8(&bytes)?)?
        }
        (None, None, None) => bail!("give --group, --backend with --rank, or --group-file"),
    };
    Ok(spec.build()?)
}

fn verdict_value<W: serde::Serialize>(v: &Verdict<W>) -> Value {
    serde_json::to_value(v).expect("serializable verdict")
}

/// The payload under `key` if the document is a report, else the document.
fn unwrap_report(doc: Value, key: &str) -> Value {
    match doc.get("report").and_then(|r| r.get(key)) {
        Some(inner) => inner.clone(),
        None => doc,
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Group {
            cmd: GroupCmd::Ball { group, radius, center, out },
        } => {
            let mut m = RunManifest::new("group ball", VERSION);
            let ctx = group_context(&group, &mut m)?;
            let c = match &center {
                Some(s) => ctx.parse_element(s)?,
                None => ctx.identity(),
            };
            let ball = ctx.ball(&c, radius)?;
            let body = json!({
                "group": ctx.spec(),
                "center": ctx.format(&c),
                "radius": radius,
                "size": ball.len(),
                "elements": ball.elements().iter().map(|g| ctx.format(g)).collect::<Vec<_>>(),
                "depths": (0..ball.len()).map(|i| ball.depth(i)).collect::<Vec<_>>(),
            });
            report(m, Outcome::Pass, body, out.as_deref())
        }

        Command::Monoid {
            cmd: MonoidCmd::Build { gens, check, limits, out },
        } => {
            let bytes = read(&gens)?;
            let mut m = RunManifest::new("monoid build", VERSION).input("gens", &bytes);
            let lim = limits.over(Limits::default());
            m.limits = Some(lim.into());
            let input: MonoidInput = serde_json::from_value(read_json(&bytes, &gens)?)?;
            let s = input.build(lim)?;
            let mut checks = serde_json::Map::new();
            let mut outcome = if s.is_complete() { Outcome::Pass } else { Outcome::Unknown };
            for c in &check {
                let (name, v, o) = match c.to_ascii_lowercase().as_str() {
                    "0eu" => {
                        let v = s.is_zero_e_unitary();
                        ("zero_e_unitary", verdict_value(&v), v.outcome())
                    }
                    "0f" => match s.is_zero_f_inverse() {
                        Ok(v) => ("zero_f_inverse", verdict_value(&v), v.outcome()),
                        Err(e) => ("zero_f_inverse", json!({ "status": "fail", "detail": e.to_string() }), Outcome::Fail),
                    },
                    "phi" => match s.phi_map() {
                        Ok(phi) => {
                            let p = phi.is_prehomomorphism();
                            let q = phi.is_idempotent_pure();
                            let values: Vec<String> = (0..s.len()).map(|i| phi.format_value(i)).collect();
                            (
                                "phi",
                                json!({
                                    "values": values,
                                    "prehomomorphism": verdict_value(&p),
                                    "idempotent_pure": verdict_value(&q),
                                }),
                                p.outcome().combine(q.outcome()),
                            )
                        }
                        Err(e) => ("phi", json!({ "status": "fail", "detail": e.to_string() }), Outcome::Fail),
                    },
                    other => bail!("unknown check `{other}`; expected 0EU, 0F or phi"),
                };
                checks.insert(name.to_string(), v);
                outcome = outcome.combine(o);
            }
            let body = json!({ "monoid": monoid_dump(&s), "checks": checks });
            report(m, outcome, body, out.as_deref())
        }

        Command::Translations {
            cmd: TranslationsCmd::Build { group, points, verify, limits, out },
        } => {
            let bytes = read(&points)?;
            let mut m = RunManifest::new("translations build", VERSION).input("points", &bytes);
            let lim = limits.over(Limits::default());
            m.limits = Some(lim.into());
            let ctx = GroupChoice::Name(group).build()?;
            let x = PointSet::from_json(&ctx, &read_json(&bytes, &points)?)?;
            let fam = translation_family(&x);
            let mut body = json!({
                "points": x.format(),
                "family": fam.members().iter().map(|(g, t)| json!({ "g": ctx.format(g), "t": t.to_string() })).collect::<Vec<_>>(),
            });
            let mut outcome = Outcome::Pass;
            for v in &verify {
                match v.as_str() {
                    "lemma" => {
                        let r = verify_lemma_pts(&fam, lim)?;
                        outcome = outcome.combine(r.outcome);
                        body["lemma"] = serde_json::to_value(&r)?;
                    }
                    "partition" => {
                        let r = verify_partition(&fam);
                        outcome = outcome.combine(Outcome::from_bool(r.holds()));
                        body["partition"] = serde_json::to_value(&r)?;
                    }
                    other => bail!("unknown verification `{other}`; expected lemma or partition"),
                }
            }
            report(m, outcome, body, out.as_deref())
        }

        Command::Groupoid {
            cmd: GroupoidCmd::Germ { monoid, tcf, reduce, limits, out },
        } => {
            let bytes = read(&monoid)?;
            let mut m = RunManifest::new("groupoid germ", VERSION).input("monoid", &bytes);
            let lim = limits.over(Limits::default());
            m.limits = Some(lim.into());
            let input: MonoidInput = serde_json::from_value(unwrap_report(read_json(&bytes, &monoid)?, "monoid"))?;
            let s = input.build(lim)?;
            let germs = germ_groupoid(&s)?;
            let g = germs.groupoid();
            let mut outcome = Outcome::Pass;
            let mut body = json!({
                "groupoid": g.to_json(),
                "blocks": germs.blocks(),
                "orbits": g.orbits().len(),
            });
            let rho = if tcf || s.labels().is_some() {
                Some(cocycle_from_labels(&germs, &s)?)
            } else {
                None
            };
            if let Some(rho) = &rho {
                body["cocycle"] = rho.to_json();
                if tcf {
                    let r = rho.tcf_report();
                    outcome = outcome.combine(r.outcome);
                    body["tcf"] = serde_json::to_value(&r)?;
                }
            }
            if let Some(path) = reduce {
                let fb = read(&path)?;
                m.inputs.insert("reduce".into(), morita_core::pipeline::sha256_hex(&fb));
                let names: Vec<String> = serde_json::from_slice(&fb).context("F must be a JSON array of unit names")?;
                let f: BTreeSet<usize> = names
                    .iter()
                    .map(|n| g.units().iter().position(|u| u == n).ok_or_else(|| anyhow!("unknown unit `{n}`")))
                    .collect::<Result<_>>()?;
                let sat = is_saturated(g, &f);
                outcome = outcome.combine(sat.outcome());
                body["saturated"] = verdict_value(&sat);
                if sat.is_pass() {
                    body["reduction"] = match &rho {
                        Some(r) => r.reduce(&f)?.to_json(),
                        None => g.reduction(&f)?.to_json(),
                    };
                }
            }
            report(m, outcome, body, out.as_deref())
        }

        Command::Envelope {
            cmd: EnvelopeCmd::Build { groupoid, radius, margin, verify, steps, out },
        } => {
            let bytes = read(&groupoid)?;
            let m = RunManifest::new("envelope build", VERSION).input("groupoid", &bytes);
            let rho = Cocycle::from_json(&unwrap_report(read_json(&bytes, &groupoid)?, "cocycle"))?;
            let omega = build_envelope(&rho, radius)?;
            let mut body = omega.to_json();
            body["embedded_copy_injective"] = verdict_value(&omega.embedded_copy_injective());
            let mut outcome = Outcome::Pass;
            if verify {
                let r = ks_verify(&rho, radius, margin, steps)?;
                outcome = Outcome::from_bool(r.equivalent && r.stable);
                body["verification"] = serde_json::to_value(&r)?;
            }
            report(m, outcome, body, out.as_deref())
        }

        Command::Expander {
            cmd: ExpanderCmd::Gen { n, d, seed, format, out },
        } => {
            let g = random_regular(n, d, seed)?;
            let text = match format {
                GraphFormat::Edges => g.to_edge_list(),
                GraphFormat::Json => canonical_json(&g.to_json()),
            };
            emit(&text, out.as_deref())?;
            Ok(Outcome::Pass)
        }

        Command::Expander {
            cmd: ExpanderCmd::Stats { input, girth_min, epsilon, out },
        } => {
            let bytes = read(&input)?;
            let m = RunManifest::new("expander stats", VERSION).input("graph", &bytes);
            let text = std::str::from_utf8(&bytes)?;
            let g = if text.trim_start().starts_with('{') {
                Graph::from_json(&read_json(&bytes, &input)?)?
            } else {
                Graph::from_edge_list(text)?
            };
            let mut body = serde_json::to_value(graph_stats(&g))?;
            let mut outcome = Outcome::Pass;
            if let (Some(gm), Some(eps)) = (girth_min, epsilon) {
                let cert = certify_family(std::slice::from_ref(&g), &GirthSchedule::constant(gm), eps)?;
                outcome = Outcome::from_bool(cert.pass);
                body["certificate"] = serde_json::to_value(&cert)?;
            }
            report(m, outcome, body, out.as_deref())
        }

        Command::Pipeline { config, out, limits } => {
            let bytes = read(&config)?;
            let mut cfg = PipelineConfig::from_json_str(std::str::from_utf8(&bytes)?)?;
            if limits.is_set() {
                cfg.limits = Some(LimitsConfig::from(limits.over(cfg.limits())));
            }
            let m = RunManifest::new("pipeline", VERSION).input("config", &bytes);
            let bundle = pipeline_monster_desk(&cfg, m)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                    for (name, text) in bundle.files() {
                        let p = dir.join(name);
                        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
                    }
                }
                None => emit(&bundle.to_json_string(), None)?,
            }
            Ok(bundle.outcome)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
