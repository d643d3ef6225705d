//! `hrlmi`: train, evaluate, ablate, export and talk to the dialogue manager.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 when a command fails.

mod session;
mod templates;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hrlmi::domain::{write_traces_jsonl, UserProfile};
use hrlmi::harness::{compare, evaluate, export_figure, run_ablation, AblationSpec, EvalReport};
use hrlmi::hierarchy::{DialoguePolicy, RandomPolicy};
use hrlmi::training::{train, Checkpoint, TrainConfig, Variant};
use hrlmi::usersim::SimParams;

use templates::Templates;

const OUT_ENV: &str = "HRLMI_OUT";

#[derive(Parser)]
#[command(name = "hrlmi", version, about = "Hierarchical SAC dialogue manager for motivational interviewing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one variant and write a run directory.
    Train(TrainArgs),
    /// Evaluate a checkpoint greedily against the scripted simulator.
    Eval(EvalArgs),
    /// Train several variants on one configuration and compare them.
    Ablate(AblateArgs),
    /// Play the patient yourself against a checkpoint.
    Session(SessionArgs),
    /// Write the data behind figure 2 (reward curve), 3 (act usage) or 4 (master actions).
    Export(ExportArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML training configuration; built-in defaults when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Apply the laptop-sized preset from the config's `desk_scale` table.
    #[arg(long)]
    desk_scale: bool,
    /// Base seed; overrides the config (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config field, e.g. `--set epochs=3 --set desk_scale.sub_lr=1e-3`. Applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output root; run directories are created inside it.
    #[arg(long, env = OUT_ENV, default_value = "runs")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// full, no-maml, no-hrl or random.
    #[arg(long, default_value = "full")]
    variant: Variant,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint file written by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Evaluate one profile only (open, resistant, receptive); all three by default.
    #[arg(long)]
    profile: Option<UserProfile>,
    /// Episodes per profile.
    #[arg(long, short, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulator parameter file; shipped defaults when omitted.
    #[arg(long)]
    sim_params: Option<PathBuf>,
    /// Also write the report as JSON to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Variants to train, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "full,no-maml,no-hrl,random")]
    variants: Vec<Variant>,
}

#[derive(Args)]
struct SessionArgs {
    /// Checkpoint to talk to; a uniform-random agent when omitted.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Profile recorded in the transcript.
    #[arg(long, default_value = "receptive")]
    profile: UserProfile,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Act phrasing table; the shipped one when omitted.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Transcript path (JSON Lines); defaults to `<out>/sessions/session-<profile>-s<seed>.jsonl`.
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[arg(long, env = OUT_ENV, default_value = "runs")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    /// Run directory written by `train`.
    #[arg(long)]
    run_dir: PathBuf,
    /// 2, 3 or 4.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=4))]
    figure: u32,
}

type Failure = Box<dyn std::error::Error>;

fn load_config(args: &ConfigArgs) -> Result<TrainConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => TrainConfig::load(path)?,
        None => TrainConfig::default(),
    };
    if args.desk_scale {
        cfg.apply_desk_scale();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.apply_overrides(&args.overrides)?;
    if let Some(path) = &cfg.sim_params {
        if !path.is_file() {
            return Err(format!("sim_params file {} does not exist", path.display()).into());
        }
    }
    Ok(cfg)
}

fn print_report(label: &str, report: &EvalReport) {
    for p in &report.per_profile {
        println!("{label} {:<18} {:>9.1} ± {:<8.1} (n={})", p.profile.to_string(), p.summary.mean, p.summary.sd, p.summary.count);
    }
    println!("{label} {:<18} {:>9.1} ± {:<8.1} (n={})", "pooled", report.pooled.mean, report.pooled.sd, report.pooled.count);
}

fn cmd_train(args: &TrainArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let run = train(&cfg, args.variant, &args.config.out, |r| {
        eprintln!("epoch {:>3}  profile {:<18} eval {:>9.1} ± {:.1}  ({:.1}s)", r.epoch, r.profile.to_string(), r.mean_reward, r.sd_reward, r.wall_time_s);
    })?;
    print_report("final", &run.final_eval);
    println!("{}", run.run_dir.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), Failure> {
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let params = match &args.sim_params {
        Some(path) => SimParams::load(path)?,
        None => SimParams::default(),
    };
    let profiles: Vec<UserProfile> = match args.profile {
        Some(p) => vec![p],
        None => UserProfile::ALL.to_vec(),
    };
    let (report, _) = evaluate(&*checkpoint.policy(), &params, &profiles, args.n, args.seed)?;
    print_report("eval", &report);
    if report.empty {
        println!("no episodes were run");
    }
    if let Some(path) = &args.output {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(())
}

fn cmd_ablate(args: &AblateArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let mut outcomes = Vec::new();
    for &variant in &args.variants {
        eprintln!("training {variant}");
        let outcome = run_ablation(&AblationSpec { variant, config: cfg.clone() }, &args.config.out)?;
        print_report(variant.name(), &outcome.report);
        outcomes.push(outcome);
    }
    let reference = outcomes.iter().find(|o| o.variant == Variant::RandomBaseline);
    if let Some(base) = reference {
        for o in outcomes.iter().filter(|o| o.variant != Variant::RandomBaseline) {
            let c = compare(&o.report, &base.report);
            let p = c.welch.map(|w| format!("{:.4}", w.p_two_sided)).unwrap_or_else(|| "n/a".into());
            println!("{} vs random: difference {:.1} ({:.2} SE), Welch p = {p}", o.variant, c.difference, c.z());
        }
    }
    Ok(())
}

fn cmd_session(args: &SessionArgs) -> Result<(), Failure> {
    let templates = match &args.templates {
        Some(path) => Templates::parse(&fs::read_to_string(path)?).map_err(|e| format!("{}: {e}", path.display()))?,
        None => Templates::parse(templates::DEFAULT_TEMPLATES)?,
    };
    let checkpoint = args.checkpoint.as_deref().map(Checkpoint::load).transpose()?;
    let policy: Box<dyn DialoguePolicy + '_> = match &checkpoint {
        Some(c) => c.policy(),
        None => {
            eprintln!("no checkpoint given; the agent acts uniformly at random");
            Box::new(RandomPolicy)
        }
    };
    let transcript = args.transcript.clone().unwrap_or_else(|| {
        args.out.join("sessions").join(format!("session-{}-s{}.jsonl", args.profile, args.seed))
    });
    let trace = session::run_session(&*policy, args.profile, args.seed, &templates, io::stdin().lock(), io::stdout())?;
    if let Some(dir) = transcript.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(&transcript)?);
    write_traces_jsonl(&mut w, std::slice::from_ref(&trace))?;
    w.flush()?;
    println!("transcript saved to {}", transcript.display());
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> Result<(), Failure> {
    let path = export_figure(Path::new(&args.run_dir), args.figure)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            e.print().ok();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Session(a) => cmd_session(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
