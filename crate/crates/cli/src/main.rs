use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use densitylab_cli::config::{parse_kv, RunConfig};
use densitylab_cli::run::{cmd_optimize, cmd_profile, cmd_verify, Failure};

/// Density profiles, identity checks and variational fits for small atoms.
#[derive(Parser)]
#[command(name = "densitylab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate ρ̃, h̃ and t₁ on the radial grid.
    #[command(allow_negative_numbers = true)]
    Profile(Opts),
    /// Run the verification checks and write a report.
    #[command(allow_negative_numbers = true)]
    Verify(Opts),
    /// Minimise the energy over a trial family.
    #[command(allow_negative_numbers = true)]
    Optimize(Opts),
    /// Print every config key with its default.
    Keys,
}

#[derive(Args)]
struct Opts {
    /// hydrogen, hydrogen-2s, product-helium, jastrow-helium or h2-molecule.
    #[arg(long)]
    preset: Option<String>,
    /// Flat `key = value` config file, applied after the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "Z")]
    z: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    /// Comma-separated subset of checks.
    #[arg(long)]
    check: Option<String>,
    #[arg(long)]
    grid_max: Option<String>,
    #[arg(long)]
    grid_points: Option<String>,
    #[arg(long)]
    sphere_degree: Option<String>,
    /// Steps per Markov chain.
    #[arg(long)]
    mc_steps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Energy evaluations allowed to the optimiser.
    #[arg(long)]
    budget: Option<String>,
    /// hydrogenic, product or jastrow.
    #[arg(long)]
    family: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Opts {
    fn config(&self) -> Result<RunConfig, Failure> {
        let mut pairs = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", p.display())))?;
                parse_kv(&text)?
            }
            None => Vec::new(),
        };
        if let Some(p) = &self.preset {
            pairs.insert(0, ("preset".into(), p.clone()));
            pairs.retain(|(k, v)| k != "preset" || v == p);
        }
        let flags = [
            ("z", &self.z),
            ("n", &self.n),
            ("checks", &self.check),
            ("grid_max", &self.grid_max),
            ("grid_points", &self.grid_points),
            ("sphere_degree", &self.sphere_degree),
            ("mc_steps", &self.mc_steps),
            ("seed", &self.seed),
            ("budget", &self.budget),
            ("family", &self.family),
            ("out", &self.out),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                pairs.push((k.into(), v.clone()));
            }
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Failure::Config(format!("--set expects key=value, got '{s}'")))?;
            pairs.push((k.trim().into(), v.trim().into()));
        }
        let cfg = RunConfig::from_pairs(&pairs)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Keys => {
            print!("{}", RunConfig::describe_defaults());
            return ExitCode::SUCCESS;
        }
        Command::Profile(o) => o.config().and_then(|c| {
            let s = cmd_profile(&c)?;
            println!(
                "wrote {} to {}; ρ̃(0) = {:.12e}, norm = {:.12e}",
                s.files.join(", "),
                c.out,
                s.rho_tilde_0,
                s.norm
            );
            Ok(0)
        }),
        Command::Verify(o) => o.config().and_then(|c| {
            let r = cmd_verify(&c)?;
            print!("{}", r.to_text());
            Ok(if r.pass { 0 } else { 5 })
        }),
        Command::Optimize(o) => o.config().and_then(|c| {
            let out = cmd_optimize(&c)?;
            let r = &out.result;
            println!(
                "{}: θ* = {:?}, E* = {:.12} ± {:.2e}, ε = {:.12}, {} evaluations{}",
                r.family.param_names.join(","),
                r.theta_star,
                r.energy_star.value,
                r.energy_star.stderr,
                out.epsilon,
                r.evaluations,
                if r.converged { "" } else { ", NOT converged" }
            );
            Ok(if r.converged { 0 } else { 4 })
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("densitylab: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
