use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use engine_core::audio::AudioMode;
use engine_core::dataset::{self, DatasetKind, GenOptions};
use engine_core::env::{EnvConfig, Sensors};
use engine_core::net::{Server, ServerConfig};
use engine_core::tasks::TaskKind;

#[derive(Parser)]
#[command(name = "engine", version, about = "Multimodal embodied-agent simulation engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve environments over TCP.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "kick_the_ball")]
        task: TaskKind,
        /// Playground name or scene file; defaults to the task's playground.
        #[arg(long)]
        scene: Option<String>,
        #[arg(long)]
        agents: Option<u32>,
        /// Comma-separated sensor list.
        #[arg(long, default_value = "vision,audio,tactile,proprio")]
        obs: String,
        #[arg(long, default_value = "stereo")]
        audio_mode: AudioMode,
        #[arg(long)]
        hrtf_file: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_envs: u16,
        /// Exit after the first connection closes.
        #[arg(long)]
        once: bool,
    },
    /// Generate a supervised dataset.
    Gen {
        /// image, bbox, distance, sound or tactile
        kind: DatasetKind,
        #[arg(long, default_value_t = dataset::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "stereo")]
        audio_mode: AudioMode,
        #[arg(long)]
        hrtf_file: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> engine_core::Result<()> {
    match cli.command {
        Command::Serve {
            port,
            host,
            task,
            scene,
            agents,
            obs,
            audio_mode,
            hrtf_file,
            seed,
            max_envs,
            once,
        } => {
            let defaults = EnvConfig {
                playground: scene,
                agents,
                sensors: Sensors::parse(&obs)?,
                audio_mode,
                seed,
                hrtf_file: hrtf_file.map(|p| p.to_string_lossy().into_owned()),
                ..EnvConfig::for_task(task)
            };
            let server = Server::bind((host.as_str(), port), ServerConfig { defaults, max_envs })?;
            let addr = server.local_addr()?;
            log::info!("listening on {addr}");
            println!("listening on {addr}");
            if once {
                server.serve_one()
            } else {
                server.run()
            }
        }
        Command::Gen {
            kind,
            n,
            seed,
            out,
            audio_mode,
            hrtf_file,
        } => {
            let opts = GenOptions {
                audio_mode,
                hrtf_file,
                ..GenOptions::new(kind, n, seed, out)
            };
            let m = dataset::generate(&opts)?;
            println!("wrote {} {} samples to {}", m.count, kind, opts.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ENGINE_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
