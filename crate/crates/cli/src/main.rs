use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use heritage_kg_cli::{
    cmd_build, init_logging, load_store, load_story_dir, render_story, router, serve, AppState, CliError,
    PipelineConfig, StoryFormat,
};

#[derive(Parser)]
#[command(name = "heritage-kg", version, about = "Catalog tables to a knowledge graph, a SPARQL endpoint, and data stories")]
struct Cli {
    /// Pipeline configuration file.
    #[arg(long, global = true, default_value = "pipeline.json")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest, validate and materialize; write .nt, .ttl and the report.
    Build,
    /// Serve /sparql, /story and /assets.
    Serve {
        /// Run `build` first.
        #[arg(long)]
        build: bool,
        /// Treat any failing story section as a request failure (502).
        #[arg(long)]
        strict: bool,
    },
    /// Compose one story and write it to a file (or stdout).
    Story {
        /// Object IRI.
        #[arg(long)]
        object: String,
        /// Story config id (file name stem in the stories directory).
        #[arg(long = "story-config", default_value = "default")]
        story_config: String,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the JSON document instead of HTML.
        #[arg(long)]
        json: bool,
        /// Fail if any section fails.
        #[arg(long)]
        strict: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = PipelineConfig::load(&cli.config)?;
    match cli.command {
        Command::Build => {
            let outcome = cmd_build(&config)?;
            eprintln!(
                "wrote {} triples to {}",
                outcome.report.materialization.triples,
                config.output.ntriples.display()
            );
            Ok(())
        }
        Command::Serve { build, strict } => {
            if build {
                cmd_build(&config)?;
            }
            let graph = Arc::new(load_store(&config.output.ntriples)?);
            let stories = Arc::new(load_story_dir(&config.stories)?);
            let app = router(AppState { graph, stories, strict }, &config.serve.assets);
            let addr = format!("{}:{}", config.serve.host, config.serve.port);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .map_err(|e| CliError::Io(format!("cannot bind {addr}: {e}")))?;
                tracing::info!(address = %addr, "listening");
                serve(listener, app).await.map_err(|e| CliError::Io(e.to_string()))
            })
        }
        Command::Story {
            object,
            story_config,
            out,
            json,
            strict,
        } => {
            let graph = Arc::new(load_store(&config.output.ntriples)?);
            let stories = load_story_dir(&config.stories)?;
            let format = if json { StoryFormat::Json } else { StoryFormat::Html };
            let body = render_story(&graph, &stories, &object, &story_config, format, strict)?;
            match out {
                Some(path) => std::fs::write(&path, body)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
                None => {
                    print!("{body}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if matches!(cli.command, Command::Serve { .. }) { "info" } else { "warn" };
    init_logging(level);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
