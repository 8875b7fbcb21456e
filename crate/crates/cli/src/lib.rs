//! Command-line driver and review service for `guidemap`.

pub mod classify;
pub mod cli;
pub mod report;
pub mod service;

use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::{Context, Result};
use guidemap::llm::LlmClient;

use crate::cli::{Cli, Command, ServeArgs};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Classify(args) => {
            let cfg = classify::RunConfig::from_args(&args)?;
            let s = classify::run_classify(&cfg)?;
            println!(
                "{} documents, {} result records written to {} ({} failed)",
                s.documents,
                s.records,
                cfg.out.display(),
                s.failed
            );
        }
        Command::Evaluate(args) => {
            let rows = report::run_evaluate(&args)?;
            println!("{:<28} {:>5} {:>7} {:>10} {:>10}", "method", "docs", "failed", "recall", "micro");
            for r in rows {
                println!(
                    "{:<28} {:>5} {:>7} {:>10.4} {:>10.4}",
                    r.method, r.documents, r.failed, r.mean_recall, r.micro_recall
                );
            }
        }
        Command::Compare(args) => {
            let d = report::run_compare(&args)?;
            println!(
                "{} - {} over {} documents: {:.1}% lower, {:.1}% equal, {:.1}% higher",
                d.method_a,
                d.method_b,
                d.differences.len(),
                100.0 * d.share_negative,
                100.0 * d.share_zero,
                100.0 * d.share_positive
            );
        }
        Command::SummarizeUnits(args) => {
            let endpoint = args.llm.endpoint().context("summarize-units needs --llm-url or LLM_BASE_URL")?;
            let n = classify::run_summarize(&args.guideline, &args.out, &LlmClient::http(endpoint))?;
            println!("wrote {n} summaries to {}", args.out.display());
        }
        Command::Serve(args) => serve(args)?,
        Command::WholeOntology(args) => {
            let s = classify::run_whole_ontology(&args, None)?;
            println!("{} documents, {} failed", s.documents, s.failed);
        }
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let guideline = classify::load_guideline(&args.guideline)?;
    let decisions = args.decisions.clone().unwrap_or_else(|| args.results.join("decisions.jsonl"));
    let state = Arc::new(service::ServiceState::load(&args.results, guideline, &decisions)?);
    let addr: SocketAddr = format!("{}:{}", args.bind, args.port)
        .parse()
        .with_context(|| format!("invalid bind address {}:{}", args.bind, args.port))?;
    let rt = tokio::runtime::Runtime::new().context("starting async runtime")?;
    rt.block_on(async {
        let listener = service::bind(addr).await?;
        println!("serving on http://{}", listener.local_addr()?);
        service::serve(listener, state, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })
}
