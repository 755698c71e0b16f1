// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use lindsym_cli::{resolve_config, run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    // rayon supplies the parallelism; keep the dense kernels sequential so
    // results do not depend on the thread count
    faer::set_global_parallelism(faer::Par::Seq);

    let outcome = resolve_config(&cli).and_then(|cfg| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.output.threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        pool.install(|| run(&cli, &cfg, &mut std::io::stdout().lock()))
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
