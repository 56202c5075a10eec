use clap::Parser;

use assembly_speech::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let output_dir = cli.output_dir.clone();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        // machine-readable error report, best effort
        if let Some(dir) = output_dir {
            let report = serde_json::json!({ "error": e.to_string() });
            if std::fs::create_dir_all(&dir).is_ok() {
                let _ = std::fs::write(
                    dir.join("error.json"),
                    serde_json::to_string_pretty(&report).unwrap_or_default(),
                );
            }
        }
        std::process::exit(1);
    }
}
