//! Drive the experiment runner from code: parse a config, run it on two
//! threads and read the manifest.
//!
//! cargo run --example run_experiment

use boundary_lab::runner::{list_experiments, run_config, ExperimentConfig, RunOptions};
use boundary_lab::Result;

const CONFIG: &str = r#"
kind = "inequality-suite"
name = "quick-suite"
seed = 9

[inequality]
suites = ["mixture-lemma", "paley-zygmund", "rogozin", "berry-esseen"]
mixture_cases = 200
"#;

fn main() -> Result<()> {
    for entry in list_experiments() {
        println!("{}", entry.line);
    }
    let cfg: ExperimentConfig = CONFIG.parse()?;
    let out = std::env::temp_dir().join("boundary-lab-example");
    let opts = RunOptions { threads: Some(2), seed: None, out: Some(out) };
    let outcome = run_config(&cfg, CONFIG, &opts)?;
    println!("wrote {} files to {}", outcome.manifest.outputs.len(), outcome.out_dir.display());
    for (k, v) in &outcome.manifest.summaries {
        println!("  {k} = {v}");
    }
    Ok(())
}
