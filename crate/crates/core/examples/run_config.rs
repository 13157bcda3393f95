//! Running an experiment from an in-memory configuration, without writing files.

use zrp::config::RunConfig;
use zrp::harness::{run_experiment, Experiment};

const CONFIG: &str = r#"
[model]
n = 32
theta = 1.0
alpha = 1.0
lambda = 2.0
beta = 0.5
delta = 2.0

[experiment]
static_samples = 2000
"#;

fn main() -> zrp::Result<()> {
    let cfg = RunConfig::from_toml_str(CONFIG, &["model.theta=2".into()])?;
    println!("config hash {}", cfg.hash()?);
    let report = run_experiment(&cfg, Experiment::SteadyCheck)?;
    for (name, v) in &report.verdicts {
        println!("{:<16} {}", name, if v.pass { "pass" } else { "fail" });
    }
    Ok(())
}
