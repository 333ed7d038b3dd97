//! Experiment configuration files: parse, resolve the `auto` fields against
//! a vocabulary, and print the canonical form that `mulrnn train` writes
//! to `resolved.cfg`.
//!
//!     cargo run --example config_file

use mulrnn::config::ExperimentConfig;

const TEXT: &str = "\
# an equal-budget tmGRU run on text8
[model]
cell = tmgru
budget = 500000
intermediate = auto

[train]
epochs = 5
lr = 0.002
grad_clip_norm = 1.0

[data]
dataset = text8
data_dir = data/text8
";

fn main() -> mulrnn::Result<()> {
    let cfg = ExperimentConfig::parse(TEXT)?;
    let resolved = cfg.resolve(27)?;
    print!("{}", resolved.to_text());
    let lm = resolved.lm_config(27)?;
    println!("# -> {} cell parameters, {} in total", lm.cell.param_count(), lm.param_count());

    match ExperimentConfig::parse("[train]\nlearning_rate = 0.1\n") {
        Ok(_) => unreachable!("unknown keys are rejected"),
        Err(e) => println!("# typo: {e}"),
    }
    Ok(())
}
