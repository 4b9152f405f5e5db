mod annotate;
mod bcn;
mod pipeline;

use std::path::PathBuf;

use crate::cli::{Command, SynthCommand};
use crate::error::{CliError, CliResult};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Prepare(a) => pipeline::prepare(a),
        Command::Cluster(a) => pipeline::cluster(a),
        Command::Summarize(a) => pipeline::summarize(a),
        Command::Align(a) => pipeline::align(a),
        Command::Report(a) => pipeline::report(a),
        Command::Agreement(a) => annotate::agreement(a),
        Command::BcnTrain(a) => bcn::train(a),
        Command::BcnEval(a) => bcn::eval(a),
        Command::BcnApply(a) => bcn::apply(a),
        Command::BcnStats(a) => bcn::stats(a),
        Command::Serve(a) => annotate::serve(a),
        Command::Synth(SynthCommand::Data(a)) => annotate::synth_data(a),
        Command::Synth(SynthCommand::Annotations(a)) => annotate::synth_annotations(a),
    }
}

/// Splits a `NAME=PATH` argument.
fn named_path(arg: &str) -> CliResult<(String, PathBuf)> {
    match arg.split_once('=') {
        Some((name, path)) if !name.trim().is_empty() && !path.is_empty() => {
            Ok((name.trim().to_string(), PathBuf::from(path)))
        }
        _ => Err(CliError::Usage(format!("expected NAME=PATH, got {arg:?}"))),
    }
}

fn write_text(path: &std::path::Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_paths() {
        assert_eq!(named_path("POS=a/b.jsonl").unwrap(), ("POS".into(), PathBuf::from("a/b.jsonl")));
        assert_eq!(named_path("SEM=x=y").unwrap().1, PathBuf::from("x=y"));
        for bad in ["POS", "=x", "POS="] {
            assert!(matches!(named_path(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }
}
