//! `dualdensity` command-line tool.
//!
//! Results go to stdout as JSON, a short summary to stderr. Exit status is 0
//! on success, 1 on domain errors and 2 on usage errors.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dualdensity::density::LogBase;

use crate::commands::{CliError, Output};

#[derive(Debug, Parser)]
#[command(
    name = "dualdensity",
    version,
    about = "Compose and compare dual density word meanings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Numerical tolerance for proportionality and PSD checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Logarithm base for entropies.
    #[arg(long, global = true, value_enum, default_value_t = Base::Two)]
    pub base: Base,
    /// Compact JSON on stdout (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Indented JSON on stdout.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

impl Base {
    pub fn log_base(self) -> LogBase {
        match self {
            Base::Two => LogBase::Two,
            Base::E => LogBase::E,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Base::Two => "2",
            Base::E => "e",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a sequence of pregroup types to a target.
    Reduce {
        /// Comma-separated word types, e.g. "n, n^r s n^l, n".
        #[arg(long)]
        types: String,
        #[arg(long)]
        target: String,
    },
    /// Compose a phrase over a lexicon.
    Compose {
        /// Lexicon file, or "beirut" for the built-in model.
        #[arg(long)]
        lexicon: String,
        #[arg(long)]
        phrase: String,
        #[arg(long)]
        target: String,
    },
    /// Graded entailment k(word-a ⊑ word-b).
    Entail {
        #[arg(long)]
        lexicon: String,
        #[arg(long)]
        word_a: String,
        #[arg(long)]
        word_b: String,
    },
    /// Both entropies of a word's dual density.
    Entropy {
        #[arg(long)]
        lexicon: String,
        #[arg(long)]
        word: String,
    },
    /// Run a worked example end to end.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
    },
    /// Validate a lexicon file.
    Validate {
        #[arg(long)]
        lexicon: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DemoName {
    Beirut,
}

fn dispatch(command: &Command, g: &Global) -> Result<Output, CliError> {
    match command {
        Command::Reduce { types, target } => commands::reduce(types, target),
        Command::Compose {
            lexicon,
            phrase,
            target,
        } => commands::compose(lexicon, phrase, target, g),
        Command::Entail {
            lexicon,
            word_a,
            word_b,
        } => commands::entail(lexicon, word_a, word_b, g),
        Command::Entropy { lexicon, word } => commands::entropy(lexicon, word, g),
        Command::Demo { name: DemoName::Beirut } => commands::demo_beirut(g),
        Command::Validate { lexicon } => commands::validate(lexicon),
    }
}

fn render(value: &serde_json::Value, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value).expect("JSON values serialize")
    } else {
        value.to_string()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if !cli.global.tol.is_finite() || cli.global.tol < 0.0 {
        eprintln!("error: --tol must be a nonnegative number");
        return ExitCode::from(2);
    }
    match dispatch(&cli.command, &cli.global) {
        Ok(out) => {
            println!("{}", render(&out.json, cli.global.pretty));
            eprintln!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", render(&e.to_json(), cli.global.pretty));
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
