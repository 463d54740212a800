use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{PlotData, TermCandidate};
use crate::model::Term;

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error("decision source closed")]
    Closed,
    #[error("no scripted answer for {0}")]
    MissingAnswer(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Something that decides, candidate by candidate, whether to keep a term.
pub trait DecisionSource {
    fn decide(&mut self, candidate: &TermCandidate, plots: &[PlotData], names: &[String]) -> Result<bool, DecisionError>;
}

/// Silent mode: keep everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeepAll;

impl DecisionSource for KeepAll {
    fn decide(&mut self, _: &TermCandidate, _: &[PlotData], _: &[String]) -> Result<bool, DecisionError> {
        Ok(true)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KeepNone;

impl DecisionSource for KeepNone {
    fn decide(&mut self, _: &TermCandidate, _: &[PlotData], _: &[String]) -> Result<bool, DecisionError> {
        Ok(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedAnswer {
    pub term: Term,
    pub keep: bool,
}

/// Recorded answers, looked up by term. Candidates without an answer get
/// `default`, or an error when there is none.
#[derive(Debug, Clone, Default)]
pub struct ScriptedSource {
    answers: HashMap<Term, bool>,
    default: Option<bool>,
}

impl ScriptedSource {
    pub fn new(answers: impl IntoIterator<Item = ScriptedAnswer>) -> Self {
        Self { answers: answers.into_iter().map(|a| (a.term, a.keep)).collect(), default: None }
    }

    pub fn with_default(mut self, keep: bool) -> Self {
        self.default = Some(keep);
        self
    }
}

impl DecisionSource for ScriptedSource {
    fn decide(&mut self, c: &TermCandidate, _: &[PlotData], names: &[String]) -> Result<bool, DecisionError> {
        self.answers
            .get(&c.term)
            .copied()
            .or(self.default)
            .ok_or_else(|| DecisionError::MissingAnswer(c.term.label(names)))
    }
}

/// Interactive prompt: prints the candidate and asks whether to discard it.
/// `Y` discards, `N` keeps; anything else asks again. End of input closes the
/// source.
pub struct TerminalSource<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> TerminalSource<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Self { input, output }
    }
}

impl<R: BufRead, W: Write> DecisionSource for TerminalSource<R, W> {
    fn decide(&mut self, c: &TermCandidate, plots: &[PlotData], names: &[String]) -> Result<bool, DecisionError> {
        let kind = match c.term {
            Term::Interaction { .. } => "interaction",
            _ => "squared",
        };
        writeln!(
            self.output,
            "{} term {}: statistic {:.4}, p-value {:.3e} ({} plot{} available)",
            kind,
            c.term.label(names),
            c.test_statistic,
            c.p_value,
            plots.len(),
            if plots.len() == 1 { "" } else { "s" }
        )?;
        loop {
            write!(self.output, "Discard {kind} term? [Y/N] ")?;
            self.output.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Err(DecisionError::Closed);
            }
            match line.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" => return Ok(false),
                "n" | "no" => return Ok(true),
                _ => writeln!(self.output, "Please answer Y or N.")?,
            }
        }
    }
}
