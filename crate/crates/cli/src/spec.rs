//! System spec files.
//!
//! ```toml
//! kind = "cellular-automaton"
//!
//! [automaton]
//! d = 1
//! support = [0, 1]
//! coefficients = [[[1]], [[1]]]   # one d×d matrix per support index, rows first
//!
//! [schedule]
//! max_n = 64
//! max_window = 8
//! ```

use std::ops::Range;

use mrank::abelian::{GroupPresentation, PresEndomorphism};
use mrank::ca_dual::CASpec;
use mrank::linalg::IntMatrix;
use mrank::natext::{SystemSpec, TowerSpec};
use mrank::trajectory::EngineParams;
use mrank::Error as CoreError;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::CliError;

pub const DEFAULT_MAX_WINDOW: usize = 8;

type Rows = Vec<Vec<i64>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    kind: Spanned<String>,
    automaton: Option<Spanned<RawAutomaton>>,
    endomorphism: Option<Spanned<RawEndo>>,
    tower: Option<Spanned<RawTower>>,
    schedule: Option<Spanned<RawSchedule>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAutomaton {
    d: Spanned<i64>,
    support: Spanned<Vec<i64>>,
    coefficients: Spanned<Vec<Rows>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEndo {
    generators: Spanned<i64>,
    /// Relation lattice generators, each a column of length `generators`.
    #[serde(default)]
    relations: Option<Spanned<Rows>>,
    matrix: Spanned<Rows>,
}

/// A tower level: the fields of either an automaton or an endomorphism, tagged by `kind`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    kind: String,
    d: Option<i64>,
    support: Option<Vec<i64>>,
    coefficients: Option<Vec<Rows>>,
    generators: Option<i64>,
    relations: Option<Rows>,
    matrix: Option<Rows>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTower {
    #[serde(default)]
    connecting: Vec<Spanned<Rows>>,
    levels: Vec<Spanned<RawLevel>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    max_n: Option<Spanned<i64>>,
    max_window: Option<Spanned<i64>>,
    stabilization_window: Option<Spanned<i64>>,
    stable_schedule_steps: Option<Spanned<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub max_n: usize,
    pub max_window: usize,
    pub stabilization_window: usize,
    pub stable_schedule_steps: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        let p = EngineParams::default();
        Self {
            max_n: p.max_n,
            max_window: DEFAULT_MAX_WINDOW,
            stabilization_window: p.stabilization_window,
            stable_schedule_steps: p.stable_schedule_steps,
        }
    }
}

impl Schedule {
    /// Windows `0..=max_window` are schedule steps.
    pub fn params(&self) -> EngineParams {
        EngineParams {
            max_n: self.max_n,
            stabilization_window: self.stabilization_window,
            max_schedule_steps: self.max_window + 1,
            stable_schedule_steps: self.stable_schedule_steps,
            ..EngineParams::default()
        }
    }
}

#[derive(Clone, Debug)]
pub enum System {
    Single(SystemSpec),
    Tower(TowerSpec),
}

#[derive(Clone, Debug)]
pub struct SpecFile {
    pub system: System,
    pub schedule: Schedule,
    /// The parsed document, echoed into reports.
    pub echo: serde_json::Value,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> CliError {
        let (line, column) = line_col(self.text, span.start);
        CliError::Parse { line, column, message: message.into() }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn positive(src: &Source, v: &Spanned<i64>, name: &str) -> Result<usize, CliError> {
    usize::try_from(*v.get_ref())
        .ok()
        .filter(|&x| x >= 1)
        .ok_or_else(|| src.err(v.span(), format!("{name} must be at least 1")))
}

fn matrix(rows: &Rows, cols: usize) -> Result<IntMatrix, String> {
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(format!("row {} has {} entries, expected {cols}", bad + 1, rows[bad].len()));
    }
    IntMatrix::from_rows_i64(rows, cols).map_err(|e| e.to_string())
}

fn square(rows: &Rows, n: usize, what: &str) -> Result<IntMatrix, String> {
    if rows.len() != n {
        return Err(format!("{what} has {} rows, expected {n}", rows.len()));
    }
    matrix(rows, n).map_err(|e| format!("{what}: {e}"))
}

fn automaton(d: i64, support: &[i64], coefficients: &[Rows]) -> Result<CASpec, String> {
    let d = usize::try_from(d).ok().filter(|&d| d >= 1).ok_or("d must be at least 1")?;
    if support.is_empty() {
        return Err("support must be nonempty".into());
    }
    if coefficients.len() != support.len() {
        return Err(format!("{} coefficients for {} support indices", coefficients.len(), support.len()));
    }
    let mut terms = Vec::with_capacity(support.len());
    for (j, rows) in support.iter().zip(coefficients) {
        terms.push((*j, square(rows, d, &format!("coefficient at index {j}"))?));
    }
    CASpec::new(d, terms).map_err(|e| match e {
        CoreError::InvalidAutomaton(m) => m,
        other => other.to_string(),
    })
}

/// Builds the presentation; a well-formed matrix that is not an endomorphism is an invariant
/// violation rather than a parse error.
fn endomorphism(g: i64, relations: Option<&Rows>, m: &Rows) -> Result<Result<PresEndomorphism, CoreError>, String> {
    let g = usize::try_from(g).map_err(|_| "generators must be nonnegative".to_string())?;
    let columns = relations.cloned().unwrap_or_default();
    if let Some(bad) = columns.iter().position(|c| c.len() != g) {
        return Err(format!("relation {} has {} entries, expected {g}", bad + 1, columns[bad].len()));
    }
    let rel = matrix(&columns, g).map_err(|e| format!("relations: {e}"))?.transpose();
    let carrier = GroupPresentation::new(g, rel).map_err(|e| e.to_string())?;
    let m = square(m, g, "matrix")?;
    Ok(PresEndomorphism::new(carrier, m))
}

pub fn parse(text: &str) -> Result<SpecFile, CliError> {
    let src = Source { text };
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        src.err(span, e.message().trim().to_string())
    })?;
    let echo_value: toml::Value = toml::from_str(text).map_err(|e| src.err(0..0, e.message().to_string()))?;
    let echo = serde_json::to_value(echo_value).map_err(|e| CliError::Io(e.to_string()))?;

    let mut schedule = Schedule::default();
    if let Some(s) = &raw.schedule {
        let s = s.get_ref();
        if let Some(v) = &s.max_n {
            schedule.max_n = positive(&src, v, "max_n")?;
        }
        if let Some(v) = &s.max_window {
            schedule.max_window = positive(&src, v, "max_window")?;
        }
        if let Some(v) = &s.stabilization_window {
            schedule.stabilization_window = positive(&src, v, "stabilization_window")?;
        }
        if let Some(v) = &s.stable_schedule_steps {
            schedule.stable_schedule_steps = positive(&src, v, "stable_schedule_steps")?;
        }
    }

    let missing = |section: &str| src.err(raw.kind.span(), format!("kind = \"{}\" requires a [{section}] section", raw.kind.get_ref()));
    let system = match raw.kind.get_ref().as_str() {
        "cellular-automaton" => {
            let a = raw.automaton.as_ref().ok_or_else(|| missing("automaton"))?.get_ref();
            let spec = automaton(*a.d.get_ref(), a.support.get_ref(), a.coefficients.get_ref()).map_err(|m| {
                let span = if m.contains("support") { a.support.span() } else { a.coefficients.span() };
                src.err(span, m)
            })?;
            System::Single(SystemSpec::CellularAutomaton(spec))
        }
        "matrix-endo" => {
            let e = raw.endomorphism.as_ref().ok_or_else(|| missing("endomorphism"))?;
            let r = e.get_ref();
            let endo = endomorphism(*r.generators.get_ref(), r.relations.as_ref().map(|x| x.get_ref()), r.matrix.get_ref())
                .map_err(|m| src.err(e.span(), m))?
                .map_err(|err| CliError::Invariant(err.to_string()))?;
            System::Single(SystemSpec::MatrixEndo(endo))
        }
        "tower" => {
            let t = raw.tower.as_ref().ok_or_else(|| missing("tower"))?.get_ref();
            let mut levels = Vec::with_capacity(t.levels.len());
            for lvl in &t.levels {
                levels.push(level(lvl.get_ref()).map_err(|m| src.err(lvl.span(), m))??);
            }
            let mut connecting = Vec::with_capacity(t.connecting.len());
            for c in &t.connecting {
                let rows = c.get_ref();
                let cols = rows.first().map_or(0, Vec::len);
                connecting.push(matrix(rows, cols).map_err(|m| src.err(c.span(), m))?);
            }
            System::Tower(TowerSpec::new(levels, connecting).map_err(|e| CliError::Invariant(e.to_string()))?)
        }
        other => {
            return Err(src.err(
                raw.kind.span(),
                format!("unknown kind \"{other}\"; expected matrix-endo, cellular-automaton or tower"),
            ))
        }
    };
    Ok(SpecFile { system, schedule, echo })
}

fn level(l: &RawLevel) -> Result<Result<SystemSpec, CliError>, String> {
    let need = |name: &str| format!("{} level is missing `{name}`", l.kind);
    match l.kind.as_str() {
        "cellular-automaton" => {
            let spec = automaton(
                l.d.ok_or_else(|| need("d"))?,
                l.support.as_deref().ok_or_else(|| need("support"))?,
                l.coefficients.as_deref().ok_or_else(|| need("coefficients"))?,
            )?;
            Ok(Ok(SystemSpec::CellularAutomaton(spec)))
        }
        "matrix-endo" => {
            let e = endomorphism(
                l.generators.ok_or_else(|| need("generators"))?,
                l.relations.as_ref(),
                l.matrix.as_ref().ok_or_else(|| need("matrix"))?,
            )?;
            Ok(e.map(SystemSpec::MatrixEndo).map_err(|err| CliError::Invariant(err.to_string())))
        }
        other => Err(format!("unknown level kind \"{other}\"")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_position_of_duplicate_support() {
        let text = "kind = \"cellular-automaton\"\n[automaton]\nd = 1\nsupport = [0, 0]\ncoefficients = [[[1]], [[2]]]\n";
        match parse(text) {
            Err(CliError::Parse { line, column, message }) => {
                assert_eq!((line, column), (4, 11));
                assert!(message.contains("twice"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse("kind = \"matrix-endo\"\n[endomorphism\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_endomorphism_is_an_invariant_violation() {
        let text = "kind = \"matrix-endo\"\n[endomorphism]\ngenerators = 2\nrelations = [[0, 2]]\nmatrix = [[0, 1], [0, 0]]\n";
        assert!(matches!(parse(text), Err(CliError::Invariant(_))));
    }

    #[test]
    fn schedule_overrides_and_validation() {
        let text = "kind = \"matrix-endo\"\n[endomorphism]\ngenerators = 1\nmatrix = [[2]]\n[schedule]\nmax_n = 10\nmax_window = 3\n";
        let s = parse(text).unwrap();
        assert_eq!(s.schedule.max_n, 10);
        assert_eq!(s.schedule.params().max_schedule_steps, 4);
        let bad = "kind = \"matrix-endo\"\n[endomorphism]\ngenerators = 1\nmatrix = [[2]]\n[schedule]\nmax_n = 0\n";
        assert!(matches!(parse(bad), Err(CliError::Parse { line: 6, .. })));
    }

    #[test]
    fn ragged_matrix_is_a_parse_error() {
        let text = "kind = \"matrix-endo\"\n[endomorphism]\ngenerators = 2\nmatrix = [[0, 1], [0]]\n";
        assert!(matches!(parse(text), Err(CliError::Parse { .. })));
    }
}
