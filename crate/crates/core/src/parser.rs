//! Line-oriented TBN text format and the JSON result document.
//!
//! One monomer per line:
//!
//! ```text
//! # comment
//! b
//! 3x in_x: x x x
//! gate: a a b* c*
//! ```
//!
//! An optional `<count>x` prefix repeats the monomer as distinct instances, an
//! optional `<label>:` names it, and the remaining tokens are sites, with a
//! trailing `*` marking the complement.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{ParseError, ParseErrorKind};
use crate::model::{is_identifier, Configuration, Monomer, SiteType, Tbn};
use crate::queries::QueryResult;

/// A parsed TBN together with the source line of each monomer.
#[derive(Clone, Debug)]
pub struct TbnDocument {
    pub source: String,
    pub tbn: Tbn,
    /// 1-based source line per monomer id.
    pub lines: Vec<usize>,
}

pub fn parse_tbn(text: &str) -> Result<Tbn, ParseError> {
    parse_document(text).map(|d| d.tbn)
}

pub fn parse_document(text: &str) -> Result<TbnDocument, ParseError> {
    let mut monomers = Vec::new();
    let mut lines = Vec::new();
    let mut label_line: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |kind| ParseError {
            line: line_no,
            kind,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace().peekable();

        let mut count = 1usize;
        if let Some(first) = tokens.peek() {
            if let Some(num) = count_prefix(first) {
                count = match num.parse::<usize>() {
                    Ok(n) if n > 0 => n,
                    _ => return Err(err(ParseErrorKind::BadCount(num.to_string()))),
                };
                tokens.next();
            }
        }

        let mut label = None;
        if let Some(tok) = tokens.peek() {
            if let Some(name) = tok.strip_suffix(':') {
                if !is_identifier(name) {
                    return Err(err(ParseErrorKind::MalformedToken(tok.to_string())));
                }
                if let Some(&prev) = label_line.get(name) {
                    return Err(err(ParseErrorKind::DuplicateLabel(name.to_string(), prev)));
                }
                label_line.insert(name.to_string(), line_no);
                label = Some(name.to_string());
                tokens.next();
            }
        }

        let sites = tokens
            .map(|tok| {
                tok.parse::<SiteType>()
                    .map_err(|_| err(ParseErrorKind::MalformedToken(tok.to_string())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if sites.is_empty() {
            return Err(err(ParseErrorKind::EmptyMonomer));
        }
        for _ in 0..count {
            monomers.push(Monomer {
                label: label.clone(),
                sites: sites.clone(),
            });
            lines.push(line_no);
        }
    }

    let tbn = Tbn::new(monomers).expect("parser rejects empty monomers");
    Ok(TbnDocument {
        source: text.to_string(),
        tbn,
        lines,
    })
}

/// Recognizes a `<count>x` prefix token, returning the count text. Signed
/// counts are returned too so they can be rejected with a precise error.
fn count_prefix(tok: &str) -> Option<&str> {
    let num = tok.strip_suffix('x')?;
    let digits = num.strip_prefix('-').unwrap_or(num);
    (!digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())).then_some(num)
}

/// Canonical text: one line per monomer, except that consecutive identical
/// labeled monomers are written once with a count prefix so that labels stay
/// unique on re-parse.
pub fn serialize_tbn(t: &Tbn) -> String {
    let mut out = String::new();
    let ms = t.monomers();
    let mut i = 0;
    while i < ms.len() {
        let mut run = 1;
        if ms[i].label.is_some() {
            while i + run < ms.len() && ms[i + run] == ms[i] {
                run += 1;
            }
        }
        if run > 1 {
            out.push_str(&format!("{run}x "));
        }
        if let Some(label) = &ms[i].label {
            out.push_str(label);
            out.push_str(": ");
        }
        let sites: Vec<String> = ms[i].sites.iter().map(ToString::to_string).collect();
        out.push_str(&sites.join(" "));
        out.push('\n');
        i += run;
    }
    out
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct MonomerJson {
    index: usize,
    label: Option<String>,
    sites: Vec<String>,
}

#[derive(Serialize)]
struct StatsJson {
    solver_calls: u64,
    decisions: u64,
    conflicts: u64,
    propagations: u64,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct ResultJson {
    schema_version: u32,
    method: String,
    stable_polymer_count: Option<usize>,
    min_polymers: Option<usize>,
    satisfiable: Option<bool>,
    monomer: Option<usize>,
    monomer_free: Option<bool>,
    polymer_count: Option<usize>,
    polymers: Vec<Vec<usize>>,
    pairs: Vec<[String; 2]>,
    monomers: Vec<MonomerJson>,
    stats: StatsJson,
}

/// Renders a query result as the versioned JSON document.
///
/// For a single existence query (`min_polymers` set) the stable count is
/// unknown and emitted as `null`; `satisfiable` says whether a witness exists.
/// `polymers` lists monomer indices per polymer of the witness and `pairs`
/// uses `"<monomer>.<slot>"` site references.
pub fn emit_result_json(t: &Tbn, r: &QueryResult) -> String {
    let empty = Configuration::new();
    let witness = r.witness.as_ref().unwrap_or(&empty);
    let polymers = if r.witness.is_some() {
        t.polymers(witness).groups().to_vec()
    } else {
        Vec::new()
    };
    let pairs = witness
        .pairs()
        .iter()
        .map(|&(s, u)| [t.site_ref(s).to_string(), t.site_ref(u).to_string()])
        .collect();
    let monomers = t
        .monomers()
        .iter()
        .enumerate()
        .map(|(index, m)| MonomerJson {
            index,
            label: m.label.clone(),
            sites: m.sites.iter().map(ToString::to_string).collect(),
        })
        .collect();
    let doc = ResultJson {
        schema_version: SCHEMA_VERSION,
        method: r.method.to_string(),
        stable_polymer_count: r.min_polymers.is_none().then_some(r.stable_polymer_count),
        min_polymers: r.min_polymers,
        satisfiable: r.min_polymers.map(|_| r.witness.is_some()),
        monomer: r.monomer,
        monomer_free: r.free_verdict,
        polymer_count: r.witness.as_ref().map(|_| polymers.len()),
        polymers,
        pairs,
        monomers,
        stats: StatsJson {
            solver_calls: r.stats.solver_calls,
            decisions: r.stats.decisions,
            conflicts: r.stats.conflicts,
            propagations: r.stats.propagations,
            wall_time_ms: r.stats.wall_time.as_secs_f64() * 1e3,
        },
    };
    serde_json::to_string_pretty(&doc).expect("result document serializes")
}
