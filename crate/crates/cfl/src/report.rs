//! Analysis reports: an ordered tree of `key = value` fields and named
//! blocks, rendered either for people (text) or for programs (machine).
//!
//! The machine format is line oriented. A field is written as
//! `<indent><key> = <value>` and a block as `<indent><key> {`, followed by
//! its entries one level deeper and a closing `<indent>}`. Indentation is two
//! spaces per level. Keys are nonempty and contain no whitespace, `=`, `{` or
//! `}`. In values, `\` is written `\\`, a line feed `\n` and a carriage
//! return `\r`. Every line,
//! including the last, ends with a single LF. Parsing the emitted text gives
//! back the same report, and emitting a parsed report reproduces the text
//! byte for byte.

use std::fmt::Write as _;
use std::time::Duration;

use crate::CliError;

/// One entry of a report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Field(String, String),
    Block(String, Vec<Entry>),
}

/// A list of entries, used both for a whole report and for block bodies.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub entries: Vec<Entry>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty() && !key.chars().any(|c| c.is_whitespace() || matches!(c, '=' | '{' | '}'))
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    /// Append a field. Panics on a malformed key, which is a programming
    /// error.
    pub fn field(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Report {
        let key = key.into();
        assert!(valid_key(&key), "invalid report key `{key}`");
        self.entries.push(Entry::Field(key, value.to_string()));
        self
    }

    /// Append a block built by `f`.
    pub fn block(&mut self, key: impl Into<String>, f: impl FnOnce(&mut Report)) -> &mut Report {
        let key = key.into();
        assert!(valid_key(&key), "invalid report key `{key}`");
        let mut inner = Report::new();
        f(&mut inner);
        self.entries.push(Entry::Block(key, inner.entries));
        self
    }

    /// Look up a field by a dotted path such as `contact.z1_0`; the first
    /// match in order wins.
    pub fn get(&self, path: &str) -> Option<&str> {
        let mut entries = &self.entries;
        let parts: Vec<&str> = path.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let last = i + 1 == parts.len();
            let mut next = None;
            for e in entries {
                match e {
                    Entry::Field(k, v) if last && k == part => return Some(v),
                    Entry::Block(k, body) if !last && k == part => {
                        next = Some(body);
                        break;
                    }
                    _ => {}
                }
            }
            entries = next?;
        }
        None
    }

    /// Entries of the named top-level block.
    pub fn block_entries(&self, key: &str) -> Option<&[Entry]> {
        self.entries.iter().find_map(|e| match e {
            Entry::Block(k, body) if k == key => Some(body.as_slice()),
            _ => None,
        })
    }

    /// `true` unless the `status` field says `undecided`.
    pub fn decided(&self) -> bool {
        self.get("status") != Some("undecided")
    }

    /// Machine rendering.
    pub fn to_machine(&self) -> String {
        let mut out = String::new();
        emit_machine(&self.entries, 0, &mut out);
        out
    }

    /// Parse the machine rendering.
    pub fn from_machine(src: &str) -> Result<Report, CliError> {
        let mut stack: Vec<(String, Vec<Entry>)> = vec![(String::new(), Vec::new())];
        let err = |line: usize, msg: &str| CliError::Report {
            line,
            msg: msg.to_string(),
        };
        if !src.is_empty() && !src.ends_with('\n') {
            return Err(err(src.lines().count(), "missing final line break"));
        }
        for (n, raw) in src.lines().enumerate() {
            let ln = n + 1;
            let depth = stack.len() - 1;
            let body = raw.trim_start_matches(' ');
            let indent = raw.len() - body.len();
            if body == "}" {
                if depth == 0 || indent != 2 * (depth - 1) {
                    return Err(err(ln, "unbalanced `}`"));
                }
                let (key, entries) = stack.pop().expect("depth > 0");
                stack.last_mut().expect("root").1.push(Entry::Block(key, entries));
                continue;
            }
            if indent != 2 * depth {
                return Err(err(ln, "wrong indentation"));
            }
            if let Some((key, value)) = body.split_once(" = ") {
                if !valid_key(key) {
                    return Err(err(ln, "invalid key"));
                }
                let value = unescape(value).ok_or_else(|| err(ln, "invalid escape"))?;
                stack.last_mut().expect("root").1.push(Entry::Field(key.to_string(), value));
            } else if let Some(key) = body.strip_suffix(" {") {
                if !valid_key(key) {
                    return Err(err(ln, "invalid key"));
                }
                stack.push((key.to_string(), Vec::new()));
            } else {
                return Err(err(ln, "expected `key = value`, `key {` or `}`"));
            }
        }
        if stack.len() != 1 {
            return Err(err(src.lines().count(), "unclosed block"));
        }
        Ok(Report {
            entries: stack.pop().expect("root").1,
        })
    }

    /// Human rendering, with the elapsed time appended when given.
    pub fn to_text(&self, elapsed: Option<Duration>) -> String {
        let mut out = String::new();
        emit_text(&self.entries, 0, &mut out);
        if let Some(d) = elapsed {
            let _ = writeln!(out, "time: {:.1} ms", d.as_secs_f64() * 1e3);
        }
        out
    }
}

fn escape(v: &str) -> String {
    v.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

fn unescape(v: &str) -> Option<String> {
    let mut out = String::with_capacity(v.len());
    let mut chars = v.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                '\\' => out.push('\\'),
                'n' => out.push('\n'),
                'r' => out.push('\r'),
                _ => return None,
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

fn emit_machine(entries: &[Entry], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for e in entries {
        match e {
            Entry::Field(k, v) => {
                let _ = writeln!(out, "{pad}{k} = {}", escape(v));
            }
            Entry::Block(k, body) => {
                let _ = writeln!(out, "{pad}{k} {{");
                emit_machine(body, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

fn emit_text(entries: &[Entry], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for e in entries {
        match e {
            Entry::Field(k, v) => {
                let mut lines = v.lines();
                let _ = writeln!(out, "{pad}{k}: {}", lines.next().unwrap_or(""));
                for l in lines {
                    let _ = writeln!(out, "{pad}  {l}");
                }
            }
            Entry::Block(k, body) => {
                let _ = writeln!(out, "{pad}{k}:");
                emit_text(body, depth + 1, out);
            }
        }
    }
}
