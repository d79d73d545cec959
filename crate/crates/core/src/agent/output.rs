//! Strict readers for `conclusion.txt` and `confidence.txt`.

use std::fs;
use std::path::Path;

use serde_json::Value;

pub const CONCLUSION_FILE: &str = "conclusion.txt";
pub const CONFIDENCE_FILE: &str = "confidence.txt";

/// A parsed agent output: the integer on the 0–100 scale and its explanation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentOutput {
    pub value: u8,
    pub explanation: String,
}

/// Why an output file was rejected, with the offending content kept for audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub reason: String,
    pub content: Option<String>,
}

impl ParseFailure {
    fn new(reason: impl Into<String>, content: &str) -> Self {
        ParseFailure {
            reason: reason.into(),
            content: Some(content.to_owned()),
        }
    }
}

/// Parse text that must hold exactly one JSON object with an integer under
/// `key` in `[0, 100]` and a non-empty string under `"explanation"`.
pub fn parse_output_text(text: &str, key: &str) -> Result<AgentOutput, ParseFailure> {
    let mut stream = serde_json::Deserializer::from_str(text).into_iter::<Value>();
    let value = match stream.next() {
        Some(Ok(v)) => v,
        Some(Err(e)) => return Err(ParseFailure::new(format!("invalid JSON: {e}"), text)),
        None => return Err(ParseFailure::new("empty file", text)),
    };
    let consumed = stream.byte_offset();
    if !text[consumed..].trim().is_empty() {
        return Err(ParseFailure::new("extra content after the JSON object", text));
    }
    let obj = value
        .as_object()
        .ok_or_else(|| ParseFailure::new("top-level value is not a JSON object", text))?;
    if let Some(extra) = obj.keys().find(|k| *k != key && *k != "explanation") {
        return Err(ParseFailure::new(format!("unexpected key {extra:?}"), text));
    }
    let raw = obj
        .get(key)
        .ok_or_else(|| ParseFailure::new(format!("missing key {key:?}"), text))?;
    let number = match raw {
        Value::Number(n) if n.is_i64() || n.is_u64() => n.as_i64().unwrap_or(i64::MAX),
        _ => return Err(ParseFailure::new(format!("{key:?} is not an integer"), text)),
    };
    if !(0..=100).contains(&number) {
        return Err(ParseFailure::new(format!("{key:?} = {number} out of range [0, 100]"), text));
    }
    let explanation = match obj.get("explanation") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(Value::String(_)) => return Err(ParseFailure::new("explanation is empty", text)),
        Some(_) => return Err(ParseFailure::new("explanation is not a string", text)),
        None => return Err(ParseFailure::new("missing key \"explanation\"", text)),
    };
    Ok(AgentOutput {
        value: number as u8,
        explanation,
    })
}

fn parse_file(path: &Path, key: &str) -> Result<AgentOutput, ParseFailure> {
    let text = fs::read_to_string(path).map_err(|e| ParseFailure {
        reason: format!("cannot read {}: {e}", path.display()),
        content: None,
    })?;
    parse_output_text(&text, key)
}

pub fn parse_conclusion(workspace: &Path) -> Result<AgentOutput, ParseFailure> {
    parse_file(&workspace.join(CONCLUSION_FILE), "response")
}

pub fn parse_confidence(workspace: &Path) -> Result<AgentOutput, ParseFailure> {
    parse_file(&workspace.join(CONFIDENCE_FILE), "confidence")
}

/// Serialize an output in the exact file format agents are asked to produce.
pub fn format_output(key: &str, value: u8, explanation: &str) -> String {
    let mut obj = serde_json::Map::new();
    obj.insert(key.to_owned(), Value::from(value));
    obj.insert("explanation".to_owned(), Value::from(explanation));
    Value::Object(obj).to_string()
}
