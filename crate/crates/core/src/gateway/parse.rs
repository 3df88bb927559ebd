//! Extraction and repair of the King's three-field JSON reply.
//!
//! Models wrap the object in code fences, prepend chatter, drop commas
//! between members and emit `True` or `"false"` for booleans. The parser here
//! accepts all of that, and anything it cannot make sense of comes back as a
//! [`ParseFailure`] so the caller can ask the model again.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// The King's verdict on a player turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KingResponse {
    #[serde(rename = "isValid")]
    pub is_valid: bool,
    pub comment: String,
    pub story: String,
}

impl KingResponse {
    pub fn accept(comment: impl Into<String>, story: impl Into<String>) -> Self {
        Self { is_valid: true, comment: comment.into(), story: story.into() }
    }

    pub fn reject(comment: impl Into<String>) -> Self {
        Self { is_valid: false, comment: comment.into(), story: String::new() }
    }

    /// `{"isValid":…,"comment":…,"story":…}` with keys in contract order.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseFailure {
    #[error("no balanced JSON object in reply")]
    NoObject,
    #[error("isValid is missing")]
    MissingIsValid,
    #[error("isValid is not a boolean: {0}")]
    BadIsValid(String),
    #[error("field {0} has the wrong type")]
    BadField(&'static str),
    #[error("isValid is true but the story is empty")]
    EmptyStory,
}

/// Max `{` positions tried as object starts. Bounds work on hostile input.
const MAX_CANDIDATES: usize = 32;
const MAX_DEPTH: usize = 64;

pub fn parse_king_response(raw: &str) -> Result<KingResponse, ParseFailure> {
    let object = extract_object(raw).ok_or(ParseFailure::NoObject)?;
    king_from_object(&object)
}

fn king_from_object(object: &Map<String, Value>) -> Result<KingResponse, ParseFailure> {
    let is_valid = match object.get("isValid") {
        None | Some(Value::Null) => return Err(ParseFailure::MissingIsValid),
        Some(Value::Bool(b)) => *b,
        Some(Value::String(s)) if s.trim().eq_ignore_ascii_case("true") => true,
        Some(Value::String(s)) if s.trim().eq_ignore_ascii_case("false") => false,
        Some(other) => return Err(ParseFailure::BadIsValid(other.to_string())),
    };
    let comment = text_field(object, "comment")?;
    let story = text_field(object, "story")?;
    if !is_valid {
        return Ok(KingResponse { is_valid, comment, story: String::new() });
    }
    if story.trim().is_empty() {
        return Err(ParseFailure::EmptyStory);
    }
    Ok(KingResponse { is_valid, comment, story })
}

fn text_field(object: &Map<String, Value>, key: &'static str) -> Result<String, ParseFailure> {
    match object.get(key) {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ParseFailure::BadField(key)),
    }
}

/// Finds the first `{ … }` span that balances and parses as an object.
pub fn extract_object(raw: &str) -> Option<Map<String, Value>> {
    let bytes = raw.as_bytes();
    let mut from = 0;
    for _ in 0..MAX_CANDIDATES {
        let start = from + bytes[from..].iter().position(|&b| b == b'{')?;
        if let Some(end) = balanced_end(bytes, start) {
            let mut parser = Lenient { src: &raw[start..=end], pos: 0, depth: 0 };
            if let Some(Value::Object(map)) = parser.value() {
                return Some(map);
            }
        }
        from = start + 1;
    }
    None
}

/// Index of the `}` closing the brace at `start`, string-aware.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' | b'[' => depth += 1,
            b'}' | b']' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return (b == b'}').then_some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// JSON with the usual model slips forgiven: missing or trailing commas,
/// single-quoted strings, bare keys, raw newlines inside strings and
/// Python-style `True`/`False`/`None`.
struct Lenient<'a> {
    src: &'a str,
    pos: usize,
    depth: usize,
}

impl Lenient<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn value(&mut self) -> Option<Value> {
        self.skip_ws();
        match self.peek()? {
            '{' => self.nested(Self::object),
            '[' => self.nested(Self::array),
            '"' | '\'' => self.string().map(Value::String),
            c if c == '-' || c.is_ascii_digit() => self.number(),
            c if c.is_alphabetic() => match self.word().as_str() {
                "true" | "True" | "TRUE" => Some(Value::Bool(true)),
                "false" | "False" | "FALSE" => Some(Value::Bool(false)),
                "null" | "None" => Some(Value::Null),
                _ => None,
            },
            _ => None,
        }
    }

    fn nested(&mut self, f: fn(&mut Self) -> Option<Value>) -> Option<Value> {
        if self.depth >= MAX_DEPTH {
            return None;
        }
        self.depth += 1;
        let v = f(self);
        self.depth -= 1;
        v
    }

    fn object(&mut self) -> Option<Value> {
        self.bump(); // '{'
        let mut map = Map::new();
        loop {
            self.skip_ws();
            match self.peek()? {
                '}' => {
                    self.bump();
                    return Some(Value::Object(map));
                }
                ',' => {
                    self.bump();
                    continue;
                }
                _ => {}
            }
            let key = match self.peek()? {
                '"' | '\'' => self.string()?,
                c if c.is_alphabetic() || c == '_' => self.word(),
                _ => return None,
            };
            self.skip_ws();
            if self.bump()? != ':' {
                return None;
            }
            let value = self.value()?;
            map.insert(key, value);
            self.skip_ws();
            match self.peek()? {
                ',' | '}' | '"' | '\'' => {}
                c if c.is_alphabetic() || c == '_' => {}
                _ => return None,
            }
        }
    }

    fn array(&mut self) -> Option<Value> {
        self.bump(); // '['
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek()? {
                ']' => {
                    self.bump();
                    return Some(Value::Array(items));
                }
                ',' => {
                    self.bump();
                }
                _ => items.push(self.value()?),
            }
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
            self.bump();
        }
        self.src[start..self.pos].to_string()
    }

    fn number(&mut self) -> Option<Value> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || "+-.eE".contains(c)) {
            self.bump();
        }
        serde_json::from_str::<serde_json::Number>(&self.src[start..self.pos]).ok().map(Value::Number)
    }

    fn string(&mut self) -> Option<String> {
        let quote = self.bump()?;
        let mut out = String::new();
        loop {
            match self.bump()? {
                c if c == quote => return Some(out),
                '\\' => match self.bump()? {
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    'r' => out.push('\r'),
                    'b' => out.push('\u{8}'),
                    'f' => out.push('\u{c}'),
                    'u' => out.push(self.unicode_escape()?),
                    other => out.push(other),
                },
                c => out.push(c),
            }
        }
    }

    fn hex4(&mut self) -> Option<u32> {
        let digits = self.src.get(self.pos..self.pos + 4)?;
        let v = u32::from_str_radix(digits, 16).ok()?;
        self.pos += 4;
        Some(v)
    }

    fn unicode_escape(&mut self) -> Option<char> {
        let hi = self.hex4()?;
        if (0xD800..0xDC00).contains(&hi) && self.src[self.pos..].starts_with("\\u") {
            self.pos += 2;
            let lo = self.hex4()?;
            if (0xDC00..0xE000).contains(&lo) {
                return char::from_u32(0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00));
            }
            return Some(char::REPLACEMENT_CHARACTER);
        }
        Some(char::from_u32(hi).unwrap_or(char::REPLACEMENT_CHARACTER))
    }
}
