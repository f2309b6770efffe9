//! `!name(arg, ...)` extraction from free agent text.

use super::{registry, spec_for, ArgType, HELP_HINT};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Num(f64),
    Str(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(n) => write!(f, "{n}"),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub name: String,
    pub args: Vec<Value>,
}

impl Command {
    pub fn new(name: &str, args: Vec<Value>) -> Self {
        Command { name: name.to_string(), args }
    }

    pub fn str_arg(&self, i: usize) -> &str {
        match &self.args[i] {
            Value::Str(s) => s,
            _ => unreachable!("validated"),
        }
    }

    pub fn num_arg(&self, i: usize) -> f64 {
        match &self.args[i] {
            Value::Num(n) => *n,
            _ => unreachable!("validated"),
        }
    }

    pub fn opt_str(&self, i: usize) -> Option<&str> {
        match self.args.get(i) {
            Some(Value::Str(s)) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "!{}", self.name)?;
        if !self.args.is_empty() {
            let parts: Vec<String> = self.args.iter().map(Value::to_string).collect();
            write!(f, "({})", parts.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("Command !{name} has a syntax error: {detail}.")]
    Syntax { name: String, detail: String },
    #[error("Command !{0} does not exist. {HELP_HINT}")]
    UnknownCommand(String),
    #[error("Command !{name} was given {given} args, but requires {required} args.")]
    Arity { name: String, given: usize, required: usize },
    #[error("Command !{name} param '{param}' must be a {expected}.")]
    ArgType { name: String, param: String, expected: &'static str },
}

/// A parsed command plus the message text around it.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub command: Command,
    /// Byte range of the command within the message.
    pub span: (usize, usize),
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Cursor<'a> {
    s: &'a str,
    i: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.s[self.i..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }
}

fn parse_args(cur: &mut Cursor, name: &str) -> Result<Vec<Value>, ParseError> {
    let err = |d: &str| ParseError::Syntax { name: name.to_string(), detail: d.to_string() };
    let mut args = Vec::new();
    cur.skip_ws();
    if cur.peek() == Some(')') {
        cur.bump();
        return Ok(args);
    }
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some(q @ ('"' | '\'')) => {
                cur.bump();
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        None => return Err(err("unterminated string")),
                        Some('\\') => match cur.bump() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(c) => s.push(c),
                            None => return Err(err("unterminated string")),
                        },
                        Some(c) if c == q => break,
                        Some(c) => s.push(c),
                    }
                }
                args.push(Value::Str(s));
            }
            Some(c) if c == '-' || c == '+' || c.is_ascii_digit() || c == '.' => {
                let start = cur.i;
                cur.bump();
                while matches!(cur.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
                    cur.bump();
                }
                let text = &cur.s[start..cur.i];
                let n: f64 = text.parse().map_err(|_| err(&format!("bad number {text}")))?;
                args.push(Value::Num(n));
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = cur.i;
                while matches!(cur.peek(), Some(c) if is_ident(c)) {
                    cur.bump();
                }
                match &cur.s[start..cur.i] {
                    "true" => args.push(Value::Bool(true)),
                    "false" => args.push(Value::Bool(false)),
                    other => return Err(err(&format!("unquoted text {other}"))),
                }
            }
            None => return Err(err("missing closing parenthesis")),
            Some(c) => return Err(err(&format!("unexpected character {c}"))),
        }
        cur.skip_ws();
        match cur.bump() {
            Some(',') => continue,
            Some(')') => return Ok(args),
            None => return Err(err("missing closing parenthesis")),
            Some(c) => return Err(err(&format!("unexpected character {c}"))),
        }
    }
}

/// Check arity and argument types against the registry.
pub fn validate(cmd: &Command) -> Result<(), ParseError> {
    let spec = spec_for(&cmd.name).ok_or_else(|| ParseError::UnknownCommand(cmd.name.clone()))?;
    let required = spec.params.len() - spec.optional;
    if cmd.args.len() < required || cmd.args.len() > spec.params.len() {
        return Err(ParseError::Arity { name: cmd.name.clone(), given: cmd.args.len(), required });
    }
    for (param, arg) in spec.params.iter().zip(&cmd.args) {
        let ok = matches!(
            (param.ty, arg),
            (ArgType::String, Value::Str(_)) | (ArgType::Number, Value::Num(_)) | (ArgType::Bool, Value::Bool(_))
        );
        if !ok {
            return Err(ParseError::ArgType { name: cmd.name.clone(), param: param.name.to_string(), expected: param.ty.label() });
        }
    }
    Ok(())
}

/// The first command in `text`, if any. A `!` not followed by an identifier
/// is ordinary punctuation.
pub fn parse_first_command(text: &str) -> Result<Option<Parsed>, ParseError> {
    let mut search = 0;
    while let Some(off) = text[search..].find('!') {
        let bang = search + off;
        let mut cur = Cursor { s: text, i: bang + 1 };
        if !matches!(cur.peek(), Some(c) if is_ident_start(c)) {
            search = bang + 1;
            continue;
        }
        let start = cur.i;
        while matches!(cur.peek(), Some(c) if is_ident(c)) {
            cur.bump();
        }
        let mut name = &text[start..cur.i];
        // "!inventoryI have..." style run-ons: take the longest registered prefix
        if spec_for(name).is_none() {
            if let Some(known) = registry()
                .iter()
                .filter(|s| name.starts_with(s.name) && s.params.is_empty())
                .max_by_key(|s| s.name.len())
            {
                name = known.name;
                cur.i = start + name.len();
            } else {
                return Err(ParseError::UnknownCommand(name.to_string()));
            }
        }
        let args = if cur.peek() == Some('(') {
            cur.bump();
            parse_args(&mut cur, name)?
        } else {
            Vec::new()
        };
        let command = Command::new(name, args);
        validate(&command)?;
        return Ok(Some(Parsed { command, span: (bang, cur.i) }));
    }
    Ok(None)
}

/// Message text with the command removed, trimmed.
pub fn remainder(text: &str, parsed: &Parsed) -> String {
    let (a, b) = parsed.span;
    format!("{}{}", &text[..a], &text[b..]).trim().to_string()
}
