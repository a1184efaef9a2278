//! Edit scripts: one op per line.
//!
//! ```text
//! A <i>         access
//! X <i> <len>   extract
//! R <i> <c>     replace
//! I <i> <c>     insert
//! D <i>         delete
//! ```
//!
//! Positions are 1-based decimal. `<c>` is a single literal byte or `\xHH`.
//! Blank lines are ignored.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Access(usize),
    Extract(usize, usize),
    Replace(usize, u8),
    Insert(usize, u8),
    Delete(usize),
}

/// An op together with its 1-based line in the script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptLine {
    pub line: usize,
    pub op: EditOp,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

pub fn parse_script(text: &[u8]) -> Result<Vec<ScriptLine>, ParseError> {
    let mut ops = Vec::new();
    for (k, raw) in text.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let fields: Vec<&[u8]> = raw
            .split(|b| b.is_ascii_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.is_empty() {
            continue;
        }
        let line = k + 1;
        let op = parse_op(&fields).map_err(|reason| ParseError { line, reason })?;
        ops.push(ScriptLine { line, op });
    }
    Ok(ops)
}

fn parse_op(fields: &[&[u8]]) -> Result<EditOp, String> {
    let verb = fields[0];
    let arity = match verb {
        b"A" | b"D" => 1,
        b"X" | b"R" | b"I" => 2,
        _ => return Err(format!("unknown verb {:?}", String::from_utf8_lossy(verb))),
    };
    if fields.len() != arity + 1 {
        return Err(format!(
            "{} takes {arity} argument(s), got {}",
            String::from_utf8_lossy(verb),
            fields.len() - 1
        ));
    }
    let i = parse_position(fields[1])?;
    Ok(match verb {
        b"A" => EditOp::Access(i),
        b"D" => EditOp::Delete(i),
        b"X" => EditOp::Extract(i, parse_position(fields[2])?),
        b"R" => EditOp::Replace(i, parse_byte(fields[2])?),
        _ => EditOp::Insert(i, parse_byte(fields[2])?),
    })
}

fn parse_position(field: &[u8]) -> Result<usize, String> {
    std::str::from_utf8(field)
        .ok()
        .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad number {:?}", String::from_utf8_lossy(field)))
}

fn parse_byte(field: &[u8]) -> Result<u8, String> {
    match field {
        [b] => Ok(*b),
        [b'\\', b'x', hex @ ..] if hex.len() == 2 => std::str::from_utf8(hex)
            .ok()
            .and_then(|h| u8::from_str_radix(h, 16).ok())
            .ok_or_else(|| format!("bad escape {:?}", String::from_utf8_lossy(field))),
        _ => Err(format!("bad character {:?}", String::from_utf8_lossy(field))),
    }
}

/// Prints bytes with everything outside printable ASCII, and the backslash,
/// as `\xHH`.
pub fn escape_bytes(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        if (0x21..0x7f).contains(&b) && b != b'\\' {
            out.push(b as char);
        } else {
            out.push_str(&format!("\\x{b:02x}"));
        }
    }
    out
}

/// Renders an op in script syntax.
pub fn format_op(op: &EditOp) -> String {
    match *op {
        EditOp::Access(i) => format!("A {i}"),
        EditOp::Extract(i, l) => format!("X {i} {l}"),
        EditOp::Replace(i, c) => format!("R {i} {}", escape_bytes(&[c])),
        EditOp::Insert(i, c) => format!("I {i} {}", escape_bytes(&[c])),
        EditOp::Delete(i) => format!("D {i}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_verb() {
        let ops = parse_script(b"A 1\nX 2 3\n\nR 4 x\r\nI 5 \\x20\nD 6\n").unwrap();
        let got: Vec<(usize, EditOp)> = ops.iter().map(|l| (l.line, l.op)).collect();
        assert_eq!(
            got,
            vec![
                (1, EditOp::Access(1)),
                (2, EditOp::Extract(2, 3)),
                (4, EditOp::Replace(4, b'x')),
                (5, EditOp::Insert(5, b' ')),
                (6, EditOp::Delete(6)),
            ]
        );
    }

    #[test]
    fn rejects_with_line_numbers() {
        assert_eq!(parse_script(b"A 1\nQ 2").unwrap_err().line, 2);
        assert_eq!(parse_script(b"R 1 xy").unwrap_err().line, 1);
        assert_eq!(parse_script(b"\n\nA -1").unwrap_err().line, 3);
        assert_eq!(parse_script(b"D").unwrap_err().line, 1);
        assert_eq!(parse_script(b"I 1 \\xzz").unwrap_err().line, 1);
    }

    #[test]
    fn format_round_trips() {
        for op in [EditOp::Replace(3, b'\n'), EditOp::Insert(1, b'\\'), EditOp::Extract(2, 9)] {
            let text = format_op(&op);
            assert_eq!(parse_script(text.as_bytes()).unwrap()[0].op, op);
        }
        assert_eq!(escape_bytes(b"a b\x01"), "a\\x20b\\x01");
    }
}
