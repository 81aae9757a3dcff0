//! Line-oriented N-Triples reader and writer.
//!
//! Supports IRIs, blank node labels, and literals with an optional datatype
//! or language tag. Gzip input is detected from its magic bytes.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::model::{GraphBuilder, Label, Literal, NodeId, Origin, TripleGraph};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } => Some(*line),
            ParseError::Io(_) => None,
        }
    }
}

pub fn parse_file(path: &Path, origin: Origin) -> Result<TripleGraph, ParseError> {
    parse_reader(File::open(path)?, origin)
}

/// Parses N-Triples from any reader, transparently inflating gzip data.
pub fn parse_reader<R: Read>(reader: R, origin: Origin) -> Result<TripleGraph, ParseError> {
    let mut buf = BufReader::new(reader);
    let gz = {
        let head = buf.fill_buf()?;
        head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b
    };
    if gz {
        parse_lines(BufReader::new(MultiGzDecoder::new(buf)), origin)
    } else {
        parse_lines(buf, origin)
    }
}

pub fn parse_str(text: &str, origin: Origin) -> Result<TripleGraph, ParseError> {
    parse_lines(text.as_bytes(), origin)
}

fn parse_lines<R: BufRead>(mut reader: R, origin: Origin) -> Result<TripleGraph, ParseError> {
    let mut builder = GraphBuilder::new(origin);
    let mut blanks: FxHashMap<String, NodeId> = FxHashMap::default();
    let mut line = String::new();
    let mut lineno = 0;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        lineno += 1;
        let mut cur = Cursor { s: line.as_bytes(), pos: 0, line: lineno };
        cur.skip_ws();
        if cur.at_end() || cur.peek() == Some(b'#') {
            continue;
        }
        let s = cur.term()?;
        let p = cur.term()?;
        let o = cur.term()?;
        cur.skip_ws();
        if cur.peek() != Some(b'.') {
            return Err(cur.err("expected '.' after object"));
        }
        cur.pos += 1;
        cur.skip_ws();
        if !cur.at_end() && cur.peek() != Some(b'#') {
            return Err(cur.err("unexpected text after '.'"));
        }
        match s {
            Term::Literal(_) => return Err(cur.err("literal in subject position")),
            _ => {}
        }
        match p {
            Term::Literal(_) => return Err(cur.err("literal in predicate position")),
            Term::Blank(_) => return Err(cur.err("blank node in predicate position")),
            Term::Iri(_) => {}
        }
        let mut resolve = |t: Term| match t {
            Term::Iri(i) => builder.node(Label::Uri(i)),
            Term::Literal(l) => builder.node(Label::Literal(l)),
            Term::Blank(name) => *blanks.entry(name).or_insert_with(|| builder.add_blank()),
        };
        let (s, p, o) = (resolve(s), resolve(p), resolve(o));
        builder.triple(s, p, o);
    }
    Ok(builder.build())
}

enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
}

impl Cursor<'_> {
    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax { line: self.line, message: message.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'<') => {
                self.pos += 1;
                Ok(Term::Iri(self.iri_body()?))
            }
            Some(b'_') => {
                if self.s.get(self.pos + 1) != Some(&b':') {
                    return Err(self.err("malformed blank node label"));
                }
                self.pos += 2;
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_whitespace() || c == b'.' && self.is_terminal_dot() {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.err("empty blank node label"));
                }
                Ok(Term::Blank(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()))
            }
            Some(b'"') => {
                self.pos += 1;
                let lexical = self.literal_body()?;
                let suffix = match self.peek() {
                    Some(b'@') => {
                        let start = self.pos;
                        self.pos += 1;
                        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'-') {
                            self.pos += 1;
                        }
                        if self.pos == start + 1 {
                            return Err(self.err("empty language tag"));
                        }
                        Some(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
                    }
                    Some(b'^') => {
                        if self.s.get(self.pos + 1) != Some(&b'^') || self.s.get(self.pos + 2) != Some(&b'<') {
                            return Err(self.err("malformed datatype"));
                        }
                        self.pos += 3;
                        Some(format!("^^<{}>", self.iri_body()?))
                    }
                    _ => None,
                };
                Ok(Term::Literal(Literal { lexical, suffix }))
            }
            Some(_) => Err(self.err("expected IRI, blank node or literal")),
            None => Err(self.err("unexpected end of line")),
        }
    }

    // A '.' ends a blank label only when nothing but whitespace or a comment follows.
    fn is_terminal_dot(&self) -> bool {
        let rest = &self.s[self.pos + 1..];
        rest.iter()
            .find(|c| !c.is_ascii_whitespace())
            .map_or(true, |&c| c == b'#')
    }

    fn iri_body(&mut self) -> Result<String, ParseError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated IRI")),
                Some(b'>') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let c = self.unicode_escape()?;
                    let mut tmp = [0u8; 4];
                    out.extend_from_slice(c.encode_utf8(&mut tmp).as_bytes());
                }
                Some(c) => {
                    if c == b' ' || c == b'<' || c == b'"' {
                        return Err(self.err("invalid character in IRI"));
                    }
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).map_err(|_| self.err("IRI is not valid UTF-8"))
    }

    fn literal_body(&mut self) -> Result<String, ParseError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None | Some(b'\n') => return Err(self.err("unterminated literal")),
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let simple = match self.peek() {
                        Some(b'\\') => Some(b'\\'),
                        Some(b'"') => Some(b'"'),
                        Some(b'\'') => Some(b'\''),
                        Some(b'n') => Some(b'\n'),
                        Some(b't') => Some(b'\t'),
                        Some(b'r') => Some(b'\r'),
                        Some(b'b') => Some(0x08),
                        Some(b'f') => Some(0x0c),
                        _ => None,
                    };
                    match simple {
                        Some(b) => {
                            out.push(b);
                            self.pos += 1;
                        }
                        None => {
                            let c = self.unicode_escape()?;
                            let mut tmp = [0u8; 4];
                            out.extend_from_slice(c.encode_utf8(&mut tmp).as_bytes());
                        }
                    }
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).map_err(|_| self.err("literal is not valid UTF-8"))
    }

    // Expects the cursor on the 'u' or 'U' following a backslash.
    fn unicode_escape(&mut self) -> Result<char, ParseError> {
        let width = match self.peek() {
            Some(b'u') => 4,
            Some(b'U') => 8,
            _ => return Err(self.err("invalid escape sequence")),
        };
        self.pos += 1;
        let digits = self
            .s
            .get(self.pos..self.pos + width)
            .ok_or_else(|| self.err("truncated unicode escape"))?;
        let hex = std::str::from_utf8(digits).map_err(|_| self.err("invalid unicode escape"))?;
        let code = u32::from_str_radix(hex, 16).map_err(|_| self.err("invalid unicode escape"))?;
        self.pos += width;
        char::from_u32(code).ok_or_else(|| self.err("escape is not a unicode scalar value"))
    }
}

fn escape_literal(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
}

fn escape_iri(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '>' | '<' | '"' | ' ' | '\\' => out.push_str(&format!("\\u{:04X}", c as u32)),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
}

/// Text form of a node as it appears in N-Triples. Blank nodes are named
/// `_:b<id>` after their node id.
pub fn term_text(g: &TripleGraph, n: NodeId) -> String {
    let mut out = String::new();
    match g.label(n) {
        Label::Uri(u) => {
            out.push('<');
            escape_iri(u, &mut out);
            out.push('>');
        }
        Label::Literal(l) => {
            out.push('"');
            escape_literal(&l.lexical, &mut out);
            out.push('"');
            if let Some(s) = &l.suffix {
                out.push_str(s);
            }
        }
        Label::Blank => out.push_str(&format!("_:b{}", n.0)),
    }
    out
}

/// Writes every triple in insertion order.
pub fn write_graph<W: Write>(g: &TripleGraph, mut w: W) -> io::Result<()> {
    let mut line = String::new();
    for t in g.triples() {
        line.clear();
        line.push_str(&term_text(g, t.subject));
        line.push(' ');
        line.push_str(&term_text(g, t.predicate));
        line.push(' ');
        line.push_str(&term_text(g, t.object));
        line.push_str(" .\n");
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub fn to_string(g: &TripleGraph) -> String {
    let mut buf = Vec::new();
    write_graph(g, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serializer emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_triples() {
        let text = "# header\n<http://a> <http://p> \"x y\" .\n_:b1 <http://p> <http://a> . # trailing\n\n";
        let g = parse_str(text, Origin::Source).unwrap();
        assert_eq!(g.triple_count(), 2);
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.kind_counts(None), (2, 1, 1));
    }

    #[test]
    fn blank_labels_are_file_local() {
        let text = "_:x <p> _:y .\n_:y <p> _:x .\n";
        let g = parse_str(text, Origin::Source).unwrap();
        assert_eq!(g.kind_counts(None).2, 2);
        assert_eq!(g.triple_count(), 2);
    }

    #[test]
    fn escapes_round_trip() {
        let text = "<s> <p> \"a\\\\b\\\"c\\nd\\te\\rf\\u00e9\" .\n";
        let g = parse_str(text, Origin::Source).unwrap();
        let lit = g.nodes().find(|&n| g.is_literal(n)).unwrap();
        assert_eq!(*g.label(lit), Label::literal("a\\b\"c\nd\te\rf\u{e9}"));
        let again = parse_str(&to_string(&g), Origin::Source).unwrap();
        assert_eq!(again.label(lit), g.label(lit));
    }

    #[test]
    fn language_and_datatype_are_part_of_the_label() {
        let text = "<s> <p> \"5\"^^<http://int> .\n<s> <p> \"5\"@en .\n<s> <p> \"5\" .\n";
        let g = parse_str(text, Origin::Source).unwrap();
        assert_eq!(g.kind_counts(None).1, 3);
        let again = parse_str(&to_string(&g), Origin::Source).unwrap();
        assert_eq!(again.labels(), g.labels());
    }

    #[test]
    fn literal_subject_reports_line() {
        let err = parse_str("<s> <p> <o> .\n\"lit\" <p> <o> .\n", Origin::Source).unwrap_err();
        assert_eq!(err.line(), Some(2));
    }

    #[test]
    fn blank_predicate_is_rejected() {
        let err = parse_str("<s> _:p <o> .\n", Origin::Source).unwrap_err();
        assert!(err.to_string().contains("predicate"));
    }

    #[test]
    fn missing_dot_is_rejected() {
        assert!(parse_str("<s> <p> <o>\n", Origin::Source).is_err());
        assert!(parse_str("<s> <p> \"open .\n", Origin::Source).is_err());
    }

    #[test]
    fn blank_label_before_dot_without_space() {
        let g = parse_str("<s> <p> _:b1.\n", Origin::Source).unwrap();
        assert_eq!(g.kind_counts(None).2, 1);
    }

    #[test]
    fn gzip_is_detected() {
        let text = "<s> <p> \"o\" .\n";
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        std::io::Write::write_all(&mut enc, text.as_bytes()).unwrap();
        let bytes = enc.finish().unwrap();
        let g = parse_reader(bytes.as_slice(), Origin::Source).unwrap();
        assert_eq!(g.triple_count(), 1);
    }

    #[test]
    fn duplicate_triples_collapse() {
        let g = parse_str("<s> <p> <o> .\n<s> <p> <o> .\n", Origin::Source).unwrap();
        assert_eq!(g.triple_count(), 1);
    }

    #[test]
    fn iri_escapes_round_trip() {
        let g = parse_str("<http://x/a\\u0020b> <p> <o> .\n", Origin::Source).unwrap();
        assert_eq!(*g.label(NodeId(0)), Label::uri("http://x/a b"));
        let again = parse_str(&to_string(&g), Origin::Source).unwrap();
        assert_eq!(again.labels(), g.labels());
    }
}
