use thiserror::Error;

use super::{normalize_key, DocNode, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// A close tag without a matching open tag, or an open tag never closed.
    /// The span points at the offending tag.
    #[error("unbalanced tag `{tag}` at {span}")]
    UnbalancedTag { tag: String, span: SourceSpan },
    #[error("unterminated tag at {span}")]
    UnterminatedTag { span: SourceSpan },
    #[error("empty tag name at {span}")]
    EmptyTagName { span: SourceSpan },
    #[error("invalid character {ch:?} in tag name at {span}")]
    InvalidTagName { ch: char, span: SourceSpan },
    #[error("missing terrain label after `/` at {span}")]
    EmptyCondition { span: SourceSpan },
}

impl ParseError {
    /// Variant name, e.g. `UnbalancedTag`.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::UnbalancedTag { .. } => "UnbalancedTag",
            ParseError::UnterminatedTag { .. } => "UnterminatedTag",
            ParseError::EmptyTagName { .. } => "EmptyTagName",
            ParseError::InvalidTagName { .. } => "InvalidTagName",
            ParseError::EmptyCondition { .. } => "EmptyCondition",
        }
    }

    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::UnbalancedTag { span, .. }
            | ParseError::UnterminatedTag { span }
            | ParseError::EmptyTagName { span }
            | ParseError::InvalidTagName { span, .. }
            | ParseError::EmptyCondition { span } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed coordinate tag `{0}`")]
pub struct CoordinateError(pub String);

/// Recognises `x,y` and `(x,y)` cell tags.
///
/// Returns `Ok(None)` for tags that are not coordinates at all (`Terrain`,
/// `X,Y`) and an error for tags that are clearly meant as coordinates but do
/// not hold two integers (`(1,a)`, `3,b`).
pub fn parse_coordinate_tag(tag: &str) -> Result<Option<(i64, i64)>, CoordinateError> {
    let trimmed = tag.trim();
    let (inner, parenthesised) = match trimmed
        .strip_prefix('(')
        .and_then(|rest| rest.strip_suffix(')'))
    {
        Some(inner) => (inner, true),
        None => (trimmed, false),
    };
    let mut parts = inner.split(',');
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        if parenthesised && inner.contains(',') {
            return Err(CoordinateError(tag.to_string()));
        }
        return Ok(None);
    };
    let x = a.trim().parse::<i64>();
    let y = b.trim().parse::<i64>();
    match (x, y) {
        (Ok(x), Ok(y)) => Ok(Some((x, y))),
        (Err(_), Err(_)) if !parenthesised => Ok(None),
        _ => Err(CoordinateError(tag.to_string())),
    }
}

#[derive(Clone, Copy)]
struct Located {
    ch: char,
    line: u32,
    col: u32,
}

enum Item {
    Element(DocNode),
    /// Raw character data and the index of its first character.
    Text(usize, usize),
}

struct Frame {
    tag: String,
    open_span: SourceSpan,
    items: Vec<Item>,
}

struct Parser {
    chars: Vec<Located>,
    pos: usize,
}

fn is_tag_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, ' ' | '\t' | ',' | '(' | ')' | '.' | '_' | '-')
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses RTSL source into a synthetic root whose children are the
/// top-level elements. All-or-nothing: any error discards the tree.
pub fn parse_document(source: &str) -> Result<DocNode, ParseError> {
    let mut line = 1;
    let mut col = 1;
    let chars = source
        .chars()
        .map(|ch| {
            let loc = Located { ch, line, col };
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            loc
        })
        .collect();
    Parser { chars, pos: 0 }.run()
}

impl Parser {
    fn span_of(&self, start: usize, end: usize) -> SourceSpan {
        let a = self.loc(start);
        let b = self.loc(end);
        SourceSpan::new(a.0, a.1, b.0, b.1)
    }

    fn loc(&self, idx: usize) -> (u32, u32) {
        match self.chars.get(idx) {
            Some(c) => (c.line, c.col),
            None => match self.chars.last() {
                Some(c) if c.ch == '\n' => (c.line + 1, 1),
                Some(c) => (c.line, c.col + 1),
                None => (1, 1),
            },
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.ch)
    }

    fn run(mut self) -> Result<DocNode, ParseError> {
        let mut stack = vec![Frame {
            tag: String::new(),
            open_span: SourceSpan::default(),
            items: Vec::new(),
        }];

        while let Some(c) = self.peek() {
            if c != '<' {
                let start = self.pos;
                while self.peek().is_some_and(|c| c != '<') {
                    self.pos += 1;
                }
                stack
                    .last_mut()
                    .expect("root frame")
                    .items
                    .push(Item::Text(start, self.pos));
                continue;
            }

            let (name, closing, start, end) = self.read_tag()?;
            let tag_span = self.span_of(start, end);
            if !closing {
                stack.push(Frame {
                    tag: name,
                    open_span: tag_span,
                    items: Vec::new(),
                });
                continue;
            }

            let key = normalize_key(&name);
            if stack.len() == 1 {
                return Err(ParseError::UnbalancedTag {
                    tag: name,
                    span: tag_span,
                });
            }
            let top = stack.last().expect("non-root frame");
            if normalize_key(&top.tag) != key {
                let deeper_match = stack[1..stack.len() - 1]
                    .iter()
                    .any(|f| normalize_key(&f.tag) == key);
                return Err(if deeper_match {
                    ParseError::UnbalancedTag {
                        tag: top.tag.clone(),
                        span: top.open_span,
                    }
                } else {
                    ParseError::UnbalancedTag {
                        tag: name,
                        span: tag_span,
                    }
                });
            }

            let frame = stack.pop().expect("non-root frame");
            let mut node_end = end;
            let suffix = if self.peek() == Some('/') {
                let slash = self.pos;
                self.pos += 1;
                let label_start = self.pos;
                while self.peek().is_some_and(|c| c != '<' && c != '\n') {
                    self.pos += 1;
                }
                let label: String = self.chars[label_start..self.pos]
                    .iter()
                    .map(|c| c.ch)
                    .collect();
                let label = collapse_whitespace(&label);
                if label.is_empty() {
                    return Err(ParseError::EmptyCondition {
                        span: self.span_of(slash, slash),
                    });
                }
                node_end = self.last_non_ws(label_start, self.pos).unwrap_or(slash);
                Some(label)
            } else {
                None
            };
            let span = SourceSpan::new(
                frame.open_span.start_line,
                frame.open_span.start_col,
                self.loc(node_end).0,
                self.loc(node_end).1,
            );
            let mut node = self.finish(frame.tag, frame.items, false);
            node.condition_suffix = suffix;
            node.span = span;
            stack
                .last_mut()
                .expect("parent frame")
                .items
                .push(Item::Element(node));
        }

        if stack.len() > 1 {
            let top = stack.pop().expect("unclosed frame");
            return Err(ParseError::UnbalancedTag {
                tag: top.tag,
                span: top.open_span,
            });
        }
        let root = stack.pop().expect("root frame");
        let mut node = self.finish(String::new(), root.items, true);
        let end = if self.chars.is_empty() {
            (1, 1)
        } else {
            self.loc(self.chars.len() - 1)
        };
        node.span = SourceSpan::new(1, 1, end.0, end.1);
        Ok(node)
    }

    fn last_non_ws(&self, from: usize, to: usize) -> Option<usize> {
        (from..to).rev().find(|&i| !self.chars[i].ch.is_whitespace())
    }

    /// Reads `<name>` or `</name>` starting at the current `<`.
    fn read_tag(&mut self) -> Result<(String, bool, usize, usize), ParseError> {
        let start = self.pos;
        self.pos += 1;
        while self.peek().is_some_and(|c| c == ' ' || c == '\t') {
            self.pos += 1;
        }
        let closing = self.peek() == Some('/');
        if closing {
            self.pos += 1;
        }
        let name_start = self.pos;
        loop {
            match self.peek() {
                None | Some('<') | Some('\n') | Some('\r') => {
                    let end = self.pos.saturating_sub(1).max(start);
                    return Err(ParseError::UnterminatedTag {
                        span: self.span_of(start, end),
                    });
                }
                Some('>') => break,
                Some(c) if is_tag_char(c) => self.pos += 1,
                Some(c) => {
                    return Err(ParseError::InvalidTagName {
                        ch: c,
                        span: self.span_of(start, self.pos),
                    })
                }
            }
        }
        let raw: String = self.chars[name_start..self.pos]
            .iter()
            .map(|c| c.ch)
            .collect();
        let end = self.pos;
        self.pos += 1;
        let name = collapse_whitespace(&raw);
        if name.is_empty() {
            return Err(ParseError::EmptyTagName {
                span: self.span_of(start, end),
            });
        }
        Ok((name, closing, start, end))
    }

    /// Builds the node for a closed element (or the root) from its content.
    fn finish(&self, tag: String, items: Vec<Item>, is_root: bool) -> DocNode {
        let has_elements = items.iter().any(|i| matches!(i, Item::Element(_)));
        let list_mode = is_root
            || has_elements
            || items.iter().any(|i| match i {
                Item::Text(a, b) => self.chars[*a..*b].iter().any(|c| c.ch == '\n'),
                Item::Element(_) => false,
            });

        let mut node = DocNode::new(tag);
        if !list_mode {
            if let Some(Item::Text(a, b)) = items.first() {
                let text: String = self.chars[*a..*b].iter().map(|c| c.ch).collect();
                let text = text.trim();
                if !text.is_empty() {
                    node.text = Some(text.to_string());
                }
            }
            return node;
        }

        for item in items {
            match item {
                Item::Element(child) => node.children.push(child),
                Item::Text(a, b) => self.push_bare_words(&mut node, a, b),
            }
        }
        node
    }

    /// Each non-blank line of a text run becomes an empty child node.
    fn push_bare_words(&self, node: &mut DocNode, a: usize, b: usize) {
        let mut line_start = a;
        for i in a..=b {
            if i == b || self.chars[i].ch == '\n' {
                let first = (line_start..i).find(|&j| !self.chars[j].ch.is_whitespace());
                if let (Some(first), Some(last)) = (first, self.last_non_ws(line_start, i)) {
                    let word: String = self.chars[first..=last].iter().map(|c| c.ch).collect();
                    let mut child = DocNode::new(collapse_whitespace(&word));
                    child.span = self.span_of(first, last);
                    node.children.push(child);
                }
                line_start = i + 1;
            }
        }
    }
}
