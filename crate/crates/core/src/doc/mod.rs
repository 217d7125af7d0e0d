//! The RTSL textual dialect: a forgiving XML-like tree format.
//!
//! Tag names may contain letters, digits, spaces, commas, parentheses,
//! periods, underscores and hyphens. Open/close matching ignores case and
//! whitespace, so `<Build Speed>` is closed by `</ Build Speed>`. Bare words
//! on their own lines become empty child nodes, and the only accepted mixed
//! content is the conditional terrain form `<Wood>300</Wood>/Ground`.

mod keyword;
mod parser;
mod serialize;

use std::fmt;

pub use keyword::{classify_tag, normalize_key, Keyword};
pub use parser::{parse_coordinate_tag, parse_document, CoordinateError, ParseError};
pub use serialize::serialize_document;

/// 1-based, inclusive source range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        Self {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }

    /// True when `other` lies inside `self` (bounds inclusive).
    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.start() <= other.start() && other.end() <= self.end()
    }
}

impl Default for SourceSpan {
    fn default() -> Self {
        Self::new(1, 1, 1, 1)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}-{}:{}",
            self.start_line, self.start_col, self.end_line, self.end_col
        )
    }
}

/// A node of the parsed document tree.
///
/// Equality is structural: spans are ignored.
#[derive(Debug, Clone, Default)]
pub struct DocNode {
    pub tag: String,
    pub text: Option<String>,
    pub children: Vec<DocNode>,
    /// `Snow` in `<Wood>300</Wood>/Snow`.
    pub condition_suffix: Option<String>,
    pub span: SourceSpan,
}

impl PartialEq for DocNode {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag
            && self.text == other.text
            && self.condition_suffix == other.condition_suffix
            && self.children == other.children
    }
}

impl Eq for DocNode {}

impl DocNode {
    pub fn new(tag: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            ..Self::default()
        }
    }

    pub fn with_text(tag: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            text: Some(text.into()),
            ..Self::default()
        }
    }

    pub fn with_children(tag: impl Into<String>, children: Vec<DocNode>) -> Self {
        Self {
            tag: tag.into(),
            children,
            ..Self::default()
        }
    }

    /// Synthetic document root.
    pub fn root(children: Vec<DocNode>) -> Self {
        Self::with_children("", children)
    }

    pub fn push(&mut self, child: DocNode) -> &mut Self {
        self.children.push(child);
        self
    }

    pub fn keyword(&self) -> Keyword {
        classify_tag(&self.tag)
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_none() && self.children.is_empty() && self.condition_suffix.is_none()
    }

    /// First child classified as `kw`.
    pub fn child(&self, kw: Keyword) -> Option<&DocNode> {
        self.children.iter().find(|c| c.keyword() == kw)
    }

    /// First child whose tag matches `tag` case- and whitespace-insensitively.
    pub fn child_named(&self, tag: &str) -> Option<&DocNode> {
        let key = normalize_key(tag);
        self.children.iter().find(|c| normalize_key(&c.tag) == key)
    }

    /// Depth-first iterator over this node and all descendants.
    pub fn walk(&self) -> impl Iterator<Item = &DocNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}
