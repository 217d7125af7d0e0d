use proptest::prelude::*;

use rtsl_core::doc::{classify_tag, normalize_key, parse_document, serialize_document, DocNode, Keyword};
use rtsl_core::fixtures::{fixtures, Outcome};

fn word() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9_]{0,7}"
}

fn tag() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..3).prop_map(|w| w.join(" "))
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..5000).prop_map(|n| n.to_string()),
        (0u32..100, 0u32..100).prop_map(|(a, b)| format!("{a}-{b}")),
        (0u32..100).prop_map(|n| format!("{n}%")),
        prop::collection::vec(word(), 1..3).prop_map(|w| w.join(" ")),
    ]
}

fn leaf() -> impl Strategy<Value = DocNode> {
    prop_oneof![
        tag().prop_map(DocNode::new),
        (tag(), text()).prop_map(|(t, x)| DocNode::with_text(t, x)),
        (tag(), text(), word()).prop_map(|(t, x, c)| {
            let mut n = DocNode::with_text(t, x);
            n.condition_suffix = Some(c);
            n
        }),
    ]
}

fn node() -> impl Strategy<Value = DocNode> {
    leaf().prop_recursive(4, 40, 5, |inner| {
        (tag(), prop::collection::vec(inner, 1..5))
            .prop_map(|(t, kids)| DocNode::with_children(t, kids))
    })
}

fn document() -> impl Strategy<Value = DocNode> {
    prop::collection::vec(node(), 0..4).prop_map(DocNode::root)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn serialize_then_parse_is_identity(doc in document()) {
        let text = serialize_document(&doc);
        let again = parse_document(&text).unwrap();
        prop_assert_eq!(&again, &doc);
        prop_assert_eq!(serialize_document(&again), text);
    }

    #[test]
    fn classification_is_total(t in "[ -~]{1,20}") {
        let kw = classify_tag(&t);
        if let Keyword::GameSpecific(name) = &kw {
            prop_assert_eq!(name, &t);
            prop_assert!(Keyword::RESERVED
                .iter()
                .all(|r| normalize_key(r.canonical()) != normalize_key(&t)));
        }
    }

    #[test]
    fn reserved_names_win_over_game_specific(
        idx in 0..Keyword::RESERVED.len(),
        upper in prop::collection::vec(any::<bool>(), 16),
        pad in 0usize..3,
    ) {
        let kw = &Keyword::RESERVED[idx];
        prop_assume!(*kw != Keyword::Coordinate);
        let spelled: String = kw
            .canonical()
            .chars()
            .zip(upper.iter().cycle())
            .map(|(c, &u)| if u { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() })
            .collect();
        let spelled = format!("{}{spelled}{}", " ".repeat(pad), " ".repeat(pad));
        prop_assert_eq!(&classify_tag(&spelled), kw);
    }
}

fn corpus() -> Vec<(String, &'static str)> {
    fixtures()
        .iter()
        .filter(|f| f.expect != Outcome::ParseError)
        .map(|f| (f.id.clone(), f.source))
        .collect()
}

#[test]
fn injected_tag_is_located() {
    for (id, src) in corpus() {
        let lines: Vec<&str> = src.lines().collect();
        for at in 0..=lines.len() {
            for injected in ["<Injected Tag>", "</Injected Tag>"] {
                let mut edited: Vec<&str> = lines.clone();
                edited.insert(at, injected);
                let err = parse_document(&edited.join("\n")).expect_err(&id);
                assert_eq!(err.kind(), "UnbalancedTag", "{id} line {at}");
                let span = err.span();
                let line = at as u32 + 1;
                assert_eq!(
                    (span.start_line, span.start_col, span.end_line, span.end_col),
                    (line, 1, line, injected.chars().count() as u32),
                    "{id} line {at} {injected}"
                );
            }
        }
    }
}

#[test]
fn child_spans_nest() {
    fn check(n: &DocNode) {
        for c in &n.children {
            assert!(n.span.contains(&c.span), "{} {} / {} {}", n.tag, n.span, c.tag, c.span);
            check(c);
        }
    }
    for (_, src) in corpus() {
        check(&parse_document(src).unwrap());
    }
}
