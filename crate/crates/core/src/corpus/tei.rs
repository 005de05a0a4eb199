use std::collections::HashMap;

use roxmltree::{Document, Node};

use super::{DocMeta, HandScribe, IngestError, RawDocument, SegmentKind, TextSegment};

const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";

/// Elements that close a run of words.
const BLOCK_ELEMENTS: &[&str] = &[
    "p",
    "div",
    "head",
    "l",
    "lg",
    "ab",
    "opener",
    "closer",
    "salute",
    "signed",
    "dateline",
    "postscript",
    "address",
    "addrLine",
    "list",
    "item",
    "table",
    "row",
    "cell",
    "fw",
    "note",
    "lb",
    "pb",
    "cb",
];

/// Interpreted or structurally transparent without a warning.
const KNOWN_ELEMENTS: &[&str] = &[
    "TEI", "text", "body", "front", "back", "group", "add", "del", "note", "hi", "seg", "subst",
    "space",
];

/// Parses one TEI document. Text under `text/body` becomes segments; a
/// fragment whose root is not `TEI` is treated as the body itself.
pub fn parse_tei(xml: &[u8]) -> Result<RawDocument, IngestError> {
    let text = std::str::from_utf8(xml).map_err(|e| IngestError::MalformedXml(e.to_string()))?;
    let dom = Document::parse(text).map_err(|e| IngestError::MalformedXml(e.to_string()))?;
    let root = dom.root_element();

    let hands = collect_hands(&dom);
    let body = match dom
        .descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "body")
    {
        Some(b) => b,
        None if root.tag_name().name() != "TEI" => root,
        None => return Err(IngestError::MissingBody),
    };

    let mut walker = Walker {
        hands: &hands,
        segments: Vec::new(),
        warnings: Vec::new(),
        next_group: 0,
        block: 0,
    };
    walker.walk(body, &Context::default());

    Ok(RawDocument {
        doc_id: doc_id(&dom),
        meta: doc_meta(&dom),
        segments: walker.segments,
        warnings: walker.warnings,
    })
}

fn collect_hands(dom: &Document) -> HashMap<String, HandScribe> {
    dom.descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "handNote")
        .filter_map(|n| {
            let id = n.attribute((XML_NS, "id")).or_else(|| n.attribute("id"))?;
            Some((
                id.to_owned(),
                HandScribe::from_scribe_attr(n.attribute("scribe")),
            ))
        })
        .collect()
}

fn header<'a, 'input>(dom: &'a Document<'input>) -> Option<Node<'a, 'input>> {
    dom.descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "teiHeader")
}

fn text_of(node: Node) -> String {
    let raw: String = node
        .descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect();
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn find<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.descendants()
        .find(|n| n.is_element() && n.tag_name().name() == name)
}

fn corresp_action<'a, 'i>(header: Node<'a, 'i>, kind: &str) -> Option<Node<'a, 'i>> {
    header.descendants().find(|n| {
        n.is_element()
            && n.tag_name().name() == "correspAction"
            && n.attribute("type") == Some(kind)
    })
}

fn doc_id(dom: &Document) -> String {
    let root = dom.root_element();
    if let Some(id) = root.attribute((XML_NS, "id")) {
        return id.to_owned();
    }
    header(dom)
        .and_then(|h| find(h, "idno"))
        .map(text_of)
        .unwrap_or_default()
}

fn doc_meta(dom: &Document) -> DocMeta {
    let Some(header) = header(dom) else {
        return DocMeta::default();
    };
    let sent = corresp_action(header, "sent");
    let received = corresp_action(header, "received");

    let author = sent
        .and_then(|s| find(s, "persName"))
        .or_else(|| find(header, "titleStmt").and_then(|t| find(t, "author")))
        .map(text_of)
        .unwrap_or_default();
    let addressee = received.and_then(|r| find(r, "persName")).map(text_of);
    let date = sent
        .and_then(|s| find(s, "date"))
        .or_else(|| find(header, "date"))
        .and_then(|d| d.attribute("when").map(str::to_owned));

    DocMeta {
        author,
        addressee: addressee.filter(|a| !a.is_empty()),
        date,
    }
}

#[derive(Debug, Clone, Default)]
struct Context {
    kind: Option<SegmentKind>,
    hand_id: Option<String>,
    note_type: Option<String>,
    span_group: Option<usize>,
}

struct Walker<'h> {
    hands: &'h HashMap<String, HandScribe>,
    segments: Vec<TextSegment>,
    warnings: Vec<String>,
    next_group: usize,
    block: usize,
}

/// Tracks the most recent alteration sibling so a `del` directly followed
/// by an `add` (or the reverse) under one parent shares a span group.
#[derive(Default)]
struct SiblingGroup {
    group: Option<usize>,
    has_add: bool,
    has_del: bool,
}

impl Walker<'_> {
    fn walk(&mut self, node: Node, ctx: &Context) {
        let name = node.tag_name().name();
        let is_block = BLOCK_ELEMENTS.contains(&name);
        if !KNOWN_ELEMENTS.contains(&name) && !is_block {
            let w = format!("uninterpreted element <{name}>");
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
        let breaks = is_block && !(name == "lb" && node.attribute("break") == Some("no"));
        if breaks {
            self.block += 1;
        }

        let mut siblings = SiblingGroup::default();
        for child in node.children() {
            if child.is_text() {
                let text = child.text().unwrap_or_default();
                if !text.trim().is_empty() {
                    siblings = SiblingGroup::default();
                }
                self.push_text(text, ctx);
            } else if child.is_element() {
                let child_ctx = self.child_context(child, ctx, &mut siblings);
                self.walk(child, &child_ctx);
            }
        }

        if breaks {
            self.block += 1;
        }
    }

    fn child_context(
        &mut self,
        child: Node,
        ctx: &Context,
        siblings: &mut SiblingGroup,
    ) -> Context {
        let name = child.tag_name().name();
        let mut out = ctx.clone();
        if let Some(hand) = child.attribute("hand") {
            out.hand_id = Some(hand.trim_start_matches('#').to_owned());
        }

        match name {
            "note" if ctx.kind != Some(SegmentKind::Note) => {
                *siblings = SiblingGroup::default();
                out.kind = Some(SegmentKind::Note);
                out.note_type = child.attribute("type").map(str::to_owned);
                out.span_group = Some(self.new_group());
            }
            "add" | "del" if ctx.kind != Some(SegmentKind::Note) => {
                let is_add = name == "add";
                out.kind = Some(match (ctx.kind, is_add) {
                    (Some(SegmentKind::Deleted), _) | (_, false) => SegmentKind::Deleted,
                    _ => SegmentKind::Added,
                });
                if ctx.span_group.is_none() {
                    let joins = match siblings.group {
                        Some(_) if is_add => !siblings.has_add && siblings.has_del,
                        Some(_) => !siblings.has_del && siblings.has_add,
                        None => false,
                    };
                    if !joins {
                        *siblings = SiblingGroup {
                            group: Some(self.new_group()),
                            ..SiblingGroup::default()
                        };
                    }
                    if is_add {
                        siblings.has_add = true;
                    } else {
                        siblings.has_del = true;
                    }
                    out.span_group = siblings.group;
                }
            }
            // transparent containers keep a pending replacement open
            "subst" => {}
            _ => *siblings = SiblingGroup::default(),
        }
        out
    }

    fn new_group(&mut self) -> usize {
        let g = self.next_group;
        self.next_group += 1;
        g
    }

    fn push_text(&mut self, text: &str, ctx: &Context) {
        if text.is_empty() {
            return;
        }
        let kind = ctx.kind.unwrap_or(SegmentKind::Base);
        let hand_scribe = ctx
            .hand_id
            .as_ref()
            .map(|h| self.hands.get(h).copied().unwrap_or(HandScribe::Unknown));
        let (hand_id, hand_scribe) = if kind == SegmentKind::Base {
            (None, None)
        } else {
            (ctx.hand_id.clone(), hand_scribe)
        };
        if let Some(last) = self.segments.last_mut() {
            if last.kind == kind
                && last.hand_id == hand_id
                && last.note_type == ctx.note_type
                && last.span_group == ctx.span_group
                && last.block == self.block
            {
                last.text.push_str(text);
                return;
            }
        }
        self.segments.push(TextSegment {
            text: text.to_owned(),
            kind,
            hand_id,
            hand_scribe,
            note_type: if kind == SegmentKind::Note {
                ctx.note_type.clone()
            } else {
                None
            },
            span_group: ctx.span_group,
            block: self.block,
        });
    }
}
