"""Abstract syntax trees and their structure-based traversal (SBT) strings.

A snippet parses to a language-neutral tree of (node_type, optional value,
children). Serialization emits, per node, "(" label children ")" label, where
label is node_type alone or node_type + "_" + value for identifier/literal
leaves. The inverse parse exists so round-tripping is testable.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field

OPEN = "("
CLOSE = ")"
LABEL_SEP = "_"
WHITESPACE_GLYPH = "␣"  # replaces whitespace inside literal values
FALLBACK_TYPE = "Unparsed"


class SbtError(ValueError):
    """Malformed SBT token stream; carries the offending token index."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} at token index {index}")
        self.index = index


class TreeFileError(ValueError):
    pass


@dataclass
class AstNode:
    node_type: str
    value: str | None = None
    children: list["AstNode"] = field(default_factory=list)

    def count(self) -> int:
        return 1 + sum(c.count() for c in self.children)

    def to_dict(self) -> dict:
        return {"type": self.node_type, "value": self.value,
                "children": [c.to_dict() for c in self.children]}

    @classmethod
    def from_dict(cls, obj: dict) -> "AstNode":
        if not isinstance(obj, dict) or "type" not in obj:
            raise TreeFileError(f"tree object must have a 'type' field: {obj!r}")
        value = obj.get("value")
        if value is not None and not isinstance(value, str):
            raise TreeFileError(f"tree 'value' must be a string or null: {value!r}")
        return cls(node_type=obj["type"], value=value,
                   children=[cls.from_dict(c) for c in obj.get("children", [])])


# ---------------------------------------------------------------------------
# Snippet parsing (embedded Python backend)
# ---------------------------------------------------------------------------

def _mangle_type(name: str) -> str:
    # Labels split on the first "_", so node types must not contain one
    # (ast uses it only in match_case).
    if LABEL_SEP not in name:
        return name
    return "".join(part[:1].upper() + part[1:] for part in name.split(LABEL_SEP))


def _sanitize(value: str) -> str:
    return "".join(WHITESPACE_GLYPH if c.isspace() else c for c in value)


def _surface(node: ast.AST) -> str | None:
    """Identifier/literal surface form, for nodes that become leaves."""
    if isinstance(node, ast.Constant):
        return repr(node.value)
    parts = []
    for _, v in ast.iter_fields(node):
        if isinstance(v, str):
            parts.append(v)
        elif isinstance(v, list) and v and all(isinstance(e, str) for e in v):
            parts.extend(v)
    return ",".join(parts) if parts else None


def _convert(node: ast.AST) -> AstNode:
    children = []
    for _, v in ast.iter_fields(node):
        if isinstance(v, ast.AST):
            if not isinstance(v, ast.expr_context):
                children.append(_convert(v))
        elif isinstance(v, list):
            children.extend(_convert(e) for e in v if isinstance(e, ast.AST))
    value = None
    if not children:
        raw = _surface(node)
        if raw is not None:
            value = _sanitize(raw)
    return AstNode(_mangle_type(type(node).__name__), value, children)


def parse_snippet(code: str) -> AstNode:
    """Parse with the embedded Python grammar: expression mode first (typical
    for short snippets), then statement mode; unparseable code yields the
    single-node fallback tree so the sample stays usable."""
    for mode in ("eval", "exec"):
        try:
            return _convert(ast.parse(code, mode=mode))
        except SyntaxError:
            continue
        except (ValueError, RecursionError):
            break
    return AstNode(FALLBACK_TYPE)


# ---------------------------------------------------------------------------
# Pre-parsed tree ingestion (offline backend)
# ---------------------------------------------------------------------------

def load_tree_file(path) -> dict[int, AstNode]:
    with open(path, encoding="utf-8") as fh:
        try:
            records = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TreeFileError(f"invalid JSON in tree file {path}: {exc}") from exc
    if not isinstance(records, list):
        raise TreeFileError(f"tree file {path} must be a JSON array")
    trees = {}
    for rec in records:
        if not isinstance(rec, dict) or "id" not in rec or "tree" not in rec:
            raise TreeFileError(f"tree record must have 'id' and 'tree': {rec!r}")
        trees[int(rec["id"])] = AstNode.from_dict(rec["tree"])
    return trees


def tree_for_sample(trees: dict[int, AstNode], sample_id: int) -> AstNode:
    if sample_id not in trees:
        raise TreeFileError(f"tree file has no entry for sample id {sample_id}")
    return trees[sample_id]


# ---------------------------------------------------------------------------
# SBT serialization and its inverse
# ---------------------------------------------------------------------------

def _label(node: AstNode) -> str:
    if node.value is None:
        return node.node_type
    return node.node_type + LABEL_SEP + node.value


def sbt_serialize(tree: AstNode) -> list[str]:
    tokens: list[str] = []
    stack: list[tuple[AstNode, bool]] = [(tree, False)]
    while stack:
        node, closing = stack.pop()
        label = _label(node)
        if closing:
            tokens.extend((CLOSE, label))
        else:
            tokens.extend((OPEN, label))
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(node.children))
    return tokens


def _split_label(label: str) -> tuple[str, str | None]:
    node_type, sep, value = label.partition(LABEL_SEP)
    return node_type, (value if sep else None)


def sbt_parse(tokens: list[str]) -> AstNode:
    def parse_node(pos: int) -> tuple[AstNode, int]:
        if pos >= len(tokens) or tokens[pos] != OPEN:
            raise SbtError("expected '('", pos)
        if pos + 1 >= len(tokens) or tokens[pos + 1] in (OPEN, CLOSE):
            raise SbtError("expected a node label", pos + 1)
        label = tokens[pos + 1]
        pos += 2
        children = []
        while pos < len(tokens) and tokens[pos] != CLOSE:
            child, pos = parse_node(pos)
            children.append(child)
        if pos >= len(tokens):
            raise SbtError("unbalanced SBT string, missing ')'", pos)
        pos += 1
        if pos >= len(tokens) or tokens[pos] != label:
            raise SbtError(f"close label mismatch, expected {label!r}", pos)
        node_type, value = _split_label(label)
        return AstNode(node_type, value, children), pos + 1

    tree, end = parse_node(0)
    if end != len(tokens):
        raise SbtError("trailing tokens after complete tree", end)
    return tree


def sbt_string(code: str) -> str:
    """Snippet → whitespace-joined SBT tokens, ready for subword encoding."""
    return " ".join(sbt_serialize(parse_snippet(code)))
