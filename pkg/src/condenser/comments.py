"""Elicit change-relevant comments and annotation changes.

Comments are surfaced when they were added or removed between versions, or
when they document an entity the structural diff touches (origin=context).
Each elicited comment gets exactly one category, assigned by first match in
the fixed priority order license > todo > javadoc > general.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from condenser.changeset import StructuralDiff
from condenser.javafacts import CommentFacts, SourceFacts

__all__ = [
    "ElicitedAnnotation",
    "ElicitedComment",
    "categorize_comment",
    "elicit_annotations",
    "elicit_comments",
    "normalize_comment_text",
]

JAVADOC_MIN_TOKENS = 20  # strict: a javadoc-category comment has more than this


@dataclass(frozen=True)
class ElicitedComment:
    category: str  # javadoc | license | todo | general
    text: str
    origin: str  # added | removed | context
    attachment: str


@dataclass(frozen=True)
class ElicitedAnnotation:
    name: str
    argument_text: str | None
    target: str
    origin: str  # added | removed


_GUTTER = re.compile(r"^\s*\*+ ?", re.MULTILINE)


def normalize_comment_text(text: str) -> str:
    """Strip javadoc '*' gutters and collapse whitespace to single spaces."""
    return re.sub(r"\s+", " ", _GUTTER.sub("", text)).strip()


def categorize_comment(comment: CommentFacts) -> str:
    lowered = comment.text.lower()
    if "license" in lowered:
        return "license"
    if "todo" in lowered:
        return "todo"
    if comment.kind in ("javadoc", "block") and comment.token_count > JAVADOC_MIN_TOKENS:
        return "javadoc"
    return "general"


def _comment_key(comment: CommentFacts) -> tuple[str, str]:
    return (normalize_comment_text(comment.text), comment.attachment)


def _touched_attachments(diff: StructuralDiff) -> set[str]:
    """Attachment strings for entities the diff records touch."""
    touched: set[str] = set()
    for fd in diff.files:
        for name in fd.class_added + fd.class_removed:
            touched.add(f"class:{name}")
        for old_name, new_name in fd.class_renamed:
            touched.add(f"class:{old_name}")
            touched.add(f"class:{new_name}")
        for cname, m in list(fd.method_added) + list(fd.method_removed):
            touched.add(f"method:{cname}.{m.name}")
        for ic in fd.inline_changes:
            touched.add(f"method:{ic.class_name}.{ic.method_name}")
        for cname, f in list(fd.field_added) + list(fd.field_removed):
            touched.add(f"class:{cname}")
    return touched


def elicit_comments(
    old: SourceFacts, new: SourceFacts, diff: StructuralDiff
) -> list[ElicitedComment]:
    """Comments added/removed between versions, plus unchanged doc comments
    attached to entities the diff touches (rendered after the changed ones).

    Duplicates (same normalized text and attachment) are emitted once.
    Unchanged license boilerplate is suppressed: a license header that did
    not change is noise for every commit that touches the file.
    """
    old_keys = {_comment_key(c) for c in old.comments}
    new_keys = {_comment_key(c) for c in new.comments}

    out: list[ElicitedComment] = []
    seen: set[tuple[str, str, str]] = set()

    def emit(comment: CommentFacts, origin: str) -> None:
        text, attachment = _comment_key(comment)
        if not text:
            return
        category = categorize_comment(comment)
        if origin == "context" and category == "license":
            return
        key = (text, attachment, origin)
        if key in seen:
            return
        seen.add(key)
        out.append(ElicitedComment(category=category, text=text, origin=origin, attachment=attachment))

    for comment in new.comments:
        if _comment_key(comment) not in old_keys:
            emit(comment, "added")
    for comment in old.comments:
        if _comment_key(comment) not in new_keys:
            emit(comment, "removed")

    changed_keys = {(t, a) for t, a, _o in seen}
    touched = _touched_attachments(diff)
    for facts in (new, old):
        for comment in facts.comments:
            if comment.attachment not in touched:
                continue
            if comment.attachment.startswith("inline:"):
                continue
            if _comment_key(comment) in changed_keys:
                continue
            emit(comment, "context")
    return out


def _annotation_occurrences(facts: SourceFacts) -> dict[tuple[str, str | None, str], int]:
    """Multiset of annotations keyed by (name, argument text, target)."""
    counts: dict[tuple[str, str | None, str], int] = {}

    def bump(name: str, args: str | None, target: str) -> None:
        key = (name, args, target)
        counts[key] = counts.get(key, 0) + 1

    for qname, cls in facts.all_classes():
        for a in cls.annotations:
            bump(a.name, a.argument_text, f"class {qname}")
        for f in cls.fields:
            for a in f.annotations:
                bump(a.name, a.argument_text, f"field {qname}.{f.name}")
        for m in cls.methods:
            for a in m.annotations:
                bump(a.name, a.argument_text, f"method {qname}.{m.name}")
    return counts


def elicit_annotations(old: SourceFacts, new: SourceFacts) -> list[ElicitedAnnotation]:
    """One record per annotation occurrence present in exactly one version
    at a given target."""
    old_counts = _annotation_occurrences(old)
    new_counts = _annotation_occurrences(new)
    out: list[ElicitedAnnotation] = []
    for key in sorted(set(old_counts) | set(new_counts), key=lambda k: (k[2], k[0], k[1] or "")):
        name, args, target = key
        delta = new_counts.get(key, 0) - old_counts.get(key, 0)
        origin = "added" if delta > 0 else "removed"
        for _ in range(abs(delta)):
            out.append(ElicitedAnnotation(name=name, argument_text=args, target=target, origin=origin))
    return out
