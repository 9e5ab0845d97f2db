"""Structural diff between parsed file versions and change-type classification.

The diff is entity-level: imports, classes, fields, annotations, methods,
and per-method inline changes (parameters, modifiers, statements, thrown
exceptions, annotations). A commit-wide diff is then classified into one of
twelve change types Ty0..Ty11 by an ordered rule list; thresholds live in
PipelineConfig so experiments can move them without touching code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from condenser.config import PipelineConfig
from condenser.javafacts import (
    ClassFacts,
    FieldFacts,
    MethodFacts,
    PRIMITIVE_TYPES,
    SourceFacts,
    StatementFacts,
)

__all__ = [
    "AnnotationChange",
    "ChangeType",
    "FileDiff",
    "MethodInlineChange",
    "StructuralDiff",
    "CHANGE_TYPE_LABELS",
    "classify_change",
    "classify_change_explained",
    "detect_statement_moves",
    "diff_commit_facts",
    "diff_facts",
]


CHANGE_TYPE_LABELS = {
    "Ty0": "Structure Modification",
    "Ty1": "State Access Modification",
    "Ty2": "Update Modification",
    "Ty3": "Behavior Modification",
    "Ty4": "Object Creation Modification",
    "Ty5": "Relationship Modification",
    "Ty6": "Control Modification",
    "Ty7": "Large Modification",
    "Ty8": "Lazy Modification",
    "Ty9": "Degenerate Modification",
    "Ty10": "Small Modification",
    "Ty11": "Unknown Modification",
}


@dataclass(frozen=True)
class ChangeType:
    value: str  # Ty0..Ty11
    label: str

    def __post_init__(self):
        if CHANGE_TYPE_LABELS.get(self.value) != self.label:
            raise ValueError(f"unknown change type {self.value}/{self.label}")

    @staticmethod
    def of(value: str) -> "ChangeType":
        return ChangeType(value, CHANGE_TYPE_LABELS[value])


@dataclass(frozen=True)
class AnnotationChange:
    target: str  # e.g. "class C", "method C.m", "field C.f"
    name: str
    argument_text: str | None
    origin: str  # added | removed


@dataclass(frozen=True)
class MethodInlineChange:
    class_name: str
    method_name: str
    old: MethodFacts
    new: MethodFacts
    param_added: tuple[tuple[str, str], ...] = ()
    param_removed: tuple[tuple[str, str], ...] = ()
    param_retyped: tuple[tuple[str, str, str], ...] = ()  # (name, old type, new type)
    return_type_changed: tuple[str, str] | None = None  # (old, new)
    modifier_added: tuple[str, ...] = ()
    modifier_removed: tuple[str, ...] = ()
    stmt_added: tuple[StatementFacts, ...] = ()
    stmt_removed: tuple[StatementFacts, ...] = ()
    stmt_modified: tuple[tuple[StatementFacts, StatementFacts], ...] = ()
    stmt_moved: tuple[tuple[StatementFacts, StatementFacts], ...] = ()
    exception_added: tuple[str, ...] = ()
    exception_removed: tuple[str, ...] = ()
    annotation_added: tuple[tuple[str, str | None], ...] = ()
    annotation_removed: tuple[tuple[str, str | None], ...] = ()

    @property
    def display_name(self) -> str:
        return f"{self.class_name}.{self.method_name}"

    def statement_change_count(self) -> int:
        return len(self.stmt_added) + len(self.stmt_removed) + len(self.stmt_modified)

    def has_signature_change(self) -> bool:
        return bool(
            self.param_added or self.param_removed or self.param_retyped
            or self.return_type_changed
            or self.modifier_added or self.modifier_removed
            or self.exception_added or self.exception_removed
        )

    def is_empty(self) -> bool:
        return not (
            self.has_signature_change()
            or self.stmt_added or self.stmt_removed or self.stmt_modified or self.stmt_moved
            or self.annotation_added or self.annotation_removed
        )


@dataclass(frozen=True)
class FileDiff:
    path: str
    status: str  # added | deleted | modified | renamed | skipped
    is_java: bool = True
    package_name: str | None = None
    single_class: bool = False
    path_old: str | None = None
    class_order: tuple[str, ...] = ()  # qualified names, new-version source order first
    import_added: tuple[str, ...] = ()
    import_removed: tuple[str, ...] = ()
    class_added: tuple[str, ...] = ()
    class_removed: tuple[str, ...] = ()
    class_renamed: tuple[tuple[str, str], ...] = ()
    field_added: tuple[tuple[str, FieldFacts], ...] = ()  # (class qname, facts)
    field_removed: tuple[tuple[str, FieldFacts], ...] = ()
    field_retyped: tuple[tuple[str, str, str, str], ...] = ()  # (class, name, old, new)
    annotation_changes: tuple[AnnotationChange, ...] = ()
    method_added: tuple[tuple[str, MethodFacts], ...] = ()
    method_removed: tuple[tuple[str, MethodFacts], ...] = ()
    inline_changes: tuple[MethodInlineChange, ...] = ()
    supertype_added: tuple[tuple[str, str, str], ...] = ()  # (class, extends|implements, type)
    supertype_removed: tuple[tuple[str, str, str], ...] = ()

    def is_empty(self) -> bool:
        return not (
            self.import_added or self.import_removed
            or self.class_added or self.class_removed or self.class_renamed
            or self.field_added or self.field_removed or self.field_retyped
            or self.annotation_changes
            or self.method_added or self.method_removed or self.inline_changes
            or self.supertype_added or self.supertype_removed
        )


@dataclass(frozen=True)
class StructuralDiff:
    files: tuple[FileDiff, ...]

    def is_empty(self) -> bool:
        return all(f.is_empty() for f in self.files)

    def merged_with(self, other: "StructuralDiff") -> "StructuralDiff":
        return StructuralDiff(files=self.files + other.files)


# ---------------------------------------------------------------------------
# Structural diff
# ---------------------------------------------------------------------------


def _annotation_multiset(annos) -> dict[tuple[str, str | None], int]:
    counts: dict[tuple[str, str | None], int] = {}
    for a in annos:
        counts[a.key()] = counts.get(a.key(), 0) + 1
    return counts


def _diff_annotations(old_annos, new_annos, target: str) -> list[AnnotationChange]:
    old_counts = _annotation_multiset(old_annos)
    new_counts = _annotation_multiset(new_annos)
    changes: list[AnnotationChange] = []
    for key in sorted(set(old_counts) | set(new_counts), key=lambda k: (k[0], k[1] or "")):
        name, args = key
        delta = new_counts.get(key, 0) - old_counts.get(key, 0)
        origin = "added" if delta > 0 else "removed"
        for _ in range(abs(delta)):
            changes.append(AnnotationChange(target=target, name=name, argument_text=args, origin=origin))
    return changes


def _lcs_align(old: tuple[StatementFacts, ...], new: tuple[StatementFacts, ...]) -> tuple[list[StatementFacts], list[StatementFacts]]:
    """Residual removed/added statements after an order-preserving alignment.

    Statements matched in order by identical text survive unchanged even when
    their line numbers shifted; everything else is raw removed/added input
    for move and modify pairing.
    """
    a = [s.text for s in old]
    b = [s.text for s in new]
    la, lb = len(a), len(b)
    dp = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la - 1, -1, -1):
        row = dp[i]
        nxt = dp[i + 1]
        for j in range(lb - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = nxt[j] if nxt[j] >= row[j + 1] else row[j + 1]
    removed: list[StatementFacts] = []
    added: list[StatementFacts] = []
    i = j = 0
    while i < la and j < lb:
        if a[i] == b[j]:
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            removed.append(old[i])
            i += 1
        else:
            added.append(new[j])
            j += 1
    removed.extend(old[i:])
    added.extend(new[j:])
    return removed, added


def detect_statement_moves(
    removed: list[StatementFacts], added: list[StatementFacts]
) -> tuple[list[tuple[StatementFacts, StatementFacts]], list[StatementFacts], list[StatementFacts]]:
    """Pair removed/added statements with identical text at different lines.

    Maximum matching per text group (each statement used at most once);
    residual lists keep their input order.
    """
    by_text: dict[str, list[int]] = {}
    for idx, s in enumerate(added):
        by_text.setdefault(s.text, []).append(idx)
    matched_added: set[int] = set()
    match_of_removed: dict[int, int] = {}

    for text, add_indices in by_text.items():
        rem_indices = [i for i, s in enumerate(removed) if s.text == text]
        if not rem_indices:
            continue
        # Kuhn's augmenting-path matching; groups are tiny in practice
        assign_add_to_rem: dict[int, int] = {}

        def try_assign(ri: int, visited: set[int]) -> bool:
            for ai in add_indices:
                if ai in visited:
                    continue
                if removed[ri].line == added[ai].line:
                    continue
                visited.add(ai)
                if ai not in assign_add_to_rem or try_assign(assign_add_to_rem[ai], visited):
                    assign_add_to_rem[ai] = ri
                    return True
            return False

        for ri in rem_indices:
            try_assign(ri, set())
        for ai, ri in assign_add_to_rem.items():
            matched_added.add(ai)
            match_of_removed[ri] = ai

    moves = [
        (removed[ri], added[match_of_removed[ri]])
        for ri in sorted(match_of_removed)
    ]
    residual_removed = [s for i, s in enumerate(removed) if i not in match_of_removed]
    residual_added = [s for i, s in enumerate(added) if i not in matched_added]
    return moves, residual_removed, residual_added


_WORDISH = re.compile(r"\w+|[^\w\s]")


def _stmt_tokens(text: str) -> frozenset[str]:
    return frozenset(_WORDISH.findall(text))


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


# beyond this many candidate pairs, modify-pairing degrades to positional
# matching; keeps worst-case commits (thousands of statements in one method)
# out of quadratic territory while realistic methods get the exact pairing
_MODIFY_PAIR_CAP = 250_000


def _pair_modifications(
    removed: list[StatementFacts],
    added: list[StatementFacts],
    threshold: float,
) -> tuple[list[tuple[StatementFacts, StatementFacts]], list[StatementFacts], list[StatementFacts]]:
    """Greedy best-similarity pairing of residual removed/added statements."""
    rem_tokens = [_stmt_tokens(s.text) for s in removed]
    add_tokens = [_stmt_tokens(s.text) for s in added]
    candidates = []
    if len(removed) * len(added) > _MODIFY_PAIR_CAP:
        for i, (rt, at) in enumerate(zip(rem_tokens, add_tokens)):
            sim = _jaccard(rt, at)
            if sim >= threshold:
                candidates.append((-sim, i, i))
    else:
        for i, rt in enumerate(rem_tokens):
            for j, at in enumerate(add_tokens):
                sim = _jaccard(rt, at)
                if sim >= threshold:
                    candidates.append((-sim, i, j))
    candidates.sort()
    used_r: set[int] = set()
    used_a: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for _negsim, i, j in candidates:
        if i in used_r or j in used_a:
            continue
        used_r.add(i)
        used_a.add(j)
        pairs.append((i, j))
    pairs.sort()
    modified = [(removed[i], added[j]) for i, j in pairs]
    rest_removed = [s for i, s in enumerate(removed) if i not in used_r]
    rest_added = [s for j, s in enumerate(added) if j not in used_a]
    return modified, rest_removed, rest_added


def _match_methods(
    old_methods: tuple[MethodFacts, ...], new_methods: tuple[MethodFacts, ...]
) -> tuple[list[tuple[MethodFacts, MethodFacts]], list[MethodFacts], list[MethodFacts]]:
    """Match methods across versions by exact signature first, then by
    (name, arity) with maximal parameter-type overlap. Leftovers are
    add/remove."""
    old_left = list(old_methods)
    new_left = list(new_methods)
    matched: list[tuple[MethodFacts, MethodFacts]] = []

    new_by_sig = {m.signature(): m for m in new_left}
    for m in list(old_left):
        twin = new_by_sig.get(m.signature())
        if twin is not None and twin in new_left:
            matched.append((m, twin))
            old_left.remove(m)
            new_left.remove(twin)
    # same name + arity, best type-text overlap
    for m in list(old_left):
        candidates = [
            c for c in new_left if c.name == m.name and len(c.parameters) == len(m.parameters)
        ]
        if not candidates:
            continue
        def overlap(c: MethodFacts) -> int:
            return sum(
                1 for (t1, _), (t2, _) in zip(m.parameters, c.parameters) if t1 == t2
            )
        best = max(candidates, key=overlap)
        matched.append((m, best))
        old_left.remove(m)
        new_left.remove(best)
    return matched, old_left, new_left


def _inline_change(
    class_name: str, old: MethodFacts, new: MethodFacts, config: PipelineConfig
) -> MethodInlineChange | None:
    param_retyped = tuple(
        (new_name, old_type, new_type)
        for (old_type, _old_name), (new_type, new_name) in zip(old.parameters, new.parameters)
        if old_type != new_type
    )
    return_type_changed = None
    if old.return_type != new.return_type and old.return_type and new.return_type:
        return_type_changed = (old.return_type, new.return_type)
    modifier_added = tuple(sorted(new.modifiers - old.modifiers))
    modifier_removed = tuple(sorted(old.modifiers - new.modifiers))
    exception_added = tuple(sorted(set(new.thrown_exceptions) - set(old.thrown_exceptions)))
    exception_removed = tuple(sorted(set(old.thrown_exceptions) - set(new.thrown_exceptions)))
    raw_removed, raw_added = _lcs_align(old.body_statements, new.body_statements)
    moves, res_removed, res_added = detect_statement_moves(raw_removed, raw_added)
    modified, rest_removed, rest_added = _pair_modifications(
        res_removed, res_added, config.modify_similarity
    )
    annotation_added = []
    annotation_removed = []
    old_counts = _annotation_multiset(old.annotations)
    new_counts = _annotation_multiset(new.annotations)
    for key in sorted(set(old_counts) | set(new_counts), key=lambda k: (k[0], k[1] or "")):
        delta = new_counts.get(key, 0) - old_counts.get(key, 0)
        bucket = annotation_added if delta > 0 else annotation_removed
        for _ in range(abs(delta)):
            bucket.append(key)
    change = MethodInlineChange(
        class_name=class_name,
        method_name=new.name,
        old=old,
        new=new,
        param_retyped=param_retyped,
        return_type_changed=return_type_changed,
        modifier_added=modifier_added,
        modifier_removed=modifier_removed,
        stmt_added=tuple(rest_added),
        stmt_removed=tuple(rest_removed),
        stmt_modified=tuple(modified),
        stmt_moved=tuple(moves),
        exception_added=exception_added,
        exception_removed=exception_removed,
        annotation_added=tuple(annotation_added),
        annotation_removed=tuple(annotation_removed),
    )
    return None if change.is_empty() else change


def _members_fingerprint(cls: ClassFacts) -> frozenset:
    return frozenset(
        [("m",) + m.signature() for m in cls.methods]
        + [("f", f.name, f.type_text) for f in cls.fields]
    )


def diff_facts(
    old: SourceFacts,
    new: SourceFacts,
    path: str = "",
    status: str = "modified",
    config: PipelineConfig | None = None,
    path_old: str | None = None,
) -> StructuralDiff:
    """Structural diff of one file's old and new facts.

    Either side may be SourceFacts.empty() for added/deleted files. Unchanged
    entities produce no records; the result satisfies the per-method
    exclusivity invariant (a method is added, removed, or inline-changed,
    never more than one).
    """
    config = config or PipelineConfig()
    import_added = tuple(
        _import_text(i) for i in new.imports if _import_text(i) not in {_import_text(x) for x in old.imports}
    )
    import_removed = tuple(
        _import_text(i) for i in old.imports if _import_text(i) not in {_import_text(x) for x in new.imports}
    )

    old_classes = dict(old.all_classes())
    new_classes = dict(new.all_classes())

    class_added = [name for name in new_classes if name not in old_classes]
    class_removed = [name for name in old_classes if name not in new_classes]
    class_renamed: list[tuple[str, str]] = []
    if len(class_added) == 1 and len(class_removed) == 1:
        old_name, new_name = class_removed[0], class_added[0]
        if _members_fingerprint(old_classes[old_name]) == _members_fingerprint(new_classes[new_name]):
            class_renamed.append((old_name, new_name))
            class_added = []
            class_removed = []

    field_added: list[tuple[str, FieldFacts]] = []
    field_removed: list[tuple[str, FieldFacts]] = []
    field_retyped: list[tuple[str, str, str, str]] = []
    annotation_changes: list[AnnotationChange] = []
    method_added: list[tuple[str, MethodFacts]] = []
    method_removed: list[tuple[str, MethodFacts]] = []
    inline_changes: list[MethodInlineChange] = []
    supertype_added: list[tuple[str, str, str]] = []
    supertype_removed: list[tuple[str, str, str]] = []

    for name in class_added:
        cls = new_classes[name]
        for f in cls.fields:
            field_added.append((name, f))
        for m in cls.methods:
            method_added.append((name, m))
        for t in cls.extends_types:
            supertype_added.append((name, "extends", t))
        for t in cls.implements_types:
            supertype_added.append((name, "implements", t))
        annotation_changes.extend(_diff_annotations((), cls.annotations, f"class {name}"))
        for f in cls.fields:
            annotation_changes.extend(_diff_annotations((), f.annotations, f"field {name}.{f.name}"))
    for name in class_removed:
        cls = old_classes[name]
        for f in cls.fields:
            field_removed.append((name, f))
        for m in cls.methods:
            method_removed.append((name, m))
        for t in cls.extends_types:
            supertype_removed.append((name, "extends", t))
        for t in cls.implements_types:
            supertype_removed.append((name, "implements", t))
        annotation_changes.extend(_diff_annotations(cls.annotations, (), f"class {name}"))
        for f in cls.fields:
            annotation_changes.extend(_diff_annotations(f.annotations, (), f"field {name}.{f.name}"))

    renamed_map = {o: n for o, n in class_renamed}
    for old_name, old_cls in old_classes.items():
        new_name = renamed_map.get(old_name, old_name)
        new_cls = new_classes.get(new_name)
        if new_cls is None:
            continue
        cname = new_name

        for kind_label, old_list, new_list in (
            ("extends", old_cls.extends_types, new_cls.extends_types),
            ("implements", old_cls.implements_types, new_cls.implements_types),
        ):
            for t in new_list:
                if t not in old_list:
                    supertype_added.append((cname, kind_label, t))
            for t in old_list:
                if t not in new_list:
                    supertype_removed.append((cname, kind_label, t))

        annotation_changes.extend(
            _diff_annotations(old_cls.annotations, new_cls.annotations, f"class {cname}")
        )

        old_fields = {f.name: f for f in old_cls.fields}
        new_fields = {f.name: f for f in new_cls.fields}
        for fname, f in new_fields.items():
            if fname not in old_fields:
                field_added.append((cname, f))
                annotation_changes.extend(_diff_annotations((), f.annotations, f"field {cname}.{fname}"))
        for fname, f in old_fields.items():
            if fname not in new_fields:
                field_removed.append((cname, f))
                annotation_changes.extend(_diff_annotations(f.annotations, (), f"field {cname}.{fname}"))
        for fname in new_fields:  # source order keeps output deterministic
            if fname not in old_fields:
                continue
            fo, fn = old_fields[fname], new_fields[fname]
            if fo.type_text != fn.type_text:
                field_retyped.append((cname, fname, fo.type_text, fn.type_text))
            annotation_changes.extend(
                _diff_annotations(fo.annotations, fn.annotations, f"field {cname}.{fname}")
            )

        matched, removed_m, added_m = _match_methods(old_cls.methods, new_cls.methods)
        for m in added_m:
            method_added.append((cname, m))
        for m in removed_m:
            method_removed.append((cname, m))
        for mo, mn in matched:
            change = _inline_change(cname, mo, mn, config)
            if change is not None:
                inline_changes.append(change)

    package = new.package_name if new.package_name is not None else old.package_name
    renamed_old_names = {o for o, _n in class_renamed}
    class_order = tuple(new_classes) + tuple(
        n for n in old_classes if n not in new_classes and n not in renamed_old_names
    )
    file_diff = FileDiff(
        path=path,
        status=status,
        is_java=True,
        package_name=package,
        path_old=path_old,
        class_order=class_order,
        single_class=len(new_classes or old_classes) == 1,
        import_added=import_added,
        import_removed=import_removed,
        class_added=tuple(class_added),
        class_removed=tuple(class_removed),
        class_renamed=tuple(class_renamed),
        field_added=tuple(field_added),
        field_removed=tuple(field_removed),
        field_retyped=tuple(field_retyped),
        annotation_changes=tuple(annotation_changes),
        method_added=tuple(method_added),
        method_removed=tuple(method_removed),
        inline_changes=tuple(inline_changes),
        supertype_added=tuple(supertype_added),
        supertype_removed=tuple(supertype_removed),
    )
    return StructuralDiff(files=(file_diff,))


def _import_text(imp) -> str:
    text = imp.name + (".*" if imp.is_wildcard else "")
    return ("static " if imp.is_static else "") + text


def diff_commit_facts(
    per_file: list[tuple[str, str, str | None, SourceFacts, SourceFacts]],
    config: PipelineConfig | None = None,
    skipped: list[tuple[str, str]] | None = None,
) -> StructuralDiff:
    """Diff a whole commit: (path, status, old path, old facts, new facts)
    per Java file, plus (path, status) records for files carried through
    unsummarized."""
    files: list[FileDiff] = []
    for path, status, old_path, old, new in per_file:
        files.extend(
            diff_facts(old, new, path=path, status=status, config=config, path_old=old_path).files
        )
    for path, status in skipped or []:
        files.append(FileDiff(path=path, status=status, is_java=False))
    return StructuralDiff(files=tuple(files))


# ---------------------------------------------------------------------------
# Change-type classification
# ---------------------------------------------------------------------------


_JDK_VALUE_TYPES = {
    "String", "Integer", "Long", "Double", "Float", "Short", "Byte",
    "Character", "Boolean", "Object", "Number", "Void",
}


@dataclass(frozen=True)
class _TouchedMethod:
    class_name: str
    facts: MethodFacts  # the analyzed version (new side when available)
    owner_fields: frozenset[str]
    origin: str  # added | removed | inline


def _is_getter(m: MethodFacts, field_names: frozenset[str]) -> bool:
    if m.is_constructor or len(m.body_statements) != 1 or m.parameters:
        return False
    stmt = m.body_statements[0]
    if stmt.kind != "return":
        return False
    target = stmt.text[len("return"):].strip().rstrip(";").strip()
    if target.startswith("this."):
        target = target[len("this."):]
    return bool(re.fullmatch(r"\w+", target)) and (not field_names or target in field_names)


def _is_setter(m: MethodFacts, field_names: frozenset[str]) -> bool:
    if m.is_constructor or len(m.body_statements) != 1 or len(m.parameters) != 1:
        return False
    stmt = m.body_statements[0]
    if stmt.kind != "assignment":
        return False
    match = re.fullmatch(r"(?:this\s*\.\s*)?(\w+)\s*=\s*(\w+)\s*;?", stmt.text)
    if not match:
        return False
    lhs, rhs = match.group(1), match.group(2)
    return rhs == m.parameters[0][1] and (not field_names or lhs in field_names)


def _is_accessor(t: _TouchedMethod) -> bool:
    return _is_getter(t.facts, t.owner_fields) or _is_setter(t.facts, t.owner_fields)


def _assigns_field(m: MethodFacts, field_names: frozenset[str]) -> bool:
    for stmt in m.body_statements:
        if stmt.kind != "assignment":
            continue
        assign = re.match(r"(?:this\s*\.\s*)?(\w+)\s*(?:=|\+=|-=|\*=|/=|%=|\|=|&=|\^=)(?!=)", stmt.text)
        if assign and (assign.group(1) in field_names or stmt.text.lstrip().startswith("this.")):
            return True
        bump = re.match(r"(?:this\s*\.\s*)?(\w+)\s*(?:\+\+|--)", stmt.text)
        if bump and (bump.group(1) in field_names or stmt.text.lstrip().startswith("this.")):
            return True
    return False


def _is_factory(m: MethodFacts, class_name: str) -> bool:
    if m.is_constructor:
        return True
    simple = class_name.rsplit(".", 1)[-1]
    return "static" in m.modifiers and (m.return_type or "").split("<")[0] == simple


_DOTTED_CALL = re.compile(r"^[A-Za-z_$][\w$]*(?:\s*\.\s*[\w$]+)+\s*\(")


def _is_external_invocation(text: str) -> bool:
    """A call whose receiver is some other object: `service.run()`,
    `this.worker.poke()`, `Util.max(...)`. Bare calls and `this.helper()`
    / `super.helper()` stay internal."""
    t = text.strip()
    for own in ("this", "super"):
        if t == own or t.startswith(own + ".") or t.startswith(own + " "):
            rest = t[len(own):].lstrip()
            if not rest.startswith("."):
                return False
            t = rest[1:].lstrip()
            break
    return bool(_DOTTED_CALL.match(t))


def _external_call_ratio(methods: list[_TouchedMethod]) -> float:
    calls = 0
    external = 0
    for t in methods:
        for stmt in t.facts.body_statements:
            if stmt.kind != "invocation":
                continue
            calls += 1
            if _is_external_invocation(stmt.text):
                external += 1
    return external / calls if calls else 0.0


def _is_association_type(type_text: str) -> bool:
    simple = type_text.split("<")[0].rstrip("[].")
    simple = simple.rsplit(".", 1)[-1]
    return simple not in PRIMITIVE_TYPES and simple not in _JDK_VALUE_TYPES


def _collect_touched(diff: StructuralDiff) -> list[_TouchedMethod]:
    touched: list[_TouchedMethod] = []
    for fd in diff.files:
        for cname, m in fd.method_added:
            touched.append(_TouchedMethod(cname, m, _fields_of(fd, cname, new_side=True), "added"))
        for cname, m in fd.method_removed:
            touched.append(_TouchedMethod(cname, m, _fields_of(fd, cname, new_side=False), "removed"))
        for ic in fd.inline_changes:
            touched.append(_TouchedMethod(ic.class_name, ic.new, frozenset(), "inline"))
    return touched


def _fields_of(fd: FileDiff, cname: str, new_side: bool) -> frozenset[str]:
    # best-effort field name set from diff records only; classification
    # falls back to pattern shape when the owner class is not in the diff
    names = set()
    source = fd.field_added if new_side else fd.field_removed
    for owner, f in source:
        if owner == cname:
            names.add(f.name)
    return frozenset(names)


def _owner_field_names(class_name: str, all_new_facts: list[SourceFacts]) -> frozenset[str]:
    for facts in all_new_facts:
        for qname, cls in facts.all_classes():
            if qname == class_name:
                return frozenset(f.name for f in cls.fields)
    return frozenset()


def classify_change_explained(
    diff: StructuralDiff,
    all_new_facts: list[SourceFacts] | None = None,
    config: PipelineConfig | None = None,
) -> tuple[ChangeType, str]:
    """Classify a commit-wide diff; returns (change type, fired rule name).

    The rule list is ordered and total: the first matching rule wins and the
    fallback is Ty11. Threshold values come from the configuration.
    """
    config = config or PipelineConfig()
    all_new_facts = all_new_facts or []

    if diff.is_empty():
        return ChangeType.of("Ty11"), "unclassified"

    touched = _collect_touched(diff)
    # resolve owner field sets from full facts where available
    resolved: list[_TouchedMethod] = []
    for t in touched:
        names = _owner_field_names(t.class_name, all_new_facts) or t.owner_fields
        resolved.append(replace(t, owner_fields=names))
    touched = resolved

    total_stmt_changes = sum(ic.statement_change_count() for fd in diff.files for ic in fd.inline_changes)
    signature_changes = any(
        fd.method_added or fd.method_removed or any(ic.has_signature_change() for ic in fd.inline_changes)
        for fd in diff.files
    )
    structural_other = any(
        fd.import_added or fd.import_removed
        or fd.class_added or fd.class_removed or fd.class_renamed
        or fd.field_added or fd.field_removed or fd.field_retyped
        or fd.annotation_changes or fd.supertype_added or fd.supertype_removed
        for fd in diff.files
    )
    added_methods = [t for t in touched if t.origin == "added"]
    touched_classes = {t.class_name for t in touched}
    non_ctor = [t for t in touched if not t.facts.is_constructor]

    # 1. small tweak: a couple of statements, nothing structural
    if (
        0 < total_stmt_changes <= config.small_change_max_statements
        and not signature_changes
        and not structural_other
    ):
        return ChangeType.of("Ty10"), "small_change"

    # 2. wide-reaching commit
    if len(touched) >= config.large_change_min_methods and len(touched_classes) >= config.large_change_min_classes:
        return ChangeType.of("Ty7"), "large_change"

    # 3. scaffolding: only empty bodies added
    if added_methods and all(not t.facts.body_statements for t in added_methods):
        return ChangeType.of("Ty9"), "degenerate_additions"

    # 4. mostly accessors while real logic sits untouched
    if touched:
        accessor_count = sum(1 for t in touched if _is_accessor(t))
        if accessor_count / len(touched) > config.accessor_ratio and _untouched_non_accessor_exists(
            touched, all_new_facts
        ):
            return ChangeType.of("Ty8"), "lazy_accessors"

    # 5. pure accessor commit
    if touched and all(_is_accessor(t) for t in touched):
        return ChangeType.of("Ty0"), "accessor_only"

    # 6. state read without mutation
    if (
        non_ctor
        and len(non_ctor) == len(touched)
        and all((t.facts.return_type or "void") != "void" for t in non_ctor)
        and all(not _assigns_field(t.facts, t.owner_fields) for t in non_ctor)
    ):
        return ChangeType.of("Ty1"), "state_access_only"

    # 7. mutators throughout
    if (
        non_ctor
        and len(non_ctor) == len(touched)
        and all(_assigns_field(t.facts, t.owner_fields) for t in non_ctor)
    ):
        return ChangeType.of("Ty2"), "state_update_only"

    # 8. constructors and factories
    if touched and all(_is_factory(t.facts, t.class_name) for t in touched):
        return ChangeType.of("Ty4"), "object_creation_only"

    # 9. relationship edits: supertypes or association fields only
    if not touched and _only_relationship_changes(diff):
        return ChangeType.of("Ty5"), "relationship_only"

    # 10. delegating to other classes
    if touched and _external_call_ratio(touched) > config.external_call_ratio:
        return ChangeType.of("Ty6"), "external_control"

    # 11. some body changed in a way nothing above captured
    if total_stmt_changes > 0 or any(t.facts.body_statements for t in touched):
        return ChangeType.of("Ty3"), "behavior_change"

    return ChangeType.of("Ty11"), "unclassified"


def _only_relationship_changes(diff: StructuralDiff) -> bool:
    saw_any = False
    for fd in diff.files:
        if (
            fd.import_added or fd.import_removed
            or fd.class_added or fd.class_removed or fd.class_renamed
            or fd.annotation_changes or fd.method_added or fd.method_removed or fd.inline_changes
        ):
            return False
        if fd.supertype_added or fd.supertype_removed:
            saw_any = True
        for _cname, f in list(fd.field_added) + list(fd.field_removed):
            if not _is_association_type(f.type_text):
                return False
            saw_any = True
        for _cname, _fname, old_t, new_t in fd.field_retyped:
            if not (_is_association_type(old_t) or _is_association_type(new_t)):
                return False
            saw_any = True
    return saw_any


def _untouched_non_accessor_exists(touched: list[_TouchedMethod], all_new_facts: list[SourceFacts]) -> bool:
    touched_keys = {(t.class_name, t.facts.signature()) for t in touched}
    for facts in all_new_facts:
        for qname, cls in facts.all_classes():
            field_names = frozenset(f.name for f in cls.fields)
            for m in cls.methods:
                if (qname, m.signature()) in touched_keys:
                    continue
                probe = _TouchedMethod(qname, m, field_names, "context")
                if not _is_accessor(probe):
                    return True
    return False


def classify_change(
    diff: StructuralDiff,
    all_new_facts: list[SourceFacts] | None = None,
    config: PipelineConfig | None = None,
) -> ChangeType:
    """Classify a commit-wide diff into one change type Ty0..Ty11."""
    return classify_change_explained(diff, all_new_facts, config)[0]
