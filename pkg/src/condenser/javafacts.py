"""Declaration-level facts extracted from Java source text.

The parser is deliberately coarse: package, imports, type declarations,
fields, method signatures, annotations and throws clauses are parsed
precisely, while method bodies are broken into flat statement records by
a brace/semicolon scanner. That is all the downstream change summarizer
needs; there is no symbol resolution and no full-grammar conformance.

All returned facts are immutable and safe to share across threads.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

__all__ = [
    "AnnotationFacts",
    "ClassFacts",
    "CommentFacts",
    "FieldFacts",
    "ImportFacts",
    "MethodFacts",
    "ParseError",
    "SourceFacts",
    "StatementFacts",
    "extract_comments",
    "parse_java",
]


class ParseError(Exception):
    """Raised for inputs outside the supported subset (unbalanced braces,
    unterminated comments/strings, duplicate declarations, no type decl)."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


MODIFIER_WORDS = {
    "public", "protected", "private", "abstract", "static", "final",
    "synchronized", "native", "strictfp", "transient", "volatile", "default",
}

PRIMITIVE_TYPES = {
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
}

_CANONICAL_MODIFIER_ORDER = (
    "public", "protected", "private", "abstract", "static", "final",
    "synchronized", "native", "strictfp", "transient", "volatile", "default",
)


def sort_modifiers(modifiers) -> list[str]:
    """Order a modifier set the way Java sources conventionally spell it."""
    rank = {m: i for i, m in enumerate(_CANONICAL_MODIFIER_ORDER)}
    return sorted(modifiers, key=lambda m: (rank.get(m, len(rank)), m))


# ---------------------------------------------------------------------------
# Fact types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnotationFacts:
    name: str  # without the leading '@'
    argument_text: str | None
    target: str  # 'class' | 'method' | 'field'
    line: int

    def key(self) -> tuple[str, str | None]:
        return (self.name, self.argument_text)


@dataclass(frozen=True)
class CommentFacts:
    kind: str  # 'line' | 'block' | 'javadoc'
    text: str  # interior text, delimiters stripped, otherwise untouched
    token_count: int
    line_range: tuple[int, int]
    attachment: str  # 'file' | 'class:<C>' | 'method:<C.m>' | 'inline:<C.m>'


@dataclass(frozen=True)
class StatementFacts:
    kind: str  # branch|loop|try|throw|return|invocation|assignment|declaration|other
    text: str  # single line, whitespace runs collapsed
    line: int


@dataclass(frozen=True)
class FieldFacts:
    name: str
    type_text: str
    modifiers: frozenset[str]
    annotations: tuple[AnnotationFacts, ...]
    initializer_text: str | None
    line: int
    is_enum_constant: bool = False


@dataclass(frozen=True)
class MethodFacts:
    name: str
    return_type: str | None  # None for constructors
    parameters: tuple[tuple[str, str], ...]  # (type text, name)
    modifiers: frozenset[str]
    annotations: tuple[AnnotationFacts, ...]
    thrown_exceptions: tuple[str, ...]
    body_statements: tuple[StatementFacts, ...]
    doc_comment: CommentFacts | None
    byte_range: tuple[int, int]

    @property
    def is_constructor(self) -> bool:
        return self.return_type is None

    def signature(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, tuple(t for t, _ in self.parameters))


@dataclass(frozen=True)
class ClassFacts:
    name: str
    kind: str  # 'class' | 'interface' | 'enum' | 'annotation-decl'
    modifiers: frozenset[str]
    annotations: tuple[AnnotationFacts, ...]
    extends_types: tuple[str, ...]
    implements_types: tuple[str, ...]
    fields: tuple[FieldFacts, ...]
    methods: tuple[MethodFacts, ...]
    inner_classes: tuple[ClassFacts, ...]
    doc_comment: CommentFacts | None
    byte_range: tuple[int, int]


@dataclass(frozen=True)
class ImportFacts:
    name: str  # dotted name, without trailing '.*'
    is_static: bool = False
    is_wildcard: bool = False


@dataclass(frozen=True)
class SourceFacts:
    package_name: str | None
    imports: tuple[ImportFacts, ...]
    classes: tuple[ClassFacts, ...]
    comments: tuple[CommentFacts, ...] = ()

    @property
    def file_comments(self) -> tuple[CommentFacts, ...]:
        """Comments outside any class body."""
        return tuple(c for c in self.comments if c.attachment == "file")

    @staticmethod
    def empty() -> "SourceFacts":
        """Sentinel for the missing side of an added/deleted file."""
        return SourceFacts(package_name=None, imports=(), classes=(), comments=())

    def all_classes(self) -> list[tuple[str, ClassFacts]]:
        """Flatten the class forest into (qualified name, facts) pairs."""
        out: list[tuple[str, ClassFacts]] = []

        def walk(prefix: str, cls: ClassFacts) -> None:
            qname = f"{prefix}.{cls.name}" if prefix else cls.name
            out.append((qname, cls))
            for inner in cls.inner_classes:
                walk(qname, inner)

        for cls in self.classes:
            walk("", cls)
        return out


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # ident|number|string|char|punct
    text: str
    line: int
    start: int
    end: int


@dataclass(frozen=True)
class _RawComment:
    kind: str
    text: str
    start_line: int
    end_line: int
    start: int
    end: int
    terminated: bool = True


_MULTI_PUNCT = (
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::",
    "==", "!=", "<=", ">=", "&&", "||", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
)

_IDENT_START = re.compile(r"[A-Za-z_$]")
_IDENT_BODY = re.compile(r"[A-Za-z0-9_$]")
_NUMBER = re.compile(r"\d(?:[\w.]|[eEpP][+-])*")


def _lex(source: str, lenient: bool = False) -> tuple[list[_Token], list[_RawComment]]:
    """Tokenize Java source, returning code tokens and comment records.

    In lenient mode unterminated comments/strings run to end of input
    instead of raising; that mode backs extract_comments on arbitrary text.
    """
    tokens: list[_Token] = []
    comments: list[_RawComment] = []
    i = 0
    n = len(source)
    line = 1

    def fail(msg: str, at_line: int):
        raise ParseError(at_line, msg)

    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch in " \t\r\f\v":
            i += 1
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            j = source.find("\n", i)
            end = n if j == -1 else j
            comments.append(_RawComment("line", source[i + 2 : end], line, line, i, end))
            i = end
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "*":
            start_line = line
            close = source.find("*/", i + 2)
            if close == -1:
                if not lenient:
                    fail("unterminated block comment", start_line)
                body = source[i + 2 :]
                end_line = line + body.count("\n")
                kind = "javadoc" if body.startswith("*") and len(body) > 0 else "block"
                comments.append(
                    _RawComment(kind, body, start_line, end_line, i, n, terminated=False)
                )
                log.warning("unterminated block comment at line %d runs to end of input", start_line)
                line = end_line
                i = n
                continue
            body = source[i + 2 : close]
            end_line = line + body.count("\n")
            kind = "javadoc" if source.startswith("/**", i) and close > i + 2 else "block"
            if kind == "javadoc":
                body = body[1:]  # drop the second '*' of the opener
            comments.append(_RawComment(kind, body, start_line, end_line, i, close + 2))
            line = end_line
            i = close + 2
            continue
        if ch == '"' or ch == "'":
            quote = ch
            start_line = line
            j = i + 1
            while j < n:
                c = source[j]
                if c == "\\":
                    j += 2
                    continue
                if c == "\n":
                    break
                if c == quote:
                    break
                j += 1
            if j >= n or source[j] != quote:
                if not lenient:
                    fail("unterminated %s literal" % ("string" if quote == '"' else "char"), start_line)
                j = min(j, n - 1)
            tokens.append(_Token("string" if quote == '"' else "char", source[i : j + 1], line, i, j + 1))
            i = j + 1
            continue
        if _IDENT_START.match(ch):
            j = i + 1
            while j < n and _IDENT_BODY.match(source[j]):
                j += 1
            tokens.append(_Token("ident", source[i:j], line, i, j))
            i = j
            continue
        if ch.isdigit():
            m = _NUMBER.match(source, i)
            j = m.end() if m else i + 1
            tokens.append(_Token("number", source[i:j], line, i, j))
            i = j
            continue
        for op in _MULTI_PUNCT:
            if source.startswith(op, i):
                tokens.append(_Token("punct", op, line, i, i + len(op)))
                i += len(op)
                break
        else:
            tokens.append(_Token("punct", ch, line, i, i + 1))
            i += 1
    return tokens, comments


def _token_count(text: str) -> int:
    return len(text.split())


def _comment_facts(raw: _RawComment, attachment: str) -> CommentFacts:
    return CommentFacts(
        kind=raw.kind,
        text=raw.text,
        token_count=_token_count(raw.text),
        line_range=(raw.start_line, raw.end_line),
        attachment=attachment,
    )


def _blank_comments(source: str, comments: list[_RawComment]) -> str:
    """Replace comment characters with spaces, preserving newlines/offsets."""
    buf = list(source)
    for c in comments:
        for k in range(c.start, c.end):
            if buf[k] != "\n":
                buf[k] = " "
    return "".join(buf)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token], source: str, blanked: str):
        self.toks = tokens
        self.pos = 0
        self.source = source
        self.blanked = blanked
        # (kind, qualified name, decl line, decl start offset, body span)
        self.decl_index: list[tuple[str, str, int, int, tuple[int, int]]] = []

    # -- token helpers -----------------------------------------------------

    def peek(self, offset: int = 0) -> _Token | None:
        k = self.pos + offset
        return self.toks[k] if k < len(self.toks) else None

    def at(self, text: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.text == text

    def take(self) -> _Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str, what: str) -> _Token:
        t = self.peek()
        if t is None or t.text != text:
            line = t.line if t else (self.toks[-1].line if self.toks else 1)
            raise ParseError(line, f"expected '{text}' {what}")
        return self.take()

    def expect_ident(self, what: str) -> _Token:
        t = self.peek()
        if t is None or t.kind != "ident":
            line = t.line if t else (self.toks[-1].line if self.toks else 1)
            raise ParseError(line, f"expected identifier {what}")
        return self.take()

    def skip_balanced(self, open_text: str, close_text: str) -> tuple[int, int]:
        """Consume from the current opening token through its matching close.
        Returns the (start, end) token index range, end exclusive."""
        start = self.pos
        opener = self.expect(open_text, "to open a balanced region")
        depth = 1
        while depth > 0:
            t = self.peek()
            if t is None:
                raise ParseError(opener.line, f"unbalanced '{open_text}'")
            if t.text == open_text:
                depth += 1
            elif t.text == close_text:
                depth -= 1
            self.take()
        return start, self.pos

    def skip_generics(self) -> None:
        """Consume a balanced <...> region; '<' nesting only (no shift ops
        appear in declaration positions for the supported subset)."""
        opener = self.expect("<", "to open type parameters")
        depth = 1
        while depth > 0:
            t = self.peek()
            if t is None:
                raise ParseError(opener.line, "unbalanced '<'")
            if t.text == "<":
                depth += 1
            elif t.text == ">":
                depth -= 1
            elif t.text == ">>":
                depth -= 2
            elif t.text == ">>>":
                depth -= 3
            self.take()

    # -- text helpers --------------------------------------------------------

    def slice_tokens(self, start: int, end: int) -> str:
        """Join token texts start..end (exclusive) into normalized text."""
        return _join_tokens(self.toks[start:end])

    # -- grammar -------------------------------------------------------------

    def parse_unit(self) -> tuple[str | None, list[ImportFacts], list[ClassFacts]]:
        package = None
        imports: list[ImportFacts] = []
        if self.at("package"):
            self.take()
            package = self.read_dotted_name("after 'package'")
            self.expect(";", "after package name")
        while self.at("import"):
            self.take()
            is_static = False
            if self.at("static"):
                self.take()
                is_static = True
            name = self.read_dotted_name("after 'import'")
            is_wildcard = False
            if self.at(".") and self.at("*", 1):
                self.take()
                self.take()
                is_wildcard = True
            self.expect(";", "after import")
            imports.append(ImportFacts(name, is_static=is_static, is_wildcard=is_wildcard))
        classes: list[ClassFacts] = []
        while self.peek() is not None:
            if self.at(";"):
                self.take()
                continue
            classes.append(self.parse_type_decl(prefix=""))
        return package, imports, classes

    def read_dotted_name(self, what: str) -> str:
        parts = [self.expect_ident(what).text]
        while self.at(".") and (t := self.peek(1)) is not None and t.kind == "ident":
            self.take()
            parts.append(self.take().text)
        return ".".join(parts)

    def parse_annotation(self, target: str) -> AnnotationFacts:
        at = self.expect("@", "to start annotation")
        name = self.read_dotted_name("after '@'")
        argument_text = None
        if self.at("("):
            s, e = self.skip_balanced("(", ")")
            inner = self.slice_tokens(s + 1, e - 1)
            argument_text = inner or None
        return AnnotationFacts(name=name, argument_text=argument_text, target=target, line=at.line)

    def parse_modifiers_and_annotations(
        self, target: str
    ) -> tuple[set[str], list[AnnotationFacts], int | None, int | None]:
        """Returns (modifiers, annotations, start offset, start line) where
        start marks the declaration's first modifier or annotation token."""
        mods: set[str] = set()
        annos: list[AnnotationFacts] = []
        start: int | None = None
        start_line: int | None = None
        while True:
            t = self.peek()
            if t is None:
                break
            if t.text == "@" and not self.at("interface", 1):
                if start is None:
                    start, start_line = t.start, t.line
                annos.append(self.parse_annotation(target))
                continue
            if t.kind == "ident" and t.text in MODIFIER_WORDS:
                if start is None:
                    start, start_line = t.start, t.line
                mods.add(self.take().text)
                continue
            break
        return mods, annos, start, start_line

    def parse_type_decl(self, prefix: str) -> ClassFacts:
        mods, annos, start_off, start_line = self.parse_modifiers_and_annotations("class")
        t = self.peek()
        if t is None:
            raise ParseError(self.toks[-1].line if self.toks else 1, "expected type declaration")
        if t.text == "@" and self.at("interface", 1):
            self.take()
            self.take()
            kind = "annotation-decl"
        elif t.text in ("class", "interface", "enum"):
            kind = self.take().text
        else:
            raise ParseError(t.line, f"expected type declaration, found '{t.text}'")
        if start_off is None:
            start_off, start_line = t.start, t.line
        name_tok = self.expect_ident("as type name")
        qname = f"{prefix}.{name_tok.text}" if prefix else name_tok.text
        if self.at("<"):
            self.skip_generics()
        extends_types: list[str] = []
        implements_types: list[str] = []
        if self.at("extends"):
            self.take()
            extends_types = self.read_type_list(("implements", "{"))
        if self.at("implements"):
            self.take()
            implements_types = self.read_type_list(("{",))
        open_tok = self.expect("{", "to open type body")
        fields, methods, inners = self.parse_class_body(name_tok.text, qname, kind)
        close = self.toks[self.pos - 1]
        self.decl_index.append(("class", qname, start_line or name_tok.line, start_off, (open_tok.start, close.end)))
        self.check_uniqueness(qname, name_tok.line, fields, methods)
        return ClassFacts(
            name=name_tok.text,
            kind=kind,
            modifiers=frozenset(mods),
            annotations=tuple(annos),
            extends_types=tuple(extends_types),
            implements_types=tuple(implements_types),
            fields=tuple(fields),
            methods=tuple(methods),
            inner_classes=tuple(inners),
            doc_comment=None,  # filled in during comment attachment
            byte_range=(start_off, close.end),
        )

    def check_uniqueness(self, qname: str, line: int, fields: list[FieldFacts], methods: list[MethodFacts]) -> None:
        seen_sig: set[tuple[str, tuple[str, ...]]] = set()
        for m in methods:
            sig = m.signature()
            if sig in seen_sig:
                raise ParseError(line, f"duplicate method signature {qname}.{sig[0]}({', '.join(sig[1])})")
            seen_sig.add(sig)
        seen_fields: set[str] = set()
        for f in fields:
            if f.name in seen_fields:
                raise ParseError(f.line, f"duplicate field {qname}.{f.name}")
            seen_fields.add(f.name)

    def read_type_list(self, stop_words: tuple[str, ...]) -> list[str]:
        names: list[str] = []
        while True:
            names.append(self.read_type_text("in type list"))
            if self.at(","):
                self.take()
                continue
            t = self.peek()
            if t is None or t.text in stop_words:
                break
            break
        return names

    def read_type_text(self, what: str) -> str:
        """Read one type reference: dotted name, generics, array brackets."""
        start = self.pos
        t = self.peek()
        if t is None:
            raise ParseError(self.toks[-1].line if self.toks else 1, f"expected type {what}")
        if t.kind != "ident":
            raise ParseError(t.line, f"expected type {what}, found '{t.text}'")
        self.take()
        while True:
            if self.at(".") and (nxt := self.peek(1)) is not None and nxt.kind == "ident":
                self.take()
                self.take()
                continue
            if self.at("<"):
                self.skip_generics()
                continue
            if self.at("[") and self.at("]", 1):
                self.take()
                self.take()
                continue
            break
        return self.slice_tokens(start, self.pos)

    def parse_class_body(
        self, simple_name: str, qname: str, kind: str
    ) -> tuple[list[FieldFacts], list[MethodFacts], list[ClassFacts]]:
        fields: list[FieldFacts] = []
        methods: list[MethodFacts] = []
        inners: list[ClassFacts] = []
        if kind == "enum":
            self.parse_enum_constants(simple_name, fields)
        while True:
            t = self.peek()
            if t is None:
                raise ParseError(self.toks[-1].line, f"unclosed body of {qname}")
            if t.text == "}":
                self.take()
                return fields, methods, inners
            if t.text == ";":
                self.take()
                continue
            if t.text == "{":  # instance initializer block
                self.skip_balanced("{", "}")
                continue
            if t.text == "static" and self.at("{", 1):  # static initializer
                self.take()
                self.skip_balanced("{", "}")
                continue
            self.parse_member(simple_name, qname, fields, methods, inners)

    def parse_enum_constants(self, simple_name: str, fields: list[FieldFacts]) -> None:
        while True:
            t = self.peek()
            if t is None or t.text in (";", "}"):
                if t is not None and t.text == ";":
                    self.take()
                return
            annos: list[AnnotationFacts] = []
            while self.at("@"):
                annos.append(self.parse_annotation("field"))
            name_tok = self.expect_ident("as enum constant")
            if self.at("("):
                self.skip_balanced("(", ")")
            if self.at("{"):
                self.skip_balanced("{", "}")
            fields.append(
                FieldFacts(
                    name=name_tok.text,
                    type_text=simple_name,
                    modifiers=frozenset({"public", "static", "final"}),
                    annotations=tuple(annos),
                    initializer_text=None,
                    line=name_tok.line,
                    is_enum_constant=True,
                )
            )
            if self.at(","):
                self.take()
                continue

    def parse_member(
        self,
        simple_name: str,
        qname: str,
        fields: list[FieldFacts],
        methods: list[MethodFacts],
        inners: list[ClassFacts],
    ) -> None:
        mods, annos, start_off, start_line = self.parse_modifiers_and_annotations("method")
        t = self.peek()
        if t is None:
            raise ParseError(self.toks[-1].line, f"unexpected end of {qname} body")
        if t.text in ("class", "interface", "enum") or (t.text == "@" and self.at("interface", 1)):
            # the annotations above were parsed with a method target; retarget
            retargeted = [
                AnnotationFacts(a.name, a.argument_text, "class", a.line) for a in annos
            ]
            inner = self.parse_type_decl(prefix=qname)
            inner = ClassFacts(
                name=inner.name,
                kind=inner.kind,
                modifiers=frozenset(set(inner.modifiers) | mods),
                annotations=tuple(retargeted) + inner.annotations,
                extends_types=inner.extends_types,
                implements_types=inner.implements_types,
                fields=inner.fields,
                methods=inner.methods,
                inner_classes=inner.inner_classes,
                doc_comment=inner.doc_comment,
                byte_range=(start_off, inner.byte_range[1]) if start_off is not None else inner.byte_range,
            )
            inners.append(inner)
            return
        if t.text == "<":  # generic method type parameters
            self.skip_generics()
            t = self.peek()
            if t is None:
                raise ParseError(self.toks[-1].line, "unexpected end after type parameters")
        if start_off is None:
            start_off, start_line = t.start, t.line
        # constructor: ClassName (
        if t.kind == "ident" and t.text == simple_name and self.at("(", 1):
            name_tok = self.take()
            methods.append(self.parse_method_rest(name_tok, None, mods, annos, qname, start_off, start_line))
            return
        return_type = self.read_type_text(f"in member of {qname}")
        name_tok = self.expect_ident(f"as member name in {qname}")
        if self.at("("):
            methods.append(self.parse_method_rest(name_tok, return_type, mods, annos, qname, start_off, start_line))
            return
        # field declarator list
        field_annos = [AnnotationFacts(a.name, a.argument_text, "field", a.line) for a in annos]
        while True:
            decl_name = name_tok.text
            decl_type = return_type
            while self.at("[") and self.at("]", 1):
                self.take()
                self.take()
                decl_type += "[]"
            initializer = None
            if self.at("="):
                self.take()
                start = self.pos
                depth = 0
                while True:
                    tok = self.peek()
                    if tok is None:
                        raise ParseError(name_tok.line, f"unterminated field initializer for {decl_name}")
                    if tok.text in ("(", "{", "["):
                        depth += 1
                    elif tok.text in (")", "}", "]"):
                        depth -= 1
                    elif depth == 0 and tok.text in (",", ";"):
                        break
                    self.take()
                initializer = self.slice_tokens(start, self.pos)
            fields.append(
                FieldFacts(
                    name=decl_name,
                    type_text=decl_type,
                    modifiers=frozenset(mods),
                    annotations=tuple(field_annos),
                    initializer_text=initializer,
                    line=name_tok.line,
                )
            )
            if self.at(","):
                self.take()
                name_tok = self.expect_ident("as field name")
                continue
            self.expect(";", f"after field {decl_name}")
            return

    def parse_method_rest(
        self,
        name_tok: _Token,
        return_type: str | None,
        mods: set[str],
        annos: list[AnnotationFacts],
        qname: str,
        start_off: int,
        start_line: int | None = None,
    ) -> MethodFacts:
        self.expect("(", "to open parameter list")
        params: list[tuple[str, str]] = []
        seen_param_names: set[str] = set()
        while not self.at(")"):
            while self.at("@"):
                self.parse_annotation("method")  # parameter annotations dropped
            if self.at("final"):
                self.take()
            ptype = self.read_type_text(f"as parameter type of {qname}.{name_tok.text}")
            if self.at("..."):
                self.take()
                ptype += "..."
            pname_tok = self.expect_ident("as parameter name")
            while self.at("[") and self.at("]", 1):
                self.take()
                self.take()
                ptype += "[]"
            if pname_tok.text in seen_param_names:
                raise ParseError(pname_tok.line, f"duplicate parameter {pname_tok.text} in {qname}.{name_tok.text}")
            seen_param_names.add(pname_tok.text)
            params.append((ptype, pname_tok.text))
            if self.at(","):
                self.take()
        self.expect(")", "to close parameter list")
        thrown: list[str] = []
        if self.at("throws"):
            self.take()
            thrown = self.read_type_list(("{", ";"))
        statements: tuple[StatementFacts, ...] = ()
        if self.at("{"):
            open_tok = self.peek()
            body_start, body_end = self.skip_balanced("{", "}")
            statements = tuple(
                _scan_statements(self.toks[body_start + 1 : body_end - 1], self.blanked)
            )
            end_off = self.toks[body_end - 1].end
            body_span = (open_tok.start, end_off)
        elif self.at("="):
            # annotation-decl member with default value: drop the default
            self.take()
            while not self.at(";"):
                if self.peek() is None:
                    raise ParseError(name_tok.line, "unterminated default value")
                self.take()
            end_off = self.take().end
            body_span = (end_off, end_off)
        else:
            end_off = self.expect(";", "after abstract method").end
            body_span = (end_off, end_off)
        method_qname = f"{qname}.{name_tok.text}"
        self.decl_index.append(("method", method_qname, start_line or name_tok.line, start_off, body_span))
        return MethodFacts(
            name=name_tok.text,
            return_type=return_type,
            parameters=tuple(params),
            modifiers=frozenset(mods),
            annotations=tuple(annos),
            thrown_exceptions=tuple(thrown),
            body_statements=statements,
            doc_comment=None,
            byte_range=(start_off, end_off),
        )


# ---------------------------------------------------------------------------
# Token joining / statement scanning
# ---------------------------------------------------------------------------

_NO_SPACE_BEFORE = {";", ",", ")", "]", "[", ".", "...", "++", "--", "::"}
_NO_SPACE_AFTER = {"(", "[", ".", "@", "::"}
_TYPE_GLUE = {"<", ">", ">>", ">>>"}


def _join_tokens(tokens: list[_Token]) -> str:
    """Render a token run as compact single-line text."""
    out: list[str] = []
    prev: _Token | None = None
    for t in tokens:
        if prev is not None:
            if t.text in _NO_SPACE_BEFORE or prev.text in _NO_SPACE_AFTER:
                pass
            elif (t.text in _TYPE_GLUE or prev.text in _TYPE_GLUE) and t.text != "extends" and prev.text != "extends":
                pass
            elif prev.text in ("extends", "super") or t.text in ("extends", "super"):
                out.append(" ")
            elif t.text == "<" or prev.text in ("<",):
                pass
            else:
                out.append(" ")
        out.append(t.text)
        prev = t
    return "".join(out)


_STMT_SIMPLE_KEYWORDS = {
    "throw": "throw",
    "return": "return",
    "break": "other",
    "continue": "other",
    "assert": "other",
    "yield": "other",
}

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}


def _scan_statements(tokens: list[_Token], blanked: str) -> list[StatementFacts]:
    """Flatten a method body token stream into statement records.

    Control headers (if/for/try/...) become their own records; their blocks
    are scanned recursively in the same flat pass. Anything unrecognized is
    collected up to the next top-level ';' and classified coarsely.
    """
    stmts: list[StatementFacts] = []
    i = 0
    n = len(tokens)

    def slice_text(a: int, b: int) -> str:
        if a >= b:
            return ""
        raw = blanked[tokens[a].start : tokens[b - 1].end]
        return re.sub(r"\s+", " ", raw).strip()

    def balanced_end(start: int, open_t: str, close_t: str) -> int:
        depth = 0
        k = start
        while k < n:
            if tokens[k].text == open_t:
                depth += 1
            elif tokens[k].text == close_t:
                depth -= 1
                if depth == 0:
                    return k + 1
            k += 1
        return n

    while i < n:
        t = tokens[i]
        text = t.text
        if text in ("{", "}"):
            i += 1
            continue
        if text == ";":
            i += 1
            continue
        if text in ("if", "while", "switch", "synchronized"):
            kind = "branch" if text in ("if", "switch") else ("loop" if text == "while" else "other")
            end = i + 1
            if end < n and tokens[end].text == "(":
                end = balanced_end(end, "(", ")")
            stmts.append(StatementFacts(kind, slice_text(i, end), t.line))
            i = end
            continue
        if text == "for":
            end = i + 1
            if end < n and tokens[end].text == "(":
                end = balanced_end(end, "(", ")")
            stmts.append(StatementFacts("loop", slice_text(i, end), t.line))
            i = end
            continue
        if text == "do":
            stmts.append(StatementFacts("loop", "do", t.line))
            i += 1
            continue
        if text == "else":
            if i + 1 < n and tokens[i + 1].text == "if":
                end = i + 2
                if end < n and tokens[end].text == "(":
                    end = balanced_end(end, "(", ")")
                stmts.append(StatementFacts("branch", slice_text(i, end), t.line))
                i = end
            else:
                stmts.append(StatementFacts("branch", "else", t.line))
                i += 1
            continue
        if text in ("try", "finally"):
            end = i + 1
            if text == "try" and end < n and tokens[end].text == "(":
                end = balanced_end(end, "(", ")")
            stmts.append(StatementFacts("try", slice_text(i, end), t.line))
            i = end
            continue
        if text == "catch":
            end = i + 1
            if end < n and tokens[end].text == "(":
                end = balanced_end(end, "(", ")")
            stmts.append(StatementFacts("try", slice_text(i, end), t.line))
            i = end
            continue
        if text in ("case", "default") and _looks_like_switch_label(tokens, i):
            end = i
            depth = 0
            while end < n:
                tt = tokens[end].text
                if tt in ("(", "[") :
                    depth += 1
                elif tt in (")", "]"):
                    depth -= 1
                elif tt == ":" and depth == 0:
                    end += 1
                    break
                end += 1
            stmts.append(StatementFacts("branch", slice_text(i, end), t.line))
            i = end
            continue
        if text in _STMT_SIMPLE_KEYWORDS:
            end = i
            depth = 0
            while end < n:
                tt = tokens[end].text
                if tt in ("(", "[", "{"):
                    depth += 1
                elif tt in (")", "]", "}"):
                    depth -= 1
                elif tt == ";" and depth == 0:
                    end += 1
                    break
                end += 1
            stmts.append(StatementFacts(_STMT_SIMPLE_KEYWORDS[text], slice_text(i, end), t.line))
            i = end
            continue
        # label: `name :` followed by a statement keyword
        if (
            t.kind == "ident"
            and i + 1 < n
            and tokens[i + 1].text == ":"
            and i + 2 < n
            and tokens[i + 2].text in ("for", "while", "do", "if", "switch", "try")
        ):
            i += 2
            continue
        # generic statement: collect to top-level ';'
        end = i
        depth = 0
        saw_eq = False
        while end < n:
            tt = tokens[end].text
            if tt in ("(", "[") or (tt == "{" and (depth > 0 or saw_eq or _prev_is_expr(tokens, end))):
                depth += 1
            elif tt == "{" and depth == 0:
                break  # mis-grabbed a block opener; stop before it
            elif tt in (")", "]", "}"):
                depth -= 1
                if depth < 0:
                    break
            elif tt == ";" and depth == 0:
                end += 1
                break
            if tt in _ASSIGN_OPS and depth == 0:
                saw_eq = True
            end += 1
        if end == i:
            i += 1
            continue
        stmts.append(StatementFacts(_classify_generic(tokens[i:end]), slice_text(i, end), t.line))
        i = end
    return stmts


def _looks_like_switch_label(tokens: list[_Token], i: int) -> bool:
    depth = 0
    for k in range(i, min(i + 40, len(tokens))):
        tt = tokens[k].text
        if tt in ("(", "["):
            depth += 1
        elif tt in (")", "]"):
            depth -= 1
        elif depth == 0 and tt == ":":
            return True
        elif depth == 0 and tt in (";", "{", "}"):
            return False
    return False


def _prev_is_expr(tokens: list[_Token], i: int) -> bool:
    """Heuristic: a '{' continues the current expression (anonymous class or
    array literal) when preceded by ')' or ']' or '=' style contexts."""
    if i == 0:
        return False
    prev = tokens[i - 1].text
    return prev in (")", "]", "=", ",", "{")


def _classify_generic(tokens: list[_Token]) -> str:
    depth = 0
    has_assign = False
    has_call = False
    for idx, t in enumerate(tokens):
        if t.text in ("(", "[", "{"):
            depth += 1
            if t.text == "(" and idx > 0 and tokens[idx - 1].kind == "ident":
                if depth == 1:
                    has_call = True
        elif t.text in (")", "]", "}"):
            depth -= 1
        elif depth == 0 and t.text in _ASSIGN_OPS:
            has_assign = True
            break
        elif depth == 0 and t.text in ("++", "--"):
            has_assign = True
    if not has_assign and _looks_like_declaration(tokens):
        return "declaration"
    if has_assign:
        if _looks_like_declaration(tokens):
            return "declaration"
        return "assignment"
    if has_call:
        return "invocation"
    if tokens and tokens[0].text == "new":
        return "invocation"
    return "other"


def _looks_like_declaration(tokens: list[_Token]) -> bool:
    """Type-then-name shape at the statement head, e.g. `Map<K,V> m = ...`."""
    i = 0
    n = len(tokens)
    if i < n and tokens[i].text == "final":
        i += 1
    if i >= n or tokens[i].kind != "ident":
        return False
    if tokens[i].text in ("this", "super", "new"):
        return False
    i += 1
    while i < n:
        t = tokens[i].text
        if t == "." and i + 1 < n and tokens[i + 1].kind == "ident":
            i += 2
            continue
        if t == "<":
            depth = 1
            i += 1
            while i < n and depth > 0:
                if tokens[i].text == "<":
                    depth += 1
                elif tokens[i].text == ">":
                    depth -= 1
                elif tokens[i].text == ">>":
                    depth -= 2
                i += 1
            continue
        if t == "[" and i + 1 < n and tokens[i + 1].text == "]":
            i += 2
            continue
        break
    return i < n and tokens[i].kind == "ident" and (i + 1 >= n or tokens[i + 1].text in ("=", ";", ",", "[", ":"))


# ---------------------------------------------------------------------------
# Comment attachment
# ---------------------------------------------------------------------------

_ATTACH_WINDOW_LINES = 2


def _resolve_attachments(
    raw_comments: list[_RawComment],
    decl_index: list[tuple[str, str, int, int, tuple[int, int]]],
) -> tuple[list[CommentFacts], dict[str, CommentFacts]]:
    """Attach each comment to a declaration or scope.

    A comment that ends within two lines above a class/method declaration
    attaches to it (and becomes its doc comment candidate); otherwise the
    innermost enclosing method or class scope wins; otherwise 'file'.
    """
    decls = sorted(decl_index, key=lambda d: d[3])
    facts: list[CommentFacts] = []
    doc_candidates: dict[str, CommentFacts] = {}
    for raw in raw_comments:
        attachment = None
        target_qname = None
        best: tuple[int, int] | None = None
        for kind, qname, line, start_off, _span in decls:
            if start_off >= raw.end and 0 <= line - raw.end_line <= _ATTACH_WINDOW_LINES:
                cand = (line, start_off)
                if best is None or cand < best:
                    best = cand
                    target_qname = qname
                    attachment = f"{'class' if kind == 'class' else 'method'}:{qname}"
        if attachment is None:
            enclosing_method = None
            enclosing_class = None
            for kind, qname, _line, _start_off, (b0, b1) in decls:
                if b0 < raw.start and raw.end <= b1:
                    if kind == "method":
                        if enclosing_method is None or b0 > enclosing_method[1]:
                            enclosing_method = (qname, b0)
                    else:
                        if enclosing_class is None or b0 > enclosing_class[1]:
                            enclosing_class = (qname, b0)
            if enclosing_method is not None:
                attachment = f"inline:{enclosing_method[0]}"
            elif enclosing_class is not None:
                attachment = f"class:{enclosing_class[0]}"
            else:
                attachment = "file"
        fact = _comment_facts(raw, attachment)
        facts.append(fact)
        if target_qname is not None:
            # closest comment wins as the doc comment
            prev = doc_candidates.get(target_qname)
            if prev is None or fact.line_range > prev.line_range:
                doc_candidates[target_qname] = fact
    return facts, doc_candidates


def _attach_doc_comments(classes: tuple[ClassFacts, ...], docs: dict[str, CommentFacts], prefix: str = "") -> tuple[ClassFacts, ...]:
    out = []
    for cls in classes:
        qname = f"{prefix}.{cls.name}" if prefix else cls.name
        methods = tuple(
            MethodFacts(
                name=m.name,
                return_type=m.return_type,
                parameters=m.parameters,
                modifiers=m.modifiers,
                annotations=m.annotations,
                thrown_exceptions=m.thrown_exceptions,
                body_statements=m.body_statements,
                doc_comment=docs.get(f"{qname}.{m.name}"),
                byte_range=m.byte_range,
            )
            for m in cls.methods
        )
        out.append(
            ClassFacts(
                name=cls.name,
                kind=cls.kind,
                modifiers=cls.modifiers,
                annotations=cls.annotations,
                extends_types=cls.extends_types,
                implements_types=cls.implements_types,
                fields=cls.fields,
                methods=methods,
                inner_classes=_attach_doc_comments(cls.inner_classes, docs, qname),
                doc_comment=docs.get(qname),
                byte_range=cls.byte_range,
            )
        )
    return tuple(out)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def parse_java(source: str, path: str = "<memory>") -> SourceFacts:
    """Parse Java source text into declaration-level facts.

    Total over the supported subset; unrecognized body constructs degrade to
    StatementFacts of kind 'other'. Raises ParseError for unbalanced braces,
    unterminated comments/strings, duplicate declarations, or inputs without
    a type declaration.
    """
    tokens, raw_comments = _lex(source, lenient=False)
    depth = 0
    for t in tokens:
        if t.text == "{":
            depth += 1
        elif t.text == "}":
            depth -= 1
            if depth < 0:
                raise ParseError(t.line, f"unbalanced '}}' in {path}")
    if depth != 0:
        last_line = tokens[-1].line if tokens else 1
        raise ParseError(last_line, f"unbalanced '{{' in {path}")
    blanked = _blank_comments(source, raw_comments)
    parser = _Parser(tokens, source, blanked)
    package, imports, classes = parser.parse_unit()
    if not classes:
        raise ParseError(1, f"no type declaration in {path}")
    seen_qnames: set[str] = set()
    for kind, qname, line, _off, _span in parser.decl_index:
        if kind == "class":
            if qname in seen_qnames:
                raise ParseError(line, f"duplicate type declaration {qname} in {path}")
            seen_qnames.add(qname)
    comments, docs = _resolve_attachments(raw_comments, parser.decl_index)
    classes_t = _attach_doc_comments(tuple(classes), docs)
    return SourceFacts(
        package_name=package,
        imports=tuple(imports),
        classes=classes_t,
        comments=tuple(comments),
    )


def extract_comments(source: str) -> list[CommentFacts]:
    """Extract every comment from source text, with best-effort attachment.

    For parseable Java this reuses the full parser's attachment resolution.
    For anything else it degrades to a lenient lexical scan (string literals
    still never produce comments) with file-level attachment; an unterminated
    block comment runs to end of input and is logged.
    """
    try:
        return list(parse_java(source).comments)
    except ParseError:
        _tokens, raw_comments = _lex(source, lenient=True)
        return [_comment_facts(raw, "file") for raw in raw_comments]
