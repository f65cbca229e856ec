"""Parser for the Pamela-subset modeling DSL and model instantiation.

Supported grammar: `defpclass` forms with a params vector, a `:fields` map of
`pclass`/`lvar`/literal initializers, and a `:meta` attribute map. `;;`
comments run to end of line. Anything else (modes, methods, `...` elisions)
is rejected with an "unsupported form" error.

All functions are pure over immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ModelError, ParseError
from .model import (
    COMPONENT_KINDS,
    ComponentInstance,
    DependencyEdge,
    ENDPOINT_KINDS,
    SystemModel,
)

DEFAULT_KIND = "program"
_PUNCT = {"(": "(", ")": ")", "[": "[", "]": "]", "{": "{", "}": "}"}


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int


@dataclass(frozen=True)
class Token:
    kind: str  # punct | symbol | string | number
    text: str
    value: object
    span: SourceSpan


@dataclass(frozen=True)
class FieldInit:
    kind: str  # pclass-instantiation | lvar-binding | literal
    target: object  # class name, lvar label, or literal value
    args: tuple[str, ...] = ()
    span: SourceSpan = SourceSpan("<input>", 0, 0)


@dataclass
class PClassDef:
    name: str
    params: tuple[str, ...]
    fields: dict[str, FieldInit] = field(default_factory=dict)
    meta: dict[str, object] = field(default_factory=dict)
    span: SourceSpan = SourceSpan("<input>", 0, 0)


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r,":
            i += 1
            col += 1
            continue
        if ch == ";":  # ;; comment to end of line
            while i < n and source[i] != "\n":
                i += 1
            continue
        span = SourceSpan(file, line, col)
        if ch in _PUNCT:
            tokens.append(Token("punct", ch, ch, span))
            i += 1
            col += 1
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise ParseError("unterminated string", file, line, col)
                buf.append(source[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string", file, line, col)
            text = "".join(buf)
            tokens.append(Token("string", text, text, span))
            col += j - i + 1
            i = j + 1
            continue
        j = i
        while j < n and source[j] not in ' \t\r\n,;()[]{}"':
            j += 1
        word = source[i:j]
        col += j - i
        i = j
        try:
            tokens.append(Token("number", word, float(word), span))
        except ValueError:
            tokens.append(Token("symbol", word, word, span))
    return tokens


class _Reader:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.pos = 0
        self.file = file

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, context_span: SourceSpan | None = None) -> Token:
        token = self.peek()
        if token is None:
            span = context_span or SourceSpan(self.file, 1, 1)
            raise ParseError(
                "unbalanced delimiter: input ends inside an open form",
                self.file,
                span.line,
                span.column,
            )
        self.pos += 1
        return token

    def expect(self, text: str, context_span: SourceSpan) -> Token:
        token = self.next(context_span)
        if token.text != text:
            raise ParseError(
                f"expected {text!r}, got {token.text!r}",
                self.file,
                token.span.line,
                token.span.column,
            )
        return token


def _check_symbol(token: Token, file: str) -> str:
    if token.kind != "symbol":
        raise ParseError(
            f"expected identifier, got {token.text!r}",
            file,
            token.span.line,
            token.span.column,
        )
    if token.text == "...":
        raise ParseError(
            "unsupported form: '...' elision", file, token.span.line, token.span.column
        )
    return token.text


def _ref_name(token: Token, file: str) -> str:
    """Keywords (`:gps`) and bare identifiers both act as references."""
    name = _check_symbol(token, file)
    return name[1:] if name.startswith(":") else name


def _parse_field_init(reader: _Reader, file: str) -> FieldInit:
    token = reader.next()
    if token.kind in ("number", "string"):
        return FieldInit(kind="literal", target=token.value, span=token.span)
    if token.text != "(":
        raise ParseError(
            f"expected field initializer, got {token.text!r}",
            file,
            token.span.line,
            token.span.column,
        )
    head = reader.next(token.span)
    if head.text == "pclass":
        cls_token = reader.next(token.span)
        cls_name = _check_symbol(cls_token, file)
        if cls_name.startswith(":"):
            raise ParseError(
                "unsupported form: pclass class position must be a class name",
                file,
                cls_token.span.line,
                cls_token.span.column,
            )
        args = []
        while True:
            nxt = reader.next(token.span)
            if nxt.text == ")":
                break
            args.append(_ref_name(nxt, file))
        return FieldInit(kind="pclass-instantiation", target=cls_name, args=tuple(args), span=token.span)
    if head.text == "lvar":
        label_token = reader.next(token.span)
        if label_token.kind != "string" or not label_token.text:
            raise ParseError(
                "lvar label must be a nonempty string",
                file,
                label_token.span.line,
                label_token.span.column,
            )
        reader.expect(")", token.span)
        return FieldInit(kind="lvar-binding", target=label_token.text, span=token.span)
    raise ParseError(
        f"unsupported form: {head.text!r} initializer",
        file,
        head.span.line,
        head.span.column,
    )


def _parse_meta_value(reader: _Reader, file: str, open_span: SourceSpan):
    token = reader.next(open_span)
    if token.kind in ("number", "string"):
        return token.value
    if token.text == "[":
        values = []
        while True:
            nxt = reader.next(token.span)
            if nxt.text == "]":
                break
            if nxt.kind == "symbol":
                values.append(_check_symbol(nxt, file))
            else:
                values.append(nxt.value)
        return tuple(values)
    if token.kind == "symbol":
        return _check_symbol(token, file)
    raise ParseError(
        f"bad meta value {token.text!r}", file, token.span.line, token.span.column
    )


def _parse_map(reader: _Reader, file: str, what: str, parse_value) -> dict:
    open_token = reader.next()
    if open_token.text != "{":
        raise ParseError(
            f"malformed {what} map: expected {{, got {open_token.text!r}",
            file,
            open_token.span.line,
            open_token.span.column,
        )
    out: dict = {}
    spans: dict[str, SourceSpan] = {}
    while True:
        token = reader.next(open_token.span)
        if token.text == "}":
            return out
        key = _check_symbol(token, file)
        if not key.startswith(":"):
            raise ParseError(
                f"malformed {what} map: key {key!r} must be a keyword",
                file,
                token.span.line,
                token.span.column,
            )
        name = key[1:]
        if name in out:
            raise ParseError(
                f"duplicate {what} key {name!r}", file, token.span.line, token.span.column
            )
        spans[name] = token.span
        out[name] = parse_value(reader, file, token.span)


def _parse_defpclass(reader: _Reader, file: str, open_span: SourceSpan) -> PClassDef:
    name_token = reader.next(open_span)
    name = _check_symbol(name_token, file)
    bracket = reader.next(open_span)
    if bracket.text != "[":
        raise ParseError(
            "expected params vector [..]",
            file,
            bracket.span.line,
            bracket.span.column,
        )
    params: list[str] = []
    while True:
        token = reader.next(bracket.span)
        if token.text == "]":
            break
        param = _check_symbol(token, file)
        if param in params:
            raise ParseError(
                f"duplicate param {param!r}", file, token.span.line, token.span.column
            )
        params.append(param)

    definition = PClassDef(name=name, params=tuple(params), span=open_span)
    while True:
        token = reader.next(open_span)
        if token.text == ")":
            break
        key = _check_symbol(token, file)
        if key == ":fields":
            def parse_init(rd, f, _span):
                return _parse_field_init(rd, f)

            definition.fields = _parse_map(reader, file, "field", parse_init)
        elif key == ":meta":
            definition.meta = _parse_map(reader, file, "meta", _parse_meta_value)
        else:
            raise ParseError(
                f"unsupported form: {key!r} in defpclass body",
                file,
                token.span.line,
                token.span.column,
            )

    # References must resolve to a param, a previously declared field, or self.
    visible = set(params) | {"self"}
    for field_name, init in definition.fields.items():
        if init.kind == "pclass-instantiation":
            for ref in init.args:
                if ref not in visible:
                    raise ParseError(
                        f"unresolved reference {ref!r} in field {field_name!r} of {name}",
                        file,
                        init.span.line,
                        init.span.column,
                    )
        visible.add(field_name)
    return definition


def parse(source: str, file: str = "<input>") -> list[PClassDef]:
    """Parse Pamela source text into one PClassDef per defpclass form."""
    reader = _Reader(tokenize(source, file), file)
    defs: list[PClassDef] = []
    seen: set[str] = set()
    while True:
        token = reader.peek()
        if token is None:
            return defs
        reader.next()
        if token.text != "(":
            raise ParseError(
                f"expected top-level form, got {token.text!r}",
                file,
                token.span.line,
                token.span.column,
            )
        head = reader.next(token.span)
        if head.text != "defpclass":
            raise ParseError(
                f"unknown top-level form {head.text!r}",
                file,
                head.span.line,
                head.span.column,
            )
        definition = _parse_defpclass(reader, file, token.span)
        if definition.name in seen:
            raise ParseError(
                f"duplicate class name {definition.name!r}",
                file,
                definition.span.line,
                definition.span.column,
            )
        seen.add(definition.name)
        defs.append(definition)


# ---------------------------------------------------------------------------
# Instantiation


class _LvarCell:
    """Shared placeholder for one lvar label within an instantiation tree."""

    def __init__(self, label: str):
        self.label = label
        self.binding: "_Instance | None" = None


class _Instance:
    def __init__(self, instance_id: str, definition: PClassDef, parent: "_Instance | None"):
        self.id = instance_id
        self.definition = definition
        self.parent = parent
        self.args: list[object] = []  # _Instance or _LvarCell
        self.literals: list[tuple[str, object]] = []

    @property
    def kind(self) -> str:
        return str(self.definition.meta.get("kind", DEFAULT_KIND))


def _meta_number(definition: PClassDef, key: str) -> float | None:
    value = definition.meta.get(key)
    if value is None:
        return None
    if not isinstance(value, float):
        raise ModelError(f"class {definition.name}: meta {key} must be a number")
    return value


def _build_component(inst: _Instance) -> ComponentInstance:
    meta = dict(inst.definition.meta)
    kind = str(meta.pop("kind", DEFAULT_KIND))
    if kind not in COMPONENT_KINDS:
        raise ModelError(f"component {inst.id}: unknown kind {kind!r}")
    mtbf = _meta_number(inst.definition, "mtbf-hours")
    meta.pop("mtbf-hours", None)
    defect = _meta_number(inst.definition, "defect-rate")
    meta.pop("defect-rate", None)
    importance = _meta_number(inst.definition, "importance") or 1.0
    meta.pop("importance", None)
    exposure = meta.pop("exposure", ())
    if isinstance(exposure, str):
        exposure = (exposure,)
    attrs = []
    for key, value in meta.items():
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        attrs.append((key, value))
    attrs.extend(inst.literals)
    return ComponentInstance(
        id=inst.id,
        cls=inst.definition.name,
        kind=kind,
        mtbf_hours=mtbf,
        defect_rate=defect,
        exposure=frozenset(exposure),
        importance=importance,
        attrs=tuple(sorted(attrs)),
    )


def instantiate(defs, root: str) -> SystemModel:
    """Build the wired SystemModel for the named root class.

    Every pclass field becomes one component (recursively). lvar bindings
    with the same label within the tree denote the same shared resource; a
    unique network-kind instance constructed with an lvar among its arguments
    claims it, otherwise the lvar stays a shared placeholder component.
    """
    classes: dict[str, PClassDef] = {}
    for definition in defs:
        classes[definition.name] = definition
    if root not in classes:
        raise ModelError(f"unknown class {root!r}")

    lvars: dict[str, _LvarCell] = {}
    instances: list[_Instance] = []
    bindings: dict[str, object] = {}

    def visit(definition: PClassDef, instance_id: str, args: list, path: tuple[str, ...],
              parent: _Instance | None, prefix: str) -> _Instance:
        if definition.name in path:
            cycle = " -> ".join(path + (definition.name,))
            raise ModelError(f"instantiation cycle: {cycle}")
        if len(args) != len(definition.params):
            raise ModelError(
                f"arity mismatch: {definition.name} takes {len(definition.params)} "
                f"args, got {len(args)}"
            )
        inst = _Instance(instance_id, definition, parent)
        inst.args = list(args)
        instances.append(inst)
        env: dict[str, object] = dict(zip(definition.params, args))
        env["self"] = inst
        for field_name, init in definition.fields.items():
            if init.kind == "literal":
                inst.literals.append((field_name, init.target))
                continue
            field_path = f"{prefix}{field_name}"
            if init.kind == "lvar-binding":
                cell = lvars.setdefault(str(init.target), _LvarCell(str(init.target)))
                env[field_name] = cell
                bindings[field_path] = cell
                continue
            cls_name = str(init.target)
            if cls_name not in classes:
                raise ModelError(f"unknown class {cls_name!r} in field {field_name!r}")
            resolved = []
            for ref in init.args:
                if ref not in env:
                    raise ModelError(f"unresolved reference {ref!r} in {definition.name}")
                resolved.append(env[ref])
            child = visit(
                classes[cls_name],
                field_name,
                resolved,
                path + (definition.name,),
                inst,
                f"{field_path}.",
            )
            env[field_name] = child
            bindings[field_path] = child
        return inst

    root_def = classes[root]
    wires = any(i.kind != "literal" for i in root_def.fields.values())
    if wires:
        # A wiring class: its fields are the model's components and shared
        # resources, the class itself is just the assembly container.
        root_inst = visit(root_def, root, [], (), None, "")
        instances.remove(root_inst)
    else:
        visit(root_def, root, [], (), None, "")

    # Resolve lvars: a unique network-kind claimant becomes the shared
    # instance; an unclaimed lvar stays behind as a placeholder component.
    placeholder_defs: dict[str, PClassDef] = {}
    for label, cell in sorted(lvars.items()):
        claimants = [
            inst for inst in instances
            if inst.kind == "network" and any(arg is cell for arg in inst.args)
        ]
        if len(claimants) > 1:
            ids = ", ".join(sorted(i.id for i in claimants))
            raise ModelError(f"lvar {label!r} claimed by multiple networks: {ids}")
        if claimants:
            cell.binding = claimants[0]
        else:
            definition = PClassDef(
                name="shared-resource", params=(), meta={"kind": "network"}
            )
            placeholder = _Instance(label, definition, None)
            placeholder_defs[label] = definition
            instances.append(placeholder)
            cell.binding = placeholder

    def resolve(value) -> _Instance:
        return value.binding if isinstance(value, _LvarCell) else value

    components: dict[int, ComponentInstance] = {}
    seen_ids: set[str] = set()
    for inst in instances:
        if inst.id in seen_ids:
            raise ModelError(f"duplicate component id {inst.id!r}")
        seen_ids.add(inst.id)
        components[id(inst)] = _build_component(inst)

    edges: set[DependencyEdge] = set()
    for inst in instances:
        comp_kind = inst.kind
        if inst.parent is not None and inst.parent.kind == "board":
            if comp_kind in ("program", "server"):
                edges.add(DependencyEdge(inst.id, "hosted-on", inst.parent.id))
        for raw in inst.args:
            arg = resolve(raw)
            if arg is inst:
                continue
            arg_kind = arg.kind
            if arg_kind == "network":
                if comp_kind in ENDPOINT_KINDS:
                    edges.add(DependencyEdge(inst.id, "communicates-over", arg.id))
            elif arg_kind == "board":
                if comp_kind in ("program", "server"):
                    edges.add(DependencyEdge(inst.id, "hosted-on", arg.id))
            elif arg_kind == "actuator":
                if comp_kind in ("program", "server", "station"):
                    edges.add(DependencyEdge(inst.id, "controls", arg.id))
            elif arg_kind in ("sensor", "station", "program", "server"):
                if comp_kind in ("program", "server", "station"):
                    edges.add(DependencyEdge(inst.id, "reads-from", arg.id))

    resolved_bindings = {
        path: components[id(resolve(value))] for path, value in bindings.items()
    }
    return SystemModel(
        name=root,
        components=tuple(sorted(components.values(), key=lambda c: c.id)),
        edges=frozenset(edges),
        bindings=resolved_bindings,
    )


def load_model(source: str, root: str | None = None, file: str = "<input>") -> SystemModel:
    """Parse source text and instantiate it. Without an explicit root, the
    last defpclass in the file (the wiring class, by convention) is used."""
    defs = parse(source, file)
    if not defs:
        raise ModelError("no class definitions in input")
    return instantiate(defs, root or defs[-1].name)
