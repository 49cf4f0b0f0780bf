"""Gesture-label to command conversion, driven by a user-editable JSON
mapping file.

Lookup order: global bindings first, then mode-switch gestures, then the
current mode's local bindings. Unmatched labels produce no command and
bump a rejection counter.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .commands import Command, Mode, Scope, Verb, VERB_MODE, scope_for

logger = logging.getLogger(__name__)

MAPPING_FORMAT_VERSION = 1


class MappingError(ValueError):
    """Mapping file failed validation; message carries the location."""


@dataclass
class MappingRules:
    version: int
    global_bindings: dict[str, tuple[Verb, dict]]
    mode_switch: dict[str, Mode]
    modes: dict[Mode, dict[str, tuple[Verb, dict]]]
    unmatched: int = field(default=0, compare=False)

    def labels(self) -> set[str]:
        out = set(self.global_bindings) | set(self.mode_switch)
        for bindings in self.modes.values():
            out |= set(bindings)
        return out


def load_schema(name: str) -> dict:
    with resources.files("hgic.data.schemas").joinpath(name).open() as f:
        return json.load(f)


def load_mapping(path) -> MappingRules:
    """Parse and validate a mapping file.

    Raises:
        MappingError: malformed JSON (with line/column), schema violation
            (with JSON path), or a semantic conflict between sections.
    """
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise MappingError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    return parse_mapping(doc, origin=str(path))


def parse_mapping(doc: dict, origin: str = "<mapping>") -> MappingRules:
    schema = load_schema("mapping.schema.json")
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise MappingError(f"{origin}: at /{where}: {exc.message}") from exc
    if doc["version"] != MAPPING_FORMAT_VERSION:
        raise MappingError(f"{origin}: unsupported mapping version {doc['version']}")

    def parse_binding(label: str, spec: dict, where: str) -> tuple[Verb, dict]:
        try:
            verb = Verb(spec["verb"])
        except ValueError:
            raise MappingError(f"{origin}: {where}/{label}: unknown verb {spec['verb']!r}") from None
        return verb, dict(spec.get("args", {}))

    global_bindings = {
        lab: parse_binding(lab, spec, "global") for lab, spec in doc.get("global", {}).items()
    }
    for lab, (verb, _) in global_bindings.items():
        if scope_for(verb) is not Scope.GLOBAL:
            raise MappingError(
                f"{origin}: global/{lab}: verb {verb.value} is mode-local and cannot bind globally"
            )

    mode_switch: dict[str, Mode] = {}
    for lab, mode_name in doc.get("mode_switch", {}).items():
        try:
            mode_switch[lab] = Mode(mode_name)
        except ValueError:
            raise MappingError(f"{origin}: mode_switch/{lab}: unknown mode {mode_name!r}") from None

    collisions = set(global_bindings) & set(mode_switch)
    if collisions:
        raise MappingError(
            f"{origin}: labels bound both globally and as mode switches: {sorted(collisions)}"
        )

    modes: dict[Mode, dict[str, tuple[Verb, dict]]] = {}
    for mode_name, bindings in doc.get("modes", {}).items():
        try:
            mode = Mode(mode_name)
        except ValueError:
            raise MappingError(f"{origin}: modes/{mode_name}: unknown mode") from None
        parsed: dict[str, tuple[Verb, dict]] = {}
        for lab, spec in bindings.items():
            verb, args = parse_binding(lab, spec, f"modes/{mode_name}")
            if scope_for(verb) is Scope.GLOBAL:
                raise MappingError(
                    f"{origin}: modes/{mode_name}/{lab}: global verb {verb.value} belongs in "
                    f"the 'global' section"
                )
            if VERB_MODE[verb] is not mode:
                raise MappingError(
                    f"{origin}: modes/{mode_name}/{lab}: verb {verb.value} belongs to mode "
                    f"{VERB_MODE[verb].value}"
                )
            parsed[lab] = (verb, args)
        modes[mode] = parsed

    return MappingRules(
        version=doc["version"],
        global_bindings=global_bindings,
        mode_switch=mode_switch,
        modes=modes,
    )


def default_mapping() -> MappingRules:
    with resources.files("hgic.data").joinpath("default_mapping.json").open() as f:
        return parse_mapping(json.load(f), origin="default_mapping.json")


def convert(label: str, current_mode: Mode, rules: MappingRules) -> Command | None:
    """Resolve a fused gesture label into a command, or None if unbound.

    The caller stamps seq and issued_tick before dispatching.
    """
    if label in rules.global_bindings:
        verb, args = rules.global_bindings[label]
        return Command(verb=verb, mode=VERB_MODE[verb], scope=Scope.GLOBAL, args=dict(args))
    if label in rules.mode_switch:
        target = rules.mode_switch[label]
        return Command(
            verb=Verb.SWITCH_MODE,
            mode=target,
            scope=Scope.GLOBAL,
            args={"mode": target.value},
        )
    bindings = rules.modes.get(current_mode, {})
    if label in bindings:
        verb, args = bindings[label]
        return Command(verb=verb, mode=current_mode, scope=Scope.LOCAL, args=dict(args))
    rules.unmatched += 1
    logger.debug("gesture label %r has no binding in mode %s", label, current_mode.value)
    return None
