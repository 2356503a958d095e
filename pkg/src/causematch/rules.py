"""Publisher rule packs: parsing, list compilation, and forward chaining.

The rule file format is line oriented so that non-engineers can write and
review packs:

    rule min-words publisher * salience 10
    when article.word_count lt 100
    then set_show hide
    then stop
    end

Evaluation uses agenda semantics with deterministic conflict resolution:
candidates are the enabled rules (all conditions hold against working
memory), fired in descending salience then ascending rule id, each rule at
most once (refraction).  ``assert_fact`` extends working memory and reopens
the agenda; ``stop`` halts after the current rule's actions complete.
Refraction bounds any evaluation at one firing per rule.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fnmatch import fnmatchcase

from .errors import Diagnostic, FactTypeError, ParseError, ValidationError

Value = str | int | float | bool | list[str]

SHOW_UNSET = "unset"
SHOW_SHOW = "show"
SHOW_HIDE = "hide"

BLACKLIST_SALIENCE = 100
SAFELIST_SALIENCE = 50
SAFELIST_DEFAULT_SALIENCE = -100

OPS = frozenset(
    {
        "equals", "not_equals", "contains", "matches_glob", "matches_regex",
        "lt", "gte", "exists", "absent",
    }
)
_NO_OPERAND_OPS = frozenset({"exists", "absent"})
_NUMERIC_OPS = frozenset({"lt", "gte"})
_PATTERN_OPS = frozenset({"matches_glob", "matches_regex"})

# Core pipeline facts with fixed types; conditions on them are checked at
# parse time.  Unknown keys are publisher-specific and stay unchecked.
KNOWN_KEY_TYPES: dict[str, str] = {
    "article.word_count": "number",
    "article.title": "string",
    "article.tags": "string_list",
    "article.meta.section": "string",
    "article.geo.places": "string_list",
    "url.full": "string",
    "url.host": "string",
    "url.path": "string",
    "advice.show": "string",
    "advice.entities": "string_list",
    "user.logged_in": "boolean",
    "user.geo.country": "string",
    "user.geo.region": "string",
    "user.geo.locality": "string",
    "user.session_actions": "string_list",
    "publisher": "string",
}


@dataclass(frozen=True)
class Fact:
    key: str
    value: Value
    derived_by: str | None = None  # id of the asserting rule; None = input fact


@dataclass(frozen=True)
class Condition:
    key: str
    op: str
    operand: Value | None = None


@dataclass(frozen=True)
class Action:
    kind: str  # set_show | add_entity | remove_entity | assert_fact | stop
    target: str = ""  # show/hide, entity id, or fact key
    value: Value | None = None  # assert_fact literal


@dataclass(frozen=True)
class Rule:
    id: str
    conditions: tuple[Condition, ...]
    actions: tuple[Action, ...]
    publisher: str = "*"
    salience: int = 0
    line: int = 0


@dataclass
class AdviceState:
    """Result of one evaluation: show flag, entity refs, and the firing trace."""

    show: str = SHOW_UNSET
    entity_refs: list[tuple[str, str]] = field(default_factory=list)
    trace: list[tuple[str, str]] = field(default_factory=list)

    def entity_ids(self) -> list[str]:
        return [eid for eid, _ in self.entity_refs]


class RuleSet:
    def __init__(self, rules: list[Rule] | tuple[Rule, ...] = ()):
        self.rules: tuple[Rule, ...] = tuple(rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def merge(self, other: "RuleSet") -> "RuleSet":
        merged = list(self.rules) + list(other.rules)
        seen: dict[str, Rule] = {}
        diagnostics = []
        for rule in merged:
            if rule.id in seen:
                diagnostics.append(
                    Diagnostic(rule.line, f"duplicate rule id {rule.id!r} in merged set")
                )
            seen[rule.id] = rule
        if diagnostics:
            raise ValidationError(diagnostics)
        return RuleSet(merged)

    def for_publisher(self, publisher: str) -> list[Rule]:
        return [r for r in self.rules if r.publisher in ("*", publisher)]


# -- parsing -------------------------------------------------------------------

_TOKEN_RE = re.compile(r'"(?:[^"\\]|\\.)*"|\S+')
_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")


def _split_line(line: str, lineno: int) -> list[str]:
    tokens = _TOKEN_RE.findall(line)
    for tok in tokens:
        if tok.startswith('"') and (len(tok) < 2 or not tok.endswith('"')):
            raise ParseError(lineno, f"unterminated string literal {tok!r}")
    return tokens


def _parse_literal(token: str, lineno: int) -> Value:
    if token.startswith('"'):
        try:
            return json.loads(token)
        except json.JSONDecodeError:
            raise ParseError(lineno, f"bad string literal {token}") from None
    if token == "true":
        return True
    if token == "false":
        return False
    if _NUMBER_RE.match(token):
        return float(token) if "." in token else int(token)
    raise ParseError(
        lineno, f"expected a quoted string, number, or true/false, got {token!r}"
    )


def format_literal(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return json.dumps(value, ensure_ascii=False)


def _is_number(value: object) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _validate_condition(cond: Condition, lineno: int, diagnostics: list[Diagnostic]) -> None:
    if cond.op not in OPS:
        diagnostics.append(Diagnostic(lineno, f"unknown op {cond.op!r}"))
        return
    if cond.op in _NO_OPERAND_OPS:
        if cond.operand is not None:
            diagnostics.append(Diagnostic(lineno, f"op {cond.op} takes no operand"))
        return
    if cond.operand is None:
        diagnostics.append(Diagnostic(lineno, f"op {cond.op} requires an operand"))
        return
    if cond.op in _NUMERIC_OPS and not _is_number(cond.operand):
        diagnostics.append(
            Diagnostic(lineno, f"op {cond.op} requires a numeric operand")
        )
    if cond.op in _PATTERN_OPS and not isinstance(cond.operand, str):
        diagnostics.append(
            Diagnostic(lineno, f"op {cond.op} requires a string operand")
        )
    if cond.op == "matches_regex" and isinstance(cond.operand, str):
        try:
            re.compile(cond.operand)
        except re.error as exc:
            diagnostics.append(Diagnostic(lineno, f"bad regex: {exc}"))
    if cond.op == "contains" and not isinstance(cond.operand, str):
        diagnostics.append(Diagnostic(lineno, "op contains requires a string operand"))

    key_type = KNOWN_KEY_TYPES.get(cond.key)
    if key_type is None:
        return
    if cond.op in _NUMERIC_OPS and key_type != "number":
        diagnostics.append(
            Diagnostic(lineno, f"op {cond.op} cannot apply to {key_type} fact {cond.key}")
        )
    if cond.op in _PATTERN_OPS and key_type != "string":
        diagnostics.append(
            Diagnostic(lineno, f"op {cond.op} cannot apply to {key_type} fact {cond.key}")
        )
    if cond.op == "contains" and key_type not in ("string", "string_list"):
        diagnostics.append(
            Diagnostic(lineno, f"op contains cannot apply to {key_type} fact {cond.key}")
        )
    if cond.op in ("equals", "not_equals") and cond.operand is not None:
        operand_type = (
            "boolean"
            if isinstance(cond.operand, bool)
            else "number"
            if _is_number(cond.operand)
            else "string"
        )
        if key_type in ("number", "string", "boolean") and key_type != operand_type:
            diagnostics.append(
                Diagnostic(
                    lineno,
                    f"op {cond.op} compares {operand_type} operand to {key_type} fact {cond.key}",
                )
            )


_ACTION_KINDS = frozenset({"set_show", "add_entity", "remove_entity", "assert_fact", "stop"})


def _parse_action(tokens: list[str], lineno: int, diagnostics: list[Diagnostic]) -> Action | None:
    kind = tokens[0]
    if kind not in _ACTION_KINDS:
        diagnostics.append(Diagnostic(lineno, f"unknown action {kind!r}"))
        return None
    if kind == "stop":
        if len(tokens) != 1:
            diagnostics.append(Diagnostic(lineno, "stop takes no arguments"))
        return Action("stop")
    if kind == "set_show":
        if len(tokens) != 2 or tokens[1] not in (SHOW_SHOW, SHOW_HIDE):
            diagnostics.append(Diagnostic(lineno, "set_show requires show or hide"))
            return None
        return Action("set_show", tokens[1])
    if kind in ("add_entity", "remove_entity"):
        if len(tokens) != 2:
            diagnostics.append(Diagnostic(lineno, f"{kind} requires an entity id"))
            return None
        return Action(kind, tokens[1])
    # assert_fact <key> <literal>
    if len(tokens) != 3:
        diagnostics.append(Diagnostic(lineno, "assert_fact requires a key and a literal"))
        return None
    value = _parse_literal(tokens[2], lineno)
    return Action("assert_fact", tokens[1], value)


def parse_rules(text: str) -> RuleSet:
    """Parse rule file content into a validated RuleSet.

    Structural problems raise :class:`ParseError` immediately with the line
    number.  Semantic problems (duplicate ids, unknown ops, operand type
    mismatches, empty condition or action lists) are collected across the
    whole file and raised together as :class:`ValidationError`.
    """
    rules: list[Rule] = []
    diagnostics: list[Diagnostic] = []
    seen_ids: dict[str, int] = {}

    current: dict | None = None
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = _split_line(line, lineno)
        keyword = tokens[0]

        if keyword == "rule":
            if current is not None:
                raise ParseError(lineno, "rule block opened before previous 'end'")
            if len(tokens) < 4 or tokens[2] != "publisher":
                raise ParseError(lineno, "expected: rule <id> publisher <id|*> [salience <int>]")
            salience = 0
            if len(tokens) == 4:
                pass
            elif len(tokens) == 6 and tokens[4] == "salience":
                try:
                    salience = int(tokens[5])
                except ValueError:
                    raise ParseError(lineno, f"salience must be an integer, got {tokens[5]!r}") from None
            else:
                raise ParseError(lineno, "expected: rule <id> publisher <id|*> [salience <int>]")
            current = {
                "id": tokens[1],
                "publisher": tokens[3],
                "salience": salience,
                "conditions": [],
                "actions": [],
                "line": lineno,
            }
        elif keyword == "when":
            if current is None:
                raise ParseError(lineno, "'when' outside a rule block")
            if len(tokens) < 3:
                raise ParseError(lineno, "expected: when <key> <op> [operand]")
            operand = _parse_literal(tokens[3], lineno) if len(tokens) > 3 else None
            if len(tokens) > 4:
                raise ParseError(lineno, "trailing tokens after condition operand")
            cond = Condition(tokens[1], tokens[2], operand)
            _validate_condition(cond, lineno, diagnostics)
            current["conditions"].append(cond)
        elif keyword == "then":
            if current is None:
                raise ParseError(lineno, "'then' outside a rule block")
            if len(tokens) < 2:
                raise ParseError(lineno, "expected: then <action> [args]")
            action = _parse_action(tokens[1:], lineno, diagnostics)
            if action is not None:
                current["actions"].append(action)
        elif keyword == "end":
            if current is None:
                raise ParseError(lineno, "'end' outside a rule block")
            rule_id = current["id"]
            if rule_id in seen_ids:
                diagnostics.append(
                    Diagnostic(
                        current["line"],
                        f"duplicate rule id {rule_id!r} "
                        f"(lines {seen_ids[rule_id]} and {current['line']})",
                    )
                )
            else:
                seen_ids[rule_id] = current["line"]
            if not current["conditions"]:
                diagnostics.append(
                    Diagnostic(current["line"], f"rule {rule_id!r} has no conditions")
                )
            if not current["actions"]:
                diagnostics.append(
                    Diagnostic(current["line"], f"rule {rule_id!r} has no actions")
                )
            rules.append(
                Rule(
                    id=rule_id,
                    conditions=tuple(current["conditions"]),
                    actions=tuple(current["actions"]),
                    publisher=current["publisher"],
                    salience=current["salience"],
                    line=current["line"],
                )
            )
            current = None
        else:
            raise ParseError(lineno, f"unexpected keyword {keyword!r}")

    if current is not None:
        raise ParseError(current["line"], f"rule {current['id']!r} missing 'end'")
    if diagnostics:
        raise ValidationError(diagnostics)
    return RuleSet(rules)


def format_rules(ruleset: RuleSet) -> str:
    """Canonical text form; parse(format(parse(x))) round-trips."""
    lines: list[str] = []
    for rule in ruleset:
        lines.append(f"rule {rule.id} publisher {rule.publisher} salience {rule.salience}")
        for cond in rule.conditions:
            if cond.operand is None:
                lines.append(f"when {cond.key} {cond.op}")
            else:
                lines.append(f"when {cond.key} {cond.op} {format_literal(cond.operand)}")
        for action in rule.actions:
            if action.kind == "stop":
                lines.append("then stop")
            elif action.kind == "assert_fact":
                lines.append(
                    f"then assert_fact {action.target} {format_literal(action.value)}"
                )
            else:
                lines.append(f"then {action.kind} {action.target}")
        lines.append("end")
        lines.append("")
    return "\n".join(lines)


def compile_lists(blacklist: list[str], safelist: list[str], publisher: str) -> RuleSet:
    """Expand publisher blacklist/safelist tags into rules.

    Blacklist rules hide and stop at salience 100; safelist rules show at
    salience 50, with a salience -100 default that hides anything the
    safelist did not match.  Blacklist therefore always beats safelist.
    """
    rules: list[Rule] = []
    for tag in blacklist:
        tag = tag.strip().lower()
        if not tag:
            continue
        rules.append(
            Rule(
                id=f"blacklist:{tag}",
                conditions=(Condition("article.tags", "contains", tag),),
                actions=(Action("set_show", SHOW_HIDE), Action("stop")),
                publisher=publisher,
                salience=BLACKLIST_SALIENCE,
            )
        )
    cleaned_safelist = [t.strip().lower() for t in safelist if t.strip()]
    for tag in cleaned_safelist:
        rules.append(
            Rule(
                id=f"safelist:{tag}",
                conditions=(Condition("article.tags", "contains", tag),),
                actions=(Action("set_show", SHOW_SHOW),),
                publisher=publisher,
                salience=SAFELIST_SALIENCE,
            )
        )
    if cleaned_safelist:
        rules.append(
            Rule(
                id="safelist:default",
                conditions=(Condition("advice.show", "absent"),),
                actions=(Action("set_show", SHOW_HIDE),),
                publisher=publisher,
                salience=SAFELIST_DEFAULT_SALIENCE,
            )
        )
    return RuleSet(rules)


# -- evaluation ----------------------------------------------------------------


def _check_condition(cond: Condition, memory: dict[str, Fact], strict: bool) -> bool:
    fact = memory.get(cond.key)
    if cond.op == "absent":
        return fact is None
    if cond.op == "exists":
        return fact is not None
    if fact is None:
        return False

    value = fact.value
    operand = cond.operand

    def mismatch(detail: str) -> bool:
        if strict:
            raise FactTypeError(f"{cond.key} {cond.op}: {detail}")
        return False

    if cond.op in ("equals", "not_equals"):
        if isinstance(value, bool) != isinstance(operand, bool):
            return mismatch("boolean compared to non-boolean")
        if isinstance(value, list):
            return mismatch("list fact has no equality operand form")
        if _is_number(value) != _is_number(operand):
            return mismatch(f"{type(value).__name__} compared to {type(operand).__name__}")
        if isinstance(value, str) != isinstance(operand, str):
            return mismatch(f"{type(value).__name__} compared to {type(operand).__name__}")
        return (value == operand) if cond.op == "equals" else (value != operand)
    if cond.op == "contains":
        if not isinstance(operand, str):
            return mismatch("contains needs a string operand")
        if isinstance(value, list):
            return operand in value
        if isinstance(value, str):
            return operand in value
        return mismatch("contains applies to strings and string lists")
    if cond.op == "matches_glob":
        if not isinstance(value, str) or not isinstance(operand, str):
            return mismatch("glob match applies to strings")
        return fnmatchcase(value, operand)
    if cond.op == "matches_regex":
        if not isinstance(value, str) or not isinstance(operand, str):
            return mismatch("regex match applies to strings")
        return re.search(operand, value) is not None
    if cond.op in ("lt", "gte"):
        if not _is_number(value) or not _is_number(operand):
            return mismatch("numeric comparison on non-numbers")
        return value < operand if cond.op == "lt" else value >= operand
    raise FactTypeError(f"unknown op {cond.op!r}")  # unreachable after validation


def _sync_advice_facts(state: AdviceState, memory: dict[str, Fact], rule_id: str) -> None:
    if state.show == SHOW_UNSET:
        memory.pop("advice.show", None)
    else:
        memory["advice.show"] = Fact("advice.show", state.show, derived_by=rule_id)
    memory["advice.entities"] = Fact("advice.entities", state.entity_ids(), derived_by=rule_id)


def evaluate(
    ruleset: RuleSet,
    facts: dict[str, Value] | list[Fact],
    publisher: str,
    strict: bool = False,
) -> AdviceState:
    """Run forward chaining over the publisher's rules and the shared ones.

    Never mutates its inputs.  With ``strict`` false (the default), a
    condition comparing incompatible types is simply false; strict mode
    raises :class:`FactTypeError`.
    """
    if isinstance(facts, dict):
        memory = {key: Fact(key, value) for key, value in facts.items()}
    else:
        memory = {fact.key: fact for fact in facts}
    memory.setdefault("advice.entities", Fact("advice.entities", [], derived_by="init"))

    state = AdviceState()
    candidates_pool = ruleset.for_publisher(publisher)
    fired: set[str] = set()

    while True:
        enabled = [
            rule
            for rule in candidates_pool
            if rule.id not in fired
            and all(_check_condition(c, memory, strict) for c in rule.conditions)
        ]
        if not enabled:
            break
        enabled.sort(key=lambda r: (-r.salience, r.id))
        rule = enabled[0]
        fired.add(rule.id)

        stop_requested = False
        for action in rule.actions:
            if action.kind == "set_show":
                state.show = action.target
                state.trace.append((rule.id, f"set_show {action.target}"))
                _sync_advice_facts(state, memory, rule.id)
            elif action.kind == "add_entity":
                if action.target not in state.entity_ids():
                    state.entity_refs.append((action.target, "rule"))
                state.trace.append((rule.id, f"add_entity {action.target}"))
                _sync_advice_facts(state, memory, rule.id)
            elif action.kind == "remove_entity":
                state.entity_refs = [
                    (eid, src) for eid, src in state.entity_refs if eid != action.target
                ]
                state.trace.append((rule.id, f"remove_entity {action.target}"))
                _sync_advice_facts(state, memory, rule.id)
            elif action.kind == "assert_fact":
                existing = memory.get(action.target)
                if existing is not None and existing.derived_by is None:
                    # Input facts are immutable; the attempt is recorded, not applied.
                    state.trace.append(
                        (rule.id, f"assert_fact {action.target} skipped (input fact)")
                    )
                else:
                    memory[action.target] = Fact(
                        action.target, action.value, derived_by=rule.id
                    )
                    state.trace.append(
                        (
                            rule.id,
                            f"assert_fact {action.target}={format_literal(action.value)}",
                        )
                    )
            elif action.kind == "stop":
                state.trace.append((rule.id, "stop"))
                stop_requested = True
        if stop_requested:
            break

    return state
