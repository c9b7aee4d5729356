"""QBAF data model, JSON (de)serialization and structural checks."""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import QbafSyntaxError, SchemaError

log = logging.getLogger(__name__)

ArgumentId = str
Edge = tuple[str, str]
BaseScoreFn = Mapping[str, float]

ATTACK = -1
SUPPORT = 1


@dataclass(frozen=True, eq=False)
class GraphIndex:
    """Integer view of a QBAF's relations, shared by every QBAF with the same structure.

    Incoming edges are stored in CSR form (``in_ptr``/``in_src``/``in_sign``)
    which is what the evaluation kernels consume.
    """

    ids: tuple[str, ...]
    pos: Mapping[str, int]
    in_ptr: np.ndarray
    in_src: np.ndarray
    in_sign: np.ndarray
    succ: tuple[tuple[tuple[int, int], ...], ...]
    pred: tuple[tuple[tuple[int, int], ...], ...]
    topo: np.ndarray | None

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def acyclic(self) -> bool:
        return self.topo is not None

    def ancestors(self, target: int) -> np.ndarray:
        """Boolean mask of nodes with a path to ``target`` (``target`` included)."""
        seen = np.zeros(self.n, dtype=bool)
        seen[target] = True
        queue = deque([target])
        while queue:
            v = queue.popleft()
            for u, _ in self.pred[v]:
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)
        return seen

    def descendants(self, source: int) -> np.ndarray:
        """Boolean mask of nodes reachable from ``source`` (``source`` included)."""
        seen = np.zeros(self.n, dtype=bool)
        seen[source] = True
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v, _ in self.succ[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return seen


def _build_index(arguments: tuple[str, ...], attacks: frozenset, supports: frozenset) -> GraphIndex:
    pos = {a: i for i, a in enumerate(arguments)}
    n = len(arguments)
    succ: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    pred: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    edges = sorted([(s, t, ATTACK) for s, t in attacks] + [(s, t, SUPPORT) for s, t in supports])
    for s, t, sign in edges:
        i, j = pos[s], pos[t]
        succ[i].append((j, sign))
        pred[j].append((i, sign))

    in_ptr = np.zeros(n + 1, dtype=np.int64)
    for j in range(n):
        in_ptr[j + 1] = in_ptr[j] + len(pred[j])
    in_src = np.fromiter((i for j in range(n) for i, _ in pred[j]), dtype=np.int64, count=int(in_ptr[-1]))
    in_sign = np.fromiter((s for j in range(n) for _, s in pred[j]), dtype=np.int8, count=int(in_ptr[-1]))

    # Kahn's algorithm; a leftover node means a directed cycle (self-loops included).
    indeg = [len(p) for p in pred]
    queue = deque(i for i in range(n) if indeg[i] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v, _ in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    topo = np.asarray(order, dtype=np.int64) if len(order) == n else None

    return GraphIndex(
        ids=arguments,
        pos=MappingProxyType(pos),
        in_ptr=in_ptr,
        in_src=in_src,
        in_sign=in_sign,
        succ=tuple(tuple(s) for s in succ),
        pred=tuple(tuple(p) for p in pred),
        topo=topo,
    )


@dataclass(frozen=True)
class Qbaf:
    """Arguments, attack and support relations, and a base score per argument.

    Instances are immutable; :meth:`with_scores` derives a new QBAF that shares
    the structural index with this one.
    """

    arguments: tuple[str, ...]
    attacks: frozenset[Edge]
    supports: frozenset[Edge]
    base_scores: Mapping[str, float] = field(compare=True)

    def __post_init__(self) -> None:
        args = tuple(sorted(self.arguments))
        if len(set(args)) != len(args):
            dup = sorted({a for a in args if args.count(a) > 1})
            raise SchemaError(f"duplicate argument id(s): {dup}")
        for a in args:
            if not isinstance(a, str) or not a:
                raise SchemaError(f"argument id must be a non-empty string, got {a!r}")
        known = set(args)
        attacks = frozenset(tuple(e) for e in self.attacks)
        supports = frozenset(tuple(e) for e in self.supports)
        for kind, rel in (("attack", attacks), ("support", supports)):
            for e in rel:
                if len(e) != 2:
                    raise SchemaError(f"{kind} {e!r} is not a pair")
                for end in e:
                    if end not in known:
                        raise SchemaError(f"{kind} {e!r} refers to unknown argument {end!r}")
                if e[0] == e[1]:
                    log.warning("self-loop %s %r accepted", kind, e)
        both = attacks & supports
        if both:
            raise SchemaError(f"relation(s) both attack and support: {sorted(both)}")
        scores = dict(self.base_scores)
        missing = known - scores.keys()
        if missing:
            raise SchemaError(f"missing base score for {sorted(missing)}")
        extra = scores.keys() - known
        if extra:
            raise SchemaError(f"base score given for unknown argument(s) {sorted(extra)}")
        clean = {}
        for a in args:
            v = scores[a]
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise SchemaError(f"base score of {a!r} is not a number: {v!r}")
            v = float(v)
            if not (0.0 <= v <= 1.0):
                raise SchemaError(f"base score of {a!r} outside [0,1]: {v!r}")
            clean[a] = v
        object.__setattr__(self, "arguments", args)
        object.__setattr__(self, "attacks", attacks)
        object.__setattr__(self, "supports", supports)
        object.__setattr__(self, "base_scores", MappingProxyType(clean))

    @classmethod
    def build(
        cls,
        base_scores: Mapping[str, float],
        attacks: Iterable[Edge] = (),
        supports: Iterable[Edge] = (),
    ) -> "Qbaf":
        return cls(tuple(base_scores), frozenset(attacks), frozenset(supports), base_scores)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Qbaf):
            return NotImplemented
        return (
            self.arguments == other.arguments
            and self.attacks == other.attacks
            and self.supports == other.supports
            and dict(self.base_scores) == dict(other.base_scores)
        )

    def __hash__(self) -> int:
        return hash((self.arguments, self.attacks, self.supports))

    def __len__(self) -> int:
        return len(self.arguments)

    @cached_property
    def index(self) -> GraphIndex:
        return _build_index(self.arguments, self.attacks, self.supports)

    def tau_array(self) -> np.ndarray:
        """Base scores as a float64 array in ``index.ids`` order."""
        return np.array([self.base_scores[a] for a in self.arguments], dtype=np.float64)

    def with_scores(self, scores: Mapping[str, float] | np.ndarray) -> "Qbaf":
        """Same structure, different base score function."""
        if isinstance(scores, np.ndarray):
            scores = dict(zip(self.arguments, scores.tolist()))
        new = Qbaf(self.arguments, self.attacks, self.supports, scores)
        # share the structural index; cached_property stores into __dict__
        if "index" in self.__dict__:
            new.__dict__["index"] = self.__dict__["index"]
        return new

    def attackers(self, a: str) -> list[str]:
        return sorted(s for s, t in self.attacks if t == a)

    def supporters(self, a: str) -> list[str]:
        return sorted(s for s, t in self.supports if t == a)

    def edge_sign(self, s: str, t: str) -> int | None:
        if (s, t) in self.attacks:
            return ATTACK
        if (s, t) in self.supports:
            return SUPPORT
        return None


def is_acyclic(q: Qbaf) -> bool:
    """True iff attacks and supports together contain no directed cycle."""
    return q.index.acyclic


def parse_qbaf(text: str | bytes) -> Qbaf:
    """Parse a QBAF JSON document and validate it."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise QbafSyntaxError(f"document is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QbafSyntaxError(f"malformed JSON: {exc}") from exc
    return qbaf_from_dict(doc)


def qbaf_from_dict(doc: object) -> Qbaf:
    if not isinstance(doc, dict):
        raise SchemaError("top-level value must be an object")
    for key in ("arguments", "attacks", "supports"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
        if not isinstance(doc[key], list):
            raise SchemaError(f"field {key!r} must be an array")
    unknown = set(doc) - {"arguments", "attacks", "supports"}
    if unknown:
        raise SchemaError(f"unexpected field(s) {sorted(unknown)}")

    scores: dict[str, float] = {}
    for item in doc["arguments"]:
        if not isinstance(item, dict) or set(item) != {"id", "base_score"}:
            raise SchemaError(f"argument entry must have exactly 'id' and 'base_score': {item!r}")
        aid, score = item["id"], item["base_score"]
        if not isinstance(aid, str) or not aid:
            raise SchemaError(f"argument id must be a non-empty string: {aid!r}")
        if aid in scores:
            raise SchemaError(f"duplicate argument id {aid!r}")
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise SchemaError(f"base score of {aid!r} is not a number: {score!r}")
        if not math.isfinite(score) or not 0.0 <= score <= 1.0:
            raise SchemaError(f"base score of {aid!r} outside [0,1]: {score!r}")
        scores[aid] = float(score)

    def pairs(key: str) -> list[Edge]:
        out = []
        seen = set()
        for e in doc[key]:
            if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
                raise SchemaError(f"{key} entry must be a [from, to] string pair: {e!r}")
            pair = (e[0], e[1])
            if pair in seen:
                raise SchemaError(f"duplicate {key} entry {e!r}")
            seen.add(pair)
            out.append(pair)
        return out

    return Qbaf.build(scores, pairs("attacks"), pairs("supports"))


def qbaf_to_dict(q: Qbaf) -> dict:
    return {
        "arguments": [{"id": a, "base_score": q.base_scores[a]} for a in q.arguments],
        "attacks": [list(e) for e in sorted(q.attacks)],
        "supports": [list(e) for e in sorted(q.supports)],
    }


def serialize_qbaf(q: Qbaf) -> str:
    """Deterministic JSON text: ids sorted, relations sorted, two-space indent."""
    dumps = json.dumps

    def rel_block(name: str, rel: frozenset) -> str:
        if not rel:
            return f'  "{name}": []'
        lines = [f"    [{dumps(s, ensure_ascii=False)}, {dumps(t, ensure_ascii=False)}]" for s, t in sorted(rel)]
        return f'  "{name}": [\n' + ",\n".join(lines) + "\n  ]"

    if q.arguments:
        arg_lines = [
            f'    {{"id": {dumps(a, ensure_ascii=False)}, "base_score": {float(q.base_scores[a])!r}}}'
            for a in q.arguments
        ]
        args_block = '  "arguments": [\n' + ",\n".join(arg_lines) + "\n  ]"
    else:
        args_block = '  "arguments": []'
    body = ",\n".join([args_block, rel_block("attacks", q.attacks), rel_block("supports", q.supports)])
    return "{\n" + body + "\n}\n"


def load_qbaf(path) -> Qbaf:
    with open(path, "rb") as fh:
        return parse_qbaf(fh.read())
