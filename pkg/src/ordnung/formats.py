"""Input files, serialization and analysis reports.

JSON input::

    {"chain": 3 | {"labels": [...]},
     "range": [c, d],
     "functions": [[...], ...],
     "metric": {"dist": [[...], ...]},        # optional: functions are target indices
     "poset": {"size": n, "relation": [[i, j], ...]},   # optional, likewise
     "topology": {"opens": [[...], ...]}}     # optional, used by fragcheck

CSV input has a header ``# range c d chain n`` and one function per row.

Reals are written as decimal strings (shortest round-trip repr) and read back
from either strings or JSON numbers.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import InvalidInput, ParseError, SchemaError
from .order import Chain, FiniteMetricSpace, FinitePoset, FiniteTopology, PosetChainMap
from .variation import ChainFunction, FunctionFamily, MetricChainFunction


@dataclass(frozen=True)
class Dataset:
    chain: Chain
    family: Optional[FunctionFamily] = None
    metric_members: Optional[tuple] = None
    poset_members: Optional[tuple] = None
    topology: Optional[FiniteTopology] = None

    @property
    def payload(self):
        if self.family is not None:
            return self.family
        return list(self.metric_members if self.metric_members is not None else self.poset_members)


def num(x) -> str:
    """Decimal string for a real; integers-valued floats keep a ``.0``."""
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInput(f"non-finite number {x}")
    return repr(x)


def _real(x, where):
    if isinstance(x, bool):
        raise SchemaError(f"{where}: expected a real, got a boolean")
    if isinstance(x, (int, float)):
        v = float(x)
    elif isinstance(x, str):
        try:
            v = float(x)
        except ValueError:
            raise SchemaError(f"{where}: {x!r} is not a decimal number") from None
    else:
        raise SchemaError(f"{where}: expected a real, got {type(x).__name__}")
    if not math.isfinite(v):
        raise SchemaError(f"{where}: non-finite value {x!r}")
    return v


def _index(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise SchemaError(f"{where}: expected an integer index")
    try:
        return int(x)
    except ValueError:
        raise SchemaError(f"{where}: {x!r} is not an integer") from None


def _chain(value) -> Chain:
    try:
        if isinstance(value, dict):
            labels = value.get("labels")
            if not isinstance(labels, list):
                raise SchemaError("chain: object form needs a 'labels' list")
            return Chain(len(labels), tuple(labels))
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError("chain: expected a positive integer or {'labels': [...]}")
        return Chain(value)
    except InvalidInput as e:
        raise SchemaError(f"chain: {e}") from None


def from_document(doc: dict) -> Dataset:
    """Build validated objects from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    for key in ("chain", "functions"):
        if key not in doc:
            raise SchemaError(f"missing required key {key!r}")
    chain = _chain(doc["chain"])
    funcs = doc["functions"]
    if not isinstance(funcs, list) or any(not isinstance(f, list) for f in funcs):
        raise SchemaError("functions: expected a list of lists")
    for n, f in enumerate(funcs):
        if len(f) != chain.size:
            raise SchemaError(f"functions[{n}]: {len(f)} values for a chain of size {chain.size}")
    topology = None
    if "topology" in doc:
        opens = doc["topology"].get("opens") if isinstance(doc["topology"], dict) else None
        if not isinstance(opens, list):
            raise SchemaError("topology: expected {'opens': [[...], ...]}")
        try:
            topology = FiniteTopology(chain.size, frozenset(
                frozenset(_index(p, "topology.opens") for p in o) for o in opens))
        except InvalidInput as e:
            raise SchemaError(f"topology: {e}") from None
    try:
        if "metric" in doc:
            dist = doc["metric"].get("dist") if isinstance(doc["metric"], dict) else None
            if not isinstance(dist, list):
                raise SchemaError("metric: expected {'dist': [[...], ...]}")
            target = FiniteMetricSpace(len(dist), tuple(
                tuple(_real(v, f"metric.dist[{i}]") for v in row) for i, row in enumerate(dist)))
            members = tuple(MetricChainFunction(chain, target, tuple(_index(v, f"functions[{n}]") for v in f))
                            for n, f in enumerate(funcs))
            return Dataset(chain, metric_members=members, topology=topology)
        if "poset" in doc:
            p = doc["poset"]
            if not isinstance(p, dict) or "size" not in p or "relation" not in p:
                raise SchemaError("poset: expected {'size': n, 'relation': [[i, j], ...]}")
            rel = set((_index(i, "poset.relation"), _index(j, "poset.relation")) for i, j in p["relation"])
            size = _index(p["size"], "poset.size")
            rel |= {(i, i) for i in range(size)}
            target = FinitePoset(size, frozenset(rel))
            members = tuple(PosetChainMap(chain, target, tuple(_index(v, f"functions[{n}]") for v in f))
                            for n, f in enumerate(funcs))
            return Dataset(chain, poset_members=members, topology=topology)
        if "range" not in doc:
            raise SchemaError("missing required key 'range'")
        rng = doc["range"]
        if not isinstance(rng, list) or len(rng) != 2:
            raise SchemaError("range: expected [c, d]")
        c, d = _real(rng[0], "range"), _real(rng[1], "range")
        rows = [[_real(v, f"functions[{n}][{i}]") for i, v in enumerate(f)] for n, f in enumerate(funcs)]
        family = FunctionFamily(chain, tuple(ChainFunction(chain, tuple(r), (c, d)) for r in rows), (c, d))
        return Dataset(chain, family=family, topology=topology)
    except InvalidInput as e:
        raise SchemaError(str(e)) from None


def parse_json(text: str) -> Dataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    return from_document(doc)


def parse_csv(text: str) -> Dataset:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty CSV input", 1)
    head = lines[0].split()
    if len(head) != 6 or head[0] != "#" or head[1] != "range" or head[4] != "chain":
        raise ParseError("header must read '# range c d chain n'", 1)
    try:
        c, d, n = float(head[2]), float(head[3]), int(head[5])
    except ValueError:
        raise ParseError("header numbers are malformed", 1) from None
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO("\n".join(lines[1:]))), start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        vals = []
        for pos, cell in enumerate(row, start=1):
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(f"{cell!r} is not a number", lineno, pos) from None
        rows.append(vals)
    return from_document({"chain": n, "range": [c, d], "functions": rows})


def ingest(path, format: Optional[str] = None) -> Dataset:
    """Load and validate a JSON or CSV input file (format from the suffix by default)."""
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "json")
    text = path.read_text()
    if fmt == "json":
        return parse_json(text)
    if fmt == "csv":
        return parse_csv(text)
    raise ValueError(f"unknown format {fmt!r}")


def to_document(obj) -> dict:
    if isinstance(obj, FunctionFamily):
        obj = Dataset(obj.chain, family=obj)
    elif isinstance(obj, (list, tuple)) and obj and isinstance(obj[0], MetricChainFunction):
        obj = Dataset(obj[0].chain, metric_members=tuple(obj))
    elif isinstance(obj, (list, tuple)) and obj and isinstance(obj[0], PosetChainMap):
        obj = Dataset(obj[0].chain, poset_members=tuple(obj))
    if not isinstance(obj, Dataset):
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    ch = obj.chain
    doc: dict[str, Any] = {"chain": {"labels": list(ch.labels)} if ch.labels is not None else ch.size}
    if obj.family is not None:
        doc["range"] = [num(v) for v in obj.family.range]
        doc["functions"] = [[num(v) for v in f.values] for f in obj.family]
    elif obj.metric_members is not None:
        target = obj.metric_members[0].target
        doc["metric"] = {"dist": [[num(v) for v in row] for row in target.dist]}
        doc["functions"] = [list(m.values) for m in obj.metric_members]
    else:
        target = obj.poset_members[0].target
        doc["poset"] = {"size": target.size, "relation": sorted([i, j] for i, j in target.relation)}
        doc["functions"] = [list(m.values) for m in obj.poset_members]
    if obj.topology is not None:
        doc["topology"] = {"opens": sorted(sorted(o) for o in obj.topology.opens)}
    return doc


def serialize(obj, format: str = "json") -> str:
    if format == "json":
        return json.dumps(to_document(obj), indent=1) + "\n"
    if format == "csv":
        fam = obj.family if isinstance(obj, Dataset) else obj
        if not isinstance(fam, FunctionFamily):
            raise TypeError("CSV holds real-valued families only")
        buf = io.StringIO()
        buf.write(f"# range {num(fam.range[0])} {num(fam.range[1])} chain {fam.chain.size}\n")
        w = csv.writer(buf, lineterminator="\n")
        for f in fam:
            w.writerow([num(v) for v in f.values])
        return buf.getvalue()
    raise ValueError(f"unknown format {format!r}")


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def encode(obj):
    """JSON-ready copy with every float turned into a decimal string."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return num(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [encode(v) for v in items]
    if hasattr(obj, "item"):  # numpy scalars
        return encode(obj.item())
    raise TypeError(f"cannot encode {type(obj).__name__}")


@dataclass(frozen=True)
class AnalysisReport:
    command: str
    input_digest: str
    parameters: dict
    result: Any
    invariants: dict
    version: str
    wall_time: float = field(default=0.0, compare=False)
    exit_status: int = 0

    def __post_init__(self):
        object.__setattr__(self, "parameters", encode(self.parameters))
        object.__setattr__(self, "result", encode(self.result))
        object.__setattr__(self, "invariants", encode(self.invariants))

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "input_digest": self.input_digest,
            "parameters": self.parameters,
            "result": self.result,
            "invariants": self.invariants,
            "version": self.version,
            "exit_status": self.exit_status,
            "wall_time": num(self.wall_time),
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        doc = json.loads(text)
        return cls(doc["command"], doc["input_digest"], doc["parameters"], doc["result"],
                   doc["invariants"], doc["version"], float(doc["wall_time"]), doc["exit_status"])
