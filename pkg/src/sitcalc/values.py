"""Runtime values.

The value universe is deliberately small: Python ``bool``, ``int`` and ``str``
stand in for the scalar sorts, ``tuple`` for tuples and ``frozenset`` for
finite sets.  Records get their own class because they carry a schema name.
Parameterised stored fluents keep their valuation in a :class:`Table`.

Everything here is immutable and hashable so values can live inside sets and
serve as memo keys.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping, Union

Value = Union[bool, int, str, tuple, frozenset, "Record", "Table"]


class Record:
    """An instance of a declared schema, e.g. a calendar event."""

    __slots__ = ("schema", "fields", "_map", "_hash")

    def __init__(self, schema: str, fields: Iterable[tuple[str, Value]]):
        self.schema = schema
        self.fields = tuple(fields)
        self._map = dict(self.fields)
        self._hash = hash((schema, self.fields))

    def __getitem__(self, name: str) -> Value:
        return self._map[name]

    def get(self, name: str, default: Any = None) -> Any:
        return self._map.get(name, default)

    def field_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.fields)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Record):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.schema == other.schema
            and self.fields == other.fields
        )

    def __hash__(self) -> int:
        return self._hash

    def __setattr__(self, name, value):
        if hasattr(self, "_hash"):
            raise AttributeError("Record is immutable")
        object.__setattr__(self, name, value)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.fields)
        return f"{self.schema}{{{inner}}}"


class Table:
    """Valuation of a parameterised stored fluent over its finite argument domain.

    ``entries`` is a tuple of ``(args, value)`` pairs in canonical argument
    order; two tables are equal iff they agree on every entry.
    """

    __slots__ = ("entries", "_index", "_hash")

    def __init__(self, entries: Iterable[tuple[tuple, Value]]):
        self.entries = tuple(entries)
        self._index = {args: i for i, (args, _) in enumerate(self.entries)}
        self._hash = hash(self.entries)

    def lookup(self, args: tuple) -> Value:
        return self.entries[self._index[args]][1]

    def __contains__(self, args: object) -> bool:
        return args in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return self._hash == other._hash and self.entries == other.entries

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Table({len(self.entries)} entries)"


def value_key(v: Value) -> tuple:
    """Canonical total order on values (used for sorting and tie-breaks)."""
    if isinstance(v, bool):
        return (0, int(v))
    if isinstance(v, int):
        return (1, v)
    if isinstance(v, str):
        return (2, v)
    if isinstance(v, tuple):
        return (3, tuple(value_key(x) for x in v))
    if isinstance(v, frozenset):
        return (4, tuple(sorted(value_key(x) for x in v)))
    if isinstance(v, Record):
        return (5, v.schema, tuple((k, value_key(x)) for k, x in v.fields))
    if isinstance(v, Table):
        return (6, tuple((value_key(a), value_key(x)) for a, x in v.entries))
    raise TypeError(f"not a runtime value: {v!r}")


def sorted_values(values: Iterable[Value]) -> list[Value]:
    return sorted(values, key=value_key)


def values_equal(a: Value, b: Value) -> bool:
    # bool is an int subclass in Python; keep the two sorts apart.
    if isinstance(a, bool) is not isinstance(b, bool):
        return False
    return a == b


def is_value(v: object) -> bool:
    if isinstance(v, (bool, int, str, Record, Table)):
        return True
    if isinstance(v, (tuple, frozenset)):
        return all(is_value(x) for x in v)
    return False


def sort_name(v: Value) -> str:
    """Coarse sort of a value, used to key argument pools."""
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, str):
        return "string"
    if isinstance(v, Record):
        return v.schema
    if isinstance(v, frozenset):
        return "set"
    if isinstance(v, tuple):
        return "tuple"
    return "table"


def to_json(v: Value) -> Any:
    """JSON-compatible form; sets become canonically sorted arrays."""
    if isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, frozenset):
        return [to_json(x) for x in sorted_values(v)]
    if isinstance(v, tuple):
        return {"tuple": [to_json(x) for x in v]}
    if isinstance(v, Record):
        return {"record": v.schema, "fields": {k: to_json(x) for k, x in v.fields}}
    if isinstance(v, Table):
        return {"table": [[[to_json(a) for a in args], to_json(x)] for args, x in v.entries]}
    raise TypeError(f"not a runtime value: {v!r}")


def from_json(data: Any) -> Value:
    if isinstance(data, (bool, int, str)):
        return data
    if isinstance(data, list):
        return frozenset(from_json(x) for x in data)
    if isinstance(data, dict):
        if "tuple" in data:
            return tuple(from_json(x) for x in data["tuple"])
        if "record" in data:
            return Record(data["record"], ((k, from_json(x)) for k, x in data["fields"].items()))
        if "table" in data:
            return Table(
                (tuple(from_json(a) for a in args), from_json(x)) for args, x in data["table"]
            )
    raise ValueError(f"cannot decode value from {data!r}")


def format_value(v: Value, names: Mapping[Value, str] | None = None) -> str:
    """Human-readable rendering; values equal to a named constant print as its name."""
    if names:
        try:
            name = names.get(v)
        except TypeError:
            name = None
        if name is not None and not isinstance(v, bool):
            return name
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, frozenset):
        return "{" + ", ".join(format_value(x, names) for x in sorted_values(v)) + "}"
    if isinstance(v, tuple):
        if len(v) == 1:
            return "(" + format_value(v[0], names) + ",)"
        return "(" + ", ".join(format_value(x, names) for x in v) + ")"
    if isinstance(v, Record):
        inner = ", ".join(f"{k} = {format_value(x, names)}" for k, x in v.fields)
        return f"{v.schema}{{{inner}}}"
    if isinstance(v, Table):
        true_args = [args for args, x in v.entries if x is True]
        if all(isinstance(x, bool) for _, x in v.entries):
            return "{" + ", ".join(format_value(a, names) for a in true_args) + "}"
        return "[" + ", ".join(
            f"{format_value(a, names)} -> {format_value(x, names)}" for a, x in v.entries
        ) + "]"
    raise TypeError(f"not a runtime value: {v!r}")
