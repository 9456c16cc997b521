"""JSON model documents.

Rationals are written as "num/den" strings and signed infinities as "+inf" /
"-inf"; floats are rejected on input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .market import MarketModel, PortfolioMenu
from .prob_space import FilteredSpace, Infinite, ModelError, RandomVariable, as_fraction
from .topology import SequenceSpec

REQUIRED = ("outcomes", "probabilities", "times", "partitions", "assets", "prices")


def fmt(x) -> str:
    if isinstance(x, Infinite):
        return str(x)
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def fmt_rv(X: RandomVariable):
    return [fmt_value(v) for v in X.values]


def fmt_value(v):
    if isinstance(v, tuple):
        return [fmt(x) for x in v]
    return fmt(v)


def _rat(x, where, errors):
    if isinstance(x, float):
        errors.append(f"{where}: float {x!r} is not allowed, write it as a \"num/den\" string")
        return None
    try:
        return as_fraction(x)
    except ModelError as exc:
        errors.append(f"{where}: {exc}")
        return None


def _lim(x, where, errors):
    if isinstance(x, str) and x.strip() in ("+inf", "inf", "-inf"):
        return x.strip()
    return _rat(x, where, errors)


@dataclass
class ModelDocument:
    space: FilteredSpace
    model: MarketModel
    payoffs: dict = field(default_factory=dict)       # name -> RandomVariable
    menu: Optional[PortfolioMenu] = None
    sequences: list = field(default_factory=list)     # SequenceSpec
    raw: dict = field(default_factory=dict)

    def claim(self, name: Optional[str] = None) -> RandomVariable:
        if not self.payoffs:
            raise ModelError("the document has no payoff")
        if name is None:
            return next(iter(self.payoffs.values()))
        if name not in self.payoffs:
            raise ModelError(f"unknown claim {name!r}; known: {sorted(self.payoffs)}")
        return self.payoffs[name]


def validate_document(doc: dict) -> list:
    """Every violated invariant, with its location."""
    errors = []
    if not isinstance(doc, dict):
        return ["document must be a JSON object"]
    for key in REQUIRED:
        if key not in doc:
            errors.append(f"missing field {key!r}")
    if errors:
        return errors
    omega = doc["outcomes"]
    times = doc["times"]
    if not isinstance(omega, list) or not omega:
        errors.append("outcomes: must be a nonempty list")
        return errors
    if len(set(map(str, omega))) != len(omega):
        errors.append("outcomes: duplicate labels")
    idx = {w: i for i, w in enumerate(omega)}
    n = len(omega)

    probs = doc["probabilities"]
    if not isinstance(probs, list) or len(probs) != n:
        errors.append(f"probabilities: expected {n} entries")
    else:
        ps = [_rat(p, f"probabilities[{i}]", errors) for i, p in enumerate(probs)]
        if all(p is not None for p in ps):
            for w, p in zip(omega, ps):
                if p <= 0:
                    errors.append(f"probabilities: outcome {w} has nonpositive probability {p}")
            total = sum(ps, Fraction(0))
            if total != 1:
                errors.append(f"probabilities sum to {total} ≠ 1")

    if not isinstance(times, list) or not times:
        errors.append("times: must be a nonempty list")
        return errors
    if len(set(map(str, times))) != len(times):
        errors.append("times: duplicate labels")
    parts = doc["partitions"]
    cell_of = []
    if not isinstance(parts, list) or len(parts) != len(times):
        errors.append(f"partitions: expected one partition per time ({len(times)})")
        parts = []
    for k, part in enumerate(parts):
        where = f"partitions[{times[k]}]"
        owner = {}
        for c, cell in enumerate(part):
            if not cell:
                errors.append(f"{where}: empty atom")
            for w in cell:
                if w not in idx:
                    errors.append(f"{where}: unknown outcome {w!r}")
                elif w in owner:
                    errors.append(f"{where}: outcome {w!r} appears in two atoms")
                else:
                    owner[w] = c
        missing = [w for w in omega if w not in owner]
        if missing:
            errors.append(f"{where}: outcomes {missing} are not covered")
        cell_of.append(owner)
    if len(cell_of) == len(times):
        for k in range(len(times) - 1):
            for cell in parts[k + 1]:
                parents = {cell_of[k].get(w) for w in cell}
                if len(parents) > 1:
                    straddled = [parts[k][p] for p in sorted(x for x in parents if x is not None)]
                    errors.append(f"partitions[{times[k + 1]}]: atom {cell} does not refine time "
                                  f"{times[k]}; it straddles atoms {straddled}")
        if doc.get("terminal_singletons", True) and parts and any(len(c) != 1 for c in parts[-1]):
            errors.append(f"partitions[{times[-1]}]: terminal partition must consist of singletons")

    d = doc["assets"]
    if not isinstance(d, int) or d < 0:
        errors.append("assets: must be a nonnegative integer")
        d = None
    prices = doc["prices"]
    if not isinstance(prices, list) or len(prices) != len(times):
        errors.append(f"prices: expected one slice per time ({len(times)})")
    elif d is not None:
        for k, sl in enumerate(prices):
            if not isinstance(sl, list) or len(sl) != n:
                errors.append(f"prices[{times[k]}]: expected {n} outcome entries")
                continue
            vals = []
            for i, v in enumerate(sl):
                where = f"prices[{times[k]}][{omega[i]}]"
                if not isinstance(v, list) or len(v) != d:
                    errors.append(f"{where}: expected a list of {d} rationals")
                    vals.append(None)
                    continue
                vec = tuple(_rat(x, where, errors) for x in v)
                if any(x is not None and x < 0 for x in vec):
                    errors.append(f"{where}: negative price")
                vals.append(vec)
            if k < len(cell_of) and len(cell_of[k]) == n:
                for cell in parts[k]:
                    got = {vals[idx[w]] for w in cell if w in idx}
                    if len(got) > 1:
                        errors.append(f"prices[{times[k]}]: not measurable, values differ on atom {cell}")

    payoff = doc.get("payoff")
    if payoff is not None:
        named = payoff if isinstance(payoff, dict) else {"h": payoff}
        for name, vals in named.items():
            if not isinstance(vals, list) or len(vals) != n:
                errors.append(f"payoff {name}: expected {n} entries")
            else:
                for i, v in enumerate(vals):
                    _rat(v, f"payoff {name}[{omega[i]}]", errors)

    menu = doc.get("menu")
    if menu is not None:
        if not isinstance(menu, dict) or "anchor" not in menu or "entries" not in menu:
            errors.append("menu: needs 'anchor' and 'entries'")
        else:
            if str(menu["anchor"]) not in map(str, times):
                errors.append(f"menu: anchor {menu['anchor']!r} is not a time label")
            for name, vals in menu["entries"].items():
                if not isinstance(vals, list) or len(vals) != n:
                    errors.append(f"menu entry {name}: expected {n} entries")
                else:
                    for i, v in enumerate(vals):
                        _rat(v, f"menu entry {name}[{omega[i]}]", errors)

    for j, seq in enumerate(doc.get("sequences", []) or []):
        where = f"sequences[{j}]"
        if not isinstance(seq, dict) or not seq.get("prefix"):
            errors.append(f"{where}: needs a nonempty 'prefix'")
            continue
        for r, term in enumerate(seq["prefix"]):
            if isinstance(term, str):
                if not menu or term not in menu.get("entries", {}):
                    errors.append(f"{where}.prefix[{r}]: unknown menu entry {term!r}")
            elif not isinstance(term, list) or len(term) != n:
                errors.append(f"{where}.prefix[{r}]: expected {n} entries or a menu entry name")
            else:
                for v in term:
                    _rat(v, f"{where}.prefix[{r}]", errors)
        tail = seq.get("tail", "constant")
        if tail not in ("constant", "periodic", "monotone"):
            errors.append(f"{where}: unknown tail {tail!r}")
        if tail == "monotone":
            lim = seq.get("limit")
            if not isinstance(lim, list) or len(lim) != n:
                errors.append(f"{where}: monotone tail needs a limit with {n} entries")
            else:
                for v in lim:
                    _lim(v, f"{where}.limit", errors)
    return errors


def parse_document(doc: dict) -> ModelDocument:
    errors = validate_document(doc)
    if errors:
        raise ModelError(errors[0])
    space = FilteredSpace(doc["outcomes"], doc["times"], doc["partitions"], doc["probabilities"],
                          doc.get("terminal_singletons", True))
    d = doc["assets"]
    model = MarketModel(space, doc["prices"], d)
    payoffs = {}
    payoff = doc.get("payoff")
    if payoff is not None:
        named = payoff if isinstance(payoff, dict) else {"h": payoff}
        payoffs = {name: space.rv(vals) for name, vals in named.items()}
    menu = None
    if doc.get("menu") is not None:
        m = doc["menu"]
        menu = PortfolioMenu(space, {k: space.rv(v) for k, v in m["entries"].items()}, m["anchor"])
    seqs = []
    for seq in doc.get("sequences", []) or []:
        prefix = [menu.entry(t) if isinstance(t, str) else space.rv(t) for t in seq["prefix"]]
        seqs.append(SequenceSpec(space, prefix, seq.get("tail", "constant"), seq.get("period", 1),
                                 seq.get("limit"), seq.get("first_index", 1)))
    return ModelDocument(space, model, payoffs, menu, seqs, doc)


def serialize(md: ModelDocument) -> dict:
    space, model = md.space, md.model
    out = {
        "outcomes": list(space.omega),
        "probabilities": [fmt(p) for p in space.prob],
        "times": list(space.times),
        "partitions": [[[space.omega[i] for i in cell] for cell in space.cells(k)]
                       for k in range(len(space.times))],
        "assets": model.d,
        "prices": [[[fmt(x) for x in v] for v in sl.values] for sl in model.S.slices],
    }
    if not space.terminal_singletons:
        out["terminal_singletons"] = False
    if md.payoffs:
        out["payoff"] = {name: fmt_rv(X) for name, X in md.payoffs.items()}
    if md.menu is not None:
        out["menu"] = {"anchor": md.menu.anchor_time,
                       "entries": {n: fmt_rv(X) for n, X in zip(md.menu.names, md.menu.entries)}}
    if md.sequences:
        seqs = []
        for s in md.sequences:
            item = {"prefix": [fmt_rv(X) for X in s.prefix], "tail": s.tail}
            if s.tail == "periodic":
                item["period"] = s.period
            if s.limit is not None:
                item["limit"] = [fmt(x) for x in s.limit]
            if s.first_index != 1:
                item["first_index"] = s.first_index
            seqs.append(item)
        out["sequences"] = seqs
    return out


def load(path) -> ModelDocument:
    return parse_document(read_json(path))


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def fixture_path(name: str) -> Path:
    return Path(__file__).parent / "fixtures" / f"{name}.json"
