"""Command line entry point: one JSON report per invocation."""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .arbitrage import (EmmWitness, check_aip, check_aip_stopping, check_nupbr, default_seed,
                        find_emm)
from .io import fmt, fmt_rv, fmt_value, load, read_json, validate_document
from .market import IdExtension
from .maxingale import (is_strong_sub_maxingale, is_sub_maxingale, lemma_suite,
                        strong_gap_experiment)
from .pricing import (closed_price_invariance, entry_price, menu_price_membership,
                      menu_price_set, raw_menu_membership, superhedge_dp)
from .prob_space import AdaptedProcess, ModelError
from .topology import converges, is_cauchy, is_limit, pdist, pdist_hat


def _atom(space, k, c):
    return [space.omega[i] for i in space.cells(k)[c]]


def _strategy(strat):
    space = strat.model.space
    return {
        "revisions": [[space.times[k] for k in r] for r in strat.revisions],
        "positions": [[fmt_value(v) for v in p.values] for p in strat.positions],
    }


def _witness(w):
    space = w.strategy.model.space
    out = {"kind": w.kind, "strategy": _strategy(w.strategy), "terminal_value": fmt_rv(w.terminal),
           "verified": w.verify()}
    if w.price is not None:
        out["price"] = fmt_rv(w.price)
    if w.node is not None:
        k, c = w.node
        out["node"] = {"time": space.times[k], "atom": _atom(space, k, c)}
    return out


def _vector(md, text):
    """Per-outcome values from "a,b,c", or a menu entry / claim name."""
    if md.menu is not None and text in md.menu.names:
        return md.menu.entry(text)
    if text in md.payoffs:
        return md.payoffs[text]
    parts = [p.strip() for p in text.split(",")]
    return md.space.rv(parts)


def _time(md, args, default=None):
    t = args.time if getattr(args, "time", None) is not None else default
    if t is None:
        t = md.space.times[0]
    return md.space.times[md.space.time_index(t)]


def _process(md, args):
    model = md.model
    j = getattr(args, "asset", 0)
    if not 0 <= j < model.d:
        raise ModelError(f"asset index {j} out of range for d={model.d}")
    M = AdaptedProcess(md.space, [X.coord(j) for X in model.S.slices])
    return -M if getattr(args, "negate", False) else M


# -- commands -------------------------------------------------------------------

def cmd_check_aip(md, args):
    v = check_aip(md.model)
    if v.holds:
        return "holds", {}
    k, c = v.node
    return "fails", {
        "node": {"time": md.space.times[k], "atom": _atom(md.space, k, c)},
        "separator": {"normal": [fmt(x) for x in v.hull.normal], "offset": fmt(v.hull.offset)},
        "witness": _witness(v.witness),
    }


def cmd_check_aip_stopping(md, args):
    v = check_aip_stopping(md.model, args.budget, args.seed)
    cert = {"exhaustive": v.exhaustive, "pairs_checked": v.pairs_checked}
    if v.seed is not None:
        cert["seed"] = v.seed
    if v.failing_pair:
        cert["failing_pair"] = [[md.space.times[k] for k in r] for r in v.failing_pair]
    return ("holds" if v.holds else "fails"), cert


def _emm_cert(md, r):
    if isinstance(r, EmmWitness):
        return "holds", {"Q": dict(zip(map(str, md.space.omega), map(fmt, r.Q))), "margin": fmt(r.margin)}
    return "fails", {"arbitrage": _witness(r)}


def cmd_check_na(md, args):
    return _emm_cert(md, find_emm(md.model))


def cmd_find_emm(md, args):
    verdict, cert = _emm_cert(md, find_emm(md.model))
    return ("found" if verdict == "holds" else "arbitrage"), cert


def cmd_check_nupbr(md, args):
    v = check_nupbr(md.model, args.m)
    cert = {"m": fmt(v.m), "note": "verdict does not depend on m on a finite space"}
    if v.witness is not None:
        cert["cone_direction"] = _witness(v.witness)
    return ("holds" if v.holds else "fails"), cert


def cmd_price(md, args):
    h = md.claim(args.claim)
    res = superhedge_dp(md.model, h)
    sp = md.space
    cert = {
        "prices": {str(t): fmt_rv(res.prices[k]) for k, t in enumerate(sp.times)},
        "hedge": [{"time": sp.times[k], "atom": _atom(sp, k, c), "theta": [fmt(x) for x in th]}
                  for (k, c), th in sorted(res.theta.items())],
    }
    return ("finite" if res.prices.is_finite() else "unbounded-below"), cert


def _menu_report(md, args):
    if md.menu is None:
        raise ModelError("the document has no menu")
    h = md.claim(args.claim)
    t = _time(md, args, md.menu.anchor_time)
    return h, t, menu_price_set(md.space, md.menu, h, t)


def cmd_price_menu(md, args):
    h, t, mp = _menu_report(md, args)
    sp = md.space
    k = sp.time_index(t)
    desc = mp.description
    ext = IdExtension(md.menu)
    id_entries = []
    for V, a in ext.enumerate():
        id_entries.append({"assignment": [md.menu.names[j] for j in a], "value": fmt_rv(V),
                           "price": fmt_rv(entry_price(sp, t, h, V))})
    cert = {
        "entry_prices": {n: fmt_rv(p) for n, p in mp.entry_prices.items()},
        "pi_id": fmt_rv(desc.pi),
        "lambda": sorted(map(str, desc.lambda_set)),
        "lambda_is_omega": len(desc.lambda_cells) == len(sp.cells(k)),
        "attaining_assignment": None if mp.assignment is None else
        [{"atom": _atom(sp, k, c), "entry": md.menu.names[j]} for c, j in enumerate(mp.assignment)],
        "id_extension": id_entries,
    }
    return "computed", cert


def cmd_price_membership(md, args):
    if args.price is None:
        raise ModelError("--price is required")
    h, t, mp = _menu_report(md, args)
    p = _vector(md, args.price)
    member = menu_price_membership(mp.description, p)
    raw = raw_menu_membership(md.space, md.menu, h, p)
    return ("member" if member else "not-member"), {"price": fmt_rv(p), "raw_menu_member": raw,
                                                    "pi_id": fmt_rv(mp.description.pi)}


def cmd_closed_price(md, args):
    if md.menu is None or not md.sequences:
        raise ModelError("closed-price needs a menu and sequences")
    h = md.claim(args.claim)
    t = _time(md, args, md.menu.anchor_time)
    rep = closed_price_invariance(md.space, md.menu, h, t, md.sequences)
    cert = {
        "base_price": fmt_rv(rep.base_price),
        "closed_price": fmt_rv(rep.closed_price),
        "sequences": [{"index": r.index, "limit": fmt_rv(r.limit), "price": fmt_rv(r.price),
                       "accepted": r.accepted} for r in rep.sequences],
    }
    return ("invariant" if rep.invariant else "changed"), cert


def _sequence(md, args):
    if not md.sequences:
        raise ModelError("the document has no sequences")
    j = args.sequence
    if not 0 <= j < len(md.sequences):
        raise ModelError(f"sequence index {j} out of range")
    return md.sequences[j]


def cmd_pdist(md, args):
    if args.x is None or args.y is None:
        raise ModelError("--x and --y are required")
    X, Y = _vector(md, args.x), _vector(md, args.y)
    t = _time(md, args)
    return "computed", {"time": t, "pdist_hat": fmt(pdist_hat(md.space, t, X, Y)),
                        "pdist": fmt(pdist(md.space, X, Y))}


def cmd_converges(md, args):
    v = converges(md.space, _time(md, args), _sequence(md, args))
    cert = {"canonical_limit": fmt_rv(v.limit)} if v.convergent else {"violation": str(v.violation)}
    return ("convergent" if v.convergent else "divergent"), cert


def cmd_is_limit(md, args):
    seq = _sequence(md, args)
    t = _time(md, args)
    if args.limit is None or args.limit == "canonical":
        conv = converges(md.space, t, seq)
        if not conv.convergent:
            raise ModelError(f"sequence does not converge (inf = -inf at {conv.violation})")
        Z = conv.limit
    else:
        Z = _vector(md, args.limit)
    v = is_limit(md.space, t, seq, Z)
    a = v.alpha
    cert = {"Z": fmt_rv(Z), "alpha_prefix": [fmt_rv(x) for x in a.prefix], "tail": a.tail}
    if a.limit is not None:
        cert["alpha_limit"] = fmt_rv(a.limit)
    else:
        cert["alpha_block"] = [fmt_rv(x) for x in a.block]
    return ("limit" if v.is_limit else "not-limit"), cert


def cmd_cauchy(md, args):
    v = is_cauchy(md.space, _time(md, args), _sequence(md, args))
    cert = {}
    if v.pair is not None:
        cert = {"pair": list(v.pair), "distance": fmt(v.distance)}
    return ("cauchy" if v.cauchy else "not-cauchy"), cert


def cmd_sub(md, args):
    v = is_sub_maxingale(md.space, _process(md, args))
    cert = {}
    if v.violation:
        atom, u, t = v.violation
        cert = {"atom": sorted(map(str, atom.members)), "u": u, "t": t}
    return ("sub-maxingale" if v.holds else "not-sub-maxingale"), cert


def cmd_strong(md, args):
    v = is_strong_sub_maxingale(md.space, _process(md, args), args.budget, args.seed)
    cert = {"exhaustive": v.exhaustive, "pairs_checked": v.pairs_checked}
    if v.seed is not None:
        cert["seed"] = v.seed
    if v.violation:
        cert["violation"] = [[md.space.times[k] for k in r] for r in v.violation]
    return ("strong" if v.holds else "not-strong"), cert


def cmd_lemma_suite(md, args):
    rep = lemma_suite(md.space, _process(md, args))
    return ("ok" if rep.ok else "violations"), {"checks": rep.checks,
                                                "violations": [str(v) for v in rep.violations[:20]]}


def cmd_strong_gap(args):
    seed = default_seed() if args.seed is None else args.seed
    rep = strong_gap_experiment(args.depth, args.trials, seed)
    return "completed", {"trials": rep.trials, "sub_maxingales": rep.sub_maxingales,
                         "gaps_found": len(rep.gaps), "gaps": rep.gaps[:5], "seed": rep.seed}


MODEL_COMMANDS = {
    "check-aip": cmd_check_aip,
    "check-aip-stopping": cmd_check_aip_stopping,
    "check-na": cmd_check_na,
    "find-emm": cmd_find_emm,
    "check-nupbr": cmd_check_nupbr,
    "price": cmd_price,
    "price-menu": cmd_price_menu,
    "price-membership": cmd_price_membership,
    "closed-price": cmd_closed_price,
    "topology pdist": cmd_pdist,
    "topology converges": cmd_converges,
    "topology is-limit": cmd_is_limit,
    "topology cauchy": cmd_cauchy,
    "maxingale sub": cmd_sub,
    "maxingale strong": cmd_strong,
    "maxingale lemma-suite": cmd_lemma_suite,
}


def _common(p):
    p.add_argument("--model", required=True, help="path to a model document (JSON)")
    p.add_argument("--time", help="time label")
    p.add_argument("--claim", help="payoff name")
    p.add_argument("--budget", type=int, default=10000, help="stopping-time pair budget")
    p.add_argument("--seed", type=int, default=None, help="seed for sampled pairs (default: $HEDGELAB_SEED or 0)")
    p.add_argument("--human", action="store_true", help="indented text instead of JSON")
    p.add_argument("--m", default="1", help="NUPBR floor")
    p.add_argument("--price", help="candidate price per outcome, e.g. 1,1,0,0")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--sequence", type=int, default=0)
    p.add_argument("--limit", help="candidate limit per outcome or 'canonical'")
    p.add_argument("--asset", type=int, default=0)
    p.add_argument("--negate", action="store_true", help="use -S instead of S")


def build_parser():
    ap = argparse.ArgumentParser(prog="hedgelab", description="Arbitrage, super-hedging and maxingale checks on finite event trees.")
    ap.add_argument("--version", action="version", version=f"hedgelab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in MODEL_COMMANDS:
        if " " not in name:
            _common(sub.add_parser(name))
    for group in ("topology", "maxingale"):
        g = sub.add_parser(group).add_subparsers(dest="sub", required=True)
        for name in MODEL_COMMANDS:
            if name.startswith(group + " "):
                _common(g.add_parser(name.split(" ", 1)[1]))
    v = sub.add_parser("validate")
    v.add_argument("--model", required=True)
    v.add_argument("--human", action="store_true")
    ex = sub.add_parser("experiment").add_subparsers(dest="sub", required=True)
    sg = ex.add_parser("strong-gap")
    sg.add_argument("--depth", type=int, default=2)
    sg.add_argument("--trials", type=int, default=200)
    sg.add_argument("--seed", type=int, default=None)
    sg.add_argument("--human", action="store_true")
    return ap


def _render(report, human):
    if not human:
        return json.dumps(report, indent=2, default=str)
    lines = []

    def walk(obj, indent):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k, v in obj.items():
                if isinstance(v, (dict, list)) and v:
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {v}")
        elif isinstance(obj, list):
            for v in obj:
                if isinstance(v, (dict, list)) and v:
                    lines.append(f"{pad}-")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}- {v}")

    walk(report, 0)
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command if getattr(args, "sub", None) is None else f"{args.command} {args.sub}"
    start = time.perf_counter()
    try:
        if command == "validate":
            errors = validate_document(read_json(args.model))
            verdict, cert = ("valid", {}) if not errors else ("invalid", {"violations": errors})
        elif command == "experiment strong-gap":
            verdict, cert = cmd_strong_gap(args)
        else:
            md = load(args.model)
            verdict, cert = MODEL_COMMANDS[command](md, args)
    except ModelError as exc:
        print(f"hedgelab: input error: {exc}", file=sys.stderr)
        return 2
    report = {"command": command, "verdict": verdict, "certificates": cert,
              "timing": round(time.perf_counter() - start, 6), "tool_version": __version__}
    print(_render(report, args.human))
    if command == "validate" and verdict == "invalid":
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
