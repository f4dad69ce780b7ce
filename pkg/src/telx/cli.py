"""Command-line interface: ``telx <command> [files] [options]``.

Every command prints human-readable text by default, or with ``--json`` a
``{"status", "payload", "diagnostics"}`` object. Exit status is 0 on
success, 1 on errors in the inputs and 2 on usage errors. A file argument
of ``-`` reads standard input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable

from . import datalog, grammar, model, saturation, semilinear, taqa, translations
from .formats import (
    ParseError, parse_abox, parse_fact, parse_grammar, parse_tbox, parse_word,
    serialize_grammar, serialize_tbox,
)
from .model import ConceptFact, Individual, KnowledgeBase


@dataclass
class CommandResult:
    status: str = "ok"
    payload: Any = None
    diagnostics: list[str] = field(default_factory=list)
    text: str = ""

    def to_json(self) -> dict:
        return {"status": self.status, "payload": self.payload, "diagnostics": self.diagnostics}


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _tbox(args) -> model.TBox:
    return parse_tbox(_read(args.tbox))


def _kb(args) -> KnowledgeBase:
    return KnowledgeBase(parse_tbox(_read(args.tbox)), parse_abox(_read(args.abox)))


def _config(args, base: saturation.SaturationConfig) -> saturation.SaturationConfig:
    depth = base.max_chain_depth
    if getattr(args, "depth", None) is not None:
        depth = None if args.depth < 0 else args.depth
    return saturation.SaturationConfig(
        base.time_lo if args.lo is None else args.lo,
        base.time_hi if args.hi is None else args.hi,
        depth,
        base.max_steps if args.max_steps is None else args.max_steps,
    )


def _config_json(cfg: saturation.SaturationConfig) -> dict:
    return {"time_lo": cfg.time_lo, "time_hi": cfg.time_hi,
            "max_chain_depth": cfg.max_chain_depth, "max_steps": cfg.max_steps}


def _trace_text(trace: saturation.DerivationTrace) -> str:
    if not trace.steps:
        return "(asserted)"
    return "\n".join(f"{i}. {s}" for i, s in enumerate(trace.steps, 1))


def _unknown(cfg: saturation.SaturationConfig) -> str:
    return (f"UnknownAtBound: no derivation within window [{cfg.time_lo}, {cfg.time_hi}], "
            f"depth {cfg.max_chain_depth}; this is not a semantic no")


# commands

def cmd_classify(args) -> CommandResult:
    f = model.classify_fragment(_tbox(args))
    payload = {"is_future": f.is_future, "is_linear": f.is_linear, "rigid_only": f.rigid_only}
    text = "\n".join(f"{k}: {'yes' if v else 'no'}" for k, v in payload.items())
    return CommandResult(payload=payload, text=text)


def cmd_validate(args) -> CommandResult:
    vs = model.validate_normal_form(_tbox(args))
    payload = [{"index": v.index, "message": v.message} for v in vs]
    return CommandResult(payload=payload, text="\n".join(map(str, vs)) or "valid")


def cmd_saturate(args) -> CommandResult:
    kb = _kb(args)
    cfg = _config(args, saturation.default_config(kb))
    res = saturation.saturate(kb, cfg)
    facts = sorted(res.concept_facts(), key=lambda f: (f.subject.name, f.time, f.concept))
    payload = {"config": _config_json(cfg), "exhausted": res.exhausted,
               "facts": [str(f) for f in facts]}
    return CommandResult(payload=payload, diagnostics=list(res.warnings),
                         text="\n".join(payload["facts"]))


def _goal_and_kb(args) -> tuple[KnowledgeBase, model.Fact, saturation.SaturationConfig]:
    if args.ci is not None:
        incs = parse_tbox(args.ci).inclusions
        if len(incs) != 1 or not isinstance(incs[0], model.Shift):
            raise ValueError("--ci expects one inclusion of the form 'A [= X^n B'")
        tbox = _tbox(args)
        inc = incs[0]
        kb = KnowledgeBase(tbox, model.ABox((ConceptFact(inc.lhs, saturation.ANCHOR, 0),)))
        goal = ConceptFact(inc.rhs, saturation.ANCHOR, inc.delta)
        base = saturation.ci_config(tbox, abs(inc.delta))
    else:
        if args.abox is None or args.fact is None:
            raise ValueError("give an ABox and --fact, or --ci")
        kb = _kb(args)
        goal = parse_fact(args.fact)
        shift = goal.time - (max(kb.abox.times) if kb.abox.times else 0)
        base = saturation.default_config(kb, max(shift, 0))
        base = saturation.SaturationConfig(min(base.time_lo, goal.time), max(base.time_hi, goal.time),
                                           base.max_chain_depth)
    return kb, goal, _config(args, base)


def cmd_entails(args) -> CommandResult:
    kb, goal, cfg = _goal_and_kb(args)
    trace = saturation.entails_fact(kb, goal, cfg)
    if trace is None:
        return CommandResult(payload={"verdict": "UnknownAtBound", "goal": str(goal),
                                      "config": _config_json(cfg)},
                             diagnostics=[_unknown(cfg)], text="UnknownAtBound")
    return CommandResult(payload={"verdict": "Yes", "goal": str(goal), "config": _config_json(cfg),
                                  "trace": trace.to_json()},
                         text="Yes\n" + _trace_text(trace))


def cmd_trace(args) -> CommandResult:
    res = cmd_entails(args)
    if res.payload["verdict"] == "Yes":
        res.payload = res.payload["trace"]
        res.text = json.dumps(res.payload, indent=2)
    return res


def cmd_shift_set(args) -> CommandResult:
    tbox = _tbox(args)
    cfg = _config(args, saturation.ci_config(tbox, args.bound))
    shifts = sorted(saturation.shift_set(tbox, args.lhs, args.rhs, args.bound, cfg))
    diag = [f"lower approximation: shifts with |n| <= {args.bound} derived within "
            f"window [{cfg.time_lo}, {cfg.time_hi}], depth {cfg.max_chain_depth}"]
    return CommandResult(payload={"lhs": args.lhs, "rhs": args.rhs, "bound": args.bound,
                                  "shifts": shifts},
                         diagnostics=diag, text=" ".join(map(str, shifts)) or "(empty)")


def _grammar_payload(g: grammar.Grammar) -> dict:
    return {
        "terminals": list(g.terminals),
        "start": g.start,
        "nonterminals": list(g.nonterminals),
        "rules": [{"lhs": r.lhs, "conjuncts": [list(c) for c in r.conjuncts]} for r in g.rules],
        "keys": {nt: list(g.keys[nt]) for nt in g.nonterminals if nt in g.keys},
    }


def cmd_to_grammar(args) -> CommandResult:
    g = translations.tbox_to_conjunctive_grammar(_tbox(args))
    return CommandResult(payload=_grammar_payload(g), text=serialize_grammar(g).rstrip("\n"))


def cmd_to_tbox(args) -> CommandResult:
    res = translations.grammar_to_tbox(parse_grammar(_read(args.grammar)))
    payload = {"tbox": serialize_tbox(res.tbox), "source_concept": res.source_concept,
               "concept_of": dict(sorted(res.concept_of.items()))}
    return CommandResult(payload=payload, text=serialize_tbox(res.tbox).rstrip("\n"),
                         diagnostics=[f"source concept: {res.source_concept}"])


def cmd_to_cfg(args) -> CommandResult:
    tbox = _tbox(args)
    rl = translations.rigidise_linear(tbox)
    g = translations.linear_tbox_to_cfg(tbox)
    diag = [] if rl.exact else [
        "approximate: local-role inclusions were replaced by subsumptions found "
        "by bounded saturation"]
    payload = _grammar_payload(g)
    payload["exact"] = rl.exact
    return CommandResult(payload=payload, diagnostics=diag, text=serialize_grammar(g).rstrip("\n"))


def cmd_member(args) -> CommandResult:
    g = parse_grammar(_read(args.grammar))
    nt = args.nt
    if nt not in g.nonterminals:
        raise KeyError(f"unknown nonterminal {nt}")
    if args.balance is not None:
        word = translations.exists_shift(g, nt, args.balance, args.max_len)
        budget = args.max_len or translations.default_exists_budget(g)
        if word is None:
            return CommandResult(payload={"verdict": "NoWithinBudget", "max_len": budget},
                                 diagnostics=[f"NoWithinBudget: no word of length <= {budget} "
                                              f"with balance {args.balance}"],
                                 text="NoWithinBudget")
        return CommandResult(payload={"verdict": "Yes", "witness": word},
                             text=f"Yes {word or '_'}")
    if args.word is None:
        raise ValueError("give --word or --balance")
    word = parse_word(args.word)
    trace = grammar.member_trace(g, nt, word)
    if trace is None:
        return CommandResult(payload={"verdict": "No"}, text="No")
    payload = {"verdict": "Yes"}
    text = "Yes"
    if args.verbose:
        payload["trace"] = [str(s) for s in trace.steps]
        text += "\n" + "\n".join(payload["trace"])
    return CommandResult(payload=payload, text=text)


def cmd_taqa(args) -> CommandResult:
    kb = _kb(args)
    goal = parse_fact(args.query)
    if not isinstance(goal, ConceptFact):
        raise ValueError("a query is a concept fact such as Happy(alice, 2028)")
    q = taqa.TaqaQuery(goal.concept, goal.subject, goal.time)
    if model.classify_fragment(kb.tbox).is_future and args.method == "grammar":
        red = taqa.taqa_reduction(kb.tbox, kb.abox, q)
        verdict = "Yes" if red.answer else "No"
        payload = {"verdict": verdict, "method": "grammar", "nonterminal": red.nonterminal,
                   "length": red.length, "reason": red.reason}
        text = verdict
        if args.verbose:
            text += f"\nnonterminal: {red.nonterminal}\nlength: {red.length}\nreason: {red.reason}"
        return CommandResult(payload=payload, text=text)
    diag = [] if args.method == "saturation" else [
        "TBox has past shifts: answered by bounded saturation, which is incomplete"]
    base = taqa.taqa_config(kb, q)
    if args.depth is None:
        args.depth = -1
    cfg = _config(args, base)
    trace = taqa.answer_taqa_saturation(kb, q, cfg)
    if trace is None:
        return CommandResult(payload={"verdict": "UnknownAtBound", "method": "saturation",
                                      "config": _config_json(cfg)},
                             diagnostics=diag + [_unknown(cfg)], text="UnknownAtBound")
    text = "Yes" + ("\n" + _trace_text(trace) if args.verbose else "")
    return CommandResult(payload={"verdict": "Yes", "method": "saturation",
                                  "trace": trace.to_json()}, diagnostics=diag, text=text)


def _ep_text(ep: semilinear.EventuallyPeriodic) -> str:
    parts = [f"core: {sorted(ep.core)}"]
    for name, t in (("future", ep.future), ("past", ep.past)):
        if t is not None:
            parts.append(f"{name}: from {t.start}, period {t.period}, residues {sorted(t.residues)}")
    return "\n".join(parts)


def cmd_detect_period(args) -> CommandResult:
    if args.samples is not None:
        samples = {int(x) for x in args.samples.replace(",", " ").split()}
        diag = []
    else:
        if args.tbox is None or args.lhs is None or args.rhs is None:
            raise ValueError("give --samples, or a TBox with --lhs and --rhs")
        tbox = _tbox(args)
        cfg = _config(args, saturation.ci_config(tbox, args.bound))
        samples = saturation.shift_set(tbox, args.lhs, args.rhs, args.bound, cfg)
        diag = [f"samples from bounded saturation on [-{args.bound}, {args.bound}]"]
    ep = semilinear.detect_periodicity(samples, args.bound)
    diag.append(f"certified only against the sampled window [-{args.bound}, {args.bound}]")
    if ep is None:
        return CommandResult(payload={"periodic": None, "bound": args.bound}, diagnostics=diag,
                             text="no period fits")
    sl = semilinear.from_eventually_periodic(ep)
    payload = {"periodic": ep.to_json(), "bound": args.bound, "semilinear": str(sl),
               "size": sl.size()}
    return CommandResult(payload=payload, diagnostics=diag, text=_ep_text(ep) + f"\nsemilinear: {sl}")


def cmd_emit_datalog(args) -> CommandResult:
    tbox = _tbox(args)
    model.require_linear(tbox)
    cfg = _config(args, saturation.ci_config(tbox, args.bound))
    fit = datalog.fitted_shift_sets(tbox, args.bound, cfg)
    p = datalog.emit_datalog(tbox, fit.shifts)
    diag = [f"shift sets fitted from samples on [-{args.bound}, {args.bound}]"]
    diag += [f"no period fits {a}->{b}; kept as sampled points" for a, b in fit.unfitted]
    payload = {"rules": [str(r) for r in p.rules], "auxiliary": sorted(p.auxiliary)}
    return CommandResult(payload=payload, diagnostics=diag, text=datalog.serialize_program(p).rstrip("\n"))


def cmd_eval_datalog(args) -> CommandResult:
    p = datalog.parse_program(_read(args.program))
    abox = parse_abox(_read(args.abox))
    facts = datalog.eval_datalog_bounded(p, abox, (args.lo, args.hi))
    lines = sorted((str(f) for f in facts), key=lambda s: s)
    return CommandResult(payload={"window": [args.lo, args.hi], "facts": lines}, text="\n".join(lines))


# parser

def _bounds(p: argparse.ArgumentParser, depth: bool = True) -> None:
    p.add_argument("--lo", type=int, help="first timestamp of the saturation window")
    p.add_argument("--hi", type=int, help="last timestamp of the saturation window")
    if depth:
        p.add_argument("--depth", type=int, help="null chain depth (negative: unbounded)")
    p.add_argument("--max-steps", type=int, help="saturation step budget")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="telx", description="Temporal EL reasoning through grammars.")
    top.add_argument("--json", action="store_true", help="print a JSON result object")
    sub = top.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        p.set_defaults(fn=fn)
        return p

    p = add("classify", cmd_classify, "fragment flags of a TBox")
    p.add_argument("tbox")
    p = add("validate", cmd_validate, "normal-form violations of a TBox")
    p.add_argument("tbox")

    p = add("saturate", cmd_saturate, "bounded saturation of a knowledge base")
    p.add_argument("tbox")
    p.add_argument("abox")
    _bounds(p)

    for name, fn, help in (("entails", cmd_entails, "decide a fact or a shifted inclusion"),
                           ("trace", cmd_trace, "derivation of a fact as JSON")):
        p = add(name, fn, help)
        p.add_argument("tbox")
        p.add_argument("abox", nargs="?")
        p.add_argument("--fact", help="goal such as Happy(alice, 2028)")
        p.add_argument("--ci", help="inclusion such as 'Prof [= X^3 Happy'")
        _bounds(p)

    p = add("shift-set", cmd_shift_set, "derived shifts between two concepts")
    p.add_argument("tbox")
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--bound", type=int, default=10)
    _bounds(p)

    p = add("to-grammar", cmd_to_grammar, "conjunctive grammar of a future TBox")
    p.add_argument("tbox")
    p = add("to-tbox", cmd_to_tbox, "future TBox of a unary grammar")
    p.add_argument("grammar")
    p = add("to-cfg", cmd_to_cfg, "context-free grammar over {c, d} of a linear TBox")
    p.add_argument("tbox")

    p = add("member", cmd_member, "grammar membership, or a word with a given #c - #d")
    p.add_argument("grammar", nargs="?", default="-")
    p.add_argument("--nt", required=True)
    p.add_argument("--word", help="c^16, aabbcc or _ for the empty word")
    p.add_argument("--balance", type=int, help="search a word with #c - #d equal to this")
    p.add_argument("--max-len", type=int, help="word length budget for --balance")
    p.add_argument("-v", "--verbose", action="store_true")

    p = add("taqa", cmd_taqa, "answer a temporal atomic query")
    p.add_argument("tbox")
    p.add_argument("abox")
    p.add_argument("--query", required=True, help="e.g. Happy(alice, 2028)")
    p.add_argument("--method", choices=("grammar", "saturation"), default="grammar")
    p.add_argument("-v", "--verbose", action="store_true")
    _bounds(p)

    p = add("detect-period", cmd_detect_period, "fit an eventually periodic form to a shift set")
    p.add_argument("tbox", nargs="?")
    p.add_argument("--lhs")
    p.add_argument("--rhs")
    p.add_argument("--samples", help="comma separated integers instead of a TBox")
    p.add_argument("--bound", type=int, default=20)
    _bounds(p)

    p = add("emit-datalog", cmd_emit_datalog, "temporal Datalog program of a linear TBox")
    p.add_argument("tbox")
    p.add_argument("--bound", type=int, default=10)
    _bounds(p)

    p = add("eval-datalog", cmd_eval_datalog, "bounded evaluation of a Datalog program")
    p.add_argument("program")
    p.add_argument("abox")
    p.add_argument("--lo", type=int, default=-15)
    p.add_argument("--hi", type=int, default=15)
    return top


def run(argv: list[str] | None = None) -> tuple[int, CommandResult, bool]:
    args = build_parser().parse_args(argv)
    try:
        res = args.fn(args)
        code = 0
    except ParseError as e:
        res, code = CommandResult("error", None, [f"parse error: {e}"]), 1
    except model.FragmentError as e:
        res, code = CommandResult("error", None, [f"fragment error: {e}"]), 1
    except (ValueError, KeyError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        res, code = CommandResult("error", None, [f"error: {msg}"]), 1
    return code, res, args.json


def main(argv: list[str] | None = None) -> int:
    code, res, as_json = run(argv)
    if as_json:
        print(json.dumps(res.to_json(), sort_keys=True, indent=2))
    else:
        if res.text:
            print(res.text)
        for d in res.diagnostics:
            print(("" if res.status == "error" else "note: ") + d, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
