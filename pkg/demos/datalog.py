"""Fit every shift set of a linear TBox to a periodic form, emit the matching
Datalog program, and check that it derives what saturation derives."""

from pathlib import Path

from telx.datalog import emit_datalog, eval_datalog_bounded, fitted_shift_sets, serialize_program
from telx.formats import parse_abox, parse_tbox
from telx.model import ConceptFact, KnowledgeBase
from telx.saturation import SaturationConfig, saturate

DATA = Path(__file__).parent / "data"

tbox = parse_tbox((DATA / "local_detour.tel").read_text())
abox = parse_abox((DATA / "a0.abox").read_text())

fit = fitted_shift_sets(tbox, 10)
for pair, sset in sorted(fit.shifts.items()):
    print(pair, sset)
program = emit_datalog(tbox, fit.shifts)
print()
print(serialize_program(program))

window = (-20, 20)
ours = {f for f in eval_datalog_bounded(program, abox, window) if isinstance(f, ConceptFact)}
sat = saturate(KnowledgeBase(tbox, abox), SaturationConfig(*window, None))
inner = lambda facts: {f for f in facts if -8 <= f.time <= 8}
print("Datalog facts on [-8, 8]:", sorted(map(str, inner(ours))))
print("same as saturation:", inner(ours) == inner(sat.concept_facts()))
