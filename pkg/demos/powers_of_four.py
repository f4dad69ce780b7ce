"""A grammar with intersection whose one-letter language is {c^(4^n)} turns
into a TBox whose shift set is not eventually periodic."""

from pathlib import Path

from telx.formats import parse_grammar
from telx.grammar import language_lengths
from telx.saturation import SaturationConfig, shift_sets
from telx.semilinear import detect_periodicity
from telx.translations import grammar_to_tbox

DATA = Path(__file__).parent / "data"

g = parse_grammar((DATA / "powers_of_four.cg").read_text())
lengths = language_lengths(g, "N1", 100)
print("N1 lengths up to 100:", sorted(lengths))
print("periodic fit:", detect_periodicity(lengths, 100))

res = grammar_to_tbox(g)
print(f"\nTBox with {len(res.tbox.inclusions)} inclusions, source concept {res.source_concept}")
# unbounded null chains: the engine stops once nulls repeat
shifts = shift_sets(res.tbox, res.source_concept, 20, SaturationConfig(-5, 25, None))
print("A then N1 after", sorted(shifts[res.concept_of["N1"]]), "steps (bound 20)")
