"""A professor stays a professor, advises a PhD student who graduates three
years later, and is happy once proud. When does that happen?"""

from pathlib import Path

from telx.formats import parse_abox, parse_tbox
from telx.grammar import language_lengths
from telx.model import Individual, KnowledgeBase
from telx.saturation import entails_fact
from telx.taqa import TaqaQuery, taqa_config, taqa_reduction
from telx.translations import tbox_to_conjunctive_grammar

DATA = Path(__file__).parent / "data"

tbox = parse_tbox((DATA / "advisor.tel").read_text())
abox = parse_abox((DATA / "advisor.abox").read_text())
kb = KnowledgeBase(tbox, abox)
alice = Individual("alice")

# the shift set of (Prof, Happy) is the length set of one nonterminal
g = tbox_to_conjunctive_grammar(tbox)
print("Prof then Happy after", sorted(language_lengths(g, "N_Prof_Happy", 10)), "steps")

for year in (2026, 2027, 2028):
    q = TaqaQuery("Happy", alice, year)
    red = taqa_reduction(tbox, abox, q)
    print(f"Happy(alice, {year}): {'Yes' if red.answer else 'No'}"
          f"  via {red.nonterminal} on c^{red.length}")

# the same answer by saturation, with the derivation behind it
q = TaqaQuery("Happy", alice, 2028)
trace = entails_fact(kb, q.as_fact(), taqa_config(kb, q))
for step in trace.steps:
    print(f"  {step.rule_id.value:6} {', '.join(map(str, step.conclusions))}")
