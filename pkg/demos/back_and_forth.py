"""Past and future shifts through a rigid role: A holds, and two steps later
E holds, though no inclusion says so directly. Without conjunction the shift
sets come from a context-free grammar over c (one step forward) and d (one back)."""

from pathlib import Path

from telx.formats import parse_tbox
from telx.grammar import enumerate_language
from telx.saturation import shift_set
from telx.translations import exists_shift, linear_tbox_to_cfg, rigidise_linear

DATA = Path(__file__).parent / "data"

tbox = parse_tbox((DATA / "back_and_forth.tel").read_text())
print("A then E after", sorted(shift_set(tbox, "A", "E", 6)), "steps")

g = linear_tbox_to_cfg(tbox)
for k in range(-1, 4):
    print(f"  balance {k:2}: {exists_shift(g, ('A', 'E'), k, max_len=12)!r}")
print("words up to length 12:", sorted(enumerate_language(g, 12)["N_A_E"], key=lambda w: (len(w), w)))

# a local role only connects elements at one instant, so the detour must come back in time
detour = parse_tbox((DATA / "local_detour.tel").read_text())
res = rigidise_linear(detour)
print("\nlocal detour, exact rigidisation:", res.exact)
print("added:", ", ".join(map(str, res.added)))
