"""Temporal EL reasoning by saturation and by translation to conjunctive grammars."""
