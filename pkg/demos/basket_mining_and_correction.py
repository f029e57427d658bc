"""
Correcting a misread word with the medicine database
====================================================

A recognizer output is rarely a clean database name.  This walk-through
mines association rules from past prescriptions, then shows how edit
distance and co-prescription context combine to pick a medicine.
"""

from rxread import load_medicine_db
from rxread.corpus import load_transactions
from rxread.lexicon import OptimizerConfig, apriori, build_index, mine_rules, optimize_prediction
from rxread.pipeline import DATA_DIR
from rxread import uam

db = load_medicine_db(DATA_DIR / "medicines.tsv")
tx = load_transactions(DATA_DIR / "transactions.tsv", db)
print(len(db), "medicines,", len(tx), "historical prescriptions")

# Frequent itemsets are the sets of medicines that appear together in at
# least min_support of the prescriptions.  Rules X -> y keep the itemsets
# whose conditional frequency P(y | X) clears min_confidence.
cfg = OptimizerConfig(max_dist=2, min_support=0.05, min_confidence=0.5)
itemsets = apriori(tx, cfg.min_support)
rules = mine_rules(itemsets, cfg.min_confidence)
print(len(itemsets), "frequent itemsets,", len(rules), "rules")
for r in sorted(rules, key=lambda r: -r.confidence)[:5]:
    lhs = ", ".join(db.get(m).name for m in sorted(r.antecedent))
    print(f"  {lhs} -> {db.get(r.consequent).name}  conf {r.confidence:.2f} lift {r.lift:.2f}")

# The BK-tree answers "which names lie within k edits" without scanning
# the whole database.
index = build_index(db)

# Step one: the UAM stage checks the raw string against the wordlist and
# repairs it to the nearest valid word when that is close enough.
words = uam.ValidUamDb.load(DATA_DIR / "uam_words.tsv")
raw = "metfornin"
u = uam.repair(uam.classify(uam.map_segments(list(raw)), words), words, cfg.max_dist)
print(f"\nraw {raw!r} -> uam {u.text!r} ({u.status.value}, distance {u.distance})")

# Step two: rank candidates.  Without context only distance matters.
for c in optimize_prediction(raw, (), index, rules, cfg)[:3]:
    print(f"  {c.entry.name:<16} distance {c.distance} score {c.score:.2f}")

# With another medicine already read from the page, a rule whose
# antecedent is satisfied adds its confidence to the matching candidate.
if rules:
    r = max(rules, key=lambda r: r.confidence)
    target = db.get(r.consequent).name
    garbled = target[:-1] + ("x" if target[-1] != "x" else "y")
    print(f"\ncontext {[db.get(m).name for m in r.antecedent]}, raw {garbled!r}")
    for c in optimize_prediction(garbled, r.antecedent, index, rules, cfg)[:3]:
        print(f"  {c.entry.name:<16} distance {c.distance} score {c.score:.2f}")
