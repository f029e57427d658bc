"""
Reading a synthetic prescription end to end
===========================================

Render a short prescription with one deliberately misspelt word, run the
bundled reader over it and print what each stage concluded.
"""

import json

from rxread import PipelineConfig, Recognizer
from rxread.corpus import render_page
from rxread.glyphs import default_atlas

# "amoxicilin" is missing an "l"; the pipeline should still land on the
# database entry.
lines = [["amoxicilin", "paracetamol"], ["cetirizine"]]
page, _ = render_page(lines, default_atlas(), seed=21)

# The default config points at the reader shipped inside the package and
# at the bundled medicine, prescription and wordlist files.
recognizer = Recognizer.from_config(PipelineConfig())
result = recognizer.recognize(page)

for seg in result["segments"]:
    pick = seg["pick"]["name"] if seg["pick"] else "(unresolved)"
    uam_text = seg["uam"]["text"] if seg["uam"] else None
    print(f"box {seg['box']}  raw {seg['raw']!r:16} uam {uam_text!r:16} pick {pick}")

# The same structure is what `rxread recognize` prints as JSON.
print(json.dumps(result["segments"][0], ensure_ascii=False, indent=2))
