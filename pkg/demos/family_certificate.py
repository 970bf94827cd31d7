"""
A small independent family
==========================

Run the full pipeline on a tiny schedule and read the certificate:
the evaluation matrix should be diagonal with growing entries.
"""

import json
import tempfile

from relqm.pipeline import PipelineConfig, run_pipeline

cfg = PipelineConfig.from_dict({
    "subgroups": [["a"]],
    "schedule": {"base": 4, "N": 2},
    "radii": {"subgroup": 6, "defect": 2, "powers": 2, "projection": 2, "stability": 3,
              "family_ball": 2, "elliptic": 4, "hops": 2, "hops_check": 3, "bounded_generation": 2},
    "bounded_generation": {"N": 3, "samples": 100},
})

with tempfile.TemporaryDirectory() as out:
    res = run_pipeline(cfg, out=out, reproducible=True)
    print("exit code:", res.exit_code, res.message)
    cert = res.certificate

print("g0:", cert["g0"], " contracting g:", cert["g"], " pair:", cert["pair"]["g1"], cert["pair"]["g2"])
for row in cert["family"]:
    print(f"f_{row['i']}: exponents {row['exponents']}, length {row['f_i']['length']}")
print("checks:")
for k, v in cert["checks"].items():
    print(f"   {k:30s} {v}")

# entry (i, j) is h_i evaluated on the m-th power of f_j
for m, mat in cert["matrix"].items():
    print(f"m = {m}:", json.dumps(mat))
print("constants:", cert["constants"])
