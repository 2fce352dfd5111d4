# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Scenario files and the command line
#
# A scenario is a JSON document naming a chart, a carrier, a bundle,
# connections and tasks. `run` turns it into a report dict; the `uthchern`
# command prints the same report as canonical JSON.

# %%
import json
import subprocess
import sys
from pathlib import Path

from uthchern import ScenarioError, parse_scenario, run
from uthchern.scenario import residual_lines

root = Path.cwd() if (Path.cwd() / "scenarios").exists() else Path.cwd().parent
text = (root / "scenarios" / "aff1.json").read_text()

# %%
s = parse_scenario(text)
report = run(s)
print(report["passed"])
for t in report["tasks"]:
    print(t["task"], t.get("connection"), t["passed"])

# %% [markdown]
# ## Diagnostics
#
# Malformed input is reported with a JSON path and never reaches the
# checkers.

# %%
bad = json.loads(text)
bad["tasks"][0]["connection"] = "missing"
try:
    parse_scenario(bad)
except ScenarioError as exc:
    print(exc)

# %% [markdown]
# ## A failing identity
#
# A corrupted structure constant makes the carrier check fail. The report
# still comes back, and the residuals say where.

# %%
bad = json.loads(text)
bad["carrier"]["structure"] = [[1, 2, 1, "x"]]
failed = run(parse_scenario(bad))
print(failed["passed"])
print("\n".join(residual_lines(failed)[:3]))

# %% [markdown]
# ## The command
#
# Exit codes: 0 when everything passes, 1 when an identity fails, 2 for
# unreadable or invalid input.

# %%
proc = subprocess.run([sys.executable, "-m", "uthchern", str(root / "scenarios" / "aff1.json"), "--format", "text"],
                      capture_output=True, text=True)
print(proc.returncode)
print(proc.stdout)
