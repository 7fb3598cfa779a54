# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Scenarios and the simulation loop
#
# A scenario is a TOML file: obstacles, paths, target points, pedestrians with
# a controller each, and cameras. Six scenarios ship with the package.

# %%
import collections

from pedsim.scenario import ScenarioError, dump_scenario, load_scenario, parse_scenario, shipped_scenarios
from pedsim.simulation import run_simulation

print(shipped_scenarios())
scn = load_scenario("street_day")
print(scn.name, scn.duration_frames, "frames at", scn.fps, "fps")
print(collections.Counter(type(p.controller).__name__ for p in scn.pedestrians))

# %% [markdown]
# Validation collects every problem in one pass rather than stopping at the first.

# %%
broken = """format = 1
name = "broken"
duration_frames = 0

[[pedestrians]]
name = "a"
spawn = [0.0, 0.0, 0.0]
controller = "path"
path = "nowhere"
"""
try:
    parse_scenario(broken)
except ScenarioError as exc:
    for v in exc.violations:
        print(v)

# %% [markdown]
# Each pedestrian draws from its own random stream keyed by the scenario seed
# and its name, so a run is a pure function of the file.

# %%
trace = run_simulation(scn)
again = run_simulation(load_scenario("street_day"))
print(trace.to_dict() == again.to_dict())
last = trace.ticks[-1]
for p in last.pedestrians[:4]:
    print(p.name, [round(c, 2) for c in p.position], "goal", p.goal)

# %% [markdown]
# The canonical form round-trips: dumping and re-parsing gives the same scenario.

# %%
print(parse_scenario(dump_scenario(scn)) == scn)
