#!/usr/bin/env python3
"""Generate the synthetic 51-operation battery-line analog in data/analog/.

The line is hand-designed so its aggregates are known in closed form:

* operation 38 alone takes 43.9 s, so no configuration beats 43.9 s;
* the optimal initial line uses 20 of 40 agents with three stations at
  43.9 s (stations 5, 11 and 18);
* stations 2 and 3 are the only adjacent stations that one agent type could
  merge (45.6 s together), which ends the 20-agent plateau at c_t = 0.4;
* Worker2 (station 6) works 39.53 s per part, so +50 % gives 59.3 s and
  +200 % gives 118.6 s;
* Worker3 (station 8, 30.44 s) can take operations 22-25, and
  LargeRobot3..5 can take operations 19-21 at worker speed. Balancing
  Worker2, LargeRobot3 and Worker3 under +200 % gives (118.6 + 3 * 74.34) / 7
  = 48.8 s. Dropping Worker2 instead would leave LargeRobot3 at 58.4 s, so
  agent-heavy weights keep 20 agents.

Robots and machines are deterministic. Worker times are truncated normals
with a coefficient of variation of CV_WORKER. The sample logs are drawn with
numpy from a fixed seed.
"""

from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path

import numpy as np

CV_WORKER = 0.06
SEED = 20240613
HORIZON_S = 16 * 3600

# (station agent, skill, op times). Op numbering runs through the stations.
STATIONS = [
    ("Worker0", "Kitting", [9.8, 12.4, 10.3]),
    ("LargeRobot0", "CellPick", [7.2, 8.1, 6.7]),
    ("LargeRobot1", "CellPick", [8.4, 7.9, 7.3]),
    ("Worker1", "Insulation", [11.2, 13.5, 9.6]),
    ("LargeRobot3", "ModuleLift", [7.1, 6.8, 8.3, 7.4, 6.9, 7.4]),
    ("Worker2", None, [4.8, 5.1, 4.6, 5.9, 5.53, 2.6, 11.0]),
    ("WeldingMachine0", "Welding", [36.8]),
    ("Worker3", "Harness", [10.2, 9.84, 10.4]),
    ("CameraInspector0", "Inspection", [8.5, 12.2, 9.9]),
    ("SmallRobot0", "Assembly", [6.1, 7.7, 5.4, 8.8, 6.5]),
    ("LeakTester0", "LeakTest", [43.9]),
    ("Worker4", "Sealing", [14.6, 17.3]),
    ("MiddleRobot0", "Fastening", [19.2, 18.1]),
    ("WeldingMachine1", "LaserWelding", [33.4]),
    ("Worker5", "Cabling", [15.8, 16.9]),
    ("SmallRobot1", "Screwing", [18.4, 17.7]),
    ("Scanner0", "Labeling", [28.6]),
    ("MiddleRobot1", "LidMount", [43.9]),
    ("CameraInspector1", "FinalInspection", [31.2]),
    ("LeakTester1", "EndTest", [26.4]),
]
# Worker2's station splits into three skills.
WORKER2_SKILLS = ["Stacking"] * 3 + ["Busbar"] * 4

# Skills per agent. Agents with the same skills and times are interchangeable.
AGENTS = {
    "Worker": {
        "Worker0": ["Kitting"], "Worker6": ["Kitting"],
        "Worker1": ["Insulation"], "Worker7": ["Insulation"],
        "Worker2": ["Stacking", "Busbar", "Harness"], "Worker3": ["Busbar", "Harness"],
        "Worker4": ["Sealing"], "Worker8": ["Sealing"],
        "Worker5": ["Cabling"], "Worker9": ["Cabling"],
    },
    "LargeRobot": {
        **{f"LargeRobot{i}": ["CellPick"] for i in range(3)},
        **{f"LargeRobot{i}": ["ModuleLift", "Stacking"] for i in range(3, 6)},
    },
    "MiddleRobot": {f"MiddleRobot{i}": ["Fastening", "LidMount"] for i in range(6)},
    "SmallRobot": {f"SmallRobot{i}": ["Assembly", "Screwing"] for i in range(6)},
    "CameraInspector": {f"CameraInspector{i}": ["Inspection", "FinalInspection"] for i in range(3)},
    "Scanner": {f"Scanner{i}": ["Labeling"] for i in range(3)},
    "WeldingMachine": {f"WeldingMachine{i}": ["Welding", "LaserWelding"] for i in range(3)},
    "LeakTester": {f"LeakTester{i}": ["LeakTest", "EndTest"] for i in range(3)},
}

SCENARIOS = {
    # name: slow-down factor of Worker2 in the sample log
    "none": 1.0,
    "scenario1": 1.5,
    "scenario2": 3.0,
}


def operations():
    """List of (op name, skill, nominal time, station index)."""
    out = []
    for s, (agent, skill, times) in enumerate(STATIONS):
        for i, t in enumerate(times):
            sk = WORKER2_SKILLS[i] if skill is None else skill
            out.append((f"Op{len(out) + 1}", sk, t, s))
    return out


def agent_type(name):
    for typ, members in AGENTS.items():
        if name in members:
            return typ
    raise KeyError(name)


def time_model(agent, op, mean):
    if agent_type(agent) == "Worker":
        return {"agent": agent, "op": op, "kind": "TruncNormal", "mean": mean,
                "sd": round(CV_WORKER * mean, 4)}
    return {"agent": agent, "op": op, "kind": "Constant", "mean": mean}


def build_graph():
    ops = operations()
    skills = sorted({sk for _, sk, _, _ in ops})
    entities = [{"kind": "Line", "name": "BatteryLine"}]
    for typ, members in AGENTS.items():
        entities += [{"kind": "Agent", "name": a, "type": typ} for a in members]
    entities += [{"kind": "Station", "name": f"Station{s + 1}"} for s in range(len(STATIONS))]
    entities += [{"kind": "Operation", "name": name} for name, _, _, _ in ops]
    entities += [{"kind": "Capability", "name": f"{sk}Capability"} for sk in skills]

    triples = []
    for name, sk, _, _ in ops:
        triples.append([f"Operation:{name}", "needs", f"Capability:{sk}Capability"])
    for a, b in zip(ops, ops[1:]):
        triples.append([f"Operation:{a[0]}", "precedes", f"Operation:{b[0]}"])
    for members in AGENTS.values():
        for agent, agent_skills in members.items():
            triples += [[f"Agent:{agent}", "has", f"Capability:{sk}Capability"] for sk in agent_skills]
    for s, (agent, _, _) in enumerate(STATIONS):
        triples.append(["Line:BatteryLine", "contains", f"Station:Station{s + 1}"])
        triples.append([f"Station:Station{s + 1}", "contains", f"Agent:{agent}"])

    models = []
    for members in AGENTS.values():
        for agent, agent_skills in members.items():
            for name, sk, t, _ in ops:
                if sk in agent_skills:
                    models.append(time_model(agent, name, t))
    return {"entities": entities, "triples": triples, "time_models": models}


def build_config():
    ops = operations()
    return {
        "operations": [name for name, _, _, _ in ops],
        "assignment": [{"agent": STATIONS[s][0], "op": name, "fraction": 1.0} for name, _, _, s in ops],
    }


def sample_log(rng, multiplier, parts_before=300, parts_after=300, cycle=43.9):
    """Worker2 and Worker3 durations, one row per operation, in time order.

    Worker2 slows down by `multiplier` from part `parts_before` on.
    """
    ops = operations()
    rows = []
    by_agent = {a: [(n, t) for n, _, t, s in ops if STATIONS[s][0] == a] for a in ("Worker2", "Worker3")}
    clock = 0.0
    for part in range(parts_before + parts_after):
        factor = multiplier if part >= parts_before else 1.0
        start = clock
        for agent in ("Worker2", "Worker3"):
            t = start
            scale = factor if agent == "Worker2" else 1.0
            for op, mean in by_agent[agent]:
                d = 0.0
                while d <= 0.0:
                    d = rng.normal(mean * scale, CV_WORKER * mean * scale)
                t += d
                rows.append((round(t, 3), agent, op, round(d, 4)))
        clock += cycle * max(1.0, factor * 39.53 / cycle)
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def write_scenario(out: Path, name, multiplier):
    doc = {
        "graph": "graph.json",
        "config": "config.json",
        "samples": f"samples_{name}.csv",
        "monitor": {"k": 3.0, "window": 10, "persistence": 2},
        "weight_sets": [
            {"label": "plan_switch", "c_t": 0.1, "c_z": 0.9},
            {"label": "configuration_switch", "c_t": 0.9, "c_z": 0.1},
        ],
        "adjacent": ["LargeRobot3", "WeldingMachine0", "Worker3"],
        "allow_sharing": True,
        "policy": {"order": ["throughput", "agents", "adjustment"]},
        "horizon_s": HORIZON_S,
        "seed": 7,
        "replications": 5,
    }
    (out / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "analog")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "graph.json").write_text(json.dumps(build_graph(), indent=1) + "\n")
    (args.out / "config.json").write_text(json.dumps(build_config(), indent=1) + "\n")
    rng = np.random.default_rng(SEED)
    for name, mult in SCENARIOS.items():
        with open(args.out / f"samples_{name}.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["timestamp_s", "agent", "op", "duration_s"])
            w.writerows(sample_log(rng, mult))
        write_scenario(args.out, name, mult)


if __name__ == "__main__":
    main()
