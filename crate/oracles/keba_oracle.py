#!/usr/bin/env python3
"""Recomputes the worked numeric examples of the engine and world from first
principles and writes them to expected.json.

Stdlib only. Floats are IEEE doubles, as in the Rust code, so values obtained
by the same sequence of operations agree bit for bit; closed forms are kept
alongside the brute-force results where the two differ by rounding.

    python3 oracles/keba_oracle.py            # rewrite expected.json
    python3 oracles/keba_oracle.py --check    # exit 1 if it would change
"""

import json
import math
import sys
from pathlib import Path

OUT = Path(__file__).with_name("expected.json")

ACTIONS = ["eat", "drink", "none"]


def activation(v, a_prev, level, A, iota):
    w = (A ** level) * iota
    return (v + w * a_prev) / (1 + w)


def stability(s_prev, a_t, a_prev, kappa):
    return min(1.0, max(0.0, s_prev + kappa - abs(a_t - a_prev)))


def activation_cases():
    cases = []
    for v, a_prev, level in [(1.0, 0.0, 0), (0.0, 1.0, 2), (0.0, 1.0, 0), (0.0, 1.0, 1), (0.3, 0.9, 3)]:
        cases.append({"v": v, "a_prev": a_prev, "level": level, "A": 2.0, "iota": 1.0,
                      "a": activation(v, a_prev, level, 2.0, 1.0)})
    return cases


def stability_cases():
    return [
        {"s_prev": 0.5, "a_t": 0.6, "a_prev": 0.3, "kappa": 0.05, "s": 0.5 + 0.05 - 0.3},
        {"s_prev": 1.0, "a_t": 0.4, "a_prev": 0.4, "kappa": 0.05, "s": 1.0},
        {"s_prev": 0.1, "a_t": 0.95, "a_prev": 0.05, "kappa": 0.05, "s": 0.0},
    ]


def alternating_channel(ticks=200, kappa=0.05):
    """Level-0 koncept fed 1, 0, 1, 0, ... from rest."""
    a, s = 0.0, 0.0
    trace = []
    for t in range(ticks):
        v = 1.0 if t % 2 == 0 else 0.0
        a_prev = a
        a = activation(v, a_prev, 0, 2.0, 1.0)
        s = stability(s, a, a_prev, kappa)
        trace.append({"v": v, "a": a, "s": s})
    return {"kappa": kappa, "ticks": ticks, "trace": trace, "max_s": max(x["s"] for x in trace)}


def center_case():
    x, target, eta, v = [0.5, 0.5], [0.7, 0.5], 0.1, 1.0
    out = [xi + eta * v * (ai - xi) for xi, ai in zip(x, target)]
    return {"center": x, "target": target, "eta": eta, "v": v, "result": out}


def child_link_bounds():
    # (mean of parents + U[0.4, 0.6]) / 2 with every parent link at 1.
    lo, hi = 0.4, 0.6
    return {"parent_link": 1.0, "medium": [lo, hi], "child": [(1.0 + lo) / 2, (1.0 + hi) / 2]}


def vote_case():
    v, level, links = 0.8, 1, [1.0, 0.0, 0.0]
    scores = [v * l * (level + 1) ** 2 for l in links]
    best = max(range(3), key=lambda i: (scores[i], -i))
    return {"v": v, "level": level, "links": links, "scores": scores, "action": ACTIONS[best]}


def torus_case():
    w = h = 100.0
    dx, dy = abs(0.0 - 50.0), abs(0.0 - 50.0)
    dx, dy = min(dx, w - dx), min(dy, h - dy)
    return {"p": [0.0, 0.0], "q": [50.0, 50.0], "width": w, "height": h, "distance": math.sqrt(dx * dx + dy * dy)}


def attenuation_case():
    radius = 10.0
    d = radius / 2
    return {"perception_radius": radius, "distance": d, "redness": 1.0, "channel": 1.0 * (1 - d / radius)}


PHYS = {"hunger_rate": 1 / 1000, "thirst_rate": 1 / 1000, "high": 0.5, "low": 0.2,
        "drain": 1 / 8000, "gain": 1 / 8000}


def idle_physiology(max_ticks=10000):
    """Physiology of an animat that never acts, tick by tick from rest."""
    p = PHYS
    energy, hunger, thirst = 1.0, 0.0, 0.0
    hunger_at = {}
    for tick in range(1, max_ticks + 1):
        hunger = min(1.0, hunger + p["hunger_rate"])
        thirst = min(1.0, thirst + p["thirst_rate"])
        high = (hunger > p["high"]) + (thirst > p["high"])
        energy -= p["drain"] * high
        if hunger < p["low"] and thirst < p["low"]:
            energy += p["gain"]
        energy = min(1.0, max(0.0, energy))
        if tick in (500, 1000):
            hunger_at[tick] = {"hunger": hunger, "thirst": thirst}
        if energy <= 0.0:
            return {"params": p, "hunger_at": hunger_at, "death_tick": tick,
                    "closed_form": p["high"] / p["hunger_rate"] + 1 / (2 * p["drain"])}
    raise RuntimeError("idle animat never died")


def toy_reinforcement(ticks=8):
    """Two level-1 koncepts next to food. Eating is rewarded, drinking
    punished (no rain in reach), doing nothing yields no stimulus."""
    koncepts = [
        {"v": 1.0, "a": 0.5, "links": [0.45, 0.55, 0.0]},
        {"v": 0.5, "a": 0.5, "links": [0.5, 0.48, 0.0]},
    ]
    start = json.loads(json.dumps(koncepts))
    history = []
    for _ in range(ticks):
        scores = [0.0, 0.0, 0.0]
        for k in koncepts:
            for i in range(3):
                scores[i] += k["v"] * k["links"][i] * 4
        if all(s <= 0 for s in scores):
            action = 2
        else:
            action = max(range(3), key=lambda i: (scores[i], -i))
        sign = {0: "positive", 1: "negative", 2: None}[action]
        if sign is not None:
            for k in koncepts:
                if k["a"] <= 0:
                    continue
                g = max(range(3), key=lambda i: (k["links"][i], -i))
                agrees = (g == action) == (sign == "positive")
                k["links"][g] = 1.0 if agrees else 0.0
        history.append({"scores": scores, "action": ACTIONS[action], "stimulus": sign,
                        "links": [list(k["links"]) for k in koncepts]})
    return {"start": start, "history": history}


def build():
    return {
        "activation": activation_cases(),
        "stability": stability_cases(),
        "alternating_channel": alternating_channel(),
        "center": center_case(),
        "child_link": child_link_bounds(),
        "vote": vote_case(),
        "torus": torus_case(),
        "attenuation": attenuation_case(),
        "idle_physiology": idle_physiology(),
        "toy_reinforcement": toy_reinforcement(),
    }


def main():
    text = json.dumps(build(), indent=1, sort_keys=True) + "\n"
    if "--check" in sys.argv:
        if not OUT.exists() or OUT.read_text() != text:
            print("expected.json is stale; rerun without --check", file=sys.stderr)
            sys.exit(1)
        return
    OUT.write_text(text)


if __name__ == "__main__":
    main()
