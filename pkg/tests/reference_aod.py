"""Deliberately naive AOD for 1-D absolute losses on [0, 1], written from the
algorithm listing with plain floats and lists. Used as an oracle only."""

import math


def phi(R, C):
    if R <= 0:
        return 1.0
    return math.exp(R * R / (3 * C))


def weight(R, C):
    return 0.5 * (phi(R + 1, C + 1) - phi(R - 1, C + 1))


def reference_aod(thetas, T, D=1.0, G=1.0):
    """Returns the list of played actions for losses |w - theta_t| (each a float)."""
    levels = []
    k = 0
    while 2 ** k <= T:
        levels.append(k)
        k += 1
    # active experts: dicts with keys start, length, w, eta, R, C
    active = []
    played = []
    for t in range(1, T + 1):
        for k in levels:
            L = 2 ** k
            if (t - 1) % L != 0:
                continue
            expert = {"start": t, "length": L, "eta": D / (G * math.sqrt(L)), "R": 0.0, "C": 0.0}
            if t == 1:
                expert["w"] = 0.0
            else:
                old = [e for e in active if e["length"] == L]
                assert len(old) == 1
                expert["w"] = old[0]["w"]
                active.remove(old[0])
            active.append(expert)
        assert len(active) == len(levels)

        raw = [weight(e["R"], e["C"]) for e in active]
        total = math.fsum(raw)
        if total == 0:
            p = [1.0 / len(active)] * len(active)
        else:
            p = [x / total for x in raw]
        w = math.fsum(pi * e["w"] for pi, e in zip(p, active))
        played.append(w)

        theta = thetas[t - 1]
        f_w = abs(w - theta)
        for e in active:
            r = f_w - abs(e["w"] - theta)
            e["R"] = e["R"] + r
            e["C"] = e["C"] + abs(r)
        for e in active:
            x = e["w"]
            g = 0.0 if x == theta else (1.0 if x > theta else -1.0)
            e["w"] = min(1.0, max(0.0, x - e["eta"] * g))
    return played
