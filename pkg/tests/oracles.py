"""Independent reference implementations the tests compare against.

None of these import the code paths they check: the worked-example numbers
were computed once with 40-digit decimal arithmetic and frozen, the design
scan is a flat product loop, and the cache reference uses OrderedDicts.
"""

import itertools
from collections import OrderedDict

# Worked design point: n=4, A_L1=4, A_CPU=16, A_L2=64, alpha=1, mu=0.1, mu_n=0.05,
# g=0.2, chi=1, beta=0.4, tau=1, d_NoC=10, d_D=200, E_n=1, k_cache=1, k_core=0.1.
# Frozen from a decimal (prec=40) cell-by-cell evaluation.
WORKED = {
    "m1": 0.0975,
    "m2": 0.04875,
    "d_l1": 1.741101126592248278,
    "d_l2": 15.27803164309157704,
    "cpi_m": 3.938958457797363180,
    "cpi_c": 0.25,
    "cpi_1": 0.9877916915594726360,
    "ipc": 4.049436773136868727,
    "m_d": 0.004753125,
    "power": 22.4,
}


def hand_miss_rate(a, mu, alpha, mu_n):
    return mu_n + (1 - mu_n) * mu * (alpha / a) ** 0.5


def naive_optimum(n_values, l1_values, cpu_values, a_l2_min, a_total, evaluate_point, feasible):
    """Flat scan over the full product; returns ((n, a_l1, a_cpu), ipc) or None."""
    table = []
    for n, a1, ac in itertools.product(n_values, l1_values, cpu_values):
        a2 = a_total - n * (a1 + ac)
        if a2 < a_l2_min or a2 <= 0:
            continue
        res = evaluate_point(n, a1, ac, a2)
        if feasible(res):
            table.append(((n, a1, ac), res.ipc))
    if not table:
        return None
    top = max(ipc for _, ipc in table)
    winners = sorted(key for key, ipc in table if ipc == top)
    return winners[0], top


class RefLRU:
    """One set-associative LRU cache built from OrderedDicts."""

    def __init__(self, capacity, line, ways):
        self.line, self.ways = line, ways
        self.nsets = capacity // line // ways
        self.sets = [OrderedDict() for _ in range(self.nsets)]

    def access(self, addr):
        blk = addr // self.line
        s = self.sets[blk % self.nsets]
        if blk in s:
            s.move_to_end(blk)
            return True
        if len(s) >= self.ways:
            s.popitem(last=False)
        s[blk] = None
        return False


def ref_simulate(records, n, l1, l2):
    """Return ([(acc, hit, miss)] per core, (acc, hit, miss) for L2)."""
    l1s = [RefLRU(*l1) for _ in range(n)]
    shared = RefLRU(*l2)
    per = [[0, 0, 0] for _ in range(n)]
    l2c = [0, 0, 0]
    for core, _op, addr in records:
        per[core][0] += 1
        if l1s[core].access(addr):
            per[core][1] += 1
            continue
        per[core][2] += 1
        l2c[0] += 1
        if shared.access(addr):
            l2c[1] += 1
        else:
            l2c[2] += 1
    return [tuple(p) for p in per], tuple(l2c)
