"""Pure-Python residual-tracking adjustment, used when the extension is absent."""

import numpy as np


def adjust_into(proposed, surplus, deficit, sellers, buyers, thv, out):
    """Write feasible transfers into ``out``; ``surplus``/``deficit`` are consumed."""
    sellers = [int(i) for i in sellers]
    buyers = [int(j) for j in buyers]
    if not sellers or not buyers:
        return
    block = np.asarray(proposed)[np.ix_(sellers, buyers)].tolist()
    res_d = [float(deficit[j]) for j in buyers]
    thv = float(thv)
    result = []
    for a, i in enumerate(sellers):
        s = float(surplus[i])
        row = block[a]
        out_row = [0.0] * len(buyers)
        for b in range(len(buyers)):
            p = row[b]
            if p < 0.0:
                p = 0.0
            m = min(s, res_d[b], p, thv)
            out_row[b] = m
            s = s - m
            res_d[b] = res_d[b] - m
        surplus[i] = s
        result.append(out_row)
    out[np.ix_(sellers, buyers)] = result
    for b, j in enumerate(buyers):
        deficit[j] = res_d[b]
