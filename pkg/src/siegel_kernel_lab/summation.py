"""Deterministic compensated and pairwise summation (real or complex)."""


def kahan_sum(values):
    """Compensated sum in the given order."""
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def pairwise_sum(values, block=8):
    """Recursive pairwise sum; a cross-check for :func:`kahan_sum`."""
    vals = list(values)
    if len(vals) <= block:
        total = 0.0
        for v in vals:
            total = total + v
        return total
    mid = len(vals) // 2
    return pairwise_sum(vals[:mid], block) + pairwise_sum(vals[mid:], block)


def summed(values, mode="kahan"):
    if mode == "kahan":
        return kahan_sum(values)
    if mode == "pairwise":
        return pairwise_sum(values)
    raise ValueError(f"unknown summation mode {mode!r}")


def relative_gap(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale
