"""Dilate two rank-one partitions of the identity to coordinate projections.

Any family of rank-one PSD matrices summing to I_n is the compression of
the coordinate projections on a bigger space through one isometry; two such
families share a single isometry up to a unitary change of frame.
"""

import numpy as np

from neilcone import dilation, linalg

rng = np.random.default_rng(7)


def partition(n, m, zero_rows=()):
    """Random rank-one PSD family summing to I_n, padded with zero summands."""
    live = m - len(zero_rows)
    a = rng.standard_normal((live, live)) + 1j * rng.standard_normal((live, live))
    q = np.linalg.qr(a)[0][:, :n]
    out = []
    row = 0
    for j in range(m):
        if j in zero_rows:
            out.append(np.zeros((n, n), dtype=complex))
        else:
            r = q[row]
            out.append(np.outer(r.conj(), r))
            row += 1
    return tuple(out)


def show(inp, dil, label):
    worst = linalg.op_norm(dil.v.conj().T @ dil.v - np.eye(inp.dim))
    for mat, proj in zip(inp.a_list + inp.b_list, dil.p_list + dil.q_list):
        worst = max(worst, linalg.op_norm(dil.v.conj().T @ proj @ dil.v - mat))
    print("%s: n=%d summands=%d reconstruction error %.2e"
          % (label, inp.dim, inp.count, worst))


if __name__ == "__main__":
    # Two copies of the coin-flip split {I/2, I/2} on one dimension.
    half = np.array([[0.5]], dtype=complex)
    inp = dilation.NaimarkInput((half, half), (half, half))
    dil = dilation.naimark(inp)
    print("coin split: isometry column")
    print(np.round(dil.v, 6))
    show(inp, dil, "coin split")
    print()

    inp = dilation.NaimarkInput(partition(3, 6, zero_rows={2}),
                                partition(3, 6, zero_rows={5}))
    dil = dilation.naimark(inp)
    show(inp, dil, "random 3->6 with a zero summand")
    print("zero summand gives a zero isometry row: max entry %.1e"
          % float(np.abs(dil.v[2]).max()))
