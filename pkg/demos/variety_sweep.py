"""Equal-squares pairs: a norm sweep decides unitary dilatability.

For commuting S, T with S^2 = T^2, run lambda over the circle of averages
(1 + e^{i theta})/2 and track the operator norm of lambda S + (1-lambda) T.
Staying at or below one certifies a joint unitary dilation; any excursion
above one is a concrete obstruction witness.
"""

import numpy as np

from neilcone import dilation

nilpotent = dilation.VarietyPair(
    np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
    np.array([[0.0, 1.0j], [0.0, 0.0]], dtype=complex))
sweep = dilation.variety_check(nilpotent)
verdict = dilation.variety_verdict(nilpotent)
print("nilpotent pair, S^2 = T^2 = 0:")
print("  " + verdict.message)
for k in range(0, len(sweep.profile), len(sweep.profile) // 8):
    theta = 2 * np.pi * k / len(sweep.profile)
    print("  theta=%5.2f   norm %.6f" % (theta, sweep.profile[k]))
print()

hadamard = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
flipped = dilation.VarietyPair(hadamard, -hadamard)
verdict = dilation.variety_verdict(flipped)
print("unitary pair T = -S:")
print("  " + verdict.message)
print()

# The same separation of variables drives the extension formula: values on
# the two crossing lines w = z and w = -z glue to one function of (z, w).
hplus = lambda t: 1.0 + 2.0 * t + t ** 3
hminus = lambda t: 1.0 - t + 0.5 * t ** 2
print("two-line extension glues boundary data:")
for t in (0.3, -0.2 + 0.1j):
    on_diag = dilation.variety_extend(hplus, hminus, t, t)
    off_diag = dilation.variety_extend(hplus, hminus, t, -t)
    print("  z=%s   F(z,z)-H+(z) = %.2e   F(z,-z)-H-(z) = %.2e"
          % (t, abs(on_diag - hplus(t)), abs(off_diag - hminus(t))))
