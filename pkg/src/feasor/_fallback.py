"""Pure numpy versions of the segment projectors in ``_kernels.pyx``.

Segments of equal length are stacked into 2-D gathers so that each group
is handled with a handful of vectorised calls.  Results match the compiled
kernels bit for bit.
"""

import numpy as np


def segment_sums(x, groups, m, at_most):
    out = np.array(x, dtype=np.float64, copy=True)
    for rows in groups:
        block = x[rows]
        # left-to-right accumulation, as in the compiled loop, so both
        # backends produce bit-identical sums
        total = np.add.accumulate(block, axis=1)[:, -1]
        shift = (m - total) / rows.shape[1]
        if at_most:
            np.minimum(shift, 0.0, out=shift)
        out[rows] = block + shift[:, None]
    return out


def segment_binary(x, groups, m, at_most):
    out = np.array(x, dtype=np.float64, copy=True)
    for rows in groups:
        block = x[rows]
        length = rows.shape[1]
        ones = np.zeros_like(block)
        if m > 0:
            # stable ascending sort: among ties the later position sorts last
            order = np.argsort(block, axis=1, kind="stable")
            top = order[:, max(length - m, 0):]
            np.put_along_axis(ones, top, 1.0, axis=1)
            if at_most:
                ones *= block > 0.5
        out[rows] = ones
    return out
