"""Input validation helpers shared across the package."""

import numpy as np


def check_vector(z, name="z", min_len=1):
    """Coerce to a 1-D float array and check finiteness."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {z.shape}")
    if z.size < min_len:
        raise ValueError(f"{name} must have at least {min_len} entries, got {z.size}")
    if not np.all(np.isfinite(z)):
        raise ValueError(f"{name} contains non-finite values")
    return z


def check_matrix(Z, name="Z", allow_empty=False):
    """Coerce to a 2-D float array and check finiteness."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {Z.shape}")
    if not allow_empty and Z.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(Z)):
        raise ValueError(f"{name} contains non-finite values")
    return Z


def as_bool_mask(mask, m, name="mask"):
    """Coerce a sampling set to a boolean array of length ``m``.

    Accepts a boolean array, an integer index array (0-based), or an object
    with a ``to_bool()`` method.
    """
    if hasattr(mask, "to_bool"):
        out = mask.to_bool()
    else:
        arr = np.asarray(mask)
        if arr.dtype == bool:
            out = arr
        else:
            idx = arr.astype(int)
            if idx.size and (idx.min() < 0 or idx.max() >= m):
                raise ValueError(f"{name} indices out of range [0, {m})")
            out = np.zeros(m, dtype=bool)
            out[idx] = True
    if out.shape != (m,):
        raise ValueError(f"{name} has length {out.shape}, expected ({m},)")
    if not out.any():
        raise ValueError(f"{name} is empty")
    return out


def round_nearest(x, minimum=1):
    """Round half-up to an integer, clipped below at ``minimum``."""
    return max(int(np.floor(x + 0.5)), minimum)
