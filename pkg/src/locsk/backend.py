"""Backend selection: compiled extension core vs pure numpy fallback.

The compiled core (locsk._corex, built from Cython) is preferred when
importable; otherwise the numpy fallback in locsk._pure is used.  Selection
can be forced with the environment variable LOCSK_BACKEND=compiled|pure|auto
(read at import) or switched at runtime with use(), which tests and the
benchmark harness rely on.
"""

import os

import numpy as np

from . import _pure

try:
    from . import _corex
except ImportError:
    _corex = None

_active_name = None
_impl = None


def available():
    names = ["pure"]
    if _corex is not None:
        names.insert(0, "compiled")
    return tuple(names)


def use(name: str) -> str:
    """Select a backend by name ('auto', 'compiled' or 'pure')."""
    global _active_name, _impl
    if name == "auto":
        name = "compiled" if _corex is not None else "pure"
    if name == "compiled":
        if _corex is None:
            raise ImportError(
                "compiled core locsk._corex is not available; build the "
                "extension or set LOCSK_BACKEND=pure"
            )
        _impl = _corex
    elif name == "pure":
        _impl = _pure
    else:
        raise ValueError(f"unknown backend {name!r}")
    _active_name = name
    return _active_name


def active() -> str:
    return _active_name


def _as_c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def gray_logz(jmat, fields) -> float:
    return float(_impl.gray_logz(_as_c(jmat), _as_c(fields)))


def correlation_sweep(jmat, fields):
    """(logZ, <s_a>, <s_a s_b>) under the Gibbs measure of 0.5 s'Js + f's."""
    jmat = _as_c(jmat)
    fields = _as_c(fields)
    if _impl is _pure:
        return _pure.correlation_sweep(jmat, fields)
    n = fields.shape[0]
    m_out = np.empty(n)
    c_out = np.empty((n, n))
    logz = _corex.correlation_sweep(jmat, fields, m_out, c_out)
    return float(logz), m_out, c_out


def heat_bath_chunk(jmat, fields, sigma, local, uniforms, snaps, first_record, every, energy):
    jmat = _as_c(jmat)
    fields = _as_c(fields)
    uniforms = _as_c(uniforms)
    if _impl is _pure:
        return _pure.heat_bath_chunk(
            jmat, fields, sigma, local, uniforms, snaps, first_record, every, energy
        )
    if snaps is None:
        dummy = np.empty((1, sigma.shape[0]), dtype=np.int8)
        return _corex.heat_bath_chunk(
            jmat, fields, sigma, local, uniforms, dummy, 0, 1, energy, False
        )
    return _corex.heat_bath_chunk(
        jmat, fields, sigma, local, uniforms, snaps, first_record, every, energy, True
    )


use(os.environ.get("LOCSK_BACKEND", "auto"))
