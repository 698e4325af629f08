"""Fourier representation of the localization kernel q^2 on [-1, 1)^d.

The kernel is stored as a finite list of canonical cosine modes: a mode
vector k is canonical when k = 0 or its first nonzero component is positive.
Each canonical k != 0 stands for the +/-k pair, so the series reads

    q^2(x) = gamma0 + sum_{canonical k != 0} 2 * gamma_k * cos(pi k . x),

which is automatically continuous across the periodic boundary -1 == 1.  The
total mass Gamma = sum over all of Z^d of gamma_k (symmetric convention
gamma_{-k} = gamma_k) equals q^2(0).

Tolerances: a fitted coefficient below -1e-8 or a series value below -1e-10
on the validation grid rejects the kernel as not of positive type; anything
inside those bands is round-off and gets clamped.
"""

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import LocskValidationError, NotPositiveType, TruncationError
from .lattice import LatticeBox

COEFF_TOL = 1e-8
POINTWISE_TOL = 1e-10
# modes with a relative weight below this are dropped by the grid fit
PRUNE_REL_TOL = 1e-12


def is_canonical(k) -> bool:
    for c in k:
        if c > 0:
            return True
        if c < 0:
            return False
    return True  # all zero


def nonzero_components(k) -> int:
    return sum(1 for c in k if c != 0)


@dataclass(frozen=True)
class KernelSpec:
    """Canonical cosine-mode representation of q^2.

    modes: tuple of (k, gamma) with k a dim-tuple of ints in canonical form,
    sorted by k; at most one entry per k.
    """

    dim: int
    modes: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise LocskValidationError(f"dim must be >= 1, got {self.dim}")
        seen = set()
        norm = []
        for k, gamma in self.modes:
            k = tuple(int(c) for c in k)
            gamma = float(gamma)
            if len(k) != self.dim:
                raise LocskValidationError(f"mode {k} has wrong dimension")
            if not is_canonical(k):
                raise LocskValidationError(f"mode {k} is not canonical")
            if k in seen:
                raise LocskValidationError(f"duplicate mode {k}")
            if gamma < 0.0:
                raise NotPositiveType(f"negative coefficient {gamma} at mode {k}")
            seen.add(k)
            norm.append((k, gamma))
        norm.sort(key=lambda kg: kg[0])
        object.__setattr__(self, "modes", tuple(norm))
        vmin = float(self.q2(_validation_grid(self.dim, self.max_mode)).min())
        if vmin < -POINTWISE_TOL:
            raise NotPositiveType(f"q^2 reaches {vmin} on the validation grid")

    @property
    def gamma0(self) -> float:
        for k, gamma in self.modes:
            if nonzero_components(k) == 0:
                return gamma
        return 0.0

    @property
    def gamma_sum(self) -> float:
        """Gamma = sum over Z^d of gamma_k = q^2(0)."""
        total = self.gamma0
        for k, gamma in self.modes:
            if nonzero_components(k) != 0:
                total += 2.0 * gamma
        return total

    @property
    def max_mode(self) -> int:
        m = 0
        for k, _ in self.modes:
            for c in k:
                m = max(m, abs(c))
        return m

    @cached_property
    def dhat_max(self) -> int:
        """Largest supported decay exponent, 0 when the hypothesis fails."""
        dhat, ok = check_hypothesis2(self)
        return dhat if ok else 0

    def nonzero_modes(self):
        return tuple((k, g) for k, g in self.modes if nonzero_components(k) != 0)

    def q2(self, x) -> np.ndarray:
        """Evaluate the cosine series at points x of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise LocskValidationError("points have wrong dimension")
        out = np.zeros(x.shape[:-1])
        for k, gamma in self.modes:
            if nonzero_components(k) == 0:
                out += gamma
            else:
                out += 2.0 * gamma * np.cos(math.pi * (x @ np.asarray(k, dtype=float)))
        return out


def _validation_grid(dim, max_mode) -> np.ndarray:
    per_dim = max(64, 8 * max_mode)
    per_dim = min(per_dim, max(8, int(round(2 ** (20 / dim)))))
    axis = np.linspace(-1.0, 1.0, per_dim, endpoint=False)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, dim)


def structure_sum(box: LatticeBox, k) -> complex:
    """Normalized lattice phase sum side^-d * sum_i exp(i pi i.k / radius).

    Evaluated by the per-component closed form: a component k_l contributes
    (-1)^{k_l} unless k_l is a multiple of 2*radius, where the phase degenerates
    and the component sums to the full side.  (The generic product form in the
    literature assumes |k_l| < 2*radius.)
    """
    k = tuple(int(c) for c in k)
    if len(k) != box.dim:
        raise LocskValidationError("mode vector has wrong dimension")
    if box.radius == 0:
        if any(c != 0 for c in k):
            raise LocskValidationError(
                "structure sum undefined for k != 0 on a radius-0 box"
            )
        return complex(1.0, 0.0)
    prod = 1.0
    for c in k:
        if c % (2 * box.radius) == 0:
            # k_l = 0, or an aliased multiple of 2*radius: every phase is 1
            prod *= box.side
        else:
            prod *= -1.0 if c % 2 else 1.0
    return complex(prod / box.side ** box.dim, 0.0)


def check_hypothesis2(spec: KernelSpec):
    """(max_valid_dhat, satisfied): min of Z(k) over active nonzero modes.

    Requires every active mode k != 0 to have at least dhat nonzero
    components with dhat > dim/2; a kernel with no nonzero modes supports
    dhat = dim vacuously.
    """
    zs = [
        nonzero_components(k)
        for k, gamma in spec.modes
        if gamma > 0.0 and nonzero_components(k) != 0
    ]
    dhat = min(zs) if zs else spec.dim
    return dhat, dhat > spec.dim / 2


def evaluate_qn(spec: KernelSpec, box: LatticeBox, displacement) -> float:
    """Coupling weight q(displacement / radius) = sqrt(max(q^2, 0)).

    The square root sign is a free choice: couplings enter the Hamiltonian as
    q * g with g centered Gaussian, so only q^2 matters in distribution.
    """
    if box.radius < 1:
        raise LocskValidationError("coupling weight needs radius >= 1")
    x = np.asarray(displacement, dtype=float) / box.radius
    v = float(spec.q2(x))
    return math.sqrt(v) if v > 0.0 else 0.0


def qn_pair_matrix(spec: KernelSpec, box: LatticeBox) -> np.ndarray:
    """(site_count, site_count) matrix of q((i-j)/radius), zero diagonal."""
    if box.site_count == 1:
        return np.zeros((1, 1))
    if box.radius < 1:
        raise LocskValidationError("coupling weights need radius >= 1")
    sites = box.sites.astype(float)
    disp = (sites[:, None, :] - sites[None, :, :]) / box.radius
    v = spec.q2(disp.reshape(-1, box.dim)).reshape(box.site_count, box.site_count)
    q = np.sqrt(np.clip(v, 0.0, None))
    np.fill_diagonal(q, 0.0)
    return q


def fit_from_grid(q2_values, dim, max_mode, grid_per_dim, residual_tol=1e-8):
    """Fit canonical cosine modes from samples on the uniform periodic grid.

    q2_values is either a callable evaluated on the grid
    x_j = -1 + 2j/grid_per_dim per axis, or an ndarray of shape
    (grid_per_dim,) * dim already sampled there.  Returns (KernelSpec,
    residual) with residual the max reconstruction error on the grid.
    """
    if max_mode < 0:
        raise LocskValidationError("max_mode must be >= 0")
    g = int(grid_per_dim)
    if g < max(4 * max_mode, 2):
        raise LocskValidationError(
            f"grid_per_dim {g} too coarse for max_mode {max_mode} (need >= 4*max_mode)"
        )
    axis = -1.0 + 2.0 * np.arange(g) / g
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    points = np.stack(mesh, axis=-1)
    if callable(q2_values):
        vals = np.asarray(q2_values(points), dtype=float)
        if vals.shape != (g,) * dim:
            vals = vals.reshape((g,) * dim)
    else:
        vals = np.asarray(q2_values, dtype=float)
        if vals.shape != (g,) * dim:
            raise LocskValidationError(
                f"tabulated grid has shape {vals.shape}, expected {(g,) * dim}"
            )

    coeff = np.fft.fftn(vals) / g ** dim
    scale = max(1.0, float(np.abs(coeff).max()))

    modes = []
    ranges = [range(0, max_mode + 1)] + [range(-max_mode, max_mode + 1)] * (dim - 1)
    import itertools as _it

    for k in _it.product(*ranges):
        if not is_canonical(k):
            continue
        idx = tuple(c % g for c in k)
        idx_neg = tuple((-c) % g for c in k)
        sign = -1.0 if sum(k) % 2 else 1.0
        ck = sign * coeff[idx]
        ck_neg = sign * coeff[idx_neg]
        # a real even function has real, symmetric coefficients
        asym = max(abs(ck.imag), abs(ck_neg.imag), abs(ck.real - ck_neg.real))
        if asym > 1e-9 * scale:
            raise NotPositiveType(
                f"sampled function is not real and even (mode {k}, asymmetry {asym:.3g})"
            )
        gamma = 0.5 * (ck.real + ck_neg.real)
        if gamma < -COEFF_TOL:
            raise NotPositiveType(f"fitted coefficient {gamma:.6g} at mode {k}")
        gamma = max(gamma, 0.0)
        modes.append((tuple(k), gamma))

    gmax = max((gamma for _, gamma in modes), default=0.0)
    kept = [
        (k, gamma)
        for k, gamma in modes
        if nonzero_components(k) == 0 or gamma > PRUNE_REL_TOL * gmax
    ]
    spec = KernelSpec(dim=dim, modes=tuple(kept))
    recon = spec.q2(points.reshape(-1, dim)).reshape(vals.shape)
    residual = float(np.abs(recon - vals).max())
    if residual > residual_tol:
        raise TruncationError(
            f"reconstruction residual {residual:.3g} exceeds tolerance {residual_tol:.3g}"
        )
    return spec, residual


def default_kernel() -> KernelSpec:
    """q^2(x) = 1 + cos(pi x) in one dimension (gamma0 = 1, Gamma = 2)."""
    return KernelSpec(dim=1, modes=(((0,), 1.0), ((1,), 0.5)))


def save_kernel(spec: KernelSpec, path) -> None:
    doc = {
        "d": spec.dim,
        "modes": [{"k": list(k), "gamma": gamma} for k, gamma in spec.modes],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_kernel(path) -> KernelSpec:
    with open(path) as fh:
        doc = json.load(fh)
    try:
        dim = int(doc["d"])
        raw = [(tuple(int(c) for c in m["k"]), float(m["gamma"])) for m in doc["modes"]]
    except (KeyError, TypeError) as exc:
        raise LocskValidationError(f"malformed kernel file {path}: {exc}") from exc
    for k, _ in raw:
        if not is_canonical(k):
            raise LocskValidationError(f"kernel file contains non-canonical mode {k}")
    if len({k for k, _ in raw}) != len(raw):
        raise LocskValidationError("kernel file contains duplicate modes")
    return KernelSpec(dim=dim, modes=tuple(raw))
