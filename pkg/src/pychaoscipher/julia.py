"""
Escape-time approximation of filled Julia sets of random polynomial sequences.

One parameter sequence ``omega = (c_1, c_2, ...)`` is realized per image and
shared by all pixels: the m-th iterate of every pixel is
``f_{c_m} o ... o f_{c_1}(z_0)`` with ``f_c(z) = z**3 + c*z`` (cubic family)
or ``f_c(z) = z**2 + c`` (quadratic family).
"""
from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import Any

    from ._typing import FilePath

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from rich.progress import track

from .crypto.chaotic import ParameterDisc, sample_c
from .crypto.drbg import drbg_instantiate

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 256
# Chaotic-regime members all escape within about 8 iterations, deeper
# budgets leave both member sets empty.
STABILITY_MAX_ITER = 4
DEFAULT_WINDOW = (-1.6, -1.6, 1.6, 1.6)
DEFAULT_RESOLUTION = (256, 256)
OMEGA_PERSONALIZATION = b"julia"

Window = tuple[float, float, float, float]


class Family(Enum):
    CUBIC = "cubic"          # z**3 + c*z
    QUADRATIC = "quadratic"  # z**2 + c


@dataclass(frozen=True)
class OmegaSpec:
    """Recipe of a parameter sequence, realized deterministically from (seed, delta).

    Attributes
    ----------
    seed : bytes
        Non-empty DRBG seed.
    delta : float
        Radius of the parameter disc.
    length : int
        Number of parameters realized.
    """

    seed: bytes
    delta: float
    length: int = DEFAULT_MAX_ITER

    def __post_init__(self) -> None:
        if len(self.seed) == 0:
            raise ValueError("Omega seed must not be empty")
        if not math.isfinite(self.delta) or self.delta < 0:
            raise ValueError(f"delta must be a finite non-negative number (got {self.delta})")
        if self.length < 1:
            raise ValueError(f"Omega length must be at least 1 (got {self.length})")


def realize_omega(spec: OmegaSpec) -> list[complex]:
    """Draws the parameter sequence of ``spec``.

    Longer specs with the same seed and delta extend shorter ones.
    """
    drbg = drbg_instantiate(spec.seed, b"", OMEGA_PERSONALIZATION)
    disc = ParameterDisc.custom(spec.delta)
    return [sample_c(drbg, disc) for _ in range(spec.length)]


def default_escape_radius(family: Family, delta: float) -> float:
    """Radius beyond which orbits provably diverge.

    For the cubic family, ``|z| >= sqrt(2 + delta)`` implies
    ``|z**3 + c*z| >= |z| (|z|**2 - |c|) >= 2 |z|``.
    """
    family = Family(family)
    if family is Family.CUBIC:
        return math.sqrt(2 + delta)
    return max(2.0, delta)


def _apply(z: complex, c: complex, family: Family) -> complex:
    if family is Family.CUBIC:
        return z * z * z + c * z
    return z * z + c


def escape_time(
    z0: complex,
    omega: Sequence[complex],
    family: Family = Family.CUBIC,
    max_iter: int = DEFAULT_MAX_ITER,
    escape_radius: float | None = None,
) -> int:
    """Smallest ``m`` such that the m-th iterate of ``z0`` leaves the escape disc.

    Returns ``max_iter`` if the orbit never escapes within ``max_iter`` steps.
    """
    family = Family(family)
    if len(omega) < max_iter:
        raise ValueError(f"omega has {len(omega)} parameters, {max_iter} required")
    if escape_radius is None:
        escape_radius = default_escape_radius(family, max((abs(c) for c in omega), default=0.0))

    z = complex(z0)
    for m in range(max_iter):
        if abs(z) > escape_radius:
            return m
        z = _apply(z, omega[m], family)
    return max_iter


def pixel_grid(window: Window, resolution: tuple[int, int]) -> np.ndarray:
    """Complex coordinates of the pixel centers, row 0 at the top.

    Pixel offsets from the window center are exact negatives of each other,
    so a window centered on 0 gives a grid with ``grid[::-1, ::-1] == -grid``.
    """
    x0, y0, x1, y1 = window
    width, height = resolution

    cx, hx = (x0 + x1) / 2, (x1 - x0) / 2
    cy, hy = (y0 + y1) / 2, (y1 - y0) / 2
    xs = cx + hx * ((2 * np.arange(width) + 1 - width) / width)
    ys = cy - hy * ((2 * np.arange(height) + 1 - height) / height)

    grid = np.empty((height, width), dtype=np.complex128)
    grid.real = xs[np.newaxis, :]
    grid.imag = ys[:, np.newaxis]
    return grid


def _escape_grid(
    z: np.ndarray, omega: Sequence[complex], family: Family, escape_radius: float, max_iter: int
) -> np.ndarray:
    z = z.copy()
    escape_iter = np.full(z.shape, max_iter, dtype=np.int32)
    active = np.ones(z.shape, dtype=bool)

    for m in range(max_iter):
        escaped = active & (np.abs(z) > escape_radius)
        escape_iter[escaped] = m
        active &= ~escaped
        if not active.any():
            break

        za = z[active]
        c = omega[m]
        if family is Family.CUBIC:
            z[active] = za * za * za + c * za
        else:
            z[active] = za * za + c

    return escape_iter


def _check_geometry(window: Window, resolution: tuple[int, int], max_iter: int) -> None:
    x0, y0, x1, y1 = window
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"Window must satisfy x0 < x1 and y0 < y1 (got {window})")
    width, height = resolution
    if width < 2 or height < 2:
        raise ValueError(f"Resolution must be at least 2x2 (got {width}x{height})")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1 (got {max_iter})")


@dataclass
class JuliaApprox:
    """Escape-time image of a filled Julia set.

    Attributes
    ----------
    window : tuple of float
        ``(x0, y0, x1, y1)`` rectangle of the complex plane.
    resolution : tuple of int
        ``(width, height)`` in pixels.
    max_iter : int
        Iteration budget, ``escape_iter == max_iter`` marks members.
    escape_iter : np.ndarray
        ``(height, width)`` array of escape iterations in ``[0, max_iter]``.
    family : Family
        Polynomial family.
    spec : OmegaSpec
        Parameter sequence used.
    """

    window: Window
    resolution: tuple[int, int]
    max_iter: int
    escape_iter: np.ndarray
    family: Family
    spec: OmegaSpec

    @property
    def members(self) -> np.ndarray:
        return self.escape_iter == self.max_iter

    def boundary(self) -> np.ndarray:
        """Member pixels with at least one non-member 4-neighbour (pixels outside the image count as non-members)."""
        members = self.members
        padded = np.pad(members, 1, constant_values=False)
        interior = padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
        return members & ~interior

    def to_image(self) -> np.ndarray:
        """Escape iterations scaled to 0-255, members white."""
        return (self.escape_iter.astype(np.int64) * 255 // self.max_iter).astype(np.uint8)

    def to_pgm(self, filename: FilePath) -> None:
        write_pgm(filename, self.to_image())

    def to_dict(self) -> dict[str, Any]:
        return {
            "window": list(self.window),
            "resolution": list(self.resolution),
            "max_iter": self.max_iter,
            "family": self.family.value,
            "delta": self.spec.delta,
            "seed": self.spec.seed.hex(),
            "escape_iter": self.escape_iter.tolist(),
        }

    def to_json(self, filename: FilePath) -> None:
        with open(filename, "w") as fp:
            json.dump(self.to_dict(), fp)

    def __str__(self) -> str:
        return "JuliaApprox(family={}, resolution={}x{}, max_iter={}, members={})".format(
            self.family.value, *self.resolution, self.max_iter, int(self.members.sum())
        )


def render(
    spec: OmegaSpec,
    window: Window = DEFAULT_WINDOW,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
    max_iter: int = DEFAULT_MAX_ITER,
    family: Family | str = Family.CUBIC,
    escape_radius: float | None = None,
    n_jobs: int = 1,
) -> JuliaApprox:
    """Escape-time render of the filled Julia set of ``spec``.

    Parameters
    ----------
    spec : OmegaSpec
        Parameter sequence, at least ``max_iter`` long.
    window : tuple of float, default=(-1.6, -1.6, 1.6, 1.6)
        ``(x0, y0, x1, y1)``.
    resolution : tuple of int, default=(256, 256)
        ``(width, height)``.
    max_iter : int, default=256
        Iteration budget.
    family : Family or str, default=Family.CUBIC
        Polynomial family.
    escape_radius : float, optional
        Defaults to :func:`default_escape_radius` for ``spec.delta``.
    n_jobs : int, default=1
        Worker threads over row bands. The output does not depend on it.

    Returns
    -------
    JuliaApprox
    """
    family = Family(family)
    window = tuple(float(v) for v in window)
    resolution = (int(resolution[0]), int(resolution[1]))
    _check_geometry(window, resolution, max_iter)
    if spec.length < max_iter:
        raise ValueError(f"omega has {spec.length} parameters, {max_iter} required")

    omega = realize_omega(spec)
    if escape_radius is None:
        escape_radius = default_escape_radius(family, spec.delta)

    grid = pixel_grid(window, resolution)

    if n_jobs > 1:
        bands = np.array_split(grid, min(n_jobs, grid.shape[0]), axis=0)
        logger.debug("Rendering %d row bands on %d threads", len(bands), n_jobs)
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            escape_iter = np.vstack(list(executor.map(
                lambda band: _escape_grid(band, omega, family, escape_radius, max_iter), bands
            )))
    else:
        escape_iter = _escape_grid(grid, omega, family, escape_radius, max_iter)

    return JuliaApprox(window, resolution, max_iter, escape_iter, family, spec)


def _member_counts(
    delta: float,
    seed_a: bytes,
    seed_b: bytes,
    window: Window,
    resolution: tuple[int, int],
    max_iter: int,
    family: Family | str,
    n_jobs: int,
) -> tuple[int, int]:
    a = render(OmegaSpec(seed_a, delta, max_iter), window, resolution, max_iter, family, n_jobs=n_jobs)
    b = render(OmegaSpec(seed_b, delta, max_iter), window, resolution, max_iter, family, n_jobs=n_jobs)
    members_a, members_b = a.members, b.members
    return int(np.count_nonzero(members_a ^ members_b)), int(np.count_nonzero(members_a | members_b))


def stability_distance(
    delta: float,
    seed_a: bytes,
    seed_b: bytes,
    window: Window = DEFAULT_WINDOW,
    resolution: tuple[int, int] = (128, 128),
    max_iter: int = STABILITY_MAX_ITER,
    family: Family | str = Family.CUBIC,
    n_jobs: int = 1,
) -> float:
    """Dissimilarity of the filled Julia sets of two parameter realizations.

    Returns ``|A ^ B| / max(|A | B|, 1)`` over the member sets, so two empty
    member sets are at distance 0. The result is in [0, 1].

    The default budget is :data:`STABILITY_MAX_ITER`: at ``delta=3.5`` the
    member sets are empty from about 8 iterations on and the distance
    collapses to 0.
    """
    sym_diff, union = _member_counts(delta, seed_a, seed_b, window, resolution, max_iter, family, n_jobs)
    return sym_diff / max(union, 1)


def _probe_seed(base_seed: bytes, label: bytes, trial: int) -> bytes:
    return hashlib.sha256(base_seed + label + trial.to_bytes(4, "big")).digest()


def stability_probe(
    delta: float,
    trials: int,
    window: Window = DEFAULT_WINDOW,
    resolution: tuple[int, int] = (128, 128),
    max_iter: int = STABILITY_MAX_ITER,
    family: Family | str = Family.CUBIC,
    base_seed: bytes = b"stability",
    n_jobs: int = 1,
    show_progress: bool = False,
) -> dict[str, Any]:
    """Mean and standard deviation of :func:`stability_distance` over seed pairs.

    Seed pairs are derived from ``base_seed``, so the probe is reproducible.
    ``empty_unions`` counts the pairs where neither render has a member pixel;
    a large count means ``max_iter`` is too deep for ``delta``.
    """
    if trials < 2:
        raise ValueError(f"At least 2 trials are required (got {trials})")

    counts = [
        _member_counts(
            delta,
            _probe_seed(base_seed, b"a", trial),
            _probe_seed(base_seed, b"b", trial),
            window, resolution, max_iter, family, n_jobs,
        )
        for trial in track(
            range(trials), description=f"delta={delta}", disable=not show_progress
        )
    ]
    distances = [sym_diff / max(union, 1) for sym_diff, union in counts]
    empty_unions = sum(1 for _, union in counts if union == 0)
    if empty_unions:
        logger.warning(
            "%d of %d pairs have no member pixel at max_iter=%d, delta=%s",
            empty_unions, trials, max_iter, delta,
        )

    return {
        "delta": delta,
        "trials": trials,
        "max_iter": max_iter,
        "empty_unions": empty_unions,
        "mean_distance": float(np.mean(distances)),
        "stdev": float(np.std(distances, ddof=1)),
        "distances": distances,
    }


def write_pgm(filename: FilePath, image: np.ndarray) -> None:
    """Writes an 8-bit grayscale binary PGM (P5)."""
    image = np.asarray(image, dtype=np.uint8)
    height, width = image.shape
    with open(filename, "wb") as fp:
        fp.write(f"P5 {width} {height} 255\n".encode("ascii"))
        fp.write(image.tobytes())


def read_pgm(filename: FilePath) -> np.ndarray:
    with open(filename, "rb") as fp:
        data = fp.read()

    tokens = []
    position = 0
    while len(tokens) < 4:
        while position < len(data) and data[position: position + 1].isspace():
            position += 1
        start = position
        while position < len(data) and not data[position: position + 1].isspace():
            position += 1
        if start == position:
            raise ValueError(f"Truncated PGM header: {filename}")
        tokens.append(data[start:position])
    position += 1

    if tokens[0] != b"P5" or int(tokens[3]) != 255:
        raise ValueError(f"Not an 8-bit binary PGM file: {filename}")

    width, height = int(tokens[1]), int(tokens[2])
    return np.frombuffer(data[position: position + width * height], dtype=np.uint8).reshape(height, width)
