"""Periodic tensor grids, multi-component complex states and Fourier multipliers.

All states store complex128 data of shape ``(n_components, *grid.shape)``.
The forward FFT is unnormalized and the inverse carries ``1/N`` per
dimension (the numpy/scipy default).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
import scipy.fft as sfft

from .errors import NonFiniteStateError, UnstableStepError

__all__ = [
    "Grid",
    "State",
    "NormKind",
    "build_grid",
    "eval_on_grid",
    "norm",
    "apply_multiplier",
    "forward_transform",
    "inverse_transform",
    "modal_l2_norm",
    "save_state",
    "load_state",
]


def _is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[x_min, x_max)`` per dimension."""

    points: tuple[int, ...]
    extent: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) not in (1, 2) or len(self.points) != len(self.extent):
            raise ValueError("grid must be 1-D or 2-D with one extent per dimension")
        for n in self.points:
            if not _is_power_of_two(n) or n < 8:
                raise ValueError(f"points per dimension must be a power of two >= 8, got {n}")
        for lo, hi in self.extent:
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
                raise ValueError(f"degenerate extent [{lo}, {hi})")

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.extent)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """Node coordinates per dimension."""
        return tuple(lo + h * np.arange(n) for (lo, _), h, n in zip(self.extent, self.spacing, self.points))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """``2*pi*m/L`` per dimension in standard FFT mode order."""
        return tuple(2 * np.pi * np.fft.fftfreq(n, d=1.0 / n) / L for n, L in zip(self.points, self.lengths))

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def wavevector(self) -> tuple[np.ndarray, ...]:
        """Wavenumber tables broadcast to the full grid shape."""
        return tuple(np.meshgrid(*self.wavenumbers, indexing="ij"))

    def refined(self, factor=2) -> "Grid":
        return Grid(tuple(n * factor for n in self.points), self.extent)


def build_grid(dim: int, n: int, extent: Union[Sequence[float], Sequence[Sequence[float]]]) -> Grid:
    """Build a ``dim``-dimensional grid with ``n`` points per dimension.

    ``extent`` is either one ``(x_min, x_max)`` pair, reused for every
    dimension, or one pair per dimension.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    ext = np.asarray(extent, dtype=float)
    if ext.shape == (2,):
        ext = np.tile(ext, (dim, 1))
    if ext.shape != (dim, 2):
        raise ValueError(f"extent must be a pair or {dim} pairs, got shape {ext.shape}")
    return Grid(tuple([int(n)] * dim), tuple((float(a), float(b)) for a, b in ext))


class NormKind(enum.Enum):
    INF = "inf"
    L2 = "l2"

    @classmethod
    def parse(cls, value) -> "NormKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class State:
    """Immutable complex multi-component field on a :class:`Grid`."""

    __slots__ = ("grid", "data")

    def __init__(self, grid: Grid, data, *, check=True):
        arr = np.array(data, dtype=np.complex128, copy=True)
        if arr.ndim == grid.dim:
            arr = arr[np.newaxis]
        if arr.shape[1:] != grid.shape:
            raise ValueError(f"data shape {arr.shape} does not match grid {grid.shape}")
        if check and not np.isfinite(arr).all():
            raise NonFiniteStateError("state contains non-finite entries")
        arr.setflags(write=False)
        self.grid = grid
        self.data = arr

    @classmethod
    def _wrap(cls, grid, arr):
        # internal fast path: arr is freshly allocated complex128 of the right shape
        if not np.isfinite(arr).all():
            raise NonFiniteStateError("state contains non-finite entries")
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj.grid = grid
        obj.data = arr
        return obj

    def __setattr__(self, name, value):
        if hasattr(self, "data"):
            raise AttributeError("State is immutable")
        object.__setattr__(self, name, value)

    @property
    def n_components(self) -> int:
        return self.data.shape[0]

    def like(self, data) -> "State":
        """New state on the same grid holding ``data``."""
        arr = np.asarray(data, dtype=np.complex128)
        if arr.shape != self.data.shape:
            raise ValueError(f"shape {arr.shape} != {self.data.shape}")
        return State._wrap(self.grid, arr.copy())

    def real(self) -> "State":
        """Projection onto real-valued data (imaginary part discarded)."""
        return State._wrap(self.grid, self.data.real.astype(np.complex128))

    def _check_other(self, other):
        if other.grid != self.grid or other.data.shape != self.data.shape:
            raise ValueError("states live on different grids or have different components")

    def __add__(self, other: "State") -> "State":
        self._check_other(other)
        return State._wrap(self.grid, self.data + other.data)

    def __sub__(self, other: "State") -> "State":
        self._check_other(other)
        return State._wrap(self.grid, self.data - other.data)

    def __mul__(self, scalar) -> "State":
        return State._wrap(self.grid, self.data * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "State":
        return State._wrap(self.grid, -self.data)

    def __repr__(self):
        return f"State(components={self.n_components}, grid={self.grid.shape})"


def eval_on_grid(f: Union[Callable, Sequence[Callable]], grid: Grid, n_components: int = 1) -> State:
    """Sample ``f`` at the grid nodes.

    ``f`` is either a single callable returning an array of shape
    ``(n_components, *grid.shape)`` (or ``grid.shape`` when there is one
    component), or a sequence of per-component callables. Callables receive
    the coordinate arrays as positional arguments.
    """
    coords = grid.coordinates
    if callable(f):
        values = np.asarray(f(*coords), dtype=np.complex128)
        if n_components == 1 and values.shape == grid.shape:
            values = values[np.newaxis]
    else:
        fs = list(f)
        if len(fs) != n_components:
            raise ValueError(f"expected {n_components} component functions, got {len(fs)}")
        values = np.stack([np.broadcast_to(np.asarray(fc(*coords), dtype=np.complex128), grid.shape) for fc in fs])
    values = np.broadcast_to(values, (n_components,) + grid.shape)
    if not np.isfinite(values).all():
        raise NonFiniteStateError("function returned non-finite values on the grid")
    return State(grid, values)


def norm(state: State, kind: NormKind = NormKind.L2) -> float:
    """Discrete infinity norm or grid-weighted L2 norm over all components."""
    kind = NormKind.parse(kind)
    data = state.data
    if not np.isfinite(data).all():
        raise NonFiniteStateError("norm of non-finite state")
    if kind is NormKind.INF:
        return float(np.max(np.abs(data))) if data.size else 0.0
    return float(np.sqrt(state.grid.cell_volume * np.sum(data.real**2 + data.imag**2)))


def _spatial_axes(grid):
    return tuple(range(1, grid.dim + 1))


def forward_transform(state: State) -> np.ndarray:
    """Unnormalized DFT of every component."""
    return sfft.fftn(state.data, axes=_spatial_axes(state.grid))


def inverse_transform(grid: Grid, coeffs: np.ndarray) -> State:
    return State._wrap(grid, sfft.ifftn(coeffs, axes=_spatial_axes(grid)))


def modal_l2_norm(state: State) -> float:
    """L2 norm evaluated from Fourier coefficients (Parseval)."""
    coeffs = forward_transform(state)
    return float(np.sqrt(state.grid.cell_volume * np.sum(np.abs(coeffs) ** 2) / state.grid.size))


def apply_multiplier(state: State, symbol) -> State:
    """Apply a Fourier multiplier to each component.

    ``symbol`` is either an array broadcastable to ``(n_components,
    *grid.shape)`` in FFT mode order, or a callable evaluated on the
    wavevector tables (``symbol(kx)`` in 1-D, ``symbol(kx, ky)`` in 2-D).

    Raises :class:`UnstableStepError` if the symbol is not finite, e.g. an
    exponential symbol evaluated beyond floating-point range.
    """
    grid = state.grid
    if callable(symbol):
        with np.errstate(over="ignore", invalid="ignore"):
            symbol = symbol(*grid.wavevector)
    symbol = np.asarray(symbol)
    if not np.isfinite(symbol).all():
        raise UnstableStepError("Fourier multiplier overflows on the grid's wavenumbers")
    coeffs = forward_transform(state)
    coeffs *= symbol
    return inverse_transform(grid, coeffs)


def save_state(state: State, path) -> None:
    """Write ``state`` to an ``.npz`` archive holding ``points``, ``extent`` and ``data``."""
    np.savez(path, points=np.array(state.grid.points), extent=np.array(state.grid.extent), data=state.data)


def load_state(path) -> State:
    with np.load(path) as z:
        grid = Grid(tuple(int(n) for n in z["points"]), tuple(tuple(float(v) for v in e) for e in z["extent"]))
        return State(grid, z["data"])
