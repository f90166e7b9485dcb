"""
Problem instances: moduli, targets, noise and unordered residue observations.

Every sampler l measures all N targets modulo m_l = gamma * M_l and reports the
N residues in an unknown order. Estimators only ever see an ObservationView;
the hidden permutations and noise draws stay on the ObservationSet for scoring.

Example:
    >>> import numpy as np
    >>> ms = build_moduli(2, 100.0)
    >>> ms.M
    (23, 29, 31, 37)
    >>> rng = np.random.default_rng(0)
    >>> gt = sample_instance(ms, 2, rng)
    >>> obs = observe(gt, ms, NoiseSpec(snr_db=0.0), rng)
    >>> obs.view().R.shape
    (2, 4)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import reduce
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import orjson

from .arith import ensure_coprime, mod_reduce_array
from .types import ObservationPayload

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = 100.0
DEFAULT_PRIME_START = 21
# Relative slack when comparing float ranges built from the same products
_RANGE_RTOL = 1e-12


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _primes_from(start: int, count: int) -> List[int]:
    """The `count` smallest primes >= start."""
    primes: List[int] = []
    candidate = max(2, int(start))
    while len(primes) < count:
        if _is_prime(candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def _product(values: Sequence[int]) -> int:
    return reduce(lambda acc, v: acc * int(v), values, 1)


@dataclass(frozen=True)
class ModuliSet:
    """
    Moduli m_l = gamma * M_l with dynamic range D and per-sampler noise levels.

    Attributes:
        gamma: The shared factor of all moduli (circle circumference).
        M: Pairwise-coprime integers in ascending order.
        D: Dynamic range; targets live in [0, D).
        sigma: Noise standard deviation per sampler (0 means noiseless).
    """

    gamma: float
    M: Tuple[int, ...]
    D: float
    sigma: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not math.isfinite(self.gamma) or self.gamma <= 0:
            raise ValueError(f"gamma must be a positive finite number, got {self.gamma!r}")
        M = tuple(int(v) for v in self.M)
        if not M:
            raise ValueError("ModuliSet needs at least one modulus")
        if any(v <= 0 for v in M):
            raise ValueError(f"Moduli factors must be positive integers, got {M}")
        if any(a >= b for a, b in zip(M, M[1:])):
            raise ValueError(f"Moduli factors must be strictly ascending, got {M}")
        ensure_coprime(M)
        object.__setattr__(self, "M", M)

        D = float(self.D)
        if not math.isfinite(D) or D <= 0:
            raise ValueError(f"Dynamic range must be a positive finite number, got {self.D!r}")
        full = self.gamma * float(_product(M))
        if D > full * (1 + _RANGE_RTOL):
            raise ValueError(
                f"Dynamic range {D} exceeds gamma * prod(M) = {full} for M={M}"
            )
        object.__setattr__(self, "D", D)

        sigma = tuple(float(s) for s in self.sigma) if self.sigma else (0.0,) * len(M)
        if len(sigma) == 1 and len(M) > 1:
            sigma = sigma * len(M)
        if len(sigma) != len(M):
            raise ValueError(f"Expected {len(M)} noise levels, got {len(sigma)}")
        if any(not math.isfinite(s) or s < 0 for s in sigma):
            raise ValueError(f"Noise levels must be finite and non-negative, got {sigma}")
        object.__setattr__(self, "sigma", sigma)

    @property
    def L(self) -> int:
        return len(self.M)

    @property
    def m(self) -> np.ndarray:
        """Sampler moduli gamma * M_l."""
        return self.gamma * np.asarray(self.M, dtype=float)

    @property
    def product(self) -> int:
        return _product(self.M)

    @property
    def full_range(self) -> float:
        return self.gamma * float(self.product)

    @property
    def quotient_range(self) -> int:
        """Number of admissible quotients floor(Y / gamma) for Y in [0, D)."""
        if self.D >= self.full_range * (1 - _RANGE_RTOL):
            return self.product
        ratio = self.D / self.gamma
        nearest = round(ratio)
        if abs(ratio - nearest) <= _RANGE_RTOL * max(1.0, ratio):
            return max(1, int(nearest))
        return max(1, math.ceil(ratio))

    @property
    def L0(self) -> int:
        """Smallest prefix count whose combined range reaches D."""
        return self.min_count(self.M)

    def min_count(self, factors: Sequence[int]) -> int:
        prefix = 1
        for count, factor in enumerate(sorted(factors), start=1):
            prefix *= factor
            if self.gamma * float(prefix) >= self.D * (1 - _RANGE_RTOL):
                return count
        return len(factors)

    @property
    def weights(self) -> np.ndarray:
        """Per-sampler weights 1 / (2 sigma_l^2); uniform when any sampler is noiseless."""
        sigma = np.asarray(self.sigma, dtype=float)
        if np.any(sigma == 0):
            return np.ones(self.L)
        return 1.0 / (2.0 * sigma**2)

    def covers(self, indices: Sequence[int]) -> bool:
        """Whether the moduli at `indices` alone span the dynamic range."""
        factors = [self.M[i] for i in indices]
        return self.gamma * float(_product(factors)) >= self.D * (1 - _RANGE_RTOL)

    def subset(self, indices: Sequence[int]) -> "ModuliSet":
        """
        Restrict to the samplers at `indices`, keeping gamma and D.

        Raises:
            ValueError: If the subset does not span D or indices repeat.
        """
        idx = sorted(int(i) for i in indices)
        if len(set(idx)) != len(idx) or not idx:
            raise ValueError(f"Subset indices must be distinct and non-empty, got {indices}")
        if idx[0] < 0 or idx[-1] >= self.L:
            raise ValueError(f"Subset indices {indices} out of range for L={self.L}")
        return ModuliSet(
            gamma=self.gamma,
            M=tuple(self.M[i] for i in idx),
            D=self.D,
            sigma=tuple(self.sigma[i] for i in idx),
        )

    def with_noise(self, noise: "NoiseSpec") -> "ModuliSet":
        return replace(self, sigma=tuple(noise.sigma_for(self.L)))


@dataclass(frozen=True)
class NoiseSpec:
    """
    Gaussian noise level derived from an SNR in dB: sigma^2 = 10^(-snr/10).

    An explicit `sigma` overrides the SNR mapping. snr_db=+inf means noiseless.
    """

    snr_db: float = math.inf
    samplers: int = 1
    sigma: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"SNR must be a number or +inf, got {self.snr_db!r}")
        if self.samplers < 1:
            raise ValueError(f"samplers must be >= 1, got {self.samplers}")
        if self.sigma is not None:
            sigma = tuple(float(s) for s in self.sigma)
            if any(not math.isfinite(s) or s < 0 for s in sigma):
                raise ValueError(f"sigma must be finite and non-negative, got {sigma}")
            object.__setattr__(self, "sigma", sigma)

    @classmethod
    def from_sigma(cls, sigma: Union[float, Sequence[float]]) -> "NoiseSpec":
        values = (float(sigma),) if np.isscalar(sigma) else tuple(float(s) for s in sigma)  # type: ignore[arg-type]
        return cls(samplers=len(values), sigma=values)

    @property
    def base_sigma(self) -> float:
        if self.snr_db == math.inf:
            return 0.0
        return math.sqrt(10.0 ** (-self.snr_db / 10.0))

    def sigma_for(self, L: int) -> np.ndarray:
        """Per-sampler standard deviations for L samplers."""
        if self.sigma is not None:
            if len(self.sigma) == 1:
                return np.full(L, self.sigma[0])
            if len(self.sigma) != L:
                raise ValueError(f"NoiseSpec has {len(self.sigma)} levels but {L} samplers")
            return np.asarray(self.sigma, dtype=float)
        return np.full(L, self.base_sigma)


@dataclass(frozen=True)
class GroundTruth:
    """Targets Y_i = k_i * gamma + mu_i."""

    Y: np.ndarray
    mu: np.ndarray
    k: np.ndarray

    @classmethod
    def from_values(cls, Y: Sequence[float], gamma: float) -> "GroundTruth":
        Y_arr = np.asarray(Y, dtype=float)
        mu = mod_reduce_array(Y_arr, gamma)
        # integral-valued floats; quotients can exceed int64 at full range
        k = np.rint((Y_arr - mu) / gamma)
        return cls(Y=Y_arr, mu=mu, k=k)

    @property
    def N(self) -> int:
        return int(self.Y.shape[0])


@dataclass(frozen=True)
class ObservationView:
    """
    What an estimator is allowed to see: residues R (N x L) and their common
    residues r = R mod gamma. Column l is the unordered output of sampler l.
    """

    R: np.ndarray
    r: np.ndarray
    gamma: float

    @classmethod
    def from_residues(cls, R: Sequence[Sequence[float]], gamma: float) -> "ObservationView":
        R_arr = np.atleast_2d(np.asarray(R, dtype=float))
        return cls(R=R_arr, r=mod_reduce_array(R_arr, gamma), gamma=float(gamma))

    @property
    def N(self) -> int:
        return int(self.R.shape[0])

    @property
    def L(self) -> int:
        return int(self.R.shape[1])

    def columns(self) -> Iterator[np.ndarray]:
        """Common residues of each sampler in turn."""
        for l in range(self.L):  # noqa: E741
            yield self.r[:, l]

    def restrict(self, indices: Sequence[int]) -> "ObservationView":
        """Keep only the samplers at `indices` (sorted ascending)."""
        idx = sorted(int(i) for i in indices)
        return ObservationView(R=self.R[:, idx], r=self.r[:, idx], gamma=self.gamma)


@dataclass(frozen=True)
class ObservationSet:
    """
    Residues with their hidden generation record.

    R[true_perm[l, i], l] = (Y_i + delta[i, l]) mod m_l.
    """

    R: np.ndarray
    r: np.ndarray
    gamma: float
    true_perm: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)

    def view(self) -> ObservationView:
        return ObservationView(R=self.R.copy(), r=self.r.copy(), gamma=self.gamma)


def build_moduli(
    n: int,
    gamma: float = DEFAULT_GAMMA,
    *,
    prime_start: int = DEFAULT_PRIME_START,
    count: Optional[int] = None,
    moduli: Optional[Sequence[int]] = None,
    dynamic_range: Optional[float] = None,
    l_min: Optional[int] = None,
    sigma: Optional[Union[float, Sequence[float]]] = None,
) -> ModuliSet:
    """
    Build the moduli for N targets.

    Args:
        n: Number of targets N.
        gamma: Shared modulus factor.
        prime_start: M_l are the smallest primes >= prime_start.
        count: Number of samplers L (default 2N).
        moduli: Explicit M_l; overrides prime selection.
        dynamic_range: Explicit D. Takes precedence over l_min.
        l_min: Set D = gamma * product of the l_min smallest M_l.
            None (and no dynamic_range) means the full range gamma * prod(M).
        sigma: Noise level(s) per sampler.

    Returns:
        ModuliSet with M ascending.

    Raises:
        ValueError: If n < 1, count < 1 or l_min is outside [1, L].
    """
    if n < 1:
        raise ValueError(f"Number of targets must be >= 1, got {n}")
    if moduli is not None:
        factors = sorted(int(v) for v in moduli)
    else:
        L = 2 * n if count is None else int(count)
        if L < 1:
            raise ValueError(f"Number of samplers must be >= 1, got {L}")
        factors = _primes_from(prime_start, L)

    if dynamic_range is not None:
        D = float(dynamic_range)
    elif l_min is not None:
        if not 1 <= l_min <= len(factors):
            raise ValueError(f"l_min must lie in [1, {len(factors)}], got {l_min}")
        D = gamma * float(_product(factors[:l_min]))
    else:
        D = gamma * float(_product(factors))

    if sigma is None:
        sigma_t: Tuple[float, ...] = ()
    elif np.isscalar(sigma):
        sigma_t = (float(sigma),)  # type: ignore[arg-type]
    else:
        sigma_t = tuple(float(s) for s in sigma)  # type: ignore[union-attr]
    return ModuliSet(gamma=float(gamma), M=tuple(factors), D=D, sigma=sigma_t)


def sample_instance(ms: ModuliSet, n: int, rng: np.random.Generator) -> GroundTruth:
    """Draw N targets independently and uniformly on [0, D)."""
    if n < 1:
        raise ValueError(f"Number of targets must be >= 1, got {n}")
    Y = rng.uniform(0.0, ms.D, size=n)
    return GroundTruth.from_values(Y, ms.gamma)


def observe(
    gt: GroundTruth,
    ms: ModuliSet,
    noise: NoiseSpec,
    rng: np.random.Generator,
) -> ObservationSet:
    """
    Synthesize noisy unordered residues.

    Noise is drawn first (N x L standard normals scaled per sampler), then one
    uniform permutation per sampler.
    """
    N, L = gt.N, ms.L
    sigma = noise.sigma_for(L)
    delta = rng.standard_normal((N, L)) * sigma[np.newaxis, :]
    true_perm = np.stack([rng.permutation(N) for _ in range(L)]).astype(np.int64)

    values = mod_reduce_array(gt.Y[:, np.newaxis] + delta, ms.m[np.newaxis, :])
    R = np.empty((N, L), dtype=float)
    for l in range(L):  # noqa: E741
        R[true_perm[l], l] = values[:, l]
    r = mod_reduce_array(R, ms.gamma)
    return ObservationSet(R=R, r=r, gamma=ms.gamma, true_perm=true_perm, delta=delta)


def _resolve_input(path: Union[str, Path]) -> Path:
    resolved = Path(path).resolve()
    if not resolved.exists():
        raise FileNotFoundError(f"Observation file not found: {resolved}")
    if resolved.is_dir():
        raise IsADirectoryError(f"Observation path must be a file, not directory: {resolved}")
    return resolved


def save_observations(
    view: Union[ObservationView, ObservationSet],
    ms: ModuliSet,
    path: Union[str, Path],
) -> Path:
    """Write residues and moduli to a JSON observation file. Hidden fields are never written."""
    output_path = Path(path).resolve()
    payload: ObservationPayload = {
        "gamma": ms.gamma,
        "M": list(ms.M),
        "R": view.R.tolist(),
        "D": ms.D,
        "sigma": list(ms.sigma),
    }
    with output_path.open("wb") as f:
        f.write(orjson.dumps(payload, option=orjson.OPT_INDENT_2))
    logger.info(f"Wrote observations ({view.R.shape[0]}x{view.R.shape[1]}) to {output_path}")
    return output_path


def load_observations(path: Union[str, Path]) -> Tuple[ObservationView, ModuliSet]:
    """
    Read a JSON observation file {"gamma", "M", "R"} with optional "D" and "sigma".

    Raises:
        FileNotFoundError: If the file does not exist.
        IsADirectoryError: If the path is a directory.
        ValueError: If the payload is malformed.
    """
    resolved = _resolve_input(path)
    try:
        payload = orjson.loads(resolved.read_bytes())
    except orjson.JSONDecodeError as exc:
        raise ValueError(f"Invalid JSON in {resolved}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValueError(f"Observation file {resolved} must hold a JSON object")
    missing = [key for key in ("gamma", "M", "R") if key not in payload]
    if missing:
        raise ValueError(f"Observation file {resolved} is missing keys: {', '.join(missing)}")

    gamma = float(payload["gamma"])
    factors = [int(v) for v in payload["M"]]
    order = np.argsort(factors, kind="stable")
    D = payload.get("D")
    sigma = payload.get("sigma")
    ms = ModuliSet(
        gamma=gamma,
        M=tuple(factors[i] for i in order),
        D=float(D) if D is not None else gamma * float(_product(factors)),
        sigma=tuple(float(sigma[i]) for i in order) if sigma else (),
    )

    try:
        R = np.asarray(payload["R"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"Residue matrix in {resolved} is not rectangular: {exc}") from exc
    if R.ndim != 2 or R.shape[1] != ms.L:
        raise ValueError(
            f"Residue matrix in {resolved} must be N x {ms.L}, got shape {R.shape}"
        )
    R = R[:, order]
    if np.any(R < 0) or np.any(R >= ms.m[np.newaxis, :]):
        raise ValueError(f"Residues in {resolved} must lie in [0, m_l) per column")
    return ObservationView.from_residues(R, gamma), ms
