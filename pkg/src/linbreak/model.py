"""Generative model ``Y(n) = Pi(n) X(n) + nu(n)`` with piecewise-constant ``Pi``.

A :class:`ModelSpec` bundles a regression plan (how ``X`` is produced), the
piecewise coefficient matrices and a Gaussian noise model. :func:`simulate`
turns a spec plus integer seed into a :class:`Sample`; :func:`simulate_batch`
produces many independent trials at once and is bit-identical, trial by
trial, to calling :func:`simulate` with the same ``(seed, trial)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.signal import lfilter

from .matlin import as_matrix, frobenius_norm, invert


class ModelError(ValueError):
    """Invalid model definition."""


class WrongKindError(ModelError):
    """Operation requested on a plan of the wrong kind."""


def grid_index(theta: float, n: int) -> int:
    """Integer part ``[theta * n]``, guarded against float round-off."""
    return int(math.floor(theta * n + 1e-9))


# ---------------------------------------------------------------------------
# coefficients

@dataclass(frozen=True)
class PiecewiseCoefficients:
    """Coefficient matrices ``a_1..a_{k+1}`` and right ends ``theta_1..theta_{k+1}=1``."""

    thetas: tuple[float, ...]
    coeffs: tuple[NDArray[np.float64], ...]

    def __post_init__(self) -> None:
        thetas = tuple(float(t) for t in self.thetas)
        coeffs = tuple(as_matrix(c) for c in self.coeffs)
        if len(thetas) != len(coeffs) or not thetas:
            raise ModelError("need one right end per coefficient matrix")
        if abs(thetas[-1] - 1.0) > 1e-12:
            raise ModelError("last segment must end at theta = 1")
        prev = 0.0
        for t in thetas:
            if not prev < t <= 1.0:
                raise ModelError(f"thetas must increase strictly inside (0, 1]: {thetas}")
            prev = t
        shape = coeffs[0].shape
        if any(c.shape != shape for c in coeffs):
            raise ModelError("all coefficient matrices must share one shape")
        for a, b in zip(coeffs, coeffs[1:]):
            if frobenius_norm(a - b) == 0.0:
                raise ModelError("adjacent coefficient matrices must differ")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def constant(cls, coeff: ArrayLike) -> PiecewiseCoefficients:
        return cls((1.0,), (as_matrix(coeff),))

    @classmethod
    def single_change(cls, a: ArrayLike, b: ArrayLike, theta: float) -> PiecewiseCoefficients:
        return cls((theta, 1.0), (as_matrix(a), as_matrix(b)))

    @property
    def M(self) -> int:
        return self.coeffs[0].shape[0]

    @property
    def K(self) -> int:
        return self.coeffs[0].shape[1]

    @property
    def n_changes(self) -> int:
        return len(self.thetas) - 1

    def change_indices(self, n: int) -> list[int]:
        """Sample indices ``[theta_i n]`` of the change-points (1-based, last sample of each regime)."""
        return [grid_index(t, n) for t in self.thetas[:-1]]

    def segment_of(self, n: int) -> NDArray[np.intp]:
        """Regime number for each (0-based) column of a length-``n`` sample."""
        ends = np.array([grid_index(t, n) for t in self.thetas[:-1]], dtype=int)
        idx = np.arange(1, n + 1)
        return np.searchsorted(ends, idx, side="left").astype(np.intp)

    def to_dict(self) -> dict[str, Any]:
        return {"thetas": list(self.thetas), "coeffs": [c.tolist() for c in self.coeffs]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> PiecewiseCoefficients:
        return cls(tuple(d["thetas"]), tuple(np.array(c, dtype=float) for c in d["coeffs"]))


# ---------------------------------------------------------------------------
# regression plans

_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "pi", "tanh", "arctan")
}

PlanFunction = Union[str, Callable[[NDArray[np.float64]], ArrayLike]]


def _eval_function(fn: PlanFunction, t: NDArray[np.float64]) -> NDArray[np.float64]:
    if isinstance(fn, str):
        value = eval(fn, {"__builtins__": {}}, {**_EXPR_NAMESPACE, "t": t})  # noqa: S307
    else:
        value = fn(t)
    return np.broadcast_to(np.asarray(value, dtype=float), t.shape).copy()


@dataclass(frozen=True)
class DeterministicPlan:
    """Predictors ``x_i(n) = f_i(n/N)``.

    Each function is a callable of a time array or a short numpy expression in
    ``t`` such as ``"2.5 + sin(2*pi*t)"`` (expressions are what JSON stores).
    """

    functions: tuple[PlanFunction, ...]
    kind = "deterministic"

    def __post_init__(self) -> None:
        object.__setattr__(self, "functions", tuple(self.functions))
        if not self.functions:
            raise ModelError("a plan needs at least one function")

    @property
    def K(self) -> int:
        return len(self.functions)

    def __call__(self, t: ArrayLike) -> NDArray[np.float64]:
        """Evaluate ``F(t)``; returns shape ``(K,) + t.shape``."""
        t = np.asarray(t, dtype=float)
        out = np.stack([_eval_function(f, t) for f in self.functions])
        if not np.all(np.isfinite(out)):
            raise ModelError("plan functions must be finite on [0, 1]")
        return out

    def to_dict(self) -> dict[str, Any]:
        if not all(isinstance(f, str) for f in self.functions):
            raise ModelError("only expression-string plans can be serialized")
        return {"kind": self.kind, "functions": list(self.functions)}


@dataclass(frozen=True)
class AR1Plan:
    """Stochastic predictors ``x_i = rho x_{i-1} + eta_i`` with ``x_0 = 0``.

    ``channels`` independent AR(1) predictors, optionally preceded by a
    constant-1 intercept row.
    """

    rho: float
    innovation_std: float = 1.0
    channels: int = 1
    intercept: bool = True
    kind = "ar1"

    def __post_init__(self) -> None:
        if not abs(self.rho) < 1:
            raise ModelError("AR(1) coefficient must satisfy |rho| < 1")
        if self.innovation_std < 0 or self.channels < 1:
            raise ModelError("bad AR(1) plan parameters")

    @property
    def K(self) -> int:
        return self.channels + int(self.intercept)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "rho": self.rho, "innovation_std": self.innovation_std,
                "channels": self.channels, "intercept": self.intercept}


@dataclass(frozen=True)
class LaggedSystemPlan:
    """Predetermined variables of a dynamic system.

    ``X(n) = (1, Y(n-1), x_n)`` where ``x_n`` are exogenous AR(1) channels and
    ``Y(0) = 0``. Used for simultaneous-equation experiments.
    """

    responses: int
    exog_rho: float = 0.5
    exog_std: float = 1.0
    exog_channels: int = 1
    intercept: bool = True
    kind = "lagged"

    def __post_init__(self) -> None:
        if not abs(self.exog_rho) < 1:
            raise ModelError("AR(1) coefficient must satisfy |rho| < 1")

    @property
    def K(self) -> int:
        return int(self.intercept) + self.responses + self.exog_channels

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "responses": self.responses, "exog_rho": self.exog_rho,
                "exog_std": self.exog_std, "exog_channels": self.exog_channels,
                "intercept": self.intercept}


RegressionPlan = Union[DeterministicPlan, AR1Plan, LaggedSystemPlan]


def plan_from_dict(d: dict[str, Any]) -> RegressionPlan:
    kind = d.get("kind")
    if kind == "deterministic":
        return DeterministicPlan(tuple(d["functions"]))
    if kind == "ar1":
        return AR1Plan(d["rho"], d.get("innovation_std", 1.0), d.get("channels", 1),
                       d.get("intercept", True))
    if kind == "lagged":
        return LaggedSystemPlan(d["responses"], d.get("exog_rho", 0.5), d.get("exog_std", 1.0),
                                d.get("exog_channels", 1), d.get("intercept", True))
    raise ModelError(f"unknown plan kind {kind!r}")


def evaluate_plan(plan: RegressionPlan, n: int) -> NDArray[np.float64]:
    """Grid-evaluate a deterministic plan: column ``j`` (1-based) is ``F(j/n)``."""
    if not isinstance(plan, DeterministicPlan):
        raise WrongKindError("only deterministic plans can be evaluated on the grid")
    return plan(np.arange(1, n + 1) / n)


# ---------------------------------------------------------------------------
# noise

@dataclass(frozen=True)
class NoiseModel:
    """Gaussian noise, optionally AR(1) per channel and linearly mixed.

    Channel ``j`` follows ``e_j(n) = ar_coeff[j] e_j(n-1) + std[j] eta_j(n)``
    with ``e_j(0) = 0``; the emitted noise is ``mixing @ e`` (identity by
    default). A zero ``std`` gives a noise-free channel.
    """

    std: tuple[float, ...]
    ar_coeff: tuple[float, ...] | None = None
    mixing: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        std = tuple(float(s) for s in np.atleast_1d(self.std))
        ar = tuple(float(a) for a in np.atleast_1d(self.ar_coeff)) if self.ar_coeff is not None \
            else (0.0,) * len(std)
        if len(ar) == 1 and len(std) > 1:
            ar = ar * len(std)
        if len(ar) != len(std):
            raise ModelError("ar_coeff must match the number of channels")
        if any(s < 0 or not math.isfinite(s) for s in std):
            raise ModelError("noise std must be finite and nonnegative")
        if any(not abs(a) < 1 for a in ar):
            raise ModelError("noise AR coefficients must satisfy |a| < 1")
        mixing = None if self.mixing is None else as_matrix(self.mixing)
        if mixing is not None and mixing.shape != (len(std), len(std)):
            raise ModelError("mixing matrix must be M x M")
        object.__setattr__(self, "std", std)
        object.__setattr__(self, "ar_coeff", ar)
        object.__setattr__(self, "mixing", mixing)

    @classmethod
    def iid(cls, std: float | Sequence[float], M: int = 1) -> NoiseModel:
        s = np.atleast_1d(np.asarray(std, dtype=float))
        return cls(tuple(np.broadcast_to(s, (max(M, s.size),))))

    @property
    def M(self) -> int:
        return len(self.std)

    @property
    def kind(self) -> str:
        return "ar1" if any(self.ar_coeff) else "iid"

    def scaled(self, factor: float) -> NoiseModel:
        return NoiseModel(tuple(factor * s for s in self.std), self.ar_coeff, self.mixing)

    def generate(self, innovations: NDArray[np.float64]) -> NDArray[np.float64]:
        """Map standard normal innovations ``(..., M, N)`` to noise of the same shape."""
        e = innovations * np.asarray(self.std)[:, None]
        for j, a in enumerate(self.ar_coeff):
            if a:
                e[..., j, :] = lfilter([1.0], [1.0, -a], e[..., j, :], axis=-1)
        if self.mixing is not None:
            e = np.einsum("ij,...jn->...in", self.mixing, e)
        return e

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "std": list(self.std), "ar_coeff": list(self.ar_coeff),
                "mixing": None if self.mixing is None else self.mixing.tolist()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> NoiseModel:
        mixing = d.get("mixing")
        return cls(tuple(d["std"]), tuple(d["ar_coeff"]) if d.get("ar_coeff") is not None else None,
                   None if mixing is None else np.array(mixing, dtype=float))


# ---------------------------------------------------------------------------
# samples and specs

@dataclass(frozen=True)
class Sample:
    """Observed predictors ``X`` (K x N) and responses ``Y`` (M x N)."""

    X: NDArray[np.float64]
    Y: NDArray[np.float64]

    def __post_init__(self) -> None:
        X = as_matrix(self.X)
        Y = as_matrix(self.Y)
        if X.shape[1] != Y.shape[1]:
            raise ModelError(f"X has {X.shape[1]} columns but Y has {Y.shape[1]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def N(self) -> int:
        return self.X.shape[1]

    @property
    def K(self) -> int:
        return self.X.shape[0]

    @property
    def M(self) -> int:
        return self.Y.shape[0]

    def to_csv(self) -> str:
        """CSV with header ``t,x1..xK,y1..yM`` and one row per time step."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(self.K)] + [f"y{j + 1}" for j in range(self.M)])
        for n in range(self.N):
            w.writerow([n + 1] + [repr(float(v)) for v in self.X[:, n]]
                       + [repr(float(v)) for v in self.Y[:, n]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> Sample:
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        xcols = [i for i, h in enumerate(header) if h.startswith("x")]
        ycols = [i for i, h in enumerate(header) if h.startswith("y")]
        if not xcols or not ycols:
            raise ModelError("sample CSV needs x and y columns")
        data = np.array(body, dtype=float)
        return cls(data[:, xcols].T, data[:, ycols].T)


@dataclass(frozen=True)
class ModelSpec:
    """Complete generative description of one experiment cell."""

    plan: RegressionPlan
    coeffs: PiecewiseCoefficients
    noise: NoiseModel
    N: int
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.plan.K != self.coeffs.K:
            raise ModelError(f"plan has K={self.plan.K} but coefficients have K={self.coeffs.K}")
        if self.noise.M != self.coeffs.M:
            raise ModelError(f"noise has M={self.noise.M} but coefficients have M={self.coeffs.M}")
        if isinstance(self.plan, LaggedSystemPlan) and self.plan.responses != self.coeffs.M:
            raise ModelError("lagged plan must lag every response")
        if self.N < 2:
            raise ModelError("N must be at least 2")

    @property
    def K(self) -> int:
        return self.coeffs.K

    @property
    def M(self) -> int:
        return self.coeffs.M

    def with_N(self, n: int) -> ModelSpec:
        return ModelSpec(self.plan, self.coeffs, self.noise, int(n), dict(self.meta))

    def stationary(self) -> ModelSpec:
        """Same spec with the first regime's coefficients throughout."""
        return ModelSpec(self.plan, PiecewiseCoefficients.constant(self.coeffs.coeffs[0]),
                         self.noise, self.N, dict(self.meta))

    def to_dict(self) -> dict[str, Any]:
        d = {"N": self.N, "plan": self.plan.to_dict(), "coeffs": self.coeffs.to_dict(),
             "noise": self.noise.to_dict()}
        if self.meta:
            d["meta"] = self.meta
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ModelSpec:
        return cls(plan_from_dict(d["plan"]), PiecewiseCoefficients.from_dict(d["coeffs"]),
                   NoiseModel.from_dict(d["noise"]), int(d["N"]), dict(d.get("meta", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> ModelSpec:
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# simulation

_PREDICTOR_STREAM = 0
_NOISE_STREAM = 1


def _rng(seed: int, trial: int, channel: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial), channel]))


def _exog_count(plan: RegressionPlan) -> int:
    if isinstance(plan, AR1Plan):
        return plan.channels
    if isinstance(plan, LaggedSystemPlan):
        return plan.exog_channels
    return 0


def simulate_batch(spec: ModelSpec, seed: int, trials: int, start: int = 0
                   ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Simulate trials ``start .. start+trials-1``.

    Returns ``X`` of shape ``(trials, K, N)`` and ``Y`` of shape ``(trials, M, N)``.
    Trial ``j`` draws from its own streams keyed by ``(seed, j, channel)``.
    """
    N, M, K = spec.N, spec.M, spec.K
    plan = spec.plan
    n_exog = _exog_count(plan)
    eta = np.empty((trials, n_exog, N))
    innov = np.empty((trials, M, N))
    for i in range(trials):
        j = start + i
        if n_exog:
            eta[i] = _rng(seed, j, _PREDICTOR_STREAM).standard_normal((n_exog, N))
        innov[i] = _rng(seed, j, _NOISE_STREAM).standard_normal((M, N))
    noise = spec.noise.generate(innov)
    seg = spec.coeffs.segment_of(N)
    pis = np.stack(spec.coeffs.coeffs)[seg]  # (N, M, K)

    if isinstance(plan, DeterministicPlan):
        X = np.broadcast_to(evaluate_plan(plan, N), (trials, K, N)).copy()
    elif isinstance(plan, AR1Plan):
        x = lfilter([1.0], [1.0, -plan.rho], plan.innovation_std * eta, axis=-1)
        parts = [np.ones((trials, 1, N))] if plan.intercept else []
        X = np.concatenate(parts + [x], axis=1)
    else:
        x = lfilter([1.0], [1.0, -plan.exog_rho], plan.exog_std * eta, axis=-1)
        X = np.zeros((trials, K, N))
        off = int(plan.intercept)
        if plan.intercept:
            X[:, 0, :] = 1.0
        X[:, off + M:, :] = x
        Y = np.empty((trials, M, N))
        prev = np.zeros((trials, M))
        for n in range(N):
            X[:, off:off + M, n] = prev
            # elementwise product-sum keeps trials bit-identical for any batch size
            prev = np.sum(X[:, None, :, n] * pis[n][None], axis=-1) + noise[:, :, n]
            Y[:, :, n] = prev
        return X, Y

    Y = np.sum(np.moveaxis(pis, 0, -1)[None] * X[:, None], axis=2) + noise
    return X, Y


def simulate(spec: ModelSpec, seed: int, trial: int = 0) -> Sample:
    """One reproducible sample; identical to trial ``trial`` of :func:`simulate_batch`."""
    X, Y = simulate_batch(spec, seed, 1, start=trial)
    return Sample(X[0], Y[0])


def ses_to_reduced(B: ArrayLike, Gamma: ArrayLike) -> NDArray[np.float64]:
    """Reduced-form coefficients ``-B^{-1} Gamma`` of ``B Y + Gamma X = eps``."""
    B = as_matrix(B)
    Gamma = as_matrix(Gamma)
    if B.shape[0] != B.shape[1] or B.shape[0] != Gamma.shape[0]:
        raise ModelError("B must be M x M and Gamma M x K")
    return -invert(B) @ Gamma
