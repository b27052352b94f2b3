"""Domain types, instance sampling, and the deterministic randomness contract.

Job sizes are exponential: ``n`` jobs for each of ``K`` types, type ``k``
having mean duration ``lambdas[k]``.  All randomness flows through a named,
versioned counter-based generator so that regenerating an instance from
``(params, seed)`` is bit-exact, on any machine and under any degree of
parallelism.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Counter-based generator identity, recorded in every output file.  Bump the
# version if the sampling recipe ever changes.
GENERATOR_NAME = "numpy-philox4x64"
GENERATOR_VERSION = 1


class ParameterError(ValueError):
    """Invalid scheduling parameters (non-positive means, counts, ...)."""


class EngineError(RuntimeError):
    """A policy or controller violated an execution contract."""


_MASK64 = (1 << 64) - 1


def derive_seed(*parts: int) -> int:
    """Mix integer coordinates into a single 64-bit seed (splitmix64 chain).

    Used to address independent streams as (base_seed, grid_index,
    seed_index) without coordination between parallel workers.
    """
    x = 0x9E3779B97F4A7C15
    for p in parts:
        x = (x + (int(p) & _MASK64)) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        x = z ^ (z >> 31)
    return x


@dataclass(frozen=True)
class TypeParams:
    """Expected type durations and the common per-type job count.

    The order of ``lambdas`` carries no meaning: operations that need a
    sorted view sort internally, and no policy may exploit the input order.
    """

    lambdas: tuple[float, ...]
    n: int

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        if len(lam) < 1:
            raise ParameterError("at least one job type is required")
        if any((not math.isfinite(x)) or x <= 0.0 for x in lam):
            raise ParameterError("every type mean must be positive and finite")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError("jobs per type n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))

    @property
    def K(self) -> int:
        return len(self.lambdas)

    @property
    def total_jobs(self) -> int:
        return self.n * self.K


@dataclass(frozen=True)
class Instance:
    """One realized n-by-K matrix of job sizes, plus how it was sampled."""

    sizes: np.ndarray  # shape (n, K), strictly positive
    params: TypeParams
    seed: int

    def __post_init__(self):
        sizes = np.asarray(self.sizes, dtype=np.float64)
        if sizes.shape != (self.params.n, self.params.K):
            raise ParameterError(
                f"size matrix shape {sizes.shape} does not match "
                f"(n={self.params.n}, K={self.params.K})"
            )
        if not np.all(np.isfinite(sizes)) or np.any(sizes <= 0.0):
            raise ParameterError("all job sizes must be positive and finite")
        sizes.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def K(self) -> int:
        return self.params.K


def sample_instance(params: TypeParams, seed: int) -> Instance:
    """Draw an instance of i.i.d. exponential job sizes.

    Sizes are built by inverse CDF, ``P = -lambda * ln(U)`` with U uniform on
    (0, 1), from uniforms that depend only on ``seed`` (never on lambda).
    Consequently scaling the means rescales the realized sizes and nothing
    else.
    """
    gen = np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
    u = gen.random((params.n, params.K))
    # random() yields [0, 1); nudge exact zeros into the open interval
    np.clip(u, np.finfo(np.float64).tiny, None, out=u)
    base = -np.log(u)
    sizes = base * np.asarray(params.lambdas)[None, :]
    return Instance(sizes=sizes, params=params, seed=int(seed))


@dataclass
class RunTrace:
    """Begin/end bookkeeping of one policy run on one instance.

    Rows are indexed by completion rank within each type (the i-th row of
    column k is the i-th job of type k *started* by the run, which for every
    policy except the realization-aware benchmark is also instance row i).
    ``job_row`` maps trace rows back to instance rows; ``job_sizes`` carries
    the realized duration of each trace row.
    """

    begin: np.ndarray      # (n, K)
    end: np.ndarray        # (n, K)
    processed: np.ndarray  # (n, K) processor time received at completion
    job_row: np.ndarray    # (n, K) instance row executed at this trace slot
    job_sizes: np.ndarray  # (n, K) realized size of that job
    flow_time: float = field(default=0.0)

    def __post_init__(self):
        if self.flow_time == 0.0:
            self.flow_time = math.fsum(self.end.ravel().tolist())

    @property
    def n(self) -> int:
        return self.begin.shape[0]

    @property
    def K(self) -> int:
        return self.begin.shape[1]


# ---------------------------------------------------------------------------
# Instance CSV round trip


def instance_to_csv(instance: Instance, path) -> None:
    """Write an instance as CSV with metadata comment lines.

    Entries use 17 significant digits so a round trip is bit-identical.
    """
    lam = ";".join(repr(x) for x in instance.params.lambdas)
    lines = [
        f"# generator={GENERATOR_NAME} v{GENERATOR_VERSION}",
        f"# seed={instance.seed}",
        f"# lambdas={lam}",
        ",".join(f"type_{k + 1}" for k in range(instance.K)),
    ]
    for row in instance.sizes:
        lines.append(",".join(f"{x:.17g}" for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def instance_from_csv(path) -> Instance:
    """Rebuild an instance written by :func:`instance_to_csv`."""
    seed = None
    lambdas = None
    rows = []
    header_seen = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("seed="):
                    seed = int(body[len("seed="):])
                elif body.startswith("lambdas="):
                    lambdas = tuple(
                        float(x) for x in body[len("lambdas="):].split(";")
                    )
                continue
            if not header_seen:
                header_seen = True
                continue
            rows.append([float(x) for x in line.split(",")])
    if seed is None or lambdas is None or not rows:
        raise ParameterError(f"{path}: missing seed/lambdas metadata or data rows")
    sizes = np.array(rows, dtype=np.float64)
    params = TypeParams(lambdas=lambdas, n=sizes.shape[0])
    return Instance(sizes=sizes, params=params, seed=seed)
