"""Benchmark instances, experiment tables, and plot-data emission.

Generators produce the standard test families (banded Toeplitz pairs, a
damped mass-spring descriptor chain, near-orthogonal matrices); the
runner executes solver/instance combinations under wall-clock or
iteration budgets and writes a results table plus one trace CSV per run.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bcd import BcdOptions, solve_general
from .dh import DhParam
from .fgm import FgmOptions, solve_hurwitz
from .pencil import MatrixPair, spectrum
from .regions import LmiRegion, characteristic_matrix, hurwitz, region_from_dict
from .result import write_trace

__all__ = [
    "BenchInstance",
    "grcar",
    "msd",
    "near_schur",
    "relative_error",
    "run_table",
    "region_plot_data",
]


def grcar(n, k=1) -> MatrixPair:
    """Banded Toeplitz pair: subdiagonal -1, main and k superdiagonals 1, E = I.

    All eigenvalues have positive real part, which makes these pairs
    standard hard cases for half-plane nearness.
    """
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    A = np.zeros((n, n))
    for i in range(n):
        if i > 0:
            A[i, i - 1] = -1.0
        A[i, i: min(n, i + k + 1)] = 1.0
    return MatrixPair(np.eye(n), A)


def msd(n, eps=0.0):
    """Mass-spring-damper descriptor chain of size 2n, destabilized by eps.

    Blocks: E = diag(M, I), J = [[0, -I], [I, 0]], R = diag(D, -eps I),
    Q = diag(I, K), A = (J - R) Q, with M = I, K the standard second
    difference matrix, and D = 0.05 I. The light damping keeps eps = 0.01 just
    inside the stability boundary while eps = 0.1 is clearly unstable.
    Returns the pair and the structured quadruple that generated it.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if eps < 0:
        raise ValueError(f"need eps >= 0, got {eps}")
    I = np.eye(n)
    M = I.copy()
    K = 2.0 * I - np.eye(n, k=1) - np.eye(n, k=-1)
    D = 0.05 * I
    Z = np.zeros((n, n))
    E = np.block([[M, Z], [Z, I]])
    J = np.block([[Z, -I], [I, Z]])
    R = np.block([[D, Z], [Z, -eps * I]])
    Q = np.block([[I, Z], [Z, K]])
    A = (J - R) @ Q
    T = np.block([[M, Z], [Z, np.linalg.inv(K)]])
    return MatrixPair(E, A), DhParam(T, J, R, Q)


def near_schur(n, eps, seed=0) -> MatrixPair:
    """Random orthogonal matrix plus scaled Gaussian noise, E = I.

    A = U + eps * N * sqrt(n) / ||N||_F with U the orthogonal factor of a
    seeded Gaussian matrix, so ||A - U||_F = eps * sqrt(n) exactly.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    U, _ = scipy.linalg.qr(G)
    N = rng.standard_normal((n, n))
    A = U + eps * N * np.sqrt(n) / np.linalg.norm(N, "fro")
    return MatrixPair(np.eye(n), A)


def relative_error(E, A, Et, At) -> float:
    """sqrt((||A - At||_F^2 + ||E - Et||_F^2) / (||A||_F^2 + ||E||_F^2))."""
    E, A = np.asarray(E, float), np.asarray(A, float)
    Et, At = np.asarray(Et, float), np.asarray(At, float)
    denom = float(np.sum(A * A) + np.sum(E * E))
    if denom == 0.0:
        raise ValueError("relative error undefined for E = A = 0")
    num = float(np.sum((A - At) ** 2) + np.sum((E - Et) ** 2))
    return float(np.sqrt(num / denom))


@dataclass
class BenchInstance:
    name: str
    pair: MatrixPair
    region: LmiRegion
    algorithm: str = "fgm"        # "fgm" | "bcd"
    budget_s: float = 30.0
    mu: float = 1.0
    seed: int = 0
    max_iters: int | None = None

    @classmethod
    def from_dict(cls, obj):
        gen = obj["generator"]
        kind = gen["kind"]
        seed = int(obj.get("seed", 0))
        if kind == "grcar":
            pair = grcar(int(gen["n"]), int(gen.get("k", 1)))
        elif kind == "msd":
            pair, _ = msd(int(gen["n"]), float(gen.get("eps", 0.0)))
        elif kind == "near_schur":
            pair = near_schur(int(gen["n"]), float(gen.get("eps", 0.0)), seed)
        elif kind == "pair":
            pair = MatrixPair(np.asarray(gen["E"], float), np.asarray(gen["A"], float))
        else:
            raise ValueError(f"unknown generator kind {kind!r}")
        region = region_from_dict(obj.get("region", {"kind": "left_half_plane", "k": 0.0}))
        return cls(name=obj["name"], pair=pair, region=region,
                   algorithm=obj.get("algorithm", "fgm"),
                   budget_s=float(obj.get("budget_s", 30.0)),
                   mu=float(obj.get("mu", 1.0)), seed=seed,
                   max_iters=obj.get("max_iters"))


def _run_instance(inst: BenchInstance):
    if inst.algorithm == "fgm":
        opts = FgmOptions(mu=inst.mu, max_time_s=inst.budget_s,
                          max_iters=inst.max_iters, seed=inst.seed)
        return solve_hurwitz(inst.pair.E, inst.pair.A, opts)
    if inst.algorithm == "bcd":
        opts = BcdOptions(mu=inst.mu, max_time_s=inst.budget_s,
                          max_outer_iters=inst.max_iters)
        return solve_general(inst.pair.E, inst.pair.A, inst.region, opts)
    raise ValueError(f"unknown algorithm {inst.algorithm!r}")


def run_table(instances, out_dir=None, workers=1):
    """Run every instance and collect a results table.

    Returns a list of rows (dict per instance, input order preserved).
    With out_dir set, also writes results.csv, results.json, and one
    trace_<name>.csv per run. Failures are recorded per instance and do
    not stop the batch.
    """
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    results = [None] * len(instances)

    def work(i):
        inst = instances[i]
        try:
            res = _run_instance(inst)
            row = {
                "instance": inst.name,
                "algorithm": inst.algorithm,
                "relative_error_pct": 100.0 * res.relative_error,
                "time_s": res.trace[-1][0] if res.trace else 0.0,
                "objective": res.objective,
                "admissible": res.admissible,
                "iterations": res.iterations,
                "seed": inst.seed,
                "error": "",
            }
            return row, res
        except Exception as exc:  # noqa: BLE001 - batch keeps going by contract
            return {
                "instance": inst.name,
                "algorithm": inst.algorithm,
                "relative_error_pct": float("nan"),
                "time_s": float("nan"),
                "objective": float("nan"),
                "admissible": False,
                "iterations": 0,
                "seed": inst.seed,
                "error": f"{type(exc).__name__}: {exc}",
            }, None

    if workers <= 1:
        outcome = [work(i) for i in range(len(instances))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcome = list(pool.map(work, range(len(instances))))
    for i, (row, res) in enumerate(outcome):
        results[i] = row
        if out_dir is not None and res is not None:
            safe = "".join(c if c.isalnum() or c in "-_" else "_"
                           for c in instances[i].name)
            trace_path = os.path.join(out_dir, f"trace_{safe}.csv")
            write_trace(trace_path, res.trace)
            row["trace"] = trace_path

    if out_dir is not None:
        with open(os.path.join(out_dir, "results.json"), "w") as fh:
            json.dump(results, fh, indent=1)
        cols = ["instance", "algorithm", "relative_error_pct", "time_s",
                "objective", "admissible", "iterations", "seed", "error"]
        with open(os.path.join(out_dir, "results.csv"), "w") as fh:
            fh.write(",".join(cols) + "\n")
            for row in results:
                fh.write(",".join(_csv_cell(row.get(c, "")) for c in cols) + "\n")
    return results


def _csv_cell(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _lam_max(region, z):
    return float(np.linalg.eigvalsh(characteristic_matrix(region, z))[-1])


def region_plot_data(region: LmiRegion, pairs, bounds, nx=161, ny=121,
                     out_dir=".", tol=1e-6):
    """Emit eigenvalue scatters and a region boundary point cloud as CSV.

    The boundary is located where the largest eigenvalue of the
    characteristic matrix changes sign between neighbouring grid nodes,
    refined by bisection along the connecting segment to `tol`.
    Returns the mapping of emitted file paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    xmin, xmax, ymin, ymax = bounds
    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    vals = np.array([[_lam_max(region, x + 1j * y) for x in xs] for y in ys])

    def bisect(z_a, z_b):
        f_a = _lam_max(region, z_a)
        for _ in range(80):
            if abs(z_b - z_a) < tol:
                break
            mid = (z_a + z_b) / 2.0
            f_mid = _lam_max(region, mid)
            if (f_mid < 0.0) == (f_a < 0.0):
                z_a, f_a = mid, f_mid
            else:
                z_b = mid
        return (z_a + z_b) / 2.0

    boundary = []
    for iy in range(ny):
        for ix in range(nx):
            z0 = xs[ix] + 1j * ys[iy]
            for jy, jx in ((iy, ix + 1), (iy + 1, ix)):
                if jx >= nx or jy >= ny:
                    continue
                z1 = xs[jx] + 1j * ys[jy]
                if np.sign(vals[iy, ix]) * np.sign(vals[jy, jx]) < 0:
                    boundary.append(bisect(z0, z1))

    files = {}
    bpath = os.path.join(out_dir, "boundary.csv")
    with open(bpath, "w") as fh:
        fh.write("re,im\n")
        for z in boundary:
            fh.write(f"{z.real:.12g},{z.imag:.12g}\n")
    files["boundary"] = bpath

    for i, pair in enumerate(pairs):
        rep = spectrum(pair)
        path = os.path.join(out_dir, f"eigenvalues_{i:02d}.csv")
        with open(path, "w") as fh:
            fh.write("re,im\n")
            for lam in rep.finite_eigenvalues:
                fh.write(f"{lam.real:.12g},{lam.imag:.12g}\n")
        files[f"eigenvalues_{i:02d}"] = path
    return files


def hurwitz_grcar_suite(n=10, budget_s=30.0, mu=1.0):
    """The three half-plane test rows at size n."""
    return [BenchInstance(name=f"grcar_{n}_{k}", pair=grcar(n, k),
                          region=hurwitz(), algorithm="fgm",
                          budget_s=budget_s, mu=mu) for k in (1, 2, 3)]
