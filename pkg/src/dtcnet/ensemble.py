"""Disorder-ensemble orchestration with reproducible run manifests.

A run sweeps epsilon values over a batch of disorder realizations,
executes the requested tasks, and writes pooled CSV outputs plus a JSON
manifest into a fresh run directory. Disorder fields are keyed by
(seed, realization index) and held fixed across the epsilon sweep, so
epsilon-dependence curves are smooth and attributable to epsilon alone.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from math import pi
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    gap_ratios,
    pr_distribution,
    reference_pdf,
    walk_horizon_periods,
    walk_populations,
)
from .floquet_core import (
    effective_hamiltonian,
    drive_unitary,
    floquet_spectrum,
    squared_floquet,
)
from .netfit import avg_degree_by_domain_walls, kmin_scan, lognormal_lr_test, log_binned_histogram
from .percolation_graph import percolation_graph
from .semiclassical import ClassicalConfiguration, classical_energy, classify_fixed_point, jacobian
from .spin_hilbert import Configuration, SpinChainParams, sample_disorder, spin_z_table

__all__ = ["EnsembleSpec", "RunManifest", "run_ensemble", "TASKS", "MAX_SITES"]

TASKS = ("graph", "levelstats", "spectrum", "walk", "classical")
MAX_SITES = 14
DEFAULT_PERIODS = 64
GAP_HISTOGRAM_BINS = 20


@dataclass(frozen=True)
class EnsembleSpec:
    """What to run: base parameters, epsilon sweep, batch size, tasks."""

    params: SpinChainParams
    epsilons: tuple[float, ...]
    realizations: int
    seed: int
    tasks: frozenset[str]
    periods: int = DEFAULT_PERIODS

    def __post_init__(self) -> None:
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if len(self.epsilons) == 0:
            raise ValueError("epsilons must be nonempty")
        if any(e < 0 for e in self.epsilons):
            raise ValueError("epsilons must be >= 0")
        unknown = set(self.tasks) - set(TASKS)
        if unknown:
            raise ValueError(f"unknown tasks {sorted(unknown)}; expected subset of {TASKS}")
        if not self.tasks:
            raise ValueError("tasks must be nonempty")
        if self.periods < 2:
            raise ValueError("periods must be >= 2")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")

    @classmethod
    def from_json(cls, payload: dict) -> "EnsembleSpec":
        p = payload.get("params", {})
        params = SpinChainParams(
            n=int(p["n"]),
            J0=float(p.get("J0", 0.06)),
            alpha=float(p.get("alpha", 1.51)),
            W=float(p.get("W", pi)),
            T1=float(p.get("T1", 1.0)),
            T2=float(p.get("T2", 1.0)),
        )
        return cls(
            params=params,
            epsilons=tuple(float(e) for e in payload["epsilons"]),
            realizations=int(payload["realizations"]),
            seed=int(payload["seed"]),
            tasks=frozenset(payload["tasks"]),
            periods=int(payload.get("periods", DEFAULT_PERIODS)),
        )

    def to_json(self) -> dict:
        p = self.params
        return {
            "params": {"n": p.n, "J0": p.J0, "alpha": p.alpha, "W": p.W, "T1": p.T1, "T2": p.T2},
            "epsilons": list(self.epsilons),
            "realizations": self.realizations,
            "seed": self.seed,
            "tasks": sorted(self.tasks),
            "periods": self.periods,
        }


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to audit or reproduce a run."""

    spec: dict
    per_realization_seeds: list
    artifacts: dict
    branch_margin_warnings: list
    version: str
    timings: dict
    run_dir: str
    notes: list

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "run_dir": self.run_dir,
            "spec": self.spec,
            "per_realization_seeds": self.per_realization_seeds,
            "artifacts": self.artifacts,
            "branch_margin_warnings": self.branch_margin_warnings,
            "timings": self.timings,
            "notes": self.notes,
        }


def _worker_count() -> int:
    raw = os.environ.get("DTCNET_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _format_float(x: float) -> str:
    return f"{x:.12g}"


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


def _eps_tag(eps: float) -> str:
    return f"{eps:g}".replace(".", "p").replace("-", "m")


def _batch_magnetization(U: np.ndarray, sign_sum: np.ndarray, periods: int) -> np.ndarray:
    """Magnetization series for every initial configuration at once.

    Returns an array of shape (periods + 1, dim): column i is the series
    of initial configuration i, computed from the populations of U^m.
    """
    dim = U.shape[0]
    n = dim.bit_length() - 1
    out = np.empty((periods + 1, dim))
    W = np.eye(dim, dtype=complex)
    out[0] = sign_sum / n  # m = 0: populations are the basis states themselves
    for m in range(1, periods + 1):
        W = U @ W
        out[m] = sign_sum @ (np.abs(W) ** 2) / n
    return out


def _spectra_matrix(series_matrix: np.ndarray) -> np.ndarray:
    """Power spectra of many series at once (columns); V has shape (N, dim)."""
    N = series_matrix.shape[0] - 1
    m = np.arange(1, N + 1)
    k = np.arange(N)
    phases = np.exp(-2j * pi * np.outer(k, m) / N)
    return np.abs(phases @ series_matrix[1:] / N) ** 2


def _realization_payload(spec: EnsembleSpec, r: int) -> dict:
    """Everything one disorder realization contributes, keyed by task."""
    disorder = sample_disorder(spec.params, spec.seed, r)
    payload: dict = {"warnings": []}
    n = spec.params.n
    sign_sum = spin_z_table(n).sum(axis=1)

    need_ref_spectra = "spectrum" in spec.tasks
    if need_ref_spectra:
        params0 = replace(spec.params, epsilon=0.0)
        U0 = drive_unitary(params0, disorder)
        ref_V = _spectra_matrix(_batch_magnetization(U0.matrix, sign_sum, spec.periods))
        ref_norm = np.linalg.norm(ref_V, axis=0)

    for eps in spec.epsilons:
        params = replace(spec.params, epsilon=eps)
        key = _eps_tag(eps)
        U = drive_unitary(params, disorder)

        if "graph" in spec.tasks or "levelstats" in spec.tasks:
            spectrum = floquet_spectrum(U)
            if spectrum.branch_warnings:
                payload["warnings"].append(
                    {"epsilon": eps, "realization": r, "warnings": list(spectrum.branch_warnings)}
                )

        if "graph" in spec.tasks:
            graph_T = percolation_graph(effective_hamiltonian(spectrum))
            spectrum_2T = floquet_spectrum(squared_floquet(U))
            graph_2T = percolation_graph(effective_hamiltonian(spectrum_2T))
            payload.setdefault("graph", {})[key] = (graph_T, graph_2T)

        if "levelstats" in spec.tasks:
            sample = gap_ratios(spectrum.quasienergies)
            payload.setdefault("levelstats", {})[key] = (
                sample.ratios,
                sample.excluded_degenerate,
            )

        if need_ref_spectra:
            V = _spectra_matrix(_batch_magnetization(U.matrix, sign_sum, spec.periods))
            norm = np.linalg.norm(V, axis=0)
            with np.errstate(invalid="ignore", divide="ignore"):
                fidelity = np.sqrt(np.einsum("ki,ki->i", ref_V, V) / (ref_norm * norm))
            fidelity[(ref_norm < 1e-30) | (norm < 1e-30)] = np.nan
            payload.setdefault("spectrum", {})[key] = np.minimum(fidelity, 1.0)

        if "walk" in spec.tasks:
            if eps <= 0.0:
                payload["warnings"].append(
                    {
                        "epsilon": eps,
                        "realization": r,
                        "warnings": ["walk task skipped: tunneling horizon diverges at epsilon = 0"],
                    }
                )
            else:
                horizon = walk_horizon_periods(params)
                record = walk_populations(U, Configuration(index=2**n - 1, n=n), horizon)
                payload.setdefault("walk", {})[key] = (
                    pr_distribution(params, disorder),
                    record.populations,
                )
    return payload


def run_ensemble(spec: EnsembleSpec, out_dir: str | Path = ".") -> RunManifest:
    """Execute the sweep and write pooled outputs plus manifest.json.

    Realizations run serially by default; DTCNET_THREADS > 1 maps them
    onto a thread pool. Either way results are reduced in realization
    order, so aggregates do not depend on scheduling.
    """
    if spec.params.n > MAX_SITES:
        raise ValueError(f"n = {spec.params.n} exceeds the dense-matrix limit {MAX_SITES}")
    t_start = time.perf_counter()
    stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")
    run_dir = Path(out_dir) / f"run-{stamp}-seed{spec.seed}"
    run_dir.mkdir(parents=True, exist_ok=False)

    workers = _worker_count()
    indices = range(spec.realizations)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            payloads = list(pool.map(lambda r: _realization_payload(spec, r), indices))
    else:
        payloads = [_realization_payload(spec, r) for r in indices]

    artifacts: dict[str, list[str]] = {}
    notes: list[str] = []
    warnings = [w for p in payloads for w in p["warnings"]]
    timings = {"map_s": round(time.perf_counter() - t_start, 3)}

    def record(task: str, path: Path) -> None:
        artifacts.setdefault(task, []).append(str(path))

    for eps in spec.epsilons:
        key = _eps_tag(eps)

        if "graph" in spec.tasks:
            for tag, pick in (("T", 0), ("2T", 1)):
                graphs = [p["graph"][key][pick] for p in payloads]
                degrees = np.concatenate([g.degrees for g in graphs])
                _write_fit_outputs(run_dir, f"{tag}-eps{key}", eps, spec.params.n, degrees, record, notes)
                table = avg_degree_by_domain_walls(graphs)
                path = run_dir / f"walls-{tag}-eps{key}.csv"
                _write_csv(
                    path,
                    "epsilon,walls,mean_degree,std_degree,realizations",
                    (
                        (_format_float(eps), w, _format_float(m), _format_float(s), len(graphs))
                        for w, (m, s) in table.items()
                    ),
                )
                record("graph", path)

        if "levelstats" in spec.tasks:
            ratios = np.concatenate([p["levelstats"][key][0] for p in payloads])
            excluded = sum(p["levelstats"][key][1] for p in payloads)
            if excluded:
                notes.append(f"levelstats eps={eps:g}: {excluded} degenerate gaps excluded")
            edges = np.linspace(0.0, 1.0, GAP_HISTOGRAM_BINS + 1)
            counts, _ = np.histogram(ratios, bins=edges)
            width = edges[1] - edges[0]
            density = counts / (max(ratios.size, 1) * width)
            mids = 0.5 * (edges[:-1] + edges[1:])
            path = run_dir / f"gap-ratios-eps{key}.csv"
            _write_csv(
                path,
                "r_lo,r_hi,density,reference_poisson,reference_coe",
                (
                    (
                        _format_float(lo),
                        _format_float(hi),
                        _format_float(d),
                        _format_float(reference_pdf("poisson", m)),
                        _format_float(reference_pdf("coe", m)),
                    )
                    for lo, hi, d, m in zip(edges[:-1], edges[1:], density, mids)
                ),
            )
            record("levelstats", path)

        if "spectrum" in spec.tasks:
            stack = np.vstack([p["spectrum"][key] for p in payloads])
            all_nan = np.all(np.isnan(stack), axis=0)
            with np.errstate(invalid="ignore"):
                mean_fid = np.where(all_nan, np.nan, np.nanmean(stack, axis=0))
            path = run_dir / f"fidelity-eps{key}.csv"
            _write_csv(
                path,
                "config,epsilon,fidelity",
                (
                    (i, _format_float(eps), "nan" if np.isnan(f) else _format_float(f))
                    for i, f in enumerate(mean_fid)
                ),
            )
            record("spectrum", path)

        if "walk" in spec.tasks and eps > 0.0:
            for r, p in enumerate(payloads):
                prs, populations = p["walk"][key]
                path = run_dir / f"pr-eps{key}-r{r}.csv"
                _write_csv(
                    path, "config,pr", ((i, _format_float(v)) for i, v in enumerate(prs))
                )
                record("walk", path)
                path = run_dir / f"walk-eps{key}-r{r}.csv"
                _write_csv(
                    path,
                    "period,config,population",
                    (
                        (m, i, _format_float(populations[m, i]))
                        for m in range(populations.shape[0])
                        for i in range(populations.shape[1])
                    ),
                )
                record("walk", path)

    if "classical" in spec.tasks:
        path = run_dir / "classical.csv"
        _write_csv(
            path,
            "configuration,energy,min_eigenvalue,max_eigenvalue,classification",
            _classical_rows(spec.params),
        )
        record("classical", path)

    timings["total_s"] = round(time.perf_counter() - t_start, 3)
    manifest = RunManifest(
        spec=spec.to_json(),
        per_realization_seeds=[
            {"realization": r, "seed_sequence": [spec.seed, r]} for r in indices
        ],
        artifacts=artifacts,
        branch_margin_warnings=warnings,
        version=__version__,
        timings=timings,
        run_dir=str(run_dir),
        notes=notes,
    )
    with open(run_dir / "manifest.json", "w") as fh:
        json.dump(manifest.to_json(), fh, indent=2)
    return manifest


def _write_fit_outputs(run_dir: Path, tag: str, eps: float, n: int, degrees, record, notes) -> None:
    """Degree histogram plus power-law fit row for one pooled sample."""
    try:
        hist = log_binned_histogram(degrees)
    except ValueError as exc:
        notes.append(f"degree-histogram skipped ({tag}): {exc}")
        hist = None
    if hist is not None:
        path = run_dir / f"degree-hist-{tag}.csv"
        _write_csv(
            path,
            "bin_lo,bin_hi,density",
            (
                (_format_float(lo), _format_float(hi), _format_float(d))
                for lo, hi, d in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.densities)
            ),
        )
        record("graph", path)
    try:
        fit = kmin_scan(degrees)
        verdict = lognormal_lr_test(degrees, fit)
        path = run_dir / f"degree-fit-{tag}.csv"
        _write_csv(
            path,
            "epsilon,n,beta,k_min,ks,n_tail,favored",
            [
                (
                    _format_float(eps),
                    n,
                    _format_float(fit.beta),
                    fit.k_min,
                    _format_float(fit.ks),
                    fit.n_tail,
                    verdict.favored,
                )
            ],
        )
        record("graph", path)
    except ValueError as exc:
        notes.append(f"degree-fit skipped ({tag}): {exc}")


def _classical_rows(params: SpinChainParams):
    n = params.n
    for index in range(2**n):
        bits = format(index, f"0{n}b")
        thetas = np.array([0.0 if b == "1" else pi for b in bits])
        config = ClassicalConfiguration(thetas=thetas)
        report = classify_fixed_point(jacobian(config, params))
        yield (
            bits,
            _format_float(classical_energy(config, params)),
            _format_float(float(report.eigenvalues.min())),
            _format_float(float(report.eigenvalues.max())),
            report.classification,
        )
