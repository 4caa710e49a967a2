"""Orchestration behind the command line: engines, data files and manifest."""

from __future__ import annotations

import json
import logging
import platform
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import io as tio
from .config import RunConfig
from .observables import (SpectrumGrid, compare_peaks, find_peaks, longitudinal_distribution,
                          spectrum_from_projection, summary_stats)
from .sfa import sfa_momentum_map, sfa_spectrum
from .tdse import (ConvergenceError, PropagationError, RadialGrid, bound_projector, bound_states,
                   ground_state, negative_energy_states, propagate_pulse, remove_bound_states,
                   total_ionization)
from .tdse.continuum import LConvergenceError, momentum_map_from_projection, project_momentum

logger = logging.getLogger(__name__)


class EngineFailure(RuntimeError):
    """An engine stopped with an error; partial outputs may exist."""


class ConvergenceFailure(RuntimeError):
    """A convergence check failed (relaxation or partial-wave sum)."""


def _label(p) -> str:
    return "c" + f"{p.cycles:.6g}".replace(".", "p")


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n0 = int(round(lo / step))
    n1 = int(round(hi / step))
    return np.round(step * np.arange(n0, n1 + 1), 12)


def _thread_limit(threads):
    if threads is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(threads))


def _versions() -> dict:
    return {
        "timeslit": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


class _Run:
    def __init__(self, config: RunConfig, out: Path):
        self.cfg = config
        self.out = out
        self.files: list[str] = []
        self.results: dict = {}
        self.warnings: list[str] = []
        self._tdse_setup = None

    def _write(self, writer, name, obj, *args):
        path = writer(self.out / name, obj, *args)
        self.files.append(path.name)
        return path

    def _map_axes(self):
        m = self.cfg.map
        return _axis(m["kz_min"], m["kz_max"], m["dk"]), _axis(0.0, m["krho_max"], m["dk"])

    def _emit(self, tag, spectrum: SpectrumGrid, mmap, result: dict):
        a = self.cfg.analysis
        dpdkz = longitudinal_distribution(mmap)
        peaks_e = find_peaks(spectrum, a["min_prominence"])
        peaks_kz = find_peaks(dpdkz, a["min_prominence"])
        self._write(tio.write_spectrum_csv, f"{tag}_spectrum.csv", spectrum)
        self._write(tio.write_spectrum_csv, f"{tag}_dpdkz.csv", dpdkz, ("kz", "dP_dkz"))
        self._write(tio.write_map, f"{tag}_map.txt", mmap)
        if self.cfg.map["binary"]:
            self._write(tio.write_map_binary, f"{tag}_map.npz", mmap)
        self._write(tio.write_peaks_csv, f"{tag}_spectrum_peaks.csv", peaks_e, {"quantity": "dP/dE"})
        self._write(tio.write_peaks_csv, f"{tag}_dpdkz_peaks.csv", peaks_kz, {"quantity": "dP/dkz"})
        stats = summary_stats(mmap)
        result.update(
            spectrum_total=spectrum.total(),
            dpdkz_total=dpdkz.total(),
            n_spectrum_peaks=len(peaks_e),
            n_dpdkz_peaks=len(peaks_kz),
            **{f"map_{k}": v for k, v in stats.as_dict().items()},
        )
        return spectrum, dpdkz, peaks_e, peaks_kz

    def sfa(self, p):
        s = self.cfg.sfa
        tag = f"sfa_{_label(p)}"
        t0 = time.perf_counter()
        e_grid = _axis(s["e_step"], s["e_max"], s["e_step"])
        spectrum = sfa_spectrum(p, s["ip"], e_grid, s["n_angles"])
        kz, krho = self._map_axes()
        mmap = sfa_momentum_map(p, s["ip"], kz, krho)
        result = {"engine": "sfa", "pulse": p.as_dict()}
        out = self._emit(tag, spectrum, mmap, result)
        result["wall_time"] = time.perf_counter() - t0
        self.results[tag] = result
        return out

    def _setup_tdse(self):
        if self._tdse_setup is None:
            t = self.cfg.tdse
            grid = RadialGrid.default(r_max=t["r_max"], order=t["order"], h_max=t["h_max"])
            try:
                state0, e0 = ground_state(grid, l_max=t["l_max"])
            except ConvergenceError as exc:
                raise ConvergenceFailure(f"ground state: {exc} (residual {exc.residual:.2e})") from exc
            spectrum = bound_states(grid, t["n_bound"], min(t["l_max"], t["n_bound"] - 1))
            # ionization counts everything outside the box's negative-energy states
            every = negative_energy_states(grid, t["l_max"])
            self._tdse_setup = (grid, state0, e0, spectrum, every)
        return self._tdse_setup

    def tdse(self, p):
        t = self.cfg.tdse
        tag = f"tdse_{_label(p)}"
        t0 = time.perf_counter()
        grid, state0, e0, bspec, every = self._setup_tdse()
        projector = bound_projector(bspec, keep_ground=True) if t["remove_bound"] else None
        try:
            final, diag = propagate_pulse(state0, p, t["dt"], t["post_time"], projector=projector)
        except PropagationError as exc:
            raise EngineFailure(f"propagation: {exc}") from exc
        if t["remove_bound"]:
            final = remove_bound_states(final, t["n_bound"], keep_ground=True, spectrum=bspec)
        self.warnings.extend(f"{tag}: {w}" for w in diag.warnings)
        ionization = total_ionization(final, every)
        if t["checkpoint"]:
            final.save(self.out / f"{tag}_state.bin")
            self.files.append(f"{tag}_state.bin")
        k_grid = np.linspace(t["k_min"], t["k_max"], t["n_k"])
        try:
            proj = project_momentum(final, k_grid, check=t["strict_l_convergence"], l_tol=t["l_tol"])
        except LConvergenceError as exc:
            raise ConvergenceFailure(str(exc)) from exc
        ratio = proj.meta["l_convergence"]
        if ratio >= t["l_tol"]:
            self.warnings.append(f"{tag}: |a_Lmax|/max|a_l| = {ratio:.2e} exceeds l_tol = {t['l_tol']:g}")
        spectrum = spectrum_from_projection(proj)
        spectrum.meta = {"engine": "tdse", "quantity": "dP/dE", **p.as_dict()}
        kz, krho = self._map_axes()
        mmap = momentum_map_from_projection(proj, kz, krho)
        mmap.meta = {"engine": "tdse", "quantity": "d2P/dkz dkrho", **p.as_dict()}
        result = {
            "engine": "tdse",
            "pulse": p.as_dict(),
            "grid": grid.describe(),
            "ground_energy": e0,
            "bound_states": bspec.count(),
            "negative_energy_states": every.count(),
            "propagation": diag.as_dict(),
            "total_ionization": ionization,
            "l_convergence": ratio,
            "l_converged": bool(ratio < t["l_tol"]),
            "continuum_fit_residual": proj.meta["worst_fit_residual"],
        }
        out = self._emit(tag, spectrum, mmap, result)
        result["wall_time"] = time.perf_counter() - t0
        self.results[tag] = result
        return out

    def compare(self, p, sfa_out, tdse_out):
        a = self.cfg.analysis
        _, _, pe_s, pk_s = sfa_out
        _, _, pe_t, pk_t = tdse_out
        e_cmp = compare_peaks(pe_s.within(a["compare_e_min"], a["compare_e_max"]),
                              pe_t.within(a["compare_e_min"], a["compare_e_max"]), a["window"])
        k_cmp = compare_peaks(pk_s.within(a["compare_kz_min"], a["compare_kz_max"]),
                              pk_t.within(a["compare_kz_min"], a["compare_kz_max"]), a["window"])
        name = f"comparison_{_label(p)}.txt"
        text = comparison_text("sfa", "tdse", {"energy": e_cmp, "kz": k_cmp})
        (self.out / name).write_text(text)
        self.files.append(name)
        self.results[f"comparison_{_label(p)}"] = {"energy": _plain(e_cmp.as_dict()),
                                                   "kz": _plain(k_cmp.as_dict())}


def _plain(d: dict) -> dict:
    return {k: v for k, v in d.items() if k != "pairs"}


def comparison_text(a_name: str, b_name: str, blocks: dict) -> str:
    lines = [f"# peak comparison: shifts are {b_name} - {a_name}"]
    for title, cmp in blocks.items():
        lines.append(f"[{title}]")
        lines.append(cmp.to_text().rstrip("\n"))
    return "\n".join(lines) + "\n"


def run(config: RunConfig, out_dir, deterministic: bool = False, threads: int | None = None) -> dict:
    """Execute ``config`` and write data files plus ``manifest.json`` to ``out_dir``.

    Raises
    ------
    EngineFailure, ConvergenceFailure
        After the manifest has been written with ``status = failed``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if deterministic and threads is None:
        threads = 1
    job = _Run(config, out)
    manifest = {
        "name": config.name,
        "config": config.as_dict(),
        "versions": _versions(),
        "deterministic": deterministic,
        "threads": threads,
        "status": "running",
        "partial": False,
    }
    t0 = time.perf_counter()
    try:
        with _thread_limit(threads):
            for p in config.pulses:
                sfa_out = job.sfa(p) if config.wants_sfa else None
                tdse_out = job.tdse(p) if config.wants_tdse else None
                if sfa_out and tdse_out:
                    job.compare(p, sfa_out, tdse_out)
        manifest["status"] = "ok"
    except (EngineFailure, ConvergenceFailure) as exc:
        manifest.update(status="failed", partial=True, error=str(exc))
        raise
    except Exception as exc:
        manifest.update(status="failed", partial=True, error=f"{type(exc).__name__}: {exc}")
        raise EngineFailure(str(exc)) from exc
    finally:
        manifest.update(results=job.results, files=sorted(job.files), warnings=job.warnings,
                        wall_time=time.perf_counter() - t0)
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return manifest


def compare_files(a_path, b_path, window: float = 0.15, lo: float | None = None, hi: float | None = None,
                  min_prominence: float = 0.02) -> str:
    """Peak comparison report for two 1-D distribution files (``b - a`` shifts)."""
    missing = [str(p) for p in (a_path, b_path) if not Path(p).is_file()]
    if missing:
        raise FileNotFoundError("missing input file(s): " + ", ".join(missing))
    sa, sb = tio.read_spectrum_csv(a_path), tio.read_spectrum_csv(b_path)
    pa, pb = find_peaks(sa, min_prominence), find_peaks(sb, min_prominence)
    if lo is not None or hi is not None:
        lo = -np.inf if lo is None else lo
        hi = np.inf if hi is None else hi
        pa, pb = pa.within(lo, hi), pb.within(lo, hi)
    cmp = compare_peaks(pa, pb, window)
    return comparison_text(str(a_path), str(b_path), {"peaks": cmp})
