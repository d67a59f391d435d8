"""Command line entry point: ``artifact describe <config>`` and ``artifact run <config>``.

Configurations are YAML mappings.  Every key is validated before any compute;
replicas run in a process pool and derive their seeds from the master seed, so
outputs do not depend on the number of workers.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .errors import ArtifactError, ValidationError

PIPELINES = ("product", "coefficients", "sde", "strip-spectrum", "sde-spectrum", "goe-compare",
             "flag", "band-edge")
MODEL_KINDS = ("scalar", "block", "strip", "goe", "band-edge", "flag")
GROUP = 64  # replicas per product task; fixed so outputs do not depend on workers

MODEL_KEYS = {
    "scalar": {"kind", "phase", "noise", "noise_scale", "distribution", "W", "clip_bound"},
    "block": {"kind", "Gamma0", "U", "U_phases", "Gamma2", "noise", "noise_scale", "distribution", "W",
              "clip_bound"},
    "strip": {"kind", "d", "r", "A", "E", "potential", "variance"},
    "goe": {"kind", "d", "r", "E", "potential"},
    "band-edge": {"kind", "d"},
    "flag": {"kind", "values", "noise", "noise_scale", "distribution", "W"},
}
TOP_KEYS = {"pipeline", "model", "lambda", "n", "t_final", "dt", "eps_grid", "eps", "sigma", "replicas",
            "seed", "output_dir", "workers", "retain", "window", "mesh_size", "samples", "N", "method",
            "X0", "F0", "Z_star", "theta"}


# ---------------------------------------------------------------------------
# seeds


def splitmix64(x):
    """One round of the splitmix64 finalizer on a 64-bit integer."""
    mask = (1 << 64) - 1
    x = (x + 0x9E3779B97F4A7C15) & mask
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & mask
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & mask
    return x ^ (x >> 31)


def replica_seed(seed, replica):
    return splitmix64((int(seed) ^ int(replica)) & ((1 << 64) - 1))


# ---------------------------------------------------------------------------
# config


@dataclass
class ExperimentConfig:
    pipeline: str
    model: dict
    seed: int = 0
    replicas: int = 1
    workers: int = 1
    output_dir: str = "out"
    lam: Optional[float] = None
    n: Optional[int] = None
    t_final: float = 1.0
    dt: float = 1e-3
    eps_grid: Optional[dict] = None
    eps: float = 0.0
    sigma: Optional[float] = None
    retain: int = 2
    window: float = 20.0
    mesh_size: int = 1000
    samples: int = 10_000
    N: int = 100_000
    method: str = "auto"
    X0: Optional[list] = None
    F0: Optional[list] = None
    Z_star: str = "identity"
    theta: float = 0.0
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_mapping(cls, data):
        if not isinstance(data, dict):
            raise ValidationError("config must be a mapping")
        for key in data:
            if key not in TOP_KEYS:
                raise ValidationError(f"unknown key {key!r}")
        if "pipeline" not in data:
            raise ValidationError("missing key 'pipeline'")
        if data["pipeline"] not in PIPELINES:
            raise ValidationError(f"pipeline must be one of {', '.join(PIPELINES)}")
        model = data.get("model")
        if not isinstance(model, dict) or "kind" not in model:
            raise ValidationError("model must be a mapping with a 'kind'")
        if model["kind"] not in MODEL_KINDS:
            raise ValidationError(f"model kind must be one of {', '.join(MODEL_KINDS)}")
        for key in model:
            if key not in MODEL_KEYS[model["kind"]]:
                raise ValidationError(f"unknown model key {key!r} for kind {model['kind']!r}")
        kw = {k: v for k, v in data.items() if k not in ("lambda",)}
        if "lambda" in data:
            kw["lam"] = data["lambda"]
        cfg = cls(**kw, raw=dict(data))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        except yaml.YAMLError as exc:
            raise ValidationError(f"malformed config: {exc}") from None
        return cls.from_mapping(data)

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ValidationError(msg)

        def positive_int(name, value):
            need(isinstance(value, int) and not isinstance(value, bool) and value > 0,
                 f"{name} must be a positive integer")

        def number(name, value, positive=False):
            need(isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value),
                 f"{name} must be a finite number")
            if positive:
                need(value > 0, f"{name} must be positive")

        need(isinstance(self.seed, int) and 0 <= self.seed < 2**64, "seed must be a 64-bit nonnegative integer")
        positive_int("replicas", self.replicas)
        positive_int("workers", self.workers)
        need(isinstance(self.output_dir, str) and self.output_dir, "output_dir must be a path")
        if self.lam is not None:
            number("lambda", self.lam)
            need(self.lam >= 0, "lambda must be nonnegative")
        if self.n is not None:
            positive_int("n", self.n)
        number("t_final", self.t_final, True)
        number("dt", self.dt, True)
        need(abs(round(self.t_final / self.dt) * self.dt - self.t_final) < 1e-9, "t_final must be a multiple of dt")
        number("eps", self.eps)
        if self.sigma is not None:
            number("sigma", self.sigma)
            need(self.sigma >= 0, "sigma must be nonnegative")
        positive_int("retain", self.retain)
        number("window", self.window, True)
        positive_int("mesh_size", self.mesh_size)
        positive_int("samples", self.samples)
        positive_int("N", self.N)
        need(self.method in ("auto", "ergodic", "chi"), "method must be auto, ergodic or chi")
        need(self.Z_star in ("identity", "auto"), "Z_star must be 'identity' or 'auto'")
        number("theta", self.theta)
        if self.eps_grid is not None:
            need(isinstance(self.eps_grid, dict) and set(self.eps_grid) <= {"lo", "hi", "points"}
                 and {"lo", "hi"} <= set(self.eps_grid), "eps_grid needs lo, hi and optional points")
            number("eps_grid.lo", self.eps_grid["lo"])
            number("eps_grid.hi", self.eps_grid["hi"])
            need(self.eps_grid["hi"] > self.eps_grid["lo"], "eps_grid.hi must exceed eps_grid.lo")
            positive_int("eps_grid.points", self.eps_grid.get("points", 2048))
        p = self.pipeline
        needs_n = {"product", "strip-spectrum", "goe-compare", "flag"}
        if p in needs_n:
            need(self.n is not None, f"pipeline {p} needs n")
        if p in ("product", "flag"):
            need(self.lam is not None, f"pipeline {p} needs lambda")
        if p in ("strip-spectrum",):
            need(self.lam is not None or self.sigma is not None, "strip-spectrum needs lambda or sigma")
        if p in ("goe-compare", "sde-spectrum"):
            need(self.sigma is not None, f"pipeline {p} needs sigma")
        kinds = {
            "product": ("scalar", "block"), "coefficients": ("scalar", "block"),
            "sde": ("scalar", "block", "strip", "goe"), "strip-spectrum": ("strip", "goe"),
            "sde-spectrum": ("strip", "goe"), "goe-compare": ("goe",), "flag": ("flag",),
            "band-edge": ("band-edge",),
        }
        need(self.model["kind"] in kinds[p], f"pipeline {p} needs a model of kind {' or '.join(kinds[p])}")
        if p == "sde-spectrum" and self.Z_star == "auto":
            need(self.n is not None, "Z_star: auto needs n")
        # building the model surfaces model-level validation errors early
        build_model(self.model)

    def echo(self):
        return dict(self.raw)

    def grid(self):
        g = self.eps_grid or {"lo": -self.window, "hi": self.window, "points": 2048}
        return np.linspace(g["lo"], g["hi"], int(g.get("points", 2048)))

    def strip_lambda(self):
        if self.lam is not None:
            return float(self.lam)
        return float(self.sigma) / math.sqrt(self.n)


# ---------------------------------------------------------------------------
# models from config


def _matrix(value, name, diag_ok=True):
    a = np.asarray(value, dtype=float)
    if a.ndim == 1 and diag_ok:
        return np.diag(a)
    if a.ndim == 0:
        return a.reshape(1, 1)
    if a.ndim != 2:
        raise ValidationError(f"{name} must be a matrix or a diagonal list")
    return a


def build_model(m):
    """Model objects for a validated model mapping."""
    from .models import BlockSpectrum, NoiseModel, StripModel, build_band_edge, build_goe_channel
    from .product import FlagSpectrum

    kind = m["kind"]
    try:
        if kind in ("scalar", "block", "flag"):
            if kind == "scalar":
                spec = BlockSpectrum(np.zeros((0, 0)), np.array([[np.exp(1j * float(m.get("phase", 0.0)))]]),
                                     np.zeros((0, 0)))
            elif kind == "block":
                if "U" in m and "U_phases" in m:
                    raise ValidationError("give either U or U_phases")
                U = (np.diag(np.exp(1j * np.asarray(m["U_phases"], dtype=float))) if "U_phases" in m
                     else _matrix(m.get("U", np.zeros((0, 0))), "U", diag_ok=False))
                spec = BlockSpectrum(_matrix(m.get("Gamma0", []), "Gamma0"), U,
                                     _matrix(m.get("Gamma2", []), "Gamma2"))
            else:
                values = np.asarray(m["values"], dtype=float)
                spec = FlagSpectrum.diagonal(values)
            d = spec.dim
            W = np.asarray(m["W"], dtype=float) if "W" in m else None
            kw = {"distribution": m.get("distribution", "gaussian")}
            if kind != "flag":
                kw["clip_bound"] = m.get("clip_bound")
            kind_noise = m.get("noise", "real")
            if kind_noise not in ("real", "complex"):
                raise ValidationError("noise must be 'real' or 'complex'")
            make = NoiseModel.real_gaussian if kind_noise == "real" else NoiseModel.complex_gaussian
            noise = make(d, scale=float(m.get("noise_scale", 1.0)), W=W, **kw)
            return {"spectrum": spec, "noise": noise}
        if kind == "strip":
            if "A" in m and "r" in m:
                raise ValidationError("give either A or r")
            if "A" in m:
                strip = StripModel(np.asarray(m["A"], dtype=float), E=float(m.get("E", 0.0)),
                                   potential=m.get("potential", "gaussian"),
                                   variance=float(m.get("variance", 1.0)))
            else:
                if "d" not in m:
                    raise ValidationError("strip model needs d (or A)")
                strip = StripModel.zd(int(m["d"]), r=float(m.get("r", 1.0)), E=float(m.get("E", 0.0)),
                                      potential=m.get("potential", "gaussian"))
                if "variance" in m:
                    strip = StripModel(strip.A, strip.E, strip.potential, float(m["variance"]), strip.r, strip.eig)
            return {"strip": strip}
        if kind == "goe":
            ch = build_goe_channel(int(m["d"]), float(m.get("E", 0.0)), float(m.get("r", 1.0)),
                                   m.get("potential", "gaussian"))
            return {"strip": ch.strip, "channel": ch}
        if kind == "band-edge":
            d = m.get("d")
            if not isinstance(d, int) or d < 1:
                raise ValidationError("band-edge model needs a positive integer d")
            return {"band_edge": build_band_edge(d)}
    except KeyError as exc:
        raise ValidationError(f"model is missing {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from None
    raise ValidationError(f"unknown model kind {kind!r}")


def _channel(objs):
    from .models import decompose_channels

    if "channel" in objs:
        return objs["channel"]
    return decompose_channels(objs["strip"])


# ---------------------------------------------------------------------------
# describe


def describe(cfg):
    """Text report of the resolved model without running simulations."""
    from .errors import NoEllipticChannel, ParabolicChannel
    from .models import decompose_channels

    m = cfg.model
    lines = [f"pipeline: {cfg.pipeline}", f"model: {m['kind']}"]
    objs = build_model(m)
    if "spectrum" in objs and m["kind"] != "flag":
        sp = objs["spectrum"]
        from .models import spectral_radius
        lines.append(f"blocks: d0={sp.d0} d1={sp.d1} d2={sp.d2}")
        lines.append(f"spectral radius Gamma0: {spectral_radius(sp.Gamma0) if sp.d0 else 0.0:.6g}")
        lines.append(f"spectral radius Gamma2: {spectral_radius(sp.Gamma2) if sp.d2 else 0.0:.6g}")
        lines.append(f"gamma: {sp.gamma:.6g}")
    elif m["kind"] == "flag":
        sp = objs["spectrum"]
        lines.append("magnitudes: " + ", ".join(f"{c:.6g}" for c in sp.c))
    elif "strip" in objs:
        strip = objs["strip"]
        try:
            ch = decompose_channels(strip)
        except ParabolicChannel as exc:
            lines.append(f"parabolic: {exc}")
            return "\n".join(lines)
        except NoEllipticChannel as exc:
            lines.append(f"no elliptic channel: {exc}")
            return "\n".join(lines)
        lines.append(f"E: {ch.E:.6g}  d_h={ch.d_h}  d_e={ch.d_e}")
        lines.append("channel  a_j        type        gamma_j / z_j")
        for j in range(ch.d):
            a = ch.a[j]
            if j < ch.d_h:
                lines.append(f"{ch.order[j] + 1:>7}  {a:+.6f}  hyperbolic  {ch.gamma_list[j]:+.6f}")
            else:
                z = ch.z_list[j - ch.d_h]
                lines.append(f"{ch.order[j] + 1:>7}  {a:+.6f}  elliptic    {z.real:+.6f}{z.imag:+.6f}i")
        q = ch.q
        lines.append(f"q: {q:.12g}" if q is not None else "q: not a multiple of the identity")
        if m["kind"] == "goe":
            from .models import goe_q
            lines.append(f"q (sine-basis closed form): {goe_q(ch):.12g}")
        verdict = "chaotic" if ch.chaotic else f"not chaotic, witness {ch.chaos_witness}"
        lines.append(f"phases: {verdict}")
    elif "band_edge" in objs:
        be = objs["band_edge"]
        lines.append(f"d: {be.d}  alpha: {be.alpha}  (Jordan-block value {be.alpha_jordan})")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# replica work


def _flat(M):
    a = np.asarray(M).ravel()
    return [v for c in a for v in (float(c.real), float(c.imag))]


def _run_product(cfg, objs, replicas, seeds):
    from .product import run_product

    sp, noise = objs["spectrum"], objs["noise"]
    X0 = None if cfg.X0 is None else np.asarray(cfg.X0, dtype=complex)
    traj = run_product(sp, noise, cfg.lam, cfg.n, X0, seeds, retain=cfg.retain)
    out = []
    for i, r in enumerate(replicas):
        X = traj.final_X[i]
        row = [r, seeds[i]] + _flat(X)
        if X.size == 1:
            x = complex(X.ravel()[0])
            row += [math.log(abs(x)) if x != 0 else -math.inf, math.atan2(x.imag, x.real)]
        out.append({"final": [row]})
    return out


def _replica_work(cfg, objs, replica, seed):
    """Outputs of one replica as ``{file: rows}``."""
    p = cfg.pipeline
    rng = np.random.default_rng(seed)
    if p == "sde":
        from .sdelimit import anderson_sde, compute_coefficients, euler_maruyama
        if "spectrum" in objs:
            co = compute_coefficients(objs["spectrum"], objs["noise"], cfg.N, cfg.method)
            path = euler_maruyama(co, cfg.t_final, cfg.dt, rng, 1, retain=cfg.retain)
        else:
            ch = _channel(objs)
            sigma = 1.0 if cfg.sigma is None else cfg.sigma
            path = anderson_sde(ch, cfg.eps, sigma, cfg.t_final, cfg.dt, rng, retain=cfg.retain)
        return {"final": [[replica, seed] + _flat(path.values[-1, 0])]}
    if p == "strip-spectrum":
        from .spectra import strip_eigenvalues
        pp = strip_eigenvalues(objs["strip"], cfg.strip_lambda(), cfg.n, cfg.window, seed)
        return {"points": [row for row in pp.to_rows()[1]]}
    if p == "goe-compare":
        from .spectra import strip_eigenvalues
        pp = strip_eigenvalues(objs["strip"], cfg.strip_lambda(), cfg.n, cfg.window, seed)
        return {"points": [row for row in pp.to_rows()[1]]}
    if p == "sde-spectrum":
        from .spectra import sde_eigenvalue_process
        ch = _channel(objs)
        Zs = np.eye(ch.d_e) if cfg.Z_star == "identity" else np.diag(ch.z_list ** (cfg.n + 1))
        pp = sde_eigenvalue_process(ch, cfg.sigma, Zs, cfg.grid(), cfg.dt, rng)
        pp.seed = seed
        return {"points": [row for row in pp.to_rows()[1]]}
    if p == "flag":
        from .product import flag_angles, propagate_flag
        sp, noise = objs["spectrum"], objs["noise"]
        d = sp.dim
        F0 = np.triu(np.ones((d, d))) if cfg.F0 is None else np.asarray(cfg.F0, dtype=complex)
        st = propagate_flag(sp, noise, cfg.lam, F0, cfg.n, seed)
        return {"angles": [[replica, seed] + [float(a) for a in flag_angles(st.F)]]}
    if p == "band-edge":
        from .sdelimit import band_edge_sde
        path = band_edge_sde(objs["band_edge"], cfg.eps, cfg.t_final, cfg.dt, rng, theta=cfg.theta,
                             retain=cfg.retain)
        return {"final": [[replica, seed] + _flat(path.values[-1, 0])]}
    raise ValidationError(f"pipeline {p} has no replica stage")


def _task(raw, replicas, seeds):
    """Worker entry: returns ``[(replica, outputs or None, error or None)]``."""
    cfg = ExperimentConfig.from_mapping(raw)
    objs = build_model(cfg.model)
    if cfg.pipeline == "product":
        try:
            res = _run_product(cfg, objs, replicas, seeds)
            return [(r, o, None) for r, o in zip(replicas, res)]
        except ArtifactError:
            if len(replicas) > 1:
                out = []
                for r, s in zip(replicas, seeds):
                    out.extend(_task(raw, [r], [s]))
                return out
            raise
    out = []
    for r, s in zip(replicas, seeds):
        try:
            out.append((r, _replica_work(cfg, objs, r, s), None))
        except (ArtifactError, np.linalg.LinAlgError, FloatingPointError) as exc:
            out.append((r, None, f"{type(exc).__name__}: {exc}"))
    return out


def _safe_task(raw, replicas, seeds):
    try:
        return _task(raw, replicas, seeds)
    except (ArtifactError, np.linalg.LinAlgError) as exc:
        return [(r, None, f"{type(exc).__name__}: {exc}") for r in replicas]


# ---------------------------------------------------------------------------
# output


HEADERS = {
    "points": ["point", "window_lo", "window_hi", "normalization", "seed"],
}


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _header(name, cfg, width):
    if name in HEADERS:
        return HEADERS[name]
    if name == "angles":
        return ["replica", "seed"] + [f"angle_{p}" for p in range(1, width - 1)]
    k = width - 2
    extra = []
    if cfg.pipeline == "product" and k == 4:
        extra = ["log_abs", "arg"]
        k = 2
    return ["replica", "seed"] + [f"x{i}_{part}" for i in range(k // 2) for part in ("re", "im")] + extra


def _summary(cfg, files, objs):
    lines = [f"pipeline: {cfg.pipeline}", f"version: {__version__}"]
    if cfg.pipeline == "product":
        rows = files.get("final", [])
        if rows and len(rows[0]) == 6:
            logs = np.array([r[4] for r in rows])
            lines += [f"log_abs_mean: {logs.mean():.10g}",
                      f"log_abs_var: {logs.var(ddof=1) if len(logs) > 1 else 0.0:.10g}",
                      f"samples: {len(logs)}"]
    if cfg.pipeline in ("strip-spectrum", "sde-spectrum", "goe-compare"):
        from .spectra import GapStatistics, pooled_gaps
        by_seed = {}
        for row in files.get("points", []):
            by_seed.setdefault(row[4], []).append(row[0])
        samples = [np.array(v) for _, v in sorted(by_seed.items()) if len(v) >= 2]
        lines.append(f"points: {sum(len(s) for s in by_seed.values())}")
        if samples:
            try:
                gaps = pooled_gaps(samples, 0.5)
            except ArtifactError:
                gaps = None
            if gaps is not None:
                ref = None
                if cfg.pipeline == "goe-compare":
                    from .spectra import goe_reference_gaps
                    ch = objs["channel"]
                    ref = goe_reference_gaps(ch.d_e, ch.d, cfg.samples, replica_seed(cfg.seed, 2**32))
                    files["gaps_reference"] = [[float(g)] for g in ref]
                files["gaps_strip" if cfg.pipeline == "goe-compare" else "gaps"] = [[float(g)] for g in gaps]
                st = GapStatistics.from_gaps(gaps, ref)
                lines.append(st.summary())
    if cfg.pipeline == "flag":
        rows = files.get("angles", [])
        if rows:
            a = np.array([r[2:] for r in rows])
            lines.append("max_angle: " + ", ".join(f"{x:.6g}" for x in a.max(axis=0)))
    return "\n".join(lines) + "\n"


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def verify_manifest(out_dir):
    """True when every checksum in the manifest matches the file on disk."""
    out_dir = Path(out_dir)
    man = json.loads((out_dir / "manifest.json").read_text())
    return all(_sha256(out_dir / name) == digest for name, digest in man["checksums"].items())


def run(cfg, out_dir=None):
    """Execute the configured pipeline; returns the manifest dict."""
    out = Path(out_dir or cfg.output_dir)
    start = time.time()
    objs = build_model(cfg.model)
    seeds = [replica_seed(cfg.seed, r) for r in range(cfg.replicas)]
    files = {}
    failed = {}
    texts = {}

    if cfg.pipeline == "coefficients":
        from .sdelimit import compute_coefficients
        co = compute_coefficients(objs["spectrum"], objs["noise"], cfg.N, cfg.method)
        texts["coefficients.json"] = json.dumps(co.to_dict(), indent=1, sort_keys=True) + "\n"
        texts["summary.txt"] = (f"pipeline: coefficients\nversion: {__version__}\n"
                                f"d1: {co.d1}\nhaar: {json.dumps(co.haar_meta, sort_keys=True)}\n")
    else:
        size = GROUP if cfg.pipeline == "product" else 1
        tasks = [(list(range(i, min(i + size, cfg.replicas))), seeds[i:i + size])
                 for i in range(0, cfg.replicas, size)]
        results = []
        if cfg.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futs = [pool.submit(_safe_task, cfg.raw, r, s) for r, s in tasks]
                for f in futs:
                    results.extend(f.result())
        else:
            for r, s in tasks:
                results.extend(_safe_task(cfg.raw, r, s))
        for r, outputs, err in sorted(results, key=lambda t: t[0]):
            if err is not None:
                failed[r] = err
                continue
            for name, rows in outputs.items():
                files.setdefault(name, []).extend(rows)
        texts["summary.txt"] = _summary(cfg, files, objs)
        for name, rows in files.items():
            width = len(rows[0]) if rows else 0
            header = ["gap"] if name.startswith("gaps") else _header(name, cfg, width)
            texts[f"{name}.csv"] = _csv_text(header, rows)

    out.mkdir(parents=True, exist_ok=True)
    for name, text in texts.items():
        (out / name).write_text(text)
    manifest = {
        "config": cfg.echo(),
        "version": __version__,
        "wall_clock_s": round(time.time() - start, 3),
        "seeds": {str(r): s for r, s in enumerate(seeds)},
        "failed_replicas": {str(k): v for k, v in sorted(failed.items())},
        "checksums": {name: _sha256(out / name) for name in sorted(texts)},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# entry point


def _parser():
    p = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("describe", "run"):
        s = sub.add_parser(name)
        s.add_argument("config")
        s.add_argument("--seed", type=int)
        s.add_argument("--workers", type=int)
        s.add_argument("--out")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        raw = None
        try:
            with open(args.config) as fh:
                raw = yaml.safe_load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        except yaml.YAMLError as exc:
            raise ValidationError(f"malformed config: {exc}") from None
        if isinstance(raw, dict):
            if args.seed is not None:
                raw["seed"] = args.seed
            if args.workers is not None:
                raw["workers"] = args.workers
            if args.out is not None:
                raw["output_dir"] = args.out
        cfg = ExperimentConfig.from_mapping(raw)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "describe":
        try:
            print(describe(cfg))
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0
    try:
        manifest = run(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    n_failed = len(manifest["failed_replicas"])
    print(f"wrote {len(manifest['checksums'])} files to {cfg.output_dir}"
          + (f"; {n_failed} replicas failed" if n_failed else ""))
    return 3 if n_failed else 0


if __name__ == "__main__":
    sys.exit(main())
