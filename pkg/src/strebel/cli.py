"""Command-line front end: ``analyze``, ``trace``, ``fingerprint`` and ``verify``.

Configuration is one JSON document::

    {"poles": [[1, 0], [-1, 0], [0, 0]], "weights": [1, -1, 1.4142135623730951],
     "levels": [0.05, 1, 9], "options": {"samples": 1024, "nodes": 512}}

Exit codes: 0 ok, 1 invariant failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .errors import ConfigError, NumericalError
from .fingerprint import (
    DEFAULT_SAMPLES,
    PASS_TOL,
    RING_VARIANTS,
    fingerprint_component,
    winding,
)
from .qd_core import QuadDifferential, critical_set, is_critical_graph_connected, make_differential
from .tracer import classify, critical_graph, find_components, marching_squares_oracle, winding_numbers

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
CRITICAL_MARGIN = 1e-6
_OPTION_KEYS = {"samples", "nodes", "rays_per_pole", "resolution"}


@dataclass
class Config:
    qd: QuadDifferential
    levels: list
    options: dict = field(default_factory=dict)


def _complex(entry) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry):
        return complex(entry[0], entry[1])
    raise ConfigError(f"pole {entry!r} is not a [re, im] pair")


def parse_config(doc: dict) -> Config:
    """Validate a decoded configuration document."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    try:
        poles = [_complex(p) for p in doc["poles"]]
        weights = [float(w) for w in doc["weights"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad poles/weights: {exc}") from None
    levels = doc.get("levels", [])
    if not isinstance(levels, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 and math.isfinite(x)
            for x in levels):
        raise ConfigError("levels must be a list of positive reals")
    options = doc.get("options", {}) or {}
    unknown = set(options) - _OPTION_KEYS
    if unknown:
        raise ConfigError(f"unknown options {sorted(unknown)}")
    try:
        qd = make_differential(poles, weights)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    return Config(qd, [float(x) for x in levels], dict(options))


def load_config(path: str) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    return parse_config(doc)


# -- deterministic output --------------------------------------------------------


def _plain(x):
    """Recursively convert to JSON-safe builtins; non-finite floats become null."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(x.real), _plain(x.imag)]
    return x


def dumps(report: dict) -> str:
    # float repr is the shortest round-trip form, at most 17 significant digits
    return json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x: float) -> str:
    return repr(float(x))


# -- shared pieces ---------------------------------------------------------------


def _check_levels(cfg: Config, levels, allow_critical: bool) -> None:
    values = critical_set(cfg.qd).values
    for lam in levels:
        for w in values:
            if abs(lam - w) <= CRITICAL_MARGIN * w and not allow_critical:
                print(f"warning: level {lam} is within {CRITICAL_MARGIN:g} of critical value {float(w)!r}",
                      file=sys.stderr)


def _critical_report(qd: QuadDifferential) -> list:
    return [{"zero": z, "multiplicity": m, "value": w} for z, m, w in critical_set(qd).distinct()]


def _components(cfg: Config, lam: float):
    return find_components(cfg.qd, lam, rays_per_pole=int(cfg.options.get("rays_per_pole", 8)))


def _parse_signature(text: str) -> tuple:
    try:
        return tuple(sorted(int(s) for s in text.replace("{", "").replace("}", "").split(",") if s.strip()))
    except ValueError:
        raise ConfigError(f"bad component signature {text!r}") from None


def _select(curves, signature: Optional[tuple], lam: float):
    if signature is None:
        return curves
    chosen = [c for c in curves if tuple(c.enclosed_poles) == signature]
    if not chosen:
        raise ConfigError(f"no component with signature {list(signature)} at level {lam}")
    return chosen


def _levels(cfg: Config, level: Optional[float]) -> list:
    if level is not None:
        if not level > 0:
            raise ConfigError("--level must be positive")
        return [level]
    if not cfg.levels:
        raise ConfigError("no levels: pass --level or list them in the config")
    return cfg.levels


# -- commands --------------------------------------------------------------------


def cmd_analyze(cfg: Config, args) -> tuple:
    t0 = time.perf_counter()
    qd = cfg.qd
    connected, witness = is_critical_graph_connected(qd)
    timings = {"critical": time.perf_counter() - t0}
    levels = []
    for lam in _levels(cfg, args.level):
        t = time.perf_counter()
        comps = _components(cfg, lam)
        levels.append({
            "level": lam,
            "count": len(comps),
            "components": [{"signature": list(c.enclosed_poles), "class": str(classify(c, qd)),
                            "length": c.length} for c in comps],
        })
        timings[f"level {_fmt(lam)}"] = time.perf_counter() - t
    report = {
        "poles": list(qd.poles), "weights": list(qd.weights), "total_weight": qd.alpha,
        "critical_set": _critical_report(qd),
        "connected": connected,
        "connectivity_witness": list(witness) if witness else None,
        "levels": levels,
    }
    return report, timings, EXIT_OK


def _svg(qd: QuadDifferential, curves, graph=None, size: int = 600) -> str:
    pts = [qd.poles]
    pts += [c.points for c in curves]
    if graph is not None:
        pts += [np.asarray(poly) for _, _, poly in graph.edges]
    allp = np.concatenate([np.atleast_1d(p) for p in pts])
    x0, x1 = allp.real.min(), allp.real.max()
    y0, y1 = allp.imag.min(), allp.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-12) * 1.1
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    scale = size / span

    def xy(z):
        return f"{(z.real - cx) * scale + size / 2:.4f},{size / 2 - (z.imag - cy) * scale:.4f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    if graph is not None:
        for k, (_, _, poly) in enumerate(graph.edges):
            d = " ".join(xy(z) for z in np.asarray(poly))
            out.append(f'<polyline class="critical" points="{d}" fill="none" stroke="#c03030" '
                       f'stroke-width="1.2"/>')
    for i, c in enumerate(curves):
        d = "M " + " L ".join(xy(z) for z in c.points) + " Z"
        label = escape(str(list(c.enclosed_poles)))
        out.append(f'<path class="lemniscate" data-signature="{label}" d="{d}" fill="none" '
                   f'stroke="#1f4e9c" stroke-width="1.5"/>')
    for a in qd.poles:
        x, y = (float(v) for v in xy(a).split(","))
        out.append(f'<path class="pole" d="M {x - 5:.4f},{y - 5:.4f} L {x + 5:.4f},{y + 5:.4f} '
                   f'M {x - 5:.4f},{y + 5:.4f} L {x + 5:.4f},{y - 5:.4f}" stroke="black" stroke-width="1.5"/>')
    for z in np.unique(critical_set(qd).zeros):
        x, y = xy(z).split(",")
        out.append(f'<circle class="zero" cx="{x}" cy="{y}" r="3.5" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_trace(cfg: Config, args) -> tuple:
    if args.level is None:
        raise ConfigError("trace needs --level")
    lam = _levels(cfg, args.level)[0]
    t0 = time.perf_counter()
    curves = _components(cfg, lam)
    graph = critical_graph(cfg.qd) if args.graph else None
    timings = {"trace": time.perf_counter() - t0}
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(_svg(cfg.qd, curves, graph))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("component_id,re,im,arc_param\n")
            for cid, c in enumerate(curves):
                for z, s in zip(c.points, c.arc_param):
                    fh.write(f"{cid},{_fmt(z.real)},{_fmt(z.imag)},{_fmt(s)}\n")
    report = {
        "level": lam,
        "components": [{"id": i, "signature": list(c.enclosed_poles), "class": str(classify(c, cfg.qd)),
                        "vertices": len(c.points), "length": c.length} for i, c in enumerate(curves)],
    }
    if graph is not None:
        report["critical_graph"] = {"edges": len(graph.edges), "components": graph.component_count}
    return report, timings, EXIT_OK


def _samples(cfg: Config, args) -> int:
    return int(args.samples if args.samples is not None else cfg.options.get("samples", DEFAULT_SAMPLES))


def _nodes(cfg: Config, args):
    n = args.nodes if args.nodes is not None else cfg.options.get("nodes")
    return None if n is None else int(n)


def _component_record(rep) -> dict:
    fp = rep.fingerprint
    rec = {
        "signature": list(rep.signature), "class": rep.domain, "nodes": rep.nodes,
        "winding": fp.winding, "monotone": fp.is_monotone(),
        "residuals": rep.residuals, "rotations": rep.rotations,
    }
    if rep.domain.startswith("Ring"):
        rec["passing_variants"] = rep.passing_variants
    return rec


def cmd_fingerprint(cfg: Config, args) -> tuple:
    if args.level is None:
        raise ConfigError("fingerprint needs --level")
    lam = _levels(cfg, args.level)[0]
    sig = _parse_signature(args.component) if args.component else None
    t0 = time.perf_counter()
    curves = _select(_components(cfg, lam), sig, lam)
    if args.out and len(curves) != 1:
        raise ConfigError("--out needs a single component; pass --component")
    reports = [fingerprint_component(cfg.qd, lam, c, _nodes(cfg, args), _samples(cfg, args)) for c in curves]
    timings = {"fingerprint": time.perf_counter() - t0}
    if args.out:
        fp = reports[0].fingerprint
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("theta,arg_k\n")
            for th, a in zip(fp.thetas, fp.args):
                fh.write(f"{_fmt(th)},{_fmt(a)}\n")
    return {"level": lam, "components": [_component_record(r) for r in reports]}, timings, EXIT_OK


def _oracle_signatures(qd: QuadDifferential, lines) -> list:
    sigs = []
    for line in lines:
        inside = np.abs(winding_numbers(line, qd.poles)) > 0.5
        sigs.append(tuple(int(i) for i in np.flatnonzero(inside)))
    return sorted(sigs, key=lambda s: (len(s), s))


def cmd_verify(cfg: Config, args) -> tuple:
    qd = cfg.qd
    checks, failures = [], []
    t0 = time.perf_counter()

    def record(name, ok, **detail):
        entry = {"check": name, "passed": bool(ok), **detail}
        checks.append(entry)
        if not ok:
            failures.append(entry)

    cs = critical_set(qd)
    if len(cs):
        from .qd_core import numerator_polynomial
        coeffs = numerator_polynomial(qd)
        res = max(abs(np.polyval(np.polyder(coeffs, m - 1), z)) / max(np.abs(coeffs).max(), 1e-300)
                  for z, m, _ in cs.distinct())
        record("critical_residual", res <= 1e-10, value=res)
    connected, _ = is_critical_graph_connected(qd)
    samples, nodes = _samples(cfg, args), _nodes(cfg, args)
    resolution = int(cfg.options.get("resolution", 512))
    for lam in _levels(cfg, args.level):
        curves = _components(cfg, lam)
        ours = [tuple(c.enclosed_poles) for c in curves]
        _, lines = marching_squares_oracle(qd, lam, resolution=resolution)
        oracle = _oracle_signatures(qd, lines)
        record("census", ours == oracle, level=lam, traced=ours, oracle=oracle)
        for c in curves:
            lvl = float(np.max(np.abs(qd.potential(c.points) - math.log(lam))))
            record("level_fidelity", lvl <= 1e-10, level=lam, signature=list(c.enclosed_poles), value=lvl)
            rep = fingerprint_component(qd, lam, c, nodes, samples)
            fp = rep.fingerprint
            mod = float(np.max(np.abs(np.abs(fp.values) - 1)))
            record("homeomorphism", winding(fp) == 1 and fp.is_monotone() and mod <= 1e-10,
                   level=lam, signature=list(c.enclosed_poles), winding=fp.winding, modulus_error=mod)
            if rep.domain.startswith("Ring"):
                passing = rep.passing_variants
                record("ring_functional_equation", len(passing) == 1, level=lam,
                       signature=list(c.enclosed_poles), passing_variants=passing,
                       residuals=rep.residuals)
            else:
                (name, value), = rep.residuals.items()
                record("closed_form_fingerprint", value <= PASS_TOL, level=lam,
                       signature=list(c.enclosed_poles), formula=name, value=value)
    report = {"passed": not failures, "connected": connected, "checks": checks, "failures": failures}
    return report, {"verify": time.perf_counter() - t0}, EXIT_OK if not failures else EXIT_INVARIANT


COMMANDS = {"analyze": cmd_analyze, "trace": cmd_trace, "fingerprint": cmd_fingerprint, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strebel", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("config", help="JSON configuration file")
        s.add_argument("--level", type=float, default=None, help="lemniscate level lambda")
        s.add_argument("--no-timings", action="store_true", help="omit the timings block")
        s.add_argument("--allow-critical", action="store_true",
                       help="silence the warning for levels near a critical value")
        if name in ("fingerprint", "verify"):
            s.add_argument("--samples", type=int, default=None, help="fingerprint samples M")
            s.add_argument("--nodes", type=int, default=None, help="boundary nodes N (default adaptive)")
        if name == "fingerprint":
            s.add_argument("--component", default=None, help="enclosed-pole signature, e.g. 0,2")
            s.add_argument("--out", default=None, help="CSV of theta,arg_k")
        if name == "trace":
            s.add_argument("--svg", default=None, help="SVG output path")
            s.add_argument("--out", default=None, help="CSV of component vertices")
            s.add_argument("--graph", action="store_true", help="draw the critical graph")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.level is not None or cfg.levels:
            _check_levels(cfg, _levels(cfg, args.level), args.allow_critical)
        report, timings, code = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if not args.no_timings:
        report["timings"] = timings
    sys.stdout.write(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
