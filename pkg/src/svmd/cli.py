"""Command-line entry point: ``svmd gen | decompose | bench``.

Exit codes: 0 success, 1 an acceptance band failed in ``bench``, 2 bad
usage or unreadable input.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import bench
from .core import SvmdConfig
from .elongation import PcrConfig
from .exceptions import SvmdError
from .metrics import quality
from .pipeline import DEFAULT_PCR, PipelineConfig, run_pipeline
from .refinement import RefineConfig
from .signals import SIGNAL_IDS, gen_signal
from .spectral import Signal
from .vmd import VmdConfig, vmd_decompose

logger = logging.getLogger("svmd")

MIN_SAMPLES = 16
JITTER_TOL = 1e-6
SVG_POINTS = 2000


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# CSV input

def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_table(text: str, name: str = "input"):
    """Parse a numeric CSV with an optional header row.

    Returns ``(header or None, array of shape (rows, cols))``.
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{name}: no data")
    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise InputError(f"{name}: header only, no data")
    width = len(rows[0][1])
    data = []
    for lineno, r in rows:
        if len(r) != width:
            raise InputError(f"{name}: line {lineno}: expected {width} columns, got {len(r)}")
        try:
            vals = [float(c) for c in r]
        except ValueError:
            raise InputError(f"{name}: line {lineno}: not a number: {','.join(r)!r}") from None
        if not all(np.isfinite(vals)):
            raise InputError(f"{name}: line {lineno}: non-finite value")
        data.append(vals)
    return header, np.asarray(data, dtype=float)


def table_to_signal(header, data, rate, name="input") -> Signal:
    if data.shape[1] == 1:
        if rate is None:
            raise InputError(f"{name}: single-column input needs --rate")
        values, fs, t0 = data[:, 0], float(rate), 0.0
    elif data.shape[1] == 2:
        t, values = data[:, 0], data[:, 1]
        if t.size < 2:
            raise InputError(f"{name}: need at least {MIN_SAMPLES} samples")
        dt = np.diff(t)
        step = float(np.mean(dt))
        if not step > 0:
            raise InputError(f"{name}: timestamps must increase")
        bad = np.flatnonzero(np.abs(dt - step) > JITTER_TOL * abs(step))
        if bad.size:
            line = int(bad[0]) + 2 + (header is not None)
            raise InputError(f"{name}: line {line}: non-uniform timestamps")
        fs, t0 = 1.0 / step, float(t[0])
        if rate is not None and abs(rate - fs) > JITTER_TOL * fs:
            raise InputError(f"{name}: --rate {rate} disagrees with timestamps ({fs:g} Hz)")
    else:
        raise InputError(f"{name}: expected 1 or 2 columns, got {data.shape[1]}")
    if values.size < MIN_SAMPLES:
        raise InputError(f"{name}: need at least {MIN_SAMPLES} samples, got {values.size}")
    return Signal(values, fs, t0)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


# output helpers

def write_csv(path: Path, header, columns) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _write_rows(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])


def _polyline(t, y, x0, y0, w, h, lo, hi):
    step = max(1, len(t) // SVG_POINTS)
    t, y = t[::step], y[::step]
    span_t = (t[-1] - t[0]) or 1.0
    span_y = (hi - lo) or 1.0
    px = x0 + (t - t[0]) / span_t * w
    py = y0 + h - (y - lo) / span_y * h
    return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))


def render_svg(t, panels) -> str:
    """Stacked line charts; ``panels`` is a list of (title, recovered, truth or None)."""
    width, ph, pad = 900, 140, 30
    height = pad + len(panels) * (ph + pad)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           '<rect width="100%" height="100%" fill="white"/>']
    for i, (title, y, truth) in enumerate(panels):
        y0 = pad + i * (ph + pad)
        vals = y if truth is None else np.concatenate([y, truth])
        lo, hi = float(np.min(vals)), float(np.max(vals))
        out.append(f'<text x="10" y="{y0 - 8}">{title}</text>')
        out.append(f'<rect x="60" y="{y0}" width="{width - 80}" height="{ph}" '
                   'fill="none" stroke="#bbb"/>')
        if truth is not None:
            out.append(f'<polyline fill="none" stroke="#d62728" stroke-width="1" '
                       f'stroke-dasharray="4,3" points="{_polyline(t, truth, 60, y0, width - 80, ph, lo, hi)}"/>')
        out.append(f'<polyline fill="none" stroke="#1f77b4" stroke-width="1" '
                   f'points="{_polyline(t, y, 60, y0, width - 80, ph, lo, hi)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_manifest(out: Path, argv, config, digest, started) -> None:
    manifest = {
        "command": ["svmd", *argv],
        "config": _jsonable(config),
        "input_sha256": digest,
        "version": _version(),
        "duration_s": round(time.perf_counter() - started, 6),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


# commands

def cmd_gen(args) -> int:
    b = gen_signal(args.signal, args.sigma, args.seed)
    t = b.mixture.time
    buf = io.StringIO()
    for ti, xi in zip(t, b.mixture.samples):
        buf.write(f"{float(ti)!r},{float(xi)!r}\n")
    if args.out and args.out != "-":
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    if args.truth_out:
        names = ["t"] + [f"mode_{i + 1}" for i in range(len(b.true_modes))]
        write_csv(Path(args.truth_out), names, [t] + [m.samples for m in b.true_modes])
    return 0


def _pipeline_config(args) -> PipelineConfig:
    svmd = SvmdConfig(
        alpha=args.alpha if args.alpha is not None else SvmdConfig.alpha,
        beta=args.beta, eps_outer=args.eps, eta_inner=args.eta)
    ref = RefineConfig(merge_tol_hz=args.merge_tol, snr_detect=args.snr_detect)
    return PipelineConfig(svmd=svmd, pcr=dataclasses.replace(
        DEFAULT_PCR, extension_frac=args.extension), refine=ref,
        do_elongate=args.elongate, do_refine=args.refine, max_modes=args.max_modes)


def cmd_decompose(args, argv) -> int:
    started = time.perf_counter()
    text = _read_text(args.input)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    header, data = read_table(text, args.input)
    s = table_to_signal(header, data, args.rate, args.input)

    truth = None
    if args.truth:
        th, td = read_table(_read_text(args.truth), args.truth)
        if td.shape[0] != len(s):
            raise InputError(f"{args.truth}: {td.shape[0]} rows, signal has {len(s)}")
        cols = td[:, 1:] if (th is None or th[0].lower() == "t") and td.shape[1] > 1 else td
        truth = [Signal(cols[:, j], s.sample_rate_hz, s.t0_s) for j in range(cols.shape[1])]

    if args.method == "vmd":
        config = VmdConfig(k_modes=args.k,
                           alpha=args.alpha if args.alpha is not None else VmdConfig.alpha,
                           eta_inner=args.eta, mirror_ends=args.elongate)
        result = vmd_decompose(s, config)
        verdict = None
    else:
        config = _pipeline_config(args)
        run = run_pipeline(s, config)
        result, verdict = run.result, run.verdict

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t = s.time
    names = ["t"] + [f"mode_{i + 1}" for i in range(len(result.modes))] + ["residual"]
    cols = [t] + [m.time.samples for m in result.modes] + [result.residual_signal().samples]
    write_csv(out / "modes.csv", names, cols)

    report = {
        "method": args.method,
        "n_samples": len(s),
        "sample_rate_hz": s.sample_rate_hz,
        "mode_count": len(result.modes),
        "modes": [{"index": i + 1, "center_hz": m.center_hz, "power": m.power,
                   "iterations": m.iterations_used} for i, m in enumerate(result.modes)],
        "residual_power": result.residual.power,
    }
    if verdict is not None:
        report["verdict"] = {"count": verdict.count,
                             "distance_series": list(verdict.distance_series),
                             "snr_series": list(verdict.snr_series),
                             "groups": [list(g) for g in verdict.groups]}
    if truth is not None and result.modes:
        match = bench.match_modes(result.modes, truth)
        report["metrics"] = []
        for j, (tm, k) in enumerate(zip(truth, match)):
            m = result.modes[k]
            q = quality(m.time, tm, m.center_hz, bench.true_center(tm))
            report["metrics"].append({"truth": j + 1, "mode": k + 1, **q.as_dict()})
    (out / "report.json").write_text(json.dumps(_jsonable(report), indent=2) + "\n",
                                     encoding="utf-8")
    if args.plot:
        panels = []
        by_mode = {}
        if truth is not None and result.modes:
            by_mode = {k: truth[j].samples for j, k in enumerate(bench.match_modes(result.modes, truth))}
        for i, m in enumerate(result.modes):
            panels.append((f"mode {i + 1} ({m.center_hz:.1f} Hz)", m.time.samples, by_mode.get(i)))
        panels.append(("residual", cols[-1], None))
        (out / "plot.svg").write_text(render_svg(t, panels), encoding="utf-8")
    write_manifest(out, argv, {"method": args.method, "config": config}, digest, started)
    print(f"{len(result.modes)} modes written to {out}")
    return 0


def cmd_bench(args, argv) -> int:
    started = time.perf_counter()
    fn = bench.EXPERIMENTS[args.experiment]
    kwargs = {}
    if args.seeds is not None:
        if args.experiment == "binning":
            kwargs["seed"] = args.seeds
        else:
            kwargs["seeds"] = range(args.seeds)
    if args.experiment == "compare":
        table, checks = fn(args.signal, **kwargs)
    else:
        table, checks = fn(**kwargs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / f"{args.experiment}.csv", table)
    lines = [c.line() for c in checks]
    (out / f"{args.experiment}_summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(out, argv, {"experiment": args.experiment, "signal": args.signal,
                               "seeds": args.seeds}, None, started)
    print("\n".join(lines))
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="svmd", description="Sequential variational mode decomposition")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", aliases=["gen-signal"], help="write a synthetic test signal as t,value CSV")
    g.add_argument("signal", type=int, choices=SIGNAL_IDS)
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="-", help="output file (default stdout)")
    g.add_argument("--truth-out", help="also write the true modes to this CSV")

    d = sub.add_parser("decompose", help="decompose a CSV signal")
    d.add_argument("input", help="CSV file, or - for stdin")
    d.add_argument("--out", default="svmd_out")
    d.add_argument("--rate", type=float, help="sample rate for single-column input (Hz)")
    d.add_argument("--truth", help="CSV of true modes (t column optional)")
    d.add_argument("--method", choices=("svmd", "vmd"), default="svmd")
    d.add_argument("--k", type=int, default=3, help="mode count for --method vmd")
    d.add_argument("--alpha", type=float, help="bandwidth penalty (method default if omitted)")
    d.add_argument("--beta", type=float, default=SvmdConfig.beta)
    d.add_argument("--eps", type=float, default=SvmdConfig.eps_outer)
    d.add_argument("--eta", type=float, default=SvmdConfig.eta_inner)
    d.add_argument("--max-modes", type=int, default=PipelineConfig.max_modes)
    d.add_argument("--extension", type=float, default=PcrConfig.extension_frac)
    d.add_argument("--merge-tol", type=float, default=RefineConfig.merge_tol_hz)
    d.add_argument("--snr-detect", type=float, default=RefineConfig.snr_detect)
    d.add_argument("--elongate", action=argparse.BooleanOptionalAction, default=True)
    d.add_argument("--refine", action=argparse.BooleanOptionalAction, default=True)
    d.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True)

    b = sub.add_parser("bench", help="rerun an experiment and check it against its bands")
    b.add_argument("experiment", choices=sorted(bench.EXPERIMENTS))
    b.add_argument("--signal", type=int, choices=(2, 3), default=2)
    b.add_argument("--seeds", type=int, help="number of seeds (seed index for binning)")
    b.add_argument("--out", default="svmd_bench")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("gen", "gen-signal"):
            return cmd_gen(args)
        if args.command == "decompose":
            return cmd_decompose(args, argv)
        return cmd_bench(args, argv)
    except (InputError, SvmdError, ValueError) as exc:
        print(f"svmd: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error of ours
        sys.stderr.close()
        return 0


if __name__ == "__main__":
    sys.exit(main())
