"""Command line front end: counting, polynomials, spectra, components,
sampling, calibration, and a self-check battery.

Every command reads a disk from an ASCII grid file, writes a machine
readable artifact (JSON or CSV, big integers as decimal strings), and
prints a short human summary.  Outputs are deterministic functions of the
inputs and the seed.  Exit codes: 0 success, 1 invalid input or usage,
2 resource bound exceeded, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from .errors import DominoError, InvalidInput

_COMMANDS = (
    "count", "poly", "spectrum", "components",
    "sample", "stats", "calibrate", "verify",
)


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation: one command plus its inputs and thresholds."""

    command: str
    disk_path: str | None = None
    height: int | None = None
    modulus: int | None = None
    samples: int = 1
    seed: int = 0
    threads: int = 1
    bound: int | None = None
    plug_bound: int | None = None
    m_prime: int = 1
    eta_samples: int = 33
    route: str = "auto"
    checkpoint_dir: str | None = None
    checkpoint_every: int = 8
    with_trits: bool = False
    out: str | None = None
    fmt: str = "json"

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise InvalidInput(f"unknown command {self.command!r}")
        for name in ("samples", "threads", "m_prime", "checkpoint_every"):
            if getattr(self, name) <= 0:
                raise InvalidInput(f"{name} must be positive")
        for name in ("bound", "plug_bound"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise InvalidInput(f"{name} must be positive")
        if self.height is not None and self.height < 0:
            raise InvalidInput("height must be nonnegative")
        if self.modulus is not None and self.modulus <= 0:
            raise InvalidInput("modulus must be positive")


def _build_parser() -> _Parser:
    p = _Parser(prog="dominotwist", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str, *, disk=True, height=False):
        c = sub.add_parser(name, help=help_)
        if disk:
            c.add_argument("--disk", required=name not in ("calibrate", "verify"),
                           help="path to an ASCII disk file ('#' = cell)")
        if height:
            c.add_argument("--height", type=int, required=True,
                           help="number of floors N of the cylinder")
        c.add_argument("--threads", type=int, default=1,
                       help="worker cap (reserved; computations are sequential)")
        c.add_argument("--out", help="artifact file path (default: stdout)")
        c.add_argument("--format", choices=("json", "csv"), default="json",
                       dest="fmt", help="artifact format")
        return c

    add("count", "number of tilings of the cylinder", height=True)

    c = add("poly", "twist generating polynomial of the cylinder", height=True)
    c.add_argument("--route", choices=("auto", "dict", "packed"), default="auto")
    c.add_argument("--checkpoint-dir", dest="checkpoint_dir",
                   help="directory for resumable long-run checkpoints")
    c.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, default=8)
    c.add_argument("--plug-bound", dest="plug_bound", type=int)

    c = add("spectrum", "dominant eigendata and Gaussian constants")
    c.add_argument("--eta-samples", dest="eta_samples", type=int, default=33)

    c = add("components", "flip components with twist statistics", height=True)
    c.add_argument("--with-trits", dest="with_trits", action="store_true",
                   help="also report joint flip+trit components (small instances)")
    c.add_argument("--bound", type=int, help="enumeration size cutoff")
    c.add_argument("--m-prime", dest="m_prime", type=int, default=1,
                   help="vertical-floor count that marks a component as fat")

    c = add("sample", "exactly uniform random tilings", height=True)
    c.add_argument("--samples", type=int, default=1)
    c.add_argument("--seed", type=int, default=0)

    c = add("stats", "exact twist distribution facts", height=True)
    c.add_argument("--mod", dest="modulus", type=int,
                   help="also report the deviation of twist mod n from uniform")

    add("calibrate", "search the twist kernel candidates", disk=False)

    c = add("verify", "run the full invariant suite", disk=True)
    c.add_argument("--height", type=int, default=2,
                   help="cylinder height for the disk-specific checks")
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    fields = {f: getattr(ns, f) for f in RunConfig.__dataclass_fields__ if hasattr(ns, f)}
    fields["disk_path"] = getattr(ns, "disk", None)
    return RunConfig(**fields)


def _load_disk(path: str):
    from .region import parse_disk

    try:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read disk file {path!r}: {exc}") from exc
    return parse_disk(text)


def _json_text(artifact: dict) -> str:
    return json.dumps(artifact, sort_keys=True, indent=2) + "\n"


def _csv_text(header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(str(x) for x in row) + "\n")
    return buf.getvalue()


def _emit(cfg: RunConfig, artifact: dict, human: str, csv_data=None) -> None:
    """Write the artifact (file or stdout) and the one-line human summary."""
    if cfg.fmt == "csv":
        if csv_data is None:
            raise InvalidInput(f"{cfg.command} has no CSV representation")
        text = _csv_text(*csv_data)
    else:
        text = _json_text(artifact)
    if cfg.out:
        with open(cfg.out, "w", encoding="ascii") as fh:
            fh.write(text)
        print(human)
    else:
        sys.stdout.write(text)
        if human:
            print(human, file=sys.stderr)


# -- command bodies -----------------------------------------------------------------


def _cmd_count(cfg: RunConfig) -> int:
    from .transfer import build_transfer, count_cylinder

    d = _load_disk(cfg.disk_path)
    ts = build_transfer(d, bound=cfg.plug_bound)
    n = count_cylinder(ts, cfg.height)
    artifact = {"command": "count", "height": cfg.height, "count": str(n)}
    if cfg.out:
        with open(cfg.out, "w", encoding="ascii") as fh:
            fh.write(_json_text(artifact) if cfg.fmt == "json"
                     else _csv_text(["height", "count"], [[cfg.height, n]]))
    print(n)
    return 0


def _cmd_poly(cfg: RunConfig) -> int:
    from .transfer import build_transfer, twist_polynomial

    d = _load_disk(cfg.disk_path)
    ts = build_transfer(d, bound=cfg.plug_bound)
    poly = twist_polynomial(ts, cfg.height, route=cfg.route,
                            checkpoint_dir=cfg.checkpoint_dir,
                            checkpoint_every=cfg.checkpoint_every)
    rows = [[t, poly.coeffs[t]] for t in poly.support()]
    artifact = {
        "command": "poly",
        "height": cfg.height,
        "coefficients": {str(t): str(c) for t, c in poly.coeffs.items()},
        "total": str(sum(poly.coeffs.values())),
    }
    lo, hi = poly.degree_bounds() if not poly.is_zero() else (0, 0)
    _emit(cfg, artifact,
          f"P_{cfg.height}: support [{lo}, {hi}], {sum(poly.coeffs.values())} tilings",
          (["twist", "count"], rows))
    return 0


def _cmd_spectrum(cfg: RunConfig) -> int:
    from . import stats
    from .transfer import build_transfer

    d = _load_disk(cfg.disk_path)
    ts = build_transfer(d, bound=cfg.plug_bound)
    rep = stats.spectral_report(ts, eta_samples=cfg.eta_samples)
    art = rep.to_json()
    art["command"] = "spectrum"
    rows = [[t, e] for t, e in rep.eta_curve]
    _emit(cfg, art,
          f"lambda1 = {rep.lambda1!r}, gap = {rep.gap!r}, sigma2 = {rep.sigma2!r}",
          (["t", "eta1"], rows))
    return 0


def _cmd_components(cfg: RunConfig) -> int:
    from .dynamics import ENUMERATION_BOUND, components

    d = _load_disk(cfg.disk_path)
    rep = components(d, cfg.height, with_trits=cfg.with_trits,
                     bound=cfg.bound or ENUMERATION_BOUND)
    art = rep.to_json(cfg.m_prime)
    art["command"] = "components"
    rows = [[r["twist"], r["components"], r["tilings"], r["fat"]]
            for r in rep.census(cfg.m_prime)]
    _emit(cfg, art,
          f"{rep.n_tilings} tilings, {rep.n_components} flip components, "
          f"constant twist: {rep.twist_constant}",
          (["twist", "components", "tilings", "fat"], rows))
    return 0


def _cmd_sample(cfg: RunConfig) -> int:
    from . import stats
    from .dynamics import floor_table
    from .transfer import build_transfer
    from .twist import DEFAULT_KERNEL

    d = _load_disk(cfg.disk_path)
    ts = build_transfer(d)
    st = stats.sampler_state(ts, cfg.height, seed=cfg.seed)
    ft = floor_table(d)
    units = ft.units(DEFAULT_KERNEL)
    out = []
    for i in range(cfg.samples):
        ids = stats.decode_floor_ids(st, stats._uniform_below(st.total, cfg.seed, i))
        tw = int(sum(int(units[f]) for f in ids)) // DEFAULT_KERNEL.m
        vert = int(sum(bool(ft.is_vertical[f]) for f in ids))
        tiling = [ft.floor(f).to_json() for f in ids]
        out.append({"index": i, "twist": tw, "verticalFloors": vert,
                    "floors": tiling})
    artifact = {"command": "sample", "height": cfg.height, "seed": cfg.seed,
                "total": str(st.total), "samples": out}
    rows = [[s["index"], s["twist"], s["verticalFloors"]] for s in out]
    _emit(cfg, artifact,
          f"{cfg.samples} uniform samples from {st.total} tilings (seed {cfg.seed})",
          (["index", "twist", "verticalFloors"], rows))
    return 0


def _cmd_stats(cfg: RunConfig) -> int:
    from . import stats
    from .transfer import build_transfer, twist_polynomial

    d = _load_disk(cfg.disk_path)
    ts = build_transfer(d)
    poly = twist_polynomial(ts, cfg.height)
    total, mean, var = stats.twist_moments(poly)
    artifact = {
        "command": "stats",
        "height": cfg.height,
        "histogram": {str(t): str(c) for t, c in poly.coeffs.items()},
        "total": str(total),
        "mean": str(mean),
        "variance": str(var),
    }
    human = f"{total} tilings, variance {float(var):.6f}"
    if cfg.modulus is not None:
        dev = stats.mod_uniformity(ts, cfg.modulus, cfg.height)
        artifact["modulus"] = cfg.modulus
        artifact["modDeviation"] = dev
        human += f", mod-{cfg.modulus} deviation {dev:.3e}"
    rows = [[t, poly.coeffs[t]] for t in poly.support()]
    _emit(cfg, artifact, human, (["twist", "count"], rows))
    return 0


def _cmd_calibrate(cfg: RunConfig) -> int:
    from .twist import calibrate

    report = calibrate()
    art = report.to_json()
    art["command"] = "calibrate"
    _emit(cfg, art, f"unique passing kernel: {report.winner}")
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    checks = _verify_battery(_load_disk(cfg.disk_path) if cfg.disk_path else None,
                             cfg.height)
    ok = all(c["ok"] for c in checks)
    artifact = {"command": "verify", "ok": ok, "checks": checks}
    rows = [[c["name"], c["ok"], c["detail"]] for c in checks]
    _emit(cfg, artifact,
          f"{sum(c['ok'] for c in checks)}/{len(checks)} checks passed",
          (["name", "ok", "detail"], rows))
    return 0 if ok else 3


def _verify_battery(extra_disk, extra_height: int) -> list:
    """Cross-route invariant checks on built-in small disks (plus one more)."""
    from . import stats
    from .dynamics import enumerate_tilings, floor_table, move_graph
    from .region import rectangle
    from .transfer import build_transfer, count_cylinder
    from .plugfloor import plug_table
    from .twist import (
        DEFAULT_KERNEL, calibrate, make_connector_cocycle, make_kernel_cocycle,
        tiling_twist,
    )

    checks: list = []

    def run(name, fn):
        try:
            detail = fn() or ""
            checks.append({"name": name, "ok": True, "detail": str(detail)})
        except Exception as exc:  # noqa: BLE001 - report, do not crash the battery
            checks.append({"name": name, "ok": False, "detail": repr(exc)})

    def counts_agree(d, h):
        ft = floor_table(d)
        ts = build_transfer(d)
        a = ft.count_cylinder(h)
        b = count_cylinder(ts, h)
        c = sum(1 for _ in enumerate_tilings(d, h))
        if not a == b == c:
            raise AssertionError(f"counts disagree: {a}, {b}, {c}")
        return f"{a} tilings"

    def cocycles_agree(d, h):
        kc = make_kernel_cocycle(d, DEFAULT_KERNEL)
        cc = make_connector_cocycle(d, plug_table(d), DEFAULT_KERNEL)
        n = 0
        for t in enumerate_tilings(d, h):
            tw = tiling_twist(DEFAULT_KERNEL, t)
            s1 = sum(kc.value(f) for f in t.floors)
            s2 = sum(cc.value(f) for f in t.floors)
            if not tw == s1 == s2:
                raise AssertionError(f"cocycle mismatch at {t.to_json()}")
            n += 1
        return f"{n} tilings"

    def moves_sane(d, h):
        mg = move_graph(d, h)
        flips = trits = 0
        for i, nbs in enumerate(mg.flip_adj):
            for j in nbs:
                if mg.twists[i] != mg.twists[j]:
                    raise AssertionError("flip changed the twist")
                if i not in mg.flip_adj[j]:
                    raise AssertionError("flip adjacency not symmetric")
                flips += 1
        for i, nbs in enumerate(mg.trit_adj):
            for j, dtw in nbs:
                if dtw not in (-1, 1) or mg.twists[j] - mg.twists[i] != dtw:
                    raise AssertionError("trit sign is not a unit")
                trits += 1
        return f"{flips} flip and {trits} trit half-edges"

    def sampler_bijective(d, h):
        ts = build_transfer(d)
        st = stats.sampler_state(ts, h)
        keys = [stats.decode_tiling(st, r).key() for r in range(st.total)]
        ref = [t.key() for t in enumerate_tilings(d, h)]
        if keys != ref:
            raise AssertionError("decode order differs from enumeration")
        return f"{len(keys)} residues"

    d22, d23 = rectangle(2, 2), rectangle(2, 3)
    run("counts 2x2 h2", lambda: counts_agree(d22, 2))
    run("counts 2x3 h3", lambda: counts_agree(d23, 3))
    run("cocycles 2x2 h2", lambda: cocycles_agree(d22, 2))
    run("cocycles 2x3 h2", lambda: cocycles_agree(d23, 2))
    run("moves 2x3 h3", lambda: moves_sane(d23, 3))
    run("sampler 2x3 h2", lambda: sampler_bijective(d23, 2))
    if extra_disk is not None:
        run("counts extra disk", lambda: counts_agree(extra_disk, extra_height))
    run("calibration unique winner", lambda: str(calibrate().winner))
    return checks


_BODIES = {
    "count": _cmd_count,
    "poly": _cmd_poly,
    "spectrum": _cmd_spectrum,
    "components": _cmd_components,
    "sample": _cmd_sample,
    "stats": _cmd_stats,
    "calibrate": _cmd_calibrate,
    "verify": _cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Execute one configured command; returns the process exit status."""
    missing_height = cfg.command in ("count", "poly", "components", "sample", "stats")
    if missing_height and cfg.height is None:
        raise InvalidInput(f"{cfg.command} requires --height")
    return _BODIES[cfg.command](cfg)


def main(argv=None) -> int:
    ns = _build_parser().parse_args(argv)
    try:
        return run(_config(ns))
    except DominoError as exc:
        print(f"dominotwist: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
