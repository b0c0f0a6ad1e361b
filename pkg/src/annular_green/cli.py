"""Command-line front end.

    annular-green eval       --l 0 --r 0.5 --rp 0.7 --E 2 --V0 1 --a 2 --b 1
    annular-green sum        --r 0.5 --theta 0 --rp 0.7 --thetap 1 --E 2 ...
    annular-green resonances --l 0,1,2 --kmin 1.05 --kmax 8 --V0 1 --a 2 --b 1
    annular-green curve      --l 0,1,2 --kmin 1.05 --kmax 8 --samples 2000 --out curve.csv
    annular-green validate   --l 0,1 --E 2 --V0 1 --a 2 --b 1

Every option may also come from ``--config FILE``: flat ``key = value`` lines
using the option names without dashes, ``#`` starts a comment.  Options on
the command line override the file.  Unknown keys are rejected.

Exit codes: 0 ok, 2 invalid input or config, 3 degenerate numerics
(near a pole), 4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateNumerics, InternalConsistencyError, InvalidInput
from .greens import (
    SCHEMES,
    PotentialProfile,
    matched_cascade,
    published_cascade,
    green_radial,
    partial_wave_sum,
    wavenumbers,
)
from .oracle import GridSpec, validate
from .resonance import ResonanceScanConfig, pole_discriminant, resonance_scan

UNITS = "reduced (2M=hbar=1)"
EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_INTERNAL = 0, 2, 3, 4

# option name -> (parser, default); None means the option is required when used
OPTIONS = {
    "l": (str, None),
    "r": (float, None),
    "rp": (float, None),
    "theta": (float, 0.0),
    "thetap": (float, 0.0),
    "E": (float, None),
    "V0": (float, None),
    "a": (float, None),
    "b": (float, None),
    "M": (float, 0.5),
    "hbar": (float, 1.0),
    "lmax": (str, "auto"),
    "kmin": (float, None),
    "kmax": (float, None),
    "samples": (int, 4000),
    "tol": (float, None),       # resonances: refine_tol 1e-12; sum: 1e-10
    "points": (int, 12),
    "scheme": (str, "matched"),
    "format": (str, None),
    "out": (str, None),
}
FORMATS = ("text", "csv", "json")


class ConfigError(InvalidInput):
    pass


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def read_config(path: str | Path) -> dict:
    """Parse a flat ``key = value`` file; values stay strings."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


@dataclass
class RunConfig:
    command: str
    values: dict

    def get(self, key):
        v = self.values.get(key)
        if v is None:
            raise ConfigError(f"'{self.command}' needs --{key}")
        return v

    @property
    def profile(self) -> PotentialProfile:
        return PotentialProfile(self.get("b"), self.get("a"), self.get("V0"))

    def ls(self) -> list[int]:
        raw = self.get("l")
        try:
            return [int(t) for t in str(raw).split(",") if t.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad l list {raw!r}") from exc


def _convert(key, value):
    conv = OPTIONS[key][0]
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def merge(command: str, cli: dict, config_path: str | None) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    values = {key: default for key, (_, default) in OPTIONS.items()}
    if config_path:
        # convert every file value so a bad entry fails even when overridden
        values.update({k: _convert(k, v) for k, v in read_config(config_path).items()})
    values.update({k: _convert(k, v) for k, v in cli.items() if v is not None})
    if values["scheme"] not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}")
    if values["format"] is not None and values["format"] not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    return RunConfig(command, values)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def render_records(records: list[dict], meta: dict, form: str) -> str:
    """Serialise a list of flat records.

    csv carries only the header and rows, text adds ``key = value`` metadata
    in front of each record, json wraps both.
    """
    if form == "json":
        return json.dumps({**meta, "records": records}, indent=2) + "\n"
    if form == "csv":
        buf = io.StringIO()
        cols = list(records[0]) if records else meta.get("columns", [])
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for rec in records:
            w.writerow([fmt(rec[c]) for c in cols])
        return buf.getvalue()
    lines = [f"{k} = {fmt(v)}" for k, v in meta.items() if k != "columns"]
    for rec in records:
        lines.append("")
        lines.extend(f"{k} = {fmt(v)}" for k, v in rec.items())
    return "\n".join(lines) + "\n"


def emit(text: str, out: str | None, stdout):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _meta(cfg: RunConfig, **extra) -> dict:
    meta = {"command": cfg.command, "units": UNITS}
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_eval(cfg: RunConfig):
    prof = cfg.profile
    ctx = wavenumbers(cfg.get("E"), prof, cfg.values["M"], cfg.values["hbar"])
    ls = cfg.ls()
    if len(ls) != 1:
        raise ConfigError("eval takes a single l")
    l = ls[0]
    scheme = cfg.values["scheme"]
    res = green_radial(l, cfg.get("r"), cfg.get("rp"), ctx, prof, scheme)
    build = matched_cascade if scheme == "matched" else published_cascade
    margin = min(float(v) for v in build(l, ctx.k, ctx.mu, prof.a, prof.b)["degeneracy"].values())
    rec = {"l": l, "r": res.r, "rp": res.rp, "E": ctx.e, "region": res.region.value,
           "block": res.region.block, "G": res.value, "pole_margin": margin}
    return [rec], _meta(cfg, scheme=scheme), "text"


def cmd_sum(cfg: RunConfig):
    prof = cfg.profile
    ctx = wavenumbers(cfg.get("E"), prof, cfg.values["M"], cfg.values["hbar"])
    lmax = cfg.values["lmax"]
    if lmax != "auto":
        try:
            lmax = int(lmax)
        except ValueError as exc:
            raise ConfigError(f"lmax must be an integer or 'auto', got {lmax!r}") from exc
    tol = cfg.values["tol"] if cfg.values["tol"] is not None else 1e-10
    value, used = partial_wave_sum(cfg.get("r"), cfg.values["theta"], cfg.get("rp"),
                                   cfg.values["thetap"], ctx, prof, lmax,
                                   cfg.values["scheme"], tol)
    rec = {"r": cfg.get("r"), "theta": cfg.values["theta"], "rp": cfg.get("rp"),
           "thetap": cfg.values["thetap"], "E": ctx.e, "G": value, "lmax_used": used}
    return [rec], _meta(cfg, scheme=cfg.values["scheme"]), "text"


ROOT_COLUMNS = ["l", "k_star", "e_star", "residual", "beta_gap", "g_at_root"]


def cmd_resonances(cfg: RunConfig):
    prof = cfg.profile
    recs = []
    for l in cfg.ls():
        tol = cfg.values["tol"] if cfg.values["tol"] is not None else 1e-12
        sc = ResonanceScanConfig(l, cfg.get("kmin"), cfg.get("kmax"), cfg.values["samples"], tol)
        for root in resonance_scan(sc, prof, cfg.values["M"], cfg.values["hbar"]):
            recs.append({c: getattr(root, c) for c in ROOT_COLUMNS})
    return recs, _meta(cfg, columns=ROOT_COLUMNS), "csv"


def cmd_curve(cfg: RunConfig):
    prof = cfg.profile
    ls = cfg.ls() if cfg.values.get("l") is not None else [0, 1, 2]
    sc = ResonanceScanConfig(ls[0], cfg.get("kmin"), cfg.get("kmax"), cfg.values["samples"])
    sc.validate(prof, cfg.values["M"], cfg.values["hbar"])
    ks = np.linspace(sc.kmin, sc.kmax, int(sc.samples))
    cols = {f"delta_l{l}": pole_discriminant(l, ks, prof, cfg.values["M"], cfg.values["hbar"])
            for l in ls}
    recs = [{"k": float(k), **{name: float(v[i]) for name, v in cols.items()}}
            for i, k in enumerate(ks)]
    return recs, _meta(cfg, columns=["k", *cols]), "csv"


def cmd_validate(cfg: RunConfig):
    prof = cfg.profile
    ctx = wavenumbers(cfg.get("E"), prof, cfg.values["M"], cfg.values["hbar"])
    grid = GridSpec(points_per_region=cfg.values["points"], scheme=cfg.values["scheme"])
    reports = [validate(l, ctx, prof, grid) for l in cfg.ls()]
    recs = [rep.as_flat() for rep in reports]
    dominated = any(rep.pairs_compared == 0 for rep in reports)
    return recs, _meta(cfg), "text", dominated


COMMANDS = {
    "eval": cmd_eval,
    "sum": cmd_sum,
    "resonances": cmd_resonances,
    "curve": cmd_curve,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annular-green", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value file; flags override it")
        for key, (conv, default) in OPTIONS.items():
            # defaults are applied after merging with the config file
            p.add_argument(f"--{key}", dest=key, default=None,
                           type=str if conv is str else conv,
                           help=None if default is None else f"default {default}")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    cli = {k: v for k, v in vars(ns).items() if k in OPTIONS}
    try:
        cfg = merge(ns.command, cli, ns.config)
        result = COMMANDS[ns.command](cfg)
        recs, meta, default_form = result[:3]
        dominated = len(result) > 3 and result[3]
        form = cfg.values["format"] or default_form
        emit(render_records(recs, meta, form), cfg.values["out"], stdout)
        if dominated:
            print("error: near-pole flags prevented validation", file=stderr)
            return EXIT_DEGENERATE
        return EXIT_OK
    except InvalidInput as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except DegenerateNumerics as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_DEGENERATE
    except InternalConsistencyError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())
