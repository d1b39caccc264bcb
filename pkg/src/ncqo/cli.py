"""Command-line front end.

Algebraic commands print JSON on stdout; sweeps write CSV.  Exit status is 0 on
success, 1 on a domain or I/O error (error class name on stderr) and 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import blackbody as bb
from .algebra import ModeTable, NormalForm, mode_ids_in, normal_order, parse_word
from .errors import NcqoError
from .perturbation import NPhotonSame, Stimulated, TwoDifferent, emission_factor, xfactor
from .vacuum import VacuumSpec, vev
from .verify import AgreementConfig, agreement_suite


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=False)


def _mode_table(spec: Optional[str], text: str, vac: Optional[VacuumSpec] = None) -> ModeTable:
    """Modes from ``--modes id=omega,...``, else the vacuum's profile, else the expression (omega 1)."""
    if spec:
        pairs = []
        for item in spec.split(","):
            mid, _, omega = item.partition("=")
            try:
                pairs.append((mid.strip(), float(omega) if omega else 1.0))
            except ValueError:
                raise _UsageError(f"bad --modes entry {item!r}") from None
        return ModeTable.from_pairs(pairs)
    if vac is not None:
        return ModeTable.from_ids(vac.profile)
    return ModeTable.from_ids(dict.fromkeys(mode_ids_in(text)))


def _grid(text: str) -> np.ndarray:
    try:
        lo, hi, count = text.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError:
        raise _UsageError(f"grid must be lo:hi:count, got {text!r}") from None


def _floats(text: str) -> list[float]:
    if not text:
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise _UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _complex_pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


# -- subcommands ------------------------------------------------------------------

def _cmd_normal_order(args) -> str:
    if args.json_input:
        form = NormalForm.from_json(args.expr)
        return form.to_json()
    table = _mode_table(args.modes, args.expr)
    return normal_order(parse_word(args.expr, table)).to_json()


def _cmd_vev(args) -> str:
    vac = VacuumSpec.load(args.vacuum)
    table = _mode_table(args.modes, args.expr, vac)
    form = normal_order(parse_word(args.expr, table))
    return _dump({"vev": _complex_pair(vev(vac, form))})


def _cmd_xfactor(args) -> str:
    vac = VacuumSpec.load(args.vacuum)
    table = _mode_table(args.modes, args.expr, vac)
    return _dump(xfactor(vac, parse_word(args.expr, table)).to_dict())


def _cmd_emission(args) -> str:
    vac = VacuumSpec.load(args.vacuum)
    mode = args.mode or next(iter(vac.profile))
    if args.process == "n-photon":
        proc = NPhotonSame(mode, args.N)
    elif args.process == "stimulated":
        proc = Stimulated(mode, args.N)
    else:
        if not args.other:
            raise _UsageError("two-different needs --other")
        proc = TwoDifferent(mode, args.other)
    return _dump({"process": args.process, "mode": mode, "N": args.N,
                  "factor": emission_factor(vac, proc)})


def _cmd_oracle_verify(args) -> str:
    cfg = AgreementConfig.load(args.config) if args.config else AgreementConfig()
    if args.seed is not None:
        cfg = AgreementConfig(**{**{k: getattr(cfg, k) for k in AgreementConfig._KEYS},
                                 "seed": args.seed})
    rows = agreement_suite(cfg)
    failed = [r for r in rows if not r.error < cfg.tol]
    lines = [f"{'#':>4}  {'error':>9}  {'result':6}  word"]
    for r in rows:
        lines.append(f"{r.index:>4}  {r.error:9.2e}  {'PASS' if r.error < cfg.tol else 'FAIL':6}  {r.word}")
    lines.append(f"{len(rows) - len(failed)}/{len(rows)} passed (tol {cfg.tol:g}, seed {cfg.seed})")
    if failed:
        raise _VerifyFailed("\n".join(lines))
    return "\n".join(lines)


class _VerifyFailed(Exception):
    pass


def _cmd_planck_sweep(args) -> str:
    params = bb.ThermoParams.from_ratio(args.mu)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        pts = bb.sweep(params, _grid(args.grid), _floats(args.q), fh)
    return _dump({"out": args.out, "points": len(pts)})


def _cmd_planck_surface(args) -> str:
    lo, hi, count = args.mu_range.split(":") if args.mu_range.count(":") == 2 else (None,) * 3
    if lo is None:
        raise _UsageError("--mu-range must be lo:hi:count")
    try:
        mus = np.linspace(float(lo), float(hi), int(count))
    except ValueError:
        raise _UsageError(f"bad --mu-range {args.mu_range!r}") from None
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        pts = bb.sweep_surface(1.0, mus, _grid(args.grid), fh)
    return _dump({"out": args.out, "points": len(pts)})


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ncqo", description="Noncanonical oscillator algebra toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("normal-order", help="normal-order an operator word")
    s.add_argument("expr")
    s.add_argument("--modes", help="mode table id=omega,... (default: ids in EXPR, omega 1)")
    s.add_argument("--json-input", action="store_true", help="EXPR is NormalForm JSON; re-emit it")
    s.set_defaults(func=_cmd_normal_order)

    for name, func, text in (("vev", _cmd_vev, "vacuum expectation of a word"),
                             ("xfactor", _cmd_xfactor, "noncanonical/canonical VEV ratio")):
        s = sub.add_parser(name, help=text)
        s.add_argument("expr")
        s.add_argument("--vacuum", required=True, help="vacuum JSON file")
        s.add_argument("--modes")
        s.set_defaults(func=func)

    s = sub.add_parser("emission", help="emission amplitude correction factor")
    s.add_argument("--process", required=True, choices=("n-photon", "two-different", "stimulated"))
    s.add_argument("--N", type=int, default=1)
    s.add_argument("--vacuum", required=True)
    s.add_argument("--mode", help="mode id (default: first profile mode)")
    s.add_argument("--other", help="second mode for two-different")
    s.set_defaults(func=_cmd_emission)

    s = sub.add_parser("oracle-verify", help="symbolic vs matrix agreement on random words")
    s.add_argument("--config", help="JSON with keys " + ", ".join(AgreementConfig._KEYS))
    s.add_argument("--seed", type=int)
    s.set_defaults(func=_cmd_oracle_verify)

    s = sub.add_parser("planck-sweep", help="spectral density on a frequency grid (CSV)")
    s.add_argument("--mu", type=float, default=0.0, help="mu / k_B T (<= 0)")
    s.add_argument("--grid", default="0.01:10:512", help="hbar omega / k_B T as lo:hi:count")
    s.add_argument("--q", default="", help="comma-separated Tsallis q values")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_planck_sweep)

    s = sub.add_parser("planck-surface", help="(mu, omega) spectral density surface (CSV)")
    s.add_argument("--mu-range", default="-10:0:41", help="mu / k_B T as lo:hi:count; write --mu-range=-4:0:9 for negative bounds")
    s.add_argument("--grid", default="0.01:10:512")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_planck_surface)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        out = args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except _VerifyFailed as exc:
        print(exc)
        return 1
    except (NcqoError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
