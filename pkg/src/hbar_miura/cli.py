"""Command-line driver: ``python3 -m hbar_miura verify <suite...>``.

Exit status: 0 when every check passes, 1 on a check failure, 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .relations import (WORKERS_ENV, reconcile_variants, reconciliation_report, verify_center_heisenberg,
                        verify_defining, verify_derivation, verify_ef_display, verify_rho_properties)
from .report import CheckReport, SuiteReport
from .wakimoto import CURRENT_NAMES, VARIANT_SITES, build

SUITES = ("defining", "center", "derivation", "rho", "sugawara", "miura", "fusion", "poisson", "baxter")
POISSON_SITE = {"sdelta": ("derived", "printed")}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Run parameters; ``cutoff=None`` lets each suite use its own default."""

    k: Fraction | None = None
    hbar: Fraction = Fraction(1)
    cutoff: int | None = None
    order: int = 12
    trunc: int = 10_000
    variant: dict = field(default_factory=dict)
    suites: list = field(default_factory=list)
    format: str = "json"
    out: str | None = None
    n: int = 5
    q: str | None = None

    def echo(self) -> dict:
        d = asdict(self)
        d["k"] = "symbolic" if self.k is None else self.k
        d.pop("out")
        return d


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def parse_k(text: str) -> Fraction | None:
    return None if text.strip() == "symbolic" else parse_rational(text)


def parse_variant(text: str) -> dict:
    """``reconciled`` or comma-separated ``site=choice`` pairs."""
    text = text.strip()
    if text in ("", "reconciled"):
        return {}
    out = {}
    sites = dict(VARIANT_SITES, **POISSON_SITE)
    for part in text.split(","):
        site, _, choice = part.partition("=")
        site, choice = site.strip(), choice.strip()
        if site not in sites or choice not in sites[site]:
            raise ConfigError(f"unknown variant {part!r}; sites: {sites}")
        out[site] = choice
    return out


def parse_suites(names) -> list:
    out = []
    for name in names:
        if name == "all":
            out.extend(s for s in SUITES if s not in out)
        elif name in SUITES:
            if name not in out:
                out.append(name)
        else:
            raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return out


def _positive_int(key: str, text) -> int:
    try:
        val = int(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be an integer") from exc
    if val < 0:
        raise ConfigError(f"{key} must be non-negative")
    return val


def read_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        out[key.strip()] = val.strip()
    return out


def build_config(values: dict) -> RunConfig:
    cfg = RunConfig()
    for key, val in values.items():
        if val is None:
            continue
        if key == "k":
            cfg.k = parse_k(str(val))
        elif key == "hbar":
            cfg.hbar = parse_rational(str(val))
            if cfg.hbar <= 0:
                raise ConfigError("hbar must be positive")
        elif key in ("cutoff", "order", "trunc", "n"):
            setattr(cfg, key, _positive_int(key, val))
        elif key == "variant":
            cfg.variant = parse_variant(str(val))
        elif key == "suites":
            names = val.replace(",", " ").split() if isinstance(val, str) else list(val)
            cfg.suites = parse_suites(names)
        elif key == "format":
            if val not in ("json", "md"):
                raise ConfigError("format must be json or md")
            cfg.format = val
        elif key in ("out", "q"):
            setattr(cfg, key, str(val))
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    return cfg


# ---------------------------------------------------------------------------
# suites


def _cut(cfg: RunConfig, default: int) -> int:
    return default if cfg.cutoff is None else cfg.cutoff


def _level(cfg: RunConfig, default) -> Fraction:
    return Fraction(default) if cfg.k is None else cfg.k


def _variant(cfg: RunConfig) -> dict:
    return {s: c for s, c in cfg.variant.items() if s in VARIANT_SITES}


def run_defining(cfg: RunConfig) -> list[CheckReport]:
    reps = verify_defining(cfg.k, _variant(cfg), cutoff=_cut(cfg, 3), hbar=cfg.hbar)
    return reps + [verify_ef_display(_variant(cfg))]


def run_center(cfg: RunConfig) -> list[CheckReport]:
    return verify_center_heisenberg(_level(cfg, 1), _cut(cfg, 3), _variant(cfg), radius=0, hbar=cfg.hbar)


def run_derivation(cfg: RunConfig) -> list[CheckReport]:
    return verify_derivation(_level(cfg, 1), _cut(cfg, 3), _variant(cfg), hbar=cfg.hbar)


def run_rho(cfg: RunConfig) -> list[CheckReport]:
    return [verify_rho_properties(cfg.trunc)]


def run_sugawara(cfg: RunConfig) -> list[CheckReport]:
    from .sugawara import verify_centrality, verify_l_structure, verify_sugawara_steps

    return (verify_sugawara_steps() + [verify_l_structure(_variant(cfg))]
            + verify_centrality(_level(cfg, -2), _variant(cfg), cutoff=_cut(cfg, 4), hbar=cfg.hbar))


def run_miura(cfg: RunConfig) -> list[CheckReport]:
    from .sugawara import verify_lambda_exchange, verify_miura, verify_vacuum

    k = _level(cfg, -2)
    reps = verify_miura(k, _variant(cfg), cutoff=_cut(cfg, 4), hbar=cfg.hbar)
    if k == -2:
        reps.append(verify_vacuum(_cut(cfg, 4)))
    return reps + [verify_lambda_exchange()]


def run_fusion(cfg: RunConfig) -> list[CheckReport]:
    from .sugawara import verify_fusion

    return [verify_fusion(cfg.n)]


def run_poisson(cfg: RunConfig) -> list[CheckReport]:
    from .poisson import verify_jacobi, verify_s_bracket

    signs = cfg.variant.get("sdelta", "derived")
    return [verify_s_bracket(cfg.order, cfg.hbar, signs=signs), verify_jacobi(min(cfg.order, 6), hbar=cfg.hbar)]


def run_baxter(cfg: RunConfig) -> list[CheckReport]:
    from .skew import NotAPolynomial, verify_baxter

    try:
        return verify_baxter(q=cfg.q)
    except NotAPolynomial as exc:
        raise ConfigError(str(exc)) from exc


RUNNERS = {
    "defining": run_defining, "center": run_center, "derivation": run_derivation, "rho": run_rho,
    "sugawara": run_sugawara, "miura": run_miura, "fusion": run_fusion, "poisson": run_poisson,
    "baxter": run_baxter,
}


def run(cfg: RunConfig) -> SuiteReport:
    checks, timing = [], {}
    for suite in cfg.suites:
        t0 = time.perf_counter()
        for rep in RUNNERS[suite](cfg):
            rep.check = f"{suite}/{rep.check}"
            checks.append(rep)
        timing[suite] = round(time.perf_counter() - t0, 3)
    return SuiteReport(cfg.echo(), checks, timing)


def _emit(report_text: str, cfg: RunConfig, name: str):
    print(report_text)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{cfg.format}").write_text(report_text + "\n")


def _render(report: SuiteReport, cfg: RunConfig) -> str:
    return report.to_markdown() if cfg.format == "md" else report.to_json()


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="python3 -m hbar_miura",
                                description="Exact verification of the hbar-deformed Sugawara and Miura identities.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("suites", nargs="*", help=f"suite ids: {', '.join(SUITES)}, all")
    v.add_argument("--k", help="level: a rational or 'symbolic'")
    v.add_argument("--hbar", help="rational hbar (default 1)")
    v.add_argument("--cutoff", help="Fock degree cutoff (default: per suite)")
    v.add_argument("--order", help="series order for the Poisson suite (default 12)")
    v.add_argument("--trunc", help="family truncation L for numeric rho (default 10000)")
    v.add_argument("--variant", help="'reconciled' or site=choice[,site=choice]")
    v.add_argument("--format", choices=("json", "md"))
    v.add_argument("--out", help="directory for the report file")
    v.add_argument("--config", help="file of key = value lines; flags override it")
    v.add_argument("--n", help="largest fusion order (default 5)")
    v.add_argument("--q", help="polynomial Q(u) for the baxter suite")
    r = sub.add_parser("reconcile", help="select the consistent variant assignment")
    r.add_argument("--format", choices=("json", "md"), default="json")
    r.add_argument("--out")
    sub.add_parser("list-currents", help="list the buildable currents")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-currents":
            for name in CURRENT_NAMES:
                if name == "d_charge":
                    print(f"{name:18s} quadratic mode operator (Fock level only)")
                    continue
                vs = build(name)
                bosons = sorted(set().union(*(v.bosons_used() for _, v in vs.terms)))
                print(f"{name:18s} {len(vs)} term(s), bosons {','.join(bosons) or '-'}")
            return 0
        if args.command == "reconcile":
            cfg = RunConfig(format=args.format, out=args.out)
            rep = SuiteReport({"command": "reconcile"}, [reconciliation_report(reconcile_variants())])
            _emit(_render(rep, cfg), cfg, "reconcile")
            return 0 if rep.passed else 1
        values = read_config_file(args.config) if args.config else {}
        flags = {k: getattr(args, k) for k in ("k", "hbar", "cutoff", "order", "trunc", "variant", "format", "out",
                                               "n", "q")}
        values.update({k: v for k, v in flags.items() if v is not None})
        if args.suites:
            values["suites"] = args.suites
        cfg = build_config(values)
        if os.environ.get(WORKERS_ENV):
            try:
                int(os.environ[WORKERS_ENV])
            except ValueError as exc:
                raise ConfigError(f"{WORKERS_ENV} must be an integer") from exc
        report = run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    _emit(_render(report, cfg), cfg, "report")
    return 0 if report.passed else 1
