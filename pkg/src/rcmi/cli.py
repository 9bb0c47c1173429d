"""Batch command line front end.

Subcommands
-----------
``compute``
    Evaluate CMI quantities of a state file over an alpha grid and print CSV.
``verify``
    Run property suites and print one PASS/FAIL line per property.
``sweep``
    Run a derivative-numerator sign study and write the trial CSV.

Exit codes: 0 success, 1 property failure, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, TextIO

import numpy as np

from . import __version__
from .cmi import (
    ConditioningWarning,
    Ordering,
    cmi,
    delta_alpha_marginals,
    delta_tilde_alpha_marginals,
    i_max,
    i_min,
    naive_renyi_cmi,
    pinsker_gap,
    renyi_cmi_sibson,
    sandwiched_renyi_cmi,
)
from .conjecture import SweepConfig, cmi_variance, run_sweep, summarize, sweep_preset
from .errors import ConfigError, InputError, NumericalError, RCMIError
from .io import format_float, read_state, read_sweep_config, sweep_config_from_mapping, write_sweep_csv
from .linalg import SUPP_TOL
from .optimize import StateSearchConfig, renyi_cmi_inf_estimate
from .partition import Partition
from .states import trial_rng
from .verify import run_suite, suite_names

__all__ = ["main", "CampaignConfig", "QUANTITIES", "compute_rows"]

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# Quantities for ``compute``
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class _Quantity:
    fn: Callable
    uses_alpha: bool


def _q(fn: Callable, uses_alpha: bool) -> _Quantity:
    return _Quantity(fn, uses_alpha)


QUANTITIES: dict[str, _Quantity] = {
    "cmi": _q(lambda rho, p, a, c: cmi(rho, p), False),
    "naive": _q(lambda rho, p, a, c: naive_renyi_cmi(rho, p, a), True),
    "sibson": _q(lambda rho, p, a, c: renyi_cmi_sibson(rho, p, a, c.supp_tol), True),
    "delta": _q(lambda rho, p, a, c: delta_alpha_marginals(rho, p, a, c.ordering), True),
    "delta-tilde": _q(lambda rho, p, a, c: delta_tilde_alpha_marginals(rho, p, a, c.ordering), True),
    "sandwiched": _q(lambda rho, p, a, c: sandwiched_renyi_cmi(rho, p, a, c.search, trial_rng(c.seed)).value, True),
    "inf-estimate": _q(lambda rho, p, a, c: renyi_cmi_inf_estimate(rho, p, a, c.search, trial_rng(c.seed)).value, True),
    "i-max": _q(lambda rho, p, a, c: i_max(rho, p, c.supp_tol), False),
    "i-min": _q(lambda rho, p, a, c: i_min(rho, p, c.supp_tol), False),
    "pinsker-distance": _q(lambda rho, p, a, c: pinsker_gap(rho, p, c.supp_tol)[1], False),
    "cmi-variance": _q(lambda rho, p, a, c: cmi_variance(rho, p), False),
}
DEFAULT_QUANTITIES = ("cmi", "sibson", "delta", "delta-tilde")


@dataclass(frozen=True)
class CampaignConfig:
    """Validated parameters of one CLI invocation."""

    mode: str
    seed: int = 0
    out: str | None = None
    alpha_grid: tuple[float, ...] = (0.5, 1.5, 2.0)
    quantities: tuple[str, ...] = DEFAULT_QUANTITIES
    ordering: Ordering = Ordering.TAU_OMEGA_THETA
    supp_tol: float = SUPP_TOL
    search: StateSearchConfig = field(default_factory=StateSearchConfig)
    state_file: str | None = None
    partition: Partition | None = None
    suites: tuple[str, ...] = ()
    trials: int | None = None
    tol: float | None = None
    sweep: SweepConfig | None = None
    fail_on_violation: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("compute", "verify", "sweep"):
            raise ConfigError(f"mode: unknown mode {self.mode!r}")
        for q in self.quantities:
            if q not in QUANTITIES:
                raise ConfigError(f"--quantities: unknown quantity {q!r}; choose from {', '.join(QUANTITIES)}")
        for a in self.alpha_grid:
            if not (math.isfinite(a) and a > 0):
                raise ConfigError(f"--alpha: each value must be positive and finite, got {a!r}")
        if not 0 < self.supp_tol < 1:
            raise ConfigError("--tol-supp: must lie in (0, 1)")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("--trials: must be at least 1")
        if self.tol is not None and not self.tol >= 0:
            raise ConfigError("--tol: must be non-negative")
        if self.mode == "compute" and (self.state_file is None or self.partition is None):
            raise ConfigError("compute needs a state file and --partition")


def _floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{flag}: empty list")
    return vals


def _ints(text: str, flag: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------
def compute_rows(rho, cfg: CampaignConfig) -> list[dict]:
    """One row per ``(quantity, alpha)``: value, support flag and warnings."""
    cfg.partition.validate(rho.layout)
    rows = []
    for name in cfg.quantities:
        q = QUANTITIES[name]
        for alpha in cfg.alpha_grid if q.uses_alpha else (math.nan,):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", ConditioningWarning)
                value = float(q.fn(rho, cfg.partition, alpha, cfg))
            msgs = sorted({str(w.message) for w in caught if issubclass(w.category, ConditioningWarning)})
            rows.append(
                {
                    "quantity": name,
                    "alpha": "" if math.isnan(alpha) else format_float(alpha),
                    "value": format_float(value),
                    "support_violated": "true" if math.isinf(value) else "false",
                    "warnings": "; ".join(msgs),
                }
            )
    return rows


def _cmd_compute(cfg: CampaignConfig, out: TextIO) -> int:
    rho = read_state(cfg.state_file)
    rows = compute_rows(rho, cfg)
    w = csv.DictWriter(out, fieldnames=["quantity", "alpha", "value", "support_violated", "warnings"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------
def _cmd_verify(cfg: CampaignConfig, out: TextIO) -> int:
    ok = True
    for name in cfg.suites:
        rep = run_suite(name, cfg.seed, cfg.trials or 50, cfg.tol)
        for line in rep.lines():
            out.write(line + "\n")
        ok = ok and rep.passed
    out.write(("all properties passed" if ok else "some properties FAILED") + "\n")
    return EXIT_OK if ok else EXIT_PROPERTY


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------
def _cmd_sweep(cfg: CampaignConfig, out: TextIO) -> int:
    records = run_sweep(cfg.sweep)
    write_sweep_csv(records, out)
    summ = summarize(records)
    viol = sum(s.violations for s in summ)
    tagged = sum(s.tagged for s in summ)
    failed = sum(s.failed for s in summ)
    sys.stderr.write(
        f"sweep: {len(records)} trials over {len(summ)} gamma values; "
        f"untagged violations={viol} tagged={tagged} failed={failed}\n"
    )
    return EXIT_PROPERTY if (cfg.fail_on_violation and viol) else EXIT_OK


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rcmi", description="Renyi conditional mutual information toolkit.")
    p.add_argument("--version", action="version", version=f"rcmi {__version__}")
    sub = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)

    def common(sp, seed_default: int | None = 0):
        sp.add_argument("--seed", type=int, default=seed_default, help="master seed")
        sp.add_argument("--out", help="output file (default stdout)")

    c = sub.add_parser("compute", help="evaluate quantities of a state file")
    c.add_argument("state_file", help="JSON state file")
    c.add_argument("--partition", required=True, help="groups 'A|B|C' or 'A|B|C|D'; commas join systems in a group")
    c.add_argument("--quantities", default=",".join(DEFAULT_QUANTITIES), help=f"comma list from: {', '.join(QUANTITIES)}; or 'all'")
    c.add_argument("--alpha", default="0.5,1.5,2", help="comma list of alpha values")
    c.add_argument("--ordering", default="tau-omega-theta", help="operator ordering for delta quantities")
    c.add_argument("--restarts", type=int, default=None, help="optimizer restarts (optimized quantities)")
    c.add_argument("--max-evals", type=int, default=None, help="optimizer evaluations per run")
    c.add_argument("--tol-supp", type=float, default=SUPP_TOL, help="relative support cutoff")
    common(c)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("suite", help=f"suite name or 'all': {', '.join(suite_names())}")
    v.add_argument("--trials", type=int, default=50)
    v.add_argument("--tol", type=float, default=None, help="replace every tolerance of the suite")
    common(v)

    s = sub.add_parser("sweep", help="derivative-numerator sign study")
    s.add_argument("config", nargs="?", help="JSON sweep config (flags override it)")
    s.add_argument("--preset", choices=("full", "desk", "smoke"), help="start from a named preset")
    s.add_argument("--family", choices=("nonsandwiched", "sandwiched"))
    s.add_argument("--ordering")
    s.add_argument("--gamma-start", type=float)
    s.add_argument("--gamma-end", type=float)
    s.add_argument("--gamma-step", type=float)
    s.add_argument("--trials", type=int, help="trials per gamma")
    s.add_argument("--dims", help="local dimensions of A,B,C, e.g. 2,3,2")
    s.add_argument("--random-dims", action="store_true", default=None, help="draw each dimension from 2..dims per trial")
    s.add_argument("--tol-violation", type=float)
    s.add_argument("--tol-tag", type=float, help="relative round-off level for tagging")
    s.add_argument("--check-fd", action="store_true", default=None, help="cross-check derivatives by finite differences")
    s.add_argument("--classical", action="store_true", default=None, help="sample commuting inputs only")
    s.add_argument("--fail-on-violation", action="store_true", help="exit 1 if an untagged violation occurs")
    common(s, seed_default=None)
    return p


def config_from_args(ns: argparse.Namespace) -> CampaignConfig:
    """Translate parsed flags into a validated :class:`CampaignConfig`."""
    if ns.mode == "compute":
        quantities = tuple(QUANTITIES) if ns.quantities == "all" else tuple(q.strip() for q in ns.quantities.split(",") if q.strip())
        search = StateSearchConfig()
        if ns.restarts is not None:
            search = replace(search, restarts=ns.restarts)
        if ns.max_evals is not None:
            search = replace(search, max_evals=ns.max_evals)
        return CampaignConfig(
            mode="compute",
            seed=ns.seed,
            out=ns.out,
            alpha_grid=_floats(ns.alpha, "--alpha"),
            quantities=quantities,
            ordering=Ordering.parse(ns.ordering),
            supp_tol=ns.tol_supp,
            search=search,
            state_file=ns.state_file,
            partition=Partition.parse(ns.partition),
        )
    if ns.mode == "verify":
        suites = tuple(suite_names()) if ns.suite == "all" else (ns.suite,)
        return CampaignConfig(mode="verify", seed=ns.seed, out=ns.out, suites=suites, trials=ns.trials, tol=ns.tol)
    # sweep
    overrides: dict = {}
    for flag, key in (
        ("family", "family"),
        ("ordering", "ordering"),
        ("gamma_start", "gamma_start"),
        ("gamma_end", "gamma_end"),
        ("gamma_step", "gamma_step"),
        ("trials", "trials_per_gamma"),
        ("random_dims", "random_dims"),
        ("tol_violation", "tol_violation"),
        ("tol_tag", "tag_rel"),
        ("check_fd", "check_fd"),
        ("classical", "classical"),
    ):
        val = getattr(ns, flag)
        if val is not None:
            overrides[key] = val
    if ns.dims is not None:
        overrides["dims"] = list(_ints(ns.dims, "--dims"))
    if ns.seed is not None:
        overrides["seed"] = ns.seed
    if ns.config is not None and ns.preset is not None:
        raise ConfigError("give either a config file or --preset, not both")
    if ns.config is not None:
        base = read_sweep_config(ns.config)
    elif ns.preset is not None:
        base = sweep_preset(ns.preset, overrides.get("family", "nonsandwiched"))
    else:
        base = sweep_preset("desk", overrides.get("family", "nonsandwiched"))
    sweep = sweep_config_from_mapping(overrides, base=base, source="flags")
    return CampaignConfig(mode="sweep", seed=sweep.seed, out=ns.out, sweep=sweep, fail_on_violation=ns.fail_on_violation)


def run(cfg: CampaignConfig, out: TextIO) -> int:
    handlers = {"compute": _cmd_compute, "verify": _cmd_verify, "sweep": _cmd_sweep}
    return handlers[cfg.mode](cfg, out)


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                return run(cfg, fh)
        return run(cfg, sys.stdout)
    except InputError as exc:
        sys.stderr.write(f"rcmi: input error: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        sys.stderr.write(f"rcmi: numerical error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL
    except RCMIError as exc:
        sys.stderr.write(f"rcmi: error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        sys.stderr.write(f"rcmi: input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
