"""Command-line front end.

Every subcommand writes a CSV table (to ``--out`` or stdout).  Options may
also come from a ``--config`` file of ``key = value`` lines (``#`` starts a
comment; keys are option names with ``-`` or ``_``); explicit flags win.

Exit status: 0 on success, 1 for model or I/O errors, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from . import bandwidth, mismatch
from .codebook import codebook_config_for, simulate
from .core import OBSERVATIONS, SchemeParams, build_joint_model
from .designs import (
    combined_design,
    default_design,
    gen_hda_design,
    hda_costa_design,
    hda_wz_design,
    modified_exponent_design,
)
from .errors import HdaError, InfeasibleDesignError
from .montecarlo import ESTIMATORS, McConfig, analytic_distortion, mc_validate
from .optimize import golden_section_minimize

__all__ = ["main", "SweepSpec", "run_sweep", "parse_grid", "snr_to_noise", "format_csv", "SWEEP_SCHEMES"]

SWEEP_SCHEMES = ("hda-costa", "combined", "hda-wz", "gen-hda", "modified", "naive",
                 "digital-costa", "digital-wz")
_INTERFERENCE_SCHEMES = {"hda-costa", "combined", "gen-hda", "modified", "digital-costa"}

SWEEP_HEADER = ("scheme", "designed_snr_db", "actual_snr_db", "d_source", "d_interference", "flag")
REGION_HEADER = ("a", "b", "c", "d1", "d2")
MC_HEADER = ("scheme", "designed_snr_db", "actual_snr_db", "trials", "analytic_d", "empirical_d",
             "stderr", "z_score")
CODEBOOK_HEADER = ("n", "r1", "decode_error_rate", "empirical_mse", "mean_tx_power")
OPTIMIZE_HEADER = ("mode", "a_star", "d_star", "a_star_oracle", "delta")
EXPONENT_HEADER = ("curve", "lo", "hi", "zeta")


class UsageError(Exception):
    """Bad option value or config file; maps to exit status 2."""


# ---------------------------------------------------------------- helpers


def snr_to_noise(snr_db: float, power: float = 1.0) -> float:
    """Noise variance giving ``10 log10(power / noise) = snr_db``."""
    return power * 10.0 ** (-snr_db / 10.0)


def parse_grid(text: str) -> tuple[float, ...]:
    """``lo:hi:step`` with both endpoints included."""
    try:
        lo, hi, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must be lo:hi:step, got {text!r}") from None
    if not step > 0 or hi < lo:
        raise UsageError(f"grid needs step > 0 and hi >= lo, got {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + k * step, 12) for k in range(count))


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _count(text: str) -> int:
    """Positive integer, also accepting forms like ``1e6``."""
    value = float(text)
    if not value.is_integer() or value < 1:
        raise ValueError(text)
    return int(value)


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return f"{float(value):.9g}"


def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str) -> None:
    if out in ("", "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; keys are normalized to underscores."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for num, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{num}: expected 'key = value'")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------- options

# name -> (converter, default, help).  Defaults of None mean "not set".
_OPTIONS: dict[str, tuple[Callable[[str], object], object, str]] = {
    "p": (float, 1.0, "transmit power P"),
    "q": (float, 1.0, "interference variance Q"),
    "sigma_v2": (float, 1.0, "source variance"),
    "sigma_z2": (float, None, "side-information innovation variance (default: sigma-v2)"),
    "design_snr_db": (float, 10.0, "designed SNR in dB, 10 log10(P / sigma^2)"),
    "actual_snr_db": (_float_list, None, "actual SNR(s) in dB, comma separated"),
    "snr_grid": (parse_grid, None, "actual-SNR grid lo:hi:step in dB, endpoints included"),
    "lambda": (float, 0.5, "bandwidth ratio"),
    "epsilon": (float, 0.0, "rate-window slack"),
    "trials": (_count, None, "Monte Carlo trials"),
    "seed": (int, None, "random seed (required by randomized subcommands)"),
    "out": (str, "-", "output CSV path, '-' for stdout"),
    "schemes": (_name_list, ("hda-costa", "digital-costa"), "comma-separated schemes for sweep"),
    "scheme": (str, "hda-costa", "scheme for mc"),
    "rate": (float, None, "digital rate in bits for layered schemes (default: half capacity)"),
    "estimator": (str, "published", "mc estimator: " + " or ".join(ESTIMATORS)),
    "workers": (int, 1, "worker threads (results do not depend on it)"),
    "snr1_db": (float, 0.0, "weak-user SNR in dB (region)"),
    "snr2_db": (float, 5.0, "strong-user SNR in dB (region)"),
    "grid_n": (int, 200, "points per axis of the region grid"),
    "n": (_int_list, (4, 8, 16), "blocklengths for codebook"),
    "r1": (float, None, "codebook rate in bits (default: rate_lower + r1-offset)"),
    "r1_offset": (float, 0.1, "codebook rate above the lower window edge, bits"),
    "lo": (float, 1e-6, "lower noise variance for exponent fits"),
    "hi": (float, 1e-4, "upper noise variance for exponent fits"),
}

_COMMON = ("p", "q", "sigma_v2", "sigma_z2", "design_snr_db", "actual_snr_db", "snr_grid",
           "lambda", "epsilon", "trials", "seed", "out", "config")

_SUBCOMMANDS = {
    "sweep": ("mismatch distortion over an actual-SNR grid", ("schemes", "rate")),
    "region": ("broadcast distortion-region frontier", ("snr1_db", "snr2_db", "grid_n")),
    "mc": ("Monte Carlo check of a scheme's estimator", ("scheme", "rate", "estimator", "workers")),
    "codebook": ("finite-blocklength codebook simulation", ("n", "r1", "r1_offset", "workers")),
    "optimize": ("bandwidth-compression power allocation", ()),
    "exponent": ("fitted distortion exponents", ("lo", "hi")),
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdajscc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, (help_text, extra) in _SUBCOMMANDS.items():
        sp = sub.add_parser(cmd, help=help_text, description=help_text)
        for name in _COMMON + extra:
            if name == "config":
                sp.add_argument("--config", default=argparse.SUPPRESS, help="key = value config file")
                continue
            conv, _, help_opt = _OPTIONS[name]
            sp.add_argument(_flag(name), dest=name, type=str, default=argparse.SUPPRESS,
                            metavar=name.upper(), help=help_opt)
    return parser


def resolve_options(command: str, explicit: dict[str, str]) -> dict[str, object]:
    """Merge built-in defaults, the config file and explicit flags (in that order)."""
    allowed = set(_COMMON + _SUBCOMMANDS[command][1]) - {"config"}
    raw: dict[str, str] = {}
    if "config" in explicit:
        try:
            cfg = read_config(explicit["config"])
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        unknown = sorted(set(cfg) - allowed)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        raw.update(cfg)
    raw.update({k: v for k, v in explicit.items() if k != "config"})
    opts: dict[str, object] = {}
    for name in allowed:
        conv, default, _ = _OPTIONS[name]
        if name in raw:
            try:
                opts[name] = conv(raw[name])
            except ValueError:
                raise UsageError(f"invalid value for {_flag(name)}: {raw[name]!r}") from None
        else:
            opts[name] = default
    if opts.get("actual_snr_db") is not None and opts.get("snr_grid") is not None:
        raise UsageError("give either --actual-snr-db or --snr-grid, not both")
    return opts


def _actual_grid(opts, default):
    if opts.get("snr_grid") is not None:
        return opts["snr_grid"]
    if opts.get("actual_snr_db") is not None:
        return opts["actual_snr_db"]
    return default


def _params(opts, actual_snr_db=None) -> SchemeParams:
    P = opts["p"]
    design_noise = snr_to_noise(opts["design_snr_db"], P)
    actual = design_noise if actual_snr_db is None else snr_to_noise(actual_snr_db, P)
    return SchemeParams(
        power_P=P,
        design_noise=design_noise,
        interference_Q=opts["q"],
        source_var=opts["sigma_v2"],
        innovation_var=opts["sigma_z2"],
        actual_noise=actual,
        epsilon=opts["epsilon"],
        bandwidth_ratio=opts["lambda"],
    )


# ---------------------------------------------------------------- sweep


@dataclass(frozen=True)
class SweepSpec:
    """Everything that defines a sweep; ``to_config``/``from_config`` round-trip it."""

    schemes: tuple[str, ...]
    design_snr_db: float
    actual_snr_db: tuple[float, ...]
    p: float = 1.0
    q: float = 1.0
    sigma_v2: float = 1.0
    sigma_z2: float | None = None
    lam: float = 0.5
    epsilon: float = 0.0
    rate: float | None = None
    out: str = "-"

    def __post_init__(self):
        if not self.schemes:
            raise UsageError("at least one scheme is required")
        bad = [s for s in self.schemes if s not in SWEEP_SCHEMES]
        if bad:
            raise UsageError(f"unknown schemes {bad}; choose from {', '.join(SWEEP_SCHEMES)}")
        if not self.actual_snr_db:
            raise UsageError("actual-SNR grid is empty")

    def to_config(self) -> str:
        lines = [
            f"schemes = {','.join(self.schemes)}",
            f"design_snr_db = {self.design_snr_db!r}",
            f"actual_snr_db = {','.join(repr(float(x)) for x in self.actual_snr_db)}",
            f"p = {self.p!r}",
            f"q = {self.q!r}",
            f"sigma_v2 = {self.sigma_v2!r}",
            f"lambda = {self.lam!r}",
            f"epsilon = {self.epsilon!r}",
            f"out = {self.out}",
        ]
        if self.sigma_z2 is not None:
            lines.append(f"sigma_z2 = {self.sigma_z2!r}")
        if self.rate is not None:
            lines.append(f"rate = {self.rate!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_options(cls, opts) -> SweepSpec:
        return cls(
            schemes=tuple(opts["schemes"]),
            design_snr_db=opts["design_snr_db"],
            actual_snr_db=tuple(_actual_grid(opts, parse_grid("0:20:0.5"))),
            p=opts["p"], q=opts["q"], sigma_v2=opts["sigma_v2"], sigma_z2=opts["sigma_z2"],
            lam=opts["lambda"], epsilon=opts["epsilon"], rate=opts["rate"], out=opts["out"],
        )

    @classmethod
    def from_config(cls, path: str) -> SweepSpec:
        return cls.from_options(resolve_options("sweep", {"config": path}))

    def options(self) -> dict[str, object]:
        return {"p": self.p, "q": self.q, "sigma_v2": self.sigma_v2, "sigma_z2": self.sigma_z2,
                "design_snr_db": self.design_snr_db, "lambda": self.lam, "epsilon": self.epsilon}


def _sweep_cell(scheme: str, params: SchemeParams, rate: float | None):
    """``(d_source, d_interference, flag)`` for one scheme at ``params.actual_noise``."""
    P, Q, s2, sa2 = params.power_P, params.interference_Q, params.design_noise, params.actual_noise
    sv2, sz2 = params.source_var, params.innovation_var
    beyond = sa2 > s2
    flag = "decode-threshold" if beyond else "ok"
    d_int = None
    if scheme == "hda-costa":
        hda_costa_design(params)
        d_src = mismatch.mismatch_source_distortion(P, Q, s2, sa2, sv2)
        d_int = mismatch.mismatch_interference_distortion(P, Q, s2, sa2)
    elif scheme == "combined":
        combined_design(params)
        d_src = mismatch.mismatch_source_distortion(P, Q, s2, sa2, sz2)
        d_int = mismatch.mismatch_interference_distortion(P, Q, s2, sa2)
    elif scheme == "hda-wz":
        hda_wz_design(params)
        d_src = mismatch.wz_mismatch_bounds(P, s2, sa2, sz2).d_hda
    elif scheme == "gen-hda":
        r = 0.5 * params.capacity_bits if rate is None else rate
        gen_hda_design(params, r)
        rep = mismatch.gen_hda_mismatch(P, Q, s2, sa2, sv2, r)
        d_src, d_int = rep.d_source, rep.d_interference
    elif scheme == "modified":
        md = default_design("modified", params)
        d_src = mismatch.modified_mismatch_distortion(P, Q, sz2, sa2, md.kappa_e_sq)
        d_int = build_joint_model("modified", params, md).mmse("S", OBSERVATIONS["modified"]).mmse
        flag = "ok"
    elif scheme == "naive":
        d_src = mismatch.naive_analog_distortion(P / sv2, sa2, sz2)
        flag = "ok"
    elif scheme == "digital-costa":
        d_src = float(mismatch.digital_costa_distortion(P, s2, sa2, sv2))
        if beyond:
            d_int = Q * (P + sa2) / (P + Q + sa2)
        else:
            d_int = mismatch.gen_hda_mismatch(P, Q, s2, sa2, sv2, params.capacity_bits).d_interference
    elif scheme == "digital-wz":
        d_src = float(mismatch.digital_wz_distortion(P, s2, sa2, sz2))
    else:
        raise UsageError(f"unknown scheme {scheme!r}")
    if scheme not in _INTERFERENCE_SCHEMES or Q == 0:
        d_int = None
    return d_src, d_int, flag


def run_sweep(spec: SweepSpec) -> str:
    """CSV text for ``spec``; infeasible cells are rows flagged ``infeasible``."""
    rows = []
    base = spec.options()
    for scheme in spec.schemes:
        for snr in spec.actual_snr_db:
            params = _params(base, snr)
            try:
                d_src, d_int, flag = _sweep_cell(scheme, params, spec.rate)
            except InfeasibleDesignError:
                d_src, d_int, flag = None, None, "infeasible"
            rows.append((scheme, spec.design_snr_db, snr, d_src, d_int, flag))
    return format_csv(SWEEP_HEADER, rows)


# ---------------------------------------------------------------- other subcommands


def _cmd_sweep(opts) -> str:
    return run_sweep(SweepSpec.from_options(opts))


def trace_region(snr1_db: float, snr2_db: float, grid_n: int) -> str:
    if not snr2_db > snr1_db:
        raise UsageError("the strong user's SNR (--snr2-db) must exceed the weak user's")
    pts = bandwidth.broadcast_region(snr_to_noise(snr1_db), snr_to_noise(snr2_db), grid_n)
    return format_csv(REGION_HEADER, ((p.powers.a, p.powers.b, p.powers.c, p.d1, p.d2) for p in pts))


def _cmd_region(opts) -> str:
    return trace_region(opts["snr1_db"], opts["snr2_db"], opts["grid_n"])


def _require_seed(opts) -> int:
    if opts.get("seed") is None:
        raise UsageError("this subcommand needs an explicit --seed")
    return opts["seed"]


def _cmd_mc(opts) -> str:
    seed = _require_seed(opts)
    trials = opts["trials"] or 100_000
    scheme = opts["scheme"]
    if scheme not in OBSERVATIONS:
        raise UsageError(f"unknown scheme {scheme!r}; choose from {', '.join(OBSERVATIONS)}")
    if opts["estimator"] not in ESTIMATORS:
        raise UsageError(f"--estimator must be one of {ESTIMATORS}")
    rows = []
    for snr in _actual_grid(opts, (opts["design_snr_db"],)):
        params = _params(opts, snr)
        rate = opts["rate"]
        if scheme in ("gen-hda", "superposition-costa", "superimposed-wz") and rate is None:
            rate = 0.5 * params.capacity_bits
        design = default_design(scheme, params, rate)
        cfg = McConfig(scheme, params, design, trials, seed, opts["estimator"])
        stats = mc_validate(cfg, workers=opts["workers"])
        analytic = analytic_distortion(cfg)
        z = (stats.empirical_d - analytic) / stats.stderr if stats.stderr > 0 else 0.0
        rows.append((scheme, opts["design_snr_db"], snr, trials, analytic, stats.empirical_d,
                     stats.stderr, z))
    return format_csv(MC_HEADER, rows)


def _cmd_codebook(opts) -> str:
    seed = _require_seed(opts)
    trials = opts["trials"] or 10_000
    params = _params(opts, (opts["actual_snr_db"] or (None,))[0])
    design = hda_costa_design(params)
    r1 = opts["r1"] if opts["r1"] is not None else design.rate_lower + opts["r1_offset"]
    rows = []
    for n in opts["n"]:
        cfg = codebook_config_for(params, design, n, r1, seed=seed)
        st = simulate(cfg, params, design, trials, seed, workers=opts["workers"])
        rows.append((n, r1, st.decode_error_rate, st.empirical_mse, st.mean_tx_power))
    return format_csv(CODEBOOK_HEADER, rows)


def _cmd_optimize(opts) -> str:
    noise = snr_to_noise(opts["design_snr_db"])
    lam = opts["lambda"]
    objectives = {"superposition": bandwidth.superposition_objective, "costa": bandwidth.costa_objective}
    rows = []
    for mode in bandwidth.BC_MODES:
        alloc = bandwidth.bc_optimal_power(noise, lam, mode)
        f = objectives[mode]
        a_or, _ = golden_section_minimize(lambda a: f(a, noise, lam), 0.0, 1.0, tol=1e-12)
        rows.append((mode, alloc.a_star, alloc.d_star, a_or, abs(alloc.a_star - a_or)))
    return format_csv(OPTIMIZE_HEADER, rows)


def _cmd_exponent(opts) -> str:
    P, Q = opts["p"], opts["q"]
    s2 = snr_to_noise(opts["design_snr_db"], P)
    sz2 = opts["sigma_z2"] if opts["sigma_z2"] is not None else opts["sigma_v2"]
    lo, hi = opts["lo"], opts["hi"]
    curves = {
        "hda-q0": lambda sa2: mismatch.mismatch_source_distortion(P, 0.0, s2, sa2, sz2),
        "hda-costa": lambda sa2: mismatch.mismatch_source_distortion(P, Q, s2, sa2, sz2),
    }
    md = modified_exponent_design(P, Q, s2, sz2)
    if md.feasible:
        curves["modified"] = lambda sa2: mismatch.modified_mismatch_distortion(P, Q, sz2, sa2, md.kappa_e_sq)
    rows = [(name, lo, hi, mismatch.exponent_estimate(c, lo, hi)) for name, c in curves.items()]
    return format_csv(EXPONENT_HEADER, rows)


_HANDLERS = {
    "sweep": _cmd_sweep,
    "region": _cmd_region,
    "mc": _cmd_mc,
    "codebook": _cmd_codebook,
    "optimize": _cmd_optimize,
    "exponent": _cmd_exponent,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    explicit = {k: v for k, v in vars(ns).items() if k != "command"}
    try:
        opts = resolve_options(ns.command, explicit)
        text = _HANDLERS[ns.command](opts)
        _emit(text, opts["out"])
    except UsageError as exc:
        print(f"hdajscc {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except (HdaError, OSError) as exc:
        print(f"hdajscc {ns.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
