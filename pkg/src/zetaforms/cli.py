"""Command line front end.

Every subcommand builds its objects through the library modules, runs the
verifications those modules embed, and writes a report.  JSON reports have
the shape {"schema": 1, "meta": {...}, "body": {...}} where the body is a
pure function of the run configuration (timestamps and versions live only
in meta), so two runs with the same configuration produce byte-identical
bodies.  Exit codes: 0 all verifications passed, 1 a verification failed,
2 usage error, 3 a numeric computation could not be certified.

Defaults come from, in increasing precedence: built-ins, the
ZETAFORMS_PRECISION_BITS environment variable (precision only), a
key=value config file passed with --config, explicit flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

import mpmath
from mpmath import mp

from . import __version__
from . import bound as bound_mod
from . import cotk as cotk_mod
from . import hurwitz as hurwitz_mod
from . import linform as linform_mod
from . import quadrature as quad_mod
from . import saddle as saddle_mod
from .errors import (
    NumericError,
    PrecisionUnderflow,
    StructuralError,
    ValidationError,
    VerificationError,
    ZetaformsError,
)
from .params import Params, lcm_upto

ENV_PRECISION = "ZETAFORMS_PRECISION_BITS"
DEFAULT_BITS = 256

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

COMMANDS = (
    "coeffs",
    "linform",
    "zeta",
    "cotk",
    "saddle",
    "census",
    "quadrature",
    "fit",
    "bound",
    "scan",
    "verify-all",
)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """A fully resolved invocation; ``run`` is a pure function of this."""

    command: str
    k: int | None = None
    q: int | None = None
    r: int | None = None
    n: int | None = None
    a: int | None = None
    lam: float | None = None
    mu: str | None = None
    height: str | None = None
    panels: int | None = None
    terms: int | None = None
    n_list: tuple | None = None
    q_grid: tuple | None = None
    mode: str | None = None
    emit_table: bool = False
    precision_bits: int = DEFAULT_BITS
    output: str | None = None
    format: str = "json"
    jobs: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if not (isinstance(self.precision_bits, int) and self.precision_bits >= 64):
            raise ValidationError(
                f"--precision-bits must be an integer >= 64, got {self.precision_bits!r}"
            )
        if self.format not in ("json", "csv"):
            raise ValidationError(f"--format must be json or csv, got {self.format!r}")
        if not (isinstance(self.jobs, int) and self.jobs >= 1):
            raise ValidationError(f"--jobs must be an integer >= 1, got {self.jobs!r}")


# ----------------------------------------------------------------- helpers


def _err_exp(x) -> int | None:
    """Smallest integer e with |x| <= 2^e, or None when x == 0 exactly."""
    if x == 0:
        return None
    return int(mp.mag(x))


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(cfg, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise ValidationError(f"command {cfg.command!r} requires {flags}")


def _params(cfg: RunConfig) -> Params:
    _require(cfg, "k", "q", "r", "n")
    return Params(k=cfg.k, q=cfg.q, r=cfg.r, n=cfg.n, mode=cfg.mode or "strict")


def _params_dict(p: Params) -> dict:
    return {"k": p.k, "q": p.q, "r": p.r, "n": p.n, "mode": p.mode}


def _rational_str(x) -> str:
    return str(x)


def _zeta_route_reference(p: Params, form, bits: int):
    """The certified exact-route S_n, raising the working precision until
    the cancellation among the rho coefficients is absorbed."""
    zbits = bits
    while True:
        try:
            return linform_mod.s_n_via_zeta(p, form, zbits)
        except PrecisionUnderflow:
            if zbits >= 1 << 22:
                raise
            zbits *= 2


def _parse_int_list(text: str) -> tuple:
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            out.append(int(piece))
        except ValueError:
            value = float(piece)
            if value != int(value):
                raise ValidationError(f"expected an integer, got {piece!r}") from None
            out.append(int(value))
    if not out and text.strip():
        raise ValidationError(f"could not parse integer list {text!r}")
    return tuple(out)


def load_config_file(path: str) -> dict:
    """key=value lines; '#' starts a comment; unknown keys are ignored at
    merge time so one file can serve several subcommands."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValidationError(
                        f"{path}:{lineno}: expected key=value, got {line!r}"
                    )
                key, _, value = line.partition("=")
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    return values


_INT_KEYS = {"k", "q", "r", "n", "a", "panels", "terms", "jobs", "precision_bits"}
_FLOAT_KEYS = {"lam"}
_LIST_KEYS = {"n_list", "q_grid"}
_BOOL_KEYS = {"emit_table"}


def _coerce(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    if key in _INT_KEYS:
        return int(float(value)) if ("e" in value or "." in value) else int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _LIST_KEYS:
        return _parse_int_list(value)
    if key in _BOOL_KEYS:
        return value.lower() in ("1", "true", "yes", "on")
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    resolved = {"command": args.command}
    for name in fields - {"command"}:
        value = getattr(args, name, None)
        if value is None and name in file_values:
            value = file_values[name]
        resolved[name] = _coerce(name, value)
    if resolved.get("precision_bits") is None:
        env = os.environ.get(ENV_PRECISION)
        if env is not None:
            try:
                resolved["precision_bits"] = int(env)
            except ValueError:
                raise ValidationError(
                    f"{ENV_PRECISION} must be an integer, got {env!r}"
                ) from None
        else:
            resolved["precision_bits"] = DEFAULT_BITS
    if resolved.get("format") is None:
        scanning = args.command == "scan" or (
            args.command == "bound" and resolved.get("mode") == "scan"
        )
        resolved["format"] = "csv" if scanning else "json"
    if resolved.get("jobs") is None:
        resolved["jobs"] = 1
    if resolved.get("emit_table") is None:
        resolved["emit_table"] = False
    if resolved.get("n_list") is not None and not isinstance(resolved["n_list"], tuple):
        resolved["n_list"] = tuple(resolved["n_list"])
    if resolved.get("q_grid") is not None and not isinstance(resolved["q_grid"], tuple):
        resolved["q_grid"] = tuple(resolved["q_grid"])
    return RunConfig(**resolved)


# -------------------------------------------------------------- subcommands


def _cmd_coeffs(cfg: RunConfig):
    p = _params(cfg)
    table = linform_mod.build_coefficients(p)
    growth = linform_mod.coefficient_growth(table, bits=128)
    if cfg.format == "csv":
        return True, linform_mod.export_coefficients_csv(table)
    body = {
        "params": _params_dict(p),
        "degree": p.rqn,
        "coefficient_count": p.rqn + 1,
        "d_exponent": -(p.delta_k + (p.r - 2 * p.k) * p.qn),
        "max_abs_digits": max(len(str(abs(c))) for c in table.c),
        "growth": {
            "slope": mpmath.nstr(growth.slope, 15),
            "beta": mpmath.nstr(growth.beta, 15),
            "within_bound": growth.ok,
        },
        "checks": {"integrality": True, "symmetry": True},
    }
    if cfg.emit_table:
        body["coefficients"] = [str(c) for c in table.c]
    return True, body


def _cmd_linform(cfg: RunConfig):
    p = _params(cfg)
    bits = cfg.precision_bits
    table = linform_mod.build_coefficients(p)
    form = linform_mod.rho(p, table)
    route = linform_mod.s_n_via_zeta(p, form, bits)
    dps = int(bits * 0.30103) + 3
    with mp.workprec(bits + 16):
        body = {
            "params": _params_dict(p),
            "rho": {
                "rho0": _rational_str(form.rho0),
                "rho1": _rational_str(form.rho1),
                "rho1_prime": _rational_str(form.rho1_prime),
                "rho_half": None
                if form.rho_half is None
                else _rational_str(form.rho_half),
                "rho_a": {
                    str(a): _rational_str(v) for a, v in sorted(form.rho_a.items())
                },
            },
            "integrality": {
                "q_rho1": (p.q * form.rho1).denominator == 1,
                "q_rho_a": all(
                    (p.q * v).denominator == 1 for v in form.rho_a.values()
                ),
                "dk_rho0": (lcm_upto(p.rqn) ** p.k * form.rho0).denominator == 1,
            },
            "s_n": {
                "value": mpmath.nstr(route.value, dps),
                "err2exp": _err_exp(route.err_bound),
                "log_abs": mpmath.nstr(mp.log(abs(route.value)), 20),
            },
        }
    return True, body


def _cmd_zeta(cfg: RunConfig):
    _require(cfg, "k", "a", "q")
    bits = cfg.precision_bits
    value = hurwitz_mod.hurwitz_zeta(cfg.k, cfg.a, cfg.q, bits)
    body = {"zeta": value.as_dict()}
    if 1 <= cfg.a < cfg.q:
        pair = hurwitz_mod.zeta_pair(cfg.k, cfg.a, cfg.q, bits)
        dps = int(bits * 0.30103) + 3
        body["pair"] = {
            "plus": mpmath.nstr(pair.plus, dps),
            "minus": mpmath.nstr(pair.minus, dps),
            "err2exp": pair.err2exp,
        }
    return True, body


def _cmd_cotk(cfg: RunConfig):
    _require(cfg, "k")
    expansion = cotk_mod.expansion(cfg.k)
    total = sum(expansion.c.values(), Fraction(0))
    bits = min(cfg.precision_bits, 512)
    with mp.workprec(bits + 32):
        z = mp.mpc(3, 2) / 10
        direct = cotk_mod.cotk_eval(cfg.k, z, bits)
        cosine = cotk_mod.cotk_eval_cosine(cfg.k, z, bits)
        residual = abs(direct - cosine)
    ok = total == 1 and residual < mp.ldexp(1, -(bits - 8))
    body = {
        "k": cfg.k,
        "cosine_table": {str(l): str(c) for l, c in sorted(expansion.c.items())},
        "sum_is_one": total == 1,
        "route_residual_2exp": _err_exp(residual),
    }
    return ok, body


def _cmd_saddle(cfg: RunConfig):
    _require(cfg, "k", "q", "r")
    ctx = saddle_mod.PhaseContext(k=cfg.k, q=cfg.q, r=cfg.r)
    bits = cfg.precision_bits
    lam = cfg.lam if cfg.lam is not None else cfg.k - 2
    with mp.workprec(bits + 64):
        mu0, mu1 = saddle_mod.mu_roots(ctx, bits=min(bits, 320))
        s = Fraction(2 * cfg.q, cfg.r)
        eta0, eta1 = saddle_mod.eta_roots(cfg.q, cfg.k, s, bits=min(bits, 320))
        body = {
            "k": cfg.k,
            "q": cfg.q,
            "r": cfg.r,
            "mu0": mpmath.nstr(mu0, 25),
            "mu1": mpmath.nstr(mu1, 25),
            "eta0": mpmath.nstr(eta0, 25),
            "eta1": mpmath.nstr(eta1, 25),
        }
        if lam == cfg.k - 2:
            data = saddle_mod.saddle_constants(ctx, bits=bits)
            body["constants"] = data.as_dict()
        else:
            point = saddle_mod.find_tau(ctx, lam, bits=bits)
            body["saddle"] = {
                "lambda": float(point.lam),
                "tau": [
                    mpmath.nstr(mp.re(point.tau), 25),
                    mpmath.nstr(mp.im(point.tau), 25),
                ],
                "residual_2exp": _err_exp(point.residual),
                "strategy": point.strategy,
            }
    return True, body


def _cmd_census(cfg: RunConfig):
    _require(cfg, "k", "q", "r")
    ctx = saddle_mod.PhaseContext(k=cfg.k, q=cfg.q, r=cfg.r)
    report = saddle_mod.p_roots_census(ctx, bits=max(cfg.precision_bits, 256))
    return True, report.as_dict()


def _cmd_quadrature(cfg: RunConfig):
    p = _params(cfg)
    bits = min(cfg.precision_bits, 512)
    table = linform_mod.build_coefficients(p)
    spec = quad_mod.ContourSpec(
        mu=cfg.mu, height=cfg.height, panels=cfg.panels or 1
    )
    contour = quad_mod.s_n_contour(p, table, spec=spec, bits=bits, jobs=cfg.jobs)
    form = linform_mod.rho(p, table)
    route = _zeta_route_reference(p, form, bits + 64)
    with mp.workprec(bits + 96):
        budget = contour.total_error + route.err_bound
        residual = abs(contour.value - route.value)
        agree = bool(residual <= budget)
        imag_ok = bool(abs(contour.imag) <= contour.total_error)
    body = {
        "params": _params_dict(p),
        "contour": {
            "value": mpmath.nstr(contour.value, 30),
            "imag_2exp": _err_exp(contour.imag),
            "delta_2exp": _err_exp(contour.delta),
            "truncation_2exp": _err_exp(contour.truncation),
            "mu": mpmath.nstr(contour.mu, 15),
            "height": mpmath.nstr(contour.height, 10),
            "panels": contour.panels,
        },
        "zeta_route": {
            "value": mpmath.nstr(route.value, 30),
            "err2exp": _err_exp(route.err_bound),
        },
        "residual_2exp": _err_exp(residual),
        "within_budget": agree,
        "imag_within_budget": imag_ok,
    }
    return agree and imag_ok, body


def _cmd_fit(cfg: RunConfig):
    _require(cfg, "k", "q", "r", "n_list")
    n0 = cfg.n_list[0] if cfg.n_list else 1
    p = Params(k=cfg.k, q=cfg.q, r=cfg.r, n=n0, mode=cfg.mode or "strict")
    report = quad_mod.asymptotic_fit(p, list(cfg.n_list), bits=cfg.precision_bits)
    if cfg.format == "csv":
        return bool(report.decreasing and report.final_ok), quad_mod.fit_report_csv(
            report
        )
    return bool(report.decreasing and report.final_ok), report.as_dict()


def _cmd_bound(cfg: RunConfig):
    if cfg.mode == "scan":
        return _cmd_scan(cfg)
    _require(cfg, "k", "q", "r")
    report = bound_mod.dimension_lower(
        cfg.k, cfg.q, cfg.r, bits=min(cfg.precision_bits, 512)
    )
    data = report.as_dict()
    if cfg.format == "csv":
        keys = (
            "k",
            "q",
            "r",
            "alpha",
            "beta",
            "alpha_hat",
            "beta_hat",
            "d_lower",
            "ratio_to_log2q",
            "vacuous",
        )
        row = ",".join(str(int(data[key]) if key == "vacuous" else data[key]) for key in keys)
        return True, ",".join(keys) + "\n" + row + "\n"
    return True, data


def _cmd_scan(cfg: RunConfig):
    _require(cfg, "k", "q_grid")
    rows = bound_mod.trend_scan(
        cfg.k, list(cfg.q_grid), bits=min(cfg.precision_bits, 512)
    )
    if cfg.format == "csv":
        return True, bound_mod.trend_scan_csv(rows)
    return True, {"k": cfg.k, "rows": [row.as_dict() for row in rows]}


# ------------------------------------------------------------- verify-all


def _verify_all(cfg: RunConfig):
    p = _params(cfg)
    bits = cfg.precision_bits
    checks = []
    state = {}

    def run_check(name, fn):
        try:
            ok, detail = fn()
        except ZetaformsError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append({"name": name, "pass": bool(ok), "detail": detail})

    def check_table():
        state["table"] = linform_mod.build_coefficients(p)
        return True, (
            f"degree {p.rqn}; integrality, symmetry and anchor values "
            "verified exactly"
        )

    def check_growth():
        growth = linform_mod.coefficient_growth(state["table"], bits=128)
        return growth.ok, (
            f"log max |C_j| / n = {mpmath.nstr(growth.slope, 12)} vs "
            f"beta = {mpmath.nstr(growth.beta, 12)}"
        )

    def check_rho():
        state["form"] = linform_mod.rho(p, state["table"])
        parts = [
            "q*rho_1, q*rho_a integral",
            f"d^k*rho_0 integral with d = lcm(1..{p.rqn})",
        ]
        if p.k % 2 == 0:
            parts.append("even-k vanishing rho'_1 = 0 holds exactly")
        return True, "; ".join(parts)

    def check_series_vs_zeta():
        state["route"] = _zeta_route_reference(p, state["form"], bits)
        route = state["route"]
        with mp.workprec(bits + 64):
            target = mp.ldexp(1, int(mp.mag(route.value)) - 72)
        terms = cfg.terms or max(256, 4 * p.qn)
        while True:
            series = linform_mod.s_n_truncated(p, state["table"], terms)
            if cfg.terms or series.tail_bound <= target or terms >= 1 << 17:
                break
            terms *= 2
        with mp.workprec(bits + 64):
            series_value = mp.mpf(series.value.numerator) / mp.mpf(
                series.value.denominator
            )
            residual = abs(series_value - route.value)
            budget = series.tail_bound + route.err_bound
        return residual <= budget, (
            f"residual 2^{_err_exp(residual)} vs budget 2^{_err_exp(budget)} "
            f"({terms} series terms)"
        )

    def check_contour_vs_zeta():
        cbits = min(bits, 128)
        contour = quad_mod.s_n_contour(
            p, state["table"], bits=cbits, jobs=cfg.jobs
        )
        with mp.workprec(cbits + 96):
            residual = abs(contour.value - state["route"].value)
            budget = contour.total_error + state["route"].err_bound
            imag_ok = abs(contour.imag) <= contour.total_error
        return bool(residual <= budget and imag_ok), (
            f"residual 2^{_err_exp(residual)} vs budget 2^{_err_exp(budget)}; "
            f"imag 2^{_err_exp(contour.imag)}"
        )

    def check_j_decomposition():
        jbits = min(bits, 160)
        expansion = cotk_mod.expansion(p.k)
        with mp.workprec(jbits + 96):
            prefactor = quad_mod.s_tilde_prefactor(p, jbits)
            stilde = mp.mpf(0)
            j_budget = mp.mpf(0)
            for l, c in sorted(expansion.c.items()):
                piece = quad_mod.j_integral(
                    p, l, bits=jbits, table=state["table"], jobs=cfg.jobs
                )
                weight = mp.mpf(c.numerator) / c.denominator
                stilde += weight * mp.re(piece.value)
                j_budget += abs(weight) * piece.total_error
            residual = abs(state["route"].value + prefactor * stilde)
            budget = state["route"].err_bound + prefactor * j_budget
        return residual <= budget, (
            f"|S_n + prefactor * sum c_l Re J| = 2^{_err_exp(residual)} vs "
            f"budget 2^{_err_exp(budget)}"
        )

    def check_cot_expansion():
        expansion = cotk_mod.expansion(p.k)
        total = sum(expansion.c.values(), Fraction(0))
        cbits = min(bits, 256)
        with mp.workprec(cbits + 32):
            z = mp.mpc(3, 2) / 10
            residual = abs(
                cotk_mod.cotk_eval(p.k, z, cbits)
                - cotk_mod.cotk_eval_cosine(p.k, z, cbits)
            )
        ok = total == 1 and residual < mp.ldexp(1, -(cbits - 8))
        return ok, (
            f"sum c_l = {total}; recurrence vs cosine route residual "
            f"2^{_err_exp(residual)}"
        )

    def check_zeta_half():
        cbits = min(bits, 1024)
        half = hurwitz_mod.hurwitz_zeta(p.k, 1, 2, cbits)
        full = hurwitz_mod.hurwitz_zeta(p.k, 1, 1, cbits)
        with mp.workprec(cbits + 32):
            residual = abs(half.value - (2**p.k - 1) * full.value)
            budget = mp.ldexp(1, half.err2exp) + (2**p.k - 1) * mp.ldexp(
                1, full.err2exp
            )
        return residual <= budget, (
            f"zeta(k,1/2) vs (2^k-1) zeta(k): residual 2^{_err_exp(residual)}"
        )

    def check_distribution():
        report = hurwitz_mod.verify_distribution(p.k, 2, 1, 3, min(bits, 256))
        return report.ok, (
            f"p=2, a/q=1/3: residual 2^{_err_exp(report.residual)} vs "
            f"threshold 2^{_err_exp(report.threshold)}"
        )

    def check_saddle():
        sbits = min(bits, 320)
        data = saddle_mod.saddle_constants(p, bits=sbits)
        state["saddle"] = data
        ok = data.residual < mp.ldexp(1, -(sbits // 2))
        return ok, (
            f"alpha = {mpmath.nstr(data.alpha, 20)}, omega = "
            f"{mpmath.nstr(data.omega, 10)}, phi = {mpmath.nstr(data.phi, 10)}, "
            f"residual 2^{_err_exp(data.residual)}"
        )

    def check_saddle_grid():
        gbits = 128
        values = []
        with mp.workprec(gbits + 64):
            for i in range(9):
                lam = (p.k - mp.mpf(2) / 10) * i / 8
                point = saddle_mod.find_tau(p, lam, bits=gbits)
                values.append(mp.re(saddle_mod.f0_eval(p, point.tau, bits=gbits)))
            increasing = all(values[i] < values[i + 1] for i in range(8))
        return increasing, (
            "Re f0(tau_lambda) strictly increasing over a 9-point grid in "
            f"[0, {mpmath.nstr(mp.mpf(p.k) - mp.mpf(2) / 10, 6)}]"
        )

    def check_census():
        degree = p.q + 2 * p.k - 1
        if degree > 60:
            return True, f"skipped: polynomial degree {degree} > 60"
        report = saddle_mod.p_roots_census(p, bits=min(bits, 512))
        return True, (
            f"counts (on_line, right, left) = ({report.on_line}, "
            f"{report.right}, {report.left}); min root distance "
            f"{mpmath.nstr(report.min_distance, 8)}"
        )

    def check_h_geometry():
        s = Fraction(2 * p.q, p.r)
        eta0, eta1 = saddle_mod.eta_roots(p.q, p.k, s, bits=128)
        scan = saddle_mod.imag_axis_scan(p.q, p.k, s, bits=128)
        with mp.workprec(160):
            limit_tol = mp.pi * mp.mpf("1e-3")
            ok = (
                scan.decreasing
                and scan.limit_zero_residual < limit_tol
                and scan.limit_infinity_residual < limit_tol
            )
        return ok, (
            f"eta0 = {mpmath.nstr(eta0, 15)}, eta1 = {mpmath.nstr(eta1, 15)}; "
            "Im h on the imaginary axis decreasing with correct limits"
        )

    def check_bound():
        report = bound_mod.dimension_lower(p.k, p.q, p.r, bits=min(bits, 256))
        examples = (
            bound_mod.nesterenko_bound(
                bound_mod.CriterionInput(alpha=3, beta=1, constant_gamma=0)
            ).d_lower
            == 4
            and bound_mod.nesterenko_bound(
                bound_mod.CriterionInput(
                    alpha=3, beta=1, constant_gamma=Fraction(1, 2)
                )
            ).d_lower
            == 7
            and bound_mod.nesterenko_bound(
                bound_mod.CriterionInput(alpha=1, beta=1, constant_gamma=1)
            ).divergent
        )
        with mp.workprec(320):
            krq = mp.mpf(p.k) * p.r * p.q
            identity = abs(
                report.d_lower - (1 + (report.alpha - krq) / report.beta)
            ) <= mp.ldexp(abs(report.d_lower) + 1, -200)
        return bool(examples and identity), (
            f"d_lower = {mpmath.nstr(report.d_lower, 15)} "
            f"(vacuous: {report.vacuous}); criterion worked examples pass"
        )

    run_check("coefficient-table", check_table)
    if "table" in state:
        run_check("coefficient-growth", check_growth)
        run_check("linear-form-integrality", check_rho)
    if "form" in state:
        run_check("series-vs-zeta", check_series_vs_zeta)
    if "route" in state:
        run_check("contour-vs-zeta", check_contour_vs_zeta)
        run_check("saddle-decomposition", check_j_decomposition)
    run_check("cot-expansion", check_cot_expansion)
    run_check("zeta-half-integer", check_zeta_half)
    run_check("distribution-relation", check_distribution)
    run_check("saddle-point", check_saddle)
    run_check("saddle-grid-monotone", check_saddle_grid)
    run_check("root-census", check_census)
    run_check("h-plane-geometry", check_h_geometry)
    run_check("dimension-bound", check_bound)

    all_pass = all(c["pass"] for c in checks)
    body = {
        "params": _params_dict(p),
        "precision_bits": bits,
        "checks": checks,
        "all_pass": all_pass,
    }
    return all_pass, body


_HANDLERS = {
    "coeffs": _cmd_coeffs,
    "linform": _cmd_linform,
    "zeta": _cmd_zeta,
    "cotk": _cmd_cotk,
    "saddle": _cmd_saddle,
    "census": _cmd_census,
    "quadrature": _cmd_quadrature,
    "fit": _cmd_fit,
    "bound": _cmd_bound,
    "scan": _cmd_scan,
    "verify-all": _verify_all,
}

_CSV_COMMANDS = {"coeffs", "fit", "scan", "bound"}


def _emit(cfg: RunConfig, payload) -> None:
    if isinstance(payload, str):
        text = payload
    else:
        doc = {
            "schema": 1,
            "meta": {
                "command": cfg.command,
                "generated_at": datetime.now(timezone.utc).isoformat(
                    timespec="seconds"
                ),
                "version": __version__,
                "precision_bits": cfg.precision_bits,
                "jobs": cfg.jobs,
            },
            "body": payload,
        }
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig) -> int:
    """Execute one resolved configuration; returns the process exit code."""
    if cfg.format == "csv" and cfg.command not in _CSV_COMMANDS:
        raise ValidationError(f"--format csv is not supported for {cfg.command!r}")
    handler = _HANDLERS[cfg.command]
    ok, payload = handler(cfg)
    _emit(cfg, payload)
    return EXIT_OK if ok else EXIT_VERIFICATION


# ---------------------------------------------------------------- argparse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=None, dest="precision_bits")
    common.add_argument("--config", default=None)
    common.add_argument("--output", default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--jobs", type=int, default=None)

    pk = argparse.ArgumentParser(add_help=False)
    pk.add_argument("--k", type=int, default=None)
    pq = argparse.ArgumentParser(add_help=False)
    pq.add_argument("--q", type=int, default=None)
    pr = argparse.ArgumentParser(add_help=False)
    pr.add_argument("--r", type=int, default=None)
    pn = argparse.ArgumentParser(add_help=False)
    pn.add_argument("--n", type=int, default=None)
    pmode = argparse.ArgumentParser(add_help=False)
    pmode.add_argument("--mode", choices=("strict", "relaxed"), default=None)

    parser = argparse.ArgumentParser(
        prog="zetaforms",
        description="Exact linear forms in Hurwitz zeta values, their "
        "saddle-point asymptotics, and dimension lower bounds.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser(
        "coeffs",
        parents=[common, pk, pq, pr, pn, pmode],
        help="build and verify the exact coefficient table C_{n,j}",
    )
    sp.add_argument("--emit-table", action="store_true", default=None)

    sub.add_parser(
        "linform",
        parents=[common, pk, pq, pr, pn, pmode],
        help="assemble the linear form rho coefficients and S_n",
    )

    sp = sub.add_parser(
        "zeta",
        parents=[common, pk, pq],
        help="certified Hurwitz zeta value zeta(k, a/q)",
    )
    sp.add_argument("--a", type=int, default=None)

    sub.add_parser(
        "cotk",
        parents=[common, pk],
        help="cosine expansion of the higher cotangent cot_k",
    )

    sp = sub.add_parser(
        "saddle",
        parents=[common, pk, pq, pr],
        help="saddle point tau_lambda and the constants alpha, omega, phi",
    )
    sp.add_argument("--lam", type=float, default=None)

    sub.add_parser(
        "census",
        parents=[common, pk, pq, pr],
        help="root census of the saddle polynomial P(z)",
    )

    sp = sub.add_parser(
        "quadrature",
        parents=[common, pk, pq, pr, pn, pmode],
        help="contour-integral route to S_n, cross-checked",
    )
    sp.add_argument("--mu", default=None)
    sp.add_argument("--height", default=None)
    sp.add_argument("--panels", type=int, default=None)

    sp = sub.add_parser(
        "fit",
        parents=[common, pk, pq, pr, pmode],
        help="asymptotic fit of log |S_n| against the saddle prediction",
    )
    sp.add_argument("--n-list", default=None, dest="n_list")

    sp = sub.add_parser(
        "bound",
        parents=[common, pk, pq, pr],
        help="dimension lower bound report (or 'bound scan' for trends)",
    )
    sp.add_argument(
        "mode", nargs="?", choices=("report", "scan"), default=None
    )
    sp.add_argument("--q-grid", default=None, dest="q_grid")

    sp = sub.add_parser(
        "scan",
        parents=[common, pk],
        help="trend scan of the bound constants over a q grid",
    )
    sp.add_argument("--q-grid", default=None, dest="q_grid")

    sp = sub.add_parser(
        "verify-all",
        parents=[common, pk, pq, pr, pn, pmode],
        help="run every verification battery at one parameter tuple",
    )
    sp.add_argument("--terms", type=int, default=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        return run(cfg)
    except ValidationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VerificationError, StructuralError) as exc:
        print(f"verification failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    except NumericError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
