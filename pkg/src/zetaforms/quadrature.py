"""Contour quadrature for the linear forms and their saddle decomposition.

Two integral representations are evaluated numerically:

    S_n = (pi^(k-1) i / 2) Int_{M-i inf}^{M+i inf} cot_k(pi t) R_n(t) dt,
          M in (0, qn) not an integer,

    J_{n,lambda} = (1/2 pi i) Int_{mu-i inf}^{mu+i inf}
                   e^{n(f(z) - lambda pi i z)} g_n(z) dz,  mu in (0, q),

with composite Gauss-Legendre panels on the truncated line and a
two-level refinement delta as the error estimator.  Truncation is
certified: R_n(t) = sum_j C_j/(qt+j) has its first D-1 moments
sum_j C_j j^m equal to zero (D = -deg R_n), which is checked exactly and
turned into the explicit bound |R_n(M+it)| <= 2 Gamma N^(D-1) / (q|t|)^D
for q|t| >= 2N, where Gamma = sum_j |C_j| and N = rqn.

J_{n,lambda} is computed in log form: the factor e^{n f(z)} g_n(z)
equals R_n(nz) / (prefactor * sin^k(n pi z)) exactly, so the integrand
is assembled as exp(log R_n(nz) - log prefactor - k log sin(n pi z)
- lambda pi i n z) and n f(z) itself never appears as a floating-point
intermediate.

The asymptotic fit compares exact-route values of S_n against the
saddle-point law |S_n| = exp(-alpha n + o(n)) (|cos(n omega + phi)| + o(1)).
"""

from __future__ import annotations

import dataclasses
import multiprocessing
from dataclasses import dataclass

import mpmath
from mpmath import mp
from mpmath.calculus.quadrature import GaussLegendre

from . import saddle as saddle_mod
from .saddle import _real
from .cotk import cotk_eval
from .errors import (
    ConvergenceError,
    NumericError,
    PoleProximityError,
    ValidationError,
    VerificationError,
)
from .linform import (
    CoefficientTable,
    build_coefficients,
    r_product,
    rho,
    s_n_via_zeta,
)
from .params import Params


@dataclass(frozen=True)
class ContourSpec:
    """Vertical-line contour: abscissa mu (in units of the saddle variable
    z = t/n where applicable), truncation height, and panels per octave.

    height is in the same variable the specific integral uses (t for S_n,
    z for J); None lets the evaluator choose it from the certified decay
    bound."""

    mu: object = None
    height: object = None
    panels: int = 1

    def __post_init__(self):
        if not (isinstance(self.panels, int) and self.panels >= 1):
            raise ValidationError(f"panels must be an int >= 1, got {self.panels!r}")


@dataclass(frozen=True)
class ContourResult:
    value: mpmath.mpf
    imag: mpmath.mpf
    delta: mpmath.mpf
    truncation: mpmath.mpf
    mu: mpmath.mpf
    height: mpmath.mpf
    panels: int
    bits: int

    @property
    def total_error(self) -> mpmath.mpf:
        return self.delta + self.truncation


@dataclass(frozen=True)
class JIntegralResult:
    lam: float
    value: mpmath.mpc
    delta: mpmath.mpf
    truncation: mpmath.mpf
    mu: mpmath.mpf
    height: mpmath.mpf
    panels: int
    bits: int

    @property
    def total_error(self) -> mpmath.mpf:
        return self.delta + self.truncation


_NODE_CACHE: dict = {}


def _gl_nodes(degree: int, prec: int):
    key = (degree, prec)
    nodes = _NODE_CACHE.get(key)
    if nodes is None:
        rule = GaussLegendre(mp)
        nodes = rule.calc_nodes(degree, prec)
        _NODE_CACHE[key] = nodes
    return nodes


def _panel_edges(t_min, t_max, panels: int):
    """Geometric panel edges [0, t_min, 2 t_min, 4 t_min, ..., >= t_max],
    each octave split into `panels` equal parts."""
    edges = [mp.mpf(0)]
    for i in range(1, panels + 1):
        edges.append(t_min * i / panels)
    top = t_min
    while top < t_max:
        nxt = min(2 * top, t_max)
        for i in range(1, panels + 1):
            edges.append(top + (nxt - top) * i / panels)
        top = nxt
    return edges


def _moment_tail_constant(table: CoefficientTable):
    """(Gamma, N, D) for the certified bound
    |R_n(M+it)| <= 2 Gamma N^(D-1) / (q|t|)^D  (q|t| >= 2N), after
    verifying exactly that the first D-1 moments of the coefficients
    vanish (equivalent to deg R_n = -D)."""
    p = table.params
    d_decay = p.delta_k + (p.r - 2 * p.k) * p.qn
    for m in range(d_decay - 1):
        if sum(c * j**m for j, c in enumerate(table.c)) != 0:
            raise VerificationError(
                f"moment sum_j C_j j^{m} is nonzero; decay exponent {d_decay} is wrong"
            )
    gamma = sum(abs(c) for c in table.c)
    return gamma, p.rqn, d_decay


# --- panel worker ----------------------------------------------------------
# Panels are evaluated either in-process or by a fork pool; the integrand
# closure is stashed in a module global so forked children inherit it.

_PANEL_STATE: dict = {}


def _eval_panel(item):
    lo, hi, degree = item
    fn = _PANEL_STATE["fn"]
    wbits = _PANEL_STATE["wbits"]
    with mp.workprec(wbits):
        half = (hi - lo) / 2
        mid = (lo + hi) / 2
        total = mp.mpc(0)
        for x, w in _gl_nodes(degree, wbits):
            total += w * fn(mid + half * x)
        return total * half


def _integrate_line(fn, edges, panels_degrees, wbits: int, jobs: int):
    """Composite GL over the given edges at two refinement levels.
    Returns (fine value, sum of per-panel |fine - coarse|)."""
    d_lo, d_hi = panels_degrees
    items = []
    for i in range(len(edges) - 1):
        items.append((edges[i], edges[i + 1], d_lo))
        items.append((edges[i], edges[i + 1], d_hi))
    _PANEL_STATE["fn"] = fn
    _PANEL_STATE["wbits"] = wbits
    try:
        if jobs > 1:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=jobs) as pool:
                results = pool.map(_eval_panel, items, chunksize=1)
        else:
            results = [_eval_panel(it) for it in items]
    finally:
        _PANEL_STATE.clear()
    fine = mp.mpc(0)
    delta = mp.mpf(0)
    for i in range(0, len(items), 2):
        coarse_v, fine_v = results[i], results[i + 1]
        fine += fine_v
        delta += abs(fine_v - coarse_v)
    return fine, delta


def s_n_contour(
    params: Params,
    table: CoefficientTable,
    spec: ContourSpec | None = None,
    bits: int = 128,
    jobs: int = 1,
) -> ContourResult:
    """S_n by quadrature of (pi^(k-1) i/2) cot_k(pi t) R_n(t) on the
    vertical line Re t = M = n*mu, truncated at |Im t| = height with a
    certified remainder.

    The default abscissa is M = floor(qn/2) + 1/2, kept away from every
    pole of cot_k; the default height makes the truncation bound smaller
    than 2^-(bits+16).  The value is real; its numerically observed
    imaginary part is reported for the sanity check."""
    if table.params != params:
        raise ValidationError("coefficient table belongs to different parameters")
    k, q, n, qn = params.k, params.q, params.n, params.qn
    spec = spec or ContourSpec()
    gamma, big_n, d_decay = _moment_tail_constant(table)
    wbits = bits + 96
    with mp.workprec(wbits):
        if spec.mu is None:
            m_line = mp.mpf(qn // 2) + mp.mpf(1) / 2
        else:
            m_line = _real(spec.mu) * n
            if not 0 < m_line < qn:
                raise ValidationError(f"contour abscissa {m_line} outside (0, {qn})")
            if abs(m_line - mp.nint(m_line)) < mp.ldexp(1, -(bits // 2)):
                raise PoleProximityError(
                    f"contour abscissa {m_line} too close to a pole of cot_k"
                )
        cot_bound = mp.mpf(2 ** (k + 1) + 4) / mp.pi**k

        def tail_bound(t_val):
            # Int_T^inf 2 Gamma N^(D-1) (q t)^-D dt, both half-lines, times
            # the cot_k line bound and the pi^(k-1)/2 prefactor.
            decay = (
                2 * gamma * mp.mpf(big_n) ** (d_decay - 1) / mp.mpf(q) ** d_decay
            ) * t_val ** (1 - d_decay) / (d_decay - 1)
            return mp.pi ** (k - 1) * cot_bound * decay

        if spec.height is None:
            height = mp.mpf(2 * big_n) / q
            target = mp.ldexp(1, -(bits + 16))
            while tail_bound(height) > target:
                height *= 2
                if height > mp.mpf(2) ** 16384:
                    raise ConvergenceError("truncation height runaway")
        else:
            height = _real(spec.height)
            if q * height < 2 * big_n:
                raise ValidationError(
                    f"height {height} below the certified-decay region {2 * big_n / q}"
                )
        trunc = tail_bound(height)

        def integrand(t):
            z = mp.mpc(m_line, t)
            return cotk_eval(k, z, wbits) * r_product(params, z, wbits)

        edges_up = _panel_edges(mp.mpf(1), height, spec.panels)
        edges = [-e for e in reversed(edges_up)] + edges_up[1:]
        fine, delta = _integrate_line(integrand, edges, (5, 6), wbits, jobs)
        # S_n = (pi^(k-1) i/2) * Int F dz over the vertical line, and
        # dz = i dt, so S_n = -(pi^(k-1)/2) * Int_R F(M+it) dt.
        total = -mp.pi ** (k - 1) / 2 * fine
        scale = mp.pi ** (k - 1) / 2 * delta
        return ContourResult(
            value=+mp.re(total),
            imag=+mp.im(total),
            delta=+scale,
            truncation=+trunc,
            mu=+(m_line / n),
            height=+height,
            panels=spec.panels,
            bits=bits,
        )


def _log_j_prefactor(params: Params, wbits: int):
    """log of pi^-k (qn)^-(k-1+delta_k) sqrt(2 r pi/(qn)), the factor that
    turns R_n(nz)/sin^k(n pi z) into e^{n f(z)} g_n(z)."""
    k, q, r, n = params.k, params.q, params.r, params.n
    qn = params.qn
    with mp.workprec(wbits):
        return (
            -k * mp.log(mp.pi)
            - (k - 1 + params.delta_k) * mp.log(qn)
            + mp.log(2 * r * mp.pi / qn) / 2
        )


def j_integral(
    params: Params,
    lam,
    mu=None,
    bits: int = 128,
    table: CoefficientTable | None = None,
    height=None,
    panels: int = 1,
    jobs: int = 1,
) -> JIntegralResult:
    """J_{n,lambda} along Re z = mu in (0, q), in log form.

    The integrand e^{n(f - lambda pi i z)} g_n(z) is reconstructed exactly
    from the rational function: exp(log R_n(nz) - log prefactor
    - k log sin(n pi z) - lambda pi i n z).  Nodes are kept at least
    2^-(bits/2) away from the poles of 1/sin by nudging them off the real
    axis when a panel edge would land on one."""
    if table is None:
        table = build_coefficients(params)
    elif table.params != params:
        raise ValidationError("coefficient table belongs to different parameters")
    k, q, n, qn = params.k, params.q, params.n, params.qn
    lam = _real(lam)
    if not abs(lam) < k:
        raise ValidationError(f"need |lambda| < k, got {lam}")
    gamma, big_n, d_decay = _moment_tail_constant(table)
    wbits = bits + 96
    with mp.workprec(wbits):
        if mu is None:
            mu = (mp.mpf(qn // 2) + mp.mpf(1) / 2) / n
        mu = _real(mu)
        if not 0 < mu < q:
            raise ValidationError(f"mu = {mu} outside (0, q)")
        if abs(n * mu - mp.nint(n * mu)) < mp.ldexp(1, -(bits // 2)):
            raise PoleProximityError(f"mu = {mu} puts the line through a pole of sin")
        log_pref = _log_j_prefactor(params, wbits)

        # Certified tail: |R_n(nz)| <= Gamma/(q n y) and
        # |e^{-lambda pi i n z} / sin^k(n pi z)| <= 2^k e^{(|lam|-k) pi n |y|}
        # once pi n |y| >= 1, so the tail of the |dz| integral beyond Y is
        # (1/2 pi) * 2 * Gamma/(q n Y) 2^k e^{-log_pref... } -- all in logs.
        def log_tail(y_val):
            decay = (abs(lam) - k) * mp.pi * n * y_val
            const = (
                mp.log(gamma)
                + k * mp.log(2)
                - mp.log(q * n * y_val)
                - log_pref
                - mp.log(mp.pi)
                - mp.log((k - abs(lam)) * mp.pi * n)
            )
            return const + decay

        if height is None:
            y_top = mp.mpf(1)
            target_log = -(bits + 16) * mp.log(2)
            while log_tail(y_top) > target_log:
                y_top *= 2
                if y_top > mp.mpf(2) ** 64:
                    raise ConvergenceError("J truncation height runaway")
        else:
            y_top = _real(height)
            if mp.pi * n * y_top < 1:
                raise ValidationError("height too small for the certified tail bound")
        trunc = mp.exp(log_tail(y_top))

        pole_guard = mp.ldexp(1, -(bits // 2))

        def integrand(y):
            z = mp.mpc(mu, y)
            nz = n * z
            if abs(mp.im(nz)) < pole_guard and abs(nz - mp.nint(nz)) < pole_guard:
                z += mp.mpc(0, 2 * pole_guard / n)
                nz = n * z
            rv = r_product(params, nz, wbits)
            if rv == 0:
                return mp.mpc(0)
            log_val = (
                mp.log(rv)
                - log_pref
                - k * mp.log(mp.sinpi(nz))
                - lam * mp.pi * 1j * nz
            )
            return mp.exp(log_val)

        edges_up = _panel_edges(mp.mpf(1) / (2 * n), y_top, panels)
        edges = [-e for e in reversed(edges_up)] + edges_up[1:]
        fine, delta = _integrate_line(integrand, edges, (5, 6), wbits, jobs)
        # dz = i dy and the 1/(2 pi i) prefactor leave 1/(2 pi) * Int dy.
        value = fine / (2 * mp.pi)
        return JIntegralResult(
            lam=float(lam),
            value=+value,
            delta=+(delta / (2 * mp.pi)),
            truncation=+trunc,
            mu=+mu,
            height=+y_top,
            panels=panels,
            bits=bits,
        )


def s_tilde_prefactor(params: Params, bits: int = 128):
    """The exact n^{O(1)} factor in S_n = -sqrt(2 pi r n / q) (qn)^-(k-1+delta_k)
    * S~_n: returns sqrt(2 pi r n/q) * (qn)^-(k-1+delta_k)."""
    with mp.workprec(bits + 16):
        qn = params.qn
        return (
            mp.sqrt(2 * mp.pi * params.r * params.n / params.q)
            * mp.mpf(qn) ** -(params.k - 1 + params.delta_k)
        )


def g_n_ratio(params: Params, z, bits: int = 192):
    """g_n(z)/g(z) - 1 at a point z off the cuts, with g_n reconstructed in
    log form from R_n(nz); the lemma gives O(1/(eps0 n)) for this."""
    k, n = params.k, params.n
    wbits = bits + 96
    with mp.workprec(wbits):
        zz = mp.mpc(z)
        nz = n * zz
        rv = r_product(params, nz, wbits)
        log_pref = _log_j_prefactor(params, wbits)
        fv = saddle_mod.f_eval(params, zz, wbits)
        log_gn = mp.log(rv) - log_pref - k * mp.log(mp.sinpi(nz)) - n * fv
        gv = saddle_mod.g_eval(params, zz, wbits)
        return mp.exp(log_gn - mp.log(gv)) - 1


# ---------------------------------------------------------------------------
# Asymptotic fit.


@dataclass(frozen=True)
class FitRow:
    n: int
    log_s: mpmath.mpf
    predicted: mpmath.mpf
    residual: mpmath.mpf
    cos_factor: mpmath.mpf
    excluded: bool


@dataclass(frozen=True)
class FitReport:
    k: int
    q: int
    r: int
    alpha: mpmath.mpf
    omega: mpmath.mpf
    phi: mpmath.mpf
    rows: tuple
    decreasing: bool
    final_ok: bool
    gauss_ratio_log: object
    bits: int

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "q": self.q,
            "r": self.r,
            "alpha": mpmath.nstr(self.alpha, 20),
            "omega": mpmath.nstr(self.omega, 20),
            "phi": mpmath.nstr(self.phi, 20),
            "decreasing": self.decreasing,
            "final_ok": self.final_ok,
            "gauss_ratio_log": (
                None
                if self.gauss_ratio_log is None
                else mpmath.nstr(self.gauss_ratio_log, 10)
            ),
            "rows": [
                {
                    "n": row.n,
                    "logS": mpmath.nstr(row.log_s, 20),
                    "predicted": mpmath.nstr(row.predicted, 20),
                    "residual": mpmath.nstr(row.residual, 12),
                    "excluded": row.excluded,
                }
                for row in self.rows
            ],
        }


def fit_report_csv(report: FitReport) -> str:
    lines = ["n,logS,predicted,residual"]
    for row in report.rows:
        lines.append(
            f"{row.n},{mpmath.nstr(row.log_s, 20)},"
            f"{mpmath.nstr(row.predicted, 20)},{mpmath.nstr(row.residual, 12)}"
        )
    return "\n".join(lines) + "\n"


def asymptotic_fit(
    params: Params,
    n_list,
    bits: int = 4096,
    cos_guard: float = 1e-3,
) -> FitReport:
    """Residuals e(n) = (log|S_n| - log|cos(n omega + phi)| + alpha n)/n
    for exact-route S_n against the saddle constants; rows with
    |cos(n omega + phi)| < cos_guard are flagged and excluded from the
    trend checks.  The predicted column carries the full Gaussian law
    with its explicit n^{O(1)} prefactor."""
    n_list = list(n_list)
    if sorted(n_list) != n_list:
        raise ValidationError("n_list must be increasing")
    sd = saddle_mod.saddle_constants(params, bits=max(320, min(bits, 512)))
    k, q, r = params.k, params.q, params.r
    if not n_list:
        return FitReport(
            k=k,
            q=q,
            r=r,
            alpha=sd.alpha,
            omega=sd.omega,
            phi=sd.phi,
            rows=(),
            decreasing=True,
            final_ok=True,
            gauss_ratio_log=None,
            bits=bits,
        )
    with mp.workprec(bits + 64):
        from .cotk import expansion

        c_top = expansion(k).c[k - 2]
        mult = 1 if k == 2 else 2
        fpp_tau = saddle_mod.fpp_eval(params, sd.tau, 320)
        g_tau = saddle_mod.g_eval(params, sd.tau, 320)
        rows = []
        for n in n_list:
            pn = dataclasses.replace(params, n=n)
            table = build_coefficients(pn)
            form = rho(pn, table)
            sn = s_n_via_zeta(pn, form, bits)
            log_s = mp.log(abs(sn.value))
            cosv = abs(mp.cos(n * sd.omega + sd.phi))
            excluded = bool(cosv < cos_guard)
            log_cos = mp.log(cosv) if not excluded else mp.mpf(0)
            residual = (log_s - log_cos + sd.alpha * n) / n
            qn = pn.qn
            predicted = (
                mp.log(mp.sqrt(2 * mp.pi * r * n / q))
                - (k - 1 + pn.delta_k) * mp.log(qn)
                + mp.log(mult * mp.mpf(c_top.numerator) / c_top.denominator)
                - mp.log(2 * mp.pi * n * abs(fpp_tau)) / 2
                - sd.alpha * n
                + mp.log(abs(g_tau))
                + log_cos
            )
            rows.append(
                FitRow(
                    n=n,
                    log_s=+log_s,
                    predicted=+predicted,
                    residual=+residual,
                    cos_factor=+cosv,
                    excluded=excluded,
                )
            )
        included = [row for row in rows if not row.excluded]
        decreasing = all(
            abs(included[i].residual) > abs(included[i + 1].residual)
            for i in range(len(included) - 1)
        )
        final_ok = bool(included and abs(included[-1].residual) < abs(sd.alpha) / 10)
        gauss_ratio_log = None
        if included:
            last = included[-1]
            gauss_ratio_log = +(last.log_s - last.predicted)
        return FitReport(
            k=k,
            q=q,
            r=r,
            alpha=sd.alpha,
            omega=sd.omega,
            phi=sd.phi,
            rows=tuple(rows),
            decreasing=decreasing,
            final_ok=final_ok,
            gauss_ratio_log=gauss_ratio_log,
            bits=bits,
        )
