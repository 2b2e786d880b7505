"""Parameter sweeps, threshold bisection, the verification suite and report I/O."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from . import schmidt_rep, state_zoo, telefidelity
from .linalg_core import eig_hermitian, gell_mann_stack, kron
from .telefidelity import Verdict

CSV_HEADER = ("a", "lambda_max", "bound", "verdict", "ppt_min_eig")
THRESHOLD_BRACKET = (0.5, 0.9)

_SQRT3_HALF = re.compile(r"^\s*sqrt\(?3\)?\s*/\s*2\s*$", re.IGNORECASE)


class NoSignChange(RuntimeError):
    pass


def parse_a(text: str) -> float:
    """Parse a family parameter: a decimal or the literal ``sqrt3/2``."""
    if _SQRT3_HALF.match(text):
        return math.sqrt(3.0) / 2.0
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"cannot parse a={text!r}; use a decimal or 'sqrt3/2'") from None
    if not math.isfinite(value):
        raise ValueError(f"a must be finite, got {text!r}")
    return value


def fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class SweepRow:
    a: float
    lambda_max: float
    bound: float
    verdict: str
    ppt_min_eig: float


@dataclass
class RunConfig:
    seed: int = 0
    samples: int = 100_000
    a_min: float = 0.0
    a_max: float = 1.0
    steps: int = 101
    output_format: str = "csv"
    output_path: str = "-"
    workers: int = 1

    def validate(self) -> None:
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.a_min > self.a_max:
            raise ValueError("a_min must not exceed a_max")
        if not (0.0 <= self.a_min and self.a_max <= 1.0):
            raise ValueError("the a-range must lie inside [0, 1]")
        if self.output_format not in ("csv", "json", "text"):
            raise ValueError("format must be csv, json or text")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def grid(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.a_min])
        return np.linspace(self.a_min, self.a_max, self.steps)


def ppt_min_eig(a: float) -> float:
    return eig_hermitian(state_zoo.partial_transpose(state_zoo.horodecki_rho(a))).min


def sweep_row(a: float) -> SweepRow:
    report = telefidelity.fidelity_bound(a)
    return SweepRow(
        a=float(a),
        lambda_max=report.lambda_max,
        bound=report.bound,
        verdict=report.verdict.value,
        ppt_min_eig=ppt_min_eig(a),
    )


def sweep_rows(grid) -> list[SweepRow]:
    return [sweep_row(a) for a in sorted(float(a) for a in grid)]


def threshold_gap(a: float) -> float:
    """``lambda_max(rho_tilde_a) - 1/3``; negative where the bound beats 1/2."""
    return telefidelity.fidelity_bound(a).lambda_max - 1 / 3


def find_threshold(tol: float = 1e-10, bracket: tuple[float, float] = THRESHOLD_BRACKET) -> float:
    """Bisect ``threshold_gap`` on ``bracket`` down to width ``tol``; returns the midpoint.

    Raises:
        NoSignChange: if the gap has the same sign at both ends.
    """
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    lo, hi = bracket
    g_lo, g_hi = threshold_gap(lo), threshold_gap(hi)
    if g_lo * g_hi > 0 or g_lo == g_hi:
        raise NoSignChange(f"gap has no sign change on [{lo}, {hi}]: {g_lo:.3e}, {g_hi:.3e}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = threshold_gap(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# verification suite


@dataclass
class Check:
    """One verification result.

    ``kind`` is ``"within"`` (``|observed - target| <= tolerance``), ``"below"``
    (``observed < target``) or ``"above"`` (``observed > target``).
    """

    name: str
    target: float
    observed: float
    tolerance: float = 0.0
    kind: str = "within"
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.kind == "within":
            ok = abs(self.observed - self.target) <= self.tolerance
        elif self.kind == "below":
            ok = self.observed < self.target
        elif self.kind == "above":
            ok = self.observed > self.target
        else:
            raise ValueError(f"unknown check kind {self.kind!r}")
        self.passed = bool(ok)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "target": self.target,
            "observed": self.observed,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def closed_form_spectrum_sqrt3_half() -> list[tuple[float, int]]:
    """Closed-form eigenvalues of ``rho_tilde`` at ``a = sqrt(3)/2`` with multiplicities."""
    r3 = math.sqrt(3.0)
    root = math.sqrt(10588 - 5786 * r3)
    values = [
        ((2 * r3 - 1) / (4 * r3 + 1) / 3, 4),
        (83 / 1128 - r3 / 376 - root / 376, 1),
        (83 / 1128 - r3 / 376 + root / 376, 1),
        (7 / 141 - 3 * r3 / 94, 1),
        (37 / 564 + 29 * r3 / 188, 1),
        (4 / 141 + 5 * r3 / 94, 1),
    ]
    return sorted(values)


def derive_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _statistical(name: str, est: telefidelity.FidelityEstimate, target: float) -> Check:
    return Check(name, target, est.mean, 3 * est.std_error + 1e-12)


def run_verification(samples: int = 100_000, seed: int = 0, workers: int = 1) -> list[Check]:
    """Run every invariant check; randomness comes from streams derived from ``seed``."""
    checks: list[Check] = []
    lam = gell_mann_stack()
    sqrt3_half = math.sqrt(3.0) / 2

    # exact spectrum at the flagship point
    report = telefidelity.fidelity_bound(sqrt3_half)
    expected = np.concatenate([[v] * m for v, m in closed_form_spectrum_sqrt3_half()])
    checks.append(Check("spectrum_sqrt3/2_max_abs_error", 0.0, float(np.max(np.abs(report.spectrum - expected))), 1e-10))
    mult = max(m for _, m in eig_hermitian(telefidelity.rho_tilde(sqrt3_half)).grouped())
    checks.append(Check("spectrum_sqrt3/2_max_multiplicity", 4, mult, 0))
    checks.append(Check("bound_sqrt3/2", 0.25 + 0.75 * (37 / 564 + 29 * math.sqrt(3) / 188), report.bound, 1e-9))
    checks.append(Check("bound_sqrt3/2_below_half", 0.5, report.bound, kind="below"))

    for a in (0.82, 0.85, 0.90, 0.95, 0.99):
        checks.append(Check(f"lambda_max_below_third_a={a}", 1 / 3, telefidelity.fidelity_bound(a).lambda_max, kind="below"))
    for a in (0.05, 0.2, 0.4, 0.6):
        checks.append(Check(f"lambda_max_above_third_a={a}", 1 / 3, telefidelity.fidelity_bound(a).lambda_max, kind="above"))
    a_star = find_threshold(1e-10)
    checks.append(Check("threshold_in_(0.75,0.85)", 0.8, a_star, 0.05))

    # Haar moments
    moments = telefidelity.haar_moment_checks(samples, derive_rng(seed, 0))
    for i in range(8):
        checks.append(Check(f"haar_mean_alpha_{i + 1}", 0.0, float(moments.alpha_mean[i]), 3 * float(moments.alpha_stderr[i])))
    checks.append(Check("haar_purity_max_error", 0.0, moments.purity_error, 1e-12))
    for j, (tgt, mean, se) in enumerate(zip(moments.quadratic_target, moments.quadratic_mean, moments.quadratic_stderr)):
        checks.append(Check(f"haar_quadratic_M{j}", float(tgt), float(mean), 3 * float(se)))

    # classical baseline in three bases
    bases = [np.eye(3), state_zoo.haar_unitary(derive_rng(seed, 1), 3).T, np.fft.fft(np.eye(3)) / math.sqrt(3)]
    for j, basis in enumerate(bases):
        est = telefidelity.classical_fidelity(samples, derive_rng(seed, 2 + j), basis=basis, workers=workers)
        checks.append(_statistical(f"classical_fidelity_basis{j}", est, telefidelity.CLASSICAL_BASELINE))

    # closed form vs Monte-Carlo teleportation
    std = state_zoo.standard_protocol()
    phi00 = state_zoo.maximally_entangled()
    cases = [
        ("phi00_standard", np.outer(phi00, phi00.conj()), std),
        ("maximally_mixed_standard", np.eye(9, dtype=complex) / 9, std),
        ("maximally_mixed_random", np.eye(9, dtype=complex) / 9, state_zoo.random_protocol(derive_rng(seed, 5))),
        ("rho_0.9_standard", state_zoo.horodecki_rho(0.9), std),
    ]
    for j in range(3):
        g = derive_rng(seed, 6 + j)
        cases.append((f"random_pair{j}", state_zoo.random_density_matrix(g, rank=2), state_zoo.random_protocol(g)))
    checks.append(Check("closed_form_phi00", 1.0, telefidelity.closed_form_fidelity(cases[0][1], std), 1e-9))
    checks.append(Check("closed_form_maximally_mixed", 1 / 3, telefidelity.closed_form_fidelity(cases[1][1], std), 1e-12))
    for j, (name, rho, protocol) in enumerate(cases):
        closed = telefidelity.closed_form_fidelity(rho, protocol)
        est = telefidelity.mc_teleport_fidelity(rho, protocol, samples, derive_rng(seed, 10 + j), workers=workers)
        checks.append(_statistical(f"oracle_{name}", est, closed))

    # structural identities
    g = derive_rng(seed, 20)
    worst = 0.0
    for _ in range(100):
        m = g.standard_normal((9, 9)) + 1j * g.standard_normal((9, 9))
        m = m + m.conj().T
        worst = max(worst, float(np.max(np.abs(schmidt_rep.reconstruct(schmidt_rep.decompose(m)) - m))))
    checks.append(Check("schmidt_roundtrip_max_error", 0.0, worst, 1e-12))

    worst_hat = 0.0
    worst_absorb = 0.0
    for _ in range(100):
        v = g.standard_normal(9) + 1j * g.standard_normal(9)
        v /= np.linalg.norm(v)
        p = np.outer(v, v.conj())
        hp = state_zoo.hat(p)
        for i in range(8):
            lhs = np.trace(kron(lam[i], np.eye(3)) @ hp)
            rhs = np.trace(kron(np.eye(3), lam[i]) @ p)
            worst_hat = max(worst_hat, abs(lhs - rhs))
        worst_absorb = max(worst_absorb, absorption_gap(sqrt3_half, p))
    checks.append(Check("hat_partial_identity_max_error", 0.0, float(worst_hat), 1e-12))
    checks.append(Check("absorption_identity_max_error", 0.0, float(worst_absorb), 1e-10))

    worst_r8 = 0.0
    worst_ppt = math.inf
    for a in np.linspace(0, 1, 101):
        r = schmidt_rep.decompose(state_zoo.horodecki_rho(a)).r
        formula = np.zeros(8)
        formula[7] = 2 / math.sqrt(3) * (a - 1) / (8 * a + 1)
        worst_r8 = max(worst_r8, float(np.max(np.abs(r - formula))))
        worst_ppt = min(worst_ppt, ppt_min_eig(a))
    checks.append(Check("r8_formula_max_error", 0.0, worst_r8, 1e-12))
    checks.append(Check("ppt_min_eig_over_grid", -1e-10, worst_ppt, kind="above"))
    npt = eig_hermitian(state_zoo.partial_transpose(np.outer(phi00, phi00.conj()))).min
    checks.append(Check("npt_control_min_eig", -1 / 3, npt, 1e-10))
    return checks


def absorption_gap(a: float, p: np.ndarray) -> float:
    """Difference between the two forms of the single-outcome bound for projector ``p``.

    ``1/4 + 3/8 r_8 S_8(p) + 3/4 Tr(rho_a hat(p))`` against
    ``1/4 + 3/4 Tr(rho_tilde_a hat(p))``.
    """
    rho = state_zoo.horodecki_rho(a)
    hp = state_zoo.hat(p)
    r8 = schmidt_rep.decompose(rho).r[7]
    s8 = schmidt_rep.decompose(p).s[7]
    lhs = 0.25 + 3 / 8 * r8 * s8 + 0.75 * np.trace(rho @ hp).real
    rhs = 0.25 + 0.75 * np.trace(telefidelity.rho_tilde(a) @ hp).real
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# serialization


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([fmt(row.a), fmt(row.lambda_max), fmt(row.bound), row.verdict, fmt(row.ppt_min_eig)])
    return buf.getvalue()


def json_report(config: RunConfig, rows: list[SweepRow] = (), checks: list[Check] = ()) -> str:
    doc = {
        "config": asdict(config),
        "rows": [asdict(r) for r in rows],
        "checks": [c.as_dict() for c in checks],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def checks_to_text(checks: list[Check]) -> str:
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        if c.kind == "within":
            rule = f"target={fmt(c.target)} tolerance={fmt(c.tolerance)}"
        else:
            rule = f"{c.kind} {fmt(c.target)}"
        lines.append(f"{status}  {c.name}: observed={fmt(c.observed)} {rule}")
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"


__all__ = [
    "CSV_HEADER",
    "Check",
    "NoSignChange",
    "RunConfig",
    "SweepRow",
    "Verdict",
    "absorption_gap",
    "checks_to_text",
    "derive_rng",
    "find_threshold",
    "json_report",
    "closed_form_spectrum_sqrt3_half",
    "parse_a",
    "ppt_min_eig",
    "rows_to_csv",
    "run_verification",
    "sweep_row",
    "sweep_rows",
    "threshold_gap",
]
