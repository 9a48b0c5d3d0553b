"""Built-in validation report for the gauge-potential machinery.

Two suites, both cheap enough to run on every install: the avoided
crossing H = delta*X + lam*Z, where every quantity has a closed form,
and the bundled four-qubit molecule, where a dense matrix oracle is
still tractable.  Each check reports the measured value and its bound;
the report is plain data so callers can render it as text or JSON.
"""

from __future__ import annotations

import numpy as np

from .agp import (
    SchedulePoint,
    cd_hamiltonian,
    gauge_residual,
    hamiltonian_at,
    minimize_action,
    offdiagonal_residual_action,
    two_level_split,
)
from .fermion import adiabatic_split
from .pauli import PauliWord, to_dense_matrix

__all__ = ["gauge_check_report", "render_report"]

LZ_DELTAS = (0.5, 1.0, 2.0)
LZ_LAMBDAS = tuple(0.25 * k for k in range(9))  # 0, 0.25, ..., 2


def _check(name: str, value: float, bound: float, kind: str = "max") -> dict:
    """kind 'max': passes when value < bound; 'bool': value is 0/1, bound ignored."""
    passed = bool(value) if kind == "bool" else bool(value < bound)
    return {
        "name": name,
        "value": float(value),
        "bound": float(bound),
        "kind": kind,
        "passed": passed,
    }


def gauge_check_report(fixture: str = "h2_0.7414", mapping: str = "bk") -> dict:
    """Run both suites and return {'checks': [...], 'passed': bool}."""
    checks = []

    # --- avoided-crossing suite: order-1 solution is exact ---------------
    worst_offdiag = 0.0
    worst_alpha = 0.0
    worst_cd = 0.0
    y_word = PauliWord.from_label("Y")
    for delta in LZ_DELTAS:
        split = two_level_split(delta)
        for lam in LZ_LAMBDAS:
            expansion = minimize_action(split, lam, 1)
            worst_offdiag = max(
                worst_offdiag, offdiagonal_residual_action(split, lam, expansion)
            )
            closed_alpha = -1.0 / (4.0 * (delta**2 + lam**2))
            worst_alpha = max(worst_alpha, abs(expansion.alphas[0] - closed_alpha))
            point = SchedulePoint(t=0.3, total_time=1.0, lam=lam, lam_dot=0.7)
            cd = cd_hamiltonian(split, point, 1)
            closed_cd = -point.lam_dot * delta / (2.0 * (delta**2 + lam**2))
            worst_cd = max(worst_cd, abs(cd.coefficient(y_word) - closed_cd))
    checks.append(
        _check("avoided-crossing transition residual", worst_offdiag, 1e-24)
    )
    checks.append(_check("avoided-crossing coefficient closed form", worst_alpha, 1e-12))
    checks.append(_check("avoided-crossing drive term closed form", worst_cd, 1e-12))

    # --- molecular dense-oracle suite ------------------------------------
    from .fixtures import load_fixture

    split = adiabatic_split(load_fixture(fixture), mapping=mapping)
    lam = 0.5
    actions = [minimize_action(split, lam, l).residual_action for l in (1, 2, 3)]
    monotone = all(b <= a + 1e-12 for a, b in zip(actions, actions[1:]))
    checks.append(
        _check("molecular residual action non-increasing in order", monotone, 0.0, "bool")
    )

    expansion = minimize_action(split, lam, 2)
    g_dense = to_dense_matrix(gauge_residual(split, lam, expansion))
    dense_action = float(
        np.real(np.trace(g_dense @ g_dense)) / g_dense.shape[0]
    )
    checks.append(
        _check(
            "molecular residual action matches dense trace",
            abs(dense_action - expansion.residual_action),
            1e-12,
        )
    )

    h_dense = to_dense_matrix(hamiltonian_at(split, lam))
    hermitian_gap = float(np.max(np.abs(h_dense - h_dense.conj().T)))
    checks.append(_check("molecular interpolant Hermitian", hermitian_gap, 1e-12))

    report = {
        "fixture": fixture,
        "mapping": mapping,
        "residual_actions": [float(a) for a in actions],
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    return report


def render_report(report: dict) -> str:
    """Fixed-width text rendering, one line per check plus a verdict."""
    lines = [f"gauge checks on {report['fixture']} ({report['mapping']})"]
    for c in report["checks"]:
        status = "pass" if c["passed"] else "FAIL"
        if c["kind"] == "bool":
            lines.append(f"  [{status}] {c['name']}")
        else:
            lines.append(
                f"  [{status}] {c['name']}: {c['value']:.3e} (bound {c['bound']:.0e})"
            )
    orders = ", ".join(f"{a:.6e}" for a in report["residual_actions"])
    lines.append(f"  residual actions by order: {orders}")
    lines.append("all checks passed" if report["passed"] else "CHECKS FAILED")
    return "\n".join(lines) + "\n"
