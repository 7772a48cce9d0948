"""Scenario ingestion and the two built-in scenario families.

A scenario is one self-contained JSON document: nerve combinatorics, per-edge
transition maps, and iteration parameters. The single-chart family puts one
self-loop on one chart (classical linearization of a single circle map); the
genus-2 suspension family puts three charts with doubled overlaps to chart 0,
the plus copies carrying the two maps and the minus copies the identity, so
that a converged run collapses to a single common conjugator and linearizes
both maps at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .circle import (
    CircleDiffeo,
    apply_inverse,
    eval_diffeo,
    expand,
    identity_map,
    unit_circle,
)
from .cocycle import Edge, Nerve, TransitionSystem
from .engine import Conjugacy, KamParams
from .errors import ExtractionError, SchemaError, ValidationError
from .series import LaurentSeries

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Scenario:
    name: str
    system: TransitionSystem
    params: KamParams
    outputs: tuple = ("trace", "conjugacy", "diagnostics")

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "name": self.name,
            "width": float(self.system.width),
            "charts": list(self.system.nerve.charts),
            "edges": [
                {
                    "from": e.src,
                    "to": e.dst,
                    "label": e.label,
                    "phase": float(f.phase),
                    "hat": f.hat.to_json_dict(),
                }
                for e, f in zip(self.system.nerve.edges, self.system.transitions)
            ],
            "triples": [list(t) for t in self.system.nerve.triples],
            "params": self.params.to_json_dict(),
            "outputs": list(self.outputs),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Scenario":
        if not isinstance(doc, dict) or doc.get("schema") != 1:
            raise SchemaError(f"unsupported scenario schema {doc.get('schema')!r}")
        try:
            width = float(doc["width"])
            charts = tuple(doc["charts"])
            edge_docs = doc["edges"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad scenario document: {exc}") from exc
        edges = []
        transitions = []
        for ed in edge_docs:
            try:
                edges.append(Edge(ed["from"], ed["to"], ed["label"]))
                transitions.append(
                    CircleDiffeo(
                        float(ed["phase"]), LaurentSeries.from_json_dict(ed["hat"])
                    )
                )
            except KeyError as exc:
                raise SchemaError(f"edge document missing field {exc}") from exc
        nerve = Nerve(charts, tuple(edges),
                      tuple(tuple(t) for t in doc.get("triples", [])))
        system = TransitionSystem(nerve, tuple(transitions), width)
        params = KamParams.from_json_dict(doc.get("params", {}), sigma0=width)
        if abs(params.sigma0 - width) > 1e-12:
            raise ValidationError(
                f"params sigma0 {params.sigma0} disagrees with system width {width}"
            )
        outputs = tuple(doc.get("outputs", ("trace", "conjugacy", "diagnostics")))
        return cls(name=str(doc.get("name", "scenario")), system=system,
                   params=params, outputs=outputs)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2,
                                         sort_keys=True))

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read scenario {path}: {exc}") from exc
        return cls.from_json_dict(doc)

    def with_strict(self, strict: bool) -> "Scenario":
        return replace(self, params=replace(self.params, strict_schedule=strict))


def _default_eta0(sigma0: float, mu: float) -> float:
    ratio = mu ** (-1.0 / (mu + 1.0))
    return min(math.pi, (1.0 - ratio) * sigma0 / 4.0) / 2.0


def _params(sigma0, eta0, c0, mu, n_trunc, tol, max_iter, strict_schedule):
    if eta0 is None:
        eta0 = _default_eta0(sigma0, mu)
    return KamParams(
        sigma0=sigma0, eta0=eta0, c0=c0, mu=mu, n_trunc=n_trunc, tol=tol,
        max_iter=max_iter, strict_schedule=strict_schedule,
    )


def build_single_chart(
    theta: float,
    hat: LaurentSeries,
    sigma0: float,
    *,
    name: str = "single_chart",
    eta0: float | None = None,
    c0: float | None = None,
    mu: float = 2.0,
    n_trunc: int = 64,
    tol: float = 1e-10,
    max_iter: int = 40,
    strict_schedule: bool = True,
) -> Scenario:
    """One chart, one self-loop of phase ``2 pi theta`` carrying ``hat``:
    classical linearization of a single circle diffeomorphism."""
    if hat.width < sigma0:
        raise ValidationError(
            f"hat width {hat.width:.6g} is below the requested sigma0 {sigma0:.6g}"
        )
    loop = CircleDiffeo(TWO_PI * theta, hat.with_width(sigma0))
    nerve = Nerve(("U0",), (Edge("U0", "U0", "loop"),), ())
    system = TransitionSystem(nerve, (loop,), sigma0)
    return Scenario(
        name=name,
        system=system,
        params=_params(sigma0, eta0, c0, mu, n_trunc, tol, max_iter,
                       strict_schedule),
    )


def build_genus2(
    f1: CircleDiffeo,
    f2: CircleDiffeo,
    sigma0: float,
    *,
    name: str = "genus2",
    eta0: float | None = None,
    c0: float | None = None,
    mu: float = 2.0,
    n_trunc: int = 64,
    tol: float = 1e-10,
    max_iter: int = 40,
    strict_schedule: bool = True,
) -> Scenario:
    """Genus-2 suspension nerve: charts U0, U1, U2; doubled overlaps between
    U0 and each U_j, the plus copy carrying f_j and the minus copy the
    identity; the triple overlap is empty."""
    maps = []
    for f in (f1, f2):
        if f.width < sigma0:
            raise ValidationError(
                f"transition width {f.width:.6g} below sigma0 {sigma0:.6g}"
            )
        maps.append(CircleDiffeo(f.phase, f.hat.with_width(sigma0)))
    nerve = Nerve(
        ("U0", "U1", "U2"),
        (
            Edge("U0", "U1", "+"),
            Edge("U0", "U1", "-"),
            Edge("U0", "U2", "+"),
            Edge("U0", "U2", "-"),
        ),
        (),
    )
    system = TransitionSystem(
        nerve,
        (maps[0], identity_map(sigma0), maps[1], identity_map(sigma0)),
        sigma0,
    )
    return Scenario(
        name=name,
        system=system,
        params=_params(sigma0, eta0, c0, mu, n_trunc, tol, max_iter,
                       strict_schedule),
    )


def conjugated_rotation(
    psi: CircleDiffeo, phase: float, n_trunc: int, out_width: float
) -> CircleDiffeo:
    """The map ``psi o R_phase o psi^{-1}`` sampled pointwise and re-expanded.

    Pairs built this way from one common psi are simultaneously linearizable
    by construction, which is what the genus-2 coboundary condition demands
    at every level of the iteration.
    """
    w = unit_circle(max(4 * n_trunc, 8))
    x = apply_inverse(psi, w)
    z = eval_diffeo(psi, np.exp(1j * phase) * x)
    return expand(z, n_trunc, out_width)


@dataclass(frozen=True)
class SimultaneousResult:
    """Common conjugator extracted from a converged genus-2 run."""

    psi0: CircleDiffeo
    rotations: tuple            # limit phases of the two plus edges
    residuals: dict             # per chart linearization residual + collapse

    def to_json_dict(self) -> dict:
        return {
            "psi0": self.psi0.to_json_dict(),
            "rotations": [float(r) for r in self.rotations],
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


def extract_simultaneous(
    conj: Conjugacy,
    scenario: Scenario,
    samples: int = 128,
    collapse_tol: float = 1e-8,
) -> SimultaneousResult:
    """Collapse a genus-2 conjugacy to the single common conjugator psi0.

    The minus edges carry identities, so the converged coordinate changes of
    all three charts must agree; their disagreement is the collapse residual
    and exceeding ``collapse_tol`` raises. The returned residuals certify
    ``psi0^{-1} o f_j o psi0 = rotation`` on sampled unit-circle points.
    """
    nerve = scenario.system.nerve
    if len(nerve.charts) != 3:
        raise ValidationError("not a genus-2 scenario: expected three charts")
    base = nerve.charts[0]
    plus_edges = {}
    for e in nerve.edges:
        if e.src == base and e.label == "+":
            plus_edges[e.dst] = e
    if len(plus_edges) != 2:
        raise ValidationError("not a genus-2 scenario: expected two plus edges")

    u = unit_circle(samples)
    psi0 = conj.charts[base]
    collapse = 0.0
    for c in nerve.charts[1:]:
        vals = eval_diffeo(conj.charts[c], u) - eval_diffeo(psi0, u)
        collapse = max(collapse, float(np.max(np.abs(vals))))
    if collapse > collapse_tol:
        raise ExtractionError(
            f"chart collapse residual {collapse:.3e} exceeds {collapse_tol:.0e}; "
            "minus-edge relation does not hold"
        )

    rotations = []
    residuals = {"collapse": collapse}
    for c in nerve.charts[1:]:
        e = plus_edges[c]
        phi = conj.linear_cocycle.phase_of(e)
        f0 = scenario.system.transition_of(e)
        lhs = apply_inverse(psi0, eval_diffeo(f0, eval_diffeo(psi0, u)))
        residuals[c] = float(np.max(np.abs(lhs - np.exp(1j * phi) * u)))
        rotations.append(float(phi))
    return SimultaneousResult(
        psi0=psi0, rotations=tuple(rotations), residuals=residuals
    )
