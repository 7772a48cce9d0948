"""Covering nerves, unitary flat bundles of phases, and the per-mode
coboundary solver with its small-divisor amplification.

The mode-n equation system on a nerve is ``e^{i n phi_e} a_k - a_j = b_e``
over one unknown per chart, one equation per oriented edge ``j -> k``. Its
solvability and the growth of its solutions with n are the numerical face of
the arithmetic condition on the bundle: a loop whose n-twisted holonomy is
trivial makes the mode resonant, and the operator norm of the solution map is
the amplification ``A_n`` that the iteration schedule has to dominate with a
power law ``C0 |n|^(mu-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circle import CircleDiffeo
from .errors import (
    NerveError,
    PathError,
    ResonantModeError,
    CoboundaryError,
    ValidationError,
)

TWO_PI = 2.0 * np.pi

# Relative floor under which a mode system counts as rank deficient. Matrix
# entries are unimodular, so the absolute scale max(1, s_max) is the right
# reference even for 1x1 systems.
RANK_RCOND = 1e-12


@dataclass(frozen=True)
class Edge:
    """Oriented labeled edge of the nerve; the transition maps src to dst."""

    src: str
    dst: str
    label: str

    def __str__(self):
        return f"{self.src}->{self.dst}[{self.label}]"


@dataclass(frozen=True)
class Nerve:
    """Covering nerve: chart ids, oriented multi-edges, and the chart triples
    with nonempty triple overlap."""

    charts: tuple
    edges: tuple
    triples: tuple = ()

    def __post_init__(self):
        charts = tuple(self.charts)
        edges = tuple(self.edges)
        triples = tuple(tuple(t) for t in self.triples)
        object.__setattr__(self, "charts", charts)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "triples", triples)
        if len(set(charts)) != len(charts) or not charts:
            raise NerveError("chart ids must be nonempty and unique")
        seen = set()
        for e in edges:
            if e.src not in charts or e.dst not in charts:
                raise NerveError(f"edge {e} references unknown chart")
            key = (e.src, e.dst, e.label)
            if key in seen:
                raise NerveError(f"duplicate edge label {e}")
            seen.add(key)
        for t in triples:
            if len(t) != 3 or any(c not in charts for c in t):
                raise NerveError(f"bad triple {t}")
        if not self._connected():
            raise NerveError("underlying nerve graph is disconnected")

    def _adjacency(self) -> dict:
        adj: dict = {c: [] for c in self.charts}
        for e in self.edges:
            adj[e.src].append((e.dst, e, +1))
            adj[e.dst].append((e.src, e, -1))
        return adj

    def _connected(self) -> bool:
        adj = self._adjacency()
        seen = {self.charts[0]}
        stack = [self.charts[0]]
        while stack:
            for nxt, _, _ in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.charts)

    def chart_index(self, chart) -> int:
        return self.charts.index(chart)

    def fundamental_cycles(self) -> list:
        """One closed walk per non-tree edge, as lists of (edge, sign) steps."""
        adj = self._adjacency()
        root = self.charts[0]
        parent: dict = {root: None}
        order = [root]
        tree_edges = set()
        queue = [root]
        while queue:
            v = queue.pop(0)
            for nxt, e, sign in adj[v]:
                if nxt not in parent:
                    parent[nxt] = (v, e, sign)
                    tree_edges.add(e)
                    order.append(nxt)
                    queue.append(nxt)

        def path_to_root(v):
            steps = []
            while parent[v] is not None:
                up, e, sign = parent[v]
                steps.append((e, -sign))  # traverse child -> parent
                v = up
            return steps

        cycles = []
        for e in self.edges:
            if e in tree_edges:
                continue
            down_src = path_to_root(e.src)  # src -> root
            down_dst = path_to_root(e.dst)  # dst -> root
            while down_src and down_dst and down_src[-1][0] is down_dst[-1][0]:
                down_src.pop()
                down_dst.pop()
            # closed walk based at src: e, then dst -> lca, then lca -> src
            back_up = [(ed, -sg) for ed, sg in reversed(down_src)]
            cycles.append([(e, +1)] + down_dst + back_up)
        return cycles


@dataclass(frozen=True)
class UnitaryFlatBundle:
    """Per-edge unit multipliers ``t_e = e^{i phi_e}`` stored as phases,
    satisfying the 1-cocycle condition on every listed triple."""

    nerve: Nerve
    phases: tuple

    def __post_init__(self):
        phases = tuple(float(p) % TWO_PI for p in self.phases)
        object.__setattr__(self, "phases", phases)
        if len(phases) != len(self.nerve.edges):
            raise ValidationError("one phase per edge required")
        self._check_cocycle()

    def _check_cocycle(self, tol: float = 1e-10):
        by_pair: dict = {}
        for e, p in zip(self.nerve.edges, self.phases):
            by_pair.setdefault((e.src, e.dst), []).append(p)
        for (i, j, k) in self.nerve.triples:
            for p_ji in by_pair.get((i, j), []):
                for p_kj in by_pair.get((j, k), []):
                    for p_ki in by_pair.get((i, k), []):
                        defect = (p_kj + p_ji - p_ki) % TWO_PI
                        defect = min(defect, TWO_PI - defect)
                        if defect > tol:
                            raise ValidationError(
                                f"cocycle condition fails on triple {(i, j, k)}: "
                                f"defect {defect:.3e}"
                            )

    def phase_of(self, edge: Edge) -> float:
        return self.phases[self.nerve.edges.index(edge)]

    def to_json_dict(self) -> dict:
        return {
            "charts": list(self.nerve.charts),
            "edges": [
                {"from": e.src, "to": e.dst, "label": e.label, "phase": p}
                for e, p in zip(self.nerve.edges, self.phases)
            ],
            "triples": [list(t) for t in self.nerve.triples],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "UnitaryFlatBundle":
        nerve = Nerve(
            charts=tuple(doc["charts"]),
            edges=tuple(Edge(e["from"], e["to"], e["label"]) for e in doc["edges"]),
            triples=tuple(tuple(t) for t in doc.get("triples", [])),
        )
        return cls(nerve, tuple(float(e["phase"]) for e in doc["edges"]))


@dataclass(frozen=True)
class TransitionSystem:
    """One circle diffeomorphism per nerve edge at a common working width."""

    nerve: Nerve
    transitions: tuple
    width: float

    def __post_init__(self):
        transitions = tuple(self.transitions)
        object.__setattr__(self, "transitions", transitions)
        if len(transitions) != len(self.nerve.edges):
            raise ValidationError("one transition per edge required")
        for e, f in zip(self.nerve.edges, transitions):
            if f.width < self.width - 1e-12:
                raise ValidationError(
                    f"transition on {e} has width {f.width:.6g} below the "
                    f"system width {self.width:.6g}"
                )
        self.bundle()  # validates the cocycle condition on triples

    def bundle(self) -> UnitaryFlatBundle:
        return UnitaryFlatBundle(
            self.nerve, tuple(f.phase for f in self.transitions)
        )

    def transition_of(self, edge: Edge) -> CircleDiffeo:
        return self.transitions[self.nerve.edges.index(edge)]

    def max_hat_majorant(self, sigma_prime: float) -> float:
        from .series import majorant_norm

        return max(
            (majorant_norm(f.hat, sigma_prime) for f in self.transitions),
            default=0.0,
        )


def holonomy(bundle: UnitaryFlatBundle, loop: Sequence) -> float:
    """Signed sum of edge phases along a closed walk, mod 2 pi.

    ``loop`` is a sequence of (edge, sign) steps; sign +1 traverses the edge
    src -> dst, sign -1 the reverse.
    """
    if len(loop) == 0:
        return 0.0
    first_edge, first_sign = loop[0]
    at = first_edge.src if first_sign > 0 else first_edge.dst
    start = at
    total = 0.0
    for edge, sign in loop:
        head = edge.src if sign > 0 else edge.dst
        tail = edge.dst if sign > 0 else edge.src
        if head != at:
            raise PathError(f"walk breaks at {at}: next step {edge} starts at {head}")
        total += sign * bundle.phase_of(edge)
        at = tail
    if at != start:
        raise PathError(f"walk is not closed: ends at {at}, started at {start}")
    return float(total % TWO_PI)


def mode_matrix(bundle: UnitaryFlatBundle, n: int) -> np.ndarray:
    nerve = bundle.nerve
    a = np.zeros((len(nerve.edges), len(nerve.charts)), dtype=complex)
    for row, (e, phi) in enumerate(zip(nerve.edges, bundle.phases)):
        j = nerve.chart_index(e.src)
        k = nerve.chart_index(e.dst)
        a[row, k] += np.exp(1j * n * phi)
        a[row, j] -= 1.0
    return a


@dataclass(frozen=True)
class ModeCochainSolution:
    """Solution of the mode-n coboundary system."""

    n: int
    a: np.ndarray                 # per chart, aligned with nerve.charts
    residual: float               # inf-norm of equation defects
    amplification: float          # max_j |a_j| / max_e |b_e|
    has_kernel: bool = False      # gauge freedom (min-norm representative)

    def as_dict(self, nerve: Nerve) -> dict:
        return {c: complex(v) for c, v in zip(nerve.charts, self.a)}


def _resonant_cycle(bundle: UnitaryFlatBundle, n: int):
    """Cycle minimizing |e^{i n holonomy} - 1|, or None if the nerve is a forest."""
    cycles = bundle.nerve.fundamental_cycles()
    if not cycles:
        return None
    best = None
    best_gap = np.inf
    for cyc in cycles:
        h = holonomy(bundle, cyc)
        gap = abs(np.exp(1j * n * h) - 1.0)
        if gap < best_gap:
            best_gap = gap
            best = (cyc, h)
    return best


def solve_mode(
    bundle: UnitaryFlatBundle,
    n: int,
    b,
    solvability_tol: float | None = None,
) -> ModeCochainSolution:
    """Least-squares solution of ``e^{i n phi_e} a_k - a_j = b_e`` over the
    charts, minimum 2-norm representative.

    Rank deficiency means the n-twisted parallel transport is globally
    consistent: on a nerve with cycles that is a resonance
    (some loop has ``N^{tensor n}`` trivial) and raises; on a forest it is
    plain gauge freedom and the min-norm representative is returned flagged.
    With ``solvability_tol`` set, a residual above that absolute value raises
    the coboundary-condition failure for this mode; callers scale it to the
    data (the engine uses a fraction of the largest mode norm of the step).
    """
    if n == 0:
        raise ValidationError("mode n must be nonzero")
    nerve = bundle.nerve
    if isinstance(b, Mapping):
        bvec = np.array([complex(b[e]) for e in nerve.edges])
    else:
        bvec = np.asarray(b, dtype=complex)
        if bvec.shape != (len(nerve.edges),):
            raise ValidationError(
                f"b must have one entry per edge ({len(nerve.edges)}), got {bvec.shape}"
            )

    a_mat = mode_matrix(bundle, n)
    svals = np.linalg.svd(a_mat, compute_uv=False)
    s_max = float(svals[0]) if svals.size else 0.0
    rank = int(np.sum(svals > RANK_RCOND * max(1.0, s_max)))
    deficient = rank < len(nerve.charts)
    if deficient:
        hit = _resonant_cycle(bundle, n)
        if hit is not None:
            cyc, h = hit
            raise ResonantModeError(
                mode=n,
                loop=[f"{'+' if s > 0 else '-'}{e}" for e, s in cyc],
                holonomy=float((n * h) % TWO_PI),
            )

    sol, *_ = np.linalg.lstsq(a_mat, bvec, rcond=RANK_RCOND)
    residual = float(np.max(np.abs(a_mat @ sol - bvec))) if bvec.size else 0.0
    b_norm = float(np.max(np.abs(bvec))) if bvec.size else 0.0
    amp = float(np.max(np.abs(sol)) / b_norm) if b_norm > 0 else 0.0
    if solvability_tol is not None and residual > solvability_tol:
        raise CoboundaryError(mode=n, residual=residual, norm=b_norm)
    return ModeCochainSolution(
        n=n, a=sol, residual=residual, amplification=amp, has_kernel=deficient
    )


def amplification_spectrum(bundle: UnitaryFlatBundle, n_max: int) -> dict:
    """Per-mode operator norm (inf to inf) of the min-norm solution map,
    for all modes 0 < |n| <= n_max; raises on the first resonant mode."""
    if n_max < 1:
        raise ValidationError("n_max must be positive")
    out: dict[int, float] = {}
    n_charts = len(bundle.nerve.charts)
    n_edges = len(bundle.nerve.edges)
    # ascending |n| so the fundamental resonance is the one reported
    for k in range(1, n_max + 1):
        for n in (k, -k):
            a_mat = mode_matrix(bundle, n)
            svals = np.linalg.svd(a_mat, compute_uv=False)
            s_max = float(svals[0]) if svals.size else 0.0
            rank = int(np.sum(svals > RANK_RCOND * max(1.0, s_max)))
            if rank < n_charts:
                hit = _resonant_cycle(bundle, n)
                if hit is not None:
                    cyc, h = hit
                    raise ResonantModeError(
                        mode=n,
                        loop=[f"{'+' if s > 0 else '-'}{e}" for e, s in cyc],
                        holonomy=float((n * h) % TWO_PI),
                    )
            pinv = np.linalg.pinv(a_mat, rcond=RANK_RCOND)
            out[n] = float(np.max(np.sum(np.abs(pinv), axis=1))) if n_edges else 0.0
    return out


@dataclass(frozen=True)
class DiophantineFit:
    """Power-law fit ``A_n <= C0 |n|^(mu-1)`` over a measured spectrum."""

    c0: float
    mu: float
    argmax_mode: int
    per_mode_pass: dict = field(default_factory=dict)
    superpolynomial: bool = False

    def to_json_dict(self) -> dict:
        return {
            "C0": self.c0,
            "mu": self.mu,
            "argmax_mode": self.argmax_mode,
            "superpolynomial": self.superpolynomial,
            "all_pass": all(self.per_mode_pass.values()),
        }


def fit_diophantine(spectrum: Mapping[int, float], mu: float) -> DiophantineFit:
    """Smallest C0 with ``A_n <= C0 |n|^(mu-1)`` across the spectrum.

    Every mode passes with equality at the argmax by construction; the flag
    marks spectra whose ratio ``A_n / |n|^(mu-1)`` peaks at the last mode and
    dwarfs the bulk, the signature of super-polynomial (Liouville-like)
    growth that no power law of this exponent captures.
    """
    if mu <= 1:
        raise ValidationError(f"mu must exceed 1, got {mu}")
    if not spectrum:
        raise ValidationError("empty amplification spectrum")
    ratios = {n: a / abs(n) ** (mu - 1.0) for n, a in spectrum.items()}
    argmax = max(ratios, key=lambda n: (ratios[n], -abs(n)))
    c0 = ratios[argmax]
    per_mode = {n: spectrum[n] <= c0 * abs(n) ** (mu - 1.0) * (1 + 1e-12)
                for n in spectrum}
    last = max(abs(n) for n in spectrum)
    bulk = float(np.median(list(ratios.values())))
    superpoly = abs(argmax) == last and bulk > 0 and c0 > 4.0 * bulk
    return DiophantineFit(
        c0=float(c0),
        mu=float(mu),
        argmax_mode=int(argmax),
        per_mode_pass=per_mode,
        superpolynomial=bool(superpoly),
    )
