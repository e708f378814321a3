"""Canned demonstrations printed by ``qdice demo <name>``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classical import fair_distribution
from .decision import SeparationDynamics, separated_conditional
from .measurement import (
    computational_measure,
    fourier_basis,
    immediate_conditional,
    measure_from_basis,
    measure_from_subspaces,
    outcome_probabilities,
)
from .qdt import decoy_effect
from .spaces import CompositeSpace, compose
from .states import pure_state, uniform_superposition
from .synchronous import conditional_tables, joint_probability, marginals


@dataclass
class Table:
    title: str
    header: list[str]
    rows: list[list]
    notes: list[str] = field(default_factory=list)

    def render(self) -> str:
        cells = [[_fmt(c) for c in row] for row in self.rows]
        widths = [max(len(h), *(len(r[i]) for r in cells)) for i, h in enumerate(self.header)]
        line = "  ".join("-" * w for w in widths)
        out = [self.title, "", "  ".join(h.rjust(w) for h, w in zip(self.header, widths)), line]
        out += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
        if self.notes:
            out += [""] + self.notes
        return "\n".join(out)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{x:.6f}"
    return str(x)


def repeat_coin() -> Table:
    rho = pure_state(uniform_superposition(2))
    z = computational_measure(2, ["heads", "tails"])
    rows = []
    for n, first in enumerate(z.labels):
        cond = immediate_conditional(rho, z, n, z)
        rows.append([first, *cond, *fair_distribution(2).probs])
    return Table(
        "Repeated toss of a quantum coin, second toss immediately after the first",
        ["first", "quantum p(heads|.)", "quantum p(tails|.)", "classical f(heads)", "classical f(tails)"],
        rows,
        ["Quantum: either one or zero. Classical independent tosses: 1/2 each."],
    )


def _coin_die_state():
    space = compose([("A", 2), ("B", 6)])
    v = np.zeros(12)
    for face in range(6):
        v[(face % 2) * 6 + face] = 1
    return pure_state(v, space), space


def coin_then_die() -> Table:
    rho, space = _coin_die_state()
    coin, die = computational_measure(2), computational_measure(6)
    rows = []
    for tau in (0.0, 100.0):
        p = separated_conditional(rho, space, ("A", coin, 0), SeparationDynamics(tau, 1.0), None, ("B", die))
        rows.append([f"{tau:g}", *p])
    return Table(
        "Die after the coin read 'even' (coin = parity of the face)",
        ["tau/t_rel", *[f"p(face {k + 1})" for k in range(6)]],
        rows,
        ["tau = 0 is the Lüders conditional; tau >> t_rel recovers the fair die 1/6."],
    )


def degenerate_die() -> Table:
    # A: nondegenerate Fourier basis; B: parity of the face (degenerate)
    a = measure_from_basis(fourier_basis(6))
    eye = np.eye(6)
    b = measure_from_subspaces([[eye[i] for i in (0, 2, 4)], [eye[i] for i in (1, 3, 5)]], ["odd", "even"])
    rho = pure_state(eye[0])
    rows = []
    for n in range(6):
        forward = immediate_conditional(rho, a, n, b)[0]
        backward = immediate_conditional(rho, b, 0, a)[n]
        rows.append([f"A_{n}", forward, backward, abs(forward - backward)])
    return Table(
        "Degenerate die: p(B_odd | A_n) versus p(A_n | B_odd), state = face 1",
        ["A_n", "p(B_odd|A_n)", "p(A_n|B_odd)", "|difference|"],
        rows,
        ["Degeneracy of B breaks the reciprocal symmetry of the transition probability."],
    )


def bell_joint() -> Table:
    space = compose([("A", 2), ("B", 2)])
    rho = pure_state([1, 0, 0, 1], space)
    z = computational_measure(2)
    jd = joint_probability(rho, space, ("A", z), ("B", z))
    pa, _ = marginals(jd)
    a_given_b, _ = conditional_tables(jd)
    rows = [[f"A={n}", *jd.table[n], pa[n], *a_given_b[n]] for n in range(2)]
    return Table(
        "Bell state (|00> + |11>)/sqrt(2) read simultaneously at A and B",
        ["", "p(A,B=0)", "p(A,B=1)", "p(A)", "p(A|B=0)", "p(A|B=1)"],
        rows,
    )


def decoy() -> Table:
    rep = decoy_effect()
    rows = [[name, rep.f[i], rep.q[i], rep.p[i], rep.p_exp[i], rep.deviation[i]]
            for i, name in enumerate(["A (quality)", "B (price)"])]
    return Table(
        "Decoy effect: oven choice after a decoy C is shown",
        ["option", "f", "q", "p predicted", "p experiment", "|deviation|"],
        rows,
    )


def separation_sweep() -> Table:
    space = CompositeSpace.single(2)
    rho = pure_state([1, 1], space)
    z = computational_measure(2)
    x = measure_from_basis(fourier_basis(2), ["+", "-"])
    unconditional = outcome_probabilities(rho, x)[0]
    rows = []
    for ratio in (0.0, 0.5, 1.0, 2.0, 100.0):
        dyn = SeparationDynamics(ratio, 1.0)
        p = separated_conditional(rho, space, ("A", z, 0), dyn, None, ("A", x))
        rows.append([f"{ratio:g}", dyn.weight, p[0], unconditional])
    return Table(
        "p(+ | 0) for the state |+> as the separation time grows",
        ["tau/t_rel", "weight", "p(+|0)", "p(+) unconditional"],
        rows,
    )


DEMOS = {
    "repeat_coin": repeat_coin,
    "coin_then_die": coin_then_die,
    "degenerate_die": degenerate_die,
    "bell_joint": bell_joint,
    "decoy": decoy,
    "separation_sweep": separation_sweep,
}
