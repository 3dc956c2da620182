"""Box-ball style dynamics on a bi-infinite line of crystal sites.

A state is a finite window of sites over a periodic capacity pattern; outside
the window every site is the background element delta[a_k] for the state's
offset k.  Time evolution comes in three interchangeable forms:

* carrier: thread a large auxiliary factor through the line by elementary
  R swaps until it returns to its rest value;
* factorized: a chain of global Weyl operators realized as left-to-right
  (raising) or right-to-left (lowering) vertex sweeps, then the diagram
  automorphism letterwise;
* fine: the partial chains interpolating between consecutive carrier steps.

Sweeps are exact on the infinite line: background sites to the left of the
window transmit the carrier state unchanged, and to the right each background
site strictly absorbs it, so finitely many extra sites suffice.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import AlgebraSpec
from .crystal import (
    CapExceeded,
    CrystalElement,
    Tensor,
    delta,
    parse_tensor,
    sigma_letterwise_pow,
    t_def,
    weyl_s,
)
from .rmatrix import InapplicableError, r_elementary, r_factorized

_SWEEP_LIMIT = 100_000


def _minimal_period(pat: tuple[int, ...]) -> tuple[int, ...]:
    for p in range(1, len(pat)):
        if len(pat) % p == 0 and pat == pat[p:] + pat[:p]:
            return pat[:p]
    return pat


@dataclass(frozen=True, eq=False)
class AutomatonState:
    """A line configuration: window of sites plus implicit background."""

    spec: AlgebraSpec
    k: int
    window_start: int
    window: tuple[CrystalElement, ...]
    pattern: tuple[int, ...]

    def __post_init__(self):
        pat = self.pattern
        if isinstance(pat, int):
            pat = (pat,)
        pat = _minimal_period(tuple(int(c) for c in pat))
        if not pat or any(c < 1 for c in pat):
            raise ValueError(f"capacities must be positive, got {pat}")
        object.__setattr__(self, "pattern", pat)
        for p, b in enumerate(self.window):
            want = pat[(self.window_start + p) % len(pat)]
            if b.l != want:
                raise ValueError(
                    f"site {self.window_start + p} holds a B_{b.l} element, "
                    f"capacity pattern demands B_{want}"
                )
            if b.spec != self.spec:
                raise ValueError("window element from a different algebra")
        # trim background sites so equal configurations compare equal
        a = self.spec.letter_at(self.k)
        win = list(self.window)
        start = self.window_start
        while win and win[0] == delta(self.spec, win[0].l, a):
            win.pop(0)
            start += 1
        while win and win[-1] == delta(self.spec, win[-1].l, a):
            win.pop()
        if not win:
            start = 0
        object.__setattr__(self, "window", tuple(win))
        object.__setattr__(self, "window_start", start)

    @property
    def background_letter(self) -> str:
        return self.spec.letter_at(self.k)

    def capacity_at(self, j: int) -> int:
        return self.pattern[j % len(self.pattern)]

    def background(self, j: int) -> CrystalElement:
        return delta(self.spec, self.capacity_at(j), self.background_letter)

    def site(self, j: int) -> CrystalElement:
        p = j - self.window_start
        if 0 <= p < len(self.window):
            return self.window[p]
        return self.background(j)

    def _key(self):
        return (
            self.spec.family,
            self.spec.rank,
            self.background_letter,
            self.pattern,
            self.window_start if self.window else 0,
            tuple(b.x for b in self.window),
        )

    def __eq__(self, other):
        return isinstance(other, AutomatonState) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def deviation(self) -> int:
        """Total letter weight sitting off the background letter."""
        a = self.background_letter
        return sum(b.l - b.get(a) for b in self.window)

    def weight_profile(self) -> dict[str, int]:
        """Per-letter surplus relative to the all-background line."""
        out: dict[str, int] = {}
        for p, b in enumerate(self.window):
            bg = self.background(self.window_start + p)
            for a in self.spec.word_letters:
                v = b.get(a) - bg.get(a)
                if v:
                    out[a] = out.get(a, 0) + v
        return {a: v for a, v in sorted(out.items()) if v}

    def render(self, lo: int | None = None, hi: int | None = None,
               pad: int = 1, sep: str = ".") -> str:
        if lo is None:
            lo = (self.window_start if self.window else 0) - pad
        if hi is None:
            end = self.window_start + len(self.window) - 1 if self.window else 0
            hi = end + pad
        return sep.join(self.site(j).word() for j in range(lo, hi + 1))

    def __repr__(self):
        return f"<state k={self.k} @{self.window_start} {self.render(pad=0)}>"


def parse_state(spec: AlgebraSpec, k: int, text: str,
                pattern: tuple[int, ...] | int | None = None,
                window_start: int = 0) -> AutomatonState:
    """Build a state from dot-separated site words.

    Without an explicit capacity pattern the site capacities must all agree
    and become a constant pattern.
    """
    t = parse_tensor(spec, text)
    if pattern is None:
        caps = {f.l for f in t.factors}
        if len(caps) != 1:
            raise ValueError(
                "sites have mixed capacities; give the capacity pattern explicitly"
            )
        pattern = (caps.pop(),)
    return AutomatonState(spec, k, window_start, t.factors, pattern)


# ---------------------------------------------------------------------------
# vertex cells


def vertex_step(bk, i: int, s: int, b: CrystalElement) -> tuple[CrystalElement, int]:
    """Raising cell: new site and outgoing carrier value."""
    e, p = bk.eps(i, b), bk.phi(i, b)
    for _ in range(max(e - s, 0)):
        b = bk.e(i, b)
    return b, p + max(s - e, 0)


def dual_vertex_step(bk, i: int, s: int, b: CrystalElement) -> tuple[CrystalElement, int]:
    """Lowering cell, swept right to left."""
    e, p = bk.eps(i, b), bk.phi(i, b)
    for _ in range(max(p - s, 0)):
        b = bk.f(i, b)
    return b, e + max(s - p, 0)


def _sweep_raise(state_like, bk, window, start, color, bg_letter):
    spec, cap_at = state_like.spec, state_like.capacity_at
    s = 0
    out = []
    for b in window:
        b2, s = vertex_step(bk, color, s, b)
        out.append(b2)
    j = start + len(window)
    guard = 0
    while s > 0:
        b2, s2 = vertex_step(bk, color, s, delta(spec, cap_at(j), bg_letter))
        if s2 >= s:
            raise AssertionError("background site failed to absorb the sweep")
        out.append(b2)
        s, j, guard = s2, j + 1, guard + 1
        if guard > _SWEEP_LIMIT:
            raise CapExceeded("raising sweep exceeded the site budget")
    return out, start


def _sweep_lower(state_like, bk, window, start, color, bg_letter):
    spec, cap_at = state_like.spec, state_like.capacity_at
    s = 0
    out = []
    for b in reversed(window):
        b2, s = dual_vertex_step(bk, color, s, b)
        out.append(b2)
    j = start - 1
    guard = 0
    while s > 0:
        b2, s2 = dual_vertex_step(bk, color, s, delta(spec, cap_at(j), bg_letter))
        if s2 >= s:
            raise AssertionError("background site failed to absorb the sweep")
        out.append(b2)
        s, j, guard = s2, j - 1, guard + 1
        if guard > _SWEEP_LIMIT:
            raise CapExceeded("lowering sweep exceeded the site budget")
    out.reverse()
    return out, j + 1


# ---------------------------------------------------------------------------
# time evolution


def evolve_carrier(bk, state: AutomatonState, M: int,
                   extra_budget: int | None = None):
    """One carrier pass; returns the new state and the carrier value trace."""
    spec = state.spec
    a = state.background_letter
    rest = delta(spec, M, a)
    car = rest
    out = []
    trace = [car]
    j = state.window_start
    for b in state.window:
        b2, car = r_elementary(bk, car, b)
        out.append(b2)
        trace.append(car)
        j += 1
    budget = extra_budget if extra_budget is not None else 4 * state.deviation() + 16
    used = 0
    while car != rest:
        b2, car = r_elementary(bk, car, state.background(j))
        out.append(b2)
        trace.append(car)
        j += 1
        used += 1
        if used > budget:
            raise CapExceeded(
                f"carrier of capacity {M} did not return to rest within "
                f"{budget} extra sites"
            )
    new = AutomatonState(spec, state.k, state.window_start, tuple(out), state.pattern)
    return new, trace


def evolve_T(bk, state: AutomatonState, M0: int | None = None,
             M_limit: int = 512):
    """The stable large-carrier evolution: double M until the result settles."""
    M = M0 if M0 is not None else max(2, state.deviation())
    prev, _ = evolve_carrier(bk, state, M)
    while M <= M_limit:
        cur, _ = evolve_carrier(bk, state, 2 * M)
        if cur == prev:
            return prev, M
        prev, M = cur, 2 * M
    raise CapExceeded(f"carrier evolution did not settle below capacity {M_limit}")


def evolve_T_factorized(bk, state: AutomatonState, t: int = 1) -> AutomatonState:
    """t steps of the evolution as Weyl sweeps plus the automorphism power."""
    spec, k, d = state.spec, state.k, state.spec.d
    window, start = list(state.window), state.window_start
    if t > 0:
        for m in range(k + 1, k + t * d + 1):
            window, start = _sweep_raise(
                state, bk, window, start, spec.index_at(m), spec.letter_at(m - 1)
            )
    elif t < 0:
        for m in range(k, k + t * d, -1):
            window, start = _sweep_lower(
                state, bk, window, start, spec.index_at(m), spec.letter_at(m)
            )
    window = [sigma_letterwise_pow(b, t) for b in window]
    return AutomatonState(spec, k, start, tuple(window), state.pattern)


def evolve_fine(bk, state: AutomatonState, m: int) -> AutomatonState:
    """The interpolating step: partial sweep chain up to position m, then the
    per-site Weyl twist carrying the new background home."""
    spec, k = state.spec, state.k
    if m < k:
        raise ValueError(f"fine step index {m} below the offset {k}")
    window, start = list(state.window), state.window_start
    for mm in range(k + 1, m + 1):
        window, start = _sweep_raise(
            state, bk, window, start, spec.index_at(mm), spec.letter_at(mm - 1)
        )
    twisted = []
    for b in window:
        for mm in range(m, k, -1):
            b = weyl_s(bk, spec.index_at(mm), b)
        twisted.append(b)
    return AutomatonState(spec, k, start, tuple(twisted), state.pattern)


# ---------------------------------------------------------------------------
# column transport


def column_diagram_check(bk, u: CrystalElement, b: CrystalElement,
                         k: int = 0, margin: int | None = None) -> dict:
    """Replay one R swap as a column of vertex cells.

    Feeding t(u) into a column of raising cells over site b must reproduce
    the chain's site states and output t of the swapped-out factor.
    Raises InapplicableError when the chain itself declines.
    """
    spec = u.spec
    if margin is None:
        margin = b.l
    image, trace = r_factorized(bk, Tensor((u, b)), k=k, margin=margin)
    tk_u = t_def(bk, u, k)
    outputs = []
    cells_ok = True
    for j in range(1, spec.d + 1):
        i = spec.index_at(k + j)
        prev_site = trace.states[j - 1].factors[1]
        want_site, s_out = vertex_step(bk, i, tk_u[j - 1], prev_site)
        if want_site != trace.states[j].factors[1]:
            cells_ok = False
        outputs.append(s_out)
    b_oracle, v_oracle = r_elementary(bk, u, b)
    t_out = t_def(bk, v_oracle, k)
    ok = (
        cells_ok
        and tuple(outputs) == t_out
        and image == Tensor((b_oracle, v_oracle))
    )
    return {
        "ok": ok,
        "cells_ok": cells_ok,
        "outputs": list(outputs),
        "oracle_t": list(t_out),
        "image": image.word(),
        "oracle": Tensor((b_oracle, v_oracle)).word(),
    }
