"""Lipschitz quotients of finite metric spaces and chain lifting.

A surjection f: X -> Y is an (a, b)-Lipschitz quotient when for every center
x and radius r

    B_Y(f(x), r/a)  is contained in  f(B_X(x, r))  is contained in  B_Y(f(x), b r).

On finite spaces ball memberships only change at realized distances, so it
suffices to test r over the realized distances of both spaces together with
the midpoints between consecutive realized values (any other radius gives the
same pair of balls as one of these).  The co-Lipschitz inclusion is exactly
what allows a Y-valued Markov chain to be lifted step by step to X while
expanding each step by at most the factor a; that lift transfers the
p-convexity functional between the two spaces with factor (ab)^p = D^p.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import HorizonTooLong, LiftFailed, NotSurjective, PreconditionViolated
from .markov import ChainSpec, convexity_ratio, rhs_step_sum

MAX_HORIZON = 8
MAX_STATES = 20


class QuotientMap:
    """A verified-on-construction (a, b)-Lipschitz quotient."""

    def __init__(self, f, a, b, verify=True):
        self.f = f
        self.a = Fraction(a) if not isinstance(a, float) else a
        self.b = Fraction(b) if not isinstance(b, float) else b
        if verify:
            bad = verify_quotient(f, a, b)
            if bad:
                raise PreconditionViolated(
                    f"not an ({a}, {b})-quotient: first violation {bad[0]}")

    @property
    def D(self):
        return self.a * self.b

    def __call__(self, x):
        return self.f(x)


def _test_radii(f):
    """Realized distances of source and target plus consecutive midpoints."""
    vals = set()
    for space in (f.source, f.target):
        pts = space.points
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                vals.add(space.dist(pts[i], pts[j]))
    vals = sorted(vals)
    radii = list(vals)
    for lo, hi in zip(vals, vals[1:]):
        radii.append((lo + hi) / (2 if isinstance(lo, float) else Fraction(2)))
    return sorted(radii)


def verify_quotient(f, a, b):
    """All violations of the two ball inclusions; empty iff (a, b)-quotient.

    Violations are tuples ("colip" | "lip", center, radius, witness point).
    Raises NotSurjective when some target point has no preimage.
    """
    targets = set(f.target.points)
    images = {f(x) for x in f.source.points}
    missing = targets - images
    if missing:
        raise NotSurjective(f"no preimage for {sorted(missing, key=repr)[0]!r}")
    radii = _test_radii(f)
    violations = []
    for x in f.source.points:
        fx = f(x)
        for r in radii:
            ball_image = {f(u) for u in f.source.points if f.source.dist(x, u) <= r}
            for y in f.target.points:
                dy = f.target.dist(fx, y)
                if dy * a <= r and y not in ball_image:
                    violations.append(("colip", x, r, y))
                if y in ball_image and dy > b * r:
                    violations.append(("lip", x, r, y))
    return violations


def lift_chain(q, chain, g):
    """The greedy trajectory lift h*: finite trajectories over the chain's
    states -> source points, with f(h*(w)) = g(last state of w) and

        d_X(h*(w0..w_{t-1}), h*(w0..w_t)) <= a * d_Y(g(w_{t-1}), g(w_t)).

    Each step picks the first valid preimage in the source's point order
    (deterministic); the co-Lipschitz inclusion guarantees one exists, so a
    dead end raises LiftFailed and means the quotient verification was wrong.
    Returns a memoizing callable on state tuples.
    """
    f = q.f
    source_order = f.source.points
    cache = {}

    def lift(traj):
        traj = tuple(traj)
        if not traj:
            raise ValueError("empty trajectory")
        hit = cache.get(traj)
        if hit is not None:
            return hit
        y = g(traj[-1])
        if len(traj) == 1:
            for u in source_order:
                if f(u) == y:
                    cache[traj] = u
                    return u
            raise LiftFailed(f"no preimage of {y!r}")  # pragma: no cover
        prev = lift(traj[:-1])
        step = q.a * f.target.dist(g(traj[-2]), y)
        for u in source_order:
            if f(u) == y and f.source.dist(prev, u) <= step:
                assert f(u) == y
                cache[traj] = u
                return u
        raise LiftFailed(
            f"no preimage of {y!r} within {step} of {prev!r} "
            "(co-Lipschitz inclusion must have been violated)")

    lift.cache = cache
    return lift


def trajectory_chain(chain):
    """The history-augmented copy of the chain: states are trajectories
    (tuples of visited states), which makes the lifted process Markov.

    Guarded: horizon <= 8 and <= 20 base states.
    """
    if chain.horizon > MAX_HORIZON:
        raise HorizonTooLong(f"horizon {chain.horizon} > {MAX_HORIZON}")
    if len(chain.states) > MAX_STATES:
        raise HorizonTooLong(f"{len(chain.states)} states > {MAX_STATES}")
    initial = {(z,): p for z, p in chain.initial.items() if p}
    frontier = list(initial)
    all_states = list(frontier)
    kernels = {}
    for t in range(chain.t_min + 1, chain.t_max + 1):
        kernel = chain.step_kernel(t) or {}
        rows = {}
        nxt = []
        for traj in frontier:
            row = kernel.get(traj[-1])
            if row is None:
                nxt.append(traj)   # held fixed: trajectory does not extend
                continue
            rows[traj] = {traj + (x,): px for x, px in row.items() if px}
            nxt.extend(rows[traj])
        if rows:
            kernels[t] = rows
        frontier = nxt
        all_states.extend(frontier)
    seen = set()
    states = [s for s in all_states if not (s in seen or seen.add(s))]
    return ChainSpec(states, chain.t_min, chain.t_max, kernels, initial)


def transfer_check(q, chain, g, p, k_max=None):
    """Verify the quotient transfer inequality on a concrete instance.

    Computes the p-convexity functional of (chain, g) in Y and of the lifted
    trajectory chain in X, checks the two step-level inequalities from the
    lifting construction

        RHS_X <= a^p * RHS_Y      (each lifted step is at most a times longer)
        LHS_Y <= b^p * LHS_X      (f is b-Lipschitz and f o h* = g*)

    and returns (ratio_Y, D^p * ratio_X, holds) with D = ab, so holds implies
    this instance's convexity witness transfers with factor D^p.
    """
    f = q.f
    rep_y = convexity_ratio(chain, g, f.target, p, k_max=k_max)
    tchain = trajectory_chain(chain)
    h_star = lift_chain(q, chain, g)
    rep_x = convexity_ratio(tchain, h_star, f.source, p, k_max=k_max)
    exact = isinstance(rep_y.rhs, (int, Fraction)) and isinstance(rep_x.rhs, (int, Fraction))
    ap = Fraction(q.a) ** int(p) if exact and not isinstance(q.a, float) else float(q.a) ** p
    bp = Fraction(q.b) ** int(p) if exact and not isinstance(q.b, float) else float(q.b) ** p
    step_ok = rep_x.rhs <= ap * rep_y.rhs
    lhs_ok = rep_y.lhs_total <= bp * rep_x.lhs_total
    bound = ap * bp * rep_x.ratio
    holds = step_ok and lhs_ok and rep_y.ratio <= bound
    return rep_y.ratio, bound, holds
