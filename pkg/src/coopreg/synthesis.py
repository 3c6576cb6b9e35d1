"""Controller synthesis for delayed multi-agent output regulation.

The design pipeline assembled here takes a nominal agent model, a
leader-follower graph, and an internal model, and produces the gains of
a distributed regulator that tolerates a known input delay ``r_con``
and communication delay ``r_com``:

1. :func:`check_assumptions` evaluates the six structural conditions
   the theory needs (connectivity, stabilizability, detectability,
   transmission zeros, neutrally stable exosystem, no exponentially
   unstable open-loop modes).
2. :func:`build_augmented` forms the cascade of the agent with the
   internal model.
3. :func:`state_feedback_gain` / :func:`observer_gain` solve a
   parametric algebraic Riccati equation whose low-gain parameter
   ``gamma`` shrinks the feedback aggressiveness until the delayed loop
   can absorb it; the delay enters through an extra factor ``A**(r+1)``
   in the gain formula.
4. :func:`certify_closed_loop` builds the nominal networked closed
   loop, lifts the delayed recursion to a delay-free companion system,
   and checks that the lift is Schur.
5. :func:`auto_tune_gamma` halves ``gamma`` until the certificate
   accepts, which is the standard way to pick the parameter in
   practice.

The Riccati equation solved throughout is, for a pair ``(A, B)`` and
``0 < gamma < 1``::

    A' P A - P - A' P B (I + B' P B)^{-1} B' P A = -gamma * P

whose stabilizing solution coincides with the standard DARE solution
(state weight zero, input weight identity) for the scaled matrix
``A / sqrt(1 - gamma)``.  That scaling is what the fixed-point
iteration in :func:`solve_parametric_dare` exploits, and it gives an
independent cross-check via any standard DARE solver.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError, NumericalError, SynthesisError
from .graphs import connectivity_spectral_check, h_matrix, has_leader_spanning_tree
from .matrixops import (
    SCHUR_MARGIN,
    as_matrix,
    complex_rank,
    detectable,
    eigenvalues,
    kron,
    require_square,
    spectral_radius,
    stabilizable,
)

__all__ = [
    "NominalPlant",
    "DelaySpec",
    "GainSet",
    "AssumptionReport",
    "check_assumptions",
    "transmission_zeros_ok",
    "solve_parametric_dare",
    "state_feedback_gain",
    "observer_gain",
    "build_augmented",
    "closed_loop_blocks",
    "delay_lift",
    "certify_closed_loop",
    "synthesize_gains",
    "auto_tune_gamma",
]


@dataclass(frozen=True, eq=False)
class NominalPlant:
    """Nominal agent model ``x+ = A x + B u + E v``, ``y = C x``.

    ``e`` is the nominal disturbance input matrix and may be omitted
    when per-agent disturbance maps are supplied elsewhere; synthesis
    itself only uses ``(A, B, C)``.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    e: np.ndarray = None

    def __post_init__(self):
        a = require_square(as_matrix(self.a, "plant.a"), "plant.a")
        b = as_matrix(self.b, "plant.b")
        c = as_matrix(self.c, "plant.c")
        n = a.shape[0]
        if b.shape[0] != n:
            raise DimensionError(f"plant.b: expected {n} rows, got {b.shape[0]}")
        if c.shape[1] != n:
            raise DimensionError(f"plant.c: expected {n} columns, got {c.shape[1]}")
        e = self.e
        if e is not None:
            e = as_matrix(e, "plant.e")
            if e.shape[0] != n:
                raise DimensionError(f"plant.e: expected {n} rows, got {e.shape[0]}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "e", e)

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def m(self):
        return self.b.shape[1]

    @property
    def p(self):
        return self.c.shape[0]


@dataclass(frozen=True)
class DelaySpec:
    """Input delay ``r_con`` and communication delay ``r_com`` (both in steps)."""

    r_con: int = 0
    r_com: int = 0

    def __post_init__(self):
        for name in ("r_con", "r_com"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ConfigurationError(f"delays.{name}: must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def r(self):
        """Total round-trip delay ``r_con + r_com`` seen by the feedback path."""
        return self.r_con + self.r_com


@dataclass(frozen=True, eq=False)
class GainSet:
    """Synthesized controller gains plus the parameters that produced them.

    ``k_x`` acts on relative plant states, ``k_z`` on the internal-model
    state.  In the output-feedback law the same two matrices appear as
    ``k_1 = k_z`` (internal model) and ``k_2 = k_x`` (observer
    estimates); the aliases are provided to keep call sites readable.
    ``l_obs`` is ``None`` for pure state-feedback designs.
    """

    k_x: np.ndarray
    k_z: np.ndarray
    gamma: float
    nu: float
    l_obs: np.ndarray = None
    gamma_l: float = None
    nu_l: float = None
    observer_r: int = 0

    @property
    def k_1(self):
        return self.k_z

    @property
    def k_2(self):
        return self.k_x


@dataclass
class AssumptionReport:
    """Outcome of the structural checks; iterable list of (name, ok, detail)."""

    entries: list = field(default_factory=list)

    def add(self, name, ok, detail):
        self.entries.append((name, bool(ok), detail))

    @property
    def all_ok(self):
        return all(ok for _, ok, _ in self.entries)

    def lines(self):
        """Formatted one-per-check report lines."""
        return [
            f"{'PASS' if ok else 'FAIL'}  {name}: {detail}" for name, ok, detail in self.entries
        ]

    def __iter__(self):
        return iter(self.entries)


def transmission_zeros_ok(plant, exo, tol=1e-9):
    """Check the non-resonance condition against the exosystem modes.

    For every eigenvalue ``lam`` of ``S`` the pencil::

        [ A - lam I   B ]
        [     C       0 ]

    must have full row rank ``n + p``.  Returns ``(ok, offending)``
    where ``offending`` is the first eigenvalue that fails (or None).
    """
    n, p = plant.n, plant.p
    zero = np.zeros((p, plant.m))
    for lam in eigenvalues(exo.s, "S"):
        pencil = np.block(
            [[plant.a - lam * np.eye(n), plant.b], [plant.c.astype(complex), zero]]
        )
        if complex_rank(pencil, tol=tol) < n + p:
            return False, complex(lam)
    return True, None


def check_assumptions(plant, exo, g, tol=1e-9):
    """Evaluate the six structural conditions required by the design.

    Parameters
    ----------
    plant : NominalPlant
    exo : Exosystem
    g : Digraph
    tol : float, optional
        Rank / eigenvalue tolerance.

    Returns
    -------
    AssumptionReport
        Six entries: connectivity, agreement of the two connectivity
        tests, stabilizability, detectability, exosystem modes, and
        transmission zeros combined with the open-loop spectrum bound.
    """
    rep = AssumptionReport()

    tree = has_leader_spanning_tree(g)
    spectral = connectivity_spectral_check(g, tol=tol)
    h, _ = h_matrix(g)
    re_min = float(np.min(np.real(eigenvalues(h, "H")))) if h.size else float("nan")
    rep.add(
        "connectivity",
        tree and spectral,
        f"leader-rooted spanning tree: {tree}; min Re eig(H) = {re_min:.4f}",
    )

    stab = stabilizable(plant.a, plant.b, tol=tol)
    rep.add("stabilizability", stab, "(A, B) passes the PBH test" if stab else "(A, B) fails the PBH test")

    det = detectable(plant.c, plant.a, tol=tol)
    rep.add("detectability", det, "(C, A) passes the PBH test" if det else "(C, A) fails the PBH test")

    tz_ok, lam_bad = transmission_zeros_ok(plant, exo, tol=tol)
    rep.add(
        "transmission zeros",
        tz_ok,
        "no transmission zero coincides with an exosystem mode"
        if tz_ok
        else f"rank drop at exosystem mode {lam_bad:.4f}",
    )

    exo_ok = exo.modes_on_unit_circle(tol=tol)
    rep.add(
        "exosystem modes",
        exo_ok,
        "all eigenvalues of S on the unit circle"
        if exo_ok
        else "S has modes off the unit circle",
    )

    rho_a = spectral_radius(plant.a)
    a_ok = rho_a <= 1.0 + tol
    rep.add(
        "open-loop spectrum",
        a_ok,
        f"spectral radius of A = {rho_a:.4f} (must not exceed 1)",
    )
    return rep


def solve_parametric_dare(a, b, gamma, tol=1e-12, max_iter=100000):
    """Stabilizing solution of the parametric Riccati equation.

    Solves ``A'PA - P - A'PB (I + B'PB)^{-1} B'PA = -gamma P`` by
    fixed-point iteration on the equivalent standard equation for the
    scaled matrix ``A / sqrt(1 - gamma)``, starting from ``P = I`` and
    symmetrizing every iterate.

    Convergence is declared when the Frobenius norm of the parametric
    residual drops below ``tol * max(1, ||P||_F)``.  If the iteration
    reaches its floating-point floor (iterates stop changing) the
    result is still accepted as long as the residual is within a factor
    100 of that threshold; otherwise :class:`NumericalError` is raised.

    Parameters
    ----------
    a, b : array_like
        Pair defining the equation; ``(a, b)`` must be stabilizable and
        ``a`` must have no eigenvalues outside the closed unit disk for
        the parametric family to behave as intended.
    gamma : float
        Low-gain parameter in ``(0, 1)``.
    tol : float, optional
        Relative residual target.
    max_iter : int, optional
        Iteration cap.

    Returns
    -------
    ndarray
        Symmetric positive semidefinite solution ``P``.
    """
    a = require_square(as_matrix(a, "a"), "a")
    b = as_matrix(b, "b")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"solve_parametric_dare: A is {a.shape[0]} x {a.shape[0]} but B has {b.shape[0]} rows")
    gamma = float(gamma)
    if not (0.0 < gamma < 1.0):
        raise ConfigurationError(f"solve_parametric_dare: gamma must lie in (0, 1), got {gamma}")

    n, m = a.shape[0], b.shape[1]
    at = a / np.sqrt(1.0 - gamma)
    eye_m = np.eye(m)

    def residual_norm(p):
        r = eye_m + b.T @ p @ b
        res = a.T @ p @ a - p - a.T @ p @ b @ np.linalg.solve(r, b.T @ p @ a) + gamma * p
        return float(np.linalg.norm(res, "fro"))

    p = np.eye(n)
    stalled = False
    for _ in range(max_iter):
        r = eye_m + b.T @ p @ b
        p_next = at.T @ p @ at - at.T @ p @ b @ np.linalg.solve(r, b.T @ p @ at)
        p_next = 0.5 * (p_next + p_next.T)
        step = float(np.max(np.abs(p_next - p)))
        p = p_next
        scale = max(1.0, float(np.linalg.norm(p, "fro")))
        if residual_norm(p) <= tol * scale:
            break
        if step <= 1e-16 * (1.0 + float(np.max(np.abs(p)))):
            stalled = True
            break

    scale = max(1.0, float(np.linalg.norm(p, "fro")))
    res = residual_norm(p)
    grace = 100.0 if stalled or res > tol * scale else 1.0
    if res > grace * tol * scale:
        raise NumericalError(
            f"solve_parametric_dare: no convergence (gamma={gamma}, residual {res:.3e}, "
            f"threshold {tol * scale:.3e} after {max_iter} iterations)"
        )
    return p


def state_feedback_gain(a, b, gamma, nu, r, tol=1e-12, max_iter=100000):
    """Delay-compensating low-gain state feedback.

    Computes ``K = -(1/nu) (I + B'PB)^{-1} B'P A^{r+1}`` where ``P``
    solves the parametric Riccati equation at ``gamma``.  The power
    ``r + 1`` pre-rotates the feedback by the total loop delay ``r``;
    ``nu`` scales for the weakest coupling eigenvalue of the graph (use
    ``nu <= min Re eig(H)``).

    Returns the ``m x n`` gain matrix.
    """
    a = require_square(as_matrix(a, "a"), "a")
    b = as_matrix(b, "b")
    if not np.isfinite(nu) or nu <= 0:
        raise ConfigurationError(f"state_feedback_gain: nu must be positive, got {nu}")
    if not isinstance(r, (int, np.integer)) or r < 0:
        raise ConfigurationError(f"state_feedback_gain: r must be a non-negative integer, got {r!r}")
    p = solve_parametric_dare(a, b, gamma, tol=tol, max_iter=max_iter)
    rmat = np.eye(b.shape[1]) + b.T @ p @ b
    a_pow = np.linalg.matrix_power(a, int(r) + 1)
    return -np.linalg.solve(rmat, b.T @ p @ a_pow) / float(nu)


def observer_gain(a, c, gamma_l, nu_l, r=0, tol=1e-12, max_iter=100000):
    """Low-gain observer injection ``L`` for the pair ``(C, A)``.

    Solves the dual parametric Riccati equation
    ``A P A' - P - A P C'(I + C P C')^{-1} C P A' = -gamma_l P`` and
    returns ``L = (1/nu_l) A^{r+1} P C' (I + C P C')^{-1}`` (``n x p``).

    The default ``r = 0`` reflects that the estimation-error recursion
    in the networked closed loop is delay-free: the observer runs on
    locally available signals, so no delay compensation power is
    needed.  A nonzero ``r`` inserts the same ``A^{r+1}`` factor as the
    state-feedback formula.
    """
    a = require_square(as_matrix(a, "a"), "a")
    c = as_matrix(c, "c")
    if c.shape[1] != a.shape[0]:
        raise DimensionError(f"observer_gain: A is {a.shape[0]} x {a.shape[0]} but C has {c.shape[1]} columns")
    if not np.isfinite(nu_l) or nu_l <= 0:
        raise ConfigurationError(f"observer_gain: nu_l must be positive, got {nu_l}")
    p = solve_parametric_dare(a.T, c.T, gamma_l, tol=tol, max_iter=max_iter)
    rmat = np.eye(c.shape[0]) + c @ p @ c.T
    a_pow = np.linalg.matrix_power(a, int(r) + 1)
    return a_pow @ p @ c.T @ np.linalg.inv(rmat) / float(nu_l)


def build_augmented(plant, im):
    """Cascade of the agent with the internal model.

    Returns the pair::

        A_c = [ A      0  ]      B_c = [ B ]
              [ G2 C   G1 ]            [ 0 ]

    and raises :class:`SynthesisError` if the pair fails the PBH
    stabilizability test, which is exactly the situation the
    transmission-zero assumption rules out.
    """
    if im.g2.shape[1] != plant.p:
        raise DimensionError(
            f"build_augmented: internal model expects {im.g2.shape[1]} error channels, plant has {plant.p}"
        )
    n, nz = plant.n, im.g1.shape[0]
    a_c = np.block(
        [[plant.a, np.zeros((n, nz))], [im.g2 @ plant.c, im.g1]]
    )
    b_c = np.vstack([plant.b, np.zeros((nz, plant.m))])
    if not stabilizable(a_c, b_c):
        raise SynthesisError(
            "build_augmented: the agent/internal-model cascade is not stabilizable; "
            "check stabilizability of (A, B) and the transmission-zero condition"
        )
    return a_c, b_c


def closed_loop_blocks(plant, h, im, gains, mode):
    """Nominal networked closed-loop pair ``(A0, A1)``.

    The aggregate state recursion has the delayed form
    ``w(t+1) = A0 w(t) + A1 w(t - r)`` with ``r = r_con + r_com``.
    ``h`` may be any square coupling matrix, including a ``1 x 1``
    complex eigenvalue slice, which is how per-mode certificates are
    computed.

    In state-feedback mode ``w`` stacks plant states and internal-model
    states; in output-feedback mode a third block of observer states is
    appended.
    """
    if mode not in ("state", "output"):
        raise ConfigurationError(f"closed_loop_blocks: unknown mode {mode!r}")
    h = np.atleast_2d(np.asarray(h))
    nn = h.shape[0]
    a, b, c = plant.a, plant.b, plant.c
    g1, g2 = im.g1, im.g2
    n, nz = plant.n, im.dim
    eye_n = np.eye(nn)
    ia = kron(eye_n, a)
    ig1 = kron(eye_n, g1)
    hg2c = kron(h, g2 @ c)

    if mode == "state":
        a0 = np.block([[ia, np.zeros((nn * n, nn * nz))], [hg2c, ig1]])
        a1 = np.block(
            [
                [kron(h, b @ gains.k_x), kron(eye_n, b @ gains.k_z)],
                [np.zeros((nn * nz, nn * (n + nz)))],
            ]
        )
        return a0, a1

    if gains.l_obs is None:
        raise ConfigurationError("closed_loop_blocks: output mode requires an observer gain")
    lc = gains.l_obs @ c
    hlc = kron(h, lc)
    obs = kron(eye_n, a) - hlc
    z0 = np.zeros
    a0 = np.block(
        [
            [ia, z0((nn * n, nn * nz)), z0((nn * n, nn * n))],
            [hg2c, ig1, z0((nn * nz, nn * n))],
            [hlc, z0((nn * n, nn * nz)), obs],
        ]
    )
    bk1 = kron(eye_n, b @ gains.k_1)
    bk2 = kron(h, b @ gains.k_2)
    a1 = np.block(
        [
            [z0((nn * n, nn * n)), bk1, bk2],
            [z0((nn * nz, nn * (2 * n + nz)))],
            [z0((nn * n, nn * n)), bk1, bk2],
        ]
    )
    return a0, a1


def delay_lift(a0, a1, r):
    """Companion lift of ``w(t+1) = A0 w(t) + A1 w(t-r)`` to a delay-free system.

    Stacks ``z(t) = (w(t), w(t-1), ..., w(t-r))``; the lifted matrix has
    ``A0`` and ``A1`` in the first block row and shift identities below.
    For ``r = 0`` this is simply ``A0 + A1``.
    """
    a0 = np.atleast_2d(a0)
    a1 = np.atleast_2d(a1)
    if a0.shape != a1.shape or a0.shape[0] != a0.shape[1]:
        raise DimensionError(f"delay_lift: expected equal square blocks, got {a0.shape} and {a1.shape}")
    if not isinstance(r, (int, np.integer)) or r < 0:
        raise ConfigurationError(f"delay_lift: r must be a non-negative integer, got {r!r}")
    if r == 0:
        return a0 + a1
    nb = a0.shape[0]
    dtype = np.result_type(a0.dtype, a1.dtype)
    lift = np.zeros(((r + 1) * nb, (r + 1) * nb), dtype=dtype)
    lift[:nb, :nb] = a0
    lift[:nb, r * nb :] = a1
    lift[nb:, : r * nb] = np.eye(r * nb, dtype=dtype)
    return lift


def certify_closed_loop(plant, g, im, gains, delays, mode, margin=SCHUR_MARGIN):
    """Schur certificate for the delayed networked closed loop.

    Builds the nominal blocks, lifts the total delay away, and measures
    the spectral radius of the lifted matrix.

    Returns
    -------
    stable : bool
        True when the radius is below ``1 - margin``.
    rho : float
        The lifted spectral radius itself.
    """
    h, _ = h_matrix(g)
    a0, a1 = closed_loop_blocks(plant, h, im, gains, mode)
    lifted = delay_lift(a0, a1, delays.r)
    rho = spectral_radius(lifted)
    return bool(rho < 1.0 - margin), rho


def _min_real_coupling(g):
    h, _ = h_matrix(g)
    re_min = float(np.min(np.real(eigenvalues(h, "H"))))
    if re_min <= 0:
        raise SynthesisError(
            f"coupling matrix H has an eigenvalue with non-positive real part ({re_min:.4e}); "
            "the graph lacks a leader-rooted spanning tree"
        )
    return re_min


def synthesize_gains(
    plant,
    g,
    im,
    delays,
    gamma,
    nu=None,
    mode="state",
    gamma_l=None,
    nu_l=None,
    observer_r=0,
    tol=1e-12,
    max_iter=100000,
):
    """One-shot gain synthesis at a fixed low-gain parameter.

    Builds the augmented pair, solves the parametric Riccati equation
    at ``gamma``, and splits the resulting feedback into its plant-state
    and internal-model parts.  In output mode a dual design at
    ``gamma_l`` produces the observer injection.

    Parameters
    ----------
    plant : NominalPlant
    g : Digraph
    im : InternalModel
    delays : DelaySpec
    gamma : float
        Low-gain parameter for the feedback Riccati equation.
    nu : float, optional
        Coupling scale; defaults to the smallest real part over the
        spectrum of ``H``, which is the least conservative admissible
        choice.
    mode : {"state", "output"}
    gamma_l, nu_l : float, optional
        Observer-side parameters (output mode); default to ``gamma``
        and ``nu``.
    observer_r : int, optional
        Delay power used in the observer gain; the estimation loop is
        delay-free, so 0 is the natural choice.

    Returns
    -------
    GainSet
    """
    if mode not in ("state", "output"):
        raise ConfigurationError(f"synthesize_gains: unknown mode {mode!r}")
    re_min = _min_real_coupling(g)
    if nu is None:
        nu = re_min
    a_c, b_c = build_augmented(plant, im)
    k_full = state_feedback_gain(a_c, b_c, gamma, nu, delays.r, tol=tol, max_iter=max_iter)
    k_x = k_full[:, : plant.n]
    k_z = k_full[:, plant.n :]

    l_obs = None
    if mode == "output":
        if gamma_l is None:
            gamma_l = gamma
        if nu_l is None:
            nu_l = nu
        l_obs = observer_gain(
            plant.a, plant.c, gamma_l, nu_l, observer_r, tol=tol, max_iter=max_iter
        )
    return GainSet(
        k_x=k_x,
        k_z=k_z,
        gamma=float(gamma),
        nu=float(nu),
        l_obs=l_obs,
        gamma_l=None if gamma_l is None or mode == "state" else float(gamma_l),
        nu_l=None if nu_l is None or mode == "state" else float(nu_l),
        observer_r=int(observer_r),
    )


def auto_tune_gamma(
    plant,
    g,
    im,
    delays,
    gamma0,
    nu=None,
    mode="state",
    gamma_l0=None,
    nu_l=None,
    observer_r=0,
    margin=SCHUR_MARGIN,
    max_halvings=40,
):
    """Halve ``gamma`` from ``gamma0`` until the closed loop certifies.

    The low-gain theory guarantees that a sufficiently small ``gamma``
    stabilizes the delayed loop whenever the structural assumptions
    hold, so a geometric search is enough.  Observer-side parameters
    are halved in lockstep.

    Returns
    -------
    GainSet
        The first gain set whose lifted closed loop is Schur with the
        requested margin.

    Raises
    ------
    SynthesisError
        If a precondition fails or no candidate certifies within
        ``max_halvings`` halvings; the message lists the radii seen.
    """
    gamma0 = float(gamma0)
    if not (0.0 < gamma0 < 1.0):
        raise ConfigurationError(f"auto_tune_gamma: gamma0 must lie in (0, 1), got {gamma0}")
    rho_a = spectral_radius(plant.a)
    if rho_a > 1.0 + 1e-9:
        raise SynthesisError(
            f"auto_tune_gamma: open-loop spectral radius {rho_a:.4f} exceeds 1; "
            "the low-gain family cannot stabilize exponentially unstable modes through a delay"
        )
    _min_real_coupling(g)  # raises if the graph is not rooted

    tried = []
    gamma = gamma0
    gamma_l = gamma_l0
    for _ in range(max_halvings + 1):
        try:
            gains = synthesize_gains(
                plant,
                g,
                im,
                delays,
                gamma,
                nu=nu,
                mode=mode,
                gamma_l=gamma_l,
                nu_l=nu_l,
                observer_r=observer_r,
            )
            stable, rho = certify_closed_loop(plant, g, im, gains, delays, mode, margin=margin)
            tried.append((gamma, rho))
            if stable:
                return gains
        except NumericalError:
            tried.append((gamma, float("nan")))
        gamma = gamma / 2.0
        if gamma_l is not None:
            gamma_l = gamma_l / 2.0
    summary = ", ".join(f"gamma={gk:.3e} -> rho={rk:.6f}" for gk, rk in tried[-5:])
    raise SynthesisError(
        f"auto_tune_gamma: no certified gain after {max_halvings} halvings from {gamma0}; "
        f"last candidates: {summary}"
    )
