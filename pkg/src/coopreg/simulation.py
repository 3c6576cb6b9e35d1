"""Closed-loop simulation of the delayed multi-agent regulator.

Two independent execution routes are provided on purpose:

* the *agentwise* simulators (:func:`simulate_state_feedback`,
  :func:`simulate_output_feedback`) run each follower's recursion
  separately, exchanging only the signals the distributed law is
  allowed to see — neighbor states or outputs, delayed by the
  communication latency;
* the *compact oracle* (:func:`simulate_compact_oracle`) assembles the
  full networked closed loop as one Kronecker-structured recursion and
  iterates it directly.

Both must produce the same trajectories; the test suite holds them
against each other, which guards the block algebra and the buffer
bookkeeping at the same time.

Timing conventions
------------------
All signals are sampled at ``t = 0, 1, ..., horizon - 1``; a trace with
horizon ``T`` has ``T`` rows.  States before ``t = 0`` are taken
constant at their initial values (constant-extension history), and the
pre-history of the input is the feedback law evaluated on that constant
history, which for these laws equals ``u(0)``.

Each feedback mode comes in two algebraically equivalent forms.  The
*transformed* form updates the controller on current information and
applies the communication delay where the controller state is used; the
*delayed* form is the literal distributed implementation in which the
delay sits on the arriving error signal.  With matched initial
histories the two generate identical error trajectories shifted by
``r_com``; :func:`simulate_state_feedback` exposes ``controller_past``
so the match can be set up exactly.
"""

import csv
import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DimensionError, DivergenceError
from .matrixops import as_matrix, kron
from .graphs import h_matrix

__all__ = [
    "DIVERGENCE_GUARD",
    "FollowerUncertainty",
    "Scenario",
    "SimulationTrace",
    "exo_step",
    "edgewise_virtual_errors",
    "simulate_state_feedback",
    "simulate_output_feedback",
    "simulate_compact_oracle",
    "load_trace_csv",
]

# Max-norm bound on any simulated state; beyond this the run is
# declared divergent and aborted with a DivergenceError.
DIVERGENCE_GUARD = 1e12


@dataclass(frozen=True, eq=False)
class FollowerUncertainty:
    """Additive perturbations of one follower's matrices.

    Any field left ``None`` stands for a zero perturbation of the
    matching shape.  Shapes are validated against the plant when the
    scenario is assembled.
    """

    d_a: np.ndarray = None
    d_b: np.ndarray = None
    d_e: np.ndarray = None
    d_c: np.ndarray = None

    @classmethod
    def zero(cls):
        return cls()

    def materialize(self, n, m, p, q):
        """Return concrete ``(dA, dB, dE, dC)`` arrays of the full shapes."""
        shapes = {"d_a": (n, n), "d_b": (n, m), "d_e": (n, q), "d_c": (p, n)}
        out = []
        for name, shape in shapes.items():
            raw = getattr(self, name)
            if raw is None:
                out.append(np.zeros(shape))
                continue
            arr = as_matrix(raw, f"uncertainty.{name}")
            if arr.shape != shape:
                raise DimensionError(
                    f"uncertainty.{name}: expected shape {shape}, got {arr.shape}"
                )
            out.append(arr)
        return tuple(out)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed to run one closed-loop experiment.

    Parameters
    ----------
    plant : NominalPlant
    exo : Exosystem
    graph : Digraph
    delays : DelaySpec
    im : InternalModel
    mode : {"state", "output"}
        Which feedback architecture the scenario is meant for.
    per_agent_e : sequence of array_like, optional
        Disturbance input matrix of each follower; falls back to
        ``plant.e`` for every agent, or to zeros if that is also absent.
    uncertainties : sequence of FollowerUncertainty, optional
        One entry per follower; ``None`` entries mean nominal.
    horizon : int
        Number of recorded samples ``t = 0..horizon-1``.
    seed : int
        Seed for the initial-state draw.
    init_low, init_high : float
        Bounds of the uniform initial-state distribution.
    init_states : dict, optional
        Explicit overrides ``{"x": (N, n), "z": (N, n_z), "xi": (N, n)}``;
        missing keys are still drawn from the seeded stream.
    """

    plant: object
    exo: object
    graph: object
    delays: object
    im: object
    mode: str = "state"
    per_agent_e: tuple = None
    uncertainties: tuple = None
    horizon: int = 100
    seed: int = 0
    init_low: float = -1.0
    init_high: float = 1.0
    init_states: dict = None

    def __post_init__(self):
        if self.mode not in ("state", "output"):
            raise ConfigurationError(f"scenario.mode: must be 'state' or 'output', got {self.mode!r}")
        if not isinstance(self.horizon, (int, np.integer)) or self.horizon < 0:
            raise ConfigurationError(f"scenario.horizon: must be a non-negative integer, got {self.horizon!r}")
        object.__setattr__(self, "horizon", int(self.horizon))
        if not isinstance(self.seed, (int, np.integer)):
            raise ConfigurationError(f"scenario.seed: must be an integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        if not (np.isfinite(self.init_low) and np.isfinite(self.init_high)) or self.init_low > self.init_high:
            raise ConfigurationError(
                f"scenario.init_low/init_high: need finite low <= high, got ({self.init_low}, {self.init_high})"
            )
        if self.plant.p != self.exo.p:
            raise DimensionError(
                f"scenario: plant has {self.plant.p} outputs but exosystem.f has {self.exo.p} rows"
            )
        if self.im.p != self.plant.p:
            raise DimensionError(
                f"scenario: internal model replicates {self.im.p} channels, plant has {self.plant.p}"
            )
        nfoll = self.graph.n_followers
        n, q = self.plant.n, self.exo.q

        if self.per_agent_e is not None:
            mats = [as_matrix(e, f"per_agent_e[{k}]") for k, e in enumerate(self.per_agent_e)]
            if len(mats) != nfoll:
                raise ConfigurationError(
                    f"scenario.per_agent_e: expected {nfoll} entries, got {len(mats)}"
                )
            for k, e in enumerate(mats):
                if e.shape != (n, q):
                    raise DimensionError(
                        f"per_agent_e[{k}]: expected shape ({n}, {q}), got {e.shape}"
                    )
            object.__setattr__(self, "per_agent_e", tuple(mats))

        if self.uncertainties is not None:
            unc = list(self.uncertainties)
            if len(unc) != nfoll:
                raise ConfigurationError(
                    f"scenario.uncertainties: expected {nfoll} entries, got {len(unc)}"
                )
            unc = tuple(u if u is not None else FollowerUncertainty.zero() for u in unc)
            for u in unc:
                u.materialize(n, self.plant.m, self.plant.p, q)  # shape check only
            object.__setattr__(self, "uncertainties", unc)

        if self.init_states is not None:
            allowed = {"x", "z", "xi"}
            bad = set(self.init_states) - allowed
            if bad:
                raise ConfigurationError(f"scenario.init_states: unknown keys {sorted(bad)}")

    @property
    def n_agents(self):
        return self.graph.n_followers

    def e_list(self):
        """Per-follower disturbance input matrices with fallbacks applied."""
        n, q = self.plant.n, self.exo.q
        if self.per_agent_e is not None:
            return list(self.per_agent_e)
        if self.plant.e is not None:
            if self.plant.e.shape != (n, q):
                raise DimensionError(
                    f"plant.e: expected shape ({n}, {q}), got {self.plant.e.shape}"
                )
            return [self.plant.e] * self.n_agents
        return [np.zeros((n, q))] * self.n_agents

    def agent_matrices(self):
        """Effective per-follower ``(A_i, B_i, C_i, E_i)`` with uncertainty applied."""
        n, m, p, q = self.plant.n, self.plant.m, self.plant.p, self.exo.q
        e_list = self.e_list()
        out = []
        for i in range(self.n_agents):
            if self.uncertainties is not None:
                da, db, de, dc = self.uncertainties[i].materialize(n, m, p, q)
            else:
                da = np.zeros((n, n))
                db = np.zeros((n, m))
                de = np.zeros((n, q))
                dc = np.zeros((p, n))
            out.append(
                (self.plant.a + da, self.plant.b + db, self.plant.c + dc, e_list[i] + de)
            )
        return out

    def initial_states(self):
        """Seeded initial states ``(x0, z0, xi0)`` with overrides applied.

        All three blocks are always drawn, in a fixed order, so that
        overriding one of them (or ignoring ``xi0`` in state-feedback
        mode) never shifts the random stream of the others.
        """
        rng = np.random.default_rng(self.seed)
        nfoll, n, nz = self.n_agents, self.plant.n, self.im.dim
        x0 = rng.uniform(self.init_low, self.init_high, (nfoll, n))
        z0 = rng.uniform(self.init_low, self.init_high, (nfoll, nz))
        xi0 = rng.uniform(self.init_low, self.init_high, (nfoll, n))
        if self.init_states:
            if "x" in self.init_states:
                x0 = np.array(self.init_states["x"], dtype=float).reshape(nfoll, n)
            if "z" in self.init_states:
                z0 = np.array(self.init_states["z"], dtype=float).reshape(nfoll, nz)
            if "xi" in self.init_states:
                xi0 = np.array(self.init_states["xi"], dtype=float).reshape(nfoll, n)
        return x0, z0, xi0


@dataclass(eq=False)
class SimulationTrace:
    """Recorded closed-loop signals, one row per time step.

    Array shapes: ``t (T,)``, ``v (T, q)``, per-agent signals
    ``(T, N, dim)``.  ``xi`` is ``None`` for state-feedback runs.
    ``e`` is the regulated error ``y_i + F v``; ``e_v`` the virtual
    (graph-weighted) error the controllers actually consume.
    """

    t: np.ndarray
    v: np.ndarray
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    y: np.ndarray
    e: np.ndarray
    e_v: np.ndarray
    xi: np.ndarray = None

    @property
    def horizon(self):
        return self.t.shape[0]

    def tail_max_error(self, steps):
        """Largest ``|e|`` entry over the last ``steps`` rows."""
        if steps <= 0 or self.horizon == 0:
            return 0.0
        tail = self.e[-min(steps, self.horizon):]
        return float(np.max(np.abs(tail))) if tail.size else 0.0

    def tail_max_error_per_agent(self, steps):
        """Per-agent version of :meth:`tail_max_error`; shape ``(N,)``."""
        tail = self.e[-min(steps, self.horizon):]
        if tail.size == 0:
            return np.zeros(self.e.shape[1])
        return np.max(np.abs(tail), axis=(0, 2))

    def max_relative_deviation(self, other):
        """Worst entrywise deviation from ``other`` over all shared signals.

        Measured as ``|a - b| / max(1, |a|, |b|)`` so it behaves as a
        relative error for large signals and an absolute one near zero.
        """
        worst = 0.0
        for name in ("v", "x", "z", "xi", "u", "y", "e", "e_v"):
            a, b = getattr(self, name), getattr(other, name)
            if a is None or b is None:
                continue
            if a.shape != b.shape:
                raise DimensionError(f"trace.{name}: shapes differ, {a.shape} vs {b.shape}")
            if a.size == 0:
                continue
            denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
            worst = max(worst, float(np.max(np.abs(a - b) / denom)))
        return worst

    def to_csv(self, path):
        """Write the trace to ``path`` at full float precision.

        The file starts with ``#`` comment lines documenting the
        layout, followed by a standard CSV header and one row per time
        step.  Agent indices in column names run from 1 (the leader,
        index 0, has no columns; its trajectory is implied by ``v``).
        """
        T = self.horizon
        nfoll = self.x.shape[1] if self.x.ndim == 3 else 0
        q = self.v.shape[1]
        names = ["t"]
        names += [f"v{k}" for k in range(q)]
        blocks = [("x", self.x), ("z", self.z)]
        if self.xi is not None:
            blocks.append(("xi", self.xi))
        blocks += [("u", self.u), ("y", self.y), ("e", self.e), ("ev", self.e_v)]
        for prefix, arr in blocks:
            for i in range(nfoll):
                for k in range(arr.shape[2]):
                    names.append(f"{prefix}{i + 1}_{k}")
        with open(path, "w", newline="") as fh:
            fh.write("# closed-loop simulation trace\n")
            fh.write(f"# rows: t = 0..{T - 1} (horizon {T}); values at full float precision\n")
            fh.write("# columns: t; exosystem state v<k>; then per follower i (1-based):\n")
            fh.write("#   x<i>_<k> plant state, z<i>_<k> internal-model state,\n")
            if self.xi is not None:
                fh.write("#   xi<i>_<k> observer state,\n")
            fh.write("#   u<i>_<k> input, y<i>_<k> output, e<i>_<k> regulated error,\n")
            fh.write("#   ev<i>_<k> virtual (graph-weighted) error\n")
            writer = csv.writer(fh)
            writer.writerow(names)
            for row_idx in range(T):
                row = [int(self.t[row_idx])]
                row += [repr(float(val)) for val in self.v[row_idx]]
                for _, arr in blocks:
                    row += [repr(float(val)) for val in arr[row_idx].reshape(-1)]
                writer.writerow(row)


def load_trace_csv(path):
    """Read a trace written by :meth:`SimulationTrace.to_csv`."""
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(rows)
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigurationError(f"{path}: empty trace file")
    data = np.array([[float(val) for val in row] for row in reader], dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(header))
    cols = {name: data[:, k] for k, name in enumerate(header)}
    T = data.shape[0]

    pat = re.compile(r"^([a-z]+?)(\d+)_(\d+)$")
    dims = {}
    for name in header:
        m = pat.match(name)
        if m:
            prefix, agent, comp = m.group(1), int(m.group(2)), int(m.group(3))
            cur = dims.get(prefix, (0, 0))
            dims[prefix] = (max(cur[0], agent), max(cur[1], comp + 1))
    q = sum(1 for name in header if re.match(r"^v\d+$", name))

    def grab(prefix):
        if prefix not in dims:
            return None
        nfoll, width = dims[prefix]
        arr = np.zeros((T, nfoll, width))
        for i in range(nfoll):
            for k in range(width):
                arr[:, i, k] = cols[f"{prefix}{i + 1}_{k}"]
        return arr

    return SimulationTrace(
        t=cols["t"].astype(int),
        v=np.column_stack([cols[f"v{k}"] for k in range(q)]) if q else np.zeros((T, 0)),
        x=grab("x"),
        z=grab("z"),
        u=grab("u"),
        y=grab("y"),
        e=grab("e"),
        e_v=grab("ev"),
        xi=grab("xi"),
    )


def exo_step(exo, v):
    """One exosystem step ``v(t+1) = S v(t)``."""
    return exo.s @ np.asarray(v, dtype=float)


def edgewise_virtual_errors(g, e_all):
    """Virtual errors computed edge by edge from regulated errors.

    ``e_all`` has one row per follower.  For follower ``i``::

        e_v[i] = sum_j a_ij (e_i - e_j) + a_i0 e_i

    which uses only information that travels along graph edges (the
    leader term reduces to ``a_i0 e_i`` because the leader's regulated
    error is zero).  Equals ``(H (x) I_p) vec(e)`` — the test suite
    checks that identity against the Kronecker route.
    """
    e_all = np.atleast_2d(e_all)
    out = np.zeros_like(e_all)
    for i in range(1, g.n_followers + 1):
        acc = np.zeros(e_all.shape[1])
        for src, w in g.in_edges(i):
            if src == 0:
                acc += w * e_all[i - 1]
            else:
                acc += w * (e_all[i - 1] - e_all[src - 1])
        out[i - 1] = acc
    return out


def _coupled_combination(g, rows):
    """Apply the coupling ``sum_j a_ij (s_i - s_j) + a_i0 s_i`` to stacked rows."""
    rows = np.atleast_2d(rows)
    out = np.zeros_like(rows)
    for i in range(1, g.n_followers + 1):
        acc = np.zeros(rows.shape[1])
        for src, w in g.in_edges(i):
            if src == 0:
                acc += w * rows[i - 1]
            else:
                acc += w * (rows[i - 1] - rows[src - 1])
        out[i - 1] = acc
    return out


class _History:
    """Fixed-depth ring buffer over stacked signal arrays.

    ``depth`` past values plus the current one; ``delayed()`` returns
    the oldest entry, i.e. the value ``depth`` steps ago.  Backed by an
    index into a preallocated array rather than a deque so pushes are
    allocation-free.
    """

    def __init__(self, depth, first, past=None):
        self.size = depth + 1
        self.buf = np.repeat(np.asarray(first, dtype=float)[None], self.size, axis=0)
        if past is not None:
            past = np.asarray(past, dtype=float)
            if past.shape != (depth,) + self.buf.shape[1:]:
                raise DimensionError(
                    f"history: expected shape {(depth,) + self.buf.shape[1:]}, got {past.shape}"
                )
            # past[k] is the value k+1 steps before t=0; oldest first in buf
            self.buf[:depth] = past[::-1]
        self.head = self.size - 1  # position of the current value

    def delayed(self):
        return self.buf[(self.head + 1) % self.size]

    def push(self, value):
        self.head = (self.head + 1) % self.size
        self.buf[self.head] = value


def _guard(step, *arrays):
    worst = 0.0
    for arr in arrays:
        if arr is None or arr.size == 0:
            continue
        m = float(np.max(np.abs(arr)))
        if not np.isfinite(m) or m > DIVERGENCE_GUARD:
            raise DivergenceError(
                f"simulation diverged at step {step} (state magnitude {m:.3e} "
                f"exceeds guard {DIVERGENCE_GUARD:.1e})",
                step=step,
                norm=m,
            )
        worst = max(worst, m)
    return worst


def _alloc_trace(scenario, with_observer):
    T = scenario.horizon
    nfoll = scenario.n_agents
    n, m, p, q = scenario.plant.n, scenario.plant.m, scenario.plant.p, scenario.exo.q
    nz = scenario.im.dim
    return SimulationTrace(
        t=np.arange(T, dtype=int),
        v=np.zeros((T, q)),
        x=np.zeros((T, nfoll, n)),
        z=np.zeros((T, nfoll, nz)),
        u=np.zeros((T, nfoll, m)),
        y=np.zeros((T, nfoll, p)),
        e=np.zeros((T, nfoll, p)),
        e_v=np.zeros((T, nfoll, p)),
        xi=np.zeros((T, nfoll, n)) if with_observer else None,
    )


def _outputs(scenario, mats, x_all, v):
    """Per-agent output, regulated error, and virtual error at one instant."""
    f = scenario.exo.f
    y = np.stack([mats[i][2] @ x_all[i] for i in range(scenario.n_agents)])
    e = y + (f @ v)[None, :]
    ev = edgewise_virtual_errors(scenario.graph, e)
    return y, e, ev


def simulate_state_feedback(scenario, gains, law="transformed", controller_past=None):
    """Run the distributed state-feedback regulator agent by agent.

    Parameters
    ----------
    scenario : Scenario
    gains : GainSet
    law : {"transformed", "delayed"}
        ``"transformed"`` updates the internal model on the current
        virtual error and feeds back its ``r_com``-delayed state;
        ``"delayed"`` is the literal implementation driven by the
        delayed virtual error.  The two are related by the time shift
        ``z_delayed(t) = z_transformed(t - r_com)``.
    controller_past : ndarray, optional
        Shape ``(r_com, N, n_z)`` pre-``t=0`` internal-model states for
        the transformed law, newest first (``controller_past[k]`` is
        the value ``k + 1`` steps before zero).  Defaults to constant
        extension of the initial state.

    Returns
    -------
    SimulationTrace
    """
    if law not in ("transformed", "delayed"):
        raise ConfigurationError(f"simulate_state_feedback: unknown law {law!r}")
    if law == "delayed" and controller_past is not None:
        raise ConfigurationError(
            "simulate_state_feedback: controller_past applies to the transformed law only"
        )
    mats = scenario.agent_matrices()
    g = scenario.graph
    g1, g2 = scenario.im.g1, scenario.im.g2
    k_x, k_z = gains.k_x, gains.k_z
    r_con, r_com = scenario.delays.r_con, scenario.delays.r_com
    T = scenario.horizon
    nfoll = scenario.n_agents

    x_all, z_all, _ = scenario.initial_states()
    v = scenario.exo.v0.copy()
    trace = _alloc_trace(scenario, with_observer=False)

    xhist = _History(r_com, x_all)
    zhist = _History(r_com, z_all, past=controller_past) if law == "transformed" else None
    uhist = None
    evhist = None

    for t in range(T):
        y, e, ev = _outputs(scenario, mats, x_all, v)
        eta = _coupled_combination(g, xhist.delayed())

        if law == "transformed":
            z_fb = zhist.delayed()
        else:
            z_fb = z_all
        u = np.stack([k_x @ eta[i] + k_z @ z_fb[i] for i in range(nfoll)])

        if uhist is None:
            uhist = _History(r_con, u)
        else:
            uhist.push(u)
        if law == "delayed":
            if evhist is None:
                evhist = _History(r_com, ev)
            else:
                evhist.push(ev)

        trace.v[t] = v
        trace.x[t] = x_all
        trace.z[t] = z_all
        trace.u[t] = u
        trace.y[t] = y
        trace.e[t] = e
        trace.e_v[t] = ev

        u_delayed = uhist.delayed()
        x_next = np.stack(
            [
                mats[i][0] @ x_all[i] + mats[i][1] @ u_delayed[i] + mats[i][3] @ v
                for i in range(nfoll)
            ]
        )
        if law == "transformed":
            z_next = np.stack([g1 @ z_all[i] + g2 @ ev[i] for i in range(nfoll)])
        else:
            ev_delayed = evhist.delayed()
            z_next = np.stack([g1 @ z_all[i] + g2 @ ev_delayed[i] for i in range(nfoll)])

        x_all, z_all = x_next, z_next
        xhist.push(x_all)
        if law == "transformed":
            zhist.push(z_all)
        v = exo_step(scenario.exo, v)
        _guard(t + 1, x_all, z_all)

    return trace


def simulate_output_feedback(
    scenario, gains, law="transformed", controller_past=None, observer_past=None
):
    """Run the distributed output-feedback regulator agent by agent.

    Each follower carries an internal model and a local observer; the
    feedback combines the (``r_com``-delayed, in the transformed form)
    internal-model state with coupled observer estimates.  The observer
    itself is driven by the virtual error and by coupled estimates, and
    injects the input the plant actually received.

    Parameters mirror :func:`simulate_state_feedback`;
    ``controller_past``/``observer_past`` give pre-``t=0`` histories
    (shape ``(r_com, N, dim)``, newest first) for the transformed law.
    """
    if gains.l_obs is None:
        raise ConfigurationError("simulate_output_feedback: gain set has no observer gain")
    if law not in ("transformed", "delayed"):
        raise ConfigurationError(f"simulate_output_feedback: unknown law {law!r}")
    if law == "delayed" and (controller_past is not None or observer_past is not None):
        raise ConfigurationError(
            "simulate_output_feedback: history overrides apply to the transformed law only"
        )
    mats = scenario.agent_matrices()
    g = scenario.graph
    a_nom, b_nom, c_nom = scenario.plant.a, scenario.plant.b, scenario.plant.c
    g1, g2 = scenario.im.g1, scenario.im.g2
    k_1, k_2, l_obs = gains.k_1, gains.k_2, gains.l_obs
    r_con, r_com = scenario.delays.r_con, scenario.delays.r_com
    r_total = scenario.delays.r
    T = scenario.horizon
    nfoll = scenario.n_agents

    x_all, z_all, xi_all = scenario.initial_states()
    v = scenario.exo.v0.copy()
    trace = _alloc_trace(scenario, with_observer=True)

    if law == "transformed":
        zhist = _History(r_com, z_all, past=controller_past)
        xihist = _History(r_com, xi_all, past=observer_past)
        uhist = None  # depth r_con, created once u(0) exists
        evhist = None
    else:
        uhist = None  # depth r_total for the observer; plant slices the same buffer
        evhist = None

    for t in range(T):
        y, e, ev = _outputs(scenario, mats, x_all, v)

        if law == "transformed":
            eta_fb = _coupled_combination(g, xihist.delayed())
            z_fb = zhist.delayed()
        else:
            eta_fb = _coupled_combination(g, xi_all)
            z_fb = z_all
        u = np.stack([k_1 @ z_fb[i] + k_2 @ eta_fb[i] for i in range(nfoll)])

        if uhist is None:
            depth = r_con if law == "transformed" else r_total
            uhist = _History(depth, u)
        else:
            uhist.push(u)
        if law == "delayed":
            if evhist is None:
                evhist = _History(r_com, ev)
            else:
                evhist.push(ev)

        trace.v[t] = v
        trace.x[t] = x_all
        trace.z[t] = z_all
        trace.xi[t] = xi_all
        trace.u[t] = u
        trace.y[t] = y
        trace.e[t] = e
        trace.e_v[t] = ev

        eta_now = _coupled_combination(g, xi_all)
        if law == "transformed":
            u_plant = uhist.delayed()            # u(t - r_con)
            u_obs = u_plant                      # observer replays the plant input
            ev_im = ev                           # current virtual error
            ev_obs = ev
        else:
            u_obs = uhist.delayed()              # u(t - r_con - r_com)
            u_plant = uhist.buf[(uhist.head - r_con) % uhist.size]  # u(t - r_con)
            ev_im = evhist.delayed()             # e_v(t - r_com)
            ev_obs = ev_im

        x_next = np.stack(
            [
                mats[i][0] @ x_all[i] + mats[i][1] @ u_plant[i] + mats[i][3] @ v
                for i in range(nfoll)
            ]
        )
        z_next = np.stack([g1 @ z_all[i] + g2 @ ev_im[i] for i in range(nfoll)])
        xi_next = np.stack(
            [
                a_nom @ xi_all[i]
                + b_nom @ u_obs[i]
                - l_obs @ (c_nom @ eta_now[i])
                + l_obs @ ev_obs[i]
                for i in range(nfoll)
            ]
        )

        x_all, z_all, xi_all = x_next, z_next, xi_next
        if law == "transformed":
            zhist.push(z_all)
            xihist.push(xi_all)
        v = exo_step(scenario.exo, v)
        _guard(t + 1, x_all, z_all, xi_all)

    return trace


def _compact_matrices(scenario, gains):
    """Uncertain Kronecker-form closed-loop matrices for the oracle."""
    nfoll = scenario.n_agents
    n, m, p, q = scenario.plant.n, scenario.plant.m, scenario.plant.p, scenario.exo.q
    mats = scenario.agent_matrices()
    h, _ = h_matrix(scenario.graph)
    eye_n = np.eye(nfoll)

    a_bar = np.zeros((nfoll * n, nfoll * n))
    b_bar = np.zeros((nfoll * n, nfoll * m))
    c_blk = np.zeros((nfoll * p, nfoll * n))
    e_bar = np.zeros((nfoll * n, q))
    for i, (a_i, b_i, c_i, e_i) in enumerate(mats):
        a_bar[i * n : (i + 1) * n, i * n : (i + 1) * n] = a_i
        b_bar[i * n : (i + 1) * n, i * m : (i + 1) * m] = b_i
        c_blk[i * p : (i + 1) * p, i * n : (i + 1) * n] = c_i
        e_bar[i * n : (i + 1) * n] = e_i
    c_bar = kron(h, np.eye(p)) @ c_blk
    f_bar = kron((h @ np.ones((nfoll, 1))), scenario.exo.f)
    g1_bar = kron(eye_n, scenario.im.g1)
    g2_bar = kron(eye_n, scenario.im.g2)
    return h, a_bar, b_bar, c_blk, c_bar, e_bar, f_bar, g1_bar, g2_bar


def simulate_compact_oracle(scenario, gains):
    """Iterate the assembled closed-loop recursion in one shot.

    Builds the full uncertain networked system in Kronecker form —
    including the structured uncertainty of every follower — and runs
    ``w(t+1) = A0 w(t) + A1 w(t - r) + B v(t)`` directly.  Serves as
    the independent cross-check for the agentwise simulators; shares no
    stepping code with them.
    """
    mode = scenario.mode
    nfoll = scenario.n_agents
    n, m, p = scenario.plant.n, scenario.plant.m, scenario.plant.p
    nz = scenario.im.dim
    r_total = scenario.delays.r
    r_com = scenario.delays.r_com
    T = scenario.horizon

    h, a_bar, b_bar, c_blk, c_bar, e_bar, f_bar, g1_bar, g2_bar = _compact_matrices(
        scenario, gains
    )
    eye_n = np.eye(nfoll)

    if mode == "state":
        kx_bar = kron(h, gains.k_x)
        kz_bar = kron(eye_n, gains.k_z)
        a0 = np.block(
            [
                [a_bar, np.zeros((nfoll * n, nfoll * nz))],
                [g2_bar @ c_bar, g1_bar],
            ]
        )
        a1 = np.block(
            [
                [b_bar @ kx_bar, b_bar @ kz_bar],
                [np.zeros((nfoll * nz, nfoll * (n + nz)))],
            ]
        )
        b_in = np.vstack([e_bar, g2_bar @ f_bar])
        u_map = np.hstack([kx_bar, kz_bar])
    else:
        if gains.l_obs is None:
            raise ConfigurationError("simulate_compact_oracle: output mode needs an observer gain")
        k1_bar = kron(eye_n, gains.k_1)
        k2_bar = kron(h, gains.k_2)
        lc = gains.l_obs @ scenario.plant.c
        s1 = kron(eye_n, scenario.plant.a) - kron(h, lc)
        s2 = kron(eye_n, gains.l_obs)
        b_nom = kron(eye_n, scenario.plant.b)
        zna = np.zeros((nfoll * n, nfoll * n))
        a0 = np.block(
            [
                [a_bar, np.zeros((nfoll * n, nfoll * nz)), zna],
                [g2_bar @ c_bar, g1_bar, np.zeros((nfoll * nz, nfoll * n))],
                [s2 @ c_bar, np.zeros((nfoll * n, nfoll * nz)), s1],
            ]
        )
        a1 = np.block(
            [
                [np.zeros((nfoll * n, nfoll * n)), b_bar @ k1_bar, b_bar @ k2_bar],
                [np.zeros((nfoll * nz, nfoll * (2 * n + nz)))],
                [np.zeros((nfoll * n, nfoll * n)), b_nom @ k1_bar, b_nom @ k2_bar],
            ]
        )
        b_in = np.vstack([e_bar, g2_bar @ f_bar, s2 @ f_bar])
        u_map = np.hstack(
            [np.zeros((nfoll * m, nfoll * n)), k1_bar, k2_bar]
        )

    x0, z0, xi0 = scenario.initial_states()
    if mode == "state":
        w = np.concatenate([x0.reshape(-1), z0.reshape(-1)])
    else:
        w = np.concatenate([x0.reshape(-1), z0.reshape(-1), xi0.reshape(-1)])
    v = scenario.exo.v0.copy()

    trace = _alloc_trace(scenario, with_observer=(mode == "output"))
    whist = _History(r_total, w)
    ucom = _History(r_com, w)
    f_exo = scenario.exo.f

    for t in range(T):
        x_flat = w[: nfoll * n]
        z_flat = w[nfoll * n : nfoll * n + nfoll * nz]
        y_flat = c_blk @ x_flat
        e_flat = y_flat + np.tile(f_exo @ v, nfoll)
        ev_flat = c_bar @ x_flat + f_bar @ v
        u_flat = u_map @ ucom.delayed()

        trace.v[t] = v
        trace.x[t] = x_flat.reshape(nfoll, n)
        trace.z[t] = z_flat.reshape(nfoll, nz)
        trace.u[t] = u_flat.reshape(nfoll, m)
        trace.y[t] = y_flat.reshape(nfoll, p)
        trace.e[t] = e_flat.reshape(nfoll, p)
        trace.e_v[t] = ev_flat.reshape(nfoll, p)
        if mode == "output":
            trace.xi[t] = w[nfoll * (n + nz) :].reshape(nfoll, n)

        w = a0 @ w + a1 @ whist.delayed() + b_in @ v
        whist.push(w)
        ucom.push(w)
        v = exo_step(scenario.exo, v)
        _guard(t + 1, w)

    return trace


def make_variant(scenario, **changes):
    """Convenience wrapper around :func:`dataclasses.replace` for scenarios."""
    return replace(scenario, **changes)
