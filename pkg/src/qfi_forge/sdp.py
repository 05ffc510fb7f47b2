"""A minimal dense semidefinite-programming layer.

Problems are stated over named Hermitian matrix variables with a real
linear objective, affine equality constraints and affine PSD-cone
constraints.  Hermitian data is realified (complex Hermitian blocks
become real symmetric blocks of twice the size) so a single real-valued
primal-dual interior-point kernel with Nesterov-Todd scaling serves all
problems.  Everything in scope is small and dense.

An optional external-solver bridge (see :mod:`qfi_forge.sdp_bridge`)
exchanges a documented problem file with a subprocess; it is used only
when the QFI_FORGE_SOLVER environment variable points at a solver
executable and the caller asks for it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SdpProblem",
    "SdpSolution",
    "solve_sdp",
    "min_hermitian_quadratic",
    "hermitian_basis_coords",
    "coords_to_hermitian",
]

DEFAULT_GAP_TOL = 1e-8
DEFAULT_FEAS_TOL = 1e-8
MAX_ITER = 200
STEP_FRACTION = 0.98


# ----------------------------------------------------------------------
# Hermitian coordinates
# ----------------------------------------------------------------------

def _basis_element(d: int, k: int) -> np.ndarray:
    """k-th element of the fixed orthonormal Hermitian basis of C^{d x d}.

    Order: diagonal E_ii for i = 0..d-1, then for each pair i < j in
    row-major order the symmetric (E_ij + E_ji)/sqrt(2) followed by the
    antisymmetric i(E_ij - E_ji)/sqrt(2).
    """
    m = np.zeros((d, d), dtype=complex)
    if k < d:
        m[k, k] = 1.0
        return m
    k -= d
    pair, comp = divmod(k, 2)
    # row-major enumeration of i < j
    i = 0
    count = 0
    for i in range(d):
        row = d - i - 1
        if pair < count + row:
            j = i + 1 + (pair - count)
            break
        count += row
    s = 1.0 / np.sqrt(2)
    if comp == 0:
        m[i, j] = s
        m[j, i] = s
    else:
        m[i, j] = -1j * s
        m[j, i] = 1j * s
    return m


def hermitian_basis_coords(x: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in the fixed basis."""
    d = x.shape[0]
    coords = np.empty(d * d)
    coords[:d] = np.real(np.diag(x))
    idx = d
    s = np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            coords[idx] = np.real(x[i, j]) * s
            coords[idx + 1] = -np.imag(x[i, j]) * s
            idx += 2
    return coords


def coords_to_hermitian(coords: np.ndarray, d: int) -> np.ndarray:
    x = np.zeros((d, d), dtype=complex)
    x[np.diag_indices(d)] = coords[:d]
    idx = d
    s = 1.0 / np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            x[i, j] = (coords[idx] - 1j * coords[idx + 1]) * s
            x[j, i] = np.conj(x[i, j])
            idx += 2
    return x


def _realify(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix."""
    re, im = np.real(h), np.imag(h)
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    return np.vstack([top, bot])


# ----------------------------------------------------------------------
# Problem model
# ----------------------------------------------------------------------

@dataclass
class SdpSolution:
    status: str
    objective_value: float
    variable_values: dict
    duality_gap: float
    iterations: int = 0
    residuals: dict = field(default_factory=dict)


class SdpProblem:
    """Standard-form SDP over named Hermitian matrix blocks.

    Constraints are supplied as affine callables taking the dict of
    variable matrices and returning a Hermitian matrix; PSD constraints
    require the returned expression to be >= 0, equality constraints
    require it to vanish.
    """

    def __init__(self):
        self.variables: dict = {}
        self._objective: dict = {}
        self._obj_constant = 0.0
        self._sense = "min"
        self.psd_constraints: list = []
        self.equality_constraints: list = []

    def add_var(self, name: str, dim: int) -> str:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        if dim < 1:
            raise ValueError("variable dimension must be positive")
        self.variables[name] = int(dim)
        return name

    def set_objective(self, coeffs: dict, sense: str = "min",
                      constant: float = 0.0):
        """Objective sum_v Re Tr(C_v X_v) + constant."""
        for v in coeffs:
            if v not in self.variables:
                raise ValueError(f"objective references unknown variable {v!r}")
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self._objective = {v: np.asarray(c, dtype=complex)
                           for v, c in coeffs.items()}
        self._sense = sense
        self._obj_constant = float(constant)

    def add_psd_constraint(self, fn):
        self.psd_constraints.append(fn)

    def add_equality_constraint(self, fn):
        self.equality_constraints.append(fn)

    # -- materialization -------------------------------------------------

    def _var_layout(self):
        layout = []
        offset = 0
        for name, d in self.variables.items():
            layout.append((name, d, offset))
            offset += d * d
        return layout, offset

    def _zero_vars(self):
        return {name: np.zeros((d, d), dtype=complex)
                for name, d in self.variables.items()}

    def compile(self) -> "CompiledSdp":
        layout, nvars = self._var_layout()
        zeros = self._zero_vars()

        def probe(fn):
            g0 = np.asarray(fn(zeros), dtype=complex)
            mats = np.empty((nvars,) + g0.shape, dtype=complex)
            for name, d, off in layout:
                for k in range(d * d):
                    vars_k = dict(zeros)
                    e = _basis_element(d, k)
                    vars_k[name] = e
                    mats[off + k] = np.asarray(fn(vars_k), dtype=complex) - g0
            return g0, mats

        blocks = []
        for fn in self.psd_constraints:
            g0, mats = probe(fn)
            if g0.shape[0] != g0.shape[1]:
                raise ValueError("PSD constraint must return a square matrix")
            if np.max(np.abs(np.imag(g0))) > 0 or np.max(np.abs(np.imag(mats))) > 0:
                g0 = _realify((g0 + g0.conj().T) / 2)
                mats = np.stack([_realify((m + m.conj().T) / 2) for m in mats])
            else:
                g0 = np.real((g0 + g0.conj().T) / 2)
                mats = np.real((mats + np.transpose(mats, (0, 2, 1)).conj()) / 2)
            blocks.append((g0, mats))

        eq_rows = []
        eq_rhs = []
        for fn in self.equality_constraints:
            g0, mats = probe(fn)
            coeff = np.stack([hermitian_basis_coords((m + m.conj().T) / 2)
                              for m in mats], axis=1)  # (d^2, nvars)
            eq_rows.append(coeff)
            eq_rhs.append(-hermitian_basis_coords((g0 + g0.conj().T) / 2))
        emat = np.vstack(eq_rows) if eq_rows else np.zeros((0, nvars))
        erhs = np.concatenate(eq_rhs) if eq_rhs else np.zeros(0)

        c = np.zeros(nvars)
        for name, d, off in layout:
            coeff = self._objective.get(name)
            if coeff is None:
                continue
            herm = (coeff + coeff.conj().T) / 2
            c[off:off + d * d] = hermitian_basis_coords(herm)
        sign = 1.0 if self._sense == "min" else -1.0
        return CompiledSdp(layout, nvars, blocks, emat, erhs,
                           sign * c, self._obj_constant, sign)


class CompiledSdp:
    """Materialized problem: real blocks over a flat real coordinate vector."""

    def __init__(self, layout, nvars, blocks, emat, erhs, c, constant, sign):
        self.layout = layout
        self.nvars = nvars
        self.blocks = blocks          # list of (G0, G[nvars, m, m]) real
        self.emat = emat
        self.erhs = erhs
        self.c = c
        self.constant = constant
        self.sign = sign
        self._reduced = None

    def set_objective_coords(self, c: np.ndarray, constant: float = 0.0,
                             sign: float = 1.0):
        """Swap the objective without re-materializing constraints."""
        self.c = sign * np.asarray(c, dtype=float)
        self.constant = float(constant)
        self.sign = sign
        if self._reduced is not None:
            x0, z, _, _, g0h, gh = self._reduced
            self._reduced = (x0, z, z.T @ self.c, self.c @ x0, g0h, gh)

    def reduce(self, feas_tol: float):
        """Eliminate equalities: x = x0 + Z u with E x = f."""
        if self._reduced is not None:
            return self._reduced
        if self.emat.shape[0] == 0:
            x0 = np.zeros(self.nvars)
            z = np.eye(self.nvars)
        else:
            x0, res, rank, sv = np.linalg.lstsq(self.emat, self.erhs, rcond=None)
            resid = np.linalg.norm(self.emat @ x0 - self.erhs)
            if resid > feas_tol * (1 + np.linalg.norm(self.erhs)):
                raise _InfeasibleEqualities(resid)
            u, s, vt = np.linalg.svd(self.emat, full_matrices=True)
            tol = max(self.emat.shape) * np.finfo(float).eps * (s[0] if len(s) else 1)
            rank = int(np.sum(s > tol))
            z = vt[rank:].T
        chat, c0 = z.T @ self.c, self.c @ x0
        g0h = [g0 + np.einsum("i,imn->mn", x0, g) for g0, g in self.blocks]
        gh = [np.einsum("ij,imn->jmn", z, g) for g0, g in self.blocks]
        self._reduced = (x0, z, chat, c0, g0h, gh)
        return self._reduced

    def unpack(self, x: np.ndarray) -> dict:
        out = {}
        for name, d, off in self.layout:
            out[name] = coords_to_hermitian(x[off:off + d * d], d)
        return out


class _InfeasibleEqualities(Exception):
    def __init__(self, resid):
        self.resid = resid


# ----------------------------------------------------------------------
# Interior-point kernel (SDPA form, NT scaling, Mehrotra-style sigma)
# ----------------------------------------------------------------------

def _sym(m):
    return (m + m.T) / 2


def _eigh_floor(m, floor=0.0):
    vals, vecs = np.linalg.eigh(_sym(m))
    return np.maximum(vals, floor), vecs


def _nt_scaling(x, s):
    """Symmetric W with W S W = X, per block."""
    sv, sq = _eigh_floor(s, 1e-300)
    s_half = (sq * np.sqrt(sv)) @ sq.T
    s_mhalf = (sq / np.sqrt(sv)) @ sq.T
    inner = _sym(s_half @ x @ s_half)
    iv, iq = _eigh_floor(inner, 0.0)
    inner_half = (iq * np.sqrt(np.maximum(iv, 0.0))) @ iq.T
    return _sym(s_mhalf @ inner_half @ s_mhalf)


def _max_step(x, d, tau):
    """Largest alpha <= 1 with x + alpha*d >= 0 (up to fraction tau)."""
    vals, vecs = np.linalg.eigh(_sym(x))
    vals = np.maximum(vals, 1e-300)
    b = (vecs / np.sqrt(vals)) @ vecs.T
    m = np.min(np.linalg.eigvalsh(_sym(b @ d @ b)))
    if m >= -1e-14:
        return 1.0
    return min(1.0, -tau / m)


def _ipm(chat, g0h, gh, gap_tol, feas_tol, max_iter):
    """min chat.u s.t. g0h_k + sum_j u_j gh_k_j >= 0 over all blocks.

    Returns (status, u, gap, iters, pinf, dinf, multipliers); the
    multipliers are the PSD-cone dual blocks (one per constraint),
    normalized so that <gh_k_j, X_k> sums to chat_j at optimality.
    """
    n = len(chat)
    blocks = list(range(len(g0h)))
    if n == 0:
        # nothing to optimize; feasibility of the constant blocks
        ok = all(np.min(np.linalg.eigvalsh(_sym(g))) > -feas_tol for g in g0h)
        return ("optimal" if ok else "infeasible", np.zeros(0), 0.0, 0, 0.0,
                0.0, [np.zeros_like(g) for g in g0h])
    # SDPA mapping: A_j = -gh_j, C = g0h, b = -chat, y = u
    a = [-g for g in gh]
    cmat = [g for g in g0h]
    b = -chat
    scale = max(1.0, *(np.max(np.abs(m)) for m in cmat),
                *(np.max(np.abs(m)) for m in a if m.size))
    x = [np.eye(m.shape[1]) * max(1.0, np.linalg.norm(b) / scale)
         for m in gh]
    s = [np.eye(m.shape[1]) * scale * 1.0 for m in gh]
    y = np.zeros(n)
    kappa = sum(m.shape[1] for m in g0h)
    a_flat = [m.reshape(n, -1) for m in a]
    status = "max_iter"
    gap = np.inf
    pinf = dinf = np.inf
    it = 0
    snapshot = ([m.copy() for m in x], y.copy(), [m.copy() for m in s])
    for it in range(1, max_iter + 1):
        try:
            rd = [cmat[k] - s[k] - np.einsum("j,jmn->mn", y, a[k]) for k in blocks]
            rp = b - np.array([a_flat[k] @ x[k].reshape(-1) for k in blocks]).sum(0)
            xs = sum(np.sum(x[k] * s[k]) for k in blocks)
            mu = xs / kappa
            pobj = sum(np.sum(cmat[k] * x[k]) for k in blocks)
            dobj = b @ y
            gap = abs(xs) / (1 + abs(pobj) + abs(dobj))
            xnorm = max(np.linalg.norm(x[k]) for k in blocks)
            ynorm = np.linalg.norm(y)
            pinf = np.linalg.norm(rp) / (1 + np.linalg.norm(b) + xnorm)
            dinf = max(np.linalg.norm(rd[k]) / (1 + np.linalg.norm(cmat[k]) + ynorm)
                       for k in blocks)
            if gap < gap_tol and pinf < feas_tol and dinf < feas_tol:
                status = "optimal"
                break
            if not np.isfinite(xs) or not np.isfinite(pinf):
                status = "numerical_failure"
                break
            if abs(dobj) > 1e13 * (1 + np.linalg.norm(b)) and dinf < feas_tol:
                status = "infeasible"
                break
            w = [_nt_scaling(x[k], s[k]) for k in blocks]
            t = [w[k] @ a[k] @ w[k] for k in blocks]  # (n, m, m) each
            msch = sum(t[k].reshape(n, -1) @ a_flat[k].T for k in blocks)
            msch = _sym(msch)
            try:
                jitter = 0.0
                for attempt in range(4):
                    try:
                        lo = np.linalg.cholesky(msch + jitter * np.eye(n))
                        break
                    except np.linalg.LinAlgError:
                        jitter = max(1e-14, 10 * jitter, 1e-12 * np.trace(msch) / n)
                else:
                    raise np.linalg.LinAlgError
            except np.linalg.LinAlgError:
                status = "numerical_failure"
                break

            def solve_msch(rhs):
                sol = np.linalg.solve(lo.T, np.linalg.solve(lo, rhs))
                resid = rhs - msch @ sol
                sol += np.linalg.solve(lo.T, np.linalg.solve(lo, resid))
                return sol

            def direction(sigma):
                rhs = rp.copy()
                for k in blocks:
                    zmat = sigma * mu * _s_inv(s[k]) - x[k] - w[k] @ rd[k] @ w[k]
                    rhs -= a_flat[k] @ zmat.reshape(-1)
                dy = solve_msch(rhs)
                ds = [rd[k] - np.einsum("j,jmn->mn", dy, a[k]) for k in blocks]
                dx = [_sym(sigma * mu * _s_inv(s[k]) - x[k] - w[k] @ ds[k] @ w[k])
                      for k in blocks]
                return dy, dx, ds

            dy, dx, ds = direction(0.0)
            ap = min(_max_step(x[k], dx[k], 1.0) for k in blocks)
            ad = min(_max_step(s[k], ds[k], 1.0) for k in blocks)
            xs_aff = sum(np.sum((x[k] + ap * dx[k]) * (s[k] + ad * ds[k]))
                         for k in blocks)
            sigma = min(0.99, max(1e-6, (max(xs_aff, 0.0) / xs) ** 3))
            dy, dx, ds = direction(sigma)
            ap = min(STEP_FRACTION * _max_step(x[k], dx[k], STEP_FRACTION)
                     for k in blocks)
            ad = min(STEP_FRACTION * _max_step(s[k], ds[k], STEP_FRACTION)
                     for k in blocks)
            ap, ad = min(ap, 1.0), min(ad, 1.0)
            for k in blocks:
                x[k] = _sym(x[k] + ap * dx[k])
                s[k] = _sym(s[k] + ad * ds[k])
            y = y + ad * dy
        except np.linalg.LinAlgError:
            x, y, s = snapshot
            status = "numerical_failure"
            break
        snapshot = ([m.copy() for m in x], y.copy(),
                    [m.copy() for m in s])
    return status, y, gap, it, pinf, dinf, x


def _s_inv(s):
    vals, vecs = np.linalg.eigh(_sym(s))
    vals = np.maximum(vals, 1e-300)
    return (vecs / vals) @ vecs.T


# ----------------------------------------------------------------------
# Entry points
# ----------------------------------------------------------------------

def solve_sdp(problem, gap_tol: float = DEFAULT_GAP_TOL,
              feas_tol: float = DEFAULT_FEAS_TOL,
              max_iter: int = MAX_ITER, engine: str = "internal") -> SdpSolution:
    """Solve an :class:`SdpProblem` or a :class:`CompiledSdp`.

    ``engine='bridge'`` hands the materialized problem to the external
    solver named by the QFI_FORGE_SOLVER environment variable.
    """
    compiled = problem.compile() if isinstance(problem, SdpProblem) else problem
    if engine == "bridge":
        from .sdp_bridge import solve_via_bridge

        path = os.environ.get("QFI_FORGE_SOLVER")
        if not path:
            raise RuntimeError("engine='bridge' requires QFI_FORGE_SOLVER")
        return solve_via_bridge(compiled, path, gap_tol, feas_tol)
    try:
        x0, z, chat, c0, g0h, gh = compiled.reduce(feas_tol)
    except _InfeasibleEqualities as exc:
        return SdpSolution("infeasible", np.nan, {}, np.inf,
                           residuals={"equality": exc.resid})
    status, u, gap, iters, pinf, dinf, mult = _ipm(
        chat, g0h, gh, gap_tol, feas_tol, max_iter
    )
    x = x0 + z @ u if len(u) else x0
    value = compiled.sign * (compiled.c @ x) + compiled.constant
    sol = SdpSolution(
        status=status,
        objective_value=float(value),
        variable_values=compiled.unpack(x),
        duality_gap=float(gap),
        iterations=iters,
        residuals={"primal": float(pinf), "dual": float(dinf)},
    )
    sol.psd_multipliers = mult
    return sol


def min_hermitian_quadratic(q, b: np.ndarray, reg: float = 1e-12) -> np.ndarray:
    """argmax of 2 Re<b, x> - <x, Q x> over Hermitian x.

    ``q`` is a PSD form on Hermitian matrices, either a callable
    X -> Q(X) or an explicit real matrix over the fixed Hermitian basis
    coordinates. Computed as the regularized solve (Q + reg*1) x = b on
    the Hermitian subspace.
    """
    b = np.asarray(b, dtype=complex)
    d = b.shape[0]
    n = d * d
    bvec = hermitian_basis_coords((b + b.conj().T) / 2)
    if callable(q):
        qmat = np.empty((n, n))
        for k in range(n):
            e = _basis_element(d, k)
            qmat[:, k] = hermitian_basis_coords(np.asarray(q(e), dtype=complex))
    else:
        qmat = np.asarray(q, dtype=float)
        if qmat.shape != (n, n):
            raise ValueError(f"Q matrix must be {n}x{n} over Hermitian coords")
    qmat = (qmat + qmat.T) / 2
    scale = max(1.0, float(np.max(np.abs(qmat))))
    coords = np.linalg.solve(qmat + reg * scale * np.eye(n), bvec)
    return coords_to_hermitian(coords, d)


def solve_regularized_quadratic(m: np.ndarray, l: np.ndarray,
                                reg: float = 1e-11) -> np.ndarray:
    """argmax of 2 l.t - t.M t for real symmetric PSD M, with eigenvalue cut.

    Components of l along eigenvalues below the cut are dropped, which
    keeps the maximizer finite when M is singular.
    """
    m = (m + m.T) / 2
    vals, vecs = np.linalg.eigh(m)
    vmax = max(float(vals[-1]), 0.0)
    cut = max(reg * max(vmax, 1.0), 1e-300)
    lw = vecs.T @ l
    coef = np.where(vals > cut, lw / np.maximum(vals, cut), 0.0)
    return vecs @ coef
