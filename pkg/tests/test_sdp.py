import numpy as np
import pytest

from qfi_forge.sdp import (
    SdpProblem,
    coords_to_hermitian,
    hermitian_basis_coords,
    min_hermitian_quadratic,
    solve_sdp,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def tr_out(x, dout, din):
    return np.einsum("aiaj->ij", x.reshape(dout, din, dout, din))


class TestSolveSdp:
    def test_operator_norm_epigraph(self):
        p = SdpProblem()
        p.add_var("lam", 1)
        p.set_objective({"lam": np.eye(1)})
        p.add_psd_constraint(lambda v: v["lam"][0, 0] * np.eye(2) - SX)
        sol = solve_sdp(p)
        assert sol.status == "optimal"
        assert abs(sol.objective_value - 1.0) < 1e-7

    def test_schur_complement_norm(self):
        a = np.array([3.0, 4.0]) / 5

        def blk(v):
            m = np.zeros((3, 3), dtype=complex)
            m[0, 0] = v["lam"][0, 0]
            m[0, 1:] = a
            m[1:, 0] = a
            m[1:, 1:] = np.eye(2)
            return m

        p = SdpProblem()
        p.add_var("lam", 1)
        p.set_objective({"lam": np.eye(1)})
        p.add_psd_constraint(blk)
        sol = solve_sdp(p)
        assert abs(sol.objective_value - 1.0) < 1e-7

    def test_cptp_linear_maximization(self):
        from qfi_forge.channel import dephasing

        m = dephasing(0.75).choi()
        p = SdpProblem()
        p.add_var("X", 4)
        p.set_objective({"X": m}, sense="max")
        p.add_psd_constraint(lambda v: v["X"])
        p.add_equality_constraint(lambda v: tr_out(v["X"], 2, 2) - np.eye(2))
        sol = solve_sdp(p)
        assert sol.status == "optimal"
        # the identity channel saturates: value = <Phi|M|Phi> = 3
        assert abs(sol.objective_value - 3.0) < 1e-6
        x = sol.variable_values["X"]
        assert np.min(np.linalg.eigvalsh(x)) > -1e-6
        assert np.max(np.abs(tr_out(x, 2, 2) - np.eye(2))) < 1e-6

    def test_solution_never_beats_feasible_points(self):
        # minimization: solver objective <= any feasible point value
        rng = np.random.default_rng(0)
        for trial in range(5):
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            c = g + g.conj().T
            p = SdpProblem()
            p.add_var("X", 4)
            p.set_objective({"X": c})
            p.add_psd_constraint(lambda v: v["X"])
            p.add_equality_constraint(
                lambda v: np.eye(1) * (np.trace(v["X"]) - 1.0)
            )
            sol = solve_sdp(p)
            assert sol.status == "optimal"
            for _ in range(10):
                v = rng.normal(size=4) + 1j * rng.normal(size=4)
                rho = np.outer(v, v.conj())
                rho /= np.trace(rho)
                feas = float(np.real(np.trace(c @ rho)))
                assert sol.objective_value <= feas + 1e-7

    def test_reproducibility(self):
        p = SdpProblem()
        p.add_var("lam", 1)
        p.set_objective({"lam": np.eye(1)})
        p.add_psd_constraint(lambda v: v["lam"][0, 0] * np.eye(2) - SX)
        a = solve_sdp(p)
        b = solve_sdp(p)
        assert a.iterations == b.iterations
        assert abs(a.objective_value - b.objective_value) < 1e-12

    def test_infeasible_equalities(self):
        p = SdpProblem()
        p.add_var("X", 2)
        p.set_objective({"X": np.eye(2)})
        p.add_psd_constraint(lambda v: v["X"])
        p.add_equality_constraint(lambda v: np.eye(1) * (np.trace(v["X"]) - 1))
        p.add_equality_constraint(lambda v: np.eye(1) * (np.trace(v["X"]) - 2))
        sol = solve_sdp(p)
        assert sol.status == "infeasible"

    def test_optimal_has_small_gap(self):
        p = SdpProblem()
        p.add_var("lam", 1)
        p.set_objective({"lam": np.eye(1)})
        p.add_psd_constraint(lambda v: v["lam"][0, 0] * np.eye(2) - SX)
        sol = solve_sdp(p, gap_tol=1e-8, feas_tol=1e-8)
        assert sol.duality_gap < 1e-8
        assert sol.residuals["primal"] < 1e-8
        assert sol.residuals["dual"] < 1e-8


class TestMinHermitianQuadratic:
    def test_identity_form(self):
        x = min_hermitian_quadratic(lambda m: m, SZ)
        assert np.max(np.abs(x - SZ)) < 1e-9

    def test_scaling(self):
        x = min_hermitian_quadratic(lambda m: 2 * m, SX)
        assert np.max(np.abs(x - SX / 2)) < 1e-9

    def test_random_psd_matches_pinv(self):
        rng = np.random.default_rng(1)
        d = 3
        n = d * d
        g = rng.normal(size=(n, n))
        q = g @ g.T + 0.1 * np.eye(n)
        b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        b = (b + b.conj().T) / 2
        x = min_hermitian_quadratic(q, b, reg=1e-14)
        coords = np.linalg.pinv(q) @ hermitian_basis_coords(b)
        expect = coords_to_hermitian(coords, d)
        assert np.max(np.abs(x - expect)) < 1e-8


class TestBridge:
    def test_requires_solver_path(self, monkeypatch):
        monkeypatch.delenv("QFI_FORGE_SOLVER", raising=False)
        p = SdpProblem()
        p.add_var("lam", 1)
        p.set_objective({"lam": np.eye(1)})
        p.add_psd_constraint(lambda v: v["lam"][0, 0] * np.eye(2) - SX)
        with pytest.raises(RuntimeError):
            solve_sdp(p, engine="bridge")

    def test_problem_file_round_trip(self):
        from qfi_forge.sdp_bridge import problem_to_dict

        p = SdpProblem()
        p.add_var("lam", 1)
        p.set_objective({"lam": np.eye(1)})
        p.add_psd_constraint(lambda v: v["lam"][0, 0] * np.eye(2) - SX)
        data = problem_to_dict(p.compile())
        assert data["nvars"] == 1
        assert data["blocks"][0]["dim"] == 2
        # G0 = -SX (real), coefficient of lam = identity
        g0 = {(r, c): v for r, c, v in data["blocks"][0]["g0"]}
        assert g0[(0, 1)] == -1.0 and g0[(1, 0)] == -1.0


def test_hermitian_coords_round_trip():
    rng = np.random.default_rng(2)
    for d in (1, 2, 3, 5):
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m = (m + m.conj().T) / 2
        coords = hermitian_basis_coords(m)
        assert np.max(np.abs(coords_to_hermitian(coords, d) - m)) < 1e-12
        # orthonormality: norms match
        assert np.isclose(np.linalg.norm(coords) ** 2,
                          np.real(np.trace(m @ m)))
