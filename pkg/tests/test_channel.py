import numpy as np
import pytest

from qfi_forge import channel as qch
from qfi_forge.channel import (
    LindbladSpec,
    ParamChannel,
    amplitude_damping,
    builtin_channel,
    channel_from_spec,
    channel_to_spec,
    dephasing,
    from_lindblad,
    markov_dephasing_env,
)
from qfi_forge.qcore import (
    ChoiOperator,
    Space,
    link_product,
    partial_op,
    validate_channel,
)

SZ = np.diag([1.0, -1.0]).astype(complex)


def finite_difference_choi(krauses, step=1e-5):
    """Central difference of the phase-encoded Choi over theta."""
    def choi_at(theta):
        u = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
        from qfi_forge.qcore import choi_from_krauses
        return choi_from_krauses([u @ k for k in krauses]).matrix

    return (choi_at(step) - choi_at(-step)) / (2 * step)


class TestConstruction:
    def test_kraus_and_choi_routes_agree(self):
        ch = dephasing(0.75)
        ch2 = ParamChannel(choi=ch.choi(), dchoi=ch.dchoi())
        assert np.max(np.abs(ch.choi() - ch2.choi())) < 1e-12
        assert np.max(np.abs(ch.dchoi() - ch2.dchoi())) < 1e-12

    def test_default_derivative_is_zero(self):
        ch = ParamChannel(krauses=[np.eye(2)])
        assert np.allclose(ch.dchoi(), 0)

    def test_env_dim_splits_spaces(self):
        v = np.eye(4, dtype=complex)
        ch = ParamChannel(krauses=[v], env_dim=2)
        labels = [s.label for s in ch.choi_operator().spaces]
        assert labels == ["EO", "O", "EI", "I"]
        assert ch.env_dim == 2 and ch.input_dim == 2 and ch.output_dim == 2

    def test_invalid_cptp_rejected(self):
        with pytest.raises(ValueError):
            ParamChannel(krauses=[0.5 * np.eye(2)])

    def test_kraus_views_round_trip(self):
        ch = dephasing(0.75)
        ks, dks = ch.dkrauses()
        ch2 = ParamChannel(krauses=ks, dkrauses=dks)
        assert np.max(np.abs(ch.choi() - ch2.choi())) < 1e-12
        assert np.max(np.abs(ch.dchoi() - ch2.dchoi())) < 1e-12


class TestLindblad:
    def test_matches_kraus_dephasing(self):
        p, t = 0.75, 1.0
        gamma = -np.log(2 * p - 1) / t
        omega = 0.0

        def lind(rho):
            rot = 0.5j * omega * (rho @ SZ - SZ @ rho)
            return rot + gamma / 2 * (SZ @ rho @ SZ - rho)

        def dlind(rho):
            return 0.5j * (rho @ SZ - SZ @ rho)

        ch = from_lindblad(LindbladSpec(lind, dlind, t, 2))
        ref = dephasing(p)
        assert np.max(np.abs(ch.choi() - ref.choi())) < 1e-8
        assert np.max(np.abs(ch.dchoi() - ref.dchoi())) < 1e-8

    def test_short_time_is_identity(self):
        def lind(rho):
            return SZ @ rho @ SZ - rho

        ch = from_lindblad(LindbladSpec(lind, None, 1e-8, 2))
        ident = ParamChannel(krauses=[np.eye(2)])
        assert np.max(np.abs(ch.choi() - ident.choi())) < 1e-6

    def test_derivative_matches_finite_difference(self):
        t, gamma = 1.0, 0.4

        def gen(omega):
            def lind(rho):
                rot = -0.5j * omega * (SZ @ rho - rho @ SZ)
                return rot + gamma / 2 * (SZ @ rho @ SZ - rho)
            return lind

        def dlind(rho):
            return -0.5j * (SZ @ rho - rho @ SZ)

        step = 1e-5
        plus = from_lindblad(LindbladSpec(gen(step), None, t, 2))
        minus = from_lindblad(LindbladSpec(gen(-step), None, t, 2))
        fd = (plus.choi() - minus.choi()) / (2 * step)
        ch = from_lindblad(LindbladSpec(gen(0.0), dlind, t, 2))
        assert np.max(np.abs(ch.dchoi() - fd)) < 1e-7

    def test_trace_violating_generator_rejected(self):
        with pytest.raises(ValueError):
            from_lindblad(LindbladSpec(lambda rho: rho, None, 1.0, 2))


class TestAlgebra:
    def test_compose_dephasing(self):
        comp = dephasing(0.75).compose(dephasing(0.75))
        pe = 0.75 * 0.75 + 0.25 * 0.25
        assert np.max(np.abs(comp.choi() - dephasing(pe).choi())) < 1e-12

    def test_compose_operator_syntax(self):
        comp = dephasing(0.9) @ dephasing(0.8)
        assert comp.total_input_dim == 2

    def test_compose_derivative_finite_difference(self):
        p = 0.75
        ks, dks = dephasing(p).dkrauses()

        def composed_choi(theta):
            u = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
            kt = [u @ k for k in ks]
            prod = [a @ b for a in kt for b in kt]
            from qfi_forge.qcore import choi_from_krauses
            return choi_from_krauses(prod).matrix

        step = 1e-5
        fd = (composed_choi(step) - composed_choi(-step)) / (2 * step)
        comp = dephasing(p).compose(dephasing(p))
        assert np.max(np.abs(comp.dchoi() - fd)) < 1e-7

    def test_kron_identity(self):
        ident = ParamChannel(krauses=[np.eye(2)])
        k = ident.kron(ident)
        assert k.total_input_dim == 4
        ref = ParamChannel(krauses=[np.eye(4)])
        assert np.max(np.abs(k.choi() - ref.choi())) < 1e-12

    def test_kron_pow_one_is_identity_operation(self):
        ch = dephasing(0.75)
        assert np.max(np.abs(ch.kron_pow(1).choi() - ch.choi())) == 0

    def test_kron_derivative_finite_difference(self):
        p = 0.75
        ks, _ = dephasing(p).dkrauses()

        def kron_choi(theta):
            u = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
            kt = [u @ k for k in ks]
            prod = [np.kron(a, b) for a in kt for b in kt]
            from qfi_forge.qcore import choi_from_krauses
            return choi_from_krauses(prod).matrix

        step = 1e-5
        fd = (kron_choi(step) - kron_choi(-step)) / (2 * step)
        assert np.max(np.abs(dephasing(p).kron_pow(2).dchoi() - fd)) < 1e-7

    def test_scalar_and_add(self):
        ch = dephasing(0.75)
        half = 0.5 * ch
        comb = half.add(half)
        assert np.max(np.abs(comb.choi() - ch.choi())) < 1e-12
        assert not half.cptp_checked

    def test_creator_outputs_validate(self):
        for ch in (dephasing(0.3), dephasing(0.8, rot_like=True),
                   amplitude_damping(0.6),
                   markov_dephasing_env(0.75, -0.5)):
            rep = validate_channel(ch.choi_operator())
            assert rep.is_cp and rep.is_tp
            tr = partial_op(
                ChoiOperator(ch.dchoi(), ch.choi_operator().spaces),
                [s.label for s in ch.choi_operator().spaces
                 if s.role == "output"],
                "trace",
            )
            assert np.max(np.abs(tr.matrix)) < 1e-10


class TestBuiltins:
    def test_dephasing_representations_match(self):
        a = dephasing(0.75)
        b = dephasing(0.75, rot_like=True)
        assert np.max(np.abs(a.choi() - b.choi())) < 1e-12
        assert np.max(np.abs(a.dchoi() - b.dchoi())) < 1e-12

    def test_dephasing_no_noise(self):
        ch = dephasing(1.0)
        ident = ParamChannel(krauses=[np.eye(2)])
        assert np.max(np.abs(ch.choi() - ident.choi())) < 1e-12
        phi = np.array([1, 0, 0, 1], dtype=complex)
        term = -0.5j * np.kron(SZ, np.eye(2)) @ np.outer(phi, phi)
        assert np.max(np.abs(ch.dchoi() - (term + term.conj().T))) < 1e-12

    def test_amplitude_damping_full_relaxation(self):
        ch = amplitude_damping(0.0)
        rng = np.random.default_rng(0)
        for _ in range(5):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            rho = np.outer(v, v.conj())
            rho /= np.trace(rho)
            out, _ = ch(rho)
            assert np.max(np.abs(out - np.diag([1.0, 0.0]))) < 1e-12

    def test_p_out_of_range(self):
        with pytest.raises(ValueError):
            dephasing(1.2)
        with pytest.raises(ValueError):
            builtin_channel("amplitude_damping", -0.1)

    def test_unknown_builtin(self):
        with pytest.raises(ValueError):
            builtin_channel("depolarizing", 0.5)


class TestApply:
    def test_identity(self):
        ch = ParamChannel(krauses=[np.eye(2)])
        rho = np.diag([1.0, 0.0]).astype(complex)
        out, dout = ch(rho)
        assert np.allclose(out, rho)
        assert np.allclose(dout, 0)

    def test_dephased_plus(self):
        plus = np.full((2, 2), 0.5, dtype=complex)
        out, dout = dephasing(0.75)(plus)
        assert np.isclose(out[0, 1], 0.25)
        assert np.isclose(dout[0, 1], -0.25j)
        assert np.isclose(dout[1, 0], 0.25j)

    def test_apply_equals_link_product(self):
        rng = np.random.default_rng(1)
        ch = amplitude_damping(0.4)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        rho = np.outer(v, v.conj())
        rho /= np.trace(rho)
        out, _ = ch(rho)
        state = ChoiOperator(rho, [Space("I", 2, "output")])
        linked = link_product(state, ch.choi_operator())
        assert np.max(np.abs(out - linked.matrix)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dephasing(0.5)(np.eye(3))


class TestLinkEnv:
    def test_marginal_action_matches_system_channel(self):
        # with the environment in its recorded input state, tracing it
        # out reduces the extended channel to plain dephasing
        for splitting in ("one_sided", "symmetric"):
            c = -0.75 if splitting == "one_sided" else 0.5
            ch = markov_dephasing_env(0.75, c, splitting)
            deph = dephasing(0.75, rot_like=True)
            rng = np.random.default_rng(2)
            for _ in range(10):
                v = rng.normal(size=2) + 1j * rng.normal(size=2)
                sys = np.outer(v, v.conj())
                sys /= np.trace(sys)
                rho = np.kron(ch.env_input_state, sys)
                out, dout = ch(rho)
                out_sys = np.einsum("aiaj->ij", out.reshape(2, 2, 2, 2))
                dout_sys = np.einsum("aiaj->ij", dout.reshape(2, 2, 2, 2))
                ref, dref = deph(sys)
                assert np.max(np.abs(out_sys - ref)) < 1e-10
                assert np.max(np.abs(dout_sys - dref)) < 1e-10

    def test_env_identity_neutral(self):
        ch = markov_dephasing_env(0.75, 0.5)
        ident = ParamChannel(krauses=[np.kron(np.eye(2), np.eye(1))],
                             env_dim=2)
        linked = ch.link_env(ident)
        assert np.max(np.abs(linked.choi() - ch.choi())) < 1e-12

    def test_associativity(self):
        a = markov_dephasing_env(0.8, 0.3)
        b = markov_dephasing_env(0.7, -0.2)
        c = markov_dephasing_env(0.9, 0.1)
        left = (a.link_env(b)).link_env(c)
        right = a.link_env(b.link_env(c))
        assert np.max(np.abs(left.choi() - right.choi())) < 1e-10
        assert np.max(np.abs(left.dchoi() - right.dchoi())) < 1e-10

    def test_env_dim_mismatch(self):
        a = markov_dephasing_env(0.75, 0.0)
        b = dephasing(0.75)
        with pytest.raises(ValueError):
            a.link_env(b)

    def test_symmetric_splitting_chains_match(self):
        # half-step t with t o t = T gives the same N-fold process
        n, c = 3, 0.5
        one = markov_dephasing_env(0.75, c, "one_sided")
        sym = markov_dephasing_env(0.75, c, "symmetric")

        def process(ch):
            rho_e = ChoiOperator(np.eye(2) / 2,
                                 [Space(("E", 0), 2, "output")])
            cur = rho_e
            for k in range(n):
                mapping = {"EI": ("E", k), "I": ("S", k, "in"),
                           "EO": ("E", k + 1), "O": ("S", k, "out")}
                cur = link_product(cur, ch.choi_operator().relabel(mapping))
            cur = partial_op(cur, [("E", n)], "trace")
            order = [("S", k, "out") for k in range(n)] + [
                ("S", k, "in") for k in range(n)]
            return cur.reorder(order).matrix

        assert np.max(np.abs(process(one) - process(sym))) < 1e-10

    def test_symmetric_negative_c_raises(self):
        with pytest.raises(ValueError):
            markov_dephasing_env(0.75, -0.75, "symmetric")


class TestMarkovDephasing:
    def test_transfer_probabilities(self):
        # conditional sign-flip probabilities for c = -0.75
        c = -0.75
        ch = markov_dephasing_env(0.75, c)
        plus = np.array([1, 1]) / np.sqrt(2)
        # feed env |+> with a maximally mixed system, read the env output
        rho = np.kron(np.outer(plus, plus), np.eye(2) / 2)
        out, _ = ch(rho)
        env_out = np.einsum("aibi->ab", out.reshape(2, 2, 2, 2))
        p_same = np.real(plus @ env_out @ plus)
        assert np.isclose(p_same, (1 + c) / 2)  # T(+|+) = 0.125

    def test_c_one_signs_never_flip(self):
        ch = markov_dephasing_env(0.75, 1.0)
        plus = np.array([1, 1]) / np.sqrt(2)
        rho = np.kron(np.outer(plus, plus), np.eye(2) / 2)
        out, _ = ch(rho)
        env_out = np.einsum("aibi->ab", out.reshape(2, 2, 2, 2))
        assert np.isclose(np.real(plus @ env_out @ plus), 1.0)

    def test_c_zero_env_output_decoupled(self):
        ch = markov_dephasing_env(0.75, 0.0)
        rng = np.random.default_rng(4)
        for _ in range(5):
            v = rng.normal(size=4) + 1j * rng.normal(size=4)
            rho = np.outer(v, v.conj())
            rho /= np.trace(rho)
            out, _ = ch(rho)
            env_out = np.einsum("aibi->ab", out.reshape(2, 2, 2, 2))
            assert np.max(np.abs(env_out - np.eye(2) / 2)) < 1e-10

    def test_records_env_input_state(self):
        ch = markov_dephasing_env(0.75, -0.75)
        assert np.allclose(ch.env_input_state, np.eye(2) / 2)


def test_lindblad_spec_route():
    from qfi_forge.channel import _superop_matrix
    from qfi_forge.qcore import complex_to_json

    p, t = 0.75, 1.0
    gamma = -np.log(2 * p - 1) / t

    def lind(rho):
        return gamma / 2 * (SZ @ rho @ SZ - rho)

    def dlind(rho):
        return 0.5j * (rho @ SZ - SZ @ rho)

    spec = {
        "kind": "lindblad",
        "matrix": complex_to_json(_superop_matrix(lind, 2)),
        "dmatrix": complex_to_json(_superop_matrix(dlind, 2)),
        "time": t,
        "input_dim": 2,
    }
    ch = channel_from_spec(spec)
    ref = dephasing(p)
    assert np.max(np.abs(ch.choi() - ref.choi())) < 1e-8
    assert np.max(np.abs(ch.dchoi() - ref.dchoi())) < 1e-8


def test_channel_spec_round_trip():
    for spec in (
        {"kind": "builtin", "name": "dephasing", "p": 0.75},
        {"kind": "builtin", "name": "dephasing", "p": 0.75, "rot_like": True},
        {"kind": "builtin", "name": "amplitude_damping", "p": 0.6},
        {"kind": "builtin", "name": "dephasing", "p": 0.75, "c": -0.75,
         "splitting": "one_sided"},
    ):
        ch = channel_from_spec(spec)
        back = channel_from_spec(channel_to_spec(ch))
        assert np.max(np.abs(ch.choi() - back.choi())) < 1e-12
        assert np.max(np.abs(ch.dchoi() - back.dchoi())) < 1e-12
