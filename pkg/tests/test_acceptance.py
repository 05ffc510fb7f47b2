"""Acceptance criteria, one test per criterion, tolerances pinned.

Each test prints a single PASS/FAIL line; run with `pytest -s
tests/test_acceptance.py` to see them.  The suite is self-contained and
deterministic (fixed seeds).
"""

import time

import numpy as np
import pytest

from qfi_forge.bounds import ad_bounds, ad_bounds_correlated, asym_scaling_qfi
from qfi_forge.channel import amplitude_damping, dephasing, markov_dephasing_env
from qfi_forge.iss import IssOptions, iss_channel_qfi, iss_parallel_qfi
from qfi_forge.mop import mop_channel_qfi, mop_parallel_qfi
from qfi_forge.tnet import (
    collisional_var_tnet,
    iss_opt,
    iss_tnet_adaptive_qfi,
    iss_tnet_parallel_qfi,
)

_cache = {}


def report(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line)
    assert ok, line


def cached(key, fn):
    if key not in _cache:
        _cache[key] = fn()
    return _cache[key]


def test_single_channel_dephasing():
    t0 = time.perf_counter()
    mop = mop_channel_qfi(dephasing(0.75))
    iss_vals = [
        iss_channel_qfi(dephasing(0.75), 1, IssOptions(seed=s)).qfi
        for s in range(5)
    ]
    wall = time.perf_counter() - t0
    ok = abs(mop - 0.25) < 1e-5
    ok &= all(abs(v - mop) < 1e-4 for v in iss_vals)
    ok &= wall < 5.0
    report(
        "single-channel dephasing",
        ok,
        f"mop={mop:.7f} (analytic 0.25), iss dev "
        f"{max(abs(v - mop) for v in iss_vals):.2e} over 5 seeds, "
        f"{wall:.1f}s",
    )


def test_amplitude_damping_ancilla_necessity():
    t0 = time.perf_counter()
    ch = amplitude_damping(0.75)
    mop = mop_channel_qfi(ch)
    r1 = iss_channel_qfi(ch, 1, IssOptions(seed=0, rel_tol=1e-8)).qfi
    r2 = iss_channel_qfi(ch, 2, IssOptions(seed=0, rel_tol=1e-8)).qfi
    wall = time.perf_counter() - t0
    ok = (r2 - r1 > 1e-3) and abs(r2 - mop) < 1e-4 and wall < 10.0
    report(
        "amplitude-damping ancilla necessity",
        ok,
        f"iss(dA=2)-iss(dA=1)={r2 - r1:.4f} > 1e-3, |iss(2)-mop|="
        f"{abs(r2 - mop):.2e}, {wall:.1f}s",
    )


def test_method_agreement_n3():
    t0 = time.perf_counter()
    ch = dephasing(0.75)
    v_mop = mop_parallel_qfi(ch, 3)
    v_iss = iss_parallel_qfi(ch, 3, 2, IssOptions(seed=0, rel_tol=1e-8)).qfi
    v_tnet = iss_tnet_parallel_qfi(
        ch, 3, ancilla_dim=2, mps_bond_dim=4, sld_bond_dim=16,
        options=IssOptions(seed=0, rel_tol=1e-7),
    ).qfi
    wall = time.perf_counter() - t0
    dev = max(abs(v_mop - v_iss), abs(v_mop - v_tnet), abs(v_iss - v_tnet))
    ok = dev < 1e-4 and wall < 120.0
    report(
        "method agreement at N=3",
        ok,
        f"mop={v_mop:.6f} iss={v_iss:.6f} tnet={v_tnet:.6f} "
        f"max dev={dev:.2e}, {wall:.0f}s",
    )


def test_scaling_classification():
    t0 = time.perf_counter()
    c_hs, k_hs = asym_scaling_qfi(dephasing(1.0))
    c_ss, k_ss = asym_scaling_qfi(dephasing(0.75))
    wall = time.perf_counter() - t0
    ok = k_hs == 2 and abs(c_hs - 1.0) < 1e-6
    ok &= k_ss == 1 and abs(c_ss - 1 / 3) < 1e-6
    ok &= wall < 5.0
    report(
        "Heisenberg vs standard scaling",
        ok,
        f"noiseless ({c_hs:.8f}, k={k_hs}) vs (1, 2); dephasing "
        f"({c_ss:.8f}, k={k_ss}) vs (1/3, 1), {wall:.1f}s",
    )


def test_bound_dominance_and_asymptote():
    t0 = time.perf_counter()
    ch = dephasing(0.75)
    series = cached("ad_bounds_200", lambda: ad_bounds(ch, 200))
    achieved = {
        1: mop_channel_qfi(ch),
        2: mop_parallel_qfi(ch, 2),
        3: mop_parallel_qfi(ch, 3),
    }
    wall = time.perf_counter() - t0
    dominated = all(series.at(n) >= v - 1e-6 for n, v in achieved.items())
    rate = series.values[-1] / 200
    ok = dominated and abs(rate - 1 / 3) < 0.05 * (1 / 3) and wall < 60.0
    report(
        "bound dominance and asymptotic approach",
        ok,
        f"b_n >= achieved at n=1..3 ({dominated}), b200/200={rate:.5f} "
        f"within 5% of 1/3, {wall:.0f}s",
    )


def test_large_n_tensor_network():
    t0 = time.perf_counter()
    ch = dephasing(0.75)
    res = iss_tnet_parallel_qfi(
        ch, 50, ancilla_dim=2, mps_bond_dim=2, sld_bond_dim=4,
        options=IssOptions(seed=0, rel_tol=1e-7),
    )
    wall = time.perf_counter() - t0
    b50 = cached("ad_bounds_200", lambda: ad_bounds(ch, 200)).at(50)
    per_use = res.qfi / 50
    trace = np.asarray(res.trace)
    ok = res.status == "converged"
    ok &= bool(np.all(np.diff(trace) >= -1e-9))
    ok &= (1 / 3) * 0.8 <= per_use <= b50 / 50 + 1e-9
    ok &= wall < 600.0
    report(
        "large-N tensor network (N=50)",
        ok,
        f"value/N={per_use:.5f} in [{(1 / 3) * 0.8:.4f}, {b50 / 50:.4f}], "
        f"{res.status}, monotone, {wall:.0f}s",
    )


def test_correlated_noise():
    t0 = time.perf_counter()
    deph = dephasing(0.75)
    # c = 0: correlated bounds equal uncorrelated (symmetric splitting,
    # whose half-step scrambles both block boundary wires)
    unc = ad_bounds(deph, 6)
    sym0 = markov_dephasing_env(0.75, 0.0, "symmetric")
    cor0 = ad_bounds_correlated(sym0, 6, 1)
    eq_dev = float(np.max(np.abs(np.array(cor0.values)
                                 - np.array(unc.values))))
    # c = -0.75: adaptive value beats the uncorrelated bound
    env = markov_dephasing_env(0.75, -0.75, "one_sided")
    res = iss_tnet_adaptive_qfi(env, 5, ancilla_dim=2,
                                options=IssOptions(seed=0, rel_tol=1e-7))
    b5 = ad_bounds(deph, 5).at(5)
    # block size monotonicity at shared ns
    b1 = ad_bounds_correlated(env, 4, 1)
    b3 = ad_bounds_correlated(env, 4, 3)
    tighter = all(b3.values[i] <= b1.at(n) + 1e-6
                  for i, n in enumerate(b3.ns))
    wall = time.perf_counter() - t0
    ok = eq_dev < 1e-6 and res.qfi > b5 and tighter and wall < 900.0
    report(
        "correlated noise",
        ok,
        f"c=0 equality dev={eq_dev:.2e}, adaptive N=5 {res.qfi:.4f} > "
        f"uncorrelated b5={b5:.4f}, m=3 tighter at ns={b3.ns} ({tighter}), "
        f"{wall:.0f}s",
    )


def test_collisional_strategy():
    t0 = time.perf_counter()
    opts = IssOptions(seed=0, rel_tol=1e-7, max_sweeps=600)
    results = {}
    for name, ch in (("amp", amplitude_damping(0.75)),
                     ("deph", dephasing(0.75))):
        net, _ = collisional_var_tnet(ch, 10, ancilla_dim=2,
                                      mps_bond_dim=2, sld_bond_dim=4)
        qfi_c, trace, _, _ = iss_opt(net, opts)
        par = iss_tnet_parallel_qfi(ch, 10, ancilla_dim=2, mps_bond_dim=2,
                                    sld_bond_dim=4, options=opts).qfi
        results[name] = (qfi_c, par, np.asarray(trace))
    wall = time.perf_counter() - t0
    amp_c, amp_p, amp_tr = results["amp"]
    dep_c, dep_p, dep_tr = results["deph"]
    ok = amp_c >= amp_p - 1e-6 and (amp_c - amp_p) > 1e-3
    ok &= abs(dep_c - dep_p) < 1e-3
    ok &= bool(np.all(np.diff(amp_tr) >= -1e-9))
    ok &= bool(np.all(np.diff(dep_tr) >= -1e-9))
    ok &= wall < 1200.0
    report(
        "collisional strategy (N=10)",
        ok,
        f"amp: collisional {amp_c:.4f} vs parallel {amp_p:.4f} "
        f"(gap {amp_c - amp_p:+.4f} > 1e-3); deph: |{dep_c:.6f} - "
        f"{dep_p:.6f}| = {abs(dep_c - dep_p):.2e} < 1e-3, {wall:.0f}s",
    )


def test_property_suites():
    t0 = time.perf_counter()
    from qfi_forge.qcore import choi_from_krauses, krauses_from_choi
    from qfi_forge.iss import iss_adaptive_qfi

    rng = np.random.default_rng(0)
    # Choi/Kraus round trips
    rt_dev = 0.0
    for _ in range(5):
        g = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        q, _ = np.linalg.qr(g)
        ks = [q[:2], q[2:]]
        c = choi_from_krauses(ks)
        ks2 = krauses_from_choi(c).operators
        rt_dev = max(rt_dev, float(np.max(np.abs(
            choi_from_krauses(ks2).matrix - c.matrix
        ))))
    # dChoi finite differences
    p = 0.75
    ch = dephasing(p)
    step = 1e-6
    sz = np.diag([1.0, -1.0])

    def choi_at(theta):
        u = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
        return choi_from_krauses([u @ k for k in ch.krauses()]).matrix

    fd = (choi_at(step) - choi_at(-step)) / (2 * step)
    fd_dev = float(np.max(np.abs(fd - ch.dchoi())))
    # iss below mop on seeded random channels
    from tests.test_iss import random_qubit_channel

    below = True
    for seed in range(20):
        rch = random_qubit_channel(seed)
        below &= iss_channel_qfi(rch, 2, IssOptions(seed=seed)).qfi \
            <= mop_channel_qfi(rch) + 1e-6
    # comb residuals
    res = iss_adaptive_qfi(dephasing(0.75), 2, 2, IssOptions(seed=0))
    comb = res.artifacts["comb"].matrix
    dims = [s.dim for s in res.artifacts["comb"].spaces]
    t = comb.reshape(dims[0], dims[1], dims[2] * dims[3],
                     dims[0], dims[1], dims[2] * dims[3])
    traced = np.einsum("abicdi->abcd", t).reshape(dims[0] * dims[1],
                                                  dims[0] * dims[1])
    c1 = np.einsum("aibi->ab", traced.reshape(dims[0], dims[1],
                                              dims[0], dims[1])) / dims[1]
    comb_res = max(
        float(np.max(np.abs(traced - np.kron(c1, np.eye(dims[1]))))),
        abs(float(np.real(np.trace(c1))) - 1.0),
        max(0.0, -float(np.min(np.linalg.eigvalsh(comb)))),
    )
    wall = time.perf_counter() - t0
    ok = rt_dev < 1e-10 and fd_dev < 1e-7 and below and comb_res < 1e-7
    report(
        "property suites",
        ok,
        f"round-trip {rt_dev:.1e} < 1e-10, dChoi FD {fd_dev:.1e} < 1e-7, "
        f"iss<=mop on 20 random channels ({below}), comb residual "
        f"{comb_res:.1e} < 1e-7, {wall:.0f}s",
    )
