import numpy as np
import pytest

from diractree.signals import (
    GridMismatchError,
    Signal,
    add_scale,
    convolve,
    extract_atoms,
    first_atom,
    shift,
    solve_volterra_second_kind,
    volterra_apply,
)

DT = 1.0 / 128


def rand_signal(rng, dt=DT, nt=256, n_atoms=3, smooth=True):
    t = np.arange(nt + 1) * dt
    reg = np.sin(2 * np.pi * rng.uniform(0.3, 1.5) * t) * rng.normal()
    reg = reg + 1j * np.cos(2 * np.pi * rng.uniform(0.3, 1.5) * t) * rng.normal()
    atoms = tuple(
        (int(i), complex(rng.normal(), rng.normal()))
        for i in rng.choice(nt, size=n_atoms, replace=False)
    )
    return Signal(dt, atoms, reg)


def dense_eval(sig):
    """Oracle: dense samples with atoms as unit-cell spikes."""
    return sig.sample_dense()


# -- convolution -------------------------------------------------------------


def test_delta_times_delta():
    a = Signal.delta(DT, 256, time_idx=64, amp=1.0)  # delta(t - 0.5)
    b = Signal.delta(DT, 256, time_idx=32, amp=1.0)  # delta(t - 0.25)
    c = convolve(a, b)
    assert c.atoms == ((96, (1 + 0j)),)
    assert np.all(c.regular == 0)


def test_delta_is_identity():
    rng = np.random.default_rng(0)
    f = rand_signal(rng)
    d = Signal.delta(DT, f.nt)
    g = convolve(d, f)
    assert g.atoms == f.atoms
    np.testing.assert_allclose(g.regular, f.regular, atol=1e-14)


def test_indicator_convolution_triangle():
    # samples are read as piecewise-linear interpolants; the oracle is a
    # dense Riemann sum of those interpolants on an 8x finer grid
    dt = 1.0 / 128
    nt = 256
    samples = (np.arange(nt + 1) * dt <= 1.0).astype(complex)
    tri = convolve(Signal.from_samples(dt, samples), Signal.from_samples(dt, samples))

    refine = 8
    fine = np.interp(np.arange(nt * refine + 1) / refine, np.arange(nt + 1), samples.real)
    want = np.zeros(nt + 1)
    h = dt / refine
    for n in range(1, nt + 1):
        m = n * refine
        want[n] = np.sum(0.5 * (fine[:m] + fine[1 : m + 1]) * 0.5 * (fine[:m][::-1] + fine[1 : m + 1][::-1])) * h
    assert abs(tri.regular[128] - 1.0) <= 1e-3  # hat peaks at 1 at t = 1
    assert np.max(np.abs(tri.regular - want)) <= 1e-3


def test_convolution_against_riemann_oracle():
    rng = np.random.default_rng(1)
    dt = 1.0 / 128
    nt = 128
    a = Signal.from_samples(dt, rng.normal(size=nt + 1) + 1j * rng.normal(size=nt + 1))
    b = Signal.from_samples(dt, rng.normal(size=nt + 1) + 1j * rng.normal(size=nt + 1))
    got = convolve(a, b).regular
    # trapezoid quadrature oracle, computed pointwise
    want = np.zeros(nt + 1, dtype=complex)
    for n in range(nt + 1):
        vals = a.regular[: n + 1] * b.regular[: n + 1][::-1]
        want[n] = np.trapezoid(vals, dx=dt) if n > 0 else 0.0
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_convolution_commutative_bilinear():
    rng = np.random.default_rng(2)
    a, b, c = (rand_signal(rng) for _ in range(3))
    ab = convolve(a, b)
    ba = convolve(b, a)
    assert ab.atom_dict().keys() == ba.atom_dict().keys()
    for k, v in ab.atom_dict().items():
        assert abs(v - ba.atom_dict()[k]) < 1e-10
    np.testing.assert_allclose(ab.regular, ba.regular, atol=1e-10)

    lin = convolve(add_scale([(2.0, a), (-1.5j, b)]), c)
    ref = add_scale([(2.0, convolve(a, c)), (-1.5j, convolve(b, c))])
    assert lin.atom_dict().keys() == ref.atom_dict().keys()
    np.testing.assert_allclose(lin.regular, ref.regular, atol=1e-10)


def test_grid_mismatch_raises():
    a = Signal.zero(DT, 16)
    b = Signal.zero(DT / 2, 16)
    with pytest.raises(GridMismatchError):
        convolve(a, b)


# -- add / shift -------------------------------------------------------------


def test_add_cancellation():
    rng = np.random.default_rng(3)
    f = rand_signal(rng)
    z = add_scale([(1.0, f), (-1.0, f)])
    assert z.atoms == ()
    assert np.max(np.abs(z.regular)) == 0.0


def test_shift_delta():
    a = Signal.delta(DT, 256, time_idx=10, amp=2.0)
    s = shift(a, 15)
    assert s.atoms == ((25, (2 + 0j)),)


def test_shift_add_matches_dense_oracle():
    rng = np.random.default_rng(4)
    a = rand_signal(rng, n_atoms=4)
    b = rand_signal(rng, n_atoms=4)
    combo = add_scale([(1.5, shift(a, 7)), (-0.5j, shift(b, 3))])
    want = np.zeros(a.nt + 1, dtype=complex)
    want[7:] += 1.5 * dense_eval(a)[: a.nt + 1 - 7]
    want[3:] += -0.5j * dense_eval(b)[: b.nt + 1 - 3]
    np.testing.assert_allclose(dense_eval(combo), want, atol=1e-10)


def test_shift_rejects_negative():
    with pytest.raises(GridMismatchError):
        shift(Signal.zero(DT, 16), -1)


# -- first_atom / extract_atoms ----------------------------------------------


def test_first_atom_basic():
    f = Signal(DT, ((0, 1.0), (256, 0.5)), np.zeros(257))
    assert first_atom(f) == (0.0, 1.0)
    assert first_atom(Signal.zero(DT, 16)) is None


def test_extract_atoms_passthrough():
    rng = np.random.default_rng(5)
    f = rand_signal(rng)
    assert extract_atoms(f, DT) is f


def test_extract_atoms_round_trip():
    dt = 1.0 / 512
    nt = 1024
    t = np.arange(nt + 1) * dt
    dense = np.sin(t).astype(complex)
    dense[512] += 1.0 / dt  # delta(t - 1), unit mass over one cell
    sig = extract_atoms(dense, dt)
    assert len(sig.atoms) == 1
    idx, amp = sig.atoms[0]
    assert idx == 512
    assert abs(amp - 1.0) <= 1e-8


def test_extract_atoms_pure_smooth():
    dt = 1.0 / 128
    t = np.arange(257) * dt
    sig = extract_atoms(np.cos(t).astype(complex), dt)
    assert sig.atoms == ()


def test_extract_atoms_bad_threshold():
    with pytest.raises(ValueError):
        extract_atoms(np.zeros(5), DT, threshold=0.0)


# -- Volterra solver ----------------------------------------------------------


def test_volterra_pure_division():
    nt = 256
    k = Signal.zero(DT, nt)
    G = Signal.delta(DT, nt, time_idx=128, amp=1.0)
    g = solve_volterra_second_kind(3.0j, k, G)
    assert len(g.atoms) == 1
    idx, amp = g.atoms[0]
    assert idx == 128
    assert abs(amp - (-1j / 3.0)) < 1e-15
    assert np.max(np.abs(g.regular)) == 0.0


def test_volterra_exponential():
    # g + int_0^t g = 1  =>  g(t) = exp(-t)
    dt = 1.0 / 256
    nt = 512
    k = Signal.from_samples(dt, np.ones(nt + 1, dtype=complex))
    G = Signal.from_samples(dt, np.ones(nt + 1, dtype=complex))
    g = solve_volterra_second_kind(1.0, k, G)
    t = np.arange(nt + 1) * dt
    assert np.max(np.abs(g.regular - np.exp(-t))) < 5 * dt**2


def dense_volterra_oracle(c, k, G_dense, dt):
    """Independent oracle: assemble the lower-triangular system and solve."""
    n = len(G_dense)
    A = np.zeros((n, n), dtype=complex)
    for i in range(n):
        A[i, i] += c
        if i > 0:
            A[i, 0] += dt * 0.5 * k[i]
            A[i, i] += dt * 0.5 * k[0]
            for m in range(1, i):
                A[i, i - m] += dt * k[m]
    return np.linalg.solve(A, G_dense)


def test_volterra_matches_dense_lu_solve():
    rng = np.random.default_rng(6)
    dt = 1.0 / 64
    nt = 200
    t = np.arange(nt + 1) * dt
    k = Signal.from_samples(dt, np.exp(-t) * (0.4 + 0.2j))
    G = Signal(
        dt,
        ((0, 1.0), (40, -0.5 + 0.25j), (90, 2.0j)),
        np.cos(t) * 0.3 + 0.1j * t,
    )
    g = solve_volterra_second_kind(2.0 - 1.0j, k, G)
    # atoms: amplitude divided by c, times kept
    assert [i for i, _ in g.atoms] == [0, 40, 90]
    for (i, amp), (_, b) in zip(g.atoms, G.atoms):
        assert abs(amp - b / (2.0 - 1.0j)) < 1e-14
    # regular part vs dense solve of the full discretized system
    tails = np.zeros(nt + 1, dtype=complex)
    for i, b in G.atoms:
        tails[i:] += (b / (2.0 - 1.0j)) * k.regular[: nt + 1 - i]
    oracle = dense_volterra_oracle(2.0 - 1.0j, k.regular, G.regular - tails, dt)
    assert np.max(np.abs(g.regular - oracle)) < 1e-9


def test_volterra_residual_property():
    rng = np.random.default_rng(7)
    dt = 1.0 / 64
    nt = 300
    k = Signal.from_samples(dt, rng.normal(size=nt + 1) * 0.3 + 0.2j * rng.normal(size=nt + 1))
    G = Signal(dt, ((5, 1.2), (77, -0.3j)), rng.normal(size=nt + 1) + 0j)
    g = solve_volterra_second_kind(1.5j, k, G)
    back = volterra_apply(1.5j, k, g)
    scale = max(1.0, float(np.max(np.abs(G.regular))))
    np.testing.assert_allclose(back.regular, G.regular, atol=1e-9 * scale)
    assert back.atom_dict().keys() == G.atom_dict().keys()
    for i, amp in back.atoms:
        assert abs(amp - G.atom_dict()[i]) < 1e-12


def test_volterra_callback_with_delay():
    # g(t) + 0.5 g(t - 1) = G(t): pure delay recursion, no kernel
    dt = 1.0 / 32
    nt = 128
    d = 32  # delay index for t = 1
    k = Signal.zero(dt, nt)
    t = np.arange(nt + 1) * dt
    target = np.sin(t).astype(complex)

    def rhs(n0, n1, g_reg, g_atoms):
        out = target[n0:n1].copy()
        for n in range(n0, n1):
            if n - d >= 0:
                out[n - n0] -= 0.5 * g_reg[n - d]
        return [], out

    g = solve_volterra_second_kind(1.0, k, rhs, nt=nt, delay_idx=d)
    # check the defining relation directly
    res = g.regular.copy()
    res[d:] += 0.5 * g.regular[:-d]
    np.testing.assert_allclose(res, target, atol=1e-12)


def test_volterra_rejects_zero_coefficient():
    with pytest.raises(ValueError):
        solve_volterra_second_kind(0.0, Signal.zero(DT, 8), Signal.zero(DT, 8))
