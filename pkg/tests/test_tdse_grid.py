import math

import numpy as np
import pytest
from scipy import sparse
from scipy.sparse.linalg import spsolve
from scipy.special import erf

from timeslit.tdse import PartialWaveState, RadialGrid, load_checkpoint, save_checkpoint
from timeslit.tdse.grid import gll_rule, graded_edges
from timeslit.tdse.linsolve import CondensedSolver


@pytest.fixture(scope="module")
def small():
    return RadialGrid.default(r_max=60.0, order=9, h_max=3.0)


def test_default_grid_invariants():
    g = RadialGrid.default()
    r = g.points
    assert r[0] > 0 and np.all(np.diff(r) > 0)
    assert g.r_max == 1200.0
    assert np.all(g.weights > 0)
    # test Gaussian away from both ends
    exact = math.sqrt(20 * math.pi) * 0.5 * (erf((1200 - 300) / math.sqrt(20)) + erf(300 / math.sqrt(20)))
    assert g.integrate(np.exp(-((r - 300.0) ** 2) / 20.0)) == pytest.approx(exact, rel=1e-8)
    assert g.integrate(4 * r**2 * np.exp(-2 * r)) == pytest.approx(1.0, abs=1e-10)
    d = g.describe()
    assert d["n_points"] == g.size and d["r_max"] == 1200.0


def test_graded_edges():
    e = graded_edges(100.0, 4.0, h_min=0.4, growth=1.25)
    h = np.diff(e)
    assert e[0] == 0.0 and e[-1] == pytest.approx(100.0)
    assert h[0] == pytest.approx(0.4) and np.max(h) <= 4.0 + 1e-12
    assert np.all(h[1:] / h[:-1] <= 1.25 + 1e-12)
    with pytest.raises(ValueError):
        RadialGrid(np.array([0.0, 2.0, 1.0]), 5)


def test_gll_rule_exactness():
    x, w = gll_rule(9)
    assert x[0] == -1 and x[-1] == 1
    # exact for polynomials up to degree 2n - 3
    for deg in range(0, 16):
        assert np.sum(w * x**deg) == pytest.approx((1 - (-1) ** (deg + 1)) / (deg + 1), abs=1e-13)


def test_hydrogen_levels(small):
    for l in (0, 1, 2):
        vals = np.linalg.eigvalsh(small.hamiltonian(l).toarray())
        n = np.arange(l + 1, 4)
        assert vals[: n.size] == pytest.approx(-0.5 / n**2, abs=1e-9)


def test_hamiltonian_symmetric_and_banded(small):
    h = small.hamiltonian(1)
    assert abs(h - h.T).max() < 1e-14 * abs(h).max()
    ab = small.hamiltonian_banded(1, shift=0.3)
    bw = small.bandwidth
    dense = (h - 0.3 * sparse.identity(small.size)).toarray()
    for off in range(-bw, bw + 1):
        diag = np.diagonal(dense, off)
        row = ab[bw - off]
        got = row[off:] if off >= 0 else row[: small.size + off]
        assert np.allclose(got, diag, atol=1e-14)


@pytest.mark.parametrize("beta", [0.025j, 0.7])
def test_condensed_solver_matches_sparse_solve(small, beta):
    ls = np.arange(4)
    solver = CondensedSolver(small, ls, beta)
    rng = np.random.default_rng(1)
    rhs = np.zeros((ls.size, small.n_padded), dtype=complex)
    rhs[:, 1:-1] = rng.normal(size=(ls.size, small.size)) + 1j * rng.normal(size=(ls.size, small.size))
    out = solver.solve_padded(rhs.copy())
    eye = sparse.identity(small.size, format="csc")
    for l in ls:
        ref = spsolve((eye + beta * small.hamiltonian(l)).tocsc(), rhs[l, 1:-1])
        assert np.max(np.abs(out[l, 1:-1] - ref)) < 1e-11 * np.max(np.abs(ref))
    assert np.all(out[:, 0] == 0) and np.all(out[:, -1] == 0)


def test_state_basics(small):
    rng = np.random.default_rng(3)
    s = PartialWaveState(small, rng.normal(size=(3, small.size)) + 0j, 1.5)
    assert s.m == 0 and s.l_max == 2
    assert s.norm() == pytest.approx(np.sum(s.populations()))
    up = s.with_l_max(5)
    assert up.l_max == 5 and np.all(up.coeffs[3:] == 0) and up.norm() == pytest.approx(s.norm())
    assert s.with_l_max(0).norm() == pytest.approx(s.populations()[0])
    u = s.radial(1)
    assert np.allclose(small.to_coefficients(u), s.coeffs[1])
    with pytest.raises(ValueError):
        PartialWaveState(small, np.zeros((2, small.size + 1)))


def test_checkpoint_round_trip(small, tmp_path):
    rng = np.random.default_rng(4)
    s = PartialWaveState(small, rng.normal(size=(4, small.size)) + 1j * rng.normal(size=(4, small.size)), 12.25)
    path = tmp_path / "s.bin"
    save_checkpoint(s, path)
    back = load_checkpoint(path, small)
    assert back.time == 12.25 and back.l_max == 3
    assert np.array_equal(back.coeffs, s.coeffs)
    other = RadialGrid.default(r_max=60.0, order=9, h_max=2.5)
    with pytest.raises(ValueError, match="different radial grid"):
        load_checkpoint(path, other)
    raw = path.read_bytes()
    (tmp_path / "t.bin").write_bytes(raw[:-16])
    with pytest.raises(ValueError, match="truncated"):
        load_checkpoint(tmp_path / "t.bin", small)
    (tmp_path / "m.bin").write_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(ValueError, match="not a partial-wave checkpoint"):
        load_checkpoint(tmp_path / "m.bin", small)
