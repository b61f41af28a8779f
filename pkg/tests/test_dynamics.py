import numpy as np
import pytest

import oracle
from rydchain.basis import S, enumerate_sector, pack, saturation_fraction
from rydchain.couplings import CouplingConstants, natural_time_unit, unit_constants
from rydchain.dynamics import (QuenchSpec, bipartition, default_time_grid, entanglement_entropy,
                               entanglement_entropy_series, evolve_state, fidelity_series,
                               initial_index, norm_series, quench_series, s_fraction_series)
from rydchain.errors import DomainError, MembershipError
from rydchain.geometry import sample_geometry
from rydchain.hamiltonian import assemble
from rydchain.spectral import diagonalize


def _system(n=6, order=2, d=40.0, w=0.3, sample=0):
    basis = enumerate_sector(n, order)
    c = CouplingConstants()
    es = diagonalize(assemble(basis, sample_geometry(n, d, w, 17, sample), c))
    return basis, es, natural_time_unit(order, d, c)


def test_default_grid():
    t = default_time_grid()
    assert t[0] == 0.0 and len(t) == 401
    assert t[1] == pytest.approx(1e-2) and t[-1] == pytest.approx(1e2)


def test_two_level_fidelity():
    c = np.array([1.0, 1.0]) / np.sqrt(2)
    om = 0.7
    t = np.linspace(0, 10, 50)
    np.testing.assert_allclose(fidelity_series(c, [-om, om], t), np.cos(om * t) ** 2, atol=1e-14)


def test_initial_conditions():
    basis, es, tu = _system()
    c = es.eigenvectors[0]
    t = np.array([0.0, 0.5])
    assert fidelity_series(c, es.eigenvalues, t, tu)[0] == pytest.approx(1.0, abs=1e-12)
    assert s_fraction_series(es, c, basis, t, tu)[0] == pytest.approx(0.0, abs=1e-12)
    psi0 = evolve_state(es, c, 0.0, tu)
    np.testing.assert_allclose(np.abs(psi0), np.eye(1, basis.dim, 0).ravel(), atol=1e-12)
    raw, _ = entanglement_entropy_series(es, c, basis, 3, t, tu)
    assert raw[0] == pytest.approx(0.0, abs=1e-10)


def test_eigenstate_initial_state_is_stationary():
    _, es, tu = _system(n=5)
    c = np.zeros(es.dim)
    c[3] = 1.0
    F = fidelity_series(c, es.eigenvalues, default_time_grid(), tu)
    np.testing.assert_allclose(F, 1.0, atol=1e-12)


def test_norm_conservation():
    basis, es, tu = _system(n=7, order=3, d=9.0)
    t = default_time_grid()
    norms = norm_series(es, es.eigenvectors[0], t, tu)
    assert np.max(np.abs(norms - 1.0)) < 1e-10


@pytest.mark.parametrize("order", [2, 3, 4])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_amplitudes_match_matrix_exponential(n, order):
    x = np.array([0.0, 1.3, 2.1, 3.7])[:n]
    c = unit_constants(mu=1.1, nu=0.9, gamma_c=1.3, delta=0.7)
    basis = enumerate_sector(n, order)
    es = diagonalize(assemble(basis, x, c))
    _, H = oracle.hamiltonian(n, order, x, 1.1, 0.9, 1.3, 0.7)
    for t in (0.0, 0.37, 2.9, 41.0):
        ref = oracle.evolve(H, 0, t)
        got = evolve_state(es, es.eigenvectors[0], t)
        assert np.max(np.abs(got - ref)) < 1e-8


def test_entanglement_two_configuration_state():
    basis = enumerate_sector(2, 2)
    part = bipartition(basis, 1)
    psi = np.zeros(3)
    psi[[1, 2]] = 1 / np.sqrt(2)
    assert entanglement_entropy(psi, part) == pytest.approx(np.log(2))


def test_entanglement_bounds():
    basis, es, tu = _system(n=7, order=2)
    part = bipartition(basis, 4)
    raw, norm = entanglement_entropy_series(es, es.eigenvectors[0], basis, 4,
                                            default_time_grid(), tu)
    assert np.all(raw >= 0)
    assert np.all(raw <= np.log(min(part.n_left, part.n_right)) + 1e-12)
    np.testing.assert_allclose(norm, raw / np.log(part.n_left))


def test_entanglement_symmetric_under_reflection():
    # reflecting the chain maps the left block of one cut onto the right block
    basis = enumerate_sector(6, 3)
    rng = np.random.default_rng(4)
    psi = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    psi /= np.linalg.norm(psi)
    mirror = basis.lookup(pack(basis.states[:, ::-1].copy()))
    a = entanglement_entropy(psi, bipartition(basis, 3))
    b = entanglement_entropy(psi[np.argsort(mirror)], bipartition(basis, 3))
    assert a == pytest.approx(b, rel=1e-10)


def test_invalid_cut_and_pattern():
    basis = enumerate_sector(4, 2)
    with pytest.raises(DomainError):
        bipartition(basis, 0)
    with pytest.raises(DomainError):
        bipartition(basis, 4)
    with pytest.raises(MembershipError, match="n_s' = 1\\*n_s"):
        initial_index(basis, "sspp")
    with pytest.raises(DomainError):
        QuenchSpec("pppp", time_grid=[0.0, 1.0, 0.5])


def test_odd_chain_cut():
    assert QuenchSpec("ppppp").cut_for(5) == 3
    assert QuenchSpec("pppp").cut_for(4) == 2


def test_diagonal_ensemble_consistency():
    basis, es, tu = _system(n=6, order=2, d=40.0, w=0.4, sample=2)
    c = es.eigenvectors[0]
    t = np.random.default_rng(1).uniform(0, 1e4, size=3000)
    s_avg = s_fraction_series(es, c, basis, np.sort(t), tu).mean()
    weight = np.count_nonzero(basis.states == S, axis=1) / basis.n_atoms
    diag = np.sum(c ** 2 * (weight @ es.eigenvectors ** 2))
    assert s_avg == pytest.approx(diag, rel=0.01)


def test_quench_series_columns():
    basis, es, tu = _system(n=5)
    q = QuenchSpec("ppppp", default_time_grid(n_points=50))
    obs = quench_series(es, basis, q, tu, saturation_fraction(5, 2))
    cols = obs.columns()
    assert list(cols) == ["t_natural", "t_us", "fidelity", "s_fraction", "s_over_saturation",
                          "ee_raw", "ee_normalized"]
    assert all(len(v) == 51 for v in cols.values())
    only_f = quench_series(es, basis, q, tu, 0.3, metrics=("fidelity",))
    assert np.all(np.isnan(only_f.ee_raw)) and np.isfinite(only_f.fidelity).all()
