import json

import numpy as np
import pytest

from zkblowup.grid import Field2D, make_grid
from zkblowup.linops import OperatorSpec
from zkblowup.spectra import (EigenSolveError, IndeterminateSpectrum, count_negative,
                              eigs_smallest, export_eigpair, parity_classify)


@pytest.fixture(scope="module")
def l_count(gs_small):
    return count_negative(OperatorSpec("linearized_L", gs_small.q))


def test_helmholtz_lowest_modes():
    g = make_grid(32, 32, np.pi, np.pi)
    pairs = eigs_smallest(OperatorSpec("helmholtz", scheme="spectral"), k=3, grid=g)
    # constant mode at 1, then the four-fold cos/sin level at 2
    assert pairs[0].value == pytest.approx(1.0, abs=1e-10)
    assert pairs[1].value == pytest.approx(2.0, abs=1e-10)
    assert pairs[2].value == pytest.approx(2.0, abs=1e-10)
    assert all(p.residual < 1e-8 for p in pairs)
    assert pairs[0].parity_y == "even"


def test_helmholtz_parity_split():
    # long y period: after the constant the lowest level is cos(y/2), sin(y/2)
    g = make_grid(8, 32, 0.5, 2 * np.pi)
    pairs = eigs_smallest(OperatorSpec("helmholtz", scheme="spectral"), k=3, grid=g)
    assert [p.value for p in pairs] == pytest.approx([1.0, 1.25, 1.25], abs=1e-10)
    assert sorted(p.parity_y for p in pairs[1:]) == ["even", "odd"]


def test_L_one_negative_two_kernel(l_count):
    assert l_count.count == 1
    assert l_count.kernel == 2
    assert l_count.eigenvalues[0] == pytest.approx(-5.4122, abs=2e-3)
    assert l_count.gap_certificate > 0.9
    assert l_count.pairs[0].parity_y == "even"
    assert sorted(p.parity_y for p in l_count.pairs[1:3]) == ["even", "odd"]


def test_eigenvectors_normalized(l_count):
    g = l_count.pairs[0].vector.grid
    for p in l_count.pairs:
        assert np.sum(p.vector.values**2) * g.cell == pytest.approx(1.0, rel=1e-12)
        assert p.vector.values.flat[np.argmax(np.abs(p.vector.values))] > 0


def test_deterministic_start(gs_small):
    op = OperatorSpec("linearized_L", gs_small.q)
    a = eigs_smallest(op, k=1)
    b = eigs_smallest(op, k=1)
    assert a[0].value == b[0].value
    assert a[0].vector.values.tobytes() == b[0].vector.values.tobytes()


def test_parity_classify():
    g = make_grid(16, 16, 3.0, np.pi)
    assert parity_classify(Field2D.from_function(g, lambda x, y: np.cos(y) + x)) == "even"
    assert parity_classify(Field2D.from_function(g, lambda x, y: np.sin(y) * (1 + x))) == "odd"
    assert parity_classify(Field2D.from_function(g, lambda x, y: np.exp(y))) == "mixed"
    assert parity_classify(Field2D(g, np.zeros(g.shape))) == "even"


def test_export_sidecar(tmp_path):
    g = make_grid(16, 16, np.pi, np.pi)
    p = eigs_smallest(OperatorSpec("helmholtz", scheme="spectral"), k=1, grid=g)[0]
    fpath, jpath = export_eigpair(tmp_path / "mode0", p)
    assert fpath.read_bytes()[:4] == b"ZKF1"
    side = json.loads(jpath.read_text())
    assert side["value"] == pytest.approx(1.0) and side["parity"] == "even"


def test_indeterminate_inside_floor_gap():
    # the lowest helmholtz eigenvalue (1) falls inside a floor gap of 1.5
    g = make_grid(16, 16, np.pi, np.pi)
    with pytest.raises(IndeterminateSpectrum):
        count_negative(OperatorSpec("helmholtz", scheme="spectral"), floor_gap=1.5, grid=g)


def test_bad_k():
    g = make_grid(8, 8, 1.0, 1.0)
    op = OperatorSpec("helmholtz", scheme="spectral")
    with pytest.raises(ValueError):
        eigs_smallest(op, k=0, grid=g)
    with pytest.raises(ValueError):
        eigs_smallest(op, k=63, grid=g)


def test_residual_certificate_enforced(gs_small):
    with pytest.raises(EigenSolveError) as exc:
        eigs_smallest(OperatorSpec("linearized_L", gs_small.q), k=1, tol=1e-30)
    assert len(exc.value.partial) == 1
