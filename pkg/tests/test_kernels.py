import numpy as np
import pytest
from hypothesis import given, settings

from conftest import SEMANTICS, qbafs
from qbafx import _kernels_py, kernels

pytestmark = pytest.mark.skipif("cython" not in kernels.available_backends(), reason="compiled kernels not built")


def _csr(q):
    idx = q.index
    return idx.in_ptr, idx.in_src, idx.in_sign


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    assert set(kernels.available_backends()) >= {"python"}


@pytest.mark.parametrize("sem", SEMANTICS)
@given(q=qbafs(max_n=9))
@settings(max_examples=80, deadline=None)
def test_backends_agree(sem, q):
    code = {"dfquad": 0, "qe": 1, "reb": 2}[sem]
    cy = kernels.available_backends()["cython"]
    tau = q.tau_array()
    rng = np.random.default_rng(len(q.arguments))
    active = (rng.random(len(tau)) < 0.8).astype(np.uint8)
    for backend in (cy, _kernels_py):
        assert backend.aggregate(code, [0.2, 0.5], [0.4]) == pytest.approx(cy.aggregate(code, [0.2, 0.5], [0.4]))
    outs = []
    for backend in (cy, _kernels_py):
        out = np.empty(len(tau))
        if q.index.topo is not None:
            backend.propagate_acyclic(code, tau, q.index.topo, *_csr(q), active, out)
            res = None
        else:
            res = backend.propagate_fixed_point(code, tau, *_csr(q), active, 1e-9, 500, out)
        outs.append((out, res))
    (a, ra), (b, rb) = outs
    assert ra == rb or (ra[0] == rb[0] and ra[1] == pytest.approx(rb[1], abs=1e-15))
    np.testing.assert_allclose(a, b, atol=1e-14, rtol=0)
    ra = cy.residual(code, tau, *_csr(q), active, a)
    rb = _kernels_py.residual(code, tau, *_csr(q), active, a)
    assert ra == pytest.approx(rb, abs=1e-14)
