import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rateroute import BACKEND, OracleBudget, enumerate_paths, gen_random
from rateroute.kernels import get_backend
from rateroute.oracle import _flatten


def test_backend_name():
    assert BACKEND in ("python", "cython")
    with pytest.raises(ValueError):
        get_backend("fortran")


def _both():
    py = get_backend("python")
    try:
        return py, get_backend("cython")
    except ImportError:
        pytest.skip("compiled kernels not built")


def test_shortest_path_tree_hop_tie_break(backend):
    # zero weights everywhere: the tree must follow the fewest hops
    from rateroute.model import make_network

    net = make_network([("s", "a"), ("a", "b"), ("b", "t"), ("s", "t")])
    indptr, nbr, eid = net.csr
    dist, hops, pred = backend.shortest_path_tree(indptr, nbr, eid, np.zeros(4), 0)
    assert list(dist) == [0, 0, 0, 0]
    assert hops[net.index["t"]] == 1
    assert pred[net.index["t"]] == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12))
def test_shortest_path_backends_agree(seed, n):
    py, cy = _both()
    inst = gen_random(n, 0.4, 1, rng_seed=seed)
    net = inst.network
    indptr, nbr, eid = net.csr
    rng = np.random.default_rng(seed)
    w = rng.choice([0.0, 0.5, 1.0, 2.0], size=net.n_edges)
    for src in range(net.n_nodes):
        a = py.shortest_path_tree(indptr, nbr, eid, w, src)
        b = cy.shortest_path_tree(indptr, nbr, eid, w, src)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(np.asarray(x), np.asarray(y))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_oracle_scan_backends_agree(seed):
    py, cy = _both()
    inst = gen_random(6, 0.5, 3, max_amount=2, rng_seed=seed)
    lists = [enumerate_paths(inst.network, d, OracleBudget()) for d in inst.demands]
    dp, pp, flat = _flatten(lists)
    amounts = inst.amounts.astype(np.int64)
    table, cap = inst.cost.cost_table(int(amounts.sum()))
    # a tight cap forces the overflow branch as well
    for c in (cap, 2):
        a = py.oracle_scan(dp, pp, flat, amounts, table, c, inst.network.n_edges)
        b = cy.oracle_scan(dp, pp, flat, amounts, table, c, inst.network.n_edges)
        assert a[0] == b[0]
        assert list(a[1]) == list(b[1])
        assert a[2] == b[2]


def test_forced_fallback():
    import os
    import subprocess
    import sys

    code = ("import rateroute as r; from rateroute.model import make_network; "
            "net = make_network([('s','a'),('a','t'),('s','b'),('b','t')]); "
            "res = r.solve_exact(net, [r.Demand('s','t')]*2, r.StepCost((1,2),(1,10))); "
            "print(r.BACKEND, res.optimal_cost)")
    env = dict(os.environ, RATEROUTE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "4.0"]
