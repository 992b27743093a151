"""Smoke test for the pltd Python module. Run with `python python/smoke_test.py`."""

import math

import pltd


def test_model_validates():
    m = pltd.Model("modified-principal")
    res = m.validate()
    assert max(res.values()) < 1e-10, res
    assert pltd.Model("principal").mu is None
    c = pltd.Model.custom(0.3, 1.5)
    assert abs(c.lam - 0.3) < 1e-15


def test_particle_conserves_energy():
    p = pltd.Particle(pltd.Model("modified-principal"))
    tr = p.integrate([0.4, -0.2, 0.3], 1e-3, 0.5)
    assert tr.truncated is None
    assert len(tr.t) == 501
    h0 = tr.hamiltonian[0]
    assert all(abs(h - h0) < 1e-9 for h in tr.hamiltonian)
    det = [u[0][0] * u[1][1] - u[0][1] * u[1][0] for u in tr.u]
    assert all(abs(d - 1) < 1e-10 for d in det)


def test_bad_input_raises():
    try:
        pltd.Model("nonsense")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")


def test_field_duality_and_energy():
    f = pltd.Field(pltd.Model("modified-principal"), n=32, bc="periodic")
    k = f.random_periodic(0.3, 1)
    assert len(k) == f.nodes
    assert f.duality_check(k) < 1e-9
    run = f.run(k, 2.5e-3, 0.2, every=10)
    assert run.truncated is None
    h = run.hamiltonian
    assert abs(h[-1] - h[0]) / abs(h[0]) < 1e-5
    assert max(run.duality_gap) < 1e-9
    assert len(run.i_delta[0]) == 6


def test_limit_sweep_slopes():
    rows, primal, dual = pltd.limit_sweep([10.0, 100.0, 1000.0])
    assert len(rows) == 3
    assert abs(primal + 1) < 0.2 and abs(dual + 1) < 0.2
    assert all(math.isfinite(x) for r in rows for x in r)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print("ok", name)
