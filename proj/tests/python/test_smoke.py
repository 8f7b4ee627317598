import math

import numpy as np
import pytest

import mrdg


def test_problem_registry():
    names = mrdg.problem_names()
    assert "accuracy1d" in names and "blowup2d_b" in names
    with pytest.raises(ValueError):
        mrdg.default_config("no_such_problem")


def test_sets_and_projection():
    full = mrdg.build_set("full", 3, 2, 1)
    assert len(full) == 8 and full.dof == 24
    sparse = mrdg.build_set("sparse", 4, 1, 2)
    assert sparse.dof < mrdg.build_set("full", 4, 1, 2).dof
    state = mrdg.project(lambda x, y: x * x + 1j * x, full)
    xs = np.linspace(0.05, 0.95, 7)
    assert np.allclose(state.evaluate(0, xs), xs**2 + 1j * xs, atol=1e-12)


def test_conservative_laplacian_is_hermitian():
    scipy = pytest.importorskip("scipy")
    s = mrdg.build_set("sparse", 4, 2, 1)
    A = mrdg.laplacian(s).toarray()
    assert A.shape == (s.dof, s.dof)
    assert np.abs(A - A.conj().T).max() < 1e-9 * np.abs(A).max()


def test_run_accuracy1d():
    cfg = mrdg.default_config("accuracy1d")
    cfg.grid = mrdg.GridMode.full
    cfg.N, cfg.k, cfg.t_final = 4, 2, 0.01
    rep = mrdg.run(cfg)
    assert rep.status == mrdg.RunStatus.completed
    assert rep.time == pytest.approx(0.01)
    assert rep.history.shape == (rep.steps + 1, 4)
    re, im = rep.errors[0]
    assert 0 < re < 1e-2 and 0 < im < 1e-2
    u = rep.state.evaluate(0, np.array([0.3]))[0]
    assert abs(u - mrdg.exact("accuracy1d", 0.3, 0.0, rep.time)[0]) < 1e-2


def test_adaptive_run_and_outputs(tmp_path):
    cfg = mrdg.default_config("soliton1")
    cfg.t_final, cfg.N = 0.02, 6
    cfg.snapshots = [0.0]
    rep = mrdg.run(cfg)
    assert rep.status == mrdg.RunStatus.completed
    assert rep.state.set.dof < 64 * (cfg.k + 1)
    mrdg.emit_outputs(rep, cfg, str(tmp_path))
    assert (tmp_path / "history.csv").exists()
    assert any(p.name.startswith("solution_t") for p in tmp_path.iterdir())


def test_orders():
    o = mrdg.orders([1.0, 0.125, 1.0 / 64])
    assert o[0] is None and math.isclose(o[1], 3.0) and math.isclose(o[2], 3.0)
