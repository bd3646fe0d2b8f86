import math

import numpy as np
import pytest

import myers


def test_sphere_spectrum_and_eigen():
    sphere = myers.Manifold.sphere()
    e = myers.top_eigen(sphere, "0", resolution=32)
    assert e["criterion_holds"]
    assert abs(e["lambda0"] + 1.0) < 1e-3
    vals = myers.spectrum(sphere, "0", resolution=32, k=4)
    assert vals.shape == (4,)
    assert abs(vals[0]) < 1e-8
    # 1/2 Delta on l = 1 harmonics is -1.
    assert np.allclose(vals[1:], -1.0, rtol=1e-2)


def test_rho_and_volume():
    sphere = myers.Manifold.sphere()
    p = sphere.from_ambient(0.0, 0.0, -1.0)
    assert sphere.rho_h("1.0*z", p) == pytest.approx(-1.0, abs=1e-6)
    assert sphere.h_volume("0", 64) == pytest.approx(4 * math.pi, rel=5e-3)
    torus = myers.Manifold.flat_torus(2 * math.pi, 2 * math.pi)
    assert torus.rho_h("0", myers.Point(0, 1.0, 2.0)) == 0.0


def test_ensemble_constant_curvature():
    sphere = myers.Manifold.sphere()
    rec = myers.sample_ensemble(sphere, "0", myers.Point(0, 0.2, 0.1), dt=1e-2, t_max=1.0, n_paths=50)
    assert rec["times"][-1] == pytest.approx(1.0)
    assert rec["fk_weight"]["mean"][-1] == pytest.approx(math.exp(-0.5), rel=1e-10)
    assert np.all(np.abs(rec["w_minus_fk"]["mean"]) < 1e-12)


def test_check_torus_negative_control():
    torus = myers.Manifold.flat_torus(2 * math.pi, 2 * math.pi)
    r = myers.check(torus, "0", t_max=3.0, n_paths=100, resolution=32)
    assert r["criterion_holds"] is False
    assert r["consistency"]["consistent"] is True
    assert r["identity_residuals"]["bakry"]["skipped"] is True
    assert all(p["u1_mc"]["diverged"] for p in r["probes"])


def test_check_config_and_errors():
    cfg = {
        "manifold": {"kind": "sphere"},
        "h": "0.3*z",
        "sde": {"dt": 0.01, "t_max": 2, "n_paths": 100, "seed": 3, "record_stride": 10},
        "spectral": {"resolution": 32},
    }
    a = myers.check_config(cfg)
    b = myers.check_config(cfg, threads=2)
    assert a == b
    assert a["criterion_holds"] is True
    with pytest.raises(myers.ConfigError, match="sde.n_path"):
        myers.check_config({"manifold": {"kind": "sphere"}, "sde": {"n_path": 1}})
    with pytest.raises(myers.MyersError):
        myers.top_eigen(myers.Manifold.sphere(), "cos(u)")
