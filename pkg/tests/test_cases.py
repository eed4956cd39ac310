import numpy as np
import pytest

from apdec.basis import FESpace
from apdec.cases import CATALOGUE, case_names, get_case, run_case
from apdec.errors import ConfigError

SIZES = {1: 32, 2: 300}


def test_catalogue_names():
    assert case_names() == ["burgers_sine", "transport_gaussian", "euler_isentropic", "sod_1d",
                            "woodward_colella", "shu_osher", "vortex_2d", "sod_2d", "dmr_2d"]


def test_unknown_case_lists_catalogue():
    with pytest.raises(ConfigError, match="sod_1d"):
        get_case("nope")


@pytest.mark.parametrize("name", list(CATALOGUE))
def test_initial_data_admissible(name):
    case = get_case(name)
    space = FESpace(case.build_mesh(SIZES[case.dim]), 2)
    u0 = case.initial_coefficients(space)
    assert u0.shape == (space.n_dofs, case.model.n_vars)
    assert np.all(np.isfinite(u0))
    case.model.check(u0)


@pytest.mark.parametrize("name", list(CATALOGUE))
def test_every_degree_has_theta(name):
    case = get_case(name)
    for d in (1, 2, 3):
        cfg = case.config(d)
        assert cfg.scheme.degree == d and cfg.lam == case.lam


def test_overrides_reach_config():
    cfg = get_case("sod_1d").config(2, eps=1e-3, cfl=0.05, corrections=5, T=None)
    assert (cfg.eps, cfg.cfl, cfg.n_corrections, cfg.T) == (1e-3, 0.05, 5, 0.16)


@pytest.mark.parametrize("lam", [None, 3.0, 4.5])
def test_lam_override_sets_step(lam):
    space, res = run_case("transport_gaussian", 1, 16, T=0.05, lam=lam)
    dt = 0.1 * space.mesh.h_min / (lam or 1.5)
    assert res.steps == int(np.ceil(0.05 / dt - 1e-9))


def test_exact_references_start_from_initial():
    for name in ("transport_gaussian", "euler_isentropic", "vortex_2d"):
        case = get_case(name)
        pts = FESpace(case.build_mesh(SIZES[case.dim]), 1).points
        np.testing.assert_allclose(case.exact(pts, 0.0), case.initial(pts), atol=1e-12)


def test_dmr_mesh_geometry():
    mesh = get_case("dmr_2d").build_mesh(1000)
    assert 900 < mesh.n_cells < 1100
    assert abs(mesh.measure - (3.2 * 2.2 - 0.5 * 3.0 * 1.7)) < 1e-10
