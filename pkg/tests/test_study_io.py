import numpy as np
import pytest
import yaml

from iga_sipg.domains import builtin_domain
from iga_sipg.exceptions import ConfigurationError
from iga_sipg.io import config_from_dict, load_config, load_geometry, save_geometry
from iga_sipg.solver import SolverSettings
from iga_sipg.study import (CSV_HEADER, StudyConfig, degree_sweep, error_ratio, read_csv,
                            run_study)


def small(**kw):
    base = dict(domain="square2", degrees=(2,), levels=(0, 1), timings=False)
    base.update(kw)
    return StudyConfig(**base)


class TestStudy:
    def test_rows_and_rates(self):
        res = run_study(small(levels=(1, 2, 3), degrees=(2, 3)))
        assert [(r.level, r.p) for r in res.rows] == [(l, p) for p in (2, 3) for l in (1, 2, 3)]
        assert not res.failures
        assert res.rows[0].rate is None
        for p in (2, 3):
            e = res.errors(p)
            assert all(a > b for a, b in zip(e, e[1:]))
            # Q_h error of order h^p
            assert res.rates(p)[-1] == pytest.approx(2.0**p, rel=0.15)

    def test_csv_format(self, tmp_path):
        out = tmp_path / "sub" / "r.csv"
        run_study(small(output=str(out)))
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        first = lines[1].split(",")
        assert first[4] == "" and first[5] == "0.000000e+00"
        assert float(first[3]) > 0 and "e" in first[3]
        rows = read_csv(out)
        assert [int(r["level"]) for r in rows] == [0, 1]
        assert float(rows[1]["rate"]) > 1

    def test_single_level_has_no_rate(self, tmp_path):
        out = tmp_path / "r.csv"
        run_study(small(levels=(1,), output=str(out)))
        assert read_csv(out)[0]["rate"] == ""

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_study(small(output=str(a)))
        run_study(small(output=str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_failure_aborts_column(self):
        # the CG budget is far too small, so the column stops at its first cell
        res = run_study(small(degrees=(2, 3), solver=SolverSettings("cg", max_iter=2)))
        assert set(res.failures) == {2, 3}
        assert res.rows == []

    def test_alpha_override(self):
        res = run_study(small(alphas=(1.0, 100.0), solution="alpha-jump", levels=(1, 2)))
        assert res.rates(2)[0] > 3.0

    def test_alpha_count_mismatch(self):
        res = run_study(small(alphas=(1.0, 2.0, 3.0)))
        assert 2 in res.failures

    def test_zero_mean_mode(self):
        res = run_study(small(mode="zero-mean", solution="cosine", levels=(1, 2)))
        assert res.rates(2)[0] == pytest.approx(4.0, rel=0.2)

    def test_degree_sweep(self):
        errs = degree_sweep("square2", 1, [2, 3, 4])
        assert errs[2] > errs[3] > errs[4]
        assert error_ratio(list(errs.values())) == pytest.approx(errs[2] / errs[4])

    @pytest.mark.parametrize("kw", [dict(levels=()), dict(levels=(2, 1)), dict(levels=(-1,)),
                                    dict(degrees=(1,)), dict(alphas=(0.0,)), dict(mode="neumann")])
    def test_invalid_config(self, kw):
        with pytest.raises(ConfigurationError):
            small(**kw)


class TestConfigFiles:
    def test_full(self, tmp_path):
        data = {
            "domain": "lshape3", "degrees": [2, 3], "levels": {"from": 1, "to": 3},
            "alphas": [1, 2, 3], "penalty": {"sigma0": 5.0, "local_h": True},
            "quadrature": {"element_extra": 2, "interface_extra": 1}, "mode": "dirichlet",
            "solution": "poly", "solver": {"method": "cg", "tol": 1e-10},
            "output": "out/x.csv", "timings": False,
        }
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump(data))
        cfg = load_config(path)
        assert cfg.levels == (1, 2, 3) and cfg.degrees == (2, 3)
        assert cfg.alphas == (1.0, 2.0, 3.0)
        assert cfg.params.sigma0 == 5.0 and cfg.params.local_h
        assert cfg.params.element_extra == 2 and cfg.params.interface_extra == 1
        assert cfg.solver.method == "cg" and cfg.solver.tol == 1e-10
        assert cfg.output == str(tmp_path / "out" / "x.csv")

    def test_defaults(self):
        cfg = config_from_dict({})
        assert cfg == StudyConfig()

    def test_scalar_forms(self):
        cfg = config_from_dict({"degrees": 3, "levels": 2, "alphas": 5})
        assert (cfg.degrees, cfg.levels, cfg.alphas) == ((3,), (2,), (5.0,))

    @pytest.mark.parametrize("data", [
        {"domian": "square2"},
        {"penalty": {"sigma_0": 1}},
        {"penalty": 4.0},
        {"levels": {"from": 1}},
        {"solver": {"method": "qr"}},
        {"mode": "periodic"},
    ])
    def test_invalid(self, data):
        with pytest.raises(ConfigurationError):
            config_from_dict(data)

    def test_unreadable(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "missing.yaml")
        bad = tmp_path / "bad.yaml"
        bad.write_text("- a\n- b\n")
        with pytest.raises(ConfigurationError):
            load_config(bad)

    def test_shipped_configs_parse(self):
        from pathlib import Path
        root = Path(__file__).resolve().parents[1] / "configs"
        files = sorted(root.glob("*.yaml"))
        assert len(files) >= 8
        for f in files:
            cfg = load_config(f)
            assert cfg.output is not None


class TestGeometryFiles:
    @pytest.mark.parametrize("name", ["lshape3", "ring4", "footprint12"])
    def test_round_trip(self, tmp_path, name):
        d = builtin_domain(name, 0, 2, 2.0)
        path = tmp_path / "g.yaml"
        save_geometry(d, path)
        e = load_geometry(path, degree=2, level=0)
        assert e.num_patches == d.num_patches
        np.testing.assert_allclose(e.alphas, d.alphas)
        assert [(i.k, i.l, i.edge_k, i.edge_l, i.reversed) for i in e.interfaces] == \
               [(i.k, i.l, i.edge_k, i.edge_l, i.reversed) for i in d.interfaces]
        for p, q in zip(d.patches, e.patches):
            np.testing.assert_array_equal(p.geometry.control_points, q.geometry.control_points)

    def test_discovered_interfaces(self, tmp_path):
        d = builtin_domain("footprint12")
        path = tmp_path / "g.yaml"
        save_geometry(d, path, interfaces=False)
        e = load_geometry(path)
        assert len(e.interfaces) == 17

    def test_shipped_geometry(self):
        from pathlib import Path
        path = Path(__file__).resolve().parents[1] / "configs" / "geometry" / "quad2.yaml"
        d = load_geometry(path, degree=3, level=1)
        assert d.num_patches == 2 and len(d.interfaces) == 1
        assert d.patches[0].space.space_x.degree == 3

    @pytest.mark.parametrize("patch", [
        {"degree": 1, "intervals": 1, "control_points": [[0, 0], [1, 0], [0, 1]]},
        {"degree": [1, 1, 1], "intervals": 1, "control_points": []},
        {"degree": 1, "intervals": 1, "control_points": [[0, 0], [1, 0], [0, 1], [1, 1]], "rho": 1},
    ])
    def test_invalid(self, tmp_path, patch):
        path = tmp_path / "g.yaml"
        path.write_text(yaml.safe_dump({"patches": [patch]}))
        with pytest.raises(ConfigurationError):
            load_geometry(path)

    def test_bad_orientation(self, tmp_path):
        path = tmp_path / "g.yaml"
        d = {"patches": [{"degree": 1, "intervals": 1,
                          "control_points": [[0, 0], [1, 0], [0, 1], [1, 1]]}],
             "interfaces": [{"k": 0, "edge_k": "x=0", "l": 0, "edge_l": "x=1", "orientation": "flip"}]}
        path.write_text(yaml.safe_dump(d))
        with pytest.raises(ConfigurationError):
            load_geometry(path)
