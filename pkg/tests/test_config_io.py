import json
import math

import numpy as np
import pytest

from kinetic_kuramoto import io
from kinetic_kuramoto.config import (PRESETS, config_from_dict, materialize, parse_config,
                                     preset_document, run_preset)
from kinetic_kuramoto.model import GridSpec, StabilityError, ValidationError, validate_stability
from kinetic_kuramoto.solver import SERIES_FIELDS, DensityField, SeriesRecord

MINIMAL = {"model": {"m": 1, "D": 1, "K": 2},
           "grid": {"target_d_t": 0.02, "T": 1, "d_omega": 0.2, "G_omega": 4},
           "output": {"series": "out.csv"}}


def test_minimal_document_defaults():
    cfg = config_from_dict(MINIMAL)
    assert cfg.model.Omega1 == 0.0
    assert cfg.distribution == {"kind": "point", "at": 0.0}
    assert cfg.initial == {"preset": "paper-default"}
    assert cfg.deterministic and not cfg.unsafe_grid
    assert cfg.langevin.N == 5000
    assert cfg.expand() == [cfg]


def test_roundtrip():
    doc = dict(MINIMAL, sweep={"param": "K", "values": [1, 2]}, label="k",
               langevin={"N": 10, "seed": 4, "dt": 0.01})
    cfg = config_from_dict(doc)
    assert parse_config(cfg.dumps()) == cfg
    for name in PRESETS:
        c = config_from_dict(preset_document(name))
        assert parse_config(c.dumps()) == c


def test_negative_coupling_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["model"]["K"] = -1
    with pytest.raises(ValidationError, match="coupling must be nonnegative"):
        config_from_dict(doc)


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("grid"),
    lambda d: d["grid"].pop("T"),
    lambda d: d["grid"].update(d_omega=-0.2),
    lambda d: d["grid"].update(target_d_t="fast"),
    lambda d: d.update(initial={"preset": "wavy"}),
    lambda d: d.update(sweep={"param": "K"}),
    lambda d: d.update(mode={"unsafe_grid": 1}),
])
def test_malformed_documents(mutate):
    doc = json.loads(json.dumps(MINIMAL))
    mutate(doc)
    with pytest.raises(ValidationError):
        config_from_dict(doc)


def test_unknown_keys_strict_and_lenient(caplog):
    doc = dict(MINIMAL, colour="blue")
    with pytest.raises(ValidationError, match="colour"):
        config_from_dict(doc)
    cfg = config_from_dict(doc, lenient=True)
    assert cfg.model.K == 2
    assert "colour" in caplog.text


def test_unstable_grid_rejected_unless_unsafe():
    doc = json.loads(json.dumps(MINIMAL))
    doc["grid"]["target_d_t"] = 0.0317
    with pytest.raises(StabilityError):
        config_from_dict(doc)
    doc["mode"] = {"unsafe_grid": True}
    assert config_from_dict(doc).unsafe_grid


def test_invalid_json():
    with pytest.raises(ValidationError):
        parse_config("{model: 1")


def test_fig4_expansion():
    configs = run_preset("fig4")
    assert [c.model.m for c in configs] == [0.5, 1.0, 2.0]
    for c in configs:
        assert (c.model.D, c.model.K, c.grid.T, c.grid.target_d_t) == (1.0, 6.0, 10.0, 0.0079)


def test_fig1_and_fig78_presets():
    configs = run_preset("fig1")
    assert [c.model.K for c in configs] == [1.0, 2.0, 4.0, 6.0]
    assert all(c.grid.target_d_t == 0.0317 and c.model.m == 1 and c.model.D == 1 for c in configs)
    a, b = run_preset("fig78")
    assert {a.initial["preset"], b.initial["preset"]} == {"paper-default", "paper-half-sine"}
    assert a.model == b.model and a.grid == b.grid and a.distribution == b.distribution


def test_unknown_preset_lists_available():
    with pytest.raises(ValidationError, match="fig1.*fig78"):
        run_preset("fig9")


def test_preset_overrides():
    configs = run_preset("fig1", ["sweep.values=[2]", "grid.d_omega=0.2", "grid.G_omega=4",
                                  "grid.target_d_t=0.02"])
    assert len(configs) == 1
    _, grid, _, _ = materialize(configs[0])
    assert grid.d_omega == 0.2 and grid.G_omega == 4


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_is_stable(name):
    for cfg in run_preset(name):
        params, grid, _, _ = materialize(cfg)
        assert validate_stability(params, grid).overall_ok


# output formats

def test_empty_series_is_header_only(tmp_path):
    path = tmp_path / "s.csv"
    io.write_series(path, [])
    assert path.read_text().strip() == ",".join(SERIES_FIELDS)
    assert io.read_series(path) == []


def test_series_roundtrip(tmp_path):
    recs = [SeriesRecord(n, 0.1 * n, 0.5 + n / 7, -1.0 / 3, 0.25, 1 - 1e-15, 1.0, 0.0, 1e-12, 0.0)
            for n in range(4)]
    path = tmp_path / "s.csv"
    io.write_series(path, recs)
    assert io.read_series(path) == recs


def _field(values, t=0.5):
    grid = GridSpec(d_omega=0.5, d_t=2 * math.pi / (values.shape[1] * 0.5), G_omega=0.5 * (values.shape[0] // 2),
                    T=1.0, n_theta=values.shape[1], d_Omega=0.0 if values.shape[2] == 1 else 0.25,
                    n_Omega=values.shape[2])
    return DensityField(values, grid, t)


def test_snapshot_size_and_roundtrip(tmp_path):
    values = np.random.default_rng(0).random((3, 4, 1))
    path = tmp_path / "f.kkf"
    io.write_snapshot(path, _field(values))
    assert path.stat().st_size == 164
    back = io.read_snapshot(path)
    assert back.values.tobytes() == values.tobytes()
    assert back.t == 0.5
    assert back.grid.shape == (3, 4, 1)


def test_snapshot_roundtrip_several_slices(tmp_path):
    values = np.random.default_rng(1).random((5, 6, 3))
    path = tmp_path / "f.kkf"
    io.write_snapshot(path, _field(values, t=1.25))
    back = io.read_snapshot(path)
    assert back.values.tobytes() == values.tobytes()
    assert back.grid.d_Omega == 0.25


def test_snapshot_rejects_garbage(tmp_path):
    path = tmp_path / "bad.kkf"
    path.write_bytes(b"nope")
    with pytest.raises(ValueError):
        io.read_snapshot(path)
    io.write_snapshot(path, _field(np.zeros((3, 4, 1))))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        io.read_snapshot(path)
