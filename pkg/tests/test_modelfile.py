import json

import numpy as np
import pytest

from irradsim.errors import ModelFileError
from irradsim.modelfile import FORMAT_VERSION, REFERENCE_BANDWIDTH, ModelFile, reference_model
from irradsim.simulate import replicate_rng, simulate_irradiance


def test_reference_defaults(ref_model):
    assert ref_model.grid.J == 64
    assert ref_model.h == REFERENCE_BANDWIDTH
    assert ref_model.trends.trends["C"].y0 == 913.0363
    assert sorted(ref_model.maps) == [1, 2, 3, 4]


def test_save_load_round_trip(ref_model, tmp_path):
    path = tmp_path / "model.json"
    ref_model.save(path)
    back = ModelFile.load(path)
    assert back.to_dict() == ref_model.to_dict()
    a = simulate_irradiance(replicate_rng(3, 77), 77, ref_model)
    b = simulate_irradiance(replicate_rng(3, 77), 77, back)
    assert a.irradiance.tobytes() == b.irradiance.tobytes()


def test_serialisation_is_stable(tmp_path):
    reference_model().save(tmp_path / "a.json")
    reference_model().save(tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_minor_version_accepted_major_rejected(ref_model):
    doc = ref_model.to_dict()
    doc["format_version"] = "1.7"
    ModelFile.from_dict(doc)
    doc["format_version"] = "2.0"
    with pytest.raises(ModelFileError):
        ModelFile.from_dict(doc)
    assert FORMAT_VERSION.startswith("1.")


def test_malformed_documents(ref_model, tmp_path):
    doc = ref_model.to_dict()
    del doc["trends"]["B"]
    with pytest.raises((ModelFileError, Exception)):
        ModelFile.from_dict(doc)
    (tmp_path / "x.json").write_text("{not json")
    with pytest.raises(ModelFileError):
        ModelFile.load(tmp_path / "x.json")


def test_grid_consistency_enforced(ref_model):
    doc = ref_model.to_dict()
    doc["J"] = 63
    doc["maps"] = {k: {"rates": v["rates"][:64], "rstar": v["rstar"][:64]} for k, v in doc["maps"].items()}
    with pytest.raises(ModelFileError):
        ModelFile.from_dict(doc)


def test_document_layout(ref_model):
    doc = json.loads(json.dumps(ref_model.to_dict()))
    assert set(doc) >= {"format_version", "m_c", "seasons", "trends", "mean_B", "J", "h", "h_rstar",
                        "binning", "maps", "provenance"}
    assert set(doc["trends"]["A"]) == {"y0", "y1", "y2", "mu", "nu"}
    assert len(doc["maps"]["1"]["rates"]) == 65
    assert "package_version" in doc["provenance"]


def test_discrete_columns_sum_to_one(ref_model):
    for sm in ref_model.maps.values():
        mass = sm.discrete.mass
        filled = sm.discrete.counts.sum(axis=1) > 0
        np.testing.assert_allclose(mass[filled].sum(axis=1), 1.0, rtol=0, atol=1e-12)
