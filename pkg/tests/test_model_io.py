"""Model file format: canonical numbers, key order, round-trips, corruption."""

import json

import numpy as np
import pytest

from powlim import EimInterpolant, ModelFormatError, lhs_sample, load_model, save_model
from powlim.model_io import (
    emit_json,
    format_number,
    parse_model_file,
    read_payload_sidecar,
    write_payload_sidecar,
)


@pytest.fixture()
def fitted(thermal6):
    family, _ = thermal6
    sample = lhs_sample(family.box, 250, seed=0)
    return EimInterpolant(m=2, tol=0.0, sample=sample).fit(family)


class TestFormatNumber:
    def test_integers_stay_integers(self):
        assert format_number(3) == "3"
        assert format_number(np.int64(-7)) == "-7"

    def test_floats_get_17_significant_digits(self):
        assert format_number(1.0 / 3.0) == "0.33333333333333331"
        assert format_number(0.1) == "0.10000000000000001"

    def test_zero_is_canonical(self):
        # -0.0 would parse back as the integer 0 and break byte round-trips
        assert format_number(0.0) == "0"
        assert format_number(-0.0) == "0"

    def test_17_digits_round_trip_doubles(self):
        rng = np.random.default_rng(1)
        for v in rng.standard_normal(200) * 10.0 ** rng.integers(-10, 10, 200):
            assert float(format_number(float(v))) == float(v)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            format_number(float("nan"))
        with pytest.raises(ValueError):
            format_number(float("inf"))

    def test_booleans_rejected(self):
        with pytest.raises(TypeError):
            format_number(True)


class TestEmitJson:
    def test_is_valid_json_preserving_key_order(self):
        text = emit_json({"b": 1, "a": [1.5, None, True, "x"]})
        assert json.loads(text) == {"b": 1, "a": [1.5, None, True, "x"]}
        assert text.index('"b"') < text.index('"a"')

    def test_arrays_serialize_like_lists(self):
        assert emit_json(np.array([1.0, 2.0])) == emit_json([1.0, 2.0])

    def test_identical_input_identical_bytes(self):
        data = {"x": np.pi, "y": [1, 2, 3]}
        assert emit_json(data) == emit_json(data)

    def test_unknown_types_rejected(self):
        with pytest.raises(TypeError):
            emit_json({"x": object()})


class TestModelFiles:
    def test_key_order_is_fixed(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(fitted, str(path))
        keys = list(json.loads(path.read_text()).keys())
        assert keys == [
            "version", "d", "m", "r", "forced_k0", "coeffs", "param_box",
            "selected_k", "selected_mu", "F", "B", "residual_history",
            "payload_ref",
        ]

    def test_save_load_save_is_byte_identical(self, fitted, tmp_path):
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        save_model(fitted, str(first))
        save_model(load_model(str(first)), str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_loaded_model_reproduces_weights_and_routes(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(fitted, str(path))
        loaded = load_model(str(path))
        mu = np.array([1.8, 3.1])
        np.testing.assert_allclose(
            loaded.lambda_weights(mu), fitted.lambda_weights(mu), rtol=1e-13, atol=1e-15
        )
        ks = fitted.index_set_.indices
        np.testing.assert_allclose(
            loaded.interpolate(mu, k=ks, route="beta"),
            fitted.interpolate(mu, k=ks, route="beta"),
            rtol=1e-9, atol=1e-12,
        )

    def test_not_json_maps_to_format_error(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("not json {")
        with pytest.raises(ModelFormatError, match="not valid JSON"):
            parse_model_file(str(path))

    def test_missing_keys_rejected(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(fitted, str(path))
        data = json.loads(path.read_text())
        del data["selected_k"]
        path.write_text(json.dumps(data))
        with pytest.raises(ModelFormatError, match="missing keys"):
            parse_model_file(str(path))

    def test_wrong_version_rejected(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(fitted, str(path))
        data = json.loads(path.read_text())
        data["version"] = 99
        path.write_text(json.dumps(data))
        with pytest.raises(ModelFormatError, match="version"):
            parse_model_file(str(path))

    def test_non_object_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ModelFormatError, match="object"):
            parse_model_file(str(path))

    def test_shape_mismatch_rejected(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(fitted, str(path))
        data = json.loads(path.read_text())
        data["F"] = [row[:-1] for row in data["F"]]
        path.write_text(json.dumps(data))
        with pytest.raises(ModelFormatError, match="shapes"):
            load_model(str(path))

    def test_non_finite_entries_rejected(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(fitted, str(path))
        data = json.loads(path.read_text())
        data["selected_mu"][0][0] = float("nan")
        path.write_text(json.dumps(data, allow_nan=True))
        with pytest.raises(ModelFormatError, match="finite"):
            load_model(str(path))

    def test_foreign_multi_index_rejected(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(fitted, str(path))
        data = json.loads(path.read_text())
        data["selected_k"][0] = [99, 99]
        path.write_text(json.dumps(data))
        with pytest.raises(ModelFormatError, match="multi-index"):
            load_model(str(path))

    def test_coefficient_count_must_match_d(self, fitted, tmp_path):
        path = tmp_path / "model.json"
        save_model(fitted, str(path))
        data = json.loads(path.read_text())
        data["coeffs"] = data["coeffs"][:1]
        path.write_text(json.dumps(data))
        with pytest.raises(ModelFormatError, match="coeffs"):
            load_model(str(path))


class TestPayloadSidecar:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "payload.bin"
        stack = np.random.default_rng(3).standard_normal((4, 5, 5))
        write_payload_sidecar(str(path), stack)
        np.testing.assert_array_equal(read_payload_sidecar(str(path), (4, 5, 5)), stack)

    def test_layout_is_row_major_little_endian(self, tmp_path):
        path = tmp_path / "payload.bin"
        stack = np.arange(8.0).reshape(2, 2, 2)
        write_payload_sidecar(str(path), stack)
        raw = np.frombuffer(path.read_bytes(), dtype="<f8")
        np.testing.assert_array_equal(raw, np.arange(8.0))

    def test_size_mismatch_rejected(self, tmp_path):
        path = tmp_path / "payload.bin"
        write_payload_sidecar(str(path), np.zeros((2, 3, 3)))
        with pytest.raises(ModelFormatError, match="size"):
            read_payload_sidecar(str(path), (3, 3, 3))
