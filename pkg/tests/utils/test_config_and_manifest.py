"""設定とマニフェストのユニットテスト"""

import json

import pytest

from query_misspelling_detector.utils.config import Config
from query_misspelling_detector.utils.errors import ConfigurationError, HashMismatchError, InputFileNotFoundError
from query_misspelling_detector.utils.manifest import (
    RunManifest,
    hash_paths,
    manifest_path_for,
    verify_inputs,
    write_manifest,
)


class TestConfig:
    """設定の読み込みと検証"""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("QMD_SEED", raising=False)
        config = Config()
        assert config.seed == 42
        assert config.shards == 1
        assert config.miner["theta"] == 0.5
        assert config.training_preset("finetune") == {"max_epochs": 4, "batch_size": 32, "lr": 3e-5}

    def test_precedence_env_file_overrides(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QMD_SEED", "1")
        monkeypatch.setenv("QMD_SHARDS", "3")
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seed": 2, "miner": {"theta": 0.7}}), encoding="utf-8")
        config = Config(str(path), {"seed": 5})
        assert config.seed == 5
        assert config.shards == 3
        assert config.miner["theta"] == 0.7
        assert config.miner["max_rel_dist"] == 0.4

    def test_invalid_env_value(self, monkeypatch):
        monkeypatch.setenv("QMD_SEED", "abc")
        with pytest.raises(ConfigurationError):
            Config()

    @pytest.mark.parametrize("content", ["{not json", "[1, 2]"])
    def test_malformed_file(self, tmp_path, content):
        path = tmp_path / "c.json"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(ConfigurationError):
            Config(str(path))

    @pytest.mark.parametrize("overrides", [
        {"seed": -1},
        {"shards": 0},
        {"miner": {"theta": 1.5}},
        {"encoder": {"slim_layers": 3}},
        {"head": {"pooling": "max"}},
        {"training": {"presets": {"lstm": {"lr": 0}}}},
    ])
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigurationError):
            Config(None, overrides)

    def test_unknown_training_preset(self):
        with pytest.raises(ConfigurationError) as exc_info:
            Config().training_preset("huge")
        assert "lstm" in exc_info.value.details["available"]

    def test_preset_is_a_copy(self):
        config = Config()
        config.training_preset("lstm")["lr"] = 99.0
        assert config.training_preset("lstm")["lr"] == 1e-3


class TestManifest:
    """マニフェストの書き出しと照合"""

    def make_manifest(self, outputs):
        return RunManifest(command_line=["qmd", "mine"], config={}, seeds={"seed": 1}, outputs=hash_paths(outputs))

    def test_paths_for_file_and_directory(self, tmp_path):
        assert manifest_path_for(str(tmp_path)) == tmp_path / "manifest.json"
        assert manifest_path_for(str(tmp_path / "m.tsv")) == tmp_path / "m.tsv.manifest.json"

    def test_directory_hashes_skip_manifest(self, tmp_path):
        (tmp_path / "a.tsv").write_text("a\n", encoding="utf-8")
        (tmp_path / "manifest.json").write_text("{}", encoding="utf-8")
        assert list(hash_paths([str(tmp_path)])) == [str(tmp_path / "a.tsv")]

    def test_verify_unchanged_and_changed(self, tmp_path):
        data = tmp_path / "m.tsv"
        data.write_text("q\tq\tFalse\n", encoding="utf-8")
        manifest_file = write_manifest(self.make_manifest([str(data)]), str(data))
        verify_inputs(str(manifest_file), [str(data)])

        data.write_text("q\tq\tTrue\n", encoding="utf-8")
        with pytest.raises(HashMismatchError) as exc_info:
            verify_inputs(str(manifest_file), [str(data)])
        assert exc_info.value.details["file_path"] == str(data)

    def test_verify_matches_by_file_name(self, tmp_path):
        original = tmp_path / "a" / "m.tsv"
        original.parent.mkdir()
        original.write_text("x\n", encoding="utf-8")
        manifest_file = write_manifest(self.make_manifest([str(original)]), str(original))
        moved = tmp_path / "m.tsv"
        moved.write_text("y\n", encoding="utf-8")
        with pytest.raises(HashMismatchError):
            verify_inputs(str(manifest_file), [str(moved)])

    def test_unrecorded_inputs_are_ignored(self, tmp_path):
        data = tmp_path / "m.tsv"
        data.write_text("x\n", encoding="utf-8")
        manifest_file = write_manifest(self.make_manifest([str(data)]), str(data))
        other = tmp_path / "other.tsv"
        other.write_text("y\n", encoding="utf-8")
        verify_inputs(str(manifest_file), [str(other)])

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(InputFileNotFoundError):
            verify_inputs(str(tmp_path / "none.json"), [])
