import pytest

from pylpmatch import pyLpMatch
from pylpmatch.config import Settings, load_settings, save_settings
from pylpmatch.errors import InvalidArgumentError


def test_defaults_without_env_file(tmp_path):
    assert load_settings(str(tmp_path / ".env")) == Settings()


def test_env_file_is_loaded(tmp_path):
    env = tmp_path / ".env"
    env.write_text("PYLPMATCH_THREADS=3\nPYLPMATCH_FORMAT=CSV\nPYLPMATCH_BLOCK_LEN=512\n")
    settings = load_settings(str(env))
    assert settings.workers == 3
    assert settings.output_format == "csv"
    assert settings.block_len == 512
    assert settings.seed == 0


def test_process_environment_beats_env_file(tmp_path, monkeypatch):
    env = tmp_path / ".env"
    env.write_text("PYLPMATCH_THREADS=3\n")
    monkeypatch.setenv("PYLPMATCH_THREADS", "5")
    assert load_settings(str(env)).workers == 5


def test_explicit_overrides_win(tmp_path, monkeypatch):
    monkeypatch.setenv("PYLPMATCH_SEED", "11")
    settings = load_settings(str(tmp_path / ".env"), seed=4, workers=None)
    assert settings.seed == 4
    assert settings.workers == 1


@pytest.mark.parametrize(
    "name, value",
    [
        ("PYLPMATCH_THREADS", "many"),
        ("PYLPMATCH_THREADS", "0"),
        ("PYLPMATCH_BLOCK_LEN", "1"),
        ("PYLPMATCH_FORMAT", "xml"),
    ],
)
def test_invalid_values(tmp_path, monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(InvalidArgumentError):
        load_settings(str(tmp_path / ".env"))


def test_save_then_load(tmp_path):
    env = str(tmp_path / "saved.env")
    save_settings(Settings(workers=2, block_len=256, seed=9, output_format="csv"), env)
    assert load_settings(env) == Settings(workers=2, block_len=256, seed=9, output_format="csv")


def test_facade_saves_config(tmp_path):
    env = tmp_path / ".env"
    client = pyLpMatch(workers=2, seed=5, env_path=str(env), save_config=True)
    assert client.workers == 2
    contents = env.read_text()
    assert "PYLPMATCH_THREADS='2'" in contents or "PYLPMATCH_THREADS=2" in contents
    assert "PYLPMATCH_SEED" in contents
