import pytest

ENV_NAMES = (
    "PYLPMATCH_THREADS",
    "PYLPMATCH_BLOCK_LEN",
    "PYLPMATCH_SEED",
    "PYLPMATCH_FORMAT",
)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    # set then delete so that values loaded from .env files are undone too
    for name in ENV_NAMES:
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)


@pytest.fixture
def instance_files(tmp_path):
    def write(text, pattern, U):
        text_path, pattern_path = tmp_path / "text.txt", tmp_path / "pattern.txt"
        text_path.write_text(f"{len(text)} {U}\n{' '.join(map(str, text))}\n", encoding="utf-8")
        pattern_path.write_text(
            f"{len(pattern)} {U}\n{' '.join(map(str, pattern))}\n", encoding="utf-8"
        )
        return str(text_path), str(pattern_path)

    return write
