import numpy as np
import pytest

from sandpile import identity, rectangle, spile
from sandpile.domain import Configuration, punctured


def test_spile_round_trip(tmp_path, ident63):
    path = tmp_path / "identity.spile"
    spile.write_configuration(path, ident63)
    loaded = spile.read_configuration(path)
    assert loaded == Configuration(ident63.domain, ident63.grid)
    loaded2 = spile.read_configuration(path, domain=ident63.domain)
    assert loaded2 == loaded


def test_spile_header_format(tmp_path):
    d = rectangle(3, 2)
    config = Configuration(d, [[0, 1, 2], [3, 2, 1]])
    path = tmp_path / "c.spile"
    spile.write_configuration(path, config)
    lines = path.read_text().splitlines()
    assert lines[0] == "SPILE v1"
    assert lines[1] == "3 2"
    assert lines[2] == "3 2 1"  # top row (j max) first
    assert lines[3] == "0 1 2"


def test_spile_masked_domain(tmp_path):
    d = punctured(5, 5)
    config = Configuration.filled(d, 3)
    path = tmp_path / "masked.spile"
    spile.write_configuration(path, config)
    text = path.read_text()
    assert "-1" in text
    loaded = spile.read_configuration(path)
    assert loaded.domain == d
    assert loaded == config


def test_spile_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.spile"
    path.write_text("SPOON v9\n2 2\n0 0\n0 0\n")
    with pytest.raises(ValueError, match="SPILE"):
        spile.read_configuration(path)


def test_spile_domain_mismatch(tmp_path, ident63):
    path = tmp_path / "identity.spile"
    spile.write_configuration(path, ident63)
    with pytest.raises(ValueError, match="mask"):
        spile.read_configuration(path, domain=rectangle(5, 5))


def test_pgm_binary_and_ascii(tmp_path):
    d = rectangle(3, 2)
    config = Configuration(d, [[0, 1, 2], [3, 2, 1]])
    p5 = tmp_path / "c.pgm"
    spile.write_pgm(p5, config)
    raw = p5.read_bytes()
    assert raw.startswith(b"P5\n3 2\n255\n")
    assert raw.endswith(bytes([3, 2, 1, 0, 1, 2]))
    p2 = tmp_path / "c.ascii.pgm"
    spile.write_pgm(p2, config, binary=False)
    lines = p2.read_text().splitlines()
    assert lines[0] == "P2" and lines[3] == "3 2 1"


def test_pgm_count_limit(tmp_path):
    d = rectangle(2, 1)
    config = Configuration(d, [[300, 0]])
    with pytest.raises(ValueError, match="255"):
        spile.write_pgm(tmp_path / "big.pgm", config)
