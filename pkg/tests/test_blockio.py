import numpy as np
import pytest

import flaglp
from flaglp import read_block, write_block, write_csv
from flaglp.blockio import pack_block, unpack_block
from flaglp.errors import FlagLPError

from conftest import random_function


def test_pack_unpack_roundtrip(tiny):
    grid, _ = tiny
    f = random_function(grid, 50)
    again = unpack_block(pack_block(f))
    assert again.grid == grid
    assert np.array_equal(again.values, f.values)


def test_header_layout(tiny):
    grid, _ = tiny
    data = pack_block(random_function(grid, 51))
    assert data[:4] == b"FLGF"
    assert len(data) == 32 + 16 * grid.samples_per_axis ** 2


def test_file_roundtrip(tiny, tmp_path):
    grid, _ = tiny
    f = random_function(grid, 52)
    path = tmp_path / "block.bin"
    write_block(path, f)
    again = read_block(path)
    assert np.array_equal(again.values, f.values)


def test_corrupted_magic_rejected(tiny):
    grid, _ = tiny
    data = bytearray(pack_block(random_function(grid, 53)))
    data[:4] = b"NOPE"
    with pytest.raises(FlagLPError):
        unpack_block(bytes(data))


def test_truncated_payload_rejected(tiny):
    grid, _ = tiny
    data = pack_block(random_function(grid, 54))
    with pytest.raises(FlagLPError):
        unpack_block(data[:-8])


def test_csv_export(tiny, tmp_path):
    grid, _ = tiny
    f = random_function(grid, 55)
    path = tmp_path / "block.csv"
    write_csv(path, f)
    lines = path.read_text().strip().splitlines()
    # header plus one row per lattice point
    assert len(lines) == 1 + grid.samples_per_axis ** 2
