import numpy as np
import pytest

from afp.dsp import StftConfig
from afp.errors import CorruptIndexError
from afp.fingerprint import FingerprintIndex, build_index, load_index, save_index


def random_index(rng: np.random.Generator) -> FingerprintIndex:
    n = int(rng.integers(0, 400))
    entries = np.column_stack(
        [
            rng.integers(0, 2**32, n, dtype=np.uint64).astype(np.uint32),
            rng.integers(0, 50, n, dtype=np.uint64).astype(np.uint32),
            rng.integers(0, 5000, n, dtype=np.uint64).astype(np.uint32),
        ]
    ).astype(np.uint32) if n else np.zeros((0, 3), dtype=np.uint32)
    order = np.lexsort((entries[:, 2], entries[:, 1], entries[:, 0]))
    entries = entries[order]
    n_tracks = int(rng.integers(0, 8))
    table = {
        int(tid): (f"track-{tid}", int(rng.integers(1, 10_000)))
        for tid in rng.choice(1000, size=n_tracks, replace=False)
    }
    profile = "maxfilter" if rng.random() < 0.5 else "envelope"
    return FingerprintIndex(entries, table, StftConfig(), profile)


def assert_index_equal(a: FingerprintIndex, b: FingerprintIndex):
    assert np.array_equal(a.entries, b.entries)
    assert a.track_table == b.track_table
    assert a.stft_config == b.stft_config
    assert a.peak_profile == b.peak_profile


class TestRoundtrip:
    def test_built_index_roundtrip(self, small_tracks, tmp_path):
        index = build_index(small_tracks[:3])
        path = tmp_path / "x.afpi"
        save_index(index, path)
        assert_index_equal(load_index(path), index)

    def test_save_load_save_bit_exact(self, small_tracks, tmp_path):
        index = build_index(small_tracks[:3])
        p1, p2 = tmp_path / "a.afpi", tmp_path / "b.afpi"
        save_index(index, p1)
        save_index(load_index(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    @pytest.mark.parametrize("seed", range(8))
    def test_randomized_roundtrip(self, seed, tmp_path):
        rng = np.random.default_rng(seed)
        index = random_index(rng)
        path = tmp_path / "r.afpi"
        save_index(index, path)
        assert_index_equal(load_index(path), index)


class TestCorruption:
    @pytest.fixture()
    def saved(self, small_tracks, tmp_path):
        index = build_index(small_tracks[:2])
        path = tmp_path / "good.afpi"
        save_index(index, path)
        return path

    def test_wrong_magic(self, saved, tmp_path):
        data = bytearray(saved.read_bytes())
        data[:4] = b"NOPE"
        bad = tmp_path / "bad_magic.afpi"
        bad.write_bytes(bytes(data))
        with pytest.raises(CorruptIndexError, match="magic"):
            load_index(bad)

    def test_wrong_version(self, saved, tmp_path):
        data = bytearray(saved.read_bytes())
        data[4:8] = (99).to_bytes(4, "little")
        bad = tmp_path / "bad_ver.afpi"
        bad.write_bytes(bytes(data))
        with pytest.raises(CorruptIndexError, match="version"):
            load_index(bad)

    def test_truncated_entries_names_offset(self, saved, tmp_path):
        data = saved.read_bytes()
        cut = len(data) - 7  # mid-entry
        bad = tmp_path / "trunc.afpi"
        bad.write_bytes(data[:cut])
        with pytest.raises(CorruptIndexError, match="byte offset"):
            load_index(bad)

    @pytest.mark.parametrize("keep", [3, 5, 9, 12, 14, 20])
    def test_truncation_everywhere(self, saved, tmp_path, keep):
        data = saved.read_bytes()
        bad = tmp_path / f"trunc{keep}.afpi"
        bad.write_bytes(data[:keep])
        with pytest.raises(CorruptIndexError):
            load_index(bad)

    def test_trailing_garbage(self, saved, tmp_path):
        bad = tmp_path / "trail.afpi"
        bad.write_bytes(saved.read_bytes() + b"xx")
        with pytest.raises(CorruptIndexError, match="trailing"):
            load_index(bad)

    def test_unsorted_entries_rejected(self, saved, tmp_path):
        index = load_index(saved)
        if index.n_entries < 2:
            pytest.skip("needs at least 2 entries")
        data = bytearray(saved.read_bytes())
        # swap the first two 12-byte entry rows at the end of the file
        tail = len(data) - index.n_entries * 12
        row0 = bytes(data[tail : tail + 12])
        row1 = bytes(data[tail + 12 : tail + 24])
        if row0 == row1:
            pytest.skip("first two rows identical")
        data[tail : tail + 12] = row1
        data[tail + 12 : tail + 24] = row0
        bad = tmp_path / "unsorted.afpi"
        bad.write_bytes(bytes(data))
        with pytest.raises(CorruptIndexError, match="sorted"):
            load_index(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_index(tmp_path / "ghost.afpi")
