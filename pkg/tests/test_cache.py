import threading

import numpy as np
import pytest

from siegelmod.cache import LOG_NAME, DensityCache
from siegelmod.errors import CorruptRecord
from siegelmod.localdensity import measure_table

from .conftest import HOLO_FORM, MAASS_FORM


def test_empty_cache(tmp_path):
    cache = DensityCache(tmp_path)
    assert cache.stats()["records"] == 0
    assert cache.verify().ok


def test_round_trip_equals_recomputation(tmp_path):
    cold = measure_table(MAASS_FORM, 1, 8, 13, cache=DensityCache(tmp_path))
    warm_cache = DensityCache(tmp_path)
    warm = measure_table(MAASS_FORM, 1, 8, 13, cache=warm_cache)
    plain = measure_table(MAASS_FORM, 1, 8, 13)
    assert warm_cache.misses == 0 and warm_cache.hits > 0
    assert np.array_equal(cold.values(), warm.values())
    assert np.array_equal(plain.values(), warm.values())
    stats = warm_cache.stats()
    assert stats["records"] > 0 and stats["forms"] == 1


def test_resume_is_idempotent(tmp_path):
    measure_table(MAASS_FORM, 1, 4, 13, cache=DensityCache(tmp_path))
    size = (tmp_path / LOG_NAME).stat().st_size
    full = measure_table(MAASS_FORM, 1, 8, 13, cache=DensityCache(tmp_path))
    again = measure_table(MAASS_FORM, 1, 8, 13, cache=DensityCache(tmp_path))
    assert np.array_equal(full.values(), again.values())
    assert (tmp_path / LOG_NAME).stat().st_size > size
    log = (tmp_path / LOG_NAME).read_bytes().splitlines()
    assert len(log) == len(set(log))


def test_fault_injection_detects_one_record(tmp_path):
    cache = DensityCache(tmp_path)
    measure_table(HOLO_FORM, 1, 5, 7, cache=cache)
    path = tmp_path / LOG_NAME
    data = bytearray(path.read_bytes())
    lines = data.splitlines(keepends=True)
    target = len(lines) // 2
    offset = sum(len(line) for line in lines[:target])
    # flip a digit inside the count field of one record
    pos = offset + lines[target].rindex(b" ") - 1
    data[pos] = ord("0") + (data[pos] - ord("0") + 1) % 10
    path.write_bytes(bytes(data))
    result = DensityCache(tmp_path).verify()
    assert result.bad_offsets == (offset,)
    with pytest.raises(CorruptRecord) as info:
        DensityCache(tmp_path).check()
    assert list(info.value.offsets) == [offset]
    # the damaged record is ignored, so it is recomputed rather than trusted
    assert len(DensityCache(tmp_path)._store) == len(lines) - 1


def test_concurrent_puts(tmp_path):
    cache = DensityCache(tmp_path)

    def work(lo):
        for n in range(lo, lo + 50):
            cache.put(MAASS_FORM, n, 3, 1, n)

    threads = [threading.Thread(target=work, args=(i * 50,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    cache.flush()
    fresh = DensityCache(tmp_path)
    assert fresh.stats()["records"] == 200
    assert fresh.get(MAASS_FORM, 137, 3, 1) == 137


def test_clear(tmp_path):
    cache = DensityCache(tmp_path)
    cache.put(MAASS_FORM, 1, 3, 1, 72)
    cache.flush()
    cache.clear()
    assert DensityCache(tmp_path).stats()["records"] == 0
