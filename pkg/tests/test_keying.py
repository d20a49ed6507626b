import multiprocessing as mp

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vidmark import _backend
from vidmark.errors import FormatError, ParameterError
from vidmark.keying import (
    MAX_FAILURES,
    SplitMix64,
    TrialState,
    TrialStore,
    asset_digest,
    asset_digest_file,
    check_trial,
    derive_key,
    fnv1a64,
    prng_next,
    select_frames,
    stratum,
)


def test_fnv_seeds():
    assert derive_key("").seed == 0xCBF29CE484222325
    assert derive_key("a").seed == 0xAF63DC4C8601EC8C
    assert derive_key(b"abc") == derive_key("abc")


@pytest.mark.parametrize("name", _backend.available())
def test_fnv_backends(name):
    data = bytes(range(256)) * 3
    assert _backend.kernel(name).fnv1a64_update(0xCBF29CE484222325, data) == fnv1a64(data)


def test_splitmix_first_value():
    assert prng_next(0)[1] == 0xE220A8397B1DCDAF


def test_splitmix_top_bit_balance():
    rng = SplitMix64(1)
    top = sum(rng.next_u64() >> 63 for _ in range(200_000))
    assert 0.495 <= top / 200_000 <= 0.505


def test_vectorised_stream_matches_scalar():
    from vidmark.attacks import splitmix_block

    rng = SplitMix64(77)
    assert splitmix_block(77, 50).tolist() == [rng.next_u64() for _ in range(50)]


def test_one_byte_changes_change_seed():
    rng = np.random.default_rng(0)
    same = 0
    for _ in range(10_000):
        b = bytearray(rng.integers(0, 256, 12, dtype=np.uint8).tobytes())
        s1 = derive_key(bytes(b)).seed
        i = rng.integers(0, 12)
        b[i] ^= int(rng.integers(1, 256))
        same += derive_key(bytes(b)).seed == s1
    assert same <= 10


def test_select_examples():
    k = derive_key("k")
    a, b = select_frames(k, 10, 2)
    assert 0 <= a <= 4 and 5 <= b <= 9
    assert tuple(select_frames(k, 5, 5)) == (0, 1, 2, 3, 4)
    assert select_frames(k, 10, 2) == select_frames(k, 10, 2)
    with pytest.raises(ParameterError):
        select_frames(k, 5, 0)
    with pytest.raises(ParameterError):
        select_frames(k, 5, 6)


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=16), st.integers(1, 500), st.data())
def test_select_stratified(passphrase, n, data):
    m = data.draw(st.integers(1, n))
    plan = select_frames(derive_key(passphrase), n, m)
    assert list(plan) == sorted(plan)
    for i, f in enumerate(plan):
        lo, hi = stratum(i, n, m)
        assert lo <= f < hi


def test_check_trial_transitions():
    assert check_trial(TrialState("x", 2), False) == TrialState("x", 3, True)
    assert check_trial(TrialState("x", 2), True) == TrialState("x", 0, False)
    locked = TrialState("x", 3, True)
    assert check_trial(locked, True) == locked
    st_ = TrialState("x")
    for _ in range(10):
        st_ = check_trial(st_, False)
        assert st_.failures <= MAX_FAILURES
    assert st_.locked


def test_trial_store_persists(tmp_path):
    store = TrialStore(tmp_path / "t")
    store.record("abc", False)
    store.record("abc", False)
    assert TrialStore(tmp_path / "t").get("abc") == TrialState("abc", 2, False)
    assert (tmp_path / "t").read_text() == "abc 2 0\n"


def test_trial_store_env(tmp_path, monkeypatch):
    monkeypatch.setenv("WM_TRIALS_PATH", str(tmp_path / "env"))
    assert TrialStore().path == str(tmp_path / "env")


def test_trial_store_malformed(tmp_path):
    p = tmp_path / "t"
    p.write_text("abc two 0\n")
    with pytest.raises(FormatError):
        TrialStore(p).get("abc")


def _hammer(path, n):
    store = TrialStore(path)
    for _ in range(n):
        store.record("shared", False)
        store.record("shared", True)
        store.record("other-" + str(n), False)


def test_trial_store_concurrent_processes(tmp_path):
    path = str(tmp_path / "t")
    ctx = mp.get_context("fork")
    procs = [ctx.Process(target=_hammer, args=(path, 20 + i)) for i in range(4)]
    for p in procs:
        p.start()
    for p in procs:
        p.join()
    table = TrialStore(path).session
    with table() as t:
        # every process kept its own asset line: no lost updates
        assert {f"other-{20 + i}" for i in range(4)} <= set(t)
        assert all(t[f"other-{20 + i}"].locked for i in range(4))


def test_asset_digest_file(tmp_path):
    p = tmp_path / "blob"
    p.write_bytes(b"x" * 3_000_000)
    assert asset_digest_file(p) == asset_digest(b"x" * 3_000_000)
