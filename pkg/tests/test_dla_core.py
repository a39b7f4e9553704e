import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdla.dataset_io import bundled_threat_sample
from pdla.dla_core import (
    DlaConfig, MemorizedChunk, MemoryStore, NoMemory, deviant_average, extrapolate, mismatch, replay,
    run_episode,
)
from pdla.representation import EncoderConfig, chunk, encode


def store_of(*chunks, **cfg):
    s = MemoryStore(DlaConfig(**cfg))
    for c in chunks:
        s.store(c)
    return s


def test_default_config():
    assert DlaConfig() == DlaConfig(121, 10, 120, 0.0, 0.05)


@pytest.mark.parametrize("kw", [dict(learning_extent=0), dict(time_limit=0), dict(store_threshold=0),
                                dict(initial_permanence=-1.0), dict(tolerance=0.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        DlaConfig(**kw)


# -- store ----------------------------------------------------------------

def test_fifo_eviction():
    a, b, c = chunk(1), chunk(2), chunk(3)
    s = store_of(a, b, c, store_threshold=2)
    assert [m.chunk for m in s] == [b, c]


def test_first_insert_defaults():
    s = store_of(chunk(5))
    assert len(s) == 1
    assert s.chunks[0].permanence == 0.0
    assert s.chunks[0].birth_step == 0 and s.clock == 1


def test_190_inserts_threshold_120():
    s = store_of(*[chunk(i) for i in range(1, 191)])
    assert len(s) == 120
    # oldest survivor is insert #(190 - 120 + 1)
    assert s.chunks[0].chunk == chunk(71)
    births = [m.birth_step for m in s]
    assert births == sorted(set(births))


# -- mismatch --------------------------------------------------------------

@pytest.mark.parametrize("a, b, l_ext, expected", [
    ((10, 20), (10, 20), 2, 0),
    ((10, 22), (10, 21), 2, 1),
    ((10, 22), (10, 21), 1, 0),
    ((1, 2, 3), (1,), 121, 5),     # missing units count as zero
    ((-4,), (4,), 1, 8),
])
def test_mismatch(a, b, l_ext, expected):
    assert mismatch(chunk(*a), chunk(*b), l_ext) == expected


def test_mismatch_rejects_zero_extent():
    with pytest.raises(ValueError):
        mismatch(chunk(1), chunk(1), 0)


units = st.lists(st.integers(-10_000, 10_000), min_size=1, max_size=15)


@given(units, units, st.integers(1, 20))
def test_mismatch_monotone_in_extent(a, b, l_ext):
    assert mismatch(chunk(*a), chunk(*b), l_ext) <= mismatch(chunk(*a), chunk(*b), l_ext + 1)


@given(units, units, st.integers(1, 20))
def test_mismatch_symmetric_nonnegative(a, b, l_ext):
    m = mismatch(chunk(*a), chunk(*b), l_ext)
    assert m >= 0 and m == mismatch(chunk(*b), chunk(*a), l_ext)


@given(units, units)
def test_mismatch_saturates_beyond_length(a, b):
    n = max(len(a), len(b))
    assert mismatch(chunk(*a), chunk(*b), n) == mismatch(chunk(*a), chunk(*b), n + 50)


# -- pre/post prediction ---------------------------------------------------

def test_pre_predict_exact():
    s = store_of(chunk(10, 20), chunk(10, 21), chunk(50, 60))
    assert [m.chunk for m in s.pre_predict(chunk(10, 20))] == [chunk(10, 20)]


def test_pre_predict_nearest():
    s = store_of(chunk(10, 20), chunk(10, 21), chunk(50, 60))
    # |10-50| + |22-60| = 78
    assert s.scores(chunk(10, 22)) == [2, 1, 78]
    assert [m.chunk for m in s.pre_predict(chunk(10, 22))] == [chunk(10, 21)]


def test_pre_predict_keeps_ties():
    s = store_of(chunk(5), chunk(5))
    cands = s.pre_predict(chunk(5))
    assert [m.chunk for m in cands] == [chunk(5), chunk(5)]
    assert [m.birth_step for m in cands] == [0, 1]


def test_pre_predict_empty():
    with pytest.raises(NoMemory):
        MemoryStore().pre_predict(chunk(1))


def test_post_predict_singleton():
    s = store_of(chunk(3))
    p = s.post_predict(s.pre_predict(chunk(3)), chunk(3))
    assert p.selected == chunk(3) and p.candidates == (chunk(3),)
    assert s.chunks[0].permanence == 1.0
    assert p.mismatch_score == 0


def test_post_predict_prefers_permanence():
    cands = [MemorizedChunk(chunk(1), 3.0, 0), MemorizedChunk(chunk(2), 0.0, 1)]
    s = store_of(chunk(1))
    p = s.post_predict(cands)
    assert p.selected == chunk(1)
    assert cands[0].permanence == 4.0 and cands[1].permanence == 0.0


def test_post_predict_recency_tiebreak():
    cands = [MemorizedChunk(chunk(1), 0.0, 2), MemorizedChunk(chunk(2), 0.0, 5)]
    p = store_of(chunk(1)).post_predict(cands)
    assert p.selected == chunk(2)


def test_post_predict_empty():
    with pytest.raises(ValueError):
        store_of(chunk(1)).post_predict([])


# -- backward additive deviant computing ------------------------------------

def test_deviant_average_hand_case():
    s = store_of(chunk(2), chunk(4), chunk(6))
    # (|6-2| + |6-4| + |6-6|) / 3
    assert deviant_average(s).tolist() == [2.0]
    assert extrapolate(s) == chunk(8)


def test_single_chunk_store():
    s = store_of(chunk(7))
    assert deviant_average(s).tolist() == [0.0]
    assert extrapolate(s) == chunk(7)


def test_identical_history():
    s = store_of(chunk(1, 1), chunk(1, 1), chunk(1, 1))
    assert deviant_average(s).tolist() == [0.0, 0.0]
    assert extrapolate(store_of(chunk(0), chunk(0))) == chunk(0)


def test_extrapolate_rounds_half_away():
    # deviations |3-0| + 0 over n=2 -> 1.5 -> 2
    assert extrapolate(store_of(chunk(0), chunk(3))) == chunk(5)
    # |-3 - 0| = 3 -> 1.5 -> 2, added to -3
    assert extrapolate(store_of(chunk(0), chunk(-3))) == chunk(-1)


def test_deviant_average_empty():
    with pytest.raises(NoMemory):
        deviant_average(MemoryStore())
    with pytest.raises(NoMemory):
        extrapolate(MemoryStore())


@given(st.lists(st.lists(st.integers(-1000, 1000), min_size=3, max_size=3), min_size=1, max_size=30))
def test_deviant_average_oracle(rows):
    s = store_of(*[chunk(*r) for r in rows])
    latest = rows[-1]
    n = len(rows)
    expected = [sum(abs(latest[i] - r[i]) for r in rows) / n for i in range(3)]
    got = deviant_average(s).tolist()
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert all(v >= 0 for v in got)
    exact = [Fraction(sum(abs(latest[i] - r[i]) for r in rows), n) for i in range(3)]
    assert list(extrapolate(s).units) == [math.floor(v + Fraction(1, 2)) + k for v, k in zip(exact, latest)]


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=5), st.integers(1, 30))
def test_extrapolate_identity_on_constant_history(u, n):
    s = store_of(*[chunk(*u)] * n)
    assert extrapolate(s) == chunk(*u)


# -- episodes ----------------------------------------------------------------

def test_episode_single_chunk():
    assert run_episode(MemoryStore(), [chunk(1)]) == []


def test_episode_perfect_recall():
    a = chunk(4, 2)
    preds = run_episode(MemoryStore(), [a, a])
    assert len(preds) == 1
    assert preds[0].selected == a and preds[0].mismatch_score == 0


def test_episode_empty_stream():
    with pytest.raises(ValueError):
        run_episode(MemoryStore(), [])


def test_episode_on_bundled_sample():
    cfg = EncoderConfig(2)
    stream = [encode(ex.features, cfg) for ex in bundled_threat_sample()]
    preds = run_episode(MemoryStore(), stream)
    assert len(preds) == 3
    # at step 2 memory holds only row 1
    assert preds[0].selected == stream[0]
    assert preds[0].mismatch_score == mismatch(stream[1], stream[0], 121)
    # row 3 is nearer to row 2 than to row 1 (same class)
    assert preds[1].selected == stream[1]


def test_episode_extrapolation_refresh_cadence():
    stream = [chunk(i * i) for i in range(25)]
    s = MemoryStore(DlaConfig(time_limit=10))
    preds = run_episode(s, stream)
    # prediction k is made at stream step k + 1; refreshes happen at steps 1, 10, 20
    ext = [p.extrapolated for p in preds]
    assert len(set(ext[0:9])) == 1
    assert len(set(ext[9:19])) == 1 and ext[9] != ext[0]
    assert ext[19] != ext[9]
    ref = store_of(*stream[:10])
    assert ext[9] == extrapolate(ref)


def test_episode_deterministic():
    stream = [chunk(i % 7, (3 * i) % 5) for i in range(200)]
    a = run_episode(MemoryStore(), stream)
    b = run_episode(MemoryStore(), stream)
    assert a == b


def test_replay_recall_is_exact():
    stream = [chunk(i % 9, i % 4) for i in range(60)]
    s = MemoryStore()
    run_episode(s, stream)
    preds = replay(s, stream)
    assert all(p.mismatch_score == 0 for p in preds)
    assert [p.selected for p in preds] == stream
    assert len(s) == 60


# -- randomized invariants ---------------------------------------------------

ops = st.lists(st.tuples(st.sampled_from(["store", "predict"]),
                         st.lists(st.integers(-20, 20), min_size=1, max_size=4)), max_size=200)


@given(ops, st.integers(1, 15), st.integers(1, 6))
def test_store_invariants_random_ops(seq, threshold, l_ext):
    s = MemoryStore(DlaConfig(store_threshold=threshold, learning_extent=l_ext))
    history = {}
    for op, u in seq:
        c = chunk(*u)
        if op == "store" or not len(s):
            s.store(c)
        else:
            before = {m.birth_step: m.permanence for m in s}
            cands = s.pre_predict(c)
            scores = [mismatch(c, m.chunk, l_ext) for m in s]
            best = min(scores)
            assert [m for m, sc in zip(s, scores) if sc == best] == cands
            p = s.post_predict(cands, c)
            assert p.selected in p.candidates
            assert p.mismatch_score == best
            bumped = [m for m in s if m.permanence != before[m.birth_step]]
            assert len(bumped) == 1 and bumped[0].permanence == before[bumped[0].birth_step] + 1
        assert len(s) <= threshold
        for m in s:
            assert m.permanence >= history.get(m.birth_step, 0.0)
            history[m.birth_step] = m.permanence
