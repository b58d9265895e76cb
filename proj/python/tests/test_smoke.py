import math

import pytest

import temt


def small_dataset():
    ds = temt.Dataset()
    for i in range(12):
        ds.add_entity(f"e{i}", f"entity {i} {'early' if i % 2 else 'late'}")
    ds.add_relation("r0", "knows")
    ds.train = [(i, 0, (i + 1) % 12, 1950 if i % 2 else 1990, 1955 if i % 2 else 1995) for i in range(12)]
    ds.test = [(1, 0, 5, 1950, 1955)]
    ds.recompute_range()
    return ds


def test_interval_metrics():
    assert temt.hull((2002, 2006), (2004, 2008)) == (2002, 2008)
    assert temt.gap((2001, 2003), (2005, 2008)) == (2003, 2005)
    assert temt.giou((2002, 2006), (2004, 2008)) == pytest.approx(3 / 7, abs=1e-12)
    assert temt.gaeiou((2001, 2003), (2005, 2008)) == pytest.approx(1 / 24, abs=1e-12)
    assert temt.interval_length((2006, 2004)) == 0


def test_granularity():
    assert temt.normalize_granularity("1998-##-##") == 1998
    with pytest.raises(temt.TemtError):
        temt.normalize_granularity("98")


def test_time_encoding():
    e = temt.encode_time(1950, 1900, 64)
    assert len(e) == 64
    assert e[0] == pytest.approx(math.sin(50))
    assert e[1] == pytest.approx(math.cos(50))


def test_sentences_and_hashing_encoder():
    ds = small_dataset()
    s = temt.build_sentence(ds, 0, 0, 1, "N")
    assert s == "entity 0 late knows entity 1 early"
    assert len(temt.sentence_key(s)) == 16
    enc = temt.HashingEncoder(32, 1)
    v = enc.encode(s)
    assert len(v) == 32
    assert sum(x * x for x in v) == pytest.approx(1.0)


def test_embedding_table_roundtrip(tmp_path):
    key = temt.sentence_key("a b c")
    for name in ("table.txt", "table.bin"):
        temt.write_embedding_table(tmp_path / name, 3, {key: [0.5, -1.0, 2.0]})
        enc = temt.TableEncoder.load(tmp_path / name)
        assert len(enc) == 1
        assert enc.encode("a b c") == [0.5, -1.0, 2.0]
        with pytest.raises(temt.TemtError):
            enc.encode("missing")


def test_train_predict_evaluate(tmp_path):
    ds = small_dataset()
    enc = temt.HashingEncoder(16, 0)
    params, report = temt.train(ds, enc, "N", epochs=5, negatives=4, hidden=8, time_dim=8, batch_size=4, seed=1)
    assert len(report["epoch_loss"]) == 5
    temt.save_checkpoint(params, ds.range, tmp_path / "m.ckpt")
    loaded, rng, _ = temt.load_checkpoint(tmp_path / "m.ckpt")
    assert rng == ds.range
    text = enc.encode(temt.build_sentence(ds, 1, 0, 5, "N"))
    prob = temt.year_distribution(text, loaded, ds.range)
    assert sum(prob) == pytest.approx(1.0)
    preds = temt.greedy_coalesce(prob, ds.range[0], 3, 0.65)
    assert 1 <= len(preds) <= 3
    rows = temt.evaluate([(1950, 1955)], [preds], [1, 3])
    assert [r[0] for r in rows] == ["gIOU", "aeIOU", "gaeIOU"] * 2


def test_dataset_io_and_split(tmp_path):
    ds = small_dataset()
    temt.write_dataset(ds, tmp_path / "d")
    back = temt.load_dataset(tmp_path / "d")
    assert back.train == ds.train
    with pytest.raises(temt.TemtError):
        temt.make_inductive_split(back, 1, 1, 100, 0)
