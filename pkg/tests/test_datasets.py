import numpy as np
import pytest

from lbcnnm.datasets import M4_HORIZONS, load_dataset, load_m4, load_simple_csv, shift_values


@pytest.fixture
def m4_pair(tmp_path):
    train = tmp_path / "train.csv"
    test = tmp_path / "test.csv"
    train.write_text(
        '"id","V1","V2","V3"\n'
        '"T1",1,2,3\n'
        '"T2",50,51,52,53,54\n'
        '"T3",oops,2\n'
        '"T4",7\n'
    )
    test.write_text('"id","V1"\n"T1",4\n"T2",55\n')
    return train, test


def test_load_m4_roundtrip(m4_pair):
    train, test = m4_pair
    result = load_m4(train, test, horizon=1)
    by_id = {s.id: s for s in result.series}
    assert set(by_id) == {"T1", "T2"}

    t1 = by_id["T1"]
    assert t1.shift == 9.0  # min value 1 -> shifted by 9 to reach 10
    assert t1.values.tolist() == [10.0, 11.0, 12.0]
    assert result.truths["T1"].tolist() == [13.0]  # truth shifted along

    t2 = by_id["T2"]
    assert t2.shift == 0.0
    assert result.truths["T2"].tolist() == [55.0]

    reasons = dict(result.errors)
    assert "T3" in reasons and "malformed" in reasons["T3"]
    assert "T4" in reasons and "too short" in reasons["T4"]


def test_m4_category_horizons(tmp_path):
    train = tmp_path / "h.csv"
    rows = ",".join(str(v) for v in range(10, 80))
    train.write_text(f"H1,{rows}\n")
    result = load_m4(train, category="Hourly")
    assert result.series[0].horizon == 48
    assert M4_HORIZONS["Hourly"] == 48
    assert result.series[0].frequency_label == "Hourly"


def test_m4_unknown_category(tmp_path):
    train = tmp_path / "x.csv"
    train.write_text("A,1,2,3\n")
    with pytest.raises(ValueError):
        load_m4(train, category="Minutely")


def test_load_simple_csv(tmp_path):
    path = tmp_path / "simple.csv"
    path.write_text("a,10,11,12,13\nb,-5,0,5,10,15\n")
    result = load_simple_csv(path, horizon=2)
    by_id = {s.id: s for s in result.series}
    assert by_id["a"].shift == 0.0
    assert by_id["b"].shift == 15.0
    assert by_id["b"].values.min() == 10.0


def test_load_dataset_dispatch(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,10,11,12\n")
    assert load_dataset(path, fmt="simple_csv", horizon=1).series
    with pytest.raises(ValueError):
        load_dataset(path, fmt="simple_csv")  # horizon required
    with pytest.raises(ValueError):
        load_dataset(path, fmt="parquet")


def test_shift_values():
    shifted, c = shift_values(np.array([-3.0, 0.0, 4.0]))
    assert c == 13.0
    assert shifted.min() == 10.0
    same, c0 = shift_values(np.array([10.0, 50.0]))
    assert c0 == 0.0
    assert same.tolist() == [10.0, 50.0]
