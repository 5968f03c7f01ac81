import math
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, strategies as st

from qsea.errors import FormatError
from qsea.evaluation import RunMetrics
from qsea.report import (
    HEADER,
    CsvWriter,
    Row,
    final_rows,
    plot_accuracy,
    plot_loss,
    read_csv,
    rows_for_run,
    summarize,
    write_csv,
)

finite = st.floats(allow_nan=False, allow_infinity=False)


def metrics(seed=1, acc=0.9, epochs=3):
    return RunMetrics(seed=seed, loss_total=[0.1 * e for e in range(epochs)], loss_f1=[1.0] * epochs,
                      loss_f2=[0.5] * epochs, acc=acc, wall_s=1.25)


def test_header_exact(tmp_path):
    write_csv(tmp_path / "m.csv", [])
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == ",".join(HEADER)
    assert ",".join(HEADER) == "run_id,seed,axis,value,epoch,loss_total,loss_f1,loss_f2,acc,wall_s"


def test_rows_per_epoch():
    rows = rows_for_run(4, metrics(epochs=3), "qubits", 8)
    assert [r.epoch for r in rows] == [1, 2, 3]
    assert all(r.run_id == 4 and r.value == "8" and r.acc == 0.9 for r in rows)
    empty = rows_for_run(0, metrics(epochs=0))
    assert len(empty) == 1 and empty[0].epoch == 0 and math.isnan(empty[0].loss_total)


def test_writer_assigns_run_ids(tmp_path):
    with CsvWriter(tmp_path / "m.csv") as w:
        assert w.write_run(metrics(seed=1)) == 0
        assert w.write_run(metrics(seed=2), "samples", 10) == 1
    rows = read_csv(tmp_path / "m.csv")
    assert len(rows) == 6 and {r.run_id for r in rows} == {0, 1}
    assert [r.seed for r in final_rows(rows)] == [1, 2]


@given(st.lists(st.tuples(st.integers(0, 2**63), finite, finite, finite, st.floats(0, 1), st.floats(0, 1e6)),
                min_size=1, max_size=10))
def test_round_trip_exact(tmp_path_factory, cells):
    rows = [Row(i, seed, "classes", str(i % 3), i + 1, lt, l1, l2, acc, ws)
            for i, (seed, lt, l1, l2, acc, ws) in enumerate(cells)]
    path = tmp_path_factory.mktemp("csv") / "m.csv"
    write_csv(path, rows)
    assert read_csv(path) == rows


def test_read_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(FormatError):
        read_csv(bad)
    bad.write_text(",".join(HEADER) + "\n1,2,3\n")
    with pytest.raises(FormatError):
        read_csv(bad)
    bad.write_text(",".join(HEADER) + "\nx,1,a,b,1,0,0,0,1,1\n")
    with pytest.raises(FormatError):
        read_csv(bad)


def test_summarize_orders_numeric_values():
    rows = []
    for i, (v, acc) in enumerate([(10, 0.8), (2, 0.9), (10, 1.0)]):
        rows += rows_for_run(i, metrics(acc=acc), "samples", v)
    s = summarize(rows)
    assert list(s["samples"]) == ["2", "10"]
    assert s["samples"]["10"] == [0.8, 1.0]


def test_plots_are_svg(tmp_path):
    rows = rows_for_run(0, metrics(), "qubits", 6) + rows_for_run(1, metrics(acc=0.5), "qubits", 8)
    for fn, name in ((plot_loss, "loss.svg"), (plot_accuracy, "acc.svg")):
        path = fn(rows, tmp_path / name)
        root = ET.parse(path).getroot()
        assert root.tag.endswith("svg")
