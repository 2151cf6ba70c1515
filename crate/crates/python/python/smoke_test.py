"""Smoke test for the coburst Python module."""

import json
import math
import tempfile
from pathlib import Path

import coburst


def check_decomposition():
    w = coburst.PairSeries([(0, 1), (0, 2)], [[0.1, 0.1, 0.1, 0.1], [0.1, 0.1, 0.9, 0.1]], [50] * 4)
    assert (w.rows, w.periods) == (2, 4)
    lam_max = coburst.zero_solution_threshold(w)
    assert coburst.decompose(w, lam_max).nnz == 0
    res = coburst.decompose(w, 0.05, tol=1e-10, max_iters=20000)
    assert res.kkt_residual <= 1e-5, res
    assert res.burst[0] == [0.0] * 4
    assert [(i, j, t) for i, j, t, _ in res.bursts()] == [(0, 2, 3)]
    assert math.isclose(coburst.objective(w, res.burst, 0.05), res.objective, rel_tol=1e-12)


def check_baselines_and_eval():
    w = coburst.PairSeries([(0, 1)], [[0.1, 0.4, 0.1, 0.6]])
    assert [t for _, _, t, _ in coburst.threshold_raw(w, 0.3)] == [2, 4]
    assert coburst.kleinberg([1, 1, 40, 1], [100] * 4, s=2.0, gamma=0.5) == [False, False, True, False]
    assert coburst.precision_recall([(0, 1, 1), (0, 2, 1)], [(0, 1, 1)]) == (0.5, 1.0)
    assert coburst.auc([(0.0, 1.0), (1.0, 0.0)]) == 0.5
    assignment, q = coburst.louvain(6, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 0.1)])
    assert assignment == [0, 0, 0, 1, 1, 1] and q > 0.4


def check_synthetic():
    w, truth = coburst.synthesize(3, pairs=200, periods=20)
    assert w.periods == 20 and truth
    assert all(kind in ("A", "B") for *_, kind in truth)
    aucs = coburst.run_benchmark(3, pairs=200, periods=20, grid=8)
    assert set(aucs) == {"proposed", "raw", "derivative", "mean_deviation", "kleinberg"}
    assert all(0.0 <= a <= 1.0 for a in aucs.values())


def check_corpus_and_export():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        corpus = tmp / "titles.jsonl"
        rows = []
        for year in range(2010, 2016):
            for k in range(20):
                title = "Sparse signal recovery" if k % 2 else "Wireless sensor networks"
                if year >= 2014 and k % 3 == 0:
                    title = "Adversarial networks for " + title
                rows.append(json.dumps({"title": title, "year": year}))
        corpus.write_text("\n".join(rows) + "\n")
        w, vocab = coburst.build_series(corpus)
        assert w.periods == 6 and len(vocab) > 0
        assert coburst.stem("networks") == "network"
        res = coburst.decompose(w, 1e-3)
        paths = coburst.export_graphs(w, res, vocab, tmp / "graphs", format="json")
        assert len(paths) == 6
        graphs = [json.loads(Path(p).read_text()) for p in paths]
        assert any(g["edges"] for g in graphs)


if __name__ == "__main__":
    check_decomposition()
    check_baselines_and_eval()
    check_synthetic()
    check_corpus_and_export()
    print("coburst", coburst.__version__, "smoke test passed")
