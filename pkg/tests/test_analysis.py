from __future__ import annotations

import importlib.util
import json
import os
import sys

import pytest

from conftest import write_csv

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture(scope="module")
def analysis():
    spec = importlib.util.spec_from_file_location("analysis", os.path.join(ROOT, "utils", "analysis.py"))
    module = importlib.util.module_from_spec(spec)
    sys.modules[spec.name] = module
    spec.loader.exec_module(module)
    return module


def _experiment(tmp_path):
    exp = tmp_path / "k2_dev0.1"
    (exp / "data").mkdir(parents=True)
    (exp / "data" / "run.json").write_text(json.dumps({"params": {"n": 300, "corridors": 2, "deviation": 0.1}}))
    for weighting, q in (("spatial", 0.61), ("classic", None)):
        (exp / f"modularity_{weighting}").mkdir()
        summary = {"top_level_modularity": q, "clusters_per_level": [1, 2]}
        (exp / f"modularity_{weighting}" / "summary.json").write_text(json.dumps(summary))
    header = "method,k,ari,intraclass_overlap,interclass_overlap,start_intra,start_total,end_intra,end_total"
    write_csv(exp / "report.csv", header, [
        "modularity_spatial@L1,2,1.0,3.5,0.25,10,40,20,40",
        "hac_single_spatial@L1,2,0.5,2.0,1.0,30,40,30,40",
        "modularity_classic@L1,2,,3.0,0.5,0,0,5,10",
    ])
    return exp


def test_rows_carry_level_and_weighting_modularity(analysis, tmp_path):
    exp = _experiment(tmp_path)
    stats = analysis.analyze_experiment(str(exp))
    assert (stats.n, stats.corridors, stats.deviation) == (300, 2, 0.1)
    assert stats.top_modularity == {"classic": None, "spatial": 0.61}
    first, second, third = stats.rows
    assert (first.method, first.level, first.k, first.ari) == ("modularity_spatial", 1, 2, 1.0)
    assert first.start_ratio == pytest.approx(0.25)
    assert second.method == "hac_single_spatial"
    assert third.ari is None
    assert third.start_ratio == 0.0


def test_table_shows_top_modularity_per_weighting(analysis, tmp_path, capsys):
    exp = _experiment(tmp_path)
    assert analysis.resolve_experiment_dirs([str(tmp_path)]) == [str(exp)]
    analysis.print_table([analysis.analyze_experiment(str(exp))])
    lines = capsys.readouterr().out.splitlines()
    assert "Level" in lines[0] and "Top Q" in lines[0]
    body = {line.split("|")[1].strip(): line for line in lines[2:]}
    assert body["modularity_spatial"].rstrip().endswith("0.610")
    assert body["hac_single_spatial"].rstrip().endswith("0.610")
    assert body["modularity_classic"].rstrip().endswith("-")


def test_method_names_without_level(analysis):
    assert analysis._split_method("hac_complete") == ("hac_complete", None)
    assert analysis._split_method("modularity_jaccard@L12") == ("modularity_jaccard", 12)
