import csv
import json

import pytest

from permit_cmra.cost_model import CostParams
from permit_cmra.engine import AuctionConfig, ConfigError, run_auction
from permit_cmra.experiments import BatchConfig, run_batch
from permit_cmra.io import (
    DEFAULT_LINEAR,
    DEFAULT_QUAD,
    config_digest,
    config_to_dict,
    parse_config,
    parse_config_dict,
    write_plotdata,
    write_results,
)

MINIMAL = {
    "goods": [
        {"good_id": 0, "pollutant_name": "GHG", "unit_label": "kgCO2e", "cap": 3},
        {"good_id": 1, "pollutant_name": "NutrientRunoff", "unit_label": "kgNe", "cap": 3},
    ],
    "bidders": [{"correlation": 0.5}, {"correlation": 0.1}],
}


def write_json(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_minimal_config_fills_defaults(tmp_path):
    cfg = parse_config(write_json(tmp_path, MINIMAL))
    assert isinstance(cfg, AuctionConfig)
    assert cfg.caps == (3, 3)
    assert cfg.bidders[0] == CostParams(DEFAULT_LINEAR, DEFAULT_QUAD, 0.5, 0.1)
    assert cfg.start_price == (0, 0) and cfg.delta == (1, 1)
    assert cfg.max_rounds == 10_000 and cfg.seed == 0
    echoed = config_to_dict(cfg)
    assert echoed["engine"] == {"start_price": [0, 0], "delta": [1, 1], "max_rounds": 10_000, "seed": 0}


def test_batch_section(tmp_path):
    doc = dict(MINIMAL, batch={"instances": 7})
    cfg = parse_config(write_json(tmp_path, doc))
    assert isinstance(cfg, BatchConfig)
    assert cfg.instances == 7 and cfg.master_seed == 0


def test_negative_cap_names_field():
    doc = json.loads(json.dumps(MINIMAL))
    doc["goods"][0]["cap"] = -1
    with pytest.raises(ConfigError, match=r"goods\[0\]\.cap"):
        parse_config_dict(doc)


def test_duplicate_good_id():
    doc = json.loads(json.dumps(MINIMAL))
    doc["goods"][1]["good_id"] = 0
    with pytest.raises(ConfigError, match="duplicate good_id 0"):
        parse_config_dict(doc)


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d["bidders"][0].update(colour="red"), r"bidders\[0\]\.colour"),
        (lambda d: d["bidders"][1].update(correlation=2), r"bidders\[1\]\.correlation"),
        (lambda d: d.update(engine={"delta": [0, 1]}), r"engine\.delta"),
        (lambda d: d.update(engine={"delta": [1]}), r"engine\.delta"),
        (lambda d: d["bidders"][0].update(linear_coeff=[1.0]), r"bidders\[0\]\.linear_coeff"),
        (lambda d: d.update(batch={"instances": 0}), r"batch\.instances"),
    ],
)
def test_validation_errors_name_field(mutate, field):
    doc = json.loads(json.dumps(MINIMAL))
    mutate(doc)
    with pytest.raises(ConfigError, match=field):
        parse_config_dict(doc)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(bad)


def test_round_trip(tmp_path):
    doc = dict(MINIMAL, batch={"instances": 3, "master_seed": 9})
    cfg = parse_config(write_json(tmp_path, doc))
    again = parse_config(write_json(tmp_path, config_to_dict(cfg), "again.json"))
    assert again == cfg


def test_digest_ignores_key_order(tmp_path):
    a = parse_config(write_json(tmp_path, MINIMAL, "a.json"))
    reordered = {"bidders": MINIMAL["bidders"], "goods": [dict(reversed(list(g.items()))) for g in MINIMAL["goods"]]}
    b = parse_config(write_json(tmp_path, reordered, "b.json"))
    assert config_digest(a) == config_digest(b)


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_empty_allocation_shape(tmp_path):
    doc = json.loads(json.dumps(MINIMAL))
    doc["engine"] = {"start_price": [100_000, 100_000]}
    cfg = parse_config_dict(doc)
    res = run_auction(cfg)
    write_results(res, tmp_path, cfg)
    rows = _rows(tmp_path / "allocation.csv")
    assert rows[0] == ["bidder_id", "qty_0", "qty_1", "payment"]
    assert rows[1:] == [["0", "0", "0", "0"], ["1", "0", "0", "0"]]


def test_auction_outputs_deterministic(tmp_path):
    cfg = parse_config_dict(MINIMAL)
    res = run_auction(cfg)
    m1 = write_results(res, tmp_path / "a", cfg)
    write_results(run_auction(cfg), tmp_path / "b", cfg)
    assert set(m1.outputs) == {"result.json", "rounds.csv", "allocation.csv"}
    for name in m1.outputs:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    doc = json.loads((tmp_path / "a" / "result.json").read_text())
    assert doc["currency_scale"] == 2 and doc["minor_per_unit"] == 100
    assert doc["allocation"]["revenue"] == res.allocation.revenue
    trace = _rows(tmp_path / "a" / "rounds.csv")
    assert trace[0] == [
        "round", "clock_0", "clock_1",
        "headline_0_0", "headline_0_1", "headline_1_0", "headline_1_1",
        "over_demanded_0", "over_demanded_1", "closed",
    ]
    assert len(trace) == len(res.rounds) + 1
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["config_digest"] == config_digest(cfg)


def test_batch_outputs_and_plotdata(tmp_path):
    cfg = BatchConfig(parse_config_dict(MINIMAL), instances=5, master_seed=3)
    summary = run_batch(cfg)
    write_results(summary, tmp_path, cfg)
    rows = _rows(tmp_path / "instances.csv")
    assert rows[0] == ["seed", "terminated_by", "rounds", "proportion_0", "proportion_1", "price_0", "price_1"]
    assert [int(r[0]) for r in rows[1:]] == [3, 4, 5, 6, 7]
    names = write_plotdata(tmp_path / "summary.json", tmp_path / "plots")
    fig1 = _rows(tmp_path / "plots" / names[0])
    assert fig1[0] == ["seed", "good_id", "pollutant_name", "proportion"]
    assert len(fig1) == 1 + 5 * 2
    fig2 = _rows(tmp_path / "plots" / names[1])
    assert fig2[0] == ["seed", "bidder_id", "correlation", "price"]
    assert {r[2] for r in fig2[1:]} <= {"0.5", "0.1"}


def test_manifest_timestamp_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    cfg = parse_config_dict(MINIMAL)
    manifest = write_results(run_auction(cfg), tmp_path, cfg)
    assert manifest.timestamp == "1970-01-01T00:00:00Z"
