from __future__ import annotations

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

import debtmap.cli as cli
from debtmap.interchange import canonical_json, portfolio_to_doc, rule_to_doc
from debtmap.rules import example_rule
from debtmap.service.app import ServiceConfig, create_app
from debtmap.service.core import DebtService
from debtmap.store import Store
from helpers import chain_portfolio, mk_item


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, data_dir, *args, fmt="json"):
    return runner.invoke(cli.main, ["--data-dir", str(data_dir), "--format", fmt, *args])


def workshop_doc():
    """Workshop fixture: 8 assets (5 operational, 2 to_be, 1 legacy),
    two-level CIs, a handful of classified value sources."""
    cis, assets, vss, debts = [], [], [], []
    for i in range(5):
        cis.append({"id": f"sys{i}", "name": f"system {i}", "state": "operational"})
        cis.append({"id": f"sys{i}/mod", "name": f"module {i}", "state": "operational",
                    "parent_ids": [f"sys{i}"]})
        assets.append({"id": f"asset-oper{i}", "state": "operational", "ci_ids": [f"sys{i}"]})
    for i in range(2):
        cis.append({"id": f"new{i}", "state": "to_be"})
        assets.append({"id": f"asset-tobe{i}", "state": "to_be", "ci_ids": [f"new{i}"]})
    cis.append({"id": "old", "state": "legacy"})
    assets.append({"id": "asset-legacy", "state": "legacy", "ci_ids": ["old"]})
    for i in range(4):
        vss.append({"id": f"vs{i}", "business_value": "core" if i % 2 else "other",
                    "usage": "high" if i < 2 else "low", "asset_ids": [f"asset-oper{i}"]})
    debts.append({"id": "td1", "created_date": "2020-05-01", "debt_type": "bug",
                  "ci_id": "sys0/mod", "value_source_ids": ["vs0"]})
    return {"configuration_items": cis, "it_assets": assets,
            "value_sources": vss, "debt_items": debts}


class TestOnboard:
    def test_multi_asset_workshop(self, runner, tmp_path):
        workshop = tmp_path / "workshop.json"
        workshop.write_text(json.dumps(workshop_doc()))
        result = invoke(runner, tmp_path / "data", "onboard", str(workshop))
        assert result.exit_code == 0, result.output
        doc = json.loads(result.stdout)
        assert doc["valid"] is True
        assert doc["counts"]["it_assets"] == 8
        portfolio = json.loads(
            invoke(runner, tmp_path / "data", "report", "types").stdout
        )
        assert portfolio["total"] == 1
        states = {}
        service = DebtService(Store(tmp_path / "data"))
        for asset in service.get_portfolio()["it_assets"]:
            states[asset["state"]] = states.get(asset["state"], 0) + 1
        assert states == {"operational": 5, "to_be": 2, "legacy": 1}

    def test_empty_workshop(self, runner, tmp_path):
        workshop = tmp_path / "empty.json"
        workshop.write_text("{}")
        result = invoke(runner, tmp_path / "data", "onboard", str(workshop))
        assert result.exit_code == 0
        assert json.loads(result.stdout)["valid"] is True

    def test_unknown_value_source_reports_unlinked_debt(self, runner, tmp_path):
        doc = workshop_doc()
        doc["debt_items"].append({"id": "td-bad", "created_date": "2020-05-01",
                                  "debt_type": "bug", "ci_id": "sys0",
                                  "value_source_ids": ["ghost-vs"]})
        workshop = tmp_path / "workshop.json"
        workshop.write_text(json.dumps(doc))
        result = invoke(runner, tmp_path / "data", "onboard", str(workshop))
        assert result.exit_code == 1
        assert "UnlinkedDebt" in result.stdout


def seed_offline(tmp_path, items=()):
    service = DebtService(Store(tmp_path / "data"))
    p = chain_portfolio()
    for item in items:
        p.debt_items[item.id] = item
    service.put_portfolio(portfolio_to_doc(p))
    service.add_rule(rule_to_doc(example_rule()), activate=True)
    return service


class TestReports:
    def test_crosstab_json_matches_core_byte_for_byte(self, runner, tmp_path):
        service = seed_offline(tmp_path, items=[
            mk_item("td1", ci="ci-shop", vss=["showcase"], priority="high"),
            mk_item("td2", ci="ci-legacy", vss=["archive"]),
        ])
        result = invoke(runner, tmp_path / "data", "report", "crosstab")
        assert result.exit_code == 0
        assert result.stdout.strip() == canonical_json(service.analytics_crosstab())

    def test_series_csv_format(self, runner, tmp_path):
        seed_offline(tmp_path, items=[
            mk_item("td1", ci="ci-shop", vss=["showcase"], created="2020-05-01"),
            mk_item("td2", ci="ci-shop", vss=["showcase"], created="2020-05-03", paid="2020-05-04"),
        ])
        result = invoke(runner, tmp_path / "data", "report", "series",
                        "--split", "2020-05-02", fmt="csv")
        assert result.exit_code == 0
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "group,date,open"
        assert any(line.startswith("all,2020-05-01,") for line in lines)

    def test_types_top_row_on_large_fixture(self, runner, tmp_path):
        items = [mk_item(f"b{i}", ci="ci-shop", vss=["showcase"], debt_type="bug") for i in range(89)]
        items += [mk_item(f"o{i}", ci="ci-shop", vss=["showcase"], debt_type="other") for i in range(120)]
        seed_offline(tmp_path, items=items)
        result = invoke(runner, tmp_path / "data", "report", "types", fmt="table")
        assert result.exit_code == 0
        first_data_row = result.stdout.strip().splitlines()[2]
        assert first_data_row.split()[:3] == ["other", "120", "57.4"]
        doc = json.loads(invoke(runner, tmp_path / "data", "report", "types").stdout)
        bug_row = next(t for t in doc["types"] if t["type"] == "bug")
        assert (bug_row["count"], bug_row["pct"]) == (89, 42.6)

    def test_payments_table(self, runner, tmp_path):
        seed_offline(tmp_path, items=[
            mk_item("td1", ci="ci-shop", vss=["showcase"], created="2020-05-01", paid="2020-05-10"),
        ])
        result = invoke(runner, tmp_path / "data", "report", "payments", fmt="table")
        assert result.exit_code == 0
        assert "pct_paid" in result.stdout

    def test_decompose(self, runner, tmp_path):
        seed_offline(tmp_path)
        result = invoke(runner, tmp_path / "data", "report", "decompose")
        doc = json.loads(result.stdout)
        assert doc["bands"]["high"]["high"] == 50.0


class TestEntityCommands:
    def test_build_portfolio_from_commands(self, runner, tmp_path):
        data = tmp_path / "data"
        steps = [
            ["ci", "add", "--id", "ci1", "--state", "operational"],
            ["ci", "add", "--id", "ci1/auth", "--state", "operational", "--parent", "ci1"],
            ["asset", "add", "--id", "a1", "--state", "operational", "--ci", "ci1"],
            ["vs", "add", "--id", "v1", "--value", "core", "--usage", "high", "--asset", "a1"],
            ["debt", "add", "--id", "td1", "--created", "2020-05-01", "--type", "bug",
             "--ci", "ci1/auth", "--vs", "v1"],
        ]
        for step in steps:
            result = invoke(runner, data, *step)
            assert result.exit_code == 0, result.output
        listing = json.loads(invoke(runner, data, "debt", "list").stdout)
        assert [i["id"] for i in listing["items"]] == ["td1"]

        result = invoke(runner, data, "debt", "pay", "td1", "--date", "2020-06-01")
        assert result.exit_code == 0
        assert json.loads(result.stdout)["item"]["paid_date"] == "2020-06-01"
        assert json.loads(invoke(runner, data, "debt", "list").stdout)["items"] == []

    def test_debt_link_completes_import(self, runner, tmp_path):
        data = tmp_path / "data"
        seed_offline(tmp_path)
        feed = {"tracker": "redmine", "issues": [
            {"external_id": "9", "subject": "todo", "issue_type": "bug", "td_flag": True,
             "created_on": "2020-05-01", "closed_on": None, "priority": "low"},
        ]}
        feed_file = tmp_path / "feed.json"
        feed_file.write_text(json.dumps(feed))
        result = invoke(runner, data, "import", str(feed_file))
        assert json.loads(result.stdout)["imported"] == 1
        result = invoke(runner, data, "debt", "list", "--needs-linking")
        assert [i["id"] for i in json.loads(result.stdout)["items"]] == ["redmine:9"]
        result = invoke(runner, data, "debt", "link", "redmine:9", "--ci", "ci-shop", "--vs", "showcase")
        assert result.exit_code == 0
        assert json.loads(invoke(runner, data, "debt", "list", "--needs-linking").stdout)["items"] == []

    def test_vs_classify_records_rating(self, runner, tmp_path):
        data = tmp_path / "data"
        seed_offline(tmp_path)
        result = invoke(runner, data, "vs", "classify", "reports", "--value", "core",
                        "--rater", "ceo", "--timestamp", "2020-06-01T10:00:00+00:00")
        assert result.exit_code == 0, result.output
        service = DebtService(Store(data))
        assert service.get_portfolio()["value_sources"][2]["business_value"] == "core"
        ratings = service.list_ratings(dimension="business_value")["ratings"]
        assert ratings == [{
            "rater_id": "ceo", "value_source_id": "reports",
            "dimension": "business_value", "category": "core",
            "timestamp": "2020-06-01T10:00:00+00:00",
        }]


class TestRulesAndAgreementCommands:
    def test_rule_add_activate_backlog_whatif(self, runner, tmp_path):
        data = tmp_path / "data"
        service = DebtService(Store(data))
        p = chain_portfolio()
        p.debt_items["td1"] = mk_item("td1", ci="ci-mobile", vss=["mobile-checkout"])
        service.put_portfolio(portfolio_to_doc(p))

        rule_file = tmp_path / "rule.json"
        rule_file.write_text(json.dumps(rule_to_doc(example_rule())["cells"]))
        result = invoke(runner, data, "rule", "add", str(rule_file), "--id", "base", "--activate")
        assert result.exit_code == 0, result.output

        backlog = json.loads(invoke(runner, data, "backlog").stdout)
        assert [e["rank"] for e in backlog["entries"]] == [5]

        candidate = rule_to_doc(example_rule())["cells"]
        candidate["to_be/core"] = 2
        candidate_file = tmp_path / "candidate.json"
        candidate_file.write_text(json.dumps(candidate))
        whatif = json.loads(invoke(runner, data, "rule", "whatif", str(candidate_file)).stdout)
        assert whatif["diff"][0]["rank_change"] == -3

    def test_rate_and_agreement(self, runner, tmp_path):
        data = tmp_path / "data"
        seed_offline(tmp_path)
        for rater, category in [("po", "core"), ("ceo", "core")]:
            result = invoke(runner, data, "rate", "--rater", rater, "--vs", "showcase",
                            "--dimension", "business_value", "--category", category,
                            "--timestamp", "2020-06-01T10:00:00+00:00")
            assert result.exit_code == 0
        result = invoke(runner, data, "agreement", "--dimension", "business_value",
                        "--raters", "po,ceo")
        doc = json.loads(result.stdout)
        assert doc["scores"]["ceo,po"]["kappa"] == 1.0

    def test_rate_csv_bulk(self, runner, tmp_path):
        data = tmp_path / "data"
        seed_offline(tmp_path)
        csv_file = tmp_path / "ratings.csv"
        csv_file.write_text(
            "rater_id,value_source_id,dimension,category,timestamp\n"
            "po,showcase,usage,high,2020-06-01T10:00:00+00:00\n"
        )
        result = invoke(runner, data, "rate", "--csv", str(csv_file))
        assert json.loads(result.stdout)["recorded"] == 1


class TestServerMode:
    @pytest.fixture()
    def server_client(self, monkeypatch):
        app = create_app(ServiceConfig(), store=Store())
        client = TestClient(app)
        monkeypatch.setattr(cli, "make_http_client", lambda server, token: client)
        return client

    def test_server_and_offline_outputs_match(self, runner, tmp_path, server_client):
        service = seed_offline(tmp_path, items=[mk_item("td1", ci="ci-shop", vss=["showcase"])])
        server_client.put("/portfolio", json=service.get_portfolio())
        server_client.post("/rules", json={**rule_to_doc(example_rule()), "activate": True})

        offline = invoke(runner, tmp_path / "data", "report", "crosstab")
        online = runner.invoke(cli.main, ["--server", "http://testserver", "--format", "json",
                                          "report", "crosstab"])
        assert online.exit_code == 0, online.output
        assert offline.stdout == online.stdout

        online_backlog = runner.invoke(cli.main, ["--server", "http://testserver", "--format", "json",
                                                  "backlog"])
        offline_backlog = invoke(runner, tmp_path / "data", "backlog")
        assert online_backlog.stdout == offline_backlog.stdout

    def test_connectivity_error_exit_code(self, runner):
        result = runner.invoke(cli.main, ["--server", "http://127.0.0.1:9", "--format", "json",
                                          "report", "types"])
        assert result.exit_code == cli.EXIT_CONNECTIVITY

    def test_api_error_surfaces(self, runner, server_client):
        result = runner.invoke(cli.main, ["--server", "http://testserver", "--format", "json",
                                          "backlog"])
        assert result.exit_code == cli.EXIT_ERROR
        assert "NoActiveRule" in result.stderr


class TestUsage:
    def test_needs_backend(self, runner):
        result = runner.invoke(cli.main, ["report", "types"])
        assert result.exit_code == 2

    def test_missing_file_exit_code(self, runner, tmp_path):
        result = invoke(runner, tmp_path / "data", "onboard", str(tmp_path / "nope.json"))
        assert result.exit_code == 2
