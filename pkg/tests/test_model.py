from __future__ import annotations

import random

import pytest

from debtmap.model import LifecycleState, Portfolio, UnlinkedDebt, validate_portfolio
from debtmap.rules import REACHABLE_CELLS, effective_cells
from helpers import chain_portfolio, mk_asset, mk_ci, mk_item, mk_portfolio, mk_vs, oracle_cells, random_portfolio


def codes(violations):
    return [v.code for v in violations]


class TestValidatePortfolio:
    def test_empty_portfolio_is_consistent(self):
        assert validate_portfolio(Portfolio()) == []

    def test_operational_asset_without_operational_ci(self):
        p = mk_portfolio(
            cis=[mk_ci("ci1", state="to_be")],
            assets=[mk_asset("a1", state="operational", cis=["ci1"])],
        )
        assert codes(validate_portfolio(p)) == ["OperationalAssetWithoutOperationalCI"]

    def test_operational_asset_with_operational_ci_is_fine(self):
        p = mk_portfolio(cis=[mk_ci("ci1")], assets=[mk_asset("a1", cis=["ci1"])])
        assert validate_portfolio(p) == []

    def test_two_node_composition_cycle(self):
        p = mk_portfolio(cis=[mk_ci("A", parents=["B"]), mk_ci("B", parents=["A"])])
        violations = validate_portfolio(p)
        assert set(codes(violations)) == {"CompositionCycle"}
        assert {v.entity_id for v in violations} == {"A", "B"}

    def test_self_cycle(self):
        p = mk_portfolio(cis=[mk_ci("A", parents=["A"])])
        assert codes(validate_portfolio(p)) == ["CompositionCycle"]

    def test_dangling_references_everywhere(self):
        p = mk_portfolio(
            cis=[mk_ci("ci1", parents=["ghost-ci"], depends=["ghost-dep"])],
            assets=[mk_asset("a1", cis=["ci1", "ghost-ci2"])],
            vss=[mk_vs("vs1", assets=["a1", "ghost-asset"])],
            items=[mk_item("td1", ci="ghost-ci3", vss=["vs1", "ghost-vs"])],
        )
        violations = [v for v in validate_portfolio(p) if v.code == "DanglingReference"]
        assert len(violations) == 6

    def test_non_to_be_asset_needs_cis(self):
        p = mk_portfolio(assets=[mk_asset("a1", state="legacy", cis=[])])
        assert codes(validate_portfolio(p)) == ["AssetWithoutCIs"]

    def test_to_be_asset_may_be_link_free(self):
        p = mk_portfolio(assets=[mk_asset("a1", state="to_be", cis=[])])
        assert validate_portfolio(p) == []

    def test_debt_without_value_source_and_without_ci(self):
        p = mk_portfolio(items=[mk_item("td1")])
        assert codes(validate_portfolio(p)) == ["DebtWithoutCI", "DebtWithoutValueSource"]

    def test_paid_before_created(self):
        p = chain_portfolio()
        p.debt_items["td1"] = mk_item(
            "td1", ci="ci-shop", vss=["showcase"], created="2020-05-01", paid="2020-04-30",
        )
        assert codes(validate_portfolio(p)) == ["PaidBeforeCreated"]

    def test_value_source_used_without_assets(self):
        p = mk_portfolio(
            cis=[mk_ci("ci1")],
            vss=[mk_vs("vs1", assets=[])],
            items=[mk_item("td1", ci="ci1", vss=["vs1"])],
        )
        assert "ValueSourceWithoutAssets" in codes(validate_portfolio(p))

    def test_idempotent_and_order_independent(self):
        p = chain_portfolio()
        p.debt_items["td1"] = mk_item("td1")
        first = validate_portfolio(p)
        assert validate_portfolio(p) == first
        shuffled = Portfolio(
            cis=dict(reversed(list(p.cis.items()))),
            assets=dict(reversed(list(p.assets.items()))),
            value_sources=dict(reversed(list(p.value_sources.items()))),
            debt_items=dict(p.debt_items),
            metrics=dict(p.metrics),
        )
        assert validate_portfolio(shuffled) == first


class TestEffectiveCells:
    def test_operational_core_high(self):
        p = chain_portfolio()
        item = mk_item("td1", ci="ci-shop", vss=["showcase"])
        cells = effective_cells(item, p)
        assert {c.key() for c in cells} == {"operational/core/high"}

    def test_to_be_drops_usage(self):
        p = chain_portfolio()
        item = mk_item("td1", ci="ci-mobile", vss=["mobile-checkout"])
        cells = effective_cells(item, p)
        assert {c.key() for c in cells} == {"to_be/core"}

    def test_ci_serving_two_assets_through_shared_value_source(self):
        p = chain_portfolio()
        p.assets["old"] = mk_asset("old", state="legacy", cis=["ci-legacy", "ci-shop"])
        item = mk_item("td1", ci="ci-shop", vss=["reports"])
        cells = effective_cells(item, p)
        assert {c.key() for c in cells} == {"operational/other/low", "legacy/other/low"}
        assert {c.key() for c in cells} == {f"{s}/{v}/{u}" for s, v, u in oracle_cells(item, p)}

    def test_composition_ancestor_reaches_asset(self):
        p = chain_portfolio()
        item = mk_item("td1", ci="ci-pay", vss=["showcase"])
        cells = effective_cells(item, p)
        assert {c.key() for c in cells} == {"operational/core/high"}

    def test_depends_on_does_not_transmit_membership(self):
        p = chain_portfolio()
        p.cis["ci-extra"] = mk_ci("ci-extra", depends=["ci-shop"])
        item = mk_item("td1", ci="ci-extra", vss=["showcase"])
        with pytest.raises(UnlinkedDebt):
            effective_cells(item, p)

    def test_unlinked_debt_raises(self):
        p = chain_portfolio()
        item = mk_item("td1", ci="ci-shop", vss=["archive"])
        with pytest.raises(UnlinkedDebt):
            effective_cells(item, p)

    def test_cells_are_always_reachable_cells(self):
        rng = random.Random(7)
        reachable = set(REACHABLE_CELLS)
        checked = 0
        for _ in range(150):
            p = random_portfolio(rng)
            for item in p.debt_items.values():
                try:
                    cells = effective_cells(item, p)
                except UnlinkedDebt:
                    continue
                checked += 1
                assert cells <= reachable
                for cell in cells:
                    assert (cell.usage is None) == (cell.asset_state == LifecycleState.TO_BE)
        assert checked > 50

    def test_matches_brute_force_enumeration(self):
        rng = random.Random(13)
        for _ in range(200):
            p = random_portfolio(rng)
            for item in p.debt_items.values():
                expected = oracle_cells(item, p)
                try:
                    got = {
                        (c.asset_state.value, c.business_value.value, c.usage.value if c.usage else None)
                        for c in effective_cells(item, p)
                    }
                except UnlinkedDebt:
                    got = set()
                assert got == expected
