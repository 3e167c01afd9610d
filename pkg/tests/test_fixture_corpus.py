from __future__ import annotations

import json
from datetime import date
from pathlib import Path

from normgraph.fixture_corpus import (
    ART6_CPT,
    ART7_CPT,
    NORM_URN,
    RIGHTS_1999,
    build_fixture_corpus,
)
from normgraph.model import ActionType, WorkKind, validate_graph

REPO_FIXTURES = Path(__file__).parent.parent / "fixtures"


def test_committed_fixture_tree_matches_generator(tmp_path):
    regenerated = build_fixture_corpus(tmp_path)
    committed = sorted(p.name for p in REPO_FIXTURES.iterdir())
    assert committed == [p.name for p in regenerated]
    for path in regenerated:
        assert (REPO_FIXTURES / path.name).read_bytes() == path.read_bytes(), path.name


def test_fixture_graph_validates_clean(fixture_store):
    assert validate_graph(fixture_store) == []


def test_exactly_one_enacted_norm(fixture_store):
    enacted = [
        w.urn for w in fixture_store.works.values()
        if w.kind is WorkKind.NORM and fixture_store.versions.get(w.urn)
    ]
    assert enacted == [NORM_URN]


def test_three_amendment_actions_target_art6_caput(fixture_store):
    amendments = [
        a for a in fixture_store.actions.values()
        if a.action_type is ActionType.AMENDMENT and ART6_CPT in a.targets
    ]
    assert len(amendments) == 3
    assert sorted(a.effective_date for a in amendments) == [
        date(2000, 2, 15), date(2010, 2, 4), date(2015, 9, 15)]


def test_art7_amended_once(fixture_store):
    amendments = [
        a for a in fixture_store.actions.values()
        if a.action_type is ActionType.AMENDMENT and ART7_CPT in a.targets
    ]
    assert len(amendments) == 1
    assert amendments[0].effective_date == date(2013, 4, 2)


def test_1999_rights_list_is_the_published_one(fixture_store):
    first = fixture_store.versions_of(ART6_CPT)[0]
    text = fixture_store.units[
        fixture_store.content_clv(first.id, "pt").text_unit].text
    for right in RIGHTS_1999:
        assert right in text
    assert "housing" not in text
    assert "food" not in text


def test_stand_in_texts_are_flagged_synthetic():
    payload = json.loads(
        (REPO_FIXTURES / "constitution_1988.satdoc.json").read_text(encoding="utf-8"))

    def leaf_records(records):
        for record in records:
            if "text" in record:
                yield record
            yield from leaf_records(record.get("children", ()))

    for record in leaf_records(payload["body"]):
        assert record.get("synthetic") is True, record["fragment"]


def test_ca26_text_is_the_published_wording_not_synthetic():
    payload = json.loads(
        (REPO_FIXTURES / "ca_26_2000.satev.json").read_text(encoding="utf-8"))
    event = payload["events"][0]
    assert event["synthetic"] == {"pt": False}
    assert "housing" in event["new_text"]["pt"]


def test_theme_file_defines_social_rights(fixture_store):
    theme = fixture_store.themes["theme:social-rights"]
    assert theme.label == "Social Rights"
    assert theme.members == (f"{NORM_URN}!tit2_cap2",)
