"""Reference corpus builder: the Art. 6 / Art. 7 amendment narrative.

Emits a desk-scale corpus (one constitution document, four amendment
event files, a theme file, an English translation file, and a ground
truth file) used by the test suite and the documentation examples.
Version texts that official sources would supply are stand-ins assembled
from short published phrases; every such unit carries ``synthetic: true``.
"""

from __future__ import annotations

import json
from pathlib import Path

NORM_URN = "urn:lex:br:federal:constituicao:1988-10-05;1988"
CA26_URN = "urn:lex:br:federal:emenda.constitucional:2000-02-14;26"
CA64_URN = "urn:lex:br:federal:emenda.constitucional:2010-02-04;64"
CA72_URN = "urn:lex:br:federal:emenda.constitucional:2013-04-02;72"
CA90_URN = "urn:lex:br:federal:emenda.constitucional:2015-09-15;90"

ART6 = f"{NORM_URN}!art6"
ART6_CPT = f"{NORM_URN}!art6_cpt"
ART7 = f"{NORM_URN}!art7"
ART7_CPT = f"{NORM_URN}!art7_cpt"
CAP2 = f"{NORM_URN}!tit2_cap2"
TIT2 = f"{NORM_URN}!tit2"

TEXT_1988 = (
    "Social rights are education, health, work, leisure, security, "
    "social security, protection of motherhood and childhood, and "
    "assistance to the destitute, in the manner prescribed by this Constitution."
)
TEXT_2000 = (
    "Social rights include education, health, work, housing, leisure, security, "
    "social security, protection of motherhood and childhood, and assistance "
    "to the destitute, in the manner prescribed by this Constitution."
)
TEXT_2010 = (
    "Social rights include education, health, food, work, housing, leisure, "
    "security, social security, protection of motherhood and childhood, and "
    "assistance to the destitute, in the manner prescribed by this Constitution."
)
TEXT_2015 = (
    "Social rights include education, health, food, work, housing, "
    "transportation, leisure, security, social security, protection of "
    "motherhood and childhood, and assistance to the destitute, in the manner "
    "prescribed by this Constitution."
)
TEXT_ART7_1988 = (
    "Rights of urban and rural workers include the following, in the manner "
    "prescribed by this Constitution."
)
TEXT_ART7_2013 = (
    "Rights of urban and rural workers include the following, with extended "
    "domestic workers' rights, in the manner prescribed by this Constitution."
)

RIGHTS_1999 = (
    "education", "health", "work", "leisure", "security", "social security",
    "protection of motherhood and childhood", "assistance to the destitute",
)

# Action ids are derived by ingestion from instrument short titles.
ACT_ENACT = "act:cf-1988:enactment"
ACT_CA26 = "act:ca-26-2000:art6-cpt:2000-02-15"
ACT_CA64 = "act:ca-64-2010:art6-cpt:2010-02-04"
ACT_CA72 = "act:ca-72-2013:art7-cpt:2013-04-02"
ACT_CA90 = "act:ca-90-2015:art6-cpt:2015-09-15"


def _document() -> dict:
    return {
        "format_version": 1,
        "norm": {
            "urn": NORM_URN,
            "title": "Brazilian Federal Constitution of 1988",
            "short_title": "CF/1988",
            "publication_date": "1988-10-05",
            "language": "pt",
            "aliases": ["Brazilian Constitution", "Constitution of 1988"],
        },
        "body": [
            {
                "fragment": "tit2",
                "type": "title",
                "label": "Title II",
                "heading": "Fundamental Rights and Guarantees",
                "children": [
                    {
                        "fragment": "tit2_cap2",
                        "type": "chapter",
                        "label": "Chapter II",
                        "heading": "On Social Rights",
                        "aliases": ["Chapter II"],
                        "children": [
                            {
                                "fragment": "art6",
                                "type": "article",
                                "label": "Art. 6",
                                "aliases": ["Article 6", "Art. 6"],
                                "children": [
                                    {
                                        "fragment": "art6_cpt",
                                        "type": "caput",
                                        "label": "Art. 6 (caput)",
                                        "text": TEXT_1988,
                                        "synthetic": True,
                                    }
                                ],
                            },
                            {
                                "fragment": "art7",
                                "type": "article",
                                "label": "Art. 7",
                                "aliases": ["Article 7", "Art. 7"],
                                "children": [
                                    {
                                        "fragment": "art7_cpt",
                                        "type": "caput",
                                        "label": "Art. 7 (caput)",
                                        "text": TEXT_ART7_1988,
                                        "synthetic": True,
                                        "children": [
                                            {
                                                "fragment": "art7_item1",
                                                "type": "item",
                                                "label": "Art. 7, I",
                                                "text": "Placeholder item one of the workers' rights list.",
                                                "synthetic": True,
                                            },
                                            {
                                                "fragment": "art7_item2",
                                                "type": "item",
                                                "label": "Art. 7, II",
                                                "text": "Placeholder item two of the workers' rights list.",
                                                "synthetic": True,
                                            },
                                        ],
                                    }
                                ],
                            },
                        ],
                    }
                ],
            }
        ],
    }


def _amendment(urn: str, title: str, short: str, published: str,
               target: str, enacted: str, effective: str, effect: str,
               text: str, synthetic: bool) -> dict:
    return {
        "format_version": 1,
        "instrument": {
            "urn": urn,
            "title": title,
            "short_title": short,
            "publication_date": published,
            "language": "pt",
        },
        "events": [
            {
                "action_type": "amendment",
                "source_provision": "art1_cpt",
                "source_label": "the caput of its Art. 1",
                "target": target,
                "enactment_date": enacted,
                "effective_date": effective,
                "effect": effect,
                "new_text": {"pt": text},
                "synthetic": {"pt": synthetic},
            }
        ],
    }


def _files() -> dict[str, dict]:
    return {
        "constitution_1988.satdoc.json": _document(),
        "ca_26_2000.satev.json": _amendment(
            CA26_URN, "Constitutional Amendment no. 26, of February 14, 2000",
            "CA 26/2000", "2000-02-14", ART6_CPT, "2000-02-14", "2000-02-15",
            'added the right to "housing"', TEXT_2000, synthetic=False,
        ),
        "ca_64_2010.satev.json": _amendment(
            CA64_URN, "Constitutional Amendment no. 64, of February 4, 2010",
            "CA 64/2010", "2010-02-04", ART6_CPT, "2010-02-04", "2010-02-04",
            'added "food"', TEXT_2010, synthetic=True,
        ),
        "ca_72_2013.satev.json": _amendment(
            CA72_URN, "Constitutional Amendment no. 72, of April 2, 2013",
            "CA 72/2013", "2013-04-02", ART7_CPT, "2013-04-02", "2013-04-02",
            "extended domestic workers' rights", TEXT_ART7_2013, synthetic=True,
        ),
        "ca_90_2015.satev.json": _amendment(
            CA90_URN, "Constitutional Amendment no. 90, of September 15, 2015",
            "CA 90/2015", "2015-09-15", ART6_CPT, "2015-09-15", "2015-09-15",
            'added "transportation"', TEXT_2015, synthetic=True,
        ),
        "themes_social_rights.satev.json": {
            "format_version": 1,
            "themes": [
                {
                    "label": "Social Rights",
                    "description": (
                        "Laws, articles, and provisions related to social rights, "
                        "including education, health, work, housing, and social protection."
                    ),
                    "members": [CAP2],
                }
            ],
        },
        "art6_original_en.satlang.json": {
            "format_version": 1,
            "norm": NORM_URN,
            "language": "en",
            "at": "1988-10-05",
            "synthetic": True,
            "units": [{"fragment": "art6_cpt", "text": TEXT_1988}],
        },
        "reference.sattruth.json": {
            "format_version": 1,
            "clock": "2024-01-02",
            "queries": [
                {
                    "id": "pit-art6-1999",
                    "pattern": "point_in_time",
                    "query": {"target": "art6",
                              "between": ["1999-01-01", "1999-12-31"]},
                    "expected_ctvs": [f"{ART6_CPT}@1988-10-05"],
                },
                {
                    "id": "pit-art6-2005",
                    "pattern": "point_in_time",
                    "query": {"target": "art6", "at": "2005-01-01"},
                    "expected_ctvs": [f"{ART6_CPT}@2000-02-15"],
                },
                {
                    "id": "impact-cap2-2010s",
                    "pattern": "impact_analysis",
                    "query": {"target": "tit2_cap2",
                              "between": ["2010-01-01", "2019-12-31"]},
                    "expected_actions": [
                        [ACT_CA64, ART6_CPT],
                        [ACT_CA72, ART7_CPT],
                        [ACT_CA90, ART6_CPT],
                    ],
                },
                {
                    "id": "prov-food-art6",
                    "pattern": "provenance",
                    "query": {"target": "art6", "term": "food"},
                    "expected_chains": [[ACT_CA26, ACT_CA64]],
                },
                {
                    "id": "prov-housing-art6",
                    "pattern": "provenance",
                    "query": {"target": "art6", "term": "housing"},
                    "expected_chains": [[ACT_ENACT, ACT_CA26]],
                },
            ],
        },
    }


def build_fixture_corpus(dest: str | Path) -> list[Path]:
    """Write the reference corpus into ``dest`` and return the file paths."""
    dest_dir = Path(dest)
    dest_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for name, payload in sorted(_files().items()):
        path = dest_dir / name
        path.write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        written.append(path)
    return written
