"""Indexed in-memory graph container with a diffable on-disk format.

Snapshots are newline-delimited JSON: one meta header (format version,
embedding config, frozen IDF statistics) followed by one record per node,
sorted by kind and id so that re-saving an unchanged store is
byte-identical. Indexes are never persisted; they are rebuilt on load.
Embeddings and IDF statistics *are* persisted so retrieval scores stay
reproducible across processes.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path

from .errors import DanglingReference, MalformedSnapshot, UnknownWork
from .model import (
    ActionNode,
    ActionType,
    Aspect,
    ComponentType,
    EMBEDDING_DIMENSION,
    LanguageVersion,
    TemporalVersion,
    TextUnit,
    ThemeNode,
    Violation,
    WorkId,
    WorkKind,
    WorkNode,
    validate_graph,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Unicode-aware lowercase word segmentation; no stemming."""
    return _TOKEN_RE.findall(text.casefold())


@dataclass
class GraphStore:
    """All graph nodes plus the index structures every query path uses.

    Mutations are only legal before :meth:`commit`; afterwards the store
    is treated as immutable and may be shared across threads.
    """

    works: dict[str, WorkNode] = field(default_factory=dict)
    ctvs: dict[str, TemporalVersion] = field(default_factory=dict)
    clvs: dict[str, LanguageVersion] = field(default_factory=dict)
    actions: dict[str, ActionNode] = field(default_factory=dict)
    themes: dict[str, ThemeNode] = field(default_factory=dict)
    units: dict[str, TextUnit] = field(default_factory=dict)

    embedding_dimension: int = EMBEDDING_DIMENSION
    # IDF statistics frozen at commit time (document frequency per token,
    # retrievable unit count, average unit length in tokens).
    df: dict[str, int] = field(default_factory=dict)
    n_units: int = 0
    avgdl: float = 0.0

    committed: bool = False

    # Derived indexes; rebuilt by _reindex, never persisted.
    children: dict[str, list[str]] = field(default_factory=dict, compare=False)
    versions: dict[str, list[str]] = field(default_factory=dict, compare=False)
    work_actions: dict[str, list[str]] = field(default_factory=dict, compare=False)
    term_index: dict[str, dict[str, int]] = field(default_factory=dict, compare=False)
    unit_len: dict[str, int] = field(default_factory=dict, compare=False)
    clvs_by_ctv: dict[str, dict[str, str]] = field(default_factory=dict, compare=False)
    alias_index: dict[str, set[str]] = field(default_factory=dict, compare=False)
    fragment_index: dict[str, set[str]] = field(default_factory=dict, compare=False)
    load_violations: list[Violation] = field(default_factory=list, compare=False)

    # -- mutation (ingestion only) -------------------------------------

    def _assert_mutable(self) -> None:
        if self.committed:
            raise RuntimeError("store is committed and read-only")

    def add_work(self, work: WorkNode) -> None:
        self._assert_mutable()
        if work.urn in self.works:
            raise ValueError(f"work {work.urn!r} already exists")
        self.works[work.urn] = work
        if work.parent is not None:
            siblings = self.children.setdefault(work.parent, [])
            siblings.append(work.urn)
            siblings.sort(key=lambda u: self.works[u].ordinal)
        for alias in work.id.aliases:
            self.alias_index.setdefault(alias, set()).add(work.urn)
        fragment = work.id.fragment
        if fragment:
            self.fragment_index.setdefault(fragment, set()).add(work.urn)

    def add_ctv(self, tv: TemporalVersion) -> None:
        self._assert_mutable()
        if tv.id in self.ctvs:
            raise ValueError(f"temporal version {tv.id!r} already exists")
        self.ctvs[tv.id] = tv
        chain = self.versions.setdefault(tv.work, [])
        chain.append(tv.id)
        chain.sort(key=lambda cid: self.ctvs[cid].validity.valid_start)

    def close_ctv(self, ctv: str, end: date, action: str) -> TemporalVersion:
        """Set the single permitted mutation: an open version's end date."""
        self._assert_mutable()
        old = self.ctvs[ctv]
        if not old.validity.is_open:
            raise ValueError(f"{ctv!r} is already closed")
        updated = replace(
            old,
            validity=replace(old.validity, valid_end=end),
            terminated_by=action,
        )
        self.ctvs[ctv] = updated
        return updated

    def add_clv(self, lv: LanguageVersion) -> None:
        self._assert_mutable()
        if lv.id in self.clvs:
            raise ValueError(f"language version {lv.id!r} already exists")
        self.clvs[lv.id] = lv
        self.clvs_by_ctv.setdefault(lv.temporal_version, {})[lv.language] = lv.id

    def add_action(self, action: ActionNode) -> None:
        self._assert_mutable()
        if action.id in self.actions:
            raise ValueError(f"action {action.id!r} already exists")
        self.actions[action.id] = action
        self._index_action(action)

    def replace_action(self, action: ActionNode) -> None:
        self._assert_mutable()
        self.actions[action.id] = action

    def add_unit(self, unit: TextUnit) -> None:
        self._assert_mutable()
        if unit.id in self.units:
            raise ValueError(f"text unit {unit.id!r} already exists")
        self.units[unit.id] = unit

    def add_theme(self, theme: ThemeNode) -> None:
        self._assert_mutable()
        if theme.id in self.themes:
            raise ValueError(f"theme {theme.id!r} already exists")
        self.themes[theme.id] = theme

    def _index_action(self, action: ActionNode) -> None:
        touched = set(action.targets)
        for cid in action.terminates + action.produces:
            tv = self.ctvs.get(cid)
            if tv is not None:
                touched.add(tv.work)
        for urn in touched:
            acts = self.work_actions.setdefault(urn, [])
            if action.id not in acts:
                acts.append(action.id)
                acts.sort(key=lambda aid: (self.actions[aid].effective_date, aid))

    # -- commit ---------------------------------------------------------

    def commit(self, embedder=None) -> None:
        """Freeze IDF statistics, embed every text unit, and seal the store."""
        self._assert_mutable()
        self._rebuild_text_index()
        self.df = {
            token: len(postings) for token, postings in sorted(self.term_index.items())
        }
        retrievable = [u for u in self.units.values() if u.retrievable]
        self.n_units = len(retrievable)
        total = sum(self.unit_len[u.id] for u in retrievable)
        self.avgdl = total / self.n_units if self.n_units else 0.0
        if embedder is None:
            from .retrieval import HashedTfidfEmbedder

            embedder = HashedTfidfEmbedder(self.embedding_dimension, self.df, self.n_units)
        for uid in sorted(self.units):
            unit = self.units[uid]
            self.units[uid] = replace(unit, embedding=tuple(embedder.embed(unit.text)))
        self.committed = True

    def _rebuild_text_index(self) -> None:
        self.term_index = {}
        self.unit_len = {}
        for uid in sorted(self.units):
            tokens = tokenize(self.units[uid].text)
            self.unit_len[uid] = len(tokens)
            for token in tokens:
                self.term_index.setdefault(token, {}).setdefault(uid, 0)
                self.term_index[token][uid] += 1

    def _reindex(self) -> None:
        self.children = {}
        self.versions = {}
        self.work_actions = {}
        self.clvs_by_ctv = {}
        self.alias_index = {}
        self.fragment_index = {}
        for work in self.works.values():
            if work.parent is not None:
                self.children.setdefault(work.parent, []).append(work.urn)
            for alias in work.id.aliases:
                self.alias_index.setdefault(alias, set()).add(work.urn)
            if work.id.fragment:
                self.fragment_index.setdefault(work.id.fragment, set()).add(work.urn)
        for siblings in self.children.values():
            siblings.sort(key=lambda u: self.works[u].ordinal)
        for tv in self.ctvs.values():
            self.versions.setdefault(tv.work, []).append(tv.id)
        for chain in self.versions.values():
            chain.sort(key=lambda cid: self.ctvs[cid].validity.valid_start)
        for lv in self.clvs.values():
            self.clvs_by_ctv.setdefault(lv.temporal_version, {})[lv.language] = lv.id
        for action in self.actions.values():
            self._index_action(action)
        self._rebuild_text_index()

    # -- read API ---------------------------------------------------------

    def work(self, urn: str) -> WorkNode:
        try:
            return self.works[urn]
        except KeyError:
            raise UnknownWork(urn) from None

    def versions_of(self, urn: str) -> list[TemporalVersion]:
        """All temporal versions of a work, ascending by valid_start."""
        if urn not in self.works:
            raise UnknownWork(urn)
        return [self.ctvs[cid] for cid in self.versions.get(urn, ())]

    def content_clv(self, ctv: str, language: str) -> LanguageVersion | None:
        lv_id = self.clvs_by_ctv.get(ctv, {}).get(language)
        return self.clvs[lv_id] if lv_id else None

    def norm_of(self, urn: str) -> WorkNode:
        return self.work(self.work(urn).id.norm_urn)

    def primary_language(self, urn: str) -> str:
        return self.norm_of(urn).meta("language", "en") or "en"

    def descendants(self, urn: str) -> list[str]:
        """The work itself plus its whole subtree, depth-first in ordinal order."""
        self.work(urn)
        out: list[str] = []
        stack = [urn]
        while stack:
            current = stack.pop()
            out.append(current)
            stack.extend(reversed(self.children.get(current, ())))
        return out

    def node_counts(self) -> dict[str, int]:
        return {
            "works": len(self.works),
            "temporal_versions": len(self.ctvs),
            "language_versions": len(self.clvs),
            "actions": len(self.actions),
            "themes": len(self.themes),
            "text_units": len(self.units),
        }


# -- serialization -----------------------------------------------------------

_KIND_ORDER = ["work", "ctv", "clv", "action", "theme", "unit"]


def _dump_date(d: date | None) -> str | None:
    return d.isoformat() if d is not None else None


def _record_for_work(work: WorkNode) -> dict:
    return {
        "kind": "work",
        "id": work.urn,
        "aliases": list(work.id.aliases),
        "work_kind": work.kind.value,
        "component_type": work.component_type.value,
        "parent": work.parent,
        "ordinal": work.ordinal,
        "metadata": {k: v for k, v in work.metadata},
    }


def _record_for_ctv(tv: TemporalVersion) -> dict:
    return {
        "kind": "ctv",
        "id": tv.id,
        "work": tv.work,
        "valid_start": tv.validity.valid_start.isoformat(),
        "valid_end": _dump_date(tv.validity.valid_end),
        "aggregates": list(tv.aggregates),
        "produced_by": tv.produced_by,
        "terminated_by": tv.terminated_by,
    }


def _record_for_clv(lv: LanguageVersion) -> dict:
    return {
        "kind": "clv",
        "id": lv.id,
        "temporal_version": lv.temporal_version,
        "language": lv.language,
        "text_unit": lv.text_unit,
    }


def _record_for_action(action: ActionNode) -> dict:
    return {
        "kind": "action",
        "id": action.id,
        "action_type": action.action_type.value,
        "enactment_date": action.enactment_date.isoformat(),
        "effective_date": action.effective_date.isoformat(),
        "source_provision": action.source_provision,
        "terminates": list(action.terminates),
        "produces": list(action.produces),
        "description_unit": action.description_unit,
        "targets": list(action.targets),
        "effect": action.effect,
        "instrument": action.instrument,
        "instrument_title": action.instrument_title,
        "instrument_short": action.instrument_short,
    }


def _record_for_theme(theme: ThemeNode) -> dict:
    return {
        "kind": "theme",
        "id": theme.id,
        "label": theme.label,
        "description_unit": theme.description_unit,
        "members": list(theme.members),
    }


def _record_for_unit(unit: TextUnit) -> dict:
    return {
        "kind": "unit",
        "id": unit.id,
        "aspect": unit.aspect.value,
        "owner": unit.owner,
        "language": unit.language,
        "text": unit.text,
        "embedding": list(unit.embedding),
        "synthetic": unit.synthetic,
    }


def save(store: GraphStore, path: str | Path) -> None:
    """Write the store as sorted NDJSON; load(save(s)) == s node-for-node."""
    records: list[tuple[int, str, dict]] = []
    for work in store.works.values():
        records.append((_KIND_ORDER.index("work"), work.urn, _record_for_work(work)))
    for tv in store.ctvs.values():
        records.append((_KIND_ORDER.index("ctv"), tv.id, _record_for_ctv(tv)))
    for lv in store.clvs.values():
        records.append((_KIND_ORDER.index("clv"), lv.id, _record_for_clv(lv)))
    for action in store.actions.values():
        records.append((_KIND_ORDER.index("action"), action.id, _record_for_action(action)))
    for theme in store.themes.values():
        records.append((_KIND_ORDER.index("theme"), theme.id, _record_for_theme(theme)))
    for unit in store.units.values():
        records.append((_KIND_ORDER.index("unit"), unit.id, _record_for_unit(unit)))
    records.sort(key=lambda item: (item[0], item[1]))

    meta = {
        "kind": "meta",
        "format_version": FORMAT_VERSION,
        "embedding": {"name": "hashed_tfidf", "dimension": store.embedding_dimension},
        "idf": {
            "n_units": store.n_units,
            "avgdl": store.avgdl,
            "df": {k: store.df[k] for k in sorted(store.df)},
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, ensure_ascii=False, sort_keys=True, separators=(",", ":")))
        fh.write("\n")
        for _, _, record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def _parse_date(value, *, path: str, line: int, optional: bool = False) -> date | None:
    if value is None and optional:
        return None
    try:
        return date.fromisoformat(value)
    except (TypeError, ValueError):
        raise MalformedSnapshot(f"bad date {value!r}", path=path, line=line) from None


def _load_work(rec: dict, path: str, line: int) -> WorkNode:
    return WorkNode(
        id=WorkId(rec["id"], tuple(rec.get("aliases", ()))),
        kind=WorkKind(rec["work_kind"]),
        component_type=ComponentType(rec["component_type"]),
        parent=rec.get("parent"),
        ordinal=int(rec.get("ordinal", 0)),
        metadata=tuple(sorted((k, v) for k, v in rec.get("metadata", {}).items())),
    )


def load(path: str | Path) -> GraphStore:
    """Read a snapshot, rebuild indexes, and report invariant violations.

    Raises MalformedSnapshot on parse failures and DanglingReference when
    a record cites an id no record defines. Softer invariant breaches are
    collected on ``store.load_violations`` and logged, not raised.
    """
    from .model import ValidityInterval  # local to keep import block tight

    store = GraphStore()
    spath = str(path)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MalformedSnapshot(f"invalid JSON ({exc.msg})", path=spath, line=lineno) from None
            kind = rec.get("kind")
            try:
                if kind == "meta":
                    if rec.get("format_version") != FORMAT_VERSION:
                        raise MalformedSnapshot(
                            f"unsupported format_version {rec.get('format_version')!r}",
                            path=spath, line=lineno,
                        )
                    store.embedding_dimension = int(rec["embedding"]["dimension"])
                    idf = rec.get("idf", {})
                    store.df = {str(k): int(v) for k, v in idf.get("df", {}).items()}
                    store.n_units = int(idf.get("n_units", 0))
                    store.avgdl = float(idf.get("avgdl", 0.0))
                elif kind == "work":
                    work = _load_work(rec, spath, lineno)
                    store.works[work.urn] = work
                elif kind == "ctv":
                    store.ctvs[rec["id"]] = TemporalVersion(
                        id=rec["id"],
                        work=rec["work"],
                        validity=ValidityInterval(
                            _parse_date(rec["valid_start"], path=spath, line=lineno),
                            _parse_date(rec.get("valid_end"), path=spath, line=lineno, optional=True),
                        ),
                        aggregates=tuple(rec.get("aggregates", ())),
                        produced_by=rec.get("produced_by", ""),
                        terminated_by=rec.get("terminated_by"),
                    )
                elif kind == "clv":
                    store.clvs[rec["id"]] = LanguageVersion(
                        id=rec["id"],
                        temporal_version=rec["temporal_version"],
                        language=rec["language"],
                        text_unit=rec["text_unit"],
                    )
                elif kind == "action":
                    store.actions[rec["id"]] = ActionNode(
                        id=rec["id"],
                        action_type=ActionType(rec["action_type"]),
                        enactment_date=_parse_date(rec["enactment_date"], path=spath, line=lineno),
                        effective_date=_parse_date(rec["effective_date"], path=spath, line=lineno),
                        source_provision=rec.get("source_provision"),
                        terminates=tuple(rec.get("terminates", ())),
                        produces=tuple(rec.get("produces", ())),
                        description_unit=rec.get("description_unit", ""),
                        targets=tuple(rec.get("targets", ())),
                        effect=rec.get("effect"),
                        instrument=rec.get("instrument"),
                        instrument_title=rec.get("instrument_title"),
                        instrument_short=rec.get("instrument_short"),
                    )
                elif kind == "theme":
                    store.themes[rec["id"]] = ThemeNode(
                        id=rec["id"],
                        label=rec["label"],
                        description_unit=rec["description_unit"],
                        members=tuple(rec.get("members", ())),
                    )
                elif kind == "unit":
                    store.units[rec["id"]] = TextUnit(
                        id=rec["id"],
                        aspect=Aspect(rec["aspect"]),
                        owner=rec["owner"],
                        language=rec["language"],
                        text=rec["text"],
                        embedding=tuple(float(x) for x in rec.get("embedding", ())),
                        synthetic=bool(rec.get("synthetic", False)),
                    )
                else:
                    raise MalformedSnapshot(f"unknown record kind {kind!r}", path=spath, line=lineno)
            except MalformedSnapshot:
                raise
            except (KeyError, ValueError, TypeError) as exc:
                raise MalformedSnapshot(f"bad {kind!r} record: {exc}", path=spath, line=lineno) from None

    _check_references(store)
    store._reindex()
    store.committed = True
    store.load_violations = validate_graph(store)
    for violation in store.load_violations:
        logger.warning("snapshot invariant violation: %s", violation)
    return store


def _check_references(store: GraphStore) -> None:
    for work in store.works.values():
        if work.parent is not None and work.parent not in store.works:
            raise DanglingReference(work.urn, work.parent)
    for tv in store.ctvs.values():
        if tv.work not in store.works:
            raise DanglingReference(tv.id, tv.work)
        for cid in tv.aggregates:
            if cid not in store.ctvs:
                raise DanglingReference(tv.id, cid)
        if tv.produced_by and tv.produced_by not in store.actions:
            raise DanglingReference(tv.id, tv.produced_by)
        if tv.terminated_by and tv.terminated_by not in store.actions:
            raise DanglingReference(tv.id, tv.terminated_by)
    for lv in store.clvs.values():
        if lv.temporal_version not in store.ctvs:
            raise DanglingReference(lv.id, lv.temporal_version)
        if lv.text_unit not in store.units:
            raise DanglingReference(lv.id, lv.text_unit)
    for action in store.actions.values():
        for cid in action.terminates + action.produces:
            if cid not in store.ctvs:
                raise DanglingReference(action.id, cid)
        if action.description_unit and action.description_unit not in store.units:
            raise DanglingReference(action.id, action.description_unit)
        if action.source_provision and action.source_provision not in store.works:
            raise DanglingReference(action.id, action.source_provision)
        for target in action.targets:
            if target not in store.works:
                raise DanglingReference(action.id, target)
    for theme in store.themes.values():
        for member in theme.members:
            if member not in store.works:
                raise DanglingReference(theme.id, member)
        if theme.description_unit not in store.units:
            raise DanglingReference(theme.id, theme.description_unit)
