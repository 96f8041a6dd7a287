"""TREC qrels parsing, relevance binarization and bpref."""

from __future__ import annotations

from enum import Enum

import numpy as np

from ..errors import DuplicateJudgment, MalformedLine, NoRelevantJudgments, ScoreRangeError


class RelevanceSetting(str, Enum):
    FULL = "full"  # score >= 3 relevant, below judged non-relevant
    PARTIAL = "partial"  # score >= 1 relevant, 0 judged non-relevant

    @classmethod
    def parse(cls, value) -> RelevanceSetting:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown relevance setting {value!r} (use 'full' or 'partial')") from None


THRESHOLDS = {RelevanceSetting.FULL: 3, RelevanceSetting.PARTIAL: 1}

QRels = dict  # qid -> {docid: graded score 0..4}


def load_qrels(path) -> QRels:
    """``qid 0 docid score`` per line."""
    qrels: QRels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 4:
                raise MalformedLine(path, lineno, f"expected 4 fields, found {len(fields)}")
            qid, _, doc, score = fields
            try:
                value = int(score)
            except ValueError:
                raise MalformedLine(path, lineno, f"score {score!r} is not an integer") from None
            if not 0 <= value <= 4:
                raise ScoreRangeError(path, lineno, f"score {value} outside 0..4")
            judged = qrels.setdefault(qid, {})
            if doc in judged:
                raise DuplicateJudgment(path, lineno, f"duplicate judgment for ({qid}, {doc})")
            judged[doc] = value
    return qrels


def write_qrels(qrels: QRels, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for qid, judged in qrels.items():
            for doc, score in judged.items():
                fh.write(f"{qid} 0 {doc} {score}\n")


def binarize(qrels: QRels, setting) -> dict[str, tuple[set[str], set[str]]]:
    """Per query: (relevant, judged non-relevant).  Unjudged documents are in neither."""
    threshold = THRESHOLDS[RelevanceSetting.parse(setting)]
    out = {}
    for qid, judged in qrels.items():
        rel = {d for d, s in judged.items() if s >= threshold}
        out[qid] = (rel, set(judged) - rel)
    return out


def bpref(ranking, relevant: set[str], nonrelevant: set[str]) -> float:
    """Binary preference over a ranked list of doc ids.

    bpref = 1/|R| * sum over retrieved relevant r of
            (1 - min(#judged non-relevant above r, min(|R|,|N|)) / min(|R|,|N|))

    Following trec_eval, the count of non-relevant documents above r is capped
    at ``min(|R|, |N|)`` so every term stays in [0, 1].  With no judged
    non-relevant documents each retrieved relevant document contributes 1.
    """
    if not relevant:
        raise NoRelevantJudgments("bpref is undefined without relevant judgments")
    docs = ranking.doc_ids if hasattr(ranking, "doc_ids") else list(ranking)
    cap = min(len(relevant), len(nonrelevant))
    total = 0.0
    nonrel_above = 0
    for doc in docs:
        if doc in relevant:
            total += 1.0 if cap == 0 else 1.0 - min(nonrel_above, cap) / cap
        elif doc in nonrelevant:
            nonrel_above += 1
    return total / len(relevant)


def evaluate(rankings, qrels: QRels, setting) -> tuple[float, dict[str, float], list[str]]:
    """Macro-averaged bpref over queries with at least one relevant judgment.

    Returns (mean, per-query scores, skipped query ids).
    """
    sets = binarize(qrels, setting)
    by_qid = {r.query_id: r for r in rankings} if not isinstance(rankings, dict) else rankings
    per_query, skipped = {}, []
    for qid in sorted(sets):
        rel, nonrel = sets[qid]
        if not rel:
            skipped.append(qid)
            continue
        ranking = by_qid.get(qid)
        per_query[qid] = bpref(ranking.doc_ids if ranking is not None else [], rel, nonrel)
    mean = float(np.mean(list(per_query.values()))) if per_query else float("nan")
    return mean, per_query, skipped
