"""Corpus and query files: one JSON object per line with ``id`` and ``latex``."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import CorpusError, DuplicateIdError, InputError
from .parser import Ast, parse_formula


def read_records(path) -> list[tuple[str, str]]:
    """Return ``(id, latex)`` pairs in file order; ``#`` lines are comments."""
    records: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                obj = json.loads(stripped)
                formula_id, latex = obj["id"], obj["latex"]
                if not isinstance(formula_id, str) or not isinstance(latex, str):
                    raise InputError("'id' and 'latex' must be strings")
            except (json.JSONDecodeError, KeyError, TypeError, InputError) as exc:
                raise CorpusError(lineno, None, exc) from exc
            if formula_id in seen:
                raise DuplicateIdError(formula_id, lineno)
            seen.add(formula_id)
            records.append((formula_id, latex))
    return records


def load_corpus(path) -> list[tuple[str, Ast]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        linenos = [i for i, line in enumerate(fh, start=1) if line.strip() and not line.strip().startswith("#")]
    for lineno, (formula_id, latex) in zip(linenos, read_records(path)):
        try:
            out.append((formula_id, parse_formula(latex)))
        except InputError as exc:
            raise CorpusError(lineno, formula_id, exc) from exc
    return out


def write_records(records, path, header: str | None = None) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for formula_id, latex in records:
            fh.write(json.dumps({"id": formula_id, "latex": latex}, ensure_ascii=False) + "\n")
