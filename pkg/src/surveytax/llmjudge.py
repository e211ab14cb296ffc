"""Zero-/few-shot taxonomy classification through a chat-completion transport.

Transports are pluggable: a generic HTTPS chat-completions client for live
runs and a record/replay fixture store for deterministic CI. Parse failures
are scored as wrong answers, never resampled.
"""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .corpus import PaperRecord, Taxonomy
from .errors import TransportError, ValidationError
from .metrics import accuracy, weighted_f1

DEFAULT_REPETITIONS = 5

# The verbatim instruction wording lives here (and in MANUAL.md); prompts are
# fully deterministic given a spec and a record.
INSTRUCTION = (
    "You are an expert in research on large language models. Assign the survey "
    "paper below to exactly one category from the taxonomy. Reply with the "
    "category name only."
)

ENV_BASE_URL = "SURVEYTAX_LLM_BASE_URL"
ENV_MODEL = "SURVEYTAX_LLM_MODEL"
ENV_TOKEN = "SURVEYTAX_LLM_TOKEN"


@dataclass(frozen=True)
class PromptSpec:
    """Class list, instruction, and optional per-class hint keywords."""

    classes: tuple[str, ...]
    instruction: str = INSTRUCTION
    hints: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ValidationError("prompt classes must be unique")
        unknown = set(self.hints) - set(self.classes)
        if unknown:
            raise ValidationError(f"hints for unknown classes: {sorted(unknown)}")

    @classmethod
    def from_taxonomy(cls, taxonomy: Taxonomy, with_hints: bool) -> "PromptSpec":
        return cls(
            classes=taxonomy.classes,
            hints=dict(taxonomy.hints) if with_hints else {},
        )


def build_prompt(spec: PromptSpec, record: PaperRecord) -> str:
    """Instruction + one class line each + optional hints + title and summary."""
    lines = [spec.instruction, "", "Categories:"]
    lines.extend(f"- {name}" for name in spec.classes)
    if spec.hints:
        lines.append("")
        lines.append("Category hints (keywords):")
        for name in spec.classes:
            if name in spec.hints:
                lines.append(f"- {name}: {', '.join(spec.hints[name])}")
    lines.extend(["", f"Title: {record.title}", f"Summary: {record.summary}", "", "Category:"])
    return "\n".join(lines)


def parse_class(response: str, classes: Sequence[str]) -> int | None:
    """Earliest case-insensitive class-name match; longer name wins at the same
    position, then the lower class id. None when nothing matches."""
    haystack = response.lower()
    best: tuple[int, int, int] | None = None  # (start, -len, class_id)
    for class_id, name in enumerate(classes):
        start = haystack.find(name.lower())
        if start < 0:
            continue
        key = (start, -len(name), class_id)
        if best is None or key < best:
            best = key
    return best[2] if best is not None else None


class Transport(Protocol):
    def complete(self, prompt: str, paper_id: str, repetition: int) -> str: ...


class HttpChatTransport:
    """Minimal chat-completions client; endpoint/model/token come from env by default."""

    def __init__(
        self,
        base_url: str | None = None,
        model: str | None = None,
        token: str | None = None,
        timeout: float = 60.0,
    ):
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL, "")).rstrip("/")
        self.model = model or os.environ.get(ENV_MODEL, "")
        self.token = token or os.environ.get(ENV_TOKEN, "")
        self.timeout = timeout
        if not self.base_url or not self.model:
            raise ValidationError(
                f"live transport needs {ENV_BASE_URL} and {ENV_MODEL} set"
            )

    def complete(self, prompt: str, paper_id: str, repetition: int) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions",
                headers=headers,
                json={
                    "model": self.model,
                    "messages": [{"role": "user", "content": prompt}],
                },
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except Exception as exc:  # noqa: BLE001 - normalized into the domain error
            raise TransportError(f"chat completion failed for {paper_id!r}: {exc}") from exc


_UNSAFE_ID = re.compile(r"[^A-Za-z0-9._-]")


def _fixture_name(paper_id: str, repetition: int) -> str:
    return f"{_UNSAFE_ID.sub('_', paper_id)}__r{repetition}.json"


class ReplayTransport:
    """Replays recorded transcripts, keyed by (paper_id, repetition)."""

    def __init__(self, fixtures_dir: str | Path):
        self.fixtures_dir = Path(fixtures_dir)
        if not self.fixtures_dir.is_dir():
            raise ValidationError(f"fixture directory {self.fixtures_dir} does not exist")

    def complete(self, prompt: str, paper_id: str, repetition: int) -> str:
        path = self.fixtures_dir / _fixture_name(paper_id, repetition)
        if not path.exists():
            raise TransportError(f"no recorded fixture for ({paper_id!r}, rep {repetition})")
        payload = json.loads(path.read_text("utf-8"))
        return payload["response"]


class RecordingTransport:
    """Wraps a live transport and writes one replayable JSON file per call."""

    def __init__(self, inner: Transport, fixtures_dir: str | Path):
        self.inner = inner
        self.fixtures_dir = Path(fixtures_dir)
        self.fixtures_dir.mkdir(parents=True, exist_ok=True)

    def complete(self, prompt: str, paper_id: str, repetition: int) -> str:
        response = self.inner.complete(prompt, paper_id, repetition)
        payload = {
            "paper_id": paper_id,
            "repetition": repetition,
            "prompt": prompt,
            "response": response,
        }
        path = self.fixtures_dir / _fixture_name(paper_id, repetition)
        path.write_text(
            json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return response


@dataclass(frozen=True)
class Transcript:
    paper_id: str
    repetition: int
    prompt: str
    response: str | None  # None when the transport gave up
    parsed_class: int | None  # None = parse failure, scored as wrong


@dataclass(frozen=True)
class JudgeRun:
    transcripts: tuple[Transcript, ...]
    per_repetition: tuple[dict[str, float], ...]
    aggregate: dict[str, dict[str, float]]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "per_repetition": list(self.per_repetition),
            "aggregate": self.aggregate,
            "transcripts": [
                {
                    "paper_id": t.paper_id,
                    "repetition": t.repetition,
                    "prompt": t.prompt,
                    "response": t.response,
                    "parsed_class": t.parsed_class,
                }
                for t in self.transcripts
            ],
        }


def _mean_std(values: Sequence[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=float)
    return {
        "mean": float(arr.mean()),
        "std": float(np.std(arr, ddof=1)) if len(arr) > 1 else 0.0,
    }


def judge(
    records: Sequence[PaperRecord],
    spec: PromptSpec,
    transport: Transport,
    taxonomy: Taxonomy,
    repetitions: int = DEFAULT_REPETITIONS,
    max_retries: int = 2,
    max_in_flight: int = 1,
) -> JudgeRun:
    """Classify every record `repetitions` times and score each repetition.

    Transport failures are retried up to max_retries, then recorded as a
    parse failure. Requests may run concurrently (max_in_flight > 1); results
    are keyed by (paper_id, repetition) so assembly order never changes.
    """
    if not records:
        raise ValidationError("judge needs at least one record")
    if repetitions < 1:
        raise ValidationError("repetitions must be >= 1")
    unknown = set(spec.classes) - set(taxonomy.classes)
    if unknown:
        raise ValidationError(f"prompt classes outside the taxonomy: {sorted(unknown)}")

    def one_call(record: PaperRecord, rep: int) -> Transcript:
        prompt = build_prompt(spec, record)
        response: str | None = None
        for _ in range(max_retries + 1):
            try:
                response = transport.complete(prompt, record.paper_id, rep)
                break
            except TransportError:
                continue
        parsed = None
        if response is not None:
            spec_idx = parse_class(response, spec.classes)
            if spec_idx is not None:
                parsed = taxonomy.id_of(spec.classes[spec_idx])
        return Transcript(
            paper_id=record.paper_id,
            repetition=rep,
            prompt=prompt,
            response=response,
            parsed_class=parsed,
        )

    jobs = [(record, rep) for rep in range(repetitions) for record in records]
    if max_in_flight > 1:
        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            results = list(pool.map(lambda job: one_call(*job), jobs))
    else:
        results = [one_call(record, rep) for record, rep in jobs]
    by_key = {(t.paper_id, t.repetition): t for t in results}

    truth = [taxonomy.id_of(r.taxonomy_label) for r in records]
    transcripts: list[Transcript] = []
    per_rep: list[dict[str, float]] = []
    for rep in range(repetitions):
        preds = []
        for record in records:
            t = by_key[(record.paper_id, rep)]
            transcripts.append(t)
            # -1 never equals a true class id: parse failures count as wrong.
            preds.append(t.parsed_class if t.parsed_class is not None else -1)
        per_rep.append(
            {"accuracy": accuracy(preds, truth), "weighted_f1": weighted_f1(preds, truth)}
        )

    aggregate = {
        "accuracy": _mean_std([m["accuracy"] for m in per_rep]),
        "weighted_f1": _mean_std([m["weighted_f1"] for m in per_rep]),
    }
    return JudgeRun(
        transcripts=tuple(transcripts),
        per_repetition=tuple(per_rep),
        aggregate=aggregate,
    )


def write_judge_report(run: JudgeRun, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(run.to_json_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
