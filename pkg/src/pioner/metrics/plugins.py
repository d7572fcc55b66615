"""External scorer plugins (METEOR, SPICE, RefPAC-S, CLIP-Score live here).

The wire contract is line-delimited JSON over a subprocess pipe: one
request object ``{"id", "candidate", "references"}`` per record on stdin,
one response object ``{"id", "score"}`` per record on stdout.
"""
from __future__ import annotations

import json
import math
import shlex
import subprocess
from typing import Callable, List, Protocol, Sequence, Tuple

from ..errors import PluginError
from .records import EvalRecord


class ScorerPlugin(Protocol):
    name: str

    def score(self, records: Sequence[EvalRecord]) -> Tuple[float, List[float]]:
        """Return (corpus score, per-record scores aligned with records)."""


class CallableScorer:
    """Wraps an in-process scoring function as a plugin."""

    def __init__(self, name: str, fn: Callable[[Sequence[EvalRecord]], Tuple[float, List[float]]]):
        self.name = name
        self._fn = fn

    def score(self, records: Sequence[EvalRecord]) -> Tuple[float, List[float]]:
        return self._fn(records)


class SubprocessScorer:
    def __init__(
        self,
        name: str,
        command: str,
        score_range: Tuple[float, float] = (0.0, 1.0),
        timeout: float = 300.0,
    ):
        self.name = name
        self.command = shlex.split(command)
        self.score_range = score_range
        self.timeout = timeout

    def score(self, records: Sequence[EvalRecord]) -> Tuple[float, List[float]]:
        payload = "".join(
            json.dumps(
                {"id": r.id, "candidate": r.candidate, "references": list(r.references)}
            )
            + "\n"
            for r in records
        )
        try:
            proc = subprocess.run(
                self.command,
                input=payload.encode("utf-8"),
                capture_output=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as e:
            raise PluginError(f"plugin {self.name!r}: {e}") from e
        if proc.returncode != 0:
            raise PluginError(
                f"plugin {self.name!r} exited {proc.returncode}: "
                f"{proc.stderr.decode('utf-8', 'replace')[:500]}"
            )
        by_id = {}
        for line in proc.stdout.decode("utf-8").splitlines():
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                by_id[str(obj["id"])] = float(obj["score"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise PluginError(f"plugin {self.name!r} wrote a bad response line: {line!r}") from e
        scores = []
        lo, hi = self.score_range
        for r in records:
            if r.id not in by_id:
                raise PluginError(f"plugin {self.name!r} returned no score for record {r.id!r}")
            s = by_id[r.id]
            if not math.isfinite(s) or not lo <= s <= hi:
                raise PluginError(
                    f"plugin {self.name!r} score {s} for {r.id!r} outside [{lo}, {hi}]"
                )
            scores.append(s)
        return sum(scores) / len(scores) if scores else 0.0, scores
