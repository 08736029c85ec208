"""Overlay benchmark fixtures and report aggregation.

The synthetic fixture has two stages: one page carrying n elements at load
(half armored payloads needing read overlays, half editable regions
needing compose affordances), and one page that inserts the same mix
after load.  Pages are deterministic for a given seed, and every payload
decrypts under a password key derived from that seed, so an unlocked
agent can verify them.

Timing records land on the agent's bench intake endpoint as JSON lines;
:func:`aggregate` turns them into per-(browser, stage, n) cells with mean
and p95 per-element times, refusing to aggregate cells with fewer than
ten runs.
"""
from __future__ import annotations

import json
import math
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import InsufficientRuns, MgError
from .keystore import Keystore
from .package_format import armor_encode, assemble_package
from .schemes.password import PasswordScheme

MIN_RUNS = 10
DEFAULT_AGENT_ORIGIN = "http://127.0.0.1:8747"


@dataclass(frozen=True)
class BenchFixtureSpec:
    n: int  # elements per stage; half read payloads, half compose targets
    seed: int = 0
    dynamic_delay_ms: int = 250
    agent_origin: str = DEFAULT_AGENT_ORIGIN

    def __post_init__(self) -> None:
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError("n must be an even number >= 2")


@dataclass(frozen=True)
class BenchCell:
    browser_label: str
    stage: int
    n: int
    runs: int
    mean_ms_per_element: float
    p95_ms_per_element: float
    mean_total_ms: float

    def to_dict(self) -> dict:
        return {
            "browser_label": self.browser_label,
            "stage": self.stage,
            "n": self.n,
            "runs": self.runs,
            "mean_ms_per_element": self.mean_ms_per_element,
            "p95_ms_per_element": self.p95_ms_per_element,
            "mean_total_ms": self.mean_total_ms,
        }


@dataclass
class BenchReport:
    cells: list[BenchCell] = field(default_factory=list)
    regressions: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "cells": [cell.to_dict() for cell in self.cells],
            "regressions": self.regressions,
        }


_PAGE_TEMPLATE = """<!doctype html>
<html>
<head>
<meta charset="utf-8">
<meta name="mg-bench" content="stage={stage};n={n}">
<title>overlay bench stage {stage} (n={n})</title>
<style>
  body {{ font-family: sans-serif; margin: 1rem; }}
  .bench-item {{ margin: 4px 0; }}
  textarea {{ width: 30rem; height: 3rem; }}
</style>
</head>
<body>
<h1>overlay bench: stage {stage}, n={n}</h1>
<div id="bench-root">
{body}
</div>
{script}
<script src="{agent_origin}/frontend.js" defer></script>
</body>
</html>
"""

_STAGE2_SCRIPT = """<script>
var BENCH_PAYLOADS = {payloads_json};
var BENCH_COMPOSE_COUNT = {compose_count};
window.addEventListener("load", function () {{
  setTimeout(function () {{
    var root = document.getElementById("bench-root");
    performance.mark("bench-dynamic-insert");
    for (var i = 0; i < BENCH_PAYLOADS.length; i++) {{
      var div = document.createElement("div");
      div.className = "bench-item bench-payload";
      div.textContent = BENCH_PAYLOADS[i];
      root.appendChild(div);
    }}
    for (var j = 0; j < BENCH_COMPOSE_COUNT; j++) {{
      var area = document.createElement("textarea");
      area.className = "bench-item bench-compose";
      root.appendChild(area);
    }}
  }}, {delay_ms});
}});
</script>"""


def fixture_password(seed: int) -> str:
    return f"bench-{seed}"


def generate_fixture_pages(
    spec: BenchFixtureSpec,
    out_dir: str | Path,
    *,
    keystore: Optional[Keystore] = None,
) -> dict:
    """Write stage1.html, stage2.html, and fixture-info.json.

    When a keystore is given, the fixture's password key system is saved
    into it so the serving agent can decrypt every generated payload.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(spec.seed).randbytes
    scheme = PasswordScheme()
    record = scheme.create(
        {"label": f"bench-fixture-{spec.seed}", "password": fixture_password(spec.seed),
         "stored": "true"},
        rng=rng,
        iterations=1000,
    )
    system = scheme.load(record)

    half = spec.n // 2
    armors = []
    for i in range(half):
        plaintext = f"<p>benchmark payload {i}</p>".encode()
        armors.append(armor_encode(assemble_package(system.encrypt([], plaintext, rng=rng))))

    payload_divs = "\n".join(
        f'<div class="bench-item bench-payload">{armor}</div>' for armor in armors
    )
    compose_areas = "\n".join(
        '<textarea class="bench-item bench-compose"></textarea>' for _ in range(half)
    )

    stage1 = _PAGE_TEMPLATE.format(
        stage=1, n=spec.n, body=payload_divs + "\n" + compose_areas, script="",
        agent_origin=spec.agent_origin,
    )
    stage2 = _PAGE_TEMPLATE.format(
        stage=2, n=spec.n, body="",
        script=_STAGE2_SCRIPT.format(
            payloads_json=json.dumps(armors),
            compose_count=half,
            delay_ms=spec.dynamic_delay_ms,
        ),
        agent_origin=spec.agent_origin,
    )
    (out / "stage1.html").write_text(stage1, encoding="utf-8")
    (out / "stage2.html").write_text(stage2, encoding="utf-8")

    info = {
        "n": spec.n,
        "seed": spec.seed,
        "dynamic_delay_ms": spec.dynamic_delay_ms,
        "agent_origin": spec.agent_origin,
        "password": fixture_password(spec.seed),
        "label": record.label,
        "fingerprint": record.fingerprint.hex(),
        "payload_count": half,
        "compose_count": half,
    }
    (out / "fixture-info.json").write_text(json.dumps(info, indent=2), encoding="utf-8")

    if keystore is not None:
        keystore.save_system(record)
    return info


def load_results(path: str | Path) -> list[dict]:
    records = []
    text = Path(path).read_text(encoding="utf-8")
    for line_number, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise MgError(f"bad bench record on line {line_number}: {exc}") from None
    return records


def _p95(values: list[float]) -> float:
    ordered = sorted(values)
    rank = math.ceil(0.95 * len(ordered))
    return ordered[rank - 1]


def aggregate(records: list[dict], *, min_runs: int = MIN_RUNS) -> BenchReport:
    cells: dict[tuple, list[dict]] = {}
    for record in records:
        key = (record["browser_label"], int(record["stage"]), int(record["n"]))
        cells.setdefault(key, []).append(record)

    report = BenchReport()
    for (browser, stage, n), group in sorted(cells.items()):
        if len(group) < min_runs:
            raise InsufficientRuns(
                f"cell (browser={browser!r}, stage={stage}, n={n}) has "
                f"{len(group)} runs; {min_runs} required"
            )
        per_element = [float(r["per_element_ms"]) for r in group]
        totals = [float(r["total_ms"]) for r in group]
        report.cells.append(
            BenchCell(
                browser_label=browser,
                stage=stage,
                n=n,
                runs=len(group),
                mean_ms_per_element=statistics.fmean(per_element),
                p95_ms_per_element=_p95(per_element),
                mean_total_ms=statistics.fmean(totals),
            )
        )
    report.regressions = check_thresholds(report.cells)
    return report


def check_thresholds(
    cells: list[BenchCell],
    *,
    static_variation_max: float = 3.0,
    dynamic_n1000_max_ms: float = 100.0,
) -> list[str]:
    """Flag regressions against the expected performance envelope.

    Static overlay cost should be roughly flat in n (mean varies by less
    than 3x across cell sizes); dynamic overlaying at n=1000 should stay
    under 100 ms per element on a current desktop browser.
    """
    regressions = []
    by_browser: dict[str, list[BenchCell]] = {}
    for cell in cells:
        by_browser.setdefault(cell.browser_label, []).append(cell)
    for browser, group in sorted(by_browser.items()):
        static_means = [c.mean_ms_per_element for c in group if c.stage == 1]
        if len(static_means) >= 2:
            low, high = min(static_means), max(static_means)
            if low > 0 and high / low >= static_variation_max:
                regressions.append(
                    f"{browser}: static per-element mean varies {high / low:.1f}x "
                    f"across n (limit {static_variation_max}x)"
                )
        for cell in group:
            if cell.stage == 2 and cell.n == 1000 \
                    and cell.mean_ms_per_element > dynamic_n1000_max_ms:
                regressions.append(
                    f"{browser}: dynamic n=1000 mean {cell.mean_ms_per_element:.1f} ms "
                    f"per element exceeds {dynamic_n1000_max_ms} ms"
                )
    return regressions
