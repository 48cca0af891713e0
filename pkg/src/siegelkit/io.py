"""Serialization, schema versioning, and the reproducibility manifest.

Artifacts carry a schema tag ("name/version"); loaders refuse anything else
with :class:`SchemaMismatch` rather than guessing a migration.  Exact values
are serialized as text ("p/q", "(a+b*sqrt(d))/c"); floats are emitted with
``repr`` so round-trips are bit-exact.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io as _io
import json
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, TextIO, Union

import numpy as np

from .bounds import ConstantConfig, format_config
from .cf import format_exact, parse_exact
from .errors import SchemaMismatch
from .germs import Germ, LiftMap
from .renorm import RenormReport
from .scan import ConstructionState, ScanRow
from .surd import to_float

__all__ = [
    "SCAN_SCHEMA",
    "emit_scan_csv",
    "load_scan_csv",
    "scan_rows_json",
    "renorm_report_json",
    "load_renorm_report",
    "construction_states_json",
    "load_construction_states",
    "germ_json",
    "load_germ",
    "lift_json",
    "load_lift",
    "RunManifest",
    "invocation_digest",
    "file_sha256",
]

SCAN_SCHEMA = "scanrow/1"
SCAN_HEADER = ["alpha_text", "alpha_float", "r_lower", "r_upper",
               "method", "iterations", "wall_time_ms"]


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_scan_csv(rows: Sequence[ScanRow], fh: TextIO,
                  comments: Optional[Dict[str, str]] = None) -> None:
    """Schema-stamped CSV; comment lines first, then the mandatory header."""
    fh.write(f"# schema: {SCAN_SCHEMA}\n")
    for key, val in (comments or {}).items():
        fh.write(f"# {key}: {val}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SCAN_HEADER)
    for r in rows:
        writer.writerow([r.alpha_text, _fmt(r.alpha_float), _fmt(r.r_lower),
                         _fmt(r.r_upper), r.method, str(r.iterations),
                         str(r.wall_time_ms)])


def load_scan_csv(fh: TextIO) -> List[ScanRow]:
    schema_seen = None
    rows: List[ScanRow] = []
    header_seen = False
    for line in fh:
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("schema:"):
                schema_seen = body.split(":", 1)[1].strip()
            continue
        cells = next(csv.reader([line]))
        if not header_seen:
            if cells != SCAN_HEADER:
                raise SchemaMismatch(f"bad header: {cells}")
            if schema_seen != SCAN_SCHEMA:
                raise SchemaMismatch(
                    f"schema {schema_seen!r} needs explicit migration to {SCAN_SCHEMA!r}")
            header_seen = True
            continue
        if not cells:
            continue
        rows.append(ScanRow(alpha_text=cells[0], alpha_float=float(cells[1]),
                            r_lower=float(cells[2]), r_upper=float(cells[3]),
                            method=cells[4], iterations=int(cells[5]),
                            wall_time_ms=int(cells[6])))
    if not header_seen:
        raise SchemaMismatch("missing header")
    return rows


def scan_rows_json(rows: Sequence[ScanRow]) -> str:
    return json.dumps({"schema": SCAN_SCHEMA,
                       "rows": [dataclasses.asdict(r) for r in rows]},
                      indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

RENORM_SCHEMA = "renorm-report/1"


def renorm_report_json(rep: RenormReport, extra: Optional[dict] = None) -> str:
    data = dataclasses.asdict(rep)
    data["schema"] = RENORM_SCHEMA
    if extra:
        data.update(extra)
    return json.dumps(data, indent=1, sort_keys=True)


def load_renorm_report(text: str) -> RenormReport:
    data = json.loads(text)
    if data.pop("schema", None) != RENORM_SCHEMA:
        raise SchemaMismatch("not a renorm report")
    fields = {f.name for f in dataclasses.fields(RenormReport)}
    return RenormReport(**{k: v for k, v in data.items() if k in fields})


CONSTRUCTION_SCHEMA = "construction/1"


def construction_states_json(states: Sequence[ConstructionState]) -> str:
    items = []
    for st in states:
        items.append({
            "stage": st.stage,
            "theta": format_exact(st.theta),
            "theta_float": to_float(st.theta),
            "rho": st.rho,
            "rho_sched": st.rho_sched,
            "rho_target": st.rho_target,
            "interval": [f"{st.interval[0].numerator}/{st.interval[0].denominator}",
                         f"{st.interval[1].numerator}/{st.interval[1].denominator}"],
            "deriv_gaps": list(st.deriv_gaps),
            "thresholds": list(st.thresholds),
            "k_chosen": st.k_chosen,
            "diagnostics": st.diagnostics,
        })
    return json.dumps({"schema": CONSTRUCTION_SCHEMA, "states": items},
                      indent=1, sort_keys=True)


def load_construction_states(text: str) -> List[ConstructionState]:
    data = json.loads(text)
    if data.get("schema") != CONSTRUCTION_SCHEMA:
        raise SchemaMismatch("not a construction artifact")
    out = []
    for item in data["states"]:
        lo, hi = item["interval"]
        out.append(ConstructionState(
            stage=item["stage"], theta=parse_exact(item["theta"]),
            rho=item["rho"], rho_sched=item["rho_sched"],
            rho_target=item["rho_target"],
            interval=(Fraction(lo), Fraction(hi)),
            deriv_gaps=list(item["deriv_gaps"]),
            thresholds=list(item["thresholds"]),
            k_chosen=item["k_chosen"], diagnostics=item.get("diagnostics", "")))
    return out


# ---------------------------------------------------------------------------
# germs and lifts
# ---------------------------------------------------------------------------

GERM_SCHEMA = "germ/1"


def _alpha_text(alpha) -> Union[str, float]:
    if isinstance(alpha, float):
        return alpha
    return format_exact(alpha)


def germ_json(g: Germ) -> str:
    return json.dumps({
        "schema": GERM_SCHEMA,
        "alpha": _alpha_text(g.alpha),
        "coeffs": [[c.real, c.imag] for c in g.coeffs],
        "tail_bound": g.tail_bound,
    }, indent=1, sort_keys=True)


def load_germ(text: str) -> Germ:
    data = json.loads(text)
    if data.get("schema") != GERM_SCHEMA:
        raise SchemaMismatch("not a germ artifact")
    alpha = data["alpha"]
    if isinstance(alpha, str):
        alpha = parse_exact(alpha)
    coeffs = np.array([complex(re, im) for re, im in data["coeffs"]],
                      dtype=np.complex128)
    return Germ(alpha=alpha, coeffs=coeffs, tail_bound=float(data["tail_bound"]))


LIFT_SCHEMA = "lift/1"


def lift_json(L: LiftMap) -> str:
    return json.dumps({
        "schema": LIFT_SCHEMA,
        "alpha": L.alpha,
        "alpha_exact": None if L.alpha_exact is None else format_exact(L.alpha_exact),
        "h_coeffs": [[c.real, c.imag] for c in L.h_coeffs],
    }, indent=1, sort_keys=True)


def load_lift(text: str) -> LiftMap:
    data = json.loads(text)
    if data.get("schema") != LIFT_SCHEMA:
        raise SchemaMismatch("not a lift artifact")
    h = np.array([complex(re, im) for re, im in data["h_coeffs"]],
                 dtype=np.complex128)
    ae = data.get("alpha_exact")
    return LiftMap(alpha=float(data["alpha"]), h_coeffs=h,
                   alpha_exact=None if ae is None else parse_exact(ae))


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


_EXECUTION_FLAGS = ("--workers", "--out", "--manifest", "--trace", "--plot-data")


def _semantic_cmdline(cmdline: Sequence[str]) -> List[str]:
    """Drop execution-only flags (worker count, output paths) so the digest
    names the work, not the scheduling or where results land."""
    out: List[str] = []
    skip = False
    for tok in cmdline:
        if skip:
            skip = False
            continue
        if tok in _EXECUTION_FLAGS:
            skip = True
            continue
        if any(tok.startswith(f + "=") for f in _EXECUTION_FLAGS):
            continue
        out.append(tok)
    return out


def invocation_digest(cmdline: Sequence[str], cfg: ConstantConfig, seed: int) -> str:
    """Identity of an invocation; timestamps, worker counts and output hashes
    stay outside so reruns with the same manifest reproduce identical bytes."""
    payload = json.dumps({"cmdline": _semantic_cmdline(cmdline),
                          "config": format_config(cfg),
                          "seed": seed}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclasses.dataclass
class RunManifest:
    cmdline: List[str]
    config: Dict[str, float]
    seed: int
    timestamp: str
    outputs: Dict[str, str]
    digest: str

    @classmethod
    def build(cls, cmdline: Sequence[str], cfg: ConstantConfig, seed: int,
              outputs: Dict[str, str]) -> "RunManifest":
        cfg_map = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}
        return cls(cmdline=list(cmdline), config=cfg_map, seed=seed,
                   timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                   outputs=dict(outputs),
                   digest=invocation_digest(cmdline, cfg, seed))

    def to_json(self) -> str:
        return json.dumps({"schema": "manifest/1", **dataclasses.asdict(self)},
                          indent=1, sort_keys=True)
