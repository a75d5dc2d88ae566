"""NVD JSON 1.1 feed ingestion into canonical labeled vulnerability records.

Records keep the CVE identifier, publication date, description text, CWE
weakness ids, reduced (vendor, product) platform pairs, and the qualitative
CVSS v2/v3 base-metric components.  A built snapshot is deduplicated,
year-filtered, and sorted by (published, id); that order is the canonical
row order for every downstream matrix.
"""

from __future__ import annotations

import csv
import datetime as dt
import gzip
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import binio

CVE_ID_RE = re.compile(r"CVE-\d{4}-\d{4,}")

REJECT_PREFIX = "** REJECT **"

# NVD-documented categorical value sets for the CVSS base metrics.
V2_VALUES = {
    "access_vector": {"LOCAL", "ADJACENT_NETWORK", "NETWORK"},
    "access_complexity": {"HIGH", "MEDIUM", "LOW"},
    "authentication": {"MULTIPLE", "SINGLE", "NONE"},
    "confidentiality": {"NONE", "PARTIAL", "COMPLETE"},
    "integrity": {"NONE", "PARTIAL", "COMPLETE"},
    "availability": {"NONE", "PARTIAL", "COMPLETE"},
}
V3_VALUES = {
    "attack_vector": {"NETWORK", "ADJACENT_NETWORK", "LOCAL", "PHYSICAL"},
    "attack_complexity": {"LOW", "HIGH"},
    "privileges_required": {"NONE", "LOW", "HIGH"},
    "user_interaction": {"NONE", "REQUIRED"},
    "scope": {"UNCHANGED", "CHANGED"},
    "confidentiality": {"NONE", "LOW", "HIGH"},
    "integrity": {"NONE", "LOW", "HIGH"},
    "availability": {"NONE", "LOW", "HIGH"},
}


class FeedError(ValueError):
    """Whole-feed problem: malformed JSON or missing CVE_Items."""


class EmptySnapshotError(ValueError):
    """No records remain after filtering."""


@dataclass(frozen=True)
class CvssV2Label:
    access_vector: str
    access_complexity: str
    authentication: str
    confidentiality: str
    integrity: str
    availability: str
    base_score: float
    user_interaction_required: bool | None = None
    obtain_privileges: bool | None = None

    def __post_init__(self):
        for name, allowed in V2_VALUES.items():
            value = getattr(self, name)
            if value not in allowed:
                raise ValueError(f"cvss_v2.{name}: {value!r} not in {sorted(allowed)}")
        if not 0.0 <= self.base_score <= 10.0:
            raise ValueError(f"cvss_v2.base_score {self.base_score} outside [0, 10]")


@dataclass(frozen=True)
class CvssV3Label:
    attack_vector: str
    attack_complexity: str
    privileges_required: str
    user_interaction: str
    scope: str
    confidentiality: str
    integrity: str
    availability: str
    base_score: float

    def __post_init__(self):
        for name, allowed in V3_VALUES.items():
            value = getattr(self, name)
            if value not in allowed:
                raise ValueError(f"cvss_v3.{name}: {value!r} not in {sorted(allowed)}")
        if not 0.0 <= self.base_score <= 10.0:
            raise ValueError(f"cvss_v3.base_score {self.base_score} outside [0, 10]")


@dataclass(frozen=True)
class CveRecord:
    """One vulnerability with its labels.

    cpes holds reduced (vendor, product) pairs; cwes may contain
    placeholder entries like "NVD-CWE-noinfo", kept verbatim.
    """

    id: str
    published: dt.date
    description: str
    cwes: tuple[str, ...] = ()
    cpes: tuple[tuple[str, str], ...] = ()
    cvss_v2: CvssV2Label | None = None
    cvss_v3: CvssV3Label | None = None

    def __post_init__(self):
        if not CVE_ID_RE.fullmatch(self.id):
            raise ValueError(f"bad CVE identifier {self.id!r}")
        if not self.description.strip():
            raise ValueError("empty description")
        if len(set(self.cwes)) != len(self.cwes):
            raise ValueError(f"{self.id}: duplicate CWE entries")

    @property
    def year(self) -> int:
        return self.published.year

    @property
    def day_of_year(self) -> int:
        return self.published.timetuple().tm_yday


@dataclass(frozen=True)
class SkipDiagnostic:
    item_index: int
    cve_id: str | None
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class Snapshot:
    """Immutable record collection in canonical (published, id) order."""

    records: tuple[CveRecord, ...]
    source_files: tuple[tuple[str, str], ...] = ()
    created: dt.date = dt.date(1999, 1, 1)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def years(self) -> list[int]:
        return sorted({r.year for r in self.records})

    def year_range(self) -> tuple[int, int]:
        ys = self.years
        return ys[0], ys[-1]


def _english_description(cve_obj: dict) -> str | None:
    entries = cve_obj.get("description", {}).get("description_data", [])
    for entry in entries:
        if entry.get("lang") == "en" and "value" in entry:
            return entry["value"]
    return None


def _collect_cwes(cve_obj: dict) -> tuple[str, ...]:
    seen: list[str] = []
    for block in cve_obj.get("problemtype", {}).get("problemtype_data", []):
        for entry in block.get("description", []):
            value = entry.get("value", "").strip()
            if value and value not in seen:
                seen.append(value)
    return tuple(seen)


def _collect_cpes(configurations: dict) -> tuple[tuple[str, str], ...]:
    """Walk configuration nodes and reduce each CPE 2.3 URI to (vendor, product)."""
    pairs: list[tuple[str, str]] = []

    def walk(node: dict) -> None:
        for match in node.get("cpe_match", []):
            uri = match.get("cpe23Uri", "")
            parts = uri.split(":")
            if len(parts) >= 5 and parts[0] == "cpe":
                pair = (parts[3], parts[4])
                if pair not in pairs:
                    pairs.append(pair)
        for child in node.get("children", []):
            walk(child)

    for node in configurations.get("nodes", []):
        walk(node)
    return tuple(pairs)


def _map_v2(impact: dict) -> CvssV2Label | None:
    base = impact.get("baseMetricV2")
    if not base:
        return None
    c = base.get("cvssV2", {})
    obtain_flags = [base.get(k) for k in
                    ("obtainAllPrivilege", "obtainUserPrivilege", "obtainOtherPrivilege")]
    present = [f for f in obtain_flags if f is not None]
    return CvssV2Label(
        access_vector=c.get("accessVector", ""),
        access_complexity=c.get("accessComplexity", ""),
        authentication=c.get("authentication", ""),
        confidentiality=c.get("confidentialityImpact", ""),
        integrity=c.get("integrityImpact", ""),
        availability=c.get("availabilityImpact", ""),
        base_score=float(c.get("baseScore", -1.0)),
        user_interaction_required=base.get("userInteractionRequired"),
        obtain_privileges=any(present) if present else None,
    )


def _map_v3(impact: dict) -> CvssV3Label | None:
    base = impact.get("baseMetricV3")
    if not base:
        return None
    c = base.get("cvssV3", {})
    return CvssV3Label(
        attack_vector=c.get("attackVector", ""),
        attack_complexity=c.get("attackComplexity", ""),
        privileges_required=c.get("privilegesRequired", ""),
        user_interaction=c.get("userInteraction", ""),
        scope=c.get("scope", ""),
        confidentiality=c.get("confidentialityImpact", ""),
        integrity=c.get("integrityImpact", ""),
        availability=c.get("availabilityImpact", ""),
        base_score=float(c.get("baseScore", -1.0)),
    )


def _parse_published(raw: str) -> dt.date:
    # NVD stamps look like "2020-01-08T19:15Z"
    return dt.datetime.strptime(raw[:10], "%Y-%m-%d").date()


def parse_feed(feed_bytes: bytes) -> tuple[list[CveRecord], list[SkipDiagnostic]]:
    """Parse one NVD JSON 1.1 feed document.

    Items with missing ids, missing/empty/rejected descriptions, or
    malformed dates are skipped with a diagnostic; parsing continues.
    Malformed JSON or a missing CVE_Items array raises FeedError.
    """
    if feed_bytes[:2] == b"\x1f\x8b":
        feed_bytes = gzip.decompress(feed_bytes)
    try:
        doc = json.loads(feed_bytes)
    except json.JSONDecodeError as exc:
        raise FeedError(f"malformed JSON at byte offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("CVE_Items"), list):
        raise FeedError("document has no CVE_Items array")

    records: list[CveRecord] = []
    diagnostics: list[SkipDiagnostic] = []
    for index, item in enumerate(doc["CVE_Items"]):
        cve_obj = item.get("cve", {})
        cve_id = cve_obj.get("CVE_data_meta", {}).get("ID")
        if not cve_id:
            diagnostics.append(SkipDiagnostic(index, None, "missing_id"))
            continue
        if not CVE_ID_RE.fullmatch(cve_id):
            diagnostics.append(SkipDiagnostic(index, cve_id, "bad_id"))
            continue
        description = _english_description(cve_obj)
        if description is None:
            diagnostics.append(SkipDiagnostic(index, cve_id, "no_english_description"))
            continue
        if description.startswith(REJECT_PREFIX):
            diagnostics.append(SkipDiagnostic(index, cve_id, "rejected"))
            continue
        if not description.strip():
            diagnostics.append(SkipDiagnostic(index, cve_id, "empty_description"))
            continue
        try:
            published = _parse_published(item.get("publishedDate", ""))
        except ValueError:
            diagnostics.append(SkipDiagnostic(index, cve_id, "bad_published_date",
                                              str(item.get("publishedDate"))))
            continue
        impact = item.get("impact", {})
        try:
            cvss_v2 = _map_v2(impact)
        except ValueError as exc:
            diagnostics.append(SkipDiagnostic(index, cve_id, "bad_cvss_v2", str(exc)))
            cvss_v2 = None
        try:
            cvss_v3 = _map_v3(impact)
        except ValueError as exc:
            diagnostics.append(SkipDiagnostic(index, cve_id, "bad_cvss_v3", str(exc)))
            cvss_v3 = None
        records.append(CveRecord(
            id=cve_id,
            published=published,
            description=description,
            cwes=_collect_cwes(cve_obj),
            cpes=_collect_cpes(item.get("configurations", {})),
            cvss_v2=cvss_v2,
            cvss_v3=cvss_v3,
        ))
    return records, diagnostics


def load_feed_file(path: str | Path) -> tuple[list[CveRecord], list[SkipDiagnostic]]:
    """parse_feed over a plain or gzipped feed file."""
    return parse_feed(Path(path).read_bytes())


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_snapshot(records: Iterable[CveRecord],
                   year_range: tuple[int, int],
                   source_files: Iterable[tuple[str, str]] = ()) -> Snapshot:
    """Dedup by id (last parsed wins), filter to year_range, sort canonically.

    `created` is derived from the newest retained record so rebuilding from
    the same inputs yields an identical snapshot.
    """
    lo, hi = year_range
    by_id: dict[str, CveRecord] = {}
    for record in records:
        by_id[record.id] = record
    kept = [r for r in by_id.values() if lo <= r.year <= hi]
    if not kept:
        raise EmptySnapshotError(f"no records in years {lo}-{hi}")
    kept.sort(key=lambda r: (r.published, r.id))
    return Snapshot(records=tuple(kept),
                    source_files=tuple(source_files),
                    created=max(r.published for r in kept))


def split(snapshot: Snapshot, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle split into sorted (train, validation) row-index arrays."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction {train_fraction} outside (0, 1)")
    n = len(snapshot)
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(n * train_fraction))
    if n >= 2:
        n_train = min(max(n_train, 1), n - 1)
    train = np.sort(perm[:n_train])
    validation = np.sort(perm[n_train:])
    return train, validation


SNAPSHOT_MAGIC = "VSNP"
SNAPSHOT_VERSION = 1

_V2_FIELDS = ("access_vector", "access_complexity", "authentication",
              "confidentiality", "integrity", "availability")
_V3_FIELDS = ("attack_vector", "attack_complexity", "privileges_required",
              "user_interaction", "scope", "confidentiality", "integrity",
              "availability")


def _write_optional_bool(fh, value: bool | None) -> None:
    binio.write_u32(fh, 2 if value is None else int(value))


def _read_optional_bool(fh) -> bool | None:
    code = binio.read_u32(fh)
    return None if code == 2 else bool(code)


def save_snapshot(snapshot: Snapshot, path: str | Path) -> None:
    with open(path, "wb") as fh:
        binio.write_magic(fh, SNAPSHOT_MAGIC, SNAPSHOT_VERSION)
        write_snapshot_to(fh, snapshot)


def load_snapshot(path: str | Path) -> Snapshot:
    with open(path, "rb") as fh:
        binio.read_magic(fh, SNAPSHOT_MAGIC, SNAPSHOT_VERSION)
        return read_snapshot_from(fh)


def write_snapshot_to(fh, snapshot: Snapshot) -> None:
    binio.write_i64(fh, snapshot.created.toordinal())
    binio.write_u32(fh, len(snapshot.source_files))
    for name, digest in snapshot.source_files:
        binio.write_str(fh, name)
        binio.write_str(fh, digest)
    binio.write_u32(fh, len(snapshot.records))
    for r in snapshot.records:
        binio.write_str(fh, r.id)
        binio.write_i64(fh, r.published.toordinal())
        binio.write_str(fh, r.description)
        binio.write_str_list(fh, list(r.cwes))
        binio.write_u32(fh, len(r.cpes))
        for vendor, product in r.cpes:
            binio.write_str(fh, vendor)
            binio.write_str(fh, product)
        binio.write_u32(fh, 1 if r.cvss_v2 else 0)
        if r.cvss_v2:
            for name in _V2_FIELDS:
                binio.write_str(fh, getattr(r.cvss_v2, name))
            binio.write_f64(fh, r.cvss_v2.base_score)
            _write_optional_bool(fh, r.cvss_v2.user_interaction_required)
            _write_optional_bool(fh, r.cvss_v2.obtain_privileges)
        binio.write_u32(fh, 1 if r.cvss_v3 else 0)
        if r.cvss_v3:
            for name in _V3_FIELDS:
                binio.write_str(fh, getattr(r.cvss_v3, name))
            binio.write_f64(fh, r.cvss_v3.base_score)


def read_snapshot_from(fh) -> Snapshot:
    created = dt.date.fromordinal(binio.read_i64(fh))
    sources = tuple((binio.read_str(fh), binio.read_str(fh))
                    for _ in range(binio.read_u32(fh)))
    records = []
    for _ in range(binio.read_u32(fh)):
        cve_id = binio.read_str(fh)
        published = dt.date.fromordinal(binio.read_i64(fh))
        description = binio.read_str(fh)
        cwes = tuple(binio.read_str_list(fh))
        cpes = tuple((binio.read_str(fh), binio.read_str(fh))
                     for _ in range(binio.read_u32(fh)))
        cvss_v2 = None
        if binio.read_u32(fh):
            values = {name: binio.read_str(fh) for name in _V2_FIELDS}
            score = binio.read_f64(fh)
            uir = _read_optional_bool(fh)
            op = _read_optional_bool(fh)
            cvss_v2 = CvssV2Label(base_score=score,
                                  user_interaction_required=uir,
                                  obtain_privileges=op, **values)
        cvss_v3 = None
        if binio.read_u32(fh):
            values = {name: binio.read_str(fh) for name in _V3_FIELDS}
            cvss_v3 = CvssV3Label(base_score=binio.read_f64(fh), **values)
        records.append(CveRecord(id=cve_id, published=published,
                                 description=description, cwes=cwes,
                                 cpes=cpes, cvss_v2=cvss_v2, cvss_v3=cvss_v3))
    return Snapshot(records=tuple(records), source_files=sources, created=created)


def export_audit_csv(snapshot: Snapshot, path: str | Path) -> None:
    """(id, year, labels) audit listing."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "year", "cwes", "cpes", "cvss_v2", "cvss_v3"])
        for r in snapshot.records:
            v2 = ""
            if r.cvss_v2:
                v2 = "/".join(getattr(r.cvss_v2, f) for f in _V2_FIELDS)
            v3 = ""
            if r.cvss_v3:
                v3 = "/".join(getattr(r.cvss_v3, f) for f in _V3_FIELDS)
            writer.writerow([
                r.id, r.year, ";".join(r.cwes),
                ";".join(f"{v}:{p}" for v, p in r.cpes), v2, v3,
            ])


def snapshot_to_feed_item(record: CveRecord) -> dict:
    """Re-serialize a record as an NVD 1.1 feed item (round-trip testing aid)."""
    item: dict = {
        "cve": {
            "CVE_data_meta": {"ID": record.id},
            "problemtype": {"problemtype_data": [
                {"description": [{"lang": "en", "value": c} for c in record.cwes]}
            ]},
            "description": {"description_data": [
                {"lang": "en", "value": record.description}
            ]},
        },
        "configurations": {"nodes": [
            {"operator": "OR", "cpe_match": [
                {"vulnerable": True,
                 "cpe23Uri": f"cpe:2.3:a:{vendor}:{product}:*:*:*:*:*:*:*:*"}
                for vendor, product in record.cpes
            ]}
        ]},
        "impact": {},
        "publishedDate": record.published.strftime("%Y-%m-%dT00:00Z"),
    }
    if record.cvss_v2:
        v2 = record.cvss_v2
        base: dict = {"cvssV2": {
            "accessVector": v2.access_vector,
            "accessComplexity": v2.access_complexity,
            "authentication": v2.authentication,
            "confidentialityImpact": v2.confidentiality,
            "integrityImpact": v2.integrity,
            "availabilityImpact": v2.availability,
            "baseScore": v2.base_score,
        }}
        if v2.user_interaction_required is not None:
            base["userInteractionRequired"] = v2.user_interaction_required
        if v2.obtain_privileges is not None:
            base["obtainAllPrivilege"] = v2.obtain_privileges
            base["obtainUserPrivilege"] = False
            base["obtainOtherPrivilege"] = False
        item["impact"]["baseMetricV2"] = base
    if record.cvss_v3:
        v3 = record.cvss_v3
        item["impact"]["baseMetricV3"] = {"cvssV3": {
            "attackVector": v3.attack_vector,
            "attackComplexity": v3.attack_complexity,
            "privilegesRequired": v3.privileges_required,
            "userInteraction": v3.user_interaction,
            "scope": v3.scope,
            "confidentialityImpact": v3.confidentiality,
            "integrityImpact": v3.integrity,
            "availabilityImpact": v3.availability,
            "baseScore": v3.base_score,
        }}
    return item


def records_to_feed_bytes(records: Iterable[CveRecord]) -> bytes:
    """Wrap records in a minimal NVD 1.1 feed document."""
    doc = {
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_Items": [snapshot_to_feed_item(r) for r in records],
    }
    return json.dumps(doc, sort_keys=True).encode("utf-8")
