"""Shared fixture builders: synthetic NVD feed items and word-vector files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

V2_AV = ["LOCAL", "ADJACENT_NETWORK", "NETWORK"]
V2_AC = ["HIGH", "MEDIUM", "LOW"]
V2_AU = ["MULTIPLE", "SINGLE", "NONE"]
V2_CIA = ["NONE", "PARTIAL", "COMPLETE"]
V3_AV = ["NETWORK", "ADJACENT_NETWORK", "LOCAL", "PHYSICAL"]
V3_AC = ["LOW", "HIGH"]
V3_PR = ["NONE", "LOW", "HIGH"]
V3_UI = ["NONE", "REQUIRED"]
V3_S = ["UNCHANGED", "CHANGED"]
V3_CIA = ["NONE", "LOW", "HIGH"]

VENDORS = [("microsoft", "windows"), ("apache", "tomcat"), ("oracle", "mysql"),
           ("google", "chrome"), ("mozilla", "firefox"), ("cisco", "ios"),
           ("ibm", "websphere"), ("adobe", "acrobat")]

TEMPLATES = [
    "Buffer overflow in {product} {version} allows remote attackers to "
    "execute arbitrary code via a crafted {noun}.",
    "Cross-site scripting vulnerability in {product} {version} allows "
    "remote attackers to inject arbitrary web script via the {noun} parameter.",
    "SQL injection vulnerability in {product} before {version} allows "
    "remote authenticated users to execute arbitrary SQL commands via the {noun} field.",
    "{product} {version} allows local users to gain privileges via a "
    "crafted {noun} file.",
    "Use-after-free vulnerability in {product} {version} allows attackers "
    "to cause a denial of service via a malformed {noun}.",
    "Improper input validation in {product} {version} allows remote "
    "attackers to read sensitive information from process memory via a {noun} request.",
]

NOUNS = ["packet", "header", "cookie", "query", "image", "document",
         "certificate", "message", "url", "archive"]

CWES = ["CWE-787", "CWE-79", "CWE-89", "CWE-269", "CWE-416", "CWE-20",
        "NVD-CWE-noinfo"]


def make_feed_item(cve_id: str, published: str, description: str,
                   cwes: list[str] | None = None,
                   cpes: list[tuple[str, str]] | None = None,
                   v2: dict | None = None, v3: dict | None = None) -> dict:
    """One NVD JSON 1.1 CVE item."""
    item: dict = {
        "cve": {
            "data_type": "CVE",
            "data_format": "MITRE",
            "data_version": "4.0",
            "CVE_data_meta": {"ID": cve_id, "ASSIGNER": "cve@mitre.org"},
            "problemtype": {"problemtype_data": [
                {"description": [{"lang": "en", "value": c} for c in (cwes or [])]}
            ]},
            "references": {"reference_data": []},
            "description": {"description_data": [
                {"lang": "en", "value": description}
            ]},
        },
        "configurations": {
            "CVE_data_version": "4.0",
            "nodes": [{
                "operator": "OR",
                "cpe_match": [
                    {"vulnerable": True,
                     "cpe23Uri": f"cpe:2.3:a:{v}:{p}:1.0:*:*:*:*:*:*:*"}
                    for v, p in (cpes or [])
                ],
            }],
        },
        "impact": {},
        "publishedDate": published,
        "lastModifiedDate": published,
    }
    if v2 is not None:
        item["impact"]["baseMetricV2"] = v2
    if v3 is not None:
        item["impact"]["baseMetricV3"] = v3
    return item


def make_v2(av="NETWORK", ac="LOW", au="NONE",
            c="PARTIAL", i="PARTIAL", a="PARTIAL",
            score=7.5, uir=False, obtain=False) -> dict:
    return {
        "cvssV2": {
            "version": "2.0",
            "accessVector": av, "accessComplexity": ac, "authentication": au,
            "confidentialityImpact": c, "integrityImpact": i,
            "availabilityImpact": a, "baseScore": score,
        },
        "severity": "HIGH",
        "obtainAllPrivilege": obtain,
        "obtainUserPrivilege": False,
        "obtainOtherPrivilege": False,
        "userInteractionRequired": uir,
    }


def make_v3(av="NETWORK", ac="LOW", pr="NONE", ui="NONE", s="UNCHANGED",
            c="HIGH", i="HIGH", a="HIGH", score=9.8) -> dict:
    return {
        "cvssV3": {
            "version": "3.1",
            "attackVector": av, "attackComplexity": ac,
            "privilegesRequired": pr, "userInteraction": ui, "scope": s,
            "confidentialityImpact": c, "integrityImpact": i,
            "availabilityImpact": a, "baseScore": score,
        },
        "exploitabilityScore": 3.9,
        "impactScore": 5.9,
    }


def wrap_feed(items: list[dict]) -> bytes:
    return json.dumps({
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_data_numberOfCVEs": str(len(items)),
        "CVE_data_timestamp": "2021-01-01T00:00Z",
        "CVE_Items": items,
    }).encode("utf-8")


def synthetic_feed(n: int, seed: int = 0,
                   years: tuple[int, int] = (2015, 2020)) -> bytes:
    """n labeled items with varied years, descriptions, and CVSS labels."""
    rng = np.random.default_rng(seed)
    items = []
    for k in range(n):
        year = int(rng.integers(years[0], years[1] + 1))
        month = int(rng.integers(1, 13))
        day = int(rng.integers(1, 28))
        vendor, product = VENDORS[int(rng.integers(0, len(VENDORS)))]
        template = TEMPLATES[int(rng.integers(0, len(TEMPLATES)))]
        version = f"{int(rng.integers(1, 9))}.{int(rng.integers(0, 9))}"
        description = template.format(product=product.capitalize(),
                                      version=version,
                                      noun=NOUNS[int(rng.integers(0, len(NOUNS)))])
        v2 = make_v2(av=V2_AV[int(rng.integers(0, 3))],
                     ac=V2_AC[int(rng.integers(0, 3))],
                     au=V2_AU[int(rng.integers(0, 3))],
                     c=V2_CIA[int(rng.integers(0, 3))],
                     i=V2_CIA[int(rng.integers(0, 3))],
                     a=V2_CIA[int(rng.integers(0, 3))],
                     score=float(np.round(rng.uniform(1, 10), 1)),
                     uir=bool(rng.integers(0, 2)),
                     obtain=bool(rng.integers(0, 2)))
        v3 = None
        if year >= 2016:
            v3 = make_v3(av=V3_AV[int(rng.integers(0, 4))],
                         ac=V3_AC[int(rng.integers(0, 2))],
                         pr=V3_PR[int(rng.integers(0, 3))],
                         ui=V3_UI[int(rng.integers(0, 2))],
                         s=V3_S[int(rng.integers(0, 2))],
                         c=V3_CIA[int(rng.integers(0, 3))],
                         i=V3_CIA[int(rng.integers(0, 3))],
                         a=V3_CIA[int(rng.integers(0, 3))],
                         score=float(np.round(rng.uniform(1, 10), 1)))
        items.append(make_feed_item(
            cve_id=f"CVE-{year}-{1000 + k}",
            published=f"{year}-{month:02d}-{day:02d}T12:00Z",
            description=description,
            cwes=[CWES[int(rng.integers(0, len(CWES)))]],
            cpes=[(vendor, product)],
            v2=v2, v3=v3,
        ))
    return wrap_feed(items)


def write_vec_file(path: Path, tokens: list[str], dim: int, seed: int = 0) -> None:
    """Seeded random unit-ish vectors in the text .vec format."""
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(tokens)} {dim}\n")
        for token in tokens:
            vec = rng.normal(size=dim)
            vec /= np.linalg.norm(vec)
            fh.write(token + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


FIXTURE_VOCAB = sorted({
    w for template in TEMPLATES for w in
    template.replace("{product}", "x").replace("{version}", "x")
    .replace("{noun}", "x").lower()
    .replace(".", " ").replace(",", " ").split()
} | {p for _, p in VENDORS} | set(NOUNS) |
    {"cross-site", "scripting", "use-after-free", "<version>"})


@pytest.fixture(scope="session")
def vec_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("vectors") / "mini.vec"
    write_vec_file(path, FIXTURE_VOCAB, dim=24, seed=7)
    return path


@pytest.fixture(scope="session")
def feed_200(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("feeds") / "feed200.json"
    path.write_bytes(synthetic_feed(200, seed=3))
    return path
