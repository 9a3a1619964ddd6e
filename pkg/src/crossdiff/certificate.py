"""Certificate documents: serialization, content hashing and re-verification.

Every float is written as a decimal string with 17 significant digits, which
round-trips binary64 exactly.  The content hash is the SHA-256 of the
canonical JSON of the document without its ``hash`` and ``timestamp`` fields.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .eigen import EigenCertificate, EigenX, re_margin
from .radii import p_upper
from .steady import ModelParams, SteadyCertificate, SteadyX

FORMAT = 1
STEADY = "steady"
EIGEN = "eigen"
NO_UNSTABLE = "no-unstable-candidate"
_VOLATILE = ("hash", "timestamp")


class CertificateError(ValueError):
    """Unreadable, inconsistent or tampered certificate."""


class HashMismatch(CertificateError):
    pass


def fmt(x) -> Optional[str]:
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def num(s) -> Optional[float]:
    return None if s is None else float(s)


def _arr(a) -> List[str]:
    return [fmt(x) for x in np.asarray(a, dtype=float).ravel()]


def _unarr(a) -> np.ndarray:
    return np.array([float(x) for x in a], dtype=float)


def canonical(doc: dict) -> str:
    body = {k: v for k, v in doc.items() if k not in _VOLATILE}
    return json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_hash(doc: dict) -> str:
    return hashlib.sha256(canonical(doc).encode("ascii")).hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def seal(doc: dict, timestamp: bool = True) -> dict:
    doc = {k: v for k, v in doc.items() if k not in _VOLATILE}
    doc["hash"] = content_hash(doc)
    if timestamp:
        doc["timestamp"] = _timestamp()
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def write(doc: dict, path: Union[str, Path]) -> str:
    doc = seal(doc)
    Path(path).write_text(dumps(doc))
    return doc["hash"]


def load(path: Union[str, Path], check_hash: bool = True) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CertificateError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("kind") not in (STEADY, EIGEN, NO_UNSTABLE):
        raise CertificateError(f"{path}: not a certificate")
    if check_hash and doc.get("hash") != content_hash(doc):
        raise HashMismatch(f"{path}: stored hash does not match the content")
    return doc


# -- steady ---------------------------------------------------------------------------------------


def steady_doc(cert: SteadyCertificate) -> dict:
    margins = cert.positivity_margins
    return {
        "kind": STEADY,
        "format": FORMAT,
        "params": dict(cert.params),
        "m": int(cert.m),
        "nu": fmt(cert.nu),
        "Y": fmt(cert.Y),
        "Z0": fmt(cert.Z0),
        "Z1": fmt(cert.Z1),
        "Z2_coeffs": [fmt(c) for c in cert.Z2_coeffs],
        "r_min": fmt(cert.r_min),
        "r_max": fmt(cert.r_max),
        "positivity_margins": None if margins is None else [fmt(x) for x in margins],
        "u_error_bound": fmt(cert.u_error_bound),
        "tainted": bool(cert.tainted),
        "valid": bool(cert.valid),
        "failure": cert.failure,
        "v0": fmt(cert.v0),
        "candidate": {k: _arr(cert.candidate[k]) for k in "vwps"},
    }


def steady_from_doc(doc: dict) -> Tuple[SteadyCertificate, SteadyX]:
    if doc.get("kind") != STEADY:
        raise CertificateError("not a steady certificate")
    try:
        params = ModelParams.from_strings(doc["params"])
        nu = float(doc["nu"])
        cand = {k: _unarr(doc["candidate"][k]) for k in "vwps"}
        margins = doc["positivity_margins"]
        cert = SteadyCertificate(
            params=params.as_dict(), m=int(doc["m"]), nu=nu, Y=num(doc["Y"]), Z0=num(doc["Z0"]),
            Z1=num(doc["Z1"]), Z2_coeffs=tuple(num(c) for c in doc["Z2_coeffs"]),
            r_min=num(doc["r_min"]), r_max=num(doc["r_max"]),
            positivity_margins=None if margins is None else tuple(num(x) for x in margins),
            u_error_bound=num(doc["u_error_bound"]), tainted=bool(doc["tainted"]),
            candidate={k: v.tolist() for k, v in cand.items()}, failure=doc.get("failure"),
            v0=num(doc.get("v0")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateError(f"malformed steady certificate: {exc}") from exc
    X = SteadyX(cand["v"], cand["w"], cand["p"], cand["s"], params, nu)
    return cert, X


# -- eigen ----------------------------------------------------------------------------------------


def eigen_doc(cert: EigenCertificate, X: EigenX, steady: dict) -> dict:
    return {
        "kind": EIGEN,
        "format": FORMAT,
        "steady_hash": steady["hash"],
        "params": dict(steady["params"]),
        "nu": steady["nu"],
        "n": int(cert.n),
        "k0": int(cert.k0),
        "gamma": fmt(cert.gamma),
        "gamma_tilde": fmt(cert.gamma_tilde),
        "lambda_re": fmt(cert.lambda_re),
        "lambda_im": fmt(cert.lambda_im),
        "Y": fmt(cert.Y),
        "Z0": fmt(cert.Z0),
        "Z1": fmt(cert.Z1),
        "Z2": fmt(cert.Z2),
        "r": fmt(cert.r_min),
        "r_min": fmt(cert.r_min),
        "r_max": fmt(cert.r_max),
        "re_margin": fmt(cert.re_margin),
        "steady_radius": fmt(cert.steady_radius),
        "tainted": bool(cert.tainted),
        "valid": bool(cert.valid),
        "failure": cert.failure,
        "candidate": {
            "xi_re": _arr(np.real(X.xi)), "xi_im": _arr(np.imag(X.xi)),
            "eta_re": _arr(np.real(X.eta)), "eta_im": _arr(np.imag(X.eta)),
        },
    }


def no_unstable_doc(steady: dict, n: int, lam: Optional[complex], reason: str) -> dict:
    return {
        "kind": NO_UNSTABLE,
        "format": FORMAT,
        "steady_hash": steady["hash"],
        "params": dict(steady["params"]),
        "n": int(n),
        "leading_lambda_re": None if lam is None else fmt(complex(lam).real),
        "leading_lambda_im": None if lam is None else fmt(complex(lam).imag),
        "reason": reason,
    }


def eigen_from_doc(doc: dict) -> EigenCertificate:
    if doc.get("kind") != EIGEN:
        raise CertificateError("not an eigen certificate")
    try:
        return EigenCertificate(
            n=int(doc["n"]), k0=int(doc["k0"]), gamma=num(doc["gamma"]),
            gamma_tilde=num(doc["gamma_tilde"]), lambda_re=num(doc["lambda_re"]),
            lambda_im=num(doc["lambda_im"]), Y=num(doc["Y"]), Z0=num(doc["Z0"]), Z1=num(doc["Z1"]),
            Z2=num(doc["Z2"]), r_min=num(doc["r_min"]), r_max=num(doc["r_max"]),
            re_margin=num(doc["re_margin"]), tainted=bool(doc["tainted"]),
            steady_radius=num(doc["steady_radius"]), failure=doc.get("failure"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateError(f"malformed eigen certificate: {exc}") from exc


# -- verification ---------------------------------------------------------------------------------


@dataclass
class Verdict:
    ok: bool
    kind: str
    reasons: List[str] = field(default_factory=list)
    p_at_r: Optional[float] = None

    def fail(self, why: str):
        self.ok = False
        self.reasons.append(why)


def _check_radius(v: Verdict, Y, Z0, Z1, z2: Sequence[float], r_min, r_max):
    bounds = [Y, Z0, Z1, *z2]
    if any(b is None or not math.isfinite(b) for b in bounds):
        v.fail("non-finite bound")
        return
    if Y < 0 or any(c < 0 for c in z2):
        v.fail("negative Y or Z2 coefficient")
    if r_min is None or r_max is None:
        v.fail("no verified radius")
        return
    if not 0 < r_min <= r_max:
        v.fail("radius interval is not ordered")
        return
    v.p_at_r = p_upper(Y, Z0, Z1, z2, r_min)
    if not v.p_at_r < 0:
        v.fail(f"P(r_min) upper bound {v.p_at_r:.3e} is not negative")
    p_hi = p_upper(Y, Z0, Z1, z2, r_max)
    if not p_hi < 0:
        v.fail(f"P(r_max) upper bound {p_hi:.3e} is not negative")


def verify_doc(doc: dict, steady_index: Optional[Dict[str, dict]] = None) -> Verdict:
    """Re-check a certificate from its stored bounds alone."""
    kind = doc.get("kind", "?")
    v = Verdict(True, kind)
    if doc.get("hash") != content_hash(doc):
        v.fail("hash mismatch")
        return v
    try:
        if kind == STEADY:
            cert, _ = steady_from_doc(doc)
            if not cert.nu > 1:
                v.fail("nu must exceed 1")
            if cert.tainted:
                v.fail("tainted")
            _check_radius(v, cert.Y, cert.Z0, cert.Z1, cert.Z2_coeffs, cert.r_min, cert.r_max)
            mg = cert.positivity_margins
            if mg is None or not all(x > 0 for x in mg):
                v.fail("positivity margins are not positive")
        elif kind == EIGEN:
            cert = eigen_from_doc(doc)
            nu = float(doc["nu"])
            if not 1 < cert.gamma < cert.gamma_tilde < nu:
                v.fail("weights violate 1 < gamma < gamma_tilde < nu")
            if not 0 <= cert.k0 < cert.n:
                v.fail("k0 out of range")
            if cert.tainted:
                v.fail("tainted")
            _check_radius(v, cert.Y, cert.Z0, cert.Z1, (cert.Z2,), cert.r_min, cert.r_max)
            if cert.r_min is not None:
                margin = re_margin(cert.lambda_re, cert.r_min)
                if not margin > 0:
                    v.fail(f"Re(lambda) - r = {margin:.3e} is not positive")
                if cert.re_margin is None or cert.re_margin > margin:
                    v.fail("stored re_margin exceeds the recomputed one")
            if steady_index is not None:
                ref = steady_index.get(doc.get("steady_hash"))
                if ref is None:
                    v.fail("referenced steady certificate not found")
                else:
                    sv = verify_doc(ref)
                    if not sv.ok:
                        v.fail("referenced steady certificate does not verify")
                    if num(ref.get("r_min")) is None or num(ref["r_min"]) > cert.steady_radius:
                        v.fail("steady radius used here is smaller than the certified one")
                    if ref.get("nu") != doc.get("nu") or ref.get("params") != doc.get("params"):
                        v.fail("parameters differ from the referenced steady certificate")
        elif kind == NO_UNSTABLE:
            v.reasons.append("no claim: no unstable candidate was found")
        else:
            v.fail("unknown certificate kind")
    except CertificateError as exc:
        v.fail(str(exc))
    return v
